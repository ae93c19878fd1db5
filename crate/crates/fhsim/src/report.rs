//! Study tables and indicator maps as CSV, Markdown and JSON.
//!
//! CSV and JSON carry full precision; Markdown rounds to four decimals like
//! a printed table.

use std::fmt::Write as _;
use std::str::FromStr;

use fhsim_core::sim::IndicatorSample;
use fhsim_core::{ConvergenceRecord, Rect};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            "json" => Ok(Format::Json),
            other => Err(Error::usage(format!("unknown format `{other}` (expected csv, md or json)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    /// `[x0, x1, y0, y1]`.
    pub rect: [f64; 4],
    pub target: [u32; 2],
    pub exact: f64,
    pub rows: Vec<StudyRow>,
    pub fitted_rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub n: usize,
    pub h: f64,
    pub lambda_h: f64,
    pub error: f64,
    pub order: Option<f64>,
}

impl StudyReport {
    pub fn new(rect: &Rect, target: (u32, u32), exact: f64, records: &[ConvergenceRecord]) -> Self {
        StudyReport {
            rect: [rect.x0, rect.x1, rect.y0, rect.y1],
            target: [target.0, target.1],
            exact,
            rows: records
                .iter()
                .map(|r| StudyRow { n: r.n, h: r.h, lambda_h: r.lambda_h, error: r.error, order: r.order })
                .collect(),
            fitted_rate: fhsim_core::study::fitted_rate(records),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Markdown => self.to_markdown(),
            Format::Json => self.to_json(),
        }
    }

    /// `h,lambda_h,error,order` with the order left blank on the first row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,lambda_h,error,order\n");
        for r in &self.rows {
            let order = r.order.map(|o| o.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{}", r.h, r.lambda_h, r.error, order);
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| h | λ_h | \\|λ − λ_h\\| | order |\n|---|---|---|---|\n");
        for r in &self.rows {
            let order = r.order.map(|o| format!("{o:.4}")).unwrap_or_else(|| "-".to_string());
            let _ = writeln!(s, "| 1/{} | {:.4} | {:.4} | {} |", r.n, r.lambda_h, r.error, order);
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// `re,im,indicator` per cell; the indicator is blank for cells whose contour
/// would enclose the origin.
pub fn indicator_map_csv(samples: &[IndicatorSample]) -> String {
    let mut s = String::from("re,im,indicator\n");
    for c in samples {
        let v = c.indicator.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{}", c.re, c.im, v);
    }
    s
}
