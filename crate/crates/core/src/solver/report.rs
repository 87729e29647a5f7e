use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::barron::BarronCertificate;

pub const CSV_HEADER: &str =
    "t,energy,gap,h1_error,contraction,barron_computed,barron_bound,W,truncation_residual,drift,drift_bound";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub t: usize,
    pub energy: f64,
    pub gap: Option<f64>,
    pub h1_error: Option<f64>,
    pub contraction: Option<f64>,
    pub barron_computed: f64,
    pub barron_bound: Option<f64>,
    #[serde(rename = "W")]
    pub bandlimit: usize,
    pub truncation_residual: f64,
    pub drift: Option<f64>,
    pub drift_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Schedule,
    Tolerance,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub problem: String,
    pub dim: usize,
    #[serde(rename = "M")]
    pub grid_points: usize,
    pub eta: f64,
    pub lambda: f64,
    pub cap_lambda: f64,
    pub poincare: f64,
    pub stated_rate: f64,
    pub conservative_rate: f64,
    pub scheduled_iterations: Option<usize>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub reference_energy: Option<f64>,
    pub final_energy: f64,
    pub final_gap: Option<f64>,
    pub final_h1_error: Option<f64>,
    /// `sqrt(2·gap/λ)` from strong convexity.
    pub h1_error_bound: Option<f64>,
    pub max_contraction: Option<f64>,
    pub rate_violations: usize,
    pub energy_monotone: bool,
    pub ledger_dominated: bool,
    pub final_bandlimit: usize,
    /// Final ledger bound; null when absent or once the recursion overflows.
    #[serde(serialize_with = "inf_as_null")]
    pub certificate_value: Option<f64>,
    pub certificate_bandlimit: Option<f64>,
}

fn inf_as_null<S: serde::Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_finite() => s.serialize_some(x),
        _ => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub summary: ReportSummary,
    pub records: Vec<IterateRecord>,
    /// Certificate of the last iterate with its full audit trail.
    pub ledger: Option<BarronCertificate<f64>>,
}

fn num(out: &mut String, v: f64) {
    // Empty float sums are -0.0.
    let v = v + 0.0;
    if v == 0.0 || (v.abs() >= 1e-4 && v.abs() < 1e15) || !v.is_finite() {
        let _ = write!(out, "{v}");
    } else {
        let _ = write!(out, "{v:e}");
    }
}

fn opt(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        num(out, v);
    }
}

impl ConvergenceReport {
    /// One row per iterate; absent values are empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = write!(out, "{},", r.t);
            num(&mut out, r.energy);
            out.push(',');
            opt(&mut out, r.gap);
            out.push(',');
            opt(&mut out, r.h1_error);
            out.push(',');
            opt(&mut out, r.contraction);
            out.push(',');
            num(&mut out, r.barron_computed);
            out.push(',');
            opt(&mut out, r.barron_bound);
            let _ = write!(out, ",{},", r.bandlimit);
            num(&mut out, r.truncation_residual);
            out.push(',');
            opt(&mut out, r.drift);
            out.push(',');
            opt(&mut out, r.drift_bound);
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }

    /// Contraction factors `gap_t / gap_{t-1}` over steps whose previous gap exceeds `floor`.
    pub fn contractions_above(&self, floor: f64) -> Vec<f64> {
        self.records
            .windows(2)
            .filter_map(|w| match (w[0].gap, w[1].gap) {
                (Some(a), Some(b)) if a > floor => Some(b / a),
                _ => None,
            })
            .collect()
    }
}
