use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::spec::SweepSpec;
use crate::error::Result;
use crate::seminorms::least_squares_slope;

/// Which estimate a sweep probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Energy,
    Comparison,
    Sobolev,
    TimeDerivative,
    Fractional,
}

impl SweepKind {
    pub const ALL: [SweepKind; 5] = [
        SweepKind::Energy,
        SweepKind::Comparison,
        SweepKind::Sobolev,
        SweepKind::TimeDerivative,
        SweepKind::Fractional,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Energy => "energy",
            SweepKind::Comparison => "comparison",
            SweepKind::Sobolev => "sobolev",
            SweepKind::TimeDerivative => "time-derivative",
            SweepKind::Fractional => "fractional",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One ε of a sweep. Quantities a sweep does not measure are `None` and
/// serialize as empty CSV cells.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub converged: bool,
    pub error: Option<String>,
    pub newton_iterations: usize,
    /// `∫_{Q_R} |Du_ε|^p + sup_t ‖u_ε − u‖²_{L²(B_R)}`.
    pub energy_lhs: Option<f64>,
    /// `‖Du‖^p_{L^p(Q_R)} + λ^p + 1`.
    pub energy_rhs: Option<f64>,
    pub comparison_lhs: Option<f64>,
    /// `sup_t ‖u_ε − u‖²_{L²(B_R)}`.
    pub comparison_u: Option<f64>,
    /// `∫_{Q_R} |V(Du_ε) − V(Du)|²`.
    pub comparison_v: Option<f64>,
    /// `ε (‖Du‖^p + 1) + ‖f − f_ε‖_{p′} (‖Du‖ + λ + 1)`.
    pub comparison_model: Option<f64>,
    /// `∫_{Q_{ρ/2}} |D_x V(Du_ε)|²`.
    pub sobolev: Option<f64>,
    pub sobolev_rhs: Option<f64>,
    /// `‖f − f_ε‖_{L^{p′}(Q_R)}`.
    pub mollification_error: Option<f64>,
    /// `‖∂_t u_ε‖_{L^{p′}(Q_{r/2})}` by backward differences.
    pub dt_lhs: Option<f64>,
    pub dt_rhs: Option<f64>,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// A summary number checked against a threshold. `passed` is `None` when
/// the check does not apply (for instance all values vanish) or the
/// statistic is informational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub name: String,
    pub value: Option<f64>,
    pub threshold: f64,
    pub relation: Relation,
    pub passed: Option<bool>,
    pub note: String,
}

impl Statistic {
    /// A gating check; `None` values are not applicable.
    pub fn check(
        name: &str,
        value: Option<f64>,
        relation: Relation,
        threshold: f64,
        note: &str,
    ) -> Self {
        let passed = value.map(|v| match relation {
            Relation::AtMost => v <= threshold,
            Relation::AtLeast => v >= threshold,
        });
        Self {
            name: name.into(),
            value,
            threshold,
            relation,
            passed,
            note: note.into(),
        }
    }

    /// Reported alongside the checks but never gating.
    pub fn info(
        name: &str,
        value: Option<f64>,
        relation: Relation,
        threshold: f64,
        note: &str,
    ) -> Self {
        Self {
            passed: None,
            ..Self::check(name, value, relation, threshold, note)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub spec: SweepSpec,
    /// Ordered as `spec.eps_list`.
    pub rows: Vec<SweepRow>,
    pub statistics: Vec<Statistic>,
    /// Seconds per row; kept out of the CSV so reruns compare byte for byte.
    pub wall_times: Vec<f64>,
}

impl SweepReport {
    /// False when any gating statistic failed or a row did not converge.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
            && self.statistics.iter().all(|s| s.passed != Some(false))
    }

    pub fn statistic(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.name == name)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        wtr.write_record(ROW_COLUMNS)?;
        for row in &self.rows {
            wtr.serialize(row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// JSON with the sweep settings, statistics and timings.
    pub fn write_manifest<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// CSV header, in field order of [`SweepRow`].
pub const ROW_COLUMNS: [&str; 16] = [
    "eps",
    "converged",
    "error",
    "newton_iterations",
    "energy_lhs",
    "energy_rhs",
    "comparison_lhs",
    "comparison_u",
    "comparison_v",
    "comparison_model",
    "sobolev",
    "sobolev_rhs",
    "mollification_error",
    "dt_lhs",
    "dt_rhs",
    "theta",
];

/// `max / min` of the finite values. `None` when there are none or all
/// vanish; infinite when only some vanish.
pub fn max_min_ratio(values: &[f64]) -> Option<f64> {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    if v.is_empty() || max == 0.0 {
        return None;
    }
    if min <= 0.0 {
        return Some(f64::INFINITY);
    }
    Some(max / min)
}

/// Least-squares slope of `ln value` against `ln ε` over the last `tail`
/// points, skipping non-positive values. `None` with fewer than two usable points.
pub fn tail_slope(eps: &[f64], values: &[f64], tail: usize) -> Option<f64> {
    let start = eps.len().min(values.len()).saturating_sub(tail);
    let pts: Vec<(f64, f64)> = eps[start..]
        .iter()
        .zip(&values[start..])
        .filter(|(e, v)| **e > 0.0 && **v > 0.0 && v.is_finite())
        .map(|(e, v)| (e.ln(), v.ln()))
        .collect();
    (pts.len() >= 2).then(|| least_squares_slope(&pts))
}
