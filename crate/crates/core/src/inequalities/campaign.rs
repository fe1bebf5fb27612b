use std::fmt;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pair::{Margin, PairChecker, RELATIVE_SLACK};
use crate::error::{Error, Result};
use crate::maps::{AmbientVector, DegenParams, QuadratureConfig};

const CHUNK: usize = 4096;

/// Tolerance for the symmetry of the first monotonicity inequality.
const SYMMETRY_TOL: f64 = 1e-12;

/// Distance from the degeneracy sphere used by the targeted strata.
const SPHERE_BAND: f64 = 1e-6;

/// Parameters of a randomized campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Samples per `(p, λ)` combination.
    pub num_samples: usize,
    pub p_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
    /// Range of the log-uniform magnitudes of `ξ` and `η`.
    pub magnitude_range: (f64, f64),
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            num_samples: 1_000_000,
            p_values: vec![2.0, 2.5, 3.0, 4.0],
            lambda_values: vec![0.0, 0.5, 1.0, 2.0],
            magnitude_range: (1e-6, 1e6),
            seed: 0x5eed,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        let mut failures = Vec::new();
        let (lo, hi) = self.magnitude_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            failures.push(format!(
                "magnitude range must satisfy 0 < min < max (got [{lo}, {hi}])"
            ));
        }
        for &p in &self.p_values {
            if !(p.is_finite() && p >= 2.0) {
                failures.push(format!("p must satisfy p >= 2 (got {p})"));
            }
        }
        for &l in &self.lambda_values {
            if !(l.is_finite() && l >= 0.0) {
                failures.push(format!("lambda must satisfy lambda >= 0 (got {l})"));
            }
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(failures))
        }
    }
}

/// The inequalities tracked by a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    UnitVector,
    Monotonicity4p2,
    Monotonicity2p1,
    VVersusH,
    ProfileBound,
    WeightDerivative,
    Symmetry,
    ScaleCovariance,
}

impl Inequality {
    pub const ALL: [Inequality; 8] = [
        Inequality::UnitVector,
        Inequality::Monotonicity4p2,
        Inequality::Monotonicity2p1,
        Inequality::VVersusH,
        Inequality::ProfileBound,
        Inequality::WeightDerivative,
        Inequality::Symmetry,
        Inequality::ScaleCovariance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::UnitVector => "unit_vector",
            Inequality::Monotonicity4p2 => "monotonicity_4p2",
            Inequality::Monotonicity2p1 => "monotonicity_2p1",
            Inequality::VVersusH => "v_vs_h",
            Inequality::ProfileBound => "profile_bound",
            Inequality::WeightDerivative => "weight_derivative",
            Inequality::Symmetry => "symmetry",
            Inequality::ScaleCovariance => "scale_covariance",
        }
    }

    /// Agreement checks carry their tolerance inside the margin.
    fn slack(self) -> f64 {
        match self {
            Inequality::Symmetry | Inequality::ScaleCovariance => 0.0,
            _ => RELATIVE_SLACK,
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The sample at which a worst margin was observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: u64,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub margin: Margin,
}

/// Aggregate of one inequality over one `(p, λ)` combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityStats {
    pub evaluated: u64,
    pub not_applicable: u64,
    pub violations: u64,
    /// Smallest relative margin seen; `+∞` when nothing was evaluated.
    pub worst_relative_margin: f64,
    pub worst: Option<Witness>,
}

impl Default for InequalityStats {
    fn default() -> Self {
        Self {
            evaluated: 0,
            not_applicable: 0,
            violations: 0,
            worst_relative_margin: f64::INFINITY,
            worst: None,
        }
    }
}

impl InequalityStats {
    fn record(
        &mut self,
        ineq: Inequality,
        margin: Option<Margin>,
        index: u64,
        xi: &[f64],
        eta: &[f64],
    ) {
        let Some(m) = margin else {
            self.not_applicable += 1;
            return;
        };
        self.evaluated += 1;
        let ok = m.holds_with(ineq.slack()) && m.value().is_finite();
        if !ok {
            self.violations += 1;
        }
        let rel = if m.value().is_finite() {
            m.relative()
        } else {
            f64::NEG_INFINITY
        };
        let better = match &self.worst {
            None => true,
            Some(w) => (rel, index) < (self.worst_relative_margin, w.index),
        };
        if better {
            self.worst_relative_margin = rel;
            self.worst = Some(Witness {
                index,
                xi: xi.to_vec(),
                eta: eta.to_vec(),
                margin: m,
            });
        }
    }

    /// Order independent merge; ties on the margin go to the lower sample index.
    fn merge(mut self, other: Self) -> Self {
        self.evaluated += other.evaluated;
        self.not_applicable += other.not_applicable;
        self.violations += other.violations;
        let take_other = match (&self.worst, &other.worst) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(a), Some(b)) => {
                (other.worst_relative_margin, b.index) < (self.worst_relative_margin, a.index)
            }
        };
        if take_other {
            self.worst_relative_margin = other.worst_relative_margin;
            self.worst = other.worst;
        }
        self
    }
}

/// Results for one `(p, λ)` combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComboReport {
    pub p: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub samples: u64,
    pub stats: Vec<(Inequality, InequalityStats)>,
    /// Largest `|ξ−η|^p / |V(ξ)−V(η)|²` observed (only for `λ = 0`, `p > 2`).
    pub lind_sup: Option<f64>,
}

impl ComboReport {
    pub fn violations(&self) -> u64 {
        self.stats.iter().map(|(_, s)| s.violations).sum()
    }

    pub fn get(&self, ineq: Inequality) -> &InequalityStats {
        &self
            .stats
            .iter()
            .find(|(i, _)| *i == ineq)
            .expect("every inequality is tracked")
            .1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub config: SampleConfig,
    pub combos: Vec<ComboReport>,
}

impl CampaignReport {
    pub fn violations(&self) -> u64 {
        self.combos.iter().map(ComboReport::violations).sum()
    }

    pub fn total_samples(&self) -> u64 {
        self.combos.iter().map(|c| c.samples).sum()
    }

    /// Largest observed `|ξ−η|^p / |V(ξ)−V(η)|²` per `p` over the `λ = 0` combinations.
    pub fn lind_sup_by_p(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for c in &self.combos {
            if let Some(s) = c.lind_sup {
                match out.iter_mut().find(|(p, _)| *p == c.p) {
                    Some(entry) => entry.1 = entry.1.max(s),
                    None => out.push((c.p, s)),
                }
            }
        }
        out
    }

    /// One CSV row per combination and inequality.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "p",
            "lambda",
            "alpha",
            "inequality",
            "evaluated",
            "not_applicable",
            "violations",
            "worst_relative_margin",
            "worst_index",
            "worst_xi",
            "worst_eta",
            "worst_lesser",
            "worst_greater",
        ])?;
        let join = |v: &[f64]| {
            v.iter()
                .map(|c| format!("{c:e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for c in &self.combos {
            for (ineq, s) in &c.stats {
                let (idx, xi, eta, lesser, greater) = match &s.worst {
                    Some(w) => (
                        w.index.to_string(),
                        join(&w.xi),
                        join(&w.eta),
                        format!("{:e}", w.margin.lesser),
                        format!("{:e}", w.margin.greater),
                    ),
                    None => Default::default(),
                };
                wtr.write_record([
                    c.p.to_string(),
                    c.lambda.to_string(),
                    c.alpha.to_string(),
                    ineq.name().to_string(),
                    s.evaluated.to_string(),
                    s.not_applicable.to_string(),
                    s.violations.to_string(),
                    format!("{:e}", s.worst_relative_margin),
                    idx,
                    xi,
                    eta,
                    lesser,
                    greater,
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Short human readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} samples over {} (p, lambda) combinations, {} violations\n",
            self.total_samples(),
            self.combos.len(),
            self.violations()
        );
        for ineq in Inequality::ALL {
            let mut worst = f64::INFINITY;
            let mut viol = 0;
            let mut evaluated = 0;
            for c in &self.combos {
                let st = c.get(ineq);
                worst = worst.min(st.worst_relative_margin);
                viol += st.violations;
                evaluated += st.evaluated;
            }
            s.push_str(&format!(
                "  {:<18} evaluated {:>10}  violations {:>4}  worst relative margin {:e}\n",
                ineq.name(),
                evaluated,
                viol,
                worst
            ));
        }
        for (p, sup) in self.lind_sup_by_p() {
            s.push_str(&format!(
                "  sup |xi-eta|^p/|V(xi)-V(eta)|^2 at p = {p}: {sup:.6e}\n"
            ));
        }
        s
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    stats: Vec<InequalityStats>,
    lind_sup: Option<f64>,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            stats: vec![InequalityStats::default(); Inequality::ALL.len()],
            lind_sup: None,
        }
    }

    fn merge(self, other: Self) -> Self {
        Self {
            stats: self
                .stats
                .into_iter()
                .zip(other.stats)
                .map(|(a, b)| a.merge(b))
                .collect(),
            lind_sup: match (self.lind_sup, other.lind_sup) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
        }
    }

    fn record(
        &mut self,
        ineq: Inequality,
        margin: Option<Margin>,
        index: u64,
        xi: &[f64],
        eta: &[f64],
    ) {
        self.stats[ineq as usize].record(ineq, margin, index, xi, eta);
    }
}

struct Sampler {
    lo: f64,
    hi: f64,
    lambda: f64,
}

impl Sampler {
    fn magnitude(&self, rng: &mut ChaCha8Rng) -> f64 {
        (rng.gen::<f64>() * (self.hi.ln() - self.lo.ln()) + self.lo.ln()).exp()
    }

    fn near_sphere(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.lambda == 0.0 {
            rng.gen::<f64>() * SPHERE_BAND
        } else {
            (self.lambda + (2.0 * rng.gen::<f64>() - 1.0) * SPHERE_BAND).max(0.0)
        }
    }

    fn angle(rng: &mut ChaCha8Rng) -> f64 {
        rng.gen::<f64>() * std::f64::consts::TAU
    }

    fn polar(r: f64, theta: f64) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        [r * c, r * s]
    }

    /// Draws the `i`-th pair. Strata cycle with period 8: four generic draws,
    /// one vector on the degeneracy sphere (occasionally zero), both on it,
    /// collinear and anti-collinear pairs.
    fn pair(&self, i: u64, rng: &mut ChaCha8Rng) -> ([f64; 2], [f64; 2]) {
        match i % 8 {
            4 => {
                let r = if i % 64 == 4 {
                    0.0
                } else {
                    self.near_sphere(rng)
                };
                let a = Self::polar(r, Self::angle(rng));
                let b = Self::polar(self.magnitude(rng), Self::angle(rng));
                if (i / 8) % 2 == 0 {
                    (a, b)
                } else {
                    (b, a)
                }
            }
            5 => (
                Self::polar(self.near_sphere(rng), Self::angle(rng)),
                Self::polar(self.near_sphere(rng), Self::angle(rng)),
            ),
            6 | 7 => {
                let theta = Self::angle(rng);
                let flip = if i % 8 == 7 {
                    std::f64::consts::PI
                } else {
                    0.0
                };
                (
                    Self::polar(self.magnitude(rng), theta),
                    Self::polar(self.magnitude(rng), theta + flip),
                )
            }
            _ => (
                Self::polar(self.magnitude(rng), Self::angle(rng)),
                Self::polar(self.magnitude(rng), Self::angle(rng)),
            ),
        }
    }
}

/// `|a − b| ≤ tol·max(|a|, |b|)` as a margin checked without further slack.
fn agreement(a: f64, b: f64, tol: f64) -> Margin {
    Margin::new((a - b).abs(), tol * a.abs().max(b.abs()))
}

fn weaker(a: Margin, b: Margin) -> Margin {
    if b.relative() < a.relative() {
        b
    } else {
        a
    }
}

fn run_chunk(
    checker: &PairChecker,
    sampler: &Sampler,
    seed: u64,
    combo: u64,
    chunk: u64,
    range: std::ops::Range<u64>,
) -> Result<Accumulator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((combo << 32) | chunk);
    let mut acc = Accumulator::new();
    let lambda = checker.params().lambda();
    let p = checker.params().p();
    for i in range {
        let (a, b) = sampler.pair(i, &mut rng);
        let (xi, eta) = (AmbientVector::xy(a[0], a[1]), AmbientVector::xy(b[0], b[1]));
        let m = checker.check(&xi, &eta)?;
        acc.record(Inequality::UnitVector, m.unit_vector_margin, i, &a, &b);
        acc.record(
            Inequality::Monotonicity4p2,
            Some(m.monotonicity_4p2_margin),
            i,
            &a,
            &b,
        );
        acc.record(
            Inequality::Monotonicity2p1,
            m.monotonicity_2p1_margin,
            i,
            &a,
            &b,
        );
        acc.record(Inequality::VVersusH, Some(m.v_vs_h_margin), i, &a, &b);
        if let Some(r) = m.lind_ratio {
            acc.lind_sup = Some(acc.lind_sup.map_or(r, |s| s.max(r)));
        }
        let s = checker.check_scalar(xi.norm())?;
        acc.record(Inequality::ProfileBound, Some(s.profile_bound), i, &a, &b);
        acc.record(
            Inequality::WeightDerivative,
            Some(s.weight_derivative),
            i,
            &a,
            &b,
        );

        if i % 16 == 0 {
            let swapped = checker.check(&eta, &xi)?;
            let (f, g) = (m.monotonicity_4p2_margin, swapped.monotonicity_4p2_margin);
            let sym = Margin::new(
                (f.value() - g.value()).abs(),
                SYMMETRY_TOL * f.scale().max(g.scale()),
            );
            acc.record(Inequality::Symmetry, Some(sym), i, &a, &b);

            let cov = (lambda == 0.0).then(|| -> Result<Margin> {
                let s = (rng.gen::<f64>() * (10f64.ln() - 0.1f64.ln()) + 0.1f64.ln()).exp();
                let scaled = checker.check(&xi.scaled(s), &eta.scaled(s))?;
                let factor = s.powf(p);
                let (u, v) = (scaled.monotonicity_4p2_margin, m.monotonicity_4p2_margin);
                Ok(weaker(
                    agreement(u.greater, factor * v.greater, RELATIVE_SLACK),
                    agreement(u.lesser, factor * v.lesser, RELATIVE_SLACK),
                ))
            });
            acc.record(Inequality::ScaleCovariance, cov.transpose()?, i, &a, &b);
        } else {
            acc.record(Inequality::Symmetry, None, i, &a, &b);
            acc.record(Inequality::ScaleCovariance, None, i, &a, &b);
        }
    }
    Ok(acc)
}

/// Runs the randomized campaign over every `(p, λ)` combination.
///
/// Deterministic for a given configuration: each chunk of 4096 samples draws
/// from its own ChaCha stream and merged aggregates do not depend on the
/// order in which chunks finish.
pub fn run_campaign(config: &SampleConfig) -> Result<CampaignReport> {
    config.validate()?;
    let quad = QuadratureConfig::default();
    let mut combos = Vec::new();
    for (pi, &p) in config.p_values.iter().enumerate() {
        for (li, &lambda) in config.lambda_values.iter().enumerate() {
            let params = DegenParams::with_default_alpha(p, lambda, 0.0)?;
            let checker = PairChecker::new(&params, &quad)?;
            let sampler = Sampler {
                lo: config.magnitude_range.0,
                hi: config.magnitude_range.1,
                lambda,
            };
            let combo = (pi * config.lambda_values.len() + li) as u64;
            let n = config.num_samples as u64;
            let chunks = n.div_ceil(CHUNK as u64);
            let acc = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let start = c * CHUNK as u64;
                    run_chunk(
                        &checker,
                        &sampler,
                        config.seed,
                        combo,
                        c,
                        start..(start + CHUNK as u64).min(n),
                    )
                })
                .try_reduce(Accumulator::new, |a, b| Ok(a.merge(b)))?;
            combos.push(ComboReport {
                p,
                lambda,
                alpha: params.alpha(),
                samples: n,
                stats: Inequality::ALL.iter().copied().zip(acc.stats).collect(),
                lind_sup: acc.lind_sup,
            });
        }
    }
    Ok(CampaignReport {
        config: config.clone(),
        combos,
    })
}
