use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::report::{
    max_min_ratio, tail_slope, Relation, Statistic, SweepKind, SweepReport, SweepRow,
};
use super::spec::SweepSpec;
use crate::error::{Error, Result};
use crate::grid::{
    discrete_gradient, manufactured_problem, mollify_analytic, mollify_source,
    solve_cauchy_dirichlet, ProblemSpec, ScalarField, Source, Trajectory, VectorField,
};
use crate::maps::{GProfile, QuadratureConfig};
use crate::seminorms::{
    grad_l2_of_v, lp_norm_cylinder, nikolskii_fit, parabolic_besov_norm, sup_l2_in_time,
    triangle_integral, Cylinder, LatticeSeries,
};

/// Number of trailing ε used by slope fits.
const SLOPE_TAIL: usize = 3;

/// ε-independent data shared by the rows of a sweep.
struct Context {
    spec: SweepSpec,
    /// The catalog problem with `ε = 0`; its exact solution is the reference `u`.
    base: ProblemSpec,
    reference: Trajectory,
    /// `Du` on every triangle of every level.
    reference_gradient: Vec<VectorField>,
    source: Option<Trajectory>,
    profile: GProfile,
    q_big: Cylinder,
    q_rho: Cylinder,
    q_r: Cylinder,
    /// `‖Du‖_{L^p(Q_R)}`.
    du_lp: f64,
}

impl Context {
    fn new(spec: &SweepSpec) -> Result<Self> {
        spec.validate()?;
        let grid = spec.grid;
        let base = manufactured_problem(&spec.problem, grid, spec.params.with_eps(0.0)?)?;
        let reference = match base.exact_trajectory() {
            Some(t) => t,
            None => base.reference_trajectory(),
        };
        let reference_gradient: Vec<VectorField> = match &base.exact_gradient {
            Some(g) => (0..grid.levels())
                .map(|k| centroid_samples(&reference, k, |x, y, t| g(x, y, t)))
                .collect::<Result<_>>()?,
            None => reference.levels().iter().map(discrete_gradient).collect(),
        };
        let source = match &base.source {
            Source::Zero => None,
            s => Some(s.sample(&grid)?),
        };
        let profile = GProfile::tabulated(&spec.params, &QuadratureConfig::default())?;
        let c = spec.cylinders;
        let q_big = c.cylinder(c.big_r)?;
        let p = spec.params.p();
        let du_lp = triangle_integral(&grid, &q_big, |k, i, j, t| {
            let g = reference_gradient[k].at(i, j, t);
            g[0].hypot(g[1]).powf(p)
        })
        .powf(1.0 / p);
        Ok(Self {
            spec: spec.clone(),
            base,
            reference,
            reference_gradient,
            source,
            profile,
            q_big,
            q_rho: c.cylinder(c.rho)?,
            q_r: c.cylinder(c.r)?,
            du_lp,
        })
    }

    fn p(&self) -> f64 {
        self.spec.params.p()
    }

    fn lambda(&self) -> f64 {
        self.spec.params.lambda()
    }

    /// `f_ε`, or `None` when `f = 0`.
    fn mollified_source(&self, eps: f64) -> Result<Option<Trajectory>> {
        match &self.base.source {
            Source::Zero => Ok(None),
            Source::Analytic(f) => Ok(Some(mollify_analytic(
                &|x, y, t| f(x, y, t),
                &self.spec.grid,
                eps,
            )?)),
            Source::Sampled(t) => Ok(Some(mollify_source(t, eps)?)),
        }
    }
}

/// `g` at the centroids of the triangles of level `k`.
fn centroid_samples(
    traj: &Trajectory,
    k: usize,
    g: impl Fn(f64, f64, f64) -> [f64; 2],
) -> Result<VectorField> {
    let grid = traj.grid();
    let space = grid.space;
    let n = space.cells();
    let t = grid.time(k);
    let mut values = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            for tri in 0..2 {
                let [x, y] = space.triangle_centroid(i, j, tri);
                values.push(g(x, y, t));
            }
        }
    }
    VectorField::from_values(space, values)
}

fn difference(a: &Trajectory, b: &Trajectory) -> Result<Trajectory> {
    let levels = a
        .levels()
        .iter()
        .zip(b.levels())
        .map(|(x, y)| {
            let v = x
                .values()
                .iter()
                .zip(y.values())
                .map(|(p, q)| p - q)
                .collect();
            ScalarField::from_values(*x.grid(), v)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(*a.grid(), levels)
}

/// Backward difference quotients, zero on the initial level.
fn time_derivative(u: &Trajectory) -> Result<Trajectory> {
    let grid = *u.grid();
    let tau = grid.tau();
    let mut levels = vec![ScalarField::zeros(grid.space)];
    for w in u.levels().windows(2) {
        let v = w[1]
            .values()
            .iter()
            .zip(w[0].values())
            .map(|(a, b)| (a - b) / tau)
            .collect();
        levels.push(ScalarField::from_values(grid.space, v)?);
    }
    Trajectory::new(grid, levels)
}

/// Solves at `eps` and fills the quantities of `kind`.
fn evaluate(ctx: &Context, eps: f64, kind: SweepKind) -> Result<(SweepRow, f64)> {
    let start = Instant::now();
    let grid = ctx.spec.grid;
    let params = ctx.spec.params.with_eps(eps)?;
    let (p, lambda) = (ctx.p(), ctx.lambda());
    let pp = params.conjugate_exponent();
    let f_eps = ctx.mollified_source(eps)?;
    let mollification_error = match (&ctx.source, &f_eps) {
        (Some(f), Some(fe)) => lp_norm_cylinder(&difference(f, fe)?, &ctx.q_big, pp)?,
        _ => 0.0,
    };
    let source = match &f_eps {
        Some(t) => Source::Sampled(Arc::new(t.clone())),
        None => Source::Zero,
    };
    let problem = ctx.base.clone().with_params(params).with_source(source);
    let mut row = SweepRow {
        eps,
        mollification_error: Some(mollification_error),
        ..SweepRow::default()
    };
    let (u, report) = match solve_cauchy_dirichlet(&problem, &ctx.spec.newton) {
        Ok(out) => out,
        Err(e @ Error::NonConvergence { .. }) => {
            row.error = Some(e.to_string());
            return Ok((row, start.elapsed().as_secs_f64()));
        }
        Err(e) => return Err(e),
    };
    row.converged = true;
    row.newton_iterations = report.total_newton_iterations();
    let grads: Vec<VectorField> = u.levels().iter().map(discrete_gradient).collect();
    let du_eps_p = || {
        triangle_integral(&grid, &ctx.q_big, |k, i, j, t| {
            let g = grads[k].at(i, j, t);
            g[0].hypot(g[1]).powf(p)
        })
    };
    let sup_sq = || -> Result<f64> {
        let d = difference(&u, &ctx.reference)?;
        let s = sup_l2_in_time(
            &d,
            &ctx.q_big.ball(),
            (ctx.q_big.t_start(), ctx.q_big.vertex_time),
        )?;
        Ok(s * s)
    };
    let f_norms = |s: f64| -> Result<(f64, f64)> {
        match &f_eps {
            Some(fe) => Ok((
                lp_norm_cylinder(fe, &ctx.q_big, pp)?,
                parabolic_besov_norm(fe, &ctx.q_big, s, pp)?,
            )),
            None => Ok((0.0, 0.0)),
        }
    };
    match kind {
        SweepKind::Energy => {
            row.energy_lhs = Some(du_eps_p() + sup_sq()?);
            row.energy_rhs = Some(ctx.du_lp.powf(p) + lambda.powf(p) + 1.0);
        }
        SweepKind::Comparison => {
            let mut failure = None;
            let v_term = triangle_integral(&grid, &ctx.q_big, |k, i, j, t| {
                let pair = (
                    ctx.profile.v_map_2d(grads[k].at(i, j, t)),
                    ctx.profile.v_map_2d(ctx.reference_gradient[k].at(i, j, t)),
                );
                match pair {
                    (Ok(a), Ok(b)) => (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2),
                    (Err(e), _) | (_, Err(e)) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            let u_term = sup_sq()?;
            row.comparison_u = Some(u_term);
            row.comparison_v = Some(v_term);
            row.comparison_lhs = Some(u_term + v_term);
            row.comparison_model = Some(
                eps * (ctx.du_lp.powf(p) + 1.0) + mollification_error * (ctx.du_lp + lambda + 1.0),
            );
        }
        SweepKind::Sobolev => {
            let rho = ctx.q_rho.radius;
            let inner = ctx.q_rho.with_radius(0.5 * rho)?;
            row.sobolev = Some(grad_l2_of_v(&u, &ctx.profile, &inner)?);
            let d = ctx.du_lp;
            row.sobolev_rhs = Some(if p > 2.0 {
                let (_, besov) = f_norms((p - 2.0) / p)?;
                (d.powf(p) + d * d + lambda.powf(p) + lambda * lambda + 1.0) / (rho * rho)
                    + besov.powf(pp)
            } else {
                let f_l2 = match &f_eps {
                    Some(fe) => lp_norm_cylinder(fe, &ctx.q_big, 2.0)?,
                    None => 0.0,
                };
                (d * d + lambda * lambda + 1.0) / (rho * rho) + f_l2 * f_l2 + 1.0
            });
        }
        SweepKind::TimeDerivative => {
            let inner = ctx.q_r.with_radius(0.5 * ctx.q_r.radius)?;
            row.dt_lhs = Some(lp_norm_cylinder(&time_derivative(&u)?, &inner, pp)?);
            let d = du_eps_p().powf(1.0 / p);
            let (f_lp, besov) = f_norms((p - 2.0) / p)?;
            let rho = ctx.q_rho.radius;
            let half = 0.5 * (p - 2.0);
            row.dt_rhs = Some(
                (d.powf(p - 1.0) + d.powf(0.5 * p) + d.powf(half)) / rho
                    + d.powf(half) * besov.powf(0.5 * pp)
                    + f_lp,
            );
        }
        SweepKind::Fractional => {
            let h = grid.space.h();
            let shifts = [h, 2.0 * h, 4.0 * h, 8.0 * h];
            let fit = nikolskii_fit(&LatticeSeries::cell_gradients(&u), &ctx.q_rho, p, &shifts)?;
            row.theta = Some(fit.theta);
        }
    }
    Ok((row, start.elapsed().as_secs_f64()))
}

fn run(spec: &SweepSpec, kind: SweepKind, eps_list: &[f64]) -> Result<SweepReport> {
    let ctx = Context::new(spec)?;
    let results: Vec<(SweepRow, f64)> = eps_list
        .par_iter()
        .map(|&eps| evaluate(&ctx, eps, kind))
        .collect::<Result<_>>()?;
    let (rows, wall_times) = results.into_iter().unzip();
    let mut report = SweepReport {
        kind,
        spec: spec.clone(),
        rows,
        statistics: Vec::new(),
        wall_times,
    };
    report.statistics = statistics(&report);
    Ok(report)
}

/// Pairs `(ε, value)` over converged rows where `pick` is present.
fn column(rows: &[SweepRow], pick: impl Fn(&SweepRow) -> Option<f64>) -> (Vec<f64>, Vec<f64>) {
    rows.iter()
        .filter(|r| r.converged)
        .filter_map(|r| pick(r).map(|v| (r.eps, v)))
        .unzip()
}

fn statistics(report: &SweepReport) -> Vec<Statistic> {
    let rows = &report.rows;
    let ratio = |num: fn(&SweepRow) -> Option<f64>, den: fn(&SweepRow) -> Option<f64>| {
        let (_, v) = column(rows, |r| Some(num(r)? / den(r)?));
        max_min_ratio(&v)
    };
    match report.kind {
        SweepKind::Energy => vec![Statistic::check(
            "energy_ratio_max_min",
            ratio(|r| r.energy_lhs, |r| r.energy_rhs),
            Relation::AtMost,
            4.0,
            "uniformity of energy_lhs / energy_rhs in eps",
        )],
        SweepKind::Comparison => {
            let (eps, lhs) = column(rows, |r| r.comparison_lhs);
            let (veps, v) = column(rows, |r| r.comparison_v);
            vec![
                Statistic::check(
                    "comparison_slope",
                    tail_slope(&eps, &lhs, SLOPE_TAIL),
                    Relation::AtLeast,
                    0.8,
                    "log-log slope of comparison_lhs on the last three eps; the linear rate applies when f is smooth or zero",
                ),
                Statistic::info(
                    "v_term_slope",
                    tail_slope(&veps, &v, SLOPE_TAIL),
                    Relation::AtLeast,
                    0.8,
                    "log-log slope of comparison_v on the last three eps",
                ),
            ]
        }
        SweepKind::Sobolev => {
            let (_, v) = column(rows, |r| r.sobolev);
            vec![
                Statistic::check(
                    "sobolev_max_min",
                    max_min_ratio(&v),
                    Relation::AtMost,
                    10.0,
                    "boundedness of the Sobolev quantity in eps",
                ),
                Statistic::info(
                    "sobolev_ratio_max_min",
                    ratio(|r| r.sobolev, |r| r.sobolev_rhs),
                    Relation::AtMost,
                    10.0,
                    "sobolev / sobolev_rhs",
                ),
            ]
        }
        SweepKind::TimeDerivative => vec![Statistic::check(
            "dt_ratio_max_min",
            ratio(|r| r.dt_lhs, |r| r.dt_rhs),
            Relation::AtMost,
            10.0,
            "uniformity of dt_lhs / dt_rhs in eps; not applicable when both sides vanish",
        )],
        SweepKind::Fractional => {
            let p = report.spec.params.p();
            let (_, theta) = column(rows, |r| r.theta);
            vec![Statistic::check(
                "theta",
                theta.last().copied(),
                Relation::AtLeast,
                2.0 / p - 0.1,
                "Nikolskii exponent of Du at the smallest eps against 2/p - 0.1",
            )]
        }
    }
}

fn require_degenerate_power(spec: &SweepSpec, what: &str) -> Result<()> {
    let (p, lambda) = (spec.params.p(), spec.params.lambda());
    if p > 2.0 && lambda == 0.0 {
        Ok(())
    } else {
        Err(Error::Configuration(format!(
            "{what} needs p > 2 and lambda = 0 (got p = {p}, lambda = {lambda})"
        )))
    }
}

/// Energy bound across ε: `∫_{Q_R}|Du_ε|^p + sup_t ‖u_ε − u‖²` against
/// `‖Du‖^p_{L^p(Q_R)} + λ^p + 1`.
pub fn run_energy_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    run(spec, SweepKind::Energy, &spec.eps_list)
}

/// Distance of `u_ε` to the reference solution across ε, with a slope fit
/// on the ε-dominated tail.
pub fn run_comparison_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    run(spec, SweepKind::Comparison, &spec.eps_list)
}

/// `∫_{Q_{ρ/2}} |D_x V(Du_ε)|²` across ε and its bound shape (Besov datum
/// for `p > 2`, `L²` datum for `p = 2`).
pub fn run_sobolev_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    run(spec, SweepKind::Sobolev, &spec.eps_list)
}

/// `‖∂_t u_ε‖_{L^{p′}(Q_{r/2})}` against its bound shape. Needs `p > 2`, `λ = 0`.
pub fn run_time_derivative_check(spec: &SweepSpec) -> Result<SweepReport> {
    require_degenerate_power(spec, "the time derivative check")?;
    run(spec, SweepKind::TimeDerivative, &spec.eps_list)
}

/// Nikolskii exponent of `Du_ε` at the smallest ε with `q = p` on `Q_ρ`,
/// using shifts of 1, 2, 4 and 8 cells. Needs `p > 2`, `λ = 0`.
pub fn run_fractional_check(spec: &SweepSpec) -> Result<SweepReport> {
    require_degenerate_power(spec, "the fractional check")?;
    let last: Vec<f64> = spec.eps_list.last().copied().into_iter().collect();
    run(spec, SweepKind::Fractional, &last)
}

/// Dispatches on `kind`.
pub fn run_sweep(spec: &SweepSpec, kind: SweepKind) -> Result<SweepReport> {
    match kind {
        SweepKind::Energy => run_energy_sweep(spec),
        SweepKind::Comparison => run_comparison_sweep(spec),
        SweepKind::Sobolev => run_sobolev_sweep(spec),
        SweepKind::TimeDerivative => run_time_derivative_check(spec),
        SweepKind::Fractional => run_fractional_check(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::DegenParams;

    fn spec(problem: &str, p: f64, lambda: f64, eps: Vec<f64>, n: usize) -> SweepSpec {
        let grid = SweepSpec::default_grid(1.0, n).unwrap();
        let params = DegenParams::with_default_alpha(p, lambda, 0.0).unwrap();
        SweepSpec::new(problem, params, eps, grid)
    }

    #[test]
    fn empty_list_gives_empty_report() {
        let s = spec("mms_smooth", 3.0, 0.0, vec![], 12);
        for kind in SweepKind::ALL {
            let r = run_sweep(&s, kind).unwrap();
            assert!(r.rows.is_empty());
            assert!(r.statistics.iter().all(|st| st.passed.is_none()));
            assert!(r.passed());
        }
    }

    #[test]
    fn linear_drift_stays_on_the_reference() {
        let s = spec("linear_drift", 3.0, 1.0, vec![1e-1, 1e-2, 1e-3], 12);
        let r = run_comparison_sweep(&s).unwrap();
        for row in &r.rows {
            assert!(row.converged);
            assert!(row.comparison_lhs.unwrap() <= 1e-10, "{row:?}");
        }
    }

    #[test]
    fn regime_is_checked() {
        let s = spec("mms_smooth", 3.0, 1.0, vec![1e-1], 12);
        assert!(matches!(
            run_time_derivative_check(&s),
            Err(Error::Configuration(_))
        ));
        let s = spec("heat_sine", 2.0, 0.0, vec![1e-1], 12);
        assert!(matches!(
            run_fractional_check(&s),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn nonconvergence_flags_the_row() {
        let mut s = spec("mms_smooth", 3.0, 0.0, vec![1e-1, 1e-2], 12);
        s.newton.max_iters = 0;
        let r = run_energy_sweep(&s).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert!(!row.converged);
            assert!(row.error.as_deref().unwrap().contains("did not converge"));
            assert!(row.energy_lhs.is_none());
        }
        assert!(!r.passed());
    }
}
