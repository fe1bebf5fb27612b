use degenlab_core::experiments::{
    run_comparison_sweep, run_energy_sweep, run_sweep, SweepKind, SweepSpec,
};
use degenlab_core::grid::{
    discrete_energy, manufactured_problem, solve_cauchy_dirichlet, solve_timestep, NewtonConfig,
    ScalarField, SpaceTimeGrid,
};
use degenlab_core::DegenParams;

fn params(p: f64, lambda: f64, eps: f64) -> DegenParams {
    DegenParams::with_default_alpha(p, lambda, eps).unwrap()
}

/// Marches `steps` implicit steps from `u0`, keeping its boundary values.
fn march(u0: &ScalarField, params: &DegenParams, tau: f64, steps: usize) -> Vec<ScalarField> {
    let f = ScalarField::zeros(*u0.grid());
    let mut out = vec![u0.clone()];
    for _ in 0..steps {
        let curr = out.last().unwrap();
        let next = solve_timestep(curr, curr, &f, params, tau, &NewtonConfig::default()).unwrap();
        out.push(next.u);
    }
    out
}

fn bumped_cone(grid: &SpaceTimeGrid, amplitude: f64) -> ScalarField {
    let c = 0.5 + 0.5 * grid.space.h();
    ScalarField::from_fn(grid.space, |x, y| {
        let bump = (x * (1.0 - x) * y * (1.0 - y)).powi(2) * 16.0;
        (x - c).hypot(y - c) + amplitude * bump
    })
}

#[test]
fn energy_is_dissipated_without_source() {
    let grid = SpaceTimeGrid::new(1.0, 20, 0.0, 0.05, 10).unwrap();
    for (p, lambda) in [(2.0, 0.0), (3.0, 1.0), (4.0, 0.5)] {
        let prm = params(p, lambda, 1e-3);
        let levels = march(&bumped_cone(&grid, 3.0), &prm, grid.tau(), grid.steps());
        let energies: Vec<f64> = levels.iter().map(|u| discrete_energy(u, &prm)).collect();
        for w in energies.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "p={p}: {energies:?}");
        }
    }
}

#[test]
fn ordered_initial_data_stay_ordered() {
    let grid = SpaceTimeGrid::new(1.0, 20, 0.0, 0.05, 10).unwrap();
    for (p, lambda) in [(2.0, 0.0), (3.0, 1.0)] {
        let prm = params(p, lambda, 1e-3);
        let low = march(&bumped_cone(&grid, 0.5), &prm, grid.tau(), grid.steps());
        let high = march(&bumped_cone(&grid, 2.0), &prm, grid.tau(), grid.steps());
        for (a, b) in low.iter().zip(&high) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(x <= &(y + 1e-10), "p={p}: {x} > {y}");
            }
        }
    }
}

#[test]
fn newton_tail_is_superlinear() {
    let grid = SpaceTimeGrid::new(1.0, 24, 0.0, 0.1, 5).unwrap();
    let spec = manufactured_problem("mms_smooth", grid, params(3.0, 0.0, 1e-2)).unwrap();
    let (_, report) = solve_cauchy_dirichlet(&spec, &NewtonConfig::default()).unwrap();
    let mut checked = 0;
    for step in &report.steps {
        let h = &step.residual_history;
        let n = h.len();
        if n >= 3 && h[n - 2] < 1e-3 {
            assert!(h[n - 1] <= 10.0 * h[n - 2].powf(1.5), "{h:?}");
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn lateral_boundary_is_imposed_exactly() {
    let grid = SpaceTimeGrid::new(1.0, 16, 0.0, 0.2, 8).unwrap();
    let spec = manufactured_problem("mms_smooth", grid, params(3.0, 0.0, 1e-2)).unwrap();
    let (u, _) = solve_cauchy_dirichlet(&spec, &NewtonConfig::default()).unwrap();
    let exact = spec.exact_trajectory().unwrap();
    let s = grid.space;
    for k in 0..grid.levels() {
        for j in 0..s.side() {
            for i in 0..s.side() {
                if s.is_boundary(i, j) {
                    assert_eq!(u.level(k).at(i, j), exact.level(k).at(i, j));
                }
            }
        }
    }
}

#[test]
fn linear_drift_is_stationary() {
    let grid = SpaceTimeGrid::new(1.0, 16, 0.0, 0.5, 20).unwrap();
    let spec = manufactured_problem("linear_drift", grid, params(3.0, 1.0, 1e-8)).unwrap();
    let (u, _) = solve_cauchy_dirichlet(&spec, &NewtonConfig::default()).unwrap();
    assert!(u.max_abs_diff(&spec.exact_trajectory().unwrap()) <= 1e-6);
}

fn mms_sweep(eps: Vec<f64>) -> SweepSpec {
    SweepSpec::new(
        "mms_smooth",
        params(3.0, 0.0, 0.0),
        eps,
        SweepSpec::default_grid(1.0, 16).unwrap(),
    )
}

#[test]
fn mollification_error_is_monotone() {
    let report = run_energy_sweep(&mms_sweep(vec![0.5, 0.2, 0.1, 0.05, 0.02, 1e-3])).unwrap();
    let errs: Vec<f64> = report
        .rows
        .iter()
        .map(|r| r.mollification_error.unwrap())
        .collect();
    assert!(errs[0] > 0.0);
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] + 1e-10, "{errs:?}");
    }
}

#[test]
fn rows_are_reproducible_and_nonnegative() {
    let spec = mms_sweep(vec![1e-1, 1e-2, 1e-3]);
    for kind in [
        SweepKind::Energy,
        SweepKind::Comparison,
        SweepKind::Sobolev,
        SweepKind::TimeDerivative,
    ] {
        let full = run_sweep(&spec, kind).unwrap();
        let single = run_sweep(&mms_sweep(vec![1e-2]), kind).unwrap();
        assert_eq!(full.rows[1], single.rows[0]);
        for row in &full.rows {
            let lhs = [row.energy_lhs, row.comparison_lhs, row.sobolev, row.dt_lhs];
            assert!(
                lhs.iter().flatten().all(|v| *v >= 0.0 && v.is_finite()),
                "{row:?}"
            );
        }
    }
}

#[test]
fn csv_output_is_deterministic() {
    let spec = mms_sweep(vec![1e-1, 1e-2]);
    let csv = || {
        let mut out = Vec::new();
        run_comparison_sweep(&spec)
            .unwrap()
            .write_csv(&mut out)
            .unwrap();
        out
    };
    assert_eq!(csv(), csv());
}
