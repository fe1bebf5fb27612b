use std::f64::consts::PI;

use degenlab_core::grid::{
    manufactured_problem, ScalarField, SpaceTimeGrid, SpatialGrid, Trajectory,
};
use degenlab_core::seminorms::{
    besov_seminorm, gagliardo_seminorm, grad_l2_of_v, lp_norm_cylinder, nikolskii_fit,
    sup_l2_in_time, Cylinder, LatticeSeries, Region, SmoothnessOrder,
};
use degenlab_core::{DegenParams, GProfile, QuadratureConfig};
use proptest::prelude::*;

fn space() -> SpatialGrid {
    SpatialGrid::new(1.0, 12).unwrap()
}

fn st_grid() -> SpaceTimeGrid {
    SpaceTimeGrid::new(1.0, 12, 0.0, 0.2, 5).unwrap()
}

fn field(vals: &[f64]) -> ScalarField {
    ScalarField::from_values(space(), vals.to_vec()).unwrap()
}

fn traj(vals: &[f64]) -> Trajectory {
    let g = st_grid();
    let n = g.space.num_nodes();
    Trajectory::new(
        g,
        vals.chunks(n)
            .map(|c| ScalarField::from_values(g.space, c.to_vec()).unwrap())
            .collect(),
    )
    .unwrap()
}

fn node_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 13 * 13)
}

fn traj_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 13 * 13 * 6)
}

fn order(q: f64) -> SmoothnessOrder {
    SmoothnessOrder::new(0.4, 2.0, q, 0.25).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norms_are_absolutely_homogeneous(v in node_values(), w in traj_values(), c in -5.0..5.0f64) {
        let f = field(&v);
        let fc = f.scaled(c);
        let cyl = Cylinder::centered(&st_grid(), 0.4).unwrap();
        for q in [1.0, 2.0, f64::INFINITY] {
            let a = besov_seminorm(&f, &order(q)).unwrap();
            let b = besov_seminorm(&fc, &order(q)).unwrap();
            prop_assert!((b - c.abs() * a).abs() <= 1e-10 * (1.0 + b));
        }
        let a = gagliardo_seminorm(&f, &Region::Square, &order(2.0)).unwrap();
        let b = gagliardo_seminorm(&fc, &Region::Square, &order(2.0)).unwrap();
        prop_assert!((b - c.abs() * a).abs() <= 1e-10 * (1.0 + b));
        let t = traj(&w);
        for p in [1.0, 2.0, 3.5] {
            let a = lp_norm_cylinder(&t, &cyl, p).unwrap();
            let b = lp_norm_cylinder(&t.scaled(c), &cyl, p).unwrap();
            prop_assert!((b - c.abs() * a).abs() <= 1e-10 * (1.0 + b));
        }
    }

    #[test]
    fn enlarging_the_cylinder_never_decreases_lp(w in traj_values(), r in 0.05..0.3f64, dr in 0.0..0.15f64) {
        let t = traj(&w);
        let small = Cylinder::new([0.5, 0.5], 0.2, r).unwrap();
        let big = Cylinder::new([0.5, 0.5], 0.2, (r + dr).min(0.44)).unwrap();
        for p in [1.0, 2.0] {
            let a = lp_norm_cylinder(&t, &small, p).unwrap();
            let b = lp_norm_cylinder(&t, &big, p).unwrap();
            prop_assert!(b >= a - 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn triangle_inequality(v1 in node_values(), v2 in node_values(), w1 in traj_values(), w2 in traj_values()) {
        let (f, g) = (field(&v1), field(&v2));
        let sum = field(&v1.iter().zip(&v2).map(|(a, b)| a + b).collect::<Vec<_>>());
        for q in [1.0, 2.0, f64::INFINITY] {
            let o = order(q);
            let lhs = besov_seminorm(&sum, &o).unwrap();
            let rhs = besov_seminorm(&f, &o).unwrap() + besov_seminorm(&g, &o).unwrap();
            prop_assert!(lhs <= rhs + 1e-10, "{lhs} {rhs}");
        }
        let cyl = Cylinder::centered(&st_grid(), 0.4).unwrap();
        let (a, b) = (traj(&w1), traj(&w2));
        let ab = traj(&w1.iter().zip(&w2).map(|(x, y)| x + y).collect::<Vec<_>>());
        for p in [1.0, 2.0, 3.0] {
            let lhs = lp_norm_cylinder(&ab, &cyl, p).unwrap();
            let rhs = lp_norm_cylinder(&a, &cyl, p).unwrap() + lp_norm_cylinder(&b, &cyl, p).unwrap();
            prop_assert!(lhs <= rhs + 1e-10, "{lhs} {rhs}");
        }
    }
}

#[test]
fn sup_in_time_of_heat_solution_sits_at_the_initial_slice() {
    let grid = SpaceTimeGrid::new(1.0, 16, 0.0, 0.1, 10).unwrap();
    let params = DegenParams::with_default_alpha(2.0, 0.0, 1e-8).unwrap();
    let spec = manufactured_problem("heat_sine", grid, params).unwrap();
    let u = spec.exact_trajectory().unwrap();
    let ball = degenlab_core::seminorms::Ball::new([0.5, 0.5], 0.4).unwrap();
    let sup = sup_l2_in_time(&u, &ball, (0.0, 0.1)).unwrap();
    let first = sup_l2_in_time(&u, &ball, (0.0, 0.0)).unwrap();
    assert_eq!(sup, first);
}

/// `Σ |τ_h sign|²` counted directly: pairs straddling `x = 1/2` inside the ball.
fn sign_field_sums(n: usize, cyl: &Cylinder, steps: &[usize]) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let ball = cyl.ball();
    steps
        .iter()
        .map(|&k| {
            let mut pairs = 0usize;
            for j in 0..=n {
                for i in 0..=n {
                    let x = [i as f64 * h, j as f64 * h];
                    if ball.contains(x) && i + k <= n && x[0] < 0.5 && (i + k) as f64 * h > 0.5 {
                        pairs += 1;
                    }
                }
            }
            4.0 * pairs as f64 * h * h * cyl.radius * cyl.radius
        })
        .collect()
}

#[test]
fn sign_field_calibration() {
    let n = 63;
    let grid = SpaceTimeGrid::new(1.0, n, 0.0, 0.09, 9).unwrap();
    let cyl = Cylinder::centered(&grid, 0.3).unwrap();
    let u = Trajectory::from_fn(grid, |x, _, _| (x - 0.5).signum());
    let steps = [1usize, 2, 4, 8];
    let h = grid.space.h();
    let shifts: Vec<f64> = steps.iter().map(|&k| k as f64 * h).collect();
    let fit = nikolskii_fit(&LatticeSeries::nodal(&u), &cyl, 2.0, &shifts).unwrap();
    let exact = sign_field_sums(n, &cyl, &steps);
    for (a, b) in fit.integrals.iter().zip(&exact) {
        assert!((a - b).abs() <= 1e-12 * b, "{a} {b}");
    }
    assert!((fit.theta - 0.5).abs() <= 0.05, "{fit:?}");
}

#[test]
fn v_energy_of_smooth_solution_converges_under_refinement() {
    let params = DegenParams::with_default_alpha(3.0, 0.0, 0.0).unwrap();
    let profile = GProfile::tabulated(&params, &QuadratureConfig::default()).unwrap();
    let at = |n: usize| {
        let grid = SpaceTimeGrid::new(1.0, n, 0.0, 0.16, 4).unwrap();
        let u = Trajectory::from_fn(grid, |x, y, t| (1.0 + t) * (PI * x).sin() * (PI * y).sin());
        let cyl = Cylinder::centered(&grid, 0.3).unwrap();
        grad_l2_of_v(&u, &profile, &cyl).unwrap()
    };
    let oracle = at(256);
    for n in [32, 64] {
        let v = at(n);
        assert!((v - oracle).abs() <= 0.1 * oracle, "n={n}: {v} vs {oracle}");
    }
}
