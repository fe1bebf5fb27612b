use serde::{Deserialize, Serialize};

use super::region::{overlap_weights, Cylinder};
use crate::error::{Error, Result};
use crate::grid::{discrete_gradient, Trajectory};

/// Time levels of a (possibly vector valued) field sampled on a square lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSeries {
    origin: [f64; 2],
    spacing: f64,
    side: usize,
    components: usize,
    times: Vec<f64>,
    /// Per level, component-major blocks of `side²` values, row-major with `y` outer.
    data: Vec<Vec<f64>>,
}

impl LatticeSeries {
    pub fn new(
        origin: [f64; 2],
        spacing: f64,
        side: usize,
        components: usize,
        times: Vec<f64>,
        data: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if !(spacing > 0.0) || side < 2 || components == 0 {
            return Err(Error::InvalidInput(
                "lattice needs positive spacing and side >= 2".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("level times must increase".into()));
        }
        if times.len() != data.len() || data.iter().any(|d| d.len() != components * side * side) {
            return Err(Error::InvalidInput(
                "lattice data does not match its shape".into(),
            ));
        }
        Ok(Self {
            origin,
            spacing,
            side,
            components,
            times,
            data,
        })
    }

    /// Node values of a trajectory.
    pub fn nodal(traj: &Trajectory) -> Self {
        let g = traj.grid();
        Self {
            origin: [0.0, 0.0],
            spacing: g.space.h(),
            side: g.space.side(),
            components: 1,
            times: (0..g.levels()).map(|k| g.time(k)).collect(),
            data: traj.levels().iter().map(|l| l.values().to_vec()).collect(),
        }
    }

    /// Cell averages of the triangle gradients, located at cell centres.
    pub fn cell_gradients(traj: &Trajectory) -> Self {
        let g = traj.grid();
        let n = g.space.cells();
        let h = g.space.h();
        let data = traj
            .levels()
            .iter()
            .map(|l| {
                let grad = discrete_gradient(l);
                let mut out = vec![0.0; 2 * n * n];
                for j in 0..n {
                    for i in 0..n {
                        let a = grad.cell_average(i, j);
                        out[j * n + i] = a[0];
                        out[n * n + j * n + i] = a[1];
                    }
                }
                out
            })
            .collect();
        Self {
            origin: [0.5 * h, 0.5 * h],
            spacing: h,
            side: n,
            components: 2,
            times: (0..g.levels()).map(|k| g.time(k)).collect(),
            data,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `Σ_k w_k Σ_{e ∈ {e₁, e₂}} Σ_x |F(x + h e) − F(x)|^q a²` over lattice
    /// points `x` in the cylinder whose shifted partner is on the lattice, with
    /// `a` the spacing. Also returns the number of contributing pairs.
    fn increment_integral(&self, cyl: &Cylinder, steps: usize, q: f64) -> (f64, usize) {
        let ball = cyl.ball();
        let (s, a) = (self.side, self.spacing);
        let block = s * s;
        let mut total = 0.0;
        let mut pairs = 0;
        for (k, wk) in overlap_weights(&self.times, cyl.t_start(), cyl.vertex_time) {
            let level = &self.data[k];
            let mut sum = 0.0;
            for j in 0..s {
                for i in 0..s {
                    let x = [self.origin[0] + i as f64 * a, self.origin[1] + j as f64 * a];
                    if !ball.contains(x) {
                        continue;
                    }
                    for (di, dj) in [(steps, 0), (0, steps)] {
                        let (ii, jj) = (i + di, j + dj);
                        if ii >= s || jj >= s {
                            continue;
                        }
                        let mut sq = 0.0;
                        for c in 0..self.components {
                            let d = level[c * block + jj * s + ii] - level[c * block + j * s + i];
                            sq += d * d;
                        }
                        sum += sq.powf(0.5 * q);
                        pairs += 1;
                    }
                }
            }
            total += sum * a * a * wk;
        }
        (total, pairs)
    }
}

/// Outcome of a Nikolskii exponent fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NikolskiiFit {
    /// Fitted exponent clipped to `[0, 1]`.
    pub theta: f64,
    pub raw_slope: f64,
    /// Set when every increment vanishes; `theta` is then 1.
    pub degenerate: bool,
    pub shifts: Vec<f64>,
    pub integrals: Vec<f64>,
}

/// Least-squares slope of `log ∫_Q Σ_j |τ_{j,h} F|^q dz` against `q log |h|`.
///
/// Shifts are positive multiples of the lattice spacing spanning at least
/// three dyadic levels.
pub fn nikolskii_fit(
    field: &LatticeSeries,
    cyl: &Cylinder,
    q: f64,
    shifts: &[f64],
) -> Result<NikolskiiFit> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "q must lie in [1, inf) (got {q})"
        )));
    }
    let mut steps = Vec::with_capacity(shifts.len());
    for &h in shifts {
        let k = h / field.spacing;
        if !(h > 0.0) || (k - k.round()).abs() > 1e-9 * k.max(1.0) {
            return Err(Error::InvalidShift(format!(
                "shift {h} is not a positive multiple of the spacing {}",
                field.spacing
            )));
        }
        steps.push(k.round() as usize);
    }
    let mut levels: Vec<u32> = steps.iter().map(|k| k.ilog2()).collect();
    levels.sort_unstable();
    levels.dedup();
    if levels.len() < 3 {
        return Err(Error::InvalidShift(format!(
            "shifts must span at least three dyadic levels (got {} distinct)",
            levels.len()
        )));
    }
    let measured: Vec<(f64, f64, usize)> = steps
        .iter()
        .map(|&k| {
            let (s, n) = field.increment_integral(cyl, k, q);
            (k as f64 * field.spacing, s, n)
        })
        .collect();
    let usable: Vec<&(f64, f64, usize)> = measured.iter().filter(|m| m.2 > 0).collect();
    if usable.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} of {} shifts have increments inside the cylinder",
            usable.len(),
            shifts.len()
        )));
    }
    let shifts_out = measured.iter().map(|m| m.0).collect();
    let integrals = measured.iter().map(|m| m.1).collect();
    if usable.iter().all(|m| m.1 == 0.0) {
        return Ok(NikolskiiFit {
            theta: 1.0,
            raw_slope: f64::NAN,
            degenerate: true,
            shifts: shifts_out,
            integrals,
        });
    }
    let pts: Vec<(f64, f64)> = usable
        .iter()
        .filter(|m| m.1 > 0.0)
        .map(|m| (q * m.0.ln(), m.1.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData(
            "fewer than two nonzero increment integrals".into(),
        ));
    }
    let slope = least_squares_slope(&pts);
    Ok(NikolskiiFit {
        theta: slope.clamp(0.0, 1.0),
        raw_slope: slope,
        degenerate: false,
        shifts: shifts_out,
        integrals,
    })
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpaceTimeGrid;

    fn setup(n: usize, f: impl Fn(f64, f64, f64) -> f64) -> (LatticeSeries, Cylinder, f64) {
        let grid = SpaceTimeGrid::new(1.0, n, 0.0, 0.16, 4).unwrap();
        let cyl = Cylinder::centered(&grid, 0.3).unwrap();
        (
            LatticeSeries::nodal(&Trajectory::from_fn(grid, f)),
            cyl,
            grid.space.h(),
        )
    }

    #[test]
    fn affine_field_fits_one() {
        let (s, cyl, h) = setup(40, |x, y, t| 2.0 * x - y + t);
        let fit = nikolskii_fit(&s, &cyl, 2.0, &[h, 2.0 * h, 4.0 * h, 8.0 * h]).unwrap();
        assert!((fit.theta - 1.0).abs() < 1e-12, "{fit:?}");
    }

    #[test]
    fn constant_field_is_flagged() {
        let (s, cyl, h) = setup(16, |_, _, _| 3.0);
        let fit = nikolskii_fit(&s, &cyl, 2.0, &[h, 2.0 * h, 4.0 * h]).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.theta, 1.0);
    }

    #[test]
    fn shift_validation() {
        let (s, cyl, h) = setup(16, |x, _, _| x);
        assert!(matches!(
            nikolskii_fit(&s, &cyl, 2.0, &[h, 2.0 * h]),
            Err(Error::InvalidShift(_))
        ));
        assert!(matches!(
            nikolskii_fit(&s, &cyl, 2.0, &[0.5 * h, h, 4.0 * h]),
            Err(Error::InvalidShift(_))
        ));
        // all but one shift leave the lattice
        assert!(matches!(
            nikolskii_fit(&s, &cyl, 2.0, &[h, 32.0 * h, 64.0 * h]),
            Err(Error::InsufficientData(_))
        ));
    }
}
