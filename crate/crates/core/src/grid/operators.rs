//! Gradient on triangles and its negative adjoint, the divergence on nodes.
//!
//! With node weights `h²` and triangle weights `h²/2` the pair satisfies
//! `Σ_n h² (div F)_n v_n = −Σ_T (h²/2) F_T · (grad v)_T` for every `v` that
//! vanishes on the boundary. For the identity flux the composition is the
//! five-point Laplacian.

use super::mesh::{ScalarField, SpatialGrid, VectorField};

/// Gradients of the piecewise linear interpolant on every triangle.
pub(crate) fn gradient_into(grid: &SpatialGrid, u: &[f64], out: &mut [[f64; 2]]) {
    let n = grid.cells();
    let s = grid.side();
    let inv_h = 1.0 / grid.h();
    for j in 0..n {
        for i in 0..n {
            let base = j * s + i;
            let u00 = u[base];
            let u10 = u[base + 1];
            let u01 = u[base + s];
            let u11 = u[base + s + 1];
            let c = 2 * (j * n + i);
            out[c] = [(u10 - u00) * inv_h, (u01 - u00) * inv_h];
            out[c + 1] = [(u11 - u01) * inv_h, (u11 - u10) * inv_h];
        }
    }
}

/// `(div F)_n = −(1/(2h)) Σ_{T ∋ n} F_T · e_{T,n}` at every node.
pub(crate) fn divergence_into(grid: &SpatialGrid, f: &[[f64; 2]], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let n = grid.cells();
    let s = grid.side();
    let coef = -0.5 / grid.h();
    for j in 0..n {
        for i in 0..n {
            let base = j * s + i;
            let c = 2 * (j * n + i);
            let [a0, a1] = f[c];
            let [b0, b1] = f[c + 1];
            out[base] += coef * (-a0 - a1);
            out[base + 1] += coef * (a0 - b1);
            out[base + s] += coef * (a1 - b0);
            out[base + s + 1] += coef * (b0 + b1);
        }
    }
}

/// Gradient of `u` on each triangle: forward differences on the lower
/// triangle, backward differences on the upper one.
pub fn discrete_gradient(u: &ScalarField) -> VectorField {
    let grid = *u.grid();
    let mut out = vec![[0.0; 2]; 2 * grid.num_cells()];
    gradient_into(&grid, u.values(), &mut out);
    VectorField::from_values(grid, out).expect("sized by the grid")
}

/// Divergence of a triangle field at the nodes, the negative adjoint of
/// [`discrete_gradient`]. Values at boundary nodes are the one-sided adjoint
/// and carry no meaning for Dirichlet problems.
pub fn discrete_divergence(f: &VectorField) -> ScalarField {
    let grid = *f.grid();
    let mut out = vec![0.0; grid.num_nodes()];
    divergence_into(&grid, f.values(), &mut out);
    ScalarField::from_values(grid, out).expect("sized by the grid")
}
