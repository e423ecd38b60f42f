//! Finite-difference reference solver for 1-D reaction-diffusion dynamics,
//! used as the ground truth for the Allen-Cahn benchmark.
//!
//! Space: second-order central differences. Time: implicit-explicit stepping
//! with Crank-Nicolson diffusion and second-order Adams-Bashforth reaction, so
//! each step solves one tridiagonal system.

use crate::error::{Error, Result};

/// Space-time solution table, `u[ti][xi]` on uniform grids.
#[derive(Debug, Clone)]
pub struct Grid1d {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub u: Vec<Vec<f64>>,
}

impl Grid1d {
    /// Bilinear interpolation; `x` and `t` must lie inside the stored ranges.
    pub fn sample(&self, x: f64, t: f64) -> f64 {
        let (i, wx) = locate(&self.xs, x);
        let (j, wt) = locate(&self.ts, t);
        let row0 = &self.u[j];
        let row1 = &self.u[(j + 1).min(self.ts.len() - 1)];
        let a = row0[i] * (1.0 - wx) + row0[(i + 1).min(self.xs.len() - 1)] * wx;
        let b = row1[i] * (1.0 - wx) + row1[(i + 1).min(self.xs.len() - 1)] * wx;
        a * (1.0 - wt) + b * wt
    }
}

fn locate(grid: &[f64], v: f64) -> (usize, f64) {
    let n = grid.len();
    if v <= grid[0] {
        return (0, 0.0);
    }
    if v >= grid[n - 1] {
        return (n - 2, 1.0);
    }
    let h = grid[1] - grid[0];
    let i = (((v - grid[0]) / h) as usize).min(n - 2);
    ((i), ((v - grid[i]) / h).clamp(0.0, 1.0))
}

/// IMEX solve of `u_t = D u_xx - reaction(u) + source(x, t)` on `[-m, m] x [0, t_final]`
/// with Dirichlet boundary values `boundary(t)` and initial state `init(x)`.
#[allow(clippy::too_many_arguments)]
pub fn solve_imex(
    m: f64,
    diffusion: f64,
    t_final: f64,
    n_cells: usize,
    dt: f64,
    store_times: usize,
    init: impl Fn(f64) -> f64,
    boundary: impl Fn(f64) -> f64,
    reaction: impl Fn(f64) -> f64,
    source: impl Fn(f64, f64) -> f64,
) -> Grid1d {
    let nx = n_cells + 1;
    let dx = 2.0 * m / n_cells as f64;
    let xs: Vec<f64> = (0..nx).map(|i| -m + i as f64 * dx).collect();
    let n_steps = (t_final / dt).round() as usize;
    let stride = (n_steps / store_times.max(1)).max(1);

    let mut u: Vec<f64> = xs.iter().map(|&x| init(x)).collect();
    let mut ts = vec![0.0];
    let mut rows = vec![u.clone()];

    let r = diffusion * dt / (dx * dx);
    // Interior tridiagonal system (I - r/2 L): constant coefficients.
    let diag = 1.0 + r;
    let off = -0.5 * r;
    let mut rhs = vec![0.0; nx];
    let mut cp = vec![0.0; nx]; // Thomas scratch
    let mut dp = vec![0.0; nx];

    // AB2 needs the previous reaction values; the first step falls back to
    // forward Euler.
    let mut react_prev: Vec<f64> = u.iter().map(|&v| reaction(v)).collect();
    for step in 1..=n_steps {
        let t_new = step as f64 * dt;
        let t_mid = t_new - 0.5 * dt;
        let b_new = boundary(t_new);
        for i in 1..nx - 1 {
            let react_now = reaction(u[i]);
            let react = if step == 1 {
                react_now
            } else {
                1.5 * react_now - 0.5 * react_prev[i]
            };
            react_prev[i] = react_now;
            rhs[i] = u[i] + 0.5 * r * (u[i + 1] - 2.0 * u[i] + u[i - 1]) - dt * react
                + dt * source(xs[i], t_mid);
        }
        rhs[1] -= off * b_new;
        rhs[nx - 2] -= off * b_new;

        // Thomas algorithm over interior nodes 1..nx-1.
        cp[1] = off / diag;
        dp[1] = rhs[1] / diag;
        for i in 2..nx - 1 {
            let denom = diag - off * cp[i - 1];
            cp[i] = off / denom;
            dp[i] = (rhs[i] - off * dp[i - 1]) / denom;
        }
        u[nx - 2] = dp[nx - 2];
        for i in (1..nx - 2).rev() {
            u[i] = dp[i] - cp[i] * u[i + 1];
        }
        u[0] = b_new;
        u[nx - 1] = b_new;

        if step % stride == 0 || step == n_steps {
            ts.push(t_new);
            rows.push(u.clone());
        }
    }

    Grid1d { xs, ts, u: rows }
}

/// Allen-Cahn dynamics `u_t - D u_xx + 5(u^3 - u) = 0` with `u(±m, t) = -1`
/// and `u(x, 0) = (x/m)^2 cos(pi x / m)`.
pub fn solve_allen_cahn(m: f64, diffusion: f64, t_final: f64) -> Grid1d {
    let n_cells = (1024.0 * m).round() as usize;
    solve_imex(
        m,
        diffusion,
        t_final,
        n_cells,
        1e-4,
        100,
        |x| (x / m).powi(2) * (std::f64::consts::PI * x / m).cos(),
        |_t| -1.0,
        |u| 5.0 * (u * u * u - u),
        |_x, _t| 0.0,
    )
}

/// Grid-refinement check: halving both spacings must change the solution by
/// less than `tol` in the max norm on the shared final-time nodes.
pub fn refinement_check(m: f64, diffusion: f64, t_final: f64, tol: f64) -> Result<f64> {
    let coarse = solve_allen_cahn_with(m, diffusion, t_final, (1024.0 * m) as usize, 1e-4);
    let fine = solve_allen_cahn_with(m, diffusion, t_final, 2 * (1024.0 * m) as usize, 5e-5);
    let uc = coarse.u.last().unwrap();
    let uf = fine.u.last().unwrap();
    let mut change: f64 = 0.0;
    for (i, c) in uc.iter().enumerate() {
        change = change.max((c - uf[2 * i]).abs());
    }
    if change < tol {
        Ok(change)
    } else {
        Err(Error::ReferenceNotConverged { change, tol })
    }
}

fn solve_allen_cahn_with(m: f64, diffusion: f64, t_final: f64, n_cells: usize, dt: f64) -> Grid1d {
    solve_imex(
        m,
        diffusion,
        t_final,
        n_cells,
        dt,
        50,
        |x| (x / m).powi(2) * (std::f64::consts::PI * x / m).cos(),
        |_t| -1.0,
        |u| 5.0 * (u * u * u - u),
        |_x, _t| 0.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn initial_row_matches_initial_condition() {
        let g = solve_allen_cahn(2.0, 1e-4, 0.01);
        for (&x, &v) in g.xs.iter().zip(&g.u[0]) {
            let want = (x / 2.0).powi(2) * (PI * x / 2.0).cos();
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn boundary_columns_stay_at_minus_one() {
        let g = solve_allen_cahn(2.0, 1e-4, 0.05);
        for (j, row) in g.u.iter().enumerate() {
            if j == 0 {
                continue;
            }
            assert_eq!(*row.first().unwrap(), -1.0);
            assert_eq!(*row.last().unwrap(), -1.0);
        }
    }

    /// Manufactured smooth solution u = exp(-t) sin(pi x / m): halving dx (and
    /// dt ~ dx^2) should quarter the max error.
    #[test]
    fn spatial_order_is_two() {
        let m = 1.0;
        let d = 0.05;
        let t_final = 0.1;
        let exact = |x: f64, t: f64| (-t).exp() * (PI * x / m).sin();
        // u_t = -u; u_xx = -(pi/m)^2 u; pick reaction 0, so
        // source = u_t - D u_xx = (-1 + D (pi/m)^2) u.
        let coef = -1.0 + d * (PI / m).powi(2);
        let err = |n_cells: usize, dt: f64| -> f64 {
            let g = solve_imex(
                m,
                d,
                t_final,
                n_cells,
                dt,
                4,
                |x| exact(x, 0.0),
                |_t| 0.0,
                |_u| 0.0,
                move |x, t| coef * exact(x, t),
            );
            let last = g.u.last().unwrap();
            g.xs.iter()
                .zip(last)
                .map(|(&x, &u)| (u - exact(x, t_final)).abs())
                .fold(0.0f64, f64::max)
        };
        let e1 = err(32, 4e-4);
        let e2 = err(64, 1e-4);
        let ratio = e1 / e2;
        assert!(
            (ratio - 4.0).abs() < 1.2,
            "refinement ratio {ratio} (errors {e1}, {e2})"
        );
    }

    #[test]
    fn sample_interpolates_grid_nodes_exactly() {
        let g = solve_allen_cahn(2.0, 1e-4, 0.02);
        let (i, j) = (100, 1);
        let v = g.sample(g.xs[i], g.ts[j]);
        assert!((v - g.u[j][i]).abs() < 1e-12);
    }
}
