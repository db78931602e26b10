//! Primal log-barrier interior-point solver for the view program.
//!
//! The barrier Hessian is block-diagonal over the per-view variable
//! groups plus a rank-one term from the frame budget, so each Newton
//! system factors as small per-view Cholesky solves, a Sherman-Morrison
//! correction, and a dense Schur complement over the 2-per-user coverage
//! equalities. Iterates start equality-feasible and stay strictly inside
//! every inequality; the step is damped by a backtracking line search on
//! the barrier value.

use super::program::{ConvexViewProgram, YRef};
use crate::error::{Error, Result};
use std::f64::consts::LN_2;

/// Residuals reported with a solve.
#[derive(Debug, Clone, Copy)]
pub struct KktResiduals {
    /// Newton decrement at the final central point: the gradient norm in
    /// the metric of the barrier Hessian (affine invariant).
    pub stationarity: f64,
    /// Largest coverage-equality violation at the returned point.
    pub primal: f64,
    /// Duality-gap estimate `m * mu` in joules.
    pub complementarity_j: f64,
}

/// Fractional solution of the view program.
#[derive(Debug, Clone)]
pub struct ConvexSolution {
    /// Seconds per view (zero off the active set).
    pub time_s: Vec<f64>,
    /// Dense K x n fractional utilization, row-major.
    pub utilization: Vec<f64>,
    /// Objective at the returned point, in joules, including any linear
    /// term and constant.
    pub objective_j: f64,
    /// Per-view airtime energy at the returned point (the epigraph
    /// variables after tightening onto the perspective maxima).
    pub epigraph_j: Vec<f64>,
    /// Per-view peak utilization `max_k y_{k,v}`.
    pub utilization_peak: Vec<f64>,
    pub residuals: KktResiduals,
    pub newton_iterations: u32,
}

const NEWTON_TOL: f64 = 5e-14; // on decrement^2 / 2
const STAGE_CAP: u32 = 80;
const TOTAL_CAP: u32 = 500;
const MU_SHRINK: f64 = 0.1;
const COLLAPSE_EPS: f64 = 1e-10;

/// Solve the program until the duality-gap estimate `m * mu` falls below
/// `1e-9 * (1 + |objective|)` in scaled units (comfortably inside the
/// `1e-8` contract regardless of the energy scale).
pub fn solve_program(program: &ConvexViewProgram) -> Result<ConvexSolution> {
    let mut state = BarrierState::new(program);
    let mut mu = 1.0;
    let mut total = 0u32;
    loop {
        let used = state.center(mu, STAGE_CAP.min(TOTAL_CAP - total))?;
        total += used;
        let objective = program.objective_scaled(&state.theta);
        let gap = program.m_ineq as f64 * mu;
        if gap <= 1e-9 * (1.0 + objective.abs()) || mu <= 1e-14 {
            break;
        }
        if total >= TOTAL_CAP {
            return Err(Error::Convergence {
                context: "interior point",
                detail: format!(
                    "iteration cap {TOTAL_CAP} at mu = {mu:e}, decrement^2 = {:e}, scaled gap = {gap:e}",
                    state.last_decrement_sq
                ),
            });
        }
        mu *= MU_SHRINK;
    }
    Ok(state.finish(total, mu))
}

struct BarrierState<'a> {
    p: &'a ConvexViewProgram,
    theta: Vec<f64>,
    last_decrement_sq: f64,
}

/// Perspective term and derivatives in scaled units:
/// `phi = a t (2^(g y / t) - 1)`.
struct Phi {
    value: f64,
    dt: f64,
    dy: f64,
    dtt: f64,
    dty: f64,
    dyy: f64,
}

fn phi_full(a: f64, gamma: f64, t: f64, y: f64) -> Phi {
    let u = gamma * y / t;
    let e2u = u.exp2();
    let k = LN_2 * LN_2 * e2u / t;
    Phi {
        value: a * t * (e2u - 1.0),
        dt: a * (e2u - 1.0 - u * LN_2 * e2u),
        dy: a * gamma * LN_2 * e2u,
        dtt: a * k * u * u,
        dty: -a * k * gamma * u,
        dyy: a * k * gamma * gamma,
    }
}

fn phi_value(a: f64, gamma: f64, t: f64, y: f64) -> f64 {
    a * t * ((gamma * y / t).exp2() - 1.0)
}

impl<'a> BarrierState<'a> {
    fn new(p: &'a ConvexViewProgram) -> Self {
        let mut theta = vec![0.0; p.n_vars];
        let m = p.views.len().max(1);
        for view in &p.views {
            theta[view.t_col] = 0.9 / m as f64;
        }
        for row_pair in p.equalities.chunks(2) {
            // Rows come in (right, left) pairs sharing the request column.
            for row in row_pair {
                let own = row.cols[0];
                theta[own] = 0.5;
                let window = &row.cols[1..];
                for &c in window {
                    theta[c] = 0.5 / window.len() as f64;
                }
            }
        }
        for view in &p.views {
            let t = theta[view.t_col];
            let mut peak_phi = 0.0f64;
            let mut peak_y = 0.0f64;
            for pair in &view.pairs {
                let y = match pair.y {
                    YRef::Var(c) => theta[c],
                    YRef::One => 1.0,
                };
                peak_phi = peak_phi.max(phi_value(pair.a, p.gamma, t, y));
                peak_y = peak_y.max(y);
            }
            theta[view.e_col] = peak_phi + 0.5 * (1.0 + peak_phi.abs());
            if let Some(z) = view.z_col {
                theta[z] = peak_y + 0.25;
            }
        }
        Self { p, theta, last_decrement_sq: f64::INFINITY }
    }

    /// Barrier value at an arbitrary point; `None` outside the interior.
    fn barrier_value(&self, theta: &[f64], mu: f64) -> Option<f64> {
        let p = self.p;
        let mut logs = 0.0;
        let mut t_total = 0.0;
        for view in &p.views {
            let t = theta[view.t_col];
            let s4 = t - p.t_floor;
            if s4 <= 0.0 {
                return None;
            }
            logs += s4.ln();
            t_total += t;
            let e = theta[view.e_col];
            for pair in &view.pairs {
                let y = match pair.y {
                    YRef::Var(c) => {
                        let y = theta[c];
                        if y <= 0.0 || y >= 1.0 {
                            return None;
                        }
                        y
                    }
                    YRef::One => 1.0,
                };
                let s1 = e - phi_value(pair.a, p.gamma, t, y);
                if !(s1 > 0.0) {
                    return None;
                }
                logs += s1.ln();
                if let Some(z) = view.z_col {
                    let s2 = theta[z] - y;
                    if s2 <= 0.0 {
                        return None;
                    }
                    logs += s2.ln();
                }
            }
        }
        let s3 = 1.0 - t_total;
        if s3 <= 0.0 {
            return None;
        }
        logs += s3.ln();
        for y in &p.y_vars {
            let v = theta[y.col];
            logs += v.ln() + (1.0 - v).ln();
        }
        Some(p.objective_scaled(theta) - mu * logs)
    }

    /// Gradient of the barrier and the block-diagonal part of its
    /// Hessian; the rank-one frame-budget term is returned as `sigma`.
    fn assemble(&self, mu: f64, grad: &mut [f64], blocks: &mut [Vec<f64>]) -> f64 {
        let p = self.p;
        let theta = &self.theta;
        grad.fill(0.0);
        for y in &p.y_vars {
            grad[y.col] = y.obj;
        }

        let mut t_total = 0.0;
        for (view, block) in p.views.iter().zip(blocks.iter_mut()) {
            let nn = view.block_size;
            block[..nn * nn].fill(0.0);
            let base = view.t_col;
            let t = theta[view.t_col];
            let e = theta[view.e_col];
            t_total += t;

            grad[view.e_col] += 1.0;
            if let Some(z) = view.z_col {
                grad[z] += p.server_synth;
            }

            // Frame floor.
            let s4 = t - p.t_floor;
            grad[view.t_col] -= mu / s4;
            block[0] += mu / (s4 * s4);

            let le = view.e_col - base;
            for pair in &view.pairs {
                let (y, y_local) = match pair.y {
                    YRef::Var(c) => (theta[c], Some(c - base)),
                    YRef::One => (1.0, None),
                };
                let phi = phi_full(pair.a, p.gamma, t, y);
                let s1 = e - phi.value;
                let inv = mu / s1;
                let inv2 = inv / s1;

                grad[view.t_col] += inv * phi.dt;
                grad[view.e_col] -= inv;
                block[0] += inv2 * phi.dt * phi.dt + inv * phi.dtt;
                block[le] += -inv2 * phi.dt; // (t, e)
                block[le * nn + le] += inv2;
                if let Some(ly) = y_local {
                    let c = base + ly;
                    grad[c] += inv * phi.dy;
                    block[ly] += inv2 * phi.dt * phi.dy + inv * phi.dty; // (t, y)
                    block[le * nn + ly] += -inv2 * phi.dy; // (e, y)
                    block[ly * nn + ly] += inv2 * phi.dy * phi.dy + inv * phi.dyy;
                }

                if let Some(z) = view.z_col {
                    let lz = z - base;
                    let s2 = theta[z] - y;
                    let q = mu / s2;
                    let q2 = q / s2;
                    grad[z] -= q;
                    block[lz * nn + lz] += q2;
                    if let Some(ly) = y_local {
                        grad[base + ly] += q;
                        block[ly * nn + ly] += q2;
                        block[lz.max(ly) * nn + lz.min(ly)] += -q2;
                    }
                }
            }

            // Box terms on the utilization variables of this block.
            for local in 0..nn {
                let col = base + local;
                let is_y = col != view.t_col
                    && col != view.e_col
                    && Some(col) != view.z_col;
                if is_y {
                    let y = theta[col];
                    grad[col] += -mu / y + mu / (1.0 - y);
                    block[local * nn + local] +=
                        mu / (y * y) + mu / ((1.0 - y) * (1.0 - y));
                }
            }

            // Mirror to the upper triangle.
            for r in 0..nn {
                for c in (r + 1)..nn {
                    block[r * nn + c] = block[c * nn + r];
                }
            }
        }

        let s3 = 1.0 - t_total;
        for view in &p.views {
            grad[view.t_col] += mu / s3;
        }
        mu / (s3 * s3)
    }

    fn center(&mut self, mu: f64, budget: u32) -> Result<u32> {
        let p = self.p;
        let n = p.n_vars;
        let m_eq = p.equalities.len();
        let mut grad = vec![0.0; n];
        let mut blocks: Vec<Vec<f64>> = p
            .views
            .iter()
            .map(|v| vec![0.0; v.block_size * v.block_size])
            .collect();

        let mut iters = 0u32;
        while iters < budget {
            let sigma = self.assemble(mu, &mut grad, &mut blocks);
            let factors: Vec<Vec<f64>> = p
                .views
                .iter()
                .zip(&blocks)
                .map(|(v, b)| factor_block(b, v.block_size))
                .collect::<Result<_>>()?;

            // Sherman-Morrison data for the rank-one frame term.
            let mut q = vec![0.0; n];
            for view in &p.views {
                q[view.t_col] = 1.0;
            }
            solve_blocks(p, &factors, &mut q);
            let q_dot: f64 = p.views.iter().map(|v| q[v.t_col]).sum();
            let sm_denom = 1.0 + sigma * q_dot;

            let h_solve = |x: &mut Vec<f64>| {
                solve_blocks(p, &factors, x);
                let dot: f64 = p.views.iter().map(|v| x[v.t_col]).sum();
                let coef = sigma * dot / sm_denom;
                for (xi, qi) in x.iter_mut().zip(&q) {
                    *xi -= coef * qi;
                }
            };

            let mut r_d: Vec<f64> = grad.iter().map(|g| -g).collect();
            if m_eq > 0 {
                let mut hr = r_d.clone();
                h_solve(&mut hr);
                let mut columns: Vec<Vec<f64>> = Vec::with_capacity(m_eq);
                for row in &p.equalities {
                    let mut a = vec![0.0; n];
                    for &c in &row.cols {
                        a[c] = 1.0;
                    }
                    h_solve(&mut a);
                    columns.push(a);
                }
                let mut schur = vec![0.0; m_eq * m_eq];
                let mut nu = vec![0.0; m_eq];
                for (i, row) in p.equalities.iter().enumerate() {
                    for j in 0..m_eq {
                        schur[i * m_eq + j] = row.cols.iter().map(|&c| columns[j][c]).sum();
                    }
                    let r_p: f64 = 1.0 - row.cols.iter().map(|&c| self.theta[c]).sum::<f64>();
                    nu[i] = row.cols.iter().map(|&c| hr[c]).sum::<f64>() - r_p;
                }
                if !cholesky_in_place(&mut schur, m_eq) {
                    return Err(Error::Convergence {
                        context: "interior point",
                        detail: "equality Schur complement lost positive definiteness".into(),
                    });
                }
                solve_cholesky(&schur, m_eq, &mut nu);
                for (j, row) in p.equalities.iter().enumerate() {
                    for &c in &row.cols {
                        r_d[c] -= nu[j];
                    }
                }
            }

            let w = r_d;
            let mut delta = w.clone();
            h_solve(&mut delta);
            let decrement_sq: f64 = delta.iter().zip(&w).map(|(d, wi)| d * wi).sum();
            self.last_decrement_sq = decrement_sq;
            if decrement_sq <= 2.0 * NEWTON_TOL && decrement_sq.is_finite() {
                return Ok(iters);
            }
            if !decrement_sq.is_finite() {
                return Err(Error::Convergence {
                    context: "interior point",
                    detail: "non-finite Newton decrement".into(),
                });
            }

            let b0 = self
                .barrier_value(&self.theta, mu)
                .expect("iterate stays interior");
            let slope: f64 = grad.iter().zip(&delta).map(|(g, d)| g * d).sum();
            let mut alpha = 1.0;
            let mut accepted = false;
            let mut trial = vec![0.0; n];
            while alpha >= 1e-14 {
                for ((t, cur), d) in trial.iter_mut().zip(&self.theta).zip(&delta) {
                    *t = cur + alpha * d;
                }
                if let Some(b) = self.barrier_value(&trial, mu) {
                    if b <= b0 + 0.01 * alpha * slope {
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                // Step length underflow: the point is as central as the
                // arithmetic allows at this mu.
                return Ok(iters);
            }
            self.theta.copy_from_slice(&trial);
            iters += 1;
        }
        Ok(iters)
    }

    fn finish(mut self, iterations: u32, mu: f64) -> ConvexSolution {
        let p = self.p;
        let n = p.n_views;

        // Views whose free utilizations all vanished are cleared outright
        // so the returned point stays meaningful under the continuous
        // extension of the perspective terms.
        for view in &p.views {
            let all_var = view.pairs.iter().all(|pr| matches!(pr.y, YRef::Var(_)));
            if !all_var {
                continue;
            }
            let peak = view
                .pairs
                .iter()
                .map(|pr| match pr.y {
                    YRef::Var(c) => self.theta[c],
                    YRef::One => 1.0,
                })
                .fold(0.0f64, f64::max);
            if peak < COLLAPSE_EPS {
                self.theta[view.t_col] = 0.0;
                for pr in &view.pairs {
                    if let YRef::Var(c) = pr.y {
                        self.theta[c] = 0.0;
                    }
                }
            }
        }

        let mut time_s = vec![0.0; n];
        let mut epigraph_j = vec![0.0; n];
        let mut peaks = vec![0.0; n];
        let mut objective = p.constant;
        for view in &p.views {
            let t = self.theta[view.t_col];
            time_s[view.view_index] = t * p.frame_s;
            let mut peak_phi = 0.0f64;
            let mut peak_y = 0.0f64;
            for pair in &view.pairs {
                let y = match pair.y {
                    YRef::Var(c) => self.theta[c],
                    YRef::One => 1.0,
                };
                if t > 0.0 {
                    peak_phi = peak_phi.max(phi_value(pair.a, p.gamma, t, y));
                }
                peak_y = peak_y.max(y);
            }
            epigraph_j[view.view_index] = peak_phi * p.energy_scale_j;
            peaks[view.view_index] = peak_y;
            objective += peak_phi;
            if view.z_col.is_some() {
                objective += p.server_synth * peak_y;
            }
        }

        let mut utilization = vec![0.0; p.users * n];
        for y in &p.y_vars {
            utilization[y.user * n + y.view_index] = self.theta[y.col];
            objective += y.obj * self.theta[y.col];
        }
        for &(k, v) in &p.fixed_direct {
            utilization[k * n + v] = 1.0;
        }

        let mut primal = 0.0f64;
        for row in &p.equalities {
            let sum: f64 = row.cols.iter().map(|&c| self.theta[c]).sum();
            primal = primal.max((sum - 1.0).abs());
        }

        ConvexSolution {
            time_s,
            utilization,
            objective_j: objective * p.energy_scale_j,
            epigraph_j,
            utilization_peak: peaks,
            residuals: KktResiduals {
                stationarity: self.last_decrement_sq.max(0.0).sqrt(),
                primal,
                complementarity_j: p.m_ineq as f64 * mu * p.energy_scale_j,
            },
            newton_iterations: iterations,
        }
    }
}

/// Cholesky factor of a small dense symmetric block; retries with a
/// diagonal jitter if round-off makes it indefinite.
fn factor_block(block: &[f64], nn: usize) -> Result<Vec<f64>> {
    let mut jitter = 0.0;
    let max_diag = (0..nn).fold(0.0f64, |m, i| m.max(block[i * nn + i].abs()));
    for _ in 0..4 {
        let mut a = block[..nn * nn].to_vec();
        if jitter > 0.0 {
            for i in 0..nn {
                a[i * nn + i] += jitter;
            }
        }
        if cholesky_in_place(&mut a, nn) {
            return Ok(a);
        }
        jitter = if jitter == 0.0 { 1e-14 * max_diag.max(1e-300) } else { jitter * 1e3 };
    }
    Err(Error::Convergence {
        context: "interior point",
        detail: "barrier Hessian block lost positive definiteness".into(),
    })
}

/// In-place lower Cholesky; returns false on a non-positive pivot.
fn cholesky_in_place(a: &mut [f64], nn: usize) -> bool {
    for i in 0..nn {
        for j in 0..=i {
            let mut sum = a[i * nn + j];
            for k in 0..j {
                sum -= a[i * nn + k] * a[j * nn + k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return false;
                }
                a[i * nn + i] = sum.sqrt();
            } else {
                a[i * nn + j] = sum / a[j * nn + j];
            }
        }
    }
    true
}

fn solve_cholesky(l: &[f64], nn: usize, x: &mut [f64]) {
    for i in 0..nn {
        let mut sum = x[i];
        for k in 0..i {
            sum -= l[i * nn + k] * x[k];
        }
        x[i] = sum / l[i * nn + i];
    }
    for i in (0..nn).rev() {
        let mut sum = x[i];
        for k in (i + 1)..nn {
            sum -= l[k * nn + i] * x[k];
        }
        x[i] = sum / l[i * nn + i];
    }
}

fn solve_blocks(p: &ConvexViewProgram, factors: &[Vec<f64>], x: &mut [f64]) {
    for (view, l) in p.views.iter().zip(factors) {
        let nn = view.block_size;
        let s = view.t_col;
        solve_cholesky(l, nn, &mut x[s..s + nn]);
    }
}

fn solve_dense(l: &[f64], nn: usize, x: &mut [f64]) {
    solve_cholesky(l, nn, x);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::optimal_allocation;
    use crate::convex::program::{build_program, perspective_objective, LinearYTerm};
    use crate::model::test_support::scenario;
    use crate::model::Selection;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn barrier_gradient_matches_finite_differences() {
        let mut s = scenario(3, 2, 1.0, &[1.5, 2.0], 1e-3);
        s.channels = vec![8e-4, 2.5e-3];
        let p = build_program(&s, None).unwrap();
        let state = BarrierState::new(&p);
        let mu = 0.37;

        let mut grad = vec![0.0; p.n_vars];
        let mut blocks: Vec<Vec<f64>> = p
            .views
            .iter()
            .map(|v| vec![0.0; v.block_size * v.block_size])
            .collect();
        state.assemble(mu, &mut grad, &mut blocks);

        let mut theta = state.theta.clone();
        for i in 0..p.n_vars {
            let h = 1e-7 * theta[i].abs().max(1e-4);
            let saved = theta[i];
            theta[i] = saved + h;
            let fp = state.barrier_value(&theta, mu).unwrap();
            theta[i] = saved - h;
            let fm = state.barrier_value(&theta, mu).unwrap();
            theta[i] = saved;
            let fd = (fp - fm) / (2.0 * h);
            let scale = grad[i].abs().max(1.0);
            assert!(
                (fd - grad[i]).abs() <= 1e-5 * scale,
                "column {i}: analytic {} vs fd {}",
                grad[i],
                fd
            );
        }
    }

    #[test]
    fn pinned_boundary_user_recovers_single_view_airtime() {
        let s = scenario(2, 2, 1.0, &[1.0], 1e-3);
        let p = build_program(&s, None).unwrap();
        let sol = solve_program(&p).unwrap();
        let i1 = s.grid.index_of(s.grid.view_from_value(1.0).unwrap());
        assert!((sol.time_s[i1] - s.frame_s).abs() <= 1e-6 * s.frame_s);

        let (_, airtime, _) = optimal_allocation(&s, &Selection::all_direct(&s)).unwrap();
        assert!(
            (sol.objective_j - airtime).abs() <= 1e-6 * airtime,
            "objective {} vs closed form {}",
            sol.objective_j,
            airtime
        );
        assert!(sol.residuals.primal <= 1e-8);
        assert!(sol.residuals.stationarity <= 1e-6);
    }

    #[test]
    fn output_matches_direct_objective_evaluation() {
        let mut s = scenario(3, 2, 1.0, &[1.5, 2.5], 1e-3);
        s.channels = vec![5e-4, 2e-3];
        let p = build_program(&s, None).unwrap();
        let sol = solve_program(&p).unwrap();

        let direct = perspective_objective(&sol.time_s, &sol.utilization, &s);
        assert!(
            (sol.objective_j - direct).abs() <= 1e-9 * direct.abs().max(1e-30),
            "epigraph objective {} vs direct {}",
            sol.objective_j,
            direct
        );
        let n = s.grid.len();
        for v in 0..n {
            let peak = (0..2).fold(0.0f64, |m, k| m.max(sol.utilization[k * n + v]));
            assert!((sol.utilization_peak[v] - peak).abs() <= 1e-8);
        }
    }

    #[test]
    fn relaxation_lower_bounds_the_binary_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..8 {
            let k = rng.gen_range(1..=3);
            let requests: Vec<f64> =
                (0..k).map(|_| 1.0 + 0.5 * rng.gen_range(0..=4) as f64).collect();
            let mut s = scenario(3, 2, 1.0, &requests, 1e-3);
            s.channels = (0..k).map(|_| rng.gen_range(2e-4..3e-3)).collect();
            let p = build_program(&s, None).unwrap();
            let relaxed = solve_program(&p).unwrap();
            let exact = crate::exact::solve_exact(&s).unwrap();
            assert!(
                relaxed.objective_j <= exact.energy.total_j * (1.0 + 1e-7) + 1e-12,
                "relaxation {} above optimum {}",
                relaxed.objective_j,
                exact.energy.total_j
            );
        }
    }

    #[test]
    fn zero_synthesis_costs_leave_pure_airtime() {
        let mut s = scenario(3, 2, 1.0, &[1.5, 2.5], 1e-3);
        s.server_synth_j = 0.0;
        s.user_synth_j = vec![0.0, 0.0];
        let p = build_program(&s, None).unwrap();
        assert_eq!(p.peak_variable_count(), 0);
        let sol = solve_program(&p).unwrap();
        let direct = perspective_objective(&sol.time_s, &sol.utilization, &s);
        assert!((sol.objective_j - direct).abs() <= 1e-9 * direct);
        // No synthesis terms: the whole objective is airtime.
        let airtime: f64 = sol.epigraph_j.iter().sum();
        assert!((sol.objective_j - airtime).abs() <= 1e-9 * airtime);
    }

    #[test]
    fn perspective_objective_is_jointly_convex_on_samples() {
        let mut s = scenario(3, 2, 1.0, &[1.5, 2.0], 1e-3);
        s.channels = vec![6e-4, 1.5e-3];
        let n = s.grid.len();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut random_point = |rng: &mut ChaCha8Rng| {
            let mut t = vec![0.0; n];
            let mut y = vec![0.0; 2 * n];
            for v in 0..n {
                t[v] = rng.gen_range(0.001..0.02);
            }
            for k in 0..2 {
                let r = s.requests[k];
                let ri = s.grid.index_of(r);
                let own: f64 = rng.gen_range(0.05..0.95);
                y[k * n + ri] = own;
                let left: Vec<usize> = s.grid.left_window(r).collect();
                let right: Vec<usize> = s.grid.right_window(r).collect();
                for (w, side) in [(&left, 0), (&right, 1)] {
                    let _ = side;
                    for &v in w.iter() {
                        y[k * n + v] = (1.0 - own) / w.len() as f64;
                    }
                }
            }
            (t, y)
        };
        for _ in 0..40 {
            let (t1, y1) = random_point(&mut rng);
            let (t2, y2) = random_point(&mut rng);
            let f1 = perspective_objective(&t1, &y1, &s);
            let f2 = perspective_objective(&t2, &y2, &s);
            let theta: f64 = rng.gen_range(0.05..0.95);
            let tm: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
            let ym: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
            let fm = perspective_objective(&tm, &ym, &s);
            assert!(
                fm <= theta * f1 + (1.0 - theta) * f2 + 1e-9,
                "midpoint {} above chord {}",
                fm,
                theta * f1 + (1.0 - theta) * f2
            );
        }
    }

    #[test]
    fn linear_term_shifts_the_objective() {
        let s = scenario(3, 2, 1.0, &[1.5], 1e-3);
        let n = s.grid.len();
        let term = LinearYTerm { coeffs: vec![0.0; n], constant: 2.5e-7 };
        let plain = solve_program(&build_program(&s, None).unwrap()).unwrap();
        let shifted = solve_program(&build_program(&s, Some(&term)).unwrap()).unwrap();
        assert!(
            ((shifted.objective_j - plain.objective_j) - 2.5e-7).abs() <= 1e-9 * 2.5e-7 + 1e-12
        );
    }
}
