//! Optimal transmission time and power for a fixed selection.
//!
//! With the selection fixed, minimizing airtime energy decouples per
//! view: each transmitted view must deliver the frame's source bits to
//! its worst-channel utilizer, and the only coupling is the shared frame
//! duration. The per-view optimum is a water-filling expression in the
//! Lambert W function of the time-budget multiplier; the multiplier
//! itself is pinned down by bisection on the total-time residual.

use crate::error::{Error, Result};
use crate::model::{Allocation, Scenario, Selection};
use crate::numerics::{bisect, lambert_w0, BisectionSpec};
use std::f64::consts::{E, LN_2};

/// Dual information attached to an optimal allocation.
#[derive(Debug, Clone)]
pub struct DualState {
    /// Multiplier of the total-time constraint; zero iff nothing is
    /// transmitted.
    pub lambda: f64,
    /// Worst channel among utilizing users, per view; absent where no
    /// user utilizes the view.
    pub h_min: Vec<Option<f64>>,
}

/// Worst channel power among the users utilizing `view_index`, absent if
/// nobody does. The multicast rate of the view is set by this user.
pub fn min_utilized_channel(
    scenario: &Scenario,
    selection: &Selection,
    view_index: usize,
) -> Option<f64> {
    (0..scenario.user_count())
        .filter(|&k| selection.utilizes(k, view_index))
        .map(|k| scenario.channels[k])
        .fold(None, |acc, h| Some(acc.map_or(h, |m: f64| m.min(h))))
}

/// Transmitted views paired with their worst utilizing channel. A
/// transmitted view without any utilizer has no defined rate requirement
/// and is rejected.
pub fn transmitted_profile(
    scenario: &Scenario,
    selection: &Selection,
) -> Result<Vec<(usize, f64)>> {
    let mut profile = Vec::new();
    for v in 0..scenario.grid.len() {
        if !selection.transmit[v] {
            continue;
        }
        match min_utilized_channel(scenario, selection, v) {
            Some(h) => profile.push((v, h)),
            None => {
                return Err(Error::UnusedTransmittedView {
                    view_value: scenario.grid.value_of(scenario.grid.view_at(v)),
                })
            }
        }
    }
    Ok(profile)
}

/// Time the water-filling expression assigns to one view at multiplier
/// `lambda`: `R T ln2 / (B (W(lambda h / (n0 e) - 1/e) + 1))`.
fn view_time(scenario: &Scenario, h_min: f64, lambda: f64) -> f64 {
    let c = scenario.rate_bps * scenario.frame_s * LN_2 / scenario.bandwidth_hz;
    let arg = lambda * h_min / (scenario.noise_w * E) - 1.0 / E;
    // arg >= -1/e for any lambda > 0, so the principal branch applies.
    let w = lambert_w0(arg).expect("argument stays right of the branch point");
    let denom = w + 1.0;
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        c / denom
    }
}

/// Total frame time consumed at multiplier `lambda` by the transmitted
/// views in `profile`; strictly decreasing in `lambda`.
pub fn total_time(scenario: &Scenario, profile: &[(usize, f64)], lambda: f64) -> f64 {
    profile
        .iter()
        .map(|&(_, h)| view_time(scenario, h, lambda))
        .sum()
}

/// Closed-form optimal time/power split for a feasible selection.
///
/// Returns the allocation, its airtime energy, and the dual state. The
/// whole frame is always used (the energy of a view strictly decreases
/// with its time), the rate constraint is tight for each view's worst
/// utilizer, and the returned times sum to the frame exactly.
pub fn optimal_allocation(
    scenario: &Scenario,
    selection: &Selection,
) -> Result<(Allocation, f64, DualState)> {
    let n = scenario.grid.len();
    let profile = transmitted_profile(scenario, selection)?;

    let mut h_min = vec![None; n];
    for &(v, h) in &profile {
        h_min[v] = Some(h);
    }

    let mut alloc = Allocation::zeros(n);
    if profile.is_empty() {
        return Ok((alloc, 0.0, DualState { lambda: 0.0, h_min }));
    }

    let frame = scenario.frame_s;
    let lambda = if profile.len() == 1 {
        // Single view: the frame is its own optimum; report the
        // multiplier that makes the stationarity condition balance.
        alloc.time_s[profile[0].0] = frame;
        -energy_slope(scenario, profile[0].1, frame)
    } else {
        let lambda = solve_multiplier(scenario, &profile)?;
        for &(v, h) in &profile {
            alloc.time_s[v] = view_time(scenario, h, lambda);
        }
        // Bisection leaves a sub-tolerance residual; rescale so the
        // frame is filled exactly.
        let total: f64 = profile.iter().map(|&(v, _)| alloc.time_s[v]).sum();
        for &(v, _) in &profile {
            alloc.time_s[v] *= frame / total;
        }
        lambda
    };

    let bits_exponent = scenario.rate_bps * scenario.frame_s / scenario.bandwidth_hz;
    let mut transmit_energy = 0.0;
    for &(v, h) in &profile {
        let t = alloc.time_s[v];
        alloc.power_w[v] = scenario.noise_w / h * ((bits_exponent / t).exp2() - 1.0);
        transmit_energy += t * alloc.power_w[v];
    }

    Ok((alloc, transmit_energy, DualState { lambda, h_min }))
}

/// d/dt of one view's airtime energy `t * (n0/h) (2^(RT/(B t)) - 1)`;
/// negative everywhere, and equal to `-lambda` at the optimum.
fn energy_slope(scenario: &Scenario, h_min: f64, t: f64) -> f64 {
    let u = scenario.rate_bps * scenario.frame_s / (scenario.bandwidth_hz * t);
    scenario.noise_w / h_min * (u.exp2() * (1.0 - u * LN_2) - 1.0)
}

fn solve_multiplier(scenario: &Scenario, profile: &[(usize, f64)]) -> Result<f64> {
    let frame = scenario.frame_s;
    // At the multiplier where the weakest view alone would fill the
    // frame, the total necessarily overshoots: a guaranteed lower end.
    let h_weak = profile.iter().map(|&(_, h)| h).fold(f64::INFINITY, f64::min);
    let w_frame = scenario.rate_bps * LN_2 / scenario.bandwidth_hz - 1.0;
    let base = (w_frame * w_frame.exp() + 1.0 / E).max(0.0);
    let mut lo = (base * scenario.noise_w * E / h_weak).max(f64::MIN_POSITIVE);
    // Guard against round-off pushing the residual negative at `lo`.
    let mut guard = 0;
    while total_time(scenario, profile, lo) < frame {
        lo *= 0.5;
        guard += 1;
        if guard > 200 {
            return Err(Error::Convergence {
                context: "time multiplier bracket",
                detail: format!("no overshoot above lambda = {lo:e}"),
            });
        }
    }
    let mut hi = lo * 2.0;
    guard = 0;
    while total_time(scenario, profile, hi) >= frame {
        hi *= 2.0;
        guard += 1;
        if guard > 400 {
            return Err(Error::Convergence {
                context: "time multiplier bracket",
                detail: format!("no undershoot below lambda = {hi:e}"),
            });
        }
    }
    let spec = BisectionSpec::new(lo, hi, 1e-12 * frame);
    bisect(|lambda| total_time(scenario, profile, lambda) - frame, &spec)
}
