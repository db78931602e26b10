//! Domain model: the 1/Q view grid, per-user requests and channels, the
//! binary selection variables, time/power allocations, feasibility checks
//! and the weighted energy objective.
//!
//! Views are held as integer grid indices `g = v * Q` so set membership,
//! hashing and window arithmetic stay exact; floating-point view values
//! appear only at the API boundary.

use crate::error::{Error, Result};
use std::ops::Range;

pub const BOLTZMANN_J_PER_K: f64 = 1.38e-23;
pub const REFERENCE_TEMPERATURE_K: f64 = 300.0;

/// A view on the grid, stored as the integer index `g = v * Q`.
///
/// Original (camera-captured) views have `g % Q == 0`; the views in
/// between are synthesized on demand from a left and a right reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct View(pub u32);

/// The set of views: `V` original views subdivided by `Q`, giving
/// `(V-1)*Q + 1` grid points, plus the synthesis reach `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewGrid {
    originals: u32,
    q: u32,
    delta_q: u32,
}

impl ViewGrid {
    /// `delta` must be a multiple of `1/q` and at least 1 so reference
    /// windows are exact grid sets.
    pub fn new(originals: u32, q: u32, delta: f64) -> Result<Self> {
        if originals < 2 {
            return Err(Error::InvalidParameter {
                field: "views",
                message: format!("need at least 2 original views, got {originals}"),
            });
        }
        if q < 2 {
            return Err(Error::InvalidParameter {
                field: "subdivision",
                message: format!("subdivision factor must be >= 2, got {q}"),
            });
        }
        let scaled = delta * q as f64;
        let delta_q = scaled.round();
        if !delta.is_finite() || (scaled - delta_q).abs() > 1e-9 * q as f64 {
            return Err(Error::InvalidParameter {
                field: "delta",
                message: format!("delta = {delta} is not a multiple of 1/{q}"),
            });
        }
        if delta_q < q as f64 {
            return Err(Error::InvalidParameter {
                field: "delta",
                message: format!("delta = {delta} but the synthesis reach must be >= 1"),
            });
        }
        Ok(Self { originals, q, delta_q: delta_q as u32 })
    }

    pub fn original_count(&self) -> u32 {
        self.originals
    }

    pub fn subdivision(&self) -> u32 {
        self.q
    }

    pub fn delta(&self) -> f64 {
        self.delta_q as f64 / self.q as f64
    }

    /// Number of grid views: `(V-1)*Q + 1`.
    pub fn len(&self) -> usize {
        ((self.originals - 1) * self.q + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn view_at(&self, index: usize) -> View {
        debug_assert!(index < self.len());
        View(self.q + index as u32)
    }

    pub fn index_of(&self, view: View) -> usize {
        debug_assert!(self.contains(view));
        (view.0 - self.q) as usize
    }

    pub fn contains(&self, view: View) -> bool {
        view.0 >= self.q && view.0 <= self.originals * self.q
    }

    pub fn value_of(&self, view: View) -> f64 {
        view.0 as f64 / self.q as f64
    }

    pub fn is_original(&self, view: View) -> bool {
        view.0 % self.q == 0
    }

    pub fn views(&self) -> impl Iterator<Item = View> + '_ {
        (0..self.len()).map(|i| self.view_at(i))
    }

    /// Parse a real view value, rejecting anything off the grid.
    pub fn view_from_value(&self, value: f64) -> Result<View> {
        let scaled = value * self.q as f64;
        let rounded = scaled.round();
        if !value.is_finite() || (scaled - rounded).abs() > 1e-6 {
            return Err(Error::InvalidView {
                value,
                q: self.q,
                reason: "not on the view grid",
            });
        }
        let g = rounded as i64;
        if g < self.q as i64 || g > (self.originals * self.q) as i64 {
            return Err(Error::InvalidView {
                value,
                q: self.q,
                reason: "outside [1, V]",
            });
        }
        Ok(View(g as u32))
    }

    /// Index range of the left reference window `{x : v - delta <= x < v}`.
    pub fn left_window(&self, view: View) -> Range<usize> {
        let i = self.index_of(view);
        let lo = i.saturating_sub(self.delta_q as usize);
        lo..i
    }

    /// Index range of the right reference window `{x : v < x <= v + delta}`.
    pub fn right_window(&self, view: View) -> Range<usize> {
        let i = self.index_of(view);
        let hi = (i + self.delta_q as usize).min(self.len() - 1);
        (i + 1)..(hi + 1)
    }
}

/// Left and right reference windows of a view, clipped to the grid. The
/// left window of view 1 and the right window of view V are empty.
pub fn reference_windows(grid: &ViewGrid, view: View) -> Result<(Vec<View>, Vec<View>)> {
    if !grid.contains(view) {
        return Err(Error::InvalidView {
            value: view.0 as f64 / grid.subdivision() as f64,
            q: grid.subdivision(),
            reason: "outside [1, V]",
        });
    }
    let left = grid.left_window(view).map(|i| grid.view_at(i)).collect();
    let right = grid.right_window(view).map(|i| grid.view_at(i)).collect();
    Ok((left, right))
}

/// A complete problem instance.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: ViewGrid,
    /// Requested view per user.
    pub requests: Vec<View>,
    /// Channel power gain per user (dimensionless, > 0).
    pub channels: Vec<f64>,
    /// Source encoding rate R in bits/s (identical for all views).
    pub rate_bps: f64,
    /// TDMA frame duration T in seconds.
    pub frame_s: f64,
    /// Bandwidth B in Hz.
    pub bandwidth_hz: f64,
    /// Receiver noise power n0 in watts.
    pub noise_w: f64,
    /// Server-side synthesis energy per view, in joules.
    pub server_synth_j: f64,
    /// User-side synthesis energy per view, per user, in joules.
    pub user_synth_j: Vec<f64>,
    /// Weight on user-side energy, >= 1.
    pub beta: f64,
}

impl Scenario {
    /// Thermal noise floor `B * k_B * T_0` for the given bandwidth.
    pub fn thermal_noise_w(bandwidth_hz: f64) -> f64 {
        bandwidth_hz * BOLTZMANN_J_PER_K * REFERENCE_TEMPERATURE_K
    }

    pub fn user_count(&self) -> usize {
        self.requests.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.requests.is_empty() {
            return Err(Error::InvalidParameter {
                field: "requests",
                message: "need at least one user".into(),
            });
        }
        if self.channels.len() != self.requests.len() {
            return Err(Error::InvalidParameter {
                field: "channels",
                message: format!(
                    "{} channels for {} users",
                    self.channels.len(),
                    self.requests.len()
                ),
            });
        }
        if self.user_synth_j.len() != self.requests.len() {
            return Err(Error::InvalidParameter {
                field: "user_synth_j",
                message: format!(
                    "{} entries for {} users",
                    self.user_synth_j.len(),
                    self.requests.len()
                ),
            });
        }
        for (name, value) in [
            ("rate_bps", self.rate_bps),
            ("frame_s", self.frame_s),
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_w", self.noise_w),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    field: match name {
                        "rate_bps" => "rate_bps",
                        "frame_s" => "frame_s",
                        "bandwidth_hz" => "bandwidth_hz",
                        _ => "noise_w",
                    },
                    message: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        for &h in &self.channels {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidParameter {
                    field: "channels",
                    message: format!("channel power must be > 0, got {h}"),
                });
            }
        }
        if self.server_synth_j < 0.0 || !self.server_synth_j.is_finite() {
            return Err(Error::InvalidParameter {
                field: "server_synth_j",
                message: format!("must be >= 0, got {}", self.server_synth_j),
            });
        }
        for &e in &self.user_synth_j {
            if e < 0.0 || !e.is_finite() {
                return Err(Error::InvalidParameter {
                    field: "user_synth_j",
                    message: format!("must be >= 0, got {e}"),
                });
            }
        }
        if !(self.beta >= 1.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter {
                field: "beta",
                message: format!("user-energy weight must be >= 1, got {}", self.beta),
            });
        }
        for &r in &self.requests {
            if !self.grid.contains(r) {
                return Err(Error::InvalidView {
                    value: r.0 as f64 / self.grid.subdivision() as f64,
                    q: self.grid.subdivision(),
                    reason: "request outside [1, V]",
                });
            }
        }
        Ok(())
    }
}

/// Binary view-transmission vector `x` and view-utilization matrix `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    /// `x[v]`: the server transmits view v.
    pub transmit: Vec<bool>,
    /// `y` flattened row-major: `utilize[k * n + v]`.
    utilize: Vec<bool>,
    n_views: usize,
}

impl Selection {
    pub fn empty(users: usize, n_views: usize) -> Self {
        Self {
            transmit: vec![false; n_views],
            utilize: vec![false; users * n_views],
            n_views,
        }
    }

    /// Everyone is served their requested view directly.
    pub fn all_direct(scenario: &Scenario) -> Self {
        let n = scenario.grid.len();
        let mut sel = Self::empty(scenario.user_count(), n);
        for (k, &r) in scenario.requests.iter().enumerate() {
            let i = scenario.grid.index_of(r);
            sel.set_utilize(k, i, true);
            sel.transmit[i] = true;
        }
        sel
    }

    pub fn utilizes(&self, user: usize, view_index: usize) -> bool {
        self.utilize[user * self.n_views + view_index]
    }

    pub fn set_utilize(&mut self, user: usize, view_index: usize, value: bool) {
        self.utilize[user * self.n_views + view_index] = value;
    }

    pub fn utilization_row(&self, user: usize) -> &[bool] {
        &self.utilize[user * self.n_views..(user + 1) * self.n_views]
    }

    /// Flattened `y` for lexicographic comparison and fuzzing.
    pub fn utilization(&self) -> &[bool] {
        &self.utilize
    }

    /// `x_v = max_k y_{k,v}` over the current utilization matrix.
    pub fn derive_transmit_from_utilization(&mut self) {
        for v in 0..self.n_views {
            self.transmit[v] = (0..self.utilize.len() / self.n_views)
                .any(|k| self.utilize[k * self.n_views + v]);
        }
    }

    pub fn transmitted_count(&self) -> usize {
        self.transmit.iter().filter(|&&x| x).count()
    }
}

/// Per-view transmission seconds and watts.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub time_s: Vec<f64>,
    pub power_w: Vec<f64>,
}

impl Allocation {
    pub fn zeros(n_views: usize) -> Self {
        Self { time_s: vec![0.0; n_views], power_w: vec![0.0; n_views] }
    }
}

/// One violated constraint, named by its number in the model.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// (3): the user has neither direct service nor a right reference.
    RightCoverage { user: usize, sum: u32 },
    /// (4): the user has neither direct service nor a left reference.
    LeftCoverage { user: usize, sum: u32 },
    /// (5): utilized but not transmitted.
    TransmitUtilize { user: usize, view_index: usize },
    /// Utilization outside the request-and-windows support.
    StrayUtilization { user: usize, view_index: usize },
    /// (6): negative transmission time.
    NegativeTime { view_index: usize, time_s: f64 },
    /// (7): total time exceeds the frame.
    TimeBudget { total_s: f64, frame_s: f64 },
    /// (8): the multicast rate is short of the source rate for a utilizing user.
    Rate { user: usize, view_index: usize, delivered_bits: f64, required_bits: f64 },
    /// An idle view carries power.
    PowerWithoutTime { view_index: usize, power_w: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::RightCoverage { user, sum } => {
                write!(f, "(3) user {user}: direct + right references sum to {sum}, expected 1")
            }
            Violation::LeftCoverage { user, sum } => {
                write!(f, "(4) user {user}: direct + left references sum to {sum}, expected 1")
            }
            Violation::TransmitUtilize { user, view_index } => {
                write!(f, "(5) user {user} utilizes view index {view_index} which is not transmitted")
            }
            Violation::StrayUtilization { user, view_index } => {
                write!(f, "user {user} utilizes view index {view_index} outside its reference windows")
            }
            Violation::NegativeTime { view_index, time_s } => {
                write!(f, "(6) view index {view_index} has negative time {time_s}")
            }
            Violation::TimeBudget { total_s, frame_s } => {
                write!(f, "(7) total time {total_s} exceeds frame {frame_s}")
            }
            Violation::Rate { user, view_index, delivered_bits, required_bits } => write!(
                f,
                "(8) user {user}, view index {view_index}: {delivered_bits} bits delivered, {required_bits} required"
            ),
            Violation::PowerWithoutTime { view_index, power_w } => {
                write!(f, "view index {view_index} has zero time but power {power_w}")
            }
        }
    }
}

/// Outcome of a feasibility check.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the selection constraints (1)-(5). Binary-ness of (1)/(2) is
/// structural; stray utilizations outside a user's windows are reported
/// as well since the rest of the pipeline assumes they never occur.
pub fn check_selection(scenario: &Scenario, selection: &Selection) -> FeasibilityReport {
    let grid = &scenario.grid;
    let n = grid.len();
    let mut report = FeasibilityReport::default();

    for (k, &r) in scenario.requests.iter().enumerate() {
        let ri = grid.index_of(r);
        let right = grid.right_window(r);
        let left = grid.left_window(r);

        let right_sum = selection.utilizes(k, ri) as u32
            + right.clone().filter(|&i| selection.utilizes(k, i)).count() as u32;
        if right_sum != 1 {
            report.violations.push(Violation::RightCoverage { user: k, sum: right_sum });
        }
        let left_sum = selection.utilizes(k, ri) as u32
            + left.clone().filter(|&i| selection.utilizes(k, i)).count() as u32;
        if left_sum != 1 {
            report.violations.push(Violation::LeftCoverage { user: k, sum: left_sum });
        }

        for v in 0..n {
            if selection.utilizes(k, v)
                && v != ri
                && !left.contains(&v)
                && !right.contains(&v)
            {
                report.violations.push(Violation::StrayUtilization { user: k, view_index: v });
            }
        }
    }

    for k in 0..scenario.user_count() {
        for v in 0..n {
            if selection.utilizes(k, v) && !selection.transmit[v] {
                report.violations.push(Violation::TransmitUtilize { user: k, view_index: v });
            }
        }
    }

    report
}

/// Tolerance for the successful-transmission constraint (8), relative to
/// the required bits; absorbs floating point in the allocator's output.
pub const RATE_RELATIVE_TOL: f64 = 1e-9;

/// Check the allocation constraints (6)-(8) against a selection.
pub fn check_allocation(
    scenario: &Scenario,
    selection: &Selection,
    allocation: &Allocation,
) -> FeasibilityReport {
    let n = scenario.grid.len();
    let mut report = FeasibilityReport::default();

    let mut total = 0.0;
    for v in 0..n {
        let t = allocation.time_s[v];
        if t < 0.0 {
            report.violations.push(Violation::NegativeTime { view_index: v, time_s: t });
        }
        total += t;
        if t == 0.0 && allocation.power_w[v] != 0.0 {
            report
                .violations
                .push(Violation::PowerWithoutTime { view_index: v, power_w: allocation.power_w[v] });
        }
    }
    if total > scenario.frame_s * (1.0 + RATE_RELATIVE_TOL) {
        report.violations.push(Violation::TimeBudget { total_s: total, frame_s: scenario.frame_s });
    }

    let required = scenario.rate_bps * scenario.frame_s;
    for k in 0..scenario.user_count() {
        for v in 0..n {
            if !selection.utilizes(k, v) {
                continue;
            }
            let t = allocation.time_s[v];
            let p = allocation.power_w[v];
            let delivered = t
                * scenario.bandwidth_hz
                * (1.0 + p * scenario.channels[k] / scenario.noise_w).log2();
            if delivered < required * (1.0 - RATE_RELATIVE_TOL) {
                report.violations.push(Violation::Rate {
                    user: k,
                    view_index: v,
                    delivered_bits: delivered,
                    required_bits: required,
                });
            }
        }
    }

    report
}

/// Energy components of a solution, in joules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// Transmission energy at the server: sum of `t_v * p_v`.
    pub transmit_j: f64,
    /// Server-side synthesis: one unit per transmitted non-original view.
    pub server_synth_j: f64,
    /// User-side synthesis, unweighted.
    pub user_synth_j: f64,
    /// `transmit + server + beta * users`.
    pub total_j: f64,
}

/// Weighted sum energy of a feasible (selection, allocation) pair.
pub fn energy(scenario: &Scenario, selection: &Selection, allocation: &Allocation) -> EnergyBreakdown {
    let grid = &scenario.grid;
    let transmit_j: f64 = allocation
        .time_s
        .iter()
        .zip(&allocation.power_w)
        .map(|(t, p)| t * p)
        .sum();

    let server_synth_j = scenario.server_synth_j
        * (0..grid.len())
            .filter(|&v| selection.transmit[v] && !grid.is_original(grid.view_at(v)))
            .count() as f64;

    let user_synth_j: f64 = scenario
        .requests
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            if selection.utilizes(k, grid.index_of(r)) {
                0.0
            } else {
                scenario.user_synth_j[k]
            }
        })
        .sum();

    EnergyBreakdown {
        transmit_j,
        server_synth_j,
        user_synth_j,
        total_j: transmit_j + server_synth_j + scenario.beta * user_synth_j,
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Small scenario builder for tests: equal channels and synthesis
    /// energies unless overridden afterwards.
    pub fn scenario(
        v: u32,
        q: u32,
        delta: f64,
        requests: &[f64],
        channel: f64,
    ) -> Scenario {
        let grid = ViewGrid::new(v, q, delta).unwrap();
        let requests: Vec<View> = requests
            .iter()
            .map(|&r| grid.view_from_value(r).unwrap())
            .collect();
        let k = requests.len();
        let s = Scenario {
            grid,
            requests,
            channels: vec![channel; k],
            rate_bps: 1e7,
            frame_s: 0.1,
            bandwidth_hz: 1e7,
            noise_w: Scenario::thermal_noise_w(1e7),
            server_synth_j: 5e-7,
            user_synth_j: vec![5e-7; k],
            beta: 3.0,
        };
        s.validate().unwrap();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::scenario;
    use super::*;

    fn views(grid: &ViewGrid, values: &[f64]) -> Vec<View> {
        values.iter().map(|&v| grid.view_from_value(v).unwrap()).collect()
    }

    #[test]
    fn grid_has_expected_size_and_round_trips() {
        let grid = ViewGrid::new(5, 10, 1.0).unwrap();
        assert_eq!(grid.len(), 41);
        for i in 0..grid.len() {
            let view = grid.view_at(i);
            assert_eq!(grid.index_of(view), i);
            let back = grid.view_from_value(grid.value_of(view)).unwrap();
            assert_eq!(back, view);
        }
        assert!(grid.is_original(grid.view_from_value(3.0).unwrap()));
        assert!(!grid.is_original(grid.view_from_value(3.1).unwrap()));
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(ViewGrid::new(1, 2, 1.0).is_err());
        assert!(ViewGrid::new(4, 1, 1.0).is_err());
        // Reach below one view.
        assert!(ViewGrid::new(4, 2, 0.5).is_err());
        // Not a multiple of 1/Q.
        assert!(ViewGrid::new(4, 2, 1.25).is_err());
        assert!(ViewGrid::new(4, 2, 1.5).is_ok());
    }

    #[test]
    fn windows_at_boundary_view() {
        let grid = ViewGrid::new(4, 2, 1.0).unwrap();
        let (left, right) = reference_windows(&grid, grid.view_from_value(1.0).unwrap()).unwrap();
        assert!(left.is_empty());
        assert_eq!(right, views(&grid, &[1.5, 2.0]));

        let (left, right) = reference_windows(&grid, grid.view_from_value(4.0).unwrap()).unwrap();
        assert_eq!(left, views(&grid, &[3.0, 3.5]));
        assert!(right.is_empty());
    }

    #[test]
    fn windows_interior_have_delta_q_members() {
        let grid = ViewGrid::new(5, 10, 1.0).unwrap();
        let (left, right) = reference_windows(&grid, grid.view_from_value(3.0).unwrap()).unwrap();
        assert_eq!(left.len(), 10);
        assert_eq!(right.len(), 10);
        assert_eq!(left[0], grid.view_from_value(2.0).unwrap());
        assert_eq!(*left.last().unwrap(), grid.view_from_value(2.9).unwrap());
        assert_eq!(right[0], grid.view_from_value(3.1).unwrap());
        assert_eq!(*right.last().unwrap(), grid.view_from_value(4.0).unwrap());
    }

    #[test]
    fn windows_clip_at_grid_end() {
        let grid = ViewGrid::new(4, 2, 1.0).unwrap();
        let (left, right) = reference_windows(&grid, grid.view_from_value(3.5).unwrap()).unwrap();
        assert_eq!(left, views(&grid, &[2.5, 3.0]));
        assert_eq!(right, views(&grid, &[4.0]));
    }

    #[test]
    fn windows_reject_off_grid_view() {
        let grid = ViewGrid::new(4, 2, 1.0).unwrap();
        assert!(grid.view_from_value(2.25).is_err());
        assert!(grid.view_from_value(4.5).is_err());
        assert!(reference_windows(&grid, View(99)).is_err());
    }

    /// The worked multicast instance: four users, three transmitted views.
    fn fig_selection(s: &Scenario) -> Selection {
        let g = &s.grid;
        let mut sel = Selection::empty(4, g.len());
        let idx = |v: f64| g.index_of(g.view_from_value(v).unwrap());
        for v in [1.0, 2.5, 4.0] {
            sel.transmit[idx(v)] = true;
        }
        sel.set_utilize(0, idx(1.0), true);
        sel.set_utilize(1, idx(1.0), true);
        sel.set_utilize(1, idx(2.5), true);
        sel.set_utilize(2, idx(2.5), true);
        sel.set_utilize(2, idx(4.0), true);
        sel.set_utilize(3, idx(4.0), true);
        sel
    }

    #[test]
    fn selection_check_accepts_worked_instance() {
        let s = scenario(4, 2, 1.0, &[1.0, 2.0, 3.0, 4.0], 1e-3);
        let sel = fig_selection(&s);
        let report = check_selection(&s, &sel);
        assert!(report.is_ok(), "{:?}", report.violations);
    }

    #[test]
    fn selection_check_flags_missing_right_reference() {
        let s = scenario(4, 2, 1.0, &[1.0, 2.0, 3.0, 4.0], 1e-3);
        let mut sel = fig_selection(&s);
        let i25 = s.grid.index_of(s.grid.view_from_value(2.5).unwrap());
        sel.set_utilize(1, i25, false);
        let report = check_selection(&s, &sel);
        assert!(report
            .violations
            .contains(&Violation::RightCoverage { user: 1, sum: 0 }));
    }

    #[test]
    fn selection_check_flags_untransmitted_utilization() {
        let s = scenario(4, 2, 1.0, &[1.0, 2.0, 3.0, 4.0], 1e-3);
        let mut sel = fig_selection(&s);
        let i1 = s.grid.index_of(s.grid.view_from_value(1.0).unwrap());
        sel.transmit[i1] = false;
        let report = check_selection(&s, &sel);
        assert!(report
            .violations
            .contains(&Violation::TransmitUtilize { user: 0, view_index: i1 }));
    }

    #[test]
    fn allocation_check_zero_row_and_tight_rate() {
        let s = scenario(2, 2, 1.0, &[1.0], 1e-3);
        let n = s.grid.len();
        let mut sel = Selection::empty(1, n);
        let i1 = s.grid.index_of(s.grid.view_from_value(1.0).unwrap());
        sel.transmit[i1] = true;
        sel.set_utilize(0, i1, true);

        // Idle views with zero time and power are fine under (8).
        let mut alloc = Allocation::zeros(n);
        alloc.time_s[i1] = s.frame_s;
        // Tight inversion of the rate constraint for the worst channel.
        alloc.power_w[i1] = s.noise_w / s.channels[0]
            * ((s.rate_bps / s.bandwidth_hz).exp2() - 1.0);
        let report = check_allocation(&s, &sel, &alloc);
        assert!(report.is_ok(), "{:?}", report.violations);

        // Slightly under-powered fails (8).
        alloc.power_w[i1] *= 0.999;
        assert!(!check_allocation(&s, &sel, &alloc).is_ok());
    }

    #[test]
    fn allocation_check_flags_time_budget() {
        let s = scenario(2, 2, 1.0, &[1.0], 1e-3);
        let n = s.grid.len();
        let sel = Selection::all_direct(&s);
        let mut alloc = Allocation::zeros(n);
        let i1 = s.grid.index_of(s.grid.view_from_value(1.0).unwrap());
        alloc.time_s[i1] = 1.01 * s.frame_s;
        alloc.power_w[i1] = 1.0;
        let report = check_allocation(&s, &sel, &alloc);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::TimeBudget { .. })));
    }

    #[test]
    fn energy_all_direct_has_no_synthesis_terms() {
        let s = scenario(4, 2, 1.0, &[1.0, 2.0, 3.0], 1e-3);
        let sel = Selection::all_direct(&s);
        let mut alloc = Allocation::zeros(s.grid.len());
        for v in 0..s.grid.len() {
            if sel.transmit[v] {
                alloc.time_s[v] = 0.01;
                alloc.power_w[v] = 2.0;
            }
        }
        let e = energy(&s, &sel, &alloc);
        assert_eq!(e.server_synth_j, 0.0);
        assert_eq!(e.user_synth_j, 0.0);
        assert_eq!(e.total_j, e.transmit_j);
    }

    #[test]
    fn energy_combines_components() {
        // One synthesized transmitted view at 1 J of airtime energy,
        // E_b = 0.5 J, two synthesizing users at 0.5 J each, beta = 3.
        let mut s = scenario(4, 2, 1.0, &[1.5, 1.5], 1e-3);
        s.server_synth_j = 0.5;
        s.user_synth_j = vec![0.5, 0.5];
        let n = s.grid.len();
        let g = &s.grid;
        let idx = |v: f64| g.index_of(g.view_from_value(v).unwrap());
        let mut sel = Selection::empty(2, n);
        // Both users synthesize 1.5 from {1, 2.5}; 2.5 itself is
        // synthesized at the server.
        sel.transmit[idx(1.0)] = true;
        sel.transmit[idx(2.5)] = true;
        for k in 0..2 {
            sel.set_utilize(k, idx(1.0), true);
            sel.set_utilize(k, idx(2.5), true);
        }
        assert!(check_selection(&s, &sel).is_ok());
        let mut alloc = Allocation::zeros(n);
        alloc.time_s[idx(2.5)] = 0.5;
        alloc.power_w[idx(2.5)] = 2.0;
        let e = energy(&s, &sel, &alloc);
        assert_eq!(e.transmit_j, 1.0);
        assert_eq!(e.server_synth_j, 0.5);
        assert_eq!(e.user_synth_j, 1.0);
        assert!((e.total_j - 4.5).abs() < 1e-15);

        // Doubling beta doubles only the user-synthesis share.
        s.beta = 6.0;
        let e2 = energy(&s, &sel, &alloc);
        assert_eq!(e2.transmit_j, e.transmit_j);
        assert_eq!(e2.server_synth_j, e.server_synth_j);
        assert!((e2.total_j - (1.0 + 0.5 + 6.0)).abs() < 1e-15);
    }
}
