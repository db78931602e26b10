//! Candidate views per user and the reduced choice family the exact
//! search enumerates.
//!
//! For a pair of users the views worth utilizing collapse to a handful:
//! the own request, the extreme reachable references `r_max - delta` and
//! `r_min + delta`, originals inside the window overlap, and (when the
//! two requests can reference each other) the other request. Unioning
//! over all other users gives the per-user candidate set; the search
//! space becomes direct service plus every (left, right) reference pair
//! drawn from it. The reduction is only valid when weighted user-side
//! synthesis is at least as expensive as server-side synthesis, so the
//! enumeration falls back to the full reference windows when that fails.

use crate::model::{Scenario, Selection, View};
use std::collections::BTreeSet;

/// How one user's request is served.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UserChoice {
    /// Utilize the requested view itself.
    Direct,
    /// Synthesize the request from a transmitted left and right reference.
    SynthPair { left: View, right: View },
}

/// Views user `a` may utilize at an optimum when only users `a` and `b`
/// exist. Members that fall off the grid are dropped.
pub fn pairwise_candidates(scenario: &Scenario, a: usize, b: usize) -> BTreeSet<View> {
    debug_assert_ne!(a, b);
    let grid = &scenario.grid;
    let q = grid.subdivision() as i64;
    let top = (grid.original_count() * grid.subdivision()) as i64;
    let d = (grid.delta() * grid.subdivision() as f64).round() as i64;

    let ra = scenario.requests[a].0 as i64;
    let rb = scenario.requests[b].0 as i64;
    let r_min = ra.min(rb);
    let r_max = ra.max(rb);

    let mut raw: Vec<i64> = Vec::new();
    if r_max > r_min && r_max <= r_min + d {
        // The larger request sits inside the smaller one's right window.
        raw.extend([ra, rb, r_max - d, r_min + d]);
    } else {
        // Overlap of right(r_min) with left(r_max), clipped to the grid.
        let lo = (r_min + 1).max(r_max - d).max(q);
        let hi = (r_min + d).min(r_max - 1).min(top);
        if lo > hi {
            raw.push(ra);
        } else {
            raw.extend([ra, r_max - d, r_min + d]);
            for g in lo..=hi {
                if g % q == 0 {
                    raw.push(g);
                }
            }
        }
    }

    raw.into_iter()
        .filter(|&g| g >= q && g <= top)
        .map(|g| View(g as u32))
        .collect()
}

/// Views user `k` may utilize at an optimum, over all other users. For a
/// lone user the pairwise construction has no partner, so the full
/// reference windows are used.
pub fn user_candidates(scenario: &Scenario, k: usize) -> BTreeSet<View> {
    let users = scenario.user_count();
    if users == 1 {
        let grid = &scenario.grid;
        let r = scenario.requests[k];
        let mut set: BTreeSet<View> = [r].into();
        set.extend(grid.left_window(r).map(|i| grid.view_at(i)));
        set.extend(grid.right_window(r).map(|i| grid.view_at(i)));
        return set;
    }
    let mut set = BTreeSet::new();
    for i in 0..users {
        if i != k {
            set.extend(pairwise_candidates(scenario, k, i));
        }
    }
    set
}

/// Whether the candidate-set reduction preserves optimality: weighted
/// user-side synthesis must cost at least the server-side synthesis for
/// every user.
pub fn pruning_applies(scenario: &Scenario) -> bool {
    scenario
        .user_synth_j
        .iter()
        .all(|&e| scenario.beta * e >= scenario.server_synth_j)
}

/// Every way user `k` can be served, restricted to the candidate set when
/// the reduction applies and to the full windows otherwise. Direct
/// service comes first; pairs are ordered by (left, right) view.
pub fn enumerate_user_choices(scenario: &Scenario, k: usize) -> Vec<UserChoice> {
    if pruning_applies(scenario) {
        let allowed = user_candidates(scenario, k);
        choices_within(scenario, k, Some(&allowed))
    } else {
        choices_within(scenario, k, None)
    }
}

/// The unreduced choice list over the full reference windows.
pub fn enumerate_user_choices_unpruned(scenario: &Scenario, k: usize) -> Vec<UserChoice> {
    choices_within(scenario, k, None)
}

fn choices_within(
    scenario: &Scenario,
    k: usize,
    allowed: Option<&BTreeSet<View>>,
) -> Vec<UserChoice> {
    let grid = &scenario.grid;
    let r = scenario.requests[k];
    let mut out = vec![UserChoice::Direct];
    let keep = |view: View| allowed.map_or(true, |set| set.contains(&view));
    for li in grid.left_window(r) {
        let left = grid.view_at(li);
        if !keep(left) {
            continue;
        }
        for ri in grid.right_window(r) {
            let right = grid.view_at(ri);
            if keep(right) {
                out.push(UserChoice::SynthPair { left, right });
            }
        }
    }
    out
}

/// Materialize a per-user choice vector into selection variables, with
/// transmissions derived as `x_v = max_k y_{k,v}`.
pub fn selection_from_choices(scenario: &Scenario, choices: &[UserChoice]) -> Selection {
    let grid = &scenario.grid;
    let mut sel = Selection::empty(scenario.user_count(), grid.len());
    for (k, choice) in choices.iter().enumerate() {
        match *choice {
            UserChoice::Direct => {
                sel.set_utilize(k, grid.index_of(scenario.requests[k]), true);
            }
            UserChoice::SynthPair { left, right } => {
                sel.set_utilize(k, grid.index_of(left), true);
                sel.set_utilize(k, grid.index_of(right), true);
            }
        }
    }
    sel.derive_transmit_from_utilization();
    sel
}
