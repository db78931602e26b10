//! Exhaustive minimization over the per-user choice family, with
//! closed-form allocation per candidate.
//!
//! Candidates are the cross product of each user's choice list; the
//! selection and the per-view worst channels follow from the choices, so
//! the airtime energy of a candidate only depends on its transmitted
//! profile. Profiles repeat heavily across candidates and their
//! allocations are memoized. Evaluation runs in parallel; the reduction
//! is a total order on (energy, utilization matrix), so the winner does
//! not depend on thread count, and energy ties resolve to the
//! lexicographically smallest utilization.

use crate::allocator::optimal_allocation;
use crate::candidates::{
    enumerate_user_choices, enumerate_user_choices_unpruned, selection_from_choices, UserChoice,
};
use crate::error::{Error, Result};
use crate::model::{energy, Scenario, Selection};
use crate::solution::{Diagnostics, Solution, SolverTag};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Instant;

/// Enumeration guard for the unpruned search.
pub const BRUTE_CANDIDATE_LIMIT: f64 = 1e7;

/// Globally minimal energy over the reduced family: per-user candidate
/// sets when the pruning hypothesis holds, full reference windows
/// otherwise.
pub fn solve_exact(scenario: &Scenario) -> Result<Solution> {
    let lists: Vec<Vec<UserChoice>> = (0..scenario.user_count())
        .map(|k| enumerate_user_choices(scenario, k))
        .collect();
    solve_enumerated(scenario, &lists, SolverTag::Exact)
}

/// Same contract over the full, unpruned family. Intended as a test
/// oracle; refuses instances whose candidate count exceeds
/// [`BRUTE_CANDIDATE_LIMIT`].
pub fn solve_brute(scenario: &Scenario) -> Result<Solution> {
    let lists: Vec<Vec<UserChoice>> = (0..scenario.user_count())
        .map(|k| enumerate_user_choices_unpruned(scenario, k))
        .collect();
    let count = lists.iter().map(|l| l.len() as f64).product::<f64>();
    if count > BRUTE_CANDIDATE_LIMIT {
        return Err(Error::InstanceTooLarge { candidates: count, limit: BRUTE_CANDIDATE_LIMIT });
    }
    solve_enumerated(scenario, &lists, SolverTag::Brute)
}

struct Candidate {
    total_j: f64,
    selection: Selection,
    choices: Vec<usize>,
}

fn solve_enumerated(
    scenario: &Scenario,
    lists: &[Vec<UserChoice>],
    tag: SolverTag,
) -> Result<Solution> {
    let started = Instant::now();
    let mut total: u64 = 1;
    for list in lists {
        debug_assert!(!list.is_empty());
        total = total.checked_mul(list.len() as u64).ok_or(Error::InstanceTooLarge {
            candidates: f64::INFINITY,
            limit: u64::MAX as f64,
        })?;
    }

    // Airtime energies keyed by the transmitted profile (view, worst
    // channel bits); many candidates share one.
    let memo: Mutex<HashMap<Vec<(u32, u64)>, f64>> = Mutex::new(HashMap::new());

    let evaluate = |index: u64| -> Result<Candidate> {
        let mut rest = index;
        let choices: Vec<usize> = lists
            .iter()
            .map(|list| {
                let c = (rest % list.len() as u64) as usize;
                rest /= list.len() as u64;
                c
            })
            .collect();
        let picked: Vec<UserChoice> = choices
            .iter()
            .zip(lists)
            .map(|(&c, list)| list[c])
            .collect();
        let selection = selection_from_choices(scenario, &picked);

        let profile = crate::allocator::transmitted_profile(scenario, &selection)?;
        let key: Vec<(u32, u64)> = profile
            .iter()
            .map(|&(v, h)| (v as u32, h.to_bits()))
            .collect();
        let cached = memo.lock().unwrap().get(&key).copied();
        let transmit_j = match cached {
            Some(e) => e,
            None => {
                let (_, e, _) = optimal_allocation(scenario, &selection)?;
                memo.lock().unwrap().insert(key, e);
                e
            }
        };

        let grid = &scenario.grid;
        let server_synth_j = scenario.server_synth_j
            * (0..grid.len())
                .filter(|&v| selection.transmit[v] && !grid.is_original(grid.view_at(v)))
                .count() as f64;
        let user_synth_j: f64 = picked
            .iter()
            .enumerate()
            .map(|(k, c)| match c {
                UserChoice::Direct => 0.0,
                UserChoice::SynthPair { .. } => scenario.user_synth_j[k],
            })
            .sum();
        let total_j = transmit_j + server_synth_j + scenario.beta * user_synth_j;
        Ok(Candidate { total_j, selection, choices })
    };

    let better = |a: Candidate, b: Candidate| -> Candidate {
        if a.total_j < b.total_j {
            a
        } else if b.total_j < a.total_j {
            b
        } else if a.selection.utilization() <= b.selection.utilization() {
            a
        } else {
            b
        }
    };

    let best = (0..total)
        .into_par_iter()
        .map(evaluate)
        .try_reduce_with(|a, b| Ok(better(a, b)))
        .expect("at least one candidate: direct service is always feasible")?;

    let picked: Vec<UserChoice> = best
        .choices
        .iter()
        .zip(lists)
        .map(|(&c, list)| list[c])
        .collect();
    let selection = selection_from_choices(scenario, &picked);
    let (allocation, _, _) = optimal_allocation(scenario, &selection)?;
    let breakdown = energy(scenario, &selection, &allocation);
    debug_assert!((breakdown.total_j - best.total_j).abs() <= 1e-12 * breakdown.total_j.max(1e-300));

    let mut diagnostics = Diagnostics::new(tag);
    diagnostics.candidates_evaluated = total;
    diagnostics.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(Solution { selection, allocation, energy: breakdown, diagnostics })
}
