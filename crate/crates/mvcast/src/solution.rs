//! Solver output container shared by every scheme.

use crate::model::{Allocation, EnergyBreakdown, Selection};
use std::fmt;
use std::str::FromStr;

/// Which scheme produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolverTag {
    Exact,
    Brute,
    RelaxRound,
    Dc,
    Baseline1,
    Baseline2,
}

impl SolverTag {
    pub const ALL: [SolverTag; 6] = [
        SolverTag::Exact,
        SolverTag::Brute,
        SolverTag::RelaxRound,
        SolverTag::Dc,
        SolverTag::Baseline1,
        SolverTag::Baseline2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverTag::Exact => "exact",
            SolverTag::Brute => "brute",
            SolverTag::RelaxRound => "relax",
            SolverTag::Dc => "dc",
            SolverTag::Baseline1 => "baseline1",
            SolverTag::Baseline2 => "baseline2",
        }
    }
}

impl fmt::Display for SolverTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(SolverTag::Exact),
            "brute" => Ok(SolverTag::Brute),
            "relax" => Ok(SolverTag::RelaxRound),
            "dc" => Ok(SolverTag::Dc),
            "baseline1" => Ok(SolverTag::Baseline1),
            "baseline2" => Ok(SolverTag::Baseline2),
            other => Err(format!(
                "unknown scheme `{other}`; expected one of exact, brute, relax, dc, baseline1, baseline2"
            )),
        }
    }
}

/// Run metadata attached to a solution.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub solver: SolverTag,
    /// Candidates enumerated (exact/brute) — zero for other schemes.
    pub candidates_evaluated: u64,
    /// Newton or outer iterations spent, depending on the scheme.
    pub iterations: u32,
    pub wall_ms: f64,
    /// Objective of the continuous relaxation when one was solved.
    pub lower_bound_j: Option<f64>,
    /// Free-form markers such as `nonbinary` or `rho_doubled`.
    pub flags: Vec<String>,
}

impl Diagnostics {
    pub fn new(solver: SolverTag) -> Self {
        Self {
            solver,
            candidates_evaluated: 0,
            iterations: 0,
            wall_ms: 0.0,
            lower_bound_j: None,
            flags: Vec::new(),
        }
    }
}

/// A feasible selection with its optimal allocation and energy.
#[derive(Debug, Clone)]
pub struct Solution {
    pub selection: Selection,
    pub allocation: Allocation,
    pub energy: EnergyBreakdown,
    pub diagnostics: Diagnostics,
}
