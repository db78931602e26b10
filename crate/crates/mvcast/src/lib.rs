//! Energy-minimal delivery of multi-view video over a TDMA downlink.
//!
//! A server holds `V` camera views on a 1/Q grid and serves `K` users,
//! each requesting one view. A request is met either by transmitting the
//! view itself or by transmitting a left and a right reference within
//! reach `delta`, from which the user synthesizes it. Transmitting a
//! synthesized view costs the server synthesis energy; transmission
//! itself costs airtime energy determined by the worst channel among the
//! users sharing the view. The library minimizes the weighted sum of
//! transmission and synthesis energy over the view selection and the
//! per-view time/power split of the frame.
//!
//! Solvers, from exact to cheap:
//! - [`exact::solve_exact`]: enumeration over a pruned candidate family
//!   with closed-form water-filling per candidate.
//! - [`relax::solve_relax_round`]: continuous relaxation solved by an
//!   interior-point method, then rounded.
//! - [`dc::solve_dc`]: penalized difference-of-convex iteration driving
//!   the relaxation to a binary point.
//! - [`baselines`]: server-side-only and user-side-only synthesis
//!   comparison schemes.
//!
//! [`experiments`] generates random fading scenarios and sweeps
//! bandwidth, frame duration or user count across schemes, emitting
//! plot-ready CSV.

pub mod allocator;
pub mod baselines;
pub mod candidates;
pub mod config;
pub mod convex;
pub mod dc;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod model;
pub mod numerics;
pub mod relax;
pub mod solution;
pub mod validate;

pub use error::{Error, Result};
pub use model::{
    check_allocation, check_selection, energy, reference_windows, Allocation, EnergyBreakdown,
    FeasibilityReport, Scenario, Selection, View, ViewGrid, Violation,
};
pub use solution::{Diagnostics, Solution, SolverTag};
