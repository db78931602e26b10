//! The shared convex program behind the continuous relaxation and each
//! penalized iteration: transmission time plus fractional utilization,
//! with the airtime energy in epigraph form.
//!
//! The airtime term is a max of perspective functions
//! `t * (n0/h) (2^(y R T / (B t)) - 1)`, jointly convex in `(t, y)`;
//! one epigraph variable per view absorbs the max over users and one
//! auxiliary variable per synthesized view absorbs the max inside the
//! server-synthesis term. Everything else is affine, so the whole
//! program is smooth on the interior and a primal log-barrier method
//! with damped Newton steps solves it without external dependencies.
//! The Newton systems are block-diagonal per view plus a rank-one
//! coupling from the frame budget and a handful of per-user equality
//! rows, which keeps each step linear in the program size.

mod program;
mod solver;

pub use program::{build_program, perspective_objective, ConvexViewProgram, LinearYTerm};
pub use solver::{solve_program, ConvexSolution, KktResiduals};
