//! Couplings, Eurandom distances and least upper bounds.

pub mod eurandom;
pub mod lp;
pub mod lub;

pub use eurandom::{
    eurandom, eurandom_objective, gen_eurandom, pair_functional_gap, Coupling, EurandomConfig, EurandomResult,
};
pub use lp::{northwest_corner, solve_transport_lp, LpSolution, Plan};
pub use lub::{lub, Lub, LubReport};
