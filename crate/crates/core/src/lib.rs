//! Analytical and simulation toolkit for reputation-based social norms in
//! online communities.
//!
//! A community of `N` users repeatedly plays an asymmetric gift-giving game:
//! every period each user serves one client and is served by one server.
//! A [`SocialNorm`] prescribes whom a server must help (the social rule) and
//! how reputations evolve (the reputation scheme). Self-interested users
//! adapt by solving a small MDP over their own reputation
//! ([`bestresponse`]); the census of reputations then evolves as a Markov
//! chain ([`chain`]) whose long-run support tells the protocol designer
//! whether full cooperation survives noisy reports ([`design`]). The
//! [`sim`] module runs the same dynamics agent-by-agent for large
//! populations.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! thread pools live in the companion `normsim` crate.

#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

pub mod belief;
pub mod bestresponse;
pub mod chain;
pub mod design;
mod error;
mod math;
pub mod norms;
pub mod payoff;
pub mod sim;

pub use belief::{BeliefMatrix, FixedBelief, ServiceBelief};
pub use bestresponse::{
    closed_form_bimodal, solve_value_iteration, verify_threshold_structure, ActionSpace,
    BestResponseSolution, ClosedFormSolution, Solver, ThresholdCheck,
};
pub use design::{
    absorbing_bounds, feasibility_test, feasible_region_grid, solve_h, AbsorbingBounds, Boundary,
    DesignVerdict, RegionCell,
};
pub use error::{Error, Result};
pub use norms::{CommunityParams, NormConfig, SocialNorm, ThresholdStrategy};
pub use payoff::{
    expected_one_period_utility, opponent_of, prob_reset, prob_reset_under_belief, Configuration,
    OpponentConfig,
};

/// Reputation values run over `0..=L`.
pub type Reputation = usize;

/// Policy ties are resolved deterministically toward the larger threshold,
/// or split uniformly across all co-optimal thresholds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    #[default]
    LargerThreshold,
    FairCoin,
}
