//! Distances between reward functions, computed without training policies.
//!
//! Two rewards that differ by a positive rescaling plus a potential shaping
//! `γΦ(s') − Φ(s)` induce the same optimal policies in every MDP sharing
//! their state/action space and discount. This crate treats such rewards as
//! equivalent and provides:
//!
//! * canonical shaping ([`canonical`]) — a representative of each
//!   equivalence class, computed exactly for tables or by sampling for
//!   black-box rewards;
//! * EPIC ([`distances::epic_exact`], [`distances::epic_sampled`]) — the
//!   Pearson distance between canonical rewards, a pseudometric that is
//!   zero on equivalence classes and upper-bounds optimal-policy regret;
//! * baselines: direct L^p distance, the standardized-reward variant
//!   (DDSR, identical to EPIC at p = 2), episode return correlation (ERC),
//!   and nearest-point-in-equivalence-class (NPEC) with an exact tabular
//!   solver and a gradient-descent approximation;
//! * tabular MDP tooling: value iteration, exact policy returns, and an
//!   empirical checker for the optimal-policy regret bound;
//! * built-in gridworld and point-mass environments plus a random-MDP
//!   generator, and a JSON interchange format for MDPs with named rewards.

pub mod canonical;
pub mod coverage;
pub mod distances;
pub mod environments;
pub mod error;
pub mod io;
pub mod mdp;
pub mod npec;
pub mod reward;
pub mod solver;
pub mod stats;
pub mod trajectory;

mod shaping_fit;

pub use crate::error::{Error, Result};
pub use crate::mdp::TabularMdp;
pub use crate::reward::{
    apply_equivalence, check_equivalent, shaping_only, EquivalenceTransform, RewardFunction,
    RewardTable,
};
pub use crate::trajectory::Trajectory;
