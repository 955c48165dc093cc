//! Distances between reward functions: EPIC, DDSR, direct L^p, and ERC.

mod ddsr;
mod epic;
mod erc;
mod estimate;
mod pearson;

pub use ddsr::{ddsr_distance, direct_distance_lp};
pub use epic::{epic_exact, epic_sampled, SampledEpicConfig};
pub(crate) use epic::seed_stream;
pub use erc::erc_distance;
pub use estimate::{DistanceEstimate, Method, SampleInfo};
pub use pearson::pearson_distance;
