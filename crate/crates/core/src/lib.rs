//! Link-level simulation of noncoherent on-off keying over body-channel
//! fading links with `K` distributed receive nodes.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: Burr XII and Weibull amplitude laws, inverse-transform
//!   sampling and the nine-entry channel registry.
//! - [`link`]: unit conversions, the training sequence and the per-slot
//!   received-signal model `y = sqrt(P) h x + n`.
//! - [`detect`]: training statistics, the probability / deviation /
//!   combination weightings, fusion and the coherent MRC baseline.
//! - [`montecarlo`]: seeded, parallel BER estimation over power and
//!   training-length sweeps.
//! - [`config`] and [`report`]: scenario files, figure presets and the CSV
//!   result format.

pub mod channel;
pub mod config;
pub mod detect;
pub mod error;
pub mod link;
pub mod montecarlo;
pub mod report;

pub use channel::{table1_registry, BurrXii, Condition, DistributionSpec, NodeProfile, Weibull};
pub use detect::{Technique, TrainingStats, WeightPair};
pub use error::{Error, Result};
pub use link::{LinkParams, ReceivedFrame, Symbol};
pub use montecarlo::{BerPoint, Scenario, SweepResult};
