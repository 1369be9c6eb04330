//! Physical signal model: steering vectors and beampatterns, channels and
//! conditional CSIT sampling, SINRs and rates, and their sample averages.

mod channel;
mod pattern;
mod precoder;
mod rates;

pub use channel::{sample_channel_estimate, sample_saa_batch, ChannelEstimate, SaaBatch};
pub use pattern::{beampattern_gain, bse, grid_gains, steering_vector, BeampatternSpec};
pub use precoder::{CommonRateShares, Precoder};
pub use rates::{average_rates, common_rate, sinr_and_rates, AverageRates, StreamRates};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0}")]
    Invalid(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> ModelError {
    ModelError::Invalid(msg.into())
}
