//! Joint radar-communication transmit precoder optimization.
//!
//! A multi-antenna transmitter serves downlink users with rate splitting
//! (a common stream decoded by everyone plus private streams) while its
//! transmit beampattern is shaped against a desired radar pattern. Under
//! partial channel knowledge the communication objective is an average
//! weighted sum-rate over the conditional channel distribution, handled
//! by sample average approximation and a weighted-MMSE reformulation; the
//! radar objective is the squared beampattern error, handled by
//! semidefinite relaxation. A consensus ADMM loop alternates between the
//! two solvers and a scaled dual update.
//!
//! The `experiments` module reproduces the ergodic sum-rate versus
//! beampattern-error trade-off studies, including the SDMA baseline
//! (rate splitting with the common stream disabled).

pub mod admm;
pub mod awsr;
pub mod cli;
pub mod config;
pub mod experiments;
pub mod model;
pub mod radar;
pub mod rng;

pub use config::{AccessMode, CsitMode, SolverKnobs, SystemConfig};
pub use model::{
    average_rates, beampattern_gain, bse, common_rate, sample_channel_estimate, sample_saa_batch,
    sinr_and_rates, steering_vector, AverageRates, BeampatternSpec, ChannelEstimate,
    CommonRateShares, Precoder, SaaBatch,
};
