//! Simulation toolkit for deterministic identification (DI) codes over fast- and
//! slow-fading Gaussian channels with channel state known at the decoder.
//!
//! The pipeline is: pack spheres in the power ball ([`geometry`]), take the
//! centers as codewords ([`codec`]), push them through a fading channel
//! ([`channel`]), estimate missed and false identification rates by Monte Carlo
//! ([`estimation`]), and compare against closed-form rate and capacity results
//! ([`analysis`]).

pub mod analysis;
pub mod channel;
pub mod codec;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod io;
pub mod rng;

pub use analysis::{classify_regime, dominates, DominanceGrid, RegimeVerdict, Scale, Verdict};
pub use channel::{ChannelModel, ChannelRealization, FadingFamily, FadingSpec, Flavor, Gains, WeightedGain};
pub use codec::{build_codebook, delta_n, Codebook, CodebookParams, DecoderRule, Schedule};
pub use error::{Error, Result};
pub use estimation::{ErrorKind, ErrorReport, TrialPlan};
pub use geometry::{Packing, PackingConfig};
