//! Coding and capacity tools for the finite-field multi-way relay channel
//! with pairwise common messages.
//!
//! * [`gf`] finite-field arithmetic and linear algebra
//! * [`channel`] uplink/downlink models and information measures
//! * [`capacity`] region membership, outer bound, the private-message
//!   baseline LP
//! * [`schedule`] the uplink message table
//! * [`shuffle`] column rearrangement making every user's system solvable
//! * [`codec`] the nested functional-decode-forward physical layer
//! * [`sim`] Monte Carlo block-error measurement
//! * [`config`] JSON configuration schemas

pub mod capacity;
pub mod channel;
pub mod codec;
pub mod config;
pub mod error;
pub mod exec;
pub mod gf;
pub mod lp;
pub mod message;
pub mod rng;
pub mod schedule;
pub mod shuffle;
pub mod sim;

pub use error::{Error, Result};
pub use exec::Execution;
pub use message::MessageId;
