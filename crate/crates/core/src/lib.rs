//! Noncooperative power control and receiver selection in multi-hop DS-CDMA
//! networks.
//!
//! Each node picks a transmit power and a linear receiver (matched filter,
//! decorrelator or MMSE) to maximize the bits it delivers per joule, counting
//! both transmit power and the power spent running the node. This crate
//! holds the model and the solvers:
//!
//! - [`scenario`]: random placement, next-hop routing and fading gains;
//! - [`receivers`]: spreading codes and closed-form output SINRs;
//! - [`game`]: efficiency function, utility and best responses;
//! - [`dynamics`]: best-response iteration to a Nash equilibrium;
//! - [`montecarlo`]: chip-level simulation to cross-check the analytics.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, sweeps and the
//! command-line runner live in the `powergame` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
mod error;
pub mod game;
pub mod linalg;
pub mod montecarlo;
pub mod realization;
pub mod receivers;
pub mod rng;
pub mod scenario;

pub use dynamics::{
    pareto_probe, run_best_response_dynamics, verify_equilibrium, DynamicsOptions,
    EquilibriumReport, PowerProfile, ReceiverPolicy,
};
pub use error::{Error, Result};
pub use game::{BestResponse, EfficiencyFunction, Game, Strategy};
pub use realization::Realization;
pub use receivers::{Channel, CodeBook, ReceiverKind, ReceiverSet};
pub use scenario::{GameConfig, Hop, Point, Scenario};
