//! Secrecy-rate maximization for a fluid-antenna wiretap channel in which
//! Alice's second antenna jams the eavesdropper with decodable codewords.
//!
//! * [`specfun`]: the Bessel function `J0`.
//! * [`channel`]: port geometry, Jakes correlation, correlated Rayleigh draws
//!   and the Eve-side CSI error model.
//! * [`rates`]: the secrecy-rate expressions at one port.
//! * [`optimizer`]: closed-form per-port power control, exhaustive port
//!   selection, and the grid-search baselines and oracle.
//! * [`montecarlo`]: reproducible sweeps over channel realizations.
//! * [`cli`]: the `fas-secrecy` command line.

pub mod channel;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod optimizer;
pub mod rates;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
