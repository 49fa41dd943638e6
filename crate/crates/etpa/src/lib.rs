//! Entangled two-photon absorption (ETPA) of pulsed parametric down-conversion
//! light, from isolated photon pairs to bright squeezed beams.
//!
//! Internal units: the pump bandwidth `Omega_p` and the pump momentum width
//! `Q_p` are both 1, so every frequency and momentum is a ratio to them.

pub mod cli;
pub mod error;
pub mod molecule;
pub mod pairlimit;
pub mod pdc;
pub mod scan;
pub mod signal_spatial;
pub mod signal_spectral;
pub mod specfun;

pub use error::{Error, Result};
