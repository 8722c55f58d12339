//! Robust and secure ISAC beamforming designs over a transmissive
//! reconfigurable-surface transmitter.
//!
//! The library builds the chance-constrained secrecy-rate maximization
//! problem for a multi-user downlink with eavesdroppers sharing the
//! waveform with a sensing function, convexifies it (Bernstein-type tail
//! bounds for the outage constraints, S-procedure certificates for the
//! worst-case SINR terms, tangent majorization for the log terms), and
//! solves it by block-coordinate descent over conic subproblems.
//! Every probabilistic and worst-case guarantee claimed by the design is
//! re-checked by independent Monte-Carlo and grid-search oracles.
//!
//! Crate layout follows the pipeline:
//!
//! - [`scenario`] — experiment configuration, physical constants, geometry
//! - [`channel`] — steering vectors, nominal channels, random realizations
//! - [`uncertainty`] — geometric bounds on the eavesdropper channel error
//! - [`metrics`] — SINRs, rates, secrecy/detection/beampattern figures
//! - [`conic`] — solver-agnostic conic program builder (LP/SOC/SDP)
//! - [`transforms`] — convexified constraint fragments
//! - [`bcd`] — the alternating two-block design loop
//! - [`verify`] — independent oracles grading a returned solution

extern crate openblas_src;

pub mod bcd;
pub mod channel;
pub mod conic;
pub mod metrics;
pub mod scenario;
pub mod transforms;
pub mod uncertainty;
pub mod verify;

pub use scenario::Scenario;
