//! Behavioral modeling of sub-THz power amplifiers, amplitude/phase
//! predistortion, and single-carrier / OFDM link simulation.
//!
//! The crate is organised bottom-up:
//!
//! * [`pa`] evaluates the Rapp, Saleh, Ghorbani and polynomial AM-AM/AM-PM
//!   characteristics and applies them to baseband envelopes.
//! * [`fitting`] extracts model parameters from measured AM-AM/AM-PM curves.
//! * [`predistortion`] builds the clipped inverse of a Rapp amplifier and its
//!   least-squares polynomial approximations.
//! * [`waveforms`] generates and demodulates QAM single-carrier and OFDM
//!   signals and computes PAPR and EVM.
//! * [`link`] chains everything into EVM / BER experiments and link budgets.
//! * [`io`] reads measurement tables and reads/writes model and result files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fitting;
pub mod io;
pub mod link;
pub mod pa;
pub mod poly;
pub mod predistortion;
pub mod signal;
pub mod units;
pub mod waveforms;

pub use error::{Error, ErrorClass, Result};
pub use pa::{AmplitudePhase, ModelKind, ModelParams, PaModel};
pub use signal::SampleBuffer;
