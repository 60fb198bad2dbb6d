//! Simulation and evaluation stack for one-time-pad communication keyed by
//! photonic physical unclonable functions.
//!
//! The crate is organized around the data path of the system:
//!
//! * [`puf_sim`] — a deterministic stochastic surrogate for the micro-cavity
//!   device: challenge patterns in, analog pulse energies out.
//! * [`postproc`] — histogram equalization, non-uniform resampling,
//!   adjacent-XOR whitening, and MSB selection turning analog sequences into
//!   binary responses.
//! * [`bch`] — a narrow-sense binary BCH codec of length 255 over GF(2^8)
//!   with explicit decoder-failure reporting.
//! * [`fuzzy`] — code-offset secure sketch plus SHA-256 extractor.
//! * [`protocol`] — public-dictionary setup and block-wise one-time-pad
//!   encryption/decryption between two devices.
//! * [`analysis`] — fractional-Hamming-distance statistics, binomial fits,
//!   block/message error prediction, ENOB, entropy rate, and CTW
//!   compression estimates.
//! * [`pipeline`] / [`sweep`] — composition helpers and Monte-Carlo
//!   harnesses (noise calibration, BER-vs-code-rate sweeps, clone attacks).

pub mod analysis;
pub mod bch;
pub mod bits;
pub mod error;
pub mod fuzzy;
pub mod math;
pub mod pipeline;
pub mod postproc;
pub mod protocol;
pub mod puf_sim;
pub mod sweep;

pub use analysis::{fhd, FhdLabel, FhdStats};
pub use bch::{BchCode, DecodeOutcome};
pub use bits::Bits;
pub use error::{Error, Result};
pub use fuzzy::{ExtractedKey, HelperData};
pub use postproc::{BinaryResponse, PostprocConfig, Quantizer, Whitening};
pub use protocol::{BlockRecord, Ciphertext, Dictionary};
pub use puf_sim::{ChallengePattern, DeviceModel};
