//! Analytical model and Monte-Carlo link simulator for a resonant-beam
//! optical communication system.
//!
//! The system under study is a free-space link in which the transmitter and
//! receiver form a laser resonator between two telecentric cat's-eye
//! retroreflectors. The intracavity beam pumps a thin gain medium at the
//! transmitter, a partially reflective mirror at the receiver taps the
//! circulating power, and a frequency-doubling crystal converts the tapped
//! beam out of the resonant wavelength so that it can be detected without
//! re-entering the cavity. Information rides on the doubled beam as
//! QAM-OFDM.
//!
//! The crate is organised along that signal path:
//!
//! * [`ray_matrix`] — 2×2 ray-transfer matrices and the cat's-eye
//!   retroreflector model.
//! * [`resonator`] — equivalent-resonator reduction, stability, and the
//!   fundamental Gaussian mode along the cavity axis.
//! * [`diffraction`] — round-trip diffraction survival at the gain aperture.
//! * [`power_chain`] — pump-to-beam power conversion: saturation intensity,
//!   Rigrod two-beam extraction, and second-harmonic generation.
//! * [`link_budget`] — received power, photodetector noise, SNR, and
//!   Shannon capacity.
//! * [`system`] — the end-to-end chain, one call from pump power to
//!   capacity.
//! * [`ofdm`] — bit-level Monte-Carlo simulation of the QAM-OFDM modem over
//!   the equivalent AWGN channel.
//!
//! All physics modules are generic over the scalar type through the
//! [`scalar::Real`] trait (`f32` or `f64`); concrete `f64` aliases for the
//! main entry points are exported at the crate root.

// Validation guards are written `!(x > lo)` on purpose: unlike `x <= lo`,
// the negated form also rejects NaN arguments.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod diffraction;
mod error;
pub mod link_budget;
pub mod ofdm;
pub mod power_chain;
pub mod ray_matrix;
pub mod resonator;
pub mod scalar;
pub mod system;

pub use error::{Error, Result};
pub use ray_matrix::{CatsEye, RayMatrix};
pub use resonator::{EquivalentResonator, ModeStructure, ResonatorGeometry, Stability};
pub use scalar::{Real, SimScalar};
pub use system::{SystemReport, SystemSpec};

// ----- concrete f64 aliases ------------------------------------------------

/// `f64` ray-transfer matrix.
pub type RayMatrix64 = ray_matrix::RayMatrix<f64>;
/// `f64` cat's-eye retroreflector description.
pub type CatsEye64 = ray_matrix::CatsEye<f64>;
/// `f64` resonator geometry.
pub type ResonatorGeometry64 = resonator::ResonatorGeometry<f64>;
/// `f64` end-to-end system description.
pub type SystemSpec64 = system::SystemSpec<f64>;
/// `f64` end-to-end system report.
pub type SystemReport64 = system::SystemReport<f64>;
/// `f64` OFDM modem configuration.
pub type OfdmConfig64 = ofdm::OfdmConfig<f64>;
/// `f64` Monte-Carlo link report.
pub type BerReport64 = ofdm::BerReport<f64>;
