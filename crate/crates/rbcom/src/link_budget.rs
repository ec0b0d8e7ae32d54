//! Received power, photodetector noise, SNR, and Shannon capacity of the
//! frequency-doubled carrier.
//!
//! The doubled beam leaves the resonator at the receiver, so it crosses
//! the air span once: `P_r = η_dev·exp(−α·d)·P_2ν`. Direct detection with
//! responsivity `γ` produces the signal current `γ·P_r` against two noise
//! currents within the receiver bandwidth `B`:
//!
//! ```text
//! σ_shot²    = 2·e·(γ·P_r + I_bk)·B      (signal + background shot noise)
//! σ_thermal² = 4·k·T·B / R_L             (load-resistor Johnson noise)
//! ```
//!
//! The electrical SNR is `(γ·P_r)²/(σ_shot² + σ_thermal²)`, giving the
//! spectral efficiency `log2(1 + SNR)` and the capacity `B·log2(1 + SNR)`.

use crate::constants;
use crate::power_chain::AIR_ATTENUATION;
use crate::scalar::Real;
use crate::{Error, Result};

fn check_positive<T: Real>(name: &'static str, value: T) -> Result<T> {
    if value > T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value: value.as_f64(),
            constraint: "a finite positive value",
        })
    }
}

fn check_nonnegative<T: Real>(name: &'static str, value: T) -> Result<T> {
    if value >= T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value: value.as_f64(),
            constraint: "a finite non-negative value",
        })
    }
}

/// The direct-detection photodiode front end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detector<T> {
    responsivity: T,
    bandwidth: T,
    temperature: T,
    load_resistance: T,
    background_current: T,
}

impl<T: Real> Detector<T> {
    /// Builds a detector from responsivity γ (A/W), bandwidth B (Hz),
    /// temperature T (K), load resistance R_L (Ω), and background
    /// photocurrent I_bk (A).
    pub fn new(
        responsivity: T,
        bandwidth: T,
        temperature: T,
        load_resistance: T,
        background_current: T,
    ) -> Result<Self> {
        check_positive("responsivity", responsivity)?;
        check_positive("bandwidth", bandwidth)?;
        check_positive("temperature", temperature)?;
        check_positive("load_resistance", load_resistance)?;
        check_nonnegative("background_current", background_current)?;
        Ok(Self {
            responsivity,
            bandwidth,
            temperature,
            load_resistance,
            background_current,
        })
    }

    /// Responsivity γ (A/W).
    pub fn responsivity(&self) -> T {
        self.responsivity
    }

    /// Receiver bandwidth B (Hz).
    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    /// Operating temperature (K).
    pub fn temperature(&self) -> T {
        self.temperature
    }

    /// Load resistance R_L (Ω).
    pub fn load_resistance(&self) -> T {
        self.load_resistance
    }

    /// Background-radiation photocurrent I_bk (A).
    pub fn background_current(&self) -> T {
        self.background_current
    }
}

/// Noise-current variances (A²) within the receiver bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePowers<T> {
    /// Shot noise `2·e·(γ·P_r + I_bk)·B`.
    pub shot: T,
    /// Thermal noise `4·k·T·B/R_L`.
    pub thermal: T,
}

impl<T: Real> NoisePowers<T> {
    /// Total noise variance (A²).
    pub fn total(&self) -> T {
        self.shot + self.thermal
    }
}

/// Optical power arriving at the photodiode after the doubled beam makes
/// its single pass through the air span: `η_dev·exp(−α·d)·P_2ν`.
pub fn received_power<T: Real>(
    second_harmonic_power: T,
    device_efficiency: T,
    distance: T,
) -> Result<T> {
    received_power_with_peak_ratio(second_harmonic_power, device_efficiency, distance, T::one())
}

/// As [`received_power`], derating the peak detected power by a
/// peak-to-average ratio ≥ 1 (the default ratio 1 keeps the upper-bound
/// reading in which the average equals the peak).
pub fn received_power_with_peak_ratio<T: Real>(
    second_harmonic_power: T,
    device_efficiency: T,
    distance: T,
    peak_to_average: T,
) -> Result<T> {
    check_nonnegative("second_harmonic_power", second_harmonic_power)?;
    if !(device_efficiency > T::zero() && device_efficiency <= T::one()) {
        return Err(Error::InvalidParameter {
            name: "device_efficiency",
            value: device_efficiency.as_f64(),
            constraint: "a fraction in (0, 1]",
        });
    }
    check_nonnegative("distance", distance)?;
    if !(peak_to_average >= T::one()) || !peak_to_average.is_finite() {
        return Err(Error::InvalidParameter {
            name: "peak_to_average",
            value: peak_to_average.as_f64(),
            constraint: "a finite ratio ≥ 1",
        });
    }
    let air = (-T::of(AIR_ATTENUATION) * distance).exp();
    Ok(device_efficiency * air * second_harmonic_power / peak_to_average)
}

/// Noise variances at a given received optical power.
pub fn noise_variances<T: Real>(det: &Detector<T>, received: T) -> Result<NoisePowers<T>> {
    check_nonnegative("received", received)?;
    let two = T::of(2.0);
    let four = T::of(4.0);
    let shot = two
        * T::of(constants::ELEMENTARY_CHARGE)
        * (det.responsivity * received + det.background_current)
        * det.bandwidth;
    let thermal =
        four * T::of(constants::BOLTZMANN) * det.temperature * det.bandwidth / det.load_resistance;
    Ok(NoisePowers { shot, thermal })
}

/// Full electrical link budget at a given received optical power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget<T> {
    /// Received optical power P_r (W).
    pub received_power: T,
    /// Signal photocurrent γ·P_r (A).
    pub signal_current: T,
    /// Noise variances (A²).
    pub noise: NoisePowers<T>,
    /// Electrical SNR `(γ·P_r)²/σ_total²`.
    pub snr: T,
    /// `log2(1 + SNR)` (bit/s/Hz).
    pub spectral_efficiency: T,
    /// `B·log2(1 + SNR)` (bit/s).
    pub capacity: T,
}

impl<T: Real> LinkBudget<T> {
    /// SNR in decibels; `−∞` at zero signal.
    pub fn snr_db(&self) -> T {
        T::of(10.0) * self.snr.log10()
    }
}

/// Evaluates the noise model, SNR, spectral efficiency, and capacity at a
/// received optical power.
pub fn evaluate_link<T: Real>(det: &Detector<T>, received: T) -> Result<LinkBudget<T>> {
    let noise = noise_variances(det, received)?;
    let signal_current = det.responsivity * received;
    let snr = signal_current * signal_current / noise.total();
    let spectral_efficiency = (T::one() + snr).log2();
    Ok(LinkBudget {
        received_power: received,
        signal_current,
        noise,
        snr,
        spectral_efficiency,
        capacity: det.bandwidth * spectral_efficiency,
    })
}
