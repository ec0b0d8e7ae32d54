//! Gain, loss, and power flow: saturation intensity, pumping efficiency,
//! round-trip loss budget, threshold, steady-state power extraction, and
//! second-harmonic conversion.
//!
//! The circulating field saturates the gain sheet. With the cavity losses
//! lumped into two equivalent mirror reflectances `R1` (gain side:
//! retroreflector 1, gain transmission, aperture diffraction) and `R2`
//! (receiver side: splitter pass-through `1 − R4`, round-trip air loss,
//! retroreflector 2), the steady-state intensity of the right-travelling
//! beam at the receiver-side mirror has the closed form
//!
//! ```text
//! I₊ = I_s · (g0·l_g − ln(1/(r1·r2))) / ((1 + r2/r1)·(1 − r1·r2)),
//! ```
//!
//! with `r_i = √R_i`, which is exact for the two-beam saturated-gain model.
//! Referencing the pump power through `g0 = η_c·P_in/(I_s·V)` turns this
//! into an affine extraction law `P_ν = η_ν·(P_in − P_th)` above the
//! threshold pump power `P_th` and zero below it.
//!
//! The extracted fundamental beam is frequency-doubled in a nonlinear
//! crystal under the plane-wave small-conversion approximation
//! `P_2ν = K·l_s²·P_ν²/A_ν`, valid while the crystal is shorter than the
//! beam's Rayleigh range; the conversion is clamped at `P_2ν ≤ P_ν` and
//! flagged when the approximation is pushed past unity.

use crate::constants;
use crate::diffraction::round_trip_survival;
use crate::resonator::{ResonatorGeometry, Stability};
use crate::scalar::Real;
use crate::{Error, Result};

/// Clear-air extinction coefficient (1/m) applied to the free-space span.
pub const AIR_ATTENUATION: f64 = 1e-4;

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

fn check_unit_interval<T: Real>(name: &'static str, value: T) -> Result<T> {
    if value > T::zero() && value <= T::one() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value: value.as_f64(),
            constraint: "a survival fraction in (0, 1]",
        })
    }
}

/// The laser gain medium: a thin disc of radius `a_g` and thickness `l_g`
/// behind the shared transmitter pupil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMedium<T> {
    cross_section: T,
    upper_state_lifetime: T,
    wavelength: T,
    aperture_radius: T,
    length: T,
    volume: T,
}

impl<T: Real> GainMedium<T> {
    /// Builds a gain medium; the pumped volume defaults to the disc volume
    /// `π·a_g²·l_g`.
    pub fn new(
        cross_section: T,
        upper_state_lifetime: T,
        wavelength: T,
        aperture_radius: T,
        length: T,
    ) -> Result<Self> {
        check_positive("cross_section", cross_section)?;
        check_positive("upper_state_lifetime", upper_state_lifetime)?;
        check_positive("wavelength", wavelength)?;
        check_positive("aperture_radius", aperture_radius)?;
        check_positive("length", length)?;
        let volume = T::PI() * aperture_radius * aperture_radius * length;
        Ok(Self {
            cross_section,
            upper_state_lifetime,
            wavelength,
            aperture_radius,
            length,
            volume,
        })
    }

    /// Overrides the pumped volume (m³) when it differs from the disc
    /// volume.
    pub fn with_volume(mut self, volume: T) -> Result<Self> {
        check_positive("volume", volume)?;
        self.volume = volume;
        Ok(self)
    }

    /// Stimulated-emission cross-section σ_s (m²).
    pub fn cross_section(&self) -> T {
        self.cross_section
    }

    /// Fluorescence (upper-state) lifetime τ_f (s).
    pub fn upper_state_lifetime(&self) -> T {
        self.upper_state_lifetime
    }

    /// Emission wavelength λ (m).
    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    /// Aperture radius a_g (m).
    pub fn aperture_radius(&self) -> T {
        self.aperture_radius
    }

    /// Thickness l_g (m).
    pub fn length(&self) -> T {
        self.length
    }

    /// Pumped volume V (m³).
    pub fn volume(&self) -> T {
        self.volume
    }

    /// Beam cross-section at the gain medium, `A_g = π·a_g²` (m²).
    pub fn area(&self) -> T {
        T::PI() * self.aperture_radius * self.aperture_radius
    }

    /// Saturation intensity `I_s = h·(c/λ)/(σ_s·τ_f)` (W/m²): the intensity
    /// at which stimulated emission halves the inversion.
    pub fn saturation_intensity(&self) -> T {
        let photon_energy =
            T::of(constants::PLANCK) * T::of(constants::SPEED_OF_LIGHT) / self.wavelength;
        photon_energy / (self.cross_section * self.upper_state_lifetime)
    }
}

/// Multiplicative pump-to-inversion efficiency chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpEfficiency<T> {
    excitation: T,
    transfer: T,
    absorption: T,
    quantum: T,
    stokes: T,
    overlap: T,
}

impl<T: Real> PumpEfficiency<T> {
    /// Builds the chain; each factor must lie in (0, 1].
    pub fn new(
        excitation: T,
        transfer: T,
        absorption: T,
        quantum: T,
        stokes: T,
        overlap: T,
    ) -> Result<Self> {
        check_unit_interval("excitation", excitation)?;
        check_unit_interval("transfer", transfer)?;
        check_unit_interval("absorption", absorption)?;
        check_unit_interval("quantum", quantum)?;
        check_unit_interval("stokes", stokes)?;
        check_unit_interval("overlap", overlap)?;
        Ok(Self {
            excitation,
            transfer,
            absorption,
            quantum,
            stokes,
            overlap,
        })
    }

    pub fn excitation(&self) -> T {
        self.excitation
    }

    pub fn transfer(&self) -> T {
        self.transfer
    }

    pub fn absorption(&self) -> T {
        self.absorption
    }

    pub fn quantum(&self) -> T {
        self.quantum
    }

    pub fn stokes(&self) -> T {
        self.stokes
    }

    pub fn overlap(&self) -> T {
        self.overlap
    }

    /// Combined pumping efficiency η_c: the product of all six factors.
    pub fn combined(&self) -> T {
        self.excitation
            * self.transfer
            * self.absorption
            * self.quantum
            * self.stokes
            * self.overlap
    }
}

/// Small-signal gain coefficient `g0 = η_c·P_in/(I_s·V)` (1/m).
pub fn small_signal_gain<T: Real>(
    gain: &GainMedium<T>,
    eff: &PumpEfficiency<T>,
    pump_power: T,
) -> Result<T> {
    if !(pump_power >= T::zero()) || !pump_power.is_finite() {
        return Err(Error::InvalidParameter {
            name: "pump_power",
            value: pump_power.as_f64(),
            constraint: "a finite non-negative power",
        });
    }
    Ok(eff.combined() * pump_power / (gain.saturation_intensity() * gain.volume()))
}

/// Per-round-trip survival factors of everything except the gain itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBudget<T> {
    retro1_survival: T,
    retro2_survival: T,
    gain_survival: T,
    output_reflectivity: T,
}

impl<T: Real> LossBudget<T> {
    /// Builds a loss budget. The survival factors lie in (0, 1]; the
    /// output-splitter reflectivity `R4` (the fraction sent to the
    /// receiver's doubling path) lies in [0, 1).
    pub fn new(
        retro1_survival: T,
        retro2_survival: T,
        gain_survival: T,
        output_reflectivity: T,
    ) -> Result<Self> {
        check_unit_interval("retro1_survival", retro1_survival)?;
        check_unit_interval("retro2_survival", retro2_survival)?;
        check_unit_interval("gain_survival", gain_survival)?;
        if !(output_reflectivity >= T::zero() && output_reflectivity < T::one()) {
            return Err(Error::InvalidParameter {
                name: "output_reflectivity",
                value: output_reflectivity.as_f64(),
                constraint: "a fraction in [0, 1)",
            });
        }
        Ok(Self {
            retro1_survival,
            retro2_survival,
            gain_survival,
            output_reflectivity,
        })
    }

    /// Survival factor of retroreflector 1 (gain side).
    pub fn retro1_survival(&self) -> T {
        self.retro1_survival
    }

    /// Survival factor of retroreflector 2 (receiver side).
    pub fn retro2_survival(&self) -> T {
        self.retro2_survival
    }

    /// Transmission survival of the gain element itself.
    pub fn gain_survival(&self) -> T {
        self.gain_survival
    }

    /// Output-splitter reflectivity `R4`.
    pub fn output_reflectivity(&self) -> T {
        self.output_reflectivity
    }

    /// Fraction passing the output splitter and staying in the cavity,
    /// `1 − R4`.
    pub fn splitter_survival(&self) -> T {
        T::one() - self.output_reflectivity
    }

    /// Round-trip air survival over span `d`: `exp(−2·α·d)`.
    pub fn air_round_trip_survival(&self, distance: T) -> T {
        (-T::of(2.0 * AIR_ATTENUATION) * distance).exp()
    }

    /// Single-pass air survival over span `d`: `exp(−α·d)`.
    pub fn air_single_pass_survival(&self, distance: T) -> T {
        (-T::of(AIR_ATTENUATION) * distance).exp()
    }

    /// Lumps all losses into the two equivalent mirror reflectances:
    /// `R1 = Γ_RR1·Γ_g·Γ_diff` on the gain side and
    /// `R2 = (1 − R4)·Γ_air·Γ_RR2` on the receiver side.
    pub fn equivalent_reflectances(
        &self,
        diffraction_survival: T,
        distance: T,
    ) -> Result<EquivalentReflectances<T>> {
        check_unit_interval("diffraction_survival", diffraction_survival)?;
        if !(distance >= T::zero()) || !distance.is_finite() {
            return Err(Error::InvalidParameter {
                name: "distance",
                value: distance.as_f64(),
                constraint: "a finite non-negative length",
            });
        }
        Ok(EquivalentReflectances {
            reflectance1: self.retro1_survival * self.gain_survival * diffraction_survival,
            reflectance2: self.splitter_survival()
                * self.air_round_trip_survival(distance)
                * self.retro2_survival,
        })
    }

    /// Total round-trip loss coefficient
    /// `δ = −ln(Γ_RR1·Γ_diff·Γ_g·(1 − R4)·Γ_air·Γ_RR2) ≥ 0`.
    pub fn round_trip_log_loss(&self, diffraction_survival: T, distance: T) -> Result<T> {
        let eq = self.equivalent_reflectances(diffraction_survival, distance)?;
        Ok(-(eq.reflectance1 * eq.reflectance2).ln())
    }
}

/// The two equivalent mirror power reflectances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentReflectances<T> {
    /// Gain-side power reflectance `R1`.
    pub reflectance1: T,
    /// Receiver-side power reflectance `R2`.
    pub reflectance2: T,
}

impl<T: Real> EquivalentReflectances<T> {
    /// Amplitude coefficient `r1 = √R1`.
    pub fn amplitude1(&self) -> T {
        self.reflectance1.sqrt()
    }

    /// Amplitude coefficient `r2 = √R2`.
    pub fn amplitude2(&self) -> T {
        self.reflectance2.sqrt()
    }
}

/// Steady-state intensity of the right-travelling beam at the
/// receiver-side equivalent mirror (W/m²), from the closed-form solution
/// of the two-beam saturated-gain model; negative below threshold.
pub fn right_traveling_intensity<T: Real>(
    saturation_intensity: T,
    gain_length_product: T,
    r1_amplitude: T,
    r2_amplitude: T,
) -> T {
    let r1r2 = r1_amplitude * r2_amplitude;
    let numer = gain_length_product - (T::one() / r1r2).ln();
    let denom = (T::one() + r2_amplitude / r1_amplitude) * (T::one() - r1r2);
    saturation_intensity * numer / denom
}

/// Power extracted into the fundamental beam at the receiver splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerExtraction<T> {
    /// Stability class of the underlying geometry.
    pub stability: Stability,
    /// `true` when the cavity is stable and pumped above threshold.
    pub resonating: bool,
    /// Extracted fundamental-beam power P_ν (W); zero when not resonating.
    pub power: T,
    /// Threshold pump power P_th (W); `+∞` when no mode is confined.
    pub threshold: T,
    /// Slope efficiency η_ν = dP_ν/dP_in above threshold.
    pub slope_efficiency: T,
}

impl<T: Real> PowerExtraction<T> {
    fn dark(stability: Stability) -> Self {
        Self {
            stability,
            resonating: false,
            power: T::zero(),
            threshold: T::infinity(),
            slope_efficiency: T::zero(),
        }
    }
}

/// Evaluates the extraction law `P_ν = η_ν·(P_in − P_th)` for the given
/// geometry and pump power.
///
/// The aperture diffraction survival is computed from the geometry and the
/// gain aperture. An unconfined geometry is not an error: it yields zero
/// power with the stability class flagged.
pub fn fundamental_beam_power<T: Real>(
    gain: &GainMedium<T>,
    eff: &PumpEfficiency<T>,
    losses: &LossBudget<T>,
    geom: &ResonatorGeometry<T>,
    pump_power: T,
) -> Result<PowerExtraction<T>> {
    if !(pump_power >= T::zero()) || !pump_power.is_finite() {
        return Err(Error::InvalidParameter {
            name: "pump_power",
            value: pump_power.as_f64(),
            constraint: "a finite non-negative power",
        });
    }
    let rel_mismatch = ((geom.wavelength() - gain.wavelength()) / gain.wavelength()).abs();
    if rel_mismatch > T::of(1e-9) {
        return Err(Error::InvalidArgument(format!(
            "resonator wavelength {} differs from gain-medium wavelength {}",
            geom.wavelength(),
            gain.wavelength()
        )));
    }
    let stability = geom.stability();
    if stability != Stability::Stable {
        return Ok(PowerExtraction::dark(stability));
    }

    let diffraction_survival = round_trip_survival(geom, gain.aperture_radius())?;
    let eq = losses.equivalent_reflectances(diffraction_survival, geom.distance())?;
    let r1 = eq.amplitude1();
    let r2 = eq.amplitude2();
    let r1r2 = r1 * r2;
    let log_loss = (T::one() / r1r2).ln();

    let i_s = gain.saturation_intensity();
    let eta_c = eff.combined();
    let threshold = log_loss * i_s * gain.volume() / (gain.length() * eta_c);

    let one = T::one();
    let slope_efficiency = if one - r1r2 == T::zero() {
        // Lossless degenerate budget: nothing is coupled out.
        T::zero()
    } else {
        gain.length() * eta_c * gain.area() * eq.reflectance2 * losses.output_reflectivity()
            / (gain.volume() * losses.splitter_survival() * (one + r2 / r1) * (one - r1r2))
    };

    let resonating = pump_power > threshold;
    let power = if resonating {
        slope_efficiency * (pump_power - threshold)
    } else {
        T::zero()
    };
    Ok(PowerExtraction {
        stability,
        resonating,
        power,
        threshold,
        slope_efficiency,
    })
}

/// The frequency-doubling crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShgCrystal<T> {
    effective_nonlinearity: T,
    refractive_index: T,
    length: T,
}

impl<T: Real> ShgCrystal<T> {
    /// Builds a crystal from its effective nonlinear coefficient `d_eff`
    /// (m/V), refractive index (≥ 1), and length (m).
    pub fn new(effective_nonlinearity: T, refractive_index: T, length: T) -> Result<Self> {
        check_positive("effective_nonlinearity", effective_nonlinearity)?;
        if !(refractive_index >= T::one()) || !refractive_index.is_finite() {
            return Err(Error::InvalidParameter {
                name: "refractive_index",
                value: refractive_index.as_f64(),
                constraint: "a finite index ≥ 1",
            });
        }
        check_positive("length", length)?;
        Ok(Self {
            effective_nonlinearity,
            refractive_index,
            length,
        })
    }

    /// Effective nonlinear coefficient `d_eff` (m/V).
    pub fn effective_nonlinearity(&self) -> T {
        self.effective_nonlinearity
    }

    /// Refractive index at the fundamental.
    pub fn refractive_index(&self) -> T {
        self.refractive_index
    }

    /// Crystal length `l_s` (m).
    pub fn length(&self) -> T {
        self.length
    }

    /// Conversion coefficient `K = 8π²·d_eff²/(ε0·c·λ²·n0³)` (1/W).
    pub fn conversion_coefficient(&self, wavelength: T) -> T {
        let pi = T::PI();
        let d_eff = self.effective_nonlinearity;
        let n = self.refractive_index;
        T::of(8.0) * pi * pi * d_eff * d_eff
            / (T::of(constants::VACUUM_PERMITTIVITY)
                * T::of(constants::SPEED_OF_LIGHT)
                * wavelength
                * wavelength
                * n
                * n
                * n)
    }

    /// `true` while the plane-wave conversion formula is trustworthy: the
    /// crystal must be shorter than the beam's Rayleigh range.
    pub fn plane_wave_valid(&self, rayleigh_range: T) -> bool {
        self.length < rayleigh_range
    }

    /// Second-harmonic power `P_2ν = K·l_s²·P_ν²/A_ν` under the plane-wave
    /// small-conversion approximation, clamped at `P_2ν ≤ P_ν`.
    pub fn second_harmonic_power(
        &self,
        wavelength: T,
        fundamental_power: T,
        beam_area: T,
    ) -> Result<ShgConversion<T>> {
        if !(fundamental_power >= T::zero()) || !fundamental_power.is_finite() {
            return Err(Error::InvalidParameter {
                name: "fundamental_power",
                value: fundamental_power.as_f64(),
                constraint: "a finite non-negative power",
            });
        }
        check_positive("beam_area", beam_area)?;
        let raw = self.conversion_coefficient(wavelength)
            * self.length
            * self.length
            * fundamental_power
            * fundamental_power
            / beam_area;
        let clamped = raw > fundamental_power;
        Ok(ShgConversion {
            power: if clamped { fundamental_power } else { raw },
            clamped,
        })
    }
}

/// Result of a second-harmonic conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShgConversion<T> {
    /// Converted power P_2ν (W).
    pub power: T,
    /// `true` if the plane-wave formula exceeded the input power and was
    /// clamped to it.
    pub clamped: bool,
}

impl<T: Real> ShgConversion<T> {
    /// Conversion efficiency `P_2ν/P_ν`; zero for zero input.
    pub fn efficiency(&self, fundamental_power: T) -> T {
        if fundamental_power > T::zero() {
            self.power / fundamental_power
        } else {
            T::zero()
        }
    }
}
