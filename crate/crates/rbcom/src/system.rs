//! End-to-end evaluation: geometry → mode → diffraction → extraction →
//! doubling → detection, in one call.

use crate::link_budget::{self, Detector, LinkBudget};
use crate::power_chain::{
    fundamental_beam_power, GainMedium, LossBudget, PowerExtraction, PumpEfficiency, ShgConversion,
    ShgCrystal,
};
use crate::resonator::{EquivalentResonator, ModeStructure, ResonatorGeometry, Stability};
use crate::scalar::Real;
use crate::{diffraction, Error, Result};

/// A complete system description: cavity geometry, gain medium, pump
/// chain, loss budget, doubling crystal, and receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec<T> {
    geometry: ResonatorGeometry<T>,
    gain: GainMedium<T>,
    pump: PumpEfficiency<T>,
    losses: LossBudget<T>,
    crystal: ShgCrystal<T>,
    detector: Detector<T>,
    device_efficiency: T,
}

impl<T: Real> SystemSpec<T> {
    /// Assembles a system; the resonator and gain medium must agree on the
    /// wavelength, and the receiver device efficiency must lie in (0, 1].
    pub fn new(
        geometry: ResonatorGeometry<T>,
        gain: GainMedium<T>,
        pump: PumpEfficiency<T>,
        losses: LossBudget<T>,
        crystal: ShgCrystal<T>,
        detector: Detector<T>,
        device_efficiency: T,
    ) -> Result<Self> {
        let rel = ((geometry.wavelength() - gain.wavelength()) / gain.wavelength()).abs();
        if rel > T::of(1e-9) {
            return Err(Error::InvalidArgument(format!(
                "resonator wavelength {} differs from gain-medium wavelength {}",
                geometry.wavelength(),
                gain.wavelength()
            )));
        }
        if !(device_efficiency > T::zero() && device_efficiency <= T::one()) {
            return Err(Error::InvalidParameter {
                name: "device_efficiency",
                value: device_efficiency.as_f64(),
                constraint: "a fraction in (0, 1]",
            });
        }
        Ok(Self {
            geometry,
            gain,
            pump,
            losses,
            crystal,
            detector,
            device_efficiency,
        })
    }

    pub fn geometry(&self) -> &ResonatorGeometry<T> {
        &self.geometry
    }

    pub fn gain(&self) -> &GainMedium<T> {
        &self.gain
    }

    pub fn pump(&self) -> &PumpEfficiency<T> {
        &self.pump
    }

    pub fn losses(&self) -> &LossBudget<T> {
        &self.losses
    }

    pub fn crystal(&self) -> &ShgCrystal<T> {
        &self.crystal
    }

    pub fn detector(&self) -> &Detector<T> {
        &self.detector
    }

    pub fn device_efficiency(&self) -> T {
        self.device_efficiency
    }

    /// The same system over a different transmission distance.
    pub fn with_distance(&self, distance: T) -> Result<Self> {
        Ok(Self {
            geometry: self.geometry.with_distance(distance)?,
            ..*self
        })
    }

    /// Evaluates the whole chain at a pump power (W).
    ///
    /// An unconfined geometry is reported, not raised: mode-dependent
    /// fields are `None`, the extraction is dark, and there is no link.
    pub fn evaluate(&self, pump_power: T) -> Result<SystemReport<T>> {
        let stability = self.geometry.stability();
        let equivalent = self.geometry.equivalent();
        let extraction = fundamental_beam_power(
            &self.gain,
            &self.pump,
            &self.losses,
            &self.geometry,
            pump_power,
        )?;

        if stability != Stability::Stable {
            return Ok(SystemReport {
                pump_power,
                stability,
                equivalent,
                waist_m1: None,
                rayleigh_range_m1: None,
                mode: None,
                receiver_beam_radius: None,
                diffraction_survival: None,
                extraction,
                crystal_beam_area: None,
                shg: None,
                shg_plane_wave_valid: None,
                received_power: None,
                link: None,
            });
        }

        let waist = self.geometry.fundamental_waist_at_m1()?;
        let rayleigh = self.geometry.rayleigh_range_at_m1()?;
        let mode = self.geometry.mode_structure(self.gain.aperture_radius())?;
        let w00_rx = self
            .geometry
            .fundamental_radius(self.geometry.z_receiver_pupil())?;
        let receiver_beam_radius = mode.multimode_radius(w00_rx);
        let survival =
            diffraction::round_trip_survival(&self.geometry, self.gain.aperture_radius())?;

        let w00_crystal = self
            .geometry
            .fundamental_radius_at_waist_offset(self.crystal.length())?;
        let w_crystal = mode.multimode_radius(w00_crystal);
        let crystal_beam_area = T::PI() * w_crystal * w_crystal;
        let shg = self.crystal.second_harmonic_power(
            self.geometry.wavelength(),
            extraction.power,
            crystal_beam_area,
        )?;
        let plane_wave_valid = self.crystal.plane_wave_valid(rayleigh);

        let received = link_budget::received_power(
            shg.power,
            self.device_efficiency,
            self.geometry.distance(),
        )?;
        let link = link_budget::evaluate_link(&self.detector, received)?;

        Ok(SystemReport {
            pump_power,
            stability,
            equivalent,
            waist_m1: Some(waist),
            rayleigh_range_m1: Some(rayleigh),
            mode: Some(mode),
            receiver_beam_radius: Some(receiver_beam_radius),
            diffraction_survival: Some(survival),
            extraction,
            crystal_beam_area: Some(crystal_beam_area),
            shg: Some(shg),
            shg_plane_wave_valid: Some(plane_wave_valid),
            received_power: Some(received),
            link: Some(link),
        })
    }
}

/// Everything the chain produces at one operating point. Mode-dependent
/// fields are `None` when the geometry confines no mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemReport<T> {
    /// Pump power this report was evaluated at (W).
    pub pump_power: T,
    pub stability: Stability,
    pub equivalent: EquivalentResonator<T>,
    /// Fundamental waist at the rear mirror (m).
    pub waist_m1: Option<T>,
    /// Rayleigh range of that waist (m).
    pub rayleigh_range_m1: Option<T>,
    /// Aperture-limited transverse mode structure.
    pub mode: Option<ModeStructure<T>>,
    /// Multimode beam radius at the receiver pupil (m).
    pub receiver_beam_radius: Option<T>,
    /// Round-trip diffraction survival Γ_diff.
    pub diffraction_survival: Option<T>,
    /// Fundamental-beam extraction (dark when not resonating).
    pub extraction: PowerExtraction<T>,
    /// Multimode beam area at the crystal exit (m²).
    pub crystal_beam_area: Option<T>,
    /// Second-harmonic conversion result.
    pub shg: Option<ShgConversion<T>>,
    /// Whether the crystal is shorter than the beam's Rayleigh range.
    pub shg_plane_wave_valid: Option<bool>,
    /// Optical power at the photodiode (W).
    pub received_power: Option<T>,
    /// Electrical link budget.
    pub link: Option<LinkBudget<T>>,
}

impl<T: Real> SystemReport<T> {
    /// Capacity in bit/s; zero when there is no link.
    pub fn capacity(&self) -> T {
        self.link.map_or_else(T::zero, |l| l.capacity)
    }

    /// Spectral efficiency in bit/s/Hz; zero when there is no link.
    pub fn spectral_efficiency(&self) -> T {
        self.link.map_or_else(T::zero, |l| l.spectral_efficiency)
    }
}
