//! Round-trip diffraction survival of the fundamental mode at a hard
//! aperture.
//!
//! The aperture of radius `a` at the gain plane is the only
//! diffraction-relevant stop in the cavity: the retroreflector lenses image
//! the pupil onto itself, so their contribution vanishes. The cavity is
//! reduced to an equivalent empty two-mirror resonator whose mirrors stand
//! at the gain plane and at the receiver pupil, each carrying the local
//! phase-front curvature of the resonant mode:
//!
//! ```text
//! ρ1 = −1 / ℜ[1/q(z_gain)],    ρ2 = +1 / ℜ[1/q(z_receiver)]
//! ```
//!
//! (`q` the complex beam parameter; a plane phase front maps to an
//! infinite ROC, kept exact by a tagged value). The aperture is then
//! characterised by the equivalent Fresnel number and g-parameters
//!
//! ```text
//! N′ = a² / (2λd·(1 − d/ρ2)),          (sign carries through; |N′| is used)
//! g1′ = g2′ = 1 − 2d·(1/ρ1 + 1/ρ2 − d/(ρ1·ρ2)),
//! ```
//!
//! and the fraction of circulating power that survives one round trip is
//!
//! ```text
//! Γ = 1 − exp[ −2π·|N′| · √( g1′·(1 − g1′·g2′) / g2′ ) ],
//! ```
//!
//! clamped to `[0, 1]`. Large `|N′|` (wide aperture or short span) drives
//! `Γ → 1` (lossless); a vanishing aperture drives `Γ → 0`. A negative
//! argument under the square root means the equivalent resonator is not
//! confined and is reported as an error so callers can treat it as total
//! loss.

use crate::resonator::ResonatorGeometry;
use crate::scalar::Real;
use crate::{Error, Result};

/// Signed mirror radius of curvature with an exact plane-mirror value.
///
/// `1/ρ` is what enters every formula, so the plane mirror is stored as a
/// tag rather than as a large float: its inverse is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusOfCurvature<T> {
    /// Curved mirror with the given signed ROC (m, nonzero).
    Finite(T),
    /// Plane mirror: `1/ρ = 0` exactly.
    Infinite,
}

impl<T: Real> RadiusOfCurvature<T> {
    /// Builds from an inverse radius; exactly zero maps to the plane-mirror
    /// tag.
    pub fn from_inverse(inverse: T) -> Self {
        if inverse == T::zero() {
            RadiusOfCurvature::Infinite
        } else {
            RadiusOfCurvature::Finite(inverse.recip())
        }
    }

    /// `1/ρ`; exactly zero for the plane mirror.
    pub fn inverse(&self) -> T {
        match self {
            RadiusOfCurvature::Finite(r) => r.recip(),
            RadiusOfCurvature::Infinite => T::zero(),
        }
    }

    /// The signed radius when finite.
    pub fn finite(&self) -> Option<T> {
        match self {
            RadiusOfCurvature::Finite(r) => Some(*r),
            RadiusOfCurvature::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, RadiusOfCurvature::Infinite)
    }
}

/// Mirror ROCs of the equivalent empty resonator spanning the free-space
/// segment: `ρ1` at the gain plane, `ρ2` at the receiver pupil, from the
/// phase-front curvature of the resonant fundamental mode.
pub fn equivalent_mirror_rocs<T: Real>(
    geom: &ResonatorGeometry<T>,
) -> Result<(RadiusOfCurvature<T>, RadiusOfCurvature<T>)> {
    let q_gain = geom.propagate_q(geom.z_gain())?;
    let q_rx = geom.propagate_q(geom.z_receiver_pupil())?;
    let rho1 = RadiusOfCurvature::from_inverse(-q_gain.inv().re);
    let rho2 = RadiusOfCurvature::from_inverse(q_rx.inv().re);
    Ok((rho1, rho2))
}

/// The empty two-mirror resonator equivalent to the aperture-limited
/// free-space span, with its Fresnel number and g-parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentEmptyResonator<T> {
    /// Mirror ROC at the gain plane.
    pub rho1: RadiusOfCurvature<T>,
    /// Mirror ROC at the receiver pupil.
    pub rho2: RadiusOfCurvature<T>,
    /// Mirror spacing: the free-space span `d` (m).
    pub distance: T,
    /// Hard-aperture radius at the gain plane (m).
    pub aperture_radius: T,
    /// Equivalent Fresnel number `N′`; may be negative, and is `+∞` for
    /// the zero-span lossless marker.
    pub n_fresnel: T,
    /// Equivalent g-parameter of mirror 1.
    pub g1: T,
    /// Equivalent g-parameter of mirror 2 (equal to `g1` by construction).
    pub g2: T,
}

impl<T: Real> EquivalentEmptyResonator<T> {
    /// Builds the equivalent resonator of a stable cavity geometry with a
    /// hard aperture of radius `aperture_radius` at the gain plane.
    pub fn for_geometry(geom: &ResonatorGeometry<T>, aperture_radius: T) -> Result<Self> {
        let (rho1, rho2) = equivalent_mirror_rocs(geom)?;
        Self::from_mirror_rocs(
            rho1,
            rho2,
            geom.distance(),
            aperture_radius,
            geom.wavelength(),
        )
    }

    /// Builds the equivalent resonator from explicit mirror ROCs.
    ///
    /// `distance = 0` is guarded as the lossless marker (`N′ = +∞`,
    /// `g1 = g2 = 1`): with no span to cross, nothing is lost.
    pub fn from_mirror_rocs(
        rho1: RadiusOfCurvature<T>,
        rho2: RadiusOfCurvature<T>,
        distance: T,
        aperture_radius: T,
        wavelength: T,
    ) -> Result<Self> {
        for (name, roc) in [("rho1", &rho1), ("rho2", &rho2)] {
            if let RadiusOfCurvature::Finite(r) = roc {
                if *r == T::zero() || !r.is_finite() {
                    return Err(Error::InvalidParameter {
                        name,
                        value: r.as_f64(),
                        constraint: "a nonzero finite radius (use the plane-mirror tag for ∞)",
                    });
                }
            }
        }
        if !(distance >= T::zero()) || !distance.is_finite() {
            return Err(Error::InvalidParameter {
                name: "distance",
                value: distance.as_f64(),
                constraint: "a finite non-negative length",
            });
        }
        if !(aperture_radius > T::zero()) || !aperture_radius.is_finite() {
            return Err(Error::InvalidParameter {
                name: "aperture_radius",
                value: aperture_radius.as_f64(),
                constraint: "a finite positive length",
            });
        }
        if !(wavelength > T::zero()) || !wavelength.is_finite() {
            return Err(Error::InvalidParameter {
                name: "wavelength",
                value: wavelength.as_f64(),
                constraint: "a finite positive length",
            });
        }
        if distance == T::zero() {
            return Ok(Self {
                rho1,
                rho2,
                distance,
                aperture_radius,
                n_fresnel: T::infinity(),
                g1: T::one(),
                g2: T::one(),
            });
        }
        let inv1 = rho1.inverse();
        let inv2 = rho2.inverse();
        let denom = T::one() - distance * inv2;
        if denom == T::zero() {
            return Err(Error::SingularConfiguration(format!(
                "Fresnel number diverges: mirror spacing {} equals rho2",
                distance
            )));
        }
        let two = T::of(2.0);
        let n_fresnel = aperture_radius * aperture_radius / (two * wavelength * distance * denom);
        let g = T::one() - two * distance * (inv1 + inv2 - distance * inv1 * inv2);
        Ok(Self {
            rho1,
            rho2,
            distance,
            aperture_radius,
            n_fresnel,
            g1: g,
            g2: g,
        })
    }

    /// Fraction of circulating fundamental-mode power that survives one
    /// round trip past the aperture, in `[0, 1]`.
    pub fn survival(&self) -> Result<T> {
        if !self.n_fresnel.is_finite() {
            return Ok(T::one()); // zero-span lossless marker
        }
        let gg = self.g1 * self.g2;
        let arg = if self.g1 == self.g2 {
            // g·(1−g²)/g, continuous through g = 0
            T::one() - gg
        } else {
            self.g1 * (T::one() - gg) / self.g2
        };
        if arg < T::zero() {
            return Err(Error::UnstableEquivalent { arg: arg.as_f64() });
        }
        let exponent = -T::of(2.0) * T::PI() * self.n_fresnel.abs() * arg.sqrt();
        let gamma = T::one() - exponent.exp();
        Ok(gamma.max(T::zero()).min(T::one()))
    }
}

/// Round-trip power survival fraction of the fundamental mode for a stable
/// geometry with a hard aperture of radius `aperture_radius` at the gain
/// plane.
pub fn round_trip_survival<T: Real>(geom: &ResonatorGeometry<T>, aperture_radius: T) -> Result<T> {
    EquivalentEmptyResonator::for_geometry(geom, aperture_radius)?.survival()
}
