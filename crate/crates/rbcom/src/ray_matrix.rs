//! 2×2 ray-transfer (ABCD) matrices for paraxial optics.
//!
//! A paraxial ray is the column vector (height, slope). An optical element
//! maps it with the matrix `[[a, b], [c, d]]`; a cascade of elements listed
//! in traversal order multiplies their matrices in *reverse* order (the last
//! element acts last, so its matrix sits leftmost). Every element modelled
//! here is lossless, so all matrices are unimodular (determinant 1).
//!
//! The module also models the telecentric cat's-eye retroreflector used at
//! both ends of the resonator: lens of focal length `f`, a flat mirror a
//! distance `l` behind it, traversed lens → mirror → lens. Its one-pass
//! matrix collapses to `[[-1, 0], [1/f_RR, -1]]`, an ideal retroreflector
//! (`-I`) combined with an effective focusing power
//! `1/f_RR = 2l/f² - 2/f`, so `l = f` gives the perfect retroreflector and
//! `l > f` adds the weak positive power that stabilises the long cavity.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex;

use crate::scalar::Real;
use crate::{Error, Result};

/// Unimodularity tolerance: |det − 1| must stay below this for products of
/// physically meaningful element matrices.
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// 2×2 ray-transfer matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayMatrix<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> RayMatrix<T> {
    /// Identity element (zero-length propagation, flat mirror at normal
    /// incidence).
    pub fn identity() -> Self {
        Self {
            a: T::one(),
            b: T::zero(),
            c: T::zero(),
            d: T::one(),
        }
    }

    /// Free-space propagation over `length`: `[[1, L], [0, 1]]`.
    pub fn free_space(length: T) -> Self {
        Self {
            a: T::one(),
            b: length,
            c: T::zero(),
            d: T::one(),
        }
    }

    /// Thin lens of focal length `f`: `[[1, 0], [-1/f, 1]]`.
    ///
    /// Errors if `f` is zero or not finite.
    pub fn thin_lens(f: T) -> Result<Self> {
        if f.is_zero() || !f.is_finite() {
            return Err(Error::InvalidParameter {
                name: "f",
                value: f.as_f64(),
                constraint: "a finite nonzero focal length",
            });
        }
        Ok(Self {
            a: T::one(),
            b: T::zero(),
            c: -f.recip(),
            d: T::one(),
        })
    }

    /// Flat mirror at normal incidence (identity in this sign convention).
    pub fn flat_mirror() -> Self {
        Self::identity()
    }

    /// Determinant `a·d − b·c`.
    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    /// `true` if |det − 1| ≤ [`UNIMODULAR_TOL`].
    pub fn is_unimodular(&self) -> bool {
        (self.det() - T::one()).abs() <= T::of(UNIMODULAR_TOL)
    }

    /// System matrix of `elements` listed in traversal order (first element
    /// first). The result is `Mₙ · … · M₂ · M₁`.
    ///
    /// Errors on an empty list and on any element whose determinant strays
    /// from 1 by more than [`UNIMODULAR_TOL`].
    pub fn compose(elements: &[Self]) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot compose an empty element list".into(),
            ));
        }
        for m in elements {
            if !m.is_unimodular() {
                return Err(Error::InvalidArgument(format!(
                    "element matrix is not unimodular: det = {}",
                    m.det()
                )));
            }
        }
        Ok(elements
            .iter()
            .copied()
            .reduce(|acc, next| next * acc)
            .expect("list is non-empty"))
    }

    /// Transforms a complex beam parameter with the ABCD law
    /// `q' = (a·q + b) / (c·q + d)`.
    pub fn transform_q(&self, q: Complex<T>) -> Complex<T> {
        (q * self.a + self.b) / (q * self.c + self.d)
    }
}

impl<T: Real> Mul for RayMatrix<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

impl<T: fmt::Display> fmt::Display for RayMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

// ----- cat's-eye retroreflector ---------------------------------------------

/// Telecentric cat's-eye retroreflector: a thin lens of focal length
/// `focal_length` with a flat mirror `lens_spacing` behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatsEye<T> {
    /// Lens focal length `f` (m), strictly positive.
    pub focal_length: T,
    /// Lens-to-mirror spacing `l` (m), non-negative.
    pub lens_spacing: T,
}

impl<T: Real> CatsEye<T> {
    /// Builds a cat's eye from its physical dimensions.
    pub fn new(focal_length: T, lens_spacing: T) -> Result<Self> {
        if !(focal_length > T::zero()) || !focal_length.is_finite() {
            return Err(Error::InvalidParameter {
                name: "focal_length",
                value: focal_length.as_f64(),
                constraint: "a finite positive length",
            });
        }
        if !(lens_spacing >= T::zero()) || !lens_spacing.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lens_spacing",
                value: lens_spacing.as_f64(),
                constraint: "a finite non-negative length",
            });
        }
        Ok(Self {
            focal_length,
            lens_spacing,
        })
    }

    /// Builds the cat's eye whose effective retroreflector focal length is
    /// `retro_focal_length`, inverting `1/f_RR = 2l/f² − 2/f` to
    /// `l = f + f²/(2·f_RR)`.
    pub fn from_retro_focal_length(focal_length: T, retro_focal_length: T) -> Result<Self> {
        if retro_focal_length.is_zero() || !retro_focal_length.is_finite() {
            return Err(Error::InvalidParameter {
                name: "retro_focal_length",
                value: retro_focal_length.as_f64(),
                constraint: "a finite nonzero length",
            });
        }
        let two = T::of(2.0);
        let l = focal_length + focal_length * focal_length / (two * retro_focal_length);
        Self::new(focal_length, l)
    }

    /// Effective focusing power `1/f_RR = 2l/f² − 2/f` of the one-pass
    /// matrix. Zero means an ideal retroreflector (`l = f`).
    pub fn inverse_retro_focal_length(&self) -> T {
        let f = self.focal_length;
        let two = T::of(2.0);
        two * self.lens_spacing / (f * f) - two / f
    }

    /// Effective retroreflector focal length `f_RR`, or `None` for the ideal
    /// retroreflector (`l = f`, infinite `f_RR`).
    pub fn retro_focal_length(&self) -> Option<T> {
        let inv = self.inverse_retro_focal_length();
        if inv.is_zero() {
            None
        } else {
            Some(inv.recip())
        }
    }

    /// One-pass matrix of the cat's eye, pupil plane to pupil plane: free
    /// space `f`, lens, free space `l`, mirror, free space `l`, lens, free
    /// space `f`. Equals `[[-1, 0], [1/f_RR, -1]]`.
    pub fn matrix(&self) -> RayMatrix<T> {
        let f = self.focal_length;
        let l = self.lens_spacing;
        let lens = RayMatrix::thin_lens(f).expect("validated focal length");
        RayMatrix::compose(&[
            RayMatrix::free_space(f),
            lens,
            RayMatrix::free_space(l),
            RayMatrix::flat_mirror(),
            RayMatrix::free_space(l),
            lens,
            RayMatrix::free_space(f),
        ])
        .expect("fixed non-empty element list")
    }
}
