//! Upper half-plane model of the curvature −1 hyperbolic plane.
//!
//! Distances here are the usual hyperbolic ones. The Teichmuller metric of
//! the genus-one model is half of this, see [`crate::torus_teich`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HyperbolicError {
    #[error("not in upper half-plane: {0}")]
    NotInUpperHalfPlane(Complex64),
}

pub fn check(z: Complex64) -> Result<Complex64, HyperbolicError> {
    if z.re.is_finite() && z.im.is_finite() && z.im > 0.0 {
        Ok(z)
    } else {
        Err(HyperbolicError::NotInUpperHalfPlane(z))
    }
}

/// Hyperbolic distance, `arccosh(1 + |z1−z2|²/(2 y1 y2))` in a cancellation-free form.
pub fn distance(z1: Complex64, z2: Complex64) -> Result<f64, HyperbolicError> {
    check(z1)?;
    check(z2)?;
    Ok(distance_unchecked(z1, z2))
}

pub fn distance_unchecked(z1: Complex64, z2: Complex64) -> f64 {
    2.0 * ((z1 - z2).norm() / (2.0 * (z1.im * z2.im).sqrt())).asinh()
}

/// Real Möbius transformation `z ↦ (az+b)/(cz+d)` with `ad − bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub const IDENTITY: Mobius = Mobius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    /// Action on the boundary `ℝ ∪ {∞}`.
    pub fn apply_boundary(&self, x: Boundary) -> Boundary {
        match x {
            Boundary::Infinity => {
                if self.c == 0.0 {
                    Boundary::Infinity
                } else {
                    Boundary::Finite(self.a / self.c)
                }
            }
            Boundary::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    Boundary::Infinity
                } else {
                    Boundary::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// Rotation about `i` turning tangent directions by `2θ`.
    pub fn rotation(theta: f64) -> Mobius {
        let (s, c) = theta.sin_cos();
        Mobius { a: c, b: s, c: -s, d: c }
    }

    /// The affine map sending `z` to `i`.
    pub fn to_i(z: Complex64) -> Mobius {
        let r = z.im.sqrt();
        Mobius { a: 1.0 / r, b: -z.re / r, c: 0.0, d: r }
    }
}

/// A point of `ℝ ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Finite(f64),
    Infinity,
}

/// Where a geodesic from a base point is heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Toward {
    Point(Complex64),
    Boundary(Boundary),
}

/// Isometry sending `base` to `i` and the direction `toward` straight up.
pub fn normalizer(base: Complex64, toward: Toward) -> Mobius {
    let a = Mobius::to_i(base);
    let u = match toward {
        Toward::Point(p) => {
            let w = a.apply(p);
            (w - Complex64::i()) / (w + Complex64::i())
        }
        Toward::Boundary(b) => match a.apply_boundary(b) {
            Boundary::Infinity => Complex64::new(1.0, 0.0),
            Boundary::Finite(x) => {
                let w = Complex64::new(x, 0.0);
                (w - Complex64::i()) / (w + Complex64::i())
            }
        },
    };
    let alpha = if u.norm() == 0.0 { 0.0 } else { u.arg() };
    Mobius::rotation(-alpha / 2.0).compose(&a)
}

/// Point at hyperbolic distance `s` from `base` in the direction `toward`.
pub fn point_along(base: Complex64, toward: Toward, s: f64) -> Complex64 {
    let m = normalizer(base, toward);
    m.inverse().apply(Complex64::new(0.0, s.exp()))
}
