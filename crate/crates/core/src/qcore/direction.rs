use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// A unit vector on the sphere stored in polar form.
///
/// `theta` lies in `[0, π]` and `phi` in `[0, 2π)`. At the poles the azimuth
/// carries no information and is canonicalized to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidDirection(format!("non-finite angles ({theta}, {phi})")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidDirection(format!("theta {theta} outside [0, π]")));
        }
        Ok(Self::canonical(theta, phi))
    }

    /// Builds a direction from a Cartesian vector of any nonzero length.
    pub fn from_cartesian(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidDirection("non-finite components".into()));
        }
        let rho = x.hypot(y);
        if rho == 0.0 && z == 0.0 {
            return Err(Error::InvalidDirection("zero vector".into()));
        }
        let theta = rho.atan2(z);
        let phi = if rho == 0.0 { 0.0 } else { y.atan2(x) };
        Ok(Self::canonical(theta, phi))
    }

    fn canonical(theta: f64, phi: f64) -> Self {
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        if theta == 0.0 || theta == PI {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    pub fn z() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn x() -> Self {
        Self {
            theta: PI / 2.0,
            phi: 0.0,
        }
    }

    pub fn y() -> Self {
        Self {
            theta: PI / 2.0,
            phi: PI / 2.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn cartesian(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        let a = self.cartesian();
        let b = other.cartesian();
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    /// The opposite direction `-n`.
    pub fn antipode(&self) -> Self {
        Self::canonical(PI - self.theta, self.phi + PI)
    }

    /// Area-uniform sample on the sphere (uniform in `cos θ` and `φ`).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
        let phi: f64 = rng.gen_range(0.0..TAU);
        Self::canonical(cos_theta.clamp(-1.0, 1.0).acos(), phi)
    }
}
