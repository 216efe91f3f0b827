//! Complex linear algebra over labeled tensor-product bases.
//!
//! Kets and operators carry their basis labels with them, so a mismatch such as
//! taking the inner product of a two-spin and a three-spin ket is an error rather
//! than a silent index bug. Spin-½ kets are always expressed in the `σ_z` basis
//! `{+z, -z}`; composite bases are ordered with site 1 most significant.

mod basis;
mod direction;
mod ket;
mod operator;

use std::fmt;
use std::sync::LazyLock;

use nalgebra::DMatrix;
use serde::Serialize;

pub use basis::{Basis, BasisLabel, Token};
pub use direction::Direction;
pub use ket::{compat_prob, inner, tensor, Ket};
pub use operator::{apply, apply_adjoint, eigen_residual, expectation, Operator};

pub type Complex = num_complex::Complex64;

/// Default tolerance for orthogonality and unitarity decisions.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Spin outcome along an axis: `+1` parallel, `-1` antiparallel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(if *self == Sign::Plus { 1 } else { -1 })
    }
}

static SPIN_BASIS: LazyLock<Basis> = LazyLock::new(|| Basis::single_site(&["+z", "-z"]).expect("static spin basis"));

/// The single-spin `σ_z` basis `{+z, -z}`.
pub fn spin_basis() -> Basis {
    SPIN_BASIS.clone()
}

/// `σ·n = [[cos θ, sin θ e^{-iφ}], [sin θ e^{+iφ}, -cos θ]]`.
pub fn sigma_dot_n(n: Direction) -> Operator {
    let (st, ct) = n.theta().sin_cos();
    let phase = Complex::from_polar(1.0, n.phi());
    let m = DMatrix::from_row_slice(2, 2, &[c(ct, 0.0), phase.conj() * st, phase * st, c(-ct, 0.0)]);
    Operator::new(spin_basis(), m).expect("2x2 over the spin basis")
}

/// `+1` eigenspinor of `σ·n` in half-angle form `[cos(θ/2), e^{iφ} sin(θ/2)]`.
///
/// Equal to `[sin θ/√(1−cos θ), e^{iφ}√(1−cos θ)]/√2` on the open interval and
/// finite at both poles.
pub fn eigenspinor_plus(n: Direction) -> Ket {
    let (sh, ch) = (n.theta() / 2.0).sin_cos();
    let amps = vec![c(ch, 0.0), Complex::from_polar(sh, n.phi())];
    Ket::new(spin_basis(), amps).expect("two amplitudes")
}

/// Eigenspinor of `σ·n` with the given eigenvalue; `-1` uses the antipode.
pub fn eigenspinor(n: Direction, sign: Sign) -> Ket {
    match sign {
        Sign::Plus => eigenspinor_plus(n),
        Sign::Minus => eigenspinor_plus(n.antipode()),
    }
}

/// `σ·n` acting on one site of an `n_sites` spin register.
pub fn sigma_on_site(n: Direction, site: usize, n_sites: usize) -> Operator {
    let factors: Vec<Operator> = (0..n_sites)
        .map(|s| {
            if s == site {
                sigma_dot_n(n)
            } else {
                Operator::identity(&spin_basis())
            }
        })
        .collect();
    Operator::tensor(&factors).expect("nonempty register")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_diff(op: &Operator, expected: [[Complex; 2]; 2]) -> f64 {
        let m = op.matrix();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((m[(i, j)] - expected[i][j]).norm());
            }
        }
        worst
    }

    #[test]
    fn sigma_along_coordinate_axes() {
        let z = sigma_dot_n(Direction::z());
        assert_eq!(max_diff(&z, [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]]), 0.0);
        let x = sigma_dot_n(Direction::x());
        assert!(max_diff(&x, [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]) < 1e-15);
        let y = sigma_dot_n(Direction::y());
        assert!(max_diff(&y, [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]]) < 1e-15);
        assert!(y.hermiticity_residual() < 1e-15);
        let square = y.compose(&y).unwrap();
        assert!(square.max_abs_diff(&Operator::identity(&spin_basis())).unwrap() < 1e-15);
        let trace = y.matrix()[(0, 0)] + y.matrix()[(1, 1)];
        assert!(trace.norm() < 1e-15);
    }

    #[test]
    fn eigenspinor_at_the_poles_and_equator() {
        let up = eigenspinor_plus(Direction::z());
        assert_eq!(up.amps(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let south = eigenspinor_plus(Direction::new(PI, 0.0).unwrap());
        assert!((south.amps()[0]).norm() < 1e-16);
        assert!((south.amps()[1] - c(1.0, 0.0)).norm() < 1e-16);
        let x = eigenspinor_plus(Direction::x());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((x.amps()[0] - c(h, 0.0)).norm() < 1e-15);
        assert!((x.amps()[1] - c(h, 0.0)).norm() < 1e-15);
        let (_, residual) = eigen_residual(&sigma_dot_n(Direction::x()), &x).unwrap();
        assert!(residual < 1e-12);
    }

    #[test]
    fn half_angle_form_matches_the_literal_formula_off_the_poles() {
        // [sin θ/√(1−cos θ), e^{iφ}√(1−cos θ)]/√2 evaluated directly
        for &(theta, phi) in &[(0.3, 0.2), (1.0, 2.5), (2.0, 4.0), (3.0, 6.0)] {
            let n = Direction::new(theta, phi).unwrap();
            let root = (1.0 - f64::cos(theta)).sqrt();
            let literal = [
                c(theta.sin() / root / 2f64.sqrt(), 0.0),
                Complex::from_polar(root / 2f64.sqrt(), phi),
            ];
            let k = eigenspinor_plus(n);
            for (a, b) in k.amps().iter().zip(literal.iter()) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn minus_eigenspinors() {
        let down = eigenspinor(Direction::z(), Sign::Minus);
        assert!((down.amps()[0]).norm() < 1e-16);
        assert!((down.amps()[1] - c(1.0, 0.0)).norm() < 1e-16);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let xm = eigenspinor(Direction::x(), Sign::Minus);
        let expected = Ket::new(spin_basis(), vec![c(h, 0.0), c(-h, 0.0)]).unwrap();
        assert!(xm.distance_up_to_phase(&expected).unwrap() < 1e-15);
        let n = Direction::new(1.1, 0.7).unwrap();
        let overlap = inner(&eigenspinor(n, Sign::Plus), &eigenspinor(n, Sign::Minus)).unwrap();
        assert!(overlap.norm() < 1e-12);
    }

    #[test]
    fn sigma_on_a_site_acts_only_there() {
        let op = sigma_on_site(Direction::x(), 1, 3);
        assert_eq!(op.dim(), 8);
        let label = BasisLabel::new(["+z", "+z", "-z"]);
        let flipped = BasisLabel::new(["+z", "-z", "-z"]);
        assert!((op.element(&flipped, &label).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }
}
