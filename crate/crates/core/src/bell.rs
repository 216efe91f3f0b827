//! Singlet correlations recovered from concurrent joint eigenvectors.
//!
//! For measurement axes `a`, `b` the four joint eigenvectors `|A, B⟩` of
//! `σ₁·a` and `σ₂·b` each carry weight `ρ = |⟨A,B|Ψ⟩|²`. Summing `ρ·A·B` over
//! them gives the correlation `P(a, b)`, which must agree with the direct
//! expectation `⟨Ψ|(σ₁·a)(σ₂·b)|Ψ⟩ = −a·b`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{
    c, compat_prob, eigenspinor, expectation, sigma_dot_n, spin_basis, tensor, BasisLabel, Direction, Ket, Operator,
    Sign,
};

/// Imaginary residue tolerated in a Hermitian expectation value.
pub const IMAGINARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisPair {
    pub a: Direction,
    pub b: Direction,
}

impl AxisPair {
    pub fn new(a: Direction, b: Direction) -> Self {
        Self { a, b }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            a: Direction::random(rng),
            b: Direction::random(rng),
        }
    }

    /// `−a·b`, the quantum-mechanical singlet correlation.
    pub fn minus_dot(&self) -> f64 {
        -self.a.dot(&self.b)
    }
}

/// Eigenvalues `(A, B)` of `σ₁·a` and `σ₂·b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct OutcomePair {
    #[serde(rename = "A")]
    pub a: Sign,
    #[serde(rename = "B")]
    pub b: Sign,
}

impl OutcomePair {
    pub const ALL: [OutcomePair; 4] = [
        OutcomePair::new(Sign::Plus, Sign::Plus),
        OutcomePair::new(Sign::Plus, Sign::Minus),
        OutcomePair::new(Sign::Minus, Sign::Plus),
        OutcomePair::new(Sign::Minus, Sign::Minus),
    ];

    pub const fn new(a: Sign, b: Sign) -> Self {
        Self { a, b }
    }

    pub fn product(&self) -> f64 {
        self.a.value() * self.b.value()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HiddenVariableEntry {
    pub outcome: OutcomePair,
    pub rho: f64,
    #[serde(skip)]
    pub ket: Ket,
}

/// The four weighted joint eigenvectors for one axis pair.
#[derive(Debug, Clone, Serialize)]
pub struct HiddenVariableTable {
    pub entries: Vec<HiddenVariableEntry>,
}

impl HiddenVariableTable {
    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.rho).sum()
    }

    pub fn rho(&self, outcome: OutcomePair) -> f64 {
        self.entries
            .iter()
            .find(|e| e.outcome == outcome)
            .map(|e| e.rho)
            .unwrap_or(0.0)
    }

    /// `Σ ρ·A·B`.
    pub fn correlation(&self) -> f64 {
        self.entries.iter().map(|e| e.rho * e.outcome.product()).sum()
    }
}

/// `(|+z, −z⟩ − |−z, +z⟩)/√2`.
pub fn singlet() -> Ket {
    let basis = spin_basis().tensor(&spin_basis());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ket::from_terms(
        &basis,
        [
            (&BasisLabel::new(["+z", "-z"]), c(h, 0.0)),
            (&BasisLabel::new(["-z", "+z"]), c(-h, 0.0)),
        ],
    )
    .expect("labels of the two-spin basis")
}

/// `|A, B⟩ = |A along a⟩ ⊗ |B along b⟩`.
pub fn joint_eigenvector(pair: &AxisPair, out: OutcomePair) -> Ket {
    tensor(&[eigenspinor(pair.a, out.a), eigenspinor(pair.b, out.b)]).expect("two factors")
}

pub fn hidden_variable_table(pair: &AxisPair) -> HiddenVariableTable {
    hidden_variable_table_for(&singlet(), pair).expect("singlet lives in the two-spin basis")
}

/// Weights of the joint eigenvectors against an arbitrary two-spin state.
pub fn hidden_variable_table_for(state: &Ket, pair: &AxisPair) -> Result<HiddenVariableTable> {
    let entries = OutcomePair::ALL
        .iter()
        .map(|&outcome| {
            let ket = joint_eigenvector(pair, outcome);
            let rho = compat_prob(state, &ket)?;
            Ok(HiddenVariableEntry { outcome, rho, ket })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HiddenVariableTable { entries })
}

/// `P(a, b) = Σ_λ ρ(λ)·A·B` for the singlet.
pub fn expectation_concurrent(pair: &AxisPair) -> f64 {
    hidden_variable_table(pair).correlation()
}

pub fn expectation_concurrent_for(state: &Ket, pair: &AxisPair) -> Result<f64> {
    Ok(hidden_variable_table_for(state, pair)?.correlation())
}

/// `(σ₁·a)(σ₂·b)` on the two-spin register.
pub fn correlation_operator(pair: &AxisPair) -> Operator {
    Operator::tensor(&[sigma_dot_n(pair.a), sigma_dot_n(pair.b)]).expect("two factors")
}

/// `⟨Ψ|(σ₁·a)(σ₂·b)|Ψ⟩` for the singlet.
pub fn expectation_qm(pair: &AxisPair) -> Result<f64> {
    expectation_qm_for(&singlet(), pair)
}

pub fn expectation_qm_for(state: &Ket, pair: &AxisPair) -> Result<f64> {
    let value = expectation(&correlation_operator(pair), state)?;
    if value.im.abs() >= IMAGINARY_TOLERANCE {
        return Err(Error::CheckFailed {
            check: "real expectation",
            detail: format!("imaginary part {:.3e}", value.im),
        });
    }
    Ok(value.re)
}

/// `|⟨A′,B′|A,B⟩|²`, the probability that two joint eigenvectors describe the
/// same system. No reference state enters.
pub fn conditional_prob(from: (&AxisPair, OutcomePair), to: (&AxisPair, OutcomePair)) -> f64 {
    let a = joint_eigenvector(from.0, from.1);
    let b = joint_eigenvector(to.0, to.1);
    compat_prob(&a, &b).expect("same two-spin basis")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{eigen_residual, inner, sigma_on_site, Complex};
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    // Independent oracle: ⟨Ψ|P_a⊗P_b|Ψ⟩ with P_n = (I + σ·n)/2 built from raw matrices.
    fn projector_oracle(a: Direction, b: Direction, sa: f64, sb: f64) -> f64 {
        let proj = |n: Direction, s: f64| {
            let [x, y, z] = n.cartesian();
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex::new(0.5 * (1.0 + s * z), 0.0),
                    Complex::new(0.5 * s * x, -0.5 * s * y),
                    Complex::new(0.5 * s * x, 0.5 * s * y),
                    Complex::new(0.5 * (1.0 - s * z), 0.0),
                ],
            )
        };
        let p = proj(a, sa).kronecker(&proj(b, sb));
        let psi = nalgebra::DVector::from_vec(singlet().amps().to_vec());
        (psi.adjoint() * p * &psi)[(0, 0)].re
    }

    fn dir(theta: f64, phi: f64) -> Direction {
        Direction::new(theta, phi).unwrap()
    }

    #[test]
    fn singlet_amplitudes() {
        let s = singlet();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        let pm = s.amp(&BasisLabel::new(["+z", "-z"])).unwrap();
        assert!((pm - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert_eq!(s.amp(&BasisLabel::new(["+z", "+z"])).unwrap(), c(0.0, 0.0));
        let up_down = tensor(&[
            eigenspinor(Direction::z(), Sign::Plus),
            eigenspinor(Direction::z(), Sign::Minus),
        ])
        .unwrap();
        assert!((inner(&s, &up_down).unwrap() - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((compat_prob(&s, &up_down).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singlet_takes_the_same_form_along_any_common_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = Direction::random(&mut rng);
            let pair = AxisPair::new(a, a);
            let form = joint_eigenvector(&pair, OutcomePair::new(Sign::Plus, Sign::Minus))
                .add(&joint_eigenvector(&pair, OutcomePair::new(Sign::Minus, Sign::Plus)).scale(c(-1.0, 0.0)))
                .unwrap()
                .scale(c(FRAC_1_SQRT_2, 0.0));
            assert!((compat_prob(&form, &singlet()).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_eigenvectors_diagonalize_both_operators_and_are_orthonormal() {
        let pair = AxisPair::new(dir(0.7, 1.9), dir(2.2, 5.1));
        let kets: Vec<Ket> = OutcomePair::ALL.iter().map(|&o| joint_eigenvector(&pair, o)).collect();
        for (o, k) in OutcomePair::ALL.iter().zip(&kets) {
            let (la, ra) = eigen_residual(&sigma_on_site(pair.a, 0, 2), k).unwrap();
            let (lb, rb) = eigen_residual(&sigma_on_site(pair.b, 1, 2), k).unwrap();
            assert!(ra < 1e-12 && rb < 1e-12);
            assert!((la.re - o.a.value()).abs() < 1e-12);
            assert!((lb.re - o.b.value()).abs() < 1e-12);
        }
        for i in 0..4 {
            for j in 0..4 {
                let g = inner(&kets[i], &kets[j]).unwrap();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((g - c(expected, 0.0)).norm() < 1e-12);
            }
        }
        let zz = AxisPair::new(Direction::z(), Direction::z());
        let k = joint_eigenvector(&zz, OutcomePair::new(Sign::Plus, Sign::Minus));
        assert!((k.amp(&BasisLabel::new(["+z", "-z"])).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tensor_amplitude_matches_projector_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let pair = AxisPair::random(&mut rng);
            let k = joint_eigenvector(&pair, OutcomePair::new(Sign::Plus, Sign::Plus));
            let p = compat_prob(&singlet(), &k).unwrap();
            let oracle = projector_oracle(pair.a, pair.b, 1.0, 1.0);
            assert!((p - oracle).abs() < 1e-12);
            assert!((oracle - (1.0 + pair.minus_dot()) / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn table_for_parallel_and_perpendicular_axes() {
        let a = dir(1.2, 0.4);
        let t = hidden_variable_table(&AxisPair::new(a, a));
        assert!((t.rho(OutcomePair::new(Sign::Plus, Sign::Minus)) - 0.5).abs() < 1e-12);
        assert!((t.rho(OutcomePair::new(Sign::Minus, Sign::Plus)) - 0.5).abs() < 1e-12);
        assert!(t.rho(OutcomePair::new(Sign::Plus, Sign::Plus)) < 1e-12);
        assert!(t.rho(OutcomePair::new(Sign::Minus, Sign::Minus)) < 1e-12);
        let t = hidden_variable_table(&AxisPair::new(Direction::z(), Direction::x()));
        for o in OutcomePair::ALL {
            assert!((t.rho(o) - 0.25).abs() < 1e-12);
        }
        assert!((t.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concurrent_sum_reproduces_minus_a_dot_b() {
        let a = dir(0.9, 2.0);
        assert!((expectation_concurrent(&AxisPair::new(a, a)) + 1.0).abs() < 1e-12);
        let perpendicular = AxisPair::new(Direction::z(), Direction::y());
        assert!(expectation_concurrent(&perpendicular).abs() < 1e-12);
        let third = AxisPair::new(Direction::z(), dir(PI / 3.0, 0.0));
        assert!((expectation_concurrent(&third) + 0.5).abs() < 1e-12);
        assert!((expectation_qm(&third).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn quantum_expectation_edge_cases() {
        let zz = AxisPair::new(Direction::z(), Direction::z());
        assert!((expectation_qm(&zz).unwrap() + 1.0).abs() < 1e-12);
        let a = dir(2.0, 1.0);
        let anti = AxisPair::new(a, a.antipode());
        assert!((expectation_qm(&anti).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_probabilities_factorize() {
        let p = AxisPair::new(dir(0.4, 0.1), dir(1.7, 3.3));
        let q = AxisPair::new(dir(2.5, 4.0), dir(0.2, 5.9));
        let o = OutcomePair::new(Sign::Plus, Sign::Minus);
        assert!((conditional_prob((&p, o), (&p, o)) - 1.0).abs() < 1e-12);
        let flipped = OutcomePair::new(Sign::Minus, Sign::Minus);
        assert!(conditional_prob((&p, o), (&p, flipped)) < 1e-12);
        for o2 in OutcomePair::ALL {
            let site_a = compat_prob(&eigenspinor(q.a, o2.a), &eigenspinor(p.a, o.a)).unwrap();
            let site_b = compat_prob(&eigenspinor(q.b, o2.b), &eigenspinor(p.b, o.b)).unwrap();
            assert!((conditional_prob((&p, o), (&q, o2)) - site_a * site_b).abs() < 1e-14);
        }
    }

    #[test]
    fn pipeline_accepts_other_states() {
        let up_down = joint_eigenvector(
            &AxisPair::new(Direction::z(), Direction::z()),
            OutcomePair::new(Sign::Plus, Sign::Minus),
        );
        let pair = AxisPair::new(Direction::z(), Direction::z());
        assert!((expectation_concurrent_for(&up_down, &pair).unwrap() + 1.0).abs() < 1e-12);
        let single = eigenspinor(Direction::z(), Sign::Plus);
        assert!(expectation_qm_for(&single, &pair).is_err());
    }
}
