use nalgebra::DVector;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use super::basis::{Basis, BasisLabel};
use super::Complex;
use crate::error::{Error, Result};

/// A complex amplitude vector over a labeled basis.
///
/// Kets are not forced to unit norm: first-order perturbative states are
/// reported exactly as built, and [`Ket::normalize`] produces the unit form.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    basis: Basis,
    amps: DVector<Complex>,
}

impl Ket {
    pub fn new(basis: Basis, amps: Vec<Complex>) -> Result<Self> {
        if amps.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                actual: amps.len(),
            });
        }
        Self::from_vector(basis, DVector::from_vec(amps))
    }

    pub(crate) fn from_vector(basis: Basis, amps: DVector<Complex>) -> Result<Self> {
        if amps.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("ket amplitudes"));
        }
        Ok(Self { basis, amps })
    }

    /// The basis vector `|label⟩`.
    pub fn basis_state(basis: &Basis, label: &BasisLabel) -> Result<Self> {
        let index = basis
            .index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        let mut amps = DVector::from_element(basis.len(), Complex::new(0.0, 0.0));
        amps[index] = Complex::new(1.0, 0.0);
        Ok(Self {
            basis: basis.clone(),
            amps,
        })
    }

    /// Sum of `coefficient · |label⟩` terms; repeated labels accumulate.
    pub fn from_terms<'a, I>(basis: &Basis, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a BasisLabel, Complex)>,
    {
        let mut amps = DVector::from_element(basis.len(), Complex::new(0.0, 0.0));
        for (label, coefficient) in terms {
            let index = basis
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            amps[index] += coefficient;
        }
        Self::from_vector(basis.clone(), amps)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn amps(&self) -> &[Complex] {
        self.amps.as_slice()
    }

    pub(crate) fn vector(&self) -> &DVector<Complex> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amp(&self, label: &BasisLabel) -> Option<Complex> {
        self.basis.index_of(label).map(|i| self.amps[i])
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&self) -> Result<Ket> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(Complex::new(1.0 / norm, 0.0)))
    }

    pub fn scale(&self, factor: Complex) -> Ket {
        Ket {
            basis: self.basis.clone(),
            amps: self.amps.map(|z| z * factor),
        }
    }

    pub fn add(&self, other: &Ket) -> Result<Ket> {
        self.basis.ensure_same(&other.basis, "ket sum")?;
        Ok(Ket {
            basis: self.basis.clone(),
            amps: &self.amps + &other.amps,
        })
    }

    /// Re-expresses this ket over a larger basis that contains every label.
    pub fn embed(&self, target: &Basis) -> Result<Ket> {
        let mut amps = DVector::from_element(target.len(), Complex::new(0.0, 0.0));
        for (label, amp) in self.basis.labels().iter().zip(self.amps.iter()) {
            let index = target
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            amps[index] = *amp;
        }
        Ok(Ket {
            basis: target.clone(),
            amps,
        })
    }

    /// Largest amplitude difference after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &Ket) -> Result<f64> {
        let overlap = inner(other, self)?;
        let phase = if overlap.norm() == 0.0 {
            Complex::new(1.0, 0.0)
        } else {
            overlap / overlap.norm()
        };
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max))
    }

    /// Largest componentwise amplitude difference.
    pub fn max_abs_diff(&self, other: &Ket) -> Result<f64> {
        self.basis.ensure_same(&other.basis, "ket comparison")?;
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// `⟨phi|psi⟩`, conjugate-linear in the first argument.
pub fn inner(phi: &Ket, psi: &Ket) -> Result<Complex> {
    phi.basis.ensure_same(&psi.basis, "inner product")?;
    Ok(phi.amps.dotc(&psi.amps))
}

/// Compatibility probability `|⟨phi|psi⟩|²` of two normalized kets.
///
/// Clamped to `[0, 1]`; rounding on unit kets can otherwise overshoot by an ulp.
pub fn compat_prob(phi: &Ket, psi: &Ket) -> Result<f64> {
    Ok(inner(phi, psi)?.norm_sqr().min(1.0))
}

/// Kronecker product with concatenated labels.
pub fn tensor(factors: &[Ket]) -> Result<Ket> {
    let (first, rest) = factors.split_first().ok_or(Error::EmptyTensor)?;
    let mut acc = first.clone();
    for factor in rest {
        acc = Ket {
            basis: acc.basis.tensor(&factor.basis),
            amps: acc.amps.kronecker(&factor.amps),
        };
    }
    Ok(acc)
}

impl Serialize for Ket {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let basis: Vec<String> = self.basis.labels().iter().map(|l| l.to_string()).collect();
        let amps: Vec<[f64; 2]> = self.amps.iter().map(|z| [z.re, z.im]).collect();
        let mut s = serializer.serialize_struct("Ket", 2)?;
        s.serialize_field("basis", &basis)?;
        s.serialize_field("amps", &amps)?;
        s.end()
    }
}
