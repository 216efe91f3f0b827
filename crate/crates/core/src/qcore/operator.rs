use nalgebra::DMatrix;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use super::basis::{Basis, BasisLabel};
use super::ket::Ket;
use super::Complex;
use crate::error::{Error, Result};

/// Dense square matrix over a labeled basis. Columns are inputs, rows outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    basis: Basis,
    matrix: DMatrix<Complex>,
}

impl Operator {
    pub fn new(basis: Basis, matrix: DMatrix<Complex>) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                actual: if matrix.nrows() != basis.len() {
                    matrix.nrows()
                } else {
                    matrix.ncols()
                },
            });
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("operator entries"));
        }
        Ok(Self { basis, matrix })
    }

    /// Builds an operator and checks `‖O†O − I‖_max < tolerance`.
    pub fn new_unitary(basis: Basis, matrix: DMatrix<Complex>, tolerance: f64) -> Result<Self> {
        let op = Self::new(basis, matrix)?;
        let residual = op.unitarity_residual();
        if residual < tolerance {
            Ok(op)
        } else {
            Err(Error::NotUnitary { residual, tolerance })
        }
    }

    /// Operator whose column for each input label is the given ket.
    pub fn from_columns<F>(basis: &Basis, mut column: F) -> Result<Self>
    where
        F: FnMut(&BasisLabel) -> Result<Ket>,
    {
        let n = basis.len();
        let mut matrix = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
        for (j, label) in basis.labels().iter().enumerate() {
            let image = column(label)?;
            image.basis().ensure_same(basis, "operator column")?;
            matrix.set_column(j, image.vector());
        }
        Self::new(basis.clone(), matrix)
    }

    pub fn identity(basis: &Basis) -> Self {
        Self {
            basis: basis.clone(),
            matrix: DMatrix::identity(basis.len(), basis.len()),
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `⟨row|O|col⟩`.
    pub fn element(&self, row: &BasisLabel, col: &BasisLabel) -> Result<Complex> {
        let i = self
            .basis
            .index_of(row)
            .ok_or_else(|| Error::UnknownLabel(row.to_string()))?;
        let j = self
            .basis
            .index_of(col)
            .ok_or_else(|| Error::UnknownLabel(col.to_string()))?;
        Ok(self.matrix[(i, j)])
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        self.basis.ensure_same(&other.basis, "operator product")?;
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            basis: self.basis.clone(),
            matrix: self.matrix.map(|z| z * factor),
        }
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.basis.ensure_same(&other.basis, "operator sum")?;
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Kronecker product of operators, site 1 first.
    pub fn tensor(factors: &[Operator]) -> Result<Self> {
        let (first, rest) = factors.split_first().ok_or(Error::EmptyTensor)?;
        let mut acc = first.clone();
        for factor in rest {
            acc = Self {
                basis: acc.basis.tensor(&factor.basis),
                matrix: acc.matrix.kronecker(&factor.matrix),
            };
        }
        Ok(acc)
    }

    pub fn unitarity_residual(&self) -> f64 {
        let product = self.matrix.adjoint() * &self.matrix;
        let n = self.dim();
        max_norm(&(product - DMatrix::<Complex>::identity(n, n)))
    }

    pub fn hermiticity_residual(&self) -> f64 {
        max_norm(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.basis.ensure_same(&other.basis, "operator comparison")?;
        Ok(max_norm(&(&self.matrix - &other.matrix)))
    }
}

fn max_norm(m: &DMatrix<Complex>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `O|psi⟩`.
pub fn apply(op: &Operator, psi: &Ket) -> Result<Ket> {
    op.basis.ensure_same(psi.basis(), "apply")?;
    Ket::from_vector(op.basis.clone(), &op.matrix * psi.vector())
}

/// `O†|psi⟩`: the ket form of the bra `⟨psi|O`.
pub fn apply_adjoint(op: &Operator, psi: &Ket) -> Result<Ket> {
    op.basis.ensure_same(psi.basis(), "apply_adjoint")?;
    Ket::from_vector(op.basis.clone(), op.matrix.ad_mul(psi.vector()))
}

/// `⟨psi|O|psi⟩`.
pub fn expectation(op: &Operator, psi: &Ket) -> Result<Complex> {
    let image = apply(op, psi)?;
    super::inner(psi, &image)
}

/// Rayleigh quotient `λ = ⟨psi|O|psi⟩/⟨psi|psi⟩` and eigen-residual `‖O psi − λ psi‖`.
pub fn eigen_residual(op: &Operator, psi: &Ket) -> Result<(Complex, f64)> {
    let image = apply(op, psi)?;
    let norm_sqr = psi.norm().powi(2);
    if norm_sqr == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let lambda = super::inner(psi, &image)? / norm_sqr;
    let residual = image.add(&psi.scale(-lambda))?.norm();
    Ok((lambda, residual))
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let basis: Vec<String> = self.basis.labels().iter().map(|l| l.to_string()).collect();
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| {
                        let z = self.matrix[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        let mut s = serializer.serialize_struct("Operator", 2)?;
        s.serialize_field("basis", &basis)?;
        s.serialize_field("matrix", &rows)?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{inner, spin_basis};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_non_square_and_non_unitary() {
        let basis = spin_basis();
        let bad = DMatrix::from_element(2, 3, c(0.0, 0.0));
        assert!(Operator::new(basis.clone(), bad).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            Operator::new_unitary(basis, m, 1e-10),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn identity_applies_trivially() {
        let basis = spin_basis();
        let psi = Ket::new(basis.clone(), vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let out = apply(&Operator::identity(&basis), &psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn adjoint_application_matches_conjugated_amplitude() {
        let basis = spin_basis();
        let m = DMatrix::from_row_slice(2, 2, &[c(0.3, 0.1), c(-0.2, 0.9), c(1.1, -0.4), c(0.0, 0.5)]);
        let op = Operator::new(basis.clone(), m).unwrap();
        let f = Ket::new(basis.clone(), vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let i = Ket::new(basis, vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let lhs = inner(&apply_adjoint(&op, &f).unwrap(), &i).unwrap();
        let rhs = inner(&f, &apply(&op, &i).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let basis = spin_basis();
        let id = Operator::identity(&basis);
        let big = Operator::tensor(&[id.clone(), id.clone(), id]).unwrap();
        assert_eq!(big.dim(), 8);
        assert_eq!(big.unitarity_residual(), 0.0);
        assert!(Operator::tensor(&[]).is_err());
    }
}
