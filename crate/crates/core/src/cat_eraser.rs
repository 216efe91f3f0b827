//! Spin coupled to a radionucleus, and the atom/field eraser pair.
//!
//! The cat register is a spin-½ measured along `x` together with a nucleus
//! that is either intact or decayed. The interaction is the S-operator
//! `(1 + e^{iφ} a b† + e^{iχ} a† b† − e^{−iφ} a† b − e^{−iχ} a b)/√2`, where
//! `a` lowers `|+x⟩` to `|−x⟩` and `b†` decays the nucleus.
//!
//! The basis order is fixed: `(+x, intact), (−x, intact), (+x, decayed),
//! (−x, decayed)`. Unlike the other composite bases this one runs over the
//! spin fastest.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::Serialize;

use crate::bell::singlet;
use crate::error::{Error, Result};
use crate::qcore::{
    apply, apply_adjoint, c, compat_prob, eigenspinor, spin_basis, tensor, Basis, BasisLabel, Complex, Direction, Ket,
    Operator, Sign,
};

/// Unitarity tolerance for a freshly built S-operator.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Tolerance on the singlet correspondence.
pub const SINGLET_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatPhases {
    pub phi: f64,
    pub chi: f64,
}

impl CatPhases {
    pub fn new(phi: f64, chi: f64) -> Result<Self> {
        if !(phi.is_finite() && chi.is_finite()) {
            return Err(Error::NonFinite("cat phases"));
        }
        Ok(Self { phi, chi })
    }
}

impl Default for CatPhases {
    fn default() -> Self {
        Self { phi: PI, chi: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Nucleus {
    Intact,
    Decayed,
}

impl Nucleus {
    pub fn token(self) -> &'static str {
        match self {
            Nucleus::Intact => "intact",
            Nucleus::Decayed => "decayed",
        }
    }
}

/// One cat basis vector `|spin along x, nucleus⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CatLabel {
    pub spin: Sign,
    pub nucleus: Nucleus,
}

impl CatLabel {
    /// Basis order.
    pub const ALL: [CatLabel; 4] = [
        CatLabel::new(Sign::Plus, Nucleus::Intact),
        CatLabel::new(Sign::Minus, Nucleus::Intact),
        CatLabel::new(Sign::Plus, Nucleus::Decayed),
        CatLabel::new(Sign::Minus, Nucleus::Decayed),
    ];

    pub const fn new(spin: Sign, nucleus: Nucleus) -> Self {
        Self { spin, nucleus }
    }

    pub fn basis_label(self) -> BasisLabel {
        let spin = match self.spin {
            Sign::Plus => "+x",
            Sign::Minus => "-x",
        };
        BasisLabel::new([spin, self.nucleus.token()])
    }

    pub fn ket(self) -> Ket {
        Ket::basis_state(&cat_basis(), &self.basis_label()).expect("cat label")
    }

    fn from_basis_label(label: &BasisLabel) -> Option<Self> {
        Self::ALL.into_iter().find(|l| &l.basis_label() == label)
    }
}

impl fmt::Display for CatLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.basis_label())
    }
}

/// Parses `"+x,intact"` style labels.
impl FromStr for CatLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s.split(',').map(str::trim).collect();
        let label = BasisLabel::new(tokens.iter().map(|t| t.to_string()));
        Self::from_basis_label(&label).ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

impl Serialize for CatLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

static CAT_BASIS: LazyLock<Basis> =
    LazyLock::new(|| Basis::new(CatLabel::ALL.iter().map(|l| l.basis_label()).collect()).expect("static cat basis"));

pub fn cat_basis() -> Basis {
    CAT_BASIS.clone()
}

/// Operator defined by its action on each basis label; `None` maps to zero.
fn label_map(f: impl Fn(CatLabel) -> Option<CatLabel>) -> Operator {
    let basis = cat_basis();
    Operator::from_columns(&basis, |label| {
        let from = CatLabel::from_basis_label(label).expect("cat label");
        match f(from) {
            Some(to) => Ok(to.ket()),
            None => Ket::new(basis.clone(), vec![c(0.0, 0.0); 4]),
        }
    })
    .expect("4x4 label map")
}

/// Spin lowering: `a|+x⟩ = |−x⟩`, `a|−x⟩ = 0`.
pub fn spin_lower() -> Operator {
    label_map(|l| (l.spin == Sign::Plus).then_some(CatLabel::new(Sign::Minus, l.nucleus)))
}

/// Spin raising: `a†|−x⟩ = |+x⟩`, `a†|+x⟩ = 0`.
pub fn spin_raise() -> Operator {
    label_map(|l| (l.spin == Sign::Minus).then_some(CatLabel::new(Sign::Plus, l.nucleus)))
}

/// Decay: `b†|intact⟩ = |decayed⟩`, `b†|decayed⟩ = 0`.
pub fn nucleus_decay() -> Operator {
    label_map(|l| (l.nucleus == Nucleus::Intact).then_some(CatLabel::new(l.spin, Nucleus::Decayed)))
}

/// Restore: `b|decayed⟩ = |intact⟩`, `b|intact⟩ = 0`.
pub fn nucleus_restore() -> Operator {
    label_map(|l| (l.nucleus == Nucleus::Decayed).then_some(CatLabel::new(l.spin, Nucleus::Intact)))
}

/// The S-operator from the ladder products, checked unitary.
pub fn build_cat_s(phases: CatPhases) -> Result<Operator> {
    let (a, ad, b, bd) = (spin_lower(), spin_raise(), nucleus_restore(), nucleus_decay());
    let e_phi = Complex::from_polar(1.0, phases.phi);
    let e_chi = Complex::from_polar(1.0, phases.chi);
    let sum = Operator::identity(&cat_basis())
        .add(&a.compose(&bd)?.scale(e_phi))?
        .add(&ad.compose(&bd)?.scale(e_chi))?
        .add(&ad.compose(&b)?.scale(-e_phi.conj()))?
        .add(&a.compose(&b)?.scale(-e_chi.conj()))?
        .scale(c(FRAC_1_SQRT_2, 0.0));
    Operator::new_unitary(cat_basis(), sum.matrix().clone(), UNITARITY_TOLERANCE)
}

/// `S|initial⟩`.
pub fn evolve(initial: CatLabel, phases: CatPhases) -> Result<Ket> {
    apply(&build_cat_s(phases)?, &initial.ket())
}

/// Ket form of the bra `⟨final|S`, i.e. `S†|final⟩`.
pub fn initial_form_of_final(final_label: CatLabel, phases: CatPhases) -> Result<Ket> {
    apply_adjoint(&build_cat_s(phases)?, &final_label.ket())
}

fn is_pi(phi: f64) -> bool {
    let wrapped = (phi - PI).rem_euclid(2.0 * PI);
    wrapped.min(2.0 * PI - wrapped) < SINGLET_TOLERANCE
}

/// `S|+x, intact⟩` with the nucleus read as a second spin along `x`
/// (decayed → `+x`, intact → `−x`), expressed in the two-spin `z` basis.
///
/// Only `φ = π` lands on the singlet; other phases are rejected.
pub fn map_to_singlet(phases: CatPhases) -> Result<Ket> {
    if !is_pi(phases.phi) {
        return Err(Error::InvalidParameter(format!(
            "singlet correspondence needs phi = pi, got {}",
            phases.phi
        )));
    }
    let evolved = evolve(CatLabel::new(Sign::Plus, Nucleus::Intact), phases)?;
    let x = Direction::x();
    let two_spin = spin_basis().tensor(&spin_basis());
    let mut mapped = Ket::new(two_spin, vec![c(0.0, 0.0); 4])?;
    for (label, amp) in CatLabel::ALL.iter().zip(evolved.amps()) {
        let second = match label.nucleus {
            Nucleus::Decayed => Sign::Plus,
            Nucleus::Intact => Sign::Minus,
        };
        let product = tensor(&[eigenspinor(x, label.spin), eigenspinor(x, second)])?;
        mapped = mapped.add(&product.scale(*amp))?;
    }
    let overlap = compat_prob(&mapped, &singlet())?;
    if (overlap - 1.0).abs() > SINGLET_TOLERANCE {
        return Err(Error::CheckFailed {
            check: "singlet correspondence",
            detail: format!("compat_prob with the singlet is {overlap}"),
        });
    }
    Ok(mapped)
}

/// Measurement basis of one eraser site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EraserBasis {
    X,
    Z,
}

impl EraserBasis {
    pub const BOTH: [EraserBasis; 2] = [EraserBasis::X, EraserBasis::Z];

    pub fn token(self) -> &'static str {
        match self {
            EraserBasis::X => "x",
            EraserBasis::Z => "z",
        }
    }
}

impl FromStr for EraserBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(EraserBasis::X),
            "z" | "Z" => Ok(EraserBasis::Z),
            other => Err(Error::InvalidParameter(format!("eraser basis `{other}`"))),
        }
    }
}

static X_BASIS: LazyLock<Basis> = LazyLock::new(|| Basis::single_site(&["+x", "-x"]).expect("static x basis"));

/// Atom (site 1) and field (site 2), `(|+x,+x⟩ + |−x,−x⟩)/√2`.
#[derive(Debug, Clone, Serialize)]
pub struct SewState {
    pub ket: Ket,
}

pub fn sew_state() -> SewState {
    let basis = X_BASIS.tensor(&X_BASIS);
    let ket = Ket::from_terms(
        &basis,
        [
            (&BasisLabel::new(["+x", "+x"]), c(FRAC_1_SQRT_2, 0.0)),
            (&BasisLabel::new(["-x", "-x"]), c(FRAC_1_SQRT_2, 0.0)),
        ],
    )
    .expect("labels of the x-x basis");
    SewState { ket }
}

/// Site eigenvector in the `{+x, −x}` basis; `±z` is `(|+x⟩ ± |−x⟩)/√2`.
fn site_vector(basis: EraserBasis, sign: Sign) -> Ket {
    let amps = match (basis, sign) {
        (EraserBasis::X, Sign::Plus) => [c(1.0, 0.0), c(0.0, 0.0)],
        (EraserBasis::X, Sign::Minus) => [c(0.0, 0.0), c(1.0, 0.0)],
        (EraserBasis::Z, s) => [c(FRAC_1_SQRT_2, 0.0), c(s.value() * FRAC_1_SQRT_2, 0.0)],
    };
    Ket::new(X_BASIS.clone(), amps.to_vec()).expect("two amplitudes")
}

pub fn sew_joint_prob(basis1: EraserBasis, basis2: EraserBasis, s1: Sign, s2: Sign) -> f64 {
    let outcome = tensor(&[site_vector(basis1, s1), site_vector(basis2, s2)]).expect("two sites");
    compat_prob(&outcome, &sew_state().ket).expect("same x-x basis")
}

#[derive(Debug, Clone, Serialize)]
pub struct EraserRow {
    pub basis1: EraserBasis,
    pub basis2: EraserBasis,
    pub s1: Sign,
    pub s2: Sign,
    pub probability: f64,
}

/// All sixteen joint outcomes, bases outermost.
pub fn eraser_table() -> Vec<EraserRow> {
    let mut rows = Vec::with_capacity(16);
    for basis1 in EraserBasis::BOTH {
        for basis2 in EraserBasis::BOTH {
            for s1 in Sign::BOTH {
                for s2 in Sign::BOTH {
                    rows.push(EraserRow {
                        basis1,
                        basis2,
                        s1,
                        s2,
                        probability: sew_joint_prob(basis1, basis2, s1, s2),
                    });
                }
            }
        }
    }
    rows
}
