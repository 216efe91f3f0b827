//! Three spins in the state `(|+z,+z,+z⟩ − |−z,−z,−z⟩)/√2`.
//!
//! A product of positive eigenspinors `|n₁,n₂,n₃⟩` has amplitude
//! `(c₁c₂c₃ − e^{−iΣφ} s₁s₂s₃)/√2` against it, with `c = cos(θ/2)` and
//! `s = sin(θ/2)`. It vanishes exactly when `Σφ ≡ 0` and `∏ cot(θ/2) = 1`,
//! which [`orthogonality_condition`] evaluates as a sum of `log cot(θ/2)`.

mod consistent;

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::sync::LazyLock;

use serde::Serialize;

use crate::error::Result;
use crate::qcore::{
    c, eigen_residual, eigenspinor, inner, sigma_dot_n, sigma_on_site, spin_basis, tensor, BasisLabel, Complex,
    Direction, Ket, Operator, Sign,
};

pub use consistent::{
    assign_spin, build_consistent_set, find_orthogonal_witness, region_map, solve_theta_k, verify_consistent_set, Band,
    ConsistentSet, Pole, ProbeResult, RegionRow, SpinAssignment, VerificationReport, DEFAULT_EPSILON,
};

/// `|∏ cot(θ/2) − 1|` tolerance, applied as `|Σ log cot(θ/2)|`.
pub const MAGNITUDE_TOLERANCE: f64 = 1e-9;

/// Tolerance on `Σφ ≡ 0 (mod 2π)`.
pub const PHASE_TOLERANCE: f64 = 1e-9;

/// Amplitudes below this count as orthogonal.
pub const AMPLITUDE_TOLERANCE: f64 = 1e-10;

/// Half-angle sines or cosines below this are treated as exact zeros, so
/// `θ = π` in floating point behaves as the pole.
const POLE_CUTOFF: f64 = 1e-15;

static GHZ: LazyLock<Ket> = LazyLock::new(|| {
    let spin = spin_basis();
    let basis = spin.tensor(&spin).tensor(&spin);
    Ket::from_terms(
        &basis,
        [
            (&BasisLabel::new(["+z", "+z", "+z"]), c(FRAC_1_SQRT_2, 0.0)),
            (&BasisLabel::new(["-z", "-z", "-z"]), c(-FRAC_1_SQRT_2, 0.0)),
        ],
    )
    .expect("labels of the three-spin basis")
});

/// `(|+z,+z,+z⟩ − |−z,−z,−z⟩)/√2`.
pub fn ghz_state() -> Ket {
    GHZ.clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleDirections(pub [Direction; 3]);

impl TripleDirections {
    pub fn new(n1: Direction, n2: Direction, n3: Direction) -> Self {
        Self([n1, n2, n3])
    }

    pub fn from_angles(angles: [(f64, f64); 3]) -> Result<Self> {
        let [a, b, d] = angles;
        Ok(Self([
            Direction::new(a.0, a.1)?,
            Direction::new(b.0, b.1)?,
            Direction::new(d.0, d.1)?,
        ]))
    }

    pub fn directions(&self) -> &[Direction; 3] {
        &self.0
    }
}

/// Measurement axes used by the defining operator products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn direction(self) -> Direction {
        match self {
            Axis::X => Direction::x(),
            Axis::Y => Direction::y(),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
        }
    }
}

/// `(σ₁·a₁)(σ₂·a₂)(σ₃·a₃)`.
pub fn pauli_product(axes: [Axis; 3]) -> Operator {
    let factors: Vec<Operator> = axes.iter().map(|a| sigma_dot_n(a.direction())).collect();
    Operator::tensor(&factors).expect("three factors")
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueCheck {
    pub operator: String,
    pub eigenvalue: f64,
    pub imaginary: f64,
    pub residual: f64,
}

/// Products whose common eigenvector is the GHZ state, with expected eigenvalues.
pub const DEFINING_PRODUCTS: [([Axis; 3], f64); 4] = [
    ([Axis::X, Axis::Y, Axis::Y], 1.0),
    ([Axis::Y, Axis::X, Axis::Y], 1.0),
    ([Axis::Y, Axis::Y, Axis::X], 1.0),
    ([Axis::X, Axis::X, Axis::X], -1.0),
];

/// Rayleigh quotients and eigen-residuals of XYY, YXY, YYX and XXX on the GHZ state.
pub fn check_defining_eigenvalues() -> Vec<EigenvalueCheck> {
    let ghz = ghz_state();
    DEFINING_PRODUCTS
        .iter()
        .map(|(axes, _)| {
            let (lambda, residual) = eigen_residual(&pauli_product(*axes), &ghz).expect("three-spin operator");
            EigenvalueCheck {
                operator: axes.iter().map(|a| a.letter()).collect(),
                eigenvalue: lambda.re,
                imaginary: lambda.im,
                residual,
            }
        })
        .collect()
}

/// Eigen-residual of `σ·n` on one site of the GHZ state.
pub fn single_site_residual(n: Direction, site: usize) -> f64 {
    let (_, residual) = eigen_residual(&sigma_on_site(n, site, 3), &ghz_state()).expect("three-spin operator");
    residual
}

/// The direction whose `+1` eigenspinor equals the `sign` eigenspinor along `n`.
pub fn fold(n: Direction, sign: Sign) -> Direction {
    match sign {
        Sign::Plus => n,
        Sign::Minus => n.antipode(),
    }
}

/// Joint eigenvector `|s₁n₁, s₂n₂, s₃n₃⟩`.
pub fn joint_eigenvector(t: &TripleDirections, signs: [Sign; 3]) -> Ket {
    let factors: Vec<Ket> = t.0.iter().zip(signs).map(|(n, s)| eigenspinor(*n, s)).collect();
    tensor(&factors).expect("three factors")
}

/// `⟨s₁n₁, s₂n₂, s₃n₃|GHZ⟩`.
pub fn compat_amplitude(t: &TripleDirections, signs: [Sign; 3]) -> Complex {
    inner(&joint_eigenvector(t, signs), &GHZ).expect("three-spin basis")
}

/// `log cot(θ/2)`, in `[−∞, +∞]` with the poles mapped to the infinities.
pub fn log_cot_half(theta: f64) -> f64 {
    let (s, co) = (theta / 2.0).sin_cos();
    if s < POLE_CUTOFF {
        f64::INFINITY
    } else if co < POLE_CUTOFF {
        f64::NEG_INFINITY
    } else {
        co.ln() - s.ln()
    }
}

/// `Σ log cot(θᵢ/2)`; `NaN` when both infinities occur.
pub(crate) fn surface_log(t: &TripleDirections) -> f64 {
    t.0.iter().map(|n| log_cot_half(n.theta())).sum()
}

fn phase_sum_is_zero(t: &TripleDirections) -> bool {
    let wrapped = t.0.iter().map(|n| n.phi()).sum::<f64>().rem_euclid(2.0 * PI);
    wrapped.min(2.0 * PI - wrapped) < PHASE_TOLERANCE
}

/// Whether `|n₁,n₂,n₃⟩` (all positive eigenspinors) is orthogonal to the GHZ state.
///
/// A triple with one direction at `θ = 0` and another at `θ = π` kills both
/// amplitude terms and is orthogonal for every phase. A single pole otherwise
/// sends the product to `0` or `∞`, never to `1`.
pub fn orthogonality_condition(t: &TripleDirections) -> bool {
    let logs = t.0.map(|n| log_cot_half(n.theta()));
    let up = logs.contains(&f64::INFINITY);
    let down = logs.contains(&f64::NEG_INFINITY);
    match (up, down) {
        (true, true) => true,
        (true, false) | (false, true) => false,
        (false, false) => logs.iter().sum::<f64>().abs() < MAGNITUDE_TOLERANCE && phase_sum_is_zero(t),
    }
}

/// Orthogonality of a signed triple, after folding each outcome to a positive direction.
pub fn signed_orthogonality_condition(t: &TripleDirections, signs: [Sign; 3]) -> bool {
    let folded = TripleDirections([fold(t.0[0], signs[0]), fold(t.0[1], signs[1]), fold(t.0[2], signs[2])]);
    orthogonality_condition(&folded)
}

/// One site of a witness vector: spin `sign` along `axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SiteSpin {
    pub axis: Axis,
    pub sign: Sign,
}

impl SiteSpin {
    pub const fn new(axis: Axis, sign: Sign) -> Self {
        Self { axis, sign }
    }
}

impl fmt::Display for SiteSpin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axis = match self.axis {
            Axis::X => "x",
            Axis::Y => "y",
        };
        write!(f, "{}{axis}", self.sign)
    }
}

/// `|−x,+y,−y⟩`, `|+y,−x,−y⟩`, `|+y,+y,+x⟩`: each has a definite `x` value on one site.
pub const MERMIN_WITNESSES: [[SiteSpin; 3]; 3] = [
    [
        SiteSpin::new(Axis::X, Sign::Minus),
        SiteSpin::new(Axis::Y, Sign::Plus),
        SiteSpin::new(Axis::Y, Sign::Minus),
    ],
    [
        SiteSpin::new(Axis::Y, Sign::Plus),
        SiteSpin::new(Axis::X, Sign::Minus),
        SiteSpin::new(Axis::Y, Sign::Minus),
    ],
    [
        SiteSpin::new(Axis::Y, Sign::Plus),
        SiteSpin::new(Axis::Y, Sign::Plus),
        SiteSpin::new(Axis::X, Sign::Plus),
    ],
];

fn site_amplitude(sites: &[SiteSpin; 3]) -> Complex {
    let t = TripleDirections(sites.map(|s| s.axis.direction()));
    compat_amplitude(&t, sites.map(|s| s.sign))
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRecord {
    pub label: String,
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternRecord {
    pub signs: [Sign; 3],
    pub label: String,
    pub xxx_eigenvalue: f64,
    pub ghz_probability: f64,
    /// Indices of witnesses whose `x` site disagrees with this pattern.
    pub contradicts: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MerminReport {
    pub witnesses: Vec<WitnessRecord>,
    pub patterns: Vec<PatternRecord>,
    pub xxx_eigenvalue_minus_one_count: usize,
    pub xxx_minus_one_patterns: Vec<String>,
    pub sitewise_consistent_pattern: Option<[Sign; 3]>,
    pub consistent_pattern_eigenvalue: Option<f64>,
    pub consistent_pattern_ghz_amplitude: Option<f64>,
}

fn describe(sites: &[SiteSpin; 3]) -> String {
    format!("|{},{},{}>", sites[0], sites[1], sites[2])
}

/// Enumerates the eight `|±x,±x,±x⟩` patterns against the three witnesses.
///
/// The state vectors with nonzero probability fix `x₁ = −1`, `x₂ = −1` and
/// `x₃ = +1`; the only all-`x` vector agreeing with them has XXX eigenvalue
/// `+1` and is orthogonal to the GHZ state.
pub fn mermin_paradox_report() -> MerminReport {
    let witnesses = MERMIN_WITNESSES
        .iter()
        .map(|w| WitnessRecord {
            label: describe(w),
            probability: site_amplitude(w).norm_sqr(),
        })
        .collect();
    let xxx = pauli_product([Axis::X; 3]);
    let mut patterns = Vec::with_capacity(8);
    for s1 in Sign::BOTH {
        for s2 in Sign::BOTH {
            for s3 in Sign::BOTH {
                let signs = [s1, s2, s3];
                let sites = signs.map(|s| SiteSpin::new(Axis::X, s));
                let t = TripleDirections([Direction::x(); 3]);
                let (lambda, _) = eigen_residual(&xxx, &joint_eigenvector(&t, signs)).expect("three-spin operator");
                let contradicts = MERMIN_WITNESSES
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| {
                        w.iter()
                            .zip(signs)
                            .any(|(site, s)| site.axis == Axis::X && site.sign != s)
                    })
                    .map(|(i, _)| i)
                    .collect();
                patterns.push(PatternRecord {
                    signs,
                    label: describe(&sites),
                    xxx_eigenvalue: lambda.re,
                    ghz_probability: site_amplitude(&sites).norm_sqr(),
                    contradicts,
                });
            }
        }
    }
    let minus: Vec<&PatternRecord> = patterns.iter().filter(|p| p.xxx_eigenvalue < 0.0).collect();
    let consistent: Vec<&PatternRecord> = patterns.iter().filter(|p| p.contradicts.is_empty()).collect();
    let unique = (consistent.len() == 1).then(|| consistent[0]);
    MerminReport {
        witnesses,
        xxx_eigenvalue_minus_one_count: minus.len(),
        xxx_minus_one_patterns: minus.iter().map(|p| p.label.clone()).collect(),
        sitewise_consistent_pattern: unique.map(|p| p.signs),
        consistent_pattern_eigenvalue: unique.map(|p| p.xxx_eigenvalue),
        consistent_pattern_ghz_amplitude: unique.map(|p| p.ghz_probability.sqrt()),
        patterns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn closed_form(t: &TripleDirections) -> Complex {
        let (mut cs, mut ss, mut phase) = (1.0, 1.0, 0.0);
        for n in t.0 {
            let (s, co) = (n.theta() / 2.0).sin_cos();
            cs *= co;
            ss *= s;
            phase += n.phi();
        }
        (c(cs, 0.0) - Complex::from_polar(ss, -phase)) * FRAC_1_SQRT_2
    }

    fn triple(angles: [(f64, f64); 3]) -> TripleDirections {
        TripleDirections::from_angles(angles).unwrap()
    }

    #[test]
    fn ghz_amplitudes() {
        let g = ghz_state();
        assert!((g.norm() - 1.0).abs() < 1e-15);
        assert!((g.amp(&BasisLabel::new(["+z", "+z", "+z"])).unwrap() - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert_eq!(g.amp(&BasisLabel::new(["+z", "+z", "-z"])).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn defining_eigenvalues() {
        let checks = check_defining_eigenvalues();
        for (check, (_, expected)) in checks.iter().zip(DEFINING_PRODUCTS) {
            assert!((check.eigenvalue - expected).abs() < 1e-12, "{}", check.operator);
            assert!(check.imaginary.abs() < 1e-12);
            assert!(check.residual < 1e-12);
        }
        assert_eq!(checks[3].operator, "XXX");
        let r = single_site_residual(Direction::x(), 0);
        assert!((r - 1.0).abs() < 1e-12);
        assert!(single_site_residual(Direction::z(), 2) > 0.5);
    }

    #[test]
    fn amplitude_examples() {
        let xs = TripleDirections([Direction::x(); 3]);
        assert!(compat_amplitude(&xs, [Sign::Plus; 3]).norm() < 1e-15);
        for w in MERMIN_WITNESSES {
            assert!((site_amplitude(&w).norm_sqr() - 0.25).abs() < 1e-12);
        }
        let consistent = [Sign::Minus, Sign::Minus, Sign::Plus];
        assert!(compat_amplitude(&xs, consistent).norm() < 1e-14);
    }

    #[test]
    fn amplitude_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let t = TripleDirections([
                Direction::random(&mut rng),
                Direction::random(&mut rng),
                Direction::random(&mut rng),
            ]);
            let signs = [Sign::Plus; 3];
            assert!((compat_amplitude(&t, signs) - closed_form(&t)).norm() < 1e-14);
            let s = [Sign::Minus, Sign::Plus, Sign::Minus];
            let folded = TripleDirections([fold(t.0[0], s[0]), t.0[1], fold(t.0[2], s[2])]);
            assert!((compat_amplitude(&t, s).norm() - closed_form(&folded).norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn condition_examples() {
        assert!(orthogonality_condition(&triple([(FRAC_PI_2, 0.0); 3])));
        let xyy = triple([(FRAC_PI_2, 0.0), (FRAC_PI_2, FRAC_PI_2), (FRAC_PI_2, FRAC_PI_2)]);
        assert!(!orthogonality_condition(&xyy));
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let mut angles = [(0.0, 0.0); 3];
            for a in &mut angles {
                *a = (rng.gen_range(0.0..FRAC_PI_2), 0.0);
            }
            assert!(!orthogonality_condition(&triple(angles)));
        }
    }

    #[test]
    fn condition_at_the_poles_is_finite_and_matches_amplitude() {
        let cases = [
            ([(0.0, 0.0), (PI, 0.0), (1.0, 2.0)], true),
            ([(0.0, 0.0), (1.0, 0.5), (2.0, 1.0)], false),
            ([(PI, 0.0), (1.0, 0.0), (2.0, 0.0)], false),
            ([(0.0, 0.0), (0.0, 0.0), (0.0, 0.0)], false),
            ([(PI, 0.0), (PI, 0.0), (0.0, 0.0)], true),
        ];
        for (angles, expected) in cases {
            let t = triple(angles);
            assert_eq!(orthogonality_condition(&t), expected, "{angles:?}");
            assert_eq!(
                compat_amplitude(&t, [Sign::Plus; 3]).norm() < AMPLITUDE_TOLERANCE,
                expected
            );
        }
        assert_eq!(log_cot_half(0.0), f64::INFINITY);
        assert_eq!(log_cot_half(PI), f64::NEG_INFINITY);
        assert!(log_cot_half(FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn constructed_surface_triples_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..500 {
            let ti = rng.gen_range(0.05..PI - 0.05);
            let tj = rng.gen_range(0.05..PI - 0.05);
            let Ok(tk) = solve_theta_k(ti, tj) else { continue };
            let (pi, pj) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
            let pk = (-(pi + pj)).rem_euclid(2.0 * PI);
            let t = triple([(ti, pi), (tj, pj), (tk, pk)]);
            assert!(orthogonality_condition(&t));
            assert!(compat_amplitude(&t, [Sign::Plus; 3]).norm() < AMPLITUDE_TOLERANCE);
            let shifted = triple([(ti, pi), (tj, pj), (tk, (pk + 0.3).rem_euclid(2.0 * PI))]);
            assert!(!orthogonality_condition(&shifted));
        }
    }

    #[test]
    fn mermin_enumeration() {
        let report = mermin_paradox_report();
        assert_eq!(report.xxx_eigenvalue_minus_one_count, 4);
        assert_eq!(
            report.xxx_minus_one_patterns,
            ["|+x,+x,-x>", "|+x,-x,+x>", "|-x,+x,+x>", "|-x,-x,-x>"]
        );
        assert_eq!(
            report.sitewise_consistent_pattern,
            Some([Sign::Minus, Sign::Minus, Sign::Plus])
        );
        assert!((report.consistent_pattern_eigenvalue.unwrap() - 1.0).abs() < 1e-12);
        assert!(report.consistent_pattern_ghz_amplitude.unwrap() < 1e-14);
        let by_label = |l: &str| report.patterns.iter().find(|p| p.label == l).unwrap();
        assert_eq!(by_label("|+x,+x,-x>").contradicts, [0, 1, 2]);
        assert_eq!(by_label("|+x,-x,+x>").contradicts, [0]);
        assert_eq!(by_label("|-x,+x,+x>").contradicts, [1]);
        assert_eq!(by_label("|-x,-x,-x>").contradicts, [2]);
        for p in &report.patterns {
            let expected = if p.xxx_eigenvalue < 0.0 { 0.25 } else { 0.0 };
            assert!((p.ghz_probability - expected).abs() < 1e-12);
        }
        let again = serde_json::to_string(&mermin_paradox_report()).unwrap();
        assert_eq!(serde_json::to_string(&report).unwrap(), again);
    }
}
