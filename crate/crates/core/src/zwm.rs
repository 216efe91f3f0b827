//! Induced coherence between two down-converters sharing an idler path.
//!
//! To first order the state is
//! `|vac⟩ + α T |1_i1 1_s1⟩ + α B |0_i1 1_s1⟩ + γ |1_i2 1_s2⟩` with
//! `α = g₁V₁ e^{iΩ}`, `Ω = ω_i[(t₂ − t₁) − d₁₂/c]` and `γ = g₂V₂`. The
//! attenuator splits the first idler into a transmitted part `T`, which is
//! indistinguishable from the second idler, and a blocked part `B`.
//!
//! The signal intensity `⟨ψ|E⁻E⁺|ψ⟩` with `E⁺ = a_s1 e^{iθ₁} + a_s2 e^{iθ₂}`
//! is `|α|² + |γ|² + 2|α||γ||T| cos(θ₂ − θ₁ + arg γ − arg α − arg T)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::LazyLock;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{apply, c, expectation, Basis, BasisLabel, Complex, Ket, Operator};

/// Vacuum light speed in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Operator and closed-form intensities must agree to this.
pub const INTENSITY_TOLERANCE: f64 = 1e-12;

/// `|T|² + |B|² = 1` tolerance.
pub const ATTENUATOR_TOLERANCE: f64 = 1e-12;

/// Largest `|gV|` accepted for a first-order state.
pub const COUPLING_LIMIT: f64 = 0.3;

/// `|gV|` above this draws a warning.
pub const COUPLING_WARNING: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZwmConfig {
    pub g1: Complex,
    pub g2: Complex,
    pub v1: Complex,
    pub v2: Complex,
    #[serde(rename = "T")]
    pub t_amp: Complex,
    #[serde(rename = "B")]
    pub b_amp: Complex,
    pub omega_i: f64,
    pub d12: f64,
    pub t1: f64,
    pub t2: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl Default for ZwmConfig {
    fn default() -> Self {
        Self {
            g1: c(0.1, 0.0),
            g2: c(0.1, 0.0),
            v1: c(1.0, 0.0),
            v2: c(1.0, 0.0),
            t_amp: c(1.0, 0.0),
            b_amp: c(0.0, 0.0),
            omega_i: 2.354_564_459_136_066e15,
            d12: 0.1,
            t1: 0.0,
            t2: 0.0,
            theta1: 0.0,
            theta2: 0.0,
        }
    }
}

fn finite(z: Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl ZwmConfig {
    /// Lossless attenuator with transmission `t`; the blocked amplitude is real.
    pub fn with_transmission(mut self, t: Complex) -> Self {
        self.t_amp = t;
        self.b_amp = c((1.0 - t.norm_sqr()).max(0.0).sqrt(), 0.0);
        self
    }

    /// Random valid configuration: `|gV| < 0.25`, lossless attenuator.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut polar = |r: f64| Complex::from_polar(rng.gen_range(0.0..r), rng.gen_range(0.0..TAU));
        let (g1, g2, v1, v2) = (polar(0.5), polar(0.5), polar(0.5), polar(0.5));
        let u: f64 = rng.gen_range(0.0..FRAC_PI_2);
        Self {
            g1,
            g2,
            v1,
            v2,
            t_amp: Complex::from_polar(u.cos(), rng.gen_range(0.0..TAU)),
            b_amp: Complex::from_polar(u.sin(), rng.gen_range(0.0..TAU)),
            omega_i: rng.gen_range(0.0..3e15),
            d12: rng.gen_range(0.0..1.0),
            t1: rng.gen_range(0.0..1e-12),
            t2: rng.gen_range(0.0..1e-12),
            theta1: rng.gen_range(0.0..TAU),
            theta2: rng.gen_range(0.0..TAU),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let complex = [self.g1, self.g2, self.v1, self.v2, self.t_amp, self.b_amp];
        let real = [self.omega_i, self.d12, self.t1, self.t2, self.theta1, self.theta2];
        if !complex.iter().all(|z| finite(*z)) || !real.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("interferometer parameters"));
        }
        let lossless = self.t_amp.norm_sqr() + self.b_amp.norm_sqr();
        if (lossless - 1.0).abs() > ATTENUATOR_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "|T|^2 + |B|^2 = {lossless}, expected 1"
            )));
        }
        if self.omega_i < 0.0 || self.d12 < 0.0 {
            return Err(Error::InvalidParameter("omega_i and d12 must be nonnegative".into()));
        }
        for (name, value) in [("g1*V1", self.g1 * self.v1), ("g2*V2", self.g2 * self.v2)] {
            if value.norm() > COUPLING_LIMIT {
                return Err(Error::InvalidParameter(format!(
                    "|{name}| = {} exceeds the first-order limit {COUPLING_LIMIT}",
                    value.norm()
                )));
            }
        }
        Ok(())
    }

    /// Couplings strong enough that second-order terms matter.
    pub fn warnings(&self) -> Vec<String> {
        [("g1*V1", self.g1 * self.v1), ("g2*V2", self.g2 * self.v2)]
            .into_iter()
            .filter(|(_, v)| v.norm() > COUPLING_WARNING)
            .map(|(name, v)| {
                format!(
                    "|{name}| = {} is above {COUPLING_WARNING}; first order is approximate",
                    v.norm()
                )
            })
            .collect()
    }

    /// `Ω = ω_i[(t₂ − t₁) − d₁₂/c]`.
    pub fn propagation_phase(&self) -> f64 {
        self.omega_i * ((self.t2 - self.t1) - self.d12 / SPEED_OF_LIGHT)
    }

    /// `α = g₁V₁ e^{iΩ}`.
    pub fn alpha(&self) -> Complex {
        self.g1 * self.v1 * Complex::from_polar(1.0, self.propagation_phase())
    }

    /// `γ = g₂V₂`.
    pub fn gamma(&self) -> Complex {
        self.g2 * self.v2
    }
}

/// Provenance tokens `(i1, s1, i2, s2)` of the four first-order terms.
const TERMS: [[&str; 4]; 4] = [
    ["0", "0", "0", "0"],
    ["1", "1", "0", "0"],
    ["0", "1", "0", "0"],
    ["0", "0", "1", "1"],
];

static PROVENANCE_BASIS: LazyLock<Basis> =
    LazyLock::new(|| Basis::new(TERMS.iter().map(|t| BasisLabel::new(*t)).collect()).expect("static provenance basis"));

/// Occupations `(idler, s1, s2)`; both idler sources feed the one idler mode.
static MODE_BASIS: LazyLock<Basis> = LazyLock::new(|| {
    let occupation = Basis::single_site(&["0", "1"]).expect("static occupation basis");
    occupation.tensor(&occupation).tensor(&occupation)
});

/// Labels `(i1, s1, i2, s2)`: vacuum, transmitted, blocked, second pair.
pub fn provenance_basis() -> Basis {
    PROVENANCE_BASIS.clone()
}

/// Eight occupation labels `(idler, s1, s2)`.
pub fn mode_basis() -> Basis {
    MODE_BASIS.clone()
}

fn mode_label(term: &[&'static str; 4]) -> BasisLabel {
    let idler = if term[0] == "1" || term[2] == "1" { "1" } else { "0" };
    BasisLabel::new([idler, term[1], term[3]])
}

/// Whether any term pairs an idler from the first source with a signal from
/// the second.
pub fn has_cross_coincidence(basis: &Basis) -> bool {
    basis.labels().iter().any(|l| {
        let t = l.tokens();
        t.len() == 4 && t[0] == "1" && t[3] == "1"
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ZwmState {
    /// Unit-norm state over the provenance basis.
    pub ket: Ket,
    /// Norm of the first-order state before normalization.
    pub first_order_norm: f64,
}

impl ZwmState {
    /// The first-order state exactly as built.
    pub fn first_order(&self) -> Ket {
        self.ket.scale(c(self.first_order_norm, 0.0))
    }
}

pub fn build_state(cfg: &ZwmConfig) -> Result<ZwmState> {
    cfg.validate()?;
    let alpha = cfg.alpha();
    let amps = vec![c(1.0, 0.0), alpha * cfg.t_amp, alpha * cfg.b_amp, cfg.gamma()];
    let raw = Ket::new(provenance_basis(), amps)?;
    let first_order_norm = raw.norm();
    Ok(ZwmState {
        ket: raw.normalize()?,
        first_order_norm,
    })
}

/// `E⁺ = a_s1 e^{iθ₁} + a_s2 e^{iθ₂}` on the occupation basis.
pub fn signal_field_operator(theta1: f64, theta2: f64) -> Operator {
    let basis = mode_basis();
    let (e1, e2) = (Complex::from_polar(1.0, theta1), Complex::from_polar(1.0, theta2));
    Operator::from_columns(&basis, |label| {
        let t = label.tokens();
        let mut image = Ket::new(basis.clone(), vec![c(0.0, 0.0); basis.len()])?;
        if t[1] == "1" {
            let lowered = BasisLabel::new([t[0].clone(), "0".into(), t[2].clone()]);
            image = image.add(&Ket::basis_state(&basis, &lowered)?.scale(e1))?;
        }
        if t[2] == "1" {
            let lowered = BasisLabel::new([t[0].clone(), t[1].clone(), "0".into()]);
            image = image.add(&Ket::basis_state(&basis, &lowered)?.scale(e2))?;
        }
        Ok(image)
    })
    .expect("occupation ladder")
}

/// First-order state re-expressed over the occupation modes.
pub fn mode_state(state: &ZwmState) -> Result<Ket> {
    let raw = state.first_order();
    let basis = mode_basis();
    let terms: Vec<(BasisLabel, Complex)> = TERMS.iter().zip(raw.amps()).map(|(t, a)| (mode_label(t), *a)).collect();
    Ket::from_terms(&basis, terms.iter().map(|(l, a)| (l, *a)))
}

/// Intensity from the closed form.
pub fn closed_form_intensity(cfg: &ZwmConfig) -> f64 {
    let (alpha, gamma, t) = (cfg.alpha(), cfg.gamma(), cfg.t_amp);
    alpha.norm_sqr() + gamma.norm_sqr() + 2.0 * alpha.norm() * gamma.norm() * t.norm() * interference_phase(cfg).cos()
}

/// `θ₂ − θ₁ + arg γ − arg α − arg T`, the fringe argument.
pub fn interference_phase(cfg: &ZwmConfig) -> f64 {
    cfg.theta2 - cfg.theta1 + cfg.gamma().arg() - cfg.alpha().arg() - cfg.t_amp.arg()
}

/// `⟨ψ|E⁻E⁺|ψ⟩` on the first-order state.
pub fn operator_intensity(cfg: &ZwmConfig) -> Result<f64> {
    let psi = mode_state(&build_state(cfg)?)?;
    let field = signal_field_operator(cfg.theta1, cfg.theta2);
    let number = field.adjoint().compose(&field)?;
    let value = expectation(&number, &psi)?;
    let direct = apply(&field, &psi)?.norm().powi(2);
    if (value.re - direct).abs() > INTENSITY_TOLERANCE || value.im.abs() > INTENSITY_TOLERANCE {
        return Err(Error::CheckFailed {
            check: "detector operator",
            detail: format!("<E-E+> = {value} but |E+ psi|^2 = {direct}"),
        });
    }
    Ok(value.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Intensity {
    pub closed_form: f64,
    pub operator_form: f64,
    /// Intensity of the unit-norm state.
    pub normalized: f64,
}

/// Signal intensity, computed both ways and checked to agree.
pub fn signal_intensity(cfg: &ZwmConfig) -> Result<Intensity> {
    let operator_form = operator_intensity(cfg)?;
    let closed_form = closed_form_intensity(cfg);
    if (operator_form - closed_form).abs() > INTENSITY_TOLERANCE {
        return Err(Error::CheckFailed {
            check: "intensity forms",
            detail: format!("operator {operator_form} vs closed form {closed_form}"),
        });
    }
    let norm = build_state(cfg)?.first_order_norm;
    Ok(Intensity {
        closed_form,
        operator_form,
        normalized: operator_form / (norm * norm),
    })
}

/// Intensity with `θ₂` advanced by each offset.
pub fn scan_intensity(cfg: &ZwmConfig, offsets: &[f64]) -> Result<Vec<(f64, f64)>> {
    if offsets.is_empty() {
        return Err(Error::InvalidParameter("fringe scan needs at least one offset".into()));
    }
    offsets
        .iter()
        .map(|&offset| {
            let shifted = ZwmConfig {
                theta2: cfg.theta2 + offset,
                ..*cfg
            };
            Ok((offset, signal_intensity(&shifted)?.operator_form))
        })
        .collect()
}

/// `n` offsets evenly covering one period.
pub fn uniform_offsets(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// `I(o) = mean + amplitude·cos(o + phase)` fitted to a full-period scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeFit {
    pub mean: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl FringeFit {
    pub fn visibility(&self) -> f64 {
        self.amplitude / self.mean
    }
}

/// First Fourier component of a scan over [`uniform_offsets`].
pub fn fringe_fit(scan: &[(f64, f64)]) -> Result<FringeFit> {
    if scan.len() < 3 {
        return Err(Error::InvalidParameter("fringe fit needs at least three points".into()));
    }
    let n = scan.len() as f64;
    let mean = scan.iter().map(|(_, i)| i).sum::<f64>() / n;
    let a = 2.0 / n * scan.iter().map(|(o, i)| i * o.cos()).sum::<f64>();
    let b = 2.0 / n * scan.iter().map(|(o, i)| i * o.sin()).sum::<f64>();
    Ok(FringeFit {
        mean,
        amplitude: a.hypot(b),
        phase: (-b).atan2(a),
    })
}

/// `(I_max − I_min)/(I_max + I_min) = 2|α||γ||T|/(|α|² + |γ|²)`.
pub fn visibility(cfg: &ZwmConfig) -> Result<f64> {
    cfg.validate()?;
    let (alpha, gamma) = (cfg.alpha().norm(), cfg.gamma().norm());
    let denominator = alpha * alpha + gamma * gamma;
    if denominator == 0.0 {
        return Err(Error::InvalidParameter(
            "visibility undefined with both couplings off".into(),
        ));
    }
    Ok(2.0 * alpha * gamma * cfg.t_amp.norm() / denominator)
}

/// Fringe extremes `(I_max, I_min)` of the closed form.
pub fn fringe_extremes(cfg: &ZwmConfig) -> (f64, f64) {
    let (alpha, gamma) = (cfg.alpha().norm(), cfg.gamma().norm());
    let base = alpha * alpha + gamma * gamma;
    let swing = 2.0 * alpha * gamma * cfg.t_amp.norm();
    (base + swing, base - swing)
}

/// Change of the fitted fringe phase when `t₂` is delayed by `dt`.
pub fn fringe_shift(cfg: &ZwmConfig, dt: f64, points: usize) -> Result<f64> {
    let offsets = uniform_offsets(points);
    let before = fringe_fit(&scan_intensity(cfg, &offsets)?)?;
    let later = ZwmConfig {
        t2: cfg.t2 + dt,
        ..*cfg
    };
    let after = fringe_fit(&scan_intensity(&later, &offsets)?)?;
    Ok(after.phase - before.phase)
}

/// Earliest time after the attenuator changes that the detector can respond.
pub fn min_time_lag(d_attenuator_to_dc2: f64, d_dc2_to_detector: f64) -> Result<f64> {
    for d in [d_attenuator_to_dc2, d_dc2_to_detector] {
        if !d.is_finite() {
            return Err(Error::NonFinite("distance"));
        }
        if d < 0.0 {
            return Err(Error::InvalidParameter(format!("distance {d} is negative")));
        }
    }
    Ok(d_attenuator_to_dc2 / SPEED_OF_LIGHT + d_dc2_to_detector / SPEED_OF_LIGHT)
}
