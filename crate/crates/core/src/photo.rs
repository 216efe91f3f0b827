//! Two-site photoelectric toy model.
//!
//! A piece of metal with two significant locations `±x`. A photon at a site
//! is passed on with amplitude `A`, turned into a photoelectron with `B_{±x}`
//! or into some other product with `C_{±x}`. Every output ket is renormalized;
//! only relative amplitudes carry meaning.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{apply, apply_adjoint, c, Basis, BasisLabel, Complex, Ket, Operator};

/// Tolerance for the symmetric-metal precondition.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Site {
    #[serde(rename = "+x")]
    Plus,
    #[serde(rename = "-x")]
    Minus,
}

impl Site {
    pub const BOTH: [Site; 2] = [Site::Plus, Site::Minus];

    fn slot(self) -> usize {
        match self {
            Site::Plus => 0,
            Site::Minus => 1,
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Site::Plus => "+x",
            Site::Minus => "-x",
        })
    }
}

impl FromStr for Site {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+x" | "+" | "plus" => Ok(Site::Plus),
            "-x" | "-" | "minus" => Ok(Site::Minus),
            other => Err(Error::InvalidParameter(format!("site `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Photon,
    Electron,
    Other,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::Photon, Species::Electron, Species::Other];
}

/// One occupied slot of `|I₊, I₋, J₊, J₋, K₊, K₋⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Excitation {
    pub species: Species,
    pub site: Site,
}

impl Excitation {
    /// Basis order: photon, electron, other; `+x` before `−x` within each.
    pub const ALL: [Excitation; 6] = [
        Excitation::new(Species::Photon, Site::Plus),
        Excitation::new(Species::Photon, Site::Minus),
        Excitation::new(Species::Electron, Site::Plus),
        Excitation::new(Species::Electron, Site::Minus),
        Excitation::new(Species::Other, Site::Plus),
        Excitation::new(Species::Other, Site::Minus),
    ];

    pub const fn new(species: Species, site: Site) -> Self {
        Self { species, site }
    }

    pub fn index(self) -> usize {
        let block = match self.species {
            Species::Photon => 0,
            Species::Electron => 2,
            Species::Other => 4,
        };
        block + self.site.slot()
    }

    pub fn basis_label(self) -> BasisLabel {
        let i = self.index();
        BasisLabel::new((0..6).map(|k| if k == i { "1" } else { "0" }))
    }

    pub fn ket(self) -> Ket {
        Ket::basis_state(&photo_basis(), &self.basis_label()).expect("photo label")
    }
}

static PHOTO_BASIS: LazyLock<Basis> = LazyLock::new(|| {
    Basis::new(Excitation::ALL.iter().map(|e| e.basis_label()).collect()).expect("static photo basis")
});

/// The six single-excitation occupation labels.
pub fn photo_basis() -> Basis {
    PHOTO_BASIS.clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotoConfig {
    #[serde(rename = "A")]
    pub a: Complex,
    #[serde(rename = "B_plus")]
    pub b_plus: Complex,
    #[serde(rename = "B_minus")]
    pub b_minus: Complex,
    #[serde(rename = "C_plus")]
    pub c_plus: Complex,
    #[serde(rename = "C_minus")]
    pub c_minus: Complex,
}

impl Default for PhotoConfig {
    fn default() -> Self {
        Self {
            a: c(0.8, 0.0),
            b_plus: c(0.4, 0.0),
            b_minus: c(0.4, 0.0),
            c_plus: c(0.2, 0.0),
            c_minus: c(0.2, 0.0),
        }
    }
}

impl PhotoConfig {
    fn coefficients(&self) -> [Complex; 5] {
        [self.a, self.b_plus, self.b_minus, self.c_plus, self.c_minus]
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.coefficients();
        if all.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("photo amplitudes"));
        }
        if all.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(Error::InvalidParameter("all photo amplitudes are zero".into()));
        }
        Ok(())
    }

    pub fn b(&self, site: Site) -> Complex {
        match site {
            Site::Plus => self.b_plus,
            Site::Minus => self.b_minus,
        }
    }

    pub fn c(&self, site: Site) -> Complex {
        match site {
            Site::Plus => self.c_plus,
            Site::Minus => self.c_minus,
        }
    }

    /// `1/(|A|² + Σ|B|² + Σ|C|²)`.
    pub fn divisor(&self) -> f64 {
        1.0 / self.coefficients().iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn is_symmetric(&self) -> bool {
        (self.b_plus.norm() - self.b_minus.norm()).abs() < SYMMETRY_TOLERANCE
            && (self.c_plus.norm() - self.c_minus.norm()).abs() < SYMMETRY_TOLERANCE
    }
}

/// The S-operator as two same-site 3×3 blocks scaled by [`PhotoConfig::divisor`].
///
/// Per site, photon → `A·photon + B·electron + C·other`, electron →
/// `A·electron − B*·photon`, other → `A·other − C*·photon`. The blocks are not
/// isometries in general (complex `A`, or `B` and `C` both nonzero), so
/// callers renormalize.
pub fn build_photo_s(cfg: &PhotoConfig) -> Result<Operator> {
    cfg.validate()?;
    let basis = photo_basis();
    let n = basis.len();
    let mut m = nalgebra::DMatrix::from_element(n, n, c(0.0, 0.0));
    for site in Site::BOTH {
        let p = Excitation::new(Species::Photon, site).index();
        let e = Excitation::new(Species::Electron, site).index();
        let o = Excitation::new(Species::Other, site).index();
        let (b, cc) = (cfg.b(site), cfg.c(site));
        m[(p, p)] = cfg.a;
        m[(e, p)] = b;
        m[(o, p)] = cc;
        m[(e, e)] = cfg.a;
        m[(p, e)] = -b.conj();
        m[(o, o)] = cfg.a;
        m[(p, o)] = -cc.conj();
    }
    Operator::new(basis, m.map(|z| z * cfg.divisor()))
}

/// `(e^{iφ}|photon@+x⟩ + e^{−iφ}|photon@−x⟩)/√2`.
pub fn uniform_illumination(phi: f64) -> Ket {
    let mut amps = vec![c(0.0, 0.0); 6];
    amps[0] = Complex::from_polar(FRAC_1_SQRT_2, phi);
    amps[1] = Complex::from_polar(FRAC_1_SQRT_2, -phi);
    Ket::new(photo_basis(), amps).expect("six amplitudes")
}

/// `S` on uniform illumination, renormalized.
pub fn evolve_uniform(cfg: &PhotoConfig, phi: f64) -> Result<Ket> {
    apply(&build_photo_s(cfg)?, &uniform_illumination(phi))?.normalize()
}

/// Ket form of `⟨electron@site|S`, renormalized.
pub fn pre_image_of_local_electron(cfg: &PhotoConfig, site: Site) -> Result<Ket> {
    let electron = Excitation::new(Species::Electron, site).ket();
    apply_adjoint(&build_photo_s(cfg)?, &electron)?.normalize()
}

/// Share of `|ψ|²` carried by labels at `site`.
pub fn site_fraction(psi: &Ket, site: Site) -> f64 {
    let total = psi.norm().powi(2);
    let local: f64 = Excitation::ALL
        .iter()
        .filter(|e| e.site == site)
        .map(|e| psi.amps()[e.index()].norm_sqr())
        .sum();
    local / total
}

/// `(P(+x), P(−x))` within one species, `None` when the species is absent.
pub fn species_marginal(psi: &Ket, species: Species) -> Option<(f64, f64)> {
    let p = |site| psi.amps()[Excitation::new(species, site).index()].norm_sqr();
    let (plus, minus) = (p(Site::Plus), p(Site::Minus));
    let total = plus + minus;
    (total > 0.0).then(|| (plus / total, minus / total))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpeciesRow {
    pub species: Species,
    pub probability: f64,
    pub marginal: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PreImageRow {
    pub site: Site,
    pub ket: Ket,
    pub same_site_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    pub config: PhotoConfig,
    pub phi: f64,
    pub evolved: Ket,
    pub species: Vec<SpeciesRow>,
    pub pre_images: Vec<PreImageRow>,
}

/// Site marginals of the evolved uniform state and locality of each
/// local-electron pre-image, for a metal with `|B₊| = |B₋|` and `|C₊| = |C₋|`.
pub fn uniformity_report(cfg: &PhotoConfig, phi: f64) -> Result<UniformityReport> {
    cfg.validate()?;
    if !cfg.is_symmetric() {
        return Err(Error::InvalidParameter(
            "uniformity report needs |B+| = |B-| and |C+| = |C-|".into(),
        ));
    }
    let evolved = evolve_uniform(cfg, phi)?;
    let species = Species::ALL
        .iter()
        .map(|&s| SpeciesRow {
            species: s,
            probability: Site::BOTH
                .iter()
                .map(|&site| evolved.amps()[Excitation::new(s, site).index()].norm_sqr())
                .sum(),
            marginal: species_marginal(&evolved, s),
        })
        .collect();
    let pre_images = Site::BOTH
        .iter()
        .map(|&site| {
            let ket = pre_image_of_local_electron(cfg, site)?;
            Ok(PreImageRow {
                site,
                same_site_fraction: site_fraction(&ket, site),
                ket,
            })
        })
        .collect::<Result<_>>()?;
    Ok(UniformityReport {
        config: *cfg,
        phi,
        evolved,
        species,
        pre_images,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::inner;

    fn asymmetric() -> PhotoConfig {
        PhotoConfig {
            a: c(0.5, 0.3),
            b_plus: c(0.2, -0.6),
            b_minus: c(0.1, 0.25),
            c_plus: c(-0.3, 0.1),
            c_minus: c(0.05, 0.4),
        }
    }

    fn amp(psi: &Ket, s: Species, site: Site) -> Complex {
        psi.amps()[Excitation::new(s, site).index()]
    }

    #[test]
    fn basis_is_the_occupation_tuples_in_order() {
        let shown: Vec<String> = photo_basis().labels().iter().map(|l| l.to_string()).collect();
        assert_eq!(shown[0], "1,0,0,0,0,0");
        assert_eq!(shown[3], "0,0,0,1,0,0");
        assert_eq!(shown[5], "0,0,0,0,0,1");
    }

    #[test]
    fn trivial_and_pure_absorber_operators() {
        let id = PhotoConfig {
            a: c(1.0, 0.0),
            b_plus: c(0.0, 0.0),
            b_minus: c(0.0, 0.0),
            c_plus: c(0.0, 0.0),
            c_minus: c(0.0, 0.0),
        };
        let s = build_photo_s(&id).unwrap();
        assert_eq!(s.max_abs_diff(&Operator::identity(&photo_basis())).unwrap(), 0.0);
        let absorber = PhotoConfig {
            a: c(0.0, 0.0),
            b_plus: c(1.0, 0.0),
            ..id
        };
        let s = build_photo_s(&absorber).unwrap();
        let out = apply(&s, &Excitation::new(Species::Photon, Site::Plus).ket()).unwrap();
        assert_eq!(out, Excitation::new(Species::Electron, Site::Plus).ket());
        let zero = PhotoConfig { a: c(0.0, 0.0), ..id };
        assert!(build_photo_s(&zero).is_err());
    }

    #[test]
    fn blocks_never_mix_sites() {
        let s = build_photo_s(&asymmetric()).unwrap();
        for from in Excitation::ALL {
            for to in Excitation::ALL {
                if from.site != to.site {
                    assert_eq!(s.matrix()[(to.index(), from.index())], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn uniform_illumination_is_even() {
        let u = uniform_illumination(0.0);
        assert!((u.amps()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        assert!((u.amps()[1] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        let u = uniform_illumination(0.8);
        assert!((site_fraction(&u, Site::Plus) - 0.5).abs() < 1e-15);
        for e in &Excitation::ALL[2..] {
            assert_eq!(inner(&e.ket(), &u).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn evolved_state_has_the_expected_relative_amplitudes() {
        let cfg = asymmetric();
        let phi = 0.37;
        let psi = evolve_uniform(&cfg, phi).unwrap();
        let (ep, em) = (Complex::from_polar(1.0, phi), Complex::from_polar(1.0, -phi));
        let reference = amp(&psi, Species::Photon, Site::Plus) / (cfg.a * ep);
        let expected = [
            (Species::Photon, Site::Minus, cfg.a * em),
            (Species::Electron, Site::Plus, cfg.b_plus * ep),
            (Species::Electron, Site::Minus, cfg.b_minus * em),
            (Species::Other, Site::Plus, cfg.c_plus * ep),
            (Species::Other, Site::Minus, cfg.c_minus * em),
        ];
        for (s, site, z) in expected {
            assert!((amp(&psi, s, site) / z - reference).norm() < 1e-12);
        }
        let ratio =
            amp(&psi, Species::Electron, Site::Plus).norm_sqr() / amp(&psi, Species::Electron, Site::Minus).norm_sqr();
        assert!((ratio - (cfg.b_plus / cfg.b_minus).norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn phase_covariance() {
        let cfg = asymmetric();
        let (phi, delta) = (0.2, 1.1);
        let a = evolve_uniform(&cfg, phi).unwrap();
        let b = evolve_uniform(&cfg, phi + delta).unwrap();
        for e in Excitation::ALL {
            let factor = match e.site {
                Site::Plus => Complex::from_polar(1.0, delta),
                Site::Minus => Complex::from_polar(1.0, -delta),
            };
            assert!((b.amps()[e.index()] - a.amps()[e.index()] * factor).norm() < 1e-15);
        }
    }

    #[test]
    fn pre_images_are_local() {
        let cfg = asymmetric();
        for site in Site::BOTH {
            let pre = pre_image_of_local_electron(&cfg, site).unwrap();
            assert!((site_fraction(&pre, site) - 1.0).abs() < 1e-15);
            let ratio = amp(&pre, Species::Photon, site) / amp(&pre, Species::Electron, site);
            assert!((ratio - cfg.b(site).conj() / cfg.a.conj()).norm() < 1e-12);
            assert_eq!(amp(&pre, Species::Other, site), c(0.0, 0.0));
        }
        let absorber = PhotoConfig { a: c(0.0, 0.0), ..cfg };
        let pre = pre_image_of_local_electron(&absorber, Site::Plus).unwrap();
        let photon = Excitation::new(Species::Photon, Site::Plus).ket();
        assert!(pre.distance_up_to_phase(&photon).unwrap() < 1e-15);
        let free = PhotoConfig {
            b_plus: c(0.0, 0.0),
            ..cfg
        };
        let pre = pre_image_of_local_electron(&free, Site::Plus).unwrap();
        let electron = Excitation::new(Species::Electron, Site::Plus).ket();
        assert!(pre.distance_up_to_phase(&electron).unwrap() < 1e-15);
    }

    #[test]
    fn pure_absorber_matches_the_photoelectron_forms() {
        let cfg = PhotoConfig {
            a: c(0.0, 0.0),
            b_plus: c(0.3, 0.4),
            b_minus: c(-0.1, 0.2),
            c_plus: c(0.0, 0.0),
            c_minus: c(0.0, 0.0),
        };
        let phi = 0.9;
        let psi = evolve_uniform(&cfg, phi).unwrap();
        let expected = Ket::new(
            photo_basis(),
            vec![
                c(0.0, 0.0),
                c(0.0, 0.0),
                cfg.b_plus * Complex::from_polar(1.0, phi),
                cfg.b_minus * Complex::from_polar(1.0, -phi),
                c(0.0, 0.0),
                c(0.0, 0.0),
            ],
        )
        .unwrap()
        .normalize()
        .unwrap();
        assert!(psi.distance_up_to_phase(&expected).unwrap() < 1e-12);
        for site in Site::BOTH {
            let pre = pre_image_of_local_electron(&cfg, site).unwrap();
            let photon = Excitation::new(Species::Photon, site)
                .ket()
                .scale(cfg.b(site).conj())
                .normalize()
                .unwrap();
            assert!(pre.distance_up_to_phase(&photon).unwrap() < 1e-12);
        }
    }

    #[test]
    fn symmetric_metal_stays_uniform() {
        let cfg = PhotoConfig {
            b_plus: Complex::from_polar(0.4, 0.3),
            b_minus: Complex::from_polar(0.4, -1.2),
            ..PhotoConfig::default()
        };
        let report = uniformity_report(&cfg, 0.6).unwrap();
        for row in &report.species {
            let (p, m) = row.marginal.unwrap();
            assert!((p - 0.5).abs() < 1e-15 && (m - 0.5).abs() < 1e-15);
        }
        let plain = uniformity_report(&PhotoConfig::default(), 0.0).unwrap();
        assert_eq!(plain.species[1].marginal, Some((0.5, 0.5)));
        for row in &report.pre_images {
            assert!((row.same_site_fraction - 1.0).abs() < 1e-15);
        }
        let total: f64 = report.species.iter().map(|s| s.probability).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(uniformity_report(&asymmetric(), 0.0).is_err());
        let no_other = PhotoConfig {
            c_plus: c(0.0, 0.0),
            c_minus: c(0.0, 0.0),
            ..PhotoConfig::default()
        };
        assert!(uniformity_report(&no_other, 0.0).unwrap().species[2].marginal.is_none());
    }
}
