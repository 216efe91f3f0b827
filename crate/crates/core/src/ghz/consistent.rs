//! Spin assignments for all three particles that try to stay compatible with
//! the GHZ state.
//!
//! Each particle has a boundary `b`, a chosen pole and four latitude bands cut
//! at `min(b, π−b)`, `π/2` and `max(b, π−b)`. The pole band and the band
//! between the equator and the far boundary carry spin `+1`; their antipodes
//! carry `−1`. In `L = log cot(θ/2)` a north-pole particle allows
//! `L ∈ (a, ∞) ∪ (−a, 0)` and a south-pole particle `L ∈ (−∞, −a) ∪ (0, a)`,
//! with `a = |log cot(b/2)|`.
//!
//! Only sets with every pole equal and every `a = 0` keep `ΣL` away from zero.
//! Mixed-pole sets contain triples on the `ΣL = 0` surface, which
//! [`find_orthogonal_witness`] exhibits; they are orthogonal once the phases
//! also sum to zero, a measure-zero event that uniform sampling never hits.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    compat_amplitude, fold, log_cot_half, orthogonality_condition, surface_log, TripleDirections, AMPLITUDE_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::qcore::{Direction, Sign};

/// Half-width of the undefined band around each boundary.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Samples per independently seeded chunk.
pub const CHUNK_SIZE: usize = 1024;

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Tolerance on `∏ cot(θ/2) = 1` for a constructed set.
const PRODUCT_TOLERANCE: f64 = 1e-9;

/// Clamp for unbounded `L` ranges when constructing witnesses.
const L_CLAMP: f64 = 20.0;

/// Seed of chunk `index`; independent of how chunks are scheduled.
pub fn chunk_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add((index as u64).wrapping_mul(SEED_STRIDE))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Pole {
    #[serde(rename = "+z")]
    North,
    #[serde(rename = "-z")]
    South,
}

impl fmt::Display for Pole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pole::North => "+z",
            Pole::South => "-z",
        })
    }
}

impl FromStr for Pole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+z" | "z" | "n" | "north" | "N" => Ok(Pole::North),
            "-z" | "s" | "south" | "S" => Ok(Pole::South),
            other => Err(Error::InvalidParameter(format!("pole `{other}`"))),
        }
    }
}

/// Latitude interval `lo..hi` with per-end closure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub closed_lo: bool,
    pub closed_hi: bool,
}

impl Band {
    fn new(lo: f64, hi: f64, closed_lo: bool, closed_hi: bool) -> Self {
        Self {
            lo,
            hi,
            closed_lo,
            closed_hi,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo || (self.hi == self.lo && !(self.closed_lo && self.closed_hi))
    }

    pub fn contains(&self, theta: f64) -> bool {
        let above = theta > self.lo || (self.closed_lo && theta == self.lo);
        let below = theta < self.hi || (self.closed_hi && theta == self.hi);
        above && below
    }

    /// Solid angle over `2π`.
    pub fn area(&self) -> f64 {
        self.lo.cos() - self.hi.cos()
    }

    /// `L` interval as `(min, max)`; `L` decreases with `θ`.
    fn log_range(&self) -> (f64, f64) {
        (log_cot_half(self.hi), log_cot_half(self.lo))
    }

    fn sample_theta<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (top, bottom) = (self.lo.cos(), self.hi.cos());
        let u: f64 = rng.gen();
        (top - u * (top - bottom)).clamp(-1.0, 1.0).acos()
    }
}

/// Spin value a set assigns to one measurement direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinAssignment {
    Up,
    Down,
    Undefined,
}

impl SpinAssignment {
    pub fn sign(self) -> Option<Sign> {
        match self {
            SpinAssignment::Up => Some(Sign::Plus),
            SpinAssignment::Down => Some(Sign::Minus),
            SpinAssignment::Undefined => None,
        }
    }

    pub fn value(self) -> i8 {
        match self {
            SpinAssignment::Up => 1,
            SpinAssignment::Down => -1,
            SpinAssignment::Undefined => 0,
        }
    }
}

impl Serialize for SpinAssignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistentSet {
    poles: [Pole; 3],
    boundaries: [f64; 3],
    epsilon: f64,
    closed: bool,
    /// Bands assigned `+1` per particle; `−1` bands are their antipodes.
    allowed: [Vec<Band>; 3],
}

impl ConsistentSet {
    pub fn poles(&self) -> [Pole; 3] {
        self.poles
    }

    pub fn boundaries(&self) -> [f64; 3] {
        self.boundaries
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn allowed(&self, particle: usize) -> &[Band] {
        &self.allowed[particle]
    }

    /// All poles equal and every boundary on the equator.
    pub fn hemisphere(pole: Pole, epsilon: f64) -> Result<Self> {
        build_consistent_set(FRAC_PI_2, FRAC_PI_2, [pole; 3], epsilon)
    }

    /// No exclusion bands, and each particle's own boundary `θ_b` belongs to
    /// its adjacent `+1` band. The boundary triple then sits on the product-1
    /// surface with defined spins.
    pub fn boundary_inclusive(theta_i: f64, theta_j: f64, poles: [Pole; 3]) -> Result<Self> {
        let boundaries = boundaries_for(theta_i, theta_j)?;
        if boundaries.iter().any(|b| (b - FRAC_PI_2).abs() < 1e-12) {
            return Err(Error::InvalidParameter(
                "boundary-inclusive sets need every boundary off the equator".into(),
            ));
        }
        let allowed = std::array::from_fn(|p| bands(poles[p], boundaries[p], 0.0, true));
        Ok(Self {
            poles,
            boundaries,
            epsilon: 0.0,
            closed: true,
            allowed,
        })
    }
}

impl fmt::Display for ConsistentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.boundaries;
        write!(
            f,
            "poles ({}, {}, {}) boundaries ({:.6}, {:.6}, {:.6}) epsilon {:e}{}",
            self.poles[0],
            self.poles[1],
            self.poles[2],
            b[0],
            b[1],
            b[2],
            self.epsilon,
            if self.closed { " closed" } else { "" }
        )
    }
}

fn cot_half(theta: f64) -> f64 {
    let (s, c) = (theta / 2.0).sin_cos();
    c / s
}

fn check_open_angle(theta: f64, what: &str) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("boundary angle"));
    }
    if theta <= 0.0 || theta >= PI {
        return Err(Error::InvalidParameter(format!(
            "{what} must lie strictly between 0 and pi, got {theta}"
        )));
    }
    Ok(())
}

/// `θ_k` with `cot(θ_i/2)·cot(θ_j/2)·cot(θ_k/2) = 1`.
pub fn solve_theta_k(theta_i: f64, theta_j: f64) -> Result<f64> {
    check_open_angle(theta_i, "theta_i")?;
    check_open_angle(theta_j, "theta_j")?;
    Ok(2.0 * (cot_half(theta_i) * cot_half(theta_j)).atan())
}

fn boundaries_for(theta_i: f64, theta_j: f64) -> Result<[f64; 3]> {
    let theta_k = solve_theta_k(theta_i, theta_j)?;
    let boundaries = [theta_i, theta_j, theta_k];
    let product: f64 = boundaries.iter().map(|b| cot_half(*b)).product();
    if (product - 1.0).abs() > PRODUCT_TOLERANCE {
        return Err(Error::CheckFailed {
            check: "boundary product",
            detail: format!("prod cot(theta/2) = {product}"),
        });
    }
    if theta_k <= 0.0 || theta_k >= PI {
        return Err(Error::InvalidParameter(format!("theta_k = {theta_k} reaches a pole")));
    }
    Ok(boundaries)
}

/// `+1` bands of one particle.
fn bands(pole: Pole, boundary: f64, epsilon: f64, closed: bool) -> Vec<Band> {
    let near = boundary.min(PI - boundary);
    let far = boundary.max(PI - boundary);
    let at_near = closed && boundary <= FRAC_PI_2;
    let at_far = closed && boundary > FRAC_PI_2;
    let candidates = match pole {
        Pole::North => [
            Band::new(0.0, near - epsilon, true, at_near),
            Band::new(FRAC_PI_2 + epsilon, far - epsilon, false, at_far),
        ],
        Pole::South => [
            Band::new(far + epsilon, PI, at_far, true),
            Band::new(near + epsilon, FRAC_PI_2 - epsilon, at_near, false),
        ],
    };
    candidates.into_iter().filter(|b| !b.is_empty()).collect()
}

/// Set with boundaries `(θ_i, θ_j, θ_k)`, `θ_k` solved, and `ε`-wide
/// undefined bands at `θ_b`, `π − θ_b` and `π/2`.
pub fn build_consistent_set(theta_i: f64, theta_j: f64, poles: [Pole; 3], epsilon: f64) -> Result<ConsistentSet> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let boundaries = boundaries_for(theta_i, theta_j)?;
    let allowed: [Vec<Band>; 3] = std::array::from_fn(|p| bands(poles[p], boundaries[p], epsilon, false));
    for (p, b) in allowed.iter().enumerate() {
        let pole_band_present = b.iter().any(|band| band.lo == 0.0 || band.hi == PI);
        if !pole_band_present {
            return Err(Error::InvalidParameter(format!(
                "particle {} has an empty pole region at epsilon {epsilon}",
                p + 1
            )));
        }
    }
    Ok(ConsistentSet {
        poles,
        boundaries,
        epsilon,
        closed: false,
        allowed,
    })
}

/// Spin of `particle` (0, 1 or 2) along `n`: `+1` inside an allowed band,
/// `−1` when the antipode is, otherwise undefined.
pub fn assign_spin(set: &ConsistentSet, particle: usize, n: Direction) -> SpinAssignment {
    let theta = n.theta();
    let bands = &set.allowed[particle];
    if bands.iter().any(|b| b.contains(theta)) {
        SpinAssignment::Up
    } else if bands.iter().any(|b| b.contains(n.antipode().theta())) {
        SpinAssignment::Down
    } else {
        SpinAssignment::Undefined
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeResult {
    pub thetas: [f64; 3],
    pub phis: [f64; 3],
    pub signs: [Sign; 3],
    pub amplitude: f64,
    pub orthogonal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub samples: usize,
    pub seed: u64,
    /// Sampled triples satisfying the orthogonality condition.
    pub violations: usize,
    /// Sampled triples with `|amplitude| < 1e-10`.
    pub orthogonal_amplitudes: usize,
    /// Sampled directions whose assignment disagreed with the band they came from.
    pub assignment_mismatches: usize,
    pub min_amplitude: f64,
    /// Smallest `|Σ log cot(θ/2)|`, the distance from the product-1 surface.
    pub min_surface_margin: f64,
    pub above_surface: usize,
    pub below_surface: usize,
    /// The boundary triple at `φ = 0`, when every spin there is defined.
    pub probe: Option<ProbeResult>,
    pub passed: bool,
}

#[derive(Debug, Clone, Default)]
struct ChunkStats {
    samples: usize,
    violations: usize,
    orthogonal: usize,
    mismatches: usize,
    min_amplitude: f64,
    min_margin: f64,
    above: usize,
    below: usize,
}

impl ChunkStats {
    fn empty() -> Self {
        Self {
            min_amplitude: f64::INFINITY,
            min_margin: f64::INFINITY,
            ..Self::default()
        }
    }

    fn merge(mut self, other: ChunkStats) -> Self {
        self.samples += other.samples;
        self.violations += other.violations;
        self.orthogonal += other.orthogonal;
        self.mismatches += other.mismatches;
        self.min_amplitude = self.min_amplitude.min(other.min_amplitude);
        self.min_margin = self.min_margin.min(other.min_margin);
        self.above += other.above;
        self.below += other.below;
        self
    }
}

fn sample_allowed<R: Rng + ?Sized>(bands: &[Band], rng: &mut R) -> Result<Direction> {
    let total: f64 = bands.iter().map(Band::area).sum();
    let mut pick = rng.gen::<f64>() * total;
    let mut chosen = bands[bands.len() - 1];
    for band in bands {
        if pick < band.area() {
            chosen = *band;
            break;
        }
        pick -= band.area();
    }
    let theta = chosen.sample_theta(rng);
    let phi = rng.gen_range(0.0..2.0 * PI);
    Direction::new(theta, phi)
}

fn run_chunk(set: &ConsistentSet, seed: u64, count: usize) -> Result<ChunkStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = ChunkStats::empty();
    for _ in 0..count {
        let mut measured = [Direction::z(); 3];
        let mut signs = [Sign::Plus; 3];
        for p in 0..3 {
            // Directions landing exactly on an open band edge are redrawn.
            let (n, sign) = loop {
                let m = sample_allowed(&set.allowed[p], &mut rng)?;
                let n = if rng.gen_bool(0.5) { m.antipode() } else { m };
                let expected = if n == m { Sign::Plus } else { Sign::Minus };
                if let Some(sign) = assign_spin(set, p, n).sign() {
                    if sign != expected {
                        stats.mismatches += 1;
                    }
                    break (n, sign);
                }
            };
            measured[p] = n;
            signs[p] = sign;
        }
        let t = TripleDirections(measured);
        let folded = TripleDirections(std::array::from_fn(|p| fold(measured[p], signs[p])));
        if orthogonality_condition(&folded) {
            stats.violations += 1;
        }
        let amplitude = compat_amplitude(&t, signs).norm();
        if amplitude < AMPLITUDE_TOLERANCE {
            stats.orthogonal += 1;
        }
        stats.min_amplitude = stats.min_amplitude.min(amplitude);
        let log_sum = surface_log(&folded);
        stats.min_margin = stats.min_margin.min(log_sum.abs());
        if log_sum > 0.0 {
            stats.above += 1;
        } else if log_sum < 0.0 {
            stats.below += 1;
        }
        stats.samples += 1;
    }
    Ok(stats)
}

fn boundary_probe(set: &ConsistentSet) -> Result<Option<ProbeResult>> {
    let dirs: Vec<Direction> = set
        .boundaries
        .iter()
        .map(|b| Direction::new(*b, 0.0))
        .collect::<Result<_>>()?;
    let mut signs = [Sign::Plus; 3];
    for p in 0..3 {
        match assign_spin(set, p, dirs[p]).sign() {
            Some(s) => signs[p] = s,
            None => return Ok(None),
        }
    }
    let t = TripleDirections([dirs[0], dirs[1], dirs[2]]);
    let folded = TripleDirections(std::array::from_fn(|p| fold(dirs[p], signs[p])));
    let amplitude = compat_amplitude(&t, signs).norm();
    Ok(Some(ProbeResult {
        thetas: folded.0.map(|n| n.theta()),
        phis: folded.0.map(|n| n.phi()),
        signs,
        amplitude,
        orthogonal: orthogonality_condition(&folded) || amplitude < AMPLITUDE_TOLERANCE,
    }))
}

/// Seeded Monte-Carlo check that no assigned joint outcome is orthogonal to
/// the GHZ state.
///
/// Each sample draws a `+1` direction per particle uniformly by area, measures
/// along it or its antipode with equal odds, and folds the assigned outcome
/// back. Samples are split into chunks of [`CHUNK_SIZE`] seeded by
/// [`chunk_seed`], so the report does not depend on the worker count.
pub fn verify_consistent_set(set: &ConsistentSet, samples: usize, seed: u64) -> Result<VerificationReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let per_chunk: Vec<ChunkStats> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
            run_chunk(set, chunk_seed(seed, c), count)
        })
        .collect::<Result<_>>()?;
    let stats = per_chunk.into_iter().fold(ChunkStats::empty(), ChunkStats::merge);
    let probe = boundary_probe(set)?;
    let probe_orthogonal = probe.as_ref().is_some_and(|p| p.orthogonal);
    let probe_count = usize::from(probe_orthogonal);
    let passed = stats.violations == 0 && stats.orthogonal == 0 && stats.mismatches == 0 && !probe_orthogonal;
    Ok(VerificationReport {
        samples: stats.samples,
        seed,
        violations: stats.violations + probe_count,
        orthogonal_amplitudes: stats.orthogonal + probe_count,
        assignment_mismatches: stats.mismatches,
        min_amplitude: stats.min_amplitude,
        min_surface_margin: stats.min_margin,
        above_surface: stats.above,
        below_surface: stats.below,
        probe,
        passed,
    })
}

/// A triple of `+1` directions inside the set's open bands that is orthogonal
/// to the GHZ state, if one exists.
///
/// For each band combination whose `L` ranges straddle `ΣL = 0`, sets
/// `Lᵢ = clamp(c, loᵢ, hiᵢ)` with the level `c` solving `ΣL = 0`, and uses
/// `φ = 0`. Among the hits, returns the one farthest from the poles.
pub fn find_orthogonal_witness(set: &ConsistentSet) -> Option<TripleDirections> {
    let ranges: [Vec<(f64, f64)>; 3] = std::array::from_fn(|p| {
        set.allowed[p]
            .iter()
            .map(|b| {
                let (lo, hi) = b.log_range();
                let (lo, hi) = (lo.max(-L_CLAMP), hi.min(L_CLAMP));
                // stay off the band edges, which may be open
                let inset = 1e-3 * (hi - lo);
                (lo + inset, hi - inset)
            })
            .collect()
    });
    let mut best: Option<(f64, TripleDirections)> = None;
    for r0 in &ranges[0] {
        for r1 in &ranges[1] {
            for r2 in &ranges[2] {
                let combo = [*r0, *r1, *r2];
                let level = |c: f64| combo.iter().map(|&(lo, hi)| c.clamp(lo, hi)).sum::<f64>();
                if combo.iter().any(|(lo, hi)| lo >= hi) || level(-L_CLAMP) > 0.0 || level(L_CLAMP) < 0.0 {
                    continue;
                }
                let (mut a, mut b) = (-L_CLAMP, L_CLAMP);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if level(mid) < 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let mut logs = combo.map(|(lo, hi)| b.clamp(lo, hi));
                // put the residual on a coordinate with slack
                let residual: f64 = logs.iter().sum();
                if let Some(k) = (0..3).find(|&k| combo[k].0 < logs[k] - residual && logs[k] - residual < combo[k].1) {
                    logs[k] -= residual;
                }
                let thetas = logs.map(|l| 2.0 * (-l).exp().atan());
                let Ok(t) = TripleDirections::from_angles(thetas.map(|th| (th, 0.0))) else {
                    continue;
                };
                let all_up = (0..3).all(|p| assign_spin(set, p, t.0[p]) == SpinAssignment::Up);
                if !(all_up && orthogonality_condition(&t)) {
                    continue;
                }
                let clearance = thetas.iter().map(|th| th.sin()).fold(f64::INFINITY, f64::min);
                if best.as_ref().is_none_or(|(c, _)| clearance > *c) {
                    best = Some((clearance, t));
                }
            }
        }
    }
    best.map(|(_, t)| t)
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionRow {
    pub particle: usize,
    pub theta: f64,
    pub phi: f64,
    pub assignment: SpinAssignment,
}

/// Assignment on an `n_theta × n_phi` grid per particle, particles numbered from 1.
pub fn region_map(set: &ConsistentSet, n_theta: usize, n_phi: usize) -> Result<Vec<RegionRow>> {
    if n_theta < 2 || n_phi < 1 {
        return Err(Error::InvalidParameter(
            "region map needs n_theta >= 2 and n_phi >= 1".into(),
        ));
    }
    let mut rows = Vec::with_capacity(3 * n_theta * n_phi);
    for p in 0..3 {
        for i in 0..n_theta {
            let theta = PI * i as f64 / (n_theta - 1) as f64;
            for j in 0..n_phi {
                let phi = 2.0 * PI * j as f64 / n_phi as f64;
                let n = Direction::new(theta, phi)?;
                rows.push(RegionRow {
                    particle: p + 1,
                    theta: n.theta(),
                    phi: n.phi(),
                    assignment: assign_spin(set, p, n),
                });
            }
        }
    }
    Ok(rows)
}
