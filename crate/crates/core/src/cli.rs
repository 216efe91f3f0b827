//! Command-line front end.
//!
//! Every subcommand writes one JSON document or one CSV table. Floats are
//! printed with 17 significant digits, complex numbers as `[re, im]`, and
//! nothing depends on the clock, so equal argv and seed give equal bytes.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bell::{expectation_concurrent, expectation_qm, hidden_variable_table, AxisPair, HiddenVariableTable};
use crate::cat_eraser::{
    build_cat_s, eraser_table, evolve, initial_form_of_final, map_to_singlet, sew_state, CatLabel, CatPhases,
    EraserRow, SewState,
};
use crate::ghz::{
    build_consistent_set, check_defining_eigenvalues, compat_amplitude, find_orthogonal_witness, mermin_paradox_report,
    orthogonality_condition, region_map, single_site_residual, verify_consistent_set, Axis, ConsistentSet,
    EigenvalueCheck, MerminReport, Pole, TripleDirections, VerificationReport, AMPLITUDE_TOLERANCE, DEFAULT_EPSILON,
    DEFINING_PRODUCTS,
};
use crate::photo::{
    build_photo_s, evolve_uniform, pre_image_of_local_electron, site_fraction, uniformity_report, Excitation,
    PhotoConfig, Site, Species, UniformityReport,
};
use crate::qcore::{Complex, Direction, Ket, Operator, Sign};
use crate::selftest::{run_selftest, SelftestReport};
use crate::zwm::{
    fringe_extremes, fringe_fit, min_time_lag, scan_intensity, signal_intensity, uniform_offsets, visibility,
    FringeFit, Intensity, ZwmConfig,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "STATELAB_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "statelab", version, about = "Exact small-dimension quantum state models")]
struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; `-` forces standard output. Relative paths land in the output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Directory for output files when `--output` is absent or relative.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Bound for the subcommand's validation check.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Singlet correlation along two axes.
    Bell(BellArgs),
    /// The cat S-operator and its singlet correspondence.
    Cat(CatArgs),
    /// Joint outcome table of the two-cavity eraser.
    Eraser,
    /// GHZ eigenvalues and the site-wise consistency argument.
    GhzCheck(GhzCheckArgs),
    /// Build and verify a consistent set of spin assignments.
    GhzSet(GhzSetArgs),
    /// Induced coherence between two down-converters.
    Zwm(ZwmArgs),
    /// Two-site photoelectric locality.
    Photo(PhotoArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct BellArgs {
    /// First axis as `x,y,z`.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, conflicts_with = "a_theta")]
    a: Option<[f64; 3]>,
    #[arg(long, allow_hyphen_values = true)]
    a_theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "a_theta")]
    a_phi: Option<f64>,
    /// Second axis as `x,y,z`.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, conflicts_with = "b_theta")]
    b: Option<[f64; 3]>,
    #[arg(long, allow_hyphen_values = true)]
    b_theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "b_theta")]
    b_phi: Option<f64>,
    /// Draw this many seeded random axis pairs instead of one fixed pair.
    #[arg(long, conflicts_with_all = ["a", "a_theta", "b", "b_theta"])]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct CatArgs {
    #[arg(long, default_value_t = PI, allow_hyphen_values = true)]
    phi: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    chi: f64,
    /// Initial label, e.g. `+x,intact`.
    #[arg(long, default_value = "+x,intact", allow_hyphen_values = true)]
    initial: CatLabel,
}

#[derive(Debug, Args)]
struct GhzCheckArgs {
    /// Measurement directions as `x,y,z`, one flag per particle.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, conflicts_with = "thetas")]
    n1: Option<[f64; 3]>,
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, requires = "n1")]
    n2: Option<[f64; 3]>,
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, requires = "n2")]
    n3: Option<[f64; 3]>,
    /// Polar angles of the three directions as `t1,t2,t3`.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    thetas: Option<[f64; 3]>,
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, requires = "thetas")]
    phis: Option<[f64; 3]>,
    /// Outcome signs of the triple, e.g. `+,+,-`.
    #[arg(long, value_parser = parse_signs, allow_hyphen_values = true, default_value = "+,+,+")]
    signs: [Sign; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SetKind {
    /// Every particle up on one open hemisphere.
    Hemisphere,
    /// Banded set with boundaries solving the cot product rule.
    Banded,
    /// Banded set with closed boundaries and no exclusion margin.
    BoundaryInclusive,
}

#[derive(Debug, Args)]
struct GhzSetArgs {
    #[arg(long, value_enum, default_value_t = SetKind::Banded)]
    kind: SetKind,
    #[arg(long, default_value_t = PI / 3.0)]
    theta_i: f64,
    /// Defaults to `--theta-i`.
    #[arg(long)]
    theta_j: Option<f64>,
    /// Pole per particle for banded sets.
    #[arg(long, value_parser = parse_poles, allow_hyphen_values = true, default_value = "+z,-z,-z")]
    poles: [Pole; 3],
    /// Pole of a hemisphere set.
    #[arg(long, allow_hyphen_values = true, default_value = "+z")]
    pole: Pole,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Region-map grid size in θ (CSV output).
    #[arg(long, default_value_t = 37)]
    grid_theta: usize,
    /// Region-map grid size in φ (CSV output).
    #[arg(long, default_value_t = 24)]
    grid_phi: usize,
}

#[derive(Debug, Args)]
struct ZwmArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.1,0")]
    g1: Complex,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.1,0")]
    g2: Complex,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "1,0")]
    v1: Complex,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "1,0")]
    v2: Complex,
    /// Attenuator transmission amplitude.
    #[arg(long = "T", value_parser = parse_complex, allow_hyphen_values = true, default_value = "1,0")]
    t_amp: Complex,
    /// Blocked amplitude; defaults to the lossless real value `sqrt(1 - |T|^2)`.
    #[arg(long = "B", value_parser = parse_complex, allow_hyphen_values = true)]
    b_amp: Option<Complex>,
    /// Idler angular frequency in rad/s.
    #[arg(long, default_value_t = ZwmConfig::default().omega_i)]
    omega_i: f64,
    /// Idler path length between the down-converters in m.
    #[arg(long, default_value_t = 0.1)]
    d12: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t2: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta2: f64,
    /// Points in the fringe scan over one period.
    #[arg(long, default_value_t = 64)]
    points: usize,
    /// Attenuator to second down-converter distance in m.
    #[arg(long, default_value_t = 0.3)]
    d1: f64,
    /// Second down-converter to detector distance in m.
    #[arg(long, default_value_t = 0.6)]
    d2: f64,
    /// Bound on the gap between fitted and closed-form visibility.
    #[arg(long, default_value_t = 1e-9)]
    fit_tol: f64,
}

#[derive(Debug, Args)]
struct PhotoArgs {
    #[arg(long = "A", value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.8,0")]
    a: Complex,
    #[arg(long = "B-plus", value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.4,0")]
    b_plus: Complex,
    #[arg(long = "B-minus", value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.4,0")]
    b_minus: Complex,
    #[arg(long = "C-plus", value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.2,0")]
    c_plus: Complex,
    #[arg(long = "C-minus", value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.2,0")]
    c_minus: Complex,
    /// Illumination phase.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi: f64,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Run only these criteria; repeatable.
    #[arg(long = "criterion", value_parser = clap::value_parser!(u8).range(1..=11))]
    criteria: Vec<u8>,
}

fn parse_list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).collect()
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts = parse_list(s);
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part.parse::<f64>().map_err(|e| format!("`{part}`: {e}"))?;
    }
    Ok(out)
}

fn parse_complex(s: &str) -> std::result::Result<Complex, String> {
    let parts = parse_list(s);
    let num = |p: &str| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re,im`, got `{s}`")),
    }
}

fn parse_signs(s: &str) -> std::result::Result<[Sign; 3], String> {
    let parts = parse_list(s);
    let sign = |p: &str| match p {
        "+" | "+1" | "1" => Ok(Sign::Plus),
        "-" | "-1" => Ok(Sign::Minus),
        other => Err(format!("sign `{other}` is not + or -")),
    };
    match parts.as_slice() {
        [a, b, c] => Ok([sign(a)?, sign(b)?, sign(c)?]),
        _ => Err(format!("expected three signs, got `{s}`")),
    }
}

fn parse_poles(s: &str) -> std::result::Result<[Pole; 3], String> {
    let parts = parse_list(s);
    let pole = |p: &str| p.parse::<Pole>().map_err(|e| e.to_string());
    match parts.as_slice() {
        [a, b, c] => Ok([pole(a)?, pole(b)?, pole(c)?]),
        _ => Err(format!("expected three poles, got `{s}`")),
    }
}

/// Serializer formatter writing every float with 17 significant digits.
struct SigFigs;

impl serde_json::ser::Formatter for SigFigs {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// JSON text with the fixed float format; non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs);
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// The CSV spelling of a float: same digits as JSON, empty when non-finite.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv writes UTF-8")
}

/// A rendered document plus the checks it failed and any warnings.
struct Rendered {
    body: String,
    failures: Vec<String>,
    warnings: Vec<String>,
    /// Informational stderr lines.
    notes: Vec<String>,
}

enum Failure {
    Usage(String),
    Validation(String),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn usage(e: crate::Error) -> Failure {
    Failure::Usage(e.to_string())
}

type Outcome = std::result::Result<Rendered, Failure>;

struct Ctx {
    seed: u64,
    format: Format,
    tol: f64,
}

impl Ctx {
    fn render<T: Serialize>(&self, json: &T, csv: impl FnOnce() -> String) -> String {
        match self.format {
            Format::Json => to_json(json),
            Format::Csv => csv(),
        }
    }
}

/// `x < bound`, false for NaN.
fn below(x: f64, bound: f64) -> bool {
    x < bound
}

fn resolve_direction(cart: Option<[f64; 3]>, theta: Option<f64>, phi: Option<f64>) -> Result<Direction, Failure> {
    match (cart, theta) {
        (Some([x, y, z]), _) => Direction::from_cartesian(x, y, z).map_err(usage),
        (None, Some(t)) => Direction::new(t, phi.unwrap_or(0.0)).map_err(usage),
        (None, None) => Ok(Direction::z()),
    }
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct BellPairReport {
    a: [f64; 3],
    b: [f64; 3],
    P_concurrent: f64,
    P_qm: f64,
    diff: f64,
    minus_a_dot_b: f64,
}

#[derive(Serialize)]
struct BellReport {
    #[serde(flatten)]
    pair: BellPairReport,
    hidden_variables: HiddenVariableTable,
}

#[derive(Serialize)]
struct BellSampleReport {
    samples: usize,
    seed: u64,
    max_diff: f64,
    max_identity_residual: f64,
}

fn bell_pair(pair: &AxisPair) -> crate::Result<BellPairReport> {
    let concurrent = expectation_concurrent(pair);
    let qm = expectation_qm(pair)?;
    Ok(BellPairReport {
        a: pair.a.cartesian(),
        b: pair.b.cartesian(),
        P_concurrent: concurrent,
        P_qm: qm,
        diff: (concurrent - qm).abs(),
        minus_a_dot_b: pair.minus_dot(),
    })
}

fn bell_csv(rows: &[BellPairReport]) -> String {
    to_csv(
        &["a_x", "a_y", "a_z", "b_x", "b_y", "b_z", "P_concurrent", "P_qm", "diff"],
        rows.iter().map(|r| {
            r.a.iter()
                .chain(&r.b)
                .chain([&r.P_concurrent, &r.P_qm, &r.diff])
                .map(|x| fmt_f64(*x))
                .collect()
        }),
    )
}

fn bell_check(rows: &[BellPairReport], tol: f64) -> Vec<String> {
    let diff = rows.iter().map(|r| r.diff).fold(0.0, f64::max);
    let identity = rows
        .iter()
        .map(|r| (r.P_concurrent - r.minus_a_dot_b).abs())
        .fold(0.0, f64::max);
    let mut failures = Vec::new();
    if !below(diff, tol) {
        failures.push(format!(
            "bell agreement: |P_concurrent - P_qm| = {diff:e} is not below {tol:e}"
        ));
    }
    if !below(identity, tol) {
        failures.push(format!(
            "bell identity: |P_concurrent + a.b| = {identity:e} is not below {tol:e}"
        ));
    }
    failures
}

fn cmd_bell(ctx: &Ctx, args: &BellArgs) -> Outcome {
    if let Some(n) = args.samples {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let rows = (0..n)
            .map(|_| bell_pair(&AxisPair::random(&mut rng)))
            .collect::<crate::Result<Vec<_>>>()?;
        let report = BellSampleReport {
            samples: n,
            seed: ctx.seed,
            max_diff: rows.iter().map(|r| r.diff).fold(0.0, f64::max),
            max_identity_residual: rows
                .iter()
                .map(|r| (r.P_concurrent - r.minus_a_dot_b).abs())
                .fold(0.0, f64::max),
        };
        return Ok(Rendered {
            body: ctx.render(&report, || bell_csv(&rows)),
            failures: bell_check(&rows, ctx.tol),
            warnings: Vec::new(),
            notes: Vec::new(),
        });
    }
    let a = resolve_direction(args.a, args.a_theta, args.a_phi)?;
    let b = resolve_direction(args.b, args.b_theta, args.b_phi)?;
    let pair = AxisPair::new(a, b);
    let row = bell_pair(&pair)?;
    let failures = bell_check(std::slice::from_ref(&row), ctx.tol);
    let report = BellReport {
        pair: row,
        hidden_variables: hidden_variable_table(&pair),
    };
    Ok(Rendered {
        body: ctx.render(&report, || bell_csv(std::slice::from_ref(&report.pair))),
        failures,
        warnings: Vec::new(),
        notes: Vec::new(),
    })
}

#[derive(Serialize)]
struct PreImage {
    #[serde(rename = "final")]
    final_label: CatLabel,
    ket: Ket,
}

#[derive(Serialize)]
struct SingletReport {
    ket: Ket,
    distance_to_singlet: f64,
}

#[derive(Serialize)]
struct CatReport {
    phases: CatPhases,
    operator: Operator,
    unitarity_residual: f64,
    initial: CatLabel,
    evolved: Ket,
    pre_images: Vec<PreImage>,
    singlet: Option<SingletReport>,
}

fn cmd_cat(ctx: &Ctx, args: &CatArgs) -> Outcome {
    let phases = CatPhases::new(args.phi, args.chi).map_err(usage)?;
    let s = build_cat_s(phases)?;
    let pre_images = CatLabel::ALL
        .iter()
        .map(|&f| {
            Ok(PreImage {
                final_label: f,
                ket: initial_form_of_final(f, phases)?,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let singlet = match map_to_singlet(phases) {
        Ok(ket) => {
            let distance = ket.distance_up_to_phase(&crate::bell::singlet())?;
            Some(SingletReport {
                ket,
                distance_to_singlet: distance,
            })
        }
        Err(crate::Error::InvalidParameter(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let report = CatReport {
        phases,
        unitarity_residual: s.unitarity_residual(),
        initial: args.initial,
        evolved: evolve(args.initial, phases)?,
        pre_images,
        singlet,
        operator: s,
    };
    let mut failures = Vec::new();
    if !below(report.unitarity_residual, ctx.tol) {
        failures.push(format!(
            "cat unitarity: residual {:e} is not below {:e}",
            report.unitarity_residual, ctx.tol
        ));
    }
    if let Some(s) = &report.singlet {
        if !below(s.distance_to_singlet, ctx.tol) {
            failures.push(format!("cat singlet mapping: distance {:e}", s.distance_to_singlet));
        }
    }
    let body = ctx.render(&report, || {
        to_csv(
            &["initial", "final", "re", "im"],
            CatLabel::ALL.iter().enumerate().flat_map(|(j, from)| {
                let m = report.operator.matrix();
                CatLabel::ALL.iter().enumerate().map(move |(i, to)| {
                    vec![
                        from.to_string(),
                        to.to_string(),
                        fmt_f64(m[(i, j)].re),
                        fmt_f64(m[(i, j)].im),
                    ]
                })
            }),
        )
    });
    Ok(Rendered {
        body,
        failures,
        warnings: Vec::new(),
        notes: Vec::new(),
    })
}

#[derive(Serialize)]
struct EraserReport {
    state: SewState,
    rows: Vec<EraserRow>,
}

fn cmd_eraser(ctx: &Ctx) -> Outcome {
    let report = EraserReport {
        state: sew_state(),
        rows: eraser_table(),
    };
    let mut failures = Vec::new();
    for group in report.rows.chunks(4) {
        let total: f64 = group.iter().map(|r| r.probability).sum();
        if !below((total - 1.0).abs(), ctx.tol) {
            failures.push(format!(
                "eraser normalization: {}/{} outcomes sum to {total}",
                group[0].basis1.token(),
                group[0].basis2.token()
            ));
        }
    }
    let body = ctx.render(&report, || {
        to_csv(
            &["basis1", "basis2", "s1", "s2", "probability"],
            report.rows.iter().map(|r| {
                vec![
                    r.basis1.token().into(),
                    r.basis2.token().into(),
                    r.s1.symbol().into(),
                    r.s2.symbol().into(),
                    fmt_f64(r.probability),
                ]
            }),
        )
    });
    Ok(Rendered {
        body,
        failures,
        warnings: Vec::new(),
        notes: Vec::new(),
    })
}

#[derive(Serialize)]
struct SiteResidual {
    axis: char,
    site: usize,
    residual: f64,
}

#[derive(Serialize)]
struct TripleReport {
    directions: [[f64; 3]; 3],
    signs: [Sign; 3],
    amplitude: Complex,
    orthogonality_condition: bool,
    amplitude_zero: bool,
}

#[derive(Serialize)]
struct GhzCheckReport {
    eigenvalues: Vec<f64>,
    checks: Vec<EigenvalueCheck>,
    single_site_residuals: Vec<SiteResidual>,
    paradox: MerminReport,
    triple: Option<TripleReport>,
}

fn ghz_triple(args: &GhzCheckArgs) -> Result<Option<TripleDirections>, Failure> {
    if let Some(thetas) = args.thetas {
        let phis = args.phis.unwrap_or([0.0; 3]);
        let angles = [(thetas[0], phis[0]), (thetas[1], phis[1]), (thetas[2], phis[2])];
        return TripleDirections::from_angles(angles).map(Some).map_err(usage);
    }
    match (args.n1, args.n2, args.n3) {
        (None, None, None) => Ok(None),
        (Some(a), Some(b), Some(c)) => {
            let d = |v: [f64; 3]| Direction::from_cartesian(v[0], v[1], v[2]).map_err(usage);
            Ok(Some(TripleDirections::new(d(a)?, d(b)?, d(c)?)))
        }
        _ => Err(Failure::Usage("--n1, --n2 and --n3 must be given together".into())),
    }
}

fn cmd_ghz_check(ctx: &Ctx, args: &GhzCheckArgs) -> Outcome {
    let triple = ghz_triple(args)?;
    let checks = check_defining_eigenvalues();
    let mut failures = Vec::new();
    for (check, (_, expected)) in checks.iter().zip(DEFINING_PRODUCTS) {
        let error = (check.eigenvalue - expected)
            .abs()
            .max(check.imaginary.abs())
            .max(check.residual);
        if !below(error, ctx.tol) {
            failures.push(format!("ghz eigenvalue {}: off by {error:e}", check.operator));
        }
    }
    let mut single_site_residuals = Vec::new();
    for axis in [Axis::X, Axis::Y] {
        for site in 0..3 {
            let residual = single_site_residual(axis.direction(), site);
            if !below(0.5, residual) {
                failures.push(format!(
                    "ghz single-site residual {}{}: {residual}",
                    axis.letter(),
                    site + 1
                ));
            }
            single_site_residuals.push(SiteResidual {
                axis: axis.letter(),
                site: site + 1,
                residual,
            });
        }
    }
    let triple = triple.map(|t| {
        let amplitude = compat_amplitude(&t, args.signs);
        let folded = TripleDirections(std::array::from_fn(|p| crate::ghz::fold(t.0[p], args.signs[p])));
        let condition = orthogonality_condition(&folded);
        let zero = amplitude.norm() < AMPLITUDE_TOLERANCE;
        if condition != zero {
            failures.push(format!(
                "ghz orthogonality equivalence: condition {condition}, |amplitude| {:e}",
                amplitude.norm()
            ));
        }
        TripleReport {
            directions: t.0.map(|n| n.cartesian()),
            signs: args.signs,
            amplitude,
            orthogonality_condition: condition,
            amplitude_zero: zero,
        }
    });
    let report = GhzCheckReport {
        eigenvalues: checks.iter().map(|c| c.eigenvalue).collect(),
        checks,
        single_site_residuals,
        paradox: mermin_paradox_report(),
        triple,
    };
    let body = ctx.render(&report, || {
        to_csv(
            &[
                "s1",
                "s2",
                "s3",
                "label",
                "xxx_eigenvalue",
                "ghz_probability",
                "contradicts",
            ],
            report.paradox.patterns.iter().map(|p| {
                vec![
                    p.signs[0].symbol().into(),
                    p.signs[1].symbol().into(),
                    p.signs[2].symbol().into(),
                    p.label.clone(),
                    fmt_f64(p.xxx_eigenvalue),
                    fmt_f64(p.ghz_probability),
                    p.contradicts
                        .iter()
                        .map(|w| w.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                ]
            }),
        )
    });
    Ok(Rendered {
        body,
        failures,
        warnings: Vec::new(),
        notes: Vec::new(),
    })
}

#[derive(Serialize)]
struct WitnessReport {
    directions: [[f64; 3]; 3],
    thetas: [f64; 3],
    phis: [f64; 3],
    amplitude: f64,
}

#[derive(Serialize)]
struct GhzSetReport {
    kind: SetKind,
    set: ConsistentSet,
    verification: VerificationReport,
    orthogonal_witness: Option<WitnessReport>,
}

fn cmd_ghz_set(ctx: &Ctx, args: &GhzSetArgs) -> Outcome {
    let theta_j = args.theta_j.unwrap_or(args.theta_i);
    let set = match args.kind {
        SetKind::Hemisphere => ConsistentSet::hemisphere(args.pole, args.epsilon),
        SetKind::Banded => build_consistent_set(args.theta_i, theta_j, args.poles, args.epsilon),
        SetKind::BoundaryInclusive => ConsistentSet::boundary_inclusive(args.theta_i, theta_j, args.poles),
    }
    .map_err(usage)?;
    if ctx.format == Format::Csv {
        let rows = region_map(&set, args.grid_theta, args.grid_phi).map_err(usage)?;
        let body = to_csv(
            &["particle", "theta", "phi", "assignment"],
            rows.iter().map(|r| {
                vec![
                    r.particle.to_string(),
                    fmt_f64(r.theta),
                    fmt_f64(r.phi),
                    r.assignment.value().to_string(),
                ]
            }),
        );
        return Ok(Rendered {
            body,
            failures: Vec::new(),
            warnings: Vec::new(),
            notes: Vec::new(),
        });
    }
    let verification = verify_consistent_set(&set, args.samples, ctx.seed)?;
    let orthogonal_witness = find_orthogonal_witness(&set).map(|t| WitnessReport {
        directions: t.0.map(|n| n.cartesian()),
        thetas: t.0.map(|n| n.theta()),
        phis: t.0.map(|n| n.phi()),
        amplitude: compat_amplitude(&t, [Sign::Plus; 3]).norm(),
    });
    let mut failures = Vec::new();
    if !verification.passed {
        let probe = verification.probe.as_ref().is_some_and(|p| p.orthogonal);
        failures.push(format!(
            "consistent-set verification: {} sampled orthogonal triple(s), boundary probe orthogonal: {probe}",
            verification.violations
        ));
    }
    let mut warnings = Vec::new();
    if orthogonal_witness.is_some() {
        warnings.push(
            "the allowed bands contain an all-up triple orthogonal to the GHZ state (see orthogonal_witness)".into(),
        );
    }
    let report = GhzSetReport {
        kind: args.kind,
        set,
        verification,
        orthogonal_witness,
    };
    Ok(Rendered {
        body: to_json(&report),
        failures,
        warnings,
        notes: Vec::new(),
    })
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct ZwmReport {
    visibility: f64,
    I_max: f64,
    I_min: f64,
    min_lag: f64,
    config: ZwmConfig,
    intensity: Intensity,
    fit: FringeFit,
    fit_visibility: f64,
}

fn cmd_zwm(ctx: &Ctx, args: &ZwmArgs) -> Outcome {
    let base = ZwmConfig {
        g1: args.g1,
        g2: args.g2,
        v1: args.v1,
        v2: args.v2,
        omega_i: args.omega_i,
        d12: args.d12,
        t1: args.t1,
        t2: args.t2,
        theta1: args.theta1,
        theta2: args.theta2,
        ..ZwmConfig::default()
    };
    let cfg = match args.b_amp {
        Some(b) => ZwmConfig {
            t_amp: args.t_amp,
            b_amp: b,
            ..base
        },
        None => base.with_transmission(args.t_amp),
    };
    cfg.validate().map_err(usage)?;
    if args.points < 3 {
        return Err(Failure::Usage("--points must be at least 3".into()));
    }
    let min_lag = min_time_lag(args.d1, args.d2).map_err(usage)?;
    let scan = scan_intensity(&cfg, &uniform_offsets(args.points))?;
    let fit = fringe_fit(&scan)?;
    let visibility = visibility(&cfg)?;
    let (i_max, i_min) = fringe_extremes(&cfg);
    let intensity = match signal_intensity(&cfg) {
        Ok(i) => i,
        Err(crate::Error::CheckFailed { check, detail }) => {
            return Err(Failure::Validation(format!("{check}: {detail}")))
        }
        Err(e) => return Err(e.into()),
    };
    let mut failures = Vec::new();
    let gap = (intensity.operator_form - intensity.closed_form).abs();
    if !below(gap, ctx.tol) {
        failures.push(format!("zwm intensity forms: gap {gap:e} is not below {:e}", ctx.tol));
    }
    let fit_gap = (fit.visibility() - visibility).abs();
    if !below(fit_gap, args.fit_tol) {
        failures.push(format!(
            "zwm fringe fit: visibility gap {fit_gap:e} is not below {:e}",
            args.fit_tol
        ));
    }
    let report = ZwmReport {
        visibility,
        I_max: i_max,
        I_min: i_min,
        min_lag,
        fit_visibility: fit.visibility(),
        config: cfg,
        intensity,
        fit,
    };
    let body = ctx.render(&report, || {
        to_csv(
            &["offset", "intensity"],
            scan.iter().map(|(o, i)| vec![fmt_f64(*o), fmt_f64(*i)]),
        )
    });
    Ok(Rendered {
        body,
        failures,
        warnings: cfg.warnings(),
        notes: Vec::new(),
    })
}

#[derive(Serialize)]
struct AmplitudeRow {
    species: Species,
    site: Site,
    amplitude: Complex,
    probability: f64,
}

#[derive(Serialize)]
struct PhotoPreImage {
    site: Site,
    ket: Ket,
    same_site_fraction: f64,
    photon_to_electron: Complex,
    expected_ratio: Complex,
}

#[derive(Serialize)]
struct PhotoReport {
    config: PhotoConfig,
    phi: f64,
    divisor: f64,
    operator: Operator,
    evolved: Ket,
    amplitudes: Vec<AmplitudeRow>,
    electron_ratio: f64,
    expected_electron_ratio: f64,
    pre_images: Vec<PhotoPreImage>,
    uniformity: Option<UniformityReport>,
}

fn cmd_photo(ctx: &Ctx, args: &PhotoArgs) -> Outcome {
    let cfg = PhotoConfig {
        a: args.a,
        b_plus: args.b_plus,
        b_minus: args.b_minus,
        c_plus: args.c_plus,
        c_minus: args.c_minus,
    };
    cfg.validate().map_err(usage)?;
    if !args.phi.is_finite() {
        return Err(Failure::Usage("--phi must be finite".into()));
    }
    let evolved = evolve_uniform(&cfg, args.phi)?;
    let amp = |e: Excitation| evolved.amps()[e.index()];
    let amplitudes: Vec<AmplitudeRow> = Excitation::ALL
        .iter()
        .map(|&e| AmplitudeRow {
            species: e.species,
            site: e.site,
            amplitude: amp(e),
            probability: amp(e).norm_sqr(),
        })
        .collect();
    let electron = |site| amp(Excitation::new(Species::Electron, site)).norm_sqr();
    let pre_images = Site::BOTH
        .iter()
        .map(|&site| {
            let ket = pre_image_of_local_electron(&cfg, site)?;
            let at = |s| ket.amps()[Excitation::new(s, site).index()];
            Ok(PhotoPreImage {
                site,
                same_site_fraction: site_fraction(&ket, site),
                photon_to_electron: at(Species::Photon) / at(Species::Electron),
                expected_ratio: cfg.b(site).conj() / cfg.a.conj(),
                ket,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let uniformity = if cfg.is_symmetric() {
        Some(uniformity_report(&cfg, args.phi)?)
    } else {
        None
    };
    let mut failures = Vec::new();
    for p in &pre_images {
        if !below((1.0 - p.same_site_fraction).abs(), ctx.tol) {
            failures.push(format!(
                "photo pre-image locality at {}: fraction {}",
                p.site, p.same_site_fraction
            ));
        }
    }
    if let Some(u) = &uniformity {
        for row in &u.species {
            if let Some((plus, minus)) = row.marginal {
                if !(below((plus - 0.5).abs(), ctx.tol) && below((minus - 0.5).abs(), ctx.tol)) {
                    failures.push(format!(
                        "photo uniformity: {:?} marginal ({plus}, {minus})",
                        row.species
                    ));
                }
            }
        }
    }
    let report = PhotoReport {
        config: cfg,
        phi: args.phi,
        divisor: cfg.divisor(),
        operator: build_photo_s(&cfg)?,
        electron_ratio: electron(Site::Plus) / electron(Site::Minus),
        expected_electron_ratio: (cfg.b_plus / cfg.b_minus).norm_sqr(),
        evolved,
        amplitudes,
        pre_images,
        uniformity,
    };
    let body = ctx.render(&report, || {
        to_csv(
            &["species", "site", "re", "im", "probability"],
            report.amplitudes.iter().map(|r| {
                let species = match r.species {
                    Species::Photon => "photon",
                    Species::Electron => "electron",
                    Species::Other => "other",
                };
                vec![
                    species.into(),
                    r.site.to_string(),
                    fmt_f64(r.amplitude.re),
                    fmt_f64(r.amplitude.im),
                    fmt_f64(r.probability),
                ]
            }),
        )
    });
    Ok(Rendered {
        body,
        failures,
        warnings: Vec::new(),
        notes: Vec::new(),
    })
}

fn cmd_selftest(ctx: &Ctx, args: &SelftestArgs) -> Outcome {
    let report: SelftestReport = run_selftest(ctx.seed, &args.criteria);
    let failures = report
        .criteria
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("selftest criterion {} ({}): {}", c.id, c.name, c.detail))
        .collect();
    let notes = report.criteria.iter().map(|c| c.line()).collect();
    let body = ctx.render(&report, || {
        to_csv(
            &["id", "name", "passed", "detail"],
            report
                .criteria
                .iter()
                .map(|c| vec![c.id.to_string(), c.name.into(), c.passed.to_string(), c.detail.clone()]),
        )
    });
    Ok(Rendered {
        body,
        failures,
        warnings: Vec::new(),
        notes,
    })
}

fn target_path(cli: &Cli, name: &str) -> Option<PathBuf> {
    match (&cli.output, &cli.out_dir) {
        (Some(p), _) if p.as_os_str() == "-" => None,
        (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(dir.join(format!("{name}.{}", cli.format.extension()))),
        (None, None) => None,
    }
}

fn write_file(path: &Path, body: &str) -> io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, body)
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<S: AsRef<str>>(argv: &[S], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        let _ = writeln!(stderr, "statelab: --tol must be a positive number");
        return EXIT_USAGE;
    }
    let ctx = Ctx {
        seed: cli.seed,
        format: cli.format,
        tol: cli.tol,
    };
    let (name, outcome) = match &cli.command {
        Command::Bell(a) => ("bell", cmd_bell(&ctx, a)),
        Command::Cat(a) => ("cat", cmd_cat(&ctx, a)),
        Command::Eraser => ("eraser", cmd_eraser(&ctx)),
        Command::GhzCheck(a) => ("ghz-check", cmd_ghz_check(&ctx, a)),
        Command::GhzSet(a) => ("ghz-set", cmd_ghz_set(&ctx, a)),
        Command::Zwm(a) => ("zwm", cmd_zwm(&ctx, a)),
        Command::Photo(a) => ("photo", cmd_photo(&ctx, a)),
        Command::Selftest(a) => ("selftest", cmd_selftest(&ctx, a)),
    };
    let rendered = match outcome {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "statelab {name}: {msg}");
            return EXIT_USAGE;
        }
        Err(Failure::Validation(msg)) => {
            let _ = writeln!(stderr, "statelab {name}: {msg}");
            return EXIT_VALIDATION;
        }
    };
    for w in &rendered.warnings {
        let _ = writeln!(stderr, "statelab {name}: warning: {w}");
    }
    for note in &rendered.notes {
        let _ = writeln!(stderr, "{note}");
    }
    let written = match target_path(&cli, name) {
        Some(path) => write_file(&path, &rendered.body).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(rendered.body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "statelab {name}: cannot write output: {e}");
        return EXIT_VALIDATION;
    }
    if rendered.failures.is_empty() {
        return EXIT_OK;
    }
    for f in &rendered.failures {
        let _ = writeln!(stderr, "statelab {name}: check failed: {f}");
    }
    EXIT_VALIDATION
}

/// Exit code and captured streams of one in-process run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Captured {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
}

pub fn run_captured<S: AsRef<str>>(argv: &[S]) -> Captured {
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let code = run(argv, &mut stdout, &mut stderr);
    Captured { code, stdout, stderr }
}

/// One invocation per subcommand and format, `selftest` excluded, all on standard output.
pub fn reproducibility_argvs(seed: u64) -> Vec<Vec<String>> {
    let runs: [&[&str]; 14] = [
        &["bell", "--a", "0,0,1", "--b", "0,0,1"],
        &["bell", "--samples", "64", "--format", "csv"],
        &["cat"],
        &["cat", "--format", "csv"],
        &["eraser"],
        &["eraser", "--format", "csv"],
        &["ghz-check", "--thetas", "1.2,0.7,2.1", "--phis", "0,1,2"],
        &["ghz-check", "--format", "csv"],
        &["ghz-set", "--samples", "2048"],
        &["ghz-set", "--format", "csv", "--grid-theta", "7", "--grid-phi", "4"],
        &["zwm", "--T", "0.5,0.2"],
        &["zwm", "--format", "csv", "--points", "16"],
        &["photo", "--phi", "0.4"],
        &["photo", "--format", "csv", "--B-plus", "0.1,0.3"],
    ];
    let seed = seed.to_string();
    runs.iter()
        .map(|args| {
            let mut argv: Vec<String> = vec!["statelab".into()];
            argv.extend(args.iter().map(|s| s.to_string()));
            argv.extend(["--seed".to_string(), seed.clone(), "--output".into(), "-".into()]);
            argv
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_ok(args: &[&str]) -> serde_json::Value {
        let mut argv = vec!["statelab"];
        argv.extend(args);
        argv.extend(["--output", "-"]);
        let out = run_captured(&argv);
        assert_eq!(out.code, 0, "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    }

    #[test]
    fn float_format_has_seventeen_digits() {
        assert_eq!(to_json(&0.1), "1.0000000000000001e-1\n");
        assert_eq!(to_json(&-1.0), "-1.0000000000000000e0\n");
        assert_eq!(to_json(&f64::NAN), "null\n");
        assert_eq!(fmt_f64(f64::INFINITY), "");
        assert_eq!(
            to_json(&Complex::new(0.5, -2.0)),
            "[5.0000000000000000e-1,-2.0000000000000000e0]\n"
        );
    }

    #[test]
    fn bell_aligned_axes() {
        let v = run_ok(&["bell", "--a", "0,0,1", "--b", "0,0,2"]);
        for key in ["P_concurrent", "P_qm"] {
            assert!((v[key].as_f64().unwrap() + 1.0).abs() < 1e-15, "{key}");
        }
        assert_eq!(v["diff"], 0.0);
        let v = run_ok(&["bell", "--a-theta", "1.5707963267948966", "--b", "-1,0,0"]);
        assert!((v["P_qm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!(v["a"][2].as_f64().unwrap().abs() < 1e-15);
    }

    #[test]
    fn usage_and_validation_codes() {
        assert_eq!(run_captured(&["statelab", "bell", "--bogus"]).code, EXIT_USAGE);
        assert_eq!(run_captured(&["statelab"]).code, EXIT_USAGE);
        assert_eq!(run_captured(&["statelab", "bell", "--a", "0,0,0"]).code, EXIT_USAGE);
        assert_eq!(run_captured(&["statelab", "--help"]).code, EXIT_OK);
        let out = run_captured(&[
            "statelab",
            "ghz-set",
            "--kind",
            "boundary-inclusive",
            "--samples",
            "256",
            "--output",
            "-",
        ]);
        assert_eq!(out.code, EXIT_VALIDATION);
        assert!(String::from_utf8_lossy(&out.stderr).contains("consistent-set verification"));
        let out = run_captured(&["statelab", "zwm", "--g1", "0.5,0", "--output", "-"]);
        assert_eq!(out.code, EXIT_USAGE);
    }

    #[test]
    fn subcommand_keys() {
        let v = run_ok(&["ghz-check"]);
        let eig: Vec<f64> = v["eigenvalues"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        for (got, want) in eig.iter().zip([1.0, 1.0, 1.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(v["paradox"].is_object());
        let v = run_ok(&["zwm", "--T", "0"]);
        assert_eq!(v["visibility"], 0.0);
        for key in ["I_max", "I_min", "min_lag"] {
            assert!(v[key].is_number(), "{key}");
        }
        let v = run_ok(&["photo"]);
        assert_eq!(v["uniformity"]["species"][1]["marginal"][0], 0.5);
    }

    #[test]
    fn output_directory() {
        let dir = std::env::temp_dir().join(format!("statelab-cli-test-{}", std::process::id()));
        let d = dir.to_str().unwrap();
        let out = run_captured(&["statelab", "eraser", "--out-dir", d]);
        assert_eq!(out.code, 0);
        assert!(out.stdout.is_empty());
        let text = std::fs::read_to_string(dir.join("eraser.json")).unwrap();
        assert!(text.contains("\"rows\""));
        let out = run_captured(&[
            "statelab",
            "zwm",
            "--out-dir",
            d,
            "--output",
            "scan.csv",
            "--format",
            "csv",
        ]);
        assert_eq!(out.code, 0);
        assert!(std::fs::read_to_string(dir.join("scan.csv"))
            .unwrap()
            .starts_with("offset,intensity\n"));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
