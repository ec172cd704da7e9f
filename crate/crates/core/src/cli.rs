//! Batch driver behind the `pairspace` binary.
//!
//! Each subcommand runs one family of checks, prints one line per check and
//! writes `report_<command>.json` (plus `energy.csv` for the energy run)
//! into the output directory. Exit status: 0 when every check passes, 1
//! when a check fails, 2 for usage, configuration or precondition errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::continuity::{
    build_constraints_with_tol, constraint_report, default_sampling, energy_divergence_demo, seam_rule_allows,
    EnergyDemo,
};
use crate::equivalence::{matrix_element_batch, CompareOptions, Observable, BUILTIN_OBSERVABLES};
use crate::expansion::{gaussian_dipole, BasisSpec, RadialBasis, WaveExpansion};
use crate::harmonics::AngularIndex;
use crate::rotation::{mixed_symmetry_exclusion, phase_consistency, PhaseOutcome};
use crate::{Complex64, Error, Result, Vec3};

/// Bumped whenever the layout of the JSON reports changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Largest degree accepted in a configuration.
pub const MAX_L: u32 = 32;

/// Every tunable of a run. A config file is this structure as JSON; absent
/// fields take their defaults and unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub l_max: u32,
    pub n_max: usize,
    /// Minimum polar order of the angular quadratures.
    pub quad_theta: usize,
    /// Minimum azimuthal order of the angular quadratures.
    pub quad_phi: usize,
    pub svd_tol: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Random rotations per closure candidate.
    pub trials: usize,
    /// Random expansions per equivalence and phase family.
    pub samples: usize,
    pub observables: Vec<String>,
    /// Grid spacings of the energy run, each half the previous.
    pub grid_levels: Vec<f64>,
    /// Extend with the `1/√2` factor; false reproduces the doubled norm.
    pub renormalize: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            l_max: 5,
            n_max: 3,
            quad_theta: 24,
            quad_phi: 48,
            svd_tol: 1e-10,
            seed: 42,
            output_dir: PathBuf::from("pairspace-out"),
            trials: 50,
            samples: 20,
            observables: BUILTIN_OBSERVABLES.iter().map(|s| s.to_string()).collect(),
            grid_levels: crate::continuity::default_grid_levels(),
            renormalize: true,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.l_max < 1 || self.l_max > MAX_L {
            return bad(format!("l_max = {} outside 1..={MAX_L}", self.l_max));
        }
        if self.n_max < 1 || self.n_max > 16 {
            return bad(format!("n_max = {} outside 1..=16", self.n_max));
        }
        if self.quad_theta < 1 || self.quad_phi < 1 {
            return bad("quadrature orders must be positive".into());
        }
        if !(self.svd_tol > 0.0 && self.svd_tol < 1.0) {
            return bad(format!("svd_tol = {} outside (0, 1)", self.svd_tol));
        }
        if self.samples < 1 {
            return bad("samples must be positive".into());
        }
        Ok(())
    }

    fn observables(&self) -> Result<Vec<Observable>> {
        if self.observables.is_empty() {
            return Err(Error::Config("observable list is empty".into()));
        }
        self.observables
            .iter()
            .map(|n| {
                Observable::builtin(n).ok_or_else(|| {
                    Error::Config(format!("unknown observable {n:?}; known: {}", BUILTIN_OBSERVABLES.join(", ")))
                })
            })
            .collect()
    }

    fn radial(&self) -> Result<RadialBasis> {
        RadialBasis::unit(self.n_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Seam constraints on the even, odd and full bases.
    FermionExclusion,
    /// Rotation closure of mixed candidates and seam phase consistency.
    RotationClosure,
    /// Matrix elements in the half-space and full-space descriptions.
    Equivalence,
    /// Kinetic energy of a seam-discontinuous function under grid refinement.
    EnergyDivergence,
    /// Every command above.
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::FermionExclusion => "fermion-exclusion",
            Command::RotationClosure => "rotation-closure",
            Command::Equivalence => "equivalence",
            Command::EnergyDivergence => "energy-divergence",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pairspace", version, about = "Checks on the unordered-pair configuration space of two identical particles")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
    /// JSON file with run configuration fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub l_max: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving the reports.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Extend to full space without the 1/√2 factor.
    #[arg(long, global = true)]
    pub no_renorm: bool,
}

impl Args {
    /// Defaults, overlaid by the config file, overlaid by flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(l) = self.l_max {
            cfg.l_max = l;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.output {
            cfg.output_dir = o.clone();
        }
        if self.no_renorm {
            cfg.renormalize = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One named pass/fail verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub results: serde_json::Value,
}

impl Report {
    fn new(command: Command, cfg: &RunConfig, checks: Vec<Check>, results: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.name().to_string(),
            config: cfg.clone(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            results,
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.passed {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

fn random_coeffs(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Random element of `spec` with coefficient norm `norm`.
pub fn random_expansion(spec: &BasisSpec, norm: f64, rng: &mut ChaCha8Rng) -> WaveExpansion {
    let v = random_coeffs(spec.len(), rng);
    let s = norm / v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let v: Vec<Complex64> = v.into_iter().map(|c| c * s).collect();
    WaveExpansion::from_vector(spec.clone(), &v).expect("length matches spec")
}

/// Seam constraints of the even, odd and full bases at `cfg.l_max`.
pub fn cmd_fermion_exclusion(cfg: &RunConfig) -> Result<Report> {
    let radial = cfg.radial()?;
    let even = BasisSpec::even(cfg.l_max, radial);
    let odd = BasisSpec::odd(cfg.l_max, radial);
    let full = BasisSpec::full(cfg.l_max, radial);
    let even_rep = constraint_report(&even, cfg.svd_tol)?;
    let odd_rep = constraint_report(&odd, cfg.svd_tol)?;
    let full_rep = constraint_report(&full, cfg.svd_tol)?;

    let (p, r) = default_sampling(&full);
    let doubled = build_constraints_with_tol(&full, 2 * p, 2 * r, cfg.svd_tol)?;
    let per_channel_rule = full.angular().iter().filter(|i| seam_rule_allows(i)).count();
    let odd_odd: Vec<AngularIndex> = odd.angular().iter().copied().filter(|i| !seam_rule_allows(i)).collect();

    let checks = vec![
        Check::new(
            "full_nullspace_matches_rule",
            full_rep.nullspace_dim == full_rep.rule_nullspace_dim && full_rep.rule_principal_angle < 1e-8,
            format!(
                "dim {} (rule {}), max principal angle {:.3e}",
                full_rep.nullspace_dim, full_rep.rule_nullspace_dim, full_rep.rule_principal_angle
            ),
        ),
        Check::new(
            "per_channel_nullspace",
            full_rep.channel_nullspace_dims.iter().all(|&d| d == per_channel_rule),
            format!("{:?}, rule {per_channel_rule} per channel", full_rep.channel_nullspace_dims),
        ),
        Check::new(
            "sampling_stability",
            doubled.nullspace_dim == full_rep.nullspace_dim,
            format!("doubled sampling dim {}", doubled.nullspace_dim),
        ),
        Check::new(
            "even_unconstrained",
            even_rep.nullspace_dim == even_rep.coefficient_count,
            format!("{} of {} free", even_rep.nullspace_dim, even_rep.coefficient_count),
        ),
        Check::new(
            "odd_forced_zero",
            odd_rep.forced_zero == odd_odd,
            format!("{} indices forced to zero", odd_rep.forced_zero.len()),
        ),
        Check::new(
            "odd_sector_vanishes_on_equator",
            odd_rep.equator_max < 1e-10,
            format!("max equator magnitude {:.3e}", odd_rep.equator_max),
        ),
    ];
    let results = json!({
        "even": even_rep,
        "odd": odd_rep,
        "full": full_rep,
        "full_doubled_sampling_nullspace_dim": doubled.nullspace_dim,
    });
    Ok(Report::new(Command::FermionExclusion, cfg, checks, results))
}

/// Seam-approach directions used by the phase suite.
const PHASE_EPS: f64 = 1e-10;
/// Mixed expansions must be inconsistent by at least this much.
const MIXED_MIN_INCONSISTENCY: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
struct PhaseRow {
    family: &'static str,
    direction: [f64; 3],
    outcome: PhaseOutcome,
}

pub fn cmd_rotation_closure(cfg: &RunConfig) -> Result<Report> {
    let closure = mixed_symmetry_exclusion(cfg.l_max, cfg.trials, cfg.seed)?;
    let radial = cfg.radial()?;
    let even = BasisSpec::even(cfg.l_max, radial);
    let odd = BasisSpec::odd(cfg.l_max, radial);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut rows = Vec::new();
    for _ in 0..cfg.samples {
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let dir = Vec3::new(phi.cos(), phi.sin(), 0.0);
        let e = random_expansion(&even, 1.0, &mut rng);
        let o = random_expansion(&odd, 1.0, &mut rng);
        let mixed = {
            let a = random_expansion(&even, std::f64::consts::FRAC_1_SQRT_2, &mut rng);
            let b = random_expansion(&odd, std::f64::consts::FRAC_1_SQRT_2, &mut rng);
            let full = BasisSpec::full(cfg.l_max, radial);
            let mut v = vec![Complex64::default(); full.len()];
            for w in [&a, &b] {
                for (k, c) in w.coeffs() {
                    v[full.position(k).expect("sub-spec key")] += c;
                }
            }
            WaveExpansion::from_vector(full, &v)?
        };
        for (family, w) in [("even", &e), ("odd", &o), ("mixed", &mixed)] {
            rows.push(PhaseRow {
                family,
                direction: [dir.x, dir.y, dir.z],
                outcome: phase_consistency(w, &dir, PHASE_EPS)?,
            });
        }
    }

    let even_closed = &closure[0];
    let mixed_flagged = closure[1..].iter().all(|c| !c.closed);
    let phase_ok = |family: &str, ok: &dyn Fn(&PhaseOutcome) -> bool| {
        rows.iter().filter(|r| r.family == family).all(|r| ok(&r.outcome))
    };
    let min_mixed = rows
        .iter()
        .filter(|r| r.family == "mixed")
        .map(|r| match r.outcome {
            PhaseOutcome::Inconsistent { measure } => measure,
            _ => 0.0,
        })
        .fold(f64::INFINITY, f64::min);
    let checks = vec![
        Check::new(
            "even_l_closed",
            even_closed.closed,
            format!("max defect {:.3e} over {} rotations", even_closed.max_defect, even_closed.rotations_tested),
        ),
        Check::new(
            "mixed_candidates_not_closed",
            mixed_flagged,
            format!(
                "smallest max defect {:.3e}",
                closure[1..].iter().map(|c| c.max_defect).fold(f64::INFINITY, f64::min)
            ),
        ),
        Check::new(
            "even_phase_zero",
            phase_ok("even", &|o| matches!(o, PhaseOutcome::Consistent { delta, .. } if delta.abs() < 1e-6)),
            "delta = 0 for every even expansion",
        ),
        Check::new(
            "odd_phase_pi",
            phase_ok("odd", &|o| {
                matches!(o, PhaseOutcome::Consistent { delta, .. } if (delta.abs() - std::f64::consts::PI).abs() < 1e-6)
            }),
            "delta = pi for every odd expansion",
        ),
        Check::new(
            "mixed_phase_inconsistent",
            min_mixed > MIXED_MIN_INCONSISTENCY,
            format!("smallest inconsistency {min_mixed:.3e}"),
        ),
    ];
    let results = json!({ "closure": closure, "phase": rows });
    Ok(Report::new(Command::RotationClosure, cfg, checks, results))
}

pub fn cmd_equivalence(cfg: &RunConfig) -> Result<Report> {
    let observables = cfg.observables()?;
    let spec = BasisSpec::even(cfg.l_max, cfg.radial()?);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ws: Vec<WaveExpansion> = (0..cfg.samples).map(|_| random_expansion(&spec, 1.0, &mut rng)).collect();
    let opts = CompareOptions {
        renormalize: cfg.renormalize,
        min_theta: cfg.quad_theta,
        min_phi: cfg.quad_phi,
    };
    let n = ws.len();
    let off_diagonal: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let rows = matrix_element_batch(&ws, &off_diagonal, &observables, opts)?;
    let diagonal_pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    let diagonal = matrix_element_batch(&ws, &diagonal_pairs, &[Observable::identity()], opts)?;
    let max_diff = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    let ratios: Vec<f64> = diagonal.iter().filter_map(|r| r.ratio).collect();
    let worst_ratio_dev = |target: f64| ratios.iter().map(|r| (r - target).abs()).fold(0.0, f64::max);

    let checks = if cfg.renormalize {
        vec![
            Check::new("matrix_elements_agree", max_diff < 1e-8, format!("max |half - full| {max_diff:.3e}")),
            Check::new(
                "norms_preserved",
                worst_ratio_dev(1.0) < 1e-8,
                format!("max |ratio - 1| {:.3e}", worst_ratio_dev(1.0)),
            ),
        ]
    } else {
        vec![Check::new(
            "identity_ratio_without_renormalization",
            ratios.len() == diagonal.len() && worst_ratio_dev(2.0) < 1e-6,
            format!("max |ratio - 2| {:.3e}", worst_ratio_dev(2.0)),
        )]
    };
    let results = json!({
        "renormalized": cfg.renormalize,
        "max_abs_diff": max_diff,
        "rows": rows,
        "norms": diagonal,
    });
    Ok(Report::new(Command::Equivalence, cfg, checks, results))
}

/// Growth factor per halving required of the discontinuous function.
pub const DIVERGENCE_RATIO: f64 = 1.8;
/// Final relative change allowed for the smooth control.
pub const CONTROL_REL_TOL: f64 = 0.05;

/// `(x + iy)² e^{-r²}`: even under inversion, hence continuous on the
/// identified space.
pub fn smooth_control(v: &Vec3) -> Complex64 {
    let z = Complex64::new(v.x, v.y);
    z * z * (-v.norm_squared()).exp()
}

/// Kinetic energies of the seam-discontinuous dipole and of the smooth
/// control; returns the report and the two sequences.
pub fn cmd_energy_divergence(cfg: &RunConfig) -> Result<(Report, EnergyDemo, EnergyDemo)> {
    let dipole = energy_divergence_demo(&gaussian_dipole, &cfg.grid_levels)?;
    let control = energy_divergence_demo(&smooth_control, &cfg.grid_levels)?;
    let ratios = dipole.growth_ratios();
    let changes = control.relative_changes();
    let checks = vec![
        Check::new(
            "discontinuous_energy_diverges",
            dipole.check_divergent(DIVERGENCE_RATIO).is_ok(),
            format!("growth ratios {ratios:?}, required >= {DIVERGENCE_RATIO}"),
        ),
        Check::new(
            "smooth_control_converges",
            control.check_converged(CONTROL_REL_TOL).is_ok(),
            format!("relative changes {changes:?}, required < {CONTROL_REL_TOL}"),
        ),
    ];
    let results = json!({
        "discontinuous": { "samples": dipole.samples, "growth_ratios": ratios },
        "control": { "samples": control.samples, "relative_changes": changes },
    });
    Ok((Report::new(Command::EnergyDivergence, cfg, checks, results), dipole, control))
}

fn write_report(dir: &Path, report: &Report) -> Result<()> {
    let path = dir.join(format!("report_{}.json", report.command));
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_energy_csv(path: &Path, demo: &EnergyDemo) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["h", "kinetic_energy"])?;
    for s in &demo.samples {
        w.write_record([s.h.to_string(), s.kinetic_energy.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn print_report(report: &Report) {
    println!("== {} ==", report.command);
    for c in &report.checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
}

/// Runs one command (not [`Command::All`]), writes its outputs and returns
/// the report.
pub fn run_single(command: Command, cfg: &RunConfig) -> Result<Report> {
    fs::create_dir_all(&cfg.output_dir)?;
    let report = match command {
        Command::FermionExclusion => cmd_fermion_exclusion(cfg)?,
        Command::RotationClosure => cmd_rotation_closure(cfg)?,
        Command::Equivalence => cmd_equivalence(cfg)?,
        Command::EnergyDivergence => {
            let (report, dipole, control) = cmd_energy_divergence(cfg)?;
            write_energy_csv(&cfg.output_dir.join("energy.csv"), &dipole)?;
            write_energy_csv(&cfg.output_dir.join("energy_control.csv"), &control)?;
            report
        }
        Command::All => unreachable!("handled by run"),
    };
    write_report(&cfg.output_dir, &report)?;
    Ok(report)
}

/// Runs `command` with `cfg`, printing a summary; returns the exit code.
pub fn run(command: Command, cfg: &RunConfig) -> u8 {
    let commands = match command {
        Command::All => vec![
            Command::FermionExclusion,
            Command::RotationClosure,
            Command::Equivalence,
            Command::EnergyDivergence,
        ],
        c => vec![c],
    };
    let mut reports = Vec::new();
    for c in commands {
        match run_single(c, cfg) {
            Ok(r) => {
                print_report(&r);
                reports.push(r);
            }
            Err(e) => {
                eprintln!("error: {}: {e}", c.name());
                return EXIT_USAGE;
            }
        }
    }
    if command == Command::All {
        let checks = reports
            .iter()
            .map(|r| Check::new(&r.command, r.passed, format!("{} checks", r.checks.len())))
            .collect();
        let summary = Report::new(Command::All, cfg, checks, json!({}));
        if let Err(e) = write_report(&cfg.output_dir, &summary) {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
        return summary.exit_code();
    }
    reports[0].exit_code()
}

/// Entry point of the binary: parses `argv`, resolves the configuration and
/// runs the command.
pub fn main_with_args<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match args.resolve() {
        Ok(cfg) => run(args.command, &cfg),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
