//! Rotation closure of candidate Hilbert spaces and the phase relation
//! between the two seam approaches to one unordered pair.
//!
//! A rotation mixes the `m` components of each `l` multiplet, so a space is
//! rotation invariant only if it contains, for each of its degrees, all `m`
//! or none. Continuity allows odd `l` only with even `m`, so any space
//! holding odd-`l` functions is open under rotation.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{precondition, Result};
use crate::expansion::{BasisSpec, WaveExpansion};
use crate::harmonics::{wigner_rotate, AngularExpansion, AngularIndex, EulerAngles};
use crate::{Complex64, Vec3};

/// Seed for the random rotations when none is given.
pub const DEFAULT_SEED: u64 = 42;
/// A spec is closed when its defect stays below this.
pub const CLOSURE_TOL: f64 = 1e-10;

/// Largest norm, over the spec's angular basis functions, of the part of the
/// rotated function lying outside the spec.
pub fn closure_defect(spec: &BasisSpec, rotation: &EulerAngles) -> Result<f64> {
    if spec.is_empty() {
        return precondition("closure defect of an empty spec");
    }
    Ok(spec
        .angular()
        .iter()
        .map(|idx| {
            let rotated = wigner_rotate(&AngularExpansion::single(*idx), rotation);
            rotated
                .0
                .iter()
                .filter(|(i, _)| !spec.contains(i))
                .map(|(_, c)| c.norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max))
    .map(positive_zero)
}

/// Maps `-0.0` (an empty float sum) to `0.0` so reports print cleanly.
fn positive_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// `n` Euler-angle triples from a ChaCha stream seeded with `seed`.
pub fn random_rotations(n: usize, seed: u64) -> Vec<EulerAngles> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| EulerAngles::random(&mut rng)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport {
    pub label: String,
    pub indices: Vec<AngularIndex>,
    /// Whether the candidate consists of full multiplets only.
    pub expected_closed: bool,
    pub rotations_tested: usize,
    pub max_defect: f64,
    pub closed: bool,
}

impl ClosureReport {
    /// Whether the measurement agrees with the all-`m`-or-none rule.
    pub fn as_expected(&self) -> bool {
        self.closed == self.expected_closed
    }
}

fn full_multiplets_only(indices: &[AngularIndex]) -> bool {
    indices
        .iter()
        .all(|i| AngularIndex::multiplet(i.l()).all(|j| indices.contains(&j)))
}

/// Measures the closure of `indices` under each rotation.
pub fn closure_report(label: &str, indices: Vec<AngularIndex>, rotations: &[EulerAngles]) -> Result<ClosureReport> {
    let spec = BasisSpec::new(indices.iter().copied(), crate::expansion::RadialBasis::unit(1)?)?;
    let defects = rotations
        .par_iter()
        .map(|rot| closure_defect(&spec, rot))
        .collect::<Result<Vec<f64>>>()?;
    let max_defect = positive_zero(defects.into_iter().fold(0.0, f64::max));
    Ok(ClosureReport {
        label: label.to_string(),
        expected_closed: full_multiplets_only(&indices),
        indices,
        rotations_tested: rotations.len(),
        max_defect,
        closed: max_defect < CLOSURE_TOL,
    })
}

/// The candidate spaces examined by [`mixed_symmetry_exclusion`], labelled.
///
/// * all even `l`, every `m` (the only invariant one);
/// * odd `l` with even `m` alone (what continuity leaves of a fermion space);
/// * even `l` plus one odd multiplet restricted to even `m`, for each odd `l`;
/// * even `l` plus every odd multiplet restricted to even `m`;
/// * odd `l` for `|m| = 1` with even `l` for the remaining `m`.
pub fn mixed_candidates(l_max: u32) -> Vec<(String, Vec<AngularIndex>)> {
    let all: Vec<AngularIndex> = AngularIndex::up_to(l_max).collect();
    let pick = |keep: &dyn Fn(&AngularIndex) -> bool| -> Vec<AngularIndex> {
        all.iter().copied().filter(|i| keep(i)).collect()
    };
    let even_l = |i: &AngularIndex| i.l() % 2 == 0;
    let odd_l_even_m = |i: &AngularIndex| i.l() % 2 == 1 && i.m() % 2 == 0;

    let mut out = vec![
        ("even l".to_string(), pick(&even_l)),
        ("odd l, even m".to_string(), pick(&odd_l_even_m)),
    ];
    for l in (1..=l_max).step_by(2) {
        out.push((
            format!("even l + l={l} even m"),
            pick(&|i| even_l(i) || (i.l() == l && i.m() % 2 == 0)),
        ));
    }
    if l_max >= 3 {
        out.push((
            "even l + odd l even m".to_string(),
            pick(&|i| even_l(i) || odd_l_even_m(i)),
        ));
    }
    out.push((
        "odd l for |m|=1, even l otherwise".to_string(),
        pick(&|i| if i.m().abs() == 1 { i.l() % 2 == 1 } else { i.l() % 2 == 0 }),
    ));
    out
}

/// Closure reports for the pure even-`l` space and the mixed candidates
/// up to degree `l_max`, all under the same `trials` random rotations.
pub fn mixed_symmetry_exclusion(l_max: u32, trials: usize, seed: u64) -> Result<Vec<ClosureReport>> {
    if l_max < 1 {
        return precondition("mixed symmetry candidates need l_max >= 1");
    }
    if trials < 10 {
        return precondition(format!("need at least 10 random rotations, got {trials}"));
    }
    let rotations = random_rotations(trials, seed);
    mixed_candidates(l_max)
        .into_iter()
        .map(|(label, indices)| closure_report(&label, indices, &rotations))
        .collect()
}

/// Outcome of comparing the amplitudes at the two seam approaches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseOutcome {
    /// `ψ(u₋) = e^{iδ} ψ(u₊)` at every sample, `δ ∈ (-π, π]`.
    Consistent { delta: f64, mismatch: f64 },
    /// No single phase relates the two approaches; `measure` is the worst
    /// mismatch relative to the largest sampled amplitude.
    Inconsistent { measure: f64 },
    /// Every sampled amplitude fell below the noise floor.
    Indeterminate,
}

/// Ratios within this of a single unit-modulus phase count as consistent.
pub const PHASE_TOL: f64 = 1e-6;
/// Amplitudes below this are treated as zero.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;
/// Radii sampled along each approach.
pub const PHASE_RADII: usize = 24;

/// Evaluates `w` along `u₊ = (x, y, +eps)` and `u₋ = (-x, -y, +eps)`
/// (normalized) at [`PHASE_RADII`] radii and tests whether one phase `δ`
/// relates them.
///
/// `δ` is the least-squares phase `arg Σ conj(ψ₊) ψ₋`; the mismatch is
/// `max |ψ₋ - e^{iδ} ψ₊|` divided by the largest `|ψ±|`, and also fails
/// when `Σ|ψ₋|² ≠ Σ|ψ₊|²`.
pub fn phase_consistency(w: &WaveExpansion, r_hat: &Vec3, eps: f64) -> Result<PhaseOutcome> {
    if w.norm() == 0.0 {
        return precondition("phase consistency of the zero function");
    }
    if !(eps > 0.0) || !r_hat.iter().all(|c| c.is_finite()) {
        return precondition(format!("invalid seam approach: direction {r_hat:?}, eps {eps}"));
    }
    let transverse = (r_hat.x * r_hat.x + r_hat.y * r_hat.y).sqrt();
    if transverse == 0.0 || r_hat.z < 0.0 || r_hat.z.abs() > 1e-3 * r_hat.norm() {
        return precondition(format!("direction {r_hat:?} is not near the seam"));
    }
    let plus = Vec3::new(r_hat.x / transverse, r_hat.y / transverse, eps).normalize();
    let minus = Vec3::new(-r_hat.x / transverse, -r_hat.y / transverse, eps).normalize();
    let spec = w.spec();
    let hi = spec.radial.scale() * (2.0 + (2.0 * spec.radial.n_max() as f64 + spec.l_max().unwrap_or(0) as f64 + 1.5).sqrt());
    let samples: Vec<(Complex64, Complex64)> = (1..=PHASE_RADII)
        .map(|k| {
            let r = hi * k as f64 / PHASE_RADII as f64;
            (w.evaluate_at(&(plus * r)), w.evaluate_at(&(minus * r)))
        })
        .collect();
    let peak = samples
        .iter()
        .map(|(a, b)| a.norm().max(b.norm()))
        .fold(0.0, f64::max);
    if peak < AMPLITUDE_FLOOR {
        return Ok(PhaseOutcome::Indeterminate);
    }
    let cross: Complex64 = samples.iter().map(|(a, b)| a.conj() * b).sum();
    let delta = if cross.norm() == 0.0 { 0.0 } else { cross.arg() };
    let phase = Complex64::from_polar(1.0, delta);
    let pointwise = samples
        .iter()
        .map(|(a, b)| (b - phase * a).norm())
        .fold(0.0, f64::max)
        / peak;
    let (na, nb): (f64, f64) = samples
        .iter()
        .fold((0.0, 0.0), |(x, y), (a, b)| (x + a.norm_sqr(), y + b.norm_sqr()));
    let modulus = (na.sqrt() - nb.sqrt()).abs() / na.sqrt().max(nb.sqrt());
    let mismatch = pointwise.max(modulus);
    if mismatch <= PHASE_TOL {
        // Report π rather than -π for the antisymmetric case.
        let delta = if (delta + PI).abs() < 1e-12 { PI } else { delta };
        Ok(PhaseOutcome::Consistent { delta, mismatch })
    } else {
        Ok(PhaseOutcome::Inconsistent { measure: mismatch })
    }
}
