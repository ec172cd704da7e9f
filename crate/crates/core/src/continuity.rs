//! Continuity of wave functions across the half-space seam.
//!
//! Approaching the plane `z = 0`, the unordered pair with relative direction
//! `(θ, φ)` is a neighbour of the one with `(θ, φ + π)`. A continuous wave
//! function must therefore satisfy, at every radius,
//!
//! ```text
//! Σ a_{lmn} g_{nl}(r) ((-1)^m - 1) Y_lm(π/2, φ) = 0.
//! ```
//!
//! The even-`m` terms drop out through the `(-1)^m - 1` factor and the
//! terms with `l - m` odd vanish on the equator, so only coefficients with
//! both `l` and `m` odd are constrained. This module samples the condition,
//! finds its null space by SVD and compares it with that combinatorial rule.
//! Each radial channel `n` is constrained separately.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::configspace::canonical_representative;
use crate::error::{precondition, Error, Result};
use crate::expansion::{BasisSpec, CoeffKey, RadialBasis, WaveExpansion};
use crate::harmonics::{eval_ylm, phi_shift_factor, AngularIndex};
use crate::linalg::{max_principal_angle, null_space, orthonormalize, CMatrix};
use crate::{Complex64, Vec3};

/// Relative threshold on singular values defining numerical rank.
pub const DEFAULT_SVD_TOL: f64 = 1e-10;

/// Whether continuity leaves `a_{lm·}` free: false exactly when `l` and `m`
/// are both odd.
pub fn seam_rule_allows(idx: &AngularIndex) -> bool {
    !(idx.l() % 2 == 1 && idx.m().rem_euclid(2) == 1)
}

/// Largest radius at which the seam is probed for a basis.
fn probe_radius(radial: &RadialBasis, l_max: u32) -> f64 {
    radial.scale() * (2.0 + (2.0 * radial.n_max() as f64 + l_max as f64 + 1.5).sqrt())
}

fn sample_radii(radial: &RadialBasis, l_max: u32, count: usize) -> Vec<f64> {
    let hi = probe_radius(radial, l_max);
    let lo = 0.2 * radial.scale();
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

/// The sampled seam constraint and its null space.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub spec: BasisSpec,
    /// One row per sample `(n, r, φ)`, one column per coefficient in
    /// [`BasisSpec::keys`] order.
    pub rows: CMatrix,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub nullspace_dim: usize,
    /// Orthonormal columns spanning the null space.
    pub nullspace: CMatrix,
    /// Coefficient directions on which the constraint acts as zero.
    pub allowed: Vec<CoeffKey>,
    pub svd_tol: f64,
    pub n_phi_samples: usize,
    pub n_r_samples: usize,
}

/// Sampling used by the reports: two points of headroom in each direction.
pub fn default_sampling(spec: &BasisSpec) -> (usize, usize) {
    let max_m = spec.angular().iter().map(|i| i.m().unsigned_abs()).max().unwrap_or(0) as usize;
    let n_r = spec.radial.n_max().max(spec.degrees().len());
    (2 * max_m + 3, n_r + 2)
}

pub fn build_constraints(spec: &BasisSpec, n_phi_samples: usize, n_r_samples: usize) -> Result<ConstraintSystem> {
    build_constraints_with_tol(spec, n_phi_samples, n_r_samples, DEFAULT_SVD_TOL)
}

/// Assembles the sampled constraint matrix.
///
/// Refuses sampling too coarse to resolve the rank: fewer than
/// `2 max|m| + 1` azimuths would alias distinct `m`, and fewer radii than
/// either `n_max` or the number of distinct degrees could make independent
/// radial functions look dependent.
pub fn build_constraints_with_tol(
    spec: &BasisSpec,
    n_phi_samples: usize,
    n_r_samples: usize,
    svd_tol: f64,
) -> Result<ConstraintSystem> {
    if !(svd_tol > 0.0) {
        return precondition(format!("svd tolerance {svd_tol} must be positive"));
    }
    let max_m = spec.angular().iter().map(|i| i.m().unsigned_abs()).max().unwrap_or(0) as usize;
    if n_phi_samples < 2 * max_m + 1 {
        return precondition(format!(
            "{n_phi_samples} azimuthal samples cannot resolve |m| up to {max_m} (need {})",
            2 * max_m + 1
        ));
    }
    let n_max = spec.radial.n_max();
    let need_r = n_max.max(spec.degrees().len());
    if n_r_samples < need_r {
        return precondition(format!("{n_r_samples} radial samples, need at least {need_r}"));
    }

    let keys: Vec<CoeffKey> = spec.keys().collect();
    let l_max = spec.l_max().unwrap_or(0);
    let radii = sample_radii(&spec.radial, l_max, n_r_samples);
    let phis: Vec<f64> = (0..n_phi_samples)
        .map(|j| 2.0 * PI * j as f64 / n_phi_samples as f64)
        .collect();
    let per_channel = n_r_samples * n_phi_samples;
    let n_rows = n_max * per_channel;

    // Rows are independent; each channel block is filled in parallel.
    let blocks: Vec<Vec<(usize, usize, Complex64)>> = (0..n_max)
        .into_par_iter()
        .map(|n| {
            let mut entries = Vec::new();
            for (k, &r) in radii.iter().enumerate() {
                for (j, &phi) in phis.iter().enumerate() {
                    let row = n * per_channel + k * n_phi_samples + j;
                    for (col, key) in keys.iter().enumerate() {
                        if key.n != n {
                            continue;
                        }
                        let factor = phi_shift_factor(&key.index) - 1.0;
                        if factor == 0.0 {
                            continue;
                        }
                        let g = spec.radial.value(n, key.index.l(), r);
                        let y = eval_ylm(&key.index, PI / 2.0, phi);
                        entries.push((row, col, y * (g * factor)));
                    }
                }
            }
            entries
        })
        .collect();
    let mut rows = CMatrix::zeros(n_rows, keys.len());
    for (i, j, v) in blocks.into_iter().flatten() {
        rows[(i, j)] = v;
    }

    let col_norms: Vec<f64> = (0..keys.len()).map(|j| rows.column(j).norm()).collect();
    let max_col = col_norms.iter().copied().fold(0.0, f64::max);
    let allowed = keys
        .iter()
        .zip(&col_norms)
        .filter(|(_, &c)| c <= svd_tol * max_col)
        .map(|(k, _)| *k)
        .collect();

    // Equilibrate active columns before the SVD; null vectors map back
    // through the same diagonal scaling.
    let scale: Vec<f64> = col_norms
        .iter()
        .map(|&c| if c > svd_tol * max_col { 1.0 / c } else { 1.0 })
        .collect();
    let mut scaled = rows.clone();
    for (j, s) in scale.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*s);
    }
    let ns = null_space(&scaled, svd_tol);
    let mut back = ns.basis.clone();
    for (i, s) in scale.iter().enumerate() {
        back.row_mut(i).scale_mut(*s);
    }
    let nullspace = orthonormalize(&back);

    Ok(ConstraintSystem {
        spec: spec.clone(),
        rows,
        singular_values: ns.singular_values,
        rank: ns.rank,
        nullspace_dim: nullspace.ncols(),
        nullspace,
        allowed,
        svd_tol,
        n_phi_samples,
        n_r_samples,
    })
}

impl ConstraintSystem {
    pub fn coefficient_count(&self) -> usize {
        self.rows.ncols()
    }

    /// Spectral norm of the sampled constraint.
    pub fn operator_norm(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Slots the combinatorial rule leaves free.
    pub fn rule_allowed(&self) -> Vec<CoeffKey> {
        self.spec.keys().filter(|k| seam_rule_allows(&k.index)).collect()
    }

    /// Largest principal angle between the SVD null space and the span of
    /// the rule's free coordinates; `π/2` when the dimensions differ.
    pub fn rule_principal_angle(&self) -> f64 {
        let rule = self.rule_allowed();
        let mut basis = CMatrix::zeros(self.coefficient_count(), rule.len());
        for (j, k) in rule.iter().enumerate() {
            let i = self.spec.position(k).expect("key from spec");
            basis[(i, j)] = Complex64::new(1.0, 0.0);
        }
        max_principal_angle(&self.nullspace, &basis)
    }

    /// Decades separating the smallest retained singular value from the
    /// largest discarded one (relative to the largest); `None` when either
    /// set is empty.
    pub fn svd_gap(&self) -> Option<f64> {
        let retained = self.singular_values[..self.rank].last()?;
        let discarded = self.singular_values.get(self.rank)?;
        let floor = f64::EPSILON * self.operator_norm() * 1e-6;
        Some(retained.log10() - discarded.max(floor).log10())
    }

    /// Null-space dimension of each radial channel's block.
    pub fn channel_nullspace_dims(&self) -> Vec<usize> {
        let n_max = self.spec.radial.n_max();
        let per = self.n_r_samples * self.n_phi_samples;
        let keys: Vec<CoeffKey> = self.spec.keys().collect();
        (0..n_max)
            .map(|n| {
                let cols: Vec<usize> = (0..keys.len()).filter(|&j| keys[j].n == n).collect();
                let mut block = CMatrix::zeros(per, cols.len());
                for (jj, &j) in cols.iter().enumerate() {
                    block.column_mut(jj).copy_from(&self.rows.view((n * per, j), (per, 1)));
                }
                let scale: Vec<f64> = (0..cols.len()).map(|j| block.column(j).norm()).collect();
                let max = scale.iter().copied().fold(0.0, f64::max);
                for (j, s) in scale.iter().enumerate() {
                    if *s > self.svd_tol * max {
                        block.column_mut(j).scale_mut(1.0 / s);
                    }
                }
                null_space(&block, self.svd_tol).basis.ncols()
            })
            .collect()
    }

    /// Unit-norm expansion along null-space column `j`.
    pub fn null_vector(&self, j: usize) -> WaveExpansion {
        let v: Vec<Complex64> = self.nullspace.column(j).iter().copied().collect();
        WaveExpansion::from_vector(self.spec.clone(), &v).expect("length matches spec")
    }

    /// Largest `|ψ(r, π/2, φ)|` over unit-norm members of the null space,
    /// at `n_phi` azimuths and `n_r` radii. At each point the supremum over
    /// the unit sphere of the null space is the Euclidean norm of the basis
    /// values there.
    pub fn equator_max(&self, n_phi: usize, n_r: usize) -> f64 {
        if self.nullspace_dim == 0 {
            return 0.0;
        }
        let members: Vec<WaveExpansion> = (0..self.nullspace_dim).map(|j| self.null_vector(j)).collect();
        let radii = sample_radii(&self.spec.radial, self.spec.l_max().unwrap_or(0), n_r);
        let mut worst = 0.0f64;
        for &r in &radii {
            for j in 0..n_phi {
                let phi = 2.0 * PI * j as f64 / n_phi as f64;
                let s: f64 = members.iter().map(|w| w.evaluate(r, PI / 2.0, phi).norm_sqr()).sum();
                worst = worst.max(s.sqrt());
            }
        }
        worst
    }
}

/// `max |ψ(r, π/2, φ + π) - ψ(r, π/2, φ)|` over `samples` azimuths and
/// `samples` radii. Zero, up to rounding, exactly when `w` is continuous
/// across the seam.
pub fn seam_residual(w: &WaveExpansion, samples: usize) -> Result<f64> {
    if samples < 8 {
        return precondition(format!("seam residual needs at least 8 samples, got {samples}"));
    }
    let spec = w.spec();
    let hi = probe_radius(&spec.radial, spec.l_max().unwrap_or(0));
    let mut worst = 0.0f64;
    for k in 0..samples {
        let r = hi * (k + 1) as f64 / samples as f64;
        for j in 0..samples {
            let phi = 2.0 * PI * j as f64 / samples as f64;
            let d = w.evaluate(r, PI / 2.0, phi + PI) - w.evaluate(r, PI / 2.0, phi);
            worst = worst.max(d.norm());
        }
    }
    Ok(worst)
}

/// `max |ψ|` over the same sample set as [`seam_residual`], extended off the
/// equator; used to express residuals relative to the function's size.
pub fn peak_amplitude(w: &WaveExpansion, samples: usize) -> f64 {
    let spec = w.spec();
    let hi = probe_radius(&spec.radial, spec.l_max().unwrap_or(0));
    let mut worst = 0.0f64;
    for k in 0..samples {
        let r = hi * (k + 1) as f64 / samples as f64;
        for i in 0..=samples / 2 {
            let theta = PI * i as f64 / samples as f64;
            for j in 0..samples {
                let phi = 2.0 * PI * j as f64 / samples as f64;
                worst = worst.max(w.evaluate(r, theta, phi).norm());
            }
        }
    }
    worst
}

/// Basis description embedded in reports.
#[derive(Debug, Clone, Serialize)]
pub struct SpecSummary {
    pub indices: Vec<AngularIndex>,
    pub n_max: usize,
    pub scale: f64,
}

impl From<&BasisSpec> for SpecSummary {
    fn from(s: &BasisSpec) -> Self {
        Self {
            indices: s.angular().to_vec(),
            n_max: s.radial.n_max(),
            scale: s.radial.scale(),
        }
    }
}

/// Outcome of the constraint analysis for one basis.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintReport {
    pub spec: SpecSummary,
    /// Angular indices whose coefficients continuity forces to zero in every
    /// radial channel.
    pub forced_zero: Vec<AngularIndex>,
    pub surviving: Vec<AngularIndex>,
    pub coefficient_count: usize,
    pub rank: usize,
    pub nullspace_dim: usize,
    pub channel_nullspace_dims: Vec<usize>,
    pub rule_nullspace_dim: usize,
    pub rule_principal_angle: f64,
    pub operator_norm: f64,
    pub svd_gap: Option<f64>,
    /// Largest equator magnitude of a unit-norm continuous member.
    pub equator_max: f64,
    pub n_phi_samples: usize,
    pub n_r_samples: usize,
}

/// Azimuths and radii at which [`ConstraintReport::equator_max`] is probed.
pub const EQUATOR_PHI_SAMPLES: usize = 64;
pub const EQUATOR_R_SAMPLES: usize = 16;

impl ConstraintReport {
    pub fn from_system(sys: &ConstraintSystem) -> Self {
        let n_max = sys.spec.radial.n_max();
        let mut forced_zero = Vec::new();
        let mut surviving = Vec::new();
        for idx in sys.spec.angular() {
            let free = sys.allowed.iter().filter(|k| k.index == *idx).count();
            if free == n_max {
                surviving.push(*idx);
            } else if free == 0 {
                forced_zero.push(*idx);
            }
        }
        Self {
            spec: (&sys.spec).into(),
            forced_zero,
            surviving,
            coefficient_count: sys.coefficient_count(),
            rank: sys.rank,
            nullspace_dim: sys.nullspace_dim,
            channel_nullspace_dims: sys.channel_nullspace_dims(),
            rule_nullspace_dim: sys.rule_allowed().len(),
            rule_principal_angle: sys.rule_principal_angle(),
            operator_norm: sys.operator_norm(),
            svd_gap: sys.svd_gap(),
            equator_max: sys.equator_max(EQUATOR_PHI_SAMPLES, EQUATOR_R_SAMPLES),
            n_phi_samples: sys.n_phi_samples,
            n_r_samples: sys.n_r_samples,
        }
    }
}

/// Constraint report for `spec` at [`default_sampling`].
pub fn constraint_report(spec: &BasisSpec, svd_tol: f64) -> Result<ConstraintReport> {
    let (n_phi, n_r) = default_sampling(spec);
    Ok(ConstraintReport::from_system(&build_constraints_with_tol(spec, n_phi, n_r, svd_tol)?))
}

/// Constraint analysis of the odd-`l` space up to `l_max`: which
/// coefficients are forced to zero, which survive, and how large the
/// surviving functions can be on the equator plane.
pub fn fermion_exclusion_report(l_max: u32, n_max: usize) -> Result<ConstraintReport> {
    let spec = BasisSpec::odd(l_max, RadialBasis::unit(n_max)?);
    constraint_report(&spec, DEFAULT_SVD_TOL)
}

/// Default cubic box `[-4, 4]^3` for the kinetic-energy estimate.
pub const ENERGY_BOX_HALF_WIDTH: f64 = 4.0;
/// Coarsest grid spacing of the default level sequence.
pub const ENERGY_BASE_SPACING: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySample {
    pub h: f64,
    pub kinetic_energy: f64,
}

/// Kinetic-energy estimates on successively halved grids.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyDemo {
    pub samples: Vec<EnergySample>,
}

impl EnergyDemo {
    /// `E(h/2) / E(h)` for each halving.
    pub fn growth_ratios(&self) -> Vec<f64> {
        self.samples
            .windows(2)
            .map(|w| w[1].kinetic_energy / w[0].kinetic_energy)
            .collect()
    }

    /// `|E(h/2) - E(h)| / |E(h/2)|` for each halving.
    pub fn relative_changes(&self) -> Vec<f64> {
        self.samples
            .windows(2)
            .map(|w| (w[1].kinetic_energy - w[0].kinetic_energy).abs() / w[1].kinetic_energy.abs())
            .collect()
    }

    /// Fails unless every halving multiplies the estimate by at least
    /// `min_ratio`; returns the smallest ratio otherwise.
    pub fn check_divergent(&self, min_ratio: f64) -> Result<f64> {
        let ratios = self.growth_ratios();
        let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        if ratios.iter().all(|&r| r >= min_ratio) {
            Ok(worst)
        } else {
            Err(Error::Check(format!(
                "kinetic energy growth ratios {ratios:?} fall below {min_ratio}; \
                 the test function behaves as if continuous"
            )))
        }
    }

    /// Fails unless the last relative change is below `rel_tol` and the
    /// changes shrink.
    pub fn check_converged(&self, rel_tol: f64) -> Result<f64> {
        let changes = self.relative_changes();
        let last = changes.last().copied().unwrap_or(f64::INFINITY);
        let shrinking = changes.windows(2).all(|w| w[1] <= w[0]);
        if last < rel_tol && shrinking {
            Ok(last)
        } else {
            Err(Error::Check(format!(
                "kinetic energy changes {changes:?} do not settle below {rel_tol}"
            )))
        }
    }
}

/// Centered-difference estimate of `∫ |∇ψ|²` over `[-a, a]^3` where
/// `ψ(v) = f(canonical representative of v)`, i.e. the function is
/// evaluated on the identified space and any seam jump is sampled.
pub fn kinetic_energy(f: &(dyn Fn(&Vec3) -> Complex64 + Sync), h: f64, half_width: f64) -> Result<f64> {
    let cells = 2.0 * half_width / h;
    let n = cells.round();
    if !(h > 0.0) || (cells - n).abs() > 1e-9 * cells.max(1.0) || n < 2.0 {
        return precondition(format!("spacing {h} does not tile [-{half_width}, {half_width}]"));
    }
    let n = n as usize;
    let pts = n + 1;
    let coord = |i: usize| -half_width + i as f64 * h;
    let values: Vec<Vec<Complex64>> = (0..pts)
        .into_par_iter()
        .map(|i| {
            let mut slab = Vec::with_capacity(pts * pts);
            for j in 0..pts {
                for k in 0..pts {
                    let v = Vec3::new(coord(i), coord(j), coord(k));
                    slab.push(f(&canonical_representative(&v)));
                }
            }
            slab
        })
        .collect();
    let at = |i: usize, j: usize, k: usize| values[i][j * pts + k];
    let inv = 1.0 / (4.0 * h * h);
    // Per-slab partial sums, added in order so the total does not depend on
    // scheduling.
    let partial: Vec<f64> = (1..n)
        .into_par_iter()
        .map(|i| {
            let mut s = 0.0;
            for j in 1..n {
                for k in 1..n {
                    let dx = at(i + 1, j, k) - at(i - 1, j, k);
                    let dy = at(i, j + 1, k) - at(i, j - 1, k);
                    let dz = at(i, j, k + 1) - at(i, j, k - 1);
                    s += (dx.norm_sqr() + dy.norm_sqr() + dz.norm_sqr()) * inv;
                }
            }
            s
        })
        .collect();
    Ok(partial.iter().sum::<f64>() * h * h * h)
}

/// Kinetic-energy estimates of `f` on the identified space at each spacing
/// in `grid_levels` (at least three, each half the previous).
pub fn energy_divergence_demo(
    f: &(dyn Fn(&Vec3) -> Complex64 + Sync),
    grid_levels: &[f64],
) -> Result<EnergyDemo> {
    if grid_levels.len() < 3 {
        return precondition(format!("need at least 3 grid levels, got {}", grid_levels.len()));
    }
    for w in grid_levels.windows(2) {
        if (w[1] - w[0] / 2.0).abs() > 1e-12 * w[0] {
            return precondition(format!("grid level {} is not half of {}", w[1], w[0]));
        }
    }
    let samples = grid_levels
        .iter()
        .map(|&h| {
            Ok(EnergySample {
                h,
                kinetic_energy: kinetic_energy(f, h, ENERGY_BOX_HALF_WIDTH)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnergyDemo { samples })
}

/// `0.25, 0.125, 0.0625`.
pub fn default_grid_levels() -> Vec<f64> {
    (0..3).map(|k| ENERGY_BASE_SPACING / f64::powi(2.0, k)).collect()
}
