//! Two-particle wave functions as coefficients over radial × angular bases.
//!
//! `ψ(r, θ, φ) = Σ a_{lmn} g_{nl}(r) Y_lm(θ, φ)` where `g_{nl}` are the
//! radial eigenfunctions of the three-dimensional isotropic oscillator,
//!
//! ```text
//! g_{nl}(r) = b^{-3/2} N_{nl} (r/b)^l L_n^{(l+1/2)}((r/b)^2) exp(-(r/b)^2 / 2),
//! N_{nl}^2  = 2 n! / Γ(n + l + 3/2),
//! ```
//!
//! orthonormal under `∫ g g' r² dr` for each `l`. Coefficients do not carry
//! a center-of-mass dependence; every constraint acts identically at each
//! fixed center of mass.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::{FiniteAboveNegOneF64, GaussLaguerre};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configspace::{canonical_representative, to_polar, HalfSpaceVector};
use crate::error::{domain, Result};
use crate::harmonics::{ylm_all, AngularIndex, QuadratureRule};
use crate::{Complex64, Vec3};

/// Oscillator radial functions `g_{nl}`, `n < n_max`, at oscillator length
/// `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialBasis {
    n_max: usize,
    scale: f64,
}

impl RadialBasis {
    pub fn new(n_max: usize, scale: f64) -> Result<Self> {
        if n_max == 0 {
            return domain("radial basis needs at least one function");
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return domain(format!("radial scale {scale} must be positive"));
        }
        Ok(Self { n_max, scale })
    }

    /// Unit oscillator length.
    pub fn unit(n_max: usize) -> Result<Self> {
        Self::new(n_max, 1.0)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `g_{nl}(r)`.
    pub fn value(&self, n: usize, l: u32, r: f64) -> f64 {
        let b = self.scale;
        let x = r / b;
        let t = x * x;
        let alpha = l as f64 + 0.5;
        let lag = generalized_laguerre(n, alpha, t);
        let norm =
            (0.5 * (2f64.ln() + ln_factorial(n) - ln_gamma_half_integer(n as u32 + l + 1))).exp();
        b.powf(-1.5) * norm * x.powi(l as i32) * lag * (-t / 2.0).exp()
    }

    /// All `g_{nl}(r)` for `n < n_max`, `l <= l_max`, indexed `[l][n]`.
    pub fn table(&self, l_max: u32, r: f64) -> Vec<Vec<f64>> {
        (0..=l_max)
            .map(|l| (0..self.n_max).map(|n| self.value(n, l, r)).collect())
            .collect()
    }
}

fn generalized_laguerre(n: usize, alpha: f64, t: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - t;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - t) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_n^α(t)` and its derivative, from `t L_n' = n L_n - (n + α) L_{n-1}`.
fn laguerre_with_derivative(n: usize, alpha: f64, t: f64) -> (f64, f64) {
    let l = generalized_laguerre(n, alpha, t);
    let lm1 = generalized_laguerre(n - 1, alpha, t);
    (l, (n as f64 * l - (n as f64 + alpha) * lm1) / t)
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `ln Γ(k + 1/2)`.
fn ln_gamma_half_integer(k: u32) -> f64 {
    let mut acc = 0.5 * PI.ln();
    for j in 0..k {
        acc += (j as f64 + 0.5).ln();
    }
    acc
}

/// Radial rule for `∫_0^∞ f(r) r² dr`: generalized Gauss–Laguerre with
/// `α = 1/2` in `t = (r/b)²`.
#[derive(Debug, Clone)]
pub struct RadialQuadrature {
    /// `(r_i, w_i)` with the `r²` measure folded into `w_i`.
    pub nodes: Vec<(f64, f64)>,
}

impl RadialQuadrature {
    /// Nodes start from `gauss-quad` and are polished by Newton's method;
    /// weights are recomputed from `w = Γ(n+3/2) / (n! t [L_n'(t)]²)` in log
    /// form. The library's own weights lose relative accuracy at the far
    /// nodes, which the `e^t` factor then amplifies.
    pub fn new(order: usize, scale: f64) -> Self {
        let order = order.max(1);
        let alpha = 0.5;
        let gl = GaussLaguerre::new(
            NonZeroUsize::new(order).expect("nonzero"),
            FiniteAboveNegOneF64::new(alpha).expect("valid alpha"),
        );
        let b3 = scale.powi(3);
        let ln_norm = ln_gamma_half_integer(order as u32 + 1) - ln_factorial(order);
        let nodes = gl
            .as_node_weight_pairs()
            .iter()
            .map(|&(t0, _)| {
                let mut t = t0;
                for _ in 0..3 {
                    let (l, dl) = laguerre_with_derivative(order, alpha, t);
                    let step = l / dl;
                    t -= step;
                    if step.abs() <= 1e-16 * t {
                        break;
                    }
                }
                let (_, dl) = laguerre_with_derivative(order, alpha, t);
                let ln_w = ln_norm - t.ln() - 2.0 * dl.abs().ln();
                (scale * t.sqrt(), 0.5 * b3 * (ln_w + t).exp())
            })
            .collect();
        Self { nodes }
    }

    /// Order `4 n_max + l_max + 8`, exact for every product `g_{nl} g_{n'l}`
    /// and the oscillator-weighted observables used here.
    pub fn for_basis(radial: &RadialBasis, l_max: u32) -> Self {
        Self::new(4 * radial.n_max + l_max as usize + 8, radial.scale)
    }
}

/// A radial node times an angular node.
#[derive(Debug, Clone, Copy)]
pub struct SpacePoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub weight: f64,
}

/// Product quadrature over three-dimensional space (or the half-space).
#[derive(Debug, Clone)]
pub struct SpaceQuadrature {
    pub points: Vec<SpacePoint>,
}

impl SpaceQuadrature {
    pub fn new(radial: &RadialQuadrature, angular: &QuadratureRule) -> Self {
        let mut points = Vec::with_capacity(radial.nodes.len() * angular.nodes.len());
        for &(r, wr) in &radial.nodes {
            for a in &angular.nodes {
                points.push(SpacePoint {
                    r,
                    theta: a.theta,
                    phi: a.phi,
                    weight: wr * a.weight,
                });
            }
        }
        Self { points }
    }

    /// Full-space rule resolving products of functions in `spec` with
    /// angular content up to `extra_l` beyond the spec's own degree.
    pub fn full_for(spec: &BasisSpec, extra_l: u32) -> Self {
        let l = spec.l_max().unwrap_or(0) + extra_l;
        Self::new(
            &RadialQuadrature::for_basis(&spec.radial, l),
            &QuadratureRule::full_sphere_for_degree(l),
        )
    }

    /// Half-space counterpart of [`SpaceQuadrature::full_for`].
    pub fn half_for(spec: &BasisSpec, extra_l: u32) -> Self {
        let l = spec.l_max().unwrap_or(0) + extra_l;
        Self::new(
            &RadialQuadrature::for_basis(&spec.radial, l),
            &QuadratureRule::half_space_for_degree(l),
        )
    }

    pub fn integrate(&self, f: &dyn Fn(f64, f64, f64) -> Complex64) -> Complex64 {
        self.points.iter().map(|p| f(p.r, p.theta, p.phi) * p.weight).sum()
    }

    /// [`SpaceQuadrature::integrate`] split over threads; chunk sums are
    /// added in a fixed order so the result does not depend on scheduling.
    pub fn integrate_par(&self, f: &(dyn Fn(f64, f64, f64) -> Complex64 + Sync)) -> Complex64 {
        let partial: Vec<Complex64> = self
            .points
            .par_chunks(4096)
            .map(|c| c.iter().map(|p| f(p.r, p.theta, p.phi) * p.weight).sum())
            .collect();
        partial.into_iter().sum()
    }

    /// `∫ |f|²`, square-rooted.
    pub fn norm(&self, f: &dyn Fn(f64, f64, f64) -> Complex64) -> f64 {
        self.points
            .iter()
            .map(|p| f(p.r, p.theta, p.phi).norm_sqr() * p.weight)
            .sum::<f64>()
            .sqrt()
    }
}

/// One coefficient slot: angular index and radial quantum number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoeffKey {
    pub index: AngularIndex,
    pub n: usize,
}

impl CoeffKey {
    pub fn new(l: u32, m: i32, n: usize) -> Result<Self> {
        Ok(Self {
            index: AngularIndex::new(l, m)?,
            n,
        })
    }
}

impl std::fmt::Display for CoeffKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.index.l(), self.index.m(), self.n)
    }
}

/// A candidate Hilbert space: a finite set of angular indices and a radial
/// truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisSpec {
    angular: Vec<AngularIndex>,
    pub radial: RadialBasis,
}

impl BasisSpec {
    /// Indices are sorted; duplicates are rejected.
    pub fn new(angular: impl IntoIterator<Item = AngularIndex>, radial: RadialBasis) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for idx in angular {
            if !seen.insert(idx) {
                return domain(format!("duplicate angular index {idx}"));
            }
        }
        Ok(Self {
            angular: seen.into_iter().collect(),
            radial,
        })
    }

    fn filtered(l_max: u32, radial: RadialBasis, keep: impl Fn(&AngularIndex) -> bool) -> Self {
        Self {
            angular: AngularIndex::up_to(l_max).filter(keep).collect(),
            radial,
        }
    }

    /// Every `(l, m)` with `l <= l_max`.
    pub fn full(l_max: u32, radial: RadialBasis) -> Self {
        Self::filtered(l_max, radial, |_| true)
    }

    /// Full multiplets of even degree.
    pub fn even(l_max: u32, radial: RadialBasis) -> Self {
        Self::filtered(l_max, radial, |i| i.l() % 2 == 0)
    }

    /// Full multiplets of odd degree.
    pub fn odd(l_max: u32, radial: RadialBasis) -> Self {
        Self::filtered(l_max, radial, |i| i.l() % 2 == 1)
    }

    pub fn angular(&self) -> &[AngularIndex] {
        &self.angular
    }

    pub fn contains(&self, idx: &AngularIndex) -> bool {
        self.angular.binary_search(idx).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.angular.is_empty()
    }

    pub fn l_max(&self) -> Option<u32> {
        self.angular.iter().map(|i| i.l()).max()
    }

    /// Distinct degrees present.
    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.angular.iter().map(|i| i.l()).collect();
        d.dedup();
        d
    }

    pub fn len(&self) -> usize {
        self.angular.len() * self.radial.n_max
    }

    /// Coefficient slots in vector order: angular-major, radial-minor.
    pub fn keys(&self) -> impl Iterator<Item = CoeffKey> + '_ {
        self.angular
            .iter()
            .flat_map(move |&index| (0..self.radial.n_max).map(move |n| CoeffKey { index, n }))
    }

    pub fn position(&self, key: &CoeffKey) -> Option<usize> {
        if key.n >= self.radial.n_max {
            return None;
        }
        let a = self.angular.binary_search(&key.index).ok()?;
        Some(a * self.radial.n_max + key.n)
    }
}

/// Coefficients `a_{lmn}` over a [`BasisSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveExpansion {
    spec: BasisSpec,
    coeffs: BTreeMap<CoeffKey, Complex64>,
}

impl WaveExpansion {
    pub fn new(spec: BasisSpec, coeffs: BTreeMap<CoeffKey, Complex64>) -> Result<Self> {
        if let Some(k) = coeffs.keys().find(|k| spec.position(k).is_none()) {
            return domain(format!("coefficient {k} lies outside the basis"));
        }
        Ok(Self { spec, coeffs })
    }

    pub fn zero(spec: BasisSpec) -> Self {
        Self {
            spec,
            coeffs: BTreeMap::new(),
        }
    }

    /// From a dense vector in [`BasisSpec::keys`] order.
    pub fn from_vector(spec: BasisSpec, v: &[Complex64]) -> Result<Self> {
        if v.len() != spec.len() {
            return domain(format!("vector length {} != basis size {}", v.len(), spec.len()));
        }
        let coeffs = spec.keys().zip(v.iter().copied()).collect();
        Ok(Self { spec, coeffs })
    }

    pub fn to_vector(&self) -> Vec<Complex64> {
        self.spec.keys().map(|k| self.get(&k)).collect()
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &BTreeMap<CoeffKey, Complex64> {
        &self.coeffs
    }

    pub fn get(&self, key: &CoeffKey) -> Complex64 {
        self.coeffs.get(key).copied().unwrap_or_default()
    }

    /// Euclidean norm of the coefficient vector, which equals the
    /// full-space L² norm of the function.
    pub fn norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            spec: self.spec.clone(),
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, c * s)).collect(),
        }
    }

    fn populated_l_max(&self) -> Option<u32> {
        self.coeffs.keys().map(|k| k.index.l()).max()
    }

    /// `Σ a_{lmn} g_{nl}(r) Y_lm(θ, φ)`, defined on the whole sphere.
    pub fn evaluate(&self, r: f64, theta: f64, phi: f64) -> Complex64 {
        let Some(l_max) = self.populated_l_max() else {
            return Complex64::default();
        };
        let ys = ylm_all(l_max, theta, phi);
        let radial = &self.spec.radial;
        let mut cache: BTreeMap<(u32, usize), f64> = BTreeMap::new();
        self.coeffs
            .iter()
            .map(|(k, a)| {
                let g = *cache
                    .entry((k.index.l(), k.n))
                    .or_insert_with(|| radial.value(k.n, k.index.l(), r));
                a * g * ys[k.index.flat()]
            })
            .sum()
    }

    /// Evaluation at a Cartesian relative vector.
    pub fn evaluate_at(&self, v: &Vec3) -> Complex64 {
        let r = v.norm();
        if r == 0.0 {
            return self.evaluate(0.0, 0.0, 0.0);
        }
        let theta = (v.z / r).clamp(-1.0, 1.0).acos();
        self.evaluate(r, theta, v.y.atan2(v.x))
    }

    /// Evaluation at the half-space representative of the unordered pair
    /// whose labelled difference is `v`.
    pub fn evaluate_unordered(&self, v: &Vec3) -> Complex64 {
        let rep = HalfSpaceVector::new(canonical_representative(v))
            .expect("canonical representative lies in the domain");
        let p = to_polar(&rep);
        self.evaluate(p.r, p.angles.theta(), p.angles.phi())
    }

    pub fn to_records(&self) -> Vec<CoefficientRecord> {
        self.coeffs
            .iter()
            .map(|(k, c)| CoefficientRecord {
                l: k.index.l(),
                m: k.index.m(),
                n: k.n,
                re: c.re,
                im: c.im,
            })
            .collect()
    }

    /// Builds the smallest spec holding the records: their distinct angular
    /// indices and `n_max = max n + 1`.
    pub fn from_records(records: &[CoefficientRecord], scale: f64) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for rec in records {
            let key = CoeffKey::new(rec.l, rec.m, rec.n)?;
            if coeffs.insert(key, Complex64::new(rec.re, rec.im)).is_some() {
                return domain(format!("duplicate coefficient record {key}"));
            }
        }
        let n_max = coeffs.keys().map(|k| k.n + 1).max().unwrap_or(1);
        let angular: BTreeSet<AngularIndex> = coeffs.keys().map(|k| k.index).collect();
        let spec = BasisSpec::new(angular, RadialBasis::new(n_max, scale)?)?;
        Self::new(spec, coeffs)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_records())?)
    }

    pub fn from_json(text: &str, scale: f64) -> Result<Self> {
        let records: Vec<CoefficientRecord> = serde_json::from_str(text)?;
        Self::from_records(&records, scale)
    }
}

/// Interchange format for a single coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub l: u32,
    pub m: i32,
    pub n: usize,
    pub re: f64,
    pub im: f64,
}

/// Coefficients of a projection together with the truncation residual.
#[derive(Debug, Clone)]
pub struct Projection {
    pub expansion: WaveExpansion,
    /// `‖f - evaluate(expansion)‖` in full-space L².
    pub residual: f64,
    /// `‖f‖` in full-space L².
    pub norm: f64,
}

/// Projects `f(r, θ, φ)` onto `spec` with the default full-space rule for
/// the spec (angular orders padded by 8 degrees).
pub fn project(f: &dyn Fn(f64, f64, f64) -> Complex64, spec: &BasisSpec) -> Projection {
    project_with(f, spec, &SpaceQuadrature::full_for(spec, 8))
}

/// `a_{lmn} = ⟨g_{nl} Y_lm, f⟩` by the given rule.
pub fn project_with(
    f: &dyn Fn(f64, f64, f64) -> Complex64,
    spec: &BasisSpec,
    quad: &SpaceQuadrature,
) -> Projection {
    let keys: Vec<CoeffKey> = spec.keys().collect();
    let mut acc = vec![Complex64::default(); keys.len()];
    let l_max = spec.l_max().unwrap_or(0);
    let mut norm_sq = 0.0;
    let fvals: Vec<Complex64> = quad.points.iter().map(|p| f(p.r, p.theta, p.phi)).collect();
    for (p, fv) in quad.points.iter().zip(&fvals) {
        norm_sq += fv.norm_sqr() * p.weight;
        if keys.is_empty() {
            continue;
        }
        let ys = ylm_all(l_max, p.theta, p.phi);
        let gs = spec.radial.table(l_max, p.r);
        for (slot, k) in acc.iter_mut().zip(&keys) {
            let basis = ys[k.index.flat()] * gs[k.index.l() as usize][k.n];
            *slot += basis.conj() * fv * p.weight;
        }
    }
    let expansion = WaveExpansion {
        spec: spec.clone(),
        coeffs: keys.into_iter().zip(acc).collect(),
    };
    let residual = quad
        .points
        .iter()
        .zip(&fvals)
        .map(|(p, fv)| (fv - expansion.evaluate(p.r, p.theta, p.phi)).norm_sqr() * p.weight)
        .sum::<f64>()
        .sqrt();
    Projection {
        expansion,
        residual,
        norm: norm_sq.sqrt(),
    }
}

/// Behaviour of the full-space extension under `r -> -r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExchangeParity {
    /// Only even `l` populated (also reported for the zero function).
    Even,
    /// Only odd `l` populated.
    Odd,
    Mixed,
}

/// Coefficients smaller than this fraction of the largest are treated as
/// unpopulated.
pub const POPULATED_REL_TOL: f64 = 1e-10;

/// Classifies `w` by the parity of its populated degrees.
pub fn conventional_exchange_parity(w: &WaveExpansion) -> ExchangeParity {
    let max = w.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
    let (mut even, mut odd) = (false, false);
    for (k, c) in &w.coeffs {
        if max > 0.0 && c.norm() > POPULATED_REL_TOL * max {
            if k.index.l() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
    }
    match (even, odd) {
        (true, true) => ExchangeParity::Mixed,
        (false, true) => ExchangeParity::Odd,
        _ => ExchangeParity::Even,
    }
}

/// Oscillator length at which `(x + iy) e^{-r²}` is a single basis function.
pub const GAUSSIAN_DIPOLE_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `(x + iy) e^{-r²}`, unit-normalized in full-space L².
pub fn gaussian_dipole(v: &Vec3) -> Complex64 {
    // ∫ (x² + y²) e^{-2r²} d³r = (π/2)^{3/2} / 2
    let norm = ((PI / 2.0).powf(1.5) / 2.0).sqrt();
    Complex64::new(v.x, v.y) * (-v.norm_squared()).exp() / norm
}

/// [`gaussian_dipole`] in spherical coordinates.
pub fn gaussian_dipole_polar(r: f64, theta: f64, phi: f64) -> Complex64 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    gaussian_dipole(&Vec3::new(r * st * cp, r * st * sp, r * ct))
}
