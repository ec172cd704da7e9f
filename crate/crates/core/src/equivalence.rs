//! Extension of half-space wave functions to even full-space functions and
//! comparison of matrix elements between the two descriptions.
//!
//! An even-`l` function `ψ` on the half-space extends to `Ψ(r) = ψ(r̃)/√2`,
//! `r̃` the canonical representative of `r`. `Ψ` is even under `r → -r`
//! and the full-space integral of an even integrand is twice the half-space
//! one, so the `1/√2` makes norms and matrix elements agree.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::configspace::canonical_representative;
use crate::error::{domain, precondition, Result};
use crate::expansion::{
    conventional_exchange_parity, CoeffKey, ExchangeParity, RadialBasis, RadialQuadrature, SpaceQuadrature, WaveExpansion,
};
use crate::harmonics::{default_orders, ylm_all, QuadratureRule};
use crate::{Complex64, Vec3};

/// Kernels must be even to this accuracy on the validation samples.
pub const EVENNESS_TOL: f64 = 1e-12;
const EVENNESS_SAMPLES: usize = 64;
const EVENNESS_SEED: u64 = 0x0b5e;

type Kernel = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;

/// A multiplicative operator in the relative coordinate, even under
/// inversion.
#[derive(Clone)]
pub struct Observable {
    name: String,
    kernel: Kernel,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable").field("name", &self.name).finish_non_exhaustive()
    }
}

impl Observable {
    /// Checks `|k(r) - k(-r)| < 1e-12` on seeded samples in the ball of
    /// radius 5 and rejects kernels that fail.
    pub fn new(name: impl Into<String>, kernel: impl Fn(&Vec3) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let name = name.into();
        let mut rng = ChaCha8Rng::seed_from_u64(EVENNESS_SEED);
        for _ in 0..EVENNESS_SAMPLES {
            let v = Vec3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            );
            let (a, b) = (kernel(&v), kernel(&-v));
            if !a.is_finite() || !b.is_finite() {
                return domain(format!("observable {name}: kernel not finite at {v:?}"));
            }
            if (a - b).abs() >= EVENNESS_TOL {
                return domain(format!("observable {name}: kernel not even under inversion at {v:?}"));
            }
        }
        Ok(Self {
            name,
            kernel: Arc::new(kernel),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, v: &Vec3) -> f64 {
        (self.kernel)(v)
    }

    pub fn identity() -> Self {
        Self::new("identity", |_| 1.0).expect("even")
    }

    pub fn r_squared() -> Self {
        Self::new("r_squared", |v| v.norm_squared()).expect("even")
    }

    /// `e^{-r²}`.
    pub fn gaussian_well() -> Self {
        Self::new("gaussian_well", |v| (-v.norm_squared()).exp()).expect("even")
    }

    /// Looks up one of the built-in observables by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(Self::identity()),
            "r_squared" => Some(Self::r_squared()),
            "gaussian_well" => Some(Self::gaussian_well()),
            _ => None,
        }
    }
}

/// Names accepted by [`Observable::builtin`].
pub const BUILTIN_OBSERVABLES: [&str; 3] = ["identity", "r_squared", "gaussian_well"];

/// A half-space function extended to all of space through the canonical
/// representative.
#[derive(Debug, Clone)]
pub struct FullSpaceFunction {
    inner: WaveExpansion,
    factor: f64,
}

impl FullSpaceFunction {
    pub fn eval(&self, v: &Vec3) -> Complex64 {
        self.inner.evaluate_at(&canonical_representative(v)) * self.factor
    }

    pub fn eval_polar(&self, r: f64, theta: f64, phi: f64) -> Complex64 {
        self.eval(&cartesian(r, theta, phi))
    }

    /// Amplitude factor applied on top of `ψ`.
    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn half_space_function(&self) -> &WaveExpansion {
        &self.inner
    }
}

fn require_even(w: &WaveExpansion) -> Result<()> {
    match conventional_exchange_parity(w) {
        ExchangeParity::Even => Ok(()),
        p => precondition(format!(
            "only even-l functions extend single-valuedly to full space (got {p:?} content)"
        )),
    }
}

/// `Ψ(r) = ψ(r̃) / √2`.
pub fn extend_to_fullspace(w: &WaveExpansion) -> Result<FullSpaceFunction> {
    require_even(w)?;
    Ok(FullSpaceFunction {
        inner: w.clone(),
        factor: std::f64::consts::FRAC_1_SQRT_2,
    })
}

/// `Ψ(r) = ψ(r̃)` without the `1/√2`; full-space integrals come out doubled.
pub fn extend_unnormalized(w: &WaveExpansion) -> Result<FullSpaceFunction> {
    require_even(w)?;
    Ok(FullSpaceFunction {
        inner: w.clone(),
        factor: 1.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixElementRecord {
    pub observable: String,
    pub half_value: Complex64,
    pub full_value: Complex64,
    pub abs_diff: f64,
    /// `Re full / Re half`, absent when the half-space value vanishes.
    pub ratio: Option<f64>,
    pub renormalized: bool,
}

/// Angular padding of the comparison quadratures.
const EXTRA_L: u32 = 8;

/// Angular orders of the comparison rules. Each rule uses at least the
/// default orders for the bases involved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CompareOptions {
    pub renormalize: bool,
    pub min_theta: usize,
    pub min_phi: usize,
}

impl CompareOptions {
    pub fn renormalized() -> Self {
        Self {
            renormalize: true,
            ..Self::default()
        }
    }
}

/// `⟨ψ₁|K|ψ₂⟩` on the half-space against `⟨Ψ₁|K|Ψ₂⟩` on full space, with
/// explicit options.
pub fn matrix_element_compare_with(
    w1: &WaveExpansion,
    w2: &WaveExpansion,
    obs: &Observable,
    opts: CompareOptions,
) -> Result<MatrixElementRecord> {
    let ext = if opts.renormalize { extend_to_fullspace } else { extend_unnormalized };
    let (e1, e2) = (ext(w1)?, ext(w2)?);
    let (r1, r2) = (&w1.spec().radial, &w2.spec().radial);
    if r1.scale() != r2.scale() {
        return precondition("matrix elements between different oscillator lengths");
    }
    let l = w1.spec().l_max().max(w2.spec().l_max()).unwrap_or(0) + EXTRA_L;
    let radial = RadialQuadrature::for_basis(&RadialBasis::new(r1.n_max().max(r2.n_max()), r1.scale())?, l);
    let (t, p) = default_orders(l);
    let (t, p) = (t.max(opts.min_theta), p.max(opts.min_phi));
    let cart = cartesian;
    let half = SpaceQuadrature::new(&radial, &QuadratureRule::half_space(t, p)).integrate_par(&|r, t, p| {
        w1.evaluate(r, t, p).conj() * obs.eval(&cart(r, t, p)) * w2.evaluate(r, t, p)
    });
    let full = SpaceQuadrature::new(&radial, &QuadratureRule::full_sphere(t, p)).integrate_par(&|r, t, p| {
        let v = cart(r, t, p);
        e1.eval(&v).conj() * obs.eval(&v) * e2.eval(&v)
    });
    Ok(MatrixElementRecord {
        observable: obs.name().to_string(),
        half_value: half,
        full_value: full,
        abs_diff: (half - full).norm(),
        ratio: (half.re.abs() > 1e-300).then(|| full.re / half.re),
        renormalized: opts.renormalize,
    })
}

/// `⟨ψ₁|K|ψ₂⟩` on the half-space against `⟨Ψ₁|K|Ψ₂⟩` on full space.
pub fn matrix_element_compare(w1: &WaveExpansion, w2: &WaveExpansion, obs: &Observable) -> Result<MatrixElementRecord> {
    matrix_element_compare_with(w1, w2, obs, CompareOptions::renormalized())
}

/// As [`matrix_element_compare`] but extending without the `1/√2`.
pub fn matrix_element_compare_unnormalized(
    w1: &WaveExpansion,
    w2: &WaveExpansion,
    obs: &Observable,
) -> Result<MatrixElementRecord> {
    matrix_element_compare_with(w1, w2, obs, CompareOptions::default())
}

/// Many matrix elements over a shared basis at once.
///
/// Every expansion in `ws` must use the same spec. The basis is tabulated
/// once on the half-space nodes and once on the canonical representatives
/// of the full-space nodes, so each record costs a weighted dot product.
/// Agrees with [`matrix_element_compare_with`] to rounding.
pub fn matrix_element_batch(
    ws: &[WaveExpansion],
    pairs: &[(usize, usize)],
    observables: &[Observable],
    opts: CompareOptions,
) -> Result<Vec<MatrixElementRecord>> {
    let Some(first) = ws.first() else {
        return Ok(Vec::new());
    };
    let spec = first.spec();
    if ws.iter().any(|w| w.spec() != spec) {
        return precondition("batched matrix elements need a common spec");
    }
    for w in ws {
        require_even(w)?;
    }
    if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= ws.len() || j >= ws.len()) {
        return precondition(format!("pair ({i}, {j}) out of range for {} expansions", ws.len()));
    }
    let factor = if opts.renormalize { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
    let l = spec.l_max().unwrap_or(0) + EXTRA_L;
    let radial = RadialQuadrature::for_basis(&spec.radial, l);
    let (t, p) = default_orders(l);
    let (t, p) = (t.max(opts.min_theta), p.max(opts.min_phi));
    let keys: Vec<CoeffKey> = spec.keys().collect();
    let l_basis = spec.l_max().unwrap_or(0);
    let coeffs: Vec<Vec<Complex64>> = ws.iter().map(|w| w.to_vector()).collect();

    // Values of every expansion at every node, plus node positions and weights.
    let tabulate = |quad: SpaceQuadrature, canonical: bool| -> (Vec<Vec<Complex64>>, Vec<Vec3>, Vec<f64>) {
        let rows: Vec<(Vec<Complex64>, Vec3, f64)> = quad
            .points
            .par_iter()
            .map(|pt| {
                let v = cartesian(pt.r, pt.theta, pt.phi);
                let (r, theta, phi) = if canonical {
                    spherical(&canonical_representative(&v))
                } else {
                    (pt.r, pt.theta, pt.phi)
                };
                let ys = ylm_all(l_basis, theta, phi);
                let basis: Vec<Complex64> = keys
                    .iter()
                    .map(|k| ys[k.index.flat()] * spec.radial.value(k.n, k.index.l(), r))
                    .collect();
                let vals = coeffs
                    .iter()
                    .map(|a| a.iter().zip(&basis).map(|(c, b)| c * b).sum())
                    .collect();
                (vals, v, pt.weight)
            })
            .collect();
        let mut vals = Vec::with_capacity(rows.len());
        let mut pos = Vec::with_capacity(rows.len());
        let mut wts = Vec::with_capacity(rows.len());
        for (a, b, c) in rows {
            vals.push(a);
            pos.push(b);
            wts.push(c);
        }
        (vals, pos, wts)
    };
    let half = tabulate(SpaceQuadrature::new(&radial, &QuadratureRule::half_space(t, p)), false);
    let full = tabulate(SpaceQuadrature::new(&radial, &QuadratureRule::full_sphere(t, p)), true);

    let element = |tab: &(Vec<Vec<Complex64>>, Vec<Vec3>, Vec<f64>), kern: &[f64], i: usize, j: usize| -> Complex64 {
        let (vals, _, wts) = tab;
        let partial: Vec<Complex64> = vals
            .par_chunks(4096)
            .zip(kern.par_chunks(4096))
            .zip(wts.par_chunks(4096))
            .map(|((v, k), w)| {
                v.iter()
                    .zip(k)
                    .zip(w)
                    .map(|((row, k), w)| row[i].conj() * row[j] * (k * w))
                    .sum()
            })
            .collect();
        partial.into_iter().sum()
    };

    let mut out = Vec::with_capacity(pairs.len() * observables.len());
    for obs in observables {
        let kh: Vec<f64> = half.1.par_iter().map(|v| obs.eval(v)).collect();
        let kf: Vec<f64> = full.1.par_iter().map(|v| obs.eval(v)).collect();
        for &(i, j) in pairs {
            let h = element(&half, &kh, i, j);
            let f = element(&full, &kf, i, j) * (factor * factor);
            out.push(MatrixElementRecord {
                observable: obs.name().to_string(),
                half_value: h,
                full_value: f,
                abs_diff: (h - f).norm(),
                ratio: (h.re.abs() > 1e-300).then(|| f.re / h.re),
                renormalized: opts.renormalize,
            });
        }
    }
    Ok(out)
}

fn cartesian(r: f64, theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(r * st * cp, r * st * sp, r * ct)
}

fn spherical(v: &Vec3) -> (f64, f64, f64) {
    let r = v.norm();
    if r == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    (r, (v.z / r).clamp(-1.0, 1.0).acos(), v.y.atan2(v.x))
}
