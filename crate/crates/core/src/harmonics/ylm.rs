use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::Complex64;

/// Highest degree supported by the evaluators.
pub const MAX_DEGREE: u32 = 64;

/// Angular momentum indices `(l, m)` with `|m| <= l`.
///
/// Ordered by `l`, then `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawIndex", into = "RawIndex")]
pub struct AngularIndex {
    l: u32,
    m: i32,
}

#[derive(Serialize, Deserialize)]
struct RawIndex {
    l: u32,
    m: i32,
}

impl TryFrom<RawIndex> for AngularIndex {
    type Error = crate::Error;
    fn try_from(raw: RawIndex) -> Result<Self> {
        AngularIndex::new(raw.l, raw.m)
    }
}

impl From<AngularIndex> for RawIndex {
    fn from(i: AngularIndex) -> Self {
        RawIndex { l: i.l, m: i.m }
    }
}

impl AngularIndex {
    pub fn new(l: u32, m: i32) -> Result<Self> {
        if l > MAX_DEGREE {
            return domain(format!("degree l={l} exceeds the supported maximum {MAX_DEGREE}"));
        }
        if m.unsigned_abs() > l {
            return domain(format!("|m|={} exceeds l={l}", m.unsigned_abs()));
        }
        Ok(Self { l, m })
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    /// Position in the flat `l*l + l + m` layout used by [`ylm_all`].
    pub fn flat(&self) -> usize {
        let l = self.l as i64;
        (l * l + l + self.m as i64) as usize
    }

    /// All `2l+1` indices of the multiplet of degree `l`.
    pub fn multiplet(l: u32) -> impl Iterator<Item = AngularIndex> {
        let li = l as i32;
        (-li..=li).map(move |m| AngularIndex { l, m })
    }

    /// Every index with `l <= l_max`, in order.
    pub fn up_to(l_max: u32) -> impl Iterator<Item = AngularIndex> {
        (0..=l_max).flat_map(AngularIndex::multiplet)
    }
}

impl std::fmt::Display for AngularIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.l, self.m)
    }
}

/// Fully normalized associated Legendre values `P̄_l^m(cos θ)` for fixed
/// `m >= 0` and `l = m..=l_max`, Condon–Shortley phase included.
///
/// Normalized so that `Y_lm = P̄_l^m e^{imφ}` is orthonormal on the sphere.
pub(crate) fn normalized_legendre_column(l_max: u32, m: u32, cos_t: f64, sin_t: f64) -> Vec<f64> {
    debug_assert!(m <= l_max);
    let mut out = Vec::with_capacity((l_max - m + 1) as usize);
    // P̄_m^m = (-1)^m sqrt((2m+1)/(4π) Π_{k=1}^m (2k-1)/(2k)) sin^m θ
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        let k = k as f64;
        pmm *= -((2.0 * k + 1.0) / (2.0 * k)).sqrt() * sin_t;
    }
    out.push(pmm);
    if l_max == m {
        return out;
    }
    let mf = m as f64;
    let mut prev = pmm;
    let mut cur = cos_t * (2.0 * mf + 3.0).sqrt() * pmm;
    out.push(cur);
    for l in (m + 2)..=l_max {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lm1 = lf - 1.0;
        let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
        let next = a * (cos_t * cur - b * prev);
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// `(sin θ, cos θ)`, exact on the equator where `cos(π/2)` would otherwise
/// round to `6e-17` and leave spurious residue in vanishing harmonics.
fn polar_trig(theta: f64) -> (f64, f64) {
    if theta == std::f64::consts::FRAC_PI_2 {
        (1.0, 0.0)
    } else {
        theta.sin_cos()
    }
}

fn reduce_phi(phi: f64) -> f64 {
    phi.rem_euclid(2.0 * PI)
}

/// Complex spherical harmonic `Y_lm(θ, φ)`, orthonormal on the full sphere,
/// Condon–Shortley phase.
pub fn eval_ylm(idx: &AngularIndex, theta: f64, phi: f64) -> Complex64 {
    let am = idx.m.unsigned_abs();
    let (sin_t, cos_t) = polar_trig(theta);
    let p = *normalized_legendre_column(idx.l, am, cos_t, sin_t)
        .last()
        .expect("column is never empty");
    let phase = Complex64::cis(am as f64 * reduce_phi(phi));
    let y = phase * p;
    if idx.m < 0 {
        // Y_{l,-m} = (-1)^m conj(Y_{lm})
        let s = if am % 2 == 0 { 1.0 } else { -1.0 };
        y.conj() * s
    } else {
        y
    }
}

/// `Y_lm(θ, φ)` after validating the indices.
pub fn ylm(l: u32, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    Ok(eval_ylm(&AngularIndex::new(l, m)?, theta, phi))
}

/// Every `Y_lm` with `l <= l_max` at one direction, stored at
/// [`AngularIndex::flat`].
pub fn ylm_all(l_max: u32, theta: f64, phi: f64) -> Vec<Complex64> {
    let n = ((l_max + 1) * (l_max + 1)) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let (sin_t, cos_t) = polar_trig(theta);
    let phi = reduce_phi(phi);
    for m in 0..=l_max {
        let col = normalized_legendre_column(l_max, m, cos_t, sin_t);
        let phase = Complex64::cis(m as f64 * phi);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for (k, p) in col.into_iter().enumerate() {
            let l = m + k as u32;
            let pos = AngularIndex { l, m: m as i32 }.flat();
            let y = phase * p;
            out[pos] = y;
            if m > 0 {
                let neg = AngularIndex { l, m: -(m as i32) }.flat();
                out[neg] = y.conj() * sign;
            }
        }
    }
    out
}

/// Whether `Y_lm` vanishes identically on the equator `θ = π/2`, which
/// happens exactly when `l - m` is odd.
pub fn equator_zero(idx: &AngularIndex) -> bool {
    (idx.l as i64 - idx.m as i64).rem_euclid(2) == 1
}

/// `(-1)^m`, the factor picked up by `Y_lm` under `φ -> φ + π`.
pub fn phi_shift_factor(idx: &AngularIndex) -> f64 {
    if idx.m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}
