//! Wigner rotation of spherical-harmonic coefficients.
//!
//! Rotations are active and parametrized by z-y-z Euler angles,
//! `R = Rz(alpha) Ry(beta) Rz(gamma)`. Rotating a function `f` gives
//! `(Rf)(u) = f(R^{-1} u)`; in coefficients this is
//! `c'_{l m'} = Σ_m D^l_{m'm}(R) c_{lm}` with
//! `D^l_{m'm} = e^{-i m' alpha} d^l_{m'm}(beta) e^{-i m gamma}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::LazyLock;

use nalgebra::{DMatrix, Matrix3, Rotation3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ylm::{AngularIndex, MAX_DEGREE};
use crate::Complex64;

/// `ln k!` for `k <= 2 * MAX_DEGREE + 1`.
static LOG_FACTORIAL: LazyLock<Vec<f64>> = LazyLock::new(|| {
    let n = 2 * MAX_DEGREE as usize + 2;
    let mut t = vec![0.0; n];
    for k in 1..n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
});

/// z-y-z Euler angles of an active rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    /// Uniformly distributed angles: alpha, gamma in [0, 2pi), beta in [0, pi].
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(
            rng.random_range(0.0..2.0 * PI),
            rng.random_range(0.0..=PI),
            rng.random_range(0.0..2.0 * PI),
        )
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let z = Vector3::z_axis();
        let y = Vector3::y_axis();
        (Rotation3::from_axis_angle(&z, self.alpha)
            * Rotation3::from_axis_angle(&y, self.beta)
            * Rotation3::from_axis_angle(&z, self.gamma))
        .into_inner()
    }

    /// Euler angles of a proper rotation matrix. At the gimbal poles
    /// (`beta` = 0 or pi) `gamma` is set to zero.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        let beta = m[(2, 2)].clamp(-1.0, 1.0).acos();
        let sb = (m[(0, 2)].powi(2) + m[(1, 2)].powi(2)).sqrt();
        if sb > 1e-12 {
            Self::new(
                m[(1, 2)].atan2(m[(0, 2)]),
                beta,
                m[(2, 1)].atan2(-m[(2, 0)]),
            )
        } else if m[(2, 2)] > 0.0 {
            Self::new(m[(1, 0)].atan2(m[(0, 0)]), 0.0, 0.0)
        } else {
            Self::new((-m[(1, 0)]).atan2(-m[(0, 0)]), PI, 0.0)
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &EulerAngles) -> Self {
        Self::from_matrix(&(self.to_matrix() * first.to_matrix()))
    }

    pub fn inverse(&self) -> Self {
        Self::new(-self.gamma, -self.beta, -self.alpha)
    }
}

/// Wigner small-d matrix `d^l(beta)`, rows and columns indexed by `m' + l`
/// and `m + l`, from the explicit sum over `k`.
pub fn wigner_small_d(l: u32, beta: f64) -> DMatrix<f64> {
    assert!(l <= MAX_DEGREE, "degree {l} above {MAX_DEGREE}");
    let lf = &*LOG_FACTORIAL;
    let li = l as i64;
    let dim = (2 * l + 1) as usize;
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let mut d = DMatrix::zeros(dim, dim);
    for mp in -li..=li {
        for m in -li..=li {
            let pref = 0.5
                * (lf[(li + mp) as usize]
                    + lf[(li - mp) as usize]
                    + lf[(li + m) as usize]
                    + lf[(li - m) as usize]);
            let k_min = 0.max(m - mp);
            let k_max = (li + m).min(li - mp);
            let mut sum = 0.0;
            for k in k_min..=k_max {
                let denom = lf[(li + m - k) as usize]
                    + lf[k as usize]
                    + lf[(li - k - mp) as usize]
                    + lf[(k - m + mp) as usize];
                let sign = if (k - m + mp).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let cos_pow = (2 * li - 2 * k + m - mp) as i32;
                let sin_pow = (2 * k - m + mp) as i32;
                sum += sign * (pref - denom).exp() * c.powi(cos_pow) * s.powi(sin_pow);
            }
            d[((mp + li) as usize, (m + li) as usize)] = sum;
        }
    }
    d
}

/// Wigner D-matrix of degree `l`, indexed like [`wigner_small_d`].
pub fn wigner_big_d(l: u32, rot: &EulerAngles) -> DMatrix<Complex64> {
    let d = wigner_small_d(l, rot.beta);
    let li = l as i64;
    DMatrix::from_fn(d.nrows(), d.ncols(), |i, j| {
        let mp = i as i64 - li;
        let m = j as i64 - li;
        Complex64::cis(-(mp as f64) * rot.alpha - (m as f64) * rot.gamma) * d[(i, j)]
    })
}

/// Coefficients of an angular function in the `Y_lm` basis.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AngularExpansion(pub BTreeMap<AngularIndex, Complex64>);

impl AngularExpansion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(idx: AngularIndex) -> Self {
        Self([(idx, Complex64::new(1.0, 0.0))].into_iter().collect())
    }

    pub fn get(&self, idx: &AngularIndex) -> Complex64 {
        self.0.get(idx).copied().unwrap_or_default()
    }

    pub fn norm(&self) -> f64 {
        self.0.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn l_max(&self) -> Option<u32> {
        self.0.keys().map(|i| i.l()).max()
    }

    pub fn value(&self, theta: f64, phi: f64) -> Complex64 {
        let Some(l_max) = self.l_max() else {
            return Complex64::default();
        };
        let table = super::ylm_all(l_max, theta, phi);
        self.0.iter().map(|(i, c)| c * table[i.flat()]).sum()
    }
}

impl FromIterator<(AngularIndex, Complex64)> for AngularExpansion {
    fn from_iter<T: IntoIterator<Item = (AngularIndex, Complex64)>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Applies the rotation block by block. The output covers the full
/// multiplet of every degree present in the input.
pub fn wigner_rotate(coeffs: &AngularExpansion, rot: &EulerAngles) -> AngularExpansion {
    let mut degrees: Vec<u32> = coeffs.0.keys().map(|i| i.l()).collect();
    degrees.dedup();
    let mut out = BTreeMap::new();
    for l in degrees {
        let dmat = wigner_big_d(l, rot);
        let li = l as i32;
        let input: Vec<Complex64> = AngularIndex::multiplet(l).map(|i| coeffs.get(&i)).collect();
        for (row, idx) in AngularIndex::multiplet(l).enumerate() {
            let v: Complex64 = (0..input.len()).map(|col| dmat[(row, col)] * input[col]).sum();
            debug_assert_eq!(idx.m() + li, row as i32);
            out.insert(idx, v);
        }
    }
    AngularExpansion(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::quadrature::QuadratureRule;
    use crate::harmonics::eval_ylm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn random_coeffs(l_max: u32, rng: &mut ChaCha8Rng) -> AngularExpansion {
        AngularIndex::up_to(l_max)
            .map(|i| (i, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
            .collect()
    }

    fn max_diff(a: &AngularExpansion, b: &AngularExpansion) -> f64 {
        a.0.keys()
            .chain(b.0.keys())
            .map(|k| (a.get(k) - b.get(k)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn d1_closed_form() {
        let beta = 0.83;
        let d = wigner_small_d(1, beta);
        let (c, s) = (beta.cos(), beta.sin());
        let r2 = 2f64.sqrt();
        let expected = [
            [(1.0 + c) / 2.0, -s / r2, (1.0 - c) / 2.0],
            [s / r2, c, -s / r2],
            [(1.0 - c) / 2.0, s / r2, (1.0 + c) / 2.0],
        ];
        // rows m' = 1, 0, -1 in the textbook layout; ours runs m' = -1, 0, 1.
        for (i, mp) in [1i32, 0, -1].iter().enumerate() {
            for (j, m) in [1i32, 0, -1].iter().enumerate() {
                let got = d[((mp + 1) as usize, (m + 1) as usize)];
                assert!((got - expected[i][j]).abs() < 1e-14, "m'={mp} m={m}");
            }
        }
    }

    #[test]
    fn identity_leaves_coefficients() {
        let c = random_coeffs(4, &mut rng());
        let r = wigner_rotate(&c, &EulerAngles::identity());
        assert!(max_diff(&c, &r) < 1e-13);
    }

    #[test]
    fn scalar_block_is_invariant() {
        let c = AngularExpansion::single(AngularIndex::new(0, 0).unwrap());
        let mut rng = rng();
        for _ in 0..10 {
            let r = wigner_rotate(&c, &EulerAngles::random(&mut rng));
            assert!(max_diff(&c, &r) < 1e-15);
        }
    }

    #[test]
    fn unitarity_and_composition() {
        let mut rng = rng();
        for _ in 0..20 {
            let c = random_coeffs(8, &mut rng);
            let r1 = EulerAngles::random(&mut rng);
            let r2 = EulerAngles::random(&mut rng);
            let once = wigner_rotate(&c, &r1);
            assert!((once.norm() - c.norm()).abs() < 1e-12);
            let twice = wigner_rotate(&once, &r2);
            let direct = wigner_rotate(&c, &r2.compose(&r1));
            assert!(max_diff(&twice, &direct) < 1e-10);
            let back = wigner_rotate(&once, &r1.inverse());
            assert!(max_diff(&back, &c) < 1e-10);
        }
    }

    #[test]
    fn euler_round_trip_through_matrix() {
        let mut rng = rng();
        for _ in 0..50 {
            let e = EulerAngles::random(&mut rng);
            let back = EulerAngles::from_matrix(&e.to_matrix());
            assert!((back.to_matrix() - e.to_matrix()).amax() < 1e-12);
        }
        for e in [EulerAngles::new(0.3, 0.0, 0.4), EulerAngles::new(0.3, PI, 0.4)] {
            let back = EulerAngles::from_matrix(&e.to_matrix());
            assert!((back.to_matrix() - e.to_matrix()).amax() < 1e-12);
        }
    }

    /// The rotated coefficients must describe `f(R^{-1} u)`; checked by
    /// projecting that function onto the harmonics with sphere quadrature.
    #[test]
    fn rotation_matches_quadrature_projection() {
        let rule = QuadratureRule::full_sphere(24, 48);
        let cases = [
            (AngularExpansion::single(AngularIndex::new(1, 0).unwrap()), EulerAngles::new(0.0, PI / 2.0, 0.0)),
            (random_coeffs(3, &mut rng()), EulerAngles::new(0.4, 1.1, -2.3)),
        ];
        for (c, rot) in cases {
            let rotated = wigner_rotate(&c, &rot);
            let inv = rot.to_matrix().transpose();
            let f = |theta: f64, phi: f64| {
                let u = Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
                let w = inv * u;
                let t = w.z.clamp(-1.0, 1.0).acos();
                let p = w.y.atan2(w.x);
                c.value(t, p)
            };
            for idx in AngularIndex::up_to(c.l_max().unwrap()) {
                let proj = rule.inner(&|t, p| eval_ylm(&idx, t, p), &f);
                assert!((proj - rotated.get(&idx)).norm() < 1e-10, "{idx}");
            }
        }
    }

    #[test]
    fn y10_rotated_about_y_by_quarter_turn() {
        let c = AngularExpansion::single(AngularIndex::new(1, 0).unwrap());
        let r = wigner_rotate(&c, &EulerAngles::new(0.0, PI / 2.0, 0.0));
        let h = 1.0 / 2f64.sqrt();
        assert!((r.get(&AngularIndex::new(1, 1).unwrap()) - Complex64::new(-h, 0.0)).norm() < 1e-14);
        assert!((r.get(&AngularIndex::new(1, -1).unwrap()) - Complex64::new(h, 0.0)).norm() < 1e-14);
        assert!(r.get(&AngularIndex::new(1, 0).unwrap()).norm() < 1e-15);
    }
}
