//! Unordered pairs of points as center of mass plus a half-space relative
//! vector.
//!
//! The relative vector of `{r1, r2}` is taken as `r2 - r1` or `r1 - r2`,
//! whichever lies in the domain
//!
//! ```text
//! D = [z > 0] ∪ [z = 0, y > 0] ∪ [z = y = 0, x >= 0]
//! ```
//!
//! All branch predicates are evaluated bitwise: there is no tolerance on the
//! ties, so membership in `D` is a total function and the partition
//! `v ∈ D xor -v ∈ D` holds exactly for every nonzero finite `v`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::Vec3;

/// Two labelled positions, the configuration of distinguishable particles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderedPair {
    pub r1: Vec3,
    pub r2: Vec3,
}

impl OrderedPair {
    pub fn new(r1: Vec3, r2: Vec3) -> Self {
        Self { r1, r2 }
    }

    /// The same two points with the labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            r1: self.r2,
            r2: self.r1,
        }
    }

    /// Set equality of the two points, up to an absolute tolerance per component.
    pub fn same_points(&self, other: &OrderedPair, tol: f64) -> bool {
        let close = |a: &Vec3, b: &Vec3| (a - b).amax() <= tol;
        (close(&self.r1, &other.r1) && close(&self.r2, &other.r2))
            || (close(&self.r1, &other.r2) && close(&self.r2, &other.r1))
    }
}

/// A relative vector lying in the half-space domain `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct HalfSpaceVector(Vec3);

impl HalfSpaceVector {
    pub fn new(v: Vec3) -> Result<Self> {
        if !v.iter().all(|c| c.is_finite()) {
            return domain(format!("non-finite relative vector {v:?}"));
        }
        if !in_domain(&v) {
            return domain(format!(
                "relative vector ({}, {}, {}) is outside the half-space domain",
                v.x, v.y, v.z
            ));
        }
        Ok(Self(v))
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    pub fn into_inner(self) -> Vec3 {
        self.0
    }
}

impl TryFrom<[f64; 3]> for HalfSpaceVector {
    type Error = crate::Error;

    fn try_from(c: [f64; 3]) -> Result<Self> {
        Self::new(Vec3::new(c[0], c[1], c[2]))
    }
}

impl From<HalfSpaceVector> for [f64; 3] {
    fn from(v: HalfSpaceVector) -> Self {
        [v.0.x, v.0.y, v.0.z]
    }
}

/// Center of mass and canonical relative vector of an unordered pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCoords {
    pub center: Vec3,
    pub rel: HalfSpaceVector,
}

impl PairCoords {
    /// Fails with a domain error when `rel` is not in `D`.
    pub fn new(center: Vec3, rel: Vec3) -> Result<Self> {
        if !center.iter().all(|c| c.is_finite()) {
            return domain("non-finite center of mass");
        }
        Ok(Self {
            center,
            rel: HalfSpaceVector::new(rel)?,
        })
    }
}

/// Polar angles of a direction in the half-space.
///
/// `0 <= theta <= pi/2`; `0 <= phi < 2pi` below the equator plane and
/// `0 <= phi < pi` on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarAngles {
    theta: f64,
    phi: f64,
}

impl PolarAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let ok = if theta == FRAC_PI_2 {
            (0.0..PI).contains(&phi)
        } else {
            (0.0..FRAC_PI_2).contains(&theta) && (0.0..TAU).contains(&phi)
        };
        if !ok {
            return domain(format!(
                "angles (theta={theta}, phi={phi}) outside the half-space range"
            ));
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Result of [`to_polar`]. At the origin the angles are undefined; they are
/// reported as `(0, 0)` with `degenerate` set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarCoords {
    pub r: f64,
    pub angles: PolarAngles,
    pub degenerate: bool,
}

/// Membership in the half-space domain `D`.
pub fn in_domain(v: &Vec3) -> bool {
    v.z > 0.0 || (v.z == 0.0 && v.y > 0.0) || (v.z == 0.0 && v.y == 0.0 && v.x >= 0.0)
}

/// `v` if it lies in `D`, otherwise `-v`. This is the relative vector of the
/// unordered pair whose labelled difference is `v`.
pub fn canonical_representative(v: &Vec3) -> Vec3 {
    if in_domain(v) {
        *v
    } else {
        -v
    }
}

/// Maps an ordered pair to the coordinates of the unordered pair it defines.
///
/// The result is identical, bit for bit, for `p` and `p.swapped()`.
pub fn canonicalize(p: &OrderedPair) -> Result<PairCoords> {
    if !p.r1.iter().chain(p.r2.iter()).all(|c| c.is_finite()) {
        return domain("non-finite particle coordinate");
    }
    let (a, b) = (&p.r1, &p.r2);
    let forward = b.z > a.z
        || (b.z == a.z && b.y > a.y)
        || (b.z == a.z && b.y == a.y && b.x >= a.x);
    let rel = if forward { b - a } else { a - b };
    // Addition commutes exactly, so the center does not depend on the labels.
    let center = (a + b) / 2.0;
    debug_assert!(in_domain(&rel));
    Ok(PairCoords {
        center,
        rel: HalfSpaceVector(rel),
    })
}

/// Recovers the two points `{R + r/2, R - r/2}`, returned in canonical order
/// (`r2 - r1` equals the relative vector).
pub fn invert(c: &PairCoords) -> OrderedPair {
    let half = c.rel.0 / 2.0;
    OrderedPair {
        r1: c.center - half,
        r2: c.center + half,
    }
}

/// Spherical decomposition of a half-space vector about the z axis.
pub fn to_polar(v: &HalfSpaceVector) -> PolarCoords {
    let v = v.0;
    let r = v.norm();
    if r == 0.0 {
        return PolarCoords {
            r: 0.0,
            angles: PolarAngles {
                theta: 0.0,
                phi: 0.0,
            },
            degenerate: true,
        };
    }
    let rho = v.x.hypot(v.y);
    let theta = if v.z == 0.0 {
        FRAC_PI_2
    } else {
        // Keep points strictly above the plane off the equator, where phi is
        // restricted to [0, pi).
        rho.atan2(v.z).min(f64::from_bits(FRAC_PI_2.to_bits() - 1))
    };
    let mut phi = if rho == 0.0 { 0.0 } else { v.y.atan2(v.x) };
    if phi < 0.0 {
        phi += TAU;
    }
    // atan2(-0.0, x) returns -0.0 and rounding can land exactly on 2pi.
    phi += 0.0;
    if phi >= TAU {
        phi = 0.0;
    }
    PolarCoords {
        r,
        angles: PolarAngles { theta, phi },
        degenerate: false,
    }
}

/// Inverse of [`to_polar`] for non-degenerate inputs.
pub fn from_polar(r: f64, angles: &PolarAngles) -> Result<HalfSpaceVector> {
    if !(r >= 0.0 && r.is_finite()) {
        return domain(format!("radius {r} must be finite and non-negative"));
    }
    let (st, ct) = angles.theta.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    let z = if angles.theta == FRAC_PI_2 { 0.0 } else { r * ct };
    HalfSpaceVector::new(Vec3::new(r * st * cp, r * st * sp, z))
}

/// The relative vector of the neighbouring unordered pair across the seam.
///
/// For `v = (2x, 2y, eps)` the pairs `{(x, y, z+eps), (-x, -y, z)}` and
/// `{(x, y, z-eps), (-x, -y, z)}` are close in space, but the second has
/// relative vector `(-2x, -2y, eps)`. The transverse jump does not shrink as
/// `eps -> 0` unless `x = y = 0`.
pub fn seam_partner(v: &HalfSpaceVector, eps: f64) -> Result<HalfSpaceVector> {
    if !(eps > 0.0) {
        return domain(format!("seam offset eps={eps} must be positive"));
    }
    if v.0.z != eps {
        return domain(format!(
            "vector z component {} does not match seam offset {eps}",
            v.0.z
        ));
    }
    HalfSpaceVector::new(Vec3::new(-v.0.x, -v.0.y, eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn canonicalize_examples() {
        let c = canonicalize(&OrderedPair::new(v(0., 0., 0.), v(0., 0., 2.))).unwrap();
        assert_eq!(c.center, v(0., 0., 1.));
        assert_eq!(*c.rel.as_vec(), v(0., 0., 2.));

        let p = OrderedPair::new(v(0., 0., 1.), v(0., 0., 0.));
        let c = canonicalize(&p).unwrap();
        assert_eq!(c.center, v(0., 0., 0.5));
        assert_eq!(*c.rel.as_vec(), v(0., 0., 1.));
        assert_eq!(c, canonicalize(&p.swapped()).unwrap());

        let above = canonicalize(&OrderedPair::new(v(1., 0., 0.01), v(-1., 0., 0.))).unwrap();
        let below = canonicalize(&OrderedPair::new(v(1., 0., -0.01), v(-1., 0., 0.))).unwrap();
        assert_eq!(*above.rel.as_vec(), v(2., 0., 0.01));
        assert_eq!(*below.rel.as_vec(), v(-2., 0., 0.01));

        let same = canonicalize(&OrderedPair::new(v(1.5, -2., 3.), v(1.5, -2., 3.))).unwrap();
        assert_eq!(*same.rel.as_vec(), v(0., 0., 0.));
        assert!(in_domain(same.rel.as_vec()));
    }

    #[test]
    fn canonicalize_rejects_nan() {
        let p = OrderedPair::new(v(f64::NAN, 0., 0.), v(0., 0., 0.));
        assert!(matches!(canonicalize(&p), Err(crate::Error::Domain(_))));
        let p = OrderedPair::new(v(0., 0., 0.), v(0., f64::INFINITY, 0.));
        assert!(canonicalize(&p).is_err());
    }

    #[test]
    fn invert_examples() {
        let c = PairCoords::new(v(0., 0., 1.), v(0., 0., 2.)).unwrap();
        let p = invert(&c);
        assert!(p.same_points(&OrderedPair::new(v(0., 0., 2.), v(0., 0., 0.)), 0.0));
        assert_eq!(canonicalize(&p).unwrap(), c);

        let c = PairCoords::new(v(0., 0., 0.), v(0., 0., 0.)).unwrap();
        let p = invert(&c);
        assert_eq!(p.r1, v(0., 0., 0.));
        assert_eq!(p.r2, v(0., 0., 0.));
    }

    #[test]
    fn pair_coords_reject_outside_domain() {
        assert!(PairCoords::new(v(0., 0., 0.), v(0., 0., -1.)).is_err());
        assert!(PairCoords::new(v(0., 0., 0.), v(0., -1., 0.)).is_err());
        assert!(PairCoords::new(v(0., 0., 0.), v(-1., 0., 0.)).is_err());
    }

    #[test]
    fn domain_examples() {
        assert!(in_domain(&v(0., 0., 1.)));
        assert!(!in_domain(&v(0., -1., 0.)));
        assert!(in_domain(&v(1., 0., 0.)) ^ in_domain(&v(-1., 0., 0.)));
        assert!(in_domain(&v(1., 0., 0.)));
        // Signed zeros compare equal to zero.
        assert!(in_domain(&v(1., -0., -0.)));
        assert!(!in_domain(&v(-1., -0., 0.)));
    }

    #[test]
    fn polar_examples() {
        let p = to_polar(&HalfSpaceVector::new(v(0., 0., 5.)).unwrap());
        assert_eq!((p.r, p.angles.theta(), p.angles.phi()), (5., 0., 0.));
        assert!(!p.degenerate);

        let p = to_polar(&HalfSpaceVector::new(v(1., 0., 0.)).unwrap());
        assert_eq!((p.r, p.angles.theta(), p.angles.phi()), (1., FRAC_PI_2, 0.));

        let p = to_polar(&HalfSpaceVector::new(v(0., 0., 0.)).unwrap());
        assert!(p.degenerate);
        assert_eq!(p.r, 0.0);
    }

    #[test]
    fn polar_limit_toward_negative_x_axis() {
        // Direct arctangent evaluation as the reference.
        let mut prev_phi_err = f64::INFINITY;
        for k in 1..=12 {
            let eps = 10f64.powi(-k);
            let p = to_polar(&HalfSpaceVector::new(v(-1., 0., eps)).unwrap());
            let theta_ref = (1.0f64).atan2(eps);
            assert!((p.angles.theta() - theta_ref).abs() < 1e-15);
            assert!(p.angles.theta() < FRAC_PI_2);
            let err = (p.angles.phi() - PI).abs();
            assert!(err <= prev_phi_err);
            prev_phi_err = err;
            assert!((FRAC_PI_2 - p.angles.theta() - eps.atan()).abs() < 1e-15);
        }
        assert!(prev_phi_err < 1e-15);
    }

    #[test]
    fn polar_angle_bounds_enforced() {
        assert!(PolarAngles::new(FRAC_PI_2, PI).is_err());
        assert!(PolarAngles::new(FRAC_PI_2, 3.0).is_ok());
        assert!(PolarAngles::new(1.0, 6.0).is_ok());
        assert!(PolarAngles::new(1.0, TAU).is_err());
        assert!(PolarAngles::new(1.6, 0.0).is_err());
        assert!(PolarAngles::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn from_polar_on_equator_stays_in_domain() {
        let a = PolarAngles::new(FRAC_PI_2, 0.0).unwrap();
        assert_eq!(*from_polar(2.0, &a).unwrap().as_vec(), v(2., 0., 0.));
        let a = PolarAngles::new(FRAC_PI_2, PI - 1e-15).unwrap();
        assert!(from_polar(2.0, &a).is_ok());
        assert!(from_polar(-1.0, &a).is_err());
    }

    #[test]
    fn seam_partner_examples() {
        let s = |x, y, z| seam_partner(&HalfSpaceVector::new(v(x, y, z)).unwrap(), z).unwrap();
        assert_eq!(*s(2., 0., 0.01).as_vec(), v(-2., 0., 0.01));
        assert_eq!(*s(0., 0., 0.3).as_vec(), v(0., 0., 0.3));
        assert_eq!(*s(2., 4., 0.5).as_vec(), v(-2., -4., 0.5));
    }

    #[test]
    fn seam_partner_rejects_bad_offset() {
        let hv = HalfSpaceVector::new(v(1., 0., 0.)).unwrap();
        assert!(seam_partner(&hv, 0.0).is_err());
        assert!(seam_partner(&hv, -1.0).is_err());
        let hv = HalfSpaceVector::new(v(1., 0., 0.2)).unwrap();
        assert!(seam_partner(&hv, 0.1).is_err());
    }

    #[test]
    fn seam_jump_persists_while_directions_converge() {
        let (x, y) = (0.7, -0.4);
        let target = v(-2. * x, -2. * y, 0.).normalize();
        for k in 1..=8 {
            let eps = 10f64.powi(-k);
            let a = HalfSpaceVector::new(v(2. * x, 2. * y, eps)).unwrap();
            let b = seam_partner(&a, eps).unwrap();
            let angle = b.as_vec().normalize().dot(&target).clamp(-1., 1.).acos();
            assert!(angle < 2.0 * eps);
            let jump = (a.as_vec() - b.as_vec()).norm();
            assert!((jump - 2. * v(2. * x, 2. * y, 0.).norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn half_space_vector_serde() {
        let hv: HalfSpaceVector = serde_json::from_str("[1.0, 2.0, 0.0]").unwrap();
        assert_eq!(*hv.as_vec(), v(1., 2., 0.));
        assert!(serde_json::from_str::<HalfSpaceVector>("[1.0, -2.0, 0.0]").is_err());
    }
}
