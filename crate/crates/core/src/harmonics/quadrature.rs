//! Product quadrature on the sphere and on the half-space directions.
//!
//! Gauss–Legendre in `cos θ` (over `[0, 1]` for the half-space, `[-1, 1]`
//! for the full sphere) times the uniform trapezoid rule in `φ`. Nodes and
//! weights for the Legendre factor come from `gauss-quad`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use super::wigner::AngularExpansion;
use crate::error::{precondition, Result};
use crate::Complex64;

/// Which set of directions a rule covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularDomain {
    /// `0 <= θ < π/2`, total weight `2π`.
    HalfSpace,
    /// The whole sphere, total weight `4π`.
    FullSphere,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularNode {
    pub theta: f64,
    pub phi: f64,
    pub weight: f64,
}

/// Tensor-product rule of `n_theta × n_phi` nodes, weights include `sin θ`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<AngularNode>,
    pub n_theta: usize,
    pub n_phi: usize,
    pub domain: AngularDomain,
}

/// Default orders for integrands built from harmonics up to degree `l_max`.
pub fn default_orders(l_max: u32) -> (usize, usize) {
    (2 * l_max as usize + 8, 4 * l_max as usize + 16)
}

impl QuadratureRule {
    fn build(n_theta: usize, n_phi: usize, domain: AngularDomain) -> Self {
        let n_theta = n_theta.max(1);
        let n_phi = n_phi.max(1);
        let gl = GaussLegendre::new(NonZeroUsize::new(n_theta).expect("nonzero"));
        let (lo, hi) = match domain {
            AngularDomain::HalfSpace => (0.0, 1.0),
            AngularDomain::FullSphere => (-1.0, 1.0),
        };
        let half_width = (hi - lo) / 2.0;
        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for &(x, w) in gl.as_node_weight_pairs() {
            let cos_t = lo + (x + 1.0) * half_width;
            let theta = cos_t.clamp(-1.0, 1.0).acos();
            for j in 0..n_phi {
                nodes.push(AngularNode {
                    theta,
                    phi: j as f64 * dphi,
                    weight: w * half_width * dphi,
                });
            }
        }
        Self {
            nodes,
            n_theta,
            n_phi,
            domain,
        }
    }

    pub fn half_space(n_theta: usize, n_phi: usize) -> Self {
        Self::build(n_theta, n_phi, AngularDomain::HalfSpace)
    }

    pub fn full_sphere(n_theta: usize, n_phi: usize) -> Self {
        Self::build(n_theta, n_phi, AngularDomain::FullSphere)
    }

    /// Half-space rule at [`default_orders`].
    pub fn half_space_for_degree(l_max: u32) -> Self {
        let (t, p) = default_orders(l_max);
        Self::half_space(t, p)
    }

    pub fn full_sphere_for_degree(l_max: u32) -> Self {
        let (t, p) = default_orders(l_max);
        Self::full_sphere(t, p)
    }

    /// The same domain at twice the orders.
    pub fn refined(&self) -> Self {
        Self::build(2 * self.n_theta, 2 * self.n_phi, self.domain)
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    pub fn integrate(&self, f: &dyn Fn(f64, f64) -> Complex64) -> Complex64 {
        self.nodes.iter().map(|n| f(n.theta, n.phi) * n.weight).sum()
    }

    /// `⟨f, g⟩ = ∫ conj(f) g dΩ` over the rule's domain.
    pub fn inner(&self, f: &dyn AngularFunction, g: &dyn AngularFunction) -> Complex64 {
        self.nodes
            .iter()
            .map(|n| f.value(n.theta, n.phi).conj() * g.value(n.theta, n.phi) * n.weight)
            .sum()
    }
}

/// Anything that can be evaluated at a direction.
pub trait AngularFunction {
    fn value(&self, theta: f64, phi: f64) -> Complex64;
}

impl<F: Fn(f64, f64) -> Complex64> AngularFunction for F {
    fn value(&self, theta: f64, phi: f64) -> Complex64 {
        self(theta, phi)
    }
}

impl AngularFunction for AngularExpansion {
    fn value(&self, theta: f64, phi: f64) -> Complex64 {
        AngularExpansion::value(self, theta, phi)
    }
}

/// Inner product over the half-space directions.
///
/// The caller is responsible for choosing an order that resolves the
/// integrand; see [`converged_inner`].
pub fn half_space_inner(
    f: &dyn AngularFunction,
    g: &dyn AngularFunction,
    rule: &QuadratureRule,
) -> Complex64 {
    debug_assert_eq!(rule.domain, AngularDomain::HalfSpace);
    rule.inner(f, g)
}

/// Result of a refinement sequence.
#[derive(Debug, Clone, Copy)]
pub struct Converged {
    pub value: Complex64,
    pub n_theta: usize,
    pub n_phi: usize,
    pub last_change: f64,
}

/// Doubles the orders of `start` until two successive inner products differ
/// by at most `tol`, up to `max_doublings` refinements.
pub fn converged_inner(
    f: &dyn AngularFunction,
    g: &dyn AngularFunction,
    start: &QuadratureRule,
    tol: f64,
    max_doublings: usize,
) -> Result<Converged> {
    let mut rule = start.clone();
    let mut prev = rule.inner(f, g);
    for _ in 0..max_doublings {
        rule = rule.refined();
        let cur = rule.inner(f, g);
        let change = (cur - prev).norm();
        if change <= tol {
            return Ok(Converged {
                value: cur,
                n_theta: rule.n_theta,
                n_phi: rule.n_phi,
                last_change: change,
            });
        }
        prev = cur;
    }
    precondition(format!(
        "quadrature did not converge to {tol} within {max_doublings} doublings"
    ))
}
