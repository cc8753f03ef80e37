//! Complete elliptic integral K(k) and Jacobi cn, for the cnoidal reference waves.
//!
//! **Modulus convention.** Every function here takes the elliptic modulus `k`.
//! Tools that take the parameter `m = k²` (Mathematica `EllipticK[m]`,
//! `JacobiCN[u, m]`, SciPy `ellipk(m)`) must be fed `k²`, not `k`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const MAX_AGM_STEPS: usize = 64;

/// Elliptic modulus `k ∈ [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_finite() && (0.0..1.0).contains(&k) {
            Ok(Self(k))
        } else {
            Err(Error::InvalidModulus(k))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Complementary modulus `k' = √(1 − k²)`.
    pub fn complement(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

/// Arithmetic-geometric mean sequence `(a_n, c_n)` starting from
/// `(1, k', k)`, stopped once `c_n` is negligible.
fn agm_sequence(k: EllipticModulus) -> (Vec<f64>, Vec<f64>) {
    let mut a = vec![1.0];
    let mut c = vec![k.value()];
    let mut b = k.complement();
    for _ in 0..MAX_AGM_STEPS {
        let (an, cn) = (*a.last().unwrap(), *c.last().unwrap());
        if cn.abs() <= f64::EPSILON * an {
            break;
        }
        let next_a = 0.5 * (an + b);
        let next_c = 0.5 * (an - b);
        b = (an * b).sqrt();
        a.push(next_a);
        c.push(next_c);
    }
    (a, c)
}

/// K(k) = π / (2 agm(1, k')).
pub fn complete_elliptic_k(k: f64) -> Result<f64> {
    let modulus = EllipticModulus::new(k)?;
    let (a, _) = agm_sequence(modulus);
    Ok(PI / (2.0 * a.last().unwrap()))
}

/// `(sn, cn, dn)` by the descending Landen (AGM) recursion.
pub(crate) fn jacobi_sn_cn_dn(x: f64, k: EllipticModulus) -> (f64, f64, f64) {
    let (a, c) = agm_sequence(k);
    let steps = a.len() - 1;
    let mut phi = 2f64.powi(steps as i32) * a[steps] * x;
    for n in (1..=steps).rev() {
        phi = 0.5 * (phi + (c[n] / a[n] * phi.sin()).asin());
    }
    let sn = phi.sin();
    // dn ≥ k' > 0, so the root is safe and better conditioned than cos φ0 / cos(φ1 − φ0)
    let dn = (1.0 - k.value() * k.value() * sn * sn).sqrt();
    (sn, phi.cos(), dn)
}

/// Jacobi elliptic function cn(x, k).
pub fn jacobi_cn(x: f64, k: f64) -> Result<f64> {
    let modulus = EllipticModulus::new(k)?;
    Ok(jacobi_sn_cn_dn(x, modulus).1)
}
