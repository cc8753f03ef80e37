//! Conserved quantities over one period and the integral identities they
//! satisfy on exact traveling waves.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nonlinearity::Nonlinearity;
use crate::reference::WaveParameters;
use crate::spectral::{apply_fractional_laplacian, trapezoid_integral, WaveProfile};

/// `M = ∫u`, `P = ½∫u²`, `U = −∫F(u)`, `K = ½∫uΛ^αu`, `H = K + U`,
/// `E = H − cP − aM`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionalRecord {
    #[serde(rename = "M")]
    pub mass: f64,
    #[serde(rename = "P")]
    pub momentum: f64,
    #[serde(rename = "U")]
    pub potential: f64,
    #[serde(rename = "K")]
    pub kinetic: f64,
    #[serde(rename = "H")]
    pub hamiltonian: f64,
    #[serde(rename = "E")]
    pub energy: f64,
}

impl FunctionalRecord {
    /// Fills in the derived `H` and `E`.
    pub fn assemble(mass: f64, momentum: f64, potential: f64, kinetic: f64, c: f64, a: f64) -> Self {
        let hamiltonian = kinetic + potential;
        Self { mass, momentum, potential, kinetic, hamiltonian, energy: hamiltonian - c * momentum - a * mass }
    }

    pub fn is_finite(&self) -> bool {
        [self.mass, self.momentum, self.potential, self.kinetic, self.hamiltonian, self.energy].iter().all(|x| x.is_finite())
    }
}

/// Trapezoid quadrature for `M`, `P`, `U`; `K` from the spectral `Λ^α u`.
pub fn evaluate_functionals(profile: &WaveProfile, params: &WaveParameters, f: &Nonlinearity) -> Result<FunctionalRecord> {
    let mass = trapezoid_integral(profile);
    let momentum = 0.5 * trapezoid_integral(&profile.map(|u| u * u));
    let potential = -trapezoid_integral(&profile.map(|u| f.antiderivative(u)));
    let lu = apply_fractional_laplacian(profile, params.alpha)?;
    let kinetic = 0.5 * trapezoid_integral(&profile.zip_with(&lu, |u, v| u * v)?);
    Ok(FunctionalRecord::assemble(mass, momentum, potential, kinetic, params.c, params.a))
}

/// Residuals of the integral identities satisfied by exact waves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub r1: f64,
    pub r2: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r3: Option<f64>,
}

impl IdentityResiduals {
    /// Largest of |r1|, |r2| (and |r3| when present).
    pub fn max_abs(&self) -> f64 {
        let base = self.r1.abs().max(self.r2.abs());
        self.r3.map_or(base, |r| base.max(r.abs()))
    }
}

/// Quadratic-nonlinearity identities
///
/// ```text
/// r1 = 2P + cM + aT
/// r2 = 2K + 3U − 2cP − aM
/// r3 = (α+1)K + 2U − cP + T·E_T
/// ```
///
/// `r3` is only formed when `E_T = ∂E/∂T` is supplied.
pub fn integral_identity_residuals(record: &FunctionalRecord, params: &WaveParameters, e_t: Option<f64>) -> IdentityResiduals {
    let FunctionalRecord { mass: m, momentum: p, potential: u, kinetic: k, .. } = *record;
    let WaveParameters { alpha, c, a, period: t } = *params;
    IdentityResiduals {
        r1: 2.0 * p + c * m + a * t,
        r2: 2.0 * k + 3.0 * u - 2.0 * c * p - a * m,
        r3: e_t.map(|e_t| (alpha + 1.0) * k + 2.0 * u - c * p + t * e_t),
    }
}

/// General-nonlinearity identities, for which `∫f(u)` and `∫u f(u)` are
/// needed from the profile itself:
///
/// ```text
/// r1 = ∫f(u) + cM + aT
/// r2 = 2K − ∫u f(u) − 2cP − aM
/// r3 = (α−1)K − U + cP + aM + T·E_T
/// ```
pub fn general_identity_residuals(
    profile: &WaveProfile,
    record: &FunctionalRecord,
    params: &WaveParameters,
    f: &Nonlinearity,
    e_t: Option<f64>,
) -> IdentityResiduals {
    let FunctionalRecord { mass: m, momentum: p, potential: u, kinetic: k, .. } = *record;
    let WaveParameters { alpha, c, a, period: t } = *params;
    let int_f = trapezoid_integral(&profile.map(|v| f.value(v)));
    let int_uf = trapezoid_integral(&profile.map(|v| v * f.value(v)));
    IdentityResiduals {
        r1: int_f + c * m + a * t,
        r2: 2.0 * k - int_uf - 2.0 * c * p - a * m,
        r3: e_t.map(|e_t| (alpha - 1.0) * k - u + c * p + a * m + t * e_t),
    }
}

/// Scale used to judge identity residuals: `max(1, |c|, |a|, T)`.
pub fn identity_scale(params: &WaveParameters) -> f64 {
    1f64.max(params.c.abs()).max(params.a.abs()).max(params.period)
}
