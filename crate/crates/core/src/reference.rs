//! Closed-form reference waves: KdV cnoidal waves and the periodic
//! Benjamin-Ono family, with the Benjamin-Ono conserved quantities, their
//! parameter derivatives and the analytic dispersion matrix.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::elliptic::{complete_elliptic_k, jacobi_cn};
use crate::error::{Error, Result};
use crate::functionals::FunctionalRecord;
use crate::sensitivity::{OmegaDerivatives, SensitivityRecord};
use crate::spectral::{PeriodicGrid, WaveProfile};

/// A point `(α, c, a, T)` of the traveling-wave family
/// `Λ^α u = f(u) + cu + a`, `u(x + T) = u(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveParameters {
    pub alpha: f64,
    pub c: f64,
    pub a: f64,
    #[serde(rename = "T")]
    pub period: f64,
}

impl WaveParameters {
    pub fn new(alpha: f64, c: f64, a: f64, period: f64) -> Result<Self> {
        let p = Self { alpha, c, a, period };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::AlphaOutOfRange(self.alpha));
        }
        if !(self.c.is_finite() && self.a.is_finite()) {
            return Err(Error::InvalidParameters(format!("non-finite c = {}, a = {}", self.c, self.a)));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::InvalidParameters(format!("period must be positive, got {}", self.period)));
        }
        Ok(())
    }

    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn with_c(self, c: f64) -> Self {
        Self { c, ..self }
    }

    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_period(self, period: f64) -> Self {
        Self { period, ..self }
    }

    /// Benjamin-Ono admissibility: α = 1, c < 0 and c² − 4a − κ² > 0.
    pub fn check_bo_admissible(&self) -> Result<()> {
        if (self.alpha - 1.0).abs() > 1e-14 {
            return Err(Error::Admissibility(format!("alpha must be 1, got {}", self.alpha)));
        }
        check_bo(self.c, self.a, self.period)
    }
}

fn check_bo(c: f64, a: f64, period: f64) -> Result<()> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::Admissibility(format!("period must be positive, got {period}")));
    }
    if !(c < 0.0) {
        return Err(Error::Admissibility(format!("c must be negative, got {c}")));
    }
    let kappa = 2.0 * PI / period;
    let gap = c * c - 4.0 * a - kappa * kappa;
    if !(gap > 0.0) {
        return Err(Error::Admissibility(format!("c² − 4a − κ² = {gap} must be positive")));
    }
    Ok(())
}

/// Dense 3×3 real matrix, row-major.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matrix3(pub [[f64; 3]; 3]);

impl Matrix3 {
    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Self(rows)
    }

    pub fn diagonal(d: [f64; 3]) -> Self {
        Self([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Sum of the principal 2×2 minors.
    pub fn principal_minor_sum(&self) -> f64 {
        let m = &self.0;
        (m[0][0] * m[1][1] - m[0][1] * m[1][0]) + (m[0][0] * m[2][2] - m[0][2] * m[2][0]) + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
    }

    /// `self − s·I`.
    pub fn shifted(&self, s: f64) -> Self {
        let mut m = self.0;
        for (i, row) in m.iter_mut().enumerate() {
            row[i] -= s;
        }
        Self(m)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// `S M S` for `S = diag(signs)`.
    pub fn sign_conjugate(&self, signs: [f64; 3]) -> Self {
        let mut m = self.0;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x *= signs[i] * signs[j];
            }
        }
        Self(m)
    }
}

/// The two KdV benchmark waves with exact cnoidal solutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CnoidalExperiment {
    /// `u = 1 + 3cn²(x + K(√2/2), √2/2)`, (α, c, a) = (2, −2, −2)
    One,
    /// `u = cn²(x + K(√6/6), √6/6)`, (α, c, a) = (2, 8/3, −5/3)
    Two,
}

impl CnoidalExperiment {
    pub fn modulus(self) -> f64 {
        match self {
            Self::One => 0.5f64.sqrt(),
            Self::Two => (1.0f64 / 6.0).sqrt(),
        }
    }

    /// `T = 2K(k)`.
    pub fn period(self) -> f64 {
        2.0 * complete_elliptic_k(self.modulus()).expect("modulus in range")
    }

    pub fn parameters(self) -> WaveParameters {
        let (c, a) = match self {
            Self::One => (-2.0, -2.0),
            Self::Two => (8.0 / 3.0, -5.0 / 3.0),
        };
        WaveParameters { alpha: 2.0, c, a, period: self.period() }
    }

    /// Exact profile at `x`.
    pub fn evaluate(self, x: f64) -> f64 {
        let k = self.modulus();
        let quarter = 0.5 * self.period();
        let cn = jacobi_cn(x + quarter, k).expect("modulus in range");
        match self {
            Self::One => 1.0 + 3.0 * cn * cn,
            Self::Two => cn * cn,
        }
    }
}

/// Cnoidal reference wave sampled on `grid`, whose period must be `2K(k)`.
pub fn cnoidal_wave(experiment: CnoidalExperiment, grid: &PeriodicGrid) -> Result<(WaveParameters, WaveProfile)> {
    let params = experiment.parameters();
    if (grid.period() - params.period).abs() > 1e-10 {
        return Err(Error::PeriodMismatch { expected: params.period, actual: grid.period() });
    }
    Ok((params, WaveProfile::from_fn(grid, |x| experiment.evaluate(x))))
}

/// Periodic Benjamin-Ono wave, crest at `x = 0`:
///
/// ```text
/// u(x) = κ²/√(c²−4a−κ²) / (√((c²−4a)/(c²−4a−κ²)) − cos κx) − (√(c²−4a) + c)/2
/// ```
pub fn bo_wave(params: &WaveParameters, grid: &PeriodicGrid) -> Result<WaveProfile> {
    params.check_bo_admissible()?;
    if (grid.period() - params.period).abs() > 1e-12 * params.period {
        return Err(Error::PeriodMismatch { expected: params.period, actual: grid.period() });
    }
    Ok(WaveProfile::from_fn(grid, bo_profile_fn(params.c, params.a, params.period)))
}

fn bo_profile_fn(c: f64, a: f64, period: f64) -> impl Fn(f64) -> f64 {
    let kappa = 2.0 * PI / period;
    let disc = c * c - 4.0 * a;
    let gap = disc - kappa * kappa;
    let numerator = kappa * kappa / gap.sqrt();
    let b = (disc / gap).sqrt();
    let offset = 0.5 * (disc.sqrt() + c);
    move |x| numerator / (b - (kappa * x).cos()) - offset
}

/// Closed-form Benjamin-Ono functionals and derivatives at `(c, a, T)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoClosedForms {
    pub functionals: FunctionalRecord,
    pub sensitivities: SensitivityRecord,
    /// G = πT/√(c² − 4a)
    pub gram: f64,
}

/// Benjamin-Ono `M, P, U` and their `c`, `a` and Ω-derivatives in closed form.
///
/// `K` has no closed form of its own; it is recovered from the identity
/// `2K + 3U − 2cP − aM = 0`, and `E = K + U − cP − aM`.
pub fn bo_functionals(params: &WaveParameters) -> Result<BoClosedForms> {
    params.check_bo_admissible()?;
    let WaveParameters { c, a, period: t, .. } = *params;
    let kappa = 2.0 * PI / t;
    let omega = 1.0 / t;
    let r = (c * c - 4.0 * a).sqrt();
    let s = r + c;

    let m = 2.0 * PI - 0.5 * t * s;
    let p = -PI * c + t / 8.0 * s * s;
    let u = PI * kappa * kappa / 3.0 - PI * (c * c - 2.0 * a) + t / 24.0 * s.powi(3);

    let m_c = -0.5 * t * s / r;
    let m_a = t / r;
    let p_c = -PI + 0.25 * t * s * s / r;
    let p_a = -0.5 * t * s / r;
    let u_c = -2.0 * PI * c + t / 8.0 * s.powi(3) / r;
    let u_a = 2.0 * PI - 0.25 * t * s * s / r;

    let k = 0.5 * (2.0 * c * p + a * m - 3.0 * u);
    let k_c = 0.5 * (2.0 * p + 2.0 * c * p_c + a * m_c - 3.0 * u_c);
    let k_a = 0.5 * (2.0 * c * p_a + m + a * m_a - 3.0 * u_a);
    let e_c = k_c + u_c - p - c * p_c - a * m_c;
    let e_a = k_a + u_a - c * p_a - m - a * m_a;

    // (ΩF)_Ω at fixed (c, a); ΩM, ΩP, ΩU are explicit in Ω.
    let omega_m = 2.0 * PI;
    let omega_p = -PI * c;
    let omega_u = 4.0 * PI.powi(3) * omega * omega - PI * (c * c - 2.0 * a);
    let omega_k = 0.5 * (2.0 * c * omega_p + a * omega_m - 3.0 * omega_u);
    let omega_e = omega_k + omega_u - c * omega_p - a * omega_m;

    Ok(BoClosedForms {
        functionals: FunctionalRecord::assemble(m, p, u, k, c, a),
        sensitivities: SensitivityRecord {
            m_c,
            m_a,
            p_c,
            p_a,
            u_c,
            u_a,
            k_c,
            k_a,
            e_c,
            e_a,
            omega: Some(OmegaDerivatives::new(params.alpha, omega_p, omega_m, omega_k, omega_e)),
            steps: None,
        },
        gram: PI * t / r,
    })
}

/// Analytic dispersion matrix of the `a = 0` Benjamin-Ono wave and its
/// eigenvalues `{πT√(2 − (κ/c)²), πT, −πT√(2 − (κ/c)²)}` (descending).
pub fn bo_dispersion_matrix(c: f64, period: f64) -> Result<(Matrix3, [f64; 3])> {
    check_bo(c, 0.0, period)?;
    let pt = PI * period;
    let ratio = 2.0 * PI / period / c;
    let matrix = Matrix3([[-pt, pt * pt * (1.0 - ratio * ratio), 0.0], [1.0, pt, 0.0], [2.0 * PI * PI, 0.0, pt]]);
    let root = pt * (2.0 - ratio * ratio).sqrt();
    Ok((matrix, [root, pt, -root]))
}

/// Galilean shift `(c, a) ↦ (c − 2s, a − cs + s²)`; the Benjamin-Ono wave
/// at the shifted parameters is the original wave plus `s`.
pub fn bo_galilean_shift(c: f64, a: f64, s: f64) -> (f64, f64) {
    (c - 2.0 * s, a - c * s + s * s)
}
