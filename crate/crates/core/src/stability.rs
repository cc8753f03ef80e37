//! Effective dispersion matrix, its characteristic cubic and discriminant,
//! the modulational-stability verdict and the Morse index.
//!
//! The quadratic route assembles the matrix from the closed-form pairings
//! `⟨w_j, L₁v_k⟩`, `d₂₂`, `d₃₂` and `Γ`, which need only `M, P, U` and their
//! `c`, `a` derivatives. The general route also needs `K`, `E` and the
//! Ω-derivatives, and works for any nonlinearity.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::FunctionalRecord;
use crate::reference::{Matrix3, WaveParameters};
use crate::sensitivity::{gram_determinant, GramRecord, SensitivityRecord};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerProductRecord {
    #[serde(rename = "w1L1v1")]
    pub w1_l1_v1: f64,
    #[serde(rename = "w1L1v3")]
    pub w1_l1_v3: f64,
    #[serde(rename = "w3L1v1")]
    pub w3_l1_v1: f64,
    #[serde(rename = "w3L1v3")]
    pub w3_l1_v3: f64,
    #[serde(rename = "w2L1v2")]
    pub w2_l1_v2: f64,
    pub d22: f64,
    pub d32: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
}

/// Pairings for `f(u) = u²`.
pub fn quadratic_inner_products(
    alpha: f64,
    params: &WaveParameters,
    functionals: &FunctionalRecord,
    s: &SensitivityRecord,
    gram: &GramRecord,
) -> InnerProductRecord {
    let (c, a) = (params.c, params.a);
    let FunctionalRecord { mass: m, momentum: p, potential: u, .. } = *functionals;
    let GramRecord { gram: g, mass_potential: mu, momentum_potential: pu } = *gram;

    let s_a = (1.0 - alpha) * s.u_a + alpha * c * s.p_a + (alpha + 1.0) * a * s.m_a;
    let s_c = (1.0 - alpha) * s.u_c + alpha * c * s.p_c + (alpha + 1.0) * a * s.m_c;
    let w1_l1_v1 = s.m_c * s_a + s.p_c * (2.0 * s.p_a + c * s.m_a);
    let w1_l1_v3 = s.m_c * s_c + s.p_c * (2.0 * s.p_c + c * s.m_c);
    let w3_l1_v1 = -s.m_a * s_a - s.p_a * (2.0 * s.p_a + c * s.m_a);
    let w3_l1_v3 = -s.m_a * s_c - s.p_a * (2.0 * s.p_c + c * s.m_c);
    let w2_l1_v2 = -alpha * (mu - c * g);

    let q = 3.0 * (3.0 - alpha) * u + 2.0 * (alpha - 1.0) * c * p + (alpha + 1.0) * a * m;
    let coupling = alpha * (1.0 - alpha) / g;
    let d22 = 0.5 * alpha * (s.m_c * q + 2.0 * s.p_c * (4.0 * p + c * m))
        - coupling * (2.0 * s.m_c * p * mu - s.m_c * m * pu)
        - alpha * (2.0 * alpha * c * s.m_c * p + 4.0 * s.p_c * p + (alpha + 1.0) * alpha * a * s.m_c * m + c * s.p_c * m);
    let d32 = 0.5 * alpha * (-2.0 * s.p_a * (4.0 * p + c * m) - s.m_a * q)
        + coupling * (2.0 * s.m_a * p * mu - s.m_a * m * pu)
        + alpha * (2.0 * alpha * c * s.m_a * p + 4.0 * s.p_a * p + (alpha + 1.0) * alpha * a * s.m_a * m + c * s.p_a * m);

    let gamma = (1.0 - alpha) * g * (2.0 * pu + c * mu) - g * g * (2.0 * (alpha + 1.0) * a - alpha * c * c);
    InnerProductRecord { w1_l1_v1, w1_l1_v3, w3_l1_v1, w3_l1_v3, w2_l1_v2, d22, d32, gamma }
}

/// ```text
/// ⎡ ⟨w3,L1v3⟩  G·d32      ⟨w3,L1v1⟩ ⎤
/// ⎢ 1          ⟨w2,L1v2⟩  0         ⎥
/// ⎣ ⟨w1,L1v3⟩  G·d22      ⟨w1,L1v1⟩ ⎦
/// ```
pub fn dispersion_matrix(record: &InnerProductRecord, gram: f64) -> Matrix3 {
    Matrix3([
        [record.w3_l1_v3, gram * record.d32, record.w3_l1_v1],
        [1.0, record.w2_l1_v2, 0.0],
        [record.w1_l1_v3, gram * record.d22, record.w1_l1_v1],
    ])
}

/// `det(D − μG I) = lead·μ³ + D2·μ² + D1·μ + D0` with `lead = −G³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicCoefficients {
    pub lead: f64,
    #[serde(rename = "D2")]
    pub d2: f64,
    #[serde(rename = "D1")]
    pub d1: f64,
    #[serde(rename = "D0")]
    pub d0: f64,
}

impl CubicCoefficients {
    /// Coefficients read off a matrix: `G²·tr D`, `−G·(sum of principal
    /// 2×2 minors)`, `det D`.
    pub fn from_matrix(matrix: &Matrix3, gram: f64) -> Self {
        Self { lead: -gram.powi(3), d2: gram * gram * matrix.trace(), d1: -gram * matrix.principal_minor_sum(), d0: matrix.determinant() }
    }

    pub fn evaluate(&self, mu: f64) -> f64 {
        ((self.lead * mu + self.d2) * mu + self.d1) * mu + self.d0
    }
}

/// Closed-form coefficients of the quadratic route:
///
/// ```text
/// S  = {M,U} − cG
/// D2 = G²(1 − 2α)S
/// D1 = G(Γ + α(1 − α)S² + G·d32)
/// D0 = αΓS + G(⟨w3,L1v1⟩d22 − ⟨w1,L1v1⟩d32)
/// ```
pub fn cubic_coefficients(alpha: f64, c: f64, record: &InnerProductRecord, gram: f64, mass_potential: f64) -> CubicCoefficients {
    let s = mass_potential - c * gram;
    let g = gram;
    CubicCoefficients {
        lead: -g.powi(3),
        d2: g * g * (1.0 - 2.0 * alpha) * s,
        d1: g * (record.gamma + alpha * (1.0 - alpha) * s * s + g * record.d32),
        d0: alpha * record.gamma * s + g * (record.w3_l1_v1 * record.d22 - record.w1_l1_v1 * record.d32),
    }
}

/// `b²c² − 4ac³ − 4b³d − 27a²d² + 18abcd` for `aμ³ + bμ² + cμ + d`.
pub fn discriminant(coefficients: &CubicCoefficients) -> f64 {
    let CubicCoefficients { lead: a, d2: b, d1: c, d0: d } = *coefficients;
    b * b * c * c - 4.0 * a * c.powi(3) - 4.0 * b.powi(3) * d - 27.0 * a * a * d * d + 18.0 * a * b * c * d
}

/// Sum of the magnitudes of the discriminant's terms, the scale against
/// which `Δ` is judged to be zero.
fn discriminant_scale(coefficients: &CubicCoefficients) -> f64 {
    let CubicCoefficients { lead: a, d2: b, d1: c, d0: d } = *coefficients;
    (b * b * c * c).abs()
        + (4.0 * a * c.powi(3)).abs()
        + (4.0 * b.powi(3) * d).abs()
        + (27.0 * a * a * d * d).abs()
        + (18.0 * a * b * c * d).abs()
}

/// Eigenvalues from the characteristic cubic in closed form (trigonometric
/// form for three real roots, Cardano otherwise), each polished by Newton
/// steps and sorted by descending real part.
pub fn eigenvalues3(matrix: &Matrix3) -> [Complex64; 3] {
    // λ³ + bλ² + cλ + d
    let b = -matrix.trace();
    let c = matrix.principal_minor_sum();
    let d = -matrix.determinant();
    let mut roots = monic_cubic_roots(b, c, d);
    roots.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    roots
}

fn monic_cubic_roots(b: f64, c: f64, d: f64) -> [Complex64; 3] {
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b.powi(3) / 27.0 - b * c / 3.0 + d;
    let poly = |z: Complex64| ((z + b) * z + c) * z + d;
    let dpoly = |z: Complex64| (3.0 * z + 2.0 * b) * z + c;
    let polish = |mut z: Complex64| {
        for _ in 0..3 {
            let dz = dpoly(z);
            if dz.norm() == 0.0 {
                break;
            }
            let next = z - poly(z) / dz;
            if !next.is_finite() || poly(next).norm() >= poly(z).norm() {
                break;
            }
            z = next;
        }
        z
    };

    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let inner = half_q * half_q + third_p.powi(3);
    if inner <= 0.0 && p < 0.0 {
        let r = (-third_p).sqrt();
        let cos_arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
        let phi = cos_arg.acos() / 3.0;
        let mut out = [0.0; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let t = 2.0 * r * (phi - 2.0 * PI * k as f64 / 3.0).cos();
            *slot = polish(Complex64::new(t - shift, 0.0)).re;
        }
        return out.map(|x| Complex64::new(x, 0.0));
    }
    if p == 0.0 && q == 0.0 {
        return [Complex64::new(-shift, 0.0); 3];
    }
    let big_a = -q.signum() * (half_q.abs() + inner.max(0.0).sqrt()).cbrt();
    let big_b = if big_a != 0.0 { -third_p / big_a } else { 0.0 };
    let real = polish(Complex64::new(big_a + big_b - shift, 0.0)).re;
    // deflate: (λ − r)(λ² + eλ + f)
    let e = b + real;
    let f = c + real * e;
    let disc = e * e - 4.0 * f;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let r1 = if e >= 0.0 { -0.5 * (e + sq) } else { -0.5 * (e - sq) };
        let r2 = if r1 != 0.0 { f / r1 } else { 0.0 };
        return [real, polish(Complex64::new(r1, 0.0)).re, polish(Complex64::new(r2, 0.0)).re].map(|x| Complex64::new(x, 0.0));
    }
    let z = polish(Complex64::new(-0.5 * e, 0.5 * (-disc).sqrt()));
    let z = Complex64::new(z.re, z.im.abs());
    [Complex64::new(real, 0.0), z, z.conj()]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ModulationallyStable,
    ModulationallyUnstable,
    Degenerate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ModulationallyStable => "modulationally_stable",
            Self::ModulationallyUnstable => "modulationally_unstable",
            Self::Degenerate => "degenerate",
        })
    }
}

/// Relative size below which `|Im λ|` counts as zero.
pub const IMAG_TOL: f64 = 1e-7;
/// Relative size below which `Δ` counts as zero.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub discriminant: f64,
    pub max_imag: f64,
    pub imag_tol: f64,
    /// Why the verdict is degenerate, if it is.
    pub note: Option<String>,
}

/// Unstable iff `Δ < 0`, cross-checked against the eigenvalues; any
/// disagreement, or `Δ` indistinguishable from zero, is degenerate.
pub fn classify(coefficients: &CubicCoefficients, eigenvalues: &[Complex64; 3], matrix: &Matrix3) -> Classification {
    let delta = discriminant(coefficients);
    let max_imag = eigenvalues.iter().fold(0.0, |m: f64, z| m.max(z.im.abs()));
    let imag_tol = IMAG_TOL * matrix.norm_inf();
    let complex_pair = max_imag > imag_tol;
    let (verdict, note) = if !delta.is_finite() || eigenvalues.iter().any(|z| !z.is_finite()) {
        (Verdict::Degenerate, Some("non-finite discriminant or eigenvalues".to_string()))
    } else if delta.abs() <= DISCRIMINANT_TOL * discriminant_scale(coefficients) {
        (Verdict::Degenerate, Some(format!("discriminant {delta:e} indistinguishable from zero")))
    } else if (delta < 0.0) == complex_pair {
        (if complex_pair { Verdict::ModulationallyUnstable } else { Verdict::ModulationallyStable }, None)
    } else {
        (Verdict::Degenerate, Some(format!("discriminant {delta:e} disagrees with max |Im λ| = {max_imag:e} (tolerance {imag_tol:e})")))
    };
    Classification { verdict, discriminant: delta, max_imag, imag_tol, note }
}

/// Number of sign changes in `(1, M_a, −G)`.
pub fn morse_index(m_a: f64, gram: f64) -> Result<u8> {
    let minus_g = -gram;
    if m_a == 0.0 || minus_g == 0.0 || !m_a.is_finite() || !minus_g.is_finite() {
        return Err(Error::DegenerateSequence { m_a, minus_g });
    }
    Ok(u8::from(m_a < 0.0) + u8::from((m_a < 0.0) != (minus_g < 0.0)))
}

/// Sign of the `α(α+1)K` terms coming from the second-order operator `L₂`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondOrderConvention {
    /// The convention under which the general and quadratic routes coincide.
    #[default]
    Standard,
    /// `L₂ = [L₁, x]`; reproduces small-Floquet-exponent Hill spectra.
    Commutator,
}

impl SecondOrderConvention {
    fn sign(self) -> f64 {
        match self {
            Self::Standard => -1.0,
            Self::Commutator => 1.0,
        }
    }
}

/// Dispersion matrix for a general nonlinearity, in the presentation with
/// middle row `(1, D22, 0)` and `D11 = 0`.
pub fn dispersion_matrix_general(
    alpha: f64,
    params: &WaveParameters,
    functionals: &FunctionalRecord,
    s: &SensitivityRecord,
    gram: &GramRecord,
    convention: SecondOrderConvention,
) -> Result<Matrix3> {
    let omega = s.omega.ok_or(Error::MissingOmegaDerivatives)?;
    let (c, t) = (params.c, params.period);
    let FunctionalRecord { mass: m, momentum: p, kinetic: k, .. } = *functionals;
    let GramRecord { gram: g, mass_potential: mu, .. } = *gram;

    let g11 = s.m_c * (alpha * s.k_a - s.e_a) - s.p_c * t;
    let g13 = s.m_c * (alpha * s.k_c - s.e_c + p) - s.p_c * m;
    let g31 = -s.m_a * (alpha * s.k_a - s.e_a) + s.p_a * t;
    let g33 = -s.m_a * (alpha * s.k_c - s.e_c + p) + s.p_a * m;
    let g22 = -alpha * (mu - c * g);

    let l2 = convention.sign() * alpha * (alpha + 1.0) * k;
    let a_term = alpha * (alpha + 1.0) * k - omega.alpha_k_minus_e;
    let w1 = -s.m_c * omega.momentum + s.p_c * omega.mass;
    let c22 = -(s.m_c * a_term - w1 * g11 / g) + l2 * s.m_c;
    let c32 = s.m_a * a_term + w1 * g31 / g - l2 * s.m_a;

    let (b22, b23, b32, b33) = (g13, g11, g33 + g22, g31);
    Ok(Matrix3([[0.0, g * c32, b33], [1.0, b32, 0.0], [b22, g * c22 + b22 * b32, b23]]))
}

/// Which formulas produced a report's matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixRoute {
    Quadratic,
    General(SecondOrderConvention),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexValue> for Complex64 {
    fn from(z: ComplexValue) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub params: WaveParameters,
    pub functionals: FunctionalRecord,
    pub sensitivities: SensitivityRecord,
    #[serde(rename = "G")]
    pub gram: f64,
    pub route: MatrixRoute,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inner_products: Option<InnerProductRecord>,
    pub matrix: Matrix3,
    pub cubic: CubicCoefficients,
    pub discriminant: f64,
    /// Matrix eigenvalues `λ_j`.
    pub eigenvalues: [ComplexValue; 3],
    /// `μ_j = λ_j / G`.
    pub modulation_speeds: [ComplexValue; 3],
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verdict_note: Option<String>,
    pub morse_index: Option<u8>,
}

impl StabilityReport {
    pub fn eigenvalues(&self) -> [Complex64; 3] {
        self.eigenvalues.map(Complex64::from)
    }

    pub fn max_imag(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m: f64, z| m.max(z.im.abs()))
    }

    /// Re-runs the classification on the stored matrix.
    pub fn reclassify(&self) -> Verdict {
        let eig = eigenvalues3(&self.matrix);
        classify(&self.cubic, &eig, &self.matrix).verdict
    }
}

/// Builds the full report from functionals and their derivatives.
pub fn stability_report(
    params: &WaveParameters,
    functionals: &FunctionalRecord,
    sensitivities: &SensitivityRecord,
    route: MatrixRoute,
) -> Result<StabilityReport> {
    let gram = gram_determinant(sensitivities)?;
    let alpha = params.alpha;
    let (matrix, cubic, inner_products) = match route {
        MatrixRoute::Quadratic => {
            let record = quadratic_inner_products(alpha, params, functionals, sensitivities, &gram);
            let matrix = dispersion_matrix(&record, gram.gram);
            let cubic = cubic_coefficients(alpha, params.c, &record, gram.gram, gram.mass_potential);
            (matrix, cubic, Some(record))
        }
        MatrixRoute::General(convention) => {
            let matrix = dispersion_matrix_general(alpha, params, functionals, sensitivities, &gram, convention)?;
            (matrix, CubicCoefficients::from_matrix(&matrix, gram.gram), None)
        }
    };
    let eig = eigenvalues3(&matrix);
    let class = classify(&cubic, &eig, &matrix);
    Ok(StabilityReport {
        params: *params,
        functionals: *functionals,
        sensitivities: *sensitivities,
        gram: gram.gram,
        route,
        inner_products,
        matrix,
        cubic,
        discriminant: class.discriminant,
        eigenvalues: eig.map(ComplexValue::from),
        modulation_speeds: eig.map(|z| ComplexValue::from(z / gram.gram)),
        verdict: class.verdict,
        verdict_note: class.note,
        morse_index: morse_index(sensitivities.m_a, gram.gram).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{bo_dispersion_matrix, bo_functionals};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bo_inputs(c: f64, t: f64) -> (WaveParameters, FunctionalRecord, SensitivityRecord, GramRecord) {
        let params = WaveParameters::new(1.0, c, 0.0, t).unwrap();
        let closed = bo_functionals(&params).unwrap();
        let gram = gram_determinant(&closed.sensitivities).unwrap();
        (params, closed.functionals, closed.sensitivities, gram)
    }

    #[test]
    fn bo_pairings() {
        let t = PI / 2.0;
        let (params, f, s, g) = bo_inputs(-5.0, t);
        let r = quadratic_inner_products(1.0, &params, &f, &s, &g);
        assert_abs_diff_eq!(r.w1_l1_v1, PI * t, epsilon = 1e-12);
        assert_abs_diff_eq!(r.w3_l1_v3, -PI * t, epsilon = 1e-12);
        assert_abs_diff_eq!(r.w2_l1_v2, PI * t, epsilon = 1e-12);
        assert_abs_diff_eq!(r.w3_l1_v1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.w1_l1_v3, 2.0 * PI * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(r.d22, 0.0, epsilon = 1e-11);
        assert_abs_diff_eq!(r.d32, 9.0 * PI * PI / 10.0, epsilon = 1e-11);
        assert_abs_diff_eq!(g.mass_potential, -2.0 * PI * t, epsilon = 1e-12);
    }

    #[test]
    fn bo_matrix_matches_closed_form() {
        let (params, f, s, g) = bo_inputs(-5.0, PI / 2.0);
        let r = quadratic_inner_products(1.0, &params, &f, &s, &g);
        let m = dispersion_matrix(&r, g.gram);
        let (exact, ev) = bo_dispersion_matrix(-5.0, PI / 2.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(m.get(i, j), exact.get(i, j), epsilon = 1e-11);
            }
        }
        let eig = eigenvalues3(&exact);
        for (z, e) in eig.iter().zip(ev) {
            assert_abs_diff_eq!(z.re, e, epsilon = 1e-12);
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn bo_cubic_d2() {
        let (params, f, s, g) = bo_inputs(-5.0, PI / 2.0);
        let r = quadratic_inner_products(1.0, &params, &f, &s, &g);
        let cubic = cubic_coefficients(1.0, -5.0, &r, g.gram, g.mass_potential);
        assert_abs_diff_eq!(cubic.d2, PI.powi(6) / 200.0, epsilon = 1e-11);
        assert_abs_diff_eq!(cubic.lead, -(PI * PI / 10.0).powi(3), epsilon = 1e-14);
    }

    #[test]
    fn closed_form_cubic_equals_characteristic_polynomial() {
        for (c, t) in [(-5.0, PI / 2.0), (-9.0, 1.0), (-3.0, 4.0)] {
            let (params, f, s, g) = bo_inputs(c, t);
            let r = quadratic_inner_products(1.0, &params, &f, &s, &g);
            let m = dispersion_matrix(&r, g.gram);
            let cubic = cubic_coefficients(1.0, c, &r, g.gram, g.mass_potential);
            let from_m = CubicCoefficients::from_matrix(&m, g.gram);
            for mu in [0.0, 1.3, -2.7] {
                let direct = m.shifted(mu * g.gram).determinant();
                let scale = direct.abs().max(1.0);
                assert!((cubic.evaluate(mu) - direct).abs() <= 1e-10 * scale);
                assert!((from_m.evaluate(mu) - direct).abs() <= 1e-10 * scale);
            }
            assert!((m.trace() * g.gram * g.gram - cubic.d2).abs() <= 1e-8 * cubic.d2.abs());
        }
    }

    #[test]
    fn zero_pairings() {
        let z = InnerProductRecord {
            w1_l1_v1: 0.0,
            w1_l1_v3: 0.0,
            w3_l1_v1: 0.0,
            w3_l1_v3: 0.0,
            w2_l1_v2: 0.0,
            d22: 0.0,
            d32: 0.0,
            gamma: 1.7,
        };
        let (g, c) = (0.8, -3.0);
        let cubic = cubic_coefficients(1.0, c, &z, g, 0.0);
        assert_abs_diff_eq!(cubic.d2, g.powi(3) * c, epsilon = 1e-14);
        assert_abs_diff_eq!(cubic.d1, g * 1.7, epsilon = 1e-14);
        assert_abs_diff_eq!(cubic.d0, -1.7 * c * g, epsilon = 1e-14);
        assert_eq!(cubic_coefficients(0.5, c, &z, g, 2.0).d2, 0.0);
        let m = dispersion_matrix(&z, g);
        assert_eq!(m.rows(), &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
    }

    #[test]
    fn discriminant_examples() {
        let roots123 = CubicCoefficients { lead: 1.0, d2: -6.0, d1: 11.0, d0: -6.0 };
        assert_eq!(discriminant(&roots123), 4.0);
        // μ³ + μ = μ(μ − i)(μ + i)
        let rotation = CubicCoefficients { lead: 1.0, d2: 0.0, d1: 1.0, d0: 0.0 };
        assert_eq!(discriminant(&rotation), -4.0);
        // (μ − 2)³
        let triple = CubicCoefficients { lead: 1.0, d2: -6.0, d1: 12.0, d0: -8.0 };
        assert_eq!(discriminant(&triple), 0.0);
    }

    #[test]
    fn eigenvalue_examples() {
        let eig = eigenvalues3(&Matrix3::diagonal([1.0, 2.0, 3.0]));
        for (z, e) in eig.iter().zip([3.0, 2.0, 1.0]) {
            assert_abs_diff_eq!(z.re, e, epsilon = 1e-14);
            assert_eq!(z.im, 0.0);
        }
        let kdv_four_digit = Matrix3([[-17.0603, -70.4702, -4.82493], [1.0, 24.4707, 0.0], [33.8253, -446.679, 29.2956]]);
        let eig = eigenvalues3(&kdv_four_digit);
        for (z, e) in eig.iter().zip([31.64, 14.08, -9.016]) {
            assert!((z.re - e).abs() < 5e-3 * e.abs(), "{z} vs {e}");
            assert_eq!(z.im, 0.0);
        }
        // rotation block
        let rot = Matrix3([[0.0, -2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        let eig = eigenvalues3(&rot);
        assert_abs_diff_eq!(eig[0].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig[1].im, 2.0, epsilon = 1e-14);
        assert_eq!(eig[2], eig[1].conj());
        let scalar = eigenvalues3(&Matrix3::diagonal([2.0, 2.0, 2.0]));
        assert!(scalar.iter().all(|z| (z.re - 2.0).abs() < 1e-12 && z.im == 0.0));
    }

    #[test]
    fn classify_examples() {
        let (exact, _) = bo_dispersion_matrix(-5.0, PI / 2.0).unwrap();
        let g = PI * PI / 10.0;
        let cubic = CubicCoefficients::from_matrix(&exact, g);
        let c = classify(&cubic, &eigenvalues3(&exact), &exact);
        assert_eq!(c.verdict, Verdict::ModulationallyStable);
        assert!(c.discriminant > 0.0);

        let rot = Matrix3([[0.0, -2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        let cubic = CubicCoefficients::from_matrix(&rot, 1.0);
        assert_eq!(classify(&cubic, &eigenvalues3(&rot), &rot).verdict, Verdict::ModulationallyUnstable);

        // mismatched evidence is reported, not resolved
        let wrong = CubicCoefficients::from_matrix(&exact, g);
        let c = classify(&wrong, &eigenvalues3(&rot), &rot);
        assert_eq!(c.verdict, Verdict::Degenerate);
        assert!(c.note.is_some());

        let triple = Matrix3::diagonal([2.0, 2.0, 2.0]);
        let cubic = CubicCoefficients::from_matrix(&triple, 1.0);
        assert_eq!(classify(&cubic, &eigenvalues3(&triple), &triple).verdict, Verdict::Degenerate);
    }

    #[test]
    fn morse_examples() {
        let t = PI / 2.0;
        assert_eq!(morse_index(t / 5.0, PI * PI / 10.0).unwrap(), 1);
        assert_eq!(morse_index(0.3, -1.0).unwrap(), 0);
        assert_eq!(morse_index(-0.3, -1.0).unwrap(), 2);
        assert_eq!(morse_index(-0.3, 1.0).unwrap(), 1);
        assert!(matches!(morse_index(0.0, 1.0), Err(Error::DegenerateSequence { .. })));
        assert!(morse_index(1.0, 0.0).is_err());
    }

    #[test]
    fn general_route_degenerate_inputs() {
        let params = WaveParameters::new(1.3, -4.0, 0.5, 2.0).unwrap();
        let f = FunctionalRecord { mass: 1.5, momentum: 0.7, ..FunctionalRecord::default() };
        let s = SensitivityRecord {
            m_c: 0.2,
            m_a: 0.9,
            p_c: -1.1,
            p_a: 0.3,
            u_c: 0.4,
            u_a: -0.6,
            k_c: 0.0,
            k_a: 0.0,
            e_c: 0.0,
            e_a: 0.0,
            omega: Some(crate::sensitivity::OmegaDerivatives::new(1.3, 0.0, 0.0, 0.0, 0.0)),
            steps: None,
        };
        let g = gram_determinant(&s).unwrap();
        let m = dispersion_matrix_general(1.3, &params, &f, &s, &g, SecondOrderConvention::Standard).unwrap();
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_abs_diff_eq!(m.get(0, 2), s.p_a * 2.0, epsilon = 1e-15);
        assert_eq!(m.get(1, 0), 1.0);
        let b32 = -1.3 * (g.mass_potential - params.c * g.gram) + s.p_a * f.mass - s.m_a * f.momentum;
        assert_abs_diff_eq!(m.get(1, 1), b32, epsilon = 1e-14);
        assert_eq!(m.get(1, 2), 0.0);

        let missing = SensitivityRecord { omega: None, ..s };
        assert!(matches!(
            dispersion_matrix_general(1.3, &params, &f, &missing, &g, SecondOrderConvention::Standard),
            Err(Error::MissingOmegaDerivatives)
        ));
    }

    #[test]
    fn general_route_matches_quadratic_on_bo_closed_forms() {
        for (c, t) in [(-5.0, PI / 2.0), (-8.0, 1.0), (-4.0, 3.0)] {
            let (params, f, s, g) = bo_inputs(c, t);
            let quad = stability_report(&params, &f, &s, MatrixRoute::Quadratic).unwrap();
            let general = stability_report(&params, &f, &s, MatrixRoute::General(SecondOrderConvention::Standard)).unwrap();
            for (x, y) in quad.eigenvalues().iter().zip(general.eigenvalues()) {
                assert!((x - y).norm() < 1e-9 * x.norm().max(1.0), "{x} vs {y}");
            }
            assert_eq!(general.matrix.get(0, 0), 0.0);
            assert_eq!(quad.verdict, general.verdict);
            let _ = g;
        }
    }

    #[test]
    fn commutator_convention_gives_bloch_spectrum() {
        // small-Floquet-exponent spectrum of the a = 0 BO wave: {πT, ±πTκ/|c|}
        let (c, t) = (-5.0, PI / 2.0);
        let (params, f, s, _) = bo_inputs(c, t);
        let report = stability_report(&params, &f, &s, MatrixRoute::General(SecondOrderConvention::Commutator)).unwrap();
        let kappa = 2.0 * PI / t;
        let expected = [PI * t, PI * t * kappa / c.abs(), -PI * t * kappa / c.abs()];
        for (z, e) in report.eigenvalues().iter().zip(expected) {
            assert!((z.re - e).abs() < 1e-9 && z.im.abs() < 1e-9, "{z} vs {e}");
        }
    }

    #[test]
    fn report_round_trip() {
        let (params, f, s, _) = bo_inputs(-5.0, PI / 2.0);
        let report = stability_report(&params, &f, &s, MatrixRoute::Quadratic).unwrap();
        assert_eq!(report.morse_index, Some(1));
        let json = serde_json::to_string(&report).unwrap();
        let back: StabilityReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.reclassify(), report.verdict);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in [
            "params",
            "functionals",
            "sensitivities",
            "G",
            "matrix",
            "cubic",
            "discriminant",
            "eigenvalues",
            "modulation_speeds",
            "verdict",
            "morse_index",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["verdict"], "modulationally_stable");
        assert!(v["cubic"].get("D2").is_some());
    }

    fn companion_eigenvalues(m: &Matrix3) -> Vec<Complex64> {
        let n = nalgebra::Matrix3::from_fn(|i, j| m.get(i, j));
        n.complex_eigenvalues().iter().copied().collect()
    }

    fn matched(a: &[Complex64; 3], b: &[Complex64]) -> f64 {
        a.iter().map(|z| b.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn discriminant_sign_matches_root_type(
            lead in prop::sample::select(vec![-3.0, -1.0, -0.2, 0.5, 2.0]),
            r0 in -5.0f64..5.0, r1 in -5.0f64..5.0, r2 in -5.0f64..5.0,
            complex in any::<bool>(),
        ) {
            // lead(μ − x)(μ² + pμ + q) with the quadratic factor real or complex
            let (p, q) = if complex { (-2.0 * r1, r1 * r1 + r2 * r2 + 0.1) } else { (-(r1 + r2), r1 * r2) };
            let coeffs = CubicCoefficients { lead, d2: lead * (p - r0), d1: lead * (q - r0 * p), d0: -lead * r0 * q };
            let delta = discriminant(&coeffs);
            let has_pair = complex;
            if has_pair {
                prop_assert!(delta < 0.0);
            } else {
                prop_assert!(delta >= -1e-9 * discriminant_scale(&coeffs));
            }
        }

        #[test]
        fn cardano_matches_iterative_solver(entries in prop::collection::vec(-10.0f64..10.0, 9)) {
            let m = Matrix3([[entries[0], entries[1], entries[2]], [entries[3], entries[4], entries[5]], [entries[6], entries[7], entries[8]]]);
            let ours = eigenvalues3(&m);
            let reference = companion_eigenvalues(&m);
            let scale = m.norm_inf().max(1.0);
            prop_assert!(matched(&ours, &reference) <= 1e-10 * scale, "{:?} vs {:?}", ours, reference);
        }

        #[test]
        fn morse_index_depends_only_on_signs(m_a in -5.0f64..5.0, g in -5.0f64..5.0, s1 in 0.01f64..100.0, s2 in 0.01f64..100.0) {
            prop_assume!(m_a != 0.0 && g != 0.0);
            prop_assert_eq!(morse_index(m_a, g).unwrap(), morse_index(s1 * m_a, s2 * g).unwrap());
        }

        #[test]
        fn trace_consistency(
            mc in -3.0f64..3.0, ma in -3.0f64..3.0, pc in -3.0f64..3.0, pa in -3.0f64..3.0,
            uc in -3.0f64..3.0, ua in -3.0f64..3.0, alpha in 0.2f64..2.0, c in -5.0f64..5.0, a in -2.0f64..2.0,
            m in -3.0f64..3.0, p in 0.0f64..3.0, u in -3.0f64..3.0,
        ) {
            let s = SensitivityRecord { m_c: mc, m_a: ma, p_c: pc, p_a: pa, u_c: uc, u_a: ua,
                k_c: 0.0, k_a: 0.0, e_c: 0.0, e_a: 0.0, omega: None, steps: None };
            prop_assume!(gram_determinant(&s).is_ok() && s.gram().abs() > 1e-3);
            let g = gram_determinant(&s).unwrap();
            let params = WaveParameters::new(alpha, c, a, 2.0).unwrap();
            let f = FunctionalRecord::assemble(m, p, u, 0.0, c, a);
            let r = quadratic_inner_products(alpha, &params, &f, &s, &g);
            let sum = r.w1_l1_v1 + r.w3_l1_v3;
            let expected = (1.0 - alpha) * (g.mass_potential - c * g.gram);
            prop_assert!((sum - expected).abs() <= 1e-9 * expected.abs().max(sum.abs()).max(1e-300) + 1e-12);
            let mat = dispersion_matrix(&r, g.gram);
            let cubic = cubic_coefficients(alpha, c, &r, g.gram, g.mass_potential);
            prop_assert!((mat.trace() * g.gram * g.gram - cubic.d2).abs() <= 1e-8 * cubic.d2.abs().max(1e-12));
            let from_m = CubicCoefficients::from_matrix(&mat, g.gram);
            for mu in [0.0, 0.7, -1.9] {
                let direct = mat.shifted(mu * g.gram).determinant();
                let scale = from_m.evaluate(mu).abs().max(direct.abs()).max(1.0) * (1.0 + g.gram.abs().powi(3));
                prop_assert!((cubic.evaluate(mu) - direct).abs() <= 1e-9 * scale);
            }
        }
    }
}
