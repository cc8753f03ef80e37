//! Derivatives of the functionals in `c`, `a` and `Ω = 1/T` by symmetric
//! differences of warm-started re-solves.

use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{evaluate_functionals, FunctionalRecord};
use crate::nonlinearity::Nonlinearity;
use crate::reference::WaveParameters;
use crate::solver::{petviashvili_solve, SolveOutcome, SolverConfig};

/// `(ΩF)_Ω = ∂(ΩF)/∂Ω` at fixed `(c, a)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaDerivatives {
    #[serde(rename = "omega_P")]
    pub momentum: f64,
    #[serde(rename = "omega_M")]
    pub mass: f64,
    #[serde(rename = "omega_K")]
    pub kinetic: f64,
    #[serde(rename = "omega_E")]
    pub energy: f64,
    /// `(Ω(αK − E))_Ω`
    #[serde(rename = "omega_alphaK_minus_E")]
    pub alpha_k_minus_e: f64,
}

impl OmegaDerivatives {
    pub fn new(alpha: f64, momentum: f64, mass: f64, kinetic: f64, energy: f64) -> Self {
        Self { momentum, mass, kinetic, energy, alpha_k_minus_e: alpha * kinetic - energy }
    }

    /// `E_T = −Ω((ΩE)_Ω − E)`, with `Ω = 1/T`.
    pub fn energy_period_derivative(&self, energy: f64, period: f64) -> f64 {
        -(self.energy - energy) / period
    }
}

/// Step sizes of the symmetric stencils.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    pub h_c: f64,
    pub h_a: f64,
    #[serde(rename = "h_T")]
    pub h_t: f64,
}

impl StepSizes {
    /// `h_c = h_a = 1e−4·max(1, |c|, |a|)`, `h_T = 1e−4·T`.
    pub fn default_for(params: &WaveParameters) -> Self {
        let h = 1e-4 * 1f64.max(params.c.abs()).max(params.a.abs());
        Self { h_c: h, h_a: h, h_t: 1e-4 * params.period }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, h) in [("h_c", self.h_c), ("h_a", self.h_a), ("h_T", self.h_t)] {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidParameters(format!("{name} must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRecord {
    #[serde(rename = "M_c")]
    pub m_c: f64,
    #[serde(rename = "M_a")]
    pub m_a: f64,
    #[serde(rename = "P_c")]
    pub p_c: f64,
    #[serde(rename = "P_a")]
    pub p_a: f64,
    #[serde(rename = "U_c")]
    pub u_c: f64,
    #[serde(rename = "U_a")]
    pub u_a: f64,
    #[serde(rename = "K_c")]
    pub k_c: f64,
    #[serde(rename = "K_a")]
    pub k_a: f64,
    #[serde(rename = "E_c")]
    pub e_c: f64,
    #[serde(rename = "E_a")]
    pub e_a: f64,
    #[serde(rename = "omega_derivs", skip_serializing_if = "Option::is_none", default)]
    pub omega: Option<OmegaDerivatives>,
    /// `None` for closed-form records.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub steps: Option<StepSizes>,
}

impl SensitivityRecord {
    /// `G = M_c P_a − M_a P_c`.
    pub fn gram(&self) -> f64 {
        self.m_c * self.p_a - self.m_a * self.p_c
    }

    /// `{M, U}_{c,a} = M_c U_a − M_a U_c`.
    pub fn mass_potential_bracket(&self) -> f64 {
        self.m_c * self.u_a - self.m_a * self.u_c
    }

    /// `{P, U}_{c,a} = P_c U_a − P_a U_c`.
    pub fn momentum_potential_bracket(&self) -> f64 {
        self.p_c * self.u_a - self.p_a * self.u_c
    }

    /// `|M_c − P_a| / max(1, |M_c|)`.
    pub fn symmetry_defect(&self) -> f64 {
        (self.m_c - self.p_a).abs() / self.m_c.abs().max(1.0)
    }
}

/// `G` and the two Poisson brackets that enter the dispersion matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramRecord {
    #[serde(rename = "G")]
    pub gram: f64,
    #[serde(rename = "MU")]
    pub mass_potential: f64,
    #[serde(rename = "PU")]
    pub momentum_potential: f64,
}

/// Relative floor below which `G` is treated as zero.
pub const GRAM_FLOOR: f64 = 1e-8;

pub fn gram_determinant(record: &SensitivityRecord) -> Result<GramRecord> {
    let gram = record.gram();
    let scale = (record.m_c * record.p_a).abs().max((record.m_a * record.p_c).abs());
    let floor = GRAM_FLOOR * scale;
    if !gram.is_finite() || gram.abs() <= floor {
        return Err(Error::DegenerateGram { gram, floor });
    }
    Ok(GramRecord { gram, mass_potential: record.mass_potential_bracket(), momentum_potential: record.momentum_potential_bracket() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScope {
    CaOnly,
    CaAndOmega,
}

/// Base solve, its functionals and the derivative record.
#[derive(Clone, Debug)]
pub struct SensitivityAnalysis {
    pub base: SolveOutcome,
    pub functionals: FunctionalRecord,
    pub record: SensitivityRecord,
}

/// Cold-solves at `params`, then differentiates around that solution.
pub fn parameter_derivatives(
    params: &WaveParameters,
    f: &Nonlinearity,
    config: &SolverConfig,
    steps: &StepSizes,
    scope: DerivativeScope,
) -> Result<SensitivityAnalysis> {
    let base = petviashvili_solve(params, f, config, None)?;
    parameter_derivatives_from(base, params, f, config, steps, scope)
}

/// A perturbed solve further from its warm start than this multiple of
/// `h·max(1, ‖u‖_∞)` is taken as a jump to another branch.
const BRANCH_FACTOR: f64 = 100.0;
/// Allowed asymmetry between the deviations of opposite corners.
const BRANCH_ASYMMETRY: f64 = 10.0;

struct Corner {
    label: &'static str,
    params: WaveParameters,
    step: f64,
}

/// Differentiates around an already converged base solve.
pub fn parameter_derivatives_from(
    base: SolveOutcome,
    params: &WaveParameters,
    f: &Nonlinearity,
    config: &SolverConfig,
    steps: &StepSizes,
    scope: DerivativeScope,
) -> Result<SensitivityAnalysis> {
    steps.validate()?;
    let functionals = evaluate_functionals(&base.profile, params, f)?;
    let omega = 1.0 / params.period;
    let g = steps.h_t * omega * omega;

    let mut corners = vec![
        Corner { label: "c+h_c", params: params.with_c(params.c + steps.h_c), step: steps.h_c },
        Corner { label: "c-h_c", params: params.with_c(params.c - steps.h_c), step: steps.h_c },
        Corner { label: "a+h_a", params: params.with_a(params.a + steps.h_a), step: steps.h_a },
        Corner { label: "a-h_a", params: params.with_a(params.a - steps.h_a), step: steps.h_a },
    ];
    if scope == DerivativeScope::CaAndOmega {
        if g >= omega {
            return Err(Error::InvalidParameters(format!("h_T = {} too large for T = {}", steps.h_t, params.period)));
        }
        corners.push(Corner { label: "Omega+g", params: params.with_period(1.0 / (omega + g)), step: steps.h_t });
        corners.push(Corner { label: "Omega-g", params: params.with_period(1.0 / (omega - g)), step: steps.h_t });
    }

    let solved: Vec<Result<(FunctionalRecord, f64)>> = thread::scope(|s| {
        let handles: Vec<_> = corners.iter().map(|corner| s.spawn(|| solve_corner(corner, &base, f, config))).collect();
        handles.into_iter().map(|h| h.join().expect("corner solve panicked")).collect()
    });
    let mut values = Vec::with_capacity(corners.len());
    for (corner, result) in corners.iter().zip(solved) {
        values.push(result.map_err(|e| match e {
            Error::BranchJump { .. } => e,
            other => Error::PerturbedSolve { corner: corner.label.into(), source: Box::new(other) },
        })?);
    }
    for (pair, pair_corners) in values.chunks(2).zip(corners.chunks(2)) {
        check_symmetric(pair[0].1, pair[1].1, pair_corners)?;
    }

    let d = |plus: &FunctionalRecord, minus: &FunctionalRecord, h: f64, pick: fn(&FunctionalRecord) -> f64| {
        (pick(plus) - pick(minus)) / (2.0 * h)
    };
    let (cp, cm, ap, am) = (&values[0].0, &values[1].0, &values[2].0, &values[3].0);
    let omega_derivs = (scope == DerivativeScope::CaAndOmega).then(|| {
        let (wp, wm) = (&values[4].0, &values[5].0);
        let dw = |pick: fn(&FunctionalRecord) -> f64| ((omega + g) * pick(wp) - (omega - g) * pick(wm)) / (2.0 * g);
        OmegaDerivatives::new(params.alpha, dw(|r| r.momentum), dw(|r| r.mass), dw(|r| r.kinetic), dw(|r| r.energy))
    });
    let record = SensitivityRecord {
        m_c: d(cp, cm, steps.h_c, |r| r.mass),
        m_a: d(ap, am, steps.h_a, |r| r.mass),
        p_c: d(cp, cm, steps.h_c, |r| r.momentum),
        p_a: d(ap, am, steps.h_a, |r| r.momentum),
        u_c: d(cp, cm, steps.h_c, |r| r.potential),
        u_a: d(ap, am, steps.h_a, |r| r.potential),
        k_c: d(cp, cm, steps.h_c, |r| r.kinetic),
        k_a: d(ap, am, steps.h_a, |r| r.kinetic),
        e_c: d(cp, cm, steps.h_c, |r| r.energy),
        e_a: d(ap, am, steps.h_a, |r| r.energy),
        omega: omega_derivs,
        steps: Some(*steps),
    };
    Ok(SensitivityAnalysis { base, functionals, record })
}

/// Warm-started solve at one stencil corner; returns its functionals and
/// the distance from the warm start.
fn solve_corner(corner: &Corner, base: &SolveOutcome, f: &Nonlinearity, config: &SolverConfig) -> Result<(FunctionalRecord, f64)> {
    let out = petviashvili_solve(&corner.params, f, config, Some(&base.profile))?;
    let warm = base.profile.regrid(out.profile.grid());
    let deviation = out.profile.distance_inf(&warm)?;
    let threshold = BRANCH_FACTOR * corner.step * base.profile.max_abs().max(1.0);
    if deviation > threshold {
        return Err(Error::BranchJump { corner: corner.label.into(), deviation, threshold });
    }
    Ok((evaluate_functionals(&out.profile, &corner.params, f)?, deviation))
}

/// Opposite corners of a smooth branch move away from the base by nearly
/// the same amount; a lopsided pair means one of them switched branch.
fn check_symmetric(plus: f64, minus: f64, corners: &[Corner]) -> Result<()> {
    let (hi, lo) = if plus >= minus { (plus, minus) } else { (minus, plus) };
    let noise = 1e-10;
    if hi > BRANCH_ASYMMETRY * lo + noise {
        let label = if plus >= minus { corners[0].label } else { corners[1].label };
        return Err(Error::BranchJump { corner: label.into(), deviation: hi, threshold: BRANCH_ASYMMETRY * lo + noise });
    }
    Ok(())
}
