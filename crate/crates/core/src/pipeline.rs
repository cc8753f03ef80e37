//! Solve → functionals → sensitivities → stability report, and parameter
//! sweeps with continuation and onset bisection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{general_identity_residuals, identity_scale, IdentityResiduals};
use crate::nonlinearity::Nonlinearity;
use crate::reference::WaveParameters;
use crate::sensitivity::{parameter_derivatives_from, DerivativeScope, SensitivityAnalysis, StepSizes};
use crate::solver::{petviashvili_solve, SolveOutcome, SolverConfig};
use crate::spectral::WaveProfile;
use crate::stability::{stability_report, MatrixRoute, SecondOrderConvention, StabilityReport, Verdict};

/// Identity residuals above `IDENTITY_TOL·max(1, |c|, |a|, T)` reject a solve.
pub const IDENTITY_TOL: f64 = 1e-8;

/// Profiles flatter than this (relative to `max(1, |mean|)`) are constant solutions.
pub const CONSTANT_HEIGHT: f64 = 1e-8;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnalysisOptions {
    pub solver: SolverConfig,
    /// `None` picks the default steps for each parameter point.
    pub steps: Option<StepSizes>,
    /// `None` uses the quadratic route for `f = u²` and the general route otherwise.
    pub route: Option<MatrixRoute>,
}

impl AnalysisOptions {
    fn route_for(&self, f: &Nonlinearity) -> Result<MatrixRoute> {
        match self.route {
            Some(MatrixRoute::Quadratic) if !f.is_quadratic() => {
                Err(Error::NotQuadratic(format!("the closed-form pairings do not apply to f = {f}")))
            }
            Some(route) => Ok(route),
            None if f.is_quadratic() => Ok(MatrixRoute::Quadratic),
            None => Ok(MatrixRoute::General(SecondOrderConvention::Standard)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub sensitivity: SensitivityAnalysis,
    pub identities: IdentityResiduals,
    pub report: StabilityReport,
}

impl Analysis {
    pub fn solve(&self) -> &SolveOutcome {
        &self.sensitivity.base
    }
}

/// Checks the integral identities of an accepted solve.
pub fn check_identities(profile: &WaveProfile, params: &WaveParameters, f: &Nonlinearity) -> Result<IdentityResiduals> {
    let record = crate::functionals::evaluate_functionals(profile, params, f)?;
    let residuals = general_identity_residuals(profile, &record, params, f, None);
    let tolerance = IDENTITY_TOL * identity_scale(params);
    if !(residuals.r1.abs() <= tolerance && residuals.r2.abs() <= tolerance) {
        return Err(Error::IdentityViolation { r1: residuals.r1, r2: residuals.r2, tolerance });
    }
    Ok(residuals)
}

/// Full pipeline at one parameter point.
pub fn analyze(params: &WaveParameters, f: &Nonlinearity, options: &AnalysisOptions, warm_start: Option<&WaveProfile>) -> Result<Analysis> {
    options.route_for(f)?;
    let base = petviashvili_solve(params, f, &options.solver, warm_start)?;
    analyze_solved(base, params, f, options)
}

/// Pipeline after the base solve.
pub fn analyze_solved(base: SolveOutcome, params: &WaveParameters, f: &Nonlinearity, options: &AnalysisOptions) -> Result<Analysis> {
    let route = options.route_for(f)?;
    let identities = check_identities(&base.profile, params, f)?;
    let steps = options.steps.unwrap_or_else(|| StepSizes::default_for(params));
    let scope = match route {
        MatrixRoute::Quadratic => DerivativeScope::CaOnly,
        MatrixRoute::General(_) => DerivativeScope::CaAndOmega,
    };
    let sensitivity = parameter_derivatives_from(base, params, f, &options.solver, &steps, scope)?;
    let identities = match sensitivity.record.omega {
        Some(omega) => {
            let e_t = omega.energy_period_derivative(sensitivity.functionals.energy, params.period);
            general_identity_residuals(&sensitivity.base.profile, &sensitivity.functionals, params, f, Some(e_t))
        }
        None => identities,
    };
    let report = stability_report(params, &sensitivity.functionals, &sensitivity.record, route)?;
    Ok(Analysis { sensitivity, identities, report })
}

/// The parameter a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "c")]
    C,
    #[serde(rename = "a")]
    A,
    #[serde(rename = "T")]
    Period,
}

impl SweepParameter {
    pub fn apply(self, params: &WaveParameters, value: f64) -> WaveParameters {
        match self {
            Self::Alpha => params.with_alpha(value),
            Self::C => params.with_c(value),
            Self::A => params.with_a(value),
            Self::Period => params.with_period(value),
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Alpha => "alpha",
            Self::C => "c",
            Self::A => "a",
            Self::Period => "T",
        })
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "alpha" => Ok(Self::Alpha),
            "c" => Ok(Self::C),
            "a" => Ok(Self::A),
            "T" => Ok(Self::Period),
            other => Err(Error::Parse(format!("sweep parameter `{other}` (expected alpha, c, a or T)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidParameters(format!("sweep count must be at least 2, got {}", self.count)));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start == self.stop {
            return Err(Error::InvalidParameters(format!("sweep needs distinct finite endpoints, got {} and {}", self.start, self.stop)));
        }
        Ok(())
    }

    /// Evenly spaced values in ascending order.
    pub fn values(&self) -> Vec<f64> {
        let (lo, hi) = if self.start < self.stop { (self.start, self.stop) } else { (self.stop, self.start) };
        let n = self.count - 1;
        (0..=n).map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 }).collect()
    }
}

/// What happened at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RowStatus {
    Analyzed {
        verdict: Verdict,
    },
    /// The solve landed on a constant solution, where `G = 0`.
    ConstantBranch {
        value: f64,
    },
    /// No usable result; the sweep continues past this point.
    Gap {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<StabilityReport>,
    pub iterations: Option<usize>,
}

impl SweepRow {
    pub fn verdict_label(&self) -> String {
        match &self.status {
            RowStatus::Analyzed { verdict } => verdict.to_string(),
            RowStatus::ConstantBranch { .. } => "constant_branch".into(),
            RowStatus::Gap { .. } => "gap".into(),
        }
    }

    pub fn discriminant(&self) -> Option<f64> {
        match (&self.status, &self.report) {
            (RowStatus::Analyzed { verdict }, Some(r)) if *verdict != Verdict::Degenerate => Some(r.discriminant),
            _ => None,
        }
    }

    /// `param,G,delta,re1,im1,re2,im2,re3,im3,verdict,iters`
    pub fn csv_line(&self) -> String {
        let mut fields = vec![self.param.to_string()];
        match &self.report {
            Some(r) => {
                fields.push(r.gram.to_string());
                fields.push(r.discriminant.to_string());
                for z in &r.eigenvalues {
                    fields.push(z.re.to_string());
                    fields.push(z.im.to_string());
                }
            }
            None => fields.extend(std::iter::repeat_n("NaN".to_string(), 8)),
        }
        fields.push(self.verdict_label());
        fields.push(self.iterations.map_or_else(String::new, |n| n.to_string()));
        fields.join(",")
    }
}

pub const SWEEP_CSV_HEADER: &str = "param,G,delta,re1,im1,re2,im2,re3,im3,verdict,iters";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    /// Refined parameter values where `Δ` changes sign.
    pub onsets: Vec<f64>,
}

impl SweepResult {
    pub fn write_csv(&self, mut out: impl std::io::Write) -> Result<()> {
        writeln!(out, "{SWEEP_CSV_HEADER}")?;
        for row in &self.rows {
            writeln!(out, "{}", row.csv_line())?;
        }
        Ok(())
    }

    /// `param,max_im`: the largest imaginary part of the eigenvalues per point.
    pub fn write_imaginary_csv(&self, mut out: impl std::io::Write) -> Result<()> {
        writeln!(out, "param,max_im")?;
        for row in &self.rows {
            let im = row.report.as_ref().map_or(f64::NAN, |r| r.max_imag());
            writeln!(out, "{},{}", row.param, im)?;
        }
        Ok(())
    }
}

/// Onsets are bisected down to this width in the swept parameter.
pub const ONSET_RESOLUTION: f64 = 1e-3;

enum PointResult {
    Analyzed(Box<Analysis>),
    Constant(SolveOutcome),
}

fn analyze_point(params: &WaveParameters, f: &Nonlinearity, options: &AnalysisOptions, warm: Option<&WaveProfile>) -> Result<PointResult> {
    let base = petviashvili_solve(params, f, &options.solver, warm)?;
    let profile = &base.profile;
    if profile.height() <= CONSTANT_HEIGHT * profile.mean().abs().max(1.0) {
        return Ok(PointResult::Constant(base));
    }
    Ok(PointResult::Analyzed(Box::new(analyze_solved(base, params, f, options)?)))
}

/// Sweeps `spec.parameter` upward from the smaller endpoint, warm-starting
/// each point from the last converged profile (one cold retry on failure),
/// then bisects every sign change of `Δ` between analyzed neighbours.
pub fn sweep(base: &WaveParameters, f: &Nonlinearity, options: &AnalysisOptions, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.count);
    let mut profiles: Vec<Option<WaveProfile>> = Vec::with_capacity(spec.count);
    let mut warm: Option<WaveProfile> = None;
    for value in spec.values() {
        let params = spec.parameter.apply(base, value);
        let mut result = params.validate().and_then(|_| analyze_point(&params, f, options, warm.as_ref()));
        if result.is_err() && warm.is_some() {
            result = analyze_point(&params, f, options, None);
        }
        let row = match result {
            Ok(PointResult::Analyzed(analysis)) => {
                warm = Some(analysis.solve().profile.clone());
                profiles.push(warm.clone());
                SweepRow {
                    param: value,
                    status: RowStatus::Analyzed { verdict: analysis.report.verdict },
                    iterations: Some(analysis.solve().iterations),
                    report: Some(analysis.report),
                }
            }
            Ok(PointResult::Constant(out)) => {
                warm = Some(out.profile.clone());
                profiles.push(None);
                SweepRow {
                    param: value,
                    status: RowStatus::ConstantBranch { value: out.profile.mean() },
                    report: None,
                    iterations: Some(out.iterations),
                }
            }
            Err(e) => {
                profiles.push(None);
                SweepRow { param: value, status: RowStatus::Gap { reason: e.to_string() }, report: None, iterations: None }
            }
        };
        rows.push(row);
    }

    let mut onsets = Vec::new();
    for i in 0..rows.len().saturating_sub(1) {
        let (Some(d0), Some(d1)) = (rows[i].discriminant(), rows[i + 1].discriminant()) else { continue };
        if (d0 < 0.0) == (d1 < 0.0) {
            continue;
        }
        if let Some(onset) =
            bisect_onset(base, f, options, spec.parameter, (rows[i].param, d0 < 0.0), rows[i + 1].param, profiles[i].clone())
        {
            onsets.push(onset);
        }
    }
    Ok(SweepResult { spec: *spec, rows, onsets })
}

fn bisect_onset(
    base: &WaveParameters,
    f: &Nonlinearity,
    options: &AnalysisOptions,
    parameter: SweepParameter,
    (mut lo, lo_unstable): (f64, bool),
    mut hi: f64,
    mut warm: Option<WaveProfile>,
) -> Option<f64> {
    while hi - lo > ONSET_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        let params = parameter.apply(base, mid);
        let analysis = match analyze_point(&params, f, options, warm.as_ref()) {
            Ok(PointResult::Analyzed(a)) if a.report.verdict != Verdict::Degenerate => a,
            _ => return None,
        };
        if (analysis.report.discriminant < 0.0) == lo_unstable {
            lo = mid;
            warm = Some(analysis.solve().profile.clone());
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
