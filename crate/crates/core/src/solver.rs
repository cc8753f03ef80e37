//! Kernel-projected Petviashvili iteration for even periodic waves of
//! `Λ^α u = f(u) + cu + a`.
//!
//! Each step inverts Λ^α on the zero-mean part and fixes the mean `θ` so
//! that the next right-hand side is orthogonal to the constant kernel:
//!
//! ```text
//! v = (Λ^α)⁺ (f(u) + cu + a)
//! mean(f(v + θ)) + cθ + a = 0
//! u ← v + θ
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::reference::WaveParameters;
use crate::spectral::{apply_fractional_laplacian, apply_pseudo_inverse, trapezoid_integral, PeriodicGrid, WaveProfile};

/// Which root of the mean-component equation to follow.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootSign {
    #[default]
    Plus,
    Minus,
}

impl fmt::Display for RootSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plus => "plus",
            Self::Minus => "minus",
        })
    }
}

impl FromStr for RootSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "plus" | "+" => Ok(Self::Plus),
            "minus" | "-" => Ok(Self::Minus),
            other => Err(Error::Parse(format!("root sign `{other}` (expected plus or minus)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once the L² increment falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub mean_root_sign: RootSign,
    /// Amplitude of the cold-start guess `A cos(2πx/T)`.
    pub initial_amplitude: f64,
    /// Mode count `N` of the collocation grid.
    pub modes: usize,
    /// Evaluate `f(u)` with 3/2-rule padding.
    pub dealias: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_iterations: 100_000,
            mean_root_sign: RootSign::Plus,
            initial_amplitude: 1.0,
            modes: 256,
            dealias: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidParameters(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameters("max_iterations must be at least 1".into()));
        }
        if !self.initial_amplitude.is_finite() {
            return Err(Error::InvalidParameters("initial amplitude must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub profile: WaveProfile,
    pub iterations: usize,
    pub final_increment: f64,
    pub residual_inf: f64,
    pub mean_theta: f64,
    /// L² increment of every iteration, in order.
    pub increments: Vec<f64>,
}

/// Runs the iteration from `warm_start` (regridded onto the target grid by
/// its coefficients) or from `A cos(2πx/T)`.
pub fn petviashvili_solve(
    params: &WaveParameters,
    f: &Nonlinearity,
    config: &SolverConfig,
    warm_start: Option<&WaveProfile>,
) -> Result<SolveOutcome> {
    params.validate()?;
    config.validate()?;
    let grid = PeriodicGrid::new(params.period, config.modes)?;
    let mut u = match warm_start {
        Some(w) => w.regrid(&grid),
        None => WaveProfile::cosine_mode(&grid, 1, config.initial_amplitude)?,
    };
    let WaveParameters { alpha, c, a, .. } = *params;
    let mut increments = Vec::new();
    let mut theta = u.mean();
    for iteration in 1..=config.max_iterations {
        let fu = if config.dealias { u.dealiased_map(|x| f.value(x)) } else { u.map(|x| f.value(x)) };
        let rhs = fu.zip_with(&u, |fx, x| fx + c * x + a)?;
        let v = apply_pseudo_inverse(&rhs, alpha)?;
        theta = mean_component_root_near(&v, c, a, f, config.mean_root_sign, theta)?;
        let next = v.add_constant(theta);
        let increment = next.l2_distance(&u)?;
        if !(increment.is_finite() && next.is_finite()) {
            return Err(Error::NonFinite { iteration });
        }
        increments.push(increment);
        u = next;
        if increment < config.tolerance {
            let residual_inf = traveling_residual(&u, params, f)?;
            return Ok(SolveOutcome {
                profile: u,
                iterations: iteration,
                final_increment: increment,
                residual_inf,
                mean_theta: theta,
                increments,
            });
        }
    }
    Err(Error::NotConverged { iterations: config.max_iterations, last_increment: increments.last().copied().unwrap_or(f64::NAN) })
}

/// `‖Λ^α u − f(u) − cu − a‖_∞` at the collocation nodes.
pub fn traveling_residual(profile: &WaveProfile, params: &WaveParameters, f: &Nonlinearity) -> Result<f64> {
    let lu = apply_fractional_laplacian(profile, params.alpha)?;
    let (c, a) = (params.c, params.a);
    Ok(lu.values().iter().zip(profile.values()).fold(0.0, |m, (l, &u)| m.max((l - f.value(u) - c * u - a).abs())))
}

/// Root `θ` of `mean(f(v + θ)) + cθ + a = 0` for a zero-mean `v`.
///
/// For `f = u²` this is `θ = ½(−c ± √(c² − 4(a + mean(v²))))`. Other
/// nonlinearities are bracketed by a scan around `−c/2` and refined by
/// safeguarded Newton; `Plus` takes the largest bracketed root and `Minus`
/// the smallest.
pub fn mean_component_root(v: &WaveProfile, c: f64, a: f64, f: &Nonlinearity, sign: RootSign) -> Result<f64> {
    mean_component_root_near(v, c, a, f, sign, -0.5 * c)
}

fn mean_component_root_near(v: &WaveProfile, c: f64, a: f64, f: &Nonlinearity, sign: RootSign, center: f64) -> Result<f64> {
    if matches!(f, Nonlinearity::Quadratic) {
        let mean_square = trapezoid_integral(&v.map(|x| x * x)) / v.period();
        let disc = c * c - 4.0 * (a + mean_square);
        let scale = c * c + 4.0 * (a.abs() + mean_square);
        let disc = if disc < 0.0 && disc > -1e-13 * scale { 0.0 } else { disc };
        if disc < 0.0 {
            return Err(Error::NoRealRoot { discriminant: disc });
        }
        let root = disc.sqrt();
        return Ok(match sign {
            RootSign::Plus => 0.5 * (-c + root),
            RootSign::Minus => 0.5 * (-c - root),
        });
    }
    general_root(v, c, a, f, sign, center)
}

const SCAN_POINTS: usize = 400;
const SCAN_WIDENINGS: usize = 8;

fn general_root(v: &WaveProfile, c: f64, a: f64, f: &Nonlinearity, sign: RootSign, center: f64) -> Result<f64> {
    let period = v.period();
    let g = |theta: f64| trapezoid_integral(&v.map(|x| f.value(x + theta))) / period + c * theta + a;
    let dg = |theta: f64| trapezoid_integral(&v.map(|x| f.derivative(x + theta))) / period + c;

    let center = if center.is_finite() { center } else { -0.5 * c };
    let mut radius = 2.0 * (1f64.max(c.abs()).max(a.abs().sqrt()).max(v.max_abs()).max(center.abs()));
    for _ in 0..SCAN_WIDENINGS {
        let step = 2.0 * radius / SCAN_POINTS as f64;
        let samples: Vec<(f64, f64)> = (0..=SCAN_POINTS)
            .map(|i| {
                let t = center - radius + step * i as f64;
                (t, g(t))
            })
            .collect();
        let mut brackets = samples.windows(2).filter_map(|w| {
            let ((t0, g0), (t1, g1)) = (w[0], w[1]);
            if g0 == 0.0 {
                Some((t0, t0))
            } else if g0.signum() != g1.signum() && g1 != 0.0 {
                Some((t0, t1))
            } else {
                None
            }
        });
        let chosen = match sign {
            RootSign::Plus => brackets.next_back(),
            RootSign::Minus => brackets.next(),
        };
        if let Some((lo, hi)) = chosen {
            return Ok(refine_root(g, dg, lo, hi));
        }
        if samples.last().is_some_and(|&(t, gt)| gt == 0.0 && t.is_finite()) {
            return Ok(samples.last().unwrap().0);
        }
        radius *= 4.0;
    }
    Err(Error::NoBracket { center })
}

/// Newton inside `[lo, hi]`, falling back to bisection whenever a step
/// leaves the bracket.
fn refine_root(g: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    let mut g_lo = g(lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if gx.signum() == g_lo.signum() {
            lo = x;
            g_lo = gx;
        } else {
            hi = x;
        }
        let d = dg(x);
        let newton = x - gx / d;
        let next = if d != 0.0 && newton > lo.min(hi) && newton < lo.max(hi) { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}
