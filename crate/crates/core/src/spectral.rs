//! Half-period cosine collocation for even periodic profiles.
//!
//! A profile of period `T` is stored on the `N + 1` nodes `x_j = jT/(2N)`
//! covering `[0, T/2]`, together with its cosine coefficients
//!
//! ```text
//! u(x) = Σ_{k=0..N} û_k cos(2πkx/T)
//! ```
//!
//! The two representations are related by a type-I discrete cosine
//! transform with half-weighted endpoints. Evenness is structural: there is
//! no sine component anywhere in this module.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rustdct::{Dct1, DctPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower end of the accepted dispersion exponent range (exclusive).
pub const ALPHA_MIN: f64 = -1.0;
/// Upper end of the accepted dispersion exponent range (inclusive).
pub const ALPHA_MAX: f64 = 2.0;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > ALPHA_MIN && alpha <= ALPHA_MAX {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// Uniform collocation grid on the half period `[0, T/2]`.
#[derive(Clone)]
pub struct PeriodicGrid {
    period: f64,
    modes: usize,
    dct: Arc<dyn Dct1<f64>>,
    dealias_dct: Arc<dyn Dct1<f64>>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid").field("period", &self.period).field("modes", &self.modes).finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.period == other.period && self.modes == other.modes
    }
}

impl PeriodicGrid {
    pub const MIN_MODES: usize = 8;

    pub fn new(period: f64, modes: usize) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!("period must be positive, got {period}")));
        }
        if modes < Self::MIN_MODES || !modes.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("mode count must be a power of two >= {}, got {modes}", Self::MIN_MODES)));
        }
        let mut planner = DctPlanner::new();
        Ok(Self { period, modes, dct: planner.plan_dct1(modes + 1), dealias_dct: planner.plan_dct1(Self::dealias_modes(modes) + 1) })
    }

    /// Same mode count and transform plans, different period.
    pub fn with_period(&self, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!("period must be positive, got {period}")));
        }
        Ok(Self { period, ..self.clone() })
    }

    fn dealias_modes(modes: usize) -> usize {
        3 * modes / 2
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Number of collocation nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.modes + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// κ = 2π/T.
    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Ω = 1/T.
    pub fn frequency(&self) -> f64 {
        1.0 / self.period
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.period / (2.0 * self.modes as f64)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.node(j)).collect()
    }

    /// Symbol of Λ^α on mode `k`: (2πk/T)^α, and 0 on the mean mode for every α.
    pub fn symbol(&self, k: usize, alpha: f64) -> f64 {
        if k == 0 {
            0.0
        } else {
            (self.wave_number() * k as f64).powf(alpha)
        }
    }

    fn forward_with(dct: &dyn Dct1<f64>, values: &[f64]) -> Vec<f64> {
        let n = values.len() - 1;
        let mut buf = values.to_vec();
        dct.process_dct1(&mut buf);
        let scale = 2.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf[0] *= 0.5;
        buf[n] *= 0.5;
        buf
    }

    fn inverse_with(dct: &dyn Dct1<f64>, coefficients: &[f64]) -> Vec<f64> {
        let n = coefficients.len() - 1;
        let mut buf = coefficients.to_vec();
        buf[0] *= 2.0;
        buf[n] *= 2.0;
        dct.process_dct1(&mut buf);
        buf
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.len(), actual: len })
        }
    }
}

/// Nodal values to cosine coefficients (DCT-I with half-weighted endpoints).
pub fn to_coefficients(grid: &PeriodicGrid, values: &[f64]) -> Result<Vec<f64>> {
    grid.check_len(values.len())?;
    Ok(PeriodicGrid::forward_with(grid.dct.as_ref(), values))
}

/// Cosine coefficients to nodal values; exact inverse of [`to_coefficients`].
pub fn from_coefficients(grid: &PeriodicGrid, coefficients: &[f64]) -> Result<Vec<f64>> {
    grid.check_len(coefficients.len())?;
    Ok(PeriodicGrid::inverse_with(grid.dct.as_ref(), coefficients))
}

/// Even, `T`-periodic profile held both as cosine coefficients and nodal values.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveProfile {
    grid: PeriodicGrid,
    coefficients: Vec<f64>,
    values: Vec<f64>,
}

impl WaveProfile {
    pub fn from_values(grid: &PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        let coefficients = to_coefficients(grid, &values)?;
        Ok(Self { grid: grid.clone(), coefficients, values })
    }

    pub fn from_coefficients(grid: &PeriodicGrid, coefficients: Vec<f64>) -> Result<Self> {
        let values = from_coefficients(grid, &coefficients)?;
        Ok(Self { grid: grid.clone(), coefficients, values })
    }

    /// Samples `f` at the collocation nodes.
    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::from_values(grid, values).expect("node count matches grid")
    }

    pub fn constant(grid: &PeriodicGrid, value: f64) -> Self {
        let mut coefficients = vec![0.0; grid.len()];
        coefficients[0] = value;
        Self { grid: grid.clone(), coefficients, values: vec![value; grid.len()] }
    }

    /// `amplitude · cos(2πkx/T)`.
    pub fn cosine_mode(grid: &PeriodicGrid, k: usize, amplitude: f64) -> Result<Self> {
        if k > grid.modes() {
            return Err(Error::InvalidGrid(format!("mode {k} exceeds N = {}", grid.modes())));
        }
        let mut coefficients = vec![0.0; grid.len()];
        coefficients[k] = amplitude;
        Self::from_coefficients(grid, coefficients)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn period(&self) -> f64 {
        self.grid.period()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise map at the nodes.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self.values.iter().map(|&u| f(u)).collect();
        Self::from_values(&self.grid, values).expect("same grid")
    }

    /// Pointwise map evaluated on a 3/2-refined grid and truncated back,
    /// removing the aliasing error of quadratic nonlinearities.
    pub fn dealiased_map(&self, f: impl Fn(f64) -> f64) -> Self {
        let fine_modes = PeriodicGrid::dealias_modes(self.grid.modes());
        let mut padded = self.coefficients.clone();
        padded.resize(fine_modes + 1, 0.0);
        let fine = PeriodicGrid::inverse_with(self.grid.dealias_dct.as_ref(), &padded);
        let mapped: Vec<f64> = fine.into_iter().map(f).collect();
        let mut coefficients = PeriodicGrid::forward_with(self.grid.dealias_dct.as_ref(), &mapped);
        coefficients.truncate(self.grid.len());
        Self::from_coefficients(&self.grid, coefficients).expect("same grid")
    }

    /// Nodewise combination of two profiles on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::from_values(&self.grid, values)
    }

    /// Mean value over one period, the k = 0 coefficient.
    pub fn mean(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn integral(&self) -> f64 {
        trapezoid_integral(self)
    }

    pub fn add_constant(&self, s: f64) -> Self {
        let mut coefficients = self.coefficients.clone();
        coefficients[0] += s;
        let values = self.values.iter().map(|u| u + s).collect();
        Self { grid: self.grid.clone(), coefficients, values }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            coefficients: self.coefficients.iter().map(|c| c * s).collect(),
            values: self.values.iter().map(|u| u * s).collect(),
        }
    }

    /// Zero-mean part.
    pub fn fluctuation(&self) -> Self {
        self.add_constant(-self.mean())
    }

    /// `u(x + T/2)`, the other even representative of the same wave.
    pub fn half_period_shift(&self) -> Self {
        let coefficients = self.coefficients.iter().enumerate().map(|(k, &c)| if k % 2 == 0 { c } else { -c }).collect();
        let mut values = self.values.clone();
        values.reverse();
        Self { grid: self.grid.clone(), coefficients, values }
    }

    /// Same coefficients on another grid with the same mode count (the profile
    /// is rescaled in `x`), or zero-padded / truncated when the mode count differs.
    pub fn regrid(&self, grid: &PeriodicGrid) -> Self {
        let mut coefficients = self.coefficients.clone();
        coefficients.resize(grid.len(), 0.0);
        Self::from_coefficients(grid, coefficients).expect("length set to grid")
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, u| m.max(u.abs()))
    }

    /// Crest-to-trough height.
    pub fn height(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|u| u.is_finite())
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::InvalidGrid(format!("profiles live on different grids ({:?} vs {:?})", self.grid, other.grid)))
        }
    }

    /// Maximum nodal difference.
    pub fn distance_inf(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Maximum nodal difference modulo the half-period translation, i.e. the
    /// distance between the two waves as unpositioned shapes.
    pub fn translate_distance_inf(&self, other: &Self) -> Result<f64> {
        let direct = self.distance_inf(other)?;
        let shifted = self.half_period_shift().distance_inf(other)?;
        Ok(direct.min(shifted))
    }

    /// `(∫₀^T (u − v)² dx)^{1/2}` by the trapezoid rule.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        let diff = self.zip_with(other, |a, b| (a - b) * (a - b))?;
        Ok(trapezoid_integral(&diff).max(0.0).sqrt())
    }

    pub fn to_json(&self) -> ProfileJson {
        ProfileJson { period: self.period(), modes: self.grid.modes(), coefficients: self.coefficients.clone() }
    }

    pub fn from_json(json: &ProfileJson) -> Result<Self> {
        let grid = PeriodicGrid::new(json.period, json.modes)?;
        Self::from_coefficients(&grid, json.coefficients.clone())
    }

    /// CSV with header `x,u`, one row per node.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "x,u")?;
        for (x, u) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(out, "{x:e},{u:e}")?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`WaveProfile::write_csv`]; the period is
    /// recovered from the last node, `x_N = T/2`.
    pub fn read_csv(input: impl BufRead) -> Result<Self> {
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('x')) {
                continue;
            }
            let (x, u) = line.split_once(',').ok_or_else(|| Error::Parse(format!("line {}: expected `x,u`", lineno + 1)))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)));
            xs.push(parse(x)?);
            us.push(parse(u)?);
        }
        let modes = xs.len().saturating_sub(1);
        let period = 2.0 * xs.last().copied().unwrap_or(0.0);
        let grid = PeriodicGrid::new(period, modes)?;
        Self::from_values(&grid, us)
    }
}

/// JSON form of a profile: `{T, N, coefficients[]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileJson {
    #[serde(rename = "T")]
    pub period: f64,
    #[serde(rename = "N")]
    pub modes: usize,
    pub coefficients: Vec<f64>,
}

fn apply_symbol(profile: &WaveProfile, symbol: impl Fn(usize) -> f64) -> WaveProfile {
    let coefficients = profile.coefficients.iter().enumerate().map(|(k, c)| c * symbol(k)).collect();
    WaveProfile::from_coefficients(&profile.grid, coefficients).expect("same grid")
}

/// Λ^α: û_k ↦ (2πk/T)^α û_k, with the mean mode sent to zero.
pub fn apply_fractional_laplacian(profile: &WaveProfile, alpha: f64) -> Result<WaveProfile> {
    check_alpha(alpha)?;
    let grid = profile.grid();
    Ok(apply_symbol(profile, |k| grid.symbol(k, alpha)))
}

/// Moore-Penrose pseudo-inverse of Λ^α: û_k ↦ (2πk/T)^{-α} û_k for k ≥ 1, û_0 ↦ 0.
pub fn apply_pseudo_inverse(profile: &WaveProfile, alpha: f64) -> Result<WaveProfile> {
    check_alpha(alpha)?;
    let grid = profile.grid();
    Ok(apply_symbol(profile, |k| if k == 0 { 0.0 } else { 1.0 / grid.symbol(k, alpha) }))
}

/// ∫₀^T u dx: twice the half-period trapezoid rule with half-weighted endpoints.
pub fn trapezoid_integral(profile: &WaveProfile) -> f64 {
    let v = profile.values();
    let n = v.len() - 1;
    let interior: f64 = v[1..n].iter().sum();
    let half_sum = interior + 0.5 * (v[0] + v[n]);
    profile.period() / profile.grid().modes() as f64 * half_sum
}
