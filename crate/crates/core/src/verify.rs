//! Benchmark suite run by `fracwave verify`: each benchmark compares the
//! library against an independent oracle and reports the measured error.

use std::f64::consts::PI;

use crate::elliptic::{complete_elliptic_k, jacobi_cn, jacobi_sn_cn_dn, EllipticModulus};
use crate::error::Result;
use crate::functionals::{evaluate_functionals, identity_scale, integral_identity_residuals};
use crate::nonlinearity::Nonlinearity;
use crate::pipeline::{analyze, AnalysisOptions};
use crate::reference::{bo_dispersion_matrix, bo_functionals, bo_galilean_shift, bo_wave, cnoidal_wave, CnoidalExperiment, WaveParameters};
use crate::sensitivity::gram_determinant;
use crate::solver::{petviashvili_solve, SolverConfig};
use crate::spectral::{apply_fractional_laplacian, PeriodicGrid, WaveProfile};
use crate::stability::{cubic_coefficients, eigenvalues3, quadratic_inner_products, stability_report, InnerProductRecord, MatrixRoute};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkResult {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

pub struct Benchmark {
    pub name: &'static str,
    pub description: &'static str,
    run: fn() -> Result<(f64, String)>,
    threshold: f64,
}

impl Benchmark {
    pub fn run(&self) -> BenchmarkResult {
        match (self.run)() {
            Ok((measured, detail)) => BenchmarkResult {
                name: self.name,
                measured,
                threshold: self.threshold,
                passed: measured.is_finite() && measured <= self.threshold,
                detail,
            },
            Err(e) => {
                BenchmarkResult { name: self.name, measured: f64::NAN, threshold: self.threshold, passed: false, detail: e.to_string() }
            }
        }
    }
}

pub fn benchmarks() -> Vec<Benchmark> {
    vec![
        Benchmark {
            name: "spectral_exactness",
            description: "fractional Laplacian on single cosine modes vs (2πk/T)^α",
            run: spectral_exactness,
            threshold: 1e-12,
        },
        Benchmark {
            name: "elliptic_identities",
            description: "K(√2/2) reference value, cn(K) = 0, sn² + cn² = 1",
            run: elliptic_identities,
            threshold: 1e-12,
        },
        Benchmark {
            name: "cnoidal_experiment_1",
            description: "solve at (2, −2, −2, 2K(√2/2)) vs 1 + 3cn²",
            run: || cnoidal(CnoidalExperiment::One),
            threshold: 1e-10,
        },
        Benchmark {
            name: "cnoidal_experiment_2",
            description: "solve at (2, 8/3, −5/3, 2K(√6/6)) vs cn²",
            run: || cnoidal(CnoidalExperiment::Two),
            threshold: 1e-10,
        },
        Benchmark {
            name: "bo_reproduction",
            description: "solve at (1, −5, 0, π/2) vs the closed-form Benjamin-Ono wave",
            run: bo_reproduction,
            threshold: 1e-10,
        },
        Benchmark {
            name: "bo_analytic_matrix",
            description: "closed-form BO pairings vs the analytic matrix and its eigenvalues",
            run: bo_analytic_matrix,
            threshold: 1e-10,
        },
        Benchmark {
            name: "integral_identities",
            description: "2P + cM + aT and 2K + 3U − 2cP − aM on converged solves (scaled)",
            run: integral_identities,
            threshold: 1e-8,
        },
        Benchmark {
            name: "mc_pa_symmetry",
            description: "finite-difference M_c = P_a on the BO wave",
            run: mc_pa_symmetry,
            threshold: 1e-5,
        },
        Benchmark {
            name: "galilean_covariance",
            description: "solve at the shifted (c, a) equals the base solve plus s",
            run: galilean_covariance,
            threshold: 1e-8,
        },
        Benchmark {
            name: "scaling_covariance",
            description: "solve at (λc, λ²a, T/λ) equals λu(λx), λ = 2",
            run: scaling_covariance,
            threshold: 1e-8,
        },
        Benchmark {
            name: "sum_identity",
            description: "⟨w1,L1v1⟩ + ⟨w3,L1v3⟩ = (1−α)({M,U} − cG) on the KdV pipeline (relative)",
            run: sum_identity,
            threshold: 1e-9,
        },
        Benchmark {
            name: "trace_consistency",
            description: "tr(D)·G² = D2 on the KdV pipeline (relative)",
            run: trace_consistency,
            threshold: 1e-8,
        },
        Benchmark {
            name: "kdv_eigenvalues",
            description: "Experiment 1 pipeline eigenvalues vs {31.64, 14.08, −9.016} (relative)",
            run: kdv_eigenvalues,
            threshold: 0.02,
        },
        Benchmark {
            name: "bo_pipeline_eigenvalues",
            description: "BO pipeline eigenvalues vs {5.755, 4.935, −5.755} (absolute)",
            run: bo_pipeline_eigenvalues,
            threshold: 1e-3,
        },
    ]
}

pub fn run_all() -> Vec<BenchmarkResult> {
    benchmarks().iter().map(Benchmark::run).collect()
}

fn bo_params() -> WaveParameters {
    WaveParameters { alpha: 1.0, c: -5.0, a: 0.0, period: PI / 2.0 }
}

fn spectral_exactness() -> Result<(f64, String)> {
    let grid = PeriodicGrid::new(2.0 * PI, 64)?;
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        for k in [1, 2, 7, 31, 64] {
            let mode = WaveProfile::cosine_mode(&grid, k, 1.0)?;
            let image = apply_fractional_laplacian(&mode, alpha)?;
            let expected = mode.scaled((k as f64).powf(alpha));
            let scale = (k as f64).powf(alpha);
            worst = worst.max(image.distance_inf(&expected)? / scale);
        }
    }
    Ok((worst, "relative, α ∈ {0.5, 1, 1.5, 2}, k ≤ N".into()))
}

fn elliptic_identities() -> Result<(f64, String)> {
    let k = 0.5f64.sqrt();
    let modulus = EllipticModulus::new(k)?;
    let quarter = complete_elliptic_k(k)?;
    let mut worst = (quarter - 1.854_074_677_301_372).abs();
    worst = worst.max(jacobi_cn(quarter, k)?.abs());
    for i in 0..100 {
        let (sn, cn, _) = jacobi_sn_cn_dn(-5.0 + 0.1 * i as f64, modulus);
        worst = worst.max((sn * sn + cn * cn - 1.0).abs());
    }
    Ok((worst, "k = √2/2".into()))
}

fn cnoidal(exp: CnoidalExperiment) -> Result<(f64, String)> {
    let out = petviashvili_solve(&exp.parameters(), &Nonlinearity::Quadratic, &SolverConfig::default(), None)?;
    let (_, oracle) = cnoidal_wave(exp, out.profile.grid())?;
    let err = out.profile.translate_distance_inf(&oracle)?;
    Ok((err, format!("{} iterations", out.iterations)))
}

fn bo_reproduction() -> Result<(f64, String)> {
    let params = bo_params();
    let q = Nonlinearity::Quadratic;
    let out = petviashvili_solve(&params, &q, &SolverConfig::default(), None)?;
    let oracle = bo_wave(&params, out.profile.grid())?;
    let err = out.profile.translate_distance_inf(&oracle)?;
    let f = evaluate_functionals(&out.profile, &params, &q)?;
    let rel_m = (f.mass - 2.0 * PI).abs() / (2.0 * PI);
    let rel_p = (f.momentum - 5.0 * PI).abs() / (5.0 * PI);
    // the functionals must also meet their own 1e−8 bound
    let measured = if rel_m.max(rel_p) <= 1e-8 { err } else { f64::INFINITY };
    Ok((measured, format!("M rel {rel_m:.1e}, P rel {rel_p:.1e}")))
}

fn bo_analytic_matrix() -> Result<(f64, String)> {
    let params = bo_params();
    let closed = bo_functionals(&params)?;
    let report = stability_report(&params, &closed.functionals, &closed.sensitivities, MatrixRoute::Quadratic)?;
    let (exact, eig) = bo_dispersion_matrix(params.c, params.period)?;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((report.matrix.get(i, j) - exact.get(i, j)).abs());
        }
    }
    for (z, e) in eigenvalues3(&exact).iter().zip(eig) {
        worst = worst.max((z.re - e).abs()).max(z.im.abs());
    }
    Ok((worst, format!("verdict {}", report.verdict)))
}

fn integral_identities() -> Result<(f64, String)> {
    let q = Nonlinearity::Quadratic;
    let mut worst: f64 = 0.0;
    for params in [bo_params(), CnoidalExperiment::One.parameters(), CnoidalExperiment::Two.parameters()] {
        let out = petviashvili_solve(&params, &q, &SolverConfig::default(), None)?;
        let f = evaluate_functionals(&out.profile, &params, &q)?;
        let r = integral_identity_residuals(&f, &params, None);
        worst = worst.max(r.max_abs() / identity_scale(&params));
    }
    Ok((worst, "BO, Experiments 1 and 2".into()))
}

fn mc_pa_symmetry() -> Result<(f64, String)> {
    // the BO mass does not depend on c at a = 0, so use a shifted BO wave as well
    let cases = [CnoidalExperiment::One.parameters(), bo_params().with_a(1.0)];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for params in cases {
        let a = analyze(&params, &Nonlinearity::Quadratic, &AnalysisOptions::default(), None)?;
        let s = a.sensitivity.record;
        worst = worst.max(s.symmetry_defect());
        detail.push(format!("M_c = {:.6e}, P_a = {:.6e}", s.m_c, s.p_a));
    }
    Ok((worst, detail.join("; ")))
}

fn galilean_covariance() -> Result<(f64, String)> {
    let q = Nonlinearity::Quadratic;
    let config = SolverConfig::default();
    let base = petviashvili_solve(&bo_params(), &q, &config, None)?;
    let s = 1.0;
    let (c, a) = bo_galilean_shift(-5.0, 0.0, s);
    let shifted = petviashvili_solve(&bo_params().with_c(c).with_a(a), &q, &config, None)?;
    let err = shifted.profile.translate_distance_inf(&base.profile.add_constant(s))?;
    Ok((err, format!("s = {s}: (c, a) = ({c}, {a})")))
}

fn scaling_covariance() -> Result<(f64, String)> {
    let q = Nonlinearity::Quadratic;
    let config = SolverConfig::default();
    let lambda: f64 = 2.0;
    let base_params = bo_params();
    let base = petviashvili_solve(&base_params, &q, &config, None)?;
    let alpha = base_params.alpha;
    let scaled_params = WaveParameters {
        c: lambda.powf(alpha) * base_params.c,
        a: lambda.powf(2.0 * alpha) * base_params.a,
        period: base_params.period / lambda,
        ..base_params
    };
    let scaled = petviashvili_solve(&scaled_params, &q, &config, None)?;
    let factor = lambda.powf(alpha);
    let expected = WaveProfile::from_values(scaled.profile.grid(), base.profile.values().iter().map(|u| factor * u).collect())?;
    Ok((scaled.profile.translate_distance_inf(&expected)?, "λ = 2 on the BO wave".into()))
}

/// Relative defect of `⟨w1,L1v1⟩ + ⟨w3,L1v3⟩ = (1−α)({M,U} − cG)`.
pub fn sum_identity_defect(record: &InnerProductRecord, alpha: f64, c: f64, gram: f64, mass_potential: f64) -> f64 {
    let sum = record.w1_l1_v1 + record.w3_l1_v3;
    let expected = (1.0 - alpha) * (mass_potential - c * gram);
    (sum - expected).abs() / expected.abs().max(sum.abs()).max(f64::MIN_POSITIVE)
}

/// Relative defect of `tr(D)·G² = D2`.
pub fn trace_defect(record: &InnerProductRecord, alpha: f64, c: f64, gram: f64, mass_potential: f64) -> f64 {
    let matrix = crate::stability::dispersion_matrix(record, gram);
    let cubic = cubic_coefficients(alpha, c, record, gram, mass_potential);
    (matrix.trace() * gram * gram - cubic.d2).abs() / cubic.d2.abs().max(f64::MIN_POSITIVE)
}

fn kdv_record() -> Result<(WaveParameters, InnerProductRecord, f64, f64)> {
    let params = CnoidalExperiment::One.parameters();
    let a = analyze(&params, &Nonlinearity::Quadratic, &AnalysisOptions::default(), None)?;
    let g = gram_determinant(&a.sensitivity.record)?;
    let record = quadratic_inner_products(params.alpha, &params, &a.sensitivity.functionals, &a.sensitivity.record, &g);
    Ok((params, record, g.gram, g.mass_potential))
}

fn sum_identity() -> Result<(f64, String)> {
    let (params, record, gram, mu) = kdv_record()?;
    Ok((sum_identity_defect(&record, params.alpha, params.c, gram, mu), "Experiment 1".into()))
}

fn trace_consistency() -> Result<(f64, String)> {
    let (params, record, gram, mu) = kdv_record()?;
    Ok((trace_defect(&record, params.alpha, params.c, gram, mu), "Experiment 1".into()))
}

fn kdv_eigenvalues() -> Result<(f64, String)> {
    let params = CnoidalExperiment::One.parameters();
    let a = analyze(&params, &Nonlinearity::Quadratic, &AnalysisOptions::default(), None)?;
    let eig = a.report.eigenvalues();
    let mut worst: f64 = 0.0;
    for (z, e) in eig.iter().zip([31.64, 14.08, -9.016]) {
        worst = worst.max((z - e).norm() / e.abs());
    }
    let measured = if a.report.verdict == crate::stability::Verdict::ModulationallyStable { worst } else { f64::INFINITY };
    Ok((measured, format!("{:.4}, {:.4}, {:.4}; {}", eig[0].re, eig[1].re, eig[2].re, a.report.verdict)))
}

fn bo_pipeline_eigenvalues() -> Result<(f64, String)> {
    let a = analyze(&bo_params(), &Nonlinearity::Quadratic, &AnalysisOptions::default(), None)?;
    let eig = a.report.eigenvalues();
    let mut worst: f64 = 0.0;
    for (z, e) in eig.iter().zip([5.755, 4.935, -5.755]) {
        worst = worst.max((z - e).norm());
    }
    Ok((worst, format!("{:.4}, {:.4}, {:.4}", eig[0].re, eig[1].re, eig[2].re)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let names: Vec<_> = benchmarks().iter().map(|b| b.name).collect();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
    }

    #[test]
    fn sign_flip_in_w22_is_caught() {
        let (params, mut record, gram, mu) = kdv_record().unwrap();
        assert!(trace_defect(&record, params.alpha, params.c, gram, mu) <= 1e-8);
        assert!(sum_identity_defect(&record, params.alpha, params.c, gram, mu) <= 1e-9);
        record.w2_l1_v2 = -record.w2_l1_v2;
        assert!(trace_defect(&record, params.alpha, params.c, gram, mu) > 1e-2);
    }

    #[test]
    fn cheap_benchmarks_pass() {
        for b in benchmarks().iter().filter(|b| ["spectral_exactness", "elliptic_identities", "bo_analytic_matrix"].contains(&b.name)) {
            let r = b.run();
            assert!(r.passed, "{}: {} ({})", r.name, r.measured, r.detail);
        }
    }
}
