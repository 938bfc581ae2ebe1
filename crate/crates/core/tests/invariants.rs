//! Cross-stage invariants on a reconstructed q1 problem: system residual
//! identities, Gelfand-Levitan residual, stability under data perturbation
//! and truncation-size insensitivity.

use std::f64::consts::PI;
use std::sync::OnceLock;

use weylrec::direct::{robin_spectrum, second_spectrum};
use weylrec::gelfand_levitan::{
    assemble_coefficients, eval_f_kernel, eval_g_kernel, extract_q_with, solve_beta, DiffMethod,
};
use weylrec::pipeline::adapters::adapt_two_spectra;
use weylrec::potential::PotentialSpec;
use weylrec::spectral::{
    delta0_m, delta_m, find_eigenvalues, norming_constants, shift_spectrum, SpectralData,
};
use weylrec::value::ExtendedComplex;
use weylrec::weyl_system::{auto_truncate, NSBFHead, WeylSample};

struct Fixture {
    samples: Vec<WeylSample>,
    head: NSBFHead,
    shifted: SpectralData,
}

fn q1_head() -> &'static Fixture {
    static FIX: OnceLock<Fixture> = OnceLock::new();
    FIX.get_or_init(|| {
        let spec = PotentialSpec::catalog("q1", 1.0, 2.0).unwrap();
        let lambdas = robin_spectrum(&spec, 16).unwrap();
        let nus = second_spectrum(&spec, 16).unwrap();
        let samples = adapt_two_spectra(&lambdas, &nus).unwrap();
        let head = auto_truncate(&samples).unwrap();
        let lam = find_eigenvalues(&head, 3000).unwrap();
        let alphas = norming_constants(&head, &lam).unwrap();
        let data = SpectralData {
            lambdas: lam,
            alphas,
            omega: head.omega,
            omega2: head.omega2,
            shift: 0.0,
        };
        let shifted = shift_spectrum(&data);
        Fixture {
            samples,
            head,
            shifted,
        }
    })
}

/// |M_k Delta_M(rho_k) + Delta0_M(rho_k)| is bounded by the solved system's
/// residual for every finite-value sample.
#[test]
fn system_residual_identity() {
    let fix = q1_head();
    let bound = 10.0 * fix.head.residual_norm.max(1e-14);
    for s in &fix.samples {
        if let ExtendedComplex::Finite(m) = s.m {
            let rho = s.rho.re;
            let resid = m.re * delta_m(&fix.head, rho) + delta0_m(&fix.head, rho);
            assert!(
                resid.abs() <= bound,
                "residual {resid:.3e} vs bound {bound:.3e} at z = {}",
                s.z.re
            );
        }
    }
}

/// The recovered constant omega matches h + H + (1/2) int q, with the
/// integral from the adaptive quadrature of the known potential.
#[test]
fn omega_matches_quadrature() {
    let fix = q1_head();
    let spec = PotentialSpec::catalog("q1", 1.0, 2.0).unwrap();
    let exact = spec.omega();
    assert!(
        (fix.head.omega - exact).abs() <= 1e-6,
        "omega {} vs {}",
        fix.head.omega,
        exact
    );
    assert!((fix.head.omega2 - (exact - 1.0)).abs() <= 1e-6);
}

/// Recovered |h_n| trends downward for the smooth potential.
#[test]
fn coefficient_decay_trend() {
    let fix = q1_head();
    let hs = &fix.head.h_coeffs;
    let logs: Vec<(f64, f64)> = hs
        .iter()
        .enumerate()
        .skip(4)
        .filter(|(_, h)| h.abs() > 1e-15)
        .map(|(n, h)| (n as f64, h.abs().ln()))
        .collect();
    // Least-squares slope of log|h_n| over n in [4, M].
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!(slope < 0.0, "log|h_n| slope = {slope:.3}");
}

/// Consecutive recovered rho_k spacing approaches 1.
#[test]
fn eigenvalue_spacing_asymptotics() {
    let fix = q1_head();
    let rhos: Vec<f64> = fix.shifted.lambdas.iter().map(|l| l.max(0.0).sqrt()).collect();
    for k in 5..60 {
        let gap = rhos[k + 1] - rhos[k];
        assert!(
            (gap - 1.0).abs() <= 0.5,
            "rho gap {gap:.3} at k = {k}"
        );
    }
}

/// Doubling the series truncation changes the assembled coefficients only
/// marginally (convergence monitor).
#[test]
fn coefficient_series_truncation_converges() {
    let fix = q1_head();
    let half = assemble_coefficients(&fix.shifted, PI / 2.0, 8, 1500).unwrap();
    let full = assemble_coefficients(&fix.shifted, PI / 2.0, 8, 2999).unwrap();
    let d_half = half.d[0];
    let d_full = full.d[0];
    assert!(
        (d_half - d_full).abs() <= 1e-3 * d_full.abs().max(1e-9),
        "d_0 moved from {d_half:.6e} to {d_full:.6e}"
    );
    for (a, b) in half.c.iter().zip(full.c.iter()) {
        assert!((a - b).abs() <= 1e-3 * b.abs().max(1e-6));
    }
}

/// The Gelfand-Levitan equation G + F + int F G = 0 holds to a coarse
/// tolerance for the reconstructed kernel.
#[test]
fn gelfand_levitan_residual() {
    let fix = q1_head();
    let grid: Vec<f64> = (1..=100).map(|l| l as f64 * PI / 100.0).collect();
    let sol = solve_beta(&fix.shifted, &grid, 8, 2999).unwrap();
    for &(xi, ti) in &[(60usize, 0.9_f64), (80, 1.5), (40, 0.7)] {
        let x = sol.grid[xi];
        let t = ti;
        let g = eval_g_kernel(&sol, x, t).unwrap();
        let f = eval_f_kernel(&fix.shifted, x, t, 2000).unwrap().accelerated;
        // Quadrature of int_0^x F(t, s) G(x, s) ds by composite Simpson.
        let n = 180;
        let h = x / n as f64;
        let mut integral = 0.0;
        for i in 0..=n {
            let s = (i as f64 * h).min(x * (1.0 - 1e-12));
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let fs = eval_f_kernel(&fix.shifted, t, s, 2000).unwrap().accelerated;
            let gs = if s == 0.0 {
                eval_g_kernel(&sol, x, 1e-9).unwrap()
            } else {
                eval_g_kernel(&sol, x, s).unwrap()
            };
            integral += w * fs * gs;
        }
        integral *= h / 3.0;
        let resid = g + f + integral;
        assert!(
            resid.abs() <= 1e-2,
            "GL residual {resid:.3e} at (x, t) = ({x:.3}, {t:.3})"
        );
    }
}

/// A 1e-6 relative perturbation of one norming constant moves beta_0 by no
/// more than 1e-4 uniformly.
#[test]
fn stability_under_spectral_perturbation() {
    let fix = q1_head();
    let grid: Vec<f64> = (1..=40).map(|l| l as f64 * PI / 40.0).collect();
    let base = solve_beta(&fix.shifted, &grid, 8, 2999).unwrap();
    let mut perturbed = fix.shifted.clone();
    perturbed.alphas[5] *= 1.0 + 1e-6;
    let moved = solve_beta(&perturbed, &grid, 8, 2999).unwrap();
    for (a, b) in base.beta0.iter().zip(moved.beta0.iter()) {
        assert!((a - b).abs() <= 1e-4, "beta_0 moved by {:.3e}", (a - b).abs());
    }
}

/// N = 8 and N = 12 agree on beta_0 for smooth data.
#[test]
fn truncation_size_insensitivity() {
    let fix = q1_head();
    let grid: Vec<f64> = (1..=40).map(|l| l as f64 * PI / 40.0).collect();
    let n8 = solve_beta(&fix.shifted, &grid, 8, 2999).unwrap();
    let n12 = solve_beta(&fix.shifted, &grid, 12, 2999).unwrap();
    for (a, b) in n8.beta0.iter().zip(n12.beta0.iter()) {
        assert!((a - b).abs() <= 1e-6, "beta_0 moved by {:.3e}", (a - b).abs());
    }
}

/// Grid refinement does not change the recovered potential beyond the
/// reconstruction error itself.
#[test]
fn grid_refinement_stability() {
    let fix = q1_head();
    let spec = PotentialSpec::catalog("q1", 1.0, 2.0).unwrap();
    let mut l1 = Vec::new();
    for size in [50usize, 100] {
        let grid: Vec<f64> = (1..=size).map(|l| l as f64 * PI / size as f64).collect();
        let sol = solve_beta(&fix.shifted, &grid, 8, 2999).unwrap();
        let (q, _) = extract_q_with(&sol, DiffMethod::LegendreFit { degree: 30 }).unwrap();
        let shift = fix.shifted.shift;
        let err: f64 = sol
            .grid
            .iter()
            .zip(q.iter())
            .map(|(&x, &v)| (v + shift - spec.q(x)).abs())
            .sum::<f64>()
            * PI
            / size as f64;
        l1.push(err);
    }
    assert!(
        (l1[0] - l1[1]).abs() <= l1[0].max(l1[1]),
        "L1 errors {l1:?} differ by more than themselves"
    );
}
