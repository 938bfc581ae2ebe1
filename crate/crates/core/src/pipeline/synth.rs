//! Synthetic experiment loop: generate samples with the direct solver, run
//! the inverse method, and report errors against the known potential.

use num_complex::Complex64;

use crate::direct::{robin_spectrum, second_spectrum};
use crate::error::Result;
use crate::potential::PotentialSpec;
use crate::weyl_system::WeylSample;

use super::adapters::{
    adapt_partial_potential, adapt_two_spectra, adapt_variable_h, oracle_samples, RescaleRecord,
};
use super::{run_inverse, PotentialResult, SolverKnobs};

/// How the synthetic samples are drawn from the direct solver.
#[derive(Clone, Debug)]
pub enum SamplingPlan {
    /// `pairs` eigenvalues from each of the two spectra.
    TwoSpectra { pairs: usize },
    /// Index lists into the spectra of the problems with left constants
    /// `h_values` (one list per constant), encoded as data.
    SeveralSpectra {
        h_values: Vec<f64>,
        indices: Vec<Vec<usize>>,
    },
    /// Weyl values on the points z_n = (start + n step + i imag)^2.
    PointGrid {
        start: f64,
        step: f64,
        count: usize,
        imag: f64,
    },
    /// Potential known on [0, a]; `count` eigenvalues of the full problem
    /// with the listed indices missing.
    PartialPotential {
        a: f64,
        count: usize,
        missing: Vec<usize>,
    },
}

impl SamplingPlan {
    /// Three-spectra plan with the interleaving index pattern
    /// 0,1,3,4,6,7,... / 0,2,3,5,6,8,... / 1,2,4,5,7,8,...
    /// taking `per_spectrum` eigenvalues from each problem.
    pub fn three_spectra_interleaved(h_values: [f64; 3], per_spectrum: usize) -> Self {
        let patterns: [[usize; 2]; 3] = [[0, 1], [0, 2], [1, 2]];
        let indices = patterns
            .iter()
            .map(|pat| {
                let mut list = Vec::with_capacity(per_spectrum);
                let mut block = 0usize;
                while list.len() < per_spectrum {
                    for &off in pat {
                        if list.len() < per_spectrum {
                            list.push(3 * block + off);
                        }
                    }
                    block += 1;
                }
                list
            })
            .collect();
        SamplingPlan::SeveralSpectra {
            h_values: h_values.to_vec(),
            indices,
        }
    }
}

/// Errors of a synthetic reconstruction against the generating potential.
#[derive(Clone, Copy, Debug)]
pub struct ErrorReport {
    /// L1 norm of q_rec - q_true over the recovered grid (trapezoid rule).
    pub l1_q: f64,
    pub max_q: f64,
    /// None when the run cannot recover h (partial-potential reductions).
    pub h_err: Option<f64>,
    pub big_h_err: f64,
}

#[derive(Clone, Debug)]
pub struct SynthOutcome {
    pub samples: Vec<WeylSample>,
    pub result: PotentialResult,
    pub report: ErrorReport,
}

fn l1_and_max(grid: &[f64], q: &[f64], truth: impl Fn(f64) -> f64) -> (f64, f64) {
    let errs: Vec<f64> = grid
        .iter()
        .zip(q.iter())
        .map(|(&x, &v)| (v - truth(x)).abs())
        .collect();
    let mut l1 = 0.0;
    for i in 1..grid.len() {
        l1 += 0.5 * (errs[i] + errs[i - 1]) * (grid[i] - grid[i - 1]);
    }
    let max = errs.iter().cloned().fold(0.0, f64::max);
    (l1, max)
}

/// Generate samples per the plan, run the inverse method, and measure the
/// reconstruction errors.
pub fn run_synthetic(
    spec: &PotentialSpec,
    plan: &SamplingPlan,
    knobs: &SolverKnobs,
) -> Result<SynthOutcome> {
    let (samples, rescale): (Vec<WeylSample>, Option<RescaleRecord>) = match plan {
        SamplingPlan::TwoSpectra { pairs } => {
            let lambdas = robin_spectrum(spec, *pairs)?;
            let nus = second_spectrum(spec, *pairs)?;
            (adapt_two_spectra(&lambdas, &nus)?, None)
        }
        SamplingPlan::SeveralSpectra { h_values, indices } => {
            let mut pairs: Vec<(f64, f64)> = Vec::new();
            for (hv, idx) in h_values.iter().zip(indices.iter()) {
                let need = idx.iter().copied().max().unwrap_or(0) + 1;
                let spectrum = robin_spectrum(&spec.with_h(*hv), need)?;
                for &j in idx {
                    pairs.push((spectrum[j], *hv));
                }
            }
            // The m -> M conversion with reference constant 0 produces the
            // Weyl function of the problem with left constant 0; q and H
            // are unchanged but the recovered h must be compared to 0.
            (adapt_variable_h(&pairs, 0.0), None)
        }
        SamplingPlan::PointGrid {
            start,
            step,
            count,
            imag,
        } => {
            let zs: Vec<Complex64> = (0..*count)
                .map(|n| {
                    let base = Complex64::new(start + step * n as f64, *imag);
                    base * base
                })
                .collect();
            (oracle_samples(spec, &zs)?, None)
        }
        SamplingPlan::PartialPotential { a, count, missing } => {
            let spectrum = robin_spectrum(spec, *count)?;
            let pairs: Vec<(f64, f64)> = spectrum
                .iter()
                .enumerate()
                .filter(|(i, _)| !missing.contains(i))
                .map(|(_, &l)| (l, spec.h))
                .collect();
            let (s, rec) = adapt_partial_potential(spec, *a, &pairs, 0.0)?;
            (s, Some(rec))
        }
    };

    // Plans that convert m-function data use reference constant 0, making 0
    // the true left constant of the reconstructed problem.
    let h_true = match plan {
        SamplingPlan::SeveralSpectra { .. } => 0.0,
        _ => spec.h,
    };
    let raw = run_inverse(&samples, knobs)?;
    let (result, report) = match rescale {
        None => {
            let (l1_q, max_q) = l1_and_max(&raw.grid, &raw.q, |x| spec.q(x));
            let report = ErrorReport {
                l1_q,
                max_q,
                h_err: Some((raw.h - h_true).abs()),
                big_h_err: (raw.big_h - spec.big_h).abs(),
            };
            (raw, report)
        }
        Some(rec) => {
            // Map the recovered tail back to [a, pi].
            let grid: Vec<f64> = raw.grid.iter().map(|&s| rec.to_original_x(s)).collect();
            let q: Vec<f64> = raw.q.iter().map(|&v| rec.q_to_original(v)).collect();
            let big_h = rec.big_h_to_original(raw.big_h);
            let mapped = PotentialResult {
                grid,
                q,
                h: raw.h,
                big_h,
                spectral: raw.spectral,
                diagnostics: raw.diagnostics,
            };
            let (l1_q, max_q) = l1_and_max(&mapped.grid, &mapped.q, |x| spec.q(x));
            let report = ErrorReport {
                l1_q,
                max_q,
                h_err: None,
                big_h_err: (mapped.big_h - spec.big_h).abs(),
            };
            (mapped, report)
        }
    };
    Ok(SynthOutcome {
        samples,
        result,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleaved_indices_match_pattern() {
        let plan = SamplingPlan::three_spectra_interleaved([1.0, 2.0, 3.0], 8);
        let SamplingPlan::SeveralSpectra { indices, .. } = plan else {
            panic!("wrong variant");
        };
        assert_eq!(indices[0], vec![0, 1, 3, 4, 6, 7, 9, 10]);
        assert_eq!(indices[1], vec![0, 2, 3, 5, 6, 8, 9, 11]);
        assert_eq!(indices[2], vec![1, 2, 4, 5, 7, 8, 10, 11]);
    }

    #[test]
    fn free_two_spectra_round_trip() {
        let spec = PotentialSpec::zero(0.0, 0.0);
        let knobs = SolverKnobs {
            eigen_count: Some(200),
            grid_size: 50,
            ..Default::default()
        };
        let out = run_synthetic(&spec, &SamplingPlan::TwoSpectra { pairs: 10 }, &knobs).unwrap();
        assert!(out.report.l1_q < 1e-8, "L1 = {:.3e}", out.report.l1_q);
        assert!(out.report.h_err.unwrap() < 1e-8);
        assert!(out.report.big_h_err < 1e-8);
    }
}
