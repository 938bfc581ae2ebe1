use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use weylrec::direct;
use weylrec::pipeline::config::{parse_diff, synthetic_setup, LoadedInput, Mode, ProblemConfig};
use weylrec::pipeline::synth::{run_synthetic, SamplingPlan};
use weylrec::pipeline::{
    adapters, config, io, run_inverse_traced, PotentialResult, SolverKnobs,
};
use weylrec::potential::PotentialSpec;
use weylrec::weyl_system::density_check;

#[derive(Parser)]
#[command(
    name = "weylrec",
    about = "Recover a Sturm-Liouville potential and boundary constants from Weyl-function samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct KnobArgs {
    /// Number of unknown coefficients (default: automatic size selection).
    #[arg(long)]
    unknowns: Option<usize>,
    /// Number of eigenvalues to extract (default: decay heuristic).
    #[arg(long)]
    eigen_count: Option<usize>,
    /// Truncation index N of the main system.
    #[arg(long)]
    equations: Option<usize>,
    /// Number of uniform grid points on (0, pi].
    #[arg(long)]
    grid_size: Option<usize>,
    /// Condition-number ceiling for automatic size selection.
    #[arg(long)]
    cond_limit: Option<f64>,
    /// Differentiation route: spline, fit, or fit:N.
    #[arg(long)]
    diff: Option<String>,
}

impl KnobArgs {
    fn apply(&self, knobs: &mut SolverKnobs) -> Result<()> {
        if self.unknowns.is_some() {
            knobs.n_unknown_h = self.unknowns;
        }
        if self.eigen_count.is_some() {
            knobs.eigen_count = self.eigen_count;
        }
        if let Some(n) = self.equations {
            knobs.gl_equations = n;
        }
        if let Some(g) = self.grid_size {
            knobs.grid_size = g;
        }
        if let Some(c) = self.cond_limit {
            knobs.cond_limit = c;
        }
        if let Some(d) = &self.diff {
            knobs.diff_method = Some(parse_diff(d)?);
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the inverse method on a sample table or a config file.
    Solve {
        /// TOML config describing input, solver knobs and outputs.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Weyl sample table (shortcut for mode = weyl-samples).
        #[arg(long)]
        samples: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        knobs: KnobArgs,
    },
    /// Synthesize data for a catalog potential, run the inverse method and
    /// report the reconstruction errors.
    Synth {
        /// Catalog potential: zero, q1..q5.
        #[arg(long)]
        potential: String,
        #[arg(long, default_value_t = 0.0)]
        h: f64,
        /// Right boundary constant H.
        #[arg(long, default_value_t = 0.0)]
        big_h: f64,
        /// Sampling plan: two-spectra | three-spectra | grid | partial.
        #[arg(long, default_value = "two-spectra")]
        plan: String,
        /// Eigenvalue pairs for two-spectra.
        #[arg(long)]
        pairs: Option<usize>,
        /// Eigenvalues per spectrum for three-spectra.
        #[arg(long)]
        per_spectrum: Option<usize>,
        /// Grid plan: start of the rho grid.
        #[arg(long)]
        start: Option<f64>,
        /// Grid plan: rho step.
        #[arg(long)]
        step: Option<f64>,
        /// Grid or partial plan: number of points / eigenvalues.
        #[arg(long)]
        count: Option<usize>,
        /// Grid plan: imaginary offset of the rho grid.
        #[arg(long)]
        imag: Option<f64>,
        /// Partial plan: right end of the known segment.
        #[arg(long)]
        boundary_a: Option<f64>,
        /// Partial plan: indices of missing eigenvalues.
        #[arg(long, value_delimiter = ',')]
        missing: Option<Vec<usize>>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        knobs: KnobArgs,
    },
    /// Emit reference spectra or Weyl samples from the direct solver.
    Oracle {
        #[arg(long)]
        potential: String,
        #[arg(long, default_value_t = 0.0)]
        h: f64,
        #[arg(long, default_value_t = 0.0)]
        big_h: f64,
        /// What to emit: data (lambda/alpha table), two-spectra (kind/value
        /// table), weyl (sample table on a grid).
        #[arg(long, default_value = "data")]
        emit: String,
        /// Number of eigenvalues.
        #[arg(long, default_value_t = 16)]
        count: usize,
        /// Grid for --emit weyl: start,step,count of the rho grid.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        /// Imaginary offset for --emit weyl.
        #[arg(long, default_value_t = 0.0)]
        imag: f64,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Advisory density report for a sample table.
    CheckDensity {
        #[arg(long)]
        samples: PathBuf,
    },
}

fn write_result(out_dir: &PathBuf, result: &PotentialResult) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    io::write_q_table(&out_dir.join("q.dat"), &result.grid, &result.q)?;
    io::write_spectral_table(&out_dir.join("spectral.dat"), &result.spectral)?;
    io::write_diagnostics(&out_dir.join("diagnostics.dat"), result)?;
    println!("h = {:.12e}", result.h);
    println!("H = {:.12e}", result.big_h);
    println!(
        "|omega - omega2| = {:.3e}, cond = {:.3e}, coefficients = {}",
        result.diagnostics.omega_gap, result.diagnostics.cond, result.diagnostics.coefficients
    );
    println!("tables written under {}", out_dir.display());
    Ok(())
}

fn spec_from(name: &str, h: f64, big_h: f64) -> Result<PotentialSpec> {
    PotentialSpec::catalog(name, h, big_h)
        .with_context(|| format!("unknown catalog potential '{name}'"))
}

fn main() -> Result<()> {
    env_logger::init();
    match Cli::parse().command {
        Command::Solve {
            config,
            samples,
            out_dir,
            knobs: knob_args,
        } => {
            let (loaded, mut knobs, mut dir) = match (&config, &samples) {
                (Some(path), _) => {
                    let cfg = ProblemConfig::load(path)?;
                    if cfg.input.mode == Mode::Synthetic {
                        let synth_cfg = cfg.input.synthetic.clone().context(
                            "synthetic mode needs an [input.synthetic] section",
                        )?;
                        let (spec, plan) = synthetic_setup(&synth_cfg)?;
                        let mut knobs = cfg.knobs()?;
                        knob_args.apply(&mut knobs)?;
                        let dir = out_dir.unwrap_or_else(|| cfg.output.dir.clone());
                        let outcome = run_synthetic(&spec, &plan, &knobs)?;
                        fs::create_dir_all(&dir)?;
                        io::write_samples(&dir.join("samples.dat"), &outcome.samples)?;
                        write_result(&dir, &outcome.result)?;
                        print_report(&outcome.report);
                        return Ok(());
                    }
                    (config::load_input(&cfg.input)?, cfg.knobs()?, cfg.output.dir)
                }
                (None, Some(path)) => {
                    let loaded = LoadedInput {
                        samples: io::read_samples(path)?,
                        rescale: None,
                    };
                    (loaded, SolverKnobs::default(), PathBuf::from("out"))
                }
                (None, None) => bail!("solve needs either --config or --samples"),
            };
            knob_args.apply(&mut knobs)?;
            if let Some(d) = out_dir {
                dir = d;
            }
            let (partial_diag, outcome) = run_inverse_traced(&loaded.samples, &knobs);
            let result = match outcome {
                Ok(r) => r,
                Err(e) => {
                    // Report whatever the completed stages produced.
                    eprintln!("run failed: {e}");
                    for (stage, secs) in &partial_diag.timings {
                        eprintln!("  completed stage {stage} in {secs:.3} s");
                    }
                    if partial_diag.cond > 0.0 {
                        eprintln!(
                            "  cond = {:.3e}, residual = {:.3e}, omega = {:.6e}, omega2 = {:.6e}",
                            partial_diag.cond,
                            partial_diag.residual_norm,
                            partial_diag.omega,
                            partial_diag.omega2
                        );
                    }
                    return Err(e.into());
                }
            };
            match loaded.rescale {
                None => write_result(&dir, &result)?,
                Some(rec) => {
                    let grid: Vec<f64> =
                        result.grid.iter().map(|&s| rec.to_original_x(s)).collect();
                    let q: Vec<f64> = result.q.iter().map(|&v| rec.q_to_original(v)).collect();
                    let mapped = PotentialResult {
                        grid,
                        q,
                        big_h: rec.big_h_to_original(result.big_h),
                        ..result
                    };
                    write_result(&dir, &mapped)?;
                }
            }
        }
        Command::Synth {
            potential,
            h,
            big_h,
            plan,
            pairs,
            per_spectrum,
            start,
            step,
            count,
            imag,
            boundary_a,
            missing,
            out_dir,
            knobs: knob_args,
        } => {
            let spec = spec_from(&potential, h, big_h)?;
            let plan = match plan.as_str() {
                "two-spectra" => SamplingPlan::TwoSpectra {
                    pairs: pairs.unwrap_or(16),
                },
                "three-spectra" => SamplingPlan::three_spectra_interleaved(
                    [1.0, 2.0, 3.0],
                    per_spectrum.unwrap_or(8),
                ),
                "grid" => SamplingPlan::PointGrid {
                    start: start.unwrap_or(0.2),
                    step: step.unwrap_or(0.5),
                    count: count.unwrap_or(41),
                    imag: imag.unwrap_or(0.0),
                },
                "partial" => SamplingPlan::PartialPotential {
                    a: boundary_a.unwrap_or(std::f64::consts::PI / 2.0),
                    count: count.unwrap_or(40),
                    missing: missing.unwrap_or_default(),
                },
                other => bail!("unknown plan '{other}'"),
            };
            let mut knobs = SolverKnobs::default();
            knob_args.apply(&mut knobs)?;
            let outcome = run_synthetic(&spec, &plan, &knobs)?;
            fs::create_dir_all(&out_dir)?;
            io::write_samples(&out_dir.join("samples.dat"), &outcome.samples)?;
            write_result(&out_dir, &outcome.result)?;
            print_report(&outcome.report);
        }
        Command::Oracle {
            potential,
            h,
            big_h,
            emit,
            count,
            grid,
            imag,
            out,
        } => {
            let spec = spec_from(&potential, h, big_h)?;
            match emit.as_str() {
                "data" => {
                    let data = direct::oracle_eigen_data(&spec, count)?;
                    io::write_spectral_table(&out, &data)?;
                }
                "two-spectra" => {
                    let lambdas = direct::robin_spectrum(&spec, count)?;
                    let nus = direct::second_spectrum(&spec, count)?;
                    let mut text = String::from("# two spectra (kind 1 = poles, 2 = zeros)\nkind value\n");
                    for l in lambdas {
                        text.push_str(&format!("1 {l:.15e}\n"));
                    }
                    for v in nus {
                        text.push_str(&format!("2 {v:.15e}\n"));
                    }
                    fs::write(&out, text)?;
                }
                "weyl" => {
                    let g = grid.context("--emit weyl needs --grid start,step,count")?;
                    if g.len() != 3 {
                        bail!("--grid needs exactly start,step,count");
                    }
                    let n = g[2] as usize;
                    let zs: Vec<Complex64> = (0..n)
                        .map(|k| {
                            let base = Complex64::new(g[0] + g[1] * k as f64, imag);
                            base * base
                        })
                        .collect();
                    let samples = adapters::oracle_samples(&spec, &zs)?;
                    io::write_samples(&out, &samples)?;
                }
                other => bail!("unknown emit target '{other}'"),
            }
            println!("wrote {}", out.display());
        }
        Command::CheckDensity { samples } => {
            let mut list = io::read_samples(&samples)?;
            list.sort_by(|a, b| a.z.re.partial_cmp(&b.z.re).unwrap());
            let report = density_check(&list)?;
            println!("k z rho term k2_term empirical_ok");
            for e in &report.entries {
                println!(
                    "{} {:.6e} {:.6e} {:.6e} {:.6e} {}",
                    e.k,
                    e.z,
                    e.rho,
                    e.term,
                    (e.k * e.k) as f64 * e.term,
                    e.empirical_ok
                );
            }
            println!(
                "series_ok = {}, tail_violations = {}, satisfied = {}",
                report.series_ok, report.tail_violations, report.satisfied
            );
        }
    }
    Ok(())
}

fn print_report(report: &weylrec::pipeline::synth::ErrorReport) {
    println!("L1(q) error      = {:.6e}", report.l1_q);
    println!("max|q| error     = {:.6e}", report.max_q);
    match report.h_err {
        Some(e) => println!("|h - h_true|     = {:.6e}", e),
        None => println!("|h - h_true|     = (not recovered in this mode)"),
    }
    println!("|H - H_true|     = {:.6e}", report.big_h_err);
}
