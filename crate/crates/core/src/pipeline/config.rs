//! Run configuration: a TOML file with `[input]`, `[solver]` and `[output]`
//! sections. Every solver knob can also be overridden by CLI flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gelfand_levitan::DiffMethod;
use crate::potential::PotentialSpec;

use super::adapters::{adapt_analytic_bc, adapt_partial_potential, adapt_two_spectra, adapt_variable_h};
use super::io;
use super::synth::SamplingPlan;
use super::SolverKnobs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    WeylSamples,
    TwoSpectra,
    VariableH,
    PartialPotential,
    AnalyticBc,
    Synthetic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    pub mode: Mode,
    /// Sample table; format depends on the mode (see the book's file-format
    /// chapter). Not used in synthetic mode.
    pub samples: Option<PathBuf>,
    /// Reference constant for m -> M conversions (default 0).
    pub h_ref: Option<f64>,
    /// Known potential for partial-potential mode: catalog name or a table
    /// file with columns `x q`.
    pub known_potential: Option<String>,
    /// Left boundary constant of the data in partial-potential mode.
    pub known_h: Option<f64>,
    /// Right end of the known segment in partial-potential mode.
    pub boundary_a: Option<f64>,
    /// Polynomial coefficients of f1 and f2 (lowest degree first) for
    /// analytic-bc mode.
    pub f1: Option<Vec<f64>>,
    pub f2: Option<Vec<f64>>,
    pub synthetic: Option<SyntheticSection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    /// Catalog name (zero, q1..q5).
    pub potential: String,
    pub h: f64,
    #[serde(rename = "H")]
    pub big_h: f64,
    /// two-spectra | three-spectra | grid | partial.
    pub plan: String,
    pub pairs: Option<usize>,
    pub per_spectrum: Option<usize>,
    pub h_values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub step: Option<f64>,
    pub count: Option<usize>,
    pub imag: Option<f64>,
    pub boundary_a: Option<f64>,
    pub missing: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub unknowns: Option<usize>,
    pub eigen_count: Option<usize>,
    pub equations: Option<usize>,
    pub grid_size: Option<usize>,
    pub cond_limit: Option<f64>,
    /// "spline" | "fit" | "fit:N".
    pub diff: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub q_table: Option<PathBuf>,
    pub spectral_table: Option<PathBuf>,
    pub diagnostics: Option<PathBuf>,
    pub samples_out: Option<PathBuf>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            q_table: None,
            spectral_table: None,
            diagnostics: None,
            samples_out: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub input: InputSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<ProblemConfig> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn knobs(&self) -> Result<SolverKnobs> {
        let mut knobs = SolverKnobs {
            n_unknown_h: self.solver.unknowns,
            eigen_count: self.solver.eigen_count,
            ..Default::default()
        };
        if let Some(n) = self.solver.equations {
            knobs.gl_equations = n;
        }
        if let Some(g) = self.solver.grid_size {
            knobs.grid_size = g;
        }
        if let Some(c) = self.solver.cond_limit {
            knobs.cond_limit = c;
        }
        if let Some(d) = &self.solver.diff {
            knobs.diff_method = Some(parse_diff(d)?);
        }
        Ok(knobs)
    }
}

pub fn parse_diff(text: &str) -> Result<DiffMethod> {
    match text {
        "spline" => Ok(DiffMethod::Spline),
        "fit" => Ok(DiffMethod::LegendreFit { degree: 36 }),
        other => {
            if let Some(rest) = other.strip_prefix("fit:") {
                let degree = rest
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad fit degree '{rest}'")))?;
                Ok(DiffMethod::LegendreFit { degree })
            } else {
                Err(Error::Parse(format!(
                    "unknown differentiation method '{other}' (expected spline | fit | fit:N)"
                )))
            }
        }
    }
}

fn polynomial(coeffs: Vec<f64>) -> impl Fn(f64) -> f64 {
    move |lam: f64| {
        let mut acc = 0.0;
        for &c in coeffs.iter().rev() {
            acc = acc * lam + c;
        }
        acc
    }
}

fn known_potential(cfg: &InputSection) -> Result<PotentialSpec> {
    let name = cfg.known_potential.as_deref().ok_or_else(|| {
        Error::InvalidInput("partial-potential mode needs input.known_potential".into())
    })?;
    let h = cfg.known_h.unwrap_or(0.0);
    if let Some(spec) = PotentialSpec::catalog(name, h, 0.0) {
        return Ok(spec);
    }
    // Otherwise a table file with columns `x q`.
    let rows = io::read_pairs(Path::new(name), ["x", "q"])?;
    let (xs, qs): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    PotentialSpec::from_table(name, xs, qs, h, 0.0)
}

/// Outcome of loading the input section: samples ready for the inverse run,
/// plus the rescale record for partial-potential inputs.
pub struct LoadedInput {
    pub samples: Vec<crate::weyl_system::WeylSample>,
    pub rescale: Option<super::adapters::RescaleRecord>,
}

/// Materialize samples from a file-based input section.
pub fn load_input(cfg: &InputSection) -> Result<LoadedInput> {
    let need_samples = || {
        cfg.samples
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("input.samples path is required".into()))
    };
    let h_ref = cfg.h_ref.unwrap_or(0.0);
    match cfg.mode {
        Mode::WeylSamples => Ok(LoadedInput {
            samples: io::read_samples(need_samples()?)?,
            rescale: None,
        }),
        Mode::TwoSpectra => {
            let rows = io::read_pairs(need_samples()?, ["kind", "value"])?;
            let mut lambdas = Vec::new();
            let mut nus = Vec::new();
            for (kind, value) in rows {
                match kind as i64 {
                    1 => lambdas.push(value),
                    2 => nus.push(value),
                    other => {
                        return Err(Error::Parse(format!(
                            "two-spectra kind column must be 1 or 2, got {other}"
                        )))
                    }
                }
            }
            lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
            nus.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Ok(LoadedInput {
                samples: adapt_two_spectra(&lambdas, &nus)?,
                rescale: None,
            })
        }
        Mode::VariableH => {
            let pairs = io::read_pairs(need_samples()?, ["lambda", "h_n"])?;
            Ok(LoadedInput {
                samples: adapt_variable_h(&pairs, h_ref),
                rescale: None,
            })
        }
        Mode::PartialPotential => {
            let pairs = io::read_pairs(need_samples()?, ["lambda", "h_n"])?;
            let known = known_potential(cfg)?;
            let a = cfg.boundary_a.ok_or_else(|| {
                Error::InvalidInput("partial-potential mode needs input.boundary_a".into())
            })?;
            let (samples, rescale) = adapt_partial_potential(&known, a, &pairs, h_ref)?;
            Ok(LoadedInput {
                samples,
                rescale: Some(rescale),
            })
        }
        Mode::AnalyticBc => {
            let lambdas = io::read_column(need_samples()?, "lambda")?;
            let f1 = polynomial(cfg.f1.clone().ok_or_else(|| {
                Error::InvalidInput("analytic-bc mode needs input.f1 coefficients".into())
            })?);
            let f2 = polynomial(cfg.f2.clone().ok_or_else(|| {
                Error::InvalidInput("analytic-bc mode needs input.f2 coefficients".into())
            })?);
            Ok(LoadedInput {
                samples: adapt_analytic_bc(&f1, &f2, &lambdas, h_ref)?,
                rescale: None,
            })
        }
        Mode::Synthetic => Err(Error::InvalidInput(
            "synthetic mode is handled by the synth entry point".into(),
        )),
    }
}

/// Build the sampling plan and potential from a synthetic section.
pub fn synthetic_setup(cfg: &SyntheticSection) -> Result<(PotentialSpec, SamplingPlan)> {
    let spec = PotentialSpec::catalog(&cfg.potential, cfg.h, cfg.big_h).ok_or_else(|| {
        Error::InvalidInput(format!("unknown catalog potential '{}'", cfg.potential))
    })?;
    let plan = match cfg.plan.as_str() {
        "two-spectra" => SamplingPlan::TwoSpectra {
            pairs: cfg.pairs.unwrap_or(16),
        },
        "three-spectra" => {
            let hv = cfg.h_values.clone().unwrap_or_else(|| vec![1.0, 2.0, 3.0]);
            if hv.len() != 3 {
                return Err(Error::InvalidInput(
                    "three-spectra plan needs exactly 3 h_values".into(),
                ));
            }
            SamplingPlan::three_spectra_interleaved(
                [hv[0], hv[1], hv[2]],
                cfg.per_spectrum.unwrap_or(8),
            )
        }
        "grid" => SamplingPlan::PointGrid {
            start: cfg.start.unwrap_or(0.2),
            step: cfg.step.unwrap_or(0.5),
            count: cfg.count.unwrap_or(41),
            imag: cfg.imag.unwrap_or(0.0),
        },
        "partial" => SamplingPlan::PartialPotential {
            a: cfg.boundary_a.unwrap_or(std::f64::consts::PI / 2.0),
            count: cfg.count.unwrap_or(40),
            missing: cfg.missing.clone().unwrap_or_default(),
        },
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown plan '{other}' (expected two-spectra | three-spectra | grid | partial)"
            )))
        }
    };
    Ok((spec, plan))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = r#"
[input]
mode = "two-spectra"
samples = "spectra.dat"

[solver]
equations = 8
grid_size = 100
cond_limit = 1000.0
diff = "fit:24"

[output]
dir = "results"
"#;
        let cfg: ProblemConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.input.mode, Mode::TwoSpectra);
        let knobs = cfg.knobs().unwrap();
        assert_eq!(knobs.grid_size, 100);
        assert_eq!(
            knobs.diff_method,
            Some(DiffMethod::LegendreFit { degree: 24 })
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = "[input]\nmode = \"weyl-samples\"\nbogus = 1\n";
        assert!(toml::from_str::<ProblemConfig>(text).is_err());
    }

    #[test]
    fn diff_parsing() {
        assert_eq!(parse_diff("spline").unwrap(), DiffMethod::Spline);
        assert_eq!(
            parse_diff("fit").unwrap(),
            DiffMethod::LegendreFit { degree: 36 }
        );
        assert!(parse_diff("nope").is_err());
    }
}
