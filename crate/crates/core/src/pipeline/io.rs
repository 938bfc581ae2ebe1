//! Plain-text tables: Weyl samples, spectral data, recovered potentials and
//! run diagnostics. All files are whitespace-delimited with a header row;
//! lines starting with '#' are comments. Values carry 15 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::SpectralData;
use crate::value::ExtendedComplex;
use crate::weyl_system::WeylSample;

use super::PotentialResult;

const SAMPLE_HEADER: &str = "Re_z Im_z Re_M Im_M is_infinite";

fn fmt_f(v: f64) -> String {
    format!("{v:.15e}")
}

/// Serialize samples as the five-column table
/// `Re_z Im_z Re_M Im_M is_infinite`.
pub fn samples_to_string(samples: &[WeylSample]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Weyl function samples");
    let _ = writeln!(out, "{SAMPLE_HEADER}");
    for s in samples {
        let (re_m, im_m, inf) = match s.m {
            ExtendedComplex::Finite(v) => (v.re, v.im, 0),
            ExtendedComplex::Infinite => (0.0, 0.0, 1),
        };
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            fmt_f(s.z.re),
            fmt_f(s.z.im),
            fmt_f(re_m),
            fmt_f(im_m),
            inf
        );
    }
    out
}

pub fn write_samples(path: &Path, samples: &[WeylSample]) -> Result<()> {
    fs::write(path, samples_to_string(samples))?;
    Ok(())
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        // Accept commas as well as whitespace.
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .collect();
        Some((i + 1, fields))
    })
}

fn parse_f(field: &str, line: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse number '{field}'")))
}

pub fn samples_from_string(text: &str) -> Result<Vec<WeylSample>> {
    let mut rows = data_lines(text);
    let (line, header) = rows
        .next()
        .ok_or_else(|| Error::Parse("empty sample file".into()))?;
    if header != SAMPLE_HEADER.split_whitespace().collect::<Vec<_>>() {
        return Err(Error::Parse(format!(
            "line {line}: expected header '{SAMPLE_HEADER}'"
        )));
    }
    let mut samples = Vec::new();
    for (line, fields) in rows {
        if fields.len() != 5 {
            return Err(Error::Parse(format!(
                "line {line}: expected 5 columns, got {}",
                fields.len()
            )));
        }
        let z = Complex64::new(parse_f(fields[0], line)?, parse_f(fields[1], line)?);
        let m = match fields[4] {
            "1" => ExtendedComplex::Infinite,
            "0" => ExtendedComplex::Finite(Complex64::new(
                parse_f(fields[2], line)?,
                parse_f(fields[3], line)?,
            )),
            other => {
                return Err(Error::Parse(format!(
                    "line {line}: is_infinite must be 0 or 1, got '{other}'"
                )))
            }
        };
        samples.push(WeylSample::new(z, m));
    }
    Ok(samples)
}

pub fn read_samples(path: &Path) -> Result<Vec<WeylSample>> {
    samples_from_string(&fs::read_to_string(path)?)
}

/// Two-column numeric table with an expected header.
pub fn read_pairs(path: &Path, expected_header: [&str; 2]) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut rows = data_lines(&text);
    let (line, header) = rows
        .next()
        .ok_or_else(|| Error::Parse("empty table".into()))?;
    if header != expected_header {
        return Err(Error::Parse(format!(
            "line {line}: expected header '{}'",
            expected_header.join(" ")
        )));
    }
    let mut out = Vec::new();
    for (line, fields) in rows {
        if fields.len() != 2 {
            return Err(Error::Parse(format!(
                "line {line}: expected 2 columns, got {}",
                fields.len()
            )));
        }
        out.push((parse_f(fields[0], line)?, parse_f(fields[1], line)?));
    }
    Ok(out)
}

/// Single-column numeric table with an expected header.
pub fn read_column(path: &Path, expected_header: &str) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut rows = data_lines(&text);
    let (line, header) = rows
        .next()
        .ok_or_else(|| Error::Parse("empty table".into()))?;
    if header != [expected_header] {
        return Err(Error::Parse(format!(
            "line {line}: expected header '{expected_header}'"
        )));
    }
    let mut out = Vec::new();
    for (line, fields) in rows {
        if fields.len() != 1 {
            return Err(Error::Parse(format!(
                "line {line}: expected 1 column, got {}",
                fields.len()
            )));
        }
        out.push(parse_f(fields[0], line)?);
    }
    Ok(out)
}

pub fn q_table_to_string(grid: &[f64], q: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# recovered potential");
    let _ = writeln!(out, "x q");
    for (x, v) in grid.iter().zip(q.iter()) {
        let _ = writeln!(out, "{} {}", fmt_f(*x), fmt_f(*v));
    }
    out
}

pub fn write_q_table(path: &Path, grid: &[f64], q: &[f64]) -> Result<()> {
    fs::write(path, q_table_to_string(grid, q))?;
    Ok(())
}

/// Spectral data as a (lambda, alpha) table with omega/omega2/shift header.
pub fn spectral_to_string(data: &SpectralData) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# omega {}", fmt_f(data.omega));
    let _ = writeln!(out, "# omega2 {}", fmt_f(data.omega2));
    let _ = writeln!(out, "# shift {}", fmt_f(data.shift));
    let _ = writeln!(out, "lambda alpha");
    for (l, a) in data.lambdas.iter().zip(data.alphas.iter()) {
        let _ = writeln!(out, "{} {}", fmt_f(*l), fmt_f(*a));
    }
    out
}

pub fn write_spectral_table(path: &Path, data: &SpectralData) -> Result<()> {
    fs::write(path, spectral_to_string(data))?;
    Ok(())
}

pub fn spectral_from_string(text: &str) -> Result<SpectralData> {
    let mut omega = None;
    let mut omega2 = None;
    let mut shift = None;
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('#') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() == 2 {
                match fields[0] {
                    "omega" => omega = Some(parse_f(fields[1], 0)?),
                    "omega2" => omega2 = Some(parse_f(fields[1], 0)?),
                    "shift" => shift = Some(parse_f(fields[1], 0)?),
                    _ => {}
                }
            }
        }
    }
    let mut rows = data_lines(text);
    let (line, header) = rows
        .next()
        .ok_or_else(|| Error::Parse("empty spectral table".into()))?;
    if header != ["lambda", "alpha"] {
        return Err(Error::Parse(format!(
            "line {line}: expected header 'lambda alpha'"
        )));
    }
    let mut lambdas = Vec::new();
    let mut alphas = Vec::new();
    for (line, fields) in rows {
        if fields.len() != 2 {
            return Err(Error::Parse(format!("line {line}: expected 2 columns")));
        }
        lambdas.push(parse_f(fields[0], line)?);
        alphas.push(parse_f(fields[1], line)?);
    }
    Ok(SpectralData {
        lambdas,
        alphas,
        omega: omega.ok_or_else(|| Error::Parse("missing '# omega' header".into()))?,
        omega2: omega2.ok_or_else(|| Error::Parse("missing '# omega2' header".into()))?,
        shift: shift.unwrap_or(0.0),
    })
}

/// Diagnostics as a flat key-value record.
pub fn diagnostics_to_string(result: &PotentialResult) -> String {
    let d = &result.diagnostics;
    let mut out = String::new();
    let _ = writeln!(out, "h = {}", fmt_f(result.h));
    let _ = writeln!(out, "H = {}", fmt_f(result.big_h));
    let _ = writeln!(out, "omega = {}", fmt_f(d.omega));
    let _ = writeln!(out, "omega2 = {}", fmt_f(d.omega2));
    let _ = writeln!(out, "omega_gap = {}", fmt_f(d.omega_gap));
    let _ = writeln!(out, "cond = {}", fmt_f(d.cond));
    let _ = writeln!(out, "residual_norm = {}", fmt_f(d.residual_norm));
    let _ = writeln!(out, "coefficients = {}", d.coefficients);
    let _ = writeln!(out, "eigen_count = {}", d.eigen_count);
    let _ = writeln!(out, "shift = {}", fmt_f(d.shift));
    let _ = writeln!(out, "h_from_curve = {}", fmt_f(d.h_from_curve));
    let _ = writeln!(out, "gl_failures = {}", d.gl_failures);
    for (stage, secs) in &d.timings {
        let _ = writeln!(out, "time_{stage} = {secs:.3}");
    }
    out
}

pub fn write_diagnostics(path: &Path, result: &PotentialResult) -> Result<()> {
    fs::write(path, diagnostics_to_string(result))?;
    Ok(())
}
