//! Reductions of classical inverse problems to Weyl-sample form.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::direct::{m_to_weyl, propagate_m};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::value::ExtendedComplex;
use crate::weyl_system::WeylSample;

/// Two spectra: the problem's own eigenvalues are poles of M and the
/// second-spectrum eigenvalues are zeros.
pub fn adapt_two_spectra(lambdas: &[f64], nus: &[f64]) -> Result<Vec<WeylSample>> {
    for list in [lambdas, nus] {
        for w in list.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidInput("spectra must be sorted ascending".into()));
            }
        }
    }
    let mut samples: Vec<WeylSample> = Vec::with_capacity(lambdas.len() + nus.len());
    for &l in lambdas {
        samples.push(WeylSample::real(l, ExtendedComplex::Infinite));
    }
    for &v in nus {
        samples.push(WeylSample::real(v, ExtendedComplex::from_real(0.0)));
    }
    samples.sort_by(|a, b| a.z.re.partial_cmp(&b.z.re).unwrap());
    for w in samples.windows(2) {
        if (w[1].z.re - w[0].z.re).abs() <= 1e-10 * (1.0 + w[0].z.re.abs()) {
            return Err(Error::InvalidInput(format!(
                "the two spectra overlap near {:.12}; M would be both 0 and infinite",
                w[0].z.re
            )));
        }
    }
    Ok(samples)
}

/// Eigenvalues under a varying left boundary constant: m(lambda_n) = h_n,
/// converted through M = 1/(m - h_ref). The reference constant defaults
/// to zero in the callers.
pub fn adapt_variable_h(pairs: &[(f64, f64)], h_ref: f64) -> Vec<WeylSample> {
    let mut samples: Vec<WeylSample> = pairs
        .iter()
        .map(|&(lam, h_n)| {
            WeylSample::real(lam, m_to_weyl(ExtendedComplex::from_real(h_n), h_ref))
        })
        .collect();
    samples.sort_by(|a, b| a.z.re.partial_cmp(&b.z.re).unwrap());
    samples
}

/// Affine data of the substitution s = pi (x - a) / (pi - a) mapping the
/// unknown tail [a, pi] onto [0, pi].
#[derive(Clone, Copy, Debug)]
pub struct RescaleRecord {
    pub a: f64,
    pub ell: f64,
}

impl RescaleRecord {
    pub fn new(a: f64) -> Self {
        RescaleRecord { a, ell: PI - a }
    }

    /// Contraction factor ell/pi applied to rho, m and H.
    pub fn contraction(&self) -> f64 {
        self.ell / PI
    }

    pub fn to_original_x(&self, s: f64) -> f64 {
        self.a + self.ell * s / PI
    }

    /// Undo the (ell/pi)^2 scaling of the potential.
    pub fn q_to_original(&self, q_hat: f64) -> f64 {
        (PI / self.ell) * (PI / self.ell) * q_hat
    }

    pub fn big_h_to_original(&self, big_h_hat: f64) -> f64 {
        (PI / self.ell) * big_h_hat
    }
}

/// Partially known potential: propagate the m-function across the known
/// segment [0, a], then rescale the remaining interval onto [0, pi].
/// Samples whose propagation fails are dropped with a warning.
pub fn adapt_partial_potential(
    known: &PotentialSpec,
    a: f64,
    pairs: &[(f64, f64)],
    h_ref: f64,
) -> Result<(Vec<WeylSample>, RescaleRecord)> {
    if !(a > 0.0 && a < PI) {
        return Err(Error::Precondition(format!(
            "known segment endpoint must lie in (0, pi), got {a}"
        )));
    }
    let rec = RescaleRecord::new(a);
    let c = rec.contraction();
    let mut samples = Vec::with_capacity(pairs.len());
    for &(lam, h_n) in pairs {
        let m_at_a = match propagate_m(known, a, h_n, lam) {
            Ok(m) => m,
            Err(e) => {
                log::warn!("m-propagation failed at lambda = {lam:.9}: {e}; sample dropped");
                continue;
            }
        };
        let m_hat = match m_at_a {
            ExtendedComplex::Infinite => ExtendedComplex::Infinite,
            ExtendedComplex::Finite(v) => ExtendedComplex::Finite(v * c),
        };
        let z_hat = c * c * lam;
        samples.push(WeylSample::real(z_hat, m_to_weyl(m_hat, c * h_ref)));
    }
    samples.sort_by(|x, y| x.z.re.partial_cmp(&y.z.re).unwrap());
    Ok((samples, rec))
}

/// Spectral-parameter-dependent boundary condition
/// f1(lambda) y'(0) + f2(lambda) y(0) = 0 with entire f1, f2:
/// m(lambda_n) = -f2(lambda_n)/f1(lambda_n).
pub fn adapt_analytic_bc(
    f1: &dyn Fn(f64) -> f64,
    f2: &dyn Fn(f64) -> f64,
    lambdas: &[f64],
    h_ref: f64,
) -> Result<Vec<WeylSample>> {
    let mut samples = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let (v1, v2) = (f1(lam), f2(lam));
        if v1 == 0.0 && v2 == 0.0 {
            return Err(Error::InvalidInput(format!(
                "f1 and f2 vanish simultaneously at lambda = {lam:.9}"
            )));
        }
        let m = if v1 == 0.0 {
            ExtendedComplex::Infinite
        } else {
            ExtendedComplex::from_real(-v2 / v1)
        };
        samples.push(WeylSample::real(lam, m_to_weyl(m, h_ref)));
    }
    samples.sort_by(|x, y| x.z.re.partial_cmp(&y.z.re).unwrap());
    Ok(samples)
}

/// Weyl samples straight from the direct solver at given spectral points.
pub fn oracle_samples(spec: &PotentialSpec, zs: &[Complex64]) -> Result<Vec<WeylSample>> {
    zs.iter()
        .map(|&z| Ok(WeylSample::new(z, crate::direct::weyl_value(spec, z)?)))
        .collect()
}
