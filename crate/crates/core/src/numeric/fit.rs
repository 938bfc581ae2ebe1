//! Global least-squares polynomial fit in the Legendre basis, used to
//! differentiate smooth reconstructed data without the noise amplification
//! of local stencils.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Least-squares polynomial in the Legendre basis on an affine-mapped
/// interval `[lo, hi] -> [-1, 1]`.
#[derive(Clone, Debug)]
pub struct LegendreFit {
    lo: f64,
    hi: f64,
    coeffs: Vec<f64>,
}

/// P_n(t), P_n'(t), P_n''(t) for n = 0..=deg, by differentiated recurrences.
fn basis_with_derivs(deg: usize, t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; deg + 1];
    let mut dp = vec![0.0; deg + 1];
    let mut d2p = vec![0.0; deg + 1];
    p[0] = 1.0;
    if deg == 0 {
        return (p, dp, d2p);
    }
    p[1] = t;
    dp[1] = 1.0;
    for k in 1..deg {
        let kf = k as f64;
        let c1 = (2.0 * kf + 1.0) / (kf + 1.0);
        let c2 = kf / (kf + 1.0);
        p[k + 1] = c1 * t * p[k] - c2 * p[k - 1];
        dp[k + 1] = c1 * (p[k] + t * dp[k]) - c2 * dp[k - 1];
        d2p[k + 1] = c1 * (2.0 * dp[k] + t * d2p[k]) - c2 * d2p[k - 1];
    }
    (p, dp, d2p)
}

impl LegendreFit {
    /// Weighted least-squares fit of degree `deg` through `(xs, ys)`.
    /// `weights` may be empty for uniform weighting.
    pub fn fit(xs: &[f64], ys: &[f64], weights: &[f64], deg: usize) -> Result<LegendreFit> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::InvalidInput("fit needs matching x/y lists".into()));
        }
        if xs.len() <= deg {
            return Err(Error::InvalidInput(format!(
                "degree {deg} fit needs more than {deg} points, got {}",
                xs.len()
            )));
        }
        let lo = xs.first().copied().unwrap();
        let hi = xs.last().copied().unwrap();
        if !(hi > lo) {
            return Err(Error::InvalidInput("fit interval is degenerate".into()));
        }
        let n = xs.len();
        let mut a = DMatrix::zeros(n, deg + 1);
        let mut b = DVector::zeros(n);
        for (i, (&x, &y)) in xs.iter().zip(ys.iter()).enumerate() {
            let w = if weights.is_empty() { 1.0 } else { weights[i] };
            let t = 2.0 * (x - lo) / (hi - lo) - 1.0;
            let (p, _, _) = basis_with_derivs(deg, t);
            for j in 0..=deg {
                a[(i, j)] = w * p[j];
            }
            b[i] = w * y;
        }
        let svd = a.svd(true, true);
        let sol = svd
            .solve(&b, 1e-13)
            .map_err(|_| Error::SingularSystem { cond: f64::INFINITY })?;
        Ok(LegendreFit {
            lo,
            hi,
            coeffs: sol.iter().copied().collect(),
        })
    }

    fn t(&self, x: f64) -> f64 {
        2.0 * (x - self.lo) / (self.hi - self.lo) - 1.0
    }

    fn scale(&self) -> f64 {
        2.0 / (self.hi - self.lo)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (p, _, _) = basis_with_derivs(self.coeffs.len() - 1, self.t(x));
        self.coeffs.iter().zip(p.iter()).map(|(c, v)| c * v).sum()
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let (_, dp, _) = basis_with_derivs(self.coeffs.len() - 1, self.t(x));
        let s: f64 = self.coeffs.iter().zip(dp.iter()).map(|(c, v)| c * v).sum();
        s * self.scale()
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        let (_, _, d2p) = basis_with_derivs(self.coeffs.len() - 1, self.t(x));
        let s: f64 = self.coeffs.iter().zip(d2p.iter()).map(|(c, v)| c * v).sum();
        s * self.scale() * self.scale()
    }
}
