//! Cubic spline interpolation with not-a-knot end conditions, plus the
//! derivative and integral evaluations the potential-extraction stage needs.

use crate::error::{Error, Result};

/// Interpolating cubic spline through strictly increasing nodes.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the nodes.
    m: Vec<f64>,
}

impl CubicSpline {
    /// Not-a-knot spline (third derivative continuous across the first and
    /// last interior nodes). Needs at least four points; for exactly three
    /// the single cubic through them is used, for two a straight line.
    pub fn not_a_knot(xs: &[f64], ys: &[f64]) -> Result<CubicSpline> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidInput(
                "spline needs matching x/y lists with at least two points".into(),
            ));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidInput(
                    "spline nodes must be strictly increasing".into(),
                ));
            }
        }
        let n = xs.len();
        let mut m = vec![0.0_f64; n];
        if n == 2 {
            return Ok(CubicSpline {
                xs: xs.to_vec(),
                ys: ys.to_vec(),
                m,
            });
        }

        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        if n == 3 {
            // Not-a-knot at both ends degenerates to the parabola through
            // the three points: M_0 = M_1 = M_2.
            let msol = 2.0 * (slope[1] - slope[0]) / (h[0] + h[1]);
            m.fill(msol);
            return Ok(CubicSpline {
                xs: xs.to_vec(),
                ys: ys.to_vec(),
                m,
            });
        }

        // Interior continuity equations (i = 1..n-2):
        //   h[i-1]/6 M_{i-1} + (h[i-1]+h[i])/3 M_i + h[i]/6 M_{i+1}
        //     = slope[i] - slope[i-1].
        // The not-a-knot corners give M_0 and M_{n-1} in terms of their
        // neighbours,
        //   M_0 = ((h0+h1) M_1 - h0 M_2)/h1,
        //   M_{n-1} = ((ha+hb) M_{n-2} - hb M_{n-3})/ha,  ha = h[n-3], hb = h[n-2],
        // which substituted into the first and last interior rows leave a
        // tridiagonal system for M_1..M_{n-2}. (Eliminating the corner rows
        // directly instead yields a zero pivot for uniform spacing.)
        let k = n - 2; // unknowns M_1..M_{n-2}
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for j in 0..k {
            let i = j + 1;
            sub[j] = h[i - 1] / 6.0;
            diag[j] = (h[i - 1] + h[i]) / 3.0;
            sup[j] = h[i] / 6.0;
            rhs[j] = slope[i] - slope[i - 1];
        }
        // Fold in the left corner (row j = 0 holds M_1, M_2).
        diag[0] = (h[0] + h[1]) / 3.0 + h[0] * (h[0] + h[1]) / (6.0 * h[1]);
        sup[0] = (h[1] * h[1] - h[0] * h[0]) / (6.0 * h[1]);
        sub[0] = 0.0;
        // Fold in the right corner (row j = k-1 holds M_{n-3}, M_{n-2}).
        let ha = h[n - 3];
        let hb = h[n - 2];
        sub[k - 1] = (ha * ha - hb * hb) / (6.0 * ha);
        diag[k - 1] = (ha + hb) / 3.0 + hb * (ha + hb) / (6.0 * ha);
        sup[k - 1] = 0.0;

        // Thomas elimination.
        let mut c_star = vec![0.0; k];
        let mut r_star = vec![0.0; k];
        c_star[0] = sup[0] / diag[0];
        r_star[0] = rhs[0] / diag[0];
        for j in 1..k {
            let denom = diag[j] - sub[j] * c_star[j - 1];
            c_star[j] = if j < k - 1 { sup[j] / denom } else { 0.0 };
            r_star[j] = (rhs[j] - sub[j] * r_star[j - 1]) / denom;
        }
        m[k] = r_star[k - 1];
        for j in (0..k - 1).rev() {
            m[j + 1] = r_star[j] - c_star[j] * m[j + 2];
        }
        m[0] = ((h[0] + h[1]) * m[1] - h[0] * m[2]) / h[1];
        m[n - 1] = ((ha + hb) * m[n - 2] - hb * m[n - 3]) / ha;

        Ok(CubicSpline {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m,
        })
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.m[i] + b * self.m[i + 1]
    }

    /// Exact integral of the cubic pieces over `[a, b]`. The end cubics are
    /// extended where `[a, b]` slightly exceeds the node range.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let anti = |x: f64| -> f64 {
            let i = self.segment(x);
            let h = self.xs[i + 1] - self.xs[i];
            let ta = (self.xs[i + 1] - x) / h;
            let tb = (x - self.xs[i]) / h;
            // Antiderivative of the segment form, fixed at the left node.
            let base: f64 = (0..i)
                .map(|j| {
                    let hj = self.xs[j + 1] - self.xs[j];
                    hj * (self.ys[j] + self.ys[j + 1]) / 2.0
                        - hj * hj * hj * (self.m[j] + self.m[j + 1]) / 24.0
                })
                .sum();
            let quarter = |t: f64| t * t * t * t / 4.0;
            base + h
                * ((1.0 - ta * ta) / 2.0 * self.ys[i]
                    + tb * tb / 2.0 * self.ys[i + 1]
                    + h * h / 6.0
                        * ((quarter(1.0) - quarter(ta) - (1.0 - ta * ta) / 2.0) * self.m[i]
                            + (quarter(tb) - tb * tb / 2.0) * self.m[i + 1]))
        };
        anti(b) - anti(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Vec<f64> {
        (0..=n).map(|i| i as f64 * PI / n as f64).collect()
    }

    #[test]
    fn interpolates_cubic_polynomials() {
        let xs = grid(9);
        let f = |x: f64| 1.5 - 2.0 * x + 0.7 * x * x + 0.3 * x * x * x;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let s = CubicSpline::not_a_knot(&xs, &ys).unwrap();
        for k in 0..60 {
            let x = k as f64 * PI / 59.0;
            assert_relative_eq!(s.eval(x), f(x), max_relative = 1e-12, epsilon = 1e-12);
            assert_relative_eq!(s.deriv(x), -2.0 + 1.4 * x + 0.9 * x * x, max_relative = 1e-10, epsilon = 1e-10);
            assert_relative_eq!(s.deriv2(x), 1.4 + 1.8 * x, max_relative = 1e-9, epsilon = 1e-9);
        }
        assert_relative_eq!(
            s.integrate(0.0, PI),
            1.5 * PI - PI * PI + 0.7 * PI.powi(3) / 3.0 + 0.3 * PI.powi(4) / 4.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn second_derivative_accuracy_on_smooth_data() {
        let xs = grid(100);
        let ys: Vec<f64> = xs.iter().map(|&x| (x.cosh() - 1.0) / 2.0).collect();
        let s = CubicSpline::not_a_knot(&xs, &ys).unwrap();
        // Interior second-derivative error of an interpolating cubic spline
        // is O(h^2); check a conservative bound.
        for k in 2..99 {
            let x = xs[k];
            let err = (s.deriv2(x) - x.cosh() / 2.0).abs();
            assert!(err < 5e-3, "err {err:.3e} at x = {x}");
        }
    }

    #[test]
    fn rejects_unsorted_nodes() {
        assert!(CubicSpline::not_a_knot(&[0.0, 0.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
