//! Potentials and boundary constants defining a Sturm-Liouville problem
//! -y'' + q(x) y = rho^2 y on (0, pi) with y'(0) - h y(0) = 0 and
//! y'(pi) + H y(pi) = 0.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::adaptive_piecewise_quad;

type QFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Zero,
    Closure(Arc<QFn>),
    Table { xs: Arc<Vec<f64>>, qs: Arc<Vec<f64>> },
}

/// A potential `q` on `[0, pi]` together with the Robin constants `h`
/// (left) and `H` (right, stored as `big_h`).
#[derive(Clone)]
pub struct PotentialSpec {
    label: String,
    kind: Kind,
    breakpoints: Arc<Vec<f64>>,
    pub h: f64,
    pub big_h: f64,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("label", &self.label)
            .field("h", &self.h)
            .field("big_h", &self.big_h)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl PotentialSpec {
    pub fn zero(h: f64, big_h: f64) -> Self {
        PotentialSpec {
            label: "zero".into(),
            kind: Kind::Zero,
            breakpoints: Arc::new(Vec::new()),
            h,
            big_h,
        }
    }

    /// Potential from a closure, with the interior points where `q` is not
    /// smooth declared so integration meshes can align with them.
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        breakpoints: Vec<f64>,
        h: f64,
        big_h: f64,
    ) -> Self {
        PotentialSpec {
            label: label.into(),
            kind: Kind::Closure(Arc::new(f)),
            breakpoints: Arc::new(breakpoints),
            h,
            big_h,
        }
    }

    /// Sampled potential with linear interpolation between nodes.
    pub fn from_table(
        label: impl Into<String>,
        xs: Vec<f64>,
        qs: Vec<f64>,
        h: f64,
        big_h: f64,
    ) -> Result<Self> {
        if xs.len() != qs.len() || xs.len() < 2 {
            return Err(Error::InvalidInput(
                "potential table needs matching x/q columns with at least two rows".into(),
            ));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidInput(
                    "potential table abscissae must be strictly increasing".into(),
                ));
            }
        }
        let breakpoints: Vec<f64> = xs
            .iter()
            .copied()
            .filter(|&x| x > 1e-12 && x < PI - 1e-12)
            .collect();
        Ok(PotentialSpec {
            label: label.into(),
            kind: Kind::Table {
                xs: Arc::new(xs),
                qs: Arc::new(qs),
            },
            breakpoints: Arc::new(breakpoints),
            h,
            big_h,
        })
    }

    /// Built-in test potentials `q1`..`q5`.
    pub fn catalog(name: &str, h: f64, big_h: f64) -> Option<Self> {
        let sqrt3 = 3.0_f64.sqrt();
        let sqrt6 = 6.0_f64.sqrt();
        match name {
            "zero" | "q0" => Some(Self::zero(h, big_h)),
            "q1" => Some(Self::from_fn(
                "q1",
                |x| 16.0 / (PI * PI) * x * x * (2.0 - 8.0 * x / PI).exp(),
                vec![],
                h,
                big_h,
            )),
            "q2" => Some(Self::from_fn(
                "q2",
                |x| (3.0 - (x * x - 3.0).abs()).abs(),
                vec![sqrt3, sqrt6],
                h,
                big_h,
            )),
            "q3" => Some(Self::from_fn(
                "q3",
                |x| {
                    if x <= PI / 8.0 {
                        0.0
                    } else if x <= PI / 4.0 {
                        -12.0 * x / PI + 1.5
                    } else if x < 3.0 * PI / 8.0 {
                        12.0 * x / PI - 4.5
                    } else if x < 3.0 * PI / 5.0 {
                        0.0
                    } else if x < 4.0 * PI / 5.0 {
                        4.0
                    } else {
                        2.0
                    }
                },
                vec![PI / 8.0, PI / 4.0, 3.0 * PI / 8.0, 3.0 * PI / 5.0, 4.0 * PI / 5.0],
                h,
                big_h,
            )),
            "q4" => Some(Self::from_fn(
                "q4",
                move |x| {
                    // Antiderivative of q2 from 0.
                    if x <= sqrt3 {
                        x * x * x / 3.0
                    } else if x <= sqrt6 {
                        6.0 * x - x * x * x / 3.0 - 4.0 * sqrt3
                    } else {
                        x * x * x / 3.0 - 6.0 * x + 8.0 * sqrt6 - 4.0 * sqrt3
                    }
                },
                vec![sqrt3, sqrt6],
                h,
                big_h,
            )),
            "q5" => Some(Self::from_fn(
                "q5",
                |x| (x.exp() - x * x) / 12.0,
                vec![],
                h,
                big_h,
            )),
            _ => None,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn q(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Closure(f) => f(x),
            Kind::Table { xs, qs } => {
                let n = xs.len();
                if x <= xs[0] {
                    return qs[0];
                }
                if x >= xs[n - 1] {
                    return qs[n - 1];
                }
                let i = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
                    Ok(i) => return qs[i],
                    Err(i) => i - 1,
                };
                let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                qs[i] + t * (qs[i + 1] - qs[i])
            }
        }
    }

    /// Same problem with a different left Robin constant.
    pub fn with_h(&self, h: f64) -> Self {
        let mut s = self.clone();
        s.h = h;
        s
    }

    /// The reflected potential q(pi - x) with the boundary roles swapped;
    /// used to integrate right-normalized solutions with forward sweeps.
    pub fn reflected(&self) -> Self {
        let inner = self.clone();
        let mut breakpoints: Vec<f64> = self.breakpoints.iter().map(|&b| PI - b).collect();
        breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
        PotentialSpec {
            label: format!("{}-reflected", self.label),
            kind: Kind::Closure(Arc::new(move |x| inner.q(PI - x))),
            breakpoints: Arc::new(breakpoints),
            h: self.big_h,
            big_h: self.h,
        }
    }

    /// Integral of q over [0, pi], computed adaptively.
    pub fn integral_q(&self) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            _ => adaptive_piecewise_quad(&|x| self.q(x), 0.0, PI, &self.breakpoints, 1e-13),
        }
    }

    /// omega = h + H + (1/2) integral of q: the constant entering the leading
    /// asymptotics of the characteristic function.
    pub fn omega(&self) -> f64 {
        self.h + self.big_h + 0.5 * self.integral_q()
    }

    /// Rough lower bound for q over [0, pi] from sampling; used to size
    /// negative-eigenvalue scan windows.
    pub fn min_estimate(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..=2048 {
            let x = i as f64 * PI / 2048.0;
            m = m.min(self.q(x));
        }
        for &b in self.breakpoints.iter() {
            m = m.min(self.q(b - 1e-9)).min(self.q(b + 1e-9));
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn q1_peak_is_one() {
        let p = PotentialSpec::catalog("q1", 1.0, 2.0).unwrap();
        assert_relative_eq!(p.q(PI / 4.0), 1.0, max_relative = 1e-14);
        assert_eq!(p.q(0.0), 0.0);
    }

    #[test]
    fn q2_piecewise_shape() {
        let p = PotentialSpec::catalog("q2", 1.0, 2.0).unwrap();
        assert_relative_eq!(p.q(1.0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(p.q(3.0_f64.sqrt()), 3.0, max_relative = 1e-12);
        assert!(p.q(6.0_f64.sqrt()).abs() < 1e-12);
        assert_relative_eq!(p.q(PI), PI * PI - 6.0, max_relative = 1e-13);
    }

    #[test]
    fn q3_plateau_values() {
        let p = PotentialSpec::catalog("q3", 1.0, 2.0).unwrap();
        assert_eq!(p.q(0.1), 0.0);
        assert_relative_eq!(p.q(PI / 4.0), -1.5, max_relative = 1e-13);
        assert_eq!(p.q(0.7 * PI), 4.0);
        assert_eq!(p.q(0.9 * PI), 2.0);
    }

    #[test]
    fn q4_is_antiderivative_of_q2() {
        let p2 = PotentialSpec::catalog("q2", 0.0, 0.0).unwrap();
        let p4 = PotentialSpec::catalog("q4", 0.0, 0.0).unwrap();
        // Continuity at the joins plus a quadrature spot check.
        for &x in &[3.0_f64.sqrt(), 6.0_f64.sqrt()] {
            assert_relative_eq!(p4.q(x - 1e-9), p4.q(x + 1e-9), epsilon = 1e-7);
        }
        let quad = crate::numeric::adaptive_piecewise_quad(
            &|x| p2.q(x),
            0.0,
            2.0,
            p2.breakpoints(),
            1e-12,
        );
        assert_relative_eq!(p4.q(2.0), quad, max_relative = 1e-10);
    }

    #[test]
    fn table_interpolates_linearly() {
        let p = PotentialSpec::from_table("tab", vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 0.0], 0.0, 0.0)
            .unwrap();
        assert_relative_eq!(p.q(0.5), 1.0);
        assert_relative_eq!(p.q(1.5), 1.0);
        assert_eq!(p.q(3.0), 0.0);
    }

    #[test]
    fn reflection_swaps_ends() {
        let p = PotentialSpec::catalog("q1", 1.0, 2.0).unwrap();
        let r = p.reflected();
        assert_relative_eq!(r.q(0.3), p.q(PI - 0.3), max_relative = 1e-14);
        assert_eq!(r.h, 2.0);
        assert_eq!(r.big_h, 1.0);
    }

    #[test]
    fn integral_of_q1() {
        // 16/pi^2 * int x^2 exp(2 - 8x/pi) dx over [0, pi], via the exact
        // incomplete-gamma expression.
        let p = PotentialSpec::catalog("q1", 1.0, 2.0).unwrap();
        let exact = PI / 32.0 * 2.0_f64.exp() * (2.0 - (-8.0_f64).exp() * 82.0);
        assert_relative_eq!(p.integral_q(), exact, max_relative = 1e-11);
    }
}
