//! Spherical Bessel functions and Legendre polynomials.
//!
//! Both characteristic-function evaluation and the Gelfand-Levitan series
//! need whole sequences j_0(x)..j_n(x) at once, for orders up to ~10^3 and
//! arguments up to ~10^4 * pi. Sequences are generated by the three-term
//! recurrence: downward (Miller style, normalized against a closed form)
//! when the order is comparable to or larger than the argument, upward from
//! j_0, j_1 in the oscillatory regime where that is stable.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Arguments below this are treated as zero, where j_n(0) = [n == 0].
const SMALL_ARG: f64 = 1e-8;
/// Rescaling threshold for the downward recurrence.
const BIG: f64 = 1e250;
const BIG_INV: f64 = 1e-250;

/// a / b with the denominator pre-scaled to unit magnitude. The plain
/// complex division squares |b|, which underflows for the tiny unnormalized
/// values the downward recurrence produces.
fn div_scaled(a: Complex64, b: Complex64) -> Complex64 {
    let m = b.re.abs().max(b.im.abs());
    Complex64::new(a.re / m, a.im / m) / Complex64::new(b.re / m, b.im / m)
}

/// j_0(x)..j_{n_max}(x) at a fixed real argument.
#[derive(Clone, Debug)]
pub struct BesselSequence {
    argument: f64,
    values: Vec<f64>,
}

impl BesselSequence {
    pub fn argument(&self) -> f64 {
        self.argument
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self, n: usize) -> f64 {
        self.values[n]
    }
}

/// Spherical Bessel functions of the first kind, j_0(x) .. j_{n_max}(x).
///
/// ```
/// use weylrec::special::spherical_bessel_sequence;
/// let seq = spherical_bessel_sequence(std::f64::consts::PI, 1).unwrap();
/// assert!(seq.order(0).abs() < 1e-15);                       // j_0(pi) = 0
/// assert!((seq.order(1) - 1.0 / std::f64::consts::PI).abs() < 1e-15);
/// ```
pub fn spherical_bessel_sequence(x: f64, n_max: usize) -> Result<BesselSequence> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!(
            "spherical Bessel argument must be finite, got {x}"
        )));
    }
    let values = bessel_values_real(x, n_max);
    Ok(BesselSequence { argument: x, values })
}

fn bessel_values_real(x: f64, n_max: usize) -> Vec<f64> {
    let n = n_max;
    let mut vals = vec![0.0_f64; n + 1];
    if x.abs() < SMALL_ARG {
        vals[0] = 1.0;
        return vals;
    }
    let j0 = x.sin() / x;
    vals[0] = j0;
    if n == 0 {
        return vals;
    }
    let j1 = x.sin() / (x * x) - x.cos() / x;
    if (n as f64) <= 0.5 * x.abs() - 2.0 && x.abs() > 20.0 {
        // Oscillatory regime: the upward recurrence is stable while n < |x|.
        vals[1] = j1;
        for k in 1..n {
            vals[k + 1] = (2 * k + 1) as f64 / x * vals[k] - vals[k - 1];
        }
        return vals;
    }

    // Downward Miller recurrence with seed (0, tiny). The start order must
    // clear both the requested order and the turning point at |x|, or the
    // minimal solution does not dominate and the seed mixture survives.
    let margin = (10.0 + 2.0 * (n as f64).max(x.abs()).sqrt()).ceil() as usize;
    let start = n.max(x.abs().ceil() as usize) + margin;
    let mut fp = 0.0_f64; // f_{k+1}
    let mut fc = 1e-300_f64; // f_k, k = start
    let mut k = start;
    loop {
        if k <= n {
            vals[k] = fc;
        }
        if k == 0 {
            break;
        }
        let fm = (2 * k + 1) as f64 / x * fc - fp;
        fp = fc;
        fc = fm;
        k -= 1;
        if fc.abs() > BIG {
            fp *= BIG_INV;
            fc *= BIG_INV;
            // Already-stored values sit at indices > k; keep ratios intact.
            let lo = (k + 1).min(n + 1);
            for v in &mut vals[lo..=n] {
                *v *= BIG_INV;
            }
        }
    }
    let scale = if j0.abs() > 1e-3 {
        j0 / vals[0]
    } else {
        j1 / vals[1]
    };
    for v in &mut vals {
        *v *= scale;
    }
    vals
}

/// Same recurrences over complex arithmetic, for spectral points off the
/// real line. Componentwise contract is identical to the real version.
pub fn spherical_bessel_sequence_complex(x: Complex64, n_max: usize) -> Result<Vec<Complex64>> {
    if !x.re.is_finite() || !x.im.is_finite() {
        return Err(Error::InvalidInput(format!(
            "spherical Bessel argument must be finite, got {x}"
        )));
    }
    let n = n_max;
    let mut vals = vec![Complex64::new(0.0, 0.0); n + 1];
    if x.norm() < SMALL_ARG {
        vals[0] = Complex64::new(1.0, 0.0);
        return Ok(vals);
    }
    let j0 = x.sin() / x;
    vals[0] = j0;
    if n == 0 {
        return Ok(vals);
    }
    let j1 = x.sin() / (x * x) - x.cos() / x;

    let margin = (10.0 + 2.0 * (n as f64).max(x.norm()).sqrt()).ceil() as usize;
    let start = n.max(x.norm().ceil() as usize) + margin;
    let mut fp = Complex64::new(0.0, 0.0);
    let mut fc = Complex64::new(1e-300, 0.0);
    let mut k = start;
    loop {
        if k <= n {
            vals[k] = fc;
        }
        if k == 0 {
            break;
        }
        let fm = (2 * k + 1) as f64 / x * fc - fp;
        fp = fc;
        fc = fm;
        k -= 1;
        if fc.re.abs().max(fc.im.abs()) > BIG {
            fp *= BIG_INV;
            fc *= BIG_INV;
            let lo = (k + 1).min(n + 1);
            for v in &mut vals[lo..=n] {
                *v *= BIG_INV;
            }
        }
    }
    let scale = if j0.norm() > 1e-3 {
        div_scaled(j0, vals[0])
    } else {
        div_scaled(j1, vals[1])
    };
    for v in &mut vals {
        *v *= scale;
    }
    Ok(vals)
}

/// Legendre polynomial P_n(t) on [-1, 1] by the three-term recurrence.
/// P_n(1) = 1 propagates exactly.
pub fn legendre_eval(n: usize, t: f64) -> Result<f64> {
    if !(t.abs() <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "Legendre argument must satisfy |t| <= 1 + 1e-12, got {t}"
        )));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let mut pm = 1.0;
    let mut pc = t;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * t * pc - kf * pm) / (kf + 1.0);
        pm = pc;
        pc = next;
    }
    Ok(pc)
}
