//! Bracketed scalar root refinement (bisection with secant/inverse-quadratic
//! acceleration, Brent style).

/// Refine a root of `f` inside `[a, b]`, where `fa = f(a)` and `fb = f(b)`
/// have opposite signs. Iterates until `stop(x, fx)` returns true or the
/// bracket collapses to machine width; returns the best abscissa seen.
pub fn refine_bracket(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    stop: &dyn Fn(f64, f64) -> bool,
) -> f64 {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    // Invariant: root in [a, b] (unordered), |fb| <= |fa|; b is the current best.
    let mut c = a;
    let mut fc = fa;
    let mut mflag = true;
    let mut d = c;

    for _ in 0..200 {
        if stop(b, fb) || fb == 0.0 {
            return b;
        }
        if (a - b).abs() <= 2.0 * f64::EPSILON * (a.abs() + b.abs() + 1e-30) {
            return b;
        }
        let mut s = if fa != fc && fb != fc {
            // Inverse quadratic interpolation.
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let cond = !((s > lo.min(b) && s < lo.max(b))
            || (s > b.min(lo) && s < b.max(lo)))
            || (mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            || (mflag && (b - c).abs() < f64::EPSILON * (b.abs() + 1.0))
            || (!mflag && (c - d).abs() < f64::EPSILON * (c.abs() + 1.0));
        if cond {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    b
}
