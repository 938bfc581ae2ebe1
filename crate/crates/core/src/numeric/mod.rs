//! Small numerical building blocks shared across the solver stages.

pub mod fit;
pub mod roots;
pub mod spline;

/// 5-point Gauss-Legendre nodes on [-1, 1].
pub(crate) const GAUSS5_T: [f64; 5] = [
    -0.906179845938664,
    -0.538469310105683,
    0.0,
    0.538469310105683,
    0.906179845938664,
];

/// Matching 5-point Gauss-Legendre weights.
pub(crate) const GAUSS5_W: [f64; 5] = [
    0.236926885056189,
    0.478628670499366,
    0.568888888888889,
    0.478628670499366,
    0.236926885056189,
];

/// Composite 5-point Gauss quadrature of `f` over `[a, b]` with `panels`
/// uniform panels.
pub(crate) fn gauss5_composite(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (t, w) in GAUSS5_T.iter().zip(GAUSS5_W.iter()) {
            acc += w * 0.5 * h * f(c + 0.5 * h * t);
        }
    }
    acc
}

/// Doubling composite Gauss quadrature over the pieces delimited by
/// `breakpoints` (interior points of `[a, b]`), until two refinement levels
/// agree to `rel_tol`.
pub(crate) fn adaptive_piecewise_quad(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rel_tol: f64,
) -> f64 {
    let mut edges = vec![a];
    for &bp in breakpoints {
        if bp > a + 1e-14 && bp < b - 1e-14 {
            edges.push(bp);
        }
    }
    edges.push(b);
    let piece_quad = |panels: usize| -> f64 {
        edges
            .windows(2)
            .map(|w| gauss5_composite(f, w[0], w[1], panels))
            .sum()
    };
    let mut panels = 8;
    let mut prev = piece_quad(panels);
    for _ in 0..16 {
        panels *= 2;
        let cur = piece_quad(panels);
        if (cur - prev).abs() <= rel_tol * cur.abs().max(1e-12) {
            return cur;
        }
        prev = cur;
    }
    prev
}
