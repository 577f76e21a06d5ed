//! Adaptive trapezoid quadrature for spectral-density integrals.
//!
//! Every integrand in this crate is `|psi_hat|^2` for a smooth or
//! piecewise-constant profile, so plain trapezoid with local refinement
//! reaches the 1e-10 relative target quickly.

/// Relative tolerance used for all profile-mass integrals.
pub const QUAD_REL_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 48;
const MIN_PANELS: usize = 64;

/// Integrate `f` over `[a, b]` with adaptive interval bisection.
///
/// The interval is first split into a fixed number of panels so that
/// narrow features (transition bands, bump edges) are not missed by the
/// top-level trapezoid estimate, then each panel is refined until its
/// local error estimate is below `rel_tol` times the running total.
pub fn adaptive_trapezoid(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let coarse: f64 = (0..MIN_PANELS)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / MIN_PANELS as f64;
            let hi = a + (b - a) * (i + 1) as f64 / MIN_PANELS as f64;
            trapezoid(f, lo, hi)
        })
        .sum();
    let scale = coarse.abs().max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    for i in 0..MIN_PANELS {
        let lo = a + (b - a) * i as f64 / MIN_PANELS as f64;
        let hi = a + (b - a) * (i + 1) as f64 / MIN_PANELS as f64;
        total += refine(f, lo, hi, trapezoid(f, lo, hi), rel_tol * scale / MIN_PANELS as f64, 0);
    }
    total
}

fn trapezoid(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    0.5 * (b - a) * (f(a) + f(b))
}

fn refine(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = trapezoid(f, a, m);
    let right = trapezoid(f, m, b);
    let split = left + right;
    if depth >= MAX_DEPTH || (split - whole).abs() <= tol.max(1e-300) {
        // one Richardson step: trapezoid halving has error ~ h^2
        return split + (split - whole) / 3.0;
    }
    refine(f, a, m, left, tol / 2.0, depth + 1) + refine(f, m, b, right, tol / 2.0, depth + 1)
}
