//! Adaptive Gauss-Legendre integration.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes per panel.
pub const GL_NODES: usize = 16;
const MAX_DEPTH: u32 = 24;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GL_NODES))
}

/// Nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    h * rule().iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>()
}

/// Integrates `f` over [a, b], bisecting panels until a panel and its two
/// halves agree to within `tol` (split proportionally between halves).
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let whole = panel(f, a, b);
    let mut worst = 0.0f64;
    let v = refine(f, a, b, whole, tol, 0, &mut worst);
    if worst > tol {
        return Err(Error::Accuracy {
            achieved: worst,
            target: tol,
        });
    }
    Ok(v)
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32, worst: &mut f64) -> f64 {
    let m = (a + b) / 2.0;
    let (l, r) = (panel(f, a, m), panel(f, m, b));
    let err = (l + r - whole).abs();
    if err <= tol || depth >= MAX_DEPTH {
        if err > tol {
            *worst = worst.max(err);
        }
        return l + r;
    }
    refine(f, a, m, l, tol / 2.0, depth + 1, worst) + refine(f, m, b, r, tol / 2.0, depth + 1, worst)
}
