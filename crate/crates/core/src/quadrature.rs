//! Gauss-Legendre quadrature with node-doubling error control.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tolerances::{GL_NODES, QUAD_TOL};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// A fixed rule mapped onto arbitrary intervals.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    }

    fn composite<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, panels: usize, f: &mut F) -> f64 {
        let width = (hi - lo) / panels as f64;
        (0..panels)
            .map(|k| {
                let a = lo + k as f64 * width;
                self.integrate(a, a + width, &mut *f)
            })
            .sum()
    }
}

const MAX_PANELS: usize = 64;

/// Integrates `f` over `[lo, hi]` with a 64-node rule per panel, comparing
/// against the 128-node rule and splitting into more panels until the two
/// agree to [`QUAD_TOL`].
pub fn integrate<F: FnMut(f64) -> f64>(lo: f64, hi: f64, mut f: F) -> Result<f64> {
    if hi == lo {
        return Ok(0.0);
    }
    let coarse = GaussLegendre::new(GL_NODES);
    let fine = GaussLegendre::new(2 * GL_NODES);
    let mut panels = 1;
    let mut diff = f64::INFINITY;
    while panels <= MAX_PANELS {
        let a = coarse.composite(lo, hi, panels, &mut f);
        let b = fine.composite(lo, hi, panels, &mut f);
        diff = (a - b).abs();
        if diff <= QUAD_TOL {
            return Ok(b);
        }
        panels *= 2;
    }
    Err(Error::QuadratureNotConverged { lo, hi, diff })
}
