//! Globally adaptive tensor Gauss–Legendre cubature on `[0, π]^d`.
//!
//! Cells are cubes. Each cell is integrated with an `n`-point tensor rule and
//! an `⌈n/2⌉`-point rule; their difference is the cell error estimate. The cell
//! with the largest estimate is split into `2^d` children until the summed
//! estimate drops below `abs_tol`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Start from the whole cube.
    TensorGaussLegendre,
    /// Start from a dyadic shell decomposition towards `φ = 0`.
    DyadicNearOrigin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
    pub scheme: Scheme,
    pub abs_tol: f64,
    /// Hard cap on the number of leaf cells.
    pub max_cells: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes_per_axis: 10,
            scheme: Scheme::DyadicNearOrigin,
            abs_tol: 1e-10,
            max_cells: 400_000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(abs_tol: f64) -> Self {
        QuadratureSpec {
            abs_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 8 {
            return Err(Error::InvalidArgument(format!(
                "quadrature.nodes_per_axis must be at least 8, got {}",
                self.nodes_per_axis
            )));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "quadrature.abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        Ok(())
    }
}

/// Value and error estimate of a cubature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        // map to [0, 1]
        Rule {
            x: x.iter().map(|v| 0.5 * (v + 1.0)).collect(),
            w: w.iter().map(|v| 0.5 * v).collect(),
        }
    }

    fn apply<F>(&self, f: &F, d: usize, lo: &[f64; 3], h: f64, pt: &mut [f64; 3]) -> Complex64
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let n = self.x.len();
        let mut sum = Complex64::new(0.0, 0.0);
        let total = n.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut weight = 1.0;
            for k in 0..d {
                let i = rem % n;
                rem /= n;
                pt[k] = lo[k] + h * self.x[i];
                weight *= self.w[i];
            }
            sum += f(&pt[..d]) * weight;
        }
        sum * h.powi(d as i32)
    }
}

struct Cell {
    lo: [f64; 3],
    h: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

struct Integrator<'a, F> {
    f: &'a F,
    d: usize,
    fine: Rule,
    coarse: Rule,
}

impl<F: Fn(&[f64]) -> Complex64> Integrator<'_, F> {
    fn cell(&self, lo: [f64; 3], h: f64) -> Cell {
        let mut pt = [0.0; 3];
        let value = self.fine.apply(self.f, self.d, &lo, h, &mut pt);
        let low = self.coarse.apply(self.f, self.d, &lo, h, &mut pt);
        let error = (value - low).norm();
        Cell {
            lo,
            h,
            value,
            error: if error.is_finite() { error } else { f64::INFINITY },
        }
    }
}

const DYADIC_DEPTH: usize = 12;

/// `(1/π^d) ∫_{[0,π]^d} f(φ) dφ`.
pub fn integrate_cube<F>(f: F, d: usize, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Complex64,
{
    crate::lattice::check_dim(d)?;
    spec.validate()?;
    let integ = Integrator {
        f: &f,
        d,
        fine: Rule::new(spec.nodes_per_axis),
        coarse: Rule::new(spec.nodes_per_axis.div_ceil(2)),
    };
    let scale = PI.powi(d as i32);
    let tol = spec.abs_tol * scale;

    let mut heap = BinaryHeap::new();
    match spec.scheme {
        Scheme::TensorGaussLegendre => heap.push(integ.cell([0.0; 3], PI)),
        Scheme::DyadicNearOrigin => {
            let mut a = PI;
            for _ in 0..DYADIC_DEPTH {
                let h = 0.5 * a;
                for corner in 1..(1usize << d) {
                    let mut lo = [0.0; 3];
                    for (k, v) in lo.iter_mut().enumerate().take(d) {
                        if corner >> k & 1 == 1 {
                            *v = h;
                        }
                    }
                    heap.push(integ.cell(lo, h));
                }
                a = h;
            }
            heap.push(integ.cell([0.0; 3], a));
        }
    }

    let mut total_err: f64 = heap.iter().map(|c| c.error).sum();
    while total_err > tol {
        if heap.len() >= spec.max_cells {
            return Err(Error::Quadrature {
                tol: spec.abs_tol,
                estimate: total_err / scale,
                boxes: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let h = 0.5 * worst.h;
        total_err -= worst.error;
        for corner in 0..(1usize << d) {
            let mut lo = worst.lo;
            for (k, v) in lo.iter_mut().enumerate().take(d) {
                if corner >> k & 1 == 1 {
                    *v += h;
                }
            }
            let c = integ.cell(lo, h);
            total_err += c.error;
            heap.push(c);
        }
        // refresh the running sum now and then to shed cancellation drift
        if heap.len() % 4096 == 0 {
            total_err = heap.iter().map(|c| c.error).sum();
        }
    }

    let mut cells = heap.into_vec();
    cells.sort_by(|a, b| a.error.total_cmp(&b.error));
    let value: Complex64 = cells.iter().map(|c| c.value).sum();
    let error: f64 = cells.iter().map(|c| c.error).sum();
    Ok(Estimate {
        value: value / scale,
        error: error / scale,
    })
}

/// Composite Gauss–Legendre on `[a, b]` with `panels` equal panels.
pub fn gauss_legendre_panels<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, nodes: usize) -> f64 {
    let (x, w) = gauss_legendre(nodes);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            sum += wi * f(lo + 0.5 * h * (xi + 1.0));
        }
    }
    0.5 * h * sum
}
