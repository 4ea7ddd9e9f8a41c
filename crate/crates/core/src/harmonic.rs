//! The Lyapunov exponent `λ(β)` and the positive solution `ψ_β` of
//! `(H_β − λ(β))ψ = 0`, `ψ(0) = 1`.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{check_dim, Site};
use crate::quadrature::QuadratureSpec;
use crate::resolvent::{
    a_zero, beta_critical, decay_ratio_1d, free_diagonal_resolvent, killed_resolvent_unit_sphere, resolvent_integral,
    SpectralParam,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub beta: f64,
    pub beta_cr: f64,
    pub lambda_beta: f64,
    pub phase: Phase,
}

impl ModelParams {
    pub fn new(d: usize, beta: f64, quad: &QuadratureSpec) -> Result<Self> {
        check_dim(d)?;
        if !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta must be finite, got {beta}")));
        }
        let beta_cr = beta_critical(d, quad)?;
        let phase = if beta < beta_cr {
            Phase::Subcritical
        } else if beta == beta_cr {
            Phase::Critical
        } else {
            Phase::Supercritical
        };
        let lambda_beta = if phase == Phase::Supercritical {
            solve_lambda(beta, d, quad)?
        } else {
            0.0
        };
        Ok(ModelParams {
            d,
            beta,
            beta_cr,
            lambda_beta,
            phase,
        })
    }
}

fn solve_lambda(beta: f64, d: usize, quad: &QuadratureSpec) -> Result<f64> {
    let f = |lam: f64| -> Result<f64> {
        let i = free_diagonal_resolvent(&SpectralParam::real(lam)?, d, quad)?;
        Ok(1.0 - beta * i.re)
    };
    // I(λ) < 1/λ, so f(β) > 0; f < 0 near 0 above β_cr
    let (mut lo, mut hi) = (0.0, beta);
    if f(hi)? <= 0.0 {
        return Err(Error::Bracket(format!("1 − βI(λ) has no sign change on (0, {beta}]")));
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi || hi - lo <= 1e-15 * hi {
            break;
        }
        if f(m)? > 0.0 {
            hi = m;
        } else {
            lo = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `λ(β)`: zero up to `β_cr`, otherwise the root of `β I(λ) = 1` in `(0, β)`.
pub fn lambda_of_beta(beta: f64, d: usize, quad: &QuadratureSpec) -> Result<f64> {
    Ok(ModelParams::new(d, beta, quad)?.lambda_beta)
}

/// `ψ_β` with a per-site cache keyed by the symmetry class of the site.
#[derive(Clone, Debug)]
pub struct Harmonic {
    params: ModelParams,
    quad: QuadratureSpec,
    cache: Arc<RwLock<HashMap<Site, f64>>>,
}

impl Harmonic {
    pub fn new(params: ModelParams, quad: QuadratureSpec) -> Self {
        Harmonic {
            params,
            quad,
            cache: Arc::new(RwLock::new(HashMap::new())),
        }
    }

    pub fn from_beta(d: usize, beta: f64, quad: QuadratureSpec) -> Result<Self> {
        Ok(Self::new(ModelParams::new(d, beta, &quad)?, quad))
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    /// `ψ_β(x)`.
    pub fn psi(&self, x: &Site) -> Result<f64> {
        if x.dim() != self.params.d {
            return Err(Error::InvalidArgument(format!("site {x} is not in dimension {}", self.params.d)));
        }
        if x.is_origin() {
            return Ok(1.0);
        }
        if let Some(closed) = self.closed_form(x) {
            return Ok(closed);
        }
        let key = x.canonical();
        if let Some(v) = self.cache.read().get(&key) {
            return Ok(*v);
        }
        let v = self.evaluate(&key)?;
        self.cache.write().insert(key, v);
        Ok(v)
    }

    fn closed_form(&self, x: &Site) -> Option<f64> {
        let p = &self.params;
        if p.d != 1 {
            return None;
        }
        let n = x.l1() as i32;
        Some(match p.phase {
            Phase::Supercritical => decay_ratio_1d(Complex64::new(p.lambda_beta, 0.0)).re.powi(n),
            _ => 1.0 - p.beta * n as f64,
        })
    }

    fn evaluate(&self, x: &Site) -> Result<f64> {
        let p = &self.params;
        match (p.phase, p.d) {
            (Phase::Supercritical, _) => {
                let lam = Complex64::new(p.lambda_beta, 0.0);
                let r = resolvent_integral(lam, x, &self.quad)?.value.re;
                let i = resolvent_integral(lam, &Site::origin(p.d)?, &self.quad)?.value.re;
                Ok(r / i)
            }
            (_, 3) => Ok(1.0 - p.beta / p.beta_cr * self.escape_probability(x)?),
            _ => Ok(1.0 - p.beta * a_zero(x, &self.quad)?),
        }
    }

    /// `P_x(τ_0 = ∞)` from the killed resolvent, cached alongside `ψ`.
    pub fn escape_probability(&self, x: &Site) -> Result<f64> {
        if x.is_origin() || x.dim() < 3 {
            return Ok(0.0);
        }
        let hit = killed_resolvent_unit_sphere(&x.canonical(), &self.quad)? / (2 * x.dim()) as f64;
        Ok(1.0 - hit)
    }

    /// `ψ_β` on every site of `[−r, r]^d`, in region order.
    pub fn psi_on_box(&self, r: i32) -> Result<Vec<(Site, f64)>> {
        let region = crate::kernel::Region::new(self.params.d, &[-r; 3][..self.params.d], &[r; 3][..self.params.d])?;
        region.sites().map(|x| Ok((x, self.psi(&x)?))).collect()
    }
}

/// `max |(H_β − λ(β))ψ_β(x)|` over `|x|_∞ < radius`.
pub fn harmonic_residual(h: &Harmonic, radius: i32) -> Result<f64> {
    let p = *h.params();
    let d = p.d;
    let inner = radius - 1;
    let region = crate::kernel::Region::new(d, &[-inner; 3][..d], &[inner; 3][..d])?;
    let mut worst: f64 = 0.0;
    for x in region.sites() {
        let px = h.psi(&x)?;
        let avg = x.neighbors().map(|y| h.psi(&y)).sum::<Result<f64>>()? / (2 * d) as f64;
        let pot = if x.is_origin() { p.beta } else { 0.0 };
        let r = avg - px + pot * px - p.lambda_beta * px;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}
