//! The wetting model on `Z_+`: the walk killed on leaving `[0, ∞)`, tilted by
//! `e^{β′ 𝔍(t)}`. At `0` the generator is `f ↦ f(1)/2 + (β′ − 1) f(0)`.

use serde::{Deserialize, Serialize};

use crate::doob::{sample_polymer, DEFAULT_ESS_FLOOR};
use crate::error::{Error, Result};
use crate::harmonic::Harmonic;
use crate::kernel::{default_radius, side_exit_bound, simpson, sweep, BoxSpec, Generator, KernelGrid, Region, SweepRequest, POISSON_TAIL};
use crate::lattice::{summarize_chain, JumpRates, Site, MAX_DIM};
use crate::limits::{KSReport, ReferenceLaw};
use crate::quadrature::QuadratureSpec;
use crate::rng::replicate;
use crate::stats::ks_weighted;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WettingParams {
    pub beta_prime: f64,
}

impl WettingParams {
    pub fn new(beta_prime: f64) -> Result<Self> {
        if !beta_prime.is_finite() {
            return Err(Error::InvalidArgument(format!("β′ must be finite, got {beta_prime}")));
        }
        Ok(WettingParams { beta_prime })
    }

    /// `β = 2β′ − 1`.
    pub fn beta(&self) -> f64 {
        2.0 * self.beta_prime - 1.0
    }

    /// `φ(x) = 1 + (1 − 2β′) x`.
    pub fn phi(&self, x: i32) -> f64 {
        1.0 + (1.0 - 2.0 * self.beta_prime) * x as f64
    }
}

fn half_line_generator(p: &WettingParams, l: i32) -> Result<Generator> {
    Ok(Generator::new(Region::half_line(l)?, p.beta_prime))
}

/// Upper-side truncation only: leaving through `−1` is part of the model.
fn half_line_bound(p: &WettingParams, l: i32, x: i32, t: f64) -> f64 {
    let c = p.beta_prime.max(0.0);
    (c * t).exp() * (side_exit_bound((l + 1 - x) as f64, t, 1) + POISSON_TAIL)
}

/// `p̃(t, x, ·)` on `[0, l]`.
pub fn wetting_kernel(p: &WettingParams, l: i32, t: f64, x: i32) -> Result<KernelGrid> {
    if x < 0 || x > l {
        return Err(Error::InvalidArgument(format!("start {x} outside [0, {l}]")));
    }
    let g = half_line_generator(p, l)?;
    let mut s = sweep(
        &g,
        &Site::on_line(x),
        &SweepRequest {
            times: &[],
            snapshot_times: &[t],
            weight: None,
        },
    )?;
    let mut grid = s.snapshots.remove(0);
    grid.truncation_error_bound = half_line_bound(p, l, x, t);
    Ok(grid)
}

/// `max_{0 ≤ x < l} |(H̃_{β′} φ)(x)|`.
pub fn wetting_harmonic_residual(p: &WettingParams, l: i32) -> Result<f64> {
    let g = half_line_generator(p, l)?;
    let phi: Vec<f64> = (0..=l).map(|x| p.phi(x)).collect();
    let mut out = vec![0.0; phi.len()];
    g.apply(&phi, &mut out);
    Ok(out[..l as usize].iter().fold(0.0, |m, v| m.max(v.abs())))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentRow {
    pub order: u32,
    pub wetting: f64,
    pub polymer: f64,
    pub difference: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityReport {
    pub beta_prime: f64,
    pub beta: f64,
    pub t: f64,
    pub radius: u32,
    pub endpoint_max_difference: f64,
    pub endpoint_tolerance: f64,
    pub endpoint_pass: bool,
    pub moments: Vec<MomentRow>,
    pub moment_tolerance: f64,
    pub moments_pass: bool,
    pub truncation_error_bound: f64,
    pub pass: bool,
}

pub const IDENTITY_ENDPOINT_TOL: f64 = 1e-8;
pub const IDENTITY_MOMENT_TOL: f64 = 1e-6;
/// Time step of the occupation-moment convolutions.
pub const MOMENT_TIME_STEP: f64 = 0.01;

/// Normalized `(E 𝔍(t), E 𝔍(t)²)` of the tilted chain started at the origin,
/// from `E[𝔍e^{V}] = ∫ p(s,0,0) Z_{t−s} ds` and
/// `E[𝔍²e^{V}] = 2∫ p(s,0,0) E[𝔍(t−s)e^{V}] ds`.
fn occupation_moments(g: &Generator, t: f64) -> Result<[f64; 2]> {
    let mut n = (t / MOMENT_TIME_STEP).round() as usize;
    n += n % 2;
    let h = t / n as f64;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let d = g.region().dim();
    let s = sweep(
        g,
        &Site::origin(d)?,
        &SweepRequest {
            times: &times,
            snapshot_times: &[],
            weight: None,
        },
    )?;
    let (a, z) = (&s.at_origin, &s.total);
    // first moment at the even grid times 2jh
    let m1: Vec<f64> = (0..=n / 2)
        .map(|j| {
            let k = 2 * j;
            let f: Vec<f64> = (0..=k).map(|i| a[i] * z[k - i]).collect();
            if k == 0 {
                0.0
            } else {
                simpson(&f, h)
            }
        })
        .collect();
    let f: Vec<f64> = (0..=n / 2).map(|j| a[2 * j] * m1[n / 2 - j]).collect();
    let m2 = 2.0 * simpson(&f, 2.0 * h);
    let zt = z[n];
    Ok([m1[n / 2] / zt, m2 / zt])
}

/// Compares the normalized wetting kernel at `t` with the `|·|`-pushforward
/// of the homopolymer with `β = 2β′ − 1`, both computed exactly.
pub fn wetting_identity_check(p: &WettingParams, t: f64) -> Result<IdentityReport> {
    if !(p.beta_prime < 0.5) {
        return Err(Error::InvalidArgument("the identity check needs β′ < 1/2".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let radius = default_radius(t);
    let l = radius as i32;
    let w = wetting_kernel(p, l, t, 0)?;
    let bx = BoxSpec::new(radius, 1)?;
    let pol = crate::kernel::propagate(p.beta(), &bx, t, &Site::on_line(0))?;
    let (zw, zp) = (w.total(), pol.total());
    let mut worst: f64 = 0.0;
    for y in 0..=l {
        let lhs = w.value(&Site::on_line(y)) / zw;
        let mut rhs = pol.value(&Site::on_line(y));
        if y > 0 {
            rhs += pol.value(&Site::on_line(-y));
        }
        worst = worst.max((lhs - rhs / zp).abs());
    }
    let mw = occupation_moments(&half_line_generator(p, l)?, t)?;
    let mp = occupation_moments(&Generator::new(bx.region(), p.beta()), t)?;
    let moments: Vec<MomentRow> = (0..2)
        .map(|k| MomentRow {
            order: k as u32 + 1,
            wetting: mw[k],
            polymer: mp[k],
            difference: (mw[k] - mp[k]).abs(),
        })
        .collect();
    let endpoint_pass = worst <= IDENTITY_ENDPOINT_TOL;
    let moments_pass = moments.iter().all(|m| m.difference <= IDENTITY_MOMENT_TOL);
    Ok(IdentityReport {
        beta_prime: p.beta_prime,
        beta: p.beta(),
        t,
        radius,
        endpoint_max_difference: worst,
        endpoint_tolerance: IDENTITY_ENDPOINT_TOL,
        endpoint_pass,
        moments,
        moment_tolerance: IDENTITY_MOMENT_TOL,
        moments_pass,
        truncation_error_bound: w.truncation_error_bound.max(pol.truncation_error_bound),
        pass: endpoint_pass && moments_pass,
    })
}

/// The walk on `Z_+` reflected at the origin, the chain of `β′ = 1/2`.
#[derive(Clone, Copy, Debug)]
pub struct ReflectedWalk;

impl JumpRates for ReflectedWalk {
    fn rates(&self, x: &Site, rates: &mut [f64; 2 * MAX_DIM]) -> f64 {
        rates[0] = 0.5;
        rates[1] = if x.coord(0) > 0 { 0.5 } else { 0.0 };
        rates[0] + rates[1]
    }
}

pub const REFLECTED_KS_THRESHOLD: f64 = 0.02;

/// `X_n/√n` of the reflected walk against the half-normal law.
pub fn reflected_scaling_test(n_time: f64, n_paths: usize, seed: u64, threshold: f64) -> Result<KSReport> {
    if !(n_time >= 0.0) {
        return Err(Error::InvalidArgument("n_time must be nonnegative".into()));
    }
    if n_time == 0.0 {
        return Ok(KSReport::skipped("reflected_endpoint", threshold));
    }
    let scale = n_time.sqrt();
    let s: Vec<(f64, f64)> = replicate(n_paths, seed, |_, rng| {
        let end = summarize_chain(&ReflectedWalk, Site::on_line(0), n_time, &[], rng).end;
        (end.coord(0) as f64 / scale, 1.0)
    });
    let law = ReferenceLaw::HalfNormal;
    Ok(KSReport::new("reflected_endpoint", ks_weighted(&s, |x| law.cdf(x)), n_paths, threshold, None))
}

/// For `β′ < 1/2`: `|X_n|/√n` under the homopolymer with `β = 2β′ − 1`
/// against the meander endpoint law.
pub fn wetting_meander_endpoint_test(p: &WettingParams, n_time: f64, n_paths: usize, seed: u64, threshold: f64) -> Result<KSReport> {
    if !(p.beta_prime < 0.5) {
        return Err(Error::InvalidArgument("the meander limit needs β′ < 1/2".into()));
    }
    let h = Harmonic::from_beta(1, p.beta(), QuadratureSpec::default())?;
    let e = sample_polymer(&h, n_time, n_paths, seed, &[], DEFAULT_ESS_FLOOR)?;
    let scale = n_time.sqrt();
    let s: Vec<(f64, f64)> = e
        .runs
        .iter()
        .map(|r| (r.summary.end.coord(0).abs() as f64 / scale, r.weight))
        .collect();
    let law = ReferenceLaw::MeanderEndpoint;
    Ok(KSReport::new("wetting_meander_endpoint", ks_weighted(&s, |x| law.cdf(x)), n_paths, threshold, Some(e.ess)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::simulate_free_walk;
    use approx::assert_relative_eq;

    #[test]
    fn parameter_map() {
        assert_eq!(WettingParams::new(0.0).unwrap().beta(), -1.0);
        assert_eq!(WettingParams::new(0.5).unwrap().beta(), 0.0);
        for bp in [-1.0, 0.1, 0.49, 0.51, 2.0] {
            let p = WettingParams::new(bp).unwrap();
            assert_eq!(bp < 0.5, p.beta() < 0.0);
        }
    }

    #[test]
    fn kernel_at_time_zero() {
        let g = wetting_kernel(&WettingParams::new(0.2).unwrap(), 20, 0.0, 3).unwrap();
        assert_eq!(g.value(&Site::on_line(3)), 1.0);
        assert_eq!(g.total(), 1.0);
    }

    #[test]
    fn reflected_kernel_is_markov() {
        let p = WettingParams::new(0.5).unwrap();
        let g = wetting_kernel(&p, 80, 20.0, 0).unwrap();
        assert!((g.total() - 1.0).abs() <= g.truncation_error_bound);
        assert!(g.truncation_error_bound < 1e-6);
    }

    #[test]
    fn mass_decreases_below_boundary() {
        let p = WettingParams::new(0.2).unwrap();
        let mut prev = 1.0;
        for t in [0.5, 1.0, 2.0, 5.0, 10.0] {
            let g = wetting_kernel(&p, 60, t, 0).unwrap();
            assert!(g.values.iter().all(|v| *v >= 0.0));
            assert!(g.total() < prev);
            prev = g.total();
        }
    }

    #[test]
    fn phi_is_harmonic() {
        for bp in [-1.0, 0.0, 0.3, 0.5, 0.9] {
            let r = wetting_harmonic_residual(&WettingParams::new(bp).unwrap(), 40).unwrap();
            assert!(r < 1e-12, "{bp} {r}");
        }
    }

    #[test]
    fn killed_kernel_matches_monte_carlo() {
        let p = WettingParams::new(0.0).unwrap();
        let t = 4.0;
        let g = wetting_kernel(&p, 40, t, 5).unwrap();
        let n = 40_000;
        let ends: Vec<Option<i32>> = (0..n)
            .map(|i| {
                let path = simulate_free_walk(1, Site::on_line(5), t, 1000 + i).unwrap();
                let stays = path.sites().iter().all(|s| s.coord(0) >= 0);
                stays.then(|| path.end().coord(0))
            })
            .collect();
        for y in [3, 5, 7] {
            let hits = ends.iter().filter(|e| **e == Some(y)).count() as f64 / n as f64;
            let se = (hits * (1.0 - hits) / n as f64).sqrt();
            assert!((hits - g.value(&Site::on_line(y))).abs() < 4.0 * se, "{y}");
        }
        let alive = ends.iter().filter(|e| e.is_some()).count() as f64 / n as f64;
        assert!((alive - g.total()).abs() < 4.0 * (alive * (1.0 - alive) / n as f64).sqrt());
    }

    #[test]
    fn moments_of_free_walk() {
        // β = 0 on Z: E 𝔍(t) = ∫ e^{-s} I_0(s) ds
        let g = Generator::new(Region::new(1, &[-60], &[60]).unwrap(), 0.0);
        let m = occupation_moments(&g, 2.0).unwrap();
        let f = |s: f64| crate::kernel::propagate(0.0, &BoxSpec::new(60, 1).unwrap(), s, &Site::on_line(0)).unwrap().value(&Site::on_line(0));
        let vals: Vec<f64> = (0..=200).map(|i| f(i as f64 * 0.01)).collect();
        assert_relative_eq!(m[0], simpson(&vals, 0.01), epsilon = 1e-9);
    }

    #[test]
    fn reflected_point_mass_at_zero_time() {
        assert!(reflected_scaling_test(0.0, 10, 1, 0.02).unwrap().skipped);
    }

    #[test]
    fn identity_rejects_boundary() {
        assert!(wetting_identity_check(&WettingParams::new(0.5).unwrap(), 10.0).is_err());
    }
}
