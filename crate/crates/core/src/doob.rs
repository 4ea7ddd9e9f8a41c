//! The `ψ_β`-transformed chain `Q` and polymer sampling by reweighting.
//!
//! `Q` jumps from `x` to a neighbour `y` at rate `ψ_β(y) / (2d ψ_β(x))`. For
//! `β ≤ β_cr` the polymer measure is `dP_{β,t} = ψ_β(X_t)^{-1} dQ_0 / Z_{β,t}`.

use std::sync::atomic::{AtomicBool, Ordering};

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{Harmonic, Phase};
use crate::kernel::{exit_probability_bound, propagate, BoxSpec, KernelGrid};
use crate::lattice::{simulate_chain, summarize_chain, JumpRates, Path, RunSummary, Site, MAX_DIM};
use crate::rng::{replicate, stream};
use crate::stats::{effective_sample_size, MeanEstimate};

pub const DEFAULT_ESS_FLOOR: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub site: Site,
    pub neighbor_rates: Vec<(Site, f64)>,
}

impl RateTable {
    pub fn total(&self) -> f64 {
        self.neighbor_rates.iter().map(|r| r.1).sum()
    }

    pub fn rate_to(&self, y: &Site) -> Option<f64> {
        self.neighbor_rates.iter().find(|r| r.0 == *y).map(|r| r.1)
    }
}

/// Jump rates of `Q`.
pub fn q_rates(h: &Harmonic, x: &Site) -> Result<RateTable> {
    let d = h.params().d;
    let px = h.psi(x)?;
    let neighbor_rates = x
        .neighbors()
        .map(|y| Ok((y, h.psi(&y)? / (2 * d) as f64 / px)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateTable { site: *x, neighbor_rates })
}

/// `Q` as a [`JumpRates`] source. A failed `ψ` evaluation stops the chain and
/// is reported by [`QChain::check`].
pub struct QChain<'a> {
    h: &'a Harmonic,
    failed: AtomicBool,
}

impl<'a> QChain<'a> {
    pub fn new(h: &'a Harmonic) -> Self {
        QChain {
            h,
            failed: AtomicBool::new(false),
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.failed.load(Ordering::Relaxed) {
            return Err(Error::InvalidArgument("ψ evaluation failed during simulation".into()));
        }
        Ok(())
    }
}

impl JumpRates for QChain<'_> {
    fn rates(&self, x: &Site, rates: &mut [f64; 2 * MAX_DIM]) -> f64 {
        let n = 2 * x.dim();
        let px = match self.h.psi(x) {
            Ok(v) => v,
            Err(_) => {
                self.failed.store(true, Ordering::Relaxed);
                return 0.0;
            }
        };
        let mut total = 0.0;
        for (k, r) in rates[..n].iter_mut().enumerate() {
            match self.h.psi(&x.neighbor(k)) {
                Ok(v) => *r = v / (n as f64 * px),
                Err(_) => {
                    self.failed.store(true, Ordering::Relaxed);
                    return 0.0;
                }
            }
            total += *r;
        }
        total
    }
}

/// A path of `Q` from `start` up to `horizon`.
pub fn simulate_q(h: &Harmonic, start: &Site, horizon: f64, seed: u64) -> Result<Path> {
    let chain = QChain::new(h);
    let mut rng = stream(seed, 0);
    let p = simulate_chain(&chain, *start, horizon, &mut rng)?;
    chain.check()?;
    Ok(p)
}

/// `Q_x(τ_0 < ∞) = P_x(τ_0 < ∞) / ψ_β(x)` for `β ≤ β_cr`.
pub fn q_return_probability(h: &Harmonic, x: &Site) -> Result<f64> {
    if h.params().phase == Phase::Supercritical {
        return Err(Error::InvalidArgument("Q is recurrent above β_cr".into()));
    }
    if x.is_origin() {
        return Ok(1.0);
    }
    let hit = 1.0 - h.escape_probability(x)?;
    Ok(hit / h.psi(x)?)
}

/// Total occupation time at the origin and number of returns over `[0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminalStats {
    pub occupation_time: f64,
    pub zero_visit_count: u64,
}

/// Runs `Q` from `start` until it first reaches `|x|_∞ ≥ radius`; there the
/// remaining future is resolved by a coin with the exact return probability,
/// continuing from the origin on success.
pub fn simulate_q_terminal<R: Rng + ?Sized>(h: &Harmonic, start: &Site, radius: i64, rng: &mut R) -> Result<TerminalStats> {
    let chain = QChain::new(h);
    let n = 2 * start.dim();
    let mut rates = [0.0; 2 * MAX_DIM];
    let mut x = *start;
    let mut occupation_time = 0.0;
    let mut zero_visit_count = 0;
    loop {
        let total = chain.rates(&x, &mut rates);
        chain.check()?;
        if x.is_origin() {
            let hold: f64 = rand_distr::Exp1.sample(rng);
            occupation_time += hold / total;
        }
        let mut u = rng.random::<f64>() * total;
        let mut k = n - 1;
        for (i, r) in rates[..n].iter().enumerate() {
            if u < *r {
                k = i;
                break;
            }
            u -= r;
        }
        x = x.neighbor(k);
        if x.is_origin() {
            zero_visit_count += 1;
        } else if x.linf() >= radius {
            if rng.random::<f64>() >= q_return_probability(h, &x)? {
                return Ok(TerminalStats {
                    occupation_time,
                    zero_visit_count,
                });
            }
            x = Site::origin(start.dim())?;
            zero_visit_count += 1;
        }
    }
}

/// `q_β(t, x, ·)` on a box: `ψ_β(y) p_β(t, x, y) / ψ_β(x)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QKernel {
    pub grid: KernelGrid,
    /// Bound on `1 − Σ_y q(t, x, y)` from truncation.
    pub truncation_error_bound: f64,
}

impl QKernel {
    pub fn row_sum(&self) -> f64 {
        self.grid.total()
    }
}

pub fn q_kernel(h: &Harmonic, bx: &BoxSpec, t: f64, x: &Site) -> Result<QKernel> {
    let p = h.params();
    if p.phase == Phase::Supercritical || p.beta > 0.0 {
        return Err(Error::InvalidArgument("q_kernel needs β ≤ min(β_cr, 0)".into()));
    }
    let mut grid = propagate(p.beta, bx, t, x)?;
    let px = h.psi(x)?;
    for (i, y) in grid.region.clone().sites().enumerate() {
        grid.values[i] *= h.psi(&y)? / px;
    }
    // optional stopping for the martingale e^{β𝔍(t)} ψ(X_t) at the box exit
    let l = bx.radius as i32 + 1;
    let exit: Vec<i32> = (0..p.d).map(|k| if k == 0 { l } else { l - 1 }).collect();
    let psi_max = h.psi(&Site::new(&exit)?)?;
    let bound = psi_max / px * exit_probability_bound(&grid.region, x, t) + crate::kernel::POISSON_TAIL * psi_max / px;
    grid.truncation_error_bound = bound;
    Ok(QKernel {
        grid,
        truncation_error_bound: bound,
    })
}

/// One weighted polymer sample.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedRun {
    pub summary: RunSummary,
    /// `1 / ψ_β(X_t)`.
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct PolymerEnsemble {
    pub t: f64,
    pub runs: Vec<WeightedRun>,
    pub ess: f64,
}

impl PolymerEnsemble {
    pub fn weights(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.weight).collect()
    }

    /// Self-normalized weighted mean of `f`.
    pub fn mean<F: Fn(&WeightedRun) -> f64>(&self, f: F) -> MeanEstimate {
        let x: Vec<f64> = self.runs.iter().map(f).collect();
        MeanEstimate::weighted(&x, &self.weights())
    }

    /// Plain mean of the weights, an estimate of `Z_{β,t}`.
    pub fn partition_estimate(&self) -> MeanEstimate {
        MeanEstimate::from_samples(&self.weights())
    }
}

fn check_polymer_regime(h: &Harmonic) -> Result<()> {
    let p = h.params();
    if !(p.beta < 0.0) || p.d > 2 {
        return Err(Error::InvalidArgument(format!(
            "polymer sampling needs β < 0 and d ∈ {{1, 2}}, got β = {}, d = {}",
            p.beta, p.d
        )));
    }
    Ok(())
}

/// `n` runs of `Q_0` on `[0, t]` weighted by `1/ψ_β(X_t)`, keeping positions at `marks`.
pub fn sample_polymer(h: &Harmonic, t: f64, n: usize, seed: u64, marks: &[f64], ess_floor: f64) -> Result<PolymerEnsemble> {
    check_polymer_regime(h)?;
    if !(t >= 0.0) || marks.iter().any(|m| !(*m >= 0.0 && *m <= t)) || marks.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("marks must be sorted within [0, t]".into()));
    }
    let chain = QChain::new(h);
    let o = Site::origin(h.params().d)?;
    let runs = replicate(n, seed, |_, rng| {
        let summary = summarize_chain(&chain, o, t, marks, rng);
        let weight = h.psi(&summary.end).map(|v| 1.0 / v).unwrap_or(f64::NAN);
        WeightedRun { summary, weight }
    });
    chain.check()?;
    if runs.iter().any(|r| !r.weight.is_finite()) {
        return Err(Error::InvalidArgument("ψ evaluation failed at an endpoint".into()));
    }
    let w: Vec<f64> = runs.iter().map(|r| r.weight).collect();
    let ess = effective_sample_size(&w);
    if ess < ess_floor * n as f64 {
        return Err(Error::EssBelowFloor {
            ess,
            floor: ess_floor * n as f64,
        });
    }
    Ok(PolymerEnsemble { t, runs, ess })
}

/// Full weighted paths, for small ensembles.
pub fn sample_polymer_paths(h: &Harmonic, t: f64, n: usize, seed: u64) -> Result<Vec<(Path, f64)>> {
    check_polymer_regime(h)?;
    let chain = QChain::new(h);
    let o = Site::origin(h.params().d)?;
    let out = replicate(n, seed, |_, rng| simulate_chain(&chain, o, t, rng));
    chain.check()?;
    out.into_iter()
        .map(|p| {
            let p = p?;
            let w = 1.0 / h.psi(&p.end())?;
            Ok((p, w))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DominationRow {
    pub t: f64,
    pub threshold: i64,
    pub from_x: f64,
    pub from_origin: f64,
    pub slack: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DominationReport {
    pub x: i32,
    pub n: usize,
    pub rows: Vec<DominationRow>,
    pub holds: bool,
}

/// `Q_x(|X_t| ≥ a) ≥ Q_0(|X_t| ≥ a) − 3σ` for every `t` and `a`, `d = 1`.
pub fn coupling_domination_test(h: &Harmonic, x: i32, t_grid: &[f64], thresholds: &[i64], n: usize, seed: u64) -> Result<DominationReport> {
    if h.params().d != 1 || x < 0 {
        return Err(Error::InvalidArgument("domination test needs d = 1 and x ≥ 0".into()));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("time grid must be sorted".into()));
    }
    let tmax = t_grid.last().copied().unwrap_or(0.0);
    let chain = QChain::new(h);
    let run = |start: i32, base: u64| {
        replicate(n, base, |_, rng| summarize_chain(&chain, Site::on_line(start), tmax, t_grid, rng).marks)
    };
    let from_x = run(x, seed);
    let from_o = run(0, seed.wrapping_add(0x9e37_79b9));
    chain.check()?;
    let mut rows = Vec::new();
    for (i, &t) in t_grid.iter().enumerate() {
        for &a in thresholds {
            let frac = |s: &[Vec<Site>]| s.iter().filter(|m| m[i].l1() >= a).count() as f64 / n as f64;
            let (px, p0) = (frac(&from_x), frac(&from_o));
            let se = ((px * (1.0 - px) + p0 * (1.0 - p0)) / n as f64).sqrt();
            let slack = 3.0 * se;
            rows.push(DominationRow {
                t,
                threshold: a,
                from_x: px,
                from_origin: p0,
                slack,
                holds: px >= p0 - slack,
            });
        }
    }
    let holds = rows.iter().all(|r| r.holds);
    Ok(DominationReport { x, n, rows, holds })
}

/// Fraction of `Q` runs from `start` that reach the origin before leaving
/// `|x|_∞ < radius` (embedded jump chain).
pub fn q_return_frequency(h: &Harmonic, start: &Site, radius: i64, n: usize, seed: u64) -> Result<MeanEstimate> {
    let chain = QChain::new(h);
    let hits = replicate(n, seed, |_, rng| {
        let mut stop = false;
        let mut hit = false;
        run_chain_until(&chain, *start, rng, |s| {
            if s.is_origin() {
                hit = true;
                stop = true;
            } else if s.linf() >= radius {
                stop = true;
            }
            stop
        });
        hit as u8 as f64
    });
    chain.check()?;
    Ok(MeanEstimate::from_samples(&hits))
}

fn run_chain_until<K: JumpRates, R: Rng + ?Sized>(kernel: &K, start: Site, rng: &mut R, mut stop: impl FnMut(&Site) -> bool) {
    let n = 2 * start.dim();
    let mut rates = [0.0; 2 * MAX_DIM];
    let mut x = start;
    loop {
        let total = kernel.rates(&x, &mut rates);
        if total <= 0.0 {
            return;
        }
        let mut u = rng.random::<f64>() * total;
        let mut k = n - 1;
        for (i, r) in rates[..n].iter().enumerate() {
            if u < *r {
                k = i;
                break;
            }
            u -= r;
        }
        x = x.neighbor(k);
        if stop(&x) {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureSpec;
    use approx::assert_relative_eq;

    fn h1(beta: f64) -> Harmonic {
        Harmonic::from_beta(1, beta, QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn rates_at_and_near_origin() {
        let h = h1(-1.0);
        let r0 = q_rates(&h, &Site::on_line(0)).unwrap();
        assert_eq!(r0.rate_to(&Site::on_line(1)), Some(1.0));
        assert_eq!(r0.rate_to(&Site::on_line(-1)), Some(1.0));
        assert_eq!(r0.total(), 2.0);
        let r1 = q_rates(&h, &Site::on_line(1)).unwrap();
        assert_eq!(r1.rate_to(&Site::on_line(2)), Some(0.75));
        assert_eq!(r1.rate_to(&Site::on_line(0)), Some(0.25));
        let far = q_rates(&h, &Site::on_line(100_000)).unwrap();
        assert!((far.rate_to(&Site::on_line(100_001)).unwrap() - 0.5).abs() < 1e-5);
    }

    #[test]
    fn q_kernel_is_a_markov_kernel() {
        let h = h1(-1.0);
        let bx = BoxSpec::for_time(50.0, 1).unwrap();
        let q = q_kernel(&h, &bx, 50.0, &Site::on_line(0)).unwrap();
        assert!(q.grid.values.iter().all(|v| *v >= 0.0));
        assert!((1.0 - q.row_sum()).abs() <= q.truncation_error_bound.max(1e-12));
    }

    #[test]
    fn polymer_weights_are_self_normalized() {
        let h = h1(-1.0);
        let e = sample_polymer(&h, 20.0, 500, 11, &[], DEFAULT_ESS_FLOOR).unwrap();
        assert_relative_eq!(e.mean(|_| 1.0).mean, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn polymer_rejects_nonnegative_beta() {
        let h = h1(0.0);
        assert!(sample_polymer(&h, 5.0, 10, 1, &[], DEFAULT_ESS_FLOOR).is_err());
    }

    #[test]
    fn return_probability_closed_form() {
        let h = h1(-1.0);
        assert_relative_eq!(q_return_probability(&h, &Site::on_line(1)).unwrap(), 0.5);
        assert_relative_eq!(q_return_probability(&h, &Site::on_line(-4)).unwrap(), 0.2);
    }

    #[test]
    fn terminal_stats_are_finite() {
        let h = h1(-3.0);
        let mut rng = stream(2, 0);
        for _ in 0..50 {
            let s = simulate_q_terminal(&h, &Site::on_line(0), 5, &mut rng).unwrap();
            assert!(s.occupation_time > 0.0);
        }
    }

    #[test]
    fn simulate_q_is_reproducible() {
        let h = h1(-1.0);
        let a = simulate_q(&h, &Site::on_line(0), 30.0, 9).unwrap();
        let b = simulate_q(&h, &Site::on_line(0), 30.0, 9).unwrap();
        assert_eq!(a, b);
    }
}
