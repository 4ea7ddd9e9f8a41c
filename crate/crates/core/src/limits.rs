//! Reference laws and the statistical tests of the polymer's limit laws and
//! scaling limits.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::doob::{sample_polymer, simulate_q_terminal, PolymerEnsemble, QChain, DEFAULT_ESS_FLOOR};
use crate::error::{Error, Result};
use crate::harmonic::Harmonic;
use crate::kernel::{kernel_series, BoxSpec, Generator, Region, SweepRequest};
use crate::lattice::{summarize_chain, Site};
use crate::quadrature::gauss_legendre_panels;
use crate::rng::replicate;
use crate::stats::{energy_distance, ks, ks_weighted, tv_weighted, MeanEstimate};

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / 2f64.sqrt()))
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Tabulated `1 − Z_{β,y}`, continued beyond the grid by the `y^{-1/2}` decay of `Z`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LastZeroTable {
    pub beta: f64,
    pub step: f64,
    pub partition: Vec<f64>,
}

impl LastZeroTable {
    /// `Z_{β,y}` on `[0, y_max]` from one kernel sweep, `d = 1`.
    pub fn new(beta: f64, y_max: f64, step: f64) -> Result<Self> {
        if !(beta < 0.0) {
            return Err(Error::InvalidArgument("the last-zero law needs β < 0".into()));
        }
        let n = (y_max / step).ceil() as usize;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
        let bx = BoxSpec::for_time(y_max, 1)?;
        let s = kernel_series(beta, &bx, &Site::on_line(0), &times)?;
        Ok(LastZeroTable {
            beta,
            step,
            partition: s.total,
        })
    }

    pub fn y_max(&self) -> f64 {
        (self.partition.len() - 1) as f64 * self.step
    }

    pub fn partition(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        let u = y / self.step;
        let i = u.floor() as usize;
        if i + 1 >= self.partition.len() {
            let last = *self.partition.last().expect("non-empty");
            return last * (self.y_max() / y).sqrt();
        }
        let f = u - i as f64;
        (1.0 - f) * self.partition[i] + f * self.partition[i + 1]
    }

    pub fn cdf(&self, y: f64) -> f64 {
        (1.0 - self.partition(y)).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReferenceLaw {
    Exp { rate: f64 },
    /// `P(N = k) = (1 − p)^k p`, `k ≥ 0`.
    Geom { success: f64 },
    LastZero { table: LastZeroTable },
    SignedBessel3Endpoint,
    SignedMeanderEndpoint,
    Bessel3Endpoint,
    /// `|M_1|`, density `x e^{−x²/2}`.
    MeanderEndpoint,
    HalfNormal,
}

impl ReferenceLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            ReferenceLaw::Exp { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            ReferenceLaw::Geom { success } => {
                if x < 0.0 {
                    0.0
                } else {
                    1.0 - (1.0 - success).powf(x.floor() + 1.0)
                }
            }
            ReferenceLaw::LastZero { table } => table.cdf(x),
            ReferenceLaw::SignedBessel3Endpoint => normal_cdf(x) - x * normal_pdf(x),
            ReferenceLaw::SignedMeanderEndpoint => {
                let e = 0.5 * (-0.5 * x * x).exp();
                if x < 0.0 {
                    e
                } else {
                    1.0 - e
                }
            }
            ReferenceLaw::Bessel3Endpoint => {
                if x <= 0.0 {
                    0.0
                } else {
                    2.0 * normal_cdf(x) - 1.0 - 2.0 * x * normal_pdf(x)
                }
            }
            ReferenceLaw::MeanderEndpoint => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-0.5 * x * x).exp_m1()
                }
            }
            ReferenceLaw::HalfNormal => {
                if x <= 0.0 {
                    0.0
                } else {
                    erf(x / 2f64.sqrt())
                }
            }
        }
    }

    pub fn pmf(&self, k: u64) -> f64 {
        match self {
            ReferenceLaw::Geom { success } => (1.0 - success).powi(k as i32) * success,
            _ => 0.0,
        }
    }

    /// Checks monotonicity on a grid and the limits at the ends of the support.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = match self {
            ReferenceLaw::Exp { rate } => (0.0, 60.0 / rate),
            ReferenceLaw::Geom { success } => (-1.0, 60.0 / success),
            ReferenceLaw::LastZero { .. } => (0.0, 1e12),
            _ => (-40.0, 40.0),
        };
        let n = 4000;
        let mut prev = self.cdf(lo - 1e-9);
        if prev.abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("cdf at lower end is {prev}")));
        }
        for i in 0..=n {
            // geometric spacing for the heavy last-zero tail
            let x = if matches!(self, ReferenceLaw::LastZero { .. }) {
                (i as f64 / n as f64 * hi.ln()).exp() - 1.0
            } else {
                lo + (hi - lo) * i as f64 / n as f64
            };
            let v = self.cdf(x);
            if v < prev - 1e-12 || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("cdf not monotone at {x}")));
            }
            prev = v;
        }
        if (1.0 - prev).abs() > 1e-5 {
            return Err(Error::InvalidArgument(format!("cdf at upper end is {prev}")));
        }
        Ok(())
    }
}

/// `((1/2)|x|e^{−x²/2}, (1/√(2π))x²e^{−x²/2})`: signed meander and signed
/// Bessel-3 endpoint densities.
pub fn reference_endpoint_densities(x: f64) -> (f64, f64) {
    let g = (-0.5 * x * x).exp();
    (0.5 * x.abs() * g, x * x * g / (2.0 * PI).sqrt())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImhofRow {
    pub name: String,
    pub meander_side: f64,
    pub bessel_side: f64,
}

/// `∫ f(x) x e^{−x²/2} dx` against `∫ f(x) x^{-1} √(2/π) x² e^{−x²/2} dx / √(2/π)`
/// on `[0, ∞)`, for a fixed battery of test functions.
pub fn imhof_endpoint_check() -> Vec<ImhofRow> {
    let fs: Vec<(&str, Box<dyn Fn(f64) -> f64>)> = vec![
        ("one", Box::new(|_| 1.0)),
        ("x", Box::new(|x| x)),
        ("cos", Box::new(|x: f64| x.cos())),
        ("indicator_below_1", Box::new(|x| if x < 1.0 { 1.0 } else { 0.0 })),
        ("exp_minus_x", Box::new(|x: f64| (-x).exp())),
    ];
    let c = (2.0 / PI).sqrt();
    fs.into_iter()
        .map(|(name, f)| {
            let meander = integrate_half_line(|x| f(x) * x * (-0.5 * x * x).exp());
            let bessel = integrate_half_line(|x| f(x) / x * c * x * x * (-0.5 * x * x).exp()) / c;
            ImhofRow {
                name: name.into(),
                meander_side: meander,
                bessel_side: bessel,
            }
        })
        .collect()
}

fn integrate_half_line(f: impl Fn(f64) -> f64) -> f64 {
    // breakpoint at 1 for the indicator test function
    gauss_legendre_panels(&f, 0.0, 1.0, 8, 20) + gauss_legendre_panels(&f, 1.0, 14.0, 64, 20)
}

/// `E[1/R_1]` under the Bessel-3 endpoint density, by quadrature.
pub fn bessel_inverse_moment() -> f64 {
    let c = (2.0 / PI).sqrt();
    integrate_half_line(|x| c * x * (-0.5 * x * x).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSReport {
    pub name: String,
    pub statistic: f64,
    pub n: usize,
    pub threshold: f64,
    pub pass: bool,
    pub ess: Option<f64>,
    pub skipped: bool,
}

impl KSReport {
    pub fn new(name: &str, statistic: f64, n: usize, threshold: f64, ess: Option<f64>) -> Self {
        KSReport {
            name: name.into(),
            statistic,
            n,
            threshold,
            pass: statistic <= threshold,
            ess,
            skipped: false,
        }
    }

    pub fn skipped(name: &str, threshold: f64) -> Self {
        KSReport {
            name: name.into(),
            statistic: 0.0,
            n: 0,
            threshold,
            pass: true,
            ess: None,
            skipped: true,
        }
    }
}

/// Thresholds of the three last-times tests.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryThresholds {
    pub occupation_ks: f64,
    pub visits_tv: f64,
    pub last_zero_ks: f64,
}

impl Default for CorollaryThresholds {
    fn default() -> Self {
        CorollaryThresholds {
            occupation_ks: 0.03,
            visits_tv: 0.02,
            last_zero_ks: 0.04,
        }
    }
}

/// Largest visit count compared individually in the geometric test.
pub const VISIT_KMAX: u64 = 10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub occupation: KSReport,
    pub visits: KSReport,
    pub last_zero: KSReport,
    pub ess: f64,
    pub n: usize,
}

fn check_d1_negative(h: &Harmonic) -> Result<()> {
    let p = h.params();
    if p.d != 1 || !(p.beta < 0.0) {
        return Err(Error::InvalidArgument("limit-law tests need d = 1 and β < 0".into()));
    }
    Ok(())
}

fn occupation_report(h: &Harmonic, e: &PolymerEnsemble, thr: f64) -> KSReport {
    let law = ReferenceLaw::Exp { rate: -h.params().beta };
    let s: Vec<(f64, f64)> = e.runs.iter().map(|r| (r.summary.stats.occupation_time, r.weight)).collect();
    KSReport::new("occupation_time", ks_weighted(&s, |x| law.cdf(x)), e.runs.len(), thr, Some(e.ess))
}

fn visits_report(h: &Harmonic, e: &PolymerEnsemble, thr: f64) -> KSReport {
    let b = h.params().beta;
    let law = ReferenceLaw::Geom { success: -b / (1.0 - b) };
    let s: Vec<(u64, f64)> = e.runs.iter().map(|r| (r.summary.stats.zero_visit_count, r.weight)).collect();
    KSReport::new("visit_count_tv", tv_weighted(&s, |k| law.pmf(k), VISIT_KMAX), e.runs.len(), thr, Some(e.ess))
}

fn last_zero_report(h: &Harmonic, e: &PolymerEnsemble, thr: f64) -> Result<KSReport> {
    let table = LastZeroTable::new(h.params().beta, 4.0 * e.t.max(50.0), 0.25)?;
    let law = ReferenceLaw::LastZero { table };
    let s: Vec<(f64, f64)> = e.runs.iter().map(|r| (r.summary.stats.last_zero_time, r.weight)).collect();
    Ok(KSReport::new("last_zero_time", ks_weighted(&s, |x| law.cdf(x)), e.runs.len(), thr, Some(e.ess)))
}

/// All three last-times tests from one weighted ensemble.
pub fn corollary_tests(h: &Harmonic, t: f64, n: usize, seed: u64, thr: &CorollaryThresholds) -> Result<CorollaryReport> {
    check_d1_negative(h)?;
    let e = sample_polymer(h, t, n, seed, &[], DEFAULT_ESS_FLOOR)?;
    Ok(CorollaryReport {
        occupation: occupation_report(h, &e, thr.occupation_ks),
        visits: visits_report(h, &e, thr.visits_tv),
        last_zero: last_zero_report(h, &e, thr.last_zero_ks)?,
        ess: e.ess,
        n,
    })
}

/// Weighted `𝔍(t)` under the polymer against `Exp(−β)`.
pub fn occupation_law_test(h: &Harmonic, t: f64, n: usize, seed: u64, threshold: f64) -> Result<KSReport> {
    check_d1_negative(h)?;
    if t == 0.0 {
        return Ok(KSReport::skipped("occupation_time", threshold));
    }
    let e = sample_polymer(h, t, n, seed, &[], DEFAULT_ESS_FLOOR)?;
    Ok(occupation_report(h, &e, threshold))
}

/// Weighted `N_t` against `Geom(−β/(1−β))`, total variation over `k ≤ 10` plus the tail.
pub fn visit_count_test(h: &Harmonic, t: f64, n: usize, seed: u64, threshold: f64) -> Result<KSReport> {
    check_d1_negative(h)?;
    let e = sample_polymer(h, t, n, seed, &[], DEFAULT_ESS_FLOOR)?;
    Ok(visits_report(h, &e, threshold))
}

/// Weighted `σ_t` against the law with cdf `1 − Z_{β,y}`.
pub fn last_zero_test(h: &Harmonic, t: f64, n: usize, seed: u64, threshold: f64) -> Result<KSReport> {
    check_d1_negative(h)?;
    let e = sample_polymer(h, t, n, seed, &[], DEFAULT_ESS_FLOOR)?;
    last_zero_report(h, &e, threshold)
}

/// Exact law of `σ_t` under `P_{β,t}` at finite `t`, `d = 1`:
/// `P(σ_t ≤ y) = Σ_{z≠0} p_β(y, 0, z) P_z(τ_0 > t − y) / Z_{β,t}`.
pub fn last_zero_exact_cdf(beta: f64, t: f64, y_grid: &[f64]) -> Result<Vec<f64>> {
    let bx = BoxSpec::for_time(t, 1)?;
    let region = bx.region();
    let z_t = kernel_series(beta, &bx, &Site::on_line(0), &[t])?.total[0];
    let free = Generator::new(region.clone(), beta);
    let mut out = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        if y >= t {
            out.push(1.0);
            continue;
        }
        let snap = crate::kernel::sweep(
            &free,
            &Site::on_line(0),
            &SweepRequest {
                times: &[],
                snapshot_times: &[y],
                weight: None,
            },
        )?
        .snapshots
        .remove(0);
        // survival of the walk killed at 0, from every z, by symmetry of the killed generator
        let survive = killed_survival(&region, &snap.values, t - y)?;
        out.push(survive / z_t);
    }
    Ok(out)
}

fn killed_survival(region: &Region, start: &[f64], s: f64) -> Result<f64> {
    // split the region at the origin into the two half-lines, each absorbing at 0
    let mut total = 0.0;
    let l = region.len() as i32 / 2;
    let g = Generator::new(Region::new(1, &[1], &[l])?, 0.0);
    for side in [1, -1] {
        let weight: Vec<f64> = (1..=l).map(|k| start[region.index(&Site::on_line(side * k)).expect("inside")]).collect();
        total += propagate_vector(&g, &weight, s);
    }
    Ok(total)
}

/// `Σ_y (e^{sG} v)(y)` for a symmetric generator `G` without potential.
fn propagate_vector(g: &Generator, v: &[f64], s: f64) -> f64 {
    let window = crate::kernel::PoissonWindow::new(s, crate::kernel::POISSON_TAIL);
    let mut cur = v.to_vec();
    let mut next = vec![0.0; v.len()];
    let mut acc = 0.0;
    for k in 0..window.end() {
        if k >= window.start {
            acc += window.weights[k - window.start] * crate::kernel::pairwise_sum(&cur);
        }
        // P = I + G for rate 1, zero potential
        g.apply(&cur, &mut next);
        for (n, c) in next.iter_mut().zip(&cur) {
            *n += c;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    acc
}

/// The three last-times laws against the terminal behaviour of `Q_0`:
/// `𝔍(∞)` vs `Exp(−β)` and `N_∞` vs `Geom(−β/(1−β))`.
pub fn q_terminal_tests(h: &Harmonic, n: usize, radius: i64, seed: u64) -> Result<(KSReport, KSReport, MeanEstimate)> {
    check_d1_negative(h)?;
    let o = Site::on_line(0);
    let runs = replicate(n, seed, |_, rng| simulate_q_terminal(h, &o, radius, rng));
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let b = h.params().beta;
    let occ: Vec<f64> = runs.iter().map(|r| r.occupation_time).collect();
    let exp = ReferenceLaw::Exp { rate: -b };
    let geom = ReferenceLaw::Geom { success: -b / (1.0 - b) };
    let counts: Vec<(u64, f64)> = runs.iter().map(|r| (r.zero_visit_count, 1.0)).collect();
    Ok((
        KSReport::new("terminal_occupation", ks(&occ, |x| exp.cdf(x)), n, f64::NAN, None),
        KSReport::new("terminal_visits_tv", tv_weighted(&counts, |k| geom.pmf(k), VISIT_KMAX), n, f64::NAN, None),
        MeanEstimate::from_samples(&occ),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointSource {
    Q0,
    Polymer,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EndpointReport {
    pub ks: KSReport,
    /// Weighted `P(X_n > 0)`.
    pub positive_fraction: MeanEstimate,
    /// `|P(X_n > 0) − 1/2| ≤ 3σ`.
    pub sign_symmetric: bool,
}

/// `X_n / √n` under `Q_0` (vs signed Bessel-3) or the polymer (vs signed meander).
pub fn scaling_endpoint_test(
    source: EndpointSource,
    h: &Harmonic,
    n_time: f64,
    n_paths: usize,
    seed: u64,
    threshold: f64,
) -> Result<EndpointReport> {
    check_d1_negative(h)?;
    let scale = n_time.sqrt();
    let (values, weights, ess): (Vec<f64>, Vec<f64>, Option<f64>) = match source {
        EndpointSource::Q0 => {
            let chain = QChain::new(h);
            let v = replicate(n_paths, seed, |_, rng| {
                summarize_chain(&chain, Site::on_line(0), n_time, &[], rng).end.coord(0) as f64 / scale
            });
            chain.check()?;
            let w = vec![1.0; v.len()];
            (v, w, None)
        }
        EndpointSource::Polymer => {
            let e = sample_polymer(h, n_time, n_paths, seed, &[], DEFAULT_ESS_FLOOR)?;
            let v = e.runs.iter().map(|r| r.summary.end.coord(0) as f64 / scale).collect();
            (v, e.weights(), Some(e.ess))
        }
    };
    let (law, name) = match source {
        EndpointSource::Q0 => (ReferenceLaw::SignedBessel3Endpoint, "q0_endpoint"),
        EndpointSource::Polymer => (ReferenceLaw::SignedMeanderEndpoint, "polymer_endpoint"),
    };
    let pairs: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
    let stat = ks_weighted(&pairs, |x| law.cdf(x));
    let pos: Vec<f64> = values.iter().map(|v| (*v > 0.0) as u8 as f64).collect();
    let positive_fraction = MeanEstimate::weighted(&pos, &weights);
    // the origin itself is neither sign; compare against the symmetric share
    let zero: Vec<f64> = values.iter().map(|v| (*v == 0.0) as u8 as f64).collect();
    let at_zero = MeanEstimate::weighted(&zero, &weights).mean;
    let target = 0.5 * (1.0 - at_zero);
    Ok(EndpointReport {
        ks: KSReport::new(name, stat, n_paths, threshold, ess),
        positive_fraction,
        sign_symmetric: positive_fraction.covers(target, 3.0, 0.0),
    })
}

/// `|B_t|` for a standard 3-D Brownian motion at the sorted `times`, `n` samples.
pub fn bessel3_samples(times: &[f64], n: usize, seed: u64) -> Vec<Vec<f64>> {
    replicate(n, seed, |_, rng| {
        let mut b = [0.0f64; 3];
        let mut prev = 0.0;
        times
            .iter()
            .map(|&t| {
                let s = (t - prev).sqrt();
                for c in b.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *c += s * z;
                }
                prev = t;
                b.iter().map(|c| c * c).sum::<f64>().sqrt()
            })
            .collect()
    })
}

/// KS of `|B_1|` against the Bessel-3 endpoint law.
pub fn bessel_reference_self_test(n: usize, seed: u64, threshold: f64) -> KSReport {
    let s: Vec<f64> = bessel3_samples(&[1.0], n, seed).into_iter().map(|v| v[0]).collect();
    let law = ReferenceLaw::Bessel3Endpoint;
    KSReport::new("bessel3_self_test", ks(&s, |x| law.cdf(x)), n, threshold, None)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultitimeReport {
    pub times: Vec<f64>,
    pub energy_distance: f64,
    /// Energy distance between two independent reference samples of the same sizes.
    pub null_energy_distance: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Energy distance between `(|X_{nt_i}|/√n)_i` under `Q_0` and Bessel-3 marginals.
pub fn scaling_multitime_test(h: &Harmonic, times: &[f64], n_time: f64, n_paths: usize, seed: u64, threshold: f64) -> Result<MultitimeReport> {
    check_d1_negative(h)?;
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("times must be increasing in (0, 1]".into()));
    }
    let marks: Vec<f64> = times.iter().map(|t| t * n_time).collect();
    let scale = n_time.sqrt();
    let chain = QChain::new(h);
    let walk: Vec<Vec<f64>> = replicate(n_paths, seed, |_, rng| {
        summarize_chain(&chain, Site::on_line(0), n_time, &marks, rng)
            .marks
            .iter()
            .map(|s| s.coord(0).abs() as f64 / scale)
            .collect()
    });
    chain.check()?;
    let reference = bessel3_samples(times, n_paths, seed ^ 0x5bd1_e995);
    let null_reference = bessel3_samples(times, n_paths, seed ^ 0x1b87_3593);
    let ed = energy_distance(&walk, &reference);
    let null = energy_distance(&null_reference, &reference);
    Ok(MultitimeReport {
        times: times.to_vec(),
        energy_distance: ed,
        null_energy_distance: null,
        threshold,
        pass: ed <= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureSpec;
    use approx::assert_relative_eq;

    #[test]
    fn reference_laws_are_valid() {
        for law in [
            ReferenceLaw::Exp { rate: 1.0 },
            ReferenceLaw::Geom { success: 0.5 },
            ReferenceLaw::SignedBessel3Endpoint,
            ReferenceLaw::SignedMeanderEndpoint,
            ReferenceLaw::Bessel3Endpoint,
            ReferenceLaw::MeanderEndpoint,
            ReferenceLaw::HalfNormal,
        ] {
            law.validate().unwrap();
        }
    }

    #[test]
    fn endpoint_densities_integrate_to_one() {
        let m = gauss_legendre_panels(|x| reference_endpoint_densities(x).0, -14.0, 14.0, 200, 10);
        let b = gauss_legendre_panels(|x| reference_endpoint_densities(x).1, -14.0, 14.0, 200, 10);
        assert_relative_eq!(m, 1.0, epsilon = 1e-10);
        assert_relative_eq!(b, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn cdfs_match_densities() {
        for x in [-2.0, -0.3, 0.4, 1.7] {
            let h = 1e-5;
            let (m, b) = reference_endpoint_densities(x);
            let dm = (ReferenceLaw::SignedMeanderEndpoint.cdf(x + h) - ReferenceLaw::SignedMeanderEndpoint.cdf(x - h)) / (2.0 * h);
            let db = (ReferenceLaw::SignedBessel3Endpoint.cdf(x + h) - ReferenceLaw::SignedBessel3Endpoint.cdf(x - h)) / (2.0 * h);
            assert_relative_eq!(dm, m, epsilon = 1e-6);
            assert_relative_eq!(db, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn bessel_inverse_moment_value() {
        assert_relative_eq!(bessel_inverse_moment(), (2.0 / PI).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn imhof_relation_holds() {
        for row in imhof_endpoint_check() {
            assert_relative_eq!(row.meander_side, row.bessel_side, epsilon = 1e-10);
        }
    }

    #[test]
    fn geometric_pmf_values() {
        let g = ReferenceLaw::Geom { success: 0.5 };
        assert_relative_eq!(g.pmf(0), 0.5);
        assert_relative_eq!(g.pmf(3), 1.0 / 16.0);
        let g3 = ReferenceLaw::Geom { success: 0.75 };
        assert_relative_eq!(g3.pmf(1), 0.1875);
    }

    #[test]
    fn last_zero_law_is_a_distribution() {
        let t = LastZeroTable::new(-1.0, 200.0, 0.25).unwrap();
        let law = ReferenceLaw::LastZero { table: t };
        law.validate().unwrap();
    }

    #[test]
    fn exact_finite_time_law_ends_at_one() {
        let c = last_zero_exact_cdf(-1.0, 30.0, &[0.0, 10.0, 29.999, 30.0]).unwrap();
        assert!(c.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(c[2] > 0.9 && c[2] <= 1.0 + 1e-9, "{c:?}");
    }

    #[test]
    fn skipped_at_time_zero() {
        let h = Harmonic::from_beta(1, -1.0, QuadratureSpec::default()).unwrap();
        assert!(occupation_law_test(&h, 0.0, 10, 1, 0.03).unwrap().skipped);
    }

    #[test]
    fn bessel_reference_small() {
        let r = bessel_reference_self_test(20_000, 4, 0.02);
        assert!(r.pass, "{r:?}");
    }
}
