//! Feynman–Kac kernels `p_β(t, x, y) = E_x[e^{β𝔍(t)} δ_y(X(t))]` on truncated boxes.
//!
//! The generator `H_β = Δ + β δ_0` is restricted to a rectangular region with
//! absorbing exterior and exponentiated by uniformization:
//!
//! ```text
//! e^{tG} = e^{ct} Σ_k Pois(μt; k) P^k,   P = I + (G − cI)/μ,   c = max(β, 0),   μ = 1 + |β|.
//! ```
//!
//! One sweep of `P^k v` serves every time up to the horizon, because the
//! per-step totals and point values are stored.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::lattice::{check_dim, Site};
use crate::quadrature::{integrate_cube, QuadratureSpec};
use crate::resolvent::{free_diagonal_resolvent, one_minus_cos_product, symbol_phi, SpectralParam};

/// Relative Poisson mass dropped by the uniformization window.
pub const POISSON_TAIL: f64 = 1e-12;
pub const MIN_RADIUS: u32 = 10;
pub const DEFAULT_MEMORY_BUDGET: usize = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Absorbing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub radius: u32,
    pub d: usize,
    pub boundary: Boundary,
    /// Maximum number of sites.
    pub memory_budget: usize,
}

impl BoxSpec {
    pub fn new(radius: u32, d: usize) -> Result<Self> {
        let b = BoxSpec {
            radius,
            d,
            boundary: Boundary::Absorbing,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        };
        b.validate()?;
        Ok(b)
    }

    /// `L = ⌈6√t + 10⌉`.
    pub fn for_time(t: f64, d: usize) -> Result<Self> {
        Self::new(default_radius(t), d)
    }

    pub fn with_budget(mut self, sites: usize) -> Result<Self> {
        self.memory_budget = sites;
        self.validate()?;
        Ok(self)
    }

    pub fn site_count(&self) -> usize {
        (2 * self.radius as usize + 1).pow(self.d as u32)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.d)?;
        if self.radius < MIN_RADIUS {
            return Err(Error::InvalidArgument(format!("box radius must be at least {MIN_RADIUS}, got {}", self.radius)));
        }
        if self.site_count() > self.memory_budget {
            return Err(Error::MemoryBudget {
                sites: self.site_count(),
                budget: self.memory_budget,
            });
        }
        Ok(())
    }

    pub fn region(&self) -> Region {
        let l = self.radius as i32;
        Region::new(self.d, &[-l; 3][..self.d], &[l; 3][..self.d]).expect("validated box")
    }
}

pub fn default_radius(t: f64) -> u32 {
    (6.0 * t.max(0.0).sqrt() + 10.0).ceil() as u32
}

/// Axis-aligned block `Π_k [lo_k, hi_k]` of `Z^d`, stored row-major with axis 0 fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    d: usize,
    lo: [i32; 3],
    hi: [i32; 3],
    stride: [usize; 3],
    len: usize,
}

impl Region {
    pub fn new(d: usize, lo: &[i32], hi: &[i32]) -> Result<Self> {
        check_dim(d)?;
        if lo.len() != d || hi.len() != d || lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidArgument("region bounds must be d ordered pairs".into()));
        }
        let mut r = Region {
            d,
            lo: [0; 3],
            hi: [0; 3],
            stride: [0; 3],
            len: 1,
        };
        for k in 0..d {
            r.lo[k] = lo[k];
            r.hi[k] = hi[k];
            r.stride[k] = r.len;
            r.len *= (hi[k] - lo[k] + 1) as usize;
        }
        Ok(r)
    }

    /// `{0, 1, …, l}` in one dimension.
    pub fn half_line(l: i32) -> Result<Self> {
        Self::new(1, &[0], &[l])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, x: &Site) -> bool {
        x.dim() == self.d && (0..self.d).all(|k| (self.lo[k]..=self.hi[k]).contains(&x.coord(k)))
    }

    pub fn index(&self, x: &Site) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        Some((0..self.d).map(|k| (x.coord(k) - self.lo[k]) as usize * self.stride[k]).sum())
    }

    pub fn site(&self, mut idx: usize) -> Site {
        let mut c = [0i32; 3];
        for k in 0..self.d {
            let n = (self.hi[k] - self.lo[k] + 1) as usize;
            c[k] = self.lo[k] + (idx % n) as i32;
            idx /= n;
        }
        Site::new(&c[..self.d]).expect("region dimension is valid")
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.len).map(|i| self.site(i))
    }

    /// Number of steps needed to leave the region from `x`, per axis and direction.
    fn exit_distances(&self, x: &Site) -> Vec<i64> {
        let mut out = Vec::with_capacity(2 * self.d);
        for k in 0..self.d {
            out.push((self.hi[k] - x.coord(k)) as i64 + 1);
            out.push((x.coord(k) - self.lo[k]) as i64 + 1);
        }
        out
    }
}

/// Upper bound on the probability that the rate-1 walk started at `x` leaves
/// `region` before time `t`: reflection plus a Chernoff bound per axis side.
pub fn exit_probability_bound(region: &Region, x: &Site, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    region
        .exit_distances(x)
        .into_iter()
        .map(|a| side_exit_bound(a as f64, t, region.dim()))
        .sum::<f64>()
        .min(1.0)
}

/// Bound on the probability that one coordinate of the rate-1 walk in `Z^d`
/// reaches distance `a` on a given side before time `t`.
pub(crate) fn side_exit_bound(a: f64, t: f64, d: usize) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let rate = t / d as f64;
    let theta = (a / rate).asinh();
    (2.0 * (-(theta * a - rate * (theta.cosh() - 1.0))).exp()).min(1.0)
}

/// Restriction of `Δ + V` to a region with absorbing exterior; `V` is
/// `potential` at the origin and zero elsewhere.
#[derive(Clone, Debug)]
pub struct Generator {
    region: Region,
    potential: f64,
    origin: Option<usize>,
}

impl Generator {
    pub fn new(region: Region, potential: f64) -> Self {
        let origin = Site::origin(region.dim()).ok().and_then(|o| region.index(&o));
        Generator {
            region,
            potential,
            origin,
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn potential(&self) -> f64 {
        self.potential
    }

    /// `out = a · (neighbour sum)/(2d) + diag ⊙ v`, with `diag` constant off the origin.
    fn stencil(&self, v: &[f64], out: &mut [f64], hop: f64, diag: f64, diag_origin: f64) {
        let r = &self.region;
        let d = r.d;
        let mut c = [0i32; 3];
        c[..d].copy_from_slice(&r.lo[..d]);
        for i in 0..r.len {
            let mut s = 0.0;
            for k in 0..d {
                let st = r.stride[k];
                if c[k] > r.lo[k] {
                    s += v[i - st];
                }
                if c[k] < r.hi[k] {
                    s += v[i + st];
                }
            }
            out[i] = hop * s + diag * v[i];
            // advance the odometer
            for k in 0..d {
                if c[k] < r.hi[k] {
                    c[k] += 1;
                    break;
                }
                c[k] = r.lo[k];
            }
        }
        if let Some(o) = self.origin {
            out[o] += (diag_origin - diag) * v[o];
        }
    }

    /// `out = G v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        let hop = 1.0 / (2 * self.region.d) as f64;
        self.stencil(v, out, hop, -1.0, -1.0 + self.potential);
    }

    fn shift(&self) -> f64 {
        self.potential.max(0.0)
    }

    fn rate(&self) -> f64 {
        1.0 + self.potential.abs()
    }

    /// `out = P v` with `P = I + (G − cI)/μ`, entrywise nonnegative.
    fn apply_uniformized(&self, v: &[f64], out: &mut [f64]) {
        let mu = self.rate();
        let c = self.shift();
        let hop = 1.0 / (2 * self.region.d) as f64 / mu;
        let diag = 1.0 + (-1.0 - c) / mu;
        let diag_origin = 1.0 + (-1.0 + self.potential - c) / mu;
        self.stencil(v, out, hop, diag, diag_origin);
    }
}

/// Poisson(m) weights on a window `[start, start + w.len())` whose excluded
/// mass is at most `eps`.
#[derive(Clone, Debug)]
pub struct PoissonWindow {
    pub start: usize,
    pub weights: Vec<f64>,
}

impl PoissonWindow {
    pub fn new(m: f64, eps: f64) -> Self {
        if m <= 0.0 {
            return PoissonWindow {
                start: 0,
                weights: vec![1.0],
            };
        }
        let mode = m.floor() as usize;
        let log_mode = -m + mode as f64 * m.ln() - ln_gamma(mode as f64 + 1.0);
        let p_mode = log_mode.exp();
        let mut up = Vec::new();
        let mut p = p_mode;
        let mut k = mode;
        loop {
            let ratio = m / (k + 1) as f64;
            if ratio < 1.0 && p * ratio / (1.0 - ratio) < 0.5 * eps {
                break;
            }
            p *= ratio;
            k += 1;
            up.push(p);
        }
        let mut down = Vec::new();
        let mut p = p_mode;
        let mut k = mode;
        while k > 0 {
            let ratio = k as f64 / m;
            if ratio < 1.0 && p * ratio / (1.0 - ratio) < 0.5 * eps {
                break;
            }
            p *= ratio;
            k -= 1;
            down.push(p);
        }
        let start = mode - down.len();
        let mut weights: Vec<f64> = down.into_iter().rev().collect();
        weights.push(p_mode);
        weights.extend(up);
        PoissonWindow { start, weights }
    }

    pub fn end(&self) -> usize {
        self.start + self.weights.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    Uniformization,
    /// Classical fourth-order Runge–Kutta with at most this step.
    Rk4 { max_step_millis: u32 },
}

/// Dense `p_β(t, source, ·)` on a box.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelGrid {
    pub time: f64,
    pub source: Site,
    pub beta: f64,
    pub region: Region,
    pub values: Vec<f64>,
    pub truncation_error_bound: f64,
}

impl KernelGrid {
    pub fn value(&self, y: &Site) -> f64 {
        self.region.index(y).map_or(0.0, |i| self.values[i])
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.values)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Site, f64)> + '_ {
        self.region.sites().zip(self.values.iter().copied())
    }
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 64 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Time series of scalar functionals of `p_β(t, source, ·)` from one sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelSeries {
    pub beta: f64,
    pub source: Site,
    pub times: Vec<f64>,
    /// `Σ_y p_β(t, source, y)`, i.e. `Z_{β,t}(source)` up to truncation.
    pub total: Vec<f64>,
    /// `p_β(t, source, 0)`.
    pub at_origin: Vec<f64>,
    /// `Σ_y p_β(t, source, y) f(y)` for the weight supplied to the sweep, if any.
    pub weighted: Vec<f64>,
    pub truncation_error_bound: Vec<f64>,
    /// Snapshot grids at the requested snapshot times.
    pub snapshots: Vec<KernelGrid>,
}

/// Options for [`sweep`].
#[derive(Clone, Debug, Default)]
pub struct SweepRequest<'a> {
    pub times: &'a [f64],
    pub snapshot_times: &'a [f64],
    pub weight: Option<&'a [f64]>,
}

/// Uniformization sweep for `e^{tG} δ_source` at many times.
pub fn sweep(gen: &Generator, source: &Site, req: &SweepRequest<'_>) -> Result<KernelSeries> {
    let region = gen.region();
    let src = region
        .index(source)
        .ok_or_else(|| Error::InvalidArgument(format!("source {source} outside the box")))?;
    if req.times.iter().chain(req.snapshot_times).any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("times must be finite and nonnegative".into()));
    }
    if let Some(w) = req.weight {
        if w.len() != region.len() {
            return Err(Error::InvalidArgument("weight length differs from region size".into()));
        }
    }
    let mu = gen.rate();
    let c = gen.shift();
    let windows: Vec<PoissonWindow> = req.times.iter().map(|&t| PoissonWindow::new(mu * t, POISSON_TAIL)).collect();
    let snap_windows: Vec<PoissonWindow> = req
        .snapshot_times
        .iter()
        .map(|&t| PoissonWindow::new(mu * t, POISSON_TAIL))
        .collect();
    let kmax = windows.iter().chain(&snap_windows).map(PoissonWindow::end).max().unwrap_or(1);

    let origin = Site::origin(region.dim())?;
    let o_idx = region.index(&origin);
    let mut v = vec![0.0; region.len()];
    v[src] = 1.0;
    let mut next = vec![0.0; region.len()];
    let mut sums = Vec::with_capacity(kmax);
    let mut at_o = Vec::with_capacity(kmax);
    let mut weighted = Vec::with_capacity(kmax);
    let mut snaps: Vec<Vec<f64>> = snap_windows.iter().map(|_| vec![0.0; region.len()]).collect();
    let mut scratch = vec![0.0; region.len()];
    for k in 0..kmax {
        sums.push(pairwise_sum(&v));
        at_o.push(o_idx.map_or(0.0, |i| v[i]));
        if let Some(w) = req.weight {
            for (s, (a, b)) in scratch.iter_mut().zip(v.iter().zip(w)) {
                *s = a * b;
            }
            weighted.push(pairwise_sum(&scratch));
        }
        for (win, acc) in snap_windows.iter().zip(snaps.iter_mut()) {
            if k >= win.start && k < win.end() {
                let wk = win.weights[k - win.start];
                for (a, b) in acc.iter_mut().zip(&v) {
                    *a += wk * b;
                }
            }
        }
        if k + 1 < kmax {
            gen.apply_uniformized(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
    }

    let combine = |win: &PoissonWindow, seq: &[f64], t: f64| -> f64 {
        let s: f64 = win.weights.iter().zip(&seq[win.start..win.end()]).map(|(w, x)| w * x).sum();
        (c * t).exp() * s
    };
    let bound = |t: f64| (c * t).exp() * (exit_probability_bound(region, source, t) + POISSON_TAIL);
    let total = windows.iter().zip(req.times).map(|(w, &t)| combine(w, &sums, t)).collect();
    let at_origin = windows.iter().zip(req.times).map(|(w, &t)| combine(w, &at_o, t)).collect();
    let weighted = if req.weight.is_some() {
        windows.iter().zip(req.times).map(|(w, &t)| combine(w, &weighted, t)).collect()
    } else {
        Vec::new()
    };
    let snapshots = snaps
        .into_iter()
        .zip(req.snapshot_times)
        .map(|(mut vals, &t)| {
            let f = (c * t).exp();
            vals.iter_mut().for_each(|x| *x *= f);
            KernelGrid {
                time: t,
                source: *source,
                beta: gen.potential(),
                region: region.clone(),
                values: vals,
                truncation_error_bound: bound(t),
            }
        })
        .collect();
    Ok(KernelSeries {
        beta: gen.potential(),
        source: *source,
        times: req.times.to_vec(),
        total,
        at_origin,
        weighted,
        truncation_error_bound: req.times.iter().map(|&t| bound(t)).collect(),
        snapshots,
    })
}

fn rk4(gen: &Generator, source: usize, t: f64, max_step: f64) -> Vec<f64> {
    let n = gen.region().len();
    let mut v = vec![0.0; n];
    v[source] = 1.0;
    if t == 0.0 {
        return v;
    }
    let steps = (t / max_step).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 0..steps {
        gen.apply(&v, &mut k1);
        for i in 0..n {
            tmp[i] = v[i] + 0.5 * h * k1[i];
        }
        gen.apply(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = v[i] + 0.5 * h * k2[i];
        }
        gen.apply(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = v[i] + h * k3[i];
        }
        gen.apply(&tmp, &mut k4);
        for i in 0..n {
            v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    v
}

/// `e^{tG} δ_source` on an arbitrary region.
pub fn propagate_region(gen: &Generator, t: f64, source: &Site, integrator: Integrator) -> Result<KernelGrid> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be finite and nonnegative, got {t}")));
    }
    match integrator {
        Integrator::Uniformization => {
            let s = sweep(
                gen,
                source,
                &SweepRequest {
                    times: &[],
                    snapshot_times: &[t],
                    weight: None,
                },
            )?;
            Ok(s.snapshots.into_iter().next().expect("one snapshot"))
        }
        Integrator::Rk4 { max_step_millis } => {
            let region = gen.region();
            let src = region
                .index(source)
                .ok_or_else(|| Error::InvalidArgument(format!("source {source} outside the box")))?;
            let values = rk4(gen, src, t, max_step_millis.max(1) as f64 * 1e-3);
            let c = gen.shift();
            Ok(KernelGrid {
                time: t,
                source: *source,
                beta: gen.potential(),
                region: region.clone(),
                values,
                truncation_error_bound: (c * t).exp() * exit_probability_bound(region, source, t),
            })
        }
    }
}

/// `p_β(t, source, ·)` on `[−L, L]^d` by uniformization.
pub fn propagate(beta: f64, bx: &BoxSpec, t: f64, source: &Site) -> Result<KernelGrid> {
    propagate_with(beta, bx, t, source, Integrator::Uniformization)
}

pub fn propagate_with(beta: f64, bx: &BoxSpec, t: f64, source: &Site, integrator: Integrator) -> Result<KernelGrid> {
    bx.validate()?;
    if source.dim() != bx.d {
        return Err(Error::InvalidArgument("source dimension differs from box dimension".into()));
    }
    propagate_region(&Generator::new(bx.region(), beta), t, source, integrator)
}

/// `p_β(t, source, ·)` and scalar series at many times from one sweep on `[−L, L]^d`.
pub fn kernel_series(beta: f64, bx: &BoxSpec, source: &Site, times: &[f64]) -> Result<KernelSeries> {
    bx.validate()?;
    sweep(
        &Generator::new(bx.region(), beta),
        source,
        &SweepRequest {
            times,
            ..Default::default()
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionValue {
    pub value: f64,
    pub truncation_error_bound: f64,
}

/// `Z_{β,t}(x) = Σ_y p_β(t, x, y)` on the box.
pub fn partition_function(beta: f64, bx: &BoxSpec, t: f64, start: &Site) -> Result<PartitionValue> {
    let s = kernel_series(beta, bx, start, &[t])?;
    Ok(PartitionValue {
        value: s.total[0],
        truncation_error_bound: s.truncation_error_bound[0],
    })
}

/// Composite Simpson on a uniform grid with an even number of intervals.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n % 2 == 0);
    let mut s = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaplaceRow {
    pub lambda: f64,
    pub numeric: f64,
    pub exact: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaplaceReport {
    pub beta: f64,
    pub d: usize,
    pub horizon: f64,
    pub rows: Vec<LaplaceRow>,
    pub max_relative_error: f64,
}

/// Time step of the Laplace-check Simpson grid.
pub const LAPLACE_TIME_STEP: f64 = 0.05;

/// Compares `∫_0^H e^{−λt} Z_{β,t} dt` (plus the tail `Z_H e^{−λH}/λ`) with
/// `1/(λ(1 − β I(λ)))`.
pub fn partition_laplace_check(
    beta: f64,
    d: usize,
    lambdas: &[f64],
    bx: &BoxSpec,
    horizon: f64,
    quad: &QuadratureSpec,
) -> Result<LaplaceReport> {
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l >= 0.05 && *l <= 2.0)) {
        return Err(Error::InvalidArgument("λ grid must lie in [0.05, 2]".into()));
    }
    let lmin = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let needed = -(1e-8f64).ln() / lmin;
    if horizon < needed {
        return Err(Error::HorizonTooShort { horizon, needed });
    }
    if bx.d != d {
        return Err(Error::InvalidArgument("box dimension differs from d".into()));
    }
    let n = {
        let n = (horizon / LAPLACE_TIME_STEP).ceil() as usize;
        n + n % 2
    };
    let h = horizon / n as f64;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let s = kernel_series(beta, bx, &Site::origin(d)?, &times)?;
    let mut rows = Vec::new();
    for &lam in lambdas {
        let f: Vec<f64> = times.iter().zip(&s.total).map(|(t, z)| (-lam * t).exp() * z).collect();
        let tail = s.total[n] * (-lam * horizon).exp() / lam;
        let numeric = simpson(&f, h) + tail;
        let i = free_diagonal_resolvent(&SpectralParam::real(lam)?, d, quad)?;
        let exact = 1.0 / (lam * (1.0 - beta * i.re));
        rows.push(LaplaceRow {
            lambda: lam,
            numeric,
            exact,
            relative_error: (numeric - exact).abs() / exact.abs(),
        });
    }
    let max_relative_error = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    Ok(LaplaceReport {
        beta,
        d,
        horizon,
        rows,
        max_relative_error,
    })
}

/// Large-time asymptote of `p_β(t, 0, 0)` for `β < 0`.
pub fn p00_asymptote(beta: f64, d: usize, t: f64) -> Result<f64> {
    match d {
        1 => Ok(1.0 / ((2.0 * std::f64::consts::PI).sqrt() * beta * beta * t.powf(1.5))),
        2 => Ok(std::f64::consts::PI / (beta * beta * t * t.ln().powi(2))),
        _ => Err(Error::InvalidArgument(format!("no return-probability asymptote for d = {d}"))),
    }
}

/// `π/(β² t (ln t + γ + ln 8 + π/|β|)²)`: the `d = 2` asymptote with the
/// constant of the logarithm kept, from `I(λ) = (ln(1/λ) + ln 8)/π + o(1)`.
pub fn p00_log_corrected_2d(beta: f64, t: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let l = t.ln() + EULER_GAMMA + 8f64.ln() + std::f64::consts::PI / beta.abs();
    std::f64::consts::PI / (beta * beta * t * l * l)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct P00Row {
    pub t: f64,
    pub p00: f64,
    pub asymptote: f64,
    pub ratio: f64,
    pub truncation_error_bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct P00Report {
    pub beta: f64,
    pub d: usize,
    pub rows: Vec<P00Row>,
    /// `|ratio − 1|` is nonincreasing along the grid.
    pub approaches_one: bool,
}

/// `p_β(t, 0, 0)` against its asymptote along an increasing time grid.
pub fn p00_asymptote_check(beta: f64, d: usize, t_grid: &[f64], bx: &BoxSpec, tol: f64) -> Result<P00Report> {
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.is_empty() {
        return Err(Error::InvalidArgument("time grid must be increasing and nonempty".into()));
    }
    let s = kernel_series(beta, bx, &Site::origin(d)?, t_grid)?;
    let mut rows = Vec::new();
    for (i, &t) in t_grid.iter().enumerate() {
        let bound = s.truncation_error_bound[i];
        if bound > tol {
            return Err(Error::Truncation { bound, tol });
        }
        let a = p00_asymptote(beta, d, t)?;
        rows.push(P00Row {
            t,
            p00: s.at_origin[i],
            asymptote: a,
            ratio: s.at_origin[i] / a,
            truncation_error_bound: bound,
        });
    }
    let approaches_one = rows.windows(2).all(|w| (w[1].ratio - 1.0).abs() <= (w[0].ratio - 1.0).abs());
    Ok(P00Report {
        beta,
        d,
        rows,
        approaches_one,
    })
}

/// `ψ̃_t(w) = π^{-d} ∫ e^{−Φ(φ)t} (1 − Π cos(φ_j w_j)) dφ`.
pub fn tilde_psi(t: f64, w: &Site, quad: &QuadratureSpec) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    if w.is_origin() {
        return Ok(0.0);
    }
    let w = *w;
    let e = integrate_cube(
        move |p| Complex64::new((-symbol_phi(p) * t).exp() * one_minus_cos_product(p, &w), 0.0),
        w.dim(),
        quad,
    )?;
    Ok(e.value.re)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct A0Report {
    pub w: Site,
    pub integral: f64,
    pub tail: f64,
    pub cutoff: f64,
}

impl A0Report {
    pub fn total(&self) -> f64 {
        self.integral + self.tail
    }
}

/// `∫_0^∞ ψ̃_t(w) dt`: Gauss–Legendre panels in `log(1+t)` up to `cutoff`,
/// then the leading large-`t` term `π^{-d}(πd/(2t))^{d/2}|w|²d/(2t)` integrated
/// analytically.
pub fn a0_integral_check(w: &Site, cutoff: f64, quad: &QuadratureSpec) -> Result<A0Report> {
    let d = w.dim() as f64;
    let umax = (1.0 + cutoff).ln();
    let err = std::cell::RefCell::new(None);
    let integral = crate::quadrature::gauss_legendre_panels(
        |u| {
            let t = u.exp_m1();
            match tilde_psi(t, w, quad) {
                Ok(v) => v * u.exp(),
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        umax,
        48,
        12,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    // leading term c t^{-(d/2+1)}, integral from T to ∞ is c T^{-d/2} / (d/2)
    let pi = std::f64::consts::PI;
    let c = pi.powf(-d) * (pi * d / 2.0).powf(d / 2.0) * w.norm_sq() as f64 * d / 2.0;
    let tail = c * cutoff.powf(-d / 2.0) / (d / 2.0);
    Ok(A0Report {
        w: *w,
        integral,
        tail,
        cutoff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// `e^{-t} I_n(t)` by its power series.
    fn scaled_bessel_i(n: u32, t: f64) -> f64 {
        let mut term = (-t).exp() * (0.5 * t).powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        for k in 1..400 {
            term *= (0.25 * t * t) / (k as f64 * (k + n) as f64);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    }

    #[test]
    fn poisson_window_mass() {
        for m in [0.3, 5.0, 80.0, 4000.0] {
            let w = PoissonWindow::new(m, 1e-12);
            let s: f64 = w.weights.iter().sum();
            assert!((1.0 - s).abs() < 1e-11, "m={m} mass={s}");
        }
    }

    #[test]
    fn zero_time_is_delta() {
        let bx = BoxSpec::new(10, 2).unwrap();
        let src = Site::new(&[1, -2]).unwrap();
        let g = propagate(-1.0, &bx, 0.0, &src).unwrap();
        assert_eq!(g.value(&src), 1.0);
        assert_eq!(g.total(), 1.0);
    }

    #[test]
    fn free_return_probability_matches_bessel() {
        let bx = BoxSpec::new(40, 1).unwrap();
        let g = propagate(0.0, &bx, 5.0, &Site::on_line(0)).unwrap();
        assert_relative_eq!(g.value(&Site::on_line(0)), scaled_bessel_i(0, 5.0), epsilon = 1e-11);
        assert_relative_eq!(g.value(&Site::on_line(3)), scaled_bessel_i(3, 5.0), epsilon = 1e-11);
        assert!(1.0 - g.total() <= g.truncation_error_bound);
    }

    #[test]
    fn free_mass_loss_within_bound() {
        let bx = BoxSpec::new(10, 2).unwrap();
        let g = propagate(0.0, &bx, 30.0, &Site::origin(2).unwrap()).unwrap();
        let lost = 1.0 - g.total();
        assert!(lost > 0.0 && lost <= g.truncation_error_bound, "{lost} {}", g.truncation_error_bound);
    }

    #[test]
    fn rk4_agrees_with_uniformization() {
        let bx = BoxSpec::new(12, 2).unwrap();
        let src = Site::new(&[1, 0]).unwrap();
        for beta in [-1.0, 0.7] {
            let a = propagate(beta, &bx, 3.0, &src).unwrap();
            let b = propagate_with(beta, &bx, 3.0, &src, Integrator::Rk4 { max_step_millis: 10 }).unwrap();
            let diff = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-9, "beta={beta} diff={diff}");
        }
    }

    #[test]
    fn symmetry_of_kernel() {
        let bx = BoxSpec::new(15, 2).unwrap();
        let x = Site::new(&[2, 1]).unwrap();
        let y = Site::new(&[-1, 0]).unwrap();
        let a = propagate(-1.0, &bx, 4.0, &x).unwrap().value(&y);
        let b = propagate(-1.0, &bx, 4.0, &y).unwrap().value(&x);
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn derivative_identity() {
        let bx = BoxSpec::new(60, 1).unwrap();
        let h = 1e-3;
        let s = kernel_series(-1.0, &bx, &Site::on_line(0), &[10.0 - h, 10.0, 10.0 + h]).unwrap();
        let dz = (s.total[2] - s.total[0]) / (2.0 * h);
        assert_relative_eq!(dz, -s.at_origin[1], max_relative = 1e-6);
    }

    #[test]
    fn laplace_check_free_case() {
        let bx = BoxSpec::new(80, 1).unwrap();
        let r = partition_laplace_check(0.0, 1, &[0.5, 1.0], &bx, 40.0, &QuadratureSpec::default()).unwrap();
        assert!(r.max_relative_error < 1e-6, "{r:?}");
    }

    #[test]
    fn laplace_check_rejects_short_horizon() {
        let bx = BoxSpec::new(20, 1).unwrap();
        let r = partition_laplace_check(-1.0, 1, &[0.1], &bx, 10.0, &QuadratureSpec::default());
        assert!(matches!(r, Err(Error::HorizonTooShort { .. })));
    }

    #[test]
    fn box_validation() {
        assert!(BoxSpec::new(9, 1).is_err());
        assert!(matches!(BoxSpec::new(200, 3).unwrap_err(), Error::MemoryBudget { .. }) || BoxSpec::new(200, 3).is_ok());
        assert!(matches!(BoxSpec::new(100, 3).unwrap().with_budget(1000), Err(Error::MemoryBudget { .. })));
        assert_eq!(default_radius(400.0), 130);
    }

    #[test]
    fn tilde_psi_one_dimensional_oracle() {
        let q = QuadratureSpec::with_tol(1e-12);
        assert_eq!(tilde_psi(3.0, &Site::on_line(0), &q).unwrap(), 0.0);
        assert_relative_eq!(tilde_psi(0.0, &Site::on_line(1), &q).unwrap(), 1.0, epsilon = 1e-12);
        for (t, w) in [(0.5, 1u32), (4.0, 2), (20.0, 3)] {
            let want = scaled_bessel_i(0, t) - scaled_bessel_i(w, t);
            assert_relative_eq!(tilde_psi(t, &Site::on_line(w as i32), &q).unwrap(), want, epsilon = 1e-10);
        }
    }

    #[test]
    fn a0_from_time_integral() {
        let r = a0_integral_check(&Site::on_line(2), 2000.0, &QuadratureSpec::with_tol(1e-11)).unwrap();
        assert_relative_eq!(r.total(), 2.0, max_relative = 0.01);
    }
}
