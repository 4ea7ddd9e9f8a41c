//! The rate-1 nearest-neighbour symmetric walk on `Z^d`, `d ∈ {1, 2, 3}`.
//!
//! Paths are stored sparsely as jump times plus visited sites; every
//! functional is computed exactly from the jump data.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

pub fn check_dim(d: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(d))
    }
}

/// A lattice site. Coordinates beyond `dim` are always zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    dim: u8,
    c: [i32; MAX_DIM],
}

impl Site {
    pub fn new(coords: &[i32]) -> Result<Site> {
        check_dim(coords.len())?;
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Site {
            dim: coords.len() as u8,
            c,
        })
    }

    pub fn origin(d: usize) -> Result<Site> {
        check_dim(d)?;
        Ok(Site {
            dim: d as u8,
            c: [0; MAX_DIM],
        })
    }

    /// `±e_axis`.
    pub fn unit(d: usize, axis: usize, positive: bool) -> Result<Site> {
        let mut s = Site::origin(d)?;
        if axis >= d {
            return Err(Error::InvalidArgument(format!("axis {axis} out of range for d={d}")));
        }
        s.c[axis] = if positive { 1 } else { -1 };
        Ok(s)
    }

    /// Site on the first axis; shorthand used throughout the one-dimensional code.
    pub fn on_line(x: i32) -> Site {
        Site {
            dim: 1,
            c: [x, 0, 0],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i32] {
        &self.c[..self.dim as usize]
    }

    pub fn coord(&self, axis: usize) -> i32 {
        self.c[axis]
    }

    pub fn is_origin(&self) -> bool {
        self.c == [0; MAX_DIM]
    }

    pub fn l1(&self) -> i64 {
        self.c.iter().map(|&v| (v as i64).abs()).sum()
    }

    pub fn linf(&self) -> i64 {
        self.c.iter().map(|&v| (v as i64).abs()).max().unwrap_or(0)
    }

    pub fn norm_sq(&self) -> i64 {
        self.c.iter().map(|&v| (v as i64) * (v as i64)).sum()
    }

    pub fn neg(&self) -> Site {
        let mut s = *self;
        for v in s.c.iter_mut() {
            *v = -*v;
        }
        s
    }

    pub fn sub(&self, other: &Site) -> Site {
        let mut s = *self;
        for (a, b) in s.c.iter_mut().zip(other.c.iter()) {
            *a -= b;
        }
        s
    }

    /// Neighbour index `k ∈ 0..2d`: axis `k / 2`, positive direction when `k` is even.
    pub fn neighbor(&self, k: usize) -> Site {
        let mut s = *self;
        s.c[k / 2] += if k % 2 == 0 { 1 } else { -1 };
        s
    }

    pub fn neighbors(&self) -> impl Iterator<Item = Site> + '_ {
        (0..2 * self.dim()).map(move |k| self.neighbor(k))
    }

    pub fn is_adjacent(&self, other: &Site) -> bool {
        self.dim == other.dim && self.sub(other).l1() == 1
    }

    /// Representative under the lattice symmetries (sign flips and axis permutations).
    pub fn canonical(&self) -> Site {
        let d = self.dim();
        let mut s = *self;
        for v in s.c[..d].iter_mut() {
            *v = v.abs();
        }
        s.c[..d].sort_unstable();
        s
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Occupation functionals of a path at the origin up to its horizon.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OccupationStats {
    /// Lebesgue time spent at the origin.
    pub occupation_time: f64,
    /// Last time at the origin (0 if never there).
    pub last_zero_time: f64,
    /// Number of jumps landing at the origin. A start at the origin is
    /// visit number 0 and is not counted.
    pub zero_visit_count: u64,
}

/// Incremental computation of [`OccupationStats`] from a stream of jumps.
#[derive(Clone, Debug)]
pub(crate) struct OccupationTracker {
    at_zero_since: Option<f64>,
    stats: OccupationStats,
}

impl OccupationTracker {
    pub(crate) fn new(start: &Site) -> Self {
        OccupationTracker {
            at_zero_since: start.is_origin().then_some(0.0),
            stats: OccupationStats::default(),
        }
    }

    pub(crate) fn jump(&mut self, t: f64, to: &Site) {
        if let Some(s) = self.at_zero_since.take() {
            self.stats.occupation_time += t - s;
            self.stats.last_zero_time = t;
        }
        if to.is_origin() {
            self.at_zero_since = Some(t);
            self.stats.zero_visit_count += 1;
        }
    }

    pub(crate) fn finish(mut self, horizon: f64) -> OccupationStats {
        if let Some(s) = self.at_zero_since {
            self.stats.occupation_time += horizon - s;
            self.stats.last_zero_time = horizon;
        }
        self.stats
    }
}

/// A cadlag lattice trajectory on `[0, horizon]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    jump_times: Vec<f64>,
    sites: Vec<Site>,
    horizon: f64,
}

impl Path {
    /// Builds a path and checks every structural invariant.
    pub fn new(jump_times: Vec<f64>, sites: Vec<Site>, horizon: f64) -> Result<Path> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("invalid path: {m}")));
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return bad("horizon must be finite and nonnegative");
        }
        if sites.len() != jump_times.len() + 1 {
            return bad("need exactly one more site than jump times");
        }
        let d = sites[0].dim();
        let mut prev = 0.0;
        for (i, &t) in jump_times.iter().enumerate() {
            if !(t >= 0.0) || t > horizon || (i > 0 && t <= prev) {
                return bad("jump times must be strictly increasing within [0, horizon]");
            }
            prev = t;
        }
        for w in sites.windows(2) {
            if w[1].dim() != d || !w[0].is_adjacent(&w[1]) {
                return bad("consecutive sites must differ by one unit step");
            }
        }
        Ok(Path {
            jump_times,
            sites,
            horizon,
        })
    }

    pub fn constant(site: Site, horizon: f64) -> Result<Path> {
        Path::new(Vec::new(), vec![site], horizon)
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.sites[0].dim()
    }

    pub fn start(&self) -> Site {
        self.sites[0]
    }

    pub fn end(&self) -> Site {
        *self.sites.last().expect("paths are never empty")
    }

    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }

    /// `X(t)` (right-continuous).
    pub fn position_at(&self, t: f64) -> Site {
        let k = self.jump_times.partition_point(|&s| s <= t);
        self.sites[k]
    }

    pub fn occupation_stats(&self) -> OccupationStats {
        let mut tr = OccupationTracker::new(&self.sites[0]);
        for (t, s) in self.jump_times.iter().zip(&self.sites[1..]) {
            tr.jump(*t, s);
        }
        tr.finish(self.horizon)
    }

    /// Time spent at the origin during `[a, b] ⊂ [0, horizon]`.
    pub fn occupation_between(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        let mut from: f64 = 0.0;
        for (i, site) in self.sites.iter().enumerate() {
            let to = self.jump_times.get(i).copied().unwrap_or(self.horizon);
            if site.is_origin() {
                let lo = from.max(a);
                let hi = to.min(b);
                if hi > lo {
                    total += hi - lo;
                }
            }
            from = to;
        }
        total
    }
}

/// Occupation functionals of `path` (free-function form of [`Path::occupation_stats`]).
pub fn occupation_stats(path: &Path) -> OccupationStats {
    path.occupation_stats()
}

/// Evaluates `X(n t) / √n` on `grid ⊂ [0, 1]`; one `d`-vector per grid point.
pub fn rescale_path(path: &Path, n: f64, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    if !(n > 0.0) {
        return Err(Error::InvalidArgument(format!("rescaling factor must be positive, got {n}")));
    }
    if path.horizon() < n {
        return Err(Error::HorizonTooShort {
            horizon: path.horizon(),
            needed: n,
        });
    }
    let scale = n.sqrt();
    grid.iter()
        .map(|&u| {
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::InvalidArgument(format!("grid point {u} outside [0, 1]")));
            }
            let s = path.position_at(n * u);
            Ok(s.coords().iter().map(|&v| v as f64 / scale).collect())
        })
        .collect()
}

/// Jump rates of a nearest-neighbour chain: `rates[k]` is the rate to
/// `x.neighbor(k)`, `k ∈ 0..2d`. Returns the total rate.
pub trait JumpRates {
    fn rates(&self, x: &Site, rates: &mut [f64; 2 * MAX_DIM]) -> f64;
}

/// The free walk: rate `1/(2d)` to each neighbour.
#[derive(Clone, Copy, Debug)]
pub struct FreeWalk;

impl JumpRates for FreeWalk {
    fn rates(&self, x: &Site, rates: &mut [f64; 2 * MAX_DIM]) -> f64 {
        let n = 2 * x.dim();
        for r in rates[..n].iter_mut() {
            *r = 1.0 / n as f64;
        }
        1.0
    }
}

/// Runs the chain from `start` up to `horizon`, calling `on_jump(t, site)` at
/// every jump. Returns the final site.
pub(crate) fn run_chain<K, R, F>(kernel: &K, start: Site, horizon: f64, rng: &mut R, mut on_jump: F) -> Site
where
    K: JumpRates + ?Sized,
    R: Rng + ?Sized,
    F: FnMut(f64, &Site),
{
    let n = 2 * start.dim();
    let mut rates = [0.0; 2 * MAX_DIM];
    let mut x = start;
    let mut t = 0.0;
    loop {
        let total = kernel.rates(&x, &mut rates);
        if total <= 0.0 {
            return x;
        }
        let hold: f64 = Exp1.sample(rng);
        t += hold / total;
        if t > horizon {
            return x;
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
        on_jump(t, &x);
    }
}

/// Simulates a full path of the chain with rates `kernel`.
pub fn simulate_chain<K, R>(kernel: &K, start: Site, horizon: f64, rng: &mut R) -> Result<Path>
where
    K: JumpRates + ?Sized,
    R: Rng + ?Sized,
{
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be finite and nonnegative, got {horizon}")));
    }
    let mut times = Vec::new();
    let mut sites = vec![start];
    run_chain(kernel, start, horizon, rng, |t, s| {
        times.push(t);
        sites.push(*s);
    });
    Path::new(times, sites, horizon)
}

/// Free rate-1 walk from `start`, deterministic given `seed`.
pub fn simulate_free_walk(d: usize, start: Site, horizon: f64, seed: u64) -> Result<Path> {
    check_dim(d)?;
    if start.dim() != d {
        return Err(Error::InvalidArgument(format!("start {start} is not a site of Z^{d}")));
    }
    let mut rng = crate::rng::stream(seed, 0);
    simulate_chain(&FreeWalk, start, horizon, &mut rng)
}

/// Functionals of a chain run that avoid storing the path.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub stats: OccupationStats,
    pub end: Site,
    /// Positions at the requested mark times.
    pub marks: Vec<Site>,
}

/// Runs the chain and keeps only occupation stats, the endpoint and the
/// positions at `marks` (which must be sorted and within `[0, horizon]`).
pub fn summarize_chain<K, R>(kernel: &K, start: Site, horizon: f64, marks: &[f64], rng: &mut R) -> RunSummary
where
    K: JumpRates + ?Sized,
    R: Rng + ?Sized,
{
    let mut tracker = OccupationTracker::new(&start);
    let mut out = Vec::with_capacity(marks.len());
    let mut next = 0;
    let mut current = start;
    let end = run_chain(kernel, start, horizon, rng, |t, s| {
        while next < marks.len() && marks[next] < t {
            out.push(current);
            next += 1;
        }
        tracker.jump(t, s);
        current = *s;
    });
    while out.len() < marks.len() {
        out.push(end);
    }
    RunSummary {
        stats: tracker.finish(horizon),
        end,
        marks: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_path() -> Path {
        // 0 -> 1 at t=1, 1 -> 0 at t=3, horizon 4
        Path::new(vec![1.0, 3.0], vec![Site::on_line(0), Site::on_line(1), Site::on_line(0)], 4.0).unwrap()
    }

    #[test]
    fn zero_horizon_has_no_jumps() {
        let p = simulate_free_walk(2, Site::origin(2).unwrap(), 0.0, 1).unwrap();
        assert_eq!(p.jump_count(), 0);
        assert_eq!(p.sites(), &[Site::origin(2).unwrap()]);
    }

    #[test]
    fn invalid_dimension_is_rejected() {
        assert!(matches!(Site::new(&[0, 0, 0, 0]), Err(Error::InvalidDimension(4))));
        assert!(matches!(
            simulate_free_walk(4, Site::on_line(0), 1.0, 0),
            Err(Error::InvalidDimension(4))
        ));
    }

    #[test]
    fn constant_paths() {
        let p = Path::constant(Site::on_line(0), 2.5).unwrap();
        let s = p.occupation_stats();
        assert_eq!(s.occupation_time, 2.5);
        assert_eq!(s.last_zero_time, 2.5);
        assert_eq!(s.zero_visit_count, 0);

        let q = Path::constant(Site::on_line(1), 2.5).unwrap();
        assert_eq!(q.occupation_stats(), OccupationStats::default());
    }

    #[test]
    fn hand_built_path_stats() {
        let s = hand_path().occupation_stats();
        assert_eq!(s.occupation_time, 2.0);
        assert_eq!(s.last_zero_time, 4.0);
        assert_eq!(s.zero_visit_count, 1);
    }

    #[test]
    fn path_invariants_are_enforced() {
        let o = Site::on_line(0);
        assert!(Path::new(vec![1.0], vec![o, Site::on_line(2)], 2.0).is_err());
        assert!(Path::new(vec![1.0, 1.0], vec![o, Site::on_line(1), o], 2.0).is_err());
        assert!(Path::new(vec![3.0], vec![o, Site::on_line(1)], 2.0).is_err());
        assert!(Path::new(vec![], vec![o, o], 2.0).is_err());
    }

    #[test]
    fn rescaling() {
        let p = Path::constant(Site::on_line(0), 10.0).unwrap();
        let v = rescale_path(&p, 10.0, &[0.0, 0.5, 1.0]).unwrap();
        assert!(v.iter().all(|x| x[0] == 0.0));

        let q = Path::new(vec![1.0, 2.0], vec![Site::on_line(0), Site::on_line(1), Site::on_line(2)], 4.0).unwrap();
        let v = rescale_path(&q, 4.0, &[1.0]).unwrap();
        assert_eq!(v[0][0], 1.0);
        assert!(matches!(rescale_path(&q, 5.0, &[1.0]), Err(Error::HorizonTooShort { .. })));
    }

    #[test]
    fn occupation_is_additive() {
        let p = simulate_free_walk(1, Site::on_line(0), 50.0, 3).unwrap();
        let total = p.occupation_stats().occupation_time;
        for s in [0.0, 0.7, 13.2, 49.9, 50.0] {
            let split = p.occupation_between(0.0, s) + p.occupation_between(s, 50.0);
            assert!((split - total).abs() < 1e-12);
        }
    }

    #[test]
    fn summary_matches_full_path() {
        let marks = [0.0, 2.5, 10.0, 20.0];
        let mut r1 = crate::rng::stream(5, 9);
        let mut r2 = crate::rng::stream(5, 9);
        let path = simulate_chain(&FreeWalk, Site::origin(2).unwrap(), 20.0, &mut r1).unwrap();
        let sum = summarize_chain(&FreeWalk, Site::origin(2).unwrap(), 20.0, &marks, &mut r2);
        assert_eq!(sum.stats, path.occupation_stats());
        assert_eq!(sum.end, path.end());
        for (m, s) in marks.iter().zip(&sum.marks) {
            assert_eq!(*s, path.position_at(*m));
        }
    }

    #[test]
    fn canonical_form() {
        let s = Site::new(&[-3, 1, -2]).unwrap();
        assert_eq!(s.canonical().coords(), &[1, 2, 3]);
    }
}
