//! Goodness-of-fit statistics, weighted summaries and a Monte Carlo oracle for
//! hitting probabilities of the simple walk on `Z^3`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::pairwise_sum;
use crate::lattice::Site;

/// Kolmogorov–Smirnov distance between a weighted sample and a continuous cdf.
/// Weights need not be normalized.
pub fn ks_weighted(samples: &[(f64, f64)], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s: Vec<(f64, f64)> = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairwise_sum(&s.iter().map(|p| p.1).collect::<Vec<_>>());
    if total <= 0.0 {
        return 1.0;
    }
    let mut acc = 0.0;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let x = s[i].0;
        let f = cdf(x);
        worst = worst.max((acc / total - f).abs());
        while i < s.len() && s[i].0 == x {
            acc += s[i].1;
            i += 1;
        }
        worst = worst.max((acc / total - f).abs());
    }
    worst.min(1.0)
}

/// Unweighted Kolmogorov–Smirnov distance.
pub fn ks(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let w: Vec<(f64, f64)> = samples.iter().map(|&x| (x, 1.0)).collect();
    ks_weighted(&w, cdf)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut worst: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        worst = worst.max((i as f64 / na - j as f64 / nb).abs());
    }
    worst
}

/// Total variation distance `½ Σ_k |p_k − q_k|` between a weighted integer
/// sample and a pmf, with all `k > kmax` lumped into one cell.
pub fn tv_weighted(samples: &[(u64, f64)], pmf: impl Fn(u64) -> f64, kmax: u64) -> f64 {
    let total: f64 = samples.iter().map(|p| p.1).sum();
    let mut emp = vec![0.0; kmax as usize + 2];
    for &(k, w) in samples {
        emp[(k.min(kmax + 1)) as usize] += w / total;
    }
    let mut reference: Vec<f64> = (0..=kmax).map(&pmf).collect();
    let head: f64 = reference.iter().sum();
    reference.push((1.0 - head).max(0.0));
    0.5 * emp.iter().zip(&reference).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Kish effective sample size `(Σw)² / Σw²`.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s = pairwise_sum(weights);
    let s2 = pairwise_sum(&weights.iter().map(|w| w * w).collect::<Vec<_>>());
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}

/// Mean with a standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(x: &[f64]) -> Self {
        let n = x.len();
        let mean = pairwise_sum(x) / n as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
        MeanEstimate {
            mean,
            std_err: (var / n as f64).sqrt(),
            n,
        }
    }

    /// Self-normalized weighted mean with the delta-method standard error.
    pub fn weighted(x: &[f64], w: &[f64]) -> Self {
        let sw = pairwise_sum(w);
        let mean = pairwise_sum(&x.iter().zip(w).map(|(a, b)| a * b).collect::<Vec<_>>()) / sw;
        let v = x.iter().zip(w).map(|(a, b)| (b / sw).powi(2) * (a - mean).powi(2)).sum::<f64>();
        MeanEstimate {
            mean,
            std_err: v.sqrt(),
            n: x.len(),
        }
    }

    /// Whether `value` lies within `z` standard errors plus `slack`.
    pub fn covers(&self, value: f64, z: f64, slack: f64) -> bool {
        (self.mean - value).abs() <= z * self.std_err + slack
    }
}

/// Energy distance `2E|X−Y| − E|X−X'| − E|Y−Y'|` between two point clouds.
pub fn energy_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    fn dist(x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
    }
    fn mean_cross(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        let mut s = 0.0;
        for x in a {
            s += b.iter().map(|y| dist(x, y)).sum::<f64>();
        }
        s / (a.len() * b.len()) as f64
    }
    fn mean_within(a: &[Vec<f64>]) -> f64 {
        let n = a.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += dist(&a[i], &a[j]);
            }
        }
        2.0 * s / (n * (n - 1)) as f64
    }
    2.0 * mean_cross(a, b) - mean_within(a) - mean_within(b)
}

/// Outcome of a hitting-probability simulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitEstimate {
    pub hits: u64,
    pub n: u64,
    pub escape_radius: f64,
}

impl HitEstimate {
    pub fn probability(&self) -> f64 {
        self.hits as f64 / self.n as f64
    }

    pub fn std_err(&self) -> f64 {
        let p = self.probability();
        (p * (1.0 - p) / self.n as f64).sqrt()
    }
}

/// `Bin(n, 1/2)` as the number of set bits among `n` fair random bits.
fn fair_binomial<R: Rng + ?Sized>(mut n: u64, rng: &mut R) -> u64 {
    let mut count = 0;
    while n >= 64 {
        count += rng.random::<u64>().count_ones() as u64;
        n -= 64;
    }
    if n > 0 {
        count += (rng.random::<u64>() & ((1u64 << n) - 1)).count_ones() as u64;
    }
    count
}

/// Displacement of `k` steps of the discrete simple walk on `Z^3`.
fn block_displacement<R: Rng + ?Sized>(k: u64, rng: &mut R) -> [i64; 3] {
    let n0 = if k == 0 {
        0
    } else {
        Binomial::new(k, 1.0 / 3.0).expect("valid binomial").sample(rng)
    };
    let n1 = fair_binomial(k - n0, rng);
    let n2 = k - n0 - n1;
    let mut out = [0i64; 3];
    for (o, n) in out.iter_mut().zip([n0, n1, n2]) {
        *o = 2 * fair_binomial(n, rng) as i64 - n as i64;
    }
    out
}

/// Whether the walk from `x` reaches the origin before leaving the Euclidean
/// ball of radius `escape_radius`. From L1 distance `m`, `m − 1` steps are
/// taken at once because the origin cannot be reached sooner.
pub fn walk_hits_origin<R: Rng + ?Sized>(x: &Site, escape_radius: f64, rng: &mut R) -> bool {
    let mut p = [x.coord(0) as i64, x.coord(1) as i64, x.coord(2) as i64];
    let r2 = escape_radius * escape_radius;
    loop {
        let m = p.iter().map(|v| v.unsigned_abs()).sum::<u64>();
        if m == 0 {
            return true;
        }
        if p.iter().map(|&v| (v * v) as f64).sum::<f64>() >= r2 {
            return false;
        }
        let step = block_displacement((m - 1).max(1), rng);
        for (a, b) in p.iter_mut().zip(step) {
            *a += b;
        }
    }
}

/// Monte Carlo estimate of `P_x(τ_0 < ∞)` in `d = 3`, truncated at `escape_radius`.
pub fn hitting_probability_mc(x: &Site, n: u64, escape_radius: f64, seed: u64) -> Result<HitEstimate> {
    if x.dim() != 3 {
        return Err(Error::InvalidArgument("the hitting oracle is three-dimensional".into()));
    }
    let hits = crate::rng::replicate(n as usize, seed, |_, rng| walk_hits_origin(x, escape_radius, rng) as u64)
        .into_iter()
        .sum();
    Ok(HitEstimate {
        hits,
        n,
        escape_radius,
    })
}

/// Monte Carlo estimate of the return probability to the origin in `d = 3`:
/// a first step to a uniform neighbour, then the hitting oracle.
pub fn return_probability_mc(n: u64, escape_radius: f64, seed: u64) -> HitEstimate {
    let hits = crate::rng::replicate(n as usize, seed, |_, rng| {
        let k = rng.random_range(0..6);
        let e = Site::origin(3).expect("d = 3").neighbor(k);
        walk_hits_origin(&e, escape_radius, rng) as u64
    })
    .into_iter()
    .sum();
    HitEstimate {
        hits,
        n,
        escape_radius,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ks_of_perfect_grid() {
        let n = 1000;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks(&x, |v| v.clamp(0.0, 1.0));
        assert!(d <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn ks_weighted_matches_duplication() {
        let a = [(0.1, 2.0), (0.5, 1.0), (0.9, 1.0)];
        let b = [0.1, 0.1, 0.5, 0.9];
        let cdf = |v: f64| v.clamp(0.0, 1.0);
        assert_relative_eq!(ks_weighted(&a, cdf), ks(&b, cdf));
    }

    #[test]
    fn tv_of_exact_pmf_is_zero() {
        let s: Vec<(u64, f64)> = (0..5).map(|k| (k, 0.5f64.powi(k as i32 + 1))).chain([(9, 1.0 / 32.0)]).collect();
        let tv = tv_weighted(&s, |k| 0.5f64.powi(k as i32 + 1), 4);
        assert!(tv < 1e-12);
    }

    #[test]
    fn ess_bounds() {
        assert_relative_eq!(effective_sample_size(&[1.0; 10]), 10.0);
        assert_relative_eq!(effective_sample_size(&[1.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn energy_distance_is_small_for_same_cloud() {
        // within-cloud means exclude the diagonal, so identical clouds give -2W/n with W = (n+1)/3
        let a: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, 0.0]).collect();
        assert_relative_eq!(energy_distance(&a, &a), -2.0 * 17.0 / 50.0, epsilon = 1e-12);
        let b: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 + 10.0, 0.0]).collect();
        assert!(energy_distance(&a, &b) > 1.0);
    }

    #[test]
    fn block_jumps_preserve_parity_and_variance() {
        let mut rng = crate::rng::stream(3, 0);
        let k = 50u64;
        let mut sq = 0.0;
        let n = 20_000;
        for _ in 0..n {
            let s = block_displacement(k, &mut rng);
            assert_eq!((s.iter().map(|v| v.abs()).sum::<i64>() - k as i64) % 2, 0);
            sq += s.iter().map(|v| (v * v) as f64).sum::<f64>();
        }
        assert!((sq / n as f64 / k as f64 - 1.0).abs() < 0.03);
    }

    #[test]
    fn fair_binomial_moments() {
        let mut rng = crate::rng::stream(4, 0);
        let n = 150;
        let draws: Vec<f64> = (0..20_000).map(|_| fair_binomial(n, &mut rng) as f64).collect();
        let m = MeanEstimate::from_samples(&draws);
        assert!(m.covers(75.0, 4.0, 0.0));
        let var = draws.iter().map(|x| (x - m.mean).powi(2)).sum::<f64>() / draws.len() as f64;
        assert!((var / 37.5 - 1.0).abs() < 0.05);
    }

    #[test]
    fn neighbour_hits_with_certainty_when_radius_is_tiny() {
        let mut rng = crate::rng::stream(1, 0);
        assert!(walk_hits_origin(&Site::new(&[0, 0, 0]).unwrap(), 10.0, &mut rng));
        assert!(!walk_hits_origin(&Site::new(&[5, 0, 0]).unwrap(), 2.0, &mut rng));
    }
}
