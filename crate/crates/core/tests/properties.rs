use homopolymer::harmonic::{lambda_of_beta, Harmonic};
use homopolymer::kernel::{propagate, BoxSpec};
use homopolymer::lattice::Path;
use homopolymer::limits::ReferenceLaw;
use homopolymer::quadrature::QuadratureSpec;
use homopolymer::stats::{ks, tv_weighted};
use homopolymer::Site;
use proptest::prelude::*;

fn site(d: usize) -> impl Strategy<Value = Site> {
    prop::collection::vec(-20i32..=20, d).prop_map(|c| Site::new(&c).unwrap())
}

fn any_site() -> impl Strategy<Value = Site> {
    (1usize..=3).prop_flat_map(site)
}

/// Random nearest-neighbour path with strictly increasing jump times.
fn path() -> impl Strategy<Value = Path> {
    (1usize..=3, prop::collection::vec((0usize..6, 0.01f64..1.0), 0..40), 0.0f64..5.0).prop_map(|(d, steps, slack)| {
        let mut x = Site::origin(d).unwrap();
        let mut t = 0.0;
        let (mut times, mut sites) = (Vec::new(), vec![x]);
        for (k, dt) in steps {
            t += dt;
            x = x.neighbor(k % (2 * d));
            times.push(t);
            sites.push(x);
        }
        Path::new(times, sites, t + slack).unwrap()
    })
}

proptest! {
    #[test]
    fn neighbours_are_adjacent_and_distinct(x in any_site()) {
        let n: Vec<Site> = x.neighbors().collect();
        prop_assert_eq!(n.len(), 2 * x.dim());
        for y in &n {
            prop_assert!(x.is_adjacent(y));
            prop_assert_eq!(y.sub(&x).l1(), 1);
        }
    }

    #[test]
    fn canonical_is_symmetry_invariant(x in any_site()) {
        let c = x.canonical();
        prop_assert_eq!(x.neg().canonical(), c);
        let mut rev: Vec<i32> = x.coords().to_vec();
        rev.reverse();
        prop_assert_eq!(Site::new(&rev).unwrap().canonical(), c);
        prop_assert_eq!(c.l1(), x.l1());
    }

    #[test]
    fn occupation_functionals_respect_the_horizon(p in path()) {
        let s = p.occupation_stats();
        prop_assert!(s.occupation_time >= 0.0 && s.occupation_time <= p.horizon() + 1e-12);
        prop_assert!(s.last_zero_time >= 0.0 && s.last_zero_time <= p.horizon());
        let returns = p.sites().iter().skip(1).filter(|y| y.is_origin()).count() as u64;
        prop_assert_eq!(s.zero_visit_count, returns);
        let split = p.horizon() / 3.0;
        let whole = p.occupation_between(0.0, split) + p.occupation_between(split, p.horizon());
        prop_assert!((whole - s.occupation_time).abs() < 1e-12);
    }

    #[test]
    fn ks_and_tv_are_distances(xs in prop::collection::vec(-5.0f64..5.0, 1..200), ks_ in prop::collection::vec(0u64..15, 1..200)) {
        let d = ks(&xs, |x| 0.5 * (1.0 + (x / 2f64.sqrt()).tanh()));
        prop_assert!((0.0..=1.0).contains(&d));
        let g = ReferenceLaw::Geom { success: 0.5 };
        let w: Vec<(u64, f64)> = ks_.iter().map(|&k| (k, 1.0)).collect();
        let tv = tv_weighted(&w, |k| g.pmf(k), 10);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&tv));
    }

    #[test]
    fn reference_laws_are_distribution_functions(rate in 0.05f64..20.0, p in 0.01f64..0.99, a in -10.0f64..40.0, b in -10.0f64..40.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        for law in [
            ReferenceLaw::Exp { rate },
            ReferenceLaw::Geom { success: p },
            ReferenceLaw::HalfNormal,
            ReferenceLaw::Bessel3Endpoint,
            ReferenceLaw::MeanderEndpoint,
            ReferenceLaw::SignedBessel3Endpoint,
            ReferenceLaw::SignedMeanderEndpoint,
        ] {
            let (f_lo, f_hi) = (law.cdf(lo), law.cdf(hi));
            prop_assert!((0.0..=1.0).contains(&f_lo) && (0.0..=1.0).contains(&f_hi));
            prop_assert!(f_lo <= f_hi + 1e-15, "{law:?} not monotone on [{lo}, {hi}]");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lambda_is_monotone_and_vanishes_below_criticality(b1 in -3.0f64..3.0, b2 in -3.0f64..3.0) {
        let q = QuadratureSpec::default();
        let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
        let (l_lo, l_hi) = (lambda_of_beta(lo, 1, &q).unwrap(), lambda_of_beta(hi, 1, &q).unwrap());
        prop_assert!(l_lo >= 0.0 && l_lo <= l_hi + 1e-14);
        if hi <= 0.0 {
            prop_assert_eq!(l_hi, 0.0);
        } else {
            prop_assert!((l_hi - ((hi * hi + 1.0).sqrt() - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_is_positive_harmonic_in_one_dimension(beta in -3.0f64..2.0, x in -30i32..30) {
        let h = Harmonic::from_beta(1, beta, QuadratureSpec::default()).unwrap();
        let lam = h.params().lambda_beta;
        let psi = |z: i32| h.psi(&Site::on_line(z)).unwrap();
        prop_assert!(psi(x) > 0.0);
        let pot = if x == 0 { beta } else { 0.0 };
        let residual = 0.5 * (psi(x + 1) + psi(x - 1)) - psi(x) + (pot - lam) * psi(x);
        prop_assert!(residual.abs() <= 1e-10 * psi(x).max(1.0));
    }

    #[test]
    fn kernel_is_symmetric(beta in -2.0f64..1.0, t in 0.1f64..4.0, x in -4i32..=4, y in -4i32..=4) {
        let bx = BoxSpec::new(30, 1).unwrap();
        let pxy = propagate(beta, &bx, t, &Site::on_line(x)).unwrap().value(&Site::on_line(y));
        let pyx = propagate(beta, &bx, t, &Site::on_line(y)).unwrap().value(&Site::on_line(x));
        prop_assert!((pxy - pyx).abs() <= 1e-13 * pxy.max(1e-300) + 1e-300);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn q_kernel_rows_are_probability_vectors(beta in -2.0f64..-0.05, t in 0.1f64..3.0, x in -3i32..=3) {
        let h = Harmonic::from_beta(1, beta, QuadratureSpec::default()).unwrap();
        let q = homopolymer::doob::q_kernel(&h, &BoxSpec::new(40, 1).unwrap(), t, &Site::on_line(x)).unwrap();
        prop_assert!(q.grid.values.iter().all(|v| *v >= 0.0));
        prop_assert!((q.row_sum() - 1.0).abs() <= q.truncation_error_bound + 1e-12);
    }
}
