use homopolymer::harmonic::Harmonic;
use homopolymer::limits::*;
use homopolymer::quadrature::QuadratureSpec;

fn main() -> homopolymer::Result<()> {
    let seed = 20_240_601;
    let h = Harmonic::from_beta(1, -1.0, QuadratureSpec::default())?;
    let c = corollary_tests(&h, 200.0, 20_000, seed, &CorollaryThresholds::default())?;
    println!("{}", serde_json::to_string_pretty(&c).unwrap());
    let grid: Vec<f64> = (0..=200).map(|i| i as f64).collect();
    let exact = last_zero_exact_cdf(-1.0, 200.0, &grid)?;
    let table = LastZeroTable::new(-1.0, 800.0, 0.25)?;
    let gap = grid.iter().zip(&exact).map(|(y, e)| (table.cdf(*y) - e).abs()).fold(0.0, f64::max);
    println!("sup |limit cdf - exact finite-t cdf| on [0,200] = {gap:.5} (exact cdf at 199 = {:.5})", exact[199]);
    for src in [EndpointSource::Q0, EndpointSource::Polymer] {
        let r = scaling_endpoint_test(src, &h, 2500.0, 20_000, seed, 0.04)?;
        println!("{}", serde_json::to_string(&r).unwrap());
    }
    let m = scaling_multitime_test(&h, &[0.5, 1.0], 2500.0, 5_000, seed, f64::INFINITY)?;
    println!("{}", serde_json::to_string(&m).unwrap());
    let w = homopolymer::wetting::WettingParams::new(0.0)?;
    let id = homopolymer::wetting::wetting_identity_check(&w, 50.0)?;
    println!("{}", serde_json::to_string_pretty(&id).unwrap());
    let r = homopolymer::wetting::reflected_scaling_test(2500.0, 20_000, seed, 0.02)?;
    println!("{}", serde_json::to_string(&r).unwrap());
    Ok(())
}
