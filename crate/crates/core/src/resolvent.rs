//! Laplace-domain objects of the free walk and of its rank-one perturbation
//! `H_β = Δ + β δ_0`.
//!
//! All lattice integrals use the cosine representation over `[0, π]^d`,
//!
//! ```text
//! R_λ(x, y) = π^{-d} ∫_{[0,π]^d} Π_j cos(φ_j (x_j − y_j)) / (λ + Φ(φ)) dφ,
//! Φ(φ) = (1/d) Σ_j (1 − cos φ_j),
//! ```
//!
//! which is the full-torus Fourier integral averaged over coordinate sign
//! flips. One dimension has closed forms.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{check_dim, Site};
use crate::quadrature::{integrate_cube, Estimate, QuadratureSpec};

/// `|1 − β I(λ)|` below this is reported as a pole.
pub const POLE_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    UpperHalfPlane,
    LowerHalfPlane,
    RealRightOfSpectrum,
    RealLeftOfSpectrum,
}

/// A resolvent argument off the spectrum `[−2, 0]` of `Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralParam {
    lambda: Complex64,
    branch: Branch,
}

impl SpectralParam {
    pub fn new(lambda: Complex64) -> Result<Self> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite spectral parameter {lambda}")));
        }
        let branch = if lambda.im > 0.0 {
            Branch::UpperHalfPlane
        } else if lambda.im < 0.0 {
            Branch::LowerHalfPlane
        } else if lambda.re > 0.0 {
            Branch::RealRightOfSpectrum
        } else if lambda.re < -2.0 {
            Branch::RealLeftOfSpectrum
        } else {
            return Err(Error::OnSpectrum(lambda));
        };
        Ok(SpectralParam { lambda, branch })
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    /// `s + iε` with `ε > 0`, approaching the cut from above.
    pub fn above_cut(s: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("offset must be positive, got {eps}")));
        }
        Self::new(Complex64::new(s, eps))
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }
}

/// `Φ(φ) = (1/d) Σ (1 − cos φ_j)`, the symbol of `−Δ`.
pub fn symbol_phi(phi: &[f64]) -> f64 {
    let d = phi.len() as f64;
    // 1 − cos a = 2 sin²(a/2) keeps relative accuracy near φ = 0
    phi.iter().map(|a| 2.0 * (0.5 * a).sin().powi(2)).sum::<f64>() / d
}

/// `1 − Π_j cos(φ_j w_j)`, the sign-averaged form of `1 − cos⟨φ, w⟩` on `[0, π]^d`.
pub(crate) fn one_minus_cos_product(phi: &[f64], w: &Site) -> f64 {
    let mut m = 0.0;
    for (a, &k) in phi.iter().zip(w.coords()) {
        let u = 2.0 * (0.5 * a * k as f64).sin().powi(2);
        m = m + u - m * u;
    }
    m
}

pub(crate) fn cos_product(phi: &[f64], w: &Site) -> f64 {
    phi.iter().zip(w.coords()).map(|(a, &k)| (a * k as f64).cos()).product()
}

/// `√λ · √(λ+2)` with principal roots: analytic off `[−2, 0]`, `~ λ` at infinity.
fn root_product(z: Complex64) -> Complex64 {
    z.sqrt() * (z + 2.0).sqrt()
}

/// `I(λ) = 1/√(λ(2+λ))` on the branch continuous off `[−2, 0]`.
pub fn diagonal_closed_form_1d(z: Complex64) -> Complex64 {
    root_product(z).inv()
}

/// Decay ratio `r = 1 + λ − √(λ(λ+2))` of `R_λ(x, 0) = I(λ) r^{|x|}` in one dimension.
pub fn decay_ratio_1d(z: Complex64) -> Complex64 {
    1.0 + z - root_product(z)
}

/// Boundary value `lim_{ε↓0} I(s + iε)` for `s ∈ (−2, 0)`, `d = 1`.
pub fn diagonal_boundary_1d(s: f64) -> Complex64 {
    Complex64::new(0.0, -1.0 / ((-s).sqrt() * (2.0 + s).sqrt()))
}

fn same_dim(x: &Site, y: &Site) -> Result<usize> {
    if x.dim() != y.dim() {
        return Err(Error::InvalidArgument(format!("sites {x} and {y} have different dimensions")));
    }
    Ok(x.dim())
}

/// Quadrature of `π^{-d} ∫ Π cos(φ_j w_j) / (λ + Φ)`; `λ = 0` is accepted for `d = 3`.
pub fn resolvent_integral(lambda: Complex64, w: &Site, quad: &QuadratureSpec) -> Result<Estimate> {
    let d = w.dim();
    if lambda == Complex64::new(0.0, 0.0) && d < 3 {
        return Err(Error::OnSpectrum(lambda));
    }
    let w = *w;
    integrate_cube(move |p| cos_product(p, &w) / (lambda + symbol_phi(p)), d, quad)
}

/// Quadrature of `A_λ(w) = π^{-d} ∫ (1 − Π cos(φ_j w_j)) / (λ + Φ)`, finite at `λ = 0`.
pub fn a_integral(lambda: Complex64, w: &Site, quad: &QuadratureSpec) -> Result<Estimate> {
    let d = w.dim();
    if w.is_origin() {
        return Ok(Estimate {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
        });
    }
    let w = *w;
    integrate_cube(move |p| one_minus_cos_product(p, &w) / (lambda + symbol_phi(p)), d, quad)
}

/// `I(λ) = R_λ(0, 0)`. Closed form for `d = 1`, quadrature otherwise.
pub fn free_diagonal_resolvent(lam: &SpectralParam, d: usize, quad: &QuadratureSpec) -> Result<Complex64> {
    check_dim(d)?;
    if d == 1 {
        return Ok(diagonal_closed_form_1d(lam.lambda()));
    }
    Ok(resolvent_integral(lam.lambda(), &Site::origin(d)?, quad)?.value)
}

/// `I(λ)` by quadrature in every dimension (the one-dimensional cross-check route).
pub fn free_diagonal_resolvent_quadrature(lam: &SpectralParam, d: usize, quad: &QuadratureSpec) -> Result<Estimate> {
    resolvent_integral(lam.lambda(), &Site::origin(d)?, quad)
}

/// `R_λ(x, y)`. Uses `I(λ) r^{|x−y|}` for `d = 1`.
pub fn free_resolvent(lam: &SpectralParam, x: &Site, y: &Site, quad: &QuadratureSpec) -> Result<Complex64> {
    let d = same_dim(x, y)?;
    let w = x.sub(y);
    if d == 1 {
        let z = lam.lambda();
        return Ok(diagonal_closed_form_1d(z) * decay_ratio_1d(z).powi(w.l1() as i32));
    }
    Ok(resolvent_integral(lam.lambda(), &w.canonical(), quad)?.value)
}

/// `A_λ(w) = I(λ) − R_λ(w, 0)`.
pub fn a_function(lam: &SpectralParam, w: &Site, quad: &QuadratureSpec) -> Result<Complex64> {
    if w.dim() == 1 {
        let z = lam.lambda();
        return Ok(diagonal_closed_form_1d(z) * (1.0 - decay_ratio_1d(z).powi(w.l1() as i32)));
    }
    Ok(a_integral(lam.lambda(), &w.canonical(), quad)?.value)
}

/// `A_0(w)` by quadrature of the second integral form (every dimension).
pub fn a_zero(w: &Site, quad: &QuadratureSpec) -> Result<f64> {
    Ok(a_integral(Complex64::new(0.0, 0.0), &w.canonical(), quad)?.value.re)
}

fn check_pole(lambda: Complex64, beta: f64, i: Complex64) -> Result<Complex64> {
    let den = 1.0 - beta * i;
    if den.norm() < POLE_THRESHOLD {
        return Err(Error::Pole(lambda));
    }
    Ok(den)
}

/// `I^β(λ) = I(λ) / (1 − β I(λ))`.
pub fn perturbed_diagonal(lam: &SpectralParam, beta: f64, d: usize, quad: &QuadratureSpec) -> Result<Complex64> {
    let i = free_diagonal_resolvent(lam, d, quad)?;
    let den = check_pole(lam.lambda(), beta, i)?;
    Ok(i / den)
}

/// `R^β_λ(x, y) = R_λ(x, y) + β R_λ(x, 0) R_λ(0, y) / (1 − β I(λ))`.
pub fn perturbed_resolvent(lam: &SpectralParam, beta: f64, x: &Site, y: &Site, quad: &QuadratureSpec) -> Result<Complex64> {
    let d = same_dim(x, y)?;
    if x.is_origin() && y.is_origin() {
        return perturbed_diagonal(lam, beta, d, quad);
    }
    let o = Site::origin(d)?;
    let i = free_diagonal_resolvent(lam, d, quad)?;
    let den = check_pole(lam.lambda(), beta, i)?;
    let rxy = free_resolvent(lam, x, y, quad)?;
    if beta == 0.0 {
        return Ok(rxy);
    }
    let rx0 = if x.is_origin() { i } else { free_resolvent(lam, x, &o, quad)? };
    let r0y = if y.is_origin() { i } else { free_resolvent(lam, &o, y, quad)? };
    Ok(rxy + beta * rx0 * r0y / den)
}

/// Resolvent of the walk killed at the origin, `R_λ(x,y) − R_λ(x,0) R_λ(0,y) / I(λ)`.
pub fn killed_resolvent(lam: &SpectralParam, x: &Site, y: &Site, quad: &QuadratureSpec) -> Result<Complex64> {
    let d = same_dim(x, y)?;
    if x.is_origin() || y.is_origin() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let o = Site::origin(d)?;
    let i = free_diagonal_resolvent(lam, d, quad)?;
    if i.norm() == 0.0 {
        return Err(Error::InvalidArgument("I(λ) vanishes".into()));
    }
    let rxy = free_resolvent(lam, x, y, quad)?;
    let rx0 = free_resolvent(lam, x, &o, quad)?;
    let r0y = free_resolvent(lam, &o, y, quad)?;
    Ok(rxy - rx0 * r0y / i)
}

/// `R_0^{-∞}(x, y)`. Recurrent dimensions use `A_0(x) + A_0(−y) − A_0(x−y)`;
/// `d = 3` uses the finite `λ = 0` resolvent.
pub fn killed_resolvent_at_zero(x: &Site, y: &Site, quad: &QuadratureSpec) -> Result<f64> {
    let d = same_dim(x, y)?;
    if x.is_origin() || y.is_origin() {
        return Ok(0.0);
    }
    if d < 3 {
        return Ok(a_zero(x, quad)? + a_zero(&y.neg(), quad)? - a_zero(&x.sub(y), quad)?);
    }
    let zero = Complex64::new(0.0, 0.0);
    let i = resolvent_integral(zero, &Site::origin(3)?, quad)?.value.re;
    let rxy = resolvent_integral(zero, &x.sub(y).canonical(), quad)?.value.re;
    let rx0 = resolvent_integral(zero, &x.canonical(), quad)?.value.re;
    let r0y = resolvent_integral(zero, &y.canonical(), quad)?.value.re;
    Ok(rxy - rx0 * r0y / i)
}

/// `R_0^{-∞}(x, 1_B)` with `B` the unit sphere `{|e| = 1}`.
pub fn killed_resolvent_unit_sphere(x: &Site, quad: &QuadratureSpec) -> Result<f64> {
    let o = Site::origin(x.dim())?;
    o.neighbors().map(|e| killed_resolvent_at_zero(x, &e, quad)).sum()
}

/// `P_x(τ_0 < ∞)` from the killed resolvent, `R_0^{-∞}(x, 1_B) / 2d`, for transient `d = 3`.
pub fn hitting_probability(x: &Site, quad: &QuadratureSpec) -> Result<f64> {
    if x.is_origin() {
        return Ok(1.0);
    }
    if x.dim() < 3 {
        return Ok(1.0);
    }
    Ok(killed_resolvent_unit_sphere(x, quad)? / (2 * x.dim()) as f64)
}

/// `β_cr = 1 / I(0+)`: zero for the recurrent dimensions.
pub fn beta_critical(d: usize, quad: &QuadratureSpec) -> Result<f64> {
    check_dim(d)?;
    if d < 3 {
        return Ok(0.0);
    }
    let i0 = resolvent_integral(Complex64::new(0.0, 0.0), &Site::origin(d)?, quad)?;
    Ok(1.0 / i0.value.re)
}

/// Point mass of the spectral measure of `H_β` at the origin, one dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralAtom {
    pub location: f64,
    pub mass: f64,
}

/// Atoms of `μ_β` for `d = 1`: below `−2` when `β < 0`, at `λ(β) > 0` when `β > 0`.
///
/// The location solves `β I(λ) = 1` on the real branch (bisection); the mass
/// is the residue `−1 / (β² I'(λ))` with `I' = −(λ+1) I³`.
pub fn spectral_atoms_1d(beta: f64) -> Result<Vec<SpectralAtom>> {
    if beta == 0.0 {
        return Ok(Vec::new());
    }
    let f = |lam: f64| 1.0 - beta * diagonal_closed_form_1d(Complex64::new(lam, 0.0)).re;
    let (mut a, mut b) = if beta < 0.0 {
        (-4.0 - 2.0 * beta.abs(), -2.0)
    } else {
        (0.0, beta)
    };
    // f > 0 on the far side of the root, f → −∞ towards the band edge or 0+
    let outer = if beta < 0.0 { a } else { b };
    if f(outer) <= 0.0 {
        return Err(Error::Bracket(format!("no sign change for atom of beta={beta}")));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let far_side = f(m) > 0.0;
        if far_side == (beta < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    let location = 0.5 * (a + b);
    let i = diagonal_closed_form_1d(Complex64::new(location, 0.0)).re;
    let mass = 1.0 / (beta * beta * (location + 1.0) * i * i * i);
    Ok(vec![SpectralAtom { location, mass }])
}

/// Polynomial (Neville) extrapolation of `values(ε_k)` to `ε = 0`. Returns the
/// extrapolated value and the change between the last two tableau diagonals.
pub fn richardson(eps: &[f64], values: &[f64]) -> (f64, f64) {
    let n = eps.len();
    let mut p = values.to_vec();
    let mut diag = vec![p[0]];
    for k in 1..n {
        for i in (k..n).rev() {
            p[i] = (eps[i - k] * p[i] - eps[i] * p[i - 1]) / (eps[i - k] - eps[i]);
        }
        diag.push(p[k]);
    }
    let best = *diag.last().expect("at least one value");
    let change = if n > 1 { (diag[n - 1] - diag[n - 2]).abs() } else { f64::INFINITY };
    (best, change)
}

/// `h_β(s) = lim_{ε↓0} −(1/π) Im I^β(s + iε)` for `s ∈ (−2, 0)`.
///
/// `d = 1` uses the exact boundary value of `I`; higher dimensions evaluate
/// `I^β(s + iε_k)` by quadrature along the decreasing schedule and extrapolate.
pub fn spectral_density(beta: f64, s: f64, eps_schedule: &[f64], d: usize, quad: &QuadratureSpec) -> Result<f64> {
    check_dim(d)?;
    if !(s > -2.0 && s < 0.0) {
        return Err(Error::InvalidArgument(format!("s = {s} is not inside (−2, 0)")));
    }
    if d == 1 {
        let i = diagonal_boundary_1d(s);
        return Ok(-(i / (1.0 - beta * i)).im / PI);
    }
    spectral_density_extrapolated(beta, s, eps_schedule, d, quad)
}

/// The extrapolation route of [`spectral_density`], available in every dimension.
pub fn spectral_density_extrapolated(
    beta: f64,
    s: f64,
    eps_schedule: &[f64],
    d: usize,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if eps_schedule.len() < 2 || eps_schedule.windows(2).any(|w| !(w[1] < w[0])) || eps_schedule.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("ε schedule must be a decreasing positive sequence of length ≥ 2".into()));
    }
    let values = eps_schedule
        .iter()
        .map(|&e| {
            let lam = SpectralParam::above_cut(s, e)?;
            Ok(-perturbed_diagonal(&lam, beta, d, quad)?.im / PI)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (value, change) = richardson(eps_schedule, &values);
    let tol = 1e-3 * value.abs().max(1e-6) + 1e2 * quad.abs_tol;
    if !(change <= tol) {
        return Err(Error::Extrapolation { change, tol });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Scheme;
    use approx::assert_relative_eq;

    fn q() -> QuadratureSpec {
        QuadratureSpec::with_tol(1e-10)
    }

    #[test]
    fn symbol_examples() {
        assert_eq!(symbol_phi(&[0.0]), 0.0);
        assert_relative_eq!(symbol_phi(&[PI]), 2.0, epsilon = 1e-15);
        assert_relative_eq!(symbol_phi(&[PI, 0.0]), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn spectral_param_rejects_the_cut() {
        assert!(matches!(SpectralParam::real(-1.0), Err(Error::OnSpectrum(_))));
        assert!(matches!(SpectralParam::real(0.0), Err(Error::OnSpectrum(_))));
        assert_eq!(SpectralParam::real(-3.0).unwrap().branch(), Branch::RealLeftOfSpectrum);
        assert_eq!(SpectralParam::above_cut(-1.0, 1e-3).unwrap().branch(), Branch::UpperHalfPlane);
    }

    #[test]
    fn one_dimensional_diagonal() {
        let lam = SpectralParam::real(2.0).unwrap();
        assert_relative_eq!(free_diagonal_resolvent(&lam, 1, &q()).unwrap().re, 0.353_553_390_593_273_8, epsilon = 1e-14);
        let big = 1e8;
        let v = free_diagonal_resolvent(&SpectralParam::real(big).unwrap(), 1, &q()).unwrap().re;
        assert_relative_eq!(big * v, 1.0, epsilon = 1e-7);
    }

    #[test]
    fn closed_form_is_continuous_across_left_real_axis() {
        let above = diagonal_closed_form_1d(Complex64::new(-3.0, 1e-12));
        let below = diagonal_closed_form_1d(Complex64::new(-3.0, -1e-12));
        assert!((above - below).norm() < 1e-9);
        assert!(diagonal_closed_form_1d(Complex64::new(-3.0, 0.0)).re < 0.0);
    }

    #[test]
    fn boundary_value_matches_limit_from_above() {
        let s = -0.7;
        let near = diagonal_closed_form_1d(Complex64::new(s, 1e-10));
        assert!((near - diagonal_boundary_1d(s)).norm() < 1e-8);
    }

    #[test]
    fn two_dimensional_log_divergence_is_bounded() {
        let mut diffs = Vec::new();
        for lam in [1e-2, 1e-3, 1e-4] {
            let i = free_diagonal_resolvent(&SpectralParam::real(lam).unwrap(), 2, &q()).unwrap().re;
            diffs.push(i + lam.ln() / PI);
        }
        // I(λ) + ln(λ)/π converges to ln(8)/π
        for d in &diffs {
            assert!((d - 8f64.ln() / PI).abs() < 0.01, "{diffs:?}");
        }
        assert!((diffs[2] - diffs[1]).abs() < (diffs[1] - diffs[0]).abs());
    }

    #[test]
    fn resolvent_1d_closed_form_agrees_with_quadrature() {
        for (lam, x) in [(Complex64::new(0.3, 0.0), 3), (Complex64::new(-1.0, 0.5), 2), (Complex64::new(-3.5, 0.0), 4)] {
            let p = SpectralParam::new(lam).unwrap();
            let closed = free_resolvent(&p, &Site::on_line(x), &Site::on_line(0), &q()).unwrap();
            let quad = resolvent_integral(lam, &Site::on_line(x), &q()).unwrap();
            assert!((closed - quad.value).norm() < 1e-9, "{lam} {x}: {closed} vs {}", quad.value);
        }
    }

    #[test]
    fn resolvent_symmetry() {
        let lam = SpectralParam::real(0.4).unwrap();
        let x = Site::new(&[2, -1]).unwrap();
        let y = Site::new(&[-1, 1]).unwrap();
        let a = free_resolvent(&lam, &x, &y, &q()).unwrap();
        let b = free_resolvent(&lam, &y, &x, &q()).unwrap();
        let c = free_resolvent(&lam, &x.sub(&y), &Site::origin(2).unwrap(), &q()).unwrap();
        assert!((a - b).norm() < 1e-10);
        assert!((a - c).norm() < 1e-10);
        let i = free_diagonal_resolvent(&lam, 2, &q()).unwrap();
        let r00 = free_resolvent(&lam, &Site::origin(2).unwrap(), &Site::origin(2).unwrap(), &q()).unwrap();
        assert!((i - r00).norm() < 1e-12);
    }

    #[test]
    fn diagonal_offsets_match_full_torus_average() {
        // average cos⟨φ, w⟩ over the four sign patterns of (φ_1, φ_2)
        let w = Site::new(&[1, 1]).unwrap();
        let lam = Complex64::new(0.3, 0.0);
        let torus = integrate_cube(
            move |p| {
                let mut s = 0.0;
                for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    s += (a * p[0] + b * p[1]).cos();
                }
                Complex64::new(0.25 * s, 0.0) / (lam + symbol_phi(p))
            },
            2,
            &q(),
        )
        .unwrap();
        let ours = resolvent_integral(lam, &w, &q()).unwrap();
        assert!((torus.value - ours.value).norm() < 1e-9);
    }

    #[test]
    fn a_function_values() {
        let lam = SpectralParam::real(0.5).unwrap();
        assert_eq!(a_function(&lam, &Site::origin(2).unwrap(), &q()).unwrap(), Complex64::new(0.0, 0.0));
        assert_relative_eq!(a_zero(&Site::on_line(3), &q()).unwrap(), 3.0, epsilon = 1e-9);
        for d in 1..=3 {
            let e1 = Site::unit(d, 0, true).unwrap();
            assert_relative_eq!(a_zero(&e1, &QuadratureSpec::with_tol(1e-8)).unwrap(), 1.0, epsilon = 1e-7);
        }
        assert!(a_function(&lam, &Site::new(&[1, 1]).unwrap(), &q()).unwrap().re > 0.0);
    }

    #[test]
    fn perturbed_reduces_and_poles() {
        let lam = SpectralParam::real(0.6).unwrap();
        let x = Site::on_line(2);
        let y = Site::on_line(-1);
        assert_eq!(
            perturbed_resolvent(&lam, 0.0, &x, &y, &q()).unwrap(),
            free_resolvent(&lam, &x, &y, &q()).unwrap()
        );
        let pole = SpectralParam::real(0.25).unwrap();
        assert!(matches!(perturbed_diagonal(&pole, 0.75, 1, &q()), Err(Error::Pole(_))));
    }

    #[test]
    fn killed_resolvent_structure() {
        let lam = SpectralParam::real(0.2).unwrap();
        for y in [-2, 0, 3] {
            let v = killed_resolvent(&lam, &Site::on_line(0), &Site::on_line(y), &q()).unwrap();
            assert_eq!(v, Complex64::new(0.0, 0.0));
        }
        for (x, y) in [(1, 1), (2, 5), (-3, 2), (4, -1)] {
            let v = killed_resolvent_at_zero(&Site::on_line(x), &Site::on_line(y), &q()).unwrap();
            let want = (x.abs() + y.abs() - (x - y).abs()) as f64;
            assert_relative_eq!(v, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn killed_resolvent_small_lambda_tends_to_a_form() {
        // for d=1 the λ → 0 limit of the killed resolvent is the A_0 combination
        let lam = SpectralParam::real(1e-9).unwrap();
        let v = killed_resolvent(&lam, &Site::on_line(3), &Site::on_line(2), &q()).unwrap().re;
        assert!((v - 4.0).abs() < 1e-3);
    }

    #[test]
    fn beta_critical_values() {
        assert_eq!(beta_critical(1, &q()).unwrap(), 0.0);
        assert_eq!(beta_critical(2, &q()).unwrap(), 0.0);
        let b3 = beta_critical(3, &QuadratureSpec::with_tol(1e-9)).unwrap();
        // 1 / 1.516386059151978, the expected number of visits of the simple walk on Z^3
        assert_relative_eq!(b3, 1.0 / 1.516_386_059_151_978, epsilon = 1e-7);
        let plain = QuadratureSpec {
            scheme: Scheme::TensorGaussLegendre,
            ..QuadratureSpec::with_tol(1e-9)
        };
        assert_relative_eq!(beta_critical(3, &plain).unwrap(), b3, epsilon = 1e-7);
    }

    #[test]
    fn atoms_1d_match_closed_forms() {
        for beta in [-0.5f64, -1.0, -3.0] {
            let a = spectral_atoms_1d(beta).unwrap()[0];
            assert_relative_eq!(a.location, -1.0 - (1.0 + beta * beta).sqrt(), epsilon = 1e-12);
            assert!(a.mass > 0.0 && a.mass < 1.0);
        }
        let a = spectral_atoms_1d(0.75).unwrap()[0];
        assert_relative_eq!(a.location, 0.25, epsilon = 1e-12);
        assert_relative_eq!(a.mass, 0.75 / 1.25, epsilon = 1e-10);
    }

    #[test]
    fn richardson_removes_polynomial_terms() {
        let eps = [0.1, 0.05, 0.025, 0.0125];
        let vals: Vec<f64> = eps.iter().map(|e| 2.0 + 3.0 * e - 5.0 * e * e).collect();
        let (v, _) = richardson(&eps, &vals);
        assert_relative_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn spectral_density_free_and_extrapolated_agree_in_1d() {
        let sched = [0.02, 0.01, 0.005, 0.0025];
        let s = -0.6;
        let exact = spectral_density(0.0, s, &sched, 1, &q()).unwrap();
        let want = 1.0 / (PI * (-s * (2.0 + s)).sqrt());
        assert_relative_eq!(exact, want, epsilon = 1e-12);
        let ext = spectral_density_extrapolated(-1.0, s, &sched, 1, &q()).unwrap();
        let direct = spectral_density(-1.0, s, &sched, 1, &q()).unwrap();
        assert_relative_eq!(ext, direct, epsilon = 1e-5);
    }
}
