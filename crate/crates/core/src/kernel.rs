//! The screened-Poisson (Yukawa) Green function of `-eps^2 Delta + a^2`.
//!
//! In free space the kernel is `g(r) = exp(-(a/eps) r) / (4 pi r eps^2)` with
//! total mass `1/a^2`. On the periodic grid the operator is applied through
//! its Fourier multiplier `1 / (eps^2 |k|^2 + a^2)`, which sidesteps the
//! `r = 0` singularity; the closed form is kept for mass and concentration
//! identities.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::GridSpec3D;
use crate::guard::{self, GuardPolicy};
use crate::quadrature::{integrate, integrate_to_infinity};
use crate::scalar::Real;
use crate::spectral::{Fft3, Laplacian};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams<T> {
    a: T,
    epsilon: T,
}

impl<T: Real> KernelParams<T> {
    pub fn new(a: T, epsilon: T) -> Result<Self> {
        if !(a.is_finite() && a > T::zero()) {
            return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
        }
        if !(epsilon.is_finite() && epsilon > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self { a, epsilon })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// Exponential decay rate `a / eps` of the kernel.
    pub fn decay_rate(&self) -> T {
        self.a / self.epsilon
    }
}

/// Closed-form kernel value at distance `r > 0`.
pub fn yukawa_value<T: Real>(params: &KernelParams<T>, r: T) -> Result<T> {
    if !(r > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "kernel is singular at r = {r}; need r > 0"
        )));
    }
    let eps = params.epsilon;
    Ok((-params.decay_rate() * r).exp() / (T::lit(4.0 * PI) * r * eps * eps))
}

/// Total mass of the kernel over R^3, `1 / a^2`.
pub fn kernel_mass<T: Real>(params: &KernelParams<T>) -> T {
    T::one() / (params.a * params.a)
}

/// Fourier multiplier of `(-eps^2 Delta + a^2)^-1` at squared wavenumber `k2`.
pub fn spectral_symbol<T: Real>(params: &KernelParams<T>, k2: T) -> T {
    T::one() / (params.epsilon * params.epsilon * k2 + params.a * params.a)
}

/// Integral of the closed-form kernel over the cube `[-L/2, L/2]^3` centered
/// on the source.
///
/// Spherical coordinates about the source turn the cube into six faces; each
/// face is parametrized by `(s, t)` with solid-angle element
/// `c ds dt / rho^3`, `rho = |(c, s, t)|`, and the radial integral
/// `int_0^rho g(r) r^2 dr` is evaluated numerically along every direction.
pub fn kernel_mass_quadrature<T: Real>(params: &KernelParams<T>, box_length: T) -> Result<T> {
    if !(box_length > T::zero()) {
        return Err(Error::InvalidParameter("box length must be positive".into()));
    }
    let c = box_length.as_f64() / 2.0;
    let eps = params.epsilon.as_f64();
    let kappa = params.decay_rate().as_f64();
    let scale = 1.0 / (4.0 * PI * eps * eps);
    let mass_scale = kernel_mass(params).as_f64();

    let radial_tol = 1e-15 * mass_scale;
    let face_tol = 1e-14 * mass_scale / 24.0;
    let radial = |rho: f64| integrate(|r: f64| scale * r * (-kappa * r).exp(), 0.0, rho, radial_tol).value;
    let along_t = |s: f64| {
        integrate(
            |t: f64| {
                let rho = (c * c + s * s + t * t).sqrt();
                radial(rho) * c / (rho * rho * rho)
            },
            0.0,
            c,
            face_tol / c,
        )
        .value
    };
    // six faces, four symmetric quadrants each
    let quadrant = integrate(along_t, 0.0, c, face_tol).value;
    Ok(T::lit(24.0 * quadrant))
}

/// Masses of the kernel outside and inside the ball of radius `c` about the
/// source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaMasses<T> {
    pub outer: T,
    pub inner: T,
}

/// Radial quadrature of `4 pi r^2 g(r)` over `[c, inf)` and `[0, c]`.
pub fn delta_family_masses<T: Real>(params: &KernelParams<T>, c: T) -> Result<DeltaMasses<T>> {
    if !(c.is_finite() && c > T::zero()) {
        return Err(Error::InvalidParameter(format!("radius c must be positive, got {c}")));
    }
    let eps = params.epsilon;
    let kappa = params.decay_rate();
    let density = move |r: T| r * (-kappa * r).exp() / (eps * eps);
    let tol = T::lit(1e-14);
    let outer = integrate_to_infinity(density, c, tol).value;
    let inner = integrate(density, T::zero(), c, tol).value;
    Ok(DeltaMasses { outer, inner })
}

/// Periodic solver for `(-eps^2 Delta + a^2) w = v`, applied by multiplying
/// each spectral coefficient with the kernel symbol.
#[derive(Debug, Clone)]
pub struct GreenOperator<T: Real> {
    grid: GridSpec3D<T>,
    params: KernelParams<T>,
    fft: Fft3<T>,
    multiplier: Vec<T>,
}

impl<T: Real> GreenOperator<T> {
    pub fn new(grid: GridSpec3D<T>, params: KernelParams<T>, laplacian: Laplacian) -> Self {
        let multiplier = laplacian
            .negative_symbol(&grid)
            .into_iter()
            .map(|k2| spectral_symbol(&params, k2))
            .collect();
        Self {
            grid,
            params,
            fft: Fft3::new(grid.points_per_axis()),
            multiplier,
        }
    }

    pub fn grid(&self) -> &GridSpec3D<T> {
        &self.grid
    }

    pub fn params(&self) -> &KernelParams<T> {
        &self.params
    }

    pub fn multiplier(&self) -> &[T] {
        &self.multiplier
    }

    pub fn apply(&self, v: &ScalarField<T>) -> Result<ScalarField<T>> {
        if *v.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut spec = self.fft.forward(v);
        spec.apply_multiplier(&self.multiplier);
        self.fft.inverse(&spec)
    }
}

/// Periodic solution of `(-eps^2 Delta + a^2) w = v`, subject to the
/// discretization guards.
pub fn convolve_green<T: Real>(
    v: &ScalarField<T>,
    params: &KernelParams<T>,
    policy: GuardPolicy,
) -> Result<ScalarField<T>> {
    guard::check(v.grid(), params.a, params.epsilon, policy)?;
    GreenOperator::new(*v.grid(), *params, Laplacian::Spectral).apply(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierRow<T> {
    pub epsilon: T,
    pub deviation: T,
}

/// `sup |G_eps h - h / a^2|` for each `eps` in `eps_list`.
pub fn mollifier_limit_check<T: Real>(h: &ScalarField<T>, a: T, eps_list: &[T]) -> Result<Vec<MollifierRow<T>>> {
    let limit = h.scale(T::one() / (a * a))?;
    eps_list
        .iter()
        .map(|&epsilon| {
            let params = KernelParams::new(a, epsilon)?;
            let smoothed = GreenOperator::new(*h.grid(), params, Laplacian::Spectral).apply(h)?;
            Ok(MollifierRow {
                epsilon,
                deviation: smoothed.sup_distance(&limit)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::negative_laplacian;

    fn params(a: f64, eps: f64) -> KernelParams<f64> {
        KernelParams::new(a, eps).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(KernelParams::new(0.0, 1.0).is_err());
        assert!(KernelParams::new(1.0, -1.0).is_err());
        assert!(KernelParams::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn closed_form_value() {
        let v = yukawa_value(&params(1.0, 1.0), 1.0).unwrap();
        assert!((v - (-1.0f64).exp() / (4.0 * PI)).abs() < 1e-15);
        assert!((v - 0.029274915).abs() < 1e-9);
        assert!(yukawa_value(&params(1.0, 1.0), 0.0).is_err());
        assert!(yukawa_value(&params(1.0, 1.0), -0.5).is_err());
    }

    #[test]
    fn value_decays_monotonically() {
        let p = params(1.3, 0.7);
        let vals: Vec<f64> = (1..200).map(|i| yukawa_value(&p, 0.05 * i as f64).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(*vals.last().unwrap() < 1e-5);
    }

    #[test]
    fn decay_rate_invariance() {
        let lhs = yukawa_value(&params(2.0, 0.5), 1.0).unwrap();
        let rhs = yukawa_value(&params(4.0, 1.0), 1.0).unwrap() * 4.0;
        assert!((lhs - rhs).abs() < 1e-15 * lhs);
    }

    #[test]
    fn mass_closed_form() {
        assert_eq!(kernel_mass(&params(2.0, 0.3)), 0.25);
        assert!((kernel_mass(&params(5f64.sqrt(), 0.3)) - 0.2).abs() < 1e-15);
        assert_eq!(kernel_mass(&params(1.0, 0.3)), 1.0);
    }

    #[test]
    fn symbol_values() {
        let p = params(2.0, 0.7);
        assert_eq!(spectral_symbol(&p, 0.0), kernel_mass(&p));
        assert_eq!(spectral_symbol(&params(1.0, 1.0), 3.0), 0.25);
        let tiny = params(2.0, 1e-9);
        assert!((spectral_symbol(&tiny, 100.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn quadrature_mass_loses_tail_in_small_box() {
        // a L / (2 eps) = 2: a sizeable fraction of the mass leaves the cube
        let p = params(1.0, 0.5);
        let m = kernel_mass_quadrature(&p, 2.0).unwrap();
        assert!(m < 0.95 && m > 0.5, "{m}");
    }

    #[test]
    fn constant_field_is_scaled_by_mass() {
        let g = GridSpec3D::new(1.0, 8).unwrap();
        let v = ScalarField::constant(g, 3.0).unwrap();
        let w = GreenOperator::new(g, params(2.0, 0.1), Laplacian::Spectral).apply(&v).unwrap();
        assert!(w.sup_distance(&ScalarField::constant(g, 0.75).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn single_mode_multiplier() {
        let l = 2.0;
        let (a, eps) = (1.5, 0.3);
        let g = GridSpec3D::new(l, 16).unwrap();
        let k = 2.0 * PI / l;
        let v = ScalarField::sample(g, |x, _, _| (k * x).sin()).unwrap();
        let w = GreenOperator::new(g, params(a, eps), Laplacian::Spectral).apply(&v).unwrap();
        let expected = v.scale(1.0 / (eps * eps * k * k + a * a)).unwrap();
        assert!(w.sup_distance(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn residual_of_screened_poisson_solve() {
        let g = GridSpec3D::<f64>::new(1.0, 16).unwrap();
        let v = ScalarField::sample(g, |x, y, z| ((x * 17.0).sin() + y * z * 3.0).cos() - x).unwrap();
        let p = params(1.2, 0.05);
        let w = GreenOperator::new(g, p, Laplacian::Spectral).apply(&v).unwrap();
        let lap = negative_laplacian(&w, Laplacian::Spectral).unwrap();
        let lhs = lap.scale(0.05 * 0.05).unwrap().add(&w.scale(1.44).unwrap()).unwrap();
        assert!(lhs.sup_distance(&v).unwrap() <= 1e-9 * v.sup_norm());
    }

    #[test]
    fn convolve_green_enforces_guard() {
        let g = GridSpec3D::new(1.0, 8).unwrap();
        let v = ScalarField::constant(g, 1.0).unwrap();
        assert!(matches!(
            convolve_green(&v, &params(1.0, 0.5), GuardPolicy::Enforce),
            Err(Error::Guard(_))
        ));
        let w = convolve_green(&v, &params(1.0, 0.5), GuardPolicy::Override).unwrap();
        assert!((w.mean() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn delta_masses_are_additive() {
        for eps in [0.5, 0.2, 0.1, 0.01] {
            let p = params(2.0, eps);
            let m = delta_family_masses(&p, 0.3).unwrap();
            assert!((m.outer + m.inner - 0.25).abs() < 1e-13, "eps = {eps}");
        }
    }

    #[test]
    fn constant_h_has_no_mollifier_deviation() {
        let g = GridSpec3D::new(1.0, 8).unwrap();
        let h = ScalarField::constant(g, 1.0).unwrap();
        for row in mollifier_limit_check(&h, 1.7, &[0.5, 0.1, 0.01]).unwrap() {
            assert!(row.deviation < 1e-14);
        }
    }
}
