//! Nonlinearities `f` with their derivatives and the bounds
//! `M(R) = max_{|u|<=R} |f(u)|`, `M1(R) = max_{|u|<=R} |f'(u)|`.
//!
//! Builtins use exact closed forms. User-supplied functions go through a
//! sampling path (dense grid plus golden-section refinement around the best
//! sample); such bounds are numerical, not rigorous, and assume `f'` is
//! continuous on `[-R, R]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_SAMPLES: usize = 4097;
const DERIVATIVE_REL_TOL: f64 = 1e-6;

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
enum Kind<T> {
    Exp,
    PowerShift { m: T },
    Constant { c: T },
    Affine { c: T, lambda: T },
    Custom { f: ScalarFn<T>, fprime: ScalarFn<T> },
}

#[derive(Clone)]
pub struct Nonlinearity<T> {
    name: String,
    kind: Kind<T>,
    samples: usize,
}

impl<T: Real> fmt::Debug for Nonlinearity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity").field("name", &self.name).finish()
    }
}

impl<T: Real> Nonlinearity<T> {
    /// `f(u) = e^u`
    pub fn exp() -> Self {
        Self::builtin("exp", Kind::Exp)
    }

    /// `f(u) = (u + 1)^m`, `m > 1`
    pub fn power_shift(m: T) -> Result<Self> {
        if !(m.is_finite() && m > T::one()) {
            return Err(Error::InvalidParameter(format!("power_shift needs m > 1, got {m}")));
        }
        Ok(Self::builtin(&format!("power_shift(m={m})"), Kind::PowerShift { m }))
    }

    /// `f(u) = c`
    pub fn constant(c: T) -> Result<Self> {
        finite_param("c", c)?;
        Ok(Self::builtin(&format!("constant(c={c})"), Kind::Constant { c }))
    }

    /// `f(u) = c + lambda u`
    pub fn affine(c: T, lambda: T) -> Result<Self> {
        finite_param("c", c)?;
        finite_param("lambda", lambda)?;
        Ok(Self::builtin(
            &format!("affine(c={c}, lambda={lambda})"),
            Kind::Affine { c, lambda },
        ))
    }

    /// User-defined pair `(f, f')`. The derivative is checked against a
    /// central difference of `f` on `[-probe_radius, probe_radius]`.
    pub fn custom<F, G>(name: &str, f: F, fprime: G, probe_radius: T) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
        G: Fn(T) -> T + Send + Sync + 'static,
    {
        let nl = Self::builtin(
            name,
            Kind::Custom {
                f: Arc::new(f),
                fprime: Arc::new(fprime),
            },
        );
        let check = nl.check_derivative_consistency(probe_radius)?;
        if !check.consistent {
            return Err(Error::InvalidParameter(format!(
                "derivative of `{name}` disagrees with finite differences at u = {} (relative error {:e})",
                check.worst_point, check.max_relative_error
            )));
        }
        Ok(nl)
    }

    fn builtin(name: &str, kind: Kind<T>) -> Self {
        Self {
            name: name.to_string(),
            kind,
            samples: DEFAULT_SAMPLES,
        }
    }

    /// Number of samples used by the generic bound path (at least 16).
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples.max(16);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.kind, Kind::Custom { .. })
    }

    pub fn eval(&self, u: T) -> T {
        match &self.kind {
            Kind::Exp => u.exp(),
            Kind::PowerShift { m } => power(u + T::one(), *m),
            Kind::Constant { c } => *c,
            Kind::Affine { c, lambda } => *c + *lambda * u,
            Kind::Custom { f, .. } => f(u),
        }
    }

    pub fn eval_prime(&self, u: T) -> T {
        match &self.kind {
            Kind::Exp => u.exp(),
            Kind::PowerShift { m } => *m * power(u + T::one(), *m - T::one()),
            Kind::Constant { .. } => T::zero(),
            Kind::Affine { lambda, .. } => *lambda,
            Kind::Custom { fprime, .. } => fprime(u),
        }
    }

    /// Rejects `f(0) = 0`, for which the zero field may be the solution.
    pub fn require_nonzero_at_origin(&self) -> Result<()> {
        if self.eval(T::zero()) == T::zero() {
            return Err(Error::InvalidParameter(format!(
                "`{}` vanishes at 0; the existence argument needs f(0) != 0",
                self.name
            )));
        }
        Ok(())
    }

    /// `M(R) = max_{|u| <= R} |f(u)|`.
    pub fn bound_m(&self, radius: T) -> Result<T> {
        check_radius(radius)?;
        let r = radius;
        let value = match &self.kind {
            Kind::Exp => r.exp(),
            Kind::PowerShift { m } => {
                self.require_real_power(*m, r)?;
                power(r + T::one(), *m).abs().max(power(T::one() - r, *m).abs())
            }
            Kind::Constant { c } => c.abs(),
            Kind::Affine { c, lambda } => c.abs() + lambda.abs() * r,
            Kind::Custom { .. } => return self.sampled_bound_m(r),
        };
        self.finite_bound(value, r)
    }

    /// `M1(R) = max_{|u| <= R} |f'(u)|`.
    pub fn bound_m1(&self, radius: T) -> Result<T> {
        check_radius(radius)?;
        let r = radius;
        let value = match &self.kind {
            Kind::Exp => r.exp(),
            Kind::PowerShift { m } => {
                self.require_real_power(*m, r)?;
                *m * power(r + T::one(), *m - T::one())
                    .abs()
                    .max(power(T::one() - r, *m - T::one()).abs())
            }
            Kind::Constant { .. } => T::zero(),
            Kind::Affine { lambda, .. } => lambda.abs(),
            Kind::Custom { .. } => return self.sampled_bound_m1(r),
        };
        self.finite_bound(value, r)
    }

    /// Sampling estimate of `M(R)`, used for user functions and for
    /// cross-checking the closed forms.
    pub fn sampled_bound_m(&self, radius: T) -> Result<T> {
        check_radius(radius)?;
        self.sampled_max(|u| self.eval(u).abs(), radius)
    }

    pub fn sampled_bound_m1(&self, radius: T) -> Result<T> {
        check_radius(radius)?;
        self.sampled_max(|u| self.eval_prime(u).abs(), radius)
    }

    fn sampled_max<F: Fn(T) -> T>(&self, g: F, radius: T) -> Result<T> {
        let n = self.samples;
        let step = T::lit(2.0) * radius / T::lit((n - 1) as f64);
        let mut best = (0usize, T::neg_infinity());
        for i in 0..n {
            let u = -radius + step * T::lit(i as f64);
            let v = g(u);
            if !v.is_finite() {
                return Err(self.non_finite(u));
            }
            if v > best.1 {
                best = (i, v);
            }
        }
        let center = -radius + step * T::lit(best.0 as f64);
        let lo = (center - step).max(-radius);
        let hi = (center + step).min(radius);
        Ok(best.1.max(golden_section_max(&g, lo, hi)))
    }

    /// Compares `f'` with a central difference of `f` on `2048` points of
    /// `[-R, R]`.
    pub fn check_derivative_consistency(&self, radius: T) -> Result<DerivativeCheck<T>> {
        check_radius(radius)?;
        let n = 2048;
        let mut worst = (T::zero(), T::zero());
        for i in 0..n {
            let u = -radius + T::lit(2.0) * radius * T::lit(i as f64 / (n - 1) as f64);
            let h = T::lit(1e-5) * u.abs().max(T::one());
            let fd = (self.eval(u + h) - self.eval(u - h)) / (T::lit(2.0) * h);
            let exact = self.eval_prime(u);
            if !(fd.is_finite() && exact.is_finite()) {
                return Err(self.non_finite(u));
            }
            let rel = (fd - exact).abs() / exact.abs().max(T::one());
            if rel > worst.1 {
                worst = (u, rel);
            }
        }
        Ok(DerivativeCheck {
            max_relative_error: worst.1,
            worst_point: worst.0,
            consistent: worst.1 <= T::lit(DERIVATIVE_REL_TOL),
        })
    }

    /// Checks, on the finite probe interval `[u0, probe_max]`, that
    /// `f(u)/u` is nondecreasing, that it grows across the interval, and
    /// that `f(u0)/u0 < a^2`. The tail beyond `probe_max` is not examined.
    pub fn check_growth_hypotheses(&self, u0: T, a: T, probe_max: T) -> Result<HypothesisReport<T>> {
        if !(u0 > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "u0 must be positive (f(u)/u is undefined at 0), got {u0}"
            )));
        }
        if !(probe_max > u0 && probe_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "probe_max must exceed u0, got {probe_max}"
            )));
        }
        let n = 4096;
        let ratio = |u: T| self.eval(u) / u;
        let mut monotone = true;
        let mut prev = ratio(u0);
        if !prev.is_finite() {
            return Err(self.non_finite(u0));
        }
        for i in 1..n {
            let u = u0 + (probe_max - u0) * T::lit(i as f64 / (n - 1) as f64);
            let r = ratio(u);
            if !r.is_finite() {
                return Err(self.non_finite(u));
            }
            if r < prev - T::lit(1e-12) * prev.abs() {
                monotone = false;
            }
            prev = r;
        }
        let ratio_at_u0 = ratio(u0);
        let ratio_at_probe_max = ratio(probe_max);
        let growing = ratio_at_probe_max > ratio_at_u0;
        let below_a_squared = ratio_at_u0 < a * a;
        Ok(HypothesisReport {
            u0,
            probe_max,
            monotone,
            growing,
            ratio_at_u0,
            ratio_at_probe_max,
            below_a_squared,
            holds: monotone && growing && below_a_squared,
        })
    }

    fn require_real_power(&self, m: T, radius: T) -> Result<()> {
        if m.fract() != T::zero() && radius > T::one() {
            return Err(self.non_finite(-radius));
        }
        Ok(())
    }

    fn finite_bound(&self, value: T, radius: T) -> Result<T> {
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.non_finite(radius))
        }
    }

    fn non_finite(&self, u: T) -> Error {
        Error::NonFiniteNonlinearity {
            name: self.name.clone(),
            u: u.as_f64(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck<T> {
    pub max_relative_error: T,
    pub worst_point: T,
    pub consistent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport<T> {
    pub u0: T,
    pub probe_max: T,
    /// `f(u)/u` nondecreasing on the sampled interval.
    pub monotone: bool,
    /// `f(probe_max)/probe_max > f(u0)/u0`.
    pub growing: bool,
    pub ratio_at_u0: T,
    pub ratio_at_probe_max: T,
    /// `f(u0)/u0 < a^2`.
    pub below_a_squared: bool,
    pub holds: bool,
}

/// Default probe interval end, `100 u0`.
pub fn default_probe_max<T: Real>(u0: T) -> T {
    T::lit(100.0) * u0
}

fn power<T: Real>(base: T, m: T) -> T {
    if m.fract() == T::zero() && m.abs() < T::lit(i32::MAX as f64) {
        base.powi(m.to_i32().unwrap_or(0))
    } else {
        base.powf(m)
    }
}

fn finite_param<T: Real>(name: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite")))
    }
}

fn check_radius<T: Real>(radius: T) -> Result<()> {
    if radius.is_finite() && radius > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")))
    }
}

fn golden_section_max<T: Real, F: Fn(T) -> T>(g: &F, mut lo: T, mut hi: T) -> T {
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..80 {
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = g(x1);
        }
    }
    g1.max(g2).max(g(lo)).max(g(hi))
}
