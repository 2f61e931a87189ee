//! Integral formulation `u = T_eps(u)` of `-eps^2 Delta u + q u = f(u)`.
//!
//! With `p = q - a^2 >= 0` and `G` the solution operator of
//! `-eps^2 Delta + a^2`, the equation reads `u = G(-p u + f(u))`. On the ball
//! `B_R` the map is a contraction when
//!
//! * `(|p| R + M(R)) / a^2 <= R` (the ball is mapped into itself), and
//! * `gamma = (|p| + M1(R)) / a^2 < 1` (Lipschitz constant below one).
//!
//! Neither condition involves `eps`, which is what makes the `eps -> 0`
//! argument work: the limiting map `T_0(u) = (-p u + f(u)) / a^2` has a
//! fixed point `u` solving `q u = f(u)`, and the Picard estimate gives
//! `|u_eps - u| <= |T_eps(u) - T_0(u)| / (1 - gamma)`.

use std::io::Write;

use log::warn;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::fixed_point::{picard_iterate, PicardSettings, SolveReport};
use crate::grid::GridSpec3D;
use crate::guard::{self, GuardPolicy};
use crate::kernel::{GreenOperator, KernelParams};
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Real;
use crate::spectral::Laplacian;

/// Cap on per-point iterations in [`solve_limit`].
const LIMIT_MAX_ITER: usize = 100_000;

/// A fully specified problem on one grid.
#[derive(Debug, Clone)]
pub struct ProblemSpec<T: Real> {
    q: ScalarField<T>,
    p: ScalarField<T>,
    norm_p: T,
    a: T,
    f: Nonlinearity<T>,
    epsilon: T,
    radius: T,
    green: GreenOperator<T>,
}

impl<T: Real> ProblemSpec<T> {
    /// Builds the problem, rejecting potentials with `q < a^2` anywhere.
    ///
    /// Round-off deficits of a few ulps of `a^2` (e.g. `1 + sin` sampled
    /// exactly at its minimum) are clamped to `p = 0`.
    pub fn new(q: ScalarField<T>, a: T, f: Nonlinearity<T>, epsilon: T, radius: T) -> Result<Self> {
        let params = KernelParams::new(a, epsilon)?;
        if !(radius.is_finite() && radius > T::zero()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        let p = potential_excess(&q, a)?;
        let norm_p = p.sup_norm();
        let green = GreenOperator::new(*q.grid(), params, Laplacian::Spectral);
        Ok(Self {
            q,
            p,
            norm_p,
            a,
            f,
            epsilon,
            radius,
            green,
        })
    }

    /// Same problem at a different `eps`.
    pub fn with_epsilon(&self, epsilon: T) -> Result<Self> {
        let params = KernelParams::new(self.a, epsilon)?;
        Ok(Self {
            epsilon,
            green: GreenOperator::new(*self.q.grid(), params, Laplacian::Spectral),
            ..self.clone()
        })
    }

    pub fn grid(&self) -> &GridSpec3D<T> {
        self.q.grid()
    }

    pub fn q(&self) -> &ScalarField<T> {
        &self.q
    }

    pub fn p(&self) -> &ScalarField<T> {
        &self.p
    }

    pub fn norm_p(&self) -> T {
        self.norm_p
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn nonlinearity(&self) -> &Nonlinearity<T> {
        &self.f
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn kernel_params(&self) -> &KernelParams<T> {
        self.green.params()
    }
}

/// `p = q - a^2`, validated nonnegative.
pub(crate) fn potential_excess<T: Real>(q: &ScalarField<T>, a: T) -> Result<ScalarField<T>> {
    let a2 = a * a;
    let slack = T::lit(16.0) * T::epsilon() * a2.max(T::one());
    let grid = q.grid();
    let mut values = Vec::with_capacity(grid.len());
    for (idx, &qv) in q.values().iter().enumerate() {
        let pv = qv - a2;
        if pv < -slack {
            let (i, j, k) = grid.unravel(idx);
            return Err(Error::PotentialBelowFloor {
                i,
                j,
                k,
                q: qv.as_f64(),
                a_squared: a2.as_f64(),
            });
        }
        values.push(pv.max(T::zero()));
    }
    ScalarField::from_values(*grid, values)
}

/// Verdict on the two contraction conditions for a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionCertificate<T> {
    pub radius: T,
    pub a: T,
    pub norm_p: T,
    pub m_r: T,
    pub m1_r: T,
    /// `(|p| R + M(R)) / a^2`, must not exceed `R`.
    pub ball_condition_value: T,
    /// `(|p| + M1(R)) / a^2`, must be below one.
    pub gamma: T,
    pub passes: bool,
    /// True when `M` and `M1` came from sampling rather than closed forms.
    pub numerical_bounds: bool,
}

impl<T: Real> ContractionCertificate<T> {
    pub fn ball_condition_holds(&self) -> bool {
        self.ball_condition_value <= self.radius
    }

    pub fn contraction_holds(&self) -> bool {
        self.gamma < T::one()
    }
}

/// Certificate from raw ingredients; shared by the rescaled and
/// general-potential formulations.
pub fn certificate_from_parts<T: Real>(
    f: &Nonlinearity<T>,
    a: T,
    norm_p: T,
    radius: T,
) -> Result<ContractionCertificate<T>> {
    let m_r = f.bound_m(radius)?;
    let m1_r = f.bound_m1(radius)?;
    let a2 = a * a;
    let ball_condition_value = (norm_p * radius + m_r) / a2;
    let gamma = (norm_p + m1_r) / a2;
    Ok(ContractionCertificate {
        radius,
        a,
        norm_p,
        m_r,
        m1_r,
        ball_condition_value,
        gamma,
        passes: ball_condition_value <= radius && gamma < T::one(),
        numerical_bounds: !f.is_builtin(),
    })
}

pub fn certify<T: Real>(spec: &ProblemSpec<T>) -> Result<ContractionCertificate<T>> {
    certificate_from_parts(&spec.f, spec.a, spec.norm_p, spec.radius)
}

/// `-p u + f(u)`, the right-hand side fed to the Green operator.
fn source_term<T: Real>(u: &ScalarField<T>, spec: &ProblemSpec<T>) -> Result<ScalarField<T>> {
    let f = &spec.f;
    u.zip_with(&spec.p, |uv, pv| -pv * uv + f.eval(uv))
}

/// `T_eps(u) = G(-p u + f(u))`, the periodic solution of
/// `(-eps^2 Delta + a^2) w = -p u + f(u)`.
pub fn apply_t<T: Real>(u: &ScalarField<T>, spec: &ProblemSpec<T>) -> Result<ScalarField<T>> {
    spec.green.apply(&source_term(u, spec)?)
}

/// `T_0(u) = (-p u + f(u)) / a^2`, pointwise.
pub fn apply_t0<T: Real>(u: &ScalarField<T>, spec: &ProblemSpec<T>) -> Result<ScalarField<T>> {
    let a2 = spec.a * spec.a;
    source_term(u, spec)?.map(|v| v / a2)
}

/// Picard iteration on `T_eps`. A failing certificate only downgrades the
/// stopping rule (with a warning); the iteration may still converge.
pub fn picard_solve<T: Real>(
    spec: &ProblemSpec<T>,
    initial: ScalarField<T>,
    tol: T,
    max_iter: usize,
) -> Result<SolveReport<T>> {
    if initial.grid() != spec.grid() {
        return Err(Error::GridMismatch);
    }
    let cert = certify(spec)?;
    if !cert.passes {
        warn!(
            "certificate fails (ball value {}, gamma {}); iterating anyway",
            cert.ball_condition_value, cert.gamma
        );
    }
    let settings = PicardSettings {
        tol,
        max_iter,
        gamma: cert.gamma,
        radius: spec.radius,
        certified: cert.passes,
    };
    picard_iterate(|u| apply_t(u, spec), initial, &settings)
}

/// Solves `q u = f(u)` at every grid point by iterating `T_0` from zero.
///
/// The root reached this way is the one inside the contraction regime; a
/// scalar equation like `5u = e^u` has a second root the iteration does not
/// select.
pub fn solve_limit<T: Real>(spec: &ProblemSpec<T>, tol: T) -> Result<ScalarField<T>> {
    let grid = *spec.grid();
    let mut values = Vec::with_capacity(grid.len());
    for (idx, &pv) in spec.p.values().iter().enumerate() {
        match limit_point(pv, spec.a, &spec.f, spec.radius, tol) {
            Some(u) => values.push(u),
            None => {
                let (i, j, k) = grid.unravel(idx);
                return Err(Error::PointwiseDivergence {
                    i,
                    j,
                    k,
                    q: spec.q.values()[idx].as_f64(),
                });
            }
        }
    }
    ScalarField::from_values(grid, values)
}

/// Scalar iteration `u <- (-p u + f(u)) / a^2` from zero; `None` if it
/// leaves `[-2R, 2R]` or fails to settle.
pub(crate) fn limit_point<T: Real>(p: T, a: T, f: &Nonlinearity<T>, radius: T, tol: T) -> Option<T> {
    let a2 = a * a;
    let escape = T::lit(2.0) * radius;
    let mut u = T::zero();
    for _ in 0..LIMIT_MAX_ITER {
        let next = (-p * u + f.eval(u)) / a2;
        if !next.is_finite() || next.abs() > escape {
            return None;
        }
        let step = (next - u).abs();
        u = next;
        if step <= tol {
            return Some(u);
        }
    }
    None
}

/// `sup |q u - f(u)|`.
pub fn limit_residual<T: Real>(spec: &ProblemSpec<T>, u: &ScalarField<T>) -> Result<T> {
    let f = &spec.f;
    Ok(u.zip_with(&spec.q, |uv, qv| qv * uv - f.eval(uv))?.sup_norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub epsilon: T,
    pub iterations: usize,
    pub gamma: T,
    pub observed_contraction: T,
    /// `sup |u_eps - u_limit|`
    pub err: T,
    /// `sup |T_eps(u_limit) - T_0(u_limit)| / (1 - gamma)`
    pub bound: T,
}

#[derive(Debug, Clone)]
pub struct SweepTable<T> {
    pub gamma: T,
    pub rows: Vec<SweepRow<T>>,
    pub limit: ScalarField<T>,
    pub solutions: Vec<ScalarField<T>>,
}

impl<T: Real> SweepTable<T> {
    pub fn err_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].err < w[0].err)
    }

    /// `err <= (1 + slack) * bound` on every row.
    pub fn within_bound(&self, slack: T) -> bool {
        self.rows.iter().all(|r| r.err <= (T::one() + slack) * r.bound)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epsilon", "iterations", "gamma", "observed_contraction", "err", "bound"])?;
        for r in &self.rows {
            w.serialize((
                r.epsilon.as_f64(),
                r.iterations,
                r.gamma.as_f64(),
                r.observed_contraction.as_f64(),
                r.err.as_f64(),
                r.bound.as_f64(),
            ))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Solves the template problem at each `eps` (strictly decreasing) and
/// compares against the limit solution.
pub fn epsilon_sweep<T: Real>(
    template: &ProblemSpec<T>,
    eps_list: &[T],
    tol: T,
    max_iter: usize,
    policy: GuardPolicy,
) -> Result<SweepTable<T>> {
    if eps_list.is_empty() {
        return Err(Error::InvalidParameter("empty epsilon list".into()));
    }
    if eps_list.iter().any(|&e| !(e > T::zero() && e.is_finite())) || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "epsilon list must be positive and strictly decreasing".into(),
        ));
    }
    let cert = certify(template)?;
    if !cert.passes {
        return Err(Error::Precondition(format!(
            "sweep needs a passing certificate (ball value {}, gamma {})",
            cert.ball_condition_value, cert.gamma
        )));
    }
    for &eps in eps_list {
        guard::check(template.grid(), template.a, eps, policy)?;
    }
    let limit = solve_limit(template, tol)?;
    let t0_limit = apply_t0(&limit, template)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    let mut solutions = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let spec = template.with_epsilon(eps)?;
        let report = picard_solve(&spec, ScalarField::zeros(*spec.grid()), tol, max_iter)?;
        if !report.converged {
            return Err(Error::Precondition(format!(
                "Picard iteration did not converge at eps = {eps} within {max_iter} iterations"
            )));
        }
        let err = report.solution.sup_distance(&limit)?;
        let bound = apply_t(&limit, &spec)?.sup_distance(&t0_limit)? / (T::one() - cert.gamma);
        rows.push(SweepRow {
            epsilon: eps,
            iterations: report.iterations,
            gamma: cert.gamma,
            observed_contraction: report.observed_contraction,
            err,
            bound,
        });
        solutions.push(report.solution);
    }
    Ok(SweepTable {
        gamma: cert.gamma,
        rows,
        limit,
        solutions,
    })
}
