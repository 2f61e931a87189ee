//! Rescaled formulation around a base point `xi`.
//!
//! With `x = xi + eps y` and `w(y) = u(xi + eps y)` the equation becomes
//! `-Delta_y w + q(xi + eps y) w = f(w)`, whose kernel is the `eps = 1`
//! Green function with mass `1/a^2`. `eps` now enters only through the
//! potential argument, so `eps = 0` freezes the coefficient at `q(xi)` and
//! the solution is the constant root of `q(xi) w = f(w)`.

use std::io::Write;

use log::warn;

use crate::contraction::{certificate_from_parts, limit_point, potential_excess, ContractionCertificate};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::fixed_point::{picard_iterate, PicardSettings};
use crate::grid::GridSpec3D;
use crate::kernel::{GreenOperator, KernelParams};
use crate::nonlinearity::Nonlinearity;
use crate::potential::Potential;
use crate::scalar::Real;
use crate::spectral::Laplacian;

#[derive(Debug, Clone)]
pub struct RescaledProblem<T: Real> {
    xi: [T; 3],
    epsilon: T,
    potential: Potential<T>,
    f: Nonlinearity<T>,
    a: T,
    radius: T,
    /// `q(xi + eps y) - a^2` on the y-grid, `y` centred at the origin.
    p: ScalarField<T>,
    green: GreenOperator<T>,
}

impl<T: Real> RescaledProblem<T> {
    pub fn new(
        xi: [T; 3],
        epsilon: T,
        potential: Potential<T>,
        f: Nonlinearity<T>,
        a: T,
        radius: T,
        y_grid: GridSpec3D<T>,
    ) -> Result<Self> {
        if !(epsilon >= T::zero() && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        let params = KernelParams::new(a, T::one())?;
        let n = y_grid.points_per_axis();
        let mut q = Vec::with_capacity(y_grid.len());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let y = [
                        y_grid.signed_coordinate(i),
                        y_grid.signed_coordinate(j),
                        y_grid.signed_coordinate(k),
                    ];
                    q.push(potential.eval([xi[0] + epsilon * y[0], xi[1] + epsilon * y[1], xi[2] + epsilon * y[2]]));
                }
            }
        }
        let q = ScalarField::from_values(y_grid, q)?;
        let p = potential_excess(&q, a)?;
        Ok(Self {
            xi,
            epsilon,
            potential,
            f,
            a,
            radius,
            p,
            green: GreenOperator::new(y_grid, params, Laplacian::Spectral),
        })
    }

    pub fn xi(&self) -> [T; 3] {
        self.xi
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn y_grid(&self) -> &GridSpec3D<T> {
        self.green.grid()
    }

    pub fn p(&self) -> &ScalarField<T> {
        &self.p
    }

    /// `q(xi)`, the frozen coefficient.
    pub fn q_at_xi(&self) -> T {
        self.potential.eval(self.xi)
    }

    /// Parameters of the `eps`-free kernel, `(a, 1)`.
    pub fn kernel_params(&self) -> &KernelParams<T> {
        self.green.params()
    }

    /// `q(xi) > M1(R)`: the frozen-coefficient map `w -> f(w)/q(xi)` is then
    /// a contraction on `B_R`.
    pub fn uniqueness_holds(&self) -> Result<bool> {
        Ok(self.q_at_xi() > self.f.bound_m1(self.radius)?)
    }

    /// Contraction certificate with `|p|` taken over the y-box.
    pub fn certify(&self) -> Result<ContractionCertificate<T>> {
        certificate_from_parts(&self.f, self.a, self.p.sup_norm(), self.radius)
    }
}

/// `G(-p(eps y + xi) w + f(w))` with the `eps = 1` kernel.
pub fn apply_t_rescaled<T: Real>(w: &ScalarField<T>, prob: &RescaledProblem<T>) -> Result<ScalarField<T>> {
    let f = &prob.f;
    let source = w.zip_with(&prob.p, |wv, pv| -pv * wv + f.eval(wv))?;
    prob.green.apply(&source)
}

#[derive(Debug, Clone)]
pub struct RescaledReport<T> {
    pub solution: ScalarField<T>,
    pub iterations: usize,
    pub converged: bool,
    /// `sup w - inf w` over the y-grid.
    pub y_variation: T,
    /// `w` at `y = 0`, i.e. at the base point.
    pub value: T,
    /// `|q(xi) w - f(w)|` at `y = 0`.
    pub residual: T,
    /// `q(xi) > M1(R)`.
    pub uniqueness_ok: bool,
    pub warning: Option<String>,
    pub certificate: ContractionCertificate<T>,
}

/// Picard iteration on the rescaled map from `w = 0`.
pub fn solve_rescaled<T: Real>(prob: &RescaledProblem<T>, tol: T, max_iter: usize) -> Result<RescaledReport<T>> {
    let cert = prob.certify()?;
    let q_xi = prob.q_at_xi();
    let uniqueness_ok = prob.uniqueness_holds()?;
    let warning = if uniqueness_ok {
        None
    } else {
        let msg = format!(
            "uniqueness condition q(xi) > M1(R) fails: q(xi) = {q_xi}, M1({}) = {}",
            prob.radius, cert.m1_r
        );
        warn!("{msg}");
        Some(msg)
    };
    let settings = PicardSettings {
        tol,
        max_iter,
        gamma: cert.gamma,
        radius: prob.radius,
        certified: cert.passes,
    };
    let report = picard_iterate(|w| apply_t_rescaled(w, prob), ScalarField::zeros(*prob.y_grid()), &settings)?;
    let w = report.solution;
    let value = w.get(0, 0, 0);
    Ok(RescaledReport {
        y_variation: w.max() - w.min(),
        value,
        residual: (q_xi * value - prob.f.eval(value)).abs(),
        iterations: report.iterations,
        converged: report.converged,
        uniqueness_ok,
        warning,
        certificate: cert,
        solution: w,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiRow<T> {
    pub xi: [T; 3],
    pub w: T,
    /// `q(xi) w - f(w)`
    pub residual: T,
}

/// Frozen-coefficient (`eps = 0`) solutions at each base point, solved as
/// scalar equations.
pub fn xi_sweep<T: Real>(
    potential: &Potential<T>,
    f: &Nonlinearity<T>,
    a: T,
    radius: T,
    xis: &[[T; 3]],
    tol: T,
) -> Result<Vec<XiRow<T>>> {
    let a2 = a * a;
    xis.iter()
        .map(|&xi| {
            let q = potential.eval(xi);
            if q < a2 {
                return Err(Error::InvalidParameter(format!("q(xi) = {q} is below a^2 = {a2}")));
            }
            let w = limit_point(q - a2, a, f, radius, tol).ok_or_else(|| {
                Error::Precondition(format!("frozen-coefficient iteration diverged at xi = {xi:?}"))
            })?;
            Ok(XiRow {
                xi,
                w,
                residual: q * w - f.eval(w),
            })
        })
        .collect()
}

pub fn write_xi_csv<T: Real, W: Write>(rows: &[XiRow<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["xi1", "xi2", "xi3", "w", "residual"])?;
    for r in rows {
        w.serialize((
            r.xi[0].as_f64(),
            r.xi[1].as_f64(),
            r.xi[2].as_f64(),
            r.w.as_f64(),
            r.residual.as_f64(),
        ))?;
    }
    w.flush()?;
    Ok(())
}
