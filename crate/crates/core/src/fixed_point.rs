//! Picard iteration `u_{n+1} = T(u_n)` with contraction-aware stopping.

use log::warn;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardSettings<T> {
    /// Target a-posteriori error when `certified`, plain step size otherwise.
    pub tol: T,
    pub max_iter: usize,
    /// Contraction constant from the certificate.
    pub gamma: T,
    /// Radius `R` of the ball the iteration is certified to stay in.
    pub radius: T,
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub iterations: usize,
    /// `sup |u_{n+1} - u_n|` for every iteration performed.
    pub residual_history: Vec<T>,
    /// Largest ratio of consecutive step sizes, skipping the first two steps.
    pub observed_contraction: T,
    /// `gamma / (1 - gamma)` times the last step; infinite when uncertified.
    pub aposteriori_bound: T,
    pub gamma: T,
    pub certified: bool,
    pub max_iterate_norm: T,
    pub solution: ScalarField<T>,
    pub converged: bool,
}

impl<T: Real> SolveReport<T> {
    pub fn last_step(&self) -> T {
        self.residual_history.last().copied().unwrap_or_else(T::zero)
    }
}

/// Runs the iteration until the stopping rule fires or `max_iter` is hit.
///
/// With a certificate (`gamma < 1`) the rule is
/// `gamma / (1 - gamma) * |u_{n+1} - u_n| <= tol`, which bounds the distance
/// to the fixed point by `tol`. Iterates must then stay in `B_R` (checked
/// when the initial guess does). Without a certificate the iteration stops
/// on `|u_{n+1} - u_n| <= tol`. Any iterate outside `B_{2R}` aborts.
pub fn picard_iterate<T, F>(mut map: F, initial: ScalarField<T>, settings: &PicardSettings<T>) -> Result<SolveReport<T>>
where
    T: Real,
    F: FnMut(&ScalarField<T>) -> Result<ScalarField<T>>,
{
    let PicardSettings {
        tol,
        max_iter,
        gamma,
        radius,
        certified,
    } = *settings;
    let certified = certified && gamma < T::one();
    if !certified {
        warn!("contraction certificate does not hold; stopping on step size only");
    }
    let ball_slack = T::lit(1e-12) * radius.max(T::one());
    let check_ball = certified && initial.sup_norm() <= radius + ball_slack;
    let escape = T::lit(2.0) * radius;

    let mut u = initial;
    let mut history: Vec<T> = Vec::new();
    let mut max_norm = u.sup_norm();
    let mut converged = false;
    for iteration in 1..=max_iter {
        let next = map(&u)?;
        let step = next.sup_distance(&u)?;
        let norm = next.sup_norm();
        history.push(step);
        if norm > escape {
            return Err(Error::Divergence {
                iteration,
                norm: norm.as_f64(),
                limit: escape.as_f64(),
                residual_history: history.iter().map(|s| s.as_f64()).collect(),
            });
        }
        if check_ball && norm > radius + ball_slack {
            return Err(Error::BallInvariant {
                iteration,
                norm: norm.as_f64(),
                radius: radius.as_f64(),
            });
        }
        max_norm = max_norm.max(norm);
        u = next;
        let done = if certified {
            gamma * step <= tol * (T::one() - gamma)
        } else {
            step <= tol
        };
        if step == T::zero() || done {
            converged = true;
            break;
        }
    }

    let observed_contraction = history
        .windows(2)
        .skip(1)
        .filter(|w| w[0] > T::zero())
        .map(|w| w[1] / w[0])
        .fold(T::zero(), T::max);
    let last = history.last().copied().unwrap_or_else(T::zero);
    let aposteriori_bound = if certified {
        gamma / (T::one() - gamma) * last
    } else {
        T::infinity()
    };
    Ok(SolveReport {
        iterations: history.len(),
        residual_history: history,
        observed_contraction,
        aposteriori_bound,
        gamma,
        certified,
        max_iterate_norm: max_norm,
        solution: u,
        converged,
    })
}
