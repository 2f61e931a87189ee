//! Jacobi-preconditioned conjugate gradients for SPD operators.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
pub struct CgOutcome<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    /// `|b - A x|_2 / |b|_2`, recomputed from the returned solution.
    pub relative_residual: T,
    pub residual_history: Vec<T>,
}

fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

fn norm<T: Real>(x: &[T]) -> T {
    dot(x, x).sqrt()
}

/// Solves `A x = b` to relative residual `rel_tol`.
///
/// `apply` computes `A x`; `diag` is the diagonal of `A`, used as the
/// preconditioner. The recursive residual is confirmed against the true
/// residual before returning, restarting if round-off has let them drift.
pub fn pcg<T, A>(apply: A, diag: &[T], b: &[T], x0: Option<&[T]>, rel_tol: T, max_iter: usize) -> Result<CgOutcome<T>>
where
    T: Real,
    A: Fn(&[T]) -> Vec<T>,
{
    let n = b.len();
    if diag.len() != n || x0.is_some_and(|x| x.len() != n) {
        return Err(Error::InvalidParameter("operator and right-hand side sizes differ".into()));
    }
    if diag.iter().any(|&d| !(d > T::zero())) {
        return Err(Error::InvalidParameter("preconditioner diagonal must be positive".into()));
    }
    let b_norm = norm(b);
    if b_norm == T::zero() {
        return Ok(CgOutcome {
            solution: vec![T::zero(); n],
            iterations: 0,
            relative_residual: T::zero(),
            residual_history: Vec::new(),
        });
    }
    let target = rel_tol * b_norm;
    let mut x: Vec<T> = x0.map_or_else(|| vec![T::zero(); n], |x| x.to_vec());
    let mut history = Vec::new();
    let mut iterations = 0;

    let stagnation = |iterations: usize, residual: T, history: &[T]| Error::Stagnation {
        iterations,
        residual: (residual / b_norm).as_f64(),
        residual_history: history.iter().map(|v| v.as_f64()).collect(),
    };

    // each pass restarts from the true residual
    let mut previous = T::infinity();
    loop {
        let ax = apply(&x);
        let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
        let true_res = norm(&r);
        if true_res <= target {
            return Ok(CgOutcome {
                solution: x,
                iterations,
                relative_residual: true_res / b_norm,
                residual_history: history,
            });
        }
        if iterations >= max_iter || true_res >= previous {
            return Err(stagnation(iterations, true_res, &history));
        }
        previous = true_res;
        let mut z: Vec<T> = r.iter().zip(diag).map(|(&ri, &di)| ri / di).collect();
        let mut d = z.clone();
        let mut rz = dot(&r, &z);
        while iterations < max_iter {
            let ad = apply(&d);
            let dad = dot(&d, &ad);
            if !(dad > T::zero()) {
                return Err(stagnation(iterations, norm(&r), &history));
            }
            let alpha = rz / dad;
            for i in 0..n {
                x[i] = x[i] + alpha * d[i];
                r[i] = r[i] - alpha * ad[i];
            }
            iterations += 1;
            let res = norm(&r);
            history.push(res / b_norm);
            if res <= target {
                break;
            }
            for i in 0..n {
                z[i] = r[i] / diag[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                d[i] = z[i] + beta * d[i];
            }
        }
    }
}
