//! Variable potentials: the operator `-eps^2 Delta + q` with `q >= a^2`
//! kept whole rather than split into `a^2` plus a perturbation.
//!
//! With the 7-point stencil the matrix is a symmetric M-matrix, so its
//! inverse (the discrete Green function) is entrywise nonnegative, is
//! monotone decreasing in `q`, and has column sums `h^3 sum g <= 1/a^2`.
//! The solution map `u -> A^{-1} f(u)` is then a contraction with constant
//! `M1(R)/a^2` whenever that is below one, however large `q` gets.

use std::io::Write;

use log::warn;

use crate::cg::{pcg, DEFAULT_MAX_ITER};
use crate::contraction::potential_excess;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::fixed_point::{picard_iterate, PicardSettings, SolveReport};
use crate::grid::GridSpec3D;
use crate::guard::{self, GuardPolicy};
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Real;
use crate::spectral::{Fft3, Laplacian};

/// Largest grid on which Green columns are computed.
pub const GREEN_COLUMN_MAX_N: usize = 32;

/// Default relative residual for linear solves.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// `-eps^2 Delta + q` on the periodic grid carrying `q`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<T: Real> {
    epsilon: T,
    a: T,
    q: ScalarField<T>,
    laplacian: Laplacian,
    /// `eps^2` times the symbol of `-Delta`; spectral form only.
    scaled_symbol: Option<Vec<T>>,
    fft: Option<Fft3<T>>,
}

impl<T: Real> DiscreteOperator<T> {
    /// 7-point stencil operator; `q >= a^2` is checked.
    pub fn new(q: ScalarField<T>, epsilon: T, a: T) -> Result<Self> {
        Self::with_laplacian(q, epsilon, a, Laplacian::SevenPoint)
    }

    pub fn with_laplacian(q: ScalarField<T>, epsilon: T, a: T, laplacian: Laplacian) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(a > T::zero() && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
        }
        // validates q >= a^2
        potential_excess(&q, a)?;
        let (scaled_symbol, fft) = match laplacian {
            Laplacian::Spectral => {
                let e2 = epsilon * epsilon;
                let sym = laplacian.negative_symbol(q.grid()).into_iter().map(|s| e2 * s).collect();
                (Some(sym), Some(Fft3::new(q.grid().points_per_axis())))
            }
            Laplacian::SevenPoint => (None, None),
        };
        Ok(Self {
            epsilon,
            a,
            q,
            laplacian,
            scaled_symbol,
            fft,
        })
    }

    pub fn grid(&self) -> &GridSpec3D<T> {
        self.q.grid()
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn q(&self) -> &ScalarField<T> {
        &self.q
    }

    pub fn laplacian(&self) -> Laplacian {
        self.laplacian
    }

    /// Same potential at a different `eps`.
    pub fn with_epsilon(&self, epsilon: T) -> Result<Self> {
        Self::with_laplacian(self.q.clone(), epsilon, self.a, self.laplacian)
    }

    pub fn apply(&self, u: &[T]) -> Vec<T> {
        let grid = self.grid();
        let q = self.q.values();
        match (&self.scaled_symbol, &self.fft) {
            (Some(sym), Some(fft)) => {
                let field = ScalarField::from_values(*grid, u.to_vec()).expect("operator input has grid length");
                let mut spec = fft.forward(&field);
                spec.apply_multiplier(sym);
                let lap = fft.inverse(&spec).expect("finite spectral Laplacian").into_values();
                lap.iter().zip(u).zip(q).map(|((&l, &uv), &qv)| l + qv * uv).collect()
            }
            _ => {
                let n = grid.points_per_axis();
                let h = grid.spacing();
                let c = self.epsilon * self.epsilon / (h * h);
                let six = T::lit(6.0);
                let mut out = vec![T::zero(); u.len()];
                for i in 0..n {
                    let (ip, im) = ((i + 1) % n, (i + n - 1) % n);
                    for j in 0..n {
                        let (jp, jm) = ((j + 1) % n, (j + n - 1) % n);
                        for k in 0..n {
                            let (kp, km) = ((k + 1) % n, (k + n - 1) % n);
                            let idx = grid.index(i, j, k);
                            let neighbours = u[grid.index(ip, j, k)]
                                + u[grid.index(im, j, k)]
                                + u[grid.index(i, jp, k)]
                                + u[grid.index(i, jm, k)]
                                + u[grid.index(i, j, kp)]
                                + u[grid.index(i, j, km)];
                            out[idx] = c * (six * u[idx] - neighbours) + q[idx] * u[idx];
                        }
                    }
                }
                out
            }
        }
    }

    pub fn apply_field(&self, u: &ScalarField<T>) -> Result<ScalarField<T>> {
        if u.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        ScalarField::from_values(*self.grid(), self.apply(u.values()))
    }

    /// Matrix diagonal. For the spectral form this is `eps^2` times the mean
    /// of the symbol, plus `q`.
    pub fn diagonal(&self) -> Vec<T> {
        let off = match &self.scaled_symbol {
            Some(sym) => sym.iter().copied().sum::<T>() / T::lit(sym.len() as f64),
            None => {
                let h = self.grid().spacing();
                T::lit(6.0) * self.epsilon * self.epsilon / (h * h)
            }
        };
        self.q.values().iter().map(|&qv| off + qv).collect()
    }

    /// Strict diagonal dominance of the stencil matrix, i.e. `q > 0`
    /// everywhere. Always false for the dense spectral form.
    pub fn diagonally_dominant(&self) -> bool {
        self.laplacian == Laplacian::SevenPoint && self.q.values().iter().all(|&v| v > T::zero())
    }
}

/// Discrete Green function column: solves `A g = delta_source / h^3`.
pub fn fd_green_column<T: Real>(op: &DiscreteOperator<T>, source_index: usize, rel_tol: T) -> Result<ScalarField<T>> {
    let grid = *op.grid();
    let n = grid.points_per_axis();
    if n > GREEN_COLUMN_MAX_N {
        return Err(Error::GridTooLarge {
            n,
            limit: GREEN_COLUMN_MAX_N,
        });
    }
    if source_index >= grid.len() {
        return Err(Error::InvalidParameter(format!(
            "source index {source_index} outside grid of {} points",
            grid.len()
        )));
    }
    let mut b = vec![T::zero(); grid.len()];
    b[source_index] = T::one() / grid.cell_volume();
    let out = pcg(|x| op.apply(x), &op.diagonal(), &b, None, rel_tol, DEFAULT_MAX_ITER)?;
    ScalarField::from_values(grid, out.solution)
}

/// `h^3 sum_x g(x)`.
pub fn column_mass<T: Real>(column: &ScalarField<T>) -> T {
    column.values().iter().copied().sum::<T>() * column.grid().cell_volume()
}

/// Corners and centre of the grid.
pub fn default_sources<T: Real>(grid: &GridSpec3D<T>) -> Vec<usize> {
    let n = grid.points_per_axis();
    let (l, m) = (n - 1, n / 2);
    vec![
        grid.index(0, 0, 0),
        grid.index(l, 0, 0),
        grid.index(0, l, 0),
        grid.index(0, 0, l),
        grid.index(l, l, l),
        grid.index(m, m, m),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport<T> {
    pub sources: Vec<usize>,
    /// `max (G1 - G2)` over all sampled columns; nonpositive when the
    /// comparison holds.
    pub max_violation: T,
    /// Smallest `G2 - G1` at a source point.
    pub min_source_gap: T,
    /// Largest column mass among both potentials.
    pub max_mass: T,
    pub mass_ok: bool,
    pub passes: bool,
}

/// Tolerance on `G1 <= G2`.
pub const COMPARISON_TOL: f64 = 1e-12;
/// Tolerance on `h^3 sum g <= 1/a^2`.
pub const MASS_TOL: f64 = 1e-8;

/// Checks `G1 <= G2` pointwise for `q1 >= q2 >= a^2`, column by column.
pub fn comparison_check<T: Real>(
    q1: &ScalarField<T>,
    q2: &ScalarField<T>,
    epsilon: T,
    a: T,
    sources: Option<&[usize]>,
    rel_tol: T,
) -> Result<ComparisonReport<T>> {
    if q1.grid() != q2.grid() {
        return Err(Error::GridMismatch);
    }
    if let Some(idx) = q1.values().iter().zip(q2.values()).position(|(&x, &y)| x < y) {
        let (i, j, k) = q1.grid().unravel(idx);
        return Err(Error::Precondition(format!("q1 < q2 at grid point ({i}, {j}, {k})")));
    }
    let op1 = DiscreteOperator::new(q1.clone(), epsilon, a)?;
    let op2 = DiscreteOperator::new(q2.clone(), epsilon, a)?;
    let sources = sources.map_or_else(|| default_sources(q1.grid()), <[usize]>::to_vec);
    let mass_limit = T::one() / (a * a) + T::lit(MASS_TOL);
    let mut max_violation = T::neg_infinity();
    let mut min_source_gap = T::infinity();
    let mut max_mass = T::zero();
    for &s in &sources {
        let g1 = fd_green_column(&op1, s, rel_tol)?;
        let g2 = fd_green_column(&op2, s, rel_tol)?;
        let diff = g1.sub(&g2)?;
        max_violation = max_violation.max(diff.max());
        min_source_gap = min_source_gap.min(-diff.values()[s]);
        max_mass = max_mass.max(column_mass(&g1)).max(column_mass(&g2));
    }
    let mass_ok = max_mass <= mass_limit;
    Ok(ComparisonReport {
        passes: max_violation <= T::lit(COMPARISON_TOL) && mass_ok,
        sources,
        max_violation,
        min_source_gap,
        max_mass,
        mass_ok,
    })
}

#[derive(Debug, Clone)]
pub struct WSolve<T> {
    pub w: ScalarField<T>,
    pub iterations: usize,
    pub relative_residual: T,
    /// `|w|_2 <= |h|_2 / a^2`
    pub energy_ok: bool,
}

/// Solves `(-eps^2 Delta + q) w = h`.
pub fn solve_w<T: Real>(op: &DiscreteOperator<T>, h: &ScalarField<T>, rel_tol: T) -> Result<WSolve<T>> {
    solve_w_from(op, h, None, rel_tol)
}

fn solve_w_from<T: Real>(
    op: &DiscreteOperator<T>,
    h: &ScalarField<T>,
    guess: Option<&ScalarField<T>>,
    rel_tol: T,
) -> Result<WSolve<T>> {
    if h.grid() != op.grid() {
        return Err(Error::GridMismatch);
    }
    let out = pcg(
        |x| op.apply(x),
        &op.diagonal(),
        h.values(),
        guess.map(|g| g.values()),
        rel_tol,
        DEFAULT_MAX_ITER,
    )?;
    let w = ScalarField::from_values(*op.grid(), out.solution)?;
    let a2 = op.a * op.a;
    // slack for the residual left by the iterative solve
    let energy_ok = w.l2_norm() <= h.l2_norm() / a2 * (T::one() + T::lit(2.0) * rel_tol);
    Ok(WSolve {
        w,
        iterations: out.iterations,
        relative_residual: out.relative_residual,
        energy_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakLimitRow<T> {
    pub epsilon: T,
    /// `|q w_eps - h|_2 / |h|_2`
    pub r: T,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct WeakLimitTable<T> {
    pub rows: Vec<WeakLimitRow<T>>,
}

impl<T: Real> WeakLimitTable<T> {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].r < w[0].r)
    }

    pub fn final_r(&self) -> Option<T> {
        self.rows.last().map(|r| r.r)
    }

    /// `r(eps_i) / r(eps_{i+1})` for consecutive rows.
    pub fn reduction_factors(&self) -> Vec<T> {
        self.rows.windows(2).map(|w| w[0].r / w[1].r).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epsilon", "r", "iterations"])?;
        for r in &self.rows {
            w.serialize((r.epsilon.as_f64(), r.r.as_f64(), r.iterations))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `r(eps)` for each `eps`, witnessing `w_eps -> h/q`.
///
/// The resolution guard is checked per `eps` under `policy`.
pub fn weak_limit_table<T: Real>(
    q: &ScalarField<T>,
    h: &ScalarField<T>,
    a: T,
    eps_list: &[T],
    laplacian: Laplacian,
    policy: GuardPolicy,
    rel_tol: T,
) -> Result<WeakLimitTable<T>> {
    if q.grid() != h.grid() {
        return Err(Error::GridMismatch);
    }
    let h_norm = h.l2_norm();
    if h_norm == T::zero() {
        return Err(Error::InvalidParameter("h must be nonzero".into()));
    }
    for &eps in eps_list {
        guard::check(q.grid(), a, eps, policy)?;
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let op = DiscreteOperator::with_laplacian(q.clone(), eps, a, laplacian)?;
        let sol = solve_w(&op, h, rel_tol)?;
        let defect = sol.w.mul(q)?.sub(h)?;
        rows.push(WeakLimitRow {
            epsilon: eps,
            r: defect.l2_norm() / h_norm,
            iterations: sol.iterations,
        });
    }
    Ok(WeakLimitTable { rows })
}

/// Certificate for `u -> A^{-1} f(u)` on `B_R`: the column-mass bound makes
/// `M(R)/a^2 <= R` and `M1(R)/a^2 < 1` sufficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralCertificate<T> {
    pub m_r: T,
    pub m1_r: T,
    pub ball_condition_value: T,
    pub gamma: T,
    pub passes: bool,
}

pub fn certify_general<T: Real>(op: &DiscreteOperator<T>, f: &Nonlinearity<T>, radius: T) -> Result<GeneralCertificate<T>> {
    let a2 = op.a * op.a;
    let m_r = f.bound_m(radius)?;
    let m1_r = f.bound_m1(radius)?;
    let ball_condition_value = m_r / a2;
    let gamma = m1_r / a2;
    Ok(GeneralCertificate {
        m_r,
        m1_r,
        ball_condition_value,
        gamma,
        passes: ball_condition_value <= radius && gamma < T::one(),
    })
}

/// Inner linear solves run this much tighter than the outer tolerance.
const INNER_TOL_FACTOR: f64 = 1e-3;

/// Picard iteration `u <- A^{-1} f(u)` from zero.
pub fn picard_solve_general<T: Real>(
    op: &DiscreteOperator<T>,
    f: &Nonlinearity<T>,
    radius: T,
    tol: T,
    max_iter: usize,
) -> Result<SolveReport<T>> {
    let cert = certify_general(op, f, radius)?;
    if !cert.passes {
        warn!(
            "general certificate fails (M/a^2 = {}, gamma = {}); iterating anyway",
            cert.ball_condition_value, cert.gamma
        );
    }
    let settings = PicardSettings {
        tol,
        max_iter,
        gamma: cert.gamma,
        radius,
        certified: cert.passes,
    };
    // relative to |f(u)|, which is at least |f(0)| > 0 near the solution
    let inner = (tol * T::lit(INNER_TOL_FACTOR)).max(T::lit(64.0) * T::epsilon());
    picard_iterate(
        |u| {
            let rhs = u.map(|v| f.eval(v))?;
            Ok(solve_w_from(op, &rhs, Some(u), inner)?.w)
        },
        ScalarField::zeros(*op.grid()),
        &settings,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{GreenOperator, KernelParams};
    use std::f64::consts::TAU;

    fn grid(n: usize) -> GridSpec3D<f64> {
        GridSpec3D::new(TAU, n).unwrap()
    }

    #[test]
    fn stencil_matches_formula_at_wrap_points() {
        let g = grid(6);
        let q = ScalarField::sample(g, |x, _, _| 5.0 + x.cos()).unwrap();
        let op = DiscreteOperator::new(q.clone(), 0.7, 2.0).unwrap();
        let u = ScalarField::sample(g, |x, y, z| x * 0.3 + (y * z).sin()).unwrap();
        let au = op.apply(u.values());
        let h2 = g.spacing() * g.spacing();
        let c = 0.49 / h2;
        for &(i, j, k) in &[(0, 0, 0), (5, 5, 5), (0, 3, 5), (2, 2, 2)] {
            let w = |a: usize, b: usize, c: usize| u.get(a % 6, b % 6, c % 6);
            let lap = 6.0 * u.get(i, j, k)
                - w(i + 1, j, k)
                - w(i + 5, j, k)
                - w(i, j + 1, k)
                - w(i, j + 5, k)
                - w(i, j, k + 1)
                - w(i, j, k + 5);
            let expected = c * lap + q.get(i, j, k) * u.get(i, j, k);
            assert!((au[g.index(i, j, k)] - expected).abs() < 1e-12);
        }
        assert!(op.diagonally_dominant());
    }

    #[test]
    fn spectral_form_applies_symbol() {
        let g = grid(8);
        let q = ScalarField::constant(g, 4.0).unwrap();
        let op = DiscreteOperator::with_laplacian(q, 0.5, 2.0, Laplacian::Spectral).unwrap();
        let u = ScalarField::sample(g, |x, y, _| (2.0 * x).sin() * y.cos()).unwrap();
        let au = op.apply_field(&u).unwrap();
        // symbol 0.25 * (4 + 1) + 4
        let expected = u.scale(5.25).unwrap();
        assert!(au.sup_distance(&expected).unwrap() < 1e-12);
        assert!(!op.diagonally_dominant());
    }

    #[test]
    fn green_column_matches_spectral_green_for_constant_q() {
        let g = grid(16);
        let a = 2.0;
        let eps = 0.5;
        let q = ScalarField::constant(g, a * a).unwrap();
        let op = DiscreteOperator::new(q, eps, a).unwrap();
        let src = g.index(3, 7, 11);
        let col = fd_green_column(&op, src, 1e-13).unwrap();
        let mut delta = ScalarField::zeros(g).into_values();
        delta[src] = 1.0 / g.cell_volume();
        let delta = ScalarField::from_values(g, delta).unwrap();
        let green = GreenOperator::new(g, KernelParams::new(a, eps).unwrap(), Laplacian::SevenPoint);
        let oracle = green.apply(&delta).unwrap();
        assert!(col.sup_distance(&oracle).unwrap() <= 1e-6 * oracle.sup_norm());
        assert!((column_mass(&col) - 0.25).abs() < 1e-12);
        assert!(col.min() >= -1e-12);
    }

    #[test]
    fn green_column_refuses_large_grid() {
        let g = grid(40);
        let op = DiscreteOperator::new(ScalarField::constant(g, 1.0).unwrap(), 0.5, 1.0).unwrap();
        assert!(matches!(fd_green_column(&op, 0, 1e-10), Err(Error::GridTooLarge { .. })));
    }

    #[test]
    fn comparison_of_equal_potentials() {
        let g = grid(8);
        let q = ScalarField::sample(g, |x, y, _| 4.0 + x.sin().powi(2) + y.cos().powi(2)).unwrap();
        let rep = comparison_check(&q, &q, 0.5, 2.0, None, 1e-14).unwrap();
        assert!(rep.passes);
        assert!(rep.max_violation.abs() <= 1e-12);
        assert_eq!(rep.sources.len(), 6);
    }

    #[test]
    fn comparison_rejects_swapped_order() {
        let g = grid(8);
        let q2 = ScalarField::constant(g, 4.0).unwrap();
        let q1 = ScalarField::sample(g, |x, _, _| 5.0 + x.sin()).unwrap();
        assert!(matches!(
            comparison_check(&q2, &q1, 0.5, 2.0, None, 1e-13),
            Err(Error::Precondition(_))
        ));
        let rep = comparison_check(&q1, &q2, 0.5, 2.0, None, 1e-13).unwrap();
        assert!(rep.passes);
        assert!(rep.min_source_gap > 0.0);
    }

    #[test]
    fn solve_w_constant_data() {
        let g = grid(8);
        let op = DiscreteOperator::new(ScalarField::constant(g, 5.0).unwrap(), 0.3, 2.0).unwrap();
        let sol = solve_w(&op, &ScalarField::constant(g, 2.0).unwrap(), 1e-12).unwrap();
        assert!(sol.w.sup_distance(&ScalarField::constant(g, 0.4).unwrap()).unwrap() < 1e-12);
        assert!(sol.energy_ok);
    }

    #[test]
    fn weak_limit_constant_q_single_mode() {
        let g = grid(16);
        let q = ScalarField::constant(g, 5.0).unwrap();
        let h = ScalarField::sample(g, |x, _, _| (2.0 * x).cos()).unwrap();
        let table =
            weak_limit_table(&q, &h, 2.0, &[0.4, 0.2], Laplacian::Spectral, GuardPolicy::Override, 1e-13).unwrap();
        for row in &table.rows {
            let e2k2 = row.epsilon * row.epsilon * 4.0;
            assert!((row.r - e2k2 / (e2k2 + 5.0)).abs() < 1e-10);
        }
        assert!(table.strictly_decreasing());
        assert!(matches!(
            weak_limit_table(&q, &h, 2.0, &[0.4], Laplacian::Spectral, GuardPolicy::Enforce, 1e-12),
            Err(Error::Guard(_))
        ));
    }

    #[test]
    fn general_picard_with_constant_source_is_one_step() {
        let g = grid(8);
        let q = ScalarField::sample(g, |x, _, _| 5.0 + x.sin()).unwrap();
        let op = DiscreteOperator::new(q, 0.5, 2.0).unwrap();
        let f = Nonlinearity::constant(1.0).unwrap();
        let r = picard_solve_general(&op, &f, 1.0, 1e-10, 20).unwrap();
        assert!(r.iterations <= 2);
        let direct = solve_w(&op, &ScalarField::constant(g, 1.0).unwrap(), 1e-13).unwrap().w;
        assert!(r.solution.sup_distance(&direct).unwrap() < 1e-11);
    }
}
