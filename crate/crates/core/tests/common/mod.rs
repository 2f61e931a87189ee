//! Randomized invariant checks shared by the property tests and the
//! acceptance run. Every check runs 100 cases from a fixed seed.

#![allow(dead_code)]

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};

use singpert::contraction::{apply_t, certify, picard_solve, ProblemSpec};
use singpert::general::{column_mass, fd_green_column, solve_w, weak_limit_table, DiscreteOperator};
use singpert::io::{read_field, write_field};
use singpert::kernel::{
    delta_family_masses, kernel_mass, kernel_mass_quadrature, spectral_symbol, GreenOperator, KernelParams,
};
use singpert::nonlinearity::Nonlinearity;
use singpert::potential::Potential;
use singpert::rescaled::{solve_rescaled, RescaledProblem};
use singpert::spectral::{forward_spectrum, inverse_spectrum, negative_laplacian, Laplacian};
use singpert::{GridSpec3D, GuardPolicy, ScalarField};

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const CASES: u32 = 100;

pub fn config() -> Config {
    Config {
        cases: CASES,
        rng_seed: RngSeed::Fixed(DEFAULT_SEED),
        failure_persistence: None,
        ..Config::default()
    }
}

type Grid = GridSpec3D<f64>;
type Field = ScalarField<f64>;

fn field(grid: Grid, values: Vec<f64>) -> Field {
    ScalarField::from_values(grid, values).unwrap()
}

fn values(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(lo..hi, n * n * n)
}

/// Low-mode trigonometric polynomial on the `2 pi` box.
fn trig_poly(grid: Grid, coeffs: &[f64; 6]) -> Field {
    ScalarField::sample(grid, |x, y, z| {
        coeffs[0] * x.cos() + coeffs[1] * (2.0 * x).sin() + coeffs[2] * y.sin() + coeffs[3] * (y + z).cos()
            + coeffs[4] * (2.0 * z).cos()
            + coeffs[5] * (x - y).sin()
    })
    .unwrap()
}

fn coeffs() -> impl Strategy<Value = [f64; 6]> {
    proptest::array::uniform6(-1.0..1.0f64)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

// ---- field core ----

fn fft_round_trip(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(0.5..10.0f64, values(8, -10.0, 10.0)), |(l, v)| {
            let f = field(GridSpec3D::new(l, 8).unwrap(), v);
            let back = inverse_spectrum(&forward_spectrum(&f)).unwrap();
            prop_assert!(back.sup_distance(&f).unwrap() <= 1e-12 * f.sup_norm());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn sup_norm_is_a_norm(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (values(4, -5.0, 5.0), values(4, -5.0, 5.0), -3.0..3.0f64);
    runner
        .run(&strat, |(u, v, alpha)| {
            let g = GridSpec3D::new(1.0, 4).unwrap();
            let (u, v) = (field(g, u), field(g, v));
            let scaled = u.scale(alpha).unwrap().sup_norm();
            prop_assert!((scaled - alpha.abs() * u.sup_norm()).abs() <= 2.0 * f64::EPSILON * scaled.max(1e-300));
            let sum = u.add(&v).unwrap().sup_norm();
            prop_assert!(sum <= (u.sup_norm() + v.sup_norm()) * (1.0 + 2.0 * f64::EPSILON));
            prop_assert!(u.sup_norm() >= 0.0);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn l2_norm_of_constant(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(-100.0..100.0f64, 0.1..20.0f64, 4usize..12), |(c, l, n)| {
            let f = ScalarField::constant(GridSpec3D::new(l, n).unwrap(), c).unwrap();
            prop_assert!(close(f.l2_norm(), c.abs() * l.powf(1.5), 1e-12));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn binary_round_trip(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(0.5..10.0f64, values(4, -1e6, 1e6)), |(l, v)| {
            let f = field(GridSpec3D::new(l, 4).unwrap(), v);
            let mut buf = Vec::new();
            write_field(&f, &mut buf).unwrap();
            let g: Field = read_field(buf.as_slice()).unwrap();
            prop_assert_eq!(g.values(), f.values());
            prop_assert_eq!(g.grid(), f.grid());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

// ---- kernel ----

fn params_strategy() -> impl Strategy<Value = (f64, f64)> {
    (0.2..5.0f64, 0.01..2.0f64)
}

fn symbol_at_zero_is_mass(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&params_strategy(), |(a, eps)| {
            let p = KernelParams::new(a, eps).unwrap();
            prop_assert_eq!(spectral_symbol(&p, 0.0), kernel_mass(&p));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn green_is_linear(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (params_strategy(), values(8, -1.0, 1.0), values(8, -1.0, 1.0), -3.0..3.0f64, -3.0..3.0f64);
    runner
        .run(&strat, |((a, eps), u, v, alpha, beta)| {
            let g = GridSpec3D::new(TAU, 8).unwrap();
            let op = GreenOperator::new(g, KernelParams::new(a, eps).unwrap(), Laplacian::Spectral);
            let (u, v) = (field(g, u), field(g, v));
            let lhs = op.apply(&u.scale(alpha).unwrap().add(&v.scale(beta).unwrap()).unwrap()).unwrap();
            let rhs = op
                .apply(&u)
                .unwrap()
                .scale(alpha)
                .unwrap()
                .add(&op.apply(&v).unwrap().scale(beta).unwrap())
                .unwrap();
            let scale = lhs.sup_norm().max(rhs.sup_norm());
            prop_assert!(lhs.sup_distance(&rhs).unwrap() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn green_preserves_positivity_of_smooth_data(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(params_strategy(), coeffs()), |((a, eps), c)| {
            let g = GridSpec3D::new(TAU, 16).unwrap();
            let v = trig_poly(g, &c).map(f64::exp).unwrap();
            let w = GreenOperator::new(g, KernelParams::new(a, eps).unwrap(), Laplacian::Spectral)
                .apply(&v)
                .unwrap();
            prop_assert!(w.min() > 0.0, "min {}", w.min());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn stencil_green_preserves_positivity(runner: &mut TestRunner) -> Result<(), String> {
    // sparse nonnegative data: roughly a third of the points are zero
    let data = proptest::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64, 0.0..1.0f64], 512);
    runner
        .run(&(params_strategy(), data), |((a, eps), v)| {
            prop_assume!(v.iter().any(|&x| x > 0.0));
            let g = GridSpec3D::new(TAU, 8).unwrap();
            let v = field(g, v);
            let w = GreenOperator::new(g, KernelParams::new(a, eps).unwrap(), Laplacian::SevenPoint)
                .apply(&v)
                .unwrap();
            prop_assert!(w.min() >= -1e-12 * v.sup_norm(), "min {}", w.min());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn quadrature_mass_identity(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(0.5..3.0f64, 20.0..40.0f64, 1.0..8.0f64), |(a, ratio, l)| {
            let eps = a * l / (2.0 * ratio);
            let p = KernelParams::new(a, eps).unwrap();
            let m = kernel_mass_quadrature(&p, l).unwrap();
            prop_assert!(close(m, 1.0 / (a * a), 1e-8), "mass {m} vs {}", 1.0 / (a * a));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn delta_family_outer_mass_shrinks(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(0.5..3.0f64, 0.05..1.0f64, 0.01..1.0f64), |(a, eps, c)| {
            prop_assume!(a * c / eps <= 30.0);
            let outer = |e: f64| delta_family_masses(&KernelParams::new(a, e).unwrap(), c).unwrap().outer;
            prop_assert!(outer(eps / 2.0) < outer(eps));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

// ---- nonlinearity ----

fn builtin() -> impl Strategy<Value = Nonlinearity<f64>> {
    prop_oneof![
        Just(Nonlinearity::exp()),
        (2u32..6).prop_map(|m| Nonlinearity::power_shift(m as f64).unwrap()),
        (-5.0..5.0f64).prop_map(|c| Nonlinearity::constant(c).unwrap()),
        (-5.0..5.0f64, -3.0..3.0f64).prop_map(|(c, l)| Nonlinearity::affine(c, l).unwrap()),
    ]
}

fn bounds_nondecreasing_in_radius(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&builtin(), |f| {
            let radii = [0.5, 1.0, 2.0];
            for w in radii.windows(2) {
                prop_assert!(f.bound_m(w[0]).unwrap() <= f.bound_m(w[1]).unwrap());
                prop_assert!(f.bound_m1(w[0]).unwrap() <= f.bound_m1(w[1]).unwrap());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn closed_form_bounds_match_sampling(runner: &mut TestRunner) -> Result<(), String> {
    let fractional = (1.1..4.0f64).prop_map(|m| Nonlinearity::power_shift(m).unwrap());
    let strat = (prop_oneof![builtin(), fractional], 0.05..1.0f64);
    runner
        .run(&strat, |(f, r)| {
            let (m, ms) = (f.bound_m(r).unwrap(), f.sampled_bound_m(r).unwrap());
            let (m1, m1s) = (f.bound_m1(r).unwrap(), f.sampled_bound_m1(r).unwrap());
            prop_assert!((m - ms).abs() <= 1e-6 * m.abs().max(1e-12), "M {m} vs {ms}");
            prop_assert!((m1 - m1s).abs() <= 1e-6 * m1.abs().max(1e-12), "M1 {m1} vs {m1s}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn derivatives_are_consistent(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(builtin(), 0.1..2.0f64), |(f, r)| {
            prop_assert!(f.check_derivative_consistency(r).unwrap().consistent);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

// ---- contraction solver ----

fn certificate_monotone_in_a(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (builtin(), values(4, 0.0, 3.0), 0.5..4.0f64, 0.0..2.0f64, 0.2..2.0f64);
    runner
        .run(&strat, |(f, p, a, da, r)| {
            let g = GridSpec3D::new(TAU, 4).unwrap();
            let cert_at = |a: f64| {
                let q = field(g, p.iter().map(|&v| a * a + v).collect());
                certify(&ProblemSpec::new(q, a, f.clone(), 0.5, r).unwrap()).unwrap()
            };
            if cert_at(a).passes {
                prop_assert!(cert_at(a + da).passes);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn remark_problem(a: f64, omega: f64, eps: f64, f: Nonlinearity<f64>) -> ProblemSpec<f64> {
    let g = GridSpec3D::new(TAU, 8).unwrap();
    let q = Potential::ShiftedSine { a, omega }.sample(g).unwrap();
    ProblemSpec::new(q, a, f, eps, 1.0).unwrap()
}

fn picard_strategy() -> impl Strategy<Value = ProblemSpec<f64>> {
    let f = prop_oneof![Just(Nonlinearity::exp()), Just(Nonlinearity::power_shift(2.0).unwrap())];
    (2.6..3.5f64, 1u32..3, 0.2..1.0f64, f).prop_map(|(a, w, eps, f)| remark_problem(a, w as f64, eps, f))
}

fn picard_contract(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&picard_strategy(), |spec| {
            let tol = 1e-10;
            let cert = certify(&spec).unwrap();
            prop_assert!(cert.passes);
            let rep = picard_solve(&spec, ScalarField::zeros(*spec.grid()), tol, 500).unwrap();
            prop_assert!(rep.converged);
            let res = apply_t(&rep.solution, &spec).unwrap().sup_distance(&rep.solution).unwrap();
            prop_assert!(res <= 2.0 * tol, "fixed-point residual {res}");
            prop_assert!(rep.max_iterate_norm <= spec.radius() + 1e-12);
            prop_assert!(rep.observed_contraction <= cert.gamma + 0.05);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn certificate_independent_of_epsilon(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(picard_strategy(), 0.01..3.0f64), |(spec, eps)| {
            prop_assert_eq!(certify(&spec).unwrap(), certify(&spec.with_epsilon(eps).unwrap()).unwrap());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Dense direct solve of `(-eps^2 Delta + q - lambda) u = c` with the
/// spectral Laplacian assembled column by column.
pub fn dense_linear_solve(q: &Field, eps: f64, lambda: f64, c: f64) -> Field {
    let g = *q.grid();
    let n = g.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = negative_laplacian(&field(g, e), Laplacian::Spectral).unwrap();
        for (i, &v) in col.values().iter().enumerate() {
            m[(i, j)] = eps * eps * v;
        }
        m[(j, j)] += q.values()[j] - lambda;
    }
    let rhs = DVector::from_element(n, c);
    let u = m.lu().solve(&rhs).expect("nonsingular operator");
    field(g, u.iter().copied().collect())
}

/// Random linear problem with `(|p| + lambda) / a^2 < 0.9`.
#[derive(Debug, Clone)]
pub struct LinearCase {
    pub a: f64,
    pub eps: f64,
    pub c: f64,
    pub lambda: f64,
    pub p: [f64; 6],
}

impl LinearCase {
    pub fn potential(&self, grid: Grid) -> Field {
        let a2 = self.a * self.a;
        let bump = trig_poly(grid, &self.p);
        // shift to [0, 0.4 a^2]
        let (lo, hi) = (bump.min(), bump.max());
        bump.map(|v| a2 + 0.4 * a2 * (v - lo) / (hi - lo).max(1e-300)).unwrap()
    }

    pub fn radius(&self, norm_p: f64) -> f64 {
        let a2 = self.a * self.a;
        1.5 * self.c.abs() / (a2 - norm_p - self.lambda.abs())
    }
}

pub fn linear_case() -> impl Strategy<Value = LinearCase> {
    (1.0..3.0f64, 0.2..1.0f64, -1.0..1.0f64, -0.45..0.45f64, coeffs()).prop_filter_map(
        "nonzero source",
        |(a, eps, c, l, p)| {
            (c.abs() > 0.05).then_some(LinearCase {
                a,
                eps,
                c,
                lambda: l * a * a,
                p,
            })
        },
    )
}

/// Picard solution of the linear case against the dense oracle; returns
/// the relative sup-norm deviation.
pub fn linear_case_deviation(case: &LinearCase, n: usize) -> f64 {
    let g = GridSpec3D::new(TAU, n).unwrap();
    let q = case.potential(g);
    let norm_p = q.max() - case.a * case.a;
    let f = Nonlinearity::affine(case.c, case.lambda).unwrap();
    let spec = ProblemSpec::new(q.clone(), case.a, f, case.eps, case.radius(norm_p)).unwrap();
    let cert = certify(&spec).unwrap();
    assert!(cert.passes && cert.gamma < 0.9, "{cert:?}");
    let rep = picard_solve(&spec, ScalarField::zeros(g), 1e-14, 2000).unwrap();
    assert!(rep.converged);
    let direct = dense_linear_solve(&q, case.eps, case.lambda, case.c);
    rep.solution.sup_distance(&direct).unwrap() / direct.sup_norm()
}

fn linear_picard_matches_direct_solve(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&linear_case(), |case| {
            let dev = linear_case_deviation(&case, 6);
            prop_assert!(dev <= 1e-9, "relative deviation {dev}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

// ---- rescaled ----

fn rescaled_kernel_mass(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(2.5..4.0f64, 1.0..1.5f64), |(a, stretch)| {
            let l = stretch * 40.0 / a;
            let m = kernel_mass_quadrature(&KernelParams::new(a, 1.0).unwrap(), l).unwrap();
            prop_assert!(close(m, 1.0 / (a * a), 1e-8));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn xi_strategy() -> impl Strategy<Value = [f64; 3]> {
    proptest::array::uniform3(0.0..TAU)
}

fn frozen_solve_independent_of_resolution(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(xi_strategy(), 2.4..3.5f64), |(xi, a)| {
            let solve = |n: usize| {
                let prob = RescaledProblem::new(
                    xi,
                    0.0,
                    Potential::ShiftedSine { a, omega: 1.0 },
                    Nonlinearity::exp(),
                    a,
                    1.0,
                    GridSpec3D::new(10.0, n).unwrap(),
                )
                .unwrap();
                solve_rescaled(&prob, 1e-13, 500).unwrap()
            };
            let (coarse, fine) = (solve(4), solve(8));
            prop_assert!((coarse.value - fine.value).abs() <= 1e-10);
            prop_assert!(coarse.y_variation <= 1e-10 && fine.y_variation <= 1e-10);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn uniqueness_verdict_is_exact(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(1.0..3.0f64, 0.0..8.0f64, 0.3..2.0f64), |(a, dq, r)| {
            let q0 = a * a + dq;
            let prob = RescaledProblem::new(
                [0.0; 3],
                0.0,
                Potential::Constant(q0),
                Nonlinearity::exp(),
                a,
                r,
                GridSpec3D::new(10.0, 4).unwrap(),
            )
            .unwrap();
            prop_assert_eq!(prob.uniqueness_holds().unwrap(), q0 > r.exp());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

// ---- general potential ----

fn potential_strategy(n: usize) -> impl Strategy<Value = (f64, f64, Vec<f64>)> {
    (1.0..3.0f64, 0.2..1.0f64, values(n, 0.0, 20.0))
}

fn green_column_mass_bound(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(potential_strategy(8), 0usize..512), |((a, eps, p), src)| {
            let g = GridSpec3D::new(TAU, 8).unwrap();
            let q = field(g, p.iter().map(|&v| a * a + v).collect());
            let col = fd_green_column(&DiscreteOperator::new(q, eps, a).unwrap(), src, 1e-13).unwrap();
            prop_assert!(column_mass(&col) <= 1.0 / (a * a) + 1e-8);
            prop_assert!(col.min() >= -1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn green_column_monotone_in_q(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(potential_strategy(8), values(8, 0.0, 5.0), 0usize..512), |((a, eps, p), extra, src)| {
            let g = GridSpec3D::new(TAU, 8).unwrap();
            let q2 = field(g, p.iter().map(|&v| a * a + v).collect());
            let q1 = q2.add(&field(g, extra)).unwrap();
            let g1 = fd_green_column(&DiscreteOperator::new(q1, eps, a).unwrap(), src, 1e-14).unwrap();
            let g2 = fd_green_column(&DiscreteOperator::new(q2, eps, a).unwrap(), src, 1e-14).unwrap();
            prop_assert!(g1.sub(&g2).unwrap().max() <= 1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn energy_estimate(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(potential_strategy(8), values(8, -1.0, 1.0)), |((a, eps, p), h)| {
            let g = GridSpec3D::new(TAU, 8).unwrap();
            let q = field(g, p.iter().map(|&v| a * a + v).collect());
            let h = field(g, h);
            let op = DiscreteOperator::new(q, eps, a).unwrap();
            let sol = solve_w(&op, &h, 1e-10).unwrap();
            prop_assert!(sol.energy_ok);
            prop_assert!(sol.w.l2_norm() <= h.l2_norm() / (a * a) * (1.0 + 1e-9));
            let defect = op.apply_field(&sol.w).unwrap().sub(&h).unwrap();
            prop_assert!(defect.l2_norm() <= 1e-10 * h.l2_norm());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn weak_limit_monotone(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (1.0..3.0f64, 0.0..2.0f64, 0.2..0.6f64, coeffs(), 0.5..2.0f64);
    runner
        .run(&strat, |(a, amp, eps, c, mean)| {
            let g = GridSpec3D::new(TAU, 16).unwrap();
            let q = ScalarField::sample(g, |x, y, _| a * a + amp * (1.0 + (x + y).sin())).unwrap();
            let h = trig_poly(g, &c).map(|v| v + mean).unwrap();
            prop_assume!(h.l2_norm() > 1e-3);
            let table = weak_limit_table(
                &q,
                &h,
                a,
                &[eps, eps / 2.0],
                Laplacian::SevenPoint,
                GuardPolicy::Override,
                1e-12,
            )
            .unwrap();
            prop_assert!(table.strictly_decreasing(), "{:?}", table.rows);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub type Invariant = fn(&mut TestRunner) -> Result<(), String>;

/// Every invariant, keyed by a short name.
pub fn invariants() -> Vec<(&'static str, Invariant)> {
    vec![
        ("fft round trip", fft_round_trip as Invariant),
        ("sup norm is a norm", sup_norm_is_a_norm),
        ("l2 norm of constants", l2_norm_of_constant),
        ("binary field round trip", binary_round_trip),
        ("symbol at zero equals mass", symbol_at_zero_is_mass),
        ("green operator linearity", green_is_linear),
        ("spectral green positivity (smooth data)", green_preserves_positivity_of_smooth_data),
        ("stencil green positivity", stencil_green_preserves_positivity),
        ("quadrature mass identity", quadrature_mass_identity),
        ("delta family outer mass shrinks", delta_family_outer_mass_shrinks),
        ("bounds nondecreasing in R", bounds_nondecreasing_in_radius),
        ("closed-form bounds match sampling", closed_form_bounds_match_sampling),
        ("derivative consistency", derivatives_are_consistent),
        ("certificate monotone in a", certificate_monotone_in_a),
        ("picard residual, ball and contraction", picard_contract),
        ("certificate independent of eps", certificate_independent_of_epsilon),
        ("linear picard matches direct solve", linear_picard_matches_direct_solve),
        ("rescaled kernel mass", rescaled_kernel_mass),
        ("frozen solve independent of y-resolution", frozen_solve_independent_of_resolution),
        ("uniqueness verdict", uniqueness_verdict_is_exact),
        ("green column mass bound", green_column_mass_bound),
        ("green column monotone in q", green_column_monotone_in_q),
        ("energy estimate", energy_estimate),
        ("weak limit monotone", weak_limit_monotone),
    ]
}

pub fn run_invariant(check: Invariant) -> Result<(), String> {
    check(&mut TestRunner::new(config()))
}

/// Sign-change root of `f` on `[lo, hi]` by bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) * f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
