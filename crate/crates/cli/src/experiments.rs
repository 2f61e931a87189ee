//! The experiments behind each `--experiment` name.

use std::f64::consts::{E, TAU};
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singpert::contraction::{certify, epsilon_sweep, picard_solve, ContractionCertificate};
use singpert::general::{certify_general, comparison_check, picard_solve_general, weak_limit_table};
use singpert::guard::{self, GuardReport};
use singpert::io::save_field;
use singpert::kernel::{delta_family_masses, kernel_mass, kernel_mass_quadrature, spectral_symbol};
use singpert::rescaled::{solve_rescaled, write_xi_csv, xi_sweep, RescaledProblem};
use singpert::{
    Error, Field, Grid, GridSpec3D, GuardPolicy, KernelParams, Laplacian, Nonlin, Potential, Problem,
    ScalarField, SolveReport,
};

use crate::config::{Experiment, NonlinearityKind, PotentialKind, RunConfig};

pub const MASS_REL_TOL: f64 = 1e-8;
pub const CONTRACTION_SLACK: f64 = 0.05;
pub const BOUND_SLACK: f64 = 0.05;
pub const RESCALED_TOL: f64 = 1e-8;
/// Radius of the ball split off in the delta-family mass check.
pub const DELTA_RADIUS: f64 = 0.5;
pub const XI_SAMPLES: usize = 32;
/// Base points that also get the full rescaled solve on the y-grid.
pub const XI_FULL_SOLVES: usize = 4;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Guard(String),
    Divergence(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Guard(_) => 3,
            RunError::Divergence(_) => 4,
            RunError::Io(_) => 5,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Guard(m) => write!(f, "guard violation: {m} (pass --override-guards to run anyway)"),
            RunError::Divergence(m) => write!(f, "divergence: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Guard(_) => RunError::Guard(msg),
            Error::Divergence { .. }
            | Error::BallInvariant { .. }
            | Error::PointwiseDivergence { .. }
            | Error::Stagnation { .. } => RunError::Divergence(msg),
            Error::Io(_) | Error::Csv(_) => RunError::Io(msg),
            _ => RunError::Config(msg),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Everything a run produced: report lines, pass/fail checks, files written.
pub struct Outcome {
    pub lines: Vec<String>,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
    out: PathBuf,
}

impl Outcome {
    fn new(out: &Path) -> Self {
        Self {
            lines: Vec::new(),
            checks: Vec::new(),
            files: Vec::new(),
            out: out.to_path_buf(),
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, RunError> {
        let path = self.out.join(name);
        let file = File::create(&path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(path);
        Ok(BufWriter::new(file))
    }

    fn save(&mut self, name: &str, field: &Field) -> Result<(), RunError> {
        let path = self.out.join(name);
        save_field(field, &path)?;
        self.files.push(path);
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            let _ = writeln!(s, "{l}");
        }
        s.push('\n');
        for c in &self.checks {
            let _ = writeln!(s, "[{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(s, "\n{} of {} checks passed", passed, self.checks.len());
        s
    }
}

fn policy(cfg: &RunConfig) -> GuardPolicy {
    if cfg.override_guards {
        GuardPolicy::Override
    } else {
        GuardPolicy::Enforce
    }
}

pub fn grid(cfg: &RunConfig) -> Result<Grid, RunError> {
    Ok(GridSpec3D::new(cfg.grid.box_length, cfg.grid.n)?)
}

pub fn potential(cfg: &RunConfig) -> Potential<f64> {
    let p = &cfg.potential;
    let a = cfg.kernel.a;
    match p.kind {
        PotentialKind::Constant => Potential::Constant(p.value.unwrap_or(a * a)),
        PotentialKind::ShiftedSine => Potential::ShiftedSine {
            a,
            omega: p.omega.unwrap_or(1.0),
        },
        PotentialKind::PeriodicWell => Potential::PeriodicWell {
            floor: a * a,
            amplitude: p.amplitude.unwrap_or(0.0),
            period: p.period.unwrap_or(TAU),
        },
    }
}

pub fn nonlinearity(cfg: &RunConfig) -> Result<Nonlin, RunError> {
    let f = &cfg.nonlinearity;
    Ok(match f.kind {
        NonlinearityKind::Exp => Nonlin::exp(),
        NonlinearityKind::PowerShift => Nonlin::power_shift(f.m.unwrap_or(1.0))?,
        NonlinearityKind::Constant => Nonlin::constant(f.c.unwrap_or(0.0))?,
        NonlinearityKind::Affine => Nonlin::affine(f.c.unwrap_or(0.0), f.lambda.unwrap_or(0.0))?,
    })
}

fn problem(cfg: &RunConfig, epsilon: f64) -> Result<Problem, RunError> {
    let g = grid(cfg)?;
    let q = potential(cfg).sample(g)?;
    Ok(Problem::new(q, cfg.kernel.a, nonlinearity(cfg)?, epsilon, cfg.radius)?)
}

/// Applies the guards at one `eps`; violations either abort or get noted.
fn guard(cfg: &RunConfig, g: &Grid, epsilon: f64, out: &mut Outcome) -> Result<GuardReport, RunError> {
    let rep = guard::evaluate(g, cfg.kernel.a, epsilon);
    if let (Some(v), false) = (rep.violations.first(), cfg.override_guards) {
        return Err(RunError::Guard(v.to_string()));
    }
    for v in &rep.violations {
        out.line(format!("guard overridden: {v}"));
    }
    Ok(rep)
}

pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    cfg.validate().map_err(|e| RunError::Config(e.0))?;
    std::fs::create_dir_all(out_dir).map_err(|e| RunError::Io(format!("{}: {e}", out_dir.display())))?;
    let mut out = Outcome::new(out_dir);
    out.line(format!("experiment: {}", cfg.experiment));
    out.line(format!("seed: {}", cfg.seed));
    out.line(format!(
        "guards: {}",
        if cfg.override_guards { "overridden" } else { "enforced" }
    ));
    out.line(format!(
        "grid: L = {}, n = {}; a = {}, eps = {}, R = {}; f = {}",
        cfg.grid.box_length,
        cfg.grid.n,
        cfg.kernel.a,
        cfg.kernel.epsilon,
        cfg.radius,
        nonlinearity(cfg)?.name()
    ));
    info!("running {} into {}", cfg.experiment, out_dir.display());
    match cfg.experiment {
        Experiment::KernelIdentities => kernel_identities(cfg, &mut out)?,
        Experiment::Certify => {
            let spec = problem(cfg, cfg.kernel.epsilon)?;
            certificate(&spec, &mut out)?;
        }
        Experiment::Picard => picard(cfg, &mut out)?,
        Experiment::Remark21 => {
            let threshold = (2.0 + E).sqrt();
            out.line(format!(
                "a > sqrt(5) = {:.6} is sufficient for the certificate; the exact threshold is a > sqrt(2 + e) = {threshold:.6}",
                5f64.sqrt()
            ));
            picard(cfg, &mut out)?;
        }
        Experiment::LimitSweep => limit_sweep(cfg, &mut out)?,
        Experiment::Rescaled => rescaled(cfg, &mut out)?,
        Experiment::GeneralQ => general_q(cfg, &mut out)?,
        Experiment::WeakLimit => weak_limit(cfg, &mut out)?,
    }
    let config_path = out_dir.join("config.toml");
    std::fs::write(&config_path, cfg.to_toml())?;
    out.files.push(config_path);
    let report_path = out_dir.join("report.txt");
    std::fs::write(&report_path, out.render())?;
    out.files.push(report_path);
    Ok(out)
}

fn kernel_identities(cfg: &RunConfig, out: &mut Outcome) -> Result<(), RunError> {
    let (a, eps, l) = (cfg.kernel.a, cfg.kernel.epsilon, cfg.grid.box_length);
    // only the box size enters the mass quadrature, so only periodization applies
    let rep = guard::evaluate(&grid(cfg)?, a, eps);
    if rep.periodization_ratio < guard::PERIODIZATION_MIN_RATIO {
        let v = rep.violations[0].clone();
        if !cfg.override_guards {
            return Err(RunError::Guard(v.to_string()));
        }
        out.line(format!("guard overridden: {v}"));
    }
    let params = KernelParams::new(a, eps)?;
    let mass = 1.0 / (a * a);
    let quad = kernel_mass_quadrature(&params, l)?;
    let rel = (quad - mass).abs() / mass;
    out.line(format!("kernel mass: quadrature {quad:.15e}, closed form 1/a^2 = {mass:.15e}"));
    out.check("mass", rel <= MASS_REL_TOL, format!("relative error {rel:.3e} (tol {MASS_REL_TOL:e})"));
    let zero = spectral_symbol(&params, 0.0);
    out.check(
        "zero mode",
        zero == kernel_mass(&params) && zero == mass,
        format!("multiplier at k = 0 is {zero}"),
    );

    let mut w = csv::Writer::from_writer(out.create("kernel_identities.csv")?);
    w.write_record(["epsilon", "outer", "inner", "total"]).map_err(csv_err)?;
    let mut prev = f64::INFINITY;
    let mut decreasing = true;
    let mut total_dev = 0.0f64;
    for &e in &cfg.kernel.eps_list {
        let m = delta_family_masses(&KernelParams::new(a, e)?, DELTA_RADIUS)?;
        w.serialize((e, m.outer, m.inner, m.outer + m.inner)).map_err(csv_err)?;
        decreasing &= m.outer < prev;
        prev = m.outer;
        total_dev = total_dev.max(((m.outer + m.inner) - mass).abs() / mass);
    }
    w.flush()?;
    if !cfg.kernel.eps_list.is_empty() {
        out.check(
            "delta family",
            decreasing && total_dev <= MASS_REL_TOL,
            format!("mass outside |x| > {DELTA_RADIUS} decreases with eps; total mass error {total_dev:.3e}"),
        );
    }
    Ok(())
}

fn certificate(spec: &Problem, out: &mut Outcome) -> Result<ContractionCertificate<f64>, RunError> {
    let cert = certify(spec)?;
    out.line(format!(
        "certificate: |p| = {:.6e}, M(R) = {:.6}, M1(R) = {:.6}, ball value {:.6}, gamma {:.6}",
        cert.norm_p, cert.m_r, cert.m1_r, cert.ball_condition_value, cert.gamma
    ));
    let mut w = csv::Writer::from_writer(out.create("certificate.csv")?);
    w.write_record(["quantity", "value"]).map_err(csv_err)?;
    for (k, v) in [
        ("radius", cert.radius),
        ("a", cert.a),
        ("norm_p", cert.norm_p),
        ("m_r", cert.m_r),
        ("m1_r", cert.m1_r),
        ("ball_condition_value", cert.ball_condition_value),
        ("gamma", cert.gamma),
        ("passes", if cert.passes { 1.0 } else { 0.0 }),
    ] {
        w.serialize((k, v)).map_err(csv_err)?;
    }
    w.flush()?;
    out.check(
        "certificate",
        cert.passes,
        format!(
            "(|p| R + M) / a^2 = {:.6} <= R = {} and gamma = {:.6} < 1",
            cert.ball_condition_value, cert.radius, cert.gamma
        ),
    );
    Ok(cert)
}

fn write_residuals(rep: &SolveReport<f64>, name: &str, out: &mut Outcome) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(out.create(name)?);
    w.write_record(["iteration", "step"]).map_err(csv_err)?;
    for (i, s) in rep.residual_history.iter().enumerate() {
        w.serialize((i + 1, s)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn solve_checks(rep: &SolveReport<f64>, gamma: f64, radius: f64, out: &mut Outcome) {
    out.line(format!(
        "picard: {} iterations, last step {:.3e}, a-posteriori bound {:.3e}, sup |u| = {:.6}",
        rep.iterations,
        rep.last_step(),
        rep.aposteriori_bound,
        rep.max_iterate_norm
    ));
    out.check("converged", rep.converged, format!("{} iterations", rep.iterations));
    out.check(
        "observed contraction",
        rep.observed_contraction <= gamma + CONTRACTION_SLACK,
        format!("{:.4} <= gamma + {CONTRACTION_SLACK} = {:.4}", rep.observed_contraction, gamma + CONTRACTION_SLACK),
    );
    out.check(
        "ball",
        rep.max_iterate_norm <= radius,
        format!("max iterate norm {:.6} <= R = {radius}", rep.max_iterate_norm),
    );
}

fn picard(cfg: &RunConfig, out: &mut Outcome) -> Result<(), RunError> {
    let spec = problem(cfg, cfg.kernel.epsilon)?;
    guard(cfg, spec.grid(), cfg.kernel.epsilon, out)?;
    let cert = certificate(&spec, out)?;
    let rep = picard_solve(&spec, ScalarField::zeros(*spec.grid()), cfg.tolerances.picard, cfg.tolerances.max_iter)?;
    solve_checks(&rep, cert.gamma, cfg.radius, out);
    write_residuals(&rep, "residuals.csv", out)?;
    out.save("solution.yfp", &rep.solution)?;
    Ok(())
}

fn limit_sweep(cfg: &RunConfig, out: &mut Outcome) -> Result<(), RunError> {
    let spec = problem(cfg, cfg.kernel.epsilon)?;
    for &e in &cfg.kernel.eps_list {
        guard(cfg, spec.grid(), e, out)?;
    }
    certificate(&spec, out)?;
    let table = epsilon_sweep(&spec, &cfg.kernel.eps_list, cfg.tolerances.picard, cfg.tolerances.max_iter, policy(cfg))?;
    for r in &table.rows {
        out.line(format!(
            "eps {:<8} err {:.4e}  bound {:.4e}  ({} iterations)",
            r.epsilon, r.err, r.bound, r.iterations
        ));
    }
    table.write_csv(out.create("sweep.csv")?)?;
    out.save("limit.yfp", &table.limit)?;
    out.check("err decreasing", table.err_strictly_decreasing(), "err strictly decreasing in eps");
    out.check(
        "a-priori bound",
        table.within_bound(BOUND_SLACK),
        format!("err <= bound with slack {BOUND_SLACK}"),
    );
    Ok(())
}

fn rescaled(cfg: &RunConfig, out: &mut Outcome) -> Result<(), RunError> {
    let (a, eps) = (cfg.kernel.a, cfg.kernel.epsilon);
    let y_grid = grid(cfg)?;
    // the rescaled kernel has eps = 1 on the y-grid
    guard(cfg, &y_grid, 1.0, out)?;
    let pot = potential(cfg);
    let f = nonlinearity(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let xis: Vec<[f64; 3]> = (0..XI_SAMPLES)
        .map(|_| [rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)])
        .collect();
    let rows = xi_sweep(&pot, &f, a, cfg.radius, &xis, cfg.tolerances.picard)?;
    write_xi_csv(&rows, out.create("xi_sweep.csv")?)?;
    let worst_residual = rows
        .iter()
        .map(|r| r.residual.abs() / (pot.eval(r.xi) * r.w).abs().max(1.0))
        .fold(0.0, f64::max);
    out.check(
        "frozen equation",
        worst_residual <= RESCALED_TOL,
        format!("{XI_SAMPLES} base points, worst relative residual of q(xi) w = f(w): {worst_residual:.3e}"),
    );

    let mut unique = true;
    let mut dev = 0.0f64;
    for (xi, row) in xis.iter().zip(&rows).take(XI_FULL_SOLVES) {
        let prob = RescaledProblem::new(*xi, eps, pot.clone(), f.clone(), a, cfg.radius, y_grid)?;
        let rep = solve_rescaled(&prob, cfg.tolerances.picard, cfg.tolerances.max_iter)?;
        unique &= rep.uniqueness_ok;
        if let Some(w) = &rep.warning {
            out.line(format!("warning at xi = {xi:?}: {w}"));
        }
        out.line(format!(
            "xi = [{:.4}, {:.4}, {:.4}]: w(0) = {:.12}, variation in y {:.3e}, {} iterations",
            xi[0], xi[1], xi[2], rep.value, rep.y_variation, rep.iterations
        ));
        dev = dev.max((rep.value - row.w).abs());
    }
    out.check("uniqueness", unique, "q(xi) > M1(R) at every solved base point");
    if eps == 0.0 {
        out.check(
            "rescaled solve",
            dev <= RESCALED_TOL,
            format!("y-grid solve matches the scalar root to {dev:.3e}"),
        );
    } else {
        out.line(format!("eps = {eps}: deviation from the frozen root {dev:.3e}"));
    }
    Ok(())
}

fn general_q(cfg: &RunConfig, out: &mut Outcome) -> Result<(), RunError> {
    let (a, eps) = (cfg.kernel.a, cfg.kernel.epsilon);
    let g = grid(cfg)?;
    guard(cfg, &g, eps, out)?;
    let q = potential(cfg).sample(g)?;
    let f = nonlinearity(cfg)?;
    let floor = ScalarField::constant(g, a * a)?;
    let cmp = comparison_check(&q, &floor, eps, a, None, cfg.tolerances.linear)?;
    out.check(
        "comparison",
        cmp.passes,
        format!(
            "{} Green columns: max (G_q - G_a^2) = {:.3e}, max column mass {:.10} (1/a^2 = {:.10})",
            cmp.sources.len(),
            cmp.max_violation,
            cmp.max_mass,
            1.0 / (a * a)
        ),
    );
    out.check("column mass", cmp.mass_ok, "h^3 sum G <= 1/a^2");

    let split = problem(cfg, eps)?;
    let split_cert = certify(&split)?;
    out.line(format!(
        "split certificate: |p| = {:.4}, ball value {:.4}, gamma {:.4}, passes {}",
        split_cert.norm_p, split_cert.ball_condition_value, split_cert.gamma, split_cert.passes
    ));
    let op = singpert::DiscreteOperator::new(q, eps, a)?;
    let cert = certify_general(&op, &f, cfg.radius)?;
    out.check(
        "general certificate",
        cert.passes,
        format!("M(R)/a^2 = {:.6} <= R, gamma = M1(R)/a^2 = {:.6}", cert.ball_condition_value, cert.gamma),
    );
    let rep = picard_solve_general(&op, &f, cfg.radius, cfg.tolerances.picard, cfg.tolerances.max_iter)?;
    solve_checks(&rep, cert.gamma, cfg.radius, out);
    write_residuals(&rep, "general_residuals.csv", out)?;
    out.save("general_solution.yfp", &rep.solution)?;
    Ok(())
}

fn weak_limit(cfg: &RunConfig, out: &mut Outcome) -> Result<(), RunError> {
    let g = grid(cfg)?;
    let q = potential(cfg).sample(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let c: [f64; 3] = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
    out.line(format!(
        "h = 1 + {:.6} cos(x) + {:.6} sin(2y) + {:.6} cos(x + z)",
        c[0], c[1], c[2]
    ));
    let h = ScalarField::sample(g, |x, y, z| 1.0 + c[0] * x.cos() + c[1] * (2.0 * y).sin() + c[2] * (x + z).cos())?;
    for &e in &cfg.kernel.eps_list {
        guard(cfg, &g, e, out)?;
    }
    let table = weak_limit_table(
        &q,
        &h,
        cfg.kernel.a,
        &cfg.kernel.eps_list,
        Laplacian::SevenPoint,
        policy(cfg),
        cfg.tolerances.linear,
    )?;
    for r in &table.rows {
        out.line(format!("eps {:<8} r {:.4e} ({} CG iterations)", r.epsilon, r.r, r.iterations));
    }
    table.write_csv(out.create("weak_limit.csv")?)?;
    out.check(
        "r decreasing",
        table.strictly_decreasing(),
        format!("reduction factors {:.3?}", table.reduction_factors()),
    );
    Ok(())
}

fn csv_err(e: csv::Error) -> RunError {
    RunError::Io(e.to_string())
}
