//! Discretization guards for the periodic-box approximation of R^3.
//!
//! The kernel `exp(-(a/eps) r) / (4 pi r eps^2)` has width `eps / a`. Two
//! conditions keep the periodic grid honest about it:
//!
//! * periodization: `a L / (2 eps) >= 20`, so images of the kernel from
//!   neighboring cells contribute below `~e^-20` of the mass;
//! * resolution: `h <= eps / (4 a)`, so the grid sees the kernel width.

use log::warn;

use crate::error::{Error, GuardKind, GuardViolation, Result};
use crate::grid::GridSpec3D;
use crate::scalar::Real;

pub const PERIODIZATION_MIN_RATIO: f64 = 20.0;
pub const RESOLUTION_POINTS_PER_WIDTH: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GuardPolicy {
    #[default]
    Enforce,
    /// Report violations as warnings and carry on.
    Override,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardReport {
    pub periodization_ratio: f64,
    pub spacing: f64,
    pub max_spacing: f64,
    pub required_n: usize,
    pub violations: Vec<GuardViolation>,
}

impl GuardReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Smallest points-per-axis with `L / n <= eps / (4 a)`.
pub fn required_points(a: f64, epsilon: f64, box_length: f64) -> usize {
    (RESOLUTION_POINTS_PER_WIDTH * a * box_length / epsilon).ceil() as usize
}

pub fn evaluate<T: Real>(grid: &GridSpec3D<T>, a: T, epsilon: T) -> GuardReport {
    let (a, eps, l) = (a.as_f64(), epsilon.as_f64(), grid.box_length().as_f64());
    let n = grid.points_per_axis();
    let ratio = a * l / (2.0 * eps);
    let spacing = l / n as f64;
    let max_spacing = eps / (RESOLUTION_POINTS_PER_WIDTH * a);
    let required_n = required_points(a, eps, l);
    let violation = |kind| GuardViolation {
        kind,
        a,
        epsilon: eps,
        box_length: l,
        n,
        required_n,
    };
    let mut violations = Vec::new();
    if ratio < PERIODIZATION_MIN_RATIO {
        violations.push(violation(GuardKind::Periodization));
    }
    if spacing > max_spacing * (1.0 + 1e-12) {
        violations.push(violation(GuardKind::Resolution));
    }
    GuardReport {
        periodization_ratio: ratio,
        spacing,
        max_spacing,
        required_n,
        violations,
    }
}

/// Evaluates the guards and, under [`GuardPolicy::Enforce`], turns the first
/// violation into an error.
pub fn check<T: Real>(grid: &GridSpec3D<T>, a: T, epsilon: T, policy: GuardPolicy) -> Result<GuardReport> {
    let report = evaluate(grid, a, epsilon);
    if let Some(v) = report.violations.first() {
        match policy {
            GuardPolicy::Enforce => return Err(Error::Guard(v.clone())),
            GuardPolicy::Override => {
                for v in &report.violations {
                    warn!("guard overridden: {v}");
                }
            }
        }
    }
    Ok(report)
}
