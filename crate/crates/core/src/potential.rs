//! Potentials `q(x)` as functions of position, so they can be sampled on any
//! grid or evaluated at rescaled arguments `xi + eps y`.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::field::ScalarField;
use crate::grid::GridSpec3D;
use crate::scalar::Real;

type PointFn<T> = Arc<dyn Fn([T; 3]) -> T + Send + Sync>;

#[derive(Clone)]
pub enum Potential<T> {
    Constant(T),
    /// `q(x) = a^2 + 1 + sin(omega x_1)`
    ShiftedSine { a: T, omega: T },
    /// `q(x) = floor + amplitude * sum_i sin^2(pi x_i / period)`: a periodic
    /// stand-in for a potential growing away from the origin.
    PeriodicWell { floor: T, amplitude: T, period: T },
    Custom(PointFn<T>),
}

impl<T: Real> fmt::Debug for Potential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Constant(c) => write!(f, "Constant({c})"),
            Potential::ShiftedSine { a, omega } => write!(f, "ShiftedSine {{ a: {a}, omega: {omega} }}"),
            Potential::PeriodicWell {
                floor,
                amplitude,
                period,
            } => write!(f, "PeriodicWell {{ floor: {floor}, amplitude: {amplitude}, period: {period} }}"),
            Potential::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl<T: Real> Potential<T> {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn([T; 3]) -> T + Send + Sync + 'static,
    {
        Potential::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: [T; 3]) -> T {
        match self {
            Potential::Constant(c) => *c,
            Potential::ShiftedSine { a, omega } => *a * *a + T::one() + (*omega * x[0]).sin(),
            Potential::PeriodicWell {
                floor,
                amplitude,
                period,
            } => {
                let s: T = x
                    .iter()
                    .map(|&xi| {
                        let v = (T::PI() * xi / *period).sin();
                        v * v
                    })
                    .sum();
                *floor + *amplitude * s
            }
            Potential::Custom(f) => f(x),
        }
    }

    pub fn sample(&self, grid: GridSpec3D<T>) -> Result<ScalarField<T>> {
        ScalarField::sample(grid, |x, y, z| self.eval([x, y, z]))
    }
}
