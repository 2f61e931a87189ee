//! Discrete Fourier pair on the periodic grid.
//!
//! Convention: the forward transform is unnormalized,
//! `c[m] = sum_x v[x] exp(-i k_m . x)`, so a constant field `c` has a single
//! nonzero coefficient `c * n^3` at the zero mode. The inverse transform
//! divides by `n^3`, making `inverse(forward(v)) == v` up to round-off.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::GridSpec3D;
use crate::scalar::Real;

/// Discretization of the Laplacian used by spectral multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Laplacian {
    /// Exact symbol `-|k|^2` on the represented wavenumbers.
    #[default]
    Spectral,
    /// Second-order 7-point stencil, symbol `-(4/h^2) sum sin^2(k h / 2)`.
    SevenPoint,
}

impl Laplacian {
    /// Symbol of `-Delta` for the per-axis wavenumbers `k`.
    pub fn negative_symbol<T: Real>(self, grid: &GridSpec3D<T>) -> Vec<T> {
        let per_axis: Vec<T> = match self {
            Laplacian::Spectral => grid.wavenumbers().into_iter().map(|k| k * k).collect(),
            Laplacian::SevenPoint => {
                let h = grid.spacing();
                let four_over_h2 = T::lit(4.0) / (h * h);
                grid.wavenumbers()
                    .into_iter()
                    .map(|k| {
                        let s = (k * h / T::lit(2.0)).sin();
                        four_over_h2 * s * s
                    })
                    .collect()
            }
        };
        let n = grid.points_per_axis();
        let mut out = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.push(per_axis[i] + per_axis[j] + per_axis[k]);
                }
            }
        }
        out
    }
}

/// Spectral coefficients of a field, laid out like the field itself.
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    grid: GridSpec3D<T>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn grid(&self) -> &GridSpec3D<T> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    /// Multiplies coefficient `m` by `multiplier[m]`.
    pub fn apply_multiplier(&mut self, multiplier: &[T]) {
        for (c, &s) in self.coeffs.iter_mut().zip(multiplier) {
            *c = *c * s;
        }
    }
}

/// Cached 1-D plans for an `n x n x n` transform.
#[derive(Clone)]
pub struct Fft3<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Fft3<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl<T: Real> Fft3<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn forward(&self, field: &ScalarField<T>) -> Spectrum<T> {
        assert_eq!(field.grid().points_per_axis(), self.n, "plan size mismatch");
        let mut coeffs: Vec<Complex<T>> = field
            .values()
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        self.transform(&mut coeffs, &*self.forward);
        Spectrum {
            grid: *field.grid(),
            coeffs,
        }
    }

    /// Inverse transform; the imaginary remainder is discarded.
    pub fn inverse(&self, spectrum: &Spectrum<T>) -> Result<ScalarField<T>> {
        assert_eq!(spectrum.grid.points_per_axis(), self.n, "plan size mismatch");
        let mut data = spectrum.coeffs.clone();
        self.transform(&mut data, &*self.inverse);
        let norm = T::one() / T::lit(spectrum.grid.len() as f64);
        let values = data.into_iter().map(|c| c.re * norm).collect();
        ScalarField::from_values(spectrum.grid, values)
    }

    fn transform(&self, data: &mut [Complex<T>], fft: &dyn Fft<T>) {
        let n = self.n;
        // Contiguous axis: one batched call.
        fft.process(data);
        let mut lines = vec![Complex::new(T::zero(), T::zero()); data.len()];
        for stride in [n, n * n] {
            let bases = (0..data.len()).filter(|idx| (idx / stride) % n == 0);
            for (line, base) in bases.clone().enumerate() {
                for t in 0..n {
                    lines[line * n + t] = data[base + t * stride];
                }
            }
            fft.process(&mut lines);
            for (line, base) in bases.enumerate() {
                for t in 0..n {
                    data[base + t * stride] = lines[line * n + t];
                }
            }
        }
    }
}

pub fn forward_spectrum<T: Real>(field: &ScalarField<T>) -> Spectrum<T> {
    Fft3::new(field.grid().points_per_axis()).forward(field)
}

pub fn inverse_spectrum<T: Real>(spectrum: &Spectrum<T>) -> Result<ScalarField<T>> {
    Fft3::new(spectrum.grid().points_per_axis()).inverse(spectrum)
}

/// Applies `-Delta` with the chosen discretization via the spectral symbol.
pub fn negative_laplacian<T: Real>(field: &ScalarField<T>, laplacian: Laplacian) -> Result<ScalarField<T>> {
    let fft = Fft3::new(field.grid().points_per_axis());
    let mut spec = fft.forward(field);
    spec.apply_multiplier(&laplacian.negative_symbol(field.grid()));
    fft.inverse(&spec)
}

/// Builds a spectrum from raw coefficients (length `n^3`).
pub fn spectrum_from_coeffs<T: Real>(grid: GridSpec3D<T>, coeffs: Vec<Complex<T>>) -> Result<Spectrum<T>> {
    if coeffs.len() != grid.len() {
        return Err(Error::InvalidGrid(format!(
            "expected {} coefficients, got {}",
            grid.len(),
            coeffs.len()
        )));
    }
    Ok(Spectrum { grid, coeffs })
}
