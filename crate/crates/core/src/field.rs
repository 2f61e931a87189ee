use crate::error::{Error, Result};
use crate::grid::GridSpec3D;
use crate::scalar::Real;

/// Real function sampled on a [`GridSpec3D`].
///
/// Every public constructor and combinator rejects non-finite values, so a
/// `ScalarField` that exists holds only finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: GridSpec3D<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    /// Samples `f(x, y, z)` at every grid point.
    pub fn sample<F>(grid: GridSpec3D<T>, f: F) -> Result<Self>
    where
        F: Fn(T, T, T) -> T,
    {
        let n = grid.points_per_axis();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            let x = grid.coordinate(i);
            for j in 0..n {
                let y = grid.coordinate(j);
                for k in 0..n {
                    let v = f(x, y, grid.coordinate(k));
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            i,
                            j,
                            k,
                            value: v.as_f64(),
                        });
                    }
                    values.push(v);
                }
            }
        }
        Ok(Self { grid, values })
    }

    pub fn from_values(grid: GridSpec3D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        check_finite(&grid, &values)?;
        Ok(Self { grid, values })
    }

    pub fn constant(grid: GridSpec3D<T>, c: T) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::NonFinite {
                i: 0,
                j: 0,
                k: 0,
                value: c.as_f64(),
            });
        }
        Ok(Self {
            grid,
            values: vec![c; grid.len()],
        })
    }

    pub fn zeros(grid: GridSpec3D<T>) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec3D<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.values[self.grid.index(i, j, k)]
    }

    /// Pointwise map; fails if `f` produces a non-finite value.
    pub fn map<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(T) -> T,
    {
        let values: Vec<T> = self.values.iter().map(|&v| f(v)).collect();
        check_finite(&self.grid, &values)?;
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(T, T) -> T,
    {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values: Vec<T> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        check_finite(&self.grid, &values)?;
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: T) -> Result<Self> {
        self.map(|v| c * v)
    }

    /// Max over the grid of `|v|`.
    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &v| if v.abs() > acc { v.abs() } else { acc })
    }

    /// Grid quadrature of the L2 norm, `sqrt(h^3 * sum v^2)`.
    pub fn l2_norm(&self) -> T {
        let sum_sq: T = self.values.iter().map(|&v| v * v).sum();
        (self.grid.cell_volume() * sum_sq).sqrt()
    }

    /// `sup_norm(self - other)` without materializing the difference.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs())))
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn mean(&self) -> T {
        let sum: T = self.values.iter().copied().sum();
        sum / T::lit(self.values.len() as f64)
    }

    /// Index and value of the smallest entry.
    pub fn argmin(&self) -> (usize, T) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::infinity()), |best, (i, v)| if v < best.1 { (i, v) } else { best })
    }
}

fn check_finite<T: Real>(grid: &GridSpec3D<T>, values: &[T]) -> Result<()> {
    if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
        let (i, j, k) = grid.unravel(idx);
        return Err(Error::NonFinite {
            i,
            j,
            k,
            value: values[idx].as_f64(),
        });
    }
    Ok(())
}
