use crate::error::{Error, Result};
use crate::scalar::Real;

/// Periodic cube `[0, L)^3` sampled with `n` points per axis.
///
/// Flat indices are row-major in `(i, j, k)`: `idx = (i * n + j) * n + k`,
/// so `k` (the third coordinate) is contiguous. Coordinates are `x_i = i h`
/// with `h = L / n`, and the wavenumber of index `i` is `2 pi m / L` where
/// `m` is the signed alias of `i` in `[-n/2, n/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec3D<T> {
    box_length: T,
    n: usize,
}

impl<T: Real> GridSpec3D<T> {
    pub fn new(box_length: T, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGrid(format!("need n >= 4, got {n}")));
        }
        if !(box_length.is_finite() && box_length > T::zero()) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        if n.checked_pow(3).is_none() {
            return Err(Error::InvalidGrid(format!("n = {n} overflows n^3")));
        }
        Ok(Self { box_length, n })
    }

    pub fn box_length(&self) -> T {
        self.box_length
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> T {
        self.box_length / T::lit(self.n as f64)
    }

    /// Total number of grid points, `n^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> T {
        let h = self.spacing();
        h * h * h
    }

    pub fn volume(&self) -> T {
        self.box_length * self.box_length * self.box_length
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.n && j < self.n && k < self.n);
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    #[inline]
    pub fn coordinate(&self, i: usize) -> T {
        T::lit(i as f64) * self.spacing()
    }

    /// Coordinate of index `i` taken in `[-L/2, L/2)`, i.e. the periodic
    /// image closest to the origin.
    pub fn signed_coordinate(&self, i: usize) -> T {
        T::lit(self.signed_alias(i) as f64) * self.spacing()
    }

    pub fn point(&self, idx: usize) -> [T; 3] {
        let (i, j, k) = self.unravel(idx);
        [self.coordinate(i), self.coordinate(j), self.coordinate(k)]
    }

    /// Signed alias of `i` in `[-n/2, n/2)`.
    #[inline]
    pub fn signed_alias(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn wavenumber(&self, i: usize) -> T {
        T::lit(2.0 * std::f64::consts::PI * self.signed_alias(i) as f64) / self.box_length
    }

    /// Wavenumbers of one axis, in index order.
    pub fn wavenumbers(&self) -> Vec<T> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }
}
