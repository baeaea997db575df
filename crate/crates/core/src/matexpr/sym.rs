use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// A symmetric `dim × dim` matrix stored as its upper triangle, row by row.
///
/// Only one copy of each off-diagonal entry exists, so symmetry holds by
/// construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymMatrix<T> {
    dim: usize,
    upper: Vec<T>,
}

impl<T> SymMatrix<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Upper-triangle entries in row-major order.
    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.upper[offset(self.dim, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let o = offset(self.dim, i, j);
        self.upper[o] = value;
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> SymMatrix<U> {
        SymMatrix {
            dim: self.dim,
            upper: self.upper.iter().map(f).collect(),
        }
    }

    /// Iterates `(i, j, value)` over the upper triangle, `i <= j`.
    pub fn iter_upper(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let dim = self.dim;
        (0..dim)
            .flat_map(move |i| (i..dim).map(move |j| (i, j)))
            .zip(self.upper.iter())
            .map(|((i, j), v)| (i, j, v))
    }
}

/// Offset of `(i, j)` in the packed upper triangle.
#[inline]
pub(crate) fn offset(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    assert!(j < dim, "index ({i},{j}) out of range for dim {dim}");
    // rows 0..i hold dim + (dim - 1) + ... + (dim - i + 1) entries
    i * dim - i * i.saturating_sub(1) / 2 + (j - i)
}

impl<T: Clone + Zero> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            upper: vec![T::zero(); dim * (dim + 1) / 2],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                upper.push(f(i, j));
            }
        }
        Self { dim, upper }
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(Zero::is_zero)
    }

    /// Row-major dense copy.
    pub fn to_row_major(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.push(self.get(i, j).clone());
            }
        }
        out
    }
}

impl<T: Clone + Zero + PartialEq> SymMatrix<T> {
    /// Builds from a row-major square matrix, rejecting anything that is not
    /// exactly symmetric.
    pub fn from_row_major(dim: usize, values: &[T]) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                values.len()
            )));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if values[i * dim + j] != values[j * dim + i] {
                    return Err(Error::Invalid(format!(
                        "matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self::from_fn(dim, |i, j| values[i * dim + j].clone()))
    }
}

impl<T: Clone + Zero + One> SymMatrix<T> {
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }
}

impl<T: Clone + Add<Output = T>> SymMatrix<T> {
    pub fn add_assign_ref(&mut self, other: &Self) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.upper.iter_mut().zip(&other.upper) {
            *a = a.clone() + b.clone();
        }
    }
}

impl<T: Clone + Add<Output = T>> Add for &SymMatrix<T> {
    type Output = SymMatrix<T>;
    fn add(self, rhs: Self) -> SymMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        SymMatrix {
            dim: self.dim,
            upper: self
                .upper
                .iter()
                .zip(&rhs.upper)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<T: Clone + Sub<Output = T>> Sub for &SymMatrix<T> {
    type Output = SymMatrix<T>;
    fn sub(self, rhs: Self) -> SymMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        SymMatrix {
            dim: self.dim,
            upper: self
                .upper
                .iter()
                .zip(&rhs.upper)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<T: Clone + Neg<Output = T>> Neg for &SymMatrix<T> {
    type Output = SymMatrix<T>;
    fn neg(self) -> SymMatrix<T> {
        self.map(|v| -v.clone())
    }
}

impl<T: Clone + Mul<Output = T>> SymMatrix<T> {
    pub fn scale(&self, c: &T) -> Self {
        self.map(|v| v.clone() * c.clone())
    }
}

impl SymMatrix<f64> {
    /// Dense copy with the lower triangle mirrored from the upper one.
    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| *self.get(i, j))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.iter_upper()
            .map(|(i, j, v)| if i == j { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_cover_upper_triangle_once() {
        for dim in 1..7 {
            let mut seen = vec![false; dim * (dim + 1) / 2];
            for i in 0..dim {
                for j in i..dim {
                    let o = offset(dim, i, j);
                    assert!(!seen[o]);
                    seen[o] = true;
                    assert_eq!(o, offset(dim, j, i));
                }
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn row_major_round_trip_and_symmetry_check() {
        let m = SymMatrix::from_row_major(2, &[1i64, 2, 2, 5]).unwrap();
        assert_eq!(m.to_row_major(), vec![1, 2, 2, 5]);
        assert!(SymMatrix::from_row_major(2, &[1i64, 2, 3, 5]).is_err());
        assert!(SymMatrix::from_row_major(2, &[1i64, 2, 3]).is_err());
    }
}
