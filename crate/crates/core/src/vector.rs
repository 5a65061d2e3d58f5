//! Fixed-capacity vectors in ℝⁿ.

use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// Largest ambient dimension supported by [`Vector`].
pub const MAX_DIM: usize = 8;

/// A point or direction in ℝⁿ with `n ≤ MAX_DIM`, stored inline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vector {
    dim: usize,
    data: [f64; MAX_DIM],
}

impl Vector {
    /// Zero vector of dimension `dim`.
    ///
    /// Panics if `dim > MAX_DIM`; curve constructors validate the dimension
    /// before any vector is built.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds MAX_DIM");
        Self {
            dim,
            data: [0.0; MAX_DIM],
        }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        let mut v = Self::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        v
    }

    /// The `axis`-th standard basis vector.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[axis] = 1.0;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.dim]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data[..self.dim]
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = 0.0;
        for k in 0..self.dim {
            acc += self.data[k] * other.data[k];
        }
        acc
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_squared())
    }

    /// `self + factor * other`.
    #[inline]
    pub fn add_scaled(&self, factor: f64, other: &Self) -> Self {
        let mut out = *self;
        for k in 0..self.dim {
            out.data[k] += factor * other.data[k];
        }
        out
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    #[inline]
    fn index(&self, k: usize) -> &f64 {
        &self.as_slice()[k]
    }
}

impl IndexMut<usize> for Vector {
    #[inline]
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.as_mut_slice()[k]
    }
}

impl Add for Vector {
    type Output = Vector;
    #[inline]
    fn add(self, rhs: Vector) -> Vector {
        self.add_scaled(1.0, &rhs)
    }
}

impl AddAssign for Vector {
    #[inline]
    fn add_assign(&mut self, rhs: Vector) {
        *self = *self + rhs;
    }
}

impl Sub for Vector {
    type Output = Vector;
    #[inline]
    fn sub(self, rhs: Vector) -> Vector {
        self.add_scaled(-1.0, &rhs)
    }
}

impl SubAssign for Vector {
    #[inline]
    fn sub_assign(&mut self, rhs: Vector) {
        *self = *self - rhs;
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    #[inline]
    fn mul(mut self, rhs: f64) -> Vector {
        for x in self.as_mut_slice() {
            *x *= rhs;
        }
        self
    }
}

impl Neg for Vector {
    type Output = Vector;
    #[inline]
    fn neg(self) -> Vector {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_respects_dimension() {
        let a = Vector::from_slice(&[1.0, 2.0, 3.0]);
        let b = Vector::from_slice(&[0.5, -1.0, 2.0]);
        assert_eq!((a - b).as_slice(), &[0.5, 3.0, 1.0]);
        assert_eq!((a + b * 2.0).as_slice(), &[2.0, 0.0, 7.0]);
        assert_eq!(a.dot(&b), 0.5 - 2.0 + 6.0);
        assert_eq!(Vector::unit(4, 2).as_slice(), &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!((-a).dim(), 3);
    }

    #[test]
    #[should_panic]
    fn oversized_dimension_panics() {
        let _ = Vector::zeros(MAX_DIM + 1);
    }
}
