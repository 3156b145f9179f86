//! Minimal dense complex matrices: product, matrix-vector action and a
//! scaling-and-squaring matrix exponential.
//!
//! The truncated displacement/squeeze unitaries and the dense sector
//! oracles only need small matrices (dimension up to a few hundred), so a
//! straightforward row-major implementation is sufficient and keeps the
//! whole crate generic over the scalar type.

use num_complex::Complex;

use crate::scalar::Real;

/// Square dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in orow.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.dim);
        let n = self.dim;
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let mut acc = Complex::new(T::zero(), T::zero());
            for (a, x) in row.iter().zip(v) {
                acc += *a * x;
            }
            out[i] = acc;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            let s = self.data[i * n..(i + 1) * n]
                .iter()
                .map(|z| z.norm())
                .fold(T::zero(), |a, b| a + b);
            worst = worst.max(s);
        }
        worst
    }

    /// Crop to the leading `dim x dim` block.
    pub fn crop(&self, dim: usize) -> Self {
        assert!(dim <= self.dim);
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                out.data[i * dim + j] = self.data[i * self.dim + j];
            }
        }
        out
    }

    /// Matrix exponential by scaling and squaring with a Taylor kernel.
    ///
    /// The scaled norm is kept below 1/2, where an order-18 Taylor sum is
    /// accurate to machine precision; repeated squaring undoes the scaling.
    pub fn expm(&self) -> Self {
        let norm = self.inf_norm();
        let mut squarings = 0usize;
        let mut scale = T::one();
        if norm > T::of(0.5) {
            squarings = (norm.as_f64() / 0.5).log2().ceil().max(0.0) as usize;
            for _ in 0..squarings {
                scale = scale * T::of(0.5);
            }
        }

        let n = self.dim;
        let mut scaled = self.clone();
        for z in &mut scaled.data {
            *z = Complex::new(z.re * scale, z.im * scale);
        }

        let mut result = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=18usize {
            term = term.matmul(&scaled);
            let inv_k = T::one() / T::of(k as f64);
            for z in &mut term.data {
                *z = Complex::new(z.re * inv_k, z.im * inv_k);
            }
            for (r, t) in result.data.iter_mut().zip(&term.data) {
                *r += *t;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        result
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}
