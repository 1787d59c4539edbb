use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::scalar::C64;

/// Dense row-major complex matrix, sized for the small Jacobians of mode sets.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `out = self * v`
    pub fn mul_vec_into(&self, v: &[C64], out: &mut [C64]) {
        debug_assert_eq!(v.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate().take(self.rows) {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        self.mul_vec_into(v, &mut out);
        out
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Euclidean norm of a complex vector.
pub fn norm(v: &[C64]) -> f64 {
    num_traits::Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Euclidean norm of the difference of two complex vectors.
pub fn dist(a: &[C64], b: &[C64]) -> f64 {
    num_traits::Float::sqrt(a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>())
}

/// Norm of the imaginary parts.
pub fn imag_norm(v: &[C64]) -> f64 {
    num_traits::Float::sqrt(v.iter().map(|z| z.im * z.im).sum::<f64>())
}

pub fn to_complex(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}
