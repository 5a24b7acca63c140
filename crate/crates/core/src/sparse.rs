//! Minimal complex sparse matrices (COO assembly, CSR application).
//!
//! The generators built in this crate are moderately sparse (a few tens of
//! nonzeros per row) and are applied many times inside the integrator, so
//! all that is needed here is duplicate-summing assembly, a fast
//! matrix-vector product, and densification for the eigensolver.

use ndarray::Array2;
use num_complex::Complex64;

/// Triplet accumulator. Duplicate entries are summed on conversion.
#[derive(Debug, Clone)]
pub struct CooMatrix {
    dim: usize,
    entries: Vec<(u32, u32, Complex64)>,
}

impl CooMatrix {
    pub fn new(dim: usize) -> Self {
        assert!(dim <= u32::MAX as usize);
        CooMatrix { dim, entries: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: Complex64) {
        debug_assert!(row < self.dim && col < self.dim);
        if value != Complex64::ZERO {
            self.entries.push((row as u32, col as u32, value));
        }
    }

    pub fn to_csr(mut self) -> CsrMatrix {
        self.entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut merged: Vec<(u32, u32, Complex64)> = Vec::with_capacity(self.entries.len());
        for (r, c, v) in self.entries {
            match merged.last_mut() {
                Some((lr, lc, lv)) if *lr == r && *lc == c => *lv += v,
                _ => merged.push((r, c, v)),
            }
        }

        let mut row_ptr = vec![0usize; self.dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r as usize + 1] += 1;
        }
        for i in 0..self.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col = merged.iter().map(|e| e.1).collect();
        let val = merged.iter().map(|e| e.2).collect();

        CsrMatrix { dim: self.dim, row_ptr, col, val }
    }
}

/// Compressed sparse row matrix over `Complex64`.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col: Vec<u32>,
    val: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    /// y = A x
    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (row, yi) in y.iter_mut().enumerate() {
            let lo = self.row_ptr[row];
            let hi = self.row_ptr[row + 1];
            let mut acc = Complex64::ZERO;
            for (c, v) in self.col[lo..hi].iter().zip(&self.val[lo..hi]) {
                acc += v * x[*c as usize];
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::ZERO; self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut dense = Array2::zeros((self.dim, self.dim));
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                dense[(row, self.col[k] as usize)] = self.val[k];
            }
        }
        dense
    }
}
