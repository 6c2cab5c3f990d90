//! Line transforms over square row-major buffers.
//!
//! Rows are contiguous; column passes go through a blocked in-place transpose.
//! Every pass is parallel over lines only, so results are bitwise identical for
//! any worker count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct LinePlans {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

pub(crate) fn plans(n: usize) -> Arc<LinePlans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<LinePlans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(LinePlans {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl LinePlans {
    fn scratch(&self) -> Vec<Complex64> {
        let len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        vec![Complex64::default(); len]
    }

    /// Unnormalized forward DFT of every row.
    pub fn rows_forward(&self, data: &mut [Complex64]) {
        let n = self.n;
        data.par_chunks_mut(n)
            .for_each_init(|| self.scratch(), |scratch, row| {
                self.forward.process_with_scratch(row, scratch)
            });
    }

    /// Unnormalized inverse DFT (`Σ e^{+2πi·}`) of every row.
    pub fn rows_inverse(&self, data: &mut [Complex64]) {
        let n = self.n;
        data.par_chunks_mut(n)
            .for_each_init(|| self.scratch(), |scratch, row| {
                self.inverse.process_with_scratch(row, scratch)
            });
    }

    /// Runs `inverse → op → forward` on every row. `op` receives the row index and
    /// the row in line-physical space.
    pub fn rows_roundtrip<F>(&self, data: &mut [Complex64], op: F)
    where
        F: Fn(usize, &mut [Complex64]) + Sync,
    {
        let n = self.n;
        data.par_chunks_mut(n)
            .enumerate()
            .for_each_init(
                || self.scratch(),
                |scratch, (r, row)| {
                    self.inverse.process_with_scratch(row, scratch);
                    op(r, row);
                    self.forward.process_with_scratch(row, scratch);
                },
            );
    }
}

const BLOCK: usize = 32;

/// In-place transpose of an `n × n` row-major buffer.
pub(crate) fn transpose_square(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n);
    for ib in (0..n).step_by(BLOCK) {
        for jb in (ib..n).step_by(BLOCK) {
            let i_end = (ib + BLOCK).min(n);
            let j_end = (jb + BLOCK).min(n);
            for i in ib..i_end {
                let j_start = if ib == jb { i + 1 } else { jb };
                for j in j_start..j_end {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// Sum of `f(row_index, row)` over rows, parallel per row and reduced sequentially.
pub(crate) fn row_sum<T, F>(data: &[T], n: usize, f: F) -> f64
where
    T: Sync,
    F: Fn(usize, &[T]) -> f64 + Sync,
{
    let partial: Vec<f64> = data
        .par_chunks(n)
        .enumerate()
        .map(|(r, row)| f(r, row))
        .collect();
    partial.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_is_involution() {
        for n in [4usize, 6, 40, 64, 70] {
            let orig: Vec<Complex64> = (0..n * n)
                .map(|i| Complex64::new(i as f64, -(i as f64) * 0.5))
                .collect();
            let mut data = orig.clone();
            transpose_square(&mut data, n);
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(data[i * n + j], orig[j * n + i]);
                }
            }
            transpose_square(&mut data, n);
            assert_eq!(data, orig);
        }
    }

    #[test]
    fn forward_inverse_rows_scale_by_n() {
        let n = 16;
        let p = plans(n);
        let orig: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut data = orig.clone();
        p.rows_forward(&mut data);
        p.rows_inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / n as f64 - b).norm() < 1e-14);
        }
    }
}
