//! Scalar fields on the square torus `[-π, π)²`.
//!
//! Fourier coefficients follow the `(1/2π)∫ e^{-i(kx+ℓy)} f` normalization, so that
//! Plancherel reads `‖f‖²_{L²} = Σ |f̂(k,ℓ)|²` with no extra factors. On an `n × n`
//! grid the discrete coefficient is `(2π/n²) Σ f(x_i, y_m) e^{-i(k x_i + ℓ y_m)}`,
//! where the nodes are `x_i = -π + 2πi/n`.
//!
//! Storage is row-major with rows at fixed `y` (physical) or fixed `ℓ` (spectral);
//! both signs of each wavenumber are kept.

pub(crate) mod fft;
mod holder;
mod initial;

use std::f64::consts::PI;

use rayon::prelude::*;
pub use rustfft::num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub use holder::{holder_seminorm, HolderEstimate};
pub use initial::{AnalyticInitialData, Mode, TrigTerm};

/// Uniform `n × n` grid on `[-π, π)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGrid {
                n,
                reason: "need at least 4 points per dimension",
            });
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid {
                n,
                reason: "points per dimension must be even",
            });
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Node coordinate `-π + i·2π/n`.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        -PI + i as f64 * self.spacing()
    }

    /// Signed wavenumber stored at FFT index `idx`, in `[-n/2, n/2)`.
    #[inline]
    pub fn wavenumber(&self, idx: usize) -> i64 {
        let h = self.n / 2;
        if idx < h {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// FFT index of wavenumber `k`, if `k ∈ [-n/2, n/2)`.
    #[inline]
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let h = (self.n / 2) as i64;
        if k >= -h && k < h {
            Some(k.rem_euclid(self.n as i64) as usize)
        } else {
            None
        }
    }

    /// Largest wavenumber magnitude represented without aliasing.
    #[inline]
    pub fn nyquist(&self) -> usize {
        self.n / 2
    }
}

/// Real samples on the grid nodes, `values[iy * n + ix] = f(x_ix, y_iy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn<F>(grid: TorusGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let n = grid.n();
        let mut values = vec![0.0; grid.len()];
        values.par_chunks_mut(n).enumerate().for_each(|(iy, row)| {
            let y = grid.node(iy);
            for (ix, v) in row.iter_mut().enumerate() {
                *v = f(grid.node(ix), y);
            }
        });
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.n() + ix]
    }

    /// `(∫ |f|^p)^{1/p}` by the periodic trapezoid rule.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let h2 = self.grid.spacing().powi(2);
        let s = fft::row_sum(&self.values, self.grid.n(), |_, row| {
            row.iter().map(|v| v.abs().powf(p)).sum()
        });
        (h2 * s).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        let h2 = self.grid.spacing().powi(2);
        let s = fft::row_sum(&self.values, self.grid.n(), |_, row| {
            row.iter().map(|v| v * v).sum()
        });
        (h2 * s).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Fourier coefficients `f̂(k, ℓ)` of a real field, `coeffs[ℓ_idx * n + k_idx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

/// Energy share above `n/4`; `zero_field` is set when the field has no energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFraction {
    pub fraction: f64,
    pub zero_field: bool,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `f̂(k, ℓ)`; zero outside the resolved band.
    pub fn coeff(&self, k: i64, l: i64) -> Complex64 {
        match (self.grid.index_of(k), self.grid.index_of(l)) {
            (Some(i), Some(j)) => self.coeffs[j * self.grid.n() + i],
            _ => Complex64::default(),
        }
    }

    /// Sets `f̂(k, ℓ)`; returns false when `(k, ℓ)` is outside the band.
    pub fn set_coeff(&mut self, k: i64, l: i64, value: Complex64) -> bool {
        match (self.grid.index_of(k), self.grid.index_of(l)) {
            (Some(i), Some(j)) => {
                self.coeffs[j * self.grid.n() + i] = value;
                true
            }
            _ => false,
        }
    }

    /// Mean value `(1/4π²)∫f = f̂(0,0)/2π`.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re / (2.0 * PI)
    }

    /// `Σ w(k,ℓ)|f̂|²` with the weight evaluated on signed wavenumbers.
    pub fn weighted_energy<W>(&self, weight: W) -> f64
    where
        W: Fn(i64, i64) -> f64 + Sync,
    {
        let grid = self.grid;
        fft::row_sum(&self.coeffs, grid.n(), |j, row| {
            let l = grid.wavenumber(j);
            row.iter()
                .enumerate()
                .map(|(i, c)| weight(grid.wavenumber(i), l) * c.norm_sqr())
                .sum()
        })
    }

    pub fn energy(&self) -> f64 {
        fft::row_sum(&self.coeffs, self.grid.n(), |_, row| {
            row.iter().map(|c| c.norm_sqr()).sum()
        })
    }

    pub fn l2_norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// `‖∇f‖²_{L²} = Σ (k²+ℓ²)|f̂|²`.
    pub fn grad_sq(&self) -> f64 {
        self.weighted_energy(|k, l| (k * k + l * l) as f64)
    }

    /// Sobolev norm of order `sigma`: homogeneous weights `(k²+ℓ²)^σ` skip the
    /// zero mode, inhomogeneous weights `(1+k²+ℓ²)^σ` include it.
    pub fn sobolev_norm(&self, sigma: f64, homogeneous: bool) -> Result<f64> {
        if !(sigma >= 0.0) {
            return Err(invalid("sigma", sigma, "Sobolev order must be >= 0"));
        }
        let s = if homogeneous {
            self.weighted_energy(|k, l| {
                let w = (k * k + l * l) as f64;
                if w == 0.0 {
                    0.0
                } else if sigma == 1.0 {
                    w
                } else {
                    w.powf(sigma)
                }
            })
        } else {
            self.weighted_energy(|k, l| {
                let w = (1 + k * k + l * l) as f64;
                if sigma == 1.0 {
                    w
                } else {
                    w.powf(sigma)
                }
            })
        };
        Ok(s.sqrt())
    }

    /// `P_{>N}`: zeroes every mode with `k² + ℓ² ≤ N²`.
    pub fn project_high(&self, cutoff: f64) -> Result<Self> {
        if !(cutoff >= 0.0) {
            return Err(invalid("N", cutoff, "projection cutoff must be >= 0"));
        }
        let grid = self.grid;
        let n = grid.n();
        let c2 = cutoff * cutoff;
        let mut out = self.clone();
        out.coeffs.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            let l = grid.wavenumber(j);
            for (i, c) in row.iter_mut().enumerate() {
                let k = grid.wavenumber(i);
                if ((k * k + l * l) as f64) <= c2 {
                    *c = Complex64::default();
                }
            }
        });
        Ok(out)
    }

    /// Fraction of energy in modes with `max(|k|, |ℓ|) > n/4`.
    pub fn tail_fraction(&self) -> TailFraction {
        let grid = self.grid;
        let q = (grid.n() / 4) as i64;
        let total = self.energy();
        if total == 0.0 {
            return TailFraction {
                fraction: 0.0,
                zero_field: true,
            };
        }
        let tail = self.weighted_energy(|k, l| {
            if k.abs().max(l.abs()) > q {
                1.0
            } else {
                0.0
            }
        });
        TailFraction {
            fraction: (tail / total).clamp(0.0, 1.0),
            zero_field: false,
        }
    }

    /// Largest `|f̂(-k,-ℓ) - conj f̂(k,ℓ)|` over the stored square.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0_f64;
        for j in 0..n {
            let jm = (n - j) % n;
            for i in 0..n {
                let im = (n - i) % n;
                let d = (self.coeffs[jm * n + im] - self.coeffs[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn scale(&mut self, factor: f64) {
        self.coeffs.par_iter_mut().for_each(|c| *c *= factor);
    }
}

/// Physical samples → coefficients, `f̂ = (2π/n²)·Σ f e^{-i(kx+ℓy)}`.
pub fn forward_transform(field: &PhysicalField) -> Result<SpectralField> {
    if let Some((index, &value)) = field.values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    let grid = field.grid;
    let n = grid.n();
    let plans = fft::plans(n);
    let mut data: Vec<Complex64> = field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plans.rows_forward(&mut data);
    fft::transpose_square(&mut data, n);
    plans.rows_forward(&mut data);
    fft::transpose_square(&mut data, n);
    // e^{-ik x_i} = (-1)^k e^{-2πi k i/n}
    let scale = 2.0 * PI / (n * n) as f64;
    apply_checkerboard(&mut data, n, scale);
    Ok(SpectralField { grid, coeffs: data })
}

/// Coefficients → physical samples via `f = (1/2π) Σ f̂ e^{i(kx+ℓy)}`.
pub fn inverse_transform(field: &SpectralField) -> PhysicalField {
    let grid = field.grid;
    let n = grid.n();
    let plans = fft::plans(n);
    let mut data = field.coeffs.clone();
    apply_checkerboard(&mut data, n, 1.0 / (2.0 * PI));
    plans.rows_inverse(&mut data);
    fft::transpose_square(&mut data, n);
    plans.rows_inverse(&mut data);
    fft::transpose_square(&mut data, n);
    let values = data.into_iter().map(|c| c.re).collect();
    PhysicalField { grid, values }
}

/// Multiplies entry `(j, i)` by `scale·(-1)^{i+j}`.
fn apply_checkerboard(data: &mut [Complex64], n: usize, scale: f64) {
    data.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        for (i, c) in row.iter_mut().enumerate() {
            if (i + j) % 2 == 1 {
                *c *= -scale;
            } else {
                *c *= scale;
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sin_x(n: usize) -> PhysicalField {
        PhysicalField::from_fn(TorusGrid::new(n).unwrap(), |x, _| x.sin())
    }

    /// Direct O(n⁴) evaluation of `(1/2π)·h²·Σ e^{-i(kx+ℓy)} f`.
    fn direct_coeff(field: &PhysicalField, k: i64, l: i64) -> Complex64 {
        let g = field.grid();
        let h2 = g.spacing().powi(2);
        let mut acc = Complex64::default();
        for iy in 0..g.n() {
            for ix in 0..g.n() {
                let phase = -(k as f64 * g.node(ix) + l as f64 * g.node(iy));
                acc += Complex64::from_polar(field.at(ix, iy), phase);
            }
        }
        acc * h2 / (2.0 * PI)
    }

    fn random_band_limited(n: usize, band: i64, seed: u64) -> SpectralField {
        let grid = TorusGrid::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::zeros(grid);
        for l in -band..=band {
            for k in -band..=band {
                if (k, l) <= (0, 0) && (-k, -l) != (k, l) {
                    continue;
                }
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let c = if (k, l) == (0, 0) { Complex64::new(c.re, 0.0) } else { c };
                f.set_coeff(k, l, c);
                f.set_coeff(-k, -l, c.conj());
            }
        }
        f
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(TorusGrid::new(2).is_err());
        assert!(TorusGrid::new(7).is_err());
        let g = TorusGrid::new(8).unwrap();
        assert_eq!(g.node(0), -PI);
        assert_eq!(g.wavenumber(4), -4);
        assert_eq!(g.index_of(-4), Some(4));
        assert_eq!(g.index_of(4), None);
    }

    #[test]
    fn sin_x_coefficients_match_direct_sum() {
        let f = sin_x(16);
        let fh = forward_transform(&f).unwrap();
        for (k, l) in [(1, 0), (-1, 0), (0, 0), (2, 1), (-3, 5)] {
            let d = direct_coeff(&f, k, l);
            assert!((fh.coeff(k, l) - d).norm() < 1e-12, "({k},{l})");
        }
        assert!((fh.coeff(1, 0) - Complex64::new(0.0, -PI)).norm() < 1e-12);
        assert!((fh.coeff(-1, 0) - Complex64::new(0.0, PI)).norm() < 1e-12);
    }

    #[test]
    fn sin_x_on_64_has_two_modes() {
        let fh = forward_transform(&sin_x(64)).unwrap();
        let mut others = 0.0_f64;
        for l in -32..32 {
            for k in -32..32 {
                if (k, l) != (1, 0) && (k, l) != (-1, 0) {
                    others = others.max(fh.coeff(k, l).norm());
                }
            }
        }
        assert!(others < 1e-13);
        assert!((fh.energy() - 2.0 * PI * PI).abs() < 1e-12 * 2.0 * PI * PI);
    }

    #[test]
    fn constant_has_mean_mode_only() {
        let g = TorusGrid::new(32).unwrap();
        let fh = forward_transform(&PhysicalField::from_fn(g, |_, _| 1.0)).unwrap();
        assert!((fh.coeff(0, 0).re - 2.0 * PI).abs() < 1e-13);
        assert!((fh.energy() - 4.0 * PI * PI).abs() < 1e-12);
        assert!((fh.mean() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_input_rejected() {
        let g = TorusGrid::new(4).unwrap();
        let mut v = vec![0.0; 16];
        v[5] = f64::NAN;
        assert!(matches!(PhysicalField::new(g, v), Err(Error::NonFinite { index: 5, .. })));
    }

    #[test]
    fn sobolev_norms_of_sin_x() {
        let fh = forward_transform(&sin_x(64)).unwrap();
        let h1 = fh.sobolev_norm(1.0, true).unwrap();
        assert!((h1 - PI * 2f64.sqrt()).abs() < 1e-12);
        let h1i = fh.sobolev_norm(1.0, false).unwrap();
        assert!((h1i - 2.0 * PI).abs() < 1e-12);
        assert!(fh.sobolev_norm(-0.5, true).is_err());

        let shifted = PhysicalField::from_fn(fh.grid(), |x, _| 3.7 + x.sin());
        let sh = forward_transform(&shifted).unwrap();
        for sigma in [0.0, 0.5, 1.0, 1.45, 2.0] {
            let a = fh.sobolev_norm(sigma, true).unwrap();
            let b = sh.sobolev_norm(sigma, true).unwrap();
            assert!((a - b).abs() < 1e-11, "sigma {sigma}");
        }
    }

    #[test]
    fn projection_examples() {
        let g = TorusGrid::new(64).unwrap();
        let f = forward_transform(&sin_x(64)).unwrap();
        assert!(f.project_high(2.0).unwrap().l2_norm() < 1e-13);
        let f3 = forward_transform(&PhysicalField::from_fn(g, |x, _| (3.0 * x).sin())).unwrap();
        let kept = f3.project_high(2.0).unwrap();
        assert!((kept.l2_norm() - f3.l2_norm()).abs() < 1e-13);
        let two = forward_transform(&PhysicalField::from_fn(g, |x, y| x.sin() + (5.0 * y).sin()))
            .unwrap();
        let r = two.project_high(2.0).unwrap().l2_norm() / two.l2_norm();
        assert!((r - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(f.project_high(-1.0).is_err());
    }

    #[test]
    fn tail_fraction_examples() {
        let g = TorusGrid::new(64).unwrap();
        assert!(forward_transform(&sin_x(64)).unwrap().tail_fraction().fraction < 1e-28);

        let mut top = SpectralField::zeros(g);
        top.set_coeff(31, 0, Complex64::new(1.0, 0.5));
        top.set_coeff(-31, 0, Complex64::new(1.0, -0.5));
        assert!((top.tail_fraction().fraction - 1.0).abs() < 1e-15);

        let mixed = forward_transform(&PhysicalField::from_fn(g, |x, _| x.sin() + (30.0 * x).sin()))
            .unwrap();
        assert!((mixed.tail_fraction().fraction - 0.5).abs() < 1e-12);

        let zero = SpectralField::zeros(g).tail_fraction();
        assert!(zero.zero_field);
        assert_eq!(zero.fraction, 0.0);
    }

    #[test]
    fn random_roundtrip_and_plancherel() {
        for (n, band, seed) in [(16, 7, 1u64), (64, 20, 2), (128, 63, 3)] {
            let fh = random_band_limited(n, band, seed);
            assert!(fh.hermitian_defect() < 1e-15);
            let f = inverse_transform(&fh);
            let back = forward_transform(&f).unwrap();
            let err: f64 = fh
                .coeffs()
                .iter()
                .zip(back.coeffs())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err <= 1e-12 * fh.l2_norm(), "n={n} err={err:e}");
            let quad = f.l2_norm();
            assert!((quad - fh.l2_norm()).abs() <= 1e-12 * quad);
        }
    }

    #[test]
    fn projection_is_orthogonal() {
        let fh = random_band_limited(64, 30, 9);
        for cutoff in [0.0, 3.0, 10.5, 40.0] {
            let hi = fh.project_high(cutoff).unwrap();
            assert_eq!(hi.project_high(cutoff).unwrap(), hi);
            let lo_energy = fh.energy() - hi.energy();
            let direct_lo: f64 = fh.weighted_energy(|k, l| {
                if ((k * k + l * l) as f64) <= cutoff * cutoff {
                    1.0
                } else {
                    0.0
                }
            });
            assert!((lo_energy - direct_lo).abs() <= 1e-12 * fh.energy());
            assert!(hi.hermitian_defect() < 1e-15);
        }
    }

    #[test]
    fn interpolation_inequality_on_random_fields() {
        for seed in 0..8 {
            let mut fh = random_band_limited(32, 15, 100 + seed);
            fh.set_coeff(0, 0, Complex64::default());
            let l2 = fh.l2_norm();
            let h1 = fh.sobolev_norm(1.0, true).unwrap();
            for sigma in [1.4, 1.45, 2.0] {
                let hs = fh.sobolev_norm(sigma, true).unwrap();
                let rhs = l2.powf((sigma - 1.0) / sigma) * hs.powf(1.0 / sigma);
                assert!(h1 <= rhs * (1.0 + 1e-10), "sigma {sigma}");
            }
        }
    }

    #[test]
    fn sobolev_monotone_in_order_for_mean_zero() {
        let mut fh = random_band_limited(32, 12, 5);
        fh.set_coeff(0, 0, Complex64::default());
        let mut prev = 0.0;
        for i in 0..=20 {
            let s = fh.sobolev_norm(i as f64 * 0.15, true).unwrap();
            assert!(s >= prev);
            prev = s;
        }
    }
}
