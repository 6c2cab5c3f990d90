use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::spectral::fft::{self, plans};
use crate::spectral::{Complex64, SpectralField, TorusGrid};
use crate::velocity::{sawtooth, Axis, ShearStep};

/// Unit-modulus phase for wavenumber `k` and shift `d`.
///
/// Conjugate pairs get conjugate phases so a real field stays real. The Nyquist line has
/// no partner on the grid and receives the real part `cos(k d)` instead.
#[inline]
fn shift_phase(k: i64, d: f64, nyquist: i64) -> Complex64 {
    if k == -nyquist {
        return Complex64::new((nyquist as f64 * d).cos(), 0.0);
    }
    let (s, c) = (k.unsigned_abs() as f64 * d).sin_cos();
    if k >= 0 {
        Complex64::new(c, -s)
    } else {
        Complex64::new(c, s)
    }
}

/// Shifts the field along `axis` by `d(s) = amplitude · S(frequency · s)`, `s` the
/// transverse coordinate: the pullback `f(x - d(y), y)` or `f(x, y - d(x))` evaluated at
/// every grid line.
pub fn apply_shear(
    field: &mut SpectralField,
    axis: Axis,
    amplitude: f64,
    frequency: u64,
) -> Result<()> {
    let grid = field.grid();
    let n = grid.n();
    if frequency as usize > n / 2 {
        return Err(Error::Unresolvable { frequency, n });
    }
    if !amplitude.is_finite() {
        return Err(invalid("amplitude", amplitude, "shear displacement must be finite"));
    }
    if amplitude == 0.0 {
        return Ok(());
    }
    let nf = frequency as f64;
    let shifts: Vec<f64> = (0..n).map(|m| amplitude * sawtooth(nf * grid.node(m))).collect();
    let nyq = grid.nyquist() as i64;
    let inv_n = 1.0 / n as f64;
    let half = n / 2;
    let data = field.coeffs_mut();
    // Rows must be indexed by the shifted wavenumber and run over the transverse one.
    let transposed = axis == Axis::Horizontal;
    if transposed {
        fft::transpose_square(data, n);
    }
    // The (-1)^q factors relating nodes on [-π, π) to DFT indices amount to a circular
    // shift by n/2 of the line-physical samples, undone again by the forward pass.
    plans(n).rows_roundtrip(data, |r, row| {
        let k = grid.wavenumber(r);
        for (p, v) in row.iter_mut().enumerate() {
            let m = (p + half) % n;
            *v *= shift_phase(k, shifts[m], nyq) * inv_n;
        }
    });
    if transposed {
        fft::transpose_square(data, n);
    }
    Ok(())
}

/// Applies `fraction` of a full shear half-interval.
pub fn shear_phase_step(field: &SpectralField, step: &ShearStep, fraction: f64) -> Result<SpectralField> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid("fraction", fraction, "must lie in (0, 1]"));
    }
    let mut out = field.clone();
    apply_shear(&mut out, step.axis, fraction * step.displacement(), step.frequency)?;
    Ok(out)
}

/// Separable table `e^{-κ k² τ}` over FFT index order.
fn heat_table(grid: TorusGrid, kt: f64) -> Vec<f64> {
    (0..grid.n())
        .map(|i| {
            let k = grid.wavenumber(i) as f64;
            (-kt * k * k).exp()
        })
        .collect()
}

/// In-place heat semigroup `f̂(k, ℓ) ↦ e^{-κ(k²+ℓ²)τ} f̂(k, ℓ)`.
pub fn apply_heat(field: &mut SpectralField, kappa: f64, tau: f64) -> Result<()> {
    let kt = kappa * tau;
    if !(kappa >= 0.0 && tau >= 0.0) || !kt.is_finite() {
        return Err(invalid("kappa*tau", kt, "heat time must be finite and nonnegative"));
    }
    if kt == 0.0 {
        return Ok(());
    }
    let grid = field.grid();
    let n = grid.n();
    let table = heat_table(grid, kt);
    field
        .coeffs_mut()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(li, row)| {
            let gl = table[li];
            for (c, gk) in row.iter_mut().zip(&table) {
                *c *= gl * gk;
            }
        });
    Ok(())
}

/// Exact heat flow over time `τ`.
pub fn heat_multiplier_step(field: &SpectralField, kappa: f64, tau: f64) -> Result<SpectralField> {
    let mut out = field.clone();
    apply_heat(&mut out, kappa, tau)?;
    Ok(out)
}

/// Energy removed by [`apply_heat`]: `Σ |f̂|² (1 - e^{-2κ|k|²τ})`.
pub fn heat_dissipation(field: &SpectralField, kappa: f64, tau: f64) -> f64 {
    let kt = 2.0 * kappa * tau;
    field.weighted_energy(|k, l| -((-kt * (k * k + l * l) as f64).exp_m1()))
}
