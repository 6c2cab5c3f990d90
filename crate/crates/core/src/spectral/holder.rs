use rayon::prelude::*;

use super::PhysicalField;
use crate::error::{invalid, Result};

/// Grid estimate of the `C^β` seminorm, split by offset direction.
///
/// The estimate is a lower bound on the continuum seminorm. With `β = 1` it is
/// the Lipschitz (`W^{1,∞}`) estimator, and `x_part`/`y_part` estimate
/// `‖∂_x f‖_{L^∞}` and `‖∂_y f‖_{L^∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate {
    pub beta: f64,
    pub seminorm: f64,
    pub x_part: f64,
    pub y_part: f64,
    pub linf: f64,
}

impl HolderEstimate {
    /// `‖f‖_{L^∞} + [f]_β`.
    pub fn norm(&self) -> f64 {
        self.linf + self.seminorm
    }
}

/// Max of `|f(z+h) - f(z)| / |h|^β` over the dyadic offsets `(2^m Δx, 0)` and
/// `(0, 2^m Δx)` with `2^m ≤ n/2`.
pub fn holder_seminorm(field: &PhysicalField, beta: f64) -> Result<HolderEstimate> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid("beta", beta, "Hölder exponent must lie in (0, 1]"));
    }
    let grid = field.grid();
    let n = grid.n();
    let values = field.values();
    let mut shifts = Vec::new();
    let mut s = 1usize;
    while s <= n / 2 {
        shifts.push(s);
        s *= 2;
    }
    let mut x_part = 0.0_f64;
    let mut y_part = 0.0_f64;
    for &s in &shifts {
        let denom = (s as f64 * grid.spacing()).powf(beta);
        let dx = values
            .par_chunks(n)
            .map(|row| {
                (0..n)
                    .map(|i| (row[(i + s) % n] - row[i]).abs())
                    .fold(0.0_f64, f64::max)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0_f64, f64::max);
        let dy = (0..n)
            .into_par_iter()
            .map(|iy| {
                let up = &values[((iy + s) % n) * n..((iy + s) % n + 1) * n];
                let here = &values[iy * n..(iy + 1) * n];
                up.iter()
                    .zip(here)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0_f64, f64::max)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0_f64, f64::max);
        x_part = x_part.max(dx / denom);
        y_part = y_part.max(dy / denom);
    }
    Ok(HolderEstimate {
        beta,
        seminorm: x_part.max(y_part),
        x_part,
        y_part,
        linf: field.linf_norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use crate::velocity::sawtooth;

    #[test]
    fn lipschitz_of_sin_x() {
        let g = TorusGrid::new(256).unwrap();
        let f = PhysicalField::from_fn(g, |x, _| x.sin());
        let est = holder_seminorm(&f, 1.0).unwrap();
        assert!((est.seminorm - 1.0).abs() < 1e-3);
        assert!(est.seminorm <= 1.0);
        assert_eq!(est.y_part, 0.0);
        assert!((est.linf - 1.0).abs() < 1e-3);
    }

    #[test]
    fn constant_field_has_zero_seminorm() {
        let g = TorusGrid::new(64).unwrap();
        let f = PhysicalField::from_fn(g, |_, _| 2.5);
        for beta in [0.1, 0.5, 1.0] {
            assert_eq!(holder_seminorm(&f, beta).unwrap().seminorm, 0.0);
        }
    }

    #[test]
    fn sawtooth_slope() {
        let g = TorusGrid::new(256).unwrap();
        let f = PhysicalField::from_fn(g, |x, _| sawtooth(2.0 * x));
        let est = holder_seminorm(&f, 1.0).unwrap();
        assert!((est.seminorm - 2.0).abs() < 1e-3, "{}", est.seminorm);
    }

    #[test]
    fn rejects_bad_exponent() {
        let g = TorusGrid::new(8).unwrap();
        let f = PhysicalField::from_fn(g, |x, _| x.sin());
        assert!(holder_seminorm(&f, 0.0).is_err());
        assert!(holder_seminorm(&f, 1.5).is_err());
    }
}
