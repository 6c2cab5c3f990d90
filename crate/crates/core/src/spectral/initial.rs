use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{forward_transform, Complex64, PhysicalField, SpectralField, TorusGrid};
use crate::error::{Error, Result};

/// One Fourier mode `f̂(k, ℓ)` of a closed-form initial condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub k: i64,
    pub l: i64,
    pub coeff: Complex64,
}

/// `a·cos(kx + ℓy) + b·sin(kx + ℓy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub k: i64,
    pub l: i64,
    pub cos: f64,
    pub sin: f64,
}

/// Mean-zero trigonometric polynomial, evaluable anywhere on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticInitialData {
    name: String,
    modes: Vec<Mode>,
}

impl AnalyticInitialData {
    /// Builds from a Hermitian-symmetric mode list. The zero mode is rejected.
    pub fn new(name: impl Into<String>, modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InitialData("no modes".into()));
        }
        for m in &modes {
            if m.k == 0 && m.l == 0 {
                return Err(Error::InitialData(
                    "the (0,0) mode is not allowed: initial data must be mean-free".into(),
                ));
            }
            let partner = modes
                .iter()
                .filter(|p| p.k == -m.k && p.l == -m.l)
                .map(|p| p.coeff)
                .sum::<Complex64>();
            if (partner - m.coeff.conj()).norm() > 1e-14 * (1.0 + m.coeff.norm()) {
                return Err(Error::InitialData(format!(
                    "mode ({}, {}) lacks its conjugate partner",
                    m.k, m.l
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            modes,
        })
    }

    /// Real trigonometric terms; each contributes `f̂(±k,±ℓ) = π(a ∓ ib)`.
    pub fn from_terms(name: impl Into<String>, terms: &[TrigTerm]) -> Result<Self> {
        let mut modes: Vec<Mode> = Vec::new();
        let mut push = |k: i64, l: i64, c: Complex64| {
            if let Some(m) = modes.iter_mut().find(|m| m.k == k && m.l == l) {
                m.coeff += c;
            } else {
                modes.push(Mode { k, l, coeff: c });
            }
        };
        for t in terms {
            push(t.k, t.l, Complex64::new(PI * t.cos, -PI * t.sin));
            push(-t.k, -t.l, Complex64::new(PI * t.cos, PI * t.sin));
        }
        modes.retain(|m| m.coeff.norm() > 0.0);
        Self::new(name, modes)
    }

    /// `f₀ = sin x`.
    pub fn sin_x() -> Self {
        Self::from_terms(
            "sin_x",
            &[TrigTerm {
                k: 1,
                l: 0,
                cos: 0.0,
                sin: 1.0,
            }],
        )
        .expect("sin x is valid")
    }

    /// `f₀ = sin x + sin(4y)/2`.
    pub fn sin_x_sin_4y() -> Self {
        Self::from_terms(
            "sin_x_sin_4y",
            &[
                TrigTerm {
                    k: 1,
                    l: 0,
                    cos: 0.0,
                    sin: 1.0,
                },
                TrigTerm {
                    k: 0,
                    l: 4,
                    cos: 0.0,
                    sin: 0.5,
                },
            ],
        )
        .expect("valid")
    }

    /// Six unit-amplitude modes with `|k|, |ℓ| ≤ 3` and random phases.
    pub fn random_phase(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked: Vec<(i64, i64)> = Vec::new();
        while picked.len() < 6 {
            let k: i64 = rng.gen_range(-3..=3);
            let l: i64 = rng.gen_range(-3..=3);
            // one representative per ± pair
            let canonical = if (k, l) < (0, 0) { (-k, -l) } else { (k, l) };
            if canonical == (0, 0) || picked.contains(&canonical) {
                continue;
            }
            picked.push(canonical);
        }
        let terms: Vec<TrigTerm> = picked
            .into_iter()
            .map(|(k, l)| {
                let phase: f64 = rng.gen_range(0.0..2.0 * PI);
                TrigTerm {
                    k,
                    l,
                    cos: phase.cos(),
                    sin: phase.sin(),
                }
            })
            .collect();
        Self::from_terms(format!("random6_seed{seed}"), &terms).expect("valid")
    }

    /// Named palette entry: `sin_x`, `sin_x_sin_4y`, `random6`.
    pub fn by_name(name: &str, seed: u64) -> Result<Self> {
        match name {
            "sin_x" => Ok(Self::sin_x()),
            "sin_x_sin_4y" => Ok(Self::sin_x_sin_4y()),
            "random6" => Ok(Self::random_phase(seed)),
            other => Err(Error::InitialData(format!("unknown initial data `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// `max(|k|, |ℓ|)` over the modes.
    pub fn max_frequency(&self) -> u64 {
        self.modes
            .iter()
            .map(|m| m.k.unsigned_abs().max(m.l.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let s: f64 = self
            .modes
            .iter()
            .map(|m| (m.coeff * Complex64::cis(m.k as f64 * x + m.l as f64 * y)).re)
            .sum();
        s / (2.0 * PI)
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let mut g = [0.0; 2];
        for m in &self.modes {
            // ∂ e^{iθ} = i(k, ℓ) e^{iθ}
            let v = (m.coeff * Complex64::cis(m.k as f64 * x + m.l as f64 * y) * Complex64::i()).re;
            g[0] += m.k as f64 * v;
            g[1] += m.l as f64 * v;
        }
        [g[0] / (2.0 * PI), g[1] / (2.0 * PI)]
    }

    pub fn sample(&self, grid: TorusGrid) -> PhysicalField {
        PhysicalField::from_fn(grid, |x, y| self.eval(x, y))
    }

    pub fn spectral(&self, grid: TorusGrid) -> Result<SpectralField> {
        forward_transform(&self.sample(grid))
    }

    /// `Σ|f̂|²`.
    pub fn l2_norm(&self) -> f64 {
        self.modes.iter().map(|m| m.coeff.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Σ (k²+ℓ²)^σ |f̂|²`, square-rooted.
    pub fn sobolev_norm(&self, sigma: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| ((m.k * m.k + m.l * m.l) as f64).powf(sigma) * m.coeff.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mean_mode_and_broken_symmetry() {
        let bad = vec![Mode {
            k: 0,
            l: 0,
            coeff: Complex64::new(1.0, 0.0),
        }];
        assert!(AnalyticInitialData::new("c", bad).is_err());
        let lonely = vec![Mode {
            k: 1,
            l: 0,
            coeff: Complex64::new(0.0, -PI),
        }];
        assert!(AnalyticInitialData::new("half", lonely).is_err());
    }

    #[test]
    fn sin_x_modes_and_norms() {
        let f = AnalyticInitialData::sin_x();
        assert_eq!(f.modes().len(), 2);
        assert!((f.eval(0.3, 1.1) - 0.3f64.sin()).abs() < 1e-15);
        assert!((f.l2_norm() - PI * 2f64.sqrt()).abs() < 1e-14);
        let g = f.gradient(0.3, -2.0);
        assert!((g[0] - 0.3f64.cos()).abs() < 1e-15 && g[1].abs() < 1e-15);
    }

    #[test]
    fn evaluation_matches_sampled_field() {
        let grid = TorusGrid::new(32).unwrap();
        for f in [
            AnalyticInitialData::sin_x(),
            AnalyticInitialData::sin_x_sin_4y(),
            AnalyticInitialData::random_phase(7),
        ] {
            let fh = f.spectral(grid).unwrap();
            assert!(fh.mean().abs() < 1e-14);
            for m in f.modes() {
                assert!((fh.coeff(m.k, m.l) - m.coeff).norm() < 1e-12);
            }
            let back = super::super::inverse_transform(&fh);
            for iy in 0..32 {
                for ix in 0..32 {
                    let v = f.eval(grid.node(ix), grid.node(iy));
                    assert!((back.at(ix, iy) - v).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn random_palette_is_deterministic_and_mean_free() {
        let a = AnalyticInitialData::random_phase(3);
        let b = AnalyticInitialData::random_phase(3);
        assert_eq!(a, b);
        assert_eq!(a.modes().len(), 12);
        assert!(a.max_frequency() <= 3);
    }
}
