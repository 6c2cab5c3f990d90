//! Constant-coefficient forwards–backwards matrices.
//!
//! On each cell where every sawtooth slope is constant, `|A_k ∇g|² + |B_ℓ ∇g|² = |Q ∇g|²`
//! with `Q` the 4×2 matrix stacking `A` on `B`. The slopes enter as signs `a₁..a₄`.

use crate::error::Result;
use crate::velocity::ParameterSchedule;

/// Which pair of step maps is combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbMode {
    /// `Φ_j` forwards and backwards.
    SamePair(usize),
    /// `Φ_j` forwards against `Φ_{j+1}` backwards.
    CrossPair(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignPattern {
    pub signs: [i8; 4],
    pub q: [[f64; 2]; 4],
    /// `QᵀQ`
    pub gram: [[f64; 2]; 2],
    /// Ascending eigenvalues of [`Self::gram`].
    pub eigenvalues: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbReport {
    pub mode: FbMode,
    /// Strength of the first map.
    pub k: f64,
    /// Strength of the second map (equal to `k` for a same pair).
    pub k_next: f64,
    pub patterns: Vec<SignPattern>,
    pub lambda_min: f64,
    /// `(K⁴ - λ_min)/K³`: the smallest `C` with `λ_min ≥ K⁴ - C K³`.
    pub fitted_c: f64,
    /// `λ_min / (K⁴/2)`.
    pub half_quartic_ratio: f64,
}

impl FbReport {
    pub fn meets_same_pair(&self, c: f64) -> bool {
        self.lambda_min >= self.k.powi(4) - c * self.k.powi(3)
    }

    pub fn meets_cross_pair(&self) -> bool {
        self.lambda_min >= 0.5 * self.k.powi(4)
    }
}

/// `Q` for strengths `(k, k')` and slope signs `a`.
pub fn q_matrix(k: f64, k_next: f64, a: [f64; 4]) -> [[f64; 2]; 4] {
    let [a1, a2, a3, a4] = a;
    [
        [1.0, k * a1],
        [k * a2, 1.0 + k * k * a1 * a2],
        [1.0 + k_next * k_next * a3 * a4, -k_next * a4],
        [-k_next * a3, 1.0],
    ]
}

pub fn gram(q: &[[f64; 2]; 4]) -> [[f64; 2]; 2] {
    let mut g = [[0.0; 2]; 2];
    for row in q {
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] += row[i] * row[j];
            }
        }
    }
    g
}

/// Ascending eigenvalues of a symmetric 2×2 matrix.
pub fn symmetric_eigenvalues(m: &[[f64; 2]; 2]) -> [f64; 2] {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let r = half_diff.hypot(m[0][1]);
    let hi = mean + r;
    // product form keeps the small eigenvalue accurate when hi ≫ lo
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let lo = if hi != 0.0 { det / hi } else { mean - r };
    [lo, hi]
}

/// Enumerates all 16 sign patterns for the requested pair.
pub fn fb_scan(schedule: &ParameterSchedule, mode: FbMode) -> Result<FbReport> {
    let (k, k_next) = match mode {
        FbMode::SamePair(j) => {
            let k = schedule.strength(j)?;
            (k, k)
        }
        FbMode::CrossPair(j) => (schedule.strength(j)?, schedule.strength(j + 1)?),
    };
    Ok(scan_strengths(mode, k, k_next))
}

pub(crate) fn scan_strengths(mode: FbMode, k: f64, k_next: f64) -> FbReport {
    let mut patterns = Vec::with_capacity(16);
    for bits in 0..16u8 {
        let signs: [i8; 4] = std::array::from_fn(|i| if bits >> i & 1 == 0 { 1 } else { -1 });
        let a = signs.map(f64::from);
        let q = q_matrix(k, k_next, a);
        let g = gram(&q);
        patterns.push(SignPattern {
            signs,
            q,
            gram: g,
            eigenvalues: symmetric_eigenvalues(&g),
        });
    }
    let lambda_min = patterns
        .iter()
        .map(|p| p.eigenvalues[0])
        .fold(f64::INFINITY, f64::min);
    FbReport {
        mode,
        k,
        k_next,
        patterns,
        lambda_min,
        fitted_c: (k.powi(4) - lambda_min) / k.powi(3),
        half_quartic_ratio: lambda_min / (0.5 * k.powi(4)),
    }
}

/// Largest fitted same-pair constant over `js`.
pub fn fit_same_pair_constant(schedule: &ParameterSchedule, js: &[usize]) -> Result<f64> {
    let mut c = f64::NEG_INFINITY;
    for &j in js {
        c = c.max(fb_scan(schedule, FbMode::SamePair(j))?.fitted_c);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::velocity::{build_schedule, ScheduleRule};

    fn pattern(r: &FbReport, signs: [i8; 4]) -> &SignPattern {
        r.patterns.iter().find(|p| p.signs == signs).unwrap()
    }

    #[test]
    fn anchors_for_k4() {
        let r = scan_strengths(FbMode::SamePair(1), 4.0, 4.0);
        assert_eq!(r.patterns.len(), 16);
        let plus = pattern(&r, [1, 1, 1, 1]);
        assert_eq!(plus.gram, [[322.0, 0.0], [0.0, 322.0]]);
        assert!((plus.eigenvalues[0] - 322.0).abs() < 1e-9);
        let mixed = pattern(&r, [1, -1, 1, 1]);
        assert_eq!(mixed.gram, [[322.0, -8.0], [-8.0, 258.0]]);
        let want = (580.0 - 4352f64.sqrt()) / 2.0;
        assert!((mixed.eigenvalues[0] - want).abs() < 1e-9);
        assert!((mixed.eigenvalues[0] - 257.02).abs() < 5e-3);
        // brute force: the minimum sits at (-,+,+,-) and equals K⁴ - 2K³ + 2
        assert!((r.lambda_min - 130.0).abs() < 1e-9);
        assert_eq!(pattern(&r, [-1, 1, 1, -1]).eigenvalues[0], r.lambda_min);
    }

    #[test]
    fn eigenvalues_match_trace_and_determinant() {
        let r = scan_strengths(FbMode::CrossPair(2), 24.0, 64.0);
        for p in &r.patterns {
            let g = p.gram;
            assert_eq!(g[0][1], g[1][0]);
            let [lo, hi] = p.eigenvalues;
            assert!(lo >= 0.0 && lo <= hi);
            let tr = g[0][0] + g[1][1];
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            assert!((lo + hi - tr).abs() < 1e-9 * tr);
            assert!((lo * hi - det).abs() < 1e-9 * det.abs().max(1.0));
        }
    }

    #[test]
    fn theorem1_pairs() {
        let s = build_schedule(ScheduleRule::Theorem1 { m: 2.0 }, 7).unwrap();
        for j in 1..=6 {
            let same = fb_scan(&s, FbMode::SamePair(j)).unwrap();
            assert!(same.meets_same_pair(6.0), "j = {j}: C = {}", same.fitted_c);
            let cross = fb_scan(&s, FbMode::CrossPair(j)).unwrap();
            assert!(cross.meets_cross_pair(), "j = {j}: {}", cross.half_quartic_ratio);
        }
        let c = fit_same_pair_constant(&s, &[1, 2, 3, 4, 5, 6]).unwrap();
        assert!(c > 0.0 && c <= 6.0);
        assert!(fb_scan(&s, FbMode::CrossPair(7)).is_err());
    }
}
