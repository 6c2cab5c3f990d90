//! Regression constants measured once on the reference configurations and frozen.
//!
//! Reference run: `f₀ = sin x`, Theorem1 schedule with `M = 2`, pure transport on
//! `n = 2048` unless stated otherwise.

/// Relative drift allowed against a frozen measurement.
pub const DRIFT: f64 = 1e-2;

/// Upper bound on the balanced-growth ratio at every `T_j`.
pub const BALANCED_BOUND: f64 = 10.0;

/// `max_{j<=2}` balanced ratio with `σ = 1.45` (T₀: 1, T₁: 1.33375, T₂: 1.07840).
pub const BALANCED_C: f64 = 1.333_749_791_1;

/// Lower bound on the spectrum bump ratio with `c = 0.1` at `T_1` and `T_2`.
pub const BUMP_MIN: f64 = 0.1;

/// Sampled velocity modulus constant, Theorem1 `M = 2`, `j <= 6`, 10⁶ pairs per shear,
/// seed 0 (attained at `j = 6`).
pub const MODULUS_C: f64 = 23.700_724_152_6;

/// Theorem2 with `(α, β, ε) = (0.5, 0.2, 0.05)`, `M = 2`, `j <= 2`: largest `C^β` ratio.
pub const THEOREM2_HOLDER_C: f64 = 1.0;

/// Same configuration: fitted Lipschitz constant `C₁`.
pub const THEOREM2_C1: f64 = 0.692_582_403_6;

/// Same-pair forwards–backwards constant: `λ_min >= K⁴ - 6K³`.
pub const FB_SAME_PAIR_C: f64 = 6.0;

pub fn within_drift(measured: f64, frozen: f64) -> bool {
    (measured - frozen).abs() <= DRIFT * frozen.abs()
}
