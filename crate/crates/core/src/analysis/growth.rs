use crate::error::{invalid, Error, Result};
use crate::evolution::MapChain;
use crate::spectral::{AnalyticInitialData, TorusGrid};
use crate::velocity::{Axis, ParameterSchedule, TimeProfile};

/// `h_j(t) ∏_{n<j} K_n²` for `t ∈ [0, T_*]`.
pub fn growth_envelope(schedule: &ParameterSchedule, t: f64, profile: TimeProfile) -> Result<f64> {
    if t == schedule.t_star() && schedule.j_max() > 0 {
        let j = schedule.j_max();
        return Ok(schedule.strength_product(j, 2.0));
    }
    let loc = schedule.locate(t)?;
    let k = schedule.strength(loc.j)?;
    let z = profile.zeta(loc.tau)?;
    let h = match loc.axis {
        Axis::Horizontal => (k * z).max(1.0),
        Axis::Vertical => (k * k * z).max(k),
    };
    Ok(h * schedule.strength_product(loc.j - 1, 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRow {
    pub j: usize,
    pub t: f64,
    /// `‖f(T_j)‖_{Ḣ¹}`
    pub measured: f64,
    /// `‖f₀‖_{Ḣ¹} ∏_{n≤j} K_n²`
    pub envelope: f64,
    /// `measured / envelope`
    pub prefactor: f64,
    /// `‖f_j‖_{Ḣ¹} / ‖f_{j-1}‖_{Ḣ¹}`
    pub step_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    /// Smallest prefactor: the measured `c`.
    pub c: f64,
    /// `‖f_j‖_{Ḣ¹}` nondecreasing in `j`.
    pub monotone: bool,
}

/// Compares `‖f(T_j)‖_{Ḣ¹}` for `j = 0, 1, …` against the envelope.
pub fn growth_report(schedule: &ParameterSchedule, h1_at_switch: &[f64]) -> Result<GrowthReport> {
    if h1_at_switch.is_empty() {
        return Err(Error::MissingRecords("growth report needs the initial norm"));
    }
    if h1_at_switch.len() > schedule.j_max() + 1 {
        return Err(Error::Schedule("more norms than schedule steps".into()));
    }
    let h0 = h1_at_switch[0];
    if !(h0 > 0.0) {
        return Err(Error::ZeroField);
    }
    let mut rows = Vec::with_capacity(h1_at_switch.len());
    for (j, &m) in h1_at_switch.iter().enumerate() {
        let envelope = h0 * schedule.strength_product(j, 2.0);
        rows.push(GrowthRow {
            j,
            t: schedule.switch_time(j),
            measured: m,
            envelope,
            prefactor: m / envelope,
            step_ratio: if j == 0 { 1.0 } else { m / h1_at_switch[j - 1] },
        });
    }
    let c = rows.iter().map(|r| r.prefactor).fold(f64::INFINITY, f64::min);
    let monotone = h1_at_switch.windows(2).all(|w| w[1] >= w[0]);
    Ok(GrowthReport { rows, c, monotone })
}

/// Norms of `f ∘ Φ_j^{-n}` over a range of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FbIterates {
    pub j: usize,
    pub powers: Vec<i32>,
    pub h1: Vec<f64>,
    pub l2: f64,
    /// `‖·‖_{Ḣ¹}` ratio between consecutive powers of the same sign, away from 0.
    pub forward_ratios: Vec<f64>,
    pub backward_ratios: Vec<f64>,
    /// Powers whose estimated frequency `‖·‖_{Ḣ¹}/‖·‖_{L²}` exceeds the grid Nyquist.
    pub unresolved: Vec<i32>,
}

/// `‖f ∘ Φ_j^{-n}‖_{Ḣ¹}` for each `n`: positive `n` transports forwards `n` steps,
/// negative `n` backwards. Norms use the chain-rule gradient at grid nodes.
pub fn fb_principle_iterates(
    schedule: &ParameterSchedule,
    j: usize,
    data: &AnalyticInitialData,
    powers: &[i32],
    grid: TorusGrid,
) -> Result<FbIterates> {
    if powers.is_empty() {
        return Err(invalid("n_range", 0.0, "needs at least one power"));
    }
    schedule.step(j)?;
    let l2 = data.l2_norm();
    let mut sorted = powers.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut h1 = Vec::with_capacity(sorted.len());
    let mut unresolved = Vec::new();
    for &p in &sorted {
        let norm = if p == 0 {
            data.sobolev_norm(1.0)
        } else {
            MapChain::step_power(schedule, j, -p)?
                .grad_sq_quadrature(data, grid)
                .sqrt()
        };
        if norm / l2 > grid.nyquist() as f64 {
            unresolved.push(p);
        }
        h1.push(norm);
    }
    let ratio_of = |a: i32, b: i32| -> Option<f64> {
        let ia = sorted.iter().position(|&x| x == a)?;
        let ib = sorted.iter().position(|&x| x == b)?;
        Some(h1[ib] / h1[ia])
    };
    let forward_ratios = sorted
        .iter()
        .filter(|&&p| p > 0)
        .filter_map(|&p| ratio_of(p - 1, p))
        .collect();
    let backward_ratios = sorted
        .iter()
        .filter(|&&p| p < 0)
        .rev()
        .filter_map(|&p| ratio_of(p + 1, p))
        .collect();
    Ok(FbIterates {
        j,
        powers: sorted,
        h1,
        l2,
        forward_ratios,
        backward_ratios,
        unresolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{lagrangian_h1, Stage};
    use crate::velocity::{build_schedule, ScheduleRule};

    fn theorem1(j: usize) -> ParameterSchedule {
        build_schedule(ScheduleRule::Theorem1 { m: 2.0 }, j).unwrap()
    }

    #[test]
    fn envelope_endpoints() {
        let s = theorem1(3);
        for profile in [TimeProfile::flat(), TimeProfile::bump()] {
            for j in 1..=3 {
                let prod = s.strength_product(j - 1, 2.0);
                let k = s.strength(j).unwrap();
                let t0 = s.switch_time(j - 1);
                assert_eq!(growth_envelope(&s, t0, profile).unwrap(), prod);
                let mid = s.midpoint(j).unwrap();
                assert!((growth_envelope(&s, mid, profile).unwrap() - k * prod).abs() < 1e-9 * k * prod);
                let end = s.switch_time(j);
                assert!((growth_envelope(&s, end, profile).unwrap() - k * k * prod).abs() < 1e-9 * k * k * prod);
            }
        }
        assert!(growth_envelope(&s, -1.0, TimeProfile::flat()).is_err());
    }

    #[test]
    fn envelope_monotone_within_intervals() {
        let s = theorem1(3);
        for j in 1..=3 {
            let (a, b) = (s.switch_time(j - 1), s.switch_time(j));
            let mut prev = 0.0;
            for i in 0..=400 {
                let t = a + (b - a) * i as f64 / 400.0;
                let e = growth_envelope(&s, t, TimeProfile::flat()).unwrap();
                assert!(e >= prev);
                prev = e;
            }
        }
    }

    #[test]
    fn report_prefactors() {
        let s = theorem1(2);
        let r = growth_report(&s, &[1.0, 8.0, 8.0 * 300.0]).unwrap();
        assert_eq!(r.rows[0].prefactor, 1.0);
        assert_eq!(r.rows[1].prefactor, 0.5);
        assert!((r.rows[2].step_ratio - 300.0).abs() < 1e-12);
        assert!(r.monotone);
        assert!((r.c - 300.0 / 576.0 * 0.5).abs() < 1e-12);
        assert!(growth_report(&s, &[1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(!growth_report(&s, &[2.0, 1.0]).unwrap().monotone);
    }

    #[test]
    fn iterates_match_transport_and_poincare() {
        let s = theorem1(1);
        let data = AnalyticInitialData::sin_x();
        let g = TorusGrid::new(256).unwrap();
        let it = fb_principle_iterates(&s, 1, &data, &[-2, -1, 0, 1, 2], g).unwrap();
        assert_eq!(it.powers, vec![-2, -1, 0, 1, 2]);
        assert!((it.h1[2] - data.sobolev_norm(1.0)).abs() < 1e-15);
        let f1 = lagrangian_h1(&data, &s, Stage::complete(1), g).unwrap();
        assert!((it.h1[3] - f1).abs() < 1e-8 * f1);
        for h in &it.h1 {
            assert!(*h >= it.l2 - 1e-12);
        }
        assert_eq!(it.forward_ratios.len(), 2);
        assert_eq!(it.backward_ratios.len(), 2);
        assert!(it.forward_ratios.iter().all(|&r| r > 4.0));
        assert!(fb_principle_iterates(&s, 2, &data, &[1], g).is_err());
    }
}
