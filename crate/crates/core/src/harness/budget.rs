use crate::error::{Error, Result};
use crate::velocity::ParameterSchedule;

/// Grid size suggested by frequency growth through the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionBudget {
    pub n: usize,
    /// Frequency estimates `F_0, …, F_{j_max}`.
    pub frequencies: Vec<f64>,
    /// Largest `j` with `4 F_j <= n`.
    pub resolved_jmax: usize,
    /// The requested `j_max` needed more than the cap.
    pub capped: bool,
}

impl ResolutionBudget {
    pub fn annotation(&self) -> Option<String> {
        self.capped
            .then(|| format!("unresolved beyond j* = {}", self.resolved_jmax))
    }
}

/// `F_j = (F_{j-1} + N_j)(1 + K_j)` from `F_0 = f0_max_frequency`; `n` is the smallest
/// power of two with `n >= 4 F_{j_max}`, capped at `cap`.
pub fn resolution_budget(
    schedule: &ParameterSchedule,
    j_max: usize,
    f0_max_frequency: u64,
    cap: usize,
) -> Result<ResolutionBudget> {
    if j_max > schedule.j_max() {
        return Err(Error::Schedule(format!(
            "budget requested to j = {j_max} but schedule ends at {}",
            schedule.j_max()
        )));
    }
    let mut frequencies = vec![f0_max_frequency as f64];
    for j in 1..=j_max {
        let s = schedule.step(j)?;
        let prev = frequencies[j - 1];
        frequencies.push((prev + s.frequency as f64) * (1.0 + s.strength));
    }
    let needed = |f: f64| -> f64 { (4.0 * f).max(4.0) };
    let fits = |f: f64| needed(f) <= cap as f64;
    let resolved_jmax = frequencies.iter().take_while(|&&f| fits(f)).count().saturating_sub(1);
    let target = needed(frequencies[j_max]);
    let (n, capped) = if target <= cap as f64 {
        ((target.ceil() as usize).next_power_of_two(), false)
    } else {
        (cap, true)
    };
    Ok(ResolutionBudget {
        n,
        frequencies,
        resolved_jmax: if capped { resolved_jmax } else { j_max },
        capped,
    })
}
