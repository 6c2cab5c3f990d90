//! Alternating sawtooth shear flows and their parameter schedules.
//!
//! On the `j`-th interval `[T_{j-1}, T_j)` the velocity is first the horizontal shear
//! `ψ(τ)·(α_j S(N_j y), 0)` for a time `t_j`, then the vertical shear
//! `ψ(τ)·(0, α_j S(N_j x))` for another `t_j`, where `S(x) = |x|` on `[-π, π)`.

use std::f64::consts::{LN_2, PI};
use std::io::Write;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Reduces `x` to `[-π, π)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = (x + PI).rem_euclid(two_pi);
    if r >= two_pi {
        r -= two_pi;
    }
    r - PI
}

/// 2π-periodic sawtooth `S(x) = |x|` on `[-π, π)`.
#[inline]
pub fn sawtooth(x: f64) -> f64 {
    wrap(x).abs()
}

/// Right derivative of [`sawtooth`]: `+1` on `[0, π)`, `-1` on `[-π, 0)`.
#[inline]
pub fn sawtooth_slope(x: f64) -> f64 {
    if wrap(x) >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Modulus of continuity `ω(s) = s(1 + |log s|⁴)`.
#[inline]
pub fn log_modulus(s: f64) -> f64 {
    s * (1.0 + s.ln().abs().powi(4))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// `(α S(N y), 0)`: rows slide along `x`.
    Horizontal,
    /// `(0, α S(N x))`: columns slide along `y`.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProfileKind {
    /// `ψ ≡ 1`.
    #[default]
    Flat,
    /// Normalized `exp(-1/(τ(1-τ)))` bump.
    Bump,
}

impl std::str::FromStr for ProfileKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "flat" => Ok(Self::Flat),
            "bump" => Ok(Self::Bump),
            other => Err(format!("unknown profile `{other}` (expected flat|bump)")),
        }
    }
}

/// Time profile `ψ` on `[0, 1]` with unit integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TimeProfile {
    pub kind: ProfileKind,
}

fn bump_raw(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp()
    }
}

fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 48)
}

fn bump_normalizer() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| 2.0 * adaptive_simpson(bump_raw, 0.0, 0.5, 1e-18))
}

impl TimeProfile {
    pub fn new(kind: ProfileKind) -> Self {
        Self { kind }
    }

    pub fn flat() -> Self {
        Self::new(ProfileKind::Flat)
    }

    pub fn bump() -> Self {
        Self::new(ProfileKind::Bump)
    }

    /// `ψ(τ)`; zero outside `[0, 1]` for the bump.
    pub fn psi(&self, tau: f64) -> f64 {
        match self.kind {
            ProfileKind::Flat => {
                if (0.0..=1.0).contains(&tau) {
                    1.0
                } else {
                    0.0
                }
            }
            ProfileKind::Bump => bump_raw(tau) / bump_normalizer(),
        }
    }

    /// `sup ψ`.
    pub fn peak(&self) -> f64 {
        match self.kind {
            ProfileKind::Flat => 1.0,
            ProfileKind::Bump => self.psi(0.5),
        }
    }

    /// `ζ(τ) = ∫₀^τ ψ`, nondecreasing from `ζ(0) = 0` to `ζ(1) = 1`.
    pub fn zeta(&self, tau: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(invalid("tau", tau, "profile argument must lie in [0, 1]"));
        }
        Ok(match self.kind {
            ProfileKind::Flat => tau,
            ProfileKind::Bump => {
                if tau == 1.0 {
                    1.0
                } else if tau <= 0.5 {
                    adaptive_simpson(bump_raw, 0.0, tau, 1e-18) / bump_normalizer()
                } else {
                    // ψ is symmetric about 1/2
                    1.0 - adaptive_simpson(bump_raw, 0.0, 1.0 - tau, 1e-18) / bump_normalizer()
                }
            }
        })
    }
}

/// One half-interval of the velocity field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearStep {
    pub j: usize,
    pub axis: Axis,
    /// `α_j`
    pub amplitude: f64,
    /// `N_j`
    pub frequency: u64,
    /// `t_j`
    pub duration: f64,
    /// `K_j = α_j N_j t_j`
    pub strength: f64,
    pub profile: TimeProfile,
}

impl ShearStep {
    /// Full-step displacement amplitude `α_j t_j = K_j / N_j`.
    #[inline]
    pub fn displacement(&self) -> f64 {
        self.strength / self.frequency as f64
    }

    /// Velocity of the bare shear (`ψ` omitted) at `(x, y)`.
    pub fn velocity(&self, x: f64, y: f64) -> (f64, f64) {
        let nf = self.frequency as f64;
        match self.axis {
            Axis::Horizontal => (self.amplitude * sawtooth(nf * y), 0.0),
            Axis::Vertical => (0.0, self.amplitude * sawtooth(nf * x)),
        }
    }
}

/// Parameter rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleRule {
    /// `N_j = 2^j`, `α_j = 2^{-j}(1 + |log N_j|⁴)`, `K_j = 2⌈M j^{5/2}⌉`.
    Theorem1 { m: f64 },
    /// `N_j = j^{4j}`, `α_j = N_j^{-α}`, `K_j = M j^{2/(1-3ε)}`.
    Theorem2 { m: f64, alpha: f64, epsilon: f64 },
}

/// `(N_j, α_j, t_j, K_j)` for one `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleStep {
    pub j: usize,
    pub frequency: u64,
    pub amplitude: f64,
    pub duration: f64,
    pub strength: f64,
}

/// Where a time falls inside the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub j: usize,
    pub axis: Axis,
    /// Start of the half-interval.
    pub start: f64,
    /// Normalized position `(t - start)/t_j ∈ [0, 1)`.
    pub tau: f64,
}

/// Truncated schedule `j = 1..=j_max` with switch times `T_0 = 0 < T_1 < …`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSchedule {
    rule: Option<ScheduleRule>,
    steps: Vec<ScheduleStep>,
    switch_times: Vec<f64>,
}

impl ParameterSchedule {
    /// Schedule with no shears (`u ≡ 0`, `T_* = 0`).
    pub fn empty() -> Self {
        Self {
            rule: None,
            steps: Vec::new(),
            switch_times: vec![0.0],
        }
    }

    /// Builds a schedule from explicit steps, checking `N_j ≥ 1`, `α_j, t_j > 0`.
    pub fn from_steps(steps: Vec<ScheduleStep>) -> Result<Self> {
        let mut switch_times = vec![0.0];
        let mut acc = 0.0;
        for (i, s) in steps.iter().enumerate() {
            if s.j != i + 1 {
                return Err(Error::Schedule(format!("step {} labelled j = {}", i + 1, s.j)));
            }
            if s.frequency == 0 || !(s.amplitude > 0.0) || !(s.duration > 0.0) {
                return Err(Error::Schedule(format!("degenerate step j = {}", s.j)));
            }
            acc += 2.0 * s.duration;
            switch_times.push(acc);
        }
        Ok(Self {
            rule: None,
            steps,
            switch_times,
        })
    }

    pub fn rule(&self) -> Option<ScheduleRule> {
        self.rule
    }

    pub fn steps(&self) -> &[ScheduleStep] {
        &self.steps
    }

    pub fn j_max(&self) -> usize {
        self.steps.len()
    }

    /// Parameters for `j ∈ 1..=j_max`.
    pub fn step(&self, j: usize) -> Result<&ScheduleStep> {
        if j == 0 || j > self.steps.len() {
            return Err(Error::Schedule(format!(
                "j = {j} outside 1..={}",
                self.steps.len()
            )));
        }
        Ok(&self.steps[j - 1])
    }

    /// `K_j`.
    pub fn strength(&self, j: usize) -> Result<f64> {
        Ok(self.step(j)?.strength)
    }

    /// `T_j` for `j ∈ 0..=j_max`.
    pub fn switch_time(&self, j: usize) -> f64 {
        self.switch_times[j]
    }

    pub fn switch_times(&self) -> &[f64] {
        &self.switch_times
    }

    /// `T_{j-1} + t_j`.
    pub fn midpoint(&self, j: usize) -> Result<f64> {
        Ok(self.switch_times[j - 1] + self.step(j)?.duration)
    }

    /// `T_* = 2 Σ_{j ≤ j_max} t_j`.
    pub fn t_star(&self) -> f64 {
        *self.switch_times.last().expect("T_0 always present")
    }

    /// `∏_{n=1}^{j} K_n^p` (empty product = 1).
    pub fn strength_product(&self, j: usize, power: f64) -> f64 {
        self.steps[..j.min(self.steps.len())]
            .iter()
            .map(|s| s.strength.powf(power))
            .product()
    }

    pub fn shear(&self, j: usize, axis: Axis, profile: TimeProfile) -> Result<ShearStep> {
        let s = self.step(j)?;
        Ok(ShearStep {
            j,
            axis,
            amplitude: s.amplitude,
            frequency: s.frequency,
            duration: s.duration,
            strength: s.strength,
            profile,
        })
    }

    /// Half-interval containing `t ∈ [0, T_*)`.
    pub fn locate(&self, t: f64) -> Result<Location> {
        let t_star = self.t_star();
        if !(t >= 0.0 && t < t_star) {
            return Err(Error::OutsideHorizon { t, t_star });
        }
        // first j with T_j > t
        let j = self.switch_times.partition_point(|&s| s <= t);
        let s = &self.steps[j - 1];
        let start = self.switch_times[j - 1];
        let mid = start + s.duration;
        let (axis, start) = if t < mid {
            (Axis::Horizontal, start)
        } else {
            (Axis::Vertical, mid)
        };
        let tau = ((t - start) / s.duration).clamp(0.0, 1.0);
        Ok(Location { j, axis, start, tau })
    }

    /// CSV with columns `j, N_j, alpha_j, t_j, K_j, T_j`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["j", "N_j", "alpha_j", "t_j", "K_j", "T_j"])?;
        for s in &self.steps {
            w.write_record([
                s.j.to_string(),
                s.frequency.to_string(),
                s.amplitude.to_string(),
                s.duration.to_string(),
                s.strength.to_string(),
                self.switch_times[s.j].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates the schedule parameters for `j = 1..=j_max`.
pub fn build_schedule(rule: ScheduleRule, j_max: usize) -> Result<ParameterSchedule> {
    if j_max < 1 {
        return Err(invalid("j_max", j_max as f64, "need at least one step"));
    }
    let mut steps = Vec::with_capacity(j_max);
    match rule {
        ScheduleRule::Theorem1 { m } => {
            if !(m >= 2.0) {
                return Err(invalid("M", m, "M must be >= 2"));
            }
            for j in 1..=j_max {
                let frequency = 1u64
                    .checked_shl(j as u32)
                    .filter(|_| j < 63)
                    .ok_or_else(|| Error::Schedule(format!("N_j = 2^{j} overflows")))?;
                let jf = j as f64;
                let log_n = (frequency as f64).ln();
                let amplitude = (1.0 + log_n.powi(4)) / frequency as f64;
                // j^{5/2} = j²·√j keeps perfect squares exact
                let strength = 2.0 * (m * jf * jf * jf.sqrt()).ceil();
                let duration = strength / (amplitude * frequency as f64);
                steps.push(ScheduleStep {
                    j,
                    frequency,
                    amplitude,
                    duration,
                    strength,
                });
            }
        }
        ScheduleRule::Theorem2 { m, alpha, epsilon } => {
            if !(m >= 2.0) {
                return Err(invalid("M", m, "M must be >= 2"));
            }
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(invalid("alpha", alpha, "must lie in (0, 1)"));
            }
            if !(epsilon > 0.0 && epsilon < 1.0 / 6.0) {
                return Err(invalid("epsilon", epsilon, "must lie in (0, 1/6)"));
            }
            let expo = 2.0 / (1.0 - 3.0 * epsilon);
            for j in 1..=j_max {
                let frequency = (j as u64)
                    .checked_pow(4 * j as u32)
                    .ok_or_else(|| Error::Schedule(format!("N_j = {j}^{} overflows u64", 4 * j)))?;
                let jf = j as f64;
                let amplitude = (frequency as f64).powf(-alpha);
                let strength = m * jf.powf(expo);
                let duration = m * jf.powf(expo) * jf.powf(-4.0 * (1.0 - alpha) * jf);
                steps.push(ScheduleStep {
                    j,
                    frequency,
                    amplitude,
                    duration,
                    strength,
                });
            }
        }
    }
    let mut sched = ParameterSchedule::from_steps(steps)?;
    sched.rule = Some(rule);
    Ok(sched)
}

/// `u(t, x, y)` including the time profile.
pub fn velocity_at(
    schedule: &ParameterSchedule,
    profile: TimeProfile,
    t: f64,
    point: (f64, f64),
) -> Result<(f64, f64)> {
    let loc = schedule.locate(t)?;
    let shear = schedule.shear(loc.j, loc.axis, profile)?;
    let (u1, u2) = shear.velocity(point.0, point.1);
    let psi = profile.psi(loc.tau);
    Ok((psi * u1, psi * u2))
}

/// Per-step sampled modulus ratio `sup |u(z) - u(z')| / ω(|z - z'|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepModulus {
    pub j: usize,
    pub horizontal: f64,
    pub vertical: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    /// `α_j N_j^α / t_j^m` per `j`.
    pub time_ratios: Vec<f64>,
    /// `sup_j` of [`Self::time_ratios`] and the maximizing `j`.
    pub time_sup: f64,
    pub time_argmax: usize,
    /// `α_j N_j / (1 + |log N_j|⁴)` per `j`.
    pub log_ratios: Vec<f64>,
    pub log_sup: f64,
    pub modulus: Vec<StepModulus>,
}

impl RegularityReport {
    pub fn modulus_sup(&self) -> f64 {
        self.modulus
            .iter()
            .fold(0.0_f64, |m, s| m.max(s.horizontal).max(s.vertical))
    }
}

/// Sampled increment ratio of one bare shear over `samples` pairs.
///
/// Pairs are `z` uniform on the torus and `z' = z + h` with `|h|` log-uniform on
/// `[1e-6, π]`, so every scale between the grid and the period is probed.
pub fn sample_modulus(step: &ShearStep, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let (lo, hi) = (1e-6f64.ln(), PI.ln());
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let x = rng.gen_range(-PI..PI);
        let y = rng.gen_range(-PI..PI);
        let r = rng.gen_range(lo..hi).exp();
        let theta = rng.gen_range(0.0..2.0 * PI);
        let (xp, yp) = (x + r * theta.cos(), y + r * theta.sin());
        let (a1, a2) = step.velocity(x, y);
        let (b1, b2) = step.velocity(xp, yp);
        let du = ((a1 - b1).powi(2) + (a2 - b2).powi(2)).sqrt();
        worst = worst.max(du / log_modulus(r));
    }
    worst
}

/// Checks the velocity regularity conditions on a truncated schedule.
pub fn regularity_report(
    schedule: &ParameterSchedule,
    alpha: f64,
    m: u32,
    samples: usize,
    seed: u64,
) -> Result<RegularityReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", alpha, "must lie in (0, 1)"));
    }
    if m < 1 {
        return Err(invalid("m", m as f64, "time-derivative order must be >= 1"));
    }
    let mut time_ratios = Vec::new();
    let mut log_ratios = Vec::new();
    for s in schedule.steps() {
        let nf = s.frequency as f64;
        time_ratios.push(s.amplitude * nf.powf(alpha) / s.duration.powi(m as i32));
        log_ratios.push(s.amplitude * nf / (1.0 + nf.ln().abs().powi(4)));
    }
    let (time_argmax, time_sup) = time_ratios
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |(bi, bv), (i, &v)| if v > bv { (i + 1, v) } else { (bi, bv) });
    let log_sup = log_ratios.iter().fold(0.0_f64, |a, &b| a.max(b));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modulus = Vec::new();
    for s in schedule.steps() {
        let h = schedule.shear(s.j, Axis::Horizontal, TimeProfile::flat())?;
        let v = schedule.shear(s.j, Axis::Vertical, TimeProfile::flat())?;
        modulus.push(StepModulus {
            j: s.j,
            horizontal: sample_modulus(&h, samples, &mut rng),
            vertical: sample_modulus(&v, samples, &mut rng),
        });
    }
    Ok(RegularityReport {
        time_ratios,
        time_sup,
        time_argmax,
        log_ratios,
        log_sup,
        modulus,
    })
}

/// `log 2`, exposed for callers reproducing `α_j` by hand.
pub const LOG_2: f64 = LN_2;

#[cfg(test)]
mod tests {
    use super::*;

    fn theorem1(j_max: usize) -> ParameterSchedule {
        build_schedule(ScheduleRule::Theorem1 { m: 2.0 }, j_max).unwrap()
    }

    #[test]
    fn sawtooth_examples() {
        assert_eq!(sawtooth(0.0), 0.0);
        assert!((sawtooth(-PI / 2.0) - PI / 2.0).abs() < 1e-15);
        assert!((sawtooth(3.0 * PI / 2.0) - PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap(PI), -PI);
        assert_eq!(sawtooth_slope(0.0), 1.0);
        assert_eq!(sawtooth_slope(-0.1), -1.0);
        for x in [-10.0, -3.3, 0.2, 7.9, 1e3] {
            let w = wrap(x);
            assert!((-PI..PI).contains(&w));
            assert!((0.0..=PI).contains(&sawtooth(x)));
        }
    }

    #[test]
    fn theorem1_first_steps() {
        let s = theorem1(2);
        let a = s.step(1).unwrap();
        assert_eq!(a.frequency, 2);
        assert_eq!(a.strength, 4.0);
        let alpha1 = 0.5 * (1.0 + LOG_2.powi(4));
        assert!((a.amplitude - alpha1).abs() < 1e-15);
        assert!((a.amplitude - 0.6154175).abs() < 1e-7);
        assert!((a.duration - 3.2498).abs() < 1e-4);
        let b = s.step(2).unwrap();
        assert_eq!(b.strength, 24.0);
        assert!((b.amplitude - 1.17334).abs() < 1e-5);
        assert!((b.duration - 5.1136).abs() < 1e-3);
        assert!((s.t_star() - 2.0 * (a.duration + b.duration)).abs() < 1e-13);
    }

    #[test]
    fn theorem2_second_step() {
        let s = build_schedule(
            ScheduleRule::Theorem2 {
                m: 2.0,
                alpha: 0.5,
                epsilon: 0.1,
            },
            2,
        )
        .unwrap();
        let a = s.step(1).unwrap();
        assert_eq!(a.frequency, 1);
        let b = s.step(2).unwrap();
        assert_eq!(b.frequency, 256);
        assert!((b.amplitude - 0.0625).abs() < 1e-15);
        assert!((b.strength - 2.0 * 2f64.powf(2.0 / 0.7)).abs() < 1e-12);
        assert!((b.strength - 14.4916).abs() < 1e-4);
        let k_from_parts = b.amplitude * b.frequency as f64 * b.duration;
        assert!((k_from_parts - b.strength).abs() < 1e-12 * b.strength);
    }

    #[test]
    fn build_rejects_bad_parameters() {
        assert!(build_schedule(ScheduleRule::Theorem1 { m: 1.5 }, 3).is_err());
        assert!(build_schedule(ScheduleRule::Theorem1 { m: 2.0 }, 0).is_err());
        let t2 = |alpha, epsilon| {
            build_schedule(
                ScheduleRule::Theorem2 {
                    m: 2.0,
                    alpha,
                    epsilon,
                },
                2,
            )
        };
        assert!(t2(0.0, 0.1).is_err());
        assert!(t2(1.0, 0.1).is_err());
        assert!(t2(0.5, 0.0).is_err());
        assert!(t2(0.5, 1.0 / 6.0).is_err());
        assert!(t2(0.5, 0.1).is_ok());
    }

    #[test]
    fn theorem1_invariants() {
        let s = theorem1(20);
        for w in s.switch_times().windows(2) {
            assert!(w[1] > w[0]);
        }
        for st in s.steps() {
            assert_eq!(st.frequency, 1u64 << st.j);
            let jf = st.j as f64;
            assert_eq!(st.strength, 2.0 * (2.0 * jf.powf(2.5) - 1e-9).ceil());
        }
        for w in s.steps().windows(2) {
            let r = w[1].strength / w[0].strength;
            assert!((1.0..=17.0).contains(&r), "K ratio {r}");
        }
    }

    #[test]
    fn durations_eventually_decrease() {
        let s = theorem1(40);
        let t: Vec<f64> = s.steps().iter().map(|x| x.duration).collect();
        // measured: t_j peaks at j = 3 and decreases from J0 = 3 onwards
        let j0 = 3;
        for j in j0..t.len() {
            assert!(t[j] < t[j - 1], "t_{} >= t_{}", j + 1, j);
        }
        assert!(t[1] > t[0]);
        // increments of the partial sums shrink like J^{-3/2}
        let tail: f64 = t[30..].iter().sum();
        assert!(tail < t[..30].iter().sum::<f64>());
    }

    #[test]
    fn blowup_sum_proxy() {
        let s = theorem1(4);
        let mut acc = 0.0;
        let mut prod = 1.0;
        for st in s.steps() {
            acc += st.duration * prod;
            prod *= st.strength.powi(4);
        }
        assert!(acc > 1e6, "{acc}");
    }

    #[test]
    fn zeta_profiles() {
        let flat = TimeProfile::flat();
        let bump = TimeProfile::bump();
        assert_eq!(flat.zeta(0.5).unwrap(), 0.5);
        assert_eq!(flat.zeta(1.0).unwrap(), 1.0);
        assert_eq!(bump.zeta(1.0).unwrap(), 1.0);
        assert_eq!(bump.zeta(0.0).unwrap(), 0.0);
        assert!((bump.zeta(0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!(bump.zeta(1.2).is_err());
        assert!(flat.zeta(-0.1).is_err());
        let total = adaptive_simpson(|t| bump.psi(t), 0.0, 1.0, 1e-16);
        assert!((total - 1.0).abs() < 1e-10);
        assert_eq!(bump.psi(0.0), 0.0);
        assert_eq!(bump.psi(1.0), 0.0);
        let mut prev = 0.0;
        for i in 0..=100 {
            let z = bump.zeta(i as f64 / 100.0).unwrap();
            assert!(z >= prev - 1e-15);
            prev = z;
        }
    }

    #[test]
    fn velocity_examples() {
        let s = theorem1(2);
        let (u1, u2) = velocity_at(&s, TimeProfile::flat(), 1.0, (0.0, PI / 2.0)).unwrap();
        let a1 = s.step(1).unwrap().amplitude;
        assert!((u1 - a1 * PI).abs() < 1e-14);
        assert!((u1 - 1.933391).abs() < 1e-6);
        assert_eq!(u2, 0.0);
        let t1 = s.switch_time(1);
        let at_switch = velocity_at(&s, TimeProfile::bump(), t1, (0.7, 0.3)).unwrap();
        assert_eq!(at_switch, (0.0, 0.0));
        assert!(velocity_at(&s, TimeProfile::flat(), s.t_star(), (0.0, 0.0)).is_err());
        // vertical half
        let t = s.midpoint(1).unwrap() + 0.1;
        let (v1, v2) = velocity_at(&s, TimeProfile::flat(), t, (PI / 4.0, 1.0)).unwrap();
        assert_eq!(v1, 0.0);
        assert!((v2 - a1 * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn shear_components_ignore_own_coordinate() {
        let s = theorem1(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let t = rng.gen_range(0.0..s.t_star());
            let y = rng.gen_range(-PI..PI);
            let x = rng.gen_range(-PI..PI);
            let x2 = rng.gen_range(-PI..PI);
            let loc = s.locate(t).unwrap();
            let a = velocity_at(&s, TimeProfile::flat(), t, (x, y)).unwrap();
            match loc.axis {
                Axis::Horizontal => {
                    let b = velocity_at(&s, TimeProfile::flat(), t, (x2, y)).unwrap();
                    assert_eq!(a.0, b.0);
                    assert_eq!(a.1, 0.0);
                }
                Axis::Vertical => {
                    let b = velocity_at(&s, TimeProfile::flat(), t, (x, x2)).unwrap();
                    assert_eq!(a.1, b.1);
                    assert_eq!(a.0, 0.0);
                }
            }
        }
    }

    #[test]
    fn regularity_quantities() {
        let s = theorem1(20);
        let rep = regularity_report(&s, 0.9, 1, 1000, 1).unwrap();
        for r in &rep.log_ratios {
            assert_eq!(*r, 1.0);
        }
        for (st, r) in s.steps().iter().zip(&rep.time_ratios) {
            let nf = st.frequency as f64;
            let want = st.amplitude * nf.powf(0.9) / st.duration;
            assert!((r - want).abs() <= 1e-14 * want);
        }
        let best = rep.time_ratios.iter().cloned().fold(0.0, f64::max);
        assert_eq!(rep.time_sup, best);
        assert_eq!(rep.time_ratios[rep.time_argmax - 1], best);
        assert!(regularity_report(&s, 1.0, 1, 10, 1).is_err());
        assert!(regularity_report(&s, 0.5, 0, 10, 1).is_err());
    }

    #[test]
    fn first_step_modulus_below_two() {
        let s = theorem1(1);
        let rep = regularity_report(&s, 0.5, 1, 1_000_000, 5).unwrap();
        let m = rep.modulus[0];
        assert!(m.horizontal <= 2.0 && m.vertical <= 2.0, "{m:?}");
        assert!(m.horizontal > 1.0);
    }

    #[test]
    fn schedule_csv_has_header_and_rows() {
        let s = theorem1(3);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "j,N_j,alpha_j,t_j,K_j,T_j");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,2,"));
    }
}
