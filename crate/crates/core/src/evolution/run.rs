use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lagrangian::{MapChain, Stage};
use super::shear::{apply_heat, apply_shear, heat_dissipation};
use crate::error::{invalid, Error, Result};
use crate::spectral::{inverse_transform, AnalyticInitialData, SpectralField, TorusGrid};
use crate::velocity::{Axis, ParameterSchedule, TimeProfile};

/// Which part of the evolution produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Initial,
    Shear(Axis),
    /// Pure diffusion after the schedule horizon.
    Decay,
}

/// Scalar diagnostics at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeRecord {
    pub t: f64,
    pub j: usize,
    pub phase: Phase,
    /// `‖f‖²_{L²}`
    pub l2_sq: f64,
    /// `‖∇f‖²_{L²}`
    pub grad_sq: f64,
    /// `E_κ(t)` as the energy removed by the exact heat substeps.
    pub dissipation: f64,
    /// `E_κ(t)` by the trapezoidal rule on recorded `‖∇f‖²`.
    pub dissipation_trapezoid: f64,
    pub tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkKind {
    /// `T_{j-1} + t_j`
    Midpoint,
    /// `T_j`
    Switch,
    /// End of the free-decay tail.
    End,
}

/// A distinguished time with the record index and, optionally, the field.
#[derive(Debug, Clone)]
pub struct Mark {
    pub j: usize,
    pub kind: MarkKind,
    pub t: f64,
    pub record: usize,
    pub field: Option<SpectralField>,
}

/// Grid values against the Lagrangian oracle at one marked time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCheck {
    pub t: f64,
    pub j: usize,
    pub points: usize,
    pub max_error: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TorusGrid,
    pub kappa: f64,
    pub t_star: f64,
    pub records: Vec<TimeRecord>,
    pub marks: Vec<Mark>,
    pub checks: Vec<CrossCheck>,
    /// Largest `j` with `T_j` reached while resolved.
    pub resolved_jmax: usize,
    /// First time at which resolution was lost, if any.
    pub unresolved_from: Option<f64>,
    pub unresolved_reason: Option<String>,
}

impl Trajectory {
    pub fn initial(&self) -> &TimeRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &TimeRecord {
        self.records.last().expect("trajectory has an initial record")
    }

    pub fn mark(&self, j: usize, kind: MarkKind) -> Option<&Mark> {
        self.marks.iter().find(|m| m.j == j && m.kind == kind)
    }

    /// Record at `T_j` (`j = 0` is the initial record).
    pub fn at_switch(&self, j: usize) -> Option<&TimeRecord> {
        if j == 0 {
            return Some(self.initial());
        }
        self.mark(j, MarkKind::Switch).map(|m| &self.records[m.record])
    }

    pub fn at_midpoint(&self, j: usize) -> Option<&TimeRecord> {
        self.mark(j, MarkKind::Midpoint).map(|m| &self.records[m.record])
    }

    /// Stored field at `T_j`.
    pub fn field_at_switch(&self, j: usize) -> Option<&SpectralField> {
        self.mark(j, MarkKind::Switch).and_then(|m| m.field.as_ref())
    }

    pub fn field_at_midpoint(&self, j: usize) -> Option<&SpectralField> {
        self.mark(j, MarkKind::Midpoint).and_then(|m| m.field.as_ref())
    }

    /// `|‖f(t)‖² + E_κ(t) - ‖f₀‖²| / ‖f₀‖²` per record.
    pub fn balance_residuals(&self) -> Vec<f64> {
        let e0 = self.initial().l2_sq;
        self.records
            .iter()
            .map(|r| (r.l2_sq + r.dissipation - e0).abs() / e0)
            .collect()
    }

    pub fn is_resolved(&self) -> bool {
        self.unresolved_from.is_none()
    }
}

/// Heat-only continuation after the schedule horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeDecay {
    pub duration: f64,
    pub substeps: usize,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub profile: TimeProfile,
    /// Intermediate records per half-interval in pure transport.
    pub samples_per_interval: usize,
    /// Fixed Strang substep count per half-interval; default `max(16, 4⌈K_j⌉)`.
    pub substeps: Option<usize>,
    /// Largest admissible top-octave energy fraction at marked times.
    pub tail_tolerance: f64,
    pub cross_check_points: usize,
    pub cross_check_tolerance: f64,
    pub seed: u64,
    /// Keep fields at every `T_j` and `T_{j-1} + t_j`.
    pub keep_fields: bool,
    pub free_decay: Option<FreeDecay>,
    /// Stop after this many schedule steps (defaults to all).
    pub j_limit: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            profile: TimeProfile::flat(),
            samples_per_interval: 4,
            substeps: None,
            tail_tolerance: 1e-2,
            cross_check_points: 100,
            cross_check_tolerance: 1e-8,
            seed: 0,
            keep_fields: true,
            free_decay: None,
            j_limit: None,
        }
    }
}

/// Evolving state: the field at `time` inside step `j`.
#[derive(Debug, Clone)]
pub struct TransportState {
    pub time: f64,
    pub field: SpectralField,
    pub j: usize,
    pub phase: Phase,
    pub dissipation: f64,
    pub dissipation_trapezoid: f64,
    grad_sq: f64,
}

impl TransportState {
    pub fn new(field: SpectralField) -> Self {
        let grad_sq = field.grad_sq();
        Self {
            time: 0.0,
            field,
            j: 0,
            phase: Phase::Initial,
            dissipation: 0.0,
            dissipation_trapezoid: 0.0,
            grad_sq,
        }
    }

    /// Heat flow for `dt`, accumulating both dissipation measures.
    fn diffuse(&mut self, kappa: f64, dt: f64) -> Result<()> {
        self.dissipation += heat_dissipation(&self.field, kappa, dt);
        apply_heat(&mut self.field, kappa, dt)?;
        Ok(())
    }

    /// Refreshes `‖∇f‖²` at the new time and advances the trapezoidal integral.
    fn close_substep(&mut self, kappa: f64, t: f64) {
        let g = self.field.grad_sq();
        self.dissipation_trapezoid += kappa * (t - self.time) * (self.grad_sq + g);
        self.grad_sq = g;
        self.time = t;
    }

    fn record(&self) -> TimeRecord {
        TimeRecord {
            t: self.time,
            j: self.j,
            phase: self.phase,
            l2_sq: self.field.energy(),
            grad_sq: self.grad_sq,
            dissipation: self.dissipation,
            dissipation_trapezoid: self.dissipation_trapezoid,
            tail: self.field.tail_fraction().fraction,
        }
    }
}

fn default_substeps(strength: f64) -> usize {
    16usize.max(4 * strength.ceil() as usize)
}

struct Runner<'a> {
    data: &'a AnalyticInitialData,
    schedule: &'a ParameterSchedule,
    opts: &'a RunOptions,
    kappa: f64,
    traj: Trajectory,
}

impl Runner<'_> {
    fn push(&mut self, rec: TimeRecord) -> usize {
        if let Some(prev) = self.traj.records.last() {
            debug_assert!(rec.t > prev.t, "record times must increase");
        }
        self.traj.records.push(rec);
        self.traj.records.len() - 1
    }

    fn flag(&mut self, t: f64, reason: String) {
        if self.traj.unresolved_from.is_none() {
            self.traj.unresolved_from = Some(t);
            self.traj.unresolved_reason = Some(reason);
        }
    }

    /// Records a marked time; returns false once resolution is lost.
    fn mark(&mut self, state: &TransportState, kind: MarkKind) -> Result<bool> {
        let rec = state.record();
        let idx = self.push(rec);
        let resolved = rec.tail <= self.opts.tail_tolerance;
        if !resolved {
            self.flag(
                rec.t,
                format!(
                    "tail fraction {:.3e} exceeds {:.3e} at j = {}",
                    rec.tail, self.opts.tail_tolerance, state.j
                ),
            );
        } else if self.kappa == 0.0 && self.opts.cross_check_points > 0 {
            let stage = match kind {
                MarkKind::Midpoint => Stage::midpoint(state.j),
                _ => Stage::complete(state.j),
            };
            self.cross_check(state, stage)?;
        }
        self.traj.marks.push(Mark {
            j: state.j,
            kind,
            t: rec.t,
            record: idx,
            field: self.opts.keep_fields.then(|| state.field.clone()),
        });
        if resolved && kind == MarkKind::Switch {
            self.traj.resolved_jmax = state.j;
        }
        Ok(resolved)
    }

    fn cross_check(&mut self, state: &TransportState, stage: Stage) -> Result<()> {
        let grid = self.traj.grid;
        let n = grid.n();
        let values = inverse_transform(&state.field);
        let chain = MapChain::inverse_flow(self.schedule, stage)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ (state.j as u64).wrapping_mul(0x9e37_79b9));
        let mut worst = 0.0_f64;
        for _ in 0..self.opts.cross_check_points {
            let ix = rng.gen_range(0..n);
            let iy = rng.gen_range(0..n);
            let exact = chain.value(self.data, grid.node(ix), grid.node(iy));
            worst = worst.max((values.at(ix, iy) - exact).abs());
        }
        self.traj.checks.push(CrossCheck {
            t: state.time,
            j: state.j,
            points: self.opts.cross_check_points,
            max_error: worst,
        });
        if worst > self.opts.cross_check_tolerance {
            return Err(Error::CrossValidation {
                t: state.time,
                max_error: worst,
                tolerance: self.opts.cross_check_tolerance,
            });
        }
        Ok(())
    }

    /// Advances one half-interval of step `j`; `end` is its exact end time.
    fn half_interval(&mut self, state: &mut TransportState, j: usize, axis: Axis, end: f64) -> Result<()> {
        let step = *self.schedule.step(j)?;
        let d = step.strength / step.frequency as f64;
        let profile = self.opts.profile;
        let start = state.time;
        state.j = j;
        state.phase = Phase::Shear(axis);
        if self.kappa == 0.0 {
            // Each intermediate field is one shear of the half-interval start state.
            let samples = self.opts.samples_per_interval.max(1);
            for i in 1..samples {
                let tau = i as f64 / samples as f64;
                let mut probe = state.clone();
                apply_shear(&mut probe.field, axis, profile.zeta(tau)? * d, step.frequency)?;
                probe.close_substep(0.0, start + tau * step.duration);
                self.push(probe.record());
            }
            apply_shear(&mut state.field, axis, d, step.frequency)?;
            state.close_substep(0.0, end);
            return Ok(());
        }
        let subs = self.opts.substeps.unwrap_or_else(|| default_substeps(step.strength));
        let dt = step.duration / subs as f64;
        let mut z_prev = 0.0;
        for m in 0..subs {
            let z_mid = profile.zeta((m as f64 + 0.5) / subs as f64)?;
            let z_next = if m + 1 == subs {
                1.0
            } else {
                profile.zeta((m + 1) as f64 / subs as f64)?
            };
            apply_shear(&mut state.field, axis, (z_mid - z_prev) * d, step.frequency)?;
            state.diffuse(self.kappa, dt)?;
            apply_shear(&mut state.field, axis, (z_next - z_mid) * d, step.frequency)?;
            let t = if m + 1 == subs {
                end
            } else {
                start + (m + 1) as f64 * dt
            };
            state.close_substep(self.kappa, t);
            if m + 1 < subs {
                self.push(state.record());
            }
            z_prev = z_next;
        }
        Ok(())
    }

    fn run(mut self) -> Result<Trajectory> {
        let grid = self.traj.grid;
        let mut state = TransportState::new(self.data.spectral(grid)?);
        self.push(state.record());
        let j_end = self
            .opts
            .j_limit
            .unwrap_or(self.schedule.j_max())
            .min(self.schedule.j_max());
        for j in 1..=j_end {
            let step = *self.schedule.step(j)?;
            if step.frequency as usize > grid.nyquist() {
                self.flag(
                    state.time,
                    format!("N_{j} = {} exceeds n/2 = {}", step.frequency, grid.nyquist()),
                );
                break;
            }
            let mid = self.schedule.midpoint(j)?;
            self.half_interval(&mut state, j, Axis::Horizontal, mid)?;
            if !self.mark(&state, MarkKind::Midpoint)? {
                break;
            }
            let end = self.schedule.switch_time(j);
            self.half_interval(&mut state, j, Axis::Vertical, end)?;
            if !self.mark(&state, MarkKind::Switch)? {
                break;
            }
        }
        if let Some(decay) = self.opts.free_decay {
            if self.kappa > 0.0 && self.traj.unresolved_from.is_none() && decay.duration > 0.0 {
                let subs = decay.substeps.max(1);
                let start = state.time;
                let dt = decay.duration / subs as f64;
                state.phase = Phase::Decay;
                for m in 1..=subs {
                    state.diffuse(self.kappa, dt)?;
                    let t = if m == subs {
                        start + decay.duration
                    } else {
                        start + m as f64 * dt
                    };
                    state.close_substep(self.kappa, t);
                    if m < subs {
                        self.push(state.record());
                    }
                }
                self.mark(&state, MarkKind::End)?;
            }
        }
        Ok(self.traj)
    }
}

fn runner<'a>(
    data: &'a AnalyticInitialData,
    schedule: &'a ParameterSchedule,
    kappa: f64,
    grid: TorusGrid,
    opts: &'a RunOptions,
) -> Runner<'a> {
    Runner {
        data,
        schedule,
        opts,
        kappa,
        traj: Trajectory {
            grid,
            kappa,
            t_star: schedule.t_star(),
            records: Vec::new(),
            marks: Vec::new(),
            checks: Vec::new(),
            resolved_jmax: 0,
            unresolved_from: None,
            unresolved_reason: None,
        },
    }
}

/// Pure transport (`κ = 0`) by exact spectral shears, cross-checked against the
/// Lagrangian oracle at every marked time.
pub fn run_transport(
    data: &AnalyticInitialData,
    schedule: &ParameterSchedule,
    grid: TorusGrid,
    opts: &RunOptions,
) -> Result<Trajectory> {
    runner(data, schedule, 0.0, grid, opts).run()
}

/// Advection-diffusion by Strang splitting: half shear, exact heat, half shear.
pub fn run_advection_diffusion(
    data: &AnalyticInitialData,
    schedule: &ParameterSchedule,
    kappa: f64,
    grid: TorusGrid,
    opts: &RunOptions,
) -> Result<Trajectory> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(invalid("kappa", kappa, "diffusivity must be positive"));
    }
    runner(data, schedule, kappa, grid, opts).run()
}
