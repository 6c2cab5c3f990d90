//! Grid-free evaluation of transported closed-form data by composing shear maps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{AnalyticInitialData, PhysicalField, TorusGrid};
use crate::velocity::{sawtooth, sawtooth_slope, wrap, Axis, ParameterSchedule, TimeProfile};

/// `(x, y) ↦ (x + c S(N y), y)` for [`Axis::Horizontal`], `(x, y + c S(N x))` for
/// [`Axis::Vertical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointShear {
    pub axis: Axis,
    pub coefficient: f64,
    pub frequency: u64,
}

impl PointShear {
    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let nf = self.frequency as f64;
        match self.axis {
            Axis::Horizontal => (wrap(x + self.coefficient * sawtooth(nf * y)), y),
            Axis::Vertical => (x, wrap(y + self.coefficient * sawtooth(nf * x))),
        }
    }

    /// Off-diagonal Jacobian entry at `(x, y)`, using the right derivative at kinks.
    #[inline]
    fn slope(&self, x: f64, y: f64) -> f64 {
        let nf = self.frequency as f64;
        let s = match self.axis {
            Axis::Horizontal => sawtooth_slope(nf * y),
            Axis::Vertical => sawtooth_slope(nf * x),
        };
        self.coefficient * nf * s
    }
}

/// Stage of the discrete-time flow: steps `1..j` complete, step `j` advanced by the
/// given profile fractions of its horizontal and vertical halves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub j: usize,
    pub horizontal: f64,
    pub vertical: f64,
}

impl Stage {
    pub fn initial() -> Self {
        Self {
            j: 0,
            horizontal: 0.0,
            vertical: 0.0,
        }
    }

    /// After both halves of step `j`.
    pub fn complete(j: usize) -> Self {
        Self {
            j,
            horizontal: 1.0,
            vertical: 1.0,
        }
    }

    /// After the horizontal half of step `j`.
    pub fn midpoint(j: usize) -> Self {
        Self {
            j,
            horizontal: 1.0,
            vertical: 0.0,
        }
    }

    /// Stage reached by the continuous flow at time `t ∈ [0, T_*]`.
    pub fn at_time(schedule: &ParameterSchedule, profile: TimeProfile, t: f64) -> Result<Self> {
        if t == 0.0 {
            return Ok(Self::initial());
        }
        if t == schedule.t_star() {
            return Ok(Self::complete(schedule.j_max()));
        }
        let loc = schedule.locate(t)?;
        let z = profile.zeta(loc.tau)?;
        Ok(match loc.axis {
            Axis::Horizontal => Self {
                j: loc.j,
                horizontal: z,
                vertical: 0.0,
            },
            Axis::Vertical => Self {
                j: loc.j,
                horizontal: 1.0,
                vertical: z,
            },
        })
    }
}

/// Point maps applied in order: the pullback `f ∘ G` is `f` evaluated after all of them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapChain {
    ops: Vec<PointShear>,
}

impl MapChain {
    pub fn new(ops: Vec<PointShear>) -> Self {
        Self { ops }
    }

    pub fn ops(&self) -> &[PointShear] {
        &self.ops
    }

    /// Inverse flow map `Φ_1^{-1} ∘ … ∘ Φ_j^{-1}` at a stage; `Φ_j^{-1}` acts first.
    pub fn inverse_flow(schedule: &ParameterSchedule, stage: Stage) -> Result<Self> {
        if stage.j > schedule.j_max() {
            return Err(Error::Schedule(format!(
                "stage j = {} beyond j_max = {}",
                stage.j,
                schedule.j_max()
            )));
        }
        let mut ops = Vec::with_capacity(2 * stage.j);
        for j in (1..=stage.j).rev() {
            let s = schedule.step(j)?;
            let d = s.strength / s.frequency as f64;
            let (a, b) = if j == stage.j {
                (stage.horizontal, stage.vertical)
            } else {
                (1.0, 1.0)
            };
            if b != 0.0 {
                ops.push(PointShear {
                    axis: Axis::Vertical,
                    coefficient: -b * d,
                    frequency: s.frequency,
                });
            }
            if a != 0.0 {
                ops.push(PointShear {
                    axis: Axis::Horizontal,
                    coefficient: -a * d,
                    frequency: s.frequency,
                });
            }
        }
        Ok(Self { ops })
    }

    /// `Φ_j^{power}` for a single step map `Φ_j = ψ_j ∘ φ_j`; negative powers invert.
    pub fn step_power(schedule: &ParameterSchedule, j: usize, power: i32) -> Result<Self> {
        let s = schedule.step(j)?;
        let d = s.strength / s.frequency as f64;
        let one = if power >= 0 {
            [
                PointShear {
                    axis: Axis::Horizontal,
                    coefficient: d,
                    frequency: s.frequency,
                },
                PointShear {
                    axis: Axis::Vertical,
                    coefficient: d,
                    frequency: s.frequency,
                },
            ]
        } else {
            [
                PointShear {
                    axis: Axis::Vertical,
                    coefficient: -d,
                    frequency: s.frequency,
                },
                PointShear {
                    axis: Axis::Horizontal,
                    coefficient: -d,
                    frequency: s.frequency,
                },
            ]
        };
        let ops = std::iter::repeat(one)
            .take(power.unsigned_abs() as usize)
            .flatten()
            .collect();
        Ok(Self { ops })
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        self.ops.iter().fold((x, y), |(x, y), op| op.apply(x, y))
    }

    /// Image point and the Jacobian `D G` at `(x, y)`.
    pub fn apply_with_jacobian(&self, x: f64, y: f64) -> ((f64, f64), [[f64; 2]; 2]) {
        let mut m = [[1.0, 0.0], [0.0, 1.0]];
        let (mut x, mut y) = (x, y);
        for op in &self.ops {
            let c = op.slope(x, y);
            // left-multiply by [[1, c], [0, 1]] or [[1, 0], [c, 1]]
            match op.axis {
                Axis::Horizontal => {
                    m[0][0] += c * m[1][0];
                    m[0][1] += c * m[1][1];
                }
                Axis::Vertical => {
                    m[1][0] += c * m[0][0];
                    m[1][1] += c * m[0][1];
                }
            }
            (x, y) = op.apply(x, y);
        }
        ((x, y), m)
    }

    pub fn value(&self, data: &AnalyticInitialData, x: f64, y: f64) -> f64 {
        let (x0, y0) = self.apply(x, y);
        data.eval(x0, y0)
    }

    /// `∇(f₀ ∘ G) = (D G)ᵀ ∇f₀(G z)`.
    pub fn gradient(&self, data: &AnalyticInitialData, x: f64, y: f64) -> [f64; 2] {
        let ((x0, y0), m) = self.apply_with_jacobian(x, y);
        let g = data.gradient(x0, y0);
        [
            m[0][0] * g[0] + m[1][0] * g[1],
            m[0][1] * g[0] + m[1][1] * g[1],
        ]
    }

    /// Exact samples of `f₀ ∘ G` at the grid nodes.
    pub fn sample(&self, data: &AnalyticInitialData, grid: TorusGrid) -> PhysicalField {
        PhysicalField::from_fn(grid, |x, y| self.value(data, x, y))
    }

    /// Node quadrature of `∫|∇(f₀ ∘ G)|²`.
    pub fn grad_sq_quadrature(&self, data: &AnalyticInitialData, grid: TorusGrid) -> f64 {
        let n = grid.n();
        let h = grid.spacing();
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|iy| {
                let y = grid.node(iy);
                (0..n)
                    .map(|ix| {
                        let g = self.gradient(data, grid.node(ix), y);
                        g[0] * g[0] + g[1] * g[1]
                    })
                    .sum()
            })
            .collect();
        rows.iter().sum::<f64>() * h * h
    }

    /// Largest `|∂_x|`, `|∂_y|` and `|∇|` over the grid nodes.
    pub fn gradient_sup(&self, data: &AnalyticInitialData, grid: TorusGrid) -> [f64; 3] {
        let n = grid.n();
        let rows: Vec<[f64; 3]> = (0..n)
            .into_par_iter()
            .map(|iy| {
                let y = grid.node(iy);
                (0..n).fold([0.0f64; 3], |acc, ix| {
                    let g = self.gradient(data, grid.node(ix), y);
                    [
                        acc[0].max(g[0].abs()),
                        acc[1].max(g[1].abs()),
                        acc[2].max(g[0].hypot(g[1])),
                    ]
                })
            })
            .collect();
        rows.iter().fold([0.0; 3], |a, r| {
            [a[0].max(r[0]), a[1].max(r[1]), a[2].max(r[2])]
        })
    }
}

/// `f_j(z) = f₀(Φ_1^{-1} ∘ … ∘ Φ_j^{-1}(z))` at each query point.
pub fn lagrangian_backtrack(
    data: &AnalyticInitialData,
    schedule: &ParameterSchedule,
    j: usize,
    points: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let chain = MapChain::inverse_flow(schedule, Stage::complete(j))?;
    Ok(points.iter().map(|&(x, y)| chain.value(data, x, y)).collect())
}

/// `‖f‖_{Ḣ¹}` of the exact transported field at a stage, by node quadrature of the
/// chain-rule gradient.
pub fn lagrangian_h1(
    data: &AnalyticInitialData,
    schedule: &ParameterSchedule,
    stage: Stage,
    grid: TorusGrid,
) -> Result<f64> {
    let chain = MapChain::inverse_flow(schedule, stage)?;
    Ok(chain.grad_sq_quadrature(data, grid).sqrt())
}
