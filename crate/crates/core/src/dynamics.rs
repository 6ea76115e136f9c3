//! Orbit integration with structure monitors, recurrence measurement, and
//! transversal growth rates at vertices.

use num_traits::Zero;
use rayon::prelude::*;

use crate::conservative::HamiltonianSpec;
use crate::error::{Error, Result};
use crate::field::{chart_velocity, vector_field_into};
use crate::game::{PolymatrixGame, PrismPoint, Signature};
use crate::matrix::dot;
use crate::ode::{dopri5, rk4, AdaptiveOptions, SolverStats};
use crate::poisson::{phi, phi_inverse, PoissonData};
use crate::scalar::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationMethod {
    /// Classical fourth-order Runge–Kutta with step `max_step`.
    Rk4,
    /// Dormand–Prince 5(4), adaptive.
    Dopri5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateMode {
    /// Chart for interior starts, prism otherwise.
    Auto,
    Prism,
    Chart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub method: IntegrationMethod,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub mode: CoordinateMode,
    /// Keep every `sample_stride`-th accepted step (the endpoints are always kept).
    pub sample_stride: usize,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: IntegrationMethod::Dopri5,
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 0.1,
            mode: CoordinateMode::Auto,
            sample_stride: 1,
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig {
            method: IntegrationMethod::Rk4,
            max_step: step,
            ..Self::default()
        }
    }

    pub fn with_mode(mut self, mode: CoordinateMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.rtol) || !positive(self.atol) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if !positive(self.max_step) {
            return Err(Error::InvalidConfig("max step must be positive".into()));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidConfig("sample stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegrationStats {
    pub method: IntegrationMethod,
    /// Resolved mode, never `Auto`.
    pub mode: CoordinateMode,
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Sampled orbit. `chart` holds the chart coordinates when the orbit was
/// integrated in the chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    signature: Signature,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub chart: Option<Vec<Vec<f64>>>,
    /// Per sample, `max_α |Σ_{i∈α} x_i - 1|`.
    pub block_sum_deviation: Vec<f64>,
    pub hamiltonian: Option<Vec<f64>>,
    /// Per sample, one value per kernel vector.
    pub leaf_invariants: Option<Vec<Vec<f64>>>,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectories hold at least the initial sample")
    }

    /// Evaluates `H` and the leaf invariants at every sample.
    pub fn attach_monitors(&mut self, spec: Option<&HamiltonianSpec>, data: Option<&PoissonData>) -> Result<()> {
        if let Some(spec) = spec {
            let values = self
                .states
                .iter()
                .enumerate()
                .map(|(k, x)| spec.value(x).map_err(|_| Error::BoundarySample { index: k }))
                .collect::<Result<Vec<_>>>()?;
            self.hamiltonian = Some(values);
        }
        if let Some(data) = data {
            let values = match (&self.chart, data.is_standard()) {
                // w · u directly: exact linear functionals of the chart state
                (Some(chart), true) => {
                    let kernel = data.kernel_f64();
                    chart
                        .iter()
                        .map(|u| kernel.iter().map(|w| dot(w, u)).collect())
                        .collect()
                }
                _ => self
                    .states
                    .iter()
                    .enumerate()
                    .map(|(k, x)| data.leaf_invariant(x).map_err(|_| Error::BoundarySample { index: k }))
                    .collect::<Result<Vec<_>>>()?,
            };
            self.leaf_invariants = Some(values);
        }
        Ok(())
    }
}

fn block_sum_deviation(sig: &Signature, x: &[f64]) -> f64 {
    sig.blocks()
        .map(|b| (x[b].iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Integrates the replicator field from `x0` over `t_span`.
///
/// Chart mode integrates `u̇ = -E A φ(u)` and maps back through `φ`; prism
/// mode integrates the field directly, renormalizes block sums after every
/// step and clamps round-off negatives, failing with `BoundaryEscape` when a
/// coordinate drops below `-atol`.
pub fn integrate(
    game: &PolymatrixGame<f64>,
    x0: &PrismPoint<f64>,
    t_span: (f64, f64),
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    let (t0, t1) = t_span;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidConfig(format!("invalid time span [{t0}, {t1}]")));
    }
    let sig = game.signature().clone();
    sig.require_len(x0.coords().len(), "initial state")?;
    let mode = match config.mode {
        CoordinateMode::Auto if x0.is_interior() => CoordinateMode::Chart,
        CoordinateMode::Auto => CoordinateMode::Prism,
        m => m,
    };
    let a = game.payoff();
    let mut traj = Trajectory {
        signature: sig.clone(),
        times: vec![t0],
        states: vec![x0.coords().to_vec()],
        chart: None,
        block_sum_deviation: vec![block_sum_deviation(&sig, x0.coords())],
        hamiltonian: None,
        leaf_invariants: None,
        stats: IntegrationStats {
            method: config.method,
            mode,
            steps: 0,
            rejected: 0,
            evaluations: 0,
        },
    };
    let stride = config.sample_stride;
    let mut accepted = 0usize;

    let solver_stats = match mode {
        CoordinateMode::Chart => {
            let u0 = phi_inverse(&sig, x0.coords())?;
            let mut charts = vec![u0.clone()];
            let mut ax = vec![0.0; sig.total()];
            let rhs = |_t: f64, u: &[f64], du: &mut [f64]| {
                let x = phi(&sig, u).expect("chart length checked");
                for (i, o) in ax.iter_mut().enumerate() {
                    *o = dot(a.row(i), &x);
                }
                du.copy_from_slice(&chart_velocity(&sig, &ax));
            };
            let observer = |t: f64, u: &mut [f64]| -> Result<()> {
                accepted += 1;
                if accepted.is_multiple_of(stride) || t == t1 {
                    let x = phi(&sig, u)?;
                    if x.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NonFinite { t });
                    }
                    traj.times.push(t);
                    traj.block_sum_deviation.push(block_sum_deviation(&sig, &x));
                    traj.states.push(x);
                    charts.push(u.to_vec());
                }
                Ok(())
            };
            let stats = run(config, rhs, &u0, t0, t1, observer)?;
            traj.chart = Some(charts);
            stats
        }
        _ => {
            let atol = config.atol;
            let rhs = |_t: f64, x: &[f64], dx: &mut [f64]| vector_field_into(&sig, a, x, dx);
            let observer = |t: f64, x: &mut [f64]| -> Result<()> {
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { t });
                }
                if let Some(index) = x.iter().position(|v| *v < -atol) {
                    return Err(Error::BoundaryEscape { t, index, value: x[index] });
                }
                for b in sig.blocks() {
                    for v in &mut x[b.clone()] {
                        *v = v.max(0.0);
                    }
                    let s: f64 = x[b.clone()].iter().sum();
                    for v in &mut x[b] {
                        *v /= s;
                    }
                }
                accepted += 1;
                if accepted.is_multiple_of(stride) || t == t1 {
                    traj.times.push(t);
                    traj.block_sum_deviation.push(block_sum_deviation(&sig, x));
                    traj.states.push(x.to_vec());
                }
                Ok(())
            };
            run(config, rhs, x0.coords(), t0, t1, observer)?
        }
    };
    traj.stats.steps = solver_stats.steps;
    traj.stats.rejected = solver_stats.rejected;
    traj.stats.evaluations = solver_stats.evaluations;
    Ok(traj)
}

fn run<F, S>(config: &IntegratorConfig, f: F, y0: &[f64], t0: f64, t1: f64, observer: S) -> Result<SolverStats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &mut [f64]) -> Result<()>,
{
    match config.method {
        IntegrationMethod::Rk4 => rk4(f, y0, t0, t1, config.max_step, observer),
        IntegrationMethod::Dopri5 => {
            let opts = AdaptiveOptions {
                rtol: config.rtol,
                atol: config.atol,
                max_step: config.max_step,
                max_steps: config.max_steps,
            };
            dopri5(f, y0, t0, t1, &opts, observer)
        }
    }
}

/// Integrates many initial conditions in parallel; results keep input order.
pub fn integrate_batch(
    game: &PolymatrixGame<f64>,
    starts: &[PrismPoint<f64>],
    t_span: (f64, f64),
    config: &IntegratorConfig,
) -> Vec<Result<Trajectory>> {
    starts
        .par_iter()
        .map(|x0| integrate(game, x0, t_span, config))
        .collect()
}

/// Maximum drifts of the monitored quantities along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    /// `max_t |H(x(t)) - H(x(0))|`, when a Hamiltonian was supplied.
    pub hamiltonian_drift: Option<f64>,
    /// Per kernel vector, `max_t |c_k(t) - c_k(0)|`.
    pub leaf_drift: Vec<f64>,
    pub block_sum_deviation: f64,
}

impl DriftReport {
    pub fn max_leaf_drift(&self) -> f64 {
        self.leaf_drift.iter().copied().fold(0.0, f64::max)
    }
}

/// Drift summary of `traj`. Monitors already attached to the trajectory are
/// reused; missing ones are computed from `spec` and `data`.
pub fn monitor_report(
    traj: &Trajectory,
    spec: Option<&HamiltonianSpec>,
    data: Option<&PoissonData>,
) -> Result<DriftReport> {
    if traj.len() < 2 {
        return Err(Error::InvalidConfig("monitoring needs at least two samples".into()));
    }
    let mut t = traj.clone();
    let need_h = spec.is_some() && t.hamiltonian.is_none();
    let need_leaf = data.is_some() && t.leaf_invariants.is_none();
    t.attach_monitors(spec.filter(|_| need_h), data.filter(|_| need_leaf))?;
    let hamiltonian_drift = match (spec, &t.hamiltonian) {
        (Some(_), Some(h)) => Some(h.iter().map(|v| (v - h[0]).abs()).fold(0.0, f64::max)),
        _ => None,
    };
    let leaf_drift = match (data, &t.leaf_invariants) {
        (Some(_), Some(c)) => (0..c[0].len())
            .map(|k| c.iter().map(|row| (row[k] - c[0][k]).abs()).fold(0.0, f64::max))
            .collect(),
        _ => Vec::new(),
    };
    Ok(DriftReport {
        hamiltonian_drift,
        leaf_drift,
        block_sum_deviation: t.block_sum_deviation.iter().copied().fold(0.0, f64::max),
    })
}

/// Closest return of the orbit to `x0` in the max norm.
///
/// Only samples after the orbit first gets half its maximal distance away
/// from `x0` count; between consecutive samples the orbit is interpolated
/// linearly. A trajectory that never moves returns 0.
pub fn recurrence_check(traj: &Trajectory, x0: &[f64]) -> f64 {
    let dist = |x: &[f64]| x.iter().zip(x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let d: Vec<f64> = traj.states.iter().map(|x| dist(x)).collect();
    let max = d.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let Some(start) = d.iter().position(|v| *v >= 0.5 * max) else {
        return 0.0;
    };
    let mut best = d[start..].iter().copied().fold(f64::INFINITY, f64::min);
    const SUBDIVISIONS: usize = 32;
    for k in start..traj.states.len().saturating_sub(1) {
        let (a, b) = (&traj.states[k], &traj.states[k + 1]);
        for s in 1..SUBDIVISIONS {
            let w = s as f64 / SUBDIVISIONS as f64;
            let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| (1.0 - w) * x + w * y).collect();
            best = best.min(dist(&p));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Repeller,
    Sink,
    Saddle,
    /// Some rate vanishes, or there are no transversal directions.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexLinearization {
    /// One support strategy per group.
    pub support: Vec<usize>,
    /// `(i, (A e)_i - (A e)_{k_α})` for each off-support strategy `i ∈ α`.
    pub rates: Vec<(usize, Rational)>,
    pub kind: VertexKind,
}

/// Transversal growth rates at the vertex with the given support, classified
/// by exact sign.
pub fn linearize_at_vertex(game: &PolymatrixGame<Rational>, support: &[usize]) -> Result<VertexLinearization> {
    let sig = game.signature();
    if support.len() != sig.groups() || support.iter().enumerate().any(|(g, &k)| !sig.block(g).contains(&k)) {
        return Err(Error::NotVertex);
    }
    let a = game.payoff();
    // A e is the sum of the support columns
    let ae: Vec<Rational> = (0..sig.total())
        .map(|i| support.iter().fold(Rational::zero(), |s, &k| s + &a[(i, k)]))
        .collect();
    let mut rates = Vec::new();
    for (g, &k) in support.iter().enumerate() {
        for i in sig.block(g) {
            if i != k {
                rates.push((i, &ae[i] - &ae[k]));
            }
        }
    }
    let positive = rates.iter().filter(|(_, r)| r > &Rational::zero()).count();
    let negative = rates.iter().filter(|(_, r)| r < &Rational::zero()).count();
    let kind = if rates.is_empty() || positive + negative < rates.len() {
        VertexKind::Degenerate
    } else if positive == rates.len() {
        VertexKind::Repeller
    } else if negative == rates.len() {
        VertexKind::Sink
    } else {
        VertexKind::Saddle
    };
    Ok(VertexLinearization {
        support: support.to_vec(),
        rates,
        kind,
    })
}

/// Support of `x` if it is a vertex of the prism.
pub fn vertex_support<T: crate::scalar::Scalar>(sig: &Signature, x: &[T]) -> Result<Vec<usize>> {
    sig.require_len(x.len(), "point")?;
    sig.blocks()
        .map(|b| {
            let ones: Vec<usize> = b.clone().filter(|&i| x[i].is_one()).collect();
            let zeros = b.clone().filter(|&i| x[i].is_zero()).count();
            if ones.len() == 1 && zeros + 1 == b.len() {
                Ok(ones[0])
            } else {
                Err(Error::NotVertex)
            }
        })
        .collect()
}

/// Classification of every vertex of the prism.
pub fn classify_vertices(game: &PolymatrixGame<Rational>) -> Vec<VertexLinearization> {
    game.signature()
        .vertices()
        .iter()
        .map(|s| linearize_at_vertex(game, s).expect("enumerated vertices are valid"))
        .collect()
}

/// Max-norm distance between two trajectories sampled at the same times.
pub fn max_state_difference(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| crate::matrix::max_abs_diff(x, y))
        .fold(0.0, f64::max)
}
