//! Explicit positivity-preserving time stepping.

use serde::Serialize;

use crate::diagnostics::MomentRecord;
use crate::error::{check_param, Error, Result};
use crate::operators::{BoundaryRates, Discretization, StateVector};

/// Relative size below which negative densities are treated as roundoff.
pub const CLAMP_TOLERANCE: f64 = 1e-14;

/// Floor on the growth rate in the transport time-step bound.
const GROWTH_EPS: f64 = 1e-300;

/// Consecutive step halvings tolerated before a step is declared unstable.
const MAX_RETRIES: usize = 40;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Euler,
    /// Two-stage strong-stability-preserving Runge-Kutta (Heun).
    #[default]
    SspRk2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepperConfig {
    pub t_end: f64,
    /// Sorted snapshot times in `[0, t_end]`; always contains both ends.
    pub output_times: Vec<f64>,
    pub safety: f64,
    pub dt_max: f64,
    pub method: Method,
}

impl StepperConfig {
    /// Snapshots at `0` and `t_end` only.
    pub fn new(t_end: f64) -> Self {
        let output_times = if t_end > 0.0 { vec![0.0, t_end] } else { vec![0.0] };
        Self {
            t_end,
            output_times,
            safety: 0.9,
            dt_max: 0.1,
            method: Method::SspRk2,
        }
    }

    pub fn with_output_spacing(self, h: f64) -> Result<Self> {
        check_param("output_spacing", h, h > 0.0, "output_spacing > 0")?;
        let n = (self.t_end / h).round() as usize;
        let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * h).filter(|t| *t < self.t_end).collect();
        times.push(self.t_end);
        self.with_output_times(times)
    }

    /// Log-spaced snapshots from `t_first` to `t_end`, plus `t = 0`.
    pub fn with_log_output(self, t_first: f64, count: usize) -> Result<Self> {
        check_param(
            "t_first",
            t_first,
            t_first > 0.0 && t_first < self.t_end,
            "0 < t_first < t_end",
        )?;
        if count < 2 {
            return Err(Error::Parameter {
                name: "count",
                value: count as f64,
                allowed: "at least 2 log-spaced outputs",
            });
        }
        let ratio = self.t_end / t_first;
        let mut times = vec![0.0];
        times.extend((0..count - 1).map(|k| t_first * ratio.powf(k as f64 / (count - 1) as f64)));
        times.push(self.t_end);
        self.with_output_times(times)
    }

    pub fn with_output_times(mut self, mut times: Vec<f64>) -> Result<Self> {
        if let Some(&t) = times.iter().find(|t| !(**t >= 0.0 && **t <= self.t_end)) {
            return Err(Error::Parameter {
                name: "output_times",
                value: t,
                allowed: "times within [0, t_end]",
            });
        }
        times.push(0.0);
        times.push(self.t_end);
        times.sort_by(f64::total_cmp);
        times.dedup();
        self.output_times = times;
        Ok(self)
    }

    pub fn with_safety(mut self, safety: f64) -> Result<Self> {
        check_param("safety", safety, safety > 0.0 && safety <= 1.0, "safety in (0, 1]")?;
        self.safety = safety;
        Ok(self)
    }

    pub fn with_dt_max(mut self, dt_max: f64) -> Result<Self> {
        check_param("dt_max", dt_max, dt_max > 0.0, "dt_max > 0")?;
        self.dt_max = dt_max;
        Ok(self)
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_param("t_end", self.t_end, self.t_end >= 0.0, "t_end >= 0")?;
        check_param(
            "safety",
            self.safety,
            self.safety > 0.0 && self.safety <= 1.0,
            "safety in (0, 1]",
        )?;
        check_param("dt_max", self.dt_max, self.dt_max > 0.0, "dt_max > 0")?;
        let t = &self.output_times;
        if t.first() != Some(&0.0) || t.last() != Some(&self.t_end) || t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter {
                name: "output_times",
                value: self.t_end,
                allowed: "strictly increasing times from 0 to t_end",
            });
        }
        Ok(())
    }
}

/// Largest step that keeps every explicit stage nonnegative, times the
/// safety factor, capped at `dt_max`.
pub fn stable_dt(disc: &Discretization, xi: &[f64], safety: f64, dt_max: f64) -> f64 {
    let lambda = disc.loss_coefficients(xi).into_iter().fold(0.0, f64::max);
    let widths = disc.grid().widths();
    let g = disc.growth_at_edges();
    let cfl = widths
        .iter()
        .enumerate()
        .map(|(i, d)| d / g[i + 1].max(GROWTH_EPS))
        .fold(f64::INFINITY, f64::min);
    let bound = if lambda > 0.0 { cfl.min(1.0 / lambda) } else { cfl };
    (safety * bound).min(dt_max)
}

/// Snapshots, their moments, and step statistics of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    snapshots: Vec<StateVector>,
    moments: Vec<MomentRecord>,
    pub steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn snapshots(&self) -> &[StateVector] {
        &self.snapshots
    }

    pub fn moments(&self) -> &[MomentRecord] {
        &self.moments
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn initial(&self) -> &StateVector {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &StateVector {
        &self.snapshots[self.snapshots.len() - 1]
    }

    /// Index of the snapshot at `t`, matched to a relative `1e-12`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * t.abs().max(1.0);
        self.snapshots
            .iter()
            .position(|s| (s.t - t).abs() <= tol)
            .ok_or(Error::TimeLookup(t))
    }

    pub fn at(&self, t: f64) -> Result<&StateVector> {
        Ok(&self.snapshots[self.index_of(t)?])
    }
}

/// Integrates from `initial` through every output time of `stepper`.
pub fn run(disc: &Discretization, initial: StateVector, stepper: &StepperConfig) -> Result<Trajectory> {
    stepper.validate()?;
    if !initial.same_grid(&disc.zero_state()) {
        return Err(Error::GridMismatch);
    }
    let mut state = disc.state(initial.xi.clone())?;
    state.t = initial.t;
    state.ledger = initial.ledger;
    let t0 = state.t;

    let mut snapshots = vec![state.clone()];
    let mut steps = 0;
    let mut rejected = 0;
    for &target in stepper.output_times.iter().skip(1) {
        let target = t0 + target;
        while state.t < target {
            let mut dt = stable_dt(disc, &state.xi, stepper.safety, stepper.dt_max);
            let remaining = target - state.t;
            // Land exactly on the output time; avoid a sliver step after it.
            let landing = dt >= remaining * (1.0 - 1e-12);
            if landing {
                dt = remaining;
            }
            let mut retries = 0;
            loop {
                match step(disc, &state, dt, stepper.method) {
                    Ok(mut next) => {
                        next.t = if landing && retries == 0 { target } else { state.t + dt };
                        state = next;
                        break;
                    }
                    Err(e @ Error::Stability { .. }) if retries >= MAX_RETRIES => return Err(e),
                    Err(Error::Stability { .. }) => {
                        retries += 1;
                        rejected += 1;
                        dt *= 0.5;
                    }
                    Err(e) => return Err(e),
                }
            }
            steps += 1;
        }
        snapshots.push(state.clone());
    }
    let moments = snapshots.iter().map(MomentRecord::from_state).collect();
    Ok(Trajectory {
        snapshots,
        moments,
        steps,
        rejected_steps: rejected,
    })
}

/// One explicit step of size `dt`. Does not advance `t`.
pub fn step(disc: &Discretization, state: &StateVector, dt: f64, method: Method) -> Result<StateVector> {
    let r0 = disc.rhs(&state.xi)?;
    let f0 = r0.total();
    let mut next = state.clone();
    match method {
        Method::Euler => {
            for (v, f) in next.xi.iter_mut().zip(&f0) {
                *v += dt * f;
            }
            clamp(&mut next, disc, state.t + dt)?;
            next.ledger.accumulate(&r0.boundary, dt);
        }
        Method::SspRk2 => {
            let mut stage: Vec<f64> = state.xi.iter().zip(&f0).map(|(v, f)| v + dt * f).collect();
            let max = stage.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let (x, d) = (disc.grid().pivots(), disc.grid().widths());
            let mut stage_clamped = 0.0;
            for (i, v) in stage.iter_mut().enumerate() {
                if *v < 0.0 {
                    if *v < -CLAMP_TOLERANCE * max {
                        return Err(stability(state.t + dt, i, *v, max));
                    }
                    stage_clamped += -*v * x[i] * d[i];
                    *v = 0.0;
                }
            }
            // The second stage is only positive if dt also respects the bound
            // at the intermediate state.
            let lambda = disc.loss_coefficients(&stage).into_iter().fold(0.0, f64::max);
            if dt * lambda > 1.0 {
                let (cell, _) = disc
                    .loss_coefficients(&stage)
                    .into_iter()
                    .enumerate()
                    .fold((0, 0.0), |b, (i, l)| if l > b.1 { (i, l) } else { b });
                return Err(stability(state.t + dt, cell, -dt * lambda, 1.0));
            }
            let r1 = disc.rhs(&stage)?;
            let f1 = r1.total();
            for i in 0..next.xi.len() {
                next.xi[i] = 0.5 * state.xi[i] + 0.5 * (stage[i] + dt * f1[i]);
            }
            clamp(&mut next, disc, state.t + dt)?;
            // The final combination carries half of the first stage.
            next.ledger.clamped_mass += 0.5 * stage_clamped;
            next.ledger
                .accumulate(&BoundaryRates::average(&r0.boundary, &r1.boundary), dt);
        }
    }
    Ok(next)
}

fn stability(t: f64, cell: usize, value: f64, max: f64) -> Error {
    Error::Stability { t, cell, value, max }
}

fn clamp(state: &mut StateVector, disc: &Discretization, t: f64) -> Result<()> {
    let max = state.xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let x = disc.grid().pivots();
    let d = disc.grid().widths();
    for i in 0..state.xi.len() {
        let v = state.xi[i];
        if !v.is_finite() {
            return Err(stability(t, i, v, max));
        }
        if v < 0.0 {
            if v < -CLAMP_TOLERANCE * max {
                return Err(stability(t, i, v, max));
            }
            state.xi[i] = 0.0;
            state.ledger.clamp_count += 1;
            state.ledger.clamped_mass += -v * x[i] * d[i];
        }
    }
    Ok(())
}
