//! The minimizing movements loop: redistance, resolvent solve, next level set.

use std::fmt;
use std::sync::Arc;

use log::{debug, warn};

use crate::anisotropy::Anisotropy;
use crate::bregman::{
    cahn_hoffman_check, default_btol, solve_resolvent, BregmanState, CahnHoffmanCheck,
    DEFAULT_MAX_ITER,
};
use crate::error::{Error, Result};
use crate::mesh::{Discretization, Grid, Operators, ScalarField};
use crate::redistance::{Redistancer, SignedDistance};

/// Forcing `f(x, t)`; positive values grow the set.
pub type Forcing = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct FlowConfig {
    pub sigma: Anisotropy,
    /// Mobility `β`, also the metric of the signed distance.
    pub beta: Anisotropy,
    pub h: f64,
    pub m: usize,
    pub discretization: Discretization,
    /// `λ = λ_ratio · μ`.
    pub lambda_ratio: f64,
    pub btol: f64,
    pub t_max: f64,
    pub redistance_period: usize,
    pub max_iter: usize,
    pub forcing: Option<Forcing>,
}

impl fmt::Debug for FlowConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowConfig")
            .field("sigma", &self.sigma)
            .field("beta", &self.beta)
            .field("h", &self.h)
            .field("m", &self.m)
            .field("discretization", &self.discretization)
            .field("lambda_ratio", &self.lambda_ratio)
            .field("btol", &self.btol)
            .field("t_max", &self.t_max)
            .field("redistance_period", &self.redistance_period)
            .field("max_iter", &self.max_iter)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl FlowConfig {
    /// Defaults: FDM, `λ = μ/8`, the dimension's default Bregman tolerance, redistance every
    /// step, no forcing, `t_max = ∞`.
    pub fn new(sigma: Anisotropy, beta: Anisotropy, h: f64, m: usize) -> Self {
        let btol = default_btol(sigma.dim(), m);
        FlowConfig {
            sigma,
            beta,
            h,
            m,
            discretization: Discretization::Fdm,
            lambda_ratio: 0.125,
            btol,
            t_max: f64::INFINITY,
            redistance_period: 1,
            max_iter: DEFAULT_MAX_ITER,
            forcing: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn mu(&self) -> f64 {
        1.0 / self.h
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_ratio * self.mu()
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim(), self.m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidParameter(s));
        if self.beta.dim() != self.sigma.dim() {
            return bad(format!(
                "anisotropy is {}-dimensional but mobility is {}-dimensional",
                self.sigma.dim(),
                self.beta.dim()
            ));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("time step must be positive, got {}", self.h));
        }
        if !(self.lambda_ratio > 0.0 && self.lambda_ratio.is_finite()) {
            return bad(format!("lambda ratio must be positive, got {}", self.lambda_ratio));
        }
        if !(self.btol > 0.0) {
            return bad(format!("btol must be positive, got {}", self.btol));
        }
        if self.redistance_period == 0 {
            return bad("redistance period must be at least 1".into());
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if self.t_max.is_nan() || self.t_max < 0.0 {
            return bad(format!("t_max must be nonnegative, got {}", self.t_max));
        }
        self.grid().map(|_| ())
    }
}

/// Diagnostics of one time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    /// Index of the step, counting from 0.
    pub step: usize,
    /// Time after the step.
    pub t: f64,
    pub iterations: usize,
    pub delta: f64,
    pub converged: bool,
    pub redistanced: bool,
    pub cahn_hoffman: CahnHoffmanCheck,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    Stepped(StepReport),
    /// `v > 0` everywhere; nothing was solved.
    Extinct,
}

/// A running flow: configuration, operators and the Bregman state carried between steps.
#[derive(Clone, Debug)]
pub struct Flow {
    cfg: FlowConfig,
    ops: Operators,
    redist: Redistancer,
    state: BregmanState,
    v: ScalarField,
    step: usize,
}

impl Flow {
    pub fn new(cfg: FlowConfig, v0: ScalarField) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        if *v0.grid() != grid {
            return Err(Error::InvalidParameter(format!(
                "initial field lives on {:?}, configuration asks for {:?}",
                v0.grid(),
                grid
            )));
        }
        if !v0.is_finite() {
            return Err(Error::InvalidParameter("initial field is not finite".into()));
        }
        let ops = Operators::new(grid, cfg.discretization)?;
        let redist = Redistancer::new(grid, cfg.beta.clone())?;
        let state = BregmanState::new(&ops, cfg.mu(), cfg.lambda(), cfg.btol)?;
        Ok(Flow { cfg, ops, redist, state, v: v0, step: 0 })
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid {
        self.ops.grid()
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn state(&self) -> &BregmanState {
        &self.state
    }

    pub fn field(&self) -> &ScalarField {
        &self.v
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.h
    }

    /// No node has `v ≤ 0`.
    pub fn is_extinct(&self) -> bool {
        self.v.min() > 0.0
    }

    /// `w = signdist_β(v)` on redistance steps, else `v`. A full domain keeps `v`.
    fn distance(&self) -> (ScalarField, bool) {
        if self.step % self.cfg.redistance_period != 0 {
            return (self.v.clone(), false);
        }
        let init = self.redist.init_narrow_band(&self.v);
        match self.redist.fast_sweep(init) {
            SignedDistance::Field(w) => (w, true),
            SignedDistance::Full => {
                warn!("step {}: the set fills the whole domain; skipping redistance", self.step);
                (self.v.clone(), false)
            }
            SignedDistance::Empty => (self.v.clone(), false),
        }
    }

    /// One step `v_{m+1} = argmin (μ/2)‖v − (w − f/μ)‖² + ‖σ(∇v)‖₁`.
    pub fn step(&mut self) -> Result<StepOutcome> {
        if self.is_extinct() {
            return Ok(StepOutcome::Extinct);
        }
        let (mut u, redistanced) = self.distance();
        if let Some(f) = &self.cfg.forcing {
            let t = self.time();
            let grid = *self.grid();
            let h = self.cfg.h;
            for (idx, val) in u.values_mut().iter_mut().enumerate() {
                *val -= h * f(&grid.coord(idx)[..grid.dim()], t);
            }
        }
        let report = solve_resolvent(&u, &mut self.state, &self.ops, &self.cfg.sigma, self.cfg.max_iter)?;
        if !report.converged {
            warn!(
                "step {}: resolvent stopped after {} iterations with delta {:e}",
                self.step, report.iterations, report.delta
            );
        }
        self.v.values_mut().copy_from_slice(self.state.v.values());
        let out = StepReport {
            step: self.step,
            t: (self.step + 1) as f64 * self.cfg.h,
            iterations: report.iterations,
            delta: report.delta,
            converged: report.converged,
            redistanced,
            cahn_hoffman: cahn_hoffman_check(&self.state, &self.cfg.sigma),
        };
        self.step += 1;
        debug!(
            "step {} t={:.6} iterations={} delta={:.3e}",
            out.step, out.t, out.iterations, out.delta
        );
        Ok(StepOutcome::Stepped(out))
    }
}

/// One step from `v_m` with a caller-held Bregman state. Builds operators on every call;
/// [`Flow`] keeps them.
pub fn flow_step(
    v: &ScalarField,
    state: &mut BregmanState,
    cfg: &FlowConfig,
    m: usize,
) -> Result<(ScalarField, StepOutcome)> {
    let mut flow = Flow::new(cfg.clone(), v.clone())?;
    flow.step = m;
    std::mem::swap(&mut flow.state, state);
    let result = flow.step();
    std::mem::swap(&mut flow.state, state);
    let out = result?;
    Ok((flow.v, out))
}

/// Snapshots, extinction estimate and per-step diagnostics of a run.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    /// `(t, v)` at the requested times, in increasing time.
    pub snapshots: Vec<(f64, ScalarField)>,
    /// Midpoint of the last step with `min v ≤ 0` and the first without.
    pub extinction: Option<f64>,
    pub steps: Vec<StepReport>,
}

impl Trajectory {
    pub fn all_converged(&self) -> bool {
        self.steps.iter().all(|s| s.converged)
    }

    pub fn total_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.iterations).sum()
    }
}

/// Snapshot step indices: each time rounded to the nearest step, deduplicated, sorted.
fn snapshot_steps(times: &[f64], h: f64) -> Vec<usize> {
    let mut steps: Vec<usize> =
        times.iter().filter(|t| t.is_finite() && **t >= 0.0).map(|t| (t / h).round() as usize).collect();
    steps.sort_unstable();
    steps.dedup();
    steps
}

/// Runs until `t_max` or extinction, calling `observe` after every step.
pub fn run_flow_with(
    v0: ScalarField,
    cfg: &FlowConfig,
    snapshot_times: &[f64],
    mut observe: impl FnMut(&Flow, &StepReport),
) -> Result<Trajectory> {
    let h = cfg.h;
    let mut flow = Flow::new(cfg.clone(), v0)?;
    let wanted = snapshot_steps(snapshot_times, h);
    let last = (cfg.t_max / h + 1e-9).floor();
    let last = if last.is_finite() { last as usize } else { usize::MAX };
    let mut traj = Trajectory::default();
    let mut next = 0;
    let record = |flow: &Flow, traj: &mut Trajectory, next: &mut usize| {
        while *next < wanted.len() && wanted[*next] <= flow.steps_taken() {
            if wanted[*next] == flow.steps_taken() {
                traj.snapshots.push((wanted[*next] as f64 * h, flow.field().clone()));
            }
            *next += 1;
        }
    };
    record(&flow, &mut traj, &mut next);
    if flow.is_extinct() {
        traj.extinction = Some(0.0);
    }
    while traj.extinction.is_none() && flow.steps_taken() < last {
        match flow.step()? {
            StepOutcome::Stepped(rep) => {
                observe(&flow, &rep);
                traj.steps.push(rep);
                record(&flow, &mut traj, &mut next);
                if flow.is_extinct() {
                    traj.extinction = Some(flow.time() - 0.5 * h);
                }
            }
            StepOutcome::Extinct => unreachable!("checked before stepping"),
        }
    }
    // later snapshots of an extinct run show the empty set
    if traj.extinction.is_some() {
        for &s in &wanted[next..] {
            if s <= last {
                traj.snapshots.push((s as f64 * h, flow.field().clone()));
            }
        }
    }
    Ok(traj)
}

pub fn run_flow(v0: ScalarField, cfg: &FlowConfig, snapshot_times: &[f64]) -> Result<Trajectory> {
    run_flow_with(v0, cfg, snapshot_times, |_, _| {})
}

/// Snapshot times `0, dt, 2dt, …` up to `t_end`.
pub fn snapshot_grid(dt: f64, t_end: f64) -> Vec<f64> {
    let count = (t_end / dt + 1e-9).floor() as usize;
    (0..=count).map(|k| k as f64 * dt).collect()
}
