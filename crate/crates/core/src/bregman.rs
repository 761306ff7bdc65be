//! Split Bregman iteration for the total variation resolvent
//!
//! ```text
//! min_v (μ/2)‖v − u‖² + ‖σ(∇v)‖₁.
//! ```
//!
//! One cycle solves `(μ − λΔ)v = μu + λ div(b − d)` approximately with two Gauss–Seidel passes,
//! then sets `d = shrink_σ(∇v + b, 1/λ)` and `b ← b + ∇v − d`. Since `b` ends up as the Wulff
//! projection of `∇v + b`, the field `λb` is a discrete Cahn–Hoffman field at every iterate.

use crate::anisotropy::{Anisotropy, Kind};
use crate::error::{Error, Result};
use crate::mesh::{Operators, ScalarField, VectorField};

/// Gauss–Seidel passes per `v`-subproblem.
pub const GS_PASSES: usize = 2;

/// Default cap on Bregman iterations per time step.
pub const DEFAULT_MAX_ITER: usize = 5000;

/// Default stopping tolerance: `1e-5` in two dimensions, `1e-4 √M` in three.
pub fn default_btol(dim: usize, m: usize) -> f64 {
    if dim >= 3 {
        1e-4 * (m as f64).sqrt()
    } else {
        1e-5
    }
}

/// Iterates `(v, d, b)` of the split Bregman method and its parameters.
#[derive(Clone, Debug)]
pub struct BregmanState {
    pub v: ScalarField,
    pub d: VectorField,
    pub b: VectorField,
    pub mu: f64,
    pub lambda: f64,
    pub btol: f64,
    pub iterations_used: usize,
    pub converged: bool,
    pub last_delta: f64,
    scratch: Scratch,
}

#[derive(Clone, Debug, Default)]
struct Scratch {
    rhs: Vec<f64>,
    div: Vec<f64>,
    vec: Vec<f64>,
    v_old: Vec<f64>,
}

impl BregmanState {
    /// Cold state `v = 0, d = b = 0`.
    pub fn new(ops: &Operators, mu: f64, lambda: f64, btol: f64) -> Result<Self> {
        for (name, x) in [("mu", mu), ("lambda", lambda), ("btol", btol)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")));
            }
        }
        Ok(BregmanState {
            v: ScalarField::zeros(*ops.grid()),
            d: ops.zero_vectors(),
            b: ops.zero_vectors(),
            mu,
            lambda,
            btol,
            iterations_used: 0,
            converged: false,
            last_delta: f64::INFINITY,
            scratch: Scratch::default(),
        })
    }

    /// Resets `d` and `b` to zero.
    pub fn cold_start(&mut self) {
        self.d.data_mut().fill(0.0);
        self.b.data_mut().fill(0.0);
    }
}

/// One in-place Gauss–Seidel pass for `(μ − λΔ)v = rhs`.
pub fn gauss_seidel_pass(
    v: &mut ScalarField,
    rhs: &ScalarField,
    mu: f64,
    lambda: f64,
    ops: &Operators,
) {
    ops.gauss_seidel(v.values_mut(), rhs.values(), mu, lambda);
}

/// `d_i = shrink_σ(ξ_i, 1/λ)` for every entry.
pub fn d_update(grad_plus_b: &VectorField, sigma: &Anisotropy, lambda: f64) -> VectorField {
    let mut out = grad_plus_b.clone();
    let s = 1.0 / lambda;
    for (o, x) in out.data_mut().chunks_exact_mut(grad_plus_b.dim()).zip(grad_plus_b.iter()) {
        sigma.shrink_into(x, s, o);
    }
    out
}

/// One split Bregman cycle; returns `Δ = ‖v_{k+1} − v_k‖` (unweighted ℓ² over nodes).
pub fn bregman_iteration(
    state: &mut BregmanState,
    u_eff: &ScalarField,
    ops: &Operators,
    sigma: &Anisotropy,
) -> Result<f64> {
    iterate(state, u_eff, ops, sigma, false)
}

/// With `fused`, the scratch vector already holds `b − d` from the previous cycle.
fn iterate(
    state: &mut BregmanState,
    u_eff: &ScalarField,
    ops: &Operators,
    sigma: &Anisotropy,
    fused: bool,
) -> Result<f64> {
    let nodes = ops.grid().node_count();
    let n = ops.grid().dim();
    let (mu, lambda) = (state.mu, state.lambda);
    let sc = &mut state.scratch;
    sc.rhs.resize(nodes, 0.0);
    sc.div.resize(nodes, 0.0);
    sc.vec.resize(state.d.data().len(), 0.0);

    if !fused {
        for ((t, b), d) in sc.vec.iter_mut().zip(state.b.data()).zip(state.d.data()) {
            *t = b - d;
        }
    }
    ops.div_into(&sc.vec, &mut sc.div);
    for ((r, u), dv) in sc.rhs.iter_mut().zip(u_eff.values()).zip(&sc.div) {
        *r = mu * u + lambda * dv;
    }

    sc.v_old.clear();
    sc.v_old.extend_from_slice(state.v.values());
    for _ in 0..GS_PASSES {
        ops.gauss_seidel(state.v.values_mut(), &sc.rhs, mu, lambda);
    }

    ops.grad_into(state.v.values(), &mut sc.vec);
    let s = 1.0 / lambda;
    let (d, b) = (state.d.data_mut(), state.b.data_mut());
    match (n, sigma.kind()) {
        (2, Kind::Cubic) => update::<2>(&mut sc.vec, d, b, |x, o| {
            for k in 0..2 {
                o[k] = x[k].clamp(-s, s);
            }
        }),
        (3, Kind::Cubic) => update::<3>(&mut sc.vec, d, b, |x, o| {
            for k in 0..3 {
                o[k] = x[k].clamp(-s, s);
            }
        }),
        (3, Kind::Cylindrical { base, axial_weight }) if *base.kind() == Kind::Cubic => {
            let sz = s * axial_weight;
            update::<3>(&mut sc.vec, d, b, |x, o| {
                o[0] = x[0].clamp(-s, s);
                o[1] = x[1].clamp(-s, s);
                o[2] = x[2].clamp(-sz, sz);
            })
        }
        (2, _) => update::<2>(&mut sc.vec, d, b, |x, o| sigma.project_into(x, s, o)),
        (3, _) => update::<3>(&mut sc.vec, d, b, |x, o| sigma.project_into(x, s, o)),
        _ => update::<1>(&mut sc.vec, d, b, |x, o| sigma.project_into(x, s, o)),
    }

    let delta = state
        .v
        .values()
        .iter()
        .zip(&sc.v_old)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if !delta.is_finite() {
        return Err(Error::NonFinite { iteration: state.iterations_used });
    }
    Ok(delta)
}

/// `ξ = ∇v + b`, `b ← P(ξ)`, `d ← ξ − b` for every entry; `grad` is overwritten by `b − d`.
fn update<const N: usize>(
    grad: &mut [f64],
    d: &mut [f64],
    b: &mut [f64],
    project: impl Fn(&[f64; N], &mut [f64; N]),
) {
    for ((g, d), b) in grad.chunks_exact_mut(N).zip(d.chunks_exact_mut(N)).zip(b.chunks_exact_mut(N)) {
        let b: &mut [f64; N] = b.try_into().expect("chunk of N");
        let mut xi = [0.0; N];
        for k in 0..N {
            xi[k] = g[k] + b[k];
        }
        project(&xi, b);
        for k in 0..N {
            d[k] = xi[k] - b[k];
            g[k] = b[k] - d[k];
        }
    }
}

/// Outcome of one resolvent solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventReport {
    pub iterations: usize,
    pub delta: f64,
    pub converged: bool,
}

/// Iterates from `v = u_eff`, keeping `d` and `b` from the previous call, until `Δ < ε_btol` or
/// `max_iter` cycles.
pub fn solve_resolvent(
    u_eff: &ScalarField,
    state: &mut BregmanState,
    ops: &Operators,
    sigma: &Anisotropy,
    max_iter: usize,
) -> Result<ResolventReport> {
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    state.v.values_mut().copy_from_slice(u_eff.values());
    state.converged = false;
    let mut delta = f64::INFINITY;
    let mut k = 0;
    while k < max_iter {
        delta = iterate(state, u_eff, ops, sigma, k > 0)?;
        state.iterations_used += 1;
        k += 1;
        if delta < state.btol {
            state.converged = true;
            break;
        }
    }
    state.last_delta = delta;
    Ok(ResolventReport { iterations: k, delta, converged: state.converged })
}

/// Worst-case discrete Cahn–Hoffman residuals of `λb` against `d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CahnHoffmanCheck {
    /// `max_i σ°(λ b_i)`.
    pub max_polar: f64,
    /// `min_i λ b_i·d_i / σ(d_i)` over entries with `|d_i| > 1e-8`, or 1 if there are none.
    pub min_ratio: f64,
}

impl CahnHoffmanCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_polar <= 1.0 + tol && self.min_ratio >= 1.0 - tol
    }
}

pub fn cahn_hoffman_check(state: &BregmanState, sigma: &Anisotropy) -> CahnHoffmanCheck {
    let n = state.b.dim();
    let mut z = [0.0; 3];
    let mut max_polar: f64 = 0.0;
    let mut min_ratio: f64 = 1.0;
    for (b, d) in state.b.iter().zip(state.d.iter()) {
        for k in 0..n {
            z[k] = state.lambda * b[k];
        }
        max_polar = max_polar.max(sigma.polar(&z[..n]));
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            let zd: f64 = z[..n].iter().zip(d).map(|(a, b)| a * b).sum();
            min_ratio = min_ratio.min(zd / sigma.sigma(d));
        }
    }
    CahnHoffmanCheck { max_polar, min_ratio }
}

/// `‖μ(v − u) − λ div b‖` (unweighted ℓ²).
pub fn euler_lagrange_residual(state: &BregmanState, u_eff: &ScalarField, ops: &Operators) -> f64 {
    let div = ops.div(&state.b);
    state
        .v
        .values()
        .iter()
        .zip(u_eff.values())
        .zip(div.values())
        .map(|((v, u), dv)| {
            let r = state.mu * (v - u) - state.lambda * dv;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// `(μ/2)Σ(v − u)² + w Σ σ(∇v)`, per unit node volume.
pub fn objective(
    v: &ScalarField,
    u_eff: &ScalarField,
    mu: f64,
    ops: &Operators,
    sigma: &Anisotropy,
) -> f64 {
    let fidelity: f64 =
        v.values().iter().zip(u_eff.values()).map(|(a, b)| (a - b) * (a - b)).sum();
    let g = ops.grad(v);
    let tv: f64 = g.iter().map(|p| sigma.sigma(p)).sum();
    0.5 * mu * fidelity + ops.vector_weight() * tv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Discretization, Grid, Layout};

    fn setup(dim: usize, m: usize, disc: Discretization, mu: f64) -> (Operators, BregmanState) {
        let ops = Operators::new(Grid::new(dim, m).unwrap(), disc).unwrap();
        let state = BregmanState::new(&ops, mu, mu / 8.0, 1e-10).unwrap();
        (ops, state)
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let (ops, mut state) = setup(2, 8, Discretization::Fdm, 100.0);
        let u = ScalarField::zeros(*ops.grid());
        let delta = bregman_iteration(&mut state, &u, &ops, &Anisotropy::cubic(2)).unwrap();
        assert_eq!(delta, 0.0);
        assert!(state.v.values().iter().all(|x| *x == 0.0));
        assert!(state.d.data().iter().all(|x| *x == 0.0));
        assert!(state.b.data().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn constant_data_converges_immediately() {
        for disc in [Discretization::Fdm, Discretization::Fem] {
            let (ops, mut state) = setup(2, 8, disc, 100.0);
            let u = ScalarField::constant(*ops.grid(), 5.0);
            let report =
                solve_resolvent(&u, &mut state, &ops, &Anisotropy::isotropic(2), 10).unwrap();
            assert!(report.converged && report.iterations <= 2);
            assert!(state.v.values().iter().all(|x| (x - 5.0).abs() < 1e-12));
            assert!(state.d.data().iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn d_update_examples() {
        let cubic = Anisotropy::cubic(3);
        let x = VectorField::from_data(Layout::PerNode, 3, vec![2.0, 0.5, -3.0, 0.1, 0.2, -0.3])
            .unwrap();
        let d = d_update(&x, &cubic, 1.0);
        assert_eq!(d.data(), &[1.0, 0.0, -2.0, 0.0, 0.0, 0.0]);

        let iso = Anisotropy::isotropic(2);
        let x = VectorField::from_data(Layout::PerElement, 2, vec![0.6, 0.8]).unwrap();
        let d = d_update(&x, &iso, 2.0);
        assert!((d.get(0)[0] - 0.3).abs() < 1e-15 && (d.get(0)[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        let ops = Operators::new(Grid::new(2, 4).unwrap(), Discretization::Fdm).unwrap();
        assert!(BregmanState::new(&ops, 0.0, 1.0, 1e-5).is_err());
        assert!(BregmanState::new(&ops, 1.0, f64::NAN, 1e-5).is_err());
        let mut state = BregmanState::new(&ops, 1.0, 1.0, 1e-5).unwrap();
        let u = ScalarField::zeros(*ops.grid());
        assert!(solve_resolvent(&u, &mut state, &ops, &Anisotropy::cubic(2), 0).is_err());
    }

    #[test]
    fn non_finite_data_is_reported() {
        let (ops, mut state) = setup(2, 4, Discretization::Fdm, 10.0);
        let mut u = ScalarField::zeros(*ops.grid());
        u.values_mut()[3] = f64::NAN;
        let err = bregman_iteration(&mut state, &u, &ops, &Anisotropy::cubic(2));
        assert!(matches!(err, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn default_tolerances() {
        assert_eq!(default_btol(2, 64), 1e-5);
        assert!((default_btol(3, 64) - 8e-4).abs() < 1e-18);
    }

    #[test]
    fn shrinking_square_step_is_optimal() {
        // one minimizing movement from the Euclidean distance to a square of side 0.8
        let mu = 1e4;
        let ops = Operators::new(Grid::new(2, 64).unwrap(), Discretization::Fdm).unwrap();
        let mut state = BregmanState::new(&ops, mu, mu / 8.0, 1e-5).unwrap();
        let u = ScalarField::from_fn(*ops.grid(), |x| {
            let q = [x[0].abs() - 0.4, x[1].abs() - 0.4];
            let outside = q[0].max(0.0).hypot(q[1].max(0.0));
            outside + q[0].max(q[1]).min(0.0)
        });
        let sigma = Anisotropy::cubic(2);
        let report = solve_resolvent(&u, &mut state, &ops, &sigma, DEFAULT_MAX_ITER).unwrap();
        assert!(report.converged);
        assert!(cahn_hoffman_check(&state, &sigma).holds(1e-5));

        // a warm start from the previous d, b needs fewer cycles for nearby data
        let cold_iterations = report.iterations;
        let u2 = state.v.clone();
        let mut cold = BregmanState::new(&ops, mu, mu / 8.0, 1e-5).unwrap();
        let cold2 = solve_resolvent(&u2, &mut cold, &ops, &sigma, DEFAULT_MAX_ITER).unwrap();
        let warm2 = solve_resolvent(&u2, &mut state, &ops, &sigma, DEFAULT_MAX_ITER).unwrap();
        assert!(warm2.iterations < cold2.iterations, "{warm2:?} vs {cold2:?}");
        assert!(cold_iterations > 1);
    }

    #[test]
    fn step_data_is_soft_shrunk() {
        // rows are independent 1D problems; each plateau of k nodes moves by 1/(μ k Δx)
        let mu = 100.0;
        let grid = Grid::new(2, 7).unwrap();
        let ops = Operators::new(grid, Discretization::Fdm).unwrap();
        let u = ScalarField::from_fn(grid, |x| if x[0] < 0.0 { 0.0 } else { 1.0 });
        for sigma in [Anisotropy::cubic(2), Anisotropy::isotropic(2)] {
            let mut state = BregmanState::new(&ops, mu, mu / 8.0, 1e-12).unwrap();
            let report = solve_resolvent(&u, &mut state, &ops, &sigma, 100_000).unwrap();
            assert!(report.converged);
            let shift = 1.0 / (mu * 4.0 * grid.spacing());
            for (v, u) in state.v.values().iter().zip(u.values()) {
                let exact = if *u == 0.0 { shift } else { 1.0 - shift };
                assert!((v - exact).abs() < 1e-6, "{sigma}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn euler_lagrange_residual_vanishes_at_tight_tolerance() {
        let mu = 1e4;
        let ops = Operators::new(Grid::new(2, 32).unwrap(), Discretization::Fdm).unwrap();
        let sigma = Anisotropy::cubic(2);
        let u = ScalarField::from_fn(*ops.grid(), |x| x[0].abs().max(x[1].abs()) - 0.3);
        let mut state = BregmanState::new(&ops, mu, mu / 8.0, 1e-10).unwrap();
        let report = solve_resolvent(&u, &mut state, &ops, &sigma, 200_000).unwrap();
        assert!(report.converged);
        let residual = euler_lagrange_residual(&state, &u, &ops);
        let scale = mu
            * state.v.values().iter().zip(u.values()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(residual <= 1e-4 * scale, "{residual} vs {scale}");
    }
}
