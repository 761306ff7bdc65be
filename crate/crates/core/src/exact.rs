//! Reference solutions: shrinking cubes and Wulff shapes, the crystalline doughnut and the
//! sponge.
//!
//! Lengths of the doughnut `T_{r,R,ht} = {r ≤ σ̃°(x′) ≤ R, |x_n| ≤ ht}` are measured in the base
//! polar `σ̃°`. The sponge `S_{r,R}` is the cube `‖x‖∞ ≤ R` with the three axis tunnels
//! `{at least two |x_i| < r}` removed.

use crate::anisotropy::{Anisotropy, Kind};
use crate::error::{Error, Result};
use crate::mesh::{Grid, ScalarField};
use crate::ode::{integrate, Outcome};

/// Side length `L(t) = √(L₀² − 4(n−1)t)` of the shrinking cube, `None` once extinct.
pub fn cube_exact(l0: f64, n: usize, t: f64) -> Option<f64> {
    (t < cube_extinction_time(l0, n) * (1.0 - 1e-12)).then(|| (l0 * l0 - 4.0 * (n as f64 - 1.0) * t).sqrt())
}

/// `L₀²/(4(n−1))`.
pub fn cube_extinction_time(l0: f64, n: usize) -> f64 {
    l0 * l0 / (4.0 * (n as f64 - 1.0))
}

/// Scale `√(s₀² − 2(n−1)t)` of a Wulff shape moving by `V = σ(ν)κ_σ`, `None` once extinct.
pub fn wulff_exact(a: &Anisotropy, scale0: f64, t: f64) -> Option<f64> {
    (t < wulff_extinction_time(a.dim(), scale0) * (1.0 - 1e-12))
        .then(|| (scale0 * scale0 - 2.0 * (a.dim() as f64 - 1.0) * t).sqrt())
}

/// `s₀²/(2(n−1))`.
pub fn wulff_extinction_time(n: usize, scale0: f64) -> f64 {
    scale0 * scale0 / (2.0 * (n as f64 - 1.0))
}

/// The doughnut `T_{r,R,ht}` over a base anisotropy `σ̃`, with axial mobility `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusParams {
    pub r: f64,
    pub big_r: f64,
    pub ht: f64,
    pub base: Anisotropy,
    pub mu: f64,
}

impl TorusParams {
    pub fn new(r: f64, big_r: f64, ht: f64, base: Anisotropy, mu: f64) -> Result<Self> {
        if !(r > 0.0 && r < big_r && ht > 0.0 && mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "doughnut needs 0 < r < R, ht > 0, mu > 0 (got r={r}, R={big_r}, ht={ht}, mu={mu})"
            )));
        }
        Ok(TorusParams { r, big_r, ht, base, mu })
    }

    pub fn dim(&self) -> usize {
        self.base.dim() + 1
    }

    /// `γ = r/R`.
    pub fn gamma(&self) -> f64 {
        self.r / self.big_r
    }

    /// `λ = ht/R`.
    pub fn lambda(&self) -> f64 {
        self.ht / self.big_r
    }

    fn with(&self, big_r: f64, r: f64, ht: f64) -> Self {
        TorusParams { r, big_r, ht, base: self.base.clone(), mu: self.mu }
    }

    /// Coefficients `(a, b)` of `g(s) = a s^{1−n} + b`, fixed by `g(r)r = −1`, `g(R)R = 1`.
    pub fn coefficients(&self) -> (f64, f64) {
        let k = self.dim() as i32;
        let (r, big) = (self.r, self.big_r);
        let den = big.powi(k - 1) - r.powi(k - 1);
        let a = -big.powi(k - 2) * r.powi(k - 2) * (big + r) / den;
        let b = (big.powi(k - 2) + r.powi(k - 2)) / den;
        (a, b)
    }

    pub fn g(&self, s: f64) -> f64 {
        let (a, b) = self.coefficients();
        a * s.powi(1 - self.dim() as i32) + b
    }

    /// `ψ(x) = max(r − σ̃°(x′), σ̃°(x′) − R, |x_n| − ht)`.
    pub fn level_set(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let s = self.base.polar(&x[..n - 1]);
        (self.r - s).max(s - self.big_r).max(x[n - 1].abs() - self.ht)
    }

    /// Signed distance in the metric `max(σ̃°(x′), |x_n|/axial)`.
    pub fn beta_distance(&self, x: &[f64], axial: f64) -> f64 {
        let n = self.dim();
        let s = self.base.polar(&x[..n - 1]);
        (self.r - s).max(s - self.big_r).max((x[n - 1].abs() - self.ht) / axial)
    }

    /// Surface divergences of the Cahn–Hoffman field on the outer, inner and top facets.
    pub fn facet_divergences(&self) -> [f64; 3] {
        let k = self.dim() as f64 - 2.0;
        let (_, b) = self.coefficients();
        [k / self.big_r + 1.0 / self.ht, -k / self.r + 1.0 / self.ht, (k + 1.0) * b]
    }

    /// `(R′, r′, ht′)`.
    pub fn rates(&self) -> [f64; 3] {
        let n = self.dim() as i32;
        let k = f64::from(n - 2);
        let (r, big) = (self.r, self.big_r);
        [
            -k / big - 1.0 / self.ht,
            -k / r + 1.0 / self.ht,
            -f64::from(n - 1) * self.mu * (big.powi(n - 2) + r.powi(n - 2))
                / (big.powi(n - 1) - r.powi(n - 1)),
        ]
    }

    /// The Cahn–Hoffman field `z(x) = (g(σ̃°(x′))x′, x_n/ht)` at a surface point.
    pub fn cahn_hoffman(&self, x: &[f64]) -> Result<Vec<f64>> {
        let psi = self.level_set(x);
        if psi.abs() > 1e-9 {
            return Err(Error::NotOnSurface(psi));
        }
        let n = self.dim();
        let s = self.base.polar(&x[..n - 1]);
        let g = self.g(s);
        let mut z: Vec<f64> = x[..n - 1].iter().map(|c| g * c).collect();
        z.push(x[n - 1] / self.ht);
        Ok(z)
    }

    /// The outer normal at a point in the relative interior of a facet.
    pub fn normal(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let s = self.base.polar(&x[..n - 1]);
        let top = x[n - 1].abs() - self.ht;
        let mut nu = vec![0.0; n];
        if top >= (self.r - s).max(s - self.big_r) {
            nu[n - 1] = x[n - 1].signum();
            return nu;
        }
        let grad = self.base.polar_gradient(&x[..n - 1]);
        let sign = if s - self.big_r > self.r - s { 1.0 } else { -1.0 };
        let len = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        for k in 0..n - 1 {
            nu[k] = sign * grad[k] / len;
        }
        nu
    }
}

/// Why a doughnut evolution stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorusEvent {
    /// `r → 0`: the hole closes.
    HoleClosed,
    /// `R − r → 0`: the ring becomes infinitely thin.
    RingVanished,
    /// `ht → 0`.
    Flattened,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TorusEvolution {
    Running(TorusParams),
    Event { event: TorusEvent, t: f64, last: TorusParams },
}

/// Integrates `R′ = −(n−2)/R − 1/ht`, `r′ = −(n−2)/r + 1/ht`,
/// `ht′ = −(n−1)μ(R^{n−2} + r^{n−2})/(R^{n−1} − r^{n−1})` with RK4 up to time `t`.
pub fn torus_ode(params: &TorusParams, t: f64, dt: f64) -> TorusEvolution {
    let rhs = |_: f64, y: &[f64], out: &mut [f64]| {
        out.copy_from_slice(&params.with(y[0], y[1], y[2]).rates());
    };
    let hole = |_: f64, y: &[f64]| y[1];
    let ring = |_: f64, y: &[f64]| y[0] - y[1];
    let flat = |_: f64, y: &[f64]| y[2];
    let y0 = [params.big_r, params.r, params.ht];
    match integrate(&rhs, 0.0, &y0, t, dt, &[&hole, &ring, &flat]) {
        Outcome::Reached { y, .. } => TorusEvolution::Running(params.with(y[0], y[1], y[2])),
        Outcome::Event { index, t, y } => TorusEvolution::Event {
            event: [TorusEvent::HoleClosed, TorusEvent::RingVanished, TorusEvent::Flattened][index],
            t,
            last: params.with(y[0], y[1], y[2]),
        },
    }
}

/// The self-similar doughnut in three dimensions: `R = √(R₀² − 4t)`, `r = R/2`, `ht = R`,
/// `μ = 1/2`. `None` once extinct at `R₀²/4`.
pub fn torus_selfsimilar_exact(base: &Anisotropy, big_r0: f64, t: f64) -> Option<TorusParams> {
    (t < big_r0 * big_r0 / 4.0 * (1.0 - 1e-12)).then(|| {
        let big = (big_r0 * big_r0 - 4.0 * t).sqrt();
        TorusParams { r: big / 2.0, big_r: big, ht: big, base: base.clone(), mu: 0.5 }
    })
}

/// Residuals of the self-similarity conditions `λ = γ/((n−2)(1−γ))` and
/// `1 + γ + ⋯ + γ^{n−2} = (n−1)μ(1 + γ^{n−2})`.
pub fn torus_selfsimilar_residuals(gamma: f64, lambda: f64, mu: f64, n: usize) -> [f64; 2] {
    let k = n as i32 - 2;
    let sum: f64 = (0..=k).map(|j| gamma.powi(j)).sum();
    [
        lambda - gamma / (f64::from(k) * (1.0 - gamma)),
        sum - (n as f64 - 1.0) * mu * (1.0 + gamma.powi(k)),
    ]
}

/// `ξ* = (3 + √17)/2`, the positive root of `ξ² − 3ξ − 2`.
pub fn xi_star() -> f64 {
    0.5 * (3.0 + 17f64.sqrt())
}

/// `g(ξ) = ξ² − 3ξ − 2`; the ratio `ξ = R/r` obeys `dξ/ds = g(ξ)` in the sponge clock.
pub fn sponge_g(xi: f64) -> f64 {
    xi * xi - 3.0 * xi - 2.0
}

/// `c = (ξ − 3)/(ξ − 1)`.
pub fn sponge_c(xi: f64) -> f64 {
    (xi - 3.0) / (xi - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpongeRegime {
    /// `1 < ξ₀ < ξ*`: the bars thin out and vanish.
    Thinning,
    /// `ξ₀ = ξ*`: self-similar shrinking.
    SelfSimilar,
    /// `ξ₀ > ξ*`: the holes close and a cube remains.
    HoleClosing,
}

pub fn classify_sponge(xi0: f64) -> Result<SpongeRegime> {
    if !(xi0 > 1.0) {
        return Err(Error::InvalidParameter(format!("sponge ratio must exceed 1, got {xi0}")));
    }
    let g = sponge_g(xi0);
    Ok(if g.abs() <= 1e-9 {
        SpongeRegime::SelfSimilar
    } else if g < 0.0 {
        SpongeRegime::Thinning
    } else {
        SpongeRegime::HoleClosing
    })
}

/// Outer and inner facet curvatures `(κ_o, κ_i) = (−2/(R−r), (R−3r)/(r(R−r)))`, so that
/// `R′ = κ_o` and `r′ = −κ_i`.
pub fn sponge_curvatures(r: f64, big_r: f64) -> (f64, f64) {
    (-2.0 / (big_r - r), (big_r - 3.0 * r) / (r * (big_r - r)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpongeParams {
    pub r: f64,
    pub big_r: f64,
}

impl SpongeParams {
    pub fn new(r: f64, big_r: f64) -> Result<Self> {
        if !(r > 0.0 && r < big_r) {
            return Err(Error::InvalidParameter(format!("sponge needs 0 < r < R, got r={r}, R={big_r}")));
        }
        Ok(SpongeParams { r, big_r })
    }

    /// The sponge of outer half width `big_r` and ratio `xi`.
    pub fn from_ratio(big_r: f64, xi: f64) -> Result<Self> {
        Self::new(big_r / xi, big_r)
    }

    pub fn xi(&self) -> f64 {
        self.big_r / self.r
    }

    pub fn regime(&self) -> Result<SpongeRegime> {
        classify_sponge(self.xi())
    }
}

/// Shape of a sponge evolution at some time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpongeState {
    Sponge { r: f64, big_r: f64 },
    Cube { big_r: f64 },
    Extinct,
}

/// Event times of a sponge evolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpongeEvents {
    pub regime: SpongeRegime,
    /// `ξ → 1`.
    pub thinned: Option<f64>,
    /// `r → 0`.
    pub hole_closed: Option<f64>,
    /// Half width of the cube left when the holes close.
    pub cube_half_width: Option<f64>,
    pub extinction: f64,
}

/// Step in the sponge clock `s` with `dt/ds = r(R − r)`.
const SPONGE_DS: f64 = 1e-3;

/// Below this fraction of `R₀` a self-similar sponge is finished with the closed form.
const BLOW_DOWN: f64 = 0.05;

/// Integrates `R′ = −2/(R−r)`, `r′ = −(R−3r)/(r(R−r))` in the clock `s`, where it reads
/// `dR/ds = −2r`, `dr/ds = 3r − R`, `dt/ds = r(R − r)` and both events are transversal.
/// Stops at `t_target`, an event, or (self-similar regime) at blow-down.
fn sponge_run(params: &SpongeParams, t_target: f64) -> (Outcome, SpongeRegime) {
    let regime = params.regime().expect("validated ratio");
    let rhs = |_: f64, y: &[f64], out: &mut [f64]| {
        out[0] = -2.0 * y[1];
        out[1] = 3.0 * y[1] - y[0];
        out[2] = y[1] * (y[0] - y[1]);
    };
    let thin = |_: f64, y: &[f64]| y[0] - y[1];
    let hole = |_: f64, y: &[f64]| y[1];
    let target = |_: f64, y: &[f64]| t_target - y[2];
    let r0 = params.big_r;
    let blow = move |_: f64, y: &[f64]| {
        if regime == SpongeRegime::SelfSimilar {
            y[0] - BLOW_DOWN * r0
        } else {
            1.0
        }
    };
    let out = integrate(
        &rhs,
        0.0,
        &[params.big_r, params.r, 0.0],
        f64::INFINITY,
        SPONGE_DS,
        &[&thin, &hole, &target, &blow],
    );
    (out, regime)
}

pub fn sponge_events(params: &SpongeParams) -> SpongeEvents {
    let (out, regime) = sponge_run(params, f64::INFINITY);
    let mut ev = SpongeEvents {
        regime,
        thinned: None,
        hole_closed: None,
        cube_half_width: None,
        extinction: f64::NAN,
    };
    if let Outcome::Event { index, y, .. } = out {
        let t = y[2];
        match index {
            0 => {
                ev.thinned = Some(t);
                ev.extinction = t;
            }
            1 => {
                ev.hole_closed = Some(t);
                ev.cube_half_width = Some(y[0]);
                ev.extinction = t + y[0] * y[0] / 4.0;
            }
            _ => {
                let xi = y[0] / y[1];
                ev.extinction = t + y[1] * y[1] / (2.0 * sponge_c(xi));
            }
        }
    }
    ev
}

/// State of the sponge evolution at time `t`. After the holes close the cube follows
/// `R² = R_□² − 4(t − t_□)`.
pub fn sponge_ode(params: &SpongeParams, t: f64) -> SpongeState {
    let ev = sponge_events(params);
    if t >= ev.extinction {
        return SpongeState::Extinct;
    }
    if let (Some(tc), Some(rc)) = (ev.hole_closed, ev.cube_half_width) {
        if t >= tc {
            return SpongeState::Cube { big_r: (rc * rc - 4.0 * (t - tc)).sqrt() };
        }
    }
    let (out, _) = sponge_run(params, t);
    let y = out.y();
    match out {
        Outcome::Event { index: 2, .. } => SpongeState::Sponge { r: y[1], big_r: y[0] },
        _ => {
            // past blow-down of a self-similar sponge
            let xi = y[0] / y[1];
            let c = sponge_c(xi);
            let r = (y[1] * y[1] - 2.0 * c * (t - y[2])).max(0.0).sqrt();
            SpongeState::Sponge { r, big_r: xi * r }
        }
    }
}

/// `ψ(x) = max(‖x‖∞ − R, r − mid(|x₁|, |x₂|, |x₃|))`, the signed `ℓ∞` distance to `S_{r,R}`.
pub fn sponge_level_set(r: f64, big_r: f64, x: &[f64]) -> f64 {
    let mut a = [x[0].abs(), x[1].abs(), x[2].abs()];
    a.sort_by(f64::total_cmp);
    (a[2] - big_r).max(r - a[1])
}

/// A reference evolution with a closed form or ODE description.
#[derive(Clone, Debug, PartialEq)]
pub enum SelfSimilarSolution {
    /// Axis-aligned cube of side `L(t) = √(L₀² − 4(n−1)t)`.
    Cube { l0: f64, dim: usize },
    /// Wulff shape `{σ° ≤ s(t)}` with `s² = s₀² − 2(n−1)t`, for `β = σ`.
    Wulff { shape: Anisotropy, scale0: f64 },
    /// Self-similar doughnut with `R = √(R₀² − 4t)`, `r = R/2`, `ht = R`; `axial` is the
    /// axial mobility weight that sets the initial distance metric.
    Torus { base: Anisotropy, big_r0: f64, axial: f64 },
    Sponge { params: SpongeParams, events: SpongeEvents },
}

impl SelfSimilarSolution {
    pub fn sponge(params: SpongeParams) -> Self {
        SelfSimilarSolution::Sponge { params, events: sponge_events(&params) }
    }

    pub fn dim(&self) -> usize {
        match self {
            SelfSimilarSolution::Cube { dim, .. } => *dim,
            SelfSimilarSolution::Wulff { shape, .. } => shape.dim(),
            SelfSimilarSolution::Torus { base, .. } => base.dim() + 1,
            SelfSimilarSolution::Sponge { .. } => 3,
        }
    }

    pub fn extinction_time(&self) -> f64 {
        match self {
            SelfSimilarSolution::Cube { l0, dim } => cube_extinction_time(*l0, *dim),
            SelfSimilarSolution::Wulff { shape, scale0 } => {
                wulff_extinction_time(shape.dim(), *scale0)
            }
            SelfSimilarSolution::Torus { big_r0, .. } => big_r0 * big_r0 / 4.0,
            SelfSimilarSolution::Sponge { events, .. } => events.extinction,
        }
    }

    fn torus_at(&self, t: f64) -> Option<TorusParams> {
        match self {
            SelfSimilarSolution::Torus { base, big_r0, .. } => {
                torus_selfsimilar_exact(base, *big_r0, t)
            }
            _ => None,
        }
    }

    /// The exact level set function at `x`, `None` once extinct.
    pub fn level_set_at(&self, t: f64, x: &[f64]) -> Option<f64> {
        match self {
            SelfSimilarSolution::Cube { l0, dim } => {
                let side = cube_exact(*l0, *dim, t)?;
                Some(x.iter().fold(0.0f64, |m, c| m.max(c.abs())) - side / 2.0)
            }
            SelfSimilarSolution::Wulff { shape, scale0 } => {
                Some(shape.polar(x) - wulff_exact(shape, *scale0, t)?)
            }
            SelfSimilarSolution::Torus { .. } => Some(self.torus_at(t)?.level_set(x)),
            SelfSimilarSolution::Sponge { params, .. } => match sponge_ode(params, t) {
                SpongeState::Sponge { r, big_r } => Some(sponge_level_set(r, big_r, x)),
                SpongeState::Cube { big_r } => {
                    Some(x.iter().fold(0.0f64, |m, c| m.max(c.abs())) - big_r)
                }
                SpongeState::Extinct => None,
            },
        }
    }

    /// Nodal exact level set; all ones once extinct.
    pub fn exact_level_set(&self, t: f64, grid: Grid) -> ScalarField {
        if let SelfSimilarSolution::Sponge { params, .. } = self {
            // evaluate the ODE once rather than per node
            let state = sponge_ode(params, t);
            return ScalarField::from_fn(grid, |x| match state {
                SpongeState::Sponge { r, big_r } => sponge_level_set(r, big_r, x),
                SpongeState::Cube { big_r } => x.iter().fold(0.0f64, |m, c| m.max(c.abs())) - big_r,
                SpongeState::Extinct => 1.0,
            });
        }
        if self.level_set_at(t, &vec![0.0; self.dim()]).is_none() {
            return ScalarField::constant(grid, 1.0);
        }
        ScalarField::from_fn(grid, |x| self.level_set_at(t, x).expect("not extinct"))
    }

    /// The exact signed distance of the initial set in the mobility metric.
    pub fn initial_distance(&self, grid: Grid) -> ScalarField {
        match self {
            SelfSimilarSolution::Torus { axial, .. } => {
                let p = self.torus_at(0.0).expect("positive radius");
                ScalarField::from_fn(grid, |x| p.beta_distance(x, *axial))
            }
            _ => self.exact_level_set(0.0, grid),
        }
    }

    /// Smallest length of the exact shape at time `t`, `None` once extinct.
    pub fn feature_scale(&self, t: f64) -> Option<f64> {
        match self {
            SelfSimilarSolution::Cube { l0, dim } => cube_exact(*l0, *dim, t).map(|l| l / 2.0),
            SelfSimilarSolution::Wulff { shape, scale0 } => wulff_exact(shape, *scale0, t),
            SelfSimilarSolution::Torus { .. } => self.torus_at(t).map(|p| p.r.min(p.big_r - p.r)),
            SelfSimilarSolution::Sponge { params, .. } => match sponge_ode(params, t) {
                SpongeState::Sponge { r, big_r } => Some(r.min(big_r - r)),
                SpongeState::Cube { big_r } => Some(big_r),
                SpongeState::Extinct => None,
            },
        }
    }
}

/// The base anisotropy and axial weight of a cylindrical anisotropy.
pub fn cylinder_parts(a: &Anisotropy) -> Option<(&Anisotropy, f64)> {
    match a.kind() {
        Kind::Cylindrical { base, axial_weight } => Some((base, *axial_weight)),
        _ => None,
    }
}
