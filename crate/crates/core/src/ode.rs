//! Classical fixed-step RK4 with event location.

/// Event resolution in the independent variable.
pub const EVENT_TOL: f64 = 1e-10;

/// Where an integration stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    /// The end of the interval was reached.
    Reached { t: f64, y: Vec<f64> },
    /// Event `index` fired: its function dropped to zero or below, or the state blew up.
    Event { index: usize, t: f64, y: Vec<f64> },
}

impl Outcome {
    pub fn t(&self) -> f64 {
        match self {
            Outcome::Reached { t, .. } | Outcome::Event { t, .. } => *t,
        }
    }

    pub fn y(&self) -> &[f64] {
        match self {
            Outcome::Reached { y, .. } | Outcome::Event { y, .. } => y,
        }
    }
}

/// One RK4 step of `y' = f(t, y)`.
pub fn rk4_step<F>(f: &F, t: f64, y: &[f64], dt: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    f(t, y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k1[i];
    }
    f(t + 0.5 * dt, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k2[i];
    }
    f(t + 0.5 * dt, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + dt * k3[i];
    }
    f(t + dt, &tmp, &mut k4);
    (0..n).map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Integrates from `t0` to `t_end` with step `dt`, stopping at the first event.
///
/// Events are functions `g(t, y)` that are positive while the solution is admissible. A step
/// that makes some `g ≤ 0` or produces a non-finite state is bisected down to [`EVENT_TOL`];
/// the reported state is the last admissible one.
pub fn integrate<F>(
    f: &F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    dt: f64,
    events: &[&dyn Fn(f64, &[f64]) -> f64],
) -> Outcome
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let bad = |t: f64, y: &[f64]| -> Option<usize> {
        if y.iter().any(|v| !v.is_finite()) {
            return Some(usize::MAX);
        }
        events.iter().position(|g| g(t, y) <= 0.0)
    };
    let mut t = t0;
    let mut y = y0.to_vec();
    if let Some(index) = bad(t, &y) {
        return Outcome::Event { index: index.min(events.len().saturating_sub(1)), t, y };
    }
    while t < t_end {
        let step = dt.min(t_end - t);
        let next = rk4_step(f, t, &y, step);
        let Some(mut index) = bad(t + step, &next) else {
            t = if t_end - (t + step) < 1e-14 * t_end.abs().max(1.0) { t_end } else { t + step };
            y = next;
            continue;
        };
        let (mut lo, mut hi) = (0.0, step);
        while hi - lo > EVENT_TOL {
            let mid = 0.5 * (lo + hi);
            match bad(t + mid, &rk4_step(f, t, &y, mid)) {
                Some(i) => {
                    hi = mid;
                    index = i;
                }
                None => lo = mid,
            }
        }
        let y_lo = rk4_step(f, t, &y, lo);
        if index == usize::MAX {
            // blow-up: attribute it to the event closest to firing
            index = events
                .iter()
                .enumerate()
                .min_by(|a, b| a.1(t + lo, &y_lo).total_cmp(&b.1(t + lo, &y_lo)))
                .map_or(0, |(i, _)| i);
        }
        return Outcome::Event { index, t: t + 0.5 * (lo + hi), y: y_lo };
    }
    Outcome::Reached { t, y }
}
