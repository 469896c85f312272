//! Catalog of terminal conditions with closed-form conditional means and
//! martingale-representation densities under both the physical measure P and
//! the log-drift shifted measure Q used by the Z-averaged equation.
//!
//! Everything here is closed form; solvers never perform numerical martingale
//! representation. Log-singular drift integrals are always evaluated with the
//! antiderivative s ln(T/s) + s, never by quadrature against the singularity.

use crate::error::{Error, Result};
use crate::grid::BrownianPath;
use crate::kernel::ModelParams;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Antiderivative of ln(T/s): s ln(T/s) + s, continuously extended to 0 at 0.
fn log_antiderivative(s: f64, horizon: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        s * (horizon / s).ln() + s
    }
}

/// Non-negative, left-continuous step function on `[0, horizon]` given by
/// interior breakpoints and one level per resulting interval.
///
/// `value(s) = levels[i]` on `(breakpoints[i-1], breakpoints[i]]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StepFunction {
    pub breakpoints: Vec<f64>,
    pub levels: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        let f = StepFunction { breakpoints, levels };
        f.validate(f64::INFINITY)?;
        Ok(f)
    }

    pub fn constant(level: f64) -> Result<Self> {
        StepFunction::new(Vec::new(), vec![level])
    }

    pub(crate) fn validate(&self, horizon: f64) -> Result<()> {
        if self.levels.len() != self.breakpoints.len() + 1 {
            return Err(Error::invalid(format!(
                "step function needs {} levels for {} breakpoints, got {}",
                self.breakpoints.len() + 1,
                self.breakpoints.len(),
                self.levels.len()
            )));
        }
        if self.levels.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::invalid("step function levels must be finite and >= 0"));
        }
        let mut prev = 0.0;
        for &b in &self.breakpoints {
            if !b.is_finite() || b <= prev || b >= horizon {
                return Err(Error::invalid(format!(
                    "breakpoints must be strictly increasing inside (0, {horizon}), got {b}"
                )));
            }
            prev = b;
        }
        Ok(())
    }

    /// Left-continuous evaluation.
    pub fn value(&self, s: f64) -> f64 {
        let idx = self.breakpoints.iter().take_while(|b| **b < s).count();
        self.levels[idx]
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().all(|l| *l == 0.0)
    }

    /// Sum of `piece(level, lo, hi)` over the pieces intersecting `[a, b]`.
    fn piecewise(&self, a: f64, b: f64, piece: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        let mut lo = a;
        for (i, &bp) in self.breakpoints.iter().enumerate() {
            if bp <= a {
                continue;
            }
            if bp >= b {
                break;
            }
            total += piece(self.levels[i], lo, bp);
            lo = bp;
        }
        let last = self.breakpoints.iter().take_while(|bp| **bp < b).count();
        total + piece(self.levels[last], lo, b)
    }

    /// Exact integral of h over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.piecewise(a, b, |l, lo, hi| l * (hi - lo))
    }

    /// Exact integral of h^2 over `[a, b]`.
    pub fn integral_sq(&self, a: f64, b: f64) -> f64 {
        self.piecewise(a, b, |l, lo, hi| l * l * (hi - lo))
    }

    /// Exact integral of h(s) ln(horizon/s) over `[a, b]`.
    pub fn integral_log_weighted(&self, a: f64, b: f64, horizon: f64) -> f64 {
        self.piecewise(a, b, |l, lo, hi| {
            l * (log_antiderivative(hi, horizon) - log_antiderivative(lo, horizon))
        })
    }
}

/// Terminal condition with closed-form representation data.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PayoffSpec {
    /// Deterministic payoff `c`.
    Constant { value: f64 },
    /// The terminal Brownian value `W(T)`.
    LinearBm,
    /// `exp(a W(T))`, or the mean-one variant `exp(a W(T) - a^2 T / 2)`
    /// when `normalized` is set.
    ExpBm {
        a: f64,
        #[serde(default)]
        normalized: bool,
    },
    /// `exp(int_0^T h(s) dW(s))` for a non-negative step function h.
    ExpIntegral {
        #[serde(flatten)]
        h: StepFunction,
    },
    /// `1{W(time) > 0}` with `0 < time <= T`.
    IndicatorBm { time: f64 },
}

impl PayoffSpec {
    pub fn exp_martingale(a: f64) -> Self {
        PayoffSpec::ExpBm { a, normalized: true }
    }

    pub fn exp_integral(h: StepFunction) -> Self {
        PayoffSpec::ExpIntegral { h }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        match self {
            PayoffSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::invalid("constant payoff must be finite"));
                }
            }
            PayoffSpec::LinearBm => {}
            PayoffSpec::ExpBm { a, .. } => {
                if !a.is_finite() {
                    return Err(Error::invalid("exp_bm exponent must be finite"));
                }
            }
            PayoffSpec::ExpIntegral { h } => h.validate(horizon)?,
            PayoffSpec::IndicatorBm { time } => {
                if !time.is_finite() || *time <= 0.0 || *time > horizon {
                    return Err(Error::invalid(format!(
                        "indicator time must lie in (0, {horizon}], got {time}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether the shifted-measure closed forms exist for this payoff.
    pub fn supports_q(&self) -> bool {
        match self {
            PayoffSpec::IndicatorBm { .. } => false,
            PayoffSpec::ExpBm { a, .. } => *a >= 0.0,
            _ => true,
        }
    }

    fn unsupported_q(&self) -> Error {
        Error::unsupported(format!(
            "{self:?} has no closed form under the shifted measure"
        ))
    }

    /// `E[xi]` under the physical measure.
    pub fn mean_p(&self, params: &ModelParams) -> Result<f64> {
        let horizon = params.horizon;
        self.validate(horizon)?;
        Ok(match self {
            PayoffSpec::Constant { value } => *value,
            PayoffSpec::LinearBm => 0.0,
            PayoffSpec::ExpBm { a, normalized } => {
                if *normalized {
                    1.0
                } else {
                    (a * a * horizon / 2.0).exp()
                }
            }
            PayoffSpec::ExpIntegral { h } => (0.5 * h.integral_sq(0.0, horizon)).exp(),
            PayoffSpec::IndicatorBm { .. } => 0.5,
        })
    }

    /// Realized terminal value on a discrete path.
    pub fn terminal_value(&self, path: &BrownianPath) -> Result<f64> {
        let v = self.conditional_mean_path_p(path)?;
        Ok(*v.last().unwrap())
    }

    /// `V(t_j) = E[xi | F_{t_j}]` at every node of the path.
    pub fn conditional_mean_path_p(&self, path: &BrownianPath) -> Result<Vec<f64>> {
        let grid = path.grid;
        let horizon = grid.horizon();
        self.validate(horizon)?;
        let n = grid.steps();
        Ok(match self {
            PayoffSpec::Constant { value } => vec![*value; n + 1],
            PayoffSpec::LinearBm => path.w.clone(),
            PayoffSpec::ExpBm { a, normalized } => {
                let shift = if *normalized { a * a * horizon / 2.0 } else { 0.0 };
                (0..=n)
                    .map(|j| {
                        let t = grid.node(j);
                        (a * path.w[j] + a * a * (horizon - t) / 2.0 - shift).exp()
                    })
                    .collect()
            }
            PayoffSpec::ExpIntegral { h } => {
                let mut out = Vec::with_capacity(n + 1);
                let mut prefix = 0.0;
                for j in 0..=n {
                    let tail = h.integral_sq(grid.node(j), horizon);
                    out.push((prefix + 0.5 * tail).exp());
                    if j < n {
                        prefix += h.value(grid.node(j)) * path.increment(j);
                    }
                }
                out
            }
            PayoffSpec::IndicatorBm { time } => {
                let j0 = grid.index_of(*time)?;
                let normal = standard_normal();
                let realized = if path.w[j0] > 0.0 { 1.0 } else { 0.0 };
                (0..=n)
                    .map(|j| {
                        if j < j0 {
                            let t = grid.node(j);
                            normal.cdf(path.w[j] / (time - t).sqrt())
                        } else {
                            realized
                        }
                    })
                    .collect()
            }
        })
    }

    /// Martingale density `M(t_j)` under P at the cell-opening nodes
    /// `t_0 .. t_{n-1}` (the a.e. representative: zero from the indicator
    /// time onwards).
    pub fn martingale_density_path_p(&self, path: &BrownianPath) -> Result<Vec<f64>> {
        let grid = path.grid;
        let horizon = grid.horizon();
        self.validate(horizon)?;
        let n = grid.steps();
        Ok(match self {
            PayoffSpec::Constant { .. } => vec![0.0; n],
            PayoffSpec::LinearBm => vec![1.0; n],
            PayoffSpec::ExpBm { .. } => {
                let a = match self {
                    PayoffSpec::ExpBm { a, .. } => *a,
                    _ => unreachable!(),
                };
                let v = self.conditional_mean_path_p(path)?;
                (0..n).map(|j| a * v[j]).collect()
            }
            PayoffSpec::ExpIntegral { h } => {
                let v = self.conditional_mean_path_p(path)?;
                (0..n).map(|j| h.value(grid.node(j)) * v[j]).collect()
            }
            PayoffSpec::IndicatorBm { time } => {
                let j0 = grid.index_of(*time)?;
                let normal = standard_normal();
                (0..n)
                    .map(|j| {
                        if j < j0 {
                            let gap = time - grid.node(j);
                            normal.pdf(path.w[j] / gap.sqrt()) / gap.sqrt()
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
        })
    }

    /// Pointwise `V(t) = E[xi | F_t]`; `t` must be a grid node.
    pub fn conditional_mean_p(&self, path: &BrownianPath, t: f64) -> Result<f64> {
        let j = path.grid.index_of(t)?;
        Ok(self.conditional_mean_path_p(path)?[j])
    }

    /// Pointwise `M(t)`; undefined at the terminal node and, for the
    /// indicator payoff, exactly at the indicator time.
    pub fn martingale_density_p(&self, path: &BrownianPath, t: f64) -> Result<f64> {
        let j = path.grid.index_of(t)?;
        if j == path.grid.steps() {
            return Err(Error::domain("martingale density is undefined at t = T"));
        }
        if let PayoffSpec::IndicatorBm { time } = self {
            if j == path.grid.index_of(*time)? {
                return Err(Error::domain(
                    "indicator martingale density is undefined at the indicator time",
                ));
            }
        }
        Ok(self.martingale_density_path_p(path)?[j])
    }

    /// `V~(t_j) = E_Q[xi | F_{t_j}]` along a path of the Q-Brownian motion.
    pub fn conditional_mean_path_q(
        &self,
        path_tilde: &BrownianPath,
        params: &ModelParams,
    ) -> Result<Vec<f64>> {
        let grid = path_tilde.grid;
        let horizon = grid.horizon();
        self.validate(horizon)?;
        if !self.supports_q() {
            return Err(self.unsupported_q());
        }
        let beta = params.beta;
        let n = grid.steps();
        Ok(match self {
            PayoffSpec::Constant { value } => vec![*value; n + 1],
            PayoffSpec::LinearBm => path_tilde.w.iter().map(|w| w - beta * horizon).collect(),
            PayoffSpec::ExpBm { a, normalized } => {
                let shift = if *normalized { a * a * horizon / 2.0 } else { 0.0 };
                (0..=n)
                    .map(|j| {
                        let t = grid.node(j);
                        (a * path_tilde.w[j] + a * a * (horizon - t) / 2.0
                            - a * beta * horizon
                            - shift)
                            .exp()
                    })
                    .collect()
            }
            PayoffSpec::ExpIntegral { h } => {
                let drift = beta * h.integral_log_weighted(0.0, horizon, horizon);
                let mut out = Vec::with_capacity(n + 1);
                let mut prefix = 0.0;
                for j in 0..=n {
                    let tail = h.integral_sq(grid.node(j), horizon);
                    out.push((prefix + 0.5 * tail - drift).exp());
                    if j < n {
                        prefix += h.value(grid.node(j)) * path_tilde.increment(j);
                    }
                }
                out
            }
            PayoffSpec::IndicatorBm { .. } => return Err(self.unsupported_q()),
        })
    }

    /// Martingale density `Z(t_j)` under Q; non-negative and path-bounded for
    /// every supported catalog entry.
    pub fn martingale_density_path_q(
        &self,
        path_tilde: &BrownianPath,
        params: &ModelParams,
    ) -> Result<Vec<f64>> {
        let grid = path_tilde.grid;
        self.validate(grid.horizon())?;
        if !self.supports_q() {
            return Err(self.unsupported_q());
        }
        let n = grid.steps();
        Ok(match self {
            PayoffSpec::Constant { .. } => vec![0.0; n],
            PayoffSpec::LinearBm => vec![1.0; n],
            PayoffSpec::ExpBm { a, .. } => {
                let v = self.conditional_mean_path_q(path_tilde, params)?;
                (0..n).map(|j| a * v[j]).collect()
            }
            PayoffSpec::ExpIntegral { h } => {
                let v = self.conditional_mean_path_q(path_tilde, params)?;
                (0..n).map(|j| h.value(grid.node(j)) * v[j]).collect()
            }
            PayoffSpec::IndicatorBm { .. } => return Err(self.unsupported_q()),
        })
    }

    pub fn conditional_mean_q(
        &self,
        path_tilde: &BrownianPath,
        t: f64,
        params: &ModelParams,
    ) -> Result<f64> {
        let j = path_tilde.grid.index_of(t)?;
        Ok(self.conditional_mean_path_q(path_tilde, params)?[j])
    }

    pub fn martingale_density_q(
        &self,
        path_tilde: &BrownianPath,
        t: f64,
        params: &ModelParams,
    ) -> Result<f64> {
        let j = path_tilde.grid.index_of(t)?;
        if j == path_tilde.grid.steps() {
            return Err(Error::domain("martingale density is undefined at t = T"));
        }
        Ok(self.martingale_density_path_q(path_tilde, params)?[j])
    }
}

/// Drift of the measure change, `beta ln(T/s)` for `0 < s <= T`.
pub fn girsanov_drift(s: f64, params: &ModelParams) -> Result<f64> {
    if !(s > 0.0 && s <= params.horizon) {
        return Err(Error::domain(format!(
            "girsanov drift needs 0 < s <= {}, got {s}",
            params.horizon
        )));
    }
    Ok(params.beta * (params.horizon / s).ln())
}

/// `int_0^t beta ln(T/s) ds = beta (t ln(T/t) + t)`, exact for all t in [0, T].
pub fn girsanov_drift_integral(t: f64, params: &ModelParams) -> f64 {
    params.beta * log_antiderivative(t, params.horizon)
}

/// Radon-Nikodym density `N(T)` of the shifted measure along a P-path:
/// `exp(-int_0^T beta ln(T/s) dW(s) - beta^2 T)`.
///
/// The stochastic integral uses one term per cell with the exact analytic
/// drift mass `int_cell beta ln(T/s) ds`, so the log singularity of the first
/// cell is integrated instead of truncated; the quadratic-variation term
/// `int_0^T ln^2(T/s) ds = 2T` is closed form.
pub fn radon_nikodym(path: &BrownianPath, params: &ModelParams) -> f64 {
    let grid = path.grid;
    let horizon = grid.horizon();
    let dt = grid.dt();
    let mut integral = 0.0;
    for i in 0..grid.steps() {
        let mass = girsanov_drift_integral(grid.node(i + 1), params)
            - girsanov_drift_integral(grid.node(i), params);
        integral += mass / dt * path.increment(i);
    }
    (-integral - params.beta * params.beta * horizon).exp()
}
