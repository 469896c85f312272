//! The Bessel-quotient transfer kernel of the Y-averaged equation: psi(s,t,T),
//! its s-derivative, its diagonal, and the denominator of the control process.
//!
//! All quotients are assembled from exponentially scaled Bessel values so that
//! pairings of growing I with decaying K stay in range for beta up to 1e4.

use crate::bessel;
use crate::error::{Error, Result};

/// Delay-feedback strength and horizon of one equation instance.
///
/// `beta = 0` is admitted as the classical (delay-free) limit.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub horizon: f64,
}

impl ModelParams {
    pub fn new(beta: f64, horizon: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::invalid(format!("beta must be >= 0, got {beta}")));
        }
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::invalid(format!("horizon must be > 0, got {horizon}")));
        }
        Ok(ModelParams { beta, horizon })
    }

    /// Bessel argument 2 sqrt(beta q) for a time q.
    pub(crate) fn w(&self, q: f64) -> f64 {
        2.0 * (self.beta * q).sqrt()
    }
}

fn check_time_pair(s: f64, t: f64, params: &ModelParams) -> Result<()> {
    let horizon = params.horizon;
    if !s.is_finite() || !t.is_finite() || s < 0.0 || s > t || t > horizon {
        return Err(Error::domain(format!(
            "need 0 <= s <= t <= {horizon}, got s={s}, t={t}"
        )));
    }
    Ok(())
}

/// Scaled denominator piece: I0(wT)K1(ws) + K0(wT)I1(ws) = e^(wT-ws) * d.
fn denom_scaled(ws: f64, w_horizon: f64) -> f64 {
    bessel::i0_scaled(w_horizon) * bessel::k1_scaled(ws)
        + bessel::k0_scaled(w_horizon) * bessel::i1_scaled(ws) * (-2.0 * (w_horizon - ws)).exp()
}

/// psi(s, t, T): the weight the Y-solution puts on past martingale increments.
///
/// At s = 0 the continuous extension I0(2 sqrt(bt)) / I0(2 sqrt(bT)) is used.
pub fn psi(s: f64, t: f64, params: &ModelParams) -> Result<f64> {
    check_time_pair(s, t, params)?;
    if params.beta == 0.0 || t == params.horizon {
        return Ok(1.0);
    }
    let (ws, wt, w_horizon) = (params.w(s), params.w(t), params.w(params.horizon));
    if s == 0.0 {
        return Ok(bessel::i0_scaled(wt) / bessel::i0_scaled(w_horizon) * (wt - w_horizon).exp());
    }
    let num = bessel::i0_scaled(wt) * bessel::k1_scaled(ws)
        + bessel::k0_scaled(wt) * bessel::i1_scaled(ws) * (-2.0 * (wt - ws)).exp();
    Ok((wt - w_horizon).exp() * num / denom_scaled(ws, w_horizon))
}

/// d/ds psi(s, t, T); strictly positive for 0 < s <= t < T and zero at t = T.
pub fn psi_prime(s: f64, t: f64, params: &ModelParams) -> Result<f64> {
    check_time_pair(s, t, params)?;
    if s == 0.0 {
        return Err(Error::domain("psi_prime is singular at s = 0"));
    }
    if params.beta == 0.0 {
        return Ok(0.0);
    }
    let (ws, wt, w_horizon) = (params.w(s), params.w(t), params.w(params.horizon));
    let num = bessel::k0_scaled(wt) * bessel::i0_scaled(w_horizon)
        - bessel::i0_scaled(wt) * bessel::k0_scaled(w_horizon) * (-2.0 * (w_horizon - wt)).exp();
    let d = denom_scaled(ws, w_horizon);
    Ok((2.0 * ws - wt - w_horizon).exp() * num / (2.0 * s * d * d))
}

/// psi(t, t, T) via the Wronskian-collapsed form
/// 1 / (2 sqrt(beta t) (I0(wT) K1(wt) + K0(wT) I1(wt))),
/// continuously extended to 1 / I0(2 sqrt(beta T)) at t = 0; equals 1 at t = T.
pub fn psi_diag(t: f64, params: &ModelParams) -> Result<f64> {
    check_time_pair(t, t, params)?;
    if params.beta == 0.0 {
        return Ok(1.0);
    }
    let (wt, w_horizon) = (params.w(t), params.w(params.horizon));
    if t == 0.0 {
        return Ok((-w_horizon).exp() / bessel::i0_scaled(w_horizon));
    }
    Ok((wt - w_horizon).exp() / (wt * denom_scaled(wt, w_horizon)))
}

/// Denominator of the control process:
/// 2 I0(wT) sqrt(beta s) K1(ws) + 2 K0(wT) sqrt(beta s) I1(ws),
/// continuously extended to I0(wT) at s = 0; bounded away from zero on [0, T].
pub fn z_denominator(s: f64, params: &ModelParams) -> Result<f64> {
    check_time_pair(s, s, params)?;
    if params.beta == 0.0 {
        return Ok(1.0);
    }
    let (ws, w_horizon) = (params.w(s), params.w(params.horizon));
    if s == 0.0 {
        return Ok(bessel::i0(w_horizon));
    }
    // 2 sqrt(beta s) = ws, so both terms carry the weight ws.
    Ok(bessel::i0(w_horizon) * bessel::scaled_wk1(ws)?
        + bessel::k0(w_horizon) * ws * bessel::i1(ws))
}

/// Separable weights (a, b) with psi(s, t, T) = I0(wt) a(s) + K0(wt) b(s).
///
/// They let solvers accumulate the kernel-weighted sums once instead of
/// re-evaluating psi for every (s, t) pair. Only valid for beta > 0; the
/// continuous extension (1/I0(wT), 0) is returned at s = 0.
pub(crate) fn psi_split(s: f64, params: &ModelParams) -> Result<(f64, f64)> {
    check_time_pair(s, s, params)?;
    debug_assert!(params.beta > 0.0);
    let (ws, w_horizon) = (params.w(s), params.w(params.horizon));
    if s == 0.0 {
        return Ok(((-w_horizon).exp() / bessel::i0_scaled(w_horizon), 0.0));
    }
    let d = denom_scaled(ws, w_horizon);
    let a = bessel::k1_scaled(ws) * (-w_horizon).exp() / d;
    let b = bessel::i1_scaled(ws) * (2.0 * ws - w_horizon).exp() / d;
    Ok((a, b))
}
