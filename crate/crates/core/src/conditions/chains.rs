//! Explicit constant chains.

use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};

/// Constants derived from reverse Hölder data `(r, C)` and an exponent range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantChain31 {
    pub r: f64,
    pub c: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    pub gamma: f64,
    /// `2^{1 + p_+/p_-} C`.
    pub k: f64,
    /// `r/γ - 1`.
    pub epsilon: f64,
    /// `max((2k)^{1+ε}, 2C)`.
    pub a: f64,
    /// `γ/(γ - 1)`.
    pub gamma_dual: f64,
    /// Solves `A (1-η)^{1/γ'} = 1/2`.
    pub eta: f64,
    /// `ε/(1+ε) · p_-`.
    pub delta: f64,
    /// `η, δ ∈ (0, 1)`.
    pub feasible: bool,
}

impl ConstantChain31 {
    /// `A (1-η)^{1/γ'}`, which equals `1/2` up to rounding.
    pub fn eta_identity(&self) -> f64 {
        self.a * (1.0 - self.eta).powf(1.0 / self.gamma_dual)
    }
}

/// Midpoint of `(1, r)`.
pub fn default_gamma(r: f64) -> f64 {
    0.5 * (1.0 + r)
}

pub fn chain31(r: f64, c: f64, p_minus: f64, p_plus: f64, gamma: f64) -> Result<ConstantChain31> {
    check_param("r", r, r > 1.0, "(1, inf)")?;
    check_param("C", c, c > 0.0, "(0, inf)")?;
    check_param("p_minus", p_minus, p_minus >= 1.0, "[1, inf)")?;
    check_param("p_plus", p_plus, p_plus >= p_minus, "[p_minus, inf)")?;
    check_param("gamma", gamma, gamma > 1.0 && gamma < r, "(1, r)")?;
    let k = (1.0 + p_plus / p_minus).exp2() * c;
    let epsilon = (r - gamma) / gamma;
    // exp2/log2 keeps powers of two exact.
    let a = ((2.0 * k).log2() * (1.0 + epsilon)).exp2().max(2.0 * c);
    let gamma_dual = gamma / (gamma - 1.0);
    let eta = 1.0 - (-(2.0 * a).log2() * gamma_dual).exp2();
    let delta = (r - gamma) / r * p_minus;
    let unit = |x: f64| x > 0.0 && x < 1.0;
    Ok(ConstantChain31 {
        r,
        c,
        p_minus,
        p_plus,
        gamma,
        k,
        epsilon,
        a,
        gamma_dual,
        eta,
        delta,
        feasible: unit(eta) && unit(delta),
    })
}

/// Constants for the median maximal bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantChain45 {
    pub lambda: f64,
    pub eta: f64,
    pub dim: u32,
    pub n_overlap: f64,
    pub c: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    /// `max(λ, η)`.
    pub nu: f64,
    /// `(1+ν)/2`.
    pub t: f64,
    /// `r^n = ((1+ν)/(1+t) + 1)/2`.
    pub r_pow_dim: f64,
    pub r: f64,
    /// Solves `2 N C^{p_+ - p_-} γ^{p_-} = 1/2`.
    pub gamma: f64,
}

impl ConstantChain45 {
    /// `t r^n - (1 - r^n) - ν`, positive by construction.
    pub fn margin(&self) -> f64 {
        self.t * self.r_pow_dim - (1.0 - self.r_pow_dim) - self.nu
    }

    /// `2 N C^{p_+ - p_-} γ^{p_-}`.
    pub fn gamma_identity(&self) -> f64 {
        2.0 * self.n_overlap
            * self.c.powf(self.p_plus - self.p_minus)
            * self.gamma.powf(self.p_minus)
    }
}

pub fn chain45(
    lambda: f64,
    eta: f64,
    dim: u32,
    n_overlap: f64,
    c: f64,
    p_minus: f64,
    p_plus: f64,
) -> Result<ConstantChain45> {
    check_param("lambda", lambda, lambda > 0.0 && lambda < 1.0, "(0, 1)")?;
    check_param("eta", eta, eta > 0.0 && eta < 1.0, "(0, 1)")?;
    check_param("n", dim as f64, dim >= 1, "[1, inf)")?;
    check_param("N", n_overlap, n_overlap >= 1.0, "[1, inf)")?;
    check_param("C", c, c >= 1.0, "[1, inf)")?;
    check_param("p_minus", p_minus, p_minus >= 1.0, "[1, inf)")?;
    check_param("p_plus", p_plus, p_plus >= p_minus, "[p_minus, inf)")?;
    let nu = lambda.max(eta);
    let t = 0.5 * (1.0 + nu);
    // ((1+ν)/(1+t) + 1)/2 as a single division.
    let r_pow_dim = (2.0 + nu + t) / (2.0 + 2.0 * t);
    let r = if dim == 1 { r_pow_dim } else { r_pow_dim.powf(1.0 / dim as f64) };
    let gamma = (1.0 / (4.0 * n_overlap * c.powf(p_plus - p_minus))).powf(1.0 / p_minus);
    let chain = ConstantChain45 {
        lambda,
        eta,
        dim,
        n_overlap,
        c,
        p_minus,
        p_plus,
        nu,
        t,
        r_pow_dim,
        r,
        gamma,
    };
    if !(chain.margin() > 0.0 && gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Precondition("chain constants out of range".into()));
    }
    Ok(chain)
}
