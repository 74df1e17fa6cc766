//! The single-asset model: a positive martingale diffusion produced from an
//! Ornstein-Uhlenbeck process `dX = -lambda X dt + nu dW` by a measure
//! change with the decreasing eigenfunction `u(x) = e^{k x^2/4} D_{-ups}(x sqrt(k))`
//! followed by the monotone price map
//! `F(x) = c D_{-ups-r/lambda}(-x sqrt(k)) / D_{-ups}(x sqrt(k))`.
//!
//! Everything observable about one asset lives here: fundamental solutions,
//! the price map and its inverse, the local volatility `sigma(s) = nu F'(X(s))`,
//! transition densities in X- and S-space, Gaussian bridge moments, and
//! quadrature-based European pricing.

use crate::specfun::{
    find_root, integrate, normal_pdf, pcf_d, pcf_d_deriv, QuadratureSpec, SpecFunError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum UouError {
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("{func}: {what}")]
    Domain { func: &'static str, what: String },
    #[error("price {0} is not reachable by the price map within the working range")]
    Unreachable(f64),
}

pub type Result<T> = std::result::Result<T, UouError>;

/// Mean-reversion state space is validated against the range over which the
/// parabolic cylinder evaluation is accuracy-checked.
const UPSILON_RANGE: (f64, f64) = (0.001, 5.0);
const KAPPA_RANGE: (f64, f64) = (0.1, 20.0);

/// One asset's parameter set: OU mean reversion `lambda`, OU volatility
/// `nu`, map scale `c`, measure-change rate `rho`, and the risk-free rate.
///
/// The derived quantities `kappa = 2 lambda / nu^2` and
/// `upsilon = rho / lambda` are cached at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UouParams {
    lambda: f64,
    nu: f64,
    c: f64,
    rho: f64,
    rate: f64,
    #[serde(skip, default)]
    kappa: f64,
    #[serde(skip, default)]
    upsilon: f64,
}

impl UouParams {
    pub fn new(lambda: f64, nu: f64, c: f64, rho: f64, rate: f64) -> Result<Self> {
        for (name, v) in [("lambda", lambda), ("nu", nu), ("c", c), ("rho", rho)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(UouError::InvalidParameter(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if !rate.is_finite() || rate + rho <= 0.0 {
            return Err(UouError::InvalidParameter(format!(
                "rate + rho must be positive, got rate {rate}, rho {rho}"
            )));
        }
        let kappa = 2.0 * lambda / (nu * nu);
        let upsilon = rho / lambda;
        if !(UPSILON_RANGE.0..=UPSILON_RANGE.1).contains(&upsilon) {
            return Err(UouError::InvalidParameter(format!(
                "upsilon = rho/lambda = {upsilon} outside [{}, {}]",
                UPSILON_RANGE.0, UPSILON_RANGE.1
            )));
        }
        if !(KAPPA_RANGE.0..=KAPPA_RANGE.1).contains(&kappa) {
            return Err(UouError::InvalidParameter(format!(
                "kappa = 2 lambda/nu^2 = {kappa} outside [{}, {}]",
                KAPPA_RANGE.0, KAPPA_RANGE.1
            )));
        }
        // orders handed to pcf_d: -ups, -ups - r/lambda, -ups - 1 - r/lambda
        if upsilon + rate.max(0.0) / lambda + 1.0 > 11.0 {
            return Err(UouError::InvalidParameter(format!(
                "upsilon + rate/lambda = {} too large for the validated special-function range",
                upsilon + rate / lambda
            )));
        }
        Ok(Self {
            lambda,
            nu,
            c,
            rho,
            rate,
            kappa,
            upsilon,
        })
    }

    /// Construct from the shape parameterization `(rho, upsilon, c, kappa)`
    /// used for calibration, with `lambda = rho/upsilon` and
    /// `nu = sqrt(2 lambda / kappa)`.
    pub fn from_shape(rho: f64, upsilon: f64, c: f64, kappa: f64, rate: f64) -> Result<Self> {
        if !(upsilon > 0.0) || !(kappa > 0.0) {
            return Err(UouError::InvalidParameter(format!(
                "upsilon and kappa must be positive, got ({upsilon}, {kappa})"
            )));
        }
        let lambda = rho / upsilon;
        let nu = (2.0 * lambda / kappa).sqrt();
        Self::new(lambda, nu, c, rho, rate)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn upsilon(&self) -> f64 {
        self.upsilon
    }

    fn sqrt_kappa(&self) -> f64 {
        self.kappa.sqrt()
    }

    fn r_over_lambda(&self) -> f64 {
        self.rate / self.lambda
    }

    /// Conditional mean and standard deviation of `X_t | X_0 = x0`.
    pub fn transition_mean_sd(&self, t: f64, x0: f64) -> (f64, f64) {
        let mean = x0 * (-self.lambda * t).exp();
        let var = -(-2.0 * self.lambda * t).exp_m1() / self.kappa;
        (mean, var.sqrt())
    }

    /// Integration window for transition-density quadrature: ten standard
    /// deviations around the conditional mean leave tail mass below 1e-22.
    pub fn transition_window(&self, t: f64, x0: f64) -> (f64, f64) {
        let (mean, sd) = self.transition_mean_sd(t, x0);
        (mean - 10.0 * sd, mean + 10.0 * sd)
    }
}

/// Decreasing fundamental solution
/// `phi^-(x) = e^{k x^2/4} D_{-spectral/lambda}(x sqrt(k))` of the OU
/// generator eigenproblem at spectral value `spectral` (`rho` or
/// `rate + rho`).
pub fn phi_minus(p: &UouParams, spectral: f64, x: f64) -> Result<f64> {
    if !(spectral > 0.0) {
        return Err(UouError::Domain {
            func: "phi_minus",
            what: format!("spectral parameter must be positive, got {spectral}"),
        });
    }
    let z = x * p.sqrt_kappa();
    Ok((p.kappa * x * x / 4.0).exp() * pcf_d(-spectral / p.lambda, z)?)
}

/// Increasing companion `phi^+(x) = phi^-(-x)`.
pub fn phi_plus(p: &UouParams, spectral: f64, x: f64) -> Result<f64> {
    phi_minus(p, spectral, -x)
}

/// The generating function of the measure change, `u(x) = phi^-_rho(x)`.
pub fn u_hat(p: &UouParams, x: f64) -> Result<f64> {
    phi_minus(p, p.rho, x)
}

/// The monotone increasing price map
/// `F(x) = c D_{-ups-r/lambda}(-x sqrt(k)) / D_{-ups}(x sqrt(k))`, mapping
/// the real line onto positive prices.
pub fn map_f(p: &UouParams, x: f64) -> Result<f64> {
    let z = x * p.sqrt_kappa();
    let num = pcf_d(-p.upsilon - p.r_over_lambda(), -z)?;
    let den = pcf_d(-p.upsilon, z)?;
    let s = p.c * num / den;
    if !s.is_finite() || s <= 0.0 {
        return Err(UouError::Domain {
            func: "map_f",
            what: format!("price map not evaluable at x = {x}"),
        });
    }
    Ok(s)
}

/// Wronskian `W(x) = f(x) g'(x) - f'(x) g(x)` of
/// `f(x) = D_{-ups}(x sqrt(k))` and `g(x) = D_{-ups-r/lambda}(-x sqrt(k))`,
/// assembled from the function and derivative evaluations. Strictly
/// positive.
pub fn wronskian(p: &UouParams, x: f64) -> Result<f64> {
    let sk = p.sqrt_kappa();
    let z = x * sk;
    let ord_f = -p.upsilon;
    let ord_g = -p.upsilon - p.r_over_lambda();
    let f = pcf_d(ord_f, z)?;
    let fp = sk * pcf_d_deriv(ord_f, z)?;
    let g = pcf_d(ord_g, -z)?;
    let gp = -sk * pcf_d_deriv(ord_g, -z)?;
    Ok(f * gp - fp * g)
}

/// `F'(x) = c W(x) / D_{-ups}(x sqrt(k))^2 > 0`.
pub fn map_f_deriv(p: &UouParams, x: f64) -> Result<f64> {
    let den = pcf_d(-p.upsilon, x * p.sqrt_kappa())?;
    Ok(p.c * wronskian(p, x)? / (den * den))
}

/// Inverse of the price map: the `x` with `F(x) = s`.
///
/// An expanding bracket around `[-1, 1]` always terminates because `F` is
/// strictly increasing onto `(0, inf)`; the bracket is then polished to
/// ~1e-13 in `x`.
pub fn inverse_map(p: &UouParams, s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(UouError::Domain {
            func: "inverse_map",
            what: format!("price must be positive and finite, got {s}"),
        });
    }
    let mut lo = -1.0;
    let mut hi = 1.0;
    let unreachable = |_| UouError::Unreachable(s);
    let mut f_lo = map_f(p, lo).map_err(unreachable)?;
    let mut f_hi = map_f(p, hi).map_err(unreachable)?;
    while f_lo > s {
        lo *= 2.0;
        f_lo = map_f(p, lo).map_err(|_| UouError::Unreachable(s))?;
    }
    while f_hi < s {
        hi *= 2.0;
        f_hi = map_f(p, hi).map_err(|_| UouError::Unreachable(s))?;
    }
    let x = find_root(
        |x| map_f(p, x).map(|fx| fx - s).unwrap_or(f64::NAN),
        lo,
        hi,
        1e-13,
    )?;
    if x.is_nan() {
        return Err(UouError::Unreachable(s));
    }
    Ok(x)
}

/// Local volatility `sigma(s) = nu F'(X(s))`, evaluated at a price.
pub fn sigma(p: &UouParams, s: f64) -> Result<f64> {
    sigma_at_x(p, inverse_map(p, s)?)
}

/// Local volatility at a known state `x = X(s)`.
pub fn sigma_at_x(p: &UouParams, x: f64) -> Result<f64> {
    Ok(p.nu * map_f_deriv(p, x)?)
}

/// Transition density of the underlying OU process,
/// `p_X(t; x0, x) = sqrt(k / (2 pi (1-e^{-2 l t}))) exp(-k (x - x0 e^{-l t})^2 / (2 (1-e^{-2 l t})))`.
pub fn p_x(p: &UouParams, t: f64, x0: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(UouError::Domain {
            func: "p_x",
            what: format!("time must be positive, got {t}"),
        });
    }
    let om = -(-2.0 * p.lambda * t).exp_m1();
    let dev = x - x0 * (-p.lambda * t).exp();
    Ok((p.kappa / (2.0 * std::f64::consts::PI * om)).sqrt()
        * (-p.kappa * dev * dev / (2.0 * om)).exp())
}

/// Transition density of the measure-changed process,
/// `e^{-rho t} u(x)/u(x0) p_X(t; x0, x)`.
pub fn p_x_rho(p: &UouParams, t: f64, x0: f64, x: f64) -> Result<f64> {
    let ratio = u_hat(p, x)? / u_hat(p, x0)?;
    Ok((-p.rho * t).exp() * ratio * p_x(p, t, x0, x)?)
}

/// Risk-neutral transition density of the price process,
/// `p_S(t; s0, s) = e^{-rho t + k (x^2 - x0^2)/4} D_{-ups}(x sqrt k)^3 /
///  (c W(x) D_{-ups}(x0 sqrt k)) p_X(t; x0, x)`.
pub fn p_s(p: &UouParams, t: f64, s0: f64, s: f64) -> Result<f64> {
    let x0 = inverse_map(p, s0)?;
    let x = inverse_map(p, s)?;
    p_s_at_states(p, t, x0, x)
}

/// `p_S` with both prices already mapped to X-space.
pub fn p_s_at_states(p: &UouParams, t: f64, x0: f64, x: f64) -> Result<f64> {
    let sk = p.sqrt_kappa();
    let d_x = pcf_d(-p.upsilon, x * sk)?;
    let d_x0 = pcf_d(-p.upsilon, x0 * sk)?;
    let w = wronskian(p, x)?;
    let pref = (-p.rho * t + p.kappa * (x * x - x0 * x0) / 4.0).exp();
    Ok(pref * d_x * d_x * d_x / (p.c * w * d_x0) * p_x(p, t, x0, x)?)
}

/// Gaussian bridge for `X` over `[t1, t2]`, observed at an interior time:
/// `mean = w1 x1 + w2 x2`, variance `sd^2`, where `delta1 = t - t1` and
/// `delta2 = t2 - t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeCoeffs {
    pub w1: f64,
    pub w2: f64,
    pub sd: f64,
}

/// Endpoint-weight form of the bridge law; all exponentials negative, so it
/// is stable for any `lambda * delta`.
pub fn bridge_coefficients(p: &UouParams, delta1: f64, delta2: f64) -> Result<BridgeCoeffs> {
    if delta1 < 0.0 || delta2 < 0.0 || delta1 + delta2 <= 0.0 {
        return Err(UouError::Domain {
            func: "bridge_coefficients",
            what: format!("need delta1, delta2 >= 0 with positive sum, got ({delta1}, {delta2})"),
        });
    }
    let l = p.lambda;
    let e1 = -(-2.0 * l * delta1).exp_m1(); // 1 - e^{-2 l d1}
    let e2 = -(-2.0 * l * delta2).exp_m1();
    let es = -(-2.0 * l * (delta1 + delta2)).exp_m1();
    let w1 = (-l * delta1).exp() * e2 / es;
    let w2 = (-l * delta2).exp() * e1 / es;
    let var = e1 * e2 / (p.kappa * es);
    Ok(BridgeCoeffs {
        w1,
        w2,
        sd: var.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of the OU bridge pinned at `x1` (a time `delta1` in the
/// past) and `x2` (a time `delta2` in the future).
pub fn bridge_moments(
    p: &UouParams,
    delta1: f64,
    delta2: f64,
    x1: f64,
    x2: f64,
) -> Result<BridgeMoments> {
    let co = bridge_coefficients(p, delta1, delta2)?;
    Ok(BridgeMoments {
        mean: co.w1 * x1 + co.w2 * x2,
        variance: co.sd * co.sd,
    })
}

/// Bridge density of the price process at an interior time,
/// `b_S(t; s) = nu / sigma(s) * phi((x - mean)/sd) / sd` with the moments
/// from [`bridge_moments`].
pub fn bridge_density_s(
    p: &UouParams,
    t1: f64,
    t2: f64,
    t: f64,
    s1: f64,
    s2: f64,
    s: f64,
) -> Result<f64> {
    if !(t1 < t && t < t2) {
        return Err(UouError::Domain {
            func: "bridge_density_s",
            what: format!("need t1 < t < t2, got ({t1}, {t}, {t2})"),
        });
    }
    let x1 = inverse_map(p, s1)?;
    let x2 = inverse_map(p, s2)?;
    let x = inverse_map(p, s)?;
    let m = bridge_moments(p, t - t1, t2 - t, x1, x2)?;
    let sd = m.variance.sqrt();
    Ok(p.nu / sigma_at_x(p, x)? * normal_pdf((x - m.mean) / sd) / sd)
}

/// Price of a European payoff by quadrature in X-space:
/// `e^{-(r+rho)T}/u(x0) Int u(x) p_X(T; x0, x) payoff(F(x)) dx`
/// over the ten-standard-deviation window of the OU kernel.
pub fn price_european_quadrature<F: Fn(f64) -> f64>(
    p: &UouParams,
    payoff: F,
    s0: f64,
    maturity: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(maturity > 0.0) {
        return Err(UouError::Domain {
            func: "price_european_quadrature",
            what: format!("maturity must be positive, got {maturity}"),
        });
    }
    let x0 = inverse_map(p, s0)?;
    let (a, b) = p.transition_window(maturity, x0);
    let u0 = u_hat(p, x0)?;
    let integrand = |x: f64| -> f64 {
        let u = match u_hat(p, x) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        let px = match p_x(p, maturity, x0, x) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        let s = match map_f(p, x) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        u * px * payoff(s)
    };
    let raw = integrate(integrand, a, b, spec)?;
    if !raw.is_finite() {
        return Err(UouError::Domain {
            func: "price_european_quadrature",
            what: "integrand not evaluable over the quadrature window".into(),
        });
    }
    Ok((-(p.rate + p.rho) * maturity).exp() / u0 * raw)
}


#[cfg(test)]
mod probe {
    use super::*;
    use crate::specfun::QuadratureSpec;

    #[test]
    fn parity_probe() {
        let p = tests::thick();
        let s0 = 100.0;
        for (name, spec) in [
            ("default", QuadratureSpec::default()),
            ("big", QuadratureSpec::new(1e-12, 1e-11, 4000).unwrap()),
            ("vbig", QuadratureSpec::new(1e-13, 1e-12, 20000).unwrap()),
        ] {
            let k = 100.0;
            let call = price_european_quadrature(&p, |s| (s - k).max(0.0), s0, 1.0, &spec).unwrap();
            let put = price_european_quadrature(&p, |s| (k - s).max(0.0), s0, 1.0, &spec).unwrap();
            println!("{name}: C={call:.9} P={put:.9} C-P={:.9} target={:.9}",
                call - put, s0 - k * (-0.05_f64).exp());
        }
    }
}
