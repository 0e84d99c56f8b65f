//! Named model families with typed builders and a string-parameter
//! interface used by the CLI (`preset:name?key=value&...`).
//!
//! String values follow a small grammar shared with the CLI:
//! a bare number is a constant, `sin(a,b,w,p)` is `a + b sin(w t + p)`,
//! `pl(t:v,t:v,...)` is piecewise-linear. List-valued keys separate entries
//! with `;`.

use crate::error::ModelError;
use crate::model::{DelayTerm, ModelSpec, MortalityTerm, RecruitmentTerm};
use crate::timefn::TimeFunction;

fn bad(msg: impl Into<String>) -> ModelError {
    ModelError::BadParams(msg.into())
}

fn default_tau_max(delays: &[DelayTerm]) -> f64 {
    let sup = delays
        .iter()
        .map(|d| d.max_lag_sup())
        .fold(0.0f64, f64::max);
    if sup > 0.0 {
        sup
    } else {
        1.0
    }
}

fn broadcast_delays(delays: Vec<DelayTerm>, m: usize) -> Result<Vec<DelayTerm>, ModelError> {
    if delays.len() == m {
        Ok(delays)
    } else if delays.len() == 1 {
        Ok(vec![delays[0].clone(); m])
    } else {
        Err(bad(format!(
            "need {m} delay entries (or a single one to broadcast), got {}",
            delays.len()
        )))
    }
}

/// Quadratic recruitment model `x' = sum_k alpha_k(t) x(t - tau_k(t)) - beta(t) x^2`.
pub fn bastinec_quadratic(
    alphas: Vec<TimeFunction>,
    beta: TimeFunction,
    delays: Vec<DelayTerm>,
    tau_max: Option<f64>,
) -> Result<ModelSpec, ModelError> {
    if alphas.is_empty() {
        return Err(bad("need at least one alpha"));
    }
    let delays = broadcast_delays(delays, alphas.len())?;
    let tau_max = tau_max.unwrap_or_else(|| default_tau_max(&delays));
    let recruitment = alphas
        .into_iter()
        .zip(delays)
        .map(|(a, d)| RecruitmentTerm::linear(a, d))
        .collect();
    Ok(ModelSpec::new(
        recruitment,
        MortalityTerm::new(TimeFunction::constant(0.0), beta),
        tau_max,
    ))
}

/// Constant-coefficient quadratic model with an outer factor `rho(t)`:
/// `x' = rho(t) [ sum_k alpha_k x(t - tau_k(t)) - beta x^2 ]`. Its positive
/// equilibrium is `K* = (1/beta) sum_k alpha_k`.
pub fn bastinec_constant(
    alphas: &[f64],
    beta: f64,
    delays: Vec<DelayTerm>,
    rho: Option<TimeFunction>,
    tau_max: Option<f64>,
) -> Result<ModelSpec, ModelError> {
    let alpha_fns = alphas.iter().map(|&a| TimeFunction::constant(a)).collect();
    let mut model = bastinec_quadratic(alpha_fns, TimeFunction::constant(beta), delays, tau_max)?;
    if let Some(rho) = rho {
        model = model.with_rho(rho);
    }
    Ok(model)
}

/// Beverton-Holt recruitment with linear plus quadratic mortality:
/// `x' = sum_k alpha_k(t) y_k / (1 + beta_k(t) y_k) - mu(t) x - kappa(t) x^2`.
pub fn bh_logistic(
    alphas: Vec<TimeFunction>,
    betas: Vec<TimeFunction>,
    mu: TimeFunction,
    kappa: TimeFunction,
    delays: Vec<DelayTerm>,
    tau_max: Option<f64>,
) -> Result<ModelSpec, ModelError> {
    if alphas.is_empty() {
        return Err(bad("need at least one alpha"));
    }
    let m = alphas.len();
    let betas = if betas.len() == m {
        betas
    } else if betas.len() == 1 {
        vec![betas[0].clone(); m]
    } else if betas.is_empty() {
        vec![TimeFunction::constant(0.0); m]
    } else {
        return Err(bad(format!("need {m} beta entries, got {}", betas.len())));
    };
    let delays = broadcast_delays(delays, m)?;
    let tau_max = tau_max.unwrap_or_else(|| default_tau_max(&delays));
    let recruitment = alphas
        .into_iter()
        .zip(betas)
        .zip(delays)
        .map(|((a, b), d)| RecruitmentTerm::beverton_holt(a, b, d))
        .collect();
    Ok(ModelSpec::new(
        recruitment,
        MortalityTerm::new(mu, kappa),
        tau_max,
    ))
}

/// Alternative delayed-logistic formulation rescaled to a single
/// Beverton-Holt term: `alpha = gamma e^{-mu tau}`,
/// `beta = kappa (1 - e^{-mu tau}) / mu`, mortality `(mu, kappa)`, point
/// delay `tau`.
pub fn arino(gamma: f64, mu: f64, kappa: f64, tau: f64) -> Result<ModelSpec, ModelError> {
    if !(mu > 0.0) {
        return Err(bad("arino requires mu > 0"));
    }
    if !(gamma > 0.0) || !(kappa > 0.0) || !(tau >= 0.0) {
        return Err(bad("arino requires gamma > 0, kappa > 0, tau >= 0"));
    }
    let decay = (-mu * tau).exp();
    let alpha = gamma * decay;
    let beta = kappa * (1.0 - decay) / mu;
    bh_logistic(
        vec![TimeFunction::constant(alpha)],
        vec![TimeFunction::constant(beta)],
        TimeFunction::constant(mu),
        TimeFunction::constant(kappa),
        vec![DelayTerm::point(TimeFunction::constant(tau))],
        None,
    )
}

/// Nicholson blowflies family `x' = -d(t) x + sum_k beta_k(t) h(x(t - tau_k(t)))`
/// with `h(y) = y e^{-y}`. The paper's `beta_k` maps to the Ricker `alpha`.
pub fn nicholson(
    d: TimeFunction,
    betas: Vec<TimeFunction>,
    delays: Vec<DelayTerm>,
    tau_max: Option<f64>,
) -> Result<ModelSpec, ModelError> {
    if betas.is_empty() {
        return Err(bad("need at least one beta"));
    }
    let delays = broadcast_delays(delays, betas.len())?;
    let tau_max = tau_max.unwrap_or_else(|| default_tau_max(&delays));
    let recruitment = betas
        .into_iter()
        .zip(delays)
        .map(|(b, d)| RecruitmentTerm::ricker(b, d))
        .collect();
    Ok(ModelSpec::new(
        recruitment,
        MortalityTerm::new(d, TimeFunction::constant(0.0)),
        tau_max,
    ))
}

/// Autonomous Nicholson equation with constant coefficients and point delays.
pub fn nicholson_autonomous(d: f64, betas: &[f64], taus: &[f64]) -> Result<ModelSpec, ModelError> {
    let beta_fns = betas.iter().map(|&b| TimeFunction::constant(b)).collect();
    let delays = taus
        .iter()
        .map(|&t| DelayTerm::point(TimeFunction::constant(t)))
        .collect();
    nicholson(TimeFunction::constant(d), beta_fns, delays, None)
}

// ---------------------------------------------------------------------------
// String-parameter interface
// ---------------------------------------------------------------------------

/// Parse one time-function literal: `3.5`, `sin(2,1,1,0)` or
/// `pl(0:1,1:3)`.
pub fn parse_time_fn(s: &str) -> Result<TimeFunction, ModelError> {
    let s = s.trim();
    if let Some(body) = s.strip_prefix("sin(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<f64> = body
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("bad sinusoid `{s}`: {e}")))?;
        if parts.len() != 4 {
            return Err(bad(format!("sinusoid takes 4 numbers, got `{s}`")));
        }
        return Ok(TimeFunction::sinusoid(
            parts[0], parts[1], parts[2], parts[3],
        ));
    }
    if let Some(body) = s.strip_prefix("pl(").and_then(|r| r.strip_suffix(')')) {
        let mut knots = Vec::new();
        for pair in body.split(',') {
            let (t, v) = pair
                .split_once(':')
                .ok_or_else(|| bad(format!("bad knot `{pair}`, expected t:value")))?;
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|e| bad(format!("bad knot time: {e}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| bad(format!("bad knot value: {e}")))?;
            knots.push((t, v));
        }
        return TimeFunction::piecewise_linear(knots);
    }
    let c: f64 = s
        .parse()
        .map_err(|e| bad(format!("bad time function `{s}`: {e}")))?;
    Ok(TimeFunction::constant(c))
}

fn parse_time_fn_list(s: &str) -> Result<Vec<TimeFunction>, ModelError> {
    s.split(';').map(parse_time_fn).collect()
}

fn parse_number(s: &str) -> Result<f64, ModelError> {
    s.trim()
        .parse()
        .map_err(|e| bad(format!("bad number `{s}`: {e}")))
}

fn parse_number_list(s: &str) -> Result<Vec<f64>, ModelError> {
    s.split(';').map(parse_number).collect()
}

struct Params<'a> {
    pairs: &'a [(String, String)],
    used: Vec<bool>,
}

impl<'a> Params<'a> {
    fn new(pairs: &'a [(String, String)]) -> Self {
        Params {
            pairs,
            used: vec![false; pairs.len()],
        }
    }

    fn take(&mut self, key: &str) -> Option<&'a str> {
        for (i, (k, v)) in self.pairs.iter().enumerate() {
            if k == key {
                self.used[i] = true;
                return Some(v);
            }
        }
        None
    }

    fn require(&mut self, key: &str) -> Result<&'a str, ModelError> {
        self.take(key)
            .ok_or_else(|| bad(format!("missing required parameter `{key}`")))
    }

    fn finish(self) -> Result<(), ModelError> {
        for (i, used) in self.used.iter().enumerate() {
            if !used {
                return Err(bad(format!("unknown parameter `{}`", self.pairs[i].0)));
            }
        }
        Ok(())
    }
}

fn check_m(p: &mut Params, actual: usize) -> Result<(), ModelError> {
    if let Some(m) = p.take("m") {
        let m: usize = m.parse().map_err(|e| bad(format!("bad m: {e}")))?;
        if m != actual {
            return Err(bad(format!("m={m} but {actual} terms were given")));
        }
    }
    Ok(())
}

fn delays_from(p: &mut Params) -> Result<Vec<DelayTerm>, ModelError> {
    let taus = parse_time_fn_list(p.require("tau")?)?;
    Ok(taus.into_iter().map(DelayTerm::point).collect())
}

fn opt_tau_max(p: &mut Params) -> Result<Option<f64>, ModelError> {
    p.take("tau_max").map(parse_number).transpose()
}

/// Construct a preset model from string parameters.
pub fn preset(name: &str, params: &[(String, String)]) -> Result<ModelSpec, ModelError> {
    let mut p = Params::new(params);
    let model = match name {
        "bastinec-quadratic" => {
            let alphas = parse_time_fn_list(p.require("alpha")?)?;
            check_m(&mut p, alphas.len())?;
            let beta = parse_time_fn(p.require("beta")?)?;
            let delays = delays_from(&mut p)?;
            let tau_max = opt_tau_max(&mut p)?;
            bastinec_quadratic(alphas, beta, delays, tau_max)?
        }
        "bastinec-constant" => {
            let alphas = parse_number_list(p.require("alpha")?)?;
            check_m(&mut p, alphas.len())?;
            let beta = parse_number(p.require("beta")?)?;
            let delays = delays_from(&mut p)?;
            let rho = p.take("rho").map(parse_time_fn).transpose()?;
            let tau_max = opt_tau_max(&mut p)?;
            bastinec_constant(&alphas, beta, delays, rho, tau_max)?
        }
        "bh-logistic" => {
            let alphas = parse_time_fn_list(p.require("alpha")?)?;
            check_m(&mut p, alphas.len())?;
            let betas = match p.take("beta") {
                Some(s) => parse_time_fn_list(s)?,
                None => Vec::new(),
            };
            let mu = match p.take("mu") {
                Some(s) => parse_time_fn(s)?,
                None => TimeFunction::constant(0.0),
            };
            let kappa = parse_time_fn(p.require("kappa")?)?;
            let delays = delays_from(&mut p)?;
            let tau_max = opt_tau_max(&mut p)?;
            bh_logistic(alphas, betas, mu, kappa, delays, tau_max)?
        }
        "arino" => {
            let gamma = parse_number(p.require("gamma")?)?;
            let mu = parse_number(p.require("mu")?)?;
            let kappa = parse_number(p.require("kappa")?)?;
            let tau = parse_number(p.require("tau")?)?;
            arino(gamma, mu, kappa, tau)?
        }
        "nicholson" => {
            let d = parse_time_fn(p.require("d")?)?;
            let betas = parse_time_fn_list(p.require("beta")?)?;
            check_m(&mut p, betas.len())?;
            let delays = delays_from(&mut p)?;
            let tau_max = opt_tau_max(&mut p)?;
            nicholson(d, betas, delays, tau_max)?
        }
        "nicholson-autonomous" => {
            let d = parse_number(p.require("d")?)?;
            let betas = parse_number_list(p.require("beta")?)?;
            check_m(&mut p, betas.len())?;
            let taus = parse_number_list(p.require("tau")?)?;
            let taus = if taus.len() == betas.len() {
                taus
            } else if taus.len() == 1 {
                vec![taus[0]; betas.len()]
            } else {
                return Err(bad("tau list length does not match beta list"));
            };
            let tau_max = opt_tau_max(&mut p)?;
            let mut model = nicholson_autonomous(d, &betas, &taus)?;
            if let Some(tm) = tau_max {
                model.tau_max = tm;
            }
            model
        }
        other => return Err(ModelError::UnknownPreset(other.to_string())),
    };
    p.finish()?;
    Ok(model)
}
