//! Model specification: delayed recruitment terms, mortality, initial
//! histories, right-hand-side evaluation and validation.
//!
//! The governing form is
//!
//! ```text
//! x'(t) = rho(t) * [ sum_k term_k(t, y_k) - mu(t) x - kappa(t) x^2 ]
//! ```
//!
//! where `y_k` is the weight-aggregated delayed state feeding recruitment
//! term `k`. Recruitment kinds cover linear, Beverton-Holt, Ricker and the
//! capped Ricker majorant; distributed delays are finite atomic measures
//! (normalized weighted sums of point delays with time-varying lags).

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::timefn::TimeFunction;

/// Weight tolerance for delay normalization.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Slack for sampled-range consistency checks against declared metadata.
pub const SAMPLING_EPSILON: f64 = 1e-9;

/// Default horizon for sampled validations; override per call or via the
/// CLI env variable `PERMADDE_CHECK_HORIZON`.
pub const DEFAULT_CHECK_HORIZON: f64 = 100.0;

const VALIDATION_SAMPLES: usize = 4096;

/// One atom of a finite atomic delay distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayAtom {
    pub lag: TimeFunction,
    pub weight: f64,
}

/// Normalized weighted sum of point delays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayTerm {
    pub atoms: Vec<DelayAtom>,
}

impl DelayTerm {
    /// Single point delay with unit weight.
    pub fn point(lag: TimeFunction) -> Self {
        DelayTerm {
            atoms: vec![DelayAtom { lag, weight: 1.0 }],
        }
    }

    pub fn weight_sum(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn max_lag_sup(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.lag.sup())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecruitmentKind {
    /// `alpha(t) * y`
    Linear,
    /// `alpha(t) * y / (1 + beta(t) * y)`
    BevertonHolt,
    /// `alpha(t) * y * exp(-y)`; not monotone beyond y = 1
    Ricker,
    /// `alpha(t) * H(y)` with `H(y) = y e^{-y}` capped at `e^{-1}` for y > 1
    CappedRicker,
}

impl RecruitmentKind {
    /// Whether `y -> term(t, y)` is nondecreasing for every fixed t.
    pub fn is_monotone(self) -> bool {
        !matches!(self, RecruitmentKind::Ricker)
    }
}

/// Ricker nonlinearity `h(y) = y e^{-y}`.
pub fn ricker_h(y: f64) -> f64 {
    y * (-y).exp()
}

/// Capped Ricker nonlinearity `H`; agrees bitwise with [`ricker_h`] on
/// `[0, 1]` so that envelope inequalities hold without tolerance.
pub fn capped_ricker_h(y: f64) -> f64 {
    if y <= 1.0 {
        ricker_h(y)
    } else {
        (-1.0f64).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecruitmentTerm {
    pub kind: RecruitmentKind,
    pub alpha: TimeFunction,
    /// Saturation coefficient; present only for Beverton-Holt terms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<TimeFunction>,
    pub delay: DelayTerm,
}

impl RecruitmentTerm {
    pub fn linear(alpha: TimeFunction, delay: DelayTerm) -> Self {
        RecruitmentTerm {
            kind: RecruitmentKind::Linear,
            alpha,
            beta: None,
            delay,
        }
    }

    pub fn beverton_holt(alpha: TimeFunction, beta: TimeFunction, delay: DelayTerm) -> Self {
        RecruitmentTerm {
            kind: RecruitmentKind::BevertonHolt,
            alpha,
            beta: Some(beta),
            delay,
        }
    }

    pub fn ricker(alpha: TimeFunction, delay: DelayTerm) -> Self {
        RecruitmentTerm {
            kind: RecruitmentKind::Ricker,
            alpha,
            beta: None,
            delay,
        }
    }

    pub fn capped_ricker(alpha: TimeFunction, delay: DelayTerm) -> Self {
        RecruitmentTerm {
            kind: RecruitmentKind::CappedRicker,
            alpha,
            beta: None,
            delay,
        }
    }

    /// Term value at aggregate delayed state `y`.
    pub fn eval(&self, t: f64, y: f64) -> f64 {
        let a = self.alpha.eval(t);
        match self.kind {
            RecruitmentKind::Linear => a * y,
            RecruitmentKind::BevertonHolt => {
                let b = self.beta.as_ref().map_or(0.0, |b| b.eval(t));
                a * y / (1.0 + b * y)
            }
            RecruitmentKind::Ricker => a * ricker_h(y),
            RecruitmentKind::CappedRicker => a * capped_ricker_h(y),
        }
    }

    /// True when the term is a Beverton-Holt with `beta == 0` everywhere,
    /// i.e. functionally linear.
    pub fn is_linear_equivalent(&self) -> bool {
        match self.kind {
            RecruitmentKind::Linear => true,
            RecruitmentKind::BevertonHolt => self.beta.as_ref().is_none_or(|b| b.is_zero()),
            _ => false,
        }
    }
}

/// `D(t, x) = mu(t) x + kappa(t) x^2`; `D(t, 0) = 0` by form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MortalityTerm {
    pub mu: TimeFunction,
    pub kappa: TimeFunction,
}

impl MortalityTerm {
    pub fn new(mu: TimeFunction, kappa: TimeFunction) -> Self {
        MortalityTerm { mu, kappa }
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.mu.eval(t) * x + self.kappa.eval(t) * x * x
    }
}

/// Full model: `x'(t) = rho(t) * [R(t, delayed states) - D(t, x(t))]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default = "default_rho")]
    pub rho: TimeFunction,
    pub recruitment: Vec<RecruitmentTerm>,
    pub mortality: MortalityTerm,
    pub tau_max: f64,
}

fn default_rho() -> TimeFunction {
    TimeFunction::constant(1.0)
}

impl ModelSpec {
    pub fn new(recruitment: Vec<RecruitmentTerm>, mortality: MortalityTerm, tau_max: f64) -> Self {
        ModelSpec {
            rho: TimeFunction::constant(1.0),
            recruitment,
            mortality,
            tau_max,
        }
    }

    pub fn with_rho(mut self, rho: TimeFunction) -> Self {
        self.rho = rho;
        self
    }

    /// Right-hand side given the aggregate delayed state per recruitment
    /// term (`delayed[k]` feeds term `k`).
    pub fn eval_rhs(&self, t: f64, x_now: f64, delayed: &[f64]) -> Result<f64, ModelError> {
        if delayed.len() != self.recruitment.len() {
            return Err(ModelError::ArityMismatch {
                expected: self.recruitment.len(),
                got: delayed.len(),
            });
        }
        Ok(self.eval_rhs_unchecked(t, x_now, delayed))
    }

    /// Arity-unchecked evaluation for integrator hot loops.
    pub(crate) fn eval_rhs_unchecked(&self, t: f64, x_now: f64, delayed: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (term, &y) in self.recruitment.iter().zip(delayed) {
            sum += term.eval(t, y);
        }
        self.rho.eval(t) * (sum - self.mortality.eval(t, x_now))
    }

    /// Every time function appearing in the model, with a short label.
    pub(crate) fn coefficient_functions(&self) -> Vec<(String, &TimeFunction)> {
        let mut out = vec![("rho".to_string(), &self.rho)];
        for (k, term) in self.recruitment.iter().enumerate() {
            out.push((format!("recruitment[{k}].alpha"), &term.alpha));
            if let Some(beta) = &term.beta {
                out.push((format!("recruitment[{k}].beta"), beta));
            }
            for (j, atom) in term.delay.atoms.iter().enumerate() {
                out.push((format!("recruitment[{k}].delay[{j}].lag"), &atom.lag));
            }
        }
        out.push(("mortality.mu".to_string(), &self.mortality.mu));
        out.push(("mortality.kappa".to_string(), &self.mortality.kappa));
        out
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// One validation finding. `validate_model` collects these instead of
/// aborting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "kebab-case")]
pub enum Violation {
    /// Declared inf/tail/sup ordering broken.
    MetadataOrderInvalid {
        function: String,
    },
    /// Some sampled value exceeds `declared_sup + eps`.
    SampledValueExceedsDeclaredSup {
        function: String,
        t: f64,
        value: f64,
        declared_sup: f64,
    },
    /// Some sampled value drops below `declared_inf - eps`.
    SampledValueBelowDeclaredInf {
        function: String,
        t: f64,
        value: f64,
        declared_inf: f64,
    },
    /// Tail-window sample outside `[tail_liminf - eps, tail_limsup + eps]`.
    SampledTailOutsideDeclaredRange {
        function: String,
        t: f64,
        value: f64,
    },
    /// Coefficient function dips negative (declared inf < 0).
    NegativeDeclaredInf {
        function: String,
        declared_inf: f64,
    },
    WeightsNotNormalized {
        term: usize,
        sum: f64,
    },
    NonPositiveWeight {
        term: usize,
        atom: usize,
        weight: f64,
    },
    LagExceedsTauMax {
        term: usize,
        atom: usize,
        sup: f64,
        tau_max: f64,
    },
    EmptyRecruitment,
    MissingBeta {
        term: usize,
    },
    UnexpectedBeta {
        term: usize,
    },
    NonPositiveTauMax {
        tau_max: f64,
    },
    /// `alpha_k` not bounded away from zero.
    AlphaNotBoundedAway {
        term: usize,
        declared_inf: f64,
    },
    /// No coercive mortality: `kappa` not bounded away from zero and, when
    /// `kappa` vanishes identically, neither is `mu`.
    KappaNotBoundedAway {
        declared_inf: f64,
    },
    /// `rho` not bounded below by a positive constant.
    RhoNotBoundedAway {
        declared_inf: f64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MetadataOrderInvalid { function } => {
                write!(f, "{function}: declared inf/tail/sup ordering invalid")
            }
            Violation::SampledValueExceedsDeclaredSup {
                function,
                t,
                value,
                declared_sup,
            } => write!(
                f,
                "{function}: sample {value} at t={t} exceeds declared sup {declared_sup}"
            ),
            Violation::SampledValueBelowDeclaredInf {
                function,
                t,
                value,
                declared_inf,
            } => write!(
                f,
                "{function}: sample {value} at t={t} below declared inf {declared_inf}"
            ),
            Violation::SampledTailOutsideDeclaredRange { function, t, value } => write!(
                f,
                "{function}: tail sample {value} at t={t} outside declared tail range"
            ),
            Violation::NegativeDeclaredInf {
                function,
                declared_inf,
            } => write!(f, "{function}: declared inf {declared_inf} is negative"),
            Violation::WeightsNotNormalized { term, sum } => {
                write!(f, "recruitment[{term}]: delay weights sum to {sum}, not 1")
            }
            Violation::NonPositiveWeight { term, atom, weight } => write!(
                f,
                "recruitment[{term}].delay[{atom}]: weight {weight} not positive"
            ),
            Violation::LagExceedsTauMax {
                term,
                atom,
                sup,
                tau_max,
            } => write!(
                f,
                "recruitment[{term}].delay[{atom}]: lag sup {sup} exceeds tau_max {tau_max}"
            ),
            Violation::EmptyRecruitment => write!(f, "recruitment list is empty"),
            Violation::MissingBeta { term } => {
                write!(f, "recruitment[{term}]: beverton-holt term lacks beta")
            }
            Violation::UnexpectedBeta { term } => {
                write!(f, "recruitment[{term}]: beta given for a non-beverton-holt kind")
            }
            Violation::NonPositiveTauMax { tau_max } => {
                write!(f, "tau_max {tau_max} not positive")
            }
            Violation::AlphaNotBoundedAway { term, declared_inf } => write!(
                f,
                "recruitment[{term}].alpha: inf {declared_inf} not bounded away from zero"
            ),
            Violation::KappaNotBoundedAway { declared_inf } => write!(
                f,
                "mortality.kappa: inf {declared_inf} not bounded away from zero and mu does not compensate"
            ),
            Violation::RhoNotBoundedAway { declared_inf } => {
                write!(f, "rho: inf {declared_inf} not bounded away from zero")
            }
        }
    }
}

fn check_function(label: &str, f: &TimeFunction, check_horizon: f64, out: &mut Vec<Violation>) {
    let meta = f.meta();
    if !meta.ordered() {
        out.push(Violation::MetadataOrderInvalid {
            function: label.to_string(),
        });
    }
    if meta.inf < 0.0 {
        out.push(Violation::NegativeDeclaredInf {
            function: label.to_string(),
            declared_inf: meta.inf,
        });
    }
    let eps = SAMPLING_EPSILON * (1.0 + meta.sup.abs());
    let n = VALIDATION_SAMPLES;
    let dt = check_horizon / n as f64;
    let mut worst_hi: Option<(f64, f64)> = None;
    let mut worst_lo: Option<(f64, f64)> = None;
    for i in 0..=n {
        let t = i as f64 * dt;
        let v = f.eval(t);
        if v > meta.sup + eps && worst_hi.is_none_or(|(_, w)| v > w) {
            worst_hi = Some((t, v));
        }
        if v < meta.inf - eps && worst_lo.is_none_or(|(_, w)| v < w) {
            worst_lo = Some((t, v));
        }
    }
    if let Some((t, value)) = worst_hi {
        out.push(Violation::SampledValueExceedsDeclaredSup {
            function: label.to_string(),
            t,
            value,
            declared_sup: meta.sup,
        });
    }
    if let Some((t, value)) = worst_lo {
        out.push(Violation::SampledValueBelowDeclaredInf {
            function: label.to_string(),
            t,
            value,
            declared_inf: meta.inf,
        });
    }
    // Tail window: past the check horizon (and past any piecewise
    // transient) the function must stay inside the declared tail range.
    let tail_start = check_horizon.max(f.tail_transient_end());
    let window = f
        .period()
        .map_or(check_horizon, |p| (8.0 * p).max(check_horizon));
    let dt = window / n as f64;
    for i in 0..=n {
        let t = tail_start + i as f64 * dt;
        let v = f.eval(t);
        if v > meta.tail_limsup + eps || v < meta.tail_liminf - eps {
            out.push(Violation::SampledTailOutsideDeclaredRange {
                function: label.to_string(),
                t,
                value: v,
            });
            break;
        }
    }
}

/// Structural checks required before integrating: declared metadata
/// consistent with dense samples, weights normalized, lags within
/// `[0, tau_max]`, coefficients nonnegative, `rho` positive. The strict
/// positivity of `alpha` and of the mortality coefficients is a bounds-engine
/// hypothesis, not an integrability requirement, so it is checked only by
/// [`validate_model`].
pub fn validate_for_integration(model: &ModelSpec, check_horizon: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(model.tau_max > 0.0) {
        out.push(Violation::NonPositiveTauMax {
            tau_max: model.tau_max,
        });
    }
    if model.recruitment.is_empty() {
        out.push(Violation::EmptyRecruitment);
    }
    for (label, f) in model.coefficient_functions() {
        check_function(&label, f, check_horizon, &mut out);
    }
    for (k, term) in model.recruitment.iter().enumerate() {
        match (term.kind, &term.beta) {
            (RecruitmentKind::BevertonHolt, None) => out.push(Violation::MissingBeta { term: k }),
            (RecruitmentKind::BevertonHolt, Some(_)) => {}
            (_, Some(_)) => out.push(Violation::UnexpectedBeta { term: k }),
            (_, None) => {}
        }
        let sum = term.delay.weight_sum();
        if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            out.push(Violation::WeightsNotNormalized { term: k, sum });
        }
        for (j, atom) in term.delay.atoms.iter().enumerate() {
            if !(atom.weight > 0.0) {
                out.push(Violation::NonPositiveWeight {
                    term: k,
                    atom: j,
                    weight: atom.weight,
                });
            }
            if atom.lag.sup() > model.tau_max + WEIGHT_TOLERANCE {
                out.push(Violation::LagExceedsTauMax {
                    term: k,
                    atom: j,
                    sup: atom.lag.sup(),
                    tau_max: model.tau_max,
                });
            }
        }
    }
    if !(model.rho.inf() > 0.0) {
        out.push(Violation::RhoNotBoundedAway {
            declared_inf: model.rho.inf(),
        });
    }
    out
}

/// Full validation: structural checks plus the positivity hypotheses the
/// bounds engine relies on. Empty result means the model is eligible for a
/// bounds report. Mortality must be coercive: either `kappa` is bounded away
/// from zero, or `kappa` vanishes identically and `mu` is bounded away from
/// zero (the Nicholson-type case).
pub fn validate_model_with(model: &ModelSpec, check_horizon: f64) -> Vec<Violation> {
    let mut out = validate_for_integration(model, check_horizon);
    for (k, term) in model.recruitment.iter().enumerate() {
        if !(term.alpha.inf() > 0.0) {
            out.push(Violation::AlphaNotBoundedAway {
                term: k,
                declared_inf: term.alpha.inf(),
            });
        }
    }
    let kappa = &model.mortality.kappa;
    let mu = &model.mortality.mu;
    let coercive = kappa.inf() > 0.0 || (kappa.is_zero() && mu.inf() > 0.0);
    if !coercive {
        out.push(Violation::KappaNotBoundedAway {
            declared_inf: kappa.inf(),
        });
    }
    out
}

/// [`validate_model_with`] at the default check horizon.
pub fn validate_model(model: &ModelSpec) -> Vec<Violation> {
    validate_model_with(model, DEFAULT_CHECK_HORIZON)
}

// ---------------------------------------------------------------------------
// Initial histories
// ---------------------------------------------------------------------------

/// Initial segment on `[-tau_max, 0]`. Sinusoid histories are clipped at
/// zero so that randomly drawn perturbations stay in the nonnegative cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HistorySpec {
    Constant {
        value: f64,
    },
    Sinusoid {
        offset: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    Tabulated {
        knots: Vec<(f64, f64)>,
    },
}

impl HistorySpec {
    pub fn constant(value: f64) -> Self {
        HistorySpec::Constant { value }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            HistorySpec::Constant { value } => *value,
            HistorySpec::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => (offset + amplitude * (omega * theta + phase).sin()).max(0.0),
            HistorySpec::Tabulated { knots } => crate::timefn::eval_piecewise(knots, theta),
        }
    }

    /// One-sided derivative used to seed Hermite data on the history grid.
    pub fn eval_deriv(&self, theta: f64) -> f64 {
        match self {
            HistorySpec::Constant { .. } => 0.0,
            HistorySpec::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => {
                if offset + amplitude * (omega * theta + phase).sin() <= 0.0 {
                    0.0
                } else {
                    amplitude * omega * (omega * theta + phase).cos()
                }
            }
            HistorySpec::Tabulated { knots } => {
                if knots.len() < 2 {
                    return 0.0;
                }
                let idx = knots.partition_point(|k| k.0 < theta).min(knots.len() - 1);
                let idx = idx.max(1);
                let (t0, v0) = knots[idx - 1];
                let (t1, v1) = knots[idx];
                if theta < t0 || theta > t1 {
                    0.0
                } else {
                    (v1 - v0) / (t1 - t0)
                }
            }
        }
    }

    /// Membership in the admissible set: nonnegative on `[-tau_max, 0]`
    /// (dense sampling) with a strictly positive value at zero.
    pub fn admissible(&self, tau_max: f64) -> bool {
        self.nonnegative(tau_max) && self.eval(0.0) > 0.0
    }

    /// Nonnegativity alone; the integrator accepts these (solutions stay
    /// nonnegative) even when the value at zero vanishes.
    pub fn nonnegative(&self, tau_max: f64) -> bool {
        let n = 2048;
        let dt = tau_max / n as f64;
        (0..=n).all(|i| self.eval(-tau_max + i as f64 * dt) >= 0.0)
    }
}
