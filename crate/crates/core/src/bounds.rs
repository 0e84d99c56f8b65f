//! Hypothesis checking, cooperative envelope construction, equilibrium
//! roots and closed-form asymptotic bounds.
//!
//! The engine sandwiches a nonautonomous model between two autonomous
//! cooperative comparison equations: the upper envelope combines the largest
//! recruitment with the smallest mortality, the lower envelope the other way
//! around. Their globally attractive positive equilibria `K_l <= K_u`
//! bracket every positive solution's tail. Family-specific closed forms
//! sharpen the bracket using tail extrema of composite coefficient ratios,
//! sampled as composites (extrema do not commute with ratios).

use serde::{Deserialize, Serialize};

use crate::error::BoundsError;
use crate::model::{
    validate_model_with, ModelSpec, MortalityTerm, RecruitmentKind, RecruitmentTerm,
    DEFAULT_CHECK_HORIZON,
};
use crate::timefn::TimeFunction;

/// Bracket-doubling cap for root searches: 2^60.
const BRACKET_CAP: f64 = (1u64 << 60) as f64;

/// Absolute bisection tolerance on the bracket width.
const ROOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    /// Linear delayed recruitment with purely quadratic mortality.
    Quadratic,
    /// Beverton-Holt (or mixed linear) recruitment with linear plus
    /// quadratic mortality.
    BevertonHolt,
    /// Ricker recruitment with linear mortality and no quadratic term.
    Nicholson,
    /// Anything else in the factored recruitment/mortality form.
    Factored,
}

impl std::fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelFamily::Quadratic => "quadratic",
            ModelFamily::BevertonHolt => "beverton-holt",
            ModelFamily::Nicholson => "nicholson",
            ModelFamily::Factored => "factored",
        };
        f.write_str(s)
    }
}

pub fn detect_family(model: &ModelSpec) -> ModelFamily {
    let all_ricker = model.recruitment.iter().all(|t| {
        matches!(
            t.kind,
            RecruitmentKind::Ricker | RecruitmentKind::CappedRicker
        )
    });
    if all_ricker && model.mortality.kappa.is_zero() {
        return ModelFamily::Nicholson;
    }
    let all_saturating = model.recruitment.iter().all(|t| {
        matches!(
            t.kind,
            RecruitmentKind::Linear | RecruitmentKind::BevertonHolt
        )
    });
    if all_saturating {
        if model.mortality.mu.is_zero()
            && model.recruitment.iter().all(|t| t.is_linear_equivalent())
        {
            return ModelFamily::Quadratic;
        }
        return ModelFamily::BevertonHolt;
    }
    ModelFamily::Factored
}

// ---------------------------------------------------------------------------
// Hypotheses
// ---------------------------------------------------------------------------

/// Named hypothesis verdict; `pass` iff `margin > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
}

impl Hypothesis {
    fn new(name: &str, margin: f64) -> Self {
        Hypothesis {
            name: name.to_string(),
            pass: margin > 0.0,
            margin,
        }
    }
}

fn sum_alpha_inf(model: &ModelSpec) -> f64 {
    model.recruitment.iter().map(|t| t.alpha.inf()).sum()
}

fn sum_alpha_sup(model: &ModelSpec) -> f64 {
    model.recruitment.iter().map(|t| t.alpha.sup()).sum()
}

/// Floor on the coefficients that must stay bounded away from zero: every
/// recruitment rate and the mortality coefficient that makes the family
/// coercive (`kappa` for the quadratic and Beverton-Holt families, the
/// linear rate for the Nicholson family). Positivity of `rho` is a
/// validation concern, handled before any report is assembled.
fn h1_margin(model: &ModelSpec, family: ModelFamily) -> f64 {
    let mut m = f64::INFINITY;
    for term in &model.recruitment {
        m = m.min(term.alpha.inf());
    }
    let kappa = &model.mortality.kappa;
    let mortality_floor = match family {
        ModelFamily::Quadratic | ModelFamily::BevertonHolt => kappa.inf(),
        ModelFamily::Nicholson => model.mortality.mu.inf(),
        ModelFamily::Factored => {
            if kappa.is_zero() {
                model.mortality.mu.inf()
            } else {
                kappa.inf()
            }
        }
    };
    m.min(mortality_floor)
}

fn cond_34_margin(model: &ModelSpec) -> f64 {
    sum_alpha_inf(model) - model.mortality.mu.sup()
}

fn cond_314_left_margin(model: &ModelSpec) -> f64 {
    sum_alpha_inf(model) - model.mortality.mu.sup()
}

fn cond_314_right_margin(model: &ModelSpec) -> f64 {
    std::f64::consts::E * model.mortality.mu.inf() - sum_alpha_sup(model)
}

fn h2_margin(model: &ModelSpec, family: ModelFamily) -> f64 {
    let has_ricker = model
        .recruitment
        .iter()
        .any(|t| t.kind == RecruitmentKind::Ricker);
    if !has_ricker {
        return 1.0;
    }
    if family == ModelFamily::Nicholson {
        // a Ricker term is usable through its capped majorant only in the
        // cooperative regime
        cond_314_left_margin(model).min(cond_314_right_margin(model))
    } else {
        -1.0
    }
}

fn h3_margin(model: &ModelSpec) -> f64 {
    match build_envelopes(model) {
        Ok(pair) => {
            let at_zero = percap_recruitment(&pair.lower, 0.0) - percap_mortality(&pair.lower, 0.0);
            let far = percap_recruitment(&pair.upper, BRACKET_CAP)
                - percap_mortality(&pair.upper, BRACKET_CAP);
            at_zero.min(-far)
        }
        Err(_) => -1.0,
    }
}

fn applicable_conditions(family: ModelFamily) -> &'static [&'static str] {
    match family {
        ModelFamily::Quadratic | ModelFamily::BevertonHolt => {
            &["h1", "cond-3.4", "H2-monotone", "H3-roots"]
        }
        ModelFamily::Nicholson => &[
            "h1",
            "cond-3.14-left",
            "cond-3.14-right",
            "H2-monotone",
            "H3-roots",
        ],
        ModelFamily::Factored => &["h1", "H2-monotone", "H3-roots"],
    }
}

/// Evaluate one named condition against the model's declared metadata.
/// Errors with `FamilyMismatch` when the condition does not apply to the
/// model's family.
pub fn check_named(model: &ModelSpec, name: &str) -> Result<Hypothesis, BoundsError> {
    let family = detect_family(model);
    if !applicable_conditions(family).contains(&name) {
        return Err(BoundsError::FamilyMismatch {
            condition: name.to_string(),
            family: family.to_string(),
        });
    }
    let margin = match name {
        "h1" => h1_margin(model, family),
        "cond-3.4" => cond_34_margin(model),
        "cond-3.14-left" => cond_314_left_margin(model),
        "cond-3.14-right" => cond_314_right_margin(model),
        "H2-monotone" => h2_margin(model, family),
        "H3-roots" => h3_margin(model),
        other => {
            return Err(BoundsError::FamilyMismatch {
                condition: other.to_string(),
                family: family.to_string(),
            })
        }
    };
    Ok(Hypothesis::new(name, margin))
}

/// All conditions applicable to the model's family, with margins computed
/// from declared coefficient metadata.
pub fn check_hypotheses(model: &ModelSpec) -> Vec<Hypothesis> {
    let family = detect_family(model);
    applicable_conditions(family)
        .iter()
        .map(|name| check_named(model, name).expect("condition applicable by construction"))
        .collect()
}

// ---------------------------------------------------------------------------
// Envelopes
// ---------------------------------------------------------------------------

/// The two autonomous cooperative comparison models. `upper` pairs the
/// largest recruitment with the smallest mortality, `lower` the reverse;
/// delays and `rho` are copied verbatim (`rho` scales speed, not limits).
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePair {
    pub lower: ModelSpec,
    pub upper: ModelSpec,
}

fn envelope_term(term: &RecruitmentTerm, upper: bool) -> RecruitmentTerm {
    let alpha = TimeFunction::constant(if upper {
        term.alpha.sup()
    } else {
        term.alpha.inf()
    });
    let delay = term.delay.clone();
    match term.kind {
        RecruitmentKind::Linear => RecruitmentTerm::linear(alpha, delay),
        RecruitmentKind::BevertonHolt => {
            let beta = term.beta.as_ref().expect("validated beverton-holt term");
            let b = if upper { beta.inf() } else { beta.sup() };
            RecruitmentTerm::beverton_holt(alpha, TimeFunction::constant(b), delay)
        }
        // the monotone capped majorant replaces a humped Ricker term
        RecruitmentKind::Ricker | RecruitmentKind::CappedRicker => {
            RecruitmentTerm::capped_ricker(alpha, delay)
        }
    }
}

/// Build the autonomous cooperative envelope pair from the declared global
/// coefficient extrema.
pub fn build_envelopes(model: &ModelSpec) -> Result<EnvelopePair, BoundsError> {
    let kappa = &model.mortality.kappa;
    let mu = &model.mortality.mu;
    let coercive = kappa.inf() > 0.0 || (kappa.is_zero() && mu.inf() > 0.0);
    if !coercive {
        return Err(BoundsError::EnvelopeUnavailable(
            "neither kappa nor mu is bounded below by a positive constant".into(),
        ));
    }
    let has_ricker = model
        .recruitment
        .iter()
        .any(|t| t.kind == RecruitmentKind::Ricker);
    if has_ricker {
        let family = detect_family(model);
        if family != ModelFamily::Nicholson {
            return Err(BoundsError::EnvelopeUnavailable(
                "non-monotone Ricker terms are only enveloped in the pure Nicholson family".into(),
            ));
        }
        let left = cond_314_left_margin(model);
        let right = cond_314_right_margin(model);
        if !(left > 0.0 && right > 0.0) {
            return Err(BoundsError::EnvelopeUnavailable(format!(
                "capped majorant requires both parts of the cooperative-regime condition \
                 (margins {left} and {right})"
            )));
        }
    }

    let upper = ModelSpec {
        rho: model.rho.clone(),
        recruitment: model
            .recruitment
            .iter()
            .map(|t| envelope_term(t, true))
            .collect(),
        mortality: MortalityTerm::new(
            TimeFunction::constant(mu.inf()),
            TimeFunction::constant(kappa.inf()),
        ),
        tau_max: model.tau_max,
    };
    let lower = ModelSpec {
        rho: model.rho.clone(),
        recruitment: model
            .recruitment
            .iter()
            .map(|t| envelope_term(t, false))
            .collect(),
        mortality: MortalityTerm::new(
            TimeFunction::constant(mu.sup()),
            TimeFunction::constant(kappa.sup()),
        ),
        tau_max: model.tau_max,
    };
    Ok(EnvelopePair { lower, upper })
}

// ---------------------------------------------------------------------------
// Equilibria
// ---------------------------------------------------------------------------

/// Per-capita recruitment of an autonomous model at state `x` (the right
/// limit as x -> 0+ is used at zero).
fn percap_recruitment(model: &ModelSpec, x: f64) -> f64 {
    model
        .recruitment
        .iter()
        .map(|term| {
            let a = term.alpha.eval(0.0);
            match term.kind {
                RecruitmentKind::Linear => a,
                RecruitmentKind::BevertonHolt => {
                    let b = term.beta.as_ref().map_or(0.0, |b| b.eval(0.0));
                    a / (1.0 + b * x)
                }
                RecruitmentKind::Ricker => a * (-x).exp(),
                RecruitmentKind::CappedRicker => {
                    if x <= 1.0 {
                        a * (-x).exp()
                    } else {
                        a * (-1.0f64).exp() / x
                    }
                }
            }
        })
        .sum()
}

/// Per-capita mortality `mu + kappa x` of an autonomous model.
fn percap_mortality(model: &ModelSpec, x: f64) -> f64 {
    model.mortality.mu.eval(0.0) + model.mortality.kappa.eval(0.0) * x
}

/// Root of a decreasing function `g` with `g(0) > 0`: the bracket is found
/// by doubling up to 2^60, then bisected to an absolute width of 1e-12.
pub fn positive_root<F: Fn(f64) -> f64>(g: F) -> Result<f64, BoundsError> {
    if !(g(0.0) > 0.0) {
        return Err(BoundsError::NoSignChange);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > BRACKET_CAP {
            return Err(BoundsError::NoSignChange);
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= ROOT_TOLERANCE {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Attractor equilibria of the envelope pair. `K_u` solves
/// `r^u(x) = d^l(x)`, `K_l` solves `r^l(x) = d^u(x)` in per-capita form.
/// When the lower per-capita balance is already nonpositive at zero the
/// lower equilibrium is zero and permanence is not certified; the same
/// applies to `K_u` when even the upper balance starts nonpositive (then
/// zero is globally attracting).
pub fn equilibrium_bounds(pair: &EnvelopePair) -> Result<(f64, f64), BoundsError> {
    let g_upper = |x: f64| percap_recruitment(&pair.upper, x) - percap_mortality(&pair.upper, x);
    let g_lower = |x: f64| percap_recruitment(&pair.lower, x) - percap_mortality(&pair.lower, x);
    let k_u = if g_upper(0.0) <= 0.0 {
        0.0
    } else {
        positive_root(g_upper)?
    };
    let k_l = if g_lower(0.0) <= 0.0 {
        0.0
    } else {
        positive_root(g_lower)?
    };
    Ok((k_l, k_u))
}

// ---------------------------------------------------------------------------
// Closed-form tail bounds
// ---------------------------------------------------------------------------

/// Sampling scheme for tail extrema of composite coefficient expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct TailSampling {
    /// Where the tail window starts.
    pub t_start: f64,
    /// Minimum window length in time units.
    pub min_window: f64,
    /// Window length as a multiple of the slowest constituent period.
    pub periods: f64,
    /// Number of sample intervals across the window.
    pub samples: usize,
}

impl Default for TailSampling {
    fn default() -> Self {
        TailSampling {
            t_start: 100.0,
            min_window: 100.0,
            periods: 8.0,
            samples: 4096,
        }
    }
}

/// Min/max of `f` over the tail window, refined at interior local extrema
/// by a three-point parabolic fit. The refinement can only widen the raw
/// sampled range, so certification stays conservative.
fn tail_extrema_of<F: Fn(f64) -> f64>(
    f: F,
    max_period: Option<f64>,
    cfg: &TailSampling,
) -> (f64, f64) {
    let window = match max_period {
        Some(p) => (cfg.periods * p).max(cfg.min_window),
        None => cfg.min_window,
    };
    let n = cfg.samples.max(2);
    let dt = window / n as f64;
    let ys: Vec<f64> = (0..=n).map(|i| f(cfg.t_start + i as f64 * dt)).collect();
    let mut lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for i in 1..n {
        let (ym, y0, yp) = (ys[i - 1], ys[i], ys[i + 1]);
        let is_max = y0 >= ym && y0 >= yp;
        let is_min = y0 <= ym && y0 <= yp;
        if !(is_max || is_min) {
            continue;
        }
        let a = 0.5 * (yp + ym - 2.0 * y0);
        if a == 0.0 {
            continue;
        }
        let b = 0.5 * (yp - ym);
        let s = -b / (2.0 * a);
        if s.abs() > 1.0 {
            continue;
        }
        let v = y0 - b * b / (4.0 * a);
        if is_max {
            hi = hi.max(v);
        } else {
            lo = lo.min(v);
        }
    }
    (lo, hi)
}

fn max_period(fns: &[&TimeFunction]) -> Option<f64> {
    fns.iter()
        .filter_map(|f| f.period())
        .fold(None, |acc, p| Some(acc.map_or(p, |a: f64| a.max(p))))
}

/// Sampling window that starts past every piecewise transient among the
/// constituents.
fn settled_window(fns: &[&TimeFunction], cfg: &TailSampling) -> TailSampling {
    let transient = fns
        .iter()
        .map(|f| f.tail_transient_end())
        .fold(0.0f64, f64::max);
    TailSampling {
        t_start: cfg.t_start.max(transient),
        ..cfg.clone()
    }
}

fn quadratic_ratio_bounds(model: &ModelSpec, cfg: &TailSampling) -> (f64, f64) {
    let mut fns: Vec<&TimeFunction> = model.recruitment.iter().map(|t| &t.alpha).collect();
    fns.push(&model.mortality.mu);
    fns.push(&model.mortality.kappa);
    let period = max_period(&fns);
    let cfg = settled_window(&fns, cfg);
    let ratio = |t: f64| {
        let sum: f64 = model.recruitment.iter().map(|r| r.alpha.eval(t)).sum();
        (sum - model.mortality.mu.eval(t)) / model.mortality.kappa.eval(t)
    };
    tail_extrema_of(ratio, period, &cfg)
}

fn nicholson_log_bounds(model: &ModelSpec, cfg: &TailSampling) -> (f64, f64) {
    let mut fns: Vec<&TimeFunction> = model.recruitment.iter().map(|t| &t.alpha).collect();
    fns.push(&model.mortality.mu);
    let period = max_period(&fns);
    let cfg = settled_window(&fns, cfg);
    let ratio = |t: f64| {
        let sum: f64 = model.recruitment.iter().map(|r| r.alpha.eval(t)).sum();
        (sum / model.mortality.mu.eval(t)).ln()
    };
    tail_extrema_of(ratio, period, &cfg)
}

/// Closed-form `(m0, M0)` for `model` read as `family`, with explicit
/// sampling configuration. `FamilyMismatch` when the model cannot be read
/// as the requested family; `UnsupportedFamily` for the general factored
/// form.
pub fn closed_form_bounds_as_with(
    model: &ModelSpec,
    family: ModelFamily,
    cfg: &TailSampling,
) -> Result<(f64, f64), BoundsError> {
    let mismatch = |why: &str| BoundsError::FamilyMismatch {
        condition: format!("closed-form bounds ({why})"),
        family: family.to_string(),
    };
    match family {
        ModelFamily::Quadratic => {
            if !model.recruitment.iter().all(|t| t.is_linear_equivalent())
                || !model.mortality.mu.is_zero()
            {
                return Err(mismatch("needs linear recruitment and mu == 0"));
            }
            if !(model.mortality.kappa.inf() > 0.0) {
                return Err(mismatch("needs kappa bounded away from zero"));
            }
            Ok(quadratic_ratio_bounds(model, cfg))
        }
        ModelFamily::BevertonHolt => {
            let ok = model.recruitment.iter().all(|t| {
                matches!(
                    t.kind,
                    RecruitmentKind::Linear | RecruitmentKind::BevertonHolt
                )
            });
            if !ok {
                return Err(mismatch("needs linear or beverton-holt recruitment"));
            }
            if !(model.mortality.kappa.inf() > 0.0) {
                return Err(mismatch("needs kappa bounded away from zero"));
            }
            let some_beta = model
                .recruitment
                .iter()
                .any(|t| t.beta.as_ref().is_some_and(|b| b.sup() > 0.0));
            let (_, m_upper) = quadratic_ratio_bounds(model, cfg);
            let m_lower = if some_beta {
                // c0 / c1 from the declared global extrema
                let c0 = sum_alpha_inf(model) - model.mortality.mu.sup();
                let c1 = model.mortality.kappa.sup()
                    + model
                        .recruitment
                        .iter()
                        .map(|t| t.alpha.inf() * t.beta.as_ref().map_or(0.0, |b| b.sup()))
                        .sum::<f64>();
                c0 / c1
            } else {
                quadratic_ratio_bounds(model, cfg).0
            };
            Ok((m_lower, m_upper))
        }
        ModelFamily::Nicholson => {
            let all_ricker = model.recruitment.iter().all(|t| {
                matches!(
                    t.kind,
                    RecruitmentKind::Ricker | RecruitmentKind::CappedRicker
                )
            });
            if !all_ricker || !model.mortality.kappa.is_zero() {
                return Err(mismatch("needs ricker recruitment and kappa == 0"));
            }
            Ok(nicholson_log_bounds(model, cfg))
        }
        ModelFamily::Factored => Err(BoundsError::UnsupportedFamily(family.to_string())),
    }
}

/// [`closed_form_bounds_as_with`] at the default sampling configuration.
pub fn closed_form_bounds_as(
    model: &ModelSpec,
    family: ModelFamily,
) -> Result<(f64, f64), BoundsError> {
    closed_form_bounds_as_with(model, family, &TailSampling::default())
}

/// Closed-form `(m0, M0)` for the model's detected family.
pub fn closed_form_bounds(model: &ModelSpec) -> Result<(f64, f64), BoundsError> {
    closed_form_bounds_as(model, detect_family(model))
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Hypothesis verdicts plus every bound the model's family supports and the
/// certified asymptotic interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub family: ModelFamily,
    pub hypotheses: Vec<Hypothesis>,
    /// Closed-form lower tail bound, reported when its hypotheses pass.
    pub m0: Option<f64>,
    /// Closed-form upper tail bound, reported when its hypotheses pass.
    #[serde(rename = "M0")]
    pub big_m0: Option<f64>,
    /// Lower envelope equilibrium; zero when permanence is not certified.
    #[serde(rename = "K_l")]
    pub k_l: Option<f64>,
    /// Upper envelope equilibrium; zero when zero is globally attracting.
    #[serde(rename = "K_u")]
    pub k_u: Option<f64>,
    /// `[max of lower bounds, min of upper bounds]` over certified
    /// quantities.
    pub certified: Option<(f64, f64)>,
    pub permanent: bool,
    pub warnings: Vec<String>,
}

fn hypothesis_passes(hyps: &[Hypothesis], name: &str) -> bool {
    hyps.iter().any(|h| h.name == name && h.pass)
}

/// Assemble the full report. The model must pass `validate_model`.
pub fn bounds_report_with(
    model: &ModelSpec,
    cfg: &TailSampling,
    check_horizon: f64,
) -> Result<BoundsReport, BoundsError> {
    let violations = validate_model_with(model, check_horizon);
    if !violations.is_empty() {
        return Err(BoundsError::InvalidModel(violations));
    }
    let family = detect_family(model);
    let hypotheses = check_hypotheses(model);
    let mut warnings = Vec::new();

    // missing envelopes or an unbounded upper balance (no sign change while
    // doubling) both mean no equilibrium bracket, not a hard failure
    let equilibria = match build_envelopes(model).and_then(|pair| equilibrium_bounds(&pair)) {
        Ok(pair) => Some(pair),
        Err(e) => {
            warnings.push(e.to_string());
            None
        }
    };
    let (k_l, k_u) = match equilibria {
        Some((l, u)) => (Some(l), Some(u)),
        None => (None, None),
    };

    let closed_certified = match family {
        ModelFamily::Quadratic => hypothesis_passes(&hypotheses, "h1"),
        ModelFamily::BevertonHolt => {
            hypothesis_passes(&hypotheses, "h1") && hypothesis_passes(&hypotheses, "cond-3.4")
        }
        ModelFamily::Nicholson => {
            hypothesis_passes(&hypotheses, "h1")
                && hypothesis_passes(&hypotheses, "cond-3.14-left")
                && hypothesis_passes(&hypotheses, "cond-3.14-right")
        }
        ModelFamily::Factored => false,
    };
    let (m0, big_m0) = if closed_certified {
        let (lo, hi) = closed_form_bounds_as_with(model, family, cfg)?;
        (Some(lo), Some(hi))
    } else {
        (None, None)
    };

    if family == ModelFamily::Nicholson && closed_certified {
        warnings.push(
            "certification is envelope-based (cooperative regime); it does not extend to the \
             wider attractivity regime of the autonomous equation"
                .to_string(),
        );
    }

    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    for v in [k_l, m0].into_iter().flatten() {
        if v.is_finite() {
            lowers.push(v);
        }
    }
    for v in [k_u, big_m0].into_iter().flatten() {
        if v.is_finite() {
            uppers.push(v);
        }
    }
    let certified = if lowers.is_empty() || uppers.is_empty() {
        None
    } else {
        let mut lo = lowers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut hi = uppers.iter().copied().fold(f64::INFINITY, f64::min);
        // closed-form bounds and envelope roots coincide for constant
        // coefficients; root tolerance can then invert the interval by a
        // hair, so collapse it instead
        let eps = 1e-9 * (1.0 + lo.abs());
        if lo > hi && lo - hi <= eps {
            let mid = 0.5 * (lo + hi);
            lo = mid;
            hi = mid;
        }
        Some((lo, hi))
    };
    let permanent = certified.is_some_and(|(lo, hi)| lo > 0.0 && lo <= hi);

    Ok(BoundsReport {
        family,
        hypotheses,
        m0,
        big_m0,
        k_l,
        k_u,
        certified,
        permanent,
        warnings,
    })
}

/// [`bounds_report_with`] at the default sampling configuration and check
/// horizon.
pub fn bounds_report(model: &ModelSpec) -> Result<BoundsReport, BoundsError> {
    bounds_report_with(model, &TailSampling::default(), DEFAULT_CHECK_HORIZON)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DelayTerm;
    use crate::preset;

    fn tf(c: f64) -> TimeFunction {
        TimeFunction::constant(c)
    }

    fn point_delay(tau: f64) -> Vec<DelayTerm> {
        vec![DelayTerm::point(tf(tau))]
    }

    fn bh_constant(alpha: f64, beta: f64, mu: f64, kappa: f64) -> ModelSpec {
        preset::bh_logistic(
            vec![tf(alpha)],
            vec![tf(beta)],
            tf(mu),
            tf(kappa),
            point_delay(0.5),
            None,
        )
        .unwrap()
    }

    fn quadratic_sinusoid() -> ModelSpec {
        preset::bastinec_quadratic(
            vec![TimeFunction::sinusoid(2.0, 1.0, 1.0, 0.0)],
            tf(1.0),
            point_delay(1.0),
            None,
        )
        .unwrap()
    }

    fn nicholson_sinusoid() -> ModelSpec {
        preset::nicholson(
            tf(1.0),
            vec![TimeFunction::sinusoid(2.0, 0.5, 1.0, 0.0)],
            point_delay(1.0),
            None,
        )
        .unwrap()
    }

    #[test]
    fn positive_root_examples() {
        assert!((positive_root(|x| 1.0 - x).unwrap() - 1.0).abs() < 1e-11);
        let e = std::f64::consts::E;
        assert!((positive_root(move |x| e * (-x).exp() - 1.0).unwrap() - 1.0).abs() < 1e-11);
        assert!((positive_root(|x| 2.0 / (1.0 + x) - x).unwrap() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn positive_root_no_sign_change() {
        assert!(matches!(
            positive_root(|_| 1.0),
            Err(BoundsError::NoSignChange)
        ));
        assert!(matches!(
            positive_root(|_| -1.0),
            Err(BoundsError::NoSignChange)
        ));
    }

    #[test]
    fn family_detection() {
        assert_eq!(detect_family(&quadratic_sinusoid()), ModelFamily::Quadratic);
        assert_eq!(
            detect_family(&bh_constant(2.0, 1.0, 0.0, 1.0)),
            ModelFamily::BevertonHolt
        );
        assert_eq!(detect_family(&nicholson_sinusoid()), ModelFamily::Nicholson);
        // beverton-holt with beta == 0 and mu == 0 is functionally quadratic
        assert_eq!(
            detect_family(&bh_constant(2.0, 0.0, 0.0, 1.0)),
            ModelFamily::Quadratic
        );
    }

    #[test]
    fn quadratic_envelopes_match_coefficient_extrema() {
        let pair = build_envelopes(&quadratic_sinusoid()).unwrap();
        assert_eq!(pair.upper.recruitment[0].alpha.eval(0.0), 3.0);
        assert_eq!(pair.lower.recruitment[0].alpha.eval(0.0), 1.0);
        assert_eq!(pair.upper.mortality.kappa.eval(0.0), 1.0);
        let (k_l, k_u) = equilibrium_bounds(&pair).unwrap();
        assert!((k_l - 1.0).abs() < 1e-10);
        assert!((k_u - 3.0).abs() < 1e-10);
    }

    #[test]
    fn constant_model_envelopes_collapse() {
        let model = bh_constant(2.0, 1.0, 0.0, 1.0);
        let pair = build_envelopes(&model).unwrap();
        assert_eq!(pair.lower, pair.upper);
        let (k_l, k_u) = equilibrium_bounds(&pair).unwrap();
        assert_eq!(k_l, k_u);
        assert!((k_u - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nicholson_envelope_uses_capped_majorant() {
        let pair = build_envelopes(&nicholson_sinusoid()).unwrap();
        assert_eq!(
            pair.upper.recruitment[0].kind,
            RecruitmentKind::CappedRicker
        );
        assert_eq!(pair.upper.recruitment[0].alpha.eval(0.0), 2.5);
        assert_eq!(pair.lower.recruitment[0].alpha.eval(0.0), 1.5);
        let (k_l, k_u) = equilibrium_bounds(&pair).unwrap();
        assert!((k_l - 1.5f64.ln()).abs() < 1e-10);
        assert!((k_u - 2.5f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn ricker_envelope_requires_cooperative_regime() {
        // beta sup = 3 exceeds e * inf d = e
        let model = preset::nicholson(tf(1.0), vec![tf(3.0)], point_delay(0.5), None).unwrap();
        assert!(matches!(
            build_envelopes(&model),
            Err(BoundsError::EnvelopeUnavailable(_))
        ));
    }

    #[test]
    fn nicholson_margins_exact() {
        let model = nicholson_sinusoid();
        let hyps = check_hypotheses(&model);
        let get = |name: &str| hyps.iter().find(|h| h.name == name).unwrap().margin;
        assert!((get("cond-3.14-left") - 0.5).abs() < 1e-12);
        assert!((get("cond-3.14-right") - (std::f64::consts::E - 2.5)).abs() < 1e-12);
    }

    #[test]
    fn h1_margin_is_smallest_coefficient_floor() {
        let model =
            preset::bastinec_quadratic(vec![tf(2.0)], tf(1.5), point_delay(0.5), None).unwrap();
        let h = check_named(&model, "h1").unwrap();
        assert_eq!(h.margin, 1.5);
        assert!(h.pass);
    }

    #[test]
    fn cond_34_boundary_fails_with_zero_margin() {
        let model = bh_constant(2.0, 1.0, 2.0, 1.0);
        let h = check_named(&model, "cond-3.4").unwrap();
        assert_eq!(h.margin, 0.0);
        assert!(!h.pass);
    }

    #[test]
    fn family_mismatch_for_inapplicable_condition() {
        let model = bh_constant(2.0, 1.0, 0.0, 1.0);
        assert!(matches!(
            check_named(&model, "cond-3.14-left"),
            Err(BoundsError::FamilyMismatch { .. })
        ));
    }

    #[test]
    fn closed_form_examples() {
        // quadratic with alpha = 2 + sin t, kappa = 1
        let (m0, m_up) = closed_form_bounds(&quadratic_sinusoid()).unwrap();
        assert!((m0 - 1.0).abs() < 1e-6);
        assert!((m_up - 3.0).abs() < 1e-6);

        // constant beverton-holt: M0 = 2 and m0 = c0/c1 = 2/3, both exact
        let (m0, m_up) = closed_form_bounds(&bh_constant(2.0, 1.0, 0.0, 1.0)).unwrap();
        assert_eq!(m_up, 2.0);
        assert_eq!(m0, 2.0 / 3.0);

        // nicholson sinusoid: (log 1.5, log 2.5)
        let (m0, m_up) = closed_form_bounds(&nicholson_sinusoid()).unwrap();
        assert!((m0 - 1.5f64.ln()).abs() < 1e-6);
        assert!((m_up - 2.5f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn piecewise_transient_excluded_from_tail_bounds() {
        // alpha ramps from 3 down to 2 by t = 150, past the default window
        // start; the tail bounds must reflect the settled value only
        let alpha =
            TimeFunction::piecewise_linear(vec![(0.0, 3.0), (150.0, 2.0)]).unwrap();
        let model =
            preset::bastinec_quadratic(vec![alpha], tf(1.0), point_delay(0.5), None).unwrap();
        assert!(crate::model::validate_model(&model).is_empty());
        let (m0, m_up) = closed_form_bounds(&model).unwrap();
        assert_eq!(m0, 2.0);
        assert_eq!(m_up, 2.0);
    }

    #[test]
    fn factored_family_has_no_closed_form() {
        let mut model = bh_constant(2.0, 1.0, 0.0, 1.0);
        model.recruitment.push(RecruitmentTerm::capped_ricker(
            tf(1.0),
            DelayTerm::point(tf(0.5)),
        ));
        assert_eq!(detect_family(&model), ModelFamily::Factored);
        assert!(matches!(
            closed_form_bounds(&model),
            Err(BoundsError::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn report_for_constant_bh() {
        let report = bounds_report(&bh_constant(2.0, 1.0, 0.0, 1.0)).unwrap();
        assert!(report.permanent);
        assert_eq!(report.m0, Some(2.0 / 3.0));
        assert_eq!(report.big_m0, Some(2.0));
        let (lo, hi) = report.certified.unwrap();
        assert!((lo - 1.0).abs() < 1e-10);
        assert!((hi - 1.0).abs() < 1e-10);
        // ordering m0 <= K_l
        assert!(report.m0.unwrap() <= report.k_l.unwrap() + 1e-12);
    }

    #[test]
    fn report_extinction_branch() {
        let report = bounds_report(&bh_constant(1.0, 1.0, 2.0, 1.0)).unwrap();
        assert!(!report.permanent);
        assert_eq!(report.k_l, Some(0.0));
        assert_eq!(report.k_u, Some(0.0));
        assert_eq!(report.m0, None);
        assert!(!hypothesis_passes(&report.hypotheses, "cond-3.4"));
    }

    #[test]
    fn unbounded_linear_growth_is_not_certified() {
        // linear recruitment with kappa == 0 and mu below the birth rate:
        // the upper balance never turns negative
        let model = ModelSpec::new(
            vec![RecruitmentTerm::linear(
                tf(2.0),
                DelayTerm::point(tf(0.5)),
            )],
            crate::model::MortalityTerm::new(tf(1.0), tf(0.0)),
            1.0,
        );
        let report = bounds_report(&model).unwrap();
        assert!(!report.permanent);
        assert_eq!(report.k_u, None);
        assert_eq!(report.m0, None);
        assert_eq!(report.big_m0, None);
        assert_eq!(report.certified, None);
        assert!(!hypothesis_passes(&report.hypotheses, "h1"));
        assert!(!hypothesis_passes(&report.hypotheses, "H3-roots"));
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn rho_scaling_leaves_bounds_unchanged() {
        let base = quadratic_sinusoid();
        let scaled = base.clone().with_rho(tf(2.5));
        let a = bounds_report(&base).unwrap();
        let b = bounds_report(&scaled).unwrap();
        assert_eq!(a.k_l, b.k_l);
        assert_eq!(a.k_u, b.k_u);
        assert_eq!(a.m0, b.m0);
        assert_eq!(a.big_m0, b.big_m0);
    }

    #[test]
    fn report_json_shape() {
        let report = bounds_report(&bh_constant(2.0, 1.0, 0.0, 1.0)).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert!(json.get("M0").is_some());
        assert!(json.get("K_l").is_some());
        assert!(json.get("K_u").is_some());
        assert_eq!(json["family"], "beverton-holt");
        let back: BoundsReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }
}
