//! Bounded coefficient functions of time with declared extrema metadata.
//!
//! Every nonautonomous coefficient (recruitment rates, mortality rates, the
//! outer factor rho, delay lags) is a [`TimeFunction`]: a concrete functional
//! form plus four declared numbers describing its global and tail range.
//! True limits are not computable from black-box samples, so the bounds
//! engine consumes the declared metadata and validation cross-checks it by
//! dense sampling.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ModelError;

/// Functional form of a coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeFnKind {
    Constant(f64),
    /// `offset + amplitude * sin(omega * t + phase)`
    Sinusoid {
        offset: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    /// Linear interpolation between `(t, value)` knots, constant extension
    /// before the first and beyond the last knot.
    PiecewiseLinear(Vec<(f64, f64)>),
}

/// Declared global and tail range of a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    pub inf: f64,
    pub sup: f64,
    pub tail_liminf: f64,
    pub tail_limsup: f64,
}

impl Extrema {
    pub fn constant(c: f64) -> Self {
        Extrema {
            inf: c,
            sup: c,
            tail_liminf: c,
            tail_limsup: c,
        }
    }

    /// inf <= tail_liminf <= tail_limsup <= sup
    pub fn ordered(&self) -> bool {
        self.inf <= self.tail_liminf
            && self.tail_liminf <= self.tail_limsup
            && self.tail_limsup <= self.sup
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeFunction {
    kind: TimeFnKind,
    meta: Extrema,
}

impl TimeFunction {
    pub fn constant(c: f64) -> Self {
        TimeFunction {
            kind: TimeFnKind::Constant(c),
            meta: Extrema::constant(c),
        }
    }

    /// `offset + amplitude * sin(omega t + phase)`; metadata derived from the
    /// amplitude (degenerate frequency or amplitude collapses to a constant
    /// range).
    pub fn sinusoid(offset: f64, amplitude: f64, omega: f64, phase: f64) -> Self {
        let meta = if amplitude == 0.0 || omega == 0.0 {
            Extrema::constant(offset + amplitude * phase.sin())
        } else {
            Extrema {
                inf: offset - amplitude.abs(),
                sup: offset + amplitude.abs(),
                tail_liminf: offset - amplitude.abs(),
                tail_limsup: offset + amplitude.abs(),
            }
        };
        TimeFunction {
            kind: TimeFnKind::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            },
            meta,
        }
    }

    /// Piecewise-linear knots with strictly increasing nonnegative times.
    /// Extrema of a linear interpolant occur at knots; the tail is the
    /// constant extension past the last knot.
    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        if knots.is_empty() {
            return Err(ModelError::InvalidTimeFunction(
                "piecewise-linear needs at least one knot".into(),
            ));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(ModelError::InvalidTimeFunction(format!(
                    "knot times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if knots[0].0 < 0.0 {
            return Err(ModelError::InvalidTimeFunction(
                "knot times must be nonnegative".into(),
            ));
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(ModelError::InvalidTimeFunction(
                "knots must be finite".into(),
            ));
        }
        let vmin = knots.iter().map(|k| k.1).fold(f64::INFINITY, f64::min);
        let vmax = knots.iter().map(|k| k.1).fold(f64::NEG_INFINITY, f64::max);
        let last = knots.last().unwrap().1;
        Ok(TimeFunction {
            kind: TimeFnKind::PiecewiseLinear(knots),
            meta: Extrema {
                inf: vmin,
                sup: vmax,
                tail_liminf: last,
                tail_limsup: last,
            },
        })
    }

    /// Build from an explicit kind and caller-declared metadata (JSON path).
    /// Declared values are taken on trust here; `validate_model` checks them
    /// against dense samples.
    pub fn with_declared(kind: TimeFnKind, meta: Extrema) -> Self {
        TimeFunction { kind, meta }
    }

    pub fn kind(&self) -> &TimeFnKind {
        &self.kind
    }

    pub fn meta(&self) -> Extrema {
        self.meta
    }

    pub fn inf(&self) -> f64 {
        self.meta.inf
    }

    pub fn sup(&self) -> f64 {
        self.meta.sup
    }

    pub fn tail_liminf(&self) -> f64 {
        self.meta.tail_liminf
    }

    pub fn tail_limsup(&self) -> f64 {
        self.meta.tail_limsup
    }

    /// True when the function is the constant written in its kind (not merely
    /// a degenerate sinusoid).
    pub fn is_constant(&self) -> bool {
        matches!(self.kind, TimeFnKind::Constant(_))
    }

    /// Identically-zero test used by family detection (`kappa == 0` etc.).
    pub fn is_zero(&self) -> bool {
        self.meta.inf == 0.0 && self.meta.sup == 0.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            TimeFnKind::Constant(c) => *c,
            TimeFnKind::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => offset + amplitude * (omega * t + phase).sin(),
            TimeFnKind::PiecewiseLinear(knots) => eval_piecewise(knots, t),
        }
    }

    /// Time after which the function has settled into its tail behavior:
    /// the last knot for piecewise-linear kinds, immediately for the rest.
    pub fn tail_transient_end(&self) -> f64 {
        match &self.kind {
            TimeFnKind::PiecewiseLinear(knots) => knots.last().map_or(0.0, |k| k.0),
            _ => 0.0,
        }
    }

    /// Fundamental period for sinusoids; `None` for aperiodic kinds.
    pub fn period(&self) -> Option<f64> {
        match self.kind {
            TimeFnKind::Sinusoid {
                omega, amplitude, ..
            } if omega != 0.0 && amplitude != 0.0 => Some(2.0 * std::f64::consts::PI / omega.abs()),
            _ => None,
        }
    }

    /// Min and max over `samples + 1` uniform points of `[t0, t1]`.
    pub fn sampled_range(&self, t0: f64, t1: f64, samples: usize) -> (f64, f64) {
        let n = samples.max(1);
        let dt = (t1 - t0) / n as f64;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=n {
            let v = self.eval(t0 + i as f64 * dt);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

pub(crate) fn eval_piecewise(knots: &[(f64, f64)], t: f64) -> f64 {
    let first = knots[0];
    let last = *knots.last().unwrap();
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    // partition_point: first knot with time > t
    let idx = knots.partition_point(|k| k.0 <= t);
    let (t0, v0) = knots[idx - 1];
    let (t1, v1) = knots[idx];
    if t == t0 {
        return v0;
    }
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

// ---------------------------------------------------------------------------
// JSON form: {kind, params, inf, sup, tail_liminf, tail_limsup}
// kind "constant": params [c]; "sinusoid": params [offset, amplitude, omega,
// phase]; "piecewise-linear": params are flattened (t, value) pairs.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeFnJson {
    kind: String,
    params: Vec<f64>,
    inf: f64,
    sup: f64,
    tail_liminf: f64,
    tail_limsup: f64,
}

impl Serialize for TimeFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (kind, params) = match &self.kind {
            TimeFnKind::Constant(c) => ("constant", vec![*c]),
            TimeFnKind::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => ("sinusoid", vec![*offset, *amplitude, *omega, *phase]),
            TimeFnKind::PiecewiseLinear(knots) => (
                "piecewise-linear",
                knots.iter().flat_map(|&(t, v)| [t, v]).collect(),
            ),
        };
        TimeFnJson {
            kind: kind.to_string(),
            params,
            inf: self.meta.inf,
            sup: self.meta.sup,
            tail_liminf: self.meta.tail_liminf,
            tail_limsup: self.meta.tail_limsup,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TimeFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = TimeFnJson::deserialize(deserializer)?;
        let kind = match raw.kind.as_str() {
            "constant" => {
                if raw.params.len() != 1 {
                    return Err(D::Error::custom("constant takes exactly one parameter"));
                }
                TimeFnKind::Constant(raw.params[0])
            }
            "sinusoid" => {
                if raw.params.len() != 4 {
                    return Err(D::Error::custom(
                        "sinusoid takes [offset, amplitude, omega, phase]",
                    ));
                }
                TimeFnKind::Sinusoid {
                    offset: raw.params[0],
                    amplitude: raw.params[1],
                    omega: raw.params[2],
                    phase: raw.params[3],
                }
            }
            "piecewise-linear" => {
                if raw.params.is_empty() || raw.params.len() % 2 != 0 {
                    return Err(D::Error::custom(
                        "piecewise-linear takes flattened (t, value) pairs",
                    ));
                }
                let knots: Vec<(f64, f64)> = raw.params.chunks(2).map(|c| (c[0], c[1])).collect();
                // reuse constructor checks, then override declared metadata below
                TimeFunction::piecewise_linear(knots.clone())
                    .map_err(|e| D::Error::custom(e.to_string()))?;
                TimeFnKind::PiecewiseLinear(knots)
            }
            other => {
                return Err(D::Error::custom(format!(
                    "unknown time function kind `{other}`"
                )))
            }
        };
        Ok(TimeFunction::with_declared(
            kind,
            Extrema {
                inf: raw.inf,
                sup: raw.sup,
                tail_liminf: raw.tail_liminf,
                tail_limsup: raw.tail_limsup,
            },
        ))
    }
}
