//! Fixed-step method-of-steps integration with dense output.
//!
//! Classical four-stage Runge-Kutta on a uniform grid; delayed arguments are
//! resolved by cubic Hermite interpolation on already-accepted nodes using
//! the stored node derivatives. A delayed argument falling inside the step
//! being computed (vanishing or sub-step delay) is resolved by linear
//! extrapolation from the last accepted node.

use crate::error::{IntegrateError, ModelError};
use crate::model::{validate_for_integration, HistorySpec, ModelSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Step size.
    pub h: f64,
    /// Integration horizon T (snapped up to a whole number of steps).
    pub horizon: f64,
    /// Record every `record_stride`-th node (the final node is always kept).
    pub record_stride: usize,
    /// Abort when a value drops below `-positivity_tolerance`.
    pub positivity_tolerance: f64,
    /// Horizon for sampled metadata validation.
    pub check_horizon: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            h: 0.01,
            horizon: 200.0,
            record_stride: 1,
            positivity_tolerance: 1e-9,
            check_horizon: crate::model::DEFAULT_CHECK_HORIZON,
        }
    }
}

impl SolverConfig {
    /// Non-fatal configuration advisories.
    pub fn warnings(&self, tau_max: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.h > tau_max {
            out.push(format!(
                "step h = {} exceeds tau_max = {tau_max}; delayed arguments will be extrapolated",
                self.h
            ));
        }
        if self.horizon < 10.0 * tau_max {
            out.push(format!(
                "horizon T = {} below 10*tau_max = {}; tail estimates will be unreliable",
                self.horizon,
                10.0 * tau_max
            ));
        }
        out
    }
}

/// Dense-output numerical solution. Node values and right-hand-side
/// derivatives on a uniform grid starting one history span before zero; the
/// history segment holds exact samples of the initial function.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
    tau_max: f64,
    step: f64,
    horizon: f64,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Final integration time (last grid node).
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Exact stored value at nodes, cubic Hermite between them.
    pub fn sample(&self, t: f64) -> Result<f64, IntegrateError> {
        let lo = self.times[0];
        let hi = *self.times.last().unwrap();
        let slack = 1e-9 * self.step.max(1.0);
        if t < lo - slack || t > hi + slack {
            return Err(IntegrateError::OutOfRange { t, lo, hi });
        }
        let t = t.clamp(lo, hi);
        // first index with node time > t
        let pp = self.times.partition_point(|&ti| ti <= t);
        if pp == 0 {
            return Ok(self.values[0]);
        }
        let i = pp - 1;
        if self.times[i] == t || i + 1 == self.times.len() {
            return Ok(self.values[i]);
        }
        Ok(hermite(
            t,
            self.times[i],
            self.times[i + 1],
            self.values[i],
            self.values[i + 1],
            self.derivs[i],
            self.derivs[i + 1],
        ))
    }

    /// Write `t,x` rows (optionally `t,x,f`) at 17 significant digits.
    pub fn write_csv<W: std::io::Write>(
        &self,
        mut w: W,
        include_derivative: bool,
    ) -> std::io::Result<()> {
        if include_derivative {
            writeln!(w, "t,x,f")?;
            for i in 0..self.len() {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e}",
                    self.times[i], self.values[i], self.derivs[i]
                )?;
            }
        } else {
            writeln!(w, "t,x")?;
            for i in 0..self.len() {
                writeln!(w, "{:.16e},{:.16e}", self.times[i], self.values[i])?;
            }
        }
        Ok(())
    }
}

fn hermite(t: f64, t0: f64, t1: f64, x0: f64, x1: f64, f0: f64, f1: f64) -> f64 {
    let dt = t1 - t0;
    let s = (t - t0) / dt;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * x0 + h10 * dt * f0 + h01 * x1 + h11 * dt * f1
}

/// Uniform-grid state shared by the stepping loop. Node `i` lives at
/// `(i - n_hist) * h`; nodes `0..=n_hist` hold exact history samples.
struct Dense<'a> {
    h: f64,
    n_hist: usize,
    xs: Vec<f64>,
    fs: Vec<f64>,
    history: &'a HistorySpec,
    tau_max: f64,
}

impl<'a> Dense<'a> {
    fn time(&self, i: usize) -> f64 {
        (i as f64 - self.n_hist as f64) * self.h
    }

    /// Evaluate the solution at `xi`. `value_frontier` is the last node with
    /// an accepted value, `deriv_frontier` the last node whose derivative is
    /// known (equal to `value_frontier` during stage evaluations, one less
    /// while the node derivative itself is being computed).
    fn eval(&self, xi: f64, value_frontier: usize, deriv_frontier: usize) -> f64 {
        if xi <= 0.0 {
            return self.history.eval(xi.max(-self.tau_max));
        }
        let t_df = self.time(deriv_frontier);
        if xi > t_df {
            if value_frontier > deriv_frontier && xi == self.time(value_frontier) {
                return self.xs[value_frontier];
            }
            return self.xs[deriv_frontier] + (xi - t_df) * self.fs[deriv_frontier];
        }
        // locate the bracketing interval; guard against floating rounding
        let mut idx = self.n_hist + (xi / self.h) as usize;
        if idx >= deriv_frontier {
            idx = deriv_frontier - 1;
        }
        while idx + 1 < deriv_frontier && xi >= self.time(idx + 1) {
            idx += 1;
        }
        while idx > 0 && xi < self.time(idx) {
            idx -= 1;
        }
        let t0 = self.time(idx);
        let t1 = self.time(idx + 1);
        if xi == t0 {
            return self.xs[idx];
        }
        if xi == t1 {
            return self.xs[idx + 1];
        }
        hermite(
            xi,
            t0,
            t1,
            self.xs[idx],
            self.xs[idx + 1],
            self.fs[idx],
            self.fs[idx + 1],
        )
    }
}

/// Weight-aggregated delayed states, one per recruitment term.
fn aggregates(
    model: &ModelSpec,
    dense: &Dense,
    s: f64,
    value_frontier: usize,
    deriv_frontier: usize,
    out: &mut Vec<f64>,
) {
    out.clear();
    for term in &model.recruitment {
        let mut acc = 0.0;
        for atom in &term.delay.atoms {
            let lag = atom.lag.eval(s).max(0.0);
            acc += atom.weight * dense.eval(s - lag, value_frontier, deriv_frontier);
        }
        out.push(acc);
    }
}

/// Integrate `model` from `history` through `cfg.horizon`.
pub fn integrate(
    model: &ModelSpec,
    history: &HistorySpec,
    cfg: &SolverConfig,
) -> Result<Trajectory, IntegrateError> {
    if !(cfg.h > 0.0) || !(cfg.horizon > 0.0) || cfg.record_stride == 0 {
        return Err(ModelError::BadParams(
            "solver config requires h > 0, horizon > 0, record_stride >= 1".into(),
        )
        .into());
    }
    let violations = validate_for_integration(model, cfg.check_horizon);
    if !violations.is_empty() {
        return Err(IntegrateError::InvalidModel(violations));
    }
    if !history.nonnegative(model.tau_max) {
        return Err(IntegrateError::InadmissibleHistory(
            "history takes negative values".into(),
        ));
    }

    let h = cfg.h;
    let n_hist = ((model.tau_max / h) - 1e-9).ceil().max(1.0) as usize;
    let n_steps = ((cfg.horizon / h) - 1e-9).ceil().max(1.0) as usize;
    let n_total = n_hist + n_steps;

    let mut dense = Dense {
        h,
        n_hist,
        xs: Vec::with_capacity(n_total + 1),
        fs: Vec::with_capacity(n_total + 1),
        history,
        tau_max: model.tau_max,
    };
    for i in 0..=n_hist {
        let t = dense.time(i).max(-model.tau_max);
        dense.xs.push(history.eval(t));
        dense.fs.push(history.eval_deriv(t));
    }

    let mut agg = Vec::with_capacity(model.recruitment.len());
    // replace the junction derivative with the right-hand side at t = 0
    aggregates(
        model,
        &dense,
        0.0,
        n_hist,
        n_hist.saturating_sub(1),
        &mut agg,
    );
    dense.fs[n_hist] = model.eval_rhs_unchecked(0.0, dense.xs[n_hist], &agg);

    for n in n_hist..n_total {
        let t_n = dense.time(n);
        let x_n = dense.xs[n];
        let k1 = dense.fs[n];

        let s_mid = t_n + 0.5 * h;
        aggregates(model, &dense, s_mid, n, n, &mut agg);
        let k2 = model.eval_rhs_unchecked(s_mid, x_n + 0.5 * h * k1, &agg);
        let k3 = model.eval_rhs_unchecked(s_mid, x_n + 0.5 * h * k2, &agg);

        let s_end = t_n + h;
        aggregates(model, &dense, s_end, n, n, &mut agg);
        let k4 = model.eval_rhs_unchecked(s_end, x_n + h * k3, &agg);

        let x_next = x_n + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !x_next.is_finite() {
            return Err(IntegrateError::NonFiniteValue { t: s_end });
        }
        if x_next < -cfg.positivity_tolerance {
            return Err(IntegrateError::PositivityLoss {
                t: s_end,
                value: x_next,
            });
        }
        dense.xs.push(x_next);
        // node derivative: delayed arguments inside (t_n, t_next) fall back
        // to extrapolation from node n, everything earlier is interpolated
        aggregates(model, &dense, s_end, n + 1, n, &mut agg);
        let f_next = model.eval_rhs_unchecked(s_end, x_next, &agg);
        if !f_next.is_finite() {
            return Err(IntegrateError::NonFiniteValue { t: s_end });
        }
        dense.fs.push(f_next);
    }

    let stride = cfg.record_stride;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut derivs = Vec::new();
    for g in 0..=n_total {
        let aligned = if g <= n_hist {
            (n_hist - g).is_multiple_of(stride)
        } else {
            (g - n_hist).is_multiple_of(stride)
        };
        if aligned || g == n_total {
            times.push(dense.time(g));
            values.push(dense.xs[g]);
            derivs.push(dense.fs[g]);
        }
    }

    Ok(Trajectory {
        times,
        values,
        derivs,
        tau_max: model.tau_max,
        step: h,
        horizon: (n_total as f64 - n_hist as f64) * h,
    })
}

/// Richardson self-convergence estimate
/// `log2(|x_h - x_{h/2}| / |x_{h/2} - x_{h/4}|)` for the value at the
/// horizon. Smooth coefficients assumed; piecewise-linear kinds reduce the
/// local order at their knots.
pub fn self_convergence_order(
    model: &ModelSpec,
    history: &HistorySpec,
    cfg: &SolverConfig,
) -> Result<f64, IntegrateError> {
    let t_end = cfg.horizon;
    let at = |h: f64| -> Result<f64, IntegrateError> {
        let run = SolverConfig { h, ..cfg.clone() };
        integrate(model, history, &run)?.sample(t_end)
    };
    let x1 = at(cfg.h)?;
    let x2 = at(cfg.h / 2.0)?;
    let x4 = at(cfg.h / 4.0)?;
    let d1 = (x1 - x2).abs();
    let d2 = (x2 - x4).abs();
    if d1 < 1e-13 || d2 < 1e-13 {
        return Err(IntegrateError::DegenerateDifference);
    }
    Ok((d1 / d2).log2())
}
