//! Empirical tail analysis: finite-horizon liminf/limsup estimates,
//! sandwich and permanence verification, global-attractivity checks, and
//! the seeded admissible-history ensemble.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundsReport;
use crate::error::VerifyError;
use crate::integrate::Trajectory;
use crate::model::HistorySpec;

/// Default fraction of the horizon treated as the tail.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

/// Window extrema over the final stretch of a trajectory, with a nested-tail
/// stability diagnostic. True limits are out of reach in finite horizon;
/// the gap between the full and half-length tail estimates flags
/// unconverged transients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub liminf_est: f64,
    pub limsup_est: f64,
    pub stability_gap: f64,
    pub tail_start: f64,
}

fn window_extrema(traj: &Trajectory, start: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut seen = false;
    for (t, x) in traj.times().iter().zip(traj.values()) {
        if *t >= start {
            lo = lo.min(*x);
            hi = hi.max(*x);
            seen = true;
        }
    }
    seen.then_some((lo, hi))
}

/// Min/max of the recorded values on `[T (1 - tail_fraction), T]`. With
/// `nested` set, the same estimates on the half-length tail feed the
/// stability gap.
pub fn tail_extrema(
    traj: &Trajectory,
    tail_fraction: f64,
    nested: bool,
) -> Result<TailEstimate, VerifyError> {
    let horizon = traj.horizon();
    let required = 10.0 * traj.tau_max();
    if horizon < required {
        return Err(VerifyError::HorizonTooShort { horizon, required });
    }
    let fraction = tail_fraction.clamp(0.0, 1.0);
    let start = horizon * (1.0 - fraction);
    let (lo, hi) =
        window_extrema(traj, start).ok_or(VerifyError::HorizonTooShort { horizon, required })?;
    let stability_gap = if nested {
        let nested_start = horizon * (1.0 - 0.5 * fraction);
        let (nlo, nhi) = window_extrema(traj, nested_start).unwrap_or((lo, hi));
        (nlo - lo).abs().max((nhi - hi).abs())
    } else {
        0.0
    };
    Ok(TailEstimate {
        liminf_est: lo,
        limsup_est: hi,
        stability_gap,
        tail_start: start,
    })
}

/// Node-wise sandwich check against two co-simulated envelope trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichVerdict {
    pub pass: bool,
    /// Largest of `lower - x` and `x - upper` over all nodes; nonpositive
    /// when the sandwich holds exactly.
    pub max_violation: f64,
    /// Node time where the worst violation occurs.
    pub at_time: f64,
}

/// `pass` iff `lower_i - tol <= x_i <= upper_i + tol` at every shared node.
pub fn verify_sandwich(
    x: &Trajectory,
    lower: &Trajectory,
    upper: &Trajectory,
    tol: f64,
) -> Result<SandwichVerdict, VerifyError> {
    if x.len() != lower.len() || x.len() != upper.len() {
        return Err(VerifyError::GridMismatch(format!(
            "node counts {} / {} / {}",
            x.len(),
            lower.len(),
            upper.len()
        )));
    }
    for i in 0..x.len() {
        if x.times()[i] != lower.times()[i] || x.times()[i] != upper.times()[i] {
            return Err(VerifyError::GridMismatch(format!("node {i} times differ")));
        }
    }
    let mut max_violation = f64::NEG_INFINITY;
    let mut at_time = x.times()[0];
    for i in 0..x.len() {
        let v = (lower.values()[i] - x.values()[i]).max(x.values()[i] - upper.values()[i]);
        if v > max_violation {
            max_violation = v;
            at_time = x.times()[i];
        }
    }
    Ok(SandwichVerdict {
        pass: max_violation <= tol,
        max_violation,
        at_time,
    })
}

/// Tail estimates and certification margins for one ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMargins {
    pub liminf: f64,
    pub limsup: f64,
    /// `(liminf - certified.lo, certified.hi - limsup)`.
    pub margins: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermanenceVerdict {
    pub pass: bool,
    pub worst_margin: f64,
    pub per_trajectory: Vec<TrajectoryMargins>,
}

/// Tolerance rule for permanence verification: 1e-2 relative to the
/// certified interval width with an absolute floor of 1e-6.
pub fn default_verify_tolerance(report: &BoundsReport) -> f64 {
    let width = report.certified.map_or(0.0, |(lo, hi)| (hi - lo).abs());
    (1e-2 * width).max(1e-6)
}

/// Check every trajectory tail against the certified interval of `report`.
/// Requires a permanent report.
pub fn verify_permanence(
    trajs: &[Trajectory],
    report: &BoundsReport,
    tol: f64,
) -> Result<PermanenceVerdict, VerifyError> {
    verify_permanence_with(trajs, report, tol, DEFAULT_TAIL_FRACTION)
}

pub fn verify_permanence_with(
    trajs: &[Trajectory],
    report: &BoundsReport,
    tol: f64,
    tail_fraction: f64,
) -> Result<PermanenceVerdict, VerifyError> {
    if !report.permanent {
        return Err(VerifyError::NotCertified);
    }
    let (lo, hi) = report.certified.expect("permanent report has an interval");
    let mut per_trajectory = Vec::with_capacity(trajs.len());
    let mut worst = f64::INFINITY;
    for traj in trajs {
        let tail = tail_extrema(traj, tail_fraction, true)?;
        let margins = (tail.liminf_est - lo, hi - tail.limsup_est);
        worst = worst.min(margins.0).min(margins.1);
        per_trajectory.push(TrajectoryMargins {
            liminf: tail.liminf_est,
            limsup: tail.limsup_est,
            margins,
        });
    }
    if trajs.is_empty() {
        worst = 0.0;
    }
    Ok(PermanenceVerdict {
        pass: worst >= -tol,
        worst_margin: worst,
        per_trajectory,
    })
}

/// Global attractivity of the equilibrium `k`: every trajectory ends within
/// `tol` of `k` and its last-quarter oscillation stays below `tol`.
pub fn verify_gas(trajs: &[Trajectory], k: f64, tol: f64) -> bool {
    trajs.iter().all(|traj| {
        if (traj.final_value() - k).abs() > tol {
            return false;
        }
        match window_extrema(traj, 0.75 * traj.horizon()) {
            Some((lo, hi)) => hi - lo <= tol,
            None => false,
        }
    })
}

// ---------------------------------------------------------------------------
// Seeded admissible histories
// ---------------------------------------------------------------------------

/// Stream seed for ensemble member `index`: the master seed XORed with
/// `(index + 1)` times the 64-bit golden ratio. Documented in the README;
/// all ensemble randomness flows through this scheme.
pub fn member_seed(master: u64, index: u64) -> u64 {
    master ^ (index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Draw one admissible history around the reference level `k_ref`:
/// a constant drawn log-uniformly from `[0.1 k_ref, 10 k_ref]`, half the
/// time with a sinusoidal perturbation of relative amplitude below one half
/// (clipped at zero, value at zero strictly positive by construction).
pub fn random_history<R: Rng>(rng: &mut R, k_ref: f64) -> HistorySpec {
    let k = if k_ref > 0.0 { k_ref } else { 1.0 };
    let level = (rng.gen_range((0.1 * k).ln()..(10.0 * k).ln())).exp();
    if rng.gen_bool(0.5) {
        HistorySpec::Sinusoid {
            offset: level,
            amplitude: level * rng.gen_range(0.0..0.5),
            omega: rng.gen_range(0.5..3.0),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
        }
    } else {
        HistorySpec::Constant { value: level }
    }
}

/// Deterministic ensemble of `n` admissible histories.
pub fn seeded_histories(master_seed: u64, n: usize, k_ref: f64) -> Vec<HistorySpec> {
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(member_seed(master_seed, i as u64));
            random_history(&mut rng, k_ref)
        })
        .collect()
}

/// Deterministic ensemble of pointwise-ordered history pairs
/// `(phi, psi)` with `phi <= psi`; `phi` is `psi` scaled by a factor in
/// `[0.2, 0.9]`.
pub fn seeded_ordered_pairs(
    master_seed: u64,
    n: usize,
    k_ref: f64,
) -> Vec<(HistorySpec, HistorySpec)> {
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(member_seed(master_seed, i as u64));
            let psi = random_history(&mut rng, k_ref);
            let scale = rng.gen_range(0.2..0.9);
            let phi = match &psi {
                HistorySpec::Constant { value } => HistorySpec::Constant {
                    value: scale * value,
                },
                HistorySpec::Sinusoid {
                    offset,
                    amplitude,
                    omega,
                    phase,
                } => HistorySpec::Sinusoid {
                    offset: scale * offset,
                    amplitude: scale * amplitude,
                    omega: *omega,
                    phase: *phase,
                },
                HistorySpec::Tabulated { knots } => HistorySpec::Tabulated {
                    knots: knots.iter().map(|&(t, v)| (t, scale * v)).collect(),
                },
            };
            (phi, psi)
        })
        .collect()
}
