//! Seeded random model generators shared by the integration test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use permadde::model::{DelayTerm, ModelSpec};
use permadde::preset;
use permadde::timefn::TimeFunction;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Constant or sinusoid whose range stays inside `[lo, hi]`.
pub fn random_time_fn<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> TimeFunction {
    if rng.gen_bool(0.5) {
        TimeFunction::constant(rng.gen_range(lo..=hi))
    } else {
        let offset = rng.gen_range(lo..=hi);
        let max_amp = (offset - lo).min(hi - offset);
        let amplitude = if max_amp > 0.0 {
            rng.gen_range(0.0..=max_amp)
        } else {
            0.0
        };
        TimeFunction::sinusoid(
            offset,
            amplitude,
            rng.gen_range(0.3..3.0),
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
    }
}

pub fn random_lag<R: Rng>(rng: &mut R, tau_max: f64) -> DelayTerm {
    DelayTerm::point(random_time_fn(rng, 0.0, tau_max))
}

/// Quadratic family: linear recruitment, purely quadratic mortality.
pub fn random_quadratic<R: Rng>(rng: &mut R) -> ModelSpec {
    let m = rng.gen_range(1..=3);
    let alphas = (0..m).map(|_| random_time_fn(rng, 0.5, 3.0)).collect();
    let kappa = random_time_fn(rng, 0.5, 2.0);
    let delays = (0..m).map(|_| random_lag(rng, 1.0)).collect();
    preset::bastinec_quadratic(alphas, kappa, delays, Some(1.0)).unwrap()
}

/// Beverton-Holt family with hypotheses satisfied by construction
/// (`sum inf alpha >= 0.5 > 0.4 >= sup mu`).
pub fn random_bh<R: Rng>(rng: &mut R) -> ModelSpec {
    let m = rng.gen_range(1..=3);
    let alphas = (0..m).map(|_| random_time_fn(rng, 0.5, 3.0)).collect();
    let betas = (0..m).map(|_| random_time_fn(rng, 0.0, 2.0)).collect();
    let mu = random_time_fn(rng, 0.0, 0.4);
    let kappa = random_time_fn(rng, 0.5, 2.0);
    let delays = (0..m).map(|_| random_lag(rng, 1.0)).collect();
    preset::bh_logistic(alphas, betas, mu, kappa, delays, Some(1.0)).unwrap()
}

/// Nicholson family inside the cooperative regime:
/// `beta in [1.1, 2.6]` and `d in [0.97, 1.03]` satisfy both parts of the
/// certification condition.
pub fn random_nicholson<R: Rng>(rng: &mut R) -> ModelSpec {
    let d = random_time_fn(rng, 0.97, 1.03);
    let beta = random_time_fn(rng, 1.1, 2.6);
    let delay = random_lag(rng, 1.0);
    preset::nicholson(d, vec![beta], vec![delay], Some(1.0)).unwrap()
}
