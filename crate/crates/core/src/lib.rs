//! Simulation and certification toolkit for scalar nonautonomous delayed
//! population models.
//!
//! The crate integrates delay differential equations of the factored form
//! `x'(t) = rho(t) [ R(t, delayed states) - D(t, x(t)) ]` by the method of
//! steps, builds the autonomous cooperative envelope pair that brackets the
//! right-hand side, computes explicit permanence bounds for the quadratic,
//! Beverton-Holt and Nicholson families, and verifies numerically that
//! trajectory tails respect the certified asymptotic interval.
//!
//! Modules:
//! - [`timefn`]: coefficient functions with declared range metadata
//! - [`model`]: model specification, validation, histories
//! - [`preset`]: named model families
//! - [`integrate`]: fixed-step RK4 method of steps with dense output
//! - [`bounds`]: hypotheses, envelopes, equilibria, closed-form bounds
//! - [`asymptotics`]: tail estimates, sandwich/permanence/GAS verification

// `!(x > 0)` guards deliberately reject NaN alongside nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bounds;
pub mod error;
pub mod integrate;
pub mod model;
pub mod preset;
pub mod timefn;

pub use asymptotics::{
    seeded_histories, tail_extrema, verify_gas, verify_permanence, verify_sandwich,
    PermanenceVerdict, SandwichVerdict, TailEstimate,
};
pub use bounds::{
    bounds_report, build_envelopes, check_hypotheses, closed_form_bounds, detect_family,
    equilibrium_bounds, positive_root, BoundsReport, EnvelopePair, Hypothesis, ModelFamily,
    TailSampling,
};
pub use error::{BoundsError, IntegrateError, ModelError, VerifyError};
pub use integrate::{integrate, self_convergence_order, SolverConfig, Trajectory};
pub use model::{
    validate_model, DelayAtom, DelayTerm, HistorySpec, ModelSpec, MortalityTerm, RecruitmentKind,
    RecruitmentTerm, Violation,
};
pub use timefn::{Extrema, TimeFnKind, TimeFunction};
