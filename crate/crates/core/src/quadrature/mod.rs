//! Adaptive integration over the whole real line of even, smooth,
//! algebraically decaying integrands, with an error budget that separates
//! the quadrature estimate from the discarded tail.
//!
//! [`integrate`] is the generic driver: Gauss–Kronrod panels on a truncated
//! domain plus a caller-supplied analytic tail bound.
//!
//! [`moment`] computes ⟨o⟩ = ∫ |c_j(k)|² o(k) dk. Beyond the cutoff K the
//! density splits into a smooth envelope and an oscillating part,
//!
//! ```text
//! |c_j(k)|² o(k) = A(k)·o(k) + s·A(k)·o(k)·cos(kL),
//! ```
//!
//! The envelope is integrated on [K, ∞) after the substitution k = K/t.
//! K is a multiple of π/L, so sin(KL) = 0. Integrating the oscillating part
//! by parts twice then leaves −g'(K)·cos(KL)/L² plus a remainder bounded by
//! TV(g')/L² on [K, ∞), where g = A·o. The reported tail error is that bound.

mod gauss_kronrod;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::momentum::ConfinedState;
use crate::units::{ConfigError, QuantumIndex, WellConfig};

use gauss_kronrod::{adaptive, Adaptive, NonFinite};

/// Evaluation budget for one adaptive pass.
pub const MAX_EVALUATIONS: usize = 40_000_000;

/// Largest accepted large-k growth exponent of an observable.
pub const MAX_GROWTH_ORDER: f64 = 2.5;

const EVENNESS_SAMPLES: usize = 32;
const EVENNESS_SEED: u64 = 0x5eed_0e7e;
/// Cutoffs are searched among n·π/L with n ≤ this.
const MAX_HALF_PERIODS: f64 = (1u64 << 21) as f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Estimated quadrature error on the truncated domain.
    pub quad_error: f64,
    /// Bound on what the truncation discarded.
    pub tail_error: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    pub fn total_error(&self) -> f64 {
        self.quad_error + self.tail_error
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("tolerance not met: value {} with error {}", .0.value, .0.total_error())]
    ToleranceNotMet(QuadratureResult),
    #[error("integrand is not finite at k = {0}")]
    NonFiniteIntegrand(f64),
    #[error(
        "observable grows like k^{order:.2} which is not summable with a guaranteed tail bound"
    )]
    DivergentMoment { order: f64 },
    #[error("observable is not even in k: o({k}) = {plus}, o(-{k}) = {minus}")]
    OddObservable { k: f64, plus: f64, minus: f64 },
    #[error("invalid quadrature parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl QuadratureError {
    pub fn name(&self) -> &'static str {
        match self {
            QuadratureError::ToleranceNotMet(_) => "ToleranceNotMet",
            QuadratureError::NonFiniteIntegrand(_) => "NonFiniteIntegrand",
            QuadratureError::DivergentMoment { .. } => "DivergentMoment",
            QuadratureError::OddObservable { .. } => "OddObservable",
            QuadratureError::InvalidParameter(_) => "InvalidParameter",
            QuadratureError::Config(e) => e.name(),
        }
    }
}

impl From<NonFinite> for QuadratureError {
    fn from(e: NonFinite) -> Self {
        QuadratureError::NonFiniteIntegrand(e.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrandParity {
    /// f(−k) = f(k): only k ≥ 0 is sampled and the result doubled.
    Even,
    General,
}

/// An integrand over the real line together with how to truncate it.
pub struct IntegrandSpec<F, T> {
    pub f: F,
    pub parity: IntegrandParity,
    pub oscillation_halfperiod: f64,
    pub truncation: f64,
    pub tail_bound_at: T,
}

impl<F, T> IntegrandSpec<F, T>
where
    F: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    pub fn even(f: F, oscillation_halfperiod: f64, truncation: f64, tail_bound_at: T) -> Self {
        Self {
            f,
            parity: IntegrandParity::Even,
            oscillation_halfperiod,
            truncation,
            tail_bound_at,
        }
    }
}

fn check_tol(tol: f64) -> Result<(), QuadratureError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(QuadratureError::InvalidParameter(
            "tolerance must be positive and finite",
        ))
    }
}

fn finish(result: QuadratureResult, converged: bool) -> Result<QuadratureResult, QuadratureError> {
    if converged {
        Ok(result)
    } else {
        Err(QuadratureError::ToleranceNotMet(result))
    }
}

/// Integrates `spec.f` over the real line to total error `tol`: half for the
/// panels on [−K, K], half for the tail bound at K.
pub fn integrate<F, T>(
    spec: &IntegrandSpec<F, T>,
    tol: f64,
) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    check_tol(tol)?;
    let cutoff = spec.truncation;
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(QuadratureError::InvalidParameter(
            "truncation must be positive and finite",
        ));
    }
    if !(spec.oscillation_halfperiod.is_finite() && spec.oscillation_halfperiod > 0.0) {
        return Err(QuadratureError::InvalidParameter(
            "oscillation half-period must be positive",
        ));
    }
    let width = 0.5 * spec.oscillation_halfperiod;
    let (value, quad_error, evaluations, converged) = match spec.parity {
        IntegrandParity::Even => {
            let r = adaptive(&spec.f, 0.0, cutoff, width, 0.25 * tol, MAX_EVALUATIONS)?;
            (2.0 * r.value, 2.0 * r.error, r.evaluations, r.converged)
        }
        IntegrandParity::General => {
            let r = adaptive(&spec.f, -cutoff, cutoff, width, 0.5 * tol, MAX_EVALUATIONS)?;
            (r.value, r.error, r.evaluations, r.converged)
        }
    };
    let tail_error = (spec.tail_bound_at)(cutoff);
    if !(tail_error.is_finite() && tail_error >= 0.0) {
        return Err(QuadratureError::InvalidParameter(
            "tail bound must be finite and non-negative",
        ));
    }
    let result = QuadratureResult {
        value,
        quad_error,
        tail_error,
        evaluations,
    };
    finish(result, converged && tail_error <= 0.5 * tol)
}

/// ∫ |c_j(k)|² dk with the cutoff chosen from the density tail bound.
pub fn normalization(state: &ConfinedState, tol: f64) -> Result<QuadratureResult, QuadratureError> {
    check_tol(tol)?;
    let spec = IntegrandSpec::even(
        |k| state.density_value(k),
        PI / state.length(),
        state.truncation_for(0.5 * tol),
        |cutoff| state.tail_bound(cutoff).unwrap_or(f64::INFINITY),
    );
    integrate(&spec, tol)
}

/// Checks |o(k) − o(−k)| ≤ 1e-9·(1 + |o(k)|) at 32 fixed pseudo-random
/// points in (0, scale].
pub fn check_even<O: Fn(f64) -> f64>(o: &O, scale: f64) -> Result<(), QuadratureError> {
    let mut rng = ChaCha8Rng::seed_from_u64(EVENNESS_SEED);
    for _ in 0..EVENNESS_SAMPLES {
        let k = scale * rng.gen_range(f64::EPSILON..=1.0);
        let plus = o(k);
        let minus = o(-k);
        if !plus.is_finite() {
            return Err(QuadratureError::NonFiniteIntegrand(k));
        }
        if !minus.is_finite() {
            return Err(QuadratureError::NonFiniteIntegrand(-k));
        }
        if (plus - minus).abs() > 1e-9 * (1.0 + plus.abs()) {
            return Err(QuadratureError::OddObservable { k, plus, minus });
        }
    }
    Ok(())
}

fn local_max_abs<O: Fn(f64) -> f64>(o: &O, k: f64) -> f64 {
    (0..16)
        .map(|i| o(k * (1.0 + f64::from(i) / 32.0)).abs())
        .fold(0.0, |acc, v| {
            if v.is_nan() || acc.is_nan() {
                f64::NAN
            } else {
                acc.max(v)
            }
        })
}

/// Large-k growth exponent of |o|, from the ratio of local maxima at k and 2k.
pub fn growth_order<O: Fn(f64) -> f64>(o: &O, scale: f64) -> f64 {
    let mut order = f64::NEG_INFINITY;
    for factor in [1e4, 1e6, 1e8] {
        let k = scale * factor;
        let m1 = local_max_abs(o, k);
        let m2 = local_max_abs(o, 2.0 * k);
        if !(m1.is_finite() && m2.is_finite()) {
            return f64::INFINITY;
        }
        if m2 == 0.0 {
            continue;
        }
        if m1 == 0.0 {
            return f64::INFINITY;
        }
        order = order.max((m2 / m1).log2());
    }
    order
}

/// Central difference of g with a step proportional to k.
fn derivative<G: Fn(f64) -> f64>(g: &G, k: f64) -> f64 {
    let h = 1e-4 * k;
    (g(k + h) - g(k - h)) / (2.0 * h)
}

/// Total variation of g' on [K, ∞), sampled on a geometric grid out to 10¹²·K.
fn derivative_variation<G: Fn(f64) -> f64>(g: &G, cutoff: f64) -> f64 {
    const RATIO: f64 = 1.05;
    const STEPS: i32 = 567;
    let mut prev = derivative(g, cutoff);
    let mut tv = 0.0;
    for i in 1..=STEPS {
        let d = derivative(g, cutoff * RATIO.powi(i));
        tv += (d - prev).abs();
        prev = d;
    }
    tv + prev.abs()
}

fn require_finite(x: f64, at: f64) -> Result<f64, QuadratureError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(QuadratureError::NonFiniteIntegrand(at))
    }
}

/// ⟨o⟩_j = ∫ |c_j(k)|² o(k) dk for an even observable o growing at most
/// like k² (order below [`MAX_GROWTH_ORDER`]).
pub fn moment<O: Fn(f64) -> f64>(
    cfg: &WellConfig,
    j: &QuantumIndex,
    o: O,
    tol: f64,
) -> Result<QuadratureResult, QuadratureError> {
    let state = ConfinedState::from_config(cfg, j)?;
    moment_of_state(&state, o, tol)
}

pub fn moment_of_state<O: Fn(f64) -> f64>(
    state: &ConfinedState,
    o: O,
    tol: f64,
) -> Result<QuadratureResult, QuadratureError> {
    check_tol(tol)?;
    let length = state.length();
    let k_singular = state.singular_k();
    check_even(&o, 20.0 * k_singular)?;
    let order = growth_order(&o, k_singular);
    if order >= MAX_GROWTH_ORDER {
        return Err(QuadratureError::DivergentMoment { order });
    }
    let mut evaluations = 2 * EVENNESS_SAMPLES + 3 * 32;

    let envelope = |k: f64| state.envelope(k) * o(k);
    let half_period = PI / length;

    let mut n = 10.0 * f64::from(state.j());
    let (cutoff, remainder) = loop {
        let cutoff = n * half_period;
        let tv = derivative_variation(&envelope, cutoff);
        evaluations += 2 * 568;
        let remainder = 2.0 * require_finite(tv, cutoff)? / (length * length);
        if remainder <= 0.5 * tol || 2.0 * n > MAX_HALF_PERIODS {
            break (cutoff, remainder);
        }
        n *= 2.0;
    };

    let body: Adaptive = adaptive(
        &|k: f64| state.density_value(k) * o(k),
        0.0,
        cutoff,
        0.5 * half_period,
        0.125 * tol,
        MAX_EVALUATIONS,
    )?;
    let mapped = |t: f64| {
        let k = cutoff / t;
        envelope(k) * k / t
    };
    let tail: Adaptive = adaptive(&mapped, 0.0, 1.0, 0.125, 0.125 * tol, MAX_EVALUATIONS)?;

    // cos(KL) = cos(nπ); n is an integer.
    let cos_kl = if n % 2.0 == 0.0 { 1.0 } else { -1.0 };
    let boundary = -derivative(&envelope, cutoff) * cos_kl / (length * length);
    evaluations += body.evaluations + tail.evaluations + 2;

    let value = 2.0 * (body.value + tail.value + state.oscillation_sign() * boundary);
    let result = QuadratureResult {
        value: require_finite(value, cutoff)?,
        quad_error: 2.0 * (body.error + tail.error),
        tail_error: remainder,
        evaluations,
    };
    finish(
        result,
        body.converged && tail.converged && remainder <= 0.5 * tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(j: u32, l: f64) -> ConfinedState {
        ConfinedState::new(j, l)
    }

    /// Composite trapezoid of the density on [−200π, 200π] plus the analytic
    /// tail bound beyond it, for cross-checking the adaptive route.
    fn trapezoid_normalization(s: &ConfinedState, points: usize) -> f64 {
        let b = 200.0 * PI;
        let h = b / points as f64;
        let mut sum = 0.5 * (s.density_value(0.0) + s.density_value(b));
        for i in 1..points {
            sum += s.density_value(i as f64 * h);
        }
        2.0 * sum * h
    }

    #[test]
    fn normalization_odd_state() {
        let s = state(1, 1.0);
        let cutoff = s.truncation_for(0.5e-10);
        let spec = IntegrandSpec::even(
            |k| s.density_value(k),
            PI,
            cutoff,
            |c| s.tail_bound(c).unwrap(),
        );
        let r = integrate(&spec, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "{r:?}");
        assert!(r.tail_error <= 0.5e-10);
        assert!(r.evaluations > 0);
    }

    #[test]
    fn normalization_even_state_matches_trapezoid() {
        let s = state(2, 1.0);
        let r = normalization(&s, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
        // The truncated trapezoid misses the tail beyond 200π, which is
        // below the analytic bound there.
        let brute = trapezoid_normalization(&s, 10_000_000);
        let missing = s.tail_bound(200.0 * PI).unwrap();
        assert!((brute - 1.0).abs() <= missing);
        assert!(brute < r.value);
    }

    #[test]
    fn general_parity_matches_even() {
        let s = state(3, 0.7);
        let cutoff = s.truncation_for(0.5e-9);
        let even = IntegrandSpec::even(
            |k| s.density_value(k),
            PI / 0.7,
            cutoff,
            |c| s.tail_bound(c).unwrap(),
        );
        let general = IntegrandSpec {
            parity: IntegrandParity::General,
            ..IntegrandSpec::even(
                |k| s.density_value(k),
                PI / 0.7,
                cutoff,
                |c| s.tail_bound(c).unwrap(),
            )
        };
        let a = integrate(&even, 1e-9).unwrap();
        let b = integrate(&general, 1e-9).unwrap();
        assert!((a.value - b.value).abs() < 1e-11);
    }

    #[test]
    fn integrate_reports_unmet_tail() {
        let s = state(1, 1.0);
        let spec = IntegrandSpec::even(
            |k| s.density_value(k),
            PI,
            20.0 * PI,
            |c| s.tail_bound(c).unwrap(),
        );
        match integrate(&spec, 1e-10) {
            Err(QuadratureError::ToleranceNotMet(r)) => {
                assert!((r.value - 1.0).abs() <= r.total_error());
                assert!(r.tail_error > 0.5e-10);
            }
            other => panic!("expected ToleranceNotMet, got {other:?}"),
        }
    }

    #[test]
    fn integrate_flags_non_finite() {
        let spec = IntegrandSpec::even(|k: f64| 1.0 / (k - 1.0), PI, 10.0, |_| 0.0);
        // 1.0 is not a node of the initial panels' rules, so force it to be hit.
        let spec = IntegrandSpec {
            truncation: 2.0 * 1.0,
            oscillation_halfperiod: 8.0,
            ..spec
        };
        assert!(matches!(
            integrate(&spec, 1e-8),
            Err(QuadratureError::NonFiniteIntegrand(_))
        ));
        assert!(matches!(
            integrate(&IntegrandSpec::even(|_| 1.0, PI, 1.0, |_| 0.0), 0.0),
            Err(QuadratureError::InvalidParameter(_))
        ));
    }

    #[test]
    fn moment_identities() {
        let s = state(1, 1.0);
        let norm = moment_of_state(&s, |_| 1.0, 1e-10).unwrap();
        assert!((norm.value - 1.0).abs() < 1e-8, "{norm:?}");
        let k2 = moment_of_state(&s, |k| k * k, 1e-8).unwrap();
        assert!((k2.value / (PI * PI) - 1.0).abs() < 1e-6, "{k2:?}");
        let nonrel = moment_of_state(&s, |k| k * k / 2.0, 1e-8).unwrap();
        assert!((nonrel.value - PI * PI / 2.0).abs() < 1e-6 * PI * PI / 2.0);
    }

    #[test]
    fn moment_rejects_fast_growth_and_odd_observables() {
        let s = state(1, 1.0);
        assert!(matches!(
            moment_of_state(&s, |k| k.powi(4), 1e-8),
            Err(QuadratureError::DivergentMoment { .. })
        ));
        assert!(matches!(
            moment_of_state(&s, |k| k.abs().powi(3), 1e-8),
            Err(QuadratureError::DivergentMoment { .. })
        ));
        assert!(matches!(
            moment_of_state(&s, |k| k, 1e-8),
            Err(QuadratureError::OddObservable { .. })
        ));
        assert!(matches!(
            moment_of_state(&s, |k| (k * k).exp(), 1e-8),
            Err(QuadratureError::NonFiniteIntegrand(_))
                | Err(QuadratureError::DivergentMoment { .. })
        ));
    }

    #[test]
    fn moment_is_deterministic() {
        let s = state(4, 1.5);
        let a = moment_of_state(&s, |k| (1.0 + k * k).sqrt(), 1e-9).unwrap();
        let b = moment_of_state(&s, |k| (1.0 + k * k).sqrt(), 1e-9).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a, b);
    }

    #[test]
    fn growth_orders() {
        assert!((growth_order(&|k: f64| k * k, 1.0) - 2.0).abs() < 1e-9);
        assert!((growth_order(&|k: f64| (1.0 + k * k).sqrt(), 1.0) - 1.0).abs() < 1e-6);
        assert!(growth_order(&|_| 3.0, 1.0).abs() < 1e-12);
        assert!(growth_order(&|k: f64| k.powi(3), 1.0) > 2.9);
    }
}
