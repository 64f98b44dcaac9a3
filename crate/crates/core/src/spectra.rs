//! Confined-particle energies: closed forms for the three builtin
//! dispersions, the numerical moment pipeline that must reproduce them, and
//! the box extension to two and three dimensions.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::dispersion::{DispersionError, DispersionKind, DispersionModel, Observable};
use crate::momentum::ConfinedState;
use crate::quadrature::{self, QuadratureError, QuadratureResult};
use crate::units::{ConfigError, QuantumIndex, WellConfig};

pub const MAX_LEVEL: u32 = 10_000;
/// Default tolerance for the normalization and ⟨k²⟩ identities.
pub const DEFAULT_IDENTITY_TOL: f64 = 1e-10;
/// Default relative tolerance for energy moments.
pub const DEFAULT_MOMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectraError {
    #[error("the nonrelativistic spectrum is undefined for a massless particle")]
    MasslessNonRelativistic,
    #[error("invalid level range {from}..{to} (need 1 <= from <= to <= {MAX_LEVEL})")]
    BadRange { from: i64, to: i64 },
    #[error("custom dispersions have no closed-form spectrum")]
    NoClosedForm,
    #[error("level {j}: numeric energy {numeric} differs from closed form {closed} beyond its error {error}")]
    NumericMismatch {
        j: u32,
        closed: f64,
        numeric: f64,
        error: f64,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

impl SpectraError {
    pub fn name(&self) -> &'static str {
        match self {
            SpectraError::MasslessNonRelativistic => "MasslessNonRelativistic",
            SpectraError::BadRange { .. } => "BadRange",
            SpectraError::NoClosedForm => "NoClosedForm",
            SpectraError::NumericMismatch { .. } => "NumericMismatch",
            SpectraError::Config(e) => e.name(),
            SpectraError::Dispersion(e) => e.name(),
            SpectraError::Quadrature(e) => e.name(),
        }
    }
}

/// ħcjπ/L: the momentum energy pc of level j.
fn momentum_energy(cfg: &WellConfig, j: &QuantumIndex) -> Result<f64, SpectraError> {
    let l = cfg.length()?;
    Ok(cfg.hbar() * cfg.c() * f64::from(j.j()?) * PI / l)
}

fn require_mass(cfg: &WellConfig) -> Result<(), SpectraError> {
    if cfg.mass() > 0.0 {
        Ok(())
    } else {
        Err(SpectraError::MasslessNonRelativistic)
    }
}

/// E_j = j²ħ²π²/(2mL²).
pub fn energy_nonrel(cfg: &WellConfig, j: &QuantumIndex) -> Result<f64, SpectraError> {
    require_mass(cfg)?;
    let l = cfg.length()?;
    let p = cfg.hbar() * f64::from(j.j()?) * PI / l;
    Ok(p * p / (2.0 * cfg.mass()))
}

/// E_j = ħΩ_j = ħcjπ/L.
pub fn energy_massless(cfg: &WellConfig, j: &QuantumIndex) -> Result<f64, SpectraError> {
    momentum_energy(cfg, j)
}

/// E_j² = m²c⁴ + j²ħ²c²π²/L².
pub fn energy_rel_sq(cfg: &WellConfig, j: &QuantumIndex) -> Result<f64, SpectraError> {
    let pc = momentum_energy(cfg, j)?;
    let rest = cfg.rest_energy();
    Ok(rest * rest + pc * pc)
}

pub fn energy_rel(cfg: &WellConfig, j: &QuantumIndex) -> Result<f64, SpectraError> {
    Ok(cfg.rest_energy().hypot(momentum_energy(cfg, j)?))
}

/// E_rel − mc² − E_nonrel, evaluated as −mc²·x⁴/(2(1 + √(1+x²))²) with
/// x = pc/mc² so that no digits cancel when x is small.
pub fn rel_correction(cfg: &WellConfig, j: &QuantumIndex) -> Result<f64, SpectraError> {
    require_mass(cfg)?;
    let rest = cfg.rest_energy();
    let x = momentum_energy(cfg, j)? / rest;
    let s = x.hypot(1.0);
    let q = x * x / (1.0 + s);
    Ok(-0.5 * rest * q * q)
}

/// √(m²c⁴ + ħ²c²π²·Σ j_a²/L_a²) for a box in one to three dimensions.
pub fn energy_multidim(cfg: &WellConfig, j: &QuantumIndex) -> Result<f64, SpectraError> {
    if j.dims() != cfg.dims() {
        return Err(ConfigError::DimensionMismatch {
            expected: cfg.dims(),
            got: j.dims(),
        }
        .into());
    }
    let hc = cfg.hbar() * cfg.c();
    let p2: f64 = j
        .components()
        .iter()
        .zip(cfg.lengths())
        .map(|(&ja, &la)| {
            let p = hc * f64::from(ja) * PI / la;
            p * p
        })
        .sum();
    Ok(cfg.rest_energy().hypot(p2.sqrt()))
}

/// A numerically evaluated energy with its propagated error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEnergy {
    pub value: f64,
    pub error: f64,
    pub moment: QuadratureResult,
}

/// Absolute tolerance for a moment of `o`: relative to the observable's
/// magnitude at the level's own wavenumber jπ/L, and never below `tol`.
fn moment_scale(o: &Observable, state: &ConfinedState) -> f64 {
    let typical = o.eval(state.singular_k()).map(f64::abs).unwrap_or(1.0);
    typical.max(1.0)
}

/// Re-evaluates a custom observable at the failing abscissa to surface the
/// expression's own error instead of a bare non-finite integrand.
fn explain(err: QuadratureError, o: &Observable) -> SpectraError {
    if let QuadratureError::NonFiniteIntegrand(k) = err {
        if let Err(e) = o.eval(k) {
            return DispersionError::Eval(e).into();
        }
    }
    err.into()
}

/// Energy of level j from ∫|c_j(k)|²·o(k) dk, mapped through the model's
/// transform. `tol` is relative to max(1, |o(jπ/L)|).
pub fn moment_energy(
    cfg: &WellConfig,
    j: &QuantumIndex,
    model: &DispersionModel,
    tol: f64,
) -> Result<MomentEnergy, SpectraError> {
    let state = ConfinedState::from_config(cfg, j)?;
    let o = model.observable(cfg)?;
    let abs_tol = tol * moment_scale(&o, &state);
    let moment = quadrature::moment_of_state(&state, |k| o.eval_or_nan(k), abs_tol)
        .map_err(|e| explain(e, &o))?;
    let (value, error) = model
        .transform()
        .apply(moment.value, moment.total_error(), cfg.hbar())?;
    Ok(MomentEnergy {
        value,
        error,
        moment,
    })
}

/// ⟨ε⟩ = ∫|c_j|²·√(m²c⁴ + ħ²c²k²) dk. This is not the default relativistic
/// energy, which is √⟨ε²⟩; by Jensen ⟨ε⟩ ≤ √⟨ε²⟩.
pub fn mean_energy_rel(
    cfg: &WellConfig,
    j: &QuantumIndex,
    tol: f64,
) -> Result<MomentEnergy, SpectraError> {
    let state = ConfinedState::from_config(cfg, j)?;
    let rest = cfg.rest_energy();
    let hc = cfg.hbar() * cfg.c();
    let eps = |k: f64| rest.hypot(hc * k);
    let abs_tol = tol * eps(state.singular_k()).max(1.0);
    let moment = quadrature::moment_of_state(&state, eps, abs_tol)?;
    Ok(MomentEnergy {
        value: moment.value,
        error: moment.total_error(),
        moment,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub j: u32,
    pub energy_closed: f64,
    pub energy_numeric: Option<f64>,
    pub numeric_error: Option<f64>,
    /// E_rel − mc² − E_nonrel, for massive particles under the relativistic
    /// and nonrelativistic models.
    pub correction: Option<f64>,
}

impl SpectrumRow {
    /// |numeric − closed| ≤ max(1e-6·closed, 10·error); true when no numeric value.
    pub fn is_consistent(&self) -> bool {
        match (self.energy_numeric, self.numeric_error) {
            (Some(n), Some(e)) => {
                (n - self.energy_closed).abs() <= (1e-6 * self.energy_closed).max(10.0 * e)
            }
            _ => true,
        }
    }
}

/// Closed-form energy of `model` at level j.
pub fn closed_energy(
    cfg: &WellConfig,
    j: &QuantumIndex,
    model: &DispersionModel,
) -> Result<f64, SpectraError> {
    match model.kind() {
        DispersionKind::NonRelativistic => energy_nonrel(cfg, j),
        DispersionKind::MasslessSquared => energy_massless(cfg, j),
        DispersionKind::RelativisticSquared => energy_rel(cfg, j),
        DispersionKind::Custom(_) => Err(SpectraError::NoClosedForm),
    }
}

fn spectrum_row(
    cfg: &WellConfig,
    model: &DispersionModel,
    j: u32,
    tol: f64,
    with_numeric: bool,
) -> Result<SpectrumRow, SpectraError> {
    let idx = QuantumIndex::single(i64::from(j))?;
    let energy_closed = closed_energy(cfg, &idx, model)?;
    let correction = match model.kind() {
        DispersionKind::NonRelativistic | DispersionKind::RelativisticSquared
            if cfg.mass() > 0.0 =>
        {
            Some(rel_correction(cfg, &idx)?)
        }
        _ => None,
    };
    let (energy_numeric, numeric_error) = if with_numeric {
        let e = moment_energy(cfg, &idx, model, tol)?;
        (Some(e.value), Some(e.error))
    } else {
        (None, None)
    };
    let row = SpectrumRow {
        j,
        energy_closed,
        energy_numeric,
        numeric_error,
        correction,
    };
    match (row.is_consistent(), energy_numeric, numeric_error) {
        (false, Some(numeric), Some(error)) => Err(SpectraError::NumericMismatch {
            j,
            closed: energy_closed,
            numeric,
            error,
        }),
        _ => Ok(row),
    }
}

/// Levels `j_from..=j_to`, evaluated in parallel and returned in ascending j.
pub fn spectrum_table(
    cfg: &WellConfig,
    model: &DispersionModel,
    j_from: i64,
    j_to: i64,
    tol: f64,
    with_numeric: bool,
) -> Result<Vec<SpectrumRow>, SpectraError> {
    let range = validate_range(j_from, j_to)?;
    cfg.length()?;
    range
        .into_par_iter()
        .map(|j| spectrum_row(cfg, model, j, tol, with_numeric))
        .collect()
}

/// Checks 1 ≤ from ≤ to ≤ [`MAX_LEVEL`].
pub fn validate_range(
    j_from: i64,
    j_to: i64,
) -> Result<std::ops::RangeInclusive<u32>, SpectraError> {
    if j_from < 1 || j_from > j_to || j_to > i64::from(MAX_LEVEL) {
        return Err(SpectraError::BadRange {
            from: j_from,
            to: j_to,
        });
    }
    Ok(j_from as u32..=j_to as u32)
}
