//! Free-particle dispersion relations o(k) and the expression language for
//! user-defined ones.
//!
//! The builtin models are the nonrelativistic ε = ħ²k²/2m, the massless
//! ω² = c²k² and the relativistic ε² = m²c⁴ + ħ²c²k². Each carries the
//! transform that turns its momentum-space moment into an energy.

pub mod expr;
pub mod parser;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

pub use expr::{BinOp, Bindings, Compiled, EvalError, Expr, Func};
pub use parser::{parse, ParseError};

use crate::quadrature::{self, QuadratureError};
use crate::units::WellConfig;

/// Builtin expressions, written in the same language users write.
pub const NONRELATIVISTIC_TEXT: &str = "hbar^2*k^2/(2*m)";
pub const MASSLESS_SQUARED_TEXT: &str = "c^2*k^2";
pub const RELATIVISTIC_SQUARED_TEXT: &str = "m^2*c^4 + hbar^2*c^2*k^2";

/// Names bound from the configuration; user parameters may not shadow them.
pub const RESERVED_NAMES: [&str; 5] = ["k", "m", "c", "hbar", "pi"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DispersionError {
    #[error("the nonrelativistic dispersion is undefined for a massless particle")]
    MasslessNonRelativistic,
    #[error("{kind} must be paired with the {expected} transform, got {got}")]
    MismatchedTransform {
        kind: &'static str,
        expected: Transform,
        got: Transform,
    },
    #[error("parameter '{0}' shadows a reserved identifier")]
    ReservedParameter(String),
    #[error("moment {0} is negative, cannot take its square root")]
    NegativeMoment(f64),
    #[error("unknown builtin dispersion '{0}' (expected nonrel, massless or relativistic)")]
    UnknownBuiltin(String),
    #[error("unknown transform '{0}' (expected identity, sqrt or hbar_sqrt)")]
    UnknownTransform(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

impl DispersionError {
    pub fn name(&self) -> &'static str {
        match self {
            DispersionError::MasslessNonRelativistic => "MasslessNonRelativistic",
            DispersionError::MismatchedTransform { .. } => "MismatchedTransform",
            DispersionError::ReservedParameter(_) => "ReservedParameter",
            DispersionError::NegativeMoment(_) => "NegativeMoment",
            DispersionError::UnknownBuiltin(_) => "UnknownBuiltin",
            DispersionError::UnknownTransform(_) => "UnknownTransform",
            DispersionError::Parse(e) => e.name(),
            DispersionError::Eval(e) => e.name(),
            DispersionError::Quadrature(e) => e.name(),
        }
    }
}

/// Maps a raw moment ⟨o⟩ to an energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    Sqrt,
    /// ħ·√⟨ω²⟩.
    HbarTimesSqrt,
}

impl Transform {
    pub fn as_str(self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::Sqrt => "sqrt",
            Transform::HbarTimesSqrt => "hbar_sqrt",
        }
    }

    /// Applies the transform to a moment and propagates its error to first order.
    pub fn apply(self, moment: f64, error: f64, hbar: f64) -> Result<(f64, f64), DispersionError> {
        match self {
            Transform::Identity => Ok((moment, error)),
            Transform::Sqrt | Transform::HbarTimesSqrt => {
                if moment < 0.0 {
                    return Err(DispersionError::NegativeMoment(moment));
                }
                let root = moment.sqrt();
                let scale = if self == Transform::Sqrt { 1.0 } else { hbar };
                let err = if root > 0.0 {
                    error / (2.0 * root)
                } else {
                    error.sqrt()
                };
                Ok((scale * root, scale * err))
            }
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Transform {
    type Err = DispersionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(Transform::Identity),
            "sqrt" => Ok(Transform::Sqrt),
            "hbar_sqrt" => Ok(Transform::HbarTimesSqrt),
            other => Err(DispersionError::UnknownTransform(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DispersionKind {
    NonRelativistic,
    MasslessSquared,
    RelativisticSquared,
    Custom(Expr),
}

impl DispersionKind {
    pub fn label(&self) -> &'static str {
        match self {
            DispersionKind::NonRelativistic => "nonrel",
            DispersionKind::MasslessSquared => "massless",
            DispersionKind::RelativisticSquared => "relativistic",
            DispersionKind::Custom(_) => "custom",
        }
    }

    /// Parses a builtin name: `nonrel`, `massless` or `relativistic`.
    pub fn builtin_from_name(name: &str) -> Result<Self, DispersionError> {
        match name {
            "nonrel" => Ok(DispersionKind::NonRelativistic),
            "massless" => Ok(DispersionKind::MasslessSquared),
            "relativistic" => Ok(DispersionKind::RelativisticSquared),
            other => Err(DispersionError::UnknownBuiltin(other.to_string())),
        }
    }

    pub fn paired_transform(&self) -> Transform {
        match self {
            DispersionKind::NonRelativistic | DispersionKind::Custom(_) => Transform::Identity,
            DispersionKind::MasslessSquared => Transform::HbarTimesSqrt,
            DispersionKind::RelativisticSquared => Transform::Sqrt,
        }
    }
}

/// A dispersion relation plus the transform applied to its moment.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionModel {
    kind: DispersionKind,
    transform: Transform,
    params: Bindings,
}

impl DispersionModel {
    /// Builtins only accept their paired transform; custom models accept any.
    pub fn new(kind: DispersionKind, transform: Transform) -> Result<Self, DispersionError> {
        let expected = kind.paired_transform();
        if !matches!(kind, DispersionKind::Custom(_)) && transform != expected {
            return Err(DispersionError::MismatchedTransform {
                kind: kind.label(),
                expected,
                got: transform,
            });
        }
        Ok(Self {
            kind,
            transform,
            params: Bindings::new(),
        })
    }

    pub fn builtin(kind: DispersionKind) -> Self {
        let transform = kind.paired_transform();
        Self {
            kind,
            transform,
            params: Bindings::new(),
        }
    }

    pub fn nonrelativistic() -> Self {
        Self::builtin(DispersionKind::NonRelativistic)
    }

    pub fn massless() -> Self {
        Self::builtin(DispersionKind::MasslessSquared)
    }

    pub fn relativistic() -> Self {
        Self::builtin(DispersionKind::RelativisticSquared)
    }

    /// Parses `text` as a custom dispersion.
    pub fn custom(text: &str, transform: Transform) -> Result<Self, DispersionError> {
        Self::new(DispersionKind::Custom(parse(text)?), transform)
    }

    /// Extra identifiers for custom expressions.
    pub fn with_params(mut self, params: Bindings) -> Result<Self, DispersionError> {
        if let Some(bad) = params.keys().find(|p| RESERVED_NAMES.contains(&p.as_str())) {
            return Err(DispersionError::ReservedParameter(bad.clone()));
        }
        self.params = params;
        Ok(self)
    }

    pub fn kind(&self) -> &DispersionKind {
        &self.kind
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    /// Resolves the model against a configuration into something evaluable in k.
    pub fn observable(&self, cfg: &WellConfig) -> Result<Observable, DispersionError> {
        match &self.kind {
            DispersionKind::Custom(e) => {
                let mut b = config_bindings(cfg);
                b.extend(self.params.iter().map(|(k, v)| (k.clone(), *v)));
                Ok(Observable::Expr(e.compile("k", &b)?))
            }
            kind => Ok(Observable::Builtin(builtin_coefficients(cfg, kind)?)),
        }
    }

    /// Rejects observables that are not even in k; see [`quadrature::check_even`].
    pub fn ensure_even(&self, cfg: &WellConfig) -> Result<(), DispersionError> {
        let o = self.observable(cfg)?;
        let scale = 20.0 * PI / cfg.lengths().iter().cloned().fold(f64::INFINITY, f64::min);
        quadrature::check_even(&|k| o.eval_or_nan(k), scale)?;
        Ok(())
    }
}

/// `pi`, `hbar`, `c` and `m` from a configuration.
pub fn config_bindings(cfg: &WellConfig) -> Bindings {
    [
        ("pi", PI),
        ("hbar", cfg.hbar()),
        ("c", cfg.c()),
        ("m", cfg.mass()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// o(k) = a + b·k² for the builtin models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub constant: f64,
    pub k2: f64,
}

fn builtin_coefficients(
    cfg: &WellConfig,
    kind: &DispersionKind,
) -> Result<Quadratic, DispersionError> {
    let (hbar, c, m) = (cfg.hbar(), cfg.c(), cfg.mass());
    match kind {
        DispersionKind::NonRelativistic => {
            if m == 0.0 {
                return Err(DispersionError::MasslessNonRelativistic);
            }
            Ok(Quadratic {
                constant: 0.0,
                k2: hbar * hbar / (2.0 * m),
            })
        }
        DispersionKind::MasslessSquared => Ok(Quadratic {
            constant: 0.0,
            k2: c * c,
        }),
        DispersionKind::RelativisticSquared => {
            let rest = m * c * c;
            Ok(Quadratic {
                constant: rest * rest,
                k2: hbar * hbar * c * c,
            })
        }
        DispersionKind::Custom(_) => unreachable!("custom models are compiled, not builtin"),
    }
}

/// A dispersion relation bound to a configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    Builtin(Quadratic),
    Expr(Compiled),
}

impl Observable {
    pub fn eval(&self, k: f64) -> Result<f64, EvalError> {
        match self {
            Observable::Builtin(q) => Ok(q.constant + q.k2 * k * k),
            Observable::Expr(e) => e.eval(k),
        }
    }

    /// Evaluation errors become NaN, which the quadrature reports as a
    /// non-finite integrand.
    pub fn eval_or_nan(&self, k: f64) -> f64 {
        self.eval(k).unwrap_or(f64::NAN)
    }
}

/// Closure evaluating a builtin dispersion with the configuration's constants.
pub fn builtin(
    cfg: &WellConfig,
    kind: &DispersionKind,
) -> Result<impl Fn(f64) -> f64 + Send + Sync + Clone, DispersionError> {
    if matches!(kind, DispersionKind::Custom(_)) {
        return Err(DispersionError::UnknownBuiltin("custom".into()));
    }
    let q = builtin_coefficients(cfg, kind)?;
    Ok(move |k: f64| q.constant + q.k2 * k * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{make_config, UnitKind, UnitSystem};

    fn natural(m: f64) -> WellConfig {
        WellConfig::natural_1d(m, 1.0).unwrap()
    }

    #[test]
    fn builtin_examples() {
        let f = builtin(&natural(1.0), &DispersionKind::NonRelativistic).unwrap();
        assert!((f(PI) - PI * PI / 2.0).abs() < 1e-15);
        let g = builtin(&natural(1.0), &DispersionKind::MasslessSquared).unwrap();
        assert_eq!(g(2.0), 4.0);
        assert_eq!(
            builtin(&natural(0.0), &DispersionKind::NonRelativistic).err(),
            Some(DispersionError::MasslessNonRelativistic)
        );
    }

    #[test]
    fn builtin_text_matches_closures_in_every_unit_system() {
        for cfg in [
            natural(1.7),
            make_config(UnitSystem::new(UnitKind::EvNm), 510_998.95, &[1.0]).unwrap(),
            make_config(UnitSystem::new(UnitKind::SI), 9.109e-31, &[1e-9]).unwrap(),
        ] {
            for (text, kind) in [
                (NONRELATIVISTIC_TEXT, DispersionKind::NonRelativistic),
                (MASSLESS_SQUARED_TEXT, DispersionKind::MasslessSquared),
                (
                    RELATIVISTIC_SQUARED_TEXT,
                    DispersionKind::RelativisticSquared,
                ),
            ] {
                let custom = DispersionModel::custom(text, Transform::Identity)
                    .unwrap()
                    .observable(&cfg)
                    .unwrap();
                let native = builtin(&cfg, &kind).unwrap();
                let k0 = PI / cfg.lengths()[0];
                for i in 0..50 {
                    let k = k0 * (0.37 * f64::from(i) - 3.0);
                    let (a, b) = (custom.eval(k).unwrap(), native(k));
                    assert!(
                        (a - b).abs() <= 1e-12 * b.abs().max(f64::MIN_POSITIVE),
                        "{text} at {k}"
                    );
                }
            }
        }
    }

    #[test]
    fn transforms_pair_with_builtins() {
        assert!(
            DispersionModel::new(DispersionKind::RelativisticSquared, Transform::Identity).is_err()
        );
        assert_eq!(DispersionModel::relativistic().transform(), Transform::Sqrt);
        assert_eq!(
            DispersionModel::massless().transform(),
            Transform::HbarTimesSqrt
        );
        assert_eq!(
            DispersionModel::nonrelativistic().transform(),
            Transform::Identity
        );
        assert!(DispersionModel::custom("k^2", Transform::Sqrt).is_ok());
    }

    #[test]
    fn transform_error_propagation() {
        let (v, e) = Transform::Sqrt.apply(4.0, 1e-8, 1.0).unwrap();
        assert_eq!(v, 2.0);
        assert!((e - 2.5e-9).abs() < 1e-24);
        let (v, e) = Transform::HbarTimesSqrt.apply(4.0, 1e-8, 3.0).unwrap();
        assert_eq!(v, 6.0);
        assert!((e - 7.5e-9).abs() < 1e-23);
        assert!(Transform::Sqrt.apply(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn custom_params_and_evenness() {
        let mut p = Bindings::new();
        p.insert("alpha".into(), 0.5);
        let model = DispersionModel::custom("alpha*k^2 + cos(k)", Transform::Identity)
            .unwrap()
            .with_params(p)
            .unwrap();
        let cfg = natural(1.0);
        assert!(model.ensure_even(&cfg).is_ok());
        assert!(
            (model.observable(&cfg).unwrap().eval(2.0).unwrap() - (2.0 + 2f64.cos())).abs() < 1e-15
        );

        let odd = DispersionModel::custom("k^3 + k^2", Transform::Identity).unwrap();
        assert!(matches!(
            odd.ensure_even(&cfg),
            Err(DispersionError::Quadrature(
                QuadratureError::OddObservable { .. }
            ))
        ));

        let mut shadow = Bindings::new();
        shadow.insert("m".into(), 2.0);
        assert!(DispersionModel::custom("k", Transform::Identity)
            .unwrap()
            .with_params(shadow)
            .is_err());

        let unbound = DispersionModel::custom("beta*k^2", Transform::Identity).unwrap();
        assert!(matches!(
            unbound.observable(&cfg),
            Err(DispersionError::Eval(EvalError::UnboundIdentifier(_)))
        ));
    }

    #[test]
    fn domain_errors_are_reported() {
        let mut b = Bindings::new();
        b.insert("k".into(), 1.0);
        b.insert("m".into(), 0.0);
        assert!(matches!(
            parse("k/m").unwrap().eval(&b),
            Err(EvalError::DomainError(_))
        ));
        assert!(matches!(
            parse("sqrt(-k)").unwrap().eval(&b),
            Err(EvalError::DomainError(_))
        ));
        assert!(matches!(
            parse("exp(1000*k)").unwrap().eval(&b),
            Err(EvalError::DomainError(_))
        ));
        assert!(matches!(
            parse("q").unwrap().eval(&b),
            Err(EvalError::UnboundIdentifier(_))
        ));
    }
}
