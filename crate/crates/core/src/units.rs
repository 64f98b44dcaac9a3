//! Unit systems, physical constants and the validated well configuration.
//!
//! Every other module reads ħ, c, the particle mass and the well lengths
//! from a [`WellConfig`]. Configurations are immutable once built.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// CODATA 2018 constants. This table is the only place they are written down.
pub mod codata {
    /// Reduced Planck constant in J·s.
    pub const HBAR_SI: f64 = 1.054_571_817e-34;
    /// Speed of light in m/s (exact).
    pub const C_SI: f64 = 2.997_924_58e8;
    /// ħc in eV·nm.
    pub const HBAR_C_EV_NM: f64 = 197.326_980_4;
    /// Elementary charge in C, i.e. joules per electronvolt (exact).
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Electron rest energy in eV.
    pub const ELECTRON_REST_ENERGY_EV: f64 = 510_998.95;
}

const METRES_PER_NM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("well length must be strictly positive and finite, got {0}")]
    NonPositiveLength(f64),
    #[error("mass must be non-negative and finite, got {0}")]
    NegativeMass(f64),
    #[error("expected 1 to 3 well lengths, got {0}")]
    BadDimensionCount(usize),
    #[error("axis {axis} out of range for a {dims}-dimensional well")]
    BadAxis { axis: usize, dims: usize },
    #[error("quantum number must be >= 1, got {0}")]
    BadQuantumNumber(i64),
    #[error("operation requires a {expected}-dimensional input, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown unit system '{0}' (expected natural, si or ev_nm)")]
    UnknownUnits(String),
    #[error("cannot convert between {from} and {to} units")]
    UnsupportedConversion { from: UnitKind, to: UnitKind },
    #[error("malformed config document: {0}")]
    Malformed(String),
}

impl ConfigError {
    pub fn name(&self) -> &'static str {
        match self {
            ConfigError::NonPositiveLength(_) => "NonPositiveLength",
            ConfigError::NegativeMass(_) => "NegativeMass",
            ConfigError::BadDimensionCount(_) => "BadDimensionCount",
            ConfigError::BadAxis { .. } => "BadAxis",
            ConfigError::BadQuantumNumber(_) => "BadQuantumNumber",
            ConfigError::DimensionMismatch { .. } => "DimensionMismatch",
            ConfigError::UnknownUnits(_) => "UnknownUnits",
            ConfigError::UnsupportedConversion { .. } => "UnsupportedConversion",
            ConfigError::Malformed(_) => "MalformedConfig",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    /// ħ = c = 1.
    Natural,
    /// Kilograms, metres, joules.
    #[serde(rename = "si")]
    SI,
    /// Energies in eV, lengths in nm, masses in eV/c² (c = 1).
    EvNm,
}

impl UnitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitKind::Natural => "natural",
            UnitKind::SI => "si",
            UnitKind::EvNm => "ev_nm",
        }
    }

    pub fn energy_unit(self) -> &'static str {
        match self {
            UnitKind::Natural => "natural",
            UnitKind::SI => "J",
            UnitKind::EvNm => "eV",
        }
    }
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UnitKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "natural" => Ok(UnitKind::Natural),
            "si" => Ok(UnitKind::SI),
            "ev_nm" => Ok(UnitKind::EvNm),
            other => Err(ConfigError::UnknownUnits(other.to_string())),
        }
    }
}

/// A unit system with its resolved ħ and c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    kind: UnitKind,
    hbar: f64,
    c: f64,
}

impl UnitSystem {
    pub fn new(kind: UnitKind) -> Self {
        let (hbar, c) = match kind {
            UnitKind::Natural => (1.0, 1.0),
            UnitKind::SI => (codata::HBAR_SI, codata::C_SI),
            // mass is carried as a rest energy (eV/c²), so c = 1 and ħ = ħc.
            UnitKind::EvNm => (codata::HBAR_C_EV_NM, 1.0),
        };
        Self { kind, hbar, c }
    }

    pub fn natural() -> Self {
        Self::new(UnitKind::Natural)
    }

    pub fn kind(&self) -> UnitKind {
        self.kind
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Quantum numbers of a confined state, one per axis, each at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantumIndex(Vec<u32>);

impl QuantumIndex {
    pub fn new(components: &[i64]) -> Result<Self, ConfigError> {
        if components.is_empty() || components.len() > 3 {
            return Err(ConfigError::BadDimensionCount(components.len()));
        }
        components
            .iter()
            .map(|&j| {
                u32::try_from(j)
                    .ok()
                    .filter(|&j| j >= 1)
                    .ok_or(ConfigError::BadQuantumNumber(j))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }

    /// One-dimensional index.
    pub fn single(j: i64) -> Result<Self, ConfigError> {
        Self::new(&[j])
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    /// The quantum number of a one-dimensional index.
    pub fn j(&self) -> Result<u32, ConfigError> {
        match self.0.as_slice() {
            [j] => Ok(*j),
            other => Err(ConfigError::DimensionMismatch {
                expected: 1,
                got: other.len(),
            }),
        }
    }
}

/// Geometry, particle mass and unit system of a completely confining box.
#[derive(Debug, Clone, PartialEq)]
pub struct WellConfig {
    lengths: Vec<f64>,
    mass: f64,
    units: UnitSystem,
}

/// Validates and assembles a configuration.
pub fn make_config(
    units: UnitSystem,
    mass: f64,
    lengths: &[f64],
) -> Result<WellConfig, ConfigError> {
    if lengths.is_empty() || lengths.len() > 3 {
        return Err(ConfigError::BadDimensionCount(lengths.len()));
    }
    if let Some(&bad) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(ConfigError::NonPositiveLength(bad));
    }
    if !(mass.is_finite() && mass >= 0.0) {
        return Err(ConfigError::NegativeMass(mass));
    }
    Ok(WellConfig {
        lengths: lengths.to_vec(),
        mass,
        units,
    })
}

impl WellConfig {
    /// Shorthand for a one-dimensional natural-unit well.
    pub fn natural_1d(mass: f64, length: f64) -> Result<Self, ConfigError> {
        make_config(UnitSystem::natural(), mass, &[length])
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn dims(&self) -> usize {
        self.lengths.len()
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    pub fn hbar(&self) -> f64 {
        self.units.hbar
    }

    pub fn c(&self) -> f64 {
        self.units.c
    }

    /// Rest energy mc².
    pub fn rest_energy(&self) -> f64 {
        self.mass * self.units.c * self.units.c
    }

    /// Well length of a one-dimensional configuration.
    pub fn length(&self) -> Result<f64, ConfigError> {
        match self.lengths.as_slice() {
            [l] => Ok(*l),
            other => Err(ConfigError::DimensionMismatch {
                expected: 1,
                got: other.len(),
            }),
        }
    }

    /// k-spacing π/L of the standing waves along `axis`.
    pub fn ground_wavenumber(&self, axis: usize) -> Result<f64, ConfigError> {
        self.lengths
            .get(axis)
            .map(|l| PI / l)
            .ok_or(ConfigError::BadAxis {
                axis,
                dims: self.dims(),
            })
    }

    /// Re-expresses the configuration in another unit system.
    ///
    /// Only SI and eV/nm interconvert; natural units carry no scale.
    pub fn convert(&self, to: UnitKind) -> Result<WellConfig, ConfigError> {
        let from = self.units.kind;
        let (mass_factor, length_factor) = match (from, to) {
            (a, b) if a == b => (1.0, 1.0),
            (UnitKind::SI, UnitKind::EvNm) => (
                codata::C_SI * codata::C_SI / codata::ELEMENTARY_CHARGE,
                1.0 / METRES_PER_NM,
            ),
            (UnitKind::EvNm, UnitKind::SI) => (
                codata::ELEMENTARY_CHARGE / (codata::C_SI * codata::C_SI),
                METRES_PER_NM,
            ),
            _ => return Err(ConfigError::UnsupportedConversion { from, to }),
        };
        let lengths: Vec<f64> = self.lengths.iter().map(|l| l * length_factor).collect();
        make_config(UnitSystem::new(to), self.mass * mass_factor, &lengths)
    }

    /// Parses the `{"units", "mass", "lengths"}` JSON document. Extra keys are ignored.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let doc: ConfigDocument =
            serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
        doc.into_config()
    }

    pub fn to_document(&self) -> ConfigDocument {
        ConfigDocument {
            units: self.units.kind,
            mass: self.mass,
            lengths: self.lengths.clone(),
        }
    }
}

/// Serialized form of a [`WellConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDocument {
    pub units: UnitKind,
    pub mass: f64,
    pub lengths: Vec<f64>,
}

impl ConfigDocument {
    pub fn into_config(self) -> Result<WellConfig, ConfigError> {
        make_config(UnitSystem::new(self.units), self.mass, &self.lengths)
    }
}
