//! JSON scenario configuration.
//!
//! Unit-bearing fields are `{ "value": x, "unit": "nm" }` objects drawn from
//! a closed vocabulary; anything else is rejected with the offending field
//! named.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::emission::PhotonFieldState;
use crate::error::{Error, Result};
use crate::kinematics::{
    derive_scenario, DimensionlessScenario, Energy, EnergyUnit, ModeCoupling, Modulation, PhysicalSetup,
    ScenarioDerivation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "eV")]
    ElectronVolt,
    #[serde(rename = "J")]
    Joule,
    #[serde(rename = "m")]
    Meter,
    #[serde(rename = "nm")]
    Nanometer,
    #[serde(rename = "s")]
    Second,
    #[serde(rename = "rad")]
    Radian,
    #[serde(rename = "rad/s")]
    RadianPerSecond,
    #[serde(rename = "1/m")]
    PerMeter,
    #[serde(rename = "ohm")]
    Ohm,
    #[serde(rename = "V/m")]
    VoltPerMeter,
}

impl Unit {
    fn symbol(self) -> &'static str {
        match self {
            Unit::ElectronVolt => "eV",
            Unit::Joule => "J",
            Unit::Meter => "m",
            Unit::Nanometer => "nm",
            Unit::Second => "s",
            Unit::Radian => "rad",
            Unit::RadianPerSecond => "rad/s",
            Unit::PerMeter => "1/m",
            Unit::Ohm => "ohm",
            Unit::VoltPerMeter => "V/m",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    /// SI value, provided the unit is one of `accepted`.
    fn si(&self, field: &str, accepted: &[Unit]) -> Result<f64> {
        if !accepted.contains(&self.unit) {
            let names: Vec<&str> = accepted.iter().map(|u| u.symbol()).collect();
            return Err(Error::config(
                field,
                format!("unit '{}' not accepted here, expected one of {}", self.unit.symbol(), names.join(", ")),
            ));
        }
        if !self.value.is_finite() {
            return Err(Error::config(field, "value must be finite"));
        }
        Ok(match self.unit {
            Unit::Nanometer => self.value * 1e-9,
            _ => self.value,
        })
    }
}

const LENGTH: &[Unit] = &[Unit::Meter, Unit::Nanometer];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationConfig {
    pub g_mag: f64,
    pub omega_b: Quantity,
}

/// Laboratory description of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    pub kinetic_energy: Quantity,
    pub sigma_z0: Quantity,
    /// A length, or a drift time in seconds.
    #[serde(default)]
    pub drift_length: Option<Quantity>,
    pub interaction_length: Quantity,
    pub omega: Quantity,
    pub q_z: Quantity,
    #[serde(default)]
    pub phi0: Option<Quantity>,
    #[serde(default)]
    pub pierce_impedance: Option<Quantity>,
    #[serde(default)]
    pub field_amplitude: Option<Quantity>,
    pub photon_state: PhotonFieldState,
    #[serde(default)]
    pub modulation: Option<ModulationConfig>,
}

/// Drift given either as a length or as a time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drift {
    Length(f64),
    Time(f64),
}

impl PhysicalConfig {
    fn drift(&self) -> Result<Drift> {
        match self.drift_length {
            None => Ok(Drift::Length(0.0)),
            Some(q) if q.unit == Unit::Second => Ok(Drift::Time(q.si("physical.drift_length", &[Unit::Second])?)),
            Some(q) => Ok(Drift::Length(q.si("physical.drift_length", LENGTH)?)),
        }
    }

    /// SI setup with the drift given as a length.
    pub fn to_setup(&self) -> Result<PhysicalSetup> {
        let coupling = match (self.pierce_impedance, self.field_amplitude) {
            (Some(k), None) => ModeCoupling::PierceImpedance(k.si("physical.pierce_impedance", &[Unit::Ohm])?),
            (None, Some(e)) => ModeCoupling::FieldAmplitude(e.si("physical.field_amplitude", &[Unit::VoltPerMeter])?),
            _ => {
                return Err(Error::config("physical", "exactly one of pierce_impedance or field_amplitude is required"))
            }
        };
        let energy = match self.kinetic_energy.unit {
            Unit::Joule => Energy {
                value: self.kinetic_energy.si("physical.kinetic_energy", &[Unit::Joule])?,
                unit: EnergyUnit::Joule,
            },
            _ => Energy::ev(self.kinetic_energy.si("physical.kinetic_energy", &[Unit::ElectronVolt, Unit::Joule])?),
        };
        let modulation = match &self.modulation {
            None => None,
            Some(m) => Some(Modulation {
                g_mag: m.g_mag,
                omega_b: m.omega_b.si("physical.modulation.omega_b", &[Unit::RadianPerSecond])?,
            }),
        };
        let mut setup = PhysicalSetup {
            kinetic_energy: energy,
            sigma_z0: self.sigma_z0.si("physical.sigma_z0", LENGTH)?,
            drift_length: 0.0,
            interaction_length: self.interaction_length.si("physical.interaction_length", LENGTH)?,
            omega: self.omega.si("physical.omega", &[Unit::RadianPerSecond])?,
            q_z: self.q_z.si("physical.q_z", &[Unit::PerMeter])?,
            phi0: match self.phi0 {
                Some(q) => q.si("physical.phi0", &[Unit::Radian])?,
                None => 0.0,
            },
            coupling,
            photon_state: self.photon_state,
            modulation,
        };
        setup.drift_length = match self.drift()? {
            Drift::Length(l) => l,
            Drift::Time(t) => {
                if !(t >= 0.0) {
                    return Err(Error::config("physical.drift_length", "drift time must be >= 0"));
                }
                t * derive_scenario(&setup)?.beam.v0
            }
        };
        Ok(setup)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "Gamma")]
    Gamma,
    #[serde(rename = "w")]
    W,
    #[serde(rename = "t_D")]
    DriftTime,
    #[serde(rename = "theta")]
    Theta,
    #[serde(rename = "phi0")]
    Phi0,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Gamma => "Gamma",
            SweepAxis::W => "w",
            SweepAxis::DriftTime => "t_D",
            SweepAxis::Theta => "theta",
            SweepAxis::Phi0 => "phi0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::config("sweep.steps", "must be >= 2"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::config("sweep", "start and stop must be finite"));
        }
        Ok(())
    }

    /// start + (stop − start)·i/(steps − 1)
    pub fn points(&self) -> Vec<f64> {
        let n = (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.start + (self.stop - self.start) * i as f64 / n).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensionless: Option<DimensionlessScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

/// A validated scenario ready for evaluation.
#[derive(Debug, Clone)]
pub enum ResolvedScenario {
    Physical { config: PhysicalConfig, setup: PhysicalSetup, derivation: Box<ScenarioDerivation> },
    Dimensionless(DimensionlessScenario),
}

impl ResolvedScenario {
    pub fn scenario(&self) -> &DimensionlessScenario {
        match self {
            ResolvedScenario::Physical { derivation, .. } => &derivation.scenario,
            ResolvedScenario::Dimensionless(s) => s,
        }
    }

    pub fn derivation(&self) -> Option<&ScenarioDerivation> {
        match self {
            ResolvedScenario::Physical { derivation, .. } => Some(derivation),
            ResolvedScenario::Dimensionless(_) => None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn resolve(&self) -> Result<ResolvedScenario> {
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        match (&self.physical, &self.dimensionless) {
            (Some(p), None) => {
                let setup = p.to_setup()?;
                let derivation = derive_scenario(&setup)?;
                Ok(ResolvedScenario::Physical { config: p.clone(), setup, derivation: Box::new(derivation) })
            }
            (None, Some(d)) => {
                d.validate()?;
                Ok(ResolvedScenario::Dimensionless(d.clone()))
            }
            _ => Err(Error::config("config", "exactly one of 'physical' or 'dimensionless' is required")),
        }
    }
}
