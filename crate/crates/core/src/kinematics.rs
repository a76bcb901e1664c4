//! SI setup → dimensionless scenario, and the recoil/detuning algebra.
//!
//! Everything downstream of this module works in reduced units: momenta in
//! units of the initial momentum spread σ_p0, phases in radians, photon
//! numbers as plain reals.

use serde::{Deserialize, Serialize};

use crate::emission::PhotonFieldState;
use crate::error::{Error, Result};

/// CODATA 2018 values.
pub mod constants {
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const PLANCK: f64 = 6.626_070_15e-34;
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// h / (m_e c)
    pub const COMPTON_WAVELENGTH: f64 = 2.426_310_238_67e-12;
}

use constants::*;

/// Recoil parameter above which the ε ≪ 1 assumption is flagged.
pub const EPS_WARN: f64 = 0.1;
/// Small-ratio magnitude above which the slow-momentum expansion is flagged.
pub const SMALL_RATIO_WARN: f64 = 1e-2;
/// Relative |v₀ − ω/q_z| / v₀ above which the setup is flagged off-synchronism.
pub const SYNCHRONISM_WARN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyUnit {
    #[serde(rename = "eV")]
    ElectronVolt,
    #[serde(rename = "J")]
    Joule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub value: f64,
    pub unit: EnergyUnit,
}

impl Energy {
    pub fn ev(value: f64) -> Self {
        Energy { value, unit: EnergyUnit::ElectronVolt }
    }

    pub fn joules(&self) -> f64 {
        match self.unit {
            EnergyUnit::ElectronVolt => self.value * ELEMENTARY_CHARGE,
            EnergyUnit::Joule => self.value,
        }
    }
}

/// How the single-photon slow-wave field amplitude is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModeCoupling {
    /// Pierce impedance K_q in ohm.
    PierceImpedance(f64),
    /// Explicit single-photon amplitude ℰ_qz0 in V/m.
    FieldAmplitude(f64),
}

/// Optical pre-modulation of the wavepacket in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub g_mag: f64,
    /// Modulating laser angular frequency (rad/s).
    pub omega_b: f64,
}

/// Physical inputs, SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSetup {
    pub kinetic_energy: Energy,
    /// Initial wavepacket standard deviation σ_z0 (m).
    pub sigma_z0: f64,
    /// Drift length L_D between the source and the interaction (m).
    pub drift_length: f64,
    /// Interaction length L (m).
    pub interaction_length: f64,
    /// Radiation angular frequency ω (rad/s).
    pub omega: f64,
    /// Axial wavenumber of the slow-wave component (1/m).
    pub q_z: f64,
    /// Injection phase φ₀ (rad).
    pub phi0: f64,
    pub coupling: ModeCoupling,
    pub photon_state: PhotonFieldState,
    pub modulation: Option<Modulation>,
}

/// Ratios of the small momenta to p₀, plus the recoil asymmetry δ.
///
/// Only the quadrature oracle consumes these; the closed forms take them to
/// be zero. `sig_over_p0` and `rec_over_p0` fix the recoil shift in units of
/// σ_p0, `rec_over_p0 / sig_over_p0 = 2Γ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallRatios {
    /// p_rec⁽⁰⁾ / p₀
    pub rec_over_p0: f64,
    /// ħ q_z / p₀
    pub qz_over_p0: f64,
    /// σ_p0 / p₀
    pub sig_over_p0: f64,
    /// δ = ħω / (2 m* v₀²)
    #[serde(default)]
    pub delta: f64,
}

impl SmallRatios {
    /// Ratios with σ_p0/p₀ = `scale`, consistent with extinction Γ₀:
    /// p_rec/p₀ = 2Γ₀·scale, ħq_z/p₀ = scale and δ = p_rec/(2γ₀² p₀).
    pub fn from_scale(scale: f64, extinction0: f64, lorentz_gamma: f64) -> Self {
        let rec = 2.0 * extinction0 * scale;
        SmallRatios {
            rec_over_p0: rec,
            qz_over_p0: scale,
            sig_over_p0: scale,
            delta: rec / (2.0 * lorentz_gamma * lorentz_gamma),
        }
    }

    pub fn max(&self) -> f64 {
        self.rec_over_p0.max(self.qz_over_p0).max(self.sig_over_p0)
    }

    /// Emission/absorption recoil shifts in units of σ_p0, exact in δ.
    pub fn recoil_shifts(&self) -> (f64, f64) {
        if self.rec_over_p0 == 0.0 {
            return (0.0, 0.0);
        }
        let base = self.rec_over_p0 / self.sig_over_p0;
        (base * (1.0 + self.delta), base * (1.0 - self.delta))
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rec_over_p0", self.rec_over_p0),
            ("qz_over_p0", self.qz_over_p0),
            ("sig_over_p0", self.sig_over_p0),
            ("delta", self.delta),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(format!("small_ratios.{name}"), "must be finite and >= 0"));
            }
        }
        if self.sig_over_p0 == 0.0 && self.rec_over_p0 > 0.0 {
            return Err(Error::config("small_ratios.sig_over_p0", "must be > 0 when rec_over_p0 > 0"));
        }
        Ok(())
    }
}

/// Modulation in reduced units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationParams {
    /// PINEM coupling |g|; the comb weights are J_n(2|g|).
    pub g_mag: f64,
    /// Comb spacing ratio r = δ_p / (2σ_p0).
    pub r: f64,
    /// Frequency ratio w = ω / ω_b.
    pub w: f64,
}

/// The reduced parameter bundle consumed by the emission engine and oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionlessScenario {
    /// Coupling Υ = e ℰ_qz0 L / 4ħω.
    pub ups: f64,
    /// Classical detuning θ̄ = (ω/v₀ − q_z) L.
    pub theta: f64,
    /// Quantum recoil ε = δ (ω/v₀) L.
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub phi0: f64,
    /// Γ₀ = (ω/v₀) σ_z0.
    #[serde(alias = "gamma0")]
    pub extinction0: f64,
    /// C = ξ t_D.
    #[serde(default)]
    pub chirp: f64,
    pub photon_state: PhotonFieldState,
    #[serde(default)]
    pub modulation: Option<ModulationParams>,
    #[serde(default)]
    pub small_ratios: SmallRatios,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioWarning {
    OffSynchronism { relative_mismatch: f64 },
    LargeRecoil { eps: f64 },
    LargeSmallRatio { name: &'static str, value: f64 },
}

impl std::fmt::Display for ScenarioWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioWarning::OffSynchronism { relative_mismatch } => {
                write!(f, "v0 differs from omega/q_z by {relative_mismatch:.3e} (relative)")
            }
            ScenarioWarning::LargeRecoil { eps } => {
                write!(f, "recoil parameter eps = {eps} exceeds {EPS_WARN}")
            }
            ScenarioWarning::LargeSmallRatio { name, value } => {
                write!(f, "{name} = {value:.3e} is not small compared to p0")
            }
        }
    }
}

impl DimensionlessScenario {
    /// Extinction Γ = Γ₀ √(1 + C²).
    pub fn extinction(&self) -> f64 {
        self.extinction0 * (1.0 + self.chirp * self.chirp).sqrt()
    }

    /// Γ computed from the modulation parameters, w·r·√(1 + C²).
    pub fn extinction_modulated_route(&self) -> Option<f64> {
        self.modulation.map(|m| m.w * m.r * (1.0 + self.chirp * self.chirp).sqrt())
    }

    /// Bunching envelope width Γ_b = r √(1 + C²) = ω_b σ_t(t_D).
    pub fn envelope_sigma(&self) -> Option<f64> {
        self.modulation.map(|m| m.r * (1.0 + self.chirp * self.chirp).sqrt())
    }

    pub fn theta_e(&self) -> f64 {
        self.theta + 0.5 * self.eps
    }

    pub fn theta_a(&self) -> f64 {
        self.theta - 0.5 * self.eps
    }

    pub fn nu0(&self) -> f64 {
        self.photon_state.nu0()
    }

    /// Checks the scenario invariants, returning soft warnings.
    pub fn validate(&self) -> Result<Vec<ScenarioWarning>> {
        let finite = [
            ("ups", self.ups),
            ("theta", self.theta),
            ("eps", self.eps),
            ("phi0", self.phi0),
            ("extinction0", self.extinction0),
            ("chirp", self.chirp),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        if self.ups < 0.0 {
            return Err(Error::config("ups", "must be >= 0"));
        }
        if self.eps < 0.0 {
            return Err(Error::config("eps", "must be >= 0"));
        }
        if self.extinction0 < 0.0 {
            return Err(Error::config("extinction0", "must be >= 0"));
        }
        self.photon_state.validate()?;
        self.small_ratios.validate()?;

        if let Some(m) = self.modulation {
            if !(m.g_mag.is_finite() && m.g_mag >= 0.0) {
                return Err(Error::config("modulation.g_mag", "must be finite and >= 0"));
            }
            if !(m.r.is_finite() && m.r > 0.0) {
                return Err(Error::config("modulation.r", "must be finite and > 0"));
            }
            if !(m.w.is_finite() && m.w >= 0.0) {
                return Err(Error::config("modulation.w", "must be finite and >= 0"));
            }
            let via_comb = m.w * m.r;
            let scale = via_comb.abs().max(self.extinction0.abs());
            if (via_comb - self.extinction0).abs() > 1e-12 * scale {
                return Err(Error::config(
                    "extinction0",
                    format!("must equal modulation.w * modulation.r = {via_comb}"),
                ));
            }
        }

        let mut warnings = Vec::new();
        if self.eps > EPS_WARN {
            warnings.push(ScenarioWarning::LargeRecoil { eps: self.eps });
        }
        let r = &self.small_ratios;
        for (name, value) in
            [("rec_over_p0", r.rec_over_p0), ("qz_over_p0", r.qz_over_p0), ("sig_over_p0", r.sig_over_p0)]
        {
            if value > SMALL_RATIO_WARN {
                warnings.push(ScenarioWarning::LargeSmallRatio { name, value });
            }
        }
        Ok(warnings)
    }
}

/// SI quantities of the electron beam derived along the way.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamKinematics {
    /// Lorentz factor γ₀.
    pub lorentz_gamma: f64,
    pub beta0: f64,
    pub v0: f64,
    /// Longitudinal mass m* = γ₀³ m.
    pub m_star: f64,
    pub p0: f64,
    pub sigma_p0: f64,
    /// Chirp rate ξ = 2σ_p0² / (m* ħ).
    pub xi: f64,
    pub t_drift: f64,
    /// Single-photon slow-wave amplitude ℰ_qz0 (V/m).
    pub e_qz0: f64,
    pub wavelength: f64,
    /// Drift distance beyond which the wavepacket-dependent term is lost.
    pub z_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioDerivation {
    pub scenario: DimensionlessScenario,
    pub beam: BeamKinematics,
    pub detuning: InteractionDetuning,
    pub warnings: Vec<ScenarioWarning>,
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(field, format!("must be finite and > 0, got {v}")))
    }
}

/// Maps a physical setup onto the dimensionless scenario.
///
/// The momentum spread is the minimum-uncertainty value σ_p0 = ħ / (2σ_z0),
/// which makes (ω/v₀)σ_z0 and (ħω/v₀)/(2σ_p0) the same Γ₀.
pub fn derive_scenario(setup: &PhysicalSetup) -> Result<ScenarioDerivation> {
    let kinetic = positive("kinetic_energy", setup.kinetic_energy.joules())?;
    let sigma_z0 = positive("sigma_z0", setup.sigma_z0)?;
    let length = positive("interaction_length", setup.interaction_length)?;
    let omega = positive("omega", setup.omega)?;
    let q_z = positive("q_z", setup.q_z)?;
    if !(setup.drift_length.is_finite() && setup.drift_length >= 0.0) {
        return Err(Error::config("drift_length", "must be finite and >= 0"));
    }
    if !setup.phi0.is_finite() {
        return Err(Error::config("phi0", "must be finite"));
    }
    setup.photon_state.validate()?;

    let rest = ELECTRON_MASS * SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    let lorentz_gamma = 1.0 + kinetic / rest;
    let beta0 = (1.0 - 1.0 / (lorentz_gamma * lorentz_gamma)).sqrt();
    let v0 = beta0 * SPEED_OF_LIGHT;
    let m_star = lorentz_gamma.powi(3) * ELECTRON_MASS;
    let p0 = lorentz_gamma * ELECTRON_MASS * v0;

    let sigma_p0 = HBAR / (2.0 * sigma_z0);
    if !(sigma_p0.is_finite() && sigma_p0 > 0.0) {
        return Err(Error::config("sigma_z0", "derived momentum spread is not positive"));
    }
    let xi = 2.0 * sigma_p0 * sigma_p0 / (m_star * HBAR);
    let t_drift = setup.drift_length / v0;
    let extinction0 = omega / v0 * sigma_z0;
    let chirp = xi * t_drift;

    let e_qz0 = match setup.coupling {
        ModeCoupling::PierceImpedance(k_q) => {
            let k_q = positive("pierce_impedance", k_q)?;
            mode_amplitude(k_q, q_z, omega, length, v0)?
        }
        ModeCoupling::FieldAmplitude(e) => positive("field_amplitude", e)?,
    };
    let ups = ELEMENTARY_CHARGE * e_qz0 * length / (4.0 * HBAR * omega);

    let detuning = recoil_detuning(&RecoilInputs { v0, m_star, omega, q_z, interaction_length: length })?;

    let modulation = match setup.modulation {
        None => None,
        Some(m) => {
            if !(m.g_mag.is_finite() && m.g_mag >= 0.0) {
                return Err(Error::config("modulation.g_mag", "must be finite and >= 0"));
            }
            let omega_b = positive("modulation.omega_b", m.omega_b)?;
            let delta_p = HBAR * omega_b / v0;
            Some(ModulationParams { g_mag: m.g_mag, r: delta_p / (2.0 * sigma_p0), w: omega / omega_b })
        }
    };

    let small_ratios = SmallRatios {
        rec_over_p0: detuning.p_rec0 / p0,
        qz_over_p0: HBAR * q_z / p0,
        sig_over_p0: sigma_p0 / p0,
        delta: detuning.delta,
    };

    let scenario = DimensionlessScenario {
        ups,
        theta: detuning.theta,
        eps: detuning.eps,
        phi0: setup.phi0,
        // the modulated route w·r equals (ω/v₀)σ_z0 up to rounding; keep one source
        extinction0,
        chirp,
        photon_state: setup.photon_state,
        modulation,
        small_ratios,
    };

    let wavelength = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega;
    let beam = BeamKinematics {
        lorentz_gamma,
        beta0,
        v0,
        m_star,
        p0,
        sigma_p0,
        xi,
        t_drift,
        e_qz0,
        wavelength,
        z_g: drift_limit_zg(beta0, lorentz_gamma, wavelength, COMPTON_WAVELENGTH),
    };

    let mut warnings = Vec::new();
    let mismatch = (v0 - omega / q_z).abs() / v0;
    if mismatch > SYNCHRONISM_WARN {
        warnings.push(ScenarioWarning::OffSynchronism { relative_mismatch: mismatch });
    }
    if let Some(m) = scenario.modulation {
        // rounding differences between the two routes are far below the 1e-12 gate
        let via_comb = m.w * m.r;
        if (via_comb - extinction0).abs() > 1e-12 * extinction0 {
            return Err(Error::Numerical(format!(
                "extinction routes disagree: (omega/v0) sigma_z0 = {extinction0}, w r = {via_comb}"
            )));
        }
    }
    warnings.extend(scenario.validate()?);

    Ok(ScenarioDerivation { scenario, beam, detuning, warnings })
}

/// Single-photon slow-wave amplitude from the Pierce impedance.
///
/// Eliminates the mode power between K_q = ℰ²/(2 q_z² 𝒫) and 𝒫·(L/v₀) = ħω:
/// ℰ_qz0 = √(2 K_q q_z² ħω v₀ / L).
pub fn mode_amplitude(k_q: f64, q_z: f64, omega: f64, length: f64, v0: f64) -> Result<f64> {
    positive("pierce_impedance", k_q)?;
    positive("q_z", q_z)?;
    positive("omega", omega)?;
    positive("interaction_length", length)?;
    positive("v0", v0)?;
    Ok((2.0 * k_q * q_z * q_z * HBAR * omega * v0 / length).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoilInputs {
    pub v0: f64,
    pub m_star: f64,
    pub omega: f64,
    pub q_z: f64,
    pub interaction_length: f64,
}

/// Recoil momenta and the emission/absorption detunings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionDetuning {
    /// p_rec⁽⁰⁾ = ħω / v₀
    pub p_rec0: f64,
    /// δ = ħω / (2 m* v₀²)
    pub delta: f64,
    pub p_rec_e: f64,
    pub p_rec_a: f64,
    pub theta: f64,
    pub eps: f64,
    pub theta_e: f64,
    pub theta_a: f64,
}

pub fn recoil_detuning(inputs: &RecoilInputs) -> Result<InteractionDetuning> {
    let v0 = positive("v0", inputs.v0)?;
    let m_star = positive("m_star", inputs.m_star)?;
    let omega = positive("omega", inputs.omega)?;
    let q_z = positive("q_z", inputs.q_z)?;
    let length = positive("interaction_length", inputs.interaction_length)?;

    let p_rec0 = HBAR * omega / v0;
    let delta = HBAR * omega / (2.0 * m_star * v0 * v0);
    let theta = (omega / v0 - q_z) * length;
    let eps = delta * (omega / v0) * length;
    Ok(InteractionDetuning {
        p_rec0,
        delta,
        p_rec_e: p_rec0 * (1.0 + delta),
        p_rec_a: p_rec0 * (1.0 - delta),
        theta,
        eps,
        theta_e: theta + 0.5 * eps,
        theta_a: theta - 0.5 * eps,
    })
}

/// z_G = β₀³γ₀³λ² / (π λ_c).
pub fn drift_limit_zg(beta0: f64, lorentz_gamma: f64, wavelength: f64, lambda_compton: f64) -> f64 {
    let bg = beta0 * lorentz_gamma;
    bg * bg * bg * wavelength * wavelength / (std::f64::consts::PI * lambda_compton)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn reference_setup() -> PhysicalSetup {
        let lambda = 800e-9;
        let omega = 2.0 * PI * SPEED_OF_LIGHT / lambda;
        let gamma = 1.0 + 200e3 * ELEMENTARY_CHARGE / (ELECTRON_MASS * SPEED_OF_LIGHT.powi(2));
        let v0 = (1.0 - 1.0 / (gamma * gamma)).sqrt() * SPEED_OF_LIGHT;
        PhysicalSetup {
            kinetic_energy: Energy::ev(200e3),
            sigma_z0: 50e-9,
            drift_length: 0.0,
            interaction_length: 100e-6,
            omega,
            q_z: omega / v0,
            phi0: 0.0,
            coupling: ModeCoupling::PierceImpedance(100.0),
            photon_state: PhotonFieldState::Coherent { nu0: 1.0 },
            modulation: None,
        }
    }

    #[test]
    fn two_hundred_kev_extinction() {
        let d = derive_scenario(&reference_setup()).unwrap();
        assert_relative_eq!(d.beam.lorentz_gamma, 1.391, max_relative = 1e-3);
        assert_relative_eq!(d.beam.beta0, 0.6953, max_relative = 1e-3);
        // (2π/β)(σ_z0/λ) evaluated independently
        let direct = 2.0 * PI / d.beam.beta0 * (50e-9 / 800e-9);
        assert_relative_eq!(d.scenario.extinction0, direct, max_relative = 1e-12);
        assert!((d.scenario.extinction0 - 0.5648).abs() < 5e-4);
        assert_eq!(d.scenario.chirp, 0.0);
        assert_eq!(d.scenario.extinction(), d.scenario.extinction0);
        assert!(d.warnings.is_empty(), "{:?}", d.warnings);
    }

    #[test]
    fn interaction_length_scaling() {
        let base = reference_setup();
        let mut off = base.clone();
        off.q_z *= 0.99;
        let mut doubled = off.clone();
        doubled.interaction_length *= 2.0;
        let a = derive_scenario(&off).unwrap().scenario;
        let b = derive_scenario(&doubled).unwrap().scenario;
        // E_qz0 ∝ L^{-1/2} through the impedance, so Υ ∝ √L in that mode
        assert_relative_eq!(b.theta, 2.0 * a.theta, max_relative = 1e-12);
        assert_relative_eq!(b.eps, 2.0 * a.eps, max_relative = 1e-12);
        assert_eq!(a.extinction(), b.extinction());

        // with an explicit field amplitude Υ is linear in L
        let mut fixed = off.clone();
        fixed.coupling = ModeCoupling::FieldAmplitude(1e5);
        let mut fixed2 = fixed.clone();
        fixed2.interaction_length *= 2.0;
        let a = derive_scenario(&fixed).unwrap().scenario;
        let b = derive_scenario(&fixed2).unwrap().scenario;
        assert_relative_eq!(b.ups, 2.0 * a.ups, max_relative = 1e-12);
        assert_relative_eq!(b.theta, 2.0 * a.theta, max_relative = 1e-12);
    }

    #[test]
    fn zero_drift_means_no_chirp() {
        let d = derive_scenario(&reference_setup()).unwrap();
        assert_eq!(d.scenario.chirp, 0.0);
        assert_eq!(d.scenario.extinction(), d.scenario.extinction0);
    }

    #[test]
    fn extinction_grows_with_drift() {
        let mut setup = reference_setup();
        let mut last = 0.0;
        for k in 0..10 {
            setup.drift_length = k as f64 * 1e-3;
            let g = derive_scenario(&setup).unwrap().scenario.extinction();
            assert!(g > last);
            last = g;
        }
    }

    #[test]
    fn mode_amplitude_scalings() {
        let e1 = mode_amplitude(100.0, 1e7, 2e15, 1e-4, 2e8).unwrap();
        let e4k = mode_amplitude(400.0, 1e7, 2e15, 1e-4, 2e8).unwrap();
        assert_relative_eq!(e4k, 2.0 * e1, max_relative = 1e-14);
        let e4l = mode_amplitude(100.0, 1e7, 2e15, 4e-4, 2e8).unwrap();
        assert_relative_eq!(e4l, 0.5 * e1, max_relative = 1e-14);
        // Υ ∝ E L doubles
        assert_relative_eq!(e4l * 4e-4, 2.0 * e1 * 1e-4, max_relative = 1e-14);
        assert!(mode_amplitude(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(mode_amplitude(-1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn mode_amplitude_reference_set() {
        let beta = 0.6953;
        let v0 = beta * SPEED_OF_LIGHT;
        let omega = 2.0 * PI * SPEED_OF_LIGHT / 800e-9;
        let q_z = omega / v0;
        let length = 100e-6;
        // mode power that carries one photon over the transit time, then K = E²/(2q²P)
        let power = HBAR * omega / (length / v0);
        let expected = (100.0 * 2.0 * q_z * q_z * power).sqrt();
        let got = mode_amplitude(100.0, q_z, omega, length, v0).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-13);
        let k_back = got * got / (2.0 * q_z * q_z * power);
        assert_relative_eq!(k_back, 100.0, max_relative = 1e-13);
    }

    #[test]
    fn recoil_identities() {
        let setup = reference_setup();
        let d = derive_scenario(&setup).unwrap();
        let det = d.detuning;
        assert!((det.theta_e - det.theta_a - det.eps).abs() <= 4.0 * f64::EPSILON * det.eps.max(det.theta.abs()));
        assert!(
            (det.theta_e + det.theta_a - 2.0 * det.theta).abs() <= 4.0 * f64::EPSILON * det.theta.abs().max(det.eps)
        );
        // δ two ways: from its definition and from ε / ((ω/v0) L)
        let from_eps = det.eps / (setup.omega / d.beam.v0 * setup.interaction_length);
        assert_relative_eq!(det.delta, from_eps, max_relative = 1e-12);
        let direct = HBAR * setup.omega / (2.0 * d.beam.m_star * d.beam.v0 * d.beam.v0);
        assert_relative_eq!(det.delta, direct, max_relative = 1e-12);
    }

    #[test]
    fn recoil_without_asymmetry() {
        // δ → 0 as m* → ∞
        let det =
            recoil_detuning(&RecoilInputs { v0: 2e8, m_star: 1e30, omega: 2e15, q_z: 1e7, interaction_length: 1e-4 })
                .unwrap();
        assert_relative_eq!(det.p_rec_e, det.p_rec0, max_relative = 1e-15);
        assert_relative_eq!(det.p_rec_a, det.p_rec0, max_relative = 1e-15);
        assert_relative_eq!(det.theta_e, det.theta, max_relative = 1e-15);
    }

    #[test]
    fn drift_limit_scalings() {
        let base = drift_limit_zg(0.6953, 1.391, 800e-9, COMPTON_WAVELENGTH);
        assert_relative_eq!(
            drift_limit_zg(0.6953, 1.391, 1600e-9, COMPTON_WAVELENGTH),
            4.0 * base,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            drift_limit_zg(2.0 * 0.6953, 1.391, 800e-9, COMPTON_WAVELENGTH),
            8.0 * base,
            max_relative = 1e-14
        );
        let bg3 = (0.6953f64 * 1.391).powi(3);
        let expected = bg3 * 800e-9 * 800e-9 / (PI * 2.426e-12);
        assert_relative_eq!(drift_limit_zg(0.6953, 1.391, 800e-9, 2.426e-12), expected, max_relative = 1e-14);
    }

    #[test]
    fn compton_constant_consistent() {
        assert_relative_eq!(COMPTON_WAVELENGTH, PLANCK / (ELECTRON_MASS * SPEED_OF_LIGHT), max_relative = 1e-9);
    }

    #[test]
    fn modulated_routes_agree() {
        let mut setup = reference_setup();
        setup.drift_length = 2e-3;
        setup.modulation = Some(Modulation { g_mag: 1.0, omega_b: setup.omega / 2.0 });
        let d = derive_scenario(&setup).unwrap();
        let s = &d.scenario;
        let m = s.modulation.unwrap();
        assert_relative_eq!(m.w, 2.0, max_relative = 1e-15);
        let via_comb = s.extinction_modulated_route().unwrap();
        assert_relative_eq!(via_comb, s.extinction(), max_relative = 1e-12);
        // drift phase unit δ_p² t_D / (2 m* ħ) = C r²
        let delta_p = HBAR * setup.modulation.unwrap().omega_b / d.beam.v0;
        let tau = delta_p * delta_p * d.beam.t_drift / (2.0 * d.beam.m_star * HBAR);
        assert_relative_eq!(tau, s.chirp * m.r * m.r, max_relative = 1e-12);
        // B_l exponent (δ_p ξ t_D)² / (8σ²) = C² r² / 2
        let bl = (delta_p * d.beam.xi * d.beam.t_drift).powi(2) / (8.0 * d.beam.sigma_p0.powi(2));
        assert_relative_eq!(bl, 0.5 * s.chirp * s.chirp * m.r * m.r, max_relative = 1e-12);
    }

    #[test]
    fn invalid_setups_rejected() {
        let mut s = reference_setup();
        s.sigma_z0 = 0.0;
        assert!(matches!(derive_scenario(&s), Err(Error::Config { .. })));
        let mut s = reference_setup();
        s.interaction_length = -1.0;
        assert!(derive_scenario(&s).is_err());
        let mut s = reference_setup();
        s.coupling = ModeCoupling::FieldAmplitude(0.0);
        assert!(derive_scenario(&s).is_err());
    }

    #[test]
    fn off_synchronism_is_a_warning() {
        let mut s = reference_setup();
        s.q_z *= 1.5;
        let d = derive_scenario(&s).unwrap();
        assert!(d.warnings.iter().any(|w| matches!(w, ScenarioWarning::OffSynchronism { .. })));
    }

    #[test]
    fn large_recoil_flagged() {
        let s = DimensionlessScenario {
            ups: 0.1,
            theta: 0.0,
            eps: 0.2,
            phi0: 0.0,
            extinction0: 1.0,
            chirp: 0.0,
            photon_state: PhotonFieldState::Vacuum,
            modulation: None,
            small_ratios: SmallRatios::default(),
        };
        let w = s.validate().unwrap();
        assert!(w.iter().any(|w| matches!(w, ScenarioWarning::LargeRecoil { .. })));
    }

    #[test]
    fn modulation_consistency_enforced() {
        let s = DimensionlessScenario {
            ups: 0.1,
            theta: 0.0,
            eps: 0.0,
            phi0: 0.0,
            extinction0: 1.0,
            chirp: 0.0,
            photon_state: PhotonFieldState::Vacuum,
            modulation: Some(ModulationParams { g_mag: 1.0, r: 0.5, w: 3.0 }),
            small_ratios: SmallRatios::default(),
        };
        assert!(s.validate().is_err());
    }
}
