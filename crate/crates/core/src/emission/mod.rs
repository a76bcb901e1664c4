//! Closed-form photon emission increments.
//!
//! The increment splits as Δν = Δν⁽¹⁾ + Δν⁽²⁾: a first-order interference
//! term that depends on the wavepacket and exists only for phase-carrying
//! (coherent) light, and a second-order term that does not depend on the
//! wavepacket at all.

mod bunching;

pub use bunching::{
    bunching_b_ea, bunching_bl, bunching_spectrum, optimal_drift_chirp, BunchingPair, BunchingSpectrum,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{constants, DimensionlessScenario, ModulationParams};
use crate::specfun;

/// e^{-x} is returned as exactly zero beyond this exponent.
const EXP_UNDERFLOW: f64 = 745.0;

/// Photon state of the radiation mode before the interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PhotonFieldState {
    Vacuum,
    Fock {
        nu0: u64,
    },
    /// Glauber state with mean photon number `nu0`.
    Coherent {
        nu0: f64,
    },
}

impl PhotonFieldState {
    pub fn nu0(&self) -> f64 {
        match *self {
            PhotonFieldState::Vacuum => 0.0,
            PhotonFieldState::Fock { nu0 } => nu0 as f64,
            PhotonFieldState::Coherent { nu0 } => nu0,
        }
    }

    /// Whether the state carries a phase, i.e. admits first-order emission.
    pub fn is_coherent(&self) -> bool {
        matches!(self, PhotonFieldState::Coherent { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            PhotonFieldState::Vacuum => "vacuum",
            PhotonFieldState::Fock { .. } => "fock",
            PhotonFieldState::Coherent { .. } => "coherent",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let PhotonFieldState::Coherent { nu0 } = *self {
            if !(nu0.is_finite() && nu0 >= 0.0) {
                return Err(Error::config("photon_state.nu0", "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

/// Net photon increment split into its first- and second-order parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmissionResult {
    pub dnu1: f64,
    pub dnu2: f64,
    pub total: f64,
}

impl EmissionResult {
    pub fn new(dnu1: f64, dnu2: f64) -> Self {
        EmissionResult { dnu1, dnu2, total: dnu1 + dnu2 }
    }

    /// ΔW / ħω, equal to the total photon increment.
    pub fn energy_per_hbar_omega(&self) -> f64 {
        self.total
    }
}

/// The lineshape function the closed forms are built on.
pub trait Lineshape: Sync {
    fn sinc(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSinc;

impl Lineshape for ExactSinc {
    fn sinc(&self, x: f64) -> f64 {
        specfun::sinc(x)
    }
}

/// sinc scaled by `1 + relative`; used to check that the verification
/// battery notices a broken lineshape.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedSinc {
    pub relative: f64,
}

impl Lineshape for PerturbedSinc {
    fn sinc(&self, x: f64) -> f64 {
        specfun::sinc(x) * (1.0 + self.relative)
    }
}

/// e^{-Γ²/2}, flushed to zero instead of going subnormal.
pub fn extinction_factor(gamma: f64) -> f64 {
    let exponent = 0.5 * gamma * gamma;
    if exponent > EXP_UNDERFLOW {
        0.0
    } else {
        (-exponent).exp()
    }
}

/// Closed-form evaluator over a chosen lineshape.
#[derive(Clone, Copy)]
pub struct ClosedForm<'a> {
    lineshape: &'a dyn Lineshape,
}

impl Default for ClosedForm<'static> {
    fn default() -> Self {
        ClosedForm { lineshape: &ExactSinc }
    }
}

impl<'a> ClosedForm<'a> {
    pub fn with_lineshape(lineshape: &'a dyn Lineshape) -> Self {
        ClosedForm { lineshape }
    }

    fn sinc(&self, x: f64) -> f64 {
        self.lineshape.sinc(x)
    }

    /// Single-photon emission from the vacuum: Υ² sinc²(θ̄_e/2).
    pub fn spontaneous(&self, ups: f64, theta_e: f64) -> f64 {
        let s = self.sinc(0.5 * theta_e);
        ups * ups * (s * s)
    }

    /// Υ²[(ν₀+1) sinc²(θ̄_e/2) − ν₀ sinc²(θ̄_a/2)], shared by every state.
    pub fn second_order(&self, ups: f64, nu0: f64, theta_e: f64, theta_a: f64) -> f64 {
        let se = self.sinc(0.5 * theta_e);
        let sa = self.sinc(0.5 * theta_a);
        ups * ups * ((nu0 + 1.0) * se * se - nu0 * sa * sa)
    }

    pub fn stimulated_fock(&self, ups: f64, nu0: u64, theta_e: f64, theta_a: f64) -> EmissionResult {
        // a phaseless state has no first-order term, whatever the wavepacket
        EmissionResult::new(0.0, self.second_order(ups, nu0 as f64, theta_e, theta_a))
    }

    /// Coherent light on an unmodulated Gaussian wavepacket.
    pub fn stimulated_coherent_gaussian(
        &self,
        ups: f64,
        nu0: f64,
        gamma: f64,
        theta: f64,
        eps: f64,
        phi0: f64,
    ) -> EmissionResult {
        let theta_e = theta + 0.5 * eps;
        let theta_a = theta - 0.5 * eps;
        let decay = extinction_factor(gamma);
        let interference = self.sinc(0.5 * theta_e) * (0.5 * theta_e + phi0).cos()
            + self.sinc(0.5 * theta_a) * (0.5 * theta_a + phi0).cos();
        let dnu1 = 2.0 * ups * nu0.sqrt() * decay * interference;
        EmissionResult::new(dnu1, self.second_order(ups, nu0, theta_e, theta_a))
    }

    /// Coherent light on a modulated wavepacket, keeping the quadrature
    /// component of the bunching overlap:
    /// Δν⁽¹⁾ = 2Υ√ν₀ Re{B_e sinc(θ̄_e/2) e^{i(θ̄_e/2+φ₀)} + B_a sinc(θ̄_a/2) e^{−i(θ̄_a/2+φ₀)}}.
    pub fn stimulated_coherent_modulated(
        &self,
        ups: f64,
        nu0: f64,
        scenario: &DimensionlessScenario,
    ) -> Result<EmissionResult> {
        let modulation = require_modulation(scenario)?;
        let pair = bunching_b_ea(modulation.g_mag, modulation.r, scenario.chirp, modulation.w)?;
        let (theta_e, theta_a) = (scenario.theta_e(), scenario.theta_a());
        let psi_e = 0.5 * theta_e + scenario.phi0;
        let psi_a = 0.5 * theta_a + scenario.phi0;
        let emission = pair.emission * Complex64::from_polar(self.sinc(0.5 * theta_e), psi_e);
        let absorption = pair.absorption * Complex64::from_polar(self.sinc(0.5 * theta_a), -psi_a);
        let dnu1 = 2.0 * ups * nu0.sqrt() * (emission + absorption).re;
        Ok(EmissionResult::new(dnu1, self.second_order(ups, nu0, theta_e, theta_a)))
    }

    /// The cosine-only form 2Υ√ν₀[Re B_e sinc cos(θ̄_e/2+φ₀) + Re B_a sinc cos(θ̄_a/2+φ₀)].
    ///
    /// Agrees with [`Self::stimulated_coherent_modulated`] whenever the bunching
    /// overlap is real (no modulation, no drift) or sin(θ̄/2+φ₀) = 0.
    pub fn stimulated_coherent_modulated_in_phase(
        &self,
        ups: f64,
        nu0: f64,
        scenario: &DimensionlessScenario,
    ) -> Result<EmissionResult> {
        let modulation = require_modulation(scenario)?;
        let pair = bunching_b_ea(modulation.g_mag, modulation.r, scenario.chirp, modulation.w)?;
        let (theta_e, theta_a) = (scenario.theta_e(), scenario.theta_a());
        let dnu1 = 2.0
            * ups
            * nu0.sqrt()
            * (pair.emission.re * self.sinc(0.5 * theta_e) * (0.5 * theta_e + scenario.phi0).cos()
                + pair.absorption.re * self.sinc(0.5 * theta_a) * (0.5 * theta_a + scenario.phi0).cos());
        Ok(EmissionResult::new(dnu1, self.second_order(ups, nu0, theta_e, theta_a)))
    }

    /// Dispatches on the photon state and wavepacket kind.
    pub fn emit(&self, scenario: &DimensionlessScenario) -> Result<EmissionResult> {
        let ups = scenario.ups;
        match scenario.photon_state {
            PhotonFieldState::Vacuum => Ok(EmissionResult::new(0.0, self.spontaneous(ups, scenario.theta_e()))),
            PhotonFieldState::Fock { nu0 } => {
                Ok(self.stimulated_fock(ups, nu0, scenario.theta_e(), scenario.theta_a()))
            }
            PhotonFieldState::Coherent { nu0 } => match scenario.modulation {
                Some(_) => self.stimulated_coherent_modulated(ups, nu0, scenario),
                None => Ok(self.stimulated_coherent_gaussian(
                    ups,
                    nu0,
                    scenario.extinction(),
                    scenario.theta,
                    scenario.eps,
                    scenario.phi0,
                )),
            },
        }
    }
}

fn require_modulation(scenario: &DimensionlessScenario) -> Result<ModulationParams> {
    scenario.modulation.ok_or_else(|| Error::InvalidInput("scenario has no modulation".into()))
}

pub fn spontaneous(ups: f64, theta_e: f64) -> f64 {
    ClosedForm::default().spontaneous(ups, theta_e)
}

/// Spontaneous photons per second, Δν_SP / (L / v₀).
pub fn spontaneous_rate(dnu_sp: f64, v0: f64, interaction_length: f64) -> Result<f64> {
    if !(v0 > 0.0 && interaction_length > 0.0) {
        return Err(Error::InvalidInput("v0 and interaction length must be > 0".into()));
    }
    Ok(v0 / interaction_length * dnu_sp)
}

pub fn stimulated_fock(ups: f64, nu0: u64, theta_e: f64, theta_a: f64) -> EmissionResult {
    ClosedForm::default().stimulated_fock(ups, nu0, theta_e, theta_a)
}

pub fn stimulated_coherent_gaussian(ups: f64, nu0: f64, gamma: f64, theta: f64, eps: f64, phi0: f64) -> EmissionResult {
    ClosedForm::default().stimulated_coherent_gaussian(ups, nu0, gamma, theta, eps, phi0)
}

pub fn stimulated_coherent_modulated(ups: f64, nu0: f64, scenario: &DimensionlessScenario) -> Result<EmissionResult> {
    ClosedForm::default().stimulated_coherent_modulated(ups, nu0, scenario)
}

pub fn emit(scenario: &DimensionlessScenario) -> Result<EmissionResult> {
    ClosedForm::default().emit(scenario)
}

/// First-order increment driven by a classical field E_cl (SI units):
/// (e E_cl L / ħω) e^{−Γ²/2} sinc(θ̄/2) cos(θ̄/2 + φ₀).
pub fn classical_field_increment(
    e_cl: f64,
    interaction_length: f64,
    omega: f64,
    gamma: f64,
    theta: f64,
    phi0: f64,
) -> Result<f64> {
    if !(e_cl > 0.0 && interaction_length > 0.0 && omega > 0.0) {
        return Err(Error::InvalidInput("E_cl, L and omega must be > 0".into()));
    }
    let work = constants::ELEMENTARY_CHARGE * e_cl * interaction_length / (constants::HBAR * omega);
    Ok(work * extinction_factor(gamma) * specfun::sinc(0.5 * theta) * (0.5 * theta + phi0).cos())
}

/// (Δν⁽¹⁾)² / Δν_SP from two computed increments.
pub fn einstein_ratio(dnu1: f64, dnu_sp: f64) -> Result<f64> {
    if !(dnu_sp > f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!("spontaneous increment {dnu_sp} too small to divide by")));
    }
    Ok(dnu1 * dnu1 / dnu_sp)
}

/// 16 ν₀ e^{−Γ²} cos²(θ̄/2 + φ₀).
pub fn einstein_ratio_analytic(nu0: f64, gamma: f64, theta: f64, phi0: f64) -> f64 {
    let c = (0.5 * theta + phi0).cos();
    let decay = extinction_factor(gamma);
    16.0 * nu0 * decay * decay * c * c
}

/// Peak first-order increment over the peak spontaneous increment, 4√ν₀/Υ.
pub fn signal_to_noise(nu0: f64, ups: f64) -> Result<f64> {
    if !(ups > 0.0) {
        return Err(Error::InvalidInput("ups must be > 0".into()));
    }
    if !(nu0 >= 0.0) {
        return Err(Error::InvalidInput("nu0 must be >= 0".into()));
    }
    Ok(4.0 * nu0.sqrt() / ups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::SmallRatios;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn modulated(g: f64, r: f64, c: f64, w: f64, theta: f64, eps: f64, phi0: f64) -> DimensionlessScenario {
        DimensionlessScenario {
            ups: 0.05,
            theta,
            eps,
            phi0,
            extinction0: w * r,
            chirp: c,
            photon_state: PhotonFieldState::Coherent { nu0: 4.0 },
            modulation: Some(ModulationParams { g_mag: g, r, w }),
            small_ratios: SmallRatios::default(),
        }
    }

    #[test]
    fn spontaneous_reference_values() {
        assert_relative_eq!(spontaneous(0.1, 0.0), 0.01, max_relative = 1e-15);
        assert!(spontaneous(0.1, 2.0 * PI) < 1e-33);
        assert_relative_eq!(spontaneous(0.1, PI), 0.01 * (2.0 / PI).powi(2), max_relative = 1e-14);
        assert!((spontaneous(0.1, PI) - 0.004053).abs() < 1e-6);
    }

    #[test]
    fn spontaneous_rate_values() {
        assert_relative_eq!(spontaneous_rate(0.01, 2e8, 1e-4).unwrap(), 2e10, max_relative = 1e-15);
        assert_eq!(spontaneous_rate(0.0, 2e8, 1e-4).unwrap(), 0.0);
        let r1 = spontaneous_rate(0.01, 2e8, 1e-4).unwrap();
        let r2 = spontaneous_rate(0.01, 2e8, 2e-4).unwrap();
        assert_relative_eq!(r2, 0.5 * r1, max_relative = 1e-15);
        assert!(spontaneous_rate(0.01, 0.0, 1.0).is_err());
    }

    #[test]
    fn fock_reduces_to_spontaneous_at_zero_photons() {
        for &theta in &[-3.0, 0.0, 0.4, 2.5] {
            let r = stimulated_fock(0.07, 0, theta + 0.05, theta - 0.05);
            assert_eq!(r.dnu1, 0.0);
            assert_eq!(r.dnu2, spontaneous(0.07, theta + 0.05));
        }
    }

    #[test]
    fn fock_without_recoil_is_photon_number_independent() {
        for nu0 in [0u64, 1, 10, 1000] {
            let r = stimulated_fock(0.1, nu0, 0.8, 0.8);
            assert_relative_eq!(r.dnu2, spontaneous(0.1, 0.8), max_relative = 1e-12);
        }
    }

    #[test]
    fn fock_reference_value() {
        let r = stimulated_fock(0.1, 10, 0.1, -0.1);
        let s = specfun::sinc(0.05);
        assert_relative_eq!(r.dnu2, 0.01 * (11.0 * s * s - 10.0 * s * s), max_relative = 1e-12);
        assert_relative_eq!(r.dnu2, 0.01 * s * s, max_relative = 1e-12);
    }

    #[test]
    fn coherent_gaussian_reference_values() {
        let r = stimulated_coherent_gaussian(0.1, 100.0, 0.0, 0.0, 0.0, 0.0);
        assert_relative_eq!(r.dnu1, 4.0, max_relative = 1e-15);
        let r = stimulated_coherent_gaussian(0.05, 1.0, 1.0, 0.0, 0.0, 0.0);
        assert_relative_eq!(r.dnu1, 0.2 * (-0.5f64).exp(), max_relative = 1e-15);
        assert!((r.dnu1 - 0.121306).abs() < 1e-6);
    }

    #[test]
    fn coherent_gaussian_matches_zero_recoil_form() {
        let (ups, nu0, gamma, theta, phi0): (f64, f64, f64, f64, f64) = (0.03, 7.0, 0.8, 1.3, 0.4);
        let r = stimulated_coherent_gaussian(ups, nu0, gamma, theta, 0.0, phi0);
        let eq28a = 4.0
            * ups
            * nu0.sqrt()
            * (-0.5 * gamma * gamma).exp()
            * specfun::sinc(0.5 * theta)
            * (0.5 * theta + phi0).cos();
        assert_relative_eq!(r.dnu1, eq28a, max_relative = 1e-14);
    }

    #[test]
    fn classical_field_matches_quantum_form() {
        let (ups, nu0, gamma, theta, phi0): (f64, f64, f64, f64, f64) = (0.02, 9.0, 1.2, 0.7, -0.3);
        let (length, omega) = (1e-4, 2.35e15);
        // Υ = e ℰ L / 4ħω and E_cl = √ν₀ ℰ
        let e_qz0 = ups * 4.0 * constants::HBAR * omega / (constants::ELEMENTARY_CHARGE * length);
        let e_cl = nu0.sqrt() * e_qz0;
        let classical = classical_field_increment(e_cl, length, omega, gamma, theta, phi0).unwrap();
        let quantum = stimulated_coherent_gaussian(ups, nu0, gamma, theta, 0.0, phi0).dnu1;
        assert_relative_eq!(classical, quantum, max_relative = 1e-14);
    }

    #[test]
    fn classical_field_limits() {
        assert_eq!(classical_field_increment(1e6, 1e-4, 2e15, 60.0, 0.0, 0.0).unwrap(), 0.0);
        let work = constants::ELEMENTARY_CHARGE * 1e6 * 1e-4 / (constants::HBAR * 2e15);
        let v = classical_field_increment(1e6, 1e-4, 2e15, 0.5, PI, PI / 2.0).unwrap();
        assert_relative_eq!(v, -work * (-0.125f64).exp() * 2.0 / PI, max_relative = 1e-14);
    }

    #[test]
    fn extinction_underflow_is_exact_zero() {
        assert_eq!(extinction_factor(40.0), 0.0);
        assert!(extinction_factor(38.0) > 0.0);
        assert_eq!(extinction_factor(0.0), 1.0);
    }

    #[test]
    fn cutoff_law_is_exact() {
        let base = stimulated_coherent_gaussian(0.05, 2.0, 0.0, 0.3, 0.05, 0.2).dnu1;
        for &g in &[0.1, 0.5, 1.0, 2.0, 3.5] {
            let v = stimulated_coherent_gaussian(0.05, 2.0, g, 0.3, 0.05, 0.2).dnu1;
            assert_relative_eq!(v / base, (-0.5 * g * g).exp(), max_relative = 1e-14);
        }
    }

    #[test]
    fn einstein_relation_examples() {
        assert_relative_eq!(einstein_ratio_analytic(4.0, 0.0, 0.0, 0.0), 64.0, max_relative = 1e-15);
        assert!(einstein_ratio_analytic(4.0, 0.0, 0.0, PI / 2.0) < 1e-30);
        assert!(einstein_ratio(1.0, 0.0).is_err());
    }

    #[test]
    fn signal_to_noise_values() {
        assert_relative_eq!(signal_to_noise(1.0, 0.1).unwrap(), 40.0, max_relative = 1e-15);
        let base = signal_to_noise(3.0, 0.2).unwrap();
        assert_relative_eq!(signal_to_noise(12.0, 0.2).unwrap(), 2.0 * base, max_relative = 1e-15);
        assert_relative_eq!(signal_to_noise(3.0, 0.4).unwrap(), 0.5 * base, max_relative = 1e-15);
    }

    #[test]
    fn signal_to_noise_matches_dense_scan() {
        // peak of the first-order term over (θ̄, φ₀) against the peak of the spontaneous term
        let (ups, nu0) = (0.1, 1.0);
        let mut peak1 = 0.0f64;
        let mut peak_sp = 0.0f64;
        let n = 400;
        for i in 0..=n {
            let theta = -2.0 * PI + 4.0 * PI * i as f64 / n as f64;
            peak_sp = peak_sp.max(spontaneous(ups, theta));
            for j in 0..64 {
                let phi0 = 2.0 * PI * j as f64 / 64.0;
                peak1 = peak1.max(stimulated_coherent_gaussian(ups, nu0, 0.0, theta, 0.0, phi0).dnu1);
            }
        }
        assert_relative_eq!(peak1 / peak_sp, signal_to_noise(nu0, ups).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn modulated_reduces_to_gaussian_without_modulation() {
        for &(c, w) in &[(0.0, 1.0), (1.5, 2.0), (4.0, 0.7)] {
            let s = modulated(0.0, 0.4, c, w, 0.6, 0.08, 1.1);
            let m = stimulated_coherent_modulated(s.ups, s.nu0(), &s).unwrap();
            let g = stimulated_coherent_gaussian(s.ups, s.nu0(), s.extinction(), s.theta, s.eps, s.phi0);
            assert!((m.dnu1 - g.dnu1).abs() <= 1e-14 * g.dnu1.abs().max(1e-300), "{m:?} {g:?}");
            assert_eq!(m.dnu2, g.dnu2);
        }
    }

    #[test]
    fn in_phase_form_agrees_when_quadrature_vanishes() {
        // θ̄ = 0, φ₀ = 0 kills the sine term
        let s = modulated(1.0, 0.5, 1.0, 2.0, 0.0, 0.0, 0.0);
        let full = stimulated_coherent_modulated(s.ups, s.nu0(), &s).unwrap();
        let in_phase = ClosedForm::default().stimulated_coherent_modulated_in_phase(s.ups, s.nu0(), &s).unwrap();
        assert_relative_eq!(full.dnu1, in_phase.dnu1, max_relative = 1e-14);
        // at φ₀ = π/2 they differ by the quadrature component
        let s = modulated(1.0, 0.5, 1.0, 2.0, 0.0, 0.0, PI / 2.0);
        let full = stimulated_coherent_modulated(s.ups, s.nu0(), &s).unwrap();
        let in_phase = ClosedForm::default().stimulated_coherent_modulated_in_phase(s.ups, s.nu0(), &s).unwrap();
        assert!((full.dnu1 - in_phase.dnu1).abs() > 1e-3);
    }

    #[test]
    fn beyond_cutoff_emission_survives() {
        // Γ_b = 4, w = 2 → e^{-Γ²/2} = e^{-32}
        let c = 0.06;
        let r = 4.0 / (1.0f64 + c * c).sqrt();
        let s = modulated(1.0, r, c, 2.0, 0.0, 0.0, 0.0);
        assert_relative_eq!(s.extinction(), 8.0, max_relative = 1e-12);
        let m = stimulated_coherent_modulated(s.ups, s.nu0(), &s).unwrap();
        let g = stimulated_coherent_gaussian(s.ups, s.nu0(), s.extinction(), 0.0, 0.0, 0.0);
        assert!(m.dnu1.abs() > 1e6 * g.dnu1.abs(), "{} vs {}", m.dnu1, g.dnu1);
    }

    #[test]
    fn photon_state_serde() {
        let s: PhotonFieldState = serde_json::from_str(r#"{"kind":"fock","nu0":3}"#).unwrap();
        assert_eq!(s, PhotonFieldState::Fock { nu0: 3 });
        let s: PhotonFieldState = serde_json::from_str(r#"{"kind":"vacuum"}"#).unwrap();
        assert_eq!(s, PhotonFieldState::Vacuum);
        assert!(PhotonFieldState::Coherent { nu0: -1.0 }.validate().is_err());
    }

    #[test]
    fn perturbed_lineshape_changes_results() {
        let p = PerturbedSinc { relative: 1e-3 };
        let cf = ClosedForm::with_lineshape(&p);
        let a = cf.spontaneous(0.1, 0.3);
        let b = spontaneous(0.1, 0.3);
        assert_relative_eq!(a / b, 1.002001, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn vacuum_and_fock_have_no_first_order(
            ups in 0.0f64..1.0, theta in -10.0f64..10.0, eps in 0.0f64..0.2,
            nu0 in 0u64..10_000, g in 0.0f64..3.0, c in 0.0f64..5.0,
        ) {
            let mut s = modulated(g, 0.4, c, 2.0, theta, eps, 0.3);
            s.ups = ups;
            s.photon_state = PhotonFieldState::Vacuum;
            let v = emit(&s).unwrap();
            prop_assert_eq!(v.dnu1.to_bits(), 0.0f64.to_bits());
            prop_assert!(v.dnu2 >= 0.0);
            s.photon_state = PhotonFieldState::Fock { nu0 };
            prop_assert_eq!(emit(&s).unwrap().dnu1.to_bits(), 0.0f64.to_bits());
            s.modulation = None;
            prop_assert_eq!(emit(&s).unwrap().dnu1.to_bits(), 0.0f64.to_bits());
        }

        #[test]
        fn second_order_is_wavepacket_independent(
            ups in 0.0f64..1.0, nu0 in 0.0f64..100.0, theta in -7.0f64..7.0, eps in 0.0f64..0.1,
            g in 0.0f64..3.0, r in 0.05f64..2.0, c in 0.0f64..5.0, w in 0.0f64..5.0,
        ) {
            let mut s = modulated(g, r, c, w, theta, eps, 0.0);
            s.ups = ups;
            s.photon_state = PhotonFieldState::Coherent { nu0 };
            let m = stimulated_coherent_modulated(ups, nu0, &s).unwrap();
            let gauss = stimulated_coherent_gaussian(ups, nu0, s.extinction(), theta, eps, 0.0);
            prop_assert_eq!(m.dnu2.to_bits(), gauss.dnu2.to_bits());
        }

        #[test]
        fn phi0_shift_by_pi_flips_first_order(
            ups in 0.0f64..1.0, nu0 in 0.0f64..100.0, gamma in 0.0f64..3.0,
            theta in -7.0f64..7.0, eps in 0.0f64..0.1, phi0 in 0.0f64..6.3,
        ) {
            let a = stimulated_coherent_gaussian(ups, nu0, gamma, theta, eps, phi0);
            let b = stimulated_coherent_gaussian(ups, nu0, gamma, theta, eps, phi0 + PI);
            prop_assert!((a.dnu1 + b.dnu1).abs() <= 1e-13 * (1.0 + a.dnu1.abs()));
            prop_assert_eq!(a.dnu2, b.dnu2);
        }

        #[test]
        fn einstein_relation_identity(
            nu0 in 0.01f64..100.0, gamma in 0.0f64..3.0, theta in -6.0f64..6.0, phi0 in 0.0f64..6.3,
            ups in 0.001f64..1.0,
        ) {
            prop_assume!(specfun::sinc(0.5 * theta).abs() > 1e-3);
            let dnu1 = stimulated_coherent_gaussian(ups, nu0, gamma, theta, 0.0, phi0).dnu1;
            let sp = spontaneous(ups, theta);
            let numeric = einstein_ratio(dnu1, sp).unwrap();
            let analytic = einstein_ratio_analytic(nu0, gamma, theta, phi0);
            prop_assert!((numeric - analytic).abs() <= 1e-12 * analytic.max(1e-300) + 1e-300);
        }
    }
}
