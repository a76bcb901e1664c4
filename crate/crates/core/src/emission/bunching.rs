//! Bunching parameters of a PINEM-modulated, drift-chirped wavepacket.
//!
//! Everything is expressed in the reduced variables r = δ_p/2σ_p0 (comb
//! spacing over twice the momentum spread), C = ξ t_D (chirp) and
//! w = ω/ω_b (harmonic number of the modulation frequency).

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{bessel_row, BesselRow, NeumaierSum};

use super::EXP_UNDERFLOW;

/// Terms whose Gaussian weight falls below this are dropped from the
/// double sums. Each dropped term is bounded by this weight times
/// |J_n J_m| ≤ 1, and the rows hold at most a few hundred entries.
const TERM_WEIGHT_FLOOR: f64 = 1e-18;

fn check_args(g_mag: f64, r: f64, chirp: f64) -> Result<()> {
    if !(g_mag.is_finite() && g_mag >= 0.0) {
        return Err(Error::InvalidInput(format!("g_mag must be finite and >= 0, got {g_mag}")));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidInput(format!("r must be finite and >= 0, got {r}")));
    }
    if !chirp.is_finite() {
        return Err(Error::InvalidInput(format!("chirp must be finite, got {chirp}")));
    }
    Ok(())
}

fn decay(exponent: f64) -> f64 {
    if exponent > EXP_UNDERFLOW {
        0.0
    } else {
        (-exponent).exp()
    }
}

fn harmonic_from_row(row: &BesselRow, r: f64, chirp: f64, l: i64) -> f64 {
    let envelope = decay(0.5 * (l as f64 * chirp * r).powi(2));
    if envelope == 0.0 {
        return 0.0;
    }
    let phase_step = l as f64 * chirp * r * r;
    let lo = row.order_min().max(row.order_min() + l);
    let hi = row.order_max().min(row.order_max() + l);
    let mut acc = NeumaierSum::default();
    for n in lo..=hi {
        acc.add(row.get(n) * row.get(n - l) * ((2 * n - l) as f64 * phase_step).cos());
    }
    envelope * acc.sum()
}

/// Harmonic amplitude
/// B_l = Σ_n J_n(2g) J_{n−l}(2g) e^{−l²C²r²/2} cos((2n−l) l C r²).
///
/// Odd harmonics cancel pairwise under n → l − n and come out at rounding
/// level.
pub fn bunching_bl(g_mag: f64, r: f64, chirp: f64, l: i64) -> Result<f64> {
    check_args(g_mag, r, chirp)?;
    let row = bessel_row(2.0 * g_mag, 0)?;
    Ok(harmonic_from_row(&row, r, chirp, l))
}

/// Emission and absorption bunching overlaps at harmonic `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BunchingPair {
    pub emission: Complex64,
    pub absorption: Complex64,
}

impl BunchingPair {
    /// (B_e + B_a)/2, the real combination where the imaginary parts cancel.
    pub fn in_phase(&self) -> f64 {
        0.5 * (self.emission.re + self.absorption.re)
    }
}

/// Overlaps ∫c*(u) c(u ± 2wr) du / (normalization) for the modulated
/// amplitude, evaluated as the double Bessel sum
/// B_e = Σ_{n,m} J_n J_m exp(−r²(n−m+w)²/2 − w²C²r²/2 − i(n+m) w C r²),
/// B_a = conj(B_e).
///
/// The first exponent is e^{−Γ²/2} e^{−(n−m)²r²/2} e^{−(n−m)wr²} regrouped,
/// with Γ = wr√(1+C²); truncation is applied to the regrouped weight.
pub fn bunching_b_ea(g_mag: f64, r: f64, chirp: f64, w: f64) -> Result<BunchingPair> {
    check_args(g_mag, r, chirp)?;
    if !w.is_finite() {
        return Err(Error::InvalidInput(format!("w must be finite, got {w}")));
    }
    let common = decay(0.5 * (w * chirp * r).powi(2));
    if common == 0.0 {
        let zero = Complex64::new(0.0, 0.0);
        return Ok(BunchingPair { emission: zero, absorption: zero });
    }
    let row = bessel_row(2.0 * g_mag, 0)?;
    let kappa = w * chirp * r * r;
    let (mut re, mut im) = (NeumaierSum::default(), NeumaierSum::default());
    for (n, jn) in row.iter() {
        if jn == 0.0 {
            continue;
        }
        for (m, jm) in row.iter() {
            let weight = decay(0.5 * (r * ((n - m) as f64 + w)).powi(2));
            if weight < TERM_WEIGHT_FLOOR {
                continue;
            }
            let amp = jn * jm * weight;
            let (s, c) = ((n + m) as f64 * kappa).sin_cos();
            re.add(amp * c);
            im.add(-amp * s);
        }
    }
    let emission = Complex64::new(common * re.sum(), common * im.sum());
    Ok(BunchingPair { emission, absorption: emission.conj() })
}

/// Harmonic decomposition of B(ω) together with its samples on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BunchingSpectrum {
    /// l → B_l
    pub harmonics: BTreeMap<i64, f64>,
    /// Γ_b = r√(1+C²)
    pub envelope_sigma: f64,
    pub w: Vec<f64>,
    pub values: Vec<f64>,
}

impl BunchingSpectrum {
    pub fn harmonic(&self, l: i64) -> f64 {
        self.harmonics.get(&l).copied().unwrap_or(0.0)
    }

    /// Contribution of harmonic `l` at `w`: B_l e^{−(w−l)²Γ_b²/2}.
    pub fn envelope_term(&self, l: i64, w: f64) -> f64 {
        let b = self.harmonic(l);
        if b == 0.0 {
            return 0.0;
        }
        b * decay(0.5 * ((w - l as f64) * self.envelope_sigma).powi(2))
    }

    /// B(w) = Σ_l B_l e^{−(w−l)²Γ_b²/2}.
    pub fn evaluate(&self, w: f64) -> f64 {
        let mut acc = NeumaierSum::default();
        for &l in self.harmonics.keys() {
            acc.add(self.envelope_term(l, w));
        }
        acc.sum()
    }
}

pub fn bunching_spectrum(g_mag: f64, r: f64, chirp: f64, w_grid: &[f64]) -> Result<BunchingSpectrum> {
    check_args(g_mag, r, chirp)?;
    if let Some(bad) = w_grid.iter().find(|w| !w.is_finite()) {
        return Err(Error::InvalidInput(format!("w grid contains non-finite value {bad}")));
    }
    let row = bessel_row(2.0 * g_mag, 0)?;
    let l_max = 2 * row.order_max();
    let harmonics: BTreeMap<i64, f64> = (-l_max..=l_max).map(|l| (l, harmonic_from_row(&row, r, chirp, l))).collect();
    let mut spectrum = BunchingSpectrum {
        harmonics,
        envelope_sigma: r * (1.0 + chirp * chirp).sqrt(),
        w: w_grid.to_vec(),
        values: Vec::new(),
    };
    let values: Vec<f64> = w_grid.par_iter().map(|&w| spectrum.evaluate(w)).collect();
    spectrum.values = values;
    Ok(spectrum)
}

/// Chirp C in (0, c_max] maximizing |B_l| when the envelope width Γ_b is
/// held fixed, i.e. r = Γ_b/√(1+C²).
pub fn optimal_drift_chirp(g_mag: f64, envelope_sigma: f64, harmonic: i64, c_max: f64) -> Result<f64> {
    check_args(g_mag, envelope_sigma, c_max)?;
    if !(c_max > 0.0) {
        return Err(Error::InvalidInput("c_max must be > 0".into()));
    }
    let row = bessel_row(2.0 * g_mag, 0)?;
    let objective = |c: f64| {
        let r = envelope_sigma / (1.0 + c * c).sqrt();
        harmonic_from_row(&row, r, c, harmonic).abs()
    };

    let steps = 4000;
    let h = c_max / steps as f64;
    let mut best = (h, objective(h));
    for i in 2..=steps {
        let c = h * i as f64;
        let v = objective(c);
        if v > best.1 {
            best = (c, v);
        }
    }

    // golden-section refinement inside the winning cell
    let (mut a, mut b) = ((best.0 - h).max(0.0), (best.0 + h).min(c_max));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = b - ratio * (b - a);
        let x2 = a + ratio * (b - a);
        if objective(x1) >= objective(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    Ok(0.5 * (a + b))
}
