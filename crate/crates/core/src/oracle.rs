//! Brute-force evaluation of the emission increments by quadrature over the
//! electron momentum, with explicit wavepacket amplitudes and exact recoil.
//!
//! Momentum is measured as u = (p − p₀)/σ_p0. The ν-sums of the coherent
//! state are done analytically, so the u integral is the only numerical
//! approximation here.

use std::f64::consts::PI;
use std::ops::{Add, Mul};
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::emission::{EmissionResult, PhotonFieldState};
use crate::error::{Error, Result};
use crate::kinematics::{DimensionlessScenario, SmallRatios};
use crate::specfun::{self, bessel_row, BesselRow, NeumaierSum};

/// Points per Gauss–Legendre panel.
pub const GL_ORDER: usize = 16;

/// Minimum distance, in units of the momentum spread, between the outermost
/// comb line and the grid edge.
pub const MIN_MARGIN: f64 = 8.0;

/// Margin used when the grid is built automatically.
pub const DEFAULT_MARGIN: f64 = 10.0;

/// Tolerance on ∫|c|² du = 1.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Comb terms farther than this from u contribute below e^{-49}.
const COMB_REACH: f64 = 14.0;

fn gl_rule() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Nodes and weights on [-1, 1] by Newton iteration on P_n.
fn gauss_legendre<const N: usize>(n: usize) -> ([f64; N], [f64; N]) {
    debug_assert_eq!(n, N);
    let mut nodes = [0.0; N];
    let mut weights = [0.0; N];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn pairwise_sum<T: Copy + Add<Output = T>>(xs: &[T], zero: T) -> T {
    match xs.len() {
        0 => zero,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a, zero) + pairwise_sum(b, zero)
        }
    }
}

/// Composite Gauss–Legendre grid on [u_min, u_max] with equal panels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumGrid {
    pub u_min: f64,
    pub u_max: f64,
    panels: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl MomentumGrid {
    pub fn new(u_min: f64, u_max: f64, panels: usize) -> Result<Self> {
        if !(u_min.is_finite() && u_max.is_finite() && u_min < u_max) {
            return Err(Error::InvalidInput(format!("bad grid bounds [{u_min}, {u_max}]")));
        }
        if panels == 0 {
            return Err(Error::InvalidInput("grid needs at least one panel".into()));
        }
        let (x, w) = gl_rule();
        let h = (u_max - u_min) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * GL_ORDER);
        let mut weights = Vec::with_capacity(panels * GL_ORDER);
        for k in 0..panels {
            let mid = u_min + (k as f64 + 0.5) * h;
            for i in 0..GL_ORDER {
                nodes.push(mid + 0.5 * h * x[i]);
                weights.push(0.5 * h * w[i]);
            }
        }
        Ok(MomentumGrid { u_min, u_max, panels, nodes, weights })
    }

    /// Grid over the comb support [comb_lo, comb_hi] widened by `margin`.
    ///
    /// Panels are at most one unit wide and at most half a local period of
    /// the chirp phase at the edge, so at least 32 nodes fall in each period.
    /// `max_shift` is the largest displacement at which the amplitude is
    /// evaluated; `min_nodes` raises the node count further.
    pub fn covering(
        comb_lo: f64,
        comb_hi: f64,
        margin: f64,
        chirp: f64,
        max_shift: f64,
        min_nodes: usize,
    ) -> Result<Self> {
        if margin < MIN_MARGIN {
            return Err(Error::GridTooNarrow(format!("margin {margin} is below {MIN_MARGIN}")));
        }
        let (u_min, u_max) = (comb_lo - margin, comb_hi + margin);
        let edge = u_min.abs().max(u_max.abs()) + max_shift.abs();
        let mut width: f64 = 1.0;
        if chirp != 0.0 {
            width = width.min(2.0 * PI / (chirp.abs() * edge));
        }
        let mut panels = ((u_max - u_min) / width).ceil() as usize;
        panels = panels.max(min_nodes.div_ceil(GL_ORDER)).max(1);
        MomentumGrid::new(u_min, u_max, panels)
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same bounds, twice the panels.
    pub fn refined(&self) -> Self {
        MomentumGrid::new(self.u_min, self.u_max, 2 * self.panels).expect("refining a valid grid")
    }

    /// ∫ f(u) du. Panels run in parallel; the per-panel sums are combined
    /// pairwise in panel order, so the result does not depend on scheduling.
    pub fn integrate<T, F>(&self, f: F) -> Result<T>
    where
        T: Copy + Send + Default + Add<Output = T> + Mul<f64, Output = T> + IsFinite,
        F: Fn(f64) -> T + Sync,
    {
        let partials: Result<Vec<T>> = (0..self.panels)
            .into_par_iter()
            .map(|k| {
                let mut acc = T::default();
                for i in k * GL_ORDER..(k + 1) * GL_ORDER {
                    let u = self.nodes[i];
                    let v = f(u);
                    if !v.finite() {
                        return Err(Error::NonFiniteIntegrand { node: u, detail: "integrand".into() });
                    }
                    acc = acc + v * self.weights[i];
                }
                Ok(acc)
            })
            .collect();
        Ok(pairwise_sum(&partials?, T::default()))
    }
}

/// Finiteness test shared by the integrand types.
pub trait IsFinite {
    fn finite(&self) -> bool;
}

impl IsFinite for f64 {
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl IsFinite for Complex64 {
    fn finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Which closed expression generates the amplitude.
#[derive(Debug, Clone, PartialEq)]
pub enum AmplitudeShape {
    /// (2π)^{-1/4} e^{−u²(1+iC)/4}
    Gaussian { chirp: f64 },
    /// (2π)^{-1/4} Σ_n J_n(2g) e^{−(u−2nr)²/4} e^{−iCu²/4}
    Modulated { g_mag: f64, r: f64, chirp: f64, row: BesselRow },
    /// Chirp applied to each comb line about its own centre,
    /// Σ_n J_n(2g) e^{−(u−2nr)²(1+iC)/4}, rescaled to unit norm.
    PerComb { g_mag: f64, r: f64, chirp: f64, row: BesselRow, scale: f64 },
}

impl AmplitudeShape {
    pub fn provenance(&self) -> &'static str {
        match self {
            AmplitudeShape::Gaussian { .. } => "gaussian",
            AmplitudeShape::Modulated { .. } => "modulated",
            AmplitudeShape::PerComb { .. } => "per_comb",
        }
    }

    pub fn chirp(&self) -> f64 {
        match *self {
            AmplitudeShape::Gaussian { chirp }
            | AmplitudeShape::Modulated { chirp, .. }
            | AmplitudeShape::PerComb { chirp, .. } => chirp,
        }
    }

    /// Outermost comb centres carrying weight above the Bessel tail.
    pub fn comb_extent(&self) -> (f64, f64) {
        match self {
            AmplitudeShape::Gaussian { .. } => (0.0, 0.0),
            AmplitudeShape::Modulated { r, row, .. } | AmplitudeShape::PerComb { r, row, .. } => {
                let n = row
                    .iter()
                    .filter(|&(_, j)| j.abs() > specfun::BESSEL_TAIL_TARGET)
                    .map(|(n, _)| n.abs())
                    .max()
                    .unwrap_or(0);
                let half = 2.0 * r * n as f64;
                (-half, half)
            }
        }
    }

    pub fn eval(&self, u: f64) -> Complex64 {
        let norm = (2.0 * PI).powf(-0.25);
        match self {
            AmplitudeShape::Gaussian { chirp } => {
                let q = 0.25 * u * u;
                Complex64::from_polar(norm * (-q).exp(), -chirp * q)
            }
            AmplitudeShape::Modulated { r, chirp, row, .. } => {
                let mut re = NeumaierSum::default();
                for (n, j) in comb_terms(row, *r, u) {
                    let d = u - 2.0 * n as f64 * r;
                    re.add(j * (-0.25 * d * d).exp());
                }
                Complex64::from_polar(norm * re.sum(), -0.25 * chirp * u * u)
            }
            AmplitudeShape::PerComb { r, chirp, row, scale, .. } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (n, j) in comb_terms(row, *r, u) {
                    let d = u - 2.0 * n as f64 * r;
                    let q = 0.25 * d * d;
                    acc += Complex64::from_polar(j * (-q).exp(), -chirp * q);
                }
                acc * (norm * scale)
            }
        }
    }
}

fn comb_terms(row: &BesselRow, r: f64, u: f64) -> impl Iterator<Item = (i64, f64)> + '_ {
    let (lo, hi) = if r > 0.0 {
        (
            ((u - COMB_REACH) / (2.0 * r)).ceil().max(row.order_min() as f64) as i64,
            ((u + COMB_REACH) / (2.0 * r)).floor().min(row.order_max() as f64) as i64,
        )
    } else {
        (row.order_min(), row.order_max())
    };
    (lo..=hi).map(move |n| (n, row.get(n)))
}

/// An amplitude bound to the grid it is integrated on.
#[derive(Debug, Clone)]
pub struct MomentumAmplitude {
    pub shape: AmplitudeShape,
    pub grid: MomentumGrid,
    /// c(u) at the grid nodes.
    pub values: Vec<Complex64>,
}

impl MomentumAmplitude {
    fn build(shape: AmplitudeShape, grid: MomentumGrid) -> Result<Self> {
        let (lo, hi) = shape.comb_extent();
        if grid.u_min > lo - MIN_MARGIN || grid.u_max < hi + MIN_MARGIN {
            return Err(Error::GridTooNarrow(format!(
                "{} amplitude needs [{}, {}], grid is [{}, {}]",
                shape.provenance(),
                lo - MIN_MARGIN,
                hi + MIN_MARGIN,
                grid.u_min,
                grid.u_max
            )));
        }
        let chirp = shape.chirp().abs();
        if chirp > 0.0 {
            let edge = grid.u_min.abs().max(grid.u_max.abs());
            let period = 4.0 * PI / (chirp * edge);
            let spacing = (grid.u_max - grid.u_min) / grid.len() as f64;
            if period / spacing < 32.0 {
                return Err(Error::GridTooNarrow(format!(
                    "chirp period {period:.3e} at |u| = {edge} is covered by {:.1} nodes, need 32",
                    period / spacing
                )));
            }
        }
        let values: Vec<Complex64> = grid.nodes().par_iter().map(|&u| shape.eval(u)).collect();
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.finite()) {
            return Err(Error::NonFiniteIntegrand { node: grid.nodes()[i], detail: format!("amplitude {v}") });
        }
        Ok(MomentumAmplitude { shape, grid, values })
    }

    pub fn provenance(&self) -> &'static str {
        self.shape.provenance()
    }

    pub fn eval(&self, u: f64) -> Complex64 {
        self.shape.eval(u)
    }

    /// ∫|c(u)|² du over the grid.
    pub fn norm(&self) -> f64 {
        let terms: Vec<f64> = self.values.iter().zip(self.grid.weights()).map(|(c, w)| c.norm_sqr() * w).collect();
        pairwise_sum(&terms, 0.0)
    }
}

pub fn gaussian_amplitude(chirp: f64, grid: MomentumGrid) -> Result<MomentumAmplitude> {
    if !chirp.is_finite() {
        return Err(Error::InvalidInput(format!("chirp must be finite, got {chirp}")));
    }
    MomentumAmplitude::build(AmplitudeShape::Gaussian { chirp }, grid)
}

pub fn modulated_amplitude(g_mag: f64, r: f64, chirp: f64, grid: MomentumGrid) -> Result<MomentumAmplitude> {
    check_modulation(g_mag, r, chirp)?;
    let row = bessel_row(2.0 * g_mag, 0)?;
    MomentumAmplitude::build(AmplitudeShape::Modulated { g_mag, r, chirp, row }, grid)
}

/// Variant with the chirp centred on each comb line; its norm is
/// Σ J_n J_m e^{−(n−m)²r²(1+C²)/2}, which is divided out.
pub fn per_comb_amplitude(g_mag: f64, r: f64, chirp: f64, grid: MomentumGrid) -> Result<MomentumAmplitude> {
    check_modulation(g_mag, r, chirp)?;
    let row = bessel_row(2.0 * g_mag, 0)?;
    let spread = r * r * (1.0 + chirp * chirp);
    let mut acc = NeumaierSum::default();
    for l in (row.order_min() - row.order_max())..=(row.order_max() - row.order_min()) {
        let weight = (-0.5 * (l * l) as f64 * spread).exp();
        if weight > 1e-18 {
            acc.add(weight * row.correlation(l));
        }
    }
    let scale = 1.0 / acc.sum().sqrt();
    MomentumAmplitude::build(AmplitudeShape::PerComb { g_mag, r, chirp, row, scale }, grid)
}

fn check_modulation(g_mag: f64, r: f64, chirp: f64) -> Result<()> {
    if !(g_mag.is_finite() && g_mag >= 0.0) {
        return Err(Error::InvalidInput(format!("g_mag must be finite and >= 0, got {g_mag}")));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidInput(format!("r must be finite and > 0, got {r}")));
    }
    if !chirp.is_finite() {
        return Err(Error::InvalidInput(format!("chirp must be finite, got {chirp}")));
    }
    Ok(())
}

/// Recoil shifts and momentum prefactors in σ_p0 units.
#[derive(Debug, Clone, Copy)]
struct Kicks {
    shift_e: f64,
    shift_a: f64,
    sig: f64,
    rec_e: f64,
    rec_a: f64,
    qz: f64,
}

impl Kicks {
    fn new(ratios: &SmallRatios, extinction0: f64) -> Result<Self> {
        ratios.validate()?;
        let base = 2.0 * extinction0;
        if ratios.rec_over_p0 > 0.0 {
            let implied = ratios.rec_over_p0 / ratios.sig_over_p0;
            if (implied - base).abs() > 1e-9 * base.max(1e-300) {
                return Err(Error::config(
                    "small_ratios",
                    format!("rec_over_p0 / sig_over_p0 = {implied} must equal 2 * extinction0 = {base}"),
                ));
            }
        }
        let d = ratios.delta;
        Ok(Kicks {
            shift_e: base * (1.0 + d),
            shift_a: base * (1.0 - d),
            sig: ratios.sig_over_p0,
            rec_e: ratios.rec_over_p0 * (1.0 + d),
            rec_a: ratios.rec_over_p0 * (1.0 - d),
            qz: ratios.qz_over_p0,
        })
    }

    /// (p + p_rec^{(e)} − ħq_z/2)/p₀ at momentum u
    fn pre_e(&self, u: f64) -> f64 {
        1.0 + self.sig * u + self.rec_e - 0.5 * self.qz
    }

    /// (p − p_rec^{(a)} + ħq_z/2)/p₀
    fn pre_a(&self, u: f64) -> f64 {
        1.0 + self.sig * u - self.rec_a + 0.5 * self.qz
    }
}

/// Recoil-shifted overlaps ∫ pre(u) c*(u) c(u ± a) du for both branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlaps {
    pub emission: Complex64,
    pub absorption: Complex64,
}

#[allow(clippy::needless_range_loop)] // i indexes nodes, values and weights together
fn overlaps(amp: &MomentumAmplitude, kicks: &Kicks) -> Result<Overlaps> {
    let grid = &amp.grid;
    let nodes = grid.nodes();
    let terms: Result<Vec<(Complex64, Complex64)>> = (0..grid.panels())
        .into_par_iter()
        .map(|k| {
            let mut e = Complex64::new(0.0, 0.0);
            let mut a = Complex64::new(0.0, 0.0);
            for i in k * GL_ORDER..(k + 1) * GL_ORDER {
                let u = nodes[i];
                let c = amp.values[i].conj();
                let te = c * amp.eval(u + kicks.shift_e) * kicks.pre_e(u);
                let ta = c * amp.eval(u - kicks.shift_a) * kicks.pre_a(u);
                if !(te.finite() && ta.finite()) {
                    return Err(Error::NonFiniteIntegrand { node: u, detail: "first-order overlap".into() });
                }
                let w = grid.weights()[i];
                e += te * w;
                a += ta * w;
            }
            Ok((e, a))
        })
        .collect();
    let terms = terms?;
    let zero = Complex64::new(0.0, 0.0);
    let e: Vec<Complex64> = terms.iter().map(|t| t.0).collect();
    let a: Vec<Complex64> = terms.iter().map(|t| t.1).collect();
    Ok(Overlaps { emission: pairwise_sum(&e, zero), absorption: pairwise_sum(&a, zero) })
}

/// The recoil-shifted overlaps the first-order term is built from.
pub fn first_order_overlaps(amp: &MomentumAmplitude, ratios: &SmallRatios, extinction0: f64) -> Result<Overlaps> {
    overlaps(amp, &Kicks::new(ratios, extinction0)?)
}

/// Δν⁽¹⁾ = 2Υ√ν₀ Re{sinc(θ̄_e/2) e^{i(θ̄_e/2+φ₀)} I_e + sinc(θ̄_a/2) e^{−i(θ̄_a/2+φ₀)} I_a},
/// I_e = ∫pre_e c*(u) c(u+a_e) du and I_a = ∫pre_a c*(u) c(u−a_a) du.
///
/// `extinction0` fixes the recoil shift a = 2Γ₀ in σ_p0 units.
#[allow(clippy::too_many_arguments)]
pub fn first_order_quadrature(
    amp: &MomentumAmplitude,
    ratios: &SmallRatios,
    extinction0: f64,
    theta: f64,
    eps: f64,
    phi0: f64,
    ups: f64,
    nu0: f64,
) -> Result<f64> {
    let ov = first_order_overlaps(amp, ratios, extinction0)?;
    let theta_e = theta + 0.5 * eps;
    let theta_a = theta - 0.5 * eps;
    let psi_e = 0.5 * theta_e + phi0;
    let psi_a = 0.5 * theta_a + phi0;
    let e = Complex64::from_polar(specfun::sinc(0.5 * theta_e), psi_e) * ov.emission;
    let a = Complex64::from_polar(specfun::sinc(0.5 * theta_a), -psi_a) * ov.absorption;
    Ok(2.0 * ups * nu0.sqrt() * (e + a).re)
}

/// Δν⁽²⁾ = Υ²[(ν₀+1) sinc²(θ̄_e/2) ∫pre_e²|c(u+a_e)|² − ν₀ sinc²(θ̄_a/2) ∫pre_a²|c(u−a_a)|²].
///
/// The integrals are shifted back onto the amplitude's own support.
#[allow(clippy::too_many_arguments)]
pub fn second_order_quadrature(
    amp: &MomentumAmplitude,
    ratios: &SmallRatios,
    extinction0: f64,
    theta: f64,
    eps: f64,
    ups: f64,
    state: &PhotonFieldState,
) -> Result<f64> {
    let kicks = Kicks::new(ratios, extinction0)?;
    let nu0 = state.nu0();
    let grid = &amp.grid;
    let density: Vec<f64> = amp.values.iter().map(|c| c.norm_sqr()).collect();
    let nodes = grid.nodes();
    let weights = grid.weights();
    let moment = |pre: &dyn Fn(f64) -> f64| -> f64 {
        let terms: Vec<f64> = (0..nodes.len()).map(|i| pre(nodes[i]).powi(2) * density[i] * weights[i]).collect();
        pairwise_sum(&terms, 0.0)
    };
    let se = specfun::sinc(0.5 * (theta + 0.5 * eps));
    let sa = specfun::sinc(0.5 * (theta - 0.5 * eps));
    let emission = moment(&|v| kicks.pre_e(v - kicks.shift_e));
    let absorption = if nu0 == 0.0 { 0.0 } else { moment(&|v| kicks.pre_a(v + kicks.shift_a)) };
    Ok(ups * ups * ((nu0 + 1.0) * (se * se) * emission - nu0 * (sa * sa) * absorption))
}

/// |Σ_{n,m} J_n(2g) J_m(2g) e^{−(n−m)²r²/2} − 1|.
pub fn sum_rule_residual(g_mag: f64, r: f64) -> Result<f64> {
    if !(g_mag.is_finite() && g_mag >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("bad sum-rule arguments g = {g_mag}, r = {r}")));
    }
    let row = bessel_row(2.0 * g_mag, 0)?;
    let mut acc = NeumaierSum::default();
    for (n, jn) in row.iter() {
        for (m, jm) in row.iter() {
            let l = (n - m) as f64;
            acc.add(jn * jm * (-0.5 * l * l * r * r).exp());
        }
    }
    Ok((acc.sum() - 1.0).abs())
}

/// Grid density and margin controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureOptions {
    /// Lower bound on the total node count.
    pub min_nodes: usize,
    pub margin: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { min_nodes: 0, margin: DEFAULT_MARGIN }
    }
}

/// Amplitude variant to use for modulated scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChirpPlacement {
    /// One chirp phase in the absolute momentum offset.
    #[default]
    Common,
    /// Chirp centred on each comb line.
    PerComb,
}

/// Builds the amplitude a scenario calls for on an automatic grid.
pub fn scenario_amplitude(
    scenario: &DimensionlessScenario,
    options: &QuadratureOptions,
    placement: ChirpPlacement,
) -> Result<MomentumAmplitude> {
    let shift = 2.0 * scenario.extinction0 * (1.0 + scenario.small_ratios.delta);
    let chirp = scenario.chirp;
    match scenario.modulation {
        None => {
            let grid = MomentumGrid::covering(0.0, 0.0, options.margin, chirp, shift, options.min_nodes)?;
            gaussian_amplitude(chirp, grid)
        }
        Some(m) => {
            check_modulation(m.g_mag, m.r, chirp)?;
            let row = bessel_row(2.0 * m.g_mag, 0)?;
            let (lo, hi) = AmplitudeShape::Modulated { g_mag: m.g_mag, r: m.r, chirp, row }.comb_extent();
            let grid = MomentumGrid::covering(lo, hi, options.margin, chirp, shift, options.min_nodes)?;
            match placement {
                ChirpPlacement::Common => modulated_amplitude(m.g_mag, m.r, chirp, grid),
                ChirpPlacement::PerComb => per_comb_amplitude(m.g_mag, m.r, chirp, grid),
            }
        }
    }
}

/// Oracle counterpart of [`crate::emission::emit`].
///
/// Vacuum and Fock states carry no phase, so their first-order term is the
/// constant zero and is never integrated.
pub fn oracle_emit(scenario: &DimensionlessScenario, options: &QuadratureOptions) -> Result<EmissionResult> {
    let amp = scenario_amplitude(scenario, options, ChirpPlacement::Common)?;
    oracle_emit_with(scenario, &amp)
}

pub fn oracle_emit_with(scenario: &DimensionlessScenario, amp: &MomentumAmplitude) -> Result<EmissionResult> {
    let s = scenario;
    let dnu1 = match s.photon_state {
        PhotonFieldState::Coherent { nu0 } => {
            first_order_quadrature(amp, &s.small_ratios, s.extinction0, s.theta, s.eps, s.phi0, s.ups, nu0)?
        }
        PhotonFieldState::Vacuum | PhotonFieldState::Fock { .. } => 0.0,
    };
    let dnu2 = second_order_quadrature(amp, &s.small_ratios, s.extinction0, s.theta, s.eps, s.ups, &s.photon_state)?;
    Ok(EmissionResult::new(dnu1, dnu2))
}

/// Relative change of the oracle result when the panel count is doubled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RichardsonCheck {
    pub nodes: usize,
    pub dnu1_change: f64,
    pub dnu2_change: f64,
}

impl RichardsonCheck {
    pub fn max_change(&self) -> f64 {
        self.dnu1_change.max(self.dnu2_change)
    }
}

fn relative_change(a: f64, b: f64, floor: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Compares the oracle on its grid against the same bounds with twice the
/// panels. `floor` keeps the relative measure meaningful near zeros of Δν⁽¹⁾.
pub fn richardson_check(
    scenario: &DimensionlessScenario,
    options: &QuadratureOptions,
    floor: f64,
) -> Result<RichardsonCheck> {
    let coarse = scenario_amplitude(scenario, options, ChirpPlacement::Common)?;
    let fine = MomentumAmplitude::build(coarse.shape.clone(), coarse.grid.refined())?;
    let a = oracle_emit_with(scenario, &coarse)?;
    let b = oracle_emit_with(scenario, &fine)?;
    Ok(RichardsonCheck {
        nodes: coarse.grid.len(),
        dnu1_change: relative_change(a.dnu1, b.dnu1, floor),
        dnu2_change: relative_change(a.dnu2, b.dnu2, floor),
    })
}
