//! emit, sweep, fig3, fig4 and table1.

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{OutputFormat, ResolvedScenario, ScenarioConfig, SweepAxis, SweepSpec};
use super::output::{format_float, Cell, Table};
use crate::emission::{
    self, bunching_b_ea, bunching_spectrum, einstein_ratio, optimal_drift_chirp, signal_to_noise, spontaneous,
    EmissionResult, PhotonFieldState,
};
use crate::error::{Error, Result};
use crate::kinematics::{derive_scenario, DimensionlessScenario, ModulationParams, SmallRatios};
use crate::oracle::{oracle_emit, QuadratureOptions};

/// Lorentz factor of a 200 keV electron, used when a dimensionless scenario
/// needs recoil ratios and none are given.
pub const DEFAULT_LORENTZ_GAMMA: f64 = 1.391_390_2;

/// Envelope width ω_b σ_t(t_D) used by `fig4`.
pub const FIG4_ENVELOPE_SIGMA: f64 = 4.0;

/// Largest chirp searched when locating the optimal drift.
pub const FIG4_CHIRP_SEARCH: f64 = 2.0;

/// Baseline coherent scenario for the figure and table commands.
pub fn default_scenario() -> DimensionlessScenario {
    DimensionlessScenario {
        ups: 0.05,
        theta: 0.0,
        eps: 0.0,
        phi0: 0.0,
        extinction0: 1.0,
        chirp: 0.0,
        photon_state: PhotonFieldState::Coherent { nu0: 1.0 },
        modulation: None,
        small_ratios: SmallRatios::default(),
    }
}

/// Copy of `s` with Γ₀ replaced, keeping p_rec/σ_p0 = 2Γ₀ when recoil ratios are set.
pub fn with_extinction0(s: &DimensionlessScenario, extinction0: f64) -> DimensionlessScenario {
    let mut out = s.clone();
    out.extinction0 = extinction0;
    let r = &mut out.small_ratios;
    if r.rec_over_p0 > 0.0 {
        let rec = 2.0 * extinction0 * r.sig_over_p0;
        r.delta *= rec / r.rec_over_p0;
        r.rec_over_p0 = rec;
    }
    out
}

/// Copy of `s` with total extinction Γ, routed through w for modulated scenarios.
pub fn with_extinction(s: &DimensionlessScenario, gamma: f64) -> DimensionlessScenario {
    let stretch = (1.0 + s.chirp * s.chirp).sqrt();
    match s.modulation {
        None => with_extinction0(s, gamma / stretch),
        Some(m) => with_harmonic(s, m, gamma / (m.r * stretch)),
    }
}

fn with_harmonic(s: &DimensionlessScenario, m: ModulationParams, w: f64) -> DimensionlessScenario {
    let mut out = with_extinction0(s, w * m.r);
    out.modulation = Some(ModulationParams { w, ..m });
    out
}

/// Key/value block describing one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitReport {
    pub result: EmissionResult,
    pub fields: Vec<(String, Value)>,
}

impl EmitReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            let shown = match v {
                Value::Number(n) => n.as_f64().map(format_float).unwrap_or_else(|| n.to_string()),
                Value::String(s) => s.clone(),
                Value::Null => "n/a".into(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k:<18} {shown}\n"));
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let map: serde_json::Map<String, Value> = self.fields.iter().cloned().collect();
                let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("report serializes");
                s.push('\n');
                s
            }
            OutputFormat::Csv => {
                let mut t = Table::new(&["quantity", "value"]);
                for (k, v) in &self.fields {
                    let cell = match v {
                        Value::Number(n) => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
                        Value::String(s) => Cell::Text(s.clone()),
                        Value::Null => Cell::Text("n/a".into()),
                        other => Cell::Text(other.to_string()),
                    };
                    t.push(vec![Cell::Text(k.clone()), cell]);
                }
                t.to_csv()
            }
        }
    }
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

pub fn run_emit(resolved: &ResolvedScenario) -> Result<EmitReport> {
    let s = resolved.scenario();
    let result = emission::emit(s)?;
    let sp = spontaneous(s.ups, s.theta);
    let mut fields: Vec<(String, Value)> = vec![
        ("photon_state".into(), json!(s.photon_state.label())),
        ("nu0".into(), num(s.nu0())),
        ("wavepacket".into(), json!(if s.modulation.is_some() { "modulated" } else { "gaussian" })),
        ("Upsilon".into(), num(s.ups)),
        ("theta".into(), num(s.theta)),
        ("eps".into(), num(s.eps)),
        ("phi0".into(), num(s.phi0)),
        ("Gamma0".into(), num(s.extinction0)),
        ("chirp".into(), num(s.chirp)),
        ("Gamma".into(), num(s.extinction())),
    ];
    if let Some(m) = s.modulation {
        fields.push(("g_mag".into(), num(m.g_mag)));
        fields.push(("r".into(), num(m.r)));
        fields.push(("w".into(), num(m.w)));
        fields.push(("Gamma_b".into(), num(s.envelope_sigma().unwrap_or(f64::NAN))));
    }
    fields.push(("dnu1".into(), num(result.dnu1)));
    fields.push(("dnu2".into(), num(result.dnu2)));
    fields.push(("total".into(), num(result.total)));
    fields.push(("spontaneous".into(), num(sp)));
    let einstein = if s.photon_state.is_coherent() { einstein_ratio(result.dnu1, sp).ok() } else { None };
    fields.push(("einstein_ratio".into(), einstein.map(num).unwrap_or(Value::Null)));
    fields.push(("signal_to_noise".into(), signal_to_noise(s.nu0(), s.ups).ok().map(num).unwrap_or(Value::Null)));
    if let Some(d) = resolved.derivation() {
        let drift = d.beam.t_drift * d.beam.v0;
        fields.push(("v0_m_per_s".into(), num(d.beam.v0)));
        fields.push(("drift_length_m".into(), num(drift)));
        fields.push(("z_G_m".into(), num(d.beam.z_g)));
        fields.push(("drift_over_z_G".into(), num(drift / d.beam.z_g)));
        let warnings: Vec<String> = d.warnings.iter().map(|w| w.to_string()).collect();
        fields.push(("warnings".into(), json!(warnings)));
    }
    Ok(EmitReport { result, fields })
}

fn sweep_point(resolved: &ResolvedScenario, axis: SweepAxis, x: f64) -> Result<DimensionlessScenario> {
    let base = resolved.scenario();
    Ok(match axis {
        SweepAxis::Gamma => with_extinction(base, x),
        SweepAxis::Theta => DimensionlessScenario { theta: x, ..base.clone() },
        SweepAxis::Phi0 => DimensionlessScenario { phi0: x, ..base.clone() },
        SweepAxis::W => {
            let m =
                base.modulation.ok_or_else(|| Error::config("sweep.axis", "axis 'w' requires a modulated scenario"))?;
            with_harmonic(base, m, x)
        }
        SweepAxis::DriftTime => match resolved {
            ResolvedScenario::Physical { setup, derivation, .. } => {
                let mut setup = setup.clone();
                setup.drift_length = x * derivation.beam.v0;
                derive_scenario(&setup)?.scenario
            }
            ResolvedScenario::Dimensionless(_) => {
                return Err(Error::config("sweep.axis", "axis 't_D' requires a physical scenario"))
            }
        },
    })
}

pub fn run_sweep(config: &ScenarioConfig) -> Result<Table> {
    let resolved = config.resolve()?;
    let sweep = config.sweep.ok_or_else(|| Error::config("sweep", "the sweep subcommand needs a 'sweep' block"))?;
    if sweep.axis == SweepAxis::W && resolved.scenario().modulation.is_none() {
        return Err(Error::config("sweep.axis", "axis 'w' requires a modulated scenario"));
    }
    if sweep.axis == SweepAxis::DriftTime && resolved.derivation().is_none() {
        return Err(Error::config("sweep.axis", "axis 't_D' requires a physical scenario"));
    }
    let points = sweep.points();
    let rows: Result<Vec<Vec<Cell>>> = points
        .par_iter()
        .map(|&x| {
            let s = sweep_point(&resolved, sweep.axis, x)?;
            let r = emission::emit(&s)?;
            Ok(vec![
                x.into(),
                s.extinction().into(),
                r.dnu1.into(),
                r.dnu2.into(),
                r.total.into(),
                spontaneous(s.ups, s.theta_e()).into(),
            ])
        })
        .collect();
    let mut t = Table::new(&[sweep.axis.name(), "Gamma", "dnu1", "dnu2", "total", "spontaneous"]);
    t.meta("command", "sweep");
    t.meta("scenario", serde_json::to_string(resolved.scenario())?);
    t.meta("sweep", serde_json::to_string(&sweep)?);
    for row in rows? {
        t.push(row);
    }
    Ok(t)
}

fn base_for_figures(config: Option<&ScenarioConfig>) -> Result<DimensionlessScenario> {
    match config {
        None => Ok(default_scenario()),
        Some(c) => Ok(c.resolve()?.scenario().clone()),
    }
}

/// First-order increment against Γ, normalized to its Γ = 0 value.
pub fn run_fig3(config: Option<&ScenarioConfig>) -> Result<Table> {
    let base = base_for_figures(config)?;
    if !base.photon_state.is_coherent() {
        return Err(Error::config("photon_state", "fig3 needs a coherent state"));
    }
    if base.modulation.is_some() {
        return Err(Error::config("modulation", "fig3 is defined for unmodulated wavepackets"));
    }
    let sweep = match config.and_then(|c| c.sweep) {
        Some(s) if s.axis != SweepAxis::Gamma => {
            return Err(Error::config("sweep.axis", "fig3 sweeps Gamma"));
        }
        Some(s) => s,
        None => SweepSpec { axis: SweepAxis::Gamma, start: 0.0, stop: 4.0, steps: 201 },
    };
    let reference = emission::emit(&with_extinction(&base, 0.0))?.dnu1;
    if reference == 0.0 {
        return Err(Error::config("phi0", "first-order term vanishes at Gamma = 0; nothing to normalize by"));
    }
    let rows: Vec<Result<Vec<Cell>>> = sweep
        .points()
        .par_iter()
        .map(|&g| {
            let dnu1 = emission::emit(&with_extinction(&base, g))?.dnu1;
            Ok(vec![g.into(), dnu1.into(), (dnu1 / reference).into(), emission::extinction_factor(g).into()])
        })
        .collect();
    let mut t = Table::new(&["Gamma", "dnu1", "normalized", "exp_minus_half_Gamma_sq"]);
    t.meta("command", "fig3");
    t.meta("scenario", serde_json::to_string(&base)?);
    for row in rows {
        t.push(row?);
    }
    Ok(t)
}

/// Parameters `fig4` resolved to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig4Setup {
    pub g_mag: f64,
    pub chirp: f64,
    pub r: f64,
    pub envelope_sigma: f64,
}

pub fn fig4_setup(config: Option<&ScenarioConfig>) -> Result<Fig4Setup> {
    let g_mag = match config {
        Some(c) => c.resolve()?.scenario().modulation.map(|m| m.g_mag).unwrap_or(1.0),
        None => 1.0,
    };
    let chirp = optimal_drift_chirp(g_mag, FIG4_ENVELOPE_SIGMA, 2, FIG4_CHIRP_SEARCH)?;
    let r = FIG4_ENVELOPE_SIGMA / (1.0 + chirp * chirp).sqrt();
    Ok(Fig4Setup { g_mag, chirp, r, envelope_sigma: FIG4_ENVELOPE_SIGMA })
}

/// Bunching spectrum B(w) at Γ_b = 4, without drift and at the drift that
/// maximizes |B_2|.
pub fn run_fig4(config: Option<&ScenarioConfig>) -> Result<Table> {
    let setup = fig4_setup(config)?;
    let sweep = match config.and_then(|c| c.sweep) {
        Some(s) if s.axis != SweepAxis::W => return Err(Error::config("sweep.axis", "fig4 sweeps w")),
        Some(s) => s,
        None => SweepSpec { axis: SweepAxis::W, start: 0.0, stop: 8.0, steps: 801 },
    };
    let grid = sweep.points();
    let no_drift = bunching_spectrum(setup.g_mag, setup.envelope_sigma, 0.0, &grid)?;
    let drifted = bunching_spectrum(setup.g_mag, setup.r, setup.chirp, &grid)?;
    let overlaps: Result<Vec<f64>> =
        grid.par_iter().map(|&w| Ok(bunching_b_ea(setup.g_mag, setup.r, setup.chirp, w)?.emission.re)).collect();
    let overlaps = overlaps?;

    let mut t = Table::new(&["w", "B_no_drift", "B_optimal_drift", "Re_B_e"]);
    t.meta("command", "fig4");
    t.meta("g_mag", format_float(setup.g_mag));
    t.meta("chirp", format_float(setup.chirp));
    t.meta("r", format_float(setup.r));
    t.meta("Gamma_b", format_float(setup.envelope_sigma));
    let harmonics: Vec<String> = (0..=8).map(|l| format!("B_{l}={}", format_float(drifted.harmonic(l)))).collect();
    t.meta("harmonics", harmonics.join(" "));
    for (i, &w) in grid.iter().enumerate() {
        t.push(vec![w.into(), no_drift.values[i].into(), drifted.values[i].into(), overlaps[i].into()]);
    }
    Ok(t)
}

/// Closed forms and oracle side by side for each photon state.
pub fn run_table1(config: Option<&ScenarioConfig>, options: &QuadratureOptions) -> Result<Table> {
    let base = match config {
        Some(c) => c.resolve()?.scenario().clone(),
        None => {
            let mut s = default_scenario();
            s.theta = 0.3;
            s.eps = 0.01;
            s.phi0 = 0.2;
            s.extinction0 = 0.5;
            s.chirp = 1.0;
            s.photon_state = PhotonFieldState::Coherent { nu0: 4.0 };
            s.small_ratios = SmallRatios::from_scale(1e-8, 0.5, DEFAULT_LORENTZ_GAMMA);
            s
        }
    };
    let nu0 = base.nu0();
    let gaussian = DimensionlessScenario { modulation: None, ..base.clone() };
    let modulated = match base.modulation {
        Some(_) => base.clone(),
        None => {
            let r = 0.25;
            let m = ModulationParams { g_mag: 1.0, r, w: base.extinction0 / r };
            DimensionlessScenario { modulation: Some(m), ..base.clone() }
        }
    };
    let cases: Vec<(&str, DimensionlessScenario)> = vec![
        ("vacuum", DimensionlessScenario { photon_state: PhotonFieldState::Vacuum, ..gaussian.clone() }),
        (
            "fock",
            DimensionlessScenario {
                photon_state: PhotonFieldState::Fock { nu0: nu0.round() as u64 },
                ..gaussian.clone()
            },
        ),
        ("coherent_gaussian", DimensionlessScenario { photon_state: PhotonFieldState::Coherent { nu0 }, ..gaussian }),
        ("coherent_modulated", DimensionlessScenario { photon_state: PhotonFieldState::Coherent { nu0 }, ..modulated }),
    ];
    let mut t = Table::new(&["case", "nu0", "dnu1", "dnu2", "total", "dnu1_oracle", "dnu2_oracle"]);
    t.meta("command", "table1");
    t.meta("scenario", serde_json::to_string(&base)?);
    t.meta("min_nodes", options.min_nodes);
    for (name, s) in cases {
        let closed = emission::emit(&s)?;
        let oracle = oracle_emit(&s, options)?;
        t.push(vec![
            name.into(),
            s.nu0().into(),
            closed.dnu1.into(),
            closed.dnu2.into(),
            closed.total.into(),
            oracle.dnu1.into(),
            oracle.dnu2.into(),
        ]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig3_normalized_column() {
        let t = run_fig3(None).unwrap();
        let g = t.column("Gamma").unwrap();
        let n = t.column("normalized").unwrap();
        assert_eq!(g.len(), 201);
        let i = g.iter().position(|&x| x == 2.0).unwrap();
        assert!((n[i] - 0.135335).abs() < 1e-6);
    }

    #[test]
    fn fig4_zero_modulation_is_gaussian() {
        let c = ScenarioConfig::from_json(
            r#"{"dimensionless": {"ups": 0.05, "theta": 0, "extinction0": 0.5, "chirp": 0.0,
                "photon_state": {"kind": "coherent", "nu0": 1},
                "modulation": {"g_mag": 0.0, "r": 0.25, "w": 2.0}}}"#,
        )
        .unwrap();
        let t = run_fig4(Some(&c)).unwrap();
        let w = t.column("w").unwrap();
        let b = t.column("B_optimal_drift").unwrap();
        for (w, b) in w.iter().zip(&b) {
            let expect = emission::extinction_factor(w * FIG4_ENVELOPE_SIGMA);
            assert!((b - expect).abs() <= 1e-15, "w={w}: {b} vs {expect}");
        }
    }

    #[test]
    fn fig4_spot_matches_overlap() {
        let t = run_fig4(None).unwrap();
        let w = t.column("w").unwrap();
        let b = t.column("B_optimal_drift").unwrap();
        let e = t.column("Re_B_e").unwrap();
        let i = w.iter().position(|&x| x == 2.0).unwrap();
        assert!((b[i] - e[i]).abs() <= 1e-6 * b[i].abs());
    }

    #[test]
    fn gamma_sweep_routes_through_harmonic() {
        let mut s = default_scenario();
        s.chirp = 2.0;
        s.modulation = Some(ModulationParams { g_mag: 1.0, r: 0.5, w: 2.0 });
        s.extinction0 = 1.0;
        let out = with_extinction(&s, 3.0);
        assert!((out.extinction() - 3.0).abs() < 1e-14);
        assert!(out.validate().is_ok());
    }

    #[test]
    fn table1_phaseless_rows_are_zero() {
        let t = run_table1(None, &QuadratureOptions::default()).unwrap();
        for row in &t.rows[..2] {
            assert_eq!(row[2], Cell::Num(0.0));
            assert_eq!(row[5], Cell::Num(0.0));
        }
    }
}
