//! Scenario configuration: a plain-text `key = value [unit]` format with
//! explicit unit suffixes, defaults for every parameter, a canonical
//! serialization, and a provenance hash over that canonical form.
//!
//! Dimensioned keys require a unit (`d = 8 m`, `tau_f = 100 us`); bare
//! numbers are rejected for them. Dimensionless keys reject units.
//! Comments start with `#`, blank lines are ignored, duplicate or unknown
//! keys are errors that name the line.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};

use rbcom::link_budget::Detector;
use rbcom::power_chain::{GainMedium, LossBudget, PumpEfficiency, ShgCrystal};
use rbcom::{OfdmConfig64, ResonatorGeometry64, SystemSpec64};

/// Which cavity length parameter the scenario pins: the retroreflector
/// focal length `f_RR` (lens gap derived) or the gap `l` itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    RetroFocal(f64),
    LensGap(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Distance,
    RetroFocalLength,
    FocalLength,
    OutputReflectivity,
    PumpPower,
}

impl SweepVariable {
    pub fn key(self) -> &'static str {
        match self {
            Self::Distance => "d",
            Self::RetroFocalLength => "f_rr",
            Self::FocalLength => "f",
            Self::OutputReflectivity => "r4",
            Self::PumpPower => "p_in",
        }
    }

    /// Canonical unit suffix for this variable's values ("" = pure number).
    pub fn unit(self) -> &'static str {
        match self {
            Self::Distance | Self::RetroFocalLength | Self::FocalLength => "m",
            Self::OutputReflectivity => "",
            Self::PumpPower => "W",
        }
    }

    fn dimension(self) -> Dimension {
        match self {
            Self::Distance | Self::RetroFocalLength | Self::FocalLength => Dimension::Length,
            Self::OutputReflectivity => Dimension::Pure,
            Self::PumpPower => Dimension::Power,
        }
    }

    fn parse(token: &str) -> Option<Self> {
        match token.to_ascii_lowercase().as_str() {
            "d" => Some(Self::Distance),
            "f_rr" => Some(Self::RetroFocalLength),
            "f" => Some(Self::FocalLength),
            "r4" => Some(Self::OutputReflectivity),
            "p_in" => Some(Self::PumpPower),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    /// The inclusive, uniformly spaced grid (`steps` points).
    pub fn values(&self) -> Vec<f64> {
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + h * i as f64
                }
            })
            .collect()
    }
}

/// A fully resolved simulation scenario (SI units throughout).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub focal_length: f64,
    pub spacing: Spacing,
    pub distance: f64,
    pub wavelength: f64,
    pub aperture_radius: f64,
    pub cross_section: f64,
    pub upper_state_lifetime: f64,
    pub gain_length: f64,
    pub gain_volume: Option<f64>,
    pub eta_excitation: f64,
    pub eta_transfer: f64,
    pub eta_absorption: f64,
    pub eta_quantum: f64,
    pub eta_stokes: f64,
    pub eta_overlap: f64,
    pub retro1_survival: f64,
    pub retro2_survival: f64,
    pub gain_survival: f64,
    pub output_reflectivity: f64,
    pub device_efficiency: f64,
    pub effective_nonlinearity: f64,
    pub refractive_index: f64,
    pub crystal_length: f64,
    pub responsivity: f64,
    pub bandwidth: f64,
    pub temperature: f64,
    pub load_resistance: f64,
    pub background_current: f64,
    pub pump_power: f64,
    pub qam_order: u32,
    pub n_subcarriers: usize,
    pub fft_len: usize,
    pub cp_len: usize,
    pub clip_ratio: f64,
    pub dc_bias: Option<f64>,
    pub sweep: Option<SweepSpec>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            focal_length: 0.03,
            spacing: Spacing::RetroFocal(3.0),
            distance: 5.0,
            wavelength: 1064e-9,
            aperture_radius: 3e-3,
            cross_section: 15.6e-23,
            upper_state_lifetime: 100e-6,
            gain_length: 1e-3,
            gain_volume: None,
            eta_excitation: 0.75,
            eta_transfer: 0.99,
            eta_absorption: 0.91,
            eta_quantum: 0.95,
            eta_stokes: 0.76,
            eta_overlap: 0.90,
            retro1_survival: 1.0,
            retro2_survival: 1.0,
            gain_survival: 1.0,
            output_reflectivity: 0.02,
            device_efficiency: 1.0,
            effective_nonlinearity: 4.7e-12,
            refractive_index: 2.23,
            crystal_length: 2e-3,
            responsivity: 0.6,
            bandwidth: 800e6,
            temperature: 295.0,
            load_resistance: 10e3,
            background_current: 5100e-6,
            pump_power: 100.0,
            qam_order: 16384,
            n_subcarriers: 800,
            fft_len: 1024,
            cp_len: 176,
            clip_ratio: 4.0,
            dc_bias: None,
            sweep: None,
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Syntax { line: usize, message: String },
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(m) => write!(f, "{m}"),
            Self::Syntax { line, message } => write!(f, "line {line}: {message}"),
            Self::Invalid(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn syntax(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    Length,
    Area,
    Volume,
    Time,
    FieldCoefficient,
    Responsivity,
    Frequency,
    Temperature,
    Resistance,
    Current,
    Power,
    Pure,
}

impl Dimension {
    /// `(unit token, factor to SI)` pairs, lowercase.
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Self::Length => &[
                ("nm", 1e-9),
                ("um", 1e-6),
                ("mm", 1e-3),
                ("cm", 1e-2),
                ("m", 1.0),
                ("km", 1e3),
            ],
            Self::Area => &[("mm2", 1e-6), ("cm2", 1e-4), ("m2", 1.0)],
            Self::Volume => &[("mm3", 1e-9), ("cm3", 1e-6), ("m3", 1.0)],
            Self::Time => &[("ns", 1e-9), ("us", 1e-6), ("ms", 1e-3), ("s", 1.0)],
            Self::FieldCoefficient => &[("pm/v", 1e-12), ("m/v", 1.0)],
            Self::Responsivity => &[("a/w", 1.0)],
            Self::Frequency => &[("hz", 1.0), ("khz", 1e3), ("mhz", 1e6), ("ghz", 1e9)],
            Self::Temperature => &[("k", 1.0)],
            Self::Resistance => &[("ohm", 1.0), ("kohm", 1e3)],
            Self::Current => &[("ua", 1e-6), ("ma", 1e-3), ("a", 1.0)],
            Self::Power => &[("mw", 1e-3), ("w", 1.0), ("kw", 1e3)],
            Self::Pure => &[],
        }
    }

    fn unit_list(self) -> String {
        self.units()
            .iter()
            .map(|(u, _)| *u)
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn parse_number(token: &str, key: &str, line: usize) -> Result<f64, ConfigError> {
    let v: f64 = token
        .parse()
        .map_err(|_| syntax(line, format!("{key}: cannot parse '{token}' as a number")))?;
    if !v.is_finite() {
        return Err(syntax(line, format!("{key}: value must be finite")));
    }
    Ok(v)
}

/// Parses `value unit` for a dimensioned key (unit mandatory) or a bare
/// `value` for a pure one (unit forbidden), returning the SI value.
fn parse_quantity(rest: &str, dim: Dimension, key: &str, line: usize) -> Result<f64, ConfigError> {
    let tokens: Vec<&str> = rest.split_whitespace().collect();
    match dim {
        Dimension::Pure => {
            if tokens.len() != 1 {
                return Err(syntax(
                    line,
                    format!("{key} is dimensionless and takes a single bare number"),
                ));
            }
            parse_number(tokens[0], key, line)
        }
        _ => {
            if tokens.len() == 1 {
                return Err(syntax(
                    line,
                    format!("{key}: missing unit (accepted: {})", dim.unit_list()),
                ));
            }
            if tokens.len() != 2 {
                return Err(syntax(line, format!("{key}: expected 'value unit'")));
            }
            let v = parse_number(tokens[0], key, line)?;
            let unit = tokens[1].to_ascii_lowercase();
            let factor = dim
                .units()
                .iter()
                .find(|(u, _)| *u == unit)
                .map(|(_, f)| *f)
                .ok_or_else(|| {
                    syntax(
                        line,
                        format!(
                            "{key}: unknown unit '{}' (accepted: {})",
                            tokens[1],
                            dim.unit_list()
                        ),
                    )
                })?;
            Ok(v * factor)
        }
    }
}

fn parse_integer(rest: &str, key: &str, line: usize) -> Result<u64, ConfigError> {
    let tokens: Vec<&str> = rest.split_whitespace().collect();
    if tokens.len() != 1 {
        return Err(syntax(line, format!("{key} takes a single bare integer")));
    }
    tokens[0].parse().map_err(|_| {
        syntax(
            line,
            format!("{key}: cannot parse '{}' as an integer", tokens[0]),
        )
    })
}

fn check_range(
    value: f64,
    key: &str,
    line: usize,
    ok: bool,
    constraint: &str,
) -> Result<f64, ConfigError> {
    if ok {
        Ok(value)
    } else {
        Err(syntax(
            line,
            format!("{key} = {value} is out of range: must be {constraint}"),
        ))
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        // Phase 1: split into (key, rest, line) entries, catching duplicate
        // and unknown keys with their line numbers.
        let mut entries: Vec<(String, String, usize)> = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line
                .split_once('=')
                .ok_or_else(|| syntax(line_no, format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim().to_ascii_lowercase();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(syntax(line_no, format!("unknown key '{key}'")));
            }
            if let Some(first) = seen.insert(key.clone(), line_no) {
                return Err(syntax(
                    line_no,
                    format!("duplicate key '{key}' (already set on line {first})"),
                ));
            }
            entries.push((key, rest.trim().to_string(), line_no));
        }

        // Phase 2: apply over defaults. Sweep bounds are resolved last, once
        // the swept variable (hence its dimension) is known.
        let mut s = Scenario::default();
        let mut saw_l: Option<usize> = None;
        let mut saw_f_rr: Option<usize> = None;
        let mut sweep_variable: Option<(SweepVariable, usize)> = None;
        let mut sweep_start: Option<(String, usize)> = None;
        let mut sweep_stop: Option<(String, usize)> = None;
        let mut sweep_steps: Option<(usize, usize)> = None;

        for (key, rest, ln) in &entries {
            let ln = *ln;
            let rest = rest.as_str();
            match key.as_str() {
                "f" => {
                    let v = parse_quantity(rest, Dimension::Length, key, ln)?;
                    s.focal_length = check_range(v, key, ln, v > 0.0, "positive")?;
                }
                "f_rr" => {
                    let v = parse_quantity(rest, Dimension::Length, key, ln)?;
                    s.spacing = Spacing::RetroFocal(check_range(v, key, ln, v > 0.0, "positive")?);
                    saw_f_rr = Some(ln);
                }
                "l" => {
                    let v = parse_quantity(rest, Dimension::Length, key, ln)?;
                    s.spacing = Spacing::LensGap(check_range(v, key, ln, v > 0.0, "positive")?);
                    saw_l = Some(ln);
                }
                "d" => {
                    let v = parse_quantity(rest, Dimension::Length, key, ln)?;
                    s.distance = check_range(v, key, ln, v >= 0.0, "non-negative")?;
                }
                "lambda" => {
                    let v = parse_quantity(rest, Dimension::Length, key, ln)?;
                    s.wavelength = check_range(v, key, ln, v > 0.0, "positive")?;
                }
                "a_g" => {
                    let v = parse_quantity(rest, Dimension::Length, key, ln)?;
                    s.aperture_radius = check_range(v, key, ln, v > 0.0, "positive")?;
                }
                "sigma_s" => {
                    let v = parse_quantity(rest, Dimension::Area, key, ln)?;
                    s.cross_section = check_range(v, key, ln, v > 0.0, "positive")?;
                }
                "tau_f" => {
                    let v = parse_quantity(rest, Dimension::Time, key, ln)?;
                    s.upper_state_lifetime = check_range(v, key, ln, v > 0.0, "positive")?;
                }
                "l_g" => {
                    let v = parse_quantity(rest, Dimension::Length, key, ln)?;
                    s.gain_length = check_range(v, key, ln, v > 0.0, "positive")?;
                }
                "gain_volume" => {
                    let v = parse_quantity(rest, Dimension::Volume, key, ln)?;
                    s.gain_volume = Some(check_range(v, key, ln, v > 0.0, "positive")?);
                }
                "eta_p" | "eta_t" | "eta_a" | "eta_q" | "eta_s" | "eta_b" => {
                    let v = parse_quantity(rest, Dimension::Pure, key, ln)?;
                    let v = check_range(v, key, ln, v > 0.0 && v <= 1.0, "in (0, 1]")?;
                    match key.as_str() {
                        "eta_p" => s.eta_excitation = v,
                        "eta_t" => s.eta_transfer = v,
                        "eta_a" => s.eta_absorption = v,
                        "eta_q" => s.eta_quantum = v,
                        "eta_s" => s.eta_stokes = v,
                        _ => s.eta_overlap = v,
                    }
                }
                "gamma_rr1" | "gamma_rr2" | "gamma_g" => {
                    let v = parse_quantity(rest, Dimension::Pure, key, ln)?;
                    let v = check_range(v, key, ln, v > 0.0 && v <= 1.0, "in (0, 1]")?;
                    match key.as_str() {
                        "gamma_rr1" => s.retro1_survival = v,
                        "gamma_rr2" => s.retro2_survival = v,
                        _ => s.gain_survival = v,
                    }
                }
                "r4" => {
                    let v = parse_quantity(rest, Dimension::Pure, key, ln)?;
                    s.output_reflectivity =
                        check_range(v, key, ln, (0.0..1.0).contains(&v), "in [0, 1)")?;
                }
                "eta_dev" => {
                    let v = parse_quantity(rest, Dimension::Pure, key, ln)?;
                    s.device_efficiency =
                        check_range(v, key, ln, v > 0.0 && v <= 1.0, "in (0, 1]")?;
                }
                "d_eff" => {
                    let v = parse_quantity(rest, Dimension::FieldCoefficient, key, ln)?;
                    s.effective_nonlinearity = check_range(v, key, ln, v > 0.0, "positive")?;
                }
                "n0" => {
                    let v = parse_quantity(rest, Dimension::Pure, key, ln)?;
                    s.refractive_index = check_range(v, key, ln, v >= 1.0, "at least 1")?;
                }
                "l_s" => {
                    let v = parse_quantity(rest, Dimension::Length, key, ln)?;
                    s.crystal_length = check_range(v, key, ln, v > 0.0, "positive")?;
                }
                "responsivity" => {
                    let v = parse_quantity(rest, Dimension::Responsivity, key, ln)?;
                    s.responsivity = check_range(v, key, ln, v > 0.0, "positive")?;
                }
                "bandwidth" => {
                    let v = parse_quantity(rest, Dimension::Frequency, key, ln)?;
                    s.bandwidth = check_range(v, key, ln, v > 0.0, "positive")?;
                }
                "temperature" => {
                    let v = parse_quantity(rest, Dimension::Temperature, key, ln)?;
                    s.temperature = check_range(v, key, ln, v > 0.0, "positive")?;
                }
                "r_load" => {
                    let v = parse_quantity(rest, Dimension::Resistance, key, ln)?;
                    s.load_resistance = check_range(v, key, ln, v > 0.0, "positive")?;
                }
                "i_bk" => {
                    let v = parse_quantity(rest, Dimension::Current, key, ln)?;
                    s.background_current = check_range(v, key, ln, v >= 0.0, "non-negative")?;
                }
                "p_in" => {
                    let v = parse_quantity(rest, Dimension::Power, key, ln)?;
                    s.pump_power = check_range(v, key, ln, v >= 0.0, "non-negative")?;
                }
                "qam_order" => {
                    let v = parse_integer(rest, key, ln)?;
                    let ok = v >= 4 && v <= u32::MAX as u64 && {
                        let v = v as u32;
                        v.is_power_of_two() && v.trailing_zeros().is_multiple_of(2)
                    };
                    if !ok {
                        return Err(syntax(
                            ln,
                            format!("{key} = {v} must be a power of 4 (4, 16, 64, …)"),
                        ));
                    }
                    s.qam_order = v as u32;
                }
                "n_subcarriers" => {
                    let v = parse_integer(rest, key, ln)? as usize;
                    if v < 2 || !v.is_multiple_of(2) {
                        return Err(syntax(ln, format!("{key} = {v} must be even and ≥ 2")));
                    }
                    s.n_subcarriers = v;
                }
                "fft_len" => {
                    let v = parse_integer(rest, key, ln)? as usize;
                    if v < 4 {
                        return Err(syntax(ln, format!("{key} = {v} must be at least 4")));
                    }
                    s.fft_len = v;
                }
                "cp_len" => {
                    s.cp_len = parse_integer(rest, key, ln)? as usize;
                }
                "clip_ratio" => {
                    let v = parse_quantity(rest, Dimension::Pure, key, ln)?;
                    s.clip_ratio = check_range(v, key, ln, v >= 0.0, "non-negative")?;
                }
                "dc_bias" => {
                    let v = parse_quantity(rest, Dimension::Pure, key, ln)?;
                    s.dc_bias = Some(check_range(v, key, ln, v >= 0.0, "non-negative")?);
                }
                "sweep_variable" => {
                    let tokens: Vec<&str> = rest.split_whitespace().collect();
                    let var = tokens
                        .first()
                        .filter(|_| tokens.len() == 1)
                        .and_then(|t| SweepVariable::parse(t))
                        .ok_or_else(|| {
                            syntax(
                                ln,
                                format!(
                                    "{key}: expected one of d, f_rr, f, r4, p_in; got '{rest}'"
                                ),
                            )
                        })?;
                    sweep_variable = Some((var, ln));
                }
                "sweep_start" => sweep_start = Some((rest.to_string(), ln)),
                "sweep_stop" => sweep_stop = Some((rest.to_string(), ln)),
                "sweep_steps" => {
                    let v = parse_integer(rest, key, ln)? as usize;
                    if v < 2 {
                        return Err(syntax(ln, format!("{key} = {v} must be at least 2")));
                    }
                    sweep_steps = Some((v, ln));
                }
                _ => unreachable!("key list is closed"),
            }
        }

        if let (Some(l_ln), Some(f_ln)) = (saw_l, saw_f_rr) {
            return Err(ConfigError::Invalid(format!(
                "both l (line {l_ln}) and f_rr (line {f_ln}) are set; give exactly one"
            )));
        }
        if s.n_subcarriers > s.fft_len - 2 {
            return Err(ConfigError::Invalid(format!(
                "n_subcarriers = {} exceeds fft_len − 2 = {}",
                s.n_subcarriers,
                s.fft_len - 2
            )));
        }
        if s.cp_len >= s.fft_len {
            return Err(ConfigError::Invalid(format!(
                "cp_len = {} must be shorter than fft_len = {}",
                s.cp_len, s.fft_len
            )));
        }

        // Sweep block: all four keys or none.
        let any_sweep = sweep_variable.is_some()
            || sweep_start.is_some()
            || sweep_stop.is_some()
            || sweep_steps.is_some();
        if any_sweep {
            let missing: Vec<&str> = [
                ("sweep_variable", sweep_variable.is_some()),
                ("sweep_start", sweep_start.is_some()),
                ("sweep_stop", sweep_stop.is_some()),
                ("sweep_steps", sweep_steps.is_some()),
            ]
            .iter()
            .filter(|(_, present)| !present)
            .map(|(k, _)| *k)
            .collect();
            if !missing.is_empty() {
                return Err(ConfigError::Invalid(format!(
                    "incomplete sweep block: missing {}",
                    missing.join(", ")
                )));
            }
            let (variable, _) = sweep_variable.unwrap();
            let (start_text, start_ln) = sweep_start.unwrap();
            let (stop_text, stop_ln) = sweep_stop.unwrap();
            let (steps, _) = sweep_steps.unwrap();
            let dim = variable.dimension();
            let start = parse_quantity(&start_text, dim, "sweep_start", start_ln)?;
            let stop = parse_quantity(&stop_text, dim, "sweep_stop", stop_ln)?;
            if start.is_nan() || stop.is_nan() || start >= stop {
                return Err(ConfigError::Invalid(format!(
                    "sweep_start = {start} must be below sweep_stop = {stop}"
                )));
            }
            let in_range = |v: f64| match variable {
                SweepVariable::Distance | SweepVariable::PumpPower => v >= 0.0,
                SweepVariable::RetroFocalLength | SweepVariable::FocalLength => v > 0.0,
                SweepVariable::OutputReflectivity => (0.0..1.0).contains(&v),
            };
            if !in_range(start) || !in_range(stop) {
                return Err(ConfigError::Invalid(format!(
                    "sweep range [{start}, {stop}] is outside the validity of {}",
                    variable.key()
                )));
            }
            s.sweep = Some(SweepSpec {
                variable,
                start,
                stop,
                steps,
            });
        }
        Ok(s)
    }

    /// Canonical serialization: every key, fixed order, SI units. Loading
    /// this text reproduces the scenario exactly, and the provenance hash
    /// is computed over it.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("f", format!("{} m", self.focal_length));
        match self.spacing {
            Spacing::RetroFocal(v) => kv("f_rr", format!("{v} m")),
            Spacing::LensGap(v) => kv("l", format!("{v} m")),
        }
        kv("d", format!("{} m", self.distance));
        kv("lambda", format!("{} m", self.wavelength));
        kv("a_g", format!("{} m", self.aperture_radius));
        kv("sigma_s", format!("{} m2", self.cross_section));
        kv("tau_f", format!("{} s", self.upper_state_lifetime));
        kv("l_g", format!("{} m", self.gain_length));
        if let Some(v) = self.gain_volume {
            kv("gain_volume", format!("{v} m3"));
        }
        kv("eta_p", format!("{}", self.eta_excitation));
        kv("eta_t", format!("{}", self.eta_transfer));
        kv("eta_a", format!("{}", self.eta_absorption));
        kv("eta_q", format!("{}", self.eta_quantum));
        kv("eta_s", format!("{}", self.eta_stokes));
        kv("eta_b", format!("{}", self.eta_overlap));
        kv("gamma_rr1", format!("{}", self.retro1_survival));
        kv("gamma_rr2", format!("{}", self.retro2_survival));
        kv("gamma_g", format!("{}", self.gain_survival));
        kv("r4", format!("{}", self.output_reflectivity));
        kv("eta_dev", format!("{}", self.device_efficiency));
        kv("d_eff", format!("{} m/V", self.effective_nonlinearity));
        kv("n0", format!("{}", self.refractive_index));
        kv("l_s", format!("{} m", self.crystal_length));
        kv("responsivity", format!("{} A/W", self.responsivity));
        kv("bandwidth", format!("{} Hz", self.bandwidth));
        kv("temperature", format!("{} K", self.temperature));
        kv("r_load", format!("{} ohm", self.load_resistance));
        kv("i_bk", format!("{} A", self.background_current));
        kv("p_in", format!("{} W", self.pump_power));
        kv("qam_order", format!("{}", self.qam_order));
        kv("n_subcarriers", format!("{}", self.n_subcarriers));
        kv("fft_len", format!("{}", self.fft_len));
        kv("cp_len", format!("{}", self.cp_len));
        kv("clip_ratio", format!("{}", self.clip_ratio));
        if let Some(v) = self.dc_bias {
            kv("dc_bias", format!("{v}"));
        }
        if let Some(sw) = &self.sweep {
            kv("sweep_variable", sw.variable.key().to_string());
            let unit = sw.variable.unit();
            let fmt_bound = |v: f64| {
                if unit.is_empty() {
                    format!("{v}")
                } else {
                    format!("{v} {unit}")
                }
            };
            kv("sweep_start", fmt_bound(sw.start));
            kv("sweep_stop", fmt_bound(sw.stop));
            kv("sweep_steps", format!("{}", sw.steps));
        }
        out
    }

    /// First 16 hex characters of the SHA-256 of [`Self::canonical`].
    pub fn provenance_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn geometry(&self) -> rbcom::Result<ResonatorGeometry64> {
        match self.spacing {
            Spacing::RetroFocal(f_rr) => ResonatorGeometry64::with_retro_focal_length(
                self.focal_length,
                f_rr,
                self.distance,
                self.wavelength,
            ),
            Spacing::LensGap(l) => {
                ResonatorGeometry64::new(self.focal_length, l, self.distance, self.wavelength)
            }
        }
    }

    pub fn gain(&self) -> rbcom::Result<GainMedium<f64>> {
        let gain = GainMedium::new(
            self.cross_section,
            self.upper_state_lifetime,
            self.wavelength,
            self.aperture_radius,
            self.gain_length,
        )?;
        match self.gain_volume {
            Some(v) => gain.with_volume(v),
            None => Ok(gain),
        }
    }

    pub fn pump_efficiency(&self) -> rbcom::Result<PumpEfficiency<f64>> {
        PumpEfficiency::new(
            self.eta_excitation,
            self.eta_transfer,
            self.eta_absorption,
            self.eta_quantum,
            self.eta_stokes,
            self.eta_overlap,
        )
    }

    pub fn losses(&self) -> rbcom::Result<LossBudget<f64>> {
        LossBudget::new(
            self.retro1_survival,
            self.retro2_survival,
            self.gain_survival,
            self.output_reflectivity,
        )
    }

    pub fn crystal(&self) -> rbcom::Result<ShgCrystal<f64>> {
        ShgCrystal::new(
            self.effective_nonlinearity,
            self.refractive_index,
            self.crystal_length,
        )
    }

    pub fn detector(&self) -> rbcom::Result<Detector<f64>> {
        Detector::new(
            self.responsivity,
            self.bandwidth,
            self.temperature,
            self.load_resistance,
            self.background_current,
        )
    }

    pub fn system(&self) -> rbcom::Result<SystemSpec64> {
        SystemSpec64::new(
            self.geometry()?,
            self.gain()?,
            self.pump_efficiency()?,
            self.losses()?,
            self.crystal()?,
            self.detector()?,
            self.device_efficiency,
        )
    }

    pub fn ofdm_config(&self) -> rbcom::Result<OfdmConfig64> {
        let cfg = OfdmConfig64::new(
            self.qam_order,
            self.n_subcarriers,
            self.fft_len,
            self.cp_len,
            self.bandwidth,
        )?
        .with_clip_ratio(self.clip_ratio)?;
        match self.dc_bias {
            Some(b) => cfg.with_dc_bias(b),
            None => Ok(cfg),
        }
    }

    /// Derived-quantity banner lines: configuration hash, the resolved
    /// geometry lengths, and the pump-chain constants.
    pub fn banner(&self) -> Vec<String> {
        let mut lines = vec![format!("config {}", self.provenance_hash())];
        match self.geometry() {
            Ok(geom) => {
                let f_rr = geom
                    .retro_focal_length()
                    .map(|v| format!("{v:e} m"))
                    .unwrap_or_else(|| "none (diverging cat's eye)".into());
                lines.push(format!(
                    "geometry: f = {:e} m, lens gap l = {:e} m, f_RR = {}, d = {:e} m, lambda = {:e} m",
                    geom.focal_length(),
                    geom.lens_spacing(),
                    f_rr,
                    geom.distance(),
                    geom.wavelength(),
                ));
            }
            Err(e) => lines.push(format!("geometry: invalid ({e})")),
        }
        match (self.gain(), self.pump_efficiency()) {
            (Ok(gain), Ok(eff)) => {
                lines.push(format!(
                    "gain: a_g = {:e} m, pumped volume V = {:e} m3, eta_c = {:e}, I_s = {:e} W/m2",
                    self.aperture_radius,
                    gain.volume(),
                    eff.combined(),
                    gain.saturation_intensity(),
                ));
            }
            (Err(e), _) | (_, Err(e)) => lines.push(format!("gain: invalid ({e})")),
        }
        lines
    }
}

const KNOWN_KEYS: &[&str] = &[
    "f",
    "f_rr",
    "l",
    "d",
    "lambda",
    "a_g",
    "sigma_s",
    "tau_f",
    "l_g",
    "gain_volume",
    "eta_p",
    "eta_t",
    "eta_a",
    "eta_q",
    "eta_s",
    "eta_b",
    "gamma_rr1",
    "gamma_rr2",
    "gamma_g",
    "r4",
    "eta_dev",
    "d_eff",
    "n0",
    "l_s",
    "responsivity",
    "bandwidth",
    "temperature",
    "r_load",
    "i_bk",
    "p_in",
    "qam_order",
    "n_subcarriers",
    "fft_len",
    "cp_len",
    "clip_ratio",
    "dc_bias",
    "sweep_variable",
    "sweep_start",
    "sweep_stop",
    "sweep_steps",
];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_text_gives_pure_defaults() {
        let s = Scenario::from_text("").unwrap();
        assert_eq!(s, Scenario::default());
        assert_eq!(s.pump_power, 100.0);
        assert_eq!(s.distance, 5.0);
        assert_eq!(s.spacing, Spacing::RetroFocal(3.0));
    }

    #[test]
    fn units_convert_to_si() {
        let s = Scenario::from_text(
            "d = 8 m\nlambda = 1064 nm\na_g = 3 mm\ntau_f = 100 us\nd_eff = 4.7 pm/V\n\
             bandwidth = 0.8 GHz\np_in = 120 W\ni_bk = 5.1 mA\nr_load = 10 kohm\n",
        )
        .unwrap();
        assert_eq!(s.distance, 8.0);
        assert_relative_eq!(s.wavelength, 1.064e-6, max_relative = 1e-15);
        assert_relative_eq!(s.aperture_radius, 3e-3, max_relative = 1e-15);
        assert_relative_eq!(s.upper_state_lifetime, 1e-4, max_relative = 1e-15);
        assert_relative_eq!(s.effective_nonlinearity, 4.7e-12, max_relative = 1e-15);
        assert_relative_eq!(s.bandwidth, 8e8, max_relative = 1e-15);
        assert_eq!(s.pump_power, 120.0);
        assert_relative_eq!(s.background_current, 5.1e-3, max_relative = 1e-15);
        assert_eq!(s.load_resistance, 1e4);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let s = Scenario::from_text("# a comment\n\n  d = 2 m  # trailing\n").unwrap();
        assert_eq!(s.distance, 2.0);
    }

    #[test]
    fn errors_name_key_and_line() {
        let e = Scenario::from_text("\nbogus_key = 3\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 2") && msg.contains("bogus_key"), "{msg}");

        let e = Scenario::from_text("d = 8\n").unwrap_err();
        assert!(e.to_string().contains("missing unit"), "{e}");

        let e = Scenario::from_text("r4 = 1.5\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("r4") && msg.contains("out of range"), "{msg}");

        let e = Scenario::from_text("eta_p = 0.5 m\n").unwrap_err();
        assert!(e.to_string().contains("dimensionless"), "{e}");

        let e = Scenario::from_text("d = 1 m\nd = 2 m\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("duplicate") && msg.contains("line 2"), "{msg}");

        let e = Scenario::from_text("d = 1 parsec\n").unwrap_err();
        assert!(e.to_string().contains("unknown unit"), "{e}");

        let e = Scenario::from_text("l = 0.0303 m\nf_rr = 3 m\n").unwrap_err();
        assert!(e.to_string().contains("exactly one"), "{e}");
    }

    #[test]
    fn sweep_block_is_all_or_none() {
        let e = Scenario::from_text("sweep_variable = d\n").unwrap_err();
        assert!(e.to_string().contains("incomplete sweep block"), "{e}");

        let s = Scenario::from_text(
            "sweep_variable = d\nsweep_start = 0.5 m\nsweep_stop = 12 m\nsweep_steps = 24\n",
        )
        .unwrap();
        let sw = s.sweep.unwrap();
        assert_eq!(sw.variable, SweepVariable::Distance);
        assert_eq!(sw.steps, 24);
        let values = sw.values();
        assert_eq!(values.len(), 24);
        assert_eq!(values[0], 0.5);
        assert_eq!(*values.last().unwrap(), 12.0);

        // r4 sweeps are dimensionless; a unit is rejected.
        let e = Scenario::from_text(
            "sweep_variable = r4\nsweep_start = 0.01 m\nsweep_stop = 0.3 m\nsweep_steps = 5\n",
        )
        .unwrap_err();
        assert!(e.to_string().contains("dimensionless"), "{e}");
    }

    #[test]
    fn canonical_round_trip_is_identity() {
        for text in [
            "",
            "d = 8 m\np_in = 120 W\n",
            "l = 0.0303 m\ndc_bias = 3.5\ngain_volume = 0.03 cm3\n",
            "sweep_variable = p_in\nsweep_start = 0 w\nsweep_stop = 400 w\nsweep_steps = 81\n",
        ] {
            let s = Scenario::from_text(text).unwrap();
            let round = Scenario::from_text(&s.canonical()).unwrap();
            assert_eq!(s, round, "round trip diverged for {text:?}");
            assert_eq!(s.provenance_hash(), round.provenance_hash());
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = Scenario::from_text("d = 5 m\n").unwrap();
        let b = Scenario::from_text("d = 8 m\n").unwrap();
        assert_eq!(a.provenance_hash(), Scenario::default().provenance_hash());
        assert_ne!(a.provenance_hash(), b.provenance_hash());
        assert_eq!(a.provenance_hash().len(), 16);
    }

    #[test]
    fn scenario_assembles_library_objects() {
        let s = Scenario::from_text("d = 8 m\n").unwrap();
        let system = s.system().unwrap();
        let report = system.evaluate(100.0).unwrap();
        assert!(report.capacity() > 0.0);
        let cfg = s.ofdm_config().unwrap();
        assert_eq!(cfg.bits_per_frame(), 800 * 14);
    }
}
