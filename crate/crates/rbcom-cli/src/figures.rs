//! The five built-in figure datasets: beam-radius profiles, the full
//! distance sweep, output-coupling curves, and capacity-vs-pump curves.
//! All CSV, header row plus `#` provenance comments, deterministic grids.

use rayon::prelude::*;

use rbcom::{ResonatorGeometry64, Stability};

use crate::config::Scenario;

/// Formats an optional value; `None` becomes an empty cell.
fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn preamble(scenario: &Scenario, command: &str, grid: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# rbcom {command}\n"));
    out.push_str(&format!("# config {}\n", scenario.provenance_hash()));
    out.push_str(&format!("# grid: {grid}\n"));
    out
}

/// Fundamental and multimode beam-radius profiles along the cavity axis at
/// short range (d = 0.5 m): three retroreflector focal lengths at
/// f = 0.03 m plus two lens focal lengths at f_RR = 3 m. The scenario
/// supplies wavelength and gain aperture.
pub fn fig6(scenario: &Scenario, samples: usize) -> rbcom::Result<String> {
    const DISTANCE: f64 = 0.5;
    const SERIES: [(f64, f64); 5] = [
        (0.03, 1.5),
        (0.03, 3.0),
        (0.03, 6.0),
        (0.02, 3.0),
        (0.05, 3.0),
    ];
    let mut out = preamble(
        scenario,
        "figure fig6",
        &format!("d = {DISTANCE} m; (f, f_RR) in {SERIES:?} m; {samples} samples per series"),
    );
    out.push_str("f_m,f_rr_m,z_m,z_norm,w00_m,w_mode_m,status\n");
    for (f, f_rr) in SERIES {
        profile_rows(&mut out, scenario, f, f_rr, DISTANCE, samples, |f, f_rr| {
            format!("{f},{f_rr}")
        })?;
    }
    Ok(out)
}

/// Beam-radius profiles against normalized cavity position for a grid of
/// retroreflector focal lengths and transmission distances at f = 0.03 m.
pub fn fig7(scenario: &Scenario, samples: usize) -> rbcom::Result<String> {
    const FOCAL: f64 = 0.03;
    const F_RR: [f64; 3] = [1.5, 3.0, 6.0];
    const DIST: [f64; 3] = [1.0, 5.0, 10.0];
    let mut out = preamble(
        scenario,
        "figure fig7",
        &format!(
            "f = {FOCAL} m; f_RR in {F_RR:?} m; d in {DIST:?} m; {samples} samples per series"
        ),
    );
    out.push_str("f_rr_m,d_m,z_m,z_norm,w00_m,w_mode_m,status\n");
    for f_rr in F_RR {
        for d in DIST {
            profile_rows(
                &mut out,
                scenario,
                FOCAL,
                f_rr,
                d,
                samples,
                move |_, f_rr| format!("{f_rr},{d}"),
            )?;
        }
    }
    Ok(out)
}

/// Appends one profile series; unstable or confocal geometries contribute a
/// single status row instead of samples.
fn profile_rows(
    out: &mut String,
    scenario: &Scenario,
    f: f64,
    f_rr: f64,
    d: f64,
    samples: usize,
    label: impl Fn(f64, f64) -> String,
) -> rbcom::Result<()> {
    let geom = ResonatorGeometry64::with_retro_focal_length(f, f_rr, d, scenario.wavelength)?;
    let status = geom.stability();
    if status != Stability::Stable {
        out.push_str(&format!("{},,,,,{}\n", label(f, f_rr), status.label()));
        return Ok(());
    }
    let profile = geom.mode_radius_profile(scenario.aperture_radius, samples)?;
    for p in &profile.points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            label(f, f_rr),
            p.z,
            p.z_norm,
            p.fundamental_radius,
            p.multimode_radius,
            status.label(),
        ));
    }
    Ok(())
}

/// The full chain against transmission distance: stability, diffraction,
/// mode structure, extracted/converted/received power, SNR, spectral
/// efficiency, and capacity on d = 0.5..12.5 m in 0.05 m steps.
pub fn fig8(scenario: &Scenario) -> rbcom::Result<String> {
    const STEPS: usize = 241;
    let system = scenario.system()?;
    let pump = scenario.pump_power;
    let mut out = preamble(
        scenario,
        "figure fig8",
        &format!("d = 0.5..12.5 m in 0.05 m steps; P_in = {pump} W"),
    );
    out.push_str(
        "d_m,status,g1g2,gamma_diff,m_squared,mode_count,p_fund_w,p_shg_w,p_received_w,snr,se_bits_hz,capacity_bps\n",
    );
    let rows: Vec<rbcom::Result<String>> = (0..STEPS)
        .into_par_iter()
        .map(|k| {
            // Integer-derived grid keeps the printed d free of step-accumulation noise.
            let d = (k + 10) as f64 / 20.0;
            let report = system.with_distance(d)?.evaluate(pump)?;
            Ok(format!(
                "{d},{},{},{},{},{},{},{},{},{},{},{}\n",
                report.stability.label(),
                report.equivalent.g_product(),
                opt(report.diffraction_survival),
                opt(report.mode.map(|m| m.m_squared())),
                report
                    .mode
                    .map(|m| format!("{}", m.mode_count))
                    .unwrap_or_default(),
                report.extraction.power,
                opt(report.shg.map(|s| s.power)),
                opt(report.received_power),
                opt(report.link.map(|l| l.snr)),
                opt(report.link.map(|l| l.spectral_efficiency)),
                opt(report.link.map(|l| l.capacity)),
            ))
        })
        .collect();
    for row in rows {
        out.push_str(&row?);
    }
    Ok(out)
}

/// Extracted fundamental power against the output-coupler reflectivity for
/// four pump powers at the scenario distance.
pub fn fig9(scenario: &Scenario) -> rbcom::Result<String> {
    const PUMPS: [f64; 4] = [100.0, 200.0, 300.0, 400.0];
    const STEPS: usize = 299;
    let mut out = preamble(
        scenario,
        "figure fig9",
        &format!(
            "R4 = 0.001..0.299 in 0.001 steps; P_in in {PUMPS:?} W; d = {} m",
            scenario.distance
        ),
    );
    out.push_str("r4,p_in_w,p_fund_w,status\n");
    let grid: Vec<(f64, f64)> = PUMPS
        .iter()
        .flat_map(|&p| (1..=STEPS).map(move |k| (p, k as f64 / 1000.0)))
        .collect();
    let rows: Vec<rbcom::Result<String>> = grid
        .into_par_iter()
        .map(|(pump, r4)| {
            let mut varied = scenario.clone();
            varied.output_reflectivity = r4;
            let report = varied.system()?.evaluate(pump)?;
            Ok(format!(
                "{r4},{pump},{},{}\n",
                report.extraction.power,
                report.stability.label(),
            ))
        })
        .collect();
    for row in rows {
        out.push_str(&row?);
    }
    Ok(out)
}

/// Received power and capacity against pump power for three transmission
/// distances.
pub fn fig10(scenario: &Scenario) -> rbcom::Result<String> {
    const DIST: [f64; 3] = [2.0, 8.0, 10.0];
    const P_MAX: usize = 400;
    let system = scenario.system()?;
    let mut out = preamble(
        scenario,
        "figure fig10",
        &format!("P_in = 0..{P_MAX} W in 1 W steps; d in {DIST:?} m"),
    );
    out.push_str("p_in_w,d_m,p_received_w,snr,se_bits_hz,capacity_bps,status\n");
    let grid: Vec<(f64, usize)> = DIST
        .iter()
        .flat_map(|&d| (0..=P_MAX).map(move |p| (d, p)))
        .collect();
    let rows: Vec<rbcom::Result<String>> = grid
        .into_par_iter()
        .map(|(d, p)| {
            let pump = p as f64;
            let report = system.with_distance(d)?.evaluate(pump)?;
            Ok(format!(
                "{pump},{d},{},{},{},{},{}\n",
                opt(report.received_power),
                opt(report.link.map(|l| l.snr)),
                opt(report.link.map(|l| l.spectral_efficiency)),
                opt(report.link.map(|l| l.capacity)),
                report.stability.label(),
            ))
        })
        .collect();
    for row in rows {
        out.push_str(&row?);
    }
    Ok(out)
}

/// Dispatch by figure name as exposed on the command line.
pub fn generate(name: &str, scenario: &Scenario, samples: usize) -> rbcom::Result<String> {
    match name {
        "fig6" => fig6(scenario, samples),
        "fig7" => fig7(scenario, samples),
        "fig8" => fig8(scenario),
        "fig9" => fig9(scenario),
        "fig10" => fig10(scenario),
        other => Err(rbcom::Error::InvalidArgument(format!(
            "unknown figure '{other}' (expected fig6..fig10)"
        ))),
    }
}
