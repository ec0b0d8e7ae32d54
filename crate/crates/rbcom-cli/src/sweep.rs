//! One-dimensional parameter sweeps over the full pipeline, driven by the
//! configuration's sweep block. Rows are evaluated in parallel and emitted
//! in grid order.

use rayon::prelude::*;

use crate::config::{Scenario, Spacing, SweepVariable};

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Applies one sweep value onto a copy of the base scenario.
fn apply(base: &Scenario, variable: SweepVariable, value: f64) -> Scenario {
    let mut s = base.clone();
    match variable {
        SweepVariable::Distance => s.distance = value,
        SweepVariable::RetroFocalLength => s.spacing = Spacing::RetroFocal(value),
        SweepVariable::FocalLength => s.focal_length = value,
        SweepVariable::OutputReflectivity => s.output_reflectivity = value,
        SweepVariable::PumpPower => s.pump_power = value,
    }
    s
}

/// Runs the sweep and renders the CSV. The scenario must carry a sweep
/// block (the caller checks and reports the absence as a config error).
pub fn run(scenario: &Scenario) -> rbcom::Result<String> {
    let spec = scenario
        .sweep
        .as_ref()
        .expect("caller guarantees a sweep block");
    let mut out = format!(
        "# rbcom sweep\n# config {}\n# grid: {} = {}..{} in {} points\n",
        scenario.provenance_hash(),
        spec.variable.key(),
        spec.start,
        spec.stop,
        spec.steps
    );
    out.push_str(
        "variable,value,d_m,p_in_w,status,gamma_diff,p_th_w,p_fund_w,p_shg_w,p_received_w,snr,se_bits_hz,capacity_bps\n",
    );
    let rows: Vec<rbcom::Result<String>> = spec
        .values()
        .into_par_iter()
        .map(|value| {
            let varied = apply(scenario, spec.variable, value);
            let report = varied.system()?.evaluate(varied.pump_power)?;
            let threshold = report
                .extraction
                .threshold
                .is_finite()
                .then_some(report.extraction.threshold);
            Ok(format!(
                "{},{value},{},{},{},{},{},{},{},{},{},{},{}\n",
                spec.variable.key(),
                varied.distance,
                varied.pump_power,
                report.stability.label(),
                opt(report.diffraction_survival),
                opt(threshold),
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
