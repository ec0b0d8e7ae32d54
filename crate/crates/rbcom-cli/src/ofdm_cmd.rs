//! The Monte-Carlo OFDM command: chains the scenario's link budget into
//! the baseband simulation, with an adaptive stop rule or a fixed frame
//! count, plus an optional BER-waterfall mode over explicit SNRs.

use rbcom::link_budget::{LinkBudget, NoisePowers};
use rbcom::ofdm::{run_link, run_link_frames, BerReport};
use rbcom::{Error, OfdmConfig64, Stability};

use crate::config::Scenario;

/// Pre-FEC hard-decision BER limit quoted in the run verdict.
pub const HD_FEC_LIMIT: f64 = 3.8e-3;

/// Stop rule for unbounded runs: at least this many bits...
const MIN_BITS: u64 = 10_000_000;
/// ...and at least this many errors, unless the bit cap is reached first.
const MIN_ERRORS: u64 = 200;
const MAX_BITS: u64 = 80_000_000;

pub struct OfdmOutcome {
    pub report_text: String,
    pub csv: String,
}

fn synthetic_budget(snr: f64) -> LinkBudget<f64> {
    LinkBudget {
        received_power: 0.0,
        signal_current: 0.0,
        noise: NoisePowers {
            shot: 0.0,
            thermal: 0.0,
        },
        snr,
        spectral_efficiency: (1.0 + snr).log2(),
        capacity: 0.0,
    }
}

/// Runs batches until the stop rule is met: ≥ MIN_BITS bits and
/// (≥ MIN_ERRORS errors or ≥ MAX_BITS bits).
fn run_until_settled(
    cfg: &OfdmConfig64,
    budget: &LinkBudget<f64>,
    seed: u64,
) -> rbcom::Result<BerReport<f64>> {
    let batch_frames = (1_000_000 / cfg.bits_per_frame() as u64).max(1);
    let mut merged: Option<BerReport<f64>> = None;
    let mut frames_done = 0u64;
    loop {
        let part = run_link_frames(cfg, budget, frames_done, batch_frames, seed)?;
        frames_done += batch_frames;
        merged = Some(match merged {
            Some(m) => m.merge(&part)?,
            None => part,
        });
        let m = merged.as_ref().unwrap();
        if m.bits_sent >= MIN_BITS && (m.bit_errors >= MIN_ERRORS || m.bits_sent >= MAX_BITS) {
            return Ok(merged.unwrap());
        }
    }
}

fn report_block(r: &BerReport<f64>) -> String {
    format!(
        "frames = {}, bits = {}, bit errors = {}\n\
         BER = {:e}  ({} pre-FEC hard-decision limit {HD_FEC_LIMIT:e})\n\
         EVM(rms) = {:e}\n\
         rate if every hertz carried a symbol = {:e} bit/s\n\
         net payload rate after idle-bin and prefix overhead = {:e} bit/s\n",
        r.n_frames,
        r.bits_sent,
        r.bit_errors,
        r.ber(),
        if r.ber() < HD_FEC_LIMIT {
            "below"
        } else {
            "ABOVE"
        },
        r.evm_rms(),
        r.data_rate_nominal,
        r.data_rate_net,
    )
}

fn csv_row(snr_db: f64, r: &BerReport<f64>) -> String {
    format!(
        "{snr_db},{},{},{},{}\n",
        r.ber(),
        r.bits_sent,
        r.bit_errors,
        r.evm_rms()
    )
}

pub fn run(
    scenario: &Scenario,
    frames: Option<u64>,
    seed: u64,
    snr_db_list: Option<&[f64]>,
) -> rbcom::Result<OfdmOutcome> {
    let cfg = scenario.ofdm_config()?;
    let mut text = String::new();
    for line in scenario.banner() {
        text.push_str(&line);
        text.push('\n');
    }
    let mut csv = format!(
        "# rbcom ofdm\n# config {}\n# seed {seed}\nsnr_db,ber,bits,bit_errors,evm_rms\n",
        scenario.provenance_hash()
    );

    if let Some(list) = snr_db_list {
        // Waterfall mode: explicit SNR grid, fixed frames per point.
        let per_point = frames.unwrap_or(100);
        text.push_str(&format!(
            "waterfall over {} SNR points, {per_point} frames each, seed {seed}\n",
            list.len()
        ));
        for &db in list {
            let snr = 10f64.powf(db / 10.0);
            let report = run_link(&cfg, &synthetic_budget(snr), per_point, seed)?;
            text.push_str(&format!("SNR {db} dB: BER = {:e}\n", report.ber()));
            csv.push_str(&csv_row(db, &report));
        }
        return Ok(OfdmOutcome {
            report_text: text,
            csv,
        });
    }

    // Operating-point mode: the scenario's own link budget drives the run.
    let report = scenario.system()?.evaluate(scenario.pump_power)?;
    match report.stability {
        Stability::Stable => {}
        Stability::ConfocalBoundary => {
            return Err(Error::SingularConfiguration(format!(
                "d = {} m sits on the confocal boundary; no mode is defined",
                scenario.distance
            )))
        }
        Stability::Unstable => {
            return Err(Error::UnstableResonator {
                g_product: report.equivalent.g_product(),
            })
        }
    }
    let link = report
        .link
        .ok_or_else(|| Error::NoLink("the chain produced no received signal".into()))?;
    if link.snr.is_nan() || link.snr <= 0.0 {
        return Err(Error::NoLink(format!(
            "pump power {} W is below the {} W threshold: SNR = 0",
            scenario.pump_power, report.extraction.threshold
        )));
    }

    text.push_str(&format!(
        "operating point: d = {} m, P_in = {} W, received power = {:e} W\n\
         electrical SNR = {:e} ({} dB), Shannon limit {:e} bit/s/Hz = {:e} bit/s\n",
        scenario.distance,
        scenario.pump_power,
        link.received_power,
        link.snr,
        link.snr_db(),
        link.spectral_efficiency,
        link.capacity,
    ));
    text.push_str(&format!(
        "modem: {}-QAM, {}/{} data subcarriers, prefix {}, clip {} x RMS, bias {} x RMS, seed {seed}\n",
        cfg.qam_order(),
        cfg.n_data_subcarriers(),
        cfg.fft_len(),
        cfg.cp_len(),
        cfg.clip_ratio(),
        cfg.dc_bias_level(),
    ));

    let mc = match frames {
        Some(n) => run_link(&cfg, &link, n, seed)?,
        None => run_until_settled(&cfg, &link, seed)?,
    };
    text.push_str(&report_block(&mc));
    csv.push_str(&csv_row(mc.snr_used_db(), &mc));
    Ok(OfdmOutcome {
        report_text: text,
        csv,
    })
}
