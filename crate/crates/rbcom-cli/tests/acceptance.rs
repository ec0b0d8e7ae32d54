//! System-level acceptance gate.
//!
//! Each numbered check prints exactly one line,
//!
//! ```text
//! ACCEPTANCE <id> <PASS|FAIL>: <detail>
//! ```
//!
//! and the process exits with status 1 if any check failed, so
//! `cargo test --workspace` stays red until every check is green.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbcom::diffraction::round_trip_survival;
use rbcom::link_budget::{Detector, LinkBudget, NoisePowers};
use rbcom::ofdm::{run_link, SquareQam};
use rbcom::power_chain::{GainMedium, LossBudget, PumpEfficiency, ShgCrystal};
use rbcom::{OfdmConfig64, RayMatrix64, ResonatorGeometry64, Stability, SystemSpec64};

const WAVELENGTH: f64 = 1.064e-6;

fn geometry(d: f64) -> ResonatorGeometry64 {
    ResonatorGeometry64::with_retro_focal_length(0.03, 3.0, d, WAVELENGTH)
        .expect("reference geometry is valid")
}

/// The reference system: 3 m cat's-eye retroreflectors 'd' metres apart,
/// Nd:YVO4-like gain sheet, KTP-like doubler, PIN receiver.
fn system(d: f64, r4: f64) -> SystemSpec64 {
    SystemSpec64::new(
        geometry(d),
        GainMedium::new(15.6e-23, 100e-6, WAVELENGTH, 3e-3, 1e-3).unwrap(),
        PumpEfficiency::new(0.75, 0.99, 0.91, 0.95, 0.76, 0.90).unwrap(),
        LossBudget::new(1.0, 1.0, 1.0, r4).unwrap(),
        ShgCrystal::new(4.7e-12, 2.23, 2e-3).unwrap(),
        Detector::new(0.6, 800e6, 295.0, 10_000.0, 5100e-6).unwrap(),
        1.0,
    )
    .unwrap()
}

fn modem_config() -> OfdmConfig64 {
    OfdmConfig64::new(16384, 800, 1024, 176, 800e6).unwrap()
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

fn within(value: f64, target: f64, rel_tol: f64) -> bool {
    (value - target).abs() <= rel_tol * target
}

fn secs(t: Duration) -> String {
    format!("{:.3} s", t.as_secs_f64())
}

// ---------------------------------------------------------------- checks

/// 1. Spectral efficiency at d = 8 m: 19.7 bit/s/Hz ±5% at 100 W pump and
///    26 bit/s/Hz ±5% at 400 W.
fn spectral_efficiency_points() -> Result<String, String> {
    let t0 = Instant::now();
    let sys = system(8.0, 0.02);
    let se100 = sys
        .evaluate(100.0)
        .map_err(|e| e.to_string())?
        .spectral_efficiency();
    let se400 = sys
        .evaluate(400.0)
        .map_err(|e| e.to_string())?
        .spectral_efficiency();
    let elapsed = t0.elapsed();
    let detail = format!(
        "SE(100 W) = {se100:.4} bit/s/Hz vs 19.7 ±5%, SE(400 W) = {se400:.4} vs 26 ±5%, {}",
        secs(elapsed)
    );
    if within(se100, 19.7, 0.05) && within(se400, 26.0, 0.05) && elapsed.as_secs_f64() < 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// 2. Peak received power over P_in ∈ [0, 400] W at d = 8 m: 35.4 mW ±10%.
fn peak_received_power() -> Result<String, String> {
    let t0 = Instant::now();
    let sys = system(8.0, 0.02);
    let mut best_power = 0.0f64;
    let mut best_pump = 0.0f64;
    for k in 0..=400u32 {
        let pump = f64::from(k);
        let rep = sys.evaluate(pump).map_err(|e| e.to_string())?;
        let pr = rep.received_power.unwrap_or(0.0);
        if pr > best_power {
            best_power = pr;
            best_pump = pump;
        }
    }
    let elapsed = t0.elapsed();
    let detail = format!(
        "max P_r = {:.4} mW at P_in = {best_pump} W vs 35.4 mW ±10%, {}",
        best_power * 1e3,
        secs(elapsed)
    );
    if within(best_power, 35.4e-3, 0.10) && elapsed.as_secs_f64() < 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// 3. Output-coupler optimum at d = 5 m: P(R4) unimodal with the 100 W
///    argmax at 2% ±0.5 pp, and the argmax non-decreasing in pump power.
fn output_coupler_optimum() -> Result<String, String> {
    let t0 = Instant::now();
    let mut argmaxes = Vec::new();
    for pump in [100.0, 200.0, 300.0, 400.0] {
        let mut powers = Vec::with_capacity(2999);
        for k in 1..=2999u32 {
            let r4 = f64::from(k) / 10_000.0;
            let rep = system(5.0, r4).evaluate(pump).map_err(|e| e.to_string())?;
            powers.push(rep.extraction.power);
        }
        let (idx, &peak) = powers
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let tol = peak * 1e-12;
        let rises = powers[..=idx].windows(2).all(|w| w[1] >= w[0] - tol);
        let falls = powers[idx..].windows(2).all(|w| w[1] <= w[0] + tol);
        if !(rises && falls) {
            return Err(format!("P(R4) is not unimodal at pump {pump} W"));
        }
        argmaxes.push(f64::from(idx as u32 + 1) / 10_000.0);
    }
    let monotone = argmaxes.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let elapsed = t0.elapsed();
    let detail = format!(
        "argmax R4 = {:?} over 100..400 W (100 W point vs 0.02 ±0.005), unimodal, {}",
        argmaxes,
        secs(elapsed)
    );
    if (argmaxes[0] - 0.02).abs() <= 0.005 + 1e-12 && monotone && elapsed.as_secs_f64() < 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// 4. Capacity vs distance: variation < 10% over stable d ∈ [0.5, 8] m,
///    capacity 0 somewhere in d ∈ [10, 12.5] m, and M² > 4 for stable d < 6 m.
fn distance_curve_shape() -> Result<String, String> {
    let t0 = Instant::now();
    let mut caps = Vec::new();
    let mut zero_distance = None;
    let mut worst_msq = f64::INFINITY;
    for k in 0..=240u32 {
        let d = f64::from(k + 10) / 20.0;
        let rep = system(d, 0.02).evaluate(100.0).map_err(|e| e.to_string())?;
        let stable = rep.stability == Stability::Stable;
        let cap = rep.capacity();
        if stable && d <= 8.0 {
            caps.push(cap);
        }
        if (10.0..=12.5).contains(&d) && cap == 0.0 && zero_distance.is_none() {
            zero_distance = Some(d);
        }
        if stable && d < 6.0 {
            if let Some(mode) = &rep.mode {
                worst_msq = worst_msq.min(mode.m_squared());
            }
        }
    }
    let cmax = caps.iter().cloned().fold(f64::MIN, f64::max);
    let cmin = caps.iter().cloned().fold(f64::MAX, f64::min);
    let variation = (cmax - cmin) / cmax;
    let elapsed = t0.elapsed();
    let detail = format!(
        "capacity variation {:.2}% on stable d ∈ [0.5, 8] vs <10%, first zero at d = {:?} m in [10, 12.5], min M²(d<6) = {worst_msq:.3} vs >4, {}",
        variation * 100.0,
        zero_distance,
        secs(elapsed)
    );
    if variation < 0.10 && zero_distance.is_some() && worst_msq > 4.0 && elapsed.as_secs_f64() < 1.0
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// 5. Beam diameter at the receiver pupil for d = 8 m: 6 mm ±20%.
fn receiver_beam_diameter() -> Result<String, String> {
    let rep = system(8.0, 0.02)
        .evaluate(100.0)
        .map_err(|e| e.to_string())?;
    let radius = rep
        .receiver_beam_radius
        .ok_or("no beam radius for a stable geometry")?;
    let diameter = 2.0 * radius;
    let detail = format!("2w = {:.4} mm vs 6 mm ±20%", diameter * 1e3);
    if within(diameter, 6e-3, 0.20) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// 6. Monte-Carlo OFDM at P_in = 120 W, d = 8 m, 16384-QAM / 800 subcarriers
///    / FFT 1024 / CP 176: BER < 3.8e-3 over at least 1e7 bits.
fn monte_carlo_ber() -> Result<String, String> {
    let t0 = Instant::now();
    let rep = system(8.0, 0.02)
        .evaluate(120.0)
        .map_err(|e| e.to_string())?;
    let link = rep.link.ok_or("no link at the 120 W operating point")?;
    let cfg = modem_config();
    let frames = 10_000_000u64.div_ceil(cfg.bits_per_frame() as u64);
    let report = run_link(&cfg, &link, frames, 1).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    let detail = format!(
        "BER = {:.3e} over {} bits ({} errors, SNR {:.2} dB) vs < 3.8e-3 over ≥1e7 bits, {}",
        report.ber(),
        report.bits_sent,
        report.bit_errors,
        report.snr_used_db(),
        secs(elapsed)
    );
    if report.ber() < 3.8e-3 && report.bits_sent >= 10_000_000 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Partial transfer matrix from the gain mirror to axial position `z`,
/// assembled segment by segment for comparison against the piecewise
/// q propagation.
fn partial_matrix(geom: &ResonatorGeometry64, z: f64) -> RayMatrix64 {
    let lens = RayMatrix64::thin_lens(geom.focal_length()).unwrap();
    let z1 = geom.z_lens1();
    let z2 = geom.z_lens2();
    if z <= z1 {
        RayMatrix64::free_space(z)
    } else if z <= z2 {
        RayMatrix64::compose(&[
            RayMatrix64::free_space(z1),
            lens,
            RayMatrix64::free_space(z - z1),
        ])
        .unwrap()
    } else {
        RayMatrix64::compose(&[
            RayMatrix64::free_space(z1),
            lens,
            RayMatrix64::free_space(z2 - z1),
            lens,
            RayMatrix64::free_space(z - z2),
        ])
        .unwrap()
    }
}

/// 7. Property battery: matrix/mode invariants, QAM theory agreement, and
///    diffraction scaling invariance.
fn property_battery() -> Result<String, String> {
    let mut notes = Vec::new();

    // Unimodular invariant over a physical parameter grid (1e-12).
    let mut worst_det = 0.0f64;
    for f in [0.02, 0.03, 0.05] {
        for f_rr in [1.5, 3.0, 6.0] {
            for k in 1..=25u32 {
                let d = f64::from(k) * 0.5;
                let geom = ResonatorGeometry64::with_retro_focal_length(f, f_rr, d, WAVELENGTH)
                    .map_err(|e| e.to_string())?;
                worst_det = worst_det.max((geom.single_pass_matrix().det() - 1.0).abs());
                worst_det = worst_det.max((geom.cats_eye().matrix().det() - 1.0).abs());
            }
        }
    }
    if worst_det > 1e-12 {
        return Err(format!(
            "unimodular invariant broken: |det−1| = {worst_det:.3e}"
        ));
    }
    notes.push(format!("|det−1| ≤ {worst_det:.1e}"));

    // Piecewise q propagation vs composed partial matrix (1e-10, 64 random z).
    let geom = geometry(5.0);
    let q0 = geom.q_at_m1().map_err(|e| e.to_string())?;
    let span = geom.z_mirror2();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst_q = 0.0f64;
    for _ in 0..64 {
        let z = rng.gen_range(0.0..span);
        let direct = geom.propagate_q(z).map_err(|e| e.to_string())?;
        let via_matrix = partial_matrix(&geom, z).transform_q(q0);
        worst_q = worst_q.max((via_matrix - direct).norm() / direct.norm());
    }
    if worst_q > 1e-10 {
        return Err(format!("piecewise q mismatch: rel err {worst_q:.3e}"));
    }
    notes.push(format!("q piecewise ≤ {worst_q:.1e}"));

    // Round-trip q self-consistency (1e-9).
    let mut worst_rt = 0.0f64;
    for d in [0.5, 2.0, 5.0, 8.0, 11.0] {
        let geom = geometry(d);
        let q0 = geom.q_at_m1().map_err(|e| e.to_string())?;
        let single = geom.single_pass_matrix();
        let q1 = (single * single).transform_q(q0);
        worst_rt = worst_rt.max((q1 - q0).norm() / q0.norm());
    }
    if worst_rt > 1e-9 {
        return Err(format!("round-trip q drift: rel err {worst_rt:.3e}"));
    }
    notes.push(format!("round trip ≤ {worst_rt:.1e}"));

    // w00 symmetry about the free-space waist (1e-9).
    let geom = geometry(5.0);
    let z_waist = geom.z_gain() + 0.5 * 5.0;
    let reach = geom.focal_length() + 0.5 * 5.0;
    let mut worst_sym = 0.0f64;
    for k in 1..=32u32 {
        let delta = f64::from(k) / 32.0 * 0.999 * reach;
        let lo = geom
            .fundamental_radius(z_waist - delta)
            .map_err(|e| e.to_string())?;
        let hi = geom
            .fundamental_radius(z_waist + delta)
            .map_err(|e| e.to_string())?;
        worst_sym = worst_sym.max((lo - hi).abs() / lo);
    }
    if worst_sym > 1e-9 {
        return Err(format!("waist asymmetry: rel err {worst_sym:.3e}"));
    }
    notes.push(format!("w00 symmetry ≤ {worst_sym:.1e}"));

    // Measured BER against the closed-form Gray approximation within
    // 3 Monte-Carlo standard errors at 20/30/40 dB (clipping off).
    for (order, snr_db, frames) in [
        (64u32, 20.0f64, 420u64),
        (256, 30.0, 420),
        (4096, 40.0, 200),
    ] {
        let snr = 10f64.powf(snr_db / 10.0);
        let cfg = OfdmConfig64::new(order, 800, 1024, 176, 800e6)
            .and_then(|c| c.with_clip_ratio(0.0))
            .map_err(|e| e.to_string())?;
        let report =
            run_link(&cfg, &synthetic_budget(snr), frames, 11).map_err(|e| e.to_string())?;
        let theory = SquareQam::<f64>::new(order)
            .map_err(|e| e.to_string())?
            .theoretical_gray_ber(snr);
        let std_err = (theory * (1.0 - theory) / report.bits_sent as f64).sqrt();
        let gap = (report.ber() - theory).abs();
        if gap > 3.0 * std_err {
            return Err(format!(
                "{order}-QAM at {snr_db} dB: BER {:.3e} vs theory {theory:.3e} differs by {:.1} SE",
                report.ber(),
                gap / std_err
            ));
        }
        notes.push(format!(
            "{order}-QAM@{snr_db}dB within {:.1}σ",
            gap / std_err
        ));
    }

    // Diffraction-survival scaling invariance (1e-9): lengths × c with
    // a × √c at fixed λ, and lengths × c with a × c and λ × c.
    let aperture = 3e-3;
    let g_base = round_trip_survival(&geometry(5.0), aperture).map_err(|e| e.to_string())?;
    let mut worst_scale = 0.0f64;
    for c in [0.5, 2.0, 4.0] {
        let stretched =
            ResonatorGeometry64::with_retro_focal_length(0.03, 3.0 * c, 5.0 * c, WAVELENGTH)
                .map_err(|e| e.to_string())?;
        let g1 = round_trip_survival(&stretched, aperture * c.sqrt()).map_err(|e| e.to_string())?;
        let rescaled =
            ResonatorGeometry64::with_retro_focal_length(0.03, 3.0 * c, 5.0 * c, WAVELENGTH * c)
                .map_err(|e| e.to_string())?;
        let g2 = round_trip_survival(&rescaled, aperture * c).map_err(|e| e.to_string())?;
        worst_scale = worst_scale.max(((g1 - g_base) / g_base).abs());
        worst_scale = worst_scale.max(((g2 - g_base) / g_base).abs());
    }
    if worst_scale > 1e-9 {
        return Err(format!(
            "scaling invariance broken: rel err {worst_scale:.3e}"
        ));
    }
    notes.push(format!("Fresnel scaling ≤ {worst_scale:.1e}"));

    Ok(notes.join("; "))
}

fn run_to_file(bin: &str, args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(bin)
        .args(args)
        .arg("--output")
        .arg(out)
        .env_remove("RBCOM_CONFIG_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!(
            "{bin} {args:?} failed: {}",
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    std::fs::read(out).map_err(|e| e.to_string())
}

/// 8. Determinism: repeated library runs and repeated CLI invocations of
///    `ofdm` and every `figure` command are bit-identical.
fn determinism() -> Result<String, String> {
    let rep = system(8.0, 0.02)
        .evaluate(120.0)
        .map_err(|e| e.to_string())?;
    let link = rep.link.ok_or("no link for determinism check")?;
    let cfg = modem_config();
    let a = run_link(&cfg, &link, 25, 9).map_err(|e| e.to_string())?;
    let b = run_link(&cfg, &link, 25, 9).map_err(|e| e.to_string())?;
    if a.bit_errors != b.bit_errors
        || a.bits_sent != b.bits_sent
        || a.ber().to_bits() != b.ber().to_bits()
        || a.evm_rms().to_bits() != b.evm_rms().to_bits()
    {
        return Err("library run_link differs between identical runs".into());
    }

    let bin = env!("CARGO_BIN_EXE_rbcom");
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance_determinism");
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut commands: Vec<Vec<&str>> = vec![vec!["ofdm", "--frames", "6", "--seed", "3"]];
    for name in ["fig6", "fig7", "fig8", "fig9", "fig10"] {
        commands.push(vec!["figure", name]);
    }
    for (i, args) in commands.iter().enumerate() {
        let first = run_to_file(bin, args, &dir.join(format!("{i}_a.csv")))?;
        let second = run_to_file(bin, args, &dir.join(format!("{i}_b.csv")))?;
        if first != second {
            return Err(format!("`rbcom {}` differs between runs", args.join(" ")));
        }
    }
    Ok(format!(
        "library reruns bit-identical; {} CLI commands byte-identical on repeat",
        commands.len()
    ))
}

type Check = fn() -> Result<String, String>;

fn main() {
    let checks: Vec<(u32, Check)> = vec![
        (1, spectral_efficiency_points),
        (2, peak_received_power),
        (3, output_coupler_optimum),
        (4, distance_curve_shape),
        (5, receiver_beam_diameter),
        (6, monte_carlo_ber),
        (7, property_battery),
        (8, determinism),
    ];
    let mut failures = 0u32;
    let mut summary = String::new();
    for (id, check) in checks {
        match check() {
            Ok(detail) => {
                println!("ACCEPTANCE {id} PASS: {detail}");
                let _ = writeln!(summary, "{id} PASS");
            }
            Err(detail) => {
                println!("ACCEPTANCE {id} FAIL: {detail}");
                let _ = writeln!(summary, "{id} FAIL");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance check(s) failed:\n{summary}");
        std::process::exit(1);
    }
}
