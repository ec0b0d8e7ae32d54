//! Monte-Carlo baseband simulation of the QAM/OFDM intensity link.
//!
//! Complex-baseband OFDM: `n_data` Gray-coded square-QAM symbols ride the
//! subcarriers `±1..±n_data/2` of an `fft_len`-point spectrum (bin 0 is
//! never used), an inverse transform with `1/N` scaling produces the time
//! signal, and a cyclic prefix of `cp_len` samples is prepended. The
//! complex stream is carried on two interleaved nonnegative rails
//! `[bias + clip(I), bias + clip(Q)]`: each rail is clipped at
//! `±clip_ratio` × the reference rail RMS and shifted by a DC bias in the
//! same units (defaulting to the clip level, which makes every transmitted
//! sample nonnegative by construction). The receiver strips the prefix and
//! transforms back; any constant bias lands on the unused bin 0, so no
//! bias removal is needed, and the known flat unit channel makes the
//! equalizer the identity.
//!
//! Noise enters as white Gaussian samples on the rails. A link budget's
//! electrical SNR is interpreted per data subcarrier: [`run_link`] scales
//! the time-domain SNR by `n_data/fft_len` so that the post-transform SNR
//! on every occupied bin equals `budget.snr` exactly.
//!
//! Everything is deterministic: frame `i` of a run draws its payload and
//! noise from stream `i + 1` of a counter-based generator seeded with the
//! run seed, so reports are bit-identical across runs and across thread
//! counts (frames are processed in parallel but reduced in index order).

mod qam;

pub use qam::SquareQam;

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::link_budget::LinkBudget;
use crate::scalar::SimScalar;
use crate::{Error, Result};

/// OFDM frame layout and intensity-channel conditioning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmConfig<T> {
    qam_order: u32,
    n_data_subcarriers: usize,
    fft_len: usize,
    cp_len: usize,
    bandwidth: T,
    clip_ratio: T,
    dc_bias: Option<T>,
}

impl<T: SimScalar> OfdmConfig<T> {
    /// Builds a configuration. `qam_order` must be a power of 4,
    /// `n_data_subcarriers` even (the data bins come in ± pairs) and at
    /// most `fft_len − 2`, and `cp_len < fft_len`. Clipping defaults to
    /// 4 × RMS with the bias tracking the clip level.
    pub fn new(
        qam_order: u32,
        n_data_subcarriers: usize,
        fft_len: usize,
        cp_len: usize,
        bandwidth: T,
    ) -> Result<Self> {
        SquareQam::<T>::new(qam_order)?;
        if n_data_subcarriers == 0 || !n_data_subcarriers.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "n_data_subcarriers",
                value: n_data_subcarriers as f64,
                constraint: "a positive even count (subcarriers pair as ±k)",
            });
        }
        if fft_len < 4 {
            return Err(Error::InvalidParameter {
                name: "fft_len",
                value: fft_len as f64,
                constraint: "at least 4",
            });
        }
        if n_data_subcarriers > fft_len - 2 {
            return Err(Error::InvalidParameter {
                name: "n_data_subcarriers",
                value: n_data_subcarriers as f64,
                constraint: "at most fft_len − 2 (bin 0 and the Nyquist bin stay empty)",
            });
        }
        if cp_len >= fft_len {
            return Err(Error::InvalidParameter {
                name: "cp_len",
                value: cp_len as f64,
                constraint: "shorter than fft_len",
            });
        }
        if !(bandwidth > T::zero()) || !bandwidth.is_finite() {
            return Err(Error::InvalidParameter {
                name: "bandwidth",
                value: bandwidth.as_f64(),
                constraint: "a finite positive rate",
            });
        }
        Ok(Self {
            qam_order,
            n_data_subcarriers,
            fft_len,
            cp_len,
            bandwidth,
            clip_ratio: T::of(4.0),
            dc_bias: None,
        })
    }

    /// Sets the clip level in units of the reference rail RMS; 0 disables
    /// clipping.
    pub fn with_clip_ratio(mut self, clip_ratio: T) -> Result<Self> {
        if !(clip_ratio >= T::zero()) || !clip_ratio.is_finite() {
            return Err(Error::InvalidParameter {
                name: "clip_ratio",
                value: clip_ratio.as_f64(),
                constraint: "a finite non-negative ratio (0 disables clipping)",
            });
        }
        self.clip_ratio = clip_ratio;
        Ok(self)
    }

    /// Sets the DC bias in units of the reference rail RMS, overriding the
    /// default (= clip level).
    pub fn with_dc_bias(mut self, dc_bias: T) -> Result<Self> {
        if !(dc_bias >= T::zero()) || !dc_bias.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dc_bias",
                value: dc_bias.as_f64(),
                constraint: "a finite non-negative level",
            });
        }
        self.dc_bias = Some(dc_bias);
        Ok(self)
    }

    pub fn qam_order(&self) -> u32 {
        self.qam_order
    }

    pub fn n_data_subcarriers(&self) -> usize {
        self.n_data_subcarriers
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    pub fn clip_ratio(&self) -> T {
        self.clip_ratio
    }

    /// The DC bias in RMS units actually applied: the explicit setting if
    /// any, otherwise the clip ratio.
    pub fn dc_bias_level(&self) -> T {
        self.dc_bias.unwrap_or(self.clip_ratio)
    }

    /// Bits per QAM symbol, `log2(M)`.
    pub fn bits_per_symbol(&self) -> usize {
        (self.qam_order.trailing_zeros()) as usize
    }

    /// Payload bits carried by one frame.
    pub fn bits_per_frame(&self) -> usize {
        self.n_data_subcarriers * self.bits_per_symbol()
    }

    /// Time samples per frame including the cyclic prefix (complex).
    pub fn frame_len(&self) -> usize {
        self.fft_len + self.cp_len
    }

    /// Interleaved rail samples per frame.
    pub fn rail_samples_per_frame(&self) -> usize {
        2 * self.frame_len()
    }

    /// The occupied spectrum bins, in the order symbols are assigned:
    /// `1..=n/2`, then the mirrored half `N−n/2..N`.
    pub fn data_bins(&self) -> Vec<usize> {
        let half = self.n_data_subcarriers / 2;
        (1..=half)
            .chain(self.fft_len - half..self.fft_len)
            .collect()
    }

    /// RMS of one rail of the unclipped time signal with unit-energy
    /// symbols: `√(n_data/2)/fft_len`. Clip level and bias are multiples
    /// of this reference.
    pub fn reference_rail_rms(&self) -> T {
        T::of((self.n_data_subcarriers as f64 / 2.0).sqrt() / self.fft_len as f64)
    }

    /// Sign-rate bookkeeping: `B·log2(M)`, counting every hertz of
    /// bandwidth as a full QAM symbol stream.
    pub fn nominal_rate_bps(&self) -> T {
        self.bandwidth * T::of(self.bits_per_symbol() as f64)
    }

    /// Net payload rate: `B·log2(M)·n_data/(fft_len + cp_len)`, charging
    /// the idle subcarriers and the cyclic prefix.
    pub fn net_rate_bps(&self) -> T {
        self.nominal_rate_bps() * T::of(self.n_data_subcarriers as f64)
            / T::of(self.frame_len() as f64)
    }
}

/// Modulator/demodulator with FFT plans built once per configuration.
struct Modem<T: SimScalar> {
    cfg: OfdmConfig<T>,
    qam: SquareQam<T>,
    bins: Vec<usize>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: SimScalar> Modem<T> {
    fn new(cfg: &OfdmConfig<T>) -> Result<Self> {
        let mut planner = FftPlanner::new();
        Ok(Self {
            cfg: *cfg,
            qam: SquareQam::new(cfg.qam_order())?,
            bins: cfg.data_bins(),
            forward: planner.plan_fft_forward(cfg.fft_len()),
            inverse: planner.plan_fft_inverse(cfg.fft_len()),
        })
    }

    /// One frame of payload bits → interleaved biased/clipped rail
    /// samples, appended to `out`.
    fn modulate_frame(&self, bits: &[u8], out: &mut Vec<T>) {
        let n = self.cfg.fft_len();
        let mut spectrum = vec![Complex::new(T::zero(), T::zero()); n];
        let bps = self.cfg.bits_per_symbol();
        for (slot, &bin) in self.bins.iter().enumerate() {
            spectrum[bin] = self.qam.map(&bits[slot * bps..(slot + 1) * bps]);
        }
        self.inverse.process(&mut spectrum);
        let inv_n = T::of(1.0 / n as f64);
        for s in spectrum.iter_mut() {
            *s *= inv_n;
        }

        let rms = self.cfg.reference_rail_rms();
        let clip = self.cfg.clip_ratio() * rms;
        let bias = self.cfg.dc_bias_level() * rms;
        let condition = |v: T| {
            let clipped = if clip > T::zero() {
                v.max(-clip).min(clip)
            } else {
                v
            };
            bias + clipped
        };
        let cp = self.cfg.cp_len();
        for s in spectrum[n - cp..].iter().chain(spectrum.iter()) {
            out.push(condition(s.re));
            out.push(condition(s.im));
        }
    }

    /// One received frame (interleaved rails, prefix included) → decided
    /// bits appended to `out_bits` and per-slot squared symbol errors
    /// accumulated into `evm_sq`.
    fn demodulate_frame(&self, rails: &[T], out_bits: &mut Vec<u8>, evm_sq: &mut [T]) {
        let n = self.cfg.fft_len();
        let cp = self.cfg.cp_len();
        let mut spectrum: Vec<Complex<T>> = (0..n)
            .map(|i| {
                let at = 2 * (cp + i);
                Complex::new(rails[at], rails[at + 1])
            })
            .collect();
        self.forward.process(&mut spectrum);
        // 1/N-scaled inverse at the transmitter and a raw forward here make
        // the flat unit channel's equalizer the identity.
        for (slot, &bin) in self.bins.iter().enumerate() {
            let received = spectrum[bin];
            let sliced = self.qam.demap(received, out_bits);
            evm_sq[slot] += (received - sliced).norm_sqr();
        }
    }
}

fn check_bits<T: SimScalar>(cfg: &OfdmConfig<T>, bits: &[u8]) -> Result<usize> {
    let per_frame = cfg.bits_per_frame();
    if bits.is_empty() || !bits.len().is_multiple_of(per_frame) {
        return Err(Error::InvalidArgument(format!(
            "payload of {} bits is not a positive multiple of the {} bits per frame",
            bits.len(),
            per_frame
        )));
    }
    if let Some(bad) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::InvalidArgument(format!(
            "payload bits must be 0 or 1, found {bad}"
        )));
    }
    Ok(bits.len() / per_frame)
}

/// Modulates a payload (a whole number of frames) into the nonnegative
/// interleaved rail stream. The mapping is fully deterministic.
pub fn modulate<T: SimScalar>(cfg: &OfdmConfig<T>, bits: &[u8]) -> Result<Vec<T>> {
    let n_frames = check_bits(cfg, bits)?;
    let modem = Modem::new(cfg)?;
    let mut out = Vec::with_capacity(n_frames * cfg.rail_samples_per_frame());
    for frame in bits.chunks(cfg.bits_per_frame()) {
        modem.modulate_frame(frame, &mut out);
    }
    Ok(out)
}

/// Adds white Gaussian noise at the given electrical SNR, measured against
/// the mean-removed (AC) power of `samples` so the DC bias carries no
/// signal credit. Deterministic per seed; an infinite SNR is the identity.
pub fn awgn_channel<T: SimScalar>(samples: &[T], snr: T, seed: u64) -> Result<Vec<T>> {
    if !(snr > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "snr",
            value: snr.as_f64(),
            constraint: "positive (linear power ratio)",
        });
    }
    if snr.is_infinite() || samples.is_empty() {
        return Ok(samples.to_vec());
    }
    let n = T::of(samples.len() as f64);
    let mean = samples.iter().copied().sum::<T>() / n;
    let variance = samples.iter().map(|&s| (s - mean) * (s - mean)).sum::<T>() / n;
    let sigma = (variance / snr).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(samples
        .iter()
        .map(|&s| s + sigma * T::standard_normal(&mut rng))
        .collect())
}

/// Demodulation output: decided bits and the error-vector magnitude per
/// data subcarrier (RMS over the frames in the stream, relative to the
/// unit-energy constellation).
#[derive(Debug, Clone, PartialEq)]
pub struct Demodulated<T> {
    pub bits: Vec<u8>,
    pub subcarrier_evm: Vec<T>,
    pub evm_rms: T,
}

/// Demodulates an interleaved rail stream (a whole number of frames):
/// prefix removal, forward transform, identity equalization against the
/// known flat channel, minimum-distance decision, Gray demapping. The EVM
/// is decision-directed.
pub fn demodulate<T: SimScalar>(cfg: &OfdmConfig<T>, samples: &[T]) -> Result<Demodulated<T>> {
    let per_frame = cfg.rail_samples_per_frame();
    if samples.is_empty() || !samples.len().is_multiple_of(per_frame) {
        return Err(Error::InvalidArgument(format!(
            "stream of {} rail samples is not a positive multiple of the {} per frame",
            samples.len(),
            per_frame
        )));
    }
    let n_frames = samples.len() / per_frame;
    let modem = Modem::new(cfg)?;
    let mut bits = Vec::with_capacity(n_frames * cfg.bits_per_frame());
    let mut evm_sq = vec![T::zero(); cfg.n_data_subcarriers()];
    for frame in samples.chunks(per_frame) {
        modem.demodulate_frame(frame, &mut bits, &mut evm_sq);
    }
    let frames = T::of(n_frames as f64);
    let evm_rms = (evm_sq.iter().copied().sum::<T>()
        / (frames * T::of(cfg.n_data_subcarriers() as f64)))
    .sqrt();
    let subcarrier_evm = evm_sq.into_iter().map(|e| (e / frames).sqrt()).collect();
    Ok(Demodulated {
        bits,
        subcarrier_evm,
        evm_rms,
    })
}

/// Outcome of a Monte-Carlo run. Mergeable: partial runs over disjoint
/// frame ranges combine exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerReport<T> {
    pub n_frames: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    /// Per-subcarrier electrical SNR the run was driven with (linear).
    pub snr_used: T,
    /// Rate if every hertz carried a symbol: `B·log2(M)` (bit/s).
    pub data_rate_nominal: T,
    /// Payload rate after idle-subcarrier and prefix overhead (bit/s).
    pub data_rate_net: T,
    evm_sq_sum: T,
    evm_terms: u64,
}

impl<T: SimScalar> BerReport<T> {
    /// Measured bit error rate; 0 over an empty run.
    pub fn ber(&self) -> T {
        if self.bits_sent == 0 {
            T::zero()
        } else {
            T::of(self.bit_errors as f64) / T::of(self.bits_sent as f64)
        }
    }

    /// RMS error-vector magnitude over all data symbols.
    pub fn evm_rms(&self) -> T {
        if self.evm_terms == 0 {
            T::zero()
        } else {
            (self.evm_sq_sum / T::of(self.evm_terms as f64)).sqrt()
        }
    }

    /// The driving SNR in dB.
    pub fn snr_used_db(&self) -> T {
        T::of(10.0) * self.snr_used.log10()
    }

    /// Combines two partial runs of the same configuration and budget.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if (self.snr_used - other.snr_used).abs() > T::of(1e-12) * self.snr_used.abs().max(T::one())
        {
            return Err(Error::InvalidArgument(
                "cannot merge runs driven at different SNRs".into(),
            ));
        }
        Ok(Self {
            n_frames: self.n_frames + other.n_frames,
            bits_sent: self.bits_sent + other.bits_sent,
            bit_errors: self.bit_errors + other.bit_errors,
            snr_used: self.snr_used,
            data_rate_nominal: self.data_rate_nominal,
            data_rate_net: self.data_rate_net,
            evm_sq_sum: self.evm_sq_sum + other.evm_sq_sum,
            evm_terms: self.evm_terms + other.evm_terms,
        })
    }
}

fn random_bits<R: Rng>(rng: &mut R, n: usize) -> Vec<u8> {
    let mut bits = Vec::with_capacity(n);
    let mut word = 0u64;
    let mut avail = 0u32;
    for _ in 0..n {
        if avail == 0 {
            word = rng.gen();
            avail = 64;
        }
        bits.push((word & 1) as u8);
        word >>= 1;
        avail -= 1;
    }
    bits
}

/// Runs `n_frames` frames of random payload through the modulator, the
/// AWGN channel at the budget's SNR, and the demodulator.
///
/// The budget SNR is applied per data subcarrier: the time-domain noise is
/// scaled by `n_data/fft_len` so every occupied bin sees exactly
/// `budget.snr`. Frame `i` draws payload and noise from generator stream
/// `i + 1` of the run seed, so the report is bit-identical for a fixed
/// `(cfg, budget, n_frames, seed)` regardless of thread count.
pub fn run_link<T: SimScalar>(
    cfg: &OfdmConfig<T>,
    budget: &LinkBudget<T>,
    n_frames: u64,
    seed: u64,
) -> Result<BerReport<T>> {
    run_link_frames(cfg, budget, 0, n_frames, seed)
}

/// As [`run_link`], but over the frame index range
/// `first_frame..first_frame + n_frames`, so long runs can be resumed or
/// split into batches and [`BerReport::merge`]d exactly.
pub fn run_link_frames<T: SimScalar>(
    cfg: &OfdmConfig<T>,
    budget: &LinkBudget<T>,
    first_frame: u64,
    n_frames: u64,
    seed: u64,
) -> Result<BerReport<T>> {
    if !(budget.snr > T::zero()) || !budget.snr.is_finite() {
        return Err(Error::NoLink(format!(
            "link budget carries no usable SNR ({})",
            budget.snr
        )));
    }
    if n_frames == 0 {
        return Err(Error::InvalidArgument("n_frames must be at least 1".into()));
    }
    let modem = Modem::new(cfg)?;
    let snr_time = budget.snr * T::of(cfg.n_data_subcarriers() as f64 / cfg.fft_len() as f64);
    let noise_sigma = cfg.reference_rail_rms() / snr_time.sqrt();
    let bits_per_frame = cfg.bits_per_frame();

    let outcomes: Vec<(u64, T)> = (0..n_frames)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(first_frame + i + 1);
            let bits = random_bits(&mut rng, bits_per_frame);
            let mut rails = Vec::with_capacity(cfg.rail_samples_per_frame());
            modem.modulate_frame(&bits, &mut rails);
            for s in rails.iter_mut() {
                *s += noise_sigma * T::standard_normal(&mut rng);
            }
            let mut decided = Vec::with_capacity(bits_per_frame);
            let mut evm_sq = vec![T::zero(); cfg.n_data_subcarriers()];
            modem.demodulate_frame(&rails, &mut decided, &mut evm_sq);
            let errors = bits
                .iter()
                .zip(decided.iter())
                .filter(|(a, b)| a != b)
                .count() as u64;
            (errors, evm_sq.into_iter().sum::<T>())
        })
        .collect();

    // Sequential reduction in frame order keeps the float sums exact
    // across thread counts.
    let mut bit_errors = 0u64;
    let mut evm_sq_sum = T::zero();
    for (errors, evm) in outcomes {
        bit_errors += errors;
        evm_sq_sum += evm;
    }
    Ok(BerReport {
        n_frames,
        bits_sent: n_frames * bits_per_frame as u64,
        bit_errors,
        snr_used: budget.snr,
        data_rate_nominal: cfg.nominal_rate_bps(),
        data_rate_net: cfg.net_rate_bps(),
        evm_sq_sum,
        evm_terms: n_frames * cfg.n_data_subcarriers() as u64,
    })
}
