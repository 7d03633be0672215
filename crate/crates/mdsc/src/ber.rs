//! Monte-Carlo bit-error-rate evaluation over the AWGN channel: BPSK
//! modulation, a normalized min-sum message-passing decoder, and a
//! deterministic frame-parallel simulation driver.
//!
//! Determinism contract: every frame's noise comes from its own
//! counter-seeded generator derived from `(master seed, sweep index,
//! frame index)`, and cross-frame aggregation uses integer sums only, so
//! a sweep's results are bit-identical for any worker count and any
//! scheduling order. Stopping decisions are taken at fixed batch
//! boundaries for the same reason.

use crate::block::BinaryMatrix;
use crate::{Error, Result};
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Tuning for the message-passing decoder.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecoderConfig {
    /// Maximum message-passing iterations per frame.
    pub max_iterations: usize,
    /// Scaling applied to check-to-bit messages, in `(0, 1]`.
    pub normalization: f64,
    /// Stop as soon as the running hard decision satisfies every check.
    pub early_stop: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            max_iterations: 50,
            normalization: 0.75,
            early_stop: true,
        }
    }
}

impl DecoderConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Validation(
                "decoder needs at least one iteration".into(),
            ));
        }
        if !(self.normalization > 0.0 && self.normalization <= 1.0) {
            return Err(Error::Validation(format!(
                "normalization must lie in (0, 1], got {}",
                self.normalization
            )));
        }
        Ok(())
    }
}

/// Magnitude used where a check has no extrinsic neighbors (degree-one
/// checks pin their only bit); large but finite so message arithmetic
/// never produces infinities or NaNs.
const PINNED_MAGNITUDE: f64 = 1e30;

/// What a decode attempt produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// The final hard decision satisfies every parity check.
    pub converged: bool,
    /// Message-passing iterations actually run.
    pub iterations: usize,
}

/// Normalized min-sum decoder with a flooding schedule, built once per
/// parity-check matrix and reused across frames.
///
/// Edges are stored grouped by check; `bit_edges` lets the bit-side
/// update visit the same storage grouped by bit.
#[derive(Debug, Clone)]
pub struct MinSumDecoder<F = crate::DefaultScalar> {
    n_checks: usize,
    n_bits: usize,
    /// Bit endpoint of each edge, grouped by check.
    edge_bit: Vec<u32>,
    /// Edge run of check `c` is `check_offsets[c]..check_offsets[c + 1]`.
    check_offsets: Vec<u32>,
    /// Edge indices incident to each bit, grouped by bit.
    bit_edges: Vec<u32>,
    /// Edge-index run of bit `v` is `bit_offsets[v]..bit_offsets[v + 1]`.
    bit_offsets: Vec<u32>,
    config: DecoderConfig,
    alpha: F,
    pinned: F,
}

/// Per-frame working buffers for [`MinSumDecoder::decode`]; allocate once
/// and reuse across frames.
#[derive(Debug, Clone)]
pub struct DecoderScratch<F> {
    bit_to_check: Vec<F>,
    check_to_bit: Vec<F>,
    /// Posterior log-likelihood ratio of each bit after the last iteration.
    pub totals: Vec<F>,
    /// Hard decision of each bit (0 or 1) after the last iteration.
    pub hard: Vec<u8>,
}

impl<F: Float> MinSumDecoder<F> {
    pub fn new(h: &BinaryMatrix, config: DecoderConfig) -> Result<Self> {
        config.validate()?;
        let n_checks = h.n_rows();
        let n_bits = h.n_cols();
        if n_bits == 0 {
            return Err(Error::Validation(
                "parity-check matrix has no columns".into(),
            ));
        }
        let n_edges = h.ones();
        if u32::try_from(n_edges).is_err() {
            return Err(Error::Validation(format!(
                "matrix has {n_edges} edges; decoder supports at most u32::MAX"
            )));
        }
        let mut edge_bit = Vec::with_capacity(n_edges);
        let mut check_offsets = Vec::with_capacity(n_checks + 1);
        check_offsets.push(0u32);
        for c in 0..n_checks {
            edge_bit.extend_from_slice(h.row(c));
            check_offsets.push(edge_bit.len() as u32);
        }
        // Invert the grouping: edge lists per bit, in edge-index order.
        let mut degree = vec![0u32; n_bits];
        for &v in &edge_bit {
            degree[v as usize] += 1;
        }
        let mut bit_offsets = Vec::with_capacity(n_bits + 1);
        bit_offsets.push(0u32);
        for v in 0..n_bits {
            bit_offsets.push(bit_offsets[v] + degree[v]);
        }
        let mut cursor: Vec<u32> = bit_offsets[..n_bits].to_vec();
        let mut bit_edges = vec![0u32; n_edges];
        for (e, &v) in edge_bit.iter().enumerate() {
            bit_edges[cursor[v as usize] as usize] = e as u32;
            cursor[v as usize] += 1;
        }
        let alpha = F::from(config.normalization).ok_or_else(|| {
            Error::Validation("normalization is not representable in the scalar type".into())
        })?;
        let pinned = F::from(PINNED_MAGNITUDE).ok_or_else(|| {
            Error::Validation("scalar type cannot represent the pinning magnitude".into())
        })?;
        Ok(MinSumDecoder {
            n_checks,
            n_bits,
            edge_bit,
            check_offsets,
            bit_edges,
            bit_offsets,
            config,
            alpha,
            pinned,
        })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    /// Fresh working buffers sized for this decoder.
    pub fn scratch(&self) -> DecoderScratch<F> {
        DecoderScratch {
            bit_to_check: vec![F::zero(); self.edge_bit.len()],
            check_to_bit: vec![F::zero(); self.edge_bit.len()],
            totals: vec![F::zero(); self.n_bits],
            hard: vec![0u8; self.n_bits],
        }
    }

    fn hard_decision_satisfies_checks(&self, hard: &[u8]) -> bool {
        (0..self.n_checks).all(|c| {
            let lo = self.check_offsets[c] as usize;
            let hi = self.check_offsets[c + 1] as usize;
            self.edge_bit[lo..hi]
                .iter()
                .fold(0u8, |acc, &v| acc ^ hard[v as usize])
                == 0
        })
    }

    /// Run message passing on one frame of channel log-likelihood ratios
    /// (positive favors bit 0). The hard decision and posteriors are left
    /// in `scratch`.
    pub fn decode(&self, channel_llr: &[F], scratch: &mut DecoderScratch<F>) -> DecodeOutcome {
        assert_eq!(channel_llr.len(), self.n_bits, "llr length mismatch");
        let v2c = &mut scratch.bit_to_check;
        let c2v = &mut scratch.check_to_bit;
        for (v, &llr) in channel_llr.iter().enumerate() {
            let lo = self.bit_offsets[v] as usize;
            let hi = self.bit_offsets[v + 1] as usize;
            for &e in &self.bit_edges[lo..hi] {
                v2c[e as usize] = llr;
            }
            scratch.totals[v] = llr;
            scratch.hard[v] = u8::from(llr < F::zero());
        }
        let mut iterations = 0;
        while iterations < self.config.max_iterations {
            iterations += 1;
            // Check-side update: normalized min-sum via the two smallest
            // magnitudes and the overall sign parity of each check.
            for c in 0..self.n_checks {
                let lo = self.check_offsets[c] as usize;
                let hi = self.check_offsets[c + 1] as usize;
                if lo == hi {
                    continue;
                }
                let mut min1 = self.pinned;
                let mut min2 = self.pinned;
                let mut arg1 = lo;
                let mut negatives = 0u32;
                for (e, m) in v2c[lo..hi].iter().enumerate() {
                    let mag = m.abs();
                    if *m < F::zero() {
                        negatives ^= 1;
                    }
                    if mag < min1 {
                        min2 = min1;
                        min1 = mag;
                        arg1 = lo + e;
                    } else if mag < min2 {
                        min2 = mag;
                    }
                }
                for e in lo..hi {
                    let mag = if e == arg1 { min2 } else { min1 };
                    let flip = negatives ^ u32::from(v2c[e] < F::zero());
                    let out = self.alpha * mag;
                    c2v[e] = if flip == 1 { -out } else { out };
                }
            }
            // Bit-side update and hard decision.
            for (v, &llr) in channel_llr.iter().enumerate() {
                let lo = self.bit_offsets[v] as usize;
                let hi = self.bit_offsets[v + 1] as usize;
                let mut total = llr;
                for &e in &self.bit_edges[lo..hi] {
                    total = total + c2v[e as usize];
                }
                scratch.totals[v] = total;
                scratch.hard[v] = u8::from(total < F::zero());
                for &e in &self.bit_edges[lo..hi] {
                    v2c[e as usize] = total - c2v[e as usize];
                }
            }
            if self.config.early_stop && self.hard_decision_satisfies_checks(&scratch.hard) {
                return DecodeOutcome {
                    converged: true,
                    iterations,
                };
            }
        }
        DecodeOutcome {
            converged: self.hard_decision_satisfies_checks(&scratch.hard),
            iterations,
        }
    }
}

/// `true` iff `H x = 0` over GF(2); `bits` holds one 0/1 value per column.
pub fn syndrome_check(h: &BinaryMatrix, bits: &[u8]) -> Result<bool> {
    if bits.len() != h.n_cols() {
        return Err(Error::Validation(format!(
            "word length {} does not match {} columns",
            bits.len(),
            h.n_cols()
        )));
    }
    if let Some(bad) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::Validation(format!("word entry {bad} is not a bit")));
    }
    Ok((0..h.n_rows()).all(|r| h.row(r).iter().fold(0u8, |acc, &v| acc ^ bits[v as usize]) == 0))
}

/// When to end one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StopRule {
    /// Frame budget per sweep point; rounded down to a whole number of
    /// batches (at least one batch always runs).
    pub max_frames: u64,
    /// End the point at the next batch boundary once this many frame
    /// errors have accumulated; 0 disables error-triggered stopping.
    pub min_frame_errors: u64,
}

/// Frames per scheduling batch. Stopping decisions are only taken at
/// batch boundaries so they depend on frame indices alone, never on
/// worker count or completion order.
pub const FRAME_BATCH: u64 = 128;

/// Measurements for one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BerPoint {
    /// Eb/N0 in dB.
    pub snr_db: f64,
    /// Frames simulated.
    pub frames: u64,
    /// Bits per frame (the code length).
    pub frame_bits: u64,
    /// Total wrong bits across all frames.
    pub bit_errors: u64,
    /// Frames with at least one wrong bit.
    pub frame_errors: u64,
    /// Sum of squared per-frame bit-error counts; carries the frame-level
    /// dispersion needed for a bit-error-rate confidence interval.
    pub bit_errors_squared: u64,
    /// `bit_errors / (frames * frame_bits)`.
    pub ber: f64,
    /// `frame_errors / frames`.
    pub fer: f64,
    /// Master seed the point was generated from.
    pub seed: u64,
}

impl BerPoint {
    fn from_totals(
        snr_db: f64,
        frames: u64,
        frame_bits: u64,
        totals: FrameTotals,
        seed: u64,
    ) -> BerPoint {
        BerPoint {
            snr_db,
            frames,
            frame_bits,
            bit_errors: totals.bit_errors,
            frame_errors: totals.frame_errors,
            bit_errors_squared: totals.bit_errors_squared,
            ber: totals.bit_errors as f64 / (frames as f64 * frame_bits as f64),
            fer: totals.frame_errors as f64 / frames as f64,
            seed,
        }
    }

    /// 95% Wilson score interval on the frame-error rate.
    pub fn fer_interval(&self) -> (f64, f64) {
        wilson_interval(self.frame_errors, self.frames)
    }

    /// 95% normal-approximation interval on the bit-error rate, treating
    /// per-frame bit-error counts as the independent samples (bits inside
    /// one frame are correlated, frames are not).
    pub fn ber_interval(&self) -> (f64, f64) {
        if self.frames < 2 {
            return (0.0, 1.0);
        }
        let n = self.frames as f64;
        let mean = self.bit_errors as f64 / n;
        let variance = (self.bit_errors_squared as f64 - n * mean * mean).max(0.0) / (n - 1.0);
        let half = 1.959_963_984_540_054 * (variance / n).sqrt();
        let scale = self.frame_bits as f64;
        (
            ((mean - half) / scale).max(0.0),
            ((mean + half) / scale).min(1.0),
        )
    }
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (Z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // The bounds are exactly 0 (or 1) at the extremes; rounding in the
    // expressions above would otherwise leave them a few ulps off.
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, Default)]
struct FrameTotals {
    bit_errors: u64,
    frame_errors: u64,
    bit_errors_squared: u64,
}

impl FrameTotals {
    fn merge(self, other: FrameTotals) -> FrameTotals {
        FrameTotals {
            bit_errors: self.bit_errors + other.bit_errors,
            frame_errors: self.frame_errors + other.frame_errors,
            bit_errors_squared: self.bit_errors_squared + other.bit_errors_squared,
        }
    }

    fn from_frame(wrong_bits: u64) -> FrameTotals {
        FrameTotals {
            bit_errors: wrong_bits,
            frame_errors: u64::from(wrong_bits > 0),
            bit_errors_squared: wrong_bits * wrong_bits,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based per-frame seed: a pure function of the master seed, the
/// sweep index, and the frame index.
fn frame_seed(master: u64, sweep_index: usize, frame: u64) -> u64 {
    let keyed = splitmix64(master ^ (sweep_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix64(keyed ^ frame.wrapping_mul(0xBF58_476D_1CE4_E5B9))
}

/// Noise standard deviation for BPSK with unit symbol energy at the given
/// Eb/N0 (dB) and code rate: `sigma^2 = 1 / (2 * rate * 10^(snr/10))`.
fn noise_sigma(snr_db: f64, rate: f64) -> f64 {
    (1.0 / (2.0 * rate * 10f64.powf(snr_db / 10.0))).sqrt()
}

fn validate_sweep(sweep: &[f64], rate: f64) -> Result<()> {
    if sweep.is_empty() {
        return Err(Error::Validation("empty sweep".into()));
    }
    if sweep.iter().any(|s| !s.is_finite()) {
        return Err(Error::Validation(
            "sweep contains a non-finite value".into(),
        ));
    }
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::Validation(format!(
            "rate must lie in (0, 1], got {rate}"
        )));
    }
    Ok(())
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Validation(format!("cannot build worker pool: {e}")))
}

/// Run batches of frames through `frame_totals` until the stop rule says
/// to end the point; returns the final totals and frame count.
fn run_point<T>(pool: &rayon::ThreadPool, stop: &StopRule, frame_totals: T) -> (FrameTotals, u64)
where
    T: Fn(u64) -> FrameTotals + Sync,
{
    use rayon::prelude::*;
    let batches = (stop.max_frames / FRAME_BATCH).max(1);
    let mut totals = FrameTotals::default();
    let mut frames = 0u64;
    for batch in 0..batches {
        let start = batch * FRAME_BATCH;
        let batch_totals = pool.install(|| {
            (start..start + FRAME_BATCH)
                .into_par_iter()
                .map(&frame_totals)
                .reduce(FrameTotals::default, FrameTotals::merge)
        });
        totals = totals.merge(batch_totals);
        frames += FRAME_BATCH;
        if stop.min_frame_errors > 0 && totals.frame_errors >= stop.min_frame_errors {
            break;
        }
    }
    (totals, frames)
}

/// Simulate BPSK transmission of the all-zero codeword of `h` over AWGN
/// across the Eb/N0 sweep, decoding with normalized min-sum.
///
/// `rate` is the code's design rate, used for noise scaling. `workers`
/// sizes the worker pool (0 picks the machine default); results are
/// identical for every choice.
pub fn simulate(
    h: &BinaryMatrix,
    sweep: &[f64],
    rate: f64,
    decoder_config: DecoderConfig,
    stop: StopRule,
    seed: u64,
    workers: usize,
) -> Result<Vec<BerPoint>> {
    validate_sweep(sweep, rate)?;
    let decoder: MinSumDecoder = MinSumDecoder::new(h, decoder_config)?;
    let n_bits = decoder.n_bits();
    let pool = thread_pool(workers)?;
    let mut points = Vec::with_capacity(sweep.len());
    for (sweep_index, &snr_db) in sweep.iter().enumerate() {
        let sigma = noise_sigma(snr_db, rate);
        let llr_scale = 2.0 / (sigma * sigma);
        let noise = Normal::new(0.0, sigma)
            .map_err(|e| Error::Validation(format!("invalid noise level: {e}")))?;
        let run_frame = |frame: u64| -> FrameTotals {
            let mut rng = ChaCha8Rng::seed_from_u64(frame_seed(seed, sweep_index, frame));
            let mut scratch = decoder.scratch();
            let llr: Vec<f64> = (0..n_bits)
                .map(|_| llr_scale * (1.0 + noise.sample(&mut rng)))
                .collect();
            decoder.decode(&llr, &mut scratch);
            let wrong = scratch.hard.iter().map(|&b| u64::from(b)).sum::<u64>();
            FrameTotals::from_frame(wrong)
        };
        let (totals, frames) = run_point(&pool, &stop, run_frame);
        points.push(BerPoint::from_totals(
            snr_db,
            frames,
            n_bits as u64,
            totals,
            seed,
        ));
    }
    Ok(points)
}

/// Simulate uncoded BPSK over AWGN (hard detection, no decoder) with
/// `frame_bits` bits per frame; the analytic bit-error probability is the
/// Gaussian tail at `sqrt(2 * Eb/N0)`.
pub fn simulate_uncoded(
    frame_bits: usize,
    sweep: &[f64],
    stop: StopRule,
    seed: u64,
    workers: usize,
) -> Result<Vec<BerPoint>> {
    validate_sweep(sweep, 1.0)?;
    if frame_bits == 0 {
        return Err(Error::Validation(
            "frames must hold at least one bit".into(),
        ));
    }
    let pool = thread_pool(workers)?;
    let mut points = Vec::with_capacity(sweep.len());
    for (sweep_index, &snr_db) in sweep.iter().enumerate() {
        let sigma = noise_sigma(snr_db, 1.0);
        let noise = Normal::new(0.0, sigma)
            .map_err(|e| Error::Validation(format!("invalid noise level: {e}")))?;
        let run_frame = |frame: u64| -> FrameTotals {
            let mut rng = ChaCha8Rng::seed_from_u64(frame_seed(seed, sweep_index, frame));
            let wrong = (0..frame_bits)
                .filter(|_| 1.0 + noise.sample(&mut rng) < 0.0)
                .count() as u64;
            FrameTotals::from_frame(wrong)
        };
        let (totals, frames) = run_point(&pool, &stop, run_frame);
        points.push(BerPoint::from_totals(
            snr_db,
            frames,
            frame_bits as u64,
            totals,
            seed,
        ));
    }
    Ok(points)
}
