//! Monte Carlo estimation of codeword-error probability on the AWGN channel
//! and its comparison against the VED asymptote `Q(min_ved / sigma)`.
//!
//! Trials are independent: per-trial random streams are derived from
//! `(seed, trial index)` so the aggregate result is invariant to how trials
//! are partitioned across workers. Aggregation is a plain sum of counts.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::codes::{build_trellis, encode, ConvCode};

mod decode;
mod rng;

pub use decode::{
    decode_breadth_first, decode_breadth_first_tail, decode_list_viterbi,
    decode_list_viterbi_tail, decode_viterbi, decode_viterbi_tail, BreadthFirstOutcome,
};
pub use rng::TrialRng;

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// Received length is not a multiple of the branch label width (or a
    /// reference path disagrees with it).
    LengthMismatch { expected_multiple: usize, got: usize },
    InvalidConfig(String),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::LengthMismatch {
                expected_multiple,
                got,
            } => write!(
                f,
                "received length {got} is not a multiple of {expected_multiple}"
            ),
            SimError::InvalidConfig(detail) => write!(f, "invalid config: {detail}"),
        }
    }
}

impl std::error::Error for SimError {}

/// AWGN channel operating point. With unit symbol energy,
/// `sigma_sq = 1 / (2 rate 10^(ebno_db/10))` per dimension, from
/// `E_s = rate E_b` and `sigma^2 = N_0 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub ebno_db: f64,
    pub rate_k0: u32,
    pub rate_n0: u32,
    pub symbol_energy: f64,
    pub sigma_sq: f64,
}

impl ChannelSpec {
    pub fn new(ebno_db: f64, rate_k0: u32, rate_n0: u32) -> Self {
        let rate = rate_k0 as f64 / rate_n0 as f64;
        let sigma_sq = 1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0));
        Self {
            ebno_db,
            rate_k0,
            rate_n0,
            symbol_energy: 1.0,
            sigma_sq,
        }
    }

    pub fn for_code(ebno_db: f64, code: &ConvCode) -> Self {
        Self::new(ebno_db, 1, code.n0() as u32)
    }

    pub fn rate(&self) -> f64 {
        self.rate_k0 as f64 / self.rate_n0 as f64
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }
}

/// Standard normal tail probability `Q(x) = P(N(0,1) > x)`, evaluated
/// through the complementary error function (absolute error below 1e-12).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// The high-SNR CE asymptote `Q(ved / sigma)`.
pub fn q_asymptote(ved: f64, sigma: f64) -> f64 {
    q_function(ved / sigma)
}

/// 95% Wilson score interval half-width for `count` successes in `trials`.
pub fn wilson_half_width(count: u64, trials: u64) -> f64 {
    let z = 1.959_963_984_540_054_4_f64;
    let n = trials as f64;
    let p = count as f64 / n;
    let z2 = z * z;
    z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n)
}

/// Monte Carlo probability that Gaussian noise of variance `sigma^2` per
/// dimension lands in the CE region: the fraction of draws satisfying every
/// half-space constraint, with the 95% Wilson half-width. Only the union
/// support of the vectors is sampled; the orthogonal complement cannot
/// change any constraint.
pub fn mc_region_probability(
    problem: &crate::geometry::VedProblem,
    sigma: f64,
    trials: u64,
    seed: u64,
) -> (f64, f64) {
    let support: Vec<usize> = {
        let mut s: Vec<usize> = problem
            .vectors()
            .iter()
            .flat_map(|v| v.coords().keys().copied())
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let dim = support.len();
    let dirs: Vec<Vec<f64>> = problem
        .vectors()
        .iter()
        .map(|v| {
            let mut dense = vec![0.0; dim];
            for (&coord, &amp) in v.coords() {
                dense[support.binary_search(&coord).unwrap()] = amp;
            }
            dense
        })
        .collect();
    let rhs = problem.rhs();

    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = TrialRng::new(seed, trial);
            let noise: Vec<f64> = (0..dim).map(|_| sigma * rng.standard_normal()).collect();
            let inside = dirs.iter().zip(rhs).all(|(d, &r)| {
                let dot: f64 = d.iter().zip(&noise).map(|(a, b)| a * b).sum();
                dot >= r
            });
            u64::from(inside)
        })
        .sum();
    (hits as f64 / trials as f64, wilson_half_width(hits, trials))
}

/// Which decoder the CE simulation drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    Viterbi,
    ListViterbi,
    BreadthFirst,
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DecoderKind::Viterbi => "viterbi",
            DecoderKind::ListViterbi => "list_viterbi",
            DecoderKind::BreadthFirst => "breadth_first",
        };
        f.write_str(name)
    }
}

impl FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "viterbi" => Ok(DecoderKind::Viterbi),
            "list_viterbi" | "list" => Ok(DecoderKind::ListViterbi),
            "breadth_first" | "breadth" => Ok(DecoderKind::BreadthFirst),
            other => Err(format!("unknown decoder {other:?}")),
        }
    }
}

/// One codeword-error simulation point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub ebno_db: f64,
    pub decoder: DecoderKind,
    pub l_or_b: usize,
    pub trials: u64,
    pub ce_count: u64,
    pub p_ce: f64,
    /// 95% Wilson half-width of `p_ce`.
    pub ci95: f64,
    /// `Q(min_ved / sigma)` overlay when a minimum VED was supplied.
    pub asymptote: Option<f64>,
}

/// Configuration of a CE simulation run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub code: ConvCode,
    pub decoder: DecoderKind,
    pub l_or_b: usize,
    pub channel: ChannelSpec,
    pub info_len: usize,
    pub trials: u64,
    pub seed: u64,
    /// Minimum VED used for the asymptote overlay column.
    pub asymptote_ved: Option<f64>,
}

fn validate(cfg: &SimConfig) -> Result<(), SimError> {
    if cfg.info_len == 0 || cfg.info_len > 1_000_000 {
        return Err(SimError::InvalidConfig(format!(
            "info_len must be in 1..=1000000, got {}",
            cfg.info_len
        )));
    }
    if cfg.trials == 0 {
        return Err(SimError::InvalidConfig("trials must be >= 1".into()));
    }
    if cfg.l_or_b == 0 {
        return Err(SimError::InvalidConfig("list/survivor size must be >= 1".into()));
    }
    if cfg.decoder == DecoderKind::ListViterbi && cfg.l_or_b > 1024 {
        return Err(SimError::InvalidConfig(format!(
            "list size must be <= 1024, got {}",
            cfg.l_or_b
        )));
    }
    if !cfg.channel.ebno_db.is_finite() {
        return Err(SimError::InvalidConfig("ebno_db must be finite".into()));
    }
    Ok(())
}

/// Runs one trial: random info bits, terminated encoding, BPSK, AWGN, then
/// the configured decoder. Returns true on a codeword error: the correct
/// codeword absent from the list (list Viterbi), the correct path deleted
/// (breadth first), or any decoded mismatch over the terminated block
/// (Viterbi).
fn run_trial(cfg: &SimConfig, trellis: &crate::codes::Trellis, trial: u64) -> bool {
    let mut rng = TrialRng::new(cfg.seed, trial);
    let memory = cfg.code.memory();
    let mut transmitted: Vec<bool> = (0..cfg.info_len).map(|_| rng.next_bit()).collect();
    let coded = encode(&cfg.code, &transmitted, true);
    transmitted.extend(std::iter::repeat_n(false, memory));

    let sigma = cfg.channel.sigma();
    let amp = cfg.channel.symbol_energy.sqrt();
    let received: Vec<f64> = coded
        .iter()
        .map(|&bit| {
            let signal = if bit { -amp } else { amp };
            signal + sigma * rng.standard_normal()
        })
        .collect();

    match cfg.decoder {
        DecoderKind::Viterbi => {
            let path = decode_viterbi_tail(trellis, &received, memory)
                .expect("validated configuration");
            path != transmitted
        }
        DecoderKind::ListViterbi => {
            let list = decode_list_viterbi_tail(trellis, &received, cfg.l_or_b, memory)
                .expect("validated configuration");
            !list.contains(&transmitted)
        }
        DecoderKind::BreadthFirst => {
            let outcome =
                decode_breadth_first_tail(trellis, &received, cfg.l_or_b, &transmitted, memory)
                    .expect("validated configuration");
            outcome.reference_deleted
        }
    }
}

/// Per-trial CE flags, deterministic for a fixed `(seed, trials, config)`
/// regardless of worker count.
pub fn simulate_trials(cfg: &SimConfig) -> Result<Vec<bool>, SimError> {
    validate(cfg)?;
    let trellis = build_trellis(&cfg.code)
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    Ok((0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, &trellis, trial))
        .collect())
}

/// Estimates the CE probability and overlays the asymptote.
pub fn simulate_ce(cfg: &SimConfig) -> Result<SimResult, SimError> {
    validate(cfg)?;
    let trellis = build_trellis(&cfg.code)
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    let ce_count: u64 = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| u64::from(run_trial(cfg, &trellis, trial)))
        .sum();
    Ok(SimResult {
        ebno_db: cfg.channel.ebno_db,
        decoder: cfg.decoder,
        l_or_b: cfg.l_or_b,
        trials: cfg.trials,
        ce_count,
        p_ce: ce_count as f64 / cfg.trials as f64,
        ci95: wilson_half_width(ce_count, cfg.trials),
        asymptote: cfg
            .asymptote_ved
            .map(|ved| q_asymptote(ved, cfg.channel.sigma())),
    })
}
