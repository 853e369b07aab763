//! Binary feedforward convolutional codes and their trellis error events.
//!
//! Codes are rate 1/n0 with one input bit per step. The encoder state holds
//! the last `memory` input bits with the most recent at bit 0, so the
//! transition is `next = ((state << 1) | bit) mod 2^memory`. Generators use
//! the standard octal notation with the most-significant tap on the current
//! input bit. Each trellis branch carries an n0-bit label with generator i's
//! output at bit i; serialized output writes each label MSB first.
//!
//! Error events are trellis paths diverging from the all-zero path at step 0
//! (the uniform error property of linear codes with BPSK lets the all-zero
//! reference stand for any transmitted codeword). A merged event returns to
//! the zero state exactly at its last step; an unmerged event is truncated
//! at the decision depth while still apart. Time diversity is reintroduced
//! later through per-event coordinate offsets.

use std::fmt;

use crate::geometry::DiffVector;

/// Event count cap for [`enumerate_events`].
pub const DEFAULT_EVENT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeError {
    /// Trellis construction refuses more than 2^20 states.
    MemoryTooLarge { memory: usize },
    /// Event enumeration exceeded the configured cap.
    Explosion { cap: usize },
    /// Malformed code specification string or inconsistent parameters.
    InvalidSpec(String),
}

impl fmt::Display for CodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeError::MemoryTooLarge { memory } => {
                write!(f, "memory {memory} exceeds the trellis limit of 20")
            }
            CodeError::Explosion { cap } => {
                write!(f, "event enumeration exceeded the cap of {cap}")
            }
            CodeError::InvalidSpec(detail) => write!(f, "invalid code spec: {detail}"),
        }
    }
}

impl std::error::Error for CodeError {}

/// A rate-1/n0 binary feedforward convolutional code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvCode {
    generators: Vec<u32>,
    memory: usize,
}

impl ConvCode {
    /// Builds a code from decoded generator tap masks (MSB = current input)
    /// and the encoder memory (constraint length minus one).
    pub fn new(generators: Vec<u32>, memory: usize) -> Result<Self, CodeError> {
        if generators.is_empty() {
            return Err(CodeError::InvalidSpec("no generators".into()));
        }
        if generators.len() > 32 {
            return Err(CodeError::InvalidSpec(format!(
                "at most 32 generators fit a branch label, got {}",
                generators.len()
            )));
        }
        if memory == 0 || memory > 60 {
            return Err(CodeError::InvalidSpec(format!(
                "memory must be in 1..=60, got {memory}"
            )));
        }
        if memory < 31 {
            for &g in &generators {
                if g >> (memory + 1) != 0 {
                    return Err(CodeError::InvalidSpec(format!(
                        "generator {g:o} (octal) does not fit in {} taps",
                        memory + 1
                    )));
                }
            }
        }
        Ok(Self { generators, memory })
    }

    /// Parses the specification string `rate=1/2 gens=5,7 mem=2`; generators
    /// are always octal. All three keys are required; unknown keys and
    /// inconsistent values are rejected.
    pub fn from_spec(spec: &str) -> Result<Self, CodeError> {
        let mut rate: Option<(u32, u32)> = None;
        let mut gens: Option<Vec<u32>> = None;
        let mut mem: Option<usize> = None;
        for token in spec.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| CodeError::InvalidSpec(format!("expected key=value, got {token:?}")))?;
            match key {
                "rate" => {
                    let (num, den) = value.split_once('/').ok_or_else(|| {
                        CodeError::InvalidSpec(format!("rate must be k/n, got {value:?}"))
                    })?;
                    let num: u32 = num
                        .parse()
                        .map_err(|_| CodeError::InvalidSpec(format!("bad rate numerator {num:?}")))?;
                    let den: u32 = den
                        .parse()
                        .map_err(|_| CodeError::InvalidSpec(format!("bad rate denominator {den:?}")))?;
                    if rate.replace((num, den)).is_some() {
                        return Err(CodeError::InvalidSpec("duplicate rate key".into()));
                    }
                }
                "gens" => {
                    let masks = value
                        .split(',')
                        .map(|g| {
                            u32::from_str_radix(g, 8).map_err(|_| {
                                CodeError::InvalidSpec(format!("bad octal generator {g:?}"))
                            })
                        })
                        .collect::<Result<Vec<u32>, CodeError>>()?;
                    if gens.replace(masks).is_some() {
                        return Err(CodeError::InvalidSpec("duplicate gens key".into()));
                    }
                }
                "mem" => {
                    let m: usize = value
                        .parse()
                        .map_err(|_| CodeError::InvalidSpec(format!("bad memory {value:?}")))?;
                    if mem.replace(m).is_some() {
                        return Err(CodeError::InvalidSpec("duplicate mem key".into()));
                    }
                }
                other => {
                    return Err(CodeError::InvalidSpec(format!("unknown key {other:?}")));
                }
            }
        }
        let gens = gens.ok_or_else(|| CodeError::InvalidSpec("missing gens".into()))?;
        let mem = mem.ok_or_else(|| CodeError::InvalidSpec("missing mem".into()))?;
        let (num, den) = rate.ok_or_else(|| CodeError::InvalidSpec("missing rate".into()))?;
        if num != 1 {
            return Err(CodeError::InvalidSpec(format!(
                "only rate-1/n codes are supported, got {num}/{den}"
            )));
        }
        if den as usize != gens.len() {
            return Err(CodeError::InvalidSpec(format!(
                "rate 1/{den} does not match {} generators",
                gens.len()
            )));
        }
        Self::new(gens, mem)
    }

    /// Canonical specification string, octal generators.
    pub fn spec_string(&self) -> String {
        let gens: Vec<String> = self.generators.iter().map(|g| format!("{g:o}")).collect();
        format!(
            "rate=1/{} gens={} mem={}",
            self.generators.len(),
            gens.join(","),
            self.memory
        )
    }

    /// Output bits per input step.
    pub fn n0(&self) -> usize {
        self.generators.len()
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    /// Code rate k0/n0 with k0 fixed at 1.
    pub fn rate(&self) -> f64 {
        1.0 / self.generators.len() as f64
    }

    /// Tap masks reversed to align with the time-indexed register
    /// (bit j of the register is the input j steps ago).
    fn reversed_generators(&self) -> Vec<u64> {
        let width = self.memory as u32 + 1;
        self.generators
            .iter()
            .map(|&g| (g as u64).reverse_bits() >> (64 - width))
            .collect()
    }
}

/// The n0-bit branch label for a register value (current input at bit 0,
/// the input j steps ago at bit j), generator i at bit i.
fn branch_label(rev_gens: &[u64], register: u64) -> u32 {
    let mut label = 0u32;
    for (i, &g) in rev_gens.iter().enumerate() {
        label |= ((register & g).count_ones() & 1) << i;
    }
    label
}

/// The j-th serialized output bit of an n0-bit label (MSB first).
pub fn label_bit(label: u32, n0: usize, j: usize) -> bool {
    (label >> (n0 - 1 - j)) & 1 == 1
}

/// Encodes `bits` through the feedforward register; `terminate` appends
/// `memory` zero input bits to flush the state back to zero.
pub fn encode(code: &ConvCode, bits: &[bool], terminate: bool) -> Vec<bool> {
    let rev_gens = code.reversed_generators();
    let n0 = code.n0();
    let mask = (1u64 << code.memory) - 1;
    let tail = if terminate { code.memory } else { 0 };
    let mut out = Vec::with_capacity((bits.len() + tail) * n0);
    let mut state = 0u64;
    for step in 0..bits.len() + tail {
        let input = if step < bits.len() { bits[step] as u64 } else { 0 };
        let label = branch_label(&rev_gens, (state << 1) | input);
        for j in 0..n0 {
            out.push(label_bit(label, n0, j));
        }
        state = ((state << 1) | input) & mask;
    }
    out
}

/// One branch of the code trellis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Branch {
    pub next: u32,
    pub label: u32,
    pub weight: u32,
}

/// The full state-transition table: 2^memory states, two branches per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trellis {
    n0: usize,
    memory: usize,
    branches: Vec<[Branch; 2]>,
}

impl Trellis {
    pub fn num_states(&self) -> usize {
        self.branches.len()
    }

    pub fn num_branches(&self) -> usize {
        2 * self.branches.len()
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn branch(&self, state: usize, input: usize) -> Branch {
        self.branches[state][input]
    }
}

/// Builds the trellis with transition `next = ((state << 1) | bit) mod
/// 2^memory` and branch labels from the generators.
pub fn build_trellis(code: &ConvCode) -> Result<Trellis, CodeError> {
    if code.memory > 20 {
        return Err(CodeError::MemoryTooLarge {
            memory: code.memory,
        });
    }
    let rev_gens = code.reversed_generators();
    let num_states = 1usize << code.memory;
    let mask = num_states as u32 - 1;
    let branches = (0..num_states as u32)
        .map(|state| {
            [0u32, 1u32].map(|input| {
                let label = branch_label(&rev_gens, ((state as u64) << 1) | input as u64);
                Branch {
                    next: ((state << 1) | input) & mask,
                    label,
                    weight: label.count_ones(),
                }
            })
        })
        .collect();
    Ok(Trellis {
        n0: code.n0(),
        memory: code.memory,
        branches,
    })
}

/// A trellis error event relative to the all-zero path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorEvent {
    /// Input bit sequence, starting with the divergence bit 1. Merged events
    /// end with the `memory` zero inputs that flush the state.
    pub input_bits: Vec<bool>,
    /// Coded output, `steps * n0` bits.
    pub output_bits: Vec<bool>,
    /// Hamming weight of the output.
    pub weight: u32,
    /// True when the path re-merges with the zero state at its last step;
    /// false for an open path truncated at the decision depth.
    pub merged: bool,
    /// Trellis branches spanned.
    pub steps: usize,
}

/// Enumerates all distinct events diverging at step 0 with output weight at
/// most `max_weight` and at most `max_steps` branches. Merged events end at
/// the zero state without touching it earlier; with `include_unmerged`, open
/// paths of exactly `max_steps` steps ending in a nonzero state are included
/// (weight counted over emitted bits only). Sorted by (weight, steps,
/// input bits).
pub fn enumerate_events(
    code: &ConvCode,
    max_weight: u32,
    max_steps: usize,
    include_unmerged: bool,
) -> Result<Vec<ErrorEvent>, CodeError> {
    enumerate_events_capped(code, max_weight, max_steps, include_unmerged, DEFAULT_EVENT_CAP)
}

/// [`enumerate_events`] with an explicit event-count cap.
pub fn enumerate_events_capped(
    code: &ConvCode,
    max_weight: u32,
    max_steps: usize,
    include_unmerged: bool,
    cap: usize,
) -> Result<Vec<ErrorEvent>, CodeError> {
    if max_steps > 64 {
        return Err(CodeError::InvalidSpec(format!(
            "event enumeration supports at most 64 steps, got {max_steps}"
        )));
    }
    let trellis = build_trellis(code)?;
    let mut events = Vec::new();
    if max_steps == 0 {
        return Ok(events);
    }
    let first = trellis.branch(0, 1);
    if first.weight <= max_weight {
        let mut inputs = vec![true];
        let mut outputs = label_bits(first.label, trellis.n0());
        dfs_events(
            &trellis,
            first.next,
            first.weight,
            max_weight,
            max_steps,
            include_unmerged,
            cap,
            &mut inputs,
            &mut outputs,
            &mut events,
        )?;
    }
    events.sort_by(|a, b| {
        (a.weight, a.steps, &a.input_bits).cmp(&(b.weight, b.steps, &b.input_bits))
    });
    Ok(events)
}

fn label_bits(label: u32, n0: usize) -> Vec<bool> {
    (0..n0).map(|j| label_bit(label, n0, j)).collect()
}

#[allow(clippy::too_many_arguments)]
fn dfs_events(
    trellis: &Trellis,
    state: u32,
    weight: u32,
    max_weight: u32,
    max_steps: usize,
    include_unmerged: bool,
    cap: usize,
    inputs: &mut Vec<bool>,
    outputs: &mut Vec<bool>,
    events: &mut Vec<ErrorEvent>,
) -> Result<(), CodeError> {
    if state == 0 {
        record_event(events, inputs, outputs, weight, true, cap)?;
        return Ok(());
    }
    if inputs.len() == max_steps {
        if include_unmerged {
            record_event(events, inputs, outputs, weight, false, cap)?;
        }
        return Ok(());
    }
    for input in 0..2usize {
        let branch = trellis.branch(state as usize, input);
        if weight + branch.weight > max_weight {
            continue;
        }
        inputs.push(input == 1);
        let n0 = trellis.n0();
        for j in 0..n0 {
            outputs.push(label_bit(branch.label, n0, j));
        }
        dfs_events(
            trellis,
            branch.next,
            weight + branch.weight,
            max_weight,
            max_steps,
            include_unmerged,
            cap,
            inputs,
            outputs,
            events,
        )?;
        inputs.pop();
        outputs.truncate(outputs.len() - n0);
    }
    Ok(())
}

fn record_event(
    events: &mut Vec<ErrorEvent>,
    inputs: &[bool],
    outputs: &[bool],
    weight: u32,
    merged: bool,
    cap: usize,
) -> Result<(), CodeError> {
    if events.len() >= cap {
        return Err(CodeError::Explosion { cap });
    }
    events.push(ErrorEvent {
        input_bits: inputs.to_vec(),
        output_bits: outputs.to_vec(),
        weight,
        merged,
        steps: inputs.len(),
    });
    Ok(())
}

/// Minimum Hamming weight over merged error events, by uniform-cost search
/// over the trellis graph (the zero state is entered only as the terminal).
pub fn free_distance(code: &ConvCode) -> u32 {
    let trellis = build_trellis(code).expect("free_distance requires memory <= 20");
    let num_states = trellis.num_states();
    let mut dist = vec![u32::MAX; num_states];
    let mut heap = std::collections::BinaryHeap::new();
    let first = trellis.branch(0, 1);
    dist[first.next as usize] = first.weight;
    heap.push(std::cmp::Reverse((first.weight, first.next)));
    let mut best = u32::MAX;
    while let Some(std::cmp::Reverse((w, state))) = heap.pop() {
        if w > dist[state as usize] || w >= best {
            continue;
        }
        for input in 0..2usize {
            let branch = trellis.branch(state as usize, input);
            let nw = w + branch.weight;
            if branch.next == 0 {
                best = best.min(nw);
            } else if nw < dist[branch.next as usize] {
                dist[branch.next as usize] = nw;
                heap.push(std::cmp::Reverse((nw, branch.next)));
            }
        }
    }
    best
}

/// BPSK mapping with symbol energy E_s: bit b goes to amplitude
/// `(1 - 2b) sqrt(E_s)`, so a differing coded bit contributes squared
/// distance `4 E_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalMapping {
    pub symbol_energy: f64,
}

impl Default for SignalMapping {
    fn default() -> Self {
        Self { symbol_energy: 1.0 }
    }
}

/// Maps an event to its signal-space difference vector at a step offset:
/// support on coordinates `offset * n0 + j` where output bit j is set, each
/// with amplitude `-2 sqrt(E_s)` (alternative minus transmitted, transmitted
/// bit 0). The squared norm is `4 E_s weight`, independent of offset.
pub fn event_to_diff(event: &ErrorEvent, mapping: SignalMapping, offset: usize) -> DiffVector {
    let n0 = event.output_bits.len() / event.steps;
    let amp = -2.0 * mapping.symbol_energy.sqrt();
    let coords = event
        .output_bits
        .iter()
        .enumerate()
        .filter(|&(_, &bit)| bit)
        .map(|(j, _)| (offset * n0 + j, amp))
        .collect();
    DiffVector::new(coords).expect("events have positive weight")
}
