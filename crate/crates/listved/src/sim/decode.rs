//! Trellis decoders over BPSK correlation metrics.
//!
//! All decoders maximize the correlation between the received samples and
//! the branch signals, which on the AWGN channel orders paths by likelihood.
//! The `zero_tail` variants restrict the last steps to the zero-input branch
//! so that terminated blocks are decoded over codewords only; the plain
//! entry points decode unconstrained paths.

#![allow(clippy::needless_range_loop)]

use crate::codes::{label_bit, Trellis};

use super::SimError;

fn validate_received(trellis: &Trellis, received: &[f64]) -> Result<usize, SimError> {
    let n0 = trellis.n0();
    if !received.len().is_multiple_of(n0) {
        return Err(SimError::LengthMismatch {
            expected_multiple: n0,
            got: received.len(),
        });
    }
    if received.iter().any(|r| !r.is_finite()) {
        return Err(SimError::InvalidConfig("non-finite received sample".into()));
    }
    Ok(received.len() / n0)
}

fn branch_metric(label: u32, n0: usize, samples: &[f64]) -> f64 {
    let mut metric = 0.0;
    for (j, &r) in samples.iter().enumerate() {
        metric += if label_bit(label, n0, j) { -r } else { r };
    }
    metric
}

/// Maximum-likelihood path by add-compare-select. Metric ties prefer the
/// lower predecessor state (the zero-branch side).
pub fn decode_viterbi(trellis: &Trellis, received: &[f64]) -> Result<Vec<bool>, SimError> {
    decode_viterbi_tail(trellis, received, 0)
}

/// [`decode_viterbi`] with the final `zero_tail` steps forced to the
/// zero-input branch (terminated blocks).
pub fn decode_viterbi_tail(
    trellis: &Trellis,
    received: &[f64],
    zero_tail: usize,
) -> Result<Vec<bool>, SimError> {
    let steps = validate_received(trellis, received)?;
    if zero_tail > steps {
        return Err(SimError::InvalidConfig(format!(
            "zero tail {zero_tail} exceeds {steps} steps"
        )));
    }
    let ns = trellis.num_states();
    let n0 = trellis.n0();
    let mut metric = vec![f64::NEG_INFINITY; ns];
    let mut next_metric = vec![f64::NEG_INFINITY; ns];
    metric[0] = 0.0;
    let mut parents = vec![u32::MAX; steps * ns];

    for step in 0..steps {
        let samples = &received[step * n0..(step + 1) * n0];
        let max_input = if step >= steps - zero_tail { 1 } else { 2 };
        next_metric.iter_mut().for_each(|m| *m = f64::NEG_INFINITY);
        let parent = &mut parents[step * ns..(step + 1) * ns];
        for state in 0..ns {
            if metric[state] == f64::NEG_INFINITY {
                continue;
            }
            for input in 0..max_input {
                let branch = trellis.branch(state, input);
                let m = metric[state] + branch_metric(branch.label, n0, samples);
                let target = branch.next as usize;
                if m > next_metric[target] {
                    next_metric[target] = m;
                    parent[target] = state as u32;
                }
            }
        }
        std::mem::swap(&mut metric, &mut next_metric);
    }

    let mut best_state = 0;
    let mut best = f64::NEG_INFINITY;
    for (state, &m) in metric.iter().enumerate() {
        if m > best {
            best = m;
            best_state = state;
        }
    }
    let mut path = vec![false; steps];
    let mut state = best_state;
    for step in (0..steps).rev() {
        path[step] = state & 1 == 1;
        state = parents[step * ns + state] as usize;
    }
    Ok(path)
}

#[derive(Clone, Copy)]
struct ListEntry {
    metric: f64,
    prev_state: u32,
    prev_rank: u16,
}

/// The L globally best distinct paths by correlation metric (parallel list
/// Viterbi with per-state rank lists), sorted by descending metric with
/// ties broken by path bits ascending.
pub fn decode_list_viterbi(
    trellis: &Trellis,
    received: &[f64],
    l: usize,
) -> Result<Vec<Vec<bool>>, SimError> {
    decode_list_viterbi_tail(trellis, received, l, 0)
}

/// [`decode_list_viterbi`] over terminated blocks: the final `zero_tail`
/// steps take only the zero-input branch.
pub fn decode_list_viterbi_tail(
    trellis: &Trellis,
    received: &[f64],
    l: usize,
    zero_tail: usize,
) -> Result<Vec<Vec<bool>>, SimError> {
    if l == 0 || l > 1024 {
        return Err(SimError::InvalidConfig(format!(
            "list size must be in 1..=1024, got {l}"
        )));
    }
    let steps = validate_received(trellis, received)?;
    if zero_tail > steps {
        return Err(SimError::InvalidConfig(format!(
            "zero tail {zero_tail} exceeds {steps} steps"
        )));
    }
    let ns = trellis.num_states();
    let n0 = trellis.n0();

    // lists[step][state] holds up to L entries sorted by descending metric.
    let mut lists: Vec<Vec<Vec<ListEntry>>> = Vec::with_capacity(steps + 1);
    let mut initial = vec![Vec::new(); ns];
    initial[0].push(ListEntry {
        metric: 0.0,
        prev_state: u32::MAX,
        prev_rank: 0,
    });
    lists.push(initial);

    for step in 0..steps {
        let samples = &received[step * n0..(step + 1) * n0];
        let max_input = if step >= steps - zero_tail { 1 } else { 2 };
        let mut next: Vec<Vec<ListEntry>> = vec![Vec::new(); ns];
        for state in 0..ns {
            for (rank, entry) in lists[step][state].iter().enumerate() {
                for input in 0..max_input {
                    let branch = trellis.branch(state, input);
                    next[branch.next as usize].push(ListEntry {
                        metric: entry.metric + branch_metric(branch.label, n0, samples),
                        prev_state: state as u32,
                        prev_rank: rank as u16,
                    });
                }
            }
        }
        for state_list in &mut next {
            state_list.sort_by(|a, b| {
                b.metric
                    .partial_cmp(&a.metric)
                    .unwrap()
                    .then_with(|| (a.prev_state, a.prev_rank).cmp(&(b.prev_state, b.prev_rank)))
            });
            state_list.truncate(l);
        }
        lists.push(next);
    }

    // Any globally top-L path ranks within the top L of its own end state,
    // so gathering every surviving entry is exhaustive.
    let mut finals: Vec<(f64, Vec<bool>)> = Vec::new();
    for state in 0..ns {
        for rank in 0..lists[steps][state].len() {
            let metric = lists[steps][state][rank].metric;
            let mut path = vec![false; steps];
            let mut s = state;
            let mut r = rank;
            for step in (0..steps).rev() {
                path[step] = s & 1 == 1;
                let entry = lists[step + 1][s][r];
                s = entry.prev_state as usize;
                r = entry.prev_rank as usize;
            }
            finals.push((metric, path));
        }
    }
    finals.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| a.1.cmp(&b.1))
    });
    finals.truncate(l);
    Ok(finals.into_iter().map(|(_, path)| path).collect())
}

/// Per-step record of a breadth-first detection run.
#[derive(Debug, Clone)]
pub struct BreadthFirstOutcome {
    /// Best surviving path at the end.
    pub best_path: Vec<bool>,
    /// True when the reference path left the survivor set.
    pub reference_deleted: bool,
    /// First step (0-based) at which the reference prefix was no longer a
    /// survivor.
    pub deleted_at: Option<usize>,
    /// Survivor states per step in rank order.
    pub survivor_trace: Vec<Vec<u32>>,
}

/// Breadth-first (M-algorithm) detection: extend every survivor, merge per
/// state, keep the B best paths across all states. Metric ties are broken by
/// path bits ascending. Reports whether and when `reference` was deleted.
pub fn decode_breadth_first(
    trellis: &Trellis,
    received: &[f64],
    b: usize,
    reference: &[bool],
) -> Result<BreadthFirstOutcome, SimError> {
    decode_breadth_first_tail(trellis, received, b, reference, 0)
}

/// [`decode_breadth_first`] over terminated blocks.
pub fn decode_breadth_first_tail(
    trellis: &Trellis,
    received: &[f64],
    b: usize,
    reference: &[bool],
    zero_tail: usize,
) -> Result<BreadthFirstOutcome, SimError> {
    if b == 0 {
        return Err(SimError::InvalidConfig("survivor count must be >= 1".into()));
    }
    let steps = validate_received(trellis, received)?;
    if reference.len() != steps {
        return Err(SimError::LengthMismatch {
            expected_multiple: trellis.n0(),
            got: reference.len() * trellis.n0(),
        });
    }
    if zero_tail > steps {
        return Err(SimError::InvalidConfig(format!(
            "zero tail {zero_tail} exceeds {steps} steps"
        )));
    }
    let n0 = trellis.n0();

    struct Survivor {
        metric: f64,
        state: u32,
        path: Vec<bool>,
    }
    let mut survivors = vec![Survivor {
        metric: 0.0,
        state: 0,
        path: Vec::new(),
    }];
    let mut reference_deleted = false;
    let mut deleted_at = None;
    let mut survivor_trace = Vec::with_capacity(steps);

    for step in 0..steps {
        let samples = &received[step * n0..(step + 1) * n0];
        let max_input = if step >= steps - zero_tail { 1 } else { 2 };
        let mut extended: Vec<Survivor> = Vec::with_capacity(survivors.len() * 2);
        for survivor in &survivors {
            for input in 0..max_input {
                let branch = trellis.branch(survivor.state as usize, input);
                let mut path = survivor.path.clone();
                path.push(input == 1);
                extended.push(Survivor {
                    metric: survivor.metric + branch_metric(branch.label, n0, samples),
                    state: branch.next,
                    path,
                });
            }
        }
        // Per-state add-compare-select, then the global B-cut; both resolve
        // metric ties toward the lexicographically smaller path.
        extended.sort_by(|a, b| {
            a.state
                .cmp(&b.state)
                .then_with(|| b.metric.partial_cmp(&a.metric).unwrap())
                .then_with(|| a.path.cmp(&b.path))
        });
        extended.dedup_by(|worse, kept| worse.state == kept.state);
        extended.sort_by(|a, b| {
            b.metric
                .partial_cmp(&a.metric)
                .unwrap()
                .then_with(|| a.path.cmp(&b.path))
        });
        extended.truncate(b);
        survivors = extended;
        survivor_trace.push(survivors.iter().map(|s| s.state).collect());
        if !reference_deleted {
            let prefix = &reference[..step + 1];
            if !survivors.iter().any(|s| s.path == prefix) {
                reference_deleted = true;
                deleted_at = Some(step);
            }
        }
    }

    Ok(BreadthFirstOutcome {
        best_path: survivors[0].path.clone(),
        reference_deleted,
        deleted_at,
        survivor_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_trellis, encode, ConvCode};

    fn nasa_57() -> ConvCode {
        ConvCode::from_spec("rate=1/2 gens=5,7 mem=2").unwrap()
    }

    fn bpsk(bits: &[bool]) -> Vec<f64> {
        bits.iter().map(|&b| if b { -1.0 } else { 1.0 }).collect()
    }

    #[test]
    fn viterbi_noiseless_zero() {
        let code = nasa_57();
        let trellis = build_trellis(&code).unwrap();
        let received = bpsk(&[false; 16]);
        let path = decode_viterbi(&trellis, &received).unwrap();
        assert!(path.iter().all(|&b| !b));
    }

    #[test]
    fn viterbi_recovers_noiseless_input() {
        let code = nasa_57();
        let trellis = build_trellis(&code).unwrap();
        let info = [true, false, true, true, false, false, true, false];
        let coded = encode(&code, &info, true);
        let path = decode_viterbi_tail(&trellis, &bpsk(&coded), code.memory()).unwrap();
        assert_eq!(&path[..info.len()], &info);
        assert!(path[info.len()..].iter().all(|&b| !b));
    }

    #[test]
    fn viterbi_decodes_event_not_zero() {
        // Received exactly at the weight-5 event: ML picks that codeword.
        let code = nasa_57();
        let trellis = build_trellis(&code).unwrap();
        let event_input = [true, false, false, false];
        let coded = encode(&code, &event_input, false);
        let path = decode_viterbi(&trellis, &bpsk(&coded)).unwrap();
        assert_eq!(&path[..], &event_input);
    }

    #[test]
    fn viterbi_length_mismatch() {
        let trellis = build_trellis(&nasa_57()).unwrap();
        assert!(matches!(
            decode_viterbi(&trellis, &[1.0, 1.0, 1.0]),
            Err(SimError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn list_one_equals_viterbi() {
        let code = nasa_57();
        let trellis = build_trellis(&code).unwrap();
        let info = [true, true, false, true, false, false];
        let coded = encode(&code, &info, true);
        let mut received = bpsk(&coded);
        // Mild deterministic perturbation keeps metrics tie-free.
        for (i, r) in received.iter_mut().enumerate() {
            *r += 0.11 * ((i * 37 % 17) as f64 - 8.0) / 17.0;
        }
        let single = decode_viterbi(&trellis, &received).unwrap();
        let list = decode_list_viterbi(&trellis, &received, 1).unwrap();
        assert_eq!(list, vec![single]);
    }

    #[test]
    fn list_second_best_on_noiseless_zero() {
        // 8 unconstrained steps: the runner-up is the path diverging at the
        // last step, the minimal-weight competitor (one weight-2 branch).
        let code = nasa_57();
        let trellis = build_trellis(&code).unwrap();
        let received = bpsk(&[false; 16]);
        let list = decode_list_viterbi(&trellis, &received, 2).unwrap();
        assert_eq!(list.len(), 2);
        assert!(list[0].iter().all(|&b| !b));
        let mut competitor = vec![false; 8];
        competitor[7] = true;
        assert_eq!(list[1], competitor);
    }

    #[test]
    fn list_exhausts_all_paths() {
        let code = nasa_57();
        let trellis = build_trellis(&code).unwrap();
        let received = bpsk(&[false; 6]); // 3 steps, 8 paths
        let list = decode_list_viterbi(&trellis, &received, 1024).unwrap();
        assert_eq!(list.len(), 8);
        let mut sorted = list.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 8, "paths must be distinct");
    }

    #[test]
    fn breadth_full_frontier_keeps_reference_noiseless() {
        let code = nasa_57();
        let trellis = build_trellis(&code).unwrap();
        let info = [true, false, false, true, false, false];
        let coded = encode(&code, &info, false);
        let outcome = decode_breadth_first(&trellis, &bpsk(&coded), 4, &info).unwrap();
        assert!(!outcome.reference_deleted);
        assert_eq!(outcome.best_path, info);
    }

    #[test]
    fn breadth_b1_noiseless_zero_stays_zero() {
        let code = nasa_57();
        let trellis = build_trellis(&code).unwrap();
        let reference = vec![false; 8];
        let outcome =
            decode_breadth_first(&trellis, &bpsk(&[false; 16]), 1, &reference).unwrap();
        assert!(!outcome.reference_deleted);
        assert!(outcome.best_path.iter().all(|&b| !b));
        assert_eq!(outcome.survivor_trace.len(), 8);
        assert!(outcome.survivor_trace.iter().all(|t| t.len() == 1));
    }

    #[test]
    fn breadth_midpoint_tie_keeps_zero_path() {
        // Received midway between the zero codeword and the weight-5 event:
        // every prefix metric ties, and the bits-ascending rule keeps the
        // all-zero path as the B = 1 survivor.
        let code = nasa_57();
        let trellis = build_trellis(&code).unwrap();
        let event = encode(&code, &[true, false, false], false);
        let zero = vec![false; 6];
        let received: Vec<f64> = event
            .iter()
            .zip(&zero)
            .map(|(&a, &b)| {
                let sa = if a { -1.0 } else { 1.0 };
                let sb = if b { -1.0 } else { 1.0 };
                (sa + sb) / 2.0
            })
            .collect();
        let reference = vec![false; 3];
        let outcome = decode_breadth_first(&trellis, &received, 1, &reference).unwrap();
        assert!(!outcome.reference_deleted, "tie must resolve to the zero path");
        assert_eq!(outcome.best_path, reference);
    }

    #[test]
    fn breadth_reports_deletion_step() {
        // Received pinned to the weight-5 event: with B = 1 the zero path is
        // deleted at the divergence step.
        let code = nasa_57();
        let trellis = build_trellis(&code).unwrap();
        let event = encode(&code, &[true, false, false], false);
        let reference = vec![false; 3];
        let outcome = decode_breadth_first(&trellis, &bpsk(&event), 1, &reference).unwrap();
        assert!(outcome.reference_deleted);
        assert_eq!(outcome.deleted_at, Some(0));
    }
}
