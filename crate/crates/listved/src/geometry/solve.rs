//! Active-set solution of the min-norm-point program.
//!
//! For a candidate active set A the KKT system is the Gram subsystem
//! `gram[A] mult = rhs[A]`; the minimizer is `n* = sum mult[i] d_i` and the
//! squared distance is `mult . rhs[A]`. A candidate is optimal iff the
//! multipliers are nonnegative and `n*` satisfies every inactive constraint.
//! Rank-deficient subsystems are solved with an eigen-decomposition
//! pseudo-inverse (relative cutoff [`EIG_CUTOFF`]), which yields the
//! minimum-norm multiplier vector for duplicate or parallel constraints.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{
    rank_of, GeometryError, VedProblem, VedSolution, EIG_CUTOFF, REL_FEAS_TOL,
};

/// Per-constraint relative tolerance for treating an active constraint as
/// satisfied with equality.
const ACTIVE_EQ_TOL: f64 = 1e-8;

/// Relative threshold below which a multiplier is considered zero.
const MULT_ZERO_TOL: f64 = 1e-10;

/// How the candidate active sets are explored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Enumerate all nonempty active sets in order of increasing cardinality
    /// (then lexicographic) and keep the feasible KKT point of minimum norm,
    /// ties broken by the lexicographically smallest active set. Intended
    /// for L <= 20.
    Exhaustive,
    /// Active-set iteration for large L: add the most-violated constraint
    /// (lowest index on ties), step toward the active subsystem's equality
    /// solution clipping at the first multiplier that would turn negative,
    /// with an iteration cap of 50 L.
    Iterative,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "iterative" => Ok(Strategy::Iterative),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

/// Computes the minimum-norm point of the CE region and its KKT
/// certificate.
///
/// Both strategies return the same distance to 1e-8 relative; `Exhaustive`
/// additionally guarantees the lexicographic tie-break on degenerate active
/// sets. Fails with [`GeometryError::NumericalFailure`] when no candidate
/// passes the KKT checks within tolerances.
pub fn ved(problem: &VedProblem, strategy: Strategy) -> Result<VedSolution, GeometryError> {
    if problem.is_empty() {
        return Err(GeometryError::EmptyList);
    }
    if strategy == Strategy::Exhaustive && problem.len() > 20 {
        return Err(GeometryError::NumericalFailure {
            detail: format!(
                "exhaustive strategy enumerates 2^L active sets and is limited to L <= 20 \
                 (got {}); use the iterative strategy",
                problem.len()
            ),
        });
    }
    match strategy {
        Strategy::Exhaustive => ved_exhaustive(problem),
        Strategy::Iterative => ved_iterative(problem),
    }
}

/// Multipliers for one candidate subset, from the pseudo-inverse of the
/// Gram subsystem plus one iterative-refinement step.
fn solve_subset(gram: &DMatrix<f64>, rhs: &[f64], subset: &[usize]) -> Vec<f64> {
    let k = subset.len();
    let mut g = DMatrix::zeros(k, k);
    for (a, &i) in subset.iter().enumerate() {
        for (b, &j) in subset.iter().enumerate() {
            g[(a, b)] = gram[(i, j)];
        }
    }
    let r = DVector::from_iterator(k, subset.iter().map(|&i| rhs[i]));
    let eig = SymmetricEigen::new(g.clone());
    let max_eig = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, &e| m.max(e.abs()));
    let cutoff = EIG_CUTOFF * max_eig;

    let apply_pinv = |v: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::zeros(k);
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > cutoff {
                let col = eig.eigenvectors.column(idx);
                out += col * (col.dot(v) / lambda);
            }
        }
        out
    };

    let mut mult = apply_pinv(&r);
    let residual = &r - &g * &mult;
    mult += apply_pinv(&residual);
    mult.iter().copied().collect()
}

/// Slacks `<n*, d_j>` for all constraints given subset multipliers.
fn full_slacks(gram: &DMatrix<f64>, subset: &[usize], mult: &[f64]) -> Vec<f64> {
    let l = gram.nrows();
    let mut slacks = vec![0.0; l];
    for (pos, &i) in subset.iter().enumerate() {
        let mu = mult[pos];
        if mu != 0.0 {
            for (row, s) in slacks.iter_mut().enumerate() {
                *s += mu * gram[(row, i)];
            }
        }
    }
    slacks
}

struct Candidate {
    subset: Vec<usize>,
    mult: Vec<f64>,
    slacks: Vec<f64>,
    value: f64,
}

/// KKT-checks one subset; returns the accepted candidate if it certifies
/// optimality.
fn check_candidate(
    gram: &DMatrix<f64>,
    rhs: &[f64],
    subset: &[usize],
) -> Option<Candidate> {
    let raw = solve_subset(gram, rhs, subset);
    let scale = raw.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if raw.iter().any(|&mu| mu < -MULT_ZERO_TOL * scale) {
        return None;
    }
    let mult: Vec<f64> = raw.iter().map(|&mu| mu.max(0.0)).collect();
    let slacks = full_slacks(gram, subset, &mult);

    // Primal feasibility everywhere.
    for (j, &s) in slacks.iter().enumerate() {
        if s < rhs[j] * (1.0 - REL_FEAS_TOL) {
            return None;
        }
    }
    // Complementary slackness where the multiplier is meaningfully positive.
    for (pos, &i) in subset.iter().enumerate() {
        if mult[pos] > MULT_ZERO_TOL * scale
            && (slacks[i] - rhs[i]).abs() > ACTIVE_EQ_TOL * rhs[i]
        {
            return None;
        }
    }
    let value = subset
        .iter()
        .zip(&mult)
        .map(|(&i, &mu)| mu * rhs[i])
        .sum();
    Some(Candidate {
        subset: subset.to_vec(),
        mult,
        slacks,
        value,
    })
}

fn build_solution(problem: &VedProblem, cand: Candidate) -> VedSolution {
    // Report only constraints that are genuinely tight; a zero-multiplier
    // member of the candidate subset with slack is simply inactive.
    let mut active_set = Vec::new();
    let mut multipliers = Vec::new();
    for (pos, &i) in cand.subset.iter().enumerate() {
        let tight = (cand.slacks[i] - problem.rhs()[i]).abs() <= ACTIVE_EQ_TOL * problem.rhs()[i];
        if cand.mult[pos] > 0.0 || tight {
            active_set.push(i);
            multipliers.push(cand.mult[pos]);
        }
    }
    let mut nearest_point: BTreeMap<usize, f64> = BTreeMap::new();
    for (&i, &mu) in active_set.iter().zip(&multipliers) {
        if mu != 0.0 {
            for (&coord, &amp) in problem.vectors()[i].coords() {
                *nearest_point.entry(coord).or_insert(0.0) += mu * amp;
            }
        }
    }
    let ved_sq: f64 = active_set
        .iter()
        .zip(&multipliers)
        .map(|(&i, &mu)| mu * problem.rhs()[i])
        .sum();
    VedSolution {
        ved: ved_sq.sqrt(),
        ved_sq,
        nearest_point,
        active_set,
        multipliers,
        rank: rank_of(problem, EIG_CUTOFF),
    }
}

/// Visits all k-subsets of 0..l in lexicographic order.
fn visit_combinations(l: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == 0 || k > l {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < l - k + i {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn ved_exhaustive(problem: &VedProblem) -> Result<VedSolution, GeometryError> {
    let l = problem.len();
    let gram = problem.gram();
    let rhs = problem.rhs();
    let mut best: Option<Candidate> = None;
    for k in 1..=l {
        visit_combinations(l, k, &mut |subset| {
            if let Some(cand) = check_candidate(gram, rhs, subset) {
                best = match best.take() {
                    None => Some(cand),
                    Some(incumbent) => {
                        let better = cand.value < incumbent.value * (1.0 - 1e-12);
                        let tie_smaller = cand.value <= incumbent.value * (1.0 + 1e-12)
                            && cand.subset < incumbent.subset;
                        if better || tie_smaller {
                            Some(cand)
                        } else {
                            Some(incumbent)
                        }
                    }
                };
            }
        });
    }
    match best {
        Some(cand) => Ok(build_solution(problem, cand)),
        None => Err(GeometryError::NumericalFailure {
            detail: format!("no active set of {l} constraints passed the KKT checks"),
        }),
    }
}

/// Regularized solve of the active Gram subsystem. The tiny ridge keeps
/// rank-deficient subsets (duplicate or parallel constraints) solvable; an
/// inconsistent right-hand side then surfaces as a negative multiplier,
/// which the clipped step handles.
fn solve_subset_ridge(gram: &DMatrix<f64>, rhs: &[f64], subset: &[usize]) -> Vec<f64> {
    let k = subset.len();
    let mut g = DMatrix::zeros(k, k);
    let mut max_diag = 0.0f64;
    for (a, &i) in subset.iter().enumerate() {
        for (b, &j) in subset.iter().enumerate() {
            g[(a, b)] = gram[(i, j)];
        }
        max_diag = max_diag.max(gram[(i, i)]);
    }
    let ridge = 1e-12 * max_diag;
    for a in 0..k {
        g[(a, a)] += ridge;
    }
    let r = DVector::from_iterator(k, subset.iter().map(|&i| rhs[i]));
    match g.clone().cholesky() {
        Some(chol) => chol.solve(&r).iter().copied().collect(),
        None => solve_subset(gram, rhs, subset),
    }
}

fn ved_iterative(problem: &VedProblem) -> Result<VedSolution, GeometryError> {
    let l = problem.len();
    let gram = problem.gram();
    let rhs = problem.rhs();

    // Active-set iteration on the dual program min_{mu >= 0}
    // 1/2 mu' G mu - rhs' mu: add the constraint with the largest
    // rhs-normalized violation (lowest index on ties), then step toward the
    // equality solution of the active subsystem, clipping at the first
    // multiplier that would go negative and retiring it. The clipped step
    // decreases the dual objective monotonically, which prevents cycling.
    let mut mu = vec![0.0; l];
    let mut active: Vec<usize> = Vec::new();
    let cap = 50 * l;
    let mut solves = 0usize;

    loop {
        let subset: Vec<usize> = (0..l).collect();
        let slacks = full_slacks(gram, &subset, &mu);
        let mut add: Option<usize> = None;
        let mut worst = REL_FEAS_TOL;
        for j in 0..l {
            if active.binary_search(&j).is_ok() {
                continue;
            }
            let violation = (rhs[j] - slacks[j]) / rhs[j];
            if violation > worst {
                worst = violation;
                add = Some(j);
            }
        }
        let Some(j) = add else {
            let mult: Vec<f64> = active.iter().map(|&i| mu[i]).collect();
            let value = active.iter().zip(&mult).map(|(&i, &m)| m * rhs[i]).sum();
            let cand = Candidate {
                subset: active,
                mult,
                slacks,
                value,
            };
            return Ok(build_solution(problem, cand));
        };
        let pos = active.binary_search(&j).unwrap_err();
        active.insert(pos, j);

        loop {
            solves += 1;
            if solves > cap {
                return Err(GeometryError::NumericalFailure {
                    detail: format!("active-set iteration exceeded {cap} steps"),
                });
            }
            let z = solve_subset_ridge(gram, rhs, &active);
            let scale = z.iter().fold(1e-300f64, |m, &x| m.max(x.abs()));
            if z.iter().all(|&zi| zi >= -MULT_ZERO_TOL * scale) {
                for (p, &i) in active.iter().enumerate() {
                    mu[i] = z[p].max(0.0);
                }
                break;
            }
            // Largest feasible step toward z keeping mu >= 0.
            let mut alpha = 1.0f64;
            for (p, &i) in active.iter().enumerate() {
                if z[p] < 0.0 {
                    let denom = mu[i] - z[p];
                    if denom > 0.0 {
                        alpha = alpha.min(mu[i] / denom);
                    }
                }
            }
            for (p, &i) in active.iter().enumerate() {
                mu[i] = (mu[i] + alpha * (z[p] - mu[i])).max(0.0);
            }
            let max_mu = active.iter().fold(0.0f64, |m, &i| m.max(mu[i]));
            let keep_tol = 1e-14 * max_mu;
            for &i in &active {
                if mu[i] <= keep_tol {
                    mu[i] = 0.0;
                }
            }
            active.retain(|&i| mu[i] > 0.0);
            if active.is_empty() {
                // All multipliers were clipped away; restart from the
                // freshly added constraint alone.
                active.push(j);
                mu[j] = 0.0;
            }
        }
    }
}
