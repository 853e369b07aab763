//! Half-space geometry of the codeword-error region.
//!
//! Each alternative codeword contributes a difference vector `d` from the
//! transmitted signal point. The decoder prefers that alternative exactly
//! when the noise `n` satisfies `<n, d> >= |d|^2 / 2`, the far side of the
//! hyperplane midway between the two points. The CE region for L
//! alternatives is the intersection of the L half spaces, and the VED is the
//! norm of its minimum-norm point:
//!
//! ```text
//!     minimize |n|^2   subject to   <n, d_i> >= |d_i|^2 / 2,  i = 1..L
//! ```
//!
//! [`ved`] solves this for arbitrary L with active-set quadratic programming
//! on the Gram matrix; [`ved_bruteforce`] is an independent
//! alternating-projection estimate used as an oracle; [`simplex_ved`] is the
//! closed form for the equidistant (regular simplex) configuration.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

mod brute;
mod solve;

pub use brute::ved_bruteforce;
pub use solve::{ved, Strategy};

/// Relative feasibility tolerance: constraint i counts as satisfied when
/// `<n, d_i> >= rhs[i] * (1 - REL_FEAS_TOL)`. Relative rather than absolute
/// because right-hand sides span orders of magnitude across codes.
pub const REL_FEAS_TOL: f64 = 1e-8;

/// Relative eigenvalue cutoff for rank decisions and pseudo-inverse solves
/// on (possibly singular) Gram submatrices.
pub const EIG_CUTOFF: f64 = 1e-10;

/// Errors from geometry constructors and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// A constraint system needs at least one vector.
    EmptyList,
    /// Vector `index` has zero (or non-finite) squared norm.
    ZeroVector { index: usize },
    /// No candidate active set passed the KKT checks within tolerances.
    /// Indicates tolerance misconfiguration (or an empty region, which valid
    /// code geometries never produce), not infeasibility of the solver.
    NumericalFailure { detail: String },
    /// Malformed vector-file input.
    Malformed { line: usize, detail: String },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::EmptyList => write!(f, "empty vector list"),
            GeometryError::ZeroVector { index } => {
                write!(f, "vector {index} has zero norm")
            }
            GeometryError::NumericalFailure { detail } => {
                write!(f, "numerical failure: {detail}")
            }
            GeometryError::Malformed { line, detail } => {
                write!(f, "vector file line {line}: {detail}")
            }
        }
    }
}

impl std::error::Error for GeometryError {}

/// A signal-space difference vector between an alternative codeword and the
/// transmitted one, stored sparsely by coordinate support.
///
/// Invariants held by construction: no explicit zero amplitudes, all
/// amplitudes finite, and `sq_norm > 0` (a zero difference vector is not a
/// valid alternative).
#[derive(Debug, Clone, PartialEq)]
pub struct DiffVector {
    coords: BTreeMap<usize, f64>,
    sq_norm: f64,
}

impl DiffVector {
    /// Builds a difference vector from a sparse coordinate map. Exact zero
    /// amplitudes are dropped; an empty or non-finite result is rejected.
    pub fn new(coords: BTreeMap<usize, f64>) -> Result<Self, GeometryError> {
        if coords.values().any(|a| !a.is_finite()) {
            return Err(GeometryError::ZeroVector { index: 0 });
        }
        let coords: BTreeMap<usize, f64> =
            coords.into_iter().filter(|&(_, a)| a != 0.0).collect();
        let sq_norm: f64 = coords.values().map(|a| a * a).sum();
        if sq_norm <= 0.0 || !sq_norm.is_finite() {
            return Err(GeometryError::ZeroVector { index: 0 });
        }
        Ok(Self { coords, sq_norm })
    }

    /// Builds a difference vector from dense amplitudes in coordinate order.
    pub fn from_dense(amplitudes: &[f64]) -> Result<Self, GeometryError> {
        Self::new(
            amplitudes
                .iter()
                .enumerate()
                .map(|(i, &a)| (i, a))
                .collect(),
        )
    }

    /// Sparse coordinate map (index -> amplitude).
    pub fn coords(&self) -> &BTreeMap<usize, f64> {
        &self.coords
    }

    /// Cached squared Euclidean norm.
    pub fn sq_norm(&self) -> f64 {
        self.sq_norm
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.sq_norm.sqrt()
    }

    /// Exact inner product over the intersection of the sparse supports.
    pub fn dot(&self, other: &DiffVector) -> f64 {
        // Merge-join over the two sorted maps, walking the smaller one.
        let (small, large) = if self.coords.len() <= other.coords.len() {
            (&self.coords, &other.coords)
        } else {
            (&other.coords, &self.coords)
        };
        small
            .iter()
            .filter_map(|(k, a)| large.get(k).map(|b| a * b))
            .sum()
    }

    /// Inner product with a dense point indexed by the same coordinates.
    pub fn dot_map(&self, point: &BTreeMap<usize, f64>) -> f64 {
        self.coords
            .iter()
            .filter_map(|(k, a)| point.get(k).map(|b| a * b))
            .sum()
    }
}

/// The VED quadratic-programming instance: L difference vectors, their Gram
/// matrix, and the half-space right-hand sides `rhs[i] = |d_i|^2 / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct VedProblem {
    vectors: Vec<DiffVector>,
    gram: DMatrix<f64>,
    rhs: Vec<f64>,
}

impl VedProblem {
    /// Number of constraints L.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[DiffVector] {
        &self.vectors
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }
}

/// Assembles the Gram matrix and right-hand sides for a vector set.
///
/// Inner products are exact sums over the sparse supports. Errors:
/// [`GeometryError::EmptyList`] when no vectors are given,
/// [`GeometryError::ZeroVector`] when any squared norm is not positive.
pub fn gram_of(vectors: Vec<DiffVector>) -> Result<VedProblem, GeometryError> {
    if vectors.is_empty() {
        return Err(GeometryError::EmptyList);
    }
    for (index, v) in vectors.iter().enumerate() {
        if v.sq_norm() <= 0.0 {
            return Err(GeometryError::ZeroVector { index });
        }
    }
    let l = vectors.len();
    let mut gram = DMatrix::zeros(l, l);
    for i in 0..l {
        gram[(i, i)] = vectors[i].sq_norm();
        for j in (i + 1)..l {
            let g = vectors[i].dot(&vectors[j]);
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }
    let rhs = vectors.iter().map(|v| v.sq_norm() / 2.0).collect();
    Ok(VedProblem { vectors, gram, rhs })
}

/// Dimension of the span of the input vectors: the number of Gram
/// eigenvalues exceeding `tol` times the largest eigenvalue.
///
/// The dimensionality is at most L but can be as low as 1 (all vectors
/// pointing in the same direction).
pub fn rank_of(problem: &VedProblem, tol: f64) -> usize {
    let eigenvalues = problem.gram.clone().symmetric_eigenvalues();
    let max = eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e));
    if max <= 0.0 {
        return 0;
    }
    eigenvalues.iter().filter(|&&e| e > tol * max).count()
}

/// The solved minimum-norm point of the CE region with its KKT certificate.
#[derive(Debug, Clone)]
pub struct VedSolution {
    /// Minimum Euclidean distance from the transmitted point to the region.
    pub ved: f64,
    /// `ved^2`, equal to the sum of `multipliers[i] * rhs[i]`.
    pub ved_sq: f64,
    /// Coordinates of the minimizer `n*`.
    pub nearest_point: BTreeMap<usize, f64>,
    /// Constraint indices active at `n*`, sorted ascending (0-based).
    pub active_set: Vec<usize>,
    /// Nonnegative KKT multipliers, parallel to `active_set`; the minimizer
    /// is the combination `n* = sum multipliers[i] * d_active[i]`.
    pub multipliers: Vec<f64>,
    /// Dimension of the span of the input vectors.
    pub rank: usize,
}

/// KKT residuals of a [`VedSolution`] against its [`VedProblem`], all
/// relative. Recomputed from scratch so a corrupted solution cannot
/// self-certify.
#[derive(Debug, Clone, Copy)]
pub struct KktReport {
    /// `|n* - sum multipliers[i] d_i|  /  |n*|`.
    pub stationarity: f64,
    /// Worst primal violation `max_i (rhs[i] - <n*, d_i>) / rhs[i]` (0 when
    /// feasible).
    pub feasibility: f64,
    /// Worst active-constraint slack `max_{i in active} |<n*, d_i> - rhs[i]|
    /// / rhs[i]`.
    pub complementarity: f64,
    /// Smallest multiplier (dual feasibility requires >= 0).
    pub dual_min: f64,
    /// `|ved_sq - sum multipliers[i] rhs[i]| / ved_sq`.
    pub value_gap: f64,
}

impl KktReport {
    /// True when every residual is within `tol` and multipliers are
    /// nonnegative.
    pub fn passes(&self, tol: f64) -> bool {
        self.stationarity <= tol
            && self.feasibility <= tol
            && self.complementarity <= tol
            && self.dual_min >= -tol
            && self.value_gap <= tol
    }
}

/// Recomputes the KKT residuals of `solution` for `problem`.
pub fn verify_kkt(problem: &VedProblem, solution: &VedSolution) -> KktReport {
    let vectors = problem.vectors();
    let rhs = problem.rhs();

    // Stationarity: rebuild sum multipliers[i] d_i and compare coordinates.
    let mut combo: BTreeMap<usize, f64> = BTreeMap::new();
    for (&idx, &mu) in solution.active_set.iter().zip(&solution.multipliers) {
        for (&coord, &amp) in vectors[idx].coords() {
            *combo.entry(coord).or_insert(0.0) += mu * amp;
        }
    }
    let mut diff_sq = 0.0;
    let mut norm_sq = 0.0;
    let keys: std::collections::BTreeSet<usize> = combo
        .keys()
        .chain(solution.nearest_point.keys())
        .copied()
        .collect();
    for k in keys {
        let a = combo.get(&k).copied().unwrap_or(0.0);
        let b = solution.nearest_point.get(&k).copied().unwrap_or(0.0);
        diff_sq += (a - b) * (a - b);
        norm_sq += b * b;
    }
    let stationarity = if norm_sq > 0.0 {
        (diff_sq / norm_sq).sqrt()
    } else {
        diff_sq.sqrt()
    };

    let mut feasibility = 0.0f64;
    for (i, v) in vectors.iter().enumerate() {
        let slack = v.dot_map(&solution.nearest_point);
        feasibility = feasibility.max((rhs[i] - slack) / rhs[i]);
    }

    let mut complementarity = 0.0f64;
    for &idx in &solution.active_set {
        let slack = vectors[idx].dot_map(&solution.nearest_point);
        complementarity = complementarity.max((slack - rhs[idx]).abs() / rhs[idx]);
    }

    let dual_min = solution
        .multipliers
        .iter()
        .fold(f64::INFINITY, |m, &mu| m.min(mu));

    let paid: f64 = solution
        .active_set
        .iter()
        .zip(&solution.multipliers)
        .map(|(&idx, &mu)| mu * rhs[idx])
        .sum();
    let value_gap = if solution.ved_sq > 0.0 {
        (solution.ved_sq - paid).abs() / solution.ved_sq
    } else {
        f64::INFINITY
    };

    KktReport {
        stationarity,
        feasibility,
        complementarity,
        dual_min,
        value_gap,
    }
}

/// VED of the equidistant configuration where the L+1 signal points form a
/// regular simplex with edge `delta`: the distance from a vertex to the
/// simplex centroid,
///
/// ```text
///     delta * sqrt(L / (2 (L + 1)))
/// ```
///
/// For L = 1 this reduces to `delta / 2`; L = 3 is the tetrahedron case.
pub fn simplex_ved(l: usize, delta: f64) -> f64 {
    let lf = l as f64;
    delta * (lf / (2.0 * (lf + 1.0))).sqrt()
}

/// Builds an explicit coordinate embedding of the regular-simplex difference
/// set: L vectors of norm `delta` with all pairwise inner products
/// `delta^2 / 2`. Companion to [`simplex_ved`] for exercising the general
/// solver on the closed-form family.
pub fn simplex_problem(l: usize, delta: f64) -> VedProblem {
    assert!(l >= 1, "simplex needs at least one vector");
    // d_i = scale * (e_i + alpha * ones) in R^L with alpha chosen so that
    // <d_i, d_j> / |d_i|^2 = 1/2 for i != j.
    let lf = l as f64;
    let alpha = if l == 1 {
        0.0
    } else {
        (-1.0 + (lf + 1.0).sqrt()) / lf
    };
    let base_sq = 1.0 + 2.0 * alpha + lf * alpha * alpha;
    let scale = delta / base_sq.sqrt();
    let vectors = (0..l)
        .map(|i| {
            let coords = (0..l)
                .map(|j| {
                    let e = if i == j { 1.0 } else { 0.0 };
                    (j, scale * (e + alpha))
                })
                .collect();
            DiffVector::new(coords).expect("simplex vector is nonzero")
        })
        .collect();
    gram_of(vectors).expect("simplex problem is valid")
}

/// Parses a line-oriented vector file: one vector per line,
/// whitespace-separated amplitudes, `#` starts a comment, blank lines are
/// skipped. Coordinates are dense in file order.
pub fn parse_vector_file(text: &str) -> Result<Vec<DiffVector>, GeometryError> {
    let mut vectors = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let mut amplitudes = Vec::new();
        for token in line.split_whitespace() {
            let amp: f64 = token.parse().map_err(|_| GeometryError::Malformed {
                line: lineno + 1,
                detail: format!("bad amplitude {token:?}"),
            })?;
            if !amp.is_finite() {
                return Err(GeometryError::Malformed {
                    line: lineno + 1,
                    detail: format!("non-finite amplitude {token:?}"),
                });
            }
            amplitudes.push(amp);
        }
        let v = DiffVector::from_dense(&amplitudes).map_err(|_| GeometryError::Malformed {
            line: lineno + 1,
            detail: "zero vector".to_string(),
        })?;
        vectors.push(v);
    }
    if vectors.is_empty() {
        return Err(GeometryError::EmptyList);
    }
    Ok(vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(amps: &[f64]) -> DiffVector {
        DiffVector::from_dense(amps).unwrap()
    }

    #[test]
    fn gram_single_vector() {
        let p = gram_of(vec![dense(&[2.0, 0.0])]).unwrap();
        assert_eq!(p.gram()[(0, 0)], 4.0);
        assert_eq!(p.rhs(), &[2.0]);
    }

    #[test]
    fn gram_orthogonal_pair() {
        let p = gram_of(vec![dense(&[2.0, 0.0]), dense(&[0.0, 2.0])]).unwrap();
        assert_eq!(p.gram()[(0, 0)], 4.0);
        assert_eq!(p.gram()[(0, 1)], 0.0);
        assert_eq!(p.gram()[(1, 1)], 4.0);
        assert_eq!(p.rhs(), &[2.0, 2.0]);
    }

    #[test]
    fn gram_parallel_pair() {
        let p = gram_of(vec![dense(&[2.0, 0.0]), dense(&[3.0, 0.0])]).unwrap();
        assert_eq!(p.gram()[(0, 1)], 6.0);
        assert_eq!(p.gram()[(1, 1)], 9.0);
        assert_eq!(p.rhs(), &[2.0, 4.5]);
    }

    #[test]
    fn gram_rejects_empty_and_zero() {
        assert_eq!(gram_of(vec![]), Err(GeometryError::EmptyList));
        assert!(DiffVector::from_dense(&[0.0, 0.0]).is_err());
        assert!(DiffVector::from_dense(&[f64::NAN]).is_err());
    }

    #[test]
    fn diffvector_drops_zero_amplitudes() {
        let v = dense(&[0.0, 3.0, 0.0, -4.0]);
        assert_eq!(v.coords().len(), 2);
        assert!((v.sq_norm() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn sq_norm_matches_coords() {
        let v = dense(&[1.5, -2.5, 0.25]);
        let direct: f64 = v.coords().values().map(|a| a * a).sum();
        assert!((v.sq_norm() - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn rank_parallel_is_one() {
        let p = gram_of(vec![dense(&[2.0, 0.0]), dense(&[3.0, 0.0])]).unwrap();
        assert_eq!(rank_of(&p, EIG_CUTOFF), 1);
    }

    #[test]
    fn rank_orthogonal_is_two() {
        let p = gram_of(vec![dense(&[2.0, 0.0]), dense(&[0.0, 2.0])]).unwrap();
        assert_eq!(rank_of(&p, EIG_CUTOFF), 2);
    }

    #[test]
    fn rank_tetrahedron_is_three() {
        // Gram [[1,.5,.5],[.5,1,.5],[.5,.5,1]] has eigenvalues {2, 1/2, 1/2}.
        let p = simplex_problem(3, 1.0);
        let eig = p.gram().clone().symmetric_eigenvalues();
        let mut eig: Vec<f64> = eig.iter().copied().collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((eig[0] - 2.0).abs() < 1e-9);
        assert!((eig[1] - 0.5).abs() < 1e-9);
        assert!((eig[2] - 0.5).abs() < 1e-9);
        assert_eq!(rank_of(&p, EIG_CUTOFF), 3);
    }

    #[test]
    fn simplex_ved_closed_form() {
        assert!((simplex_ved(1, 2.0) - 1.0).abs() < 1e-12);
        assert!((simplex_ved(3, 1.0) - (3.0f64 / 8.0).sqrt()).abs() < 1e-12);
        assert!((simplex_ved(2, 1.0) - 1.0 / 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn simplex_problem_has_expected_gram() {
        for l in 1..=8 {
            let p = simplex_problem(l, 1.5);
            for i in 0..l {
                assert!((p.gram()[(i, i)] - 2.25).abs() < 1e-10);
                for j in 0..l {
                    if i != j {
                        assert!((p.gram()[(i, j)] - 1.125).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn parse_vector_file_basic() {
        let text = "# demo\n2 0\n0 2  # trailing comment\n\n";
        let vs = parse_vector_file(text).unwrap();
        assert_eq!(vs.len(), 2);
        assert_eq!(vs[0].sq_norm(), 4.0);
        assert_eq!(vs[1].coords().get(&1), Some(&2.0));
    }

    #[test]
    fn parse_vector_file_errors() {
        assert_eq!(parse_vector_file(""), Err(GeometryError::EmptyList));
        assert_eq!(parse_vector_file("# only\n"), Err(GeometryError::EmptyList));
        assert!(matches!(
            parse_vector_file("1 x 2"),
            Err(GeometryError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_vector_file("1 1\n0 0"),
            Err(GeometryError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_vector_file("inf"),
            Err(GeometryError::Malformed { line: 1, .. })
        ));
    }
}
