//! Exemplar clustering by affinity propagation.
//!
//! Points exchange two kinds of damped real-valued messages over a similarity
//! matrix: responsibilities (how well suited `k` is to represent `i`) and
//! availabilities (how appropriate it is for `i` to choose `k`). After the
//! exemplar set stabilises, every point is assigned to its most similar
//! exemplar. The diagonal of the matrix holds the preferences, which control
//! how readily a point becomes an exemplar.
//!
//! [`brute_force_exemplars`] maximises the same net-similarity objective by
//! exhaustive enumeration and serves as the test oracle on small instances.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::rng;

/// Dense symmetric similarity matrix. Off-diagonal entries hold pairwise
/// similarities; the diagonal holds the preferences.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn zeros(n: usize) -> Self {
        SimilarityMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.n + col] = value;
    }

    /// Sets both `[i][k]` and `[k][i]`.
    pub fn set_pair(&mut self, i: usize, k: usize, value: f64) {
        self.set(i, k, value);
        self.set(k, i, value);
    }

    pub fn set_diagonal(&mut self, preferences: &[f64]) {
        debug_assert_eq!(preferences.len(), self.n);
        for (k, &p) in preferences.iter().enumerate() {
            self.set(k, k, p);
        }
    }

    /// All off-diagonal entries, row-major.
    pub fn off_diagonal(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1));
        for i in 0..self.n {
            for k in 0..self.n {
                if i != k {
                    out.push(self.get(i, k));
                }
            }
        }
        out
    }
}

/// How the preference vector (matrix diagonal) is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PreferenceMode {
    /// Median of the off-diagonal similarities (lower of the middle two for
    /// even counts); zero for a single point.
    MedianOffDiagonal,
    /// The same fixed value for every point.
    Fixed(f64),
}

/// Message-passing controls.
#[derive(Debug, Clone, PartialEq)]
pub struct ApParams {
    /// Damping factor in `[0.5, 1.0)`.
    pub damping: f64,
    pub max_iter: usize,
    /// Number of consecutive iterations with an unchanged, non-empty exemplar
    /// set that declares convergence.
    pub convergence_iter: usize,
    pub preference: PreferenceMode,
    /// When set, a deterministic perturbation of relative magnitude
    /// `jitter_scale` is added to every matrix entry before iterating, to
    /// break degeneracies.
    pub jitter_seed: Option<u64>,
    /// Relative jitter magnitude, scaled by the matrix value range.
    pub jitter_scale: f64,
}

impl Default for ApParams {
    fn default() -> Self {
        ApParams {
            damping: 0.5,
            max_iter: 200,
            convergence_iter: 15,
            preference: PreferenceMode::MedianOffDiagonal,
            jitter_seed: None,
            jitter_scale: 1e-9,
        }
    }
}

impl ApParams {
    pub fn validate(&self) -> Result<(), ApError> {
        if !(0.5..1.0).contains(&self.damping) {
            return Err(ApError::InvalidParams("damping must be in [0.5, 1.0)"));
        }
        if self.max_iter == 0 || self.convergence_iter == 0 {
            return Err(ApError::InvalidParams(
                "max_iter and convergence_iter must be positive",
            ));
        }
        if self.convergence_iter > self.max_iter {
            return Err(ApError::InvalidParams("convergence_iter must be <= max_iter"));
        }
        if self.jitter_scale.is_nan() || self.jitter_scale < 0.0 {
            return Err(ApError::InvalidParams("jitter_scale must be non-negative"));
        }
        if let PreferenceMode::Fixed(v) = self.preference {
            if !v.is_finite() {
                return Err(ApError::InvalidParams("fixed preference must be finite"));
            }
        }
        Ok(())
    }
}

/// Result of one clustering run. Every label is a member of `exemplars` and
/// every exemplar labels itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApResult {
    pub labels: Vec<usize>,
    /// Ascending exemplar indices; non-empty whenever the matrix is.
    pub exemplars: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ApError {
    EmptyMatrix,
    NonFinite { row: usize, col: usize },
    Asymmetric { row: usize, col: usize },
    InvalidParams(&'static str),
}

impl fmt::Display for ApError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApError::EmptyMatrix => write!(f, "similarity matrix is empty"),
            ApError::NonFinite { row, col } => {
                write!(f, "non-finite similarity at [{row}][{col}]")
            }
            ApError::Asymmetric { row, col } => {
                write!(f, "similarity matrix asymmetric at [{row}][{col}]")
            }
            ApError::InvalidParams(what) => write!(f, "invalid parameters: {what}"),
        }
    }
}

impl core::error::Error for ApError {}

/// Computes the preference vector for a matrix whose off-diagonal entries are
/// already filled.
pub fn compute_preference(s: &SimilarityMatrix, mode: PreferenceMode) -> Vec<f64> {
    match mode {
        PreferenceMode::Fixed(v) => vec![v; s.n()],
        PreferenceMode::MedianOffDiagonal => {
            let n = s.n();
            if n <= 1 {
                return vec![0.0; n];
            }
            let mut values = s.off_diagonal();
            values.sort_by(f64::total_cmp);
            // Lower of the middle two for even counts.
            let median = values[(values.len() - 1) / 2];
            vec![median; n]
        }
    }
}

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Runs damped affinity-propagation message passing over `s`.
///
/// Non-convergence within `max_iter` is not an error: the result is returned
/// with `converged == false`. If no point ends with positive evidence
/// `r(k,k) + a(k,k)`, the single point maximising that evidence becomes the
/// sole exemplar, so the result always carries at least one exemplar.
pub fn ap_cluster(s: &SimilarityMatrix, params: &ApParams) -> Result<ApResult, ApError> {
    params.validate()?;
    let n = s.n();
    if n == 0 {
        return Err(ApError::EmptyMatrix);
    }
    for row in 0..n {
        for col in 0..n {
            if !s.get(row, col).is_finite() {
                return Err(ApError::NonFinite { row, col });
            }
        }
    }
    for row in 0..n {
        for col in (row + 1)..n {
            if (s.get(row, col) - s.get(col, row)).abs() > SYMMETRY_TOLERANCE {
                return Err(ApError::Asymmetric { row, col });
            }
        }
    }
    if n == 1 {
        return Ok(ApResult {
            labels: vec![0],
            exemplars: vec![0],
            converged: true,
            iterations: 0,
        });
    }

    let mut sim = s.data.clone();
    if let Some(seed) = params.jitter_seed {
        apply_jitter(&mut sim, params.jitter_scale, seed);
    }

    let damping = params.damping;
    let keep = 1.0 - damping;
    let mut resp = vec![0.0; n * n];
    let mut avail = vec![0.0; n * n];
    let mut previous: BTreeSet<usize> = BTreeSet::new();
    let mut stable = 0usize;
    let mut converged = false;
    let mut iterations = 0;

    for iteration in 1..=params.max_iter {
        iterations = iteration;

        // r(i,k) <- s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))
        for i in 0..n {
            let row = i * n;
            let mut top = f64::NEG_INFINITY;
            let mut top_at = 0usize;
            let mut second = f64::NEG_INFINITY;
            for k in 0..n {
                let v = avail[row + k] + sim[row + k];
                if v > top {
                    second = top;
                    top = v;
                    top_at = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..n {
                let best_other = if k == top_at { second } else { top };
                resp[row + k] = damping * resp[row + k] + keep * (sim[row + k] - best_other);
            }
        }

        // a(i,k) <- min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))
        // a(k,k) <- sum_{i' != k} max(0, r(i',k))
        for k in 0..n {
            let mut positive_sum = 0.0;
            for i in 0..n {
                if i != k {
                    positive_sum += resp[i * n + k].max(0.0);
                }
            }
            let self_resp = resp[k * n + k];
            for i in 0..n {
                if i == k {
                    avail[k * n + k] = damping * avail[k * n + k] + keep * positive_sum;
                } else {
                    let fresh = (self_resp + positive_sum - resp[i * n + k].max(0.0)).min(0.0);
                    avail[i * n + k] = damping * avail[i * n + k] + keep * fresh;
                }
            }
        }

        let current: BTreeSet<usize> = (0..n)
            .filter(|&k| resp[k * n + k] + avail[k * n + k] > 0.0)
            .collect();
        if current == previous {
            stable += 1;
        } else {
            stable = 1;
            previous = current;
        }
        if stable >= params.convergence_iter && !previous.is_empty() {
            converged = true;
            break;
        }
    }

    let mut exemplars: Vec<usize> = (0..n)
        .filter(|&k| resp[k * n + k] + avail[k * n + k] > 0.0)
        .collect();
    if exemplars.is_empty() {
        let mut best = 0usize;
        let mut best_evidence = f64::NEG_INFINITY;
        for k in 0..n {
            let evidence = resp[k * n + k] + avail[k * n + k];
            if evidence > best_evidence {
                best_evidence = evidence;
                best = k;
            }
        }
        exemplars = vec![best];
    }
    let labels = assign(&sim, n, &exemplars);
    Ok(ApResult {
        labels,
        exemplars,
        converged,
        iterations,
    })
}

fn apply_jitter(sim: &mut [f64], scale: f64, seed: u64) {
    if scale <= 0.0 {
        return;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in sim.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let magnitude = scale * (hi - lo);
    if magnitude <= 0.0 {
        return;
    }
    let mut stream = rng::stream(seed);
    for v in sim.iter_mut() {
        *v += magnitude * (2.0 * rng::unit_f64(&mut stream) - 1.0);
    }
}

fn assign(sim: &[f64], n: usize, exemplars: &[usize]) -> Vec<usize> {
    (0..n)
        .map(|i| {
            if exemplars.binary_search(&i).is_ok() {
                return i;
            }
            let mut best = exemplars[0];
            let mut best_sim = f64::NEG_INFINITY;
            for &k in exemplars {
                let v = sim[i * n + k];
                if v > best_sim {
                    best_sim = v;
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Assigns every point to its most similar exemplar (ties to the lowest
/// exemplar index). `exemplars` must be ascending and non-empty.
pub fn assign_to_exemplars(s: &SimilarityMatrix, exemplars: &[usize]) -> Vec<usize> {
    assign(&s.data, s.n, exemplars)
}

/// Exhaustive-search result: the exemplar set maximising the net similarity
/// objective, with ties resolved to the lexicographically smallest subset.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub exemplars: Vec<usize>,
    pub objective: f64,
}

/// Instance too large for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TooLarge {
    pub n: usize,
}

impl fmt::Display for TooLarge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "brute-force search limited to n <= 12, got {}", self.n)
    }
}

impl core::error::Error for TooLarge {}

/// Enumerates every non-empty exemplar subset `E` and returns the one
/// maximising `sum_{k in E} s[k][k] + sum_{i not in E} max_{k in E} s[i][k]`.
pub fn brute_force_exemplars(s: &SimilarityMatrix) -> Result<BruteForceResult, TooLarge> {
    let n = s.n();
    if n > 12 {
        return Err(TooLarge { n });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 1u32..(1u32 << n) {
        let subset: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
        let mut objective = 0.0;
        for &k in &subset {
            objective += s.get(k, k);
        }
        for i in 0..n {
            if mask & (1 << i) != 0 {
                continue;
            }
            let mut top = f64::NEG_INFINITY;
            for &k in &subset {
                top = top.max(s.get(i, k));
            }
            objective += top;
        }
        let better = match &best {
            None => true,
            Some((obj, set)) => objective > *obj || (objective == *obj && subset < *set),
        };
        if better {
            best = Some((objective, subset));
        }
    }
    let (objective, exemplars) = best.expect("at least one non-empty subset");
    Ok(BruteForceResult {
        exemplars,
        objective,
    })
}

/// Seeded planted-partition instance: block labels plus a similarity matrix
/// with within-block entries drawn from `within` and cross-block entries from
/// `cross` (both inclusive ranges). The diagonal is left at zero.
pub fn planted_partition(
    block_sizes: &[usize],
    within: (f64, f64),
    cross: (f64, f64),
    seed: u64,
) -> (SimilarityMatrix, Vec<usize>) {
    let n: usize = block_sizes.iter().sum();
    let mut blocks = Vec::with_capacity(n);
    for (b, &size) in block_sizes.iter().enumerate() {
        for _ in 0..size {
            blocks.push(b);
        }
    }
    let mut stream = rng::stream(seed);
    let mut s = SimilarityMatrix::zeros(n);
    for i in 0..n {
        for k in (i + 1)..n {
            let (lo, hi) = if blocks[i] == blocks[k] { within } else { cross };
            let v = lo + (hi - lo) * rng::unit_f64(&mut stream);
            s.set_pair(i, k, v);
        }
    }
    (s, blocks)
}
