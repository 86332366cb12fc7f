//! Classical RSP fidelity thresholds for finite ensembles.
//!
//! With c cbits and no entanglement, the optimal strategy assigns each
//! target deterministically to one of 2^c messages; Bob answers message k
//! with the top eigenstate of the block average, so a partitioning scores
//!
//!   ⟨F⟩ = ½(1 + Σ_k p_k·r_k)                      (pure targets)
//!   ⟨F⟩ = ½(1 + Σ_k p_k·√(r_k² + 1 − r²))          (all targets at radius r)
//!
//! where p_k is the block probability and r_k the norm of the block's
//! average Bloch vector. This module maximizes that score exactly (full
//! set-partition enumeration for small n), bounds it from above (per-size
//! best subsets combined over size profiles), and from below (seeded local
//! search), and certifies a lower bound when it meets a ranked upper entry.

use crate::ensembles::TargetEnsemble;
use crate::error::{Result, RspError};
use crate::matrix::Mat2;
use crate::qstate::{bloch_to_density, fidelity, BlochVector, QubitDensity};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Exact enumeration is guarded at this ensemble size; Bell-number growth
/// makes anything larger a job for the bounds.
pub const EXACT_ENUMERATION_LIMIT: usize = 13;
/// The per-size subset scan in [`upper_bound`] is exhaustive up to here.
pub const UPPER_BOUND_LIMIT: usize = 20;
/// Absolute fidelity tolerance for certifying a lower bound against an
/// upper-bound entry.
pub const CERTIFY_TOL: f64 = 1e-9;

const MAX_CBITS: u32 = 16;

/// Deterministic message assignment: one message index per ensemble entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partitioning {
    assignment: Vec<usize>,
    cbits: u32,
}

impl Partitioning {
    pub fn new(assignment: Vec<usize>, cbits: u32) -> Result<Self> {
        if cbits > MAX_CBITS {
            return Err(RspError::UnsupportedCbits(cbits));
        }
        let blocks = 1usize << cbits;
        for &k in &assignment {
            if k >= blocks {
                return Err(RspError::MessageIndexOutOfRange { index: k, cbits });
            }
        }
        Ok(Self { assignment, cbits })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cbits(&self) -> u32 {
        self.cbits
    }

    /// Relabel blocks in first-occurrence order.
    pub fn canonicalized(&self) -> Partitioning {
        let mut map: Vec<Option<usize>> = vec![None; 1 << self.cbits];
        let mut next = 0usize;
        let assignment = self
            .assignment
            .iter()
            .map(|&k| {
                *map[k].get_or_insert_with(|| {
                    let id = next;
                    next += 1;
                    id
                })
            })
            .collect();
        Partitioning { assignment, cbits: self.cbits }
    }
}

/// What a benchmark value means.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Exact,
    UpperBound,
    HeuristicLower,
}

/// One entry of the ranked upper-bound list: the bound value for a given
/// decreasing block-size profile.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedBound {
    pub value: f64,
    pub profile: Vec<usize>,
}

/// A classical threshold (or bound on one) for a target ensemble.
#[derive(Clone, Debug)]
pub struct BenchmarkResult {
    pub value: f64,
    pub kind: BoundKind,
    pub witness: Option<Partitioning>,
    pub certified: bool,
    pub ranked_upper_list: Option<Vec<RankedBound>>,
}

#[derive(Clone, Copy, Debug)]
enum RadiusMode {
    Pure,
    Fixed(f64),
}

impl RadiusMode {
    fn for_ensemble(e: &TargetEnsemble) -> RadiusMode {
        match e.common_radius() {
            Some(r) if r < 1.0 => RadiusMode::Fixed(r),
            _ => RadiusMode::Pure,
        }
    }

    /// Block contribution p_k·g(r_k) written in terms of the weighted Bloch
    /// sum s⃗_k and block probability p_k (empty blocks contribute zero).
    fn block_term(&self, sum: [f64; 3], prob: f64) -> f64 {
        if prob <= 0.0 {
            return 0.0;
        }
        let norm_sq = sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2];
        match *self {
            RadiusMode::Pure => norm_sq.sqrt(),
            RadiusMode::Fixed(r) => (norm_sq + prob * prob * (1.0 - r * r).max(0.0)).sqrt(),
        }
    }
}

struct Weighted {
    vecs: Vec<[f64; 3]>,
    probs: Vec<f64>,
}

impl Weighted {
    fn from_ensemble(e: &TargetEnsemble) -> Weighted {
        Weighted {
            vecs: e
                .entries()
                .iter()
                .map(|en| [en.bloch.x * en.prob, en.bloch.y * en.prob, en.bloch.z * en.prob])
                .collect(),
            probs: e.entries().iter().map(|en| en.prob).collect(),
        }
    }

    fn evaluate(&self, assignment: &[usize], blocks: usize, mode: RadiusMode) -> f64 {
        let mut sums = vec![[0.0f64; 3]; blocks];
        let mut probs = vec![0.0f64; blocks];
        for (i, &k) in assignment.iter().enumerate() {
            sums[k][0] += self.vecs[i][0];
            sums[k][1] += self.vecs[i][1];
            sums[k][2] += self.vecs[i][2];
            probs[k] += self.probs[i];
        }
        let mut total = 0.0;
        for k in 0..blocks {
            total += mode.block_term(sums[k], probs[k]);
        }
        (0.5 * (1.0 + total)).clamp(0.0, 1.0)
    }
}

/// Score of a deterministic partitioning. Ensembles with a common radius
/// below 1 are scored with the fixed-radius (mixed-target) formula, pure
/// ensembles with the Bloch-length formula.
pub fn partition_fidelity(e: &TargetEnsemble, p: &Partitioning) -> Result<f64> {
    if p.assignment.len() != e.len() {
        return Err(RspError::SizeMismatch { got: p.assignment.len(), expected: e.len() });
    }
    let w = Weighted::from_ensemble(e);
    Ok(w.evaluate(&p.assignment, 1 << p.cbits, RadiusMode::for_ensemble(e)))
}

/// Fixed-radius score evaluated explicitly at radius `r`, which must match
/// the ensemble's common radius. Exposed so the two scoring formulas can be
/// compared directly (they coincide at r = 1).
pub fn partition_fidelity_fixed_radius(
    e: &TargetEnsemble,
    p: &Partitioning,
    r: f64,
) -> Result<f64> {
    if p.assignment.len() != e.len() {
        return Err(RspError::SizeMismatch { got: p.assignment.len(), expected: e.len() });
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(RspError::RadiusOutOfRange(r));
    }
    match e.common_radius() {
        Some(actual) if (actual - r).abs() <= 1e-9 => {}
        _ => {
            return Err(RspError::MalformedEnsemble(
                "fixed-radius scoring requires an ensemble with that common radius".into(),
            ));
        }
    }
    let w = Weighted::from_ensemble(e);
    Ok(w.evaluate(&p.assignment, 1 << p.cbits, RadiusMode::Fixed(r)))
}

struct ExactSearch<'a> {
    w: &'a Weighted,
    mode: RadiusMode,
    blocks: usize,
    assign: Vec<usize>,
    // Incremental Σ_k term_k for pruning only; leaf values are recomputed
    // fresh so enumeration-order drift cannot touch them.
    block_sums: Vec<[f64; 3]>,
    block_probs: Vec<f64>,
    running_total: f64,
    // suffix_cap[d] bounds the total-term growth from states d..n.
    suffix_cap: Vec<f64>,
    best_value: f64,
    best_assign: Vec<usize>,
}

const PRUNE_MARGIN: f64 = 1e-6;

impl<'a> ExactSearch<'a> {
    fn run(w: &'a Weighted, blocks: usize, mode: RadiusMode) -> (f64, Vec<usize>) {
        let n = w.vecs.len();
        // |w⃗_i| in pure mode, p_i in fixed mode: the largest amount state i
        // can add to Σ_k term_k (triangle inequality per block).
        let caps: Vec<f64> = match mode {
            RadiusMode::Pure => w
                .vecs
                .iter()
                .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
                .collect(),
            RadiusMode::Fixed(_) => w.probs.clone(),
        };
        let mut suffix_cap = vec![0.0f64; n + 1];
        for d in (0..n).rev() {
            suffix_cap[d] = suffix_cap[d + 1] + caps[d];
        }
        let mut search = ExactSearch {
            w,
            mode,
            blocks,
            assign: vec![0; n],
            block_sums: vec![[0.0; 3]; blocks],
            block_probs: vec![0.0; blocks],
            running_total: 0.0,
            suffix_cap,
            best_value: f64::NEG_INFINITY,
            best_assign: vec![0; n],
        };
        search.recurse(0, 0);
        (search.best_value, search.best_assign)
    }

    fn recurse(&mut self, depth: usize, used: usize) {
        let n = self.w.vecs.len();
        if depth == n {
            let value = self.w.evaluate(&self.assign, self.blocks, self.mode);
            if value > self.best_value {
                self.best_value = value;
                self.best_assign.copy_from_slice(&self.assign);
            }
            return;
        }
        let optimistic = 0.5 * (1.0 + self.running_total + self.suffix_cap[depth]);
        if optimistic + PRUNE_MARGIN < self.best_value {
            return;
        }
        // Restricted growth: a new block label may only follow all smaller ones.
        let limit = (used + 1).min(self.blocks);
        for k in 0..limit {
            self.assign[depth] = k;
            let old_term = self.mode.block_term(self.block_sums[k], self.block_probs[k]);
            let (old_sum, old_prob) = (self.block_sums[k], self.block_probs[k]);
            self.block_sums[k][0] += self.w.vecs[depth][0];
            self.block_sums[k][1] += self.w.vecs[depth][1];
            self.block_sums[k][2] += self.w.vecs[depth][2];
            self.block_probs[k] += self.w.probs[depth];
            let new_term = self.mode.block_term(self.block_sums[k], self.block_probs[k]);
            self.running_total += new_term - old_term;

            self.recurse(depth + 1, used.max(k + 1));

            self.running_total -= new_term - old_term;
            self.block_sums[k] = old_sum;
            self.block_probs[k] = old_prob;
        }
    }
}

/// Exact classical threshold by canonical enumeration of every partition of
/// the ensemble into at most 2^c blocks. Ensembles with n ≤ 2^c are
/// perfectly preparable (one message per state), reported as exactly 1.
pub fn exact_threshold(e: &TargetEnsemble, cbits: u32) -> Result<BenchmarkResult> {
    if cbits > MAX_CBITS {
        return Err(RspError::UnsupportedCbits(cbits));
    }
    let n = e.len();
    let blocks = 1usize << cbits;
    if n <= blocks {
        let witness = Partitioning::new((0..n).collect(), cbits)?;
        return Ok(BenchmarkResult {
            value: 1.0,
            kind: BoundKind::Exact,
            witness: Some(witness),
            certified: true,
            ranked_upper_list: None,
        });
    }
    if n > EXACT_ENUMERATION_LIMIT {
        return Err(RspError::TooLargeForExact { n, limit: EXACT_ENUMERATION_LIMIT });
    }
    let w = Weighted::from_ensemble(e);
    let mode = RadiusMode::for_ensemble(e);
    let (value, assign) = ExactSearch::run(&w, blocks, mode);
    Ok(BenchmarkResult {
        value,
        kind: BoundKind::Exact,
        witness: Some(Partitioning::new(assign, cbits)?),
        certified: true,
        ranked_upper_list: None,
    })
}

/// Upper bound from per-size optimal subsets: for every block size s the
/// scan finds the s-subset with the longest mean Bloch vector, then every
/// decreasing size profile of ≤ 2^c blocks is scored with those per-size
/// optima. Requires uniform probabilities.
pub fn upper_bound(e: &TargetEnsemble, cbits: u32) -> Result<BenchmarkResult> {
    if cbits > MAX_CBITS {
        return Err(RspError::UnsupportedCbits(cbits));
    }
    if !e.is_uniform() {
        return Err(RspError::UniformRequired);
    }
    let n = e.len();
    if n > UPPER_BOUND_LIMIT {
        return Err(RspError::TooLargeForExact { n, limit: UPPER_BOUND_LIMIT });
    }
    let blocks = 1usize << cbits;
    let mode = RadiusMode::for_ensemble(e);

    // best_sum[s] = max over s-subsets of |Σ b⃗| (unweighted vectors).
    let vecs: Vec<[f64; 3]> =
        e.entries().iter().map(|en| [en.bloch.x, en.bloch.y, en.bloch.z]).collect();
    let mut best_sum = vec![f64::NEG_INFINITY; n + 1];
    fn scan(vecs: &[[f64; 3]], i: usize, count: usize, sum: [f64; 3], best: &mut [f64]) {
        if i == vecs.len() {
            if count > 0 {
                let norm = (sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]).sqrt();
                if norm > best[count] {
                    best[count] = norm;
                }
            }
            return;
        }
        scan(vecs, i + 1, count, sum, best);
        let with = [sum[0] + vecs[i][0], sum[1] + vecs[i][1], sum[2] + vecs[i][2]];
        scan(vecs, i + 1, count + 1, with, best);
    }
    scan(&vecs, 0, 0, [0.0; 3], &mut best_sum);

    // Per-size best contribution (1 + g(r_s))/2 with r_s the best mean length.
    let per_size: Vec<f64> = (0..=n)
        .map(|s| {
            if s == 0 {
                0.0
            } else {
                let r_s = (best_sum[s] / s as f64).min(1.0);
                let g = match mode {
                    RadiusMode::Pure => r_s,
                    RadiusMode::Fixed(r) => (r_s * r_s + 1.0 - r * r).max(0.0).sqrt().min(1.0),
                };
                0.5 * (1.0 + g)
            }
        })
        .collect();

    // All decreasing profiles of at most `blocks` positive parts summing to n.
    let mut profiles: Vec<Vec<usize>> = Vec::new();
    fn build(
        n: usize,
        max_part: usize,
        slots: usize,
        acc: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if n == 0 {
            out.push(acc.clone());
            return;
        }
        if slots == 0 {
            return;
        }
        for part in (1..=max_part.min(n)).rev() {
            // Remaining states must fit in the remaining slots.
            if part * slots < n {
                continue;
            }
            acc.push(part);
            build(n - part, part, slots - 1, acc, out);
            acc.pop();
        }
    }
    build(n, n, blocks, &mut Vec::new(), &mut profiles);

    let mut ranked: Vec<RankedBound> = profiles
        .into_iter()
        .map(|profile| {
            let value: f64 = profile.iter().map(|&s| (s as f64 / n as f64) * per_size[s]).sum();
            RankedBound { value: value.clamp(0.0, 1.0), profile }
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.value.partial_cmp(&a.value).unwrap().then_with(|| b.profile.cmp(&a.profile))
    });

    Ok(BenchmarkResult {
        value: ranked[0].value,
        kind: BoundKind::UpperBound,
        witness: None,
        certified: false,
        ranked_upper_list: Some(ranked),
    })
}

/// Lower bound by local search over deterministic assignments: from each of
/// `restarts` random starts, repeatedly apply the best strictly-improving
/// single-state reassignment or cross-block swap until none remains.
/// Deterministic for a fixed seed.
pub fn heuristic_threshold(
    e: &TargetEnsemble,
    cbits: u32,
    restarts: usize,
    seed: u64,
) -> Result<BenchmarkResult> {
    if cbits > MAX_CBITS {
        return Err(RspError::UnsupportedCbits(cbits));
    }
    let n = e.len();
    let blocks = 1usize << cbits;
    let w = Weighted::from_ensemble(e);
    let mode = RadiusMode::for_ensemble(e);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best_value = f64::NEG_INFINITY;
    let mut best_assign: Vec<usize> = vec![0; n];
    for _ in 0..restarts.max(1) {
        let mut assign: Vec<usize> = (0..n).map(|_| rng.random_range(0..blocks)).collect();
        local_search(&w, mode, blocks, &mut assign);
        let value = w.evaluate(&assign, blocks, mode);
        if value > best_value {
            best_value = value;
            best_assign = assign;
        }
    }

    let witness = Partitioning::new(best_assign, cbits)?.canonicalized();
    let value = w.evaluate(witness.assignment(), blocks, mode);
    Ok(BenchmarkResult {
        value,
        kind: BoundKind::HeuristicLower,
        witness: Some(witness),
        certified: false,
        ranked_upper_list: None,
    })
}

const IMPROVEMENT_EPS: f64 = 1e-14;

#[allow(clippy::needless_range_loop)]
fn local_search(w: &Weighted, mode: RadiusMode, blocks: usize, assign: &mut [usize]) {
    let n = assign.len();
    let mut sums = vec![[0.0f64; 3]; blocks];
    let mut probs = vec![0.0f64; blocks];
    for (i, &k) in assign.iter().enumerate() {
        sums[k][0] += w.vecs[i][0];
        sums[k][1] += w.vecs[i][1];
        sums[k][2] += w.vecs[i][2];
        probs[k] += w.probs[i];
    }
    let mut terms: Vec<f64> = (0..blocks).map(|k| mode.block_term(sums[k], probs[k])).collect();

    let sub = |s: [f64; 3], v: [f64; 3]| [s[0] - v[0], s[1] - v[1], s[2] - v[2]];
    let add = |s: [f64; 3], v: [f64; 3]| [s[0] + v[0], s[1] + v[1], s[2] + v[2]];

    for _ in 0..100_000 {
        let mut best_delta = IMPROVEMENT_EPS;
        // (state i, target block, optional swap partner)
        let mut best_move: Option<(usize, usize, Option<usize>)> = None;

        for i in 0..n {
            let a = assign[i];
            let a_removed_sum = sub(sums[a], w.vecs[i]);
            let a_removed_prob = probs[a] - w.probs[i];
            let a_removed_term = mode.block_term(a_removed_sum, a_removed_prob);
            for b in 0..blocks {
                if b == a {
                    continue;
                }
                let new_b = mode.block_term(add(sums[b], w.vecs[i]), probs[b] + w.probs[i]);
                let delta = (a_removed_term + new_b) - (terms[a] + terms[b]);
                if delta > best_delta {
                    best_delta = delta;
                    best_move = Some((i, b, None));
                }
            }
            for j in (i + 1)..n {
                let b = assign[j];
                if b == a {
                    continue;
                }
                let new_a =
                    mode.block_term(add(a_removed_sum, w.vecs[j]), a_removed_prob + w.probs[j]);
                let new_b = mode.block_term(
                    add(sub(sums[b], w.vecs[j]), w.vecs[i]),
                    probs[b] - w.probs[j] + w.probs[i],
                );
                let delta = (new_a + new_b) - (terms[a] + terms[b]);
                if delta > best_delta {
                    best_delta = delta;
                    best_move = Some((i, b, Some(j)));
                }
            }
        }

        match best_move {
            None => break,
            Some((i, b, swap)) => {
                let a = assign[i];
                sums[a] = sub(sums[a], w.vecs[i]);
                probs[a] -= w.probs[i];
                sums[b] = add(sums[b], w.vecs[i]);
                probs[b] += w.probs[i];
                assign[i] = b;
                if let Some(j) = swap {
                    sums[b] = sub(sums[b], w.vecs[j]);
                    probs[b] -= w.probs[j];
                    sums[a] = add(sums[a], w.vecs[j]);
                    probs[a] += w.probs[j];
                    assign[j] = a;
                }
                terms[a] = mode.block_term(sums[a], probs[a]);
                terms[b] = mode.block_term(sums[b], probs[b]);
            }
        }
    }
}

/// Certify a lower bound against a ranked upper-bound list: if the lower
/// value meets some ranked entry within [`CERTIFY_TOL`], that entry is the
/// threshold and the result is certified; otherwise the pair is returned
/// uncertified, keeping the lower value and the full ranked list.
pub fn certify(lower: &BenchmarkResult, upper: &BenchmarkResult) -> Result<BenchmarkResult> {
    if !matches!(lower.kind, BoundKind::Exact | BoundKind::HeuristicLower) {
        return Err(RspError::InvalidStrategy(
            "certify: first argument must be an exact or heuristic lower bound".into(),
        ));
    }
    if !matches!(upper.kind, BoundKind::UpperBound) {
        return Err(RspError::InvalidStrategy(
            "certify: second argument must be an upper bound".into(),
        ));
    }
    if lower.value > upper.value + CERTIFY_TOL {
        return Err(RspError::InternalInconsistency(format!(
            "lower bound {} exceeds upper bound {}",
            lower.value, upper.value
        )));
    }
    let ranked = upper
        .ranked_upper_list
        .clone()
        .ok_or_else(|| RspError::InvalidStrategy("upper bound carries no ranked list".into()))?;
    let matched = ranked.iter().any(|entry| (entry.value - lower.value).abs() <= CERTIFY_TOL);
    Ok(BenchmarkResult {
        value: lower.value,
        kind: lower.kind,
        witness: lower.witness.clone(),
        certified: matched,
        ranked_upper_list: Some(ranked),
    })
}

/// A probabilistic messaging strategy: row α gives the distribution q_k(α)
/// over messages, and `outputs[k]` is Bob's state for message k.
#[derive(Clone, Debug)]
pub struct ProbabilisticStrategy {
    q: Vec<Vec<f64>>,
    outputs: Vec<QubitDensity>,
}

impl ProbabilisticStrategy {
    pub fn new(q: Vec<Vec<f64>>, outputs: Vec<QubitDensity>) -> Result<Self> {
        if outputs.is_empty() {
            return Err(RspError::InvalidStrategy("no output states".into()));
        }
        for (row_idx, row) in q.iter().enumerate() {
            if row.len() != outputs.len() {
                return Err(RspError::SizeMismatch { got: row.len(), expected: outputs.len() });
            }
            if row.iter().any(|&p| p < -1e-12 || !p.is_finite()) {
                return Err(RspError::InvalidStrategy(format!(
                    "negative message probability in row {row_idx}"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(RspError::InvalidStrategy(format!("row {row_idx} sums to {sum}")));
            }
        }
        Ok(Self { q, outputs })
    }

    pub fn rows(&self) -> usize {
        self.q.len()
    }

    pub fn outputs(&self) -> &[QubitDensity] {
        &self.outputs
    }
}

/// Average fidelity of a probabilistic strategy. The state Bob holds for
/// target α is the message mixture Σ_k q_k(α) ρ_k and the fidelity is taken
/// against that mixture; for pure targets this equals the per-message
/// average, and for mixed targets it is the form under which the one-cbit
/// three-state construction reaches fidelity 1.
pub fn probabilistic_fidelity(e: &TargetEnsemble, s: &ProbabilisticStrategy) -> Result<f64> {
    if s.q.len() != e.len() {
        return Err(RspError::SizeMismatch { got: s.q.len(), expected: e.len() });
    }
    let mut total = 0.0;
    for (entry, row) in e.entries().iter().zip(&s.q) {
        let target = bloch_to_density(&entry.bloch)?;
        let mut mix = Mat2::zero();
        for (k, &qk) in row.iter().enumerate() {
            if qk > 0.0 {
                mix = mix.add(&s.outputs[k].matrix().scale(qk));
            }
        }
        let mixture = QubitDensity::from_matrix(mix)?;
        total += entry.prob * fidelity(&target, &mixture);
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Radius of the sphere inscribed in the unit-circumradius tetrahedron
/// (c = 2) or cube (c = 3): any constant-radius ensemble inside it is
/// perfectly preparable with probabilistic messaging.
pub fn insphere_radius(cbits: u32) -> Result<f64> {
    match cbits {
        2 => Ok(1.0 / 3.0),
        3 => Ok((1.0f64 / 3.0).sqrt()),
        other => Err(RspError::UnsupportedCbits(other)),
    }
}

/// True iff every target Bloch vector lies in the convex hull of the given
/// vertices (at most 2^c of them), tested by phase-1 simplex feasibility at
/// tolerance 1e-9.
pub fn hull_perfect_check(
    e: &TargetEnsemble,
    vertices: &[BlochVector],
    cbits: u32,
) -> Result<bool> {
    if cbits > MAX_CBITS {
        return Err(RspError::UnsupportedCbits(cbits));
    }
    if vertices.len() > (1usize << cbits) {
        return Err(RspError::TooManyVertices { got: vertices.len(), cbits });
    }
    for v in vertices {
        let n = v.norm();
        if n > 1.0 + 1e-9 {
            return Err(RspError::NormTooLarge(n));
        }
    }
    for entry in e.entries() {
        if !in_convex_hull(&entry.bloch, vertices) {
            return Ok(false);
        }
    }
    Ok(true)
}

const HULL_TOL: f64 = 1e-9;

/// Phase-1 simplex: find w ≥ 0 with Σ w_j v_j = b and Σ w_j = 1.
#[allow(clippy::needless_range_loop)]
fn in_convex_hull(b: &BlochVector, vertices: &[BlochVector]) -> bool {
    let n = vertices.len();
    if n == 0 {
        return false;
    }
    let rows = 4;
    let cols = n + rows; // vertex weights + one artificial per row
    // Constraint rows: [v_x | v_y | v_z | ones]·w = [b | 1], artificials basic.
    let mut tab = vec![vec![0.0f64; cols + 1]; rows];
    let rhs = [b.x, b.y, b.z, 1.0];
    for (j, v) in vertices.iter().enumerate() {
        tab[0][j] = v.x;
        tab[1][j] = v.y;
        tab[2][j] = v.z;
        tab[3][j] = 1.0;
    }
    for r in 0..rows {
        tab[r][cols] = rhs[r];
        if tab[r][cols] < 0.0 {
            for c in 0..=cols {
                tab[r][c] = -tab[r][c];
            }
        }
        tab[r][n + r] = 1.0;
    }
    let mut basis: Vec<usize> = (n..n + rows).collect();
    // Minimize the sum of artificials; price out the artificial basis.
    let mut obj = vec![0.0f64; cols + 1];
    for r in 0..rows {
        for c in 0..=cols {
            obj[c] -= tab[r][c];
        }
    }
    for r in 0..rows {
        obj[n + r] = 0.0;
    }

    for _ in 0..1000 {
        // Bland's rule: smallest-index entering column with negative cost.
        let mut entering = None;
        for (c, &cost) in obj.iter().enumerate().take(cols) {
            if cost < -1e-12 {
                entering = Some(c);
                break;
            }
        }
        let Some(enter) = entering else { break };
        let mut leaving: Option<(usize, f64)> = None;
        for r in 0..rows {
            if tab[r][enter] > 1e-12 {
                let ratio = tab[r][cols] / tab[r][enter];
                match leaving {
                    None => leaving = Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-15
                            || ((ratio - lratio).abs() <= 1e-15 && basis[r] < basis[lr])
                        {
                            leaving = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((leave, _)) = leaving else { break };
        let pivot = tab[leave][enter];
        for c in 0..=cols {
            tab[leave][c] /= pivot;
        }
        for r in 0..rows {
            if r != leave && tab[r][enter] != 0.0 {
                let factor = tab[r][enter];
                for c in 0..=cols {
                    tab[r][c] -= factor * tab[leave][c];
                }
            }
        }
        let factor = obj[enter];
        if factor != 0.0 {
            for c in 0..=cols {
                obj[c] -= factor * tab[leave][c];
            }
        }
        basis[leave] = enter;
    }

    // Remaining infeasibility = value of the phase-1 objective.
    let infeasibility: f64 = basis
        .iter()
        .enumerate()
        .filter(|&(_, &col)| col >= n)
        .map(|(r, _)| tab[r][cols])
        .sum();
    infeasibility <= HULL_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{
        platonic_ensemble, EnsembleEntry, PlatonicSolid, TargetEnsemble, IDENTITY_ORIENTATION,
    };
    use crate::qstate::largest_eigen;
    use crate::testutil::{random_rotation, random_unit_bloch};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn octahedron() -> TargetEnsemble {
        platonic_ensemble(PlatonicSolid::Octahedron, 1.0, &IDENTITY_ORIENTATION).unwrap()
    }

    /// Independent scorer: build block-average density matrices and take the
    /// top eigenvalue of each, bypassing the Bloch-length shortcut.
    fn eigen_oracle(e: &TargetEnsemble, assignment: &[usize], blocks: usize) -> f64 {
        let mut total = 0.0;
        for k in 0..blocks {
            let mut acc = Mat2::zero();
            let mut p_k = 0.0;
            for (i, entry) in e.entries().iter().enumerate() {
                if assignment[i] == k {
                    acc = acc
                        .add(&bloch_to_density(&entry.bloch).unwrap().matrix().scale(entry.prob));
                    p_k += entry.prob;
                }
            }
            if p_k > 0.0 {
                let avg = QubitDensity::from_matrix(acc.scale(1.0 / p_k)).unwrap();
                let (lam, _) = largest_eigen(&avg);
                total += p_k * lam;
            }
        }
        total
    }

    #[test]
    fn partition_fidelity_hand_example() {
        // Octahedron, blocks {+x}, {+y}, {+z}, {−x,−y,−z}:
        // ½(1 + 3·(1/6)·1 + (3/6)·(1/√3)).
        let e = octahedron();
        // Canonical vertex order: +x, −x, +y, −y, +z, −z.
        let p = Partitioning::new(vec![0, 3, 1, 3, 2, 3], 2).unwrap();
        let value = partition_fidelity(&e, &p).unwrap();
        let expect = 0.5 * (1.0 + 0.5 + 0.5 / 3.0f64.sqrt());
        assert!((value - expect).abs() < 1e-12);
        assert!((value - 0.8943375672974064).abs() < 1e-12);
        // Cross-check against the eigenvalue route.
        assert!((value - eigen_oracle(&e, p.assignment(), 4)).abs() < 1e-12);
    }

    #[test]
    fn singleton_partitions_are_perfect() {
        let e =
            platonic_ensemble(PlatonicSolid::Tetrahedron, 1.0, &IDENTITY_ORIENTATION).unwrap();
        let p = Partitioning::new(vec![0, 1, 2, 3], 2).unwrap();
        assert!((partition_fidelity(&e, &p).unwrap() - 1.0).abs() < 1e-12);

        // Mixed radius: √(r² + 1 − r²) = 1 regardless of r.
        let e =
            platonic_ensemble(PlatonicSolid::Tetrahedron, 0.6, &IDENTITY_ORIENTATION).unwrap();
        assert!((partition_fidelity(&e, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn everything_in_one_block_scores_half() {
        let e = octahedron();
        let p = Partitioning::new(vec![0; 6], 2).unwrap();
        assert!((partition_fidelity(&e, &p).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn partition_size_mismatch_rejected() {
        let e = octahedron();
        let p = Partitioning::new(vec![0, 1], 2).unwrap();
        assert!(matches!(partition_fidelity(&e, &p), Err(RspError::SizeMismatch { .. })));
        assert!(matches!(
            Partitioning::new(vec![0, 4], 2),
            Err(RspError::MessageIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn fixed_radius_matches_pure_at_radius_one() {
        let e = octahedron();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let assign: Vec<usize> = (0..6).map(|_| rng.random_range(0..4)).collect();
            let p = Partitioning::new(assign, 2).unwrap();
            let pure = partition_fidelity(&e, &p).unwrap();
            let fixed = partition_fidelity_fixed_radius(&e, &p, 1.0).unwrap();
            assert!((pure - fixed).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_radius_is_monotone_nonincreasing_in_r() {
        let p = Partitioning::new(vec![0, 0, 1, 1, 2, 3], 2).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..=10 {
            let r = i as f64 / 10.0;
            let e = platonic_ensemble(PlatonicSolid::Octahedron, r, &IDENTITY_ORIENTATION)
                .unwrap();
            let v = partition_fidelity_fixed_radius(&e, &p, r).unwrap();
            assert!(v <= prev + 1e-12, "value must not increase with r");
            prev = v;
        }
    }

    #[test]
    fn exact_octahedron_two_cbits_matches_brute_force() {
        let e = octahedron();
        let result = exact_threshold(&e, 2).unwrap();
        // Oracle: every labeling of 6 states into 4 messages, scored by the
        // eigenvalue route.
        let mut oracle: f64 = 0.0;
        let mut assign = vec![0usize; 6];
        for code in 0..4096usize {
            let mut c = code;
            for slot in assign.iter_mut() {
                *slot = c % 4;
                c /= 4;
            }
            oracle = oracle.max(eigen_oracle(&e, &assign, 4));
        }
        assert!((result.value - oracle).abs() < 1e-12);
        // Frozen golden: ½(1 + √2/3 + 1/3), the two-pairs-two-singletons split.
        assert!((result.value - 0.9023689270621825).abs() < 1e-10);
        assert_eq!(result.kind, BoundKind::Exact);
        assert!(result.certified);
        let witness = result.witness.unwrap();
        let check = partition_fidelity(&e, &witness).unwrap();
        assert!((check - result.value).abs() < 1e-12);
    }

    #[test]
    fn trivial_capacity_cases_are_exactly_one() {
        let tetra =
            platonic_ensemble(PlatonicSolid::Tetrahedron, 1.0, &IDENTITY_ORIENTATION).unwrap();
        assert_eq!(exact_threshold(&tetra, 2).unwrap().value, 1.0);
        assert_eq!(exact_threshold(&tetra, 3).unwrap().value, 1.0);
        let octa = octahedron();
        assert_eq!(exact_threshold(&octa, 3).unwrap().value, 1.0);
        let cube = platonic_ensemble(PlatonicSolid::Cube, 1.0, &IDENTITY_ORIENTATION).unwrap();
        assert_eq!(exact_threshold(&cube, 3).unwrap().value, 1.0);
    }

    #[test]
    fn zero_radius_ensemble_is_perfectly_preparable() {
        let e = platonic_ensemble(PlatonicSolid::Octahedron, 0.0, &IDENTITY_ORIENTATION).unwrap();
        let result = exact_threshold(&e, 2).unwrap();
        assert!((result.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_guard_rejects_large_ensembles() {
        let e =
            platonic_ensemble(PlatonicSolid::Dodecahedron, 1.0, &IDENTITY_ORIENTATION).unwrap();
        assert!(matches!(exact_threshold(&e, 2), Err(RspError::TooLargeForExact { n: 20, .. })));
    }

    #[test]
    fn exact_threshold_is_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let base = exact_threshold(&octahedron(), 2).unwrap().value;
        for _ in 0..5 {
            let rot = random_rotation(&mut rng);
            let turned = platonic_ensemble(PlatonicSolid::Octahedron, 1.0, &rot).unwrap();
            let value = exact_threshold(&turned, 2).unwrap().value;
            assert!((value - base).abs() < 1e-10);
        }
    }

    #[test]
    fn upper_bound_tetrahedron_is_unity_with_singleton_profile() {
        let e =
            platonic_ensemble(PlatonicSolid::Tetrahedron, 1.0, &IDENTITY_ORIENTATION).unwrap();
        let result = upper_bound(&e, 2).unwrap();
        assert!((result.value - 1.0).abs() < 1e-12);
        let ranked = result.ranked_upper_list.unwrap();
        assert_eq!(ranked[0].profile, vec![1, 1, 1, 1]);
    }

    #[test]
    fn upper_bound_requires_uniform_probabilities() {
        let entries = vec![
            EnsembleEntry { bloch: BlochVector::new(0.0, 0.0, 1.0), prob: 0.7 },
            EnsembleEntry { bloch: BlochVector::new(0.0, 0.0, -1.0), prob: 0.3 },
        ];
        let e = TargetEnsemble::new(None, entries).unwrap();
        assert!(matches!(upper_bound(&e, 1), Err(RspError::UniformRequired)));
    }

    #[test]
    fn dodecahedron_ranked_profiles_match_geometry() {
        let e =
            platonic_ensemble(PlatonicSolid::Dodecahedron, 1.0, &IDENTITY_ORIENTATION).unwrap();
        let result = upper_bound(&e, 2).unwrap();
        let ranked = result.ranked_upper_list.as_ref().unwrap();
        // Four disjoint pentagons top the list; the achievable profile is next.
        assert_eq!(ranked[0].profile, vec![5, 5, 5, 5]);
        assert_eq!(ranked[1].profile, vec![6, 5, 5, 4]);
        assert!(ranked[0].value > ranked[1].value);
    }

    #[test]
    fn heuristic_finds_exact_octahedron_value() {
        let e = octahedron();
        let exact = exact_threshold(&e, 2).unwrap();
        let heur = heuristic_threshold(&e, 2, 50, 7).unwrap();
        assert!((heur.value - exact.value).abs() < 1e-12);
        assert!(heur.value <= exact.value + 1e-12);
        // Determinism.
        let again = heuristic_threshold(&e, 2, 50, 7).unwrap();
        assert_eq!(heur.witness, again.witness);
        assert_eq!(heur.value, again.value);
    }

    #[test]
    fn heuristic_reaches_singletons_for_tetrahedron() {
        let e =
            platonic_ensemble(PlatonicSolid::Tetrahedron, 1.0, &IDENTITY_ORIENTATION).unwrap();
        for seed in [1u64, 2, 3] {
            let heur = heuristic_threshold(&e, 2, 5, seed).unwrap();
            assert!((heur.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ordering_heuristic_exact_upper() {
        for solid in [PlatonicSolid::Octahedron, PlatonicSolid::Cube, PlatonicSolid::Icosahedron]
        {
            let e = platonic_ensemble(solid, 1.0, &IDENTITY_ORIENTATION).unwrap();
            let exact = exact_threshold(&e, 2).unwrap().value;
            let upper = upper_bound(&e, 2).unwrap().value;
            let heur = heuristic_threshold(&e, 2, 40, 11).unwrap().value;
            assert!(heur <= exact + 1e-12, "{}: {heur} vs {exact}", solid.name());
            assert!(exact <= upper + 1e-12, "{}: {exact} vs {upper}", solid.name());
        }
    }

    #[test]
    fn certify_octahedron_and_report_gaps() {
        let e = octahedron();
        let exact = exact_threshold(&e, 2).unwrap();
        let upper = upper_bound(&e, 2).unwrap();
        let certified = certify(&exact, &upper).unwrap();
        assert!(certified.certified);
        assert!((certified.value - exact.value).abs() < 1e-15);

        // A deliberately weak lower bound stays uncertified.
        let weak = BenchmarkResult {
            value: 0.8,
            kind: BoundKind::HeuristicLower,
            witness: None,
            certified: false,
            ranked_upper_list: None,
        };
        let out = certify(&weak, &upper).unwrap();
        assert!(!out.certified);
        assert!((out.value - 0.8).abs() < 1e-15);

        // Lower above upper is an internal inconsistency.
        let impossible = BenchmarkResult { value: 0.99, ..weak.clone() };
        assert!(matches!(certify(&impossible, &upper), Err(RspError::InternalInconsistency(_))));
    }

    #[test]
    fn three_state_probabilistic_example_reaches_unity() {
        // Targets |0⟩, |1⟩, 𝟙/2 with one cbit: route the poles
        // deterministically and split the center evenly.
        let entries = vec![
            EnsembleEntry { bloch: BlochVector::new(0.0, 0.0, 1.0), prob: 1.0 / 3.0 },
            EnsembleEntry { bloch: BlochVector::new(0.0, 0.0, -1.0), prob: 1.0 / 3.0 },
            EnsembleEntry { bloch: BlochVector::ZERO, prob: 1.0 / 3.0 },
        ];
        let e = TargetEnsemble::new(None, entries).unwrap();
        let outputs = vec![
            bloch_to_density(&BlochVector::new(0.0, 0.0, 1.0)).unwrap(),
            bloch_to_density(&BlochVector::new(0.0, 0.0, -1.0)).unwrap(),
        ];
        let q = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]];
        let strategy = ProbabilisticStrategy::new(q, outputs).unwrap();
        let value = probabilistic_fidelity(&e, &strategy).unwrap();
        assert_eq!(value, 1.0);
    }

    #[test]
    fn deterministic_rows_match_partition_fidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let entries: Vec<EnsembleEntry> = (0..6)
                .map(|_| EnsembleEntry { bloch: random_unit_bloch(&mut rng), prob: 1.0 / 6.0 })
                .collect();
            let e = TargetEnsemble::new(None, entries).unwrap();
            let assign: Vec<usize> = (0..6).map(|_| rng.random_range(0..4)).collect();
            let p = Partitioning::new(assign.clone(), 2).unwrap();

            // Outputs = optimal eigenstates per block.
            let mut outputs = Vec::new();
            for k in 0..4 {
                let mut acc = Mat2::zero();
                let mut p_k = 0.0;
                for (i, entry) in e.entries().iter().enumerate() {
                    if assign[i] == k {
                        acc = acc.add(
                            &bloch_to_density(&entry.bloch).unwrap().matrix().scale(entry.prob),
                        );
                        p_k += entry.prob;
                    }
                }
                if p_k > 0.0 {
                    let avg = QubitDensity::from_matrix(acc.scale(1.0 / p_k)).unwrap();
                    outputs.push(largest_eigen(&avg).1);
                } else {
                    outputs.push(QubitDensity::ground());
                }
            }
            let q: Vec<Vec<f64>> = assign
                .iter()
                .map(|&k| {
                    let mut row = vec![0.0; 4];
                    row[k] = 1.0;
                    row
                })
                .collect();
            let strategy = ProbabilisticStrategy::new(q, outputs).unwrap();
            let prob_value = probabilistic_fidelity(&e, &strategy).unwrap();
            let det_value = partition_fidelity(&e, &p).unwrap();
            assert!((prob_value - det_value).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_outputs_collapse_the_strategy() {
        let e = octahedron();
        let rho0 = bloch_to_density(&BlochVector::new(0.3, 0.2, 0.1)).unwrap();
        let outputs = vec![rho0, rho0, rho0, rho0];
        let q = vec![vec![0.25; 4]; 6];
        let strategy = ProbabilisticStrategy::new(q, outputs).unwrap();
        let value = probabilistic_fidelity(&e, &strategy).unwrap();
        let direct: f64 = e
            .entries()
            .iter()
            .map(|en| en.prob * fidelity(&bloch_to_density(&en.bloch).unwrap(), &rho0))
            .sum();
        assert!((value - direct).abs() < 1e-12);
    }

    #[test]
    fn probabilistic_never_beats_exact_for_pure_targets() {
        // One cbit, five pure states: randomized strategies must stay below
        // the deterministic optimum.
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..5 {
            let entries: Vec<EnsembleEntry> = (0..5)
                .map(|_| EnsembleEntry { bloch: random_unit_bloch(&mut rng), prob: 0.2 })
                .collect();
            let e = TargetEnsemble::new(None, entries).unwrap();
            let exact = exact_threshold(&e, 1).unwrap().value;
            for _ in 0..40 {
                let outputs: Vec<QubitDensity> = (0..2)
                    .map(|_| {
                        let dir = random_unit_bloch(&mut rng);
                        let r = rng.random::<f64>();
                        bloch_to_density(&dir.scaled(r)).unwrap()
                    })
                    .collect();
                let q: Vec<Vec<f64>> = (0..5)
                    .map(|_| {
                        let a = rng.random::<f64>().max(1e-9);
                        let b = rng.random::<f64>().max(1e-9);
                        vec![a / (a + b), b / (a + b)]
                    })
                    .collect();
                let strategy = ProbabilisticStrategy::new(q, outputs).unwrap();
                let value = probabilistic_fidelity(&e, &strategy).unwrap();
                assert!(value <= exact + 1e-9, "probabilistic {value} vs exact {exact}");
            }
        }
    }

    #[test]
    fn insphere_radii() {
        assert!((insphere_radius(2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((insphere_radius(3).unwrap() - 0.5773502691896258).abs() < 1e-15);
        assert!(matches!(insphere_radius(4), Err(RspError::UnsupportedCbits(4))));
    }

    /// Face-plane oracle for the canonical tetrahedron: a point is inside
    /// iff v·t_i ≥ −1/3 for all four vertices t_i.
    fn tetra_oracle(point: &BlochVector) -> bool {
        PlatonicSolid::Tetrahedron
            .vertices()
            .iter()
            .all(|t| point.dot(t) >= -1.0 / 3.0 - 1e-12)
    }

    #[test]
    fn hull_check_against_tetrahedron_face_oracle() {
        let tetra = PlatonicSolid::Tetrahedron.vertices();
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for _ in 0..300 {
            let point = crate::testutil::random_bloch_in_ball(&mut rng);
            let entries = vec![EnsembleEntry { bloch: point, prob: 1.0 }];
            let e = TargetEnsemble::new(None, entries).unwrap();
            let via_simplex = hull_perfect_check(&e, &tetra, 2).unwrap();
            assert_eq!(via_simplex, tetra_oracle(&point), "point {point:?}");
        }
    }

    #[test]
    fn dodecahedron_inside_tetrahedron_at_quarter_radius() {
        let tetra = PlatonicSolid::Tetrahedron.vertices();
        let small =
            platonic_ensemble(PlatonicSolid::Dodecahedron, 0.25, &IDENTITY_ORIENTATION).unwrap();
        assert!(hull_perfect_check(&small, &tetra, 2).unwrap());

        let large =
            platonic_ensemble(PlatonicSolid::Dodecahedron, 0.5, &IDENTITY_ORIENTATION).unwrap();
        assert!(!hull_perfect_check(&large, &tetra, 2).unwrap());
        // Oracle confirms some vertex escapes the hull at r = 0.5.
        assert!(large.entries().iter().any(|en| !tetra_oracle(&en.bloch)));
    }

    #[test]
    fn hull_contains_its_own_vertices() {
        let e = octahedron();
        let own: Vec<BlochVector> = e.entries().iter().map(|en| en.bloch).collect();
        assert!(hull_perfect_check(&e, &own, 3).unwrap());
        assert!(matches!(
            hull_perfect_check(&e, &own, 2),
            Err(RspError::TooManyVertices { .. })
        ));
    }

    #[test]
    fn optimal_partition_is_stable_across_radii() {
        // The fixed-radius term is a monotone transform of the block Bloch
        // length, so the argmax partition must not depend on r.
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        for _ in 0..4 {
            let dirs: Vec<BlochVector> = (0..7).map(|_| random_unit_bloch(&mut rng)).collect();
            let mut witnesses = Vec::new();
            for &r in &[0.3, 0.7, 1.0] {
                let entries: Vec<EnsembleEntry> = dirs
                    .iter()
                    .map(|d| EnsembleEntry { bloch: d.scaled(r), prob: 1.0 / 7.0 })
                    .collect();
                let e = TargetEnsemble::new(None, entries).unwrap();
                let result = exact_threshold(&e, 2).unwrap();
                witnesses.push(result.witness.unwrap());
            }
            assert_eq!(witnesses[0], witnesses[1]);
            assert_eq!(witnesses[1], witnesses[2]);
        }
    }

    #[test]
    fn restricted_growth_enumeration_count() {
        // Σ_{k≤4} S(6,k) = 1 + 31 + 90 + 65 = 187 partitions of six states
        // into at most four blocks.
        let mut count = 0usize;
        fn rec(depth: usize, used: usize, n: usize, cap: usize, count: &mut usize) {
            if depth == n {
                *count += 1;
                return;
            }
            for k in 0..(used + 1).min(cap) {
                rec(depth + 1, used.max(k + 1), n, cap, count);
            }
        }
        rec(0, 0, 6, 4, &mut count);
        assert_eq!(count, 187);
    }
}
