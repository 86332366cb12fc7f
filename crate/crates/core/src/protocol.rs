//! Simulation of the deterministic entanglement-based RSP protocol.
//!
//! Alice measures her half of a shared two-qubit state with the four-element
//! POVM {½ σ_m|ψ*⟩⟨ψ*|σ_m†}, sends the outcome as a two-bit message, and Bob
//! applies the matching Pauli correction. For mixed targets of radius r a
//! veto suppresses the true message with probability 1−r (the message "00"
//! is sent instead), steering Bob's average output to r|ψ⟩⟨ψ| + (1−r)𝟙/2.
//!
//! Expected mode propagates density matrices; sampled mode draws per-shot
//! outcomes and vetoes from a seeded generator (each shot's state is the
//! exact conditional density — shot noise enters through outcome and
//! tomography sampling only). Six-setting tomography (X±, Y±, Z± counts)
//! with linear-inversion reconstruction closes the loop.

use crate::ensembles::TargetEnsemble;
use crate::error::{Result, RspError};
use crate::matrix::Mat2;
use crate::qstate::{
    angles_to_state, bell_phi_plus, bloch_to_density, fidelity, pauli_conjugate, werner,
    CorrectionLabel, PureAngles, QubitDensity, TwoQubitDensity,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

/// The shared two-qubit resource state.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum SourceModel {
    /// Noiseless |Φ+⟩⟨Φ+|.
    IdealPhiPlus,
    /// v|Φ+⟩⟨Φ+| + (1−v)𝟙/4.
    Werner(f64),
    /// Any user-supplied two-qubit density matrix (Alice first).
    Explicit(TwoQubitDensity),
}

impl SourceModel {
    pub fn density(&self) -> Result<TwoQubitDensity> {
        match self {
            SourceModel::IdealPhiPlus => Ok(bell_phi_plus()),
            SourceModel::Werner(v) => werner(*v),
            SourceModel::Explicit(rho) => Ok(rho.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SourceModel::IdealPhiPlus => "ideal".to_string(),
            SourceModel::Werner(v) => format!("werner:{v}"),
            SourceModel::Explicit(_) => "explicit".to_string(),
        }
    }
}

/// A state to prepare remotely: angles on the sphere plus Bloch radius.
#[derive(Clone, Copy, Debug)]
pub struct RspTarget {
    pub angles: PureAngles,
    pub radius: f64,
}

impl RspTarget {
    pub fn new(angles: PureAngles, radius: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&radius) {
            return Err(RspError::RadiusOutOfRange(radius));
        }
        Ok(Self { angles, radius })
    }

    pub fn from_bloch(b: &crate::qstate::BlochVector) -> Result<Self> {
        let (angles, radius) = b.to_angles();
        Self::new(angles, radius.min(1.0))
    }

    /// The target density matrix r|ψ⟩⟨ψ| + (1−r)𝟙/2.
    pub fn density(&self) -> QubitDensity {
        angles_to_state(&self.angles, self.radius).expect("radius validated")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    Expected,
    Sampled,
}

#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub source: SourceModel,
    pub target: RspTarget,
    pub shots: u64,
    pub seed: u64,
    pub mode: SimMode,
}

/// Alice's POVM {E_m} = {½ σ_m|ψ*(φ,θ)⟩⟨ψ*(φ,θ)|σ_m†}, indexed like
/// [`CorrectionLabel`]. Elements are rank one with trace ½ and sum to 𝟙.
pub fn povm_elements(a: &PureAngles) -> [Mat2; 4] {
    let ket = a.ket();
    let conj_ket = [ket[0].conj(), ket[1].conj()];
    let projector = Mat2::outer(conj_ket);
    CorrectionLabel::ALL.map(|label| {
        let u = label.matrix();
        u.mul(&projector).mul(&u.adjoint()).scale(0.5)
    })
}

/// One POVM branch: its probability and Bob's conditional state (before
/// correction). The conditional is absent when the branch probability is
/// below 1e-15.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub probability: f64,
    pub bob_conditional: Option<QubitDensity>,
}

/// Measurement statistics of the POVM on Alice's half of the source:
/// p_m = Tr[(E_m ⊗ 𝟙)ρ_AB] with Bob's normalized conditional marginal.
pub fn outcome_distribution(source: &SourceModel, a: &PureAngles) -> Result<[Outcome; 4]> {
    let rho = source.density()?;
    let elements = povm_elements(a);
    let mut out = Vec::with_capacity(4);
    for element in &elements {
        let lifted = element.kron(&Mat2::identity());
        let product = lifted.mul(rho.matrix());
        let p = product.trace().re.max(0.0);
        let conditional = if p < 1e-15 {
            None
        } else {
            let reduced = product.partial_trace_first().scale(1.0 / p);
            Some(QubitDensity::from_matrix(reduced)?)
        };
        out.push(Outcome { probability: p, bob_conditional: conditional });
    }
    let total: f64 = out.iter().map(|o| o.probability).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(RspError::InternalInconsistency(format!(
            "POVM outcome probabilities sum to {total}"
        )));
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone(), out[3].clone()])
}

/// Result of one simulated preparation.
#[derive(Clone, Debug)]
pub struct SimResult {
    pub expected_out: QubitDensity,
    pub reconstructed_out: Option<QubitDensity>,
    /// F(target, reconstruction) in sampled mode, F(target, expected)
    /// otherwise.
    pub fidelity_vs_target: f64,
    /// F(expected, reconstruction); absent in expected mode.
    pub fidelity_vs_expected: Option<f64>,
    /// Message probabilities in expected mode; message counts (summing to
    /// the shot count) in sampled mode.
    pub message_freqs: [f64; 4],
    /// Shannon entropy of the message distribution, in cbits.
    pub classical_cost_bits: f64,
}

pub(crate) fn entropy_bits(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// Message probabilities for the veto scheme over the actual outcome
/// distribution `p`: the veto redirects every branch to "00" with
/// probability 1−r.
fn message_probs(p: &[f64; 4], r: f64) -> [f64; 4] {
    [
        (1.0 - r) + r * p[0],
        r * p[1],
        r * p[2],
        r * p[3],
    ]
}

/// Average state Bob ends up with, propagated exactly: with probability r
/// the true message arrives and Bob applies σ_m; with probability 1−r the
/// veto forces message "00" and the conditional passes through unchanged.
pub fn rsp_expected_output(source: &SourceModel, target: &RspTarget) -> Result<SimResult> {
    let dist = outcome_distribution(source, &target.angles)?;
    let r = target.radius;
    let mut acc = Mat2::zero();
    for (m, outcome) in dist.iter().enumerate() {
        let Some(conditional) = &outcome.bob_conditional else { continue };
        let label = CorrectionLabel::from_index(m).expect("four outcomes");
        let corrected = pauli_conjugate(label, conditional);
        let branch = corrected.matrix().scale(r).add(&conditional.matrix().scale(1.0 - r));
        acc = acc.add(&branch.scale(outcome.probability));
    }
    let expected_out = QubitDensity::from_matrix(acc)?;
    let probs = [
        dist[0].probability,
        dist[1].probability,
        dist[2].probability,
        dist[3].probability,
    ];
    let freqs = message_probs(&probs, r);
    Ok(SimResult {
        expected_out,
        reconstructed_out: None,
        fidelity_vs_target: fidelity(&target.density(), &expected_out),
        fidelity_vs_expected: None,
        message_freqs: freqs,
        classical_cost_bits: entropy_bits(&freqs),
    })
}

/// Message distribution for uniform POVM outcomes (ideal or Werner source):
/// {(1−r) + r/4, r/4, r/4, r/4}. Its entropy equals [`shannon_cost`].
pub fn message_distribution(r: f64) -> [f64; 4] {
    assert!((0.0..=1.0).contains(&r), "radius {r} outside [0, 1]");
    message_probs(&[0.25; 4], r)
}

/// One sampled protocol run.
#[derive(Clone, Debug)]
pub struct ShotRecord {
    pub shot: u64,
    /// POVM outcome index m.
    pub outcome: usize,
    /// Whether the veto replaced the true message.
    pub vetoed: bool,
    /// Message index actually sent (0 when vetoed).
    pub message: usize,
    /// Bob's state after applying the correction for `message`.
    pub bob_out: QubitDensity,
}

impl ShotRecord {
    pub fn message_bits(&self) -> &'static str {
        CorrectionLabel::from_index(self.message).expect("valid message").bits()
    }
}

/// Deterministic per-shot stream: shot i draws from a generator derived
/// from (seed, i), so records are reproducible and order-independent.
pub struct SampleRun {
    branches: Vec<(f64, QubitDensity)>,
    corrected: Vec<[QubitDensity; 4]>,
    radius: f64,
    seed: u64,
    shots: u64,
    next: u64,
}

impl SampleRun {
    pub fn shots(&self) -> u64 {
        self.shots
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn derived_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(stream)))
}

impl Iterator for SampleRun {
    type Item = ShotRecord;

    fn next(&mut self) -> Option<ShotRecord> {
        if self.next >= self.shots {
            return None;
        }
        let shot = self.next;
        self.next += 1;
        let mut rng = derived_rng(self.seed, shot);
        let draw: f64 = rng.random();
        let mut outcome = self.branches.len() - 1;
        let mut cumulative = 0.0;
        for (m, (p, _)) in self.branches.iter().enumerate() {
            cumulative += p;
            if draw < cumulative {
                outcome = m;
                break;
            }
        }
        let vetoed = rng.random::<f64>() < (1.0 - self.radius);
        let message = if vetoed { 0 } else { outcome };
        let bob_out = self.corrected[outcome][message];
        Some(ShotRecord { shot, outcome, vetoed, message, bob_out })
    }
}

/// Sampled protocol stream. Requires sampled mode with at least one shot.
pub fn rsp_sample_run(config: &ProtocolConfig) -> Result<SampleRun> {
    if config.mode != SimMode::Sampled || config.shots == 0 {
        return Err(RspError::SampledModeRequired);
    }
    let dist = outcome_distribution(&config.source, &config.target.angles)?;
    let mut branches = Vec::with_capacity(4);
    let mut corrected = Vec::with_capacity(4);
    for outcome in dist.iter() {
        let conditional = match &outcome.bob_conditional {
            Some(c) => *c,
            None => QubitDensity::maximally_mixed(),
        };
        branches.push((outcome.probability, conditional));
        corrected.push(
            CorrectionLabel::ALL.map(|label| pauli_conjugate(label, &conditional)),
        );
    }
    Ok(SampleRun {
        branches,
        corrected,
        radius: config.target.radius,
        seed: config.seed,
        shots: config.shots,
        next: 0,
    })
}

/// Measurement axes of Bob's analyzer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    fn index(&self) -> usize {
        match self {
            PauliAxis::X => 0,
            PauliAxis::Y => 1,
            PauliAxis::Z => 2,
        }
    }
}

/// Six-setting coincidence counts: for each axis, the number of +1 outcomes
/// out of `shots_per_setting` (the −1 count is the complement, so the two
/// eigenstate counts always sum to the per-setting total).
#[derive(Clone, Copy, Debug)]
pub struct TomographyCounts {
    shots_per_setting: u64,
    plus_counts: [u64; 3],
}

impl TomographyCounts {
    pub fn new(shots_per_setting: u64, plus_counts: [u64; 3]) -> Result<Self> {
        if plus_counts.iter().any(|&c| c > shots_per_setting) {
            return Err(RspError::InternalInconsistency(
                "plus count exceeds shots per setting".into(),
            ));
        }
        Ok(Self { shots_per_setting, plus_counts })
    }

    pub fn shots_per_setting(&self) -> u64 {
        self.shots_per_setting
    }

    pub fn plus(&self, axis: PauliAxis) -> u64 {
        self.plus_counts[axis.index()]
    }

    pub fn minus(&self, axis: PauliAxis) -> u64 {
        self.shots_per_setting - self.plus_counts[axis.index()]
    }
}

/// Sample six-setting tomography of `rho`: the + count on axis A is
/// binomial with success probability (1 + ⟨A⟩)/2.
pub fn simulate_tomography(rho: &QubitDensity, shots_per_setting: u64, seed: u64) -> TomographyCounts {
    let b = rho.bloch();
    let components = [b.x, b.y, b.z];
    let mut plus_counts = [0u64; 3];
    for (axis, &comp) in components.iter().enumerate() {
        let p_plus = (0.5 * (1.0 + comp)).clamp(0.0, 1.0);
        let mut rng = derived_rng(seed, 0x70D0 + axis as u64);
        let dist = Binomial::new(shots_per_setting, p_plus).expect("probability in range");
        plus_counts[axis] = dist.sample(&mut rng);
    }
    TomographyCounts { shots_per_setting, plus_counts }
}

/// Linear-inversion reconstruction: b̂_A = 2·freq(A+) − 1 per axis, with a
/// radial projection onto the unit ball when sampling noise pushes the
/// estimate outside.
pub fn reconstruct(counts: &TomographyCounts) -> Result<QubitDensity> {
    if counts.shots_per_setting == 0 {
        return Err(RspError::ZeroShots);
    }
    let shots = counts.shots_per_setting as f64;
    let comp = counts.plus_counts.map(|c| 2.0 * (c as f64 / shots) - 1.0);
    let mut b = crate::qstate::BlochVector::new(comp[0], comp[1], comp[2]);
    let norm = b.norm();
    if norm > 1.0 {
        b = b.scaled(1.0 / norm);
    }
    bloch_to_density(&b)
}

/// Options for a full per-ensemble run.
#[derive(Clone, Copy, Debug)]
pub struct GridOptions {
    pub mode: SimMode,
    /// Protocol shots per state (sampled mode; drives message statistics).
    pub shots: u64,
    /// Tomography shots per setting per state (sampled mode).
    pub tomography_shots: u64,
    pub seed: u64,
}

/// Per-ensemble simulation summary.
#[derive(Clone, Debug)]
pub struct GridOutcome {
    pub per_state: Vec<SimResult>,
    pub mean_fidelity_vs_target: f64,
    pub stderr_vs_target: f64,
    pub mean_fidelity_vs_expected: Option<f64>,
    pub stderr_vs_expected: Option<f64>,
    /// Message probabilities averaged over states (sampled counts are
    /// normalized first).
    pub mean_message_freqs: [f64; 4],
    pub mean_cost_bits: f64,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Run the protocol for every state of the ensemble. Expected mode reports
/// analytic fidelities; sampled mode adds per-state message sampling,
/// tomography, and reconstruction, reporting both F(target, recon) and
/// F(expected, recon) with standard errors of the mean.
pub fn run_experiment_grid(
    source: &SourceModel,
    ensemble: &TargetEnsemble,
    opts: &GridOptions,
) -> Result<GridOutcome> {
    if opts.mode == SimMode::Sampled && (opts.shots == 0 || opts.tomography_shots == 0) {
        return Err(RspError::SampledModeRequired);
    }
    let mut per_state = Vec::with_capacity(ensemble.len());
    for (idx, entry) in ensemble.entries().iter().enumerate() {
        let target = RspTarget::from_bloch(&entry.bloch)?;
        let mut result = rsp_expected_output(source, &target)?;
        if opts.mode == SimMode::Sampled {
            let config = ProtocolConfig {
                source: source.clone(),
                target,
                shots: opts.shots,
                seed: splitmix64(opts.seed ^ splitmix64(0x5A17 + idx as u64)),
                mode: SimMode::Sampled,
            };
            let mut message_counts = [0u64; 4];
            for record in rsp_sample_run(&config)? {
                message_counts[record.message] += 1;
            }
            let counts = simulate_tomography(
                &result.expected_out,
                opts.tomography_shots,
                splitmix64(opts.seed ^ splitmix64(0x7EC0 + idx as u64)),
            );
            let recon = reconstruct(&counts)?;
            result.fidelity_vs_expected = Some(fidelity(&result.expected_out, &recon));
            result.fidelity_vs_target = fidelity(&target.density(), &recon);
            result.reconstructed_out = Some(recon);
            result.message_freqs = message_counts.map(|c| c as f64);
        }
        per_state.push(result);
    }

    let vs_target: Vec<f64> = per_state.iter().map(|r| r.fidelity_vs_target).collect();
    let (mean_t, se_t) = mean_and_stderr(&vs_target);
    let (mean_e, se_e) = if opts.mode == SimMode::Sampled {
        let vs_expected: Vec<f64> =
            per_state.iter().filter_map(|r| r.fidelity_vs_expected).collect();
        let (m, s) = mean_and_stderr(&vs_expected);
        (Some(m), Some(s))
    } else {
        (None, None)
    };

    let mut mean_freqs = [0.0f64; 4];
    let mut mean_cost = 0.0;
    for r in &per_state {
        let total: f64 = r.message_freqs.iter().sum();
        for (slot, &f) in mean_freqs.iter_mut().zip(&r.message_freqs) {
            *slot += f / total;
        }
        mean_cost += r.classical_cost_bits;
    }
    let n = per_state.len() as f64;
    for slot in mean_freqs.iter_mut() {
        *slot /= n;
    }
    mean_cost /= n;

    Ok(GridOutcome {
        per_state,
        mean_fidelity_vs_target: mean_t,
        stderr_vs_target: se_t,
        mean_fidelity_vs_expected: mean_e,
        stderr_vs_expected: se_e,
        mean_message_freqs: mean_freqs,
        mean_cost_bits: mean_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{platonic_ensemble, PlatonicSolid, IDENTITY_ORIENTATION};
    use crate::matrix::{hermitian_eigen2, C64, Mat4};
    use crate::qstate::{shannon_cost, BlochVector};
    use crate::testutil::random_unit_bloch;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_angles(rng: &mut ChaCha8Rng) -> PureAngles {
        PureAngles::new(rng.random::<f64>() * PI, rng.random::<f64>() * 2.0 * PI).unwrap()
    }

    fn assert_mat2_close(a: &Mat2, b: &Mat2, tol: f64) {
        for r in 0..2 {
            for c in 0..2 {
                assert!(
                    (a.get(r, c) - b.get(r, c)).norm() <= tol,
                    "entry ({r},{c}): {:?} vs {:?}",
                    a.get(r, c),
                    b.get(r, c)
                );
            }
        }
    }

    #[test]
    fn povm_elements_complete_and_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..1000 {
            let a = random_angles(&mut rng);
            let elements = povm_elements(&a);
            let mut sum = Mat2::zero();
            for e in &elements {
                assert!((e.trace().re - 0.5).abs() < 1e-12);
                let (evals, _) = hermitian_eigen2(e);
                assert!(evals[1].abs() < 1e-12, "rank one");
                assert!(evals[0] >= -1e-12);
                sum = sum.add(e);
            }
            assert_mat2_close(&sum, &Mat2::identity(), 1e-12);
        }
    }

    #[test]
    fn povm_for_polar_target() {
        let a = PureAngles::new(0.0, 0.0).unwrap();
        let e = povm_elements(&a);
        // |ψ*⟩ = |0⟩: elements ½|0⟩⟨0|, ½|0⟩⟨0|, ½|1⟩⟨1|, ½|1⟩⟨1| in the
        // I, Z, X, XZ order.
        assert_mat2_close(&e[0], &Mat2::diag(0.5, 0.0), 1e-15);
        assert_mat2_close(&e[1], &Mat2::diag(0.5, 0.0), 1e-15);
        assert_mat2_close(&e[2], &Mat2::diag(0.0, 0.5), 1e-15);
        assert_mat2_close(&e[3], &Mat2::diag(0.0, 0.5), 1e-15);
    }

    #[test]
    fn povm_for_equatorial_target_matches_hand_matrices() {
        // φ=π/2, θ=0: |ψ*⟩ = (|0⟩+|1⟩)/√2; conjugating by Z or XZ flips
        // the projector to |−⟩⟨−|.
        let a = PureAngles::new(FRAC_PI_2, 0.0).unwrap();
        let e = povm_elements(&a);
        let plus = Mat2::new([
            [C64::new(0.25, 0.0), C64::new(0.25, 0.0)],
            [C64::new(0.25, 0.0), C64::new(0.25, 0.0)],
        ]);
        let minus = Mat2::new([
            [C64::new(0.25, 0.0), C64::new(-0.25, 0.0)],
            [C64::new(-0.25, 0.0), C64::new(0.25, 0.0)],
        ]);
        assert_mat2_close(&e[0], &plus, 1e-15);
        assert_mat2_close(&e[1], &minus, 1e-15);
        assert_mat2_close(&e[2], &plus, 1e-15);
        assert_mat2_close(&e[3], &minus, 1e-15);
    }

    #[test]
    fn ideal_source_gives_uniform_outcomes_and_perfect_conditionals() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..100 {
            let a = random_angles(&mut rng);
            let dist = outcome_distribution(&SourceModel::IdealPhiPlus, &a).unwrap();
            let psi = angles_to_state(&a, 1.0).unwrap();
            for (m, outcome) in dist.iter().enumerate() {
                assert!((outcome.probability - 0.25).abs() < 1e-12);
                let conditional = outcome.bob_conditional.as_ref().unwrap();
                let label = CorrectionLabel::from_index(m).unwrap();
                let corrected = pauli_conjugate(label, conditional);
                assert_mat2_close(corrected.matrix(), psi.matrix(), 1e-12);
            }
        }
    }

    #[test]
    fn werner_conditionals_match_closed_form() {
        // Linearity of the measurement map: conditional =
        // v·σ_m|ψ⟩⟨ψ|σ_m† + (1−v)·𝟙/2 — verified against the 4×4 route.
        let v = 0.83;
        let a = PureAngles::new(0.0, 0.0).unwrap();
        let dist = outcome_distribution(&SourceModel::Werner(v), &a).unwrap();
        let psi = QubitDensity::ground();
        for (m, outcome) in dist.iter().enumerate() {
            assert!((outcome.probability - 0.25).abs() < 1e-12);
            let label = CorrectionLabel::from_index(m).unwrap();
            let rotated = pauli_conjugate(label, &psi);
            let expect = rotated.matrix().scale(v).add(&Mat2::diag(0.5, 0.5).scale(1.0 - v));
            assert_mat2_close(
                outcome.bob_conditional.as_ref().unwrap().matrix(),
                &expect,
                1e-12,
            );
        }
    }

    #[test]
    fn separable_source_yields_maximally_mixed_conditionals() {
        let a = PureAngles::new(1.0, 2.0).unwrap();
        let dist = outcome_distribution(&SourceModel::Werner(0.0), &a).unwrap();
        for outcome in dist.iter() {
            assert!((outcome.probability - 0.25).abs() < 1e-12);
            assert_mat2_close(
                outcome.bob_conditional.as_ref().unwrap().matrix(),
                &Mat2::diag(0.5, 0.5),
                1e-12,
            );
        }
    }

    #[test]
    fn ideal_protocol_is_deterministic_and_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..50 {
            let target = RspTarget::new(random_angles(&mut rng), 1.0).unwrap();
            let result = rsp_expected_output(&SourceModel::IdealPhiPlus, &target).unwrap();
            assert!((result.fidelity_vs_target - 1.0).abs() < 1e-12);
            assert_mat2_close(result.expected_out.matrix(), target.density().matrix(), 1e-12);
        }
        // Every Platonic vertex as well.
        for solid in PlatonicSolid::ALL {
            for vertex in solid.vertices() {
                let target = RspTarget::from_bloch(&vertex).unwrap();
                let result = rsp_expected_output(&SourceModel::IdealPhiPlus, &target).unwrap();
                assert!((result.fidelity_vs_target - 1.0).abs() < 1e-12, "{}", solid.name());
            }
        }
    }

    #[test]
    fn veto_mixes_toward_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for &r in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let target = RspTarget::new(random_angles(&mut rng), r).unwrap();
            let result = rsp_expected_output(&SourceModel::IdealPhiPlus, &target).unwrap();
            let pure = angles_to_state(&target.angles, 1.0).unwrap();
            let mixed = pure.matrix().scale(r).add(&Mat2::diag(0.5, 0.5).scale(1.0 - r));
            assert_mat2_close(result.expected_out.matrix(), &mixed, 1e-12);
            // Uniform outcomes: frequencies are the veto distribution (sum
            // 1) and the classical cost is the footnote entropy.
            let total: f64 = result.message_freqs.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            for (got, expect) in result.message_freqs.iter().zip(&message_distribution(r)) {
                assert!((got - expect).abs() < 1e-12);
            }
            assert!((result.classical_cost_bits - shannon_cost(r)).abs() < 1e-12);
        }
    }

    #[test]
    fn werner_source_fidelity_is_half_one_plus_v() {
        let v = 0.9743;
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..20 {
            let target = RspTarget::new(random_angles(&mut rng), 1.0).unwrap();
            let result = rsp_expected_output(&SourceModel::Werner(v), &target).unwrap();
            assert!((result.fidelity_vs_target - (1.0 + v) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_output_is_affine_in_the_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        // Two arbitrary sources built from PSD 4×4 matrices.
        let random_source = |rng: &mut ChaCha8Rng| {
            let mut m = Mat4::zero();
            for r in 0..4 {
                for c in 0..4 {
                    m.set(r, c, C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
                }
            }
            let psd = m.mul(&m.adjoint());
            let trace = psd.trace().re;
            TwoQubitDensity::from_matrix(psd.scale(1.0 / trace)).unwrap()
        };
        for _ in 0..10 {
            let rho1 = random_source(&mut rng);
            let rho2 = random_source(&mut rng);
            let alpha = 0.3;
            let blend = TwoQubitDensity::from_matrix(
                rho1.matrix().scale(alpha).add(&rho2.matrix().scale(1.0 - alpha)),
            )
            .unwrap();
            let target = RspTarget::new(random_angles(&mut rng), 0.7).unwrap();
            let out1 = rsp_expected_output(&SourceModel::Explicit(rho1), &target).unwrap();
            let out2 = rsp_expected_output(&SourceModel::Explicit(rho2), &target).unwrap();
            let out_blend = rsp_expected_output(&SourceModel::Explicit(blend), &target).unwrap();
            let combo = out1
                .expected_out
                .matrix()
                .scale(alpha)
                .add(&out2.expected_out.matrix().scale(1.0 - alpha));
            assert_mat2_close(out_blend.expected_out.matrix(), &combo, 1e-12);
        }
    }

    #[test]
    fn message_distribution_examples_and_entropy_identity() {
        assert_eq!(message_distribution(1.0), [0.25, 0.25, 0.25, 0.25]);
        assert_eq!(message_distribution(0.0), [1.0, 0.0, 0.0, 0.0]);
        let d = message_distribution(0.6);
        assert!((d[0] - 0.55).abs() < 1e-15);
        for &p in &d[1..] {
            assert!((p - 0.15).abs() < 1e-15);
        }
        // Footnote cost formula vs direct entropy, across the radius grid.
        for i in 0..=100 {
            let r = i as f64 / 100.0;
            let h = entropy_bits(&message_distribution(r));
            assert!((h - shannon_cost(r)).abs() < 1e-12, "r = {r}");
        }
    }

    #[test]
    fn sampled_run_is_deterministic_and_exact_for_pure_targets() {
        let config = ProtocolConfig {
            source: SourceModel::IdealPhiPlus,
            target: RspTarget::new(PureAngles::new(1.1, 0.7).unwrap(), 1.0).unwrap(),
            shots: 10_000,
            seed: 99,
            mode: SimMode::Sampled,
        };
        let psi = config.target.density();
        let records: Vec<ShotRecord> = rsp_sample_run(&config).unwrap().collect();
        assert_eq!(records.len(), 10_000);
        for record in &records {
            assert!(!record.vetoed);
            assert_eq!(record.message, record.outcome);
            assert_mat2_close(record.bob_out.matrix(), psi.matrix(), 1e-12);
        }
        let again: Vec<ShotRecord> = rsp_sample_run(&config).unwrap().collect();
        for (a, b) in records.iter().zip(&again) {
            assert_eq!(a.outcome, b.outcome);
            assert_eq!(a.vetoed, b.vetoed);
        }
    }

    #[test]
    fn sampled_message_frequencies_match_the_distribution() {
        let shots = 100_000u64;
        let config = ProtocolConfig {
            source: SourceModel::IdealPhiPlus,
            target: RspTarget::new(PureAngles::new(0.4, 5.0).unwrap(), 0.5).unwrap(),
            shots,
            seed: 123,
            mode: SimMode::Sampled,
        };
        let mut counts = [0u64; 4];
        for record in rsp_sample_run(&config).unwrap() {
            counts[record.message] += 1;
        }
        let expect = message_distribution(0.5);
        // "00" frequency within 3σ of 0.625.
        let sigma = (expect[0] * (1.0 - expect[0]) / shots as f64).sqrt();
        let freq0 = counts[0] as f64 / shots as f64;
        assert!((freq0 - expect[0]).abs() < 3.0 * sigma, "freq {freq0}");
        // Chi-square over the four cells at significance 0.001 (df = 3).
        let chi2: f64 = counts
            .iter()
            .zip(&expect)
            .map(|(&c, &p)| {
                let e = p * shots as f64;
                (c as f64 - e) * (c as f64 - e) / e
            })
            .sum();
        assert!(chi2 < 16.266, "chi-square {chi2}");
    }

    #[test]
    fn tomography_counts_behave() {
        let mixed = QubitDensity::maximally_mixed();
        let counts = simulate_tomography(&mixed, 1_000_000, 7);
        for axis in PauliAxis::ALL {
            let sigma = (1_000_000f64 * 0.25).sqrt();
            assert!((counts.plus(axis) as f64 - 500_000.0).abs() < 3.0 * sigma);
            assert_eq!(counts.plus(axis) + counts.minus(axis), 1_000_000);
        }

        let ground = QubitDensity::ground();
        let counts = simulate_tomography(&ground, 10_000, 8);
        assert_eq!(counts.plus(PauliAxis::Z), 10_000);

        let rho = bloch_to_density(&BlochVector::new(0.6, 0.0, 0.0)).unwrap();
        let counts = simulate_tomography(&rho, 100_000, 9);
        let freq = counts.plus(PauliAxis::X) as f64 / 100_000.0;
        let sigma = (0.8 * 0.2 / 100_000.0f64).sqrt();
        assert!((freq - 0.8).abs() < 3.0 * sigma);
    }

    #[test]
    fn reconstruction_inverts_exact_counts_and_projects() {
        // Noiseless counts for |0⟩⟨0|.
        let counts = TomographyCounts::new(1000, [500, 500, 1000]).unwrap();
        let rho = reconstruct(&counts).unwrap();
        assert_mat2_close(rho.matrix(), &Mat2::diag(1.0, 0.0), 1e-15);

        // Counts implying b̂ = (0.8, 0.8, 0.8) project onto the unit ball.
        let counts = TomographyCounts::new(10, [9, 9, 9]).unwrap();
        let rho = reconstruct(&counts).unwrap();
        assert!((rho.bloch().norm() - 1.0).abs() < 1e-12);

        assert!(matches!(
            reconstruct(&TomographyCounts::new(0, [0, 0, 0]).unwrap()),
            Err(RspError::ZeroShots)
        ));
    }

    #[test]
    fn reconstruction_of_maximally_mixed_is_tight_at_a_million_shots() {
        for seed in 0..20 {
            let counts = simulate_tomography(&QubitDensity::maximally_mixed(), 1_000_000, seed);
            let rho = reconstruct(&counts).unwrap();
            assert!(rho.bloch().norm() < 0.01, "seed {seed}");
        }
    }

    #[test]
    fn tomography_pipeline_recovers_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        for trial in 0..5 {
            let b = random_unit_bloch(&mut rng).scaled(rng.random::<f64>());
            let rho = bloch_to_density(&b).unwrap();
            for seed in 0..5 {
                let counts = simulate_tomography(&rho, 1_000_000, 1000 * trial + seed);
                let recon = reconstruct(&counts).unwrap();
                assert!(fidelity(&rho, &recon) > 0.999);
            }
        }
    }

    #[test]
    fn expected_grid_means_are_analytic() {
        let opts = GridOptions { mode: SimMode::Expected, shots: 0, tomography_shots: 0, seed: 1 };

        let ico = platonic_ensemble(PlatonicSolid::Icosahedron, 1.0, &IDENTITY_ORIENTATION)
            .unwrap();
        let out = run_experiment_grid(&SourceModel::IdealPhiPlus, &ico, &opts).unwrap();
        assert!((out.mean_fidelity_vs_target - 1.0).abs() < 1e-12);
        assert!(out.stderr_vs_target < 1e-12);

        let v = 0.9743;
        let dodeca = platonic_ensemble(PlatonicSolid::Dodecahedron, 1.0, &IDENTITY_ORIENTATION)
            .unwrap();
        let out = run_experiment_grid(&SourceModel::Werner(v), &dodeca, &opts).unwrap();
        assert!((out.mean_fidelity_vs_target - (1.0 + v) / 2.0).abs() < 1e-12);

        // Radius-zero targets are prepared exactly: the veto always fires
        // and Bob's marginal is exactly 𝟙/2.
        let ico0 = platonic_ensemble(PlatonicSolid::Icosahedron, 0.0, &IDENTITY_ORIENTATION)
            .unwrap();
        let out = run_experiment_grid(&SourceModel::Werner(v), &ico0, &opts).unwrap();
        assert!((out.mean_fidelity_vs_target - 1.0).abs() < 1e-12);
        // Cost of the always-veto channel is zero cbits.
        assert!(out.mean_cost_bits.abs() < 1e-12);
    }

    #[test]
    fn sampled_grid_reports_counts_and_reconstructions() {
        let ico = platonic_ensemble(PlatonicSolid::Icosahedron, 1.0, &IDENTITY_ORIENTATION)
            .unwrap();
        let opts = GridOptions {
            mode: SimMode::Sampled,
            shots: 2_000,
            tomography_shots: 200_000,
            seed: 77,
        };
        let out = run_experiment_grid(&SourceModel::Werner(0.9743), &ico, &opts).unwrap();
        assert_eq!(out.per_state.len(), 12);
        for state in &out.per_state {
            let total: f64 = state.message_freqs.iter().sum();
            assert_eq!(total, 2_000.0);
            assert!(state.reconstructed_out.is_some());
            let fe = state.fidelity_vs_expected.unwrap();
            assert!(fe > 0.99, "reconstruction close to expected state, got {fe}");
        }
        assert!(out.mean_fidelity_vs_expected.unwrap() > 0.99);
        assert!((out.mean_fidelity_vs_target - 0.987).abs() < 0.01);
        let freq_sum: f64 = out.mean_message_freqs.iter().sum();
        assert!((freq_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sample_run_requires_sampled_mode() {
        let config = ProtocolConfig {
            source: SourceModel::IdealPhiPlus,
            target: RspTarget::new(PureAngles::new(0.1, 0.1).unwrap(), 1.0).unwrap(),
            shots: 0,
            seed: 1,
            mode: SimMode::Sampled,
        };
        assert!(matches!(rsp_sample_run(&config), Err(RspError::SampledModeRequired)));
        let config = ProtocolConfig { shots: 10, mode: SimMode::Expected, ..config };
        assert!(matches!(rsp_sample_run(&config), Err(RspError::SampledModeRequired)));
    }
}
