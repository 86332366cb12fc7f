//! Single- and two-qubit state algebra.
//!
//! States live in two interchangeable forms: Bloch vectors and 2×2 density
//! matrices. A qubit with Bloch vector r⃗ is ρ = (𝟙 + r⃗·σ⃗)/2; the same state
//! can be parametrized as ρ(φ, θ, r) = r|ψ⟩⟨ψ| + (1−r)𝟙/2 with
//! |ψ⟩ = cos(φ/2)|0⟩ + e^{iθ} sin(φ/2)|1⟩.
//!
//! Fidelity is computed two ways: the general square-root form
//! F(σ,τ) = [Tr √(√σ τ √σ)]² and the qubit closed form
//! Tr(στ) + √(1−Trσ²)√(1−Trτ²); they must agree to 1e-10 and the test suite
//! holds them to that.

use crate::error::{Result, RspError};
use crate::matrix::{hermitian_eigen2, hermitian_eigen4, sqrt_psd2, sqrt_psd4, C64, Mat2, Mat4};

/// Absolute tolerance for validation of Hermiticity, trace and spectra.
pub const DENSITY_TOL: f64 = 1e-12;
/// Inputs violating the invariants by at most this much are repaired
/// (symmetrized, eigenvalue-clipped, trace-rescaled); beyond it, rejected.
pub const DENSITY_REPAIR_TOL: f64 = 1e-9;

/// A point in the Bloch ball, |r⃗| ≤ 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn scaled(&self, s: f64) -> BlochVector {
        BlochVector::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn add(&self, other: &BlochVector) -> BlochVector {
        BlochVector::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    /// Unit vector along self; `None` for the zero vector.
    pub fn normalized(&self) -> Option<BlochVector> {
        let n = self.norm();
        if n < 1e-15 {
            None
        } else {
            Some(self.scaled(1.0 / n))
        }
    }

    /// Polar/azimuthal angles and radius. The center of the ball maps to
    /// the north-pole angles with radius zero.
    pub fn to_angles(&self) -> (PureAngles, f64) {
        let r = self.norm();
        if r < 1e-15 {
            return (PureAngles { phi: 0.0, theta: 0.0 }, 0.0);
        }
        let phi = (self.z / r).clamp(-1.0, 1.0).acos();
        let mut theta = self.y.atan2(self.x);
        if theta < 0.0 {
            theta += 2.0 * std::f64::consts::PI;
        }
        if theta >= 2.0 * std::f64::consts::PI {
            theta = 0.0;
        }
        (PureAngles { phi, theta }, r)
    }
}

/// Polar angle φ ∈ [0, π] and azimuthal angle θ ∈ [0, 2π) on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureAngles {
    phi: f64,
    theta: f64,
}

impl PureAngles {
    pub fn new(phi: f64, theta: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&phi)
            || !(0.0..2.0 * std::f64::consts::PI).contains(&theta)
        {
            return Err(RspError::AnglesOutOfRange { phi, theta });
        }
        Ok(Self { phi, theta })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Amplitudes of |ψ(φ,θ)⟩ in the computational basis.
    pub fn ket(&self) -> [C64; 2] {
        let half = 0.5 * self.phi;
        [
            C64::new(half.cos(), 0.0),
            C64::from_polar(half.sin(), self.theta),
        ]
    }

    /// Unit Bloch vector of |ψ(φ,θ)⟩.
    pub fn direction(&self) -> BlochVector {
        BlochVector::new(
            self.phi.sin() * self.theta.cos(),
            self.phi.sin() * self.theta.sin(),
            self.phi.cos(),
        )
    }
}

/// A validated single-qubit density matrix: Hermitian, unit trace,
/// positive semidefinite (all within [`DENSITY_TOL`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitDensity {
    m: Mat2,
}

impl QubitDensity {
    /// Validate a raw matrix. Defects up to [`DENSITY_REPAIR_TOL`] are
    /// repaired so that tomographically reconstructed inputs pass.
    pub fn from_matrix(raw: Mat2) -> Result<Self> {
        let defect = raw.hermiticity_defect();
        if defect > DENSITY_REPAIR_TOL {
            return Err(RspError::InvalidDensity(format!(
                "hermiticity defect {defect:e}"
            )));
        }
        let mut h = raw.hermitian_part();
        let tr = h.trace().re;
        if (tr - 1.0).abs() > DENSITY_REPAIR_TOL {
            return Err(RspError::InvalidDensity(format!("trace {tr}")));
        }
        if (tr - 1.0).abs() > DENSITY_TOL {
            h = h.scale(1.0 / tr);
        }
        let (evals, cols) = hermitian_eigen2(&h);
        if evals[1] < -DENSITY_REPAIR_TOL {
            return Err(RspError::InvalidDensity(format!(
                "negative eigenvalue {:e}",
                evals[1]
            )));
        }
        if evals[1] < 0.0 {
            // Clip the negative tail and renormalize.
            let clipped: Vec<f64> = evals.iter().map(|&e| e.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            let mut m = Mat2::zero();
            for (k, col) in cols.iter().enumerate() {
                m = m.add(&Mat2::outer(*col).scale(clipped[k] / total));
            }
            h = m;
        }
        Ok(Self { m: h })
    }

    pub fn maximally_mixed() -> Self {
        Self { m: Mat2::diag(0.5, 0.5) }
    }

    /// Pure state |0⟩⟨0|.
    pub fn ground() -> Self {
        Self { m: Mat2::diag(1.0, 0.0) }
    }

    /// Pure state from computational-basis amplitudes (must be normalized).
    pub fn from_ket(v: [C64; 2]) -> Self {
        Self { m: Mat2::outer(v) }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }

    /// Bloch components (Tr ρX, Tr ρY, Tr ρZ).
    pub fn bloch(&self) -> BlochVector {
        let m10 = self.m.get(1, 0);
        BlochVector::new(
            2.0 * m10.re,
            2.0 * m10.im,
            self.m.get(0, 0).re - self.m.get(1, 1).re,
        )
    }

    pub fn purity(&self) -> f64 {
        self.m.trace_mul(&self.m).re
    }

    /// Bloch radius r = √(2(Tr ρ² − ½)).
    pub fn radius(&self) -> f64 {
        (2.0 * (self.purity() - 0.5)).max(0.0).sqrt()
    }
}

/// ρ = (𝟙 + r⃗·σ⃗)/2. Vectors up to 1e-9 over unit norm are radially clipped;
/// anything longer is rejected.
pub fn bloch_to_density(b: &BlochVector) -> Result<QubitDensity> {
    let n = b.norm();
    if n > 1.0 + 1e-9 {
        return Err(RspError::BlochNormTooLarge(n));
    }
    let v = if n > 1.0 { b.scaled(1.0 / n) } else { *b };
    let m = Mat2::new([
        [
            C64::new(0.5 * (1.0 + v.z), 0.0),
            C64::new(0.5 * v.x, -0.5 * v.y),
        ],
        [
            C64::new(0.5 * v.x, 0.5 * v.y),
            C64::new(0.5 * (1.0 - v.z), 0.0),
        ],
    ]);
    Ok(QubitDensity { m })
}

/// ρ(φ, θ, r) = r|ψ⟩⟨ψ| + (1−r)𝟙/2.
pub fn angles_to_state(a: &PureAngles, r: f64) -> Result<QubitDensity> {
    if !(0.0..=1.0).contains(&r) {
        return Err(RspError::RadiusOutOfRange(r));
    }
    let pure = Mat2::outer(a.ket());
    let m = pure.scale(r).add(&Mat2::identity().scale(0.5 * (1.0 - r)));
    Ok(QubitDensity { m })
}

/// States closer to purity than this are treated as exactly pure inside the
/// fidelity routines. The square-root branch point at purity 1 would
/// otherwise turn ~1e-17 of roundoff dust into ~1e-8 of fidelity error.
const MIXEDNESS_FLOOR: f64 = 2e-13;

fn mixedness(rho: &QubitDensity) -> f64 {
    (1.0 - rho.purity()).max(0.0)
}

/// Uhlmann fidelity F(σ,τ) = [Tr √(√σ τ √σ)]², clamped into [0, 1].
pub fn fidelity(a: &QubitDensity, b: &QubitDensity) -> f64 {
    let rank_one = mixedness(a) < MIXEDNESS_FLOOR || mixedness(b) < MIXEDNESS_FLOOR;
    let root = sqrt_psd2(a.matrix());
    let middle = root.mul(b.matrix()).mul(&root);
    let (evals, _) = hermitian_eigen2(&middle);
    let hi = evals[0].max(0.0);
    let lo = if rank_one { 0.0 } else { evals[1].max(0.0) };
    let s = hi.sqrt() + lo.sqrt();
    (s * s).clamp(0.0, 1.0)
}

/// Qubit closed form F(σ,τ) = Tr(στ) + √(1−Trσ²)√(1−Trτ²), with the same
/// treat-as-pure floor as [`fidelity`] so the two routes agree.
pub fn fidelity_closed_form(a: &QubitDensity, b: &QubitDensity) -> f64 {
    let overlap = a.matrix().trace_mul(b.matrix()).re;
    let ma = mixedness(a);
    let mb = mixedness(b);
    let cross = if ma < MIXEDNESS_FLOOR || mb < MIXEDNESS_FLOOR {
        0.0
    } else {
        ma.sqrt() * mb.sqrt()
    };
    (overlap + cross).clamp(0.0, 1.0)
}

/// Largest eigenvalue (1+|r⃗|)/2 and its pure eigenstate. For the maximally
/// mixed input the spectrum is degenerate and the conventional eigenstate
/// |0⟩⟨0| is returned so results stay reproducible.
pub fn largest_eigen(rho: &QubitDensity) -> (f64, QubitDensity) {
    let b = rho.bloch();
    let n = b.norm();
    if n < 1e-12 {
        return (0.5, QubitDensity::ground());
    }
    let direction = b.scaled(1.0 / n);
    let state = bloch_to_density(&direction).expect("unit vector is valid");
    (0.5 * (1.0 + n), state)
}

/// The four correction operators σ_m ∈ {𝟙, Z, X, XZ}, indexed to match the
/// two-bit message encoding: "00"↔𝟙, "01"↔Z, "10"↔X, "11"↔XZ, where the
/// first bit fires the X correction and the second fires Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrectionLabel {
    I,
    Z,
    X,
    Xz,
}

impl CorrectionLabel {
    pub const ALL: [CorrectionLabel; 4] =
        [CorrectionLabel::I, CorrectionLabel::Z, CorrectionLabel::X, CorrectionLabel::Xz];

    pub fn index(&self) -> usize {
        match self {
            CorrectionLabel::I => 0,
            CorrectionLabel::Z => 1,
            CorrectionLabel::X => 2,
            CorrectionLabel::Xz => 3,
        }
    }

    pub fn from_index(index: usize) -> Option<CorrectionLabel> {
        CorrectionLabel::ALL.get(index).copied()
    }

    /// Two-bit message string; bit 1 triggers X, bit 2 triggers Z.
    pub fn bits(&self) -> &'static str {
        ["00", "01", "10", "11"][self.index()]
    }

    pub fn name(&self) -> &'static str {
        ["I", "Z", "X", "XZ"][self.index()]
    }

    pub fn matrix(&self) -> Mat2 {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match self {
            CorrectionLabel::I => Mat2::identity(),
            CorrectionLabel::Z => Mat2::diag(1.0, -1.0),
            CorrectionLabel::X => Mat2::new([[zero, one], [one, zero]]),
            // X·Z = [[0, −1], [1, 0]] (equal to −iY; the phase cancels
            // under conjugation).
            CorrectionLabel::Xz => Mat2::new([[zero, -one], [one, zero]]),
        }
    }
}

/// σ_m ρ σ_m†. Trace- and spectrum-preserving; applying the same label twice
/// returns the input for all four labels.
pub fn pauli_conjugate(label: CorrectionLabel, rho: &QubitDensity) -> QubitDensity {
    let u = label.matrix();
    let m = u.mul(rho.matrix()).mul(&u.adjoint());
    QubitDensity { m }
}

/// A validated two-qubit density matrix in the |00⟩,|01⟩,|10⟩,|11⟩ basis,
/// first tensor factor = Alice.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitDensity {
    m: Mat4,
}

impl TwoQubitDensity {
    pub fn from_matrix(raw: Mat4) -> Result<Self> {
        let defect = raw.hermiticity_defect();
        if defect > DENSITY_REPAIR_TOL {
            return Err(RspError::InvalidDensity(format!(
                "hermiticity defect {defect:e}"
            )));
        }
        let mut h = raw.hermitian_part();
        let tr = h.trace().re;
        if (tr - 1.0).abs() > DENSITY_REPAIR_TOL {
            return Err(RspError::InvalidDensity(format!("trace {tr}")));
        }
        if (tr - 1.0).abs() > DENSITY_TOL {
            h = h.scale(1.0 / tr);
        }
        let (evals, cols) = hermitian_eigen4(&h);
        if evals[3] < -DENSITY_REPAIR_TOL {
            return Err(RspError::InvalidDensity(format!(
                "negative eigenvalue {:e}",
                evals[3]
            )));
        }
        if evals[3] < 0.0 {
            let clipped: Vec<f64> = evals.iter().map(|&e| e.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            let mut m = Mat4::zero();
            for (k, col) in cols.iter().enumerate() {
                m = m.add(&Mat4::outer(*col).scale(clipped[k] / total));
            }
            h = m;
        }
        Ok(Self { m: h })
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn purity(&self) -> f64 {
        self.m.trace_mul(&self.m).re
    }
}

fn bell_ket(sign: f64) -> [C64; 4] {
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    [
        C64::new(amp, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(sign * amp, 0.0),
    ]
}

/// |Φ+⟩⟨Φ+| with |Φ+⟩ = (|00⟩ + |11⟩)/√2.
pub fn bell_phi_plus() -> TwoQubitDensity {
    TwoQubitDensity { m: Mat4::outer(bell_ket(1.0)) }
}

/// |Φ−⟩⟨Φ−| with |Φ−⟩ = (|00⟩ − |11⟩)/√2.
pub fn bell_phi_minus() -> TwoQubitDensity {
    TwoQubitDensity { m: Mat4::outer(bell_ket(-1.0)) }
}

/// Isotropic noise model v|Φ+⟩⟨Φ+| + (1−v)𝟙/4.
pub fn werner(v: f64) -> Result<TwoQubitDensity> {
    if !(0.0..=1.0).contains(&v) {
        return Err(RspError::RadiusOutOfRange(v));
    }
    let m = bell_phi_plus()
        .m
        .scale(v)
        .add(&Mat4::identity().scale(0.25 * (1.0 - v)));
    Ok(TwoQubitDensity { m })
}

/// Diagnostics of a two-qubit source state.
#[derive(Clone, Copy, Debug)]
pub struct SourceMetrics {
    /// Fidelity with the closer of |Φ+⟩ and |Φ−⟩ (the entangled-source
    /// target up to the local flip applied before the measurement).
    pub bell_fidelity: f64,
    /// Tangle T = C², with C the concurrence from the spin-flip spectrum.
    pub tangle: f64,
    /// Tr ρ².
    pub purity: f64,
}

/// Fidelity with the Φ Bell pair, tangle, and purity.
pub fn source_metrics(rho: &TwoQubitDensity) -> SourceMetrics {
    let f_plus = rho.m.trace_mul(bell_phi_plus().matrix()).re;
    let f_minus = rho.m.trace_mul(bell_phi_minus().matrix()).re;
    let bell_fidelity = f_plus.max(f_minus).clamp(0.0, 1.0);
    SourceMetrics {
        bell_fidelity,
        tangle: tangle(rho),
        purity: rho.purity(),
    }
}

/// Concurrence squared via the spin-flip construction: the λ_i are the
/// square roots of the eigenvalues of ρ(Y⊗Y)ρ*(Y⊗Y), computed through the
/// Hermitian product √ρ ρ̃ √ρ.
pub fn tangle(rho: &TwoQubitDensity) -> f64 {
    let zero = C64::new(0.0, 0.0);
    let y = Mat2::new([[zero, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), zero]]);
    let yy = y.kron(&y);
    let flipped = yy.mul(&rho.m.conj()).mul(&yy);
    let root = sqrt_psd4(&rho.m);
    let middle = root.mul(&flipped).mul(&root).hermitian_part();
    let (evals, _) = hermitian_eigen4(&middle);
    let lam: Vec<f64> = evals.iter().map(|&e| e.max(0.0).sqrt()).collect();
    let c = (lam[0] - lam[1] - lam[2] - lam[3]).max(0.0);
    c * c
}

/// Shannon cost in cbits of preparing a state of Bloch radius r with the
/// veto scheme: H(r) = 2 − log₂(4−3r) + (3r/4)·log₂((4−3r)/r).
pub fn shannon_cost(r: f64) -> f64 {
    assert!((0.0..=1.0).contains(&r), "radius {r} outside [0, 1]");
    if r == 0.0 {
        return 0.0;
    }
    let m = 4.0 - 3.0 * r;
    let h = 2.0 - m.log2() + (3.0 * r / 4.0) * (m / r).log2();
    h.clamp(0.0, 2.0)
}
