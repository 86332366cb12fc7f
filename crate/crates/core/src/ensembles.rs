//! Target ensembles: Platonic-solid vertex sets, radius scaling, uniform
//! sphere sampling, and file (de)serialization.
//!
//! The file format is JSON with one record per state, either Cartesian
//! `{x, y, z, p}` or angular `{phi, theta, r, p}`; the two styles may be
//! mixed in one file. Saving always writes Cartesian records at full f64
//! precision so that load(save(e)) reproduces the ensemble exactly.

use crate::error::{Result, RspError};
use crate::qstate::{BlochVector, PureAngles};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One target state: a Bloch vector and its sampling probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleEntry {
    pub bloch: BlochVector,
    pub prob: f64,
}

/// A weighted, ordered set of target qubit states.
///
/// `common_radius` is set whenever every Bloch norm agrees to 1e-9; the
/// fixed-radius classical bound is only defined in that case.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetEnsemble {
    name: Option<String>,
    entries: Vec<EnsembleEntry>,
    common_radius: Option<f64>,
}

const PROB_SUM_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-9;

impl TargetEnsemble {
    /// Validate entries: positive probabilities summing to 1 within 1e-12,
    /// norms at most 1 (within 1e-9). A common radius is detected
    /// automatically when all norms agree to 1e-9.
    pub fn new(name: Option<String>, entries: Vec<EnsembleEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(RspError::MalformedEnsemble("no states".into()));
        }
        for e in &entries {
            if e.prob <= 0.0 || !e.prob.is_finite() {
                return Err(RspError::MalformedEnsemble(format!(
                    "nonpositive probability {}",
                    e.prob
                )));
            }
            let n = e.bloch.norm();
            if n > 1.0 + NORM_TOL {
                return Err(RspError::NormTooLarge(n));
            }
        }
        let total: f64 = entries.iter().map(|e| e.prob).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(RspError::ProbabilitySum(total));
        }
        let common_radius = detect_common_radius(&entries);
        Ok(Self { name, entries, common_radius })
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn entries(&self) -> &[EnsembleEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn common_radius(&self) -> Option<f64> {
        self.common_radius
    }

    /// True when every probability equals 1/n to 1e-12.
    pub fn is_uniform(&self) -> bool {
        let expect = 1.0 / self.len() as f64;
        self.entries.iter().all(|e| (e.prob - expect).abs() <= 1e-12)
    }

    /// Same states under an orthogonal change of frame.
    pub fn rotated(&self, orientation: &[[f64; 3]; 3]) -> Result<TargetEnsemble> {
        check_rotation(orientation)?;
        let entries = self
            .entries
            .iter()
            .map(|e| EnsembleEntry { bloch: apply_rotation(orientation, &e.bloch), prob: e.prob })
            .collect();
        Ok(TargetEnsemble {
            name: self.name.clone(),
            entries,
            common_radius: self.common_radius,
        })
    }
}

fn detect_common_radius(entries: &[EnsembleEntry]) -> Option<f64> {
    let first = entries[0].bloch.norm();
    if entries.iter().all(|e| (e.bloch.norm() - first).abs() <= NORM_TOL) {
        Some(first.min(1.0))
    } else {
        None
    }
}

fn apply_rotation(r: &[[f64; 3]; 3], v: &BlochVector) -> BlochVector {
    BlochVector::new(
        r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
        r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
        r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
    )
}

fn check_rotation(r: &[[f64; 3]; 3]) -> Result<()> {
    // R Rᵀ = 𝟙 to 1e-10, det +1.
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            if (dot - expect).abs() > 1e-10 {
                return Err(RspError::NonOrthogonalOrientation);
            }
        }
    }
    let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
        - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
    if (det - 1.0).abs() > 1e-10 {
        return Err(RspError::NonOrthogonalOrientation);
    }
    Ok(())
}

/// The five regular polyhedra whose vertices serve as target ensembles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlatonicSolid {
    Tetrahedron,
    Octahedron,
    Cube,
    Icosahedron,
    Dodecahedron,
}

impl PlatonicSolid {
    pub const ALL: [PlatonicSolid; 5] = [
        PlatonicSolid::Tetrahedron,
        PlatonicSolid::Octahedron,
        PlatonicSolid::Cube,
        PlatonicSolid::Icosahedron,
        PlatonicSolid::Dodecahedron,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PlatonicSolid::Tetrahedron => "tetrahedron",
            PlatonicSolid::Octahedron => "octahedron",
            PlatonicSolid::Cube => "cube",
            PlatonicSolid::Icosahedron => "icosahedron",
            PlatonicSolid::Dodecahedron => "dodecahedron",
        }
    }

    pub fn from_name(name: &str) -> Option<PlatonicSolid> {
        PlatonicSolid::ALL.iter().copied().find(|s| s.name() == name)
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            PlatonicSolid::Tetrahedron => 4,
            PlatonicSolid::Octahedron => 6,
            PlatonicSolid::Cube => 8,
            PlatonicSolid::Icosahedron => 12,
            PlatonicSolid::Dodecahedron => 20,
        }
    }

    /// Unit vertices in a fixed canonical frame: tetrahedron as alternating
    /// cube corners, octahedron along the axes, cube at (±1,±1,±1)/√3,
    /// icosahedron as cyclic permutations of (0, ±1, ±g)/√(1+g²), and
    /// dodecahedron as the cube corners together with cyclic permutations of
    /// (0, ±1/g, ±g)/√3, g the golden ratio.
    pub fn vertices(&self) -> Vec<BlochVector> {
        let g = (1.0 + 5.0f64.sqrt()) / 2.0;
        match self {
            PlatonicSolid::Tetrahedron => {
                let s = 1.0 / 3.0f64.sqrt();
                vec![
                    BlochVector::new(s, s, s),
                    BlochVector::new(s, -s, -s),
                    BlochVector::new(-s, s, -s),
                    BlochVector::new(-s, -s, s),
                ]
            }
            PlatonicSolid::Octahedron => vec![
                BlochVector::new(1.0, 0.0, 0.0),
                BlochVector::new(-1.0, 0.0, 0.0),
                BlochVector::new(0.0, 1.0, 0.0),
                BlochVector::new(0.0, -1.0, 0.0),
                BlochVector::new(0.0, 0.0, 1.0),
                BlochVector::new(0.0, 0.0, -1.0),
            ],
            PlatonicSolid::Cube => {
                let s = 1.0 / 3.0f64.sqrt();
                let mut v = Vec::with_capacity(8);
                for &x in &[s, -s] {
                    for &y in &[s, -s] {
                        for &z in &[s, -s] {
                            v.push(BlochVector::new(x, y, z));
                        }
                    }
                }
                v
            }
            PlatonicSolid::Icosahedron => {
                let norm = (1.0 + g * g).sqrt();
                let a = 1.0 / norm;
                let b = g / norm;
                let mut v = Vec::with_capacity(12);
                for &(p, q) in &[(a, b), (a, -b), (-a, b), (-a, -b)] {
                    v.push(BlochVector::new(0.0, p, q));
                    v.push(BlochVector::new(q, 0.0, p));
                    v.push(BlochVector::new(p, q, 0.0));
                }
                v
            }
            PlatonicSolid::Dodecahedron => {
                let s = 1.0 / 3.0f64.sqrt();
                let a = (1.0 / g) / 3.0f64.sqrt();
                let b = g / 3.0f64.sqrt();
                let mut v = Vec::with_capacity(20);
                for &x in &[s, -s] {
                    for &y in &[s, -s] {
                        for &z in &[s, -s] {
                            v.push(BlochVector::new(x, y, z));
                        }
                    }
                }
                for &(p, q) in &[(a, b), (a, -b), (-a, b), (-a, -b)] {
                    v.push(BlochVector::new(0.0, p, q));
                    v.push(BlochVector::new(q, 0.0, p));
                    v.push(BlochVector::new(p, q, 0.0));
                }
                v
            }
        }
    }
}

/// Uniform ensemble on the (possibly rotated) solid's vertices, every Bloch
/// vector scaled to `radius`.
pub fn platonic_ensemble(
    solid: PlatonicSolid,
    radius: f64,
    orientation: &[[f64; 3]; 3],
) -> Result<TargetEnsemble> {
    if !(0.0..=1.0).contains(&radius) {
        return Err(RspError::RadiusOutOfRange(radius));
    }
    check_rotation(orientation)?;
    let verts = solid.vertices();
    let prob = 1.0 / verts.len() as f64;
    let entries = verts
        .iter()
        .map(|v| EnsembleEntry {
            bloch: apply_rotation(orientation, v).scaled(radius),
            prob,
        })
        .collect();
    let mut e = TargetEnsemble::new(Some(solid.name().to_string()), entries)?;
    // Norm dust from the rotation must not obscure the exact design radius.
    e.common_radius = Some(radius);
    Ok(e)
}

pub const IDENTITY_ORIENTATION: [[f64; 3]; 3] =
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// `n` unit vectors drawn uniformly on the sphere, reproducible from `seed`.
/// Sampling is exact (z uniform on [−1,1], azimuth uniform), rejection-free.
pub fn uniform_sphere_sample(n: usize, seed: u64) -> Vec<BlochVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z = 2.0 * rng.random::<f64>() - 1.0;
            let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            let s = (1.0 - z * z).max(0.0).sqrt();
            BlochVector::new(s * theta.cos(), s * theta.sin(), z)
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    common_radius: Option<f64>,
    states: Vec<StateRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StateRecord {
    Cartesian { x: f64, y: f64, z: f64, p: f64 },
    Angles { phi: f64, theta: f64, r: f64, p: f64 },
}

/// Read an ensemble document. Angular records are converted through the same
/// parametrization as [`crate::qstate::angles_to_state`].
pub fn load_ensemble(path: &Path) -> Result<TargetEnsemble> {
    let text = std::fs::read_to_string(path)?;
    let file: EnsembleFile = serde_json::from_str(&text)
        .map_err(|e| RspError::MalformedEnsemble(e.to_string()))?;
    let mut entries = Vec::with_capacity(file.states.len());
    for record in &file.states {
        let entry = match *record {
            StateRecord::Cartesian { x, y, z, p } => {
                EnsembleEntry { bloch: BlochVector::new(x, y, z), prob: p }
            }
            StateRecord::Angles { phi, theta, r, p } => {
                if !(0.0..=1.0).contains(&r) {
                    return Err(RspError::RadiusOutOfRange(r));
                }
                let angles = PureAngles::new(phi, theta)?;
                EnsembleEntry { bloch: angles.direction().scaled(r), prob: p }
            }
        };
        entries.push(entry);
    }
    let ensemble = TargetEnsemble::new(file.name, entries)?;
    if let Some(declared) = file.common_radius {
        match ensemble.common_radius {
            Some(actual) if (actual - declared).abs() <= NORM_TOL => {}
            _ => {
                return Err(RspError::MalformedEnsemble(format!(
                    "declared common_radius {declared} does not match the states"
                )));
            }
        }
    }
    Ok(ensemble)
}

/// Write an ensemble document with Cartesian records at full precision.
pub fn save_ensemble(ensemble: &TargetEnsemble, path: &Path) -> Result<()> {
    let file = EnsembleFile {
        name: ensemble.name.clone(),
        common_radius: ensemble.common_radius,
        states: ensemble
            .entries
            .iter()
            .map(|e| StateRecord::Cartesian { x: e.bloch.x, y: e.bloch.y, z: e.bloch.z, p: e.prob })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, text)?;
    Ok(())
}
