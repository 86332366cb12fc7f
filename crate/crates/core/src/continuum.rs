//! Bounds for the uniform ensemble of all pure qubit states.
//!
//! Upper bounds come from circular caps: among regions of fixed area a cap
//! has the longest average Bloch vector, 1 − A/4π, and equal areas are
//! optimal, giving ⟨F⟩ ≤ 1 − 2^{−(c+1)}. Lower bounds come from concrete
//! partitions: geodesic Voronoi cells of a chosen generator set, integrated
//! by spherical quadrature. A Lloyd-style alternation (assign to nearest
//! generator, move each generator to its cell's average direction) refines
//! generator sets toward locally optimal partitions.

use crate::error::{Result, RspError};
use crate::qstate::BlochVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const FOUR_PI: f64 = 4.0 * PI;

/// How cell integrals are evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Quadrature {
    /// Uniform random directions; the sample is split into batches for a
    /// standard-error estimate. Deterministic for a fixed seed.
    MonteCarlo { samples: usize, seed: u64 },
    /// Midpoint product rule on a latitude–longitude grid with sin(φ)
    /// weights, normalized so the weights sum to exactly 4π.
    LatLongGrid { rows: usize, cols: usize },
}

const MC_BATCHES: usize = 20;

impl Quadrature {
    /// Grid used for headline numbers; ~8.4M nodes keeps quadrature error
    /// far below the 5e-4 reporting tolerance.
    pub fn golden_grid() -> Quadrature {
        Quadrature::LatLongGrid { rows: 2048, cols: 4096 }
    }

    fn batches(&self) -> usize {
        match self {
            Quadrature::MonteCarlo { .. } => MC_BATCHES,
            Quadrature::LatLongGrid { .. } => 1,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Quadrature::MonteCarlo { samples, .. } => samples >= MC_BATCHES,
            Quadrature::LatLongGrid { rows, cols } => rows >= 2 && cols >= 4,
        };
        if ok {
            Ok(())
        } else {
            Err(RspError::DegenerateSeeds("quadrature resolution too small".into()))
        }
    }

    /// Visit every node as (batch index, direction, weight).
    fn for_each_node(&self, mut f: impl FnMut(usize, [f64; 3], f64)) {
        match *self {
            Quadrature::LatLongGrid { rows, cols } => {
                let dphi = PI / rows as f64;
                let dtheta = 2.0 * PI / cols as f64;
                let row_sin: Vec<f64> =
                    (0..rows).map(|i| ((i as f64 + 0.5) * dphi).sin()).collect();
                let raw_total: f64 = row_sin.iter().sum::<f64>() * dphi * dtheta * cols as f64;
                let scale = FOUR_PI / raw_total;
                for (i, s) in row_sin.iter().enumerate() {
                    let phi = (i as f64 + 0.5) * dphi;
                    let z = phi.cos();
                    let w = s * dphi * dtheta * scale;
                    for j in 0..cols {
                        let theta = (j as f64 + 0.5) * dtheta;
                        f(0, [s * theta.cos(), s * theta.sin(), z], w);
                    }
                }
            }
            Quadrature::MonteCarlo { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let w = FOUR_PI / samples as f64;
                for s in 0..samples {
                    let batch = s * MC_BATCHES / samples;
                    let z = 2.0 * rng.random::<f64>() - 1.0;
                    let theta = 2.0 * PI * rng.random::<f64>();
                    let sin_phi = (1.0 - z * z).max(0.0).sqrt();
                    f(batch, [sin_phi * theta.cos(), sin_phi * theta.sin(), z], w);
                }
            }
        }
    }
}

/// A geodesic Voronoi partition: one cell per generator point, every
/// direction assigned to the generator with the largest inner product
/// (boundary ties go to the lowest index).
#[derive(Clone, Debug)]
pub struct SphericalPartitionSpec {
    seeds: Vec<BlochVector>,
    quadrature: Quadrature,
}

impl SphericalPartitionSpec {
    pub fn new(seeds: Vec<BlochVector>, quadrature: Quadrature) -> Result<Self> {
        quadrature.validate()?;
        let seeds = normalize_seeds(seeds)?;
        Ok(Self { seeds, quadrature })
    }

    pub fn seeds(&self) -> &[BlochVector] {
        &self.seeds
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quadrature
    }
}

const MIN_SEED_ANGLE: f64 = 1e-6;

fn normalize_seeds(seeds: Vec<BlochVector>) -> Result<Vec<BlochVector>> {
    if seeds.is_empty() {
        return Err(RspError::DegenerateSeeds("no generator points".into()));
    }
    let mut unit = Vec::with_capacity(seeds.len());
    for s in &seeds {
        let n = s
            .normalized()
            .ok_or_else(|| RspError::DegenerateSeeds("zero generator point".into()))?;
        unit.push(n);
    }
    for i in 0..unit.len() {
        for j in (i + 1)..unit.len() {
            let angle = unit[i].dot(&unit[j]).clamp(-1.0, 1.0).acos();
            if angle <= MIN_SEED_ANGLE {
                return Err(RspError::DegenerateSeeds(format!(
                    "generators {i} and {j} coincide"
                )));
            }
        }
    }
    Ok(unit)
}

/// Generators of the tetrahedral great-circle partition (four spherical
/// triangles): the vertices of the canonical tetrahedron.
pub fn tetrahedral_cell_seeds() -> Vec<BlochVector> {
    crate::ensembles::PlatonicSolid::Tetrahedron.vertices()
}

/// Generators of the octant partition obtained by connecting the six
/// octahedron vertices with great circles: the eight octant centers
/// (±1, ±1, ±1)/√3.
pub fn octant_cell_seeds() -> Vec<BlochVector> {
    crate::ensembles::PlatonicSolid::Cube.vertices()
}

/// Longest average Bloch length achievable by a region of the given area:
/// that of a circular cap, 1 − A/4π.
pub fn cap_average_radius(area: f64) -> Result<f64> {
    if !(area > 0.0 && area <= FOUR_PI + 1e-12) {
        return Err(RspError::AreaOutOfRange(area));
    }
    Ok((1.0 - area / FOUR_PI).max(0.0))
}

/// Cap upper bound on the continuum threshold: equal-area caps give
/// ⟨F⟩ ≤ ½(1 + (1 − 2^{−c})) = 1 − 2^{−(c+1)}.
///
/// Disjoint caps only tile the sphere for c ≤ 1, so the bound is not
/// attained for c ≥ 2; at c = 0 the single achievable output gives ⟨F⟩ = ½,
/// well under the formula's 0.75.
pub fn cap_upper_bound(cbits: u32) -> f64 {
    1.0 - 0.5f64.powi(cbits as i32 + 1)
}

/// Per-cell quadrature statistics.
#[derive(Clone, Debug)]
pub struct CellStat {
    /// Cell area (weights summed).
    pub area: f64,
    /// Average Bloch vector ∫ n̂ dΩ / A.
    pub mean_vector: BlochVector,
    /// |mean_vector|.
    pub mean_bloch_len: f64,
    /// Batch standard error of the length (zero for grid quadrature).
    pub len_stderr: f64,
}

/// Voronoi partition value with per-cell detail.
#[derive(Clone, Debug)]
pub struct VoronoiBound {
    /// ½(1 + Σ_k (A_k/4π)·r_k).
    pub value: f64,
    /// Batch standard error of the value (zero for grid quadrature).
    pub stderr: f64,
    pub cells: Vec<CellStat>,
}

struct CellAccum {
    // [sum_x, sum_y, sum_z, weight] per (cell, batch).
    data: Vec<[f64; 4]>,
    cells: usize,
    batches: usize,
}

impl CellAccum {
    fn new(cells: usize, batches: usize) -> Self {
        Self { data: vec![[0.0; 4]; cells * batches], cells, batches }
    }

    fn add(&mut self, cell: usize, batch: usize, node: [f64; 3], w: f64) {
        let slot = &mut self.data[cell * self.batches + batch];
        slot[0] += w * node[0];
        slot[1] += w * node[1];
        slot[2] += w * node[2];
        slot[3] += w;
    }

    fn cell_total(&self, cell: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for b in 0..self.batches {
            let s = self.data[cell * self.batches + b];
            for d in 0..4 {
                out[d] += s[d];
            }
        }
        out
    }

    fn batch_value(&self, batch: usize) -> f64 {
        let mut num = 0.0;
        let mut total_w = 0.0;
        for cell in 0..self.cells {
            let s = self.data[cell * self.batches + batch];
            num += (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
            total_w += s[3];
        }
        if total_w <= 0.0 {
            return 0.5;
        }
        0.5 * (1.0 + num / total_w)
    }
}

fn assign_cell(seeds: &[BlochVector], node: [f64; 3]) -> usize {
    let mut best = 0usize;
    let mut best_dot = f64::NEG_INFINITY;
    for (k, s) in seeds.iter().enumerate() {
        let dot = s.x * node[0] + s.y * node[1] + s.z * node[2];
        if dot > best_dot {
            best_dot = dot;
            best = k;
        }
    }
    best
}

fn accumulate(seeds: &[BlochVector], quadrature: &Quadrature) -> CellAccum {
    let mut acc = CellAccum::new(seeds.len(), quadrature.batches());
    quadrature.for_each_node(|batch, node, w| {
        let cell = assign_cell(seeds, node);
        acc.add(cell, batch, node, w);
    });
    acc
}

fn stderr_of(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Partition value for the generator set: assign quadrature nodes to the
/// nearest generator, integrate each cell, and score
/// ⟨F⟩ = ½(1 + Σ_k |∫_k n̂ dΩ| / 4π).
pub fn voronoi_lower_bound(spec: &SphericalPartitionSpec) -> Result<VoronoiBound> {
    let acc = accumulate(&spec.seeds, &spec.quadrature);
    let batches = spec.quadrature.batches();

    let mut cells = Vec::with_capacity(spec.seeds.len());
    let mut numerator = 0.0;
    let mut total_weight = 0.0;
    for k in 0..spec.seeds.len() {
        let t = acc.cell_total(k);
        let norm = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
        numerator += norm;
        total_weight += t[3];
        let (mean_vector, mean_len) = if t[3] > 0.0 {
            (BlochVector::new(t[0] / t[3], t[1] / t[3], t[2] / t[3]), norm / t[3])
        } else {
            (BlochVector::ZERO, 0.0)
        };
        let len_stderr = if batches > 1 {
            let per_batch: Vec<f64> = (0..batches)
                .filter_map(|b| {
                    let s = acc.data[k * batches + b];
                    if s[3] > 0.0 {
                        Some((s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt() / s[3])
                    } else {
                        None
                    }
                })
                .collect();
            stderr_of(&per_batch)
        } else {
            0.0
        };
        cells.push(CellStat { area: t[3], mean_vector, mean_bloch_len: mean_len, len_stderr });
    }

    let value = (0.5 * (1.0 + numerator / total_weight)).clamp(0.0, 1.0);
    let stderr = if batches > 1 {
        let per_batch: Vec<f64> = (0..batches).map(|b| acc.batch_value(b)).collect();
        stderr_of(&per_batch)
    } else {
        0.0
    };
    Ok(VoronoiBound { value, stderr, cells })
}

/// Outcome of Lloyd refinement.
#[derive(Clone, Debug)]
pub struct LloydOutcome {
    pub seeds: Vec<BlochVector>,
    /// Partition value after each assignment step. With the quadrature
    /// nodes fixed across iterations the trace is nondecreasing.
    pub value_trace: Vec<f64>,
}

/// Alternate between Voronoi assignment and moving each generator to its
/// cell's average direction (the top-eigenstate direction of the cell
/// average). An empty cell is reseeded at the quadrature node farthest
/// from all other generators.
pub fn lloyd_refine(
    seeds: &[BlochVector],
    iterations: usize,
    quadrature: &Quadrature,
) -> Result<LloydOutcome> {
    quadrature.validate()?;
    let mut current = normalize_seeds(seeds.to_vec())?;
    let mut trace = Vec::with_capacity(iterations);

    for _ in 0..iterations {
        let acc = accumulate(&current, quadrature);
        let mut numerator = 0.0;
        let mut total_weight = 0.0;
        let mut next = Vec::with_capacity(current.len());
        let mut empties = Vec::new();
        for (k, seed) in current.iter().enumerate() {
            let t = acc.cell_total(k);
            let norm = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
            numerator += norm;
            total_weight += t[3];
            if t[3] > 0.0 && norm > 1e-12 {
                next.push(BlochVector::new(t[0] / norm, t[1] / norm, t[2] / norm));
            } else {
                // Placeholder; fixed below once the surviving seeds are known.
                next.push(*seed);
                empties.push(k);
            }
        }
        trace.push((0.5 * (1.0 + numerator / total_weight)).clamp(0.0, 1.0));

        for &k in &empties {
            let mut best_node = [0.0f64; 3];
            let mut best_gap = f64::NEG_INFINITY;
            quadrature.for_each_node(|_, node, _| {
                let mut nearest = f64::INFINITY;
                for (j, s) in next.iter().enumerate() {
                    if j == k {
                        continue;
                    }
                    let dot = (s.x * node[0] + s.y * node[1] + s.z * node[2]).clamp(-1.0, 1.0);
                    nearest = nearest.min(dot.acos());
                }
                if nearest > best_gap {
                    best_gap = nearest;
                    best_node = node;
                }
            });
            next[k] = BlochVector::new(best_node[0], best_node[1], best_node[2]);
        }
        current = next;
    }
    Ok(LloydOutcome { seeds: current, value_trace: trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::uniform_sphere_sample;

    #[test]
    fn cap_radius_examples() {
        assert!(cap_average_radius(FOUR_PI).unwrap().abs() < 1e-15);
        assert!((cap_average_radius(2.0 * PI).unwrap() - 0.5).abs() < 1e-15);
        assert!((cap_average_radius(PI / 2.0).unwrap() - 0.875).abs() < 1e-15);
        assert!(cap_average_radius(0.0).is_err());
        assert!(cap_average_radius(13.0).is_err());
    }

    #[test]
    fn cap_upper_bound_values() {
        assert_eq!(cap_upper_bound(2), 0.875);
        assert_eq!(cap_upper_bound(3), 0.9375);
        // The sphere is a single cap, so the c = 0 bound of ½ is tight, as
        // is the two-hemisphere value ¾ at c = 1.
        assert_eq!(cap_upper_bound(0), 0.5);
        assert_eq!(cap_upper_bound(1), 0.75);
    }

    #[test]
    fn single_cell_scores_one_half() {
        // One message, best fixed output: the whole-sphere average Bloch
        // vector vanishes, so ⟨F⟩ = ½, saturating the c = 0 cap bound.
        let spec = SphericalPartitionSpec::new(
            vec![BlochVector::new(0.0, 0.0, 1.0)],
            Quadrature::LatLongGrid { rows: 128, cols: 256 },
        )
        .unwrap();
        let bound = voronoi_lower_bound(&spec).unwrap();
        assert!((bound.value - 0.5).abs() < 1e-10);
        assert!((bound.value - cap_upper_bound(0)).abs() < 1e-10);
    }

    #[test]
    fn hemispheres_score_three_quarters() {
        let spec = SphericalPartitionSpec::new(
            vec![BlochVector::new(0.0, 0.0, 1.0), BlochVector::new(0.0, 0.0, -1.0)],
            Quadrature::LatLongGrid { rows: 256, cols: 512 },
        )
        .unwrap();
        let bound = voronoi_lower_bound(&spec).unwrap();
        assert!((bound.value - 0.75).abs() < 5e-4);
        for cell in &bound.cells {
            assert!((cell.area - 2.0 * PI).abs() < 1e-9);
            assert!((cell.mean_bloch_len - 0.5).abs() < 1e-4);
        }
    }

    #[test]
    fn octant_partition_matches_closed_form() {
        // Exact octant integrals: ∫ n̂ dΩ = (π/4)(1,1,1) per octant, area
        // π/2, so the value is ½(1 + √3/2).
        let spec = SphericalPartitionSpec::new(
            octant_cell_seeds(),
            Quadrature::LatLongGrid { rows: 512, cols: 1024 },
        )
        .unwrap();
        let bound = voronoi_lower_bound(&spec).unwrap();
        let closed = 0.5 * (1.0 + 3.0f64.sqrt() / 2.0);
        assert!((bound.value - closed).abs() < 5e-5, "got {}", bound.value);
        assert!((bound.value - 0.9330).abs() < 5e-4);
        for cell in &bound.cells {
            assert!((cell.area - PI / 2.0).abs() < 1e-3);
        }
    }

    #[test]
    fn areas_sum_to_full_sphere_and_probabilities_to_one() {
        let spec = SphericalPartitionSpec::new(
            tetrahedral_cell_seeds(),
            Quadrature::MonteCarlo { samples: 200_000, seed: 5 },
        )
        .unwrap();
        let bound = voronoi_lower_bound(&spec).unwrap();
        let total_area: f64 = bound.cells.iter().map(|c| c.area).sum();
        assert!((total_area - FOUR_PI).abs() < 1e-9);
        let prob_sum: f64 = bound.cells.iter().map(|c| c.area / FOUR_PI).sum();
        assert!((prob_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_agrees_with_grid_within_error() {
        let grid = voronoi_lower_bound(
            &SphericalPartitionSpec::new(
                tetrahedral_cell_seeds(),
                Quadrature::LatLongGrid { rows: 512, cols: 1024 },
            )
            .unwrap(),
        )
        .unwrap();
        let mc = voronoi_lower_bound(
            &SphericalPartitionSpec::new(
                tetrahedral_cell_seeds(),
                Quadrature::MonteCarlo { samples: 400_000, seed: 11 },
            )
            .unwrap(),
        )
        .unwrap();
        assert!(mc.stderr > 0.0);
        assert!((mc.value - grid.value).abs() < 5.0 * mc.stderr + 1e-4);
    }

    #[test]
    fn degenerate_seeds_rejected() {
        let dup = vec![BlochVector::new(0.0, 0.0, 1.0), BlochVector::new(0.0, 0.0, 1.0)];
        assert!(matches!(
            SphericalPartitionSpec::new(dup, Quadrature::LatLongGrid { rows: 16, cols: 32 }),
            Err(RspError::DegenerateSeeds(_))
        ));
        assert!(matches!(
            SphericalPartitionSpec::new(vec![], Quadrature::LatLongGrid { rows: 16, cols: 32 }),
            Err(RspError::DegenerateSeeds(_))
        ));
    }

    #[test]
    fn lloyd_trace_is_monotone_with_fixed_nodes() {
        let quad = Quadrature::LatLongGrid { rows: 96, cols: 192 };
        let seeds = uniform_sphere_sample(4, 33);
        let out = lloyd_refine(&seeds, 40, &quad).unwrap();
        assert_eq!(out.value_trace.len(), 40);
        for w in out.value_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "trace must not decrease: {:?}", w);
        }
        assert!(out.value_trace[39] >= out.value_trace[0]);
    }

    #[test]
    fn lloyd_from_tetrahedron_is_stationary() {
        let quad = Quadrature::LatLongGrid { rows: 192, cols: 384 };
        let seeds = tetrahedral_cell_seeds();
        let before = voronoi_lower_bound(
            &SphericalPartitionSpec::new(seeds.clone(), quad).unwrap(),
        )
        .unwrap();
        let out = lloyd_refine(&seeds, 25, &quad).unwrap();
        let last = *out.value_trace.last().unwrap();
        assert!((last - before.value).abs() < 5e-4);
    }

    #[test]
    fn lloyd_with_eight_seeds_respects_cap_bound() {
        let quad = Quadrature::MonteCarlo { samples: 150_000, seed: 9 };
        let seeds = uniform_sphere_sample(8, 21);
        let out = lloyd_refine(&seeds, 30, &quad).unwrap();
        let spec = SphericalPartitionSpec::new(out.seeds.clone(), quad).unwrap();
        let bound = voronoi_lower_bound(&spec).unwrap();
        assert!(bound.value <= cap_upper_bound(3) + 3.0 * bound.stderr);
    }

    #[test]
    fn lloyd_recovers_from_an_empty_cell() {
        // Three clustered seeds plus one: with a coarse grid the tight
        // cluster leaves at least one generator starved at some point, and
        // refinement must still return four usable seeds.
        let seeds = vec![
            BlochVector::new(0.0, 0.0, 1.0),
            BlochVector::new(1e-5, 0.0, 1.0).normalized().unwrap(),
            BlochVector::new(0.0, 1e-5, 1.0).normalized().unwrap(),
            BlochVector::new(0.0, 0.0, -1.0),
        ];
        let quad = Quadrature::LatLongGrid { rows: 48, cols: 96 };
        let out = lloyd_refine(&seeds, 10, &quad).unwrap();
        assert_eq!(out.seeds.len(), 4);
        for s in &out.seeds {
            assert!((s.norm() - 1.0).abs() < 1e-9);
        }
        let last = out.value_trace.last().unwrap();
        assert!(*last > 0.7);
    }
}
