//! Command-line front end: classical benchmarks, continuum bounds, protocol
//! simulation, comparison tables, and the full reproduction pipeline.

use clap::{Parser, Subcommand, ValueEnum};
use rsp_bench::classical::{exact_threshold, heuristic_threshold, upper_bound, BenchmarkResult};
use rsp_bench::continuum::{
    cap_upper_bound, lloyd_refine, octant_cell_seeds, tetrahedral_cell_seeds, voronoi_lower_bound,
    Quadrature, SphericalPartitionSpec,
};
use rsp_bench::ensembles::{
    load_ensemble, platonic_ensemble, uniform_sphere_sample, PlatonicSolid, TargetEnsemble,
    IDENTITY_ORIENTATION,
};
use rsp_bench::matrix::{C64, Mat4};
use rsp_bench::protocol::{run_experiment_grid, GridOptions, SimMode, SourceModel};
use rsp_bench::qstate::TwoQubitDensity;
use rsp_bench::report::{
    auto_threshold, compare, format_table, BenchmarkDocument, ClassicalKind, ComparisonRow,
    OutputFormat, SimulationDocument,
};
use rsp_bench::{Result, RspError};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Werner visibility matched to a source with Bell-state fidelity 0.9807:
/// v = (4·0.9807 − 1)/3.
const DEFAULT_WERNER_V: f64 = (4.0 * 0.9807 - 1.0) / 3.0;

#[derive(Parser)]
#[command(
    name = "rsp-bench",
    version,
    about = "Classical fidelity benchmarks and protocol simulation for remote state preparation of qubit ensembles"
)]
struct Cli {
    /// Seed for every randomized step; identical seeds give identical output.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Write the result document here (summaries still go to stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for comparison rows.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Structured)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Structured,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Structured => OutputFormat::Structured,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchModeArg {
    Exact,
    Upper,
    Heuristic,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum ContinuumMethodArg {
    Caps,
    Voronoi,
    Lloyd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeedsArg {
    Tetrahedron,
    Octahedron,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimModeArg {
    Expected,
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// Classical threshold (exact, bounds, or certified) for an ensemble.
    Benchmark {
        #[arg(long, conflicts_with = "ensemble")]
        solid: Option<String>,
        #[arg(long)]
        ensemble: Option<PathBuf>,
        /// Bloch radius applied to --solid vertices.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        cbits: u32,
        #[arg(long, value_enum, default_value_t = BenchModeArg::Auto)]
        mode: BenchModeArg,
        /// Local-search restarts for heuristic/auto modes.
        #[arg(long, default_value_t = 200)]
        restarts: usize,
    },
    /// Bounds for the uniform ensemble of all pure states.
    Continuum {
        #[arg(long)]
        cbits: u32,
        #[arg(long, value_enum)]
        method: ContinuumMethodArg,
        /// Generator set: the tetrahedral partition (4 cells), the octant
        /// partition from the inscribed octahedron (8 cells), or 2^c random
        /// directions.
        #[arg(long, value_enum, default_value_t = SeedsArg::Random)]
        seeds: SeedsArg,
        /// Monte Carlo sample count; overrides the grid.
        #[arg(long)]
        samples: Option<usize>,
        /// Latitude x longitude grid resolution.
        #[arg(long, default_value = "2048x4096")]
        grid: String,
        /// Refinement iterations (lloyd only).
        #[arg(long, default_value_t = 50)]
        iterations: usize,
    },
    /// Simulate the entanglement protocol over an ensemble.
    Simulate {
        /// ideal | werner:<v> | file:<path> (JSON list of 16 [re, im]
        /// pairs, row-major).
        #[arg(long)]
        source: String,
        #[arg(long, conflicts_with = "solid")]
        ensemble: Option<PathBuf>,
        #[arg(long)]
        solid: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Protocol shots per state (sampled mode).
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        /// Tomography shots per analyzer setting (sampled mode).
        #[arg(long, default_value_t = 1_000_000)]
        tomography_shots: u64,
        #[arg(long, value_enum, default_value_t = SimModeArg::Expected)]
        mode: SimModeArg,
    },
    /// Join benchmark and simulation documents into comparison rows.
    Compare {
        #[arg(long = "benchmark", required = true)]
        benchmarks: Vec<PathBuf>,
        #[arg(long = "simulation", required = true)]
        simulations: Vec<PathBuf>,
    },
    /// Full pipeline: thresholds and Werner-source simulations for all five
    /// solids at both cbit budgets, the fixed-radius grids, and the
    /// continuum bounds.
    Reproduce {
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        /// Quadrature grid for the continuum bounds.
        #[arg(long, default_value = "1024x2048")]
        grid: String,
        /// Werner visibility of the simulated source.
        #[arg(long, default_value_t = DEFAULT_WERNER_V)]
        werner: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Benchmark { ref solid, ref ensemble, radius, cbits, mode, restarts } => {
            let (e, name) = resolve_ensemble(solid.as_deref(), ensemble.as_deref(), radius)?;
            run_benchmark(&e, &name, radius, cbits, mode, restarts, cli.seed, cli.out.as_deref())
        }
        Command::Continuum { cbits, method, seeds, samples, ref grid, iterations } => {
            let quadrature = parse_quadrature(samples, grid, cli.seed)?;
            run_continuum(
                cbits,
                method,
                seeds,
                quadrature,
                iterations,
                cli.seed,
                cli.out.as_deref(),
            )
        }
        Command::Simulate {
            ref source,
            ref ensemble,
            ref solid,
            radius,
            shots,
            tomography_shots,
            mode,
        } => {
            let (e, name) = resolve_ensemble(solid.as_deref(), ensemble.as_deref(), radius)?;
            let source = parse_source(source)?;
            run_simulate(
                &e,
                &name,
                radius,
                &source,
                shots,
                tomography_shots,
                mode,
                cli.seed,
                cli.out.as_deref(),
            )
        }
        Command::Compare { ref benchmarks, ref simulations } => {
            run_compare(benchmarks, simulations, cli.format.into(), cli.out.as_deref())
        }
        Command::Reproduce { restarts, ref grid, werner } => {
            let quadrature = parse_quadrature(None, grid, cli.seed)?;
            run_reproduce(
                restarts,
                quadrature,
                werner,
                cli.seed,
                cli.format.into(),
                cli.out.as_deref(),
            )
        }
    }
}

fn resolve_ensemble(
    solid: Option<&str>,
    path: Option<&Path>,
    radius: f64,
) -> Result<(TargetEnsemble, String)> {
    match (solid, path) {
        (Some(name), None) => {
            let solid = PlatonicSolid::from_name(name)
                .ok_or_else(|| RspError::MalformedEnsemble(format!("unknown solid '{name}'")))?;
            let e = platonic_ensemble(solid, radius, &IDENTITY_ORIENTATION)?;
            Ok((e, solid.name().to_string()))
        }
        (None, Some(path)) => {
            let e = load_ensemble(path)?;
            let name = e
                .name()
                .map(str::to_string)
                .unwrap_or_else(|| path.file_stem().unwrap_or_default().to_string_lossy().into());
            Ok((e, name))
        }
        _ => Err(RspError::MalformedEnsemble(
            "exactly one of --solid and --ensemble is required".into(),
        )),
    }
}

fn parse_quadrature(samples: Option<usize>, grid: &str, seed: u64) -> Result<Quadrature> {
    if let Some(samples) = samples {
        return Ok(Quadrature::MonteCarlo { samples, seed });
    }
    let (rows, cols) = grid
        .split_once(['x', 'X'])
        .and_then(|(r, c)| Some((r.parse().ok()?, c.parse().ok()?)))
        .ok_or_else(|| {
            RspError::MalformedEnsemble(format!("grid '{grid}' is not of the form RxC"))
        })?;
    Ok(Quadrature::LatLongGrid { rows, cols })
}

fn parse_source(text: &str) -> Result<SourceModel> {
    if text == "ideal" {
        return Ok(SourceModel::IdealPhiPlus);
    }
    if let Some(v) = text.strip_prefix("werner:") {
        let v: f64 = v
            .parse()
            .map_err(|_| RspError::MalformedEnsemble(format!("bad werner visibility '{v}'")))?;
        return Ok(SourceModel::Werner(v));
    }
    if let Some(path) = text.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)?;
        let pairs: Vec<[f64; 2]> = serde_json::from_str(&text)
            .map_err(|e| RspError::MalformedEnsemble(format!("source matrix: {e}")))?;
        if pairs.len() != 16 {
            return Err(RspError::MalformedEnsemble(format!(
                "source matrix must have 16 entries, got {}",
                pairs.len()
            )));
        }
        let mut m = Mat4::zero();
        for (idx, pair) in pairs.iter().enumerate() {
            m.set(idx / 4, idx % 4, C64::new(pair[0], pair[1]));
        }
        return Ok(SourceModel::Explicit(TwoQubitDensity::from_matrix(m)?));
    }
    Err(RspError::MalformedEnsemble(format!(
        "source '{text}' is not ideal | werner:<v> | file:<path>"
    )))
}

fn write_json<T: Serialize>(doc: &T, out: Option<&Path>) -> Result<()> {
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(doc)?)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_benchmark(
    e: &TargetEnsemble,
    name: &str,
    radius: f64,
    cbits: u32,
    mode: BenchModeArg,
    restarts: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let started = Instant::now();
    let result: BenchmarkResult = match mode {
        BenchModeArg::Exact => exact_threshold(e, cbits)?,
        BenchModeArg::Upper => upper_bound(e, cbits)?,
        BenchModeArg::Heuristic => heuristic_threshold(e, cbits, restarts, seed)?,
        BenchModeArg::Auto => auto_threshold(e, cbits, restarts, seed)?,
    };
    let wall = started.elapsed().as_secs_f64();
    let doc = BenchmarkDocument::from_result(name, radius, cbits, &result, wall);
    println!(
        "{name} (r = {radius}, c = {cbits}): {} = {:.10}, certified = {}, {:.3}s",
        doc.kind, doc.value, doc.certified, wall
    );
    if let Some(ranked) = &doc.ranked_upper_list {
        for entry in ranked.iter().take(3) {
            println!("  upper {:?} -> {:.10}", entry.profile, entry.value);
        }
    }
    write_json(&doc, out)
}

#[derive(Serialize)]
struct ContinuumDocument {
    cbits: u32,
    method: String,
    value: f64,
    stderr: f64,
    cap_upper_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seeds: Option<Vec<[f64; 3]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value_trace: Option<Vec<f64>>,
}

fn continuum_seeds(
    choice: SeedsArg,
    cbits: u32,
    seed: u64,
) -> Result<Vec<rsp_bench::qstate::BlochVector>> {
    match choice {
        SeedsArg::Tetrahedron => {
            if cbits != 2 {
                return Err(RspError::UnsupportedCbits(cbits));
            }
            Ok(tetrahedral_cell_seeds())
        }
        SeedsArg::Octahedron => {
            if cbits != 3 {
                return Err(RspError::UnsupportedCbits(cbits));
            }
            Ok(octant_cell_seeds())
        }
        SeedsArg::Random => Ok(uniform_sphere_sample(1 << cbits, seed)),
    }
}

fn run_continuum(
    cbits: u32,
    method: ContinuumMethodArg,
    seeds: SeedsArg,
    quadrature: Quadrature,
    iterations: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let cap = cap_upper_bound(cbits);
    let doc = match method {
        ContinuumMethodArg::Caps => {
            println!("cap upper bound (c = {cbits}): {cap:.10}");
            ContinuumDocument {
                cbits,
                method: "caps".into(),
                value: cap,
                stderr: 0.0,
                cap_upper_bound: cap,
                seeds: None,
                value_trace: None,
            }
        }
        ContinuumMethodArg::Voronoi => {
            let generators = continuum_seeds(seeds, cbits, seed)?;
            let spec = SphericalPartitionSpec::new(generators, quadrature)?;
            let bound = voronoi_lower_bound(&spec)?;
            println!(
                "voronoi lower bound (c = {cbits}): {:.10} ± {:.2e}   (cap upper bound {cap:.10})",
                bound.value, bound.stderr
            );
            ContinuumDocument {
                cbits,
                method: "voronoi".into(),
                value: bound.value,
                stderr: bound.stderr,
                cap_upper_bound: cap,
                seeds: Some(spec.seeds().iter().map(|s| [s.x, s.y, s.z]).collect()),
                value_trace: None,
            }
        }
        ContinuumMethodArg::Lloyd => {
            let generators = continuum_seeds(seeds, cbits, seed)?;
            let refined = lloyd_refine(&generators, iterations, &quadrature)?;
            let last = refined.value_trace.last().copied().unwrap_or(0.5);
            println!(
                "lloyd-refined lower bound (c = {cbits}, {iterations} iterations): {last:.10}   (cap upper bound {cap:.10})"
            );
            ContinuumDocument {
                cbits,
                method: "lloyd".into(),
                value: last,
                stderr: 0.0,
                cap_upper_bound: cap,
                seeds: Some(refined.seeds.iter().map(|s| [s.x, s.y, s.z]).collect()),
                value_trace: Some(refined.value_trace),
            }
        }
    };
    write_json(&doc, out)
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    e: &TargetEnsemble,
    name: &str,
    radius: f64,
    source: &SourceModel,
    shots: u64,
    tomography_shots: u64,
    mode: SimModeArg,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let (mode, mode_str) = match mode {
        SimModeArg::Expected => (SimMode::Expected, "expected"),
        SimModeArg::Sampled => (SimMode::Sampled, "sampled"),
    };
    let opts = GridOptions { mode, shots, tomography_shots, seed };
    let outcome = run_experiment_grid(source, e, &opts)?;
    let radius = e.common_radius().unwrap_or(radius);
    let doc = SimulationDocument::from_outcome(
        e,
        name,
        radius,
        &source.label(),
        mode_str,
        seed,
        &outcome,
    );
    println!(
        "{name} (r = {radius}) with {} [{mode_str}]: mean F = {:.8} ± {:.2e}, H = {:.4} cbits",
        source.label(),
        doc.mean_fidelity,
        doc.stderr,
        doc.shannon_cost_bits
    );
    if let Some(fe) = doc.mean_fidelity_vs_expected {
        println!(
            "  vs expected state: {:.8} ± {:.2e}",
            fe,
            doc.stderr_vs_expected.unwrap_or(0.0)
        );
    }
    write_json(&doc, out)
}

fn run_compare(
    benchmarks: &[PathBuf],
    simulations: &[PathBuf],
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<()> {
    let mut bench_docs = Vec::new();
    for path in benchmarks {
        let text = std::fs::read_to_string(path)?;
        bench_docs.push(serde_json::from_str::<BenchmarkDocument>(&text)?);
    }
    let mut sim_docs = Vec::new();
    for path in simulations {
        let text = std::fs::read_to_string(path)?;
        sim_docs.push(serde_json::from_str::<SimulationDocument>(&text)?);
    }
    let rows = compare(&bench_docs, &sim_docs)?;
    print!("{}", format_table(&rows));
    if let Some(path) = out {
        rsp_bench::report::emit(&rows, format, path)?;
    }
    Ok(())
}

fn run_reproduce(
    restarts: usize,
    quadrature: Quadrature,
    werner_v: f64,
    seed: u64,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<()> {
    let source = SourceModel::Werner(werner_v);
    let opts = GridOptions { mode: SimMode::Expected, shots: 0, tomography_shots: 0, seed };
    let mut rows: Vec<ComparisonRow> = Vec::new();

    println!("== pure Platonic ensembles (r = 1), Werner source v = {werner_v:.6} ==");
    for solid in PlatonicSolid::ALL {
        let e = platonic_ensemble(solid, 1.0, &IDENTITY_ORIENTATION)?;
        let sim = run_experiment_grid(&source, &e, &opts)?;
        for cbits in [2u32, 3] {
            let result = auto_threshold(&e, cbits, restarts, seed)?;
            rows.push(ComparisonRow::build(
                solid.name(),
                1.0,
                cbits,
                result.value,
                ClassicalKind::of(&result),
                sim.mean_fidelity_vs_target,
                sim.stderr_vs_target,
            ));
        }
    }

    println!("== fixed-radius icosahedron/dodecahedron grids ==");
    for solid in [PlatonicSolid::Icosahedron, PlatonicSolid::Dodecahedron] {
        for radius in [0.0, 0.25, 0.5, 0.75] {
            let e = platonic_ensemble(solid, radius, &IDENTITY_ORIENTATION)?;
            let sim = run_experiment_grid(&source, &e, &opts)?;
            for cbits in [2u32, 3] {
                let result = auto_threshold(&e, cbits, restarts, seed)?;
                rows.push(ComparisonRow::build(
                    solid.name(),
                    radius,
                    cbits,
                    result.value,
                    ClassicalKind::of(&result),
                    sim.mean_fidelity_vs_target,
                    sim.stderr_vs_target,
                ));
            }
        }
    }

    print!("{}", format_table(&rows));

    println!("== continuum (uniform pure states) ==");
    let tetra = SphericalPartitionSpec::new(tetrahedral_cell_seeds(), quadrature)?;
    let lower2 = voronoi_lower_bound(&tetra)?;
    println!(
        "c = 2: {:.6} <= threshold < {:.6}   (tetrahedral partition vs cap bound)",
        lower2.value,
        cap_upper_bound(2)
    );
    let octants = SphericalPartitionSpec::new(octant_cell_seeds(), quadrature)?;
    let lower3 = voronoi_lower_bound(&octants)?;
    println!(
        "c = 3: {:.6} <= threshold < {:.6}   (octant partition vs cap bound)",
        lower3.value,
        cap_upper_bound(3)
    );

    if let Some(path) = out {
        rsp_bench::report::emit(&rows, format, path)?;
    }
    Ok(())
}
