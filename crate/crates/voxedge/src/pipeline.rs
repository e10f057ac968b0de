//! The CLI subcommands as library functions: generate, extract, evaluate and
//! the combined multi-method pipeline. Everything here is deterministic given
//! the configuration and seed (metadata wall times aside), so a pipeline run
//! can be reproduced byte for byte from its config file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::canny::{canny_edges, CannyParams};
use crate::error::{Error, ErrorClass, Result};
use crate::eval::{evaluate, EvalReport};
use crate::extract::{
    colorize, extract_by_gradient, extract_by_mask, extract_by_threshold, PointCloud,
};
use crate::gradient::sobel_gradient;
use crate::grid::{DensityGrid, Geometry};
use crate::io::{
    read_color_grid, read_grid, read_json, read_ply, read_raw_sidecar, write_grid, write_json,
    write_ply, PlyFormat,
};
use crate::log::{log_edges, LogParams};
use crate::synthetic::{analytic_surface_points, generate_synthetic, SyntheticSpec};

/// A reconstruction method with its full parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Global density threshold baseline.
    Threshold {
        delta_t: f64,
    },
    /// Sobel gradient magnitude with a relative threshold.
    Sobel {
        rel_threshold: f64,
    },
    Canny(CannyParams),
    Log(LogParams),
}

impl Method {
    pub fn kind(&self) -> &'static str {
        match self {
            Method::Threshold { .. } => "threshold",
            Method::Sobel { .. } => "sobel",
            Method::Canny(_) => "canny",
            Method::Log(_) => "log",
        }
    }

    /// Output-file label; thresholds embed their cut so the standard 25/50/100
    /// trio lands in distinct files.
    pub fn label(&self) -> String {
        match self {
            Method::Threshold { delta_t } => format!("threshold_{delta_t}"),
            _ => self.kind().to_string(),
        }
    }
}

/// Run one reconstruction method against a density grid.
pub fn run_method(grid: &DensityGrid, method: &Method) -> Result<PointCloud> {
    match method {
        Method::Threshold { delta_t } => Ok(extract_by_threshold(grid, *delta_t)),
        Method::Sobel { rel_threshold } => {
            let field = sobel_gradient(grid)?;
            extract_by_gradient(&field, *rel_threshold)
        }
        Method::Canny(params) => Ok(extract_by_mask(&canny_edges(grid, params)?)),
        Method::Log(params) => Ok(extract_by_mask(&log_edges(grid, params)?)),
    }
}

/// Synthetic grid description: the shape spec plus lattice placement. Written
/// as the sidecar JSON next to generated grid files and embedded in pipeline
/// configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticGrid {
    pub spec: SyntheticSpec,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

impl SyntheticGrid {
    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.dims, self.spacing, self.origin)
    }

    pub fn generate(&self) -> Result<DensityGrid> {
        generate_synthetic(&self.spec, self.dims, self.spacing, self.origin)
    }
}

/// Sidecar path for a grid file: the grid path with `.json` appended.
pub fn sidecar_path(grid_path: &Path) -> PathBuf {
    let mut os = grid_path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

/// Generate a synthetic grid file plus its spec sidecar.
pub fn cmd_gen(synthetic: &SyntheticGrid, out: &Path) -> Result<()> {
    let grid = synthetic.generate()?;
    write_grid(&grid, out)?;
    write_json(synthetic, sidecar_path(out))
}

/// Load a density grid: native format, or raw-f32 import when the path names
/// a sidecar JSON.
pub fn load_grid(path: &Path) -> Result<DensityGrid> {
    if path.extension().is_some_and(|e| e == "json") {
        read_raw_sidecar(path)
    } else {
        read_grid(path)
    }
}

/// What `cmd_extract` records next to the point cloud.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractMetadata {
    pub method: String,
    pub parameters: Method,
    pub point_count: usize,
    pub wall_time_ms: f64,
    pub input_grid: String,
    pub output_ply: String,
}

pub struct ExtractArgs<'a> {
    pub grid_path: &'a Path,
    pub color_path: Option<&'a Path>,
    pub method: Method,
    pub out_ply: &'a Path,
    pub out_meta: Option<&'a Path>,
    pub format: PlyFormat,
}

/// Run one method end-to-end: load, extract, colorize, write PLY + metadata.
pub fn cmd_extract(args: &ExtractArgs) -> Result<ExtractMetadata> {
    let grid = load_grid(args.grid_path)?;
    let colors = args.color_path.map(read_color_grid).transpose()?;

    let start = Instant::now();
    let cloud = run_method(&grid, &args.method)?;
    let cloud = colorize(&cloud, colors.as_ref())?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    write_ply(&cloud, args.out_ply, args.format)?;
    let metadata = ExtractMetadata {
        method: args.method.kind().to_string(),
        parameters: args.method.clone(),
        point_count: cloud.len(),
        wall_time_ms,
        input_grid: args.grid_path.display().to_string(),
        output_ply: args.out_ply.display().to_string(),
    };
    if let Some(meta_path) = args.out_meta {
        write_json(&metadata, meta_path)?;
    }
    Ok(metadata)
}

/// Evaluate a reconstruction PLY against a reference PLY; optionally write the
/// report JSON. Returns the report and its rendered table.
pub fn cmd_eval(
    data_path: &Path,
    reference_path: &Path,
    thresholds: &[f64],
    cap: usize,
    seed: u64,
    out_json: Option<&Path>,
) -> Result<(EvalReport, String)> {
    let data = read_ply(data_path)?;
    let reference = read_ply(reference_path)?;
    let report = evaluate(&data, &reference, thresholds, cap, seed)?;
    if let Some(path) = out_json {
        write_json(&report, path)?;
    }
    let table = render_eval_table(&report);
    Ok((report, table))
}

/// Plain-text rendering of a single evaluation report.
pub fn render_eval_table(report: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "data-to-reference mean (mm): {:.2}",
        report.data_to_reference_mean
    );
    let _ = writeln!(
        s,
        "reference-to-data mean (mm): {:.2}",
        report.reference_to_data_mean
    );
    let _ = writeln!(
        s,
        "completeness ({} reference points):",
        report.reference_point_count
    );
    for row in &report.completeness {
        let _ = writeln!(
            s,
            "  <= {} mm: {} ({:.2}%)",
            row.threshold_mm, row.covered_count, row.covered_percent
        );
    }
    s
}

/// Where the pipeline's input grid comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSource {
    /// Path to a grid file (or a raw-import sidecar JSON).
    Grid {
        path: PathBuf,
    },
    Synthetic(SyntheticGrid),
}

/// Reference cloud for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Path to a PLY file.
    Cloud { path: PathBuf },
    /// Sample this many points from the analytic surface of the synthetic
    /// shape (needs a synthetic input or a gen sidecar next to the grid).
    Analytic { count: usize },
}

fn default_thresholds() -> Vec<f64> {
    vec![0.5, 1.0, 1.5]
}

fn default_cap() -> usize {
    2_500_000
}

fn default_ply_format() -> PlyFormat {
    PlyFormat::BinaryLittleEndian
}

/// Full pipeline configuration. Round-trips losslessly through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: GridSource,
    #[serde(default)]
    pub color_grid: Option<PathBuf>,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub reference: Option<Reference>,
    /// Evaluate each method against the reference (which must then be set).
    #[serde(default)]
    pub evaluate: bool,
    #[serde(default = "default_thresholds")]
    pub eval_thresholds_mm: Vec<f64>,
    #[serde(default = "default_cap")]
    pub subsample_cap: usize,
    /// Seed for subsampling and analytic reference sampling.
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_ply_format")]
    pub ply_format: PlyFormat,
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

/// One method's artifacts after a pipeline run.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub label: String,
    pub point_count: usize,
    pub ply_path: PathBuf,
    pub report: Option<EvalReport>,
}

/// Everything a pipeline run produced.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub outcomes: Vec<MethodOutcome>,
    pub table: String,
    pub table_path: PathBuf,
}

/// Rebuild an error with a stage prefix, preserving its exit-code class.
fn with_stage(stage: &str, e: Error) -> Error {
    match e.class() {
        ErrorClass::Config => Error::InvalidConfig(format!("{stage}: {e}")),
        ErrorClass::Eval => Error::Eval(format!("{stage}: {e}")),
        ErrorClass::Io => Error::Io(std::io::Error::other(format!("{stage}: {e}"))),
    }
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| with_stage(name, e))
}

/// Run every configured method against the input grid, then evaluate and
/// render the combined comparison table.
pub fn cmd_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    if config.methods.is_empty() {
        return Err(Error::InvalidConfig(
            "pipeline config lists no methods".into(),
        ));
    }
    if config.evaluate && config.reference.is_none() {
        return Err(Error::InvalidConfig(
            "evaluation requested but no reference is configured".into(),
        ));
    }

    let (grid, synthetic) = stage("load input", load_input(&config.input))?;
    let colors = stage(
        "load color grid",
        config
            .color_grid
            .as_deref()
            .map(read_color_grid)
            .transpose(),
    )?;

    let reference = if config.evaluate {
        Some(stage(
            "load reference",
            load_reference(
                config.reference.as_ref().expect("checked above"),
                synthetic.as_ref(),
                config.seed,
            ),
        )?)
    } else {
        None
    };

    std::fs::create_dir_all(&config.output_dir)?;

    let mut outcomes = Vec::with_capacity(config.methods.len());
    let mut used_labels: Vec<String> = Vec::new();
    for method in &config.methods {
        let mut label = method.label();
        let duplicates = used_labels.iter().filter(|l| **l == method.label()).count();
        if duplicates > 0 {
            label = format!("{label}_{}", duplicates + 1);
        }
        used_labels.push(method.label());

        let start = Instant::now();
        let cloud = stage(&format!("extract {label}"), {
            run_method(&grid, method).and_then(|c| colorize(&c, colors.as_ref()))
        })?;
        let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        let ply_path = config.output_dir.join(format!("{label}.ply"));
        stage(
            &format!("write {label}"),
            write_ply(&cloud, &ply_path, config.ply_format),
        )?;

        let metadata = ExtractMetadata {
            method: method.kind().to_string(),
            parameters: method.clone(),
            point_count: cloud.len(),
            wall_time_ms,
            input_grid: input_label(&config.input),
            output_ply: ply_path.display().to_string(),
        };
        stage(
            &format!("write {label} metadata"),
            write_json(
                &metadata,
                config.output_dir.join(format!("{label}.meta.json")),
            ),
        )?;

        let report = match &reference {
            Some(reference) => {
                let report = stage(
                    &format!("evaluate {label}"),
                    evaluate(
                        &cloud,
                        reference,
                        &config.eval_thresholds_mm,
                        config.subsample_cap,
                        config.seed,
                    ),
                )?;
                stage(
                    &format!("write {label} report"),
                    write_json(
                        &report,
                        config.output_dir.join(format!("{label}.eval.json")),
                    ),
                )?;
                Some(report)
            }
            None => None,
        };

        outcomes.push(MethodOutcome {
            label,
            point_count: cloud.len(),
            ply_path,
            report,
        });
    }

    let table = render_comparison_table(&outcomes, &config.eval_thresholds_mm);
    let table_path = config.output_dir.join("comparison.txt");
    std::fs::write(&table_path, table.as_bytes())?;

    Ok(PipelineOutcome {
        outcomes,
        table,
        table_path,
    })
}

fn input_label(source: &GridSource) -> String {
    match source {
        GridSource::Grid { path } => path.display().to_string(),
        GridSource::Synthetic(s) => format!("synthetic {:?}", s.spec.shape),
    }
}

fn load_input(source: &GridSource) -> Result<(DensityGrid, Option<SyntheticGrid>)> {
    match source {
        GridSource::Grid { path } => {
            let grid = load_grid(path)?;
            // A gen sidecar, when present, allows analytic references later.
            let synthetic = read_json::<SyntheticGrid>(&sidecar_path(path)).ok();
            Ok((grid, synthetic))
        }
        GridSource::Synthetic(synthetic) => Ok((synthetic.generate()?, Some(synthetic.clone()))),
    }
}

fn load_reference(
    reference: &Reference,
    synthetic: Option<&SyntheticGrid>,
    seed: u64,
) -> Result<PointCloud> {
    match reference {
        Reference::Cloud { path } => read_ply(path),
        Reference::Analytic { count } => {
            let synthetic = synthetic.ok_or_else(|| {
                Error::InvalidConfig(
                    "analytic reference needs a synthetic input or a gen sidecar next to the grid"
                        .into(),
                )
            })?;
            analytic_surface_points(&synthetic.spec, &synthetic.geometry()?, *count, seed)
        }
    }
}

/// The side-by-side method table: point counts, Chamfer means and
/// completeness percentages per threshold.
pub fn render_comparison_table(outcomes: &[MethodOutcome], thresholds: &[f64]) -> String {
    let mut sorted = thresholds.to_vec();
    sorted.sort_by(f64::total_cmp);

    let label_width = outcomes
        .iter()
        .map(|o| o.label.len())
        .chain(["method".len()])
        .max()
        .unwrap_or(6);

    let has_reports = outcomes.iter().any(|o| o.report.is_some());
    let mut s = String::new();
    let _ = write!(s, "{:<label_width$}  {:>10}", "method", "points");
    if has_reports {
        let _ = write!(s, "  {:>8}  {:>8}", "d2r_mm", "r2d_mm");
        for t in &sorted {
            let _ = write!(s, "  {:>10}", format!("<={t}mm"));
        }
    }
    s.push('\n');

    for o in outcomes {
        let _ = write!(s, "{:<label_width$}  {:>10}", o.label, o.point_count);
        if let Some(report) = &o.report {
            let _ = write!(
                s,
                "  {:>8.2}  {:>8.2}",
                report.data_to_reference_mean, report.reference_to_data_mean
            );
            for row in &report.completeness {
                let _ = write!(s, "  {:>9.2}%", row.covered_percent);
            }
        } else if has_reports {
            let _ = write!(s, "  {:>8}  {:>8}", "-", "-");
            for _ in &sorted {
                let _ = write!(s, "  {:>10}", "-");
            }
        }
        s.push('\n');
    }
    s
}
