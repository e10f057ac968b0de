//! Command-line front end: gen, extract, eval, pipeline.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use voxedge::pipeline::{cmd_eval, cmd_extract, cmd_gen, cmd_pipeline, sidecar_path, ExtractArgs};
use voxedge::{
    CannyParams, ErrorClass, LogMode, LogParams, Method, PipelineConfig, PlyFormat, Shape,
    SyntheticGrid, SyntheticSpec,
};

/// Surface reconstruction from voxelized density fields via 3D edge detection.
#[derive(Parser)]
#[command(name = "voxedge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic density grid with a known analytic surface
    Gen {
        #[command(subcommand)]
        shape: GenShape,
    },
    /// Reconstruct a point cloud from a density grid
    Extract(ExtractCmd),
    /// Compare a reconstruction against a reference cloud
    Eval(EvalCmd),
    /// Run gen/extract/eval for every configured method
    Pipeline(PipelineCmd),
}

/// Comma-separated triple (or a single value repeated for all axes).
#[derive(Clone, Debug)]
struct Triple([f64; 3]);

impl FromStr for Triple {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let vals = parse_list::<f64>(s)?;
        match vals.len() {
            1 => Ok(Triple([vals[0]; 3])),
            3 => Ok(Triple([vals[0], vals[1], vals[2]])),
            n => Err(format!("expected 1 or 3 comma-separated values, got {n}")),
        }
    }
}

#[derive(Clone, Debug)]
struct DimsArg([usize; 3]);

impl FromStr for DimsArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let vals = parse_list::<usize>(s)?;
        match vals.len() {
            1 => Ok(DimsArg([vals[0]; 3])),
            3 => Ok(DimsArg([vals[0], vals[1], vals[2]])),
            n => Err(format!("expected 1 or 3 comma-separated values, got {n}")),
        }
    }
}

#[derive(Clone, Debug)]
struct PairArg([f64; 2]);

impl FromStr for PairArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let vals = parse_list::<f64>(s)?;
        match vals.len() {
            2 => Ok(PairArg([vals[0], vals[1]])),
            n => Err(format!("expected 2 comma-separated values, got {n}")),
        }
    }
}

/// Two world-space points as six comma-separated values.
#[derive(Clone, Debug)]
struct CentersArg([[f64; 3]; 2]);

impl FromStr for CentersArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = parse_list::<f64>(s)?;
        match v.len() {
            6 => Ok(CentersArg([[v[0], v[1], v[2]], [v[3], v[4], v[5]]])),
            n => Err(format!("expected 6 comma-separated values, got {n}")),
        }
    }
}

#[derive(Clone, Debug)]
struct F64List(Vec<f64>);

impl FromStr for F64List {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let vals = parse_list::<f64>(s)?;
        if vals.is_empty() {
            return Err("expected at least one value".into());
        }
        Ok(F64List(vals))
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split([',', 'x'])
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|e| format!("bad value \"{p}\": {e}"))
        })
        .collect()
}

#[derive(Subcommand)]
enum GenShape {
    /// Sphere centered on the grid
    Sphere {
        /// Radius in mm
        #[arg(long)]
        radius: f64,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Axis-aligned box centered on the grid
    Box {
        /// Half extents in mm, e.g. 8,6,4
        #[arg(long)]
        half_extents: Triple,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Union of two spheres at explicit world positions
    TwoSpheres {
        /// Radii in mm, e.g. 6,4
        #[arg(long)]
        radii: PairArg,
        /// Centers as x1,y1,z1,x2,y2,z2 (mm)
        #[arg(long, allow_hyphen_values = true)]
        centers: CentersArg,
        #[command(flatten)]
        common: GenCommon,
    },
}

#[derive(Args)]
struct GenCommon {
    /// Voxels per axis: one value or nx,ny,nz
    #[arg(long)]
    dims: DimsArg,
    /// Voxel pitch in mm: one value or sx,sy,sz
    #[arg(long, default_value = "1")]
    spacing: Triple,
    /// World position of the center of voxel (0,0,0) in mm
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    origin: Triple,
    /// Interior density plateau
    #[arg(long, default_value_t = 100.0)]
    amplitude: f64,
    /// Logistic transition width in mm
    #[arg(long, default_value_t = 0.5)]
    ramp_width: f64,
    /// Additive Gaussian noise sigma (0 = noiseless)
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    /// Noise seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output grid file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodKind {
    Threshold,
    Sobel,
    Canny,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PlyFormatArg {
    Ascii,
    Binary,
}

impl From<PlyFormatArg> for PlyFormat {
    fn from(arg: PlyFormatArg) -> Self {
        match arg {
            PlyFormatArg::Ascii => PlyFormat::Ascii,
            PlyFormatArg::Binary => PlyFormat::BinaryLittleEndian,
        }
    }
}

#[derive(Args)]
struct ExtractCmd {
    /// Input density grid (native format, or a raw-import sidecar JSON)
    #[arg(long)]
    grid: PathBuf,
    /// Optional RGB grid with the same geometry; points get voxel colors
    #[arg(long)]
    color_grid: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: MethodKind,
    /// threshold: minimum density
    #[arg(long, default_value_t = 50.0)]
    delta_t: f64,
    /// sobel: keep voxels with magnitude >= this fraction of the max
    #[arg(long, default_value_t = 0.25)]
    rel_threshold: f64,
    /// canny: Gaussian smoothing sigma (voxels)
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// canny: weak threshold as a fraction of the max magnitude
    #[arg(long, default_value_t = 0.0005)]
    low: f64,
    /// canny: strong threshold as a fraction of the max magnitude
    #[arg(long, default_value_t = 0.002)]
    high: f64,
    /// canny: enable non-maximum suppression
    #[arg(long)]
    nms: bool,
    /// log: cubic kernel side length (odd)
    #[arg(long, default_value_t = 7)]
    mask_size: usize,
    /// log: scale in voxels
    #[arg(long, default_value_t = 7.0)]
    log_sigma: f64,
    /// log: use difference-of-Gaussians with this sigma ratio instead of the
    /// analytic kernel
    #[arg(long)]
    dog_k: Option<f64>,
    /// log: minimum response jump across a zero crossing
    #[arg(long, default_value_t = 0.0)]
    contrast_min: f64,
    /// Output PLY path
    #[arg(long)]
    out: PathBuf,
    /// Metadata JSON path (default: <out>.meta.json)
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PlyFormatArg::Binary)]
    ply_format: PlyFormatArg,
}

impl ExtractCmd {
    fn method(&self) -> Method {
        match self.method {
            MethodKind::Threshold => Method::Threshold {
                delta_t: self.delta_t,
            },
            MethodKind::Sobel => Method::Sobel {
                rel_threshold: self.rel_threshold,
            },
            MethodKind::Canny => Method::Canny(CannyParams {
                gaussian_sigma: self.sigma,
                low_rel: self.low,
                high_rel: self.high,
                nms_enabled: self.nms,
            }),
            MethodKind::Log => Method::Log(LogParams {
                mask_size: self.mask_size,
                sigma: self.log_sigma,
                mode: match self.dog_k {
                    Some(k) => LogMode::Dog { k },
                    None => LogMode::Analytic,
                },
                contrast_min: self.contrast_min,
            }),
        }
    }
}

#[derive(Args)]
struct EvalCmd {
    /// Reconstruction PLY
    #[arg(long)]
    data: PathBuf,
    /// Reference PLY
    #[arg(long)]
    reference: PathBuf,
    /// Completeness thresholds in mm
    #[arg(long, default_value = "0.5,1.0,1.5")]
    thresholds: F64List,
    /// Subsample cap applied to the data cloud
    #[arg(long, default_value_t = 2_500_000)]
    cap: usize,
    /// Subsampling seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineCmd {
    /// Pipeline configuration JSON
    #[arg(long)]
    config: PathBuf,
}

fn main() {
    init_threads();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(match e.class() {
            ErrorClass::Config => 2,
            ErrorClass::Io => 3,
            ErrorClass::Eval => 4,
        });
    }
}

/// VOXEDGE_THREADS caps rayon's worker count; 0 or unset means automatic.
fn init_threads() {
    if let Ok(v) = std::env::var("VOXEDGE_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            Err(_) => eprintln!("warning: ignoring invalid VOXEDGE_THREADS value {v:?}"),
        }
    }
}

fn run(cli: Cli) -> voxedge::Result<()> {
    match cli.command {
        Command::Gen { shape } => {
            let (synthetic, out) = gen_config(shape);
            cmd_gen(&synthetic, &out)?;
            println!(
                "wrote {} ({}x{}x{} voxels) and sidecar {}",
                out.display(),
                synthetic.dims[0],
                synthetic.dims[1],
                synthetic.dims[2],
                sidecar_path(&out).display()
            );
        }
        Command::Extract(cmd) => {
            let meta_path = cmd
                .meta
                .clone()
                .unwrap_or_else(|| default_meta_path(&cmd.out));
            let metadata = cmd_extract(&ExtractArgs {
                grid_path: &cmd.grid,
                color_path: cmd.color_grid.as_deref(),
                method: cmd.method(),
                out_ply: &cmd.out,
                out_meta: Some(&meta_path),
                format: cmd.ply_format.into(),
            })?;
            println!(
                "{}: {} points -> {} ({:.1} ms); metadata in {}",
                metadata.method,
                metadata.point_count,
                cmd.out.display(),
                metadata.wall_time_ms,
                meta_path.display()
            );
        }
        Command::Eval(cmd) => {
            let (_, table) = cmd_eval(
                &cmd.data,
                &cmd.reference,
                &cmd.thresholds.0,
                cmd.cap,
                cmd.seed,
                cmd.out.as_deref(),
            )?;
            print!("{table}");
            if let Some(out) = &cmd.out {
                println!("report written to {}", out.display());
            }
        }
        Command::Pipeline(cmd) => {
            let config = PipelineConfig::from_file(&cmd.config)?;
            let outcome = cmd_pipeline(&config)?;
            print!("{}", outcome.table);
            println!("artifacts in {}", config.output_dir.display());
        }
    }
    Ok(())
}

fn default_meta_path(out_ply: &std::path::Path) -> PathBuf {
    let mut os = out_ply.as_os_str().to_owned();
    os.push(".meta.json");
    PathBuf::from(os)
}

fn gen_config(shape: GenShape) -> (SyntheticGrid, PathBuf) {
    let (shape, common) = match shape {
        GenShape::Sphere { radius, common } => (Shape::Sphere { radius }, common),
        GenShape::Box {
            half_extents,
            common,
        } => (
            Shape::Box {
                half_extents: half_extents.0,
            },
            common,
        ),
        GenShape::TwoSpheres {
            radii,
            centers,
            common,
        } => (
            Shape::TwoSpheres {
                radii: radii.0,
                centers: centers.0,
            },
            common,
        ),
    };
    let synthetic = SyntheticGrid {
        spec: SyntheticSpec {
            shape,
            amplitude: common.amplitude,
            ramp_width: common.ramp_width,
            noise_sigma: common.noise_sigma,
            seed: common.seed,
        },
        dims: common.dims.0,
        spacing: common.spacing.0,
        origin: common.origin.0,
    };
    (synthetic, common.out)
}
