//! Geometric surface reconstruction from voxelized 3D density fields.
//!
//! Radiance-field models store scene geometry implicitly as a volumetric
//! density. Sampling that density onto a regular grid turns surface recovery
//! into a 3D edge-detection problem: object boundaries are where density
//! ramps from free space to matter. This crate provides the full pipeline:
//!
//! - [`grid`]: voxel grids with world-space placement,
//! - [`synthetic`]: analytic test fields with exactly known surfaces,
//! - [`kernel`] / [`convolve`]: 3D filters and their application,
//! - [`gradient`] / [`canny`] / [`log`]: first- and second-derivative edge
//!   detectors (Sobel magnitude, Canny with hysteresis, Laplacian of
//!   Gaussian with zero crossings),
//! - [`extract`]: point clouds from thresholds, gradients and edge masks,
//! - [`eval`]: Chamfer and completeness metrics against reference clouds,
//! - [`io`]: grid files, PLY clouds, JSON reports,
//! - [`pipeline`]: the CLI subcommands as library functions.

pub mod canny;
pub mod convolve;
pub mod error;
pub mod eval;
pub mod extract;
pub mod gradient;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod log;
pub mod mask;
pub mod pipeline;
pub mod synthetic;

pub use canny::{canny_edges, canny_edges_from_gradient, canny_gradient, CannyParams};
pub use convolve::{convolve, convolve_symmetric_zero_sum, Border};
pub use error::{Error, ErrorClass, Result};
pub use eval::{
    chamfer, completeness, evaluate, nn_distances, subsample, CompletenessEntry, EvalReport, KdTree,
};
pub use extract::{
    colorize, extract_by_gradient, extract_by_mask, extract_by_threshold, PointCloud,
};
pub use gradient::{sobel_gradient, GradientField};
pub use grid::{ColorGrid, DensityGrid, Geometry};
pub use io::{
    read_color_grid, read_grid, read_json, read_ply, read_raw_sidecar, write_color_grid,
    write_grid, write_json, write_ply, PlyFormat,
};
pub use kernel::{
    default_gaussian_radius, gaussian_kernel_1d, gaussian_kernel_3d, log_kernel, sobel_kernels,
    Kernel3D,
};
pub use log::{log_edges, log_response, zero_crossings, LogMode, LogParams};
pub use mask::EdgeMask;
pub use pipeline::{
    cmd_eval, cmd_extract, cmd_gen, cmd_pipeline, render_comparison_table, render_eval_table,
    run_method, ExtractArgs, ExtractMetadata, GridSource, Method, MethodOutcome, PipelineConfig,
    PipelineOutcome, Reference, SyntheticGrid,
};
pub use synthetic::{
    analytic_surface_points, generate_synthetic, signed_distance, Shape, SyntheticSpec,
};
