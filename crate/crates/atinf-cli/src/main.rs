//! Command-line front end: analyze / trace / confine / area / halphen /
//! egyptian / report.
//!
//! Exit codes: 0 success, 2 precondition failure, 3 input parse failure,
//! 4 numerical failure.

mod commands;
mod output;
mod svg;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "atinf",
    about = "Polynomial vector fields at the hyperplane at infinity: holonomy trajectories, singularity tables, triangle-group series",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Field-definition JSON file.
    #[arg(long, global = true)]
    pub field: Option<PathBuf>,
    /// Seed for chart rotation and any sampled experiment.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Output formats (repeatable).
    #[arg(long, global = true, value_enum)]
    pub format: Vec<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChartMode {
    Identity,
    Rotate,
}

#[derive(Subcommand)]
pub enum Command {
    /// Singularity table and critical-locus report for the foliation at
    /// infinity.
    Analyze {
        #[arg(long, value_enum, default_value_t = ChartMode::Rotate)]
        chart: ChartMode,
        #[arg(long, default_value_t = 8)]
        jet_order: u32,
    },
    /// Trace an oriented trajectory on the hyperplane chart.
    Trace {
        #[arg(long, value_enum, default_value_t = ChartMode::Identity)]
        chart: ChartMode,
        /// Start point in chart coordinates: complex entries `re[,im]`
        /// separated by ';'.
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        /// Initial height `re[,im]`.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        z0: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 20.0)]
        tmax: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Outside-measure confinement profile of the full field.
    Confine {
        #[arg(long, value_enum, default_value_t = ChartMode::Identity)]
        chart: ChartMode,
        /// Affine start point: n complex entries `re[,im]` separated by ';'.
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Radius of the balls around the detected singular set at infinity.
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        /// Trajectory budget in holonomy arclength.
        #[arg(long, default_value_t = 100.0)]
        budget: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Acknowledge that the field is assumed complete.
        #[arg(long, default_value_t = true)]
        assume_complete: bool,
    },
    /// Time-plane area fraction spent inside the singular neighborhood.
    Area {
        #[arg(long, value_enum, default_value_t = ChartMode::Identity)]
        chart: ChartMode,
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        /// Number of spray angles.
        #[arg(long, default_value_t = 7)]
        rays: usize,
        /// Half-width of the angle grid.
        #[arg(long, default_value_t = 0.54)]
        theta_span: f64,
        /// Time-plane radii, comma separated.
        #[arg(long, default_value = "4,8,16")]
        radii: String,
        #[arg(long, default_value_t = 0.1)]
        vradius: f64,
        #[arg(long, default_value_t = 300.0)]
        tguard: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Triangle-group construction, relation checks and Poincare series.
    Halphen {
        /// Orbifold orders "m1,m2,m3"; "inf" admits one cusp.
        #[arg(long)]
        orbifold: String,
        /// Ray selector: "alt", "commutator", or `custom:<letters>` with
        /// letters like "+1,+2,-1,-2" (1-based generator indices).
        #[arg(long, default_value = "commutator")]
        ray: String,
        /// Number of default rays sampled for the leaf-type verdict.
        #[arg(long, default_value_t = 2)]
        rays: usize,
        #[arg(long, default_value_t = 220)]
        j: usize,
        /// Base point `re[,im]`.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        w0: String,
    },
    /// Enumerate the signed egyptian-fraction solutions.
    Egyptian {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        bound: i64,
    },
    /// Necessary conditions for semi-completeness of the top component.
    Report {},
}

fn main() {
    let cli = Cli::parse();
    let code = match commands::run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("atinf: {}", e.message);
            e.code
        }
    };
    std::process::exit(code);
}

pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn parse(msg: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: msg.into(),
        }
    }
    pub fn precondition(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: msg.into(),
        }
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: msg.into(),
        }
    }
    pub fn io(msg: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: msg.into(),
        }
    }
}
