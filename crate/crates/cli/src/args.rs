use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dotx",
    version,
    about = "Exchange energy of two laterally coupled quantum dots"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate J and its four-term breakdown at one point.
    Eval {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Tabulate J along one axis.
    Sweep {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        range: RangeArgs,
        /// Number of grid points.
        #[arg(long, default_value_t = 201)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate the sign change of J inside a bracket.
    Switch {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        range: RangeArgs,
        /// Accepted |J| at the root, meV.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Four-phase switching protocol: raise B past B*, then raise E at fixed B.
    Scenario {
        #[command(flatten)]
        point: PointArgs,
        /// Magnetic field held after the ramp, T.
        #[arg(long, default_value_t = 2.0)]
        b_hold: f64,
        /// Final E as a multiple of E*.
        #[arg(long, default_value_t = 1.5)]
        e_overshoot: f64,
        #[arg(long, default_value_t = 11)]
        steps_per_phase: usize,
        #[arg(long, value_enum, default_value_t = DataFormat::Json)]
        format: DataFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the data behind one of the J plots as CSV.
    Figure {
        /// 1: J(B) per E; 2: J(E) per B; 4: J(d) per B.
        #[arg(long)]
        id: u32,
        /// Output directory; the file is named fig<id>.csv.
        #[arg(long)]
        out: PathBuf,
        /// Material preset name or JSON file.
        #[arg(long, default_value = "gaas")]
        material: String,
        /// Coulomb strength; figures use 2.36 unless `--derived-c` is given.
        #[arg(long, conflicts_with = "derived_c")]
        c_override: Option<f64>,
        /// Use the Coulomb strength derived from the material.
        #[arg(long)]
        derived_c: bool,
    },
    /// Compare the quadrature oracle with the closed form on a B x d grid.
    Oracle {
        #[arg(long, default_value = "gaas")]
        material: String,
        #[arg(long)]
        c_override: Option<f64>,
        /// Magnetic fields, T.
        #[arg(long = "B", value_delimiter = ',', default_values_t = [0.0, 1.0, 1.5, 2.0, 3.0])]
        b_values: Vec<f64>,
        /// Half-distances in units of a_B.
        #[arg(long = "d", value_delimiter = ',', default_values_t = [0.5, 0.6, 0.7, 0.85, 1.0])]
        d_values: Vec<f64>,
        /// Electric field, V/m.
        #[arg(long = "E", default_value_t = 0.0)]
        e_field: f64,
        /// Maximum accepted relative discrepancy.
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
        #[command(flatten)]
        quadrature: QuadratureArgs,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Material preset name or JSON file (presets also looked up in $DOTX_MATERIAL_PATH).
    #[arg(long, default_value = "gaas")]
    pub material: String,
    /// Magnetic field, T.
    #[arg(long = "B", default_value_t = 0.0, allow_negative_numbers = true)]
    pub b_tesla: f64,
    /// Electric field along the dot axis, V/m.
    #[arg(long = "E", default_value_t = 0.0, allow_negative_numbers = true)]
    pub e_field: f64,
    /// Half inter-dot distance, nm.
    #[arg(long = "a", conflicts_with = "a_over_ab", allow_negative_numbers = true)]
    pub a_nm: Option<f64>,
    /// Half inter-dot distance in units of the effective Bohr radius (default 0.7).
    #[arg(long, allow_negative_numbers = true)]
    pub a_over_ab: Option<f64>,
    /// Dimensionless Coulomb strength used verbatim.
    #[arg(long)]
    pub c_override: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    /// Axis to vary: B (T), E (V/m) or d (a / a_B).
    #[arg(long)]
    pub vary: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
}

#[derive(Debug, Args)]
pub struct QuadratureArgs {
    /// Gauss-Hermite points per axis for one-electron integrals.
    #[arg(long)]
    pub gh_order: Option<usize>,
    /// Relative tolerance of the Coulomb integrals.
    #[arg(long)]
    pub coulomb_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataFormat {
    Csv,
    Json,
}
