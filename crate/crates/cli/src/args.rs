use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "reslab",
    version,
    about = "Resonances of separable oscillators in rectilinear tables"
)]
pub struct Cli {
    /// Directory receiving the reports.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Format of the summary printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (overrides RESLAB_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate potentials and compare their curvature at the minimum.
    #[command(subcommand)]
    Potential(PotentialCmd),
    /// Quarter periods and barrier hitting times.
    #[command(subcommand)]
    Periods(PeriodsCmd),
    /// Polygon information and energy tables.
    #[command(subcommand)]
    Polygon(PolygonCmd),
    /// Diagonal billiard: trajectories, unfolding, saddle connections.
    #[command(subcommand)]
    Billiard(BilliardCmd),
    /// Resonance verdicts, energy scans and classification.
    #[command(subcommand)]
    Resonance(ResonanceCmd),
    /// Averaging operator, preimages and positivity obstructions.
    #[command(subcommand)]
    Qp(QpCmd),
    /// Build potential pairs with a prescribed resonant energy.
    #[command(subcommand)]
    Construct(ConstructCmd),
    /// Integrate the Hamiltonian flow with reflections.
    Simulate(SimulateArgs),
    /// Draw a polygon with optional paths as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Subcommand)]
pub enum PotentialCmd {
    /// Certify W' > 0 on the domain and report the self-paired test.
    Check {
        #[arg(long)]
        potential: PathBuf,
    },
    /// Ratio W2'(0) / W1'(0) and its best rational approximation.
    Ratio {
        #[arg(long)]
        pot1: PathBuf,
        #[arg(long)]
        pot2: PathBuf,
        #[arg(long, default_value_t = 100)]
        q_max: i64,
    },
}

#[derive(Debug, Subcommand)]
pub enum PeriodsCmd {
    /// Tabulate the quarter period (or a hitting time) on a theta grid.
    Eval {
        #[arg(long)]
        potential: PathBuf,
        /// `a:b:n`, n evenly spaced values from a to b.
        #[arg(long)]
        theta_grid: String,
        /// Travel time to a barrier at this position instead of the turning point.
        #[arg(long, allow_negative_numbers = true)]
        barrier: Option<f64>,
        /// Use the mirrored potential.
        #[arg(long)]
        reflected: bool,
    },
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Potential of the horizontal degree of freedom; harmonic when omitted.
    #[arg(long)]
    pub pot1: Option<PathBuf>,
    /// Potential of the vertical degree of freedom; harmonic when omitted.
    #[arg(long)]
    pub pot2: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PolygonCmd {
    /// Edges, corners, components and side levels.
    Info {
        #[arg(long)]
        polygon: PathBuf,
    },
    /// Clip to the allowed region and map to the rescaled table.
    Clip {
        #[arg(long)]
        polygon: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        e: f64,
        #[arg(long)]
        theta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Float,
    Exact,
}

#[derive(Debug, Subcommand)]
pub enum BilliardCmd {
    /// Follow a diagonal billiard path.
    Trace {
        #[arg(long)]
        polygon: PathBuf,
        /// Start point `x,y`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Vec<f64>,
        /// One of NE, NW, SW, SE.
        #[arg(long, default_value = "NE")]
        dir: String,
        #[arg(long, default_value_t = 20)]
        reflections: usize,
    },
    /// Glue the four reflected copies and list the singularities.
    Unfold {
        #[arg(long)]
        polygon: PathBuf,
    },
    /// Corner-to-corner connections in direction pi/4 up to a length bound.
    Saddles {
        #[arg(long)]
        polygon: PathBuf,
        /// Euclidean length bound.
        #[arg(long)]
        length: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
    },
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Coefficient bound of the relation search.
    #[arg(long, default_value_t = 10)]
    pub bound: i64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Connection length bound in table diameters.
    #[arg(long, default_value_t = 1e3)]
    pub length_factor: f64,
    /// Resonant fraction flagging a candidate level.
    #[arg(long, default_value_t = 0.9)]
    pub threshold: f64,
}

#[derive(Debug, Subcommand)]
pub enum ResonanceCmd {
    /// Exit status 0 when resonant, 1 when nothing was found, 2 when inconclusive.
    Pair {
        #[arg(long)]
        polygon: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        e: f64,
        #[arg(long)]
        theta: f64,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Verdicts over a theta grid at one energy.
    Scan {
        #[arg(long)]
        polygon: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        e: f64,
        /// `a:b:n`, n evenly spaced values from a to b.
        #[arg(long)]
        theta_grid: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Scan a grid of energies and summarize the resonant levels.
    Classify {
        #[arg(long)]
        polygon: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
        /// `a:b:n`, n evenly spaced energies from a to b.
        #[arg(long)]
        e_grid: String,
        /// Number of theta values per energy, at fractions (j + 1/2) / n of E.
        #[arg(long, default_value_t = 20)]
        theta_count: usize,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Energy above which no level is resonant.
    Bound {
        #[arg(long)]
        polygon: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum QpCmd {
    /// Relative defect of the averaged exponential preimage on a grid.
    CheckAgamma {
        #[arg(long, allow_negative_numbers = true)]
        xi: f64,
        #[arg(long, allow_negative_numbers = true)]
        k: i64,
        #[arg(long, default_value = "0:4:50")]
        theta_grid: String,
    },
    /// Positivity obstructions for a set of Fourier coefficients.
    Obstruct {
        /// `{"xi": r, "coeffs": [[k, re, im], ...]}`.
        #[arg(long)]
        coeffs: PathBuf,
        /// Override the exponent stored in the file.
        #[arg(long, allow_negative_numbers = true)]
        xi: Option<f64>,
    },
    /// Evaluate the exponential preimage at a point.
    Rho {
        #[arg(long, allow_negative_numbers = true)]
        xi: f64,
        #[arg(long, allow_negative_numbers = true)]
        k: i64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
    },
}

#[derive(Debug, Args)]
pub struct ConstructCommon {
    #[arg(long)]
    pub e: f64,
    /// Offset added to W'.
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
    /// Raise the offset as needed for positivity.
    #[arg(long)]
    pub auto_d: bool,
    /// Certified half-width of the potentials' domain.
    #[arg(long, default_value_t = 10.0)]
    pub range: f64,
}

#[derive(Debug, Subcommand)]
pub enum ConstructCmd {
    /// Pair from an even offset polynomial P.
    Even {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pcoeffs: Vec<f64>,
        #[command(flatten)]
        common: ConstructCommon,
        /// Choose the offset so that W1'(0) / W2'(0) equals this ratio.
        #[arg(long)]
        ratio: Option<f64>,
    },
    /// Pair with distinct linear terms on each side.
    Noneven {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pcoeffs: Vec<f64>,
        #[command(flatten)]
        common: ConstructCommon,
        #[arg(long, allow_negative_numbers = true)]
        d1: f64,
        #[arg(long, allow_negative_numbers = true)]
        d1bar: f64,
    },
    /// Pair whose two members share one polynomial S.
    Selfpaired {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        scoeffs: Vec<f64>,
        #[command(flatten)]
        common: ConstructCommon,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub polygon: PathBuf,
    #[command(flatten)]
    pub pair: PairArgs,
    /// Initial state `p1,p2,q1,q2`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub state: Vec<f64>,
    #[arg(long)]
    pub time: f64,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub polygon: PathBuf,
    /// JSON list of paths, each a list of `[x, y]` points.
    #[arg(long)]
    pub paths: Option<PathBuf>,
    /// Mark the concave corners.
    #[arg(long)]
    pub corners: bool,
}
