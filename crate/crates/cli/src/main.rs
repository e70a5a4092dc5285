use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qtop_cli::config::ListValue;
use qtop_cli::{run, CliError, ExperimentConfig, ExperimentKind, Format, RawParams, Target};

#[derive(Parser)]
#[command(name = "qtop", version, about = "Kicked-top fidelity decay and edge-of-chaos experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Floquet operator and report structure and perturbation regime
    Build(Flags),
    /// Overlap series between unperturbed and perturbed evolution
    Fidelity(Flags),
    /// Fit a q-exponential on a window of an overlap series
    Fit(Flags),
    /// Classify an overlap decay as regular, Gaussian, exponential or power law
    Classify(Flags),
    /// Scan initial states along y = y_f for the edge of quantum chaos
    EdgeScan(Flags),
    /// Fit the edge-state decay over a range of perturbation strengths
    DeltaSweep(Flags),
    /// Edge offset, critical perturbation and critical q for several spins
    Table1(Flags),
    /// Classical kicked-top map
    Classical {
        #[command(subcommand)]
        command: ClassicalCommand,
    },
    /// Regenerate the data behind a published figure or table
    Reproduce {
        #[arg(value_enum)]
        target: Target,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Subcommand)]
enum ClassicalCommand {
    /// Orbit of the classical map
    Orbit(Flags),
    /// Separation growth of two nearby trajectories
    Sensitivity(Flags),
    /// Orbit projected onto the x-z plane
    Project(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// Spin quantum number (even for quantum runs)
    #[arg(long = "J")]
    j: Option<u32>,
    /// Kick strength [default: 3]
    #[arg(long)]
    alpha: Option<f64>,
    /// Perturbation strength
    #[arg(long)]
    delta: Option<f64>,
    /// Comma-separated perturbation strengths for sweeps
    #[arg(long)]
    deltas: Option<String>,
    /// Initial point x,y,z on the unit sphere
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    /// Initial point at height z on the line y = y_f
    #[arg(long = "state-z", allow_hyphen_values = true)]
    state_z: Option<f64>,
    /// Number of steps [default: 3000]
    #[arg(long)]
    steps: Option<usize>,
    /// Fit window a,b (inclusive steps)
    #[arg(long)]
    window: Option<String>,
    /// q grid lo,hi,step
    #[arg(long = "q-grid")]
    q_grid: Option<String>,
    /// Fit exponent of time, 1 or 2 [default: 2]
    #[arg(long = "time-power")]
    time_power: Option<u8>,
    /// Scan band lo,hi in z (visited from the first value)
    #[arg(long = "z-range", allow_hyphen_values = true)]
    z_range: Option<String>,
    /// Scan step in z [default: 0.002]
    #[arg(long = "z-step")]
    z_step: Option<f64>,
    /// Comma-separated spins for table1
    #[arg(long = "j-list")]
    j_list: Option<String>,
    /// Fraction of the series tail averaged for the plateau [default: 0.2]
    #[arg(long = "tail-fraction")]
    tail_fraction: Option<f64>,
    /// Read the overlap series from a t,overlap CSV instead of computing it
    #[arg(long)]
    input: Option<PathBuf>,
    /// Also classify the series when fitting
    #[arg(long)]
    classify: bool,
    /// Output directory [default: qtop-out]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write SVG plots
    #[arg(long)]
    svg: bool,
    /// Key/value config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn raw(&self) -> RawParams {
        let list = |s: &Option<String>| s.clone().map(ListValue::Text);
        RawParams {
            j: self.j,
            alpha: self.alpha,
            delta: self.delta,
            deltas: list(&self.deltas),
            state: list(&self.state),
            state_z: self.state_z,
            steps: self.steps,
            window: list(&self.window),
            q_grid: list(&self.q_grid),
            out: self.out.clone(),
            format: self.format,
            z_range: list(&self.z_range),
            z_step: self.z_step,
            j_list: list(&self.j_list),
            tail_fraction: self.tail_fraction,
            input: self.input.clone(),
            svg: self.svg.then_some(true),
            classify: self.classify.then_some(true),
            time_power: self.time_power,
        }
    }

    fn config(&self, kind: ExperimentKind) -> Result<ExperimentConfig, CliError> {
        let file = match &self.config {
            Some(path) => RawParams::from_file(path)?,
            None => RawParams::default(),
        };
        ExperimentConfig::from_raw(kind, self.raw().over(file))
    }
}

fn dispatch(cli: Cli) -> Result<ExperimentConfig, CliError> {
    let (kind, flags) = match cli.command {
        Command::Build(f) => (ExperimentKind::Build, f),
        Command::Fidelity(f) => (ExperimentKind::Fidelity, f),
        Command::Fit(f) => (ExperimentKind::Fit, f),
        Command::Classify(f) => (ExperimentKind::Classify, f),
        Command::EdgeScan(f) => (ExperimentKind::EdgeScan, f),
        Command::DeltaSweep(f) => (ExperimentKind::DeltaSweep, f),
        Command::Table1(f) => (ExperimentKind::Table1, f),
        Command::Classical { command } => match command {
            ClassicalCommand::Orbit(f) => (ExperimentKind::ClassicalOrbit, f),
            ClassicalCommand::Sensitivity(f) => (ExperimentKind::Sensitivity, f),
            ClassicalCommand::Project(f) => (ExperimentKind::Project, f),
        },
        Command::Reproduce { target, flags } => (ExperimentKind::Reproduce(target), flags),
    };
    flags.config(kind)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = dispatch(cli).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(record) => {
            println!("wrote {} files to {}", record.outputs.len() + 1, record.config.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qtop: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
