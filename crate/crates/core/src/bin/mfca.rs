use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mfca::cli_io::{self, InputSource, RunConfig};
use mfca::decomposition::TsvdStrategy;
use mfca::pipelines::{self, Method, MethodOptions};
use mfca::Error;

#[derive(Parser)]
#[command(name = "mfca", version, about = "Correspondence, taxicab, and log-ratio analysis of two-way tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run methods on a table and write coordinates, dispersions, and maps
    Analyze(AnalyzeArgs),
    /// Run a method list and print the dispersion comparison table
    Compare(CompareArgs),
}

#[derive(Args)]
struct InputArgs {
    /// CSV file: first row column labels, first column row labels
    #[arg(long, conflicts_with = "dataset")]
    input: Option<PathBuf>,
    /// Bundled dataset name (goodman1991)
    #[arg(long)]
    dataset: Option<String>,
}

impl InputArgs {
    fn source(&self) -> Result<InputSource, String> {
        match (&self.input, &self.dataset) {
            (Some(path), None) => Ok(InputSource::Csv(path.clone())),
            (None, Some(name)) => Ok(InputSource::Builtin(name.clone())),
            _ => Err("exactly one of --input or --dataset is required".into()),
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated methods: ca,mfca,tca,mftca,lra-mw,lra-uw,tlra-mw,tlra-uw,cov
    #[arg(long, default_value = "ca")]
    method: String,
    /// Number of axes to extract
    #[arg(long, default_value_t = pipelines::DEFAULT_AXES)]
    axes: usize,
    /// Taxicab sign-search strategy
    #[arg(long, default_value = "exhaustive", value_parser = parse_strategy)]
    tsvd: TsvdStrategy,
    /// IPF convergence tolerance (max-abs margin deviation)
    #[arg(long, default_value_t = mfca::margin_fit::DEFAULT_TOL)]
    ipf_tol: f64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Also write an SVG symmetric map per method
    #[arg(long)]
    svg: bool,
    /// Axis pair to plot, 1-based (e.g. 1,2)
    #[arg(long, default_value = "1,2", value_parser = parse_axis_pair)]
    plot_axes: (usize, usize),
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated methods to compare
    #[arg(long, default_value = "ca,mfca,tca,mftca")]
    method: String,
    #[arg(long, default_value_t = pipelines::DEFAULT_AXES)]
    axes: usize,
    #[arg(long, default_value = "exhaustive", value_parser = parse_strategy)]
    tsvd: TsvdStrategy,
    #[arg(long, default_value_t = mfca::margin_fit::DEFAULT_TOL)]
    ipf_tol: f64,
}

fn parse_strategy(s: &str) -> Result<TsvdStrategy, String> {
    match s {
        "exhaustive" => Ok(TsvdStrategy::Exhaustive),
        "iterative" => Ok(TsvdStrategy::Iterative),
        other => Err(format!("unknown strategy '{other}' (use exhaustive or iterative)")),
    }
}

fn parse_axis_pair(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected two comma-separated axis numbers, e.g. 1,2".into());
    }
    let a = parts[0].trim().parse().map_err(|_| "axis must be a positive integer".to_string())?;
    let b = parts[1].trim().parse().map_err(|_| "axis must be a positive integer".to_string())?;
    if a == 0 || b == 0 {
        return Err("axes are 1-based".into());
    }
    Ok((a, b))
}

fn parse_methods(s: &str) -> Result<Vec<Method>, Error> {
    s.split(',').map(Method::parse).collect()
}

fn run_analyze(args: AnalyzeArgs) -> Result<(), Error> {
    let methods = parse_methods(&args.method)?;
    let cfg = RunConfig {
        input: args.input.source().map_err(Error::InvalidTable)?,
        methods: methods.clone(),
        n_axes: args.axes.max(1),
        tsvd_strategy: args.tsvd,
        ipf_tol: args.ipf_tol,
        out_dir: args.out,
        svg: args.svg,
        plot_axes: args.plot_axes,
    };
    let table = cfg.load_table()?;
    let opts = MethodOptions {
        ipf_tol: cfg.ipf_tol,
        tsvd_strategy: cfg.tsvd_strategy,
        ..MethodOptions::default()
    };
    for &method in &methods {
        let result = pipelines::run_method(&table, method, cfg.n_axes, &opts)?;
        let written = cli_io::write_outputs(&result, &cfg)?;
        for path in written {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn run_compare(args: CompareArgs) -> Result<(), Error> {
    let methods = parse_methods(&args.method)?;
    let source = args.input.source().map_err(Error::InvalidTable)?;
    let cfg_input = match source {
        InputSource::Csv(p) => cli_io::load_csv(&p)?,
        InputSource::Builtin(name) => cli_io::builtin_dataset(&name)?,
    };
    let opts = MethodOptions {
        ipf_tol: args.ipf_tol,
        tsvd_strategy: args.tsvd,
        ..MethodOptions::default()
    };
    let results: Vec<_> = methods
        .iter()
        .map(|&m| pipelines::run_method(&cfg_input, m, args.axes.max(1), &opts))
        .collect::<Result<_, _>>()?;
    print!("{}", pipelines::dispersion_table(&results));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Compare(args) => run_compare(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
