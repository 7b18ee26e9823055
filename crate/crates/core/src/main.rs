use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use dualpath::bench::{self, BenchProblem};
use dualpath::general_x::Route;
use dualpath::io::{self, OutputFormat, Problem, ProblemKind};
use dualpath::path::{Backend, PathOptions, Termination};
use dualpath::Error;

/// Exact solution paths of the generalized lasso.
#[derive(Parser)]
#[command(name = "dualpath", version)]
struct Cli {
    /// Log more (-v info, -vv debug); warnings are always shown.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a solution path and write it to a directory.
    Path(PathArgs),
    /// Evaluate coefficients from a saved path at a lambda or a df target.
    Coef(CoefArgs),
    /// Time the first steps of the path on synthetic problems.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Fl1d,
    Flgraph,
    Sfl,
    Tf,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Auto,
    Generic,
    Tf,
    Graph,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Auto,
    Transformed,
    Specialized,
}

#[derive(Args)]
struct PathArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    /// Response, one column with a header.
    #[arg(long)]
    y: PathBuf,
    /// Design matrix (n rows, header naming the p columns); identity when omitted.
    #[arg(long)]
    x: Option<PathBuf>,
    /// Edge list with header `i,j`, 1-based.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Penalty triplets with header `row,col,value`, 1-based.
    #[arg(long)]
    d: Option<PathBuf>,
    /// Trend-filter order k.
    #[arg(long)]
    order: Option<usize>,
    /// Sparse-fused weight.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    max_steps: usize,
    #[arg(long, default_value_t = 0.0)]
    min_lambda: f64,
    #[arg(long)]
    max_df: Option<usize>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
    backend: BackendArg,
    /// Only used with --x.
    #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
    route: RouteArg,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(group(ArgGroup::new("at").required(true).args(["lambda", "df"])))]
struct CoefArgs {
    /// Directory written by `dualpath path`.
    #[arg(long)]
    path: PathBuf,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    df: Option<usize>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// fl1d, tf or fl2d-grid.
    #[arg(long)]
    problem: String,
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [1000, 10000, 100000])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Trend-filter order for `tf`.
    #[arg(long, default_value_t = 3)]
    order: usize,
    #[arg(long, default_value_t = 20111)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OutOfRange { .. } => 4,
            Error::Numerical(_) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure {
            code: 1,
            message: format!("{}: {e}", p.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_flags(a: &PathArgs) -> Result<(), Failure> {
    let (need, allow): (&[&str], &[&str]) = match a.problem {
        ProblemArg::Fl1d => (&[], &[]),
        ProblemArg::Flgraph => (&["edges"], &["edges"]),
        ProblemArg::Sfl => (&["edges", "alpha"], &["edges", "alpha"]),
        ProblemArg::Tf => (&["order"], &["order"]),
        ProblemArg::Custom => (&["d"], &["d"]),
    };
    let given = [
        ("edges", a.edges.is_some()),
        ("d", a.d.is_some()),
        ("order", a.order.is_some()),
        ("alpha", a.alpha.is_some()),
    ];
    for (flag, present) in given {
        if present && !allow.contains(&flag) {
            return Err(usage(format!("--{flag} does not apply to this problem")));
        }
        if !present && need.contains(&flag) {
            return Err(usage(format!("this problem requires --{flag}")));
        }
    }
    Ok(())
}

fn cmd_path(a: PathArgs) -> Result<(), Failure> {
    check_flags(&a)?;
    let kind = match a.problem {
        ProblemArg::Fl1d => ProblemKind::Fl1d,
        ProblemArg::Flgraph => ProblemKind::Flgraph,
        ProblemArg::Sfl => ProblemKind::Sfl,
        ProblemArg::Tf => ProblemKind::Tf,
        ProblemArg::Custom => ProblemKind::Custom,
    };
    let y = io::read_vector(&a.y)?;
    let x = a.x.as_deref().map(io::read_matrix).transpose()?;
    let edges = a.edges.as_deref().map(io::read_edges).transpose()?;
    let triplets = a.d.as_deref().map(io::read_triplets).transpose()?;
    let problem = Problem::new(kind, y, x, a.order, a.alpha, edges, triplets)?;
    let opts = PathOptions {
        max_steps: a.max_steps,
        min_lambda: a.min_lambda,
        max_df: a.max_df,
        record_segments: true,
    };
    let backend = match a.backend {
        BackendArg::Auto => Backend::Auto,
        BackendArg::Generic => Backend::Generic,
        BackendArg::Tf => Backend::TrendFilter,
        BackendArg::Graph => Backend::Graph,
    };
    let route = match a.route {
        RouteArg::Auto => Route::Auto,
        RouteArg::Transformed => Route::Transformed,
        RouteArg::Specialized => Route::Specialized,
    };
    let format = match a.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    let path = problem.solve(backend, route, &opts)?;
    io::write_path(&a.out, &problem, &path, format)?;
    log::info!(
        "{} knots, termination {:?}",
        path.knots().len(),
        path.termination()
    );
    if let Termination::Aborted { step, message } = path.termination() {
        return Err(Failure {
            code: 3,
            message: format!("path aborted at step {step}: {message}; partial output written"),
        });
    }
    Ok(())
}

fn cmd_coef(a: CoefArgs) -> Result<(), Failure> {
    let (_, path) = io::read_path(&a.path)?;
    let lambda = match (a.lambda, a.df) {
        (Some(l), _) => {
            if !(l >= 0.0) {
                return Err(usage(format!("lambda must be nonnegative, got {l}")));
            }
            l
        }
        (None, Some(df)) => path.lambda_for_df(df).ok_or_else(|| {
            let mut dfs: Vec<usize> = path.segments().iter().map(|s| s.df).collect();
            dfs.sort_unstable();
            dfs.dedup();
            Failure {
                code: 4,
                message: format!(
                    "df {df} is not reached on the computed path; achievable df values: {dfs:?}"
                ),
            }
        })?,
        (None, None) => unreachable!("clap requires one of --lambda and --df"),
    };
    let beta = path.primal_at(lambda).map_err(|e| match e {
        Error::OutOfRange { requested, min } => Failure {
            code: 4,
            message: format!("lambda {requested} is outside the computed range [{min}, inf)"),
        },
        e => e.into(),
    })?;
    let text = match a.format {
        FormatArg::Csv => io::coefficients_csv(&beta),
        FormatArg::Json => io::coefficients_json(&beta),
    };
    write_output(a.out.as_ref(), &text)
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let problem = match a.problem.parse::<BenchProblem>()? {
        BenchProblem::Tf(_) => BenchProblem::Tf(a.order),
        p => p,
    };
    let timings = bench::run(problem, &a.sizes, a.steps, a.seed)?;
    let mut text = String::from("n,steps,seconds\n");
    for t in &timings {
        text.push_str(&format!("{},{},{:.6e}\n", t.n, t.steps, t.seconds));
    }
    if let Some(s) = bench::loglog_slope(&timings) {
        text.push_str(&format!("# loglog_slope={s:.4}\n"));
    }
    write_output(a.out.as_ref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    let result = match cli.command {
        Command::Path(a) => cmd_path(a),
        Command::Coef(a) => cmd_coef(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
