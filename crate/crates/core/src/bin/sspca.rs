use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use sspca::groups::{make_halfspace_groups, make_singletons, GridSpec, GroupStructure};
use sspca::io::{self, ModelHeader};
use sspca::pipeline::{self, CVGrid, FoldOptions, LabeledDataset, PartitionRule};
use sspca::solver::{self, CoeffNorm, SolverConfig};
use sspca::{Error, Partition, Smoothing};

#[derive(Parser)]
#[command(name = "sspca", version, about = "Structured sparse PCA and dictionary learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a dictionary V and coefficients U from a data matrix.
    Fit(FitArgs),
    /// Compute coefficients for new rows against a fitted dictionary.
    Encode(EncodeArgs),
    /// Cross-validate (λ, r, k) with k-NN on the codes, plus the raw-data k-NN baseline.
    Evaluate(EvaluateArgs),
    /// Write a group structure file.
    GenGroups(GenGroupsArgs),
    /// Write one PGM image per dictionary element.
    Render(RenderArgs),
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Inner sweeps over U per outer iteration.
    #[arg(long, default_value_t = 3)]
    tu: usize,
    /// Inner sweeps over V per outer iteration.
    #[arg(long, default_value_t = 3)]
    tv: usize,
    /// Absolute η floor; by default it scales with the largest η.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long)]
    nonneg: bool,
    #[arg(long, default_value = "l2")]
    coeff_norm: CoeffNorm,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self, rank: usize, lambda: f64) -> SolverConfig {
        let mut cfg = SolverConfig::new(rank).lambda(lambda).alpha(self.alpha).seed(self.seed).nonneg(self.nonneg);
        cfg.sweeps_u = self.tu;
        cfg.sweeps_v = self.tv;
        cfg.stop_tol = self.tol;
        cfg.max_iter = self.max_iter;
        cfg.coeff_norm = self.coeff_norm;
        cfg.restarts = self.restarts;
        if let Some(eps) = self.eps {
            cfg.smoothing = Smoothing::Absolute(eps);
        }
        cfg
    }
}

#[derive(Args)]
struct FitArgs {
    /// Data matrix, one observation per CSV row.
    #[arg(long)]
    data: PathBuf,
    /// Group structure file.
    #[arg(long)]
    groups: PathBuf,
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Element classes sharing a support, as "1,2;3", or a class size.
    #[arg(long)]
    partition: Option<String>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Model output file.
    #[arg(long)]
    out: PathBuf,
    /// Convergence trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Record wall-clock seconds in the trace.
    #[arg(long)]
    trace_timing: bool,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Coefficient matrix output (CSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    data: PathBuf,
    /// One integer label per line.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, value_name = "HxW")]
    grid_2d: String,
    #[arg(long)]
    diagonals: bool,
    /// Candidate lists as "k=1,3,5;log2_lambda=4,6;r=10,20"; omitted keys keep their defaults.
    #[arg(long)]
    cv_grid: Option<String>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Shared-support class size for every candidate rank.
    #[arg(long)]
    class_size: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output directory for cv_scores.csv and summary.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "geometry")]
struct Geometry {
    #[arg(long, value_name = "HxW")]
    grid_2d: Option<String>,
    #[arg(long, value_name = "HxWxD")]
    grid_3d: Option<String>,
    #[arg(long, value_name = "P")]
    line: Option<usize>,
    #[arg(long, value_name = "P")]
    singletons: Option<usize>,
}

#[derive(Args)]
struct GenGroupsArgs {
    #[command(flatten)]
    geometry: Geometry,
    /// Add the diagonal directions to grid half-spaces.
    #[arg(long)]
    diagonals: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_name = "HxW")]
    grid_2d: String,
    #[arg(long)]
    out_prefix: PathBuf,
}

fn parse_dims(text: &str, count: usize) -> sspca::Result<Vec<usize>> {
    let dims: Vec<usize> = text
        .split(['x', 'X'])
        .map(|d| d.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::InvalidParameter(format!("cannot read grid dimensions `{text}`")))?;
    if dims.len() != count {
        return Err(Error::InvalidParameter(format!(
            "expected {count} dimensions in `{text}`, got {}",
            dims.len()
        )));
    }
    Ok(dims)
}

fn grid_2d(text: &str, diagonals: bool) -> sspca::Result<GridSpec> {
    let d = parse_dims(text, 2)?;
    let grid = GridSpec::grid_2d(d[0], d[1])?;
    Ok(if diagonals { grid.with_diagonals() } else { grid })
}

fn parse_list<T: std::str::FromStr>(key: &str, text: &str) -> sspca::Result<Vec<T>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad value `{v}` for {key}")))
        })
        .collect()
}

fn parse_cv_grid(text: Option<&str>) -> sspca::Result<CVGrid> {
    let mut grid = CVGrid::default();
    let Some(text) = text else { return Ok(grid) };
    for part in text.split(';').filter(|p| !p.trim().is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("expected key=values in `{part}`")))?;
        match key.trim() {
            "k" => grid.k_candidates = parse_list(key, values)?,
            "log2_lambda" => grid.log2_lambda = parse_list(key, values)?,
            "r" => grid.ranks = parse_list(key, values)?,
            other => return Err(Error::InvalidParameter(format!("unknown CV grid key `{other}`"))),
        }
    }
    grid.validate()?;
    Ok(grid)
}

fn parse_partition(text: Option<&str>, r: usize) -> sspca::Result<Partition> {
    match text {
        None => Ok(Partition::singletons(r)),
        Some(t) => match t.trim().parse::<usize>() {
            Ok(size) => Partition::contiguous(r, size),
            Err(_) => Partition::from_text(t, r),
        },
    }
}

fn run_fit(args: FitArgs) -> sspca::Result<()> {
    let x = io::load_matrix(&args.data)?;
    let gs = GroupStructure::from_text(&read(&args.groups)?, Some(x.ncols()))?;
    let part = parse_partition(args.partition.as_deref(), args.rank)?;
    let cfg = args.solver.config(args.rank, args.lambda);
    let result = solver::fit(x.view(), &gs, &part, &cfg)?;
    info!(
        "stopped after {} iterations ({:?}), objective {}",
        result.trace.iterations(),
        result.trace.stop,
        result.trace.final_objective()
    );
    io::save_model(&result.model, &ModelHeader::from(&cfg), &args.out)?;
    if let Some(path) = &args.trace {
        io::write_atomic(path, result.trace.to_csv(args.trace_timing).as_bytes())?;
    }
    Ok(())
}

fn run_encode(args: EncodeArgs) -> sspca::Result<()> {
    let (model, header) = io::load_model(&args.model)?;
    let x = io::load_matrix(&args.data)?;
    let mut cfg = SolverConfig::new(model.r())
        .lambda(header.lambda)
        .alpha(header.alpha)
        .nonneg(header.nonneg);
    cfg.coeff_norm = header.coeff_norm;
    cfg.stop_tol = args.tol;
    cfg.max_iter = args.max_iter;
    let u = solver::encode(x.view(), model.v.view(), &cfg)?;
    io::save_matrix(u.view(), &args.out)
}

fn run_evaluate(args: EvaluateArgs) -> sspca::Result<()> {
    let grid = grid_2d(&args.grid_2d, args.diagonals)?;
    let x = io::load_matrix(&args.data)?;
    let labels = io::load_labels(&args.labels)?;
    let data = LabeledDataset::new(x, labels, Some(grid.clone()))?;
    let gs = make_halfspace_groups(&grid)?;
    let cv_grid = parse_cv_grid(args.cv_grid.as_deref())?;
    let template = args.solver.config(1, 0.0);
    template.regularizer_params()?;
    let rule = match args.class_size {
        Some(size) => PartitionRule::Contiguous(size),
        None => PartitionRule::Singletons,
    };
    let opts = FoldOptions { folds: args.folds, seed: args.solver.seed };
    let report = pipeline::cross_validate(&data, &gs, &cv_grid, &template, rule, opts)?;
    let baseline = pipeline::knn_baseline(&data, &cv_grid.k_candidates, opts)?;

    std::fs::create_dir_all(&args.out).map_err(|e| io_error(&args.out, e))?;
    io::write_atomic(args.out.join("cv_scores.csv"), report.scores_csv().as_bytes())?;

    let mut summary = String::new();
    writeln!(summary, "observations: {}", data.n()).unwrap();
    writeln!(summary, "variables: {}", data.x.ncols()).unwrap();
    writeln!(summary, "groups: {}", gs.len()).unwrap();
    writeln!(summary, "folds: {} (stratified: {})", args.folds, report.stratified).unwrap();
    writeln!(summary, "grid points: {}", cv_grid.combinations().len()).unwrap();
    writeln!(
        summary,
        "best: log2_lambda={} lambda={} rank={} k={} accuracy={}",
        report.best.log2_lambda,
        report.best.lambda(),
        report.best.rank,
        report.best.k,
        report.best.mean_accuracy
    )
    .unwrap();
    for (k, acc) in &baseline {
        writeln!(summary, "raw k-NN baseline: k={k} accuracy={acc}").unwrap();
    }
    io::write_atomic(args.out.join("summary.txt"), summary.as_bytes())?;
    print!("{summary}");
    Ok(())
}

fn run_gen_groups(args: GenGroupsArgs) -> sspca::Result<()> {
    let g = &args.geometry;
    let gs = if let Some(p) = g.singletons {
        make_singletons(p)?
    } else {
        let grid = if let Some(text) = &g.grid_2d {
            let d = parse_dims(text, 2)?;
            GridSpec::grid_2d(d[0], d[1])?
        } else if let Some(text) = &g.grid_3d {
            let d = parse_dims(text, 3)?;
            GridSpec::grid_3d(d[0], d[1], d[2])?
        } else {
            GridSpec::line(g.line.expect("clap enforces one geometry flag"))?
        };
        let grid = if args.diagonals { grid.with_diagonals() } else { grid };
        make_halfspace_groups(&grid)?
    };
    io::write_atomic(&args.out, gs.to_text().as_bytes())
}

fn run_render(args: RenderArgs) -> sspca::Result<()> {
    let (model, _) = io::load_model(&args.model)?;
    let grid = grid_2d(&args.grid_2d, false)?;
    for path in io::render_dictionary(&model, &grid, &args.out_prefix)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn read(path: &Path) -> sspca::Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Encode(a) => run_encode(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::GenGroups(a) => run_gen_groups(a),
        Command::Render(a) => run_render(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() { ExitCode::from(2) } else { ExitCode::from(1) }
        }
    }
}
