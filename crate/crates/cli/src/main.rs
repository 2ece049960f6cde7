//! `lrsc`: run subspace clustering experiments from the command line.
//!
//! Every subcommand starts from a TOML experiment config (`--config`, or the
//! built-in face defaults when absent) and applies flag overrides on top.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lrsc::datasets::{generate_synthetic, write_labels, write_matrix, Split};
use lrsc::experiment::{
    run_experiment, run_sweep, run_trace, write_results, write_trace, DatasetKind, ExperimentConfig,
    ExperimentReport, SolverKind,
};
use lrsc::{Symmetrization, Tau, ThresholdMode};

#[derive(Parser)]
#[command(name = "lrsc", version, about = "Low rank subspace clustering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver over the seed list and write the results CSV.
    Solve(ConfigArgs),
    /// Run several solvers on the same data and write one combined CSV.
    Bench {
        #[command(flatten)]
        config: ConfigArgs,
        /// Solvers to compare (comma separated); all of them when omitted.
        #[arg(long, value_delimiter = ',')]
        solvers: Vec<SolverKind>,
    },
    /// Build the KNN graph of the first seed's data and write its triplets.
    Graph(ConfigArgs),
    /// Generate the configured synthetic dataset for the first seed.
    Synth {
        #[command(flatten)]
        config: ConfigArgs,
        /// Matrix file (binary interchange format).
        #[arg(long)]
        matrix: PathBuf,
        /// Label file, one label per line.
        #[arg(long)]
        labels: PathBuf,
    },
    /// Run the solver once (first seed) and write the per-iteration trace.
    Trace(ConfigArgs),
}

#[derive(Args, Default)]
struct ConfigArgs {
    /// TOML experiment config; flags below override its values.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,

    /// Dataset: yaleb, mnist, usps or synthetic.
    #[arg(long, help_heading = "Dataset")]
    dataset: Option<DatasetKind>,
    /// Directory holding yaleb/, mnist/ and usps/ [default: $DATASET_ROOT].
    #[arg(long, help_heading = "Dataset")]
    root: Option<PathBuf>,
    /// Yale B subject group (1-4).
    #[arg(long, help_heading = "Dataset")]
    group: Option<usize>,
    /// Digit dataset split: train or test.
    #[arg(long, help_heading = "Dataset")]
    split: Option<Split>,
    /// Digit samples per class.
    #[arg(long, help_heading = "Dataset")]
    per_class: Option<usize>,
    /// Pick digit samples at random with this seed instead of file order.
    #[arg(long, help_heading = "Dataset")]
    subsample_seed: Option<u64>,

    /// Ambient dimension of synthetic data.
    #[arg(long, help_heading = "Synthetic data")]
    ambient_dim: Option<usize>,
    /// Subspace dimensions, comma separated.
    #[arg(long, value_delimiter = ',', help_heading = "Synthetic data")]
    subspace_dims: Option<Vec<usize>>,
    /// Points per subspace, comma separated.
    #[arg(long, value_delimiter = ',', help_heading = "Synthetic data")]
    points: Option<Vec<usize>>,
    /// Gaussian noise standard deviation.
    #[arg(long, help_heading = "Synthetic data")]
    noise: Option<f64>,
    /// Fraction of entries with a gross error.
    #[arg(long, help_heading = "Synthetic data")]
    corruption: Option<f64>,
    /// Magnitude of each gross error.
    #[arg(long, help_heading = "Synthetic data")]
    magnitude: Option<f64>,
    /// Draw mutually orthogonal subspaces.
    #[arg(long, help_heading = "Synthetic data")]
    orthogonal: Option<bool>,

    /// p1, p2, p3, p4, p5-ipt, p5-admm, p6, gl-p5 or gl-p6.
    #[arg(long, help_heading = "Solver")]
    solver: Option<SolverKind>,
    /// Relaxation weight; `inf` for the hard-thresholding variants.
    #[arg(long, help_heading = "Solver")]
    tau: Option<Tau>,
    #[arg(long, help_heading = "Solver")]
    alpha: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    beta: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    gamma: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    mu0: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    rho: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    mu_max: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    eps1: Option<f64>,
    #[arg(long, help_heading = "Solver")]
    max_iters: Option<usize>,
    /// branch or exact.
    #[arg(long, help_heading = "Solver")]
    threshold_mode: Option<ThresholdMode>,

    /// Neighbour count K of the similarity graph.
    #[arg(long = "knn", help_heading = "Graph")]
    knn: Option<usize>,
    /// mutual-max, average or none.
    #[arg(long, help_heading = "Graph")]
    symmetrization: Option<Symmetrization>,

    /// Cluster count; the number of classes when omitted.
    #[arg(long, help_heading = "Clustering")]
    clusters: Option<usize>,
    #[arg(long, help_heading = "Clustering")]
    restarts: Option<usize>,
    #[arg(long, help_heading = "Clustering")]
    kmeans_iters: Option<usize>,

    /// Seeds, as a comma list (`0,3,7`) or a half-open range (`0..10`).
    #[arg(long, value_parser = parse_seeds, help_heading = "Run")]
    seeds: Option<SeedList>,
}

#[derive(Clone, Debug, PartialEq)]
struct SeedList(Vec<u64>);

fn parse_seeds(s: &str) -> std::result::Result<SeedList, String> {
    let bad = |_| format!("bad seed list {s:?}");
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi): (u64, u64) = (lo.trim().parse().map_err(bad)?, hi.trim().parse().map_err(bad)?);
        if lo >= hi {
            return Err(format!("empty seed range {s:?}"));
        }
        return Ok(SeedList((lo..hi).collect()));
    }
    s.split(',').map(|v| v.trim().parse().map_err(bad)).collect::<std::result::Result<_, _>>().map(SeedList)
}

/// Sets `$target` and records `$key` as explicitly given.
macro_rules! apply {
    ($cfg:ident, $value:expr, $key:literal => $($target:tt)+) => {
        if let Some(v) = $value {
            $cfg.$($target)+ = v;
            $cfg.mark_explicit($key);
        }
    };
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        apply!(cfg, self.dataset, "dataset.kind" => dataset.kind);
        apply!(cfg, self.root.clone().map(Some), "dataset.root" => dataset.root);
        apply!(cfg, self.group, "dataset.group" => dataset.group);
        apply!(cfg, self.split, "dataset.split" => dataset.split);
        apply!(cfg, self.per_class, "dataset.per_class" => dataset.per_class);
        apply!(cfg, self.subsample_seed.map(Some), "dataset.subsample_seed" => dataset.subsample_seed);

        apply!(cfg, self.ambient_dim, "synthetic.ambient_dim" => synthetic.ambient_dim);
        apply!(cfg, self.subspace_dims.clone(), "synthetic.subspace_dims" => synthetic.subspace_dims);
        apply!(cfg, self.points.clone(), "synthetic.points_per_subspace" => synthetic.points_per_subspace);
        apply!(cfg, self.noise, "synthetic.noise_sigma" => synthetic.noise_sigma);
        apply!(cfg, self.corruption, "synthetic.corruption_fraction" => synthetic.corruption_fraction);
        apply!(cfg, self.magnitude, "synthetic.corruption_magnitude" => synthetic.corruption_magnitude);
        apply!(cfg, self.orthogonal, "synthetic.orthogonal" => synthetic.orthogonal);

        apply!(cfg, self.solver, "solver.name" => solver.name);
        apply!(cfg, self.tau, "solver.tau" => solver.config.tau);
        apply!(cfg, self.alpha, "solver.alpha" => solver.config.alpha);
        apply!(cfg, self.beta, "solver.beta" => solver.config.beta);
        apply!(cfg, self.gamma, "solver.gamma" => solver.config.gamma);
        apply!(cfg, self.mu0, "solver.mu0" => solver.config.mu0);
        apply!(cfg, self.rho, "solver.rho" => solver.config.rho);
        apply!(cfg, self.mu_max, "solver.mu_max" => solver.config.mu_max);
        apply!(cfg, self.eps1, "solver.eps1" => solver.config.eps1);
        apply!(cfg, self.max_iters, "solver.max_iters" => solver.config.max_iters);
        apply!(cfg, self.threshold_mode, "solver.threshold_mode" => solver.config.threshold_mode);

        apply!(cfg, self.knn, "graph.k" => graph.k);
        apply!(cfg, self.symmetrization, "graph.symmetrization" => graph.symmetrization);

        apply!(cfg, self.clusters.map(Some), "cluster.k" => cluster.k);
        apply!(cfg, self.restarts, "cluster.restarts" => cluster.restarts);
        apply!(cfg, self.kmeans_iters, "cluster.kmeans_iters" => cluster.kmeans_iters);

        apply!(cfg, self.seeds.clone().map(|s| s.0), "run.seeds" => run.seeds);
        cfg.validate()?;
        Ok(cfg)
    }

    /// `--output`, else the config's `fallback` path, else stdout.
    fn sink(&self, fallback: Option<&Path>) -> Result<Box<dyn Write>> {
        match self.output.as_deref().or(fallback) {
            Some(path) => {
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                Ok(Box::new(BufWriter::new(file)))
            }
            None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        }
    }
}

fn report(reports: &[ExperimentReport], args: &ConfigArgs, cfg: &ExperimentConfig) -> Result<ExitCode> {
    for r in reports {
        for w in &r.warnings {
            eprintln!("warning: {w}");
        }
        for rec in &r.records {
            if let Err(e) = &rec.outcome {
                eprintln!("error: {} seed {}: {e}", r.solver, rec.seed);
            }
        }
    }
    let mut out = args.sink(cfg.run.output.as_deref())?;
    write_results(reports, &mut out)?;
    out.flush()?;
    if reports.iter().all(ExperimentReport::all_failed) {
        eprintln!("error: every seed failed");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve(args) => {
            let cfg = args.load()?;
            let r = run_experiment(&cfg)?;
            report(&[r], &args, &cfg)
        }
        Command::Bench { config, solvers } => {
            let cfg = config.load()?;
            let kinds = if solvers.is_empty() { SolverKind::ALL.to_vec() } else { solvers };
            let reports = run_sweep(&cfg, &kinds)?;
            report(&reports, &config, &cfg)
        }
        Command::Graph(args) => {
            let cfg = args.load()?;
            let data = cfg.load_data(cfg.run.seeds[0])?;
            let graph = cfg.build_graph(&data)?;
            let mut out = args.sink(None)?;
            graph.write_triplets(&mut out)?;
            out.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth { config, matrix, labels } => {
            let cfg = config.load()?;
            if cfg.dataset.kind != DatasetKind::Synthetic {
                bail!("synth needs --dataset synthetic (or dataset.kind = \"synthetic\")");
            }
            let mut spec = cfg.synthetic.clone();
            spec.seed = cfg.run.seeds[0];
            let data = generate_synthetic(&spec)?;
            write_matrix(&matrix, &data.x)?;
            write_labels(&labels, &data.labels)?;
            eprintln!(
                "wrote {}x{} matrix to {} and {} labels to {}",
                data.x.nrows(),
                data.x.ncols(),
                matrix.display(),
                data.labels.len(),
                labels.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Trace(args) => {
            let cfg = args.load()?;
            let d = run_trace(&cfg)?;
            let mut out = args.sink(cfg.run.trace.as_deref())?;
            write_trace(&d.residuals, d.converged, &mut out)?;
            out.flush()?;
            if !d.converged {
                eprintln!("warning: no convergence within {} iterations", d.iterations);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
