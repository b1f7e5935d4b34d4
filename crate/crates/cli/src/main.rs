use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use nss3dqa::evaluation::{
    correlations, data_sensitivity_sweep, extract_labeled_set, feature_group_indices,
    parse_feature_groups, run_cv, sweep_table, DatasetManifest, LabeledSet,
};
use nss3dqa::features::{assemble_features_timed, read_feature_csv, write_feature_csv, FeatureRow};
use nss3dqa::io::read_model;
use nss3dqa::mesh::{CurvatureConfig, RadiusBasis};
use nss3dqa::nss::DEFAULT_BINS;
use nss3dqa::pointcloud::{NeighborhoodConfig, DEFAULT_K};
use nss3dqa::regression::{train_svr, KernelWidth, SvrConfig, SvrModel};
use nss3dqa::synth::{generate_dataset, DatasetSpec};
use nss3dqa::{ExtractConfig, ModelKind, SvrError};

#[derive(Parser)]
#[command(name = "nss3dqa", version, about = "No-reference quality assessment of colored 3D models")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "NSS3DQA_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract feature vectors from model files into a CSV.
    Extract {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output CSV (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        extract: ExtractArgs,
    },
    /// Train an SVR model from a manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        /// Precomputed features keyed by model path; extracted if omitted.
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        extract: ExtractArgs,
        #[command(flatten)]
        svr: SvrArgs,
    },
    /// Predict scores for model files with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        inputs: Vec<PathBuf>,
        /// Precomputed features instead of model files.
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        extract: ExtractArgs,
    },
    /// Score a trained model against a manifest.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        extract: ExtractArgs,
        #[arg(long, default_value_t = 10.0)]
        mos_scale: f64,
    },
    /// Leave-one-group-out cross-validation.
    Cv {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        features: Option<PathBuf>,
        /// JSON report path; the table always goes to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Ablation feature groups, e.g. `F1,F5`.
        #[arg(long)]
        groups: Option<String>,
        /// Include per-model extraction times in the JSON report.
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        extract: ExtractArgs,
        #[command(flatten)]
        svr: SvrArgs,
    },
    /// Train on random subsets of groups at several training fractions.
    Sweep {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6,0.8")]
        fractions: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random splits per fraction.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        groups: Option<String>,
        #[command(flatten)]
        extract: ExtractArgs,
        #[command(flatten)]
        svr: SvrArgs,
    },
    /// Write a synthetic distorted dataset with a manifest.
    Synth {
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 5)]
        groups: usize,
        #[arg(long, default_value_t = 1500)]
        points: usize,
        #[arg(long, default_value_t = 12)]
        levels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct ExtractArgs {
    /// Neighbors per point for eigen-features.
    #[arg(long, default_value_t = DEFAULT_K)]
    knn: usize,
    /// Count the query point as one of the k neighborhood members.
    #[arg(long)]
    include_self: bool,
    #[arg(long, default_value_t = nss3dqa::mesh::DEFAULT_RADIUS_FRACTION)]
    curvature_radius_frac: f64,
    #[arg(long, value_enum, default_value_t = Basis::Diagonal)]
    curvature_radius_basis: Basis,
    /// Histogram bins for entropy.
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Basis {
    Diagonal,
    MaxExtent,
}

impl ExtractArgs {
    fn config(&self) -> Result<ExtractConfig> {
        if self.knn == 0 {
            bail!("--knn must be at least 1");
        }
        if self.bins == 0 {
            bail!("--bins must be at least 1");
        }
        if self.curvature_radius_frac.is_nan() || self.curvature_radius_frac <= 0.0 {
            bail!("--curvature-radius-frac must be positive");
        }
        Ok(ExtractConfig {
            neighborhood: NeighborhoodConfig {
                k: self.knn,
                include_self: self.include_self,
            },
            curvature: CurvatureConfig {
                radius_fraction: self.curvature_radius_frac,
                basis: match self.curvature_radius_basis {
                    Basis::Diagonal => RadiusBasis::Diagonal,
                    Basis::MaxExtent => RadiusBasis::MaxExtent,
                },
            },
            entropy_bins: self.bins,
        })
    }
}

#[derive(Args, Clone)]
struct SvrArgs {
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// RBF width: `scale` or a positive number.
    #[arg(long, default_value = "scale")]
    gamma: String,
    /// MOS divisor used for training (10, 100 or 1).
    #[arg(long, default_value_t = 10.0)]
    mos_scale: f64,
}

impl SvrArgs {
    fn config(&self) -> Result<SvrConfig> {
        let gamma = if self.gamma == "scale" {
            KernelWidth::Scale
        } else {
            KernelWidth::Fixed(
                self.gamma
                    .parse()
                    .with_context(|| format!("--gamma `{}` is neither `scale` nor a number", self.gamma))?,
            )
        };
        Ok(SvrConfig {
            c: self.c,
            epsilon: self.epsilon,
            gamma,
            ..SvrConfig::default()
        })
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Extracts every input in parallel; reports all failures at once.
fn extract_all(inputs: &[PathBuf], config: &ExtractConfig) -> Result<Vec<FeatureRow>> {
    let results: Vec<_> = inputs
        .par_iter()
        .map(|path| {
            let model = read_model(path)?;
            let (v, elapsed) = assemble_features_timed(&model, config)?;
            Ok::<_, anyhow::Error>((v, elapsed))
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (path, res) in inputs.iter().zip(results) {
        match res {
            Ok((v, elapsed)) => {
                log::info!("{}: {:.1} ms", path.display(), elapsed.as_secs_f64() * 1e3);
                if v.degeneracy != 0 {
                    log::warn!("{}: degenerate fits, flags {:#x}", path.display(), v.degeneracy);
                }
                rows.push(FeatureRow {
                    model_id: path.display().to_string(),
                    features: v,
                });
            }
            Err(e) => failures.push(format!("{}: {e:#}", path.display())),
        }
    }
    if !failures.is_empty() {
        bail!("{} model(s) failed:\n  {}", failures.len(), failures.join("\n  "));
    }
    Ok(rows)
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

/// Manifest rows paired with features, either read from a CSV or extracted.
fn labeled_set(
    manifest_path: &Path,
    features: Option<&Path>,
    extract: &ExtractArgs,
    mos_scale: f64,
) -> Result<LabeledSet> {
    let manifest = DatasetManifest::read(manifest_path, mos_scale)
        .with_context(|| format!("reading manifest {}", manifest_path.display()))?;
    if manifest.rows.is_empty() {
        bail!("manifest {} has no rows", manifest_path.display());
    }
    let Some(fpath) = features else {
        return Ok(extract_labeled_set(&manifest, &extract.config()?)?);
    };
    let rows = read_feature_csv(File::open(fpath).with_context(|| format!("cannot open {}", fpath.display()))?)?;
    let by_id: HashMap<&str, &FeatureRow> = rows.iter().map(|r| (r.model_id.as_str(), r)).collect();
    let mut x = Vec::new();
    let mut kind = None;
    for m in &manifest.rows {
        let key = m.path.display().to_string();
        let row = by_id
            .get(key.as_str())
            .copied()
            .or_else(|| rows.iter().find(|r| same_file(Path::new(&r.model_id), &m.path)))
            .ok_or_else(|| anyhow!("no features for {}", m.path.display()))?;
        if kind.is_some_and(|k| k != row.features.kind) {
            bail!("features mix point clouds and meshes");
        }
        kind = Some(row.features.kind);
        x.push(row.features.values.clone());
    }
    let mut set = LabeledSet::new(
        manifest.rows.iter().map(|r| r.path.display().to_string()).collect(),
        x,
        manifest.rows.iter().map(|r| r.mos).collect(),
        manifest.rows.iter().map(|r| r.group.clone()).collect(),
        mos_scale,
    )?;
    set.kind = kind;
    Ok(set)
}

fn apply_groups(set: LabeledSet, groups: Option<&str>) -> Result<LabeledSet> {
    let Some(list) = groups else { return Ok(set) };
    let kind: ModelKind = set.kind.ok_or_else(|| anyhow!("cannot select groups without a model kind"))?;
    let cols = feature_group_indices(kind, &parse_feature_groups(list)?)?;
    log::info!("using {} of {} features ({list})", cols.len(), set.features.first().map_or(0, Vec::len));
    Ok(set.with_columns(&cols))
}

fn check_mos_scale(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        bail!("--mos-scale must be positive, got {s}");
    }
    if ![1.0, 10.0, 100.0].contains(&s) {
        log::warn!("unusual --mos-scale {s}; expected 1, 10 or 100");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.command {
        Command::Extract { inputs, output, extract } => {
            let rows = extract_all(&inputs, &extract.config()?)?;
            write_feature_csv(open_output(output.as_deref())?, &rows)?;
        }
        Command::Train { manifest, features, output, extract, svr } => {
            check_mos_scale(svr.mos_scale)?;
            let set = labeled_set(&manifest, features.as_deref(), &extract, svr.mos_scale)?;
            let y: Vec<f64> = set.mos.iter().map(|m| m / set.mos_scale).collect();
            let mut model = train_svr(&set.features, &y, &svr.config()?)?.with_mos_scale(set.mos_scale);
            model.kind = set.kind;
            log::info!(
                "trained on {} rows: {} support vectors, {} iterations",
                set.len(),
                model.support_vectors.len(),
                model.iterations
            );
            model.save(&output)?;
        }
        Command::Predict { model, inputs, features, output, extract } => {
            let model = SvrModel::load(&model).with_context(|| format!("loading {}", model.display()))?;
            let rows = match features {
                Some(f) => read_feature_csv(File::open(&f).with_context(|| format!("cannot open {}", f.display()))?)?,
                None if inputs.is_empty() => bail!("give model files or --features"),
                None => extract_all(&inputs, &extract.config()?)?,
            };
            let mut out = open_output(output.as_deref())?;
            writeln!(out, "model_id,score")?;
            for r in &rows {
                if model.kind.is_some_and(|k| k != r.features.kind) {
                    bail!("{}: model was trained on a different model kind", r.model_id);
                }
                let score = model.predict(&r.features.values)?;
                writeln!(out, "{},{}", r.model_id, score)?;
            }
            out.flush()?;
        }
        Command::Evaluate { model, manifest, features, output, extract, mos_scale } => {
            check_mos_scale(mos_scale)?;
            let model = SvrModel::load(&model).with_context(|| format!("loading {}", model.display()))?;
            let set = labeled_set(&manifest, features.as_deref(), &extract, mos_scale)?;
            let pred = model.predict_batch(&set.features)?;
            let c = correlations(&pred, &set.mos)?;
            let json = serde_json::to_string_pretty(&c)?;
            let mut out = open_output(output.as_deref())?;
            writeln!(out, "{json}")?;
            out.flush()?;
            eprintln!(
                "{:>8} {:>8} {:>8} {:>8}\n{:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                "PLCC", "SRCC", "KRCC", "RMSE", c.plcc, c.srcc, c.krcc, c.rmse
            );
        }
        Command::Cv { manifest, features, output, groups, timings, extract, svr } => {
            check_mos_scale(svr.mos_scale)?;
            let set = labeled_set(&manifest, features.as_deref(), &extract, svr.mos_scale)?;
            let set = apply_groups(set, groups.as_deref())?;
            let mut report = run_cv(&set, &svr.config()?)?;
            print!("{}", report.to_table());
            if !timings {
                report.extraction.clear();
            }
            if let Some(p) = output {
                std::fs::write(&p, report.to_json() + "\n").with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Command::Sweep { manifest, features, output, fractions, seed, repeats, groups, extract, svr } => {
            check_mos_scale(svr.mos_scale)?;
            let set = labeled_set(&manifest, features.as_deref(), &extract, svr.mos_scale)?;
            let set = apply_groups(set, groups.as_deref())?;
            let entries = data_sensitivity_sweep(&set, &fractions, &svr.config()?, seed, repeats)?;
            print!("{}", sweep_table(&entries));
            if let Some(p) = output {
                std::fs::write(&p, serde_json::to_string_pretty(&entries)? + "\n")
                    .with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Command::Synth { output, groups, points, levels, seed } => {
            let spec = DatasetSpec {
                groups,
                points,
                levels,
                seed,
                ..DatasetSpec::default()
            };
            let manifest = generate_dataset(&output, &spec)?;
            log::info!(
                "wrote {} models and {}",
                manifest.rows.len(),
                output.join("manifest.csv").display()
            );
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let non_convergence = err.chain().any(|e| {
        matches!(e.downcast_ref::<SvrError>(), Some(SvrError::NonConvergence(_)))
            || matches!(
                e.downcast_ref::<nss3dqa::EvalError>(),
                Some(nss3dqa::EvalError::Svr(SvrError::NonConvergence(_)))
            )
    });
    if non_convergence {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
