use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use domshuffle_core::augment::{augment_batch, AugmentSpec, Band, Method, SeriesWindow};
use domshuffle_core::dataset::{self, Benchmark, Part, RawDataset, SplitManifest, SplitPolicy, WindowSampler};
use domshuffle_core::spectral::{rfft, top_k_bins};
use domshuffle_bench::{emit_all, run_on_dataset, ExperimentConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "domshuffle", version, about = "Frequency-domain augmentation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cut windows from a CSV, augment them and write them as long-format CSV.
    Augment(AugmentArgs),
    /// Run an experiment grid described by a JSON config.
    Bench(BenchArgs),
    /// Print the half-spectrum of one window with its dominant-bin ranks.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PartArg {
    Train,
    Validation,
    Test,
}

impl From<PartArg> for Part {
    fn from(p: PartArg) -> Self {
        match p {
            PartArg::Train => Part::Train,
            PartArg::Validation => Part::Validation,
            PartArg::Test => Part::Test,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// CSV with a header row and the timestamp in the first column.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 96)]
    lookback: usize,
    #[arg(long, default_value_t = 96)]
    horizon: usize,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// auto, ett, long, benchmark:<name>, ratio:<a>:<b>:<c> or counts:<a>:<b>:<c>
    #[arg(long, default_value = "auto", value_parser = parse_split)]
    split: SplitPolicy,
    #[arg(long, value_enum, default_value = "train")]
    part: PartArg,
}

#[derive(Args)]
struct AugmentArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "dominant_shuffle", value_parser = parse_method)]
    method: Method,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, value_parser = parse_band)]
    band: Option<Band>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    multiplier: usize,
    /// Use only the first N windows of the part.
    #[arg(long)]
    max_windows: Option<usize>,
    /// Write values on the original scale instead of z-scores.
    #[arg(long)]
    denormalize: bool,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the split manifest as JSON.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir` of the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `workers` of the config.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Window index within the part.
    #[arg(long, default_value_t = 0)]
    window: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Only this variate (by index); all variates when absent.
    #[arg(long)]
    variate: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: domshuffle_core::Error| e.to_string())
}

fn parse_band(s: &str) -> std::result::Result<Band, String> {
    s.parse().map_err(|e: domshuffle_core::Error| e.to_string())
}

fn parse_split(s: &str) -> std::result::Result<SplitPolicy, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let three = |rest: &[&str]| -> std::result::Result<[String; 3], String> {
        match rest {
            [a, b, c] => Ok([a.to_string(), b.to_string(), c.to_string()]),
            _ => Err(format!("expected three values in '{s}'")),
        }
    };
    match parts.as_slice() {
        ["auto"] => Ok(SplitPolicy::Auto),
        ["ett"] => Ok(SplitPolicy::ETT),
        ["long"] => Ok(SplitPolicy::LONG),
        ["benchmark", name] => Benchmark::from_name(name)
            .map(SplitPolicy::Benchmark)
            .ok_or_else(|| format!("unknown benchmark '{name}'")),
        ["ratio", rest @ ..] => {
            let v = three(rest)?;
            let mut r = [0.0; 3];
            for (dst, src) in r.iter_mut().zip(&v) {
                *dst = src.parse().map_err(|_| format!("bad ratio value '{src}'"))?;
            }
            Ok(SplitPolicy::Ratio(r))
        }
        ["counts", rest @ ..] => {
            let v = three(rest)?;
            let mut c = [0; 3];
            for (dst, src) in c.iter_mut().zip(&v) {
                *dst = src.parse().map_err(|_| format!("bad count '{src}'"))?;
            }
            Ok(SplitPolicy::Counts(c))
        }
        _ => Err(format!("unknown split policy '{s}'")),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => Box::new(io::stdout().lock()),
    })
}

struct Loaded {
    dataset: RawDataset,
    sampler: WindowSampler,
    splits: dataset::DatasetSplits,
    values: ndarray::Array2<f64>,
}

fn load(args: &DataArgs) -> Result<Loaded> {
    let dataset = dataset::load_csv(&args.input)?;
    let sampler = WindowSampler::new(args.lookback, args.horizon).with_stride(args.stride);
    let splits = dataset::split(&dataset, args.split, &sampler)?;
    let values = splits.normalizer.apply(dataset.values.view())?;
    Ok(Loaded {
        dataset,
        sampler,
        splits,
        values,
    })
}

impl Loaded {
    fn view(&self, part: Part) -> Result<dataset::WindowView<'_>> {
        let range = self.splits.window_range(part, self.sampler.lookback);
        Ok(dataset::WindowView::new(self.values.view(), range, self.sampler)?)
    }
}

fn augment(args: AugmentArgs) -> Result<()> {
    let loaded = load(&args.data)?;
    let part = Part::from(args.data.part);
    let view = loaded.view(part)?;
    let n = args.max_windows.map_or(view.len(), |m| m.min(view.len()));
    if n == 0 {
        bail!("no {:?} windows of length {} in {}", part, loaded.sampler.span(), args.data.input.display());
    }
    let windows = (0..n).map(|i| view.get(i)).collect::<domshuffle_core::Result<Vec<SeriesWindow>>>()?;
    let mut spec = AugmentSpec::new(args.method).with_k(args.k).with_seed(args.seed);
    spec.band = args.band;
    let batch = augment_batch(&windows, &spec, args.multiplier)?;

    if let Some(path) = &args.manifest {
        SplitManifest::new(&loaded.dataset, args.data.split, loaded.sampler, loaded.splits.clone()).write_json(path)?;
    }

    let mut w = csv::Writer::from_writer(output(args.out.as_deref())?);
    let mut header = vec!["sample".to_string(), "source".into(), "copy".into(), "method".into(), "step".into(), "segment".into()];
    header.extend(loaded.dataset.variate_names.iter().cloned());
    w.write_record(&header)?;
    let lookback = loaded.sampler.lookback;
    for (sample, aug) in batch.iter().enumerate() {
        let mut block = aug.window.concatenated();
        if args.denormalize {
            block = loaded.splits.normalizer.invert(block.view())?;
        }
        let method = aug.provenance.method.map_or("none", Method::name);
        for (step, row) in block.rows().into_iter().enumerate() {
            let mut rec = vec![
                sample.to_string(),
                aug.provenance.source.to_string(),
                aug.provenance.copy.to_string(),
                method.to_string(),
                step.to_string(),
                if step < lookback { "history" } else { "future" }.to_string(),
            ];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BenchManifest<'a> {
    config: &'a ExperimentConfig,
    splits: Vec<SplitManifest>,
    records: usize,
    failures: usize,
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut config = ExperimentConfig::from_json_file(&args.config)?;
    if let Some(w) = args.workers {
        config.workers = w;
    }
    // relative dataset paths resolve against the config file
    if config.dataset.path.is_relative() && !config.dataset.path.exists() {
        if let Some(dir) = args.config.parent() {
            config.dataset.path = dir.join(&config.dataset.path);
        }
    }
    config.validate()?;
    let out = args
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .context("no output directory: pass --out or set output.dir")?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    let dataset = dataset::load_csv(&config.dataset.path)?;
    let result = run_on_dataset(&config, &dataset)?;
    let written = emit_all(&result, &out, &config.output.formats)?;

    let mut splits = Vec::new();
    for &h in &config.horizons {
        let sampler = WindowSampler::new(config.lookback, h).with_stride(config.dataset.stride);
        if let Ok(s) = dataset::split(&dataset, config.dataset.split, &sampler) {
            splits.push(SplitManifest::new(&dataset, config.dataset.split, sampler, s));
        }
    }
    let failures = result.failures().count();
    let manifest = BenchManifest {
        config: &config,
        splits,
        records: result.records.len(),
        failures,
    };
    let path = out.join("manifest.json");
    serde_json::to_writer_pretty(File::create(&path).with_context(|| format!("creating {}", path.display()))?, &manifest)?;

    for p in &written {
        eprintln!("wrote {}", p.display());
    }
    if failures > 0 {
        eprintln!("{failures} of {} cells failed; see the error column", result.records.len());
    }
    Ok(())
}

fn inspect(args: InspectArgs) -> Result<()> {
    let loaded = load(&args.data)?;
    let view = loaded.view(args.data.part.into())?;
    if args.window >= view.len() {
        bail!("window {} out of range, the part has {} windows", args.window, view.len());
    }
    let window = view.get(args.window)?;
    let variates: Vec<usize> = match args.variate {
        Some(d) if d >= window.variates() => bail!("variate {d} out of range, the data has {}", window.variates()),
        Some(d) => vec![d],
        None => (0..window.variates()).collect(),
    };
    let policy = AugmentSpec::dominant_shuffle(args.k).candidate_policy();
    let n = window.len();
    let mut w = csv::Writer::from_writer(output(args.out.as_deref())?);
    w.write_record(["variate", "bin", "frequency", "magnitude", "phase", "dominant_rank"])?;
    for d in variates {
        let spectrum = rfft(window.column(d))?;
        let top = top_k_bins(&spectrum, args.k, policy)?;
        let name = &loaded.dataset.variate_names[d];
        for (bin, c) in spectrum.coefficients().iter().enumerate() {
            let rank = top.indices().iter().position(|&b| b == bin).map(|r| (r + 1).to_string());
            w.write_record([
                name.clone(),
                bin.to_string(),
                (bin as f64 / n as f64).to_string(),
                c.norm().to_string(),
                c.arg().to_string(),
                rank.unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Augment(a) => augment(a),
        Command::Bench(b) => bench(b),
        Command::Inspect(i) => inspect(i),
    }
}
