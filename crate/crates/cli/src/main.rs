use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use textgym::datasets::{SplitName, SyntheticSpec};
use textgym::Task;
use textgym_cli::play::PlayOptions;
use textgym_cli::{config, eval, online, play, serve, synth, train, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "textgym", version, about = "Text-based reinforcement learning environments and baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent per seed and write curves and checkpoints.
    Train(ConfigArgs),
    /// Select the best seed of a run on dev and score it on test.
    Eval {
        run_dir: PathBuf,
        /// Re-resolve the config instead of reading the run's config.json.
        #[command(flatten)]
        config: ConfigArgs,
        /// Where to write the JSON report (default: RUN_DIR/eval_report.json).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print episodes step by step.
    Play {
        #[command(flatten)]
        config: ConfigArgs,
        /// Greedy policy from this checkpoint; random actions otherwise.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value = "train")]
        split: SplitName,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
    },
    /// Predict each training sample, then learn from it.
    Online(ConfigArgs),
    /// Write the seeded synthetic corpus and its vectors to a directory.
    GenSynthetic {
        #[arg(long)]
        task: Task,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        train: Option<usize>,
        #[arg(long)]
        dev: Option<usize>,
        #[arg(long)]
        test: Option<usize>,
    },
    /// Serve one environment over JSON lines on stdin/stdout.
    Serve,
}

#[derive(Args, Default)]
struct ConfigArgs {
    /// TOML run config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set learning_rate=1e-3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = config::parse_override)]
    set: Vec<(String, String)>,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    agent: Option<String>,
    #[arg(long)]
    featurizer: Option<String>,
    #[arg(long)]
    reward: Option<String>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long = "out")]
    output_dir: Option<PathBuf>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long)]
    total_steps: Option<usize>,
}

impl ConfigArgs {
    fn given(&self) -> bool {
        self.config.is_some()
            || !self.set.is_empty()
            || self.task.is_some()
            || self.agent.is_some()
            || self.featurizer.is_some()
            || self.reward.is_some()
            || self.corpus.is_some()
            || self.embeddings.is_some()
            || self.output_dir.is_some()
            || !self.seeds.is_empty()
            || self.total_steps.is_some()
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        let quote = |s: &str| toml::Value::String(s.to_string()).to_string();
        let mut ov = self.set.clone();
        let mut put = |k: &str, v: String| ov.push((k.to_string(), v));
        for (k, v) in [("task", &self.task), ("agent", &self.agent), ("featurizer", &self.featurizer), ("reward", &self.reward)] {
            if let Some(v) = v {
                put(k, quote(v));
            }
        }
        for (k, v) in [("corpus", &self.corpus), ("embeddings", &self.embeddings), ("output_dir", &self.output_dir)] {
            if let Some(p) = v {
                put(k, quote(&p.to_string_lossy()));
            }
        }
        if !self.seeds.is_empty() {
            put("seeds", format!("{:?}", self.seeds));
        }
        if let Some(n) = self.total_steps {
            put("total_steps", n.to_string());
        }
        RunConfig::resolve(self.config.as_deref(), &ov)
    }
}

fn write_json(path: &std::path::Path, v: &impl serde::Serialize) -> Result<String, CliError> {
    let text = serde_json::to_string_pretty(v).map_err(CliError::runtime)? + "\n";
    std::fs::write(path, &text)?;
    Ok(text)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Train(args) => {
            let cfg = args.resolve()?;
            let summary = train::run_train(&cfg)?;
            for (seed, rec) in &summary.records {
                if let Some(last) = rec.last() {
                    writeln!(out, "seed {seed}: step {} mean_return {:?} eval_score {:?}", last.step, last.mean_return, last.eval_score)?;
                }
            }
            writeln!(out, "wrote {}", summary.output_dir.display())?;
        }
        Command::Eval { run_dir, config, report } => {
            let cfg = if config.given() { Some(config.resolve()?) } else { None };
            let summary = eval::run_eval(&run_dir, cfg)?;
            let path = report.unwrap_or_else(|| run_dir.join("eval_report.json"));
            let text = write_json(&path, &summary)?;
            out.write_all(text.as_bytes())?;
        }
        Command::Play { config, checkpoint, split, seed, episodes } => {
            let cfg = config.resolve()?;
            play::run_play(&cfg, &PlayOptions { checkpoint, split, seed, episodes }, &mut out)?;
        }
        Command::Online(args) => {
            let cfg = args.resolve()?;
            let summary = online::run_online(&cfg, &mut out)?;
            writeln!(out, "wrote {}", summary.csv.display())?;
        }
        Command::GenSynthetic { task, out: dir, seed, train, dev, test } => {
            let mut spec = SyntheticSpec::for_task(task);
            if let Some(s) = seed {
                spec.seed = s;
            }
            spec.train = train.unwrap_or(spec.train);
            spec.dev = dev.unwrap_or(spec.dev);
            spec.test = test.unwrap_or(spec.test);
            synth::run_gen_synthetic(&spec, &dir)?;
            writeln!(out, "wrote {}", dir.display())?;
        }
        Command::Serve => {
            drop(out);
            serve::serve(io::stdin().lock(), io::stdout().lock())?;
            return Ok(());
        }
    }
    out.flush()?;
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
