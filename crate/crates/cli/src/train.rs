//! `train`: one run per seed, plus the seed-averaged curve.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::json;
use textgym::agents::{Agent, AgentKind, Checkpoint, RunRecord, RunRow};
use textgym::datasets::SplitName;
use textgym::factory::{corpus_len, PolicyChoice};
use textgym::{AnyEnv, VERSION};

use crate::{build_agent, CliError, RunConfig};

pub struct TrainSummary {
    pub output_dir: PathBuf,
    pub records: Vec<(u64, RunRecord)>,
}

pub fn seed_csv(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed-{seed}.csv"))
}

pub fn seed_checkpoint(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed-{seed}.checkpoint.json"))
}

pub fn run_train(cfg: &RunConfig) -> Result<TrainSummary, CliError> {
    let mut data = cfg.load_data()?;
    let store = cfg.embeddings_for(&mut data)?;
    let corpus = &data.corpus;
    if corpus_len(corpus, SplitName::Train) == 0 {
        return Err(CliError::usage("the train split is empty"));
    }
    let has_dev = corpus_len(corpus, SplitName::Dev) > 0;
    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;
    write_config_echo(cfg, out)?;

    let mut records = Vec::new();
    for &seed in &cfg.seeds {
        let opts = cfg.env_options(seed);
        let mut env = AnyEnv::from_corpus(corpus, SplitName::Train, store.clone(), &opts).map_err(CliError::usage)?;
        let mut dev = if has_dev {
            Some(AnyEnv::from_corpus(corpus, SplitName::Dev, store.clone(), &opts).map_err(CliError::usage)?)
        } else {
            None
        };
        let (record, mut ck) = if cfg.agent == AgentKind::Oracle {
            let eval_score = match dev.as_mut() {
                Some(d) => Some(d.evaluate(corpus, SplitName::Dev, &mut PolicyChoice::Oracle)?.score),
                None => None,
            };
            let rec = RunRecord { rows: vec![RunRow { step: 0, mean_return: None, eval_score }] };
            (rec, Checkpoint::oracle(seed))
        } else {
            let mut agent = build_agent(cfg, env.observation_dim(), env.action_space().len(), seed)?;
            let rec = env
                .train(&mut agent, &cfg.train_options(), dev.as_mut().map(|d| (d, corpus)))
                .map_err(|e| CliError::runtime(format!("seed {seed}: {e}")))?;
            (rec, agent.checkpoint())
        };
        ck.meta.insert("task".into(), cfg.task.to_string());
        ck.meta.insert("featurizer".into(), cfg.featurizer().to_string());
        record.write_csv(BufWriter::new(File::create(seed_csv(out, seed))?))?;
        ck.save(&seed_checkpoint(out, seed))?;
        if let Some(last) = record.last() {
            log::info!(
                "seed {seed}: step {} mean_return {:?} eval_score {:?}",
                last.step,
                last.mean_return,
                last.eval_score
            );
        }
        records.push((seed, record));
    }
    write_curve_mean(&records, &out.join("curve_mean.csv"))?;
    fs::write(out.join("plot.gp"), PLOT_SCRIPT)?;
    Ok(TrainSummary { output_dir: out.clone(), records })
}

fn write_config_echo(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let echo = json!({
        "version": VERSION,
        "x_axis": "env_steps",
        "seeds": cfg.seeds,
        "config": cfg,
        "featurizer": cfg.featurizer(),
        "agent_config": cfg.agent_config_json(),
        "train": {
            "total_steps": cfg.total_steps,
            "log_every": cfg.log_every,
            "target_mean_return": cfg.target_mean_return,
            "target_eval_score": cfg.target_eval_score,
        },
    });
    let text = serde_json::to_string_pretty(&echo).map_err(CliError::runtime)?;
    fs::write(out.join("config.json"), text + "\n")?;
    Ok(())
}

/// Reads `config.json` written by [`run_train`].
pub fn read_config_echo(dir: &Path) -> Result<RunConfig, CliError> {
    let path = dir.join("config.json");
    let text = fs::read_to_string(&path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_value(v["config"].clone()).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Per-step mean and population std across the seeds that logged that step.
pub fn write_curve_mean(records: &[(u64, RunRecord)], path: &Path) -> Result<(), CliError> {
    let mut by_step: BTreeMap<usize, Vec<&RunRow>> = BTreeMap::new();
    for (_, rec) in records {
        for row in &rec.rows {
            by_step.entry(row.step).or_default().push(row);
        }
    }
    let mut w = csv::Writer::from_path(path).map_err(CliError::runtime)?;
    w.write_record(["step", "mean_return", "mean_return_std", "eval_score", "eval_score_std", "n_seeds"])
        .map_err(CliError::runtime)?;
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (step, rows) in by_step {
        let ret: Vec<f64> = rows.iter().filter_map(|r| r.mean_return).collect();
        let ev: Vec<f64> = rows.iter().filter_map(|r| r.eval_score).collect();
        let (rm, rs) = mean_std(&ret).unzip();
        let (em, es) = mean_std(&ev).unzip();
        w.write_record([step.to_string(), cell(rm), cell(rs), cell(em), cell(es), rows.len().to_string()])
            .map_err(CliError::runtime)?;
    }
    w.flush()?;
    Ok(())
}

const PLOT_SCRIPT: &str = "\
set datafile separator ','
set datafile missing ''
set terminal pngcairo size 900,500
set output 'curve_mean.png'
set xlabel 'environment steps'
set key bottom right
plot 'curve_mean.csv' every ::1 using 1:2:3 with yerrorlines title 'mean return (last 100 episodes)', \\
     '' every ::1 using 1:4:5 with yerrorlines title 'dev score'
";
