//! `serve`: one environment per process, driven by JSON lines on stdin.
//!
//! Requests are objects with an `op` of `make`, `reset`, `step`, `render`,
//! `transcript` or `close`. `make` takes run-config keys (`task`, `corpus`,
//! `featurizer`, `seed`, ...) plus `split`. `step` takes `action` as an index
//! or an action name. `reset` and `step` answer with
//! `{ok, observation, layout, reward, done, info}`; failures answer
//! `{ok: false, error}` and leave the session usable.

use std::io::{BufRead, Write};

use serde_json::{json, Map, Value};
use textgym::datasets::SplitName;
use textgym::factory::corpus_len;
use textgym::{AnyEnv, StepResult};

use crate::{CliError, RunConfig};

struct Session {
    env: Option<AnyEnv>,
}

fn step_json(env: &AnyEnv, r: &StepResult) -> Value {
    json!({
        "ok": true,
        "observation": r.observation.values,
        "layout": env.layout().segments(),
        "reward": r.reward,
        "done": r.done,
        "info": r.info,
    })
}

fn make(req: &Map<String, Value>) -> Result<(AnyEnv, Value), String> {
    let mut table = toml::Table::new();
    let mut split = SplitName::Train;
    let mut seed = 0;
    for (k, v) in req {
        match k.as_str() {
            "op" => {}
            "split" => {
                split = v.as_str().ok_or("`split` must be a string")?.parse().map_err(|e| format!("{e}"))?
            }
            "seed" => seed = v.as_u64().ok_or("`seed` must be a non-negative integer")?,
            _ if v.is_null() => {}
            _ => {
                let tv = toml::Value::try_from(v).map_err(|e| format!("`{k}`: {e}"))?;
                table.insert(k.clone(), tv);
            }
        }
    }
    let cfg: RunConfig = table.try_into().map_err(|e: toml::de::Error| e.message().to_string())?;
    cfg.validate().map_err(|e| e.to_string())?;
    let mut data = cfg.load_data().map_err(|e| e.to_string())?;
    let store = cfg.embeddings_for(&mut data).map_err(|e| e.to_string())?;
    if corpus_len(&data.corpus, split) == 0 {
        return Err(format!("the {split} split is empty"));
    }
    let env = AnyEnv::from_corpus(&data.corpus, split, store, &cfg.env_options(seed)).map_err(|e| e.to_string())?;
    let resp = json!({
        "ok": true,
        "task": env.task(),
        "actions": env.action_space().actions(),
        "n_actions": env.action_space().len(),
        "observation_dim": env.observation_dim(),
        "layout": env.layout().segments(),
        "pool_size": env.pool_len(),
    });
    Ok((env, resp))
}

impl Session {
    fn env(&mut self) -> Result<&mut AnyEnv, String> {
        self.env.as_mut().ok_or_else(|| "no environment; send a make request first".to_string())
    }

    fn handle(&mut self, req: &Map<String, Value>) -> Result<Value, String> {
        let op = req.get("op").and_then(Value::as_str).ok_or("request needs a string `op`")?;
        match op {
            "make" => {
                let (env, resp) = make(req)?;
                self.env = Some(env);
                Ok(resp)
            }
            "reset" => {
                let env = self.env()?;
                let obs = env.reset().map_err(|e| e.to_string())?;
                let r = StepResult { observation: obs, reward: 0.0, done: false, info: Default::default() };
                Ok(step_json(env, &r))
            }
            "step" => {
                let env = self.env()?;
                let ix = match req.get("action") {
                    Some(Value::Number(n)) => n.as_u64().ok_or("`action` must be a non-negative integer")? as usize,
                    Some(Value::String(s)) => env.action_space().action_to_ix(s).map_err(|e| e.to_string())?,
                    _ => return Err("step needs an `action` index or name".into()),
                };
                let r = env.step(ix).map_err(|e| e.to_string())?;
                Ok(step_json(env, &r))
            }
            "render" => {
                let env = self.env()?;
                Ok(json!({"ok": true, "text": env.render()}))
            }
            "transcript" => {
                let env = self.env()?;
                Ok(json!({"ok": true, "transcript": env.transcript()}))
            }
            "close" => {
                self.env = None;
                Ok(json!({"ok": true}))
            }
            other => Err(format!("unknown op `{other}`")),
        }
    }
}

/// Answers each request line with one response line until `close` or EOF.
pub fn serve<R: BufRead, W: Write>(input: R, mut out: W) -> Result<(), CliError> {
    let mut session = Session { env: None };
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (resp, close) = match serde_json::from_str::<Value>(&line) {
            Ok(Value::Object(req)) => {
                let close = req.get("op").and_then(Value::as_str) == Some("close");
                match session.handle(&req) {
                    Ok(v) => (v, close),
                    Err(e) => (json!({"ok": false, "error": e}), false),
                }
            }
            Ok(_) => (json!({"ok": false, "error": "request must be a JSON object"}), false),
            Err(e) => (json!({"ok": false, "error": format!("invalid JSON: {e}")}), false),
        };
        writeln!(out, "{resp}")?;
        out.flush()?;
        if close {
            break;
        }
    }
    Ok(())
}
