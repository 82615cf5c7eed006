//! Python extension module `textgym`.
//!
//! ```python
//! import textgym
//! env = textgym.Env("seqtag", seed=0)
//! obs = env.reset()
//! obs, reward, done, info = env.step(env.action_names[0])
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;
use tg::datasets::{generate_synthetic, write_corpus, SplitName, SyntheticSpec};
use tg::factory::corpus_len;
use tg::{AnyEnv, Task};
use textgym_cli::{CliError, RunConfig};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn cli_err(e: CliError) -> PyErr {
    match e {
        CliError::Usage(m) => PyValueError::new_err(m),
        CliError::Runtime(m) => PyRuntimeError::new_err(m),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

/// Action given from Python as an index or an action name.
#[derive(FromPyObject)]
enum ActionArg {
    Index(usize),
    Name(String),
}

/// One task environment over a corpus split. Without `corpus` the seeded
/// synthetic corpus for the task is used.
#[pyclass(unsendable, module = "textgym")]
struct Env {
    inner: AnyEnv,
}

#[pymethods]
impl Env {
    #[new]
    #[pyo3(signature = (task, seed=0, featurizer=None, corpus=None, embeddings=None, split="train", reward="dense", hash_dim=300, synthetic_seed=7, max_steps=None, shuffle_choices=false))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        task: &str,
        seed: u64,
        featurizer: Option<&str>,
        corpus: Option<PathBuf>,
        embeddings: Option<PathBuf>,
        split: &str,
        reward: &str,
        hash_dim: usize,
        synthetic_seed: u64,
        max_steps: Option<usize>,
        shuffle_choices: bool,
    ) -> PyResult<Self> {
        let cfg = RunConfig {
            task: task.parse().map_err(value_err)?,
            featurizer: featurizer.map(str::parse).transpose().map_err(value_err)?,
            corpus,
            embeddings,
            reward: reward.parse().map_err(value_err)?,
            hash_dim,
            synthetic_seed,
            max_steps,
            shuffle_choices,
            agent: tg::agents::AgentKind::Oracle,
            ..Default::default()
        };
        cfg.validate().map_err(cli_err)?;
        let split: SplitName = split.parse().map_err(value_err)?;
        let mut data = cfg.load_data().map_err(cli_err)?;
        let store = cfg.embeddings_for(&mut data).map_err(cli_err)?;
        if corpus_len(&data.corpus, split) == 0 {
            return Err(PyValueError::new_err(format!("the {split} split is empty")));
        }
        let inner = AnyEnv::from_corpus(&data.corpus, split, store, &cfg.env_options(seed)).map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Starts an episode on a sample drawn from the pool.
    fn reset(&mut self) -> PyResult<Vec<f64>> {
        Ok(self.inner.reset().map_err(value_err)?.values)
    }

    /// Returns `(observation, reward, done, info)`.
    fn step(&mut self, action: ActionArg) -> PyResult<(Vec<f64>, f64, bool, BTreeMap<String, String>)> {
        let ix = match action {
            ActionArg::Index(i) => i,
            ActionArg::Name(n) => self.inner.action_space().action_to_ix(&n).map_err(value_err)?,
        };
        let r = self.inner.step(ix).map_err(value_err)?;
        Ok((r.observation.values, r.reward, r.done, r.info))
    }

    fn render(&self) -> String {
        self.inner.render()
    }

    fn transcript<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        match self.inner.transcript() {
            Some(t) => to_py(py, &t),
            None => Ok(py.None().into_bound(py)),
        }
    }

    fn oracle_action(&self) -> Option<usize> {
        self.inner.oracle_action()
    }

    fn action_name(&self, ix: usize) -> PyResult<String> {
        Ok(self.inner.action_space().ix_to_action(ix).map_err(value_err)?.to_string())
    }

    fn action_index(&self, name: &str) -> PyResult<usize> {
        self.inner.action_space().action_to_ix(name).map_err(value_err)
    }

    #[getter]
    fn task(&self) -> String {
        self.inner.task().to_string()
    }

    #[getter]
    fn action_names(&self) -> Vec<String> {
        self.inner.action_space().actions().to_vec()
    }

    #[getter]
    fn n_actions(&self) -> usize {
        self.inner.action_space().len()
    }

    #[getter]
    fn observation_dim(&self) -> usize {
        self.inner.observation_dim()
    }

    /// `[(name, offset, len), ...]` segments of the observation vector.
    #[getter]
    fn layout(&self) -> Vec<(String, usize, usize)> {
        self.inner.layout().segments().iter().map(|s| (s.name.clone(), s.offset, s.len)).collect()
    }

    #[getter]
    fn done(&self) -> bool {
        self.inner.is_done()
    }

    #[getter]
    fn total_reward(&self) -> f64 {
        self.inner.total_reward()
    }

    #[getter]
    fn pool_size(&self) -> usize {
        self.inner.pool_len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Env(task={}, n_actions={}, observation_dim={}, pool_size={})",
            self.inner.task(),
            self.inner.action_space().len(),
            self.inner.observation_dim(),
            self.inner.pool_len()
        )
    }
}

/// Positional token F1 of a predicted tag sequence.
#[pyfunction]
fn token_f1(truth: Vec<String>, pred: Vec<String>) -> f64 {
    tg::metrics::token_f1(&truth, &pred).f1
}

/// F1 of a predicted label set.
#[pyfunction]
fn set_f1(truth: Vec<String>, pred: Vec<String>) -> f64 {
    tg::metrics::set_f1(&truth, &pred).f1
}

/// Writes the synthetic corpus for `task` and its vectors (`embeddings.vec`) to `out_dir`.
#[pyfunction]
#[pyo3(signature = (task, out_dir, seed=None))]
fn write_synthetic(task: &str, out_dir: PathBuf, seed: Option<u64>) -> PyResult<()> {
    let task: Task = task.parse().map_err(value_err)?;
    let mut spec = SyntheticSpec::for_task(task);
    if let Some(s) = seed {
        spec.seed = s;
    }
    let syn = generate_synthetic(&spec).map_err(value_err)?;
    write_corpus(&syn.corpus, &out_dir).map_err(value_err)?;
    let file = std::fs::File::create(out_dir.join("embeddings.vec")).map_err(value_err)?;
    syn.embeddings.write(std::io::BufWriter::new(file)).map_err(value_err)
}

#[pymodule]
fn textgym(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", tg::VERSION)?;
    m.add_class::<Env>()?;
    m.add_function(wrap_pyfunction!(token_f1, m)?)?;
    m.add_function(wrap_pyfunction!(set_f1, m)?)?;
    m.add_function(wrap_pyfunction!(write_synthetic, m)?)?;
    Ok(())
}
