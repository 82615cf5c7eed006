use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use textgym::agents::{evaluate, Agent, GreedyPolicy, OraclePolicy, PpoAgent, PpoConfig, RandomPolicy};
use textgym::datasets::{generate_synthetic, AnyCorpus, SyntheticSpec};
use textgym::env::{EnvConfig, Environment, RewardFlavor};
use textgym::{EmbeddingStore, Error, MlcEnv, QaEnv, QaSample, Sample, SeqTagEnv};

fn seqtag_corpus() -> textgym::datasets::Corpus<Sample> {
    match generate_synthetic(&SyntheticSpec::seqtag()).unwrap().corpus {
        AnyCorpus::Tagged(c) => c,
        _ => unreachable!(),
    }
}

fn mlc_corpus() -> textgym::datasets::Corpus<Sample> {
    match generate_synthetic(&SyntheticSpec::mlc()).unwrap().corpus {
        AnyCorpus::Classification(c) => c,
        _ => unreachable!(),
    }
}

fn store() -> Arc<EmbeddingStore> {
    Arc::new(EmbeddingStore::hashed(16, 0))
}

#[test]
fn oracle_policy_scores_one() {
    let c = seqtag_corpus();
    let mut env = SeqTagEnv::new(&c.labels(), store(), EnvConfig::default()).unwrap();
    let report = evaluate(&mut env, &mut OraclePolicy, &c.test.samples).unwrap();
    assert_eq!(report.score, 1.0);
    assert_eq!(report.metric_name, "micro_f1");
    assert_eq!(report.transcripts.len(), c.test.len());

    let c = mlc_corpus();
    let mut env = MlcEnv::new(&c.labels(), store(), EnvConfig::default()).unwrap();
    let report = evaluate(&mut env, &mut OraclePolicy, &c.dev.samples).unwrap();
    assert_eq!((report.score, report.mean_episode_score), (1.0, 1.0));
}

#[test]
fn empty_evaluation_is_an_error() {
    let mut env = SeqTagEnv::new(&["A"], store(), EnvConfig::default()).unwrap();
    assert!(matches!(evaluate(&mut env, &mut OraclePolicy, &[]), Err(Error::EmptyEvaluation)));
}

/// Under a uniform ANS/CONT policy choice i (1-based) is answered with
/// probability 2^-i; continuing past the last choice scores zero. With the
/// answer uniformly placed, accuracy = (1/n) Σ 2^-i.
fn random_qa_expectation(n: usize) -> f64 {
    (1..=n).map(|i| 0.5f64.powi(i as i32)).sum::<f64>() / n as f64
}

#[test]
fn random_qa_accuracy_matches_analytic_value() {
    let n = 8;
    let samples: Vec<QaSample> = (0..1000)
        .map(|i| {
            let choices = (0..n)
                .map(|k| ((b'A' + k as u8) as char).to_string())
                .map(|k| (k.clone(), format!("choice {k}")))
                .collect();
            let key = ((b'A' + (i % n) as u8) as char).to_string();
            QaSample::new(format!("q{i}"), "question?", vec![], choices, key).unwrap()
        })
        .collect();
    let mut env = QaEnv::informed(store(), EnvConfig::default()).unwrap();
    let mut policy = RandomPolicy::new(ChaCha8Rng::seed_from_u64(11));
    let report = evaluate(&mut env, &mut policy, &samples).unwrap();
    let expected = random_qa_expectation(n);
    assert!((expected - 0.12451171875).abs() < 1e-12);
    assert!((report.score - expected).abs() < 0.04, "{} vs {expected}", report.score);
    assert!((report.score - 1.0 / 8.0).abs() < 0.04);
}

#[test]
fn greedy_evaluation_is_deterministic() {
    let c = seqtag_corpus();
    let mut env = SeqTagEnv::new(&c.labels(), store(), EnvConfig::default()).unwrap();
    let agent = PpoAgent::new(env.observation_dim(), env.action_space().len(), PpoConfig::default(), 3).unwrap();
    let a = evaluate(&mut env, &mut GreedyPolicy::new(agent.policy_network()), &c.dev.samples).unwrap();
    let b = evaluate(&mut env, &mut GreedyPolicy::new(agent.policy_network()), &c.dev.samples).unwrap();
    assert_eq!(a, b);
}

fn run_episode<E: Environment>(env: &mut E, sample: E::Sample, rng: &mut ChaCha8Rng) -> (f64, f64) {
    env.reset(Some(sample)).unwrap();
    let mut total = 0.0;
    while !env.is_done() {
        let a = env.action_space().sample(rng);
        total += env.step(a).unwrap().reward;
    }
    (total, env.outcome().unwrap().score())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dense_rewards_telescope_to_final_score(seed: u64, ix in 0usize..500) {
        let c = seqtag_corpus();
        let s = c.train.samples[ix].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dense = SeqTagEnv::new(&c.labels(), store(), EnvConfig::new(RewardFlavor::Dense, 0)).unwrap();
        let (total, score) = run_episode(&mut dense, s.clone(), &mut rng);
        prop_assert!((total - score).abs() < 1e-9);
        let mut sparse = SeqTagEnv::new(&c.labels(), store(), EnvConfig::new(RewardFlavor::Sparse, 0)).unwrap();
        let (total, score) = run_episode(&mut sparse, s, &mut rng);
        prop_assert_eq!(total, score);
    }

    #[test]
    fn mlc_rewards_telescope(seed: u64, ix in 0usize..500) {
        let c = mlc_corpus();
        let s = c.train.samples[ix].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for flavor in [RewardFlavor::Dense, RewardFlavor::Sparse] {
            let mut env = MlcEnv::new(&c.labels(), store(), EnvConfig::new(flavor, 0)).unwrap();
            let (total, score) = run_episode(&mut env, s.clone(), &mut rng);
            prop_assert!((total - score).abs() < 1e-9);
        }
    }

    #[test]
    fn observations_keep_declared_dimension(seed: u64) {
        let c = seqtag_corpus();
        let mut env = SeqTagEnv::new(&c.labels(), store(), EnvConfig::new(RewardFlavor::Dense, seed)).unwrap();
        for s in &c.train.samples[..20] {
            env.add_sample(s.clone(), 1.0).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = env.observation_dim();
        prop_assert_eq!(env.reset(None).unwrap().len(), dim);
        while !env.is_done() {
            let a = env.action_space().sample(&mut rng);
            prop_assert_eq!(env.step(a).unwrap().observation.len(), dim);
        }
    }
}

#[test]
fn drawn_samples_follow_pool() {
    let c = seqtag_corpus();
    let mut env = SeqTagEnv::new(&c.labels(), store(), EnvConfig::new(RewardFlavor::Dense, 5)).unwrap();
    assert!(matches!(env.reset(None), Err(Error::EmptyPool)));
    env.add_sample(c.train.samples[0].clone(), 1.0).unwrap();
    env.reset(None).unwrap();
    assert_eq!(env.episode().unwrap().sample, c.train.samples[0]);
}
