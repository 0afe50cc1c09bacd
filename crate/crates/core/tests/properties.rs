use std::collections::HashMap;

use hashcount::agents::{run_experiment, BonusPipeline, SoftmaxPolicy, StateHasher, Step, Trajectory};
use hashcount::autoencoder::AutoencoderModel;
use hashcount::counting::{BonusConfig, CountMode, Counter, ExactCounter, VisitCounter};
use hashcount::envs::{Environment, GridObservation, Observation, SparseGridworld, Walls};
use hashcount::harness::validate::random_small_problem;
use hashcount::harness::{AgentKind, EnvKind, ExperimentConfig, HasherKind};
use hashcount::hashing::SimHasher;
use proptest::prelude::*;

fn chain_obs(i: usize, n: usize) -> Observation {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    Observation::Vector(v)
}

fn trajectory(states: &[usize], n: usize) -> Trajectory {
    let steps = states
        .iter()
        .map(|&s| Step {
            observation: chain_obs(s, n),
            action: s % 2,
            true_reward: 0.0,
            bonus_reward: 0.0,
            done: false,
            terminal: false,
        })
        .collect();
    Trajectory::new(steps, chain_obs(0, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_text_round_trips(
        beta in 0.0f64..1.0,
        k in 1usize..512,
        seeds in 1usize..50,
        iterations in 1usize..500,
        state_action in any::<bool>(),
        q in any::<bool>(),
        master in any::<u64>(),
    ) {
        let cfg = ExperimentConfig {
            beta,
            hasher_k: k,
            seeds,
            iterations,
            count_mode: if state_action { CountMode::StateAction } else { CountMode::State },
            agent: if q { AgentKind::QLearning } else { AgentKind::Reinforce },
            master_seed: master,
            ..ExperimentConfig::default()
        };
        prop_assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn softmax_is_a_distribution(
        w in prop::collection::vec(-5.0f64..5.0, 15),
        x in prop::collection::vec(-5.0f64..5.0, 4),
    ) {
        let mut policy = SoftmaxPolicy::new(4, 3);
        policy.set_weights(w);
        let p = policy.probabilities(&x).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&q| q > 0.0));
    }

    #[test]
    fn autoencoder_checkpoint_round_trips(seed in any::<u64>()) {
        let (model, _, _) = random_small_problem(seed).unwrap();
        let back = AutoencoderModel::from_checkpoint(&model.to_checkpoint()).unwrap();
        prop_assert_eq!(back, model);
    }

    // Every step's bonus is beta / sqrt(n) with n the key's count after the
    // whole batch, including all earlier batches.
    #[test]
    fn bonus_follows_post_batch_counts(
        batches in prop::collection::vec(
            prop::collection::vec(prop::collection::vec(0usize..6, 1..8), 1..4),
            1..4,
        ),
        state_action in any::<bool>(),
    ) {
        let n = 6;
        let mode = if state_action { CountMode::StateAction } else { CountMode::State };
        let beta = 0.3;
        let mut pipeline = BonusPipeline::new(
            StateHasher::SimHash(SimHasher::new(16, n, 7).unwrap()),
            Counter::Exact(ExactCounter::new()),
            BonusConfig::new(beta, mode).unwrap(),
        );
        let mut seen: HashMap<(Vec<u8>, Option<usize>), u64> = HashMap::new();
        for batch in batches {
            let mut trajs: Vec<Trajectory> = batch.iter().map(|t| trajectory(t, n)).collect();
            let key = |s: &Step, p: &BonusPipeline| {
                (p.state_key(&s.observation).unwrap(), state_action.then_some(s.action))
            };
            for t in &trajs {
                for s in &t.steps {
                    *seen.entry(key(s, &pipeline)).or_default() += 1;
                }
            }
            pipeline.apply_bonus(&mut trajs).unwrap();
            for t in &trajs {
                for s in &t.steps {
                    let count = seen[&key(s, &pipeline)];
                    prop_assert!((s.bonus_reward - beta / (count as f64).sqrt()).abs() < 1e-12);
                    prop_assert_eq!(s.true_reward, 0.0);
                }
            }
        }
        prop_assert!(pipeline.counter().memory_bytes() > 0);
    }

    #[test]
    fn gridworld_views_agree(actions in prop::collection::vec(0usize..4, 1..60)) {
        let make = |obs| SparseGridworld::with_options(10, 10, Walls::TwoRoom, 0, obs, 200).unwrap();
        let mut pos = make(GridObservation::Position);
        let mut img = make(GridObservation::Image);
        pos.reset(0);
        img.reset(0);
        for a in actions {
            let p = pos.step(a).unwrap();
            let i = img.step(a).unwrap();
            let Observation::Vector(v) = &p.observation else { panic!("vector view") };
            let Observation::Image(im) = &i.observation else { panic!("image view") };
            let at = im.data.iter().position(|&x| x == 255).unwrap();
            prop_assert_eq!((at % 10) as f64, v[0]);
            prop_assert_eq!((at / 10) as f64, v[1]);
            prop_assert_eq!(p.reward, i.reward);
            if p.done {
                break;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn zero_beta_never_changes_learning(seed in any::<u64>(), q in any::<bool>()) {
        let base = ExperimentConfig {
            env: EnvKind::Chain,
            env_n_states: 12,
            agent: if q { AgentKind::QLearning } else { AgentKind::Reinforce },
            batch_size: 10,
            iterations: 8,
            beta: 0.0,
            ..ExperimentConfig::default()
        };
        let plain = ExperimentConfig { hasher: HasherKind::None, ..base.clone() };
        let a = run_experiment(&base, seed).unwrap();
        let b = run_experiment(&plain, seed).unwrap();
        let bits = |r: &hashcount::agents::RunResult| {
            r.rows.iter().map(|m| m.mean_true_return.to_bits()).collect::<Vec<_>>()
        };
        prop_assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn distinct_keys_never_shrink(seed in any::<u64>()) {
        let cfg = ExperimentConfig {
            env: EnvKind::Gridworld,
            env_observation: GridObservation::Image,
            hasher_k: 8,
            batch_size: 10,
            iterations: 10,
            ..ExperimentConfig::default()
        };
        let run = run_experiment(&cfg, seed).unwrap();
        prop_assert!(run.rows.windows(2).all(|w| w[0].distinct_keys <= w[1].distinct_keys));
        prop_assert!(run.rows.last().unwrap().distinct_keys <= 1 << 8);
    }
}
