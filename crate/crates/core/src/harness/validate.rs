//! Statistical and numerical self-checks behind `validate`.

use rand::Rng;

use crate::autoencoder::{AutoencoderModel, Noise, TrainBatch};
use crate::counting::{CountMinSketch, VisitCounter, PRIMES_NEAR_1K};
use crate::hashing::{encode_key, Code, SimHasher};
use crate::rng::{derive_seed, seeded};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub const SUITES: [&str; 3] = ["lsh", "sketch", "gradcheck"];

/// Runs `lsh`, `sketch`, `gradcheck` or `all`.
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<Check>> {
    match name {
        "lsh" => Ok(lsh_suite(seed, 100_000)),
        "sketch" => Ok(sketch_suite(seed, 10_000)),
        "gradcheck" => gradcheck_suite(seed, 20),
        "all" => {
            let mut out = lsh_suite(seed, 100_000);
            out.extend(sketch_suite(seed, 10_000));
            out.extend(gradcheck_suite(seed, 20)?);
            Ok(out)
        }
        _ => Err(Error::config(
            "suite",
            format!("expected one of lsh|sketch|gradcheck|all, got {name:?}"),
        )),
    }
}

/// Fraction of `hashers` fresh one-bit SimHashes that separate two unit
/// vectors at angle `theta` in `dim` dimensions.
pub fn simhash_disagreement(theta: f64, dim: usize, hashers: usize, seed: u64) -> f64 {
    assert!(dim >= 2);
    let mut u = vec![0.0; dim];
    u[0] = 1.0;
    let mut v = vec![0.0; dim];
    v[0] = theta.cos();
    v[1] = theta.sin();
    let differ = (0..hashers as u64)
        .filter(|&i| {
            let h = SimHasher::new(1, dim, derive_seed(seed, i)).expect("valid shape");
            h.hash(&u).expect("finite") != h.hash(&v).expect("finite")
        })
        .count();
    differ as f64 / hashers as f64
}

/// Per-bit disagreement equals `theta / pi` within 0.01; exactly 0 at `theta = 0`.
pub fn lsh_suite(seed: u64, hashers: usize) -> Vec<Check> {
    use std::f64::consts::PI;
    [0.0, PI / 4.0, PI / 2.0]
        .iter()
        .map(|&theta| {
            let rate = simhash_disagreement(theta, 16, hashers, seed);
            let expected = theta / PI;
            let passed = if theta == 0.0 {
                rate == 0.0
            } else {
                (rate - expected).abs() <= 0.01
            };
            Check {
                suite: "lsh",
                name: format!("theta = {:.4}", theta),
                passed,
                detail: format!("rate {rate:.5}, expected {expected:.5}"),
            }
        })
        .collect()
}

/// Fraction of trials in which a never-inserted key reads a positive count
/// after `n` distinct random keys were inserted into a sketch with `primes`.
pub fn fresh_key_overcount_rate(primes: &[u64], n: usize, trials: usize, seed: u64) -> f64 {
    let mut sketch = CountMinSketch::new(primes).expect("valid primes");
    let mut rng = seeded(seed);
    let key = |rng: &mut crate::rng::SeededRng| {
        encode_key(&Code::Raw(rng.random::<u64>().to_le_bytes().to_vec()), None).expect("non-empty")
    };
    let mut hits = 0usize;
    for _ in 0..trials {
        sketch.clear();
        for _ in 0..n {
            sketch.increment(&key(&mut rng)).expect("no overflow");
        }
        if sketch.query(&key(&mut rng)) > 0 {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

/// `prod_j (1 - exp(-n / p_j))`.
pub fn overcount_theory(primes: &[u64], n: usize) -> f64 {
    primes
        .iter()
        .map(|&p| 1.0 - (-(n as f64) / p as f64).exp())
        .product()
}

/// Fresh-key over-count rates against theory, for 1, 2, 4 and 6 rows of
/// primes near 1000 at loads `N / p` of 0.05, 0.1 and 0.5, within three
/// binomial standard errors.
pub fn sketch_suite(seed: u64, trials: usize) -> Vec<Check> {
    let mut out = Vec::new();
    for (ci, &rows) in [1usize, 2, 4, 6].iter().enumerate() {
        for (ri, &load) in [0.05, 0.1, 0.5].iter().enumerate() {
            let primes = &PRIMES_NEAR_1K[..rows];
            let n = (load * 1000.0_f64).round() as usize;
            let expected = overcount_theory(primes, n);
            let cell_seed = derive_seed(seed, (ci * 3 + ri) as u64);
            let rate = fresh_key_overcount_rate(primes, n, trials, cell_seed);
            let se = (expected * (1.0 - expected) / trials as f64).sqrt();
            out.push(Check {
                suite: "sketch",
                name: format!("l = {rows}, N = {n}"),
                passed: (rate - expected).abs() <= 3.0 * se,
                detail: format!("rate {rate:.6}, theory {expected:.6}, 3 SE {:.6}", 3.0 * se),
            });
        }
    }
    out
}

/// Largest `|a - n| / max(|a|, |n|, 1e-6)` between analytic gradients and
/// central differences of step `h`, with the noise held fixed.
pub fn gradient_check(
    model: &AutoencoderModel,
    batch: &TrainBatch,
    noise: &Noise,
    h: f64,
) -> Result<f64> {
    let (_, grad) = model.grad_with_noise(batch, noise)?;
    let analytic = grad.flatten();
    let base = model.params();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + h;
        probe.set_params(&p);
        let up = probe.loss_with_noise(batch, noise)?;
        p[i] = base[i] - h;
        probe.set_params(&p);
        let down = probe.loss_with_noise(batch, noise)?;
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic[i] - numeric).abs() / scale);
    }
    Ok(worst)
}

/// A random autoencoder with at most 50 parameters, a 3-sample batch and a
/// fixed noise draw.
pub fn random_small_problem(seed: u64) -> Result<(AutoencoderModel, TrainBatch, Noise)> {
    let mut rng = seeded(seed);
    loop {
        let input = rng.random_range(2..=4);
        let mut layers = vec![input];
        if rng.random_bool(0.5) {
            layers.push(rng.random_range(1..=3));
        }
        let code = rng.random_range(1..=3);
        let lambda = rng.random_range(0.0..10.0);
        let mut model = AutoencoderModel::new(&layers, code, 0.3, lambda, rng.random())?;
        if model.param_count() > 50 {
            continue;
        }
        let params: Vec<f64> = (0..model.param_count())
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();
        model.set_params(&params);
        let batch = TrainBatch::new(
            (0..3)
                .map(|_| (0..input).map(|_| rng.random::<f64>()).collect())
                .collect(),
        )?;
        let noise = model.sample_noise(3, &mut rng);
        return Ok((model, batch, noise));
    }
}

/// Analytic gradients of `models` random small autoencoders agree with
/// central differences (step 1e-5) to relative error below 1e-4.
pub fn gradcheck_suite(seed: u64, models: usize) -> Result<Vec<Check>> {
    (0..models as u64)
        .map(|i| {
            let (model, batch, noise) = random_small_problem(derive_seed(seed, i))?;
            let err = gradient_check(&model, &batch, &noise, 1e-5)?;
            Ok(Check {
                suite: "gradcheck",
                name: format!("model {i} ({} params)", model.param_count()),
                passed: err < 1e-4,
                detail: format!("max relative error {err:.2e}"),
            })
        })
        .collect()
}
