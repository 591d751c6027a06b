//! Monte Carlo check of the singleton (classical) stable limit: empirical
//! `E[phi(n^{-1/alpha} S_n)]` with standard errors.  Paths draw from
//! counter-based substreams of one base seed, so results are bit-identical
//! for a fixed config regardless of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::nonlocal::SampledFunction;
use crate::oracle::StableLaw;
use crate::pareto::HeavyTailLaw;

/// One Monte Carlo experiment: `paths` independent sums of `n` summands.
#[derive(Clone)]
pub struct McConfig {
    pub law: HeavyTailLaw,
    pub n: u64,
    pub paths: u64,
    pub seed: u64,
    pub phi: SampledFunction,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(domain("need at least one summand per path"));
        }
        if self.paths < 100 {
            return Err(domain("need at least 100 paths"));
        }
        Ok(())
    }
}

/// Deterministic pairwise tree sum (order independent of thread count).
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Sample mean and standard error of `phi(n^{-1/alpha} S_n)`.
pub fn simulate(cfg: &McConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let scale = (cfg.n as f64).powf(-1.0 / cfg.law.alpha());
    let values: Vec<f64> = (0..cfg.paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(path);
            let mut sum = 0.0;
            for _ in 0..cfg.n {
                sum += cfg.law.sample(&mut rng);
            }
            cfg.phi.eval(scale * sum)
        })
        .collect();
    let mean = pairwise_sum(&values) / cfg.paths as f64;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (cfg.paths as f64 - 1.0);
    let stderr = (var / cfg.paths as f64).sqrt();
    Ok((mean, stderr))
}

/// One row of a summand-count sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub n: u64,
    pub mean: f64,
    pub stderr: f64,
    /// `|mean - oracle|` when an oracle is supplied.
    pub oracle_gap: Option<f64>,
}

/// Run [`simulate`] for each `n`, reporting the gap to the stable oracle.
pub fn sweep(cfg: &McConfig, n_list: &[u64], oracle: Option<&StableLaw>) -> Result<Vec<SweepRow>> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("n_list must be strictly increasing"));
    }
    let oracle_value = match oracle {
        Some(law) => Some(law.expect_stable(&cfg.phi)?),
        None => None,
    };
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut c = cfg.clone();
        c.n = n;
        let (mean, stderr) = simulate(&c)?;
        rows.push(SweepRow {
            n,
            mean,
            stderr,
            oracle_gap: oracle_value.map(|o| (mean - o).abs()),
        });
    }
    Ok(rows)
}
