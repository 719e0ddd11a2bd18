//! Ground truth for checking the test: closed-form e-values of normal
//! posteriors, a brute-force superlevel-set integrator that shares no code
//! with [`crate::evidence`], and a small random-walk Metropolis sampler for
//! the two-group t-test model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::density::PosteriorSample;
use crate::error::{Error, Result};
use crate::special::erf;

/// A normal posterior `N(mu, sigma)` with known e-values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPosterior {
    mu: f64,
    sigma: f64,
}

impl AnalyticPosterior {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid normal posterior N({mu}, {sigma})")));
        }
        Ok(AnalyticPosterior { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn density(&self, theta: f64) -> f64 {
        let z = (theta - self.mu) / self.sigma;
        (-0.5 * z * z).exp() / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    /// `n` exact posterior draws, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                self.mu + self.sigma * z
            })
            .collect()
    }
}

/// With a flat reference the tangential set of `N(mu, sigma)` is
/// `|theta - mu| < |theta0 - mu|`, so the e-value is `2 Phi(d / sigma) - 1`.
pub fn analytic_evalue_flat(post: &AnalyticPosterior, null_value: f64) -> f64 {
    let d = (null_value - post.mu).abs() / post.sigma;
    erf(d / std::f64::consts::SQRT_2)
}

/// Midpoint Riemann sum of `density` over `{theta : density/reference >
/// density(theta0)/reference(theta0)}` on `[lo, hi]`, normalized by the
/// total mass on the same window.
pub fn brute_force_evalue<D, R>(density: D, reference: R, null_value: f64, lo: f64, hi: f64, steps: usize) -> f64
where
    D: Fn(f64) -> f64,
    R: Fn(f64) -> f64,
{
    let cutoff = density(null_value) / reference(null_value);
    let width = (hi - lo) / steps as f64;
    let mut inside = 0.0;
    let mut total = 0.0;
    for i in 0..steps {
        let theta = lo + (i as f64 + 0.5) * width;
        let p = density(theta);
        total += p;
        if p / reference(theta) > cutoff {
            inside += p;
        }
    }
    if total > 0.0 {
        inside / total
    } else {
        0.0
    }
}

/// Observations of a two-group design.
#[derive(Debug, Clone, PartialEq)]
pub struct TTestData {
    group1: Vec<f64>,
    group2: Vec<f64>,
}

impl TTestData {
    pub fn new(group1: Vec<f64>, group2: Vec<f64>) -> Result<Self> {
        for (name, g) in [("group1", &group1), ("group2", &group2)] {
            if g.len() < 2 {
                return Err(Error::InvalidArgument(format!("{name} needs at least 2 observations")));
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} contains non-finite values")));
            }
        }
        Ok(TTestData { group1, group2 })
    }

    /// Draws `group1 ~ N(mean1, sd1)` and `group2 ~ N(mean2, sd2)`.
    pub fn simulate(n1: usize, mean1: f64, sd1: f64, n2: usize, mean2: f64, sd2: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d1 = Normal::new(mean1, sd1).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let d2 = Normal::new(mean2, sd2).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let group1 = (0..n1).map(|_| d1.sample(&mut rng)).collect();
        let group2 = (0..n2).map(|_| d2.sample(&mut rng)).collect();
        Self::new(group1, group2)
    }

    pub fn group1(&self) -> &[f64] {
        &self.group1
    }

    pub fn group2(&self) -> &[f64] {
        &self.group2
    }
}

#[derive(Debug, Clone, Copy)]
struct GroupStats {
    n: f64,
    mean: f64,
    ss: f64,
}

impl GroupStats {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let ss = xs.iter().map(|x| (x - mean).powi(2)).sum();
        GroupStats { n, mean, ss }
    }
}

/// A finished Metropolis run after burn-in.
#[derive(Debug, Clone)]
pub struct Chain {
    /// One row of `dim` coordinates per retained iteration, row-major.
    pub samples: Vec<f64>,
    pub dim: usize,
    pub acceptance_rate: f64,
    pub step_multiplier: f64,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.samples.iter().skip(j).step_by(self.dim).copied().collect()
    }
}

const ADAPT_BATCH: usize = 100;
const TARGET_ACCEPTANCE: f64 = 0.3;

/// Random-walk Metropolis with Gaussian proposals `N(0, (m * scales_j)^2)`.
///
/// The common multiplier `m` is adapted batch-wise during a burn-in of 10% of
/// `iterations`, which is then discarded. Fails if the post-burn-in
/// acceptance rate lies outside `[0.1, 0.7]`.
pub fn random_walk_metropolis<F>(
    log_target: F,
    init: &[f64],
    scales: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<Chain>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = init.len();
    if dim == 0 || scales.len() != dim {
        return Err(Error::InvalidArgument("initial point and proposal scales must match".into()));
    }
    let burn_in = iterations / 10;
    if iterations <= burn_in + 1 {
        return Err(Error::InvalidArgument(format!("too few iterations ({iterations})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = init.to_vec();
    let mut current_lp = log_target(&current);
    if !current_lp.is_finite() {
        return Err(Error::Sampler("log target is not finite at the initial point".into()));
    }
    let mut log_mult = (2.38 / (dim as f64).sqrt()).ln();
    let mut proposal = vec![0.0; dim];
    let mut batch_accepts = 0usize;
    let mut accepts = 0usize;
    let mut samples = Vec::with_capacity((iterations - burn_in) * dim);

    for it in 0..iterations {
        let mult = log_mult.exp();
        for j in 0..dim {
            let z: f64 = StandardNormal.sample(&mut rng);
            proposal[j] = current[j] + mult * scales[j] * z;
        }
        let lp = log_target(&proposal);
        let u: f64 = rng.random();
        if lp.is_finite() && u.ln() < lp - current_lp {
            current.copy_from_slice(&proposal);
            current_lp = lp;
            if it < burn_in {
                batch_accepts += 1;
            } else {
                accepts += 1;
            }
        }
        if it < burn_in {
            if (it + 1) % ADAPT_BATCH == 0 {
                let rate = batch_accepts as f64 / ADAPT_BATCH as f64;
                log_mult += 2.0 * (rate - TARGET_ACCEPTANCE);
                batch_accepts = 0;
            }
        } else {
            samples.extend_from_slice(&current);
        }
    }
    let acceptance_rate = accepts as f64 / (iterations - burn_in) as f64;
    if !(0.1..=0.7).contains(&acceptance_rate) {
        return Err(Error::Sampler(format!("acceptance rate {acceptance_rate:.3} outside [0.1, 0.7]")));
    }
    Ok(Chain { samples, dim, acceptance_rate, step_multiplier: log_mult.exp() })
}

/// Posterior draws of the two-group normal model after burn-in.
#[derive(Debug, Clone)]
pub struct TTestChain {
    /// Effect size `(mu1 - mu2) / sigma`.
    pub delta: Vec<f64>,
    /// Grand mean.
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub acceptance_rate: f64,
}

/// Samples the two-sample t-test model
/// `group1 ~ N(mu + sigma delta / 2, sigma^2)`, `group2 ~ N(mu - sigma delta / 2, sigma^2)`
/// with `p(mu, sigma^2) ∝ 1 / sigma^2` and `delta ~ Cauchy(0, prior_scale)`.
pub fn ttest_chain(data: &TTestData, prior_scale: f64, iterations: usize, seed: u64) -> Result<TTestChain> {
    if !(prior_scale > 0.0) || !prior_scale.is_finite() {
        return Err(Error::InvalidArgument(format!("prior scale must be positive, got {prior_scale}")));
    }
    let g1 = GroupStats::of(&data.group1);
    let g2 = GroupStats::of(&data.group2);
    let n_total = g1.n + g2.n;
    let pooled = ((g1.ss + g2.ss) / (n_total - 2.0)).sqrt();
    if !(pooled > 0.0) {
        return Err(Error::InvalidArgument("groups have zero within-group variance".into()));
    }
    let n_eff = g1.n * g2.n / n_total;

    // Coordinates: (mu, ln sigma, delta). The 1/sigma^2 prior is flat in ln sigma.
    let log_post = |p: &[f64]| {
        let (mu, log_sigma, delta) = (p[0], p[1], p[2]);
        let sigma = log_sigma.exp();
        let half = 0.5 * sigma * delta;
        let q = g1.ss + g1.n * (g1.mean - mu - half).powi(2) + g2.ss + g2.n * (g2.mean - mu + half).powi(2);
        let z = delta / prior_scale;
        -n_total * log_sigma - q / (2.0 * sigma * sigma) - z.mul_add(z, 1.0).ln()
    };
    let init = [0.5 * (g1.mean + g2.mean), pooled.ln(), (g1.mean - g2.mean) / pooled];
    let scales = [pooled / n_total.sqrt(), 1.0 / (2.0 * n_total).sqrt(), (1.0 / n_eff).sqrt()];
    let chain = random_walk_metropolis(log_post, &init, &scales, iterations, seed)?;
    Ok(TTestChain {
        delta: chain.coordinate(2),
        mu: chain.coordinate(0),
        sigma: chain.coordinate(1).into_iter().map(f64::exp).collect(),
        acceptance_rate: chain.acceptance_rate,
    })
}

/// Effect-size draws from [`ttest_chain`], labelled `delta`.
pub fn ttest_metropolis(data: &TTestData, prior_scale: f64, iterations: usize, seed: u64) -> Result<PosteriorSample> {
    if iterations < 100_000 {
        return Err(Error::InvalidArgument(format!("need at least 100000 iterations, got {iterations}")));
    }
    let chain = ttest_chain(data, prior_scale, iterations, seed)?;
    PosteriorSample::new("delta", chain.delta)
}
