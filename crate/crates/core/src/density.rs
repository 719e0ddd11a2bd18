//! Gaussian kernel density estimation of a scalar posterior from its draws.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Kernels are summed out to this many bandwidths; beyond it the Gaussian
/// weight is below 3e-18 of its peak.
const KERNEL_CUTOFF: f64 = 9.0;

/// Grid padding beyond the extreme draws, in bandwidths.
const GRID_PADDING: f64 = 3.0;

pub const DEFAULT_GRID_SIZE: usize = 1024;
pub const MIN_GRID_SIZE: usize = 128;

/// Posterior draws of one scalar parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSample {
    label: String,
    draws: Vec<f64>,
}

impl PosteriorSample {
    /// Fewer draws than this are rejected outright.
    pub const MIN_DRAWS: usize = 30;

    pub fn new(label: impl Into<String>, draws: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(Error::InvalidSample("label must not be empty".into()));
        }
        if draws.len() < Self::MIN_DRAWS {
            return Err(Error::InvalidSample(format!("need at least {} draws, got {}", Self::MIN_DRAWS, draws.len())));
        }
        if let Some(i) = draws.iter().position(|d| !d.is_finite()) {
            return Err(Error::InvalidSample(format!("draw {i} is not finite ({})", draws[i])));
        }
        Ok(PosteriorSample { label, draws })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }
}

fn mean_sd(draws: &[f64]) -> (f64, f64) {
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let ss = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Sample quantile with plotting position `(n + 1) p`, clamped to the
/// extreme order statistics. `sorted` must be ascending.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let pos = (n as f64 + 1.0) * p;
    if pos <= 1.0 {
        return sorted[0];
    }
    if pos >= n as f64 {
        return sorted[n - 1];
    }
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1])
}

/// Silverman's rule of thumb, `0.9 min(sd, IQR/1.34) n^(-1/5)`.
///
/// Falls back to the standard deviation alone when the interquartile range
/// is zero.
pub fn silverman_bandwidth(draws: &[f64]) -> Result<f64> {
    if draws.len() < 2 {
        return Err(Error::InvalidSample(format!("bandwidth selection needs at least 2 draws, got {}", draws.len())));
    }
    let (_, sd) = mean_sd(draws);
    if !(sd > 0.0) {
        return Err(Error::DegenerateSample("all draws are identical".into()));
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (draws.len() as f64).powf(-0.2))
}

/// Direct Gaussian kernel sum `(1/(n h)) sum_j phi((theta - x_j)/h)`.
pub fn gaussian_kde_at(draws: &[f64], bandwidth: f64, theta: f64) -> f64 {
    let norm = 1.0 / (draws.len() as f64 * bandwidth * (2.0 * PI).sqrt());
    draws
        .iter()
        .map(|x| {
            let u = (theta - x) / bandwidth;
            (-0.5 * u * u).exp()
        })
        .sum::<f64>()
        * norm
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeOptions {
    /// Overrides Silverman's rule when set.
    pub bandwidth: Option<f64>,
    pub grid_size: usize,
}

impl Default for KdeOptions {
    fn default() -> Self {
        KdeOptions { bandwidth: None, grid_size: DEFAULT_GRID_SIZE }
    }
}

/// A density tabulated on a strictly increasing grid.
///
/// Off-grid evaluation interpolates linearly and is zero outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    grid: Vec<f64>,
    values: Vec<f64>,
    bandwidth: Option<f64>,
    mode_index: usize,
}

impl DensityEstimate {
    pub fn fit(sample: &PosteriorSample, opts: &KdeOptions) -> Result<Self> {
        Self::from_draws(sample.draws(), opts)
    }

    /// Fits the estimate from raw draws. Unlike [`PosteriorSample`] this
    /// accepts any number of draws (at least two unless a bandwidth is given).
    pub fn from_draws(draws: &[f64], opts: &KdeOptions) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::InvalidSample("no draws".into()));
        }
        if let Some(i) = draws.iter().position(|d| !d.is_finite()) {
            return Err(Error::InvalidSample(format!("draw {i} is not finite ({})", draws[i])));
        }
        if opts.grid_size < MIN_GRID_SIZE {
            return Err(Error::InvalidArgument(format!(
                "grid size must be at least {MIN_GRID_SIZE}, got {}",
                opts.grid_size
            )));
        }
        let h = match opts.bandwidth {
            Some(h) if h > 0.0 && h.is_finite() => h,
            Some(h) => return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {h}"))),
            None => silverman_bandwidth(draws)?,
        };

        let (min, max) = draws.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let lo = min - GRID_PADDING * h;
        let hi = max + GRID_PADDING * h;
        let n_grid = opts.grid_size;
        let step = (hi - lo) / (n_grid - 1) as f64;
        let grid: Vec<f64> = (0..n_grid).map(|i| lo + i as f64 * step).collect();

        // Scatter each draw onto the nodes within the kernel cutoff.
        let mut values = vec![0.0; n_grid];
        let reach = KERNEL_CUTOFF * h;
        for &x in draws {
            let first = (((x - reach - lo) / step).ceil().max(0.0)) as usize;
            let last = (((x + reach - lo) / step).floor() as isize).min(n_grid as isize - 1);
            if last < first as isize {
                continue;
            }
            for (v, g) in values[first..=last as usize].iter_mut().zip(&grid[first..]) {
                let u = (g - x) / h;
                *v += (-0.5 * u * u).exp();
            }
        }
        let norm = 1.0 / (draws.len() as f64 * h * (2.0 * PI).sqrt());
        values.iter_mut().for_each(|v| *v *= norm);

        let mode_index = argmax(&values);
        Ok(DensityEstimate { grid, values, bandwidth: Some(h), mode_index })
    }

    /// Wraps an already tabulated density, e.g. an analytic posterior.
    pub fn from_tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_table(&grid, &values)?;
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("density value {i} is negative or not finite")));
        }
        let mode_index = argmax(&values);
        if !(values[mode_index] > 0.0) {
            return Err(Error::InvalidArgument("density is zero everywhere".into()));
        }
        Ok(DensityEstimate { grid, values, bandwidth: None, mode_index })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Kernel bandwidth; `None` for tabulated densities.
    pub fn bandwidth(&self) -> Option<f64> {
        self.bandwidth
    }

    pub fn mode_location(&self) -> f64 {
        self.grid[self.mode_index]
    }

    pub fn mode_density(&self) -> f64 {
        self.values[self.mode_index]
    }

    pub fn eval(&self, theta: f64) -> f64 {
        interpolate(&self.grid, &self.values, theta).unwrap_or(0.0)
    }

    /// Trapezoid integral of the tabulated values.
    pub fn total_mass(&self) -> f64 {
        self.grid.windows(2).zip(self.values.windows(2)).map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1])).sum()
    }
}

fn argmax(values: &[f64]) -> usize {
    values.iter().enumerate().fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) }).0
}

pub(crate) fn validate_table(grid: &[f64], values: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidArgument("a table needs at least two nodes".into()));
    }
    if grid.len() != values.len() {
        return Err(Error::InvalidArgument(format!("table has {} nodes but {} values", grid.len(), values.len())));
    }
    if grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidArgument("table nodes must be finite".into()));
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(format!(
            "table nodes must be strictly increasing (nodes {i} and {})",
            i + 1
        )));
    }
    Ok(())
}

/// Linear interpolation on a strictly increasing grid; `None` outside it.
/// Nodes return their tabulated value exactly.
pub(crate) fn interpolate(grid: &[f64], values: &[f64], x: f64) -> Option<f64> {
    let last = grid.len() - 1;
    if !(x >= grid[0] && x <= grid[last]) {
        return None;
    }
    let idx = grid.partition_point(|g| *g <= x);
    if idx == 0 {
        return Some(values[0]);
    }
    let i = idx - 1;
    if grid[i] == x || i == last {
        return Some(values[i]);
    }
    let t = (x - grid[i]) / (grid[i + 1] - grid[i]);
    Some((1.0 - t) * values[i] + t * values[i + 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_draws(n: usize, mu: f64, sigma: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mu + sigma * z
            })
            .collect()
    }

    #[test]
    fn silverman_two_points() {
        let h = silverman_bandwidth(&[0.0, 1.0]).unwrap();
        let sd = 0.5f64.sqrt();
        let expected = 0.9 * sd.min(1.0 / 1.34) * 2f64.powf(-0.2);
        assert!((h - expected).abs() < 1e-15);
    }

    #[test]
    fn silverman_standard_normal() {
        let draws = normal_draws(10_000, 0.0, 1.0, 11);
        let h = silverman_bandwidth(&draws).unwrap();
        let target = 0.9 * 10_000f64.powf(-0.2);
        assert!((h / target - 1.0).abs() < 0.10, "h = {h}");
    }

    #[test]
    fn silverman_rejects_constant_draws() {
        assert!(matches!(silverman_bandwidth(&[2.5; 50]), Err(Error::DegenerateSample(_))));
        assert!(silverman_bandwidth(&[1.0]).is_err());
    }

    #[test]
    fn silverman_falls_back_to_sd_for_zero_iqr() {
        let mut draws = vec![0.0; 40];
        draws[0] = -3.0;
        draws[39] = 3.0;
        let (_, sd) = mean_sd(&draws);
        let h = silverman_bandwidth(&draws).unwrap();
        assert!((h - 0.9 * sd * 40f64.powf(-0.2)).abs() < 1e-15);
    }

    #[test]
    fn two_kernel_average() {
        let opts = KdeOptions { bandwidth: Some(1.0), ..Default::default() };
        let est = DensityEstimate::from_draws(&[-1.0, 1.0], &opts).unwrap();
        let phi1 = (-0.5f64).exp() / (2.0 * PI).sqrt();
        assert!((gaussian_kde_at(&[-1.0, 1.0], 1.0, 0.0) - phi1).abs() < 1e-16);
        assert!((est.eval(0.0) - phi1).abs() < 1e-5);
        assert!((phi1 - 0.2420).abs() < 1e-4);
        assert_eq!(est.grid()[0], -4.0);
        assert!((est.grid()[1023] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn grid_matches_direct_kernel_sum() {
        let draws = normal_draws(500, 2.0, 0.7, 5);
        let est = DensityEstimate::from_draws(&draws, &KdeOptions::default()).unwrap();
        let h = est.bandwidth().unwrap();
        for (g, v) in est.grid().iter().zip(est.values()).step_by(37) {
            assert!((gaussian_kde_at(&draws, h, *g) - v).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_draws_give_symmetric_estimate() {
        let half = normal_draws(400, 0.0, 1.3, 9);
        let draws: Vec<f64> = half.iter().map(|a| -a).chain(half.iter().copied()).collect();
        let est = DensityEstimate::from_draws(&draws, &KdeOptions::default()).unwrap();
        let v = est.values();
        let n = v.len();
        for i in 0..n {
            assert!((v[i] - v[n - 1 - i]).abs() < 1e-12);
            assert!((est.grid()[i] + est.grid()[n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn large_sample_recovers_normal_peak() {
        let draws = normal_draws(1_000_000, 1.0, 1.0, 21);
        let est = DensityEstimate::from_draws(&draws, &KdeOptions::default()).unwrap();
        let peak = 1.0 / (2.0 * PI).sqrt();
        assert!((est.eval(1.0) / peak - 1.0).abs() < 0.02);
    }

    #[test]
    fn consistency_on_central_region() {
        let (mu, sigma) = (-3.0, 2.0);
        let draws = normal_draws(100_000, mu, sigma, 3);
        let est = DensityEstimate::from_draws(&draws, &KdeOptions::default()).unwrap();
        let peak = 1.0 / (sigma * (2.0 * PI).sqrt());
        let mut sup = 0.0f64;
        for (g, v) in est.grid().iter().zip(est.values()) {
            if (g - mu).abs() <= 2.0 * sigma {
                let z = (g - mu) / sigma;
                sup = sup.max((v - peak * (-0.5 * z * z).exp()).abs());
            }
        }
        assert!(sup < 0.02 * peak, "sup error {sup} vs limit {}", 0.02 * peak);
    }

    #[test]
    fn eval_nodes_midpoints_and_outside() {
        let draws = normal_draws(200, 0.0, 1.0, 1);
        let est = DensityEstimate::from_draws(&draws, &KdeOptions::default()).unwrap();
        let (g, v) = (est.grid(), est.values());
        for i in [0, 10, 511, 1023] {
            assert_eq!(est.eval(g[i]), v[i]);
        }
        let mid = 0.5 * (g[100] + g[101]);
        assert!((est.eval(mid) - 0.5 * (v[100] + v[101])).abs() < 1e-15);
        assert_eq!(est.eval(g[1023] + 1e-9), 0.0);
        assert_eq!(est.eval(g[0] - 5.0), 0.0);
        assert_eq!(est.eval(f64::NAN), 0.0);
    }

    #[test]
    fn mode_fields_follow_grid_maximum() {
        let draws = normal_draws(5_000, 4.0, 0.5, 2);
        let est = DensityEstimate::from_draws(&draws, &KdeOptions::default()).unwrap();
        let max = est.values().iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(est.mode_density(), max);
        assert_eq!(est.eval(est.mode_location()), max);
        assert!((est.mode_location() - 4.0).abs() < 0.1);
    }

    #[test]
    fn fit_rejects_bad_options() {
        let draws = normal_draws(100, 0.0, 1.0, 4);
        let small = KdeOptions { grid_size: 64, ..Default::default() };
        assert!(matches!(DensityEstimate::from_draws(&draws, &small), Err(Error::InvalidArgument(_))));
        let neg = KdeOptions { bandwidth: Some(-0.1), ..Default::default() };
        assert!(DensityEstimate::from_draws(&draws, &neg).is_err());
        assert!(DensityEstimate::from_draws(&[1.0; 40], &KdeOptions::default()).is_err());
    }

    #[test]
    fn posterior_sample_validation() {
        assert!(PosteriorSample::new("x", vec![0.0; 29]).is_err());
        assert!(PosteriorSample::new("", vec![0.0; 30]).is_err());
        let mut d = vec![0.0; 40];
        d[7] = f64::NAN;
        assert!(PosteriorSample::new("x", d).is_err());
        let ok = PosteriorSample::new("delta", (0..30).map(f64::from).collect()).unwrap();
        assert_eq!(ok.len(), 30);
        assert_eq!(ok.label(), "delta");
    }

    #[test]
    fn tabulated_density_validation() {
        assert!(DensityEstimate::from_tabulated(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(DensityEstimate::from_tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(DensityEstimate::from_tabulated(vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(DensityEstimate::from_tabulated(vec![0.0, 1.0], vec![-1.0, 2.0]).is_err());
        let est = DensityEstimate::from_tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(est.total_mass(), 1.0);
        assert_eq!(est.bandwidth(), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn normalized_nonnegative(seed in 0u64..10_000, n in 30usize..400, sigma in 0.01f64..50.0) {
                let draws = normal_draws(n, 0.0, sigma, seed);
                let est = DensityEstimate::from_draws(&draws, &KdeOptions::default()).unwrap();
                prop_assert!(est.values().iter().all(|v| *v >= 0.0));
                let mass = est.total_mass();
                prop_assert!((0.99..=1.001).contains(&mass), "mass {}", mass);
            }

            #[test]
            fn location_shift_equivariance(seed in 0u64..10_000, shift in -100.0f64..100.0) {
                let draws = normal_draws(300, 1.0, 2.0, seed);
                let shifted: Vec<f64> = draws.iter().map(|x| x + shift).collect();
                let a = DensityEstimate::from_draws(&draws, &KdeOptions::default()).unwrap();
                let b = DensityEstimate::from_draws(&shifted, &KdeOptions::default()).unwrap();
                for i in 0..a.grid().len() {
                    prop_assert!((a.grid()[i] + shift - b.grid()[i]).abs() < 1e-9);
                    prop_assert!((a.values()[i] - b.values()[i]).abs() < 1e-12);
                }
            }
        }
    }
}
