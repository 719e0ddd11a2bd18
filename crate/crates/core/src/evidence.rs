//! The test itself: surprise function, tangential set, e-value, the
//! asymptotic p-value and the standardized e-value.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::density::{interpolate, validate_table, DensityEstimate, KdeOptions, PosteriorSample};
use crate::error::{Error, Result};
use crate::special::{ChiSquareDf, DensityFamily};

/// The denominator `r(theta)` of the surprise function.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ReferenceFunction {
    #[default]
    Flat,
    Parametric(DensityFamily),
    /// Linearly interpolated table, undefined outside its nodes.
    Tabulated {
        grid: Vec<f64>,
        values: Vec<f64>,
    },
}

impl ReferenceFunction {
    pub fn parametric(family: DensityFamily) -> Result<Self> {
        family.validate()?;
        Ok(ReferenceFunction::Parametric(family))
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_table(&grid, &values)?;
        if let Some(i) = values.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Reference(format!(
                "tabulated reference must be strictly positive, value {i} is {}",
                values[i]
            )));
        }
        Ok(ReferenceFunction::Tabulated { grid, values })
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, ReferenceFunction::Flat | ReferenceFunction::Parametric(DensityFamily::Flat))
    }

    /// `None` where a tabulated reference has no coverage.
    pub fn eval(&self, theta: f64) -> Option<f64> {
        match self {
            ReferenceFunction::Flat => Some(1.0),
            ReferenceFunction::Parametric(fam) => Some(fam.density(theta)),
            ReferenceFunction::Tabulated { grid, values } => interpolate(grid, values, theta),
        }
    }

    /// Compact text form, e.g. `cauchy:location=0,scale=0.7071`.
    pub fn descriptor(&self) -> String {
        match self {
            ReferenceFunction::Flat | ReferenceFunction::Parametric(DensityFamily::Flat) => "flat".to_string(),
            ReferenceFunction::Parametric(DensityFamily::Normal { mean, sd }) => {
                format!("normal:mean={mean},sd={sd}")
            }
            ReferenceFunction::Parametric(DensityFamily::Cauchy { location, scale }) => {
                format!("cauchy:location={location},scale={scale}")
            }
            ReferenceFunction::Parametric(DensityFamily::StudentT { location, scale, df }) => {
                format!("student_t:location={location},scale={scale},df={df}")
            }
            ReferenceFunction::Tabulated { grid, .. } => {
                format!("table:{} nodes on [{}, {}]", grid.len(), grid[0], grid[grid.len() - 1])
            }
        }
    }
}

/// `s(theta) = p(theta|x) / r(theta)` tabulated on the posterior grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurpriseFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    s_star: f64,
    null_value: f64,
    null_density: f64,
    mode_surprise: f64,
    relative_null_ratio: f64,
}

impl SurpriseFunction {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Supremum of the surprise over the (point) null set.
    pub fn s_star(&self) -> f64 {
        self.s_star
    }

    pub fn null_value(&self) -> f64 {
        self.null_value
    }

    /// Posterior density estimate at the null value.
    pub fn null_density(&self) -> f64 {
        self.null_density
    }

    pub fn mode_surprise(&self) -> f64 {
        self.mode_surprise
    }

    /// Posterior density at the null over the posterior mode density.
    pub fn relative_null_ratio(&self) -> f64 {
        self.relative_null_ratio
    }

    /// Linear interpolation of the tabulated surprise, zero off the grid.
    pub fn eval(&self, theta: f64) -> f64 {
        interpolate(&self.grid, &self.values, theta).unwrap_or(0.0)
    }
}

pub fn surprise_fit(
    posterior: &DensityEstimate,
    reference: &ReferenceFunction,
    null_value: f64,
) -> Result<SurpriseFunction> {
    if !null_value.is_finite() {
        return Err(Error::domain(format!("null value must be finite, got {null_value}")));
    }
    let r0 = reference
        .eval(null_value)
        .ok_or_else(|| Error::Reference(format!("tabulated reference does not cover the null value {null_value}")))?;
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::Reference(format!("reference vanishes at the null value {null_value}")));
    }
    let mut values = Vec::with_capacity(posterior.grid().len());
    for (&g, &p) in posterior.grid().iter().zip(posterior.values()) {
        let r = reference
            .eval(g)
            .ok_or_else(|| Error::Reference(format!("tabulated reference does not cover the posterior grid at {g}")))?;
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Reference(format!("reference vanishes at {g} on the posterior grid")));
        }
        values.push(p / r);
    }
    let null_density = posterior.eval(null_value);
    let mode_surprise = values.iter().cloned().fold(0.0, f64::max);
    Ok(SurpriseFunction {
        grid: posterior.grid().to_vec(),
        values,
        s_star: null_density / r0,
        null_value,
        null_density,
        mode_surprise,
        relative_null_ratio: (null_density / posterior.mode_density()).clamp(0.0, 1.0),
    })
}

/// The tangential set `{theta : s(theta) > s*}` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentialRegion {
    member_mask: Vec<bool>,
    intervals: Vec<(f64, f64)>,
    // Per segment: where the linear interpolant of s crosses s*, as a
    // fraction of the segment, when the two end nodes disagree.
    cuts: Vec<Option<f64>>,
}

impl TangentialRegion {
    pub fn member_mask(&self) -> &[bool] {
        &self.member_mask
    }

    /// Maximal runs of the set, with ends placed at the interpolated
    /// crossings of `s*` (or at the grid ends).
    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

pub fn tangential_region(s: &SurpriseFunction) -> TangentialRegion {
    let (grid, values, s_star) = (&s.grid, &s.values, s.s_star);
    let member_mask: Vec<bool> = values.iter().map(|&v| v > s_star).collect();
    let cuts: Vec<Option<f64>> = (0..grid.len() - 1)
        .map(|i| {
            (member_mask[i] != member_mask[i + 1]).then(|| {
                let (a, b) = (values[i], values[i + 1]);
                ((s_star - a) / (b - a)).clamp(0.0, 1.0)
            })
        })
        .collect();
    let at = |i: usize| grid[i] + cuts[i].unwrap_or(0.0) * (grid[i + 1] - grid[i]);
    let mut intervals = Vec::new();
    let mut start = member_mask[0].then(|| grid[0]);
    for (i, cut) in cuts.iter().enumerate() {
        if cut.is_some() {
            match start.take() {
                Some(lo) => intervals.push((lo, at(i))),
                None => start = Some(at(i)),
            }
        }
    }
    if let Some(lo) = start {
        intervals.push((lo, grid[grid.len() - 1]));
    }
    TangentialRegion { member_mask, intervals, cuts }
}

/// Posterior mass of the tangential set, normalized by the total grid mass.
///
/// The density is integrated as its piecewise-linear interpolant; segments
/// that straddle the cutoff contribute only the part on the member side.
///
/// Panics if the region was built on a different grid.
pub fn evalue_grid(posterior: &DensityEstimate, region: &TangentialRegion) -> f64 {
    let (grid, values) = (posterior.grid(), posterior.values());
    assert_eq!(grid.len(), region.member_mask.len(), "region and posterior grids differ");
    let mut inside = 0.0;
    let mut total = 0.0;
    for i in 0..grid.len() - 1 {
        let dx = grid[i + 1] - grid[i];
        let (a, b) = (values[i], values[i + 1]);
        let whole = 0.5 * dx * (a + b);
        total += whole;
        inside += match region.cuts[i] {
            None if region.member_mask[i] => whole,
            None => 0.0,
            Some(t) => {
                let c = a + t * (b - a);
                if region.member_mask[i] {
                    0.5 * t * dx * (a + c)
                } else {
                    0.5 * (1.0 - t) * dx * (c + b)
                }
            }
        };
    }
    if total > 0.0 {
        (inside / total).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Fraction of draws whose interpolated surprise strictly exceeds `s*`.
pub fn evalue_mc(draws: &[f64], s: &SurpriseFunction) -> f64 {
    if draws.is_empty() {
        return 0.0;
    }
    let hits = draws.iter().filter(|&&x| s.eval(x) > s.s_star).count();
    hits as f64 / draws.len() as f64
}

/// Dimension `k` of the parameter space and `h` of the null set, `h < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    theta: u32,
    null: u32,
}

impl Dimensions {
    pub fn new(theta: u32, null: u32) -> Result<Self> {
        if theta == 0 {
            return Err(Error::Dimension("parameter space dimension must be positive".into()));
        }
        if null >= theta {
            return Err(Error::Dimension(format!(
                "null set dimension ({null}) must be smaller than the parameter space dimension ({theta})"
            )));
        }
        Ok(Dimensions { theta, null })
    }

    pub fn theta(self) -> u32 {
        self.theta
    }

    pub fn null(self) -> u32 {
        self.null
    }

    fn full_df(self) -> ChiSquareDf {
        ChiSquareDf::new(self.theta as f64).expect("theta > 0")
    }

    fn gap_df(self) -> ChiSquareDf {
        ChiSquareDf::new((self.theta - self.null) as f64).expect("null < theta")
    }
}

/// `pv0 = 1 - F_{k-h}(-2 ln ratio)`, the ratio standing in for the relative
/// likelihood at the null.
pub fn pvalue_evalue(relative_null_ratio: f64, dims: Dimensions) -> Result<f64> {
    if !(relative_null_ratio > 0.0) || relative_null_ratio > 1.0 + 1e-12 {
        return Err(Error::domain(format!("relative null ratio must lie in (0, 1], got {relative_null_ratio}")));
    }
    let stat = -2.0 * relative_null_ratio.min(1.0).ln();
    Ok(1.0 - dims.gap_df().cdf(stat.max(0.0))?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardizedEvalue {
    /// `F_{k-h}(F_k^{-1}(ev_against))`.
    pub sev_against: f64,
    pub sev: f64,
}

pub fn standardized_evalue(ev_against: f64, dims: Dimensions) -> Result<StandardizedEvalue> {
    if !(0.0..=1.0).contains(&ev_against) {
        return Err(Error::domain(format!("e-value must lie in [0, 1], got {ev_against}")));
    }
    let sev_against = if ev_against == 0.0 {
        0.0
    } else if ev_against == 1.0 {
        1.0
    } else {
        let q = dims.full_df().quantile(ev_against)?;
        dims.gap_df().cdf(q)?
    };
    Ok(StandardizedEvalue { sev_against, sev: 1.0 - sev_against })
}

/// `F_k(||m0 - big_m0||^2)` for the constrained maximizer `m0` and the
/// global posterior mode `big_m0`.
pub fn bayesian_significance(m0: &[f64], big_m0: &[f64], k: u32) -> Result<f64> {
    if m0.len() != big_m0.len() {
        return Err(Error::Dimension(format!("points have different dimensions ({} and {})", m0.len(), big_m0.len())));
    }
    let df = ChiSquareDf::new(k as f64)?;
    let dist2: f64 = m0.iter().zip(big_m0).map(|(a, b)| (a - b).powi(2)).sum();
    df.cdf(dist2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Quadrature of the density estimate over the tangential grid nodes.
    #[default]
    Grid,
    /// Share of posterior draws inside the tangential set.
    MonteCarlo,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Grid => "grid",
            Estimator::MonteCarlo => "monte_carlo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FbstOptions {
    pub estimator: Estimator,
    pub kde: KdeOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbstResult {
    pub e_value_against: f64,
    pub e_value_in_favor: f64,
    pub p_value: f64,
    pub sev_against: f64,
    pub sev: f64,
    pub dim_theta: u32,
    pub dim_null: u32,
    pub null_value: f64,
    pub reference_descriptor: String,
    pub estimator: Estimator,
    pub s_star: f64,
    pub null_density: f64,
    pub posterior_mode: f64,
    pub posterior_mode_density: f64,
}

/// Everything produced along the way, for plotting and inspection.
#[derive(Debug, Clone)]
pub struct FbstAnalysis {
    pub result: FbstResult,
    pub density: DensityEstimate,
    pub surprise: SurpriseFunction,
    pub region: TangentialRegion,
}

impl FbstAnalysis {
    pub fn run(
        sample: &PosteriorSample,
        null_value: f64,
        reference: &ReferenceFunction,
        dims: Dimensions,
        opts: &FbstOptions,
    ) -> Result<Self> {
        let density = DensityEstimate::fit(sample, &opts.kde)?;
        let surprise = surprise_fit(&density, reference, null_value)?;
        let region = tangential_region(&surprise);
        let e_value_against = match opts.estimator {
            Estimator::Grid => evalue_grid(&density, &region),
            Estimator::MonteCarlo => evalue_mc(sample.draws(), &surprise),
        };
        // A null with zero estimated density sits at the tail limit of pv0.
        let p_value =
            if surprise.relative_null_ratio > 0.0 { pvalue_evalue(surprise.relative_null_ratio, dims)? } else { 0.0 };
        let standardized = standardized_evalue(e_value_against, dims)?;
        let result = FbstResult {
            e_value_against,
            e_value_in_favor: 1.0 - e_value_against,
            p_value,
            sev_against: standardized.sev_against,
            sev: standardized.sev,
            dim_theta: dims.theta(),
            dim_null: dims.null(),
            null_value,
            reference_descriptor: reference.descriptor(),
            estimator: opts.estimator,
            s_star: surprise.s_star,
            null_density: surprise.null_density,
            posterior_mode: density.mode_location(),
            posterior_mode_density: density.mode_density(),
        };
        Ok(FbstAnalysis { result, density, surprise, region })
    }
}

/// Runs the full test: density estimate, surprise function, tangential set,
/// e-value and the asymptotic summaries.
pub fn fbst(
    sample: &PosteriorSample,
    null_value: f64,
    reference: &ReferenceFunction,
    dims: Dimensions,
    opts: &FbstOptions,
) -> Result<FbstResult> {
    FbstAnalysis::run(sample, null_value, reference, dims, opts).map(|a| a.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::AnalyticPosterior;
    use crate::special::normal_cdf;

    fn dims(k: u32, h: u32) -> Dimensions {
        Dimensions::new(k, h).unwrap()
    }

    fn normal_sample(mu: f64, sigma: f64, n: usize, seed: u64) -> PosteriorSample {
        let post = AnalyticPosterior::normal(mu, sigma).unwrap();
        PosteriorSample::new("theta", post.sample(n, seed)).unwrap()
    }

    fn tabulated_normal(mu: f64, sigma: f64) -> DensityEstimate {
        let n = 4001;
        let (lo, hi) = (mu - 9.0 * sigma, mu + 9.0 * sigma);
        let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let fam = DensityFamily::normal(mu, sigma).unwrap();
        let values = grid.iter().map(|&g| fam.density(g)).collect();
        DensityEstimate::from_tabulated(grid, values).unwrap()
    }

    #[test]
    fn flat_reference_recovers_posterior() {
        let est = tabulated_normal(0.5, 1.2);
        let s = surprise_fit(&est, &ReferenceFunction::Flat, 0.0).unwrap();
        assert_eq!(s.values(), est.values());
        assert_eq!(s.s_star(), est.eval(0.0));
    }

    #[test]
    fn self_ratio_surprise_is_one() {
        let est = tabulated_normal(0.0, 1.0);
        let r = ReferenceFunction::tabulated(est.grid().to_vec(), est.values().to_vec()).unwrap();
        let s = surprise_fit(&est, &r, 0.3).unwrap();
        assert!(s.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert!((s.s_star() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn surprise_errors() {
        let est = tabulated_normal(0.0, 1.0);
        let short = ReferenceFunction::tabulated(vec![-1.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(surprise_fit(&est, &short, 0.0), Err(Error::Reference(_))));
        assert!(matches!(surprise_fit(&est, &short, 5.0), Err(Error::Reference(_))));
        assert!(surprise_fit(&est, &ReferenceFunction::Flat, f64::NAN).is_err());
        assert!(ReferenceFunction::tabulated(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        // A normal reference that underflows to zero at the grid edge.
        let tiny = ReferenceFunction::parametric(DensityFamily::normal(0.0, 0.05).unwrap()).unwrap();
        assert!(matches!(surprise_fit(&est, &tiny, 0.0), Err(Error::Reference(_))));
    }

    #[test]
    fn region_null_at_mode_is_empty() {
        let est = tabulated_normal(0.0, 1.0);
        let s = surprise_fit(&est, &ReferenceFunction::Flat, est.mode_location()).unwrap();
        let region = tangential_region(&s);
        assert!(region.is_empty());
        assert_eq!(evalue_grid(&est, &region), 0.0);
    }

    #[test]
    fn region_far_null_is_full() {
        let est = tabulated_normal(0.0, 1.0);
        let s = surprise_fit(&est, &ReferenceFunction::Flat, 100.0).unwrap();
        let region = tangential_region(&s);
        assert!(region.member_mask().iter().all(|m| *m));
        assert_eq!(evalue_grid(&est, &region), 1.0);
    }

    #[test]
    fn region_unimodal_single_interval() {
        let est = tabulated_normal(1.0, 1.0);
        let s = surprise_fit(&est, &ReferenceFunction::Flat, 0.0).unwrap();
        let region = tangential_region(&s);
        assert_eq!(region.intervals().len(), 1);
        let (lo, hi) = region.intervals()[0];
        assert!(lo < est.mode_location() && est.mode_location() < hi);
        assert!((lo - 0.0).abs() < 0.01 && (hi - 2.0).abs() < 0.01);
        let expected = 2.0 * normal_cdf(1.0) - 1.0;
        assert!((evalue_grid(&est, &region) - expected).abs() < 1e-4);
    }

    #[test]
    fn mask_and_intervals_agree() {
        // Bimodal table: two separated bumps give two intervals.
        let grid: Vec<f64> = (0..2001).map(|i| -6.0 + 12.0 * i as f64 / 2000.0).collect();
        let values: Vec<f64> = grid
            .iter()
            .map(|&x| (-(x + 2.0f64).powi(2) / 0.5).exp() + 0.8 * (-(x - 2.0f64).powi(2) / 0.5).exp())
            .collect();
        let est = DensityEstimate::from_tabulated(grid.clone(), values).unwrap();
        let s = surprise_fit(&est, &ReferenceFunction::Flat, 2.4).unwrap();
        let region = tangential_region(&s);
        assert_eq!(region.intervals().len(), 2);
        for (g, m) in grid.iter().zip(region.member_mask()) {
            let inside = region.intervals().iter().any(|(lo, hi)| lo <= g && g <= hi);
            assert_eq!(inside, *m);
        }
    }

    #[test]
    fn monte_carlo_edge_cases() {
        let sample = normal_sample(0.0, 1.0, 5_000, 1);
        let est = DensityEstimate::fit(&sample, &KdeOptions::default()).unwrap();
        let far = surprise_fit(&est, &ReferenceFunction::Flat, 50.0).unwrap();
        assert_eq!(evalue_mc(sample.draws(), &far), 1.0);
        let mode = surprise_fit(&est, &ReferenceFunction::Flat, est.mode_location()).unwrap();
        assert_eq!(evalue_mc(sample.draws(), &mode), 0.0);
    }

    #[test]
    fn pvalue_fixtures() {
        assert_eq!(pvalue_evalue(1.0, dims(3, 2)).unwrap(), 1.0);
        assert!(pvalue_evalue(1e-300, dims(3, 2)).unwrap() < 1e-100);
        assert!(pvalue_evalue(0.0, dims(3, 2)).is_err());
        assert!(pvalue_evalue(1.01, dims(3, 2)).is_err());
        assert!(pvalue_evalue(1.0 + 1e-13, dims(3, 2)).is_ok());
        // The k - h = 1 tail giving the printed 0.1461029: -2 ln r equals the
        // squared normal quantile, r = exp(-z^2/2) with z = Phi^-1(1 - 0.1461029/2).
        let z = 1.453_435_4_f64;
        assert!((2.0 * (1.0 - normal_cdf(z)) - 0.146_102_9).abs() < 1e-7);
        let ratio = (-0.5 * z * z).exp();
        assert!((ratio - 0.348).abs() < 1e-3);
        let pv = pvalue_evalue(ratio, dims(3, 2)).unwrap();
        assert!((pv - 0.146_102_9).abs() < 1e-4, "pv = {pv}");
    }

    #[test]
    fn standardized_published_values() {
        let cases = [
            (0.830_599_8, 3, 2, 0.024_869_5, 1e-6),
            (0.985_982_7, 3, 2, 0.001_123_303, 1e-8),
            (0.903_206_3, 3, 2, 0.011_899_72, 1e-7),
        ];
        for (ev, k, h, expected, tol) in cases {
            let sev = standardized_evalue(ev, dims(k, h)).unwrap().sev;
            assert!((sev - expected).abs() < tol, "({ev},{k},{h}) -> {sev}");
        }
        let sev = standardized_evalue(0.975_888_5, dims(8, 7)).unwrap().sev;
        assert!((sev / 0.000_026_721_51 - 1.0).abs() < 1e-3, "{sev}");
    }

    #[test]
    fn standardized_limits_and_errors() {
        let zero = standardized_evalue(0.0, dims(3, 2)).unwrap();
        assert_eq!((zero.sev_against, zero.sev), (0.0, 1.0));
        let one = standardized_evalue(1.0, dims(3, 2)).unwrap();
        assert_eq!((one.sev_against, one.sev), (1.0, 0.0));
        assert!(standardized_evalue(1.2, dims(3, 2)).is_err());
        assert!(Dimensions::new(2, 2).is_err());
        assert!(Dimensions::new(0, 0).is_err());
        // h = 0 maps the e-value onto itself.
        let same = standardized_evalue(0.37, dims(4, 0)).unwrap();
        assert!((same.sev_against - 0.37).abs() < 1e-12);
    }

    #[test]
    fn standardized_monotone_in_evalue() {
        for (k, h) in [(3, 2), (8, 7), (2, 0), (5, 1)] {
            let mut prev = f64::INFINITY;
            for i in 1..=999 {
                let sev = standardized_evalue(i as f64 / 1000.0, dims(k, h)).unwrap().sev;
                assert!(sev <= prev + 1e-15, "k={k} h={h} i={i}");
                prev = sev;
            }
        }
    }

    #[test]
    fn significance_fixtures() {
        assert_eq!(bayesian_significance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 3).unwrap(), 0.0);
        let d = (2.0 * std::f64::consts::LN_2).sqrt();
        assert!((bayesian_significance(&[d, 0.0], &[0.0, 0.0], 2).unwrap() - 0.5).abs() < 1e-14);
        let d3 = 5.0341f64.sqrt();
        assert!((bayesian_significance(&[0.0, d3, 0.0], &[0.0; 3], 3).unwrap() - 0.8306).abs() < 1e-4);
        assert!(matches!(bayesian_significance(&[0.0], &[0.0, 1.0], 2), Err(Error::Dimension(_))));
    }

    #[test]
    fn fbst_normal_posterior() {
        let sample = normal_sample(1.0, 1.0, 1_000_000, 17);
        let res = fbst(&sample, 0.0, &ReferenceFunction::Flat, dims(3, 2), &FbstOptions::default()).unwrap();
        assert!((res.e_value_against - 0.6827).abs() < 0.01, "{}", res.e_value_against);
        let check = standardized_evalue(res.e_value_against, dims(3, 2)).unwrap();
        assert!((res.sev - check.sev).abs() < 1e-10);
        assert_eq!(res.e_value_against + res.e_value_in_favor, 1.0);
        assert_eq!(res.estimator, Estimator::Grid);
        assert_eq!(res.reference_descriptor, "flat");
    }

    #[test]
    fn fbst_null_at_sample_mode() {
        let sample = normal_sample(0.0, 1.0, 50_000, 9);
        let est = DensityEstimate::fit(&sample, &KdeOptions::default()).unwrap();
        let res =
            fbst(&sample, est.mode_location(), &ReferenceFunction::Flat, dims(3, 2), &FbstOptions::default()).unwrap();
        assert!(res.e_value_against < 1e-3);
        assert!(res.sev > 0.999);
        assert_eq!(res.p_value, 1.0);
    }

    #[test]
    fn fbst_far_null() {
        let sample = normal_sample(0.0, 1.0, 10_000, 3);
        let res = fbst(&sample, 40.0, &ReferenceFunction::Flat, dims(3, 2), &FbstOptions::default()).unwrap();
        assert!(res.e_value_against >= 1.0 - 1e-6);
        assert_eq!(res.p_value, 0.0);
        assert_eq!(res.null_density, 0.0);
    }

    #[test]
    fn fbst_pvalue_is_reference_invariant() {
        let sample = normal_sample(-0.4, 0.3, 20_000, 5);
        let cauchy = ReferenceFunction::parametric(DensityFamily::cauchy(0.0, 0.5f64.sqrt()).unwrap()).unwrap();
        let opts = FbstOptions::default();
        let flat = fbst(&sample, 0.0, &ReferenceFunction::Flat, dims(3, 2), &opts).unwrap();
        let user = fbst(&sample, 0.0, &cauchy, dims(3, 2), &opts).unwrap();
        assert_eq!(flat.p_value.to_bits(), user.p_value.to_bits());
        assert_ne!(flat.e_value_against, user.e_value_against);
        assert_eq!(user.reference_descriptor, format!("cauchy:location=0,scale={}", 0.5f64.sqrt()));
    }

    #[test]
    fn evidence_grows_with_displacement() {
        let mut prev = -1.0;
        for i in 0..=12 {
            let mu = 0.25 * i as f64;
            let est = tabulated_normal(mu, 1.0);
            let s = surprise_fit(&est, &ReferenceFunction::Flat, 0.0).unwrap();
            let ev = evalue_grid(&est, &tangential_region(&s));
            let oracle = 2.0 * normal_cdf(mu) - 1.0;
            assert!((ev - oracle).abs() < 1e-3, "mu={mu}: {ev} vs {oracle}");
            assert!(ev >= prev);
            prev = ev;
        }
    }

    #[test]
    fn flat_reference_matches_superlevel_set_integration() {
        let sample = normal_sample(0.7, 1.5, 30_000, 12);
        let est = DensityEstimate::fit(&sample, &KdeOptions::default()).unwrap();
        let s = surprise_fit(&est, &ReferenceFunction::Flat, -1.0).unwrap();
        let ev = evalue_grid(&est, &tangential_region(&s));
        // Straightforward rectangle rule over the same grid.
        let level = est.eval(-1.0);
        let g = est.grid();
        let dx = g[1] - g[0];
        let v = est.values();
        let inside: f64 = v.iter().filter(|&&p| p > level).sum::<f64>() * dx;
        let total: f64 = v.iter().sum::<f64>() * dx;
        assert!((ev - inside / total).abs() < 2e-3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn complementarity_and_ranges(seed in 0u64..1000, mu in -3.0f64..3.0, null in -4.0f64..4.0, mc in any::<bool>()) {
                let sample = normal_sample(mu, 1.0, 2_000, seed);
                let opts = FbstOptions {
                    estimator: if mc { Estimator::MonteCarlo } else { Estimator::Grid },
                    ..Default::default()
                };
                let res = fbst(&sample, null, &ReferenceFunction::Flat, dims(3, 2), &opts).unwrap();
                prop_assert_eq!(res.e_value_against + res.e_value_in_favor, 1.0);
                for p in [res.e_value_against, res.e_value_in_favor, res.p_value, res.sev, res.sev_against] {
                    prop_assert!((0.0..=1.0).contains(&p));
                }
            }

            #[test]
            fn complement_is_exact(ev in 0.0f64..=1.0) {
                prop_assert_eq!((1.0 - ev) + ev, 1.0);
            }
        }
    }
}
