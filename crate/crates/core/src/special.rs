//! Special functions for the asymptotic machinery: error function, log-gamma,
//! the regularized lower incomplete gamma function, the chi-square
//! distribution, and the parametric reference densities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        let series =
            LANCZOS_COEF.iter().enumerate().skip(1).fold(LANCZOS_COEF[0], |acc, (i, c)| acc + c / (x + i as f64));
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
    }
}

/// Error function.
///
/// Uses the everywhere-positive series
/// `erf(x) = 2/sqrt(pi) * exp(-x^2) * sum 2^n x^(2n+1) / (2n+1)!!`
/// for moderate arguments and the continued fraction of `erfc` in the tails.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 2.5 {
        erf_series(x)
    } else {
        1.0 - erfc_continued_fraction(x)
    }
}

/// Complementary error function `1 - erf(x)`, accurate in the upper tail.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        2.0 - erfc(-x)
    } else if x < 2.5 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

fn erf_series(x: f64) -> f64 {
    let two_x2 = 2.0 * x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_ITER {
        term *= two_x2 / (2 * n + 1) as f64;
        sum += term;
        if term < sum * EPS {
            break;
        }
    }
    2.0 / PI.sqrt() * (-x * x).exp() * sum
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..MAX_ITER {
        let a = n as f64 / 2.0;
        d = x + a * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Regularized lower incomplete gamma function `P(a, x)`.
///
/// Series expansion for `x < a + 1`, Lentz continued fraction for the
/// complement otherwise.
pub fn reg_lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("incomplete gamma shape must be positive, got {a}")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("incomplete gamma argument must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        Ok((sum * log_prefactor.exp()).clamp(0.0, 1.0))
    } else {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b + an / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        let upper = log_prefactor.exp() * h;
        Ok((1.0 - upper).clamp(0.0, 1.0))
    }
}

/// Degrees of freedom of a central chi-square distribution.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ChiSquareDf(f64);

impl ChiSquareDf {
    pub fn new(df: f64) -> Result<Self> {
        if df > 0.0 && df.is_finite() {
            Ok(ChiSquareDf(df))
        } else {
            Err(Error::domain(format!("chi-square degrees of freedom must be positive, got {df}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `F_df(x) = P(df/2, x/2)`.
    pub fn cdf(self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!("chi-square CDF argument must be >= 0, got {x}")));
        }
        reg_lower_incomplete_gamma(self.0 / 2.0, x / 2.0)
    }

    pub fn pdf(self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let k = self.0 / 2.0;
        if x == 0.0 {
            return match k {
                k if k < 1.0 => f64::INFINITY,
                1.0 => 0.5,
                _ => 0.0,
            };
        }
        ((k - 1.0) * x.ln() - x / 2.0 - k * std::f64::consts::LN_2 - ln_gamma(k)).exp()
    }

    /// Inverse CDF for `0 <= p < 1`: bracketing with Newton steps that fall
    /// back to bisection whenever they leave the bracket.
    pub fn quantile(self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::domain(format!("chi-square quantile needs 0 <= p < 1, got {p}")));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        let df = self.0;
        let mut lo = 0.0;
        let mut hi = df + 20.0 * (2.0 * df).sqrt() + 20.0;
        while self.cdf(hi)? < p {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::domain(format!("chi-square quantile bracket overflow at p = {p}")));
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..500 {
            let f = self.cdf(x)? - p;
            if f == 0.0 {
                return Ok(x);
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let dens = self.pdf(x);
            if dens > 0.0 && (f / dens).abs() <= 1e-15 * x {
                return Ok(x);
            }
            let newton = x - f / dens;
            x = if dens > 0.0 && newton.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        Ok(x)
    }
}

/// Parametric densities usable as reference functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensityFamily {
    /// `r(theta) = 1` everywhere.
    Flat,
    Normal {
        mean: f64,
        sd: f64,
    },
    Cauchy {
        location: f64,
        scale: f64,
    },
    StudentT {
        location: f64,
        scale: f64,
        df: f64,
    },
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {v}")))
    }
}

impl DensityFamily {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        require_finite("mean", mean)?;
        require_positive("sd", sd)?;
        Ok(DensityFamily::Normal { mean, sd })
    }

    pub fn cauchy(location: f64, scale: f64) -> Result<Self> {
        require_finite("location", location)?;
        require_positive("scale", scale)?;
        Ok(DensityFamily::Cauchy { location, scale })
    }

    pub fn student_t(location: f64, scale: f64, df: f64) -> Result<Self> {
        require_finite("location", location)?;
        require_positive("scale", scale)?;
        require_positive("df", df)?;
        Ok(DensityFamily::StudentT { location, scale, df })
    }

    /// Checks the parameter invariants of a value built directly from the enum.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DensityFamily::Flat => Ok(()),
            DensityFamily::Normal { mean, sd } => Self::normal(mean, sd).map(drop),
            DensityFamily::Cauchy { location, scale } => Self::cauchy(location, scale).map(drop),
            DensityFamily::StudentT { location, scale, df } => Self::student_t(location, scale, df).map(drop),
        }
    }

    pub fn density(&self, theta: f64) -> f64 {
        match *self {
            DensityFamily::Flat => 1.0,
            DensityFamily::Normal { mean, sd } => {
                let z = (theta - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
            }
            DensityFamily::Cauchy { location, scale } => {
                let z = (theta - location) / scale;
                1.0 / (PI * scale * (1.0 + z * z))
            }
            DensityFamily::StudentT { location, scale, df } => {
                let z = (theta - location) / scale;
                let log_norm = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * PI).ln() - scale.ln();
                (log_norm - (df + 1.0) / 2.0 * (z * z / df).ln_1p()).exp()
            }
        }
    }

    /// The density's spread parameter, `None` for the flat family.
    pub fn scale(&self) -> Option<f64> {
        match *self {
            DensityFamily::Flat => None,
            DensityFamily::Normal { sd, .. } => Some(sd),
            DensityFamily::Cauchy { scale, .. } | DensityFamily::StudentT { scale, .. } => Some(scale),
        }
    }

    /// The density's center, `None` for the flat family.
    pub fn location(&self) -> Option<f64> {
        match *self {
            DensityFamily::Flat => None,
            DensityFamily::Normal { mean, .. } => Some(mean),
            DensityFamily::Cauchy { location, .. } | DensityFamily::StudentT { location, .. } => Some(location),
        }
    }
}
