//! Built-in fixtures run by `fbst selfcheck`.

use fbst::evidence::standardized_evalue;
use fbst::io::format_significant;
use fbst::oracle::{analytic_evalue_flat, brute_force_evalue, AnalyticPosterior};
use fbst::special::normal_cdf;
use fbst::{fbst, ChiSquareDf, DensityFamily, Dimensions, Estimator, FbstOptions, PosteriorSample, ReferenceFunction};

struct Outcome {
    name: String,
    pass: bool,
}

fn check(name: String, pass: bool) -> Outcome {
    Outcome { name, pass }
}

// Published standardized e-values with their inputs.
const SEV_FIXTURES: [(f64, u32, u32, f64); 4] = [
    (0.8305998, 3, 2, 0.0248695),
    (0.9032063, 3, 2, 0.01189972),
    (0.9859827, 3, 2, 0.001123303),
    (0.9758885, 8, 7, 0.00002672151),
];

fn sev_fixtures() -> Vec<Outcome> {
    SEV_FIXTURES
        .iter()
        .map(|&(ev, k, h, expected)| {
            let got = Dimensions::new(k, h).and_then(|d| standardized_evalue(ev, d)).map(|s| s.sev);
            match got {
                Ok(sev) => check(
                    format!("(ev̄={ev},k={k},h={h}) → {}", format_significant(sev, 6)),
                    ((sev - expected) / expected).abs() < 1e-3,
                ),
                Err(e) => check(format!("(ev̄={ev},k={k},h={h}) → error: {e}"), false),
            }
        })
        .collect()
}

fn normal_oracles() -> Vec<Outcome> {
    let mut out = Vec::new();
    for (i, mu) in [1.0, 2.0].into_iter().enumerate() {
        let post = match AnalyticPosterior::normal(mu, 1.0) {
            Ok(p) => p,
            Err(e) => {
                out.push(check(format!("N({mu},1): {e}"), false));
                continue;
            }
        };
        let oracle = analytic_evalue_flat(&post, 0.0);
        let sample = PosteriorSample::new("theta", post.sample(200_000, 11 + i as u64));
        for estimator in [Estimator::Grid, Estimator::MonteCarlo] {
            let opts = FbstOptions { estimator, ..Default::default() };
            let dims = Dimensions::new(1, 0);
            let res = sample.clone().and_then(|s| dims.and_then(|d| fbst(&s, 0.0, &ReferenceFunction::Flat, d, &opts)));
            out.push(match res {
                Ok(r) => check(
                    format!("N({mu},1) vs θ₀=0 → {oracle:.4} ({estimator} estimate {:.4})", r.e_value_against),
                    (r.e_value_against - oracle).abs() < 0.01,
                ),
                Err(e) => check(format!("N({mu},1) vs θ₀=0 ({estimator}): {e}"), false),
            });
        }
    }
    out
}

fn chi_square_fixtures() -> Vec<Outcome> {
    let mut out = Vec::new();
    let mut worst2: f64 = 0.0;
    let mut worst1: f64 = 0.0;
    let (c1, c2) = (ChiSquareDf::new(1.0).expect("df 1"), ChiSquareDf::new(2.0).expect("df 2"));
    for i in 1..=200 {
        let x = i as f64 * 0.1;
        worst2 = worst2.max((c2.cdf(x).unwrap_or(f64::NAN) - (1.0 - (-x / 2.0).exp())).abs());
        worst1 = worst1.max((c1.cdf(x).unwrap_or(f64::NAN) - (2.0 * normal_cdf(x.sqrt()) - 1.0)).abs());
    }
    out.push(check(format!("χ²₂ closed form, max error {worst2:.1e}"), worst2 < 1e-12));
    out.push(check(format!("χ²₁ closed form, max error {worst1:.1e}"), worst1 < 1e-12));
    let mut worst: f64 = 0.0;
    for df in [1.0, 2.0, 3.0, 7.0, 8.0, 50.0] {
        let d = ChiSquareDf::new(df).expect("positive df");
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let back = d.quantile(p).and_then(|q| d.cdf(q)).unwrap_or(f64::NAN);
            worst = worst.max((back - p).abs());
        }
    }
    out.push(check(format!("χ² quantile roundtrip, max error {worst:.1e}"), worst < 1e-10));
    out
}

fn cauchy_reference_fixture() -> Outcome {
    // With a standard Cauchy reference the tangential set for θ₀ = 2 under
    // N(0,1) is (-2, 2).
    let post = AnalyticPosterior::normal(0.0, 1.0);
    let cauchy = DensityFamily::cauchy(0.0, 1.0);
    match (post, cauchy) {
        (Ok(post), Ok(cauchy)) => {
            let ev = brute_force_evalue(|t| post.density(t), |t| cauchy.density(t), 2.0, -12.0, 12.0, 400_000);
            let expected = 2.0 * normal_cdf(2.0) - 1.0;
            check(format!("N(0,1), Cauchy reference, θ₀=2 → {ev:.6}"), (ev - expected).abs() < 1e-5)
        }
        _ => check("N(0,1), Cauchy reference: setup failed".into(), false),
    }
}

/// Runs every fixture, printing one line each; true when all pass.
pub fn run() -> bool {
    let mut all = sev_fixtures();
    all.extend(normal_oracles());
    all.extend(chi_square_fixtures());
    all.push(cauchy_reference_fixture());
    let mut ok = true;
    for o in &all {
        println!("[{}] {}", if o.pass { "PASS" } else { "FAIL" }, o.name);
        ok &= o.pass;
    }
    let passed = all.iter().filter(|o| o.pass).count();
    println!("{passed}/{} fixtures passed", all.len());
    ok
}
