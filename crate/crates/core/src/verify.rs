//! The invariant suite behind `verify-all`, at two scales.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::expsum::{
    prehod_check, prehod_moduli, ramanujan_check, random_theta_specs, reciprocity_check, theta_direct,
    theta_via_reps, truncation_error, weil_ratio_study,
};
use crate::gamma_census::{asymptotic_report, gamma_count, gamma_decomposed, DecompositionPlan};
use crate::modmath::gcd_i;
use crate::quadroots::{root_count_law, verify_multiplicativity};
use crate::representation_map::verify_surjectivity;
use crate::sieve::{default_prime_bound, is_squarefree, sieve_flags};
use crate::singular_series::{estimates_agree, sigma_product, sigma_sum, SigmaEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Smoke,
    Desk,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name,
            pass,
            detail: detail.into(),
        }
    }
}

pub const CHECKS: [&str; 14] = [
    "census",
    "decomposition",
    "sigma",
    "asymptotic",
    "surjectivity",
    "reciprocity",
    "theta",
    "prehod",
    "weil",
    "ramanujan",
    "root-law",
    "sieve-oracle",
    "multiplicativity",
    "truncation",
];

fn pick<T>(scale: Scale, smoke: T, desk: T) -> T {
    match scale {
        Scale::Smoke => smoke,
        Scale::Desk => desk,
    }
}

pub fn census() -> Result<CheckOutcome> {
    let got = [gamma_count(10)?, gamma_count(4)?, gamma_count(1)?];
    let flags = sieve_flags(1, 10, default_prime_bound(10))?;
    let misses: Vec<u64> = (1..=10)
        .filter(|&n| flags.get(n).is_some_and(|(a, b)| !(a && b)))
        .collect();
    let pass = got == [7, 3, 1] && misses == [4, 5, 7];
    Ok(CheckOutcome::new(
        "census",
        pass,
        format!("gamma(10, 4, 1) = {got:?}, misses at {misses:?}"),
    ))
}

/// `z` values in `[sqrt X, X)`: `X^(8/9)` and four evenly spaced points.
pub fn sample_thresholds(x: u64) -> Vec<f64> {
    let xf = x as f64;
    let lo = xf.sqrt();
    let mut zs: Vec<f64> = (0..4).map(|k| lo + (xf - lo) * k as f64 / 4.0).collect();
    zs.push(xf.powf(8.0 / 9.0));
    zs
}

pub fn decomposition(xs: &[u64]) -> Result<CheckOutcome> {
    let mut bad = Vec::new();
    let mut runs = 0;
    for &x in xs {
        let gamma = gamma_count(x)? as i64;
        for z in sample_thresholds(x) {
            runs += 1;
            let d = gamma_decomposed(DecompositionPlan::new(x, z)?)?;
            if d.total != gamma {
                bad.push(format!("X = {x}, z = {z}: {} != {gamma}", d.total));
            }
        }
    }
    Ok(CheckOutcome::new(
        "decomposition",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{runs} (X, z) pairs match the direct count")
        } else {
            bad.join("; ")
        },
    ))
}

/// The product and sum estimates agree within their tail bounds and both lie
/// in `(0.6, 0.8)`.
pub fn sigma_agreement(product: &SigmaEstimate, sum: &SigmaEstimate) -> CheckOutcome {
    let in_range = |v: f64| v > 0.6 && v < 0.8;
    let pass = estimates_agree(product, sum) && in_range(product.value) && in_range(sum.value);
    CheckOutcome::new(
        "sigma",
        pass,
        format!(
            "product(P = {}) = {:.15} ± {:.3e}, sum(Dmax = {}) = {:.15} ± {:.3e}, gap {:.3e}{}",
            product.truncation,
            product.value,
            product.tail_bound,
            sum.truncation,
            sum.value,
            sum.tail_bound,
            (product.value - sum.value).abs(),
            if pass { "" } else { ": two-method disagreement" }
        ),
    )
}

pub fn asymptotic(xs: &[u64]) -> Result<CheckOutcome> {
    let report = asymptotic_report(xs)?;
    let rel: Vec<f64> = report.rows.iter().map(|r| r.rel_err).collect();
    let decreasing = rel.windows(2).all(|w| w[1] < w[0]);
    let last_ok = rel.last().is_some_and(|&r| r <= 0.01);
    let slope_ok = report.slope.is_some_and(|s| s <= 1.0);
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("X = {}: gamma = {}, rel_err = {:.3e}", r.x, r.gamma, r.rel_err))
        .collect();
    Ok(CheckOutcome::new(
        "asymptotic",
        decreasing && last_ok && slope_ok,
        format!(
            "{}; slope = {}; decreasing = {decreasing}",
            rows.join("; "),
            report.slope.map_or("none".into(), |s| format!("{s:.4}"))
        ),
    ))
}

pub fn surjectivity(nmax: u64) -> CheckOutcome {
    let r = verify_surjectivity(nmax);
    let pass = r.failures.is_empty() && r.double_case_count > 0;
    let mut detail = format!(
        "n <= {nmax}: {} roots over {} moduli, {} via the doubled case, {} failures",
        r.roots_checked,
        r.moduli_with_roots,
        r.double_case_count,
        r.failures.len()
    );
    if let Some(f) = r.failures.first() {
        detail.push_str(&format!("; first: n = {}, z = {}: {}", f.n, f.z, f.reason));
    }
    CheckOutcome::new("surjectivity", pass, detail)
}

pub fn reciprocity(bound: i64) -> CheckOutcome {
    let failures: Vec<(i64, i64)> = (1..=bound)
        .into_par_iter()
        .flat_map_iter(|a| {
            (1..=bound)
                .filter(move |&b| gcd_i(a as i128, b as i128) == 1)
                .flat_map(move |b| [(a, b), (a, -b), (-a, b), (-a, -b)])
                .filter(|&(a, b)| !reciprocity_check(a, b).unwrap_or(false))
        })
        .collect();
    CheckOutcome::new(
        "reciprocity",
        failures.is_empty(),
        format!("|A|, |B| <= {bound}: {} failures {:?}", failures.len(), &failures[..failures.len().min(5)]),
    )
}

pub const THETA_TOLERANCE: f64 = 1e-9;

pub fn theta(count: usize, seed: u64) -> CheckOutcome {
    let specs = random_theta_specs(count, 200, 20, 10_000, seed);
    let diffs: Vec<f64> = specs
        .par_iter()
        .map(|s| (theta_direct(s) - theta_via_reps(s)).norm())
        .collect();
    let worst = diffs.iter().cloned().fold(0.0, f64::max);
    CheckOutcome::new(
        "theta",
        worst <= THETA_TOLERANCE,
        format!("{count} specs (seed {seed}): max |direct - via reps| = {worst:.3e}"),
    )
}

/// The identity as stated, for every admissible `d` at each `X`.
pub fn prehod(xs: &[u64]) -> Result<CheckOutcome> {
    let mut checked = 0;
    let mut mismatched = Vec::new();
    let mut closed_form_failures = 0;
    for &x in xs {
        for d in prehod_moduli(x)? {
            let c = prehod_check(d, x)?;
            checked += 1;
            if !c.equal {
                mismatched.push(format!("(X = {x}, d = {d})"));
            }
            if !c.closed_forms_hold() {
                closed_form_failures += 1;
            }
        }
    }
    let shown = mismatched.len().min(6);
    Ok(CheckOutcome::new(
        "prehod",
        mismatched.is_empty(),
        format!(
            "{checked} moduli, {} unequal {}{}; closed forms fail at {closed_form_failures}",
            mismatched.len(),
            mismatched[..shown].join(" "),
            if mismatched.len() > shown { " ..." } else { "" }
        ),
    ))
}

pub fn weil(rmax: u64, samples: usize, seed: u64) -> Result<CheckOutcome> {
    let r = weil_ratio_study(rmax, samples, seed)?;
    Ok(CheckOutcome::new(
        "weil",
        r.max_ratio <= 10.0,
        format!("r <= {rmax}, {samples} samples (seed {seed}): max ratio {:.4}", r.max_ratio),
    ))
}

pub fn ramanujan(rmax: u64) -> CheckOutcome {
    let worst = ramanujan_check(rmax);
    CheckOutcome::new(
        "ramanujan",
        worst <= 1e-9,
        format!("square-free r <= {rmax}: max |K - mu(r)| = {worst:.3e}"),
    )
}

pub fn root_law(dmax: u128) -> Result<CheckOutcome> {
    let r = root_count_law(dmax)?;
    Ok(CheckOutcome::new(
        "root-law",
        r.violations.is_empty(),
        format!(
            "d <= {dmax}: {} admissible, {} violations",
            r.admissible_checked,
            r.violations.len()
        ),
    ))
}

pub fn sieve_oracle(nmax: u64) -> Result<CheckOutcome> {
    let flags = sieve_flags(1, nmax, default_prime_bound(nmax))?;
    let bad: Vec<u64> = (1..=nmax)
        .into_par_iter()
        .filter(|&n| {
            let m = n as u128 * n as u128;
            flags.get(n) != Some((is_squarefree(m + 1), is_squarefree(m + 2)))
        })
        .collect();
    Ok(CheckOutcome::new(
        "sieve-oracle",
        bad.is_empty(),
        format!("n <= {nmax}: {} mismatches {:?}", bad.len(), &bad[..bad.len().min(5)]),
    ))
}

pub fn multiplicativity(bound: u128) -> CheckOutcome {
    let r = verify_multiplicativity(bound);
    CheckOutcome::new(
        "multiplicativity",
        r.violations.is_empty(),
        format!(
            "q1 q2 q3 q4 <= {bound}: {} tuples, {} violations",
            r.tuples_checked,
            r.violations.len()
        ),
    )
}

/// Mean truncation error falls at every doubling of `M` from `2^5` to `2^kmax`.
pub fn truncation(kmax: u32, points: usize, seed: u64) -> Result<CheckOutcome> {
    let errs = (5..=kmax)
        .map(|k| truncation_error(1 << k, points, seed))
        .collect::<Result<Vec<f64>>>()?;
    let pass = errs.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
    Ok(CheckOutcome::new(
        "truncation",
        pass,
        format!("M = 2^5..2^{kmax}, {points} points: {}", shown.join(", ")),
    ))
}

pub fn run_check(name: &str, scale: Scale, seed: u64) -> Result<CheckOutcome> {
    Ok(match name {
        "census" => census()?,
        "decomposition" => decomposition(pick(scale, &[100, 1000][..], &[100, 1000, 10_000][..]))?,
        "sigma" => {
            let (p, d) = pick(scale, (100_000, 1_000), (1_000_000, 10_000));
            sigma_agreement(&sigma_product(p)?, &sigma_sum(d)?)
        }
        "asymptotic" => asymptotic(pick(
            scale,
            &[1_000, 10_000, 100_000][..],
            &[1_000, 10_000, 100_000, 1_000_000][..],
        ))?,
        "surjectivity" => surjectivity(pick(scale, 2_000, 10_000)),
        "reciprocity" => reciprocity(pick(scale, 100, 300)),
        "theta" => theta(pick(scale, 10, 50), seed),
        "prehod" => prehod(pick(scale, &[100, 400][..], &[100, 400, 10_000][..]))?,
        "weil" => weil(5_000, pick(scale, 1_000, 10_000), seed)?,
        "ramanujan" => ramanujan(pick(scale, 200, 500)),
        "root-law" => root_law(pick(scale, 2_000, 10_000))?,
        "sieve-oracle" => sieve_oracle(pick(scale, 10_000, 100_000))?,
        "multiplicativity" => multiplicativity(pick(scale, 100, 200)),
        "truncation" => truncation(pick(scale, 9, 12), pick(scale, 2_000, 10_000), seed)?,
        other => {
            return Err(crate::Error::InvalidArgument(format!("unknown check {other:?}")));
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::singular_series::SigmaMethod;

    #[test]
    fn census_passes() {
        assert!(census().unwrap().pass);
    }

    #[test]
    fn thresholds_in_range() {
        for x in [100u64, 1000, 10_000] {
            let zs = sample_thresholds(x);
            assert_eq!(zs.len(), 5);
            assert!(zs.iter().all(|&z| DecompositionPlan::new(x, z).is_ok()));
        }
    }

    #[test]
    fn corrupted_sigma_is_named() {
        let good = sigma_product(10_000).unwrap();
        let sum = sigma_sum(1_000).unwrap();
        assert!(sigma_agreement(&good, &sum).pass);
        let bad = SigmaEstimate {
            value: sum.value + 2.0 * (good.tail_bound + sum.tail_bound),
            method: SigmaMethod::Product,
            ..good
        };
        let out = sigma_agreement(&bad, &sum);
        assert!(!out.pass);
        assert!(out.detail.contains("two-method disagreement"));
    }

    #[test]
    fn unknown_check() {
        assert!(run_check("nope", Scale::Smoke, 0).is_err());
    }
}
