//! Exact counts of `n <= X` with `n^2 + 1` and `n^2 + 2` both square-free,
//! and the Möbius decomposition of that count over `(d1, d2)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modmath::{crt, factorize, gcd, ResidueClass};
use crate::quadroots::{roots_mod, Shift};
use crate::sieve::{default_prime_bound, sieve_flags};
use crate::singular_series::sigma_reference;

/// Largest `X` for the sieve-based census.
pub const MAX_CENSUS_X: u64 = 10_000_000;
/// Largest `X` for the `(d1, d2)` decomposition.
pub const MAX_DECOMPOSITION_X: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCensus {
    pub x: u64,
    pub gamma: u64,
    pub sigma_x: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

impl PairCensus {
    fn new(x: u64, gamma: u64, sigma: f64) -> Self {
        let sigma_x = sigma * x as f64;
        let abs_err = (gamma as f64 - sigma_x).abs();
        PairCensus {
            x,
            gamma,
            sigma_x,
            abs_err,
            rel_err: abs_err / x as f64,
        }
    }
}

/// `#{m <= X : m ≡ n (mod q)}` for `1 <= n <= q`.
pub fn count_in_progression(x: u64, q: u128, n: u128) -> u64 {
    debug_assert!(n >= 1 && n <= q);
    let x = x as u128;
    if n > x {
        0
    } else {
        ((x - n) / q + 1) as u64
    }
}

/// Counts `n <= X` in the CRT classes built from the two root lists.
fn count_from_roots(x: u64, q1: u128, r1: &[u128], q2: u128, r2: &[u128]) -> Result<u64> {
    let q = q1 * q2;
    let mut total = 0;
    for &a in r1 {
        for &b in r2 {
            let c = crt(ResidueClass::new(a as i128, q1), ResidueClass::new(b as i128, q2))?;
            let n = if c.residue == 0 { q } else { c.residue };
            total += count_in_progression(x, q, n);
        }
    }
    Ok(total)
}

/// `#{n <= X : d1^2 | n^2 + 1, d2^2 | n^2 + 2}` through root sets, CRT and
/// progression counts.
pub fn sigma_count(x: u64, d1: u64, d2: u64) -> Result<u64> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::InvalidArgument("d1, d2 must be positive".into()));
    }
    if gcd(d1 as u128, d2 as u128) != 1 {
        return Err(Error::NotCoprime(d1 as i128, d2 as i128));
    }
    let (q1, q2) = ((d1 as u128).pow(2), (d2 as u128).pow(2));
    let r1 = roots_mod(Shift::One, q1)?;
    let r2 = roots_mod(Shift::Two, q2)?;
    count_from_roots(x, q1, &r1.roots, q2, &r2.roots)
}

fn check_census_x(x: u64) -> Result<()> {
    if !(1..=MAX_CENSUS_X).contains(&x) {
        return Err(Error::out_of_range("X", x, "[1, 10^7]"));
    }
    Ok(())
}

/// `Γ(X)` from the sieve alone.
pub fn gamma_count(x: u64) -> Result<u64> {
    check_census_x(x)?;
    Ok(sieve_flags(1, x, default_prime_bound(x))?.pair_count())
}

/// `Γ(X)` compared against `σ X`.
pub fn gamma_direct(x: u64) -> Result<PairCensus> {
    let gamma = gamma_count(x)?;
    Ok(PairCensus::new(x, gamma, sigma_reference().value))
}

/// Threshold `z` splitting the Möbius expansion into `d1 d2 <= z` and the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionPlan {
    pub x: u64,
    pub z: f64,
}

impl DecompositionPlan {
    /// Requires `sqrt(X) <= z < X`.
    pub fn new(x: u64, z: f64) -> Result<Self> {
        let xf = x as f64;
        if !(z >= xf.sqrt() && z < xf) {
            return Err(Error::InvalidArgument(format!(
                "z = {z} must satisfy sqrt(X) <= z < X for X = {x}"
            )));
        }
        Ok(DecompositionPlan { x, z })
    }

    /// `z = X^(8/9)`.
    pub fn with_default_z(x: u64) -> Result<Self> {
        Self::new(x, (x as f64).powf(8.0 / 9.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub x: u64,
    pub gamma1: i64,
    pub gamma2: i64,
    pub total: i64,
    /// Pairs `(d1, d2)` with a nonzero count on each side of `z`.
    pub pairs1: usize,
    pub pairs2: usize,
}

struct Divisors {
    d: u64,
    mu: i64,
    modulus: u128,
    roots: Vec<u128>,
}

/// Square-free `d <= X` whose square divides `n^2 + a` for some `n <= X`,
/// with the full root list modulo `d^2`.
fn supported_divisors(a: Shift, x: u64) -> Result<Vec<Divisors>> {
    let admissible = |p: u128| match a {
        Shift::One => p % 4 == 1,
        Shift::Two => p % 8 == 1 || p % 8 == 3,
    };
    // d^2 <= X^2 + 2 forces d <= X.
    (1..=x)
        .into_par_iter()
        .map(|d| {
            let f = factorize(d as u128);
            if !f.is_squarefree() || !f.primes().all(admissible) {
                return Ok(None);
            }
            let q = (d as u128).pow(2);
            let rs = roots_mod(a, q)?;
            if !rs.roots.iter().any(|&r| r <= x as u128) {
                return Ok(None);
            }
            Ok(Some(Divisors {
                d,
                mu: f.mobius() as i64,
                modulus: q,
                roots: rs.roots,
            }))
        })
        .filter_map(Result::transpose)
        .collect()
}

/// `Γ1 + Γ2` from the expansion `μ^2(m) = sum_{d^2 | m} μ(d)`.
///
/// Pairs where either side has no root `<= X` contribute zero and are never
/// visited; every other coprime pair is counted with [`sigma_count`]'s CRT
/// route.
pub fn gamma_decomposed(plan: DecompositionPlan) -> Result<Decomposition> {
    let x = plan.x;
    if x > MAX_DECOMPOSITION_X {
        return Err(Error::out_of_range("X", x, "[1, 10^5]"));
    }
    let ones = supported_divisors(Shift::One, x)?;
    let twos = supported_divisors(Shift::Two, x)?;
    // Partition by d1; each row is an independent partial sum.
    let rows: Vec<(i64, i64, usize, usize)> = ones
        .par_iter()
        .map(|a| {
            let mut row = (0i64, 0i64, 0usize, 0usize);
            for b in &twos {
                if gcd(a.d as u128, b.d as u128) != 1 {
                    continue;
                }
                let count = count_from_roots(x, a.modulus, &a.roots, b.modulus, &b.roots)
                    .expect("coprime moduli") as i64;
                if count == 0 {
                    continue;
                }
                let term = a.mu * b.mu * count;
                if (a.d * b.d) as f64 <= plan.z {
                    row.0 += term;
                    row.2 += 1;
                } else {
                    row.1 += term;
                    row.3 += 1;
                }
            }
            row
        })
        .collect();
    let (gamma1, gamma2, pairs1, pairs2) = rows
        .into_iter()
        .fold((0, 0, 0, 0), |acc, r| (acc.0 + r.0, acc.1 + r.1, acc.2 + r.2, acc.3 + r.3));
    Ok(Decomposition {
        x,
        gamma1,
        gamma2,
        total: gamma1 + gamma2,
        pairs1,
        pairs2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub sigma: f64,
    pub sigma_prime_bound: u64,
    pub rows: Vec<PairCensus>,
    /// Least-squares slope of `ln |Γ - σX|` against `ln X` over rows with
    /// `X >= 100` and nonzero error; `None` with fewer than two such rows.
    pub slope: Option<f64>,
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// One sieve up to `max(xs)` serves every row.
pub fn asymptotic_report(xs: &[u64]) -> Result<AsymptoticReport> {
    let sigma = sigma_reference();
    let mut report = AsymptoticReport {
        sigma: sigma.value,
        sigma_prime_bound: sigma.truncation,
        rows: Vec::new(),
        slope: None,
    };
    let Some(&max) = xs.iter().max() else {
        return Ok(report);
    };
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("X values must be strictly ascending".into()));
    }
    check_census_x(xs[0])?;
    check_census_x(max)?;
    let flags = sieve_flags(1, max, default_prime_bound(max))?;
    let mut running = 0u64;
    let mut next = xs.iter().peekable();
    for (i, (a, b)) in flags.flags1.iter().zip(&flags.flags2).enumerate() {
        running += (*a && *b) as u64;
        let n = i as u64 + 1;
        if next.peek() == Some(&&n) {
            report.rows.push(PairCensus::new(n, running, sigma.value));
            next.next();
        }
    }
    let points: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.x >= 100 && r.abs_err > 0.0)
        .map(|r| ((r.x as f64).ln(), r.abs_err.ln()))
        .collect();
    report.slope = least_squares_slope(&points);
    Ok(report)
}
