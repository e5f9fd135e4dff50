//! The density constant of square-free pairs, by Euler product and by the
//! λ-weighted double sum over `(d1, d2)`, each with an explicit tail bound.
//!
//! Product tail: every omitted factor is `1 - c/p^2` with `c <= 4`, and
//! `sum_{p > P} 4/p^2 < 4/P`.
//!
//! Sum tail: grouping terms by `n = d1 d2`, the absolute mass at `n` is
//! `h(n)/n^2` with `h` multiplicative, `h(p) = λ(p^2, 1) + λ(1, p^2)` and
//! `h(2) = 0`. The tail is summed exactly up to `10 Dmax`; beyond that
//! `h(n) <= τ(n)^2 <= τ_4(n)` and `sum_{n <= x} τ_4(n) <= x (1 + ln x)^3`, so
//! partial summation bounds the rest by
//! `(2/N) [(1+L)^3 + 3(1+L)^2 + 6(1+L) + 6]` with `L = ln N`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modmath::{factorize, gcd, legendre, legendre_unchecked, primes_up_to};
use crate::quadroots::{roots_mod, Shift};

/// Prime bound used for reported σ values.
pub const REPORT_PRIME_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaMethod {
    Product,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaEstimate {
    pub value: f64,
    pub method: SigmaMethod,
    /// Prime bound `P` (product) or divisor bound `Dmax` (sum).
    pub truncation: u64,
    pub tail_bound: f64,
}

/// `c_p = (-1/p) + (-2/p) + 2`, the number of roots of `n^2 + 1` and
/// `n^2 + 2` modulo `p^2` together.
fn root_mass(p: u64) -> i128 {
    let p = p as u128;
    legendre_unchecked(-1, p) as i128 + legendre_unchecked(-2, p) as i128 + 2
}

/// The Euler factor at an odd prime, `1 - ((-1/p) + (-2/p) + 2)/p^2`, checked
/// against the root-count form `1 - (λ(p^2,1) + λ(1,p^2))/p^2`.
pub fn local_factor(p: u64) -> Result<Ratio<i128>> {
    let pu = p as u128;
    let symbols = legendre(-1, pu)? as i128 + legendre(-2, pu)? as i128 + 2;
    let p2 = pu * pu;
    let counted = (roots_mod(Shift::One, p2)?.len() + roots_mod(Shift::Two, p2)?.len()) as i128;
    let by_symbols = Ratio::new(p2 as i128 - symbols, p2 as i128);
    let by_roots = Ratio::new(p2 as i128 - counted, p2 as i128);
    if by_symbols != by_roots {
        return Err(Error::Inconsistent(format!(
            "local factor at {p}: Legendre form {by_symbols} != root-count form {by_roots}"
        )));
    }
    Ok(by_symbols)
}

/// Double-double value `hi + lo`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    /// `num / den` for exactly representable integers.
    fn ratio(num: f64, den: f64) -> Dd {
        let q = num / den;
        let r = (-q).mul_add(den, num);
        Dd::two_sum(q, r / den)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::two_sum(p, e + self.hi * o.lo + self.lo * o.hi)
    }
}

/// Euler product over odd primes `p <= P`.
pub fn sigma_product(prime_bound: u64) -> Result<SigmaEstimate> {
    if prime_bound < 3 {
        return Err(Error::out_of_range("prime bound", prime_bound, "[3, inf)"));
    }
    let mut acc = Dd { hi: 1.0, lo: 0.0 };
    for p in primes_up_to(prime_bound).into_iter().skip(1) {
        let p2 = (p * p) as f64;
        let c = root_mass(p) as f64;
        if c != 0.0 {
            acc = acc.mul(Dd::ratio(p2 - c, p2));
        }
    }
    Ok(SigmaEstimate {
        value: acc.hi + acc.lo,
        method: SigmaMethod::Product,
        truncation: prime_bound,
        tail_bound: 4.0 / prime_bound as f64,
    })
}

/// The product at [`REPORT_PRIME_BOUND`], computed once.
pub fn sigma_reference() -> SigmaEstimate {
    static SIGMA: OnceLock<SigmaEstimate> = OnceLock::new();
    *SIGMA.get_or_init(|| sigma_product(REPORT_PRIME_BOUND).expect("valid bound"))
}

/// Exact rational partial product, for regression values at small `P`.
pub fn sigma_product_exact(prime_bound: u64) -> Result<BigRational> {
    if !(3..=100_000).contains(&prime_bound) {
        return Err(Error::out_of_range("prime bound", prime_bound, "[3, 10^5]"));
    }
    let mut acc = BigRational::from_integer(BigInt::from(1));
    for p in primes_up_to(prime_bound).into_iter().skip(1) {
        let f = local_factor(p)?;
        acc *= BigRational::new(BigInt::from(*f.numer()), BigInt::from(*f.denom()));
    }
    Ok(acc)
}

/// Neumaier-compensated sum in the given order.
fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for t in terms {
        let u = s + t;
        if s.abs() >= t.abs() {
            c += (s - u) + t;
        } else {
            c += (t - u) + s;
        }
        s = u;
    }
    s + c
}

/// `(2/N) [(1+L)^3 + 3(1+L)^2 + 6(1+L) + 6]`, `L = ln N`.
fn tau4_tail(n: f64) -> f64 {
    let l1 = 1.0 + n.ln();
    2.0 / n * (l1.powi(3) + 3.0 * l1.powi(2) + 6.0 * l1 + 6.0)
}

/// `h(n)` over `[1, limit]` via a smallest-prime-factor table.
fn mass_table(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    let mut h = vec![0u32; limit + 1];
    if limit >= 1 {
        h[1] = 1;
    }
    for n in 2..=limit {
        let p = spf[n] as usize;
        let m = n / p;
        h[n] = if m.is_multiple_of(p) || p == 2 {
            0
        } else {
            h[m] * root_mass(p as u64) as u32
        };
    }
    h
}

/// Bound on the omitted part of [`sigma_sum`] at divisor bound `dmax`.
pub fn sigma_sum_tail(dmax: u64) -> f64 {
    let cut = 10 * dmax as usize;
    let h = mass_table(cut);
    let exact = compensated_sum(
        ((dmax as usize + 1)..=cut)
            .filter(|&n| h[n] != 0)
            .map(|n| h[n] as f64 / (n as f64 * n as f64)),
    );
    exact + tau4_tail(cut as f64)
}

/// `sum μ(d1) μ(d2) λ(d1^2, d2^2) / (d1 d2)^2` over coprime `d1 d2 <= Dmax`,
/// summed in ascending `(d1 d2, d1)` order.
pub fn sigma_sum(dmax: u64) -> Result<SigmaEstimate> {
    if !(1..=1_000_000).contains(&dmax) {
        return Err(Error::out_of_range("dmax", dmax, "[1, 10^6]"));
    }
    // weight[a][d] = μ(d) λ(d^2, 1) for a = 0, μ(d) λ(1, d^2) for a = 1
    let mut weight = [vec![0i64; dmax as usize + 1], vec![0i64; dmax as usize + 1]];
    for d in 1..=dmax {
        let f = factorize(d as u128);
        let mu = f.mobius() as i64;
        if mu == 0 {
            continue;
        }
        let d2 = (d as u128) * (d as u128);
        // λ(d^2, 1) vanishes as soon as some p ≡ 3 (mod 4) divides d.
        if f.primes().all(|p| p % 4 == 1) {
            weight[0][d as usize] = mu * roots_mod(Shift::One, d2)?.len() as i64;
        }
        weight[1][d as usize] = mu * roots_mod(Shift::Two, d2)?.len() as i64;
    }
    let mut terms: Vec<(u64, u64, f64)> = Vec::new();
    for d1 in 1..=dmax {
        let w1 = weight[0][d1 as usize];
        if w1 == 0 {
            continue;
        }
        for d2 in 1..=dmax / d1 {
            let w2 = weight[1][d2 as usize];
            if w2 == 0 || gcd(d1 as u128, d2 as u128) != 1 {
                continue;
            }
            let n = d1 * d2;
            terms.push((n, d1, (w1 * w2) as f64 / (n as f64 * n as f64)));
        }
    }
    terms.sort_unstable_by_key(|&(n, d1, _)| (n, d1));
    Ok(SigmaEstimate {
        value: compensated_sum(terms.into_iter().map(|t| t.2)),
        method: SigmaMethod::Sum,
        truncation: dmax,
        tail_bound: sigma_sum_tail(dmax),
    })
}

/// Whether two estimates are consistent within their combined tails.
pub fn estimates_agree(a: &SigmaEstimate, b: &SigmaEstimate) -> bool {
    (a.value - b.value).abs() <= a.tail_bound + b.tail_bound
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_factor_examples() {
        assert_eq!(local_factor(3).unwrap(), Ratio::new(7, 9));
        assert_eq!(local_factor(7).unwrap(), Ratio::from_integer(1));
        assert_eq!(local_factor(5).unwrap(), Ratio::new(23, 25));
        assert!(local_factor(2).is_err());
        assert!(local_factor(9).is_err());
    }

    #[test]
    fn local_factor_forms_agree() {
        for p in primes_up_to(10_000).into_iter().skip(1) {
            local_factor(p).unwrap();
        }
    }

    #[test]
    fn small_products() {
        let big = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(sigma_product_exact(3).unwrap(), big(7, 9));
        assert_eq!(sigma_product_exact(5).unwrap(), big(161, 225));
        assert_eq!(sigma_product_exact(7).unwrap(), big(161, 225));
        let s = sigma_product(5).unwrap();
        assert!((s.value - 161.0 / 225.0).abs() < 1e-15);
        assert_eq!(s.tail_bound, 0.8);
        assert!((sigma_product(3).unwrap().value - 7.0 / 9.0).abs() < 1e-15);
        assert!(sigma_product(2).is_err());
    }

    #[test]
    fn float_product_tracks_exact_product() {
        let exact = sigma_product_exact(1000).unwrap();
        let (n, d) = (exact.numer().clone(), exact.denom().clone());
        // Scale to 30 digits before converting.
        let scaled: BigInt = n * BigInt::from(10u64).pow(30) / d;
        let approx = scaled.to_string().parse::<f64>().unwrap() * 1e-30;
        let float = sigma_product(1000).unwrap().value;
        assert!((approx - float).abs() < 1e-14, "{approx} vs {float}");
    }

    #[test]
    fn partial_products_decrease() {
        let mut last = 1.0;
        for p in primes_up_to(2000).into_iter().skip(1) {
            let v = sigma_product(p).unwrap().value;
            assert!(v > 0.0 && v <= last);
            last = v;
        }
    }

    #[test]
    fn sum_examples() {
        let s = sigma_sum(1).unwrap();
        assert_eq!(s.value, 1.0);
        // Dmax = 5 by hand: d1 ∈ {1, 5}, d2 ∈ {1, 3}, pairs with d1 d2 <= 5.
        // 1 - λ(1,9)/9 - λ(25,1)/25 = 1 - 2/9 - 2/25
        let s = sigma_sum(5).unwrap();
        assert!((s.value - (1.0 - 2.0 / 9.0 - 2.0 / 25.0)).abs() < 1e-15);
    }

    #[test]
    fn two_methods_agree_small() {
        let p = sigma_product(100_000).unwrap();
        for dmax in [10, 100, 1000] {
            let s = sigma_sum(dmax).unwrap();
            assert!(estimates_agree(&p, &s), "dmax = {dmax}: {s:?} vs {p:?}");
        }
    }

    #[test]
    fn tail_bound_dominates_observed_gap() {
        let reference = sigma_sum(20_000).unwrap().value;
        for dmax in [50, 200, 1000] {
            let s = sigma_sum(dmax).unwrap();
            assert!((s.value - reference).abs() <= s.tail_bound);
        }
    }

    #[test]
    fn mass_table_matches_factorization() {
        let h = mass_table(2000);
        for n in 1..=2000u64 {
            let f = factorize(n as u128);
            let expect: i128 = if !f.is_squarefree() {
                0
            } else {
                f.primes()
                    .map(|p| if p == 2 { 0 } else { root_mass(p as u64) })
                    .product()
            };
            assert_eq!(h[n as usize] as i128, expect, "n = {n}");
        }
    }
}
