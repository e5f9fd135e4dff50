//! Square-free flags for `n^2 + 1` and `n^2 + 2` over an interval.
//!
//! For every odd prime `p <= B` with roots modulo `p^2`, the progressions
//! `n ≡ r (mod p^2)` are struck out. Survivors keep a running cofactor with
//! each small prime divided out once (a survivor is never divisible by `p^2`
//! for `p <= B`). When `B^3 >= hi^2 + 2` the remaining cofactor has at most
//! two prime factors, all above `B`, so it is non-square-free exactly when it
//! is a perfect square greater than one.
//!
//! The prime 2 never needs sieving: `n^2 + 1` and `n^2 + 2` are both `≢ 0
//! (mod 4)`. It is still divided out of the cofactor.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modmath::{factorize, hensel_lift_sq, is_square, isqrt, primes_up_to, sqrt_mod_p};
use crate::quadroots::Shift;

/// Largest `hi` the sieve accepts; keeps `n^2 + 2` inside `u64`.
pub const MAX_N: u64 = u32::MAX as u64;
pub const DEFAULT_SEGMENT: usize = 1 << 20;

pub fn is_squarefree(n: u128) -> bool {
    factorize(n).is_squarefree()
}

/// Smallest `B` with `B^3 >= hi^2 + 2`.
pub fn default_prime_bound(hi: u64) -> u64 {
    let target = hi as u128 * hi as u128 + 2;
    let mut b = (target as f64).cbrt() as u128;
    while b * b * b < target {
        b += 1;
    }
    while b > 1 && (b - 1).pow(3) >= target {
        b -= 1;
    }
    b as u64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SquarefreeFlags {
    pub lo: u64,
    pub hi: u64,
    /// `flags1[i]` is true when `(lo + i)^2 + 1` is square-free.
    pub flags1: Vec<bool>,
    pub flags2: Vec<bool>,
}

impl SquarefreeFlags {
    pub fn get(&self, n: u64) -> Option<(bool, bool)> {
        if n < self.lo || n > self.hi {
            return None;
        }
        let i = (n - self.lo) as usize;
        Some((self.flags1[i], self.flags2[i]))
    }

    /// Number of `n` in range with both values square-free.
    pub fn pair_count(&self) -> u64 {
        self.flags1
            .iter()
            .zip(&self.flags2)
            .filter(|(a, b)| **a && **b)
            .count() as u64
    }
}

/// Inner-loop counters, per polynomial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SieveStats {
    /// Progression hits `n ≡ r (mod p^2)`.
    pub square_marks: [u64; 2],
    /// Sum over sieving primes of `2 len / p^2 + 2`, per polynomial.
    pub mark_budget: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveOptions {
    pub segment_len: usize,
}

impl Default for SieveOptions {
    fn default() -> Self {
        SieveOptions {
            segment_len: DEFAULT_SEGMENT,
        }
    }
}

#[derive(Debug, Clone)]
struct PrimeRoots {
    p: u64,
    p2: u64,
    roots_p: Vec<u64>,
    roots_p2: Vec<u64>,
}

fn prepare(a: Shift, bound: u64) -> Vec<PrimeRoots> {
    primes_up_to(bound)
        .into_iter()
        .skip(1)
        .filter_map(|p| {
            let roots = sqrt_mod_p(-(a.value() as i128), p as u128).expect("odd prime");
            if roots.is_empty() {
                return None;
            }
            let lifted = roots
                .iter()
                .map(|&r| {
                    hensel_lift_sq(r as i128, a.value() as i128, p as u128)
                        .expect("simple root")
                        .residue as u64
                })
                .collect();
            Some(PrimeRoots {
                p,
                p2: p * p,
                roots_p: roots.into_iter().map(|r| r as u64).collect(),
                roots_p2: lifted,
            })
        })
        .collect()
}

/// First `n >= lo` with `n ≡ r (mod m)`.
fn first_hit(lo: u64, r: u64, m: u64) -> u64 {
    lo + (r + m - lo % m) % m
}

fn sieve_segment(a: Shift, plan: &[PrimeRoots], lo: u64, hi: u64) -> (Vec<bool>, u64) {
    let len = (hi - lo + 1) as usize;
    let av = a.value() as u64;
    let mut flags = vec![true; len];
    let mut marks = 0u64;
    for pr in plan {
        if pr.p2 > hi * hi + av {
            break;
        }
        for &r in &pr.roots_p2 {
            let mut n = first_hit(lo, r, pr.p2);
            while n <= hi {
                flags[(n - lo) as usize] = false;
                marks += 1;
                n += pr.p2;
            }
        }
    }
    let mut cof: Vec<u64> = (lo..=hi).map(|n| n * n + av).collect();
    // 2 divides n^2 + 1 for odd n and n^2 + 2 for even n, exactly once.
    let even_parity = match a {
        Shift::One => 1,
        Shift::Two => 0,
    };
    for n in (first_hit(lo, even_parity, 2)..=hi).step_by(2) {
        cof[(n - lo) as usize] /= 2;
    }
    for pr in plan {
        for &r in &pr.roots_p {
            let mut n = first_hit(lo, r, pr.p);
            while n <= hi {
                let i = (n - lo) as usize;
                if flags[i] {
                    cof[i] /= pr.p;
                }
                n += pr.p;
            }
        }
    }
    for (flag, &c) in flags.iter_mut().zip(&cof) {
        if *flag && c > 1 && is_square(c as u128).is_some() {
            *flag = false;
        }
    }
    (flags, marks)
}

pub fn sieve_flags(lo: u64, hi: u64, prime_bound: u64) -> Result<SquarefreeFlags> {
    sieve_flags_with(lo, hi, prime_bound, SieveOptions::default()).map(|(f, _)| f)
}

/// Sieves `[lo, hi]` in segments; segments run on the current rayon pool and
/// are concatenated in order, so the output does not depend on thread count.
pub fn sieve_flags_with(
    lo: u64,
    hi: u64,
    prime_bound: u64,
    options: SieveOptions,
) -> Result<(SquarefreeFlags, SieveStats)> {
    if lo == 0 || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    if hi > MAX_N {
        return Err(Error::out_of_range("hi", hi, "[1, 2^32 - 1]"));
    }
    let needed = default_prime_bound(hi);
    if prime_bound < needed {
        return Err(Error::InvalidArgument(format!(
            "prime bound {prime_bound} below the cube-root bound {needed} for hi = {hi}"
        )));
    }
    if options.segment_len == 0 {
        return Err(Error::InvalidArgument("segment length must be positive".into()));
    }
    // Primes with p^2 > hi^2 + 2 divide at most once and need no sieving.
    let effective = prime_bound.min(isqrt(hi as u128 * hi as u128 + 2) as u64);
    let plans = [prepare(Shift::One, effective), prepare(Shift::Two, effective)];

    let seg = options.segment_len as u64;
    let segments: Vec<(u64, u64)> = (0..=(hi - lo) / seg)
        .map(|k| {
            let s = lo + k * seg;
            (s, (s + seg - 1).min(hi))
        })
        .collect();
    let parts: Vec<_> = segments
        .par_iter()
        .map(|&(s, e)| {
            let (f1, m1) = sieve_segment(Shift::One, &plans[0], s, e);
            let (f2, m2) = sieve_segment(Shift::Two, &plans[1], s, e);
            (f1, f2, m1, m2)
        })
        .collect();

    let len = (hi - lo + 1) as f64;
    let mut stats = SieveStats::default();
    for (k, plan) in plans.iter().enumerate() {
        stats.mark_budget[k] = plan
            .iter()
            .map(|pr| 2.0 * len / (pr.p2 as f64) + 2.0)
            .sum();
    }
    let mut flags = SquarefreeFlags {
        lo,
        hi,
        flags1: Vec::with_capacity(len as usize),
        flags2: Vec::with_capacity(len as usize),
    };
    for (f1, f2, m1, m2) in parts {
        flags.flags1.extend(f1);
        flags.flags2.extend(f2);
        stats.square_marks[0] += m1;
        stats.square_marks[1] += m2;
    }
    Ok((flags, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_squarefree_examples() {
        assert!(!is_squarefree(50));
        assert!(is_squarefree(37));
        assert!(is_squarefree(1));
    }

    #[test]
    fn small_interval() {
        let f = sieve_flags(1, 10, 10).unwrap();
        let bad1: Vec<u64> = (1..=10).filter(|&n| !f.get(n).unwrap().0).collect();
        let bad2: Vec<u64> = (1..=10).filter(|&n| !f.get(n).unwrap().1).collect();
        assert_eq!(bad1, vec![7]);
        assert_eq!(bad2, vec![4, 5]);
        let f = sieve_flags(1, 1, 2).unwrap();
        assert_eq!(f.get(1), Some((true, true)));
    }

    #[test]
    fn bound_checks() {
        assert!(sieve_flags(1, 1000, 100).is_err());
        assert!(sieve_flags(1, 1000, 101).is_ok());
        assert!(sieve_flags(0, 10, 10).is_err());
        assert!(sieve_flags(5, 4, 10).is_err());
        assert_eq!(default_prime_bound(1000), 101);
        assert_eq!(default_prime_bound(1), 2);
    }

    #[test]
    fn cofactor_fallback_catches_large_squares() {
        // Each value has a square factor p^2 with p above the cube-root bound
        // of its own one-point interval, so only the square test sees it.
        for (n, a) in [(38u64, 1u8), (41, 1), (1744, 1), (19, 2), (24, 2), (71, 2)] {
            let f = sieve_flags(n, n, default_prime_bound(n)).unwrap();
            let (f1, f2) = f.get(n).unwrap();
            let flag = if a == 1 { f1 } else { f2 };
            assert!(!flag, "n = {n}, a = {a}");
        }
        let f = sieve_flags(1, 300, default_prime_bound(300)).unwrap();
        for n in 1..=300u64 {
            let (a, b) = f.get(n).unwrap();
            assert_eq!(a, is_squarefree((n * n + 1) as u128), "n = {n}");
            assert_eq!(b, is_squarefree((n * n + 2) as u128), "n = {n}");
        }
    }

    #[test]
    fn oracle_equivalence() {
        let hi = 100_000u64;
        let f = sieve_flags(1, hi, default_prime_bound(hi)).unwrap();
        for n in 1..=hi {
            let (a, b) = f.get(n).unwrap();
            assert_eq!(a, is_squarefree((n * n + 1) as u128), "n^2+1, n = {n}");
            assert_eq!(b, is_squarefree((n * n + 2) as u128), "n^2+2, n = {n}");
        }
    }

    #[test]
    fn segment_invariance() {
        let hi = 20_000;
        let b = default_prime_bound(hi);
        let whole = sieve_flags(1, hi, b).unwrap();
        for split in [1, 777, 10_000, 19_999] {
            let left = sieve_flags(1, split, b).unwrap();
            let right = sieve_flags(split + 1, hi, b).unwrap();
            let mut f1 = left.flags1.clone();
            f1.extend(&right.flags1);
            let mut f2 = left.flags2.clone();
            f2.extend(&right.flags2);
            assert_eq!(f1, whole.flags1);
            assert_eq!(f2, whole.flags2);
        }
        let (chunked, _) =
            sieve_flags_with(1, hi, b, SieveOptions { segment_len: 333 }).unwrap();
        assert_eq!(chunked, whole);
    }

    #[test]
    fn mark_budget() {
        let hi = 50_000;
        let (_, stats) = sieve_flags_with(
            1,
            hi,
            default_prime_bound(hi),
            SieveOptions {
                segment_len: hi as usize,
            },
        )
        .unwrap();
        for k in 0..2 {
            assert!(stats.square_marks[k] > 0);
            assert!(stats.square_marks[k] as f64 <= stats.mark_budget[k]);
        }
    }
}
