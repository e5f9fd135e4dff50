//! Roots of `n^2 + a ≡ 0 (mod q)` for `a ∈ {1, 2}` and the local count
//! `λ(q1, q2)`.
//!
//! Roots are reported in `[1, q]`, so the trivial modulus `q = 1` has the
//! single root `1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modmath::{self, crt, factorize, gcd, newton_step, ResidueClass};

/// Largest modulus accepted by [`roots_mod`].
pub const ROOTS_LIMIT: u128 = 1_000_000_000_000;
/// Non-coprime λ arguments are counted by brute force up to this product.
pub const BRUTE_LIMIT: u128 = 1_000_000;

/// Which of the two polynomials `n^2 + 1`, `n^2 + 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "u8")]
pub enum Shift {
    One = 1,
    Two = 2,
}

impl Shift {
    pub fn value(self) -> u128 {
        self as u128
    }
}

impl From<Shift> for u8 {
    fn from(s: Shift) -> u8 {
        s as u8
    }
}

impl TryFrom<u64> for Shift {
    type Error = Error;

    fn try_from(a: u64) -> Result<Self> {
        match a {
            1 => Ok(Shift::One),
            2 => Ok(Shift::Two),
            _ => Err(Error::InvalidArgument(format!("a must be 1 or 2, got {a}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootSet {
    pub a: Shift,
    pub modulus: u128,
    pub roots: Vec<u128>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Roots modulo `p^k` as residues in `[0, p^k)`.
fn roots_prime_power(a: Shift, p: u128, k: u32) -> Vec<u128> {
    if p == 2 {
        // n^2 + 1 and n^2 + 2 are never divisible by 4.
        return match (a, k) {
            (Shift::One, 1) => vec![1],
            (Shift::Two, 1) => vec![0],
            _ => Vec::new(),
        };
    }
    let neg_a = -(a.value() as i128);
    let mut out: Vec<u128> = modmath::sqrt_mod_p_unchecked(neg_a, p)
        .into_iter()
        .map(|r| {
            let mut s = r;
            let mut m = p;
            for _ in 1..k {
                m *= p;
                s = newton_step(s, a.value() as i128, m).expect("odd p never divides 2r");
            }
            s
        })
        .collect();
    out.sort_unstable();
    out
}

/// All solutions of `n^2 + a ≡ 0 (mod q)` in `[1, q]`, ascending.
pub fn roots_mod(a: Shift, q: u128) -> Result<RootSet> {
    if q == 0 || q > ROOTS_LIMIT {
        return Err(Error::out_of_range("modulus", q, "[1, 10^12]"));
    }
    let mut classes = vec![ResidueClass {
        residue: 0,
        modulus: 1,
    }];
    for &(p, k) in &factorize(q).factors {
        let local = roots_prime_power(a, p, k);
        if local.is_empty() {
            classes.clear();
            break;
        }
        let pk = p.pow(k);
        let mut next = Vec::with_capacity(classes.len() * local.len());
        for c in &classes {
            for &r in &local {
                next.push(crt(
                    *c,
                    ResidueClass {
                        residue: r,
                        modulus: pk,
                    },
                )?);
            }
        }
        classes = next;
    }
    let mut roots: Vec<u128> = classes
        .into_iter()
        .map(|c| if c.residue == 0 { q } else { c.residue })
        .collect();
    roots.sort_unstable();
    Ok(RootSet {
        a,
        modulus: q,
        roots,
    })
}

/// `λ(q1, q2)` together with its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LocalCount {
    pub q1: u128,
    pub q2: u128,
    pub value: u128,
}

/// Counts `n ∈ [1, q1 q2]` with `q1 | n^2 + 1` and `q2 | n^2 + 2` by direct
/// enumeration.
pub fn lambda_brute(q1: u128, q2: u128) -> u128 {
    let q = q1 * q2;
    (1..=q)
        .filter(|&n| (n * n + 1) % q1 == 0 && (n * n + 2) % q2 == 0)
        .count() as u128
}

pub fn lambda(q1: u128, q2: u128) -> Result<LocalCount> {
    if q1 == 0 || q2 == 0 {
        return Err(Error::InvalidArgument("moduli must be positive".into()));
    }
    let value = if gcd(q1, q2) == 1 {
        (roots_mod(Shift::One, q1)?.len() * roots_mod(Shift::Two, q2)?.len()) as u128
    } else if q1.checked_mul(q2).is_some_and(|q| q <= BRUTE_LIMIT) {
        lambda_brute(q1, q2)
    } else {
        return Err(Error::NotCoprime(q1 as i128, q2 as i128));
    };
    Ok(LocalCount { q1, q2, value })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct MultiplicativityReport {
    pub bound: u128,
    pub tuples_checked: usize,
    /// `(q1, q2, q3, q4, λ(q1 q2, q3 q4), λ(q1, q3) λ(q2, q4))` for every failure.
    pub violations: Vec<([u128; 4], u128, u128)>,
}

/// Checks `λ(q1 q2, q3 q4) = λ(q1, q3) λ(q2, q4)` over every admissible tuple
/// with `q1 q2 q3 q4 <= bound`. The left side is counted by brute force, the
/// right side through root sets and CRT.
pub fn verify_multiplicativity(bound: u128) -> MultiplicativityReport {
    let mut report = MultiplicativityReport {
        bound,
        ..Default::default()
    };
    for q1 in 1..=bound {
        for q2 in 1..=bound / q1 {
            if gcd(q1, q2) != 1 {
                continue;
            }
            let left = q1 * q2;
            for q3 in 1..=bound / left {
                for q4 in 1..=bound / (left * q3) {
                    let right = q3 * q4;
                    if gcd(q3, q4) != 1 || gcd(left, right) != 1 {
                        continue;
                    }
                    report.tuples_checked += 1;
                    let whole = lambda_brute(left, right);
                    // (q1 q2, q3 q4) = 1 makes both factors coprime pairs.
                    let split = lambda(q1, q3).map(|l| l.value).unwrap_or(0)
                        * lambda(q2, q4).map(|l| l.value).unwrap_or(0);
                    if whole != split {
                        report.violations.push(([q1, q2, q3, q4], whole, split));
                    }
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RootLawReport {
    pub dmax: u128,
    /// Number of admissible `d` (odd, square-free, every prime `≡ 1 mod 4`).
    pub admissible_checked: usize,
    /// Admissible `d` where `(|N1(d)|, |N1'(d)|) != (2^ω, 2^ω)`.
    pub violations: Vec<(u128, usize, usize)>,
    /// Square-free `d` outside the admissible class where the unconditioned
    /// law fails, e.g. even `d` or `d` divisible by a prime `≡ 3 mod 4`.
    pub unconditioned_failures: Vec<u128>,
}

/// `#N1(d) = #N1'(d) = 2^ω(d)` over square-free `d <= dmax`.
pub fn root_count_law(dmax: u128) -> Result<RootLawReport> {
    let mut report = RootLawReport {
        dmax,
        ..Default::default()
    };
    for d in 1..=dmax {
        let f = factorize(d);
        if !f.is_squarefree() {
            continue;
        }
        let expected = 1usize << f.omega();
        let c1 = roots_mod(Shift::One, d)?.len();
        let c2 = roots_mod(Shift::One, d * d)?.len();
        let admissible = f.primes().all(|p| p % 4 == 1);
        if admissible {
            report.admissible_checked += 1;
            if c1 != expected || c2 != expected {
                report.violations.push((d, c1, c2));
            }
        } else if c1 != expected || c2 != expected {
            report.unconditioned_failures.push(d);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::omega;
    use proptest::prelude::*;

    fn brute(a: u128, q: u128) -> Vec<u128> {
        (1..=q).filter(|&n| (n * n + a).is_multiple_of(q)).collect()
    }

    #[test]
    fn roots_examples() {
        assert_eq!(roots_mod(Shift::One, 169).unwrap().roots, vec![70, 99]);
        assert_eq!(roots_mod(Shift::Two, 9).unwrap().roots, vec![4, 5]);
        assert!(roots_mod(Shift::One, 3).unwrap().is_empty());
        assert_eq!(roots_mod(Shift::One, 1).unwrap().roots, vec![1]);
        assert_eq!(roots_mod(Shift::One, 2).unwrap().roots, vec![1]);
        assert_eq!(roots_mod(Shift::Two, 2).unwrap().roots, vec![2]);
        assert!(roots_mod(Shift::One, 4).unwrap().is_empty());
        assert!(roots_mod(Shift::Two, 0).is_err());
        assert!(roots_mod(Shift::Two, ROOTS_LIMIT + 1).is_err());
    }

    #[test]
    fn shift_parsing() {
        assert_eq!(Shift::try_from(1).unwrap(), Shift::One);
        assert!(Shift::try_from(3).is_err());
    }

    #[test]
    fn roots_complete_against_enumeration() {
        for q in 1..=10_000u128 {
            for a in [Shift::One, Shift::Two] {
                let rs = roots_mod(a, q).unwrap();
                assert_eq!(rs.roots, brute(a.value(), q), "a = {a:?}, q = {q}");
                assert!(rs.len() <= 1 << (omega(q) + 1));
                if q > 2 && !rs.is_empty() {
                    for &r in &rs.roots {
                        assert_ne!(r, q - r);
                        assert!(rs.roots.binary_search(&(q - r)).is_ok());
                    }
                }
            }
        }
    }

    #[test]
    fn large_modulus() {
        // 5 * 13 * 17 * 29 * 37 * 41 * 53, all ≡ 1 mod 4
        let q: u128 = 5 * 13 * 17 * 29 * 37 * 41 * 53;
        let rs = roots_mod(Shift::One, q).unwrap();
        assert_eq!(rs.len(), 128);
        for r in rs.roots {
            assert_eq!((r * r + 1) % q, 0);
        }
        let d: u128 = 5 * 13 * 17 * 29;
        let rs = roots_mod(Shift::One, d * d).unwrap();
        assert_eq!(rs.len(), 16);
        assert!(rs.roots.iter().all(|r| (r * r + 1) % (d * d) == 0));
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda(1, 1).unwrap().value, 1);
        assert_eq!(lambda(25, 1).unwrap().value, 2);
        assert_eq!(lambda(25, 9).unwrap().value, 4);
        assert_eq!(lambda_brute(25, 9), 4);
        assert_eq!(lambda(9, 1).unwrap().value, 0);
        // Non-coprime arguments fall back to enumeration.
        assert_eq!(lambda(5, 5).unwrap().value, lambda_brute(5, 5));
        assert!(lambda(2003, 2003).is_err());
    }

    #[test]
    fn lambda_bound_on_square_moduli() {
        for d1 in 1..40u128 {
            for d2 in 1..40u128 {
                if gcd(d1, d2) != 1 {
                    continue;
                }
                let l = lambda(d1 * d1, d2 * d2).unwrap().value;
                assert!(l <= 1 << (omega(d1) + omega(d2)));
            }
        }
    }

    #[test]
    fn multiplicativity() {
        let r = verify_multiplicativity(200);
        assert!(r.tuples_checked > 1000);
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert_eq!(lambda_brute(225, 1), lambda_brute(25, 1) * lambda_brute(9, 1));
    }

    #[test]
    fn root_law_examples() {
        let r = root_count_law(100).unwrap();
        assert!(r.violations.is_empty());
        assert_eq!(roots_mod(Shift::One, 5).unwrap().roots, vec![2, 3]);
        assert_eq!(roots_mod(Shift::One, 25).unwrap().roots, vec![7, 18]);
        assert_eq!(roots_mod(Shift::One, 65).unwrap().len(), 4);
        assert_eq!(roots_mod(Shift::One, 65 * 65).unwrap().len(), 4);
        // d = 2 and d = 3 break the unconditioned law.
        assert!(r.unconditioned_failures.contains(&2));
        assert!(r.unconditioned_failures.contains(&3));
        assert!(!r.unconditioned_failures.contains(&1));
    }

    proptest! {
        #[test]
        fn roots_are_roots(q in 1u128..1_000_000_000, two in any::<bool>()) {
            let a = if two { Shift::Two } else { Shift::One };
            let rs = roots_mod(a, q).unwrap();
            prop_assert!(rs.roots.windows(2).all(|w| w[0] < w[1]));
            for &r in &rs.roots {
                prop_assert!((1..=q).contains(&r));
                prop_assert_eq!((r * r + a.value()) % q, 0);
            }
        }
    }
}
