//! Exact integer and modular arithmetic.
//!
//! Everything here works on `u128`/`i128`. Values handed to [`factorize`] are
//! limited to 96 bits, which leaves room for the schoolbook `mul_mod` fallback
//! and covers `(n^2 + 2)^2` for every `n` the census accepts.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest input accepted by [`factorize`].
pub const FACTOR_LIMIT: u128 = 1 << 96;

/// Primes below this bound are removed by trial division before Pollard rho.
const TRIAL_BOUND: u64 = 1 << 12;

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn gcd_i(a: i128, b: i128) -> u128 {
    gcd(a.unsigned_abs(), b.unsigned_abs())
}

/// Least non-negative residue of `a` modulo `m`.
pub fn reduce(a: i128, m: u128) -> u128 {
    assert!(m > 0, "modulus must be positive");
    if m > i128::MAX as u128 {
        // Only reachable with |a| < m.
        return if a >= 0 { a as u128 } else { m - a.unsigned_abs() };
    }
    a.rem_euclid(m as i128) as u128
}

pub fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    let (a, b) = (a % m, b % m);
    if m <= u64::MAX as u128 {
        return a * b % m;
    }
    debug_assert!(m <= FACTOR_LIMIT << 1);
    // Horner over 32-bit limbs of b; every intermediate stays below 2^128
    // as long as m < 2^96.
    let mut acc = 0u128;
    for shift in (0..4).rev() {
        let limb = (b >> (32 * shift)) & 0xffff_ffff;
        acc = (acc << 32) % m;
        acc = (acc + a * limb % m) % m;
    }
    acc
}

pub fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Floor of the square root.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    // Correct the float estimate in both directions.
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

/// Returns the exact square root when `n` is a perfect square.
pub fn is_square(n: u128) -> Option<u128> {
    // Quadratic residues mod 64 reject most non-squares cheaply.
    const QR64: u64 = 0x0202_0212_0203_0213;
    if (QR64 >> (n & 63)) & 1 == 0 {
        return None;
    }
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// A residue class `residue mod modulus` with `0 <= residue < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ResidueClass {
    pub residue: u128,
    pub modulus: u128,
}

impl ResidueClass {
    pub fn new(value: i128, modulus: u128) -> Self {
        ResidueClass {
            residue: reduce(value, modulus),
            modulus,
        }
    }
}

/// Inverse of `n` modulo `q`; `q = 1` gives 0.
pub fn mod_inv(n: i128, q: u128) -> Result<ResidueClass> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let a = reduce(n, q);
    if q == 1 {
        return Ok(ResidueClass {
            residue: 0,
            modulus: 1,
        });
    }
    // Extended Euclid on (a, q), tracking the coefficient of a modulo q.
    let (mut r0, mut r1) = (q, a);
    let (mut t0, mut t1) = (0u128, 1u128);
    while r1 != 0 {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        let next = (t0 + q - mul_mod(quot, t1, q)) % q;
        (t0, t1) = (t1, next);
    }
    if r0 != 1 {
        return Err(Error::NotCoprime(n, q as i128));
    }
    Ok(ResidueClass {
        residue: t0,
        modulus: q,
    })
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(TRIAL_BOUND))
}

/// All primes `<= n`, ascending.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Miller-Rabin with fixed bases. Deterministic below 3.3e24; above that the
/// twenty prime bases make a false positive astronomically unlikely, which is
/// adequate since no certificate is claimed.
pub fn is_prime(n: u128) -> bool {
    const BASES: [u128; 20] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    ];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let rounds = if n < 3_317_044_064_679_887_385_961_981 {
        12
    } else {
        20
    };
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for &a in &BASES[..rounds] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard rho. `n` must be odd, composite and not a
/// prime power of a small prime.
fn pollard_brent(n: u128) -> u128 {
    let mut c = 1u128;
    loop {
        let f = |x: u128| (mul_mod(x, x, n) + c) % n;
        let (mut y, mut r, mut q, mut g) = (2u128, 1u64, 1u128, 1u128);
        let mut x = y;
        let mut ys = y;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            // The batch overshot; replay one step at a time.
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn split_into(n: u128, out: &mut Vec<u128>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    if let Some(r) = is_square(n) {
        split_into(r, out);
        split_into(r, out);
        return;
    }
    let d = pollard_brent(n);
    split_into(d, out);
    split_into(n / d, out);
}

/// Prime factorization with primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub value: u128,
    pub factors: Vec<(u128, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn mobius(&self) -> i8 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn tau(&self) -> u128 {
        self.factors.iter().map(|&(_, e)| e as u128 + 1).product()
    }
}

/// Factors `1 <= n <= 2^96`.
///
/// # Panics
///
/// Panics when `n` is zero or exceeds [`FACTOR_LIMIT`].
pub fn factorize(n: u128) -> Factorization {
    assert!(
        (1..=FACTOR_LIMIT).contains(&n),
        "factorize: {n} outside [1, 2^96]"
    );
    let mut rest = n;
    let mut factors: Vec<(u128, u32)> = Vec::new();
    for &p in small_primes() {
        let p = p as u128;
        if p * p > rest {
            break;
        }
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if rest > 1 {
        let bound = TRIAL_BOUND as u128;
        if rest < bound * bound {
            factors.push((rest, 1));
        } else {
            let mut big = Vec::new();
            split_into(rest, &mut big);
            big.sort_unstable();
            for p in big {
                match factors.last_mut() {
                    Some((q, e)) if *q == p => *e += 1,
                    _ => factors.push((p, 1)),
                }
            }
        }
    }
    Factorization { value: n, factors }
}

pub fn mobius(n: u128) -> i8 {
    factorize(n).mobius()
}

pub fn omega(n: u128) -> u32 {
    factorize(n).omega()
}

pub fn tau(n: u128) -> u128 {
    factorize(n).tau()
}

fn check_odd_prime(p: u128) -> Result<()> {
    if p.is_multiple_of(2) || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    Ok(())
}

/// Euler's criterion without the primality check.
pub(crate) fn legendre_unchecked(a: i128, p: u128) -> i8 {
    let a = reduce(a, p);
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

pub fn legendre(a: i128, p: u128) -> Result<i8> {
    check_odd_prime(p)?;
    Ok(legendre_unchecked(a, p))
}

/// Tonelli-Shanks for a quadratic residue `a` modulo an odd prime `p`.
fn tonelli_shanks(a: u128, p: u128) -> u128 {
    if p % 4 == 3 {
        return pow_mod(a, (p + 1) / 4, p);
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let mut z = 2u128;
    while legendre_unchecked(z as i128, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

pub(crate) fn sqrt_mod_p_unchecked(a: i128, p: u128) -> Vec<u128> {
    let a = reduce(a, p);
    if a == 0 {
        return vec![0];
    }
    if legendre_unchecked(a as i128, p) != 1 {
        return Vec::new();
    }
    let r = tonelli_shanks(a, p);
    let (lo, hi) = if r < p - r { (r, p - r) } else { (p - r, r) };
    vec![lo, hi]
}

/// All square roots of `a` modulo an odd prime, ascending.
pub fn sqrt_mod_p(a: i128, p: u128) -> Result<Vec<u128>> {
    check_odd_prime(p)?;
    Ok(sqrt_mod_p_unchecked(a, p))
}

/// One Newton step for `s^2 + a` taking a root modulo `m` to a root modulo
/// `m * p` (with `p | m`). Requires `gcd(2 s, p) = 1`.
pub(crate) fn newton_step(s: u128, a: i128, next_modulus: u128) -> Option<u128> {
    let value = (mul_mod(s, s, next_modulus) + reduce(a, next_modulus)) % next_modulus;
    let inv = mod_inv((2 * s) as i128, next_modulus).ok()?.residue;
    let correction = mul_mod(value, inv, next_modulus);
    Some((s + next_modulus - correction) % next_modulus)
}

/// Lifts a root `r` of `s^2 + a` modulo the odd prime `p` to the unique root
/// modulo `p^2` congruent to `r`.
pub fn hensel_lift_sq(r: i128, a: i128, p: u128) -> Result<ResidueClass> {
    check_odd_prime(p)?;
    let r = reduce(r, p);
    if !(mul_mod(r, r, p) + reduce(a, p)).is_multiple_of(p) {
        return Err(Error::NotARoot(r as i128, reduce(a, p), p));
    }
    if r == 0 {
        return Err(Error::InvalidArgument(format!(
            "derivative vanishes: {p} divides both the root and {a}"
        )));
    }
    let p2 = p * p;
    let s = newton_step(r, a, p2).expect("2r is a unit modulo p^2");
    Ok(ResidueClass {
        residue: s,
        modulus: p2,
    })
}

/// Chinese remainder combination of two classes with coprime moduli.
pub fn crt(r1: ResidueClass, r2: ResidueClass) -> Result<ResidueClass> {
    let (m1, m2) = (r1.modulus, r2.modulus);
    if gcd(m1, m2) != 1 {
        return Err(Error::NotCoprime(m1 as i128, m2 as i128));
    }
    let modulus = m1
        .checked_mul(m2)
        .ok_or_else(|| Error::out_of_range("modulus product", "overflow", "< 2^128"))?;
    if m1 == 1 {
        return Ok(ResidueClass {
            residue: r2.residue % m2,
            modulus,
        });
    }
    let inv = mod_inv(m1 as i128, m2)?.residue;
    let diff = (r2.residue % m2 + m2 - r1.residue % m2) % m2;
    let k = mul_mod(diff, inv, m2);
    Ok(ResidueClass {
        residue: r1.residue % m1 + m1 * k,
        modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(mut n: u128) -> Vec<(u128, u32)> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).factors.is_empty());
        assert_eq!(factorize(4901).factors, vec![(13, 2), (29, 1)]);
        assert_eq!(factorize(50).factors, vec![(2, 1), (5, 2)]);
    }

    #[test]
    fn factorize_matches_trial_division() {
        for n in 1..20_000u128 {
            assert_eq!(factorize(n).factors, trial_division(n), "n = {n}");
        }
        // Values of the shape the census produces, around 10^14.
        for n in [9_999_999u128, 7_071_067, 3_162_277] {
            for a in [1, 2] {
                let v = n * n + a;
                assert_eq!(factorize(v).factors, trial_division(v));
            }
        }
    }

    #[test]
    fn factorize_large_semiprimes() {
        let p = 1_000_000_007u128;
        let q = 998_244_353u128;
        assert_eq!(factorize(p * q).factors, vec![(q, 1), (p, 1)]);
        let big = 18_446_744_073_709_551_557u128; // largest prime below 2^64
        assert_eq!(factorize(big * 3).factors, vec![(3, 1), (big, 1)]);
        let r = 4_294_967_291u128; // prime below 2^32
        assert_eq!(factorize(r * r * p).factors, vec![(p, 1), (r, 2)]);
        let s = 281_474_976_710_597u128; // prime below 2^48
        assert_eq!(factorize(s * s).factors, vec![(s, 2)]);
    }

    #[test]
    fn multiplicative_functions() {
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(12), 0);
        assert_eq!(mobius(30), -1);
        assert_eq!(omega(30), 3);
        assert_eq!(tau(30), 8);
        assert_eq!(tau(1), 1);
    }

    #[test]
    fn squarefree_identity_via_mobius() {
        // sum over d^2 | n of mu(d) equals mu(n)^2
        for n in 1..=100_000u128 {
            let mut s = 0i32;
            let mut d = 1u128;
            while d * d <= n {
                if n % (d * d) == 0 {
                    s += mobius(d) as i32;
                }
                d += 1;
            }
            let mu = mobius(n) as i32;
            assert_eq!(s, mu * mu, "n = {n}");
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(-1, 5), Ok(1));
        assert_eq!(legendre(-1, 7), Ok(-1));
        assert_eq!(legendre(-2, 11), Ok(1));
        assert_eq!(legendre(22, 11), Ok(0));
        assert!(legendre(3, 2).is_err());
        assert!(legendre(3, 15).is_err());
    }

    #[test]
    fn mod_inv_examples() {
        assert_eq!(mod_inv(3, 5).unwrap().residue, 2);
        assert_eq!(mod_inv(10, 13).unwrap().residue, 4);
        assert_eq!(mod_inv(2, 4), Err(Error::NotCoprime(2, 4)));
        assert_eq!(mod_inv(7, 1).unwrap().residue, 0);
        assert_eq!(mod_inv(-3, 5).unwrap().residue, 3);
    }

    #[test]
    fn mod_inv_exhaustive() {
        for q in 1..=500u128 {
            for n in 0..q {
                match mod_inv(n as i128, q) {
                    Ok(inv) => {
                        assert_eq!(gcd(n, q), 1);
                        assert!(inv.residue < q);
                        assert_eq!(n * inv.residue % q, 1 % q);
                    }
                    Err(_) => assert_ne!(gcd(n, q), 1),
                }
            }
        }
    }

    #[test]
    fn sqrt_mod_p_examples() {
        assert_eq!(sqrt_mod_p(-1, 13).unwrap(), vec![5, 8]);
        assert_eq!(sqrt_mod_p(-2, 11).unwrap(), vec![3, 8]);
        assert!(sqrt_mod_p(-1, 7).unwrap().is_empty());
        assert_eq!(sqrt_mod_p(0, 7).unwrap(), vec![0]);
        assert!(sqrt_mod_p(-1, 9).is_err());
        assert!(sqrt_mod_p(-1, 2).is_err());
    }

    #[test]
    fn sqrt_count_matches_legendre() {
        for p in primes_up_to(10_000).into_iter().skip(1) {
            let p = p as u128;
            for a in [-1i128, -2] {
                let roots = sqrt_mod_p(a, p).unwrap();
                let l = legendre(a, p).unwrap();
                assert_eq!(roots.len() as i32, 1 + l as i32, "p = {p}, a = {a}");
                for r in roots {
                    assert_eq!(reduce(r as i128 * r as i128 - a, p), 0);
                }
            }
        }
    }

    #[test]
    fn hensel_examples() {
        assert_eq!(hensel_lift_sq(5, 1, 13).unwrap().residue, 70);
        assert_eq!(hensel_lift_sq(4, 2, 3).unwrap().residue, 4);
        assert_eq!(hensel_lift_sq(2, 1, 5).unwrap().residue, 7);
        assert!(hensel_lift_sq(1, 1, 5).is_err());
        assert_eq!(hensel_lift_sq(3, 1, 5).unwrap().residue, 18);
        assert!(hensel_lift_sq(2, 1, 4).is_err());
    }

    #[test]
    fn hensel_lifts_are_roots() {
        for p in primes_up_to(2_000).into_iter().skip(1) {
            let p = p as u128;
            for a in [1i128, 2] {
                for r in sqrt_mod_p(-a, p).unwrap() {
                    let s = hensel_lift_sq(r as i128, a, p).unwrap();
                    assert_eq!(s.modulus, p * p);
                    assert_eq!((s.residue * s.residue + a as u128) % (p * p), 0);
                    assert_eq!(s.residue % p, r);
                }
            }
        }
    }

    #[test]
    fn crt_examples() {
        let c = |r, m| ResidueClass::new(r, m);
        assert_eq!(crt(c(2, 3), c(3, 5)).unwrap(), c(8, 15));
        assert_eq!(crt(c(0, 1), c(4, 9)).unwrap(), c(4, 9));
        assert!(crt(c(1, 4), c(1, 6)).is_err());
    }

    #[test]
    fn square_detection() {
        assert_eq!(is_square(49), Some(7));
        assert_eq!(is_square(4901), None);
        assert_eq!(is_square(0), Some(0));
        assert_eq!(is_square(1), Some(1));
        let big = (1u128 << 60) + 12345;
        assert_eq!(is_square(big * big), Some(big));
        assert_eq!(is_square(big * big + 1), None);
        assert_eq!(is_square(big * big - 1), None);
    }

    proptest! {
        #[test]
        fn factorize_is_multiplicative(a in 1u128..(1 << 40), b in 1u128..(1 << 40)) {
            prop_assume!(gcd(a, b) == 1);
            let fa = factorize(a);
            let fb = factorize(b);
            let mut merged: Vec<_> = fa.factors.iter().chain(&fb.factors).copied().collect();
            merged.sort_unstable();
            let fab = factorize(a * b);
            prop_assert_eq!(&fab.factors, &merged);
            prop_assert_eq!(fab, factorize(a * b));
        }

        #[test]
        fn factorization_product_is_value(n in 1u128..(1u128 << 80)) {
            let f = factorize(n);
            let prod: u128 = f.factors.iter().map(|&(p, e)| p.pow(e)).product();
            prop_assert_eq!(prod, n);
            prop_assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(f.primes().all(is_prime));
        }

        #[test]
        fn mul_mod_matches_wide_path(a in any::<u128>(), b in any::<u128>(), m in (1u128 << 64)..(1u128 << 96)) {
            // (a mod m)(b mod m) mod m via splitting a into 16-bit chunks
            let (a, b) = (a % m, b % m);
            let mut expect = 0u128;
            for i in (0..8).rev() {
                let chunk = (a >> (16 * i)) & 0xffff;
                for _ in 0..16 { expect = (expect * 2) % m; }
                expect = (expect + (chunk * b) % m) % m;
            }
            prop_assert_eq!(mul_mod(a, b, m), expect);
        }
    }
}
