//! Coprime representations `x^2 + 2y^2 = n` and their map onto the roots of
//! `z^2 + 2 ≡ 0 (mod n)`.
//!
//! `beta(x, y)` is the class `z` with `z y ≡ x (mod n)`. A preimage of a root
//! `z` comes from a rational approximation `a/q` of `z/n` with `q <= sqrt(n)`
//! and `(zq - an)^2 < n`: setting `r = zq - an`, the value `r^2 + 2q^2` is a
//! positive multiple of `n` below `3n`, hence `n` or `2n`, and each case
//! yields a representation directly.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modmath::{gcd_i, is_square, isqrt, mod_inv};
use crate::quadroots::{roots_mod, Shift};

/// Below this, the preimage construction is not claimed to work.
pub const MIN_N: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Representation {
    pub x: u64,
    pub y: i64,
    pub n: u64,
}

impl Representation {
    pub fn new(x: u64, y: i64, n: u64) -> Result<Self> {
        let value = x as i128 * x as i128 + 2 * y as i128 * y as i128;
        if x == 0 || y == 0 || value != n as i128 || gcd_i(x as i128, y as i128) != 1 {
            return Err(Error::InvalidArgument(format!(
                "({x}, {y}) is not a coprime representation of {n}"
            )));
        }
        Ok(Representation { x, y, n })
    }

    /// Canonical order `(x, |y|, sign y)` with positive `y` first.
    fn sort_key(&self) -> (u64, u64, bool) {
        (self.x, self.y.unsigned_abs(), self.y < 0)
    }
}

/// Every `(x, y)` with `x >= 1`, `y != 0`, `gcd(x, y) = 1`, `x^2 + 2y^2 = n`,
/// in canonical order.
pub fn representations(n: u64) -> Vec<Representation> {
    let mut out = Vec::new();
    let ymax = isqrt(n as u128 / 2) as u64;
    for y in 1..=ymax {
        let rest = n as u128 - 2 * (y as u128) * (y as u128);
        if let Some(x) = is_square(rest) {
            if x >= 1 && gcd_i(x as i128, y as i128) == 1 {
                out.push(Representation {
                    x: x as u64,
                    y: y as i64,
                    n,
                });
                out.push(Representation {
                    x: x as u64,
                    y: -(y as i64),
                    n,
                });
            }
        }
    }
    out.sort_by_key(Representation::sort_key);
    out
}

/// The root `z ∈ [1, n]` with `z y ≡ x (mod n)`.
pub fn beta(rep: &Representation) -> Result<u64> {
    let n = rep.n as u128;
    let inv = mod_inv(rep.y as i128, n)?.residue;
    let z = (rep.x as u128 % n) * inv % n;
    Ok(if z == 0 { rep.n } else { z as u64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ApproxPair {
    pub a: i64,
    pub q: u64,
    pub z: u64,
    pub n: u64,
}

impl ApproxPair {
    /// `gcd(a, q) = 1`, `1 <= q <= sqrt(n)`, `|z/n - a/q| < 1/(q sqrt(n))`,
    /// the last one checked as `(zq - an)^2 < n`.
    pub fn holds(&self) -> bool {
        let r = self.z as i128 * self.q as i128 - self.a as i128 * self.n as i128;
        gcd_i(self.a as i128, self.q as i128) == 1
            && self.q >= 1
            && (self.q as u128).pow(2) <= self.n as u128
            && r * r < self.n as i128
    }
}

/// Last continued-fraction convergent `a/q` of `z/n` with `q <= sqrt(n)`.
pub fn dirichlet_approx(z: u64, n: u64) -> Result<ApproxPair> {
    if n < MIN_N || z == 0 || z > n {
        return Err(Error::InvalidArgument(format!(
            "need n >= {MIN_N} and 1 <= z <= n, got z = {z}, n = {n}"
        )));
    }
    let qmax = isqrt(n as u128) as i128;
    let (mut num, mut den) = (z as i128, n as i128);
    // (h_prev, k_prev) = (1, 0), (h, k) = (a0, 1)
    let (mut h_prev, mut k_prev) = (1i128, 0i128);
    let a0 = num / den;
    let (mut h, mut k) = (a0, 1i128);
    (num, den) = (den, num - a0 * den);
    while den != 0 {
        let t = num / den;
        let (h_next, k_next) = (t * h + h_prev, t * k + k_prev);
        if k_next > qmax {
            break;
        }
        (h_prev, k_prev, h, k) = (h, k, h_next, k_next);
        (num, den) = (den, num - t * den);
    }
    Ok(ApproxPair {
        a: h as i64,
        q: k as u64,
        z,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PreimageCase {
    /// `r^2 + 2q^2 = n`
    Single,
    /// `r^2 + 2q^2 = 2n`
    Double,
}

/// Every intermediate of the preimage construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PreimageTrace {
    pub z: u64,
    pub n: u64,
    pub a: i64,
    pub q: u64,
    pub r: i64,
    pub case: PreimageCase,
    pub x: u64,
    pub y: i64,
}

impl PreimageTrace {
    pub fn representation(&self) -> Representation {
        Representation {
            x: self.x,
            y: self.y,
            n: self.n,
        }
    }
}

/// A representation `(x, y)` of `n` with `beta(x, y) = z`.
///
/// # Panics
///
/// Panics if `r^2 + 2q^2` is neither `n` nor `2n`, or if the produced pair
/// fails to map back to `z`; either would be a bug, not an input error.
pub fn construct_preimage(z: u64, n: u64) -> Result<PreimageTrace> {
    if n < MIN_N {
        return Err(Error::out_of_range("n", n, "[5, inf)"));
    }
    if z == 0 || z > n || !(z as u128 * z as u128 + 2).is_multiple_of(n as u128) {
        return Err(Error::NotARoot(z as i128, 2, n as u128));
    }
    let approx = dirichlet_approx(z, n)?;
    let (a, q) = (approx.a as i128, approx.q as i128);
    let (zi, ni) = (z as i128, n as i128);
    let r = zi * q - a * ni;
    let s = r * r + 2 * q * q;
    assert!(0 < s && s < 3 * ni, "r^2 + 2q^2 = {s} outside (0, 3n)");
    let (case, x, y) = if s == ni {
        assert!(r != 0);
        if r > 0 {
            (PreimageCase::Single, r, q)
        } else {
            (PreimageCase::Single, -r, -q)
        }
    } else if s == 2 * ni {
        assert!(r != 0 && r % 2 == 0, "r = {r} must be even and nonzero");
        let r0 = r / 2;
        assert_eq!(gcd_i(r0, q), 1, "gcd(r0, q) must be 1");
        (PreimageCase::Double, q, -r0)
    } else {
        panic!("r^2 + 2q^2 = {s} is neither n = {n} nor 2n");
    };
    let trace = PreimageTrace {
        z,
        n,
        a: approx.a,
        q: approx.q,
        r: r as i64,
        case,
        x: x as u64,
        y: y as i64,
    };
    let rep = Representation::new(trace.x, trace.y, n).expect("constructed pair is a representation");
    assert_eq!(beta(&rep)?, z, "preimage does not map back to z");
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurjectivityFailure {
    pub n: u64,
    pub z: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SurjectivityReport {
    pub nmax: u64,
    pub moduli_with_roots: usize,
    pub roots_checked: usize,
    pub double_case_count: usize,
    pub failures: Vec<SurjectivityFailure>,
}

fn check_modulus(n: u64) -> (usize, usize, Vec<SurjectivityFailure>) {
    let roots = match roots_mod(Shift::Two, n as u128) {
        Ok(rs) => rs.roots,
        Err(e) => {
            return (
                0,
                0,
                vec![SurjectivityFailure {
                    n,
                    z: 0,
                    reason: e.to_string(),
                }],
            )
        }
    };
    let mut failures = Vec::new();
    let mut doubles = 0;
    for &z in &roots {
        let z = z as u64;
        let outcome = std::panic::catch_unwind(|| construct_preimage(z, n));
        match outcome {
            Ok(Ok(t)) => doubles += (t.case == PreimageCase::Double) as usize,
            Ok(Err(e)) => failures.push(SurjectivityFailure {
                n,
                z,
                reason: e.to_string(),
            }),
            Err(_) => failures.push(SurjectivityFailure {
                n,
                z,
                reason: "preimage construction panicked".into(),
            }),
        }
    }
    let mut image: Vec<u64> = representations(n)
        .iter()
        .filter_map(|rep| beta(rep).ok())
        .collect();
    image.sort_unstable();
    image.dedup();
    for &z in &roots {
        if image.binary_search(&(z as u64)).is_err() {
            failures.push(SurjectivityFailure {
                n,
                z: z as u64,
                reason: "root not in the image of beta".into(),
            });
        }
    }
    for &z in &image {
        if roots.binary_search(&(z as u128)).is_err() {
            failures.push(SurjectivityFailure {
                n,
                z,
                reason: "beta produced a non-root".into(),
            });
        }
    }
    (roots.len(), doubles, failures)
}

/// For every `n ∈ [5, nmax]`: each root has a constructed preimage that maps
/// back to it, and the image of `beta` over all representations is exactly
/// the root set.
pub fn verify_surjectivity(nmax: u64) -> SurjectivityReport {
    let per_n: Vec<_> = (MIN_N..=nmax.max(MIN_N - 1))
        .into_par_iter()
        .map(check_modulus)
        .collect();
    let mut report = SurjectivityReport {
        nmax,
        ..Default::default()
    };
    for (roots, doubles, failures) in per_n {
        report.moduli_with_roots += (roots > 0) as usize;
        report.roots_checked += roots;
        report.double_case_count += doubles;
        report.failures.extend(failures);
    }
    report
}

/// One representation per root: the canonically smallest preimage. `beta`
/// restricted to the result is a bijection onto the roots it covers.
pub fn select_bijective_subset(n: u64) -> Vec<Representation> {
    let mut seen = std::collections::HashSet::new();
    representations(n)
        .into_iter()
        .filter(|rep| beta(rep).is_ok_and(|z| seen.insert(z)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep(x: u64, y: i64, n: u64) -> Representation {
        Representation::new(x, y, n).unwrap()
    }

    #[test]
    fn representation_examples() {
        assert_eq!(representations(9), vec![rep(1, 2, 9), rep(1, -2, 9)]);
        assert_eq!(representations(3), vec![rep(1, 1, 3), rep(1, -1, 3)]);
        assert!(representations(4).is_empty());
        assert!(representations(1).is_empty());
        assert!(Representation::new(3, 0, 9).is_err());
        assert!(Representation::new(2, 2, 12).is_err());
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta(&rep(1, 2, 9)).unwrap(), 5);
        assert_eq!(beta(&rep(1, -2, 9)).unwrap(), 4);
        assert_eq!(beta(&rep(3, 1, 11)).unwrap(), 3);
    }

    #[test]
    fn dirichlet_examples() {
        let d = dirichlet_approx(4, 9).unwrap();
        assert_eq!((d.a, d.q), (1, 2));
        let d = dirichlet_approx(3, 11).unwrap();
        assert_eq!((d.a, d.q), (1, 3));
        let d = dirichlet_approx(5, 9).unwrap();
        assert_eq!((d.a, d.q), (1, 2));
        let d = dirichlet_approx(9, 9).unwrap();
        assert_eq!((d.a, d.q), (1, 1));
        assert!(dirichlet_approx(3, 4).is_err());
    }

    #[test]
    fn dirichlet_invariants_exhaustive() {
        (MIN_N..=10_000u64).into_par_iter().for_each(|n| {
            for z in 1..=n {
                let d = dirichlet_approx(z, n).unwrap();
                assert!(d.holds(), "z = {z}, n = {n}: {d:?}");
            }
        });
    }

    #[test]
    fn preimage_traces() {
        let t = construct_preimage(4, 9).unwrap();
        assert_eq!((t.r, t.case, t.x, t.y), (-1, PreimageCase::Single, 1, -2));
        let t = construct_preimage(3, 11).unwrap();
        assert_eq!((t.a, t.q, t.r), (1, 3, -2));
        assert_eq!((t.case, t.x, t.y), (PreimageCase::Double, 3, 1));
        let t = construct_preimage(5, 9).unwrap();
        assert_eq!((t.r, t.case, t.x, t.y), (1, PreimageCase::Single, 1, 2));
        assert!(construct_preimage(2, 9).is_err());
        assert!(construct_preimage(1, 3).is_err());
    }

    #[test]
    fn even_moduli_use_parity_argument() {
        // n = 6: z^2 + 2 ≡ 0 has roots 2, 4; both preimages exist.
        for z in [2u64, 4] {
            let t = construct_preimage(z, 6).unwrap();
            assert_eq!(beta(&t.representation()).unwrap(), z);
        }
    }

    #[test]
    fn surjectivity_small() {
        let r = verify_surjectivity(100);
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        let r = verify_surjectivity(1000);
        assert!(r.failures.is_empty());
        assert!(r.double_case_count > 0);
        // n = 5 has no roots.
        assert!(roots_mod(Shift::Two, 5).unwrap().is_empty());
        assert_eq!(verify_surjectivity(5).roots_checked, 0);
    }

    #[test]
    fn case_dichotomy_and_round_trip() {
        for n in MIN_N..=3000u64 {
            for z in roots_mod(Shift::Two, n as u128).unwrap().roots {
                let t = construct_preimage(z as u64, n).unwrap();
                let s = t.r as i128 * t.r as i128 + 2 * t.q as i128 * t.q as i128;
                match t.case {
                    PreimageCase::Single => assert_eq!(s, n as i128),
                    PreimageCase::Double => {
                        assert_eq!(s, 2 * n as i128);
                        assert_eq!(t.r % 2, 0);
                        assert_eq!(gcd_i((t.r / 2) as i128, t.q as i128), 1);
                    }
                }
            }
            for rep in representations(n) {
                let z = beta(&rep).unwrap() as u128;
                assert_eq!((z * z + 2) % n as u128, 0);
            }
        }
    }

    #[test]
    fn bijective_subsets() {
        assert_eq!(select_bijective_subset(9), vec![rep(1, 2, 9), rep(1, -2, 9)]);
        let s3 = select_bijective_subset(3);
        assert_eq!(s3, vec![rep(1, 1, 3), rep(1, -1, 3)]);
        assert_eq!(beta(&s3[0]).unwrap(), 1);
        assert_eq!(beta(&s3[1]).unwrap(), 2);
        assert!(select_bijective_subset(4).is_empty());
        for n in MIN_N..=2000u64 {
            let subset = select_bijective_subset(n);
            let mut image: Vec<u128> = subset.iter().map(|r| beta(r).unwrap() as u128).collect();
            image.sort_unstable();
            assert_eq!(image, roots_mod(Shift::Two, n as u128).unwrap().roots, "n = {n}");
        }
    }
}
