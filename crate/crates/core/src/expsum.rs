//! Exponential sums: `e(t)`, the sawtooth `ψ`, modular-inverse reciprocity,
//! incomplete Kloosterman sums, the `Θ_m` sum computed two ways, and the
//! rational identity relating `ψ`-sums over roots mod `d^2` and mod `d`.
//!
//! Phases of the form `integer / integer` are reduced mod 1 exactly before
//! conversion to `f64`. `sqrt(X)` is carried as an integer part and a
//! fractional part so `m sqrt(X) / d` loses nothing to large arguments.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modmath::{gcd_i, is_square, isqrt, mobius, mod_inv};
use crate::quadroots::{roots_mod, Shift};
use crate::representation_map::{select_bijective_subset, MIN_N};

type Q = Ratio<i128>;

/// `exp(2πit)`.
pub fn e(t: f64) -> Complex64 {
    let f = t - t.floor();
    Complex64::from_polar(1.0, 2.0 * PI * f)
}

/// `e(num / den)` with the fraction reduced mod 1 in integers first.
pub fn e_frac(num: i128, den: i128) -> Complex64 {
    assert!(den != 0, "zero denominator");
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let r = num.rem_euclid(den);
    Complex64::from_polar(1.0, 2.0 * PI * (r as f64 / den as f64))
}

/// `{t} - 1/2`.
pub fn psi(t: f64) -> f64 {
    t - t.floor() - 0.5
}

pub fn psi_rational(t: Q) -> Q {
    t - t.floor() - Q::new(1, 2)
}

/// `-Σ_{1<=|m|<=M} e(mt) / (2πim) = -Σ_{m=1}^{M} sin(2πmt) / (πm)`.
pub fn psi_truncated(t: f64, big_m: u32) -> Result<f64> {
    if big_m < 2 {
        return Err(Error::out_of_range("M", big_m, "[2, inf)"));
    }
    let f = t - t.floor();
    let mut acc = 0.0;
    for m in (1..=big_m).rev() {
        let mf = m as f64 * f;
        let phase = mf - mf.floor();
        acc += (2.0 * PI * phase).sin() / m as f64;
    }
    Ok(-acc / PI)
}

/// Mean of `|ψ(t) - psi_truncated(t, M)|` over `points` uniform samples.
pub fn truncation_error(big_m: u32, points: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..points {
        let t: f64 = rng.gen();
        total += (psi(t) - psi_truncated(t, big_m)?).abs();
    }
    Ok(total / points as f64)
}

fn inv_or_zero(x: i128, modulus: u128) -> i128 {
    mod_inv(x, modulus).map(|c| c.residue as i128).unwrap_or(0)
}

/// `inv(A)_{|B|} / B + inv(B)_{|A|} / A - 1/(AB)` is an integer.
pub fn reciprocity_check(a: i64, b: i64) -> Result<bool> {
    if a == 0 || b == 0 || gcd_i(a as i128, b as i128) != 1 {
        return Err(Error::NotCoprime(a as i128, b as i128));
    }
    let (a, b) = (a as i128, b as i128);
    let inv_a = mod_inv(a, b.unsigned_abs())?.residue as i128;
    let inv_b = mod_inv(b, a.unsigned_abs())?.residue as i128;
    let diff = Q::new(inv_a, b) + Q::new(inv_b, a) - Q::new(1, a * b);
    Ok(diff.is_integer())
}

/// `Σ_{α<=x<=β, (x,r)=1} e(h inv(x)_{|r|} / r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KloostermanSpec {
    pub r: i64,
    pub h: i64,
    pub alpha: f64,
    pub beta: f64,
}

impl KloostermanSpec {
    pub fn new(r: i64, h: i64, alpha: f64, beta: f64) -> Result<Self> {
        if r == 0 || h == 0 {
            return Err(Error::InvalidArgument("r and h must be nonzero".into()));
        }
        let len = beta - alpha;
        if !(len > 0.0 && len <= 2.0 * r.unsigned_abs() as f64) {
            return Err(Error::out_of_range("beta - alpha", len, "(0, 2|r|]"));
        }
        Ok(KloostermanSpec { r, h, alpha, beta })
    }
}

fn kloosterman_range(r: i64, h: i64, lo: i64, hi: i64) -> Complex64 {
    let modulus = r.unsigned_abs() as u128;
    let mut acc = Complex64::new(0.0, 0.0);
    for x in lo..=hi {
        if gcd_i(x as i128, r as i128) != 1 {
            continue;
        }
        let inv = inv_or_zero(x as i128, modulus);
        acc += e_frac((h as i128 * inv) % modulus.max(1) as i128, r as i128);
    }
    acc
}

pub fn kloosterman_incomplete(spec: &KloostermanSpec) -> Complex64 {
    kloosterman_range(
        spec.r,
        spec.h,
        spec.alpha.ceil() as i64,
        spec.beta.floor() as i64,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeilRow {
    pub r: i64,
    pub h: i64,
    pub alpha: f64,
    pub beta: f64,
    pub abs_k: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeilReport {
    pub rmax: u64,
    pub samples: usize,
    pub seed: u64,
    pub max_ratio: f64,
    pub worst: Option<WeilRow>,
}

/// `|K| / (|r|^0.6 gcd(r, h)^0.5)` over seeded random incomplete sums.
pub fn weil_ratio_study(rmax: u64, samples: usize, seed: u64) -> Result<WeilReport> {
    if rmax < 2 {
        return Err(Error::out_of_range("rmax", rmax, "[2, inf)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = WeilReport {
        rmax,
        samples,
        seed,
        max_ratio: 0.0,
        worst: None,
    };
    for _ in 0..samples {
        let r_abs = rng.gen_range(2..=rmax as i64);
        let r = if rng.gen_bool(0.5) { r_abs } else { -r_abs };
        let h = loop {
            let h = rng.gen_range(-r_abs..=r_abs);
            if h != 0 {
                break h;
            }
        };
        let alpha = rng.gen_range(-(r_abs as f64)..r_abs as f64);
        let len = rng.gen_range(0.0..2.0 * r_abs as f64).max(f64::MIN_POSITIVE);
        let spec = KloostermanSpec::new(r, h, alpha, alpha + len)?;
        let abs_k = kloosterman_incomplete(&spec).norm();
        let g = gcd_i(r as i128, h as i128) as f64;
        let ratio = abs_k / ((r_abs as f64).powf(0.6) * g.sqrt());
        if ratio > report.max_ratio {
            report.max_ratio = ratio;
            report.worst = Some(WeilRow {
                r,
                h,
                alpha,
                beta: alpha + len,
                abs_k,
                ratio,
            });
        }
    }
    Ok(report)
}

/// Largest `|K(r, h; 1..r) - μ(r)|` over square-free `r <= rmax` and
/// `1 <= h < r` (or `h = 1` for `r = 1`) coprime to `r`.
pub fn ramanujan_check(rmax: u64) -> f64 {
    let mut worst = 0.0f64;
    for r in 1..=rmax as i64 {
        let mu = mobius(r as u128);
        if mu == 0 {
            continue;
        }
        for h in 1..r.max(2) {
            if gcd_i(h as i128, r as i128) != 1 {
                continue;
            }
            let k = kloosterman_range(r, h, 1, r);
            worst = worst.max((k - Complex64::new(mu as f64, 0.0)).norm());
        }
    }
    worst
}

/// `(η1(v), η2(v))` for the `u`-range of `K_{v,m}`.
pub fn eta_bounds(v: i64, d2: f64) -> (f64, f64) {
    let v2 = (v as f64).powi(2);
    let eta1 = (d2 - 2.0 * v2).max(0.0).sqrt();
    let eta2 = v2.min(2.0 * d2 - 2.0 * v2).max(0.0).sqrt();
    (eta1, eta2)
}

/// `K_{v,m}(t) = Σ_{η1(v)<=u<=t, (u,v)=1} e(m inv(u)_{|v|} / v)`, `u >= 1`.
pub fn k_vm(v: i64, m: i64, t: f64, d2: f64) -> Result<Complex64> {
    if v == 0 {
        return Err(Error::InvalidArgument("v must be nonzero".into()));
    }
    let (eta1, eta2) = eta_bounds(v, d2);
    if !(eta1 <= t && t <= eta2) {
        return Err(Error::out_of_range(
            "t",
            t,
            "[eta1(v), eta2(v)]",
        ));
    }
    let lo = (eta1.ceil() as i64).max(1);
    Ok(kloosterman_range(v, m, lo, t.floor() as i64))
}

/// `Θ_m` parameters: `d2` runs over integers in `[D2, 2 D2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaSpec {
    pub d2: f64,
    pub m: i64,
    pub x: u64,
}

impl ThetaSpec {
    pub fn new(d2: f64, m: i64, x: u64) -> Result<Self> {
        if d2.is_nan() || d2 < 0.5 || d2.is_infinite() {
            return Err(Error::out_of_range("D2", d2, "[1/2, inf)"));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("m must be nonzero".into()));
        }
        if x == 0 {
            return Err(Error::out_of_range("X", x, "[1, inf)"));
        }
        Ok(ThetaSpec { d2, m, x })
    }

    fn moduli(&self) -> std::ops::Range<u64> {
        let lo = self.d2.ceil() as u64;
        let hi = (2.0 * self.d2).ceil() as u64;
        lo..hi
    }
}

/// `sqrt(X)` as `(s, f)` with `s = floor(sqrt X)`, `f ∈ [0, 1)`.
fn split_sqrt(x: u64) -> (i128, f64) {
    let s = isqrt(x as u128);
    let f = (x as f64).sqrt() - s as f64;
    // Guard against rounding pushing f out of [0, 1).
    (s as i128, f.clamp(0.0, 1.0 - f64::EPSILON))
}

/// `m sqrt(X) / d` mod 1 plus an exact rational `num / den`.
fn phase_with_sqrt(sqrt_x: (i128, f64), m: i64, d: i128, num: i128, den: i128) -> f64 {
    let (s, f) = sqrt_x;
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    // m s / d + num / den over the common denominator d * den
    let big = d * den;
    let int_part = ((m as i128 * s).rem_euclid(d) * den + num.rem_euclid(den) * d).rem_euclid(big);
    let t = int_part as f64 / big as f64 + m as f64 * f / d as f64;
    t - t.floor()
}

fn direct_term(spec: &ThetaSpec, sqrt_x: (i128, f64), d: u64) -> Complex64 {
    let roots = roots_mod(Shift::Two, d as u128).expect("d within root-finding range");
    roots
        .roots
        .iter()
        .map(|&n| {
            let t = phase_with_sqrt(sqrt_x, spec.m, d as i128, -(n as i128) * spec.m as i128, d as i128);
            Complex64::from_polar(1.0, 2.0 * PI * t)
        })
        .sum()
}

/// `Σ_{D2<=d<2D2} e(m sqrt(X) / d) Σ_{n ∈ N2(d)} e(-nm / d)`.
pub fn theta_direct(spec: &ThetaSpec) -> Complex64 {
    let sqrt_x = split_sqrt(spec.x);
    spec.moduli().map(|d| direct_term(spec, sqrt_x, d)).sum()
}

/// `Θ_m` with each root replaced by its representation `(u, v)`:
/// `0 < u < |v|` uses `u / (v d) - inv(u)_{|v|} / v`, `0 < |v| < u` uses
/// `-2v / (u d) + inv(v)_u / u` for `n/d`. Moduli below 5 (where `u = |v|`
/// or no representation exists) contribute their direct terms.
pub fn theta_via_reps(spec: &ThetaSpec) -> Complex64 {
    let sqrt_x = split_sqrt(spec.x);
    let m = spec.m as i128;
    let mut acc = Complex64::new(0.0, 0.0);
    for d in spec.moduli() {
        if d < MIN_N {
            acc += direct_term(spec, sqrt_x, d);
            continue;
        }
        let di = d as i128;
        for rep in select_bijective_subset(d) {
            let (u, v) = (rep.x as i128, rep.y as i128);
            // phase = m sqrt(X)/d - m n/d
            let (num, den) = if u < v.abs() {
                let inv = inv_or_zero(u, v.unsigned_abs());
                (m * (inv * di - u), v * di)
            } else {
                let inv = inv_or_zero(v, u as u128);
                (m * (2 * v - inv * di), u * di)
            };
            let t = phase_with_sqrt(sqrt_x, spec.m, di, num, den);
            acc += Complex64::from_polar(1.0, 2.0 * PI * t);
        }
    }
    acc
}

/// Seeded specs with `D2 <= d2max`, `1 <= |m| <= mmax`, `X <= xmax`.
pub fn random_theta_specs(count: usize, d2max: u64, mmax: i64, xmax: u64, seed: u64) -> Vec<ThetaSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d2 = rng.gen_range(1..=d2max) as f64;
            let m = loop {
                let m = rng.gen_range(-mmax..=mmax);
                if m != 0 {
                    break m;
                }
            };
            let x = rng.gen_range(1..=xmax);
            ThetaSpec { d2, m, x }
        })
        .collect()
}

/// Both sides of the identity
/// `Σ_{n ∈ N1'(d)} ψ((X - n)/d^2) = Σ_{n ∈ N1(d)} (X/d^2 - sqrt(X)/d) + Σ_{n ∈ N1(d)} ψ((sqrt(X) - n)/d)`
/// for perfect-square `X` and `d > sqrt(X)`.
///
/// Pairing `n` with `d^2 - n` (resp. `d - n`) gives each side in closed
/// form as `k (X/d^2 - 1) + c`, where `k` counts its roots and `c` counts
/// roots above `X` (resp. `sqrt(X)`): for those, `ψ` of a negative argument
/// is one more than the argument minus a half. The identity therefore holds
/// exactly when `k' (X/d^2 - 1) + c' = k (X/d^2 - 1) + c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrehodCheck {
    pub d1: u64,
    pub x: u64,
    pub lhs: Q,
    pub rhs: Q,
    pub equal: bool,
    /// `#N1'(d)`
    pub square_roots: u64,
    /// `#N1(d)`
    pub roots: u64,
    /// `#{n ∈ N1'(d) : n > X}`
    pub square_roots_above: u64,
    /// `#{n ∈ N1(d) : n > sqrt(X)}`
    pub roots_above: u64,
}

impl PrehodCheck {
    /// Both sides match their closed forms.
    pub fn closed_forms_hold(&self) -> bool {
        let d = self.d1 as i128;
        let c = Q::new(self.x as i128, d * d) - 1;
        let side = |k: u64, above: u64| c * k as i128 + Q::from(above as i128);
        self.lhs == side(self.square_roots, self.square_roots_above)
            && self.rhs == side(self.roots, self.roots_above)
    }
}

pub fn prehod_check(d1: u64, x: u64) -> Result<PrehodCheck> {
    let s = is_square(x as u128)
        .ok_or_else(|| Error::InvalidArgument(format!("X = {x} is not a perfect square")))? as i128;
    if (d1 as i128) <= s {
        return Err(Error::out_of_range("d1", d1, "(sqrt(X), inf)"));
    }
    let d = d1 as i128;
    let xi = x as i128;
    let mod_d2 = roots_mod(Shift::One, (d * d) as u128)?.roots;
    let mod_d = roots_mod(Shift::One, d as u128)?.roots;
    let lhs: Q = mod_d2
        .iter()
        .map(|&n| psi_rational(Q::new(xi - n as i128, d * d)))
        .sum();
    let k = mod_d.len() as i128;
    let main = (Q::new(xi, d * d) - Q::new(s, d)) * k;
    let rhs = main
        + mod_d
            .iter()
            .map(|&n| psi_rational(Q::new(s - n as i128, d)))
            .sum::<Q>();
    Ok(PrehodCheck {
        d1,
        x,
        lhs,
        rhs,
        equal: lhs == rhs,
        square_roots: mod_d2.len() as u64,
        roots: mod_d.len() as u64,
        square_roots_above: mod_d2.iter().filter(|&&n| n as i128 > xi).count() as u64,
        roots_above: mod_d.iter().filter(|&&n| n as i128 > s).count() as u64,
    })
}

/// Square-free `d ∈ (sqrt X, 3 sqrt X]` with a root of `n^2 + 1 ≡ 0 (mod d)`.
pub fn prehod_moduli(x: u64) -> Result<Vec<u64>> {
    let s = is_square(x as u128)
        .ok_or_else(|| Error::InvalidArgument(format!("X = {x} is not a perfect square")))? as u64;
    Ok((s + 1..=3 * s)
        .filter(|&d| mobius(d as u128) != 0)
        .filter(|&d| !roots_mod(Shift::One, d as u128).map(|r| r.is_empty()).unwrap_or(true))
        .collect())
}

/// `Σ_{D<=d<2D} Σ_{n ∈ N_a(d)} ψ((sqrt(X) - n)/d)`, summed in ascending
/// `(d, n)` order.
pub fn psi_sum_over_roots(a: Shift, big_d: f64, x: u64) -> Result<f64> {
    if big_d.is_nan() || big_d < 0.5 || big_d.is_infinite() {
        return Err(Error::out_of_range("D", big_d, "[1/2, inf)"));
    }
    let sqrt_x = split_sqrt(x);
    let lo = big_d.ceil() as u64;
    let hi = (2.0 * big_d).ceil() as u64;
    let mut acc = 0.0;
    for d in lo..hi {
        for n in roots_mod(a, d as u128)?.roots {
            let t = phase_with_sqrt(sqrt_x, 1, d as i128, -(n as i128), d as i128);
            acc += t - 0.5;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiBoundRow {
    pub d: f64,
    pub sum: f64,
    /// `|Σ| D^{1/4} / X`
    pub ratio: f64,
}

/// The `ψ`-sum at `D = 10^{2 + 0.2 k}` for `k = 0, 1, ...` while `D <= dmax`.
pub fn psi_bound_study(a: Shift, x: u64, dmax: f64) -> Result<Vec<PsiBoundRow>> {
    let mut rows = Vec::new();
    for k in 0.. {
        let d = 10f64.powf(2.0 + 0.2 * k as f64);
        if d > dmax {
            break;
        }
        let sum = psi_sum_over_roots(a, d, x)?;
        rows.push(PsiBoundRow {
            d,
            sum,
            ratio: sum.abs() * d.powf(0.25) / x as f64,
        });
    }
    Ok(rows)
}
