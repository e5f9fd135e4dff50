//! C ABI over `sqfree-core`.
//!
//! Every fallible function returns an `SqfStatus` and writes results through
//! out-pointers, which are left untouched on failure. `sqf_last_error`
//! returns a message for the most recent failure on the calling thread.
//! Panics never cross the boundary; they surface as `SQF_STATUS_PANIC`.
//! Handles (`SqfRootSet`, `SqfFlags`) are owned by the caller and released
//! with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use num_complex::Complex64;
use sqfree_core::expsum::{self, KloostermanSpec, ThetaSpec};
use sqfree_core::gamma_census::{gamma_decomposed, gamma_direct, DecompositionPlan};
use sqfree_core::modmath;
use sqfree_core::quadroots::{self, RootSet, Shift};
use sqfree_core::representation_map::{construct_preimage, PreimageCase};
use sqfree_core::sieve::{self, SquarefreeFlags};
use sqfree_core::singular_series;
use sqfree_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqfStatus {
    Ok = 0,
    InvalidArgument = 1,
    OutOfRange = 2,
    NotCoprime = 3,
    NotARoot = 4,
    NotOddPrime = 5,
    Inconsistent = 6,
    NullPointer = 7,
    Panic = 8,
}

enum Failure {
    Core(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type FfiResult = Result<(), Failure>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> SqfStatus {
    match e {
        Error::NotCoprime(..) => SqfStatus::NotCoprime,
        Error::NotOddPrime(_) => SqfStatus::NotOddPrime,
        Error::NotARoot(..) => SqfStatus::NotARoot,
        Error::OutOfRange { .. } => SqfStatus::OutOfRange,
        Error::InvalidArgument(_) => SqfStatus::InvalidArgument,
        Error::Inconsistent(_) => SqfStatus::Inconsistent,
    }
}

fn guard<F: FnOnce() -> FfiResult + UnwindSafe>(f: F) -> SqfStatus {
    match catch_unwind(f) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SqfStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer passed for {name}"));
            SqfStatus::NullPointer
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SqfStatus::Panic
        }
    }
}

/// Writes `value` through `out`, failing on null.
unsafe fn put<T>(out: *mut T, name: &'static str, value: T) -> FfiResult {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn borrow<'a, T>(handle: *const T, name: &'static str) -> Result<&'a T, Failure> {
    handle.as_ref().ok_or(Failure::Null(name))
}

fn shift(a: u8) -> Result<Shift, Failure> {
    Ok(Shift::try_from(a as u64)?)
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sqf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn sqf_status_name(status: SqfStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        SqfStatus::Ok => b"ok\0",
        SqfStatus::InvalidArgument => b"invalid argument\0",
        SqfStatus::OutOfRange => b"out of range\0",
        SqfStatus::NotCoprime => b"not coprime\0",
        SqfStatus::NotARoot => b"not a root\0",
        SqfStatus::NotOddPrime => b"not an odd prime\0",
        SqfStatus::Inconsistent => b"inconsistent\0",
        SqfStatus::NullPointer => b"null pointer\0",
        SqfStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}

/// Möbius function of `n >= 1`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_mobius(n: u64, out: *mut i8) -> SqfStatus {
    guard(|| {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()).into());
        }
        put(out, "out", modmath::mobius(n as u128))
    })
}

/// Number of distinct prime factors of `n >= 1`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_omega(n: u64, out: *mut u32) -> SqfStatus {
    guard(|| {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()).into());
        }
        put(out, "out", modmath::omega(n as u128))
    })
}

/// Number of divisors of `n >= 1`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_tau(n: u64, out: *mut u64) -> SqfStatus {
    guard(|| {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()).into());
        }
        put(out, "out", modmath::tau(n as u128) as u64)
    })
}

/// `Γ(X)` and `σ X` for `1 <= X <= 10^7`.
///
/// # Safety
/// `gamma_out` and `sigma_x_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_gamma(x: u64, gamma_out: *mut u64, sigma_x_out: *mut f64) -> SqfStatus {
    guard(|| {
        if gamma_out.is_null() || sigma_x_out.is_null() {
            return Err(Failure::Null("gamma_out/sigma_x_out"));
        }
        let c = gamma_direct(x)?;
        put(gamma_out, "gamma_out", c.gamma)?;
        put(sigma_x_out, "sigma_x_out", c.sigma_x)
    })
}

/// `Γ(X)` through the Möbius decomposition split at `z`.
///
/// # Safety
/// `total_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_gamma_decomposed(x: u64, z: f64, total_out: *mut i64) -> SqfStatus {
    guard(|| {
        if total_out.is_null() {
            return Err(Failure::Null("total_out"));
        }
        let d = gamma_decomposed(DecompositionPlan::new(x, z)?)?;
        put(total_out, "total_out", d.total)
    })
}

/// Euler product over odd primes `<= prime_bound`, with its tail bound.
///
/// # Safety
/// `value_out` and `tail_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_sigma_product(prime_bound: u64, value_out: *mut f64, tail_out: *mut f64) -> SqfStatus {
    guard(|| {
        if value_out.is_null() || tail_out.is_null() {
            return Err(Failure::Null("value_out/tail_out"));
        }
        let s = singular_series::sigma_product(prime_bound)?;
        put(value_out, "value_out", s.value)?;
        put(tail_out, "tail_out", s.tail_bound)
    })
}

/// Divisor-sum form truncated at `d1 d2 <= dmax`, with its tail bound.
///
/// # Safety
/// `value_out` and `tail_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_sigma_sum(dmax: u64, value_out: *mut f64, tail_out: *mut f64) -> SqfStatus {
    guard(|| {
        if value_out.is_null() || tail_out.is_null() {
            return Err(Failure::Null("value_out/tail_out"));
        }
        let s = singular_series::sigma_sum(dmax)?;
        put(value_out, "value_out", s.value)?;
        put(tail_out, "tail_out", s.tail_bound)
    })
}

/// `#{1 <= n <= q1 q2 : q1 | n^2 + 1, q2 | n^2 + 2}`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_lambda(q1: u64, q2: u64, out: *mut u64) -> SqfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let l = quadroots::lambda(q1 as u128, q2 as u128)?;
        put(out, "out", l.value as u64)
    })
}

/// Roots of `n^2 + a ≡ 0 (mod q)` in `[1, q]`, ascending.
pub struct SqfRootSet(RootSet);

/// # Safety
/// `out` must be valid for writes. On success `*out` owns a handle to be
/// released with `sqf_roots_free`.
#[no_mangle]
pub unsafe extern "C" fn sqf_roots_new(a: u8, q: u64, out: *mut *mut SqfRootSet) -> SqfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let rs = quadroots::roots_mod(shift(a)?, q as u128)?;
        put(out, "out", Box::into_raw(Box::new(SqfRootSet(rs))))
    })
}

/// Number of roots; 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle from `sqf_roots_new`.
#[no_mangle]
pub unsafe extern "C" fn sqf_roots_len(set: *const SqfRootSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `set` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_roots_get(set: *const SqfRootSet, index: usize, out: *mut u64) -> SqfStatus {
    guard(|| {
        let s = borrow(set, "set")?;
        let root = *s.0.roots.get(index).ok_or_else(|| {
            Failure::Core(Error::InvalidArgument(format!(
                "index {index} past {} roots",
                s.0.len()
            )))
        })?;
        put(out, "out", root as u64)
    })
}

/// # Safety
/// `set` must be null or a handle from `sqf_roots_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sqf_roots_free(set: *mut SqfRootSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Square-free flags of `n^2 + 1` and `n^2 + 2` over `[lo, hi]`.
pub struct SqfFlags(SquarefreeFlags);

/// `prime_bound = 0` selects the smallest sound bound.
///
/// # Safety
/// `out` must be valid for writes. On success `*out` owns a handle to be
/// released with `sqf_sieve_free`.
#[no_mangle]
pub unsafe extern "C" fn sqf_sieve_new(lo: u64, hi: u64, prime_bound: u64, out: *mut *mut SqfFlags) -> SqfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let bound = if prime_bound == 0 {
            sieve::default_prime_bound(hi)
        } else {
            prime_bound
        };
        let flags = sieve::sieve_flags(lo, hi, bound)?;
        put(out, "out", Box::into_raw(Box::new(SqfFlags(flags))))
    })
}

/// # Safety
/// `flags` must be a live handle; `sf1` and `sf2` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_sieve_get(flags: *const SqfFlags, n: u64, sf1: *mut bool, sf2: *mut bool) -> SqfStatus {
    guard(|| {
        let f = borrow(flags, "flags")?;
        if sf1.is_null() || sf2.is_null() {
            return Err(Failure::Null("sf1/sf2"));
        }
        let (a, b) = f.0.get(n).ok_or_else(|| {
            Failure::Core(Error::OutOfRange {
                what: "n",
                value: n.to_string(),
                range: "the sieved interval",
            })
        })?;
        put(sf1, "sf1", a)?;
        put(sf2, "sf2", b)
    })
}

/// Count of `n` in the interval with both values square-free; 0 for null.
///
/// # Safety
/// `flags` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sqf_sieve_pair_count(flags: *const SqfFlags) -> u64 {
    flags.as_ref().map_or(0, |f| f.0.pair_count())
}

/// # Safety
/// `flags` must be null or a handle from `sqf_sieve_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sqf_sieve_free(flags: *mut SqfFlags) {
    if !flags.is_null() {
        drop(Box::from_raw(flags));
    }
}

/// A representation `x^2 + 2y^2 = n` of a root `z`, with the approximation
/// `a/q` it came from and `r = zq - an`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SqfPreimage {
    pub a: i64,
    pub q: u64,
    pub r: i64,
    /// `r^2 + 2q^2 = 2n` rather than `n`
    pub doubled: bool,
    pub x: u64,
    pub y: i64,
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_construct_preimage(z: u64, n: u64, out: *mut SqfPreimage) -> SqfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let t = construct_preimage(z, n)?;
        put(
            out,
            "out",
            SqfPreimage {
                a: t.a,
                q: t.q,
                r: t.r,
                doubled: t.case == PreimageCase::Double,
                x: t.x,
                y: t.y,
            },
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SqfComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for SqfComplex {
    fn from(c: Complex64) -> Self {
        SqfComplex { re: c.re, im: c.im }
    }
}

/// `Σ_{alpha <= x <= beta, (x, r) = 1} e(h inv(x) / r)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_kloosterman(r: i64, h: i64, alpha: f64, beta: f64, out: *mut SqfComplex) -> SqfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let spec = KloostermanSpec::new(r, h, alpha, beta)?;
        put(out, "out", expsum::kloosterman_incomplete(&spec).into())
    })
}

/// `Θ_m` computed directly and through representations.
///
/// # Safety
/// `direct_out` and `reps_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_theta(
    d2: f64,
    m: i64,
    x: u64,
    direct_out: *mut SqfComplex,
    reps_out: *mut SqfComplex,
) -> SqfStatus {
    guard(|| {
        if direct_out.is_null() || reps_out.is_null() {
            return Err(Failure::Null("direct_out/reps_out"));
        }
        let spec = ThetaSpec::new(d2, m, x)?;
        put(direct_out, "direct_out", expsum::theta_direct(&spec).into())?;
        put(reps_out, "reps_out", expsum::theta_via_reps(&spec).into())
    })
}

/// Both sides of the ψ-sum identity for `d1 > sqrt(X)`, `X` a perfect
/// square, as reduced fractions.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SqfPrehod {
    pub lhs_num: i64,
    pub lhs_den: i64,
    pub rhs_num: i64,
    pub rhs_den: i64,
    pub equal: bool,
    pub closed_forms_hold: bool,
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sqf_prehod(d1: u64, x: u64, out: *mut SqfPrehod) -> SqfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let c = expsum::prehod_check(d1, x)?;
        let narrow = |v: i128| {
            i64::try_from(v).map_err(|_| {
                Failure::Core(Error::OutOfRange {
                    what: "fraction part",
                    value: v.to_string(),
                    range: "i64",
                })
            })
        };
        put(
            out,
            "out",
            SqfPrehod {
                lhs_num: narrow(*c.lhs.numer())?,
                lhs_den: narrow(*c.lhs.denom())?,
                rhs_num: narrow(*c.rhs.numer())?,
                rhs_den: narrow(*c.rhs.denom())?,
                equal: c.equal,
                closed_forms_hold: c.closed_forms_hold(),
            },
        )
    })
}
