//! Interval arithmetic kernel with directed (outward) rounding.
//!
//! Every operation returns an interval that contains the exact real result of
//! the operation applied to any points of the input intervals. Outward
//! rounding is implemented by next-representable adjustment of
//! round-to-nearest results, steered by exact error terms (TwoSum for
//! addition, FMA residuals for multiplication, division and square root), so
//! exact results stay exact and inexact endpoints move by exactly one ulp.
//! No FPU rounding-mode switching is involved; all operations are safe to
//! call from any thread.
//!
//! Transcendentals (`exp`, `sin`, `cos`) use argument reduction against
//! internally certified enclosures of ln 2 and π (bootstrapped at first use
//! by bisecting their defining power series — no trusted decimal constants),
//! followed by a truncated series with a rigorously bounded remainder.
//!
//! Endpoints are finite in normal operation; infinite endpoints are legal and
//! mark saturation after overflow.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::{Error, Result};

// ---------------------------------------------------------------------------
// directed rounding primitives
// ---------------------------------------------------------------------------

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    // Knuth TwoSum error term; exact when s is finite and no intermediate
    // overflows (callers guard the near-overflow range).
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

const BIG: f64 = f64::MAX / 4.0;

#[inline]
pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_nan() {
        // (+inf) + (-inf): no information, saturate downward.
        return f64::NEG_INFINITY;
    }
    if !s.is_finite() {
        return if s > 0.0 { f64::MAX } else { s };
    }
    if s.abs() > BIG || a.abs() > BIG || b.abs() > BIG {
        return s.next_down();
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_nan() {
        return f64::INFINITY;
    }
    if !s.is_finite() {
        return if s < 0.0 { f64::MIN } else { s };
    }
    if s.abs() > BIG || a.abs() > BIG || b.abs() > BIG {
        return s.next_up();
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_nan() {
        return f64::NEG_INFINITY;
    }
    if !p.is_finite() {
        return if p > 0.0 { f64::MAX } else { p };
    }
    if p.abs() < f64::MIN_POSITIVE {
        // Subnormal product: the FMA residual may itself round; one ulp
        // outward is always enough because |error| <= ulp/2.
        return p.next_down();
    }
    if a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_nan() {
        return f64::INFINITY;
    }
    if !p.is_finite() {
        return if p < 0.0 { f64::MIN } else { p };
    }
    if p.abs() < f64::MIN_POSITIVE {
        return p.next_up();
    }
    if a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

#[inline]
fn div_down(a: f64, b: f64) -> f64 {
    debug_assert!(b != 0.0);
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_nan() {
        return f64::NEG_INFINITY;
    }
    if !q.is_finite() {
        return if q > 0.0 { f64::MAX } else { q };
    }
    if q.abs() < f64::MIN_POSITIVE || !b.is_finite() {
        return q.next_down();
    }
    // true - q = -r/b where r = q*b - a exactly.
    let r = q.mul_add(b, -a);
    if r == 0.0 {
        q
    } else if (r < 0.0) == (b < 0.0) {
        // -r/b < 0: true quotient below q.
        q.next_down()
    } else {
        q
    }
}

#[inline]
fn div_up(a: f64, b: f64) -> f64 {
    debug_assert!(b != 0.0);
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_nan() {
        return f64::INFINITY;
    }
    if !q.is_finite() {
        return if q < 0.0 { f64::MIN } else { q };
    }
    if q.abs() < f64::MIN_POSITIVE || !b.is_finite() {
        return q.next_up();
    }
    let r = q.mul_add(b, -a);
    if r == 0.0 {
        q
    } else if (r < 0.0) == (b >= 0.0) {
        // -r/b > 0: true quotient above q.
        q.next_up()
    } else {
        q
    }
}

#[inline]
fn sqrt_down(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::MAX;
    }
    let s = x.sqrt();
    if x < f64::MIN_POSITIVE * 4.0 {
        return s.next_down().max(0.0);
    }
    let r = s.mul_add(s, -x);
    if r > 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn sqrt_up(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    let s = x.sqrt();
    if x < f64::MIN_POSITIVE * 4.0 {
        return s.next_up();
    }
    let r = s.mul_add(s, -x);
    if r < 0.0 {
        s.next_up()
    } else {
        s
    }
}

// ---------------------------------------------------------------------------
// Interval
// ---------------------------------------------------------------------------

/// A closed real interval `[lo, hi]` with `lo <= hi` and non-NaN endpoints.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl std::fmt::Debug for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo, self.hi)
    }
}

pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

impl Interval {
    /// `[lo, hi]`; panics on NaN endpoints or `lo > hi` (programmer error —
    /// use [`Interval::checked_new`] for data from the outside world).
    #[inline]
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(!lo.is_nan() && !hi.is_nan() && lo <= hi, "bad interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn checked_new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            Err(Error::Usage(format!("invalid interval endpoints [{lo}, {hi}]")))
        } else {
            Ok(Interval { lo, hi })
        }
    }

    #[inline]
    pub fn point(x: f64) -> Self {
        assert!(!x.is_nan());
        Interval { lo: x, hi: x }
    }

    /// Smallest interval containing both inputs.
    #[inline]
    pub fn hull(self, other: Self) -> Self {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersect(self, other: Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    #[inline]
    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn contains_interval(self, other: Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Upper bound on the width, rounded up.
    #[inline]
    pub fn width(self) -> f64 {
        add_up(self.hi, -self.lo)
    }

    #[inline]
    pub fn midpoint(self) -> f64 {
        let m = 0.5 * (self.lo + self.hi);
        if m.is_finite() {
            m.clamp(self.lo, self.hi)
        } else {
            (self.lo * 0.5 + self.hi * 0.5).clamp(self.lo, self.hi)
        }
    }

    /// Magnitude: max |x| over the interval.
    #[inline]
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Mignitude: min |x| over the interval.
    #[inline]
    pub fn mig(self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// Enclosure of |x|.
    #[inline]
    pub fn abs(self) -> Self {
        Interval { lo: self.mig(), hi: self.mag() }
    }

    #[inline]
    pub fn max_iv(self, other: Self) -> Self {
        Interval { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }

    #[inline]
    pub fn min_iv(self, other: Self) -> Self {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.min(other.hi) }
    }

    /// Positive part max(x, 0).
    #[inline]
    pub fn pos(self) -> Self {
        Interval { lo: self.lo.max(0.0), hi: self.hi.max(0.0) }
    }

    pub fn scale2(self, k: i32) -> Self {
        // Multiplication by 2^k; exact in the normal range. Outside it the
        // factor is split so every step stays a representable power of two,
        // with directed rounding absorbing subnormal/overflow edges.
        let mut r = self;
        let mut k = k;
        loop {
            let step = k.clamp(-1022, 1023);
            let f = pow2(step);
            r = Interval { lo: mul_down(r.lo, f), hi: mul_up(r.hi, f) };
            k -= step;
            if k == 0 || step == 0 {
                return r;
            }
        }
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        if rhs.contains(0.0) {
            return Err(Error::Domain("division by interval containing zero".into()));
        }
        Ok(self / rhs)
    }

    pub fn recip(self) -> Self {
        ONE / self
    }

    /// Enclosure of x^n for integer n >= 0.
    pub fn powi(self, n: u32) -> Self {
        match n {
            0 => ONE,
            1 => self,
            _ if n % 2 == 0 => {
                // |x|^n is monotone on the nonnegative representative.
                let a = self.abs();
                Interval { lo: pow_down(a.lo, n), hi: pow_up(a.hi, n) }
            }
            _ => {
                // Odd powers are monotone increasing.
                Interval { lo: signed_pow_down(self.lo, n), hi: signed_pow_up(self.hi, n) }
            }
        }
    }

    /// Enclosure of sqrt(x); negative inputs are a domain error.
    pub fn sqrt(self) -> Result<Self> {
        if self.lo < 0.0 {
            return Err(Error::Domain(format!("sqrt of interval {self:?} with negative part")));
        }
        Ok(Interval { lo: sqrt_down(self.lo), hi: sqrt_up(self.hi) })
    }

    /// Enclosure of e^x.
    pub fn exp(self) -> Self {
        Interval { lo: exp_point(self.lo).lo, hi: exp_point(self.hi).hi }
    }

    /// Enclosure of sin(x).
    pub fn sin(self) -> Self {
        sin_cos_interval(self).0
    }

    /// Enclosure of cos(x).
    pub fn cos(self) -> Self {
        sin_cos_interval(self).1
    }

    /// Enclosure of (e^x - 1)/x, continued through 0 by the value 1.
    pub fn phi1(self) -> Self {
        // phi1 is increasing on the reals; evaluate at the endpoints.
        Interval { lo: phi1_point(self.lo).lo, hi: phi1_point(self.hi).hi }
    }

    /// True if every point of `self` is strictly below every point of `rhs`.
    #[inline]
    pub fn strictly_below(self, rhs: Self) -> bool {
        self.hi < rhs.lo
    }

    /// Certainly-less-or-equal comparison of upper vs lower bounds.
    #[inline]
    pub fn certainly_le(self, rhs: Self) -> bool {
        self.hi <= rhs.lo
    }

    pub fn sum<I: IntoIterator<Item = Interval>>(iter: I) -> Interval {
        iter.into_iter().fold(ZERO, |acc, x| acc + x)
    }

    /// Parse a decimal literal into the tightest enclosing interval.
    ///
    /// Exactly representable inputs produce a point interval; otherwise the
    /// result has width one ulp with the correctly rounded value on the
    /// appropriate side.
    pub fn from_decimal(s: &str) -> Result<Self> {
        from_decimal(s)
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval { lo: add_down(self.lo, rhs.lo), hi: add_up(self.hi, rhs.hi) }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval { lo: add_down(self.lo, -rhs.hi), hi: add_up(self.hi, -rhs.lo) }
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = mul_down(a, c).min(mul_down(a, d)).min(mul_down(b, c)).min(mul_down(b, d));
        let hi = mul_up(a, c).max(mul_up(a, d)).max(mul_up(b, c)).max(mul_up(b, d));
        Interval { lo, hi }
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: f64) -> Interval {
        self * Interval::point(rhs)
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: f64) -> Interval {
        self + Interval::point(rhs)
    }
}

impl Sub<f64> for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: f64) -> Interval {
        self - Interval::point(rhs)
    }
}

impl Div for Interval {
    type Output = Interval;
    /// Panics if `rhs` contains zero; see [`Interval::checked_div`].
    fn div(self, rhs: Interval) -> Interval {
        assert!(!rhs.contains(0.0), "division by interval containing zero: {rhs:?}");
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = div_down(a, c).min(div_down(a, d)).min(div_down(b, c)).min(div_down(b, d));
        let hi = div_up(a, c).max(div_up(a, d)).max(div_up(b, c)).max(div_up(b, d));
        Interval { lo, hi }
    }
}

impl Div<f64> for Interval {
    type Output = Interval;
    fn div(self, rhs: f64) -> Interval {
        self / Interval::point(rhs)
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

/// Exact power of two as f64 for k in [-1074, 1023]; saturates outside.
fn pow2(k: i32) -> f64 {
    match k {
        -1022..=1023 => f64::from_bits(((k + 1023) as u64) << 52),
        -1074..=-1023 => f64::from_bits(1u64 << (k + 1074)),
        _ if k < -1074 => 0.0,
        _ => f64::INFINITY,
    }
}

fn pow_down(x: f64, n: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let mut acc = x;
    for _ in 1..n {
        acc = mul_down(acc, x);
    }
    acc
}

fn pow_up(x: f64, n: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let mut acc = x;
    for _ in 1..n {
        acc = mul_up(acc, x);
    }
    acc
}

fn signed_pow_down(x: f64, n: u32) -> f64 {
    if x >= 0.0 {
        pow_down(x, n)
    } else {
        -pow_up(-x, n)
    }
}

fn signed_pow_up(x: f64, n: u32) -> f64 {
    if x >= 0.0 {
        pow_up(x, n)
    } else {
        -pow_down(-x, n)
    }
}

// ---------------------------------------------------------------------------
// certified constants: ln 2 and π, bootstrapped from their series
// ---------------------------------------------------------------------------

/// exp by plain Taylor series with rigorous remainder; valid for |x| <= 1.
fn exp_series_small(x: Interval) -> Interval {
    debug_assert!(x.mag() <= 1.0 + 1e-9);
    const N: u32 = 22;
    // Horner: 1 + x(1 + x/2(1 + x/3(...)))
    let mut acc = ONE;
    for k in (1..=N).rev() {
        acc = ONE + x * acc / k as f64;
    }
    // Remainder after degree N: |x|^{N+1}/(N+1)! * 1/(1 - |x|/(N+2)).
    let m = Interval::point(x.mag());
    let mut t = ONE;
    for k in 1..=(N + 1) {
        t = t * m / k as f64;
    }
    let rem = (t / (ONE - m / (N + 2) as f64)).hi;
    acc + Interval::new(-rem, rem)
}

/// sin by plain Taylor series with rigorous remainder; valid for |x| <= 1.05
/// (arguments arrive reduced to roughly [-π/4, π/4]).
fn sin_series(x: Interval) -> Interval {
    const TERMS: usize = 11; // degree 2*TERMS-1
    assert!(x.mag() <= 1.05);
    let x2 = x * x;
    // x * (1 - x^2/(2*3) * (1 - x^2/(4*5) * (...)))
    let mut acc = ONE;
    for m in (1..TERMS).rev() {
        let d = (2 * m * (2 * m + 1)) as f64;
        acc = ONE - x2 * acc / d;
    }
    let s = x * acc;
    // Remainder: first omitted term magnitude / (1 - term ratio bound).
    let mm = Interval::point(x.mag());
    let mut t = mm;
    for k in 2..=(2 * TERMS + 1) as u32 {
        t = t * mm / k as f64;
    }
    let q = (mm * mm / ((2 * TERMS + 2) as f64 * (2 * TERMS + 3) as f64)).hi;
    let rem = (t / (1.0 - q)).hi;
    (s + Interval::new(-rem, rem)).intersect(Interval::new(-1.0, 1.0)).unwrap()
}

/// cos by plain Taylor series with rigorous remainder; valid for |x| <= 1.05.
fn cos_series(x: Interval) -> Interval {
    const TERMS: usize = 12; // degree 2*TERMS-2
    assert!(x.mag() <= 1.05);
    let x2 = x * x;
    let mut acc = ONE;
    for m in (1..TERMS).rev() {
        let d = ((2 * m - 1) * (2 * m)) as f64;
        acc = ONE - x2 * acc / d;
    }
    let mm = Interval::point(x.mag());
    let mut t = ONE;
    for k in 1..=(2 * TERMS) as u32 {
        t = t * mm / k as f64;
    }
    let q = (mm * mm / ((2 * TERMS + 1) as f64 * (2 * TERMS + 2) as f64)).hi;
    let rem = (t / (1.0 - q)).hi;
    (acc + Interval::new(-rem, rem)).intersect(Interval::new(-1.0, 1.0)).unwrap()
}

/// A constant split for exact argument reduction: value ∈ hi1 + hi2 + tail,
/// where hi1 and hi2 carry at most 26 mantissa bits each (so k·hi1 and k·hi2
/// are exact f64 products for |k| ≤ 2^26) and `tail` is a tight interval.
#[derive(Clone, Copy)]
struct SplitConst {
    hi1: f64,
    hi2: f64,
    tail: Interval,
    /// Plain 1-2 ulp enclosure of the full value.
    iv: Interval,
}

impl SplitConst {
    /// Enclosure of x - k·value, exploiting exactness of k·hi1, k·hi2.
    fn reduce(&self, x: f64, k: f64) -> Interval {
        debug_assert!(k.abs() <= (1u64 << 26) as f64);
        let t1 = Interval::point(x) - Interval::point(k) * Interval::point(self.hi1);
        let t2 = t1 - Interval::point(k) * Interval::point(self.hi2);
        t2 - self.tail * k
    }
}

const BOOT_SHIFT: u64 = 340;

/// Directed conversion of x·2^-BOOT_SHIFT to f64.
fn big_shr_f64(x: &num_bigint::BigInt, up: bool) -> f64 {
    use num_bigint::{BigUint, Sign};
    use num_traits_shim::*;
    let (sign, mag) = (x.sign(), x.magnitude());
    if sign == Sign::NoSign {
        return 0.0;
    }
    let bits = mag.bits();
    let (top, inexact, e) = if bits <= 53 {
        (biguint_to_u64(mag), false, -(BOOT_SHIFT as i64))
    } else {
        let drop = bits - 53;
        let t = biguint_to_u64(&(mag >> drop));
        let back: BigUint = BigUint::from(t) << drop;
        (t, back != *mag, drop as i64 - BOOT_SHIFT as i64)
    };
    // |x·2^-S| ∈ [c, c.next_up()) with c = top·2^e exact (normal range here).
    let c = top as f64 * pow2(e as i32);
    debug_assert!(c.is_finite() && c > 0.0);
    match (sign == Sign::Minus, inexact, up) {
        (false, false, _) => c,
        (false, true, false) => c,
        (false, true, true) => c.next_up(),
        (true, false, _) => -c,
        (true, true, false) => -c.next_up(),
        (true, true, true) => -c,
    }
}

// num-bigint's ToPrimitive lives in num-traits, which we avoid pulling in for
// one call; extracting a u64 from a BigUint known to fit is straightforward.
mod num_traits_shim {
    pub fn biguint_to_u64(x: &num_bigint::BigUint) -> u64 {
        x.to_u64_digits().first().copied().unwrap_or(0)
    }
}

/// Split [lo_int, hi_int]·2^-BOOT_SHIFT into hi1 + hi2 + tail.
fn split_const(lo_int: &num_bigint::BigInt, hi_int: &num_bigint::BigInt) -> SplitConst {
    use num_bigint::BigInt;
    let take26 = |v: &BigInt| -> (f64, BigInt) {
        let bits = v.magnitude().bits();
        if bits == 0 {
            return (0.0, v.clone());
        }
        let keep = bits.min(26);
        let drop = bits - keep;
        let top: BigInt = v >> drop;
        let part = big_shr_f64(&(top.clone() << drop), false);
        // Exact: ≤26 significant bits survive the shift.
        (part, v - (top << drop))
    };
    let (hi1, r1) = take26(lo_int);
    let (hi2, r2) = take26(&r1);
    let width = hi_int - lo_int;
    let t_lo = big_shr_f64(&r2, false);
    let t_hi = big_shr_f64(&(&r2 + &width), true);
    SplitConst {
        hi1,
        hi2,
        tail: Interval::new(t_lo, t_hi),
        iv: Interval::new(big_shr_f64(lo_int, false), big_shr_f64(hi_int, true)),
    }
}

/// ln 2 = Σ_{k≥1} 1/(k·2^k), summed exactly in fixed point.
fn boot_ln2() -> SplitConst {
    use num_bigint::BigInt;
    let n = BOOT_SHIFT;
    let mut lo = BigInt::from(0);
    for k in 1..=n {
        lo += (BigInt::from(1u8) << (n - k)) / k;
    }
    // Each floor loses < 1 (n terms) and the geometric tail past k = n
    // contributes < 2^-n in value, i.e. < 1 in fixed point.
    let hi = &lo + BigInt::from(n + 1);
    split_const(&lo, &hi)
}

/// π via Machin: π = 16·atan(1/5) − 4·atan(1/239), alternating series with
/// exact integer terms and bracketed floor/remainder errors.
fn boot_pi() -> SplitConst {
    use num_bigint::BigInt;
    // Returns [lo, hi] integer bounds of atan(1/m)·2^BOOT_SHIFT.
    let atan_inv = |m: u64| -> (BigInt, BigInt) {
        let mbig = BigInt::from(m);
        let m2 = &mbig * &mbig;
        let mut sum = BigInt::from(0);
        let mut n_even = 0u64;
        let mut n_odd = 0u64;
        let mut denom_pow = mbig.clone(); // m^{2j+1}
        let mut j = 0u64;
        loop {
            let t: BigInt = (BigInt::from(1u8) << BOOT_SHIFT) / (&denom_pow * (2 * j + 1));
            let done = t == BigInt::from(0);
            if j % 2 == 0 {
                if !done {
                    sum += &t;
                    n_even += 1;
                }
            } else {
                sum -= &t;
                n_odd += 1;
            }
            if done && j % 2 == 1 {
                // Last included term was negative (j-1 even... j odd, t=0):
                // partial sum ended after an odd index => lower bracket holds.
                break;
            }
            denom_pow *= &m2;
            j += 1;
            if j > 4 * BOOT_SHIFT {
                unreachable!("atan series failed to terminate");
            }
        }
        // True scaled sum ∈ [sum - n_odd, sum + n_even]; the omitted
        // alternating remainder after an odd last index lies in [0, 1].
        (&sum - BigInt::from(n_odd), sum + BigInt::from(n_even + 1))
    };
    let (a_lo, a_hi) = atan_inv(5);
    let (b_lo, b_hi) = atan_inv(239);
    let lo = &a_lo * 16 - &b_hi * 4;
    let hi = &a_hi * 16 - &b_lo * 4;
    split_const(&lo, &hi)
}

fn ln2_split() -> &'static SplitConst {
    static C: OnceLock<SplitConst> = OnceLock::new();
    C.get_or_init(boot_ln2)
}

fn pi_split() -> &'static SplitConst {
    static C: OnceLock<SplitConst> = OnceLock::new();
    C.get_or_init(boot_pi)
}

fn half_pi_split() -> &'static SplitConst {
    static C: OnceLock<SplitConst> = OnceLock::new();
    C.get_or_init(|| {
        let p = pi_split();
        SplitConst {
            hi1: 0.5 * p.hi1,
            hi2: 0.5 * p.hi2,
            tail: p.tail.scale2(-1),
            iv: p.iv.scale2(-1),
        }
    })
}

/// Tight enclosure of ln 2 (derived internally; no trusted decimal input).
pub fn ln2() -> Interval {
    ln2_split().iv
}

/// Tight enclosure of π (derived internally; no trusted decimal input).
pub fn pi() -> Interval {
    pi_split().iv
}

pub fn two_pi() -> Interval {
    pi().scale2(1)
}

pub fn half_pi() -> Interval {
    pi().scale2(-1)
}

// ---------------------------------------------------------------------------
// exp / sin / cos with argument reduction
// ---------------------------------------------------------------------------

/// Enclosure of e^x for a point argument.
fn exp_point(x: f64) -> Interval {
    if x == f64::NEG_INFINITY {
        return Interval::new(0.0, 0.0);
    }
    if x == f64::INFINITY {
        return Interval::new(f64::MAX, f64::INFINITY);
    }
    if x > 709.9 {
        return Interval::new(f64::MAX, f64::INFINITY);
    }
    if x < -745.2 {
        // e^x < 2^-1074 here.
        return Interval::new(0.0, f64::from_bits(1));
    }
    let k = (x / std::f64::consts::LN_2).round();
    let r = ln2_split().reduce(x, k);
    debug_assert!(r.mag() < 0.5);
    let e = exp_series_small(r).scale2(k as i32);
    // e^x > 0; directed rounding at the subnormal edge may dip below.
    Interval { lo: e.lo.max(0.0), hi: e.hi }
}

/// Enclosure of (e^x - 1)/x for a point argument (1 at x = 0).
fn phi1_point(x: f64) -> Interval {
    if x == 0.0 {
        return ONE;
    }
    if x.abs() > 0.4 {
        return (exp_point(x) - ONE) / Interval::point(x);
    }
    // Series sum_{i>=0} x^i/(i+1)! with remainder, nested as
    // 1 + x/2 (1 + x/3 (1 + ...)).
    const N: u32 = 18;
    let xi = Interval::point(x);
    let mut acc = ONE;
    for k in (1..=N).rev() {
        acc = ONE + xi * acc / (k + 1) as f64;
    }
    // Remainder after i = N: |x|^{N+1}/(N+2)! / (1 - |x|/(N+3)).
    let m = Interval::point(x.abs());
    let mut t = ONE;
    for k in 2..=(N + 2) {
        t = t * m / k as f64;
    }
    let rem = (t / (ONE - m / (N + 3) as f64)).hi;
    acc + Interval::new(-rem, rem)
}

const FULL_RANGE: Interval = Interval { lo: -1.0, hi: 1.0 };

/// Quadrant-reduced sin/cos of a point: x = k·π/2 + r with |r| ≲ π/4, then
/// series on r and a sign/swap by k mod 4.
fn sin_cos_point(x: f64) -> (Interval, Interval) {
    let hp = half_pi_split();
    let k = (x / std::f64::consts::FRAC_PI_2).round();
    let r = if k == 0.0 {
        Interval::point(x)
    } else if k.abs() <= (1u64 << 26) as f64 {
        hp.reduce(x, k)
    } else {
        // Exactness of the reduction products is lost; interval products
        // keep soundness at the cost of width.
        Interval::point(x) - hp.iv * k
    };
    if r.mag() > 1.0 {
        return (FULL_RANGE, FULL_RANGE);
    }
    let (s, c) = (sin_series(r), cos_series(r));
    match (k.rem_euclid(4.0)) as u8 {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// sin/cos over an interval: endpoint evaluations plus containment checks for
/// the interior extrema.
fn sin_cos_interval(x: Interval) -> (Interval, Interval) {
    if x.lo == x.hi {
        return sin_cos_point(x.lo);
    }
    if !x.is_finite() || x.width() >= std::f64::consts::TAU {
        return (FULL_RANGE, FULL_RANGE);
    }
    let (slo, clo) = sin_cos_point(x.lo);
    let (shi, chi) = sin_cos_point(x.hi);
    let mut s = slo.hull(shi);
    let mut c = clo.hull(chi);
    // Hull in ±1 when a critical point may lie inside. Over-approximating the
    // containment test only widens toward the true bound sup|sin| = 1.
    let mid = x.midpoint();
    let tp = two_pi();
    let crosses = |offset: Interval| -> bool {
        let n0 = ((mid - offset.midpoint()) / std::f64::consts::TAU).round();
        for dn in [-1.0, 0.0, 1.0] {
            let crit = offset + tp * (n0 + dn);
            if x.lo <= crit.hi && crit.lo <= x.hi {
                return true;
            }
        }
        false
    };
    if crosses(half_pi()) {
        s = s.hull(ONE);
    }
    if crosses(-half_pi()) {
        s = s.hull(-ONE);
    }
    if crosses(ZERO) {
        c = c.hull(ONE);
    }
    if crosses(pi()) {
        c = c.hull(-ONE);
    }
    (
        s.intersect(FULL_RANGE).unwrap(),
        c.intersect(FULL_RANGE).unwrap(),
    )
}

// ---------------------------------------------------------------------------
// decimal parsing
// ---------------------------------------------------------------------------

fn from_decimal(s: &str) -> Result<Interval> {
    use num_bigint::BigInt;

    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Format("empty decimal literal".into()));
    }
    // Split off exponent.
    let (mant, exp10) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..]
                .parse()
                .map_err(|_| Error::Format(format!("bad exponent in decimal literal {t:?}")))?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (sign, digits_part) = match mant.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = match digits_part.find('.') {
        Some(i) => (&digits_part[..i], &digits_part[i + 1..]),
        None => (digits_part, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Format(format!("no digits in decimal literal {t:?}")));
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Format(format!("bad decimal literal {t:?}")));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let m: BigInt = all_digits.parse().unwrap_or_else(|_| BigInt::from(0));
    let m = m * sign;
    let e = exp10 - frac_part.len() as i64;
    // value = m * 10^e

    let v: f64 = t.parse().map_err(|_| Error::Format(format!("unparseable decimal {t:?}")))?;
    if v.is_infinite() {
        return Ok(if v > 0.0 {
            Interval::new(f64::MAX, f64::INFINITY)
        } else {
            Interval::new(f64::NEG_INFINITY, f64::MIN)
        });
    }

    // Exact comparison of v (dyadic rational) against m*10^e.
    let cmp = cmp_f64_decimal(v, &m, e);
    Ok(match cmp {
        Ordering::Equal => Interval::point(v),
        Ordering::Less => Interval::new(v, v.next_up()),
        Ordering::Greater => Interval::new(v.next_down(), v),
    })
}

/// Compare the exact value of `v` against `m * 10^e` without rounding.
fn cmp_f64_decimal(v: f64, m: &num_bigint::BigInt, e: i64) -> Ordering {
    use num_bigint::BigInt;
    if v == 0.0 {
        return BigInt::from(0).cmp(m).reverse();
    }
    let bits = v.to_bits();
    let sign = if v < 0.0 { -1 } else { 1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & 0xf_ffff_ffff_ffff;
    let (mant, e2) = if exp_bits == 0 {
        (frac as i128, -1074_i64)
    } else {
        ((frac | 0x10_0000_0000_0000) as i128, exp_bits - 1075)
    };
    // v = sign * mant * 2^e2;  compare with m * 10^e = m * 2^e * 5^e.
    let mut lhs = BigInt::from(sign as i128 * mant);
    let mut rhs = m.clone();
    // Clear powers of two: lhs * 2^e2 vs rhs * 2^e 5^e.
    let shift = e2 - e;
    if shift >= 0 {
        lhs <<= shift as u64;
    } else {
        rhs <<= (-shift) as u64;
    }
    if e >= 0 {
        rhs *= BigInt::from(5u8).pow(e as u32);
    } else {
        lhs *= BigInt::from(5u8).pow((-e) as u32);
    }
    lhs.cmp(&rhs)
}

// ---------------------------------------------------------------------------
// complex rectangles
// ---------------------------------------------------------------------------

/// A complex rectangle `re + i im` with interval components.
#[derive(Clone, Copy, PartialEq)]
pub struct CInterval {
    pub re: Interval,
    pub im: Interval,
}

impl std::fmt::Debug for CInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:?} + {:?} i)", self.re, self.im)
    }
}

pub const C_ZERO: CInterval = CInterval { re: ZERO, im: ZERO };
pub const C_ONE: CInterval = CInterval { re: ONE, im: ZERO };

impl CInterval {
    #[inline]
    pub fn new(re: Interval, im: Interval) -> Self {
        CInterval { re, im }
    }

    #[inline]
    pub fn point(re: f64, im: f64) -> Self {
        CInterval { re: Interval::point(re), im: Interval::point(im) }
    }

    #[inline]
    pub fn real(re: Interval) -> Self {
        CInterval { re, im: ZERO }
    }

    #[inline]
    pub fn from_c64(z: num_complex::Complex64) -> Self {
        Self::point(z.re, z.im)
    }

    #[inline]
    pub fn mid_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.midpoint(), self.im.midpoint())
    }

    #[inline]
    pub fn conj(self) -> Self {
        CInterval { re: self.re, im: -self.im }
    }

    /// Multiplication by i.
    #[inline]
    pub fn mul_i(self) -> Self {
        CInterval { re: -self.im, im: self.re }
    }

    /// Enclosure of |z|.
    pub fn abs(self) -> Interval {
        let m2 = self.re.powi(2) + self.im.powi(2);
        m2.sqrt().expect("|z|^2 >= 0")
    }

    /// Upper bound on |z|.
    #[inline]
    pub fn mag(self) -> f64 {
        self.abs().hi
    }

    pub fn contains(self, z: num_complex::Complex64) -> bool {
        self.re.contains(z.re) && self.im.contains(z.im)
    }

    pub fn contains_c(self, other: CInterval) -> bool {
        self.re.contains_interval(other.re) && self.im.contains_interval(other.im)
    }

    /// Enclosure of e^z = e^re (cos im + i sin im).
    pub fn exp(self) -> Self {
        let r = self.re.exp();
        let (s, c) = sin_cos_interval(self.im);
        CInterval { re: r * c, im: r * s }
    }

    pub fn recip(self) -> Result<Self> {
        let den = self.re.powi(2) + self.im.powi(2);
        if den.contains(0.0) {
            return Err(Error::Domain("reciprocal of complex interval containing zero".into()));
        }
        Ok(CInterval { re: self.re / den, im: -self.im / den })
    }

    pub fn scale(self, s: Interval) -> Self {
        CInterval { re: self.re * s, im: self.im * s }
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Enclosure of (e^z - 1)/z, continued through 0 by the value 1.
    pub fn phi1(self) -> Self {
        let a = self.abs();
        if a.hi < 0.45 {
            // Series sum_{i>=0} z^i/(i+1)!, nested as 1 + z/2 (1 + z/3 (...)).
            const N: u32 = 18;
            let mut acc = C_ONE;
            for k in (1..=N).rev() {
                acc = C_ONE + (self * acc).scale(ONE / (k + 1) as f64);
            }
            let m = Interval::new(0.0, a.hi);
            let mut t = ONE;
            for k in 2..=(N + 2) {
                t = t * m / k as f64;
            }
            let rem = (t / (ONE - m / (N + 3) as f64)).hi;
            let ball = Interval::new(-rem, rem);
            acc + CInterval::new(ball, ball)
        } else {
            (self.exp() - C_ONE) * self.recip().expect("|z| >= 0.45")
        }
    }

    pub fn sum<I: IntoIterator<Item = CInterval>>(iter: I) -> CInterval {
        iter.into_iter().fold(C_ZERO, |acc, x| acc + x)
    }
}

impl Add for CInterval {
    type Output = CInterval;
    #[inline]
    fn add(self, rhs: CInterval) -> CInterval {
        CInterval { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for CInterval {
    type Output = CInterval;
    #[inline]
    fn sub(self, rhs: CInterval) -> CInterval {
        CInterval { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Neg for CInterval {
    type Output = CInterval;
    #[inline]
    fn neg(self) -> CInterval {
        CInterval { re: -self.re, im: -self.im }
    }
}

impl Mul for CInterval {
    type Output = CInterval;
    #[inline]
    fn mul(self, rhs: CInterval) -> CInterval {
        CInterval {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl From<Interval> for CInterval {
    fn from(re: Interval) -> Self {
        CInterval::real(re)
    }
}

impl From<num_complex::Complex64> for CInterval {
    fn from(z: num_complex::Complex64) -> Self {
        CInterval::from_c64(z)
    }
}

// ---------------------------------------------------------------------------
