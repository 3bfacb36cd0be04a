//! Exact arithmetic on the circle for points of the form `frac(z·α + q)`.
//!
//! A [`TorusPoint`] is a pair `(z, q)` with `z` an integer orbit index and `q` a
//! rational offset reduced into `[0, 1)`. Since `α` is irrational, two points
//! are equal on the circle exactly when their pairs are equal. Ordering is
//! decided exactly for quadratic angles and by certified refinement otherwise.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{parse_err, Error, Result};

/// Default refinement budget for non-quadratic comparisons.
pub const DEFAULT_BUDGET_BITS: u32 = 4096;

const CACHE_BITS: u32 = 192;
const ENCLOSURE_BITS: u32 = 72;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

fn bitlen(z: i64) -> u32 {
    64 - z.unsigned_abs().leading_zeros()
}

/// Rounds a rational outward to a dyadic fraction with `bits` fractional bits.
fn dyadic_floor(x: &BigRational, bits: u32) -> BigInt {
    (x.numer() << bits as usize).div_floor(x.denom())
}

fn dyadic_ceil(x: &BigRational, bits: u32) -> BigInt {
    ceil_div(&(x.numer() << bits as usize), x.denom())
}

fn dyadic_to_rational(n: &BigInt, bits: u32) -> BigRational {
    BigRational::new(n.clone(), BigInt::one() << bits as usize)
}

/// A closed interval with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn zero() -> Self {
        Interval::point(BigRational::zero())
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64().unwrap_or(f64::NAN)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64().unwrap_or(f64::NAN)
    }

    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(2.into()))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// Every point of the interval is strictly below `x`.
    pub fn below(&self, x: &BigRational) -> bool {
        self.hi < *x
    }

    /// Every point of the interval is strictly above `x`.
    pub fn above(&self, x: &BigRational) -> bool {
        self.lo > *x
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval::new(&self.lo - &other.hi, &self.hi - &other.lo)
    }

    pub fn scale(&self, c: &BigRational) -> Interval {
        if c.is_negative() {
            Interval::new(&self.hi * c, &self.lo * c)
        } else {
            Interval::new(&self.lo * c, &self.hi * c)
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12}, {:.12}]", self.lo_f64(), self.hi_f64())
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Interval", 3)?;
        st.serialize_field("lo", &self.lo_f64())?;
        st.serialize_field("hi", &self.hi_f64())?;
        st.serialize_field("width", &self.width().to_f64().unwrap_or(f64::NAN))?;
        st.end()
    }
}

/// `[lo, hi] / 2^bits`.
#[derive(Clone, Debug)]
struct Dyadic {
    lo: BigInt,
    hi: BigInt,
    bits: u32,
}

impl Dyadic {
    fn truncate(&self, bits: u32) -> Dyadic {
        if bits >= self.bits {
            let s = (bits - self.bits) as usize;
            return Dyadic {
                lo: &self.lo << s,
                hi: &self.hi << s,
                bits,
            };
        }
        let div = BigInt::one() << (self.bits - bits) as usize;
        Dyadic {
            lo: self.lo.div_floor(&div),
            hi: ceil_div(&self.hi, &div),
            bits,
        }
    }
}

/// Continued fraction tail after the pre-period.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CfTail {
    /// Repeats the listed partial quotients forever.
    Periodic(Vec<u64>),
    /// `start, start + step, start + 2·step, …`
    Arithmetic { start: u64, step: u64 },
}

/// `[a0; preperiod…, tail…]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContinuedFraction {
    pub a0: i64,
    pub preperiod: Vec<u64>,
    pub tail: CfTail,
}

impl ContinuedFraction {
    pub fn periodic(a0: i64, preperiod: Vec<u64>, period: Vec<u64>) -> Self {
        ContinuedFraction {
            a0,
            preperiod,
            tail: CfTail::Periodic(period),
        }
    }

    /// Partial quotient `a_k` for `k ≥ 1`.
    pub fn partial_quotient(&self, k: usize) -> u64 {
        assert!(k >= 1);
        if k <= self.preperiod.len() {
            return self.preperiod[k - 1];
        }
        let j = k - self.preperiod.len() - 1;
        match &self.tail {
            CfTail::Periodic(p) => p[j % p.len()],
            CfTail::Arithmetic { start, step } => start + step * j as u64,
        }
    }

    fn canonicalize(mut self) -> Self {
        if let CfTail::Arithmetic { start, step: 0 } = self.tail {
            self.tail = CfTail::Periodic(vec![start]);
        }
        match &mut self.tail {
            CfTail::Periodic(per) => {
                let n = per.len();
                if let Some(l) = (1..=n)
                    .find(|&l| n % l == 0 && (0..n).all(|i| per[i] == per[i % l]))
                {
                    per.truncate(l);
                }
                while let (Some(&a), Some(&b)) = (self.preperiod.last(), per.last()) {
                    if a != b {
                        break;
                    }
                    self.preperiod.pop();
                    per.rotate_right(1);
                }
            }
            CfTail::Arithmetic { start, step } => {
                while let Some(&a) = self.preperiod.last() {
                    if *start <= *step || a != *start - *step {
                        break;
                    }
                    self.preperiod.pop();
                    *start -= *step;
                }
            }
        }
        self
    }

    fn validate(&self) -> Result<()> {
        if self.a0 != 0 {
            return Err(Error::InvalidAngle(
                "continued fraction must have a0 = 0".into(),
            ));
        }
        let bad_tail = match &self.tail {
            CfTail::Periodic(p) => p.is_empty() || p.contains(&0),
            CfTail::Arithmetic { start, .. } => *start == 0,
        };
        if bad_tail || self.preperiod.contains(&0) {
            return Err(Error::InvalidAngle(
                "partial quotients must be positive and the tail non-empty".into(),
            ));
        }
        Ok(())
    }

    /// Consecutive convergents `(h_{n-1}/k_{n-1}, h_n/k_n)` with `k_{n-1}·k_n ≥ 2^bits`.
    fn bracketing_convergents(&self, bits: u32) -> ((BigInt, BigInt), (BigInt, BigInt)) {
        let target = BigInt::one() << bits as usize;
        let (mut h0, mut h1) = (BigInt::one(), BigInt::from(self.a0));
        let (mut k0, mut k1) = (BigInt::zero(), BigInt::one());
        let mut n = 1;
        loop {
            let a = BigInt::from(self.partial_quotient(n));
            let h2 = &a * &h1 + &h0;
            let k2 = &a * &k1 + &k0;
            h0 = std::mem::replace(&mut h1, h2);
            k0 = std::mem::replace(&mut k1, k2);
            n += 1;
            if &k0 * &k1 >= target && n > 2 {
                return ((h0, k0), (h1, k1));
            }
        }
    }
}

/// The three ways of specifying an angle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AngleKind {
    /// `(p + q·√d) / r`.
    Quadratic {
        p: BigInt,
        q: BigInt,
        d: BigInt,
        r: BigInt,
    },
    /// Base-`base` expansion: the digits of `prefix`, then the recurrent
    /// schedule with digit 1 exactly at positions `2^k − 1`.
    DigitStream { base: u32, prefix: Vec<u8> },
    ContinuedFraction(ContinuedFraction),
}

/// Named angles used by the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialAngle {
    /// `Σ_k 2^{-n_k}` with `n_1 = 1`, `n_{k+1} = 2n_k + 1`.
    DyadicRecurrent,
    /// `Σ_k p^{-n_k}` on the same schedule.
    PAdicRecurrent(u32),
    /// `[0; M, M, M, …] = (√(M²+4) − M)/2`.
    HighPartialQuotient(u64),
}

/// `(p + q√d)/r` with `r > 0`.
#[derive(Clone, Debug)]
struct QuadForm {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    r: BigInt,
}

impl QuadForm {
    fn normalized(p: BigInt, q: BigInt, d: BigInt, r: BigInt) -> QuadForm {
        let (mut p, mut q, mut r) = if r.is_negative() { (-p, -q, -r) } else { (p, q, r) };
        let g = p.gcd(&q).gcd(&r);
        if !g.is_zero() && !g.is_one() {
            p /= &g;
            q /= &g;
            r /= &g;
        }
        QuadForm { p, q, d, r }
    }

    fn eval(&self, bits: u32) -> Dyadic {
        let t = (&self.q * &self.q * &self.d) << (2 * bits as usize);
        let s = t.sqrt();
        let (slo, shi) = if self.q.is_positive() {
            (s.clone(), s + 1)
        } else {
            (-&s - 1, -s)
        };
        let base = &self.p << bits as usize;
        Dyadic {
            lo: (&base + slo).div_floor(&self.r),
            hi: ceil_div(&(&base + shi), &self.r),
            bits,
        }
    }

    /// Exact sign of `a + b·√d`.
    fn sign(&self, a: &BigRational, b: &BigRational) -> Ordering {
        let sa = a.cmp(&BigRational::zero());
        let sb = b.cmp(&BigRational::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        let lhs = a * a;
        let rhs = b * b * BigRational::from_integer(self.d.clone());
        if lhs > rhs {
            sa
        } else {
            sb
        }
    }
}

fn cf_to_quadratic(cf: &ContinuedFraction) -> Option<QuadForm> {
    let CfTail::Periodic(per) = &cf.tail else {
        return None;
    };
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    for &c in per {
        let c = BigInt::from(c);
        let h2 = &c * &h1 + &h0;
        let k2 = &c * &k1 + &k0;
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
    }
    // Tail x solves k1·x² + (k0 − h1)·x − h0 = 0, x > 1.
    let u = &h1 - &k0;
    let disc = &u * &u + BigInt::from(4) * &k1 * &h0;
    let w = BigInt::from(2) * &k1;

    let (mut p0, mut p1) = (BigInt::one(), BigInt::from(cf.a0));
    let (mut q0, mut q1) = (BigInt::zero(), BigInt::one());
    for &b in &cf.preperiod {
        let b = BigInt::from(b);
        let p2 = &b * &p1 + &p0;
        let q2 = &b * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
    // α = (p1·x + p0)/(q1·x + q0) with x = (u + √disc)/w.
    let a = &p1 * &u + &p0 * &w;
    let b = p1;
    let c = &q1 * &u + &q0 * &w;
    let e = q1;
    let num_rat = &a * &c - &b * &e * &disc;
    let num_irr = &b * &c - &a * &e;
    let den = &c * &c - &e * &e * &disc;
    Some(QuadForm::normalized(num_rat, num_irr, disc, den))
}

fn recurrent_digit(j: usize) -> u8 {
    u8::from((j + 1).is_power_of_two() && j >= 1)
}

struct DigitCache {
    count: usize,
    value: BigInt,
}

struct AngleInner {
    kind: AngleKind,
    quad: Option<QuadForm>,
    cache: OnceLock<Dyadic>,
    digits: RwLock<DigitCache>,
    bounds: (f64, f64),
}

/// An irrational angle `α ∈ (0, 1)`. Cheap to clone.
#[derive(Clone)]
pub struct Angle {
    inner: Arc<AngleInner>,
}

impl PartialEq for Angle {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.kind == other.inner.kind
    }
}

impl Eq for Angle {}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Angle({self})")
    }
}

/// Certified value of a torus point: the fractional part lies in `frac`,
/// and `z·α + q` has integer part `floor`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointValue {
    pub frac: Interval,
    pub floor: i64,
}

/// Outward-rounded `f64` bounds on the fractional value of a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    /// Decides the order when the enclosures are disjoint.
    pub fn cmp(&self, other: &Enclosure) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

impl Angle {
    pub fn new(kind: AngleKind) -> Result<Angle> {
        let (kind, quad) = match kind {
            AngleKind::Quadratic { p, q, d, r } => {
                if !d.is_positive() || q.is_zero() || r.is_zero() {
                    return Err(Error::InvalidAngle(
                        "need d > 0, q ≠ 0 and r ≠ 0".into(),
                    ));
                }
                let s = d.sqrt();
                if &s * &s == d {
                    return Err(Error::InvalidAngle(format!("{d} is a perfect square")));
                }
                let f = QuadForm::normalized(p, q, d, r);
                let a = BigRational::new(f.p.clone(), f.r.clone());
                let b = BigRational::new(f.q.clone(), f.r.clone());
                if f.sign(&a, &b) != Ordering::Greater
                    || f.sign(&(BigRational::one() - &a), &-b) != Ordering::Greater
                {
                    return Err(Error::InvalidAngle("value must lie in (0, 1)".into()));
                }
                let kind = AngleKind::Quadratic {
                    p: f.p.clone(),
                    q: f.q.clone(),
                    d: f.d.clone(),
                    r: f.r.clone(),
                };
                (kind, Some(f))
            }
            AngleKind::ContinuedFraction(cf) => {
                cf.validate()?;
                let cf = cf.canonicalize();
                let quad = cf_to_quadratic(&cf);
                (AngleKind::ContinuedFraction(cf), quad)
            }
            AngleKind::DigitStream { base, prefix } => {
                if !(2..=36).contains(&base) {
                    return Err(Error::InvalidAngle("digit base must be in 2..=36".into()));
                }
                if prefix.iter().any(|&d| d as u32 >= base) {
                    return Err(Error::InvalidAngle("digit exceeds base".into()));
                }
                (AngleKind::DigitStream { base, prefix }, None)
            }
        };
        let mut angle = Angle {
            inner: Arc::new(AngleInner {
                kind,
                quad,
                cache: OnceLock::new(),
                digits: RwLock::new(DigitCache {
                    count: 0,
                    value: BigInt::zero(),
                }),
                bounds: (0.0, 1.0),
            }),
        };
        let v = angle.eval(60);
        let bounds = (
            v.lo_f64().next_down().next_down(),
            v.hi_f64().next_up().next_up(),
        );
        Arc::get_mut(&mut angle.inner)
            .expect("fresh angle is uniquely owned")
            .bounds = bounds;
        Ok(angle)
    }

    pub fn quadratic(p: i64, q: i64, d: i64, r: i64) -> Result<Angle> {
        Angle::new(AngleKind::Quadratic {
            p: p.into(),
            q: q.into(),
            d: d.into(),
            r: r.into(),
        })
    }

    /// `(√5 − 1)/2 = [0; 1, 1, 1, …]`.
    pub fn golden() -> Angle {
        Angle::quadratic(-1, 1, 5, 2).expect("valid angle")
    }

    pub fn special(kind: SpecialAngle) -> Result<Angle> {
        match kind {
            SpecialAngle::DyadicRecurrent => Angle::new(AngleKind::DigitStream {
                base: 2,
                prefix: vec![],
            }),
            SpecialAngle::PAdicRecurrent(p) => {
                if p < 2 || !(2..p).take_while(|i| i * i <= p).all(|i| p % i != 0) {
                    return Err(Error::InvalidAngle(format!("{p} is not prime")));
                }
                Angle::new(AngleKind::DigitStream {
                    base: p,
                    prefix: vec![],
                })
            }
            SpecialAngle::HighPartialQuotient(m) => {
                if m == 0 {
                    return Err(Error::InvalidAngle("partial quotient must be ≥ 1".into()));
                }
                Angle::new(AngleKind::ContinuedFraction(ContinuedFraction::periodic(
                    0,
                    vec![],
                    vec![m],
                )))
            }
        }
    }

    pub fn kind(&self) -> &AngleKind {
        &self.inner.kind
    }

    /// Whether comparisons are decided by closed-form algebra.
    pub fn is_quadratic(&self) -> bool {
        self.inner.quad.is_some()
    }

    /// Outward-rounded `f64` bounds on `α`.
    pub fn bounds_f64(&self) -> (f64, f64) {
        self.inner.bounds
    }

    pub fn value_f64(&self) -> f64 {
        self.eval(64).mid_f64()
    }

    /// Digit `j ≥ 1` of a digit-stream angle.
    pub fn digit(&self, j: usize) -> Option<u8> {
        match &self.inner.kind {
            AngleKind::DigitStream { prefix, .. } => Some(if j <= prefix.len() {
                prefix[j - 1]
            } else {
                recurrent_digit(j - prefix.len())
            }),
            _ => None,
        }
    }

    fn digit_value(&self, m: usize) -> BigInt {
        {
            let cache = self.inner.digits.read().expect("digit cache poisoned");
            if cache.count == m {
                return cache.value.clone();
            }
            if cache.count > m {
                let AngleKind::DigitStream { base, .. } = &self.inner.kind else {
                    unreachable!()
                };
                let div = BigInt::from(*base).pow((cache.count - m) as u32);
                return cache.value.div_floor(&div);
            }
        }
        let mut cache = self.inner.digits.write().expect("digit cache poisoned");
        let AngleKind::DigitStream { base, .. } = &self.inner.kind else {
            unreachable!()
        };
        let base = BigInt::from(*base);
        while cache.count < m {
            let j = cache.count + 1;
            let d = self.digit(j).expect("digit stream");
            cache.value = &cache.value * &base + BigInt::from(d);
            cache.count = j;
        }
        cache.value.clone()
    }

    fn compute(&self, bits: u32) -> Dyadic {
        if let Some(f) = &self.inner.quad {
            return f.eval(bits);
        }
        match &self.inner.kind {
            AngleKind::ContinuedFraction(cf) => {
                let ((h0, k0), (h1, k1)) = cf.bracketing_convergents(bits + 2);
                let a = BigRational::new(h0, k0);
                let b = BigRational::new(h1, k1);
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                Dyadic {
                    lo: dyadic_floor(&lo, bits),
                    hi: dyadic_ceil(&hi, bits),
                    bits,
                }
            }
            AngleKind::DigitStream { base, .. } => {
                let m = (bits as f64 / (*base as f64).log2()).ceil() as usize + 1;
                let v = self.digit_value(m);
                let denom = BigInt::from(*base).pow(m as u32);
                Dyadic {
                    lo: (&v << bits as usize).div_floor(&denom),
                    hi: ceil_div(&((v + 1) << bits as usize), &denom),
                    bits,
                }
            }
            AngleKind::Quadratic { .. } => unreachable!(),
        }
    }

    /// `α` to within 3 units of `2^-bits`.
    fn alpha(&self, bits: u32) -> Dyadic {
        if bits <= CACHE_BITS {
            self.inner
                .cache
                .get_or_init(|| self.compute(CACHE_BITS))
                .truncate(bits)
        } else {
            self.compute(bits)
        }
    }

    /// Certified `α` with width at most `2^-k`.
    pub fn eval(&self, k: u32) -> Interval {
        let d = self.alpha(k + 2);
        Interval::new(
            dyadic_to_rational(&d.lo, d.bits),
            dyadic_to_rational(&d.hi, d.bits),
        )
    }

    fn unwrapped(&self, z: i64, c: &BigRational, bits: u32) -> Dyadic {
        let a = self.alpha(bits);
        let zb = BigInt::from(z);
        let (lo, hi) = if z >= 0 {
            (&a.lo * &zb, &a.hi * &zb)
        } else {
            (&a.hi * &zb, &a.lo * &zb)
        };
        Dyadic {
            lo: lo + dyadic_floor(c, bits),
            hi: hi + dyadic_ceil(c, bits),
            bits,
        }
    }

    /// Certified value of `z·α + c` with width at most `2^-k`.
    pub fn eval_affine(&self, a: &Affine, k: u32) -> Interval {
        if a.z == 0 {
            return Interval::point(a.c.clone());
        }
        let d = self.unwrapped(a.z, &a.c, k + 3 + bitlen(a.z));
        Interval::new(
            dyadic_to_rational(&d.lo, d.bits),
            dyadic_to_rational(&d.hi, d.bits),
        )
    }

    /// Certified fractional value of a point with width at most `2^-k`, and
    /// the exact integer part of `z·α + q`.
    pub fn eval_point(&self, p: &TorusPoint, k: u32) -> PointValue {
        if p.z == 0 {
            return PointValue {
                frac: Interval::point(p.q.clone()),
                floor: 0,
            };
        }
        let mut bits = k + 3 + bitlen(p.z);
        loop {
            let d = self.unwrapped(p.z, &p.q, bits);
            let unit = BigInt::one() << bits as usize;
            let f_lo = d.lo.div_floor(&unit);
            let f_hi = ceil_div(&d.hi, &unit) - 1;
            if f_lo == f_hi {
                let shift = &f_lo << bits as usize;
                let lo = dyadic_to_rational(&(&d.lo - &shift), bits).max(BigRational::zero());
                let hi = dyadic_to_rational(&(&d.hi - &shift), bits).min(BigRational::one());
                return PointValue {
                    frac: Interval::new(lo, hi),
                    floor: f_lo.to_i64().expect("floor fits the orbit index range"),
                };
            }
            bits += 32;
        }
    }

    /// Exact integer part of `z·α + q`.
    pub fn floor(&self, p: &TorusPoint) -> i64 {
        self.eval_point(p, 8).floor
    }

    pub fn enclosure(&self, p: &TorusPoint) -> Enclosure {
        self.enclosure_and_floor(p).0
    }

    /// The enclosure together with the exact integer part of `z·α + q`.
    pub fn enclosure_and_floor(&self, p: &TorusPoint) -> (Enclosure, i64) {
        let v = self.eval_point(p, ENCLOSURE_BITS);
        let enc = Enclosure {
            lo: v.frac.lo_f64().next_down().max(0.0),
            hi: v.frac.hi_f64().next_up().min(1.0),
        };
        (enc, v.floor)
    }

    /// Exact sign of `z·α + c`, with the default budget.
    pub fn sign(&self, a: &Affine) -> Result<Ordering> {
        self.sign_with_budget(a, DEFAULT_BUDGET_BITS)
    }

    pub fn sign_with_budget(&self, a: &Affine, budget: u32) -> Result<Ordering> {
        if a.z == 0 {
            return Ok(a.c.cmp(&BigRational::zero()));
        }
        if let Some(f) = &self.inner.quad {
            let z = BigRational::from_integer(a.z.into());
            let r = BigRational::from_integer(f.r.clone());
            let ra = &z * BigRational::from_integer(f.p.clone()) / &r + &a.c;
            let rb = &z * BigRational::from_integer(f.q.clone()) / &r;
            return Ok(f.sign(&ra, &rb));
        }
        let zero = BigRational::zero();
        let mut k = 64;
        while k <= budget {
            let v = self.eval_affine(a, k);
            if v.above(&zero) {
                return Ok(Ordering::Greater);
            }
            if v.below(&zero) {
                return Ok(Ordering::Less);
            }
            k *= 2;
        }
        Err(Error::PrecisionExhausted { budget })
    }

    /// Exact order of the fractional values of two points.
    pub fn compare(&self, a: &TorusPoint, b: &TorusPoint) -> Result<Ordering> {
        self.compare_with_budget(a, b, DEFAULT_BUDGET_BITS)
    }

    pub fn compare_with_budget(
        &self,
        a: &TorusPoint,
        b: &TorusPoint,
        budget: u32,
    ) -> Result<Ordering> {
        if a == b {
            return Ok(Ordering::Equal);
        }
        if self.is_quadratic() {
            let diff = self.unwrap(a)?.sub(&self.unwrap(b)?)?;
            return self.sign(&diff);
        }
        let mut k = 64;
        while k <= budget {
            let va = self.eval_point(a, k);
            let vb = self.eval_point(b, k);
            if va.frac.hi < vb.frac.lo {
                return Ok(Ordering::Less);
            }
            if va.frac.lo > vb.frac.hi {
                return Ok(Ordering::Greater);
            }
            k *= 2;
        }
        Err(Error::PrecisionExhausted { budget })
    }

    /// The point as a real number in `[0, 1)`: `z·α + q − floor`.
    pub fn unwrap(&self, p: &TorusPoint) -> Result<Affine> {
        let f = self.floor(p);
        Ok(Affine {
            z: p.z,
            c: &p.q - BigRational::from_integer(f.into()),
        })
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner.kind {
            AngleKind::Quadratic { p, q, d, r } => write!(f, "quad:({p},{q},{d},{r})"),
            AngleKind::DigitStream { base, prefix } => {
                let tail = if *base == 2 {
                    "dyadic-recurrent"
                } else {
                    "recurrent"
                };
                write!(f, "digits{base}:")?;
                if !prefix.is_empty() {
                    for d in prefix {
                        write!(f, "{}", char::from_digit(*d as u32, 36).expect("digit"))?;
                    }
                    write!(f, "+")?;
                }
                write!(f, "{tail}")
            }
            AngleKind::ContinuedFraction(cf) => {
                write!(f, "cf:[{};", cf.a0)?;
                for a in &cf.preperiod {
                    write!(f, "{a},")?;
                }
                match &cf.tail {
                    CfTail::Periodic(p) => {
                        let body: Vec<String> = p.iter().map(u64::to_string).collect();
                        write!(f, "({})]", body.join(","))
                    }
                    CfTail::Arithmetic { start, step } => write!(f, "arith({start},{step})]"),
                }
            }
        }
    }
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u64>()
                .map_err(|e| parse_err("continued fraction", format!("{t}: {e}")))
        })
        .collect()
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Angle> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(body) = s.strip_prefix("quad:") {
            let inner = body
                .strip_prefix('(')
                .and_then(|b| b.strip_suffix(')'))
                .ok_or_else(|| parse_err("angle", "expected quad:(p,q,d,r)"))?;
            let v: Vec<BigInt> = inner
                .split(',')
                .map(|t| t.parse::<BigInt>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err("angle", e.to_string()))?;
            let [p, q, d, r]: [BigInt; 4] = v
                .try_into()
                .map_err(|_| parse_err("angle", "expected four integers"))?;
            return Angle::new(AngleKind::Quadratic { p, q, d, r });
        }
        if let Some(body) = s.strip_prefix("cf:") {
            let inner = body
                .strip_prefix('[')
                .and_then(|b| b.strip_suffix(']'))
                .ok_or_else(|| parse_err("angle", "expected cf:[a0;…]"))?;
            let (a0, rest) = inner
                .split_once(';')
                .ok_or_else(|| parse_err("angle", "missing ';'"))?;
            let a0: i64 = a0.parse().map_err(|_| parse_err("angle", "bad a0"))?;
            let cf = if let Some(i) = rest.find("arith(") {
                let pre = parse_u64_list(&rest[..i])?;
                let args = rest[i + 6..]
                    .strip_suffix(')')
                    .ok_or_else(|| parse_err("angle", "unclosed arith("))?;
                let v = parse_u64_list(args)?;
                let [start, step]: [u64; 2] = v
                    .try_into()
                    .map_err(|_| parse_err("angle", "arith takes two arguments"))?;
                ContinuedFraction {
                    a0,
                    preperiod: pre,
                    tail: CfTail::Arithmetic { start, step },
                }
            } else if let Some(i) = rest.find('(') {
                let pre = parse_u64_list(&rest[..i])?;
                let per = rest[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| parse_err("angle", "unclosed period"))?;
                ContinuedFraction::periodic(a0, pre, parse_u64_list(per)?)
            } else if let Some(head) = rest.strip_suffix("...") {
                let mut pre = parse_u64_list(head)?;
                let last = pre
                    .pop()
                    .ok_or_else(|| parse_err("angle", "nothing to repeat"))?;
                ContinuedFraction::periodic(a0, pre, vec![last])
            } else {
                return Err(Error::InvalidAngle(
                    "finite continued fractions are rational".into(),
                ));
            };
            return Angle::new(AngleKind::ContinuedFraction(cf));
        }
        if let Some(body) = s.strip_prefix("digits") {
            let (base, spec) = body
                .split_once(':')
                .ok_or_else(|| parse_err("angle", "expected digits<base>:<schedule>"))?;
            let base: u32 = base.parse().map_err(|_| parse_err("angle", "bad base"))?;
            let (prefix, tail) = match spec.split_once('+') {
                Some((p, t)) => (p, t),
                None => ("", spec),
            };
            if tail != "recurrent" && tail != "dyadic-recurrent" {
                return Err(parse_err("angle", format!("unknown schedule {tail}")));
            }
            let prefix = prefix
                .chars()
                .map(|c| {
                    c.to_digit(36)
                        .map(|d| d as u8)
                        .ok_or_else(|| parse_err("angle", format!("bad digit {c}")))
                })
                .collect::<Result<Vec<u8>>>()?;
            return Angle::new(AngleKind::DigitStream { base, prefix });
        }
        Err(parse_err("angle", format!("unknown form {s}")))
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// A point `frac(z·α + q)` of the circle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusPoint {
    z: i64,
    q: BigRational,
}

fn reduce_unit(q: BigRational) -> BigRational {
    let f = q.floor();
    q - f
}

impl TorusPoint {
    pub fn new(z: i64, q: BigRational) -> TorusPoint {
        TorusPoint {
            z,
            q: reduce_unit(q),
        }
    }

    pub fn zero() -> TorusPoint {
        TorusPoint::new(0, BigRational::zero())
    }

    /// `frac(z·α)`.
    pub fn orbit(z: i64) -> TorusPoint {
        TorusPoint::new(z, BigRational::zero())
    }

    /// `frac(n/d)`.
    pub fn rational(n: i64, d: i64) -> TorusPoint {
        TorusPoint::new(0, ratio(n, d))
    }

    pub fn z(&self) -> i64 {
        self.z
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn is_zero(&self) -> bool {
        self.z == 0 && self.q.is_zero()
    }

    pub fn add(&self, other: &TorusPoint) -> Result<TorusPoint> {
        Ok(TorusPoint::new(
            self.z.checked_add(other.z).ok_or(Error::Overflow)?,
            &self.q + &other.q,
        ))
    }

    pub fn sub(&self, other: &TorusPoint) -> Result<TorusPoint> {
        Ok(TorusPoint::new(
            self.z.checked_sub(other.z).ok_or(Error::Overflow)?,
            &self.q - &other.q,
        ))
    }

    pub fn neg(&self) -> TorusPoint {
        TorusPoint::new(-self.z, -self.q.clone())
    }

    /// `self + k·α`.
    pub fn shift(&self, k: i64) -> Result<TorusPoint> {
        Ok(TorusPoint {
            z: self.z.checked_add(k).ok_or(Error::Overflow)?,
            q: self.q.clone(),
        })
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*al+{}/{}", self.z, self.q.numer(), self.q.denom())
    }
}

impl FromStr for TorusPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<TorusPoint> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = |d: &str| parse_err("point", format!("{s}: {d}"));
        let parse_q = |t: &str| -> Result<BigRational> {
            if t.is_empty() {
                return Ok(BigRational::zero());
            }
            let t = t.strip_prefix('+').unwrap_or(t);
            t.parse::<BigRational>().map_err(|e| bad(&e.to_string()))
        };
        match s.find("al") {
            Some(i) => {
                let head = s[..i].strip_suffix('*').unwrap_or(&s[..i]);
                let z = match head {
                    "" | "+" => 1,
                    "-" => -1,
                    h => h.parse::<i64>().map_err(|e| bad(&e.to_string()))?,
                };
                Ok(TorusPoint::new(z, parse_q(&s[i + 2..])?))
            }
            None => Ok(TorusPoint::new(0, parse_q(&s)?)),
        }
    }
}

impl Serialize for TorusPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TorusPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// A real number `z·α + c`. Used for unwrapped coordinates and symbolic lengths.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Affine {
    pub z: i64,
    pub c: BigRational,
}

impl Affine {
    pub fn zero() -> Affine {
        Affine {
            z: 0,
            c: BigRational::zero(),
        }
    }

    pub fn constant(c: BigRational) -> Affine {
        Affine { z: 0, c }
    }

    pub fn add(&self, o: &Affine) -> Result<Affine> {
        Ok(Affine {
            z: self.z.checked_add(o.z).ok_or(Error::Overflow)?,
            c: &self.c + &o.c,
        })
    }

    pub fn sub(&self, o: &Affine) -> Result<Affine> {
        Ok(Affine {
            z: self.z.checked_sub(o.z).ok_or(Error::Overflow)?,
            c: &self.c - &o.c,
        })
    }

    pub fn scale(&self, k: i64) -> Result<Affine> {
        Ok(Affine {
            z: self.z.checked_mul(k).ok_or(Error::Overflow)?,
            c: &self.c * BigRational::from_integer(k.into()),
        })
    }
}

/// `z*al+c`, with the same shorthands as torus points.
impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.z == 0 {
            return write!(f, "{}", self.c);
        }
        match self.z {
            1 => write!(f, "al")?,
            -1 => write!(f, "-al")?,
            z => write!(f, "{z}*al")?,
        }
        if self.c.is_positive() {
            write!(f, "+{}", self.c)?;
        } else if self.c.is_negative() {
            write!(f, "{}", self.c)?;
        }
        Ok(())
    }
}

impl Serialize for Affine {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
