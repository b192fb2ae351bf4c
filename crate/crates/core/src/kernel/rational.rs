//! Exact rationals with an inline machine-word representation.
//!
//! Values whose reduced numerator and denominator fit in `i64` are stored
//! inline; anything larger is promoted to a heap `BigRational`. Every
//! operation is exact, and the representation is canonical, so derived
//! equality and hashing agree with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// Reduced, denominator positive.
    Small(i64, i64),
    /// Only used when the reduced value does not fit `Small`.
    Big(Box<BigRational>),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    if a <= u64::MAX as u128 && b <= u64::MAX as u128 {
        return (a as u64).gcd(&(b as u64)) as u128;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl Rational {
    fn from_i128(n: i128, d: i128) -> Rational {
        assert!(d != 0, "rational with zero denominator");
        if n == 0 {
            return Rational(Repr::Small(0, 1));
        }
        let neg = (n < 0) != (d < 0);
        let (un, ud) = (n.unsigned_abs(), d.unsigned_abs());
        let g = gcd_u128(un, ud);
        let (un, ud) = (un / g, ud / g);
        if un <= i64::MAX as u128 && ud <= i64::MAX as u128 {
            let sn = if neg { -(un as i64) } else { un as i64 };
            return Rational(Repr::Small(sn, ud as i64));
        }
        let mut bn = BigInt::from(un);
        if neg {
            bn = -bn;
        }
        Rational(Repr::Big(Box::new(BigRational::new_raw(
            bn,
            BigInt::from(ud),
        ))))
    }

    fn from_big(b: BigRational) -> Rational {
        if let (Some(n), Some(d)) = (b.numer().to_i64(), b.denom().to_i64()) {
            return Rational(Repr::Small(n, d));
        }
        Rational(Repr::Big(Box::new(b)))
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    /// `n / d`; panics when `d == 0`.
    pub fn new(n: i64, d: i64) -> Rational {
        Rational::from_i128(n as i128, d as i128)
    }

    pub fn from_bigints(n: BigInt, d: BigInt) -> Rational {
        assert!(!d.is_zero(), "rational with zero denominator");
        Rational::from_big(BigRational::new(n, d))
    }

    pub fn int(n: i64) -> Rational {
        Rational(Repr::Small(n, 1))
    }

    pub fn zero() -> Rational {
        Rational::int(0)
    }

    pub fn one() -> Rational {
        Rational::int(1)
    }

    /// `2^e` for any integer exponent.
    pub fn pow2(e: i64) -> Rational {
        if (0..=62).contains(&e) {
            Rational(Repr::Small(1i64 << e, 1))
        } else if (-62..0).contains(&e) {
            Rational(Repr::Small(1, 1i64 << (-e)))
        } else if e > 0 {
            Rational::from_big(BigRational::from_integer(BigInt::one() << (e as usize)))
        } else {
            Rational::from_big(BigRational::new_raw(
                BigInt::one(),
                BigInt::one() << ((-e) as usize),
            ))
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(b) => b.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn abs(&self) -> Rational {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Rational {
        Rational::one() / self
    }

    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => BigInt::from(Integer::div_floor(n, d)),
            Repr::Big(b) => b.floor().to_integer(),
        }
    }

    pub fn ceil(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => BigInt::from(-Integer::div_floor(&(-(*n as i128)), &(*d as i128))),
            Repr::Big(b) => b.ceil().to_integer(),
        }
    }

    /// Floor as `i64`, saturating at the `i64` range.
    pub fn floor_i64(&self) -> i64 {
        self.floor().to_i64().unwrap_or(if self.is_negative() {
            i64::MIN
        } else {
            i64::MAX
        })
    }

    /// Ceiling as `i64`, saturating at the `i64` range.
    pub fn ceil_i64(&self) -> i64 {
        self.ceil().to_i64().unwrap_or(if self.is_negative() {
            i64::MIN
        } else {
            i64::MAX
        })
    }

    /// Smallest `e` with `2^e >= self`; requires `self > 0`.
    pub fn ceil_log2(&self) -> i64 {
        assert!(self.is_positive(), "ceil_log2 of a non-positive rational");
        let (n, d) = (self.numer(), self.denom());
        let mut e = n.bits() as i64 - d.bits() as i64;
        while Rational::pow2(e) < *self {
            e += 1;
        }
        while Rational::pow2(e - 1) >= *self {
            e -= 1;
        }
        e
    }

    /// Largest `e` with `2^e <= self`; requires `self > 0`.
    pub fn floor_log2(&self) -> i64 {
        let c = self.ceil_log2();
        if Rational::pow2(c) == *self {
            c
        } else {
            c - 1
        }
    }

    pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
        (a + b) * Rational::new(1, 2)
    }

    pub fn min_of<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
        if a <= b {
            a
        } else {
            b
        }
    }

    pub fn max_of<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
        if a >= b {
            a
        } else {
            b
        }
    }

    /// Nearest `f64`; for display and plotting only.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::int(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_i128(n as i128, 1)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_big(BigRational::from_integer(n))
    }
}

fn add_impl(a: &Rational, b: &Rational) -> Rational {
    if let (Repr::Small(an, ad), Repr::Small(bn, bd)) = (&a.0, &b.0) {
        if ad == bd {
            return Rational::from_i128(*an as i128 + *bn as i128, *ad as i128);
        }
        let x = *an as i128 * *bd as i128;
        let y = *bn as i128 * *ad as i128;
        if let Some(n) = x.checked_add(y) {
            return Rational::from_i128(n, *ad as i128 * *bd as i128);
        }
    }
    Rational::from_big(a.to_big() + b.to_big())
}

fn sub_impl(a: &Rational, b: &Rational) -> Rational {
    if let (Repr::Small(an, ad), Repr::Small(bn, bd)) = (&a.0, &b.0) {
        if ad == bd {
            return Rational::from_i128(*an as i128 - *bn as i128, *ad as i128);
        }
        let x = *an as i128 * *bd as i128;
        let y = *bn as i128 * *ad as i128;
        if let Some(n) = x.checked_sub(y) {
            return Rational::from_i128(n, *ad as i128 * *bd as i128);
        }
    }
    Rational::from_big(a.to_big() - b.to_big())
}

fn mul_impl(a: &Rational, b: &Rational) -> Rational {
    if let (Repr::Small(an, ad), Repr::Small(bn, bd)) = (&a.0, &b.0) {
        return Rational::from_i128(*an as i128 * *bn as i128, *ad as i128 * *bd as i128);
    }
    Rational::from_big(a.to_big() * b.to_big())
}

fn div_impl(a: &Rational, b: &Rational) -> Rational {
    assert!(!b.is_zero(), "rational division by zero");
    if let (Repr::Small(an, ad), Repr::Small(bn, bd)) = (&a.0, &b.0) {
        return Rational::from_i128(*an as i128 * *bd as i128, *ad as i128 * *bn as i128);
    }
    Rational::from_big(a.to_big() / b.to_big())
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $imp:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $imp(self, rhs)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $imp(self, &rhs)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $imp(&self, rhs)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $imp(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_impl);
forward_binop!(Sub, sub, sub_impl);
forward_binop!(Mul, mul, mul_impl);
forward_binop!(Div, div, div_impl);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = add_impl(self, rhs);
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = add_impl(self, &rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = sub_impl(self, rhs);
    }
}

impl SubAssign<Rational> for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        *self = sub_impl(self, &rhs);
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = mul_impl(self, rhs);
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) if *n != i64::MIN => Rational(Repr::Small(-n, *d)),
            _ => Rational::from_big(-self.to_big()),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Small(an, ad), Repr::Small(bn, bd)) = (&self.0, &other.0) {
            if ad == bd {
                return an.cmp(bn);
            }
            return (*an as i128 * *bd as i128).cmp(&(*bn as i128 * *ad as i128));
        }
        self.to_big().cmp(&other.to_big())
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}; expected \"p\" or \"p/q\"")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(Rational::from_bigints(n, d))
    }
}
