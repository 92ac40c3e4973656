//! Exact arithmetic helpers on top of `BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(v: usize) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Descending factorial `(x)_m = x (x-1) ... (x-m+1)`; zero once `m > x`.
pub fn falling(x: usize, m: usize) -> BigInt {
    if m > x {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for t in 0..m {
        acc *= BigInt::from(x - t);
    }
    acc
}

pub fn factorial(m: usize) -> BigInt {
    falling(m, m)
}

pub fn binomial(x: usize, m: usize) -> BigInt {
    if m > x {
        return BigInt::zero();
    }
    falling(x, m) / factorial(m)
}

pub fn pow(base: usize, e: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), e)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

/// `"3/8"`, `"1"`, `"0"`, `"-1/2"`.
pub fn fraction_string(r: &Rational) -> String {
    r.to_string()
}

pub fn parse_fraction(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}
