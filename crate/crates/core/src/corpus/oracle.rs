//! Exact rational references. Nothing here touches floating-point arithmetic
//! beyond decoding inputs exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact value of a finite binary64 number.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Exact value of a decimal literal such as `0.2161` or `-5e13`.
pub fn decimal(text: &str) -> BigRational {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().expect("exponent")),
        None => (text, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("digits");
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        q = -q;
    }
    q
}

/// Exact sum of binary64 values, accumulated as an integer multiple of 2^-1074.
pub fn exact_sum(values: &[f64]) -> BigRational {
    let mut acc = BigInt::zero();
    for &v in values {
        if v == 0.0 {
            continue;
        }
        let bits = v.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, shift) = if exp == 0 { (frac, 0) } else { (frac | (1u64 << 52), exp - 1) };
        let mut term = BigInt::from(mant) << shift as usize;
        if v < 0.0 {
            term = -term;
        }
        acc += term;
    }
    BigRational::new(acc, BigInt::one() << 1074usize)
}

/// Nearest binary64 to an exact rational.
pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Cramer's rule on a 2x2 system.
pub fn solve2(a: [[BigRational; 2]; 2], b: [BigRational; 2]) -> [BigRational; 2] {
    let det = &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0];
    let x1 = (&b[0] * &a[1][1] - &a[0][1] * &b[1]) / &det;
    let x2 = (&a[0][0] * &b[1] - &b[0] * &a[1][0]) / &det;
    [x1, x2]
}

fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Rational form of Kahan's continued-fraction function.
pub fn cf(x: &BigRational) -> BigRational {
    let a = x - q(2);
    let b = x - q(5);
    let b2 = &b * &b;
    q(4) - q(3) * &a * (&b2 + q(4)) / (x + &a * &a * (&b2 + q(3)))
}

/// Rational form of the equivalent polynomial quotient.
pub fn rp(x: &BigRational) -> BigRational {
    let num = q(622) - x * (q(751) - x * (q(324) - x * (q(59) - q(4) * x)));
    let den = q(112) - x * (q(151) - x * (q(72) - x * (q(14) - x)));
    num / den
}
