//! IEEE-754 carrier formats.
//!
//! A carrier is the concrete binary format that holds program values between
//! instrumented operations. Everything above this module is generic over
//! [`Carrier`], so the same backends run on `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Carrier format selector, as it appears in configs and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CarrierFormat {
    Binary32,
    Binary64,
}

impl CarrierFormat {
    /// Significand width including the hidden bit (24 or 53).
    pub fn precision(self) -> u32 {
        match self {
            CarrierFormat::Binary32 => <f32 as Carrier>::PRECISION,
            CarrierFormat::Binary64 => <f64 as Carrier>::PRECISION,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CarrierFormat::Binary32 => "binary32",
            CarrierFormat::Binary64 => "binary64",
        }
    }
}

impl std::str::FromStr for CarrierFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary32" | "f32" | "single" => Ok(CarrierFormat::Binary32),
            "binary64" | "f64" | "double" => Ok(CarrierFormat::Binary64),
            other => Err(format!("unknown carrier `{other}` (expected binary32 or binary64)")),
        }
    }
}

impl Display for CarrierFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Operations the arithmetic backends need from a binary floating-point type.
///
/// `mul_add` must be a correctly rounded fused multiply-add; both std
/// implementations are.
pub trait Carrier:
    Copy
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const FORMAT: CarrierFormat;
    /// Significand width including the hidden bit.
    const PRECISION: u32;
    const ZERO: Self;

    fn mul_add(self, a: Self, b: Self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn is_nan(self) -> bool;
    fn is_finite(self) -> bool;
    fn is_sign_negative(self) -> bool;
    /// Smallest carrier value strictly greater than `self`.
    fn next_up(self) -> Self;
    /// Largest carrier value strictly less than `self`.
    fn next_down(self) -> Self;
    /// Magnitude exponent `e` with `2^(e-1) <= |x| < 2^e`, for finite nonzero
    /// `x` (subnormals included). `None` for zero, infinities and NaN.
    fn magnitude_exponent(self) -> Option<i32>;
    /// Exact widening conversion.
    fn to_f64(self) -> f64;
    /// Round-to-nearest narrowing conversion.
    fn from_f64(x: f64) -> Self;
    /// Parse decimal text directly to the nearest carrier value (no double
    /// rounding through another format).
    fn parse_decimal(text: &str) -> Option<Self>;
    fn to_bits_u64(self) -> u64;
}

/// `x * 2^n` with a single final rounding, following musl's `scalbn`.
pub fn scalbn(mut x: f64, mut n: i32) -> f64 {
    let two_p1023 = f64::from_bits(0x7fe0_0000_0000_0000);
    // 2^-1022 * 2^53
    let two_m969 = f64::from_bits(0x0360_0000_0000_0000);
    if n > 1023 {
        x *= two_p1023;
        n -= 1023;
        if n > 1023 {
            x *= two_p1023;
            n -= 1023;
            if n > 1023 {
                n = 1023;
            }
        }
    } else if n < -1022 {
        x *= two_m969;
        n += 1022 - 53;
        if n < -1022 {
            x *= two_m969;
            n += 1022 - 53;
            if n < -1022 {
                n = -1022;
            }
        }
    }
    x * f64::from_bits(((0x3ff + n) as u64) << 52)
}

macro_rules! impl_carrier {
    ($t:ty, $bits:ty, $fmt:expr, $prec:expr, $exp_bits:expr) => {
        impl Carrier for $t {
            const FORMAT: CarrierFormat = $fmt;
            const PRECISION: u32 = $prec;
            const ZERO: Self = 0.0;

            #[inline]
            fn mul_add(self, a: Self, b: Self) -> Self {
                <$t>::mul_add(self, a, b)
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            #[inline]
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            #[inline]
            fn is_nan(self) -> bool {
                <$t>::is_nan(self)
            }
            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
            #[inline]
            fn is_sign_negative(self) -> bool {
                <$t>::is_sign_negative(self)
            }

            fn next_up(self) -> Self {
                if self.is_nan() || self == <$t>::INFINITY {
                    return self;
                }
                if self == 0.0 {
                    return <$t>::from_bits(1);
                }
                let bits = self.to_bits();
                if self > 0.0 {
                    <$t>::from_bits(bits + 1)
                } else {
                    <$t>::from_bits(bits - 1)
                }
            }

            fn next_down(self) -> Self {
                -(-self).next_up()
            }

            fn magnitude_exponent(self) -> Option<i32> {
                if self == 0.0 || !self.is_finite() {
                    return None;
                }
                const MANT: u32 = $prec - 1;
                const BIAS: i32 = (1 << ($exp_bits - 1)) - 1;
                let bits = self.abs().to_bits();
                let biased = (bits >> MANT) as i32;
                if biased != 0 {
                    // |x| in [2^(biased-BIAS), 2^(biased-BIAS+1))
                    Some(biased - BIAS + 1)
                } else {
                    // subnormal: value = frac * 2^(1-BIAS-MANT)
                    let width = <$bits>::BITS - bits.leading_zeros();
                    Some(width as i32 + 1 - BIAS - MANT as i32)
                }
            }

            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn parse_decimal(text: &str) -> Option<Self> {
                text.parse::<$t>().ok()
            }
            #[inline]
            fn to_bits_u64(self) -> u64 {
                self.to_bits() as u64
            }
        }
    };
}

impl_carrier!(f32, u32, CarrierFormat::Binary32, 24, 8);
impl_carrier!(f64, u64, CarrierFormat::Binary64, 53, 11);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magnitude_exponent_brackets_value() {
        assert_eq!(1.0f64.magnitude_exponent(), Some(1));
        assert_eq!(0.75f64.magnitude_exponent(), Some(0));
        assert_eq!(2.0f64.magnitude_exponent(), Some(2));
        assert_eq!((-3.0f32).magnitude_exponent(), Some(2));
        assert_eq!(0.0f64.magnitude_exponent(), None);
        assert_eq!(f64::NAN.magnitude_exponent(), None);
        assert_eq!(f32::INFINITY.magnitude_exponent(), None);
        // smallest subnormals
        assert_eq!(f64::from_bits(1).magnitude_exponent(), Some(-1073));
        assert_eq!(f32::from_bits(1).magnitude_exponent(), Some(-148));
    }

    #[test]
    fn magnitude_exponent_holds_on_many_values() {
        let mut x = f64::from_bits(1);
        while x.is_finite() {
            let e = x.magnitude_exponent().unwrap();
            assert!(scalbn(1.0, e - 1) <= x && x < scalbn(1.0, e), "x={x:e} e={e}");
            x *= 3.7;
        }
        let mut y = f32::from_bits(3);
        while y.is_finite() {
            let e = y.magnitude_exponent().unwrap();
            let v = y as f64;
            assert!(scalbn(1.0, e - 1) <= v && v < scalbn(1.0, e));
            y *= 1.9;
        }
    }

    #[test]
    fn next_up_down() {
        assert_eq!(1.0f64.next_up(), 1.0 + f64::EPSILON);
        assert_eq!(1.0f64.next_down(), 1.0 - f64::EPSILON / 2.0);
        assert_eq!(0.0f64.next_up(), f64::from_bits(1));
        assert_eq!(0.0f64.next_down(), -f64::from_bits(1));
        assert_eq!((-1.0f32).next_up(), -1.0 + f32::EPSILON / 2.0);
        assert_eq!(f64::MAX.next_up(), f64::INFINITY);
    }

    #[test]
    fn scalbn_subnormal_and_large() {
        assert_eq!(scalbn(1.0, -1074), f64::from_bits(1));
        assert_eq!(scalbn(1.0, -1075), 0.0);
        assert_eq!(scalbn(1.5, -1074), f64::from_bits(2));
        assert_eq!(scalbn(1.0, 1023), f64::from_bits(0x7fe0_0000_0000_0000));
        assert_eq!(scalbn(0.75, 10), 768.0);
        assert_eq!(scalbn(1.0, 2000), f64::INFINITY);
    }

    #[test]
    fn decimal_parse_is_direct() {
        // 0.2161 as f32 parsed directly
        assert_eq!(f32::parse_decimal("0.2161"), Some(0.2161f32));
        assert_eq!(f64::parse_decimal("1e-6"), Some(1e-6));
    }
}
