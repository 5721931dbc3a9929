//! Double-word arithmetic built from error-free transformations.
//!
//! A [`DoubleWord`] is the unevaluated sum `hi + lo` of two carrier values.
//! Constructors keep `hi` equal to the round-to-nearest value of the pair, so
//! collapsing back to the carrier is just taking `hi`.

use crate::carrier::Carrier;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWord<C> {
    pub hi: C,
    pub lo: C,
}

impl<C: Carrier> DoubleWord<C> {
    #[inline]
    pub fn new(hi: C, lo: C) -> Self {
        Self { hi, lo }
    }

    #[inline]
    pub fn from_carrier(x: C) -> Self {
        Self { hi: x, lo: C::ZERO }
    }

    /// Nearest carrier value.
    #[inline]
    pub fn round(self) -> C {
        self.hi
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.hi == C::ZERO && self.lo == C::ZERO
    }

    #[inline]
    pub fn is_exact(self) -> bool {
        self.lo == C::ZERO
    }

    #[inline]
    pub fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

/// Knuth's branch-free TwoSum: `hi + lo == a + b` exactly and
/// `hi == fl(a + b)`. An overflowing sum yields `(±inf, 0)`.
#[inline]
pub fn two_sum<C: Carrier>(a: C, b: C) -> DoubleWord<C> {
    let s = a + b;
    if !s.is_finite() {
        return DoubleWord::new(s, C::ZERO);
    }
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    DoubleWord::new(s, e)
}

/// Dekker's FastTwoSum, valid when `|a| >= |b|` or `a == 0`.
#[inline]
pub fn fast_two_sum<C: Carrier>(a: C, b: C) -> DoubleWord<C> {
    let s = a + b;
    if !s.is_finite() {
        return DoubleWord::new(s, C::ZERO);
    }
    let e = b - (s - a);
    DoubleWord::new(s, e)
}

/// FMA-based TwoProd. The flag is set when the residual could not be
/// represented (overflow, or a product small enough that `fma` residuals lose
/// bits); `lo` is then flushed to zero.
#[inline]
pub fn two_prod<C: Carrier>(a: C, b: C) -> (DoubleWord<C>, bool) {
    let p = a * b;
    if !p.is_finite() {
        return (DoubleWord::new(p, C::ZERO), true);
    }
    if p == C::ZERO {
        let flushed = a != C::ZERO && b != C::ZERO && a.is_finite() && b.is_finite();
        return (DoubleWord::new(p, C::ZERO), flushed);
    }
    // the residual of a product is a multiple of 2^(ea+eb-2p); it is exact
    // as long as that stays above the subnormal quantum
    let e = p.magnitude_exponent().unwrap_or(0);
    if e < min_exact_product_exponent::<C>() {
        return (DoubleWord::new(p, C::ZERO), true);
    }
    (DoubleWord::new(p, a.mul_add(b, -p)), false)
}

#[inline]
fn min_exact_product_exponent<C: Carrier>() -> i32 {
    // smallest normal exponent (magnitude convention) plus one significand
    match C::PRECISION {
        24 => -125 + 24,
        _ => -1021 + 53,
    }
}

/// Correctly rounded quotient with its residual: `hi = fl(a / b)`,
/// `lo = fl((a - hi*b) / b)`. Specials follow IEEE with `lo = 0`.
#[inline]
pub fn exact_div<C: Carrier>(a: C, b: C) -> DoubleWord<C> {
    let q = a / b;
    if !q.is_finite() || q == C::ZERO {
        return DoubleWord::new(q, C::ZERO);
    }
    let r = (-q).mul_add(b, a);
    DoubleWord::new(q, r / b)
}

/// Correctly rounded square root with a one-step Newton correction term.
#[inline]
pub fn exact_sqrt<C: Carrier>(a: C) -> DoubleWord<C> {
    let s = a.sqrt();
    if !s.is_finite() || s == C::ZERO {
        return DoubleWord::new(s, C::ZERO);
    }
    let r = (-s).mul_add(s, a);
    DoubleWord::new(s, r / (s + s))
}

/// Exact (or residual-carrying) result of one carrier operation.
#[inline]
pub fn exact_op<C: Carrier>(op: BinaryOp, a: C, b: C) -> (DoubleWord<C>, bool) {
    match op {
        BinaryOp::Add => (two_sum(a, b), false),
        BinaryOp::Sub => (two_sum(a, -b), false),
        BinaryOp::Mul => two_prod(a, b),
        BinaryOp::Div => (exact_div(a, b), false),
    }
}

/// The four instrumented binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    #[inline]
    pub fn apply<C: Carrier>(self, a: C, b: C) -> C {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }
}

// Double-word by double-word operations. When both operands have a zero low
// part they reduce to the single-operation routines above, so a value that was
// not perturbed is treated exactly like a plain carrier operand.

pub fn dw_add<C: Carrier>(x: DoubleWord<C>, y: DoubleWord<C>) -> DoubleWord<C> {
    if x.is_exact() && y.is_exact() {
        return two_sum(x.hi, y.hi);
    }
    let s = two_sum(x.hi, y.hi);
    if !s.hi.is_finite() {
        return s;
    }
    let t = two_sum(x.lo, y.lo);
    let u = fast_two_sum(s.hi, s.lo + t.hi);
    fast_two_sum(u.hi, u.lo + t.lo)
}

pub fn dw_mul<C: Carrier>(x: DoubleWord<C>, y: DoubleWord<C>) -> (DoubleWord<C>, bool) {
    let (p, flushed) = two_prod(x.hi, y.hi);
    if x.is_exact() && y.is_exact() || !p.hi.is_finite() {
        return (p, flushed);
    }
    let cross = x.hi.mul_add(y.lo, x.lo * y.hi);
    (fast_two_sum(p.hi, p.lo + cross), flushed)
}

pub fn dw_div<C: Carrier>(x: DoubleWord<C>, y: DoubleWord<C>) -> DoubleWord<C> {
    if x.is_exact() && y.is_exact() {
        return exact_div(x.hi, y.hi);
    }
    let q1 = x.hi / y.hi;
    if !q1.is_finite() || q1 == C::ZERO {
        return DoubleWord::new(q1, C::ZERO);
    }
    // x - q1*y, with the leading product residual taken exactly
    let r = (-q1).mul_add(y.hi, x.hi);
    let r = r + x.lo - q1 * y.lo;
    fast_two_sum(q1, r / y.hi)
}

pub fn dw_op<C: Carrier>(op: BinaryOp, x: DoubleWord<C>, y: DoubleWord<C>) -> (DoubleWord<C>, bool) {
    match op {
        BinaryOp::Add => (dw_add(x, y), false),
        BinaryOp::Sub => (dw_add(x, y.neg()), false),
        BinaryOp::Mul => dw_mul(x, y),
        BinaryOp::Div => (dw_div(x, y), false),
    }
}

pub fn dw_sqrt<C: Carrier>(x: DoubleWord<C>) -> DoubleWord<C> {
    if x.is_exact() {
        return exact_sqrt(x.hi);
    }
    let s = x.hi.sqrt();
    if !s.is_finite() || s == C::ZERO {
        return DoubleWord::new(s, C::ZERO);
    }
    let r = (-s).mul_add(s, x.hi) + x.lo;
    fast_two_sum(s, r / (s + s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Signed;

    fn q(x: f64) -> BigRational {
        BigRational::from_float(x).unwrap()
    }

    #[test]
    fn two_sum_examples() {
        let e = 2f64.powi(-53);
        assert_eq!(two_sum(1.0, e), DoubleWord::new(1.0, e));
        assert_eq!(two_sum(3.5, 0.0), DoubleWord::new(3.5, 0.0));
        let r = two_sum(1e16, 1.0);
        assert_eq!(r, DoubleWord::new(1e16, 1.0));
        assert_eq!(q(r.hi) + q(r.lo), q(1e16) + q(1.0));
        let o = two_sum(f64::MAX, f64::MAX);
        assert_eq!(o, DoubleWord::new(f64::INFINITY, 0.0));
    }

    #[test]
    fn two_prod_examples() {
        assert_eq!(two_prod(1.5, 2.0), (DoubleWord::new(3.0, 0.0), false));
        assert_eq!(two_prod(0.0, 7.0), (DoubleWord::new(0.0, 0.0), false));
        let a = 1.0 + f64::EPSILON;
        let (p, flag) = two_prod(a, a);
        assert!(!flag);
        assert_ne!(p.lo, 0.0);
        assert_eq!(q(p.hi) + q(p.lo), q(a) * q(a));
        let (big, flag) = two_prod(f64::MAX, 2.0);
        assert!(flag && big.hi.is_infinite() && big.lo == 0.0);
        let (tiny, flag) = two_prod(1e-200, 1e-200);
        assert!(flag && tiny.lo == 0.0);
    }

    #[test]
    fn div_and_sqrt_residual_signs() {
        let d = exact_div(1.0f64, 3.0);
        assert_eq!(d.hi, 1.0 / 3.0);
        // 1 - 3*fl(1/3) > 0 so the exact quotient is above hi
        let exact = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!(q(d.hi) < exact && d.lo > 0.0);
        let s = exact_sqrt(2.0f64);
        assert_eq!(s.hi, 2f64.sqrt());
        assert!(s.lo < 0.0, "fl(sqrt 2) is above sqrt 2");
        assert_eq!(exact_sqrt(4.0f64), DoubleWord::new(2.0, 0.0));
        assert!(exact_sqrt(-1.0f64).hi.is_nan());
    }

    #[test]
    fn dw_ops_reduce_on_exact_operands() {
        let x = DoubleWord::from_carrier(0.1f64);
        let y = DoubleWord::from_carrier(0.2f64);
        assert_eq!(dw_add(x, y).round(), 0.1 + 0.2);
        assert_eq!(dw_mul(x, y).0.round(), 0.1 * 0.2);
        assert_eq!(dw_div(x, y).round(), 0.1 / 0.2);
        assert_eq!(dw_sqrt(y).round(), 0.2f64.sqrt());
    }

    #[test]
    fn dw_ops_track_low_parts() {
        let lo = 2f64.powi(-60);
        let x = DoubleWord::new(1.0f64, lo);
        let y = DoubleWord::new(3.0f64, -lo);
        let sum = dw_add(x, y);
        assert_eq!(q(sum.hi) + q(sum.lo), q(4.0));
        let (prod, _) = dw_mul(x, y);
        let exact = (q(1.0) + q(lo)) * (q(3.0) - q(lo));
        let err = (q(prod.hi) + q(prod.lo) - exact).abs();
        assert!(err < q(2f64.powi(-100)));
        let quo = dw_div(y, x);
        let exact = (q(3.0) - q(lo)) / (q(1.0) + q(lo));
        let err = (q(quo.hi) + q(quo.lo) - exact).abs();
        assert!(err < q(2f64.powi(-100)));
    }

    #[test]
    fn f32_carrier_works() {
        let r = two_sum(1.0f32, 2f32.powi(-24));
        assert_eq!(r, DoubleWord::new(1.0, 2f32.powi(-24)));
        let (p, _) = two_prod(1.0f32 + f32::EPSILON, 1.0 + f32::EPSILON);
        assert_eq!(p.lo, f32::EPSILON * f32::EPSILON);
    }
}
