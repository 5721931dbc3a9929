//! Monte Carlo Arithmetic at virtual precision `t`.
//!
//! `inexact(x) = x + 2^(e_x - t) * xi` with `2^(e_x-1) <= |x| < 2^e_x` and `xi`
//! uniform in `[-1/2, 1/2)`. The three modes differ only in where `inexact` is
//! applied: on the exact result (random rounding), on both operands (precision
//! bounding), or on both operands and the result (full MCA). The exact
//! intermediate is carried as a [`DoubleWord`].
//!
//! Zero is never perturbed, NaN and infinities pass through with IEEE
//! semantics, and subnormals use their actual magnitude exponent.

use crate::backend::{Arithmetic, BackendConfig, BackendKind, Exceptions, OutputValue, Relation};
use crate::carrier::{scalbn, Carrier};
use crate::double_word::{dw_op, dw_sqrt, exact_op, exact_sqrt, fast_two_sum, two_sum, BinaryOp, DoubleWord};
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McaMode {
    Ieee,
    RandomRounding,
    PrecisionBounding,
    Full,
}

/// The MCA-relevant part of a [`BackendConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McaParams {
    pub mode: McaMode,
    pub precision: u32,
}

impl McaParams {
    pub fn new(mode: McaMode, precision: u32) -> Self {
        Self { mode, precision }
    }

    /// `None` for the cestac backend.
    pub fn from_config(cfg: &BackendConfig) -> Option<Self> {
        let mode = match cfg.kind {
            BackendKind::Ieee => McaMode::Ieee,
            BackendKind::McaRr => McaMode::RandomRounding,
            BackendKind::McaPb => McaMode::PrecisionBounding,
            BackendKind::McaFull => McaMode::Full,
            BackendKind::Cestac => return None,
        };
        Some(Self { mode, precision: cfg.precision })
    }

    #[inline]
    fn perturbs_inputs(self) -> bool {
        matches!(self.mode, McaMode::PrecisionBounding | McaMode::Full)
    }

    #[inline]
    fn perturbs_output(self) -> bool {
        matches!(self.mode, McaMode::RandomRounding | McaMode::Full)
    }
}

/// One application of Parker's randomization. Always consumes exactly one draw.
#[inline]
pub fn inexact<C: Carrier, R: RandomSource>(v: DoubleWord<C>, t: u32, rng: &mut R) -> DoubleWord<C> {
    let xi = rng.next_unit_centered();
    if xi == 0.0 || v.is_zero() || !v.hi.is_finite() {
        return v;
    }
    let e = match v.hi.magnitude_exponent() {
        Some(e) => e,
        None => return v,
    };
    let p = C::from_f64(scalbn(xi, e - t as i32));
    if p == C::ZERO {
        return v;
    }
    let s = two_sum(v.lo, p);
    let r = two_sum(v.hi, s.hi);
    if !r.hi.is_finite() {
        return r;
    }
    fast_two_sum(r.hi, r.lo + s.lo)
}

/// One MCA binary operation. Draws are consumed in the order left operand,
/// right operand, result.
pub fn mca_binary<C: Carrier, R: RandomSource>(
    op: BinaryOp,
    a: C,
    b: C,
    params: McaParams,
    rng: &mut R,
    exceptions: &mut Exceptions,
) -> C {
    let finite = a.is_finite() && b.is_finite();
    if params.mode == McaMode::Ieee || !finite || (op == BinaryOp::Div && b == C::ZERO) {
        let r = op.apply(a, b);
        exceptions.record(a.is_nan() || b.is_nan(), finite, r);
        return r;
    }
    let t = params.precision;
    let (mut x, flushed) = if params.perturbs_inputs() {
        let xa = inexact(DoubleWord::from_carrier(a), t, rng);
        let xb = inexact(DoubleWord::from_carrier(b), t, rng);
        dw_op(op, xa, xb)
    } else {
        exact_op(op, a, b)
    };
    if flushed {
        exceptions.flushed_residual += 1;
    }
    if !x.hi.is_finite() {
        exceptions.record(false, true, x.hi);
        return x.hi;
    }
    if params.perturbs_output() {
        x = inexact(x, t, rng);
    }
    let r = x.round();
    exceptions.record(false, true, r);
    r
}

/// MCA square root. Negative operands give an unperturbed NaN.
pub fn mca_sqrt<C: Carrier, R: RandomSource>(
    a: C,
    params: McaParams,
    rng: &mut R,
    exceptions: &mut Exceptions,
) -> C {
    if params.mode == McaMode::Ieee || !a.is_finite() || a < C::ZERO {
        let r = a.sqrt();
        exceptions.record(a.is_nan(), a.is_finite(), r);
        return r;
    }
    let t = params.precision;
    let mut x = if params.perturbs_inputs() {
        dw_sqrt(inexact(DoubleWord::from_carrier(a), t, rng))
    } else {
        exact_sqrt(a)
    };
    if params.perturbs_output() {
        x = inexact(x, t, rng);
    }
    x.round()
}

/// Interpreter backend running every float operation through MCA.
#[derive(Debug)]
pub struct McaArithmetic<C, R> {
    params: McaParams,
    rng: R,
    exceptions: Exceptions,
    _carrier: std::marker::PhantomData<C>,
}

impl<C: Carrier, R: RandomSource> McaArithmetic<C, R> {
    pub fn new(params: McaParams, rng: R) -> Self {
        Self { params, rng, exceptions: Exceptions::default(), _carrier: std::marker::PhantomData }
    }

    pub fn params(&self) -> McaParams {
        self.params
    }
}

impl<C: Carrier, R: RandomSource> Arithmetic for McaArithmetic<C, R> {
    type Carrier = C;
    type Value = C;

    #[inline]
    fn lift(&self, x: C) -> C {
        x
    }

    #[inline]
    fn binary(&mut self, op: BinaryOp, a: C, b: C) -> C {
        mca_binary(op, a, b, self.params, &mut self.rng, &mut self.exceptions)
    }

    #[inline]
    fn sqrt(&mut self, a: C) -> C {
        mca_sqrt(a, self.params, &mut self.rng, &mut self.exceptions)
    }

    #[inline]
    fn neg(&mut self, a: C) -> C {
        -a
    }

    #[inline]
    fn fabs(&mut self, a: C) -> C {
        a.abs()
    }

    #[inline]
    fn compare(&mut self, rel: Relation, a: C, b: C) -> bool {
        rel.holds(a, b)
    }

    fn output(&self, v: C) -> OutputValue {
        OutputValue::Scalar(v.to_f64())
    }

    fn exceptions(&self) -> Exceptions {
        self.exceptions
    }
}
