//! Synchronous CESTAC / discrete stochastic arithmetic with three samples.
//!
//! Each float value is a [`StochasticTriple`]. Every operation is performed
//! once per component with a random directed rounding: components 1 and 2 pick
//! their mode at random, component 3 takes the mode component 2 did not use.
//! Directed rounding is emulated from the round-to-nearest result and the sign
//! of its error-free residual, so it never touches the FPU control word.
//!
//! Comparisons are decided once for all three components on the component
//! means, which keeps the three traces on the same branch.

use serde::{Deserialize, Serialize};

use crate::backend::{Arithmetic, Exceptions, OutputValue, Relation};
use crate::carrier::Carrier;
use crate::double_word::{exact_op, exact_sqrt, BinaryOp, DoubleWord};
use crate::rng::RandomSource;

/// Number of synchronous samples.
pub const SAMPLES: usize = 3;
/// Probability that all samples of one operation share a rounding mode, `2^(1-N)`.
pub const SAME_MODE_PROBABILITY: f64 = 0.25;
/// Student t quantile at 95% with `N - 1 = 2` degrees of freedom.
pub const STUDENT_T95_2DOF: f64 = 4.303;
/// Upper clamp for reported decimal digits.
pub const MAX_DIGITS: f64 = 15.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectedMode {
    TowardPosInf,
    TowardNegInf,
}

impl DirectedMode {
    #[inline]
    pub fn opposite(self) -> Self {
        match self {
            DirectedMode::TowardPosInf => DirectedMode::TowardNegInf,
            DirectedMode::TowardNegInf => DirectedMode::TowardPosInf,
        }
    }
}

/// Round an exact double-word result in the given direction.
#[inline]
pub fn directed_round<C: Carrier>(exact: DoubleWord<C>, mode: DirectedMode) -> C {
    let z = exact.hi;
    let e = exact.lo;
    match mode {
        DirectedMode::TowardPosInf if e > C::ZERO => z.next_up(),
        DirectedMode::TowardNegInf if e < C::ZERO => z.next_down(),
        _ => z,
    }
}

/// Modes for the three components of one operation, from a single draw.
#[inline]
pub fn draw_modes<R: RandomSource>(rng: &mut R) -> [DirectedMode; 3] {
    let raw = rng.next_u64();
    let pick = |bit: u32| {
        if raw >> bit & 1 == 1 {
            DirectedMode::TowardPosInf
        } else {
            DirectedMode::TowardNegInf
        }
    };
    let m2 = pick(62);
    [pick(63), m2, m2.opposite()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticTriple<C> {
    pub v: [C; 3],
    /// Length of the longest operation chain that produced this value.
    pub op_count: u32,
}

impl<C: Carrier> StochasticTriple<C> {
    pub fn exact(x: C) -> Self {
        Self { v: [x; 3], op_count: 0 }
    }

    pub fn new(v: [C; 3]) -> Self {
        Self { v, op_count: 0 }
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [self.v[0].to_f64(), self.v[1].to_f64(), self.v[2].to_f64()]
    }

    /// Mean of the non-NaN components, `None` if all are NaN.
    pub fn mean(&self) -> Option<f64> {
        let (sum, n) = self
            .v
            .iter()
            .filter(|x| !x.is_nan())
            .fold((0.0, 0u32), |(s, n), x| (s + x.to_f64(), n + 1));
        (n > 0).then(|| sum / n as f64)
    }
}

/// Estimated decimal significant digits of a triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CestacDigits {
    pub digits: f64,
    pub is_noise: bool,
}

impl CestacDigits {
    pub const NOISE: CestacDigits = CestacDigits { digits: 0.0, is_noise: true };
}

impl std::fmt::Display for CestacDigits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_noise {
            f.write_str("@.0")
        } else {
            write!(f, "{:.2}", self.digits)
        }
    }
}

/// `log10(sqrt(N) |m| / (sigma tau))` with the `N - 1` standard deviation.
pub fn cestac_digits<C: Carrier>(a: &StochasticTriple<C>) -> CestacDigits {
    let v = a.to_f64();
    if v.iter().any(|x| !x.is_finite()) {
        return CestacDigits::NOISE;
    }
    let m = (v[0] + v[1] + v[2]) / 3.0;
    if m == 0.0 {
        return CestacDigits::NOISE;
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (SAMPLES - 1) as f64;
    let sigma = var.sqrt();
    if sigma == 0.0 {
        return CestacDigits { digits: MAX_DIGITS, is_noise: false };
    }
    let d = ((SAMPLES as f64).sqrt() * m.abs() / (sigma * STUDENT_T95_2DOF)).log10();
    if d <= 0.0 || d.is_nan() {
        CestacDigits::NOISE
    } else {
        CestacDigits { digits: d.min(MAX_DIGITS), is_noise: false }
    }
}

fn combine_count<C>(a: &StochasticTriple<C>, b: &StochasticTriple<C>) -> u32 {
    a.op_count.max(b.op_count).saturating_add(1)
}

/// One CESTAC binary operation.
pub fn cestac_binary<C: Carrier, R: RandomSource>(
    op: BinaryOp,
    a: &StochasticTriple<C>,
    b: &StochasticTriple<C>,
    rng: &mut R,
    exceptions: &mut Exceptions,
) -> StochasticTriple<C> {
    let modes = draw_modes(rng);
    let mut v = [C::ZERO; 3];
    for i in 0..3 {
        let (x, y) = (a.v[i], b.v[i]);
        let finite = x.is_finite() && y.is_finite();
        let r = if !finite || (op == BinaryOp::Div && y == C::ZERO) {
            op.apply(x, y)
        } else {
            let (exact, flushed) = exact_op(op, x, y);
            if flushed {
                exceptions.flushed_residual += 1;
            }
            let mut r = directed_round(exact, modes[i]);
            // exact zero sums round to -0 toward -inf unless both addends are +0
            if r == C::ZERO && modes[i] == DirectedMode::TowardNegInf && matches!(op, BinaryOp::Add | BinaryOp::Sub) {
                let y = if op == BinaryOp::Sub { -y } else { y };
                if x.is_sign_negative() || y.is_sign_negative() || x != C::ZERO || y != C::ZERO {
                    r = -C::ZERO;
                }
            }
            r
        };
        exceptions.record(x.is_nan() || y.is_nan(), finite, r);
        v[i] = r;
    }
    StochasticTriple { v, op_count: combine_count(a, b) }
}

/// Componentwise square root with random directed rounding.
pub fn cestac_sqrt<C: Carrier, R: RandomSource>(
    a: &StochasticTriple<C>,
    rng: &mut R,
    exceptions: &mut Exceptions,
) -> StochasticTriple<C> {
    let modes = draw_modes(rng);
    let mut v = [C::ZERO; 3];
    for i in 0..3 {
        let x = a.v[i];
        let r = if !x.is_finite() || x < C::ZERO {
            x.sqrt()
        } else {
            directed_round(exact_sqrt(x), modes[i])
        };
        exceptions.record(x.is_nan(), x.is_finite(), r);
        v[i] = r;
    }
    StochasticTriple { v, op_count: a.op_count.saturating_add(1) }
}

/// Synchronous comparison on component means.
///
/// NaN components are left out of the means; if one side is entirely NaN the
/// result is `false` and `nan_comparison` is bumped. A condition whose
/// difference is numerical noise (but not an exact zero) bumps
/// `unstable_branch`.
pub fn cestac_compare<C: Carrier>(
    a: &StochasticTriple<C>,
    rel: Relation,
    b: &StochasticTriple<C>,
    exceptions: &mut Exceptions,
) -> bool {
    let (Some(ma), Some(mb)) = (a.mean(), b.mean()) else {
        exceptions.nan_comparison += 1;
        return false;
    };
    let diff = StochasticTriple::new([a.v[0] - b.v[0], a.v[1] - b.v[1], a.v[2] - b.v[2]]);
    if diff.v.iter().any(|d| *d != C::ZERO) && cestac_digits(&diff).is_noise {
        exceptions.unstable_branch += 1;
    }
    rel.holds(ma, mb)
}

/// Interpreter backend evaluating every float as a synchronous triple.
#[derive(Debug)]
pub struct CestacArithmetic<C, R> {
    rng: R,
    exceptions: Exceptions,
    _carrier: std::marker::PhantomData<C>,
}

impl<C: Carrier, R: RandomSource> CestacArithmetic<C, R> {
    pub fn new(rng: R) -> Self {
        Self { rng, exceptions: Exceptions::default(), _carrier: std::marker::PhantomData }
    }
}

impl<C: Carrier, R: RandomSource> Arithmetic for CestacArithmetic<C, R> {
    type Carrier = C;
    type Value = StochasticTriple<C>;

    fn lift(&self, x: C) -> Self::Value {
        StochasticTriple::exact(x)
    }

    fn binary(&mut self, op: BinaryOp, a: Self::Value, b: Self::Value) -> Self::Value {
        cestac_binary(op, &a, &b, &mut self.rng, &mut self.exceptions)
    }

    fn sqrt(&mut self, a: Self::Value) -> Self::Value {
        cestac_sqrt(&a, &mut self.rng, &mut self.exceptions)
    }

    fn neg(&mut self, a: Self::Value) -> Self::Value {
        StochasticTriple { v: [-a.v[0], -a.v[1], -a.v[2]], op_count: a.op_count }
    }

    fn fabs(&mut self, a: Self::Value) -> Self::Value {
        StochasticTriple { v: [a.v[0].abs(), a.v[1].abs(), a.v[2].abs()], op_count: a.op_count }
    }

    fn compare(&mut self, rel: Relation, a: Self::Value, b: Self::Value) -> bool {
        cestac_compare(&a, rel, &b, &mut self.exceptions)
    }

    fn output(&self, v: Self::Value) -> OutputValue {
        OutputValue::Triple { values: v.to_f64(), digits: cestac_digits(&v) }
    }

    fn exceptions(&self) -> Exceptions {
        self.exceptions
    }
}
