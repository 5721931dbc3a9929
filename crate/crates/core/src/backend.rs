//! Backend configuration and the arithmetic interface the interpreter calls.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::carrier::{Carrier, CarrierFormat};
use crate::cestac::CestacDigits;
use crate::double_word::BinaryOp;
use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BackendKind {
    #[serde(rename = "ieee")]
    Ieee,
    #[serde(rename = "mca-rr")]
    McaRr,
    #[serde(rename = "mca-pb")]
    McaPb,
    #[serde(rename = "mca-full")]
    McaFull,
    #[serde(rename = "cestac")]
    Cestac,
}

impl BackendKind {
    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Ieee => "ieee",
            BackendKind::McaRr => "mca-rr",
            BackendKind::McaPb => "mca-pb",
            BackendKind::McaFull => "mca-full",
            BackendKind::Cestac => "cestac",
        }
    }

    pub fn is_stochastic(self) -> bool {
        !matches!(self, BackendKind::Ieee)
    }
}

impl FromStr for BackendKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ieee" => BackendKind::Ieee,
            "mca-rr" | "mca_rr" | "rr" => BackendKind::McaRr,
            "mca-pb" | "mca_pb" | "pb" => BackendKind::McaPb,
            "mca-full" | "mca_full" | "mca" | "full" => BackendKind::McaFull,
            "cestac" => BackendKind::Cestac,
            other => return Err(ConfigError::UnknownBackend(other.to_string())),
        })
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which arithmetic to run, at what virtual precision, on which carrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Virtual precision `t` in bits.
    pub precision: u32,
    /// Digit base used when a single base is needed (2 or 10).
    pub beta: u32,
    pub carrier: CarrierFormat,
}

impl BackendConfig {
    pub fn new(kind: BackendKind, carrier: CarrierFormat, precision: u32) -> Result<Self, ConfigError> {
        Self::with_beta(kind, carrier, precision, 10)
    }

    pub fn with_beta(
        kind: BackendKind,
        carrier: CarrierFormat,
        precision: u32,
        beta: u32,
    ) -> Result<Self, ConfigError> {
        let max = carrier.precision();
        if precision < 1 || precision > max {
            return Err(ConfigError::Precision { precision, carrier, max });
        }
        if beta != 2 && beta != 10 {
            return Err(ConfigError::Beta(beta));
        }
        Ok(Self { kind, precision, beta, carrier })
    }

    /// Full carrier precision.
    pub fn full(kind: BackendKind, carrier: CarrierFormat) -> Self {
        Self { kind, precision: carrier.precision(), beta: 10, carrier }
    }

    pub fn ieee(carrier: CarrierFormat) -> Self {
        Self::full(BackendKind::Ieee, carrier)
    }
}

/// Floating-point exception counters accumulated during an evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exceptions {
    /// NaN produced from non-NaN operands (sqrt of a negative, 0/0, inf-inf).
    pub invalid: u64,
    /// Infinity produced from finite operands (overflow or division by zero).
    pub overflow: u64,
    /// Product residuals that could not be represented and were dropped.
    pub flushed_residual: u64,
    /// CESTAC branch conditions decided on a difference that is numerical noise.
    pub unstable_branch: u64,
    /// Comparisons where every component of an operand was NaN.
    pub nan_comparison: u64,
}

impl Exceptions {
    pub fn merge(&mut self, other: &Exceptions) {
        self.invalid += other.invalid;
        self.overflow += other.overflow;
        self.flushed_residual += other.flushed_residual;
        self.unstable_branch += other.unstable_branch;
        self.nan_comparison += other.nan_comparison;
    }

    /// Classify a result against its operands.
    #[inline]
    pub fn record<C: Carrier>(&mut self, operands_nan: bool, operands_finite: bool, result: C) {
        if result.is_nan() {
            if !operands_nan {
                self.invalid += 1;
            }
        } else if !result.is_finite() && operands_finite {
            self.overflow += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Relation {
    #[inline]
    pub fn holds<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            Relation::Lt => a < b,
            Relation::Le => a <= b,
            Relation::Gt => a > b,
            Relation::Ge => a >= b,
            Relation::Eq => a == b,
            Relation::Ne => a != b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Eq => "==",
            Relation::Ne => "!=",
        }
    }
}

/// A program output as seen by the harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputValue {
    Scalar(f64),
    Triple { values: [f64; 3], digits: CestacDigits },
}

impl OutputValue {
    /// The representative value: the scalar, or the triple mean.
    pub fn value(&self) -> f64 {
        match self {
            OutputValue::Scalar(x) => *x,
            OutputValue::Triple { values, .. } => (values[0] + values[1] + values[2]) / 3.0,
        }
    }
}

/// Floating-point semantics the interpreter delegates every operation to.
pub trait Arithmetic {
    type Carrier: Carrier;
    type Value: Copy + fmt::Debug + Send;

    /// Embed a carrier constant (literal or input) without perturbation.
    fn lift(&self, x: Self::Carrier) -> Self::Value;
    fn binary(&mut self, op: BinaryOp, a: Self::Value, b: Self::Value) -> Self::Value;
    fn sqrt(&mut self, a: Self::Value) -> Self::Value;
    /// Sign flip; exact in every backend.
    fn neg(&mut self, a: Self::Value) -> Self::Value;
    /// Absolute value; exact in every backend.
    fn fabs(&mut self, a: Self::Value) -> Self::Value;
    fn compare(&mut self, rel: Relation, a: Self::Value, b: Self::Value) -> bool;
    fn output(&self, v: Self::Value) -> OutputValue;
    fn exceptions(&self) -> Exceptions;
}

/// Plain round-to-nearest IEEE-754 arithmetic.
#[derive(Debug, Default)]
pub struct IeeeArithmetic<C> {
    exceptions: Exceptions,
    _carrier: std::marker::PhantomData<C>,
}

impl<C: Carrier> IeeeArithmetic<C> {
    pub fn new() -> Self {
        Self { exceptions: Exceptions::default(), _carrier: std::marker::PhantomData }
    }
}

impl<C: Carrier> Arithmetic for IeeeArithmetic<C> {
    type Carrier = C;
    type Value = C;

    #[inline]
    fn lift(&self, x: C) -> C {
        x
    }

    #[inline]
    fn binary(&mut self, op: BinaryOp, a: C, b: C) -> C {
        let r = op.apply(a, b);
        if !r.is_finite() {
            self.exceptions.record(a.is_nan() || b.is_nan(), a.is_finite() && b.is_finite(), r);
        }
        r
    }

    #[inline]
    fn sqrt(&mut self, a: C) -> C {
        let r = a.sqrt();
        if r.is_nan() {
            self.exceptions.record(a.is_nan(), a.is_finite(), r);
        }
        r
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_bounds() {
        assert!(BackendConfig::new(BackendKind::McaRr, CarrierFormat::Binary32, 24).is_ok());
        assert!(BackendConfig::new(BackendKind::McaRr, CarrierFormat::Binary32, 25).is_err());
        assert!(BackendConfig::new(BackendKind::McaRr, CarrierFormat::Binary64, 53).is_ok());
        assert!(BackendConfig::new(BackendKind::McaRr, CarrierFormat::Binary64, 0).is_err());
        assert!(BackendConfig::with_beta(BackendKind::Ieee, CarrierFormat::Binary64, 53, 3).is_err());
        assert_eq!("mca-full".parse::<BackendKind>().unwrap(), BackendKind::McaFull);
        assert!("mca-xx".parse::<BackendKind>().is_err());
    }

    #[test]
    fn ieee_addition_and_exceptions() {
        let mut ieee = IeeeArithmetic::<f64>::new();
        assert_eq!(ieee.binary(BinaryOp::Add, 0.1, 0.2), 0.30000000000000004);
        assert!(ieee.sqrt(-1.0).is_nan());
        assert_eq!(ieee.exceptions().invalid, 1);
        assert!(ieee.binary(BinaryOp::Div, 1.0, 0.0).is_infinite());
        assert_eq!(ieee.exceptions().overflow, 1);
        // NaN in, NaN out is not a new invalid operation
        ieee.binary(BinaryOp::Add, f64::NAN, 1.0);
        assert_eq!(ieee.exceptions().invalid, 1);
    }
}
