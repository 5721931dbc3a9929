//! The case studies as kernel programs, with seeded inputs and exact references.
//!
//! A case is addressed as `name[:key=value]*`, e.g. `kahan:variant=naive:n=1000`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;

use crate::carrier::CarrierFormat;
use crate::dsl::{InputValue, Inputs};
use crate::error::Error;
use crate::rng::Mt19937_64;

pub mod manifest;
pub mod native;
pub mod oracle;

#[derive(Debug, Clone)]
pub struct CaseSpec {
    /// Canonical address, parameters included.
    pub name: String,
    pub source: String,
    pub carrier: CarrierFormat,
    pub inputs: Inputs,
    /// Exact value per output, where one is known.
    pub references: Vec<(String, BigRational)>,
}

impl CaseSpec {
    pub fn reference(&self, output: &str) -> Option<f64> {
        self.references.iter().find(|(n, _)| n == output).map(|(_, q)| oracle::to_f64(q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KahanVariant {
    Compensated,
    /// Four-lane reassociated sum: the loop after `-O3 -ffast-math`.
    Naive,
    /// The naive loop exactly as written in source order.
    NaiveSequential,
}

impl KahanVariant {
    pub fn name(self) -> &'static str {
        match self {
            KahanVariant::Compensated => "compensated",
            KahanVariant::Naive => "naive",
            KahanVariant::NaiveSequential => "naive-sequential",
        }
    }
}

impl FromStr for KahanVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "compensated" => KahanVariant::Compensated,
            "naive" => KahanVariant::Naive,
            "naive-sequential" => KahanVariant::NaiveSequential,
            other => return Err(Error::Usage(format!("unknown kahan variant `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Paper,
    Desk,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            other => Err(Error::Usage(format!("unknown scale `{other}` (expected paper or desk)"))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Paper => "paper",
            Scale::Desk => "desk",
        })
    }
}

pub const DEFAULT_KAHAN_N: usize = 100_000;
pub const DEFAULT_INPUT_SEED: u64 = 1;

/// Uniform binary32 values in `[0, 1)` on a 2^-24 grid.
pub fn kahan_inputs(n: usize, input_seed: u64) -> Vec<f32> {
    let mut mt = Mt19937_64::new(input_seed);
    (0..n).map(|_| (mt.next_u64() >> 40) as f32 * (1.0 / (1u32 << 24) as f32)).collect()
}

pub fn kahan_sum_case(variant: KahanVariant, n: usize, input_seed: u64) -> CaseSpec {
    assert!(n >= 1, "kahan case needs at least one input");
    let last = n - 1;
    let source = match variant {
        KahanVariant::Compensated => format!(
            "in f[{n}];\nout sum;\nvar c; var y; var t;\n\
             sum = f[0];\nc = 0.0;\n\
             for i = 1 to {last} {{\n  y = f[i] - c;\n  t = sum + y;\n  c = (t - sum) - y;\n  sum = t;\n}}\n"
        ),
        KahanVariant::NaiveSequential => format!(
            "in f[{n}];\nout sum;\n\
             sum = f[0];\nfor i = 1 to {last} {{\n  sum = sum + f[i];\n}}\n"
        ),
        KahanVariant::Naive => {
            let blocks = (n - 1) / 4;
            format!(
                "in f[{n}];\nout sum;\nvar s0; var s1; var s2; var s3;\n\
                 s0 = f[0];\n\
                 for j = 0 to {bl} {{\n  s0 = s0 + f[4 * j + 1];\n  s1 = s1 + f[4 * j + 2];\n  \
                 s2 = s2 + f[4 * j + 3];\n  s3 = s3 + f[4 * j + 4];\n}}\n\
                 sum = (s0 + s2) + (s1 + s3);\n\
                 for i = {tail} to {last} {{\n  sum = sum + f[i];\n}}\n",
                bl = blocks as i64 - 1,
                tail = 4 * blocks + 1,
            )
        }
    };
    let f = kahan_inputs(n, input_seed);
    let as_f64: Vec<f64> = f.iter().map(|&x| x as f64).collect();
    let exact = oracle::exact_sum(&as_f64);
    let mut inputs = Inputs::new();
    inputs.insert("f".into(), InputValue::Array(as_f64));
    CaseSpec {
        name: format!("kahan:variant={}:n={n}:seed={input_seed}", variant.name()),
        source,
        carrier: CarrierFormat::Binary32,
        inputs,
        references: vec![("sum".into(), exact)],
    }
}

pub const LINEAR_SYSTEM_SOURCE: &str = "\
// 2x2 elimination with partial pivoting
out x1; out x2;
var a11; var a12; var a21; var a22; var b1; var b2;
var p; var q; var r; var s; var bp; var br;
var l; var u22; var y2;
a11 = 0.2161; a12 = 0.1441;
a21 = 1.2969; a22 = 0.8648;
b1 = 0.1440; b2 = 0.8642;
if (fabs(a21) > fabs(a11)) {
  p = a21; q = a22; bp = b2;
  r = a11; s = a12; br = b1;
} else {
  p = a11; q = a12; bp = b1;
  r = a21; s = a22; br = b2;
}
l = r / p;
u22 = s - l * q;
y2 = br - l * bp;
x2 = y2 / u22;
x1 = (bp - q * x2) / p;
";

pub fn linear_system_case(carrier: CarrierFormat) -> CaseSpec {
    let d = oracle::decimal;
    let [x1, x2] = oracle::solve2(
        [[d("0.2161"), d("0.1441")], [d("1.2969"), d("0.8648")]],
        [d("0.1440"), d("0.8642")],
    );
    CaseSpec {
        name: format!("linear_system:precision={carrier}"),
        source: LINEAR_SYSTEM_SOURCE.into(),
        carrier,
        inputs: Inputs::new(),
        references: vec![("x1".into(), x1), ("x2".into(), x2)],
    }
}

pub const UNSTABLE_BRANCH_SOURCE: &str = "\
out c;
var a; var b;
a = 2.0 * sqrt(3.0) / 3.0;
b = a * a - a * a;
if (b >= 0) {
  c = sqrt(b) + 10.0;
} else {
  c = sqrt(-b) + 10.0;
}
return c;
";

pub fn unstable_branch_case() -> CaseSpec {
    CaseSpec {
        name: "unstable_branch".into(),
        source: UNSTABLE_BRANCH_SOURCE.into(),
        carrier: CarrierFormat::Binary64,
        inputs: Inputs::new(),
        // b is exactly zero in real arithmetic
        references: vec![("c".into(), oracle::decimal("10"))],
    }
}

/// Counter parameters: initial value and iteration count.
pub fn counter_parameters(scale: Scale) -> (&'static str, u64) {
    match scale {
        Scale::Paper => ("5e13", 100_000_000),
        Scale::Desk => ("5e11", 1_000_000),
    }
}

/// `trace_every = k > 0` records `c` after every k-th iteration.
pub fn counter_case(scale: Scale, trace_every: u64) -> CaseSpec {
    let (c0, iterations) = counter_parameters(scale);
    let trace = if trace_every > 0 {
        format!("  if (i % {trace_every} == {}) {{ trace(\"c\", c); }}\n", trace_every - 1)
    } else {
        String::new()
    };
    // The branch test is cut off in the original listing; even iterations add
    // the large increment, which is what makes the exact result -50.
    let source = format!(
        "out c;\nc = -{c0};\nfor i = 0 to {last} {{\n  \
         if (i % 2 == 0) {{ c = c + 1e6; }} else {{ c = c - 1e-6; }}\n{trace}}}\nreturn c;\n",
        last = iterations - 1
    );
    let half = BigRational::from_integer((iterations / 2).into());
    let exact = -oracle::decimal(c0) + &half * oracle::decimal("1e6") - &half * oracle::decimal("1e-6");
    let mut name = format!("counter:scale={scale}");
    if trace_every > 0 {
        name.push_str(&format!(":trace_every={trace_every}"));
    }
    CaseSpec { name, source, carrier: CarrierFormat::Binary64, inputs: Inputs::new(), references: vec![("c".into(), exact)] }
}

pub const IMPROBABILITY_X: &str = "1.60631924";
pub const IMPROBABILITY_POINTS: usize = 300;

/// `dx = i * 2^-53` for i = 1..=300.
pub fn improbability_dx() -> Vec<f64> {
    (1..=IMPROBABILITY_POINTS).map(|i| i as f64 * f64::EPSILON / 2.0).collect()
}

/// Which of the two equal rational forms sees the perturbed argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KhForm {
    /// `cf(x + dx) - rp(x)`, as the equation is printed. At this `x` the
    /// continued fraction is flat, so every IEEE point rounds to the same value.
    Printed,
    /// `rp(x + dx) - cf(x)`: the Horner form cancels and shows the stripes.
    Swapped,
}

impl FromStr for KhForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "printed" => Ok(KhForm::Printed),
            "swapped" => Ok(KhForm::Swapped),
            other => Err(Error::Usage(format!("unknown form `{other}` (expected printed or swapped)"))),
        }
    }
}

impl fmt::Display for KhForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KhForm::Printed => "printed",
            KhForm::Swapped => "swapped",
        })
    }
}

const CF_SRC: &str = "(4.0 - 3.0 * (@ - 2.0) * ((@ - 5.0) * (@ - 5.0) + 4.0) \
                      / (@ + (@ - 2.0) * (@ - 2.0) * ((@ - 5.0) * (@ - 5.0) + 3.0)))";
const RP_SRC: &str = "(622.0 - @ * (751.0 - @ * (324 - @ * (59.0 - 4.0 * @)))) \
                      / (112 - @ * (151.0 - @ * (72.0 - @ * (14.0 - @))))";

pub fn improbability_case(form: KhForm) -> CaseSpec {
    let n = IMPROBABILITY_POINTS;
    let (moving, fixed) = match form {
        KhForm::Printed => (CF_SRC, RP_SRC),
        KhForm::Swapped => (RP_SRC, CF_SRC),
    };
    let source = format!(
        "in dx[{n}];\nout kh[{n}];\nvar x; var y;\nx = {IMPROBABILITY_X};\n\
         for i = 0 to {last} {{\n  y = x + dx[i];\n  kh[i] = {} - ({});\n}}\n",
        moving.replace('@', "y"),
        fixed.replace('@', "x"),
        last = n - 1
    );
    let dx = improbability_dx();
    let x = oracle::rational(IMPROBABILITY_X.parse::<f64>().unwrap());
    let references = dx
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let y = &x + oracle::rational(d);
            let kh = match form {
                KhForm::Printed => oracle::cf(&y) - oracle::rp(&x),
                KhForm::Swapped => oracle::rp(&y) - oracle::cf(&x),
            };
            (format!("kh[{i}]"), kh)
        })
        .collect();
    let mut inputs = Inputs::new();
    inputs.insert("dx".into(), InputValue::Array(dx));
    let name = match form {
        KhForm::Printed => "improbability".to_string(),
        KhForm::Swapped => "improbability:form=swapped".to_string(),
    };
    CaseSpec { name, source, carrier: CarrierFormat::Binary64, inputs, references }
}

/// Every case name `case_by_name` accepts.
pub const CASE_NAMES: [&str; 5] = ["kahan", "linear_system", "unstable_branch", "counter", "improbability"];

/// Resolve `name[:key=value]*` to a case.
pub fn case_by_name(address: &str) -> Result<CaseSpec, Error> {
    let mut parts = address.split(':');
    let name = parts.next().unwrap_or_default();
    let mut params = BTreeMap::new();
    for p in parts {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("case parameter `{p}` is not key=value")))?;
        params.insert(k.to_string(), v.to_string());
    }
    let mut take = |key: &str| params.remove(key);
    let number = |key: &str, v: Option<String>, default: u64| -> Result<u64, Error> {
        match v {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Usage(format!("parameter `{key}` expects an integer, got `{v}`"))),
        }
    };
    let case = match name {
        "kahan" => {
            let variant = take("variant").map(|v| v.parse()).transpose()?.unwrap_or(KahanVariant::Compensated);
            let n = number("n", take("n"), DEFAULT_KAHAN_N as u64)? as usize;
            if n == 0 {
                return Err(Error::Usage("kahan needs n >= 1".into()));
            }
            let seed = number("seed", take("seed"), DEFAULT_INPUT_SEED)?;
            kahan_sum_case(variant, n, seed)
        }
        "linear_system" => {
            let carrier = match take("precision") {
                None => CarrierFormat::Binary64,
                Some(p) => p.parse().map_err(|e| Error::Usage(format!("{e}")))?,
            };
            linear_system_case(carrier)
        }
        "unstable_branch" => unstable_branch_case(),
        "counter" => {
            let scale = take("scale").map(|s| s.parse()).transpose()?.unwrap_or(Scale::Desk);
            let every = number("trace_every", take("trace_every"), 0)?;
            counter_case(scale, every)
        }
        "improbability" => {
            let form = take("form").map(|f| f.parse()).transpose()?.unwrap_or(KhForm::Printed);
            improbability_case(form)
        }
        _ => return Err(Error::UnknownCase(name.to_string())),
    };
    if let Some(k) = params.keys().next() {
        return Err(Error::Usage(format!("case `{name}` has no parameter `{k}`")));
    }
    Ok(case)
}
