//! Significant-digit estimators and sample summaries.

use serde::{Deserialize, Serialize};

use crate::dsl::TracePoint;
use crate::error::StatsError;

/// Digits reported for an exact match: the 53 bits of a binary64 mantissa
/// expressed in base `beta`.
pub fn max_digits(beta: u32) -> f64 {
    if beta == 2 {
        53.0
    } else {
        53.0 * std::f64::consts::LN_2 / (beta as f64).ln()
    }
}

fn log_beta(x: f64, beta: u32) -> f64 {
    if beta == 2 {
        x.log2()
    } else if beta == 10 {
        x.log10()
    } else {
        x.ln() / (beta as f64).ln()
    }
}

/// Floor at 0, cap at the exact-match clamp; NaN means no digits.
fn clamp_digits(s: f64, beta: u32) -> f64 {
    if s.is_nan() {
        0.0
    } else {
        s.clamp(0.0, max_digits(beta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DigitsVsReference {
    pub s: f64,
    /// `x_hat` equals the reference exactly; `s` holds the clamp value.
    pub unbounded: bool,
    /// The reference is zero, so `s` counts absolute rather than relative digits.
    pub absolute: bool,
}

/// `s = -log_beta |(x_hat - x_ref) / x_ref|`, floored at 0.
pub fn sig_digits_vs_reference(x_hat: f64, x_ref: f64, beta: u32) -> DigitsVsReference {
    let absolute = x_ref == 0.0;
    let err = if absolute { x_hat.abs() } else { ((x_hat - x_ref) / x_ref).abs() };
    if err == 0.0 {
        return DigitsVsReference { s: max_digits(beta), unbounded: true, absolute };
    }
    DigitsVsReference { s: clamp_digits(-log_beta(err, beta), beta), unbounded: false, absolute }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    /// Samples supplied, NaN included.
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation, divisor `n - 1` over the non-NaN values.
    pub std: f64,
    /// s' in bits.
    pub s2: f64,
    /// s' in decimal digits.
    pub s10: f64,
    /// Every non-NaN sample was identical.
    pub exact: bool,
    pub nan_count: usize,
    /// False when fewer than two non-NaN samples remain.
    pub valid: bool,
}

impl SampleStats {
    pub fn s_prime(&self, beta: u32) -> f64 {
        match beta {
            2 => self.s2,
            10 => self.s10,
            b => s_prime(self.mean, self.std, b),
        }
    }

    /// Relative standard deviation `std / |mean|`.
    pub fn relative_std(&self) -> f64 {
        self.std / self.mean.abs()
    }
}

/// `s' = -log_beta(std / |mean|)`, floored at 0; `std == 0` gives the clamp.
pub fn s_prime(mean: f64, std: f64, beta: u32) -> f64 {
    if std == 0.0 && mean.is_finite() {
        return max_digits(beta);
    }
    clamp_digits(-log_beta(std / mean.abs(), beta), beta)
}

/// Mean and n-1 standard deviation. Values are summed in sorted order so the
/// result does not depend on sample order.
pub fn summarize(values: &[f64]) -> Result<SampleStats, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: values.len() });
    }
    let mut xs: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    let nan_count = values.len() - xs.len();
    xs.sort_by(f64::total_cmp);
    if xs.len() < 2 {
        let mean = xs.first().copied().unwrap_or(f64::NAN);
        return Ok(SampleStats {
            n: values.len(),
            mean,
            std: f64::NAN,
            s2: 0.0,
            s10: 0.0,
            exact: false,
            nan_count,
            valid: false,
        });
    }
    let m = xs.len() as f64;
    // The mean is kept as rough + correction: the second pass removes the
    // rounding error of the first sum, and deviations are taken from the
    // unrounded pair. Otherwise that error would dominate the spread of
    // samples that agree to nearly every bit.
    let rough = xs.iter().sum::<f64>() / m;
    let correction = if rough.is_finite() { xs.iter().map(|x| x - rough).sum::<f64>() / m } else { 0.0 };
    let mean = rough + correction;
    let exact = xs.first() == xs.last();
    let std = if exact {
        0.0
    } else {
        let mut dev: Vec<f64> = xs
            .iter()
            .map(|x| {
                let d = (x - rough) - correction;
                d * d
            })
            .collect();
        dev.sort_by(f64::total_cmp);
        (dev.iter().sum::<f64>() / (m - 1.0)).sqrt()
    };
    let mean = if exact { xs[0] } else { mean };
    let valid = mean.is_finite() && std.is_finite();
    Ok(SampleStats {
        n: values.len(),
        mean,
        std,
        s2: s_prime(mean, std, 2),
        s10: s_prime(mean, std, 10),
        exact,
        nan_count,
        valid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionPoint {
    pub iteration: i64,
    pub bits: f64,
    pub mean: f64,
    pub std: f64,
}

/// Base-2 s' per iteration of one trace label across samples.
pub fn digits_evolution(traces: &[Vec<TracePoint>], label: &str) -> Result<Vec<EvolutionPoint>, StatsError> {
    if traces.len() < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: traces.len() });
    }
    let per_sample: Vec<Vec<&TracePoint>> =
        traces.iter().map(|t| t.iter().filter(|p| &*p.label == label).collect()).collect();
    let first = &per_sample[0];
    for (k, s) in per_sample.iter().enumerate().skip(1) {
        if s.len() != first.len() {
            return Err(StatsError::RaggedTrace(format!(
                "sample {k} has {} points for `{label}`, sample 0 has {}",
                s.len(),
                first.len()
            )));
        }
        if let Some(j) = s.iter().zip(first).position(|(a, b)| a.iteration != b.iteration) {
            return Err(StatsError::RaggedTrace(format!(
                "sample {k} point {j} is iteration {}, sample 0 has {}",
                s[j].iteration, first[j].iteration
            )));
        }
    }
    let mut out = Vec::with_capacity(first.len());
    let mut column = Vec::with_capacity(traces.len());
    for (j, p) in first.iter().enumerate() {
        column.clear();
        column.extend(per_sample.iter().map(|s| s[j].value.value()));
        let st = summarize(&column)?;
        out.push(EvolutionPoint { iteration: p.iteration, bits: st.s2, mean: st.mean, std: st.std });
    }
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln n`.
pub fn error_scaling_fit(points: &[(f64, f64)]) -> Result<f64, StatsError> {
    if points.len() < 3 {
        return Err(StatsError::TooFewSamples { needed: 3, got: points.len() });
    }
    for &(n, y) in points {
        for v in [n, y] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(StatsError::NonPositive(v));
            }
        }
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Lag-1 sample autocorrelation. `None` for fewer than 3 values or a
/// constant sequence, where it is undefined.
pub fn lag1_autocorrelation(xs: &[f64]) -> Option<f64> {
    if xs.len() < 3 || xs.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let den: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    if den == 0.0 {
        return None;
    }
    let num: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    Some(num / den)
}
