//! Hand-written Rust versions of the corpus kernels, compiled at
//! round-to-nearest. They pin down what the IEEE backend must reproduce.

pub fn kahan_compensated(f: &[f32]) -> f32 {
    let mut sum = f[0];
    let mut c = 0.0f32;
    for &x in &f[1..] {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

pub fn naive_sequential(f: &[f32]) -> f32 {
    let mut sum = f[0];
    for &x in &f[1..] {
        sum += x;
    }
    sum
}

/// Four-lane reduction, the shape a vectorizing compiler gives the naive loop
/// once reassociation is allowed.
pub fn naive_vectorized(f: &[f32]) -> f32 {
    let n = f.len();
    let mut s = [f[0], 0.0, 0.0, 0.0];
    let blocks = (n - 1) / 4;
    for j in 0..blocks {
        for (l, lane) in s.iter_mut().enumerate() {
            *lane += f[4 * j + 1 + l];
        }
    }
    let mut sum = (s[0] + s[2]) + (s[1] + s[3]);
    for &x in &f[4 * blocks + 1..] {
        sum += x;
    }
    sum
}

/// 2x2 elimination with partial pivoting; returns `(x1, x2)`.
pub fn linear_system<T>(a: [[T; 2]; 2], b: [T; 2]) -> (T, T)
where
    T: Copy + PartialOrd + std::ops::Sub<Output = T> + std::ops::Mul<Output = T> + std::ops::Div<Output = T> + Abs,
{
    let ([p, q], [r, s], bp, br) = if a[1][0].abs() > a[0][0].abs() {
        (a[1], a[0], b[1], b[0])
    } else {
        (a[0], a[1], b[0], b[1])
    };
    let l = r / p;
    let u22 = s - l * q;
    let y2 = br - l * bp;
    let x2 = y2 / u22;
    let x1 = (bp - q * x2) / p;
    (x1, x2)
}

pub trait Abs {
    fn abs(self) -> Self;
}

impl Abs for f32 {
    fn abs(self) -> Self {
        f32::abs(self)
    }
}

impl Abs for f64 {
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

pub fn unstable_branch() -> f64 {
    let a = 2.0 * 3.0f64.sqrt() / 3.0;
    let b = a * a - a * a;
    if b >= 0.0 {
        b.sqrt() + 10.0
    } else {
        (-b).sqrt() + 10.0
    }
}

pub fn counter(c0: f64, iterations: u64) -> f64 {
    let mut c = c0;
    for i in 0..iterations {
        if i % 2 == 0 {
            c += 1.0e6;
        } else {
            c -= 1.0e-6;
        }
    }
    c
}

pub fn cf(x: f64) -> f64 {
    4.0 - 3.0 * (x - 2.0) * ((x - 5.0) * (x - 5.0) + 4.0)
        / (x + (x - 2.0) * (x - 2.0) * ((x - 5.0) * (x - 5.0) + 3.0))
}

pub fn rp(x: f64) -> f64 {
    (622.0 - x * (751.0 - x * (324.0 - x * (59.0 - 4.0 * x))))
        / (112.0 - x * (151.0 - x * (72.0 - x * (14.0 - x))))
}

pub fn improbability(x: f64, dx: &[f64], form: super::KhForm) -> Vec<f64> {
    match form {
        super::KhForm::Printed => dx.iter().map(|d| cf(x + d) - rp(x)).collect(),
        super::KhForm::Swapped => dx.iter().map(|d| rp(x + d) - cf(x)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_system_published_values() {
        let (x1, x2) = linear_system([[0.2161, 0.1441], [1.2969, 0.8648]], [0.1440, 0.8642]);
        assert_eq!(x1, 2.000000002400302);
        assert_eq!(x2, -2.0000000035996206);
        let (x1, x2) = linear_system([[0.2161f32, 0.1441], [1.2969, 0.8648]], [0.1440, 0.8642]);
        assert_eq!(x1, 1.3331791);
        assert_eq!(x2, -1.0);
    }

    #[test]
    fn vectorized_matches_sequential_on_integers() {
        let f: Vec<f32> = (0..37).map(|i| i as f32).collect();
        assert_eq!(naive_vectorized(&f), naive_sequential(&f));
        assert_eq!(naive_vectorized(&[3.5]), 3.5);
    }

    #[test]
    fn counter_desk_scale() {
        // paper scale is exercised by the acceptance suite
        let c = counter(-5e11, 1_000_000);
        assert!(c.is_finite());
    }
}
