use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result, C64};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Term cap for [`hyp3f2`].
pub const HYP3F2_MAX_TERMS: usize = 1_000_000;

const SERIES_CROSSOVER: f64 = 16.0;

/// A function value together with a nonnegative error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpecialFnValue {
    pub value: f64,
    pub est_error: f64,
}

/// Table of `ln n!` for `0 ≤ n ≤ max`, built by accumulation.
#[derive(Clone, Debug)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for n in 1..=max {
            acc += (n as f64).ln();
            table.push(acc);
        }
        LogFactorials { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    pub fn ln_factorial(&self, n: usize) -> f64 {
        self.table[n]
    }

    /// `ln C(n, k)`; panics when `k > n`.
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        assert!(k <= n);
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

/// Sine integral `Si(x) = ∫₀ˣ sin t / t dt`.
pub fn sin_integral(x: f64) -> SpecialFnValue {
    let ax = x.abs();
    let (si, _, err) = if ax <= SERIES_CROSSOVER { sici_series(ax) } else { sici_fraction(ax) };
    SpecialFnValue { value: si.copysign(x), est_error: err }
}

/// Cosine integral `Ci(x) = γ + ln x + ∫₀ˣ (cos t − 1)/t dt`, defined for `x > 0`.
pub fn cos_integral(x: f64) -> Result<SpecialFnValue> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain { function: "cos_integral", value: x });
    }
    let (_, ci, err) = if x <= SERIES_CROSSOVER { sici_series(x) } else { sici_fraction(x) };
    Ok(SpecialFnValue { value: ci, est_error: err })
}

fn sici_series(x: f64) -> (f64, f64, f64) {
    if x == 0.0 {
        return (0.0, f64::NEG_INFINITY, 0.0);
    }
    let mut si = 0.0;
    let mut ci = 0.0;
    let mut peak = 0.0f64;
    // power = x^k / k!
    let mut power = 1.0;
    let mut k = 1usize;
    loop {
        power *= x / k as f64;
        let term = power / k as f64;
        peak = peak.max(term);
        let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            si += sign * term;
        } else {
            ci += sign * term;
        }
        if k as f64 > x && term < 1e-17 * si {
            break;
        }
        k += 1;
    }
    let ci = EULER_GAMMA + x.ln() + ci;
    (si, ci, 4.0 * f64::EPSILON * (peak * k as f64).max(1.0))
}

/// Modified Lentz evaluation of the continued fraction for `E₁(ix)`.
fn sici_fraction(x: f64) -> (f64, f64, f64) {
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;
    let mut b = C64::new(1.0, x);
    let mut c = C64::new(1.0 / tiny, 0.0);
    let mut d = C64::new(1.0, 0.0) / b;
    let mut h = d;
    let mut i = 2usize;
    loop {
        let a = -(((i - 1) * (i - 1)) as f64);
        b += 2.0;
        d = C64::new(1.0, 0.0) / (d * a + b);
        c = b + C64::new(a, 0.0) / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < f64::EPSILON || i > 100_000 {
            break;
        }
        i += 1;
    }
    let h = C64::new(x.cos(), -x.sin()) * h;
    (FRAC_PI_2 + h.im, -h.re, 4.0 * f64::EPSILON * (i as f64).sqrt())
}

/// Generalised hypergeometric series `₃F₂(a₁, a₂, a₃; b₁, b₂; z)` on `0 ≤ z ≤ 1`.
///
/// For `z < 1` the geometric tail bound `t_{n+1}/(1 − z)` is the reported error. At
/// `z = 1` the series converges only for `s = b₁ + b₂ − a₁ − a₂ − a₃ > 0`, terms decay
/// like `n^{−(1+s)}`, and an asymptotic tail estimate is added to the partial sum.
pub fn hyp3f2(a: [f64; 3], b: [f64; 2], z: f64, tol: f64) -> Result<SpecialFnValue> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain { function: "hyp3f2", value: z });
    }
    if a.iter().chain(&b).any(|&p| !(p > 0.0)) {
        return Err(Error::InvalidParameter { name: "hyp3f2", reason: "series parameters must be positive".into() });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter { name: "tol", reason: format!("{tol} is not positive") });
    }
    if z == 0.0 {
        return Ok(SpecialFnValue { value: 1.0, est_error: 0.0 });
    }
    let ratio = |n: f64| z * (n + a[0]) * (n + a[1]) * (n + a[2]) / ((n + b[0]) * (n + b[1]) * (n + 1.0));
    if z < 1.0 {
        let mut sum = 1.0;
        let mut term = 1.0;
        for n in 0..HYP3F2_MAX_TERMS {
            let r = ratio(n as f64);
            term *= r;
            sum += term;
            let r_next = ratio(n as f64 + 1.0);
            if r_next >= 1.0 {
                continue;
            }
            // term ratios are eventually monotone in n with limit z
            let bound = term * r_next / (1.0 - z).min(1.0 - r_next);
            if term < tol && r < 1.0 && bound < tol {
                return Ok(SpecialFnValue { value: sum, est_error: bound });
            }
        }
        return Err(Error::NoConvergence { routine: "hyp3f2", limit: HYP3F2_MAX_TERMS });
    }
    let sigma = 1.0 + b[0] + b[1] - a[0] - a[1] - a[2];
    if sigma <= 1.0 {
        return Err(Error::Domain { function: "hyp3f2", value: z });
    }
    // t_{n+1}/t_n = 1 − σ/n + ρ/n² + …  ⇒  Σ_{m>n} t_m ≈ t_{n+1} (n + 1 + β)/(σ − 1)
    let a1 = a[0] + a[1] + a[2];
    let a2 = a[0] * a[1] + a[0] * a[2] + a[1] * a[2];
    let b1 = b[0] + b[1] + 1.0;
    let b2 = b[0] * b[1] + b[0] + b[1];
    let rho = a2 - a1 * b1 + b1 * b1 - b2;
    let beta = rho / sigma - 1.0;
    let mut sum = 1.0;
    let mut term = 1.0;
    for n in 0..HYP3F2_MAX_TERMS {
        term *= ratio(n as f64);
        sum += term;
        let m = (n + 1) as f64;
        let next = term * ratio(m);
        let tail = next * (m + 1.0 + beta) / (sigma - 1.0);
        let err = tail.abs() / m;
        if term < tol && err < tol {
            return Ok(SpecialFnValue { value: sum + tail, est_error: err });
        }
    }
    Err(Error::NoConvergence { routine: "hyp3f2", limit: HYP3F2_MAX_TERMS })
}
