//! Chebyshev-basis primitives: interpolation through a DCT, Clenshaw
//! evaluation, parity manipulations and an exact dyadic Horner evaluator.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::parallel::{map_range, Execution};

/// Coefficients `c_0..=c_n` of the degree-`n` interpolant of `f` through the
/// `n+1` Chebyshev points of the first kind.
pub fn interpolate<F>(f: F, n: usize) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let m = n + 1;
    let values = map_range(Execution::default(), m, |j| f((PI * (j as f64 + 0.5) / m as f64).cos()));
    dct2_coefficients(&values)
}

/// Chebyshev coefficients from samples at first-kind nodes, via a length-`2m` FFT.
fn dct2_coefficients(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(2 * m);
    buf.extend(values.iter().map(|&y| Complex::new(y, 0.0)));
    buf.extend(values.iter().rev().map(|&y| Complex::new(y, 0.0)));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(2 * m).process(&mut buf);
    let mut c: Vec<f64> = (0..m)
        .map(|k| {
            let twiddle = Complex::from_polar(1.0, -PI * k as f64 / (2 * m) as f64);
            (twiddle * buf[k]).re / m as f64
        })
        .collect();
    c[0] *= 0.5;
    c
}

/// Clenshaw recurrence for `Σ c_k T_k(x)`.
pub fn clenshaw(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    let two_x = 2.0 * x;
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + two_x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// `tail[d] = Σ_{k ≥ d} |c_k|`, with one extra trailing zero.
pub fn tail_sums(c: &[f64]) -> Vec<f64> {
    let mut tail = vec![0.0; c.len() + 1];
    for k in (0..c.len()).rev() {
        tail[k] = tail[k + 1] + c[k].abs();
    }
    tail
}

/// Coefficients of `P(x) + P(−x)`.
pub fn symmetrize_even(c: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = c.iter().enumerate().map(|(k, &v)| if k % 2 == 0 { 2.0 * v } else { 0.0 }).collect();
    trim(&mut out);
    out
}

/// Coefficients of `x·P(x)`, using `x T_k = (T_{k+1} + T_{|k−1|})/2`.
pub fn multiply_by_x(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c.len() + 1];
    for (k, &v) in c.iter().enumerate() {
        if k == 0 {
            out[1] += v;
        } else {
            out[k + 1] += 0.5 * v;
            out[k - 1] += 0.5 * v;
        }
    }
    trim(&mut out);
    out
}

/// Drops trailing exact zeros, keeping at least one coefficient.
pub fn trim(c: &mut Vec<f64>) {
    while c.len() > 1 && c[c.len() - 1] == 0.0 {
        c.pop();
    }
}

/// Values of `Σ c_k T_k` at the `n` Lobatto points of [`chebyshev_grid`], by a
/// DCT-I computed with a length-`2N` FFT (`N = n − 1`, requires `N ≥ deg`).
pub fn lobatto_values(c: &[f64], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![clenshaw(c, 0.0)];
    }
    let big_n = n - 1;
    assert!(c.len() <= n, "grid too coarse for the degree");
    let coef = |k: usize| c.get(k).copied().unwrap_or(0.0);
    let mut buf: Vec<Complex<f64>> = (0..2 * big_n)
        .map(|k| {
            let idx = if k <= big_n { k } else { 2 * big_n - k };
            Complex::new(coef(idx), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(2 * big_n).process(&mut buf);
    let (c0, cn) = (coef(0), coef(big_n));
    (0..n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            0.5 * (buf[j].re + c0 + sign * cn)
        })
        .collect()
}

/// `n` Chebyshev–Lobatto points `cos(πj/(n−1))` on `[−1, 1]`.
pub fn chebyshev_grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|j| (PI * j as f64 / (n - 1) as f64).cos()).collect()
}

/// The same point distribution affinely mapped onto `[lo, hi]`.
pub fn mapped_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    chebyshev_grid(n)
        .into_iter()
        .map(|u| (0.5 * (lo + hi) + 0.5 * (hi - lo) * u).clamp(lo, hi))
        .collect()
}

/// Exact dyadic value `mantissa · 2^exponent` of a finite double.
fn dyadic(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp_bits == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp_bits - 1075) };
    (BigInt::from(m) * sign, e)
}

fn ldexp(mut v: f64, mut e: i64) -> f64 {
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

fn big_to_f64(v: &BigInt, exp2: i64) -> f64 {
    let bits = v.bits() as i64;
    let shift = (bits - 64).max(0);
    let head = (v >> shift as usize).to_f64().unwrap_or(0.0);
    ldexp(head, exp2 + shift)
}

/// Integer monomial coefficients of `T_0..=T_n`.
fn chebyshev_monomials(n: usize) -> Vec<Vec<BigInt>> {
    let mut t: Vec<Vec<BigInt>> = vec![vec![BigInt::from(1)]];
    if n >= 1 {
        t.push(vec![BigInt::zero(), BigInt::from(1)]);
    }
    for k in 1..n {
        let mut next = vec![BigInt::zero(); k + 2];
        for (j, a) in t[k].iter().enumerate() {
            next[j + 1] += a * 2;
        }
        for (j, a) in t[k - 1].iter().enumerate() {
            next[j] -= a;
        }
        t.push(next);
    }
    t
}

/// Chebyshev coefficients converted to the monomial basis without rounding,
/// as integers scaled by a common power of two: `a_j = ints[j] · 2^exp`.
pub struct ExactMonomial {
    ints: Vec<BigInt>,
    exp: i64,
}

impl ExactMonomial {
    pub fn from_chebyshev(c: &[f64]) -> Self {
        let n = c.len().saturating_sub(1);
        let parts: Vec<(BigInt, i64)> = c.iter().map(|&v| dyadic(v)).collect();
        let exp = parts.iter().filter(|(m, _)| !m.is_zero()).map(|(_, e)| *e).min().unwrap_or(0);
        let t = chebyshev_monomials(n);
        let mut ints = vec![BigInt::zero(); n + 1];
        for (k, (m, e)) in parts.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let scaled = m << (e - exp) as usize;
            for (j, tj) in t[k].iter().enumerate() {
                if !tj.is_zero() {
                    ints[j] += &scaled * tj;
                }
            }
        }
        Self { ints, exp }
    }

    /// Monomial coefficients rounded to doubles (display only).
    pub fn coefficients(&self) -> Vec<f64> {
        self.ints.iter().map(|a| big_to_f64(a, self.exp)).collect()
    }

    /// Horner's rule carried out exactly, rounded once at the end.
    pub fn eval(&self, x: f64) -> f64 {
        let deg = self.ints.len() - 1;
        let (mut mx, mut ex) = dyadic(x);
        if ex > 0 {
            mx <<= ex as usize;
            ex = 0;
        }
        if mx.is_zero() {
            return big_to_f64(&self.ints[0], self.exp);
        }
        // Σ a_j x^j = 2^{exp + deg·ex} Σ ints_j mx^j 2^{−ex(deg−j)}
        let s = -ex;
        let mut acc = self.ints[deg].clone();
        for j in (0..deg).rev() {
            acc *= &mx;
            acc += &self.ints[j] << (s * (deg - j) as i64) as usize;
        }
        big_to_f64(&acc, self.exp + deg as i64 * ex)
    }
}
