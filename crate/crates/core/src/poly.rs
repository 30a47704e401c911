//! Dense complex polynomials stored as ascending coefficient lists.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Exact binomial coefficient, converted to floating point at the end.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * u128::from(n - j) / u128::from(j + 1);
    }
    acc as f64
}

/// Horner evaluation of `Σ c_k z^k`.
pub fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(ZERO, |acc, &ck| acc * z + ck)
}

/// Value and derivative by Horner's scheme.
pub fn horner_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO))
        .collect()
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(ZERO) - b.get(k).copied().unwrap_or(ZERO))
        .collect()
}

pub fn scale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|&x| x * s).collect()
}

/// Coefficients of `q(Λ) = p(λ0 + Λ)`.
pub fn recenter(c: &[Complex64], lam0: Complex64) -> Vec<Complex64> {
    let n = c.len();
    let mut out = vec![ZERO; n];
    for (j, &cj) in c.iter().enumerate() {
        let mut pow = Complex64::new(1.0, 0.0);
        // term cj (λ0 + Λ)^j contributes binom(j, k) λ0^(j-k) to Λ^k
        for m in 0..=j {
            let k = j - m;
            out[k] += cj * binomial(j as u64, m as u64) * pow;
            pow *= lam0;
        }
    }
    out
}

/// Whether every coefficient is exactly zero.
pub fn is_zero(c: &[Complex64]) -> bool {
    c.iter().all(|&x| x == ZERO)
}

/// Drops trailing exact zeros (keeps at least one coefficient).
pub fn trim(mut c: Vec<Complex64>) -> Vec<Complex64> {
    while c.len() > 1 && c.last() == Some(&ZERO) {
        c.pop();
    }
    c
}
