//! Aberth–Ehrlich simultaneous root finding for dense complex polynomials.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const MAX_ITERATIONS: usize = 800;

/// Roots of `Σ c_k z^k` and whether every root met the stopping test.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub converged: bool,
}

/// Drops leading-order coefficients that are negligible relative to the largest.
fn effective_degree(c: &[Complex64]) -> usize {
    let max = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    let mut d = c.len() - 1;
    while d > 0 && (c[d].norm() <= 1e-300_f64.max(max * 1e-290) || !c[d].is_finite()) {
        d -= 1;
    }
    d
}

/// Initial guesses from the upper convex hull of `(k, ln|c_k|)`.
fn newton_polygon_guesses(lc: &[f64]) -> Vec<Complex64> {
    let n = lc.len() - 1;
    let mut hull: Vec<usize> = Vec::new();
    for k in 0..=n {
        if lc[k] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let (i, j) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // j is below the chord i–k ⇒ drop it
            let cross = (lc[j] - lc[i]) * (k - i) as f64 - (lc[k] - lc[i]) * (j - i) as f64;
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut guesses = Vec::with_capacity(n);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        let m = j - i;
        let radius = ((lc[i] - lc[j]) / m as f64).exp();
        for t in 0..m {
            let angle = 2.0 * std::f64::consts::PI * (t as f64 / m as f64 + i as f64 / n as f64) + sigma;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

/// `p(z) / p'(z)` and a rounding-error estimate for `|p(z)|`.
fn newton_ratio(c: &[Complex64], z: Complex64) -> (Complex64, f64, f64) {
    let n = c.len() - 1;
    if z.norm() <= 1.0 {
        let (mut p, mut dp, mut bound) = (c[n], ZERO, c[n].norm());
        let az = z.norm();
        for k in (0..n).rev() {
            dp = dp * z + p;
            p = p * z + c[k];
            bound = bound * az + c[k].norm();
        }
        (p / dp, p.norm(), bound)
    } else {
        // Reversed polynomial in w = 1/z: p(z) = z^n q(w), q(w) = Σ c_{n-k} w^k.
        let w = z.inv();
        let aw = w.norm();
        let (mut q, mut dq, mut bound) = (c[0], ZERO, c[0].norm());
        for &ck in &c[1..=n] {
            dq = dq * w + q;
            q = q * w + ck;
            bound = bound * aw + ck.norm();
        }
        // p'/p = (n - w q'/q) / z
        let ratio = (n as f64 * ONE - w * dq / q) / z;
        (ratio.inv(), q.norm(), bound)
    }
}

/// All roots of `Σ c_k z^k`; exact zero low-order coefficients give roots at 0.
pub fn aberth(c: &[Complex64]) -> RootSet {
    let d = if c.is_empty() { 0 } else { effective_degree(c) };
    let lead_zeros = c.iter().take(d).take_while(|&&v| v == ZERO).count();
    let mut roots = vec![ZERO; lead_zeros];
    let core = &c[lead_zeros..=d.max(lead_zeros)];
    let n = core.len() - 1;
    if n == 0 {
        return RootSet { roots, converged: true };
    }
    let max = core.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scaled: Vec<Complex64> = core.iter().map(|z| z / max).collect();
    if n == 1 {
        roots.push(-scaled[0] / scaled[1]);
        return RootSet { roots, converged: true };
    }
    let lc: Vec<f64> = scaled.iter().map(|z| z.norm().ln()).collect();
    let mut z = newton_polygon_guesses(&lc);
    let mut done = vec![false; n];
    let eps = f64::EPSILON;
    for _ in 0..MAX_ITERATIONS {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, value, bound) = newton_ratio(&scaled, z[i]);
            if value <= 4.0 * n as f64 * eps * bound || !ratio.is_finite() {
                done[i] = true;
                continue;
            }
            let sum: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (ONE - ratio * sum);
            if !step.is_finite() {
                done[i] = true;
                continue;
            }
            z[i] -= step;
            if step.norm() <= eps * z[i].norm() {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    let converged = done.iter().all(|&d| d);
    roots.extend(z);
    RootSet { roots, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<f64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re));
        v.iter().map(|z| z.re).collect()
    }

    #[test]
    fn quadratic() {
        let r = aberth(&[c(-1.0), c(0.0), c(1.0)]);
        assert!(r.converged);
        let s = sorted_re(r.roots);
        assert!((s[0] + 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_roots_and_trailing_zeros() {
        let r = aberth(&[c(0.0), c(-2.0), c(1.0), c(0.0), c(0.0)]);
        let s = sorted_re(r.roots);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn wilkinson_like_spread() {
        // (z - 1)(z - 10)(z - 100)(z - 1000)(z + 0.01)
        let mut p = vec![c(1.0)];
        for r in [1.0, 10.0, 100.0, 1000.0, -0.01] {
            p = crate::poly::convolve(&p, &[c(-r), c(1.0)]);
        }
        let s = sorted_re(aberth(&p).roots);
        for (a, b) in s.iter().zip([-0.01, 1.0, 10.0, 100.0, 1000.0]) {
            assert!((a - b).abs() < 1e-11 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn roots_of_unity_high_degree() {
        let n = 200;
        let mut p = vec![ZERO; n + 1];
        p[0] = c(-1.0);
        p[n] = c(1.0);
        let r = aberth(&p);
        assert!(r.converged);
        for z in r.roots {
            assert!((z.norm() - 1.0).abs() < 1e-13);
            assert!((z.powu(n as u32) - 1.0).norm() < 1e-11);
        }
    }

    #[test]
    fn complex_coefficients() {
        let a = Complex64::new(1.0, 2.0);
        let b = Complex64::new(-0.5, 0.25);
        let p = crate::poly::convolve(&[-a, ONE], &[-b, ONE]);
        let r = aberth(&p);
        assert!(r.roots.iter().any(|z| (z - a).norm() < 1e-14));
        assert!(r.roots.iter().any(|z| (z - b).norm() < 1e-14));
    }
}
