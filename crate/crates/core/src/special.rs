//! Laguerre polynomials and log-factorials.
//!
//! Everything here is evaluated by recurrence; nothing forms `n!` directly.

/// `ln(n!)` for `n = 0..len` by cumulative summation of `ln k`.
pub fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    for k in 0..len {
        if k > 1 {
            acc += (k as f64).ln();
        }
        out.push(acc);
    }
    out
}

/// Ordinary Laguerre polynomial `L_n(x)`.
///
/// Negative orders evaluate to zero, which keeps formulas containing
/// `L_{N-1}` total at `N = 0`.
pub fn laguerre(n: i64, x: f64) -> f64 {
    if n < 0 {
        return 0.0;
    }
    assoc_laguerre(n as usize, 0, x)
}

/// Associated Laguerre polynomial `L_n^{(k)}(x)` via the three-term
/// recurrence in `n`.
pub fn assoc_laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Derivative `d/dx L_n(x) = -L_{n-1}^{(1)}(x)`.
pub fn laguerre_deriv(n: i64, x: f64) -> f64 {
    if n <= 0 {
        return 0.0;
    }
    -assoc_laguerre(n as usize - 1, 1, x)
}

/// The sequence `h_n = sqrt(n! k! / (n+k)!) L_n^{(k)}(x)` for `n = 0..len`.
///
/// This is the scale-free part of a displacement matrix element; it stays
/// O(1) where the bare Laguerre values overflow.
pub(crate) fn scaled_laguerre_column(len: usize, k: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(len);
    if len == 0 {
        return h;
    }
    let kf = k as f64;
    h.push(1.0);
    if len == 1 {
        return h;
    }
    h.push((1.0 + kf - x) / (1.0 + kf).sqrt());
    for n in 1..len - 1 {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + kf - x) * h[n] - (nf * (nf + kf)).sqrt() * h[n - 1])
            / ((nf + 1.0) * (nf + 1.0 + kf)).sqrt();
        h.push(next);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    // Explicit sum L_n^{(k)}(x) = sum_j (-1)^j C(n+k, n-j) x^j / j!
    fn explicit(n: usize, k: usize, x: f64) -> f64 {
        let mut sum = 0.0;
        for j in 0..=n {
            let mut c = 1.0;
            // C(n+k, n-j)
            let top = n + k;
            let r = n - j;
            for i in 0..r {
                c *= (top - i) as f64 / (i + 1) as f64;
            }
            let mut xj = 1.0;
            for i in 1..=j {
                xj *= x / i as f64;
            }
            sum += if j % 2 == 0 { c * xj } else { -c * xj };
        }
        sum
    }

    #[test]
    fn low_orders() {
        assert_eq!(laguerre(0, 3.0), 1.0);
        assert!((laguerre(1, 0.3) - 0.7).abs() < 1e-15);
        assert!((laguerre(2, 1.0) + 0.5).abs() < 1e-15);
        assert_eq!(laguerre(-1, 2.0), 0.0);
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for n in 0..12 {
            for k in 0..5 {
                for &x in &[0.0, 0.1, 1.3, 4.0] {
                    let a = assoc_laguerre(n, k, x);
                    let b = explicit(n, k, x);
                    assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "n={n} k={k} x={x}");
                }
            }
        }
    }

    #[test]
    fn derivative_by_finite_difference() {
        let h = 1e-6;
        for n in 0..10 {
            let x = 0.7;
            let fd = (laguerre(n, x + h) - laguerre(n, x - h)) / (2.0 * h);
            assert!((fd - laguerre_deriv(n, x)).abs() < 1e-6);
        }
    }

    #[test]
    fn scaled_column_matches_definition() {
        let lf = ln_factorials(40);
        for k in [0usize, 1, 3, 7] {
            let x = 0.8;
            let h = scaled_laguerre_column(20, k, x);
            for (n, hn) in h.iter().enumerate() {
                let scale = (0.5 * (lf[n] + lf[k] - lf[n + k])).exp();
                let want = scale * assoc_laguerre(n, k, x);
                assert!((hn - want).abs() < 1e-12 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn log_factorials() {
        let lf = ln_factorials(8);
        assert_eq!(lf[0], 0.0);
        assert_eq!(lf[1], 0.0);
        assert!((lf[5] - 120f64.ln()).abs() < 1e-13);
    }
}
