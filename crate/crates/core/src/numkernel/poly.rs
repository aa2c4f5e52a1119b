use super::C64;

/// Evaluates a descending-order polynomial at `z`.
pub fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Value and first derivative in one Horner pass.
pub fn eval_with_derivative(coeffs: &[C64], z: C64) -> (C64, C64) {
    let zero = C64::new(0.0, 0.0);
    let mut p = zero;
    let mut dp = zero;
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// `|p(z)| / sum_k |a_k| |z|^k`, the normwise backward error of `z` as a root.
pub fn backward_error(coeffs: &[C64], z: C64) -> f64 {
    let r = z.norm();
    let denom = coeffs.iter().fold(0.0, |acc, c| acc * r + c.norm());
    if denom == 0.0 {
        return 0.0;
    }
    horner(coeffs, z).norm() / denom
}

/// Monic descending coefficients of `prod (w - r_i)`.
pub fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        coeffs = next;
    }
    coeffs
}

// Error-free transformations (Knuth TwoSum, FMA-based TwoProd) and their
// complex extensions.

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
fn two_sum_c(a: C64, b: C64) -> (C64, C64) {
    let (sr, er) = two_sum(a.re, b.re);
    let (si, ei) = two_sum(a.im, b.im);
    (C64::new(sr, si), C64::new(er, ei))
}

/// `x*y = p + e + f` exactly, with `p` the rounded product.
#[inline]
fn two_prod_c(x: C64, y: C64) -> (C64, C64, C64) {
    let (p1, e1) = two_prod(x.re, y.re);
    let (p2, e2) = two_prod(x.im, y.im);
    let (p3, e3) = two_prod(x.re, y.im);
    let (p4, e4) = two_prod(x.im, y.re);
    let (s1, f1) = two_sum(p1, -p2);
    let (s2, f2) = two_sum(p3, p4);
    (C64::new(s1, s2), C64::new(e1 - e2, e3 + e4), C64::new(f1, f2))
}

/// Compensated Horner evaluation: the result is as accurate as if computed
/// in twice the working precision, then rounded.
pub fn eval_compensated(coeffs: &[C64], z: C64) -> C64 {
    let mut iter = coeffs.iter();
    let Some(&first) = iter.next() else {
        return C64::new(0.0, 0.0);
    };
    let mut s = first;
    let mut err = C64::new(0.0, 0.0);
    for &c in iter {
        let (p, pe, pf) = two_prod_c(s, z);
        let (sn, se) = two_sum_c(p, c);
        s = sn;
        err = err * z + (pe + pf + se);
    }
    s + err
}
