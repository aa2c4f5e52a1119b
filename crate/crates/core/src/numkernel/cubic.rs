use serde::Serialize;

use super::{all_finite, NumError, C64};

/// Primitive cube root of unity, `-1/2 + i sqrt(3)/2`.
const OMEGA: C64 = C64::new(-0.5, 0.866_025_403_784_438_6);

/// Roots of a monic cubic together with their scaled residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicRoots {
    pub roots: [C64; 3],
    /// `|f(root)| / scale^3` per root.
    pub residuals: [f64; 3],
    /// `max(1, |l1|, |l2|^(1/2), |l3|^(1/3))`.
    pub scale: f64,
}

/// Intermediate quantities of the Cardano solution, in the caller's units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CardanoParts {
    /// Depressed-cubic coefficients of `x^3 + p x + q` with `w = x - l1/3`.
    pub p: C64,
    pub q: C64,
    /// Paired cube roots, `u v = -p/3`.
    pub u: C64,
    pub v: C64,
}

pub(crate) fn cubic_scale(l1: C64, l2: C64, l3: C64) -> f64 {
    1f64.max(l1.norm()).max(l2.norm().sqrt()).max(l3.norm().cbrt())
}

/// Solves `w^3 + l1 w^2 + l2 w + l3 = 0` in closed form.
///
/// The depressed cubic is solved with one principal cube root `u` and its
/// partner `v = -p/(3u)`, so the pair always satisfies `u v = -p/3`.
/// The sign of the discriminant square root is chosen so that `|u^3|` is the
/// larger of the two candidates; the other choice only swaps `u` and `v`.
pub fn solve_cubic_cardano(l1: C64, l2: C64, l3: C64) -> Result<CubicRoots, NumError> {
    if !all_finite(&[l1, l2, l3]) {
        return Err(NumError::DegenerateInput("cubic coefficients"));
    }
    let scale = cubic_scale(l1, l2, l3);
    // Solve in the scaled variable y = w / scale so that all intermediate
    // quantities are O(1).
    let (a, b, c) = (l1 / scale, l2 / (scale * scale), l3 / (scale * scale * scale));
    let parts = depressed_parts(a, b, c);
    let shift = a / 3.0;
    let (u, v) = (parts.u, parts.v);
    let unit_roots = [
        u + v - shift,
        OMEGA * u + OMEGA.conj() * v - shift,
        OMEGA.conj() * u + OMEGA * v - shift,
    ];
    let roots = unit_roots.map(|y| y * scale);
    let residuals = unit_roots.map(|y| (((y + a) * y + b) * y + c).norm());
    Ok(CubicRoots { roots, residuals, scale })
}

/// The depressed coefficients and paired cube roots for the given cubic.
pub fn cardano_parts(l1: C64, l2: C64, l3: C64) -> Result<CardanoParts, NumError> {
    if !all_finite(&[l1, l2, l3]) {
        return Err(NumError::DegenerateInput("cubic coefficients"));
    }
    let s = cubic_scale(l1, l2, l3);
    let unit = depressed_parts(l1 / s, l2 / (s * s), l3 / (s * s * s));
    Ok(CardanoParts {
        p: unit.p * (s * s),
        q: unit.q * (s * s * s),
        u: unit.u * s,
        v: unit.v * s,
    })
}

fn depressed_parts(a: C64, b: C64, c: C64) -> CardanoParts {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let plus = -q / 2.0 + disc;
    let minus = -q / 2.0 - disc;
    let cube = if plus.norm() >= minus.norm() { plus } else { minus };
    if cube.norm() == 0.0 {
        // p = q = 0: triple root of the depressed cubic at the origin.
        let zero = C64::new(0.0, 0.0);
        return CardanoParts { p, q, u: zero, v: zero };
    }
    let u = cube.cbrt();
    let v = if u.norm() > f64::MIN_POSITIVE { -p / (3.0 * u) } else { C64::new(0.0, 0.0) };
    CardanoParts { p, q, u, v }
}

#[cfg(test)]
mod tests {
    use super::super::multiset_distance;
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn integer_roots() {
        let r = solve_cubic_cardano(c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0)).unwrap();
        let d = multiset_distance(&r.roots, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert!(d < 1e-12, "{:?}", r.roots);
        assert!(r.residuals.iter().all(|&x| x < 1e-10));
    }

    #[test]
    fn imaginary_pair_and_zero() {
        let r = solve_cubic_cardano(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let d = multiset_distance(&r.roots, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)]).unwrap();
        assert!(d < 1e-12, "{:?}", r.roots);
    }

    #[test]
    fn triple_root_has_vanishing_depressed_coefficients() {
        // (w - 2 - i)^3
        let a = c(2.0, 1.0);
        let r = solve_cubic_cardano(-3.0 * a, 3.0 * a * a, -a * a * a).unwrap();
        // A triple root is only determined to about cbrt(eps) * scale.
        for z in r.roots {
            assert!((z - a).norm() < 1e-4, "{z}");
        }
        let parts = cardano_parts(-3.0 * a, 3.0 * a * a, -a * a * a).unwrap();
        assert!(parts.p.norm() < 1e-14 && parts.q.norm() < 1e-14);
    }

    #[test]
    fn pairing_constraint_holds() {
        let (l1, l2, l3) = (c(0.3, -1.2), c(-2.0, 0.7), c(1.1, 0.4));
        let parts = cardano_parts(l1, l2, l3).unwrap();
        let s = cubic_scale(l1, l2, l3);
        assert!((parts.u * parts.v + parts.p / 3.0).norm() <= 1e-12 * s * s);
    }

    #[test]
    fn large_magnitudes_do_not_overflow() {
        let roots = [c(3e9, 1e6), c(3.1e9, -2e6), c(-1e8, 0.0)];
        let p = super::super::poly_from_roots(&roots);
        let r = solve_cubic_cardano(p[1], p[2], p[3]).unwrap();
        assert!(multiset_distance(&r.roots, &roots).unwrap() < 1e-3);
    }

    #[test]
    fn rejects_nan() {
        assert!(solve_cubic_cardano(c(f64::NAN, 0.0), c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }
}
