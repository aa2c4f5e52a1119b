use super::NumError;

/// Relative size below which a Routh entry is treated as an exact zero
/// produced by cancellation.
const CANCELLATION: f64 = 1e-12;
/// Replacement for a vanishing first-column pivot, in scaled units.
const EPSILON_PIVOT: f64 = 1e-9;

#[derive(Debug)]
struct RouthOutcome {
    sign_changes: usize,
    epsilon_used: bool,
    zero_roots: usize,
}

/// True iff every root of the real descending-order polynomial has a
/// strictly negative real part.
///
/// A vanishing first-column pivot is replaced by a small positive number
/// (the standard substitution); any such substitution means a root on or to
/// the right of the imaginary axis, so the verdict is `false`. An entire
/// vanishing row also decides the verdict: it exposes a factor whose roots
/// are symmetric about the origin, so at least one lies in the closed right
/// half-plane.
pub fn routh_hurwitz_stable(coeffs: &[f64]) -> Result<bool, NumError> {
    match routh(coeffs) {
        Ok(out) => Ok(out.sign_changes == 0 && !out.epsilon_used && out.zero_roots == 0),
        Err(NumError::DegenerateArray { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Number of roots with positive real part, from the sign changes of the
/// first Routh column. Roots exactly at the origin are not counted.
///
/// Fails with [`NumError::DegenerateArray`] when a whole row vanishes; the
/// count then needs an eigenvalue computation instead.
pub fn routh_rhp_count(coeffs: &[f64]) -> Result<usize, NumError> {
    Ok(routh(coeffs)?.sign_changes)
}

fn routh(coeffs: &[f64]) -> Result<RouthOutcome, NumError> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(NumError::DegenerateInput("Routh coefficients"));
    }
    if coeffs.is_empty() || coeffs[0] == 0.0 {
        return Err(NumError::ZeroLeadingCoefficient);
    }
    let degree = coeffs.len() - 1;
    if degree > super::MAX_ORDER {
        return Err(NumError::InvalidOrder(degree));
    }
    let zero_roots = coeffs.iter().rev().take_while(|&&c| c == 0.0).count();
    let trimmed = &coeffs[..coeffs.len() - zero_roots];
    let n = trimmed.len() - 1;
    if n == 0 {
        return Ok(RouthOutcome { sign_changes: 0, epsilon_used: false, zero_roots });
    }

    // Substitute s = sigma * t so that the scaled polynomial is monic with a
    // unit-modulus constant term; real-part signs are unchanged.
    let lead = trimmed[0];
    let sigma = (trimmed[n] / lead).abs().powf(1.0 / n as f64);
    let d: Vec<f64> = trimmed
        .iter()
        .enumerate()
        .map(|(k, &c)| c / (lead * sigma.powi(k as i32)))
        .collect();

    let width = n / 2 + 1;
    let mut upper: Vec<f64> = (0..width).map(|j| d.get(2 * j).copied().unwrap_or(0.0)).collect();
    let mut lower: Vec<f64> = (0..width).map(|j| d.get(2 * j + 1).copied().unwrap_or(0.0)).collect();
    let mut first_column = vec![upper[0]];
    let mut epsilon_used = false;

    for row in 1..=n {
        if lower.iter().all(|&x| x == 0.0) {
            return Err(NumError::DegenerateArray { row });
        }
        if lower[0] == 0.0 {
            lower[0] = EPSILON_PIVOT;
            epsilon_used = true;
        }
        first_column.push(lower[0]);
        if row == n {
            break;
        }
        let pivot = lower[0];
        let next: Vec<f64> = (0..width)
            .map(|j| {
                let a = pivot * upper.get(j + 1).copied().unwrap_or(0.0);
                let b = upper[0] * lower.get(j + 1).copied().unwrap_or(0.0);
                let value = (a - b) / pivot;
                let magnitude = (a.abs() + b.abs()) / pivot.abs();
                if value.abs() <= CANCELLATION * magnitude {
                    0.0
                } else {
                    value
                }
            })
            .collect();
        upper = std::mem::replace(&mut lower, next);
    }

    let sign_changes = first_column
        .windows(2)
        .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
        .count();
    Ok(RouthOutcome { sign_changes, epsilon_used, zero_roots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_of_stable_factor() {
        assert_eq!(routh_hurwitz_stable(&[1.0, 3.0, 3.0, 1.0]), Ok(true));
    }

    #[test]
    fn saddle_is_unstable() {
        assert_eq!(routh_hurwitz_stable(&[1.0, 0.0, -1.0]), Ok(false));
    }

    #[test]
    fn counts_right_half_plane_roots() {
        // (s - 1)(s - 2)(s + 3) = s^3 - 7 s + 6
        assert_eq!(routh_rhp_count(&[1.0, 0.0, -7.0, 6.0]), Ok(2));
        // (s + 1)(s^2 - s + 4) has a complex pair with Re = 1/2
        assert_eq!(routh_rhp_count(&[1.0, 0.0, 3.0, 4.0]), Ok(2));
    }

    #[test]
    fn root_at_origin_is_not_stable() {
        assert_eq!(routh_hurwitz_stable(&[1.0, 2.0, 0.0]), Ok(false));
    }

    #[test]
    fn imaginary_axis_pair_reports_degenerate_row() {
        // (s^2 + 1)(s + 1): the s^1 row vanishes entirely
        assert_eq!(
            routh_rhp_count(&[1.0, 1.0, 1.0, 1.0]),
            Err(NumError::DegenerateArray { row: 2 })
        );
        assert_eq!(routh_hurwitz_stable(&[1.0, 1.0, 1.0, 1.0]), Ok(false));
    }

    #[test]
    fn negative_leading_coefficient_is_normalized() {
        assert_eq!(routh_hurwitz_stable(&[-1.0, -3.0, -3.0, -1.0]), Ok(true));
    }

    #[test]
    fn widely_scaled_coefficients() {
        // (s + 1e9)^2 (s + 3e6)
        let (a, b) = (1e9, 3e6);
        let c = [1.0, 2.0 * a + b, a * a + 2.0 * a * b, a * a * b];
        assert_eq!(routh_hurwitz_stable(&c), Ok(true));
    }
}
