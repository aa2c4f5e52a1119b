use itertools::Itertools;

use super::{NumError, C64};

/// Largest set size matched exhaustively; larger sets fall back to a greedy
/// nearest-pair assignment.
const EXHAUSTIVE_LIMIT: usize = 8;

/// `sum_i |next[perm[i]] - prev[i]|`.
pub fn matching_cost(prev: &[C64], next: &[C64], perm: &[usize]) -> f64 {
    prev.iter().zip(perm).map(|(p, &j)| (next[j] - p).norm()).sum()
}

/// Permutation `perm` such that `next[perm[i]]` continues `prev[i]`,
/// minimizing the total displacement over all permutations.
///
/// Ties keep the lexicographically first permutation, so an unchanged input
/// always maps to the identity.
pub fn match_branches(prev: &[C64], next: &[C64]) -> Result<Vec<usize>, NumError> {
    if prev.len() != next.len() {
        return Err(NumError::LengthMismatch { left: prev.len(), right: next.len() });
    }
    let k = prev.len();
    if k > EXHAUSTIVE_LIMIT {
        return Ok(greedy(prev, next));
    }
    let mut best: Vec<usize> = (0..k).collect();
    let mut best_cost = matching_cost(prev, next, &best);
    for perm in (0..k).permutations(k) {
        let cost = matching_cost(prev, next, &perm);
        if cost < best_cost {
            best_cost = cost;
            best = perm;
        }
    }
    Ok(best)
}

fn greedy(prev: &[C64], next: &[C64]) -> Vec<usize> {
    let k = prev.len();
    let mut pairs: Vec<(f64, usize, usize)> = (0..k)
        .cartesian_product(0..k)
        .map(|(i, j)| ((next[j] - prev[i]).norm(), i, j))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut perm = vec![usize::MAX; k];
    let mut taken = vec![false; k];
    for (_, i, j) in pairs {
        if perm[i] == usize::MAX && !taken[j] {
            perm[i] = j;
            taken[j] = true;
        }
    }
    perm
}

/// Reorders `next` so that entry `i` continues branch `i`.
pub fn apply_permutation(next: &[C64], perm: &[usize]) -> Vec<C64> {
    perm.iter().map(|&j| next[j]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roots() -> Vec<C64> {
        vec![C64::new(1.0, 0.5), C64::new(-2.0, 0.0), C64::new(0.3, -1.0)]
    }

    #[test]
    fn identical_sets_give_identity() {
        let r = roots();
        assert_eq!(match_branches(&r, &r).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn reversed_sets_give_reversal() {
        let r = roots();
        let rev: Vec<C64> = r.iter().rev().copied().collect();
        let perm = match_branches(&r, &rev).unwrap();
        assert_eq!(perm, vec![2, 1, 0]);
        assert_eq!(apply_permutation(&rev, &perm), r);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let r = roots();
        assert!(match_branches(&r, &r[..2]).is_err());
    }

    #[test]
    fn greedy_fallback_handles_large_sets() {
        let prev: Vec<C64> = (0..10).map(|k| C64::new(k as f64, 0.0)).collect();
        let next: Vec<C64> = prev.iter().rev().map(|z| z + 0.01).collect();
        let perm = match_branches(&prev, &next).unwrap();
        assert_eq!(perm, (0..10).rev().collect::<Vec<_>>());
    }
}
