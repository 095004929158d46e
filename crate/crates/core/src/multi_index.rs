//! Multi-index enumeration in graded lexicographic order.

/// Exponent vector of a monomial x^α.
pub type MultiIndex = Vec<u32>;

/// Total degree |α|.
pub fn degree(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

/// All multi-indices of exactly total degree `n` in `d` variables, in
/// lexicographic order with the first exponent largest first.
pub fn of_degree(d: usize, n: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; d];
    fill(&mut current, 0, n, &mut out);
    out
}

fn fill(current: &mut MultiIndex, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    let d = current.len();
    if d == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == d - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        current[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill(current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

/// All multi-indices with |α| <= `max_degree`, graded then lexicographic.
pub fn up_to_degree(d: usize, max_degree: u32) -> Vec<MultiIndex> {
    (0..=max_degree).flat_map(|n| of_degree(d, n)).collect()
}

/// Every exponent even (the monomial is invariant under each sign flip).
pub fn all_even(alpha: &[u32]) -> bool {
    alpha.iter().all(|a| a % 2 == 0)
}

/// Number of non-zero exponents.
pub fn support(alpha: &[u32]) -> usize {
    alpha.iter().filter(|&&a| a > 0).count()
}

/// Evaluates x^α.
pub fn eval(alpha: &[u32], x: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(x)
        .filter(|(a, _)| **a > 0)
        .map(|(a, xi)| xi.powi(*a as i32))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::binomial;

    #[test]
    fn counts_match_binomials() {
        for d in 1..6 {
            for l in 0..7 {
                assert_eq!(
                    up_to_degree(d, l).len() as u128,
                    binomial((d as u32 + l) as u64, l as u64)
                );
            }
        }
    }

    #[test]
    fn graded_order() {
        let all = up_to_degree(2, 2);
        assert_eq!(
            all,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn eval_monomial() {
        assert_eq!(eval(&[2, 0, 1], &[3.0, 7.0, -2.0]), -18.0);
        assert_eq!(eval(&[0, 0], &[0.0, 0.0]), 1.0);
    }
}
