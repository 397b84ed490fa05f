//! Permutations of `{1..m}` stored as 1-based tuples.

use crate::error::{Error, Result};

/// All permutations of `{1..m}` in lexicographic order.
pub fn all_permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=m).collect();
    loop {
        out.push(cur.clone());
        if !next_permutation(&mut cur) {
            break;
        }
    }
    out
}

/// Advances `v` to its lexicographic successor; returns false on the last one.
pub fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Position of a 1-based permutation in lexicographic order (Lehmer code).
pub fn lex_rank(perm: &[usize]) -> usize {
    let m = perm.len();
    let mut rank = 0;
    for i in 0..m {
        let smaller_after = perm[i + 1..].iter().filter(|&&p| p < perm[i]).count();
        rank = rank * (m - i) + smaller_after;
    }
    rank
}

pub fn is_permutation(perm: &[usize]) -> bool {
    let m = perm.len();
    let mut seen = vec![false; m];
    for &p in perm {
        if p == 0 || p > m || seen[p - 1] {
            return false;
        }
        seen[p - 1] = true;
    }
    true
}

/// The permutation `σ` with `σ_i < σ_j` iff `tuple_i < tuple_j`.
pub fn natural_order_permutation(tuple: &[i64]) -> Result<Vec<usize>> {
    let mut idx: Vec<usize> = (0..tuple.len()).collect();
    idx.sort_by_key(|&i| tuple[i]);
    if idx.windows(2).any(|w| tuple[w[0]] == tuple[w[1]]) {
        return Err(Error::DuplicateEntries);
    }
    let mut sigma = vec![0; tuple.len()];
    for (rank, &i) in idx.iter().enumerate() {
        sigma[i] = rank + 1;
    }
    Ok(sigma)
}

/// Calls `visit` with every permutation consistent with the weak order of
/// `tuple`, i.e. every linear extension of its ties.
pub fn for_each_linear_extension(tuple: &[i64], mut visit: impl FnMut(&[usize])) {
    let m = tuple.len();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by_key(|&i| tuple[i]);
    // blocks of equal values, each with its first rank
    let mut blocks: Vec<(Vec<usize>, usize)> = Vec::new();
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && tuple[idx[end]] == tuple[idx[start]] {
            end += 1;
        }
        blocks.push((idx[start..end].to_vec(), start + 1));
        start = end;
    }
    let mut sigma = vec![0; m];
    fn rec(
        blocks: &[(Vec<usize>, usize)],
        k: usize,
        sigma: &mut [usize],
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if k == blocks.len() {
            visit(sigma);
            return;
        }
        let (positions, first) = &blocks[k];
        let mut ranks: Vec<usize> = (*first..first + positions.len()).collect();
        loop {
            for (p, r) in positions.iter().zip(&ranks) {
                sigma[*p] = *r;
            }
            rec(blocks, k + 1, sigma, visit);
            if !next_permutation(&mut ranks) {
                break;
            }
        }
    }
    rec(&blocks, 0, &mut sigma, &mut visit);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_order_examples() {
        assert_eq!(natural_order_permutation(&[10, 30, 20]).unwrap(), vec![1, 3, 2]);
        assert_eq!(natural_order_permutation(&[1, 2, 3]).unwrap(), vec![1, 2, 3]);
        assert_eq!(natural_order_permutation(&[5, -1]).unwrap(), vec![2, 1]);
        assert!(matches!(natural_order_permutation(&[4, 1, 4]), Err(Error::DuplicateEntries)));
    }

    #[test]
    fn lex_rank_matches_enumeration_order() {
        for m in 1..=5 {
            for (i, p) in all_permutations(m).iter().enumerate() {
                assert_eq!(lex_rank(p), i);
            }
        }
    }

    #[test]
    fn linear_extensions_of_ties() {
        let mut seen = Vec::new();
        for_each_linear_extension(&[0, 1, 1], |s| seen.push(s.to_vec()));
        seen.sort();
        assert_eq!(seen, vec![vec![1, 2, 3], vec![1, 3, 2]]);

        let mut count = 0;
        for_each_linear_extension(&[7, 7, 7, 7], |_| count += 1);
        assert_eq!(count, 24);
    }
}
