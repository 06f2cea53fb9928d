//! Subset enumeration and permutation signs for exterior algebra indices.

/// All `p`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if p > n {
        return out;
    }
    let mut current: Vec<usize> = (0..p).collect();
    loop {
        out.push(current.clone());
        // advance to the next combination
        let mut i = p;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < n - p + i {
                current[i] += 1;
                for j in i + 1..p {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Position of `subset` in the lexicographic list of same-size subsets.
pub fn subset_index(n: usize, subset: &[usize]) -> usize {
    // rank by counting lexicographically smaller subsets
    let p = subset.len();
    let mut rank = 0;
    let mut prev = 0usize;
    for (i, &s) in subset.iter().enumerate() {
        let start = if i == 0 { 0 } else { prev + 1 };
        for v in start..s {
            rank += binomial(n - 1 - v, p - 1 - i);
        }
        prev = s;
    }
    rank
}

/// Sign of the permutation sorting `indices` (which must be distinct).
pub fn sort_sign(indices: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..indices.len() {
        for j in i + 1..indices.len() {
            if indices[i] > indices[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Exterior product `e_i ∧ e_I`: returns the sorted subset and its sign,
/// or `None` when `i ∈ I`.
pub fn wedge_left(i: usize, subset: &[usize]) -> Option<(Vec<usize>, f64)> {
    if subset.contains(&i) {
        return None;
    }
    let mut joined = Vec::with_capacity(subset.len() + 1);
    joined.push(i);
    joined.extend_from_slice(subset);
    let sign = sort_sign(&joined);
    joined.sort_unstable();
    Some((joined, sign))
}

/// Complement of `subset` in `0..n`, sorted.
pub fn complement(n: usize, subset: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !subset.contains(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_lexicographic_and_counted() {
        let s = subsets(4, 2);
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], vec![0, 1]);
        assert_eq!(s[5], vec![2, 3]);
        for (k, sub) in s.iter().enumerate() {
            assert_eq!(subset_index(4, sub), k);
        }
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
    }

    #[test]
    fn wedge_signs() {
        assert_eq!(wedge_left(1, &[0]), Some((vec![0, 1], -1.0)));
        assert_eq!(wedge_left(0, &[1]), Some((vec![0, 1], 1.0)));
        assert_eq!(wedge_left(1, &[1, 2]), None);
        assert_eq!(binomial(5, 2), 10);
    }
}
