//! Fixed-size subset enumeration in lexicographic order, for the explicit
//! operator constructions on tiny ground sets.

/// Binomial coefficient; callers keep `m` small enough that u64 suffices.
pub fn binomial(m: usize, k: usize) -> u64 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (m - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// All k-subsets of `{0, ..., m-1}` in lexicographic order.
pub fn k_subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(m, k) as usize);
    let mut current = Vec::with_capacity(k);
    fn recurse(m: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        let remaining = k - current.len();
        for i in start..=(m - remaining) {
            current.push(i);
            recurse(m, k, i + 1, current, out);
            current.pop();
        }
    }
    if k <= m {
        recurse(m, k, 0, &mut current, &mut out);
    }
    out
}

/// Elements of `{0, ..., m-1}` not in the sorted slice `set`.
pub fn complement(m: usize, set: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(m - set.len());
    let mut it = set.iter().peekable();
    for i in 0..m {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            out.push(i);
        }
    }
    out
}

/// Whether sorted `a` is a subset of sorted `b`.
pub fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut it = b.iter();
    'outer: for x in a {
        for y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}
