//! Small shared helpers.

/// Advances `idx` as an odometer over `0..base` (last position fastest).
/// Returns `false` after the last tuple.
pub fn next_tuple(idx: &mut [usize], base: usize) -> bool {
    for p in (0..idx.len()).rev() {
        idx[p] += 1;
        if idx[p] < base {
            return true;
        }
        idx[p] = 0;
    }
    false
}

/// Row-major index of `args` in a table over `m` values.
#[inline]
pub fn table_index(args: &[u32], m: usize) -> usize {
    args.iter().fold(0usize, |acc, &a| acc * m + a as usize)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}
