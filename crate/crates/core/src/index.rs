//! Tensor multi-index helpers. Axis 1 runs fastest everywhere.

/// All multi-indices `(j_1..j_dim)` with `j_a < counts[a]`, axis 1 fastest.
pub fn multi_indices(dim: usize, counts: &[usize]) -> Vec<[usize; 3]> {
    let n1 = counts[0];
    let n2 = if dim > 1 { counts[1] } else { 1 };
    let n3 = if dim > 2 { counts[2] } else { 1 };
    let mut out = Vec::with_capacity(n1 * n2 * n3);
    for j3 in 0..n3 {
        for j2 in 0..n2 {
            for j1 in 0..n1 {
                out.push([j1, j2, j3]);
            }
        }
    }
    out
}

/// Flat position of a multi-index, consistent with [`multi_indices`] order.
pub fn pack(dim: usize, counts: &[usize], j: [usize; 3]) -> usize {
    let mut idx = j[0];
    let mut stride = counts[0];
    if dim > 1 {
        idx += stride * j[1];
        stride *= counts[1];
    }
    if dim > 2 {
        idx += stride * j[2];
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_matches_enumeration() {
        let counts = [3, 4, 2];
        for (pos, j) in multi_indices(3, &counts).iter().enumerate() {
            assert_eq!(pack(3, &counts, *j), pos);
        }
        for (pos, j) in multi_indices(2, &counts).iter().enumerate() {
            assert_eq!(pack(2, &counts, *j), pos);
            assert_eq!(j[2], 0);
        }
    }
}
