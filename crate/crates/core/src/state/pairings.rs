use std::collections::HashMap;

/// Number of non-crossing perfect matchings of positions `0..labels.len()`
/// in which every pair joins equal labels.
///
/// This counts the vacuum moments of products of semicircular variables
/// `Q_a = A_a + A_a†`, so it serves as an independent check on Fock
/// evaluation by rewriting.
pub fn count_noncrossing_pair_matchings(labels: &[usize]) -> u64 {
    if labels.len() % 2 == 1 {
        return 0;
    }
    let mut memo = HashMap::new();
    count(labels, 0, labels.len(), &mut memo)
}

fn count(labels: &[usize], lo: usize, hi: usize, memo: &mut HashMap<(usize, usize), u64>) -> u64 {
    if lo >= hi {
        return 1;
    }
    if (hi - lo) % 2 == 1 {
        return 0;
    }
    if let Some(&v) = memo.get(&(lo, hi)) {
        return v;
    }
    // position `lo` pairs with some `k`; the inside and the outside then
    // match independently
    let mut total = 0;
    let mut k = lo + 1;
    while k < hi {
        if labels[k] == labels[lo] {
            total += count(labels, lo + 1, k, memo) * count(labels, k + 1, hi, memo);
        }
        k += 2;
    }
    memo.insert((lo, hi), total);
    total
}
