//! Multisets over Z_d: subset-sum spectra and zero-sum extraction.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};

/// Cardinality guard for the public exact operations.
pub const MAX_CARDINALITY: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Multiset {
    d: u32,
    counts: Vec<u32>,
    cardinality: usize,
    sum: u32,
}

impl Multiset {
    pub fn empty(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::Dimension(format!("modulus must be at least 2, got {d}")));
        }
        Ok(Multiset {
            d,
            counts: vec![0; d as usize],
            cardinality: 0,
            sum: 0,
        })
    }

    /// Items are reduced mod `d`.
    pub fn from_items(d: u32, items: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut m = Self::empty(d)?;
        for x in items {
            m.insert(x);
        }
        Ok(m)
    }

    pub fn insert(&mut self, x: u32) {
        let x = x % self.d;
        self.counts[x as usize] += 1;
        self.cardinality += 1;
        self.sum = (self.sum + x) % self.d;
    }

    pub fn modulus(&self) -> u32 {
        self.d
    }

    pub fn multiplicity(&self, k: u32) -> u32 {
        self.counts[(k % self.d) as usize]
    }

    /// `|f|`.
    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    /// `s(f)` reduced mod `d`.
    pub fn sum(&self) -> u32 {
        self.sum
    }

    /// `Σ k·f(k)` over representatives `0..d`, without reduction.
    pub fn integer_sum(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| k as u64 * c as u64)
            .sum()
    }

    /// Items in ascending order.
    pub fn items(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.cardinality);
        for (k, &c) in self.counts.iter().enumerate() {
            out.extend(std::iter::repeat(k as u32).take(c as usize));
        }
        out
    }

    fn guard(&self) -> Result<()> {
        if self.cardinality > MAX_CARDINALITY {
            return Err(Error::Size(format!(
                "multiset of cardinality {} exceeds the limit {MAX_CARDINALITY}",
                self.cardinality
            )));
        }
        Ok(())
    }

    /// Residues reachable as the sum of a nonempty sub-multiset.
    pub fn spectrum(&self) -> Result<BTreeSet<u32>> {
        self.guard()?;
        let mut sp = vec![false; self.d as usize];
        for x in self.items() {
            sp = grow_spectrum(&sp, x);
        }
        Ok((0..self.d).filter(|&k| sp[k as usize]).collect())
    }

    pub fn is_zero_sum_free(&self) -> Result<bool> {
        Ok(!self.spectrum()?.contains(&0))
    }

    /// Smallest nonempty zero-sum sub-multiset, lexicographically first
    /// among those of minimum size.
    pub fn find_zero_sum_subset(&self) -> Result<Option<Multiset>> {
        self.guard()?;
        let items = self.items();
        Ok(zero_sum_subset(self.d, &items).map(|idx| {
            let sub = Multiset::from_items(self.d, idx.iter().map(|&i| items[i]))
                .expect("modulus already validated");
            assert_eq!(sub.sum(), 0, "zero-sum witness does not sum to zero");
            sub
        }))
    }
}

/// `sp(f + {x})` from `sp(f)`.
fn grow_spectrum(sp: &[bool], x: u32) -> Vec<bool> {
    let d = sp.len();
    let x = x as usize % d;
    let mut out = sp.to_vec();
    out[x] = true;
    for (s, &present) in sp.iter().enumerate() {
        if present {
            out[(s + x) % d] = true;
        }
    }
    out
}

/// Minimum-cardinality zero-sum subset of `items`, returned as ascending
/// indices. `items` need not be sorted; ties are broken by the
/// lexicographic order of the chosen values, then by index.
///
/// No cardinality guard: the cost is `O(len · d)`.
pub(crate) fn zero_sum_subset(d: u32, items: &[u32]) -> Option<Vec<usize>> {
    let d = d as usize;
    let n = items.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (items[i] % d as u32, i));
    let vals: Vec<usize> = order.iter().map(|&i| items[i] as usize % d).collect();

    // best[i][s]: fewest items from vals[i..] summing to s (empty allowed)
    const INF: usize = usize::MAX / 2;
    let mut best = vec![vec![INF; d]; n + 1];
    best[n][0] = 0;
    for i in (0..n).rev() {
        for s in 0..d {
            let skip = best[i + 1][s];
            let take = 1 + best[i + 1][(s + d - vals[i]) % d];
            best[i][s] = skip.min(take);
        }
    }
    let total = (0..n)
        .map(|i| 1 + best[i + 1][(d - vals[i]) % d])
        .min()
        .filter(|&k| k < INF)?;

    let mut chosen = Vec::with_capacity(total);
    let mut remaining = total;
    let mut target = 0usize;
    let mut pos = 0usize;
    while remaining > 0 {
        let j = (pos..n)
            .find(|&j| 1 + best[j + 1][(target + d - vals[j]) % d] == remaining)
            .expect("reconstruction follows the table");
        chosen.push(order[j]);
        target = (target + d - vals[j]) % d;
        remaining -= 1;
        pos = j + 1;
    }
    debug_assert_eq!(target, 0);
    chosen.sort_unstable();
    Some(chosen)
}

/// Repeatedly pull zero-sum subsets out of `items` until what is left is
/// zero-sum free. Returns the extracted groups and the remainder, all as
/// indices into `items`.
pub(crate) fn split_zero_sum(d: u32, items: &[u32]) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut left: Vec<usize> = (0..items.len()).collect();
    let mut groups = Vec::new();
    loop {
        let vals: Vec<u32> = left.iter().map(|&i| items[i]).collect();
        match zero_sum_subset(d, &vals) {
            Some(sub) => {
                let picked: Vec<usize> = sub.iter().map(|&k| left[k]).collect();
                let mut keep = Vec::with_capacity(left.len() - picked.len());
                let mut it = sub.iter().peekable();
                for (k, &idx) in left.iter().enumerate() {
                    if it.peek() == Some(&&k) {
                        it.next();
                    } else {
                        keep.push(idx);
                    }
                }
                groups.push(picked);
                left = keep;
            }
            None => return (groups, left),
        }
    }
}

/// Result of the exhaustive search over zero-sum-free multisets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremalReport {
    pub d: u32,
    /// Largest cardinality searched; one more than the conjectured maximum.
    pub searched_up_to: usize,
    pub zero_sum_free_count: usize,
    pub max_cardinality: usize,
    pub max_sum: u64,
    /// A zero-sum-free multiset attaining both maxima.
    pub witness: Vec<u32>,
    pub cardinality_bound_holds: bool,
    pub sum_bound_holds: bool,
}

// Walk every multiset over 1..d with at most `max_card` items, in
// nondecreasing item order, calling `visit(items, spectrum mask)`.
// Branches stop as soon as the spectrum contains 0 unless `all` is set.
fn enumerate(d: u32, max_card: usize, all: bool, visit: &mut dyn FnMut(&[u32], u64)) {
    fn rec(
        d: u32,
        max_card: usize,
        all: bool,
        start: u32,
        items: &mut Vec<u32>,
        mask: u64,
        visit: &mut dyn FnMut(&[u32], u64),
    ) {
        visit(items, mask);
        if items.len() == max_card || (!all && mask & 1 != 0) {
            return;
        }
        for x in start..d {
            items.push(x);
            rec(d, max_card, all, x, items, grow_mask(d, mask, x), visit);
            items.pop();
        }
    }
    rec(d, max_card, all, 1, &mut Vec::new(), 0, visit);
}

fn grow_mask(d: u32, mask: u64, x: u32) -> u64 {
    let full = (1u64 << d) - 1;
    let rot = ((mask << x) | (mask >> (d - x))) & full;
    mask | rot | (1u64 << x)
}

/// Exhaustively confirm that zero-sum-free multisets over Z_d have at most
/// `d-1` elements and integer sum at most `(d-1)²`.
pub fn verify_extremal_theorems(d: u32) -> Result<ExtremalReport> {
    if !(2..=9).contains(&d) {
        return Err(Error::Size(format!("exhaustive search supports 2 <= d <= 9, got {d}")));
    }
    let searched = d as usize;
    let mut count = 0usize;
    let mut max_card = 0usize;
    let mut max_sum = 0u64;
    let mut witness: Vec<u32> = Vec::new();
    // Zero never appears in a zero-sum-free multiset, so values run over 1..d.
    enumerate(d, searched, false, &mut |items, mask| {
        if mask & 1 != 0 {
            return;
        }
        count += 1;
        let s: u64 = items.iter().map(|&x| x as u64).sum();
        max_card = max_card.max(items.len());
        if s > max_sum || (s == max_sum && items.len() > witness.len()) {
            max_sum = s;
            witness = items.to_vec();
        }
    });
    let dm1 = (d - 1) as u64;
    Ok(ExtremalReport {
        d,
        searched_up_to: searched,
        zero_sum_free_count: count,
        max_cardinality: max_card,
        max_sum,
        cardinality_bound_holds: max_card == d as usize - 1,
        sum_bound_holds: max_sum == dm1 * dm1 && witness.len() == max_card,
        witness,
    })
}

/// Outcome of the strict spectrum growth check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthReport {
    pub d: u32,
    pub max_cardinality: usize,
    pub multisets_checked: usize,
    pub extensions_checked: usize,
    /// `(f, x)` pairs where `sp(f + {x})` failed to grow.
    pub violations: Vec<(Vec<u32>, u32)>,
}

/// For every zero-sum-free `f` with `|f| <= max_card` and every `x` in Z_d,
/// check that adding `x` strictly enlarges the spectrum.
pub fn verify_spectrum_growth(d: u32, max_card: usize) -> Result<GrowthReport> {
    if !(2..=9).contains(&d) {
        return Err(Error::Size(format!("exhaustive search supports 2 <= d <= 9, got {d}")));
    }
    let mut report = GrowthReport {
        d,
        max_cardinality: max_card,
        multisets_checked: 0,
        extensions_checked: 0,
        violations: Vec::new(),
    };
    enumerate(d, max_card, false, &mut |items, mask| {
        if mask & 1 != 0 {
            return;
        }
        report.multisets_checked += 1;
        for x in 0..d {
            let grown = if x == 0 { mask | 1 } else { grow_mask(d, mask, x) };
            report.extensions_checked += 1;
            if grown == mask {
                report.violations.push((items.to_vec(), x));
            }
        }
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_spectrum(d: u32, items: &[u32]) -> BTreeSet<u32> {
        let n = items.len();
        (1u32..(1 << n))
            .map(|mask| {
                (0..n)
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| items[i])
                    .sum::<u32>()
                    % d
            })
            .collect()
    }

    fn brute_min_zero_sum(d: u32, items: &[u32]) -> Option<usize> {
        let n = items.len();
        (1u32..(1 << n))
            .filter(|mask| {
                (0..n)
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| items[i])
                    .sum::<u32>()
                    % d
                    == 0
            })
            .map(|mask| mask.count_ones() as usize)
            .min()
    }

    #[test]
    fn spectrum_examples() {
        let f = Multiset::from_items(5, [1, 1, 3]).unwrap();
        assert_eq!(f.spectrum().unwrap(), (0..5).collect());
        assert!(Multiset::empty(5).unwrap().spectrum().unwrap().is_empty());
        let f = Multiset::from_items(5, [4, 4, 4, 4]).unwrap();
        assert_eq!(f.spectrum().unwrap(), [1, 2, 3, 4].into_iter().collect());
        assert!(f.is_zero_sum_free().unwrap());
    }

    #[test]
    fn cached_counts() {
        let f = Multiset::from_items(5, [4, 4, 2, 7]).unwrap();
        assert_eq!(f.cardinality(), 4);
        assert_eq!(f.sum(), (4 + 4 + 2 + 2) % 5);
        assert_eq!(f.integer_sum(), 12);
        assert_eq!(f.items(), vec![2, 2, 4, 4]);
        assert_eq!(f.multiplicity(2), 2);
    }

    #[test]
    fn zero_sum_examples() {
        let w = |d, v: &[u32]| {
            Multiset::from_items(d, v.iter().copied())
                .unwrap()
                .find_zero_sum_subset()
                .unwrap()
                .map(|m| m.items())
        };
        assert_eq!(w(5, &[2, 3]), Some(vec![2, 3]));
        assert_eq!(w(5, &[1, 1, 1, 1]), None);
        assert_eq!(w(2, &[1, 1]), Some(vec![1, 1]));
        assert_eq!(w(5, &[1, 1, 3, 2, 3]), Some(vec![2, 3]));
        assert_eq!(w(7, &[3, 1, 2, 5, 4]), Some(vec![2, 5]));
    }

    #[test]
    fn guard() {
        let f = Multiset::from_items(3, std::iter::repeat(1).take(65)).unwrap();
        assert!(f.spectrum().unwrap_err().is_size());
        assert!(f.find_zero_sum_subset().unwrap_err().is_size());
    }

    #[test]
    fn split_leaves_zero_sum_free_remainder() {
        let items = [1, 1, 3, 2, 3];
        let (groups, rest) = split_zero_sum(5, &items);
        assert!(rest.is_empty());
        let sums: Vec<Vec<u32>> = groups
            .iter()
            .map(|g| {
                let mut v: Vec<u32> = g.iter().map(|&i| items[i]).collect();
                v.sort();
                v
            })
            .collect();
        assert_eq!(sums, vec![vec![2, 3], vec![1, 1, 3]]);
        let (groups, rest) = split_zero_sum(5, &[1, 1, 1, 1, 2]);
        assert_eq!(groups.len(), 1);
        assert_eq!(rest.len(), 1);
    }

    #[test]
    fn extremal_small() {
        let r = verify_extremal_theorems(5).unwrap();
        assert_eq!((r.max_cardinality, r.max_sum), (4, 16));
        assert_eq!(r.witness, vec![4, 4, 4, 4]);
        let r = verify_extremal_theorems(2).unwrap();
        assert_eq!((r.max_cardinality, r.max_sum), (1, 1));
        let r = verify_extremal_theorems(3).unwrap();
        assert_eq!((r.max_cardinality, r.max_sum, r.witness), (2, 4, vec![2, 2]));
        assert!(verify_extremal_theorems(10).unwrap_err().is_size());
        assert!(verify_extremal_theorems(1).unwrap_err().is_size());
    }

    #[test]
    fn dp_agrees_with_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let d = rng.gen_range(2..9);
            let n = rng.gen_range(0..10);
            let items: Vec<u32> = (0..n).map(|_| rng.gen_range(0..d)).collect();
            let f = Multiset::from_items(d, items.iter().copied()).unwrap();
            assert_eq!(f.spectrum().unwrap(), brute_spectrum(d, &items));
            let found = zero_sum_subset(d, &items);
            assert_eq!(found.as_ref().map(|v| v.len()), brute_min_zero_sum(d, &items));
            if let Some(idx) = found {
                assert_eq!(idx.iter().map(|&i| items[i]).sum::<u32>() % d, 0);
            }
        }
    }
}
