//! Block-labeled set partitions of `[n]`.
//!
//! Elements and labels are 0-based in memory. The text encoding renders both
//! 1-based: blocks in order of appearance, each as its sorted elements joined
//! by commas with the label after a colon, blocks separated by `|`
//! (`"1,2:1|3:2"`).

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::tensor::MergeTensor;

/// One block together with its type label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledBlock {
    elements: Vec<usize>,
    label: usize,
}

impl LabeledBlock {
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn least(&self) -> usize {
        self.elements[0]
    }
}

/// A partition of `[n]` whose blocks carry labels from `{0, .., d-1}`.
///
/// Blocks are kept in order of appearance, so structural equality is equality
/// of partitions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledPartition {
    n: usize,
    d: usize,
    blocks: Vec<LabeledBlock>,
}

/// A partition of `[n]` without labels, blocks in order of appearance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// True when every block of `self` lies inside one block of `other`.
    pub fn is_finer_than(&self, other: &SetPartition) -> bool {
        if self.n != other.n {
            return false;
        }
        let owner = block_index(other.n, other.blocks.iter().map(|b| b.as_slice()));
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&e| owner[e] == owner[b[0]]))
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| join_elements(b))
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

fn join_elements(b: &[usize]) -> String {
    b.iter()
        .map(|e| (e + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn block_index<'a>(n: usize, blocks: impl Iterator<Item = &'a [usize]>) -> Vec<usize> {
    let mut owner = vec![usize::MAX; n];
    for (b, block) in blocks.enumerate() {
        for &e in block {
            owner[e] = b;
        }
    }
    owner
}

impl LabeledPartition {
    /// Builds a partition from arbitrary `(elements, label)` pairs, validating
    /// that the blocks are nonempty, disjoint and cover `[n]`.
    pub fn new(n: usize, d: usize, blocks: Vec<(Vec<usize>, usize)>) -> Result<Self> {
        if n == 0 || d == 0 {
            return invalid("n and d must be positive");
        }
        let mut seen = vec![false; n];
        let mut out = Vec::with_capacity(blocks.len());
        for (mut elements, label) in blocks {
            if elements.is_empty() {
                return invalid("empty block");
            }
            if label >= d {
                return invalid(format!("label {} out of range for d = {d}", label + 1));
            }
            elements.sort_unstable();
            for &e in &elements {
                if e >= n {
                    return invalid(format!("element {} outside [{n}]", e + 1));
                }
                if seen[e] {
                    return invalid(format!("element {} appears twice", e + 1));
                }
                seen[e] = true;
            }
            out.push(LabeledBlock { elements, label });
        }
        if let Some(e) = seen.iter().position(|s| !s) {
            return invalid(format!("element {} not covered", e + 1));
        }
        out.sort_unstable_by_key(|b| b.least());
        Ok(Self { n, d, blocks: out })
    }

    /// The all-singletons partition `{({1},k_1), .., ({n},k_n)}`.
    pub fn singletons(d: usize, labels: &[usize]) -> Result<Self> {
        let blocks = labels
            .iter()
            .enumerate()
            .map(|(e, &k)| (vec![e], k))
            .collect();
        Self::new(labels.len(), d, blocks)
    }

    fn from_canonical(n: usize, d: usize, blocks: Vec<LabeledBlock>) -> Self {
        debug_assert!(blocks.windows(2).all(|w| w[0].least() < w[1].least()));
        Self { n, d, blocks }
    }

    /// Parses the canonical text encoding (1-based elements and labels).
    pub fn parse(s: &str, d: usize) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut n = 0;
        for part in s.trim().split('|') {
            let (elems, label) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("block '{part}' has no ':label'")))?;
            let label: usize = label
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad label in '{part}'")))?;
            if label == 0 {
                return Err(Error::Parse("labels are 1-based".into()));
            }
            let mut elements = Vec::new();
            for e in elems.split(',') {
                let e: usize = e
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad element in '{part}'")))?;
                if e == 0 {
                    return Err(Error::Parse("elements are 1-based".into()));
                }
                n = n.max(e);
                elements.push(e - 1);
            }
            blocks.push((elements, label - 1));
        }
        Self::new(n, d, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn blocks(&self) -> &[LabeledBlock] {
        &self.blocks
    }

    /// `|π|`.
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Number of `k`-blocks for every label `k`.
    pub fn block_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.d];
        for b in &self.blocks {
            counts[b.label] += 1;
        }
        counts
    }

    pub fn labels(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.label).collect()
    }

    /// The type of the block holding element `e`.
    pub fn label_of(&self, e: usize) -> usize {
        self.blocks
            .iter()
            .find(|b| b.elements.binary_search(&e).is_ok())
            .map(|b| b.label)
            .expect("element inside [n]")
    }

    /// Label removal: the underlying unlabeled partition.
    pub fn remove_labels(&self) -> SetPartition {
        SetPartition {
            n: self.n,
            blocks: self.blocks.iter().map(|b| b.elements.clone()).collect(),
        }
    }

    /// Relabels the blocks in canonical order.
    pub fn with_labels(&self, labels: &[usize]) -> Result<Self> {
        if labels.len() != self.blocks.len() {
            return invalid("label vector length must equal the block count");
        }
        if let Some(&k) = labels.iter().find(|&&k| k >= self.d) {
            return invalid(format!("label {} out of range", k + 1));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(labels)
            .map(|(b, &label)| LabeledBlock {
                elements: b.elements.clone(),
                label,
            })
            .collect();
        Ok(Self::from_canonical(self.n, self.d, blocks))
    }

    /// Natural restriction to `[m]`: intersect every block with `[m]` and drop
    /// the empty ones.
    pub fn restrict(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.n {
            return invalid(format!("restriction size {m} outside 1..={}", self.n));
        }
        let blocks = self
            .blocks
            .iter()
            .filter(|b| b.least() < m)
            .map(|b| LabeledBlock {
                elements: b.elements.iter().copied().filter(|&e| e < m).collect(),
                label: b.label,
            })
            .collect();
        Ok(Self::from_canonical(m, self.d, blocks))
    }

    /// `σ(π)`: blocks mapped elementwise, labels preserved. `sigma[e]` is the
    /// image of element `e` (0-based).
    pub fn apply_permutation(&self, sigma: &[usize]) -> Result<Self> {
        check_permutation(sigma, self.n)?;
        let blocks = self
            .blocks
            .iter()
            .map(|b| (b.elements.iter().map(|&e| sigma[e]).collect(), b.label))
            .collect();
        Self::new(self.n, self.d, blocks)
    }

    /// `π ⊆ π'`: every block of `other` is a union of blocks of `self`
    /// (labels disregarded).
    pub fn is_finer_than(&self, other: &LabeledPartition) -> bool {
        self.n == other.n && self.remove_labels().is_finer_than(&other.remove_labels())
    }

    /// The merge structure of a transition `self -> other`: `j_k` is the number
    /// of `k`-blocks of `other` and `i_{k,l,s}` the number of `l`-blocks of
    /// `self` merging into the `s`-th `k`-block of `other` (order of
    /// appearance). `None` when `self` is not finer than `other`.
    pub fn merge_structure(&self, other: &LabeledPartition) -> Result<Option<MergeTensor>> {
        if self.n != other.n || self.d != other.d {
            return invalid("partitions must share n and d");
        }
        let d = self.d;
        let owner = block_index(other.n, other.blocks.iter().map(|b| b.elements.as_slice()));
        let mut slot_of = Vec::with_capacity(other.blocks.len());
        let mut j = vec![0; d];
        for b in &other.blocks {
            slot_of.push(j[b.label]);
            j[b.label] += 1;
        }
        let mut entries: Vec<Vec<usize>> = (0..d * d).map(|idx| vec![0; j[idx / d]]).collect();
        for b in &self.blocks {
            let target = owner[b.least()];
            if b.elements.iter().any(|&e| owner[e] != target) {
                return Ok(None);
            }
            let k = other.blocks[target].label;
            entries[k * d + b.label][slot_of[target]] += 1;
        }
        Ok(Some(MergeTensor::from_parts(d, j, entries)))
    }

    /// Permutations of `[n]` that only exchange elements of equal type.
    pub fn type_preserving(&self, sigma: &[usize]) -> bool {
        (0..self.n).all(|e| self.label_of(e) == self.label_of(sigma[e]))
    }
}

impl fmt::Display for LabeledPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{}:{}", join_elements(&b.elements), b.label + 1))
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

fn check_permutation(sigma: &[usize], n: usize) -> Result<()> {
    if sigma.len() != n {
        return invalid(format!("permutation has length {}, expected {n}", sigma.len()));
    }
    let mut hit = vec![false; n];
    for &v in sigma {
        if v >= n || hit[v] {
            return invalid("permutation is not a bijection of [n]");
        }
        hit[v] = true;
    }
    Ok(())
}

/// Size limits for materialized enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationCap {
    pub max_n: usize,
    pub max_d: usize,
}

impl Default for EnumerationCap {
    fn default() -> Self {
        Self { max_n: 8, max_d: 4 }
    }
}

impl EnumerationCap {
    pub fn check(&self, n: usize, d: usize) -> Result<()> {
        if n > self.max_n || d > self.max_d {
            return Err(Error::CapExceeded(format!(
                "n = {n}, d = {d} exceeds the cap n <= {}, d <= {}",
                self.max_n, self.max_d
            )));
        }
        Ok(())
    }
}

/// All unlabeled partitions of `[n]`, grouped by ascending block count and
/// lexicographic on the block lists inside each group.
pub fn enumerate_set_partitions(n: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    collect_rgs(&mut rgs, 1, 0, &mut out, n);
    out.sort_by(|a, b| {
        a.num_blocks()
            .cmp(&b.num_blocks())
            .then_with(|| a.blocks.cmp(&b.blocks))
    });
    out
}

fn collect_rgs(rgs: &mut [usize], pos: usize, max: usize, out: &mut Vec<SetPartition>, n: usize) {
    if n == 0 {
        return;
    }
    if pos == n {
        let mut blocks = vec![Vec::new(); max + 1];
        for (e, &b) in rgs.iter().enumerate() {
            blocks[b].push(e);
        }
        out.push(SetPartition { n, blocks });
        return;
    }
    for b in 0..=max + 1 {
        rgs[pos] = b;
        collect_rgs(rgs, pos + 1, max.max(b), out, n);
    }
}

/// Every element of `P_{n,E}` with `|E| = d`, using the default cap.
///
/// Order: ascending block count, then the unlabeled partition, then the
/// label tuple lexicographically. For `n = 2, d = 2` this yields
/// `{12}:1, {12}:2, {1}{2}:11, :12, :21, :22`.
pub fn enumerate_partitions(n: usize, d: usize) -> Result<Vec<LabeledPartition>> {
    enumerate_partitions_with_cap(n, d, EnumerationCap::default())
}

pub fn enumerate_partitions_with_cap(
    n: usize,
    d: usize,
    cap: EnumerationCap,
) -> Result<Vec<LabeledPartition>> {
    if n == 0 || d == 0 {
        return invalid("n and d must be positive");
    }
    cap.check(n, d)?;
    let mut out = Vec::new();
    for p in enumerate_set_partitions(n) {
        let j = p.num_blocks();
        let mut labels = vec![0usize; j];
        loop {
            let blocks = p
                .blocks
                .iter()
                .zip(&labels)
                .map(|(b, &label)| LabeledBlock {
                    elements: b.clone(),
                    label,
                })
                .collect();
            out.push(LabeledPartition::from_canonical(n, d, blocks));
            // odometer over labels, last position fastest
            let mut pos = j;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                labels[pos] += 1;
                if labels[pos] < d {
                    break;
                }
                labels[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
    }
    Ok(out)
}

/// Stirling numbers of the second kind `S(n, j)`, or `None` past `u128`.
pub fn checked_stirling2(n: usize, j: usize) -> Option<u128> {
    let mut row = vec![0u128; j + 1];
    row[0] = 1;
    for m in 1..=n {
        for k in (1..=j.min(m)).rev() {
            row[k] = (k as u128).checked_mul(row[k])?.checked_add(row[k - 1])?;
        }
        row[0] = 0;
    }
    Some(row[j])
}

/// Stirling numbers of the second kind `S(n, j)`, saturating at `u128::MAX`.
pub fn stirling2(n: usize, j: usize) -> u128 {
    checked_stirling2(n, j).unwrap_or(u128::MAX)
}

/// `|P_{n,E}| = sum_j d^j S(n, j)`, or `None` past `u128`.
pub fn checked_partition_count(n: usize, d: usize) -> Option<u128> {
    (1..=n).try_fold(0u128, |acc, j| {
        let term = (d as u128).checked_pow(j as u32)?.checked_mul(checked_stirling2(n, j)?)?;
        acc.checked_add(term)
    })
}

/// `|P_{n,E}|`, saturating at `u128::MAX`.
pub fn partition_count(n: usize, d: usize) -> u128 {
    checked_partition_count(n, d).unwrap_or(u128::MAX)
}

/// Dobinski-type series `e^{-d} sum_{j>=0} d^j j^n / j!`, truncated once the
/// terms stop contributing.
pub fn partition_count_series(n: usize, d: usize) -> f64 {
    let d = d as f64;
    let mut sum = 0.0;
    let mut log_fact = 0.0;
    for j in 0..400usize {
        if j > 0 {
            log_fact += (j as f64).ln();
        }
        let term = if j == 0 {
            if n == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (j as f64 * d.ln() + n as f64 * (j as f64).ln() - log_fact - d).exp()
        };
        sum += term;
        if j as f64 > 2.0 * d + n as f64 && term < 1e-18 * sum {
            break;
        }
    }
    sum
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
        let pivot = i - 1;
        let swap = (pivot + 1..n).rev().find(|&k| cur[k] > cur[pivot]).unwrap();
        cur.swap(pivot, swap);
        cur[pivot + 1..].reverse();
    }
    out
}
