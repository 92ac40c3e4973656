//! Merge tensors `T = (t_{k,l})` and the derived tensors used by the
//! consistency recursion.
//!
//! The grid is stored densely: `entries[k * d + l]` is the vector
//! `(i_{k,l,s})_s` of length `j_k`. Slot indices `s` are 0-based in memory.

use std::fmt;

use serde_json::{json, Map, Value};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MergeTensor {
    d: usize,
    j: Vec<usize>,
    entries: Vec<Vec<usize>>,
}

/// Which permutations of slot indices a symmetry comparison allows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotSymmetry {
    /// Independent permutations of every vector `t_{k,l}`.
    PerEntry,
    /// One permutation per row `k`, applied jointly to all `t_{k,l}`.
    PerRow,
}

impl MergeTensor {
    pub(crate) fn from_parts(d: usize, j: Vec<usize>, entries: Vec<Vec<usize>>) -> Self {
        debug_assert_eq!(j.len(), d);
        debug_assert_eq!(entries.len(), d * d);
        debug_assert!(entries
            .iter()
            .enumerate()
            .all(|(idx, v)| v.len() == j[idx / d]));
        Self { d, j, entries }
    }

    /// Validated constructor; `entries[k][l]` holds `t_{k,l}`.
    pub fn new(j: Vec<usize>, entries: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let d = j.len();
        if d == 0 {
            return invalid("tensor needs at least one type");
        }
        if entries.len() != d || entries.iter().any(|row| row.len() != d) {
            return invalid(format!("tensor grid must be {d} x {d}"));
        }
        let mut flat = Vec::with_capacity(d * d);
        for (k, row) in entries.into_iter().enumerate() {
            for (l, v) in row.into_iter().enumerate() {
                if v.len() != j[k] {
                    return invalid(format!(
                        "t_({},{}) has length {}, expected j_{} = {}",
                        k + 1,
                        l + 1,
                        v.len(),
                        k + 1,
                        j[k]
                    ));
                }
                flat.push(v);
            }
        }
        Ok(Self::from_parts(d, j, flat))
    }

    /// `T_0`: `j = 0` and every entry the empty vector.
    pub fn empty(d: usize) -> Self {
        Self::from_parts(d, vec![0; d], vec![Vec::new(); d * d])
    }

    /// Diagonal tensor with `t_{k,k} = diag[k]`.
    pub fn diagonal(diag: Vec<Vec<usize>>) -> Self {
        let d = diag.len();
        let j: Vec<usize> = diag.iter().map(Vec::len).collect();
        let mut entries = vec![Vec::new(); d * d];
        for k in 0..d {
            for l in 0..d {
                entries[k * d + l] = if k == l {
                    diag[k].clone()
                } else {
                    vec![0; j[k]]
                };
            }
        }
        Self::from_parts(d, j, entries)
    }

    /// `1_j`.
    pub fn identity(d: usize, j: &[usize]) -> Self {
        assert_eq!(j.len(), d, "j must have d components");
        Self::diagonal(j.iter().map(|&m| vec![1; m]).collect())
    }

    /// `2_j`.
    pub fn twos(d: usize, j: &[usize]) -> Self {
        assert_eq!(j.len(), d, "j must have d components");
        Self::diagonal(j.iter().map(|&m| vec![2; m]).collect())
    }

    /// Tensor for a pair of lineages of types `l1`, `l2` merging into one
    /// parent of type `k`.
    pub fn pair_coalescence_tensor(k: usize, l1: usize, l2: usize, d: usize) -> Result<Self> {
        if k >= d || l1 >= d || l2 >= d {
            return invalid(format!("types ({k}, {l1}, {l2}) out of range for d = {d}"));
        }
        let mut t = Self::empty(d).coalescence_extension(k, l1)?;
        t = t.increment(k, l2, 0)?;
        Ok(t)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn j(&self) -> &[usize] {
        &self.j
    }

    /// `t_{k,l}`.
    pub fn get(&self, k: usize, l: usize) -> &[usize] {
        &self.entries[k * self.d + l]
    }

    /// `i_l = sum_k sum_s i_{k,l,s}`.
    pub fn lineage_count(&self, l: usize) -> usize {
        (0..self.d).map(|k| self.group_total(k, l)).sum()
    }

    pub fn lineage_counts(&self) -> Vec<usize> {
        (0..self.d).map(|l| self.lineage_count(l)).collect()
    }

    /// `i_{k,l} = sum_s i_{k,l,s}`.
    pub fn group_total(&self, k: usize, l: usize) -> usize {
        self.get(k, l).iter().sum()
    }

    /// Number of lineages merging into slot `(k, s)`.
    pub fn slot_total(&self, k: usize, s: usize) -> usize {
        (0..self.d).map(|l| self.get(k, l)[s]).sum()
    }

    /// `sum_l i_l`.
    pub fn total(&self) -> usize {
        self.entries.iter().flatten().sum()
    }

    pub fn num_slots(&self) -> usize {
        self.j.iter().sum()
    }

    pub fn has_empty_slot(&self) -> bool {
        (0..self.d).any(|k| (0..self.j[k]).any(|s| self.slot_total(k, s) == 0))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.d).all(|k| {
            (0..self.d)
                .filter(|&l| l != k)
                .all(|l| self.get(k, l).iter().all(|&v| v == 0))
        })
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.d, &self.j)
    }

    /// Diagonal entries `t_{k,k}` for each `k`.
    pub fn diagonal_entries(&self) -> Vec<Vec<usize>> {
        (0..self.d).map(|k| self.get(k, k).to_vec()).collect()
    }

    fn check_type(&self, t: usize) -> Result<()> {
        if t >= self.d {
            return invalid(format!("type {} out of range for d = {}", t + 1, self.d));
        }
        Ok(())
    }

    /// `T(k,l)`: a new `k`-slot receiving one `l`-lineage.
    pub fn coalescence_extension(&self, k: usize, l: usize) -> Result<Self> {
        self.check_type(k)?;
        self.check_type(l)?;
        let mut out = self.clone();
        out.j[k] += 1;
        for lp in 0..self.d {
            out.entries[k * self.d + lp].push(usize::from(lp == l));
        }
        Ok(out)
    }

    /// `T(k,l,s)`: the entry `i_{k,l,s}` raised by one.
    pub fn increment(&self, k: usize, l: usize, s: usize) -> Result<Self> {
        self.check_type(k)?;
        self.check_type(l)?;
        if s >= self.j[k] {
            return invalid(format!(
                "slot {} out of range, j_{} = {}",
                s + 1,
                k + 1,
                self.j[k]
            ));
        }
        let mut out = self.clone();
        out.entries[k * self.d + l][s] += 1;
        Ok(out)
    }

    /// The inverse of `coalescence_extension`: drops the last `k`-slot.
    pub fn drop_last_slot(&self, k: usize) -> Option<Self> {
        if k >= self.d || self.j[k] == 0 {
            return None;
        }
        let mut out = self.clone();
        out.j[k] -= 1;
        for l in 0..self.d {
            out.entries[k * self.d + l].pop();
        }
        Some(out)
    }

    /// `T <= T'`: `j <= j'` and `i_{k,l,s} <= i'_{k,l,s}` on the common
    /// index range.
    pub fn tensor_leq(&self, other: &MergeTensor) -> Result<bool> {
        if self.d != other.d {
            return invalid("tensors have different type counts");
        }
        if self.j.iter().zip(&other.j).any(|(a, b)| a > b) {
            return Ok(false);
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x <= y)))
    }

    /// `sigma(T)` for a single vector `t_{k,l}`; `sigma[s]` is the source
    /// slot placed at position `s`.
    pub fn permute_entry(&self, k: usize, l: usize, sigma: &[usize]) -> Result<Self> {
        self.check_type(k)?;
        self.check_type(l)?;
        check_bijection(sigma, self.j[k])?;
        let mut out = self.clone();
        let src = self.get(k, l);
        out.entries[k * self.d + l] = sigma.iter().map(|&s| src[s]).collect();
        Ok(out)
    }

    /// The same slot permutation applied to every vector of row `k`.
    pub fn permute_slots(&self, k: usize, sigma: &[usize]) -> Result<Self> {
        self.check_type(k)?;
        check_bijection(sigma, self.j[k])?;
        let mut out = self.clone();
        for l in 0..self.d {
            let src = self.get(k, l);
            out.entries[k * self.d + l] = sigma.iter().map(|&s| src[s]).collect();
        }
        Ok(out)
    }

    /// Representative of the orbit under the given symmetry group; two
    /// tensors are equivalent iff their representatives coincide.
    pub fn canonical(&self, sym: SlotSymmetry) -> Self {
        let d = self.d;
        let mut out = self.clone();
        match sym {
            SlotSymmetry::PerEntry => {
                for v in &mut out.entries {
                    v.sort_unstable_by(|a, b| b.cmp(a));
                }
            }
            SlotSymmetry::PerRow => {
                for k in 0..d {
                    let mut cols: Vec<Vec<usize>> = (0..self.j[k])
                        .map(|s| (0..d).map(|l| self.get(k, l)[s]).collect())
                        .collect();
                    cols.sort_unstable_by(|a, b| b.cmp(a));
                    for l in 0..d {
                        out.entries[k * d + l] = cols.iter().map(|c| c[l]).collect();
                    }
                }
            }
        }
        out
    }

    pub fn equivalent(&self, other: &MergeTensor, sym: SlotSymmetry) -> bool {
        self.d == other.d && self.j == other.j && self.canonical(sym) == other.canonical(sym)
    }

    /// JSON form with 1-based keys: `{"j":[..],"entries":{"1,1":[..],..}}`.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for k in 0..self.d {
            for l in 0..self.d {
                map.insert(format!("{},{}", k + 1, l + 1), json!(self.get(k, l)));
            }
        }
        json!({ "j": self.j, "entries": map })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let j: Vec<usize> = serde_json::from_value(
            v.get("j")
                .cloned()
                .ok_or_else(|| Error::Parse("tensor: missing field 'j'".into()))?,
        )
        .map_err(|e| Error::Parse(format!("tensor field 'j': {e}")))?;
        let d = j.len();
        let obj = v
            .get("entries")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("tensor: missing object 'entries'".into()))?;
        let mut grid = vec![vec![Vec::new(); d]; d];
        for (k, row) in grid.iter_mut().enumerate() {
            for (l, cell) in row.iter_mut().enumerate() {
                let key = format!("{},{}", k + 1, l + 1);
                *cell = match obj.get(&key) {
                    Some(val) => serde_json::from_value(val.clone())
                        .map_err(|e| Error::Parse(format!("tensor entry '{key}': {e}")))?,
                    None if j[k] == 0 => Vec::new(),
                    None => return Err(Error::Parse(format!("tensor: missing entry '{key}'"))),
                };
            }
        }
        for key in obj.keys() {
            let ok = key
                .split_once(',')
                .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
                .is_some_and(|(a, b)| (1..=d).contains(&a) && (1..=d).contains(&b));
            if !ok {
                return Err(Error::Parse(format!("tensor: unexpected entry key '{key}'")));
            }
        }
        Self::new(j, grid)
    }
}

fn check_bijection(sigma: &[usize], m: usize) -> Result<()> {
    if sigma.len() != m {
        return invalid(format!("slot permutation has length {}, expected {m}", sigma.len()));
    }
    let mut hit = vec![false; m];
    for &s in sigma {
        if s >= m || hit[s] {
            return invalid("slot permutation is not a bijection");
        }
        hit[s] = true;
    }
    Ok(())
}

/// Compact text form, 1-based: `j=(1,0) [1,1:(2) 1,2:(0)]`; rows with
/// `j_k = 0` are omitted.
impl fmt::Display for MergeTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j: Vec<String> = self.j.iter().map(|v| v.to_string()).collect();
        write!(f, "j=({}) [", j.join(","))?;
        let mut first = true;
        for k in 0..self.d {
            if self.j[k] == 0 {
                continue;
            }
            for l in 0..self.d {
                if !first {
                    write!(f, " ")?;
                }
                first = false;
                let v: Vec<String> = self.get(k, l).iter().map(|x| x.to_string()).collect();
                write!(f, "{},{}:({})", k + 1, l + 1, v.join(","))?;
            }
        }
        write!(f, "]")
    }
}

/// Tensors with `j_k` slots in row `k`, every slot nonempty, and lineage
/// counts `i_l`.
pub fn tensors_with_margins(i: &[usize], j: &[usize]) -> Vec<MergeTensor> {
    let d = i.len();
    let slots: Vec<usize> = (0..d).flat_map(|k| std::iter::repeat_n(k, j[k])).collect();
    let mut out = Vec::new();
    let mut assign: Vec<Vec<usize>> = Vec::with_capacity(slots.len());
    let mut remaining = i.to_vec();
    fill_slots(&slots, 0, &mut remaining, &mut assign, &mut out, j, d);
    out
}

fn fill_slots(
    slots: &[usize],
    pos: usize,
    remaining: &mut Vec<usize>,
    assign: &mut Vec<Vec<usize>>,
    out: &mut Vec<MergeTensor>,
    j: &[usize],
    d: usize,
) {
    if pos == slots.len() {
        if remaining.iter().all(|&r| r == 0) {
            let mut grid = vec![vec![Vec::new(); d]; d];
            for (slot, v) in slots.iter().zip(assign.iter()) {
                for l in 0..d {
                    grid[*slot][l].push(v[l]);
                }
            }
            out.push(MergeTensor::new(j.to_vec(), grid).expect("consistent shape"));
        }
        return;
    }
    // every remaining slot needs at least one lineage
    let left: usize = remaining.iter().sum();
    if left < slots.len() - pos {
        return;
    }
    let mut v = vec![0; d];
    loop {
        // odometer over vectors 0 <= v <= remaining
        let mut q = 0;
        loop {
            if q == d {
                return;
            }
            if v[q] < remaining[q] {
                v[q] += 1;
                for w in v.iter_mut().take(q) {
                    *w = 0;
                }
                break;
            }
            q += 1;
        }
        for l in 0..d {
            remaining[l] -= v[l];
        }
        assign.push(v.clone());
        fill_slots(slots, pos + 1, remaining, assign, out, j, d);
        assign.pop();
        for l in 0..d {
            remaining[l] += v[l];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extension_of_empty_tensor() {
        let t = MergeTensor::empty(2).coalescence_extension(1, 0).unwrap();
        assert_eq!(t.j(), &[0, 1]);
        assert_eq!(t.get(1, 0), &[1]);
        assert_eq!(t.get(1, 1), &[0]);
        assert!(t.get(0, 0).is_empty());
    }

    #[test]
    fn extension_of_identity_is_identity() {
        let one = MergeTensor::identity(3, &[1, 0, 2]);
        let ext = one.coalescence_extension(1, 1).unwrap();
        assert_eq!(ext, MergeTensor::identity(3, &[1, 1, 2]));
    }

    #[test]
    fn extension_into_other_row() {
        let t = MergeTensor::new(vec![1, 0], vec![vec![vec![2], vec![0]], vec![vec![], vec![]]])
            .unwrap();
        let ext = t.coalescence_extension(1, 0).unwrap();
        assert_eq!(ext.j(), &[1, 1]);
        assert_eq!(ext.get(0, 0), &[2]);
        assert_eq!(ext.get(1, 0), &[1]);
        assert_eq!(ext.get(1, 1), &[0]);
        assert!(t.coalescence_extension(2, 0).is_err());
    }

    #[test]
    fn increment_examples() {
        let t = MergeTensor::identity(2, &[1, 0]);
        assert_eq!(t.increment(0, 0, 0).unwrap().get(0, 0), &[2]);
        let t = MergeTensor::identity(2, &[2, 0]);
        assert_eq!(t.increment(0, 0, 1).unwrap().get(0, 0), &[1, 2]);
        let off = MergeTensor::identity(2, &[1, 1]).increment(0, 1, 0).unwrap();
        assert!(!off.is_diagonal());
        assert!(t.increment(0, 0, 2).is_err());
    }

    #[test]
    fn order_examples() {
        let one = MergeTensor::identity(2, &[2, 1]);
        let two = MergeTensor::twos(2, &[2, 1]);
        assert!(one.tensor_leq(&one).unwrap());
        assert!(one.tensor_leq(&two).unwrap());
        assert!(!two.tensor_leq(&one).unwrap());
        let three = MergeTensor::diagonal(vec![vec![3]]);
        let two = MergeTensor::diagonal(vec![vec![2]]);
        assert!(!three.tensor_leq(&two).unwrap());
        assert!(MergeTensor::empty(1).tensor_leq(&two).unwrap());
        assert!(two.tensor_leq(&MergeTensor::empty(2)).is_err());
    }

    #[test]
    fn pair_tensors() {
        let same = MergeTensor::pair_coalescence_tensor(1, 0, 0, 2).unwrap();
        assert_eq!(same.j(), &[0, 1]);
        assert_eq!(same.get(1, 0), &[2]);
        assert_eq!(same.get(1, 1), &[0]);
        let mixed = MergeTensor::pair_coalescence_tensor(0, 0, 2, 3).unwrap();
        assert_eq!(mixed.get(0, 0), &[1]);
        assert_eq!(mixed.get(0, 1), &[0]);
        assert_eq!(mixed.get(0, 2), &[1]);
        assert_eq!(
            MergeTensor::pair_coalescence_tensor(0, 0, 0, 1).unwrap(),
            MergeTensor::diagonal(vec![vec![2]])
        );
    }

    #[test]
    fn symmetry_representatives() {
        let t = MergeTensor::new(
            vec![2, 0],
            vec![vec![vec![1, 0], vec![0, 1]], vec![vec![], vec![]]],
        )
        .unwrap();
        let swapped = t.permute_entry(0, 1, &[1, 0]).unwrap();
        assert!(t.equivalent(&swapped, SlotSymmetry::PerEntry));
        assert!(!t.equivalent(&swapped, SlotSymmetry::PerRow));
        let joint = t.permute_slots(0, &[1, 0]).unwrap();
        assert!(t.equivalent(&joint, SlotSymmetry::PerRow));
    }

    #[test]
    fn json_roundtrip() {
        let t = MergeTensor::pair_coalescence_tensor(0, 0, 1, 2).unwrap();
        let v = t.to_json();
        assert_eq!(v["entries"]["1,2"], json!([1]));
        assert_eq!(MergeTensor::from_json(&v).unwrap(), t);
        let bad = json!({"j": [1], "entries": {"1,1": [1, 2]}});
        assert!(MergeTensor::from_json(&bad).is_err());
    }

    #[test]
    fn display_form() {
        let t = MergeTensor::pair_coalescence_tensor(0, 0, 0, 2).unwrap();
        assert_eq!(t.to_string(), "j=(1,0) [1,1:(2) 1,2:(0)]");
    }
}
