use std::collections::BTreeMap;

use crate::ancestral::kahan_sum;
use crate::error::{invalid, Error, Result};
use crate::partition::{enumerate_partitions, LabeledPartition};
use crate::tensor::{MergeTensor, SlotSymmetry};

/// Limit rates `phi_j(T)` for `T != 1_j`, keyed by the row-symmetric
/// representative of `T`. The deficits `phi_j(1_j)` are stored separately
/// when known and otherwise derived from row sums.
#[derive(Clone, Debug)]
pub struct RateTable {
    d: usize,
    rates: BTreeMap<MergeTensor, f64>,
    deficits: BTreeMap<Vec<usize>, f64>,
    fallback: Fallback,
}

/// Value of rates that are not listed explicitly.
#[derive(Clone, Debug, PartialEq)]
pub enum Fallback {
    /// Missing rates are an error.
    None,
    Constant(f64),
    /// Zero off the diagonal, missing on unlisted diagonal tensors: the rate
    /// functions are concentrated on diagonal tensors.
    DiagonalSupport,
    /// Multi-type Kingman closed form: `a_k` when exactly one pair of
    /// `k`-blocks merges into a `k`-block and every other block stays as it
    /// is, zero for every other non-identity tensor.
    Kingman(Vec<f64>),
}

impl RateTable {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            rates: BTreeMap::new(),
            deficits: BTreeMap::new(),
            fallback: Fallback::None,
        }
    }

    pub fn with_fallback(mut self, fallback: Fallback) -> Self {
        self.fallback = fallback;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn fallback(&self) -> &Fallback {
        &self.fallback
    }

    pub fn insert(&mut self, t: &MergeTensor, value: f64) -> Result<()> {
        if t.d() != self.d {
            return invalid(format!("tensor has d = {}, table has d = {}", t.d(), self.d));
        }
        if t.is_identity() {
            self.deficits.insert(t.j().to_vec(), value);
        } else {
            self.rates.insert(t.canonical(SlotSymmetry::PerRow), value);
        }
        Ok(())
    }

    /// Stored or fallback value; identities only if their deficit is stored.
    pub fn get(&self, t: &MergeTensor) -> Option<f64> {
        if t.is_identity() {
            if let Some(v) = self.deficits.get(t.j()) {
                return Some(*v);
            }
            return match &self.fallback {
                Fallback::Kingman(a) => Some(
                    -(0..self.d)
                        .map(|k| a[k] * (t.j()[k] * t.j()[k].saturating_sub(1)) as f64 / 2.0)
                        .sum::<f64>(),
                ),
                _ => None,
            };
        }
        if let Some(v) = self.rates.get(&t.canonical(SlotSymmetry::PerRow)) {
            return Some(*v);
        }
        match &self.fallback {
            Fallback::None => None,
            Fallback::Constant(v) => Some(*v),
            Fallback::DiagonalSupport => (!t.is_diagonal()).then_some(0.0),
            Fallback::Kingman(a) => Some(kingman_value(a, t)),
        }
    }

    /// Off-identity rate, or an incomplete-table error naming `t`.
    pub fn rate(&self, t: &MergeTensor) -> Result<f64> {
        if t.is_identity() {
            return invalid(format!("{t} is the identity; use deficit()"));
        }
        self.get(t)
            .ok_or_else(|| Error::IncompleteTable(vec![t.to_string()]))
    }

    /// Number of explicitly stored off-identity rates.
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty() && self.deficits.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MergeTensor, f64)> {
        self.rates.iter().map(|(t, v)| (t, *v))
    }

    pub fn deficits(&self) -> impl Iterator<Item = (&Vec<usize>, f64)> {
        self.deficits.iter().map(|(j, v)| (j, *v))
    }

    /// `phi_j(1_j)`: the stored value, or minus the total rate out of a
    /// state with block counts `j`.
    pub fn deficit(&self, j: &[usize]) -> Result<f64> {
        if j.len() != self.d {
            return invalid(format!("j has {} components, expected {}", j.len(), self.d));
        }
        if let Some(v) = self.deficits.get(j) {
            return Ok(*v);
        }
        let n: usize = j.iter().sum();
        if n == 0 {
            return Ok(0.0);
        }
        let labels: Vec<usize> = (0..self.d).flat_map(|k| std::iter::repeat_n(k, j[k])).collect();
        let pi = LabeledPartition::singletons(self.d, &labels)?;
        let mut out = Vec::new();
        for target in enumerate_partitions(n, self.d)? {
            if target == pi {
                continue;
            }
            if let Some(t) = pi.merge_structure(&target)? {
                out.push(self.rate(&t)?);
            }
        }
        Ok(-kahan_sum(out.into_iter()))
    }
}

fn kingman_value(a: &[f64], t: &MergeTensor) -> f64 {
    if !t.is_diagonal() {
        return 0.0;
    }
    let mut pair = None;
    for k in 0..t.d() {
        for &i in t.get(k, k) {
            match i {
                1 => {}
                2 if pair.is_none() => pair = Some(k),
                _ => return 0.0,
            }
        }
    }
    pair.map_or(0.0, |k| a[k])
}

/// Binary same-type mergers at rate `a_k`: `phi_{e_k}(2) = a_k` and every
/// other rate on tensors with entries `>= 2` is zero. Rates on tensors with
/// unmerged blocks follow from consistency and are served in closed form.
pub fn kingman_rates(a: &[f64]) -> Result<RateTable> {
    if a.is_empty() {
        return invalid("Kingman weights need at least one type");
    }
    if let Some(k) = a.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return invalid(format!("Kingman weight a_{} = {} must be finite and >= 0", k + 1, a[k]));
    }
    let d = a.len();
    let mut table = RateTable::new(d).with_fallback(Fallback::Kingman(a.to_vec()));
    for (k, &ak) in a.iter().enumerate() {
        table.insert(&MergeTensor::pair_coalescence_tensor(k, k, k, d)?, ak)?;
    }
    Ok(table)
}

/// `phi_1(2) = sum_k phi_{e_k}(2_k)`: the total rate at which a given pair
/// of same-type lineages merges, summed over types.
pub fn total_binary_rate(table: &RateTable) -> Result<f64> {
    let d = table.d();
    (0..d)
        .map(|k| table.rate(&MergeTensor::pair_coalescence_tensor(k, k, k, d)?))
        .sum()
}
