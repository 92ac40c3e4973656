//! Finite tables `p: T -> [0,1]` and the three M-EPPF axioms up to a depth.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use super::universe::structural_tensors;
use crate::ancestral::phi_or_zero;
use crate::error::{invalid, Error, Result};
use crate::model::CanningsModel;
use crate::rational::Rational;
use crate::report::LawReport;
use crate::tensor::{MergeTensor, SlotSymmetry};

#[derive(Clone, Debug)]
pub struct PpfTable {
    d: usize,
    depth: usize,
    /// Optional domain bound `i_l <= N_l`; children outside it are not required.
    sizes: Option<Vec<usize>>,
    values: HashMap<MergeTensor, Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeppfAxiom {
    Normalization,
    Symmetry,
    Consistency,
}

impl fmt::Display for MeppfAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeppfAxiom::Normalization => "normalization",
            MeppfAxiom::Symmetry => "symmetry",
            MeppfAxiom::Consistency => "consistency",
        })
    }
}

#[derive(Clone, Debug)]
pub struct MeppfOutcome {
    /// Combined report over all three axioms.
    pub report: LawReport,
    pub per_axiom: Vec<(MeppfAxiom, LawReport)>,
    /// First failing axiom in the order normalization, symmetry, consistency.
    pub first_failure: Option<MeppfAxiom>,
}

impl PpfTable {
    pub fn new(d: usize, depth: usize, values: HashMap<MergeTensor, Rational>) -> Result<Self> {
        if d == 0 {
            return invalid("table needs d >= 1");
        }
        for (t, v) in &values {
            if t.d() != d {
                return invalid(format!("key {t} has d = {}, table has d = {d}", t.d()));
            }
            if t.total() > depth {
                return invalid(format!("key {t} is deeper than the declared depth {depth}"));
            }
            if *v < Rational::zero() || *v > Rational::one() {
                return invalid(format!("value {v} at {t} is outside [0, 1]"));
            }
        }
        Ok(Self {
            d,
            depth,
            sizes: None,
            values,
        })
    }

    /// Restricts the required domain to `i_l <= sizes[l]`.
    pub fn with_domain(mut self, sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() != self.d {
            return invalid(format!("domain bound has {} entries, expected {}", sizes.len(), self.d));
        }
        self.sizes = Some(sizes);
        Ok(self)
    }

    /// `Phi` of the model on every structural tensor with at most `depth`
    /// lineages inside the model's domain.
    pub fn from_model(model: &CanningsModel, depth: usize) -> Result<Self> {
        let mut values = HashMap::new();
        for total in 0..=depth {
            for t in structural_tensors(model.d(), total) {
                if (0..model.d()).any(|l| t.lineage_count(l) > model.size(l)) {
                    continue;
                }
                let v = phi_or_zero(model, &t)?;
                values.insert(t, v);
            }
        }
        Self::new(model.d(), depth, values)?.with_domain(model.sizes().to_vec())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn domain(&self) -> Option<&[usize]> {
        self.sizes.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, t: &MergeTensor) -> Option<&Rational> {
        self.values.get(t)
    }

    pub fn set(&mut self, t: MergeTensor, v: Rational) {
        self.values.insert(t, v);
    }

    /// Keys in a deterministic order.
    pub fn keys(&self) -> Vec<&MergeTensor> {
        let mut keys: Vec<_> = self.values.keys().collect();
        keys.sort();
        keys
    }

    fn within(&self, t: &MergeTensor) -> bool {
        match &self.sizes {
            None => true,
            Some(s) => (0..self.d).all(|l| t.lineage_count(l) <= s[l]),
        }
    }
}

/// Checks normalization, symmetry under independent permutations of the
/// vectors `t_{k,l}`, and the consistency recursion at every node with fewer
/// than `depth` lineages.
pub fn check_meppf(table: &PpfTable) -> Result<MeppfOutcome> {
    check_meppf_with(table, SlotSymmetry::PerEntry)
}

pub fn check_meppf_with(table: &PpfTable, sym: SlotSymmetry) -> Result<MeppfOutcome> {
    let d = table.d;
    let root = MergeTensor::empty(d);
    let root_value = table
        .get(&root)
        .ok_or_else(|| Error::IncompleteTable(vec![root.to_string()]))?;

    let mut missing = Vec::new();
    for t in table.keys() {
        if t.total() >= table.depth {
            continue;
        }
        for (_, child) in children(t)? {
            if table.within(&child) && table.get(&child).is_none() {
                missing.push(child.to_string());
            }
        }
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::IncompleteTable(missing));
    }

    let instance = format!("table with {} entries, depth {}", table.len(), table.depth);
    let mut norm = LawReport::new("normalization", instance.clone(), true);
    norm.record_exact(root_value - Rational::one(), || format!("p(T_0) = {root_value}"));

    let mut symm = LawReport::new("symmetry", instance.clone(), true);
    let mut reps: BTreeMap<MergeTensor, &MergeTensor> = BTreeMap::new();
    for t in table.keys() {
        let key = t.canonical(sym);
        match reps.get(&key) {
            None => {
                reps.insert(key, t);
            }
            Some(rep) => {
                let (a, b) = (&table.values[*rep], &table.values[t]);
                symm.record_exact(a - b, || format!("p({rep}) = {a} but p({t}) = {b}"));
            }
        }
    }

    let mut cons = LawReport::new("consistency", instance.clone(), true);
    for t in table.keys() {
        if t.total() >= table.depth {
            continue;
        }
        for l in 0..d {
            let kids: Vec<MergeTensor> = children(t)?
                .into_iter()
                .filter(|(ll, _)| *ll == l)
                .map(|(_, c)| c)
                .collect();
            if kids.iter().any(|c| !table.within(c)) {
                continue;
            }
            let rhs: Rational = kids.iter().map(|c| table.values[c].clone()).sum();
            let lhs = &table.values[t];
            cons.record_exact(lhs - &rhs, || {
                format!("p({t}) = {lhs} but the recursion over l = {} gives {rhs}", l + 1)
            });
        }
    }
    cons.certified_depth = Some(table.depth);

    let per_axiom = vec![
        (MeppfAxiom::Normalization, norm),
        (MeppfAxiom::Symmetry, symm),
        (MeppfAxiom::Consistency, cons),
    ];
    let first_failure = per_axiom.iter().find(|(_, r)| !r.passed()).map(|(a, _)| *a);
    let mut report = LawReport::new("m-eppf", instance, true);
    for (axiom, r) in &per_axiom {
        let mut r = r.clone();
        r.violations = r.violations.iter().map(|v| format!("{axiom}: {v}")).collect();
        report.absorb(r);
    }
    report.certified_depth = Some(table.depth);
    match first_failure {
        Some(a) => report.notice(format!("first failing axiom: {a}")),
        None => report.notice(format!("all axioms hold up to depth {}", table.depth)),
    }
    Ok(MeppfOutcome {
        report,
        per_axiom,
        first_failure,
    })
}

/// The tensors on the right of the recursion, tagged with their `l`.
fn children(t: &MergeTensor) -> Result<Vec<(usize, MergeTensor)>> {
    let d = t.d();
    let mut out = Vec::new();
    for l in 0..d {
        for k in 0..d {
            out.push((l, t.coalescence_extension(k, l)?));
            for s in 0..t.j()[k] {
                out.push((l, t.increment(k, l, s)?));
            }
        }
    }
    Ok(out)
}
