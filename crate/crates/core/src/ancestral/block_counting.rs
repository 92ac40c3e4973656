//! The block counting process `Y_r = (#k-blocks of A_r)_k`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{admissible, TransitionMatrix};
use crate::error::{invalid, Result};
use crate::model::CanningsModel;
use crate::partition::EnumerationCap;
use crate::rational::{binomial, factorial, Rational};
use crate::report::LawReport;
use crate::tensor::tensors_with_margins;

/// Transition matrix over block-count vectors.
#[derive(Clone, Debug)]
pub struct BlockCountingMatrix {
    pub states: Vec<Vec<usize>>,
    pub entries: Vec<Vec<Rational>>,
    pub inadmissible: Vec<usize>,
}

impl BlockCountingMatrix {
    pub fn index_of(&self, i: &[usize]) -> Option<usize> {
        self.states.iter().position(|s| s == i)
    }

    pub fn entry(&self, i: &[usize], j: &[usize]) -> Option<&Rational> {
        Some(&self.entries[self.index_of(i)?][self.index_of(j)?])
    }

    pub fn to_csv(&self) -> String {
        let fmt = |s: &[usize]| format!("\"({})\"", s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
        let mut out = String::from("state");
        for s in &self.states {
            out.push(',');
            out.push_str(&fmt(s));
        }
        out.push('\n');
        for (s, row) in self.states.iter().zip(&self.entries) {
            out.push_str(&fmt(s));
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// All `i` in `N_0^d` with `sum i <= n`, by ascending total then
/// lexicographically.
pub fn block_count_states(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=n {
        let mut cur = vec![0; d];
        compositions(total, 0, &mut cur, &mut out);
    }
    out
}

fn compositions(rest: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == cur.len() {
        cur[pos] = rest;
        out.push(cur.clone());
        return;
    }
    for v in 0..=rest {
        cur[pos] = v;
        compositions(rest - v, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// `p_{i,j} = prod_k C(N_k, j_k) / prod_l C(N_l, i_l) * sum E(prod C(nu_{k,l,s}, i_{k,l,s}))`,
/// the sum running over all tensors with row counts `j`, column totals `i`
/// and no empty slot.
pub fn block_counting_matrix(model: &CanningsModel, n: usize) -> Result<BlockCountingMatrix> {
    let d = model.d();
    let total: usize = model.sizes().iter().sum();
    if n == 0 || n > total {
        return invalid(format!("sample size {n} outside 1..={total}"));
    }
    EnumerationCap::default().check(n, d)?;
    let states = block_count_states(n, d);
    let mut entries = vec![vec![Rational::zero(); states.len()]; states.len()];
    let mut inadmissible = Vec::new();
    for (a, i) in states.iter().enumerate() {
        if !admissible(model, i) {
            inadmissible.push(a);
            continue;
        }
        let mut den = BigInt::one();
        for l in 0..d {
            den *= binomial(model.size(l), i[l]);
        }
        for (b, j) in states.iter().enumerate() {
            let slots: usize = j.iter().sum();
            let lineages: usize = i.iter().sum();
            if slots > lineages || (slots == 0) != (lineages == 0) {
                continue;
            }
            if (0..d).any(|k| j[k] > model.size(k)) {
                continue;
            }
            let mut num = BigInt::one();
            for k in 0..d {
                num *= binomial(model.size(k), j[k]);
            }
            let mut sum = Rational::zero();
            for t in tensors_with_margins(i, j) {
                let moment = model.exact_factorial_moment(&t)?;
                if moment.is_zero() {
                    continue;
                }
                let mut fact = BigInt::one();
                for k in 0..d {
                    for l in 0..d {
                        for &v in t.get(k, l) {
                            fact *= factorial(v);
                        }
                    }
                }
                sum += moment / Rational::from_integer(fact);
            }
            entries[a][b] = Rational::new(num.clone(), den.clone()) * sum;
        }
    }
    Ok(BlockCountingMatrix {
        states,
        entries,
        inadmissible,
    })
}

/// Sums the partition-level matrix over target classes with equal block
/// counts and compares every lumped row with the row of `reference` for the
/// source's block counts. Zero residual means the partition chain lumps
/// exactly onto the block counting chain.
pub fn lump_by_block_counts(
    p: &TransitionMatrix<Rational>,
    reference: &BlockCountingMatrix,
) -> LawReport {
    let mut report = LawReport::new("block-counting-lumping", "lumped transition matrix", true);
    let index: HashMap<Vec<usize>, usize> = reference
        .states
        .iter()
        .enumerate()
        .map(|(a, s)| (s.clone(), a))
        .collect();
    for (a, pi) in p.states().iter().enumerate() {
        if !p.is_admissible(a) {
            continue;
        }
        let i = pi.block_counts();
        let ia = index[&i];
        let mut lumped = vec![Rational::zero(); reference.states.len()];
        for (b, target) in p.states().iter().enumerate() {
            lumped[index[&target.block_counts()]] += p.entry(a, b);
        }
        for (jb, v) in lumped.iter().enumerate() {
            let expect = &reference.entries[ia][jb];
            report.record_exact(v - expect, || {
                format!(
                    "from {pi}: lumped mass to {:?} is {v}, block counting gives {expect}",
                    reference.states[jb]
                )
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn state_space_includes_zero() {
        let s = block_count_states(2, 2);
        assert_eq!(s[0], vec![0, 0]);
        assert_eq!(s.len(), 6);
    }

    #[test]
    fn pair_merge_is_coalescence_probability() {
        let m = CanningsModel::wright_fisher(vec![4, 6], vec![vec![3, 2], vec![1, 4]]).unwrap();
        let bc = block_counting_matrix(&m, 2).unwrap();
        assert_eq!(bc.entry(&[2, 0], &[1, 0]).unwrap(), &ratio(1, 8));
        let single = CanningsModel::wright_fisher(vec![5], vec![vec![5]]).unwrap();
        let bc = block_counting_matrix(&single, 2).unwrap();
        assert_eq!(bc.entry(&[2], &[1]).unwrap(), &ratio(1, 5));
    }

    #[test]
    fn rows_are_stochastic() {
        let m = CanningsModel::mutation(vec![2, 3], vec![vec![1, 1], vec![1, 2]]).unwrap();
        let bc = block_counting_matrix(&m, 3).unwrap();
        for (a, row) in bc.entries.iter().enumerate() {
            if bc.inadmissible.contains(&a) {
                continue;
            }
            assert!(row.iter().sum::<Rational>().is_one(), "row {:?}", bc.states[a]);
        }
    }
}
