//! Backward (ancestral) machinery at finite population size.

mod block_counting;
mod matrix;
mod simulate;

pub use block_counting::{block_count_states, block_counting_matrix, lump_by_block_counts, BlockCountingMatrix};
pub(crate) use matrix::kahan_sum;
pub use matrix::{Provenance, TransitionMatrix};
pub use simulate::{mc_transition_estimate, simulate_ancestry, AncestryTrajectory, McEstimate, Simulator};

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{domain, invalid, Result};
use crate::model::CanningsModel;
use crate::partition::{enumerate_partitions_with_cap, EnumerationCap};
use crate::rational::{falling, Rational};
use crate::tensor::{MergeTensor, SlotSymmetry};

/// `Phi_j(T) = prod_k (N_k)_{j_k} / prod_l (N_l)_{i_l} * E(prod (nu_{k,l,s})_{i_{k,l,s}})`.
pub fn phi(model: &CanningsModel, t: &MergeTensor) -> Result<Rational> {
    if t.d() != model.d() {
        return invalid(format!("tensor has d = {}, model has d = {}", t.d(), model.d()));
    }
    for l in 0..model.d() {
        let i = t.lineage_count(l);
        if i > model.size(l) {
            return domain(format!(
                "i_{} = {} exceeds N_{} = {}",
                l + 1,
                i,
                l + 1,
                model.size(l)
            ));
        }
    }
    let moment = model.exact_factorial_moment(t)?;
    Ok(prefactor(model, t) * moment)
}

fn prefactor(model: &CanningsModel, t: &MergeTensor) -> Rational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for k in 0..model.d() {
        num *= falling(model.size(k), t.j()[k]);
        den *= falling(model.size(k), t.lineage_count(k));
    }
    Rational::new(num, den)
}

/// `Phi` extended by zero to tensors with `j_k > N_k`, where the prefactor
/// `(N_k)_{j_k}` vanishes.
pub fn phi_or_zero(model: &CanningsModel, t: &MergeTensor) -> Result<Rational> {
    if (0..model.d()).any(|k| t.j()[k] > model.size(k)) {
        return Ok(Rational::zero());
    }
    phi(model, t)
}

/// Coalescence probability `c_{k,l}` (if `l1 == l2 == l`) or `c_{k,l1,l2}`.
pub fn coalescence_probability(model: &CanningsModel, k: usize, l1: usize, l2: usize) -> Result<Rational> {
    let t = MergeTensor::pair_coalescence_tensor(k, l1, l2, model.d())?;
    if l1 == l2 && model.size(l1) < 2 {
        return domain(format!("c_({},{}) needs N_{} > 1", k + 1, l1 + 1, l1 + 1));
    }
    phi(model, &t)
}

/// Whether a state with these block counts lies inside the domain of the
/// model (`i_l <= N_l` for every type).
pub(crate) fn admissible(model: &CanningsModel, counts: &[usize]) -> bool {
    counts.iter().zip(model.sizes()).all(|(i, n)| i <= n)
}

/// Exact transition matrix of the ancestral process on `P_{n,E}`.
pub fn transition_matrix(model: &CanningsModel, n: usize) -> Result<TransitionMatrix<Rational>> {
    transition_matrix_with_cap(model, n, EnumerationCap::default())
}

pub fn transition_matrix_with_cap(
    model: &CanningsModel,
    n: usize,
    cap: EnumerationCap,
) -> Result<TransitionMatrix<Rational>> {
    let total: usize = model.sizes().iter().sum();
    if n == 0 || n > total {
        return invalid(format!("sample size {n} outside 1..={total}"));
    }
    let states = enumerate_partitions_with_cap(n, model.d(), cap)?;
    let rows: Vec<Result<Vec<Rational>>> = states
        .par_iter()
        .map(|pi| {
            let mut row = vec![Rational::zero(); states.len()];
            if !admissible(model, &pi.block_counts()) {
                return Ok(row);
            }
            let mut cache: HashMap<MergeTensor, Rational> = HashMap::new();
            for (b, target) in states.iter().enumerate() {
                if target.num_blocks() > pi.num_blocks() {
                    continue;
                }
                if let Some(t) = pi.merge_structure(target)? {
                    let key = t.canonical(SlotSymmetry::PerRow);
                    let v = match cache.get(&key) {
                        Some(v) => v.clone(),
                        None => {
                            let v = phi_or_zero(model, &t)?;
                            cache.insert(key, v.clone());
                            v
                        }
                    };
                    row[b] = v;
                }
            }
            Ok(row)
        })
        .collect();
    let entries = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let inadmissible = states
        .iter()
        .enumerate()
        .filter(|(_, s)| !admissible(model, &s.block_counts()))
        .map(|(a, _)| a)
        .collect();
    Ok(TransitionMatrix::new(states, entries, Provenance::Exact, inadmissible))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::LabeledPartition;
    use crate::rational::ratio;

    fn wf() -> CanningsModel {
        CanningsModel::wright_fisher(vec![4, 6], vec![vec![3, 2], vec![1, 4]]).unwrap()
    }

    #[test]
    fn phi_examples() {
        let m = wf();
        let t = MergeTensor::pair_coalescence_tensor(0, 0, 0, 2).unwrap();
        assert_eq!(phi(&m, &t).unwrap(), ratio(1, 8));
        let t = MergeTensor::pair_coalescence_tensor(1, 0, 0, 2).unwrap();
        assert!(phi(&m, &t).unwrap().is_zero());
        assert!(phi(&m, &MergeTensor::empty(2)).unwrap().is_one());
    }

    #[test]
    fn phi_rejects_too_many_lineages() {
        let m = wf();
        let t = MergeTensor::diagonal(vec![vec![5], vec![]]);
        assert!(matches!(phi(&m, &t), Err(crate::Error::DomainViolation(_))));
    }

    #[test]
    fn coalescence_examples() {
        let m = wf();
        assert_eq!(coalescence_probability(&m, 0, 0, 0).unwrap(), ratio(1, 8));
        assert_eq!(coalescence_probability(&m, 0, 0, 1).unwrap(), ratio(1, 16));
        let tiny = CanningsModel::wright_fisher(vec![1, 3], vec![vec![1, 1], vec![0, 2]]).unwrap();
        assert!(coalescence_probability(&tiny, 0, 0, 0).is_err());
    }

    #[test]
    fn single_type_merge_probability() {
        let m = CanningsModel::wright_fisher(vec![5], vec![vec![5]]).unwrap();
        let p = transition_matrix(&m, 2).unwrap();
        let from = p.index_of(&LabeledPartition::parse("1:1|2:1", 1).unwrap()).unwrap();
        let to = p.index_of(&LabeledPartition::parse("1,2:1", 1).unwrap()).unwrap();
        assert_eq!(p.entry(from, to), &ratio(1, 5));
    }

    #[test]
    fn mutation_one_lineage_rows() {
        let m = CanningsModel::mutation(
            vec![4, 5, 7],
            vec![vec![1, 2, 1], vec![1, 0, 4], vec![2, 3, 2]],
        )
        .unwrap();
        let p = transition_matrix(&m, 1).unwrap();
        assert_eq!(p.row(0), &[ratio(1, 4), ratio(1, 4), ratio(1, 2)]);
    }

    #[test]
    fn sample_size_bounds() {
        let m = CanningsModel::wright_fisher(vec![1], vec![vec![1]]).unwrap();
        assert!(transition_matrix(&m, 2).is_err());
        assert!(transition_matrix(&wf(), 9).is_err());
    }
}
