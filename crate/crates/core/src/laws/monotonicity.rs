use num_traits::Zero;

use super::universe::{all_tensors, in_domain};
use super::PhiCache;
use crate::error::{invalid, Result};
use crate::model::CanningsModel;
use crate::rational::Rational;
use crate::report::LawReport;
use crate::tensor::MergeTensor;

/// `Phi_{j'}(T') <= Phi_j(T)` for every comparable pair `T <= T'` among the
/// in-domain tensors with at most `n_max` slots and `n_max` lineages, where
/// the slots of `T'` beyond `j` are nonempty.
///
/// Without that proviso the inequality is false: an empty slot contributes
/// the factor `N_k` and nothing else, so `Phi_{e_k}` of an empty slot is `N_k`.
pub fn check_monotonicity(model: &CanningsModel, n_max: usize) -> Result<LawReport> {
    if n_max == 0 {
        return invalid("depth must be at least 1");
    }
    let d = model.d();
    if d.pow(2) * n_max > 24 {
        return Err(crate::Error::CapExceeded(format!(
            "monotonicity scan with d = {d}, depth = {n_max} is too large (d^2 * depth <= 24)"
        )));
    }
    let mut cache = PhiCache::new(model);
    let tensors: Vec<_> = all_tensors(d, n_max, n_max)
        .into_iter()
        .filter(|t| in_domain(model, t))
        .collect();
    let values = tensors
        .iter()
        .map(|t| cache.get(t))
        .collect::<Result<Vec<Rational>>>()?;
    let mut report = LawReport::new("monotonicity", model.describe(), true);
    for (a, t) in tensors.iter().enumerate() {
        for (b, u) in tensors.iter().enumerate() {
            if !t.tensor_leq(u)? || !extra_slots_nonempty(t, u) {
                continue;
            }
            let excess = &values[b] - &values[a];
            let excess = if excess > Rational::zero() { excess } else { Rational::zero() };
            report.record_exact(excess, || {
                format!("{t} <= {u} but Phi rises from {} to {}", values[a], values[b])
            });
        }
    }
    report.certified_depth = Some(n_max);
    Ok(report)
}

fn extra_slots_nonempty(t: &MergeTensor, u: &MergeTensor) -> bool {
    (0..t.d()).all(|k| (t.j()[k]..u.j()[k]).all(|s| u.slot_total(k, s) > 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ancestral::phi;

    #[test]
    fn wf_and_mutation_are_monotone() {
        let wf = CanningsModel::wright_fisher(vec![4, 6], vec![vec![3, 2], vec![1, 4]]).unwrap();
        let r = check_monotonicity(&wf, 3).unwrap();
        assert!(r.passed(), "{r}");
        let mu = CanningsModel::mutation(vec![2, 3], vec![vec![1, 1], vec![1, 2]]).unwrap();
        assert!(check_monotonicity(&mu, 3).unwrap().passed());
    }

    #[test]
    fn empty_slot_is_not_a_probability() {
        let wf = CanningsModel::wright_fisher(vec![4, 6], vec![vec![3, 2], vec![1, 4]]).unwrap();
        let empty = MergeTensor::new(vec![0, 1], vec![vec![vec![], vec![]], vec![vec![0], vec![0]]]).unwrap();
        assert_eq!(phi(&wf, &empty).unwrap(), crate::rational::int(6));
    }

    #[test]
    fn ones_dominate_twos() {
        let wf = CanningsModel::wright_fisher(vec![4, 6], vec![vec![3, 2], vec![1, 4]]).unwrap();
        for j in [[1, 0], [0, 1], [1, 1], [2, 0]] {
            let one = phi(&wf, &MergeTensor::identity(2, &j)).unwrap();
            let two = phi(&wf, &MergeTensor::twos(2, &j)).unwrap();
            assert!(two <= one);
        }
    }
}
