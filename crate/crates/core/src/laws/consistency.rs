use num_traits::{One, Zero};

use super::universe::{in_domain, random_tensors, structural_tensors};
use super::{PhiCache, RANDOM_PER_DEPTH, UNIVERSE_SEED};
use crate::error::{invalid, Result};
use crate::model::CanningsModel;
use crate::partition::EnumerationCap;
use crate::rational::Rational;
use crate::report::LawReport;
use crate::tensor::MergeTensor;

/// `Phi_j(T) = sum_k Phi_{j+e_k}(T(k,l)) + sum_k sum_s Phi_j(T(k,l,s))` for
/// every `l` with `i_l < N_l`, over all tensors with `sum_l i_l < n_max`
/// (structural ones plus pseudo-random abstract ones). The right-hand side
/// is also checked to be the same for every admissible `l`.
pub fn check_consistency(model: &CanningsModel, n_max: usize) -> Result<LawReport> {
    if n_max == 0 {
        return invalid("depth must be at least 1");
    }
    EnumerationCap::default().check(n_max, model.d())?;
    let d = model.d();
    let mut report = LawReport::new("consistency", model.describe(), true);
    let mut cache = PhiCache::new(model);
    let root = cache.get(&MergeTensor::empty(d))?;
    report.record_exact(&root - Rational::one(), || format!("Phi(T_0) = {root}, expected 1"));
    let mut ell_cases = 0usize;
    for total in 0..n_max {
        let mut tensors: Vec<MergeTensor> = structural_tensors(d, total)
            .into_iter()
            .filter(|t| in_domain(model, t))
            .collect();
        tensors.extend(random_tensors(model, total, RANDOM_PER_DEPTH, UNIVERSE_SEED));
        for t in &tensors {
            let lhs = cache.get(t)?;
            let mut first_rhs: Option<(usize, Rational)> = None;
            for l in 0..d {
                if t.lineage_count(l) >= model.size(l) {
                    continue;
                }
                let rhs = right_hand_side(&mut cache, t, l)?;
                ell_cases += 1;
                report.record_exact(&lhs - &rhs, || {
                    format!("{t}, l = {}: Phi = {lhs}, recursion gives {rhs}", l + 1)
                });
                match &first_rhs {
                    None => first_rhs = Some((l, rhs)),
                    Some((l0, r0)) => {
                        report.record_exact(r0 - &rhs, || {
                            format!(
                                "{t}: right-hand sides differ between l = {} ({r0}) and l = {} ({rhs})",
                                l0 + 1,
                                l + 1
                            )
                        });
                    }
                }
            }
        }
    }
    report.certified_depth = Some(n_max);
    report.notice(format!("{ell_cases} (tensor, l) recursion cases"));
    Ok(report)
}

pub(crate) fn right_hand_side(cache: &mut PhiCache<'_>, t: &MergeTensor, l: usize) -> Result<Rational> {
    let d = t.d();
    let mut rhs = Rational::zero();
    for k in 0..d {
        rhs += cache.get(&t.coalescence_extension(k, l)?)?;
        for s in 0..t.j()[k] {
            rhs += cache.get(&t.increment(k, l, s)?)?;
        }
    }
    Ok(rhs)
}
