use std::collections::HashMap;

use num_traits::Zero;

use super::universe::{all_tensors, in_domain};
use crate::ancestral::{phi_or_zero, transition_matrix, TransitionMatrix};
use crate::error::{invalid, Result};
use crate::model::CanningsModel;
use crate::partition::permutations;
use crate::rational::{ratio, Rational};
use crate::report::LawReport;
use crate::tensor::{MergeTensor, SlotSymmetry};

/// `p_{pi,pi'} = p_{sigma(pi), sigma(pi')}` for every `sigma` in `S_n` and
/// every pair of states, followed by the exchangeability check.
pub fn check_permutation_symmetry(model: &CanningsModel, n: usize) -> Result<LawReport> {
    if n > 4 {
        return invalid(format!("permutation scan is limited to n <= 4, got {n}"));
    }
    let p = transition_matrix(model, n)?;
    let mut report = LawReport::new(
        "permutation-symmetry",
        format!("{} (n = {n})", model.describe()),
        true,
    );
    for sigma in permutations(n) {
        let image = permuted_indices(&p, &sigma)?;
        for a in 0..p.dim() {
            for b in 0..p.dim() {
                let lhs = p.entry(a, b);
                let rhs = p.entry(image[a], image[b]);
                report.record_exact(lhs - rhs, || {
                    format!(
                        "sigma = {:?}: p({}, {}) = {lhs} but p({}, {}) = {rhs}",
                        one_based(&sigma),
                        p.state(a),
                        p.state(b),
                        p.state(image[a]),
                        p.state(image[b])
                    )
                });
            }
        }
    }
    report.absorb(exchangeability_report(&p, n)?);
    Ok(report)
}

/// One step from the uniform law on each `S_n`-orbit of states must again be
/// constant on every orbit. Exact vector-matrix products.
pub fn check_exchangeability(model: &CanningsModel, n: usize) -> Result<LawReport> {
    let p = transition_matrix(model, n)?;
    exchangeability_report(&p, n)
}

fn exchangeability_report(p: &TransitionMatrix<Rational>, n: usize) -> Result<LawReport> {
    let mut report = LawReport::new("exchangeability", format!("one step at n = {n}"), true);
    let perms = permutations(n);
    let images = perms
        .iter()
        .map(|s| permuted_indices(p, s))
        .collect::<Result<Vec<_>>>()?;
    let mut orbit_of = vec![usize::MAX; p.dim()];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for a in 0..p.dim() {
        if orbit_of[a] != usize::MAX {
            continue;
        }
        let mut members: Vec<usize> = images.iter().map(|img| img[a]).collect();
        members.sort_unstable();
        members.dedup();
        for &b in &members {
            orbit_of[b] = orbits.len();
        }
        orbits.push(members);
    }
    for orbit in &orbits {
        if orbit.iter().any(|&a| !p.is_admissible(a)) {
            continue;
        }
        let w = ratio(1, orbit.len());
        let mut next = vec![Rational::zero(); p.dim()];
        for &a in orbit {
            for (b, v) in next.iter_mut().enumerate() {
                *v += &w * p.entry(a, b);
            }
        }
        for target in &orbits {
            let first = &next[target[0]];
            for &b in &target[1..] {
                report.record_exact(first - &next[b], || {
                    format!(
                        "from uniform on the orbit of {}: mass {} at {} but {} at {}",
                        p.state(orbit[0]),
                        first,
                        p.state(target[0]),
                        next[b],
                        p.state(b)
                    )
                });
            }
        }
    }
    report.notice(format!("{} orbits", orbits.len()));
    Ok(report)
}

fn permuted_indices(p: &TransitionMatrix<Rational>, sigma: &[usize]) -> Result<Vec<usize>> {
    p.states()
        .iter()
        .map(|pi| {
            let img = pi.apply_permutation(sigma)?;
            Ok(p.index_of(&img).expect("state space is closed under permutations"))
        })
        .collect()
}

fn one_based(sigma: &[usize]) -> Vec<usize> {
    sigma.iter().map(|s| s + 1).collect()
}

/// `Phi_j(T) = Phi_j(sigma(T))` for all in-domain tensors up to `depth`
/// lineages and slots, where `sigma` ranges over the chosen slot symmetry.
/// Values are computed without any symmetry-keyed cache.
pub fn check_moment_symmetry(model: &CanningsModel, depth: usize, sym: SlotSymmetry) -> Result<LawReport> {
    let d = model.d();
    if d.pow(2) * depth > 24 {
        return Err(crate::Error::CapExceeded(format!(
            "moment symmetry scan with d = {d}, depth = {depth} is too large (d^2 * depth <= 24)"
        )));
    }
    let label = match sym {
        SlotSymmetry::PerEntry => "per-entry",
        SlotSymmetry::PerRow => "per-row",
    };
    let mut report = LawReport::new(
        format!("moment-symmetry ({label})"),
        model.describe(),
        true,
    );
    let mut groups: HashMap<MergeTensor, (MergeTensor, Rational)> = HashMap::new();
    for t in all_tensors(d, depth, depth) {
        if !in_domain(model, &t) {
            continue;
        }
        let v = phi_or_zero(model, &t)?;
        match groups.get(&t.canonical(sym)) {
            None => {
                groups.insert(t.canonical(sym), (t, v));
            }
            Some((rep, w)) => {
                report.record_exact(&v - w, || format!("Phi({t}) = {v} but Phi({rep}) = {w}"));
            }
        }
    }
    report.certified_depth = Some(depth);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::LabeledPartition;

    fn wf() -> CanningsModel {
        CanningsModel::wright_fisher(vec![4, 6], vec![vec![3, 2], vec![1, 4]]).unwrap()
    }

    #[test]
    fn transposition_maps_mixed_states() {
        let p = transition_matrix(&wf(), 2).unwrap();
        let pi4 = LabeledPartition::parse("1:1|2:2", 2).unwrap();
        let pi5 = LabeledPartition::parse("1:2|2:1", 2).unwrap();
        let a = p.index_of(&pi4).unwrap();
        let img = permuted_indices(&p, &[1, 0]).unwrap();
        assert_eq!(p.state(img[a]), &pi5);
        for b in 0..p.dim() {
            assert_eq!(p.entry(a, b), p.entry(img[a], img[b]));
        }
    }

    #[test]
    fn both_laws_symmetric() {
        assert!(check_permutation_symmetry(&wf(), 3).unwrap().passed());
        let mu = CanningsModel::mutation(vec![2, 3], vec![vec![1, 1], vec![1, 2]]).unwrap();
        assert!(check_permutation_symmetry(&mu, 3).unwrap().passed());
    }

    #[test]
    fn slot_symmetries() {
        assert!(check_moment_symmetry(&wf(), 3, SlotSymmetry::PerEntry).unwrap().passed());
        let mu = CanningsModel::mutation(vec![2, 3], vec![vec![1, 1], vec![1, 2]]).unwrap();
        assert!(check_moment_symmetry(&mu, 3, SlotSymmetry::PerRow).unwrap().passed());
        // independent permutations change which slots collide
        assert!(!check_moment_symmetry(&mu, 3, SlotSymmetry::PerEntry).unwrap().passed());
    }
}
