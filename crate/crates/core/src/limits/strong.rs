//! Discrete-time limits: the label-only limit chain and the first-order
//! expansion of the strong-mutation Wright-Fisher model.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::ancestral::{transition_matrix, Provenance, TransitionMatrix};
use crate::error::{invalid, Result};
use crate::model::CanningsModel;
use crate::partition::{enumerate_partitions, LabeledPartition};
use crate::rational::{binomial, int, ratio, to_f64, Rational};

/// `a_{pi,pi'} = prod_{k,l} rho_{k,l}^{i_{k,l}}` when `pi` and `pi'` have the
/// same unlabeled blocks, where `i_{k,l}` counts `l`-blocks of `pi` that are
/// `k`-blocks of `pi'`; zero otherwise. Columns of `rho` must sum to one.
pub fn discrete_limit_matrix_exact(rho: &[Vec<Rational>], n: usize) -> Result<TransitionMatrix<Rational>> {
    let d = rho.len();
    validate_rho(d, rho.iter().map(|r| r.len()).collect())?;
    for (k, row) in rho.iter().enumerate() {
        if let Some(l) = row.iter().position(|v| v.is_negative()) {
            return invalid(format!("rho_({},{}) = {} is negative", k + 1, l + 1, row[l]));
        }
    }
    for l in 0..d {
        let col: Rational = (0..d).map(|k| rho[k][l].clone()).sum();
        if !col.is_one() {
            return invalid(format!("column {} of rho sums to {col}, not 1", l + 1));
        }
    }
    let states = enumerate_partitions(n, d)?;
    let mut entries = vec![vec![Rational::zero(); states.len()]; states.len()];
    for (a, pi) in states.iter().enumerate() {
        for (b, target) in states.iter().enumerate() {
            if let Some(counts) = relabel_counts(pi, target)? {
                let mut v = Rational::one();
                for k in 0..d {
                    for l in 0..d {
                        v *= num_traits::pow(rho[k][l].clone(), counts[k][l]);
                    }
                }
                entries[a][b] = v;
            }
        }
    }
    Ok(TransitionMatrix::new(
        states,
        entries,
        Provenance::Limit {
            description: "discrete-time label limit".into(),
        },
        Vec::new(),
    ))
}

/// Floating-point variant; column sums must be 1 within `1e-12`.
pub fn discrete_limit_matrix(rho: &[Vec<f64>], n: usize) -> Result<TransitionMatrix<f64>> {
    let d = rho.len();
    validate_rho(d, rho.iter().map(|r| r.len()).collect())?;
    for (k, row) in rho.iter().enumerate() {
        if let Some(l) = row.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return invalid(format!("rho_({},{}) = {} must be finite and >= 0", k + 1, l + 1, row[l]));
        }
    }
    for l in 0..d {
        let col: f64 = (0..d).map(|k| rho[k][l]).sum();
        if (col - 1.0).abs() > 1e-12 {
            return invalid(format!("column {} of rho sums to {col}, not 1", l + 1));
        }
    }
    let states = enumerate_partitions(n, d)?;
    let mut entries = vec![vec![0.0; states.len()]; states.len()];
    for (a, pi) in states.iter().enumerate() {
        for (b, target) in states.iter().enumerate() {
            if let Some(counts) = relabel_counts(pi, target)? {
                let mut v = 1.0;
                for k in 0..d {
                    for l in 0..d {
                        v *= rho[k][l].powi(counts[k][l] as i32);
                    }
                }
                entries[a][b] = v;
            }
        }
    }
    Ok(TransitionMatrix::new(
        states,
        entries,
        Provenance::Limit {
            description: "discrete-time label limit".into(),
        },
        Vec::new(),
    ))
}

fn validate_rho(d: usize, widths: Vec<usize>) -> Result<()> {
    if d == 0 {
        return invalid("rho must be a nonempty square matrix");
    }
    if let Some(k) = widths.iter().position(|&w| w != d) {
        return invalid(format!("rho row {} has {} entries, expected {d}", k + 1, widths[k]));
    }
    Ok(())
}

/// `i_{k,l}` for transitions that only relabel blocks.
fn relabel_counts(pi: &LabeledPartition, target: &LabeledPartition) -> Result<Option<Vec<Vec<usize>>>> {
    if pi.num_blocks() != target.num_blocks() {
        return Ok(None);
    }
    let Some(t) = pi.merge_structure(target)? else {
        return Ok(None);
    };
    let d = pi.d();
    Ok(Some(
        (0..d).map(|k| (0..d).map(|l| t.group_total(k, l)).collect()).collect(),
    ))
}

/// Wright-Fisher with `N_{k,l} = M` for all types, so `N_k = dM`.
pub fn strong_mutation_model(m: usize, d: usize) -> Result<CanningsModel> {
    if m == 0 || d == 0 {
        return invalid(format!("strong mutation needs M >= 1 and d >= 1, got M = {m}, d = {d}"));
    }
    CanningsModel::wright_fisher(vec![d * m; d], vec![vec![m; d]; d])
}

/// The limit `A`: `d^{-|pi|}` for equal unlabeled blocks, else 0.
pub fn strong_mutation_limit(n: usize, d: usize) -> Result<TransitionMatrix<Rational>> {
    let rho = vec![vec![ratio(1, d); d]; d];
    discrete_limit_matrix_exact(&rho, n)
}

/// The correction `B`: `d^{-|pi|} kappa(pi,pi')` for equal unlabeled blocks,
/// `d^{-|pi|}` when `pi'` arises from `pi` by one binary merger, else 0, with
/// `kappa = sum_l C(i_l,2) - sum_k C(j_k,2) - d sum_{k,l} C(i_{k,l},2)`.
pub fn strong_mutation_correction(n: usize, d: usize) -> Result<TransitionMatrix<Rational>> {
    let states = enumerate_partitions(n, d)?;
    let mut entries = vec![vec![Rational::zero(); states.len()]; states.len()];
    for (a, pi) in states.iter().enumerate() {
        let weight = Rational::new(BigInt::one(), num_traits::pow(BigInt::from(d), pi.num_blocks()));
        for (b, target) in states.iter().enumerate() {
            let Some(t) = pi.merge_structure(target)? else {
                continue;
            };
            if pi.num_blocks() == target.num_blocks() {
                let mut kappa = BigInt::zero();
                for l in 0..d {
                    kappa += binomial(t.lineage_count(l), 2);
                    kappa -= binomial(t.j()[l], 2);
                    for k in 0..d {
                        kappa -= BigInt::from(d) * binomial(t.group_total(k, l), 2);
                    }
                }
                entries[a][b] = &weight * Rational::from_integer(kappa);
            } else if target.num_blocks() + 1 == pi.num_blocks() {
                entries[a][b] = weight.clone();
            }
        }
    }
    Ok(TransitionMatrix::new(
        states,
        entries,
        Provenance::Limit {
            description: "strong-mutation first-order correction".into(),
        },
        Vec::new(),
    ))
}

#[derive(Clone, Debug)]
pub struct StrongMutationExpansion {
    pub m: usize,
    pub p: TransitionMatrix<Rational>,
    pub a: TransitionMatrix<Rational>,
    pub b: TransitionMatrix<Rational>,
    /// `c_N = 1 / (dM)`.
    pub c_n: Rational,
    /// `max |P_N - A - c_N B|`.
    pub residual: Rational,
}

impl StrongMutationExpansion {
    pub fn residual_f64(&self) -> f64 {
        to_f64(&self.residual)
    }
}

pub fn strong_mutation_expansion(m: usize, n: usize, d: usize) -> Result<StrongMutationExpansion> {
    let model = strong_mutation_model(m, d)?;
    let p = transition_matrix(&model, n)?;
    let a = strong_mutation_limit(n, d)?;
    let b = strong_mutation_correction(n, d)?;
    let c_n = Rational::one() / int(d * m);
    let mut residual = Rational::zero();
    for r in 0..p.dim() {
        for c in 0..p.dim() {
            let diff = (p.entry(r, c) - a.entry(r, c) - &c_n * b.entry(r, c)).abs();
            if diff > residual {
                residual = diff;
            }
        }
    }
    Ok(StrongMutationExpansion {
        m,
        p,
        a,
        b,
        c_n,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(m: &TransitionMatrix<Rational>, s: &str) -> usize {
        m.index_of(&LabeledPartition::parse(s, 2).unwrap()).unwrap()
    }

    #[test]
    fn limit_blocks() {
        let a = strong_mutation_limit(2, 2).unwrap();
        assert!(a.is_stochastic());
        assert_eq!(a.entry(idx(&a, "1,2:1"), idx(&a, "1,2:2")), &ratio(1, 2));
        assert_eq!(a.entry(idx(&a, "1:1|2:2"), idx(&a, "1:2|2:2")), &ratio(1, 4));
        assert!(a.entry(idx(&a, "1:1|2:2"), idx(&a, "1,2:1")).is_zero());
    }

    #[test]
    fn correction_entries() {
        let b = strong_mutation_correction(2, 2).unwrap();
        let pi3 = idx(&b, "1:1|2:1");
        let pi4 = idx(&b, "1:1|2:2");
        let pi1 = idx(&b, "1,2:1");
        assert_eq!(b.entry(pi3, pi3), &-ratio(1, 2));
        assert_eq!(b.entry(pi4, pi1), &ratio(1, 4));
        // rows of B sum to zero
        for r in 0..b.dim() {
            assert!(b.row_sum(r).is_zero());
        }
    }

    #[test]
    fn finite_entry_at_m3() {
        let e = strong_mutation_expansion(3, 2, 2).unwrap();
        assert_eq!(e.p.entry(idx(&e.p, "1:1|2:1"), idx(&e.p, "1,2:1")), &ratio(1, 30));
    }

    #[test]
    fn identity_rho_freezes_labels() {
        let rho = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let a = discrete_limit_matrix(&rho, 2).unwrap();
        for r in 0..a.dim() {
            for c in 0..a.dim() {
                assert_eq!(*a.entry(r, c), if r == c { 1.0 } else { 0.0 });
            }
        }
        assert!(discrete_limit_matrix(&[vec![0.5, 0.5], vec![0.4, 0.5]], 2).is_err());
    }

}
