use num_traits::Zero;

use crate::ancestral::coalescence_probability;
use crate::error::{domain, Result};
use crate::model::CanningsModel;
use crate::rational::{to_f64, Rational};

/// The supremum over all `d^3` coalescence probabilities.
#[derive(Clone, Debug)]
pub struct StandardScaling {
    pub c_n: Rational,
    /// `(k, l1, l2)` attaining the maximum, 0-based; `None` when all vanish.
    pub argmax: Option<(usize, usize, usize)>,
}

impl StandardScaling {
    pub fn value(&self) -> f64 {
        to_f64(&self.c_n)
    }

    /// `false` when every coalescence probability is zero, as for the
    /// Mutation law, so that no continuous-time limit can use this scaling.
    pub fn usable(&self) -> bool {
        !self.c_n.is_zero()
    }
}

pub fn standard_scaling(model: &CanningsModel) -> Result<StandardScaling> {
    let d = model.d();
    if let Some(l) = (0..d).find(|&l| model.size(l) < 2) {
        return domain(format!("standard scaling needs every N_l > 1, N_{} = {}", l + 1, model.size(l)));
    }
    let mut best = Rational::zero();
    let mut argmax = None;
    for k in 0..d {
        for l1 in 0..d {
            for l2 in l1..d {
                let c = coalescence_probability(model, k, l1, l2)?;
                if c > best {
                    best = c;
                    argmax = Some((k, l1, l2));
                }
            }
        }
    }
    Ok(StandardScaling { c_n: best, argmax })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn wf_instance() {
        let wf = CanningsModel::wright_fisher(vec![4, 6], vec![vec![3, 2], vec![1, 4]]).unwrap();
        let s = standard_scaling(&wf).unwrap();
        assert_eq!(s.c_n, ratio(1, 8));
        assert_eq!(s.argmax, Some((0, 0, 0)));
    }

    #[test]
    fn mutation_is_unusable() {
        let mu = CanningsModel::mutation(vec![4, 5, 7], vec![vec![1, 2, 1], vec![1, 0, 4], vec![2, 3, 2]]).unwrap();
        let s = standard_scaling(&mu).unwrap();
        assert!(s.c_n.is_zero());
        assert!(!s.usable());
    }

    #[test]
    fn single_type() {
        let wf = CanningsModel::wright_fisher(vec![5], vec![vec![5]]).unwrap();
        assert_eq!(standard_scaling(&wf).unwrap().c_n, ratio(1, 5));
        let tiny = CanningsModel::wright_fisher(vec![1, 3], vec![vec![1, 0], vec![0, 3]]).unwrap();
        assert!(standard_scaling(&tiny).is_err());
    }
}
