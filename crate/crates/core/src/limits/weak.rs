//! The weak-mutation Wright-Fisher family and its Kingman calibration.

use num_traits::Zero;

use crate::ancestral::coalescence_probability;
use crate::error::{invalid, Result};
use crate::model::CanningsModel;
use crate::rational::{int, to_f64, Rational};

/// `N = (m, 2m)` with `s = floor(sqrt(m))` migrants each way:
/// `N_{1,1} = m - s`, `N_{2,2} = 2m - s`, `N_{1,2} = N_{2,1} = s`. With
/// `c_N = 1/N_min` the calibration limit is `a = (1, 1/2)`.
pub fn weak_mutation_family(m: usize) -> Result<CanningsModel> {
    if m < 2 {
        return invalid(format!("weak-mutation family needs m >= 2, got {m}"));
    }
    let s = m.isqrt();
    CanningsModel::wright_fisher(vec![m, 2 * m], vec![vec![m - s, s], vec![s, 2 * m - s]])
}

#[derive(Clone, Debug)]
pub struct WeakMutationPoint {
    pub n_min: usize,
    /// `N_min c_{k,l}` for all `k, l`.
    pub scaled: Vec<Vec<Rational>>,
    /// `max_{k,l} |N_min c_{k,l} - a_k delta_{k,l}|`.
    pub residual: f64,
}

pub fn weak_mutation_residual(model: &CanningsModel, a: &[f64]) -> Result<WeakMutationPoint> {
    let d = model.d();
    if a.len() != d {
        return invalid(format!("a has {} entries, model has d = {d}", a.len()));
    }
    let n_min = model.n_min();
    let mut scaled = vec![vec![Rational::zero(); d]; d];
    let mut residual: f64 = 0.0;
    for k in 0..d {
        for l in 0..d {
            let v = coalescence_probability(model, k, l, l)? * int(n_min);
            let target = if k == l { a[k] } else { 0.0 };
            residual = residual.max((to_f64(&v) - target).abs());
            scaled[k][l] = v;
        }
    }
    Ok(WeakMutationPoint {
        n_min,
        scaled,
        residual,
    })
}
