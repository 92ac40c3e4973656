use std::collections::HashMap;

use num_traits::Zero;

use crate::ancestral::transition_matrix;
use crate::error::{invalid, Result};
use crate::model::CanningsModel;
use crate::rational::Rational;
use crate::report::LawReport;

/// Exact lumpability of the `n`-sample chain onto the `m`-sample chain under
/// restriction to `[m]`. For every admissible `pi` and every `tau'` the mass
/// `sum_{pi': r_m(pi') = tau'} p_{pi,pi'}` must equal `p_{r_m(pi), tau'}`,
/// which covers the "independent of the choice of pi" clause as well.
pub fn check_natural_coupling(model: &CanningsModel, n: usize, m: usize) -> Result<LawReport> {
    if m == 0 || m > n {
        return invalid(format!("need 1 <= m <= n, got n = {n}, m = {m}"));
    }
    let big = transition_matrix(model, n)?;
    let small = transition_matrix(model, m)?;
    let mut report = LawReport::new(
        "natural-coupling",
        format!("{} (n = {n}, m = {m})", model.describe()),
        true,
    );
    let restricted: Vec<usize> = big
        .states()
        .iter()
        .map(|pi| {
            let tau = pi.restrict(m)?;
            Ok(small.index_of(&tau).expect("restriction lies in the small state space"))
        })
        .collect::<Result<_>>()?;
    let mut reference_row: HashMap<usize, usize> = HashMap::new();
    for a in 0..big.dim() {
        if !big.is_admissible(a) {
            continue;
        }
        let tau = restricted[a];
        reference_row.entry(tau).or_insert(a);
        let mut lumped = vec![Rational::zero(); small.dim()];
        for b in 0..big.dim() {
            lumped[restricted[b]] += big.entry(a, b);
        }
        for (tb, v) in lumped.iter().enumerate() {
            let expect = small.entry(tau, tb);
            report.record_exact(v - expect, || {
                format!(
                    "from {}: restricted mass to {} is {v}, the {m}-sample chain gives {expect}",
                    big.state(a),
                    small.state(tb)
                )
            });
        }
    }
    report.notice(format!(
        "{} of {} restricted states have an admissible preimage",
        reference_row.len(),
        small.dim()
    ));
    Ok(report)
}
