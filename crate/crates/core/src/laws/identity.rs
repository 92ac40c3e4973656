use num_traits::{One, Zero};

use crate::ancestral::transition_matrix;
use crate::error::{invalid, Result};
use crate::model::CanningsModel;
use crate::rational::{abs_diff, int, ratio, to_f64, Rational};
use crate::report::LawReport;
use crate::tensor::MergeTensor;

/// One model of a sequence, as seen by the identity-limit check.
#[derive(Clone, Debug)]
pub struct IdentityLimitPoint {
    pub n_min: usize,
    /// `max_k max(|1 - E(nu_{k,k,1})|, |1 - E(nu_{k,k,1} nu_{k,k,2})|)`.
    pub criterion: Rational,
    /// `max |P_N - I|` over admissible rows.
    pub off_identity: Rational,
    /// `max_{k,l} |(N_k/N_l)^2 E(nu_{k,l,1} nu_{k,l,2}) - delta_{k,l}|`.
    pub side: Rational,
}

pub fn identity_limit_profile(models: &[CanningsModel], n: usize) -> Result<Vec<IdentityLimitPoint>> {
    models.iter().map(|m| point(m, n)).collect()
}

fn point(model: &CanningsModel, n: usize) -> Result<IdentityLimitPoint> {
    let d = model.d();
    let mut criterion = Rational::zero();
    let mut side = Rational::zero();
    for k in 0..d {
        for l in 0..d {
            let first = model.exact_factorial_moment(&single(d, k, l))?;
            let second = if model.size(k) >= 2 {
                model.exact_factorial_moment(&pair(d, k, l))?
            } else {
                Rational::zero()
            };
            if k == l {
                criterion = criterion.max(abs_diff(&first, &Rational::one()));
                criterion = criterion.max(abs_diff(&second, &Rational::one()));
            }
            let scale = ratio(model.size(k), model.size(l));
            let delta = if k == l { Rational::one() } else { Rational::zero() };
            side = side.max(abs_diff(&(&scale * &scale * second), &delta));
        }
    }
    let p = transition_matrix(model, n)?;
    let mut off_identity = Rational::zero();
    for a in 0..p.dim() {
        if !p.is_admissible(a) {
            continue;
        }
        for b in 0..p.dim() {
            let target = if a == b { int(1) } else { int(0) };
            off_identity = off_identity.max(abs_diff(p.entry(a, b), &target));
        }
    }
    Ok(IdentityLimitPoint {
        n_min: model.n_min(),
        criterion,
        off_identity,
        side,
    })
}

/// `t` with one `k`-parent receiving one `l`-child.
fn single(d: usize, k: usize, l: usize) -> MergeTensor {
    let mut j = vec![0; d];
    j[k] = 1;
    let mut grid = vec![vec![vec![0; 0]; d]; d];
    for (kk, row) in grid.iter_mut().enumerate() {
        for (ll, v) in row.iter_mut().enumerate() {
            *v = vec![usize::from(kk == k && ll == l); j[kk]];
        }
    }
    MergeTensor::new(j, grid).expect("shape")
}

/// Two distinct `k`-parents with one `l`-child each.
fn pair(d: usize, k: usize, l: usize) -> MergeTensor {
    let mut j = vec![0; d];
    j[k] = 2;
    let mut grid = vec![vec![vec![0; 0]; d]; d];
    for (kk, row) in grid.iter_mut().enumerate() {
        for (ll, v) in row.iter_mut().enumerate() {
            *v = vec![usize::from(kk == k && ll == l); j[kk]];
        }
    }
    MergeTensor::new(j, grid).expect("shape")
}

/// Finite evidence that a sequence tends to zero: it is already zero at the
/// end, or it strictly decreases at every step (zeros excepted) and its last
/// value is at most half of its first.
fn tends_to_zero(values: &[Rational]) -> bool {
    let last = values.last().expect("non-empty");
    if last.is_zero() {
        return true;
    }
    let steps = values.windows(2).all(|w| w[1] < w[0]);
    steps && last * int(2) <= values[0]
}

/// Compares the two sides of the identity criterion along a sequence of
/// models of growing size: the moment criterion tends to zero iff `P_N`
/// approaches the identity. When it does, also checks that
/// `(N_k/N_l)^2 E(nu_{k,l,1} nu_{k,l,2})` approaches `delta_{k,l}`.
pub fn check_identity_limit(models: &[CanningsModel], n: usize) -> Result<LawReport> {
    if models.len() < 2 {
        return invalid(format!("identity limit needs at least 2 models, got {}", models.len()));
    }
    if n < 2 {
        return invalid("identity limit needs n >= 2");
    }
    let d = models[0].d();
    if models.iter().any(|m| m.d() != d) {
        return invalid("all models of the sequence must share d");
    }
    let profile = identity_limit_profile(models, n)?;
    let descr = profile
        .iter()
        .map(|p| p.n_min.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    let mut report = LawReport::new(
        "identity-limit",
        format!("{} models, N_min = {descr}, n = {n}", models.len()),
        false,
    );
    let crit: Vec<Rational> = profile.iter().map(|p| p.criterion.clone()).collect();
    let off: Vec<Rational> = profile.iter().map(|p| p.off_identity.clone()).collect();
    let side: Vec<Rational> = profile.iter().map(|p| p.side.clone()).collect();
    let crit_ok = tends_to_zero(&crit);
    let off_ok = tends_to_zero(&off);
    let fmt = |v: &[Rational]| v.iter().map(|x| format!("{:.3e}", to_f64(x))).collect::<Vec<_>>().join(", ");
    report.notice(format!("criterion: {}", fmt(&crit)));
    report.notice(format!("max |P_N - I|: {}", fmt(&off)));
    report.notice(format!(
        "moment criterion {} zero, matrix {} the identity",
        if crit_ok { "tends to" } else { "does not tend to" },
        if off_ok { "tends to" } else { "stays away from" }
    ));
    report.record_flag(crit_ok == off_ok, || {
        format!("moment criterion trend ({crit_ok}) disagrees with matrix trend ({off_ok})")
    });
    if crit_ok {
        report.notice(format!("side conclusion residual: {}", fmt(&side)));
        report.record_flag(tends_to_zero(&side), || {
            format!("(N_k/N_l)^2 E(nu nu) does not approach delta: {}", fmt(&side))
        });
    }
    report.worst_residual = crate::report::Residual::Float(to_f64(off.last().expect("non-empty")));
    Ok(report)
}
