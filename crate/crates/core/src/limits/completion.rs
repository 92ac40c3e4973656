//! Completing diagonal rate tables from their `>= 2` part by the
//! simplified consistency recursion, and checking the result.

use std::collections::BTreeMap;

use super::rates::{Fallback, RateTable};
use super::RATE_TOL;
use crate::error::{invalid, Error, Result};
use crate::report::LawReport;
use crate::tensor::MergeTensor;

/// Every positional diagonal tensor whose slots all hold at least
/// `min_entry >= 1` lineages and with at most `max_total` lineages, `T_0`
/// included.
pub fn diagonal_tensors(d: usize, max_total: usize, min_entry: usize) -> Vec<MergeTensor> {
    let min_entry = min_entry.max(1);
    let mut out = Vec::new();
    let mut rows = vec![Vec::new(); d];
    grow(0, max_total, min_entry, &mut rows, &mut out);
    out
}

fn grow(k: usize, budget: usize, min: usize, rows: &mut Vec<Vec<usize>>, out: &mut Vec<MergeTensor>) {
    if k == rows.len() {
        out.push(MergeTensor::diagonal(rows.clone()));
        return;
    }
    sequences(budget, min, &mut Vec::new(), &mut |seq, used| {
        rows[k] = seq.to_vec();
        grow(k + 1, budget - used, min, rows, out);
    });
    rows[k].clear();
}

/// Calls `f` on every sequence of entries `>= min` with sum `<= budget`.
fn sequences(budget: usize, min: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize], usize)) {
    let used: usize = cur.iter().sum();
    f(cur, used);
    for v in min..=budget.saturating_sub(used) {
        cur.push(v);
        sequences(budget, min, cur, f);
        cur.pop();
    }
}

fn ones(t: &MergeTensor) -> usize {
    (0..t.d()).map(|k| t.get(k, k).iter().filter(|&&v| v == 1).count()).sum()
}

/// Value of `phi` in a table that holds deficits for identities; `T_0` is 0.
fn value(table: &RateTable, t: &MergeTensor) -> Option<f64> {
    if t.num_slots() == 0 {
        return Some(0.0);
    }
    table.get(t)
}

/// Extends rates on diagonal tensors with entries `>= 2` to all diagonal
/// tensors with positive entries and at most `depth` lineages, including
/// the deficits `phi_j(1_j)`.
///
/// A tensor `U` with a one in row `l` is `T(l,l)` for the tensor `T`
/// obtained by removing that slot, so
/// `phi(U) = phi_{j-e_l}(T) - sum_s phi_{j-e_l}(T(l,l,s))`.
/// Every tensor on the right has fewer ones than `U`, so processing by the
/// number of ones, starting from the tensors without ones, determines the
/// table completely.
pub fn complete_rates_by_consistency(partial: &RateTable, depth: usize) -> Result<RateTable> {
    let d = partial.d();
    let mut by_ones: BTreeMap<usize, Vec<MergeTensor>> = BTreeMap::new();
    for t in diagonal_tensors(d, depth, 1) {
        if t.num_slots() == 0 || t != t.canonical(crate::tensor::SlotSymmetry::PerRow) {
            continue;
        }
        by_ones.entry(ones(&t)).or_default().push(t);
    }
    let mut out = RateTable::new(d).with_fallback(Fallback::DiagonalSupport);
    let mut missing = Vec::new();
    for t in by_ones.get(&0).into_iter().flatten() {
        match partial.get(t) {
            Some(v) => out.insert(t, v)?,
            None => missing.push(t.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteTable(missing));
    }
    for (_, layer) in by_ones.range(1..) {
        for u in layer {
            let l = (0..d).find(|&k| u.get(k, k).contains(&1)).expect("tensor has a one");
            let s0 = u.get(l, l).iter().position(|&v| v == 1).expect("row has a one");
            let jl = u.j()[l];
            let mut sigma: Vec<usize> = (0..jl).filter(|&s| s != s0).collect();
            sigma.push(s0);
            let t = u.permute_slots(l, &sigma)?.drop_last_slot(l).expect("slot exists");
            let mut v = value(&out, &t).ok_or_else(|| internal(&t))?;
            for s in 0..t.j()[l] {
                let ts = t.increment(l, l, s)?;
                v -= value(&out, &ts).ok_or_else(|| internal(&ts))?;
            }
            out.insert(u, v)?;
        }
    }
    Ok(out)
}

fn internal(t: &MergeTensor) -> Error {
    Error::IncompleteTable(vec![format!("{t} (needed during completion)")])
}

/// `phi_j(T) = phi_{j+e_l}(T(l,l)) + sum_s phi_j(T(l,l,s))` for every
/// diagonal `T` with fewer than `depth` lineages and every `l`.
pub fn check_consisdiag(table: &RateTable, depth: usize) -> Result<LawReport> {
    if depth == 0 {
        return invalid("depth must be at least 1");
    }
    let d = table.d();
    let mut report = LawReport::new("diagonal-consistency", format!("rate table, depth {depth}"), false);
    for t in diagonal_tensors(d, depth - 1, 1) {
        let lhs = value(table, &t).ok_or_else(|| Error::IncompleteTable(vec![t.to_string()]))?;
        for l in 0..d {
            let ext = t.coalescence_extension(l, l)?;
            let mut rhs = value(table, &ext).ok_or_else(|| Error::IncompleteTable(vec![ext.to_string()]))?;
            for s in 0..t.j()[l] {
                let inc = t.increment(l, l, s)?;
                rhs += value(table, &inc).ok_or_else(|| Error::IncompleteTable(vec![inc.to_string()]))?;
            }
            let scale = 1.0_f64.max(lhs.abs());
            report.record_float((lhs - rhs) / scale, RATE_TOL, || {
                format!("{t}, l = {}: phi = {lhs}, recursion gives {rhs}", l + 1)
            });
        }
    }
    report.certified_depth = Some(depth);
    Ok(report)
}

/// `0 <= phi_{j'}(T') <= phi_j(T)` for comparable non-identity diagonal
/// tensors, and `phi_{j'}(1_{j'}) <= phi_j(1_j) <= 0` for `j <= j'`, over all
/// positional diagonal tensors up to `depth` lineages.
pub fn check_phimon(table: &RateTable, depth: usize) -> Result<LawReport> {
    let d = table.d();
    let tensors = diagonal_tensors(d, depth, 1);
    let values = tensors
        .iter()
        .map(|t| value(table, t).ok_or_else(|| Error::IncompleteTable(vec![t.to_string()])))
        .collect::<Result<Vec<f64>>>()?;
    let mut report = LawReport::new("rate-monotonicity", format!("rate table, depth {depth}"), false);
    for (a, t) in tensors.iter().enumerate() {
        let ta = t.num_slots() == 0 || t.is_identity();
        if ta {
            report.record_float(values[a].max(0.0), RATE_TOL, || format!("deficit {} at {t} is positive", values[a]));
        } else {
            report.record_float((-values[a]).max(0.0), RATE_TOL, || format!("rate {} at {t} is negative", values[a]));
        }
        for (b, u) in tensors.iter().enumerate() {
            if a == b || !t.tensor_leq(u)? {
                continue;
            }
            let tb = u.num_slots() == 0 || u.is_identity();
            if ta != tb {
                continue;
            }
            let excess = (values[b] - values[a]).max(0.0);
            report.record_float(excess, RATE_TOL, || {
                format!("{t} <= {u} but phi rises from {} to {}", values[a], values[b])
            });
        }
    }
    report.certified_depth = Some(depth);
    Ok(report)
}
