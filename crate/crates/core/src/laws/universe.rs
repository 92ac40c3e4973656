//! Finite sets of tensors on which the laws are checked.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::CanningsModel;
use crate::tensor::{tensors_with_margins, MergeTensor};

/// Every positional tensor without empty slots and with `sum_l i_l = total`.
/// These are exactly the merge structures of partition pairs whose finer
/// partition has `total` blocks.
pub fn structural_tensors(d: usize, total: usize) -> Vec<MergeTensor> {
    let mut out = Vec::new();
    for i in vectors_with_sum(d, total) {
        for slots in 0..=total {
            for j in vectors_with_sum(d, slots) {
                if slots == 0 && total > 0 {
                    continue;
                }
                out.extend(tensors_with_margins(&i, &j));
            }
        }
    }
    out
}

/// All `v` in `N_0^d` with `sum v = total`, lexicographically.
pub fn vectors_with_sum(d: usize, total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; d];
    fill(total, 0, &mut cur, &mut out);
    out
}

fn fill(rest: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == cur.len() {
        cur[pos] = rest;
        out.push(cur.clone());
        return;
    }
    for v in 0..=rest {
        cur[pos] = v;
        fill(rest - v, pos + 1, cur, out);
    }
}

/// Every tensor, empty slots allowed, with at most `max_slots` slots and
/// `sum_l i_l <= max_total`.
pub fn all_tensors(d: usize, max_slots: usize, max_total: usize) -> Vec<MergeTensor> {
    let mut out = Vec::new();
    for slots in 0..=max_slots {
        for j in vectors_with_sum(d, slots) {
            let cells = slots * d;
            for total in 0..=max_total {
                for flat in vectors_with_sum(cells.max(1), total) {
                    if cells == 0 && total > 0 {
                        continue;
                    }
                    out.push(from_flat(d, &j, &flat));
                }
                if cells == 0 {
                    break;
                }
            }
        }
    }
    out
}

/// Cells in slot-major order: slot `(k, s)` owns `d` consecutive values.
fn from_flat(d: usize, j: &[usize], flat: &[usize]) -> MergeTensor {
    let mut grid = vec![vec![Vec::new(); d]; d];
    let mut pos = 0;
    for k in 0..d {
        for _ in 0..j[k] {
            for l in 0..d {
                grid[k][l].push(flat[pos]);
                pos += 1;
            }
        }
    }
    MergeTensor::new(j.to_vec(), grid).expect("consistent shape")
}

/// Whether `phi` is defined on `t` for this model (`i_l <= N_l`, `j_k <= N_k`).
pub fn in_domain(model: &CanningsModel, t: &MergeTensor) -> bool {
    (0..model.d()).all(|k| t.j()[k] <= model.size(k) && t.lineage_count(k) <= model.size(k))
}

/// `count` pseudo-random tensors with `sum_l i_l = total`, empty slots
/// allowed, inside the model's domain. Deterministic for a given seed.
pub fn random_tensors(model: &CanningsModel, total: usize, count: usize, seed: u64) -> Vec<MergeTensor> {
    let d = model.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(total as u64);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count * 100 {
        attempts += 1;
        let slots = rng.random_range(0..=total + 1);
        if slots == 0 && total > 0 {
            continue;
        }
        let mut j = vec![0; d];
        for _ in 0..slots {
            j[rng.random_range(0..d)] += 1;
        }
        let cells = slots * d;
        let mut flat = vec![0; cells];
        for _ in 0..total {
            flat[rng.random_range(0..cells)] += 1;
        }
        let t = from_flat(d, &j, &flat);
        if in_domain(model, &t) {
            out.push(t);
        }
    }
    out
}
