//! Acceptance run: one PASS/FAIL line per criterion, with its runtime budget.
//! Exact criteria use zero tolerance; Monte-Carlo criteria use 4 standard errors.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cannings::ancestral::{coalescence_probability, mc_transition_estimate, transition_matrix, TransitionMatrix};
use cannings::laws::{
    check_consistency, check_meppf, check_natural_coupling, check_permutation_symmetry, MeppfAxiom, PpfTable,
};
use cannings::limits::{
    check_consisdiag, check_phimon, complete_rates_by_consistency, diagonal_tensors, kingman_rates, limit_generator,
    simulate_coalescent, strong_mutation_expansion, weak_mutation_family, weak_mutation_residual, xi_rate,
    xi_rate_table, XiAtom, XiSpec,
};
use cannings::partition::enumerate_partitions;
use cannings::rational::{ratio, Rational};
use cannings::{CanningsModel, LabeledPartition, MergeTensor};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<(bool, String), String>;

fn wf() -> CanningsModel {
    CanningsModel::wright_fisher(vec![4, 6], vec![vec![3, 2], vec![1, 4]]).unwrap()
}

fn mutation() -> CanningsModel {
    CanningsModel::mutation(vec![4, 5, 7], vec![vec![1, 2, 1], vec![1, 0, 4], vec![2, 3, 2]]).unwrap()
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// `pi_1 .. pi_6` of the two-type, two-sample state space.
const TWO_TWO: [&str; 6] = ["1,2:1", "1,2:2", "1:1|2:1", "1:1|2:2", "1:2|2:1", "1:2|2:2"];

fn index_map<V>(p: &TransitionMatrix<V>) -> Vec<usize> {
    TWO_TWO
        .iter()
        .map(|s| p.index_of(&LabeledPartition::parse(s, 2).unwrap()).unwrap())
        .collect()
}

fn ff(x: u64, m: u64) -> u64 {
    (0..m).map(|i| x.saturating_sub(i)).product()
}

fn q(num: u64, den: u64) -> Rational {
    ratio(num as usize, den as usize)
}

// ---- 1 -------------------------------------------------------------------

fn stirling(n: usize, k: usize) -> u128 {
    let mut s = vec![vec![0u128; n + 1]; n + 1];
    s[0][0] = 1;
    for a in 1..=n {
        for b in 1..=a {
            s[a][b] = b as u128 * s[a - 1][b] + s[a - 1][b - 1];
        }
    }
    s[n][k]
}

fn enumeration() -> Outcome {
    let six = e(enumerate_partitions(2, 2))?.len();
    let mut bad = Vec::new();
    for n in 1..=6 {
        for d in 1..=3 {
            let want: u128 = (1..=n).map(|j| (d as u128).pow(j as u32) * stirling(n, j)).sum();
            let got = e(enumerate_partitions(n, d))?.len() as u128;
            if got != want {
                bad.push(format!("n={n} d={d}: {got} != {want}"));
            }
        }
    }
    Ok((six == 6 && bad.is_empty(), format!("|P_2,{{1,2}}| = {six}; 18 (n,d) counts {}", if bad.is_empty() { "match".into() } else { bad.join("; ") })))
}

// ---- 2 -------------------------------------------------------------------

fn wf_golden() -> Outcome {
    let (n1, n2) = (4u64, 6u64);
    let (n11, n12, n21, n22) = (3u64, 2u64, 1u64, 4u64);
    let mid = [
        q(n11 * n12, n1 * n1 * n2),
        q(n21 * n22, n1 * n2 * n2),
        q(ff(n1, 2) * n11 * n12, n1.pow(3) * n2),
    ];
    let last = q(ff(n2, 2) * n21 * n22, n1 * n2.pow(3));
    let golden: [[Rational; 6]; 6] = [
        [q(n11, n1), q(n21, n1), q(0, 1), q(0, 1), q(0, 1), q(0, 1)],
        [q(n12, n2), q(n22, n2), q(0, 1), q(0, 1), q(0, 1), q(0, 1)],
        [
            q(ff(n11, 2), n1 * ff(n1, 2)),
            q(ff(n21, 2), ff(n1, 2) * n2),
            q(ff(n11, 2), n1 * n1),
            q(n11 * n21, ff(n1, 2)),
            q(n11 * n21, ff(n1, 2)),
            q(ff(n2, 2) * ff(n21, 2), ff(n1, 2) * n2 * n2),
        ],
        [mid[0].clone(), mid[1].clone(), mid[2].clone(), q(n11 * n22, n1 * n2), q(n12 * n21, n1 * n2), last.clone()],
        [mid[0].clone(), mid[1].clone(), mid[2].clone(), q(n12 * n21, n1 * n2), q(n11 * n22, n1 * n2), last],
        [
            q(ff(n12, 2), n1 * ff(n2, 2)),
            q(ff(n22, 2), n2 * ff(n2, 2)),
            q(ff(n1, 2) * ff(n12, 2), n1 * n1 * ff(n2, 2)),
            q(n12 * n22, ff(n2, 2)),
            q(n12 * n22, ff(n2, 2)),
            q(ff(n22, 2), n2 * n2),
        ],
    ];
    let p = e(transition_matrix(&wf(), 2))?;
    let idx = index_map(&p);
    let mut equal = 0;
    let mut bad = Vec::new();
    for r in 0..6 {
        for c in 0..6 {
            if p.entry(idx[r], idx[c]) == &golden[r][c] {
                equal += 1;
            } else {
                bad.push(format!("(pi{},pi{}) = {} vs {}", r + 1, c + 1, p.entry(idx[r], idx[c]), golden[r][c]));
            }
        }
    }
    let c11 = e(coalescence_probability(&wf(), 0, 0, 0))?;
    let ok = equal == 36 && c11 == q(1, 8);
    Ok((ok, format!("{equal}/36 exact equalities, c_11 = {c11}{}", if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) })))
}

// ---- 3 -------------------------------------------------------------------

fn consistency() -> Outcome {
    let models = [
        ("WF d=1", CanningsModel::wright_fisher(vec![6], vec![vec![6]]).unwrap()),
        ("WF d=2", wf()),
        ("WF d=3", CanningsModel::wright_fisher(vec![3, 4, 5], vec![vec![2, 1, 1], vec![1, 2, 1], vec![0, 1, 3]]).unwrap()),
        ("Mutation d=2", CanningsModel::mutation(vec![2, 3], vec![vec![1, 1], vec![1, 2]]).unwrap()),
        ("Mutation d=3", mutation()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, m) in &models {
        let r = e(check_consistency(m, 4))?;
        ok &= r.passed() && r.worst_residual.is_zero();
        parts.push(format!("{name}: {} cases, residual {}", r.cases_checked, r.worst_residual));
    }
    Ok((ok, parts.join("; ")))
}

// ---- 4 -------------------------------------------------------------------

fn coupling() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, m) in [(3, 2), (3, 1), (4, 3)] {
        let r = e(check_natural_coupling(&wf(), n, m))?;
        ok &= r.passed() && r.worst_residual.is_zero();
        parts.push(format!("({n},{m}): {} equalities", r.cases_checked));
    }
    Ok((ok, parts.join(", ")))
}

// ---- 5 -------------------------------------------------------------------

fn symmetry() -> Outcome {
    let mut ok = true;
    let mut cases = 0;
    for m in [wf(), mutation()] {
        for n in 1..=3 {
            let r = e(check_permutation_symmetry(&m, n))?;
            ok &= r.passed();
            cases += r.cases_checked;
        }
    }
    Ok((ok, format!("{cases} entry equalities over n = 1..3, both laws")))
}

// ---- 6 -------------------------------------------------------------------

fn monte_carlo() -> Outcome {
    const REPS: usize = 1_000_000;
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, m, seed) in [("WF", wf(), 11u64), ("Mutation", mutation(), 12)] {
        let exact = e(transition_matrix(&m, 2))?;
        let est = e(mc_transition_estimate(&m, 2, REPS, seed))?;
        let (mut nonzero, mut within) = (0, 0);
        for a in 0..exact.dim() {
            if !exact.is_admissible(a) {
                continue;
            }
            for b in 0..exact.dim() {
                let p = cannings::rational::to_f64(exact.entry(a, b));
                if p == 0.0 {
                    continue;
                }
                nonzero += 1;
                let se = (p * (1.0 - p) / REPS as f64).sqrt();
                if (est.matrix.entry(a, b) - p).abs() <= 4.0 * se {
                    within += 1;
                }
            }
        }
        let frac = within as f64 / nonzero as f64;
        ok &= frac >= 0.95;
        parts.push(format!("{name}: {within}/{nonzero} within 4 SE"));
    }
    Ok((ok, parts.join(", ")))
}

// ---- 7 -------------------------------------------------------------------

fn mutation_row_sums() -> Outcome {
    let m = mutation();
    let mut rows = 0;
    let mut bad = Vec::new();
    for n in 1..=4 {
        let p = e(transition_matrix(&m, n))?;
        for a in 0..p.dim() {
            if !p.is_admissible(a) {
                bad.push(format!("n={n}: {} inadmissible", p.state(a)));
                continue;
            }
            rows += 1;
            if !p.row_sum(a).is_one() {
                bad.push(format!("n={n}: row {} sums to {}", p.state(a), p.row_sum(a)));
            }
        }
    }
    Ok((bad.is_empty(), format!("{rows} rows sum to exactly 1{}", if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) })))
}

// ---- 8 -------------------------------------------------------------------

fn strong_mutation() -> Outcome {
    let h = q(1, 2);
    let f = q(1, 4);
    let z = Rational::zero();
    let nh = -h.clone();
    let nf = -f.clone();
    let a_gold = [
        [h.clone(), h.clone(), z.clone(), z.clone(), z.clone(), z.clone()],
        [h.clone(), h.clone(), z.clone(), z.clone(), z.clone(), z.clone()],
        [z.clone(), z.clone(), f.clone(), f.clone(), f.clone(), f.clone()],
        [z.clone(), z.clone(), f.clone(), f.clone(), f.clone(), f.clone()],
        [z.clone(), z.clone(), f.clone(), f.clone(), f.clone(), f.clone()],
        [z.clone(), z.clone(), f.clone(), f.clone(), f.clone(), f.clone()],
    ];
    let b_gold = [
        [z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), z.clone()],
        [z.clone(), z.clone(), z.clone(), z.clone(), z.clone(), z.clone()],
        [f.clone(), f.clone(), nh.clone(), f.clone(), f.clone(), nh.clone()],
        [f.clone(), f.clone(), nf.clone(), z.clone(), z.clone(), nf.clone()],
        [f.clone(), f.clone(), nf.clone(), z.clone(), z.clone(), nf.clone()],
        [f.clone(), f.clone(), nh.clone(), f.clone(), f.clone(), nh],
    ];
    let ms = [10usize, 20, 40, 80];
    let mut residuals = Vec::new();
    let mut mismatches = Vec::new();
    for &m in &ms {
        let x = e(strong_mutation_expansion(m, 2, 2))?;
        let idx = index_map(&x.p);
        // P_N in closed form at this M
        let mu = m as u64;
        let outer = q(mu - 1, 4 * mu * (2 * mu - 1));
        let inner = q(mu, 2 * (2 * mu - 1));
        let same = q(mu - 1, 4 * mu);
        let p8 = q(1, 8 * mu);
        let mid = q(2 * mu - 1, 8 * mu);
        let p_gold = [
            [h.clone(), h.clone(), z.clone(), z.clone(), z.clone(), z.clone()],
            [h.clone(), h.clone(), z.clone(), z.clone(), z.clone(), z.clone()],
            [outer.clone(), outer.clone(), same.clone(), inner.clone(), inner.clone(), same.clone()],
            [p8.clone(), p8.clone(), mid.clone(), f.clone(), f.clone(), mid.clone()],
            [p8.clone(), p8.clone(), mid.clone(), f.clone(), f.clone(), mid],
            [outer.clone(), outer, same.clone(), inner.clone(), inner, same],
        ];
        for r in 0..6 {
            for c in 0..6 {
                let (i, j) = (idx[r], idx[c]);
                if x.a.entry(i, j) != &a_gold[r][c] {
                    mismatches.push(format!("A(pi{},pi{})", r + 1, c + 1));
                }
                if x.b.entry(i, j) != &b_gold[r][c] {
                    mismatches.push(format!("B(pi{},pi{})", r + 1, c + 1));
                }
                if x.p.entry(i, j) != &p_gold[r][c] {
                    mismatches.push(format!("P_N(pi{},pi{}) at M={m}", r + 1, c + 1));
                }
            }
        }
        residuals.push(x.residual_f64());
    }
    mismatches.dedup();
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[1] / w[0]).collect();
    let ok = mismatches.is_empty() && ratios.iter().all(|r| *r <= 0.6);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    Ok((
        ok,
        format!(
            "A, B, P_N exact {}; residual ratios {}",
            if mismatches.is_empty() { "match".into() } else { format!("mismatch at {}", mismatches.join(", ")) },
            shown.join(", ")
        ),
    ))
}

// ---- 9 -------------------------------------------------------------------

fn weak_mutation() -> Outcome {
    let mut r = Vec::new();
    for m in [100, 1000, 10000] {
        r.push(e(weak_mutation_residual(&e(weak_mutation_family(m))?, &[1.0, 0.5]))?.residual);
    }
    let ok = r.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = r.iter().map(|v| format!("{v:.3e}")).collect();
    Ok((ok, format!("residuals {}", shown.join(" > "))))
}

// ---- 10 ------------------------------------------------------------------

/// Sum over distinct coordinates `m_1, .., m_r` of `prod x_{m_i}^{e_i}`.
fn distinct_power_sum(x: &[f64], exps: &[u32], used: &mut Vec<bool>) -> f64 {
    let Some((&first, rest)) = exps.split_first() else {
        return 1.0;
    };
    let mut acc = 0.0;
    for m in 0..x.len() {
        if used[m] {
            continue;
        }
        used[m] = true;
        acc += x[m].powi(first as i32) * distinct_power_sum(x, rest, used);
        used[m] = false;
    }
    acc
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Single-type Xi rate of a merger with groups `ks` (each >= 2) and `s`
/// non-merging blocks.
fn single_type_rate(a: f64, atoms: &[(f64, Vec<f64>)], ks: &[u32], s: u32) -> f64 {
    let mut rate = if ks == [2] { a } else { 0.0 };
    for (mass, x) in atoms {
        let norm: f64 = x.iter().map(|v| v * v).sum();
        let dust = 1.0 - x.iter().sum::<f64>();
        let mut acc = 0.0;
        for l in 0..=s {
            let mut exps = ks.to_vec();
            exps.extend(std::iter::repeat_n(1, l as usize));
            acc += binom(s, l) * dust.powi((s - l) as i32) * distinct_power_sum(x, &exps, &mut vec![false; x.len()]);
        }
        rate += mass * acc / norm;
    }
    rate
}

fn xi_rates() -> Outcome {
    let spec = XiSpec::new(vec![0.0, 0.0], vec![XiAtom { mass: 1.0, x: vec![0.5, 0.25], y: vec![0, 1] }]).unwrap();
    let single = e(xi_rate(&spec, &MergeTensor::diagonal(vec![vec![2], vec![]])))?;
    let double = e(xi_rate(&spec, &MergeTensor::diagonal(vec![vec![2], vec![2]])))?;
    let mut ok = (single - 0.8).abs() < 1e-12 && (double - 0.05).abs() < 1e-12;
    let full = e(complete_rates_by_consistency(&e(xi_rate_table(&spec, 4))?, 4))?;
    let diag = e(check_consisdiag(&full, 4))?;
    let mon = e(check_phimon(&full, 4))?;
    ok &= diag.passed() && diag.worst_residual.as_f64() < 1e-12 && mon.passed();

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for _ in 0..20 {
        let len = rng.random_range(1..=3);
        let mut x: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
        x.sort_by(|p, q| q.total_cmp(p));
        let scale = rng.random_range(0.3..1.0) / x.iter().sum::<f64>();
        x.iter_mut().for_each(|v| *v *= scale);
        let mass = rng.random_range(0.1..2.0);
        let a = rng.random_range(0.0..1.0);
        let spec1 = e(XiSpec::new(vec![a], vec![XiAtom { mass, x: x.clone(), y: vec![0; len] }]))?;
        let table = e(complete_rates_by_consistency(&e(xi_rate_table(&spec1, 4))?, 4))?;
        for t in diagonal_tensors(1, 4, 1) {
            if t.num_slots() == 0 || t.is_identity() {
                continue;
            }
            let entries = t.get(0, 0);
            let ks: Vec<u32> = entries.iter().filter(|&&v| v >= 2).map(|&v| v as u32).collect();
            let s = entries.iter().filter(|&&v| v == 1).count() as u32;
            let want = single_type_rate(a, &[(mass, x.clone())], &ks, s);
            let got = table.get(&t).ok_or_else(|| format!("completed table misses {t}"))?;
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
            compared += 1;
        }
    }
    ok &= worst < 1e-12;
    Ok((
        ok,
        format!(
            "rates {single:.15}, {double:.15}; consisdiag residual {:.1e} over {} cases; phimon {} pairs; d=1 worst {worst:.1e} over {compared} rates",
            diag.worst_residual.as_f64(),
            diag.cases_checked,
            mon.cases_checked
        ),
    ))
}

// ---- 11 ------------------------------------------------------------------

fn kingman_ctmc() -> Outcome {
    const REPS: usize = 100_000;
    let a = [1.0, 0.5];
    let q = e(limit_generator(&e(kingman_rates(&a))?, 2))?;
    let start = LabeledPartition::parse("1:1|2:1", 2).unwrap();
    let times = (0..REPS)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            rng.set_stream(r as u64);
            let traj = simulate_coalescent(&q, &start, f64::INFINITY, &mut rng).map_err(|e| e.to_string())?;
            traj.first_jump().ok_or_else(|| "no merger".to_string())
        })
        .collect::<Result<Vec<f64>, String>>()?;
    let n = REPS as f64;
    let mean = times.iter().sum::<f64>() / n;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let target = 1.0 / a[0];
    let z = (mean - target) / se;
    Ok((z.abs() <= 4.0, format!("mean {mean:.5} vs 1/a_1 = {target}, z = {z:.2}")))
}

// ---- 12 ------------------------------------------------------------------

fn meppf() -> Outcome {
    let base = e(PpfTable::from_model(&wf(), 3))?;
    let clean = e(check_meppf(&base))?;
    let mut ok = clean.first_failure.is_none();
    let mut parts = vec![format!("WF table ({} entries) {}", base.len(), if ok { "passes" } else { "fails" })];

    let mut bad_root = base.clone();
    bad_root.set(MergeTensor::empty(2), q(9, 10));

    let mut bad_pair = base.clone();
    let pair = e(MergeTensor::new(vec![2, 0], vec![vec![vec![2, 0], vec![0, 1]], vec![vec![], vec![]]]))?;
    let v = base.get(&pair).ok_or("pair tensor missing")?.clone();
    bad_pair.set(pair, v / Rational::from_integer(2.into()));

    // a depth-3 tensor with a single-element orbit: only its parent's recursion sees it
    let mut bad_leaf = base.clone();
    let leaf = MergeTensor::diagonal(vec![vec![3], vec![]]);
    let v = base.get(&leaf).ok_or("leaf tensor missing")?.clone();
    bad_leaf.set(leaf, v / Rational::from_integer(2.into()));

    for (name, table, want) in [
        ("root", bad_root, MeppfAxiom::Normalization),
        ("pair", bad_pair, MeppfAxiom::Symmetry),
        ("leaf", bad_leaf, MeppfAxiom::Consistency),
    ] {
        let got = e(check_meppf(&table))?.first_failure;
        ok &= got == Some(want);
        parts.push(format!("{name} perturbation -> {}", got.map_or("none".into(), |a| a.to_string())));
    }
    Ok((ok, parts.join(", ")))
}

/// Id, name, time budget in seconds, check.
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (1, "enumeration", 1, enumeration),
        (2, "WF golden matrix", 1, wf_golden),
        (3, "consistency", 30, consistency),
        (4, "natural coupling", 60, coupling),
        (5, "permutation symmetry", 10, symmetry),
        (6, "Monte-Carlo oracle", 120, monte_carlo),
        (7, "mutation row sums", 5, mutation_row_sums),
        (8, "strong-mutation expansion", 5, strong_mutation),
        (9, "weak-mutation Kingman limit", 5, weak_mutation),
        (10, "Xi rates", 10, xi_rates),
        (11, "CTMC simulator", 30, kingman_ctmc),
        (12, "M-EPPF checker", 5, meppf),
    ];
    let mut failures = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && in_time, detail),
            Err(msg) => (false, format!("error: {msg}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] {id:>2} {name}: {detail} ({:.2} s, budget {budget} s{})",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} of 12 criteria pass", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
