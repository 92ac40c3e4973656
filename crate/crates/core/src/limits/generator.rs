use std::fmt::Write as _;

use rand::{Rng, RngCore};
use serde_json::{json, Value};

use super::rates::RateTable;
use crate::ancestral::kahan_sum;
use crate::error::{invalid, Error, Result};
use crate::io::csv_quote;
use crate::partition::{enumerate_partitions, LabeledPartition};

/// Infinitesimal generator `Q` on `P_{n,E}`.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    states: Vec<LabeledPartition>,
    q: Vec<Vec<f64>>,
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[LabeledPartition] {
        &self.states
    }

    pub fn state(&self, a: usize) -> &LabeledPartition {
        &self.states[a]
    }

    pub fn index_of(&self, pi: &LabeledPartition) -> Option<usize> {
        self.states.iter().position(|s| s == pi)
    }

    pub fn entry(&self, a: usize, b: usize) -> f64 {
        self.q[a][b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.q[a]
    }

    pub fn row_sum(&self, a: usize) -> f64 {
        kahan_sum(self.q[a].iter().copied())
    }

    /// Largest violation of the generator axioms: negative off-diagonal
    /// entries and nonzero row sums.
    pub fn defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.dim() {
            worst = worst.max(self.row_sum(a).abs());
            for b in (0..self.dim()).filter(|&b| b != a) {
                worst = worst.max(-self.q[a][b]);
            }
        }
        worst
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("state");
        for s in &self.states {
            write!(out, ",{}", csv_quote(&s.to_string())).expect("write to string");
        }
        out.push('\n');
        for (a, s) in self.states.iter().enumerate() {
            out.push_str(&csv_quote(&s.to_string()));
            for v in &self.q[a] {
                write!(out, ",{v}").expect("write to string");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "states": self.states.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "entries": self.q,
        })
    }
}

/// `q_{pi,pi'} = phi_j(T)` for `pi` strictly finer than or relabeled into
/// `pi'`, with `T` the merge structure; diagonal entries complete the rows
/// to zero.
pub fn limit_generator(rates: &RateTable, n: usize) -> Result<GeneratorMatrix> {
    if n == 0 {
        return invalid("sample size must be at least 1");
    }
    let states = enumerate_partitions(n, rates.d())?;
    let dim = states.len();
    let mut q = vec![vec![0.0; dim]; dim];
    let mut missing = Vec::new();
    for (a, pi) in states.iter().enumerate() {
        for (b, target) in states.iter().enumerate() {
            if a == b {
                continue;
            }
            if let Some(t) = pi.merge_structure(target)? {
                match rates.get(&t) {
                    Some(v) => q[a][b] = v,
                    None => missing.push(t.to_string()),
                }
            }
        }
        let off = kahan_sum(q[a].iter().copied());
        q[a][a] = 0.0 - off; // not `-off`, which is -0 on absorbing rows
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::IncompleteTable(missing));
    }
    Ok(GeneratorMatrix { states, q })
}

/// Jump times and states of one CTMC path.
#[derive(Clone, Debug)]
pub struct CoalescentTrajectory {
    pub jumps: Vec<(f64, LabeledPartition)>,
}

impl CoalescentTrajectory {
    /// Time of the first jump, if any.
    pub fn first_jump(&self) -> Option<f64> {
        self.jumps.get(1).map(|(t, _)| *t)
    }

    /// One `{"t":..,"state":".."}` object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for (t, s) in &self.jumps {
            out.push_str(&json!({"t": t, "state": s.to_string()}).to_string());
            out.push('\n');
        }
        out
    }
}

/// Jump-chain simulation with exponential holding times of rate `-q_{pi,pi}`
/// up to `t_max`. Stops early at absorbing states.
pub fn simulate_coalescent(
    q: &GeneratorMatrix,
    initial: &LabeledPartition,
    t_max: f64,
    rng: &mut dyn RngCore,
) -> Result<CoalescentTrajectory> {
    let mut a = q
        .index_of(initial)
        .ok_or_else(|| Error::InvalidArgument(format!("{initial} is not a state of the generator")))?;
    let mut t = 0.0;
    let mut jumps = vec![(0.0, initial.clone())];
    loop {
        let rate = -q.entry(a, a);
        if rate <= 0.0 {
            break;
        }
        let u: f64 = rng.random();
        t += -(1.0 - u).ln() / rate;
        if t > t_max {
            break;
        }
        let mut pick = rng.random::<f64>() * rate;
        let mut next = None;
        for b in (0..q.dim()).filter(|&b| b != a) {
            let w = q.entry(a, b);
            if w <= 0.0 {
                continue;
            }
            next = Some(b);
            if pick < w {
                break;
            }
            pick -= w;
        }
        a = next.expect("positive exit rate has a target");
        jumps.push((t, q.state(a).clone()));
    }
    Ok(CoalescentTrajectory { jumps })
}
