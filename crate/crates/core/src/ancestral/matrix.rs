use std::fmt::Display;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::io::csv_quote;
use crate::partition::LabeledPartition;
use crate::rational::{fraction_string, to_f64, Rational};

/// Where the entries of a matrix come from.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Exact,
    MonteCarlo { reps: usize, seed: u64 },
    Limit { description: String },
}

impl Provenance {
    pub fn to_json(&self) -> Value {
        match self {
            Provenance::Exact => json!({"kind": "exact"}),
            Provenance::MonteCarlo { reps, seed } => {
                json!({"kind": "monte-carlo", "reps": reps, "seed": seed})
            }
            Provenance::Limit { description } => json!({"kind": "limit", "description": description}),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Provenance::Exact => "exact".into(),
            Provenance::MonteCarlo { reps, seed } => format!("monte-carlo(reps={reps},seed={seed})"),
            Provenance::Limit { description } => format!("limit({description})"),
        }
    }
}

/// Square matrix indexed by an enumerated list of labeled partitions.
#[derive(Clone, Debug)]
pub struct TransitionMatrix<V> {
    states: Vec<LabeledPartition>,
    entries: Vec<Vec<V>>,
    provenance: Provenance,
    /// Rows whose state has more `l`-blocks than `N_l`; left as zero rows.
    inadmissible: Vec<usize>,
}

impl<V> TransitionMatrix<V> {
    pub fn new(
        states: Vec<LabeledPartition>,
        entries: Vec<Vec<V>>,
        provenance: Provenance,
        inadmissible: Vec<usize>,
    ) -> Self {
        assert_eq!(states.len(), entries.len());
        assert!(entries.iter().all(|r| r.len() == states.len()));
        Self {
            states,
            entries,
            provenance,
            inadmissible,
        }
    }

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

    pub fn entry(&self, a: usize, b: usize) -> &V {
        &self.entries[a][b]
    }

    pub fn row(&self, a: usize) -> &[V] {
        &self.entries[a]
    }

    pub fn rows(&self) -> &[Vec<V>] {
        &self.entries
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn inadmissible_rows(&self) -> &[usize] {
        &self.inadmissible
    }

    pub fn is_admissible(&self, a: usize) -> bool {
        !self.inadmissible.contains(&a)
    }

    pub fn map<W>(&self, f: impl Fn(&V) -> W) -> TransitionMatrix<W> {
        TransitionMatrix {
            states: self.states.clone(),
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(&f).collect())
                .collect(),
            provenance: self.provenance.clone(),
            inadmissible: self.inadmissible.clone(),
        }
    }
}

impl<V: Display> TransitionMatrix<V> {
    /// Header row and column of canonical partition encodings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state");
        for s in &self.states {
            out.push(',');
            out.push_str(&csv_quote(&s.to_string()));
        }
        out.push('\n');
        for (s, row) in self.states.iter().zip(&self.entries) {
            out.push_str(&csv_quote(&s.to_string()));
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

impl TransitionMatrix<Rational> {
    pub fn row_sum(&self, a: usize) -> Rational {
        self.entries[a].iter().sum()
    }

    /// True when every admissible row sums to exactly one.
    pub fn is_stochastic(&self) -> bool {
        (0..self.dim())
            .filter(|&a| self.is_admissible(a))
            .all(|a| self.row_sum(a).is_one() && self.entries[a].iter().all(|v| *v >= Rational::zero()))
    }

    pub fn to_f64(&self) -> TransitionMatrix<f64> {
        self.map(to_f64)
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|r| r.iter().map(fraction_string).collect())
            .collect();
        self.json_with(json!(entries))
    }
}

impl TransitionMatrix<f64> {
    pub fn row_sum(&self, a: usize) -> f64 {
        kahan_sum(self.entries[a].iter().copied())
    }

    pub fn to_json(&self) -> Value {
        self.json_with(json!(self.entries))
    }
}

impl<V> TransitionMatrix<V> {
    fn json_with(&self, entries: Value) -> Value {
        let states: Vec<String> = self.states.iter().map(|s| s.to_string()).collect();
        let inadmissible: Vec<String> = self.inadmissible.iter().map(|&a| states[a].clone()).collect();
        json!({
            "provenance": self.provenance.to_json(),
            "states": states,
            "entries": entries,
            "inadmissible_states": inadmissible,
        })
    }
}

/// Compensated summation.
pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in values {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
