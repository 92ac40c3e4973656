//! Forward sampling of offspring followed by random backward assignment of
//! lineages; an independent oracle for the exact matrices.

use std::collections::HashMap;

use rand::seq::{index, SliceRandom};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{admissible, Provenance, TransitionMatrix};
use crate::error::{domain, invalid, Result};
use crate::model::{CanningsModel, GenerationSample};
use crate::partition::{enumerate_partitions, LabeledPartition};

/// States of the ancestral process for generations `0, 1, .., r`.
#[derive(Clone, Debug)]
pub struct AncestryTrajectory {
    pub states: Vec<LabeledPartition>,
    pub seed: Option<u64>,
}

impl AncestryTrajectory {
    pub fn initial(&self) -> &LabeledPartition {
        &self.states[0]
    }

    pub fn last(&self) -> &LabeledPartition {
        self.states.last().expect("trajectory starts with the initial state")
    }
}

/// One-generation stepper with reusable buffers.
pub struct Simulator<'a> {
    model: &'a CanningsModel,
    slots: Vec<Vec<(usize, usize)>>,
}

impl<'a> Simulator<'a> {
    pub fn new(model: &'a CanningsModel) -> Self {
        Self {
            model,
            slots: vec![Vec::new(); model.d()],
        }
    }

    /// Draws a generation and moves `pi` one step back in time.
    pub fn step(&mut self, pi: &LabeledPartition, rng: &mut dyn RngCore) -> Result<LabeledPartition> {
        let g = self.model.sample_generation(rng)?;
        self.step_with(pi, &g, rng)
    }

    /// Each type-`l` lineage picks one of the `l`-offspring slots of the
    /// generation, uniformly without replacement; lineages that land on the
    /// same parent merge and take the parent's type.
    pub fn step_with(
        &mut self,
        pi: &LabeledPartition,
        g: &GenerationSample,
        rng: &mut dyn RngCore,
    ) -> Result<LabeledPartition> {
        let d = self.model.d();
        for l in 0..d {
            self.slots[l].clear();
        }
        for k in 0..d {
            for i in 0..g.parents(k) {
                for l in 0..d {
                    for _ in 0..g.get(k, l, i) {
                        self.slots[l].push((k, i));
                    }
                }
            }
        }
        let mut by_type: Vec<Vec<usize>> = vec![Vec::new(); d];
        for (b, block) in pi.blocks().iter().enumerate() {
            by_type[block.label()].push(b);
        }
        let mut parent_of = vec![(0usize, 0usize); pi.num_blocks()];
        for l in 0..d {
            let m = by_type[l].len();
            if m == 0 {
                continue;
            }
            if m > self.slots[l].len() {
                return domain(format!(
                    "{m} lineages of type {} but only {} type-{} offspring",
                    l + 1,
                    self.slots[l].len(),
                    l + 1
                ));
            }
            let mut idx = index::sample(rng, self.slots[l].len(), m).into_vec();
            idx.shuffle(rng);
            for (&b, &s) in by_type[l].iter().zip(&idx) {
                parent_of[b] = self.slots[l][s];
            }
        }
        let mut groups: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (b, block) in pi.blocks().iter().enumerate() {
            groups
                .entry(parent_of[b])
                .or_default()
                .extend_from_slice(block.elements());
        }
        let blocks = groups.into_iter().map(|((k, _), e)| (e, k)).collect();
        LabeledPartition::new(pi.n(), d, blocks)
    }
}

/// Runs the ancestral process for `generations` steps from `initial`.
pub fn simulate_ancestry(
    model: &CanningsModel,
    initial: &LabeledPartition,
    generations: usize,
    seed: u64,
) -> Result<AncestryTrajectory> {
    if initial.d() != model.d() {
        return invalid("initial partition and model have different type counts");
    }
    if !admissible(model, &initial.block_counts()) {
        return domain(format!("initial state {initial} has more lineages of some type than N"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sim = Simulator::new(model);
    let mut states = vec![initial.clone()];
    for _ in 0..generations {
        let next = sim.step(states.last().unwrap(), &mut rng)?;
        states.push(next);
    }
    Ok(AncestryTrajectory {
        states,
        seed: Some(seed),
    })
}

/// Empirical one-step transition frequencies with binomial standard errors.
#[derive(Clone, Debug)]
pub struct McEstimate {
    pub matrix: TransitionMatrix<f64>,
    pub std_errors: Vec<Vec<f64>>,
    pub reps: usize,
    pub seed: u64,
}

/// `reps` one-step simulations from every state of `P_{n,E}`. Row `a` uses
/// stream `a` of the seeded generator, so results do not depend on threading.
pub fn mc_transition_estimate(model: &CanningsModel, n: usize, reps: usize, seed: u64) -> Result<McEstimate> {
    if reps == 0 {
        return invalid("reps must be positive");
    }
    let states = enumerate_partitions(n, model.d())?;
    let index: HashMap<LabeledPartition, usize> =
        states.iter().cloned().enumerate().map(|(a, s)| (s, a)).collect();
    let rows: Vec<Result<Option<Vec<u64>>>> = states
        .par_iter()
        .enumerate()
        .map(|(a, pi)| {
            if !admissible(model, &pi.block_counts()) {
                return Ok(None);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(a as u64);
            let mut sim = Simulator::new(model);
            let mut counts = vec![0u64; states.len()];
            for _ in 0..reps {
                let next = sim.step(pi, &mut rng)?;
                counts[index[&next]] += 1;
            }
            Ok(Some(counts))
        })
        .collect();
    let mut entries = Vec::with_capacity(states.len());
    let mut errs = Vec::with_capacity(states.len());
    let mut inadmissible = Vec::new();
    for (a, row) in rows.into_iter().enumerate() {
        match row? {
            Some(counts) => {
                let p: Vec<f64> = counts.iter().map(|&c| c as f64 / reps as f64).collect();
                errs.push(p.iter().map(|&x| (x * (1.0 - x) / reps as f64).sqrt()).collect());
                entries.push(p);
            }
            None => {
                inadmissible.push(a);
                entries.push(vec![0.0; states.len()]);
                errs.push(vec![0.0; states.len()]);
            }
        }
    }
    Ok(McEstimate {
        matrix: TransitionMatrix::new(states, entries, Provenance::MonteCarlo { reps, seed }, inadmissible),
        std_errors: errs,
        reps,
        seed,
    })
}
