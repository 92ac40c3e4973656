//! Machine checks of the structural laws at finite population size.
//!
//! Exact laws report a rational worst residual which is zero exactly when
//! the law holds on every checked case.

mod consistency;
mod coupling;
mod identity;
mod meppf;
mod monotonicity;
mod symmetry;
pub mod universe;

pub use consistency::check_consistency;
pub use coupling::check_natural_coupling;
pub use identity::{check_identity_limit, identity_limit_profile, IdentityLimitPoint};
pub use meppf::{check_meppf, check_meppf_with, MeppfAxiom, MeppfOutcome, PpfTable};
pub use monotonicity::check_monotonicity;
pub use symmetry::{check_exchangeability, check_moment_symmetry, check_permutation_symmetry};

use std::collections::HashMap;

use crate::ancestral::phi_or_zero;
use crate::error::Result;
use crate::model::CanningsModel;
use crate::rational::Rational;
use crate::tensor::{MergeTensor, SlotSymmetry};

/// Seed of the pseudo-random tensors added to the structural universe.
pub const UNIVERSE_SEED: u64 = 0x5eed_cafe;
/// Random abstract tensors sampled per depth.
pub const RANDOM_PER_DEPTH: usize = 100;

/// Memoized `Phi` keyed by the row-symmetric representative, which every
/// exchangeable law respects.
pub(crate) struct PhiCache<'a> {
    model: &'a CanningsModel,
    map: HashMap<MergeTensor, Rational>,
}

impl<'a> PhiCache<'a> {
    pub(crate) fn new(model: &'a CanningsModel) -> Self {
        Self {
            model,
            map: HashMap::new(),
        }
    }

    pub(crate) fn get(&mut self, t: &MergeTensor) -> Result<Rational> {
        let key = t.canonical(SlotSymmetry::PerRow);
        if let Some(v) = self.map.get(&key) {
            return Ok(v.clone());
        }
        let v = phi_or_zero(self.model, t)?;
        self.map.insert(key, v.clone());
        Ok(v)
    }
}
