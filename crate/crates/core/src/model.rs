//! Multi-type Cannings models and their offspring laws.
//!
//! Matrix convention: `counts[k][l]` is `N_{k,l}`, the number of type-`l`
//! offspring born to type-`k` parents. Rows are parent types and columns
//! offspring types, so `sum_k N_{k,l} = N_l` is a column-sum constraint.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde_json::{json, Value};

use crate::error::{domain, Error, Result};
use crate::rational::{falling, int, pow, ratio, Rational};
use crate::report::LawReport;
use crate::tensor::MergeTensor;

/// Offspring counts of one generation: `nu[k][i * d + l]` is
/// `nu_{k,l,i}`, the number of type-`l` children of parent `i` of type `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationSample {
    d: usize,
    nu: Vec<Vec<usize>>,
}

impl GenerationSample {
    pub fn new(d: usize, nu: Vec<Vec<usize>>) -> Self {
        Self { d, nu }
    }

    pub fn zeros(d: usize, sizes: &[usize]) -> Self {
        Self {
            d,
            nu: sizes.iter().map(|&n| vec![0; n * d]).collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn parents(&self, k: usize) -> usize {
        self.nu[k].len() / self.d
    }

    pub fn get(&self, k: usize, l: usize, i: usize) -> usize {
        self.nu[k][i * self.d + l]
    }

    pub fn add(&mut self, k: usize, l: usize, i: usize, v: usize) {
        self.nu[k][i * self.d + l] += v;
    }

    /// `sum_i nu_{k,l,i}`.
    pub fn offspring_total(&self, k: usize, l: usize) -> usize {
        (0..self.parents(k)).map(|i| self.get(k, l, i)).sum()
    }

    /// `E`-style statistic of this single draw: `prod_{k,l,s} (nu_{k,l,s})_{i_{k,l,s}}`
    /// with slots `s` mapped to the first `j_k` parents.
    pub fn factorial_product(&self, t: &MergeTensor) -> f64 {
        let mut acc = 1.0;
        for k in 0..self.d {
            for l in 0..self.d {
                for (s, &i) in t.get(k, l).iter().enumerate() {
                    if i == 0 {
                        continue;
                    }
                    let v = self.get(k, l, s);
                    if v < i {
                        return 0.0;
                    }
                    acc *= (0..i).map(|q| (v - q) as f64).product::<f64>();
                }
            }
        }
        acc
    }
}

/// Source of offspring configurations for custom laws. Implementations must
/// satisfy exchangeability within each parent type.
pub trait OffspringSampler: Send + Sync {
    fn sample(&self, sizes: &[usize], rng: &mut dyn RngCore) -> GenerationSample;
}

/// Exact joint factorial moments for a custom law, when known.
pub trait MomentOracle: Send + Sync {
    fn moment(&self, t: &MergeTensor) -> Rational;
}

#[derive(Clone)]
pub enum OffspringLaw {
    /// Independent symmetric multinomials: `nu_{k,l}` is
    /// Multinomial(`N_{k,l}`, uniform over the `N_k` parents).
    WrightFisher { counts: Vec<Vec<usize>> },
    /// One child per parent; exactly `N_{k,l}` type-`k` parents produce a
    /// type-`l` child, uniformly arranged.
    Mutation { counts: Vec<Vec<usize>> },
    Custom {
        sampler: Option<Arc<dyn OffspringSampler>>,
        moments: Option<Arc<dyn MomentOracle>>,
    },
}

impl fmt::Debug for OffspringLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::WrightFisher { counts } => f.debug_struct("WrightFisher").field("counts", counts).finish(),
            Self::Mutation { counts } => f.debug_struct("Mutation").field("counts", counts).finish(),
            Self::Custom { sampler, moments } => f
                .debug_struct("Custom")
                .field("sampler", &sampler.is_some())
                .field("moments", &moments.is_some())
                .finish(),
        }
    }
}

/// A joint factorial moment, either exact or a Monte-Carlo estimate.
#[derive(Clone, Debug, PartialEq)]
pub enum MomentValue {
    Exact(Rational),
    Estimate { mean: f64, std_err: f64, reps: usize },
}

#[derive(Clone, Debug)]
pub struct CanningsModel {
    d: usize,
    sizes: Vec<usize>,
    law: OffspringLaw,
}

impl CanningsModel {
    pub fn wright_fisher(sizes: Vec<usize>, counts: Vec<Vec<usize>>) -> Result<Self> {
        validate_counts(&sizes, &counts, false)?;
        Ok(Self {
            d: sizes.len(),
            sizes,
            law: OffspringLaw::WrightFisher { counts },
        })
    }

    pub fn mutation(sizes: Vec<usize>, counts: Vec<Vec<usize>>) -> Result<Self> {
        validate_counts(&sizes, &counts, true)?;
        Ok(Self {
            d: sizes.len(),
            sizes,
            law: OffspringLaw::Mutation { counts },
        })
    }

    /// Wright-Fisher model with `N_l` taken as the column sums of `counts`.
    pub fn wright_fisher_from_counts(counts: Vec<Vec<usize>>) -> Result<Self> {
        let sizes = column_sums(&counts);
        Self::wright_fisher(sizes, counts)
    }

    pub fn custom(
        sizes: Vec<usize>,
        sampler: Option<Arc<dyn OffspringSampler>>,
        moments: Option<Arc<dyn MomentOracle>>,
    ) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidModel("at least one type is required".into()));
        }
        if let Some(k) = sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidModel(format!("N_{} must be at least 1", k + 1)));
        }
        Ok(Self {
            d: sizes.len(),
            sizes,
            law: OffspringLaw::Custom { sampler, moments },
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, k: usize) -> usize {
        self.sizes[k]
    }

    pub fn n_min(&self) -> usize {
        *self.sizes.iter().min().expect("d >= 1")
    }

    pub fn law(&self) -> &OffspringLaw {
        &self.law
    }

    pub fn law_name(&self) -> &'static str {
        match self.law {
            OffspringLaw::WrightFisher { .. } => "wright-fisher",
            OffspringLaw::Mutation { .. } => "mutation",
            OffspringLaw::Custom { .. } => "custom",
        }
    }

    /// Deterministic counts `N_{k,l}` for the built-in laws.
    pub fn counts(&self) -> Option<&[Vec<usize>]> {
        match &self.law {
            OffspringLaw::WrightFisher { counts } | OffspringLaw::Mutation { counts } => Some(counts),
            OffspringLaw::Custom { .. } => None,
        }
    }

    pub fn count(&self, k: usize, l: usize) -> Option<usize> {
        self.counts().map(|c| c[k][l])
    }

    pub fn is_exact(&self) -> bool {
        match &self.law {
            OffspringLaw::Custom { moments, .. } => moments.is_some(),
            _ => true,
        }
    }

    /// Short description used in reports.
    pub fn describe(&self) -> String {
        let sizes: Vec<String> = self.sizes.iter().map(|n| n.to_string()).collect();
        match self.counts() {
            Some(c) => {
                let rows: Vec<String> = c
                    .iter()
                    .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
                    .collect();
                format!("{} N=({}) counts=({})", self.law_name(), sizes.join(","), rows.join("/"))
            }
            None => format!("{} N=({})", self.law_name(), sizes.join(",")),
        }
    }

    fn check_slots(&self, t: &MergeTensor) -> Result<()> {
        if t.d() != self.d {
            return Err(Error::InvalidArgument(format!(
                "tensor has d = {}, model has d = {}",
                t.d(),
                self.d
            )));
        }
        for k in 0..self.d {
            if t.j()[k] > self.sizes[k] {
                return domain(format!(
                    "j_{} = {} exceeds N_{} = {}",
                    k + 1,
                    t.j()[k],
                    k + 1,
                    self.sizes[k]
                ));
            }
        }
        Ok(())
    }

    /// Exact `E(prod_{k,l,s} (nu_{k,l,s})_{i_{k,l,s}})`.
    pub fn exact_factorial_moment(&self, t: &MergeTensor) -> Result<Rational> {
        self.check_slots(t)?;
        let d = self.d;
        match &self.law {
            OffspringLaw::WrightFisher { counts } => {
                let mut num = num_bigint::BigInt::one();
                let mut den = num_bigint::BigInt::one();
                for k in 0..d {
                    for l in 0..d {
                        let i = t.group_total(k, l);
                        num *= falling(counts[k][l], i);
                        den *= pow(self.sizes[k], i);
                    }
                }
                Ok(Rational::new(num, den))
            }
            OffspringLaw::Mutation { counts } => {
                for k in 0..d {
                    if (0..t.j()[k]).any(|s| t.slot_total(k, s) >= 2) {
                        return Ok(Rational::zero());
                    }
                }
                let mut acc = Rational::one();
                for k in 0..d {
                    let row: usize = (0..d).map(|l| t.group_total(k, l)).sum();
                    let mut num = num_bigint::BigInt::one();
                    for l in 0..d {
                        num *= falling(counts[k][l], t.group_total(k, l));
                    }
                    let den = falling(self.sizes[k], row);
                    if den.is_zero() {
                        return Ok(Rational::zero());
                    }
                    acc *= Rational::new(num, den);
                }
                Ok(acc)
            }
            OffspringLaw::Custom { moments, .. } => match moments {
                Some(oracle) => Ok(oracle.moment(t)),
                None => Err(Error::Unsupported(
                    "custom law has no closed-form moments; use a Monte-Carlo estimate".into(),
                )),
            },
        }
    }

    /// Exact value when available, otherwise a Monte-Carlo estimate.
    pub fn joint_factorial_moment(
        &self,
        t: &MergeTensor,
        reps: usize,
        rng: &mut dyn RngCore,
    ) -> Result<MomentValue> {
        if self.is_exact() {
            return self.exact_factorial_moment(t).map(MomentValue::Exact);
        }
        let (mean, std_err) = self.estimate_factorial_moment(t, reps, rng)?;
        Ok(MomentValue::Estimate { mean, std_err, reps })
    }

    /// Sample mean and standard error of the factorial product over `reps`
    /// independent generations.
    pub fn estimate_factorial_moment(
        &self,
        t: &MergeTensor,
        reps: usize,
        rng: &mut dyn RngCore,
    ) -> Result<(f64, f64)> {
        self.check_slots(t)?;
        if reps < 2 {
            return Err(Error::InvalidArgument("at least two replicates are needed".into()));
        }
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for r in 0..reps {
            let x = self.sample_generation(rng)?.factorial_product(t);
            let delta = x - mean;
            mean += delta / (r + 1) as f64;
            m2 += delta * (x - mean);
        }
        let var = m2 / (reps - 1) as f64;
        Ok((mean, (var / reps as f64).sqrt()))
    }

    /// One forward generation of offspring counts.
    pub fn sample_generation(&self, rng: &mut dyn RngCore) -> Result<GenerationSample> {
        let d = self.d;
        match &self.law {
            OffspringLaw::WrightFisher { counts } => {
                let mut g = GenerationSample::zeros(d, &self.sizes);
                for k in 0..d {
                    for l in 0..d {
                        for _ in 0..counts[k][l] {
                            let i = rng.random_range(0..self.sizes[k]);
                            g.add(k, l, i, 1);
                        }
                    }
                }
                Ok(g)
            }
            OffspringLaw::Mutation { counts } => {
                let mut g = GenerationSample::zeros(d, &self.sizes);
                for k in 0..d {
                    let mut labels: Vec<usize> = (0..d)
                        .flat_map(|l| std::iter::repeat_n(l, counts[k][l]))
                        .collect();
                    labels.shuffle(rng);
                    for (i, &l) in labels.iter().enumerate() {
                        g.add(k, l, i, 1);
                    }
                }
                Ok(g)
            }
            OffspringLaw::Custom { sampler, .. } => match sampler {
                Some(s) => Ok(s.sample(&self.sizes, rng)),
                None => Err(Error::Unsupported("custom law without a sampler".into())),
            },
        }
    }

    /// `m_{k,l} = N_{l,k} / N_k`, the probability that a type-`k` individual
    /// has a type-`l` parent.
    pub fn backward_mutation_matrix(&self) -> Result<Vec<Vec<Rational>>> {
        let counts = self
            .counts()
            .ok_or_else(|| Error::Unsupported("backward mutation matrix needs deterministic counts".into()))?;
        Ok((0..self.d)
            .map(|k| (0..self.d).map(|l| ratio(counts[l][k], self.sizes[k])).collect())
            .collect())
    }

    /// Checks the first and second moment identities and both chains of
    /// upper bounds on the coalescence probabilities.
    pub fn moment_identities_check(&self) -> Result<LawReport> {
        let counts = self
            .counts()
            .ok_or_else(|| Error::Unsupported("moment identities need deterministic counts".into()))?;
        let d = self.d;
        let mut report = LawReport::new("moment-identities", self.describe(), true);
        let single = |k: usize, parts: &[(usize, usize)]| -> MergeTensor {
            // one type-k slot with the given (type, multiplicity) entries
            let mut t = MergeTensor::empty(d).coalescence_extension(k, parts[0].0).unwrap();
            let mut first = true;
            for &(l, m) in parts {
                let start = usize::from(first);
                first = false;
                for _ in start..m {
                    t = t.increment(k, l, 0).unwrap();
                }
            }
            t
        };
        for k in 0..d {
            for l in 0..d {
                let mean = self.exact_factorial_moment(&single(k, &[(l, 1)]))?;
                let target = ratio(counts[k][l], self.sizes[k]);
                report.record_exact(&mean - &target, || {
                    format!("mean of nu_({},{},1): {mean} != {target}", k + 1, l + 1)
                });
                if self.sizes[k] < 2 {
                    report.notice(format!(
                        "N_{} = 1: second moment identity skipped for ({},{})",
                        k + 1,
                        k + 1,
                        l + 1
                    ));
                    continue;
                }
                let fact2 = self.exact_factorial_moment(&single(k, &[(l, 2)]))?;
                let second = &fact2 + &mean;
                let var = &second - &mean * &mean;
                let pair = MergeTensor::new(
                    (0..d).map(|q| if q == k { 2 } else { 0 }).collect(),
                    (0..d)
                        .map(|q| {
                            (0..d)
                                .map(|r| {
                                    if q != k {
                                        vec![]
                                    } else if r == l {
                                        vec![1, 1]
                                    } else {
                                        vec![0, 0]
                                    }
                                })
                                .collect()
                        })
                        .collect(),
                )?;
                let cross = self.exact_factorial_moment(&pair)?;
                // deterministic counts: Var(N_{k,l}) = 0
                let rhs = &target * &target - var / int(self.sizes[k] - 1);
                report.record_exact(&cross - &rhs, || {
                    format!("second moment identity for ({},{}): {cross} != {rhs}", k + 1, l + 1)
                });
            }
        }
        for k in 0..d {
            for l in 0..d {
                if self.sizes[l] < 2 {
                    report.notice(format!("N_{} = 1: bound on c_({},{}) skipped", l + 1, k + 1, l + 1));
                    continue;
                }
                let c = crate::ancestral::coalescence_probability(self, k, l, l)?;
                let mid = Rational::new(
                    falling(counts[k][l], 2),
                    falling(self.sizes[l], 2),
                );
                let top = ratio(counts[k][l], self.sizes[l]);
                record_leq(&mut report, &c, &mid, || format!("c_({},{}) <= E((N_kl)_2)/(N_l)_2", k + 1, l + 1));
                record_leq(&mut report, &mid, &top, || format!("E((N_kl)_2)/(N_l)_2 <= N_kl/N_l at ({},{})", k + 1, l + 1));
            }
        }
        for k in 0..d {
            for l1 in 0..d {
                for l2 in 0..d {
                    if l1 == l2 {
                        continue;
                    }
                    let c = crate::ancestral::coalescence_probability(self, k, l1, l2)?;
                    let mid = Rational::new(
                        (counts[k][l1] * counts[k][l2]).into(),
                        (self.sizes[l1] * self.sizes[l2]).into(),
                    );
                    let a = ratio(counts[k][l1], self.sizes[l1]);
                    let b = ratio(counts[k][l2], self.sizes[l2]);
                    let top = if a < b { a } else { b };
                    record_leq(&mut report, &c, &mid, || {
                        format!("c_({},{},{}) <= E(N_kl1 N_kl2)/(N_l1 N_l2)", k + 1, l1 + 1, l2 + 1)
                    });
                    record_leq(&mut report, &mid, &top, || {
                        format!("E(N_kl1 N_kl2)/(N_l1 N_l2) <= min ratio at ({},{},{})", k + 1, l1 + 1, l2 + 1)
                    });
                }
            }
        }
        Ok(report)
    }

    pub fn to_json(&self) -> Result<Value> {
        let counts = self
            .counts()
            .ok_or_else(|| Error::Unsupported("custom laws have no file form".into()))?;
        Ok(json!({
            "d": self.d,
            "N": self.sizes,
            "law": self.law_name(),
            "counts": counts,
        }))
    }

    /// Parses the model file format. Errors name the offending field.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("model: expected a JSON object".into()))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "d" | "N" | "law" | "counts") {
                return Err(Error::Parse(format!("model: unknown field '{key}'")));
            }
        }
        let d = obj
            .get("d")
            .ok_or_else(|| Error::Parse("model: missing field 'd'".into()))
            .and_then(|x| as_count(x, "d"))?;
        let sizes = obj
            .get("N")
            .ok_or_else(|| Error::Parse("model: missing field 'N'".into()))
            .and_then(|x| as_count_vec(x, "N"))?;
        if sizes.len() != d {
            return Err(Error::Parse(format!(
                "model field 'N': has {} entries but d = {d}",
                sizes.len()
            )));
        }
        let law = obj
            .get("law")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("model: field 'law' must be a string".into()))?;
        let counts_v = obj
            .get("counts")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("model: field 'counts' must be an array of rows".into()))?;
        if counts_v.len() != d {
            return Err(Error::Parse(format!(
                "model field 'counts': has {} rows but d = {d}",
                counts_v.len()
            )));
        }
        let counts = counts_v
            .iter()
            .enumerate()
            .map(|(k, row)| as_count_vec(row, &format!("counts[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        match law {
            "wright-fisher" => Self::wright_fisher(sizes, counts),
            "mutation" => Self::mutation(sizes, counts),
            "custom" => Err(Error::Unsupported(
                "custom laws are only available through the library API".into(),
            )),
            other => Err(Error::Parse(format!(
                "model field 'law': unknown law '{other}' (expected wright-fisher or mutation)"
            ))),
        }
    }
}

fn record_leq(report: &mut LawReport, a: &Rational, b: &Rational, case: impl FnOnce() -> String) {
    let excess = if a > b { a - b } else { Rational::zero() };
    report.record_exact(excess, case);
}

fn as_count(v: &Value, field: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Parse(format!("model field '{field}': expected a nonnegative integer")))
}

fn as_count_vec(v: &Value, field: &str) -> Result<Vec<usize>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Parse(format!("model field '{field}': expected an array")))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| as_count(x, &format!("{field}[{i}]")))
        .collect()
}

fn column_sums(counts: &[Vec<usize>]) -> Vec<usize> {
    let d = counts.len();
    (0..d)
        .map(|l| counts.iter().map(|row| row.get(l).copied().unwrap_or(0)).sum())
        .collect()
}

fn validate_counts(sizes: &[usize], counts: &[Vec<usize>], rows_too: bool) -> Result<()> {
    let d = sizes.len();
    if d == 0 {
        return Err(Error::InvalidModel("at least one type is required".into()));
    }
    if let Some(k) = sizes.iter().position(|&n| n == 0) {
        return Err(Error::InvalidModel(format!("N_{} must be at least 1", k + 1)));
    }
    if counts.len() != d || counts.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidModel(format!("counts must be a {d} x {d} matrix")));
    }
    for l in 0..d {
        let col: Vec<usize> = (0..d).map(|k| counts[k][l]).collect();
        let sum: usize = col.iter().sum();
        if sum != sizes[l] {
            let terms: Vec<String> = col.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidModel(format!(
                "column-sum constraint (sum over parent types k of N_(k,l) = N_l) violated, column {}: {} = {} != {}",
                l + 1,
                terms.join("+"),
                sum,
                sizes[l]
            )));
        }
    }
    if rows_too {
        for (k, row) in counts.iter().enumerate() {
            let sum: usize = row.iter().sum();
            if sum != sizes[k] {
                let terms: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                return Err(Error::InvalidModel(format!(
                    "row-sum constraint of the mutation law (sum over l of N_(k,l) = N_k) violated, row {}: {} = {} != {}",
                    k + 1,
                    terms.join("+"),
                    sum,
                    sizes[k]
                )));
            }
        }
    }
    Ok(())
}
