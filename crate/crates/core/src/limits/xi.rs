//! Xi-measure rates on diagonal tensors with all entries at least 2.

use serde_json::{json, Value};

use super::rates::RateTable;
use super::completion::diagonal_tensors;
use crate::error::{invalid, Error, Result};
use crate::tensor::MergeTensor;

/// One atom `mass * delta_{(x, y)}` of a finite Xi-measure.
#[derive(Clone, Debug, PartialEq)]
pub struct XiAtom {
    pub mass: f64,
    /// Nonzero prefix of a ranked point of the simplex.
    pub x: Vec<f64>,
    /// 0-based labels, at least as long as `x`.
    pub y: Vec<usize>,
}

impl XiAtom {
    /// `(x, x) = sum_i x_i^2`.
    pub fn norm2(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum()
    }
}

/// Kingman weights plus finitely many atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct XiSpec {
    pub a: Vec<f64>,
    pub atoms: Vec<XiAtom>,
}

impl XiSpec {
    /// Validates and normalizes: trailing zeros of `x` are dropped.
    pub fn new(a: Vec<f64>, atoms: Vec<XiAtom>) -> Result<Self> {
        let d = a.len();
        if d == 0 {
            return invalid("Xi spec needs at least one type (a is empty)");
        }
        if let Some(k) = a.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return invalid(format!("a[{}] = {} must be finite and >= 0", k + 1, a[k]));
        }
        let mut clean = Vec::with_capacity(atoms.len());
        for (n, mut atom) in atoms.into_iter().enumerate() {
            let at = |msg: String| Error::InvalidArgument(format!("atoms[{n}]: {msg}"));
            if !(atom.mass.is_finite() && atom.mass > 0.0) {
                return Err(at(format!("mass {} must be positive", atom.mass)));
            }
            while atom.x.last() == Some(&0.0) {
                atom.x.pop();
            }
            if atom.x.is_empty() {
                return Err(at("x must have x_1 > 0".into()));
            }
            if atom.x.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(at("x entries must be finite and >= 0".into()));
            }
            if atom.x.windows(2).any(|w| w[1] > w[0]) {
                return Err(at("x must be nonincreasing".into()));
            }
            let sum: f64 = atom.x.iter().sum();
            if sum > 1.0 + 1e-12 {
                return Err(at(format!("sum of x is {sum} > 1")));
            }
            if atom.y.len() < atom.x.len() {
                return Err(at(format!(
                    "y has {} labels but x has {} nonzero coordinates",
                    atom.y.len(),
                    atom.x.len()
                )));
            }
            if let Some(&bad) = atom.y.iter().find(|&&k| k >= d) {
                return Err(at(format!("label {} out of range 1..={d}", bad + 1)));
            }
            atom.y.truncate(atom.x.len());
            clean.push(atom);
        }
        Ok(Self { a, atoms: clean })
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    /// `{"a":[..],"atoms":[{"mass":..,"x":[..],"y":[..]}]}` with 1-based labels.
    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |name: &str| v.get(name).ok_or_else(|| Error::Parse(format!("missing field /{name}")));
        let a: Vec<f64> = serde_json::from_value(field("a")?.clone())
            .map_err(|e| Error::Parse(format!("/a: {e}")))?;
        let mut atoms = Vec::new();
        if let Some(list) = v.get("atoms") {
            let list = list.as_array().ok_or_else(|| Error::Parse("/atoms must be an array".into()))?;
            for (n, item) in list.iter().enumerate() {
                let get = |name: &str| {
                    item.get(name)
                        .ok_or_else(|| Error::Parse(format!("missing field /atoms/{n}/{name}")))
                };
                let mass = get("mass")?
                    .as_f64()
                    .ok_or_else(|| Error::Parse(format!("/atoms/{n}/mass must be a number")))?;
                let x: Vec<f64> = serde_json::from_value(get("x")?.clone())
                    .map_err(|e| Error::Parse(format!("/atoms/{n}/x: {e}")))?;
                let y: Vec<usize> = serde_json::from_value(get("y")?.clone())
                    .map_err(|e| Error::Parse(format!("/atoms/{n}/y: {e}")))?;
                if y.contains(&0) {
                    return Err(Error::Parse(format!("/atoms/{n}/y: labels are 1-based")));
                }
                atoms.push(XiAtom {
                    mass,
                    x,
                    y: y.into_iter().map(|k| k - 1).collect(),
                });
            }
        }
        Self::new(a, atoms)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "a": self.a,
            "atoms": self.atoms.iter().map(|at| json!({
                "mass": at.mass,
                "x": at.x,
                "y": at.y.iter().map(|k| k + 1).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn diagonal_slots(t: &MergeTensor, min_entry: usize) -> Result<Vec<(usize, usize)>> {
    if !t.is_diagonal() {
        return invalid(format!("{t} is not diagonal"));
    }
    let mut slots = Vec::new();
    for k in 0..t.d() {
        for &i in t.get(k, k) {
            if i < min_entry {
                return invalid(format!("{t} has an entry {i} < {min_entry}"));
            }
            slots.push((k, i));
        }
    }
    Ok(slots)
}

/// `phi_j(T) = sum_k a_k 1{j = e_k, i_{k,1} = 2}
///   + sum_atoms mass / (x,x) * sum_{m distinct} prod x_{m_{k,s}}^{i_{k,s}} 1{y_{m_{k,s}} = k}`.
pub fn xi_rate(spec: &XiSpec, t: &MergeTensor) -> Result<f64> {
    if t.d() != spec.d() {
        return invalid(format!("tensor has d = {}, spec has d = {}", t.d(), spec.d()));
    }
    let slots = diagonal_slots(t, 2)?;
    if slots.is_empty() {
        return invalid("T_0 is the identity tensor; it has no off-identity rate");
    }
    let mut rate = 0.0;
    if let [(k, 2)] = slots[..] {
        rate += spec.a[k];
    }
    for atom in &spec.atoms {
        let mut used = vec![false; atom.x.len()];
        let sum = distinct_sum(atom, &slots, &mut used);
        rate += atom.mass * sum / atom.norm2();
    }
    Ok(rate)
}

/// Sum over injective assignments of slots to coordinates with matching label.
fn distinct_sum(atom: &XiAtom, slots: &[(usize, usize)], used: &mut [bool]) -> f64 {
    let Some((&(k, i), rest)) = slots.split_first() else {
        return 1.0;
    };
    let mut acc = 0.0;
    for m in 0..atom.x.len() {
        if used[m] || atom.y[m] != k {
            continue;
        }
        used[m] = true;
        acc += atom.x[m].powi(i as i32) * distinct_sum(atom, rest, used);
        used[m] = false;
    }
    acc
}

/// `xi_rate` on every diagonal tensor with entries `>= 2` and at most
/// `depth` lineages; the input expected by the completion.
pub fn xi_rate_table(spec: &XiSpec, depth: usize) -> Result<RateTable> {
    let mut table = RateTable::new(spec.d());
    for t in diagonal_tensors(spec.d(), depth, 2) {
        if t.num_slots() == 0 {
            continue;
        }
        table.insert(&t, xi_rate(spec, &t)?)?;
    }
    Ok(table)
}

/// A finitely supported measure on `Delta_j`; `points[p].1` lists
/// `x_{k,s}` in row-major slot order.
#[derive(Clone, Debug, Default)]
pub struct FiniteMeasure {
    pub points: Vec<(f64, Vec<f64>)>,
}

/// `int prod_{k,s} x_{k,s}^{i_{k,s} - 2} dQ_j`, with `0^0 = 1`.
pub fn qj_moment(q: &FiniteMeasure, t: &MergeTensor) -> Result<f64> {
    let slots = diagonal_slots(t, 2)?;
    let mut total = 0.0;
    for (p, (w, x)) in q.points.iter().enumerate() {
        if x.len() != slots.len() {
            return invalid(format!(
                "point {p} has {} coordinates, tensor has {} slots",
                x.len(),
                slots.len()
            ));
        }
        let mut prod = 1.0;
        for (&(_, i), &xv) in slots.iter().zip(x) {
            prod *= xv.powi(i as i32 - 2);
        }
        total += w * prod;
    }
    Ok(total)
}

/// The moment integral next to the rate it should reproduce.
pub fn qj_moment_check(q: &FiniteMeasure, spec: &XiSpec, t: &MergeTensor) -> Result<(f64, f64)> {
    Ok((qj_moment(q, t)?, xi_rate(spec, t)?))
}
