//! Pass/fail reports produced by the law checks.

use std::fmt;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::rational::{fraction_string, to_f64, Rational};

/// Largest deviation seen by a check.
#[derive(Clone, Debug, PartialEq)]
pub enum Residual {
    Exact(Rational),
    Float(f64),
}

impl Residual {
    pub fn zero_exact() -> Self {
        Residual::Exact(Rational::zero())
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Residual::Exact(r) => to_f64(r),
            Residual::Float(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Residual::Exact(r) => r.is_zero(),
            Residual::Float(x) => *x == 0.0,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Residual::Exact(r) => json!(fraction_string(r)),
            Residual::Float(x) => json!(x),
        }
    }
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Residual::Exact(r) => write!(f, "{}", fraction_string(r)),
            Residual::Float(x) => write!(f, "{x:e}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LawReport {
    pub law: String,
    pub instance: String,
    pub cases_checked: usize,
    pub worst_residual: Residual,
    pub violations: Vec<String>,
    /// Depth up to which the law has been verified, where that notion applies.
    pub certified_depth: Option<usize>,
    pub notices: Vec<String>,
}

/// Cap on stored violation descriptions; the count is still exact.
const MAX_LISTED: usize = 50;

impl LawReport {
    pub fn new(law: impl Into<String>, instance: impl Into<String>, exact: bool) -> Self {
        Self {
            law: law.into(),
            instance: instance.into(),
            cases_checked: 0,
            worst_residual: if exact {
                Residual::zero_exact()
            } else {
                Residual::Float(0.0)
            },
            violations: Vec::new(),
            certified_depth: None,
            notices: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Records one exact case. `residual` must be nonnegative; a nonzero value
    /// is a violation described by `case`.
    pub fn record_exact(&mut self, residual: Rational, case: impl FnOnce() -> String) {
        self.cases_checked += 1;
        let residual = residual.abs();
        if residual.is_zero() {
            return;
        }
        if let Residual::Exact(w) = &self.worst_residual {
            if residual > *w {
                self.worst_residual = Residual::Exact(residual.clone());
            }
        } else {
            let w = self.worst_residual.as_f64().max(to_f64(&residual));
            self.worst_residual = Residual::Float(w);
        }
        self.push_violation(case());
    }

    /// Records one floating-point case against `tol`.
    pub fn record_float(&mut self, residual: f64, tol: f64, case: impl FnOnce() -> String) {
        self.cases_checked += 1;
        let residual = residual.abs();
        let w = self.worst_residual.as_f64();
        if residual > w || residual.is_nan() {
            self.worst_residual = Residual::Float(residual);
        }
        if residual > tol || residual.is_nan() {
            self.push_violation(case());
        }
    }

    /// Records a boolean case with no meaningful residual.
    pub fn record_flag(&mut self, ok: bool, case: impl FnOnce() -> String) {
        self.cases_checked += 1;
        if !ok {
            self.push_violation(case());
        }
    }

    fn push_violation(&mut self, case: String) {
        if self.violations.len() < MAX_LISTED {
            self.violations.push(case);
        } else if self.violations.len() == MAX_LISTED {
            self.violations.push("further violations omitted".into());
        }
    }

    pub fn notice(&mut self, msg: impl Into<String>) {
        self.notices.push(msg.into());
    }

    /// Folds another report into this one (counts add, residual is the max).
    pub fn absorb(&mut self, other: LawReport) {
        self.cases_checked += other.cases_checked;
        self.worst_residual = match (&self.worst_residual, &other.worst_residual) {
            (Residual::Exact(a), Residual::Exact(b)) => Residual::Exact(a.max(b).clone()),
            (a, b) => Residual::Float(a.as_f64().max(b.as_f64())),
        };
        for v in other.violations {
            self.push_violation(v);
        }
        self.notices.extend(other.notices);
    }

    pub fn to_json(&self) -> Value {
        json!({
            "law": self.law,
            "instance": self.instance,
            "passed": self.passed(),
            "cases_checked": self.cases_checked,
            "worst_residual": self.worst_residual.to_json(),
            "violations": self.violations,
            "certified_depth": self.certified_depth,
            "notices": self.notices,
        })
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}]: {} ({} cases, worst residual {})",
            self.law,
            self.instance,
            if self.passed() { "pass" } else { "FAIL" },
            self.cases_checked,
            self.worst_residual
        )?;
        if let Some(first) = self.violations.first() {
            write!(f, "; first violation: {first}")?;
        }
        Ok(())
    }
}
