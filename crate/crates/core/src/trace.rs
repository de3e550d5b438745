//! Iteration records shared by both solvers.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
    DomainViolation,
    NumericFailure,
}

/// Termination test applied at every iterate, including `x⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopRule {
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Stop once `f − f*` falls to this level; needs a known optimal value.
    #[serde(default)]
    pub f_tol: Option<f64>,
}

fn default_grad_tol() -> f64 {
    1e-8
}

fn default_max_iter() -> usize {
    100_000
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { grad_tol: default_grad_tol(), max_iter: default_max_iter(), f_tol: None }
    }
}

impl StopRule {
    pub fn new(grad_tol: f64, max_iter: usize) -> Self {
        StopRule { grad_tol, max_iter, f_tol: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol >= 0.0 && self.grad_tol.is_finite()) {
            return Err(invalid("grad_tol must be a finite nonnegative number"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be positive"));
        }
        if let Some(t) = self.f_tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid("f_tol must be a finite nonnegative number"));
            }
        }
        Ok(())
    }

    /// `Some(status)` when iteration `k` is terminal.
    pub(crate) fn check(&self, k: usize, grad_norm: f64, gap: Option<f64>) -> Option<Status> {
        if grad_norm <= self.grad_tol {
            return Some(Status::Converged);
        }
        if let (Some(t), Some(g)) = (self.f_tol, gap) {
            if g <= t {
                return Some(Status::Converged);
            }
        }
        if k >= self.max_iter {
            return Some(Status::MaxIter);
        }
        None
    }
}

/// State at iterate `k`. Step quantities (`alpha`, `gamma`, `theta`, `l_k`)
/// are those used to move from `x^k` to `x^{k+1}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub f: f64,
    pub gap: Option<f64>,
    pub grad_norm: f64,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub l_k: Option<f64>,
    pub dist_opt: Option<f64>,
    pub lyap: Option<f64>,
    pub x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub status: Status,
}

/// Scalar columns of a trace, in file order.
pub const COLUMNS: [&str; 10] = [
    "k", "f", "gap", "grad_norm", "alpha", "gamma", "theta", "L_k", "dist_opt", "lyap",
];

impl TraceRecord {
    /// Value of a scalar column; `None` for unknown names, `Some(None)` for absent values.
    pub fn column(&self, name: &str) -> Option<Option<f64>> {
        Some(match name {
            "k" => Some(self.k as f64),
            "f" => Some(self.f),
            "gap" => self.gap,
            "grad_norm" => Some(self.grad_norm),
            "alpha" => self.alpha,
            "gamma" => self.gamma,
            "theta" => self.theta,
            "L_k" => self.l_k,
            "dist_opt" => self.dist_opt,
            "lyap" => self.lyap,
            _ => return None,
        })
    }
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace has at least one record")
    }

    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        self.records
            .iter()
            .map(|r| r.column(name).ok_or_else(|| invalid(format!("unknown trace column {name}"))))
            .collect()
    }

    /// Snapshots in order, `(k, x)`.
    pub fn snapshots(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.records.iter().filter_map(|r| r.x.as_deref().map(|x| (r.k, x)))
    }
}

pub(crate) fn snapshot_every(dim: usize, requested: Option<usize>) -> Result<usize> {
    match requested {
        Some(0) => Err(invalid("snapshot_every must be positive")),
        Some(n) => Ok(n),
        None => Ok(if dim <= 10 { 1 } else { 10 }),
    }
}
