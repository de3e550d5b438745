//! Objective oracles with analytically controlled ground truth.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{all_finite, dist, dot, norm};

/// Closed ball used as the region for moduli and inequality checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Region {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("region radius must be positive, got {radius}")));
        }
        if center.is_empty() || !all_finite(&center) {
            return Err(invalid("region center must be a nonempty finite vector"));
        }
        Ok(Region { center, radius })
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Region::new(vec![0.0; dim], radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Closed-ball membership with a relative slack of a few ulps.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.center.len() && dist(x, &self.center) <= self.radius * (1.0 + 1e-12)
    }
}

/// Known optimum and moduli. `region == None` means the moduli hold globally.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub f_star: Option<f64>,
    pub x_star: Option<Vec<f64>>,
    pub nu: Option<f64>,
    pub holder_l: Option<f64>,
    pub mu: Option<f64>,
    pub kl_theta: Option<f64>,
    pub kl_rho: Option<f64>,
    pub region: Option<Region>,
}

/// Value/gradient oracle over an open domain.
///
/// Implementations are immutable after construction and `eval` is
/// deterministic, so one instance may be shared across threads.
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }

    /// Value and gradient. Errors with [`Error::DomainViolation`] outside the domain.
    fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;

    fn truth(&self) -> &GroundTruth;

    /// `f(x) - f*` given `value = f(x)`. Overridden where a cancellation-free form exists.
    fn gap(&self, _x: &[f64], value: f64) -> Option<f64> {
        self.truth().f_star.map(|fs| value - fs)
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.0)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval(x)?.1)
    }
}

fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: x.len() });
    }
    Ok(())
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let m = rows.len();
    if m == 0 {
        return Err(invalid("matrix must have at least one row"));
    }
    let n = rows[0].len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(invalid("matrix rows must be nonempty and of equal length"));
    }
    if rows.iter().any(|r| !all_finite(r)) {
        return Err(invalid("matrix entries must be finite"));
    }
    Ok(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

/// `½xᵀAx − bᵀx` with `A` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct Quadratic {
    a: DMatrix<f64>,
    b: Vec<f64>,
    truth: GroundTruth,
}

impl Quadratic {
    pub fn new(a: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        let a = rows_to_matrix(a)?;
        let n = a.nrows();
        if a.ncols() != n {
            return Err(invalid("quadratic matrix must be square"));
        }
        if b.len() != n || !all_finite(&b) {
            return Err(invalid("quadratic vector must be finite and match the matrix size"));
        }
        let scale = a.amax().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                    return Err(invalid("quadratic matrix must be symmetric"));
                }
            }
        }
        let eig = a.clone().symmetric_eigen();
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        if lo <= 0.0 {
            return Err(invalid(format!(
                "quadratic matrix must be positive definite (smallest eigenvalue {lo})"
            )));
        }
        let chol = a
            .clone()
            .cholesky()
            .ok_or_else(|| invalid("quadratic matrix is not numerically positive definite"))?;
        let x_star = chol.solve(&DVector::from_column_slice(&b));
        let x_star: Vec<f64> = x_star.iter().copied().collect();
        let f_star = -0.5 * dot(&b, &x_star);
        let truth = GroundTruth {
            f_star: Some(f_star),
            x_star: Some(x_star),
            nu: Some(1.0),
            holder_l: Some(hi),
            mu: Some(lo),
            kl_theta: Some(0.5),
            kl_rho: Some((0.5 / lo).sqrt()),
            region: None,
        };
        Ok(Quadratic { a, b, truth })
    }

    pub fn diagonal(diag: &[f64], b: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { diag[i] } else { 0.0 }).collect())
            .collect();
        Quadratic::new(&rows, b)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.a.nrows())
            .map(|i| (0..self.a.ncols()).map(|j| self.a[(i, j)] * x[j]).sum())
            .collect()
    }
}

impl Objective for Quadratic {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.b.len()
    }

    fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.dim(), x)?;
        let ax = self.apply(x);
        let value = 0.5 * dot(x, &ax) - dot(&self.b, x);
        let grad = ax.iter().zip(&self.b).map(|(p, q)| p - q).collect();
        Ok((value, grad))
    }

    fn truth(&self) -> &GroundTruth {
        &self.truth
    }

    fn gap(&self, x: &[f64], _value: f64) -> Option<f64> {
        let xs = self.truth.x_star.as_ref()?;
        let d: Vec<f64> = x.iter().zip(xs).map(|(p, q)| p - q).collect();
        Some(0.5 * dot(&d, &self.apply(&d)))
    }
}

/// `‖x‖^{1+ν}/(1+ν)`, whose gradient is globally ν-Hölder with modulus `2^{1−ν}`.
#[derive(Debug, Clone)]
pub struct PowerNorm {
    nu: f64,
    dim: usize,
    truth: GroundTruth,
}

impl PowerNorm {
    pub fn new(nu: f64, dim: usize) -> Result<Self> {
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(invalid(format!("power-norm exponent must lie in (0,1], got {nu}")));
        }
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let theta = nu / (1.0 + nu);
        let truth = GroundTruth {
            f_star: Some(0.0),
            x_star: Some(vec![0.0; dim]),
            nu: Some(nu),
            holder_l: Some(2f64.powf(1.0 - nu)),
            mu: if nu == 1.0 { Some(1.0) } else { None },
            kl_theta: Some(theta),
            // f^θ = (1+ν)^{-θ} ‖x‖^ν and ‖∇f‖ = ‖x‖^ν
            kl_rho: Some((1.0 + nu).powf(-theta)),
            region: None,
        };
        Ok(PowerNorm { nu, dim, truth })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

impl Objective for PowerNorm {
    fn name(&self) -> &str {
        "power_norm"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.dim, x)?;
        let r = norm(x);
        if r == 0.0 {
            return Ok((0.0, vec![0.0; self.dim]));
        }
        let value = r.powf(1.0 + self.nu) / (1.0 + self.nu);
        let s = if self.nu == 1.0 { 1.0 } else { r.powf(self.nu - 1.0) };
        Ok((value, x.iter().map(|v| s * v).collect()))
    }

    fn truth(&self) -> &GroundTruth {
        &self.truth
    }

    fn gap(&self, _x: &[f64], value: f64) -> Option<f64> {
        Some(value)
    }
}

/// `log Σᵢ exp(⟨aᵢ,x⟩ + bᵢ)`.
///
/// When `b = 0` and the rows are closed under negation the objective is even,
/// so the origin is a minimizer with value `log m`; that case carries ground truth.
#[derive(Debug, Clone)]
pub struct LogSumExp {
    rows: Vec<Vec<f64>>,
    b: Vec<f64>,
    dim: usize,
    truth: GroundTruth,
}

impl LogSumExp {
    pub fn new(a: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        rows_to_matrix(a)?;
        let dim = a[0].len();
        if b.len() != a.len() || !all_finite(&b) {
            return Err(invalid("log-sum-exp offsets must be finite, one per row"));
        }
        let symmetric = b.iter().all(|&v| v == 0.0)
            && a.iter().all(|r| {
                let neg: Vec<f64> = r.iter().map(|v| -v).collect();
                a.contains(&neg)
            });
        let truth = if symmetric {
            GroundTruth {
                f_star: Some((a.len() as f64).ln()),
                x_star: Some(vec![0.0; dim]),
                nu: Some(1.0),
                ..GroundTruth::default()
            }
        } else {
            GroundTruth { nu: Some(1.0), ..GroundTruth::default() }
        };
        Ok(LogSumExp { rows: a.to_vec(), b, dim, truth })
    }

    /// Rows `±(1,1)`, `±(1,−1)`: minimizer at the origin, `f* = log 4`.
    pub fn symmetric_2d() -> Self {
        let rows = vec![
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
        ];
        LogSumExp::new(&rows, vec![0.0; 4]).expect("static instance")
    }

    fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().zip(&self.b).map(|(r, bi)| dot(r, x) + bi).collect()
    }
}

impl Objective for LogSumExp {
    fn name(&self) -> &str {
        "log_sum_exp"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.dim, x)?;
        let z = self.logits(x);
        let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = z.iter().map(|v| (v - zmax).exp()).collect();
        let total: f64 = w.iter().sum();
        let value = zmax + total.ln();
        let mut grad = vec![0.0; self.dim];
        for (r, wi) in self.rows.iter().zip(&w) {
            let p = wi / total;
            for (g, a) in grad.iter_mut().zip(r) {
                *g += p * a;
            }
        }
        Ok((value, grad))
    }

    fn truth(&self) -> &GroundTruth {
        &self.truth
    }

    fn gap(&self, x: &[f64], value: f64) -> Option<f64> {
        let fs = self.truth.f_star?;
        let z = self.logits(x);
        if z.iter().any(|v| v.abs() > 1.0) {
            return Some(value - fs);
        }
        // log(mean(exp z)) = log1p(mean(expm1 z))
        let m = z.len() as f64;
        Some((z.iter().map(|v| v.exp_m1()).sum::<f64>() / m).ln_1p())
    }
}

/// Poisson linear inverse objective `Σᵢ ⟨aᵢ,x⟩ − bᵢ log⟨aᵢ,x⟩` on `{Ax > 0}`.
#[derive(Debug, Clone)]
pub struct Poisson {
    rows: Vec<Vec<f64>>,
    b: Vec<f64>,
    dim: usize,
    truth: GroundTruth,
}

impl Poisson {
    pub fn new(a: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        rows_to_matrix(a)?;
        if a.iter().any(|r| r.iter().any(|&v| v < 0.0)) {
            return Err(invalid("Poisson matrix must be nonnegative"));
        }
        if a.iter().any(|r| r.iter().all(|&v| v == 0.0)) {
            return Err(invalid("Poisson matrix rows must be nonzero"));
        }
        if b.len() != a.len() || b.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(invalid("Poisson observations must be positive, one per row"));
        }
        let dim = a[0].len();
        Ok(Poisson {
            rows: a.to_vec(),
            b,
            dim,
            truth: GroundTruth { nu: Some(1.0), ..GroundTruth::default() },
        })
    }

    /// Observations generated as `b = A x_true`; with `A` of full column rank
    /// `x_true` is the unique minimizer.
    pub fn from_solution(a: &[Vec<f64>], x_true: Vec<f64>) -> Result<Self> {
        let b: Vec<f64> = a.iter().map(|r| dot(r, &x_true)).collect();
        let mut p = Poisson::new(a, b)?;
        let mat = rows_to_matrix(a)?;
        if mat.rank(1e-12) < p.dim {
            return Err(invalid("Poisson matrix must have full column rank to pin the minimizer"));
        }
        let f_star = p.eval(&x_true)?.0;
        p.truth.f_star = Some(f_star);
        p.truth.x_star = Some(x_true);
        Ok(p)
    }

    /// `A = [[1,0],[0,1],[1,1]]`, `x* = (1,1)`.
    pub fn small_2d() -> Self {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        Poisson::from_solution(&rows, vec![1.0, 1.0]).expect("static instance")
    }

    fn predictions(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| dot(r, x)).collect()
    }
}

/// `d − log(1+d)` without cancellation near zero.
fn excess_log(d: f64) -> f64 {
    if d.abs() < 1e-2 {
        let mut term = d * d;
        let mut acc = 0.0;
        for k in 2..16 {
            acc += term / k as f64 * if k % 2 == 0 { 1.0 } else { -1.0 };
            term *= d;
        }
        acc
    } else {
        d - d.ln_1p()
    }
}

impl Objective for Poisson {
    fn name(&self) -> &str {
        "poisson"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dim && all_finite(x) && self.predictions(x).iter().all(|&t| t > 0.0)
    }

    fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.dim, x)?;
        let t = self.predictions(x);
        if t.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::DomainViolation);
        }
        let value = t.iter().zip(&self.b).map(|(ti, bi)| ti - bi * ti.ln()).sum();
        let mut grad = vec![0.0; self.dim];
        for ((r, ti), bi) in self.rows.iter().zip(&t).zip(&self.b) {
            let w = 1.0 - bi / ti;
            for (g, a) in grad.iter_mut().zip(r) {
                *g += w * a;
            }
        }
        Ok((value, grad))
    }

    fn truth(&self) -> &GroundTruth {
        &self.truth
    }

    fn gap(&self, x: &[f64], value: f64) -> Option<f64> {
        let xs = self.truth.x_star.as_ref()?;
        let t_star = self.predictions(xs);
        if t_star.iter().zip(&self.b).any(|(p, q)| p != q) {
            return self.truth.f_star.map(|fs| value - fs);
        }
        let t = self.predictions(x);
        Some(
            t.iter()
                .zip(&self.b)
                .map(|(ti, bi)| bi * excess_log((ti - bi) / bi))
                .sum(),
        )
    }
}

/// Central differences `(f(x+heᵢ) − f(x−heᵢ))/(2h)`.
pub fn finite_diff_gradient(obj: &dyn Objective, x: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(invalid("finite-difference step must be positive"));
    }
    check_dim(obj.dim(), x)?;
    let mut out = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        if !obj.in_domain(&probe) {
            return Err(Error::DomainViolation);
        }
        let fp = obj.value(&probe)?;
        probe[i] = x[i] - h;
        if !obj.in_domain(&probe) {
            return Err(Error::DomainViolation);
        }
        let fm = obj.value(&probe)?;
        probe[i] = x[i];
        out.push((fp - fm) / (2.0 * h));
    }
    Ok(out)
}

/// A shipped problem together with the region its diagnostics use.
pub struct Shipped {
    pub objective: Box<dyn Objective>,
    pub region: Region,
}

/// The analytically controlled problems exercised by the suite.
pub fn shipped() -> Vec<Shipped> {
    vec![
        Shipped {
            objective: Box::new(Quadratic::diagonal(&[1.0, 10.0], vec![0.0, 0.0]).expect("static")),
            region: Region::ball(2, 2.0).expect("static"),
        },
        Shipped {
            objective: Box::new(PowerNorm::new(0.5, 2).expect("static")),
            region: Region::ball(2, 1.0).expect("static"),
        },
        Shipped {
            objective: Box::new(LogSumExp::symmetric_2d()),
            region: Region::ball(2, 2.0).expect("static"),
        },
        Shipped {
            objective: Box::new(Poisson::small_2d()),
            region: Region::new(vec![1.0, 1.0], 0.5).expect("static"),
        },
    ]
}
