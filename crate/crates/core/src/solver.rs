//! Feasibility classification and exact solution of requirement systems.
//!
//! Both solvers and the rank test work on an equilibrated copy of the
//! system: every row and every column is scaled by a power of two so its
//! largest entry lies in `[0.5, 1)`. Powers of two keep the scaling exact,
//! and without it the `w^(2n)` spread of the raw entries swamps any
//! relative pivot tolerance.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Compensator, MonicPolynomial};
use crate::system::RequirementSystem;

/// Tolerances used by classification and solving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Pivot threshold relative to the largest equilibrated entry.
    pub rank: f64,
    /// Accepted solutions satisfy `|A x - b|_inf <= residual * (1 + |b|_inf)`.
    pub residual: f64,
    /// Pivot-ratio condition estimate above which a warning is attached.
    pub condition_warning: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-10,
            residual: 1e-9,
            condition_warning: 1e12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Unique,
    UnderdeterminedInfinite,
    OverdeterminedInfeasible,
    RankDeficientConsistent,
    RankDeficientInconsistent,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Unique => "UNIQUE",
            Classification::UnderdeterminedInfinite => "UNDERDETERMINED_INFINITE",
            Classification::OverdeterminedInfeasible => "OVERDETERMINED_INFEASIBLE",
            Classification::RankDeficientConsistent => "RANK_DEFICIENT_CONSISTENT",
            Classification::RankDeficientInconsistent => "RANK_DEFICIENT_INCONSISTENT",
        }
    }

    /// True for the classes with infinitely many solutions.
    pub fn is_infinite(&self) -> bool {
        matches!(
            self,
            Classification::UnderdeterminedInfinite | Classification::RankDeficientConsistent
        )
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Requirement count.
    pub r: usize,
    /// Compensator order.
    pub n: usize,
    pub rank: usize,
    pub consistent: bool,
    pub classification: Classification,
    /// Largest over smallest pivot magnitude of the equilibrated matrix.
    pub condition_estimate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Cramer,
    Elimination,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveMethod::Cramer => f.write_str("cramer"),
            SolveMethod::Elimination => f.write_str("elimination"),
        }
    }
}

/// Solver selection; `Auto` uses Cramer's rule below order 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Cramer,
    Elimination,
    #[default]
    Auto,
}

impl SolverChoice {
    pub fn resolve(self, order: usize) -> SolveMethod {
        match self {
            SolverChoice::Cramer => SolveMethod::Cramer,
            SolverChoice::Elimination => SolveMethod::Elimination,
            SolverChoice::Auto if order >= 4 => SolveMethod::Elimination,
            SolverChoice::Auto => SolveMethod::Cramer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub compensator: Compensator,
    pub residual_norm: f64,
    pub method: SolveMethod,
    pub admissibility_warnings: Vec<String>,
}

/// Power-of-two scale that brings `max_abs` into `[0.5, 1)`.
fn pow2_scale(max_abs: f64) -> f64 {
    if max_abs == 0.0 || !max_abs.is_finite() {
        return 1.0;
    }
    let (_, exp) = frexp(max_abs);
    (-(exp as f64)).exp2()
}

/// Binary exponent `e` with `x = m * 2^e`, `0.5 <= |m| < 1`.
fn frexp(x: f64) -> (f64, i32) {
    let exp = x.abs().log2().floor() as i32 + 1;
    let mut m = x / (exp as f64).exp2();
    let mut e = exp;
    // log2 can be off by one near exact powers of two.
    while m.abs() >= 1.0 {
        m /= 2.0;
        e += 1;
    }
    while m.abs() < 0.5 {
        m *= 2.0;
        e -= 1;
    }
    (m, e)
}

/// Row- and column-equilibrated copy of a system.
///
/// `scaled_a = R A C`, `scaled_b = s R b`; a solution `y` of the scaled
/// system maps back via `x = C y / s`.
struct Equilibrated {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    col_scale: Vec<f64>,
    rhs_scale: f64,
}

impl Equilibrated {
    fn new(sys: &RequirementSystem) -> Self {
        let mut a: Vec<Vec<f64>> = sys.matrix().to_vec();
        let mut b: Vec<f64> = sys.rhs().to_vec();
        for (row, rhs) in a.iter_mut().zip(b.iter_mut()) {
            let s = pow2_scale(row.iter().fold(0.0, |m, v| m.max(v.abs())));
            row.iter_mut().for_each(|v| *v *= s);
            *rhs *= s;
        }
        let cols = sys.cols();
        let mut col_scale = vec![1.0; cols];
        for (j, scale) in col_scale.iter_mut().enumerate() {
            *scale = pow2_scale(a.iter().fold(0.0, |m, row| m.max(row[j].abs())));
            a.iter_mut().for_each(|row| row[j] *= *scale);
        }
        let rhs_scale = pow2_scale(b.iter().fold(0.0, |m, v| m.max(v.abs())));
        b.iter_mut().for_each(|v| *v *= rhs_scale);
        Self {
            a,
            b,
            col_scale,
            rhs_scale,
        }
    }

    fn unscale(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.col_scale)
            .map(|(v, c)| v * c / self.rhs_scale)
            .collect()
    }
}

/// Rank, consistency and pivot magnitudes from complete-pivoting
/// elimination of the augmented equilibrated system.
struct RankInfo {
    rank: usize,
    consistent: bool,
    pivots: Vec<f64>,
}

fn rank_info(eq: &Equilibrated, rank_tol: f64) -> RankInfo {
    let rows = eq.a.len();
    let cols = eq.a[0].len();
    let mut a = eq.a.clone();
    let mut b = eq.b.clone();
    let max_entry = a
        .iter()
        .flatten()
        .chain(&b)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = rank_tol * max_entry;
    let mut col_perm: Vec<usize> = (0..cols).collect();
    let mut pivots = Vec::new();
    let mut rank = 0;

    while rank < rows.min(cols) {
        let mut best = (rank, rank, 0.0f64);
        for (i, row) in a.iter().enumerate().skip(rank) {
            for j in rank..cols {
                let v = row[col_perm[j]].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        a.swap(rank, best.0);
        b.swap(rank, best.0);
        col_perm.swap(rank, best.1);
        let pc = col_perm[rank];
        let pivot = a[rank][pc];
        pivots.push(pivot.abs());
        for i in rank + 1..rows {
            let f = a[i][pc] / pivot;
            if f == 0.0 {
                continue;
            }
            for &c in &col_perm[rank..cols] {
                a[i][c] -= f * a[rank][c];
            }
            b[i] -= f * b[rank];
        }
        rank += 1;
    }
    let consistent = b[rank..].iter().all(|v| v.abs() <= tol);
    RankInfo {
        rank,
        consistent,
        pivots,
    }
}

/// Classify a requirement system by rank and consistency.
///
/// * `r = n`, full rank: [`Classification::Unique`].
/// * `r < n`: underdetermined; infinite solutions when consistent.
/// * `r > n` and inconsistent: [`Classification::OverdeterminedInfeasible`].
/// * Everything else is a rank-deficient class; a consistent overdetermined
///   system lands in [`Classification::RankDeficientConsistent`].
pub fn classify_feasibility(sys: &RequirementSystem) -> FeasibilityReport {
    classify_with(sys, &Tolerances::default())
}

pub fn classify_with(sys: &RequirementSystem, tol: &Tolerances) -> FeasibilityReport {
    let eq = Equilibrated::new(sys);
    let info = rank_info(&eq, tol.rank);
    let r = sys.requirement_count();
    let n = sys.order();
    let full = info.rank == 2 * n;
    let classification = match (r.cmp(&n), info.consistent) {
        (std::cmp::Ordering::Equal, true) if full => Classification::Unique,
        (std::cmp::Ordering::Less, true) => Classification::UnderdeterminedInfinite,
        (std::cmp::Ordering::Greater, false) => Classification::OverdeterminedInfeasible,
        (_, true) => Classification::RankDeficientConsistent,
        (_, false) => Classification::RankDeficientInconsistent,
    };
    let condition_estimate = match (
        info.pivots.iter().copied().reduce(f64::max),
        info.pivots.iter().copied().reduce(f64::min),
    ) {
        (Some(hi), Some(lo)) => Some(hi / lo),
        _ => None,
    };
    FeasibilityReport {
        r,
        n,
        rank: info.rank,
        consistent: info.consistent,
        classification,
        condition_estimate,
    }
}

fn singular(sys: &RequirementSystem, tol: &Tolerances) -> Error {
    Error::SingularSystem {
        classification: classify_with(sys, tol).classification,
    }
}

/// Determinant by fraction-free (Bareiss) elimination with row pivoting.
///
/// Returns `None` when an elimination pivot falls below `tol`.
fn bareiss_det(mut m: Vec<Vec<f64>>, tol: f64) -> Option<f64> {
    let n = m.len();
    let mut sign = 1.0;
    let mut prev = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        // m[k][k] / prev is the ordinary Gaussian pivot.
        if (m[p][k] / prev).abs() <= tol {
            return None;
        }
        if p != k {
            m.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[k][k] * m[i][j] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0.0;
        }
        prev = m[k][k];
    }
    Some(sign * m[n - 1][n - 1])
}

fn check_square(sys: &RequirementSystem, tol: &Tolerances) -> Result<()> {
    if sys.requirement_count() != sys.order() {
        return Err(singular(sys, tol));
    }
    Ok(())
}

/// Solve a square system by Cramer's rule, with one refinement step whose
/// correction is also obtained by Cramer's rule.
pub fn solve_cramer(sys: &RequirementSystem) -> Result<SolveResult> {
    solve_cramer_with(sys, &Tolerances::default())
}

pub fn solve_cramer_with(sys: &RequirementSystem, tol: &Tolerances) -> Result<SolveResult> {
    check_square(sys, tol)?;
    let eq = Equilibrated::new(sys);
    let pivot_tol = tol.rank * max_abs(&eq.a);
    let det = bareiss_det(eq.a.clone(), pivot_tol).ok_or_else(|| singular(sys, tol))?;
    let cramer = |rhs: &[f64]| -> Vec<f64> {
        (0..rhs.len())
            .map(|j| {
                let mut replaced = eq.a.clone();
                for (row, b) in replaced.iter_mut().zip(rhs) {
                    row[j] = *b;
                }
                // Column j replaced by the rhs may legitimately be singular.
                bareiss_det(replaced, 0.0).unwrap_or(0.0) / det
            })
            .collect()
    };
    let mut y = cramer(&eq.b);
    let residual = compensated_residuals(&eq.a, &y, &eq.b);
    let correction = cramer(&residual);
    y.iter_mut().zip(&correction).for_each(|(v, d)| *v += d);
    finish(sys, eq.unscale(&y), SolveMethod::Cramer, tol)
}

/// Solve a square system by partial-pivoting elimination followed by one
/// step of iterative refinement with a compensated residual.
pub fn solve_elimination(sys: &RequirementSystem) -> Result<SolveResult> {
    solve_elimination_with(sys, &Tolerances::default())
}

pub fn solve_elimination_with(sys: &RequirementSystem, tol: &Tolerances) -> Result<SolveResult> {
    check_square(sys, tol)?;
    let eq = Equilibrated::new(sys);
    let pivot_tol = tol.rank * max_abs(&eq.a);
    let lu = Lu::factor(eq.a.clone(), pivot_tol).ok_or_else(|| singular(sys, tol))?;
    let mut y = lu.solve(&eq.b);

    let residual = compensated_residuals(&eq.a, &y, &eq.b);
    let correction = lu.solve(&residual);
    y.iter_mut().zip(&correction).for_each(|(v, d)| *v += d);

    finish(sys, eq.unscale(&y), SolveMethod::Elimination, tol)
}

/// Dispatch on a [`SolverChoice`].
pub fn solve(
    sys: &RequirementSystem,
    choice: SolverChoice,
    tol: &Tolerances,
) -> Result<SolveResult> {
    match choice.resolve(sys.order()) {
        SolveMethod::Cramer => solve_cramer_with(sys, tol),
        SolveMethod::Elimination => solve_elimination_with(sys, tol),
    }
}

fn max_abs(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
}

fn finish(
    sys: &RequirementSystem,
    x: Vec<f64>,
    method: SolveMethod,
    tol: &Tolerances,
) -> Result<SolveResult> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(singular(sys, tol));
    }
    let residual_norm = sys.residual_inf_norm(&x);
    let bound = tol.residual * (1.0 + sys.rhs_inf_norm());
    if residual_norm > bound {
        return Err(Error::ResidualTooLarge {
            residual: residual_norm,
            bound,
        });
    }
    let n = sys.order();
    let compensator = Compensator::new(
        MonicPolynomial::new(x[..n].to_vec())?,
        MonicPolynomial::new(x[n..].to_vec())?,
    )?;

    let mut warnings = Vec::new();
    for (name, coeffs) in [
        ("b", compensator.numerator().coeffs()),
        ("a", compensator.denominator().coeffs()),
    ] {
        for (i, c) in coeffs.iter().enumerate() {
            if *c < 0.0 {
                warnings.push(format!("{name}{} = {c} is negative", i + 1));
            }
        }
    }
    if let Some(cond) = classify_with(sys, tol).condition_estimate {
        if cond > tol.condition_warning {
            warnings.push(format!("system is ill-conditioned (pivot ratio {cond:e})"));
        }
    }

    Ok(SolveResult {
        compensator,
        residual_norm,
        method,
        admissibility_warnings: warnings,
    })
}

fn compensated_residuals(a: &[Vec<f64>], x: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(row, rhs)| compensated_residual(row, x, *rhs))
        .collect()
}

/// `b - row . x` accumulated in doubled precision (Ogita-Rump-Oishi Dot2).
fn compensated_residual(row: &[f64], x: &[f64], b: f64) -> f64 {
    let mut sum = b;
    let mut err = 0.0;
    for (a, v) in row.iter().zip(x) {
        let p = -a * v;
        let pe = (-a).mul_add(*v, -p);
        let s = sum + p;
        let z = s - sum;
        let se = (sum - (s - z)) + (p - z);
        sum = s;
        err += pe + se;
    }
    sum + err
}

/// Partial-pivoting LU factorization, `P A = L U` stored in place.
struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl Lu {
    #[allow(clippy::needless_range_loop)]
    fn factor(mut a: Vec<Vec<f64>>, tol: f64) -> Option<Self> {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
            if a[p][k].abs() <= tol {
                return None;
            }
            a.swap(p, k);
            perm.swap(p, k);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                a[i][k] = f;
                for j in k + 1..n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
        Some(Self { lu: a, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[i][j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[i][j] * y[j];
            }
            y[i] /= self.lu[i][i];
        }
        y
    }
}
