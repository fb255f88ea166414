//! Assembly of the real linear system induced by a set of requirements.
//!
//! Requirement `k` demands `N(j w_k) = G_k D(j w_k)` with
//! `G_k = g_k cos(p_k) + j g_k sin(p_k)`. Moving the unknown coefficients to
//! the left and the known monic leading terms to the right gives
//!
//! ```text
//! sum_i b_i (j w)^(n-i) - G_k sum_i a_i (j w)^(n-i) = (G_k - 1) (j w)^n
//! ```
//!
//! whose real and imaginary parts are two real equations in the `2n`
//! unknowns `[b1..bn, a1..an]`.

use crate::error::{Error, Result};
use crate::model::{check_distinct_frequencies, ComplexValue, RequirementPair};

/// `2r x 2n` real system with column order `[b1..bn, a1..an]`.
///
/// Rows `2k` and `2k + 1` (zero-based) are the real and imaginary parts of
/// requirement `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RequirementSystem {
    matrix: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    order: usize,
}

impl RequirementSystem {
    /// Wrap an explicit matrix. Rows must come in real/imaginary pairs and
    /// the column count must be even.
    pub fn from_parts(matrix: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let rows = matrix.len();
        if rows == 0 || !rows.is_multiple_of(2) || rhs.len() != rows {
            return Err(Error::InvalidRequirement(format!(
                "system needs an even, nonzero row count matching the rhs ({} rows, {} rhs)",
                rows,
                rhs.len()
            )));
        }
        let cols = matrix[0].len();
        if cols == 0 || !cols.is_multiple_of(2) || matrix.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidRequirement(
                "system needs an even, uniform, nonzero column count".to_string(),
            ));
        }
        if matrix.iter().flatten().chain(&rhs).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("system entries".to_string()));
        }
        Ok(Self {
            matrix,
            rhs,
            order: cols / 2,
        })
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Compensator order `n`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of requirements `r`.
    pub fn requirement_count(&self) -> usize {
        self.matrix.len() / 2
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        2 * self.order
    }

    /// `max_i |(A x - b)_i|`.
    pub fn residual_inf_norm(&self, x: &[f64]) -> f64 {
        self.matrix
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (dot(row, x) - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn rhs_inf_norm(&self) -> f64 {
        self.rhs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Copy with rows reordered; `perm[i]` is the source row of row `i`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        Self {
            matrix: perm.iter().map(|&i| self.matrix[i].clone()).collect(),
            rhs: perm.iter().map(|&i| self.rhs[i]).collect(),
            order: self.order,
        }
    }

    /// Copy with row `row` (matrix and rhs) multiplied by `factor`.
    pub fn scale_row(&self, row: usize, factor: f64) -> Self {
        let mut out = self.clone();
        out.matrix[row].iter_mut().for_each(|v| *v *= factor);
        out.rhs[row] *= factor;
        out
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(j w)^p`, computed from a real power so that one component is exactly 0.
fn jomega_power(omega: f64, p: usize) -> ComplexValue {
    let mag = omega.powi(p as i32);
    match p % 4 {
        0 => ComplexValue::new(mag, 0.0),
        1 => ComplexValue::new(0.0, mag),
        2 => ComplexValue::new(-mag, 0.0),
        _ => ComplexValue::new(0.0, -mag),
    }
}

fn check_inputs(reqs: &[RequirementPair], n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidOrder(n));
    }
    if reqs.is_empty() {
        return Err(Error::InvalidRequirement(
            "at least one requirement is needed".to_string(),
        ));
    }
    check_distinct_frequencies(reqs)
}

/// Build the `2r x 2n` system for an order-`n` compensator, for any parity
/// of `n`.
pub fn build_system(reqs: &[RequirementPair], n: usize) -> Result<RequirementSystem> {
    check_inputs(reqs, n)?;
    let mut matrix = Vec::with_capacity(2 * reqs.len());
    let mut rhs = Vec::with_capacity(2 * reqs.len());
    for req in reqs {
        let target = req.target();
        let mut re_row = vec![0.0; 2 * n];
        let mut im_row = vec![0.0; 2 * n];
        for i in 1..=n {
            let z = jomega_power(req.omega(), n - i);
            let gz = target * z;
            re_row[i - 1] = z.re;
            im_row[i - 1] = z.im;
            re_row[n + i - 1] = -gz.re;
            im_row[n + i - 1] = -gz.im;
        }
        let lead = jomega_power(req.omega(), n);
        let known = target * lead - lead;
        matrix.push(re_row);
        matrix.push(im_row);
        rhs.push(known.re);
        rhs.push(known.im);
    }
    RequirementSystem::from_parts(matrix, rhs)
}

/// Term-by-term transcription of the two real equations for even `n = 2m`,
/// written with alternating-sign powers `(-1)^(m-q) w^(2m-2q)` and
/// `(-1)^(m-q) w^(2m-2q+1)`. Kept as an independent cross-check of
/// [`build_system`].
pub fn build_even_n_reference(reqs: &[RequirementPair], n: usize) -> Result<RequirementSystem> {
    check_inputs(reqs, n)?;
    if !n.is_multiple_of(2) {
        return Err(Error::OddOrder(n));
    }
    let m = n / 2;
    let sign = |e: usize| if e.is_multiple_of(2) { 1.0 } else { -1.0 };
    // Column of b_i is i-1, of a_i is n+i-1.
    let b = |i: usize| i - 1;
    let a = |i: usize| n + i - 1;

    let mut matrix = Vec::new();
    let mut rhs = Vec::new();
    for req in reqs {
        let w = req.omega();
        let gc = req.gain() * req.phase().cos();
        let gs = req.gain() * req.phase().sin();
        let lead = sign(m) * w.powi(2 * m as i32);

        let mut re_row = vec![0.0; 2 * n];
        let mut im_row = vec![0.0; 2 * n];
        for q in 1..=m {
            let even_term = sign(m - q) * w.powi((2 * m - 2 * q) as i32);
            let odd_term = sign(m - q) * w.powi((2 * m - 2 * q + 1) as i32);

            re_row[b(2 * q)] = even_term;
            re_row[a(2 * q)] = -gc * even_term;
            re_row[a(2 * q - 1)] = gs * odd_term;

            im_row[b(2 * q - 1)] = odd_term;
            im_row[a(2 * q)] = -gs * even_term;
            im_row[a(2 * q - 1)] = -gc * odd_term;
        }
        matrix.push(re_row);
        matrix.push(im_row);
        rhs.push(-lead + gc * lead);
        rhs.push(gs * lead);
    }
    RequirementSystem::from_parts(matrix, rhs)
}
