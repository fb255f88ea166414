//! Routh-Hurwitz stability test and coefficient admissibility.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MonicPolynomial;

/// Entries smaller than this fraction of the terms that produced them are
/// cancellation noise and are treated as exact zeros.
const ZERO_REL_TOL: f64 = 1e-11;

/// Magnitude of the substitute for a lone first-column zero, relative to the
/// largest coefficient.
const EPSILON_REL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "STABLE",
            Verdict::Unstable => "UNSTABLE",
            Verdict::Marginal => "MARGINAL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouthReport {
    /// Row `i` holds the coefficients for power `s^(n-i)`.
    pub table: Vec<Vec<f64>>,
    pub sign_changes: usize,
    /// A lone first-column zero was replaced by a small positive value.
    pub epsilon_used: bool,
    /// An all-zero row was replaced by the derivative of the auxiliary
    /// polynomial, indicating roots symmetric about the origin.
    pub auxiliary_used: bool,
    pub verdict: Verdict,
}

impl RouthReport {
    pub fn first_column(&self) -> Vec<f64> {
        self.table.iter().map(|row| row[0]).collect()
    }
}

/// Build the Routh array of a monic polynomial and read off its verdict.
///
/// A lone zero in the first column is replaced by
/// `eps = 1e-8 * max|coeff|`. An all-zero row is replaced by the coefficients
/// of the derivative of the auxiliary polynomial formed from the row above.
/// Either event rules out strict stability: with no sign changes the verdict
/// is `Marginal`, otherwise `Unstable`.
pub fn routh_hurwitz(poly: &MonicPolynomial) -> Result<RouthReport> {
    let full = poly.full_coeffs();
    if full.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("polynomial coefficient".to_string()));
    }
    let n = poly.degree();
    let width = n / 2 + 1;
    let eps = EPSILON_REL * full.iter().fold(0.0f64, |m, c| m.max(c.abs()));

    let initial = |start: usize| -> Vec<f64> {
        (0..width)
            .map(|j| full.get(start + 2 * j).copied().unwrap_or(0.0))
            .collect()
    };
    let mut table = vec![initial(0), initial(1)];
    let mut epsilon_used = false;
    let mut auxiliary_used = false;

    repair_row(
        &mut table,
        1,
        n,
        eps,
        &mut epsilon_used,
        &mut auxiliary_used,
    );
    for i in 2..=n {
        let (above, prev) = (&table[i - 2], &table[i - 1]);
        let row: Vec<f64> = (0..width)
            .map(|j| {
                let lhs = above.get(j + 1).copied().unwrap_or(0.0);
                let rhs = above[0] * prev.get(j + 1).copied().unwrap_or(0.0) / prev[0];
                let v = lhs - rhs;
                if v.abs() <= ZERO_REL_TOL * lhs.abs().max(rhs.abs()) {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        table.push(row);
        repair_row(
            &mut table,
            i,
            n,
            eps,
            &mut epsilon_used,
            &mut auxiliary_used,
        );
    }

    let sign_changes = table
        .windows(2)
        .filter(|w| (w[0][0] > 0.0) != (w[1][0] > 0.0))
        .count();
    let verdict = if sign_changes > 0 {
        Verdict::Unstable
    } else if epsilon_used || auxiliary_used {
        Verdict::Marginal
    } else {
        Verdict::Stable
    };
    Ok(RouthReport {
        table,
        sign_changes,
        epsilon_used,
        auxiliary_used,
        verdict,
    })
}

fn repair_row(
    table: &mut [Vec<f64>],
    i: usize,
    n: usize,
    eps: f64,
    epsilon_used: &mut bool,
    auxiliary_used: &mut bool,
) {
    if table[i].iter().all(|v| *v == 0.0) {
        // Auxiliary polynomial from row i-1 has order k = n - (i - 1) and
        // powers k, k-2, ...; its derivative fills row i.
        let k = n - (i - 1);
        let above = table[i - 1].clone();
        for (j, slot) in table[i].iter_mut().enumerate() {
            let power = k as isize - 2 * j as isize;
            *slot = if power >= 1 {
                above[j] * power as f64
            } else {
                0.0
            };
        }
        *auxiliary_used = true;
    }
    if table[i][0] == 0.0 {
        table[i][0] = eps;
        *epsilon_used = true;
    }
}

/// Nonnegativity of every stored coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Positivity {
    pub ok: bool,
    /// One-based indices `i` of negative coefficients `c_i`.
    pub violations: Vec<usize>,
}

pub fn coefficient_positivity(poly: &MonicPolynomial) -> Positivity {
    let violations: Vec<usize> = poly
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c < 0.0)
        .map(|(i, _)| i + 1)
        .collect();
    Positivity {
        ok: violations.is_empty(),
        violations,
    }
}
