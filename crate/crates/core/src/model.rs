//! Compensator and requirement types, and frequency-response evaluation.
//!
//! A compensator of order `n` is the ratio of two monic polynomials of equal
//! degree,
//!
//! ```text
//!          s^n + b1 s^(n-1) + ... + bn
//! Gc(s) = -----------------------------
//!          s^n + a1 s^(n-1) + ... + an
//! ```
//!
//! and a requirement pins its complex response at one frequency:
//! `Gc(j w_k) = g_k cos(p_k) + j g_k sin(p_k)`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex value carrier for frequency-response evaluations.
pub type ComplexValue = Complex64;

/// Magnitudes below this are treated as an exact pole on the jw axis.
pub const POLE_MAGNITUDE_FLOOR: f64 = 1e-300;

/// One gain/phase target at a single angular frequency.
///
/// `gain` is linear (not dB) and `phase` is in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequirementPair {
    omega: f64,
    gain: f64,
    phase: f64,
}

impl RequirementPair {
    pub fn new(omega: f64, gain: f64, phase: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidRequirement(format!(
                "omega must be finite and positive, got {omega}"
            )));
        }
        if !(gain.is_finite() && gain > 0.0) {
            return Err(Error::InvalidRequirement(format!(
                "gain must be finite and positive, got {gain}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidRequirement(format!(
                "phase must be finite, got {phase}"
            )));
        }
        Ok(Self { omega, gain, phase })
    }

    /// Requirement whose target is the given complex response.
    pub fn from_response(omega: f64, value: ComplexValue) -> Result<Self> {
        let (gain, phase) = gain_phase(value)?;
        Self::new(omega, gain, phase)
    }

    /// Degree-based constructor, as entered by engineers.
    pub fn from_degrees(omega: f64, gain: f64, phase_deg: f64) -> Result<Self> {
        Self::new(omega, gain, phase_deg.to_radians())
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// `g cos(p) + j g sin(p)`.
    pub fn target(&self) -> ComplexValue {
        ComplexValue::from_polar(self.gain, self.phase)
    }

    /// Same requirement with a different gain. The gain is not validated,
    /// which lets tests probe which matrix entries carry the gain factor.
    #[doc(hidden)]
    pub fn with_raw_gain(mut self, gain: f64) -> Self {
        self.gain = gain;
        self
    }
}

/// Errors unless every frequency in `reqs` is distinct.
pub fn check_distinct_frequencies(reqs: &[RequirementPair]) -> Result<()> {
    let mut omegas: Vec<f64> = reqs.iter().map(|r| r.omega).collect();
    omegas.sort_by(f64::total_cmp);
    for w in omegas.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateFrequency { omega: w[0] });
        }
    }
    Ok(())
}

/// Monic real polynomial `s^n + c1 s^(n-1) + ... + cn`.
///
/// Only `c1..cn` are stored; the unit leading coefficient is implicit.
/// Coefficients may be negative: nonnegativity is an admissibility property
/// reported by [`crate::stability::coefficient_positivity`], not a
/// construction requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MonicPolynomial {
    coeffs: Vec<f64>,
}

impl MonicPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidPolynomial(
                "degree must be at least 1".to_string(),
            ));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidPolynomial(format!(
                "non-finite coefficient {bad}"
            )));
        }
        Ok(Self { coeffs })
    }

    /// `prod (s - r)` over the given real roots.
    pub fn from_real_roots(roots: &[f64]) -> Result<Self> {
        let mut full = vec![1.0];
        for &r in roots {
            full.push(0.0);
            for i in (1..full.len()).rev() {
                full[i] -= r * full[i - 1];
            }
        }
        Self::new(full.split_off(1))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `[c1, ..., cn]`, leading one omitted.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `[1, c1, ..., cn]`.
    pub fn full_coeffs(&self) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(self.coeffs.iter().copied())
            .collect()
    }

    /// Horner evaluation at an arbitrary complex point.
    pub fn eval(&self, z: ComplexValue) -> ComplexValue {
        self.coeffs
            .iter()
            .fold(ComplexValue::new(1.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative at `z`.
    pub fn eval_with_derivative(&self, z: ComplexValue) -> (ComplexValue, ComplexValue) {
        let mut p = ComplexValue::new(1.0, 0.0);
        let mut dp = ComplexValue::new(0.0, 0.0);
        for &c in &self.coeffs {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl TryFrom<Vec<f64>> for MonicPolynomial {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<MonicPolynomial> for Vec<f64> {
    fn from(p: MonicPolynomial) -> Self {
        p.coeffs
    }
}

impl fmt::Display for MonicPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        write_power(f, n)?;
        for (i, &c) in self.coeffs.iter().enumerate() {
            let power = n - i - 1;
            if c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 { '-' } else { '+' };
            write!(f, " {sign} {}", c.abs())?;
            if power > 0 {
                write_power(f, power)?;
            }
        }
        Ok(())
    }
}

fn write_power(f: &mut fmt::Formatter<'_>, power: usize) -> fmt::Result {
    match power {
        0 => Ok(()),
        1 => f.write_str("s"),
        p => write!(f, "s^{p}"),
    }
}

/// Equal-degree monic ratio `numerator(s) / denominator(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compensator {
    numerator: MonicPolynomial,
    denominator: MonicPolynomial,
}

impl Compensator {
    pub fn new(numerator: MonicPolynomial, denominator: MonicPolynomial) -> Result<Self> {
        if numerator.degree() != denominator.degree() {
            return Err(Error::DegreeMismatch {
                numerator: numerator.degree(),
                denominator: denominator.degree(),
            });
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    /// Build from `[b1..bn]` and `[a1..an]`.
    pub fn from_coeffs(numerator: &[f64], denominator: &[f64]) -> Result<Self> {
        Self::new(
            MonicPolynomial::new(numerator.to_vec())?,
            MonicPolynomial::new(denominator.to_vec())?,
        )
    }

    pub fn order(&self) -> usize {
        self.numerator.degree()
    }

    pub fn numerator(&self) -> &MonicPolynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &MonicPolynomial {
        &self.denominator
    }

    /// Unknown vector in column order `[b1..bn, a1..an]`.
    pub fn unknowns(&self) -> Vec<f64> {
        self.numerator
            .coeffs()
            .iter()
            .chain(self.denominator.coeffs())
            .copied()
            .collect()
    }
}

impl fmt::Display for Compensator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.numerator, self.denominator)
    }
}

/// Evaluate a monic polynomial at `s = j*omega` by Horner's rule.
pub fn eval_polynomial_at_jomega(poly: &MonicPolynomial, omega: f64) -> Result<ComplexValue> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidRequirement(format!(
            "omega must be finite and positive, got {omega}"
        )));
    }
    let value = poly.eval(ComplexValue::new(0.0, omega));
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NumericOverflow { omega });
    }
    Ok(value)
}

/// `Gc(j*omega)`.
pub fn eval_compensator(comp: &Compensator, omega: f64) -> Result<ComplexValue> {
    let num = eval_polynomial_at_jomega(comp.numerator(), omega)?;
    let den = eval_polynomial_at_jomega(comp.denominator(), omega)?;
    if den.norm() < POLE_MAGNITUDE_FLOOR {
        return Err(Error::PoleAtFrequency { omega });
    }
    let value = num / den;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NumericOverflow { omega });
    }
    Ok(value)
}

/// Magnitude and principal argument in `(-pi, pi]`.
pub fn gain_phase(value: ComplexValue) -> Result<(f64, f64)> {
    if value.re == 0.0 && value.im == 0.0 {
        return Err(Error::UndefinedPhase);
    }
    let gain = value.norm();
    let mut phase = value.im.atan2(value.re);
    if phase <= -std::f64::consts::PI {
        phase = std::f64::consts::PI;
    }
    Ok((gain, phase))
}

/// Difference of two angles wrapped onto the shortest arc, in `[0, pi]`.
pub fn wrapped_phase_distance(a: f64, b: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let d = (a - b).rem_euclid(tau);
    d.min(tau - d)
}
