//! Factoring a compensator into first-order `(s + d) / (s + c)` sections.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, PolyRole, Result};
use crate::model::{Compensator, MonicPolynomial};
use crate::roots::{find_roots, real_roots_only, DEFAULT_REAL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SectionKind {
    Lead,
    Lag,
    Unity,
}

impl fmt::Display for SectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SectionKind::Lead => "LEAD",
            SectionKind::Lag => "LAG",
            SectionKind::Unity => "UNITY",
        })
    }
}

/// `(s + zero) / (s + pole)`; the zero sits at `-zero`, the pole at `-pole`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub zero: f64,
    pub pole: f64,
}

impl Section {
    pub fn new(zero: f64, pole: f64) -> Self {
        Self { zero, pole }
    }

    /// Lead when the zero is nearer the origin than the pole.
    pub fn kind(&self) -> SectionKind {
        let tie = 1e-9 * (1.0 + self.pole.abs());
        if self.zero < self.pole - tie {
            SectionKind::Lead
        } else if self.zero > self.pole + tie {
            SectionKind::Lag
        } else {
            SectionKind::Unity
        }
    }

    /// A negative zero or pole puts a root in the right half plane.
    pub fn is_right_half_plane(&self) -> bool {
        self.zero < 0.0 || self.pole < 0.0
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(s {}) / (s {})", signed(self.zero), signed(self.pole))
    }
}

fn signed(v: f64) -> String {
    if v < 0.0 {
        format!("- {}", -v)
    } else {
        format!("+ {v}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeForm {
    sections: Vec<Section>,
}

impl CascadeForm {
    pub fn new(sections: Vec<Section>) -> Result<Self> {
        if sections.is_empty() {
            return Err(Error::EmptyCascade);
        }
        if sections
            .iter()
            .any(|s| !(s.zero.is_finite() && s.pole.is_finite()))
        {
            return Err(Error::NonFinite("cascade section".to_string()));
        }
        Ok(Self { sections })
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn section_kinds(&self) -> Vec<SectionKind> {
        self.sections.iter().map(Section::kind).collect()
    }
}

/// Factor both polynomials into real linear factors and pair them.
///
/// `d_i` are the negated numerator roots and `c_i` the negated denominator
/// roots; each list is sorted ascending and paired by index.
pub fn factor_cascade(comp: &Compensator) -> Result<CascadeForm> {
    let zeros = negated_real_roots(comp.numerator(), PolyRole::Numerator)?;
    let poles = negated_real_roots(comp.denominator(), PolyRole::Denominator)?;
    CascadeForm::new(
        zeros
            .into_iter()
            .zip(poles)
            .map(|(d, c)| Section::new(d, c))
            .collect(),
    )
}

fn negated_real_roots(poly: &MonicPolynomial, role: PolyRole) -> Result<Vec<f64>> {
    let set = find_roots(poly)?;
    let mut out: Vec<f64> = real_roots_only(&set, DEFAULT_REAL_TOL)
        .map_err(|e| match e {
            Error::ComplexRootsPresent { roots } => Error::NotFactorable { role, roots },
            other => other,
        })?
        .into_iter()
        .map(|r| -r)
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Multiply the sections back out.
pub fn expand_cascade(cascade: &CascadeForm) -> Compensator {
    let zeros: Vec<f64> = cascade.sections.iter().map(|s| -s.zero).collect();
    let poles: Vec<f64> = cascade.sections.iter().map(|s| -s.pole).collect();
    // Sections are finite and nonempty, so both expansions are valid.
    Compensator::new(
        MonicPolynomial::from_real_roots(&zeros).expect("nonempty finite cascade"),
        MonicPolynomial::from_real_roots(&poles).expect("nonempty finite cascade"),
    )
    .expect("equal section counts")
}
