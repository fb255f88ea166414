//! End-to-end checks of a designed compensator and frequency sweeps.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cascade::{factor_cascade, CascadeForm};
use crate::error::{Error, PolyRole, Result};
use crate::model::{
    eval_compensator, gain_phase, wrapped_phase_distance, Compensator, MonicPolynomial,
    RequirementPair,
};
use crate::solver::{classify_feasibility, FeasibilityReport};
use crate::stability::{coefficient_positivity, routh_hurwitz, RouthReport, Verdict};
use crate::system::build_system;

/// Default bound on gain relative error and phase error (radians).
pub const DEFAULT_VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementCheck {
    pub omega: f64,
    pub target_gain: f64,
    pub achieved_gain: f64,
    pub target_phase: f64,
    pub achieved_phase: f64,
    pub gain_rel_err: f64,
    /// Shortest-arc distance between target and achieved phase.
    pub phase_abs_err: f64,
}

impl RequirementCheck {
    pub fn within(&self, tol: f64) -> bool {
        self.gain_rel_err <= tol && self.phase_abs_err <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CascadeOutcome {
    Factored(CascadeForm),
    NotFactorable {
        role: PolyRole,
        roots: Vec<Complex64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub compensator: Compensator,
    pub per_requirement: Vec<RequirementCheck>,
    /// Absent when the requirements cannot form a system (none given, or
    /// duplicate frequencies).
    pub feasibility: Option<FeasibilityReport>,
    pub routh: RouthReport,
    /// Minimum-phase check on the numerator, when requested.
    pub numerator_routh: Option<RouthReport>,
    pub positivity_ok: bool,
    pub cascade: CascadeOutcome,
    pub tolerance: f64,
}

impl DesignReport {
    /// Every requirement met within the report tolerance.
    pub fn requirements_met(&self) -> bool {
        self.per_requirement
            .iter()
            .all(|c| c.within(self.tolerance))
    }

    /// Requirements met, denominator (and numerator when checked) strictly
    /// stable, and all coefficients nonnegative.
    pub fn admissible(&self) -> bool {
        self.requirements_met()
            && self.positivity_ok
            && self.routh.verdict == Verdict::Stable
            && self
                .numerator_routh
                .as_ref()
                .is_none_or(|r| r.verdict == Verdict::Stable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub tolerance: f64,
    pub check_numerator: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_VERIFY_TOL,
            check_numerator: false,
        }
    }
}

pub fn verify_design(comp: &Compensator, reqs: &[RequirementPair]) -> Result<DesignReport> {
    verify_design_with(comp, reqs, &VerifyOptions::default())
}

pub fn verify_design_with(
    comp: &Compensator,
    reqs: &[RequirementPair],
    opts: &VerifyOptions,
) -> Result<DesignReport> {
    let per_requirement = reqs
        .iter()
        .map(|req| {
            let (gain, phase) = gain_phase(eval_compensator(comp, req.omega())?)?;
            Ok(RequirementCheck {
                omega: req.omega(),
                target_gain: req.gain(),
                achieved_gain: gain,
                target_phase: req.phase(),
                achieved_phase: phase,
                gain_rel_err: (gain - req.gain()).abs() / req.gain(),
                phase_abs_err: wrapped_phase_distance(phase, req.phase()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let feasibility = build_system(reqs, comp.order())
        .ok()
        .map(|sys| classify_feasibility(&sys));
    let routh = routh_hurwitz(comp.denominator())?;
    let numerator_routh = if opts.check_numerator {
        Some(routh_hurwitz(comp.numerator())?)
    } else {
        None
    };
    let positivity_ok = coefficient_positivity(comp.numerator()).ok
        && coefficient_positivity(comp.denominator()).ok;
    let cascade = match factor_cascade(comp) {
        Ok(c) => CascadeOutcome::Factored(c),
        Err(Error::NotFactorable { role, roots }) => CascadeOutcome::NotFactorable { role, roots },
        Err(e) => return Err(e),
    };
    Ok(DesignReport {
        compensator: comp.clone(),
        per_requirement,
        feasibility,
        routh,
        numerator_routh,
        positivity_ok,
        cascade,
        tolerance: opts.tolerance,
    })
}

/// One row of a frequency sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodeRow {
    pub omega: f64,
    pub gain_linear: f64,
    pub gain_db: f64,
    pub phase_deg: f64,
    pub re: f64,
    pub im: f64,
    /// Set at or next to a pole on the jw axis. Values are NaN when the
    /// response could not be evaluated at all.
    pub flag: bool,
}

/// Relative size of the denominator below which a row is flagged as
/// adjacent to a pole.
const NEAR_POLE_REL: f64 = 1e-12;

/// Log-spaced sweep over `[omega_min, omega_max]`, endpoints included.
pub fn bode_table(
    comp: &Compensator,
    omega_min: f64,
    omega_max: f64,
    points: usize,
) -> Result<Vec<BodeRow>> {
    if !(omega_min.is_finite() && omega_max.is_finite() && omega_min > 0.0 && omega_min < omega_max)
    {
        return Err(Error::InvalidRange(format!(
            "need 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidRange(format!(
            "need at least 2 points, got {points}"
        )));
    }
    let (lo, hi) = (omega_min.log10(), omega_max.log10());
    let last = points - 1;
    Ok((0..points)
        .map(|i| {
            let omega = match i {
                0 => omega_min,
                i if i == last => omega_max,
                i => 10f64.powf(lo + (hi - lo) * i as f64 / last as f64),
            };
            bode_row(comp, omega)
        })
        .collect())
}

fn bode_row(comp: &Compensator, omega: f64) -> BodeRow {
    let near_pole = near_pole(comp.denominator(), omega);
    match eval_compensator(comp, omega).and_then(|v| Ok((v, gain_phase(v)?))) {
        Ok((v, (gain, phase))) => BodeRow {
            omega,
            gain_linear: gain,
            gain_db: 20.0 * gain.log10(),
            phase_deg: phase.to_degrees(),
            re: v.re,
            im: v.im,
            flag: near_pole,
        },
        Err(_) => BodeRow {
            omega,
            gain_linear: f64::NAN,
            gain_db: f64::NAN,
            phase_deg: f64::NAN,
            re: f64::NAN,
            im: f64::NAN,
            flag: true,
        },
    }
}

fn near_pole(den: &MonicPolynomial, omega: f64) -> bool {
    let n = den.degree();
    let scale = den
        .full_coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c.abs() * omega.powi((n - i) as i32))
        .sum::<f64>();
    let value = den.eval(Complex64::new(0.0, omega)).norm();
    value.is_nan() || value <= NEAR_POLE_REL * scale
}
