//! The full pipeline: requirements to classified, solved, checked design.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::RequirementPair;
use crate::solver::{
    classify_with, solve, Classification, FeasibilityReport, SolveResult, SolverChoice, Tolerances,
};
use crate::system::build_system;
use crate::verify::{verify_design_with, DesignReport, VerifyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DesignOptions {
    /// Compensator order; defaults to the requirement count.
    pub order: Option<usize>,
    pub solver: SolverChoice,
    pub tolerances: Tolerances,
    pub verify: VerifyOptions,
}

/// Outcome of a design run. `solution` and `report` are present only for
/// uniquely solvable requirement sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignOutcome {
    pub feasibility: FeasibilityReport,
    pub solution: Option<SolveResult>,
    pub report: Option<DesignReport>,
}

impl DesignOutcome {
    pub fn is_unique(&self) -> bool {
        self.feasibility.classification == Classification::Unique && self.solution.is_some()
    }
}

pub fn design(reqs: &[RequirementPair], opts: &DesignOptions) -> Result<DesignOutcome> {
    let order = opts.order.unwrap_or(reqs.len());
    let sys = build_system(reqs, order)?;
    let feasibility = classify_with(&sys, &opts.tolerances);
    if feasibility.classification != Classification::Unique {
        return Ok(DesignOutcome {
            feasibility,
            solution: None,
            report: None,
        });
    }
    let solution = solve(&sys, opts.solver, &opts.tolerances)?;
    let report = verify_design_with(&solution.compensator, reqs, &opts.verify)?;
    Ok(DesignOutcome {
        feasibility,
        solution: Some(solution),
        report: Some(report),
    })
}
