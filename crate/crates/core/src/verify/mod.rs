//! Executable checkers for the perturbation bounds, commutator estimates,
//! differentiability and trace identities of the calculus.
//!
//! Every checker returns one or more [`BoundReport`]s. A report whose
//! hypotheses are not all met is gated: it is serialized but counted neither
//! as a pass nor as a failure.

mod campaign;
mod checks;
mod report;
mod trace;

pub use campaign::{run_campaign, Campaign, CampaignConfig, CampaignTotals, CheckerKind, OutputFormat};
pub use checks::{
    check_conjugation, check_cor1, check_cor2_lipschitz, check_cor3_stable, check_cor4, check_cor5_pointwise,
    check_eq9_identity, check_ex1, check_lemma1, check_oracle, check_phi_diagonal, check_subordination,
    check_thm1, check_thm2_pointwise, check_thm5_commutator, check_thm6_frechet, laplace_identity_residual,
    loglog_slope, stable_partial, THM1_CONSTANT,
};
pub use report::{format_number, write_csv, write_records, RECORD_FIELDS};
pub use trace::{
    check_ssf, check_thm8_trace, check_trace_kernel, contour_integral, spectral_shift_diagonal, trace_kernel,
    SpectralShiftStep, TraceKernel,
};

use crate::bernstein::BernsteinFunction;
use crate::operators::IdealNorm;

/// Relative slack in the pass rule.
pub const REL_SLACK: f64 = 1e-8;
/// Absolute slack in the pass rule.
pub const ABS_SLACK: f64 = 1e-12;
/// Bound for residual-form checks.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Smallest accepted log-log slope.
pub const MIN_SLOPE: f64 = 0.9;

/// `lhs ≤ rhs·(1 + 1e−8) + 1e−12`; false when either side is NaN.
pub fn passes(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + REL_SLACK) + ABS_SLACK
}

/// Outcome of one report for campaign totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// Some hypothesis is not met.
    Gated,
}

/// One checked inequality or residual.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub hypotheses_met: Vec<(String, bool)>,
    pub instance_digest: String,
    pub norms_used: IdealNorm,
}

impl BoundReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, norm: IdealNorm) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            margin: rhs - lhs,
            pass: passes(lhs, rhs),
            hypotheses_met: Vec::new(),
            instance_digest: String::new(),
            norms_used: norm,
        }
    }

    /// Residual form: `lhs = residual`, `rhs = tol`.
    pub fn residual(name: &str, residual: f64, tol: f64) -> Self {
        Self::new(name, residual, tol, IdealNorm::Operator)
    }

    /// A report that could not be evaluated; counted as a failure unless gated.
    pub fn failed(name: &str, norm: IdealNorm) -> Self {
        Self::new(name, f64::NAN, f64::NAN, norm)
    }

    pub fn hypothesis(mut self, label: &str, met: bool) -> Self {
        self.hypotheses_met.push((label.to_string(), met));
        self
    }

    pub fn hypotheses(mut self, list: &[(&str, bool)]) -> Self {
        for &(label, met) in list {
            self.hypotheses_met.push((label.to_string(), met));
        }
        self
    }

    pub fn digest(mut self, digest: impl Into<String>) -> Self {
        self.instance_digest = digest.into();
        self
    }

    pub fn hypotheses_ok(&self) -> bool {
        self.hypotheses_met.iter().all(|(_, m)| *m)
    }

    /// `pass` recomputed from `lhs` and `rhs`.
    pub fn recomputed_pass(&self) -> bool {
        passes(self.lhs, self.rhs)
    }

    pub fn outcome(&self) -> Outcome {
        if !self.hypotheses_ok() {
            Outcome::Gated
        } else if self.pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

/// `psi=<name>;n=<n>;d=<d>`, extended by the campaign with the seed.
pub fn instance_digest(psi: &BernsteinFunction, d: usize) -> String {
    format!("psi={};n={};d={d}", psi.name(), psi.arity())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule() {
        assert!(passes(0.0, 0.0));
        assert!(passes(1.0 + 0.5e-8, 1.0));
        assert!(!passes(1.0 + 2e-8, 1.0));
        assert!(passes(1e-12, 0.0));
        assert!(!passes(f64::NAN, 1.0));
        assert!(!passes(1.0, f64::NAN));
    }

    #[test]
    fn gating() {
        let r = BoundReport::new("x", 2.0, 1.0, IdealNorm::Operator).hypothesis("h", false);
        assert_eq!(r.outcome(), Outcome::Gated);
        let r = BoundReport::new("x", 2.0, 1.0, IdealNorm::Operator).hypothesis("h", true);
        assert_eq!(r.outcome(), Outcome::Fail);
        assert!((r.margin + 1.0).abs() < 1e-15);
        assert_eq!(BoundReport::failed("x", IdealNorm::Trace).outcome(), Outcome::Fail);
    }
}
