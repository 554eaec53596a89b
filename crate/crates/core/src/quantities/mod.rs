//! Named information quantities: extreme points of the region computed as
//! configured solves, exact combinatorial values and explicit constructions.

mod catalogue;
mod curves;
mod indep;
mod interaction;
mod witness;

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, TriplePmf};
use crate::error::Result;
use crate::opt::{directional_derivative_seeded, solve_constrained_seeded, ConstraintSpec, ObjectiveSpec, OptimizerConfig, Residual, SolveResult};
use crate::prob::JointPmf;

pub use catalogue::{
    excess_functional_info, gacs_korner_ci, g_rstar, korner_graph_entropy, necessary_cond_entropy, s_star, v_star, wyner_ci,
    KORNER_TOLERANCE, KORNER_VERTEX_CAP, NCE_Y_CAP, RATIO_FLOOR,
};
pub use curves::{curve, ib_curve, pf_curve, synthesis_curve, Curve, CurveKind, CurvePoint, CurveRequest, PointStatus};
pub use indep::{achieved_indep_value, f_integral, indep_lower_bound, quantized_indep_channel};
pub use interaction::{bounds_report, g_nni, g_pni, g_ppi, interaction_info, BoundsReport, InteractionKind, CHAIN_TOLERANCE};
pub use witness::{
    birkhoff_decomposition, bvn_channel, cycle_witness_channel, path_witness_channel, witness_report, WitnessConfig, WitnessReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactGraph,
    IndependentSet,
    PartitionSearch,
    Optimizer,
    Oracle,
    Construction,
}

/// A support-function expression of a quantity and its estimated value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportForm {
    pub expression: String,
    pub value: f64,
    /// `|value - quantity value|`.
    pub difference: f64,
}

/// An independent evaluation of the same quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub method: String,
    pub value: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityResult {
    pub name: String,
    #[serde(rename = "value_bits")]
    pub value: f64,
    pub method: Method,
    pub witness: Option<Channel>,
    /// Combinatorial data behind exact values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<serde_json::Value>,
    pub residuals: Vec<Residual>,
    pub support_form: Option<SupportForm>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cross_checks: Vec<CrossCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl QuantityResult {
    fn new(name: &str, value: f64, method: Method) -> Self {
        Self {
            name: name.into(),
            // Normalizes -0.0 so that exact zeros print as 0.
            value: value + 0.0,
            method,
            witness: None,
            certificate: None,
            residuals: Vec::new(),
            support_form: None,
            cross_checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn from_solve(name: &str, value: f64, r: SolveResult) -> Self {
        let mut q = Self::new(name, value, Method::Optimizer);
        q.residuals = r.residuals;
        q.witness = Some(r.witness);
        if !r.feasible {
            q.notes.push(format!("witness residual {:.2e} exceeds the feasibility tolerance", r.max_residual));
        }
        if !r.converged {
            q.notes.push("fewer than two local searches agree on the optimum".into());
        }
        q.notes.extend(r.notes);
        q
    }

    /// Objective of the witness recomputed from scratch.
    pub fn witness_point(&self, p: &JointPmf) -> Result<Option<crate::region::point::MiPoint>> {
        match &self.witness {
            Some(c) => {
                let t = TriplePmf::new(p, c)?;
                Ok(Some(crate::region::point::MiPoint::new(t.mi_x_u(), t.mi_y_u(), t.mi_xy_u())))
            }
            None => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityConfig {
    pub optimizer: OptimizerConfig,
    pub witness: WitnessConfig,
    /// Evaluate the support-function form of each quantity as a cross-check.
    pub support_form: bool,
    /// Use exact graph answers where the structure decides the value.
    pub screens: bool,
}

impl Default for QuantityConfig {
    fn default() -> Self {
        Self { optimizer: OptimizerConfig::default(), witness: WitnessConfig::default(), support_form: true, screens: true }
    }
}

impl QuantityConfig {
    pub fn light() -> Self {
        Self { optimizer: OptimizerConfig::light(), ..Self::default() }
    }
}

fn fmt_dir(d: [f64; 3]) -> String {
    d.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

/// Evaluates `sign * psi'(b; c)` and attaches it to `q`, returning the
/// witness of the derivative estimate.
fn attach_support_form(
    p: &JointPmf,
    q: &mut QuantityResult,
    b: [f64; 3],
    c: [f64; 3],
    sign: f64,
    cfg: &QuantityConfig,
    seeds: &[Channel],
) -> Result<Option<Channel>> {
    if !cfg.support_form {
        return Ok(None);
    }
    let d = directional_derivative_seeded(p, ObjectiveSpec::new(b)?, c, &cfg.optimizer, seeds)?;
    let value = sign * d.value;
    let prefix = if sign < 0.0 { "-" } else { "" };
    q.support_form = Some(SupportForm {
        expression: format!("{prefix}psi'({}; {})", fmt_dir(b), fmt_dir(c)),
        value,
        difference: (value - q.value).abs(),
    });
    Ok(Some(d.witness))
}

/// A constrained solve whose quantity is `offset + scale * objective`, with the
/// support-function form as a cross-check. When the derivative estimate
/// beats the constrained solve, its witness seeds a second solve.
struct Solved<'a> {
    name: &'a str,
    objective: [f64; 3],
    cons: ConstraintSpec,
    offset: f64,
    scale: f64,
    support_form: ([f64; 3], [f64; 3], f64),
    /// Maps a witness to one closer to the argmax face of the support form.
    lift: Option<fn(&JointPmf, &Channel) -> Result<Channel>>,
}

impl Solved<'_> {
    fn run(&self, p: &JointPmf, cfg: &QuantityConfig, seeds: &[Channel]) -> Result<(QuantityResult, SolveResult)> {
        let obj = ObjectiveSpec::new(self.objective)?;
        let mut r = solve_constrained_seeded(p, obj, &self.cons, &cfg.optimizer, seeds)?;
        let mut q = QuantityResult::from_solve(self.name, self.offset + self.scale * r.value, r.clone());
        let (b, c, sign) = self.support_form;
        let mut starts = seeds.to_vec();
        for round in 0.. {
            starts.push(r.witness.clone());
            if let (Some(f), true) = (self.lift, cfg.support_form) {
                starts.push(f(p, &r.witness)?);
            }
            let Some(w) = attach_support_form(p, &mut q, b, c, sign, cfg, &starts)? else {
                break;
            };
            let implied = (q.support_form.as_ref().expect("attached").value - self.offset) / self.scale;
            if round == 2 || implied <= r.value + cfg.optimizer.agreement_tol {
                break;
            }
            starts.push(w);
            let r2 = solve_constrained_seeded(p, obj, &self.cons, &cfg.optimizer, &starts)?;
            if r2.value <= r.value {
                break;
            }
            r = r2;
            let t1 = q.support_form.take();
            q = QuantityResult::from_solve(self.name, self.offset + self.scale * r.value, r.clone());
            q.support_form = t1;
            q.notes.push("re-solved from the support-function witness".into());
        }
        Ok((q, r))
    }
}
