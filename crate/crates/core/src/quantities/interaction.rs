//! Maximal interaction informations `I(X;Y|U) - I(X;Y)` without
//! constraint, with `U` independent of `X`, and with `U` independent of both.

use serde::{Deserialize, Serialize};

use super::witness::{bvn_channel, cycle_witness_channel, path_witness_channel};
use super::{Method, QuantityConfig, QuantityResult, Solved, SupportForm};
use crate::channel::{Channel, TriplePmf};
use crate::error::Result;
use crate::graph::{find_cycle, has_path_length_3, max_condition_check};
use crate::opt::{solve_constrained_seeded, ConstraintSpec, ObjectiveSpec, Residual, Structural};
use crate::prob::JointPmf;

/// Tolerance of the ordering check in [`bounds_report`].
pub const CHAIN_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionKind {
    Nni,
    Pni,
    Ppi,
}

impl InteractionKind {
    pub fn name(self) -> &'static str {
        match self {
            InteractionKind::Nni => "g_nni",
            InteractionKind::Pni => "g_pni",
            InteractionKind::Ppi => "g_ppi",
        }
    }

    fn constraints(self) -> ConstraintSpec {
        match self {
            InteractionKind::Nni => ConstraintSpec::none(),
            InteractionKind::Pni => ConstraintSpec::structural(&[Structural::IndepX]),
            InteractionKind::Ppi => ConstraintSpec::structural(&[Structural::IndepX, Structural::IndepY]),
        }
    }
}

fn residuals_of(p: &JointPmf, c: &Channel, kind: InteractionKind) -> Result<Vec<Residual>> {
    let t = TriplePmf::new(p, c)?;
    Ok(kind.constraints().residuals(&t))
}

/// Evaluates one interaction quantity. `seeds` are extra starting channels
/// for the optimizer, e.g. products of witnesses on product sources.
pub fn interaction_info(p: &JointPmf, kind: InteractionKind, cfg: &QuantityConfig, seeds: &[Channel]) -> Result<QuantityResult> {
    let name = kind.name();
    let e = p.entropies();
    if cfg.screens {
        if max_condition_check(p) {
            let w = bvn_channel(p)?;
            let t = TriplePmf::new(p, &w)?;
            let mut q = QuantityResult::new(name, e.hx_y.min(e.hy_x), Method::Construction);
            q.residuals = vec![
                Residual { name: "I(X;U)".into(), value: t.mi_x_u() },
                Residual { name: "I(Y;U)".into(), value: t.mi_y_u() },
                Residual { name: "H(X|Y,U)".into(), value: t.h_x_given_yu() },
                Residual { name: "H(Y|X,U)".into(), value: t.h_y_given_xu() },
            ];
            q.notes.push(format!("equal-marginal condition holds; witness achieves {:.12}", t.mi_x_y_given_u() - e.mi));
            q.witness = Some(w);
            return Ok(q);
        }
        let zero = match kind {
            InteractionKind::Nni | InteractionKind::Pni => has_path_length_3(p).is_none().then_some("no path of length 3"),
            InteractionKind::Ppi => find_cycle(p).is_none().then_some("no cycle"),
        };
        if let Some(reason) = zero {
            let w = Channel::constant(p.nx(), p.ny());
            let mut q = QuantityResult::new(name, 0.0, Method::ExactGraph);
            q.residuals = residuals_of(p, &w, kind)?;
            q.notes.push(format!("support graph has {reason}"));
            q.witness = Some(w);
            return Ok(q);
        }
    }
    let mut starts: Vec<Channel> = seeds.to_vec();
    if let Some(cycle) = find_cycle(p) {
        starts.push(cycle_witness_channel(p, &cycle, &cfg.witness)?);
    }
    if kind != InteractionKind::Ppi {
        if let Some(path) = has_path_length_3(p) {
            starts.push(path_witness_channel(p, path, &cfg.witness)?);
        }
    }
    if max_condition_check(p) {
        starts.push(bvn_channel(p)?);
    }
    let support_form = match kind {
        InteractionKind::Nni => None,
        InteractionKind::Pni => Some(([-1.0, 0.0, 0.0], [0.0, -1.0, 1.0], 1.0)),
        InteractionKind::Ppi => Some(([-1.0, -1.0, 0.0], [0.0, 0.0, 1.0], 1.0)),
    };
    let mut q = match support_form {
        Some(support_form) => {
            let s = Solved { name, objective: [-1.0, -1.0, 1.0], cons: kind.constraints(), offset: 0.0, scale: 1.0, support_form, lift: None };
            s.run(p, cfg, &starts)?.0
        }
        None => {
            let r = solve_constrained_seeded(p, ObjectiveSpec::new([-1.0, -1.0, 1.0])?, &kind.constraints(), &cfg.optimizer, &starts)?;
            let mut q = QuantityResult::from_solve(name, r.value, r);
            if cfg.support_form {
                q.support_form = Some(SupportForm { expression: "psi(-1,-1,1)".into(), value: q.value, difference: 0.0 });
            }
            q
        }
    };
    if kind == InteractionKind::Pni {
        let t = TriplePmf::new(p, q.witness.as_ref().expect("optimizer witness"))?;
        q.notes.push(format!("H(Y|X,U) at the witness: {:.3e}", t.h_y_given_xu()));
    }
    Ok(q)
}

pub fn g_nni(p: &JointPmf, cfg: &QuantityConfig) -> Result<QuantityResult> {
    interaction_info(p, InteractionKind::Nni, cfg, &[])
}

pub fn g_pni(p: &JointPmf, cfg: &QuantityConfig) -> Result<QuantityResult> {
    interaction_info(p, InteractionKind::Pni, cfg, &[])
}

pub fn g_ppi(p: &JointPmf, cfg: &QuantityConfig) -> Result<QuantityResult> {
    interaction_info(p, InteractionKind::Ppi, cfg, &[])
}

/// The three interaction informations and the ordering
/// `0 <= G_PPI <= G_PNI <= G_NNI <= min{H(X|Y), H(Y|X)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub g_ppi: QuantityResult,
    pub g_pni: QuantityResult,
    pub g_nni: QuantityResult,
    pub bound: f64,
    pub chain_holds: bool,
    /// Orderings violated by more than [`CHAIN_TOLERANCE`]; these are optimizer failures.
    pub violations: Vec<String>,
}

/// Solves from the most constrained quantity outwards, offering each
/// witness to the next solve, since it is feasible there too.
pub fn bounds_report(p: &JointPmf, cfg: &QuantityConfig) -> Result<BoundsReport> {
    let e = p.entropies();
    let ppi = interaction_info(p, InteractionKind::Ppi, cfg, &[])?;
    let seeds: Vec<Channel> = ppi.witness.iter().cloned().collect();
    let pni = interaction_info(p, InteractionKind::Pni, cfg, &seeds)?;
    let seeds: Vec<Channel> = seeds.into_iter().chain(pni.witness.iter().cloned()).collect();
    let nni = interaction_info(p, InteractionKind::Nni, cfg, &seeds)?;
    let bound = e.hx_y.min(e.hy_x);
    let chain = [("0", 0.0), ("G_PPI", ppi.value), ("G_PNI", pni.value), ("G_NNI", nni.value), ("min{H(X|Y),H(Y|X)}", bound)];
    let violations: Vec<String> = chain
        .windows(2)
        .filter(|w| w[0].1 > w[1].1 + CHAIN_TOLERANCE)
        .map(|w| format!("{} = {:.9} exceeds {} = {:.9}", w[0].0, w[0].1, w[1].0, w[1].1))
        .collect();
    Ok(BoundsReport { chain_holds: violations.is_empty(), violations, bound, g_ppi: ppi, g_pni: pni, g_nni: nni })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuantityConfig {
        QuantityConfig { support_form: false, ..QuantityConfig::light() }
    }

    #[test]
    fn screens() {
        let peq = JointPmf::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let r = bounds_report(&peq, &cfg()).unwrap();
        assert_eq!([r.g_ppi.value, r.g_pni.value, r.g_nni.value], [0.0; 3]);
        let pind = JointPmf::from_rows(&[vec![0.25; 2], vec![0.25; 2]]).unwrap();
        let r = bounds_report(&pind, &cfg()).unwrap();
        assert!(r.chain_holds);
        assert!((r.g_ppi.value - 1.0).abs() < 1e-12 && r.g_ppi.method == Method::Construction);
        let t = 1.0 / 3.0;
        let pl = JointPmf::from_rows(&[vec![t, t], vec![t, 0.0]]).unwrap();
        let r = bounds_report(&pl, &cfg()).unwrap();
        assert_eq!(r.g_ppi.value, 0.0);
        assert!(r.g_nni.value > 1e-3 && r.g_pni.value > 1e-3);
        assert!(r.chain_holds, "{:?}", r.violations);
    }

    #[test]
    fn optimizer_without_screens() {
        let pind = JointPmf::from_rows(&[vec![0.25; 2], vec![0.25; 2]]).unwrap();
        let c = QuantityConfig { screens: false, ..cfg() };
        for kind in [InteractionKind::Nni, InteractionKind::Pni, InteractionKind::Ppi] {
            let q = interaction_info(&pind, kind, &c, &[]).unwrap();
            assert_eq!(q.method, Method::Optimizer);
            assert!((q.value - 1.0).abs() < 1e-6, "{kind:?} {}", q.value);
        }
    }
}
