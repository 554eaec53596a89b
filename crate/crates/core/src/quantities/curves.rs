//! Information bottleneck, privacy funnel and channel synthesis sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::opt::{
    solve_constrained_seeded, solve_general, ConstraintSpec, LinearConstraint, NegSmoothMax, ObjectiveSpec, OptimizerConfig, Relation,
    Structural,
};
use crate::prob::JointPmf;

/// Slack allowed when comparing a grid point with its feasible maximum.
const T_SLACK: f64 = 1e-12;
const SYNTH_TAU: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    /// `min I(Y;U)` over `X - Y - U` with `I(X;U) >= t`.
    #[serde(rename = "information-bottleneck", alias = "ib")]
    InformationBottleneck,
    /// `min I(X;U)` over `X - Y - U` with `I(Y;U) >= t`.
    #[serde(rename = "privacy-funnel", alias = "pf")]
    PrivacyFunnel,
    /// `min max{I(X;U), I(X,Y;U) - t}` over `X - U - Y`.
    #[serde(rename = "channel-synthesis", alias = "synth")]
    ChannelSynthesis,
}

impl CurveKind {
    /// Direction the cleaned curve is monotone in.
    pub fn nondecreasing(self) -> bool {
        !matches!(self, CurveKind::ChannelSynthesis)
    }

    /// Largest admissible `t`, if any.
    pub fn t_max(self, p: &JointPmf) -> Option<f64> {
        match self {
            CurveKind::InformationBottleneck => Some(p.mutual_information()),
            CurveKind::PrivacyFunnel => Some(p.h_y()),
            CurveKind::ChannelSynthesis => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRequest {
    pub kind: CurveKind,
    pub t_grid: Vec<f64>,
}

impl CurveRequest {
    pub fn new(kind: CurveKind, t_grid: Vec<f64>) -> Result<Self> {
        if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidArgument("t-grid entries must be finite and nonnegative".into()));
        }
        if t_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("t-grid must be sorted".into()));
        }
        Ok(Self { kind, t_grid })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    /// The witness misses a constraint by more than the feasibility tolerance.
    Approximate,
    InfeasibleT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    /// Value after isotonic cleanup; `None` for infeasible `t`.
    pub value: Option<f64>,
    /// Value at the optimizer's witness.
    pub raw: Option<f64>,
    pub cleanup_delta: f64,
    pub status: PointStatus,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub kind: CurveKind,
    pub points: Vec<CurvePoint>,
    pub max_cleanup_delta: f64,
}

struct Solved {
    value: f64,
    max_residual: f64,
    feasible: bool,
}

fn solve_point(p: &JointPmf, kind: CurveKind, t: f64, cfg: &OptimizerConfig) -> Result<Solved> {
    let (nx, ny) = (p.nx(), p.ny());
    match kind {
        CurveKind::InformationBottleneck | CurveKind::PrivacyFunnel => {
            let ib = kind == CurveKind::InformationBottleneck;
            let (obj, lin, top) = if ib {
                ([0.0, -1.0, 0.0], [1.0, 0.0, 0.0], p.mutual_information())
            } else {
                ([-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], p.h_y())
            };
            let cons = ConstraintSpec::structural(&[Structural::MarkovXYU]).with_linear(LinearConstraint::new(lin, Relation::Ge, t));
            let lambda = if top > 0.0 { (1.0 - t / top).clamp(0.0, 1.0) } else { 0.0 };
            let seeds = [Channel::reveal_y(nx, ny), Channel::mixture(&Channel::reveal_y(nx, ny), &Channel::constant(nx, ny), lambda)?];
            let r = solve_constrained_seeded(p, ObjectiveSpec::new(obj)?, &cons, cfg, &seeds)?;
            Ok(Solved { value: 0.0 - r.value, max_residual: r.max_residual, feasible: r.feasible })
        }
        CurveKind::ChannelSynthesis => {
            let obj = NegSmoothMax { pieces: vec![([1.0, 0.0, 0.0], 0.0), ([0.0, 0.0, 1.0], -t)], tau: SYNTH_TAU };
            let cons = ConstraintSpec::structural(&[Structural::MarkovXUY]);
            let seeds = [Channel::reveal_x(nx, ny), Channel::reveal_y(nx, ny)];
            let out = solve_general(p, &obj, &cons, cfg, &seeds)?;
            let r = out.result;
            Ok(Solved { value: obj.max_value(r.point), max_residual: r.max_residual, feasible: r.feasible })
        }
    }
}

/// Pool-adjacent-violators fit of `ys` in least squares.
fn isotonic(ys: &[f64], nondecreasing: bool) -> Vec<f64> {
    let sign = if nondecreasing { 1.0 } else { -1.0 };
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &y in ys {
        blocks.push((sign * y, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let n = n1 + n2;
            blocks.push(((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n));
        }
    }
    blocks.into_iter().flat_map(|(m, n)| std::iter::repeat_n(sign * m, n)).collect()
}

/// Evaluates the grid in parallel; points are returned in grid order.
pub fn curve(p: &JointPmf, req: &CurveRequest, cfg: &OptimizerConfig) -> Result<Curve> {
    let req = CurveRequest::new(req.kind, req.t_grid.clone())?;
    let t_max = req.kind.t_max(p);
    let solved: Vec<Option<Solved>> = req
        .t_grid
        .par_iter()
        .map(|&t| match t_max {
            Some(m) if t > m + T_SLACK => Ok(None),
            _ => solve_point(p, req.kind, t, cfg).map(Some),
        })
        .collect::<Result<_>>()?;
    let raw: Vec<f64> = solved.iter().flatten().map(|s| s.value).collect();
    let mut fitted = isotonic(&raw, req.kind.nondecreasing()).into_iter();
    let mut points = Vec::with_capacity(solved.len());
    for (&t, s) in req.t_grid.iter().zip(&solved) {
        points.push(match s {
            Some(s) => {
                let v = fitted.next().expect("one fitted value per solved point");
                CurvePoint {
                    t,
                    value: Some(v),
                    raw: Some(s.value),
                    cleanup_delta: (v - s.value).abs(),
                    status: if s.feasible { PointStatus::Ok } else { PointStatus::Approximate },
                    max_residual: s.max_residual,
                }
            }
            None => CurvePoint { t, value: None, raw: None, cleanup_delta: 0.0, status: PointStatus::InfeasibleT, max_residual: 0.0 },
        });
    }
    let max_cleanup_delta = points.iter().map(|q| q.cleanup_delta).fold(0.0, f64::max);
    Ok(Curve { kind: req.kind, points, max_cleanup_delta })
}

fn strict(p: &JointPmf, kind: CurveKind, t_grid: &[f64], cfg: &OptimizerConfig) -> Result<Curve> {
    if let Some(m) = kind.t_max(p) {
        if let Some(&t) = t_grid.iter().find(|&&t| t > m + T_SLACK) {
            return Err(Error::InfeasibleT { t, max: m });
        }
    }
    curve(p, &CurveRequest::new(kind, t_grid.to_vec())?, cfg)
}

/// `G_IB(t)` on each grid point; fails with `InfeasibleT` for `t > I(X;Y)`.
pub fn ib_curve(p: &JointPmf, t_grid: &[f64], cfg: &OptimizerConfig) -> Result<Curve> {
    strict(p, CurveKind::InformationBottleneck, t_grid, cfg)
}

/// `G_PF(t)` on each grid point; fails with `InfeasibleT` for `t > H(Y)`.
pub fn pf_curve(p: &JointPmf, t_grid: &[f64], cfg: &OptimizerConfig) -> Result<Curve> {
    strict(p, CurveKind::PrivacyFunnel, t_grid, cfg)
}

pub fn synthesis_curve(p: &JointPmf, t_grid: &[f64], cfg: &OptimizerConfig) -> Result<Curve> {
    strict(p, CurveKind::ChannelSynthesis, t_grid, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pava() {
        assert_eq!(isotonic(&[1.0, 3.0, 2.0, 4.0], true), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(isotonic(&[3.0, 1.0, 2.0], false), vec![3.0, 1.5, 1.5]);
    }

    #[test]
    fn trivial_curves() {
        let cfg = OptimizerConfig::light();
        let peq = JointPmf::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let c = ib_curve(&peq, &[0.0, 0.5, 1.0], &cfg).unwrap();
        for q in &c.points {
            assert!((q.value.unwrap() - q.t).abs() < 1e-6, "{q:?}");
        }
        assert!(matches!(ib_curve(&peq, &[1.5], &cfg), Err(Error::InfeasibleT { .. })));
        let pind = JointPmf::from_rows(&[vec![0.25; 2], vec![0.25; 2]]).unwrap();
        let c = pf_curve(&pind, &[0.0, 0.5, 1.0], &cfg).unwrap();
        assert!(c.points.iter().all(|q| q.value.unwrap().abs() < 1e-6));
        let c = curve(&pind, &CurveRequest::new(CurveKind::PrivacyFunnel, vec![0.5, 2.0]).unwrap(), &cfg).unwrap();
        assert_eq!(c.points[1].status, PointStatus::InfeasibleT);
    }
}
