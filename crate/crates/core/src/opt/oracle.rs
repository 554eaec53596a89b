//! Brute-force grid search for tiny instances, used to validate the
//! optimizer. Only binary `U` on sources with at most four cells.

use serde::{Deserialize, Serialize};

use super::eval::{Param, Problem, Workspace};
use super::{ConstraintSpec, ObjectiveSpec, Structural};
use crate::channel::{Channel, TriplePmf};
use crate::error::{Error, Result};
use crate::prob::JointPmf;
use crate::region::point::MiPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    pub point: MiPoint,
    pub witness: Channel,
    /// Heuristic bound on the distance to the best value over all binary `U`:
    /// half a step times the gradient's l1 norm at the best grid point.
    pub lipschitz_slack: f64,
    pub grid_points: u64,
    pub feasible_points: u64,
    /// `"q-grid"` or `"factor-grid"`.
    pub method: String,
}

/// Exhaustive search over binary channels on a grid of the given step.
///
/// Chains `X - U - Y` on a 2x2 source are searched through the factorization
/// `p(u) p(x|u) p(y|u)`, since a grid over `p(u|x,y)` almost never lands on
/// that measure-zero set.
pub fn grid_oracle(
    p: &JointPmf,
    b: ObjectiveSpec,
    cons: &ConstraintSpec,
    u_size: usize,
    step: f64,
    feasibility_tol: f64,
) -> Result<OracleResult> {
    let cells = p.support();
    if p.nx() * p.ny() > 4 {
        return Err(Error::OracleTooLarge(format!("{} cells, at most 4 allowed", p.nx() * p.ny())));
    }
    if !(1..=2).contains(&u_size) {
        return Err(Error::OracleTooLarge(format!("u_size {u_size}, at most 2 allowed")));
    }
    let steps = (1.0 / step).round();
    if !(step >= 0.005 && step <= 1.0) || ((1.0 / step) - steps).abs() > 1e-9 {
        return Err(Error::OracleTooLarge(format!("step {step} must divide 1 and be at least 0.005")));
    }
    let steps = steps as usize;
    let check = |c: &Channel| -> Result<Option<(f64, MiPoint, f64)>> {
        let t = TriplePmf::new(p, c)?;
        let res = cons.residuals(&t).iter().map(|r| r.value).fold(0.0, f64::max);
        let v = MiPoint::new(t.mi_x_u(), t.mi_y_u(), t.mi_xy_u());
        Ok((res <= feasibility_tol).then_some((v.dot(b.direction), v, res)))
    };
    if u_size == 1 {
        let c = Channel::constant(p.nx(), p.ny());
        return match check(&c)? {
            Some((value, point, _)) => Ok(OracleResult {
                value,
                point,
                witness: c,
                lipschitz_slack: 0.0,
                grid_points: 1,
                feasible_points: 1,
                method: "q-grid".into(),
            }),
            None => Err(Error::Infeasible { residual: f64::INFINITY }),
        };
    }
    if cons.structural.contains(&Structural::MarkovXUY) && p.nx() == 2 && p.ny() == 2 {
        return factor_grid(p, b, steps, &check);
    }
    // q-grid over q(u=0 | cell) for support cells.
    let k = cells.len();
    let n = steps + 1;
    let total = (n as u64).pow(k as u32);
    let mut idx = vec![0usize; k];
    let mut best: Option<(f64, MiPoint, Vec<usize>)> = None;
    let mut feasible = 0u64;
    let build = |idx: &[usize]| -> Channel {
        let mut q = vec![0.0; p.nx() * p.ny() * 2];
        for (i, row) in q.chunks_mut(2).enumerate() {
            row[0] = 1.0;
            let _ = i;
        }
        for (j, &(x, y)) in cells.iter().enumerate() {
            let g = idx[j] as f64 / steps as f64;
            let o = (x * p.ny() + y) * 2;
            q[o] = g;
            q[o + 1] = 1.0 - g;
        }
        Channel::new(p.nx(), p.ny(), 2, q).expect("grid rows are on the simplex")
    };
    for _ in 0..total {
        let c = build(&idx);
        if let Some((val, v, _)) = check(&c)? {
            feasible += 1;
            if best.as_ref().is_none_or(|bst| val > bst.0 + 1e-15) {
                best = Some((val, v, idx.clone()));
            }
        }
        for d in idx.iter_mut() {
            *d += 1;
            if *d < n {
                break;
            }
            *d = 0;
        }
    }
    let (value, point, bidx) = best.ok_or(Error::Infeasible { residual: f64::INFINITY })?;
    let witness = build(&bidx);
    // Gradient of b.v with respect to q(0|cell) - q(1|cell).
    let prob = Problem::new(p, Param::Full);
    let q = prob.from_channel(&witness).expect("full parameterization");
    let mut ws = Workspace::new(&prob, 2);
    prob.point(&q, 2, &mut ws);
    let mut g = vec![0.0; q.len()];
    prob.gradient(&q, 2, &ws, b.direction, &mut g);
    let l1: f64 = g.chunks(2).map(|r| (r[0] - r[1]).abs()).sum();
    Ok(OracleResult {
        value,
        point,
        witness,
        lipschitz_slack: 0.5 * step * l1,
        grid_points: total,
        feasible_points: feasible,
        method: "q-grid".into(),
    })
}

type Check<'a> = dyn Fn(&Channel) -> Result<Option<(f64, MiPoint, f64)>> + 'a;

/// Grid over `a = p(x0|u0)`, `c = p(x0|u1)`; the rest of the factorization
/// is solved from the marginals.
fn factor_grid(p: &JointPmf, _b: ObjectiveSpec, steps: usize, check: &Check<'_>) -> Result<OracleResult> {
    let px0 = p.px()[0];
    let py0 = p.py()[0];
    let p00 = p.get(0, 0);
    let channel_at = |a: f64, c: f64| -> Option<Channel> {
        if (a - c).abs() < 1e-12 {
            return None;
        }
        let pi = (px0 - c) / (a - c);
        if !(1e-12..=1.0 - 1e-12).contains(&pi) {
            return None;
        }
        let bb = (p00 - c * py0) / (pi * (a - c));
        let d = (a * py0 - p00) / ((1.0 - pi) * (a - c));
        let tol = 1e-12;
        if !(-tol..=1.0 + tol).contains(&bb) || !(-tol..=1.0 + tol).contains(&d) {
            return None;
        }
        let (bb, d) = (bb.clamp(0.0, 1.0), d.clamp(0.0, 1.0));
        let pxu = [[a, 1.0 - a], [c, 1.0 - c]];
        let pyu = [[bb, 1.0 - bb], [d, 1.0 - d]];
        let pu = [pi, 1.0 - pi];
        let mut q = Vec::with_capacity(8);
        for x in 0..2 {
            for y in 0..2 {
                let m: Vec<f64> = (0..2).map(|u| pu[u] * pxu[u][x] * pyu[u][y]).collect();
                let s = m[0] + m[1];
                let target = p.get(x, y);
                if (s - target).abs() > 1e-9 {
                    return None;
                }
                if target > 0.0 && s > 0.0 {
                    q.extend(m.iter().map(|v| v / s));
                } else {
                    q.extend([1.0, 0.0]);
                }
            }
        }
        Channel::new(2, 2, 2, q).ok()
    };
    let n = steps + 1;
    let mut best: Option<(f64, MiPoint, f64, f64)> = None;
    let mut feasible = 0u64;
    for i in 0..n {
        for j in 0..n {
            let (a, c) = (i as f64 / steps as f64, j as f64 / steps as f64);
            let Some(ch) = channel_at(a, c) else { continue };
            if let Some((val, v, _)) = check(&ch)? {
                feasible += 1;
                if best.as_ref().is_none_or(|bst| val > bst.0 + 1e-15) {
                    best = Some((val, v, a, c));
                }
            }
        }
    }
    let (value, point, a, c) = best.ok_or(Error::Infeasible { residual: f64::INFINITY })?;
    let witness = channel_at(a, c).expect("best point is feasible");
    let h = 1e-6;
    let f = |a: f64, c: f64| channel_at(a, c).and_then(|ch| check(&ch).ok().flatten()).map(|r| r.0);
    let partial = |fp: Option<f64>, fm: Option<f64>| match (fp, fm) {
        (Some(x), Some(y)) => ((x - y) / (2.0 * h)).abs(),
        (Some(x), None) => ((x - value) / h).abs(),
        (None, Some(y)) => ((value - y) / h).abs(),
        (None, None) => 0.0,
    };
    let da = partial(f(a + h, c), f(a - h, c));
    let dc = partial(f(a, c + h), f(a, c - h));
    Ok(OracleResult {
        value,
        point,
        witness,
        lipschitz_slack: 0.5 / steps as f64 * (da + dc),
        grid_points: (n * n) as u64,
        feasible_points: feasible,
        method: "factor-grid".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dsbs(a: f64) -> JointPmf {
        JointPmf::from_rows(&[vec![(1.0 - a) / 2.0, a / 2.0], vec![a / 2.0, (1.0 - a) / 2.0]]).unwrap()
    }

    #[test]
    fn wyner_factor_grid_reference() {
        // Frozen from an independent scan of the same parameterization.
        let cons = ConstraintSpec::structural(&[Structural::MarkovXUY]);
        let r = grid_oracle(&dsbs(0.1), ObjectiveSpec::new([0.0, 0.0, -1.0]).unwrap(), &cons, 2, 0.01, 1e-10).unwrap();
        assert_eq!(r.method, "factor-grid");
        assert!((-r.value - 0.873055207323).abs() < 1e-9, "{}", -r.value);
    }

    #[test]
    fn xor_on_q_grid() {
        let p = JointPmf::from_rows(&[vec![0.25; 2], vec![0.25; 2]]).unwrap();
        let cons = ConstraintSpec::structural(&[Structural::IndepX, Structural::IndepY]);
        let r = grid_oracle(&p, ObjectiveSpec::new([0.0, 0.0, 1.0]).unwrap(), &cons, 2, 0.05, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 0.02);
    }

    #[test]
    fn rejects_large_inputs() {
        let p = JointPmf::from_rows(&[vec![1.0 / 6.0; 3], vec![1.0 / 6.0; 3]]).unwrap();
        let b = ObjectiveSpec::new([0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            grid_oracle(&p, b, &ConstraintSpec::none(), 2, 0.01, 1e-10),
            Err(Error::OracleTooLarge(_))
        ));
        let q = dsbs(0.2);
        assert!(matches!(grid_oracle(&q, b, &ConstraintSpec::none(), 3, 0.01, 1e-10), Err(Error::OracleTooLarge(_))));
        assert!(matches!(grid_oracle(&q, b, &ConstraintSpec::none(), 2, 0.001, 1e-10), Err(Error::OracleTooLarge(_))));
    }
}
