//! Accelerated projected gradient ascent over a product of simplices with
//! Armijo backtracking and function-value restarts. Every row moves at once,
//! each scaled by the inverse of its mass so that rows of small mass are not
//! starved.

use super::eval::{project_simplex, Problem, Workspace};
use crate::region::point::MiPoint;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const MAX_STEP: f64 = 1e6;

#[derive(Debug, Clone)]
pub(crate) struct LocalOutcome {
    pub q: Vec<f64>,
    pub nu: usize,
    pub v: MiPoint,
    pub iterations: usize,
}

struct Step {
    q: Vec<f64>,
    v: MiPoint,
    f: f64,
}

/// One projected gradient step from `base` with backtracking; `None` when
/// no ascent is possible.
#[allow(clippy::too_many_arguments)]
fn step_from<F>(
    prob: &Problem,
    obj: &F,
    base: &[f64],
    nu: usize,
    alpha: &mut f64,
    ws: &mut Workspace,
    grad: &mut [f64],
    scratch: &mut Vec<f64>,
) -> Option<Step>
where
    F: Fn(MiPoint) -> (f64, [f64; 3]) + ?Sized,
{
    let v = prob.point(base, nu, ws);
    let (f, coef) = obj(v);
    prob.gradient(base, nu, ws, coef, grad);
    let mut trial = vec![0.0; base.len()];
    for _ in 0..MAX_BACKTRACKS {
        let mut ascent = 0.0;
        for r in 0..prob.rows() {
            let s = *alpha / prob.row_weight[r];
            let range = r * nu..(r + 1) * nu;
            for i in range.clone() {
                trial[i] = base[i] + s * grad[i];
            }
            project_simplex(&mut trial[range.clone()], scratch);
            for i in range {
                ascent += grad[i] * (trial[i] - base[i]);
            }
        }
        if ascent <= 1e-16 {
            return None;
        }
        let vt = prob.point(&trial, nu, ws);
        let ft = obj(vt).0;
        if ft >= f + ARMIJO * ascent {
            *alpha = (*alpha * 2.0).min(MAX_STEP);
            return Some(Step { q: trial, v: vt, f: ft });
        }
        *alpha *= 0.25;
    }
    None
}

/// Maximizes `obj(v(q))` starting from `q0`.
pub(crate) fn ascend<F>(prob: &Problem, obj: &F, q0: Vec<f64>, nu: usize, max_iter: usize, tol: f64) -> LocalOutcome
where
    F: Fn(MiPoint) -> (f64, [f64; 3]) + ?Sized,
{
    let mut ws = Workspace::new(prob, nu);
    let mut q = q0;
    let mut v = prob.point(&q, nu, &mut ws);
    let mut f = obj(v).0;
    if prob.rows() == 0 {
        return LocalOutcome { q, nu, v, iterations: 0 };
    }
    let mut grad = vec![0.0; q.len()];
    let mut scratch = Vec::with_capacity(nu);
    let mut q_prev = q.clone();
    let mut t = 1.0f64;
    let mut alpha = 1.0;
    let mut stall = 0;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        let mut step = None;
        if beta > 0.0 {
            let mut y: Vec<f64> = q.iter().zip(&q_prev).map(|(a, b)| a + beta * (a - b)).collect();
            for row in y.chunks_mut(nu) {
                project_simplex(row, &mut scratch);
            }
            step = step_from(prob, obj, &y, nu, &mut alpha, &mut ws, &mut grad, &mut scratch).filter(|s| s.f >= f);
        }
        if step.is_none() {
            // Restart the momentum with a plain step from q.
            t = 1.0;
            step = step_from(prob, obj, &q, nu, &mut alpha, &mut ws, &mut grad, &mut scratch).filter(|s| s.f >= f);
        } else {
            t = t_next;
        }
        if t == 1.0 {
            t = 0.5 * (1.0 + 5.0f64.sqrt());
        }
        let Some(s) = step else { break };
        let gain = s.f - f;
        q_prev = std::mem::replace(&mut q, s.q);
        v = s.v;
        f = s.f;
        if gain < tol {
            stall += 1;
            if stall >= 25 {
                break;
            }
        } else {
            stall = 0;
        }
    }
    LocalOutcome { q, nu, v, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opt::eval::Param;
    use crate::prob::JointPmf;

    #[test]
    fn climbs_to_reveal_xy() {
        // Maximizing v_XY over all channels reaches H(X,Y).
        let p = JointPmf::from_rows(&[vec![0.4, 0.1], vec![0.2, 0.3]]).unwrap();
        let prob = Problem::new(&p, Param::Full);
        let nu = 4;
        let q0: Vec<f64> = (0..prob.rows() * nu)
            .map(|i| [0.3, 0.2, 0.25, 0.25][(i + i / nu) % 4])
            .collect();
        let obj = |v: MiPoint| (v.xy, [0.0, 0.0, 1.0]);
        let out = ascend(&prob, &obj, q0, nu, 2000, 1e-13);
        assert!((out.v.xy - p.h_xy()).abs() < 1e-6, "{} vs {}", out.v.xy, p.h_xy());
    }
}
