//! Small bounded polytopes in three dimensions given by halfspaces.

use crate::lp::{Cmp, Lp, LpOutcome};
use crate::prob::Entropies;
use crate::region::hull::{cross, dot};
use crate::region::point::{outer_halfspaces, MiPoint};

/// `normal . v <= offset`.
pub type Ineq = ([f64; 3], f64);

/// Relative slack used when testing whether a candidate vertex is feasible.
const VERTEX_TOL: f64 = 1e-9;

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = dot(a[0], cross(a[1], a[2]));
    let scale = a.iter().map(|r| dot(*r, *r).sqrt()).product::<f64>();
    if det.abs() <= 1e-12 * scale.max(1e-300) {
        return None;
    }
    // Cramer's rule through the cofactor rows.
    let c0 = cross(a[1], a[2]);
    let c1 = cross(a[2], a[0]);
    let c2 = cross(a[0], a[1]);
    Some([
        (b[0] * c0[0] + b[1] * c1[0] + b[2] * c2[0]) / det,
        (b[0] * c0[1] + b[1] * c1[1] + b[2] * c2[1]) / det,
        (b[0] * c0[2] + b[1] * c1[2] + b[2] * c2[2]) / det,
    ])
}

/// Vertices of `{v : a_i . v <= c_i}`, assumed bounded, by intersecting
/// every triple of planes. Returned sorted and deduplicated.
pub fn vertices(ineqs: &[Ineq]) -> Vec<[f64; 3]> {
    let scale = ineqs.iter().map(|(_, c)| c.abs()).fold(1.0, f64::max);
    let tol = VERTEX_TOL * scale;
    let mut out: Vec<[f64; 3]> = Vec::new();
    let n = ineqs.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let a = [ineqs[i].0, ineqs[j].0, ineqs[k].0];
                let Some(v) = solve3(a, [ineqs[i].1, ineqs[j].1, ineqs[k].1]) else {
                    continue;
                };
                if ineqs.iter().all(|(a, c)| dot(*a, v) <= c + tol)
                    && out.iter().all(|w| (0..3).any(|t| (w[t] - v[t]).abs() > tol))
                {
                    out.push(v);
                }
            }
        }
    }
    out.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// The outer polytope as inequalities.
pub fn outer_ineqs(e: &Entropies) -> Vec<Ineq> {
    outer_halfspaces(e).into_iter().map(|h| (h.normal, h.offset)).collect()
}

/// Vertices of the outer polytope.
pub fn outer_vertices(e: &Entropies) -> Vec<MiPoint> {
    vertices(&outer_ineqs(e)).into_iter().map(MiPoint::from_array).collect()
}

/// Maximum of `b . v` over the outer polytope.
pub fn outer_support(e: &Entropies, b: [f64; 3]) -> f64 {
    outer_vertices(e).iter().map(|v| v.dot(b)).fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest `tau` such that some convex combination of `points` satisfies
/// every inequality loosened by `tau`, with the weights attaining it.
/// A nonpositive value means the hull meets the polytope.
pub(crate) fn hull_meets(points: &[[f64; 3]], ineqs: &[Ineq]) -> Option<(f64, Vec<f64>)> {
    let m = points.len();
    if m == 0 {
        return None;
    }
    let mut objective = vec![0.0; m + 1];
    objective[m] = 1.0;
    let mut bounds = vec![(0.0, f64::INFINITY); m];
    bounds.push((-1e3, 1e3));
    let mut lp = Lp::new(objective, bounds);
    let mut sum = vec![1.0; m + 1];
    sum[m] = 0.0;
    lp.row(sum, Cmp::Eq, 1.0);
    for (a, c) in ineqs {
        let mut row: Vec<f64> = points.iter().map(|w| dot(*a, *w)).collect();
        row.push(-1.0);
        lp.row(row, Cmp::Le, *c);
    }
    match lp.minimize() {
        Ok(LpOutcome::Optimal { value, mut x }) => {
            x.truncate(m);
            Some((value, x))
        }
        _ => None,
    }
}

/// Strict separation between the hull of `points` and the hull of
/// `targets`: maximizes `delta` with `b . w <= t` on points and
/// `b . u >= t + delta` on targets, for `b` in the unit box.
pub(crate) fn separate(points: &[[f64; 3]], targets: &[[f64; 3]]) -> Option<([f64; 3], f64, f64)> {
    // Variables: b0, b1, b2, t, delta.
    let mut lp = Lp::new(
        vec![0.0, 0.0, 0.0, 0.0, -1.0],
        vec![(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1e6, 1e6), (-1e6, 1e6)],
    );
    for w in points {
        lp.row(vec![w[0], w[1], w[2], -1.0, 0.0], Cmp::Le, 0.0);
    }
    for u in targets {
        lp.row(vec![-u[0], -u[1], -u[2], 1.0, 1.0], Cmp::Le, 0.0);
    }
    match lp.minimize() {
        Ok(LpOutcome::Optimal { x, .. }) => Some(([x[0], x[1], x[2]], x[3], x[4])),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::JointPmf;

    #[test]
    fn unit_cube_vertices() {
        let mut ineqs = Vec::new();
        for k in 0..3 {
            let mut a = [0.0; 3];
            a[k] = 1.0;
            ineqs.push((a, 1.0));
            a[k] = -1.0;
            ineqs.push((a, 0.0));
        }
        assert_eq!(vertices(&ineqs).len(), 8);
    }

    #[test]
    fn outer_corners_of_independent_bits() {
        let p = JointPmf::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let vs = outer_vertices(&p.entropies());
        for want in [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 2.0]] {
            assert!(vs.iter().any(|v| v.dist_inf(MiPoint::from_array(want)) < 1e-12), "{want:?} in {vs:?}");
        }
    }

    #[test]
    fn separation_and_meeting() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let (tau, w) = hull_meets(&pts, &[([1.0, 1.0, 0.0], 0.5), ([-1.0, 0.0, 0.0], -0.25)]).unwrap();
        assert!(tau <= 1e-12);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let (b, t, delta) = separate(&pts, &[[1.0, 1.0, 1.0]]).unwrap();
        assert!(delta > 0.0);
        assert!(pts.iter().all(|p| dot(b, *p) <= t + 1e-12));
    }
}
