//! The closure of the normalized multi-letter region, computed from a
//! finite inner approximation in four equivalent ways.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lp::{Cmp, Lp, LpOutcome};
use crate::prob::Entropies;
use crate::region::approx::{RegionApprox, TaggedPoint};
use crate::region::hull::{dot, ConvexHull3};
use crate::region::point::{outer_halfspaces, HalfSpace, MiPoint};
use crate::region::polytope::{self, Ineq};
use crate::region::rates::{noncausal_inequalities, noncausal_target, rate_corner, RateTuple};

/// Queries whose margin under any method is within this band are not compared.
pub const BOUNDARY_BAND: f64 = 1e-6;

/// Corners of the outer polytope other than `(I, I, I)`; all lie in the
/// closure of the multi-letter region.
pub fn asymptotic_corners(e: &Entropies) -> Vec<TaggedPoint> {
    polytope::outer_vertices(e)
        .into_iter()
        .filter(|v| v.dist_inf(MiPoint::new(e.mi, e.mi, e.mi)) > 1e-9 || e.mi <= 1e-12)
        .map(|v| TaggedPoint { point: v, tag: "outer-corner".into() })
        .collect()
}

/// Inner and outer approximation of `cl(I^inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClInftyApprox {
    pub entropies: Entropies,
    /// Points of the region together with the asymptotic corners.
    pub inner: Vec<TaggedPoint>,
    /// Outer polytope plus sampled halfspaces whose normal lies in the
    /// dual of the cone `(-inf,0] x (-inf,0] x [0,inf)`.
    pub outer: Vec<HalfSpace>,
}

pub fn cl_infty_region(approx: &RegionApprox) -> ClInftyApprox {
    let e = approx.entropies;
    let mut inner: Vec<TaggedPoint> = approx.inner.iter().map(|ip| TaggedPoint { point: ip.point, tag: ip.tag.clone() }).collect();
    inner.extend(asymptotic_corners(&e));
    let mut outer = outer_halfspaces(&e);
    outer.extend(approx.outer.iter().filter(|h| h.normal[0] >= 0.0 && h.normal[1] >= 0.0 && h.normal[2] <= 0.0).cloned());
    ClInftyApprox { entropies: e, inner, outer }
}

fn outer_violation(e: &Entropies, w: [f64; 3]) -> f64 {
    polytope::outer_ineqs(e).iter().map(|(a, c)| dot(*a, w) - c).fold(f64::NEG_INFINITY, f64::max)
}

/// Signed margin for `(conv(points) + (-inf,0]^2 x [0,inf)) ∩ I^o`: at most
/// zero inside.
pub fn form_cone_margin(e: &Entropies, points: &[[f64; 3]], w: [f64; 3]) -> f64 {
    let target: Vec<Ineq> = vec![([-1.0, 0.0, 0.0], -w[0]), ([0.0, -1.0, 0.0], -w[1]), ([0.0, 0.0, 1.0], w[2])];
    let tau = polytope::hull_meets(points, &target).map_or(f64::INFINITY, |r| r.0);
    tau.max(outer_violation(e, w))
}

/// Signed margin for `(conv(points) + {t(1,1,1) : t <= 0}) ∩ ([0,inf)^2 x R)`,
/// with `hull` the hull of the points. Inside, the margin is minus the
/// largest distance of some `w + s(1,1,1)` from the hull boundary.
pub fn form_diagonal_margin(hull: &ConvexHull3, w: [f64; 3]) -> f64 {
    // Variables: s >= 0 and rho; maximize rho with every plane satisfied
    // by w + s(1,1,1) with slack rho.
    let mut lp = Lp::new(vec![0.0, -1.0], vec![(0.0, 1e3), (-1e3, 1e3)]);
    for h in &hull.planes {
        lp.row(vec![h.normal.iter().sum(), 1.0], Cmp::Le, h.offset - dot(h.normal, w));
    }
    let depth = match lp.minimize() {
        Ok(LpOutcome::Optimal { x, .. }) => x[1],
        _ => f64::NEG_INFINITY,
    };
    (-depth).max(-w[0]).max(-w[1])
}

/// Signed margin of the rate corner of `w` in the noncausal region, with
/// the channel part decided on `conv(points)`.
pub fn noncausal_margin(e: &Entropies, points: &[[f64; 3]], w: [f64; 3]) -> f64 {
    let r = RateTuple(rate_corner(e, MiPoint::from_array(w)));
    let free = noncausal_inequalities(e).iter().map(|q| q.violation(&r)).fold(f64::NEG_INFINITY, f64::max);
    let tau = polytope::hull_meets(points, &noncausal_target(e, &r)).map_or(f64::INFINITY, |x| x.0);
    // Two of these hold with equality at every rate corner; only a strict
    // violation is informative.
    if free > 1e-12 {
        free.max(tau)
    } else {
        tau
    }
}

/// Signed margin of `w in I^o` with Gray-Wyner rates dominating some
/// convex combination of `points`.
pub fn gray_wyner_margin(e: &Entropies, points: &[[f64; 3]], w: [f64; 3]) -> f64 {
    let gw = [w[2], e.hx - w[0], e.hy - w[1]];
    let target: Vec<Ineq> = vec![([0.0, 0.0, 1.0], gw[0]), ([-1.0, 0.0, 0.0], gw[1] - e.hx), ([0.0, -1.0, 0.0], gw[2] - e.hy)];
    let tau = polytope::hull_meets(points, &target).map_or(f64::INFINITY, |x| x.0);
    tau.max(outer_violation(e, w))
}

/// Margins of one query under every method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMargins {
    pub query: MiPoint,
    pub cone: f64,
    pub diagonal: f64,
    pub noncausal: f64,
    pub gray_wyner: f64,
}

impl QueryMargins {
    fn all(&self) -> [f64; 4] {
        [self.cone, self.diagonal, self.noncausal, self.gray_wyner]
    }

    pub fn in_band(&self) -> bool {
        self.all().iter().any(|m| m.abs() <= BOUNDARY_BAND)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub queries: usize,
    pub compared: usize,
    pub in_band: usize,
    pub inside: usize,
    /// Disagreements between the two set expressions.
    pub form_disagreements: Vec<QueryMargins>,
    /// Disagreements of the rate-region mappings with the first expression.
    pub mapping_disagreements: Vec<QueryMargins>,
}

impl ConsistencyReport {
    pub fn agree(&self) -> bool {
        self.form_disagreements.is_empty() && self.mapping_disagreements.is_empty()
    }
}

/// Random queries: half uniform in a box around the outer polytope, half
/// random convex combinations of its corners.
pub fn consistency_queries(e: &Entropies, n: usize, seed: u64) -> Vec<MiPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corners = polytope::outer_vertices(e);
    let hi = [e.hx, e.hy, e.hxy];
    (0..n)
        .map(|i| {
            if i % 2 == 0 {
                let a: [f64; 3] = std::array::from_fn(|k| {
                    let span = hi[k].max(0.1);
                    rng.random_range(-0.1 * span..1.1 * span)
                });
                MiPoint::from_array(a)
            } else {
                let w: Vec<f64> = corners.iter().map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
                let s: f64 = w.iter().sum();
                corners.iter().zip(&w).fold(MiPoint::default(), |acc, (c, wi)| acc + *c * (wi / s))
            }
        })
        .collect()
}

/// Evaluates every query under the four descriptions and reports the
/// disagreements outside the boundary band.
pub fn cl_infty_consistency(approx: &RegionApprox, queries: &[MiPoint]) -> ConsistencyReport {
    let e = approx.entropies;
    let plain: Vec<[f64; 3]> = approx.inner.iter().map(|ip| ip.point.to_array()).collect();
    let mut star = plain.clone();
    star.extend(asymptotic_corners(&e).iter().map(|t| t.point.to_array()));
    let star_hull = ConvexHull3::new(&star);
    let mut report = ConsistencyReport {
        queries: queries.len(),
        compared: 0,
        in_band: 0,
        inside: 0,
        form_disagreements: Vec::new(),
        mapping_disagreements: Vec::new(),
    };
    for &q in queries {
        let w = q.to_array();
        let m = QueryMargins {
            query: q,
            cone: form_cone_margin(&e, &star, w),
            diagonal: form_diagonal_margin(&star_hull, w),
            noncausal: noncausal_margin(&e, &plain, w),
            gray_wyner: gray_wyner_margin(&e, &plain, w),
        };
        if m.in_band() {
            report.in_band += 1;
            continue;
        }
        report.compared += 1;
        let inside = m.cone <= 0.0;
        report.inside += usize::from(inside);
        if (m.diagonal <= 0.0) != inside {
            report.form_disagreements.push(m.clone());
        }
        if (m.noncausal <= 0.0) != inside || (m.gray_wyner <= 0.0) != inside {
            report.mapping_disagreements.push(m);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::JointPmf;
    use crate::region::approx::{inner_bound_points, RegionConfig};

    #[test]
    fn corners_and_origin() {
        let p = JointPmf::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let e = p.entropies();
        let approx = RegionApprox::from_points(&p, inner_bound_points(&p).unwrap(), RegionConfig::light());
        let pts: Vec<[f64; 3]> = approx.inner.iter().map(|ip| ip.point.to_array()).collect();
        assert!(form_cone_margin(&e, &pts, [0.0, 0.0, 0.0]) <= 1e-12);
        assert!(form_cone_margin(&e, &pts, [0.0, 0.0, e.hy_x]) <= 1e-12);
        assert!(form_cone_margin(&e, &pts, [-0.1, 0.0, 0.0]) > 0.0);
        let report = cl_infty_consistency(&approx, &consistency_queries(&e, 60, 3));
        assert!(report.agree(), "{report:?}");
    }
}
