//! Rate regions of the extended Gray-Wyner system and the projections of
//! the MI region onto the Gray-Wyner region and the region of tension.

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::prob::{Entropies, JointPmf};
use crate::region::approx::{search_intersection, Certificate, CertificateKind, RegionApprox, RegionConfig, TaggedPoint, Verdict, MEMBERSHIP_TOL};
use crate::region::point::{outer_bound_check_with, MiPoint, OUTER_TOLERANCE};
use crate::region::polytope::{self, Ineq};

/// Coordinates within this distance below zero are clamped to zero.
pub const RATE_CLAMP: f64 = 1e-9;

/// Rates `(R0, R1, R2, R3, R4)` in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RateTuple(pub [f64; 5]);

impl RateTuple {
    pub fn new(r: [f64; 5]) -> Result<Self> {
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("rates {r:?} must be finite")));
        }
        Ok(Self(r))
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Copy with coordinate `i` shifted by `delta`.
    pub fn shifted(&self, i: usize, delta: f64) -> RateTuple {
        let mut r = self.0;
        r[i] += delta;
        RateTuple(r)
    }
}

/// The rate corner `(v_XY, H(X)-v_X, H(Y)-v_Y, H(X|Y)-v_XY+v_Y, H(Y|X)-v_XY+v_X)`.
pub fn rate_corner(e: &Entropies, v: MiPoint) -> [f64; 5] {
    [v.xy, e.hx - v.x, e.hy - v.y, e.hx_y - v.xy + v.y, e.hy_x - v.xy + v.x]
}

/// Rate corner of a point of the outer polytope, with floating dust clamped.
pub fn rate_tuple_of(p: &JointPmf, v: MiPoint) -> Result<RateTuple> {
    let e = p.entropies();
    let report = outer_bound_check_with(&e, v, OUTER_TOLERANCE);
    if !report.inside {
        return Err(Error::OuterBoundViolated { name: report.violated.join(", "), amount: report.max_violation });
    }
    let r = rate_corner(&e, v).map(|c| if c < 0.0 && c >= -RATE_CLAMP { 0.0 } else { c });
    Ok(RateTuple(r))
}

/// `coefficients . r >= bound`, valid on a whole rate region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateInequality {
    pub name: String,
    pub coefficients: [f64; 5],
    pub bound: f64,
}

impl RateInequality {
    fn new(name: &str, coefficients: [f64; 5], bound: f64) -> Self {
        Self { name: name.to_string(), coefficients, bound }
    }

    /// Positive when `r` violates the inequality.
    pub fn violation(&self, r: &RateTuple) -> f64 {
        self.bound - self.coefficients.iter().zip(r.0).map(|(a, b)| a * b).sum::<f64>()
    }
}

fn nonnegativity() -> Vec<RateInequality> {
    (0..5)
        .map(|i| {
            let mut a = [0.0; 5];
            a[i] = 1.0;
            RateInequality::new(["R0 >= 0", "R1 >= 0", "R2 >= 0", "R3 >= 0", "R4 >= 0"][i], a, 0.0)
        })
        .collect()
}

/// Channel-free inequalities satisfied by every tuple of the causal region.
pub fn causal_inequalities(e: &Entropies) -> Vec<RateInequality> {
    let mut v = vec![
        RateInequality::new("R0+R1 >= H(X)", [1.0, 1.0, 0.0, 0.0, 0.0], e.hx),
        RateInequality::new("R0+R2 >= H(Y)", [1.0, 0.0, 1.0, 0.0, 0.0], e.hy),
        RateInequality::new("R0+R1+R2 >= H(X,Y)", [1.0, 1.0, 1.0, 0.0, 0.0], e.hxy),
        RateInequality::new("R0+R3 >= H(X|Y)", [1.0, 0.0, 0.0, 1.0, 0.0], e.hx_y),
        RateInequality::new("R0+R4 >= H(Y|X)", [1.0, 0.0, 0.0, 0.0, 1.0], e.hy_x),
        RateInequality::new("R0+R2+R3 >= H(X,Y)", [1.0, 0.0, 1.0, 1.0, 0.0], e.hxy),
        RateInequality::new("R0+R1+R4 >= H(X,Y)", [1.0, 1.0, 0.0, 0.0, 1.0], e.hxy),
        RateInequality::new("R0+R3+R4 >= max(H(X|Y),H(Y|X))", [1.0, 0.0, 0.0, 1.0, 1.0], e.hx_y.max(e.hy_x)),
    ];
    v.extend(nonnegativity());
    v
}

/// The channel-free inequalities of the noncausal region.
pub fn noncausal_inequalities(e: &Entropies) -> Vec<RateInequality> {
    let mut v = vec![
        RateInequality::new("R0+R3 >= H(X|Y)", [1.0, 0.0, 0.0, 1.0, 0.0], e.hx_y),
        RateInequality::new("R0+R4 >= H(Y|X)", [1.0, 0.0, 0.0, 0.0, 1.0], e.hy_x),
        RateInequality::new("R0+R2+R3 >= H(X,Y)", [1.0, 0.0, 1.0, 1.0, 0.0], e.hxy),
        RateInequality::new("R0+R1+R4 >= H(X,Y)", [1.0, 1.0, 0.0, 0.0, 1.0], e.hxy),
    ];
    v.extend(nonnegativity());
    v
}

fn first_violation(ineqs: &[RateInequality], r: &RateTuple) -> Option<Verdict> {
    ineqs
        .iter()
        .map(|q| (q, q.violation(r)))
        .filter(|(_, s)| *s > MEMBERSHIP_TOL)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(q, s)| {
            Verdict::Outside(Certificate {
                kind: CertificateKind::ValidInequality,
                name: q.name.clone(),
                coefficients: q.coefficients.to_vec(),
                bound: q.bound,
                amount: s,
            })
        })
}

/// Constraints on `v` making the rate corner of `v` dominated by `r`.
pub fn causal_target(e: &Entropies, r: &RateTuple) -> Vec<Ineq> {
    let [r0, r1, r2, r3, r4] = r.0;
    vec![
        ([0.0, 0.0, 1.0], r0),
        ([-1.0, 0.0, 0.0], r1 - e.hx),
        ([0.0, -1.0, 0.0], r2 - e.hy),
        ([0.0, 1.0, -1.0], r3 - e.hx_y),
        ([1.0, 0.0, -1.0], r4 - e.hy_x),
    ]
}

/// The part of the noncausal system that involves the channel.
pub fn noncausal_target(e: &Entropies, r: &RateTuple) -> Vec<Ineq> {
    let [r0, r1, r2, r3, r4] = r.0;
    let lx = (e.hx - r1).max(e.hx - e.hy - r3).max(e.hx - r2 - r3);
    let ly = (e.hy - r2).max(e.hy - e.hx - r4).max(e.hy - r1 - r4);
    vec![([0.0, 0.0, 1.0], r0), ([-1.0, 0.0, 0.0], -lx), ([0.0, -1.0, 0.0], -ly)]
}

/// Decides membership in the causal rate region.
pub fn rate_membership(p: &JointPmf, r: &RateTuple, cfg: &RegionConfig) -> Result<Verdict> {
    rate_membership_with_hints(p, r, &[], cfg)
}

/// As [`rate_membership`], with channels tried first. A tuple on the
/// boundary pins `v` to a single point, so the generating channel should be
/// supplied when it is known.
pub fn rate_membership_with_hints(p: &JointPmf, r: &RateTuple, hints: &[Channel], cfg: &RegionConfig) -> Result<Verdict> {
    let e = p.entropies();
    if let Some(v) = first_violation(&causal_inequalities(&e), r) {
        return Ok(v);
    }
    search_intersection(p, &causal_target(&e, r), hints, cfg)
}

/// Decides membership in the noncausal rate region.
pub fn noncausal_rate_membership(p: &JointPmf, r: &RateTuple, cfg: &RegionConfig) -> Result<Verdict> {
    noncausal_rate_membership_with_hints(p, r, &[], cfg)
}

pub fn noncausal_rate_membership_with_hints(p: &JointPmf, r: &RateTuple, hints: &[Channel], cfg: &RegionConfig) -> Result<Verdict> {
    let e = p.entropies();
    if let Some(v) = first_violation(&noncausal_inequalities(&e), r) {
        return Ok(v);
    }
    search_intersection(p, &noncausal_target(&e, r), hints, cfg)
}

/// Gray-Wyner rates `(v_XY, H(X)-v_X, H(Y)-v_Y)`.
pub fn gray_wyner_point(e: &Entropies, v: MiPoint) -> [f64; 3] {
    [v.xy, e.hx - v.x, e.hy - v.y]
}

/// Tension coordinates `(I(Y;U|X), I(X;U|Y), I(X;Y|U))`.
pub fn tension_point(e: &Entropies, v: MiPoint) -> [f64; 3] {
    [v.xy - v.x, v.xy - v.y, e.mi - v.x - v.y + v.xy]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionKind {
    GrayWyner,
    Tension,
}

/// Increasing hull of the image of the inner points under an affine map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub kind: ProjectionKind,
    pub points: Vec<TaggedPoint>,
}

impl Projection {
    /// Whether `w` dominates some convex combination of the points, with
    /// the smallest uniform slack achieving it.
    pub fn slack(&self, w: [f64; 3]) -> f64 {
        let pts: Vec<[f64; 3]> = self.points.iter().map(|t| t.point.to_array()).collect();
        let ineqs: Vec<Ineq> = (0..3)
            .map(|k| {
                let mut a = [0.0; 3];
                a[k] = 1.0;
                (a, w[k])
            })
            .collect();
        polytope::hull_meets(&pts, &ineqs).map_or(f64::INFINITY, |(tau, _)| tau)
    }

    pub fn contains(&self, w: [f64; 3], tol: f64) -> bool {
        self.slack(w) <= tol
    }
}

fn project(approx: &RegionApprox, kind: ProjectionKind, f: impl Fn(&Entropies, MiPoint) -> [f64; 3]) -> Projection {
    Projection {
        kind,
        points: approx
            .inner
            .iter()
            .map(|ip| TaggedPoint { point: MiPoint::from_array(f(&approx.entropies, ip.point)), tag: ip.tag.clone() })
            .collect(),
    }
}

pub fn gray_wyner_projection(approx: &RegionApprox) -> Projection {
    project(approx, ProjectionKind::GrayWyner, gray_wyner_point)
}

pub fn tension_projection(approx: &RegionApprox) -> Projection {
    project(approx, ProjectionKind::Tension, tension_point)
}
