//! Points of the mutual information region and the outer polytope.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, TriplePmf};
use crate::error::Result;
use crate::prob::{Entropies, JointPmf};

/// Tolerance for the outer bound check.
pub const OUTER_TOLERANCE: f64 = 1e-9;

/// A triple `(I(X;U), I(Y;U), I(X,Y;U))`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MiPoint {
    #[serde(rename = "v_X")]
    pub x: f64,
    #[serde(rename = "v_Y")]
    pub y: f64,
    #[serde(rename = "v_XY")]
    pub xy: f64,
}

impl MiPoint {
    pub const fn new(x: f64, y: f64, xy: f64) -> Self {
        Self { x, y, xy }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.xy]
    }

    pub fn dot(self, b: [f64; 3]) -> f64 {
        self.x * b[0] + self.y * b[1] + self.xy * b[2]
    }

    /// Sup-norm distance.
    pub fn dist_inf(self, o: MiPoint) -> f64 {
        (self.x - o.x).abs().max((self.y - o.y).abs()).max((self.xy - o.xy).abs())
    }

    /// Interaction information `I(X;Y|U) - I(X;Y)`, equal to `v_XY - v_X - v_Y`.
    pub fn interaction(self) -> f64 {
        self.xy - self.x - self.y
    }
}

impl Add for MiPoint {
    type Output = MiPoint;
    fn add(self, o: MiPoint) -> MiPoint {
        MiPoint::new(self.x + o.x, self.y + o.y, self.xy + o.xy)
    }
}

impl Sub for MiPoint {
    type Output = MiPoint;
    fn sub(self, o: MiPoint) -> MiPoint {
        MiPoint::new(self.x - o.x, self.y - o.y, self.xy - o.xy)
    }
}

impl Mul<f64> for MiPoint {
    type Output = MiPoint;
    fn mul(self, s: f64) -> MiPoint {
        MiPoint::new(self.x * s, self.y * s, self.xy * s)
    }
}

/// MI triple of the channel `c` on the source `p`.
pub fn mi_point(p: &JointPmf, c: &Channel) -> Result<MiPoint> {
    let t = TriplePmf::new(p, c)?;
    Ok(MiPoint::new(t.mi_x_u(), t.mi_y_u(), t.mi_xy_u()))
}

/// A named halfspace `a . v <= b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub name: String,
    pub normal: [f64; 3],
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(name: impl Into<String>, normal: [f64; 3], offset: f64) -> Self {
        Self { name: name.into(), normal, offset }
    }

    /// Positive when `v` lies outside.
    pub fn violation(&self, v: MiPoint) -> f64 {
        v.dot(self.normal) - self.offset
    }
}

/// The seven halfspaces of the outer polytope built from Shannon inequalities.
pub fn outer_halfspaces(e: &Entropies) -> Vec<HalfSpace> {
    vec![
        HalfSpace::new("I(X;U) >= 0", [-1.0, 0.0, 0.0], 0.0),
        HalfSpace::new("I(Y;U) >= 0", [0.0, -1.0, 0.0], 0.0),
        HalfSpace::new("I(X;Y|U) >= 0", [1.0, 1.0, -1.0], e.mi),
        HalfSpace::new("I(X;U|Y) >= 0", [0.0, 1.0, -1.0], 0.0),
        HalfSpace::new("H(X|Y,U) >= 0", [0.0, -1.0, 1.0], e.hx_y),
        HalfSpace::new("I(Y;U|X) >= 0", [1.0, 0.0, -1.0], 0.0),
        HalfSpace::new("H(Y|X,U) >= 0", [-1.0, 0.0, 1.0], e.hy_x),
    ]
}

/// Result of checking a point against the outer polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterBoundReport {
    pub inside: bool,
    pub max_violation: f64,
    /// Names of the inequalities violated beyond the tolerance.
    pub violated: Vec<String>,
}

/// Checks `v` against the outer polytope with tolerance [`OUTER_TOLERANCE`].
pub fn outer_bound_check(p: &JointPmf, v: MiPoint) -> OuterBoundReport {
    outer_bound_check_with(&p.entropies(), v, OUTER_TOLERANCE)
}

pub fn outer_bound_check_with(e: &Entropies, v: MiPoint, tol: f64) -> OuterBoundReport {
    let mut max_violation = f64::NEG_INFINITY;
    let mut violated = Vec::new();
    for h in outer_halfspaces(e) {
        let s = h.violation(v);
        max_violation = max_violation.max(s);
        if s > tol {
            violated.push(h.name);
        }
    }
    OuterBoundReport { inside: violated.is_empty(), max_violation, violated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reveal_points() {
        let p = JointPmf::from_rows(&[vec![0.45, 0.05], vec![0.05, 0.45]]).unwrap();
        let e = p.entropies();
        let v = mi_point(&p, &Channel::reveal_xy(2, 2)).unwrap();
        assert_abs_diff_eq!(v.x, e.hx, epsilon = 1e-12);
        assert_abs_diff_eq!(v.xy, e.hxy, epsilon = 1e-12);
        let v = mi_point(&p, &Channel::reveal_y(2, 2)).unwrap();
        assert_abs_diff_eq!(v.x, e.mi, epsilon = 1e-12);
        assert_abs_diff_eq!(v.y, e.hy, epsilon = 1e-12);
    }

    #[test]
    fn mixture_midpoint() {
        let p = JointPmf::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let mix = Channel::mixture(&Channel::constant(2, 2), &Channel::reveal_xy(2, 2), 0.5).unwrap();
        let v = mi_point(&p, &mix).unwrap();
        assert!(v.dist_inf(MiPoint::new(0.5, 0.5, 1.0)) < 1e-12);
    }

    #[test]
    fn outer_check_names_violation() {
        let p = JointPmf::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let r = outer_bound_check(&p, MiPoint::new(-0.1, 0.0, 0.0));
        assert!(!r.inside);
        assert_eq!(r.violated, vec!["I(X;U) >= 0".to_string()]);
        assert!(outer_bound_check(&p, MiPoint::new(0.0, 0.0, 1.0)).inside);
    }
}
