//! Convex hull of a finite point set in R^3, including flat cases.
//!
//! Full-dimensional hulls are built incrementally with exact orientation
//! predicates; lower-dimensional point sets are handled in their affine hull.

use std::collections::HashSet;

use robust::{orient2d, orient3d, Coord, Coord3D};
use serde::{Deserialize, Serialize};

/// Relative tolerance used to detect the affine dimension.
pub const FLATNESS_TOL: f64 = 1e-9;

/// `normal . v <= offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: [f64; 3],
    pub offset: f64,
}

impl Plane {
    pub fn signed_distance(&self, v: [f64; 3]) -> f64 {
        dot(self.normal, v) - self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexHull3 {
    pub points: Vec<[f64; 3]>,
    /// Affine dimension of the point set.
    pub dim: usize,
    /// Indices of hull vertices, sorted.
    pub vertices: Vec<usize>,
    /// Outward-oriented triangles (full-dimensional case only).
    pub facets: Vec<[usize; 3]>,
    pub planes: Vec<Plane>,
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn c3(p: [f64; 3]) -> Coord3D<f64> {
    Coord3D { x: p[0], y: p[1], z: p[2] }
}

/// Positive when `d` is on the inner side of the outward triangle `(a, b, c)`.
fn orient(a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]) -> f64 {
    orient3d(c3(a), c3(b), c3(c), c3(d))
}

impl ConvexHull3 {
    /// Builds the hull. Empty input yields an empty hull of dimension 0.
    pub fn new(input: &[[f64; 3]]) -> Self {
        let points = dedupe(input);
        if points.is_empty() {
            return Self { points, dim: 0, vertices: Vec::new(), facets: Vec::new(), planes: Vec::new() };
        }
        let scale_ = points
            .iter()
            .flat_map(|p| p.iter().map(|v| v.abs()))
            .fold(1.0f64, f64::max);
        let eps = FLATNESS_TOL * scale_;
        let i0 = 0;
        let i1 = argmax(&points, |p| norm(sub(p, points[i0])));
        if norm(sub(points[i1], points[i0])) <= eps {
            return Self::point_hull(points);
        }
        let d01 = unit(sub(points[i1], points[i0]));
        let off_line = |p: [f64; 3]| norm(cross(sub(p, points[i0]), d01));
        let i2 = argmax(&points, off_line);
        if off_line(points[i2]) <= eps {
            return Self::segment_hull(points, i0, d01);
        }
        let nrm = unit(cross(sub(points[i1], points[i0]), sub(points[i2], points[i0])));
        let off_plane = |p: [f64; 3]| dot(sub(p, points[i0]), nrm).abs();
        let i3 = argmax(&points, off_plane);
        if off_plane(points[i3]) <= eps {
            return Self::planar_hull(points, i0, nrm);
        }
        Self::full_hull(points, [i0, i1, i2, i3])
    }

    fn point_hull(points: Vec<[f64; 3]>) -> Self {
        let p = points[0];
        let mut planes = Vec::new();
        for k in 0..3 {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            planes.push(Plane { normal: e, offset: p[k] });
            e[k] = -1.0;
            planes.push(Plane { normal: e, offset: -p[k] });
        }
        Self { points, dim: 0, vertices: vec![0], facets: Vec::new(), planes }
    }

    fn segment_hull(points: Vec<[f64; 3]>, i0: usize, d: [f64; 3]) -> Self {
        let t = |p: [f64; 3]| dot(sub(p, points[i0]), d);
        let lo = argmax(&points, |p| -t(p));
        let hi = argmax(&points, t);
        let (o1, o2) = orthonormal_pair(d);
        let a = points[lo];
        let mut planes = vec![
            Plane { normal: d, offset: dot(d, points[hi]) },
            Plane { normal: scale(d, -1.0), offset: -dot(d, a) },
        ];
        for o in [o1, o2] {
            planes.push(Plane { normal: o, offset: dot(o, a) });
            planes.push(Plane { normal: scale(o, -1.0), offset: -dot(o, a) });
        }
        let mut vertices = vec![lo, hi];
        vertices.sort_unstable();
        vertices.dedup();
        Self { points, dim: 1, vertices, facets: Vec::new(), planes }
    }

    fn planar_hull(points: Vec<[f64; 3]>, i0: usize, nrm: [f64; 3]) -> Self {
        let (e1, e2) = orthonormal_pair(nrm);
        let origin = points[i0];
        let proj: Vec<Coord<f64>> = points
            .iter()
            .map(|&p| {
                let d = sub(p, origin);
                Coord { x: dot(d, e1), y: dot(d, e2) }
            })
            .collect();
        // Andrew's monotone chain, counterclockwise.
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| proj[a].x.total_cmp(&proj[b].x).then(proj[a].y.total_cmp(&proj[b].y)));
        let mut chain: Vec<usize> = Vec::new();
        for pass in 0..2 {
            let start = chain.len();
            let seq: Vec<usize> = if pass == 0 { order.clone() } else { order.iter().rev().copied().collect() };
            for &i in &seq {
                while chain.len() >= start + 2 {
                    let a = proj[chain[chain.len() - 2]];
                    let b = proj[chain[chain.len() - 1]];
                    if orient2d(a, b, proj[i]) <= 0.0 {
                        chain.pop();
                    } else {
                        break;
                    }
                }
                chain.push(i);
            }
            chain.pop();
        }
        let offset = dot(nrm, origin);
        let mut planes = vec![
            Plane { normal: nrm, offset },
            Plane { normal: scale(nrm, -1.0), offset: -offset },
        ];
        let k = chain.len();
        for j in 0..k {
            let a = points[chain[j]];
            let b = points[chain[(j + 1) % k]];
            // Counterclockwise in (e1, e2), so the outward normal is edge x nrm.
            let n = unit(cross(sub(b, a), nrm));
            planes.push(Plane { normal: n, offset: dot(n, a) });
        }
        let mut vertices = chain;
        vertices.sort_unstable();
        Self { points, dim: 2, vertices, facets: Vec::new(), planes }
    }

    fn full_hull(points: Vec<[f64; 3]>, init: [usize; 4]) -> Self {
        let [a, b, c, d] = init;
        let mut facets: Vec<[usize; 3]> = Vec::new();
        for (tri, opp) in [([a, b, c], d), ([a, b, d], c), ([a, c, d], b), ([b, c, d], a)] {
            let [x, y, z] = tri;
            if orient(points[x], points[y], points[z], points[opp]) > 0.0 {
                facets.push([x, y, z]);
            } else {
                facets.push([x, z, y]);
            }
        }
        for (i, &p) in points.iter().enumerate() {
            if init.contains(&i) {
                continue;
            }
            let visible: Vec<bool> = facets
                .iter()
                .map(|f| orient(points[f[0]], points[f[1]], points[f[2]], p) < 0.0)
                .collect();
            if !visible.iter().any(|&v| v) {
                continue;
            }
            let mut edges: HashSet<(usize, usize)> = HashSet::new();
            for (f, _) in facets.iter().zip(&visible).filter(|(_, &v)| v) {
                for k in 0..3 {
                    edges.insert((f[k], f[(k + 1) % 3]));
                }
            }
            let mut horizon: Vec<(usize, usize)> = edges.iter().copied().filter(|&(u, v)| !edges.contains(&(v, u))).collect();
            horizon.sort_unstable();
            let mut next: Vec<[usize; 3]> = facets
                .iter()
                .zip(&visible)
                .filter(|(_, &v)| !v)
                .map(|(f, _)| *f)
                .collect();
            next.extend(horizon.into_iter().map(|(u, v)| [u, v, i]));
            facets = next;
        }
        let mut vertices: Vec<usize> = facets.iter().flatten().copied().collect();
        vertices.sort_unstable();
        vertices.dedup();
        let planes = facets
            .iter()
            .map(|f| {
                let n = unit(cross(sub(points[f[1]], points[f[0]]), sub(points[f[2]], points[f[0]])));
                Plane { normal: n, offset: dot(n, points[f[0]]) }
            })
            .collect();
        Self { points, dim: 3, vertices, facets, planes }
    }

    /// Largest signed distance to a bounding plane; at most 0 inside.
    pub fn max_violation(&self, v: [f64; 3]) -> f64 {
        self.planes
            .iter()
            .map(|h| h.signed_distance(v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, v: [f64; 3], tol: f64) -> bool {
        !self.points.is_empty() && self.max_violation(v) <= tol
    }

    /// Volume (zero unless full-dimensional).
    pub fn volume(&self) -> f64 {
        if self.dim < 3 {
            return 0.0;
        }
        let n = self.vertices.len() as f64;
        let mut c = [0.0; 3];
        for &i in &self.vertices {
            for k in 0..3 {
                c[k] += self.points[i][k] / n;
            }
        }
        self.facets
            .iter()
            .map(|f| {
                let a = sub(self.points[f[0]], c);
                let b = sub(self.points[f[1]], c);
                let d = sub(self.points[f[2]], c);
                dot(a, cross(b, d)) / 6.0
            })
            .sum()
    }

    pub fn vertex_points(&self) -> Vec<[f64; 3]> {
        self.vertices.iter().map(|&i| self.points[i]).collect()
    }
}

fn argmax(points: &[[f64; 3]], f: impl Fn([f64; 3]) -> f64) -> usize {
    let mut best = 0;
    let mut bv = f64::NEG_INFINITY;
    for (i, &p) in points.iter().enumerate() {
        let v = f(p);
        if v > bv {
            bv = v;
            best = i;
        }
    }
    best
}

fn orthonormal_pair(d: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if d[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let o1 = unit(cross(d, helper));
    let o2 = cross(d, o1);
    (o1, o2)
}

fn dedupe(input: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let mut out: Vec<[f64; 3]> = Vec::with_capacity(input.len());
    let mut seen: HashSet<[u64; 3]> = HashSet::new();
    for &p in input {
        if p.iter().any(|v| !v.is_finite()) {
            continue;
        }
        // Snap to a 1e-12 lattice for deduplication only.
        let key = p.map(|v| ((v * 1e12).round() as i64) as u64);
        if seen.insert(key) {
            out.push(p);
        }
    }
    out
}
