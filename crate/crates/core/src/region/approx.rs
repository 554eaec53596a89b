//! Finite inner/outer approximations of the mutual information region and
//! membership decisions built on them.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{Channel, ChannelFile};
use crate::error::Result;
use crate::opt::{self, support_function, ObjectiveSpec, OptimizerConfig};
use crate::prob::{Entropies, JointPmf};
use crate::region::frl::frl_pair_channel;
use crate::region::hull::{dot, unit, ConvexHull3};
use crate::region::point::{mi_point, outer_halfspaces, HalfSpace, MiPoint};
use crate::region::polytope::{self, Ineq};

/// Version tag of the default direction set.
pub const DIRECTION_SET_VERSION: &str = "icosphere-2+faces-v1";

/// Directions whose support values or derivatives define the catalogued quantities.
pub const FACE_DIRECTIONS: [[f64; 3]; 9] = [
    [1.0, 1.0, -1.0],
    [1.0, 1.0, -2.0],
    [1.0, 2.0, -2.0],
    [1.0, -1.0, 0.0],
    [-2.0, 0.0, 1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [-1.0, 0.0, 0.0],
    [-1.0, -1.0, 0.0],
];

/// Separation between Inside and Outside verdicts.
pub const MEMBERSHIP_TOL: f64 = 1e-7;

/// Unit vectors of a subdivided icosahedron: `10 * 4^level + 2` of them.
pub fn icosphere_directions(level: usize) -> Vec<[f64; 3]> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|v| unit(*v))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push(unit([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                verts.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    verts
}

/// The versioned default: icosphere level 2 followed by the catalogue directions.
pub fn default_directions() -> Vec<[f64; 3]> {
    let mut d = icosphere_directions(2);
    d.extend(FACE_DIRECTIONS);
    d
}

/// An achieved point with the channel that achieves it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerPoint {
    pub point: MiPoint,
    pub tag: String,
    pub witness: Channel,
}

impl InnerPoint {
    pub fn from_channel(p: &JointPmf, witness: Channel, tag: impl Into<String>) -> Result<Self> {
        Ok(Self { point: mi_point(p, &witness)?, tag: tag.into(), witness })
    }
}

/// The five points whose hull is the classical inner bound: `U` empty,
/// `U = X`, `U = Y`, `U = (X, Y)`, and the point
/// `(H(X|Y), H(Y|X), H(X|Y) + H(Y|X))` obtained from a pair of functional
/// representations mixed with `U = (X, Y)`.
pub fn inner_bound_points(p: &JointPmf) -> Result<Vec<InnerPoint>> {
    let (nx, ny) = (p.nx(), p.ny());
    let e = p.entropies();
    let full = Channel::reveal_xy(nx, ny);
    let pair = frl_pair_channel(p)?;
    let t = mi_point(p, &pair)?.xy;
    let s = e.hx_y + e.hy_x;
    // Both channels lie on the line (-H(Y|X), -H(X|Y), 0) + r (1, 1, 1).
    let lambda = if e.hxy - t > 1e-15 { ((s - t) / (e.hxy - t)).clamp(0.0, 1.0) } else { 1.0 };
    let frl = Channel::mixture(&pair, &full, lambda)?.prune(p);
    Ok(vec![
        InnerPoint::from_channel(p, Channel::constant(nx, ny), "const")?,
        InnerPoint::from_channel(p, Channel::reveal_x(nx, ny), "U=X")?,
        InnerPoint::from_channel(p, Channel::reveal_y(nx, ny), "U=Y")?,
        InnerPoint::from_channel(p, full, "U=XY")?,
        InnerPoint::from_channel(p, frl, "frl-pair")?,
    ])
}

/// Settings for sampling and membership searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    pub optimizer: OptimizerConfig,
    pub directions: Vec<[f64; 3]>,
    /// Largest number of partitions of the support used for deterministic points.
    pub enumeration_cap: usize,
    /// Cutting-plane rounds in membership searches.
    pub rounds: usize,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self { optimizer: OptimizerConfig::default(), directions: default_directions(), enumeration_cap: 12_000, rounds: 16 }
    }
}

impl RegionConfig {
    pub fn light() -> Self {
        Self { optimizer: OptimizerConfig::light(), ..Self::default() }
    }
}

/// Deterministic `U = f(X, Y)` on the support, with the largest alphabet
/// whose partition count stays within `cap`.
pub fn deterministic_points(p: &JointPmf, cap: usize) -> Result<Vec<InnerPoint>> {
    let support = p.support();
    let n = support.len();
    let mut k = 1;
    while k < n && opt::partition_count(n, k + 1) <= cap as f64 && ((k + 1) as f64).powi(n as i32) <= opt::ENUMERATION_CAP {
        k += 1;
    }
    let (nx, ny) = (p.nx(), p.ny());
    let mut index = vec![usize::MAX; nx * ny];
    for (i, (x, y)) in support.iter().enumerate() {
        index[x * ny + y] = i;
    }
    let mut out = Vec::new();
    let mut err = None;
    opt::for_each_partition(n, k, &mut |lab| {
        let nu = lab.iter().max().map_or(1, |m| m + 1);
        let c = Channel::deterministic(nx, ny, nu, |x, y| {
            let i = index[x * ny + y];
            if i == usize::MAX { 0 } else { lab[i] }
        });
        match InnerPoint::from_channel(p, c, "deterministic") {
            Ok(ip) => out.push(ip),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Keeps only points that are vertices of the hull of `points`; for flat
/// hulls every distinct point is kept.
pub(crate) fn reduce_to_vertices(points: Vec<InnerPoint>) -> Vec<InnerPoint> {
    let coords: Vec<[f64; 3]> = points.iter().map(|ip| ip.point.to_array()).collect();
    let hull = ConvexHull3::new(&coords);
    if hull.dim < 3 {
        let mut out: Vec<InnerPoint> = Vec::new();
        for ip in points {
            if out.iter().all(|o| o.point.dist_inf(ip.point) > 1e-12) {
                out.push(ip);
            }
        }
        return out;
    }
    let verts = hull.vertex_points();
    let mut out: Vec<InnerPoint> = Vec::new();
    for ip in points {
        let a = ip.point.to_array();
        if verts.iter().any(|v| v == &a) && out.iter().all(|o| o.point.to_array() != a) {
            out.push(ip);
        }
    }
    out
}

/// Support information in one sampled direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionGap {
    pub direction: [f64; 3],
    /// Best value found by the optimizer.
    pub psi_hat: f64,
    /// Support of the inner hull, at least `psi_hat`.
    pub inner: f64,
    /// Support of the outer polytope.
    pub outer_polytope: f64,
    /// `outer_polytope - inner`.
    pub gap: f64,
    pub converged: bool,
}

/// Inner hull of achieved points and outer halfspaces from sampled directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionApprox {
    pub entropies: Entropies,
    pub inner: Vec<InnerPoint>,
    /// Sampled supporting halfspaces `b . v <= psi(b)`.
    pub outer: Vec<HalfSpace>,
    pub gaps: Vec<DirectionGap>,
    pub direction_set_version: String,
    pub hull_dim: usize,
    /// Set when the hull is not full-dimensional.
    pub degenerate: bool,
    pub config: RegionConfig,
    #[serde(skip)]
    hull: Option<ConvexHull3>,
}

/// Verdict of a fast hull/halfspace classification without witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Inside,
    Outside,
    Unknown,
}

/// Samples the region: deterministic points, the inner bound points and
/// one support solve per direction.
pub fn sample_region(p: &JointPmf, cfg: &RegionConfig) -> Result<RegionApprox> {
    if cfg.directions.len() < 6 {
        return Err(crate::Error::InvalidArgument("at least 6 directions are required".into()));
    }
    let e = p.entropies();
    let mut points = inner_bound_points(p)?;
    points.extend(deterministic_points(p, cfg.enumeration_cap)?);
    let solves: Vec<Result<opt::SolveResult>> = cfg
        .directions
        .par_iter()
        .map(|b| support_function(p, ObjectiveSpec::new(*b)?, &cfg.optimizer))
        .collect();
    let mut psi = Vec::with_capacity(solves.len());
    for (b, r) in cfg.directions.iter().zip(solves) {
        let r = r?;
        psi.push((r.value, r.converged));
        points.push(InnerPoint { point: r.point, tag: format!("support{b:?}"), witness: r.witness });
    }
    let inner = reduce_to_vertices(points);
    let mut approx = RegionApprox::from_points(p, inner, cfg.clone());
    approx.gaps = cfg
        .directions
        .iter()
        .zip(&psi)
        .map(|(b, (psi_hat, converged))| {
            let inner = approx.inner_support(*b);
            let outer_polytope = polytope::outer_support(&e, *b);
            DirectionGap { direction: *b, psi_hat: *psi_hat, inner, outer_polytope, gap: outer_polytope - inner, converged: *converged }
        })
        .collect();
    approx.outer = cfg
        .directions
        .iter()
        .map(|b| HalfSpace::new(format!("support{b:?}"), *b, approx.inner_support(*b)))
        .collect();
    Ok(approx)
}

impl RegionApprox {
    /// Builds an approximation from achieved points only; outer halfspaces
    /// are left empty.
    pub fn from_points(p: &JointPmf, inner: Vec<InnerPoint>, config: RegionConfig) -> Self {
        let coords: Vec<[f64; 3]> = inner.iter().map(|ip| ip.point.to_array()).collect();
        let hull = ConvexHull3::new(&coords);
        let hull_dim = hull.dim;
        Self {
            entropies: p.entropies(),
            inner,
            outer: Vec::new(),
            gaps: Vec::new(),
            direction_set_version: DIRECTION_SET_VERSION.to_string(),
            hull_dim,
            degenerate: hull_dim < 3,
            config,
            hull: Some(hull),
        }
    }

    /// The hull of the inner points, rebuilt after deserialization.
    pub fn hull(&mut self) -> &ConvexHull3 {
        if self.hull.is_none() {
            let coords: Vec<[f64; 3]> = self.inner.iter().map(|ip| ip.point.to_array()).collect();
            self.hull = Some(ConvexHull3::new(&coords));
        }
        self.hull.as_ref().expect("just built")
    }

    pub fn inner_points(&self) -> Vec<[f64; 3]> {
        self.inner.iter().map(|ip| ip.point.to_array()).collect()
    }

    /// Support of the inner hull.
    pub fn inner_support(&self, b: [f64; 3]) -> f64 {
        self.inner.iter().map(|ip| ip.point.dot(b)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Outer approximation: sampled halfspaces intersected with the outer polytope.
    pub fn outer_ineqs(&self) -> Vec<Ineq> {
        let mut v = polytope::outer_ineqs(&self.entropies);
        v.extend(self.outer.iter().map(|h| (h.normal, h.offset)));
        v
    }

    /// Quick classification against the inner hull and outer halfspaces.
    pub fn classify(&mut self, v: MiPoint) -> Classification {
        let a = v.to_array();
        if self.outer_ineqs().iter().any(|(n, c)| dot(*n, a) - c > MEMBERSHIP_TOL) {
            return Classification::Outside;
        }
        let hull = self.hull();
        if hull.dim == 3 {
            if hull.contains(a, MEMBERSHIP_TOL) {
                return Classification::Inside;
            }
            return Classification::Unknown;
        }
        match polytope::hull_meets(&self.inner_points(), &point_ineqs(a)) {
            Some((tau, _)) if tau <= MEMBERSHIP_TOL => Classification::Inside,
            _ => Classification::Unknown,
        }
    }

    /// Volumes of the inner hull and of the outer polytope.
    pub fn volumes(&mut self) -> (f64, f64) {
        let outer: Vec<[f64; 3]> = polytope::outer_vertices(&self.entropies).iter().map(|v| v.to_array()).collect();
        let outer_volume = ConvexHull3::new(&outer).volume();
        (self.hull().volume(), outer_volume)
    }

    /// Largest per-direction sandwich gap.
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().map(|g| g.gap).fold(0.0, f64::max)
    }

    pub fn export(&self) -> RegionExport {
        RegionExport {
            points: self.inner.iter().map(|ip| TaggedPoint { point: ip.point, tag: ip.tag.clone() }).collect(),
            halfspaces: outer_halfspaces(&self.entropies).into_iter().chain(self.outer.iter().cloned()).collect(),
            witnesses: self.inner.iter().map(|ip| ip.witness.clone().into()).collect(),
        }
    }

    /// CSV with header `v_X,v_Y,v_XY,tag`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("v_X,v_Y,v_XY,tag\n");
        for ip in &self.inner {
            s.push_str(&format!("{},{},{},\"{}\"\n", ip.point.x, ip.point.y, ip.point.xy, ip.tag.replace('"', "'")));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedPoint {
    #[serde(flatten)]
    pub point: MiPoint,
    pub tag: String,
}

/// Plot-ready export of a region approximation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionExport {
    pub points: Vec<TaggedPoint>,
    pub halfspaces: Vec<HalfSpace>,
    pub witnesses: Vec<ChannelFile>,
}

/// The six inequalities pinning `v` to the point `a`.
pub(crate) fn point_ineqs(a: [f64; 3]) -> Vec<Ineq> {
    let mut out = Vec::with_capacity(6);
    for k in 0..3 {
        let mut n = [0.0; 3];
        n[k] = 1.0;
        out.push((n, a[k]));
        n[k] = -1.0;
        out.push((n, -a[k]));
    }
    out
}

/// What a certificate of non-membership rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    /// An inequality of the outer polytope.
    OuterBound,
    /// A named inequality valid on the whole set.
    ValidInequality,
    /// A halfspace `b . v <= psi_hat(b)` from a support solve; only as
    /// reliable as the optimizer.
    SupportEstimate,
    /// The target set is empty before any channel is considered.
    EmptyTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub name: String,
    /// Coefficients of the violated inequality `coefficients . z >= bound`
    /// or `<= bound` as named.
    pub coefficients: Vec<f64>,
    pub bound: f64,
    /// Amount by which the query violates it.
    pub amount: f64,
}

/// One channel of a convex combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub point: MiPoint,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Inside {
        /// Achieved triple.
        point: MiPoint,
        witness: Channel,
        components: Vec<Component>,
        /// Largest violation of the target constraints at `point`.
        deviation: f64,
    },
    Outside(Certificate),
    Unknown {
        gap: f64,
        direction: Option<[f64; 3]>,
        rounds: usize,
        note: String,
    },
}

impl Verdict {
    pub fn is_inside(&self) -> bool {
        matches!(self, Verdict::Inside { .. })
    }

    pub fn is_outside(&self) -> bool {
        matches!(self, Verdict::Outside(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Inside { .. } => "Inside",
            Verdict::Outside(_) => "Outside",
            Verdict::Unknown { .. } => "Unknown",
        }
    }
}

/// Decides whether the region meets the polytope `{v : a_i . v <= c_i}`.
///
/// Cutting-plane loop: test whether the hull of the known points meets the
/// target; if not, separate, ask the optimizer for the support in the
/// separating direction, and either conclude or add the new point.
pub fn search_intersection(
    p: &JointPmf,
    target: &[Ineq],
    hints: &[Channel],
    cfg: &RegionConfig,
) -> Result<Verdict> {
    let e = p.entropies();
    let mut all = target.to_vec();
    all.extend(polytope::outer_ineqs(&e));
    let verts = polytope::vertices(&all);
    if verts.is_empty() {
        return Ok(Verdict::Outside(Certificate {
            kind: CertificateKind::EmptyTarget,
            name: "target does not meet the outer polytope".into(),
            coefficients: Vec::new(),
            bound: 0.0,
            amount: 0.0,
        }));
    }
    let mut pool: Vec<InnerPoint> = Vec::new();
    for (i, h) in hints.iter().enumerate() {
        pool.push(InnerPoint::from_channel(p, h.prune(p), format!("hint#{i}"))?);
    }
    pool.extend(inner_bound_points(p)?);
    pool.extend(deterministic_points(p, cfg.enumeration_cap)?);
    let mut pool = reduce_to_vertices(pool);
    let mut last_gap = f64::INFINITY;
    let mut last_dir = None;
    for round in 0..cfg.rounds {
        let coords: Vec<[f64; 3]> = pool.iter().map(|ip| ip.point.to_array()).collect();
        let Some((tau, weights)) = polytope::hull_meets(&coords, target) else {
            return Ok(Verdict::Unknown { gap: last_gap, direction: last_dir, rounds: round, note: "hull LP failed".into() });
        };
        if tau <= MEMBERSHIP_TOL {
            if let Some(v) = inside_verdict(p, &pool, &weights, target)? {
                return Ok(v);
            }
        }
        let Some((b, t, delta)) = polytope::separate(&coords, &verts) else {
            return Ok(Verdict::Unknown { gap: tau, direction: None, rounds: round, note: "separation LP failed".into() });
        };
        if delta <= 1e-12 {
            return Ok(Verdict::Unknown { gap: tau, direction: None, rounds: round, note: "hull touches the target".into() });
        }
        let need = verts.iter().map(|u| dot(b, *u)).fold(f64::INFINITY, f64::min);
        let r = support_function(p, ObjectiveSpec::new(b)?, &cfg.optimizer)?;
        let psi = r.value;
        if psi < need - MEMBERSHIP_TOL {
            return Ok(Verdict::Outside(Certificate {
                kind: CertificateKind::SupportEstimate,
                name: format!("b.v <= psi_hat(b) for b = {b:?}"),
                coefficients: b.to_vec(),
                bound: psi,
                amount: need - psi,
            }));
        }
        last_gap = need - dot(b, pool_best(&pool, b)).min(need);
        last_dir = Some(b);
        if psi <= t + 1e-12 {
            return Ok(Verdict::Unknown {
                gap: (need - t).max(0.0),
                direction: Some(b),
                rounds: round + 1,
                note: "optimizer found no point beyond the separating plane".into(),
            });
        }
        pool.push(InnerPoint { point: r.point, tag: format!("support#{round}"), witness: r.witness });
        pool = reduce_to_vertices(pool);
    }
    Ok(Verdict::Unknown { gap: last_gap, direction: last_dir, rounds: cfg.rounds, note: "round limit reached".into() })
}

fn pool_best(pool: &[InnerPoint], b: [f64; 3]) -> [f64; 3] {
    pool.iter()
        .max_by(|a, c| a.point.dot(b).total_cmp(&c.point.dot(b)))
        .map(|ip| ip.point.to_array())
        .unwrap_or([0.0; 3])
}

fn inside_verdict(p: &JointPmf, pool: &[InnerPoint], weights: &[f64], target: &[Ineq]) -> Result<Option<Verdict>> {
    let parts: Vec<(f64, &InnerPoint)> = weights.iter().zip(pool).filter(|(w, _)| **w > 1e-12).map(|(w, ip)| (*w, ip)).collect();
    let total: f64 = parts.iter().map(|(w, _)| w).sum();
    let refs: Vec<(f64, &Channel)> = parts.iter().map(|(w, ip)| (*w / total, &ip.witness)).collect();
    let witness = if refs.len() == 1 { refs[0].1.clone() } else { Channel::mixture_many(&refs)?.prune(p) };
    let point = mi_point(p, &witness)?;
    let deviation = target.iter().map(|(a, c)| point.dot(*a) - c).fold(0.0, f64::max);
    if deviation > MEMBERSHIP_TOL {
        return Ok(None);
    }
    let components = parts.iter().map(|(w, ip)| Component { weight: w / total, point: ip.point, tag: ip.tag.clone() }).collect();
    Ok(Some(Verdict::Inside { point, witness, components, deviation }))
}

/// Decides `v in I_XY`.
pub fn membership(p: &JointPmf, v: MiPoint, cfg: &RegionConfig) -> Result<Verdict> {
    membership_with_hints(p, v, &[], cfg)
}

/// As [`membership`], with channels tried first.
pub fn membership_with_hints(p: &JointPmf, v: MiPoint, hints: &[Channel], cfg: &RegionConfig) -> Result<Verdict> {
    let e = p.entropies();
    if let Some((h, s)) = outer_halfspaces(&e)
        .into_iter()
        .map(|h| {
            let s = h.violation(v);
            (h, s)
        })
        .filter(|(_, s)| *s > MEMBERSHIP_TOL)
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        return Ok(Verdict::Outside(Certificate {
            kind: CertificateKind::OuterBound,
            name: h.name,
            coefficients: h.normal.to_vec(),
            bound: h.offset,
            amount: s,
        }));
    }
    search_intersection(p, &point_ineqs(v.to_array()), hints, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pind() -> JointPmf {
        JointPmf::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap()
    }

    #[test]
    fn direction_counts() {
        assert_eq!(icosphere_directions(0).len(), 12);
        assert_eq!(icosphere_directions(2).len(), 162);
        assert_eq!(default_directions().len(), 171);
        for d in icosphere_directions(2) {
            assert!((dot(d, d) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inner_points_land_exactly() {
        let pl = JointPmf::from_rows(&[vec![1.0 / 3.0, 1.0 / 3.0], vec![1.0 / 3.0, 0.0]]).unwrap();
        for p in [pind(), pl] {
            let e = p.entropies();
            let pts = inner_bound_points(&p).unwrap();
            let want = [
                [0.0, 0.0, 0.0],
                [e.hx, e.mi, e.hx],
                [e.mi, e.hy, e.hy],
                [e.hx, e.hy, e.hxy],
                [e.hx_y, e.hy_x, e.hx_y + e.hy_x],
            ];
            for (ip, w) in pts.iter().zip(want) {
                assert!(ip.point.dist_inf(MiPoint::from_array(w)) < 1e-9, "{} {:?} vs {w:?}", ip.tag, ip.point);
            }
        }
    }

    #[test]
    fn point_memberships() {
        let p = pind();
        let cfg = RegionConfig::light();
        assert!(membership(&p, MiPoint::new(0.0, 0.0, 0.0), &cfg).unwrap().is_inside());
        assert!(membership(&p, MiPoint::new(0.0, 0.0, 1.0), &cfg).unwrap().is_inside());
        match membership(&p, MiPoint::new(-0.1, 0.0, 0.0), &cfg).unwrap() {
            Verdict::Outside(c) => assert_eq!(c.name, "I(X;U) >= 0"),
            v => panic!("{v:?}"),
        }
    }
}
