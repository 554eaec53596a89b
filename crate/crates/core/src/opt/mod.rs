//! Nonconvex optimization over channels `p(u|x,y)`.
//!
//! Objectives and constraints are expressed through the MI triple, so every
//! problem here is "optimize a function of `v` over (part of) the region".
//! Structural constraints are enforced either by the parameterization
//! (Markov chains through `X` or `Y`), by enumeration (deterministic `U`),
//! or by an exact penalty with continuation followed by a polish step.

mod eval;
mod local;
mod oracle;
mod polish;
mod seeds;

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{Channel, TriplePmf};
use crate::error::{Error, Result};
use crate::prob::{Entropies, JointPmf};
use crate::region::point::MiPoint;

pub(crate) use eval::{Param, Problem};
pub(crate) use seeds::{for_each_partition, partition_count};
pub use oracle::{grid_oracle, OracleResult};

/// Maximize `direction . v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub direction: [f64; 3],
}

impl ObjectiveSpec {
    pub fn new(direction: [f64; 3]) -> Result<Self> {
        if direction.iter().any(|v| !v.is_finite()) || direction.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidArgument(format!("objective direction {direction:?} must be finite and nonzero")));
        }
        Ok(Self { direction })
    }
}

/// A smooth (or piecewise smooth) function of the MI triple to maximize.
pub trait VObjective: Sync {
    /// Value and gradient with respect to `(v_X, v_Y, v_XY)`.
    fn eval(&self, v: MiPoint) -> (f64, [f64; 3]);
}

impl VObjective for ObjectiveSpec {
    fn eval(&self, v: MiPoint) -> (f64, [f64; 3]) {
        (v.dot(self.direction), self.direction)
    }
}

/// Maximizes `-smoothmax_i (a_i . v + c_i)` with log-sum-exp temperature `tau`.
#[derive(Debug, Clone)]
pub struct NegSmoothMax {
    pub pieces: Vec<([f64; 3], f64)>,
    pub tau: f64,
}

impl NegSmoothMax {
    /// Exact `max_i (a_i . v + c_i)`.
    pub fn max_value(&self, v: MiPoint) -> f64 {
        self.pieces.iter().map(|(a, c)| v.dot(*a) + c).fold(f64::NEG_INFINITY, f64::max)
    }
}

impl VObjective for NegSmoothMax {
    fn eval(&self, v: MiPoint) -> (f64, [f64; 3]) {
        let vals: Vec<f64> = self.pieces.iter().map(|(a, c)| v.dot(*a) + c).collect();
        let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        let mut g = [0.0; 3];
        for (val, (a, _)) in vals.iter().zip(&self.pieces) {
            let w = ((val - m) / self.tau).exp();
            z += w;
            for k in 0..3 {
                g[k] += w * a[k];
            }
        }
        let value = m + self.tau * z.ln();
        (-value, [-g[0] / z, -g[1] / z, -g[2] / z])
    }
}

/// Structural constraints on the joint law of `(X, Y, U)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Structural {
    /// `U` independent of `X`.
    IndepX,
    /// `U` independent of `Y`.
    IndepY,
    /// `X - Y - U`.
    MarkovXYU,
    /// `U - X - Y`.
    MarkovUXY,
    /// `X - U - Y`.
    MarkovXUY,
    /// `H(X|Y,U) = 0`.
    RecoverX,
    /// `H(Y|X,U) = 0`.
    RecoverY,
    /// `H(U|X) = 0`.
    FunctionOfX,
    /// `H(U|Y) = 0`.
    FunctionOfY,
}

impl Structural {
    pub fn name(self) -> &'static str {
        match self {
            Structural::IndepX => "I(X;U)",
            Structural::IndepY => "I(Y;U)",
            Structural::MarkovXYU => "I(X;U|Y)",
            Structural::MarkovUXY => "I(Y;U|X)",
            Structural::MarkovXUY => "I(X;Y|U)",
            Structural::RecoverX => "H(X|Y,U)",
            Structural::RecoverY => "H(Y|X,U)",
            Structural::FunctionOfX => "H(U|X)",
            Structural::FunctionOfY => "H(U|Y)",
        }
    }

    /// Residual computed from the triple distribution; zero iff satisfied.
    pub fn residual(self, t: &TriplePmf) -> f64 {
        let r = match self {
            Structural::IndepX => t.mi_x_u(),
            Structural::IndepY => t.mi_y_u(),
            Structural::MarkovXYU => t.mi_x_u_given_y(),
            Structural::MarkovUXY => t.mi_y_u_given_x(),
            Structural::MarkovXUY => t.mi_x_y_given_u(),
            Structural::RecoverX => t.h_x_given_yu(),
            Structural::RecoverY => t.h_y_given_xu(),
            Structural::FunctionOfX => t.h_u_given_x(),
            Structural::FunctionOfY => t.h_u_given_y(),
        };
        r.max(0.0)
    }

    /// The residual as an affine function `a . v + c` of the triple, when it is one.
    fn affine(self, e: &Entropies) -> Option<([f64; 3], f64)> {
        match self {
            Structural::IndepX => Some(([1.0, 0.0, 0.0], 0.0)),
            Structural::IndepY => Some(([0.0, 1.0, 0.0], 0.0)),
            Structural::MarkovXUY => Some(([-1.0, -1.0, 1.0], e.mi)),
            Structural::MarkovXYU => Some(([0.0, -1.0, 1.0], 0.0)),
            Structural::MarkovUXY => Some(([-1.0, 0.0, 1.0], 0.0)),
            Structural::RecoverX => Some(([0.0, 1.0, -1.0], e.hx_y)),
            Structural::RecoverY => Some(([1.0, 0.0, -1.0], e.hy_x)),
            Structural::FunctionOfX | Structural::FunctionOfY => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// `coeffs . v (relation) bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coeffs: [f64; 3],
    pub relation: Relation,
    pub bound: f64,
}

impl LinearConstraint {
    pub fn new(coeffs: [f64; 3], relation: Relation, bound: f64) -> Self {
        Self { coeffs, relation, bound }
    }

    pub fn violation(&self, v: MiPoint) -> f64 {
        let s = v.dot(self.coeffs) - self.bound;
        match self.relation {
            Relation::Le => s.max(0.0),
            Relation::Ge => (-s).max(0.0),
            Relation::Eq => s.abs(),
        }
    }

    fn violation_grad(&self, v: MiPoint) -> (f64, [f64; 3]) {
        let s = v.dot(self.coeffs) - self.bound;
        let sign = match self.relation {
            Relation::Le => f64::from(s > 0.0),
            Relation::Ge => -f64::from(s < 0.0),
            Relation::Eq => s.signum(),
        };
        (self.violation(v), self.coeffs.map(|a| a * sign))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub linear: Vec<LinearConstraint>,
    pub structural: Vec<Structural>,
}

impl ConstraintSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn structural(items: &[Structural]) -> Self {
        let mut s = items.to_vec();
        s.sort();
        s.dedup();
        Self { linear: Vec::new(), structural: s }
    }

    pub fn with_linear(mut self, c: LinearConstraint) -> Self {
        self.linear.push(c);
        self
    }

    fn has(&self, s: Structural) -> bool {
        self.structural.contains(&s)
    }

    fn validate(&self) -> Result<()> {
        for c in &self.linear {
            if c.coeffs.iter().any(|v| !v.is_finite()) || !c.bound.is_finite() {
                return Err(Error::InvalidArgument("linear constraint with non-finite data".into()));
            }
        }
        Ok(())
    }

    /// Residuals of every constraint at the triple `t`.
    pub fn residuals(&self, t: &TriplePmf) -> Vec<Residual> {
        let v = MiPoint::new(t.mi_x_u(), t.mi_y_u(), t.mi_xy_u());
        let mut out: Vec<Residual> = self
            .structural
            .iter()
            .map(|s| Residual { name: s.name().to_string(), value: s.residual(t) })
            .collect();
        for c in &self.linear {
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            out.push(Residual {
                name: format!("{:?}.v {rel} {}", c.coeffs, c.bound),
                value: c.violation(v),
            });
        }
        out
    }
}

/// Optimizer settings. Defaults follow the documented configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Output alphabet size; `None` means `|X||Y| + 2`.
    pub u_size: Option<usize>,
    pub restarts: usize,
    pub max_iterations: usize,
    pub objective_tol: f64,
    /// Residual at or below which a witness is reported feasible.
    pub constraint_tol: f64,
    /// Residual above which no witness is returned at all.
    pub infeasible_tol: f64,
    pub penalty_schedule: Vec<f64>,
    pub seed: u64,
    pub argmax_tol: f64,
    pub agreement_tol: f64,
    /// Largest number of deterministic labelings evaluated as seeds.
    pub deterministic_cap: usize,
    /// Deterministic seeds promoted to full local searches.
    pub top_seeds: usize,
    /// Local searches carried from one penalty weight to the next.
    pub carry: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            u_size: None,
            restarts: 64,
            max_iterations: 500,
            objective_tol: 1e-9,
            constraint_tol: 1e-9,
            infeasible_tol: 1e-5,
            penalty_schedule: vec![1.0, 10.0, 100.0, 1000.0],
            seed: 0,
            argmax_tol: 1e-6,
            agreement_tol: 1e-6,
            deterministic_cap: 25_000,
            top_seeds: 8,
            carry: 16,
        }
    }
}

impl OptimizerConfig {
    /// A cheaper configuration for inner loops and tests.
    pub fn light() -> Self {
        Self { restarts: 8, max_iterations: 300, carry: 6, ..Self::default() }
    }

    pub fn u_size_for(&self, p: &JointPmf) -> usize {
        self.u_size.unwrap_or(p.nx() * p.ny() + 2).max(1)
    }

    fn validate(&self) -> Result<()> {
        if self.penalty_schedule.is_empty() || self.penalty_schedule.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::InvalidArgument("penalty schedule must be nonempty and positive".into()));
        }
        if self.u_size == Some(0) {
            return Err(Error::InvalidArgument("u_size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RestartStats {
    pub local_searches: usize,
    pub deterministic_evaluated: usize,
    /// Final local searches whose value agrees with the best within `agreement_tol`.
    pub agreeing: usize,
    pub best_origin: String,
    pub iterations: usize,
}

/// Best channel found for a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// Objective at the witness (unpenalized).
    pub value: f64,
    pub point: MiPoint,
    pub witness: Channel,
    pub residuals: Vec<Residual>,
    pub max_residual: f64,
    pub feasible: bool,
    pub converged: bool,
    pub stats: RestartStats,
    pub notes: Vec<String>,
}

/// A scored channel from the candidate pool.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub channel: Channel,
    pub v: MiPoint,
    pub value: f64,
    pub penalized: f64,
    pub residual: f64,
    pub tier: u8,
    pub origin: usize,
    pub label: String,
    pub from_search: bool,
}

pub(crate) struct SolveOutput {
    pub result: SolveResult,
    pub pool: Vec<Candidate>,
}

/// Penalty terms not enforced by the parameterization.
struct Penalty {
    affine: Vec<([f64; 3], f64)>,
    linear: Vec<LinearConstraint>,
}

impl Penalty {
    fn eval(&self, v: MiPoint) -> (f64, [f64; 3]) {
        let mut val = 0.0;
        let mut g = [0.0; 3];
        for (a, c) in &self.affine {
            val += v.dot(*a) + c;
            for k in 0..3 {
                g[k] += a[k];
            }
        }
        for c in &self.linear {
            let (s, d) = c.violation_grad(v);
            val += s;
            for k in 0..3 {
                g[k] += d[k];
            }
        }
        (val, g)
    }

    fn is_empty(&self) -> bool {
        self.affine.is_empty() && self.linear.is_empty()
    }
}

/// Pool order: admissible candidates (residual within `infeasible_tol`) by
/// penalized objective, then the rest by penalized objective.
fn better(a: &Candidate, b: &Candidate) -> Ordering {
    (a.tier > 1)
        .cmp(&(b.tier > 1))
        .then_with(|| bucket(b.penalized).cmp(&bucket(a.penalized)))
        .then_with(|| a.residual.total_cmp(&b.residual))
        .then_with(|| a.channel.u_size().cmp(&b.channel.u_size()))
        .then_with(|| a.origin.cmp(&b.origin))
}

/// Values closer than about 1e-11 compare equal; bucketing keeps the order total.
fn bucket(x: f64) -> i64 {
    if x.is_nan() {
        i64::MIN
    } else {
        (x * 1e11).round().clamp(-9.0e18, 9.0e18) as i64
    }
}

/// Slack in penalized objective within which an exactly feasible candidate
/// is preferred over a merely admissible one.
const FEASIBLE_PREFERENCE: f64 = 1e-6;

fn select_best(pool: &[Candidate]) -> Option<&Candidate> {
    let first = pool.first()?;
    pool.iter()
        .find(|c| c.tier == 0 && first.tier <= 1 && c.penalized >= first.penalized - FEASIBLE_PREFERENCE)
        .or(Some(first))
}

struct Scorer<'a> {
    p: &'a JointPmf,
    obj: &'a dyn VObjective,
    cons: &'a ConstraintSpec,
    penalty: &'a Penalty,
    mu: f64,
    cfg: &'a OptimizerConfig,
}

impl Scorer<'_> {
    fn score(&self, channel: Channel, origin: usize, label: String, from_search: bool) -> Candidate {
        let channel = channel.prune(self.p);
        let t = TriplePmf::new(self.p, &channel).expect("shapes checked");
        let v = MiPoint::new(t.mi_x_u(), t.mi_y_u(), t.mi_xy_u());
        let residual = self.cons.residuals(&t).iter().map(|r| r.value).fold(0.0, f64::max);
        let value = self.obj.eval(v).0;
        let penalized = value - self.mu * self.penalty.eval(v).0;
        let tier = if residual <= self.cfg.constraint_tol {
            0
        } else if residual <= self.cfg.infeasible_tol {
            1
        } else {
            2
        };
        Candidate { channel, v, value, penalized, residual, tier, origin, label, from_search }
    }
}

/// Maximizes `b . v` subject to the constraints.
pub fn solve_constrained(p: &JointPmf, b: ObjectiveSpec, cons: &ConstraintSpec, cfg: &OptimizerConfig) -> Result<SolveResult> {
    solve_constrained_seeded(p, b, cons, cfg, &[])
}

/// Runs the search on `b / max|b_i|` so that positive rescalings of `b`
/// produce the same witness, then reports the value for `b` itself.
fn solve_scaled(
    p: &JointPmf,
    b: ObjectiveSpec,
    cons: &ConstraintSpec,
    cfg: &OptimizerConfig,
    seeds: &[Channel],
) -> Result<SolveOutput> {
    let scale = b.direction.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let unit = ObjectiveSpec { direction: b.direction.map(|v| v / scale) };
    let mut out = solve_general(p, &unit, cons, cfg, seeds)?;
    out.result.value = out.result.point.dot(b.direction);
    Ok(out)
}

/// As [`solve_constrained`] with extra starting channels.
pub fn solve_constrained_seeded(
    p: &JointPmf,
    b: ObjectiveSpec,
    cons: &ConstraintSpec,
    cfg: &OptimizerConfig,
    seeds: &[Channel],
) -> Result<SolveResult> {
    solve_scaled(p, b, cons, cfg, seeds).map(|o| o.result)
}

/// Estimated support function `max_{v in region} b . v`, with its argmax.
pub fn support_function(p: &JointPmf, b: ObjectiveSpec, cfg: &OptimizerConfig) -> Result<SolveResult> {
    solve_constrained(p, b, &ConstraintSpec::none(), cfg)
}

pub(crate) fn solve_general(
    p: &JointPmf,
    obj: &dyn VObjective,
    cons: &ConstraintSpec,
    cfg: &OptimizerConfig,
    extra: &[Channel],
) -> Result<SolveOutput> {
    cfg.validate()?;
    cons.validate()?;
    for c in extra {
        c.check_shape(p)?;
    }
    if cons.has(Structural::FunctionOfX) || cons.has(Structural::FunctionOfY) {
        return solve_discrete(p, obj, cons, cfg, extra);
    }
    let param = if cons.has(Structural::MarkovXYU) {
        Param::ByY
    } else if cons.has(Structural::MarkovUXY) {
        Param::ByX
    } else {
        Param::Full
    };
    let prob = Problem::new(p, param);
    let e = prob.e;
    let penalty = Penalty {
        affine: cons
            .structural
            .iter()
            .filter(|s| !matches!((param, s), (Param::ByY, Structural::MarkovXYU) | (Param::ByX, Structural::MarkovUXY)))
            .filter_map(|s| s.affine(&e))
            .collect(),
        linear: cons.linear.clone(),
    };
    let schedule: Vec<f64> = if penalty.is_empty() { vec![0.0] } else { cfg.penalty_schedule.clone() };
    let nu = cfg.u_size_for(p);
    let rows = prob.rows();

    let penalized = |mu: f64| {
        let penalty = &penalty;
        move |v: MiPoint| {
            let (f, g) = obj.eval(v);
            let (pv, pg) = penalty.eval(v);
            (f - mu * pv, [g[0] - mu * pg[0], g[1] - mu * pg[1], g[2] - mu * pg[2]])
        }
    };

    // Deterministic seeds, ranked by the first-stage objective.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0000);
    let labelings = seeds::deterministic_labelings(&prob, nu, cfg.deterministic_cap, &mut rng);
    let f0 = penalized(schedule[0]);
    let mut ws = eval::Workspace::new(&prob, nu);
    let mut scored: Vec<(f64, MiPoint, usize)> = labelings
        .iter()
        .enumerate()
        .map(|(i, lab)| {
            let v = prob.point(&seeds::one_hot(lab, nu), nu, &mut ws);
            (f0(v).0, v, i)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)));
    let mut top: Vec<usize> = Vec::new();
    let mut top_points: Vec<MiPoint> = Vec::new();
    for (_, v, i) in &scored {
        if top.len() >= cfg.top_seeds {
            break;
        }
        if top_points.iter().all(|w| w.dist_inf(*v) > 1e-12) {
            top.push(*i);
            top_points.push(*v);
        }
    }

    struct Start {
        q: Vec<f64>,
        nu: usize,
        origin: usize,
        label: String,
    }
    let mut starts: Vec<Start> = Vec::new();
    for (k, &i) in top.iter().enumerate() {
        starts.push(Start { q: seeds::one_hot(&labelings[i], nu), nu, origin: k, label: format!("deterministic#{i}") });
    }
    let base = starts.len();
    let mut extra_rows = Vec::new();
    for (k, c) in extra.iter().enumerate() {
        if let Some(q) = prob.from_channel(c) {
            let cnu = c.u_size();
            let wnu = cnu.max(nu);
            let mut padded = vec![0.0; rows * wnu];
            for r in 0..rows {
                padded[r * wnu..r * wnu + cnu].copy_from_slice(&q[r * cnu..(r + 1) * cnu]);
            }
            extra_rows.push((padded.clone(), wnu, k));
            starts.push(Start { q: padded, nu: wnu, origin: base + k, label: format!("seed#{k}") });
        }
    }
    let base = base + extra.len();
    for r in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(r as u64));
        starts.push(Start { q: seeds::dirichlet_rows(rows, nu, &mut rng), nu, origin: base + r, label: format!("random#{r}") });
    }

    let mut local_searches = 0;
    let mut iterations = 0;
    let mut finals: Vec<(local::LocalOutcome, usize, String)> = Vec::new();
    for (stage, &mu) in schedule.iter().enumerate() {
        let f = penalized(mu);
        let results: Vec<(local::LocalOutcome, usize, String)> = starts
            .into_par_iter()
            .map(|s| (local::ascend(&prob, &f, s.q, s.nu, cfg.max_iterations, cfg.objective_tol * 1e-3), s.origin, s.label))
            .collect();
        local_searches += results.len();
        iterations += results.iter().map(|r| r.0.iterations).sum::<usize>();
        if stage + 1 == schedule.len() {
            finals = results;
            break;
        }
        let next = penalized(schedule[stage + 1]);
        let mut ranked: Vec<(f64, usize)> = results.iter().enumerate().map(|(i, r)| (next(r.0.v).0, i)).collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let keep: Vec<usize> = ranked.iter().take(cfg.carry.max(1)).map(|r| r.1).collect();
        let mut results: Vec<Option<_>> = results.into_iter().map(Some).collect();
        starts = keep
            .into_iter()
            .map(|i| {
                let (o, origin, label) = results[i].take().expect("indices are distinct");
                Start { q: o.q, nu: o.nu, origin, label }
            })
            .collect();
        // Seeds supplied by the caller stay in every stage.
        for (q, wnu, k) in &extra_rows {
            starts.push(Start { q: q.clone(), nu: *wnu, origin: top.len() + k, label: format!("seed#{k}") });
        }
    }

    let mu_last = *schedule.last().expect("nonempty");
    let scorer = Scorer { p, obj, cons, penalty: &penalty, mu: mu_last, cfg };
    let mut pool: Vec<Candidate> = Vec::new();
    for (o, origin, label) in &finals {
        pool.push(scorer.score(prob.to_channel(&o.q, o.nu), *origin, label.clone(), true));
    }
    for (k, &i) in top.iter().enumerate() {
        pool.push(scorer.score(prob.to_channel(&seeds::one_hot(&labelings[i], nu), nu), k, format!("deterministic#{i}"), false));
    }
    for (k, c) in extra.iter().enumerate() {
        pool.push(scorer.score(c.clone(), top.len() + k, format!("seed#{k}"), false));
    }
    polish_pool(p, cons, param, &scorer, &mut pool);
    finish(p, obj, cons, cfg, pool, local_searches, labelings.len(), iterations)
}

fn polish_pool(p: &JointPmf, cons: &ConstraintSpec, param: Param, scorer: &Scorer<'_>, pool: &mut Vec<Candidate>) {
    if param != Param::Full {
        return;
    }
    let ix = cons.has(Structural::IndepX);
    let iy = cons.has(Structural::IndepY);
    let rx = cons.has(Structural::RecoverX);
    let ry = cons.has(Structural::RecoverY);
    if !(ix || iy || rx || ry) {
        return;
    }
    pool.sort_by(better);
    let mut extra = Vec::new();
    for c in pool.iter().filter(|c| c.tier > 0).take(8) {
        let mut ch = c.channel.clone();
        if rx || ry {
            ch = polish::snap_recoverable(p, &ch, rx, ry);
        }
        if ix || iy {
            let small = p.support().len() * ch.u_size() <= 400;
            if small {
                if let Some(lp) = polish::lp_independence(p, &ch, ix, iy) {
                    extra.push(scorer.score(lp, c.origin, format!("{}+lp", c.label), c.from_search));
                }
            }
            ch = polish::ipf_independence(p, &ch, ix, iy, 2000);
        }
        extra.push(scorer.score(ch, c.origin, format!("{}+polish", c.label), c.from_search));
    }
    pool.extend(extra);
}

#[allow(clippy::too_many_arguments)]
fn finish(
    p: &JointPmf,
    obj: &dyn VObjective,
    cons: &ConstraintSpec,
    cfg: &OptimizerConfig,
    mut pool: Vec<Candidate>,
    local_searches: usize,
    deterministic_evaluated: usize,
    iterations: usize,
) -> Result<SolveOutput> {
    pool.sort_by(better);
    let best = select_best(&pool).ok_or(Error::Infeasible { residual: f64::INFINITY })?.clone();
    if best.residual > cfg.infeasible_tol {
        return Err(Error::Infeasible { residual: best.residual });
    }
    let agreeing = pool
        .iter()
        .filter(|c| c.from_search && c.tier <= 1 && (c.value - best.value).abs() <= cfg.agreement_tol)
        .count();
    let t = TriplePmf::new(p, &best.channel)?;
    let residuals = cons.residuals(&t);
    let mut notes = Vec::new();
    if cfg.u_size.is_some_and(|u| u > p.nx() * p.ny() + 2) {
        notes.push("u_size exceeds |X||Y|+2 by explicit override".to_string());
    }
    let _ = obj;
    let result = SolveResult {
        value: best.value,
        point: best.v,
        witness: best.channel.clone(),
        residuals,
        max_residual: best.residual,
        feasible: best.tier == 0,
        converged: agreeing >= 2,
        stats: RestartStats {
            local_searches,
            deterministic_evaluated,
            agreeing,
            best_origin: best.label.clone(),
            iterations,
        },
        notes,
    };
    Ok(SolveOutput { result, pool })
}

/// Exhaustive search over deterministic `U = f(X)` or `U = f(Y)`.
fn solve_discrete(
    p: &JointPmf,
    obj: &dyn VObjective,
    cons: &ConstraintSpec,
    cfg: &OptimizerConfig,
    extra: &[Channel],
) -> Result<SolveOutput> {
    let by_y = cons.has(Structural::FunctionOfY);
    let n = if by_y { p.ny() } else { p.nx() };
    let nu = cfg.u_size_for(p).min(n).max(1);
    let count = seeds::partition_count(n, nu);
    let cap = 5e6;
    if count > cap {
        return Err(Error::EnumerationTooLarge { count, cap });
    }
    let e = p.entropies();
    let penalty = Penalty {
        affine: cons.structural.iter().filter_map(|s| s.affine(&e)).collect(),
        linear: cons.linear.clone(),
    };
    let mu = *cfg.penalty_schedule.last().unwrap_or(&1000.0);
    let scorer = Scorer { p, obj, cons, penalty: &penalty, mu, cfg };
    let mut pool = Vec::new();
    let mut k = 0;
    let mut best: Option<Candidate> = None;
    for_each_partition_channel(p, n, nu, by_y, &mut |c| {
        let cand = scorer.score(c, k, format!("partition#{k}"), true);
        k += 1;
        if best.as_ref().is_none_or(|b| better(&cand, b) == Ordering::Less) {
            if let Some(b) = best.take() {
                pool.push(b);
            }
            best = Some(cand);
        } else if pool.len() < 64 {
            pool.push(cand);
        }
    });
    if let Some(b) = best {
        pool.push(b);
    }
    for (i, c) in extra.iter().enumerate() {
        pool.push(scorer.score(c.clone(), k + i, format!("seed#{i}"), false));
    }
    finish(p, obj, cons, cfg, pool, 0, k, 0)
}

fn for_each_partition_channel(p: &JointPmf, n: usize, nu: usize, by_y: bool, f: &mut dyn FnMut(Channel)) {
    let (nx, ny) = (p.nx(), p.ny());
    seeds::for_each_partition(n, nu, &mut |lab| {
        let k = lab.iter().max().map_or(1, |m| m + 1);
        let c = Channel::deterministic(nx, ny, k, |x, y| if by_y { lab[y] } else { lab[x] });
        f(c);
    });
}

/// Result of a one-sided directional derivative estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalResult {
    /// `max { c . v : v in argmax of b . v }`.
    pub value: f64,
    /// Estimated support value in direction `b`.
    pub psi_b: f64,
    pub point: MiPoint,
    pub witness: Channel,
    /// `psi_b - b . v` at the witness.
    pub argmax_gap: f64,
    pub candidates: usize,
}

/// Weights used in the second stage of [`directional_derivative`].
pub const DIRECTIONAL_WEIGHTS: [f64; 5] = [1.0, 10.0, 100.0, 1000.0, 10000.0];

/// Estimates `psi'(b; c)`: the best `c . v` among near-maximizers of `b . v`.
pub fn directional_derivative(p: &JointPmf, b: ObjectiveSpec, c: [f64; 3], cfg: &OptimizerConfig) -> Result<DirectionalResult> {
    directional_derivative_seeded(p, b, c, cfg, &[])
}

pub fn directional_derivative_seeded(
    p: &JointPmf,
    b: ObjectiveSpec,
    c: [f64; 3],
    cfg: &OptimizerConfig,
    seeds: &[Channel],
) -> Result<DirectionalResult> {
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("tie-break direction must be finite".into()));
    }
    let none = ConstraintSpec::none();
    let first = solve_scaled(p, b, &none, cfg, seeds)?;
    let mut pool: Vec<(Channel, MiPoint)> = first.pool.into_iter().map(|c| (c.channel, c.v)).collect();
    let light = OptimizerConfig { restarts: (cfg.restarts / 4).max(4), ..cfg.clone() };
    for w in DIRECTIONAL_WEIGHTS {
        let dir = [w * b.direction[0] + c[0], w * b.direction[1] + c[1], w * b.direction[2] + c[2]];
        let mut ranked: Vec<&(Channel, MiPoint)> = pool.iter().collect();
        ranked.sort_by(|x, y| y.1.dot(dir).total_cmp(&x.1.dot(dir)));
        let mut starts: Vec<Channel> = ranked.iter().take(6).map(|x| x.0.clone()).collect();
        starts.extend(seeds.iter().cloned());
        let out = solve_general(p, &ObjectiveSpec { direction: dir }, &none, &light, &starts)?;
        pool.extend(out.pool.into_iter().map(|c| (c.channel, c.v)));
    }
    let psi = pool.iter().map(|x| x.1.dot(b.direction)).fold(f64::NEG_INFINITY, f64::max);
    let best = pool
        .iter()
        .filter(|x| x.1.dot(b.direction) >= psi - cfg.argmax_tol)
        .max_by(|x, y| {
            x.1.dot(c)
                .total_cmp(&y.1.dot(c))
                .then_with(|| x.1.dot(b.direction).total_cmp(&y.1.dot(b.direction)))
        })
        .expect("the best b-point passes the filter");
    Ok(DirectionalResult {
        value: best.1.dot(c),
        psi_b: psi,
        point: best.1,
        witness: best.0.clone(),
        argmax_gap: psi - best.1.dot(b.direction),
        candidates: pool.len(),
    })
}

/// Cap on `u_size^(|X||Y|)` for [`enumerate_deterministic`].
pub const ENUMERATION_CAP: f64 = 1e7;

/// Every deterministic `U = f(X, Y)` with at most `u_size` values, up to
/// relabeling of `U`, with its MI triple.
pub fn enumerate_deterministic(p: &JointPmf, u_size: usize) -> Result<Vec<(Channel, MiPoint)>> {
    let cells = p.nx() * p.ny();
    let bound = (u_size as f64).powi(cells as i32);
    if u_size == 0 {
        return Err(Error::InvalidArgument("u_size must be positive".into()));
    }
    if bound > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge { count: bound, cap: ENUMERATION_CAP });
    }
    let mut out = Vec::new();
    let ny = p.ny();
    let mut err = None;
    seeds::for_each_partition(cells, u_size, &mut |lab| {
        let k = lab.iter().max().map_or(1, |m| m + 1);
        let c = Channel::deterministic(p.nx(), ny, k, |x, y| lab[x * ny + y]);
        match crate::region::point::mi_point(p, &c) {
            Ok(v) => out.push((c, v)),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pind() -> JointPmf {
        JointPmf::from_rows(&[vec![0.25; 2], vec![0.25; 2]]).unwrap()
    }

    #[test]
    fn objective_validation() {
        assert!(ObjectiveSpec::new([0.0; 3]).is_err());
        assert!(ObjectiveSpec::new([f64::NAN, 0.0, 1.0]).is_err());
    }

    #[test]
    fn support_of_v_xy_is_joint_entropy() {
        let p = pind();
        let r = support_function(&p, ObjectiveSpec::new([0.0, 0.0, 1.0]).unwrap(), &OptimizerConfig::light()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn xor_is_found_under_independence() {
        let p = pind();
        let cons = ConstraintSpec::structural(&[Structural::IndepX, Structural::IndepY]);
        let r = solve_constrained(&p, ObjectiveSpec::new([0.0, 0.0, 1.0]).unwrap(), &cons, &OptimizerConfig::light()).unwrap();
        assert!(r.feasible, "{r:?}");
        assert!((r.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn deterministic_enumeration() {
        let p = JointPmf::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let pts = enumerate_deterministic(&p, 1).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].1.dist_inf(MiPoint::default()) < 1e-15);
        let pts = enumerate_deterministic(&pind(), 4).unwrap();
        assert_eq!(pts.len(), 15);
        assert!(pts.iter().any(|(_, v)| v.dist_inf(MiPoint::new(1.0, 1.0, 2.0)) < 1e-12));
        let big = JointPmf::from_rows(&[vec![1.0 / 9.0; 3], vec![1.0 / 9.0; 3], vec![1.0 / 9.0; 3]]).unwrap();
        assert!(matches!(enumerate_deterministic(&big, 11), Err(Error::EnumerationTooLarge { .. })));
    }
}
