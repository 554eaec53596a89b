//! Common information, graph entropy and privacy quantities.

use serde_json::json;

use super::{attach_support_form, CrossCheck, Method, QuantityConfig, QuantityResult, Solved};
use crate::channel::{Channel, TriplePmf};
use crate::error::{Error, Result};
use crate::graph::{confusability_graph, gacs_korner, maximal_independent_sets};
use crate::opt::{for_each_partition, solve_constrained_seeded, ConstraintSpec, ObjectiveSpec, Residual, Structural};
use crate::prob::{entropy, JointPmf};
use crate::region::frl::{frl_channel, FrlDirection};

/// Largest `|X|` accepted by [`korner_graph_entropy`].
pub const KORNER_VERTEX_CAP: usize = 20;

/// Stopping tolerance on the duality gap of the graph entropy iteration.
pub const KORNER_TOLERANCE: f64 = 1e-10;

/// Largest `|Y|` accepted by [`necessary_cond_entropy`].
pub const NCE_Y_CAP: usize = 12;

/// Channels with `I(Y;U)` below this are excluded from ratio quantities.
pub const RATIO_FLOOR: f64 = 1e-6;

const KORNER_MAX_ITERATIONS: usize = 200_000;

/// Wyner's common information: least `I(X,Y;U)` with `X - U - Y`.
pub fn wyner_ci(p: &JointPmf, cfg: &QuantityConfig) -> Result<QuantityResult> {
    let cons = ConstraintSpec::structural(&[Structural::MarkovXUY]);
    let seeds = [Channel::reveal_x(p.nx(), p.ny()), Channel::reveal_y(p.nx(), p.ny())];
    let s = Solved {
        name: "wyner_ci",
        objective: [0.0, 0.0, -1.0],
        cons,
        offset: 0.0,
        scale: -1.0,
        support_form: ([1.0, 1.0, -1.0], [0.0, 0.0, -1.0], -1.0),
        lift: None,
    };
    Ok(s.run(p, cfg, &seeds)?.0)
}

/// Gacs-Korner common information from the support components.
pub fn gacs_korner_ci(p: &JointPmf, cfg: &QuantityConfig) -> Result<QuantityResult> {
    let (value, lab) = gacs_korner(p);
    let mut q = QuantityResult::new("gacs_korner_ci", value, Method::ExactGraph);
    let w = lab.channel(p.nx(), p.ny());
    let t = TriplePmf::new(p, &w)?;
    q.residuals = vec![
        Residual { name: "H(U|X)".into(), value: t.h_u_given_x() },
        Residual { name: "H(U|Y)".into(), value: t.h_u_given_y() },
    ];
    q.certificate = Some(json!({ "components": lab.count(), "masses": lab.masses }));
    q.witness = Some(w.clone());
    attach_support_form(p, &mut q, [1.0, 1.0, -2.0], [0.0, 0.0, 1.0], 1.0, cfg, &[w])?;
    Ok(q)
}

/// Korner graph entropy of the confusability graph of `X` given `Y`.
///
/// Minimizes `-sum_x p(x) log a_x` over the vertex packing polytope by
/// multiplicative updates on the weights of maximal independent sets; the
/// stopping rule bounds the distance to the optimum by `log2 max_S sum_{x in S} p(x)/a_x`.
pub fn korner_graph_entropy(p: &JointPmf, cfg: &QuantityConfig) -> Result<QuantityResult> {
    if p.nx() > KORNER_VERTEX_CAP {
        return Err(Error::GraphTooLarge { vertices: p.nx(), cap: KORNER_VERTEX_CAP });
    }
    let g = confusability_graph(p);
    let sets = maximal_independent_sets(&g)?;
    let px = p.px();
    let n = sets.len();
    let mut lambda = vec![1.0 / n as f64; n];
    let mut a = vec![0.0; p.nx()];
    let mut iterations = 0;
    let mut gap: f64;
    loop {
        a.iter_mut().for_each(|v| *v = 0.0);
        for (s, w) in sets.iter().zip(&lambda) {
            for &x in s {
                a[x] += w;
            }
        }
        let gains: Vec<f64> = sets.iter().map(|s| s.iter().filter(|&&x| px[x] > 0.0).map(|&x| px[x] / a[x]).sum()).collect();
        gap = gains.iter().copied().fold(0.0, f64::max).log2();
        if gap <= KORNER_TOLERANCE || iterations >= KORNER_MAX_ITERATIONS {
            break;
        }
        for (w, g) in lambda.iter_mut().zip(&gains) {
            *w *= g;
        }
        let total: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|w| *w /= total);
        iterations += 1;
    }
    let value: f64 = px.iter().zip(&a).filter(|(m, _)| **m > 0.0).map(|(m, ax)| -m * ax.log2()).sum();
    let witness = Channel::from_fn(p.nx(), p.ny(), n, |x, _, s| {
        if a[x] > 0.0 && sets[s].contains(&x) {
            lambda[s] / a[x]
        } else if a[x] <= 0.0 {
            f64::from(sets.iter().position(|t| t.contains(&x)) == Some(s))
        } else {
            0.0
        }
    })?
    .prune(p);
    let mut q = QuantityResult::new("korner_graph_entropy", value, Method::IndependentSet);
    let t = TriplePmf::new(p, &witness)?;
    q.residuals = vec![
        Residual { name: "I(Y;U|X)".into(), value: t.mi_y_u_given_x() },
        Residual { name: "H(X|Y,U)".into(), value: t.h_x_given_yu() },
    ];
    q.certificate = Some(json!({
        "independent_sets": sets,
        "weights": lambda,
        "lower_bound": value - gap,
        "iterations": iterations,
        "witness_value": t.mi_x_u(),
    }));
    q.witness = Some(witness.clone());
    if iterations >= KORNER_MAX_ITERATIONS {
        q.notes.push(format!("iteration cap reached with gap {gap:.2e}"));
    }
    let cons = ConstraintSpec::structural(&[Structural::MarkovUXY, Structural::RecoverX]);
    let r = solve_constrained_seeded(p, ObjectiveSpec::new([-1.0, 0.0, 0.0])?, &cons, &cfg.optimizer, &[witness.clone()])?;
    q.cross_checks.push(CrossCheck { method: "channel-solve".into(), value: -r.value, difference: (-r.value - value).abs() });
    attach_support_form(p, &mut q, [1.0, -1.0, 0.0], [-1.0, 0.0, 0.0], -1.0, cfg, &[witness])?;
    Ok(q)
}

/// `I(X;Y|U)` and `H(U|X)` for `U = lab(Y)`.
fn partition_scores(p: &JointPmf, lab: &[usize], k: usize) -> (f64, f64) {
    let (nx, ny) = (p.nx(), p.ny());
    let mut pxu = vec![0.0; nx * k];
    let mut pu = vec![0.0; k];
    let py = p.py();
    for x in 0..nx {
        for y in 0..ny {
            let m = p.get(x, y);
            pxu[x * k + lab[y]] += m;
            pu[lab[y]] += m;
        }
    }
    let mut cmi = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            let m = p.get(x, y);
            if m > 0.0 {
                let u = lab[y];
                cmi += m * (m * pu[u] / (pxu[x * k + u] * py[y])).log2();
            }
        }
    }
    let h_u_given_x = entropy(pxu.iter().copied()) - p.h_x();
    (cmi.max(0.0), h_u_given_x.max(0.0))
}

/// Necessary conditional entropy: least `H(U|X)` over functions `U` of `Y`
/// with `X - U - Y`, by enumeration of the partitions of `Y`.
pub fn necessary_cond_entropy(p: &JointPmf, cfg: &QuantityConfig) -> Result<QuantityResult> {
    let ny = p.ny();
    if ny > NCE_Y_CAP {
        return Err(Error::AlphabetTooLarge { size: ny, cap: NCE_Y_CAP });
    }
    let tol = cfg.optimizer.constraint_tol;
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    let mut visited = 0usize;
    for_each_partition(ny, ny, &mut |lab| {
        visited += 1;
        let k = lab.iter().max().map_or(1, |m| m + 1);
        let (cmi, h) = partition_scores(p, lab, k);
        if cmi <= tol && best.as_ref().is_none_or(|b| h < b.0 - 1e-15) {
            best = Some((h, cmi, lab.to_vec()));
        }
    });
    let (value, cmi, lab) = best.expect("U = Y satisfies the chain");
    let k = lab.iter().max().map_or(1, |m| m + 1);
    let witness = Channel::deterministic(p.nx(), ny, k, |_, y| lab[y]);
    let mut q = QuantityResult::new("necessary_cond_entropy", value, Method::PartitionSearch);
    q.residuals = vec![Residual { name: "I(X;Y|U)".into(), value: cmi }];
    q.certificate = Some(json!({ "partition": lab, "partitions_visited": visited }));
    q.witness = Some(witness.clone());
    attach_support_form(p, &mut q, [1.0, 2.0, -2.0], [1.0, 0.0, -1.0], -1.0, cfg, &[witness])?;
    Ok(q)
}

/// Dinkelbach iteration on `v_X - lambda v_Y` over chains `X - Y - U`.
fn ratio(p: &JointPmf, name: &str, sup: bool, cfg: &QuantityConfig) -> Result<QuantityResult> {
    if p.h_y() < RATIO_FLOOR {
        return Err(Error::DegenerateRatio);
    }
    let cons = ConstraintSpec::structural(&[Structural::MarkovXYU]);
    let mut witness = Channel::reveal_y(p.nx(), p.ny());
    let mut lambda = p.mutual_information() / p.h_y();
    let mut last = None;
    let mut notes = Vec::new();
    let mut iterations = 0;
    for _ in 0..20 {
        iterations += 1;
        let dir = if sup { [1.0, -lambda, 0.0] } else { [-1.0, lambda, 0.0] };
        let r = solve_constrained_seeded(p, ObjectiveSpec::new(dir)?, &cons, &cfg.optimizer, std::slice::from_ref(&witness))?;
        let v = r.point;
        if v.y < RATIO_FLOOR {
            if r.value > cfg.optimizer.objective_tol {
                notes.push(format!("best channel has I(Y;U) = {:.2e} below the ratio floor; excluded", v.y));
            }
            last = Some(r);
            break;
        }
        let next = v.x / v.y;
        let improves = if sup { next > lambda + 1e-12 } else { next < lambda - 1e-12 };
        if !improves {
            last = Some(r);
            break;
        }
        let step = (next - lambda).abs();
        lambda = next;
        witness = r.witness.clone();
        last = Some(r);
        if step < 1e-8 {
            break;
        }
    }
    let r = last.expect("at least one iteration");
    let mut q = QuantityResult::new(name, lambda, Method::Optimizer);
    let t = TriplePmf::new(p, &witness)?;
    q.residuals = cons.residuals(&t);
    q.witness = Some(witness);
    q.certificate = Some(json!({ "dinkelbach_iterations": iterations, "final_gap": r.value }));
    q.notes = notes;
    Ok(q)
}

/// `s* = sup I(X;U) / I(Y;U)` over `X - Y - U`.
pub fn s_star(p: &JointPmf, cfg: &QuantityConfig) -> Result<QuantityResult> {
    ratio(p, "s_star", true, cfg)
}

/// `v* = inf I(X;U) / I(Y;U)` over `X - Y - U`.
pub fn v_star(p: &JointPmf, cfg: &QuantityConfig) -> Result<QuantityResult> {
    ratio(p, "v_star", false, cfg)
}

/// Largest `I(Y;U)` with `X - Y - U` and `U` independent of `X`.
pub fn g_rstar(p: &JointPmf, cfg: &QuantityConfig) -> Result<QuantityResult> {
    let cons = ConstraintSpec::structural(&[Structural::MarkovXYU, Structural::IndepX]);
    let seeds = [Channel::constant(p.nx(), p.ny())];
    let s = Solved {
        name: "g_rstar",
        objective: [0.0, 1.0, 0.0],
        cons,
        offset: 0.0,
        scale: 1.0,
        support_form: ([-1.0, 1.0, -1.0], [0.0, 1.0, 0.0], 1.0),
        lift: None,
    };
    Ok(s.run(p, cfg, &seeds)?.0)
}

/// Extends `U` to `(U, V)` where, given each `u`, `V` is a functional
/// representation of `Y` given `X`. Keeps `U` independent of `X` and makes
/// `Y` a function of `(X, U, V)`.
fn functional_lift(p: &JointPmf, c: &Channel) -> Result<Channel> {
    let t = TriplePmf::new(p, c)?;
    let (nx, ny, nu) = t.dims();
    let mut parts: Vec<Option<Channel>> = Vec::with_capacity(nu);
    for u in 0..nu {
        let pu: f64 = (0..nx).flat_map(|x| (0..ny).map(move |y| (x, y))).map(|(x, y)| t.get(x, y, u)).sum();
        if pu <= 1e-12 {
            parts.push(None);
            continue;
        }
        let rows: Vec<Vec<f64>> = (0..nx).map(|x| (0..ny).map(|y| t.get(x, y, u) / pu).collect()).collect();
        parts.push(Some(frl_channel(&JointPmf::from_rows(&rows)?, FrlDirection::XToY)?));
    }
    let sizes: Vec<usize> = parts.iter().map(|v| v.as_ref().map_or(1, Channel::u_size)).collect();
    let offsets: Vec<usize> = sizes.iter().scan(0, |acc, s| Some(std::mem::replace(acc, *acc + s))).collect();
    let total: usize = sizes.iter().sum();
    let lifted = Channel::from_fn(nx, ny, total, |x, y, k| {
        let u = offsets.partition_point(|&o| o <= k) - 1;
        let v = k - offsets[u];
        match &parts[u] {
            Some(ch) => c.get(x, y, u) * ch.get(x, y, v),
            None => c.get(x, y, u),
        }
    })?;
    Ok(lifted.prune(p))
}

/// Excess functional information `H(Y|X) - max { I(Y;U) : U independent of X }`.
pub fn excess_functional_info(p: &JointPmf, cfg: &QuantityConfig) -> Result<QuantityResult> {
    let cons = ConstraintSpec::structural(&[Structural::IndepX]);
    let seeds = [frl_channel(p, FrlDirection::XToY)?];
    let s = Solved {
        name: "excess_functional_info",
        objective: [0.0, 1.0, 0.0],
        cons,
        offset: p.h_y_given_x(),
        scale: -1.0,
        support_form: ([-2.0, 0.0, 1.0], [0.0, 1.0, -1.0], -1.0),
        lift: Some(functional_lift),
    };
    let (mut q, _) = s.run(p, cfg, &seeds)?;
    let frl = TriplePmf::new(p, &seeds[0])?;
    q.cross_checks.push(CrossCheck {
        method: "frl-upper-bound".into(),
        value: p.h_y_given_x() - frl.mi_y_u(),
        difference: (p.h_y_given_x() - frl.mi_y_u() - q.value).abs(),
    });
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn peq() -> JointPmf {
        JointPmf::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap()
    }

    fn pind() -> JointPmf {
        JointPmf::from_rows(&[vec![0.25; 2], vec![0.25; 2]]).unwrap()
    }

    fn pl() -> JointPmf {
        let t = 1.0 / 3.0;
        JointPmf::from_rows(&[vec![t, t], vec![t, 0.0]]).unwrap()
    }

    fn cfg() -> QuantityConfig {
        QuantityConfig { support_form: false, ..QuantityConfig::light() }
    }

    #[test]
    fn trivial_values() {
        let c = cfg();
        assert!((wyner_ci(&peq(), &c).unwrap().value - 1.0).abs() < 1e-6);
        assert!(wyner_ci(&pind(), &c).unwrap().value.abs() < 1e-6);
        assert!((gacs_korner_ci(&peq(), &c).unwrap().value - 1.0).abs() < 1e-12);
        assert!(korner_graph_entropy(&peq(), &c).unwrap().value.abs() < 1e-9);
        assert!((korner_graph_entropy(&pind(), &c).unwrap().value - 1.0).abs() < 1e-9);
        assert!(necessary_cond_entropy(&peq(), &c).unwrap().value.abs() < 1e-12);
        assert!(necessary_cond_entropy(&pind(), &c).unwrap().value.abs() < 1e-12);
        assert!((necessary_cond_entropy(&pl(), &c).unwrap().value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pentagon_graph_entropy() {
        let rows: Vec<Vec<f64>> = (0..5).map(|x| (0..5).map(|y| if y == x || y == (x + 1) % 5 { 0.1 } else { 0.0 }).collect()).collect();
        let p = JointPmf::from_rows(&rows).unwrap();
        let q = korner_graph_entropy(&p, &cfg()).unwrap();
        assert!((q.value - 2.5f64.log2()).abs() < 1e-9, "{}", q.value);
    }

    #[test]
    fn ratios_and_privacy() {
        let c = cfg();
        let s = s_star(&peq(), &c).unwrap();
        let v = v_star(&peq(), &c).unwrap();
        assert!((s.value - 1.0).abs() < 1e-6 && (v.value - 1.0).abs() < 1e-6);
        assert!(v_star(&pind(), &c).unwrap().value.abs() < 1e-9);
        assert!(s_star(&pind(), &c).unwrap().value.abs() < 1e-9);
        assert!((g_rstar(&pind(), &c).unwrap().value - 1.0).abs() < 1e-6);
        assert!(excess_functional_info(&peq(), &c).unwrap().value.abs() < 1e-6);
        assert!(excess_functional_info(&pind(), &c).unwrap().value.abs() < 1e-6);
        let det = JointPmf::from_rows(&[vec![0.5], vec![0.5]]).unwrap();
        assert!(matches!(s_star(&det, &c), Err(Error::DegenerateRatio)));
    }
}
