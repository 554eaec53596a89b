use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use egw_core::graph::{
    components, confusability_graph, find_cycle, gacs_korner, has_path_length_3, max_condition_check, maximal_independent_sets,
};
use egw_core::opt::{support_function, ObjectiveSpec};
use egw_core::quantities::{self as q, QuantityConfig, QuantityResult, WitnessConfig};
use egw_core::region::approx::{membership, sample_region, RegionConfig, DIRECTION_SET_VERSION};
use egw_core::region::frl::{frl_channel, FrlDirection};
use egw_core::region::rates::{noncausal_rate_membership, rate_membership, RateTuple};
use egw_core::{Error, JointPmf, MiPoint, TriplePmf};

use crate::{error_kind, CliError, CurveArg, Global, Timer, WitnessArg};

/// Quantity names accepted by `--only`, in output order.
pub const QUANTITY_NAMES: [&str; 11] = [
    "wyner_ci",
    "gacs_korner_ci",
    "korner_graph_entropy",
    "necessary_cond_entropy",
    "s_star",
    "v_star",
    "g_rstar",
    "excess_functional_info",
    "g_nni",
    "g_pni",
    "g_ppi",
];

const INTERACTION: [&str; 3] = ["g_nni", "g_pni", "g_ppi"];

/// Residual at which a reported identity counts as exact.
const EXACT_TOL: f64 = 1e-9;

fn load(input: &Path) -> Result<JointPmf, CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    Ok(JointPmf::from_json(&text)?)
}

fn manifest(g: &Global, command: &str, input: &Path, args: Value) -> Value {
    let o = g.optimizer();
    json!({
        "tool": "egw",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "input": input.display().to_string(),
        "args": args,
        "config": {
            "seed": o.seed,
            "restarts": o.restarts,
            "u_size": o.u_size,
            "u_size_note": "default |X||Y|+2 is a proven cardinality bound for the unconstrained region only",
            "max_iterations": o.max_iterations,
            "objective_tol": o.objective_tol,
            "constraint_tol": o.constraint_tol,
            "infeasible_tol": o.infeasible_tol,
            "agreement_tol": o.agreement_tol,
            "argmax_tol": o.argmax_tol,
            "penalty_schedule": o.penalty_schedule,
            "direction_set_version": DIRECTION_SET_VERSION,
        },
    })
}

fn emit(g: &Global, manifest: Value, result: Value, csv: Option<String>) -> String {
    match (g.csv, csv) {
        (true, Some(table)) => format!("# manifest: {manifest}\n{table}"),
        _ => {
            let mut s = serde_json::to_string_pretty(&json!({ "manifest": manifest, "result": result })).expect("json values serialize");
            s.push('\n');
            s
        }
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("core types serialize")
}

fn error_value(name: &str, e: &Error) -> Value {
    json!({ "name": name, "error": { "kind": error_kind(e), "message": e.to_string() } })
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x}"))
}

fn run_quantity(name: &str, p: &JointPmf, cfg: &QuantityConfig) -> Result<QuantityResult, Error> {
    match name {
        "wyner_ci" => q::wyner_ci(p, cfg),
        "gacs_korner_ci" => q::gacs_korner_ci(p, cfg),
        "korner_graph_entropy" => q::korner_graph_entropy(p, cfg),
        "necessary_cond_entropy" => q::necessary_cond_entropy(p, cfg),
        "s_star" => q::s_star(p, cfg),
        "v_star" => q::v_star(p, cfg),
        "g_rstar" => q::g_rstar(p, cfg),
        "excess_functional_info" => q::excess_functional_info(p, cfg),
        "g_nni" => q::g_nni(p, cfg),
        "g_pni" => q::g_pni(p, cfg),
        "g_ppi" => q::g_ppi(p, cfg),
        _ => unreachable!("names are validated"),
    }
}

pub fn quantities(g: &Global, input: &Path, only: Option<&[String]>, timer: &mut Timer) -> Result<String, CliError> {
    let p = load(input)?;
    timer.stage("load");
    let wanted: Vec<&str> = match only {
        Some(list) => {
            for n in list {
                if !QUANTITY_NAMES.contains(&n.as_str()) {
                    return Err(Error::InvalidArgument(format!("unknown quantity {n:?}; known: {}", QUANTITY_NAMES.join(", "))).into());
                }
            }
            QUANTITY_NAMES.iter().copied().filter(|n| list.iter().any(|m| m == n)).collect()
        }
        None => QUANTITY_NAMES.to_vec(),
    };
    let cfg = QuantityConfig { optimizer: g.optimizer(), ..QuantityConfig::default() };
    let chain_all = INTERACTION.iter().all(|n| wanted.contains(n));
    let singles: Vec<&str> = wanted.iter().copied().filter(|n| !(chain_all && INTERACTION.contains(n))).collect();
    let (mut results, chain) = rayon::join(
        || {
            use rayon::prelude::*;
            singles.par_iter().map(|n| (n.to_string(), run_quantity(n, &p, &cfg))).collect::<Vec<_>>()
        },
        || chain_all.then(|| q::bounds_report(&p, &cfg)),
    );
    let mut chain_value = Value::Null;
    if let Some(report) = chain {
        match report {
            Ok(r) => {
                chain_value = json!({
                    "bound": r.bound,
                    "holds": r.chain_holds,
                    "tolerance": q::CHAIN_TOLERANCE,
                    "violations": r.violations,
                });
                results.push(("g_ppi".into(), Ok(r.g_ppi)));
                results.push(("g_pni".into(), Ok(r.g_pni)));
                results.push(("g_nni".into(), Ok(r.g_nni)));
            }
            Err(e) => {
                for n in INTERACTION {
                    results.push((n.into(), Err(e.clone_shallow())));
                }
            }
        }
    }
    results.sort_by_key(|(n, _)| QUANTITY_NAMES.iter().position(|m| m == n));
    timer.stage("evaluate");

    let mut csv = String::from("name,value_bits,method,support_form_value,support_form_difference,error\n");
    let mut list = Vec::new();
    for (name, r) in &results {
        match r {
            Ok(qr) => {
                let t1 = qr.support_form.as_ref();
                let method = to_value(&qr.method);
                let _ = writeln!(
                    csv,
                    "{name},{},{},{},{},",
                    qr.value,
                    method.as_str().unwrap_or_default(),
                    opt_num(t1.map(|t| t.value)),
                    opt_num(t1.map(|t| t.difference))
                );
                list.push(to_value(qr));
            }
            Err(e) => {
                let _ = writeln!(csv, "{name},,,,,{}", error_kind(e));
                list.push(error_value(name, e));
            }
        }
    }
    let mut result = json!({ "entropies": to_value(&p.entropies()), "quantities": list, "chain": chain_value });
    if p.independence_deviation() <= EXACT_TOL {
        result["independent_pair"] = json!({
            "lower_bound": q::indep_lower_bound(&p)?,
            "continuous_construction": q::achieved_indep_value(&p)?,
        });
    }
    let m = manifest(g, "quantities", input, json!({ "only": only }));
    Ok(emit(g, m, result, Some(csv)))
}

trait CloneShallow {
    fn clone_shallow(&self) -> Error;
}

impl CloneShallow for Error {
    /// Errors are not `Clone`; repeated reports carry the message only.
    fn clone_shallow(&self) -> Error {
        match self {
            Error::Infeasible { residual } => Error::Infeasible { residual: *residual },
            e => Error::InvalidArgument(e.to_string()),
        }
    }
}

fn triple(v: &[f64], what: &str) -> Result<[f64; 3], CliError> {
    match v {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(Error::InvalidArgument(format!("{what} needs exactly 3 comma-separated values, got {}", v.len())).into()),
    }
}

pub fn region(
    g: &Global,
    input: &Path,
    samples: bool,
    support: Option<&[f64]>,
    member: Option<&[f64]>,
    timer: &mut Timer,
) -> Result<String, CliError> {
    let p = load(input)?;
    timer.stage("load");
    let cfg = RegionConfig { optimizer: g.optimizer(), ..RegionConfig::default() };
    let (mode, result, csv) = if samples {
        let approx = sample_region(&p, &cfg)?;
        let csv = approx.to_csv();
        let result = json!({
            "entropies": to_value(&approx.entropies),
            "degenerate": approx.degenerate,
            "hull_dim": approx.hull_dim,
            "max_gap": approx.max_gap(),
            "direction_set_version": approx.direction_set_version,
            "gaps": to_value(&approx.gaps),
            "export": to_value(&approx.export()),
        });
        ("samples", result, Some(csv))
    } else if let Some(b) = support {
        let b = triple(b, "--support")?;
        let r = support_function(&p, ObjectiveSpec::new(b)?, &cfg.optimizer)?;
        let csv = format!("b1,b2,b3,psi_hat,vx,vy,vxy\n{},{},{},{},{},{},{}\n", b[0], b[1], b[2], r.value, r.point.x, r.point.y, r.point.xy);
        ("support", json!({ "direction": b, "psi_hat": r.value, "solve": to_value(&r) }), Some(csv))
    } else if let Some(v) = member {
        let [vx, vy, vxy] = triple(v, "--member")?;
        let verdict = membership(&p, MiPoint::new(vx, vy, vxy), &cfg)?;
        ("member", json!({ "query": v, "verdict": verdict.label(), "detail": to_value(&verdict) }), None)
    } else {
        return Err(Error::InvalidArgument("one of --samples, --support or --member is required".into()).into());
    };
    timer.stage("region");
    let m = manifest(g, "region", input, json!({ "mode": mode, "support": support, "member": member }));
    Ok(emit(g, m, result, csv))
}

pub fn rates(g: &Global, input: &Path, tuple: &[f64], noncausal: bool, timer: &mut Timer) -> Result<String, CliError> {
    let p = load(input)?;
    timer.stage("load");
    if tuple.len() != 5 {
        return Err(Error::InvalidArgument(format!("--tuple needs exactly 5 rates, got {}", tuple.len())).into());
    }
    if tuple.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::InvalidArgument(format!("rates {tuple:?} must be nonnegative")).into());
    }
    let r = RateTuple::new([tuple[0], tuple[1], tuple[2], tuple[3], tuple[4]])?;
    let cfg = RegionConfig { optimizer: g.optimizer(), ..RegionConfig::default() };
    let verdict = if noncausal { noncausal_rate_membership(&p, &r, &cfg)? } else { rate_membership(&p, &r, &cfg)? };
    timer.stage("membership");
    let region = if noncausal { "noncausal" } else { "causal" };
    let result = json!({ "tuple": tuple, "region": region, "verdict": verdict.label(), "detail": to_value(&verdict) });
    let m = manifest(g, "rates", input, json!({ "tuple": tuple, "noncausal": noncausal }));
    Ok(emit(g, m, result, None))
}

/// Parses `start:step:stop` or a comma-separated list.
pub fn parse_grid(grid: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Core(Error::InvalidArgument(format!("bad t-grid {grid:?}; expected start:step:stop or a list")));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    if grid.contains(':') {
        let parts: Vec<&str> = grid.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (a, step, b) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !a.is_finite() || !b.is_finite() || b < a {
            return Err(bad());
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        if n > 100_000 {
            return Err(bad());
        }
        Ok((0..=n).map(|k| a + k as f64 * step).collect())
    } else {
        grid.split(',').map(num).collect()
    }
}

pub fn curve(g: &Global, input: &Path, kind: CurveArg, t_grid: &str, timer: &mut Timer) -> Result<String, CliError> {
    let p = load(input)?;
    let grid = parse_grid(t_grid)?;
    timer.stage("load");
    let kind_core = match kind {
        CurveArg::Ib => q::CurveKind::InformationBottleneck,
        CurveArg::Pf => q::CurveKind::PrivacyFunnel,
        CurveArg::Synth => q::CurveKind::ChannelSynthesis,
    };
    let req = q::CurveRequest::new(kind_core, grid)?;
    let c = q::curve(&p, &req, &g.optimizer())?;
    timer.stage("curve");
    let mut csv = String::from("t,value,raw,cleanup_delta,status,max_residual\n");
    for pt in &c.points {
        let status = to_value(&pt.status);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            pt.t,
            opt_num(pt.value),
            opt_num(pt.raw),
            pt.cleanup_delta,
            status.as_str().unwrap_or_default(),
            pt.max_residual
        );
    }
    let m = manifest(g, "curve", input, json!({ "kind": to_value(&kind_core), "t_grid": t_grid }));
    Ok(emit(g, m, to_value(&c), Some(csv)))
}

pub fn witness(g: &Global, input: &Path, kind: WitnessArg, epsilon: Option<f64>, timer: &mut Timer) -> Result<String, CliError> {
    let p = load(input)?;
    timer.stage("load");
    let wc = WitnessConfig { epsilon, ..WitnessConfig::default() };
    let mut extra = Value::Null;
    let (name, channel) = match kind {
        WitnessArg::Path => {
            let path = has_path_length_3(&p).ok_or_else(|| Error::ConditionNotMet("support graph has no path of length 3".into()))?;
            extra = json!({ "path": to_value(&path) });
            ("path", q::path_witness_channel(&p, path, &wc)?)
        }
        WitnessArg::Cycle => {
            let cycle = find_cycle(&p).ok_or_else(|| Error::ConditionNotMet("support graph has no cycle".into()))?;
            extra = json!({ "cycle": to_value(&cycle) });
            ("cycle", q::cycle_witness_channel(&p, &cycle, &wc)?)
        }
        WitnessArg::Bvn => ("bvn", q::bvn_channel(&p)?),
        WitnessArg::Frl => {
            let c = frl_channel(&p, FrlDirection::XToY)?;
            let t = TriplePmf::new(&p, &c)?;
            let h_y_given_v = p.h_y() - t.mi_y_u();
            let h_v_given_y = t.h_u_given_y();
            extra = json!({
                "independence_residual": t.mi_x_u(),
                "h_y_given_xv": t.h_y_given_xu(),
                "v_size": c.u_size(),
                "v_size_bound": p.nx() * (p.ny() - 1) + 1,
                "h_y_given_v": h_y_given_v,
                "h_v_given_y": h_v_given_y,
                "v_equivalent_to_y": h_y_given_v <= EXACT_TOL && h_v_given_y <= EXACT_TOL,
            });
            ("frl", c)
        }
        WitnessArg::Gk => {
            let (value, lab) = gacs_korner(&p);
            extra = json!({ "gacs_korner": value, "components": lab.count() });
            ("gk", lab.channel(p.nx(), p.ny()))
        }
    };
    let report = q::witness_report(&p, &channel)?;
    timer.stage("witness");
    let result = json!({ "kind": name, "channel": to_value(&channel), "report": to_value(&report), "details": extra });
    let m = manifest(g, "witness", input, json!({ "kind": name, "epsilon": epsilon }));
    Ok(emit(g, m, result, None))
}

pub fn graph(g: &Global, input: &Path, timer: &mut Timer) -> Result<String, CliError> {
    let p = load(input)?;
    timer.stage("load");
    let (gk, lab) = gacs_korner(&p);
    let conf = confusability_graph(&p);
    let mis = match maximal_independent_sets(&conf) {
        Ok(sets) => to_value(&sets),
        Err(e) => error_value("maximal_independent_sets", &e),
    };
    let support: Vec<(usize, usize)> = p.support();
    let result = json!({
        "support": support,
        "components": to_value(&components(&p)),
        "gacs_korner": gk,
        "component_count": lab.count(),
        "path3": has_path_length_3(&p).map(|x| to_value(&x)),
        "cycle": find_cycle(&p).map(|x| to_value(&x)),
        "max_condition": max_condition_check(&p),
        "confusability_edges": conf.edges(),
        "maximal_independent_sets": mis,
    });
    timer.stage("graph");
    let m = manifest(g, "graph", input, json!({}));
    Ok(emit(g, m, result, None))
}
