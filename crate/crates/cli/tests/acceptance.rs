//! Acceptance checks, run in sequence with one PASS/FAIL line each.
//! Runs without the libtest harness so that the lines are never captured.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use egw_core::graph::{find_cycle, gacs_korner, has_path_length_3};
use egw_core::opt::{solve_constrained, ConstraintSpec, ObjectiveSpec, OptimizerConfig, Structural};
use egw_core::prob::{entropy, product_joint};
use egw_core::quantities::{
    self as q, achieved_indep_value, bounds_report, bvn_channel, cycle_witness_channel, f_integral, indep_lower_bound,
    interaction_info, path_witness_channel, witness_report, InteractionKind, QuantityConfig, WitnessConfig,
};
use egw_core::region::approx::{sample_region, RegionConfig, Verdict};
use egw_core::region::asymptotic::{cl_infty_consistency, consistency_queries};
use egw_core::region::checks::{random_channel, superadditivity_check};
use egw_core::region::frl::{frl_channel, FrlDirection};
use egw_core::region::point::{mi_point, outer_bound_check};
use egw_core::region::rates::{rate_membership_with_hints, rate_tuple_of};
use egw_core::{Channel, JointPmf, TriplePmf};

/// Wyner common information of DSBS(0.1) from the binary-U grid oracle
/// (step 0.01, factor grid).
const DSBS_WYNER_ORACLE: f64 = 0.8730552073230002;

type Outcome = Result<String, String>;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus() -> Vec<(String, JointPmf)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|f| {
            let p = JointPmf::from_json(&std::fs::read_to_string(&f).expect("readable")).expect("valid pmf");
            (f.file_stem().unwrap().to_string_lossy().into_owned(), p)
        })
        .collect()
}

fn exp(rng: &mut ChaCha8Rng) -> f64 {
    -rng.random::<f64>().max(1e-300).ln()
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Flat Dirichlet pmf with each cell zeroed with probability `sparsity`.
fn random_pmf(nx: usize, ny: usize, sparsity: f64, rng: &mut ChaCha8Rng) -> JointPmf {
    loop {
        let cells: Vec<f64> = (0..nx * ny).map(|_| if rng.random::<f64>() < sparsity { 0.0 } else { exp(rng) }).collect();
        if cells.iter().sum::<f64>() <= 0.0 {
            continue;
        }
        let cells = normalize(cells);
        let rows: Vec<Vec<f64>> = cells.chunks(ny).map(|r| r.to_vec()).collect();
        return JointPmf::from_rows(&rows).expect("normalized");
    }
}

fn random_marginal(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    normalize((0..n).map(|_| exp(rng)).collect())
}

fn product_pmf(px: &[f64], py: &[f64]) -> JointPmf {
    let rows: Vec<Vec<f64>> = px.iter().map(|a| py.iter().map(|b| a * b).collect()).collect();
    JointPmf::from_rows(&rows).expect("product of marginals")
}

fn within(name: &str, elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed > limit {
        Err(format!("{name} took {:.1}s, limit {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()))
    } else {
        Ok(())
    }
}

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_chain, mut worst_outer) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (nx, ny) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let p = random_pmf(nx, ny, 0.2, &mut rng);
        let nu = rng.random_range(1..=6);
        let c = random_channel(nx, ny, nu, &mut rng);
        let t = TriplePmf::new(&p, &c).map_err(|e| e.to_string())?;
        worst_chain = worst_chain.max((t.mi_xy_u() - t.mi_x_u() - t.mi_y_u_given_x()).abs());
        let v = mi_point(&p, &c).map_err(|e| e.to_string())?;
        worst_outer = worst_outer.max(outer_bound_check(&p, v).max_violation);
    }
    within("suite", start.elapsed(), Duration::from_secs(10))?;
    let detail = format!("chain rule error {worst_chain:.1e}, outer violation {worst_outer:.1e}");
    if worst_chain <= 1e-10 && worst_outer <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Block-diagonal pmf with the given block masses and random block contents.
fn planted_blocks(masses: &[f64], rng: &mut ChaCha8Rng) -> JointPmf {
    let sizes: Vec<(usize, usize)> = masses.iter().map(|_| (rng.random_range(1..=2), rng.random_range(1..=2))).collect();
    let nx: usize = sizes.iter().map(|s| s.0).sum();
    let ny: usize = sizes.iter().map(|s| s.1).sum();
    let mut rows = vec![vec![0.0; ny]; nx];
    let (mut ox, mut oy) = (0, 0);
    for (&m, &(bx, by)) in masses.iter().zip(&sizes) {
        // Connected blocks: every cell of the block is positive.
        let w = normalize((0..bx * by).map(|_| 0.2 + exp(rng)).collect());
        for i in 0..bx {
            for j in 0..by {
                rows[ox + i][oy + j] = m * w[i * by + j];
            }
        }
        ox += bx;
        oy += by;
    }
    JointPmf::from_rows(&rows).expect("planted pmf")
}

fn gacs_korner_blocks() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = QuantityConfig::light();
    let (mut worst_exact, mut worst_form) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let k = rng.random_range(1..=3);
        let masses = random_marginal(k, &mut rng);
        let p = planted_blocks(&masses, &mut rng);
        let planted = entropy(masses.iter().copied());
        let (exact, _) = gacs_korner(&p);
        worst_exact = worst_exact.max((exact - planted).abs());
        let r = q::gacs_korner_ci(&p, &cfg).map_err(|e| e.to_string())?;
        let t1 = r.support_form.ok_or("no support-function form")?;
        worst_form = worst_form.max((t1.value - exact).abs());
    }
    within("suite", start.elapsed(), Duration::from_secs(30))?;
    let detail = format!("exact vs planted {worst_exact:.1e}, exact vs support form {worst_form:.1e}");
    if worst_exact <= 1e-12 && worst_form <= 1e-3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Bare optimizer runs: no graph screens and no constructed starting channels.
fn independent_bits() -> Outcome {
    let start = Instant::now();
    let p = JointPmf::from_rows(&[vec![0.25; 2], vec![0.25; 2]]).unwrap();
    let cfg = OptimizerConfig::default();
    let objective = ObjectiveSpec::new([-1.0, -1.0, 1.0]).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, cons) in [
        ("g_nni", ConstraintSpec::none()),
        ("g_pni", ConstraintSpec::structural(&[Structural::IndepX])),
        ("g_ppi", ConstraintSpec::structural(&[Structural::IndepX, Structural::IndepY])),
    ] {
        let r = solve_constrained(&p, objective, &cons, &cfg).map_err(|e| e.to_string())?;
        let res = r.residuals.iter().map(|x| x.value).fold(0.0, f64::max);
        ok &= (r.value - 1.0).abs() <= 1e-3 && res <= 1e-9;
        parts.push(format!("{name} = {:.6} (residual {res:.1e})", r.value));
    }
    within("suite", start.elapsed(), Duration::from_secs(10))?;
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn zero_conditions() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = QuantityConfig { screens: false, support_form: false, ..QuantityConfig::default() };
    let wc = WitnessConfig::default();
    let (mut zero_cases, mut worst_zero, mut pos_cases, mut min_pos) = (0, 0.0f64, 0, f64::INFINITY);
    for _ in 0..50 {
        let p = random_pmf(3, 3, 0.45, &mut rng);
        match has_path_length_3(&p) {
            None => {
                zero_cases += 1;
                let r = interaction_info(&p, InteractionKind::Nni, &cfg, &[]).map_err(|e| e.to_string())?;
                worst_zero = worst_zero.max(r.value);
            }
            Some(path) => {
                pos_cases += 1;
                let c = path_witness_channel(&p, path, &wc).map_err(|e| e.to_string())?;
                min_pos = min_pos.min(witness_report(&p, &c).map_err(|e| e.to_string())?.interaction);
            }
        }
        match find_cycle(&p) {
            None => {
                zero_cases += 1;
                let r = interaction_info(&p, InteractionKind::Ppi, &cfg, &[]).map_err(|e| e.to_string())?;
                worst_zero = worst_zero.max(r.value);
            }
            Some(cycle) => {
                pos_cases += 1;
                let c = cycle_witness_channel(&p, &cycle, &wc).map_err(|e| e.to_string())?;
                min_pos = min_pos.min(witness_report(&p, &c).map_err(|e| e.to_string())?.interaction);
            }
        }
    }
    within("suite", start.elapsed(), Duration::from_secs(120))?;
    let detail = format!(
        "{zero_cases} zero cases (largest optimizer value {worst_zero:.1e}), {pos_cases} positive cases (smallest witness value {min_pos:.1e})"
    );
    if worst_zero <= 1e-4 && (pos_cases == 0 || min_pos > 1e-6) && zero_cases > 0 && pos_cases > 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dsbs_wyner() -> Outcome {
    let start = Instant::now();
    let p = JointPmf::from_rows(&[vec![0.45, 0.05], vec![0.05, 0.45]]).unwrap();
    let r = q::wyner_ci(&p, &QuantityConfig { support_form: false, ..QuantityConfig::default() }).map_err(|e| e.to_string())?;
    within("solve", start.elapsed(), Duration::from_secs(60))?;
    let detail = format!("optimizer {:.6}, oracle {DSBS_WYNER_ORACLE:.6}", r.value);
    if (r.value - DSBS_WYNER_ORACLE).abs() <= 1e-3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pentagon() -> Outcome {
    let start = Instant::now();
    let rows: Vec<Vec<f64>> = (0..5).map(|x| (0..5).map(|y| if y == x || y == (x + 1) % 5 { 0.1 } else { 0.0 }).collect()).collect();
    let p = JointPmf::from_rows(&rows).unwrap();
    let r = q::korner_graph_entropy(&p, &QuantityConfig { support_form: false, ..QuantityConfig::default() }).map_err(|e| e.to_string())?;
    within("solve", start.elapsed(), Duration::from_secs(30))?;
    let exact = (2.5f64).log2();
    let cross = r.cross_checks.iter().map(|c| (c.value - r.value).abs()).fold(f64::NAN, f64::max);
    let detail = format!("value {:.9}, error {:.1e}, channel-solve difference {cross:.1e}", r.value, (r.value - exact).abs());
    if (r.value - exact).abs() <= 1e-6 && cross <= 1e-3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn chain_on_corpus() -> Outcome {
    let mut bad = Vec::new();
    let files = corpus();
    for (name, p) in &files {
        let r = bounds_report(p, &QuantityConfig { support_form: false, ..QuantityConfig::default() }).map_err(|e| e.to_string())?;
        if !r.chain_holds {
            bad.push(format!("{name}: {}", r.violations.join("; ")));
        }
    }
    if bad.is_empty() {
        Ok(format!("{} corpus pmfs", files.len()))
    } else {
        Err(bad.join(" | "))
    }
}

fn bvn_uniform() -> Outcome {
    let p = JointPmf::from_rows(&vec![vec![1.0 / 9.0; 3]; 3]).unwrap();
    let c = bvn_channel(&p).map_err(|e| e.to_string())?;
    let w = witness_report(&p, &c).map_err(|e| e.to_string())?;
    let res = [w.mi_x_u, w.mi_y_u, w.h_x_given_yu, w.h_y_given_xu].into_iter().fold(0.0, f64::max);
    let err = (w.interaction - 3f64.log2()).abs();
    let detail = format!("interaction error {err:.1e}, largest residual {res:.1e}");
    if err <= 1e-9 && res <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn frl_random() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut worst, mut over) = (0.0f64, 0);
    for _ in 0..50 {
        let (nx, ny) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let p = random_pmf(nx, ny, 0.2, &mut rng);
        let c = frl_channel(&p, FrlDirection::XToY).map_err(|e| e.to_string())?;
        let t = TriplePmf::new(&p, &c).map_err(|e| e.to_string())?;
        worst = worst.max(t.mi_x_u()).max(t.h_y_given_xu());
        if c.u_size() > nx * (ny - 1) + 1 {
            over += 1;
        }
    }
    let detail = format!("largest residual {worst:.1e}, alphabet bound exceeded {over} times");
    if worst <= 1e-12 && over == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Midpoint rule for `int_0^1 l(|[0,b] ∩ ([u,u+a] mod 1)|) du`.
fn f_quadrature(a: f64, b: f64, n: usize) -> f64 {
    let l = |t: f64| if t <= 0.0 { 0.0 } else { -t * t.log2() };
    (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            let first = ((u + a).min(1.0).min(b) - u).max(0.0);
            let wrap = (u + a - 1.0).max(0.0).min(b);
            l(first + wrap)
        })
        .sum::<f64>()
        / n as f64
}

fn independent_pairs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut worst_gap, mut worst_quad) = (f64::INFINITY, 0.0f64);
    for _ in 0..20 {
        let (px, py) = (random_marginal(rng.random_range(2..=4), &mut rng), random_marginal(rng.random_range(2..=4), &mut rng));
        let p = product_pmf(&px, &py);
        let gap = achieved_indep_value(&p).map_err(|e| e.to_string())? - indep_lower_bound(&p).map_err(|e| e.to_string())?;
        worst_gap = worst_gap.min(gap);
        for &a in &px {
            for &b in &py {
                let closed = f_integral(a, b).map_err(|e| e.to_string())?;
                worst_quad = worst_quad.max((closed - f_quadrature(a, b, 10_000)).abs());
            }
        }
    }
    let detail = format!("smallest achieved minus bound {worst_gap:.3e}, quadrature error {worst_quad:.1e}");
    if worst_gap >= -1e-9 && worst_quad <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn superadditivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p1 = random_pmf(2, 2, 0.0, &mut rng);
    let p2 = random_pmf(2, 2, 0.0, &mut rng);
    let report = superadditivity_check(&p1, &p2, 100, 2, 11, &RegionConfig::light()).map_err(|e| e.to_string())?;
    let cfg = QuantityConfig { support_form: false, ..QuantityConfig::light() };
    let mut worst = f64::INFINITY;
    for _ in 0..10 {
        let p = random_pmf(2, 2, 0.0, &mut rng);
        let single = q::g_ppi(&p, &cfg).map_err(|e| e.to_string())?;
        let w = single.witness.clone().ok_or("no witness")?;
        let pp = product_joint(&p, &p).map_err(|e| e.to_string())?;
        let double = interaction_info(&pp, InteractionKind::Ppi, &cfg, &[Channel::product(&w, &w)]).map_err(|e| e.to_string())?;
        worst = worst.min(double.value - 2.0 * single.value);
    }
    let detail = format!("{}/{} sums inside, smallest g_ppi(p⊗p) - 2 g_ppi(p) = {worst:.2e}", report.inside, report.trials);
    if report.inside == 100 && worst >= -2e-3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closure_consistency() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, p) in corpus().iter().filter(|(n, _)| ["p_ind", "p_l", "dsbs_0.1", "mixed_3x3"].contains(&n.as_str())) {
        let approx = sample_region(p, &RegionConfig::light()).map_err(|e| e.to_string())?;
        let r = cl_infty_consistency(&approx, &consistency_queries(&approx.entropies, 120, 12));
        ok &= r.agree() && r.compared >= 100;
        parts.push(format!(
            "{name}: {}/{} compared, {} form and {} mapping disagreements",
            r.compared,
            r.queries,
            r.form_disagreements.len(),
            r.mapping_disagreements.len()
        ));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rate_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cfg = RegionConfig::light();
    let (mut inside, mut outside, mut perturbed) = (0, 0, 0);
    let mut failures = Vec::new();
    for i in 0..100 {
        let p = random_pmf(rng.random_range(2..=3), rng.random_range(2..=3), 0.2, &mut rng);
        let c = random_channel(p.nx(), p.ny(), rng.random_range(2..=4), &mut rng);
        let v = mi_point(&p, &c).map_err(|e| e.to_string())?;
        let r = rate_tuple_of(&p, v).map_err(|e| e.to_string())?;
        if rate_membership_with_hints(&p, &r, &[c], &cfg).map_err(|e| e.to_string())?.is_inside() {
            inside += 1;
        } else {
            failures.push(format!("round trip {i}"));
        }
        // Corners of U constant and U = X are tight in every coordinate.
        for tight in [Channel::constant(p.nx(), p.ny()), Channel::reveal_x(p.nx(), p.ny())] {
            let corner = rate_tuple_of(&p, mi_point(&p, &tight).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            for k in 0..5 {
                perturbed += 1;
                match rate_membership_with_hints(&p, &corner.shifted(k, -0.01), &[], &cfg).map_err(|e| e.to_string())? {
                    Verdict::Outside(cert) if !cert.name.is_empty() => outside += 1,
                    v => failures.push(format!("pmf {i} coordinate {k}: {}", v.label())),
                }
            }
        }
    }
    let detail = format!("{inside}/100 round trips inside, {outside}/{perturbed} perturbations outside with a named certificate");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join(", ")))
    }
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_egw");
    let runs: Vec<Vec<&str>> = vec![
        vec!["quantities"],
        vec!["graph"],
        vec!["region", "--samples"],
        vec!["region", "--support", "-1,-1,1"],
        vec!["region", "--member", "0.1,0.1,0.3"],
        vec!["rates", "--tuple", "1,1,1,1,1"],
        vec!["curve", "--kind", "ib", "--t-grid", "0:0.25:0.5"],
        vec!["witness", "--kind", "frl"],
    ];
    let mut count = 0;
    for (name, _) in corpus() {
        let input = corpus_dir().join(format!("{name}.json"));
        for args in &runs {
            let mut outputs = Vec::new();
            for _ in 0..2 {
                let out = Command::new(bin)
                    .args(args)
                    .arg(&input)
                    .args(["--restarts", "4", "--seed", "7"])
                    .output()
                    .map_err(|e| e.to_string())?;
                outputs.push((out.status.code(), out.stdout));
            }
            if outputs[0] != outputs[1] {
                return Err(format!("{name} {} differs between runs", args.join(" ")));
            }
            count += 1;
        }
    }
    Ok(format!("{count} command/input pairs byte-identical across two runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("identity suite", identity_suite),
        ("Gacs-Korner on planted blocks", gacs_korner_blocks),
        ("interaction quantities on independent bits", independent_bits),
        ("zero conditions from the support graph", zero_conditions),
        ("Wyner common information of DSBS(0.1)", dsbs_wyner),
        ("Korner graph entropy of the pentagon", pentagon),
        ("interaction chain on the corpus", chain_on_corpus),
        ("BvN construction on uniform 3x3", bvn_uniform),
        ("functional representation channels", frl_random),
        ("independent-pair construction", independent_pairs),
        ("superadditivity", superadditivity),
        ("closure consistency", closure_consistency),
        ("rate region round trip", rate_round_trip),
        ("CLI determinism", cli_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name} ({secs:.1}s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1}s): {d}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
