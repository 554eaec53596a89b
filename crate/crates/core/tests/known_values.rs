use egw_core::opt::{grid_oracle, ConstraintSpec, ObjectiveSpec, OptimizerConfig, Structural};
use egw_core::quantities::{self as q, ib_curve, pf_curve, synthesis_curve, QuantityConfig};
use egw_core::JointPmf;

/// Grid-oracle value of the Wyner common information of DSBS(0.1), frozen.
const DSBS_WYNER_ORACLE: f64 = 0.8730552073230002;

fn dsbs(a: f64) -> JointPmf {
    JointPmf::from_rows(&[vec![(1.0 - a) / 2.0, a / 2.0], vec![a / 2.0, (1.0 - a) / 2.0]]).unwrap()
}

fn pl() -> JointPmf {
    let t = 1.0 / 3.0;
    JointPmf::from_rows(&[vec![t, t], vec![t, 0.0]]).unwrap()
}

fn wyner_oracle(p: &JointPmf) -> f64 {
    let cons = ConstraintSpec::structural(&[Structural::MarkovXUY]);
    -grid_oracle(p, ObjectiveSpec::new([0.0, 0.0, -1.0]).unwrap(), &cons, 2, 0.01, 1e-10).unwrap().value
}

#[test]
fn oracle_reproduces_frozen_dsbs_value() {
    assert!((wyner_oracle(&dsbs(0.1)) - DSBS_WYNER_ORACLE).abs() < 1e-12);
}

#[test]
fn wyner_matches_oracle_on_small_sources() {
    let cfg = QuantityConfig { support_form: false, ..QuantityConfig::default() };
    for p in [dsbs(0.1), dsbs(0.25), pl()] {
        let r = q::wyner_ci(&p, &cfg).unwrap();
        let o = wyner_oracle(&p);
        assert!((r.value - o).abs() < 1e-3, "optimizer {} oracle {o}", r.value);
    }
}

#[test]
fn support_forms_agree_on_small_sources() {
    let cfg = QuantityConfig::default();
    let mixed = JointPmf::from_rows(&[vec![0.2, 0.05, 0.05], vec![0.1, 0.15, 0.05], vec![0.02, 0.08, 0.3]]).unwrap();
    for p in [pl(), dsbs(0.1), mixed] {
        for r in [
            q::wyner_ci(&p, &cfg),
            q::gacs_korner_ci(&p, &cfg),
            q::g_rstar(&p, &cfg),
            q::excess_functional_info(&p, &cfg),
            q::g_pni(&p, &cfg),
            q::g_ppi(&p, &cfg),
        ] {
            let r = r.unwrap();
            if let Some(t) = &r.support_form {
                assert!(t.difference < 3e-3, "{}: {} vs {}", r.name, r.value, t.value);
            }
        }
    }
}

#[test]
fn exact_values_on_named_sources() {
    let cfg = QuantityConfig::light();
    let pl = pl();
    assert!((q::necessary_cond_entropy(&pl, &cfg).unwrap().value - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(q::g_ppi(&pl, &cfg).unwrap().value, 0.0);
    let rows: Vec<Vec<f64>> = (0..5).map(|x| (0..5).map(|y| if y == x || y == (x + 1) % 5 { 0.1 } else { 0.0 }).collect()).collect();
    let pentagon = JointPmf::from_rows(&rows).unwrap();
    assert!((q::korner_graph_entropy(&pentagon, &cfg).unwrap().value - 2.5f64.log2()).abs() < 1e-6);
    let blocks = JointPmf::from_rows(&[vec![0.25, 0.25, 0.0], vec![0.0, 0.0, 0.5]]).unwrap();
    assert!((q::gacs_korner_ci(&blocks, &cfg).unwrap().value - 1.0).abs() < 1e-12);
}

#[test]
fn curves_are_monotone() {
    let cfg = OptimizerConfig::light();
    let p = dsbs(0.1);
    let grid: Vec<f64> = (0..=5).map(|i| i as f64 * 0.1).collect();
    let values = |c: q::Curve| c.points.iter().map(|x| x.value.unwrap()).collect::<Vec<_>>();
    let ib = values(ib_curve(&p, &grid, &cfg).unwrap());
    let pf = values(pf_curve(&p, &grid, &cfg).unwrap());
    let synth = values(synthesis_curve(&p, &grid, &cfg).unwrap());
    assert!(ib.windows(2).all(|w| w[0] <= w[1]), "{ib:?}");
    assert!(pf.windows(2).all(|w| w[0] <= w[1]), "{pf:?}");
    assert!(synth.windows(2).all(|w| w[0] >= w[1]), "{synth:?}");
    for (t, v) in grid.iter().zip(&ib) {
        assert!(*v >= t - 1e-6, "I(Y;U) >= I(X;U) along X - Y - U");
    }
}
