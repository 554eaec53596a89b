//! Thin wrapper over `minilp` for the small LPs used by membership tests.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::Result;

pub(crate) enum Cmp {
    Le,
    Ge,
    Eq,
}

/// Dense LP: minimize `c . x` subject to rows and per-variable bounds.
pub(crate) struct Lp {
    pub objective: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
    pub rows: Vec<(Vec<f64>, Cmp, f64)>,
}

pub(crate) enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl Lp {
    pub fn new(objective: Vec<f64>, bounds: Vec<(f64, f64)>) -> Self {
        Self { objective, bounds, rows: Vec::new() }
    }

    pub fn row(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) {
        self.rows.push((coeffs, cmp, rhs));
    }

    pub fn minimize(&self) -> Result<LpOutcome> {
        let mut prob = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = self
            .objective
            .iter()
            .zip(&self.bounds)
            .map(|(&c, &b)| prob.add_var(c, b))
            .collect();
        for (coeffs, cmp, rhs) in &self.rows {
            let expr: Vec<_> = coeffs
                .iter()
                .enumerate()
                .filter(|(_, &a)| a != 0.0)
                .map(|(i, &a)| (vars[i], a))
                .collect();
            let op = match cmp {
                Cmp::Le => ComparisonOp::Le,
                Cmp::Ge => ComparisonOp::Ge,
                Cmp::Eq => ComparisonOp::Eq,
            };
            prob.add_constraint(expr.as_slice(), op, *rhs);
        }
        match prob.solve() {
            Ok(sol) => Ok(LpOutcome::Optimal {
                value: sol.objective(),
                x: vars.iter().map(|&v| sol[v]).collect(),
            }),
            Err(minilp::Error::Infeasible) => Ok(LpOutcome::Infeasible),
            Err(minilp::Error::Unbounded) => Ok(LpOutcome::Unbounded),
        }
    }
}
