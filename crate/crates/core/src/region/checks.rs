//! Sampled checks of superadditivity and data processing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::channel::{Channel, TriplePmf};
use crate::error::{Error, Result};
use crate::prob::{product_joint, JointPmf, MASS_TOLERANCE};
use crate::region::approx::{membership_with_hints, RegionConfig, Verdict};
use crate::region::point::{mi_point, MiPoint};

/// A channel with every row drawn from the flat Dirichlet distribution.
pub fn random_channel(nx: usize, ny: usize, nu: usize, rng: &mut ChaCha8Rng) -> Channel {
    let mut q = Vec::with_capacity(nx * ny * nu);
    for _ in 0..nx * ny {
        let row: Vec<f64> = (0..nu).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = row.iter().sum();
        q.extend(row.iter().map(|v: &f64| v / s));
    }
    Channel::new(nx, ny, nu, q).expect("rows are normalized")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperadditivityTrial {
    pub v1: MiPoint,
    pub v2: MiPoint,
    pub verdict: String,
    /// Distance between `v1 + v2` and the point of the product witness.
    pub witness_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperadditivityReport {
    pub trials: usize,
    pub inside: usize,
    pub max_witness_error: f64,
    pub failures: Vec<SuperadditivityTrial>,
}

/// Samples `v1` and `v2` from random channels and decides whether `v1 + v2`
/// lies in the region of the product source, offering the product channel
/// as a hint.
pub fn superadditivity_check(
    p1: &JointPmf,
    p2: &JointPmf,
    trials: usize,
    u_size: usize,
    seed: u64,
    cfg: &RegionConfig,
) -> Result<SuperadditivityReport> {
    let p = product_joint(p1, p2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuperadditivityReport { trials, inside: 0, max_witness_error: 0.0, failures: Vec::new() };
    for _ in 0..trials {
        let c1 = random_channel(p1.nx(), p1.ny(), u_size, &mut rng);
        let c2 = random_channel(p2.nx(), p2.ny(), u_size, &mut rng);
        let v1 = mi_point(p1, &c1)?;
        let v2 = mi_point(p2, &c2)?;
        let hint = Channel::product(&c1, &c2);
        let witness_error = mi_point(&p, &hint)?.dist_inf(v1 + v2);
        report.max_witness_error = report.max_witness_error.max(witness_error);
        let verdict = membership_with_hints(&p, v1 + v2, &[hint], cfg)?;
        if let Verdict::Inside { .. } = verdict {
            report.inside += 1;
        } else {
            report.failures.push(SuperadditivityTrial { v1, v2, verdict: verdict.label().into(), witness_error });
        }
    }
    Ok(report)
}

/// `X2 - X1 - Y1 - Y2`: a source for `(X1, Y1)` with channels `p(x2|x1)`
/// and `p(y2|y1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChainSource {
    pub source: JointPmf,
    pub x_map: Vec<Vec<f64>>,
    pub y_map: Vec<Vec<f64>>,
}

impl MarkovChainSource {
    pub fn new(source: JointPmf, x_map: Vec<Vec<f64>>, y_map: Vec<Vec<f64>>) -> Result<Self> {
        check_stochastic(&x_map, source.nx(), "x")?;
        check_stochastic(&y_map, source.ny(), "y")?;
        Ok(Self { source, x_map, y_map })
    }

    fn nx2(&self) -> usize {
        self.x_map[0].len()
    }

    fn ny2(&self) -> usize {
        self.y_map[0].len()
    }

    /// Joint pmf of `(X2, Y2)`.
    pub fn output(&self) -> Result<JointPmf> {
        let (nx2, ny2) = (self.nx2(), self.ny2());
        let mut rows = vec![vec![0.0; ny2]; nx2];
        for (x1, xr) in self.x_map.iter().enumerate() {
            for (y1, yr) in self.y_map.iter().enumerate() {
                let m = self.source.get(x1, y1);
                for (x2, a) in xr.iter().enumerate() {
                    for (y2, b) in yr.iter().enumerate() {
                        rows[x2][y2] += m * a * b;
                    }
                }
            }
        }
        JointPmf::from_rows(&rows)
    }

    /// Law of `(X2, Y2, U)` when `U` is produced from `(X1, Y1)` by `c`.
    pub fn output_triple(&self, c: &Channel) -> Result<TriplePmf> {
        c.check_shape(&self.source)?;
        let (nx2, ny2, nu) = (self.nx2(), self.ny2(), c.u_size());
        let mut t = vec![0.0; nx2 * ny2 * nu];
        for (x1, xr) in self.x_map.iter().enumerate() {
            for (y1, yr) in self.y_map.iter().enumerate() {
                let m = self.source.get(x1, y1);
                if m == 0.0 {
                    continue;
                }
                for (x2, a) in xr.iter().enumerate() {
                    for (y2, b) in yr.iter().enumerate() {
                        let w = m * a * b;
                        for (u, q) in c.row(x1, y1).iter().enumerate() {
                            t[(x2 * ny2 + y2) * nu + u] += w * q;
                        }
                    }
                }
            }
        }
        Ok(TriplePmf::from_masses(nx2, ny2, nu, t))
    }
}

fn check_stochastic(m: &[Vec<f64>], rows: usize, axis: &str) -> Result<()> {
    if m.len() != rows || m.is_empty() {
        return Err(Error::DimensionMismatch(format!("{axis} map needs {rows} rows")));
    }
    let width = m[0].len();
    for row in m {
        if row.len() != width || width == 0 {
            return Err(Error::DimensionMismatch(format!("{axis} map rows must share a positive width")));
        }
        if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidChannel(format!("{axis} map row is not a pmf")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataProcessingReport {
    pub trials: usize,
    /// Largest value of each of `w_X - v_X`, `w_Y - v_Y`, `w_XY - v_XY`
    /// and the difference of the `I(X;Y|U)` terms; all should be at most 0.
    pub max_slack: [f64; 4],
    pub holds: usize,
}

/// Reuses random channels on `(X1, Y1)` for `(X2, Y2)` and evaluates the
/// four data processing inequalities.
pub fn data_processing_check(chain: &MarkovChainSource, trials: usize, u_size: usize, seed: u64, tol: f64) -> Result<DataProcessingReport> {
    let p1 = &chain.source;
    let i1 = p1.mutual_information();
    let i2 = chain.output()?.mutual_information();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = DataProcessingReport { trials, max_slack: [f64::NEG_INFINITY; 4], holds: 0 };
    for _ in 0..trials {
        let c = random_channel(p1.nx(), p1.ny(), u_size, &mut rng);
        let v = mi_point(p1, &c)?;
        let t = chain.output_triple(&c)?;
        let w = MiPoint::new(t.mi_x_u(), t.mi_y_u(), t.mi_xy_u());
        let s = [w.x - v.x, w.y - v.y, w.xy - v.xy, (i2 - w.x - w.y + w.xy) - (i1 - v.x - v.y + v.xy)];
        for k in 0..4 {
            report.max_slack[k] = report.max_slack[k].max(s[k]);
        }
        report.holds += usize::from(s.iter().all(|x| *x <= tol));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erasure_chain() {
        let p = JointPmf::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let erase = vec![vec![0.7, 0.0, 0.3], vec![0.0, 0.7, 0.3]];
        let chain = MarkovChainSource::new(p, id, erase).unwrap();
        let r = data_processing_check(&chain, 50, 3, 1, 1e-12).unwrap();
        assert_eq!(r.holds, 50, "{r:?}");
    }

    #[test]
    fn identical_bits_add() {
        let eq = JointPmf::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let r = superadditivity_check(&eq, &eq, 5, 2, 3, &RegionConfig::light()).unwrap();
        assert_eq!(r.inside, 5, "{r:?}");
        assert!(r.max_witness_error < 1e-12);
    }
}
