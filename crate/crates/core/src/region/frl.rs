//! Functional representation channels built by common refinement of
//! conditional CDFs.

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::Result;
use crate::prob::{JointPmf, SUPPORT_THRESHOLD};

/// Which variable the auxiliary must be independent of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrlDirection {
    /// `V` independent of `X` with `Y` a function of `(X, V)`.
    XToY,
    /// `V` independent of `Y` with `X` a function of `(Y, V)`.
    YToX,
}

/// Common refinement: interval lengths and, for every conditioning symbol,
/// the output symbol each interval maps to.
#[derive(Debug, Clone)]
pub(crate) struct Refinement {
    pub lengths: Vec<f64>,
    pub map: Vec<Vec<usize>>,
}

/// Breakpoints closer than this are merged.
const CUT_TOL: f64 = 1e-15;

/// Lays each conditional CDF `cond[a]` on `[0, 1)` and cuts at the union
/// of all breakpoints. Rows with `active[a] == false` only receive a map.
pub(crate) fn refine(cond: &[Vec<f64>], active: &[bool]) -> Refinement {
    let mut cuts = vec![0.0, 1.0];
    for (row, _) in cond.iter().zip(active).filter(|(_, &on)| on) {
        let mut acc = 0.0;
        for v in &row[..row.len().saturating_sub(1)] {
            acc += v;
            if acc > CUT_TOL && acc < 1.0 - CUT_TOL {
                cuts.push(acc);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= CUT_TOL);
    let lengths: Vec<f64> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
    let map = cond
        .iter()
        .map(|row| {
            cuts.windows(2)
                .map(|w| {
                    let mid = 0.5 * (w[0] + w[1]);
                    let mut acc = 0.0;
                    let mut pick = row.len() - 1;
                    for (b, v) in row.iter().enumerate() {
                        acc += v;
                        if mid < acc && *v > 0.0 {
                            pick = b;
                            break;
                        }
                    }
                    pick
                })
                .collect()
        })
        .collect();
    Refinement { lengths, map }
}

/// Channel `p(v|x,y)` realizing the functional representation lemma in the
/// given direction: the auxiliary is exactly independent of the source
/// variable and, together with it, determines the other one.
pub fn frl_channel(p: &JointPmf, direction: FrlDirection) -> Result<Channel> {
    let q = match direction {
        FrlDirection::XToY => p.clone(),
        FrlDirection::YToX => p.transpose(),
    };
    let (na, nb) = (q.nx(), q.ny());
    let pa = q.px();
    let cond: Vec<Vec<f64>> = (0..na)
        .map(|a| {
            if pa[a] > SUPPORT_THRESHOLD {
                q.row(a).iter().map(|v| v / pa[a]).collect()
            } else {
                let mut r = vec![0.0; nb];
                r[0] = 1.0;
                r
            }
        })
        .collect();
    let active: Vec<bool> = pa.iter().map(|&m| m > SUPPORT_THRESHOLD).collect();
    let r = refine(&cond, &active);
    let nv = r.lengths.len();
    let c = Channel::from_fn(p.nx(), p.ny(), nv, |x, y, v| {
        let (a, b) = match direction {
            FrlDirection::XToY => (x, y),
            FrlDirection::YToX => (y, x),
        };
        let pb = cond[a][b];
        if !active[a] || pb <= 0.0 {
            return r.lengths[v];
        }
        if r.map[a][v] == b {
            r.lengths[v] / pb
        } else {
            0.0
        }
    })?;
    Ok(c.prune(p))
}

/// Auxiliary `U = (V, W)` with `V` independent of `X`, `H(Y|X,V) = 0`,
/// `W` independent of `(Y, V)` and `H(X|Y,V,W) = 0`.
pub fn frl_pair_channel(p: &JointPmf) -> Result<Channel> {
    let v = frl_channel(p, FrlDirection::XToY)?;
    let (nx, ny, nv) = (p.nx(), p.ny(), v.u_size());
    // Conditioning symbol a = (y, v); output symbol x.
    let mut pa = vec![0.0; ny * nv];
    let mut joint = vec![vec![0.0; nx]; ny * nv];
    for x in 0..nx {
        for y in 0..ny {
            for k in 0..nv {
                let m = p.get(x, y) * v.get(x, y, k);
                pa[y * nv + k] += m;
                joint[y * nv + k][x] += m;
            }
        }
    }
    let active: Vec<bool> = pa.iter().map(|&m| m > SUPPORT_THRESHOLD).collect();
    let cond: Vec<Vec<f64>> = joint
        .iter()
        .zip(&pa)
        .map(|(row, &m)| {
            if m > SUPPORT_THRESHOLD {
                row.iter().map(|t| t / m).collect()
            } else {
                let mut r = vec![0.0; nx];
                r[0] = 1.0;
                r
            }
        })
        .collect();
    let r = refine(&cond, &active);
    let nw = r.lengths.len();
    let c = Channel::from_fn(nx, ny, nv * nw, |x, y, u| {
        let (k, w) = (u / nw, u % nw);
        let a = y * nv + k;
        let pv = v.get(x, y, k);
        if pv <= 0.0 {
            return 0.0;
        }
        let px = cond[a][x];
        if !active[a] || px <= 0.0 {
            return pv * r.lengths[w];
        }
        if r.map[a][w] == x {
            pv * r.lengths[w] / px
        } else {
            0.0
        }
    })?;
    Ok(c.prune(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::TriplePmf;

    fn pl() -> JointPmf {
        JointPmf::from_rows(&[vec![1.0 / 3.0, 1.0 / 3.0], vec![1.0 / 3.0, 0.0]]).unwrap()
    }

    #[test]
    fn frl_on_small_sources() {
        let eq = JointPmf::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(frl_channel(&eq, FrlDirection::XToY).unwrap().u_size(), 1);
        let ind = JointPmf::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let c = frl_channel(&ind, FrlDirection::XToY).unwrap();
        assert_eq!(c.u_size(), 2);
        let t = TriplePmf::new(&ind, &c).unwrap();
        assert!(t.mi_x_u() < 1e-12 && t.h_y_given_xu() < 1e-12);
        assert!((t.mi_y_u() - 1.0).abs() < 1e-12);
        for dir in [FrlDirection::XToY, FrlDirection::YToX] {
            let c = frl_channel(&pl(), dir).unwrap();
            assert!(c.u_size() <= 3);
            let t = TriplePmf::new(&pl(), &c).unwrap();
            let (indep, rec) = match dir {
                FrlDirection::XToY => (t.mi_x_u(), t.h_y_given_xu()),
                FrlDirection::YToX => (t.mi_y_u(), t.h_x_given_yu()),
            };
            assert!(indep.abs() < 1e-12 && rec.abs() < 1e-12, "{dir:?}");
        }
    }

    #[test]
    fn pair_channel_recovers_both() {
        let p = JointPmf::from_rows(&[vec![0.3, 0.1, 0.05], vec![0.05, 0.2, 0.1], vec![0.0, 0.05, 0.15]]).unwrap();
        let c = frl_pair_channel(&p).unwrap();
        let t = TriplePmf::new(&p, &c).unwrap();
        assert!(t.h_x_given_yu() < 1e-12 && t.h_y_given_xu() < 1e-12);
    }
}
