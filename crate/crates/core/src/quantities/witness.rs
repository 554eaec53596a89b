//! Explicit channels certifying positivity or the maximum of the
//! interaction informations.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, TriplePmf};
use crate::error::{Error, Result};
use crate::graph::{components, max_condition_check, Cycle, Path3};
use crate::prob::JointPmf;
use crate::region::frl::refine;

/// Settings for the perturbation witnesses and the quantized constructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessConfig {
    /// Perturbation size; `None` picks a quarter of the smallest relevant cell mass.
    pub epsilon: Option<f64>,
    /// Number of levels when a continuous auxiliary is quantized.
    pub m: usize,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        Self { epsilon: None, m: 64 }
    }
}

impl WitnessConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.epsilon {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::InvalidArgument(format!("epsilon must be positive, got {e}")));
            }
        }
        if self.m < 2 {
            return Err(Error::InvalidArgument(format!("quantization level must be at least 2, got {}", self.m)));
        }
        Ok(())
    }

    fn epsilon_for(&self, min_mass: f64) -> Result<f64> {
        self.validate()?;
        let max = min_mass / 4.0;
        let eps = self.epsilon.unwrap_or(max);
        if eps > max {
            return Err(Error::EpsilonTooLarge { epsilon: eps, max });
        }
        Ok(eps)
    }
}

/// Binary channel that perturbs the two cells of row `x1` of a length-3
/// path in opposite directions. `U` stays exactly independent of `X`.
pub fn path_witness_channel(p: &JointPmf, path: Path3, wc: &WitnessConfig) -> Result<Channel> {
    let Path3 { x1, y1, x2, y2 } = path;
    if x1 >= p.nx() || x2 >= p.nx() || y1 >= p.ny() || y2 >= p.ny() {
        return Err(Error::InvalidPath(format!("{path:?} is out of range")));
    }
    if x1 == x2 || y1 == y2 {
        return Err(Error::InvalidPath("path needs two distinct x and two distinct y".into()));
    }
    for (x, y) in [(x1, y1), (x1, y2), (x2, y1)] {
        if !p.in_support(x, y) {
            return Err(Error::InvalidPath(format!("cell ({x}, {y}) has zero mass")));
        }
    }
    let (a, b) = (p.get(x1, y1), p.get(x1, y2));
    let eps = wc.epsilon_for(a.min(b))?;
    Channel::from_fn(p.nx(), p.ny(), 2, |x, y, u| {
        let d = if (x, y) == (x1, y1) {
            eps / a
        } else if (x, y) == (x1, y2) {
            -eps / b
        } else {
            0.0
        };
        if u == 0 {
            0.5 + d
        } else {
            0.5 - d
        }
    })
}

fn validate_cycle(p: &JointPmf, cycle: &Cycle) -> Result<()> {
    let a = cycle.len();
    if a < 2 || cycle.ys.len() != a {
        return Err(Error::InvalidCycle(format!("need at least two x and as many y, got {} and {}", a, cycle.ys.len())));
    }
    let distinct = |v: &[usize]| {
        let mut s = v.to_vec();
        s.sort_unstable();
        s.windows(2).all(|w| w[0] != w[1])
    };
    if !distinct(&cycle.xs) || !distinct(&cycle.ys) {
        return Err(Error::InvalidCycle("repeated vertex".into()));
    }
    if cycle.xs.iter().any(|&x| x >= p.nx()) || cycle.ys.iter().any(|&y| y >= p.ny()) {
        return Err(Error::InvalidCycle("vertex out of range".into()));
    }
    let (plus, minus) = cycle.cells();
    if let Some((x, y)) = plus.iter().chain(&minus).find(|&&(x, y)| !p.in_support(x, y)) {
        return Err(Error::InvalidCycle(format!("cell ({x}, {y}) has zero mass")));
    }
    Ok(())
}

/// Binary channel alternating `+eps` and `-eps` around a support cycle;
/// `U` is exactly independent of `X` and of `Y`.
pub fn cycle_witness_channel(p: &JointPmf, cycle: &Cycle, wc: &WitnessConfig) -> Result<Channel> {
    validate_cycle(p, cycle)?;
    let (plus, minus) = cycle.cells();
    let min_mass = plus.iter().chain(&minus).map(|&(x, y)| p.get(x, y)).fold(f64::INFINITY, f64::min);
    let eps = wc.epsilon_for(min_mass)?;
    Channel::from_fn(p.nx(), p.ny(), 2, |x, y, u| {
        let d = if plus.contains(&(x, y)) {
            eps / p.get(x, y)
        } else if minus.contains(&(x, y)) {
            -eps / p.get(x, y)
        } else {
            0.0
        };
        if u == 0 {
            0.5 + d
        } else {
            0.5 - d
        }
    })
}

/// Maximum bipartite matching; `adj[l]` lists the right vertices of `l`.
/// Returns the partner of every left vertex.
pub(crate) fn hopcroft_karp(n_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n_left = adj.len();
    let mut left: Vec<Option<usize>> = vec![None; n_left];
    let mut right: Vec<Option<usize>> = vec![None; n_right];
    let mut dist = vec![usize::MAX; n_left];
    loop {
        // Layered BFS from free left vertices.
        let mut queue = VecDeque::new();
        for l in 0..n_left {
            if left[l].is_none() {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                match right[r] {
                    None => found = true,
                    Some(l2) if dist[l2] == usize::MAX => {
                        dist[l2] = dist[l] + 1;
                        queue.push_back(l2);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            return left;
        }
        fn augment(l: usize, adj: &[Vec<usize>], left: &mut [Option<usize>], right: &mut [Option<usize>], dist: &mut [usize]) -> bool {
            for &r in &adj[l] {
                let ok = match right[r] {
                    None => true,
                    Some(l2) => dist[l2] == dist[l] + 1 && augment(l2, adj, left, right, dist),
                };
                if ok {
                    left[l] = Some(r);
                    right[r] = Some(l);
                    return true;
                }
            }
            dist[l] = usize::MAX;
            false
        }
        for l in 0..n_left {
            if left[l].is_none() {
                augment(l, adj, &mut left, &mut right, &mut dist);
            }
        }
    }
}

/// Entries below this are treated as exhausted during decomposition.
const BVN_ZERO: f64 = 1e-12;

/// A doubly stochastic matrix as a convex combination of permutations:
/// `(weight, perm)` with `perm[i]` the column matched to row `i`.
pub fn birkhoff_decomposition(m: &[Vec<f64>]) -> Result<Vec<(f64, Vec<usize>)>> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("decomposition needs a square matrix".into()));
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let support = a.iter().flatten().filter(|v| **v > BVN_ZERO).count();
    let mut out = Vec::new();
    for _ in 0..=support {
        let remaining: f64 = a.iter().map(|r| r.iter().sum::<f64>()).sum::<f64>() / n as f64;
        if remaining <= BVN_ZERO * n as f64 {
            break;
        }
        let adj: Vec<Vec<usize>> = a.iter().map(|r| (0..n).filter(|&j| r[j] > BVN_ZERO).collect()).collect();
        let matching = hopcroft_karp(n, &adj);
        let perm: Vec<usize> = matching
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::ConditionNotMet("support has no perfect matching; matrix is not doubly stochastic".into()))?;
        let (imin, w) = perm.iter().enumerate().map(|(i, &j)| (i, a[i][j])).min_by(|x, y| x.1.total_cmp(&y.1)).expect("n > 0");
        for (i, &j) in perm.iter().enumerate() {
            a[i][j] = if i == imin { 0.0 } else { (a[i][j] - w).max(0.0) };
        }
        out.push((w, perm));
    }
    let total: f64 = out.iter().map(|(w, _)| w).sum();
    for (w, _) in &mut out {
        *w /= total;
    }
    Ok(out)
}

/// Channel reaching `G_PPI = H(Y|X)` under the equal-marginal condition.
///
/// Each support component is uniform on a square block; its scaled block is
/// decomposed into permutations, and the component weights are laid on a
/// common refinement of `[0, 1)` so a single output alphabet serves every
/// component while staying independent of the component label.
pub fn bvn_channel(p: &JointPmf) -> Result<Channel> {
    if !max_condition_check(p) {
        return Err(Error::ConditionNotMet("H(X) = H(Y) and p(x) = p(y) on every support cell".into()));
    }
    let lab = components(p);
    let mut blocks = Vec::new();
    for q in 0..lab.count() {
        let xs: Vec<usize> = (0..p.nx()).filter(|&x| lab.x_component[x] == Some(q)).collect();
        let ys: Vec<usize> = (0..p.ny()).filter(|&y| lab.y_component[y] == Some(q)).collect();
        if xs.len() != ys.len() {
            return Err(Error::ConditionNotMet(format!("component {q} is not square")));
        }
        let scale = xs.len() as f64 / lab.masses[q];
        let m: Vec<Vec<f64>> = xs.iter().map(|&x| ys.iter().map(|&y| p.get(x, y) * scale).collect()).collect();
        blocks.push((xs, ys, birkhoff_decomposition(&m)?));
    }
    let cond: Vec<Vec<f64>> = blocks.iter().map(|b| b.2.iter().map(|(w, _)| *w).collect()).collect();
    let r = refine(&cond, &vec![true; cond.len()]);
    let nu = r.lengths.len();
    let mut q = vec![0.0; p.nx() * p.ny() * nu];
    for (k, (xs, ys, perms)) in blocks.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                if !p.in_support(x, y) {
                    continue;
                }
                let row = &mut q[(x * p.ny() + y) * nu..(x * p.ny() + y + 1) * nu];
                for (u, len) in r.lengths.iter().enumerate() {
                    if perms[r.map[k][u]].1[i] == j {
                        row[u] = *len;
                    }
                }
                let s: f64 = row.iter().sum();
                if s <= 0.0 {
                    return Err(Error::ConditionNotMet(format!("cell ({x}, {y}) is not covered by the decomposition")));
                }
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
    }
    for x in 0..p.nx() {
        for y in 0..p.ny() {
            if !p.in_support(x, y) {
                q[(x * p.ny() + y) * nu] = 1.0;
            }
        }
    }
    Ok(Channel::new(p.nx(), p.ny(), nu, q)?.prune(p))
}

/// Residuals and achieved value of a witness channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub point: crate::region::point::MiPoint,
    /// `I(X;Y|U) - I(X;Y)`.
    pub interaction: f64,
    pub mi_x_u: f64,
    pub mi_y_u: f64,
    pub h_x_given_yu: f64,
    pub h_y_given_xu: f64,
    pub mi_x_u_given_y: f64,
}

pub fn witness_report(p: &JointPmf, c: &Channel) -> Result<WitnessReport> {
    let t = TriplePmf::new(p, c)?;
    let point = crate::region::point::MiPoint::new(t.mi_x_u(), t.mi_y_u(), t.mi_xy_u());
    Ok(WitnessReport {
        point,
        interaction: point.interaction(),
        mi_x_u: t.mi_x_u(),
        mi_y_u: t.mi_y_u(),
        h_x_given_yu: t.h_x_given_yu(),
        h_y_given_xu: t.h_y_given_xu(),
        mi_x_u_given_y: t.mi_x_u_given_y(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{find_cycle, has_path_length_3};

    fn pl() -> JointPmf {
        let t = 1.0 / 3.0;
        JointPmf::from_rows(&[vec![t, t], vec![t, 0.0]]).unwrap()
    }

    fn pind() -> JointPmf {
        JointPmf::from_rows(&[vec![0.25; 2], vec![0.25; 2]]).unwrap()
    }

    #[test]
    fn path_on_l_shape() {
        let path = has_path_length_3(&pl()).unwrap();
        let wc = WitnessConfig { epsilon: Some(1.0 / 24.0), m: 64 };
        let c = path_witness_channel(&pl(), path, &wc).unwrap();
        let r = witness_report(&pl(), &c).unwrap();
        assert!(r.mi_x_u < 1e-12);
        assert!(r.mi_x_u_given_y > 1e-6);
        let too_big = WitnessConfig { epsilon: Some(1.0 / 3.0), m: 64 };
        assert!(matches!(path_witness_channel(&pl(), path, &too_big), Err(Error::EpsilonTooLarge { .. })));
        let bad = Path3 { x1: 1, y1: 1, x2: 0, y2: 0 };
        assert!(matches!(path_witness_channel(&pl(), bad, &wc), Err(Error::InvalidPath(_))));
    }

    #[test]
    fn cycle_on_independent_bits() {
        let cyc = find_cycle(&pind()).unwrap();
        let wc = WitnessConfig { epsilon: Some(1.0 / 16.0), m: 64 };
        let c = cycle_witness_channel(&pind(), &cyc, &wc).unwrap();
        let r = witness_report(&pind(), &c).unwrap();
        assert!(r.mi_x_u < 1e-12 && r.mi_y_u < 1e-12);
        assert!(r.point.xy > 1e-6);
        let tiny = WitnessConfig { epsilon: Some(1e-6), m: 64 };
        let c = cycle_witness_channel(&pind(), &cyc, &tiny).unwrap();
        assert!(witness_report(&pind(), &c).unwrap().point.xy < 1e-9);
        let degenerate = Cycle { ys: vec![0], xs: vec![0] };
        assert!(matches!(cycle_witness_channel(&pind(), &degenerate, &wc), Err(Error::InvalidCycle(_))));
    }

    #[test]
    fn bvn_on_uniform_square() {
        let u3 = JointPmf::from_rows(&vec![vec![1.0 / 9.0; 3]; 3]).unwrap();
        let c = bvn_channel(&u3).unwrap();
        assert_eq!(c.u_size(), 3);
        let r = witness_report(&u3, &c).unwrap();
        assert!((r.interaction - 3f64.log2()).abs() < 1e-9);
        assert!(r.mi_x_u < 1e-9 && r.mi_y_u < 1e-9 && r.h_x_given_yu < 1e-9 && r.h_y_given_xu < 1e-9);
        assert!(matches!(bvn_channel(&pl()), Err(Error::ConditionNotMet(_))));
    }

    #[test]
    fn bvn_with_uneven_components() {
        // A 2x2 uniform block of mass 0.6 and a single cell of mass 0.4.
        let p = JointPmf::from_rows(&[vec![0.15, 0.15, 0.0], vec![0.15, 0.15, 0.0], vec![0.0, 0.0, 0.4]]).unwrap();
        let c = bvn_channel(&p).unwrap();
        let r = witness_report(&p, &c).unwrap();
        assert!(r.mi_x_u < 1e-12 && r.mi_y_u < 1e-12);
        assert!((r.interaction - p.h_y_given_x()).abs() < 1e-9, "{r:?}");
    }
}
