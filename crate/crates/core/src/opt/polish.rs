//! Post-processing that pushes a near-feasible channel onto the constraint
//! set exactly where a cheap projection exists.

use crate::channel::Channel;
use crate::lp::{Cmp, Lp, LpOutcome};
use crate::prob::JointPmf;

/// Nearest channel in l1 (over the joint masses) with `U` independent of
/// `X` and/or `Y`, found by linear programming. Exact up to the LP
/// tolerance, including solutions on the boundary where IPF crawls.
pub(crate) fn lp_independence(p: &JointPmf, c: &Channel, indep_x: bool, indep_y: bool) -> Option<Channel> {
    let (nx, ny, nu) = (p.nx(), p.ny(), c.u_size());
    let cells = p.support();
    let k = cells.len();
    let nm = k * nu;
    // Variables: m (nm), t (nm), r (nu).
    let nvar = 2 * nm + nu;
    let mut obj = vec![0.0; nvar];
    obj[nm..2 * nm].iter_mut().for_each(|v| *v = 1.0);
    let mut bounds = vec![(0.0, f64::INFINITY); nvar];
    for (i, &(x, y)) in cells.iter().enumerate() {
        for u in 0..nu {
            bounds[i * nu + u] = (0.0, p.get(x, y));
        }
    }
    let mut lp = Lp::new(obj, bounds);
    let px = p.px();
    let py = p.py();
    for (i, &(x, y)) in cells.iter().enumerate() {
        let mut row = vec![0.0; nvar];
        for u in 0..nu {
            row[i * nu + u] = 1.0;
        }
        lp.row(row, Cmp::Eq, p.get(x, y));
        for u in 0..nu {
            let m0 = p.get(x, y) * c.get(x, y, u);
            let mut a = vec![0.0; nvar];
            a[i * nu + u] = 1.0;
            a[nm + i * nu + u] = -1.0;
            lp.row(a, Cmp::Le, m0);
            let mut b = vec![0.0; nvar];
            b[i * nu + u] = 1.0;
            b[nm + i * nu + u] = 1.0;
            lp.row(b, Cmp::Ge, m0);
        }
    }
    let mut rsum = vec![0.0; nvar];
    rsum[2 * nm..].iter_mut().for_each(|v| *v = 1.0);
    lp.row(rsum, Cmp::Eq, 1.0);
    let mut margin = |sym: usize, mass: f64, on_x: bool| {
        for u in 0..nu {
            let mut a = vec![0.0; nvar];
            for (i, &(x, y)) in cells.iter().enumerate() {
                if (on_x && x == sym) || (!on_x && y == sym) {
                    a[i * nu + u] = 1.0;
                }
            }
            a[2 * nm + u] = -mass;
            lp.row(a, Cmp::Eq, 0.0);
        }
    };
    if indep_x {
        (0..nx).for_each(|x| margin(x, px[x], true));
    }
    if indep_y {
        (0..ny).for_each(|y| margin(y, py[y], false));
    }
    let LpOutcome::Optimal { x: sol, .. } = lp.minimize().ok()? else {
        return None;
    };
    let mut m = vec![0.0; nx * ny * nu];
    for (i, &(x, y)) in cells.iter().enumerate() {
        for u in 0..nu {
            m[(x * ny + y) * nu + u] = sol[i * nu + u].max(0.0);
        }
    }
    renormalize_cells(p, &mut m, nu);
    Some(cells_to_channel(p, c, &m, nu))
}

/// Iterative proportional fitting towards `p(x,u) = p(x) p(u)` and/or
/// `p(y,u) = p(y) p(u)` with `p(x,y)` held fixed.
pub(crate) fn ipf_independence(p: &JointPmf, c: &Channel, indep_x: bool, indep_y: bool, max_iter: usize) -> Channel {
    let (nx, ny, nu) = (p.nx(), p.ny(), c.u_size());
    let px = p.px();
    let py = p.py();
    let mut m: Vec<f64> = Vec::with_capacity(nx * ny * nu);
    // A whisper of uniform mass keeps the fit in the interior, where IPF
    // converges linearly.
    let smooth = 1e-9 / nu as f64;
    for x in 0..nx {
        for y in 0..ny {
            let w = p.get(x, y);
            m.extend(c.row(x, y).iter().map(|v| (v * (1.0 - 1e-9) + smooth) * w));
        }
    }
    let mut pxu = vec![0.0; nx * nu];
    let mut pyu = vec![0.0; ny * nu];
    let mut pu = vec![0.0; nu];
    let marginals = |m: &[f64], pxu: &mut [f64], pyu: &mut [f64], pu: &mut [f64]| {
        pxu.iter_mut().for_each(|v| *v = 0.0);
        pyu.iter_mut().for_each(|v| *v = 0.0);
        pu.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..nx {
            for y in 0..ny {
                for u in 0..nu {
                    let v = m[(x * ny + y) * nu + u];
                    pxu[x * nu + u] += v;
                    pyu[y * nu + u] += v;
                    pu[u] += v;
                }
            }
        }
    };
    for _ in 0..max_iter {
        marginals(&m, &mut pxu, &mut pyu, &mut pu);
        let mut dev: f64 = 0.0;
        for x in 0..nx {
            for u in 0..nu {
                if indep_x {
                    dev = dev.max((pxu[x * nu + u] - px[x] * pu[u]).abs());
                }
            }
        }
        for y in 0..ny {
            for u in 0..nu {
                if indep_y {
                    dev = dev.max((pyu[y * nu + u] - py[y] * pu[u]).abs());
                }
            }
        }
        if dev < 1e-17 {
            break;
        }
        let r = pu.clone();
        if indep_x {
            for x in 0..nx {
                for u in 0..nu {
                    let cur = pxu[x * nu + u];
                    if cur > 0.0 {
                        let s = px[x] * r[u] / cur;
                        for y in 0..ny {
                            m[(x * ny + y) * nu + u] *= s;
                        }
                    }
                }
            }
        }
        if indep_y {
            marginals(&m, &mut pxu, &mut pyu, &mut pu);
            for y in 0..ny {
                for u in 0..nu {
                    let cur = pyu[y * nu + u];
                    if cur > 0.0 {
                        let s = py[y] * r[u] / cur;
                        for x in 0..nx {
                            m[(x * ny + y) * nu + u] *= s;
                        }
                    }
                }
            }
        }
        renormalize_cells(p, &mut m, nu);
    }
    cells_to_channel(p, c, &m, nu)
}

/// Zeroes the non-dominant `x` in each `(y, u)` slice (for `H(X|Y,U) = 0`)
/// and/or the non-dominant `y` in each `(x, u)` slice.
pub(crate) fn snap_recoverable(p: &JointPmf, c: &Channel, recover_x: bool, recover_y: bool) -> Channel {
    let (nx, ny, nu) = (p.nx(), p.ny(), c.u_size());
    let mut m: Vec<f64> = Vec::with_capacity(nx * ny * nu);
    for x in 0..nx {
        for y in 0..ny {
            let w = p.get(x, y);
            m.extend(c.row(x, y).iter().map(|v| v * w));
        }
    }
    if recover_x {
        for y in 0..ny {
            for u in 0..nu {
                let best = (0..nx)
                    .max_by(|&a, &b| m[(a * ny + y) * nu + u].total_cmp(&m[(b * ny + y) * nu + u]))
                    .unwrap_or(0);
                for x in (0..nx).filter(|&x| x != best) {
                    m[(x * ny + y) * nu + u] = 0.0;
                }
            }
        }
    }
    if recover_y {
        for x in 0..nx {
            for u in 0..nu {
                let best = (0..ny)
                    .max_by(|&a, &b| m[(x * ny + a) * nu + u].total_cmp(&m[(x * ny + b) * nu + u]))
                    .unwrap_or(0);
                for y in (0..ny).filter(|&y| y != best) {
                    m[(x * ny + y) * nu + u] = 0.0;
                }
            }
        }
    }
    renormalize_cells(p, &mut m, nu);
    cells_to_channel(p, c, &m, nu)
}

fn renormalize_cells(p: &JointPmf, m: &mut [f64], nu: usize) {
    for (i, row) in m.chunks_mut(nu).enumerate() {
        let target = p.as_slice()[i];
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|v| *v *= target / s);
        }
    }
}

fn cells_to_channel(p: &JointPmf, original: &Channel, m: &[f64], nu: usize) -> Channel {
    let mut q = Vec::with_capacity(m.len());
    for (i, row) in m.chunks(nu).enumerate() {
        let s: f64 = row.iter().sum();
        if p.as_slice()[i] > 0.0 && s > 0.0 {
            q.extend(row.iter().map(|v| v / s));
        } else {
            let (x, y) = (i / p.ny(), i % p.ny());
            q.extend_from_slice(original.row(x, y));
        }
    }
    Channel::new(p.nx(), p.ny(), nu, q).expect("renormalized rows")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::point::mi_point;

    #[test]
    fn ipf_reaches_exact_independence() {
        let p = JointPmf::from_rows(&[vec![0.25; 2], vec![0.25; 2]]).unwrap();
        // Slightly perturbed XOR channel.
        let c = Channel::new(2, 2, 2, vec![0.99, 0.01, 0.02, 0.98, 0.01, 0.99, 0.97, 0.03]).unwrap();
        let before = mi_point(&p, &c).unwrap();
        assert!(before.x > 1e-6);
        let d = ipf_independence(&p, &c, true, true, 5000);
        let v = mi_point(&p, &d).unwrap();
        assert!(v.x.abs() < 1e-12 && v.y.abs() < 1e-12, "{v:?}");
        assert!(v.xy > 0.7);
        let c = Channel::new(2, 2, 2, vec![0.99, 0.01, 0.02, 0.98, 0.0, 1.0, 0.97, 0.03]).unwrap();
        let v = mi_point(&p, &lp_independence(&p, &c, true, true).unwrap()).unwrap();
        assert!(v.x.abs() < 1e-12 && v.y.abs() < 1e-12, "{v:?}");
    }
}
