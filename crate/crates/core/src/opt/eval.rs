//! MI triple and its gradient for channels stored as rows of a product of
//! simplices. A row is a source cell, an `x` or a `y` depending on the
//! parameterization.

use crate::channel::Channel;
use crate::prob::{neg_plogp, Entropies, JointPmf};
use crate::region::point::MiPoint;

/// Floor used inside logarithms of the gradient.
const LOG_FLOOR: f64 = 1e-300;
/// Lower clamp on pointwise information densities, in bits.
const DENSITY_CLAMP: f64 = -60.0;

/// Which variables the channel may depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Param {
    /// `p(u|x,y)`, one row per support cell.
    Full,
    /// `p(u|x)`, enforcing `U - X - Y`.
    ByX,
    /// `p(u|y)`, enforcing `X - Y - U`.
    ByY,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Cell {
    pub x: usize,
    pub y: usize,
    pub p: f64,
    pub row: usize,
}

/// Fixed data of an optimization problem on a given source.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub nx: usize,
    pub ny: usize,
    pub param: Param,
    pub cells: Vec<Cell>,
    pub row_weight: Vec<f64>,
    /// Source cell or symbol behind each row, for building channels.
    pub row_key: Vec<(usize, usize)>,
    pub px: Vec<f64>,
    pub py: Vec<f64>,
    pub e: Entropies,
}

/// Scratch buffers reused across evaluations.
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    pub pu: Vec<f64>,
    pub pxu: Vec<f64>,
    pub pyu: Vec<f64>,
}

impl Workspace {
    pub fn new(prob: &Problem, nu: usize) -> Self {
        Self { pu: vec![0.0; nu], pxu: vec![0.0; prob.nx * nu], pyu: vec![0.0; prob.ny * nu] }
    }
}

impl Problem {
    pub fn new(p: &JointPmf, param: Param) -> Self {
        let px = p.px();
        let py = p.py();
        let mut cells = Vec::new();
        let mut row_weight = Vec::new();
        let mut row_key = Vec::new();
        let support = p.support();
        match param {
            Param::Full => {
                for (x, y) in support {
                    cells.push(Cell { x, y, p: p.get(x, y), row: row_weight.len() });
                    row_weight.push(p.get(x, y));
                    row_key.push((x, y));
                }
            }
            Param::ByX => {
                let mut row_of = vec![usize::MAX; p.nx()];
                for x in 0..p.nx() {
                    if px[x] > 0.0 {
                        row_of[x] = row_weight.len();
                        row_weight.push(px[x]);
                        row_key.push((x, 0));
                    }
                }
                for (x, y) in support {
                    cells.push(Cell { x, y, p: p.get(x, y), row: row_of[x] });
                }
            }
            Param::ByY => {
                let mut row_of = vec![usize::MAX; p.ny()];
                for y in 0..p.ny() {
                    if py[y] > 0.0 {
                        row_of[y] = row_weight.len();
                        row_weight.push(py[y]);
                        row_key.push((0, y));
                    }
                }
                for (x, y) in support {
                    cells.push(Cell { x, y, p: p.get(x, y), row: row_of[y] });
                }
            }
        }
        Self { nx: p.nx(), ny: p.ny(), param, cells, row_weight, row_key, px, py, e: p.entropies() }
    }

    pub fn rows(&self) -> usize {
        self.row_weight.len()
    }

    /// Fills the marginals and returns the MI triple.
    pub fn point(&self, q: &[f64], nu: usize, ws: &mut Workspace) -> MiPoint {
        ws.pu.iter_mut().for_each(|v| *v = 0.0);
        ws.pxu.iter_mut().for_each(|v| *v = 0.0);
        ws.pyu.iter_mut().for_each(|v| *v = 0.0);
        let mut hxyu = 0.0;
        for c in &self.cells {
            let row = &q[c.row * nu..(c.row + 1) * nu];
            let xo = c.x * nu;
            let yo = c.y * nu;
            for (u, &qu) in row.iter().enumerate() {
                let m = c.p * qu;
                ws.pu[u] += m;
                ws.pxu[xo + u] += m;
                ws.pyu[yo + u] += m;
                hxyu += neg_plogp(m);
            }
        }
        let hu: f64 = ws.pu.iter().map(|&v| neg_plogp(v)).sum();
        let hxu: f64 = ws.pxu.iter().map(|&v| neg_plogp(v)).sum();
        let hyu: f64 = ws.pyu.iter().map(|&v| neg_plogp(v)).sum();
        MiPoint::new(self.e.hx + hu - hxu, self.e.hy + hu - hyu, self.e.hxy + hu - hxyu)
    }

    /// Gradient of `coef . v` with respect to the rows; requires the
    /// marginals from a preceding call to [`Problem::point`] on the same `q`.
    pub fn gradient(&self, q: &[f64], nu: usize, ws: &Workspace, coef: [f64; 3], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for c in &self.cells {
            let row = &q[c.row * nu..(c.row + 1) * nu];
            let g = &mut out[c.row * nu..(c.row + 1) * nu];
            let lpx = self.px[c.x].log2();
            let lpy = self.py[c.y].log2();
            let lp = c.p.log2();
            for u in 0..nu {
                let lpu = ws.pu[u].max(LOG_FLOOR).log2();
                let mut d = 0.0;
                if coef[0] != 0.0 {
                    let dx = (ws.pxu[c.x * nu + u].max(LOG_FLOOR).log2() - lpx - lpu).max(DENSITY_CLAMP);
                    d += coef[0] * dx;
                }
                if coef[1] != 0.0 {
                    let dy = (ws.pyu[c.y * nu + u].max(LOG_FLOOR).log2() - lpy - lpu).max(DENSITY_CLAMP);
                    d += coef[1] * dy;
                }
                if coef[2] != 0.0 {
                    let dxy = ((c.p * row[u]).max(LOG_FLOOR).log2() - lp - lpu).max(DENSITY_CLAMP);
                    d += coef[2] * dxy;
                }
                g[u] += c.p * d;
            }
        }
    }

    /// Expands rows into a channel on the full source alphabet.
    pub fn to_channel(&self, q: &[f64], nu: usize) -> Channel {
        let mut full = vec![0.0; self.nx * self.ny * nu];
        let mut set = vec![false; self.nx * self.ny];
        let mut put = |x: usize, y: usize, row: &[f64]| {
            full[(x * self.ny + y) * nu..(x * self.ny + y + 1) * nu].copy_from_slice(row);
            set[x * self.ny + y] = true;
        };
        for (r, &(a, b)) in self.row_key.iter().enumerate() {
            let row = &q[r * nu..(r + 1) * nu];
            match self.param {
                Param::Full => put(a, b, row),
                Param::ByX => (0..self.ny).for_each(|y| put(a, y, row)),
                Param::ByY => (0..self.nx).for_each(|x| put(x, b, row)),
            }
        }
        for (i, done) in set.iter().enumerate() {
            if !done {
                full[i * nu] = 1.0;
            }
        }
        Channel::new(self.nx, self.ny, nu, full).expect("rows are on the simplex")
    }

    /// Reads a channel into rows, if it is compatible with the parameterization.
    pub fn from_channel(&self, c: &Channel) -> Option<Vec<f64>> {
        let nu = c.u_size();
        let mut q = Vec::with_capacity(self.rows() * nu);
        for &(a, b) in &self.row_key {
            match self.param {
                Param::Full => q.extend_from_slice(c.row(a, b)),
                Param::ByX | Param::ByY => {
                    // Weighted conditional p(u|x) or p(u|y) over support cells.
                    let mut acc = vec![0.0; nu];
                    let mut w = 0.0;
                    for cell in &self.cells {
                        let hit = match self.param {
                            Param::ByX => cell.x == a,
                            _ => cell.y == b,
                        };
                        if hit {
                            w += cell.p;
                            for (u, v) in c.row(cell.x, cell.y).iter().enumerate() {
                                acc[u] += cell.p * v;
                            }
                        }
                    }
                    if w <= 0.0 {
                        return None;
                    }
                    q.extend(acc.iter().map(|v| v / w));
                }
            }
        }
        Some(q)
    }
}

/// Euclidean projection of `v` onto the probability simplex, in place.
pub(crate) fn project_simplex(v: &mut [f64], scratch: &mut Vec<f64>) {
    scratch.clear();
    scratch.extend_from_slice(v);
    scratch.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in scratch.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::point::mi_point;

    fn pmf() -> JointPmf {
        JointPmf::from_rows(&[vec![0.3, 0.1, 0.05], vec![0.05, 0.2, 0.3]]).unwrap()
    }

    #[test]
    fn point_matches_direct_evaluation() {
        let p = pmf();
        for param in [Param::Full, Param::ByX, Param::ByY] {
            let prob = Problem::new(&p, param);
            let nu = 3;
            let q: Vec<f64> = (0..prob.rows() * nu)
                .map(|i| [0.2, 0.5, 0.3][i % 3])
                .collect();
            let mut ws = Workspace::new(&prob, nu);
            let v = prob.point(&q, nu, &mut ws);
            let c = prob.to_channel(&q, nu);
            let w = mi_point(&p, &c).unwrap();
            assert!(v.dist_inf(w) < 1e-12);
            let back = prob.from_channel(&c).unwrap();
            assert!(back.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = pmf();
        let prob = Problem::new(&p, Param::Full);
        let nu = 3;
        let q0: Vec<f64> = (0..prob.rows() * nu)
            .map(|i| 0.1 + 0.8 * ((i * 7 % 5) as f64) / 5.0)
            .collect();
        let mut q = q0.clone();
        for r in q.chunks_mut(nu) {
            let s: f64 = r.iter().sum();
            r.iter_mut().for_each(|v| *v /= s);
        }
        let coef = [0.7, -1.3, 0.4];
        let mut ws = Workspace::new(&prob, nu);
        prob.point(&q, nu, &mut ws);
        let mut g = vec![0.0; q.len()];
        prob.gradient(&q, nu, &ws, coef, &mut g);
        // Directional derivative along a zero-sum direction within row 0.
        let h = 1e-6;
        let mut qp = q.clone();
        let mut qm = q.clone();
        qp[0] += h;
        qp[1] -= h;
        qm[0] -= h;
        qm[1] += h;
        let fp = prob.point(&qp, nu, &mut ws).dot(coef);
        let fm = prob.point(&qm, nu, &mut ws).dot(coef);
        let fd = (fp - fm) / (2.0 * h);
        assert!((fd - (g[0] - g[1])).abs() < 1e-6, "{fd} vs {}", g[0] - g[1]);
    }

    #[test]
    fn simplex_projection() {
        let mut s = Vec::new();
        let mut v = vec![0.5, 0.8, -0.2];
        project_simplex(&mut v, &mut s);
        assert!((v[0] - 0.35).abs() < 1e-12 && (v[1] - 0.65).abs() < 1e-12 && v[2] == 0.0);
    }
}
