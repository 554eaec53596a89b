//! Channels `p(u|x,y)` and the triple distributions they induce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{entropy, JointPmf};

/// Row sums of a channel must be within this distance of 1.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// Output symbols whose total mass is at or below this are dropped by [`Channel::prune`].
pub const PRUNE_THRESHOLD: f64 = 1e-13;

/// A conditional pmf `p(u|x,y)`, one row per source cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ChannelFile", try_from = "ChannelFile")]
pub struct Channel {
    nx: usize,
    ny: usize,
    nu: usize,
    q: Vec<f64>,
}

/// Nested `q[x][y][u]` layout used for JSON export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub x_size: usize,
    pub y_size: usize,
    pub u_size: usize,
    pub q: Vec<Vec<Vec<f64>>>,
}

impl From<Channel> for ChannelFile {
    fn from(c: Channel) -> Self {
        let q = (0..c.nx)
            .map(|x| (0..c.ny).map(|y| c.row(x, y).to_vec()).collect())
            .collect();
        ChannelFile { x_size: c.nx, y_size: c.ny, u_size: c.nu, q }
    }
}

impl TryFrom<ChannelFile> for Channel {
    type Error = Error;

    fn try_from(f: ChannelFile) -> Result<Self> {
        if f.q.len() != f.x_size {
            return Err(Error::InvalidChannel(format!("expected {} x rows", f.x_size)));
        }
        let mut q = Vec::with_capacity(f.x_size * f.y_size * f.u_size);
        for row in &f.q {
            if row.len() != f.y_size {
                return Err(Error::InvalidChannel(format!("expected {} y rows", f.y_size)));
            }
            for cell in row {
                if cell.len() != f.u_size {
                    return Err(Error::InvalidChannel(format!("expected {} u entries", f.u_size)));
                }
                q.extend_from_slice(cell);
            }
        }
        Channel::new(f.x_size, f.y_size, f.u_size, q)
    }
}

impl Channel {
    /// Validates a flat `q[(x * ny + y) * nu + u]` array.
    pub fn new(nx: usize, ny: usize, nu: usize, mut q: Vec<f64>) -> Result<Self> {
        if nu == 0 {
            return Err(Error::InvalidChannel("output alphabet is empty".into()));
        }
        if q.len() != nx * ny * nu {
            return Err(Error::InvalidChannel(format!(
                "expected {} entries, found {}",
                nx * ny * nu,
                q.len()
            )));
        }
        for (cell, row) in q.chunks_mut(nu).enumerate() {
            let mut sum = 0.0;
            for v in row.iter_mut() {
                if !v.is_finite() || *v < -1e-15 {
                    return Err(Error::InvalidChannel(format!("row {cell} has entry {v}")));
                }
                *v = v.max(0.0);
                sum += *v;
            }
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidChannel(format!("row {cell} sums to {sum}")));
            }
            row.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(Self { nx, ny, nu, q })
    }

    /// Builds a channel from a function of `(x, y, u)`.
    pub fn from_fn(nx: usize, ny: usize, nu: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut q = Vec::with_capacity(nx * ny * nu);
        for x in 0..nx {
            for y in 0..ny {
                for u in 0..nu {
                    q.push(f(x, y, u));
                }
            }
        }
        Self::new(nx, ny, nu, q)
    }

    /// `U = f(X, Y)`.
    pub fn deterministic(nx: usize, ny: usize, nu: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        let mut q = vec![0.0; nx * ny * nu];
        for x in 0..nx {
            for y in 0..ny {
                let u = f(x, y);
                assert!(u < nu, "deterministic map leaves the output alphabet");
                q[(x * ny + y) * nu + u] = 1.0;
            }
        }
        Self { nx, ny, nu, q }
    }

    /// `U` constant.
    pub fn constant(nx: usize, ny: usize) -> Self {
        Self::deterministic(nx, ny, 1, |_, _| 0)
    }

    /// `U = X`.
    pub fn reveal_x(nx: usize, ny: usize) -> Self {
        Self::deterministic(nx, ny, nx, |x, _| x)
    }

    /// `U = Y`.
    pub fn reveal_y(nx: usize, ny: usize) -> Self {
        Self::deterministic(nx, ny, ny, |_, y| y)
    }

    /// `U = (X, Y)`.
    pub fn reveal_xy(nx: usize, ny: usize) -> Self {
        Self::deterministic(nx, ny, nx * ny, |x, y| x * ny + y)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn u_size(&self) -> usize {
        self.nu
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, u: usize) -> f64 {
        self.q[(x * self.ny + y) * self.nu + u]
    }

    pub fn row(&self, x: usize, y: usize) -> &[f64] {
        let start = (x * self.ny + y) * self.nu;
        &self.q[start..start + self.nu]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    /// Checks that the channel acts on the alphabets of `p`.
    pub fn check_shape(&self, p: &JointPmf) -> Result<()> {
        if self.nx != p.nx() || self.ny != p.ny() {
            return Err(Error::DimensionMismatch(format!(
                "channel is {}x{} but pmf is {}x{}",
                self.nx,
                self.ny,
                p.nx(),
                p.ny()
            )));
        }
        Ok(())
    }

    /// True when `u_size <= |X||Y| + 2`.
    pub fn within_cardinality_bound(&self) -> bool {
        self.nu <= self.nx * self.ny + 2
    }

    /// Time sharing: with probability `1 - lambda` use `c0`, otherwise `c1`.
    ///
    /// The output is `(T, U_T)`, so the MI triple is the convex combination
    /// of the two triples.
    pub fn mixture(c0: &Channel, c1: &Channel, lambda: f64) -> Result<Channel> {
        if c0.nx != c1.nx || c0.ny != c1.ny {
            return Err(Error::DimensionMismatch("mixture of channels on different alphabets".into()));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!("mixing weight {lambda} outside [0, 1]")));
        }
        let nu = c0.nu + c1.nu;
        let mut q = Vec::with_capacity(c0.nx * c0.ny * nu);
        for x in 0..c0.nx {
            for y in 0..c0.ny {
                q.extend(c0.row(x, y).iter().map(|v| v * (1.0 - lambda)));
                q.extend(c1.row(x, y).iter().map(|v| v * lambda));
            }
        }
        Ok(Channel { nx: c0.nx, ny: c0.ny, nu, q })
    }

    /// Weighted mixture of several channels with weights summing to one.
    pub fn mixture_many(parts: &[(f64, &Channel)]) -> Result<Channel> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?
            .1;
        let nu: usize = parts.iter().map(|(_, c)| c.nu).sum();
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        let mut q = Vec::with_capacity(first.nx * first.ny * nu);
        for x in 0..first.nx {
            for y in 0..first.ny {
                for (w, c) in parts {
                    if c.nx != first.nx || c.ny != first.ny {
                        return Err(Error::DimensionMismatch("mixture of channels on different alphabets".into()));
                    }
                    q.extend(c.row(x, y).iter().map(|v| v * w.max(0.0) / total));
                }
            }
        }
        Channel::new(first.nx, first.ny, nu, q)
    }

    /// Product channel acting on the product source built by
    /// [`crate::prob::product_joint`]; `U = (U1, U2)`.
    pub fn product(c1: &Channel, c2: &Channel) -> Channel {
        let nx = c1.nx * c2.nx;
        let ny = c1.ny * c2.ny;
        let nu = c1.nu * c2.nu;
        let mut q = vec![0.0; nx * ny * nu];
        for x1 in 0..c1.nx {
            for x2 in 0..c2.nx {
                for y1 in 0..c1.ny {
                    for y2 in 0..c2.ny {
                        let x = x1 * c2.nx + x2;
                        let y = y1 * c2.ny + y2;
                        let base = (x * ny + y) * nu;
                        for (u1, a) in c1.row(x1, y1).iter().enumerate() {
                            for (u2, b) in c2.row(x2, y2).iter().enumerate() {
                                q[base + u1 * c2.nu + u2] = a * b;
                            }
                        }
                    }
                }
            }
        }
        Channel { nx, ny, nu, q }
    }

    /// Drops output symbols of negligible mass under `p`.
    pub fn prune(&self, p: &JointPmf) -> Channel {
        let mut pu = vec![0.0; self.nu];
        for x in 0..self.nx {
            for y in 0..self.ny {
                let w = p.get(x, y);
                for (u, v) in self.row(x, y).iter().enumerate() {
                    pu[u] += w * v;
                }
            }
        }
        let keep: Vec<usize> = (0..self.nu).filter(|&u| pu[u] > PRUNE_THRESHOLD).collect();
        if keep.len() == self.nu {
            return self.clone();
        }
        let keep = if keep.is_empty() { vec![0] } else { keep };
        let nu = keep.len();
        let mut q = Vec::with_capacity(self.nx * self.ny * nu);
        for x in 0..self.nx {
            for y in 0..self.ny {
                let row = self.row(x, y);
                let kept: Vec<f64> = keep.iter().map(|&u| row[u]).collect();
                let s: f64 = kept.iter().sum();
                if s > 0.0 {
                    q.extend(kept.iter().map(|v| v / s));
                } else {
                    q.push(1.0);
                    q.extend(std::iter::repeat_n(0.0, nu - 1));
                }
            }
        }
        Channel { nx: self.nx, ny: self.ny, nu, q }
    }

    /// True when every row is a point mass up to `tol`.
    pub fn is_deterministic(&self, tol: f64) -> bool {
        self.q
            .chunks(self.nu)
            .all(|row| row.iter().all(|&v| v <= tol || v >= 1.0 - tol))
    }
}

/// `p(x, y, u) = p(x, y) p(u|x, y)` together with its entropies.
#[derive(Debug, Clone)]
pub struct TriplePmf {
    nx: usize,
    ny: usize,
    nu: usize,
    p: Vec<f64>,
    pub hx: f64,
    pub hy: f64,
    pub hu: f64,
    pub hxy: f64,
    pub hxu: f64,
    pub hyu: f64,
    pub hxyu: f64,
}

impl TriplePmf {
    pub fn new(p: &JointPmf, c: &Channel) -> Result<Self> {
        c.check_shape(p)?;
        let (nx, ny, nu) = (p.nx(), p.ny(), c.u_size());
        let mut t = vec![0.0; nx * ny * nu];
        for x in 0..nx {
            for y in 0..ny {
                let w = p.get(x, y);
                let base = (x * ny + y) * nu;
                for (u, v) in c.row(x, y).iter().enumerate() {
                    t[base + u] = w * v;
                }
            }
        }
        Ok(Self::from_masses(nx, ny, nu, t))
    }

    /// Builds from a flat `p[(x * ny + y) * nu + u]` mass array.
    pub fn from_masses(nx: usize, ny: usize, nu: usize, p: Vec<f64>) -> Self {
        let mut px = vec![0.0; nx];
        let mut py = vec![0.0; ny];
        let mut pu = vec![0.0; nu];
        let mut pxy = vec![0.0; nx * ny];
        let mut pxu = vec![0.0; nx * nu];
        let mut pyu = vec![0.0; ny * nu];
        for x in 0..nx {
            for y in 0..ny {
                for u in 0..nu {
                    let m = p[(x * ny + y) * nu + u];
                    px[x] += m;
                    py[y] += m;
                    pu[u] += m;
                    pxy[x * ny + y] += m;
                    pxu[x * nu + u] += m;
                    pyu[y * nu + u] += m;
                }
            }
        }
        Self {
            nx,
            ny,
            nu,
            hx: entropy(px),
            hy: entropy(py),
            hu: entropy(pu),
            hxy: entropy(pxy),
            hxu: entropy(pxu),
            hyu: entropy(pyu),
            hxyu: entropy(p.iter().copied()),
            p,
        }
    }

    pub fn get(&self, x: usize, y: usize, u: usize) -> f64 {
        self.p[(x * self.ny + y) * self.nu + u]
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nu)
    }

    pub fn mi_x_u(&self) -> f64 {
        self.hx + self.hu - self.hxu
    }

    pub fn mi_y_u(&self) -> f64 {
        self.hy + self.hu - self.hyu
    }

    pub fn mi_xy_u(&self) -> f64 {
        self.hxy + self.hu - self.hxyu
    }

    /// `I(Y;U|X)`.
    pub fn mi_y_u_given_x(&self) -> f64 {
        self.hxy + self.hxu - self.hxyu - self.hx
    }

    /// `I(X;Y|U)`.
    pub fn mi_x_y_given_u(&self) -> f64 {
        self.hxu + self.hyu - self.hxyu - self.hu
    }

    pub fn h_x_given_yu(&self) -> f64 {
        self.hxyu - self.hyu
    }

    pub fn h_y_given_xu(&self) -> f64 {
        self.hxyu - self.hxu
    }

    pub fn h_u_given_x(&self) -> f64 {
        self.hxu - self.hx
    }

    pub fn h_u_given_y(&self) -> f64 {
        self.hyu - self.hy
    }

    /// `I(X;U|Y)`, zero exactly when `X - Y - U`.
    pub fn mi_x_u_given_y(&self) -> f64 {
        self.hxy + self.hyu - self.hxyu - self.hy
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pind() -> JointPmf {
        JointPmf::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap()
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(Channel::new(1, 1, 2, vec![0.5, 0.4]).is_err());
        assert!(Channel::new(1, 1, 2, vec![1.5, -0.5]).is_err());
        assert!(Channel::new(1, 1, 2, vec![0.5]).is_err());
        assert!(Channel::new(1, 1, 0, vec![]).is_err());
    }

    #[test]
    fn xor_channel_entropies() {
        let p = pind();
        let c = Channel::deterministic(2, 2, 2, |x, y| x ^ y);
        let t = TriplePmf::new(&p, &c).unwrap();
        assert_abs_diff_eq!(t.mi_x_u(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.mi_y_u(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.mi_xy_u(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.mi_x_y_given_u(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let c = Channel::new(1, 2, 3, vec![0.1, 0.2, 0.7, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: Channel = serde_json::from_str(&text).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn prune_drops_unused_symbols() {
        let p = pind();
        let c = Channel::deterministic(2, 2, 5, |x, _| 3 * x);
        let pruned = c.prune(&p);
        assert_eq!(pruned.u_size(), 2);
        let a = TriplePmf::new(&p, &c).unwrap();
        let b = TriplePmf::new(&p, &pruned).unwrap();
        assert_abs_diff_eq!(a.mi_xy_u(), b.mi_xy_u(), epsilon = 1e-15);
    }
}
