//! Joint pmfs of a pair `(X, Y)` and the entropy functionals on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest allowed deviation of the total mass from 1 before rejecting input.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Entries at or below this mass are treated as outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// Default cap on each axis of product alphabets built by [`product_joint`].
pub const PRODUCT_ALPHABET_CAP: usize = 64;

/// `-t log2 t` with the convention `0 log 0 = 0`.
#[inline]
pub fn neg_plogp(t: f64) -> f64 {
    if t > 0.0 {
        -t * t.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits of a (not necessarily normalized) mass vector.
pub fn entropy<I: IntoIterator<Item = f64>>(masses: I) -> f64 {
    masses.into_iter().map(neg_plogp).sum()
}

/// Binary entropy function.
pub fn binary_entropy(p: f64) -> f64 {
    neg_plogp(p) + neg_plogp(1.0 - p)
}

/// On-disk form of a joint pmf.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PmfFile {
    pub x_alphabet: Vec<String>,
    pub y_alphabet: Vec<String>,
    pub pmf: Vec<Vec<f64>>,
}

/// A validated joint pmf `p(x, y)` stored row-major (`x` indexes rows).
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    nx: usize,
    ny: usize,
    p: Vec<f64>,
    mass_deviation: f64,
}

impl JointPmf {
    /// Validates a matrix and attaches default labels `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        let xl = (0..nx).map(|i| format!("x{i}")).collect();
        let yl = (0..ny).map(|j| format!("y{j}")).collect();
        Self::with_labels(rows, xl, yl)
    }

    /// Validates a matrix with explicit alphabet labels.
    ///
    /// The matrix must be rectangular, finite, nonnegative and sum to one
    /// within [`MASS_TOLERANCE`]. The stored pmf is renormalized exactly.
    pub fn with_labels(rows: &[Vec<f64>], x_labels: Vec<String>, y_labels: Vec<String>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let nx = rows.len();
        let ny = rows[0].len();
        let mut p = Vec::with_capacity(nx * ny);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != ny {
                return Err(Error::NotRectangular { row: x, expected: ny, found: row.len() });
            }
            for (y, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { x, y });
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry { x, y, value: v });
                }
                p.push(v);
            }
        }
        if x_labels.len() != nx {
            return Err(Error::LabelCount { axis: "x", expected: nx, found: x_labels.len() });
        }
        if y_labels.len() != ny {
            return Err(Error::LabelCount { axis: "y", expected: ny, found: y_labels.len() });
        }
        let total: f64 = p.iter().sum();
        let mass_deviation = (total - 1.0).abs();
        if mass_deviation > MASS_TOLERANCE {
            return Err(Error::MassDeviationTooLarge { deviation: mass_deviation });
        }
        for v in &mut p {
            *v /= total;
        }
        Ok(Self { x_labels, y_labels, nx, ny, p, mass_deviation })
    }

    pub fn from_file(file: &PmfFile) -> Result<Self> {
        Self::with_labels(&file.pmf, file.x_alphabet.clone(), file.y_alphabet.clone())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PmfFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn to_file(&self) -> PmfFile {
        PmfFile {
            x_alphabet: self.x_labels.clone(),
            y_alphabet: self.y_labels.clone(),
            pmf: (0..self.nx).map(|x| self.row(x).to_vec()).collect(),
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    /// Deviation of the raw input mass from 1, before renormalization.
    pub fn mass_deviation(&self) -> f64 {
        self.mass_deviation
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.ny + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.p[x * self.ny..(x + 1) * self.ny]
    }

    /// Row-major flat view of the pmf.
    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    #[inline]
    pub fn in_support(&self, x: usize, y: usize) -> bool {
        self.get(x, y) > SUPPORT_THRESHOLD
    }

    pub fn px(&self) -> Vec<f64> {
        (0..self.nx).map(|x| self.row(x).iter().sum()).collect()
    }

    pub fn py(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ny];
        for x in 0..self.nx {
            for (y, o) in out.iter_mut().enumerate() {
                *o += self.get(x, y);
            }
        }
        out
    }

    pub fn h_x(&self) -> f64 {
        entropy(self.px())
    }

    pub fn h_y(&self) -> f64 {
        entropy(self.py())
    }

    pub fn h_xy(&self) -> f64 {
        entropy(self.p.iter().copied())
    }

    pub fn h_x_given_y(&self) -> f64 {
        self.h_xy() - self.h_y()
    }

    pub fn h_y_given_x(&self) -> f64 {
        self.h_xy() - self.h_x()
    }

    pub fn mutual_information(&self) -> f64 {
        self.h_x() + self.h_y() - self.h_xy()
    }

    /// All entropy constants of the pair at once.
    pub fn entropies(&self) -> Entropies {
        let hx = self.h_x();
        let hy = self.h_y();
        let hxy = self.h_xy();
        Entropies { hx, hy, hxy, hx_y: hxy - hy, hy_x: hxy - hx, mi: hx + hy - hxy }
    }

    /// Largest deviation `|p(x,y) - p(x)p(y)|`.
    pub fn independence_deviation(&self) -> f64 {
        let px = self.px();
        let py = self.py();
        let mut worst: f64 = 0.0;
        for x in 0..self.nx {
            for y in 0..self.ny {
                worst = worst.max((self.get(x, y) - px[x] * py[y]).abs());
            }
        }
        worst
    }

    /// The same pmf with the roles of `X` and `Y` exchanged.
    pub fn transpose(&self) -> JointPmf {
        let mut p = Vec::with_capacity(self.p.len());
        for y in 0..self.ny {
            for x in 0..self.nx {
                p.push(self.get(x, y));
            }
        }
        JointPmf {
            x_labels: self.y_labels.clone(),
            y_labels: self.x_labels.clone(),
            nx: self.ny,
            ny: self.nx,
            p,
            mass_deviation: self.mass_deviation,
        }
    }

    /// Support cells `(x, y)` in row-major order.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.nx {
            for y in 0..self.ny {
                if self.in_support(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }
}

/// Entropy constants of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entropies {
    pub hx: f64,
    pub hy: f64,
    pub hxy: f64,
    pub hx_y: f64,
    pub hy_x: f64,
    pub mi: f64,
}

/// `I(X;Y)` of a validated pmf.
pub fn mutual_information(p: &JointPmf) -> f64 {
    p.mutual_information()
}

/// Joint pmf of two independent pairs, `((X1,X2), (Y1,Y2))`.
///
/// The product symbol `(a, b)` has index `a * n2 + b`.
pub fn product_joint(p1: &JointPmf, p2: &JointPmf) -> Result<JointPmf> {
    product_joint_with_cap(p1, p2, PRODUCT_ALPHABET_CAP)
}

/// As [`product_joint`] with an explicit per-axis cap.
pub fn product_joint_with_cap(p1: &JointPmf, p2: &JointPmf, cap: usize) -> Result<JointPmf> {
    let nx = p1.nx * p2.nx;
    let ny = p1.ny * p2.ny;
    if nx > cap {
        return Err(Error::AlphabetTooLarge { size: nx, cap });
    }
    if ny > cap {
        return Err(Error::AlphabetTooLarge { size: ny, cap });
    }
    let mut rows = vec![vec![0.0; ny]; nx];
    for x1 in 0..p1.nx {
        for x2 in 0..p2.nx {
            for y1 in 0..p1.ny {
                for y2 in 0..p2.ny {
                    rows[x1 * p2.nx + x2][y1 * p2.ny + y2] = p1.get(x1, y1) * p2.get(x2, y2);
                }
            }
        }
    }
    let pair = |a: &[String], b: &[String]| {
        let mut out = Vec::with_capacity(a.len() * b.len());
        for s in a {
            for t in b {
                out.push(format!("({s},{t})"));
            }
        }
        out
    };
    JointPmf::with_labels(&rows, pair(&p1.x_labels, &p2.x_labels), pair(&p1.y_labels, &p2.y_labels))
}

/// `n`-fold i.i.d. tensor power for `n` in `{1, 2}`.
pub fn tensor_power(p: &JointPmf, n: usize) -> Result<JointPmf> {
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidArgument(format!("tensor power supports n = 1 or 2, got {n}")));
    }
    let mut acc = p.clone();
    for _ in 1..n {
        acc = product_joint(&acc, p)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dsbs(a: f64) -> JointPmf {
        JointPmf::from_rows(&[vec![(1.0 - a) / 2.0, a / 2.0], vec![a / 2.0, (1.0 - a) / 2.0]]).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(JointPmf::from_rows(&[]), Err(Error::EmptyMatrix)));
        assert!(matches!(
            JointPmf::from_rows(&[vec![0.5, 0.5], vec![0.0]]),
            Err(Error::NotRectangular { row: 1, .. })
        ));
        assert!(matches!(
            JointPmf::from_rows(&[vec![1.1, -0.1]]),
            Err(Error::NegativeEntry { x: 0, y: 1, .. })
        ));
        assert!(matches!(
            JointPmf::from_rows(&[vec![0.5, 0.4]]),
            Err(Error::MassDeviationTooLarge { .. })
        ));
        assert!(matches!(JointPmf::from_rows(&[vec![f64::NAN, 1.0]]), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn dsbs_entropies() {
        let p = dsbs(0.1);
        assert_abs_diff_eq!(binary_entropy(0.1), 0.4689955935892812, epsilon = 1e-12);
        assert_abs_diff_eq!(p.mutual_information(), 1.0 - 0.4689955935892812, epsilon = 1e-12);
        assert_abs_diff_eq!(p.h_x_given_y(), 0.4689955935892812, epsilon = 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"x_alphabet":["a","b"],"y_alphabet":["c","d"],"pmf":[[0.5,0.0],[0.0,0.5]]}"#;
        let p = JointPmf::from_json(text).unwrap();
        assert_eq!(p.x_labels(), ["a", "b"]);
        let again = JointPmf::from_file(&p.to_file()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn product_is_additive() {
        let p = dsbs(0.2);
        let q = JointPmf::from_rows(&[vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap();
        let pq = product_joint(&p, &q).unwrap();
        assert_abs_diff_eq!(pq.h_xy(), p.h_xy() + q.h_xy(), epsilon = 1e-12);
        assert_abs_diff_eq!(pq.mutual_information(), p.mutual_information() + q.mutual_information(), epsilon = 1e-12);
        let p2 = tensor_power(&p, 2).unwrap();
        assert_eq!(p2.nx(), 4);
        assert_abs_diff_eq!(p2.h_x(), 2.0, epsilon = 1e-12);
        assert!(tensor_power(&p, 3).is_err());
        let big = JointPmf::from_rows(&[vec![1.0 / 9.0; 9]]).unwrap();
        assert!(matches!(product_joint(&big, &big), Err(Error::AlphabetTooLarge { size: 81, cap: 64 })));
    }
}
