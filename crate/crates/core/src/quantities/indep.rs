//! The continuous-auxiliary construction for independent pairs:
//! `X = F_X^{-1}(V)`, `Y = F_Y^{-1}(W)` and `U = V + W mod 1`.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::prob::{JointPmf, MASS_TOLERANCE};

/// `l(t) = -t log2 t`.
fn l(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        -t * t.log2()
    }
}

/// Antiderivative of `l` vanishing at 0.
fn l_integral(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        -0.5 * u * u * u.log2() + u * u / (4.0 * std::f64::consts::LN_2)
    }
}

/// `f(a, b) = int_0^1 l(|[0,b] ∩ ([u,u+a] mod 1)|) du` in closed form.
pub fn f_integral(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(Error::InvalidArgument(format!("f(a, b) needs a, b in [0, 1], got ({a}, {b})")));
    }
    let (a, b) = if b <= a { (a, b) } else { (b, a) };
    let v = if a + b <= 1.0 {
        (a - b) * l(b) + 2.0 * l_integral(b)
    } else {
        let c = a + b - 1.0;
        (a - b) * l(b) + c * l(c) + 2.0 * (l_integral(b) - l_integral(c))
    };
    Ok(v)
}

fn require_independent(p: &JointPmf) -> Result<(Vec<f64>, Vec<f64>)> {
    let deviation = p.independence_deviation();
    if deviation > MASS_TOLERANCE {
        return Err(Error::NotIndependent { deviation });
    }
    Ok((p.px(), p.py()))
}

/// `E[-log2 max{p(X), p(Y)}] - 1`.
pub fn indep_lower_bound(p: &JointPmf) -> Result<f64> {
    let (px, py) = require_independent(p)?;
    let mut s = 0.0;
    for &a in px.iter().filter(|a| **a > 0.0) {
        for &b in py.iter().filter(|b| **b > 0.0) {
            s -= a * b * a.max(b).log2();
        }
    }
    Ok(s - 1.0)
}

/// `I(X,Y;U)` of the continuous construction: `H(X,Y) - sum f(p(x), p(y))`.
pub fn achieved_indep_value(p: &JointPmf) -> Result<f64> {
    let (px, py) = require_independent(p)?;
    let mut s = 0.0;
    for &a in &px {
        for &b in &py {
            s += f_integral(a.min(1.0), b.min(1.0))?;
        }
    }
    Ok(p.h_xy() - s)
}

/// Area of `{(v, w) in [a1, b1] x [a2, b2] : v + w <= t}`.
fn area_below(t: f64, a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    let len = b2 - a2;
    let h = |z: f64| {
        if z <= 0.0 {
            0.0
        } else if z <= len {
            0.5 * z * z
        } else {
            0.5 * len * len + len * (z - len)
        }
    };
    h(t - a1 - a2) - h(t - b1 - a2)
}

/// The construction with `U` quantized to `m` equal bins of `[0, 1)`.
/// `U` stays exactly independent of `X` and of `Y` for every `m`, and the
/// achieved `I(X,Y;U)` increases to [`achieved_indep_value`] as `m` grows.
pub fn quantized_indep_channel(p: &JointPmf, m: usize) -> Result<Channel> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("quantization level must be at least 2, got {m}")));
    }
    let (px, py) = require_independent(p)?;
    let cum = |v: &[f64]| {
        let mut c = vec![0.0];
        for x in v {
            c.push(c.last().unwrap() + x);
        }
        c
    };
    let (fx, fy) = (cum(&px), cum(&py));
    let mut q = Vec::with_capacity(p.nx() * p.ny() * m);
    for x in 0..p.nx() {
        for y in 0..p.ny() {
            let (a1, b1, a2, b2) = (fx[x], fx[x + 1], fy[y], fy[y + 1]);
            let band = |s: f64, t: f64| area_below(t, a1, b1, a2, b2) - area_below(s, a1, b1, a2, b2);
            let row: Vec<f64> = (0..m)
                .map(|u| {
                    if px[x] * py[y] <= 0.0 {
                        return 1.0;
                    }
                    let (lo, hi) = (u as f64 / m as f64, (u + 1) as f64 / m as f64);
                    (band(lo, hi) + band(1.0 + lo, 1.0 + hi)).max(0.0)
                })
                .collect();
            let s: f64 = row.iter().sum();
            q.extend(row.iter().map(|v| v / s));
        }
    }
    Channel::new(p.nx(), p.ny(), m, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::TriplePmf;

    #[test]
    fn closed_form_special_cases() {
        assert!(f_integral(0.0, 0.3).unwrap().abs() < 1e-15);
        assert!((f_integral(1.0, 0.3).unwrap() - l(0.3)).abs() < 1e-14);
        assert!(f_integral(1.0, 1.0).unwrap().abs() < 1e-14);
        // b = a with a + b <= 1 reduces to twice the integral of l.
        assert!((f_integral(0.25, 0.25).unwrap() - 2.0 * l_integral(0.25)).abs() < 1e-15);
        assert!((f_integral(0.2, 0.7).unwrap() - f_integral(0.7, 0.2).unwrap()).abs() < 1e-15);
        assert!(f_integral(1.5, 0.2).is_err());
    }

    #[test]
    fn independent_bits() {
        let p = JointPmf::from_rows(&[vec![0.25; 2], vec![0.25; 2]]).unwrap();
        assert!(indep_lower_bound(&p).unwrap().abs() < 1e-15);
        let u4 = JointPmf::from_rows(&vec![vec![1.0 / 16.0; 4]; 4]).unwrap();
        assert!((indep_lower_bound(&u4).unwrap() - 1.0).abs() < 1e-12);
        assert!(achieved_indep_value(&u4).unwrap() >= 1.0);
        let pl = JointPmf::from_rows(&[vec![1.0 / 3.0, 1.0 / 3.0], vec![1.0 / 3.0, 0.0]]).unwrap();
        assert!(matches!(indep_lower_bound(&pl), Err(Error::NotIndependent { .. })));
    }

    #[test]
    fn quantized_construction_is_independent() {
        let p = JointPmf::from_rows(&[vec![0.12, 0.28], vec![0.18, 0.42]]).unwrap();
        let target = achieved_indep_value(&p).unwrap();
        let mut last = 0.0;
        for m in [4, 32, 256] {
            let c = quantized_indep_channel(&p, m).unwrap();
            let t = TriplePmf::new(&p, &c).unwrap();
            assert!(t.mi_x_u() < 1e-12 && t.mi_y_u() < 1e-12);
            let v = t.mi_xy_u();
            assert!(v <= target + 1e-12 && v >= last - 1e-12);
            last = v;
        }
        assert!(target - last < 0.02, "{target} {last}");
    }
}
