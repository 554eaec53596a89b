//! Starting points: deterministic labelings of rows and Dirichlet draws.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use super::eval::{Param, Problem};

/// Number of set partitions of `n` items into at most `k` blocks.
pub(crate) fn partition_count(n: usize, k: usize) -> f64 {
    // Stirling numbers of the second kind, summed over block counts.
    let mut s = vec![0.0f64; k + 1];
    s[0] = 1.0;
    for _ in 0..n {
        let mut next = vec![0.0; k + 1];
        for (j, &sj) in s.iter().enumerate() {
            if sj == 0.0 {
                continue;
            }
            next[j] += j as f64 * sj;
            if j < k {
                next[j + 1] += sj;
            }
        }
        s = next;
    }
    s.iter().sum()
}

/// Calls `f` with each restricted growth string of length `n` using at most
/// `k` blocks, i.e. each set partition up to relabeling.
pub(crate) fn for_each_partition(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    if n == 0 {
        f(&[]);
        return;
    }
    let mut a = vec![0usize; n];
    let mut maxes = vec![0usize; n];
    loop {
        f(&a);
        // Find the rightmost position that can be incremented.
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            let bound = maxes[i - 1] + 1;
            if a[i] < bound && a[i] + 1 < k {
                break;
            }
            i -= 1;
        }
        a[i] += 1;
        maxes[i] = maxes[i - 1].max(a[i]);
        for j in i + 1..n {
            a[j] = 0;
            maxes[j] = maxes[i];
        }
    }
}

/// Row labelings worth trying as deterministic channels.
pub(crate) fn deterministic_labelings(prob: &Problem, nu: usize, cap: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let rows = prob.rows();
    let mut out: Vec<Vec<usize>> = Vec::new();
    if partition_count(rows, nu) <= cap as f64 {
        for_each_partition(rows, nu, &mut |a| out.push(a.to_vec()));
        return out;
    }
    out.push(vec![0; rows]);
    let keys = &prob.row_key;
    let lift = |label: &dyn Fn(usize, usize) -> usize| -> Option<Vec<usize>> {
        let lab: Vec<usize> = keys.iter().map(|&(x, y)| label(x, y)).collect();
        lab.iter().all(|&l| l < nu).then(|| canonical(&lab))
    };
    match prob.param {
        Param::Full => {
            out.extend(lift(&|x, _| x));
            out.extend(lift(&|_, y| y));
            let m_max = prob.nx.max(prob.ny);
            for m in 2..=m_max.min(nu) {
                out.extend(lift(&|x, y| (x + y) % m));
                out.extend(lift(&|x, y| (x + m - y % m) % m));
            }
            if rows <= nu {
                out.push((0..rows).collect());
            }
            // Partitions of X and of Y lifted to cells.
            for (n, by_x) in [(prob.nx, true), (prob.ny, false)] {
                if partition_count(n, nu) <= cap as f64 {
                    let mut labs = Vec::new();
                    for_each_partition(n, nu, &mut |a| labs.push(a.to_vec()));
                    for a in labs {
                        out.extend(lift(&|x, y| if by_x { a[x] } else { a[y] }));
                    }
                }
            }
        }
        Param::ByX | Param::ByY => {
            if rows <= nu {
                out.push((0..rows).collect());
            }
        }
    }
    let blocks = nu.min(rows).max(1);
    while out.len() < cap.min(2000) {
        let lab: Vec<usize> = (0..rows).map(|_| rng.random_range(0..blocks)).collect();
        out.push(canonical(&lab));
    }
    out.sort();
    out.dedup();
    out
}

/// Relabels so that labels appear in first-occurrence order.
pub(crate) fn canonical(lab: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    lab.iter()
        .map(|&l| {
            let n = map.len();
            *map.entry(l).or_insert(n)
        })
        .collect()
}

pub(crate) fn one_hot(labels: &[usize], nu: usize) -> Vec<f64> {
    let mut q = vec![0.0; labels.len() * nu];
    for (r, &l) in labels.iter().enumerate() {
        q[r * nu + l] = 1.0;
    }
    q
}

/// Independent Dirichlet(1, ..., 1) rows.
pub(crate) fn dirichlet_rows(rows: usize, nu: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut q = vec![0.0; rows * nu];
    for r in q.chunks_mut(nu) {
        let mut s = 0.0;
        for v in r.iter_mut() {
            let e: f64 = Exp1.sample(rng);
            *v = e;
            s += e;
        }
        r.iter_mut().for_each(|v| *v /= s);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_enumeration() {
        for n in 0..7 {
            for k in 1..5 {
                let mut c = 0;
                for_each_partition(n, k, &mut |_| c += 1);
                assert_eq!(c as f64, partition_count(n, k), "n={n} k={k}");
            }
        }
        // Bell numbers.
        assert_eq!(partition_count(4, 4), 15.0);
        assert_eq!(partition_count(9, 9), 21147.0);
    }

    #[test]
    fn canonical_relabels() {
        assert_eq!(canonical(&[3, 3, 1, 0, 1]), vec![0, 0, 1, 2, 1]);
    }
}
