use std::collections::VecDeque;

use super::krylov::Preconditioner;
use super::CsrMatrix;
use crate::error::{EllgError, Result};

fn neighbours(a: &CsrMatrix, i: usize) -> impl Iterator<Item = usize> + '_ {
    a.row(i).0.iter().copied().filter(move |&j| j != i)
}

/// BFS levels from `start` restricted to unvisited nodes; returns the last level.
fn last_level(a: &CsrMatrix, start: usize, visited: &[bool]) -> (usize, Vec<usize>) {
    let mut seen = visited.to_vec();
    seen[start] = true;
    let mut level = vec![start];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &u in &level {
            for w in neighbours(a, u) {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return (depth, level);
        }
        depth += 1;
        level = next;
    }
}

/// Reverse Cuthill-McKee ordering of a structurally symmetric matrix.
/// `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| neighbours(a, i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let mut start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i))
            .expect("unvisited node");
        // pseudo-peripheral start node
        let (mut ecc, _) = last_level(a, start, &visited);
        for _ in 0..8 {
            let (_, level) = last_level(a, start, &visited);
            let cand = *level.iter().min_by_key(|&&i| (degree[i], i)).expect("nonempty level");
            let (e, _) = last_level(a, cand, &visited);
            if e <= ecc {
                break;
            }
            ecc = e;
            start = cand;
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nb: Vec<usize> = neighbours(a, u).filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (degree[w], w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor `P A P^T = L L^T` stored row-wise within the envelope of
/// the RCM-permuted matrix (no fill outside it).
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(EllgError::Dimension {
                context: "cholesky",
                expected: n,
                actual: a.ncols(),
            });
        }
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0; n];
        let mut start = vec![0; n + 1];
        for i in 0..n {
            let f = a.row(perm[i]).0.iter().map(|&j| inv[j]).filter(|&j| j <= i).min().unwrap_or(i);
            first[i] = f.min(i);
            start[i + 1] = start[i] + i - first[i] + 1;
        }
        let mut vals = vec![0.0; start[n]];
        for i in 0..n {
            let (cols, v) = a.row(perm[i]);
            for (&j, &x) in cols.iter().zip(v) {
                let jn = inv[j];
                if jn <= i {
                    vals[start[i] + jn - first[i]] = x;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let (done, rest) = vals.split_at_mut(start[i]);
            let row = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let rj = &done[start[j]..start[j + 1]];
                let s: f64 = row[k0 - fi..j - fi]
                    .iter()
                    .zip(&rj[k0 - fj..j - fj])
                    .map(|(x, y)| x * y)
                    .sum();
                row[j - fi] = (row[j - fi] - s) / rj[j - fj];
            }
            let s: f64 = row[..i - fi].iter().map(|x| x * x).sum();
            let d = row[i - fi] - s;
            if !(d > 0.0) {
                return Err(EllgError::Singular("cholesky (matrix not positive definite)"));
            }
            row[i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky {
            perm,
            first,
            start,
            vals,
        })
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.vals.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, y)| l * y).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (yk, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}

impl Preconditioner for EnvelopeCholesky {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.solve(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm2, Triplets};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> CsrMatrix {
        // sparse B^T B + I
        let mut t = Triplets::new(n, n);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for r in rows.iter_mut() {
            for _ in 0..3 {
                r.push((rng.gen_range(0..n), rng.gen_range(-1.0..1.0)));
            }
        }
        for r in &rows {
            for &(i, a) in r {
                for &(j, b) in r {
                    t.push(i, j, a * b);
                }
            }
        }
        for i in 0..n {
            t.push(i, i, 1.0);
        }
        CsrMatrix::from_triplets(t)
    }

    #[test]
    fn rcm_is_a_permutation_and_narrows_a_shuffled_path() {
        let n = 60;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut label: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            label.swap(i, rng.gen_range(0..=i));
        }
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(label[i], label[i], 2.0);
            if i + 1 < n {
                t.push(label[i], label[i + 1], -1.0);
                t.push(label[i + 1], label[i], -1.0);
            }
        }
        let a = CsrMatrix::from_triplets(t);
        let p = reverse_cuthill_mckee(&a);
        let mut sorted = p.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        let mut inv = vec![0; n];
        for (new, &old) in p.iter().enumerate() {
            inv[old] = new;
        }
        let bw = a.iter().map(|(i, j, _)| inv[i].abs_diff(inv[j])).max().unwrap();
        assert_eq!(bw, 1);
    }

    #[test]
    fn factor_solves_random_spd_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 10, 80] {
            let a = random_spd(n, &mut rng);
            let f = EnvelopeCholesky::factor(&a).unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = a.matvec(&x);
            let y = f.solve(&b);
            let err: Vec<f64> = y.iter().zip(&x).map(|(p, q)| p - q).collect();
            assert!(norm2(&err) <= 1e-10 * norm2(&x), "n = {n}");
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = CsrMatrix::from_diagonal(&[1.0, -1.0, 2.0]);
        assert!(matches!(EnvelopeCholesky::factor(&a), Err(EllgError::Singular(_))));
    }

    #[test]
    fn disconnected_blocks() {
        let a = CsrMatrix::from_diagonal(&[4.0, 9.0, 1.0]);
        let f = EnvelopeCholesky::factor(&a).unwrap();
        assert_eq!(f.solve(&[4.0, 9.0, 1.0]), vec![1.0, 1.0, 1.0]);
        assert_eq!(f.envelope_size(), 3);
    }
}
