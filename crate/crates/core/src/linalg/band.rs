use crate::error::{Error, Result};

/// Symmetric matrix in lower band storage: entry (i, j), i - b <= j <= i,
/// lives at `data[i * (b + 1) + (i - j)]`.
#[derive(Clone, Debug)]
pub struct SymBand {
    n: usize,
    b: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, b: usize) -> Self {
        SymBand {
            n,
            b,
            data: vec![0.0; n * (b + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.b
    }

    /// Adds `v` at (i, j) (and implicitly (j, i)); |i - j| must be <= b.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.b);
        self.data[i * (self.b + 1) + (i - j)] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.b {
            0.0
        } else {
            self.data[i * (self.b + 1) + (i - j)]
        }
    }

    /// Number of negative pivots of an LDL^T factorization without pivoting,
    /// which by Sylvester's law is the number of negative eigenvalues.
    /// Tiny pivots are pushed to -pivmin, as in bisection eigensolvers.
    pub fn negative_count(mut self) -> usize {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        let scale = self.data.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let pivmin = f64::EPSILON * f64::EPSILON * scale;
        let mut col = vec![0.0; w];
        let mut count = 0;
        for j in 0..n {
            let mut d = self.data[j * w];
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
            let end = (j + b).min(n - 1);
            for i in j + 1..=end {
                col[i - j] = self.data[i * w + (i - j)];
            }
            for i in j + 1..=end {
                let lij = col[i - j] / d;
                if lij == 0.0 {
                    continue;
                }
                let row = i * w;
                for k in j + 1..=i {
                    self.data[row + (i - k)] -= lij * col[k - j];
                }
            }
        }
        count
    }
}

/// General band LU with partial pivoting (gbtf2/gbtrs layout, kl = ku = b).
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    kv: usize,
    ld: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn from_sym(a: &SymBand) -> Result<Self> {
        let (n, b) = (a.n, a.b);
        let (kl, ku) = (b, b);
        let kv = kl + ku;
        let ld = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            kv,
            ld,
            ab: vec![0.0; ld * n],
            ipiv: vec![0; n],
        };
        for j in 0..n {
            for i in j.saturating_sub(ku)..=(j + kl).min(n.saturating_sub(1)) {
                let v = a.get(i, j);
                lu.set(i, j, v);
            }
        }
        lu.factor()?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        (self.kv + i - j) + j * self.ld
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.ab[self.idx(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    fn factor(&mut self) -> Result<()> {
        let n = self.n;
        let mut ju = 0usize;
        for j in 0..n {
            let km = self.kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = self.at(j, j).abs();
            for t in 1..=km {
                let v = self.at(j + t, j).abs();
                if v > best {
                    best = v;
                    jp = t;
                }
            }
            self.ipiv[j] = j + jp;
            if best == 0.0 {
                return Err(Error::Singular);
            }
            ju = ju.max((j + self.kv - self.kl + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let (a, b) = (self.idx(j, c), self.idx(j + jp, c));
                    self.ab.swap(a, b);
                }
            }
            if km > 0 {
                let piv = self.at(j, j);
                for t in 1..=km {
                    let k = self.idx(j + t, j);
                    self.ab[k] /= piv;
                }
                for c in j + 1..=ju {
                    let ujc = self.at(j, c);
                    if ujc == 0.0 {
                        continue;
                    }
                    for t in 1..=km {
                        let l = self.at(j + t, j);
                        let k = self.idx(j + t, c);
                        self.ab[k] -= l * ujc;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for j in 0..n.saturating_sub(1) {
            let lm = self.kl.min(n - 1 - j);
            let l = self.ipiv[j];
            if l != j {
                x.swap(l, j);
            }
            let xj = x[j];
            if xj != 0.0 {
                for t in 1..=lm {
                    x[j + t] -= self.at(j + t, j) * xj;
                }
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.at(j, j);
            let xj = x[j];
            if xj != 0.0 {
                for i in j.saturating_sub(self.kv)..j {
                    x[i] -= self.at(i, j) * xj;
                }
            }
        }
    }
}

/// Reverse Cuthill–McKee order of an undirected graph given by adjacency
/// lists. Returns `perm` with perm[new] = old.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let degree = |v: usize| adj[v].len();
    let bfs_levels = |start: usize, visited: &[bool]| -> (usize, usize) {
        // returns (farthest vertex with minimal degree, eccentricity)
        let mut dist = vec![usize::MAX; n];
        dist[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        let mut last = start;
        while let Some(v) = queue.pop_front() {
            last = v;
            for &w in &adj[v] {
                if !visited[w] && dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let ecc = dist[last];
        let far = (0..n)
            .filter(|&v| dist[v] == ecc)
            .min_by_key(|&v| (degree(v), v))
            .unwrap_or(last);
        (far, ecc)
    };
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start inside this component
        let mut start = seed;
        let (mut far, mut ecc) = bfs_levels(start, &visited);
        for _ in 0..8 {
            let (f2, e2) = bfs_levels(far, &visited);
            if e2 <= ecc {
                break;
            }
            start = far;
            far = f2;
            ecc = e2;
        }
        let _ = far;
        visited[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (degree(w), w));
            nb.dedup();
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}
