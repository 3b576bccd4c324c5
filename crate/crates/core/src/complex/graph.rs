use std::collections::VecDeque;

/// Simple undirected graph on `0..n`.
///
/// Dense graphs keep one bit row per vertex; sparse graphs keep sorted
/// neighbour lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Graph {
    Dense { n: usize, words: usize, bits: Vec<u64> },
    Sparse { adj: Vec<Vec<u32>> },
}

const DENSE_LIMIT: usize = 24_000;

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph::Sparse { adj: vec![Vec::new(); n] }
    }

    pub fn complete(n: usize) -> Self {
        if n > DENSE_LIMIT {
            return Graph::Sparse { adj: (0..n).map(|i| (0..n as u32).filter(|&j| j as usize != i).collect()).collect() };
        }
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        for i in 0..n {
            let row = &mut bits[i * words..(i + 1) * words];
            for j in 0..n {
                if j != i {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
        }
        Graph::Dense { n, words, bits }
    }

    /// From symmetric sorted neighbour rows. Dense storage is chosen when it is
    /// smaller than the lists.
    pub fn from_rows(rows: Vec<Vec<u32>>) -> Self {
        let n = rows.len();
        let total: usize = rows.iter().map(|r| r.len()).sum();
        let words = n.div_ceil(64);
        if n <= DENSE_LIMIT && n * words * 2 < total {
            let mut bits = vec![0u64; n * words];
            for (i, r) in rows.iter().enumerate() {
                for &j in r {
                    bits[i * words + j as usize / 64] |= 1 << (j % 64);
                }
            }
            Graph::Dense { n, words, bits }
        } else {
            Graph::Sparse { adj: rows }
        }
    }

    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u != v {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
        }
        for r in &mut adj {
            r.sort_unstable();
            r.dedup();
        }
        Graph::from_rows(adj)
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            Graph::Dense { n, .. } => *n,
            Graph::Sparse { adj } => adj.len(),
        }
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        match self {
            Graph::Dense { words, bits, .. } => bits[u as usize * words + v as usize / 64] >> (v % 64) & 1 == 1,
            Graph::Sparse { adj } => adj[u as usize].binary_search(&v).is_ok(),
        }
    }

    /// Sorted neighbours of `v`.
    pub fn neighbors(&self, v: u32) -> Vec<u32> {
        match self {
            Graph::Dense { words, bits, .. } => {
                let row = &bits[v as usize * words..(v as usize + 1) * words];
                let mut out = Vec::new();
                for (w, &x) in row.iter().enumerate() {
                    let mut x = x;
                    while x != 0 {
                        let t = x.trailing_zeros();
                        out.push((w * 64) as u32 + t);
                        x &= x - 1;
                    }
                }
                out
            }
            Graph::Sparse { adj } => adj[v as usize].clone(),
        }
    }

    pub fn degree(&self, v: u32) -> usize {
        match self {
            Graph::Dense { words, bits, .. } => {
                bits[v as usize * words..(v as usize + 1) * words].iter().map(|x| x.count_ones() as usize).sum()
            }
            Graph::Sparse { adj } => adj[v as usize].len(),
        }
    }

    pub fn edge_count(&self) -> u64 {
        (0..self.vertex_count() as u32).map(|v| self.degree(v) as u64).sum::<u64>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.vertex_count() as u32).flat_map(move |u| self.neighbors(u).into_iter().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Triangles `(a, b, c)` with `a < b < c`, in lexicographic order.
    pub fn triangles(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        (0..self.vertex_count() as u32).flat_map(move |a| {
            let na: Vec<u32> = self.neighbors(a).into_iter().filter(|&x| x > a).collect();
            let mut out = Vec::new();
            for (i, &b) in na.iter().enumerate() {
                for &c in &na[i + 1..] {
                    if self.has_edge(b, c) {
                        out.push((a, b, c));
                    }
                }
            }
            out
        })
    }

    pub fn triangle_count(&self) -> u64 {
        let n = self.vertex_count() as u64;
        if let Graph::Dense { .. } = self {
            if self.edge_count() == n * n.saturating_sub(1) / 2 {
                return n * n.saturating_sub(1) * n.saturating_sub(2) / 6;
            }
        }
        let mut t = 0u64;
        for a in 0..self.vertex_count() as u32 {
            let na: Vec<u32> = self.neighbors(a).into_iter().filter(|&x| x > a).collect();
            for (i, &b) in na.iter().enumerate() {
                for &c in &na[i + 1..] {
                    if self.has_edge(b, c) {
                        t += 1;
                    }
                }
            }
        }
        t
    }

    pub fn components(&self) -> Vec<Vec<u32>> {
        let n = self.vertex_count();
        let mut comp = vec![u32::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if comp[s] != u32::MAX {
                continue;
            }
            let id = out.len() as u32;
            let mut members = vec![s as u32];
            comp[s] = id;
            let mut queue = VecDeque::from([s as u32]);
            match self {
                Graph::Dense { words, bits, .. } => {
                    // unvisited mask keeps the scan linear in n^2/64
                    let mut unvisited = vec![0u64; *words];
                    for (v, c) in comp.iter().enumerate() {
                        if *c == u32::MAX {
                            unvisited[v / 64] |= 1 << (v % 64);
                        }
                    }
                    while let Some(u) = queue.pop_front() {
                        let row = &bits[u as usize * words..(u as usize + 1) * words];
                        for w in 0..*words {
                            let mut x = row[w] & unvisited[w];
                            unvisited[w] &= !x;
                            while x != 0 {
                                let v = w * 64 + x.trailing_zeros() as usize;
                                x &= x - 1;
                                comp[v] = id;
                                members.push(v as u32);
                                queue.push_back(v as u32);
                            }
                        }
                    }
                }
                Graph::Sparse { adj } => {
                    while let Some(u) = queue.pop_front() {
                        for &v in &adj[u as usize] {
                            if comp[v as usize] == u32::MAX {
                                comp[v as usize] = id;
                                members.push(v);
                                queue.push_back(v);
                            }
                        }
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Whether the vertex set spans a clique.
    pub fn is_clique(&self, vs: &[u32]) -> bool {
        for (i, &a) in vs.iter().enumerate() {
            for &b in &vs[i + 1..] {
                if a != b && !self.has_edge(a, b) {
                    return false;
                }
            }
        }
        true
    }

    /// Induced subgraph on `keep` (sorted); vertex `i` of the result is `keep[i]`.
    pub fn induced(&self, keep: &[u32]) -> Graph {
        let mut index = vec![u32::MAX; self.vertex_count()];
        for (i, &v) in keep.iter().enumerate() {
            index[v as usize] = i as u32;
        }
        let rows = keep
            .iter()
            .map(|&v| self.neighbors(v).into_iter().filter_map(|u| (index[u as usize] != u32::MAX).then(|| index[u as usize])).collect())
            .collect();
        Graph::from_rows(rows)
    }
}
