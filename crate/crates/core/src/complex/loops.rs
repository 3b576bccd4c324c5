//! Edge paths, closed loops and disk diagrams in flag complexes.

use super::homology::HomologyContext;
use super::FlagComplex;
use serde::Serialize;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

/// A closed edge walk, stored without stationary steps or backtracks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimplicialLoop {
    vertices: Vec<u32>,
    original_len: usize,
}

impl SimplicialLoop {
    /// Consecutive vertices (cyclically) must be equal or adjacent.
    pub fn new(k: &impl FlagComplex, walk: &[u32]) -> Result<Self, String> {
        let g = k.graph();
        if walk.is_empty() {
            return Err("empty loop".into());
        }
        for i in 0..walk.len() {
            let (a, b) = (walk[i], walk[(i + 1) % walk.len()]);
            if a as usize >= g.vertex_count() || b as usize >= g.vertex_count() {
                return Err(format!("vertex out of range at step {i}"));
            }
            if a != b && !g.has_edge(a, b) {
                return Err(format!("{a} and {b} do not span an edge (step {i})"));
            }
        }
        Ok(SimplicialLoop { vertices: cyclic_reduce(walk), original_len: walk.len() })
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    /// Reduces to a single vertex.
    pub fn is_trivial(&self) -> bool {
        self.vertices.len() <= 1
    }
}

fn cyclic_reduce(walk: &[u32]) -> Vec<u32> {
    let mut stack: Vec<u32> = Vec::with_capacity(walk.len() + 1);
    for &v in walk.iter().chain(std::iter::once(&walk[0])) {
        if stack.last() == Some(&v) {
            continue;
        }
        if stack.len() >= 2 && stack[stack.len() - 2] == v {
            stack.pop();
            continue;
        }
        stack.push(v);
    }
    // the path returns to its start; drop the repeated endpoint
    if stack.len() > 1 {
        stack.pop();
    }
    let mut c: VecDeque<u32> = stack.into();
    loop {
        let k = c.len();
        if k == 2 {
            c.pop_back();
        } else if k >= 3 && c[1] == c[k - 1] {
            c.pop_front();
            c.pop_back();
        } else {
            break;
        }
    }
    c.into()
}

/// Shortest edge path from `u` to `v` (both endpoints included) with at most
/// `max_edges` edges. Ties go to the smallest vertex found first.
pub fn edge_path_search(k: &impl FlagComplex, u: u32, v: u32, max_edges: usize) -> Option<Vec<u32>> {
    if u == v {
        return Some(vec![u]);
    }
    let g = k.graph();
    let mut parent: HashMap<u32, u32> = HashMap::from([(u, u)]);
    let mut frontier = vec![u];
    for _ in 0..max_edges {
        let mut next = Vec::new();
        for &x in &frontier {
            for y in g.neighbors(x) {
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(y) {
                    e.insert(x);
                    if y == v {
                        let mut path = vec![v];
                        let mut z = v;
                        while z != u {
                            z = parent[&z];
                            path.push(z);
                        }
                        path.reverse();
                        return Some(path);
                    }
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        frontier = next;
    }
    None
}

/// A triangulated disk mapped simplicially into a complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiskDiagram {
    /// Image of each disk vertex.
    pub images: Vec<u32>,
    pub cells: Vec<[u32; 3]>,
    /// Disk vertices along the boundary, in loop order.
    pub boundary: Vec<u32>,
    pub depth: u32,
    pub area: usize,
}

/// Smallest `L` such that `sd^L` of the 2-simplex has room for the boundary
/// length and the number of cells.
pub fn subdivision_depth(boundary_len: usize, area: usize) -> u32 {
    let mut l = 0u32;
    while 3usize.saturating_mul(1 << l.min(60)) < boundary_len || 6usize.saturating_pow(l) < area {
        l += 1;
    }
    l
}

impl DiskDiagram {
    fn assemble(lp: &SimplicialLoop, moves: &[Move]) -> DiskDiagram {
        let mut images: Vec<u32> = lp.vertices().to_vec();
        let boundary: Vec<u32> = (0..images.len() as u32).collect();
        let mut frontier = boundary.clone();
        let mut cells = Vec::new();
        for m in moves {
            let k = frontier.len();
            match *m {
                Move::Ear(i) => {
                    cells.push([frontier[(i + k - 1) % k], frontier[i], frontier[(i + 1) % k]]);
                    frontier.remove(i);
                }
                Move::Push(i, z) => {
                    let id = images.len() as u32;
                    images.push(z);
                    cells.push([frontier[i], id, frontier[(i + 1) % k]]);
                    frontier.insert(i + 1, id);
                }
                Move::Close => {
                    cells.push([frontier[0], frontier[1], frontier[2]]);
                    frontier.clear();
                }
            }
        }
        let area = cells.len();
        DiskDiagram { depth: subdivision_depth(lp.len(), area), images, cells, boundary, area }
    }

    /// Independent check that this is a disk whose boundary maps onto the
    /// loop and whose cells map into simplices.
    pub fn certify(&self, k: &impl FlagComplex, lp: &SimplicialLoop) -> Result<(), String> {
        let g = k.graph();
        let nv = self.images.len();
        if self.boundary.len() != lp.len() {
            return Err(format!("boundary length {} vs loop length {}", self.boundary.len(), lp.len()));
        }
        for (i, &b) in self.boundary.iter().enumerate() {
            if b as usize >= nv || self.images[b as usize] != lp.vertices()[i] {
                return Err(format!("boundary vertex {i} does not map onto the loop"));
            }
        }
        if self.boundary.iter().collect::<HashSet<_>>().len() != self.boundary.len() {
            return Err("boundary repeats a disk vertex".into());
        }
        if self.area != self.cells.len() {
            return Err("area does not match cell count".into());
        }
        if self.depth != subdivision_depth(lp.len(), self.area) {
            return Err("depth does not match the subdivision count".into());
        }
        if lp.len() == 1 {
            return if self.cells.is_empty() && nv == 1 { Ok(()) } else { Err("trivial loop with cells".into()) };
        }
        let span = |a: u32, b: u32| a == b || g.has_edge(a, b);
        let mut edge_use: HashMap<(u32, u32), u32> = HashMap::new();
        let key = |a: u32, b: u32| (a.min(b), a.max(b));
        for (ci, c) in self.cells.iter().enumerate() {
            if c.iter().any(|&x| x as usize >= nv) || c[0] == c[1] || c[1] == c[2] || c[0] == c[2] {
                return Err(format!("cell {ci} is degenerate in the disk"));
            }
            let [a, b, cc] = c.map(|x| self.images[x as usize]);
            if !(span(a, b) && span(b, cc) && span(a, cc)) {
                return Err(format!("cell {ci} does not map into a simplex"));
            }
            for (x, y) in [(c[0], c[1]), (c[1], c[2]), (c[0], c[2])] {
                *edge_use.entry(key(x, y)).or_insert(0) += 1;
            }
        }
        let l = self.boundary.len();
        for i in 0..l {
            *edge_use.entry(key(self.boundary[i], self.boundary[(i + 1) % l])).or_insert(0) += 1;
        }
        if let Some((e, c)) = edge_use.iter().find(|(_, &c)| c != 2) {
            return Err(format!("disk edge {:?} has {} sides", e, c));
        }
        let mut used = vec![false; nv];
        for c in &self.cells {
            for &x in c {
                used[x as usize] = true;
            }
        }
        if used.iter().any(|u| !u) {
            return Err("unused disk vertex".into());
        }
        let chi = nv as i64 - edge_use.len() as i64 + self.cells.len() as i64;
        if chi != 1 {
            return Err(format!("Euler characteristic {chi}"));
        }
        // links must be connected arcs or circles
        let mut links: Vec<Vec<(u32, u32)>> = vec![Vec::new(); nv];
        for c in &self.cells {
            links[c[0] as usize].push((c[1], c[2]));
            links[c[1] as usize].push((c[0], c[2]));
            links[c[2] as usize].push((c[0], c[1]));
        }
        for (v, link) in links.iter().enumerate() {
            let mut verts: Vec<u32> = link.iter().flat_map(|&(a, b)| [a, b]).collect();
            verts.sort_unstable();
            verts.dedup();
            let mut seen: HashSet<u32> = HashSet::from([verts[0]]);
            let mut stack = vec![verts[0]];
            while let Some(x) = stack.pop() {
                for &(a, b) in link {
                    let y = if a == x { b } else if b == x { a } else { continue };
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
            if seen.len() != verts.len() {
                return Err(format!("link of disk vertex {v} is disconnected"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum NullHomotopyVerdict {
    Disk(DiskDiagram),
    NontrivialH1,
    Unknown { explored: usize },
}

/// States expanded before the search gives up.
pub const NODE_BUDGET: usize = 200_000;

#[derive(Clone, Copy, Debug)]
enum Move {
    Ear(usize),
    Push(usize, u32),
    Close,
}

struct Node {
    frontier: Vec<(u32, u32)>,
    pushed: Vec<(u32, u32)>,
    next_id: u32,
    cells: usize,
    parent: usize,
    mv: Option<Move>,
}

/// Three-valued search for a disk bounded by `lp`.
///
/// Ears (three consecutive frontier vertices spanning a simplex) are taken
/// greedily first; the remaining frontier is filled by best-first search over
/// ears and pushes across triangles, bounded by the area budget and by the
/// number of cells `sd^depth_budget` of the 2-simplex can hold.
pub fn null_homotopy_search(
    k: &impl FlagComplex,
    lp: &SimplicialLoop,
    depth_budget: u32,
    area_budget: usize,
    homology: Option<&HomologyContext>,
) -> NullHomotopyVerdict {
    if lp.is_trivial() {
        return NullHomotopyVerdict::Disk(DiskDiagram::assemble(lp, &[]));
    }
    if let Some(h) = homology {
        if h.is_nontrivial(lp.vertices()) == Some(true) {
            return NullHomotopyVerdict::NontrivialH1;
        }
    }
    let cap = area_budget.min(6usize.saturating_pow(depth_budget));
    if 3usize.saturating_mul(1 << depth_budget.min(60)) < lp.len() {
        return NullHomotopyVerdict::Unknown { explored: 0 };
    }
    let g = k.graph();
    let span = |a: u32, b: u32| a == b || g.has_edge(a, b);
    let spans3 = |a: u32, b: u32, c: u32| span(a, b) && span(b, c) && span(a, c);

    // greedy ears
    let mut greedy = Vec::new();
    let mut f: Vec<(u32, u32)> = lp.vertices().iter().enumerate().map(|(i, &v)| (i as u32, v)).collect();
    loop {
        let n = f.len();
        if n == 3 {
            if spans3(f[0].1, f[1].1, f[2].1) {
                greedy.push(Move::Close);
                f.clear();
            }
            break;
        }
        let ear = (0..n).find(|&i| spans3(f[(i + n - 1) % n].1, f[i].1, f[(i + 1) % n].1));
        match ear {
            Some(i) => {
                greedy.push(Move::Ear(i));
                f.remove(i);
            }
            None => break,
        }
    }
    if f.is_empty() && greedy.len() <= cap {
        return NullHomotopyVerdict::Disk(DiskDiagram::assemble(lp, &greedy));
    }
    let mut explored = 0;
    let starts: Vec<Vec<Move>> = if greedy.is_empty() { vec![Vec::new()] } else { vec![greedy, Vec::new()] };
    for start in starts {
        let mut front: Vec<(u32, u32)> = lp.vertices().iter().enumerate().map(|(i, &v)| (i as u32, v)).collect();
        for m in &start {
            if let Move::Ear(i) = *m {
                front.remove(i);
            }
        }
        match best_first(g, front, lp.len() as u32, start.len(), cap, &mut explored) {
            Some(mut moves) => {
                let mut all = start;
                all.append(&mut moves);
                return NullHomotopyVerdict::Disk(DiskDiagram::assemble(lp, &all));
            }
            None => continue,
        }
    }
    NullHomotopyVerdict::Unknown { explored }
}

fn best_first(
    g: &super::Graph,
    frontier: Vec<(u32, u32)>,
    first_new: u32,
    cells0: usize,
    cap: usize,
    explored: &mut usize,
) -> Option<Vec<Move>> {
    let span = |a: u32, b: u32| a == b || g.has_edge(a, b);
    let spans3 = |a: u32, b: u32, c: u32| span(a, b) && span(b, c) && span(a, c);
    let mut nodes: Vec<Node> =
        vec![Node { frontier, pushed: Vec::new(), next_id: first_new, cells: cells0, parent: usize::MAX, mv: None }];
    let mut heap = BinaryHeap::new();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let est = |n: &Node| n.cells + n.frontier.len().saturating_sub(2);
    if est(&nodes[0]) > cap {
        return None;
    }
    heap.push(Reverse((est(&nodes[0]), nodes[0].frontier.len(), 0usize)));
    while let Some(Reverse((_, _, idx))) = heap.pop() {
        let key: Vec<u32> = nodes[idx].frontier.iter().map(|e| e.1).collect();
        if !seen.insert(key) {
            continue;
        }
        *explored += 1;
        if *explored > NODE_BUDGET {
            return None;
        }
        let fr = nodes[idx].frontier.clone();
        let n = fr.len();
        if n == 3 && spans3(fr[0].1, fr[1].1, fr[2].1) {
            let mut moves = vec![Move::Close];
            let mut i = idx;
            while let Some(m) = nodes[i].mv {
                moves.push(m);
                i = nodes[i].parent;
            }
            moves.reverse();
            return Some(moves);
        }
        let mut children = Vec::new();
        if n > 3 {
            for i in 0..n {
                let (a, b, c) = (fr[(i + n - 1) % n], fr[i], fr[(i + 1) % n]);
                if !spans3(a.1, b.1, c.1) {
                    continue;
                }
                let chord = (a.0.min(c.0), a.0.max(c.0));
                if nodes[idx].pushed.contains(&chord) {
                    continue;
                }
                let mut nf = fr.clone();
                nf.remove(i);
                children.push((nf, None, Move::Ear(i)));
            }
        }
        for i in 0..n {
            let (a, b) = (fr[i], fr[(i + 1) % n]);
            if a.1 == b.1 {
                continue;
            }
            let common: Vec<u32> = g.neighbors(a.1).into_iter().filter(|&z| z != b.1 && g.has_edge(z, b.1)).collect();
            for z in common {
                let mut nf = fr.clone();
                nf.insert(i + 1, (nodes[idx].next_id, z));
                children.push((nf, Some((a.0.min(b.0), a.0.max(b.0))), Move::Push(i, z)));
            }
        }
        for (nf, pushed_edge, mv) in children {
            let is_push = pushed_edge.is_some();
            let mut pushed = nodes[idx].pushed.clone();
            pushed.extend(pushed_edge);
            let child = Node {
                frontier: nf,
                pushed,
                next_id: nodes[idx].next_id + is_push as u32,
                cells: nodes[idx].cells + 1,
                parent: idx,
                mv: Some(mv),
            };
            let e = est(&child);
            if e > cap {
                continue;
            }
            heap.push(Reverse((e, child.frontier.len(), nodes.len())));
            nodes.push(child);
        }
    }
    None
}
