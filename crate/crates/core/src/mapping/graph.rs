use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::diff::DifferenceSequence;
use crate::trellis::Trellis;
use crate::waveform::CpmScheme;
use crate::{Error, Result};

/// Minimal union-find with union by size.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        a
    }

    pub(crate) fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }

    /// Groups sorted by smallest member.
    pub(crate) fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            let r = self.find(v);
            by_root[r].push(v);
        }
        let mut out: Vec<Vec<usize>> = by_root.into_iter().filter(|g| !g.is_empty()).collect();
        out.sort_by_key(|g| g[0]);
        out
    }
}

/// The graph `G(b)` on trellis edges: two edges are adjacent when they have
/// different start states and form an edge pair of an error event generated
/// by `b`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DifferenceGraph {
    pub scheme: CpmScheme,
    pub b: DifferenceSequence,
    pub num_vertices: usize,
    /// Adjacent vertex pairs `(u, v)` with `u < v`.
    pub adjacency: Vec<(usize, usize)>,
    /// Connected components, each sorted, ordered by smallest vertex.
    pub components: Vec<Vec<usize>>,
    /// Component index of every vertex.
    pub component_of: Vec<usize>,
}

impl DifferenceGraph {
    pub fn num_components(&self) -> usize {
        self.components.len()
    }
}

/// Builds `G(b)` by enumerating every error event generated by `b`: all start
/// states, all admissible symbol pairs at each position of `b`, and all
/// `L − 1` closing symbols.
pub fn build_difference_graph(scheme: &CpmScheme, b: &DifferenceSequence) -> Result<DifferenceGraph> {
    let b = DifferenceSequence::new(scheme, b.0.clone())?;
    let trellis = Trellis::build(scheme, 1)?;
    let m = scheme.alphabet_size() as i32;
    let l = scheme.pulse.length;
    let delta = b.len();
    let nv = trellis.num_edges();
    let mut uf = UnionFind::new(nv);
    let mut adjacency = BTreeSet::new();

    // choices per position: (u1, u2) pairs
    let mut choices: Vec<Vec<(usize, usize)>> = Vec::with_capacity(delta + l - 1);
    for &bn in b.as_slice() {
        let c: Vec<(usize, usize)> = (0..m)
            .filter(|&u1| (0..m).contains(&(u1 - bn)))
            .map(|u1| (u1 as usize, (u1 - bn) as usize))
            .collect();
        choices.push(c);
    }
    for _ in 1..l {
        choices.push((0..m as usize).map(|u| (u, u)).collect());
    }
    let sections = choices.len();
    let mut idx = vec![0usize; sections];
    for start in 0..trellis.num_states() {
        idx.iter_mut().for_each(|i| *i = 0);
        loop {
            let (mut s1, mut s2) = (start, start);
            for (n, c) in choices.iter().enumerate() {
                let (u1, u2) = c[idx[n]];
                let e1 = trellis.edge_index(s1, u1);
                let e2 = trellis.edge_index(s2, u2);
                if s1 != s2 {
                    uf.union(e1, e2);
                    adjacency.insert((e1.min(e2), e1.max(e2)));
                }
                s1 = trellis.edge(e1).end;
                s2 = trellis.edge(e2).end;
            }
            debug_assert_eq!(s1, s2, "event generated by a valid b must merge");
            // odometer over the choice indices
            let mut k = 0;
            while k < sections {
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == sections {
                break;
            }
        }
    }
    let components = uf.groups();
    let mut component_of = vec![0; nv];
    for (c, g) in components.iter().enumerate() {
        for &v in g {
            component_of[v] = c;
        }
    }
    Ok(DifferenceGraph {
        scheme: *scheme,
        b,
        num_vertices: nv,
        adjacency: adjacency.into_iter().collect(),
        components,
        component_of,
    })
}

/// The vertex set `V_p = {(α, (p − QΣa_l) mod P)}` as sorted edge indices.
pub fn vertex_set(trellis: &Trellis, p: u32) -> Vec<usize> {
    let s = trellis.scheme();
    trellis
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            let sum: u64 = e.alpha.iter().map(|&a| a as u64).sum();
            (e.beta as u64 + s.q as u64 * sum) % s.p as u64 == p as u64
        })
        .map(|(i, _)| i)
        .collect()
}

/// Index `p` of the vertex set containing edge `e`.
pub fn vertex_set_index(trellis: &Trellis, e: usize) -> u32 {
    let s = trellis.scheme();
    let edge = trellis.edge(e);
    let sum: u64 = edge.alpha.iter().map(|&a| a as u64).sum();
    ((edge.beta as u64 + s.q as u64 * sum) % s.p as u64) as u32
}

/// Checks that the `γ`-rotation `(α, β) ↦ (α, β + γ)` maps every component
/// onto a component and returns the induced permutation of component indices.
pub fn gamma_rotation_check(graph: &DifferenceGraph, gamma: i64) -> Result<Vec<usize>> {
    let trellis = Trellis::build(&graph.scheme, 1)?;
    let p = graph.scheme.p as i64;
    let hist = trellis.num_states() / p as usize;
    let m = trellis.alphabet_size();
    let rotate = |e: usize| -> usize {
        let edge = trellis.edge(e);
        let beta = (edge.beta as i64 + gamma).rem_euclid(p) as usize;
        let start = beta * hist + edge.start % hist;
        start * m + edge.input
    };
    let mut perm = Vec::with_capacity(graph.components.len());
    for (c, comp) in graph.components.iter().enumerate() {
        let mut image: Vec<usize> = comp.iter().map(|&e| rotate(e)).collect();
        image.sort_unstable();
        let target = graph.component_of[image[0]];
        if graph.components[target] != image {
            return Err(Error::ConditionsNotMet(format!(
                "rotation by {gamma} maps component {c} onto a set that is not a component"
            )));
        }
        perm.push(target);
    }
    Ok(perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::Pulse;

    #[test]
    fn msk_length_two_gives_p_components() {
        let s = CpmScheme::new(1, 1, 2, Pulse::rec(1)).unwrap();
        let g = build_difference_graph(&s, &DifferenceSequence(vec![1, -1])).unwrap();
        assert_eq!(g.num_components(), 2);
        let t = Trellis::build(&s, 1).unwrap();
        for p in 0..2 {
            assert!(g.components.contains(&vertex_set(&t, p)));
        }
    }

    #[test]
    fn rotation_by_zero_and_full_cycle_is_identity() {
        let s = CpmScheme::new(1, 1, 4, Pulse::rec(2)).unwrap();
        let g = build_difference_graph(&s, &DifferenceSequence(vec![1, -1])).unwrap();
        let id: Vec<usize> = (0..g.num_components()).collect();
        assert_eq!(gamma_rotation_check(&g, 0).unwrap(), id);
        assert_eq!(gamma_rotation_check(&g, 4).unwrap(), id);
    }

    #[test]
    fn rotation_by_q_shifts_vertex_sets() {
        let s = CpmScheme::new(1, 3, 5, Pulse::rec(2)).unwrap();
        let t = Trellis::build(&s, 1).unwrap();
        let g = build_difference_graph(&s, &DifferenceSequence(vec![1, -1])).unwrap();
        let perm = gamma_rotation_check(&g, 3).unwrap();
        for (c, comp) in g.components.iter().enumerate() {
            let p = vertex_set_index(&t, comp[0]);
            let q = vertex_set_index(&t, g.components[perm[c]][0]);
            assert_eq!(q, (p + 3) % 5);
        }
    }

    #[test]
    fn union_find_groups() {
        let mut uf = UnionFind::new(5);
        uf.union(3, 1);
        uf.union(4, 0);
        assert_eq!(uf.groups(), vec![vec![0, 4], vec![1, 3], vec![2]]);
        assert_eq!(uf.size_of(1), 2);
    }
}
