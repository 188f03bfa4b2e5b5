//! Instances built from graphs, and brute-force graph oracles to check them.
//!
//! * Vertex cover: packets for vertices then edges; per edge `(u, v)` one
//!   client holds the edge packet and wants both endpoint packets, another
//!   holds the endpoints and wants the edge packet. Over GF(2) the minimum is
//!   the vertex cover number plus the edge count.
//! * Coloring: one packet per vertex; per edge one client wanting both
//!   endpoints and holding everything else. Two transmissions over GF(q)
//!   suffice iff the graph is (q + 1)-colorable.
//!
//! The oracles here are plain exhaustive searches and share no code with the
//! solvers they check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{opt_q, SolveOptions};
use crate::field::{Elem, Field};
use crate::graph::Graph;
use crate::instance::{Client, Instance};
use crate::linalg::MatrixQ;

pub fn from_vertex_cover(g: &Graph) -> Result<Instance> {
    let edges = g.edges();
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let nv = g.num_vertices();
    let mut clients = Vec::with_capacity(2 * edges.len());
    for (i, &(u, v)) in edges.iter().enumerate() {
        let pe = nv + i;
        clients.push(Client::new([u, v], [pe]));
        clients.push(Client::new([pe], [u, v]));
    }
    Ok(Instance::new(nv + edges.len(), clients))
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if visit(&idx) {
            return;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Minimum vertex cover by scanning subsets in increasing size; the witness
/// is the lexicographically least cover of that size.
pub fn min_vertex_cover(g: &Graph, budget: u64) -> Result<(usize, Vec<usize>)> {
    let n = g.num_vertices();
    if n >= 64 || (1u64 << n) > budget {
        return Err(Error::BudgetExceeded {
            what: "vertex cover scan",
            needed: format!("2^{n}"),
            budget,
        });
    }
    let edges = g.edges();
    for k in 0..=n {
        let mut found = None;
        combinations(n, k, |s| {
            let covers = edges.iter().all(|&(u, v)| s.contains(&u) || s.contains(&v));
            if covers {
                found = Some(s.to_vec());
            }
            covers
        });
        if let Some(cover) = found {
            return Ok((k, cover));
        }
    }
    unreachable!("all vertices form a cover")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VcCheck {
    pub opt2: usize,
    pub vc: usize,
    pub num_edges: usize,
    pub holds: bool,
}

pub fn check_vc_identity(g: &Graph, budget: u64) -> Result<VcCheck> {
    let inst = from_vertex_cover(g)?;
    let opt2 = opt_q(&inst, 2, SolveOptions::with_budget(budget))?.opt;
    let (vc, _) = min_vertex_cover(g, budget)?;
    let num_edges = g.num_edges();
    Ok(VcCheck {
        opt2,
        vc,
        num_edges,
        holds: opt2 == vc + num_edges,
    })
}

pub fn from_coloring(g: &Graph) -> Result<Instance> {
    let n = g.num_vertices();
    if let Some(v) = (0..n).find(|&v| g.degree(v) == 0) {
        return Err(Error::IsolatedVertex(v));
    }
    let clients = g
        .edges()
        .into_iter()
        .map(|(u, v)| Client::new([u, v], (0..n).filter(|&p| p != u && p != v)))
        .collect();
    Ok(Instance::new(n, clients))
}

fn colorable(g: &Graph, k: usize, colors: &mut Vec<usize>, nodes: &mut u64, budget: u64) -> Result<bool> {
    *nodes += 1;
    if *nodes > budget {
        return Err(Error::BudgetExceeded {
            what: "chromatic number search",
            needed: format!("more than {budget} nodes"),
            budget,
        });
    }
    let v = colors.len();
    if v == g.num_vertices() {
        return Ok(true);
    }
    for c in 0..k {
        if (0..v).all(|u| !(g.has_edge(u, v) && colors[u] == c)) {
            colors.push(c);
            if colorable(g, k, colors, nodes, budget)? {
                return Ok(true);
            }
            colors.pop();
        }
    }
    Ok(false)
}

/// Chromatic number: the least k admitting a proper k-coloring, each k tested
/// by backtracking.
pub fn chromatic_number(g: &Graph, budget: u64) -> Result<usize> {
    let n = g.num_vertices();
    let mut nodes = 0;
    for k in 1..=n {
        if colorable(g, k, &mut Vec::with_capacity(n), &mut nodes, budget)? {
            return Ok(k);
        }
    }
    Ok(0)
}

/// The pairwise independent pairs `(1,0), (0,1), (1,1), (1,2), ..., (1,q-1)`.
pub fn independent_pairs(q: u32) -> Vec<(Elem, Elem)> {
    let mut v = vec![(1, 0), (0, 1)];
    v.extend((1..q).map(|b| (1, b as Elem)));
    v
}

/// Two encoding vectors from a coloring with at most `q + 1` colors: vertex
/// `v` gets the pair of its color.
pub fn coloring_to_solution(g: &Graph, coloring: &[usize], q: u32) -> Result<MatrixQ> {
    let field = Field::new(q)?;
    let n = g.num_vertices();
    if coloring.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: coloring.len(),
        });
    }
    if let Some((u, v)) = g.edges().into_iter().find(|&(u, v)| coloring[u] == coloring[v]) {
        return Err(Error::ImproperColoring(u, v));
    }
    let pairs = independent_pairs(q);
    let mut distinct = coloring.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() > pairs.len() || coloring.iter().any(|&c| c >= pairs.len()) {
        return Err(Error::TooManyColors {
            used: distinct.len().max(coloring.iter().max().map_or(0, |&c| c + 1)),
            q,
        });
    }
    let mut m = MatrixQ::zeros(&field, 2, n);
    for (v, &c) in coloring.iter().enumerate() {
        m.set(0, v, pairs[c].0);
        m.set(1, v, pairs[c].1);
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ColorCheck {
    pub opt_is_2: bool,
    pub chi: usize,
    pub holds: bool,
}

pub fn check_coloring_equivalence(g: &Graph, q: u32, budget: u64) -> Result<ColorCheck> {
    let inst = from_coloring(g)?;
    let opt = opt_q(&inst, q, SolveOptions::with_budget(budget))?.opt;
    let chi = chromatic_number(g, budget)?;
    let opt_is_2 = opt == 2;
    Ok(ColorCheck {
        opt_is_2,
        chi,
        holds: opt_is_2 == (chi as u64 <= q as u64 + 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::verify_solution;

    #[test]
    fn vc_construction() {
        let k3 = from_vertex_cover(&Graph::complete(3)).unwrap();
        assert_eq!((k3.num_packets, k3.num_clients()), (6, 6));
        let e = from_vertex_cover(&Graph::path(2)).unwrap();
        assert_eq!(e.num_packets, 3);
        assert_eq!(e.clients, vec![Client::new([0, 1], [2]), Client::new([2], [0, 1])]);
        let p3 = from_vertex_cover(&Graph::path(3)).unwrap();
        assert_eq!((p3.num_packets, p3.num_clients()), (5, 4));
        assert!(matches!(from_vertex_cover(&Graph::empty(3)), Err(Error::EmptyGraph)));
    }

    #[test]
    fn vertex_cover_oracle() {
        assert_eq!(min_vertex_cover(&Graph::complete(3), 1 << 10).unwrap().0, 2);
        assert_eq!(min_vertex_cover(&Graph::path(2), 1 << 10).unwrap(), (1, vec![0]));
        assert_eq!(min_vertex_cover(&Graph::cycle(4), 1 << 10).unwrap(), (2, vec![0, 2]));
        assert!(min_vertex_cover(&Graph::cycle(12), 1000).is_err());
    }

    #[test]
    fn vc_identity_small() {
        let c = check_vc_identity(&Graph::path(2), 1_000_000).unwrap();
        assert_eq!((c.opt2, c.vc, c.num_edges, c.holds), (2, 1, 1, true));
        let c = check_vc_identity(&Graph::complete(3), 1_000_000).unwrap();
        assert_eq!((c.opt2, c.vc, c.num_edges, c.holds), (5, 2, 3, true));
        let c = check_vc_identity(&Graph::path(3), 1_000_000).unwrap();
        assert_eq!((c.opt2, c.vc, c.num_edges, c.holds), (3, 1, 2, true));
    }

    #[test]
    fn coloring_construction() {
        let k3 = from_coloring(&Graph::complete(3)).unwrap();
        assert_eq!((k3.num_packets, k3.num_clients()), (3, 3));
        assert_eq!(k3.clients[0], Client::new([0, 1], [2]));
        let e = from_coloring(&Graph::path(2)).unwrap();
        assert_eq!(e.clients, vec![Client::new([0, 1], [])]);
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let s = from_coloring(&star).unwrap();
        assert_eq!((s.num_packets, s.num_clients()), (4, 3));
        let iso = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert!(matches!(from_coloring(&iso), Err(Error::IsolatedVertex(2))));
    }

    #[test]
    fn chromatic_oracle() {
        assert_eq!(chromatic_number(&Graph::complete(4), 10_000).unwrap(), 4);
        assert_eq!(chromatic_number(&Graph::cycle(5), 10_000).unwrap(), 3);
        assert_eq!(chromatic_number(&Graph::empty(4), 10_000).unwrap(), 1);
        assert_eq!(chromatic_number(&Graph::empty(0), 10_000).unwrap(), 0);
    }

    #[test]
    fn coloring_solutions() {
        let k3 = Graph::complete(3);
        let m = coloring_to_solution(&k3, &[0, 1, 2], 2).unwrap();
        assert_eq!(m.row_vecs(), vec![vec![1, 0, 1], vec![0, 1, 1]]);
        assert!(verify_solution(&from_coloring(&k3).unwrap(), &m).unwrap().satisfied);

        let e = Graph::path(2);
        let m = coloring_to_solution(&e, &[0, 1], 2).unwrap();
        assert_eq!(m.rank(), 2);

        assert!(matches!(
            coloring_to_solution(&k3, &[0, 1, 0], 2),
            Err(Error::ImproperColoring(0, 2))
        ));
        let k4 = Graph::complete(4);
        assert!(matches!(
            coloring_to_solution(&k4, &[0, 1, 2, 3], 2),
            Err(Error::TooManyColors { used: 4, q: 2 })
        ));
        let m = coloring_to_solution(&k4, &[0, 1, 2, 3], 3).unwrap();
        assert!(verify_solution(&from_coloring(&k4).unwrap(), &m).unwrap().satisfied);
    }

    #[test]
    fn coloring_equivalence_examples() {
        let c = check_coloring_equivalence(&Graph::complete(3), 2, 1_000_000).unwrap();
        assert_eq!((c.opt_is_2, c.chi, c.holds), (true, 3, true));
        let c = check_coloring_equivalence(&Graph::complete(4), 2, 1_000_000).unwrap();
        assert_eq!((c.opt_is_2, c.chi, c.holds), (false, 4, true));
        let c = check_coloring_equivalence(&Graph::complete(4), 3, 1_000_000).unwrap();
        assert_eq!((c.opt_is_2, c.chi, c.holds), (true, 4, true));
        let c = check_coloring_equivalence(&Graph::cycle(5), 2, 1_000_000).unwrap();
        assert_eq!((c.opt_is_2, c.chi, c.holds), (true, 3, true));
    }
}
