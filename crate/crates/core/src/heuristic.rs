//! Memoryless coding via clique covers of the compatibility graph.
//!
//! Two clients are compatible when they want the same packet, or when each
//! holds the packet the other wants. A clique of compatible clients is served
//! by one transmission: the sum of the distinct packets they want. A minimum
//! clique cover is an optimal coloring of the complement graph.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::graph::Graph;
use crate::instance::Instance;
use crate::linalg::MatrixQ;

/// Disjoint cliques covering every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliquePartition {
    pub blocks: Vec<Vec<usize>>,
}

impl CliquePartition {
    /// Blocks from a vertex coloring, ordered by smallest member.
    pub fn from_colors(colors: &[usize]) -> CliquePartition {
        let k = colors.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut blocks = vec![Vec::new(); k];
        for (v, &c) in colors.iter().enumerate() {
            blocks[c].push(v);
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort_by_key(|b| b[0]);
        CliquePartition { blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Blocks partition `0..n` and each block is a clique of `g`.
    pub fn is_valid_for(&self, g: &Graph) -> bool {
        let mut seen = vec![false; g.num_vertices()];
        for b in &self.blocks {
            for &v in b {
                if v >= seen.len() || seen[v] {
                    return false;
                }
                seen[v] = true;
            }
            if !g.is_clique(b) {
                return false;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

pub fn build_compatibility_graph(inst: &Instance) -> Result<Graph> {
    if let Some(i) = inst.clients.iter().position(|c| c.wants.len() != 1) {
        return Err(Error::NotNormalized(i));
    }
    let m = inst.clients.len();
    let mut g = Graph::empty(m);
    for i in 0..m {
        for j in i + 1..m {
            let (a, b) = (&inst.clients[i], &inst.clients[j]);
            let (wa, wb) = (a.wants[0], b.wants[0]);
            if wa == wb || (b.has.binary_search(&wa).is_ok() && a.has.binary_search(&wb).is_ok()) {
                g.add_edge(i, j)?;
            }
        }
    }
    Ok(g)
}

/// DSATUR coloring; ties by saturation desc, degree desc, index asc.
pub fn dsatur(g: &Graph) -> Vec<usize> {
    let n = g.num_vertices();
    let degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut colors: Vec<Option<usize>> = vec![None; n];
    let mut neighbor_colors: Vec<Vec<bool>> = vec![Vec::new(); n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| colors[v].is_none())
            .max_by(|&a, &b| {
                let sat = |x: usize| neighbor_colors[x].iter().filter(|&&c| c).count();
                (sat(a), degree[a])
                    .cmp(&(sat(b), degree[b]))
                    .then(b.cmp(&a))
            })
            .expect("uncolored vertex remains");
        let c = (0..)
            .find(|&c| !neighbor_colors[v].get(c).copied().unwrap_or(false))
            .expect("some color is free");
        colors[v] = Some(c);
        for u in g.neighbors(v) {
            let nc = &mut neighbor_colors[u];
            if nc.len() <= c {
                nc.resize(c + 1, false);
            }
            nc[c] = true;
        }
    }
    colors.into_iter().map(|c| c.expect("all colored")).collect()
}

/// Greedy clique cover: DSATUR on the complement.
pub fn clique_cover_greedy(g: &Graph) -> CliquePartition {
    CliquePartition::from_colors(&dsatur(&g.complement()))
}

struct ColorSearch<'a> {
    g: &'a Graph,
    colors: Vec<usize>,
    best: Option<Vec<usize>>,
    best_k: usize,
    nodes: u64,
    budget: u64,
}

impl ColorSearch<'_> {
    fn go(&mut self, v: usize, used: usize) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        if used >= self.best_k {
            return true;
        }
        if v == self.g.num_vertices() {
            self.best_k = used;
            self.best = Some(self.colors.clone());
            return true;
        }
        for c in 0..=used {
            let now_used = used.max(c + 1);
            if now_used >= self.best_k {
                break;
            }
            if (0..v).any(|u| self.colors[u] == c && self.g.has_edge(u, v)) {
                continue;
            }
            self.colors[v] = c;
            if !self.go(v + 1, now_used) {
                return false;
            }
        }
        true
    }
}

/// Optimal coloring of `g` by branch and bound over vertices in index order,
/// colors tried ascending. `budget` bounds the number of search nodes.
pub fn optimal_coloring(g: &Graph, budget: u64) -> Result<Vec<usize>> {
    let n = g.num_vertices();
    if n == 0 {
        return Ok(Vec::new());
    }
    let upper = dsatur(g).iter().max().map_or(0, |&c| c + 1);
    let mut s = ColorSearch {
        g,
        colors: vec![0; n],
        best: None,
        best_k: upper + 1,
        nodes: 0,
        budget,
    };
    if !s.go(0, 0) {
        return Err(Error::BudgetExceeded {
            what: "clique cover search",
            needed: format!("more than {budget} nodes"),
            budget,
        });
    }
    Ok(s.best.expect("the greedy bound is attainable"))
}

/// Minimum clique partition: optimal coloring of the complement.
pub fn clique_cover_exact(g: &Graph, budget: u64) -> Result<CliquePartition> {
    Ok(CliquePartition::from_colors(&optimal_coloring(&g.complement(), budget)?))
}

/// One transmission per block: the sum of the block's distinct wanted packets.
pub fn transmissions_from_partition(
    inst: &Instance,
    part: &CliquePartition,
    field: &Field,
) -> Result<MatrixQ> {
    let g = build_compatibility_graph(inst)?;
    let mut seen = vec![false; inst.clients.len()];
    for b in &part.blocks {
        for &v in b {
            if v >= seen.len() || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidParam(format!("client {v} missing or repeated in partition")));
            }
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidParam(format!("client {v} not covered by partition")));
    }
    let mut m = MatrixQ::zeros(field, 0, inst.num_packets);
    for (i, b) in part.blocks.iter().enumerate() {
        if !g.is_clique(b) {
            return Err(Error::NotAClique(i));
        }
        let mut row = vec![0 as Elem; inst.num_packets];
        for &v in b {
            row[inst.clients[v].wants[0]] = 1;
        }
        m.push_row(&row)?;
    }
    Ok(m)
}

/// Can every client decode its packet from one transmitted row plus its has set?
pub fn memoryless_decodable(inst: &Instance, phi: &MatrixQ) -> bool {
    inst.clients.iter().all(|c| {
        let w = c.wants[0];
        phi.row_iter().any(|row| {
            row[w] != 0
                && row
                    .iter()
                    .enumerate()
                    .all(|(j, &x)| x == 0 || j == w || c.has.binary_search(&j).is_ok())
        })
    })
}
