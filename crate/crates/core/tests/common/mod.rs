//! Test-only oracles. Nothing here calls the solver or linear algebra code.
#![allow(dead_code)]

use std::collections::BTreeSet;

use index_coding::rng;
use index_coding::{Client, Graph, Instance};

/// All vectors of GF(p)^n, `p` prime, in base-p counting order.
pub fn all_vectors(n: usize, p: u32) -> Vec<Vec<u32>> {
    let total = (p as usize).pow(n as u32);
    (0..total)
        .map(|mut x| {
            let mut v = vec![0; n];
            for c in v.iter_mut().rev() {
                *c = (x % p as usize) as u32;
                x /= p as usize;
            }
            v
        })
        .collect()
}

/// Every linear combination of `rows` over GF(p).
pub fn span(rows: &[Vec<u32>], n: usize, p: u32) -> Vec<Vec<u32>> {
    all_vectors(rows.len(), p)
        .into_iter()
        .map(|y| {
            let mut s = vec![0; n];
            for (coef, row) in y.iter().zip(rows) {
                for j in 0..n {
                    s[j] = (s[j] + coef * row[j]) % p;
                }
            }
            s
        })
        .collect()
}

/// Brute force: every client decodes each wanted packet from some combination
/// of `rows` after cancelling its has set.
pub fn feasible(inst: &Instance, rows: &[Vec<u32>], p: u32) -> bool {
    let n = inst.num_packets;
    let sp = span(rows, n, p);
    inst.clients.iter().all(|c| {
        c.wants.iter().all(|&w| {
            sp.iter().any(|s| {
                (0..n).all(|j| {
                    if j == w {
                        s[j] == 1
                    } else {
                        s[j] == 0 || c.has.contains(&j)
                    }
                })
            })
        })
    })
}

/// Is any set of `k` vectors of GF(p)^n feasible? Scans multisets of rows.
pub fn any_feasible_with(inst: &Instance, k: usize, p: u32) -> bool {
    let vecs = all_vectors(inst.num_packets, p);
    let mut idx = vec![0usize; k];
    loop {
        let rows: Vec<Vec<u32>> = idx.iter().map(|&i| vecs[i].clone()).collect();
        if feasible(inst, &rows, p) {
            return true;
        }
        // next non-decreasing index tuple
        let Some(pos) = (0..k).rev().find(|&i| idx[i] + 1 < vecs.len()) else {
            return false;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[pos];
        }
    }
}

/// Random canonical instance with up to `max_n` packets and possibly
/// multi-packet wants; every packet is wanted by someone.
pub fn random_canonical(max_n: usize, seed: u64) -> Instance {
    let mut r = rng::stream(seed);
    let n = 1 + rng::below(&mut r, max_n as u64) as usize;
    let m = 1 + rng::below(&mut r, max_n as u64) as usize;
    let mut clients = Vec::new();
    for _ in 0..m {
        let wants: BTreeSet<usize> = (0..n).filter(|_| rng::below(&mut r, 3) == 0).collect();
        let wants = if wants.is_empty() {
            BTreeSet::from([rng::below(&mut r, n as u64) as usize])
        } else {
            wants
        };
        let has: Vec<usize> = (0..n)
            .filter(|p| !wants.contains(p))
            .filter(|_| rng::below(&mut r, 2) == 0)
            .collect();
        clients.push(Client::new(wants, has));
    }
    for p in 0..n {
        if !clients.iter().any(|c| c.wants.contains(&p)) {
            let has: Vec<usize> = (0..n).filter(|&j| j != p && rng::below(&mut r, 2) == 0).collect();
            clients.push(Client::new([p], has));
        }
    }
    Instance::new(n, clients)
}

/// Chromatic number by trying every assignment of `k` colors, smallest `k` first.
pub fn chromatic_brute(g: &Graph) -> usize {
    let n = g.num_vertices();
    if n == 0 {
        return 0;
    }
    let edges = g.edges();
    for k in 1..=n {
        let total = k.pow(n as u32);
        for mut x in 0..total {
            let mut col = vec![0; n];
            for c in col.iter_mut() {
                *c = x % k;
                x /= k;
            }
            if edges.iter().all(|&(u, v)| col[u] != col[v]) {
                return k;
            }
        }
    }
    n
}

/// Vertex cover number by scanning all vertex subsets.
pub fn vertex_cover_brute(g: &Graph) -> usize {
    let n = g.num_vertices();
    let edges = g.edges();
    (0u32..1 << n)
        .filter(|s| edges.iter().all(|&(u, v)| s >> u & 1 == 1 || s >> v & 1 == 1))
        .map(|s| s.count_ones() as usize)
        .min()
        .unwrap_or(0)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// One representative per isomorphism class of graphs on exactly `v`
/// vertices with at most `max_edges` edges and no isolated vertex.
pub fn graphs_without_isolated(v: usize, max_edges: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..v).flat_map(|a| (a + 1..v).map(move |b| (a, b))).collect();
    let mut index = vec![0u32; v * v];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        index[a * v + b] = i as u32;
        index[b * v + a] = i as u32;
    }
    let perms = permutations(v);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 1u32..1 << pairs.len() {
        if mask.count_ones() as usize > max_edges {
            continue;
        }
        let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        let mut deg = vec![0; v];
        for &(a, b) in &edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        if deg.contains(&0) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| edges.iter().fold(0u32, |m, &(a, b)| m | 1 << index[p[a] * v + p[b]]))
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(Graph::from_edges(v, &edges).unwrap());
        }
    }
    out
}
