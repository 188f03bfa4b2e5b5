//! Feasibility checks and exact minimum transmission counts over GF(q).
//!
//! A set of encoding vectors `Phi` satisfies a client that wants packet `w`
//! and holds `H` iff the unit vector `e_w` lies in `span(Phi) + span{e_j : j in H}`.
//!
//! Two exact routes compute the minimum:
//!
//! * [`Strategy::DualSearch`] (default) searches the dual side. `S` is
//!   feasible iff no vector `z` of `S^perp` has `z_w != 0` while vanishing on
//!   `H` for some client `(w, H)`. Whether a vector is allowed in `S^perp`
//!   depends only on its support, and allowed codes are closed under taking
//!   subspaces, so the optimum is `n - d` where `d` is the largest dimension
//!   of a code whose nonzero vectors all have allowed support. The search is
//!   a branch and bound over such codes, built one projective point at a
//!   time.
//! * [`Strategy::SubspaceScan`] walks candidate spans directly with
//!   [`SubspaceIter`] for `k = k_lo, k_lo + 1, ...` and returns the first
//!   feasible one.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::instance::Instance;
use crate::linalg::{MatrixQ, SubspaceIter};

pub const DEFAULT_BUDGET: u64 = 10_000_000;
pub const DEFAULT_FIELDS: [u32; 5] = [2, 3, 4, 5, 7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Exact,
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    DualSearch,
    SubspaceScan,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Maximum number of subspaces (search nodes) examined.
    pub budget: u64,
    pub strategy: Strategy,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            budget: DEFAULT_BUDGET,
            strategy: Strategy::DualSearch,
        }
    }
}

impl SolveOptions {
    pub fn with_budget(budget: u64) -> Self {
        SolveOptions {
            budget,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub q: u32,
    /// OPT(q) when exact; the best upper bound found otherwise.
    pub opt: usize,
    /// `opt` linearly independent encoding vectors over the input's packets.
    pub witness: MatrixQ,
    pub subspaces_examined: BigUint,
    pub status: Status,
    /// Proven lower bound (equals `opt` when exact).
    pub lower_bound: usize,
}

/// Wire form of a solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub q: u32,
    pub opt: usize,
    pub vectors: Vec<Vec<u32>>,
    pub status: Status,
    pub subspaces_examined: String,
}

impl SolveResult {
    pub fn to_json(&self) -> SolutionJson {
        SolutionJson {
            q: self.q,
            opt: self.opt,
            vectors: self.witness.row_vecs(),
            status: self.status,
            subspaces_examined: self.subspaces_examined.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decoding {
    pub packet: usize,
    /// `y` as coefficients over the rows of `Phi`, when decodable.
    pub coefficients: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClientCheck {
    pub client: usize,
    pub satisfied: bool,
    pub decodings: Vec<Decoding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub satisfied: bool,
    pub clients: Vec<ClientCheck>,
}

impl VerifyReport {
    pub fn unsatisfied(&self) -> Vec<usize> {
        self.clients
            .iter()
            .filter(|c| !c.satisfied)
            .map(|c| c.client)
            .collect()
    }
}

fn check_instance(inst: &Instance) -> Result<()> {
    let report = inst.validate();
    if report.only_unwanted() {
        Ok(())
    } else {
        Err(Error::InvalidInstance(report))
    }
}

/// Check every client against `phi` (columns = the instance's packets).
/// Multi-want clients must decode each wanted packet.
pub fn verify_solution(inst: &Instance, phi: &MatrixQ) -> Result<VerifyReport> {
    check_instance(inst)?;
    let n = inst.num_packets;
    if phi.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: phi.cols(),
        });
    }
    let mut clients = Vec::with_capacity(inst.clients.len());
    for (i, c) in inst.clients.iter().enumerate() {
        let open: Vec<usize> = (0..n).filter(|p| c.has.binary_search(p).is_err()).collect();
        let restricted = phi.select_cols(&open);
        let mut decodings = Vec::with_capacity(c.wants.len());
        for &w in &c.wants {
            let target: Vec<Elem> = open.iter().map(|&p| (p == w) as Elem).collect();
            let coefficients = restricted
                .express(&target)?
                .map(|y| y.into_iter().map(u32::from).collect());
            decodings.push(Decoding {
                packet: w,
                coefficients,
            });
        }
        clients.push(ClientCheck {
            client: i,
            satisfied: decodings.iter().all(|d| d.coefficients.is_some()),
            decodings,
        });
    }
    Ok(VerifyReport {
        satisfied: clients.iter().all(|c| c.satisfied),
        clients,
    })
}

/// Transmissions needed without coding: the number of distinct wanted packets.
pub fn no_coding_baseline(inst: &Instance) -> usize {
    let mut wanted: Vec<usize> = inst.clients.iter().flat_map(|c| c.wants.iter().copied()).collect();
    wanted.sort_unstable();
    wanted.dedup();
    wanted.len()
}

/// `max(ceil(n / (L + 1)), max |W|)` for an instance and its normalized form.
fn lower_bound(inst: &Instance, norm: &Instance) -> usize {
    let n = norm.num_packets;
    let big_l = norm.clients.iter().map(|c| c.has.len()).max().unwrap_or(0);
    n.div_ceil(big_l + 1).max(inst.max_wants())
}

/// OPT(q): the minimum number of transmissions over GF(q).
///
/// Any valid instance is accepted; it is normalized internally and the
/// witness is returned over the original packet indices. On budget
/// exhaustion the error carries the best solution found so far.
pub fn opt_q(inst: &Instance, q: u32, opts: SolveOptions) -> Result<SolveResult> {
    let field = Field::new(q)?;
    let (norm, map) = inst.normalize()?;
    let k_lo = lower_bound(inst, &norm);
    let outcome = match opts.strategy {
        Strategy::DualSearch => dual_search(&norm, &field, k_lo, opts.budget),
        Strategy::SubspaceScan => subspace_scan(&norm, &field, k_lo, opts.budget),
    };
    let lift = |mut r: SolveResult| {
        r.witness = map.lift(&r.witness);
        r
    };
    match outcome {
        Ok(r) => {
            let r = lift(r);
            debug_assert!(verify_solution(inst, &r.witness).map(|v| v.satisfied).unwrap_or(false));
            Ok(r)
        }
        Err(Error::SearchBudgetExceeded(r)) => Err(Error::SearchBudgetExceeded(Box::new(lift(*r)))),
        Err(e) => Err(e),
    }
}

/// Per-packet demand masks: for packet `w`, the has-masks of clients wanting it.
fn demand_masks(norm: &Instance) -> Vec<Vec<u64>> {
    let mut demands = vec![Vec::new(); norm.num_packets];
    for c in &norm.clients {
        let m = c.has_mask();
        let w = c.wants[0];
        if !demands[w].contains(&m) {
            demands[w].push(m);
        }
    }
    demands
}

/// Supports up to this many packets get a precomputed allowed table.
const SUPPORT_TABLE_BITS: usize = 16;

/// Largest instance the dual search accepts: its root enumerates `2^n - 1`
/// candidate rows.
const MAX_DUAL_PACKETS: usize = 30;

struct DualSearch<'a> {
    field: &'a Field,
    n: usize,
    demands: Vec<Vec<u64>>,
    support_table: Vec<bool>,
    budget: u64,
    nodes: u64,
    best: Vec<Vec<Elem>>,
    target: usize,
    stop: bool,
}

/// A candidate generator row: 1 at `pivot`, zero before it and at every
/// chosen pivot.
struct Row {
    pivot: usize,
    v: Vec<Elem>,
}

fn support(v: &[Elem]) -> u64 {
    v.iter()
        .enumerate()
        .fold(0, |m, (i, &x)| if x != 0 { m | 1 << i } else { m })
}

impl DualSearch<'_> {
    /// May a dual vector with this support exist?
    fn allowed(&self, support: u64) -> bool {
        if !self.support_table.is_empty() {
            return self.support_table[support as usize];
        }
        self.allowed_slow(support)
    }

    fn allowed_slow(&self, support: u64) -> bool {
        let mut m = support;
        while m != 0 {
            let w = m.trailing_zeros() as usize;
            m &= m - 1;
            if self.demands[w].iter().any(|&h| support & h == 0) {
                return false;
            }
        }
        true
    }

    /// Root candidates: every row whose entries after the pivot are 0 or 1
    /// and whose support is allowed, by pivot descending.
    fn root_rows(&self) -> Vec<Row> {
        let n = self.n;
        let mut rows = Vec::new();
        for pivot in (0..n).rev() {
            let tail = n - pivot - 1;
            for bits in 0..1u64 << tail {
                let s = 1 << pivot | bits << (pivot + 1);
                if self.allowed(s) {
                    let v = (0..n).map(|j| (s >> j & 1) as Elem).collect();
                    rows.push(Row { pivot, v });
                }
            }
        }
        rows
    }

    /// Is `span(S, r)` allowed, given that `span(S)` is? `span` lists `S`.
    fn extends(&self, span: &[Elem], r: &[Elem]) -> bool {
        let f = self.field;
        span.chunks_exact(self.n).all(|s| {
            let mut m = 0u64;
            for (j, (&a, &b)) in s.iter().zip(r).enumerate() {
                if f.add(a, b) != 0 {
                    m |= 1 << j;
                }
            }
            self.allowed(m)
        })
    }

    /// Codes are built as reduced echelon generators, one row at a time in
    /// decreasing pivot order. Scaling a coordinate preserves supports, so
    /// in a column no earlier row touches the new row may be taken 0 or 1.
    /// `span` lists every vector of the current code, zero first; `touched`
    /// is the union of the chosen rows' supports.
    fn dfs(&mut self, rows: &mut Vec<Vec<Elem>>, span: &[Elem], touched: u64, cands: &[Row]) {
        if self.stop {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.stop = true;
            return;
        }
        let dim = rows.len();
        if dim > self.best.len() {
            self.best = rows.clone();
            if dim >= self.target {
                self.stop = true;
                return;
            }
        }
        // pivots still available below each candidate
        let mut pivots: Vec<usize> = cands.iter().map(|c| c.pivot).collect();
        pivots.dedup();
        let f = self.field.clone();
        let n = self.n;
        let q = f.order() as usize;
        for (idx, c) in cands.iter().enumerate() {
            let below = pivots.iter().filter(|&&p| p < c.pivot).count();
            if self.stop || dim + 1 + below <= self.best.len() {
                return;
            }
            let mut new_span = Vec::with_capacity(span.len() * q);
            new_span.extend_from_slice(span);
            for a in 1..q {
                for s in span.chunks_exact(n) {
                    let start = new_span.len();
                    new_span.extend_from_slice(s);
                    f.axpy(&mut new_span[start..], a as Elem, &c.v);
                }
            }
            let shifted = &new_span[span.len()..];
            let fresh: Vec<usize> = (0..n)
                .filter(|&j| j != c.pivot && c.v[j] != 0 && touched >> j & 1 == 0)
                .collect();
            let mut child = Vec::new();
            for d in &cands[idx + 1..] {
                if d.pivot == c.pivot || d.v[c.pivot] != 0 {
                    continue;
                }
                // columns newly touched by c: a 1 there may become any nonzero value
                let free: Vec<usize> = fresh.iter().copied().filter(|&j| d.v[j] != 0).collect();
                let mut v = d.v.clone();
                let mut digits = vec![1 as Elem; free.len()];
                loop {
                    for (&j, &x) in free.iter().zip(&digits) {
                        v[j] = x;
                    }
                    if self.extends(shifted, &v) {
                        child.push(Row {
                            pivot: d.pivot,
                            v: v.clone(),
                        });
                    }
                    let Some(k) = digits.iter().position(|&x| (x as usize) < q - 1) else {
                        break;
                    };
                    digits[k] += 1;
                    digits[..k].iter_mut().for_each(|x| *x = 1);
                }
            }
            rows.push(c.v.clone());
            self.dfs(rows, &new_span, touched | support(&c.v), &child);
            rows.pop();
        }
    }
}

fn dual_search(norm: &Instance, field: &Field, k_lo: usize, budget: u64) -> Result<SolveResult> {
    let n = norm.num_packets;
    let q = field.order();
    let fallback = |lower_bound: usize| SolveResult {
        q,
        opt: n,
        witness: MatrixQ::identity(field, n),
        subspaces_examined: BigUint::from(0u32),
        status: Status::BudgetExceeded,
        lower_bound,
    };
    if n > MAX_DUAL_PACKETS || (1u64 << n) - 1 > budget {
        return Err(Error::SearchBudgetExceeded(Box::new(fallback(k_lo))));
    }

    let mut search = DualSearch {
        field,
        n,
        demands: demand_masks(norm),
        support_table: Vec::new(),
        budget,
        nodes: 0,
        best: Vec::new(),
        target: n - k_lo.min(n),
        stop: false,
    };
    if n <= SUPPORT_TABLE_BITS {
        search.support_table = (0..1u64 << n).map(|s| search.allowed_slow(s)).collect();
    }
    let cands = search.root_rows();
    let zero = vec![0 as Elem; n];
    search.dfs(&mut Vec::new(), &zero, 0, &cands);

    let witness = if search.best.is_empty() {
        MatrixQ::identity(field, n)
    } else {
        MatrixQ::from_elem_rows(field, n, &search.best).nullspace()
    };
    let exhausted = search.nodes > search.budget;
    let result = SolveResult {
        q,
        opt: witness.rows(),
        witness,
        subspaces_examined: BigUint::from(search.nodes.min(search.budget)),
        status: if exhausted { Status::BudgetExceeded } else { Status::Exact },
        lower_bound: if exhausted { k_lo } else { n - search.best.len() },
    };
    if exhausted {
        Err(Error::SearchBudgetExceeded(Box::new(result)))
    } else {
        Ok(result)
    }
}

/// Is `basis` (rows spanning S) feasible for the singleton-want instance?
pub(crate) fn span_feasible(norm: &Instance, basis: &MatrixQ) -> bool {
    norm.clients.iter().all(|c| {
        let mut proj = basis.clone();
        for r in 0..proj.rows() {
            for &h in &c.has {
                proj.set(r, h, 0);
            }
        }
        let mut e = vec![0 as Elem; norm.num_packets];
        e[c.wants[0]] = 1;
        proj.in_span(&e).expect("dimensions agree")
    })
}

fn subspace_scan(norm: &Instance, field: &Field, k_lo: usize, budget: u64) -> Result<SolveResult> {
    let n = norm.num_packets;
    let q = field.order();
    let mut examined: u64 = 0;
    for k in k_lo.min(n)..=n {
        let iter = match SubspaceIter::new(n, k, field, budget - examined) {
            Ok(it) => it,
            Err(Error::BudgetExceeded { .. }) => {
                return Err(Error::SearchBudgetExceeded(Box::new(SolveResult {
                    q,
                    opt: n,
                    witness: MatrixQ::identity(field, n),
                    subspaces_examined: BigUint::from(examined),
                    status: Status::BudgetExceeded,
                    lower_bound: k,
                })))
            }
            Err(e) => return Err(e),
        };
        for basis in iter {
            examined += 1;
            if span_feasible(norm, &basis) {
                return Ok(SolveResult {
                    q,
                    opt: k,
                    witness: basis,
                    subspaces_examined: BigUint::from(examined),
                    status: Status::Exact,
                    lower_bound: k,
                });
            }
        }
    }
    unreachable!("the full space is always feasible")
}

/// Minimum over a list of fields. This is the best value among the tested
/// fields only, not the minimum over all finite fields.
#[derive(Debug, Clone)]
pub struct MultiResult {
    pub results: BTreeMap<u32, Result<SolveResult, Box<SolveResult>>>,
    /// (q, opt) of the smallest exact result; ties go to the smaller field.
    pub best: Option<(u32, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiJson {
    pub label: &'static str,
    pub results: BTreeMap<String, SolutionJson>,
    pub min_q: Option<u32>,
    pub min_opt: Option<usize>,
}

impl MultiResult {
    pub fn to_json(&self) -> MultiJson {
        MultiJson {
            label: "minimum over tested fields",
            results: self
                .results
                .iter()
                .map(|(q, r)| {
                    let j = match r {
                        Ok(s) => s.to_json(),
                        Err(s) => s.to_json(),
                    };
                    (q.to_string(), j)
                })
                .collect(),
            min_q: self.best.map(|b| b.0),
            min_opt: self.best.map(|b| b.1),
        }
    }

    pub fn any_budget_exceeded(&self) -> bool {
        self.results.values().any(|r| r.is_err())
    }
}

pub fn opt_multi(inst: &Instance, fields: &[u32], opts: SolveOptions) -> Result<MultiResult> {
    if fields.is_empty() {
        return Err(Error::InvalidParam("field list is empty".into()));
    }
    let mut results = BTreeMap::new();
    for &q in fields {
        let r = match opt_q(inst, q, opts) {
            Ok(r) => Ok(r),
            Err(Error::SearchBudgetExceeded(partial)) => Err(partial),
            Err(e) => return Err(e),
        };
        results.insert(q, r);
    }
    let best = results
        .iter()
        .filter_map(|(&q, r)| r.as_ref().ok().map(|s| (q, s.opt)))
        .min_by_key(|&(q, opt)| (opt, q));
    Ok(MultiResult { results, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Client;

    fn phi(q: u32, n: usize, rows: &[&[u32]]) -> MatrixQ {
        MatrixQ::from_rows(&Field::new(q).unwrap(), n, rows).unwrap()
    }

    #[test]
    fn known_explicit_solutions_verify() {
        let t1 = Instance::builtin("table1").unwrap();
        let r = verify_solution(&t1, &phi(2, 4, &[&[1, 0, 1, 0], &[0, 1, 1, 0], &[0, 0, 0, 1]])).unwrap();
        assert!(r.satisfied);
        let r = verify_solution(&t1, &phi(3, 4, &[&[1, 0, 1, 1], &[0, 1, 1, 2]])).unwrap();
        assert!(r.satisfied);
        // the same two rows fail over GF(2): (1,0),(0,1),(1,1),(1,0) repeats a column
        let r = verify_solution(&t1, &phi(2, 4, &[&[1, 0, 1, 1], &[0, 1, 1, 0]])).unwrap();
        assert!(!r.satisfied);

        let t2 = Instance::builtin("table2").unwrap();
        let r = verify_solution(
            &t2,
            &phi(
                3,
                7,
                &[&[1, 0, 0, 1, 1, 0, 1], &[0, 1, 0, 1, 0, 1, 1], &[0, 0, 1, 0, 1, 1, 1]],
            ),
        )
        .unwrap();
        assert!(r.satisfied);
        assert_eq!(r.clients.len(), 10);
    }

    #[test]
    fn verify_decoding_coefficients() {
        let inst = Instance::new(2, vec![Client::new([0], [1]), Client::new([1], [0])]);
        let r = verify_solution(&inst, &phi(2, 2, &[&[1, 1]])).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.clients[0].decodings[0].coefficients, Some(vec![1]));
    }

    #[test]
    fn verify_empty_phi_and_mismatch() {
        let inst = Instance::new(1, vec![Client::new([0], [])]);
        let f2 = Field::new(2).unwrap();
        let r = verify_solution(&inst, &MatrixQ::zeros(&f2, 0, 1)).unwrap();
        assert!(!r.satisfied);
        assert_eq!(r.unsatisfied(), vec![0]);
        assert!(matches!(
            verify_solution(&inst, &MatrixQ::zeros(&f2, 0, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn opt_small_cases() {
        let none = Instance::new(3, (0..3).map(|i| Client::new([i], [])).collect());
        for q in [2, 3, 5] {
            let r = opt_q(&none, q, SolveOptions::default()).unwrap();
            assert_eq!(r.opt, 3);
            assert_eq!(r.status, Status::Exact);
        }
        let pair = Instance::new(2, vec![Client::new([0], [1]), Client::new([1], [0])]);
        assert_eq!(opt_q(&pair, 2, SolveOptions::default()).unwrap().opt, 1);
    }

    #[test]
    fn opt_table1() {
        let t1 = Instance::builtin("table1").unwrap();
        for strategy in [Strategy::DualSearch, Strategy::SubspaceScan] {
            let opts = SolveOptions {
                strategy,
                ..Default::default()
            };
            let r2 = opt_q(&t1, 2, opts).unwrap();
            assert_eq!(r2.opt, 3);
            assert!(verify_solution(&t1, &r2.witness).unwrap().satisfied);
            let r3 = opt_q(&t1, 3, opts).unwrap();
            assert_eq!(r3.opt, 2);
            assert_eq!(r3.witness.rank(), 2);
            assert!(verify_solution(&t1, &r3.witness).unwrap().satisfied);
        }
    }

    #[test]
    fn unsupported_field() {
        let t1 = Instance::builtin("table1").unwrap();
        assert!(matches!(opt_q(&t1, 6, SolveOptions::default()), Err(Error::UnsupportedOrder(6))));
    }

    #[test]
    fn budget_exhaustion_reports_partial() {
        let t2 = Instance::builtin("table2").unwrap();
        match opt_q(&t2, 2, SolveOptions::with_budget(3)) {
            Err(Error::SearchBudgetExceeded(r)) => {
                assert_eq!(r.status, Status::BudgetExceeded);
                assert!(r.lower_bound <= r.opt);
                assert!(verify_solution(&t2, &r.witness).unwrap().satisfied);
            }
            other => panic!("{other:?}"),
        }
        let scan = SolveOptions {
            budget: 100,
            strategy: Strategy::SubspaceScan,
        };
        assert!(matches!(opt_q(&t2, 2, scan), Err(Error::SearchBudgetExceeded(_))));
    }

    #[test]
    fn multi_field() {
        let t1 = Instance::builtin("table1").unwrap();
        let m = opt_multi(&t1, &[2, 3], SolveOptions::default()).unwrap();
        assert_eq!(m.best, Some((3, 2)));
        assert_eq!(m.results[&2].as_ref().unwrap().opt, 3);
        assert_eq!(m.to_json().label, "minimum over tested fields");
        assert!(matches!(
            opt_multi(&t1, &[], SolveOptions::default()),
            Err(Error::InvalidParam(_))
        ));
    }

    #[test]
    fn baseline() {
        assert_eq!(no_coding_baseline(&Instance::builtin("table1").unwrap()), 4);
        let dup = Instance::new(1, vec![Client::new([0], []), Client::new([0], [])]);
        assert_eq!(no_coding_baseline(&dup), 1);
    }

}
