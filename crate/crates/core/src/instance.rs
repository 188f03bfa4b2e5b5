//! Broadcast instances: packets, clients and their wants/has sets.
//!
//! Packets and clients are 0-based everywhere. The JSON form is
//!
//! ```json
//! {"num_packets": 4, "clients": [{"wants": [0], "has": [1, 2]}], "note": "optional"}
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::MatrixQ;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Client {
    pub wants: Vec<usize>,
    pub has: Vec<usize>,
}

impl Client {
    /// Sorts and deduplicates both sets.
    pub fn new(wants: impl IntoIterator<Item = usize>, has: impl IntoIterator<Item = usize>) -> Client {
        let set = |it: &mut dyn Iterator<Item = usize>| -> Vec<usize> {
            it.collect::<BTreeSet<_>>().into_iter().collect()
        };
        Client {
            wants: set(&mut wants.into_iter()),
            has: set(&mut has.into_iter()),
        }
    }

    /// Bitmask of the has set; packets must be < 64.
    pub fn has_mask(&self) -> u64 {
        self.has.iter().fold(0, |m, &p| m | 1 << p)
    }

    fn canonicalize(&mut self) {
        self.wants.sort_unstable();
        self.wants.dedup();
        self.has.sort_unstable();
        self.has.dedup();
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub num_packets: usize,
    pub clients: Vec<Client>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    IndexOutOfRange { client: usize, packet: usize },
    Overlap { client: usize, packet: usize },
    EmptyWants { client: usize },
    UnwantedPacket { packet: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IndexOutOfRange { client, packet } => {
                write!(f, "client {client}: packet index {packet} out of range")
            }
            Violation::Overlap { client, packet } => {
                write!(f, "client {client}: packet {packet} is both wanted and held")
            }
            Violation::EmptyWants { client } => write!(f, "client {client}: empty wants set"),
            Violation::UnwantedPacket { packet } => write!(f, "packet {packet} is wanted by no client"),
        }
    }
}

/// All invariant violations of an instance; empty means canonical.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    /// True if the only problems are packets nobody wants.
    pub fn only_unwanted(&self) -> bool {
        self.violations
            .iter()
            .all(|v| matches!(v, Violation::UnwantedPacket { .. }))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// How a normalized instance relates to its source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalization {
    /// For each new client: (original client, original packet it wants).
    pub client_origin: Vec<(usize, usize)>,
    /// Original packet index -> new index (None if dropped).
    pub packet_map: Vec<Option<usize>>,
    /// New packet index -> original index.
    pub kept_packets: Vec<usize>,
}

impl Normalization {
    /// Embed a solution over the normalized packets into the original packet
    /// space (dropped packets get zero coefficients).
    pub fn lift(&self, m: &MatrixQ) -> MatrixQ {
        let n_orig = self.packet_map.len();
        let mut out = MatrixQ::zeros(m.field(), m.rows(), n_orig);
        for r in 0..m.rows() {
            for (new, &old) in self.kept_packets.iter().enumerate() {
                out.set(r, old, m.get(r, new));
            }
        }
        out
    }

    /// Restrict a solution over the original packets to the kept ones.
    pub fn project(&self, m: &MatrixQ) -> MatrixQ {
        m.select_cols(&self.kept_packets)
    }
}

/// Random has-set model for generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HasSpec {
    /// Uniform subset of fixed size.
    FixedCard(usize),
    /// Each other packet independently with this probability.
    IncludeProb(f64),
}

impl Instance {
    pub fn new(num_packets: usize, clients: Vec<Client>) -> Instance {
        let mut inst = Instance {
            num_packets,
            clients,
            note: None,
        };
        inst.clients.iter_mut().for_each(Client::canonicalize);
        inst
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Instance {
        self.note = Some(note.into());
        self
    }

    pub fn num_clients(&self) -> usize {
        self.clients.len()
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.num_packets;
        let mut violations = Vec::new();
        let mut wanted = vec![false; n];
        for (i, c) in self.clients.iter().enumerate() {
            for &p in c.wants.iter().chain(&c.has) {
                if p >= n {
                    violations.push(Violation::IndexOutOfRange { client: i, packet: p });
                }
            }
            for &p in &c.wants {
                if p < n {
                    wanted[p] = true;
                }
                if c.has.binary_search(&p).is_ok() {
                    violations.push(Violation::Overlap { client: i, packet: p });
                }
            }
            if c.wants.is_empty() {
                violations.push(Violation::EmptyWants { client: i });
            }
        }
        for (p, w) in wanted.into_iter().enumerate() {
            if !w {
                violations.push(Violation::UnwantedPacket { packet: p });
            }
        }
        ValidationReport { violations }
    }

    pub fn is_canonical(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn is_singleton_wants(&self) -> bool {
        self.clients.iter().all(|c| c.wants.len() == 1)
    }

    /// Largest wants set.
    pub fn max_wants(&self) -> usize {
        self.clients.iter().map(|c| c.wants.len()).max().unwrap_or(0)
    }

    /// Split multi-want clients into singleton-want clients with the same has
    /// set, and drop packets no client wants (reindexing the rest densely).
    pub fn normalize(&self) -> Result<(Instance, Normalization)> {
        let report = self.validate();
        if !report.only_unwanted() {
            return Err(Error::InvalidInstance(report));
        }
        let mut wanted = vec![false; self.num_packets];
        for c in &self.clients {
            for &p in &c.wants {
                wanted[p] = true;
            }
        }
        let mut packet_map = vec![None; self.num_packets];
        let mut kept_packets = Vec::new();
        for (p, w) in wanted.iter().enumerate() {
            if *w {
                packet_map[p] = Some(kept_packets.len());
                kept_packets.push(p);
            }
        }
        let mut clients = Vec::new();
        let mut client_origin = Vec::new();
        for (i, c) in self.clients.iter().enumerate() {
            let has: Vec<usize> = c.has.iter().filter_map(|&p| packet_map[p]).collect();
            for &w in &c.wants {
                clients.push(Client {
                    wants: vec![packet_map[w].expect("wanted packet kept")],
                    has: has.clone(),
                });
                client_origin.push((i, w));
            }
        }
        let out = Instance {
            num_packets: kept_packets.len(),
            clients,
            note: self.note.clone(),
        };
        Ok((
            out,
            Normalization {
                client_origin,
                packet_map,
                kept_packets,
            },
        ))
    }

    pub fn parse(text: &str) -> Result<Instance> {
        let mut inst: Instance = serde_json::from_str(text)?;
        inst.clients.iter_mut().for_each(Client::canonicalize);
        for (i, c) in inst.clients.iter().enumerate() {
            for (name, set) in [("wants", &c.wants), ("has", &c.has)] {
                if let Some(&p) = set.iter().find(|&&p| p >= inst.num_packets) {
                    return Err(Error::Parse(format!(
                        "clients[{i}].{name}: packet index {p} out of range (num_packets = {})",
                        inst.num_packets
                    )));
                }
            }
        }
        Ok(inst)
    }

    pub fn serialize(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn builtin(name: &str) -> Result<Instance> {
        match name {
            "table1" => Ok(table1()),
            "table2" => Ok(table2()),
            _ => Err(Error::UnknownBuiltin(name.to_string())),
        }
    }

    /// `n` clients, client `i` wants packet `i`, has set drawn by `spec` from
    /// the other packets using sub-stream `i` of `seed`.
    pub fn gen_random(n: usize, spec: HasSpec, seed: u64) -> Result<Instance> {
        if n == 0 {
            return Err(Error::InvalidParam("n must be at least 1".into()));
        }
        match spec {
            HasSpec::FixedCard(d) if d >= n => {
                return Err(Error::InvalidParam(format!("has cardinality {d} must be < n = {n}")))
            }
            HasSpec::IncludeProb(p) if !(0.0..=1.0).contains(&p) => {
                return Err(Error::InvalidParam(format!("probability {p} not in [0, 1]")))
            }
            _ => {}
        }
        let clients = (0..n)
            .map(|i| {
                let mut r = rng::stream(rng::derive(seed, i as u64));
                let pool: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                let has = match spec {
                    HasSpec::FixedCard(d) => rng::sample_subset(&mut r, &pool, d),
                    HasSpec::IncludeProb(p) => {
                        pool.into_iter().filter(|_| rng::unit_f64(&mut r) < p).collect()
                    }
                };
                Client { wants: vec![i], has }
            })
            .collect();
        Ok(Instance {
            num_packets: n,
            clients,
            note: None,
        })
    }
}

fn complement_client(n: usize, wants: &[usize]) -> Client {
    Client::new(wants.iter().copied(), (0..n).filter(|p| !wants.contains(p)))
}

/// Four packets, one client per pair of packets, each holding the other two.
fn table1() -> Instance {
    let pairs: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
    Instance::new(4, pairs.iter().map(|w| complement_client(4, w)).collect())
        .with_note("table1: OPT(2) = 3, OPT(3) = 2")
}

/// Seven packets, ten clients; three transmissions suffice only in odd characteristic.
fn table2() -> Instance {
    let wants: [&[usize]; 10] = [
        &[0],
        &[1],
        &[2],
        &[1, 3],
        &[2, 4],
        &[2, 5],
        &[3, 6],
        &[4, 6],
        &[5, 6],
        &[3, 4, 5],
    ];
    Instance::new(7, wants.iter().map(|w| complement_client(7, w)).collect())
        .with_note("table2: OPT(q) = 3 in odd characteristic, > 3 in characteristic 2")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        let t1 = Instance::builtin("table1").unwrap();
        assert!(t1.validate().is_empty());
        assert_eq!(t1.clients[0], Client::new([0, 1], [2, 3]));
        assert_eq!(t1.num_clients(), 6);

        let t2 = Instance::builtin("table2").unwrap();
        assert_eq!((t2.num_packets, t2.num_clients()), (7, 10));
        assert_eq!(t2.clients[9], Client::new([3, 4, 5], [0, 1, 2, 6]));
        assert!(t2.is_canonical());

        assert!(matches!(Instance::builtin("table3"), Err(Error::UnknownBuiltin(_))));
    }

    #[test]
    fn validation_violations() {
        let overlap = Instance::new(1, vec![Client::new([0], [0])]);
        assert_eq!(
            overlap.validate().violations,
            vec![Violation::Overlap { client: 0, packet: 0 }]
        );
        let unwanted = Instance::new(3, vec![Client::new([0], [1]), Client::new([1], [])]);
        assert_eq!(
            unwanted.validate().violations,
            vec![Violation::UnwantedPacket { packet: 2 }]
        );
        let bad = Instance::new(2, vec![Client::new([], [5])]);
        let v = bad.validate().violations;
        assert!(v.contains(&Violation::IndexOutOfRange { client: 0, packet: 5 }));
        assert!(v.contains(&Violation::EmptyWants { client: 0 }));
    }

    #[test]
    fn normalize_table1() {
        let t1 = Instance::builtin("table1").unwrap();
        let (norm, map) = t1.normalize().unwrap();
        assert_eq!(norm.num_clients(), 12);
        assert_eq!(norm.num_packets, 4);
        assert!(norm.is_singleton_wants());
        assert_eq!(map.client_origin[0], (0, 0));
        assert_eq!(map.client_origin[1], (0, 1));
        assert_eq!(norm.clients[1], Client::new([1], [2, 3]));
        let (again, map2) = norm.normalize().unwrap();
        assert_eq!(again, norm);
        assert_eq!(map2.kept_packets, vec![0, 1, 2, 3]);
    }

    #[test]
    fn normalize_drops_unwanted() {
        let inst = Instance::new(3, vec![Client::new([0], [2]), Client::new([1], [0, 2])]);
        let (norm, map) = inst.normalize().unwrap();
        assert_eq!(norm.num_packets, 2);
        assert_eq!(map.packet_map, vec![Some(0), Some(1), None]);
        assert_eq!(norm.clients[0], Client::new([0], []));
        assert_eq!(norm.clients[1], Client::new([1], [0]));

        let overlap = Instance::new(1, vec![Client::new([0], [0])]);
        assert!(matches!(overlap.normalize(), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let t1 = Instance::builtin("table1").unwrap();
        let text = t1.serialize();
        assert!(text.starts_with(r#"{"num_packets":4,"clients":[{"wants":[0,1],"has":[2,3]}"#));
        assert_eq!(Instance::parse(&text).unwrap(), t1);

        assert!(matches!(Instance::parse("{\"num_packets\": 2,"), Err(Error::Parse(_))));
        let e = Instance::parse(r#"{"num_packets":2,"clients":[{"wants":[0],"has":[2]}]}"#);
        match e {
            Err(Error::Parse(msg)) => assert!(msg.contains("clients[0].has"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Instance::parse(r#"{"num_packets":1,"clients":[],"extra":1}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn gen_random_contract() {
        let a = Instance::gen_random(7, HasSpec::FixedCard(3), 42).unwrap();
        let b = Instance::gen_random(7, HasSpec::FixedCard(3), 42).unwrap();
        assert_eq!(a, b);
        assert!(a.is_canonical());
        for (i, c) in a.clients.iter().enumerate() {
            assert_eq!(c.wants, vec![i]);
            assert_eq!(c.has.len(), 3);
            assert!(!c.has.contains(&i));
        }
        let z = Instance::gen_random(5, HasSpec::FixedCard(0), 1).unwrap();
        assert!(z.clients.iter().all(|c| c.has.is_empty()));
        let full = Instance::gen_random(5, HasSpec::IncludeProb(1.0), 1).unwrap();
        assert!(full.clients.iter().all(|c| c.has.len() == 4));
        assert!(Instance::gen_random(0, HasSpec::FixedCard(0), 1).is_err());
        assert!(Instance::gen_random(3, HasSpec::FixedCard(3), 1).is_err());
        assert!(Instance::gen_random(3, HasSpec::IncludeProb(1.5), 1).is_err());
    }
}
