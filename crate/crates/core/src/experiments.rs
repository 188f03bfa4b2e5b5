//! Seeded random trials comparing exact, memoryless and greedy coding gains.
//!
//! Trial `i` solves `Instance::gen_random(n, spec, derive(master_seed, i))`.
//! In a sweep the same trial seeds are reused for every has-set cardinality.
//! Gains `n / transmissions` are kept as exact fractions.

use std::fmt::Write as _;
use std::path::Path;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{gain_bounds, BoundsReport, Fraction};
use crate::error::{Error, Result};
use crate::exact::{opt_q, SolveOptions, Status, DEFAULT_BUDGET};
use crate::field::Field;
use crate::heuristic::{build_compatibility_graph, clique_cover_exact, clique_cover_greedy};
use crate::instance::{HasSpec, Instance};
use crate::rng;

pub const CSV_HEADER: &str = "trial,seed,n,has_card,q,method,transmissions,gain_num,gain_den";
pub const BIN_WIDTH: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MemorylessExact,
    Greedy,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MemorylessExact => "memoryless_exact",
            Method::Greedy => "greedy",
        }
    }
}

/// How has sets are drawn. `Sweep([lo, hi])` runs every fixed cardinality
/// `lo..=hi` on the same trial seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HasSetting {
    FixedCard(usize),
    IncludeProb(f64),
    Sweep([usize; 2]),
}

fn default_fields() -> Vec<u32> {
    vec![2]
}

fn default_methods() -> Vec<Method> {
    vec![Method::Exact]
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub trials: usize,
    pub has_spec: HasSetting,
    #[serde(default = "default_fields")]
    pub fields: Vec<u32>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    pub master_seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParam(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.n > 64 {
            return bad(format!("n = {} exceeds 64 packets", self.n));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("method list is empty".into());
        }
        if self.fields.is_empty() {
            return bad("field list is empty".into());
        }
        for &q in &self.fields {
            Field::new(q)?;
        }
        match self.has_spec {
            HasSetting::FixedCard(d) if d >= self.n => bad(format!("has cardinality {d} must be < n")),
            HasSetting::Sweep([lo, hi]) if lo > hi || hi >= self.n => {
                bad(format!("sweep [{lo}, {hi}] must lie within 0..={}", self.n - 1))
            }
            HasSetting::IncludeProb(p) if !(0.0..=1.0).contains(&p) => bad(format!("probability {p} not in [0, 1]")),
            _ => Ok(()),
        }
    }

    fn specs(&self) -> Vec<(Option<usize>, HasSpec)> {
        match self.has_spec {
            HasSetting::FixedCard(d) => vec![(Some(d), HasSpec::FixedCard(d))],
            HasSetting::IncludeProb(p) => vec![(None, HasSpec::IncludeProb(p))],
            HasSetting::Sweep([lo, hi]) => (lo..=hi).map(|d| (Some(d), HasSpec::FixedCard(d))).collect(),
        }
    }

    fn sorted_methods(&self) -> Vec<Method> {
        let mut m = self.methods.clone();
        m.sort_unstable();
        m.dedup();
        m
    }

    fn sorted_fields(&self) -> Vec<u32> {
        let mut f = self.fields.clone();
        f.sort_unstable();
        f.dedup();
        f
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub q: u32,
    /// `None` when the search budget ran out.
    pub transmissions: Option<usize>,
    pub gain: Option<Fraction>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    /// `None` for probabilistic has sets.
    pub has_card: Option<usize>,
    pub bounds: BoundsReport,
    pub results: Vec<MethodResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    pub q: u32,
    pub has_card: Option<usize>,
    pub solved: usize,
    pub budget_exceeded: usize,
    pub mean: Option<Fraction>,
    pub min: Option<Fraction>,
    pub max: Option<Fraction>,
    /// Counts of gains in `[1 + 0.25 i, 1 + 0.25 (i + 1))`, the last bin closed at `n`.
    pub histogram: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub config: ExperimentConfig,
    pub bin_width: f64,
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurvePoint {
    pub has_card: usize,
    pub method: Method,
    pub q: u32,
    pub mean_gain: Option<Fraction>,
}

fn gain(n: usize, t: usize) -> Fraction {
    Fraction::new(n as u64, t as u64)
}

fn run_trial(
    cfg: &ExperimentConfig,
    methods: &[Method],
    fields: &[u32],
    trial: usize,
    has_card: Option<usize>,
    spec: HasSpec,
) -> Result<TrialRecord> {
    let n = cfg.n;
    let seed = rng::derive(cfg.master_seed, trial as u64);
    let inst = Instance::gen_random(n, spec, seed)?;
    let bounds = gain_bounds(&inst)?;
    let (norm, _) = inst.normalize()?;
    let mut results = Vec::new();
    let solved = |method, q, t: usize| MethodResult {
        method,
        q,
        transmissions: Some(t),
        gain: Some(gain(n, t)),
        status: Status::Exact,
    };
    let unsolved = |method, q| MethodResult {
        method,
        q,
        transmissions: None,
        gain: None,
        status: Status::BudgetExceeded,
    };
    for &method in methods {
        let count = match method {
            Method::Exact => None,
            Method::MemorylessExact => {
                let g = build_compatibility_graph(&norm)?;
                match clique_cover_exact(&g, cfg.budget) {
                    Ok(p) => Some(Some(p.len())),
                    Err(e) if e.is_budget() => Some(None),
                    Err(e) => return Err(e),
                }
            }
            Method::Greedy => Some(Some(clique_cover_greedy(&build_compatibility_graph(&norm)?).len())),
        };
        for &q in fields {
            let r = match count {
                Some(Some(t)) => solved(method, q, t),
                Some(None) => unsolved(method, q),
                None => match opt_q(&inst, q, SolveOptions::with_budget(cfg.budget)) {
                    Ok(s) => solved(method, q, s.opt),
                    Err(e) if e.is_budget() => unsolved(method, q),
                    Err(e) => return Err(e),
                },
            };
            results.push(r);
        }
    }
    Ok(TrialRecord {
        trial,
        seed,
        has_card,
        bounds,
        results,
    })
}

fn aggregate(n: usize, method: Method, q: u32, has_card: Option<usize>, records: &[&TrialRecord]) -> Aggregate {
    let gains: Vec<Ratio<u64>> = records
        .iter()
        .flat_map(|r| r.results.iter())
        .filter(|m| m.method == method && m.q == q)
        .filter_map(|m| m.gain.map(Ratio::from))
        .collect();
    let total = records.len();
    let bins = (4 * n.saturating_sub(1)).max(1);
    let mut histogram = vec![0u64; bins];
    for g in &gains {
        let idx = ((g - Ratio::from_integer(1)) * 4).to_integer() as usize;
        histogram[idx.min(bins - 1)] += 1;
    }
    let mean = if gains.is_empty() {
        None
    } else {
        let sum = gains
            .iter()
            .fold(Ratio::<u128>::from_integer(0), |acc, g| acc + Ratio::new(*g.numer() as u128, *g.denom() as u128));
        let m = sum / Ratio::from_integer(gains.len() as u128);
        Some(Fraction {
            num: u64::try_from(*m.numer()).expect("mean numerator fits"),
            den: u64::try_from(*m.denom()).expect("mean denominator fits"),
        })
    };
    Aggregate {
        method,
        q,
        has_card,
        solved: gains.len(),
        budget_exceeded: total - gains.len(),
        mean,
        min: gains.iter().min().map(|&g| g.into()),
        max: gains.iter().max().map(|&g| g.into()),
        histogram,
    }
}

pub fn run_gain_experiment(cfg: &ExperimentConfig) -> Result<GainReport> {
    cfg.validate()?;
    let methods = cfg.sorted_methods();
    let fields = cfg.sorted_fields();
    let specs = cfg.specs();
    let jobs: Vec<(usize, Option<usize>, HasSpec)> = specs
        .iter()
        .flat_map(|&(card, spec)| (0..cfg.trials).map(move |t| (t, card, spec)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(t, card, spec)| run_trial(cfg, &methods, &fields, t, card, spec))
        .collect::<Result<Vec<_>>>()?;

    let mut aggregates = Vec::new();
    for &(card, _) in &specs {
        let group: Vec<&TrialRecord> = records.iter().filter(|r| r.has_card == card).collect();
        for &method in &methods {
            for &q in &fields {
                aggregates.push(aggregate(cfg.n, method, q, card, &group));
            }
        }
    }
    Ok(GainReport {
        config: cfg.clone(),
        bin_width: BIN_WIDTH,
        records,
        aggregates,
    })
}

/// Average gain per has-set cardinality, method and field.
pub fn gain_vs_has_cardinality(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    if matches!(cfg.has_spec, HasSetting::IncludeProb(_)) {
        return Err(Error::InvalidParam("a cardinality curve needs fixed_card or sweep".into()));
    }
    Ok(curve(&run_gain_experiment(cfg)?))
}

pub fn curve(report: &GainReport) -> Vec<CurvePoint> {
    report
        .aggregates
        .iter()
        .filter_map(|a| {
            a.has_card.map(|d| CurvePoint {
                has_card: d,
                method: a.method,
                q: a.q,
                mean_gain: a.mean,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl GainReport {
    /// Compact JSON with object keys sorted.
    pub fn to_json_string(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    pub fn parse(text: &str) -> Result<GainReport> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let opt = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.records {
            for m in &r.results {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.trial,
                    r.seed,
                    self.config.n,
                    opt(r.has_card.map(|d| d as u64)),
                    m.q,
                    m.method.as_str(),
                    opt(m.transmissions.map(|t| t as u64)),
                    opt(m.gain.map(|g| g.num)),
                    opt(m.gain.map(|g| g.den)),
                )
                .expect("string write");
            }
        }
        out
    }
}

pub fn write_report(report: &GainReport, format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Json => report.to_json_string(),
        Format::Csv => report.to_csv_string(),
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(has_spec: HasSetting, methods: Vec<Method>) -> ExperimentConfig {
        ExperimentConfig {
            n: 5,
            trials: 6,
            has_spec,
            fields: vec![2],
            methods,
            master_seed: 42,
            budget: DEFAULT_BUDGET,
        }
    }

    const ALL: [Method; 3] = [Method::Exact, Method::MemorylessExact, Method::Greedy];

    #[test]
    fn no_side_information_gains_are_one() {
        let r = run_gain_experiment(&cfg(HasSetting::FixedCard(0), ALL.to_vec())).unwrap();
        for rec in &r.records {
            for m in &rec.results {
                assert_eq!(m.gain, Some(Fraction { num: 1, den: 1 }));
            }
        }
        for a in &r.aggregates {
            assert_eq!(a.mean, Some(Fraction { num: 1, den: 1 }));
            assert_eq!(a.histogram[0], 6);
        }
    }

    #[test]
    fn deterministic_and_ordered() {
        let c = cfg(HasSetting::Sweep([1, 3]), ALL.to_vec());
        let a = run_gain_experiment(&c).unwrap();
        let b = run_gain_experiment(&c).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
        assert_eq!(a.records.len(), 18);
        for rec in &a.records {
            let t = |m: Method| rec.results.iter().find(|r| r.method == m).unwrap().transmissions.unwrap();
            assert!(t(Method::Exact) <= t(Method::MemorylessExact));
            assert!(t(Method::MemorylessExact) <= t(Method::Greedy));
            assert!(t(Method::Greedy) <= 5);
            assert!(rec.bounds.opt_lower <= t(Method::Exact));
        }
        // the same seeds are used at every cardinality
        let seeds = |d| a.records.iter().filter(|r| r.has_card == Some(d)).map(|r| r.seed).collect::<Vec<_>>();
        assert_eq!(seeds(1), seeds(3));
    }

    #[test]
    fn json_round_trip_and_csv() {
        let r = run_gain_experiment(&cfg(HasSetting::IncludeProb(0.5), vec![Method::Greedy])).unwrap();
        assert_eq!(GainReport::parse(&r.to_json_string()).unwrap(), r);
        let csv = r.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 9);
        assert_eq!(first[3], "");
        assert_eq!(first[5], "greedy");
    }

    #[test]
    fn curve_points() {
        let pts = gain_vs_has_cardinality(&cfg(HasSetting::Sweep([0, 4]), vec![Method::Exact])).unwrap();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0].mean_gain, Some(Fraction { num: 1, den: 1 }));
        // everyone holds everything else: one transmission suffices
        assert_eq!(pts[4].mean_gain, Some(Fraction { num: 5, den: 1 }));
        assert!(gain_vs_has_cardinality(&cfg(HasSetting::IncludeProb(0.3), vec![Method::Exact])).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(HasSetting::Sweep([2, 5]), vec![Method::Exact]);
        assert!(c.validate().is_err());
        c.has_spec = HasSetting::FixedCard(1);
        c.methods.clear();
        assert!(c.validate().is_err());
        c.methods.push(Method::Greedy);
        c.fields = vec![6];
        assert!(matches!(c.validate(), Err(Error::UnsupportedOrder(6))));
        let parsed: ExperimentConfig = serde_json::from_str(
            r#"{"n":4,"trials":2,"has_spec":{"sweep":[0,3]},"master_seed":1}"#,
        )
        .unwrap();
        assert_eq!(parsed.fields, vec![2]);
        assert_eq!(parsed.methods, vec![Method::Exact]);
    }

    #[test]
    fn unwritable_path() {
        let r = run_gain_experiment(&cfg(HasSetting::FixedCard(1), vec![Method::Greedy])).unwrap();
        let err = write_report(&r, Format::Csv, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
