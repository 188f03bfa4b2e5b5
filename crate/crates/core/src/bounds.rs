//! Coding-gain bounds and the explicit (n - ell)-transmission construction.
//!
//! With `L` the largest and `ell` the smallest has set, the coding gain
//! `n / OPT` satisfies `n / (n - ell) <= gain <= L + 1`, equivalently
//! `ceil(n / (L + 1)) <= OPT <= n - ell`.
//!
//! The upper bound on OPT is realized by a Vandermonde generator over a prime
//! field with `q >= n`: every `n - ell` of its columns are independent, so its
//! row space together with any `ell` unit vectors spans the whole space.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{smallest_prime_at_least, Elem, Field};
use crate::instance::{Client, Instance};
use crate::linalg::MatrixQ;

/// Exact fraction, serialized as `{"num": int, "den": int}` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl From<Ratio<u64>> for Fraction {
    fn from(r: Ratio<u64>) -> Self {
        Fraction {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

impl From<Fraction> for Ratio<u64> {
    fn from(f: Fraction) -> Self {
        Ratio::new(f.num, f.den)
    }
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Fraction {
        Ratio::new(num, den).into()
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    /// Largest has set.
    #[serde(rename = "L")]
    pub max_has: usize,
    /// Smallest has set.
    #[serde(rename = "ell")]
    pub min_has: usize,
    pub gamma_lower: Fraction,
    pub gamma_upper: u64,
    pub opt_lower: usize,
    pub opt_upper: usize,
}

/// Bounds for the normalized form of `inst`.
pub fn gain_bounds(inst: &Instance) -> Result<BoundsReport> {
    let (norm, _) = inst.normalize()?;
    let n = norm.num_packets;
    let sizes = norm.clients.iter().map(|c| c.has.len());
    let max_has = sizes.clone().max().unwrap_or(0);
    let min_has = sizes.min().unwrap_or(n);
    if min_has >= n {
        return Err(Error::DegenerateInstance);
    }
    Ok(BoundsReport {
        n,
        max_has,
        min_has,
        gamma_lower: Fraction::new(n as u64, (n - min_has) as u64),
        gamma_upper: max_has as u64 + 1,
        opt_lower: n.div_ceil(max_has + 1),
        opt_upper: n - min_has,
    })
}

/// The instance with every has set cut down to its `ell` smallest packets and
/// every client wanting all the rest.
pub fn degraded_instance(norm: &Instance, ell: usize) -> Instance {
    let n = norm.num_packets;
    let clients = norm
        .clients
        .iter()
        .map(|c| {
            let has: Vec<usize> = c.has.iter().copied().take(ell).collect();
            let wants: Vec<usize> = (0..n).filter(|p| !has.contains(p)).collect();
            Client::new(wants, has)
        })
        .collect();
    Instance::new(n, clients)
}

/// `(n - ell) x n` Vandermonde rows `alpha_j^i` with `alpha_j = j` over the
/// smallest prime field of order at least `n`.
pub fn vandermonde(n: usize, rows: usize) -> Result<(Field, MatrixQ)> {
    let q = smallest_prime_at_least(n as u32).ok_or(Error::UnsupportedOrder(n as u32))?;
    let field = Field::new(q)?;
    let mut m = MatrixQ::zeros(&field, rows, n);
    for i in 0..rows {
        for j in 0..n {
            m.set(i, j, field.pow(j as Elem, i as u32));
        }
    }
    Ok((field, m))
}

/// An explicit solution with `n - ell` transmissions, over the input's
/// packet indices.
pub fn mds_solution(inst: &Instance) -> Result<(Field, MatrixQ)> {
    let (norm, map) = inst.normalize()?;
    let report = gain_bounds(inst)?;
    let (field, m) = vandermonde(norm.num_packets, report.opt_upper)?;
    Ok((field, map.lift(&m)))
}
