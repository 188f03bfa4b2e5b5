//! Arithmetic in GF(q) for small prime powers.
//!
//! Elements are integers `0..q` whose base-p digits are polynomial
//! coefficients, least significant digit first (the constant term). Extension
//! fields use a fixed modulus per order so that element encodings are stable
//! across runs and file formats:
//!
//! | q  | modulus        |
//! |----|----------------|
//! | 4  | x^2 + x + 1    |
//! | 8  | x^3 + x + 1    |
//! | 9  | x^2 + 1        |
//! | 16 | x^4 + x + 1    |
//! | 25 | x^2 + 2        |
//! | 27 | x^3 + 2x + 1   |
//!
//! Multiplication goes through log/antilog tables; addition in extension
//! fields through a precomputed q x q table.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A field element, always in `0..q`.
pub type Elem = u8;

/// Prime-power orders with their fixed moduli (coefficients, constant term first).
const EXTENSION_MODULI: &[(u32, u32, &[u32])] = &[
    (4, 2, &[1, 1, 1]),
    (8, 2, &[1, 1, 0, 1]),
    (9, 3, &[1, 0, 1]),
    (16, 2, &[1, 1, 0, 0, 1]),
    (25, 5, &[2, 0, 1]),
    (27, 3, &[1, 2, 0, 1]),
];

pub const MAX_PRIME: u32 = 251;

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Every supported order, ascending.
pub fn supported_orders() -> Vec<u32> {
    let mut v: Vec<u32> = (2..=MAX_PRIME).filter(|&n| is_prime(n)).collect();
    v.extend(EXTENSION_MODULI.iter().map(|&(q, _, _)| q));
    v.sort_unstable();
    v
}

/// Smallest supported prime order `>= n`.
pub fn smallest_prime_at_least(n: u32) -> Option<u32> {
    (n.max(2)..=MAX_PRIME).find(|&p| is_prime(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
}

struct Tables {
    q: u32,
    p: u32,
    degree: u32,
    modulus: Vec<u32>,
    /// exp[i] = g^i for i in 0..2(q-1).
    exp: Vec<Elem>,
    /// log[a] for a != 0.
    log: Vec<u16>,
    /// Addition table for extension fields (q*q), empty for prime fields.
    add: Vec<Elem>,
    neg: Vec<Elem>,
}

/// GF(q). Cheap to clone; the tables are shared.
#[derive(Clone)]
pub struct Field {
    t: Arc<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.t.q)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.t.q == other.t.q
    }
}

impl Eq for Field {}

/// Multiply two base-p digit vectors modulo `modulus` (monic, degree k).
fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let k = modulus.len() - 1;
    let mut prod = vec![0u32; 2 * k];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for d in (k..prod.len()).rev() {
        let c = prod[d];
        if c == 0 {
            continue;
        }
        // subtract c * x^(d-k) * modulus
        for (i, &m) in modulus.iter().enumerate() {
            let idx = d - k + i;
            prod[idx] = (prod[idx] + p * p - (c * m) % p) % p;
        }
    }
    prod.truncate(k);
    prod
}

fn digits(mut a: u32, p: u32, k: u32) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let d = a % p;
            a /= p;
            d
        })
        .collect()
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

impl Field {
    pub fn new(q: u32) -> Result<Field> {
        let (p, degree, modulus) = if q <= MAX_PRIME && is_prime(q) {
            (q, 1, Vec::new())
        } else if let Some(&(_, p, m)) = EXTENSION_MODULI.iter().find(|e| e.0 == q) {
            (p, m.len() as u32 - 1, m.to_vec())
        } else {
            return Err(Error::UnsupportedOrder(q));
        };

        let mul_raw = |a: u32, b: u32| -> u32 {
            if degree == 1 {
                a * b % p
            } else {
                let r = poly_mulmod(&digits(a, p, degree), &digits(b, p, degree), &modulus, p);
                undigits(&r, p)
            }
        };

        // Find a generator of the multiplicative group.
        let order = q - 1;
        let generator = (1..q)
            .find(|&g| {
                let mut x = 1;
                for i in 1..=order {
                    x = mul_raw(x, g);
                    if x == 1 {
                        return i == order;
                    }
                }
                false
            })
            .expect("multiplicative group of a finite field is cyclic");

        let mut exp = vec![0 as Elem; 2 * order as usize];
        let mut log = vec![0u16; q as usize];
        let mut x = 1u32;
        for i in 0..order as usize {
            exp[i] = x as Elem;
            exp[i + order as usize] = x as Elem;
            log[x as usize] = i as u16;
            x = mul_raw(x, generator);
        }

        let add = if degree == 1 {
            Vec::new()
        } else {
            let mut t = vec![0 as Elem; (q * q) as usize];
            for a in 0..q {
                let da = digits(a, p, degree);
                for b in 0..q {
                    let db = digits(b, p, degree);
                    let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                    t[(a * q + b) as usize] = undigits(&s, p) as Elem;
                }
            }
            t
        };

        let neg = (0..q)
            .map(|a| {
                let d: Vec<u32> = digits(a, p, degree).iter().map(|&x| (p - x) % p).collect();
                undigits(&d, p) as Elem
            })
            .collect();

        Ok(Field {
            t: Arc::new(Tables {
                q,
                p,
                degree,
                modulus,
                exp,
                log,
                add,
                neg,
            }),
        })
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.t.q
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.t.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.t.degree
    }

    /// Modulus coefficients, constant term first; empty for prime fields.
    pub fn modulus(&self) -> &[u32] {
        &self.t.modulus
    }

    /// Iterator over all elements `0..q`.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.t.q).map(|a| a as Elem)
    }

    pub fn contains(&self, v: u32) -> bool {
        v < self.t.q
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let t = &*self.t;
        if t.degree == 1 {
            let s = a as u32 + b as u32;
            (if s >= t.q { s - t.q } else { s }) as Elem
        } else {
            t.add[a as usize * t.q as usize + b as usize]
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.t.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let t = &*self.t;
        t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::DivideByZero);
        }
        let t = &*self.t;
        let order = t.q as usize - 1;
        Ok(t.exp[(order - t.log[a as usize] as usize) % order])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a + c*b`, the elimination kernel.
    #[inline]
    pub fn mul_add(&self, a: Elem, c: Elem, b: Elem) -> Elem {
        self.add(a, self.mul(c, b))
    }

    pub fn pow(&self, a: Elem, e: u32) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = self.t.q as u64 - 1;
        let l = self.t.log[a as usize] as u64 * e as u64 % order;
        self.t.exp[l as usize]
    }

    /// Checked entry point taking raw integers; `b` is ignored for unary ops.
    pub fn arith(&self, op: Op, a: u32, b: Option<u32>) -> Result<Elem> {
        let check = |v: u32| -> Result<Elem> {
            if self.contains(v) {
                Ok(v as Elem)
            } else {
                Err(Error::ElementOutOfRange { value: v, q: self.t.q })
            }
        };
        let a = check(a)?;
        let rhs = || -> Result<Elem> {
            check(b.ok_or_else(|| Error::InvalidParam(format!("{op:?} needs two operands")))?)
        };
        match op {
            Op::Add => Ok(self.add(a, rhs()?)),
            Op::Sub => Ok(self.sub(a, rhs()?)),
            Op::Mul => Ok(self.mul(a, rhs()?)),
            Op::Inv => self.inv(a),
            Op::Neg => Ok(self.neg(a)),
        }
    }

    /// Scale `row` in place by `c`.
    pub fn scale_row(&self, row: &mut [Elem], c: Elem) {
        for x in row.iter_mut() {
            *x = self.mul(*x, c);
        }
    }

    /// `dst += c * src`.
    pub fn axpy(&self, dst: &mut [Elem], c: Elem, src: &[Elem]) {
        if c == 0 {
            return;
        }
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = self.mul_add(*d, c, s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction() {
        let f = Field::new(2).unwrap();
        assert_eq!((f.order(), f.characteristic(), f.degree()), (2, 2, 1));
        let f4 = Field::new(4).unwrap();
        assert_eq!(f4.modulus(), &[1, 1, 1]);
        assert_eq!(f4.characteristic(), 2);
        assert_eq!(f4.degree(), 2);
        assert!(matches!(Field::new(6), Err(Error::UnsupportedOrder(6))));
        assert!(matches!(Field::new(1), Err(Error::UnsupportedOrder(1))));
        assert!(matches!(Field::new(32), Err(Error::UnsupportedOrder(32))));
        assert!(matches!(Field::new(257), Err(Error::UnsupportedOrder(257))));
        assert_eq!(supported_orders().len(), 54 + 6);
    }

    #[test]
    fn small_examples() {
        let f2 = Field::new(2).unwrap();
        assert_eq!(f2.add(1, 1), 0);
        let f3 = Field::new(3).unwrap();
        assert_eq!(f3.mul(2, 2), 1);
        let f4 = Field::new(4).unwrap();
        // x * x = x + 1
        assert_eq!(f4.mul(2, 2), 3);
        assert!(matches!(f4.inv(0), Err(Error::DivideByZero)));
        assert!(matches!(f4.arith(Op::Inv, 0, None), Err(Error::DivideByZero)));
        assert!(matches!(
            f4.arith(Op::Add, 4, Some(0)),
            Err(Error::ElementOutOfRange { .. })
        ));
        assert_eq!(f4.arith(Op::Sub, 3, Some(1)).unwrap(), 2);
    }

    #[test]
    fn fixed_moduli_hold() {
        // x^k reduces to minus the lower part of the modulus
        for &(q, p, m) in EXTENSION_MODULI {
            let f = Field::new(q).unwrap();
            let x = p as Elem; // the element "x"
            let k = m.len() as u32 - 1;
            let lhs = f.pow(x, k);
            let mut rhs = 0;
            for (i, &c) in m[..k as usize].iter().enumerate() {
                let term = f.mul(f.pow(x, i as u32), c as Elem);
                rhs = f.sub(rhs, term);
            }
            assert_eq!(lhs, rhs, "GF({q})");
        }
    }

    #[test]
    fn axioms_exhaustive_small() {
        for q in [2, 3, 4, 5, 7, 8, 9] {
            let f = Field::new(q).unwrap();
            let els: Vec<Elem> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn inverses_and_characteristic_all_orders() {
        for q in supported_orders() {
            let f = Field::new(q).unwrap();
            for a in 1..q {
                let a = a as Elem;
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "GF({q}) a={a}");
            }
            let mut s = 0;
            for _ in 0..f.characteristic() {
                s = f.add(s, 1);
            }
            assert_eq!(s, 0, "GF({q})");
        }
    }

    #[test]
    fn smallest_prime() {
        assert_eq!(smallest_prime_at_least(0), Some(2));
        assert_eq!(smallest_prime_at_least(4), Some(5));
        assert_eq!(smallest_prime_at_least(7), Some(7));
        assert_eq!(smallest_prime_at_least(252), None);
    }
}
