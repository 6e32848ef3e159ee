//! Exact arithmetic in `F_q`, `q = p^e`, together with Frobenius roots and
//! binomial coefficients modulo `p` via the Lucas congruence.
//!
//! Elements are stored packed: the value `Σ c_i p^i` of the coordinate vector
//! `(c_0, …, c_{e-1})` in the fixed `F_p`-basis `1, x, …, x^{e-1}` of
//! `F_p[x]/(f)`. The modulus `f` is the smallest monic irreducible of degree
//! `e` in this packed order, so encodings are reproducible across runs.
//! Multiplication goes through discrete log/exp tables for the smallest
//! generator of the multiplicative group.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MAX_Q: u64 = 1 << 16;

/// An element of `F_q`, packed base-`p` coordinate vector.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct FieldElem(pub u64);

/// Field parameters plus the arithmetic tables. Constructed once, shared via
/// [`Field`]; immutable afterwards.
#[derive(Debug)]
pub struct FieldParams {
    pub p: u64,
    pub e: u32,
    pub q: u64,
    /// Non-leading coefficients of the monic modulus, `x^e = -(m_0 + m_1 x + …)`.
    /// Empty for prime fields.
    pub modulus: Vec<u64>,
    /// Packed value of the chosen multiplicative generator.
    pub generator: u64,
    exp: Vec<u64>,
    log: Vec<u64>,
}

/// Shared handle on the field; cheap to clone.
#[derive(Clone, Debug)]
pub struct Field(Arc<FieldParams>);

impl std::ops::Deref for Field {
    type Target = FieldParams;
    fn deref(&self) -> &FieldParams {
        &self.0
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e
    }
}
impl Eq for Field {}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.e)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Dense polynomial helpers over F_p, used only during field construction.
mod poly {
    pub fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + ai * bj) % p;
            }
        }
        trim(&mut out);
        out
    }

    /// Remainder of `a` modulo the monic polynomial `x^e + m(x)`.
    pub fn rem(a: &[u64], low: &[u64], e: usize, p: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        while r.len() > e {
            let d = r.len() - 1;
            let c = r[d];
            r.pop();
            if c != 0 {
                for (i, &mi) in low.iter().enumerate() {
                    let idx = d - e + i;
                    r[idx] = (r[idx] + (p - mi % p) * c) % p;
                }
            }
        }
        trim(&mut r);
        r
    }

    pub fn mulmod(a: &[u64], b: &[u64], low: &[u64], e: usize, p: u64) -> Vec<u64> {
        rem(&mul(a, b, p), low, e, p)
    }

    pub fn powmod(base: &[u64], mut exp: u64, low: &[u64], e: usize, p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base, low, e, p);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mulmod(&acc, &b, low, e, p);
            }
            b = mulmod(&b, &b, low, e, p);
            exp >>= 1;
        }
        acc
    }

    pub fn gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
        while !b.is_empty() {
            // reduce a mod b (b made monic on the fly)
            let lead = *b.last().unwrap();
            let inv = super::inv_mod_p(lead, p);
            let bm: Vec<u64> = b.iter().map(|&c| c * inv % p).collect();
            while a.len() >= bm.len() && !a.is_empty() {
                let d = a.len() - bm.len();
                let c = *a.last().unwrap();
                if c != 0 {
                    for (i, &bi) in bm.iter().enumerate() {
                        a[d + i] = (a[d + i] + (p - bi) * c) % p;
                    }
                }
                trim(&mut a);
                if a.len() < bm.len() {
                    break;
                }
            }
            std::mem::swap(&mut a, &mut b);
        }
        a
    }
}

fn inv_mod_p(a: u64, p: u64) -> u64 {
    // p is small; Fermat
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn pack(coords: &[u64], p: u64) -> u64 {
    coords.iter().rev().fold(0u64, |acc, &c| acc * p + c)
}

fn unpack(mut v: u64, p: u64, e: u32) -> Vec<u64> {
    let mut out = Vec::with_capacity(e as usize);
    for _ in 0..e {
        out.push(v % p);
        v /= p;
    }
    out
}

/// `x^e + m(x)` irreducible over `F_p`?
fn is_irreducible(low: &[u64], e: u32, p: u64) -> bool {
    let e_us = e as usize;
    let x = vec![0u64, 1];
    // x^(p^e) == x mod f
    let mut t = x.clone();
    for _ in 0..e {
        t = poly::powmod(&t, p, low, e_us, p);
    }
    if t != x {
        return false;
    }
    // gcd(x^(p^(e/r)) - x, f) == 1 for every prime r | e
    for r in prime_factors(e as u64) {
        let d = e as u64 / r;
        let mut t = x.clone();
        for _ in 0..d {
            t = poly::powmod(&t, p, low, e_us, p);
        }
        // t - x
        let mut diff = t;
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = (diff[1] + p - 1) % p;
        poly::trim(&mut diff);
        let mut f = low.to_vec();
        f.resize(e_us + 1, 0);
        f[e_us] = 1;
        let g = poly::gcd(f, diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

impl Field {
    /// Build `F_{p^e}` with the deterministic modulus and generator.
    pub fn new(p: u64, e: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if e < 1 {
            return Err(Error::BadExponent);
        }
        let q128 = (p as u128).checked_pow(e).ok_or(Error::FieldTooLarge(u128::MAX))?;
        if q128 > MAX_Q as u128 {
            return Err(Error::FieldTooLarge(q128));
        }
        let q = q128 as u64;

        let modulus: Vec<u64> = if e == 1 {
            Vec::new()
        } else {
            let mut found = None;
            for packed in 0..q {
                let low = unpack(packed, p, e);
                if is_irreducible(&low, e, p) {
                    found = Some(low);
                    break;
                }
            }
            found.expect("an irreducible polynomial of every degree exists over F_p")
        };

        // Find the smallest generator of F_q^* and build log/exp tables.
        let e_us = e as usize;
        let order = q - 1;
        let ord_factors = prime_factors(order);
        let mut generator = 1u64;
        if order > 1 {
            'search: for g in 2..q {
                let gp = unpack(g, p, e);
                for &r in &ord_factors {
                    let t = poly::powmod(&gp, order / r, &modulus, e_us, p);
                    if t == vec![1] {
                        continue 'search;
                    }
                }
                generator = g;
                break;
            }
        }

        let mut exp = vec![0u64; 2 * order as usize + 1];
        let mut log = vec![0u64; q as usize];
        let gp = unpack(generator, p, e);
        let mut cur = vec![1u64];
        for i in 0..order {
            let packed = pack(&{
                let mut c = cur.clone();
                c.resize(e_us, 0);
                c
            }, p);
            exp[i as usize] = packed;
            exp[(i + order) as usize] = packed;
            log[packed as usize] = i;
            cur = poly::mulmod(&cur, &gp, &modulus, e_us, p);
        }
        exp[2 * order as usize] = exp[0];

        Ok(Field(Arc::new(FieldParams {
            p,
            e,
            q,
            modulus,
            generator,
            exp,
            log,
        })))
    }

    /// Parse "p^e" or a plain prime-power integer.
    pub fn parse(s: &str) -> Result<Field> {
        let (p, e) = if let Some((ps, es)) = s.split_once('^') {
            let p = ps.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad field '{s}'")))?;
            let e = es.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad field '{s}'")))?;
            (p, e)
        } else {
            let q = s.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad field '{s}'")))?;
            let mut p = 0;
            for d in 2..=q {
                if q % d == 0 {
                    p = d;
                    break;
                }
            }
            if p == 0 {
                return Err(Error::Parse(format!("bad field '{s}'")));
            }
            let mut e = 0u32;
            let mut m = q;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if m != 1 {
                return Err(Error::Parse(format!("'{s}' is not a prime power")));
            }
            (p, e)
        };
        Field::new(p, e)
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(0)
    }

    pub fn one(&self) -> FieldElem {
        FieldElem(1)
    }

    pub fn elem(&self, packed: u64) -> FieldElem {
        debug_assert!(packed < self.q);
        FieldElem(packed)
    }

    pub fn from_coords(&self, coords: &[u64]) -> FieldElem {
        let c: Vec<u64> = coords.iter().map(|&x| x % self.p).collect();
        FieldElem(pack(&c, self.p))
    }

    pub fn coords(&self, a: FieldElem) -> Vec<u64> {
        unpack(a.0, self.p, self.e)
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.e == 1 {
            return FieldElem((a.0 + b.0) % self.p);
        }
        let mut out = 0u64;
        let (mut x, mut y) = (a.0, b.0);
        let mut mul = 1u64;
        for _ in 0..self.e {
            out += ((x % self.p + y % self.p) % self.p) * mul;
            x /= self.p;
            y /= self.p;
            mul *= self.p;
        }
        FieldElem(out)
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.e == 1 {
            return FieldElem((self.p - a.0) % self.p);
        }
        let mut out = 0u64;
        let mut x = a.0;
        let mut mul = 1u64;
        for _ in 0..self.e {
            out += ((self.p - x % self.p) % self.p) * mul;
            x /= self.p;
            mul *= self.p;
        }
        FieldElem(out)
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem(0);
        }
        FieldElem(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 == 0 {
            return Err(Error::ZeroSeries(0));
        }
        let order = self.q - 1;
        let l = self.log[a.0 as usize];
        Ok(FieldElem(self.exp[((order - l) % order) as usize]))
    }

    pub fn pow(&self, a: FieldElem, n: u64) -> FieldElem {
        if a.0 == 0 {
            return if n == 0 { FieldElem(1) } else { FieldElem(0) };
        }
        let order = self.q - 1;
        if order == 0 {
            return FieldElem(1);
        }
        let l = (self.log[a.0 as usize] as u128 * n as u128 % order as u128) as u64;
        FieldElem(self.exp[l as usize])
    }

    /// `a^(p^j)`.
    pub fn frobenius(&self, a: FieldElem, j: u32) -> FieldElem {
        let mut out = a;
        for _ in 0..(j % self.e) {
            out = self.pow(out, self.p);
        }
        out
    }

    /// The unique `b` with `b^(p^j) = a`; total since `F_q` is perfect.
    pub fn frobenius_root(&self, a: FieldElem, j: u32) -> FieldElem {
        let j = j % self.e;
        if j == 0 {
            return a;
        }
        self.frobenius(a, self.e - j)
    }

    /// `(-1)^n` in this field.
    pub fn sign(&self, n: u64) -> FieldElem {
        if n % 2 == 0 {
            self.one()
        } else {
            self.neg(self.one())
        }
    }

    pub fn elem_from_text(&self, s: &str) -> Result<FieldElem> {
        let mut coords = Vec::new();
        for part in s.split(',') {
            let c: u64 = part
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad field element '{s}'")))?;
            if c >= self.p {
                return Err(Error::Parse(format!("coordinate {c} not below p={}", self.p)));
            }
            coords.push(c);
        }
        if coords.len() != self.e as usize {
            return Err(Error::Parse(format!(
                "expected {} coordinates in '{s}'",
                self.e
            )));
        }
        Ok(self.from_coords(&coords))
    }

    pub fn elem_to_text(&self, a: FieldElem) -> String {
        self.coords(a)
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// `C(m, n) mod p` by the Lucas congruence, digit by digit in base `p`.
pub fn lucas_binom(m: u64, n: u64, p: u64) -> u64 {
    if n > m {
        return 0;
    }
    let mut out = 1u64;
    let (mut m, mut n) = (m, n);
    while n > 0 || m > 0 {
        let (md, nd) = (m % p, n % p);
        if nd > md {
            return 0;
        }
        out = out * small_binom(md, nd) % p;
        m /= p;
        n /= p;
    }
    out
}

fn small_binom(m: u64, n: u64) -> u64 {
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..n {
        num *= m - i;
        den *= i + 1;
    }
    num / den
}

/// `C(-m, r) mod p = (-1)^r C(m+r-1, r) mod p` for `m >= 1`.
pub fn neg_binom(m: u64, r: u64, p: u64) -> u64 {
    debug_assert!(m >= 1);
    let c = lucas_binom(m + r - 1, r, p);
    if r % 2 == 0 {
        c
    } else {
        (p - c) % p
    }
}

/// Binomial coefficient of a signed integer: Lucas for `i >= 0`, the
/// reflection formula for `i < 0`.
pub fn signed_binom(i: i64, n: u64, p: u64) -> u64 {
    if i >= 0 {
        lucas_binom(i as u64, n, p)
    } else {
        neg_binom((-i) as u64, n, p)
    }
}
