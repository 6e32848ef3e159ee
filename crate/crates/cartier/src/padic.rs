//! Cartier maps on the p-adic integers, their Mahler coefficients, the
//! digit-product bases built from them, and the residue-vector bijection
//! underlying their orthonormality.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::operators::{digit_index, ipow};

/// Default number of tracked p-adic digits.
pub const DEFAULT_NDIGITS: usize = 16;
const MAX_NDIGITS: usize = 64;

/// A p-adic integer truncated modulo `p^N`, stored as base-p digits
/// low-to-high. `ndigits` doubles as the tracked precision: operations on
/// operands of different lengths are exact modulo the shorter one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicInt {
    pub p: u64,
    pub digits: Vec<u64>,
}

impl PadicInt {
    pub fn from_digits(p: u64, digits: Vec<u64>) -> Result<PadicInt> {
        if digits.len() > MAX_NDIGITS {
            return Err(Error::Budget(format!("{} p-adic digits", digits.len())));
        }
        if let Some(d) = digits.iter().find(|&&d| d >= p) {
            return Err(Error::Parse(format!("digit {d} not below p={p}")));
        }
        Ok(PadicInt { p, digits })
    }

    /// The integer `v` reduced modulo `p^ndigits`.
    pub fn from_u128(p: u64, ndigits: usize, mut v: u128) -> PadicInt {
        let digits = (0..ndigits)
            .map(|_| {
                let d = (v % p as u128) as u64;
                v /= p as u128;
                d
            })
            .collect();
        PadicInt { p, digits }
    }

    pub fn zero(p: u64, ndigits: usize) -> PadicInt {
        PadicInt { p, digits: vec![0; ndigits] }
    }

    pub fn one(p: u64, ndigits: usize) -> PadicInt {
        PadicInt::from_u128(p, ndigits, 1)
    }

    pub fn ndigits(&self) -> usize {
        self.digits.len()
    }

    pub fn digit(&self, i: usize) -> u64 {
        self.digits.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// Exact value as a big integer (the truncation is a plain integer).
    pub fn to_bigint(&self) -> BigInt {
        let mut acc = BigInt::zero();
        for &d in self.digits.iter().rev() {
            acc = acc * self.p + d;
        }
        acc
    }

    pub fn truncate(&self, ndigits: usize) -> PadicInt {
        PadicInt { p: self.p, digits: self.digits.iter().take(ndigits).copied().collect() }
    }

    fn carry_normalize(p: u64, mut acc: Vec<u128>) -> Vec<u64> {
        let mut out = Vec::with_capacity(acc.len());
        for i in 0..acc.len() {
            let d = acc[i] % p as u128;
            let carry = acc[i] / p as u128;
            if i + 1 < acc.len() {
                acc[i + 1] += carry;
            }
            out.push(d as u64);
        }
        out
    }

    pub fn add(&self, other: &PadicInt) -> PadicInt {
        let n = self.ndigits().min(other.ndigits());
        let acc = (0..n).map(|i| (self.digits[i] + other.digits[i]) as u128).collect();
        PadicInt { p: self.p, digits: Self::carry_normalize(self.p, acc) }
    }

    pub fn mul(&self, other: &PadicInt) -> PadicInt {
        let n = self.ndigits().min(other.ndigits());
        let mut acc = vec![0u128; n];
        for i in 0..n {
            if self.digits[i] == 0 {
                continue;
            }
            for j in 0..n - i {
                acc[i + j] += (self.digits[i] * other.digits[j]) as u128;
            }
        }
        PadicInt { p: self.p, digits: Self::carry_normalize(self.p, acc) }
    }

    pub fn pow(&self, e: u64) -> PadicInt {
        let mut acc = PadicInt::one(self.p, self.ndigits());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Base-p digits low-to-high, comma-separated.
    pub fn to_text(&self) -> String {
        self.digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn parse(p: u64, s: &str) -> Result<PadicInt> {
        let s = s.trim();
        if s.contains(',') {
            let digits = s
                .split(',')
                .map(|d| {
                    d.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad digit '{d}'")))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            PadicInt::from_digits(p, digits)
        } else {
            let v =
                s.parse::<u128>().map_err(|_| Error::Parse(format!("bad p-adic value '{s}'")))?;
            Ok(PadicInt::from_u128(p, DEFAULT_NDIGITS, v))
        }
    }
}

impl std::fmt::Display for PadicInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PadicKind {
    Phi,
    Psi,
}

impl PadicKind {
    pub fn parse(s: &str) -> Result<PadicKind> {
        match s {
            "phi" => Ok(PadicKind::Phi),
            "psi" => Ok(PadicKind::Psi),
            _ => Err(Error::Parse(format!("unknown p-adic kind {s:?}"))),
        }
    }
}

/// The Cartier map on truncated p-adic integers: with `k` the digit length
/// of `n`, `φ_n` sends `Σ x_i p^i` to `Σ x_{ip^k+n} p^{ip^k}` and `ψ_n`
/// sends it to `Σ x_{ip^k+n} p^i`. Output precision follows the continuity
/// moduli: `m - n` digits for `φ` and `(m - n) / p^k` (rounded down) for
/// `ψ`, where `m` is the input precision.
pub fn padic_cartier(kind: PadicKind, n: u64, x: &PadicInt) -> PadicInt {
    let p = x.p;
    let k = digit_index(p, n).k;
    let pk = ipow(p, k) as usize;
    let m = x.ndigits() as i64;
    let out_n = match kind {
        PadicKind::Phi => (m - n as i64).max(0) as usize,
        PadicKind::Psi => ((m - n as i64).max(0) as usize) / pk,
    };
    let mut digits = vec![0u64; out_n];
    let mut i = 0usize;
    loop {
        let src = i * pk + n as usize;
        if src >= x.ndigits() {
            break;
        }
        let dst = match kind {
            PadicKind::Phi => i * pk,
            PadicKind::Psi => i,
        };
        if dst < out_n {
            digits[dst] = x.digits[src];
        }
        i += 1;
    }
    PadicInt { p, digits }
}

/// Mahler coefficients of `φ_n`: exact integers
/// `a_j = Σ_i (-1)^{j-i} C(j,i) φ_n(i)` for `j <= jmax`, vanishing below
/// `p^n`, equal to 1 at `p^n`, and divisible by `p` beyond it.
#[derive(Clone, Debug)]
pub struct MahlerRow {
    pub p: u64,
    pub n: u64,
    pub coeffs: Vec<BigInt>,
}

/// `φ_n` applied to an ordinary nonnegative integer, exactly.
pub fn phi_on_integer(p: u64, n: u64, i: u128) -> BigInt {
    let len = 128 - i.leading_zeros() as usize + 1;
    let x = PadicInt::from_u128(p, len.max(n as usize + 2), i);
    padic_cartier(PadicKind::Phi, n, &x).to_bigint()
}

pub fn mahler_coeffs(p: u64, n: u64, jmax: u64) -> Result<MahlerRow> {
    let pn = ipow(p, n as u32);
    if jmax < pn {
        return Err(Error::IndexRange(format!("jmax {jmax} below p^{n} = {pn}")));
    }
    let values: Vec<BigInt> = (0..=jmax).map(|i| phi_on_integer(p, n, i as u128)).collect();
    let mut coeffs = Vec::with_capacity(jmax as usize + 1);
    for j in 0..=jmax {
        let mut binom = BigInt::one();
        let mut acc = BigInt::zero();
        for i in 0..=j {
            // binom = C(j,i), updated incrementally
            let term = &binom * &values[i as usize];
            if (j - i) % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
            if i < j {
                binom = binom * (j - i) / (i + 1);
            }
        }
        coeffs.push(acc);
    }
    Ok(MahlerRow { p, n, coeffs })
}

/// Digit-product basis member: for `j = Σ a_i p^i`,
/// `Φ_j = Π φ_i(x)^{a_i}` and `Ψ_j = φ_0(x)^{a_0} Π_{i>0} ψ_i(x)^{a_i}`;
/// both are 1 at `j = 0`.
pub fn padic_digit_eval(kind: PadicKind, j: u64, x: &PadicInt) -> PadicInt {
    let p = x.p;
    let mut acc = PadicInt::one(p, x.ndigits());
    let mut m = j;
    let mut i = 0u64;
    while m > 0 {
        let d = m % p;
        m /= p;
        if d > 0 {
            let member = if kind == PadicKind::Phi || i == 0 {
                padic_cartier(PadicKind::Phi, i, x)
            } else {
                padic_cartier(PadicKind::Psi, i, x)
            };
            acc = acc.mul(&member.pow(d));
        }
        i += 1;
    }
    acc
}

/// The vector `(φ_0(x), ..., φ_{n-1}(x)) mod p`; ranging `x` over the
/// residues modulo `p^n` hits every vector exactly once, and the image is
/// simply the digit vector of `x`.
pub fn residue_vector(x: &PadicInt, n: usize) -> Result<Vec<u64>> {
    if n > x.ndigits() {
        return Err(Error::InsufficientPrecision(format!(
            "residue window {n} exceeds {} tracked digits",
            x.ndigits()
        )));
    }
    Ok((0..n).map(|i| padic_cartier(PadicKind::Phi, i as u64, x).digit(0)).collect())
}
