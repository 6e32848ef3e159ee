//! Truncated power and Laurent series over `F_q` with explicit precision.
//!
//! A [`TruncatedLaurent`] knows every coefficient of exponent below `prec` and
//! nothing above: the value is `Σ_{i<prec} a_i t^i + O(t^prec)`. Exact
//! polynomials carry the sentinel precision [`PREC_CAP`]. All operations
//! propagate precision pessimistically so no unknown digit is ever reported.

use std::fmt;

use crate::error::{Error, Result};
use crate::fq::{Field, FieldElem};

/// Sentinel precision for exact polynomials. Large enough that no desk-scale
/// computation reaches it, small enough that precision arithmetic never
/// overflows `i64`.
pub const PREC_CAP: i64 = 1 << 30;

fn clamp_prec(x: i128) -> i64 {
    x.min(PREC_CAP as i128) as i64
}

/// A Laurent series known modulo `O(t^prec)`. Coefficients are stored on
/// `[lo, lo + coeffs.len())`; everything else below `prec` is zero. After
/// normalization the first and last stored coefficients are nonzero, and the
/// zero series has an empty coefficient vector with `lo = prec`.
#[derive(Clone, Debug)]
pub struct TruncatedLaurent {
    pub field: Field,
    lo: i64,
    prec: i64,
    coeffs: Vec<FieldElem>,
}

impl TruncatedLaurent {
    pub fn new(field: Field, lo: i64, prec: i64, coeffs: Vec<FieldElem>) -> TruncatedLaurent {
        let mut s = TruncatedLaurent { field, lo, prec: prec.min(PREC_CAP), coeffs };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        // drop tracked coefficients at or above prec
        let keep = (self.prec as i128 - self.lo as i128).clamp(0, self.coeffs.len() as i128);
        self.coeffs.truncate(keep as usize);
        while self.coeffs.last().map(|c| c.0) == Some(0) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.0 == 0).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.lo += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.lo = self.prec;
        }
    }

    pub fn zero(field: Field, prec: i64) -> TruncatedLaurent {
        let prec = prec.min(PREC_CAP);
        TruncatedLaurent { field, lo: prec, prec, coeffs: Vec::new() }
    }

    pub fn one(field: Field) -> TruncatedLaurent {
        Self::monomial(field, FieldElem(1), 0)
    }

    /// Exact monomial `c * t^exp`.
    pub fn monomial(field: Field, c: FieldElem, exp: i64) -> TruncatedLaurent {
        TruncatedLaurent::new(field, exp, PREC_CAP, vec![c])
    }

    /// Exact polynomial from coefficients of `t^0, t^1, …`.
    pub fn poly(field: Field, coeffs: Vec<FieldElem>) -> TruncatedLaurent {
        TruncatedLaurent::new(field, 0, PREC_CAP, coeffs)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == PREC_CAP
    }

    /// True when every known coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `t^i`; `None` when `i` is beyond the precision bound.
    pub fn coeff(&self, i: i64) -> Option<FieldElem> {
        if i >= self.prec {
            return None;
        }
        if i < self.lo || i >= self.lo + self.coeffs.len() as i64 {
            return Some(FieldElem(0));
        }
        Some(self.coeffs[(i - self.lo) as usize])
    }

    /// Coefficient of `t^i`, treating unknown positions as zero. Only sound
    /// when the caller has already bounded the relevant indices by `prec`.
    pub fn coeff_or_zero(&self, i: i64) -> FieldElem {
        self.coeff(i).unwrap_or(FieldElem(0))
    }

    /// Smallest exponent with a nonzero coefficient; `None` means the series
    /// is zero within precision (valuation at least `prec`).
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.lo)
        }
    }

    /// Largest exponent with a nonzero known coefficient, for iteration.
    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64
    }

    fn check_field(&self, other: &TruncatedLaurent) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.to_string(), other.field.to_string()));
        }
        Ok(())
    }

    pub fn add(&self, other: &TruncatedLaurent) -> Result<TruncatedLaurent> {
        self.check_field(other)?;
        let prec = self.prec.min(other.prec);
        let stored = [self, other]
            .iter()
            .filter(|s| !s.coeffs.is_empty())
            .map(|s| (s.lo, s.hi()))
            .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)));
        let (lo, hi) = match stored {
            None => return Ok(TruncatedLaurent::zero(self.field.clone(), prec)),
            Some((lo, hi)) => (lo.min(prec), hi.min(prec).max(lo.min(prec))),
        };
        let mut coeffs = Vec::with_capacity((hi - lo) as usize);
        for i in lo..hi {
            coeffs.push(self.field.add(self.coeff_or_zero(i), other.coeff_or_zero(i)));
        }
        Ok(TruncatedLaurent::new(self.field.clone(), lo, prec, coeffs))
    }

    pub fn neg(&self) -> TruncatedLaurent {
        let coeffs = self.coeffs.iter().map(|&c| self.field.neg(c)).collect();
        TruncatedLaurent { field: self.field.clone(), lo: self.lo, prec: self.prec, coeffs }
    }

    pub fn sub(&self, other: &TruncatedLaurent) -> Result<TruncatedLaurent> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: FieldElem) -> TruncatedLaurent {
        if c.0 == 0 {
            return TruncatedLaurent::zero(self.field.clone(), self.prec);
        }
        let coeffs = self.coeffs.iter().map(|&a| self.field.mul(a, c)).collect();
        TruncatedLaurent { field: self.field.clone(), lo: self.lo, prec: self.prec, coeffs }
    }

    /// Multiply by `t^k` (exact reindexing).
    pub fn shift_exp(&self, k: i64) -> TruncatedLaurent {
        TruncatedLaurent {
            field: self.field.clone(),
            lo: self.lo + k,
            prec: clamp_prec(self.prec as i128 + k as i128),
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn mul(&self, other: &TruncatedLaurent) -> Result<TruncatedLaurent> {
        self.check_field(other)?;
        let prec = clamp_prec(
            (self.prec as i128 + other.lo as i128).min(other.prec as i128 + self.lo as i128),
        );
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(TruncatedLaurent::zero(self.field.clone(), prec));
        }
        let lo = self.lo + other.lo;
        let len = (self.coeffs.len() + other.coeffs.len() - 1)
            .min(((prec as i128 - lo as i128).max(0)) as usize);
        let mut coeffs = vec![FieldElem(0); len];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.0 == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] = self.field.add(coeffs[i + j], self.field.mul(a, b));
            }
        }
        Ok(TruncatedLaurent::new(self.field.clone(), lo, prec, coeffs))
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, n: usize) -> TruncatedLaurent {
        let mut out = TruncatedLaurent::one(self.field.clone());
        for _ in 0..n {
            out = out.mul(self).expect("same field");
        }
        out
    }

    /// Inverse to precision `out_prec`, capped by what the input precision
    /// supports: if `v = v(a)`, the product rule limits the result to
    /// `O(t^{prec - 2v})`.
    pub fn inv_to(&self, out_prec: i64) -> Result<TruncatedLaurent> {
        let v = self.valuation().ok_or(Error::ZeroSeries(self.prec))?;
        let attainable = if self.is_exact() {
            PREC_CAP
        } else {
            clamp_prec(self.prec as i128 - 2 * v as i128)
        };
        let out_prec = out_prec.min(attainable);
        // unit part u = a / t^v, invert by the convolution recurrence
        let n = ((out_prec as i128 + v as i128).max(1)) as usize;
        let u0inv = self.field.inv(self.coeffs[0])?;
        let mut b = vec![FieldElem(0); n];
        b[0] = u0inv;
        for k in 1..n {
            let mut acc = FieldElem(0);
            for i in 1..=k.min(self.coeffs.len() - 1) {
                acc = self.field.add(acc, self.field.mul(self.coeffs[i], b[k - i]));
            }
            b[k] = self.field.neg(self.field.mul(u0inv, acc));
        }
        Ok(TruncatedLaurent::new(self.field.clone(), -v, out_prec, b))
    }

    /// The exact `p^j`-th power: coefficients raised to `p^j`, exponents
    /// multiplied by `p^j`.
    pub fn frobenius_power(&self, j: u32) -> TruncatedLaurent {
        let pj = (self.field.p as i128).pow(j);
        let prec = if self.is_exact() {
            PREC_CAP
        } else {
            clamp_prec(self.prec as i128 * pj)
        };
        let mut out = TruncatedLaurent::zero(self.field.clone(), prec);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.0 == 0 {
                continue;
            }
            let exp = clamp_prec((self.lo as i128 + i as i128) * pj);
            let term = TruncatedLaurent::monomial(self.field.clone(), self.field.frobenius(c, j), exp);
            out = out.add(&term).expect("same field");
        }
        out
    }

    /// `x^{q^m}` where `q = p^e` is the field size.
    pub fn q_power(&self, m: u32) -> TruncatedLaurent {
        self.frobenius_power(self.field.e * m)
    }

    /// Apply `frobenius_root(·, j)` to every coefficient, exponents unchanged.
    pub fn coeff_root(&self, j: u32) -> TruncatedLaurent {
        let coeffs = self.coeffs.iter().map(|&c| self.field.frobenius_root(c, j)).collect();
        TruncatedLaurent { field: self.field.clone(), lo: self.lo, prec: self.prec, coeffs }
    }

    /// Apply `frobenius(·, j)` to every coefficient, exponents unchanged.
    pub fn coeff_frobenius(&self, j: u32) -> TruncatedLaurent {
        let coeffs = self.coeffs.iter().map(|&c| self.field.frobenius(c, j)).collect();
        TruncatedLaurent { field: self.field.clone(), lo: self.lo, prec: self.prec, coeffs }
    }

    /// Lower the precision bound (no-op if already at most `prec`).
    pub fn truncate(&self, prec: i64) -> TruncatedLaurent {
        let mut s = self.clone();
        s.prec = s.prec.min(prec);
        s.normalize();
        s
    }

    /// Equality modulo `O(t^min(prec_a, prec_b))`.
    pub fn eq_to_prec(&self, other: &TruncatedLaurent) -> bool {
        if self.field != other.field {
            return false;
        }
        let prec = self.prec.min(other.prec);
        let stored = [self, other]
            .iter()
            .filter(|s| !s.coeffs.is_empty())
            .map(|s| (s.lo, s.hi()))
            .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)));
        match stored {
            None => true,
            Some((lo, hi)) => {
                (lo..hi.min(prec)).all(|i| self.coeff_or_zero(i) == other.coeff_or_zero(i))
            }
        }
    }

    /// Bit-exact text form: `q=p^e;lo=<int>;prec=<int>;coeffs=<elem>(|<elem>)*`.
    pub fn to_text(&self) -> String {
        let coeffs = (self.lo..self.hi())
            .map(|i| self.field.elem_to_text(self.coeff_or_zero(i)))
            .collect::<Vec<_>>()
            .join("|");
        format!("q={};lo={};prec={};coeffs={}", self.field, self.lo, self.prec, coeffs)
    }

    pub fn from_text(s: &str) -> Result<TruncatedLaurent> {
        let mut q = None;
        let mut lo = None;
        let mut prec = None;
        let mut coeffs_str = None;
        for part in s.trim().split(';') {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad series segment '{part}'")))?;
            match key.trim() {
                "q" => q = Some(Field::parse(val)?),
                "lo" => {
                    lo = Some(val.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad lo '{val}'")))?)
                }
                "prec" => {
                    prec = Some(val.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad prec '{val}'")))?)
                }
                "coeffs" => coeffs_str = Some(val),
                other => return Err(Error::Parse(format!("unknown series key '{other}'"))),
            }
        }
        let field = q.ok_or_else(|| Error::Parse("missing q=".into()))?;
        let lo = lo.ok_or_else(|| Error::Parse("missing lo=".into()))?;
        let prec = prec.ok_or_else(|| Error::Parse("missing prec=".into()))?;
        let coeffs_str = coeffs_str.ok_or_else(|| Error::Parse("missing coeffs=".into()))?;
        let mut coeffs = Vec::new();
        if !coeffs_str.trim().is_empty() {
            for part in coeffs_str.split('|') {
                coeffs.push(field.elem_from_text(part)?);
            }
        }
        Ok(TruncatedLaurent::new(field, lo, prec, coeffs))
    }

    /// Human-readable rendering, e.g. `t^-1 + 1 + t^2 + O(t^8)`.
    pub fn to_human(&self) -> String {
        let mut terms = Vec::new();
        for i in self.lo..self.hi() {
            let c = self.coeff_or_zero(i);
            if c.0 == 0 {
                continue;
            }
            let cs = if self.field.e == 1 {
                c.0.to_string()
            } else {
                format!("({})", self.field.elem_to_text(c))
            };
            let t = match i {
                0 => String::new(),
                1 => "t".into(),
                _ => format!("t^{i}"),
            };
            terms.push(match (cs.as_str(), t.is_empty()) {
                (_, true) => cs,
                ("1", false) => t,
                _ => format!("{cs}*{t}"),
            });
        }
        if terms.is_empty() {
            terms.push("0".into());
        }
        if !self.is_exact() {
            terms.push(format!("O(t^{})", self.prec));
        }
        terms.join(" + ")
    }

    /// Parse either the bit-exact text form or a human polynomial such as
    /// `T^3 + 2*T - 1`, `t^-2 + (1,1)*t` or `1 + t + O(t^16)`. Integer
    /// coefficients are reduced into the prime subfield; extension-field
    /// coefficients use parenthesized coordinate lists.
    pub fn parse(field: &Field, s: &str) -> Result<TruncatedLaurent> {
        let s = s.trim();
        if s.starts_with("q=") {
            let out = Self::from_text(s)?;
            if &out.field != field {
                return Err(Error::FieldMismatch(field.to_string(), out.field.to_string()));
            }
            return Ok(out);
        }
        let mut prec = PREC_CAP;
        let mut out = TruncatedLaurent::zero(field.clone(), PREC_CAP);
        // split into signed terms at top level
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        let mut depth = 0i32;
        for ch in s.chars() {
            match ch {
                '(' => {
                    depth += 1;
                    cur.push(ch);
                }
                ')' => {
                    depth -= 1;
                    cur.push(ch);
                }
                '+' | '-' if depth == 0 && !cur.trim().is_empty() && !cur.trim_end().ends_with('^') => {
                    terms.push((neg, cur.trim().to_string()));
                    neg = ch == '-';
                    cur = String::new();
                }
                '-' if depth == 0 && cur.trim().is_empty() => {
                    neg = !neg;
                }
                _ => cur.push(ch),
            }
        }
        if !cur.trim().is_empty() {
            terms.push((neg, cur.trim().to_string()));
        }
        for (neg, term) in terms {
            if let Some(inner) = term
                .strip_prefix("O(")
                .and_then(|r| r.strip_suffix(')'))
            {
                let exp_str = inner
                    .trim()
                    .trim_start_matches(|c| c == 't' || c == 'T')
                    .trim_start_matches('^');
                let p: i64 = if exp_str.is_empty() {
                    1
                } else {
                    exp_str.trim().parse().map_err(|_| Error::Parse(format!("bad O-term '{term}'")))?
                };
                prec = prec.min(p);
                continue;
            }
            let (coef_str, exp) = match term.find(|c| c == 't' || c == 'T') {
                Some(pos) if depth_free(&term[..pos]) => {
                    let coef = term[..pos].trim().trim_end_matches('*').trim();
                    let rest = term[pos + 1..].trim();
                    let exp: i64 = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^')
                            .ok_or_else(|| Error::Parse(format!("bad term '{term}'")))?
                            .trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad exponent in '{term}'")))?
                    };
                    (coef.to_string(), exp)
                }
                _ => (term.clone(), 0),
            };
            let c = parse_coef(field, &coef_str)?;
            let c = if neg { field.neg(c) } else { c };
            out = out.add(&TruncatedLaurent::monomial(field.clone(), c, exp))?;
        }
        Ok(out.truncate(prec))
    }
}

fn depth_free(s: &str) -> bool {
    // the variable must not sit inside a coefficient tuple
    !s.contains('(') || s.matches('(').count() == s.matches(')').count()
}

fn parse_coef(field: &Field, s: &str) -> Result<FieldElem> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(FieldElem(1));
    }
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        return field.elem_from_text(inner);
    }
    let n: u64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad coefficient '{s}'")))?;
    Ok(FieldElem(n % field.p))
}

impl fmt::Display for TruncatedLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_human())
    }
}
