//! Hasse derivatives, Cartier operator families, shift operators, and the
//! identities relating them: decomposition, expansions of Cartier powers in
//! Hasse derivatives, binomial inversion, q-th power maps, composition and
//! product rules.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fq::{lucas_binom, signed_binom, Field, FieldElem};
use crate::series::{TruncatedLaurent, PREC_CAP};

/// `b^e` with overflow checks; operator indices stay well inside `u64` at
/// desk scale, so overflow means a caller bug.
pub fn ipow(b: u64, e: u32) -> u64 {
    b.checked_pow(e).expect("exponent within desk-scale budget")
}

/// Base-`qbase` digit data of an index `n`: digit length `k` (with
/// `q^{k-1} <= n < q^k`, or `(n,k)=(0,0)`), the digits themselves, the
/// leading term `qn = n_{k-1} q^{k-1}` and the tail `n_minus = n - qn`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitIndex {
    pub n: u64,
    pub k: u32,
    pub digits: Vec<u64>,
    pub qn: u64,
    pub n_minus: u64,
}

pub fn digit_index(qbase: u64, n: u64) -> DigitIndex {
    if n == 0 {
        return DigitIndex { n, k: 0, digits: Vec::new(), qn: 0, n_minus: 0 };
    }
    let mut digits = Vec::new();
    let mut v = n;
    while v > 0 {
        digits.push(v % qbase);
        v /= qbase;
    }
    let k = digits.len() as u32;
    let qn = digits[k as usize - 1] * ipow(qbase, k - 1);
    DigitIndex { n, k, digits, qn, n_minus: n - qn }
}

/// Largest precision for which output coefficient `l` (at stride `stride`
/// and offset `offset`) is determined by input coefficients below `prec`.
fn contracted_prec(x: &TruncatedLaurent, offset: i64, stride: i64) -> i64 {
    if x.is_exact() {
        PREC_CAP
    } else {
        (x.prec() - 1 - offset).div_euclid(stride) + 1
    }
}

fn shifted_prec(x: &TruncatedLaurent, n: i64) -> i64 {
    if x.is_exact() {
        PREC_CAP
    } else {
        x.prec() - n
    }
}

fn require_nonneg_valuation(x: &TruncatedLaurent) -> Result<()> {
    match x.valuation() {
        Some(v) if v < 0 => Err(Error::NegativeValuation),
        _ => Ok(()),
    }
}

/// Hasse derivative `D_n`: coefficient of `t^{i-n}` is `C(i,n) x_i`, with
/// the reflection formula for negative `i`.
pub fn hasse(n: u64, x: &TruncatedLaurent) -> TruncatedLaurent {
    let f = x.field.clone();
    let prec = shifted_prec(x, n as i64);
    let mut coeffs = Vec::with_capacity((x.hi() - x.lo()).max(0) as usize);
    for i in x.lo()..x.hi() {
        let b = signed_binom(i, n, f.p);
        coeffs.push(f.mul(x.coeff_or_zero(i), FieldElem(b)));
    }
    TruncatedLaurent::new(f, x.lo() - n as i64, prec, coeffs)
}

/// `Δ_{r,m}`: the coefficient of `t^l` in the output is `x_{l q^m + r}`.
pub fn cartier_delta(r: u64, m: u32, x: &TruncatedLaurent) -> Result<TruncatedLaurent> {
    let f = x.field.clone();
    let qm = ipow(f.q, m);
    if m < 1 || r >= qm {
        return Err(Error::IndexRange(format!("delta index r={r} outside [0, q^m={qm})")));
    }
    require_nonneg_valuation(x)?;
    let prec = contracted_prec(x, r as i64, qm as i64);
    if x.is_zero() {
        return Ok(TruncatedLaurent::zero(f, prec));
    }
    let mut coeffs = Vec::new();
    let mut i = r as i64;
    while i < x.hi() {
        coeffs.push(x.coeff_or_zero(i));
        i += qm as i64;
    }
    Ok(TruncatedLaurent::new(f, 0, prec, coeffs))
}

/// `φ_n` for digit base `q = p^a`, total on Laurent series: extracts the
/// coefficients with exponent congruent to `n` modulo `q^k` and divides by
/// `t^n`. On power series this is `Δ_{n,k}` raised to the `q^k`-th power.
pub fn phi_base(a: u32, n: u64, x: &TruncatedLaurent) -> TruncatedLaurent {
    let f = x.field.clone();
    let q = ipow(f.p, a);
    let di = digit_index(q, n);
    let qk = ipow(q, di.k) as i64;
    let prec = shifted_prec(x, n as i64);
    let mut out = Vec::new();
    let mut lo = 0i64;
    let mut first = true;
    for i in x.lo()..x.hi() {
        if (i - n as i64).rem_euclid(qk) != 0 {
            continue;
        }
        if first {
            lo = i - n as i64;
            first = false;
        } else {
            // fill the stride gap with zeros
            while (lo + out.len() as i64) < i - n as i64 {
                out.push(FieldElem(0));
            }
        }
        out.push(x.coeff_or_zero(i));
    }
    TruncatedLaurent::new(f, lo, prec, out)
}

pub fn phi(n: u64, x: &TruncatedLaurent) -> TruncatedLaurent {
    phi_base(x.field.e, n, x)
}

/// `ψ_n` for digit base `q = p^a`: coefficient of `t^i` is the `q^k`-th root
/// of `x_{i q^k + n}`. Defined on power series; the Laurent extension (behind
/// `extend`) takes `q^k`-th roots of `φ_n(x)` exponent-wise.
pub fn psi_base(a: u32, n: u64, x: &TruncatedLaurent, extend: bool) -> Result<TruncatedLaurent> {
    let f = x.field.clone();
    let q = ipow(f.p, a);
    let di = digit_index(q, n);
    let qk = ipow(q, di.k) as i64;
    if x.valuation().map_or(false, |v| v < 0) {
        if !extend {
            return Err(Error::NegativeValuation);
        }
        let ph = phi_base(a, n, x);
        let prec = if ph.is_exact() {
            PREC_CAP
        } else {
            (ph.prec() - 1).div_euclid(qk) + 1
        };
        let mut out = TruncatedLaurent::zero(f.clone(), prec);
        for i in ph.lo()..ph.hi() {
            let c = ph.coeff_or_zero(i);
            if c.0 == 0 {
                continue;
            }
            debug_assert_eq!(i.rem_euclid(qk), 0);
            let root = f.frobenius_root(c, a * di.k);
            out = out.add(&TruncatedLaurent::monomial(f.clone(), root, i.div_euclid(qk)))?;
        }
        return Ok(out);
    }
    let prec = contracted_prec(x, n as i64, qk);
    if x.is_zero() {
        return Ok(TruncatedLaurent::zero(f, prec));
    }
    let mut coeffs = Vec::new();
    let mut i = n as i64;
    while i < x.hi() {
        coeffs.push(f.frobenius_root(x.coeff_or_zero(i), a * di.k));
        i += qk;
    }
    Ok(TruncatedLaurent::new(f, 0, prec, coeffs))
}

pub fn psi(n: u64, x: &TruncatedLaurent) -> Result<TruncatedLaurent> {
    psi_base(x.field.e, n, x, false)
}

/// Shift map `S^{(n)}`: drops coefficients below `t^n`, divides by `t^n`.
pub fn shift(n: u64, x: &TruncatedLaurent) -> Result<TruncatedLaurent> {
    require_nonneg_valuation(x)?;
    let f = x.field.clone();
    let prec = shifted_prec(x, n as i64);
    if x.is_zero() {
        return Ok(TruncatedLaurent::zero(f, prec));
    }
    let coeffs = (n as i64..x.hi().max(n as i64)).map(|i| x.coeff_or_zero(i)).collect();
    Ok(TruncatedLaurent::new(f, 0, prec, coeffs))
}

/// All components `[Δ_{r,m}(x)]_{0 <= r < q^m}`; reconstruction
/// `Σ_r T^r Δ_{r,m}(x)^{q^m} = x` holds up to precision.
pub fn decompose(x: &TruncatedLaurent, m: u32) -> Result<Vec<TruncatedLaurent>> {
    let qm = ipow(x.field.q, m);
    (0..qm).map(|r| cartier_delta(r, m, x)).collect()
}

/// Coefficient series `C^{(t)}_{r,n}` in the expansion
/// `Δ_{r,m}^{q^t} = Σ_n C^{(t)}_{r,n} D_n`: with `n = l q^m + s`,
/// `C^{(t)}_{r,n} = (-1)^{n-r} C(s,r) T^{s-r} (T^{q^m} - T^{q^t})^l`.
pub fn delta_power_in_hasse(
    field: &Field,
    r: u64,
    m: u32,
    t: u32,
    n: u64,
) -> Result<TruncatedLaurent> {
    let qm = ipow(field.q, m);
    if m < 1 || r >= qm {
        return Err(Error::IndexRange(format!("delta index r={r} outside [0, q^m={qm})")));
    }
    let l = n / qm;
    let s = n % qm;
    let b = lucas_binom(s, r, field.p);
    if b == 0 {
        return Ok(TruncatedLaurent::zero(field.clone(), PREC_CAP));
    }
    let c = field.mul(FieldElem(b), field.sign(n - r));
    let head = TruncatedLaurent::monomial(field.clone(), c, s as i64 - r as i64);
    let bracket = TruncatedLaurent::monomial(field.clone(), FieldElem(1), ipow(field.q, m) as i64)
        .sub(&TruncatedLaurent::monomial(
            field.clone(),
            FieldElem(1),
            ipow(field.q, t) as i64,
        ))?;
    head.mul(&bracket.pow(l as usize))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum InversionDirection {
    /// `D_n = Σ_r C(r,n) T^{r-n} φ_r`
    HasseToPhi,
    /// `φ_n = Σ_r C(r,n) (-T)^{r-n} D_r`
    PhiToHasse,
}

/// Row of the binomial inversion between Hasse derivatives and `φ`, indexed
/// `r = n .. q^k - 1`. Requires `q^{k-1} <= n < q^k` or `(n,k) = (0,0)`.
pub fn inversion_row(
    field: &Field,
    dir: InversionDirection,
    n: u64,
    k: u32,
) -> Result<Vec<TruncatedLaurent>> {
    let q = field.q;
    let valid = (n == 0 && k == 0) || (k >= 1 && ipow(q, k - 1) <= n && n < ipow(q, k));
    if !valid {
        return Err(Error::IndexRange(format!("n={n} is not a digit-length-{k} index")));
    }
    let qk = ipow(q, k);
    let mut row = Vec::new();
    for r in n..qk.max(n + 1) {
        let b = lucas_binom(r, n, field.p);
        let c = match dir {
            InversionDirection::HasseToPhi => FieldElem(b),
            InversionDirection::PhiToHasse => field.mul(FieldElem(b), field.sign(r - n)),
        };
        row.push(TruncatedLaurent::monomial(field.clone(), c, (r - n) as i64));
    }
    Ok(row)
}

/// Full `size x size` binomial matrix `C(±T)` with entries
/// `C(m,n) (±T)^{m-n}`; the two signs are mutually inverse.
pub fn inversion_matrix(field: &Field, size: u64, negated: bool) -> Vec<Vec<TruncatedLaurent>> {
    (0..size)
        .map(|n| {
            (0..size)
                .map(|m| {
                    if m < n {
                        return TruncatedLaurent::zero(field.clone(), PREC_CAP);
                    }
                    let b = lucas_binom(m, n, field.p);
                    let c = if negated {
                        field.mul(FieldElem(b), field.sign(m - n))
                    } else {
                        FieldElem(b)
                    };
                    TruncatedLaurent::monomial(field.clone(), c, (m - n) as i64)
                })
                .collect()
        })
        .collect()
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PowerMode {
    ViaPhi,
    ViaHasse,
}

/// `x^{q^m}` through an operator expansion: either
/// `x + Σ_n (T^{n q^m} - T^{q(n) + q^m n_-}) φ_n(x)` or the Hasse form
/// `Σ_n (T^{q^m} - T)^n D_n(x)`.
pub fn qth_power_expansion(
    mode: PowerMode,
    m: u32,
    x: &TruncatedLaurent,
) -> Result<TruncatedLaurent> {
    require_nonneg_valuation(x)?;
    let f = x.field.clone();
    let q = f.q;
    let limit = if x.is_exact() { x.hi().max(1) } else { x.prec() } as u64;
    match mode {
        PowerMode::ViaPhi => {
            let mut acc = x.clone();
            for n in 1..=limit {
                let di = digit_index(q, n);
                let e1 = (n as i64) * ipow(q, m) as i64;
                let e2 = di.qn as i64 + ipow(q, m) as i64 * di.n_minus as i64;
                let coef = TruncatedLaurent::monomial(f.clone(), FieldElem(1), e1)
                    .sub(&TruncatedLaurent::monomial(f.clone(), FieldElem(1), e2))?;
                acc = acc.add(&coef.mul(&phi(n, x))?)?;
            }
            Ok(acc)
        }
        PowerMode::ViaHasse => {
            let bracket = TruncatedLaurent::monomial(f.clone(), FieldElem(1), ipow(q, m) as i64)
                .sub(&TruncatedLaurent::monomial(f.clone(), FieldElem(1), 1))?;
            let mut power = TruncatedLaurent::one(f.clone());
            let mut acc = TruncatedLaurent::zero(f.clone(), PREC_CAP);
            for n in 0..=limit {
                acc = acc.add(&power.mul(&hasse(n, x))?)?;
                power = power.mul(&bracket)?;
            }
            Ok(acc)
        }
    }
}

/// Sparse expansion of a continuous linear operator in the `φ` basis via the
/// coefficient-recovery rule `c_n = L(T^n) - T^{q(n)} L(T^{n_-})`, computed
/// from the operator's values on monomials.
fn phi_expansion_from_monomials<L>(
    field: &Field,
    n_max: u64,
    op: L,
) -> Result<BTreeMap<u64, TruncatedLaurent>>
where
    L: Fn(u64) -> Result<TruncatedLaurent>,
{
    let q = field.q;
    let mut out = BTreeMap::new();
    for n in 0..=n_max {
        let c = if n == 0 {
            op(0)?
        } else {
            let di = digit_index(q, n);
            let head = TruncatedLaurent::monomial(field.clone(), FieldElem(1), di.qn as i64);
            op(n)?.sub(&head.mul(&op(di.n_minus)?)?)?
        };
        if !c.is_zero() {
            out.insert(n, c);
        }
    }
    Ok(out)
}

/// Expansion of `Δ_{r,m}^{q^m}` (power form) or `Δ_{r,m}` in the `φ` basis,
/// with entries up to index `n_max`. Requires the digit length of `r` to be
/// at most `m`.
pub fn delta_in_phi(
    field: &Field,
    r: u64,
    m: u32,
    power_form: bool,
    n_max: u64,
) -> Result<BTreeMap<u64, TruncatedLaurent>> {
    let q = field.q;
    let qm = ipow(q, m);
    if m < 1 || r >= qm {
        return Err(Error::IndexRange(format!("delta index r={r} outside [0, q^m={qm})")));
    }
    phi_expansion_from_monomials(field, n_max, |i| {
        // Δ_{r,m}(T^i) = T^l when i = l q^m + r, else 0
        if i % qm == r {
            let l = (i / qm) as i64;
            let e = if power_form { l * qm as i64 } else { l };
            Ok(TruncatedLaurent::monomial(field.clone(), FieldElem(1), e))
        } else {
            Ok(TruncatedLaurent::zero(field.clone(), PREC_CAP))
        }
    })
}

/// Expansion of `φ_outer ∘ φ_inner` in the `φ` basis, entries up to `n_max`.
/// The map is zero when the digit lengths agree or the outer index is the
/// shorter one.
pub fn compose_phi(
    field: &Field,
    outer: u64,
    inner: u64,
    n_max: u64,
) -> Result<BTreeMap<u64, TruncatedLaurent>> {
    if outer < 1 || inner < 1 {
        return Err(Error::IndexRange("composition indices must be positive".into()));
    }
    let q = field.q;
    let k_in = digit_index(q, inner).k;
    let k_out = digit_index(q, outer).k;
    let qk_in = ipow(q, k_in) as i64;
    let qk_out = ipow(q, k_out) as i64;
    phi_expansion_from_monomials(field, n_max, |i| {
        let i = i as i64;
        // φ_inner(T^i), then φ_outer of the result, both on monomials
        if i.rem_euclid(qk_in) != inner as i64 {
            return Ok(TruncatedLaurent::zero(field.clone(), PREC_CAP));
        }
        let j = i - inner as i64;
        if j.rem_euclid(qk_out) != outer as i64 {
            return Ok(TruncatedLaurent::zero(field.clone(), PREC_CAP));
        }
        Ok(TruncatedLaurent::monomial(field.clone(), FieldElem(1), j - outer as i64))
    })
}

/// Evaluate a sparse `φ`-expansion on `x`.
pub fn apply_phi_map(
    map: &BTreeMap<u64, TruncatedLaurent>,
    x: &TruncatedLaurent,
) -> Result<TruncatedLaurent> {
    let mut acc = TruncatedLaurent::zero(x.field.clone(), PREC_CAP);
    for (&n, c) in map {
        acc = acc.add(&c.mul(&phi(n, x))?)?;
    }
    Ok(acc)
}

/// The digit-length-1 operator family at index `i < q`: extracts exponents
/// congruent to `i` mod `q` and divides by `t^i`. Agrees with `φ_i` for
/// `1 <= i < q`; at `i = 0` this is the `q`-th-power twist of `Δ_{0,1}`,
/// not the identity.
fn phi_level1(i: u64, x: &TruncatedLaurent) -> TruncatedLaurent {
    let f = x.field.clone();
    let q = f.q as i64;
    let prec = shifted_prec(x, i as i64);
    let mut out = TruncatedLaurent::zero(f.clone(), prec);
    for e in x.lo()..x.hi() {
        if (e - i as i64).rem_euclid(q) != 0 {
            continue;
        }
        let c = x.coeff_or_zero(e);
        if c.0 != 0 {
            out = out
                .add(&TruncatedLaurent::monomial(f.clone(), c, e - i as i64))
                .expect("same field");
        }
    }
    out
}

/// Product rule `φ_n(xy) = Σ_{i+j=n} φ_i(x)φ_j(y)
/// + t^q Σ_{i+j=q+n, i,j<q} φ_i(x)φ_j(y)`, valid for `1 <= n < q` only.
/// All factors are the digit-length-1 family, so the `i = 0` factor is the
/// multiples-of-`q` extraction rather than the identity.
pub fn phi_product(
    n: u64,
    x: &TruncatedLaurent,
    y: &TruncatedLaurent,
) -> Result<TruncatedLaurent> {
    let f = x.field.clone();
    if x.field != y.field {
        return Err(Error::FieldMismatch(x.field.to_string(), y.field.to_string()));
    }
    let q = f.q;
    if n < 1 || n >= q {
        return Err(Error::IndexRange(format!("product rule requires 1 <= n < q, got n={n}")));
    }
    let mut acc = TruncatedLaurent::zero(f.clone(), PREC_CAP);
    for i in 0..=n {
        acc = acc.add(&phi_level1(i, x).mul(&phi_level1(n - i, y))?)?;
    }
    let mut tail = TruncatedLaurent::zero(f.clone(), PREC_CAP);
    for i in (n + 1)..q {
        let j = q + n - i;
        if j < q {
            tail = tail.add(&phi_level1(i, x).mul(&phi_level1(j, y))?)?;
        }
    }
    let tq = TruncatedLaurent::monomial(f.clone(), FieldElem(1), q as i64);
    acc.add(&tq.mul(&tail)?)
}

/// `Σ_{r=n}^{q^k-1} C(r,n) C(m+r-1,r) mod p`; equals `(-1)^n` when
/// `n + (m mod q^k) = q^k` and `0` otherwise.
pub fn binom_sum_congruence(m: u64, n: u64, qk: u64, p: u64) -> Result<u64> {
    if n < 1 || n >= qk {
        return Err(Error::IndexRange(format!("need 1 <= n < q^k, got n={n}, q^k={qk}")));
    }
    if m < 1 {
        return Err(Error::IndexRange("need m >= 1".into()));
    }
    let mut acc = 0u64;
    for r in n..qk {
        acc = (acc + lucas_binom(r, n, p) * lucas_binom(m + r - 1, r, p)) % p;
    }
    Ok(acc)
}
