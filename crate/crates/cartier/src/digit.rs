//! Digit-product extensions of the linear basis families: from a family
//! `{f_i}` the function `F_n = Π f_i^{n_i}` over the base-q digits of `n`
//! (with a starred variant replacing digit-(q-1) factors by
//! `f_i^{q-1} - 1`), orthogonality sums, and expansion of arbitrary
//! tabulated continuous functions on the power series ring.

use serde_json::{json, Map, Value};

use crate::carlitz::poly_by_index;
use crate::error::{Error, Result};
use crate::fq::Field;
use crate::linbasis::{basis_apply, BasisId};
use crate::operators::ipow;
use crate::series::{TruncatedLaurent, PREC_CAP};

const SUM_BUDGET: u128 = 1 << 20;

/// Index of a polynomial of degree `< window` in the enumeration of
/// [`poly_by_index`]: digit `i` of the result is the packed coefficient of
/// `T^i`.
pub fn index_of(x: &TruncatedLaurent, window: u32) -> u64 {
    let q = x.field.q;
    (0..window as i64).rev().fold(0, |acc, i| acc * q + x.coeff_or_zero(i).0)
}

/// A continuous function tabulated on the residues modulo `T^window`:
/// `values[i]` is the value on the polynomial enumerated at index `i`.
/// Linearity is not assumed; the table represents the locally constant
/// function `x -> values[x mod T^window]`.
#[derive(Clone, Debug)]
pub struct ContinuousFunc {
    pub field: Field,
    pub window: u32,
    pub values: Vec<TruncatedLaurent>,
}

impl ContinuousFunc {
    pub fn new(field: Field, window: u32, values: Vec<TruncatedLaurent>) -> Result<ContinuousFunc> {
        let count = (field.q as u128).pow(window);
        if count > SUM_BUDGET {
            return Err(Error::Budget(format!("window {window} needs q^{window} table entries")));
        }
        if values.len() as u128 != count {
            return Err(Error::InsufficientDepth(format!(
                "window {window} needs {count} table entries, got {}",
                values.len()
            )));
        }
        for v in &values {
            if v.field != field {
                return Err(Error::FieldMismatch(field.to_string(), v.field.to_string()));
            }
        }
        Ok(ContinuousFunc { field, window, values })
    }

    /// Tabulate an arbitrary function of the residue representatives.
    pub fn tabulate(
        field: &Field,
        window: u32,
        mut f: impl FnMut(&TruncatedLaurent) -> Result<TruncatedLaurent>,
    ) -> Result<ContinuousFunc> {
        let count = ipow(field.q, window);
        let values = (0..count)
            .map(|idx| f(&poly_by_index(field, idx, window)))
            .collect::<Result<Vec<_>>>()?;
        ContinuousFunc::new(field.clone(), window, values)
    }

    pub fn eval(&self, x: &TruncatedLaurent) -> Result<TruncatedLaurent> {
        if x.valuation().map_or(false, |v| v < 0) {
            return Err(Error::NegativeValuation);
        }
        Ok(self.values[index_of(x, self.window) as usize].clone())
    }

    pub fn to_json(&self) -> String {
        let mut map = Map::new();
        for (idx, v) in self.values.iter().enumerate() {
            let key = poly_by_index(&self.field, idx as u64, self.window).to_human();
            map.insert(key, Value::String(v.to_text()));
        }
        json!({
            "q": self.field.to_string(),
            "window": self.window,
            "values": Value::Object(map),
        })
        .to_string()
    }

    pub fn from_json(s: &str) -> Result<ContinuousFunc> {
        let v: Value =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("bad JSON: {e}")))?;
        let q = v["q"].as_str().ok_or_else(|| Error::Parse("missing \"q\"".into()))?;
        let field = Field::parse(q)?;
        let window = v["window"]
            .as_u64()
            .ok_or_else(|| Error::Parse("missing \"window\"".into()))? as u32;
        let obj = v["values"]
            .as_object()
            .ok_or_else(|| Error::Parse("missing \"values\"".into()))?;
        let count = ipow(field.q, window) as usize;
        let mut values: Vec<Option<TruncatedLaurent>> = vec![None; count];
        for (key, val) in obj {
            let alpha = TruncatedLaurent::parse(&field, key)?;
            if alpha.valuation().map_or(false, |v| v < 0)
                || (!alpha.is_zero() && alpha.hi() > window as i64)
            {
                return Err(Error::Parse(format!("key '{key}' is not reduced mod T^{window}")));
            }
            let text = val.as_str().ok_or_else(|| Error::Parse("value not a string".into()))?;
            values[index_of(&alpha, window) as usize] = Some(TruncatedLaurent::parse(&field, text)?);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    let alpha = poly_by_index(&field, i as u64, window);
                    Error::Parse(format!("missing table entry for '{}'", alpha.to_human()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ContinuousFunc::new(field, window, values)
    }
}

/// Digit product `F_n(x) = Π f_i^{n_i}(x)` over the base-q digits of `n`,
/// where `f_i` is the `i`-th member of the chosen basis family; `F_0 = 1`.
/// The starred variant replaces each digit-(q-1) factor by `f_i^{q-1} - 1`.
pub fn digit_eval(
    base: BasisId,
    n: u64,
    starred: bool,
    x: &TruncatedLaurent,
) -> Result<TruncatedLaurent> {
    if x.valuation().map_or(false, |v| v < 0) {
        return Err(Error::NegativeValuation);
    }
    let field = x.field.clone();
    let one = TruncatedLaurent::one(field.clone());
    let mut acc = one.clone();
    let mut m = n;
    let mut i = 0u64;
    while m > 0 {
        let d = m % field.q;
        m /= field.q;
        if d > 0 {
            let v = basis_apply(base, i, x)?;
            let factor = if starred && d == field.q - 1 {
                v.pow(d as usize).sub(&one)?
            } else {
                v.pow(d as usize)
            };
            acc = acc.mul(&factor)?;
        }
        i += 1;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumMode {
    /// All polynomials of degree below the window.
    AllDegBelow,
    /// Monic polynomials of degree exactly the window.
    MonicDeg,
}

/// The orthogonality sum `Σ_α F_k(α) F_l*(α)` over the chosen α-set for
/// window `n`; equals `(-1)^n` when `k + l = q^n - 1` and `0` otherwise.
pub fn orthogonality_sum(
    field: &Field,
    base: BasisId,
    k: u64,
    l: u64,
    n: u32,
    mode: SumMode,
) -> Result<TruncatedLaurent> {
    let qn = ipow(field.q, n);
    if l >= qn || (mode == SumMode::MonicDeg && k >= qn) {
        return Err(Error::IndexRange(format!("orthogonality indices k={k}, l={l} at window {n}")));
    }
    let mut acc = TruncatedLaurent::zero(field.clone(), PREC_CAP);
    for idx in 0..qn {
        let mut alpha = poly_by_index(field, idx, n.max(1));
        if mode == SumMode::MonicDeg {
            alpha = alpha.add(&TruncatedLaurent::monomial(
                field.clone(),
                crate::fq::FieldElem(1),
                n as i64,
            ))?;
        }
        let fk = digit_eval(base, k, false, &alpha)?;
        let fl = digit_eval(base, l, true, &alpha)?;
        acc = acc.add(&fk.mul(&fl)?)?;
    }
    Ok(acc)
}

/// Recover the digit-basis coefficient
/// `c_n = (-1)^w Σ_{deg α < w} F*_{q^w-1-n}(α) f(α)`, valid for any `w`
/// with `q^w > n` not exceeding the table window.
pub fn recover_coeff(
    f: &ContinuousFunc,
    base: BasisId,
    n: u64,
    w: u32,
) -> Result<TruncatedLaurent> {
    let field = f.field.clone();
    let qw = ipow(field.q, w);
    if n >= qw {
        return Err(Error::IndexRange(format!("coefficient {n} needs q^w > {n}, got q^{w}")));
    }
    if w > f.window {
        return Err(Error::InsufficientDepth(format!(
            "recovery window {w} exceeds table window {}",
            f.window
        )));
    }
    let idx = qw - 1 - n;
    let mut acc = TruncatedLaurent::zero(field.clone(), PREC_CAP);
    for a in 0..qw {
        let alpha = poly_by_index(&field, a, w.max(1));
        let fa = f.eval(&alpha)?;
        if fa.is_zero() {
            continue;
        }
        let weight = digit_eval(base, idx, true, &alpha)?;
        acc = acc.add(&weight.mul(&fa)?)?;
    }
    Ok(acc.scale(field.sign(w as u64)))
}

/// A digit-basis expansion `f = Σ_n c_n F_n` of a tabulated continuous
/// function; the partial sum over `n < q^window` reproduces the table.
#[derive(Clone, Debug)]
pub struct DigitExpansion {
    pub base: BasisId,
    pub field: Field,
    pub window: u32,
    pub coeffs: Vec<TruncatedLaurent>,
}

pub fn expand_continuous(f: &ContinuousFunc, base: BasisId) -> Result<DigitExpansion> {
    let count = ipow(f.field.q, f.window);
    let coeffs = (0..count)
        .map(|n| recover_coeff(f, base, n, f.window))
        .collect::<Result<Vec<_>>>()?;
    Ok(DigitExpansion { base, field: f.field.clone(), window: f.window, coeffs })
}

/// Partial sum `Σ_n c_n F_n(x)` of a digit-basis expansion.
pub fn evaluate_digit_expansion(
    ex: &DigitExpansion,
    x: &TruncatedLaurent,
) -> Result<TruncatedLaurent> {
    let mut acc = TruncatedLaurent::zero(ex.field.clone(), PREC_CAP);
    for (n, c) in ex.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        acc = acc.add(&c.mul(&digit_eval(ex.base, n as u64, false, x)?)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fq::FieldElem;
    use crate::linbasis::is_linear;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f2() -> Field {
        Field::new(2, 1).unwrap()
    }

    fn monomial(field: &Field, e: i64) -> TruncatedLaurent {
        TruncatedLaurent::monomial(field.clone(), FieldElem(1), e)
    }

    fn random_poly(rng: &mut ChaCha8Rng, field: &Field, deg: u32) -> TruncatedLaurent {
        let coeffs = (0..=deg).map(|_| FieldElem(rng.gen_range(0..field.q))).collect();
        TruncatedLaurent::poly(field.clone(), coeffs)
    }

    #[test]
    fn digit_products_match_hand_values() {
        let f = f2();
        let x = monomial(&f, 1).add(&monomial(&f, 2)).unwrap();
        let one = TruncatedLaurent::one(f.clone());
        assert!(digit_eval(BasisId::CartierPhi, 0, false, &x).unwrap().eq_to_prec(&one));
        // phi_0 is the identity member of the family and phi_1 extracts the
        // odd-exponent part, so phi_0(x)*phi_1(x) = (T + T^2)*1
        let got = digit_eval(BasisId::CartierPhi, 3, false, &x).unwrap();
        assert!(got.eq_to_prec(&x));
        // starred: digit 1 = q-1, so the factor is phi_0(1) - 1 = 0
        let star = digit_eval(BasisId::CartierPhi, 1, true, &one).unwrap();
        assert!(star.is_zero());
    }

    #[test]
    fn orthogonality_examples() {
        let f = f2();
        // k=0, l=1, window 1, all alpha of degree < 1
        let got = orthogonality_sum(&f, BasisId::CartierPhi, 0, 1, 1, SumMode::AllDegBelow).unwrap();
        assert!(got.eq_to_prec(&TruncatedLaurent::one(f.clone()).neg()));
        // monic alpha in {T, T+1}
        let got = orthogonality_sum(&f, BasisId::CartierPhi, 1, 0, 1, SumMode::MonicDeg).unwrap();
        assert!(got.eq_to_prec(&TruncatedLaurent::one(f.clone()).neg()));
    }

    #[test]
    fn full_orthogonality_tables() {
        for q in [2u64, 3] {
            let field = Field::new(q, 1).unwrap();
            for base in [BasisId::CartierPhi, BasisId::CartierPsi] {
                for n in 1..=2u32 {
                    let qn = ipow(q, n);
                    for k in 0..2 * qn {
                        for l in 0..qn {
                            for mode in [SumMode::AllDegBelow, SumMode::MonicDeg] {
                                if mode == SumMode::MonicDeg && k >= qn {
                                    continue;
                                }
                                let got =
                                    orthogonality_sum(&field, base, k, l, n, mode).unwrap();
                                if k + l == qn - 1 {
                                    let want = TruncatedLaurent::one(field.clone())
                                        .scale(field.sign(n as u64));
                                    assert!(got.eq_to_prec(&want), "q={q} {base} n={n} k={k} l={l}");
                                } else {
                                    assert!(got.is_zero(), "q={q} {base} n={n} k={k} l={l}");
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn recovery_singles_out_digit_basis_members() {
        let f = f2();
        let table = ContinuousFunc::tabulate(&f, 2, |alpha| {
            digit_eval(BasisId::CartierPhi, 3, false, alpha)
        })
        .unwrap();
        for n in 0..4u64 {
            let c = recover_coeff(&table, BasisId::CartierPhi, n, 2).unwrap();
            if n == 3 {
                assert!(c.eq_to_prec(&TruncatedLaurent::one(f.clone())));
            } else {
                assert!(c.is_zero(), "c_{n} = {c}");
            }
        }
    }

    #[test]
    fn constant_one_expands_to_the_empty_product() {
        let f = f2();
        let one = TruncatedLaurent::one(f.clone());
        let table = ContinuousFunc::tabulate(&f, 2, |_| Ok(one.clone())).unwrap();
        let ex = expand_continuous(&table, BasisId::CartierPhi).unwrap();
        assert!(ex.coeffs[0].eq_to_prec(&one));
        assert!(ex.coeffs[1..].iter().all(|c| c.is_zero()));
    }

    #[test]
    fn linear_function_concentrates_on_q_power_indices() {
        // E_1(x) = (x^2 - x) / (T^2 - T) over F_2 is linear with E_1(1) = 0,
        // so only the coefficient at index q^1 = 2 survives
        let f = f2();
        let table = ContinuousFunc::tabulate(&f, 2, |alpha| {
            crate::carlitz::big_e_eval(&f, 1, alpha, 32)
        })
        .unwrap();
        for n in 0..4u64 {
            let c = recover_coeff(&table, BasisId::CartierPhi, n, 2).unwrap();
            if n == 2 {
                assert!(c.eq_to_prec(&TruncatedLaurent::one(f.clone())));
            } else {
                assert!(c.is_zero(), "c_{n} = {c}");
            }
        }
        let ex = expand_continuous(&table, BasisId::CartierPhi).unwrap();
        assert!(is_linear(&ex));
    }

    #[test]
    fn recovery_is_independent_of_the_window() {
        let f = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let values = (0..8).map(|_| random_poly(&mut rng, &f, 6)).collect();
        let table = ContinuousFunc::new(f.clone(), 3, values).unwrap();
        for base in [BasisId::CartierPhi, BasisId::CartierPsi] {
            for n in 0..4u64 {
                let a = recover_coeff(&table, base, n, 2).unwrap();
                let b = recover_coeff(&table, base, n, 3).unwrap();
                assert!(a.eq_to_prec(&b), "{base} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn reconstruction_on_random_tables() {
        let f = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for base in [BasisId::CartierPhi, BasisId::CartierPsi] {
            for _ in 0..5 {
                let values = (0..8).map(|_| random_poly(&mut rng, &f, 8)).collect();
                let table = ContinuousFunc::new(f.clone(), 3, values).unwrap();
                let ex = expand_continuous(&table, base).unwrap();
                for idx in 0..8u64 {
                    let alpha = poly_by_index(&f, idx, 3);
                    let got = evaluate_digit_expansion(&ex, &alpha).unwrap();
                    assert!(got.eq_to_prec(&table.values[idx as usize]), "{base} idx={idx}");
                }
                // the table is R-valued, so all coefficients stay in R
                assert!(ex
                    .coeffs
                    .iter()
                    .all(|c| c.valuation().map_or(true, |v| v >= 0)));
            }
        }
    }

    #[test]
    fn product_of_two_family_members_is_not_linear() {
        let f = f2();
        let table = ContinuousFunc::tabulate(&f, 2, |alpha| {
            let a = crate::operators::phi(0, alpha);
            let b = crate::operators::phi(1, alpha);
            a.mul(&b)
        })
        .unwrap();
        let ex = expand_continuous(&table, BasisId::CartierPhi).unwrap();
        assert!(!ex.coeffs[3].is_zero());
        assert!(!is_linear(&ex));
        // and the zero function is linear
        let zero = ContinuousFunc::tabulate(&f, 2, |_| {
            Ok(TruncatedLaurent::zero(f.clone(), PREC_CAP))
        })
        .unwrap();
        assert!(is_linear(&expand_continuous(&zero, BasisId::CartierPhi).unwrap()));
    }

    #[test]
    fn binomial_formulas() {
        for q in [2u64, 3] {
            let field = Field::new(q, 1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(q);
            for base in [BasisId::CartierPhi, BasisId::CartierPsi] {
                for _ in 0..3 {
                    let x = random_poly(&mut rng, &field, 6);
                    let y = random_poly(&mut rng, &field, 6);
                    let sum = x.add(&y).unwrap();
                    for n in 0..(q * q) {
                        for starred in [false, true] {
                            let lhs = digit_eval(base, n, starred, &sum).unwrap();
                            let mut rhs = TruncatedLaurent::zero(field.clone(), PREC_CAP);
                            for i in 0..=n {
                                let b = crate::fq::lucas_binom(n, i, field.p);
                                if b == 0 {
                                    continue;
                                }
                                let t = digit_eval(base, i, false, &x)
                                    .unwrap()
                                    .mul(&digit_eval(base, n - i, starred, &y).unwrap())
                                    .unwrap();
                                rhs = rhs.add(&t.scale(FieldElem(b))).unwrap();
                            }
                            assert!(lhs.eq_to_prec(&rhs), "q={q} {base} n={n} starred={starred}");
                        }
                        // scaling: F_n(c x) = c^n F_n(x)
                        for c in 1..q {
                            let lhs = digit_eval(base, n, false, &x.scale(FieldElem(c))).unwrap();
                            let rhs = digit_eval(base, n, false, &x)
                                .unwrap()
                                .scale(field.pow(FieldElem(c), n));
                            assert!(lhs.eq_to_prec(&rhs), "q={q} {base} n={n} c={c}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn the_two_digit_families_agree_mod_t() {
        for q in [2u64, 3] {
            let field = Field::new(q, 1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(q + 40);
            for _ in 0..4 {
                let x = random_poly(&mut rng, &field, 8);
                for n in 0..q * q {
                    let a = digit_eval(BasisId::CartierPhi, n, false, &x).unwrap();
                    let b = digit_eval(BasisId::CartierPsi, n, false, &x).unwrap();
                    assert_eq!(a.coeff_or_zero(0), b.coeff_or_zero(0), "q={q} n={n}");
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let f = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let values = (0..4).map(|_| random_poly(&mut rng, &f, 5)).collect();
        let table = ContinuousFunc::new(f.clone(), 2, values).unwrap();
        let back = ContinuousFunc::from_json(&table.to_json()).unwrap();
        assert_eq!(back.window, 2);
        for (a, b) in table.values.iter().zip(&back.values) {
            assert!(a.eq_to_prec(b));
        }
    }

    #[test]
    fn index_packing_round_trips() {
        let f = Field::new(3, 1).unwrap();
        for idx in 0..27u64 {
            let alpha = poly_by_index(&f, idx, 3);
            assert_eq!(index_of(&alpha, 3), idx);
        }
    }
}
