//! The five families of continuous `F_q`-linear functionals on the power
//! series ring — Carlitz linear polynomials `E_n`, Hasse derivatives `D_n`,
//! shifts `S^{(n)}` and the two Cartier families `φ_n`, `ψ_n` — together
//! with coefficient recovery for tabulated linear functions, evaluation of
//! partial sums, and transition matrices between any two families.

use serde_json::{json, Value};

use crate::carlitz::{big_e_eval, carlitz_difference, poly_by_index};
use crate::digit::digit_eval;
use crate::error::{Error, Result};
use crate::fq::{lucas_binom, Field, FieldElem};
use crate::operators::{digit_index, hasse, ipow, phi, psi, shift};
use crate::series::{TruncatedLaurent, PREC_CAP};

/// Default number of monomial values tabulated for a linear function.
pub const DEFAULT_DEPTH: usize = 16;
/// Default precision of tabulated values.
pub const DEFAULT_VALUE_PREC: i64 = 32;
/// Working precision when evaluating `E_n` on exact inputs (the division by
/// `F_n` goes through a truncated inverse).
const E_PREC: i64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisId {
    CarlitzE,
    HasseD,
    ShiftS,
    CartierPhi,
    CartierPsi,
}

impl BasisId {
    pub const ALL: [BasisId; 5] = [
        BasisId::CarlitzE,
        BasisId::HasseD,
        BasisId::ShiftS,
        BasisId::CartierPhi,
        BasisId::CartierPsi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisId::CarlitzE => "carlitz",
            BasisId::HasseD => "hasse",
            BasisId::ShiftS => "shift",
            BasisId::CartierPhi => "phi",
            BasisId::CartierPsi => "psi",
        }
    }

    pub fn parse(s: &str) -> Result<BasisId> {
        match s {
            "carlitz" | "E" => Ok(BasisId::CarlitzE),
            "hasse" | "D" => Ok(BasisId::HasseD),
            "shift" | "S" => Ok(BasisId::ShiftS),
            "phi" => Ok(BasisId::CartierPhi),
            "psi" => Ok(BasisId::CartierPsi),
            _ => Err(Error::Parse(format!("unknown basis {s:?}"))),
        }
    }
}

impl std::fmt::Display for BasisId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Apply the `n`-th member of a basis family to a power series.
pub fn basis_apply(basis: BasisId, n: u64, x: &TruncatedLaurent) -> Result<TruncatedLaurent> {
    if x.valuation().map_or(false, |v| v < 0) {
        return Err(Error::NegativeValuation);
    }
    match basis {
        BasisId::CarlitzE => {
            let idx = u32::try_from(n)
                .map_err(|_| Error::IndexRange(format!("basis index {n} too large")))?;
            let prec = if x.is_exact() { E_PREC } else { x.prec() };
            big_e_eval(&x.field, idx, x, prec)
        }
        BasisId::HasseD => Ok(hasse(n, x)),
        BasisId::ShiftS => shift(n, x),
        BasisId::CartierPhi => Ok(phi(n, x)),
        BasisId::CartierPsi => psi(n, x),
    }
}

/// A continuous `F_q`-linear function tabulated on monomials: `values[i]`
/// holds the image of `T^i` for `i` below the table depth. Evaluation uses
/// linearity digit by digit; input digits at or above the depth are ignored,
/// so results are exact on polynomials of degree below the depth.
#[derive(Clone, Debug)]
pub struct LinearFunc {
    pub field: Field,
    pub values: Vec<TruncatedLaurent>,
}

impl LinearFunc {
    pub fn new(field: Field, values: Vec<TruncatedLaurent>) -> Result<LinearFunc> {
        for v in &values {
            if v.field != field {
                return Err(Error::FieldMismatch(field.to_string(), v.field.to_string()));
            }
        }
        Ok(LinearFunc { field, values })
    }

    pub fn depth(&self) -> usize {
        self.values.len()
    }

    /// Tabulate the `n`-th member of a basis family to the given depth.
    pub fn from_basis(field: &Field, basis: BasisId, n: u64, depth: usize) -> Result<LinearFunc> {
        let values = (0..depth)
            .map(|i| {
                let m = TruncatedLaurent::monomial(field.clone(), FieldElem(1), i as i64);
                basis_apply(basis, n, &m)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LinearFunc { field: field.clone(), values })
    }

    pub fn eval(&self, x: &TruncatedLaurent) -> Result<TruncatedLaurent> {
        if x.valuation().map_or(false, |v| v < 0) {
            return Err(Error::NegativeValuation);
        }
        let mut acc = TruncatedLaurent::zero(self.field.clone(), PREC_CAP);
        for (i, v) in self.values.iter().enumerate() {
            let c = x.coeff_or_zero(i as i64);
            if c.0 != 0 {
                acc = acc.add(&v.scale(c))?;
            }
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> String {
        let values: Vec<Value> =
            self.values.iter().map(|v| Value::String(v.to_text())).collect();
        json!({
            "q": self.field.to_string(),
            "depth": self.values.len(),
            "values": values,
        })
        .to_string()
    }

    pub fn from_json(s: &str) -> Result<LinearFunc> {
        let v: Value =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("bad JSON: {e}")))?;
        let q = v["q"].as_str().ok_or_else(|| Error::Parse("missing \"q\"".into()))?;
        let field = Field::parse(q)?;
        let depth = v["depth"]
            .as_u64()
            .ok_or_else(|| Error::Parse("missing \"depth\"".into()))? as usize;
        let arr = v["values"]
            .as_array()
            .ok_or_else(|| Error::Parse("missing \"values\"".into()))?;
        if arr.len() != depth {
            return Err(Error::Parse(format!(
                "depth {depth} does not match {} values",
                arr.len()
            )));
        }
        let values = arr
            .iter()
            .map(|e| {
                let t = e.as_str().ok_or_else(|| Error::Parse("value not a string".into()))?;
                TruncatedLaurent::parse(&field, t)
            })
            .collect::<Result<Vec<_>>>()?;
        LinearFunc::new(field, values)
    }
}

/// Coefficients of a linear function against one of the five basis families.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub basis: BasisId,
    pub field: Field,
    pub coeffs: Vec<TruncatedLaurent>,
}

/// Recover the first `count` expansion coefficients of a tabulated linear
/// function in the given basis. Closed forms per basis:
/// Hasse `b_n = Σ_i (-1)^{n-i} C(n,i) T^{n-i} f(T^i)`; Carlitz `a_n` is the
/// twisted difference evaluated at 1; shift `c_n = f(T^n) - T f(T^{n-1})`;
/// `φ` uses `c_n = f(T^n) - T^{q(n)} f(T^{n_-})`. The `ψ` coefficients have
/// no direct closed form and are recovered through the digit machinery:
/// `B_n = (-1)^w Σ_{α, deg α < w} Ψ*_{q^w-1-q^n}(α) f(α)` with `w = n + 1`.
pub fn expand(f: &LinearFunc, basis: BasisId, count: usize) -> Result<Expansion> {
    let field = f.field.clone();
    if count > f.depth() {
        return Err(Error::InsufficientDepth(format!(
            "{count} coefficients need table depth {count}, have {}",
            f.depth()
        )));
    }
    let mut coeffs = Vec::with_capacity(count);
    for n in 0..count {
        let c = match basis {
            BasisId::HasseD => {
                let mut acc = TruncatedLaurent::zero(field.clone(), PREC_CAP);
                for i in 0..=n {
                    let b = FieldElem(lucas_binom(n as u64, i as u64, field.p));
                    if b.0 == 0 {
                        continue;
                    }
                    let c = field.mul(field.sign((n - i) as u64), b);
                    acc = acc.add(&f.values[i].scale(c).shift_exp((n - i) as i64))?;
                }
                acc
            }
            BasisId::CarlitzE => carlitz_difference(&f.values, n as u32, true)?,
            BasisId::ShiftS => {
                if n == 0 {
                    f.values[0].clone()
                } else {
                    f.values[n].sub(&f.values[n - 1].shift_exp(1))?
                }
            }
            BasisId::CartierPhi => {
                if n == 0 {
                    f.values[0].clone()
                } else {
                    let di = digit_index(field.q, n as u64);
                    f.values[n].sub(&f.values[di.n_minus as usize].shift_exp(di.qn as i64))?
                }
            }
            BasisId::CartierPsi => psi_coefficient(f, n as u64)?,
        };
        coeffs.push(c);
    }
    Ok(Expansion { basis, field, coeffs })
}

fn psi_coefficient(f: &LinearFunc, n: u64) -> Result<TruncatedLaurent> {
    let field = f.field.clone();
    let w = n as u32 + 1;
    if w as usize > f.depth() {
        return Err(Error::InsufficientDepth(format!(
            "psi coefficient {n} sums over polynomials of degree < {w}",
        )));
    }
    let total = (field.q as u128).pow(w);
    if total > 1 << 20 {
        return Err(Error::Budget(format!("psi coefficient {n}: q^{w} summands")));
    }
    let idx = ipow(field.q, w) - 1 - ipow(field.q, n as u32);
    let mut acc = TruncatedLaurent::zero(field.clone(), PREC_CAP);
    for a in 0..total as u64 {
        let alpha = poly_by_index(&field, a, w);
        let fa = f.eval(&alpha)?;
        if fa.is_zero() {
            continue;
        }
        let weight = digit_eval(BasisId::CartierPsi, idx, true, &alpha)?;
        acc = acc.add(&weight.mul(&fa)?)?;
    }
    Ok(acc.scale(field.sign(w as u64)))
}

/// Partial sum `Σ_{n < terms} c_n · basis_n(x)`.
pub fn evaluate_expansion(
    ex: &Expansion,
    x: &TruncatedLaurent,
    terms: usize,
) -> Result<TruncatedLaurent> {
    if terms > ex.coeffs.len() {
        return Err(Error::IndexRange(format!(
            "{terms} terms requested, {} coefficients available",
            ex.coeffs.len()
        )));
    }
    let mut acc = TruncatedLaurent::zero(ex.field.clone(), PREC_CAP);
    for (n, c) in ex.coeffs.iter().take(terms).enumerate() {
        if c.is_zero() {
            continue;
        }
        acc = acc.add(&c.mul(&basis_apply(ex.basis, n as u64, x)?)?)?;
    }
    Ok(acc)
}

/// Transition matrix `M` with `from_n = Σ_m M[n][m] · to_m` as operators on
/// the power series ring, computed by tabulating each `from` member on
/// monomials and expanding it in the `to` basis.
pub fn transition(
    field: &Field,
    from: BasisId,
    to: BasisId,
    size: u64,
) -> Result<Vec<Vec<TruncatedLaurent>>> {
    let mut s = 1u64;
    while s < size {
        s *= field.q;
    }
    if s != size {
        return Err(Error::IndexRange(format!("transition size {size} is not a power of q")));
    }
    if size > 256 {
        return Err(Error::Budget(format!("transition size {size}")));
    }
    let mut rows = Vec::with_capacity(size as usize);
    for n in 0..size {
        let f = LinearFunc::from_basis(field, from, n, size as usize)?;
        rows.push(expand(&f, to, size as usize)?.coeffs);
    }
    Ok(rows)
}

/// Product of two matrices of truncated series.
pub fn mat_mul(
    a: &[Vec<TruncatedLaurent>],
    b: &[Vec<TruncatedLaurent>],
) -> Result<Vec<Vec<TruncatedLaurent>>> {
    let field = a[0][0].field.clone();
    let mut out = Vec::with_capacity(a.len());
    for row in a {
        let mut orow = Vec::with_capacity(b[0].len());
        for j in 0..b[0].len() {
            let mut acc = TruncatedLaurent::zero(field.clone(), PREC_CAP);
            for (k, e) in row.iter().enumerate() {
                acc = acc.add(&e.mul(&b[k][j])?)?;
            }
            orow.push(acc);
        }
        out.push(orow);
    }
    Ok(out)
}

/// A digit-basis expansion represents a linear function exactly when every
/// coefficient away from the q-power indices (and index 0 apart from the
/// constant term being zero) vanishes.
pub fn is_linear(ex: &crate::digit::DigitExpansion) -> bool {
    let q = ex.field.q;
    ex.coeffs.iter().enumerate().all(|(n, c)| {
        let mut m = n as u64;
        if m == 0 {
            return c.is_zero();
        }
        while m % q == 0 {
            m /= q;
        }
        m == 1 || c.is_zero()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f2() -> Field {
        Field::new(2, 1).unwrap()
    }

    fn monomial(field: &Field, e: i64) -> TruncatedLaurent {
        TruncatedLaurent::monomial(field.clone(), FieldElem(1), e)
    }

    fn random_table(rng: &mut ChaCha8Rng, field: &Field, depth: usize) -> LinearFunc {
        let values = (0..depth)
            .map(|_| {
                let coeffs =
                    (0..DEFAULT_VALUE_PREC).map(|_| FieldElem(rng.gen_range(0..field.q))).collect();
                TruncatedLaurent::new(field.clone(), 0, DEFAULT_VALUE_PREC, coeffs)
            })
            .collect();
        LinearFunc { field: field.clone(), values }
    }

    #[test]
    fn hasse_member_in_phi_basis_is_a_unit_vector() {
        let f = f2();
        let table = LinearFunc::from_basis(&f, BasisId::HasseD, 1, DEFAULT_DEPTH).unwrap();
        let ex = expand(&table, BasisId::CartierPhi, 8).unwrap();
        for (n, c) in ex.coeffs.iter().enumerate() {
            if n == 1 {
                assert!(c.eq_to_prec(&TruncatedLaurent::one(f.clone())));
            } else {
                assert!(c.is_zero(), "c_{n} = {c}");
            }
        }
    }

    #[test]
    fn frobenius_in_phi_basis_matches_closed_form() {
        let f = f2();
        let values = (0..DEFAULT_DEPTH).map(|i| monomial(&f, 2 * i as i64)).collect();
        let table = LinearFunc::new(f.clone(), values).unwrap();
        let ex = expand(&table, BasisId::CartierPhi, 8).unwrap();
        assert!(ex.coeffs[0].eq_to_prec(&TruncatedLaurent::one(f.clone())));
        let spot = monomial(&f, 2).add(&monomial(&f, 1)).unwrap();
        assert!(ex.coeffs[1].eq_to_prec(&spot));
        for n in 1..8u64 {
            let di = digit_index(2, n);
            let want = monomial(&f, 2 * n as i64)
                .sub(&monomial(&f, (di.qn + 2 * di.n_minus) as i64))
                .unwrap();
            assert!(ex.coeffs[n as usize].eq_to_prec(&want), "c_{n}");
        }
    }

    #[test]
    fn carlitz_member_in_carlitz_basis_is_a_unit_vector() {
        let f = f2();
        let table = LinearFunc::from_basis(&f, BasisId::CarlitzE, 1, DEFAULT_DEPTH).unwrap();
        let ex = expand(&table, BasisId::CarlitzE, 4).unwrap();
        assert!(ex.coeffs[0].is_zero());
        assert!(ex.coeffs[1].eq_to_prec(&TruncatedLaurent::one(f.clone())));
        assert!(ex.coeffs[2].is_zero());
        assert!(ex.coeffs[3].is_zero());
    }

    #[test]
    fn shift_member_in_shift_basis_is_a_unit_vector() {
        let f = f2();
        let table = LinearFunc::from_basis(&f, BasisId::ShiftS, 1, DEFAULT_DEPTH).unwrap();
        let ex = expand(&table, BasisId::ShiftS, 8).unwrap();
        for (n, c) in ex.coeffs.iter().enumerate() {
            if n == 1 {
                assert!(c.eq_to_prec(&TruncatedLaurent::one(f.clone())));
            } else {
                assert!(c.is_zero());
            }
        }
    }

    #[test]
    fn evaluating_expansion_recovers_operator_values() {
        let f = f2();
        let table = LinearFunc::from_basis(&f, BasisId::HasseD, 1, DEFAULT_DEPTH).unwrap();
        let ex = expand(&table, BasisId::CartierPhi, 8).unwrap();
        let got = evaluate_expansion(&ex, &monomial(&f, 3), 8).unwrap();
        assert!(got.eq_to_prec(&monomial(&f, 2)));
    }

    #[test]
    fn five_basis_round_trip_on_random_tables() {
        for q in [2u64, 3] {
            let f = Field::new(q, 1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11 * q);
            for _ in 0..3 {
                let table = random_table(&mut rng, &f, DEFAULT_DEPTH);
                for basis in BasisId::ALL {
                    let ex = expand(&table, basis, 8).unwrap();
                    for i in 0..8 {
                        let got = evaluate_expansion(&ex, &monomial(&f, i as i64), 8).unwrap();
                        assert!(
                            got.eq_to_prec(&table.values[i]),
                            "q={q} basis={basis} i={i}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn hasse_to_phi_transitions_match_binomial_inversion() {
        use crate::operators::{inversion_row, InversionDirection};
        for q in [2u64, 3] {
            let f = Field::new(q, 1).unwrap();
            let size = q * q;
            for (from, to, dir) in [
                (BasisId::HasseD, BasisId::CartierPhi, InversionDirection::HasseToPhi),
                (BasisId::CartierPhi, BasisId::HasseD, InversionDirection::PhiToHasse),
            ] {
                let m = transition(&f, from, to, size).unwrap();
                for n in 0..size {
                    let kn = digit_index(q, n).k;
                    let row = inversion_row(&f, dir, n, kn).unwrap();
                    for col in 0..size as usize {
                        let got = &m[n as usize][col];
                        let in_block = col >= n as usize && col < ipow(q, kn).max(n + 1) as usize;
                        if in_block {
                            assert!(
                                got.eq_to_prec(&row[col - n as usize]),
                                "q={q} {from}->{to} [{n}][{col}]"
                            );
                        } else {
                            assert!(got.is_zero(), "q={q} {from}->{to} [{n}][{col}] = {got}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn transition_to_self_is_identity() {
        let f = Field::new(3, 1).unwrap();
        for basis in BasisId::ALL {
            let m = transition(&f, basis, basis, 3).unwrap();
            for (i, row) in m.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    if i == j {
                        assert!(e.eq_to_prec(&TruncatedLaurent::one(f.clone())), "{basis}");
                    } else {
                        assert!(e.is_zero(), "{basis} [{i}][{j}] = {e}");
                    }
                }
            }
        }
    }

    #[test]
    fn paired_transitions_invert_each_other() {
        let f = f2();
        for a in BasisId::ALL {
            for b in BasisId::ALL {
                let m = transition(&f, a, b, 4).unwrap();
                let minv = transition(&f, b, a, 4).unwrap();
                let prod = mat_mul(&m, &minv).unwrap();
                for (i, row) in prod.iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        if i == j {
                            assert!(e.eq_to_prec(&TruncatedLaurent::one(f.clone())), "{a}->{b}");
                        } else {
                            assert!(e.is_zero(), "{a}->{b} [{i}][{j}] = {e}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn psi_members_match_phi_members_mod_t() {
        // expanding ψ_n in the φ basis gives 1 mod T on the diagonal and
        // 0 mod T elsewhere
        let f = f2();
        for n in 0..8u64 {
            let table = LinearFunc::from_basis(&f, BasisId::CartierPsi, n, DEFAULT_DEPTH).unwrap();
            let ex = expand(&table, BasisId::CartierPhi, 8).unwrap();
            for (m, c) in ex.coeffs.iter().enumerate() {
                let want = u64::from(m as u64 == n);
                assert_eq!(c.coeff_or_zero(0).0, want, "psi_{n} vs phi_{m}");
            }
        }
    }

    #[test]
    fn phi_coefficient_valuations_attain_the_table_minimum() {
        let f = Field::new(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let table = random_table(&mut rng, &f, DEFAULT_DEPTH);
            let table_min = table.values.iter().filter_map(|v| v.valuation()).min();
            let ex = expand(&table, BasisId::CartierPhi, DEFAULT_DEPTH).unwrap();
            let coeff_min = ex.coeffs.iter().filter_map(|c| c.valuation()).min();
            assert_eq!(table_min, coeff_min);
        }
    }

    #[test]
    fn telescoping_partial_sums_reproduce_the_table() {
        let f = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let table = random_table(&mut rng, &f, DEFAULT_DEPTH);
        let ex = expand(&table, BasisId::CartierPhi, DEFAULT_DEPTH).unwrap();
        for m in 0..DEFAULT_DEPTH {
            let got = evaluate_expansion(&ex, &monomial(&f, m as i64), DEFAULT_DEPTH).unwrap();
            assert!(got.eq_to_prec(&table.values[m]), "m={m}");
        }
    }

    #[test]
    fn zero_function_expands_to_zero_in_every_basis() {
        let f = f2();
        let values = vec![TruncatedLaurent::zero(f.clone(), DEFAULT_VALUE_PREC); DEFAULT_DEPTH];
        let table = LinearFunc::new(f.clone(), values).unwrap();
        for basis in BasisId::ALL {
            let ex = expand(&table, basis, 8).unwrap();
            assert!(ex.coeffs.iter().all(|c| c.is_zero()), "{basis}");
        }
    }

    #[test]
    fn json_round_trip() {
        let f = Field::new(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let table = random_table(&mut rng, &f, 4);
        let back = LinearFunc::from_json(&table.to_json()).unwrap();
        assert_eq!(back.field, f);
        for (a, b) in table.values.iter().zip(&back.values) {
            assert!(a.eq_to_prec(b));
            assert_eq!(a.prec(), b.prec());
        }
    }

    #[test]
    fn expand_rejects_shallow_tables() {
        let f = f2();
        let table = LinearFunc::from_basis(&f, BasisId::HasseD, 0, 4).unwrap();
        assert!(matches!(
            expand(&table, BasisId::HasseD, 8),
            Err(Error::InsufficientDepth(_))
        ));
    }
}
