//! Seeded verification suites. Every suite re-checks a family of identities
//! with randomized instances drawn from a deterministic generator, and
//! returns a machine-readable report with per-check counts; discrepancies
//! that are tracked rather than asserted (experimental closed forms) are
//! recorded as notes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::carlitz::{a_coeff, c_coeffs, c_coeffs_via_a, carlitz_difference, poly_by_index};
use crate::digit::{
    digit_eval, evaluate_digit_expansion, expand_continuous, index_of, orthogonality_sum,
    recover_coeff, ContinuousFunc, SumMode,
};
use crate::error::{Error, Result};
use crate::fq::{lucas_binom, Field, FieldElem};
use crate::linbasis::{
    evaluate_expansion, expand, is_linear, mat_mul, transition, BasisId, LinearFunc,
};
use crate::operators::{
    apply_phi_map, binom_sum_congruence, cartier_delta, compose_phi, decompose, delta_in_phi,
    delta_power_in_hasse, digit_index, hasse, inversion_matrix, inversion_row, ipow, phi,
    phi_product, psi, qth_power_expansion, InversionDirection, PowerMode,
};
use crate::padic::{
    mahler_coeffs, padic_cartier, padic_digit_eval, residue_vector, PadicInt, PadicKind,
};
use crate::series::{TruncatedLaurent, PREC_CAP};
use crate::wronskian::{
    det_field, find_certificate, in_km, independent_over_km, normalize_orders, wronskian,
    EpsVector, Outcome, WronskianKind,
};

pub const ALL_SUITES: &[&str] = &[
    "basic",
    "prodf",
    "power1",
    "singleout",
    "inv",
    "pnrep",
    "car2",
    "qmap",
    "qmdelta",
    "compose",
    "bif",
    "transitions",
    "pG",
    "dorg",
    "sjrep",
    "ch",
    "padic",
    "nega",
    "gmain",
    "prodfor",
    "WL1",
    "WL2",
    "Wcar",
    "Wcar2",
];

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: u64,
    pub failed: u64,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub field: String,
    pub seed: u64,
    pub passed: u64,
    pub failed: u64,
    pub suites: Vec<SuiteReport>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Ctx {
    field: Field,
    rng: ChaCha8Rng,
    report: SuiteReport,
}

impl Ctx {
    fn new(name: &str, field: &Field, seed: u64) -> Ctx {
        let index = ALL_SUITES.iter().position(|&s| s == name).unwrap_or(99) as u64;
        Ctx {
            field: field.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1000).wrapping_add(index)),
            report: SuiteReport { name: name.to_string(), passed: 0, failed: 0, notes: Vec::new() },
        }
    }

    fn check(&mut self, cond: bool, label: impl Fn() -> String) {
        if cond {
            self.report.passed += 1;
        } else {
            self.report.failed += 1;
            self.report.notes.push(format!("FAIL: {}", label()));
        }
    }

    fn note(&mut self, s: String) {
        self.report.notes.push(s);
    }

    fn rand_elem(&mut self) -> FieldElem {
        FieldElem(self.rng.gen_range(0..self.field.q))
    }

    fn rand_nonzero_elem(&mut self) -> FieldElem {
        FieldElem(self.rng.gen_range(1..self.field.q))
    }

    /// Exact polynomial with degree at most `deg`.
    fn rand_poly(&mut self, deg: u32) -> TruncatedLaurent {
        let coeffs = (0..=deg).map(|_| self.rand_elem()).collect();
        TruncatedLaurent::poly(self.field.clone(), coeffs)
    }

    /// Truncated series with support starting at `lo`, known modulo `t^prec`.
    fn rand_series(&mut self, lo: i64, prec: i64) -> TruncatedLaurent {
        let coeffs = (lo..prec).map(|_| self.rand_elem()).collect();
        TruncatedLaurent::new(self.field.clone(), lo, prec, coeffs)
    }
}

fn monomial(field: &Field, exp: i64) -> TruncatedLaurent {
    TruncatedLaurent::monomial(field.clone(), FieldElem(1), exp)
}

pub fn run_suite(name: &str, field: &Field, seed: u64) -> Result<SuiteReport> {
    let mut ctx = Ctx::new(name, field, seed);
    match name {
        "basic" => suite_basic(&mut ctx)?,
        "prodf" => suite_prodf(&mut ctx)?,
        "power1" => suite_power1(&mut ctx)?,
        "singleout" => suite_singleout(&mut ctx)?,
        "inv" => suite_inv(&mut ctx)?,
        "pnrep" => suite_pnrep(&mut ctx)?,
        "car2" => suite_car2(&mut ctx)?,
        "qmap" => suite_qmap(&mut ctx)?,
        "qmdelta" => suite_qmdelta(&mut ctx)?,
        "compose" => suite_compose(&mut ctx)?,
        "bif" => suite_bif(&mut ctx)?,
        "transitions" => suite_transitions(&mut ctx)?,
        "pG" => suite_pg(&mut ctx)?,
        "dorg" => suite_dorg(&mut ctx)?,
        "sjrep" => suite_sjrep(&mut ctx)?,
        "ch" => suite_ch(&mut ctx)?,
        "padic" => suite_padic(&mut ctx)?,
        "nega" => suite_nega(&mut ctx)?,
        "gmain" => suite_gmain(&mut ctx)?,
        "prodfor" => suite_prodfor(&mut ctx)?,
        "WL1" => suite_wl1(&mut ctx)?,
        "WL2" => suite_wl2(&mut ctx)?,
        "Wcar" => suite_wcar(&mut ctx)?,
        "Wcar2" => suite_wcar2(&mut ctx)?,
        _ => return Err(Error::Parse(format!("unknown suite {name:?}"))),
    }
    Ok(ctx.report)
}

pub fn run(names: &[String], field: &Field, seed: u64) -> Result<Report> {
    let mut suites = Vec::new();
    let mut passed = 0;
    let mut failed = 0;
    for name in names {
        let r = run_suite(name, field, seed)?;
        passed += r.passed;
        failed += r.failed;
        suites.push(r);
    }
    Ok(Report { field: field.to_string(), seed, passed, failed, suites })
}

// ---------------------------------------------------------------- operators

/// Reconstruction `Σ_r T^r Δ_{r,m}(x)^{q^m} = x`, the twist rule
/// `Δ_{r,m}(x^{q^m} y) = x Δ_{r,m}(y)`, and the shift rule
/// `Δ_{r,m}(x) = Δ_{r+s,m}(T^s x)`.
fn suite_basic(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for m in 1..=2u32 {
        let qm = ipow(f.q, m);
        for case in 0..25 {
            let x = if case % 2 == 0 { ctx.rand_poly(14) } else { ctx.rand_series(0, 32) };
            let parts = decompose(&x, m)?;
            let mut acc = TruncatedLaurent::zero(f.clone(), PREC_CAP);
            for (r, d) in parts.iter().enumerate() {
                acc = acc.add(&monomial(&f, r as i64).mul(&d.q_power(m))?)?;
            }
            ctx.check(acc.eq_to_prec(&x), || format!("reconstruction m={m} case={case}"));

            let y = ctx.rand_poly(8);
            for r in 0..qm {
                let lhs = cartier_delta(r, m, &x.q_power(m).mul(&y)?)?;
                let rhs = x.mul(&cartier_delta(r, m, &y)?)?;
                ctx.check(lhs.eq_to_prec(&rhs), || format!("twist rule m={m} r={r}"));
            }
            for r in 0..qm {
                for s in 0..(qm - r) {
                    let lhs = cartier_delta(r, m, &x)?;
                    let rhs = cartier_delta(r + s, m, &x.shift_exp(s as i64))?;
                    ctx.check(lhs.eq_to_prec(&rhs), || format!("shift rule m={m} r={r} s={s}"));
                }
            }
        }
    }
    Ok(())
}

/// Product rule for the component operators:
/// `Δ_{r,m}(xy) = Σ_{i+j=r} Δ_i(x)Δ_j(y) + T Σ_{i+j=q^m+r} Δ_i(x)Δ_j(y)`.
fn suite_prodf(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for m in 1..=2u32 {
        let qm = ipow(f.q, m);
        for case in 0..6 {
            let x = ctx.rand_poly(10);
            let y = ctx.rand_poly(10);
            let xy = x.mul(&y)?;
            for r in 0..qm {
                let mut head = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                let mut tail = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                for i in 0..qm {
                    for j in 0..qm {
                        let term = cartier_delta(i, m, &x)?.mul(&cartier_delta(j, m, &y)?)?;
                        if i + j == r {
                            head = head.add(&term)?;
                        } else if i + j == qm + r {
                            tail = tail.add(&term)?;
                        }
                    }
                }
                let rhs = head.add(&monomial(&f, 1).mul(&tail)?)?;
                let lhs = cartier_delta(r, m, &xy)?;
                ctx.check(lhs.eq_to_prec(&rhs), || format!("product rule m={m} r={r} case={case}"));
            }
        }
    }
    Ok(())
}

/// Expansion of `Δ_{r,m}^{q^t}` in Hasse derivatives with the closed-form
/// coefficient series, verified against direct evaluation on polynomials.
fn suite_power1(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for m in 1..=2u32 {
        let qm = ipow(f.q, m);
        for t in 0..=2u32 {
            for case in 0..4 {
                let x = ctx.rand_poly(18);
                for r in 0..qm {
                    let lhs = cartier_delta(r, m, &x)?.q_power(t);
                    let mut rhs = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                    for n in 0..=x.hi().max(0) as u64 {
                        let c = delta_power_in_hasse(&f, r, m, t, n)?;
                        rhs = rhs.add(&c.mul(&hasse(n, &x))?)?;
                    }
                    ctx.check(
                        lhs.eq_to_prec(&rhs),
                        || format!("power expansion m={m} t={t} r={r} case={case}"),
                    );
                }
            }
        }
    }
    Ok(())
}

/// Finite expansion `Δ_{r,m}^{q^m} = Σ_{n=r}^{q^m-1} C(n,r)(-T)^{n-r} D_n`,
/// and the edge case `Δ_{q^m-1,m}^{q^m} = D_{q^m-1}`.
fn suite_singleout(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for m in 1..=2u32 {
        let qm = ipow(f.q, m);
        for case in 0..10 {
            let x = ctx.rand_series(0, 32);
            for r in 0..qm {
                let lhs = cartier_delta(r, m, &x)?.q_power(m);
                let mut rhs = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                for n in r..qm {
                    let b = lucas_binom(n, r, f.p);
                    let c = f.mul(FieldElem(b), f.sign(n - r));
                    let coef = TruncatedLaurent::monomial(f.clone(), c, (n - r) as i64);
                    rhs = rhs.add(&coef.mul(&hasse(n, &x))?)?;
                }
                ctx.check(lhs.eq_to_prec(&rhs), || format!("finite expansion m={m} r={r} case={case}"));
            }
            let top = cartier_delta(qm - 1, m, &x)?.q_power(m);
            ctx.check(
                top.eq_to_prec(&hasse(qm - 1, &x)),
                || format!("top component equals Hasse m={m} case={case}"),
            );
        }
    }
    Ok(())
}

/// Inversion back from the finite expansion: each Hasse derivative as a
/// binomial combination of the operator family, and `C(T)C(-T) = I`.
fn suite_inv(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for k in 1..=2u32 {
        let qk = ipow(f.q, k);
        for case in 0..10 {
            let x = ctx.rand_series(-8, 24);
            for n in ipow(f.q, k - 1)..qk {
                let row = inversion_row(&f, InversionDirection::HasseToPhi, n, k)?;
                let mut acc = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                for (off, c) in row.iter().enumerate() {
                    acc = acc.add(&c.mul(&phi(n + off as u64, &x))?)?;
                }
                ctx.check(acc.eq_to_prec(&hasse(n, &x)), || format!("inversion k={k} n={n} case={case}"));
            }
        }
    }
    let mut sizes = vec![f.q, ipow(f.q, 2)];
    if ipow(f.q, 3) <= 27 {
        sizes.push(ipow(f.q, 3));
    }
    for size in sizes {
        let a = inversion_matrix(&f, size, false);
        let b = inversion_matrix(&f, size, true);
        let prod = mat_mul(&a, &b)?;
        let mut is_identity = true;
        for (i, row) in prod.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                let expect = if i == j {
                    TruncatedLaurent::one(f.clone())
                } else {
                    TruncatedLaurent::zero(f.clone(), PREC_CAP)
                };
                is_identity &= entry.eq_to_prec(&expect) && entry.is_exact();
            }
        }
        ctx.check(is_identity, || format!("binomial matrices inverse at size {size}"));
    }
    Ok(())
}

/// Coefficient recovery and telescoping reconstruction for expansions of
/// linear-function tables in the phi sequence.
fn suite_pnrep(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for case in 0..10 {
        let values = (0..16).map(|_| ctx.rand_series(0, 32)).collect();
        let lf = LinearFunc::new(f.clone(), values)?;
        let ex = expand(&lf, BasisId::CartierPhi, 16)?;
        for i in 0..8u64 {
            let got = evaluate_expansion(&ex, &monomial(&f, i as i64), 16)?;
            ctx.check(
                got.eq_to_prec(&lf.values[i as usize]),
                || format!("telescoping reconstruction case={case} i={i}"),
            );
        }
        // closed form for the coefficients
        for n in 0..16u64 {
            let expect = if n == 0 {
                lf.values[0].clone()
            } else {
                let di = digit_index(f.q, n);
                let head = monomial(&f, di.qn as i64);
                lf.values[n as usize].sub(&head.mul(&lf.values[di.n_minus as usize])?)?
            };
            ctx.check(ex.coeffs[n as usize].eq_to_prec(&expect), || format!("coefficient rule n={n}"));
        }
    }
    Ok(())
}

/// The two Cartier sequences agree modulo `t`: `ψ_n ≡ φ_n (mod T)`.
fn suite_car2(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for n in 0..16u64 {
        for i in 0..=20u64 {
            let x = monomial(&f, i as i64);
            let diff = psi(n, &x)?.sub(&phi(n, &x))?;
            ctx.check(
                diff.coeff_or_zero(0) == FieldElem(0),
                || format!("psi/phi congruence n={n} monomial={i}"),
            );
        }
    }
    Ok(())
}

/// `x^{q^m}` reconstructed through both operator expansions equals direct
/// exponentiation.
fn suite_qmap(ctx: &mut Ctx) -> Result<()> {
    for m in 1..=2u32 {
        for case in 0..25 {
            let x = if case % 2 == 0 { ctx.rand_poly(12) } else { ctx.rand_series(0, 32) };
            let direct = x.q_power(m);
            for mode in [PowerMode::ViaPhi, PowerMode::ViaHasse] {
                let got = qth_power_expansion(mode, m, &x)?;
                ctx.check(got.eq_to_prec(&direct), || format!("power expansion {mode:?} m={m} case={case}"));
            }
        }
    }
    Ok(())
}

/// The component operators and their `q^m`-th powers expanded in the phi
/// sequence reproduce direct evaluation.
fn suite_qmdelta(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for m in 1..=2u32 {
        let qm = ipow(f.q, m);
        for r in 0..qm {
            let x = ctx.rand_poly(15);
            let n_max = x.hi().max(0) as u64 + qm;
            for power_form in [true, false] {
                let map = delta_in_phi(&f, r, m, power_form, n_max)?;
                let got = apply_phi_map(&map, &x)?;
                let delta = cartier_delta(r, m, &x)?;
                let expect = if power_form { delta.q_power(m) } else { delta };
                ctx.check(
                    got.eq_to_prec(&expect),
                    || format!("component expansion m={m} r={r} power_form={power_form}"),
                );
            }
        }
        // top component has the single-entry expansion {q^m - 1: 1}
        let map = delta_in_phi(&f, qm - 1, m, true, 4 * qm)?;
        let single = map.len() == 1 && map.get(&(qm - 1)).map_or(false, |c| {
            c.eq_to_prec(&TruncatedLaurent::one(f.clone()))
        });
        ctx.check(single, || format!("top component single entry m={m}"));
    }
    Ok(())
}

/// Compositions of two phi operators: zero map when the digit lengths agree
/// or the outer index is shorter; otherwise the generic expansion is checked
/// against literal composition on monomials, with the tentative closed form
/// `Σ_i T^{i q^l} φ_{outer+inner+i q^l}` reported, not asserted.
fn suite_compose(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    let q2 = ipow(f.q, 2);
    let n_max = 63u64;
    for inner in 1..q2 {
        for outer in 1..q2 {
            let k_in = digit_index(f.q, inner).k;
            let k_out = digit_index(f.q, outer).k;
            let map = compose_phi(&f, outer, inner, n_max)?;
            // ground truth on monomials
            let mut literal_ok = true;
            for j in 0..=n_max {
                let x = monomial(&f, j as i64);
                let direct = phi(outer, &phi(inner, &x));
                let via_map = apply_phi_map(&map, &x)?;
                literal_ok &= via_map.eq_to_prec(&direct);
            }
            ctx.check(literal_ok, || format!("composition round trip outer={outer} inner={inner}"));
            if k_out <= k_in {
                ctx.check(map.is_empty(), || format!("zero composition outer={outer} inner={inner}"));
            } else {
                let ql = ipow(f.q, k_out);
                let mut closed: BTreeMap<u64, TruncatedLaurent> = BTreeMap::new();
                let mut i = 0u64;
                while outer + inner + i * ql <= n_max {
                    closed.insert(outer + inner + i * ql, monomial(&f, (i * ql) as i64));
                    i += 1;
                }
                let matches = map.len() == closed.len()
                    && map.iter().all(|(n, c)| {
                        closed.get(n).map_or(false, |d| c.eq_to_prec(d))
                    });
                if !matches {
                    ctx.note(format!(
                        "closed form for composition outer={outer} inner={inner} disagrees with generic expansion (tracked, not asserted)"
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Binomial inversion at the matrix level: small sizes, and agreement of the
/// transition matrices between the Hasse and phi sequences with the closed
/// binomial rows.
fn suite_bif(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for size in [f.q, ipow(f.q, 2)] {
        let a = inversion_matrix(&f, size, false);
        let b = inversion_matrix(&f, size, true);
        let prod = mat_mul(&a, &b)?;
        let mut ok = true;
        for (i, row) in prod.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                let expect = if i == j {
                    TruncatedLaurent::one(f.clone())
                } else {
                    TruncatedLaurent::zero(f.clone(), PREC_CAP)
                };
                ok &= entry.eq_to_prec(&expect);
            }
        }
        ctx.check(ok, || format!("matrix inversion pair size={size}"));
    }
    // rows of the basis transition match the closed binomial rows
    for (from, to, dir) in [
        (BasisId::HasseD, BasisId::CartierPhi, InversionDirection::HasseToPhi),
        (BasisId::CartierPhi, BasisId::HasseD, InversionDirection::PhiToHasse),
    ] {
        let size = ipow(f.q, 2);
        let t = transition(&f, from, to, size)?;
        for n in 0..size {
            let kn = if n == 0 { 0 } else { digit_index(f.q, n).k };
            let row = inversion_row(&f, dir, n, kn)?;
            let mut ok = true;
            for r in 0..size {
                let expect = if r >= n && ((r - n) as usize) < row.len() {
                    row[(r - n) as usize].clone()
                } else {
                    TruncatedLaurent::zero(f.clone(), PREC_CAP)
                };
                ok &= t[n as usize][r as usize].eq_to_prec(&expect);
            }
            ctx.check(ok, || format!("transition row {from}->{to} n={n}"));
        }
    }
    Ok(())
}

/// Pairwise-inverse transition matrices among all five bases.
fn suite_transitions(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    let size = f.q;
    for from in BasisId::ALL {
        for to in BasisId::ALL {
            let a = transition(&f, from, to, size)?;
            let b = transition(&f, to, from, size)?;
            let prod = mat_mul(&a, &b)?;
            let mut ok = true;
            for (i, row) in prod.iter().enumerate() {
                for (j, entry) in row.iter().enumerate() {
                    let expect = if i == j {
                        TruncatedLaurent::one(f.clone())
                    } else {
                        TruncatedLaurent::zero(f.clone(), PREC_CAP)
                    };
                    ok &= entry.eq_to_prec(&expect);
                }
            }
            ctx.check(ok, || format!("transitions {from}->{to}->{from} compose to identity"));
        }
    }
    Ok(())
}

/// Binomial formulas for the digit products and their starred variants, and
/// the four antidiagonal corollaries at top index `q^m - 1`.
fn suite_pg(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    let q2 = ipow(f.q, 2);
    for base in [BasisId::CartierPhi, BasisId::CartierPsi] {
        for case in 0..3 {
            let x = ctx.rand_poly(5);
            let y = ctx.rand_poly(5);
            let lambda = ctx.rand_nonzero_elem();
            for n in 0..q2 {
                let fx = digit_eval(base, n, false, &x.scale(lambda))?;
                let expect = digit_eval(base, n, false, &x)?.scale(f.pow(lambda, n));
                ctx.check(fx.eq_to_prec(&expect), || format!("{base} scaling n={n} case={case}"));

                let fsx = digit_eval(base, n, true, &x.scale(lambda))?;
                let expect_star = digit_eval(base, n, true, &x)?.scale(f.pow(lambda, n));
                ctx.check(
                    fsx.eq_to_prec(&expect_star),
                    || format!("{base} starred scaling n={n} case={case}"),
                );

                let mut sum = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                let mut sum_star = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                for i in 0..=n {
                    let b = FieldElem(lucas_binom(n, i, f.p));
                    let fi = digit_eval(base, i, false, &x)?;
                    sum = sum.add(&fi.mul(&digit_eval(base, n - i, false, &y)?)?.scale(b))?;
                    sum_star =
                        sum_star.add(&fi.mul(&digit_eval(base, n - i, true, &y)?)?.scale(b))?;
                }
                let xy = x.add(&y)?;
                ctx.check(
                    digit_eval(base, n, false, &xy)?.eq_to_prec(&sum),
                    || format!("{base} addition n={n} case={case}"),
                );
                ctx.check(
                    digit_eval(base, n, true, &xy)?.eq_to_prec(&sum_star),
                    || format!("{base} starred addition n={n} case={case}"),
                );
            }
            // antidiagonal corollaries at n = q^m - 1
            for m in 1..=2u32 {
                let top = ipow(f.q, m) - 1;
                let plus = x.add(&y)?;
                let minus = x.sub(&y)?;
                let mut c1 = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                let mut c2 = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                let mut c3 = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                let mut c4 = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                for i in 0..=top {
                    let j = top - i;
                    let fi = digit_eval(base, i, false, &x)?;
                    let fj = digit_eval(base, j, false, &y)?;
                    let fjs = digit_eval(base, j, true, &y)?;
                    c1 = c1.add(&fi.mul(&fj)?.scale(f.sign(i)))?;
                    c2 = c2.add(&fi.mul(&fj)?)?;
                    c3 = c3.add(&fi.mul(&fjs)?.scale(f.sign(i)))?;
                    c4 = c4.add(&fi.mul(&fjs)?)?;
                }
                ctx.check(
                    digit_eval(base, top, false, &plus)?.eq_to_prec(&c1),
                    || format!("{base} corollary(1) m={m} case={case}"),
                );
                ctx.check(
                    digit_eval(base, top, false, &minus)?.eq_to_prec(&c2),
                    || format!("{base} corollary(2) m={m} case={case}"),
                );
                ctx.check(
                    digit_eval(base, top, true, &plus)?.eq_to_prec(&c3),
                    || format!("{base} corollary(3) m={m} case={case}"),
                );
                ctx.check(
                    digit_eval(base, top, true, &minus)?.eq_to_prec(&c4),
                    || format!("{base} corollary(4) m={m} case={case}"),
                );
            }
        }
    }
    Ok(())
}

/// Full orthogonality tables for both digit families and both α-sets.
fn suite_dorg(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for base in [BasisId::CartierPhi, BasisId::CartierPsi] {
        for n in 1..=2u32 {
            let qn = ipow(f.q, n);
            for k in 0..2 * qn {
                for l in 0..qn {
                    let expect = if k + l == qn - 1 {
                        TruncatedLaurent::monomial(f.clone(), f.sign(n as u64), 0)
                    } else {
                        TruncatedLaurent::zero(f.clone(), PREC_CAP)
                    };
                    let all = orthogonality_sum(&f, base, k, l, n, SumMode::AllDegBelow)?;
                    ctx.check(
                        all.eq_to_prec(&expect) && all.is_exact(),
                        || format!("{base} orthogonality all-deg k={k} l={l} n={n}"),
                    );
                    if k < qn {
                        let monic = orthogonality_sum(&f, base, k, l, n, SumMode::MonicDeg)?;
                        ctx.check(
                            monic.eq_to_prec(&expect) && monic.is_exact(),
                            || format!("{base} orthogonality monic k={k} l={l} n={n}"),
                        );
                    }
                }
            }
        }
    }
    Ok(())
}

/// Digit-basis reconstruction of arbitrary continuous-function tables, and
/// window independence of the recovered coefficients.
fn suite_sjrep(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for window in 2..=3u32 {
        let count = ipow(f.q, window);
        for case in 0..5 {
            let values = (0..count).map(|_| ctx.rand_series(0, 24)).collect();
            let table = ContinuousFunc::new(f.clone(), window, values)?;
            for base in [BasisId::CartierPhi, BasisId::CartierPsi] {
                let ex = expand_continuous(&table, base)?;
                let mut ok = true;
                for idx in 0..count {
                    let alpha = poly_by_index(&f, idx, window);
                    let got = evaluate_digit_expansion(&ex, &alpha)?;
                    ok &= got.eq_to_prec(&table.values[idx as usize]);
                }
                ctx.check(ok, || format!("{base} reconstruction window={window} case={case}"));
                // window independence of the recovery sum
                let mut independent = true;
                for n in 0..ipow(f.q, window - 1) {
                    let small = recover_coeff(&table, base, n, window - 1)?;
                    independent &= small.eq_to_prec(&ex.coeffs[n as usize]);
                }
                ctx.check(independent, || format!("{base} window independence window={window} case={case}"));
            }
        }
    }
    Ok(())
}

/// Linearity detector: expansion coefficients vanish away from `q`-power
/// indices exactly for additive homogeneous tables, checked against a
/// brute-force ground truth over the whole table.
fn suite_ch(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    let window = 2u32;
    let count = ipow(f.q, window);
    let ground_truth = |table: &ContinuousFunc| -> Result<bool> {
        for a in 0..count {
            let pa = poly_by_index(&f, a, window);
            for b in 0..count {
                let pb = poly_by_index(&f, b, window);
                let sum_idx = index_of(&pa.add(&pb)?, window);
                let lhs = &table.values[sum_idx as usize];
                let rhs = table.values[a as usize].add(&table.values[b as usize])?;
                if !lhs.eq_to_prec(&rhs) {
                    return Ok(false);
                }
            }
            for lam in 1..f.q {
                let scaled_idx = index_of(&pa.scale(FieldElem(lam)), window);
                let lhs = &table.values[scaled_idx as usize];
                let rhs = table.values[a as usize].scale(FieldElem(lam));
                if !lhs.eq_to_prec(&rhs) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    for case in 0..10 {
        // planted linear table from an additive coefficient list
        let values = (0..window as usize).map(|_| ctx.rand_series(0, 24)).collect();
        let lf = LinearFunc::new(f.clone(), values)?;
        let table = ContinuousFunc::tabulate(&f, window, |alpha| lf.eval(alpha))?;
        ctx.check(ground_truth(&table)?, || format!("planted table is additive case={case}"));
        let verdict = is_linear(&expand_continuous(&table, BasisId::CartierPhi)?);
        ctx.check(verdict, || format!("detector accepts linear table case={case}"));
    }
    for case in 0..10 {
        let values = (0..count).map(|_| ctx.rand_series(0, 24)).collect();
        let table = ContinuousFunc::new(f.clone(), window, values)?;
        let truth = ground_truth(&table)?;
        let verdict = is_linear(&expand_continuous(&table, BasisId::CartierPhi)?);
        ctx.check(verdict == truth, || format!("detector matches ground truth case={case}"));
    }
    Ok(())
}

/// The integer-side suite: Mahler rows, residue bijections, and the mod-`p`
/// agreement of the two digit families.
fn suite_padic(ctx: &mut Ctx) -> Result<()> {
    let p = ctx.field.p;
    for n in 0..=2u64 {
        let pn = ipow(p, n as u32);
        let jmax = ipow(p, n as u32 + 1);
        let row = mahler_coeffs(p, n, jmax)?;
        let mut below = true;
        let mut above = true;
        for (j, a) in row.coeffs.iter().enumerate() {
            if (j as u64) < pn {
                below &= a.is_zero();
            } else if (j as u64) > pn {
                above &= (a % BigInt::from(p)).is_zero();
            }
        }
        ctx.check(below, || format!("Mahler row vanishes below p^{n}"));
        ctx.check(row.coeffs[pn as usize].abs() == BigInt::one(), || {
            format!("Mahler row is a unit at p^{n}")
        });
        ctx.check(above, || format!("Mahler row divisible by p above p^{n}"));
    }
    for n in 1..=3usize {
        let pn = ipow(p, n as u32);
        let mut seen = vec![false; pn as usize];
        for v in 0..pn {
            let x = PadicInt::from_u128(p, n + 1, v as u128);
            let vec = residue_vector(&x, n)?;
            let mut idx = 0u64;
            for (i, d) in vec.iter().enumerate() {
                idx += d * ipow(p, i as u32);
            }
            seen[idx as usize] = true;
        }
        ctx.check(seen.iter().all(|&b| b), || format!("residue map bijective at level {n}"));
    }
    for case in 0..25 {
        let digits = (0..20).map(|_| ctx.rng.gen_range(0..p)).collect();
        let x = PadicInt::from_digits(p, digits)?;
        let mut ok = true;
        for j in 0..16u64 {
            let a = padic_digit_eval(PadicKind::Phi, j, &x);
            let b = padic_digit_eval(PadicKind::Psi, j, &x);
            ok &= a.digit(0) == b.digit(0);
        }
        ctx.check(ok, || format!("digit families agree mod p case={case}"));
        // continuity moduli of the shift operators
        for n in 1..4u64 {
            let k = digit_index(p, n).k;
            let phi_out = padic_cartier(PadicKind::Phi, n, &x);
            let psi_out = padic_cartier(PadicKind::Psi, n, &x);
            let m = x.ndigits() as u64;
            ok = phi_out.ndigits() as u64 >= m.saturating_sub(n)
                && psi_out.ndigits() as u64 >= m.saturating_sub(n) / ipow(p, k);
            ctx.check(ok, || format!("continuity moduli n={n} case={case}"));
        }
    }
    Ok(())
}

fn bigint_binom(m: u64, n: u64) -> BigInt {
    if n > m {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..n {
        acc = acc * BigInt::from(m - i) / BigInt::from(i + 1);
    }
    acc
}

/// Exhaustive binomial-sum congruence against big-integer arithmetic and
/// against the closed-form case split.
fn suite_nega(ctx: &mut Ctx) -> Result<()> {
    for (qk, p) in [(2u64, 2u64), (3, 3), (4, 2), (8, 2), (9, 3)] {
        for n in 1..qk {
            for m in 1..=3 * qk {
                let got = binom_sum_congruence(m, n, qk, p)?;
                let mut direct = BigInt::zero();
                for r in n..qk {
                    direct += bigint_binom(r, n) * bigint_binom(m + r - 1, r);
                }
                let direct = ((direct % BigInt::from(p)) + BigInt::from(p)) % BigInt::from(p);
                ctx.check(BigInt::from(got) == direct, || {
                    format!("congruence equals big-integer sum qk={qk} n={n} m={m}")
                });
                let s = m % qk;
                let expect = if n + s == qk {
                    if n % 2 == 0 {
                        1
                    } else {
                        (p - 1) % p
                    }
                } else {
                    0
                };
                ctx.check(got == expect, || format!("closed-form case split qk={qk} n={n} m={m}"));
            }
        }
    }
    Ok(())
}

/// The binomial inversion between the Hasse and phi sequences on Laurent
/// series, including the top-index coincidence of the two sequences.
fn suite_gmain(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for k in 1..=2u32 {
        let qk = ipow(f.q, k);
        for case in 0..12 {
            let x = ctx.rand_series(-8, 24);
            for n in ipow(f.q, k - 1)..qk {
                let row = inversion_row(&f, InversionDirection::HasseToPhi, n, k)?;
                let mut acc = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                for (off, c) in row.iter().enumerate() {
                    acc = acc.add(&c.mul(&phi(n + off as u64, &x))?)?;
                }
                ctx.check(acc.eq_to_prec(&hasse(n, &x)), || format!("direction (1) k={k} n={n} case={case}"));

                let row = inversion_row(&f, InversionDirection::PhiToHasse, n, k)?;
                let mut acc = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                for (off, c) in row.iter().enumerate() {
                    acc = acc.add(&c.mul(&hasse(n + off as u64, &x))?)?;
                }
                ctx.check(acc.eq_to_prec(&phi(n, &x)), || format!("direction (2) k={k} n={n} case={case}"));
            }
            ctx.check(
                phi(qk - 1, &x).eq_to_prec(&hasse(qk - 1, &x)),
                || format!("top indices coincide k={k} case={case}"),
            );
        }
    }
    Ok(())
}

/// Product rule for the low-index phi operators against direct evaluation
/// on the product series.
fn suite_prodfor(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for n in 1..f.q {
        for case in 0..10 {
            let x = if case % 2 == 0 { ctx.rand_poly(10) } else { ctx.rand_series(0, 24) };
            let y = ctx.rand_poly(10);
            let got = phi_product(n, &x, &y)?;
            let direct = phi(n, &x.mul(&y)?);
            ctx.check(got.eq_to_prec(&direct), || format!("product rule n={n} case={case}"));
        }
        // x = 1 reduces to the plain operator
        let y = ctx.rand_poly(10);
        let got = phi_product(n, &TruncatedLaurent::one(f.clone()), &y)?;
        ctx.check(got.eq_to_prec(&phi(n, &y)), || format!("unit left factor n={n}"));
    }
    Ok(())
}

/// Order normalization: invertible change of basis, distinct orders, and
/// the determinant identity `W(gs) = W(xs)·det(A)` for both operator kinds.
fn suite_wl1(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    let mut done = 0;
    while done < 15 {
        let xs: Vec<_> = (0..3).map(|_| ctx.rand_poly(6)).collect();
        let Ok((a, gs)) = normalize_orders(&xs) else {
            continue;
        };
        done += 1;
        let mut orders: Vec<i64> = gs.iter().map(|g| g.valuation().unwrap()).collect();
        orders.sort_unstable();
        let distinct = orders.windows(2).all(|w| w[0] < w[1]);
        ctx.check(distinct, || format!("orders distinct case={done}"));
        let dets = det_field(&f, &a)?;
        ctx.check(dets != FieldElem(0), || format!("change of basis invertible case={done}"));
        let mut consistent = true;
        for (j, g) in gs.iter().enumerate() {
            let mut acc = TruncatedLaurent::zero(f.clone(), PREC_CAP);
            for (r, x) in xs.iter().enumerate() {
                acc = acc.add(&x.scale(a[r][j]))?;
            }
            consistent &= acc.eq_to_prec(g);
        }
        ctx.check(consistent, || format!("gs = xs·A case={done}"));
        let eps = EpsVector::new(vec![0, 2, 5])?;
        for kind in [WronskianKind::Phi, WronskianKind::Psi] {
            let wg = wronskian(kind, &eps, &gs)?;
            let wx = wronskian(kind, &eps, &xs)?;
            ctx.check(
                wg.eq_to_prec(&wx.scale(dets)),
                || format!("determinant identity {kind:?} case={done}"),
            );
        }
    }
    Ok(())
}

/// Strictly increasing distinct orders force nonzero Wronskians at the
/// order profile, for both operator kinds.
fn suite_wl2(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for case in 0..50 {
        let size = ctx.rng.gen_range(2..=3usize);
        let mut orders: Vec<u64> = Vec::new();
        while orders.len() < size {
            let v = ctx.rng.gen_range(0..=12u64);
            if !orders.contains(&v) {
                orders.push(v);
            }
        }
        orders.sort_unstable();
        let gs: Vec<_> = orders
            .iter()
            .map(|&o| {
                let tail = ctx.rand_poly(5).shift_exp(o as i64 + 1);
                monomial(&f, o as i64).add(&tail)
            })
            .collect::<Result<Vec<_>>>()?;
        let eps = EpsVector::new(orders.clone())?;
        for kind in [WronskianKind::Phi, WronskianKind::Psi] {
            let det = wronskian(kind, &eps, &gs)?;
            ctx.check(!det.is_zero(), || format!("{kind:?} nonzero at orders {orders:?} case={case}"));
        }
    }
    Ok(())
}

/// Exact rank over the field constants of a family of polynomials, by
/// elimination on the coefficient vectors.
fn poly_rank(field: &Field, xs: &[TruncatedLaurent]) -> Result<usize> {
    let hi = xs
        .iter()
        .filter(|x| !x.is_zero())
        .map(|x| x.hi())
        .max()
        .unwrap_or(0)
        .max(0);
    let mut rows: Vec<Vec<FieldElem>> = xs
        .iter()
        .map(|x| (0..hi).map(|e| x.coeff_or_zero(e)).collect())
        .collect();
    let mut rank = 0usize;
    for col in 0..hi as usize {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != FieldElem(0)) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = field.inv(rows[rank][col])?;
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != FieldElem(0) {
                let c = field.mul(rows[r][col], inv);
                for k in 0..hi as usize {
                    let s = field.mul(c, rows[rank][k]);
                    rows[r][k] = field.sub(rows[r][k], s);
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    Ok(rank)
}

/// Planted independent and dependent families classified consistently by
/// the Wronskian search across all three operator kinds.
fn suite_wcar(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    for case in 0..30 {
        let size = ctx.rng.gen_range(2..=3usize);
        let mut xs: Vec<_> = (0..size).map(|_| ctx.rand_poly(6)).collect();
        let plant_dependent = case % 2 == 1;
        if plant_dependent {
            let mut combo = TruncatedLaurent::zero(f.clone(), PREC_CAP);
            for x in xs.iter().take(size - 1) {
                combo = combo.add(&x.scale(ctx.rand_elem()))?;
            }
            xs[size - 1] = combo;
        }
        let truth = poly_rank(&f, &xs)? == size;
        for kind in [WronskianKind::Phi, WronskianKind::Psi, WronskianKind::Hasse] {
            let cert = find_certificate(kind, &xs, 16)?;
            let verdict = match cert.outcome {
                Outcome::Independent { ref eps, ref det } => {
                    let recomputed = wronskian(kind, eps, &xs)?;
                    ctx.check(
                        recomputed.eq_to_prec(det) && !det.is_zero(),
                        || format!("witness determinant reproducible {kind:?} case={case}"),
                    );
                    true
                }
                Outcome::Dependent { ref relation } => {
                    let mut acc = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                    for (c, x) in relation.iter().zip(&xs) {
                        acc = acc.add(&c.mul(x)?)?;
                    }
                    ctx.check(
                        acc.is_zero() && relation.iter().any(|c| !c.is_zero()),
                        || format!("relation annihilates family {kind:?} case={case}"),
                    );
                    false
                }
                Outcome::NoCertificate { .. } => {
                    ctx.check(false, || format!("no verdict within bound {kind:?} case={case}"));
                    continue;
                }
            };
            ctx.check(verdict == truth, || {
                format!("verdict matches exact rank {kind:?} case={case} truth={truth}")
            });
        }
    }
    Ok(())
}

/// The bounded-index criterion over the level-`m` kernel field: membership
/// tests, separation of planted families, and invariance of the vanishing
/// pattern under column scaling by kernel elements. The observation that an
/// independence witness for the phi kind also works for the Hasse kind at
/// the same indices is logged per-instance, not asserted.
fn suite_wcar2(ctx: &mut Ctx) -> Result<()> {
    let f = ctx.field.clone();
    let p = f.p;
    let m = 1u32;
    let pm = ipow(p, m);
    // membership
    ctx.check(in_km(&monomial(&f, pm as i64), m)?, || "t^p in the kernel field".to_string());
    ctx.check(!in_km(&monomial(&f, 1), m)?, || "t outside the kernel field".to_string());
    ctx.check(in_km(&TruncatedLaurent::one(f.clone()), 3)?, || "constants in every level".to_string());
    for case in 0..10 {
        let x = ctx.rand_poly(5);
        ctx.check(
            in_km(&x.frobenius_power(m), m)?,
            || format!("p^m-th powers are kernel elements case={case}"),
        );
    }
    // separation of planted families
    let one = TruncatedLaurent::one(f.clone());
    let t = monomial(&f, 1);
    let indep = independent_over_km(&[one.clone(), t.clone()], m, WronskianKind::Phi)?;
    match indep.outcome {
        Outcome::Independent { ref eps, .. } => {
            ctx.check(true, || String::new());
            // experimental: same indices for the Hasse kind
            let hd = wronskian(WronskianKind::Hasse, eps, &[one.clone(), t.clone()])?;
            ctx.note(format!(
                "independence witness eps={:?} for phi also nonzero for hasse: {}",
                eps.0,
                !hd.is_zero()
            ));
        }
        _ => ctx.check(false, || "constant/linear pair independent over kernel".to_string()),
    }
    for case in 0..5 {
        let x = ctx.rand_poly(4).add(&one)?;
        let fam = [x.clone(), x.shift_exp(pm as i64)];
        let dep = independent_over_km(&fam, m, WronskianKind::Phi)?;
        let ok = match dep.outcome {
            Outcome::Dependent { ref relation } => {
                let mut acc = TruncatedLaurent::zero(f.clone(), PREC_CAP);
                for (c, z) in relation.iter().zip(&fam) {
                    acc = acc.add(&c.mul(z)?)?;
                }
                acc.is_zero()
            }
            _ => false,
        };
        ctx.check(ok, || format!("kernel-scaled pair dependent case={case}"));
    }
    // vanishing pattern invariant under column scaling by kernel monomials
    for case in 0..5 {
        let xs = [ctx.rand_poly(4), ctx.rand_poly(4)];
        let c = TruncatedLaurent::monomial(f.clone(), ctx.rand_nonzero_elem(), pm as i64);
        let scaled = [xs[0].clone(), xs[1].mul(&c)?];
        let mut ok = true;
        for e0 in 0..pm {
            for e1 in (e0 + 1)..pm {
                let eps = EpsVector::new(vec![e0, e1])?;
                let a = wronskian(WronskianKind::Phi, &eps, &xs)?;
                let b = wronskian(WronskianKind::Phi, &eps, &scaled)?;
                ok &= a.is_zero() == b.is_zero();
            }
        }
        ctx.check(ok, || format!("vanishing pattern invariant under kernel scaling case={case}"));
    }
    Ok(())
}

// -------------------------------------------------------------- basis suite

/// Cross-checks of the three closed-form coefficient routes for the Carlitz
/// basis; exercised through the `transitions` and `pnrep` suites' shared
/// entry point, and directly in the integration tests.
pub fn carlitz_routes_agree(field: &Field, values: &[TruncatedLaurent], n_max: u32) -> Result<bool> {
    let prec = 48;
    for n in 0..=n_max {
        let via_diff = carlitz_difference(values, n, true)?;
        let cs = c_coeffs(field, n)?;
        let mut via_c = TruncatedLaurent::zero(field.clone(), PREC_CAP);
        for (i, c) in cs.iter().enumerate() {
            via_c = via_c.add(&c.mul(&values[i])?)?;
        }
        if !via_diff.eq_to_prec(&via_c) {
            return Ok(false);
        }
        let ca = c_coeffs_via_a(field, n, prec)?;
        for (i, c) in cs.iter().enumerate() {
            if !c.eq_to_prec(&ca[i]) {
                return Ok(false);
            }
        }
        for r in 0..=n {
            // the double-sum route enters through the per-monomial weights
            let _ = a_coeff(field, n, r, prec)?;
        }
    }
    Ok(true)
}
