//! Wronskian independence criteria over the prime-base operator families:
//! determinants of operator values, order normalization, the kernel fields
//! cut out by vanishing of the low-index operators, and independence
//! certificates over the constants and over those kernels. Throughout this
//! module operator indices are read in base p, the characteristic, matching
//! the setting of the independence criteria.

use crate::error::{Error, Result};
use crate::fq::{Field, FieldElem};
use crate::operators::{hasse, ipow, phi_base, psi_base};
use crate::series::{TruncatedLaurent, PREC_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WronskianKind {
    Phi,
    Psi,
    Hasse,
}

impl WronskianKind {
    pub fn parse(s: &str) -> Result<WronskianKind> {
        match s {
            "phi" => Ok(WronskianKind::Phi),
            "psi" => Ok(WronskianKind::Psi),
            "hasse" => Ok(WronskianKind::Hasse),
            _ => Err(Error::Parse(format!("unknown wronskian kind {s:?}"))),
        }
    }

    pub fn apply(self, i: u64, x: &TruncatedLaurent) -> Result<TruncatedLaurent> {
        match self {
            WronskianKind::Phi => Ok(phi_base(1, i, x)),
            WronskianKind::Psi => psi_base(1, i, x, true),
            WronskianKind::Hasse => Ok(hasse(i, x)),
        }
    }
}

/// A strictly increasing vector of operator indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsVector(pub Vec<u64>);

impl EpsVector {
    pub fn new(eps: Vec<u64>) -> Result<EpsVector> {
        if eps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::IndexRange(format!("indices {eps:?} are not strictly increasing")));
        }
        Ok(EpsVector(eps))
    }
}

/// Determinant by exact cofactor expansion; division-free, so precision is
/// tracked soundly and a result that is zero within finite precision is
/// distinguishable from an exact zero.
fn determinant(m: &[Vec<TruncatedLaurent>]) -> Result<TruncatedLaurent> {
    let field = m[0][0].field.clone();
    let n = m.len();
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let mut acc = TruncatedLaurent::zero(field.clone(), PREC_CAP);
    for j in 0..n {
        if m[0][j].is_zero() && m[0][j].is_exact() {
            continue;
        }
        let minor: Vec<Vec<TruncatedLaurent>> = (1..n)
            .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c].clone()).collect())
            .collect();
        let term = m[0][j].mul(&determinant(&minor)?)?.scale(field.sign(j as u64));
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// `det(op_{eps_i}(x_j))` for the chosen operator family.
pub fn wronskian(
    kind: WronskianKind,
    eps: &EpsVector,
    xs: &[TruncatedLaurent],
) -> Result<TruncatedLaurent> {
    if eps.0.len() != xs.len() || xs.is_empty() {
        return Err(Error::IndexRange(format!(
            "{} indices against {} series",
            eps.0.len(),
            xs.len()
        )));
    }
    let rows = eps
        .0
        .iter()
        .map(|&i| xs.iter().map(|x| kind.apply(i, x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    determinant(&rows)
}

/// Three-valued verdict on a computed determinant: definitely nonzero,
/// exactly zero, or zero only within finite precision.
pub fn det_verdict(det: &TruncatedLaurent) -> Option<bool> {
    if !det.is_zero() {
        Some(true)
    } else if det.is_exact() {
        Some(false)
    } else {
        None
    }
}

enum NormalizeOutcome {
    Normalized { a: Vec<Vec<FieldElem>>, gs: Vec<TruncatedLaurent> },
    Dependent { relation: Vec<FieldElem> },
}

fn normalize_outcome(xs: &[TruncatedLaurent]) -> Result<NormalizeOutcome> {
    let field = xs[0].field.clone();
    let n = xs.len();
    let mut a: Vec<Vec<FieldElem>> = (0..n)
        .map(|r| (0..n).map(|c| FieldElem(u64::from(r == c))).collect())
        .collect();
    let mut gs = xs.to_vec();
    for _ in 0..10_000 {
        for (j, g) in gs.iter().enumerate() {
            if g.is_zero() {
                if g.is_exact() {
                    return Ok(NormalizeOutcome::Dependent {
                        relation: (0..n).map(|r| a[r][j]).collect(),
                    });
                }
                return Err(Error::Indeterminate(format!(
                    "column {j} vanished within precision O(t^{})",
                    g.prec()
                )));
            }
        }
        let vals: Vec<i64> = gs.iter().map(|g| g.valuation().unwrap()).collect();
        let clash = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| vals[i] == vals[j]);
        let Some((i, j)) = clash else {
            return Ok(NormalizeOutcome::Normalized { a, gs });
        };
        let li = gs[i].coeff_or_zero(vals[i]);
        let lj = gs[j].coeff_or_zero(vals[j]);
        let c = field.mul(lj, field.inv(li)?);
        gs[j] = gs[j].sub(&gs[i].scale(c))?;
        for r in 0..n {
            a[r][j] = field.sub(a[r][j], field.mul(c, a[r][i]));
        }
    }
    Err(Error::Indeterminate("order normalization did not terminate".into()))
}

/// Column-reduce a family to nonzero series with pairwise distinct orders:
/// returns an invertible matrix `A` over the field constants and `gs` with
/// `gs = xs · A`. Errors on a linearly dependent input.
pub fn normalize_orders(
    xs: &[TruncatedLaurent],
) -> Result<(Vec<Vec<FieldElem>>, Vec<TruncatedLaurent>)> {
    match normalize_outcome(xs)? {
        NormalizeOutcome::Normalized { a, gs } => Ok((a, gs)),
        NormalizeOutcome::Dependent { .. } => Err(Error::DependentInput),
    }
}

/// Determinant of a constant matrix.
pub fn det_field(field: &Field, a: &[Vec<FieldElem>]) -> Result<FieldElem> {
    let n = a.len();
    let mut m: Vec<Vec<FieldElem>> = a.to_vec();
    let mut det = FieldElem(1);
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| m[r][col].0 != 0) else {
            return Ok(FieldElem(0));
        };
        if piv != col {
            m.swap(piv, col);
            det = field.neg(det);
        }
        det = field.mul(det, m[col][col]);
        let inv = field.inv(m[col][col])?;
        for r in col + 1..n {
            let c = field.mul(m[r][col], inv);
            for k in col..n {
                let s = field.mul(c, m[col][k]);
                m[r][k] = field.sub(m[r][k], s);
            }
        }
    }
    Ok(det)
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Independent { eps: EpsVector, det: TruncatedLaurent },
    Dependent { relation: Vec<TruncatedLaurent> },
    NoCertificate { bound: u64 },
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub kind: WronskianKind,
    pub outcome: Outcome,
}

fn constant_relation(field: &Field, relation: &[FieldElem]) -> Vec<TruncatedLaurent> {
    relation
        .iter()
        .map(|&c| TruncatedLaurent::monomial(field.clone(), c, 0))
        .collect()
}

fn increasing_vectors(bound: u64, len: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(out: &mut Vec<Vec<u64>>, cur: &mut Vec<u64>, start: u64, bound: u64, len: usize) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in start..=bound {
            cur.push(v);
            rec(out, cur, v + 1, bound, len);
            cur.pop();
        }
    }
    rec(&mut out, &mut cur, 0, bound, len);
    out
}

/// Search for an independence witness: a strictly increasing index vector
/// with `eps_n <= bound` whose Wronskian is nonzero. Dependent families
/// yield the constant relation found by order normalization. The preferred
/// candidate is the order profile after normalization; brute-force search
/// below the bound is the fallback.
pub fn find_certificate(
    kind: WronskianKind,
    xs: &[TruncatedLaurent],
    bound: u64,
) -> Result<Certificate> {
    let field = xs[0].field.clone();
    match normalize_outcome(xs)? {
        NormalizeOutcome::Dependent { relation } => {
            return Ok(Certificate {
                kind,
                outcome: Outcome::Dependent { relation: constant_relation(&field, &relation) },
            });
        }
        NormalizeOutcome::Normalized { gs, .. } => {
            let mut orders: Vec<i64> = gs.iter().map(|g| g.valuation().unwrap()).collect();
            orders.sort_unstable();
            if orders[0] >= 0 && *orders.last().unwrap() as u64 <= bound {
                let eps = EpsVector::new(orders.iter().map(|&v| v as u64).collect())?;
                let det = wronskian(kind, &eps, xs)?;
                if det_verdict(&det) == Some(true) {
                    return Ok(Certificate { kind, outcome: Outcome::Independent { eps, det } });
                }
            }
        }
    }
    let mut indeterminate = false;
    if ((bound + 1) as u128).pow(xs.len() as u32) <= 1 << 20 {
        for cand in increasing_vectors(bound, xs.len()) {
            let eps = EpsVector(cand);
            let det = wronskian(kind, &eps, xs)?;
            match det_verdict(&det) {
                Some(true) => {
                    return Ok(Certificate { kind, outcome: Outcome::Independent { eps, det } })
                }
                Some(false) => {}
                None => indeterminate = true,
            }
        }
    }
    if indeterminate {
        return Err(Error::Indeterminate(format!(
            "all determinants below bound {bound} vanish only within precision"
        )));
    }
    Ok(Certificate { kind, outcome: Outcome::NoCertificate { bound } })
}

/// Membership in the kernel field cut out by the vanishing of the Hasse
/// derivatives `D_i`, `1 <= i < p^m` — equivalently of the prime-base
/// Cartier operators over the same range; both are checked and must agree.
pub fn in_km(x: &TruncatedLaurent, m: u32) -> Result<bool> {
    let field = x.field.clone();
    let pm = ipow(field.p, m);
    if !x.is_exact() && x.prec() < pm as i64 {
        return Err(Error::InsufficientPrecision(format!(
            "kernel test at level {m} needs precision >= p^{m}, have O(t^{})",
            x.prec()
        )));
    }
    let by_hasse = (1..pm).all(|i| hasse(i, x).is_zero());
    let by_phi = (1..pm).all(|i| phi_base(1, i, x).is_zero());
    if by_hasse != by_phi {
        return Err(Error::Indeterminate(format!(
            "kernel verdicts disagree at level {m}"
        )));
    }
    Ok(by_hasse)
}

/// Independence over the level-`m` kernel field: searches index vectors
/// strictly below `p^m`. A dependence verdict is only produced when a
/// witness relation with monomial kernel coefficients of bounded degree is
/// found; otherwise the outcome reports no certificate below the bound.
pub fn independent_over_km(
    xs: &[TruncatedLaurent],
    m: u32,
    kind: WronskianKind,
) -> Result<Certificate> {
    if kind == WronskianKind::Psi {
        return Err(Error::IndexRange(
            "no kernel-level criterion is asserted for the psi family".into(),
        ));
    }
    let field = xs[0].field.clone();
    let pm = ipow(field.p, m);
    if xs.len() as u64 > pm {
        return Err(Error::IndexRange(format!(
            "family of {} exceeds p^{m} = {pm}",
            xs.len()
        )));
    }
    let mut indeterminate = false;
    for cand in increasing_vectors(pm - 1, xs.len()) {
        let eps = EpsVector(cand);
        let det = wronskian(kind, &eps, xs)?;
        match det_verdict(&det) {
            Some(true) => {
                return Ok(Certificate { kind, outcome: Outcome::Independent { eps, det } })
            }
            Some(false) => {}
            None => indeterminate = true,
        }
    }
    if indeterminate {
        return Err(Error::Indeterminate(format!(
            "all determinants below p^{m} vanish only within precision"
        )));
    }
    // search for a witness relation with coefficients c * t^{p^m d}
    let mut candidates = vec![TruncatedLaurent::zero(field.clone(), PREC_CAP)];
    for d in 0..=2i64 {
        for c in 1..field.q {
            candidates.push(TruncatedLaurent::monomial(
                field.clone(),
                FieldElem(c),
                pm as i64 * d,
            ));
        }
    }
    let mut pick = vec![0usize; xs.len()];
    loop {
        if pick.iter().any(|&i| i != 0) {
            let mut acc = TruncatedLaurent::zero(field.clone(), PREC_CAP);
            for (j, &i) in pick.iter().enumerate() {
                acc = acc.add(&candidates[i].mul(&xs[j])?)?;
            }
            if acc.is_zero() && acc.is_exact() {
                let relation = pick.iter().map(|&i| candidates[i].clone()).collect();
                return Ok(Certificate { kind, outcome: Outcome::Dependent { relation } });
            }
        }
        // advance the odometer
        let mut pos = 0;
        loop {
            if pos == pick.len() {
                return Ok(Certificate { kind, outcome: Outcome::NoCertificate { bound: pm - 1 } });
            }
            pick[pos] += 1;
            if pick[pos] < candidates.len() {
                break;
            }
            pick[pos] = 0;
            pos += 1;
        }
    }
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

    fn random_poly(rng: &mut ChaCha8Rng, field: &Field, deg: u32) -> TruncatedLaurent {
        let coeffs = (0..=deg).map(|_| FieldElem(rng.gen_range(0..field.q))).collect();
        TruncatedLaurent::poly(field.clone(), coeffs)
    }

    #[test]
    fn wronskian_examples() {
        let f = f2();
        let one = TruncatedLaurent::one(f.clone());
        let t = monomial(&f, 1);
        let eps = EpsVector::new(vec![0, 1]).unwrap();
        for kind in [WronskianKind::Phi, WronskianKind::Hasse] {
            let det = wronskian(kind, &eps, &[one.clone(), t.clone()]).unwrap();
            assert!(det.eq_to_prec(&one), "{kind:?}");
        }
        // repeated column
        let det = wronskian(WronskianKind::Phi, &eps, &[one.clone(), one.clone()]).unwrap();
        assert!(det.is_zero() && det.is_exact());
    }

    #[test]
    fn eps_vectors_must_increase() {
        assert!(EpsVector::new(vec![0, 1, 1]).is_err());
        assert!(EpsVector::new(vec![0, 2, 5]).is_ok());
    }

    #[test]
    fn certificate_for_distinct_order_monomials() {
        let f = f2();
        let xs = [monomial(&f, 0), monomial(&f, 1), monomial(&f, 2)];
        for kind in [WronskianKind::Phi, WronskianKind::Psi] {
            let cert = find_certificate(kind, &xs, 8).unwrap();
            match cert.outcome {
                Outcome::Independent { eps, det } => {
                    assert_eq!(eps.0, vec![0, 1, 2]);
                    assert!(!det.is_zero());
                }
                other => panic!("expected independence, got {other:?}"),
            }
        }
    }

    #[test]
    fn scalar_multiples_are_dependent() {
        let f = Field::new(3, 1).unwrap();
        let t = monomial(&f, 1);
        for lambda in 1..3u64 {
            let xs = [t.clone(), t.scale(FieldElem(lambda))];
            let cert = find_certificate(WronskianKind::Phi, &xs, 4).unwrap();
            let Outcome::Dependent { relation } = cert.outcome else {
                panic!("expected dependence");
            };
            // the relation annihilates the family
            let mut acc = TruncatedLaurent::zero(f.clone(), PREC_CAP);
            for (c, x) in relation.iter().zip(&xs) {
                acc = acc.add(&c.mul(x).unwrap()).unwrap();
            }
            assert!(acc.is_zero() && acc.is_exact());
            assert!(relation.iter().any(|c| !c.is_zero()));
        }
    }

    #[test]
    fn linear_relation_is_detected() {
        let f = f2();
        let one = TruncatedLaurent::one(f.clone());
        let t = monomial(&f, 1);
        let xs = [one.add(&t).unwrap(), one.clone(), t.clone()];
        let cert = find_certificate(WronskianKind::Psi, &xs, 4).unwrap();
        let Outcome::Dependent { relation } = cert.outcome else {
            panic!("expected dependence");
        };
        let mut acc = TruncatedLaurent::zero(f.clone(), PREC_CAP);
        for (c, x) in relation.iter().zip(&xs) {
            acc = acc.add(&c.mul(x).unwrap()).unwrap();
        }
        assert!(acc.is_zero() && acc.is_exact());
    }

    #[test]
    fn normalization_produces_distinct_orders() {
        let f = f2();
        let one = TruncatedLaurent::one(f.clone());
        let t = monomial(&f, 1);
        let xs = [one.add(&t).unwrap(), one.clone()];
        let (a, gs) = normalize_orders(&xs).unwrap();
        let mut orders: Vec<i64> = gs.iter().map(|g| g.valuation().unwrap()).collect();
        orders.sort_unstable();
        orders.dedup();
        assert_eq!(orders.len(), 2);
        assert_ne!(det_field(&f, &a).unwrap(), FieldElem(0));
        // gs = xs · A
        for (j, g) in gs.iter().enumerate() {
            let mut acc = TruncatedLaurent::zero(f.clone(), PREC_CAP);
            for (r, x) in xs.iter().enumerate() {
                acc = acc.add(&x.scale(a[r][j])).unwrap();
            }
            assert!(acc.eq_to_prec(g));
        }
        // already distinct orders: A = I
        let (a, _) = normalize_orders(&[one.clone(), t.clone()]).unwrap();
        assert_eq!(a, vec![vec![FieldElem(1), FieldElem(0)], vec![FieldElem(0), FieldElem(1)]]);
        // dependent input errors
        assert!(matches!(
            normalize_orders(&[t.clone(), t.clone()]),
            Err(Error::DependentInput)
        ));
    }

    #[test]
    fn normalization_preserves_wronskians_up_to_det() {
        let f = Field::new(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let xs: Vec<_> = (0..3).map(|_| random_poly(&mut rng, &f, 6)).collect();
            let Ok((a, gs)) = normalize_orders(&xs) else {
                continue;
            };
            let dets = det_field(&f, &a).unwrap();
            let eps = EpsVector::new(vec![0, 2, 5]).unwrap();
            for kind in [WronskianKind::Phi, WronskianKind::Psi] {
                let wg = wronskian(kind, &eps, &gs).unwrap();
                let wx = wronskian(kind, &eps, &xs).unwrap();
                assert!(wg.eq_to_prec(&wx.scale(dets)), "{kind:?}");
            }
        }
    }

    #[test]
    fn distinct_orders_give_nonzero_wronskians() {
        for q in [2u64, 3] {
            let f = Field::new(q, 1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(q + 70);
            for _ in 0..20 {
                // random strictly increasing order profile <= 12
                let mut orders: Vec<u64> = (0..12u64).filter(|_| rng.gen_bool(0.3)).collect();
                orders.truncate(3);
                if orders.is_empty() {
                    orders.push(rng.gen_range(0..12));
                }
                let gs: Vec<_> = orders
                    .iter()
                    .map(|&o| {
                        let tail = random_poly(&mut rng, &f, 6).shift_exp(o as i64 + 1);
                        monomial(&f, o as i64).add(&tail).unwrap()
                    })
                    .collect();
                let eps = EpsVector::new(orders.clone()).unwrap();
                for kind in [WronskianKind::Phi, WronskianKind::Psi] {
                    let det = wronskian(kind, &eps, &gs).unwrap();
                    assert!(!det.is_zero(), "{kind:?} orders {orders:?}");
                }
            }
        }
    }

    #[test]
    fn kernel_membership() {
        let f = f2();
        assert!(in_km(&monomial(&f, 2), 1).unwrap());
        assert!(!in_km(&monomial(&f, 1), 1).unwrap());
        assert!(in_km(&TruncatedLaurent::one(f.clone()), 3).unwrap());
        // p^m-th powers of arbitrary series
        let f3 = Field::new(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_poly(&mut rng, &f3, 5);
        assert!(in_km(&x.q_power(1), 1).unwrap());
        assert!(in_km(&x.q_power(2), 2).unwrap());
    }

    #[test]
    fn kernel_criterion_separates_planted_families() {
        for p in [2u64, 3] {
            let f = Field::new(p, 1).unwrap();
            let one = TruncatedLaurent::one(f.clone());
            let t = monomial(&f, 1);
            let indep = independent_over_km(&[one.clone(), t.clone()], 1, WronskianKind::Phi)
                .unwrap();
            assert!(matches!(indep.outcome, Outcome::Independent { .. }));
            let mut rng = ChaCha8Rng::seed_from_u64(p);
            let x = random_poly(&mut rng, &f, 4).add(&one).unwrap();
            let dep = independent_over_km(
                &[x.clone(), x.shift_exp(p as i64)],
                1,
                WronskianKind::Phi,
            )
            .unwrap();
            let Outcome::Dependent { relation } = dep.outcome else {
                panic!("expected dependence over the kernel");
            };
            assert!(relation.iter().all(|c| c.is_zero()
                || c.valuation().map_or(true, |v| v.rem_euclid(p as i64) == 0)));
        }
    }

    #[test]
    fn single_nonzero_series_is_independent() {
        let f = f2();
        let x = monomial(&f, 1);
        let cert = independent_over_km(&[x], 1, WronskianKind::Phi).unwrap();
        let Outcome::Independent { eps, .. } = cert.outcome else {
            panic!("expected independence");
        };
        assert_eq!(eps.0, vec![0]);
    }
}
