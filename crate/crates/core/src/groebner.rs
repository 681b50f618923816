//! Groebner-basis machinery: the constructive oracle behind every effective
//! ideal-membership question in the engine.
//!
//! Key operations:
//! - `buchberger`: reduced Groebner basis with a configurable reduction-step
//!   budget (every failure mode is a clean resource error),
//! - `membership_with_cofactors`: certified membership, returning either an
//!   exact cofactor combination (verified by re-expansion in test builds) or
//!   the nonzero normal form,
//! - `is_empty_on_chart`: emptiness of V(I) on the locus f_loc != 0 via the
//!   extra-variable localization trick (adjoin 1 - z*f_loc),
//! - `rewrite_generators`: expresses each generator (times a localizing
//!   power) in terms of the mu-th power of the centre ideal plus the ambient
//!   equations — the certificate that makes controlled transforms
//!   syntactically divisible,
//! - `max_order_on_cosupport`: largest k such that the (k-1)-st derivative
//!   ideal still vanishes somewhere on the chart.
//!
//! Design note: effective-membership degree bounds from the literature are
//! treated as checked inequalities, not as algorithms; Buchberger with step
//! budgets plays the constructive role at desk scale.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::poly::{grevlex_cmp, ExtNat, SparsePoly};

/// Monomial order used for leading-term selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonomialOrder {
    /// Graded reverse lexicographic (default).
    DegRevLex,
    /// Pure lexicographic, x1 > x2 > ...
    Lex,
    /// Block elimination order: the first k variables dominate (graded
    /// revlex within each block). A Groebner basis under Block(k) intersected
    /// with the subring omitting the first k variables generates the
    /// elimination ideal.
    Block(usize),
}

impl MonomialOrder {
    /// Compare two exponent vectors under this order.
    pub fn cmp(&self, a: &[u32], b: &[u32]) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self {
            MonomialOrder::DegRevLex => grevlex_cmp(a, b),
            MonomialOrder::Lex => {
                for (x, y) in a.iter().zip(b) {
                    match x.cmp(y) {
                        Ordering::Equal => {}
                        o => return o,
                    }
                }
                Ordering::Equal
            }
            MonomialOrder::Block(k) => {
                let k = (*k).min(a.len());
                match grevlex_cmp(&a[..k], &b[..k]) {
                    Ordering::Equal => grevlex_cmp(&a[k..], &b[k..]),
                    o => o,
                }
            }
        }
    }
}

/// A generating set for an ideal, with its monomial order and a flag
/// recording whether it is known to be a Groebner basis.
#[derive(Debug, Clone)]
pub struct IdealBasis {
    pub generators: Vec<SparsePoly>,
    pub monomial_order: MonomialOrder,
    pub is_groebner: bool,
}

impl IdealBasis {
    pub fn new(generators: Vec<SparsePoly>, monomial_order: MonomialOrder) -> Self {
        IdealBasis { generators, monomial_order, is_groebner: false }
    }

    pub fn degrevlex(generators: Vec<SparsePoly>) -> Self {
        Self::new(generators, MonomialOrder::DegRevLex)
    }
}

/// Default reduction-step budget per Groebner run.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Mutable step counter shared through one oracle call tree.
#[derive(Debug)]
pub struct StepBudget {
    pub steps: u64,
    pub budget: u64,
}

impl StepBudget {
    pub fn new(budget: u64) -> Self {
        StepBudget { steps: 0, budget }
    }

    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(Error::BudgetExceeded { what: "groebner reduction steps", budget: self.budget });
        }
        Ok(())
    }
}

/// One tracked basis element: the polynomial together with its expression
/// as a combination of the original generators.
#[derive(Debug, Clone)]
struct TrackedElem {
    poly: SparsePoly,
    repr: Vec<SparsePoly>,
}

fn leading_term(p: &SparsePoly, order: MonomialOrder) -> Option<(Vec<u32>, BigRational)> {
    p.terms()
        .max_by(|(ea, _), (eb, _)| order.cmp(ea, eb))
        .map(|(e, c)| (e.clone(), c.clone()))
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Fully reduce `f` by the tracked elements; returns the normal form and
/// the cofactors (wrt the tracked elements' polys).
fn normal_form_tracked(
    f: &SparsePoly,
    elems: &[TrackedElem],
    order: MonomialOrder,
    budget: &mut StepBudget,
) -> Result<(SparsePoly, Vec<SparsePoly>)> {
    let nvars = f.nvars();
    let mut work = f.clone();
    let mut result = SparsePoly::zero(nvars);
    let mut cofs = vec![SparsePoly::zero(nvars); elems.len()];
    let lts: Vec<Option<(Vec<u32>, BigRational)>> =
        elems.iter().map(|e| leading_term(&e.poly, order)).collect();
    while let Some((le, lc)) = leading_term(&work, order) {
        let mut reduced = false;
        for (i, lt) in lts.iter().enumerate() {
            let Some((ei, ci)) = lt else { continue };
            if divides(ei, &le) {
                let me: Vec<u32> = le.iter().zip(ei).map(|(a, b)| a - b).collect();
                let mc = &lc / ci;
                let mono = SparsePoly::monomial(mc, me);
                work = work.sub(&mono.mul(&elems[i].poly)?)?;
                cofs[i] = cofs[i].add(&mono)?;
                budget.tick()?;
                reduced = true;
                break;
            }
        }
        if !reduced {
            let mono = SparsePoly::monomial(lc, le);
            result = result.add(&mono)?;
            work = work.sub(&mono)?;
        }
    }
    Ok((result, cofs))
}

/// Buchberger with representation tracking: returns a reduced Groebner
/// basis, each element carrying its expression over the input generators.
fn buchberger_tracked(
    gens: &[SparsePoly],
    order: MonomialOrder,
    budget: &mut StepBudget,
) -> Result<Vec<TrackedElem>> {
    let nvars = gens.iter().map(|g| g.nvars()).max().unwrap_or(0);
    let ngens = gens.len();
    let mut basis: Vec<TrackedElem> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let mut repr = vec![SparsePoly::zero(nvars); ngens];
        repr[i] = SparsePoly::one(nvars);
        basis.push(TrackedElem { poly: g.clone(), repr });
    }
    if basis.is_empty() {
        return Ok(basis);
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..basis.len() {
        for j in 0..i {
            pairs.push((j, i));
        }
    }
    while let Some((i, j)) = pairs.pop() {
        let (ei, ci) = leading_term(&basis[i].poly, order).unwrap();
        let (ej, cj) = leading_term(&basis[j].poly, order).unwrap();
        // Product criterion: coprime leading monomials give a reducible pair.
        if ei.iter().zip(&ej).all(|(a, b)| *a == 0 || *b == 0) {
            continue;
        }
        let lcm: Vec<u32> = ei.iter().zip(&ej).map(|(a, b)| *a.max(b)).collect();
        let mi = SparsePoly::monomial(
            BigRational::one() / &ci,
            lcm.iter().zip(&ei).map(|(a, b)| a - b).collect(),
        );
        let mj = SparsePoly::monomial(
            BigRational::one() / &cj,
            lcm.iter().zip(&ej).map(|(a, b)| a - b).collect(),
        );
        let spoly = mi.mul(&basis[i].poly)?.sub(&mj.mul(&basis[j].poly)?)?;
        let (nf, cofs) = normal_form_tracked(&spoly, &basis, order, budget)?;
        if nf.is_zero() {
            continue;
        }
        // repr(nf) = mi*repr_i - mj*repr_j - sum cofs_k*repr_k
        let mut repr = vec![SparsePoly::zero(nvars); ngens];
        for t in 0..ngens {
            let mut v = mi.mul(&basis[i].repr[t])?.sub(&mj.mul(&basis[j].repr[t])?)?;
            for (k, c) in cofs.iter().enumerate() {
                v = v.sub(&c.mul(&basis[k].repr[t])?)?;
            }
            repr[t] = v;
        }
        let new_index = basis.len();
        basis.push(TrackedElem { poly: nf, repr });
        for k in 0..new_index {
            pairs.push((k, new_index));
        }
    }
    // Minimalize: drop elements whose leading term is divisible by another's.
    let mut keep = vec![true; basis.len()];
    let lts: Vec<Vec<u32>> = basis.iter().map(|e| leading_term(&e.poly, order).unwrap().0).collect();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            if i != j && keep[j] && divides(&lts[j], &lts[i]) && (lts[i] != lts[j] || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let mut minimal: Vec<TrackedElem> =
        basis.into_iter().zip(keep).filter_map(|(e, k)| k.then_some(e)).collect();
    // Tail-reduce each element by the others and normalize to primitive
    // integer form, scaling the representation consistently.
    for i in 0..minimal.len() {
        let others: Vec<TrackedElem> =
            minimal.iter().enumerate().filter_map(|(j, e)| (j != i).then(|| e.clone())).collect();
        let (nf, cofs) = normal_form_tracked(&minimal[i].poly, &others, order, budget)?;
        let mut repr = minimal[i].repr.clone();
        for t in 0..ngens {
            let mut v = repr[t].clone();
            for (k, c) in cofs.iter().enumerate() {
                v = v.sub(&c.mul(&others[k].repr[t])?)?;
            }
            repr[t] = v;
        }
        let (content, prim) = nf.content();
        let scale = content.recip();
        minimal[i] = TrackedElem {
            poly: prim,
            repr: repr.into_iter().map(|p| p.scale(&scale)).collect(),
        };
    }
    minimal.sort_by(|a, b| {
        order.cmp(
            &leading_term(&a.poly, order).unwrap().0,
            &leading_term(&b.poly, order).unwrap().0,
        )
    });
    Ok(minimal)
}

/// Compute a reduced Groebner basis of `b` under its own monomial order.
pub fn buchberger(b: &IdealBasis, budget_limit: u64) -> Result<IdealBasis> {
    let mut budget = StepBudget::new(budget_limit);
    let tracked = buchberger_tracked(&b.generators, b.monomial_order, &mut budget)?;
    Ok(IdealBasis {
        generators: tracked.into_iter().map(|e| e.poly).collect(),
        monomial_order: b.monomial_order,
        is_groebner: true,
    })
}

/// Outcome of a certified membership query.
#[derive(Debug, Clone)]
pub enum MembershipOutcome {
    /// f = sum cofactors[k] * generators[k] exactly.
    Member { cofactors: Vec<SparsePoly> },
    /// f is not in the ideal; the nonzero normal form witnesses it.
    NotMember { normal_form: SparsePoly },
}

/// Decide membership of `f` in the ideal of `b`, with exact cofactors over
/// the ORIGINAL generators of `b` on success.
pub fn membership_with_cofactors(
    f: &SparsePoly,
    b: &IdealBasis,
    budget_limit: u64,
) -> Result<MembershipOutcome> {
    let mut budget = StepBudget::new(budget_limit);
    let gb = buchberger_tracked(&b.generators, b.monomial_order, &mut budget)?;
    let (nf, cofs) = normal_form_tracked(f, &gb, b.monomial_order, &mut budget)?;
    if !nf.is_zero() {
        return Ok(MembershipOutcome::NotMember { normal_form: nf });
    }
    let ngens = b.generators.len();
    let nvars = f.nvars();
    let mut cofactors = vec![SparsePoly::zero(nvars); ngens];
    for (k, c) in cofs.iter().enumerate() {
        for t in 0..ngens {
            cofactors[t] = cofactors[t].add(&c.mul(&gb[k].repr[t])?)?;
        }
    }
    // Round-trip verification: the certificate must re-expand exactly.
    debug_assert!({
        let mut acc = SparsePoly::zero(nvars);
        for (t, g) in b.generators.iter().enumerate() {
            acc = acc.add(&cofactors[t].mul(g).unwrap()).unwrap();
        }
        acc == *f
    });
    Ok(MembershipOutcome::Member { cofactors })
}

/// True iff V(b) does not meet the locus {f_loc != 0}: checked by testing
/// whether 1 lies in the ideal generated by b together with 1 - z*f_loc in
/// one extra variable.
pub fn is_empty_on_chart(b: &IdealBasis, f_loc: &SparsePoly, budget_limit: u64) -> Result<bool> {
    let nvars = f_loc.nvars();
    if f_loc.is_zero() {
        return Err(Error::InvalidInput("localizing polynomial must be nonzero".into()));
    }
    let mut gens: Vec<SparsePoly> = b.generators.iter().map(|g| g.extend_nvars(nvars + 1)).collect();
    // 1 - z * f_loc with z the new last variable.
    let z = SparsePoly::var(nvars, nvars + 1);
    let rel = SparsePoly::one(nvars + 1).sub(&z.mul(&f_loc.extend_nvars(nvars + 1))?)?;
    gens.push(rel);
    let gb = buchberger(&IdealBasis::degrevlex(gens), budget_limit)?;
    Ok(gb.generators.iter().any(|g| g.is_constant()))
}

/// The rewriting certificate for one generator: g * f_loc^r =
/// sum_{|abar| = mu} h_abar * ubar^abar + sum_j h_j * u_X[j].
#[derive(Debug, Clone)]
pub struct GenRewrite {
    pub r: u32,
    /// (exponent vector over the centre parameters, coefficient).
    pub h_centre: Vec<(Vec<u32>, SparsePoly)>,
    /// One coefficient per ambient (X-cutting) parameter.
    pub h_ambient: Vec<SparsePoly>,
}

impl GenRewrite {
    /// The modified generator: the part of g*f^r lying in the mu-th power
    /// of the centre ideal, written as an explicit combination.
    pub fn modified_generator(&self, centre_params: &[SparsePoly]) -> Result<SparsePoly> {
        let nvars = centre_params.first().map_or(0, |p| p.nvars());
        let mut acc = SparsePoly::zero(nvars);
        for (abar, h) in &self.h_centre {
            let mut m = SparsePoly::one(nvars);
            for (j, &e) in abar.iter().enumerate() {
                m = m.mul(&centre_params[j].pow(e))?;
            }
            acc = acc.add(&h.mul(&m)?)?;
        }
        Ok(acc)
    }
}

/// Full certificate for a generator list, plus the degree-bound audit.
#[derive(Debug, Clone)]
pub struct RewriteCertificate {
    pub per_gen: Vec<GenRewrite>,
    /// Degree bound audited for r_i and coefficient degrees.
    pub degree_bound: BigInt,
    pub degree_bound_ok: bool,
}

/// Enumerate all exponent vectors of total degree exactly `total` in `k`
/// slots, in lexicographic order.
pub fn exponents_of_degree(k: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(k: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in (0..=total).rev() {
            prefix.push(v);
            rec(k - 1, total - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(k, total, &mut Vec::new(), &mut out);
    out
}

/// Rewrite each generator g_i as g_i * f_loc^{r_i} in the ideal generated
/// by the mu-th power of the centre parameters plus the ambient parameters.
/// Fails with an inadmissible-centre error when no r up to `r_cap` works.
pub fn rewrite_generators(
    gens: &[SparsePoly],
    centre_params: &[SparsePoly],
    ambient_params: &[SparsePoly],
    mu: u32,
    f_loc: &SparsePoly,
    r_cap: u32,
    budget_limit: u64,
) -> Result<RewriteCertificate> {
    let nvars = f_loc.nvars();
    let k = centre_params.len();
    let abars = exponents_of_degree(k, mu);
    let mut basis_gens: Vec<SparsePoly> = Vec::with_capacity(abars.len() + ambient_params.len());
    for abar in &abars {
        let mut m = SparsePoly::one(nvars);
        for (j, &e) in abar.iter().enumerate() {
            m = m.mul(&centre_params[j].pow(e))?;
        }
        basis_gens.push(m);
    }
    basis_gens.extend(ambient_params.iter().cloned());
    let basis = IdealBasis::degrevlex(basis_gens);

    let mut per_gen = Vec::with_capacity(gens.len());
    let mut observed_max_deg: u32 = 0;
    for g in gens {
        let mut found: Option<GenRewrite> = None;
        let mut target = g.clone();
        for r in 0..=r_cap {
            match membership_with_cofactors(&target, &basis, budget_limit)? {
                MembershipOutcome::Member { cofactors } => {
                    let h_centre = abars
                        .iter()
                        .cloned()
                        .zip(cofactors.iter().take(abars.len()).cloned())
                        .collect::<Vec<_>>();
                    let h_ambient = cofactors[abars.len()..].to_vec();
                    for h in cofactors.iter() {
                        if let Some(d) = h.degree().finite() {
                            observed_max_deg = observed_max_deg.max(d);
                        }
                    }
                    observed_max_deg = observed_max_deg.max(r);
                    found = Some(GenRewrite { r, h_centre, h_ambient });
                    break;
                }
                MembershipOutcome::NotMember { .. } => {
                    target = target.mul(f_loc)?;
                }
            }
        }
        match found {
            Some(gr) => per_gen.push(gr),
            None => {
                return Err(Error::InadmissibleCentre(format!(
                    "generator not in centre^{mu} + ambient ideal for any localizing power up to {r_cap}"
                )))
            }
        }
    }

    // Audit the coefficient-degree bound d*(2*d*mu)^(2^(n+1)).
    let d_in = gens
        .iter()
        .chain(centre_params)
        .chain(ambient_params)
        .chain(std::iter::once(f_loc))
        .filter_map(|p| p.degree().finite())
        .max()
        .unwrap_or(1)
        .max(1) as u64;
    let n = nvars as u32;
    let base = BigInt::from(2 * d_in * mu.max(1) as u64);
    let degree_bound = BigInt::from(d_in) * pow_bigint(&base, 1u64 << (n.min(24) + 1));
    let degree_bound_ok = BigInt::from(observed_max_deg) <= degree_bound;
    if !degree_bound_ok {
        return Err(Error::Internal(format!(
            "rewriting coefficient degree {observed_max_deg} exceeds the audited bound"
        )));
    }
    Ok(RewriteCertificate { per_gen, degree_bound, degree_bound_ok })
}

fn pow_bigint(base: &BigInt, exp: u64) -> BigInt {
    let mut acc = BigInt::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    acc
}

/// Largest k such that the (k-1)-st full derivative ideal of `gens` (all
/// first partials adjoined, iterated), together with the ambient equations
/// `x_eqns`, still vanishes somewhere on {f_loc != 0}. Convention: 0 when
/// the cosupport is already empty (unit ideal included).
pub fn max_order_on_cosupport(
    gens: &[SparsePoly],
    x_eqns: &[SparsePoly],
    f_loc: &SparsePoly,
    cap: u32,
    budget_limit: u64,
) -> Result<u32> {
    let nvars = f_loc.nvars();
    if gens.iter().all(|g| g.is_zero()) {
        return Err(Error::InvalidInput("max_order_on_cosupport needs a nonzero generator".into()));
    }
    let mut current: Vec<SparsePoly> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    let mut k = 0u32;
    loop {
        let mut test = current.clone();
        test.extend(x_eqns.iter().cloned());
        let basis = IdealBasis::degrevlex(test);
        if is_empty_on_chart(&basis, f_loc, budget_limit)? {
            return Ok(k);
        }
        k += 1;
        if k > cap {
            return Err(Error::BudgetExceeded { what: "derivative-ideal order cap", budget: cap as u64 });
        }
        let mut next = current.clone();
        for g in &current {
            for j in 0..nvars {
                let d = g.partial(j);
                if !d.is_zero() {
                    next.push(d);
                }
            }
        }
        current = next;
    }
}

/// Test whether two generator lists span the same ideal, by mutual normal
/// forms against each other's Groebner bases.
pub fn ideal_equal(
    a: &[SparsePoly],
    b: &[SparsePoly],
    budget_limit: u64,
) -> Result<bool> {
    let ba = IdealBasis::degrevlex(a.to_vec());
    let bb = IdealBasis::degrevlex(b.to_vec());
    for g in b {
        match membership_with_cofactors(g, &ba, budget_limit)? {
            MembershipOutcome::Member { .. } => {}
            MembershipOutcome::NotMember { .. } => return Ok(false),
        }
    }
    for g in a {
        match membership_with_cofactors(g, &bb, budget_limit)? {
            MembershipOutcome::Member { .. } => {}
            MembershipOutcome::NotMember { .. } => return Ok(false),
        }
    }
    Ok(true)
}

/// Max order of a single polynomial over a rational-point grid: a lower
/// bound used as an independent oracle in tests.
pub fn grid_order_lower_bound(p: &SparsePoly, radius: i64) -> Result<ExtNat> {
    let mut best = ExtNat::Finite(0);
    let nvars = p.nvars();
    let coords: Vec<i64> = (-radius..=radius).collect();
    let mut idx = vec![0usize; nvars];
    loop {
        let point: Vec<BigRational> =
            idx.iter().map(|&i| BigRational::from(BigInt::from(coords[i]))).collect();
        let o = p.order_at_point(&point)?;
        if o > best {
            best = o;
        }
        // advance odometer
        let mut j = 0;
        loop {
            if j == nvars {
                return Ok(best);
            }
            idx[j] += 1;
            if idx[j] < coords.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}
