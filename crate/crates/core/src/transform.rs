//! Chart-wise blowing up: new affine charts, blow-up equations,
//! exceptional-divisor bookkeeping, strict transform of X, controlled
//! transform of the ideal, and transition maps between the new charts.
//!
//! The i0-chart of the blow-up of K^n along a centre cut by parameters
//! u_1..u_{n-k} (the first n-m cutting X) is a closed subset of K^{2n-k}
//! with equations
//!
//!   u_j - u_{i0} * x_{j+n} = 0   (j != i0),
//!   u_{i0} - x_{i0+n} = 0,
//!
//! the exceptional divisor being the coordinate x_{i0+n}. Charts with
//! i0 <= n-m have empty strict transform of X and are dropped. The
//! controlled transform divides the pullback of each (modified) generator
//! by the mu-th power of the exceptional coordinate; divisibility is
//! syntactically evident on the modified generators produced by the
//! rewriting certificate.

use crate::audit;
use crate::chart::{AffineMarkedIdeal, Chart, ChartIndexMaps, DivisorEntry, TransitionMap};
use crate::error::{Error, Result};
use crate::groebner::{self, RewriteCertificate};
use crate::invariant::InvariantVector;
use crate::poly::{RationalMapEntry, SparsePoly};

/// Default cap on the localizing exponent searched by generator rewriting.
pub const DEFAULT_R_CAP: u32 = 16;

/// The centre of one blow-up, described chart by chart.
#[derive(Debug, Clone)]
pub struct ChartCentre {
    pub chart_index: usize,
    /// Parameters u_1..u_{n-k}: the first (n-m) cut out X, the rest cut
    /// the centre inside X.
    pub params: Vec<SparsePoly>,
    /// Extra localizing polynomial carving the subcover neighbourhood out
    /// of the chart's U (1 when no shrinking is needed).
    pub subcover: SparsePoly,
}

/// A full centre specification: one entry per chart the centre meets.
/// Charts not listed pass through the blow-up unchanged.
#[derive(Debug, Clone, Default)]
pub struct CentreSpec {
    pub per_chart: Vec<ChartCentre>,
}

/// One entry of the resolution history.
#[derive(Debug, Clone)]
pub struct BlowupRecord {
    pub year: u32,
    pub centre: CentreSpec,
    /// parent chart id -> ids of the children it produced.
    pub children: Vec<(String, Vec<String>)>,
    /// Invariant value at the centre, when the driver computed one.
    pub invariant: Option<InvariantVector>,
    /// Step label recorded by the driver (empty for raw transforms).
    pub step: String,
}

/// Controlled transform of a generator list under an explicit coordinate
/// substitution: pull back each generator and divide exactly by the
/// exceptional coordinate to the power mu. A divisibility failure means
/// the centre was not inside the cosupport.
pub fn controlled_transform(
    gens: &[SparsePoly],
    mu: u32,
    exc_index: usize,
    substitution: &[SparsePoly],
) -> Result<Vec<SparsePoly>> {
    let out_nvars = substitution.first().map_or(0, |p| p.nvars());
    let exc_pow = SparsePoly::var(exc_index, out_nvars).pow(mu);
    let mut out = Vec::with_capacity(gens.len());
    for g in gens {
        let pullback = g.substitute_polys(substitution)?;
        if pullback.is_zero() {
            out.push(pullback);
            continue;
        }
        let quotient = pullback.exact_div(&exc_pow).map_err(|_| {
            Error::InadmissibleCentre(format!(
                "pullback of generator not divisible by exceptional^{mu}"
            ))
        })?;
        // Exactness: re-multiplying must reproduce the pullback.
        debug_assert_eq!(quotient.mul(&exc_pow).unwrap(), pullback);
        out.push(quotient);
    }
    Ok(out)
}

/// Update the divisor list for the i0-chart of a blow-up: divisors whose
/// coordinate appears among the centre parameters are converted to their
/// x_{j+n} avatar; the fresh exceptional divisor is appended LAST.
pub fn update_divisors(
    e_list: &[DivisorEntry],
    centre_params: &[SparsePoly],
    i0: usize,
    n: usize,
    birth: u32,
) -> Vec<DivisorEntry> {
    let mut out = Vec::with_capacity(e_list.len() + 1);
    for e in e_list {
        let coord = SparsePoly::var(e.var, n);
        let as_param = centre_params.iter().position(|u| *u == coord);
        match as_param {
            Some(j) if j != i0 => out.push(DivisorEntry { var: n + j, birth: e.birth }),
            // The i0 parameter itself becomes the new exceptional
            // coordinate; as an old divisor it coincides with it and keeps
            // its identity at x_{i0+n}.
            Some(j) => out.push(DivisorEntry { var: n + j, birth: e.birth }),
            None => out.push(*e),
        }
    }
    out.push(DivisorEntry { var: n + i0, birth });
    out
}

/// Blow up a single chart in its i0-chart (0-based index into the centre
/// parameters). Returns None when the strict transform of X is empty there
/// (i0 pointing at an X-cutting parameter).
pub fn blowup_chart(
    c: &Chart,
    centre: &ChartCentre,
    i0: usize,
    mu: u32,
    birth: u32,
    r_cap: u32,
    budget: u64,
) -> Result<Option<Chart>> {
    let n = c.nvars;
    let nk = centre.params.len();
    if i0 >= nk {
        return Err(Error::InvalidInput(format!("i0 = {i0} out of range for {nk} parameters")));
    }
    let k = n - nk;
    if k > c.dim_x() {
        return Err(Error::InadmissibleCentre(format!(
            "centre dimension {k} exceeds dim X = {}",
            c.dim_x()
        )));
    }
    let n_xe = c.num_x_eqns;
    if i0 < n_xe {
        // The strict transform of X is empty in this chart.
        return Ok(None);
    }
    let np = 2 * n - k;
    let ext = |p: &SparsePoly| p.extend_nvars(np);

    // Blow-up relations (all become X'-cutting equations together with the
    // strict-transform equations x_{j+n} = 0 for the X-cutting parameters).
    let mut x_eqns: Vec<SparsePoly> = Vec::new();
    let u_i0 = ext(&centre.params[i0]);
    for (j, u) in centre.params.iter().enumerate() {
        if j == i0 {
            // u_{i0} - x_{i0+n}
            x_eqns.push(u_i0.sub(&SparsePoly::var(n + i0, np))?);
        } else {
            // u_j - u_{i0} * x_{j+n}
            x_eqns.push(ext(u).sub(&u_i0.mul(&SparsePoly::var(n + j, np))?)?);
        }
    }
    for j in 0..n_xe {
        // Strict transform of X: the tilted X-cutting directions vanish.
        x_eqns.push(SparsePoly::var(n + j, np));
    }
    let num_x_eqns = x_eqns.len();
    debug_assert_eq!(num_x_eqns, np - c.dim_x());

    // Rewrite the generators over the centre so the controlled transform is
    // a syntactic division.
    let inner_centre = &centre.params[n_xe..];
    let f_total = c.f_loc.mul(&centre.subcover)?;
    let cert: RewriteCertificate = groebner::rewrite_generators(
        &c.gens,
        inner_centre,
        &centre.params[..n_xe],
        mu,
        &f_total,
        r_cap,
        budget,
    )?;

    // Transform: u_j |-> x_{i0+n} * x_{j+n} (j != i0), u_{i0} |-> x_{i0+n};
    // each modified generator's pullback carries x_{i0+n}^mu, which cancels
    // against the controlled division, leaving sum h_abar * prod x_{j+n}^a_j.
    let mut gens = Vec::with_capacity(c.gens.len());
    for gr in &cert.per_gen {
        let mut acc = SparsePoly::zero(np);
        for (abar, h) in &gr.h_centre {
            let mut m = ext(h);
            for (jj, &e) in abar.iter().enumerate() {
                let j = n_xe + jj; // position among the full centre parameters
                if j != i0 {
                    m = m.mul(&SparsePoly::var(n + j, np).pow(e))?;
                }
            }
            acc = acc.add(&m)?;
        }
        gens.push(acc);
    }

    // Divisors: convert parameters that were coordinates, append the new
    // exceptional divisor last.
    let e_list = update_divisors(&c.e_list, &centre.params, i0, n, birth);

    // Complete the parameter system with m coordinates along X'; fall back
    // through candidate coordinate sets until the Jacobian is nondegenerate.
    let mut params_u = x_eqns.clone();
    let dim = c.dim_x();
    let mut completion: Vec<SparsePoly> = Vec::new();
    for cand in 0..np {
        if completion.len() == dim {
            break;
        }
        let v = SparsePoly::var(cand, np);
        let mut trial = params_u.clone();
        trial.extend(completion.iter().cloned());
        trial.push(v.clone());
        // Quick necessary check: candidate must be independent so far; the
        // final determinant check below is authoritative.
        completion.push(v);
        let probe = Chart {
            alpha: c.alpha,
            beta: c.beta,
            nvars: np,
            f_loc: SparsePoly::one(np),
            params_u: pad_params(&x_eqns, &completion, np),
            num_x_eqns,
            e_list: Vec::new(),
            gens: Vec::new(),
        };
        if probe.params_u.len() == np && crate::chart::param_jacobian_det(&probe)?.is_zero() {
            completion.pop();
        }
    }
    params_u.extend(completion);
    if params_u.len() != np {
        return Err(Error::Internal("could not complete the parameter system".into()));
    }

    let f_loc = ext(&f_total);
    let child = Chart {
        alpha: c.alpha * 16 + i0 as u32 + 1,
        beta: c.beta,
        nvars: np,
        f_loc,
        params_u,
        num_x_eqns,
        e_list,
        gens,
    };
    Ok(Some(child))
}

fn pad_params(x_eqns: &[SparsePoly], completion: &[SparsePoly], np: usize) -> Vec<SparsePoly> {
    let mut v: Vec<SparsePoly> = x_eqns.to_vec();
    v.extend(completion.iter().cloned());
    // Pad with distinct coordinates just for a well-formed probe; only used
    // when the system is full-size anyway.
    let mut j = 0;
    while v.len() < np {
        v.push(SparsePoly::var(j % np, np));
        j += 1;
    }
    v
}

/// Blow up the whole collection along a centre. Produces children for each
/// (chart, i0) pair with nonempty strict transform, pass-through copies of
/// charts the centre does not meet, transitions among siblings, and the
/// extended history. Returns the new object plus the chart map onto the
/// input (for the defined-over relation).
pub fn blowup_affine_marked_ideal(
    t: &AffineMarkedIdeal,
    centre: &CentreSpec,
    r_cap: u32,
    budget: u64,
) -> Result<(AffineMarkedIdeal, ChartIndexMaps)> {
    if centre.per_chart.is_empty() {
        return Ok((t.clone(), ChartIndexMaps::identity(t.charts.len())));
    }
    let year = t.history.len() as u32 + 1;
    let before = crate::chart::compute_data_vector(t);

    let mut charts: Vec<Chart> = Vec::new();
    let mut chart_map: Vec<usize> = Vec::new();
    let mut transitions: Vec<TransitionMap> = Vec::new();
    let mut children: Vec<(String, Vec<String>)> = Vec::new();

    for (pi, parent) in t.charts.iter().enumerate() {
        let cc = centre.per_chart.iter().find(|c| c.chart_index == pi);
        match cc {
            None => {
                chart_map.push(pi);
                charts.push(parent.clone());
                children.push((parent.id(), vec![parent.id()]));
            }
            Some(cc) => {
                let n = parent.nvars;
                let nk = cc.params.len();
                let mut sibling_ids: Vec<usize> = Vec::new();
                let mut ids = Vec::new();
                for i0 in 0..nk {
                    if let Some(child) = blowup_chart(parent, cc, i0, t.mu, year, r_cap, budget)? {
                        ids.push(child.id());
                        sibling_ids.push(charts.len());
                        chart_map.push(pi);
                        charts.push(child);
                    }
                }
                children.push((parent.id(), ids));
                // Transitions among siblings: first n coordinates agree; the
                // tilted coordinates transform by
                //   y_{j+n} = x_{j+n}/x_{i1+n} (j != i1),  y_{i1+n} = x_{i0+n}*x_{i1+n}.
                for (a_pos, &ia) in sibling_ids.iter().enumerate() {
                    for &ib in sibling_ids.iter().skip(a_pos + 1) {
                        let (i0, i1) = (
                            tilt_index(&charts[ia], n),
                            tilt_index(&charts[ib], n),
                        );
                        transitions.push(sibling_transition(ia, ib, n, nk, i0, i1)?);
                        transitions.push(sibling_transition(ib, ia, n, nk, i1, i0)?);
                    }
                }
            }
        }
    }

    let history = {
        let mut h = t.history.clone();
        h.push(BlowupRecord {
            year,
            centre: centre.clone(),
            children,
            invariant: None,
            step: String::new(),
        });
        h
    };
    let out = AffineMarkedIdeal { charts, transitions, mu: t.mu, history };

    // Audit the per-blow-up growth laws.
    let after = crate::chart::compute_data_vector(&out);
    audit::record_blowup(&before, &after);

    Ok((out, ChartIndexMaps { chart_map }))
}

/// Recover which parameter index the chart's exceptional coordinate came
/// from: the last divisor entry is x_{n + i0}.
fn tilt_index(c: &Chart, n: usize) -> usize {
    c.e_list.last().map(|e| e.var - n).unwrap_or(0)
}

fn sibling_transition(
    src: usize,
    dst: usize,
    n: usize,
    nk: usize,
    i0: usize,
    i1: usize,
) -> Result<TransitionMap> {
    let np = 2 * n - (n - nk); // = n + nk
    let one = SparsePoly::one(np);
    let mut entries = Vec::with_capacity(np);
    for j in 0..n {
        entries.push(RationalMapEntry::polynomial(SparsePoly::var(j, np)));
    }
    for j in 0..nk {
        if j == i1 {
            entries.push(RationalMapEntry::polynomial(
                SparsePoly::var(n + i0, np).mul(&SparsePoly::var(n + i1, np))?,
            ));
        } else {
            entries.push(RationalMapEntry {
                numerator: SparsePoly::var(n + j, np),
                denominator: SparsePoly::var(n + i1, np),
            });
        }
    }
    let _ = one;
    Ok(TransitionMap { source: src, target: dst, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{compute_data_vector, is_defined_over};
    use crate::groebner::DEFAULT_BUDGET;
    use num_bigint::BigInt;

    fn p(s: &str, nvars: usize) -> SparsePoly {
        SparsePoly::parse(s, nvars).unwrap()
    }

    fn cusp() -> AffineMarkedIdeal {
        AffineMarkedIdeal::single(Chart::plane(2, vec![p("x2^2 - x1^3", 2)]), 1)
    }

    fn origin_centre(nvars: usize) -> ChartCentre {
        ChartCentre {
            chart_index: 0,
            params: (0..nvars).map(|j| SparsePoly::var(j, nvars)).collect(),
            subcover: SparsePoly::one(nvars),
        }
    }

    #[test]
    fn blowup_chart_cusp_origin() {
        let t = cusp();
        let cc = origin_centre(2);
        // i0 = 0: the x-parameter chart. K^4, relations x2 - x1*x4 and
        // x1 - x3; exceptional coordinate x3 (0-based index 2).
        let child = blowup_chart(&t.charts[0], &cc, 0, 1, 1, 4, DEFAULT_BUDGET)
            .unwrap()
            .unwrap();
        assert_eq!(child.nvars, 4);
        assert_eq!(child.num_x_eqns, 2);
        assert!(child.x_eqns().contains(&p("x1 - x3", 4)));
        assert!(child.x_eqns().contains(&p("x2 - x1*x4", 4)));
        assert_eq!(child.e_list.len(), 1);
        assert_eq!(child.e_list[0], DivisorEntry { var: 2, birth: 1 });
    }

    #[test]
    fn blowup_chart_empty_when_i0_cuts_x() {
        // X = V(x1) inside the plane, centre = origin of X.
        let chart = Chart {
            alpha: 0,
            beta: 0,
            nvars: 2,
            f_loc: SparsePoly::one(2),
            params_u: vec![p("x1", 2), p("x2", 2)],
            num_x_eqns: 1,
            e_list: vec![],
            gens: vec![p("x2", 2)],
        };
        let cc = ChartCentre {
            chart_index: 0,
            params: vec![p("x1", 2), p("x2", 2)],
            subcover: SparsePoly::one(2),
        };
        let none = blowup_chart(&chart, &cc, 0, 1, 1, 4, DEFAULT_BUDGET).unwrap();
        assert!(none.is_none());
        let some = blowup_chart(&chart, &cc, 1, 1, 1, 4, DEFAULT_BUDGET).unwrap();
        assert!(some.is_some());
    }

    #[test]
    fn controlled_transform_cusp_examples() {
        let gens = vec![p("x2^2 - x1^3", 2)];
        // x-chart substitution of the intrinsic origin blow-up: x->x, y->x*y.
        let sub = vec![p("x1", 2), p("x1*x2", 2)];
        // mu = 2: (x^2 y^2 - x^3)/x^2 = y^2 - x.
        let out2 = controlled_transform(&gens, 2, 0, &sub).unwrap();
        assert_eq!(out2, vec![p("x2^2 - x1", 2)]);
        // mu = 1: divide once, x*(y^2 - x).
        let out1 = controlled_transform(&gens, 1, 0, &sub).unwrap();
        assert_eq!(out1, vec![p("x1*x2^2 - x1^2", 2)]);
        // Order deficit: x pulls back to x, order 1 < 2.
        let err = controlled_transform(&[p("x1", 2)], 2, 0, &sub);
        assert!(matches!(err, Err(Error::InadmissibleCentre(_))));
    }

    #[test]
    fn update_divisors_rules() {
        let n = 2;
        let e = vec![DivisorEntry { var: 1, birth: 3 }];
        // Divisor not among centre parameters: unchanged, new entry last.
        let centre = vec![p("x1", 2)];
        let out = update_divisors(&e, &centre, 0, n, 7);
        assert_eq!(out, vec![
            DivisorEntry { var: 1, birth: 3 },
            DivisorEntry { var: 2, birth: 7 },
        ]);
        // Divisor among centre parameters: replaced by its x_{j+n} avatar.
        let centre2 = vec![p("x1", 2), p("x2", 2)];
        let out2 = update_divisors(&e, &centre2, 0, n, 7);
        assert_eq!(out2, vec![
            DivisorEntry { var: 3, birth: 3 },
            DivisorEntry { var: 2, birth: 7 },
        ]);
        // Exactly one new entry per blow-up.
        assert_eq!(out.len(), e.len() + 1);
    }

    #[test]
    fn blowup_collection_cusp() {
        let t = cusp();
        let centre = CentreSpec { per_chart: vec![origin_centre(2)] };
        let (out, maps) = blowup_affine_marked_ideal(&t, &centre, 4, DEFAULT_BUDGET).unwrap();
        // Two nonempty charts.
        assert_eq!(out.charts.len(), 2);
        assert_eq!(out.history.len(), 1);
        // Data growth within the single-step law.
        let before = compute_data_vector(&t);
        let after = compute_data_vector(&out);
        assert_eq!(after.r, before.r + 1);
        assert!(after.n <= 2 * before.n);
        assert_eq!(after.m, before.m);
        assert!(after.l <= before.l + before.n);
        assert!(after.q <= before.n * before.q);
        assert_eq!(after.mu, before.mu);
        let g_bound = BigInt::from(2 * before.d * before.mu)
            .pow(2u32.pow(before.n as u32 + 2));
        assert!(BigInt::from(after.d) <= g_bound);
        // Defined over the input.
        assert!(is_defined_over(&out, &t, &maps, 10, 0).unwrap());
    }

    #[test]
    fn blowup_empty_centre_is_identity() {
        let t = cusp();
        let (out, _) = blowup_affine_marked_ideal(&t, &CentreSpec::default(), 4, DEFAULT_BUDGET)
            .unwrap();
        assert_eq!(out.charts.len(), 1);
        assert!(out.history.is_empty());
    }

    #[test]
    fn blowup_centre_equals_x_leaves_nothing() {
        // Zero ideal on X = V(x1): blow up with centre X itself (k = m).
        let chart = Chart {
            alpha: 0,
            beta: 0,
            nvars: 2,
            f_loc: SparsePoly::one(2),
            params_u: vec![p("x1", 2), p("x2", 2)],
            num_x_eqns: 1,
            e_list: vec![],
            gens: vec![],
        };
        let t = AffineMarkedIdeal::single(chart, 1);
        let centre = CentreSpec {
            per_chart: vec![ChartCentre {
                chart_index: 0,
                params: vec![p("x1", 2)],
                subcover: SparsePoly::one(2),
            }],
        };
        let (out, _) = blowup_affine_marked_ideal(&t, &centre, 4, DEFAULT_BUDGET).unwrap();
        assert!(out.charts.is_empty());
    }

    #[test]
    fn cusp_blowup_gens_match_intrinsic_form() {
        // In the x-chart of the origin blow-up with mu = 1, the transformed
        // generator evaluated through the chart relations must match the
        // intrinsic substitution x->x, y->x*y divided once by x.
        let t = cusp();
        let cc = origin_centre(2);
        let child = blowup_chart(&t.charts[0], &cc, 0, 1, 1, 4, DEFAULT_BUDGET)
            .unwrap()
            .unwrap();
        assert_eq!(child.gens.len(), 1);
        // Substitute the chart relations x1 = x3, x2 = x1*x4 = x3*x4 into
        // the transformed generator and compare with x*(y^2 - x) under
        // x -> x3, y -> x4.
        let sub = vec![p("x3", 4), p("x3*x4", 4), p("x3", 4), p("x4", 4)];
        let reduced = child.gens[0].substitute_polys(&sub).unwrap();
        let intrinsic = p("x3*x4^2 - x3^2", 4);
        assert_eq!(reduced, intrinsic);
    }
}
