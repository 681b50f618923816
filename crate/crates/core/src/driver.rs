//! The resolution driver: the per-year loop that inspects every chart,
//! selects a centre (combinatorially in the monomial case, by
//! maximal-contact descent otherwise), blows up, and repeats until every
//! chart has empty cosupport.
//!
//! Charts are kept ambient-dimension-preserving: blowing up a coordinate
//! subspace {x_k = 0 : k in K} produces one child per k0 in K with the
//! substitution x_j -> x_{k0} * x_j (j in K \ {k0}) and the exceptional
//! divisor at coordinate x_{k0}. Centres through translated points
//! {x_k = c} are handled by an affine coordinate change; when that change
//! would make an existing boundary divisor non-coordinate, the chart is
//! split: the divisor (which is disjoint from the centre) is removed by
//! shrinking the localization and a sibling chart covering the divisor
//! side passes through the blow-up unchanged.
//!
//! Smooth codimension-one centres that are not coordinate subspaces (for
//! example V(1 - x^3 y) arising in a blow-up chart) act by exact division
//! of the generators; the divisor is recorded separately since it is not a
//! coordinate hyperplane.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audit;
use crate::chart::{
    compute_data_vector, sample_points, AffineMarkedIdeal, Chart, DivisorEntry,
};
use crate::error::{Error, Result};
use crate::groebner::{self, IdealBasis};
use crate::invariant::{
    self, compare_inv, count_e_through, maximal_contact_candidates, monomial_j,
    monomial_residual_split, mu_at, residual_order_at, ExtRat, InvEntry, InvariantVector,
    MarkedIdealLocal,
};
use crate::poly::{Degree, Point, SparsePoly};
use crate::transform::{controlled_transform, BlowupRecord, CentreSpec, ChartCentre};

type Rat = Ratio<i64>;

/// Options steering a resolution run.
#[derive(Debug, Clone)]
pub struct ResolveOptions {
    /// Abort with a year-limit error after this many blow-up years.
    pub year_limit: u32,
    /// Groebner step budget shared by all ideal oracles.
    pub budget: u64,
    /// Seed for the deterministic sample-point generator.
    pub seed: u64,
    /// Invariant samples per centre and year (0 disables the sampling).
    pub monotonicity_samples: u32,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions {
            year_limit: 200,
            budget: groebner::DEFAULT_BUDGET,
            seed: 0,
            monotonicity_samples: 0,
        }
    }
}

/// What one chart did in one year.
#[derive(Debug, Clone)]
pub struct ChartAction {
    pub chart_id: String,
    /// "base", "zero", "I-A", "I-B", "IIA", "IIB", or "done".
    pub step: String,
    /// Human-readable centre description.
    pub centre: String,
    pub children: Vec<String>,
}

/// One year of the run.
#[derive(Debug, Clone)]
pub struct YearSummary {
    pub year: u32,
    pub actions: Vec<ChartAction>,
}

/// Aggregate statistics of a run.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub years: u32,
    pub blowups: u64,
    pub peak_charts: usize,
    pub monotonicity_checks: u64,
    pub monotonicity_violations: u64,
}

/// The full outcome: the per-year transcript, the final (resolved) state
/// and run statistics.
#[derive(Debug, Clone)]
pub struct ResolutionTree {
    pub years: Vec<YearSummary>,
    pub final_state: AffineMarkedIdeal,
    pub stats: RunStats,
    /// Charts whose cosupport emptied, in retirement order, with their
    /// final boundary data (for structural checks on the ending state).
    pub retired: Vec<DriverChart>,
}

/// A chart plus driver-local bookkeeping.
#[derive(Debug, Clone)]
pub struct DriverChart {
    pub chart: Chart,
    /// Exceptional divisors not representable as coordinate hyperplanes.
    pub extra_divisors: Vec<SparsePoly>,
    /// Divisors born in or before this year count towards the boundary
    /// combinatorics; later ones are absorbed into the monomial part.
    pub mark: u32,
    /// Most recent chart-level residual order (numerator, denominator);
    /// None = not yet attained (treated as +infinity).
    pub last_nu: Option<Rat>,
}

/// A marked generator list with its own control, used through the descent.
#[derive(Debug, Clone)]
struct Piece {
    gens: Vec<SparsePoly>,
    control: u32,
}

/// One level of the descent, kept for pointwise invariant evaluation: the
/// contact hypersurface solved as x_k = v, and the restricted pieces that
/// the next level works on.
#[derive(Debug, Clone)]
struct ChainLevel {
    u: SparsePoly,
    pieces: Vec<Piece>,
}

#[derive(Debug, Clone)]
struct Chain {
    levels: Vec<ChainLevel>,
}

#[derive(Debug, Clone)]
enum Action {
    /// Cosupport already empty: drop the chart.
    Done,
    /// Zero ideal: blow up with centre the whole chart, then drop it.
    WholeChart,
    /// Monomial case: blow up the coordinate subspace on these variables.
    Monomial { vars: Vec<usize> },
    /// Smooth non-coordinate hypersurface centre: divide by g^mu in place.
    Hypersurface { g: SparsePoly },
    /// Centre {x_k = c_k} from the maximal-contact descent.
    Centre { solved: Vec<(usize, SparsePoly)> },
}

#[derive(Debug, Clone)]
struct Analysis {
    step: String,
    action: Action,
    /// Chart-level residual order normalized by the control.
    top_nu: Option<Rat>,
    /// Effective boundary mark for this year: reset when the residual
    /// order drops, inherited otherwise.
    mark: u32,
    chain: Option<Chain>,
}

// ---------------------------------------------------------------------------
// small ideal-theoretic helpers
// ---------------------------------------------------------------------------

/// All iterated partials of the generators of order < depth (the defining
/// equations of {every generator has order >= depth}).
fn derivative_closure(gens: &[SparsePoly], depth: u32) -> Vec<SparsePoly> {
    let mut all: Vec<SparsePoly> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    let nvars = all.first().map_or(0, |g| g.nvars());
    let mut frontier = all.clone();
    for _ in 1..depth {
        let mut next: Vec<SparsePoly> = Vec::new();
        for g in &frontier {
            for j in 0..nvars {
                let d = g.partial(j);
                if !d.is_zero() {
                    next.push(d);
                }
            }
        }
        next.sort();
        next.dedup();
        if next.is_empty() {
            break;
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all.sort();
    all.dedup();
    all
}

fn empty_on(polys: &[SparsePoly], f_loc: &SparsePoly, budget: u64) -> Result<bool> {
    let nz: Vec<SparsePoly> = polys.iter().filter(|p| !p.is_zero()).cloned().collect();
    if nz.is_empty() {
        // The zero ideal vanishes everywhere; U is nonempty.
        return Ok(false);
    }
    groebner::is_empty_on_chart(&IdealBasis::degrevlex(nz), f_loc, budget)
}

fn pieces_cosupp(pieces: &[Piece]) -> Vec<SparsePoly> {
    let mut out = Vec::new();
    for p in pieces {
        out.extend(derivative_closure(&p.gens, p.control));
    }
    out.sort();
    out.dedup();
    out
}

fn max_degree(gens: &[SparsePoly]) -> u32 {
    gens.iter().filter_map(|g| g.degree().finite()).max().unwrap_or(0)
}

fn ceil_times(r: Rat, c: u32) -> u32 {
    (r * Rat::from_integer(c as i64)).ceil().to_integer() as u32
}

/// Defining equations of {min_j ord/control_j >= r}.
fn locus_at(pieces: &[Piece], r: Rat) -> Vec<SparsePoly> {
    let mut out = Vec::new();
    for p in pieces {
        out.extend(derivative_closure(&p.gens, ceil_times(r, p.control)));
    }
    out.sort();
    out.dedup();
    out
}

enum MaxOrder {
    /// Every piece is the zero ideal.
    Infinite,
    /// The pieces' joint cosupport is empty.
    Empty,
    Value(Rat),
}

/// Largest r such that {min-normalized order >= r} is nonempty on U.
fn max_norm_order(pieces: &[Piece], f_loc: &SparsePoly, budget: u64) -> Result<MaxOrder> {
    let live: Vec<&Piece> = pieces.iter().filter(|p| p.gens.iter().any(|g| !g.is_zero())).collect();
    if live.is_empty() {
        return Ok(MaxOrder::Infinite);
    }
    let owned: Vec<Piece> = live.iter().map(|p| (*p).clone()).collect();
    if empty_on(&pieces_cosupp(&owned), f_loc, budget)? {
        return Ok(MaxOrder::Empty);
    }
    // Candidate values t/control per piece, bounded by each piece's degree.
    let mut cands: Vec<Rat> = Vec::new();
    let ub = owned
        .iter()
        .map(|p| Rat::new(max_degree(&p.gens) as i64, p.control as i64))
        .min()
        .unwrap_or_else(Rat::one);
    for p in &owned {
        let cap = max_degree(&p.gens);
        for t in p.control..=cap {
            let r = Rat::new(t as i64, p.control as i64);
            if r >= Rat::one() && r <= ub {
                cands.push(r);
            }
        }
    }
    cands.push(Rat::one());
    cands.sort();
    cands.dedup();
    for r in cands.into_iter().rev() {
        if !empty_on(&locus_at(&owned, r), f_loc, budget)? {
            return Ok(MaxOrder::Value(r));
        }
    }
    Err(Error::Internal("order maximization found no value despite nonempty cosupport".into()))
}

/// Solve u = c * x_k + h with c a nonzero constant and h free of x_k;
/// returns (k, -h/c).
fn solve_linear(u: &SparsePoly) -> Option<(usize, SparsePoly)> {
    let nvars = u.nvars();
    for k in 0..nvars {
        if u.degree_in(k) != Degree::Finite(1) {
            continue;
        }
        let c = u.partial(k);
        if !c.is_constant() || c.is_zero() {
            continue;
        }
        let cval = c.eval(&vec![BigRational::zero(); nvars]).ok()?;
        let xk = SparsePoly::var(k, nvars);
        let h = u.sub(&xk.scale(&cval)).ok()?;
        if h.terms().any(|(e, _)| e[k] != 0) {
            continue;
        }
        let v = h.scale(&(-cval.recip()));
        return Some((k, v));
    }
    None
}

fn subst_var(p: &SparsePoly, k: usize, v: &SparsePoly) -> Result<SparsePoly> {
    let nvars = p.nvars();
    let map: Vec<SparsePoly> =
        (0..nvars).map(|j| if j == k { v.clone() } else { SparsePoly::var(j, nvars) }).collect();
    p.substitute_polys(&map)
}

/// Coefficient-style restriction of marked pieces to {x_k = v}: each piece
/// (gens, c) attaining normalized order r contributes the derivative levels
/// (D^i gens restricted, t-i) for i < t with t = ceil(r*c), the integer
/// order actually attained on the piece.
fn restrict_pieces(pieces: &[Piece], k: usize, v: &SparsePoly, r: Rat) -> Result<Vec<Piece>> {
    let mut out = Vec::new();
    for p in pieces {
        let mut level: Vec<SparsePoly> =
            p.gens.iter().filter(|g| !g.is_zero()).cloned().collect();
        let nvars = level.first().map_or(0, |g| g.nvars());
        let target = ceil_times(r, p.control);
        for i in 0..target {
            let mut restricted: Vec<SparsePoly> = Vec::new();
            for g in &level {
                let r = subst_var(g, k, v)?;
                if !r.is_zero() {
                    restricted.push(r);
                }
            }
            restricted.sort();
            restricted.dedup();
            if !restricted.is_empty() {
                out.push(Piece { gens: restricted, control: target - i });
            }
            if i + 1 < target {
                let mut next = level.clone();
                for g in &level {
                    for j in 0..nvars {
                        let d = g.partial(j);
                        if !d.is_zero() {
                            next.push(d);
                        }
                    }
                }
                next.sort();
                next.dedup();
                level = next;
            }
        }
    }
    Ok(out)
}

/// Factor the common boundary-monomial content M out of each piece so the
/// orders seen by the descent are residual orders. A piece (M*R, c) becomes
/// - (R, c) when the residual alone still attains order c somewhere,
/// - (R, t) plus (M, c - t) when the residual only attains order t < c
///   (companion-style: the monomial fills the remaining control),
/// - the original piece when the residual is a unit or never vanishes.
fn strip_divisor_content(
    pieces: &mut Vec<Piece>,
    divisor_vars: &[usize],
    f_loc: &SparsePoly,
    budget: u64,
) -> Result<()> {
    let mut extra: Vec<Piece> = Vec::new();
    for p in pieces.iter_mut() {
        let nz: Vec<&SparsePoly> = p.gens.iter().filter(|g| !g.is_zero()).collect();
        let Some(first) = nz.first() else { continue };
        let nvars = first.nvars();
        let mut mono = SparsePoly::one(nvars);
        let mut stripped: Vec<SparsePoly> = p.gens.clone();
        for &k in divisor_vars {
            let c = nz
                .iter()
                .filter_map(|g| g.order_along_coordinate(k).finite())
                .min()
                .unwrap_or(0);
            if c == 0 {
                continue;
            }
            let pow = SparsePoly::var(k, nvars).pow(c);
            mono = mono.mul(&pow)?;
            stripped = stripped
                .iter()
                .map(|g| {
                    if g.is_zero() { g.clone() } else { g.exact_div(&pow).unwrap_or_else(|_| g.clone()) }
                })
                .collect();
        }
        if mono.is_constant() {
            continue;
        }
        if stripped.iter().any(|g| !g.is_zero() && g.is_constant()) {
            continue;
        }
        // Largest order the residual attains on the chart, capped at c.
        let mut t_res = 0u32;
        for t in 1..=p.control {
            if empty_on(&derivative_closure(&stripped, t), f_loc, budget)? {
                break;
            }
            t_res = t;
        }
        if t_res == 0 {
            continue;
        }
        if t_res < p.control {
            extra.push(Piece { gens: vec![mono], control: p.control - t_res });
        }
        p.gens = stripped;
        p.control = t_res;
    }
    pieces.extend(extra);
    Ok(())
}

/// When every nonzero generator of every piece is a single monomial, pick
/// the coordinate to add to the centre: it must occur in all generators
/// (so the centre stays inside every piece's locus); among those, prefer a
/// coordinate occurring in an already-solved value (the substitution then
/// collapses that value), falling back to the smallest index.
fn monomial_level_var(pieces: &[Piece], solved: &[(usize, SparsePoly)]) -> Option<usize> {
    let mut common: Option<std::collections::BTreeSet<usize>> = None;
    let mut any = false;
    for p in pieces {
        for g in &p.gens {
            if g.is_zero() {
                continue;
            }
            let mut terms = g.terms();
            let Some((exps, _)) = terms.next() else { continue };
            if terms.next().is_some() {
                return None; // not a monomial
            }
            any = true;
            let vars: std::collections::BTreeSet<usize> =
                exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(k, _)| k).collect();
            common = Some(match common {
                None => vars,
                Some(c) => c.intersection(&vars).copied().collect(),
            });
        }
    }
    if !any {
        return None;
    }
    let common = common?;
    if common.is_empty() {
        return None;
    }
    for &k in &common {
        if solved.iter().any(|(_, v)| v.terms().any(|(e, _)| e[k] > 0)) {
            return Some(k);
        }
    }
    common.iter().next().copied()
}

/// Pick the first valid maximal-contact candidate over the pieces whose
/// attained order mubar * control is an integer: the candidate must be
/// nonvanishing somewhere on the maximal locus and linearly solvable.
fn choose_contact(
    pieces: &[Piece],
    mubar: Rat,
    max_locus: &[SparsePoly],
    f_loc: &SparsePoly,
    budget: u64,
) -> Result<Option<(SparsePoly, usize, SparsePoly)>> {
    for p in pieces {
        let t = mubar * Rat::from_integer(p.control as i64);
        if !t.is_integer() {
            continue;
        }
        let t = t.to_integer() as u32;
        let nz: Vec<SparsePoly> = p.gens.iter().filter(|g| !g.is_zero()).cloned().collect();
        if nz.is_empty() {
            continue;
        }
        let cands = match maximal_contact_candidates(&nz, t) {
            Ok(c) => c,
            Err(_) => continue,
        };
        for cand in cands {
            let f = f_loc.mul(&cand.locus)?;
            if empty_on(max_locus, &f, budget)? {
                continue;
            }
            if let Some((k, v)) = solve_linear(&cand.u) {
                return Ok(Some((cand.u.clone(), k, v)));
            }
        }
    }
    Ok(None)
}

/// Back-substitute the solved chain (x_{k_i} = v_i, later solutions feeding
/// earlier values) so each value only involves the free (unsolved)
/// variables. The centre is then {x_k = v_k}, a graph over the free
/// coordinates, made coordinate by the triangular shift x_k -> x_k + v_k.
fn back_substitute(solved: &[(usize, SparsePoly)]) -> Result<Vec<(usize, SparsePoly)>> {
    let mut resolved: Vec<(usize, SparsePoly)> = Vec::new();
    for (k, v) in solved.iter().rev() {
        let mut val = v.clone();
        for (k2, v2) in &resolved {
            val = subst_var(&val, *k2, v2)?;
        }
        resolved.push((*k, val));
    }
    resolved.reverse();
    resolved.sort_by_key(|(k, _)| *k);
    Ok(resolved)
}

// ---------------------------------------------------------------------------
// per-chart analysis
// ---------------------------------------------------------------------------

fn filtered_divisors(dc: &DriverChart, mark: u32) -> Vec<DivisorEntry> {
    dc.chart.e_list.iter().copied().filter(|e| e.birth <= mark).collect()
}

/// The boundary mark active at the given year: reset to the previous year
/// when the chart-level residual order strictly drops.
fn effective_mark(dc: &DriverChart, top_nu: Rat, year: u32) -> u32 {
    let dropped = match dc.last_nu {
        None => true,
        Some(prev) => top_nu < prev,
    };
    if dropped { year.saturating_sub(1) } else { dc.mark }
}

fn analyze(dc: &DriverChart, mu: u32, budget: u64, year: u32) -> Result<Analysis> {
    let chart = &dc.chart;
    let n = chart.nvars;
    if chart.gens.iter().all(|g| g.is_zero()) {
        let step = if n == 0 { "base" } else { "zero" };
        return Ok(Analysis {
            step: step.into(),
            action: Action::WholeChart,
            top_nu: None,
            mark: dc.mark,
            chain: None,
        });
    }
    // Cosupport of (I, mu): every generator of order >= mu.
    let cos_i = derivative_closure(&chart.gens, mu);
    if empty_on(&cos_i, &chart.f_loc, budget)? {
        return Ok(Analysis {
            step: "done".into(),
            action: Action::Done,
            top_nu: None,
            mark: dc.mark,
            chain: None,
        });
    }
    let m_local = MarkedIdealLocal::new(chart.clone(), chart.gens.clone(), mu);
    let (exps, residual) = monomial_residual_split(&m_local)?;
    let r_nz: Vec<SparsePoly> = residual.iter().filter(|g| !g.is_zero()).cloned().collect();

    // mubar = max t with {ord R >= t} meeting the cosupport of (I, mu).
    let cap = max_degree(&r_nz).max(1);
    let mut mubar = 0u32;
    for t in 1..=cap {
        let mut polys = derivative_closure(&r_nz, t);
        polys.extend(cos_i.iter().cloned());
        if empty_on(&polys, &chart.f_loc, budget)? {
            break;
        }
        mubar = t;
    }

    if mubar == 0 {
        // Monomial case: combinatorial choice of the divisor subset.
        let alpha: Vec<u32> = exps.iter().map(|(_, a)| *a).collect();
        let j = monomial_j(&alpha, mu)?;
        let vars: Vec<usize> = j.iter().map(|&pos| exps[pos].0.var).collect();
        let coord: Vec<SparsePoly> =
            vars.iter().map(|&k| SparsePoly::var(k, n)).collect();
        if empty_on(&coord, &chart.f_loc, budget)? {
            return Err(Error::Internal(
                "monomial subset locus does not meet the chart".into(),
            ));
        }
        return Ok(Analysis {
            step: "IIB".into(),
            action: Action::Monomial { vars },
            top_nu: Some(Rat::zero()),
            mark: effective_mark(dc, Rat::zero(), year),
            chain: None,
        });
    }

    // Companion pieces: residual at its attained order, plus the monomial
    // part weighted to fill up the control when the residual is weaker.
    let mut pieces = vec![Piece { gens: r_nz.clone(), control: mubar }];
    if mubar < mu {
        let mut mono = SparsePoly::one(n);
        for (e, a) in &exps {
            mono = mono.mul(&SparsePoly::var(e.var, n).pow(*a))?;
        }
        pieces.push(Piece { gens: vec![mono], control: mu - mubar });
    }
    let top_nu = Rat::new(mubar as i64, mu as i64);
    let mark = effective_mark(dc, top_nu, year);

    // Boundary combinatorics over the level-marked divisors.
    let divisors = filtered_divisors(dc, mark);
    let cos_g = pieces_cosupp(&pieces);
    let mut s = 0usize;
    'outer: for size in (1..=divisors.len()).rev() {
        for subset in subsets_of_size(divisors.len(), size) {
            let mut polys = cos_g.clone();
            for &i in &subset {
                polys.push(SparsePoly::var(divisors[i].var, n));
            }
            if !empty_on(&polys, &chart.f_loc, budget)? {
                s = size;
                break 'outer;
            }
        }
    }

    let step = if mubar >= mu {
        if s == 0 { "I-A".to_string() } else { "I-B".to_string() }
    } else {
        "IIA".to_string()
    };

    // Top-level maximal contact over the companion (boundary deleted).
    let top = choose_contact(&pieces, Rat::one(), &cos_g, &chart.f_loc, budget)?;
    let Some((u0, k0, v0)) = top else {
        // Smooth non-coordinate hypersurface shortcut: a residual generator
        // whose vanishing locus is smooth and divides every generator mu
        // times over.
        for g in &r_nz {
            if g.is_constant() {
                continue;
            }
            let gp = g.pow(mu);
            let divisible = chart
                .gens
                .iter()
                .all(|q| q.is_zero() || q.divisible_by(&gp));
            if !divisible {
                continue;
            }
            let mut smooth = vec![g.clone()];
            for j in 0..n {
                smooth.push(g.partial(j));
            }
            if empty_on(&smooth, &chart.f_loc, budget)? {
                return Ok(Analysis {
                    step,
                    action: Action::Hypersurface { g: g.clone() },
                    top_nu: Some(top_nu),
                    mark,
                    chain: None,
                });
            }
        }
        return Err(Error::Internal(
            "no maximal-contact candidate and no smooth divisor centre".into(),
        ));
    };

    // Descend: restrict the companion plus the boundary piece and recurse.
    let mut solved: Vec<(usize, SparsePoly)> = vec![(k0, v0.clone())];
    let mut levels: Vec<ChainLevel> = Vec::new();
    let divisor_vars: Vec<usize> = chart.e_list.iter().map(|e| e.var).collect();
    let mut f_cur = subst_var(&chart.f_loc, k0, &v0)?;
    let mut cur = restrict_pieces(&pieces, k0, &v0, Rat::one())?;
    strip_divisor_content(&mut cur, &divisor_vars, &f_cur, budget)?;
    if s >= 1 {
        let b = invariant::boundary_ideal(chart, &divisors, s, 1)?;
        let mut bg: Vec<SparsePoly> = Vec::new();
        for g in &b.gens {
            let r = subst_var(g, k0, &v0)?;
            if !r.is_zero() {
                bg.push(r);
            }
        }
        if !bg.is_empty() {
            cur.push(Piece { gens: bg, control: b.control.max(1) });
        }
    }
    let mut last_u = u0;
    for _depth in 0..(n + 2) {
        levels.push(ChainLevel { u: last_u.clone(), pieces: cur.clone() });
        // Purely monomial sub-level: the remaining constraints are monomial
        // (boundary/exceptional data). Deriving further smooth hypersurfaces
        // from high derivatives would over-refine the centre to a point and
        // reproduce the same configuration with larger exponents, so instead
        // add exactly one coordinate chosen combinatorially and stop; the
        // residual monomial content is carried by later invariant entries.
        if let Some(k) = monomial_level_var(&cur, &solved) {
            solved.push((k, SparsePoly::zero(n)));
            break;
        }
        match max_norm_order(&cur, &f_cur, budget)? {
            MaxOrder::Infinite => break,
            MaxOrder::Empty => {
                return Err(Error::Internal("descent sub-level has empty cosupport".into()))
            }
            MaxOrder::Value(r) => {
                let ml = locus_at(&cur, r);
                let Some((u2, k2, v2)) = choose_contact(&cur, r, &ml, &f_cur, budget)? else {
                    return Err(Error::Internal(
                        "descent sub-level found no maximal contact".into(),
                    ));
                };
                solved.push((k2, v2.clone()));
                cur = restrict_pieces(&cur, k2, &v2, r)?;
                f_cur = subst_var(&f_cur, k2, &v2)?;
                strip_divisor_content(&mut cur, &divisor_vars, &f_cur, budget)?;
                last_u = u2;
            }
        }
    }
    let consts = back_substitute(&solved)?;
    Ok(Analysis {
        step,
        action: Action::Centre { solved: consts },
        top_nu: Some(top_nu),
        mark,
        chain: Some(Chain { levels }),
    })
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

// ---------------------------------------------------------------------------
// pointwise invariant
// ---------------------------------------------------------------------------

fn rat_to_extrat(r: Rat) -> ExtRat {
    ExtRat::Finite(BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())))
}

fn piece_order_at(pieces: &[Piece], a: &Point) -> Result<Option<Rat>> {
    // Minimum over pieces of ord_a / control; None = infinity.
    let mut best: Option<Rat> = None;
    for p in pieces {
        for g in &p.gens {
            if g.is_zero() {
                continue;
            }
            if let Some(o) = g.order_at_point(a)?.finite() {
                let r = Rat::new(o as i64, p.control as i64);
                best = Some(match best {
                    None => r,
                    Some(b) => b.min(r),
                });
            }
        }
    }
    Ok(best)
}

/// The invariant at a point of a chart, mirroring the driver's descent:
/// (residual order, marked-divisor count, then the normalized orders of the
/// restricted levels; infinity when a level vanishes identically). Points
/// that left the cosupport get the minimal vector (0); monomial-case
/// points get (0, full normalized order) so the combinatorial blow-ups
/// still strictly decrease it.
fn invariant_at(
    dc: &DriverChart,
    chain: Option<&Chain>,
    mu: u32,
    a: &Point,
) -> Result<InvariantVector> {
    let m_local = MarkedIdealLocal::new(dc.chart.clone(), dc.chart.gens.clone(), mu);
    let mu_a = mu_at(&m_local, a)?;
    let one = ExtRat::Finite(BigRational::one());
    if mu_a < one {
        return Ok(InvariantVector {
            entries: vec![InvEntry::Nu(ExtRat::zero())],
            mu_val: mu_a,
            j_val: vec![],
        });
    }
    let nu1 = residual_order_at(&m_local, a)?;
    if nu1 == ExtRat::Infinity {
        return Ok(InvariantVector {
            entries: vec![InvEntry::Nu(ExtRat::Infinity)],
            mu_val: mu_a,
            j_val: vec![],
        });
    }
    if nu1.is_zero() {
        return Ok(InvariantVector {
            entries: vec![InvEntry::Nu(ExtRat::zero()), InvEntry::Nu(mu_a.clone())],
            mu_val: mu_a,
            j_val: vec![],
        });
    }
    let s1 = count_e_through(a, &dc.chart.e_list, Some(dc.mark))?;
    let mut entries = vec![InvEntry::Nu(nu1), InvEntry::S(s1 as u64)];
    if let Some(chain) = chain {
        for level in &chain.levels {
            // The point must lie on the contact hypersurface of this level.
            if !level.u.eval(a)?.is_zero() {
                break;
            }
            match piece_order_at(&level.pieces, a)? {
                None => {
                    entries.push(InvEntry::Nu(ExtRat::Infinity));
                    break;
                }
                Some(r) => {
                    if r.is_zero() {
                        entries.push(InvEntry::Nu(ExtRat::zero()));
                        break;
                    }
                    entries.push(InvEntry::Nu(rat_to_extrat(r)));
                }
            }
        }
    }
    Ok(InvariantVector { entries, mu_val: mu_a, j_val: vec![] })
}

// ---------------------------------------------------------------------------
// blow-up execution
// ---------------------------------------------------------------------------

struct BlowupOutput {
    children: Vec<DriverChart>,
    siblings: Vec<DriverChart>,
    /// The translated main chart the centre sits in (for sampling) and the
    /// centre variables there.
    main: DriverChart,
    centre_vars: Vec<usize>,
}

fn strip_var_content(p: &SparsePoly, k: usize) -> SparsePoly {
    if p.is_zero() {
        return p.clone();
    }
    let c = match p.order_along_coordinate(k).finite() {
        Some(c) => c,
        None => return p.clone(),
    };
    if c == 0 {
        return p.clone();
    }
    let xk = SparsePoly::var(k, p.nvars()).pow(c);
    p.exact_div(&xk).unwrap_or_else(|_| p.clone())
}

/// Blow up the (possibly translated) coordinate centre {x_k = c_k} in one
/// chart, producing one child per centre variable plus the sibling charts
/// required when a boundary divisor had to be cut away for the
/// translation.
fn blowup_solved(
    dc: &DriverChart,
    solved: &[(usize, SparsePoly)],
    mu: u32,
    year: u32,
    beta: &mut u32,
) -> Result<BlowupOutput> {
    let n = dc.chart.nvars;
    let mut main = dc.clone();
    let mut siblings: Vec<DriverChart> = Vec::new();

    // Handle shifts conflicting with coordinate boundary divisors.
    for (k, v) in solved {
        if v.is_zero() {
            continue;
        }
        if main.chart.e_list.iter().any(|e| e.var == *k) {
            if !v.is_constant() {
                return Err(Error::InadmissibleCentre(
                    "non-constant shift against a boundary coordinate".into(),
                ));
            }
            // Divisor {x_k = 0} is disjoint from the centre {x_k = c}:
            // remove it from the main chart by shrinking U, and cover the
            // divisor side with a sibling missing the centre.
            let mut sib = dc.clone();
            let shifted = SparsePoly::var(*k, n).sub(v)?;
            sib.chart.f_loc = sib.chart.f_loc.mul(&shifted)?;
            *beta += 1;
            sib.chart.beta = *beta;
            siblings.push(sib);
            main.chart.f_loc = main.chart.f_loc.mul(&SparsePoly::var(*k, n))?;
            main.chart.e_list.retain(|e| e.var != *k);
        }
    }

    // Triangular shift making the centre a coordinate subspace through
    // the origin: x_k -> x_k + v_k (the values v_k only involve free
    // coordinates, so the substitutions commute).
    let needs_shift = solved.iter().any(|(_, v)| !v.is_zero());
    if needs_shift {
        let map: Vec<SparsePoly> = (0..n)
            .map(|j| {
                let base = SparsePoly::var(j, n);
                match solved.iter().find(|(k, _)| *k == j) {
                    Some((_, v)) if !v.is_zero() => base.add(v).unwrap(),
                    _ => base,
                }
            })
            .collect();
        main.chart.gens = main
            .chart
            .gens
            .iter()
            .map(|g| g.substitute_polys(&map))
            .collect::<Result<Vec<_>>>()?;
        main.chart.f_loc = main.chart.f_loc.substitute_polys(&map)?;
        main.extra_divisors = main
            .extra_divisors
            .iter()
            .map(|g| g.substitute_polys(&map))
            .collect::<Result<Vec<_>>>()?;
    }

    let centre_vars: Vec<usize> = solved.iter().map(|(k, _)| *k).collect();
    let children = blowup_coordinate(&main, &centre_vars, mu, year, beta)?;
    Ok(BlowupOutput { children, siblings, main, centre_vars })
}

/// Children of the blow-up along the coordinate subspace {x_k = 0 : k in K}
/// through the origin of the (already translated) chart.
fn blowup_coordinate(
    dc: &DriverChart,
    centre_vars: &[usize],
    mu: u32,
    year: u32,
    beta: &mut u32,
) -> Result<Vec<DriverChart>> {
    let n = dc.chart.nvars;
    let mut out = Vec::new();
    for &i0 in centre_vars {
        let subs: Vec<SparsePoly> = (0..n)
            .map(|j| {
                if j != i0 && centre_vars.contains(&j) {
                    SparsePoly::var(i0, n).mul(&SparsePoly::var(j, n)).unwrap()
                } else {
                    SparsePoly::var(j, n)
                }
            })
            .collect();
        let gens = controlled_transform(&dc.chart.gens, mu, i0, &subs)?;
        let f_loc = dc.chart.f_loc.substitute_polys(&subs)?;
        if !f_loc.is_zero()
            && f_loc.order_along_coordinate(i0).finite().map_or(false, |c| c > 0)
        {
            return Err(Error::InadmissibleCentre(
                "centre lies in the complement of the chart's localization".into(),
            ));
        }
        let mut e_list: Vec<DivisorEntry> = Vec::new();
        for e in &dc.chart.e_list {
            if e.var == i0 {
                // Its strict transform misses this chart entirely.
                continue;
            }
            e_list.push(*e);
        }
        e_list.push(DivisorEntry { var: i0, birth: year });
        let extra = dc
            .extra_divisors
            .iter()
            .map(|g| Ok(strip_var_content(&g.substitute_polys(&subs)?, i0)))
            .collect::<Result<Vec<_>>>()?;
        *beta += 1;
        let chart = Chart {
            alpha: dc.chart.alpha.wrapping_mul(16).wrapping_add(i0 as u32 + 1),
            beta: *beta,
            nvars: n,
            f_loc,
            params_u: dc.chart.params_u.clone(),
            num_x_eqns: 0,
            e_list,
            gens,
        };
        out.push(DriverChart {
            chart,
            extra_divisors: extra,
            mark: dc.mark,
            last_nu: dc.last_nu,
        });
    }
    Ok(out)
}

fn centre_string(solved: &[(usize, SparsePoly)]) -> String {
    let parts: Vec<String> = solved
        .iter()
        .map(|(k, v)| {
            if v.is_zero() {
                format!("x{}", k + 1)
            } else {
                format!("x{} - ({})", k + 1, v.to_canonical_string())
            }
        })
        .collect();
    format!("V({})", parts.join(", "))
}

// ---------------------------------------------------------------------------
// the driver loop
// ---------------------------------------------------------------------------

/// Resolve the marked ideal: repeat the year loop (analyze every chart,
/// blow up the selected centres) until every chart has empty cosupport.
pub fn resolve(t: &AffineMarkedIdeal, opts: &ResolveOptions) -> Result<ResolutionTree> {
    for c in &t.charts {
        if c.num_x_eqns != 0 {
            return Err(Error::InvalidInput(
                "the driver operates on charts with X equal to the ambient space".into(),
            ));
        }
    }
    let mu = t.mu;
    let mut state: Vec<DriverChart> = t
        .charts
        .iter()
        .map(|c| DriverChart {
            chart: c.clone(),
            extra_divisors: Vec::new(),
            mark: 0,
            last_nu: None,
        })
        .collect();
    let mut beta: u32 = state.iter().map(|c| c.chart.beta).max().unwrap_or(0);
    let mut history = t.history.clone();
    let mut years: Vec<YearSummary> = Vec::new();
    let mut stats = RunStats { peak_charts: state.len(), ..Default::default() };
    let mut year = t.history.len() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut retired: Vec<DriverChart> = Vec::new();

    loop {
        if state.is_empty() {
            break;
        }
        // Analyze every chart up front.
        let analyses: Vec<Analysis> =
            state
                .iter()
                .map(|dc| analyze(dc, mu, opts.budget, year + 1))
                .collect::<Result<_>>()?;
        if std::env::var("DRIVER_TRACE").is_ok() {
            for (dc, an) in state.iter().zip(&analyses) {
                eprintln!(
                    "year {} chart {} step {} action {:?} gens {:?} e {:?} floc {}",
                    year + 1,
                    dc.chart.id(),
                    an.step,
                    an.action,
                    dc.chart.gens.iter().map(|g| g.to_canonical_string()).collect::<Vec<_>>(),
                    dc.chart.e_list,
                    dc.chart.f_loc.to_canonical_string(),
                );
            }
        }
        if analyses.iter().all(|a| matches!(a.action, Action::Done)) {
            retired.append(&mut state);
            break;
        }
        year += 1;
        if year > opts.year_limit {
            return Err(Error::YearLimit { limit: opts.year_limit as u64 });
        }

        let before = compute_data_vector(&AffineMarkedIdeal {
            charts: state.iter().map(|c| c.chart.clone()).collect(),
            transitions: Vec::new(),
            mu,
            history: history.clone(),
        });

        let mut new_state: Vec<DriverChart> = Vec::new();
        let mut actions: Vec<ChartAction> = Vec::new();
        let mut per_chart_centres: Vec<ChartCentre> = Vec::new();
        let mut children_map: Vec<(String, Vec<String>)> = Vec::new();
        let mut blew = false;
        let mut first_inv: Option<InvariantVector> = None;

        for (ci, (mut dc, an)) in state.drain(..).zip(analyses.into_iter()).enumerate() {
            // Level-mark update: when the chart-level residual order drops,
            // divisors born from now on are "new" for the boundary count.
            dc.mark = an.mark;
            if let Some(nu) = an.top_nu {
                dc.last_nu = Some(nu);
            }
            let id = dc.chart.id();
            match an.action {
                Action::Done => {
                    retired.push(dc.clone());
                    actions.push(ChartAction {
                        chart_id: id,
                        step: "done".into(),
                        centre: String::new(),
                        children: vec![],
                    });
                }
                Action::WholeChart => {
                    blew = true;
                    stats.blowups += 1;
                    per_chart_centres.push(ChartCentre {
                        chart_index: ci,
                        params: vec![],
                        subcover: SparsePoly::one(dc.chart.nvars.max(1)),
                    });
                    children_map.push((id.clone(), vec![]));
                    actions.push(ChartAction {
                        chart_id: id,
                        step: an.step,
                        centre: "X".into(),
                        children: vec![],
                    });
                }
                Action::Hypersurface { g } => {
                    blew = true;
                    stats.blowups += 1;
                    let gp = g.pow(mu);
                    let mut sample_pts: Vec<(Point, InvariantVector)> = Vec::new();
                    if opts.monotonicity_samples > 0 {
                        for a in sample_on_hypersurface(
                            &dc.chart,
                            &g,
                            opts.monotonicity_samples,
                            &mut rng,
                        )? {
                            let inv = invariant_at(&dc, an.chain.as_ref(), mu, &a)?;
                            sample_pts.push((a, inv));
                        }
                    }
                    let mut child = dc.clone();
                    child.chart.gens = child
                        .chart
                        .gens
                        .iter()
                        .map(|q| if q.is_zero() { Ok(q.clone()) } else { q.exact_div(&gp) })
                        .collect::<Result<Vec<_>>>()
                        .map_err(|_| {
                            Error::InadmissibleCentre(
                                "divisor centre does not divide the ideal".into(),
                            )
                        })?;
                    child.extra_divisors.push(g.clone());
                    beta += 1;
                    child.chart.beta = beta;
                    // The divisor blow-up is an isomorphism: the invariant
                    // must still drop at the centre after the division.
                    if !sample_pts.is_empty() {
                        let chain_after = analyze(&child, mu, opts.budget, year)?.chain;
                        for (a, inv_before) in &sample_pts {
                            stats.monotonicity_checks += 1;
                            let inv_after = invariant_at(&child, chain_after.as_ref(), mu, a)?;
                            if compare_inv(&inv_after, inv_before) != std::cmp::Ordering::Less {
                                stats.monotonicity_violations += 1;
                            }
                            if first_inv.is_none() {
                                first_inv = Some(inv_before.clone());
                            }
                        }
                    }
                    per_chart_centres.push(ChartCentre {
                        chart_index: ci,
                        params: vec![g.clone()],
                        subcover: SparsePoly::one(dc.chart.nvars),
                    });
                    let cid = child.chart.id();
                    children_map.push((id.clone(), vec![cid.clone()]));
                    actions.push(ChartAction {
                        chart_id: id,
                        step: an.step,
                        centre: format!("V({})", g.to_canonical_string()),
                        children: vec![cid],
                    });
                    new_state.push(child);
                }
                other => {
                    // Coordinate-subspace centre (possibly translated).
                    let n_chart = dc.chart.nvars;
                    let solved: Vec<(usize, SparsePoly)> = match other {
                        Action::Monomial { vars } => {
                            vars.into_iter().map(|k| (k, SparsePoly::zero(n_chart))).collect()
                        }
                        Action::Centre { solved } => solved,
                        _ => unreachable!(),
                    };
                    blew = true;
                    stats.blowups += 1;
                    let out = blowup_solved(&dc, &solved, mu, year, &mut beta)?;
                    // Monotonicity sampling: points on the centre before,
                    // fibre points over them after.
                    if opts.monotonicity_samples > 0 {
                        let pts = sample_on_subspace(
                            &out.main.chart,
                            &out.centre_vars,
                            opts.monotonicity_samples,
                            &mut rng,
                        )?;
                        let chain_main = if solved.iter().all(|(_, v)| v.is_zero()) {
                            an.chain.clone()
                        } else {
                            // The chain was computed pre-translation; redo it.
                            analyze(&out.main, mu, opts.budget, year).ok().and_then(|a| a.chain)
                        };
                        let mut after_chains: Vec<Option<Chain>> = Vec::new();
                        for ch in &out.children {
                            after_chains
                                .push(analyze(ch, mu, opts.budget, year).ok().and_then(|a| a.chain));
                        }
                        for a in pts {
                            let inv_before =
                                invariant_at(&out.main, chain_main.as_ref(), mu, &a)?;
                            if first_inv.is_none() {
                                first_inv = Some(inv_before.clone());
                            }
                            for (child, chain_after) in out.children.iter().zip(&after_chains) {
                                let i0 = child.chart.e_list.last().map(|e| e.var).unwrap_or(0);
                                if let Some(b) = fibre_point(&a, &out.centre_vars, i0, &mut rng) {
                                    if !child.chart.contains_point(&b)? {
                                        continue;
                                    }
                                    stats.monotonicity_checks += 1;
                                    let inv_after =
                                        invariant_at(child, chain_after.as_ref(), mu, &b)?;
                                    if compare_inv(&inv_after, &inv_before)
                                        != std::cmp::Ordering::Less
                                    {
                                        stats.monotonicity_violations += 1;
                                    }
                                }
                            }
                        }
                    }
                    per_chart_centres.push(ChartCentre {
                        chart_index: ci,
                        params: solved
                            .iter()
                            .map(|(k, v)| {
                                SparsePoly::var(*k, n_chart).sub(v).unwrap()
                            })
                            .collect(),
                        subcover: SparsePoly::one(dc.chart.nvars),
                    });
                    let cids: Vec<String> =
                        out.children.iter().map(|c| c.chart.id()).collect();
                    children_map.push((id.clone(), cids.clone()));
                    actions.push(ChartAction {
                        chart_id: id,
                        step: an.step,
                        centre: centre_string(&solved),
                        children: cids,
                    });
                    new_state.extend(out.children);
                    new_state.extend(out.siblings);
                }
            }
        }

        state = new_state;
        stats.peak_charts = stats.peak_charts.max(state.len());
        if blew {
            let after = compute_data_vector(&AffineMarkedIdeal {
                charts: state.iter().map(|c| c.chart.clone()).collect(),
                transitions: Vec::new(),
                mu,
                history: history.clone(),
            });
            audit::record_blowup(&before, &after);
        }
        history.push(BlowupRecord {
            year,
            centre: CentreSpec { per_chart: per_chart_centres },
            children: children_map,
            invariant: first_inv,
            step: actions
                .iter()
                .filter(|a| a.step != "done")
                .map(|a| a.step.clone())
                .collect::<Vec<_>>()
                .join("+"),
        });
        years.push(YearSummary { year, actions });
        stats.years = year;
    }

    let final_state = AffineMarkedIdeal {
        charts: state.iter().map(|c| c.chart.clone()).collect(),
        transitions: Vec::new(),
        mu,
        history,
    };
    Ok(ResolutionTree { years, final_state, stats, retired })
}

/// Random rational points on the coordinate subspace {x_k = 0 : k in K}
/// inside the chart's U.
fn sample_on_subspace(
    chart: &Chart,
    centre_vars: &[usize],
    samples: u32,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point>> {
    let free: Vec<usize> =
        (0..chart.nvars).filter(|j| !centre_vars.contains(j)).collect();
    if free.is_empty() {
        let a: Point = vec![BigRational::zero(); chart.nvars];
        return Ok(if chart.contains_point(&a)? { vec![a] } else { vec![] });
    }
    // Reuse the seeded chart sampler on a shrunk picture: sample full
    // points, zero out the centre coordinates, keep those still in U.
    let raw = sample_points(chart, &[], samples * 4, rng)?;
    let mut out = Vec::new();
    for mut a in raw {
        for &k in centre_vars {
            a[k] = BigRational::zero();
        }
        if chart.contains_point(&a)? && !out.contains(&a) {
            out.push(a);
        }
        if out.len() == samples as usize {
            break;
        }
    }
    Ok(out)
}

/// Random rational points on V(g) in the chart, found by solving g linearly
/// in some coordinate at sampled values of the others.
fn sample_on_hypersurface(
    chart: &Chart,
    g: &SparsePoly,
    samples: u32,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point>> {
    let n = chart.nvars;
    let k = match (0..n).find(|&j| g.degree_in(j) == Degree::Finite(1)) {
        Some(k) => k,
        None => return Ok(vec![]),
    };
    let coeff = g.partial(k);
    let raw = sample_points(chart, &[], samples * 4, rng)?;
    let mut out = Vec::new();
    for mut a in raw {
        let c = coeff.eval(&a)?;
        if c.is_zero() {
            continue;
        }
        // g = c * x_k + rest(a with x_k = 0); solve for x_k.
        a[k] = BigRational::zero();
        let rest = g.eval(&a)?;
        a[k] = -rest / c;
        if chart.contains_point(&a)? && !out.contains(&a) {
            out.push(a);
        }
        if out.len() == samples as usize {
            break;
        }
    }
    Ok(out)
}

/// A point of the i0-chart fibre over a centre point: the exceptional
/// coordinate vanishes, the other centre coordinates are free fibre
/// coordinates.
fn fibre_point(
    a: &Point,
    centre_vars: &[usize],
    i0: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Point> {
    use rand::Rng;
    let mut b = a.clone();
    b[i0] = BigRational::zero();
    for &k in centre_vars {
        if k != i0 {
            let num: i64 = rng.random_range(-5..=5);
            b[k] = BigRational::new(BigInt::from(num), BigInt::from(1));
        }
    }
    Some(b)
}

// ---------------------------------------------------------------------------
// the pure-exponent combinatorial step
// ---------------------------------------------------------------------------

/// The i0-chart exponent law of the combinatorial blow-up: the exceptional
/// divisor replaces alpha_{i0} with sum_{l in J} alpha_l - mu; the other
/// J-divisors keep their exponents.
pub fn step_iib_exponents(alpha: &[u32], mu: u32, j: &[usize], i0_pos: usize) -> Vec<u32> {
    let total: u32 = j.iter().map(|&l| alpha[l]).sum();
    let mut out = alpha.to_vec();
    out[j[i0_pos]] = total - mu;
    out
}

/// Transcript of a pure-exponent combinatorial resolution.
#[derive(Debug, Clone)]
pub struct MonomialRun {
    pub years: u32,
    pub blowups: u64,
    /// Per-year: the processed exponent vectors and their chosen subsets.
    pub transcript: Vec<Vec<(Vec<u32>, Vec<usize>)>>,
}

/// Resolve a monomial marked ideal purely on exponent vectors: every year,
/// each live chart (total exponent >= mu) blows up its delta-lex-maximal
/// admissible divisor subset; charts drop out when the total falls below
/// the control. Terminates within sum(alpha) years.
pub fn resolve_monomial(alpha: &[u32], mu: u32) -> Result<MonomialRun> {
    let mut charts: Vec<Vec<u32>> = vec![alpha.to_vec()];
    let budget_years: u64 = alpha.iter().map(|&a| a as u64).sum::<u64>() + 1;
    let mut years = 0u32;
    let mut blowups = 0u64;
    let mut transcript = Vec::new();
    loop {
        charts.retain(|c| c.iter().map(|&a| a as u64).sum::<u64>() >= mu as u64);
        if charts.is_empty() {
            break;
        }
        years += 1;
        if years as u64 > budget_years {
            return Err(Error::Internal(
                "combinatorial resolution exceeded the sum-of-exponents year bound".into(),
            ));
        }
        let mut next = Vec::new();
        let mut record = Vec::new();
        for c in &charts {
            let j = monomial_j(c, mu)?;
            blowups += 1;
            for pos in 0..j.len() {
                next.push(step_iib_exponents(c, mu, &j, pos));
            }
            record.push((c.clone(), j));
        }
        transcript.push(record);
        charts = next;
    }
    Ok(MonomialRun { years, blowups, transcript })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;

    fn p(s: &str, nvars: usize) -> SparsePoly {
        SparsePoly::parse(s, nvars).unwrap()
    }

    fn cusp() -> AffineMarkedIdeal {
        AffineMarkedIdeal::single(Chart::plane(2, vec![p("x2^2 - x1^3", 2)]), 1)
    }

    #[test]
    fn unit_ideal_is_immediately_done() {
        let t = AffineMarkedIdeal::single(Chart::plane(2, vec![p("1", 2)]), 1);
        let tree = resolve(&t, &ResolveOptions::default()).unwrap();
        assert_eq!(tree.stats.years, 0);
        assert_eq!(tree.stats.blowups, 0);
        assert!(tree.final_state.charts.is_empty());
    }

    #[test]
    fn zero_ideal_blows_up_whole_chart_once() {
        let t = AffineMarkedIdeal::single(Chart::plane(2, vec![]), 1);
        let tree = resolve(&t, &ResolveOptions::default()).unwrap();
        assert_eq!(tree.stats.years, 1);
        assert_eq!(tree.stats.blowups, 1);
        assert_eq!(tree.years[0].actions[0].step, "zero");
        assert_eq!(tree.years[0].actions[0].centre, "X");
        assert!(tree.final_state.charts.is_empty());
    }

    #[test]
    fn cusp_resolves_with_origin_first() {
        let t = cusp();
        let opts = ResolveOptions { year_limit: 40, ..Default::default() };
        let tree = resolve(&t, &opts).unwrap();
        // Year 1: Step I at the origin (no boundary yet).
        assert_eq!(tree.years[0].actions.len(), 1);
        assert_eq!(tree.years[0].actions[0].step, "I-A");
        assert_eq!(tree.years[0].actions[0].centre, "V(x1, x2)");
        assert!(tree.final_state.charts.is_empty());
        assert!(tree.stats.years <= 40);
    }

    #[test]
    fn cusp_transcript_is_deterministic() {
        let opts = ResolveOptions { year_limit: 40, ..Default::default() };
        let a = resolve(&cusp(), &opts).unwrap();
        let b = resolve(&cusp(), &opts).unwrap();
        assert_eq!(a.stats.years, b.stats.years);
        let fmt = |t: &ResolutionTree| {
            t.years
                .iter()
                .flat_map(|y| y.actions.iter())
                .map(|a| format!("{}|{}|{}", a.chart_id, a.step, a.centre))
                .collect::<Vec<_>>()
                .join(";")
        };
        assert_eq!(fmt(&a), fmt(&b));
    }

    #[test]
    fn cusp_monotonicity_sampling_is_clean() {
        let opts = ResolveOptions {
            year_limit: 40,
            monotonicity_samples: 4,
            seed: 7,
            ..Default::default()
        };
        let tree = resolve(&cusp(), &opts).unwrap();
        assert!(tree.stats.monotonicity_checks > 0);
        assert_eq!(tree.stats.monotonicity_violations, 0);
    }

    #[test]
    fn whitney_umbrella_resolves() {
        // x^2 - y^2 z marked with control 2: the order-2 locus is the whole
        // z-axis and the descent's monomial stopping rule takes the full
        // equimultiple axis as the first centre; both charts of that
        // blow-up are immediately smooth.
        let t = AffineMarkedIdeal::single(
            Chart::plane(3, vec![p("x1^2 - x2^2*x3", 3)]),
            2,
        );
        let opts = ResolveOptions { year_limit: 60, ..Default::default() };
        let tree = resolve(&t, &opts).unwrap();
        assert_eq!(tree.years[0].actions[0].centre, "V(x1, x2)");
        assert!(tree.final_state.charts.is_empty());
        assert!(tree.stats.years <= 8, "umbrella took {} years", tree.stats.years);
    }

    #[test]
    fn monomial_driver_example() {
        // x1^2 x2^3 with both coordinates boundary divisors, control 4.
        let mut chart = Chart::plane(2, vec![p("x1^2*x2^3", 2)]);
        chart.e_list = vec![
            DivisorEntry { var: 0, birth: 0 },
            DivisorEntry { var: 1, birth: 0 },
        ];
        let t = AffineMarkedIdeal::single(chart, 4);
        let tree = resolve(&t, &ResolveOptions::default()).unwrap();
        assert!(tree
            .years
            .iter()
            .all(|y| y.actions.iter().filter(|a| a.step != "done").all(|a| a.step == "IIB")));
        assert_eq!(tree.stats.years, 2);
        assert!(tree.final_state.charts.is_empty());
    }

    #[test]
    fn exponent_law_matches_worked_example() {
        // alpha = (3, 2), mu = 4: J = both divisors; the x1-chart exponents
        // become (1, 2).
        let j = monomial_j(&[3, 2], 4).unwrap();
        assert_eq!(j, vec![0, 1]);
        assert_eq!(step_iib_exponents(&[3, 2], 4, &j, 0), vec![1, 2]);
        assert_eq!(step_iib_exponents(&[3, 2], 4, &j, 1), vec![3, 1]);
    }

    #[test]
    fn pure_exponent_resolution_terminates_within_total() {
        for (alpha, mu) in [
            (vec![3u32, 2], 4u32),
            (vec![4], 4),
            (vec![1, 1, 1], 2),
            (vec![2, 3], 4),
        ] {
            let run = resolve_monomial(&alpha, mu).unwrap();
            let total: u32 = alpha.iter().sum();
            assert!(run.years <= total, "{alpha:?} mu={mu}: {} > {total}", run.years);
            // Every blow-up's exceptional exponent is within the law.
            for year in &run.transcript {
                for (a, j) in year {
                    let s: u32 = j.iter().map(|&l| a[l]).sum();
                    assert!(s >= mu);
                    for &l in j {
                        assert!(s - mu < a[l]);
                    }
                }
            }
        }
    }

    #[test]
    fn single_exponent_single_step() {
        let run = resolve_monomial(&[4], 4).unwrap();
        assert_eq!(run.years, 1);
        assert_eq!(run.blowups, 1);
    }
}
