//! Python bindings: marked-ideal documents, resolution runs, bound reports
//! and the combinatorial/polynomial building blocks.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use desingular::bounds;
use desingular::chart::{compute_data_vector, validate, AffineMarkedIdeal, DataVector};
use desingular::driver::{self, ResolveOptions};
use desingular::groebner;
use desingular::io;
use desingular::poly::SparsePoly;
use desingular::transform;

fn err(e: desingular::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_polys(gens: &[String], nvars: usize) -> PyResult<Vec<SparsePoly>> {
    gens.iter().map(|s| SparsePoly::parse(s, nvars).map_err(err)).collect()
}

/// A marked ideal in the "amv1" document format.
#[pyclass]
struct MarkedIdeal {
    inner: AffineMarkedIdeal,
}

#[pymethods]
impl MarkedIdeal {
    /// Parse an "amv1" JSON document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(MarkedIdeal { inner: io::parse_str(text).map_err(err)? })
    }

    /// Build a marked ideal on affine n-space from generator strings.
    #[staticmethod]
    fn from_gens(nvars: usize, gens: Vec<String>, mu: u32) -> PyResult<Self> {
        let gens = parse_polys(&gens, nvars)?;
        let chart = desingular::chart::Chart::plane(nvars, gens);
        Ok(MarkedIdeal { inner: AffineMarkedIdeal::single(chart, mu) })
    }

    /// Serialize back to the canonical "amv1" JSON document.
    fn to_json(&self) -> String {
        io::print_ideal(&self.inner)
    }

    #[getter]
    fn mu(&self) -> u32 {
        self.inner.mu
    }

    #[getter]
    fn num_charts(&self) -> usize {
        self.inner.charts.len()
    }

    /// The summary data vector (r, n, m, d, l, q, mu).
    fn data_vector(&self) -> HashMap<&'static str, u64> {
        let g = compute_data_vector(&self.inner);
        HashMap::from([
            ("r", g.r),
            ("n", g.n),
            ("m", g.m),
            ("d", g.d),
            ("l", g.l),
            ("q", g.q),
            ("mu", g.mu),
        ])
    }

    /// Run the validity conditions; returns (condition, status) pairs.
    #[pyo3(signature = (samples=4, seed=0))]
    fn validate(&self, samples: u32, seed: u64) -> PyResult<Vec<(String, String)>> {
        let report = validate(&self.inner, samples, seed).map_err(err)?;
        Ok(report
            .items
            .iter()
            .map(|(name, status)| (name.clone(), format!("{status:?}")))
            .collect())
    }

    /// Resolve the marked ideal (empty its cosupport by blow-ups).
    #[pyo3(signature = (year_limit=200, seed=0, budget=1_000_000, monotonicity_samples=0))]
    fn resolve(
        &self,
        year_limit: u32,
        seed: u64,
        budget: u64,
        monotonicity_samples: u32,
    ) -> PyResult<Resolution> {
        let opts = ResolveOptions { year_limit, seed, budget, monotonicity_samples };
        let tree = driver::resolve(&self.inner, &opts).map_err(err)?;
        Ok(Resolution {
            years: tree.stats.years,
            blowups: tree.stats.blowups,
            peak_charts: tree.stats.peak_charts,
            monotonicity_checks: tree.stats.monotonicity_checks,
            monotonicity_violations: tree.stats.monotonicity_violations,
            final_charts: tree.final_state.charts.len(),
            history: io::history_lines(&tree, true),
        })
    }
}

/// Outcome of a resolution run.
#[pyclass]
struct Resolution {
    #[pyo3(get)]
    years: u32,
    #[pyo3(get)]
    blowups: u64,
    #[pyo3(get)]
    peak_charts: usize,
    #[pyo3(get)]
    monotonicity_checks: u64,
    #[pyo3(get)]
    monotonicity_violations: u64,
    #[pyo3(get)]
    final_charts: usize,
    /// The blow-up history as JSON lines (one node per line).
    #[pyo3(get)]
    history: String,
}

#[pymethods]
impl Resolution {
    fn __repr__(&self) -> String {
        format!(
            "Resolution(years={}, blowups={}, peak_charts={}, final_charts={})",
            self.years, self.blowups, self.peak_charts, self.final_charts
        )
    }
}

/// Evaluate the dimension-m complexity-bound recursion on a data vector;
/// returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (dim, r=0, n=2, m=1, d=2, l=1, q=1, mu=1, depth=4))]
#[allow(clippy::too_many_arguments)]
fn bounds_report(
    dim: u64,
    r: u64,
    n: u64,
    m: u64,
    d: u64,
    l: u64,
    q: u64,
    mu: u64,
    depth: u32,
) -> PyResult<String> {
    let input = DataVector { r, n, m, d, l, q, mu };
    let report = bounds::gamma(dim, &input).map_err(err)?;
    Ok(serde_json::to_string_pretty(&report.to_json(depth)).unwrap_or_default())
}

/// Resolve a monomial marked ideal x^alpha with control mu purely on
/// exponent vectors; returns (years, blowups).
#[pyfunction]
fn resolve_monomial(alpha: Vec<u32>, mu: u32) -> PyResult<(u32, u64)> {
    let run = driver::resolve_monomial(&alpha, mu).map_err(err)?;
    Ok((run.years, run.blowups))
}

/// Largest order of vanishing attained on the cosupport of the ideal
/// generated by `gens` in `nvars` variables.
#[pyfunction]
#[pyo3(signature = (gens, nvars, cap=16, budget=1_000_000))]
fn max_order(gens: Vec<String>, nvars: usize, cap: u32, budget: u64) -> PyResult<u32> {
    let gens = parse_polys(&gens, nvars)?;
    let one = SparsePoly::one(nvars);
    groebner::max_order_on_cosupport(&gens, &[], &one, cap, budget).map_err(err)
}

/// Controlled transform of generators under an explicit substitution:
/// pull back and divide exactly by the exc_index coordinate to the mu.
#[pyfunction]
fn controlled_transform(
    gens: Vec<String>,
    nvars: usize,
    mu: u32,
    exc_index: usize,
    substitution: Vec<String>,
) -> PyResult<Vec<String>> {
    let gens = parse_polys(&gens, nvars)?;
    let subst = parse_polys(&substitution, nvars)?;
    let out = transform::controlled_transform(&gens, mu, exc_index, &subst).map_err(err)?;
    Ok(out.iter().map(|g| g.to_canonical_string()).collect())
}

#[pymodule]
fn desingular_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MarkedIdeal>()?;
    m.add_class::<Resolution>()?;
    m.add_function(wrap_pyfunction!(bounds_report, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_monomial, m)?)?;
    m.add_function(wrap_pyfunction!(max_order, m)?)?;
    m.add_function(wrap_pyfunction!(controlled_transform, m)?)?;
    Ok(())
}
