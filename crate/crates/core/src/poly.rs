//! Exact sparse multivariate polynomial arithmetic over the rationals.
//!
//! Key operations:
//! - ring arithmetic (`add`, `sub`, `mul`, `pow`) and exact division that
//!   fails on a nonzero remainder,
//! - `order_at_point` via a variable-by-variable Horner Taylor shift,
//! - `order_along_coordinate` (largest power of one variable dividing the
//!   polynomial),
//! - partial derivatives and rational substitution,
//! - a lossless canonical text form used inside the JSON formats.
//!
//! Design notes: coefficients are arbitrary-precision rationals kept in
//! lowest terms; exponent vectors are dense fixed-length tuples; the zero
//! polynomial's degree is a tagged sentinel (`Degree::MinusInfinity`), never
//! an integer, so bound formulas cannot silently consume a `-1`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Total degree of a polynomial; the zero polynomial gets a distinguished
/// sentinel rather than an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    /// Degree of the zero polynomial.
    MinusInfinity,
    /// Max total degree over stored terms (0 for nonzero constants).
    Finite(u32),
}

impl Degree {
    /// Finite value, or an error message-friendly `None`.
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::MinusInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

/// Order (vanishing multiplicity) value: a natural number or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtNat {
    Finite(u32),
    Infinity,
}

impl ExtNat {
    pub fn finite(self) -> Option<u32> {
        match self {
            ExtNat::Finite(v) => Some(v),
            ExtNat::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtNat::Infinity)
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Finite(v) => write!(f, "{v}"),
            ExtNat::Infinity => write!(f, "inf"),
        }
    }
}

/// A rational point with exact coordinates.
pub type Point = Vec<BigRational>;

/// Sparse multivariate polynomial: exponent vector -> nonzero rational
/// coefficient. Immutable in spirit; all operations return new values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparsePoly {
    terms: BTreeMap<Vec<u32>, BigRational>,
    nvars: usize,
}

impl SparsePoly {
    /// The zero polynomial in `nvars` variables.
    pub fn zero(nvars: usize) -> Self {
        SparsePoly { terms: BTreeMap::new(), nvars }
    }

    /// The constant polynomial 1.
    pub fn one(nvars: usize) -> Self {
        Self::constant(BigRational::one(), nvars)
    }

    /// A constant polynomial.
    pub fn constant(c: BigRational, nvars: usize) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; nvars], c);
        }
        SparsePoly { terms, nvars }
    }

    /// An integer constant polynomial.
    pub fn constant_i64(c: i64, nvars: usize) -> Self {
        Self::constant(BigRational::from(BigInt::from(c)), nvars)
    }

    /// The variable x_{j} (0-based index).
    pub fn var(j: usize, nvars: usize) -> Self {
        assert!(j < nvars, "variable index out of range");
        let mut exps = vec![0; nvars];
        exps[j] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(exps, BigRational::one());
        SparsePoly { terms, nvars }
    }

    /// A single monomial c * x^exps.
    pub fn monomial(c: BigRational, exps: Vec<u32>) -> Self {
        let nvars = exps.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        SparsePoly { terms, nvars }
    }

    /// Build from raw (exponent, coefficient) pairs; zero coefficients are
    /// dropped, duplicate exponents are summed.
    pub fn from_terms(pairs: impl IntoIterator<Item = (Vec<u32>, BigRational)>, nvars: usize) -> Self {
        let mut terms: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (e, c) in pairs {
            assert_eq!(e.len(), nvars, "exponent vector length mismatch");
            let entry = terms.entry(e).or_insert_with(BigRational::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        SparsePoly { terms, nvars }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for a nonzero constant.
    pub fn is_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms.keys().next().unwrap().iter().all(|&e| e == 0)
    }

    pub fn is_one(&self) -> bool {
        self.is_constant() && self.terms.values().next().unwrap().is_one()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterate over (exponent vector, coefficient) pairs in BTreeMap order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    /// Max total degree; tagged sentinel for the zero polynomial.
    pub fn degree(&self) -> Degree {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .map_or(Degree::MinusInfinity, Degree::Finite)
    }

    /// Degree in a single variable (0 if the variable does not occur;
    /// MinusInfinity for the zero polynomial).
    pub fn degree_in(&self, j: usize) -> Degree {
        self.terms
            .keys()
            .map(|e| e[j])
            .max()
            .map_or(Degree::MinusInfinity, Degree::Finite)
    }

    fn check_dims(&self, other: &SparsePoly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: other.nvars });
        }
        Ok(())
    }

    pub fn add(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.check_dims(other)?;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_insert_with(BigRational::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(SparsePoly { terms, nvars: self.nvars })
    }

    pub fn sub(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SparsePoly {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect();
        SparsePoly { terms, nvars: self.nvars }
    }

    pub fn scale(&self, c: &BigRational) -> SparsePoly {
        if c.is_zero() {
            return SparsePoly::zero(self.nvars);
        }
        let terms = self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect();
        SparsePoly { terms, nvars: self.nvars }
    }

    pub fn mul(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.check_dims(other)?;
        let mut terms: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = terms.entry(e).or_insert_with(BigRational::zero);
                *entry += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(SparsePoly { terms, nvars: self.nvars })
    }

    pub fn pow(&self, k: u32) -> SparsePoly {
        let mut acc = SparsePoly::one(self.nvars);
        for _ in 0..k {
            acc = acc.mul(self).expect("same nvars");
        }
        acc
    }

    /// Exact division: returns q with self = q * other, or an error when the
    /// remainder under multivariate division by `other` is nonzero. A single
    /// divisor is always a Groebner basis of its principal ideal, so a zero
    /// remainder exactly characterizes divisibility.
    pub fn exact_div(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.check_dims(other)?;
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (lt_e, lt_c) = other
            .terms
            .iter()
            .max_by(|(ea, _), (eb, _)| grevlex_cmp(ea, eb))
            .map(|(e, c)| (e.clone(), c.clone()))
            .unwrap();
        let mut rem = self.clone();
        let mut quot = SparsePoly::zero(self.nvars);
        while !rem.is_zero() {
            let (re, rc) = rem
                .terms
                .iter()
                .max_by(|(ea, _), (eb, _)| grevlex_cmp(ea, eb))
                .map(|(e, c)| (e.clone(), c.clone()))
                .unwrap();
            if !lt_e.iter().zip(&re).all(|(a, b)| a <= b) {
                return Err(Error::DivisionRemainder);
            }
            let qe: Vec<u32> = re.iter().zip(&lt_e).map(|(a, b)| a - b).collect();
            let qc = rc / &lt_c;
            let qmon = SparsePoly::monomial(qc, qe);
            rem = rem.sub(&qmon.mul(other)?)?;
            quot = quot.add(&qmon)?;
        }
        Ok(quot)
    }

    /// True when `other` divides `self` exactly.
    pub fn divisible_by(&self, other: &SparsePoly) -> bool {
        self.exact_div(other).is_ok()
    }

    /// Partial derivative with respect to x_j.
    pub fn partial(&self, j: usize) -> SparsePoly {
        assert!(j < self.nvars, "variable index out of range");
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[j] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[j] -= 1;
            let nc = c * BigRational::from(BigInt::from(e[j]));
            terms.insert(ne, nc);
        }
        SparsePoly { terms, nvars: self.nvars }
    }

    /// Evaluate at an exact rational point.
    pub fn eval(&self, a: &[BigRational]) -> Result<BigRational> {
        if a.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: a.len() });
        }
        let mut total = BigRational::zero();
        for (e, c) in &self.terms {
            let mut v = c.clone();
            for (j, &exp) in e.iter().enumerate() {
                for _ in 0..exp {
                    v *= &a[j];
                }
            }
            total += v;
        }
        Ok(total)
    }

    /// Taylor shift: p(x + a), computed variable-by-variable via Horner to
    /// avoid multinomial blowup for sparse inputs.
    pub fn taylor_shift(&self, a: &[BigRational]) -> Result<SparsePoly> {
        if a.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: a.len() });
        }
        let mut cur = self.clone();
        for (j, aj) in a.iter().enumerate() {
            if aj.is_zero() {
                continue;
            }
            cur = cur.shift_one_var(j, aj)?;
        }
        Ok(cur)
    }

    /// Horner shift in a single variable: p(..., x_j + a, ...).
    fn shift_one_var(&self, j: usize, a: &BigRational) -> Result<SparsePoly> {
        // Collect coefficients of x_j^i as polynomials in the other variables
        // (still represented in the full variable set with e[j] = 0).
        let mut coeffs: BTreeMap<u32, SparsePoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let i = e[j];
            let mut ne = e.clone();
            ne[j] = 0;
            let entry = coeffs.entry(i).or_insert_with(|| SparsePoly::zero(self.nvars));
            *entry = entry.add(&SparsePoly::monomial(c.clone(), ne))?;
        }
        let max_deg = match coeffs.keys().next_back() {
            Some(&d) => d,
            None => return Ok(SparsePoly::zero(self.nvars)),
        };
        // Horner: result = c_d; then result = result*(x_j + a) + c_i.
        let xj_plus_a = SparsePoly::var(j, self.nvars)
            .add(&SparsePoly::constant(a.clone(), self.nvars))?;
        let zero = SparsePoly::zero(self.nvars);
        let mut result = coeffs.get(&max_deg).cloned().unwrap_or_else(|| zero.clone());
        for i in (0..max_deg).rev() {
            result = result.mul(&xj_plus_a)?;
            if let Some(ci) = coeffs.get(&i) {
                result = result.add(ci)?;
            }
        }
        Ok(result)
    }

    /// Least total degree of a nonzero term of p(x + a); infinity iff p = 0.
    pub fn order_at_point(&self, a: &[BigRational]) -> Result<ExtNat> {
        let shifted = self.taylor_shift(a)?;
        Ok(shifted
            .terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .min()
            .map_or(ExtNat::Infinity, ExtNat::Finite))
    }

    /// Largest e with x_j^e dividing p; infinity iff p = 0.
    pub fn order_along_coordinate(&self, j: usize) -> ExtNat {
        assert!(j < self.nvars, "variable index out of range");
        self.terms
            .keys()
            .map(|e| e[j])
            .min()
            .map_or(ExtNat::Infinity, ExtNat::Finite)
    }

    /// Substitute x_i -> map[i] (polynomial entries).
    pub fn substitute_polys(&self, map: &[SparsePoly]) -> Result<SparsePoly> {
        if map.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: map.len() });
        }
        let out_nvars = map.first().map_or(0, |p| p.nvars());
        for p in map {
            if p.nvars() != out_nvars {
                return Err(Error::DimensionMismatch { expected: out_nvars, got: p.nvars() });
            }
        }
        let mut total = SparsePoly::zero(out_nvars);
        for (e, c) in &self.terms {
            let mut term = SparsePoly::constant(c.clone(), out_nvars);
            for (j, &exp) in e.iter().enumerate() {
                if exp > 0 {
                    term = term.mul(&map[j].pow(exp))?;
                }
            }
            total = total.add(&term)?;
        }
        Ok(total)
    }

    /// Substitute x_i -> map[i] (rational entries). Returns a single
    /// numerator/denominator pair with the common denominator cleared and
    /// the content gcd removed; no further simplification is guaranteed.
    pub fn substitute(&self, map: &[RationalMapEntry]) -> Result<RationalMapEntry> {
        if map.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: map.len() });
        }
        for (i, entry) in map.iter().enumerate() {
            if entry.denominator.is_zero() {
                return Err(Error::ZeroDenominator { index: i });
            }
        }
        let out_nvars = map.first().map_or(0, |e| e.numerator.nvars());
        if self.is_zero() {
            return Ok(RationalMapEntry::polynomial(SparsePoly::zero(out_nvars)));
        }
        // Common denominator: product of den_i^{max deg in x_i}.
        let mut denom = SparsePoly::one(out_nvars);
        let mut max_exp = vec![0u32; self.nvars];
        for e in self.terms.keys() {
            for (j, &exp) in e.iter().enumerate() {
                max_exp[j] = max_exp[j].max(exp);
            }
        }
        for (j, &m) in max_exp.iter().enumerate() {
            denom = denom.mul(&map[j].denominator.pow(m))?;
        }
        let mut numer = SparsePoly::zero(out_nvars);
        for (e, c) in &self.terms {
            let mut term = SparsePoly::constant(c.clone(), out_nvars);
            for (j, &exp) in e.iter().enumerate() {
                term = term.mul(&map[j].numerator.pow(exp))?;
                term = term.mul(&map[j].denominator.pow(max_exp[j] - exp))?;
            }
            numer = numer.add(&term)?;
        }
        Ok(RationalMapEntry::reduced(numer, denom))
    }

    /// Rational content: the unique c with self = c * primitive, where the
    /// primitive part has coprime integer coefficients and positive leading
    /// (BTreeMap-max) coefficient. Returns (c, primitive). Panics on zero.
    pub fn content(&self) -> (BigRational, SparsePoly) {
        use num_integer::Integer;
        assert!(!self.is_zero(), "content of zero polynomial");
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut content = BigRational::new(num_gcd, den_lcm);
        if self.terms.values().next_back().unwrap().is_negative() {
            content = -content;
        }
        let prim = self.scale(&content.recip());
        (content, prim)
    }

    /// Remove the rational content: scale so coefficients are coprime
    /// integers with positive leading (BTreeMap-max) coefficient.
    pub fn primitive_part(&self) -> SparsePoly {
        if self.is_zero() {
            return self.clone();
        }
        self.content().1
    }

    /// Extend to a larger ambient variable count (new variables unused).
    pub fn extend_nvars(&self, nvars: usize) -> SparsePoly {
        assert!(nvars >= self.nvars);
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut ne = e.clone();
                ne.resize(nvars, 0);
                (ne, c.clone())
            })
            .collect();
        SparsePoly { terms, nvars }
    }

    /// Restrict to a smaller ambient count; errors if a dropped variable
    /// occurs in any term.
    pub fn truncate_nvars(&self, nvars: usize) -> Result<SparsePoly> {
        assert!(nvars <= self.nvars);
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[nvars..].iter().any(|&x| x > 0) {
                return Err(Error::Internal(format!(
                    "cannot truncate to {nvars} variables: variable beyond range occurs"
                )));
            }
            terms.insert(e[..nvars].to_vec(), c.clone());
        }
        Ok(SparsePoly { terms, nvars })
    }

    /// Canonical text form: `coeff * x1^e1 * ... * xn^en` terms joined by
    /// ` + `, negative signs inside the coefficient; `0` for zero.
    pub fn to_canonical_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            let mut factors: Vec<String> = Vec::new();
            let coeff = if c.denom().is_one() {
                c.numer().to_string()
            } else {
                format!("{}/{}", c.numer(), c.denom())
            };
            let all_zero = e.iter().all(|&x| x == 0);
            if all_zero || !c.is_one() {
                factors.push(coeff);
            }
            for (j, &exp) in e.iter().enumerate() {
                if exp == 1 {
                    factors.push(format!("x{}", j + 1));
                } else if exp > 1 {
                    factors.push(format!("x{}^{}", j + 1, exp));
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }

    /// Parse the canonical text form back into a polynomial.
    pub fn parse(s: &str, nvars: usize) -> Result<SparsePoly> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial string".into()));
        }
        let mut pairs: Vec<(Vec<u32>, BigRational)> = Vec::new();
        // Split on top-level '+' and '-' (the '-' is kept as part of the
        // following term's coefficient sign).
        for raw in split_terms(s) {
            let term = raw.trim();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in `{s}`")));
            }
            if term == "0" {
                continue;
            }
            let (negated, term) = match term.strip_prefix('-') {
                Some(rest) => (true, rest.trim()),
                None => (false, term),
            };
            let mut coeff = if negated { -BigRational::one() } else { BigRational::one() };
            let mut exps = vec![0u32; nvars];
            for factor in term.split('*') {
                let f = factor.trim();
                if f.is_empty() {
                    return Err(Error::Parse(format!("empty factor in `{term}`")));
                }
                if let Some(rest) = f.strip_prefix('x') {
                    let (var_s, exp_s) = match rest.split_once('^') {
                        Some((v, e)) => (v, Some(e)),
                        None => (rest, None),
                    };
                    let idx: usize = var_s
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad variable `{f}`")))?;
                    if idx == 0 || idx > nvars {
                        return Err(Error::Parse(format!(
                            "variable x{idx} out of range 1..={nvars}"
                        )));
                    }
                    let exp: u32 = match exp_s {
                        Some(e) => e
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad exponent in `{f}`")))?,
                        None => 1,
                    };
                    exps[idx - 1] += exp;
                } else {
                    let c = parse_rational(f)?;
                    coeff *= c;
                }
            }
            pairs.push((exps, coeff));
        }
        Ok(SparsePoly::from_terms(pairs, nvars))
    }
}

/// Split a polynomial string into signed terms at top-level `+`/`-`,
/// keeping each `-` with the term it introduces.
fn split_terms(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut prev_is_op = true; // leading '-' binds to the first term
    for ch in s.chars() {
        match ch {
            '+' if !prev_is_op => {
                out.push(cur.clone());
                cur.clear();
                prev_is_op = true;
            }
            '-' if !prev_is_op => {
                out.push(cur.clone());
                cur = String::from("-");
                prev_is_op = true;
            }
            c if c.is_whitespace() => cur.push(c),
            c => {
                cur.push(c);
                prev_is_op = false;
            }
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur);
    }
    out
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest.trim()),
        None => (1, s),
    };
    let r = match body.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
            let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            BigRational::new(n, d)
        }
        None => {
            let n: BigInt = body.parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
            BigRational::from(n)
        }
    };
    Ok(if sign < 0 { -r } else { r })
}

/// Graded reverse lexicographic comparison of exponent vectors.
pub fn grevlex_cmp(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let ta: u32 = a.iter().sum();
    let tb: u32 = b.iter().sum();
    match ta.cmp(&tb) {
        Ordering::Equal => {}
        o => return o,
    }
    // Reverse lex: smaller last nonzero difference wins.
    for (x, y) in a.iter().zip(b).rev() {
        match x.cmp(y) {
            Ordering::Equal => {}
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
        }
    }
    std::cmp::Ordering::Equal
}

/// One entry of a rational (birational) coordinate map: numerator over a
/// nonzero denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMapEntry {
    pub numerator: SparsePoly,
    pub denominator: SparsePoly,
}

impl RationalMapEntry {
    /// A polynomial entry (denominator 1).
    pub fn polynomial(p: SparsePoly) -> Self {
        let nvars = p.nvars();
        RationalMapEntry { numerator: p, denominator: SparsePoly::one(nvars) }
    }

    /// Build, removing the shared rational content of numerator and
    /// denominator (no polynomial gcd is attempted).
    pub fn reduced(numerator: SparsePoly, denominator: SparsePoly) -> Self {
        if numerator.is_zero() {
            let nvars = denominator.nvars();
            return RationalMapEntry {
                numerator,
                denominator: SparsePoly::one(nvars),
            };
        }
        // Remove common monomial factor and scalar content.
        let mut common: Option<Vec<u32>> = None;
        for e in numerator.terms().map(|(e, _)| e).chain(denominator.terms().map(|(e, _)| e)) {
            common = Some(match common {
                None => e.clone(),
                Some(c) => c.iter().zip(e).map(|(a, b)| (*a).min(*b)).collect(),
            });
        }
        let common = common.unwrap();
        let shift = |p: &SparsePoly| -> SparsePoly {
            SparsePoly::from_terms(
                p.terms().map(|(e, c)| {
                    (e.iter().zip(&common).map(|(a, b)| a - b).collect(), c.clone())
                }),
                p.nvars(),
            )
        };
        let n = shift(&numerator);
        let d = shift(&denominator);
        // Scale both sides by the same factor so the denominator becomes
        // primitive with positive leading coefficient; the ratio is exact.
        let (c, d_prim) = d.content();
        RationalMapEntry { numerator: n.scale(&c.recip()), denominator: d_prim }
    }

    pub fn is_polynomial(&self) -> bool {
        self.denominator.is_constant()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    fn p(s: &str, nvars: usize) -> SparsePoly {
        SparsePoly::parse(s, nvars).unwrap()
    }

    #[test]
    fn ring_identities() {
        let x = SparsePoly::var(0, 2);
        let y = SparsePoly::var(1, 2);
        let sum = x.add(&y).unwrap();
        let diff = x.sub(&y).unwrap();
        // (x+y)(x-y) = x^2 - y^2
        assert_eq!(sum.mul(&diff).unwrap(), p("x1^2 - x2^2", 2));
        // (x^2 y^2 - x^3)/x^2 = y^2 - x
        let num = p("x1^2*x2^2 - x1^3", 2);
        assert_eq!(num.exact_div(&x.pow(2)).unwrap(), p("x2^2 - x1", 2));
        // (y^2 - x^3) * 0 = 0
        let cusp = p("x2^2 - x1^3", 2);
        assert!(cusp.mul(&SparsePoly::zero(2)).unwrap().is_zero());
    }

    #[test]
    fn exact_div_fails_on_remainder() {
        let cusp = p("x2^2 - x1^3", 2);
        let x = SparsePoly::var(0, 2);
        assert!(matches!(cusp.exact_div(&x), Err(Error::DivisionRemainder)));
    }

    #[test]
    fn exact_div_nonmonomial_divisor() {
        let a = p("x2^2 - x1", 2);
        let b = p("x1 + x2", 2);
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.exact_div(&b).unwrap(), a);
        assert_eq!(prod.exact_div(&a).unwrap(), b);
    }

    #[test]
    fn degree_sentinel() {
        assert_eq!(SparsePoly::zero(3).degree(), Degree::MinusInfinity);
        assert_eq!(SparsePoly::constant_i64(5, 3).degree(), Degree::Finite(0));
        assert_eq!(p("x2^2 - x1^3", 2).degree(), Degree::Finite(3));
    }

    #[test]
    fn order_at_origin_and_shifted() {
        let cusp = p("x2^2 - x1^3", 2);
        // Lowest term y^2 has degree 2.
        assert_eq!(cusp.order_at_point(&[rat(0), rat(0)]).unwrap(), ExtNat::Finite(2));
        // Zero polynomial: infinity.
        assert_eq!(
            SparsePoly::zero(2).order_at_point(&[rat(1), rat(2)]).unwrap(),
            ExtNat::Infinity
        );
        // At (1,1): Taylor shift x->1+s, y->1+t gives
        // (1+t)^2 - (1+s)^3 = 2t - 3s + t^2 - 3s^2 - s^3; order 1.
        assert_eq!(cusp.order_at_point(&[rat(1), rat(1)]).unwrap(), ExtNat::Finite(1));
        // Cross-check the full shifted expansion against the hand oracle.
        let shifted = cusp.taylor_shift(&[rat(1), rat(1)]).unwrap();
        assert_eq!(shifted, p("2*x2 - 3*x1 + x2^2 - 3*x1^2 - x1^3", 2));
    }

    #[test]
    fn order_along_coordinate_cases() {
        assert_eq!(p("x1^3*x2^2", 2).order_along_coordinate(0), ExtNat::Finite(3));
        assert_eq!(p("x2^2 - x1^3", 2).order_along_coordinate(0), ExtNat::Finite(0));
        // min of per-term exponents: x^2y^2 + x^3y^5 -> 2 along x.
        assert_eq!(p("x1^2*x2^2 + x1^3*x2^5", 2).order_along_coordinate(0), ExtNat::Finite(2));
        assert_eq!(SparsePoly::zero(2).order_along_coordinate(1), ExtNat::Infinity);
    }

    #[test]
    fn partial_derivative() {
        let cusp = p("x2^2 - x1^3", 2);
        assert_eq!(cusp.partial(1), p("2*x2", 2));
        assert_eq!(cusp.partial(0), p("-3*x1^2", 2));
        assert!(SparsePoly::constant_i64(7, 2).partial(0).is_zero());
    }

    #[test]
    fn substitute_polynomial_map() {
        // substitute(y^2 - x^3, x->x, y->x*y) = x^2 y^2 - x^3 = x^2(y^2 - x).
        let cusp = p("x2^2 - x1^3", 2);
        let map = vec![
            RationalMapEntry::polynomial(SparsePoly::var(0, 2)),
            RationalMapEntry::polynomial(p("x1*x2", 2)),
        ];
        let out = cusp.substitute(&map).unwrap();
        assert_eq!(out.numerator, p("x1^2*x2^2 - x1^3", 2));
        assert!(out.denominator.is_one());
    }

    #[test]
    fn substitute_rational_identity_transport() {
        // substitute(x, x->v/w) = (v, w).
        let x = SparsePoly::var(0, 1);
        let map = vec![RationalMapEntry {
            numerator: SparsePoly::var(0, 2),
            denominator: SparsePoly::var(1, 2),
        }];
        let out = x.substitute(&map).unwrap();
        assert_eq!(out.numerator, SparsePoly::var(0, 2));
        assert_eq!(out.denominator, SparsePoly::var(1, 2));
    }

    #[test]
    fn substitute_zero_denominator_rejected() {
        let x = SparsePoly::var(0, 1);
        let map = vec![RationalMapEntry {
            numerator: SparsePoly::var(0, 1),
            denominator: SparsePoly::zero(1),
        }];
        assert!(matches!(x.substitute(&map), Err(Error::ZeroDenominator { index: 0 })));
    }

    #[test]
    fn canonical_round_trip() {
        for (s, n) in [
            ("x2^2 - x1^3", 2),
            ("0", 3),
            ("-5/2", 1),
            ("x1*x2*x3 + 7*x2^4 - 1/3*x1", 3),
        ] {
            let q = p(s, n);
            let printed = q.to_canonical_string();
            assert_eq!(SparsePoly::parse(&printed, n).unwrap(), q);
        }
    }

    #[test]
    fn order_bounded_by_degree() {
        let q = p("x1^2*x2^2 + x1^3*x2^5", 2);
        let Degree::Finite(d) = q.degree() else { panic!() };
        let ExtNat::Finite(o) = q.order_along_coordinate(0) else { panic!() };
        assert!(o <= d);
    }

    fn arb_poly() -> impl Strategy<Value = SparsePoly> {
        // Small random bivariate polynomials with coefficients in -5..=5.
        proptest::collection::vec(((0u32..4, 0u32..4), -5i64..=5), 1..5).prop_map(|terms| {
            SparsePoly::from_terms(
                terms
                    .into_iter()
                    .map(|((a, b), c)| (vec![a, b], rat(c))),
                2,
            )
        })
    }

    fn arb_point() -> impl Strategy<Value = Point> {
        (-3i64..=3, -3i64..=3).prop_map(|(a, b)| vec![rat(a), rat(b)])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn valuation_property(a in arb_poly(), b in arb_poly(), pt in arb_point()) {
            let oa = a.order_at_point(&pt).unwrap();
            let ob = b.order_at_point(&pt).unwrap();
            let oprod = a.mul(&b).unwrap().order_at_point(&pt).unwrap();
            if let (ExtNat::Finite(x), ExtNat::Finite(y)) = (oa, ob) {
                prop_assert_eq!(oprod, ExtNat::Finite(x + y));
            } else {
                prop_assert_eq!(oprod, ExtNat::Infinity);
            }
        }

        #[test]
        fn partial_drops_degree(a in arb_poly()) {
            if a.degree_in(0) > Degree::Finite(0) {
                let d = a.degree().finite().unwrap();
                let pd = a.partial(0).degree();
                prop_assert!(pd <= Degree::Finite(d.saturating_sub(1)));
            }
        }

        #[test]
        fn parse_print_round_trip(a in arb_poly()) {
            let s = a.to_canonical_string();
            prop_assert_eq!(SparsePoly::parse(&s, 2).unwrap(), a);
        }

        #[test]
        fn mul_then_exact_div(a in arb_poly(), b in arb_poly()) {
            if !b.is_zero() {
                let prod = a.mul(&b).unwrap();
                prop_assert_eq!(prod.exact_div(&b).unwrap(), a);
            }
        }
    }
}
