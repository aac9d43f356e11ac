//! Truncated multivariate polynomial rings over the two-element field.
//!
//! Every generator has degree 1. A ring is either a plain truncation
//! `Z2[x1..xn] / (x1^t1, .., xn^tn)` or a *flag* ring in which the power
//! `xi^ti` is rewritten by a reduction polynomial in `x1..xi` whose
//! `xi`-exponents are all below `ti`. Rewriting always targets the
//! highest-index offending variable, so every rewrite strictly lowers the
//! exponent vector in reverse-lexicographic order and normal forms exist.
//!
//! Elements are sets of normal-form monomials (all coefficients are 1).

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

pub type Exponent = u16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("operands live in different rings")]
    RingMismatch,
    #[error("element is not a unit (constant term is 0)")]
    NotInvertible,
    #[error("monomial {0} is not in normal form for this ring")]
    NotNormalForm(String),
    #[error("monomial has {got} exponents, ring has {expected} variables")]
    Arity { expected: usize, got: usize },
    #[error("invalid ring description: {0}")]
    InvalidSpec(String),
    #[error("cannot parse class expression: {0}")]
    Parse(String),
}

/// Exponent vector, one entry per ring variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Monomial(SmallVec<[Exponent; 8]>);

impl Monomial {
    pub fn new(exponents: &[Exponent]) -> Self {
        Monomial(SmallVec::from_slice(exponents))
    }

    pub fn unit(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    /// `var^power` in a ring with `nvars` variables.
    pub fn power_of(nvars: usize, var: usize, power: Exponent) -> Self {
        let mut m = Self::unit(nvars);
        m.0[var] = power;
        m
    }

    pub fn exponents(&self) -> &[Exponent] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.len(), other.len());
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Pads or truncates the exponent vector to `nvars` entries.
    pub fn resized(&self, nvars: usize) -> Monomial {
        let mut v = self.0.clone();
        v.resize(nvars, 0);
        Monomial(v)
    }

    fn render(&self, names: &[String]) -> String {
        if self.is_unit() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (e, name) in self.0.iter().zip(names) {
            match e {
                0 => {}
                1 => parts.push(name.clone()),
                e => parts.push(format!("{name}^{e}")),
            }
        }
        parts.join("*")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    /// `name^truncation` is zero (plain mode) or rewritten (flag mode).
    pub truncation: Exponent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RingMode {
    PlainTruncation,
    /// `reductions[i]` lists the monomials of the polynomial that replaces
    /// `x_i^{t_i}`.
    FlagRewriting {
        reductions: Vec<Vec<Monomial>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    variables: Vec<Variable>,
    mode: RingMode,
}

impl RingSpec {
    pub fn truncated(variables: &[(&str, Exponent)]) -> Result<Arc<Self>, RingError> {
        let variables = Self::make_variables(variables)?;
        Ok(Arc::new(RingSpec {
            variables,
            mode: RingMode::PlainTruncation,
        }))
    }

    /// `Z2[name] / (name^truncation)`.
    pub fn single(name: &str, truncation: Exponent) -> Result<Arc<Self>, RingError> {
        Self::truncated(&[(name, truncation)])
    }

    pub fn flag(
        variables: &[(&str, Exponent)],
        reductions: Vec<Vec<Monomial>>,
    ) -> Result<Arc<Self>, RingError> {
        let variables = Self::make_variables(variables)?;
        if reductions.len() != variables.len() {
            return Err(RingError::InvalidSpec(format!(
                "{} reduction polynomials for {} variables",
                reductions.len(),
                variables.len()
            )));
        }
        let n = variables.len();
        for (i, red) in reductions.iter().enumerate() {
            let t = variables[i].truncation;
            let mut seen = HashSet::new();
            for m in red {
                if m.len() != n {
                    return Err(RingError::Arity {
                        expected: n,
                        got: m.len(),
                    });
                }
                if m.0[i + 1..].iter().any(|&e| e > 0) {
                    return Err(RingError::InvalidSpec(format!(
                        "reduction of {} uses a higher-index variable",
                        variables[i].name
                    )));
                }
                if m.0.iter().zip(&variables).any(|(&e, v)| e >= v.truncation) {
                    return Err(RingError::InvalidSpec(format!(
                        "reduction of {} contains a non-normal monomial",
                        variables[i].name
                    )));
                }
                if m.degree() != t as usize {
                    return Err(RingError::InvalidSpec(format!(
                        "reduction of {} is not homogeneous of degree {t}",
                        variables[i].name
                    )));
                }
                if !seen.insert(m.clone()) {
                    return Err(RingError::InvalidSpec(format!(
                        "reduction of {} repeats a monomial",
                        variables[i].name
                    )));
                }
            }
        }
        Ok(Arc::new(RingSpec {
            variables,
            mode: RingMode::FlagRewriting { reductions },
        }))
    }

    fn make_variables(variables: &[(&str, Exponent)]) -> Result<Vec<Variable>, RingError> {
        if variables.is_empty() {
            return Err(RingError::InvalidSpec("ring has no variables".into()));
        }
        let mut names = HashSet::new();
        variables
            .iter()
            .map(|&(name, truncation)| {
                if truncation < 1 {
                    return Err(RingError::InvalidSpec(format!(
                        "truncation of {name} must be at least 1"
                    )));
                }
                if !names.insert(name) {
                    return Err(RingError::InvalidSpec(format!("duplicate variable {name}")));
                }
                Ok(Variable {
                    name: name.to_string(),
                    truncation,
                })
            })
            .collect()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn mode(&self) -> &RingMode {
        &self.mode
    }

    pub fn nvars(&self) -> usize {
        self.variables.len()
    }

    pub fn truncation(&self, var: usize) -> Exponent {
        self.variables[var].truncation
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Highest degree carrying a normal-form monomial.
    pub fn top_degree(&self) -> usize {
        self.variables
            .iter()
            .map(|v| v.truncation as usize - 1)
            .sum()
    }

    /// The unique normal-form monomial of top degree.
    pub fn top_monomial(&self) -> Monomial {
        Monomial(self.variables.iter().map(|v| v.truncation - 1).collect())
    }

    pub fn is_normal(&self, m: &Monomial) -> bool {
        m.len() == self.nvars()
            && m.0
                .iter()
                .zip(&self.variables)
                .all(|(&e, v)| e < v.truncation)
    }

    /// All normal-form monomials, ordered by exponent vector.
    pub fn basis(&self) -> Vec<Monomial> {
        let mut out = vec![Monomial::unit(0)];
        for v in &self.variables {
            let mut next = Vec::with_capacity(out.len() * v.truncation as usize);
            for m in &out {
                for e in 0..v.truncation {
                    let mut ext = m.0.clone();
                    ext.push(e);
                    next.push(Monomial(ext));
                }
            }
            out = next;
        }
        out
    }

    pub fn basis_len(&self) -> usize {
        self.variables
            .iter()
            .map(|v| v.truncation as usize)
            .product()
    }

    pub fn normalizer(&self) -> Normalizer<'_> {
        Normalizer::new(self)
    }
}

/// Memoizing reduction of raw monomials to normal form. The cache lives as
/// long as the normalizer; nothing is cached on the ring itself.
pub struct Normalizer<'a> {
    ring: &'a RingSpec,
    top: usize,
    memo: HashMap<Monomial, Arc<[Monomial]>>,
}

impl<'a> Normalizer<'a> {
    pub fn new(ring: &'a RingSpec) -> Self {
        Normalizer {
            ring,
            top: ring.top_degree(),
            memo: HashMap::new(),
        }
    }

    /// Toggles the normal form of `m` into `acc`.
    pub fn reduce_into(&mut self, m: Monomial, acc: &mut HashSet<Monomial>) {
        if m.degree() > self.top {
            return;
        }
        let offending = (0..m.len())
            .rev()
            .find(|&i| m.0[i] >= self.ring.variables[i].truncation);
        let Some(i) = offending else {
            toggle(acc, m);
            return;
        };
        let RingMode::FlagRewriting { reductions } = &self.ring.mode else {
            return;
        };
        if let Some(hit) = self.memo.get(&m) {
            for u in hit.iter() {
                toggle(acc, u.clone());
            }
            return;
        }
        let mut quotient = m.clone();
        quotient.0[i] -= self.ring.variables[i].truncation;
        let mut local = HashSet::new();
        for u in &reductions[i] {
            self.reduce_into(quotient.mul(u), &mut local);
        }
        let result: Arc<[Monomial]> = local.into_iter().collect::<Vec<_>>().into();
        for u in result.iter() {
            toggle(acc, u.clone());
        }
        self.memo.insert(m, result);
    }

    pub fn reduce(&mut self, m: Monomial) -> BTreeSet<Monomial> {
        let mut acc = HashSet::new();
        self.reduce_into(m, &mut acc);
        acc.into_iter().collect()
    }

    pub fn cached(&self) -> usize {
        self.memo.len()
    }
}

fn toggle(acc: &mut HashSet<Monomial>, m: Monomial) {
    if !acc.remove(&m) {
        acc.insert(m);
    }
}

/// An element of a [`RingSpec`], always in normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassElement {
    ring: Arc<RingSpec>,
    support: BTreeSet<Monomial>,
}

impl ClassElement {
    pub fn zero(ring: &Arc<RingSpec>) -> Self {
        ClassElement {
            ring: ring.clone(),
            support: BTreeSet::new(),
        }
    }

    pub fn one(ring: &Arc<RingSpec>) -> Self {
        Self::from_monomials(ring, [Monomial::unit(ring.nvars())])
            .expect("unit monomial has the ring's arity")
    }

    /// The generator `x_var`, normalized (it may rewrite if its truncation is 1).
    pub fn variable(ring: &Arc<RingSpec>, var: usize) -> Self {
        Self::from_monomials(ring, [Monomial::power_of(ring.nvars(), var, 1)])
            .expect("generator has the ring's arity")
    }

    /// Sums arbitrary (not necessarily normal) monomials and normalizes.
    pub fn from_monomials<I>(ring: &Arc<RingSpec>, monomials: I) -> Result<Self, RingError>
    where
        I: IntoIterator<Item = Monomial>,
    {
        let mut norm = ring.normalizer();
        let mut acc = HashSet::new();
        for m in monomials {
            if m.len() != ring.nvars() {
                return Err(RingError::Arity {
                    expected: ring.nvars(),
                    got: m.len(),
                });
            }
            norm.reduce_into(m, &mut acc);
        }
        Ok(ClassElement {
            ring: ring.clone(),
            support: acc.into_iter().collect(),
        })
    }

    /// Parses expressions such as `1 + a + x1*x2^2`.
    pub fn parse(ring: &Arc<RingSpec>, text: &str) -> Result<Self, RingError> {
        let mut monomials = Vec::new();
        for term in text.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return Err(RingError::Parse(format!("empty term in {text:?}")));
            }
            if term == "0" {
                continue;
            }
            let mut m = Monomial::unit(ring.nvars());
            if term != "1" {
                for factor in term.split('*') {
                    let factor = factor.trim();
                    let (name, power) = match factor.split_once('^') {
                        Some((n, p)) => (
                            n.trim(),
                            p.trim().parse::<Exponent>().map_err(|_| {
                                RingError::Parse(format!("bad exponent in {factor:?}"))
                            })?,
                        ),
                        None => (factor, 1),
                    };
                    let idx = ring
                        .var_index(name)
                        .ok_or_else(|| RingError::Parse(format!("unknown variable {name:?}")))?;
                    m.0[idx] += power;
                }
            }
            monomials.push(m);
        }
        Self::from_monomials(ring, monomials)
    }

    pub fn ring(&self) -> &Arc<RingSpec> {
        &self.ring
    }

    pub fn support(&self) -> &BTreeSet<Monomial> {
        &self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.support.len() == 1 && self.support.iter().next().is_some_and(Monomial::is_unit)
    }

    pub fn constant_term(&self) -> bool {
        self.support.contains(&Monomial::unit(self.ring.nvars()))
    }

    fn same_ring(&self, other: &ClassElement) -> Result<(), RingError> {
        if Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring {
            Ok(())
        } else {
            Err(RingError::RingMismatch)
        }
    }

    pub fn add(&self, other: &ClassElement) -> Result<ClassElement, RingError> {
        self.same_ring(other)?;
        Ok(ClassElement {
            ring: self.ring.clone(),
            support: self
                .support
                .symmetric_difference(&other.support)
                .cloned()
                .collect(),
        })
    }

    pub fn mul(&self, other: &ClassElement) -> Result<ClassElement, RingError> {
        self.same_ring(other)?;
        let mut norm = self.ring.normalizer();
        Ok(self.mul_with(other, &mut norm))
    }

    fn mul_with(&self, other: &ClassElement, norm: &mut Normalizer<'_>) -> ClassElement {
        let top = self.ring.top_degree();
        let mut acc = HashSet::new();
        for a in &self.support {
            let da = a.degree();
            for b in &other.support {
                if da + b.degree() <= top {
                    norm.reduce_into(a.mul(b), &mut acc);
                }
            }
        }
        ClassElement {
            ring: self.ring.clone(),
            support: acc.into_iter().collect(),
        }
    }

    /// `self * sum(raw)` for arbitrary raw monomials, keeping only the
    /// components of degree at least `min_degree`. Reuses the caller's
    /// normalizer so its cache carries over between calls.
    pub fn mul_raw_above(
        &self,
        raw: &[Monomial],
        min_degree: usize,
        norm: &mut Normalizer<'_>,
    ) -> Result<ClassElement, RingError> {
        if !std::ptr::eq(norm.ring, &*self.ring) && *norm.ring != *self.ring {
            return Err(RingError::RingMismatch);
        }
        if let Some(bad) = raw.iter().find(|u| u.len() != self.ring.nvars()) {
            return Err(RingError::Arity {
                expected: self.ring.nvars(),
                got: bad.len(),
            });
        }
        let top = self.ring.top_degree();
        let mut acc = HashSet::new();
        for a in &self.support {
            let da = a.degree();
            for u in raw {
                let d = da + u.degree();
                if d >= min_degree && d <= top {
                    norm.reduce_into(a.mul(u), &mut acc);
                }
            }
        }
        Ok(ClassElement {
            ring: self.ring.clone(),
            support: acc.into_iter().collect(),
        })
    }

    pub fn pow(&self, mut n: u64) -> ClassElement {
        let mut norm = self.ring.normalizer();
        let mut base = self.clone();
        let mut acc = ClassElement::one(&self.ring);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_with(&base, &mut norm);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_with(&base, &mut norm);
            }
        }
        acc
    }

    /// Multiplicative inverse of a unit, built one degree at a time: the
    /// degree-d part of the inverse is the degree-d part of
    /// `(self - 1) * inverse_{<d}`.
    pub fn invert(&self) -> Result<ClassElement, RingError> {
        self.invert_up_to(self.ring.top_degree())
    }

    /// Components of degree `<= max_degree` of the inverse.
    pub fn invert_up_to(&self, max_degree: usize) -> Result<ClassElement, RingError> {
        if !self.constant_term() {
            return Err(RingError::NotInvertible);
        }
        let top = self.ring.top_degree().min(max_degree);
        let mut positive: Vec<Vec<&Monomial>> = vec![Vec::new(); top + 1];
        for m in &self.support {
            let d = m.degree();
            if d > 0 && d <= top {
                positive[d].push(m);
            }
        }
        let mut norm = self.ring.normalizer();
        let mut inverse: Vec<Vec<Monomial>> = Vec::with_capacity(top + 1);
        inverse.push(vec![Monomial::unit(self.ring.nvars())]);
        for d in 1..=top {
            let mut acc = HashSet::new();
            for j in 1..=d {
                for a in &positive[j] {
                    for u in &inverse[d - j] {
                        norm.reduce_into(a.mul(u), &mut acc);
                    }
                }
            }
            inverse.push(acc.into_iter().collect());
        }
        Ok(ClassElement {
            ring: self.ring.clone(),
            support: inverse.into_iter().flatten().collect(),
        })
    }

    /// Homogeneous part of degree `d`.
    pub fn component(&self, d: usize) -> ClassElement {
        ClassElement {
            ring: self.ring.clone(),
            support: self
                .support
                .iter()
                .filter(|m| m.degree() == d)
                .cloned()
                .collect(),
        }
    }

    pub fn coefficient(&self, m: &Monomial) -> Result<bool, RingError> {
        if m.len() != self.ring.nvars() {
            return Err(RingError::Arity {
                expected: self.ring.nvars(),
                got: m.len(),
            });
        }
        if !self.ring.is_normal(m) {
            return Err(RingError::NotNormalForm(m.render(&self.ring.names())));
        }
        Ok(self.support.contains(m))
    }

    /// Ring homomorphism into `target` sending variable `j` to `images[j]`.
    /// The caller is responsible for the images satisfying this ring's
    /// relations.
    pub fn substitute(
        &self,
        target: &Arc<RingSpec>,
        images: &[ClassElement],
    ) -> Result<ClassElement, RingError> {
        if images.len() != self.ring.nvars() {
            return Err(RingError::Arity {
                expected: self.ring.nvars(),
                got: images.len(),
            });
        }
        for img in images {
            if !(Arc::ptr_eq(img.ring(), target) || **img.ring() == **target) {
                return Err(RingError::RingMismatch);
            }
        }
        let mut norm = target.normalizer();
        let mut powers: Vec<Vec<ClassElement>> = images
            .iter()
            .map(|img| vec![ClassElement::one(target), img.clone()])
            .collect();
        let mut acc = ClassElement::zero(target);
        for m in &self.support {
            let mut term = ClassElement::one(target);
            for (j, &e) in m.0.iter().enumerate() {
                let e = e as usize;
                while powers[j].len() <= e {
                    let next = powers[j].last().unwrap().mul_with(&images[j], &mut norm);
                    powers[j].push(next);
                }
                if e > 0 {
                    term = term.mul_with(&powers[j][e], &mut norm);
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Degree-`d` part of the product of `factors`, expanded term by term so
    /// that only monomial tuples landing in degree `d` are ever reduced.
    pub fn product_component(
        factors: &[ClassElement],
        d: usize,
    ) -> Result<ClassElement, RingError> {
        let Some(first) = factors.first() else {
            return Err(RingError::InvalidSpec("empty product".into()));
        };
        for f in factors {
            first.same_ring(f)?;
        }
        let ring = first.ring.clone();
        let by_factor: Vec<Vec<&Monomial>> =
            factors.iter().map(|f| f.support.iter().collect()).collect();
        let max_deg: Vec<usize> = by_factor
            .iter()
            .map(|ms| ms.iter().map(|m| m.degree()).max().unwrap_or(0))
            .collect();
        // suffix_max[i] = sum of max degrees of factors i..
        let mut suffix_max = vec![0usize; factors.len() + 1];
        for i in (0..factors.len()).rev() {
            suffix_max[i] = suffix_max[i + 1] + max_deg[i];
        }
        let mut norm = ring.normalizer();
        let mut acc = HashSet::new();
        let mut stack: Vec<(usize, Monomial)> = vec![(0, Monomial::unit(ring.nvars()))];
        while let Some((i, partial)) = stack.pop() {
            let deg = partial.degree();
            if i == factors.len() {
                if deg == d {
                    norm.reduce_into(partial, &mut acc);
                }
                continue;
            }
            for m in &by_factor[i] {
                let nd = deg + m.degree();
                if nd <= d && nd + suffix_max[i + 1] >= d {
                    stack.push((i + 1, partial.mul(m)));
                }
            }
        }
        Ok(ClassElement {
            ring,
            support: acc.into_iter().collect(),
        })
    }
}

impl fmt::Display for ClassElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return write!(f, "0");
        }
        let names = self.ring.names();
        let mut terms: Vec<&Monomial> = self.support.iter().collect();
        terms.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| b.cmp(a)));
        let rendered: Vec<String> = terms.iter().map(|m| m.render(&names)).collect();
        write!(f, "{}", rendered.join(" + "))
    }
}

/// Parity of the binomial coefficient C(n, m): odd iff every binary digit
/// of `m` is at most the matching digit of `n`.
pub fn binom_parity(n: u64, m: u64) -> bool {
    m & !n == 0
}
