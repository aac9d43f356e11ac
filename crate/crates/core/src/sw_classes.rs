//! Stiefel–Whitney classes of projective spaces and the pairings on the
//! r=2 configuration model and on the flag manifold of orthogonal lines.
//!
//! The flag manifold `Λ(k,r)` of ordered r-tuples of pairwise orthogonal
//! lines in `R^k` is an iterated projective bundle: the i-th line lives in
//! the orthogonal complement `V_{i-1}` of the first `i-1` lines, a bundle
//! of rank `k-i+1`. Its mod-2 cohomology is generated by the first classes
//! `x_i` of the tautological lines subject to the projective-bundle
//! relations
//!
//! ```text
//! x_i^{k-i+1} = sum_{j=1}^{k-i+1} w_j(V_{i-1}) x_i^{k-i+1-j},
//! w(V_{i-1}) = prod_{m<i} (1 + x_m)^{-1}.
//! ```

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2_ring::{ClassElement, Exponent, Monomial, RingError, RingSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("flag manifold needs 1 <= r <= k, got k={k}, r={r}")]
    RankOutOfRange { k: usize, r: usize },
    #[error("{0}")]
    InvalidParameter(String),
}

/// `w(T RP^n) = (1 + α)^{n+1}` in `Z2[α]/(α^{n+1})`.
pub fn w_tangent_rp(n: usize, ring: &Arc<RingSpec>) -> Result<ClassElement, ClassError> {
    if n == 0 {
        return Err(ClassError::InvalidParameter("RP^n needs n >= 1".into()));
    }
    if ring.nvars() != 1 || ring.truncation(0) as usize != n + 1 {
        return Err(ClassError::InvalidParameter(format!(
            "w(T RP^{n}) lives in a one-variable ring truncated at degree {}",
            n + 1
        )));
    }
    let base = ClassElement::one(ring).add(&ClassElement::variable(ring, 0))?;
    Ok(base.pow(n as u64 + 1))
}

/// The cohomology ring `Z2[α]/(α^{n+1})` of `RP^n`.
pub fn rp_ring(n: usize) -> Result<Arc<RingSpec>, ClassError> {
    let t = Exponent::try_from(n + 1)
        .map_err(|_| ClassError::InvalidParameter(format!("RP^{n} is too large")))?;
    Ok(RingSpec::single("α", t)?)
}

pub fn wbar_tangent_rp(n: usize) -> Result<ClassElement, ClassError> {
    let ring = rp_ring(n)?;
    Ok(w_tangent_rp(n, &ring)?.invert()?)
}

/// `1 + α + .. + α^{n-1}` in the ring of `RP^n`.
pub fn wbar_closed_form(n: usize) -> Result<ClassElement, ClassError> {
    let ring = rp_ring(n)?;
    Ok(ClassElement::from_monomials(
        &ring,
        (0..n as Exponent).map(|e| Monomial::new(&[e])),
    )?)
}

/// Degree-`d` part of `w̄` of the Whitney sum of bundles with total classes
/// `classes`.
pub fn wbar_whitney_sum(classes: &[ClassElement], d: usize) -> Result<ClassElement, ClassError> {
    let (first, rest) = classes
        .split_first()
        .ok_or_else(|| ClassError::InvalidParameter("empty Whitney sum".into()))?;
    if let Some(bad) = classes.iter().find(|c| !c.constant_term()) {
        return Err(ClassError::InvalidParameter(format!(
            "total Stiefel–Whitney class must have constant term 1, got {bad}"
        )));
    }
    let mut total = first.clone();
    for c in rest {
        total = total.mul(c)?;
    }
    Ok(total.invert_up_to(d)?.component(d))
}

/// Cohomology of `Λ(k,r)` as a flag-rewriting ring in `x1..xr`.
#[derive(Clone, Debug)]
pub struct FlagRing {
    pub k: usize,
    pub r: usize,
    pub spec: Arc<RingSpec>,
}

impl FlagRing {
    pub fn build(k: usize, r: usize) -> Result<Self, ClassError> {
        if r == 0 || r > k {
            return Err(ClassError::RankOutOfRange { k, r });
        }
        if k > Exponent::MAX as usize {
            return Err(ClassError::InvalidParameter(format!("k={k} is too large")));
        }
        let names: Vec<String> = (1..=r).map(|i| format!("x{i}")).collect();
        let truncs: Vec<Exponent> = (1..=r).map(|i| (k - i + 1) as Exponent).collect();
        let mut reductions: Vec<Vec<Monomial>> = vec![Vec::new()];
        for i in 2..=r {
            // Ring of Λ(k, i-1), in which w(V_{i-1}) is computed.
            let vars: Vec<(&str, Exponent)> = names[..i - 1]
                .iter()
                .map(String::as_str)
                .zip(truncs.iter().copied())
                .collect();
            let sub = RingSpec::flag(&vars, reductions.clone())?;
            let mut lines = ClassElement::one(&sub);
            for m in 0..i - 1 {
                let factor = ClassElement::one(&sub).add(&ClassElement::variable(&sub, m))?;
                lines = lines.mul(&factor)?;
            }
            let t = truncs[i - 1];
            let complement = lines.invert_up_to(t as usize)?;
            let mut red: Vec<Monomial> = complement
                .support()
                .iter()
                .filter(|u| !u.is_unit())
                .map(|u| {
                    let mut e = u.resized(i).exponents().to_vec();
                    e[i - 1] = t - u.degree() as Exponent;
                    Monomial::new(&e)
                })
                .collect();
            red.sort();
            // widen the earlier relations to i variables
            for prev in reductions.iter_mut() {
                *prev = prev.iter().map(|m| m.resized(i)).collect();
            }
            reductions.push(red);
        }
        let vars: Vec<(&str, Exponent)> = names
            .iter()
            .map(String::as_str)
            .zip(truncs.iter().copied())
            .collect();
        let reductions = reductions
            .into_iter()
            .map(|ms| ms.into_iter().map(|m| m.resized(r)).collect())
            .collect();
        let spec = RingSpec::flag(&vars, reductions)?;
        Ok(FlagRing { k, r, spec })
    }

    /// `dim Λ(k,r) = sum_i (k - i) = kr - r(r+1)/2`.
    pub fn top_degree(&self) -> usize {
        self.spec.top_degree()
    }

    /// `kr - C(r,2)`, the dimension quoted alongside the nonvanishing claim.
    pub fn stated_degree(&self) -> usize {
        self.k * self.r - self.r * (self.r - 1) / 2
    }

    pub fn relation(&self, i: usize) -> ClassElement {
        let crate::gf2_ring::RingMode::FlagRewriting { reductions } = self.spec.mode() else {
            unreachable!("flag rings are built in rewriting mode")
        };
        ClassElement::from_monomials(&self.spec, reductions[i].iter().cloned())
            .expect("relations are stored in normal form")
    }

    /// Pullback of a class of `RP^k` along the i-th projection (α ↦ x_i).
    pub fn pullback(&self, class: &ClassElement, i: usize) -> Result<ClassElement, ClassError> {
        Ok(class.substitute(&self.spec, &[ClassElement::variable(&self.spec, i)])?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingMethod {
    Rewriting,
    ModulePushforward,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingReport {
    pub k: usize,
    pub r: usize,
    /// `kr - r(r+1)/2`, the dimension of `Λ(k,r)`.
    pub target_degree: usize,
    /// `kr - C(r,2)`; differs from `target_degree` by `r`.
    pub stated_degree: usize,
    pub class_description: String,
    pub value: bool,
    pub value_rewriting: bool,
    pub value_pushforward: bool,
    pub methods: Vec<PairingMethod>,
    pub agrees: bool,
}

/// Coefficient of the top monomial `x1^{k-1} .. xr^{k-r}` in
/// `prod_i w̄(T RP^k)(x_i)`, computed twice.
pub fn theorem2_pairing(k: usize, r: usize) -> Result<PairingReport, ClassError> {
    let flag = FlagRing::build(k, r)?;
    let wbar = wbar_tangent_rp(k)?;
    let bits: Vec<bool> = (0..=k)
        .map(|e| wbar.support().contains(&Monomial::new(&[e as Exponent])))
        .collect();
    let value_rewriting = pairing_by_rewriting(&flag, &bits)?;
    let value_pushforward = pairing_by_pushforward(k, r, &bits);
    Ok(PairingReport {
        k,
        r,
        target_degree: flag.top_degree(),
        stated_degree: flag.stated_degree(),
        class_description: format!("w̄(T(RP^{k})^{r}) restricted to Λ({k},{r})"),
        value: value_rewriting,
        value_rewriting,
        value_pushforward,
        methods: vec![PairingMethod::Rewriting, PairingMethod::ModulePushforward],
        agrees: value_rewriting == value_pushforward,
    })
}

/// Top coefficient of `prod_i f(x_i)`, `f = sum_a bits[a] α^a`, with the
/// product accumulated in normal form one factor at a time. Components too
/// low to reach the top degree after the remaining factors are dropped.
pub fn pairing_by_rewriting(flag: &FlagRing, bits: &[bool]) -> Result<bool, ClassError> {
    let ring = &flag.spec;
    let top = ring.top_degree();
    let n = ring.nvars();
    let powers: Vec<Exponent> = (0..bits.len())
        .filter(|&a| bits[a])
        .map(|a| a as Exponent)
        .collect();
    let max_power = powers.last().copied().unwrap_or(0) as usize;
    let mut norm = ring.normalizer();
    let mut partial = ClassElement::one(ring);
    for i in 0..n {
        let factor: Vec<Monomial> = powers
            .iter()
            .map(|&a| Monomial::power_of(n, i, a))
            .collect();
        let reachable = max_power * (n - i - 1);
        partial = partial.mul_raw_above(&factor, top.saturating_sub(reachable), &mut norm)?;
    }
    Ok(partial.coefficient(&ring.top_monomial())?)
}

/// Integrates `prod_i f(x_i)` by pushing forward one projective bundle at a
/// time. For the bundle `P(V_{j-1}) -> Λ(k,j-1)` of fibre dimension `k-j`,
/// `π_*(x_j^m) = s_{m-(k-j)}(V_{j-1})` with Segre class
/// `s(V_{j-1}) = prod_{m<j}(1 + x_m)`, i.e. an elementary symmetric
/// polynomial. The rewriting relations are never consulted.
pub fn pairing_by_pushforward(k: usize, r: usize, bits: &[bool]) -> bool {
    let powers: Vec<usize> = (0..bits.len()).filter(|&a| bits[a]).collect();
    // Represents prod_{i<=j} f(x_i) * g with g stored as raw monomials.
    let mut g: HashSet<Vec<u32>> = HashSet::from([vec![0u32; r]]);
    for j in (1..=r).rev() {
        let fibre = k - j;
        let mut next: HashSet<Vec<u32>> = HashSet::new();
        for m in &g {
            let e = m[j - 1] as usize;
            for &a in &powers {
                let Some(q) = (a + e).checked_sub(fibre) else {
                    continue;
                };
                if q > j - 1 {
                    continue;
                }
                for subset in subsets_of_size(j - 1, q) {
                    let mut out = m.clone();
                    out[j - 1] = 0;
                    for idx in subset {
                        out[idx] += 1;
                    }
                    if !next.remove(&out) {
                        next.insert(out);
                    }
                }
            }
        }
        g = next;
    }
    g.contains(&vec![0u32; r])
}

fn subsets_of_size(n: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(q);
    fn rec(start: usize, n: usize, q: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < q - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, q, cur, out);
            cur.pop();
        }
    }
    rec(0, n, q, &mut cur, &mut out);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct R2ModelCheck {
    pub k: usize,
    /// `(1+a)^k = 1` in `Z2[a]/(a^k)`.
    pub power_identity: bool,
    /// Coefficient of `a^{k-1}` in `(1+a)^{k-1}`.
    pub top_pairing: bool,
}

/// The r=2 model: `B(R^k,2)` retracts onto `RP^{k-1}` and `ψ̃` is the
/// tautological line bundle, so `w(ψ̃) = 1 + a` in `Z2[a]/(a^k)`.
pub fn theorem1_r2_check(k: usize) -> Result<R2ModelCheck, ClassError> {
    if k < 2 {
        return Err(ClassError::InvalidParameter(
            "the r=2 model needs k >= 2".into(),
        ));
    }
    let t = Exponent::try_from(k)
        .map_err(|_| ClassError::InvalidParameter(format!("k={k} is too large")))?;
    let ring = RingSpec::single("a", t)?;
    let w = ClassElement::one(&ring).add(&ClassElement::variable(&ring, 0))?;
    let power_identity = w.pow(k as u64).is_one();
    let top_pairing = w.pow(k as u64 - 1).coefficient(&Monomial::new(&[t - 1]))?;
    Ok(R2ModelCheck {
        k,
        power_identity,
        top_pairing,
    })
}
