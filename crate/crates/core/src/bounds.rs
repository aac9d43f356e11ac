//! Lower bounds on the ambient dimension of stably r-neighborly embeddings.
//!
//! Every bound is stored in strict form `Δ > B`; the non-strict trivial
//! bound `Δ >= (k+1)r` becomes `B = (k+1)r - 1`.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sw_classes::PairingReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("k and r must be at least 1 (got k={k}, r={r})")]
    NonPositive { k: u64, r: u64 },
    #[error("empty {0} range")]
    EmptyRange(&'static str),
    #[error("manifold selector must be R^k or RP^k")]
    UnsupportedManifold,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Manifold {
    Euclidean,
    Projective,
    Any,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSource {
    Trivial,
    Theorem1,
    Theorem2,
    Proposition1,
    Best,
}

/// Whether the bound is only claimed for stably neighborly embeddings or
/// also for every r-neighborly embedding outside an infinite-codimension set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundScope {
    StableOnly,
    ExtendsToGeneric,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub condition: String,
    pub satisfied: bool,
}

impl Hypothesis {
    fn new(condition: impl Into<String>, satisfied: bool) -> Self {
        Hypothesis {
            condition: condition.into(),
            satisfied,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub k: u64,
    pub r: u64,
    pub manifold: Manifold,
    pub source: BoundSource,
    /// For `source = Best`, the source that won.
    pub chosen: Option<BoundSource>,
    pub applicable: bool,
    /// `Δ > strict_lower_bound`.
    pub strict_lower_bound: Option<u64>,
    pub implied_min_dimension: Option<u64>,
    /// The value is the exact minimum, not only a lower bound.
    pub exact: bool,
    pub scope: BoundScope,
    pub hypotheses: Vec<Hypothesis>,
    pub pairing: Option<PairingReport>,
    /// Whether the computed characteristic-class pairing is nonzero.
    pub pairing_supports: Option<bool>,
}

impl BoundCertificate {
    fn new(
        k: u64,
        r: u64,
        manifold: Manifold,
        source: BoundSource,
        scope: BoundScope,
        hypotheses: Vec<Hypothesis>,
        strict: Option<u64>,
    ) -> Self {
        let applicable = hypotheses.iter().all(|h| h.satisfied);
        let strict = if applicable { strict } else { None };
        BoundCertificate {
            k,
            r,
            manifold,
            source,
            chosen: None,
            applicable,
            strict_lower_bound: strict,
            implied_min_dimension: strict.map(|b| b + 1),
            exact: false,
            scope,
            hypotheses,
            pairing: None,
            pairing_supports: None,
        }
    }

    /// Attaches a computed pairing and records whether it is nonzero.
    pub fn with_pairing(mut self, report: PairingReport) -> Self {
        self.pairing_supports = Some(report.agrees && report.value);
        self.pairing = Some(report);
        self
    }
}

pub fn is_power_of_two(n: u64) -> bool {
    n.is_power_of_two()
}

/// `d(r)`: number of ones in the binary expansion of `r`.
pub fn ones_count(r: u64) -> u32 {
    r.count_ones()
}

fn check(k: u64, r: u64) -> Result<(), BoundsError> {
    if k == 0 || r == 0 {
        Err(BoundsError::NonPositive { k, r })
    } else {
        Ok(())
    }
}

/// `Δ(k,r) >= (k+1)r`.
pub fn trivial_bound(k: u64, r: u64) -> Result<BoundCertificate, BoundsError> {
    check(k, r)?;
    Ok(BoundCertificate::new(
        k,
        r,
        Manifold::Any,
        BoundSource::Trivial,
        BoundScope::StableOnly,
        Vec::new(),
        Some((k + 1) * r - 1),
    ))
}

/// `Δ(R^k,r) > (k+1)r + (k-1)(r - d(r)) - 1` for `k` a power of two.
pub fn theorem1_bound(k: u64, r: u64) -> Result<BoundCertificate, BoundsError> {
    check(k, r)?;
    let value = (k + 1) * r + (k - 1) * (r - ones_count(r) as u64) - 1;
    Ok(BoundCertificate::new(
        k,
        r,
        Manifold::Euclidean,
        BoundSource::Theorem1,
        BoundScope::ExtendsToGeneric,
        vec![Hypothesis::new("k is a power of 2", is_power_of_two(k))],
        Some(value),
    ))
}

/// `Δ(RP^k,r) > (k+1)r + kr - r(r+1)/2 - 1` for `r <= k`, `k` a power of two.
pub fn theorem2_bound(k: u64, r: u64) -> Result<BoundCertificate, BoundsError> {
    check(k, r)?;
    let applicable = r <= k && is_power_of_two(k);
    let value = applicable.then(|| (k + 1) * r + k * r - r * (r + 1) / 2 - 1);
    Ok(BoundCertificate::new(
        k,
        r,
        Manifold::Projective,
        BoundSource::Theorem2,
        BoundScope::ExtendsToGeneric,
        vec![
            Hypothesis::new("k is a power of 2", is_power_of_two(k)),
            Hypothesis::new("r <= k", r <= k),
        ],
        value,
    ))
}

/// `Δ(RP^k,1) = 2k+1` for `k` a power of two. For `r != 1` the certificate
/// is inapplicable.
pub fn proposition1_value(k: u64, r: u64) -> Result<BoundCertificate, BoundsError> {
    check(k, r)?;
    let mut cert = BoundCertificate::new(
        k,
        r,
        Manifold::Projective,
        BoundSource::Proposition1,
        BoundScope::StableOnly,
        vec![
            Hypothesis::new("k is a power of 2", is_power_of_two(k)),
            Hypothesis::new("r = 1", r == 1),
        ],
        Some(2 * k),
    );
    cert.exact = cert.applicable;
    Ok(cert)
}

/// The strongest applicable bound for the manifold. Ties go to the source
/// with fewer hypotheses.
pub fn best_bound(k: u64, r: u64, manifold: Manifold) -> Result<BoundCertificate, BoundsError> {
    let mut candidates = vec![trivial_bound(k, r)?, theorem1_bound(k, r)?];
    match manifold {
        Manifold::Euclidean => {}
        Manifold::Projective => {
            candidates.push(theorem2_bound(k, r)?);
            candidates.push(proposition1_value(k, r)?);
        }
        Manifold::Any => return Err(BoundsError::UnsupportedManifold),
    }
    let winner = candidates
        .into_iter()
        .filter(|c| c.applicable)
        .max_by(|a, b| {
            a.strict_lower_bound
                .cmp(&b.strict_lower_bound)
                .then_with(|| b.hypotheses.len().cmp(&a.hypotheses.len()))
                .then_with(|| b.source.cmp(&a.source))
        })
        .expect("the trivial bound always applies");
    Ok(BoundCertificate {
        manifold,
        source: BoundSource::Best,
        chosen: Some(winner.source),
        ..winner
    })
}

/// `best_bound` over a grid, row-major in `(k, r)`.
pub fn bound_table(
    ks: RangeInclusive<u64>,
    rs: RangeInclusive<u64>,
    manifold: Manifold,
) -> Result<Vec<BoundCertificate>, BoundsError> {
    if ks.is_empty() {
        return Err(BoundsError::EmptyRange("k"));
    }
    if rs.is_empty() {
        return Err(BoundsError::EmptyRange("r"));
    }
    let pairs: Vec<(u64, u64)> = ks.flat_map(|k| rs.clone().map(move |r| (k, r))).collect();
    pairs
        .into_par_iter()
        .map(|(k, r)| best_bound(k, r, manifold))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_dim(c: &BoundCertificate) -> u64 {
        c.implied_min_dimension.unwrap()
    }

    #[test]
    fn ones_count_examples() {
        assert_eq!(ones_count(7), 3);
        assert_eq!(ones_count(8), 1);
        assert_eq!(ones_count(1), 1);
    }

    #[test]
    fn trivial_examples() {
        assert_eq!(min_dim(&trivial_bound(1, 3).unwrap()), 6);
        assert_eq!(min_dim(&trivial_bound(2, 2).unwrap()), 6);
        assert_eq!(min_dim(&trivial_bound(1, 1).unwrap()), 2);
        assert!(trivial_bound(1, 1).unwrap().hypotheses.is_empty());
    }

    #[test]
    fn theorem1_examples() {
        let c = theorem1_bound(2, 2).unwrap();
        assert_eq!(c.strict_lower_bound, Some(6));
        assert_eq!(min_dim(&c), 7);
        assert_eq!(theorem1_bound(4, 4).unwrap().strict_lower_bound, Some(28));
        let c = theorem1_bound(3, 2).unwrap();
        assert!(!c.applicable);
        assert_eq!(c.strict_lower_bound, None);
        assert!(c.hypotheses.iter().any(|h| !h.satisfied));
    }

    #[test]
    fn theorem2_examples() {
        let c = theorem2_bound(4, 2).unwrap();
        assert_eq!(c.strict_lower_bound, Some(14));
        assert_eq!(min_dim(&c), 15);
        assert_eq!(theorem2_bound(8, 3).unwrap().strict_lower_bound, Some(44));
        assert!(!theorem2_bound(4, 5).unwrap().applicable);
        assert!(!theorem2_bound(6, 2).unwrap().applicable);
    }

    #[test]
    fn proposition1_examples() {
        let c = proposition1_value(2, 1).unwrap();
        assert_eq!(min_dim(&c), 5);
        assert!(c.exact);
        assert_eq!(min_dim(&proposition1_value(8, 1).unwrap()), 17);
        assert!(!proposition1_value(6, 1).unwrap().applicable);
        assert!(!proposition1_value(4, 2).unwrap().applicable);
    }

    #[test]
    fn best_examples() {
        let c = best_bound(2, 2, Manifold::Euclidean).unwrap();
        assert_eq!((min_dim(&c), c.chosen), (7, Some(BoundSource::Theorem1)));
        let c = best_bound(1, 5, Manifold::Euclidean).unwrap();
        assert_eq!((min_dim(&c), c.chosen), (10, Some(BoundSource::Trivial)));
        let c = best_bound(4, 1, Manifold::Projective).unwrap();
        assert_eq!(
            (min_dim(&c), c.chosen),
            (9, Some(BoundSource::Proposition1))
        );
        assert_eq!(min_dim(&theorem2_bound(4, 1).unwrap()), 8);
        assert!(best_bound(0, 1, Manifold::Euclidean).is_err());
        assert!(best_bound(1, 1, Manifold::Any).is_err());
    }

    #[test]
    fn table_examples() {
        let t = bound_table(1..=1, 1..=4, Manifold::Euclidean).unwrap();
        assert_eq!(t.iter().map(min_dim).collect::<Vec<_>>(), vec![2, 4, 6, 8]);
        let t = bound_table(2..=2, 2..=2, Manifold::Euclidean).unwrap();
        assert_eq!(min_dim(&t[0]), 7);
        let t = bound_table(4..=4, 4..=4, Manifold::Euclidean).unwrap();
        assert_eq!(min_dim(&t[0]), 29);
        #[allow(clippy::reversed_empty_ranges)]
        let empty = bound_table(3..=2, 1..=1, Manifold::Euclidean);
        assert_eq!(empty, Err(BoundsError::EmptyRange("k")));
    }
}
