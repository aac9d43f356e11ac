//! Iterated-antipodal point configurations and the rank of the span of
//! tangent spaces plus centered positions at `r` points of an embedding.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::moment::{self, FourierCurve, MomentError};

pub const DEFAULT_EPSILON: f64 = 0.4;
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-9;
const FRAME_TOLERANCE: f64 = 1e-10;
const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error("frame at point {point} has smallest singular value {smallest:e}")]
    DegenerateFrame { point: usize, smallest: f64 },
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

fn invalid(msg: impl Into<String>) -> RankError {
    RankError::InvalidParameter(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub k: usize,
    pub r: usize,
    pub points: Vec<Vec<f64>>,
    pub labels: Option<Vec<String>>,
    pub min_distance: f64,
}

impl Configuration {
    fn new(k: usize, points: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Self {
        let min_distance = min_pairwise_distance(&points);
        Configuration {
            k,
            r: points.len(),
            points,
            labels,
            min_distance,
        }
    }
}

/// Infinity for fewer than two points.
pub fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            best = best.min(d);
        }
    }
    best
}

/// Lower bound on the minimum distance of `L(2^s)`: leaves that split at
/// depth `j` are at least `2ε^j - 2(ε^{j+1} + ..)` apart.
pub fn separation_lower_bound(epsilon: f64, s: u32) -> f64 {
    if s == 0 {
        return f64::INFINITY;
    }
    2.0 * epsilon.powi(s as i32 - 1) * (1.0 - 2.0 * epsilon) / (1.0 - epsilon)
}

fn check_epsilon(epsilon: f64) -> Result<(), RankError> {
    if epsilon > 0.0 && epsilon <= 0.5 {
        Ok(())
    } else {
        Err(invalid(format!("epsilon {epsilon} is outside (0, 1/2]")))
    }
}

fn check_direction(u: &[f64], k: usize) -> Result<(), RankError> {
    if u.len() != k {
        return Err(invalid(format!(
            "direction has {} components, expected {k}",
            u.len()
        )));
    }
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(invalid(format!("direction {u:?} has norm {norm}")));
    }
    Ok(())
}

/// Leaves of the depth-`s` antipodal tree. `directions` lists one unit
/// vector per internal node in breadth-first order (root first, then the
/// `+` child before the `-` child). Labels record the path: `A` followed by
/// `1` for `+` and `2` for `-` at each level.
pub fn build_lr_configuration(
    k: usize,
    s: u32,
    epsilon: f64,
    directions: &[Vec<f64>],
) -> Result<Configuration, RankError> {
    if k < 2 {
        return Err(invalid("k must be at least 2"));
    }
    if s < 1 {
        return Err(invalid("s must be at least 1"));
    }
    let (points, labels) = lr_leaves(k, s, epsilon, directions, "A")?;
    Ok(Configuration::new(k, points, Some(labels)))
}

fn lr_leaves(
    k: usize,
    s: u32,
    epsilon: f64,
    directions: &[Vec<f64>],
    prefix: &str,
) -> Result<(Vec<Vec<f64>>, Vec<String>), RankError> {
    check_epsilon(epsilon)?;
    if s > 20 {
        return Err(invalid("s must be at most 20"));
    }
    let internal = (1usize << s) - 1;
    if directions.len() != internal {
        return Err(invalid(format!(
            "depth {s} needs {internal} directions, got {}",
            directions.len()
        )));
    }
    for u in directions {
        check_direction(u, k)?;
    }
    let mut level = vec![(vec![0.0; k], prefix.to_string())];
    let mut next_dir = directions.iter();
    for depth in 0..s {
        let radius = epsilon.powi(depth as i32);
        let mut children = Vec::with_capacity(level.len() * 2);
        for (center, label) in &level {
            let u = next_dir.next().expect("direction count checked");
            for (sign, digit) in [(1.0, '1'), (-1.0, '2')] {
                let p = center
                    .iter()
                    .zip(u)
                    .map(|(c, x)| c + sign * radius * x)
                    .collect();
                children.push((p, format!("{label}{digit}")));
            }
        }
        level = children;
    }
    Ok(level.into_iter().unzip())
}

/// Exponents `t_1 > .. > t_d` with `r = sum 2^{t_i}`.
pub fn binary_summands(r: usize) -> Vec<u32> {
    (0..usize::BITS)
        .rev()
        .filter(|&t| r >> t & 1 == 1)
        .collect()
}

/// Concatenation of `L(2^{t_i})` for the binary summands of `r`, the `i`-th
/// translated by `(3i, 0, ..)`. `directions` is the flat list for all
/// summands in order, `r - d(r)` vectors in total.
pub fn build_composite_configuration(
    k: usize,
    r: usize,
    epsilon: f64,
    directions: &[Vec<f64>],
) -> Result<Configuration, RankError> {
    if k < 2 {
        return Err(invalid("k must be at least 2"));
    }
    if r < 1 {
        return Err(invalid("r must be at least 1"));
    }
    check_epsilon(epsilon)?;
    let summands = binary_summands(r);
    let needed = r - summands.len();
    if directions.len() != needed {
        return Err(invalid(format!(
            "r = {r} needs {needed} directions, got {}",
            directions.len()
        )));
    }
    let mut points = Vec::with_capacity(r);
    let mut labels = Vec::with_capacity(r);
    let mut rest = directions;
    for (i, &t) in summands.iter().enumerate() {
        let letter = char::from(b'A' + (i % 26) as u8).to_string();
        let shift = 3.0 * i as f64;
        let (cluster, names) = if t == 0 {
            (vec![vec![0.0; k]], vec![letter])
        } else {
            let count = (1usize << t) - 1;
            let (mine, tail) = rest.split_at(count);
            rest = tail;
            lr_leaves(k, t, epsilon, mine, &letter)?
        };
        for mut p in cluster {
            p[0] += shift;
            points.push(p);
        }
        labels.extend(names);
    }
    Ok(Configuration::new(k, points, Some(labels)))
}

/// Uniform random unit vectors in `R^k`.
pub fn random_directions<R: Rng>(count: usize, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let n2: f64 = v.iter().map(|x| x * x).sum();
            if n2 > 1e-4 && n2 <= 1.0 {
                let n = n2.sqrt();
                break v.into_iter().map(|x| x / n).collect();
            }
        })
        .collect()
}

/// Positions and tangent frames of an embedding at `r` points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetData {
    pub n: usize,
    pub positions: Vec<Vec<f64>>,
    /// `frames[i]` holds the `k` tangent vectors at point `i`.
    pub frames: Vec<Vec<Vec<f64>>>,
}

impl JetData {
    pub fn new(positions: Vec<Vec<f64>>, frames: Vec<Vec<Vec<f64>>>) -> Result<Self, RankError> {
        let n = positions.first().map_or(0, Vec::len);
        if positions.is_empty() {
            return Err(RankError::Shape("no points".into()));
        }
        if frames.len() != positions.len() {
            return Err(RankError::Shape(format!(
                "{} positions but {} frames",
                positions.len(),
                frames.len()
            )));
        }
        let k = frames[0].len();
        for (i, (p, f)) in positions.iter().zip(&frames).enumerate() {
            if p.len() != n || f.len() != k || f.iter().any(|v| v.len() != n) {
                return Err(RankError::Shape(format!(
                    "point {i} does not match dimensions N={n}, k={k}"
                )));
            }
            let s = linalg::singular_values(f, n);
            let smallest = if s.len() < k { 0.0 } else { s[k - 1] };
            if k == 0 || smallest <= FRAME_TOLERANCE {
                return Err(RankError::DegenerateFrame { point: i, smallest });
            }
        }
        Ok(JetData {
            n,
            positions,
            frames,
        })
    }

    pub fn k(&self) -> usize {
        self.frames[0].len()
    }

    pub fn r(&self) -> usize {
        self.positions.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    pub k: usize,
    pub r: usize,
    pub rank: usize,
    pub required: usize,
    pub in_omega: bool,
    pub singular_values: Vec<f64>,
    pub rank_tolerance: f64,
    /// `σ_1 / σ_required`; `None` when fewer values exist or it vanishes.
    pub condition: Option<f64>,
}

/// Rank of the `kr` frame vectors together with the `r - 1` differences
/// `I(x_i) - centroid`, against `kr + r - 1`.
pub fn tau_rank(
    jet: &JetData,
    k: usize,
    r: usize,
    rank_tolerance: f64,
) -> Result<TauReport, RankError> {
    if jet.k() != k || jet.r() != r {
        return Err(RankError::Shape(format!(
            "jet has k={}, r={}; expected k={k}, r={r}",
            jet.k(),
            jet.r()
        )));
    }
    let n = jet.n;
    let centroid: Vec<f64> = (0..n)
        .map(|c| jet.positions.iter().map(|p| p[c]).sum::<f64>() / r as f64)
        .collect();
    // Frame rows are scaled to unit length. Centroid offsets keep their
    // length so a collapsing configuration still shows a small singular value.
    let mut rows: Vec<Vec<f64>> = jet
        .frames
        .iter()
        .flatten()
        .map(|f| {
            let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
            f.iter().map(|x| x / norm).collect()
        })
        .collect();
    for p in &jet.positions[..r - 1] {
        rows.push(p.iter().zip(&centroid).map(|(a, b)| a - b).collect());
    }
    let values = linalg::singular_values(&rows, n);
    let rank = linalg::numerical_rank(&values, rank_tolerance);
    let required = k * r + r - 1;
    let condition = match values.get(required.wrapping_sub(1)) {
        Some(&s) if required >= 1 && s > 0.0 => Some(values[0] / s),
        _ => None,
    };
    Ok(TauReport {
        k,
        r,
        rank,
        required,
        in_omega: rank < required,
        singular_values: values,
        rank_tolerance,
        condition,
    })
}

/// 1-jet of a closed curve at the given parameters.
pub fn curve_jet(curve: &FourierCurve, angles: &[f64]) -> Result<JetData, RankError> {
    JetData::new(
        angles.iter().map(|&a| curve.point(a)).collect(),
        angles.iter().map(|&a| vec![curve.velocity(a)]).collect(),
    )
}

pub fn moment_jet(r: usize, angles: &[f64]) -> Result<JetData, RankError> {
    curve_jet(&FourierCurve::moment(r), angles)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericitySummary {
    /// Sampling gives evidence about the rank-drop locus, never membership.
    pub evidence: String,
    pub r: usize,
    pub trials: usize,
    pub seed: u64,
    pub min_separation: f64,
    pub full_rank: usize,
    pub fraction_full_rank: f64,
    pub omega_hits: Vec<usize>,
    /// `None` if some sample had no defined condition number.
    pub worst_condition: Option<f64>,
    pub worst_trial: usize,
    pub worst_angles: Vec<f64>,
}

/// Ranks at `trials` random angle sets with gaps at least `2π/(8r)`.
pub fn genericity_sample(
    curve: &FourierCurve,
    r: usize,
    trials: usize,
    seed: u64,
    rank_tolerance: f64,
) -> Result<GenericitySummary, RankError> {
    if r == 0 || trials == 0 {
        return Err(invalid("need r >= 1 and trials >= 1"));
    }
    let sep = moment::default_separation(r);
    let reports: Vec<(Vec<f64>, TauReport)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = moment::trial_rng(seed, t as u64);
            let angles = moment::separated_angles(r, sep, &mut rng)?;
            let report = tau_rank(&curve_jet(curve, &angles)?, 1, r, rank_tolerance)?;
            Ok((angles, report))
        })
        .collect::<Result<_, RankError>>()?;
    let omega_hits: Vec<usize> = reports
        .iter()
        .enumerate()
        .filter(|(_, (_, rep))| rep.in_omega)
        .map(|(i, _)| i)
        .collect();
    let (worst_trial, (worst_angles, worst)) = reports
        .iter()
        .enumerate()
        .max_by(|a, b| {
            let key = |rep: &TauReport| rep.condition.unwrap_or(f64::INFINITY);
            key(&a.1 .1).total_cmp(&key(&b.1 .1))
        })
        .expect("trials >= 1");
    let full_rank = trials - omega_hits.len();
    Ok(GenericitySummary {
        evidence: "Monte-Carlo evidence from random samples; not a proof of genericity".into(),
        r,
        trials,
        seed,
        min_separation: sep,
        full_rank,
        fraction_full_rank: full_rank as f64 / trials as f64,
        worst_condition: worst.condition,
        worst_trial,
        worst_angles: worst_angles.clone(),
        omega_hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn e(k: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; k];
        v[i] = 1.0;
        v
    }

    #[test]
    fn single_split() {
        let c = build_lr_configuration(2, 1, 0.4, &[e(2, 0)]).unwrap();
        assert_eq!(c.points, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
        assert_eq!(c.labels.unwrap(), vec!["A1", "A2"]);
        assert_eq!(c.min_distance, 2.0);
    }

    #[test]
    fn two_levels() {
        let dirs = [e(2, 0), e(2, 1), e(2, 1)];
        let c = build_lr_configuration(2, 2, 0.4, &dirs).unwrap();
        let want = [[1.0, 0.4], [1.0, -0.4], [-1.0, 0.4], [-1.0, -0.4]];
        for (p, w) in c.points.iter().zip(want) {
            assert!((p[0] - w[0]).abs() < 1e-15 && (p[1] - w[1]).abs() < 1e-15);
        }
        assert_eq!(c.labels.unwrap(), vec!["A11", "A12", "A21", "A22"]);
        let c = build_lr_configuration(2, 2, 0.5, &dirs).unwrap();
        assert!((c.min_distance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_lr_configuration(2, 1, 0.4, &[vec![1.0, 1.0]]).is_err());
        assert!(build_lr_configuration(2, 1, 0.6, &[e(2, 0)]).is_err());
        assert!(build_lr_configuration(2, 1, 0.0, &[e(2, 0)]).is_err());
        assert!(build_lr_configuration(1, 1, 0.4, &[vec![1.0]]).is_err());
        assert!(build_lr_configuration(2, 2, 0.4, &[e(2, 0)]).is_err());
    }

    #[test]
    fn composites() {
        let c = build_composite_configuration(2, 3, 0.4, &[e(2, 0)]).unwrap();
        assert_eq!(
            c.points,
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![3.0, 0.0]]
        );
        assert_eq!(c.labels.as_ref().unwrap(), &vec!["A1", "A2", "B"]);
        let two = build_composite_configuration(2, 2, 0.4, &[e(2, 0)]).unwrap();
        assert_eq!(
            two.points,
            build_lr_configuration(2, 1, 0.4, &[e(2, 0)])
                .unwrap()
                .points
        );
        let c = build_composite_configuration(2, 5, 0.4, &[e(2, 0), e(2, 1), e(2, 1)]).unwrap();
        assert!(c.points[..4].iter().all(|p| p[0].abs() <= 1.0 + 1e-12));
        assert_eq!(c.points[4], vec![3.0, 0.0]);
        assert_eq!(binary_summands(6), vec![2, 1]);
    }

    #[test]
    fn separation_bound_holds() {
        let mut rng = moment::trial_rng(5, 0);
        for s in 1..=5 {
            for eps in [0.25, 0.4, 0.45] {
                let dirs = random_directions((1 << s) - 1, 3, &mut rng);
                let c = build_lr_configuration(3, s, eps, &dirs).unwrap();
                assert!(c.min_distance >= separation_lower_bound(eps, s) - 1e-12);
            }
        }
    }

    #[test]
    fn moment_rank_two_points() {
        let rep = tau_rank(
            &moment_jet(2, &[0.0, PI / 2.0]).unwrap(),
            1,
            2,
            DEFAULT_RANK_TOLERANCE,
        )
        .unwrap();
        assert_eq!((rep.rank, rep.required, rep.in_omega), (3, 3, false));
    }

    #[test]
    fn single_point_rank_is_k() {
        let jet = JetData::new(vec![vec![0.0; 4]], vec![vec![e(4, 0), e(4, 2)]]).unwrap();
        let rep = tau_rank(&jet, 2, 1, DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!((rep.rank, rep.required), (2, 2));
    }

    #[test]
    fn collapsed_jet_is_in_omega() {
        let p = vec![0.3, 0.1, -0.2, 0.9];
        let f = vec![e(4, 1)];
        let jet =
            JetData::new(vec![p.clone(), p.clone(), p], vec![f.clone(), f.clone(), f]).unwrap();
        let rep = tau_rank(&jet, 1, 3, DEFAULT_RANK_TOLERANCE).unwrap();
        assert!(rep.in_omega);
        assert_eq!(rep.rank, 1);
    }

    #[test]
    fn degenerate_frame_rejected() {
        let err = JetData::new(vec![vec![0.0; 3]], vec![vec![e(3, 0), e(3, 0)]]).unwrap_err();
        assert!(matches!(err, RankError::DegenerateFrame { point: 0, .. }));
    }

    #[test]
    fn near_collision_reports_conditioning() {
        let rep = tau_rank(
            &moment_jet(2, &[0.0, 1e-4]).unwrap(),
            1,
            2,
            DEFAULT_RANK_TOLERANCE,
        )
        .unwrap();
        assert!(rep.condition.unwrap() > 1e6);
    }

    #[test]
    fn sample_is_deterministic() {
        let curve = FourierCurve::moment(3);
        let a = genericity_sample(&curve, 3, 1, 9, DEFAULT_RANK_TOLERANCE).unwrap();
        let b = genericity_sample(&curve, 3, 1, 9, DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fraction_full_rank, 1.0);
    }
}
