//! Supporting-hyperplane certificates for the moment curve
//! `α ↦ (sin α, cos α, .., sin rα, cos rα)` and its perturbations.
//!
//! A hyperplane `ℓ·y + c = 0` pulled back to the circle is a trigonometric
//! polynomial `T(α) = ℓ·I(α) + c`. It supports the curve at the touch set
//! exactly when `T >= 0` with zeros only at the prescribed angles.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("angles {first} and {second} are closer than {tol} rad")]
    CoincidentAngles { first: f64, second: f64, tol: f64 },
    #[error("support system has a {nullity}-dimensional null space (need exactly 1); spectrum {singular_values:?}")]
    Degenerate {
        nullity: usize,
        singular_values: Vec<f64>,
    },
    #[error("{0}")]
    InvalidParameter(String),
}

/// `c0 + sum_m (p_m sin mα + q_m cos mα)`; `coeffs[m-1] = [p_m, q_m]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub c0: f64,
    pub coeffs: Vec<[f64; 2]>,
}

impl TrigPoly {
    pub fn zero(degree: usize) -> Self {
        TrigPoly {
            c0: 0.0,
            coeffs: vec![[0.0, 0.0]; degree],
        }
    }

    pub fn sin(m: usize) -> Self {
        let mut t = Self::zero(m);
        t.coeffs[m - 1][0] = 1.0;
        t
    }

    pub fn cos(m: usize) -> Self {
        let mut t = Self::zero(m);
        t.coeffs[m - 1][1] = 1.0;
        t
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn padded(&self, degree: usize) -> Self {
        let mut t = self.clone();
        if t.coeffs.len() < degree {
            t.coeffs.resize(degree, [0.0, 0.0]);
        }
        t
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        self.eval_derivative(alpha, 0)
    }

    /// Value of the `order`-th derivative (0, 1 or 2) at `alpha`.
    pub fn eval_derivative(&self, alpha: f64, order: u8) -> f64 {
        let mut acc = if order == 0 { self.c0 } else { 0.0 };
        for (i, [p, q]) in self.coeffs.iter().enumerate() {
            let m = (i + 1) as f64;
            let (s, c) = (m * alpha).sin_cos();
            acc += match order {
                0 => p * s + q * c,
                1 => m * (p * c - q * s),
                _ => -m * m * (p * s + q * c),
            };
        }
        acc
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &TrigPoly, factor: f64) -> TrigPoly {
        let degree = self.degree().max(other.degree());
        let mut out = self.padded(degree);
        out.c0 += factor * other.c0;
        for (slot, [p, q]) in out.coeffs.iter_mut().zip(&other.coeffs) {
            slot[0] += factor * p;
            slot[1] += factor * q;
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> TrigPoly {
        TrigPoly::zero(0).add_scaled(self, factor)
    }

    /// Coefficients of `α ↦ T(α - β)`.
    pub fn rotated(&self, beta: f64) -> TrigPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &[p, q])| {
                let (s, c) = (((i + 1) as f64) * beta).sin_cos();
                [p * c + q * s, q * c - p * s]
            })
            .collect();
        TrigPoly {
            c0: self.c0,
            coeffs,
        }
    }

    /// `(c0, p1, q1, .., pd, qd)`.
    pub fn coefficient_vector(&self) -> Vec<f64> {
        std::iter::once(self.c0)
            .chain(self.coeffs.iter().flat_map(|pq| pq.iter().copied()))
            .collect()
    }

    pub fn cosine_similarity(&self, other: &TrigPoly) -> f64 {
        let d = self.degree().max(other.degree());
        let a = self.padded(d).coefficient_vector();
        let b = other.padded(d).coefficient_vector();
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }
}

/// A closed curve in `R^N` with trigonometric-polynomial coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCurve {
    pub coords: Vec<TrigPoly>,
}

impl FourierCurve {
    /// `N = 2r`, coordinates `sin α, cos α, .., sin rα, cos rα`.
    pub fn moment(r: usize) -> Self {
        let coords = (1..=r)
            .flat_map(|m| [TrigPoly::sin(m), TrigPoly::cos(m)])
            .map(|t| t.padded(r))
            .collect();
        FourierCurve { coords }
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn max_harmonic(&self) -> usize {
        self.coords.iter().map(TrigPoly::degree).max().unwrap_or(0)
    }

    pub fn point(&self, alpha: f64) -> Vec<f64> {
        self.coords.iter().map(|t| t.eval(alpha)).collect()
    }

    pub fn velocity(&self, alpha: f64) -> Vec<f64> {
        self.coords
            .iter()
            .map(|t| t.eval_derivative(alpha, 1))
            .collect()
    }

    pub fn acceleration(&self, alpha: f64) -> Vec<f64> {
        self.coords
            .iter()
            .map(|t| t.eval_derivative(alpha, 2))
            .collect()
    }

    /// Adds independent uniform noise in `[-delta, delta]` to every
    /// coefficient, with coordinates widened to `harmonics` harmonics.
    pub fn perturbed<R: Rng>(&self, delta: f64, harmonics: usize, rng: &mut R) -> Self {
        let width = harmonics.max(self.max_harmonic());
        let coords = self
            .coords
            .iter()
            .map(|t| {
                let mut t = t.padded(width);
                t.c0 += delta * rng.random_range(-1.0..=1.0);
                for pq in t.coeffs.iter_mut() {
                    pq[0] += delta * rng.random_range(-1.0..=1.0);
                    pq[1] += delta * rng.random_range(-1.0..=1.0);
                }
                t
            })
            .collect();
        FourierCurve { coords }
    }
}

pub fn moment_embed(alpha: f64, r: usize) -> Vec<f64> {
    (1..=r)
        .flat_map(|m| {
            let (s, c) = (m as f64 * alpha).sin_cos();
            [s, c]
        })
        .collect()
}

/// The affine function `y ↦ normal·y + offset` on `R^N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFunctional {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl AffineFunctional {
    /// `T(α) = normal·I(α) + offset` as a trigonometric polynomial.
    pub fn pull_back(&self, curve: &FourierCurve) -> TrigPoly {
        let mut t = TrigPoly {
            c0: self.offset,
            coeffs: vec![[0.0, 0.0]; curve.max_harmonic()],
        };
        for (coord, &w) in curve.coords.iter().zip(&self.normal) {
            t = t.add_scaled(coord, w);
        }
        t
    }

    pub fn negated(&self) -> Self {
        AffineFunctional {
            normal: self.normal.iter().map(|x| -x).collect(),
            offset: -self.offset,
        }
    }

    /// On the moment curve a trigonometric polynomial of degree `<= r` is
    /// itself a functional: `sin mα`, `cos mα` are coordinates `2m-1`, `2m`.
    pub fn from_moment_trig(t: &TrigPoly, r: usize) -> Self {
        let t = t.padded(r);
        AffineFunctional {
            normal: t.coeffs.iter().flat_map(|pq| pq.iter().copied()).collect(),
            offset: t.c0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Touch and derivative residuals.
    pub tol_eq: f64,
    /// Minimum second derivative at a touch point.
    pub tol_curv: f64,
    /// Minimum value away from the touch points.
    pub tol_pos: f64,
    /// Minimum separation of distinct angles.
    pub tol_sep: f64,
    /// Depth of the quadratic well excluded around each touch point.
    pub tol_zero: f64,
    /// Rounding slack granted to the positivity check.
    pub pos_slack: f64,
    /// Relative singular-value threshold for the null-space dimension.
    pub null_rel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_eq: 1e-10,
            tol_curv: 1e-12,
            tol_pos: 0.0,
            tol_sep: 1e-6,
            tol_zero: 1e-10,
            pos_slack: 1e-14,
            null_rel_tol: 1e-14,
        }
    }
}

/// Reduces to `[0, 2π)`, sorts, and rejects near-coincident angles.
pub fn normalize_angles(angles: &[f64], tol_sep: f64) -> Result<Vec<f64>, MomentError> {
    if angles.is_empty() {
        return Err(MomentError::InvalidParameter(
            "need at least one angle".into(),
        ));
    }
    if let Some(bad) = angles.iter().find(|a| !a.is_finite()) {
        return Err(MomentError::InvalidParameter(format!(
            "angle {bad} is not finite"
        )));
    }
    let mut sorted: Vec<f64> = angles.iter().map(|a| a.rem_euclid(TAU)).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n > 1 {
        for i in 0..n {
            let a = sorted[i];
            let b = sorted[(i + 1) % n];
            let gap = if i + 1 == n { b + TAU - a } else { b - a };
            if gap < tol_sep {
                return Err(MomentError::CoincidentAngles {
                    first: a,
                    second: b,
                    tol: tol_sep,
                });
            }
        }
    }
    Ok(sorted)
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Fourier expansion of `prod_i sin^2((α - α_i)/2)`, by convolving the
/// factors `1/2 - cos(α - α_i)/2` in complex exponential form.
pub fn build_support_product(angles: &[f64], tol_sep: f64) -> Result<TrigPoly, MomentError> {
    let sorted = normalize_angles(angles, tol_sep)?;
    let r = sorted.len();
    // spectrum[m + r] holds the coefficient of e^{imα}, m in -r..=r
    let mut re = vec![0.0; 2 * r + 1];
    let mut im = vec![0.0; 2 * r + 1];
    re[r] = 1.0;
    let mut width = 0;
    for &a in &sorted {
        let (s, c) = a.sin_cos();
        // factor: 1/2 e^0 - 1/4 e^{-ia} e^{iα} - 1/4 e^{ia} e^{-iα}
        let taps = [
            (-1i64, -0.25 * c, -0.25 * s),
            (0, 0.5, 0.0),
            (1, -0.25 * c, 0.25 * s),
        ];
        let mut nre = vec![0.0; 2 * r + 1];
        let mut nim = vec![0.0; 2 * r + 1];
        for m in -(width as i64)..=(width as i64) {
            let idx = (m + r as i64) as usize;
            let (xr, xi) = (re[idx], im[idx]);
            if xr == 0.0 && xi == 0.0 {
                continue;
            }
            for &(shift, tr, ti) in &taps {
                let out = (idx as i64 + shift) as usize;
                nre[out] += xr * tr - xi * ti;
                nim[out] += xr * ti + xi * tr;
            }
        }
        re = nre;
        im = nim;
        width += 1;
    }
    let coeffs = (1..=r)
        .map(|m| [-2.0 * im[r + m], 2.0 * re[r + m]])
        .collect();
    Ok(TrigPoly { c0: re[r], coeffs })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullspaceSupport {
    pub angles: Vec<f64>,
    pub functional: AffineFunctional,
    pub trig: TrigPoly,
    pub singular_values: Vec<f64>,
}

/// Solves `ℓ·I(α_i) + c = 0`, `ℓ·I'(α_i) = 0` for a unit vector `(ℓ, c)`.
pub fn support_from_nullspace(
    curve: &FourierCurve,
    angles: &[f64],
    tol: &Tolerances,
) -> Result<NullspaceSupport, MomentError> {
    let n = curve.dimension();
    let sorted = normalize_angles(angles, 0.0)?;
    let r = sorted.len();
    if n < 2 * r {
        return Err(MomentError::InvalidParameter(format!(
            "curve dimension {n} is below 2r = {}",
            2 * r
        )));
    }
    let mut rows = Vec::with_capacity(2 * r);
    for &a in &sorted {
        let mut row = curve.point(a);
        row.push(1.0);
        rows.push(row);
        let mut row = curve.velocity(a);
        row.push(0.0);
        rows.push(row);
    }
    let (values, vectors) = linalg::svd_full(&rows, n + 1);
    let rank = linalg::numerical_rank(&values, tol.null_rel_tol);
    let nullity = n + 1 - rank;
    if nullity != 1 {
        return Err(MomentError::Degenerate {
            nullity,
            singular_values: values,
        });
    }
    let v = vectors.last().expect("n + 1 >= 1 singular vectors");
    let mut functional = AffineFunctional {
        normal: v[..n].to_vec(),
        offset: v[n],
    };
    let mut trig = functional.pull_back(curve);
    if trig.eval(largest_gap_midpoint(&sorted)) < 0.0 {
        functional = functional.negated();
        trig = trig.scaled(-1.0);
    }
    Ok(NullspaceSupport {
        angles: sorted,
        functional,
        trig,
        singular_values: values,
    })
}

fn largest_gap_midpoint(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..n {
        let a = sorted[i];
        let gap = if i + 1 == n {
            sorted[0] + TAU - a
        } else {
            sorted[i + 1] - a
        };
        if gap > best.0 {
            best = (gap, (a + gap / 2.0).rem_euclid(TAU));
        }
    }
    best.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportCertificate {
    pub angles: Vec<f64>,
    pub functional: AffineFunctional,
    pub trig: TrigPoly,
    pub grid_size: usize,
    /// Minimum of `T` over grid points outside the exclusion zones; `None`
    /// when every grid point is excluded.
    pub min_off_touch: Option<f64>,
    pub touch_residuals: f64,
    pub derivative_residuals: f64,
    pub curvature_margins: f64,
    pub exclusion_radii: Vec<f64>,
    pub tolerances: Tolerances,
    pub pass: bool,
}

/// Checks that `functional` supports `curve` exactly at `angles`.
///
/// Around each touch point a window of radius
/// `sqrt(2 tol_zero / max(T''(α_i), tol_curv))`, capped at half the gap to
/// the nearest other touch point, is left out of the positivity scan.
pub fn verify_support(
    curve: &FourierCurve,
    angles: &[f64],
    functional: &AffineFunctional,
    grid_n: usize,
    tol: &Tolerances,
) -> Result<SupportCertificate, MomentError> {
    let sorted = normalize_angles(angles, 0.0)?;
    let r = sorted.len();
    if grid_n < 64 * r {
        return Err(MomentError::InvalidParameter(format!(
            "grid of {grid_n} points is below 64r = {}",
            64 * r
        )));
    }
    if functional.normal.len() != curve.dimension() {
        return Err(MomentError::InvalidParameter(format!(
            "functional has {} components, curve lives in R^{}",
            functional.normal.len(),
            curve.dimension()
        )));
    }
    let trig = functional.pull_back(curve);
    let mut touch = 0.0f64;
    let mut slope = 0.0f64;
    let mut curvature = f64::INFINITY;
    let mut radii = Vec::with_capacity(r);
    for (i, &a) in sorted.iter().enumerate() {
        touch = touch.max(trig.eval(a).abs());
        slope = slope.max(trig.eval_derivative(a, 1).abs());
        let c = trig.eval_derivative(a, 2);
        curvature = curvature.min(c);
        let nearest = sorted
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &b)| circular_distance(a, b))
            .fold(f64::INFINITY, f64::min);
        let cap = if nearest.is_finite() {
            nearest / 2.0
        } else {
            TAU / 4.0
        };
        radii.push((2.0 * tol.tol_zero / c.max(tol.tol_curv)).sqrt().min(cap));
    }
    let grid = (0..grid_n).map(|j| TAU * j as f64 / grid_n as f64);
    let mut min_off = None::<f64>;
    for alpha in grid.chain(sorted.iter().copied()) {
        let excluded = sorted
            .iter()
            .zip(&radii)
            .any(|(&a, &rho)| circular_distance(alpha, a) < rho);
        if excluded {
            continue;
        }
        let v = trig.eval(alpha);
        min_off = Some(min_off.map_or(v, |m| m.min(v)));
    }
    let pass = touch <= tol.tol_eq
        && slope <= tol.tol_eq
        && curvature >= tol.tol_curv
        && min_off.is_some_and(|m| m >= tol.tol_pos - tol.pos_slack);
    Ok(SupportCertificate {
        angles: sorted,
        functional: functional.clone(),
        trig,
        grid_size: grid_n,
        min_off_touch: min_off,
        touch_residuals: touch,
        derivative_residuals: slope,
        curvature_margins: curvature,
        exclusion_radii: radii,
        tolerances: *tol,
        pass,
    })
}

/// Certificate for the exact moment curve from the product construction.
pub fn certify_product(
    angles: &[f64],
    grid_n: usize,
    tol: &Tolerances,
) -> Result<SupportCertificate, MomentError> {
    let r = angles.len();
    let t = build_support_product(angles, tol.tol_sep)?;
    let functional = AffineFunctional::from_moment_trig(&t, r);
    verify_support(&FourierCurve::moment(r), angles, &functional, grid_n, tol)
}

/// Deterministic generator for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `r` sorted angles, uniformly distributed among configurations whose
/// circular gaps are all at least `min_sep`.
pub fn separated_angles<R: Rng>(
    r: usize,
    min_sep: f64,
    rng: &mut R,
) -> Result<Vec<f64>, MomentError> {
    let slack = TAU - r as f64 * min_sep;
    if r == 0 || slack <= 0.0 {
        return Err(MomentError::InvalidParameter(format!(
            "cannot place {r} angles with separation {min_sep}"
        )));
    }
    let offset = rng.random_range(0.0..TAU);
    let mut ys: Vec<f64> = (0..r).map(|_| rng.random_range(0.0..slack)).collect();
    ys.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = ys
        .iter()
        .enumerate()
        .map(|(i, y)| (offset + y + i as f64 * min_sep).rem_euclid(TAU))
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

pub fn default_separation(r: usize) -> f64 {
    TAU / (8.0 * r as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub r: usize,
    pub trials: usize,
    pub delta: f64,
    pub seed: u64,
    pub grid_n: usize,
    /// Harmonics carried by the perturbed coordinates (at least `r`).
    pub harmonics: usize,
    pub tolerances: Tolerances,
}

impl SweepConfig {
    pub fn new(r: usize, trials: usize, delta: f64, seed: u64) -> Self {
        SweepConfig {
            r,
            trials,
            delta,
            seed,
            grid_n: 4096.max(64 * r),
            harmonics: r + 1,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub angles: Vec<f64>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub config: SweepConfig,
    pub min_separation: f64,
    pub passes: usize,
    pub failures: Vec<TrialFailure>,
    pub worst_min_off_touch: Option<f64>,
    pub worst_touch_residual: Option<f64>,
    pub worst_derivative_residual: Option<f64>,
    pub worst_curvature_margin: Option<f64>,
}

enum TrialOutcome {
    Certified(Box<SupportCertificate>),
    Degenerate(Vec<f64>, String),
}

/// Perturbs the moment curve at random, rebuilds the supporting hyperplane
/// from the null space and verifies it, once per trial.
pub fn stability_sweep(config: &SweepConfig) -> Result<SweepSummary, MomentError> {
    if config.r == 0 || config.trials == 0 {
        return Err(MomentError::InvalidParameter(
            "need r >= 1 and trials >= 1".into(),
        ));
    }
    if !(config.delta >= 0.0 && config.delta.is_finite()) {
        return Err(MomentError::InvalidParameter(
            "delta must be finite and non-negative".into(),
        ));
    }
    let r = config.r;
    let min_sep = default_separation(r);
    let base = FourierCurve::moment(r);
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|trial| -> Result<TrialOutcome, MomentError> {
            let mut rng = trial_rng(config.seed, trial as u64);
            let angles = separated_angles(r, min_sep, &mut rng)?;
            let curve = base.perturbed(config.delta, config.harmonics.max(r), &mut rng);
            match support_from_nullspace(&curve, &angles, &config.tolerances) {
                Ok(sol) => {
                    let cert = verify_support(
                        &curve,
                        &angles,
                        &sol.functional,
                        config.grid_n,
                        &config.tolerances,
                    )?;
                    Ok(TrialOutcome::Certified(Box::new(cert)))
                }
                Err(e @ MomentError::Degenerate { .. }) => {
                    Ok(TrialOutcome::Degenerate(angles, e.to_string()))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()?;

    let mut summary = SweepSummary {
        config: config.clone(),
        min_separation: min_sep,
        passes: 0,
        failures: Vec::new(),
        worst_min_off_touch: None,
        worst_touch_residual: None,
        worst_derivative_residual: None,
        worst_curvature_margin: None,
    };
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            TrialOutcome::Certified(cert) => {
                let fold_min =
                    |slot: &mut Option<f64>, v: f64| *slot = Some(slot.map_or(v, |s| s.min(v)));
                let fold_max =
                    |slot: &mut Option<f64>, v: f64| *slot = Some(slot.map_or(v, |s| s.max(v)));
                if let Some(m) = cert.min_off_touch {
                    fold_min(&mut summary.worst_min_off_touch, m);
                }
                fold_max(&mut summary.worst_touch_residual, cert.touch_residuals);
                fold_max(
                    &mut summary.worst_derivative_residual,
                    cert.derivative_residuals,
                );
                fold_min(&mut summary.worst_curvature_margin, cert.curvature_margins);
                if cert.pass {
                    summary.passes += 1;
                } else {
                    summary.failures.push(TrialFailure {
                        trial,
                        angles: cert.angles.clone(),
                        reason: failure_reason(&cert),
                    });
                }
            }
            TrialOutcome::Degenerate(angles, reason) => summary.failures.push(TrialFailure {
                trial,
                angles,
                reason,
            }),
        }
    }
    Ok(summary)
}

fn failure_reason(cert: &SupportCertificate) -> String {
    let tol = &cert.tolerances;
    let mut reasons = Vec::new();
    if cert.touch_residuals > tol.tol_eq {
        reasons.push(format!("touch residual {:e}", cert.touch_residuals));
    }
    if cert.derivative_residuals > tol.tol_eq {
        reasons.push(format!(
            "derivative residual {:e}",
            cert.derivative_residuals
        ));
    }
    if cert.curvature_margins < tol.tol_curv {
        reasons.push(format!("curvature margin {:e}", cert.curvature_margins));
    }
    match cert.min_off_touch {
        Some(m) if m < tol.tol_pos - tol.pos_slack => {
            reasons.push(format!("negative value {m:e} off the touch set"))
        }
        None => reasons.push("no grid point outside the exclusion zones".into()),
        _ => {}
    }
    reasons.join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn moment_embed_examples() {
        let p = moment_embed(0.0, 2);
        assert_eq!(p, vec![0.0, 1.0, 0.0, 1.0]);
        let p = moment_embed(PI / 2.0, 2);
        let want = [1.0, 0.0, 0.0, -1.0];
        assert!(p.iter().zip(want).all(|(a, b)| close(*a, b, 1e-15)));
        let p = moment_embed(PI, 1);
        assert!(close(p[0], 0.0, 1e-15) && close(p[1], -1.0, 1e-15));
        let curve = FourierCurve::moment(3);
        for a in [0.1, 1.7, 4.0] {
            let q = curve.point(a);
            assert!(q
                .iter()
                .zip(moment_embed(a, 3))
                .all(|(x, y)| close(*x, y, 1e-15)));
        }
    }

    #[test]
    fn product_single_angle() {
        let t = build_support_product(&[0.0], 1e-6).unwrap();
        assert!(close(t.c0, 0.5, 1e-15));
        assert!(close(t.coeffs[0][0], 0.0, 1e-15) && close(t.coeffs[0][1], -0.5, 1e-15));
    }

    #[test]
    fn product_antipodal_pair() {
        let t = build_support_product(&[0.0, PI], 1e-6).unwrap();
        assert!(close(t.c0, 0.125, 1e-15));
        assert!(close(t.coeffs[0][0], 0.0, 1e-15) && close(t.coeffs[0][1], 0.0, 1e-15));
        assert!(close(t.coeffs[1][0], 0.0, 1e-15) && close(t.coeffs[1][1], -0.125, 1e-15));
    }

    #[test]
    fn product_equispaced_triple_vanishes() {
        let angles = [0.0, TAU / 3.0, 2.0 * TAU / 3.0];
        let t = build_support_product(&angles, 1e-6).unwrap();
        for a in angles {
            assert!(t.eval(a).abs() < 1e-12);
            assert!(t.eval_derivative(a, 1).abs() < 1e-12);
        }
        // brute-force product at a few points
        for x in [0.3, 1.1, 2.9, 5.5] {
            let direct: f64 = angles
                .iter()
                .map(|a| ((x - a) / 2.0).sin().powi(2))
                .product();
            assert!(close(t.eval(x), direct, 1e-14));
        }
    }

    #[test]
    fn product_rejects_coincident_angles() {
        assert!(matches!(
            build_support_product(&[1.0, 1.0 + 1e-9], 1e-6),
            Err(MomentError::CoincidentAngles { .. })
        ));
        assert!(build_support_product(&[0.0, TAU - 1e-8], 1e-6).is_err());
    }

    #[test]
    fn negated_and_zero_functionals_fail() {
        let tol = Tolerances::default();
        let angles = [0.4, 2.0, 4.4];
        let good = certify_product(&angles, 4096, &tol).unwrap();
        assert!(good.pass);
        let curve = FourierCurve::moment(3);
        let bad = verify_support(&curve, &angles, &good.functional.negated(), 4096, &tol).unwrap();
        assert!(!bad.pass);
        assert!(bad.min_off_touch.unwrap() < 0.0);
        let zero = AffineFunctional {
            normal: vec![0.0; 6],
            offset: 0.0,
        };
        let z = verify_support(&curve, &angles, &zero, 4096, &tol).unwrap();
        assert!(!z.pass);
        assert_eq!(z.curvature_margins, 0.0);
    }

    #[test]
    fn verify_rejects_coarse_grid() {
        let tol = Tolerances::default();
        assert!(certify_product(&[0.0, 1.0], 100, &tol).is_err());
    }

    #[test]
    fn nullspace_matches_product() {
        let angles = [0.2, 1.9, 3.0, 5.0];
        let tol = Tolerances::default();
        let sol = support_from_nullspace(&FourierCurve::moment(4), &angles, &tol).unwrap();
        let prod = build_support_product(&angles, tol.tol_sep).unwrap();
        assert!(sol.trig.cosine_similarity(&prod) > 1.0 - 1e-8);
    }

    #[test]
    fn nullspace_duplicate_is_degenerate() {
        let tol = Tolerances::default();
        let err = support_from_nullspace(&FourierCurve::moment(2), &[1.0, 1.0], &tol).unwrap_err();
        match err {
            MomentError::Degenerate {
                nullity,
                singular_values,
            } => {
                assert!(nullity >= 2);
                assert_eq!(singular_values.len(), 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rotation_matches_shifted_angles() {
        let angles = [0.3, 1.4, 4.0];
        let beta = 0.77;
        let base = build_support_product(&angles, 1e-6).unwrap();
        let shifted: Vec<f64> = angles.iter().map(|a| a + beta).collect();
        let moved = build_support_product(&shifted, 1e-6).unwrap();
        let rotated = base.rotated(beta);
        assert!(close(moved.c0, rotated.c0, 1e-12));
        for (a, b) in moved.coeffs.iter().zip(&rotated.coeffs) {
            assert!(close(a[0], b[0], 1e-12) && close(a[1], b[1], 1e-12));
        }
    }

    #[test]
    fn separated_angles_respect_gap() {
        let mut rng = trial_rng(3, 0);
        for r in 1..12 {
            let sep = default_separation(r);
            let a = separated_angles(r, sep, &mut rng).unwrap();
            assert_eq!(a.len(), r);
            assert!(normalize_angles(&a, sep * (1.0 - 1e-12)).is_ok());
        }
        assert!(separated_angles(10, 1.0, &mut rng).is_err());
    }

    #[test]
    fn zero_delta_sweep_equals_unperturbed() {
        let cfg = SweepConfig::new(3, 5, 0.0, 11);
        let s = stability_sweep(&cfg).unwrap();
        assert_eq!(s.passes, 5);
        for trial in 0..5 {
            let mut rng = trial_rng(11, trial);
            let angles = separated_angles(3, default_separation(3), &mut rng).unwrap();
            let sol =
                support_from_nullspace(&FourierCurve::moment(3), &angles, &cfg.tolerances).unwrap();
            let cert = verify_support(
                &FourierCurve::moment(3),
                &angles,
                &sol.functional,
                cfg.grid_n,
                &cfg.tolerances,
            )
            .unwrap();
            assert!(cert.min_off_touch.unwrap() >= s.worst_min_off_touch.unwrap());
        }
    }
}
