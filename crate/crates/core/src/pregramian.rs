//! Truncated pre-Gramian sections `P(x) = (g(x + αj - k))_{j,k}` and
//! frame-bound estimation from their extreme singular values.
//!
//! For a fixed `x` the family `{g(· - k)}` sampled on `x + αℤ` is stable iff
//! `A_x ||c||² <= Σ_j |Σ_k c_k g(x+αj-k)|² <= B_x ||c||²`; the Gabor system over
//! `αℤ × ℤ` is a frame iff the bounds are uniform in `x ∈ [0,1)`.
//!
//! The lower bound is estimated as the smallest squared singular value of
//! the section restricted to the *interior* columns, i.e. those `k` whose
//! translate `g(· - k)` is fully covered by the sampled rows up to the tail
//! tolerance. These are Rayleigh quotients of the infinite operator over
//! finitely supported coefficient vectors, so the estimates decrease toward
//! `A_x` as the interior grows.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::RationalLattice;
use crate::window::{truncation_radius, DecayProfile, TpWindow};
use crate::zak::ZakZero;

/// Maximum relative change between the two largest ladder sizes for a
/// stable lower bound.
pub const LADDER_STABILITY: f64 = 0.10;

/// Consecutive-ratio ceiling for a "decreasing toward zero" trend.
pub const VANISHING_RATIO: f64 = 0.75;

/// How row and column indices of a section map to sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum IndexMap {
    /// explicit sample points `x_j`, `y_k`
    Samples,
    /// row `j` ↦ `x + αj`, column `k` ↦ `k`
    Pregramian { x: f64, alpha: f64 },
    /// row `k` ↦ `k + δ_k`, column `l` ↦ `l`, with `δ` periodic
    Perturbed { deltas: Vec<f64> },
}

/// Finite section of a bi-infinite matrix `(g(row_point - col_point))`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSection {
    pub entries: DMatrix<f64>,
    /// index of the first row in the infinite matrix
    pub row_offset: i64,
    /// index of the first column in the infinite matrix
    pub col_offset: i64,
    pub row_points: Vec<f64>,
    pub col_points: Vec<f64>,
    pub index_map: IndexMap,
    pub decay_cert: DecayProfile,
}

impl MatrixSection {
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// Entry addressed by infinite-matrix indices.
    pub fn get(&self, row: i64, col: i64) -> Option<f64> {
        let r = usize::try_from(row - self.row_offset).ok()?;
        let c = usize::try_from(col - self.col_offset).ok()?;
        (r < self.nrows() && c < self.ncols()).then(|| self.entries[(r, c)])
    }

    /// `max |entries[j][k] - g(row_point(j) - col_point(k))|`.
    pub fn max_formula_deviation(&self, w: &TpWindow) -> f64 {
        let mut worst = 0.0_f64;
        for (j, rp) in self.row_points.iter().enumerate() {
            for (k, cp) in self.col_points.iter().enumerate() {
                worst = worst.max((self.entries[(j, k)] - w.evaluate(rp - cp)).abs());
            }
        }
        worst
    }

    /// `max (|entry| - envelope(row_point - col_point))`, nonpositive when
    /// the decay certificate holds.
    pub fn max_envelope_excess(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (j, rp) in self.row_points.iter().enumerate() {
            for (k, cp) in self.col_points.iter().enumerate() {
                let excess = self.entries[(j, k)].abs() - self.decay_cert.envelope(rp - cp);
                worst = worst.max(excess);
            }
        }
        worst
    }
}

fn lattice_point(x: f64, lat: &RationalLattice, j: i64) -> f64 {
    x + (lat.p() as i64 * j) as f64 / lat.q() as f64
}

fn tail_radius(w: &TpWindow, tail_tol: f64) -> i64 {
    truncation_radius(w, tail_tol) as i64
}

/// Rows `j ∈ [-J, J]`, columns `k ∈ [-K, K]` with `K = ⌈αJ⌉ + R`.
pub fn pregramian_section(w: &TpWindow, lat: &RationalLattice, x: f64, big_j: usize, tail_tol: f64) -> MatrixSection {
    let j = big_j as i64;
    let span = (lat.p() as i64 * j + lat.q() as i64 - 1) / lat.q() as i64;
    let k = span + tail_radius(w, tail_tol);
    build_section(w, lat, x, j, k)
}

fn build_section(w: &TpWindow, lat: &RationalLattice, x: f64, j: i64, k: i64) -> MatrixSection {
    let row_points: Vec<f64> = (-j..=j).map(|r| lattice_point(x, lat, r)).collect();
    let col_points: Vec<f64> = (-k..=k).map(|c| c as f64).collect();
    let entries = DMatrix::from_fn(row_points.len(), col_points.len(), |r, c| w.evaluate(row_points[r] - col_points[c]));
    MatrixSection {
        entries,
        row_offset: -j,
        col_offset: -k,
        row_points,
        col_points,
        index_map: IndexMap::Pregramian { x, alpha: lat.alpha() },
        decay_cert: *w.decay(),
    }
}

fn extreme_eigenvalues(gram: DMatrix<f64>) -> (f64, f64) {
    let ev = gram.symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// `σ_min²` of the section with rows `|j| <= J` restricted to the interior
/// columns `|k| <= ⌈αJ⌉ - R`.
pub fn lower_bound_at_x(w: &TpWindow, lat: &RationalLattice, x: f64, big_j: usize, tail_tol: f64) -> Result<f64> {
    let j = big_j as i64;
    let span = (lat.p() as i64 * j + lat.q() as i64 - 1) / lat.q() as i64;
    let inner = span - tail_radius(w, tail_tol);
    if inner < 0 {
        return Err(Error::SectionTooSmall(inner));
    }
    let section = build_section(w, lat, x, j, inner);
    let gram = section.entries.tr_mul(&section.entries);
    Ok(extreme_eigenvalues(gram).0)
}

/// Row half-width needed so that `|k| <= interior` columns are fully covered.
pub fn rows_for_interior(w: &TpWindow, lat: &RationalLattice, interior: usize, tail_tol: f64) -> usize {
    let need = interior as i64 + tail_radius(w, tail_tol);
    ((need * lat.q() as i64 + lat.p() as i64 - 1) / lat.p() as i64) as usize
}

/// `(A_x, B_x)` estimates with interior column half-width `interior`.
///
/// The lower estimate uses columns `|k| <= interior`; the upper one uses the
/// full section of [`pregramian_section`].
pub fn bounds_at_x(w: &TpWindow, lat: &RationalLattice, x: f64, interior: usize, tail_tol: f64) -> (f64, f64) {
    let big_j = rows_for_interior(w, lat, interior, tail_tol);
    let section = pregramian_section(w, lat, x, big_j, tail_tol);
    let gram = section.entries.tr_mul(&section.entries);
    let (_, upper) = extreme_eigenvalues(gram.clone());
    let start = (-(interior as i64) - section.col_offset) as usize;
    let width = 2 * interior + 1;
    let inner = gram.view((start, start), (width, width)).into_owned();
    (extreme_eigenvalues(inner).0, upper)
}

/// Schur-test bound `‖P(x)‖² <= S² ⌈1/α⌉` with `S = Σ_k sup_{t∈[k,k+1]} envelope(t)`.
pub fn schur_upper_bound(w: &TpWindow, lat: &RationalLattice) -> f64 {
    let env = w.decay();
    // sup over [k, k+1] of the envelope is attained at the endpoint nearest 0
    let mut s = 2.0 * env.envelope(0.0);
    s += 2.0 * env.lattice_tail(1.0, 1.0);
    let per_column = (lat.q() as f64 / lat.p() as f64).ceil();
    s * s * per_column
}

/// Verdict of a frame diagnosis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Frame,
    NotFrame,
    Inconclusive,
}

impl Verdict {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Frame => 0,
            Verdict::NotFrame => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Frame => "Frame",
            Verdict::NotFrame => "NotFrame",
            Verdict::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// Machine-readable certificate attached to a diagnosis.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Evidence {
    /// `αβ > 1`, or `αβ = 1` for a continuous window
    Density {
        alpha_beta: f64,
        critical: bool,
        reason: String,
    },
    ZakZero(ZakZero),
    /// lower-bound estimates along the truncation ladder at `x`
    SigmaTrace {
        x: f64,
        ladder: Vec<usize>,
        lower: Vec<f64>,
    },
    Witness {
        worst_x: f64,
        min_nu: f64,
        max_identity_deviation: f64,
    },
    Injectivity {
        worst_x: f64,
        min_abs_det: f64,
        min_sigma: f64,
        all_invertible: bool,
    },
    Consistency {
        injectivity_invertible: bool,
        bounds_frame: bool,
        agree: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameDiagnosis {
    pub verdict: Verdict,
    pub lower_bound_est: f64,
    pub upper_bound_est: f64,
    pub worst_x: f64,
    pub ladder: Vec<usize>,
    /// `min_x A_x` estimate at each ladder size
    pub ladder_trace: Vec<f64>,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsConfig {
    pub x_grid_n: usize,
    /// interior column half-widths, increasing
    pub ladder: Vec<usize>,
    pub tail_tol: f64,
    pub sigma_tol: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { x_grid_n: 64, ladder: vec![16, 32, 64], tail_tol: 1e-10, sigma_tol: 1e-8 }
    }
}

impl BoundsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.x_grid_n < 16 {
            return Err(Error::InvalidArgument(format!("x_grid_n = {} < 16", self.x_grid_n)));
        }
        if self.ladder.len() < 3 || self.ladder.windows(2).any(|p| p[0] >= p[1]) || self.ladder[0] == 0 {
            return Err(Error::InvalidArgument("ladder needs >= 3 increasing positive sizes".into()));
        }
        if !(self.tail_tol > 0.0 && self.sigma_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Classify a ladder trace of lower-bound estimates.
pub fn classify_trace(trace: &[f64], sigma_tol: f64) -> Verdict {
    let n = trace.len();
    let last = trace[n - 1];
    let prev = trace[n - 2];
    if last > sigma_tol * sigma_tol && (prev - last).abs() / last < LADDER_STABILITY {
        return Verdict::Frame;
    }
    let vanishing = trace.windows(2).all(|p| p[1] < p[0] && (p[1] <= VANISHING_RATIO * p[0] || p[1] <= sigma_tol * sigma_tol));
    if vanishing {
        Verdict::NotFrame
    } else {
        Verdict::Inconclusive
    }
}

/// Ladder trace `n ↦ A_x(n)` at a single `x`.
pub fn sigma_trace(w: &TpWindow, lat: &RationalLattice, x: f64, ladder: &[usize], tail_tol: f64) -> Vec<f64> {
    ladder.iter().map(|&n| bounds_at_x(w, lat, x, n, tail_tol).0).collect()
}

/// Estimate uniform frame bounds over an `x`-grid and a truncation ladder.
///
/// `lat` must already be reduced to `β = 1`. Densities `αβ > 1`, and
/// `αβ = 1` for continuous windows, are decided without numerics.
pub fn frame_bounds(w: &TpWindow, lat: &RationalLattice, cfg: &BoundsConfig) -> Result<FrameDiagnosis> {
    cfg.validate()?;
    let ab = lat.alpha();
    let critical = lat.p() == lat.q();
    if lat.p() > lat.q() || (critical && !w.has_jump()) {
        let reason = if critical {
            "alpha*beta = 1 with a continuous window: no Gabor frame (Balian-Low)"
        } else {
            "alpha*beta > 1: no Gabor frame (density theorem)"
        };
        return Ok(FrameDiagnosis {
            verdict: Verdict::NotFrame,
            lower_bound_est: 0.0,
            upper_bound_est: 0.0,
            worst_x: 0.0,
            ladder: cfg.ladder.clone(),
            ladder_trace: Vec::new(),
            evidence: vec![Evidence::Density { alpha_beta: ab, critical, reason: reason.into() }],
        });
    }

    let xs: Vec<f64> = (0..cfg.x_grid_n).map(|i| i as f64 / cfg.x_grid_n as f64).collect();
    let per_x: Vec<Vec<(f64, f64)>> =
        xs.par_iter().map(|&x| cfg.ladder.iter().map(|&n| bounds_at_x(w, lat, x, n, cfg.tail_tol)).collect()).collect();

    let levels = cfg.ladder.len();
    let trace: Vec<f64> = (0..levels).map(|l| per_x.iter().map(|v| v[l].0).fold(f64::INFINITY, f64::min)).collect();
    let (worst, _) =
        per_x
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v[levels - 1].0))
            .fold((0, f64::INFINITY), |acc, (i, a)| if a < acc.1 { (i, a) } else { acc });
    let upper = per_x.iter().map(|v| v[levels - 1].1).fold(0.0, f64::max);
    let worst_x = xs[worst];
    let verdict = classify_trace(&trace, cfg.sigma_tol);

    Ok(FrameDiagnosis {
        verdict,
        lower_bound_est: trace[levels - 1],
        upper_bound_est: upper,
        worst_x,
        ladder: cfg.ladder.clone(),
        ladder_trace: trace.clone(),
        evidence: vec![Evidence::SigmaTrace { x: worst_x, ladder: cfg.ladder.clone(), lower: per_x[worst].iter().map(|v| v.0).collect() }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lat(p: i64, q: i64) -> RationalLattice {
        RationalLattice::from_ratio(p, q).unwrap()
    }

    #[test]
    fn section_shape_and_center() {
        let g = TpWindow::gaussian(PI).unwrap();
        let s = pregramian_section(&g, &lat(1, 2), 0.0, 2, 1e-10);
        let r = truncation_radius(&g, 1e-10) as i64;
        assert_eq!(s.nrows(), 5);
        assert_eq!(s.ncols() as i64, 2 * (1 + r) + 1);
        assert_eq!(s.get(0, 0), Some(1.0));
        assert!(s.max_formula_deviation(&g) < 1e-14);
        assert!(s.max_envelope_excess() <= 0.0);
    }

    #[test]
    fn rows_are_shifted_base_rows() {
        let g = TpWindow::sech(1.0).unwrap();
        let l = lat(2, 3);
        let x = 0.37;
        let s = pregramian_section(&g, &l, x, 6, 1e-10);
        for j in -6..=6_i64 {
            let xj = x + l.alpha() * j as f64;
            let base = pregramian_section(&g, &l, xj, 0, 1e-10);
            for k in base.col_offset..(base.col_offset + base.ncols() as i64) {
                if let Some(v) = s.get(j, k) {
                    assert!((v - base.get(0, k).unwrap()).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn one_sided_support_in_section() {
        let e = TpWindow::one_sided_exp(1.0).unwrap();
        let l = lat(1, 2);
        let s = pregramian_section(&e, &l, 0.3, 4, 1e-10);
        for (j, rp) in s.row_points.iter().enumerate() {
            for (k, cp) in s.col_points.iter().enumerate() {
                if rp - cp < 0.0 {
                    assert_eq!(s.entries[(j, k)], 0.0);
                }
            }
        }
    }

    #[test]
    fn single_column_lower_bound_by_hand() {
        // choose J with ⌈αJ⌉ = R: the interior is the single column k = 0
        let g = TpWindow::gaussian(PI).unwrap();
        let l = lat(1, 1);
        let r = truncation_radius(&g, 1e-10) as usize;
        let value = lower_bound_at_x(&g, &l, 0.2, r, 1e-10).unwrap();
        let by_hand: f64 = (-(r as i64)..=r as i64).map(|j| g.evaluate(0.2 + j as f64).powi(2)).sum();
        assert!((value - by_hand).abs() < 1e-14);
        assert!(matches!(lower_bound_at_x(&g, &l, 0.2, r - 1, 1e-10), Err(Error::SectionTooSmall(_))));
    }

    #[test]
    fn gram_path_matches_svd() {
        let g = TpWindow::two_sided_exp(1.0).unwrap();
        let l = lat(3, 4);
        let (lo, hi) = bounds_at_x(&g, &l, 0.1, 6, 1e-10);
        let big_j = rows_for_interior(&g, &l, 6, 1e-10);
        let full = pregramian_section(&g, &l, 0.1, big_j, 1e-10);
        let sv = full.entries.clone().singular_values();
        assert!((sv.max().powi(2) - hi).abs() < 1e-10 * hi);
        let start = (-6 - full.col_offset) as usize;
        let inner = full.entries.columns(start, 13).into_owned().singular_values();
        assert!((inner.min().powi(2) - lo).abs() < 1e-10);
    }

    #[test]
    fn restricting_columns_never_lowers_sigma_min() {
        let g = TpWindow::gaussian(PI).unwrap();
        let l = lat(2, 3);
        let big_j = 40;
        let full = pregramian_section(&g, &l, 0.25, big_j, 1e-10);
        let center = (-full.col_offset) as usize;
        let mut prev = f64::INFINITY;
        for half in [2usize, 5, 9, 14] {
            let sub = full.entries.columns(center - half, 2 * half + 1).into_owned();
            let s = sub.singular_values().min();
            assert!(s <= prev + 1e-12, "half={half}: {s} > {prev}");
            prev = s;
        }
    }

    #[test]
    fn trace_classification() {
        assert_eq!(classify_trace(&[0.84, 0.835, 0.8348], 1e-8), Verdict::Frame);
        assert_eq!(classify_trace(&[1.7e-3, 4.6e-4, 1.2e-4], 1e-8), Verdict::NotFrame);
        assert_eq!(classify_trace(&[0.5, 0.45, 0.3], 1e-8), Verdict::Inconclusive);
    }

    #[test]
    fn density_short_circuit() {
        let g = TpWindow::gaussian(PI).unwrap();
        let cfg = BoundsConfig::default();
        let d = frame_bounds(&g, &lat(3, 2), &cfg).unwrap();
        assert_eq!(d.verdict, Verdict::NotFrame);
        assert!(d.ladder_trace.is_empty());
        let d = frame_bounds(&g, &lat(1, 1), &cfg).unwrap();
        assert_eq!(d.verdict, Verdict::NotFrame);
    }

    #[test]
    fn config_validation() {
        let mut cfg = BoundsConfig { ladder: vec![16, 32], ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.ladder = vec![16, 16, 32];
        assert!(cfg.validate().is_err());
        let cfg = BoundsConfig { x_grid_n: 8, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
