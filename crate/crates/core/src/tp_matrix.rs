//! Finite sections of `G = (g(k + δ_k - l))_{k,l}` and the checks built on
//! them: randomized minor audits for total positivity, the uniformly
//! alternating vector `u = G((-1)^l)`, and the off-diagonal decay of `G^{-1}`.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{PerturbationSeq, MEMBERSHIP_TOL};
use crate::pregramian::{IndexMap, MatrixSection};
use crate::window::{truncation_radius, TpWindow};
use crate::zak::zak_on_half_line;

/// A minor passes when `det >= -MINOR_TOL · scale^n`.
pub const MINOR_TOL: f64 = 1e-10;

/// Sections with a larger condition number are not inverted.
pub const MAX_CONDITION: f64 = 1e12;

/// Default largest `|k - l|` used when fitting inverse decay.
pub const DEFAULT_FIT_RANGE: usize = 8;

/// `(2K+1) × (2K+1)` section of `G_{kl} = g(k + δ_k - l)`, `k, l ∈ [-K, K]`.
///
/// Arguments are formed as `(k - l) + δ_k` so that `G_{k+p,l+p} = G_{kl}`
/// holds bit for bit.
pub fn build_g(w: &TpWindow, pert: &PerturbationSeq, big_k: usize) -> MatrixSection {
    let k = big_k as i64;
    let idx: Vec<i64> = (-k..=k).collect();
    let entries = DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
        let (row, col) = (idx[r], idx[c]);
        w.evaluate((row - col) as f64 + pert.delta(row))
    });
    MatrixSection {
        entries,
        row_offset: -k,
        col_offset: -k,
        row_points: idx.iter().map(|&r| r as f64 + pert.delta(r)).collect(),
        col_points: idx.iter().map(|&c| c as f64).collect(),
        index_map: IndexMap::Perturbed { deltas: pert.deltas.clone() },
        decay_cert: *w.decay(),
    }
}

/// `u_k = Σ_l (-1)^l g(k + δ_k - l)` for `|k| <= K`, checked against
/// `(-1)^k Zg(δ_k, 1/2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlternatingWitness {
    pub ks: Vec<i64>,
    pub u: Vec<f64>,
    /// `Zg(δ_k, 1/2)` for each `k`
    pub zak_half: Vec<f64>,
    /// `min_k |u_k|`
    pub nu: f64,
    pub sign_pattern_ok: bool,
    pub max_identity_deviation: f64,
}

/// Compute the witness without enforcing its conclusions.
pub fn compute_witness(w: &TpWindow, pert: &PerturbationSeq, big_k: usize, tail_tol: f64) -> Result<AlternatingWitness> {
    let k = big_k as i64;
    let reach = truncation_radius(w, tail_tol) as i64 + pert.deltas.iter().fold(0.0_f64, |m, d| m.max(d.abs())).ceil() as i64 + 1;
    let ks: Vec<i64> = (-k..=k).collect();
    let mut u = Vec::with_capacity(ks.len());
    let mut zak_half = Vec::with_capacity(ks.len());
    let mut deviation = 0.0_f64;
    for &row in &ks {
        let delta = pert.delta(row);
        let sum: f64 = (-k - reach..=k + reach)
            .map(|l| {
                let sign = if l.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                sign * w.evaluate((row - l) as f64 + delta)
            })
            .sum();
        let z = zak_on_half_line(w, delta, tail_tol)?;
        let expect = if row.rem_euclid(2) == 0 { z } else { -z };
        deviation = deviation.max((sum - expect).abs());
        u.push(sum);
        zak_half.push(z);
    }
    let sign_pattern_ok = u.windows(2).all(|p| p[0] * p[1] < 0.0);
    let nu = u.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    Ok(AlternatingWitness { ks, u, zak_half, nu, sign_pattern_ok, max_identity_deviation: deviation })
}

/// The uniformly alternating vector `G((-1)^l)` on `|k| <= K`.
///
/// Fails if some `δ_k` leaves the admissible interval, if the signs do not
/// alternate, or if `nu` is below `100 · tail_tol`.
pub fn alternating_witness(w: &TpWindow, pert: &PerturbationSeq, big_k: usize, tail_tol: f64) -> Result<AlternatingWitness> {
    let (lo, hi) = pert.interval();
    for (k, &d) in pert.deltas.iter().enumerate() {
        if d < lo - MEMBERSHIP_TOL || d > hi + MEMBERSHIP_TOL {
            return Err(Error::PerturbationOutsideInterval { k, delta: d, lo, hi });
        }
    }
    let witness = compute_witness(w, pert, big_k, tail_tol)?;
    if let Some(i) = witness.u.windows(2).position(|p| p[0] * p[1] >= 0.0) {
        return Err(Error::SignPatternViolated { k: witness.ks[i] });
    }
    let floor = 100.0 * tail_tol;
    if witness.nu < floor {
        return Err(Error::NuBelowFloor { nu: witness.nu, floor });
    }
    Ok(witness)
}

/// Fit `|G^{-1}_{kl}| <= C (1 + |k-l|)^{-σ}` on interior rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub c: f64,
    /// `f64::INFINITY` when no off-diagonal entry rises above the noise floor
    /// beyond the first band
    pub sigma: f64,
    /// largest `|k - l|` entering the regression
    pub fit_range: usize,
    pub condition: f64,
    /// per-distance maxima over interior rows, `d = 0, 1, ...`
    pub profile: Vec<f64>,
}

/// Invert a square section and fit the decay of its inverse away from the
/// diagonal, over distances `1 <= d <= fit_range` above the noise floor.
pub fn inverse_decay_profile(section: &MatrixSection, fit_range: usize) -> Result<DecayFit> {
    let m = &section.entries;
    let n = m.nrows();
    if n != m.ncols() || n == 0 {
        return Err(Error::InvalidArgument("inverse decay needs a square section".into()));
    }
    let sv = m.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition >= MAX_CONDITION {
        return Err(Error::Singular { cond: condition });
    }
    let inv = m.clone().try_inverse().ok_or(Error::Singular { cond: condition })?;

    let rows = (n / 4)..(n - n / 4);
    let profile: Vec<f64> = (0..n)
        .map(|d| {
            rows.clone()
                .flat_map(|i| {
                    let up = (i + d < n).then(|| inv[(i, i + d)].abs());
                    let down = (i >= d).then(|| inv[(i, i - d)].abs());
                    up.into_iter().chain(down)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let peak = profile.iter().copied().fold(0.0, f64::max);
    let floor = (1e-12_f64).max(condition * 1e-15) * peak;

    let mut used = Vec::new();
    for (d, &v) in profile.iter().enumerate().skip(1).take(fit_range) {
        if v <= floor {
            break;
        }
        used.push(((1.0 + d as f64).ln(), v.ln()));
    }
    let fit_len = used.len();
    if fit_len < 2 {
        return Ok(DecayFit {
            c: profile[0].max(profile.get(1).copied().unwrap_or(0.0)),
            sigma: f64::INFINITY,
            fit_range: fit_len,
            condition,
            profile,
        });
    }
    let cnt = fit_len as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / cnt;
    let my = used.iter().map(|p| p.1).sum::<f64>() / cnt;
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sigma = -sxy / sxx;
    // smallest C making the fitted curve an upper envelope on the fitted range
    let c = profile.iter().enumerate().take(fit_len + 1).map(|(d, v)| v * (1.0 + d as f64).powf(sigma)).fold(0.0, f64::max);
    Ok(DecayFit { c, sigma, fit_range: fit_len, condition, profile })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorAudit {
    pub trials: usize,
    pub n_max: usize,
    pub min_det: f64,
    /// `min det / scale^n` over all sampled minors
    pub min_scaled_det: f64,
    pub worst_rows: Vec<usize>,
    pub worst_cols: Vec<usize>,
    pub pass: bool,
}

/// Sample `trials` minors with random increasing row and column index sets
/// of size `1..=n_max` and report the most negative scaled determinant.
pub fn tp_minor_audit(section: &MatrixSection, n_max: usize, trials: usize, seed: u64) -> Result<MinorAudit> {
    if n_max == 0 || n_max > 8 {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} must be in 1..=8")));
    }
    let m = &section.entries;
    let cap = n_max.min(m.nrows()).min(m.ncols());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<(Vec<usize>, Vec<usize>)> = (0..trials)
        .map(|_| {
            let size = rng.random_range(1..=cap);
            let mut rows = sample(&mut rng, m.nrows(), size).into_vec();
            let mut cols = sample(&mut rng, m.ncols(), size).into_vec();
            rows.sort_unstable();
            cols.sort_unstable();
            (rows, cols)
        })
        .collect();
    let results: Vec<(f64, f64)> = picks
        .par_iter()
        .map(|(rows, cols)| {
            let sub = DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
            let scale = sub.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let det = sub.determinant();
            let scaled = if scale > 0.0 { det / scale.powi(rows.len() as i32) } else { 0.0 };
            (det, scaled)
        })
        .collect();
    let mut worst = 0;
    for (i, r) in results.iter().enumerate() {
        if r.1 < results[worst].1 {
            worst = i;
        }
    }
    let min_det = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let (min_scaled_det, worst_rows, worst_cols) = match results.get(worst) {
        Some(r) => (r.1, picks[worst].0.clone(), picks[worst].1.clone()),
        None => (f64::INFINITY, Vec::new(), Vec::new()),
    };
    Ok(MinorAudit { trials, n_max: cap, min_det, min_scaled_det, worst_rows, worst_cols, pass: min_scaled_det >= -MINOR_TOL })
}
