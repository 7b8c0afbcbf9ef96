//! The `p × p` matrix function `A(ξ)_{rs} = Z_p g(r + δ_r - s, ξ)` attached to
//! a perturbed section `G`, and the `q × p` symbol of the pre-Gramian.
//!
//! Splitting `c_l` and `d_k = (Gc)_k` into residues mod `p` and taking Fourier
//! series `x_s(ξ) = Σ_n c_{s+pn} e^{-2πi npξ}`, `y_r(ξ) = Σ_m d_{r+pm} e^{-2πi mpξ}`
//! turns `d = Gc` into `A(ξ) x(ξ) = y(ξ)`. `G` is injective when `A(ξ)` is
//! invertible for every `ξ ∈ [0, 1/p]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{PerturbationSeq, RationalLattice};
use crate::window::{truncation_radius, TpWindow};
use crate::zak::zak;

/// Relative change of `min σ` under grid doubling tolerated for a stable
/// certificate.
pub const GRID_STABILITY: f64 = 0.10;

pub const MIN_XI_GRID: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct ZzMatrix {
    pub xi: f64,
    pub entries: DMatrix<Complex64>,
    /// aggregate truncation bound over all `p²` entries
    pub trunc_err: f64,
}

impl ZzMatrix {
    pub fn det(&self) -> Complex64 {
        self.entries.determinant()
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.entries.clone().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    pub fn sigma_min(&self) -> f64 {
        self.entries.clone().singular_values().min()
    }
}

/// `A(ξ)` for `r, s = 0..p-1`. Any real `ξ` is accepted; `A` is
/// `1/p`-periodic.
pub fn zz_matrix(w: &TpWindow, lat: &RationalLattice, pert: &PerturbationSeq, xi: f64, tol: f64) -> Result<ZzMatrix> {
    let p = lat.p() as usize;
    if pert.period() != p {
        return Err(Error::InvalidArgument(format!("perturbation period {} does not match p = {p}", pert.period())));
    }
    let mut entries = DMatrix::zeros(p, p);
    for r in 0..p {
        for s in 0..p {
            let z = zak(w, p as f64, (r as i64 - s as i64) as f64 + pert.deltas[r], xi, tol)?;
            entries[(r, s)] = Complex64::new(z.re, z.im);
        }
    }
    Ok(ZzMatrix { xi, entries, trunc_err: (p * p) as f64 * tol })
}

/// Finitely supported sequence `c_l`, `l = offset, offset+1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteSeq {
    pub offset: i64,
    pub values: Vec<f64>,
}

impl FiniteSeq {
    pub fn get(&self, l: i64) -> f64 {
        usize::try_from(l - self.offset).ok().and_then(|i| self.values.get(i).copied()).unwrap_or(0.0)
    }

    fn last(&self) -> i64 {
        self.offset + self.values.len() as i64 - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub max_deviation: f64,
    pub worst_xi: f64,
    pub points: usize,
    pub tol: f64,
}

fn residue_series(seq: impl Iterator<Item = (i64, f64)>, p: i64, r: i64, xi: f64) -> Complex64 {
    seq.filter(|(k, _)| (k - r).rem_euclid(p) == 0)
        .map(|(k, v)| {
            let m = (k - r).div_euclid(p);
            let a = -2.0 * PI * ((m * p) as f64 * xi).rem_euclid(1.0);
            Complex64::from_polar(v, a)
        })
        .sum()
}

/// Compare `y(ξ)` computed from `d = Gc` on the time side with `A(ξ) x(ξ)`.
///
/// Fails with [`Error::FactorizationMismatch`] when the deviation exceeds
/// `100 · tol`.
pub fn fourier_factorization_check(
    w: &TpWindow,
    lat: &RationalLattice,
    pert: &PerturbationSeq,
    c: &FiniteSeq,
    xi_grid: &[f64],
    tol: f64,
) -> Result<FactorizationReport> {
    let p = lat.p() as i64;
    let scale: f64 = c.values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    let reach = truncation_radius(w, tol * 1e-3 / scale) as i64 + pert.deltas.iter().fold(0.0_f64, |m, d| m.max(d.abs())).ceil() as i64 + 2;
    let d: Vec<(i64, f64)> = (c.offset - reach..=c.last() + reach)
        .map(|k| {
            let delta = pert.delta(k);
            let v = (c.offset..=c.last()).map(|l| c.get(l) * w.evaluate((k - l) as f64 + delta)).sum();
            (k, v)
        })
        .collect();
    let cs: Vec<(i64, f64)> = (c.offset..=c.last()).map(|l| (l, c.get(l))).collect();

    let per_xi: Vec<(f64, f64)> = xi_grid
        .par_iter()
        .map(|&xi| {
            let a = zz_matrix(w, lat, pert, xi, tol)?;
            let x = DVector::from_fn(p as usize, |s, _| residue_series(cs.iter().copied(), p, s as i64, xi));
            let ax = &a.entries * x;
            let dev = (0..p as usize).map(|r| (residue_series(d.iter().copied(), p, r as i64, xi) - ax[r]).norm()).fold(0.0, f64::max);
            Ok((dev, xi))
        })
        .collect::<Result<_>>()?;
    let (max_deviation, worst_xi) = per_xi.into_iter().fold((0.0, 0.0), |acc, v| if v.0 > acc.0 { v } else { acc });
    let limit = 100.0 * tol;
    if max_deviation > limit {
        return Err(Error::FactorizationMismatch { deviation: max_deviation, limit });
    }
    Ok(FactorizationReport { max_deviation, worst_xi, points: xi_grid.len(), tol })
}

/// `A(ξ*) ((-1)^s)_s` at `ξ* = 1/2 mod 1/p`, which reproduces the alternating
/// witness `u_r = Σ_l (-1)^l g(r + δ_r - l)` for `r = 0..p-1`.
pub fn alternating_response(w: &TpWindow, lat: &RationalLattice, pert: &PerturbationSeq, tol: f64) -> Result<Vec<Complex64>> {
    let p = lat.p() as usize;
    let a = zz_matrix(w, lat, pert, 0.5, tol)?;
    let signs = DVector::from_fn(p, |s, _| Complex64::new(if s % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
    Ok((&a.entries * signs).iter().copied().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InjectivityVerdict {
    Invertible,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectivityCertificate {
    pub min_abs_det: f64,
    pub argmin_xi: f64,
    pub min_sigma: f64,
    /// `min σ` on the doubled grid
    pub min_sigma_doubled: f64,
    pub xi_grid_n: usize,
    pub verdict: InjectivityVerdict,
}

fn sample(w: &TpWindow, lat: &RationalLattice, pert: &PerturbationSeq, xi: f64, tol: f64) -> Result<(f64, f64, f64)> {
    let a = zz_matrix(w, lat, pert, xi, tol)?;
    Ok((xi, a.det().norm(), a.sigma_min()))
}

fn scan(w: &TpWindow, lat: &RationalLattice, pert: &PerturbationSeq, xs: &[f64], tol: f64) -> Result<Vec<(f64, f64, f64)>> {
    xs.par_iter().map(|&xi| sample(w, lat, pert, xi, tol)).collect()
}

/// Uniform grid of `n + 1` nodes on `[0, 1/p]`.
pub fn xi_grid(lat: &RationalLattice, n: usize) -> Vec<f64> {
    let h = 1.0 / (lat.p() as f64 * n as f64);
    (0..=n).map(|i| i as f64 * h).collect()
}

/// Scan `|det A(ξ)|` and `σ_min(A(ξ))` over `[0, 1/p]`, then on the doubled
/// grid, then refine twice around the minimizer.
///
/// `Invertible` iff `min σ > sigma_tol` and the doubled grid changes it by
/// less than [`GRID_STABILITY`].
pub fn injectivity_scan(
    w: &TpWindow,
    lat: &RationalLattice,
    pert: &PerturbationSeq,
    xi_grid_n: usize,
    sigma_tol: f64,
    tol: f64,
) -> Result<InjectivityCertificate> {
    if xi_grid_n < MIN_XI_GRID {
        return Err(Error::InvalidArgument(format!("xi_grid_n = {xi_grid_n} < {MIN_XI_GRID}")));
    }
    let coarse = scan(w, lat, pert, &xi_grid(lat, xi_grid_n), tol)?;
    // odd nodes of the doubled grid; even ones coincide with the coarse grid
    let h = 1.0 / (lat.p() as f64 * 2.0 * xi_grid_n as f64);
    let odd: Vec<f64> = (0..xi_grid_n).map(|i| (2 * i + 1) as f64 * h).collect();
    let fine = scan(w, lat, pert, &odd, tol)?;

    let min_by = |v: &[(f64, f64, f64)], f: fn(&(f64, f64, f64)) -> f64| v.iter().copied().min_by(|a, b| f(a).total_cmp(&f(b))).unwrap();
    let coarse_min = min_by(&coarse, |t| t.2).2;
    let mut all: Vec<(f64, f64, f64)> = coarse.into_iter().chain(fine).collect();
    let doubled_min = min_by(&all, |t| t.2).2;

    let mut center = min_by(&all, |t| t.2).0;
    let mut step = h;
    for _ in 0..2 {
        step /= 2.0;
        let local: Vec<f64> = [-3.0, -1.0, 1.0, 3.0].iter().map(|k| center + k * step).collect();
        all.extend(scan(w, lat, pert, &local, tol)?);
        center = min_by(&all, |t| t.2).0;
    }
    let (argmin_xi, _, min_sigma) = min_by(&all, |t| t.2);
    let min_abs_det = min_by(&all, |t| t.1).1;

    let stable = doubled_min > 0.0 && (coarse_min - doubled_min).abs() / doubled_min < GRID_STABILITY;
    let verdict = if min_sigma > sigma_tol && stable { InjectivityVerdict::Invertible } else { InjectivityVerdict::Degenerate };
    Ok(InjectivityCertificate {
        min_abs_det,
        argmin_xi: argmin_xi.rem_euclid(1.0 / lat.p() as f64),
        min_sigma,
        min_sigma_doubled: doubled_min,
        xi_grid_n,
        verdict,
    })
}

/// `q × p` symbol `Φ_x(ξ)_{as} = Z_p g(x + αa - s, ξ)` of the pre-Gramian
/// `P(x)`: its smallest squared singular value over `ξ` is `A_x`.
pub fn pregramian_symbol(w: &TpWindow, lat: &RationalLattice, x: f64, xi: f64, tol: f64) -> Result<DMatrix<Complex64>> {
    let (p, q) = (lat.p() as usize, lat.q() as usize);
    let mut m = DMatrix::zeros(q, p);
    for a in 0..q {
        for s in 0..p {
            let t = x + (p * a) as f64 / q as f64 - s as f64;
            let z = zak(w, p as f64, t, xi, tol)?;
            m[(a, s)] = Complex64::new(z.re, z.im);
        }
    }
    Ok(m)
}

/// `(min_ξ σ_min², max_ξ σ_max²)` of the symbol at `x`, over `n + 1` nodes
/// of `[0, 1/p]`.
pub fn symbol_bounds_at_x(w: &TpWindow, lat: &RationalLattice, x: f64, n: usize, tol: f64) -> Result<(f64, f64)> {
    xi_grid(lat, n)
        .par_iter()
        .map(|&xi| {
            let sv = pregramian_symbol(w, lat, x, xi, tol)?.singular_values();
            Ok((sv.min().powi(2), sv.max().powi(2)))
        })
        .try_reduce(|| (f64::INFINITY, 0.0), |a, b| Ok((a.0.min(b.0), a.1.max(b.1))))
}
