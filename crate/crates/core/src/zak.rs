//! Truncated Zak transforms `Z_p g(x, ξ) = Σ_k g(x - pk) e^{2πi pkξ}` with a
//! certified truncation error, and location of the zero of `Zg` on the
//! fundamental domain `[0,1)²`.
//!
//! For real windows `Zg(x, 1/2)` is real and satisfies
//! `Zg(x + 1, 1/2) = -Zg(x, 1/2)`, so it changes sign an odd number of times
//! per period. For a totally positive window that number is one and the
//! unique zero of `Zg` sits on the line `ξ = 1/2`. Windows with a jump (the
//! one-sided exponential) change sign across the discontinuity instead of
//! passing through zero.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::window::TpWindow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZakValue {
    pub re: f64,
    pub im: f64,
    /// bound on `|computed - exact|`
    pub trunc_err: f64,
}

impl ZakValue {
    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// `e^{2πi f}` with exact values at quarter turns.
fn unit_phase(frac: f64) -> (f64, f64) {
    if frac == 0.0 {
        (1.0, 0.0)
    } else if frac == 0.5 {
        (-1.0, 0.0)
    } else if frac == 0.25 {
        (0.0, 1.0)
    } else if frac == 0.75 {
        (0.0, -1.0)
    } else {
        let a = 2.0 * PI * frac;
        (a.cos(), a.sin())
    }
}

/// `Z_p g(x, ξ)` truncated to the lattice points `|x - pk| <= R` with
/// `2 Σ tail < tol`.
pub fn zak(w: &TpWindow, p: f64, x: f64, xi: f64, tol: f64) -> Result<ZakValue> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::NonPositivePeriod(p));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let radius = w.decay().radius(p, tol);
    let first = ((x - radius) / p).ceil() as i64;
    let last = ((x + radius) / p).floor() as i64;
    let (mut re, mut im) = (0.0, 0.0);
    for k in first..=last {
        let g = w.evaluate(x - p * k as f64);
        if g == 0.0 {
            continue;
        }
        let (c, s) = unit_phase((p * k as f64 * xi).rem_euclid(1.0));
        re += g * c;
        im += g * s;
    }
    let trunc_err = 2.0 * w.decay().lattice_tail(radius, p);
    Ok(ZakValue { re, im, trunc_err })
}

/// The real number `Zg(x, 1/2) = Σ_k (-1)^k g(x - k)`.
pub fn zak_on_half_line(w: &TpWindow, x: f64, tol: f64) -> Result<f64> {
    let z = zak(w, 1.0, x, 0.5, tol)?;
    if z.im.abs() >= tol {
        return Err(Error::HalfLineNotReal { x, im: z.im, tol });
    }
    Ok(z.re)
}

/// How the sign change of `Zg(·, 1/2)` is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKind {
    /// continuous window: a genuine zero
    Root,
    /// window with a jump: the sign flips across the discontinuity
    Jump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZakZero {
    pub x0: f64,
    pub xi0: f64,
    /// `|Zg(x0, xi0)|` at convergence (the jump size for [`ZeroKind::Jump`])
    pub residual: f64,
    /// `ξ` of the grid cell minimizing `|Zg|`
    pub grid_xi: f64,
    pub grid_n: usize,
    pub kind: ZeroKind,
}

pub const DEFAULT_GRID_N: usize = 256;
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Scan `|Zg|` on a `grid_n × grid_n` grid over `[0,1)²`, then refine the
/// sign change of `x ↦ Zg(x, 1/2)` by bisection.
pub fn locate_zero(w: &TpWindow, grid_n: usize, zero_tol: f64) -> Result<ZakZero> {
    if grid_n < 64 {
        return Err(Error::InvalidArgument(format!("grid_n = {grid_n} < 64")));
    }
    let tol = (zero_tol * 1e-2).min(1e-12);
    let n = grid_n as f64;

    let grid: Vec<Vec<f64>> = (0..grid_n)
        .into_par_iter()
        .map(|i| (0..grid_n).map(|j| zak(w, 1.0, i as f64 / n, j as f64 / n, tol).map(|z| z.abs()).unwrap_or(f64::NAN)).collect())
        .collect();
    let (mut bi, mut bj, mut best) = (0usize, 0usize, f64::INFINITY);
    for (i, row) in grid.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if *v < best {
                (bi, bj, best) = (i, j, *v);
            }
        }
    }
    let grid_xi = bj as f64 / n;
    if (grid_xi - 0.5).abs() > 1.0 / n {
        return Err(Error::ZeroOffHalfLine { xi: grid_xi });
    }

    // sign structure of the real section over one closed period
    let section: Vec<f64> = (0..=grid_n).map(|i| zak_on_half_line(w, i as f64 / n, tol)).collect::<Result<_>>()?;
    let changes: Vec<usize> = (0..grid_n).filter(|&i| section[i] == 0.0 || section[i].signum() != section[i + 1].signum()).collect();
    if changes.len() != 1 {
        return Err(Error::MultipleZeros(format!("Zg(., 1/2) changes sign {} times on [0, 1]", changes.len())));
    }
    let c = changes[0];
    if circular_distance(c as f64 / n, bi as f64 / n) > 1.5 / n && circular_distance((c + 1) as f64 / n, bi as f64 / n) > 1.5 / n {
        return Err(Error::MultipleZeros(format!(
            "grid minimum at x = {} away from the sign change at x = {}",
            bi as f64 / n,
            c as f64 / n
        )));
    }

    let (mut a, mut b) = (c as f64 / n, (c + 1) as f64 / n);
    let (mut fa, mut fb) = (section[c], section[c + 1]);
    for _ in 0..200 {
        if fa == 0.0 {
            b = a;
            fb = fa;
            break;
        }
        if fb == 0.0 {
            a = b;
            fa = fb;
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = zak_on_half_line(w, mid, tol)?;
        if fm.signum() == fa.signum() {
            (a, fa) = (mid, fm);
        } else {
            (b, fb) = (mid, fm);
        }
    }
    let (x_ref, residual) = if fa.abs() <= fb.abs() { (a, fa.abs()) } else { (b, fb.abs()) };
    let x0 = x_ref.rem_euclid(1.0);
    let x0 = if x0 > 1.0 - 1e-12 { 0.0 } else { x0 };

    let kind = if residual < zero_tol {
        ZeroKind::Root
    } else if w.has_jump() {
        ZeroKind::Jump
    } else {
        return Err(Error::ZeroNotFound { residual });
    };

    for (i, row) in grid.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let far = circular_distance(i as f64 / n, x0) > 1.0 / n || circular_distance(j as f64 / n, 0.5) > 1.0 / n;
            if far && *v < 10.0 * zero_tol {
                return Err(Error::MultipleZeros(format!("|Zg| = {v:e} at ({}, {})", i as f64 / n, j as f64 / n)));
            }
        }
    }

    Ok(ZakZero { x0, xi0: 0.5, residual, grid_xi, grid_n, kind })
}

/// `min |Zg(t, 1/2)|` over a uniform grid of `[lo, hi]` (endpoints included).
pub fn half_line_gap(w: &TpWindow, lo: f64, hi: f64, n: usize, tol: f64) -> Result<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|i| zak_on_half_line(w, lo + (hi - lo) * i as f64 / n as f64, tol).map(f64::abs))
        .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v)))
}
