//! Totally positive windows and their decay envelopes.
//!
//! Four families are supported: the Gaussian `e^{-γ t²}`, the one-sided
//! exponential `e^{-γ t} χ_{[0,∞)}(γ t)`, the hyperbolic secant
//! `(e^{a t} + e^{-a t})^{-1}` and windows given by a finite Fourier-side
//! factorization
//!
//! ```text
//! ĝ(ξ) = c · e^{-γ ξ²} · e^{2πiνξ} · Π_j (1 + 2πi ν_j ξ)^{-1} e^{-2πi ν_j ξ}
//! ```
//!
//! with the convention `ĝ(ξ) = ∫ g(t) e^{-2πitξ} dt`.
//!
//! Without a Gaussian factor the time-domain window is a finite combination
//! of one-sided gamma densities, obtained from the partial-fraction expansion
//! of `Π_j (1 + ν_j s)^{-1}` (repeated poles included). With a Gaussian factor
//! the window is recovered by trapezoidal inversion of `ĝ`, whose aliasing
//! error is controlled through Poisson summation and the decay envelope.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pregramian::{IndexMap, MatrixSection};

/// Largest matrix order accepted by [`tp_samples_matrix`].
pub const MAX_MINOR_ORDER: usize = 12;

const QUADRATURE_MAX_NODES: f64 = 2.0e7;

/// Rate part of a decay envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum DecayRate {
    /// `e^{-λ|t|}`
    Exponential(f64),
    /// `(1 + |t|)^{-σ}`, σ > 1
    Polynomial(f64),
    /// `e^{-κ t²}`
    Gaussian(f64),
}

/// Pointwise bound `|g(t)| <= envelope(t)`, nonincreasing in `|t|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub c: f64,
    pub rate: DecayRate,
}

impl DecayProfile {
    pub fn exponential(c: f64, lambda: f64) -> Self {
        Self { c, rate: DecayRate::Exponential(lambda) }
    }

    pub fn polynomial(c: f64, sigma: f64) -> Self {
        Self { c, rate: DecayRate::Polynomial(sigma) }
    }

    pub fn gaussian(c: f64, kappa: f64) -> Self {
        Self { c, rate: DecayRate::Gaussian(kappa) }
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let a = t.abs();
        match self.rate {
            DecayRate::Exponential(lambda) => self.c * (-lambda * a).exp(),
            DecayRate::Polynomial(sigma) => self.c * (1.0 + a).powf(-sigma),
            DecayRate::Gaussian(kappa) => self.c * (-kappa * a * a).exp(),
        }
    }

    /// Upper bound for `Σ_{m>=0} envelope(start + m·spacing)` with `start >= 0`.
    pub fn lattice_tail(&self, start: f64, spacing: f64) -> f64 {
        let s = start.max(0.0);
        match self.rate {
            DecayRate::Exponential(lambda) => self.c * (-lambda * s).exp() / -(-lambda * spacing).exp_m1(),
            DecayRate::Gaussian(kappa) => {
                // (s + m h)² >= s² + m h (2s + h) for integer m >= 0
                let ratio = -kappa * spacing * (2.0 * s + spacing);
                self.c * (-kappa * s * s).exp() / -ratio.exp_m1()
            }
            DecayRate::Polynomial(sigma) => {
                let base = 1.0 + s;
                self.c * (base.powf(-sigma) + base.powf(1.0 - sigma) / (spacing * (sigma - 1.0)))
            }
        }
    }

    /// Smallest integer `R >= 0` with `2 · lattice_tail(R, spacing) < tol`.
    ///
    /// Every point of a lattice `x + spacing·ℤ` further than `R` from the
    /// origin then contributes less than `tol` in total.
    pub fn radius(&self, spacing: f64, tol: f64) -> f64 {
        let tail = |r: f64| 2.0 * self.lattice_tail(r, spacing);
        if tail(0.0) < tol {
            return 0.0;
        }
        let mut hi = 1.0_f64;
        while tail(hi) >= tol {
            hi *= 2.0;
            if hi > 1e15 {
                return f64::INFINITY;
            }
        }
        let mut lo = hi / 2.0;
        if hi == 1.0 {
            lo = 0.0;
        }
        // integer bisection: tail(lo) >= tol > tail(hi)
        while hi - lo > 1.0 {
            let mid = ((lo + hi) / 2.0).floor();
            if tail(mid) < tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// Parameters of a totally positive window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowKind {
    Gaussian {
        gamma: f64,
    },
    OneSidedExp {
        gamma: f64,
    },
    FiniteProduct {
        #[serde(default)]
        gamma: f64,
        #[serde(default)]
        nu: f64,
        nus: Vec<f64>,
        #[serde(default = "one")]
        c: f64,
    },
    #[serde(alias = "sech")]
    HyperbolicSecant {
        a: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Window description as it appears in configuration files.
///
/// Accepts every [`WindowKind`] plus the shorthand
/// `{"kind":"two_sided_exp","lambda":λ}` for `e^{-λ|t|}`, and an optional
/// amplitude `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    #[serde(flatten)]
    pub kind: SpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecKind {
    Gaussian {
        gamma: f64,
    },
    OneSidedExp {
        gamma: f64,
    },
    TwoSidedExp {
        #[serde(default = "one")]
        lambda: f64,
    },
    FiniteProduct {
        #[serde(default)]
        gamma: f64,
        #[serde(default)]
        nu: f64,
        nus: Vec<f64>,
        #[serde(default = "one")]
        c: f64,
    },
    #[serde(alias = "sech")]
    HyperbolicSecant {
        #[serde(default = "one")]
        a: f64,
    },
}

impl WindowSpec {
    pub fn build(&self) -> Result<TpWindow> {
        let w = match &self.kind {
            SpecKind::Gaussian { gamma } => TpWindow::gaussian(*gamma)?,
            SpecKind::OneSidedExp { gamma } => TpWindow::one_sided_exp(*gamma)?,
            SpecKind::TwoSidedExp { lambda } => TpWindow::two_sided_exp(*lambda)?,
            SpecKind::FiniteProduct { gamma, nu, nus, c } => TpWindow::finite_product(*gamma, *nu, nus.clone(), *c)?,
            SpecKind::HyperbolicSecant { a } => TpWindow::sech(*a)?,
        };
        match self.scale {
            Some(s) => w.scaled(s),
            None => Ok(w),
        }
    }
}

/// One term `coef · Γ_r(u)` of the partial-fraction realization, where `Γ_r`
/// is the inverse transform of `(1 + 2πi ν ξ)^{-r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct GammaTerm {
    coef: f64,
    nu: f64,
    order: u32,
}

impl GammaTerm {
    fn eval(&self, u: f64) -> f64 {
        let v = self.nu;
        // right-continuous at the jump, so opposite poles share g(0)
        let inside = if v > 0.0 { u >= 0.0 } else { u < 0.0 };
        if !inside {
            return 0.0;
        }
        let av = v.abs();
        let r = self.order as i32;
        let a = u.abs();
        self.coef * a.powi(r - 1) * (-u / v).exp() / (av.powi(r) * factorial(self.order - 1))
    }

    /// Constant `B` with `|term(u)| <= B e^{-λ|u|}` for `λ < 1/|ν|` (or `=` when `order == 1`).
    fn envelope_constant(&self, lambda: f64) -> f64 {
        let av = self.nu.abs();
        let r = self.order;
        let peak = if r == 1 {
            1.0
        } else {
            let k = (r - 1) as f64;
            (k / (1.0 / av - lambda)).powf(k) * (-k).exp()
        };
        self.coef.abs() * peak / (av.powi(r as i32) * factorial(r - 1))
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[derive(Debug, Clone, PartialEq)]
enum Realization {
    Direct,
    /// `c √(π/γ) e^{-π²(t+ν)²/γ}`
    PureGaussian {
        amp: f64,
        kappa: f64,
        shift: f64,
    },
    /// `Σ terms(t + shift)`
    PartialFractions {
        shift: f64,
        terms: Vec<GammaTerm>,
    },
    /// trapezoidal inversion of ĝ
    Quadrature,
}

/// A validated totally positive window with a certified decay envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct TpWindow {
    kind: WindowKind,
    scale: f64,
    decay: DecayProfile,
    realization: Realization,
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidWindow(msg.to_string()))
    }
}

impl TpWindow {
    /// `e^{-γ t²}`, γ > 0.
    pub fn gaussian(gamma: f64) -> Result<Self> {
        Self::new(WindowKind::Gaussian { gamma }, 1.0)
    }

    /// `e^{-γ t} χ_{[0,∞)}(γ t)`, γ ≠ 0.
    pub fn one_sided_exp(gamma: f64) -> Result<Self> {
        Self::new(WindowKind::OneSidedExp { gamma }, 1.0)
    }

    /// `(e^{a t} + e^{-a t})^{-1}`, a > 0.
    pub fn sech(a: f64) -> Result<Self> {
        Self::new(WindowKind::HyperbolicSecant { a }, 1.0)
    }

    /// `e^{-λ|t|}`, realized as a two-factor product with `ν_{1,2} = ±1/λ`.
    pub fn two_sided_exp(lambda: f64) -> Result<Self> {
        check(lambda > 0.0 && lambda.is_finite(), "two-sided exponential needs lambda > 0")?;
        Self::finite_product(0.0, 0.0, vec![1.0 / lambda, -1.0 / lambda], 2.0 / lambda)
    }

    pub fn finite_product(gamma: f64, nu: f64, nus: Vec<f64>, c: f64) -> Result<Self> {
        Self::new(WindowKind::FiniteProduct { gamma, nu, nus, c }, 1.0)
    }

    pub fn new(kind: WindowKind, scale: f64) -> Result<Self> {
        check(scale > 0.0 && scale.is_finite(), "scale must be positive")?;
        let (decay, realization) = match &kind {
            WindowKind::Gaussian { gamma } => {
                check(*gamma > 0.0 && gamma.is_finite(), "Gaussian needs gamma > 0")?;
                (DecayProfile::gaussian(scale, *gamma), Realization::Direct)
            }
            WindowKind::OneSidedExp { gamma } => {
                check(*gamma != 0.0 && gamma.is_finite(), "one-sided exponential needs gamma != 0")?;
                (DecayProfile::exponential(scale, gamma.abs()), Realization::Direct)
            }
            WindowKind::HyperbolicSecant { a } => {
                check(*a > 0.0 && a.is_finite(), "hyperbolic secant needs a > 0")?;
                (DecayProfile::exponential(scale, *a), Realization::Direct)
            }
            WindowKind::FiniteProduct { gamma, nu, nus, c } => Self::finite_product_parts(*gamma, *nu, nus, *c, scale)?,
        };
        let w = Self { kind, scale, decay, realization };
        if w.realization == Realization::Quadrature {
            let (nodes, _, _) = w.quadrature_plan(0.0)?;
            check(nodes <= QUADRATURE_MAX_NODES, "Gaussian factor too small for stable inversion")?;
        }
        Ok(w)
    }

    fn finite_product_parts(gamma: f64, nu: f64, nus: &[f64], c: f64, scale: f64) -> Result<(DecayProfile, Realization)> {
        check(!nus.is_empty(), "finite product needs at least one factor")?;
        check(gamma >= 0.0 && gamma.is_finite(), "finite product needs gamma >= 0")?;
        check(c > 0.0 && c.is_finite(), "finite product needs c > 0")?;
        check(nu.is_finite() && nus.iter().all(|v| v.is_finite()), "non-finite shift")?;
        let energy = gamma + nus.iter().map(|v| v * v).sum::<f64>();
        check(energy > 0.0, "gamma + sum nu_j^2 must be positive")?;

        let poles: Vec<f64> = nus.iter().copied().filter(|v| *v != 0.0).collect();
        let shift = nu - poles.iter().sum::<f64>();

        if poles.is_empty() {
            let kappa = PI * PI / gamma;
            let amp = c * (PI / gamma).sqrt();
            let decay = if nu == 0.0 {
                DecayProfile::gaussian(scale * amp, kappa)
            } else {
                // (t+ν)² >= t²/2 - ν²
                DecayProfile::gaussian(scale * amp * (kappa * nu * nu).exp(), kappa / 2.0)
            };
            return Ok((decay, Realization::PureGaussian { amp, kappa, shift: nu }));
        }

        let terms: Vec<GammaTerm> = partial_fractions(&poles).into_iter().map(|t| GammaTerm { coef: c * t.coef, ..t }).collect();
        let repeated = terms.iter().any(|t| t.order > 1);
        let lambda = poles.iter().map(|v| 1.0 / v.abs()).fold(f64::INFINITY, f64::min) * if repeated { 0.75 } else { 1.0 };
        let base: f64 = terms.iter().map(|t| t.envelope_constant(lambda)).sum();
        let mut constant = base * (lambda * shift.abs()).exp();
        if gamma > 0.0 {
            constant *= 2.0 * (lambda * lambda * gamma / (4.0 * PI * PI)).exp();
        }
        let decay = DecayProfile::exponential(scale * constant, lambda);
        let realization = if gamma > 0.0 { Realization::Quadrature } else { Realization::PartialFractions { shift, terms } };
        Ok((decay, realization))
    }

    /// Multiply the window by a positive amplitude.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.kind.clone(), self.scale * factor)
    }

    /// `g_β(t) = β^{-1/2} g(t/β)`; total positivity is preserved.
    pub fn dilate(&self, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("dilation must be positive, got {beta}")));
        }
        let norm = beta.sqrt().recip();
        match &self.kind {
            WindowKind::Gaussian { gamma } => Self::new(WindowKind::Gaussian { gamma: gamma / (beta * beta) }, self.scale * norm),
            WindowKind::OneSidedExp { gamma } => Self::new(WindowKind::OneSidedExp { gamma: gamma / beta }, self.scale * norm),
            WindowKind::HyperbolicSecant { a } => Self::new(WindowKind::HyperbolicSecant { a: a / beta }, self.scale * norm),
            WindowKind::FiniteProduct { gamma, nu, nus, c } => Self::new(
                WindowKind::FiniteProduct {
                    gamma: gamma * beta * beta,
                    nu: nu * beta,
                    nus: nus.iter().map(|v| v * beta).collect(),
                    c: c * beta.sqrt(),
                },
                self.scale,
            ),
        }
    }

    pub fn kind(&self) -> &WindowKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn decay(&self) -> &DecayProfile {
        &self.decay
    }

    /// Whether the window has a jump discontinuity (one-sided exponentials
    /// and single-factor products).
    pub fn has_jump(&self) -> bool {
        match &self.kind {
            WindowKind::OneSidedExp { .. } => true,
            WindowKind::FiniteProduct { gamma, nus, .. } => *gamma == 0.0 && nus.iter().filter(|v| **v != 0.0).count() == 1,
            _ => false,
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match &self.kind {
            WindowKind::Gaussian { gamma } => format!("gaussian(gamma={gamma})"),
            WindowKind::OneSidedExp { gamma } => format!("one_sided_exp(gamma={gamma})"),
            WindowKind::HyperbolicSecant { a } => format!("sech(a={a})"),
            WindowKind::FiniteProduct { gamma, nu, nus, c } => {
                format!("finite_product(gamma={gamma}, nu={nu}, nus={nus:?}, c={c})")
            }
        }
    }

    /// `g(t)`.
    pub fn evaluate(&self, t: f64) -> f64 {
        let raw = match (&self.kind, &self.realization) {
            (WindowKind::Gaussian { gamma }, _) => (-gamma * t * t).exp(),
            (WindowKind::OneSidedExp { gamma }, _) => {
                if gamma * t >= 0.0 {
                    (-gamma * t).exp()
                } else {
                    0.0
                }
            }
            (WindowKind::HyperbolicSecant { a }, _) => {
                let e = (-2.0 * a * t.abs()).exp();
                (-a * t.abs()).exp() / (1.0 + e)
            }
            (_, Realization::PureGaussian { amp, kappa, shift }) => {
                let u = t + shift;
                amp * (-kappa * u * u).exp()
            }
            (_, Realization::PartialFractions { shift, terms }) => {
                let u = t + shift;
                terms.iter().map(|term| term.eval(u)).sum()
            }
            (_, Realization::Quadrature) => {
                return self.quadrature(t).unwrap_or(f64::NAN);
            }
            (_, Realization::Direct) => unreachable!("finite products are never direct"),
        };
        self.scale * raw
    }

    /// `ĝ(ξ)` for finite products (amplitude included).
    pub fn fourier_transform(&self, xi: f64) -> Option<Complex64> {
        let WindowKind::FiniteProduct { gamma, nu, nus, c } = &self.kind else {
            return None;
        };
        let s = Complex64::new(0.0, 2.0 * PI * xi);
        let mut val = Complex64::new(self.scale * c * (-gamma * xi * xi).exp(), 0.0) * (s * nu).exp();
        for v in nus {
            val /= Complex64::new(1.0, 0.0) + s * v;
            val *= (-s * v).exp();
        }
        Some(val)
    }

    /// Evaluate a finite-product window by trapezoidal inversion of `ĝ`,
    /// independent of the closed-form realization. Fails when the required
    /// node count is impractical (no Gaussian factor and few factors).
    pub fn evaluate_by_quadrature(&self, t: f64) -> Result<f64> {
        self.quadrature(t)
    }

    /// (node count, period P, cutoff L) for the trapezoidal inversion at `t`.
    fn quadrature_plan(&self, t: f64) -> Result<(f64, f64, f64)> {
        let WindowKind::FiniteProduct { gamma, nus, c, .. } = &self.kind else {
            return Err(Error::InvalidArgument("quadrature applies to finite products only".into()));
        };
        let amp = self.scale * c;
        // relative to the mass, not the envelope constant, which can be large
        // for clustered poles
        let target = 1e-12 * amp.abs() * (self.decay.envelope(t) / self.decay.envelope(0.0)).max(1e-300);
        // aliases sit at t + m P, m != 0
        let period = t.abs() + self.decay.radius(1.0, target).max(1.0);
        let poles: Vec<f64> = nus.iter().copied().filter(|v| *v != 0.0).collect();
        let n = poles.len() as i32;
        let prod: f64 = poles.iter().map(|v| 2.0 * PI * v.abs()).product();
        // two-sided tail integral of |ĝ| beyond L
        let tail = |l: f64| -> f64 {
            let mut best = f64::INFINITY;
            if *gamma > 0.0 {
                best = best.min(amp * (-gamma * l * l).exp() / (gamma * l));
            }
            if n >= 2 {
                best = best.min(2.0 * amp / (prod * (n - 1) as f64 * l.powi(n - 1)));
            }
            best
        };
        let h = 1.0 / period;
        let mut cutoff = 1.0_f64;
        while tail(cutoff - h) >= target {
            cutoff *= 2.0;
            if cutoff > 1e12 {
                return Err(Error::InvalidArgument("inverse transform does not converge".into()));
            }
        }
        let nodes = cutoff * period;
        if nodes > QUADRATURE_MAX_NODES * 10.0 {
            return Err(Error::InvalidArgument(format!("quadrature needs {nodes:e} nodes; not practical")));
        }
        Ok((nodes, period, cutoff))
    }

    fn quadrature(&self, t: f64) -> Result<f64> {
        let (_, period, cutoff) = self.quadrature_plan(t)?;
        let h = 1.0 / period;
        let count = (cutoff / h).ceil() as u64;
        let mut acc = 0.0;
        for n in 1..=count {
            let xi = n as f64 * h;
            let val = self.fourier_transform(xi).expect("finite product");
            let phase = 2.0 * PI * (t * xi).rem_euclid(1.0);
            acc += val.re * phase.cos() - val.im * phase.sin();
        }
        let dc = self.fourier_transform(0.0).expect("finite product").re;
        Ok(h * (dc + 2.0 * acc))
    }
}

/// Partial-fraction expansion of `Π_j (1 + ν_j s)^{-1}` into
/// `Σ_p Σ_{r<=m_p} A_{p,r} (1 + ν_p s)^{-r}`.
fn partial_fractions(poles: &[f64]) -> Vec<GammaTerm> {
    let mut groups: Vec<(f64, u32)> = Vec::new();
    for &v in poles {
        match groups.iter_mut().find(|g| g.0 == v) {
            Some(g) => g.1 += 1,
            None => groups.push((v, 1)),
        }
    }
    let mut terms = Vec::new();
    for (i, &(v, m)) in groups.iter().enumerate() {
        let m_us = m as usize;
        // Taylor coefficients of H(w) = Π_{other} (1 + u (w-1)/v)^{-mu} at w = 0
        let mut series = vec![0.0; m_us];
        series[0] = 1.0;
        for (j, &(u, mu)) in groups.iter().enumerate() {
            if i == j {
                continue;
            }
            let a = 1.0 - u / v;
            let b = u / v;
            let factor: Vec<f64> = (0..m_us).map(|n| (-b / a).powi(n as i32) / a).collect();
            for _ in 0..mu {
                let mut next = vec![0.0; m_us];
                for (p, sp) in series.iter().enumerate() {
                    for (q, fq) in factor.iter().enumerate().take(m_us - p) {
                        next[p + q] += sp * fq;
                    }
                }
                series = next;
            }
        }
        for r in 1..=m {
            terms.push(GammaTerm { coef: series[(m - r) as usize], nu: v, order: r });
        }
    }
    terms
}

/// Number of consecutive sample points accepted as strictly increasing.
fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|x| x.is_finite())
}

/// The collocation matrix `(g(x_j - y_k))_{j,k}` whose determinant is
/// nonnegative for every totally positive `g`.
pub fn tp_samples_matrix(w: &TpWindow, xs: &[f64], ys: &[f64]) -> Result<MatrixSection> {
    let n = xs.len();
    if n == 0 || n != ys.len() || n > MAX_MINOR_ORDER || !strictly_increasing(xs) || !strictly_increasing(ys) {
        return Err(Error::NonIncreasingSamples { max: MAX_MINOR_ORDER });
    }
    let entries = DMatrix::from_fn(n, n, |j, k| w.evaluate(xs[j] - ys[k]));
    Ok(MatrixSection {
        entries,
        row_offset: 0,
        col_offset: 0,
        row_points: xs.to_vec(),
        col_points: ys.to_vec(),
        index_map: IndexMap::Samples,
        decay_cert: *w.decay(),
    })
}

/// `R` such that `Σ_{|k|>R} envelope(x-k) < tol` for every `x ∈ [0,1]`.
pub fn truncation_radius(w: &TpWindow, tol: f64) -> f64 {
    w.decay().radius(1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_at_origin() {
        let g = TpWindow::gaussian(PI).unwrap();
        assert_eq!(g.evaluate(0.0), 1.0);
    }

    #[test]
    fn one_sided_support() {
        let g = TpWindow::one_sided_exp(1.0).unwrap();
        assert_eq!(g.evaluate(-0.5), 0.0);
        assert_eq!(g.evaluate(0.0), 1.0);
        let h = TpWindow::one_sided_exp(-2.0).unwrap();
        assert_eq!(h.evaluate(0.5), 0.0);
        assert!((h.evaluate(-0.5) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn two_sided_product_closed_form() {
        // ν_1 = 1, ν_2 = -1, c = 1 gives ½ e^{-|t|}
        let g = TpWindow::finite_product(0.0, 0.0, vec![1.0, -1.0], 1.0).unwrap();
        assert!((g.evaluate(1.0) - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((g.evaluate(-2.5) - 0.5 * (-2.5f64).exp()).abs() < 1e-15);
        assert!((g.evaluate(0.0) - 0.5).abs() < 1e-15);
        let e = TpWindow::two_sided_exp(1.0).unwrap();
        assert!((e.evaluate(0.7) - (-0.7f64).exp()).abs() < 1e-15);
        assert!(!e.has_jump());
    }

    #[test]
    fn repeated_pole_is_gamma_density() {
        // (1 + 2πiξ)^{-2} ↔ t e^{-t} on t > 0, after undoing the centering shift
        let g = TpWindow::finite_product(0.0, 2.0, vec![1.0, 1.0], 1.0).unwrap();
        for t in [0.1, 0.5, 1.0, 3.0] {
            assert!((g.evaluate(t) - t * (-t).exp()).abs() < 1e-14, "t={t}");
        }
        assert_eq!(g.evaluate(-0.3), 0.0);
    }

    #[test]
    fn mixed_multiplicities_match_convolution_structure() {
        // ∫ g = ĝ(0) = c
        let g = TpWindow::finite_product(0.0, 0.0, vec![1.0, 1.0, -0.5, 2.0], 1.5).unwrap();
        let h = 1e-3;
        let s: f64 = (-40_000..60_000).map(|i| g.evaluate(i as f64 * h) * h).sum();
        assert!((s - 1.5).abs() < 1e-3, "mass {s}");
    }

    #[test]
    fn invalid_parameters() {
        assert!(TpWindow::gaussian(-1.0).is_err());
        assert!(TpWindow::gaussian(0.0).is_err());
        assert!(TpWindow::one_sided_exp(0.0).is_err());
        assert!(TpWindow::sech(0.0).is_err());
        assert!(TpWindow::finite_product(0.0, 0.0, vec![0.0, 0.0], 1.0).is_err());
        assert!(TpWindow::finite_product(-1.0, 0.0, vec![1.0], 1.0).is_err());
        assert!(TpWindow::finite_product(0.0, 0.0, vec![], 1.0).is_err());
        assert!(TpWindow::finite_product(0.0, 0.0, vec![1.0], 0.0).is_err());
    }

    #[test]
    fn truncation_radius_examples() {
        let g = TpWindow::gaussian(PI).unwrap();
        let r = truncation_radius(&g, 1e-12);
        assert!(r <= 4.0, "R = {r}");
        assert!((-PI * 9.0).exp() < 1e-12);

        let poly = DecayProfile::polynomial(1.0, 2.0);
        let r = poly.radius(1.0, 1e-3);
        assert!((1000.0..=2001.0).contains(&r), "R = {r}");

        let e = TpWindow::one_sided_exp(1.0).unwrap();
        let r = truncation_radius(&e, 1e-10);
        assert!(r >= (10.0 * 10f64.ln()).floor() && r <= 27.0, "R = {r}");
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let tail: f64 = (1..200).flat_map(|k| [x - (r + k as f64), x + (r + k as f64)]).map(|t| e.evaluate(t)).sum();
            assert!(tail < 1e-10, "tail {tail} at x={x}");
        }
    }

    #[test]
    fn samples_matrix_examples() {
        let g = TpWindow::gaussian(PI).unwrap();
        let m = tp_samples_matrix(&g, &[0.0], &[0.0]).unwrap();
        assert_eq!(m.entries[(0, 0)], 1.0);
        let m = tp_samples_matrix(&g, &[0.0, 1.0], &[0.0, 1.0]).unwrap();
        let e = (-PI).exp();
        assert_eq!(m.entries[(0, 1)], e);
        assert_eq!(m.entries[(1, 0)], e);
        assert!((m.entries.determinant() - (1.0 - (-2.0 * PI).exp())).abs() < 1e-15);

        let h = TpWindow::one_sided_exp(1.0).unwrap();
        let m = tp_samples_matrix(&h, &[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        // lower triangular with unit diagonal
        assert_eq!(m.entries[(0, 1)], 0.0);
        assert_eq!(m.entries[(1, 2)], 0.0);
        assert!((m.entries.determinant() - 1.0).abs() < 1e-14);

        assert!(tp_samples_matrix(&g, &[1.0, 0.0], &[0.0, 1.0]).is_err());
        assert!(tp_samples_matrix(&g, &[0.0, 1.0], &[0.0]).is_err());
        let long: Vec<f64> = (0..13).map(f64::from).collect();
        assert!(tp_samples_matrix(&g, &long, &long).is_err());
    }

    #[test]
    fn dilation_matches_definition() {
        let beta = 2.0 / 3.0;
        let windows = [
            TpWindow::gaussian(PI).unwrap(),
            TpWindow::one_sided_exp(1.3).unwrap(),
            TpWindow::sech(0.8).unwrap(),
            TpWindow::two_sided_exp(1.0).unwrap(),
            TpWindow::finite_product(0.0, 0.3, vec![0.5, 0.5, -1.0], 1.0).unwrap(),
        ];
        for w in &windows {
            let d = w.dilate(beta).unwrap();
            for t in [-2.0, -0.4, 0.0, 0.3, 1.7] {
                let expect = beta.powf(-0.5) * w.evaluate(t / beta);
                assert!((d.evaluate(t) - expect).abs() < 1e-13, "{} at {t}", w.label());
            }
        }
    }

    #[test]
    fn window_spec_parsing() {
        let s: WindowSpec = serde_json_like(r#"{"kind":"gaussian","gamma":2.5}"#);
        assert_eq!(s.build().unwrap().kind(), &WindowKind::Gaussian { gamma: 2.5 });
        let s: WindowSpec = serde_json_like(r#"{"kind":"sech","a":2.0,"scale":0.5}"#);
        let w = s.build().unwrap();
        assert_eq!(w.scale(), 0.5);
    }

    fn serde_json_like(s: &str) -> WindowSpec {
        serde_json::from_str(s).unwrap()
    }
}
