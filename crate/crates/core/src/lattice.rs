//! Rational lattices `αℤ × βℤ`, the reduction to `β = 1`, and periodic
//! perturbation sequences selecting `{k + δ_k}` inside `x + αℤ`.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// Membership tolerance for `k + δ_k ∈ x + αℤ`.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Largest denominator accepted when rationalizing decimal input.
pub const MAX_DENOMINATOR: i64 = 1_000_000;

/// Lattice `(p/q)ℤ × ℤ` obtained from `αℤ × βℤ` with `p/q = αβ` in lowest
/// terms. The original `β` is kept as the dilation to apply to the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalLattice {
    p: u64,
    q: u64,
    dilation: Ratio<i64>,
}

impl RationalLattice {
    /// Lattice with `α = p/q`, `β = 1`.
    pub fn from_ratio(p: i64, q: i64) -> Result<Self> {
        reduce(Ratio::new_raw(p, q), Ratio::from_integer(1))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Reduced `α` (equal to `αβ` of the original pair).
    pub fn alpha(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn alpha_ratio(&self) -> Ratio<i64> {
        Ratio::new(self.p as i64, self.q as i64)
    }

    /// The original `β`; windows are replaced by `g_β(t) = β^{-1/2} g(t/β)`.
    pub fn dilation(&self) -> Ratio<i64> {
        self.dilation
    }

    pub fn dilation_f64(&self) -> f64 {
        *self.dilation.numer() as f64 / *self.dilation.denom() as f64
    }

    /// Density guard for operations that need `αβ < 1`.
    pub fn require_subcritical(&self) -> Result<()> {
        if self.p < self.q {
            Ok(())
        } else {
            Err(Error::DensityViolation { alpha_beta: self.alpha() })
        }
    }

    /// Whether `t ∈ x + αℤ` up to [`MEMBERSHIP_TOL`].
    pub fn contains(&self, x: f64, t: f64) -> bool {
        let steps = (t - x) * self.q as f64 / self.p as f64;
        (steps - steps.round()).abs() * self.alpha() <= MEMBERSHIP_TOL
    }
}

/// Replace `(α, β)` by `(αβ, 1)`; the window must be dilated by `β`.
pub fn reduce(alpha: Ratio<i64>, beta: Ratio<i64>) -> Result<RationalLattice> {
    let positive = |r: &Ratio<i64>| *r.denom() != 0 && (*r.numer() > 0) == (*r.denom() > 0) && *r.numer() != 0;
    if !positive(&alpha) || !positive(&beta) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha}, beta = {beta} must be positive")));
    }
    let alpha = Ratio::new(*alpha.numer(), *alpha.denom());
    let beta = Ratio::new(*beta.numer(), *beta.denom());
    let ab = alpha * beta;
    Ok(RationalLattice { p: *ab.numer() as u64, q: *ab.denom() as u64, dilation: beta })
}

/// Parse `"P/Q"`, an integer, or a decimal.
///
/// Returns the rational and whether a decimal had to be rationalized, in
/// which case the denominator is capped at [`MAX_DENOMINATOR`].
pub fn parse_rational(s: &str) -> Result<(Ratio<i64>, bool)> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok((Ratio::new(n, d), false));
    }
    if let Ok(n) = s.parse::<i64>() {
        return Ok((Ratio::from_integer(n), false));
    }
    let v: f64 = s.parse().map_err(|_| bad())?;
    if !v.is_finite() {
        return Err(bad());
    }
    Ok((best_rational(v, MAX_DENOMINATOR), true))
}

/// Best rational approximation with denominator at most `max_den`
/// (continued-fraction convergents and semiconvergents).
pub fn best_rational(v: f64, max_den: i64) -> Ratio<i64> {
    let sign = if v < 0.0 { -1 } else { 1 };
    let mut x = v.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    loop {
        let a = x.floor();
        if a > i64::MAX as f64 / 4.0 {
            break;
        }
        let a = a as i64;
        let q2 = a.saturating_mul(q1).saturating_add(q0);
        if q2 > max_den {
            // largest semiconvergent that still fits
            let k = (max_den - q0) / q1.max(1);
            let (ps, qs) = (k * p1 + p0, k * q1 + q0);
            if q1 != 0 && ((ps as f64 / qs as f64) - v.abs()).abs() < ((p1 as f64 / q1 as f64) - v.abs()).abs() {
                p1 = ps;
                q1 = qs;
            }
            break;
        }
        let p2 = a * p1 + p0;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = x - a as f64;
        if frac.abs() < 1e-15 || (p1 as f64 / q1 as f64 - v.abs()).abs() < f64::EPSILON * v.abs() {
            break;
        }
        x = 1.0 / frac;
    }
    Ratio::new(sign * p1, q1.max(1))
}

/// One period of `δ` together with the data it was selected from.
///
/// The sequence extends by `δ_{k+np} = δ_k`; every `k + δ_k` lies in
/// `x + αℤ` and every `δ_k` lies in `[x0+M-1+eps, x0+M-eps]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationSeq {
    pub deltas: Vec<f64>,
    /// lattice indices: `l + δ_l = x + α j_l`
    pub js: Vec<i64>,
    pub m: i64,
    pub eps: f64,
    pub x: f64,
    pub x0: f64,
}

impl PerturbationSeq {
    /// Period `p`.
    pub fn period(&self) -> usize {
        self.deltas.len()
    }

    /// `δ_k` for any integer `k`.
    pub fn delta(&self, k: i64) -> f64 {
        self.deltas[k.rem_euclid(self.deltas.len() as i64) as usize]
    }

    /// Admissible interval `[x0+M-1+eps, x0+M-eps]`.
    pub fn interval(&self) -> (f64, f64) {
        admissible_interval(self.x0, self.m, self.eps, 0)
    }

    /// Check the interval and lattice-membership invariants over `k ∈ [-n, n]`.
    pub fn check(&self, lat: &RationalLattice, n: i64) -> Result<()> {
        let (lo, hi) = self.interval();
        for k in -n..=n {
            let d = self.delta(k);
            if d < lo - MEMBERSHIP_TOL || d > hi + MEMBERSHIP_TOL {
                return Err(Error::PerturbationOutsideInterval { k: k.rem_euclid(self.period() as i64) as usize, delta: d, lo, hi });
            }
            if !lat.contains(self.x, k as f64 + d) {
                return Err(Error::InvalidArgument(format!("k + delta_k = {} not in x + alpha Z", k as f64 + d)));
            }
        }
        Ok(())
    }
}

fn admissible_interval(x0: f64, m: i64, eps: f64, l: i64) -> (f64, f64) {
    let base = l as f64 + x0 + m as f64;
    (base - 1.0 + eps, base - eps)
}

/// Default `eps = (1 - α)/4`.
pub fn default_eps(lat: &RationalLattice) -> f64 {
    (1.0 - lat.alpha()) / 4.0
}

/// `M` minimizing `|x0 + M - 1/2|`, ties toward the smaller `M`.
pub fn choose_m(x0: f64) -> i64 {
    let target = 0.5 - x0;
    let lo = target.floor() as i64;
    let hi = lo + 1;
    let dist = |m: i64| (x0 + m as f64 - 0.5).abs();
    if dist(hi) < dist(lo) {
        hi
    } else {
        lo
    }
}

/// Select `j_l` with `x + (p/q) j_l ∈ [l+x0+M-1+eps, l+x0+M-eps]` for
/// `l = 0..p-1` and set `δ_l = x + (p/q) j_l - l`.
///
/// Among admissible lattice points the one nearest the interval center is
/// taken (farthest from the Zak zero), ties toward the larger point.
pub fn select_perturbation(lat: &RationalLattice, x: f64, x0: f64, eps: f64, m: i64) -> Result<PerturbationSeq> {
    lat.require_subcritical()?;
    let limit = (1.0 - lat.alpha()) / 2.0;
    if !(eps > 0.0 && eps < limit) {
        return Err(Error::EpsTooLarge { eps, limit });
    }
    let (p, q) = (lat.p() as i64, lat.q() as i64);
    let point = |j: i64| x + (p * j) as f64 / q as f64;
    let mut js = Vec::with_capacity(p as usize);
    let mut deltas = Vec::with_capacity(p as usize);
    for l in 0..p {
        let (lo, hi) = admissible_interval(x0, m, eps, l);
        let center = 0.5 * (lo + hi);
        let first = (((lo - x) * q as f64 / p as f64) - 1e-9).ceil() as i64 - 1;
        let last = (((hi - x) * q as f64 / p as f64) + 1e-9).floor() as i64 + 1;
        let best = (first..=last)
            .filter(|&j| {
                let t = point(j);
                t >= lo - MEMBERSHIP_TOL && t <= hi + MEMBERSHIP_TOL
            })
            .min_by(|&a, &b| {
                let da = (point(a) - center).abs();
                let db = (point(b) - center).abs();
                da.partial_cmp(&db).unwrap().then(b.cmp(&a))
            })
            .ok_or(Error::NoAdmissiblePoint { l: l as usize })?;
        js.push(best);
        deltas.push(point(best) - l as f64);
    }
    if js.windows(2).any(|w| w[0] >= w[1]) || js[js.len() - 1] - js[0] >= q {
        return Err(Error::InvalidArgument(format!("lattice indices {js:?} not increasing within one period")));
    }
    Ok(PerturbationSeq { deltas, js, m, eps, x, x0 })
}
