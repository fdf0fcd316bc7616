//! Chebyshev polynomials in time on a subdomain: rigorous evaluation,
//! coefficient-sum C⁰ bounds, interpolation at Chebyshev nodes (interval
//! discrete cosine transform), antiderivatives, and Bernstein-ellipse
//! interpolation error bounds for the function families appearing in the
//! defect estimates.
//!
//! Conventions, fixed project-wide:
//! - coefficients are a plain sum p(t) = Σ_k p_k T_k(s(t)) with s the affine
//!   map of `[t_lo, t_hi]` onto [-1, 1];
//! - nodes are Chebyshev points of the second kind (extrema), listed in
//!   ascending time order: s_j = -cos(jπ/K̃), j = 0..K̃, so the subdomain
//!   endpoints are nodes.

use crate::interval::{self, CInterval, Interval, C_ZERO, ONE, ZERO};
use crate::seq::{FourierSeq, Symmetry};
use crate::{Error, Result};

/// A Chebyshev polynomial with complex interval coefficients on a time
/// subdomain.
#[derive(Clone, Debug)]
pub struct ChebPoly {
    pub t_lo: f64,
    pub t_hi: f64,
    pub coeffs: Vec<CInterval>,
}

impl ChebPoly {
    pub fn new(t_lo: f64, t_hi: f64, coeffs: Vec<CInterval>) -> Self {
        assert!(t_lo < t_hi, "degenerate time domain [{t_lo}, {t_hi}]");
        assert!(!coeffs.is_empty());
        ChebPoly { t_lo, t_hi, coeffs }
    }

    pub fn constant(t_lo: f64, t_hi: f64, c: CInterval) -> Self {
        Self::new(t_lo, t_hi, vec![c])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Unit coordinate s(t) = (2t - t_lo - t_hi)/(t_hi - t_lo).
    pub fn to_unit(&self, t: Interval) -> Interval {
        let two_t = t.scale2(1);
        let num = two_t - Interval::point(self.t_lo) - Interval::point(self.t_hi);
        let den = Interval::point(self.t_hi) - Interval::point(self.t_lo);
        num / den
    }

    /// Evaluate at a time enclosure inside the domain.
    pub fn eval(&self, t: Interval) -> Result<CInterval> {
        if t.lo < self.t_lo || t.hi > self.t_hi {
            return Err(Error::Usage(format!(
                "evaluation time {t:?} outside domain [{}, {}]",
                self.t_lo, self.t_hi
            )));
        }
        // Clamp the unit coordinate: rounding in to_unit may spill a hair
        // past ±1 even for in-domain t.
        let s = self
            .to_unit(t)
            .intersect(Interval::new(-1.0, 1.0))
            .expect("in-domain time maps into [-1,1]");
        Ok(self.eval_unit(s))
    }

    /// Clenshaw recurrence at a unit coordinate s ∈ [-1, 1].
    pub fn eval_unit(&self, s: Interval) -> CInterval {
        clenshaw(&self.coeffs, s)
    }

    /// Upper bound Σ_k |p_k| on the C⁰ norm over the domain.
    pub fn c0_bound(&self) -> Interval {
        Interval::sum(self.coeffs.iter().map(|c| c.abs()))
    }

    pub fn scale(&self, s: CInterval) -> ChebPoly {
        ChebPoly {
            t_lo: self.t_lo,
            t_hi: self.t_hi,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &ChebPoly) -> ChebPoly {
        assert_eq!((self.t_lo, self.t_hi), (other.t_lo, other.t_hi));
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &Vec<CInterval>, k: usize| v.get(k).copied().unwrap_or(C_ZERO);
        ChebPoly {
            t_lo: self.t_lo,
            t_hi: self.t_hi,
            coeffs: (0..n).map(|k| get(&self.coeffs, k) + get(&other.coeffs, k)).collect(),
        }
    }

    pub fn sub(&self, other: &ChebPoly) -> ChebPoly {
        self.add(&other.scale(CInterval::point(-1.0, 0.0)))
    }

    /// Product via T_a·T_b = (T_{a+b} + T_{|a-b|})/2.
    pub fn mul(&self, other: &ChebPoly) -> ChebPoly {
        assert_eq!((self.t_lo, self.t_hi), (other.t_lo, other.t_hi));
        let mut out = vec![C_ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (a, &pa) in self.coeffs.iter().enumerate() {
            for (b, &pb) in other.coeffs.iter().enumerate() {
                let half = (pa * pb).scale(ONE.scale2(-1));
                out[a + b] = out[a + b] + half;
                out[a.abs_diff(b)] = out[a.abs_diff(b)] + half;
            }
        }
        ChebPoly { t_lo: self.t_lo, t_hi: self.t_hi, coeffs: out }
    }

    /// Antiderivative A(t) = ∫_{t_lo}^t p, in the same basis (degree + 1).
    pub fn antiderivative(&self) -> ChebPoly {
        let unit = antiderivative_unit(&self.coeffs);
        let h = (Interval::point(self.t_hi) - Interval::point(self.t_lo)).scale2(-1);
        ChebPoly {
            t_lo: self.t_lo,
            t_hi: self.t_hi,
            coeffs: unit.into_iter().map(|c| c.scale(h)).collect(),
        }
    }

    /// Average value over the domain: ½∫_{-1}^1 p(s) ds = Σ_{k even} p_k/(1-k²).
    pub fn average(&self) -> CInterval {
        let mut acc = C_ZERO;
        for (k, &c) in self.coeffs.iter().enumerate().step_by(2) {
            let w = ONE / Interval::point(1.0 - (k * k) as f64);
            acc = acc + c.scale(w);
        }
        acc
    }

    /// Interpolate rigorously sampled values at the K̃+1 second-kind nodes of
    /// the domain (ascending order). The result's coefficients enclose the
    /// exact interpolant's coefficients.
    pub fn interpolate(t_lo: f64, t_hi: f64, samples: &[CInterval]) -> ChebPoly {
        ChebPoly { t_lo, t_hi, coeffs: dct_coeffs(samples) }
    }
}

pub(crate) fn clenshaw(coeffs: &[CInterval], s: Interval) -> CInterval {
    let two_s = s.scale2(1);
    let mut b1 = C_ZERO;
    let mut b2 = C_ZERO;
    for &c in coeffs.iter().skip(1).rev() {
        let b = c + b1.scale(two_s) - b2;
        b2 = b1;
        b1 = b;
    }
    coeffs[0] + b1.scale(s) - b2
}

/// Antiderivative on the unit domain with A(-1) = 0.
pub(crate) fn antiderivative_unit(c: &[CInterval]) -> Vec<CInterval> {
    let kmax = c.len() - 1;
    let get = |k: usize| c.get(k).copied().unwrap_or(C_ZERO);
    let mut a = vec![C_ZERO; kmax + 2];
    // A_1 = c_0 - c_2/2; A_k = (c_{k-1} - c_{k+1})/(2k) for k ≥ 2.
    a[1] = get(0) - get(2).scale(ONE.scale2(-1));
    for k in 2..=(kmax + 1) {
        let d = ONE / Interval::point(2.0 * k as f64);
        a[k] = (get(k - 1) - get(k + 1)).scale(d);
    }
    // A_0 fixes A(-1) = Σ A_k (-1)^k = 0.
    let mut at_minus1 = C_ZERO;
    for (k, &ak) in a.iter().enumerate().skip(1) {
        if k % 2 == 0 {
            at_minus1 = at_minus1 + ak;
        } else {
            at_minus1 = at_minus1 - ak;
        }
    }
    a[0] = -at_minus1;
    a
}

/// Ascending second-kind nodes of [t_lo, t_hi] as interval enclosures:
/// t_j = mid - h·cos(jπ/K̃).
pub fn cheb_nodes(t_lo: f64, t_hi: f64, k_tilde: usize) -> Vec<Interval> {
    let mid = (Interval::point(t_lo) + Interval::point(t_hi)).scale2(-1);
    let h = (Interval::point(t_hi) - Interval::point(t_lo)).scale2(-1);
    cheb_nodes_unit(k_tilde)
        .into_iter()
        .map(|s| {
            (mid + h * s)
                .intersect(Interval::new(t_lo, t_hi))
                .expect("node inside domain")
        })
        .collect()
}

/// Ascending second-kind nodes on [-1, 1]: s_j = -cos(jπ/K̃).
pub fn cheb_nodes_unit(k_tilde: usize) -> Vec<Interval> {
    if k_tilde == 0 {
        return vec![ZERO];
    }
    let pi = interval::pi();
    (0..=k_tilde)
        .map(|j| {
            if j == 0 {
                Interval::point(-1.0)
            } else if j == k_tilde {
                Interval::point(1.0)
            } else if 2 * j == k_tilde {
                ZERO
            } else {
                let ang = pi * j as f64 / k_tilde as f64;
                (-ang.cos()).intersect(Interval::new(-1.0, 1.0)).unwrap()
            }
        })
        .collect()
}

/// Interval DCT-I: Chebyshev coefficients of the degree-K̃ interpolant through
/// values at the ascending second-kind nodes.
fn dct_coeffs(samples: &[CInterval]) -> Vec<CInterval> {
    let kt = samples.len() - 1;
    if kt == 0 {
        return vec![samples[0]];
    }
    // cos(mπ/K̃) for m = 0..2K̃ (the products k·j are reduced mod 2K̃).
    let pi = interval::pi();
    let cos_tbl: Vec<Interval> = (0..2 * kt)
        .map(|m| (pi * m as f64 / kt as f64).cos())
        .collect();
    // Ascending nodes s_j = -cos(jπ/K̃) = cos((K̃-j)π/K̃): sample j sits at
    // standard (descending) index K̃-j.
    let f = |j_std: usize| samples[kt - j_std];
    (0..=kt)
        .map(|k| {
            let mut acc = C_ZERO;
            for j in 0..=kt {
                let w = cos_tbl[(k * j) % (2 * kt)];
                let term = f(j).scale(w);
                if j == 0 || j == kt {
                    acc = acc + term.scale(ONE.scale2(-1));
                } else {
                    acc = acc + term;
                }
            }
            let norm = if k == 0 || k == kt { 1.0 } else { 2.0 };
            acc.scale(Interval::point(norm) / Interval::point(kt as f64))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Bernstein-ellipse interpolation error bounds
// ---------------------------------------------------------------------------

/// Families of functions whose degree-K̃ Chebyshev interpolation error can be
/// bounded via analyticity on a Bernstein ellipse E_ρ (in the unit variable).
pub enum InterpErrorModel {
    /// φ(s) = v·e^{w(s+1)} with |v| ≤ `scale` (so φ(-1) = v).
    Exponential { scale: Interval, w: CInterval },
    /// φ(s) = ∫_{-1}^s e^{w(s-σ)} P(σ) dσ with Σ|p_k| T_k-wise bounds on P.
    Integral { w: CInterval, p_abs: Vec<Interval> },
}

/// Semi-axes (a, b) of E_ρ = {(ρe^{iθ} + ρ^{-1}e^{-iθ})/2}.
fn ellipse_axes(rho: Interval) -> (Interval, Interval) {
    let inv = ONE / rho;
    ((rho + inv).scale2(-1), (rho - inv).scale2(-1))
}

/// sup_{s ∈ E_ρ} Re(w·s) = sqrt(Re(w)²a² + Im(w)²b²).
fn sup_re_on_ellipse(w: CInterval, rho: Interval) -> Interval {
    let (a, b) = ellipse_axes(rho);
    ((w.re * a).powi(2) + (w.im * b).powi(2))
        .sqrt()
        .expect("nonnegative radicand")
}

/// sup_{E_ρ} |T_k| = (ρ^k + ρ^{-k})/2.
fn cheb_sup_on_ellipse(k: u32, rho: Interval) -> Interval {
    (rho.powi(k) + ONE / rho.powi(k)).scale2(-1)
}

/// Sup of |φ| over E_ρ for the given family.
fn family_sup(model: &InterpErrorModel, rho: Interval) -> Interval {
    match model {
        InterpErrorModel::Exponential { scale, w } => {
            let s = sup_re_on_ellipse(*w, rho);
            scale.abs() * (w.re + s).exp()
        }
        InterpErrorModel::Integral { w, p_abs } => {
            // For s ∈ E_ρ and σ on the segment [-1, s] ⊂ E_ρ (convexity):
            // Re(w(s-σ)) = (1-τ)Re(w(s+1)) ≤ (Re w + sup Re(ws))⁺ and the
            // path length is |s+1| ≤ a+1.
            let s = sup_re_on_ellipse(*w, rho);
            let (a, _) = ellipse_axes(rho);
            let exp_factor = (w.re + s).pos().exp();
            let mut p_sup = ZERO;
            for (k, &pk) in p_abs.iter().enumerate() {
                p_sup = p_sup + pk.abs() * cheb_sup_on_ellipse(k as u32, rho);
            }
            (a + 1.0) * exp_factor * p_sup
        }
    }
}

/// Error bound 4·M(ρ)·ρ^{-K̃}/(ρ-1) at a specific ρ > 1.
fn ellipse_error_at(model: &InterpErrorModel, rho: Interval, k_tilde: u32) -> Interval {
    let m = family_sup(model, rho);
    let decay = ONE / rho.powi(k_tilde);
    let denom = rho - 1.0;
    (m * decay / denom).scale2(2).pos()
}

/// Upper bound on the C⁰ interpolation error ‖φ - P_K̃ φ‖ over the subdomain,
/// optimizing the Bernstein radius ρ over a log grid with one refinement
/// pass. Errors with [`Error::BoundFailure`] when no finite bound exists at
/// any scanned radius.
pub fn interp_error_bound(model: &InterpErrorModel, k_tilde: u32) -> Result<Interval> {
    let mut best = Interval::new(f64::INFINITY, f64::INFINITY);
    let mut best_rho = f64::NAN;
    let scan = |rhos: &[f64], best: &mut Interval, best_rho: &mut f64| {
        for &r in rhos {
            if r <= 1.0 {
                continue;
            }
            let b = ellipse_error_at(model, Interval::point(r), k_tilde);
            if b.hi < best.hi {
                *best = b;
                *best_rho = r;
            }
        }
    };
    let coarse: Vec<f64> = (0..60).map(|i| 1.0001 * 1.45_f64.powi(i)).collect();
    scan(&coarse, &mut best, &mut best_rho);
    if best_rho.is_finite() {
        let fine: Vec<f64> = (-8..=8).map(|i| best_rho * 1.05_f64.powi(i)).collect();
        scan(&fine, &mut best, &mut best_rho);
    }
    if !best.hi.is_finite() {
        return Err(Error::BoundFailure(
            "no finite Bernstein-ellipse bound at any scanned radius".into(),
        ));
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Chebyshev-in-time Fourier-in-space container
// ---------------------------------------------------------------------------

/// A function of (t, x) on one time subdomain: u(t) = Σ_k c_k T_k(s(t)) with
/// FourierSeq-valued coefficients c_k.
#[derive(Clone, Debug)]
pub struct TimeSeq {
    pub t_lo: f64,
    pub t_hi: f64,
    pub coeffs: Vec<FourierSeq>,
}

impl TimeSeq {
    pub fn new(t_lo: f64, t_hi: f64, coeffs: Vec<FourierSeq>) -> Self {
        assert!(t_lo < t_hi && !coeffs.is_empty());
        TimeSeq { t_lo, t_hi, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Interpolate values sampled at the ascending second-kind nodes.
    pub fn interpolate(t_lo: f64, t_hi: f64, samples: &[FourierSeq]) -> TimeSeq {
        let kt = samples.len() - 1;
        if kt == 0 {
            return TimeSeq::new(t_lo, t_hi, vec![samples[0].clone()]);
        }
        let pi = interval::pi();
        let cos_tbl: Vec<Interval> = (0..2 * kt)
            .map(|m| (pi * m as f64 / kt as f64).cos())
            .collect();
        let coeffs = (0..=kt)
            .map(|k| {
                let mut acc: Option<FourierSeq> = None;
                for j in 0..=kt {
                    let mut w = cos_tbl[(k * j) % (2 * kt)];
                    if j == 0 || j == kt {
                        w = w.scale2(-1);
                    }
                    let term = samples[kt - j].scale(w);
                    acc = Some(match acc {
                        None => term,
                        Some(p) => p.add(&term),
                    });
                }
                let norm = if k == 0 || k == kt { 1.0 } else { 2.0 };
                acc.unwrap().scale(Interval::point(norm) / Interval::point(kt as f64))
            })
            .collect();
        TimeSeq::new(t_lo, t_hi, coeffs)
    }

    pub fn to_unit(&self, t: Interval) -> Interval {
        let two_t = t.scale2(1);
        let num = two_t - Interval::point(self.t_lo) - Interval::point(self.t_hi);
        let den = Interval::point(self.t_hi) - Interval::point(self.t_lo);
        (num / den).intersect(Interval::new(-1.0, 1.0)).unwrap_or(Interval::new(-1.0, 1.0))
    }

    /// Clenshaw evaluation at a unit coordinate.
    pub fn eval_unit(&self, s: Interval) -> FourierSeq {
        let proto = &self.coeffs[0];
        let zero = FourierSeq::zeros(proto.sym(), 0, proto.nu());
        let two_s = s.scale2(1);
        let mut b1 = zero.clone();
        let mut b2 = zero;
        for c in self.coeffs.iter().skip(1).rev() {
            let b = c.add(&b1.scale(two_s)).sub(&b2);
            b2 = b1;
            b1 = b;
        }
        self.coeffs[0].add(&b1.scale(s)).sub(&b2)
    }

    pub fn eval(&self, t: Interval) -> Result<FourierSeq> {
        if t.lo < self.t_lo || t.hi > self.t_hi {
            return Err(Error::Usage(format!(
                "evaluation time {t:?} outside domain [{}, {}]",
                self.t_lo, self.t_hi
            )));
        }
        Ok(self.eval_unit(self.to_unit(t)))
    }

    /// Time average over the subdomain: Σ_{k even} c_k/(1-k²).
    pub fn average(&self) -> FourierSeq {
        let mut acc: Option<FourierSeq> = None;
        for (k, c) in self.coeffs.iter().enumerate().step_by(2) {
            let w = ONE / Interval::point(1.0 - (k * k) as f64);
            let term = c.scale(w);
            acc = Some(match acc {
                None => term,
                Some(p) => p.add(&term),
            });
        }
        acc.expect("nonempty coefficient list")
    }

    /// Σ_k ‖c_k‖: C⁰-in-time bound of the ℓ¹_ν spatial norm.
    pub fn c0_norm(&self) -> Interval {
        Interval::sum(self.coeffs.iter().map(|c| c.norm()))
    }

    /// Chebyshev poly of one Fourier mode's evolution (coefficient a_n(t)).
    pub fn mode_poly(&self, n: i64) -> ChebPoly {
        ChebPoly::new(
            self.t_lo,
            self.t_hi,
            self.coeffs.iter().map(|c| c.get(n)).collect(),
        )
    }

    fn same_window(&self, other: &TimeSeq) {
        assert!(
            self.t_lo == other.t_lo && self.t_hi == other.t_hi,
            "time-domain mismatch: [{}, {}] vs [{}, {}]",
            self.t_lo,
            self.t_hi,
            other.t_lo,
            other.t_hi
        );
    }

    pub fn add(&self, other: &TimeSeq) -> TimeSeq {
        self.same_window(other);
        let deg = self.degree().max(other.degree());
        let coeffs = (0..=deg)
            .map(|k| match (self.coeffs.get(k), other.coeffs.get(k)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        TimeSeq::new(self.t_lo, self.t_hi, coeffs)
    }

    pub fn sub(&self, other: &TimeSeq) -> TimeSeq {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, s: Interval) -> TimeSeq {
        TimeSeq::new(
            self.t_lo,
            self.t_hi,
            self.coeffs.iter().map(|c| c.scale(s)).collect(),
        )
    }

    /// Product of two time-dependent sequences: Chebyshev product rule
    /// T_a T_b = (T_{a+b} + T_{|a−b|})/2 in time, convolution in space.
    pub fn conv(&self, other: &TimeSeq) -> Result<TimeSeq> {
        self.same_window(other);
        let d = self.degree() + other.degree();
        let mut out: Vec<Option<FourierSeq>> = vec![None; d + 1];
        let mut put = |k: usize, term: FourierSeq| {
            out[k] = Some(match out[k].take() {
                None => term,
                Some(prev) => prev.add(&term),
            });
        };
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.raw_data().iter().all(|v| *v == C_ZERO) {
                continue;
            }
            for (b, cb) in other.coeffs.iter().enumerate() {
                if cb.raw_data().iter().all(|v| *v == C_ZERO) {
                    continue;
                }
                let prod = ca.conv(cb)?.scale(ONE.scale2(-1));
                put(a + b, prod.clone());
                put(a.abs_diff(b), prod);
            }
        }
        let proto_nu = self.coeffs[0].nu();
        let coeffs = out
            .into_iter()
            .map(|c| c.unwrap_or_else(|| FourierSeq::zeros(Symmetry::Even, 0, proto_nu)))
            .collect();
        Ok(TimeSeq::new(self.t_lo, self.t_hi, coeffs))
    }

    /// Apply a scalar polynomial Σ c_k u^k pointwise in time.
    pub fn apply_poly(&self, coeffs: &[Interval]) -> TimeSeq {
        let nu = self.coeffs[0].nu();
        let constant = |c: Interval| {
            TimeSeq::new(self.t_lo, self.t_hi, vec![FourierSeq::delta(nu).scale(c)])
        };
        let mut acc: Option<TimeSeq> = None;
        let push = |term: TimeSeq, acc: &mut Option<TimeSeq>| {
            *acc = Some(match acc.take() {
                None => term,
                Some(prev) => prev.add(&term),
            });
        };
        let mut pow: Option<TimeSeq> = None;
        for (k, &c) in coeffs.iter().enumerate() {
            if k > 0 {
                pow = Some(match pow.take() {
                    None => self.clone(),
                    Some(p) => p.conv(self).expect("same ν by construction"),
                });
            }
            if c == ZERO {
                continue;
            }
            let term = match k {
                0 => constant(c),
                _ => pow.as_ref().unwrap().scale(c),
            };
            push(term, &mut acc);
        }
        acc.unwrap_or_else(|| constant(ZERO))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> CInterval {
        CInterval::point(x, 0.0)
    }

    #[test]
    fn eval_basis_cases() {
        // Constant.
        let p = ChebPoly::new(-1.0, 1.0, vec![c(2.5)]);
        let v = p.eval(Interval::point(0.3)).unwrap();
        assert!(v.re.contains(2.5));
        // T_1 at 0.5.
        let p1 = ChebPoly::new(-1.0, 1.0, vec![c(0.0), c(1.0)]);
        assert!(p1.eval(Interval::point(0.5)).unwrap().re.contains(0.5));
        // T_2 at 0.5: 2(0.25)-1 = -0.5.
        let p2 = ChebPoly::new(-1.0, 1.0, vec![c(0.0), c(0.0), c(1.0)]);
        let v2 = p2.eval(Interval::point(0.5)).unwrap();
        assert!(v2.re.contains(-0.5) && v2.re.width() < 1e-14);
        // Outside domain.
        assert!(p2.eval(Interval::point(1.5)).is_err());
        // Affine domain mapping: T_1 on [0, 2] at t = 1.5 → s = 0.5.
        let p3 = ChebPoly::new(0.0, 2.0, vec![c(0.0), c(1.0)]);
        assert!(p3.eval(Interval::point(1.5)).unwrap().re.contains(0.5));
    }

    #[test]
    fn c0_bound_cases() {
        let p = ChebPoly::new(0.0, 1.0, vec![c(-2.0)]);
        assert!(p.c0_bound().contains(2.0));
        let p2 = ChebPoly::new(0.0, 1.0, vec![c(1.0), c(1.0)]);
        assert!(p2.c0_bound().contains(2.0));
        let p3 = ChebPoly::new(0.0, 1.0, vec![c(0.0), c(0.0), c(1.0)]);
        assert!(p3.c0_bound().contains(1.0) && p3.c0_bound().hi < 1.0 + 1e-14);
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        // Samples of 3T_0 - T_1 + 0.5 T_3 at the K̃=5 nodes.
        let orig = ChebPoly::new(0.0, 2.0, vec![c(3.0), c(-1.0), c(0.0), c(0.5)]);
        let nodes = cheb_nodes(0.0, 2.0, 5);
        let samples: Vec<CInterval> =
            nodes.iter().map(|&t| orig.eval(t).unwrap()).collect();
        let p = ChebPoly::interpolate(0.0, 2.0, &samples);
        for k in 0..=5 {
            let want = orig.coeffs.get(k).copied().unwrap_or(C_ZERO);
            let got = p.coeffs[k];
            assert!(
                got.re.lo <= want.re.hi + 1e-12 && got.re.hi >= want.re.lo - 1e-12,
                "k={k}: {got:?} vs {want:?}"
            );
            assert!(got.re.width() < 1e-11);
        }
        // Constant samples.
        let pc = ChebPoly::interpolate(0.0, 1.0, &vec![c(7.0); 9]);
        assert!(pc.coeffs[0].re.contains(7.0));
        for k in 1..=8 {
            assert!(pc.coeffs[k].re.contains(0.0) && pc.coeffs[k].re.width() < 1e-12);
        }
    }

    #[test]
    fn interpolation_of_exp_bessel_constant() {
        // Oracle: the Chebyshev-series constant coefficient of e^t on [-1,1]
        // is I_0(1) = Σ_k 4^{-k}/(k!)², summed here independently in interval
        // arithmetic (small terms first for tightness) with a geometric
        // remainder.
        let mut terms = vec![ONE];
        for k in 1..=25u32 {
            let prev = *terms.last().unwrap();
            terms.push(prev / Interval::point((4 * k * k) as f64));
        }
        let mut i0 = Interval::new(0.0, terms[25].hi * 2.0);
        for t in terms[..25].iter().rev() {
            i0 = i0 + *t;
        }
        // Interpolate e^t at the K̃=10 nodes of [-1, 1]. The interpolant's
        // p_0 differs from I_0(1) only by coefficient aliasing ≤ 1e-20, so
        // the two rigorous enclosures must overlap.
        let nodes = cheb_nodes(-1.0, 1.0, 10);
        let samples: Vec<CInterval> = nodes
            .iter()
            .map(|&t| CInterval::new(t.exp(), ZERO))
            .collect();
        let p = ChebPoly::interpolate(-1.0, 1.0, &samples);
        let oracle = i0 + Interval::new(-1e-20, 1e-20);
        assert!(
            p.coeffs[0].re.intersect(oracle).is_some(),
            "p_0 = {:?} not consistent with I_0(1) = {i0:?}",
            p.coeffs[0].re
        );
        assert!(i0.width() < 1e-14, "oracle too wide: {i0:?}");
        assert!(p.coeffs[0].re.width() < 1e-12);
    }

    #[test]
    fn eval_at_nodes_reproduces_samples() {
        let nodes = cheb_nodes(0.25, 1.75, 8);
        let samples: Vec<CInterval> = nodes
            .iter()
            .map(|&t| CInterval::new((t * -1.0).exp(), t.sin()))
            .collect();
        let p = ChebPoly::interpolate(0.25, 1.75, &samples);
        for (t, s) in nodes.iter().zip(&samples) {
            let v = p.eval(*t).unwrap();
            assert!(v.re.intersect(s.re).is_some() && v.im.intersect(s.im).is_some());
        }
    }

    #[test]
    fn antiderivative_and_average() {
        // ∫ T_1: average of T_2 alone is -1/3.
        let p2 = ChebPoly::new(-1.0, 1.0, vec![c(0.0), c(0.0), c(1.0)]);
        let a = p2.average();
        assert!(a.re.contains(-1.0 / 3.0) && a.re.width() < 1e-15);
        let p1 = ChebPoly::new(-1.0, 1.0, vec![c(0.0), c(1.0)]);
        assert!(p1.average().re.contains(0.0) && p1.average().re.width() < 1e-15);
        // Antiderivative of T_1 on [-1,1]: (s²-1)/2, zero at -1, 0 at 1.
        let ad = p1.antiderivative();
        assert!(ad.eval(Interval::point(-1.0)).unwrap().re.contains(0.0));
        assert!(ad.eval(Interval::point(0.0)).unwrap().re.contains(-0.5));
        assert!(ad.eval(Interval::point(1.0)).unwrap().re.contains(0.0));
        // Domain scaling: ∫_0^t 1 dτ = t on [0, 2].
        let one = ChebPoly::new(0.0, 2.0, vec![c(1.0)]);
        let ad1 = one.antiderivative();
        let v = ad1.eval(Interval::point(1.5)).unwrap();
        assert!(v.re.contains(1.5) && v.re.width() < 1e-14);
    }

    #[test]
    fn products() {
        // T_1·T_1 = (T_2 + T_0)/2.
        let p1 = ChebPoly::new(-1.0, 1.0, vec![c(0.0), c(1.0)]);
        let sq = p1.mul(&p1);
        assert!(sq.coeffs[0].re.contains(0.5));
        assert!(sq.coeffs[1].re.contains(0.0));
        assert!(sq.coeffs[2].re.contains(0.5));
    }

    #[test]
    fn error_bound_constant_family() {
        let m = InterpErrorModel::Exponential {
            scale: Interval::point(3.0),
            w: CInterval::point(0.0, 0.0),
        };
        let b = interp_error_bound(&m, 10).unwrap();
        assert!(b.hi < 1e-10, "constant family error bound {b:?} should vanish");
    }

    #[test]
    fn error_bound_exp_family() {
        // φ(t) = e^{-t} on [0,1]: unit form v e^{w(s+1)} with v = 1 at s=-1
        // (φ(0) = 1), w = -1/2.
        let m = InterpErrorModel::Exponential {
            scale: Interval::point(1.0),
            w: CInterval::point(-0.5, 0.0),
        };
        let b10 = interp_error_bound(&m, 10).unwrap();
        assert!(b10.hi <= 1e-9, "bound {b10:?} not below 1e-9");
        // Dense-grid true error as a sanity floor.
        let nodes = cheb_nodes(0.0, 1.0, 10);
        let samples: Vec<CInterval> = nodes
            .iter()
            .map(|&t| CInterval::new((-t).exp(), ZERO))
            .collect();
        let p = ChebPoly::interpolate(0.0, 1.0, &samples);
        let mut true_err: f64 = 0.0;
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            let approx = p.eval(Interval::point(t)).unwrap().re.midpoint();
            true_err = true_err.max((approx - (-t).exp()).abs());
        }
        assert!(
            b10.hi >= true_err,
            "rigorous bound {b10:?} below observed error {true_err:e}"
        );
        // Raising K̃ by 4 buys at least a factor 10.
        let b14 = interp_error_bound(&m, 14).unwrap();
        assert!(b14.hi * 10.0 <= b10.hi);
    }

    #[test]
    fn error_bound_covers_dense_grid_sup() {
        // c0_bound(interpolant) + error bound ≥ dense max of |φ| for a smooth
        // function (here e^{-t} itself).
        let nodes = cheb_nodes(0.0, 1.0, 10);
        let samples: Vec<CInterval> = nodes
            .iter()
            .map(|&t| CInterval::new((-t).exp(), ZERO))
            .collect();
        let p = ChebPoly::interpolate(0.0, 1.0, &samples);
        let m = InterpErrorModel::Exponential {
            scale: Interval::point(1.0),
            w: CInterval::point(-0.5, 0.0),
        };
        let total = p.c0_bound() + interp_error_bound(&m, 10).unwrap();
        let dense_max = (0..=1000)
            .map(|i| (-(i as f64) / 1000.0).exp())
            .fold(0.0_f64, f64::max);
        assert!(total.hi >= dense_max);
    }

    #[test]
    fn integral_family_bound_is_finite_and_decays() {
        let m = InterpErrorModel::Integral {
            w: CInterval::point(-2.0, 1.0),
            p_abs: vec![Interval::point(0.5), Interval::point(0.25)],
        };
        let b8 = interp_error_bound(&m, 8).unwrap();
        let b16 = interp_error_bound(&m, 16).unwrap();
        assert!(b8.hi.is_finite() && b8.hi > 0.0);
        assert!(b16.hi < b8.hi / 100.0);
    }

    #[test]
    fn time_seq_roundtrip() {
        use crate::seq::Symmetry;
        let nu = Interval::point(1.1);
        // u(t,x) with two cosine modes whose amplitudes follow 1+s and s².
        let nodes = cheb_nodes_unit(6);
        let samples: Vec<FourierSeq> = nodes
            .iter()
            .map(|&s| {
                FourierSeq::from_cos_coeffs(
                    nu,
                    &[(s + 1.0), s.powi(2)],
                )
            })
            .collect();
        let ts = TimeSeq::interpolate(0.0, 0.5, &samples);
        // Evaluate at s = 0 (t = 0.25): amplitudes 1 and 0.
        let u = ts.eval(Interval::point(0.25)).unwrap();
        assert!(u.cos_coeff(0).re.contains(1.0));
        assert!(u.cos_coeff(1).re.contains(0.0) && u.cos_coeff(1).re.width() < 1e-12);
        assert_eq!(u.sym(), Symmetry::Even);
        // Average over s of 1+s is 1; of s² is 1/3.
        let avg = ts.average();
        assert!(avg.cos_coeff(0).re.contains(1.0));
        assert!(avg.cos_coeff(1).re.contains(1.0 / 3.0));
        // c0 norm bound dominates values: ‖u(t)‖ ≤ Σ‖c_k‖ at any node.
        let bound = ts.c0_norm();
        for s in &samples {
            assert!(s.norm().lo <= bound.hi + 1e-12);
        }
        // Mode poly extraction agrees with evaluation.
        let p0 = ts.mode_poly(0);
        assert!(p0.eval(Interval::point(0.25)).unwrap().re.contains(1.0));
    }

    #[test]
    fn time_seq_product_rule() {
        let nu = Interval::point(1.0);
        // a(t) = T₁(s)·cos x, squared: a² = ½(T₂+T₀)·(cos x)².
        let c1 = FourierSeq::from_cos_coeffs(nu, &[ZERO, ONE]);
        let zero = FourierSeq::zeros(crate::seq::Symmetry::Even, 0, nu);
        let a = TimeSeq::new(0.0, 1.0, vec![zero, c1.clone()]);
        let sq = a.conv(&a).unwrap();
        assert_eq!(sq.degree(), 2);
        let cc = c1.conv(&c1).unwrap();
        for (k, expect_half) in [(0, true), (1, false), (2, true)] {
            for n in 0..=2 {
                let got = sq.coeffs[k].get(n);
                let want = if expect_half {
                    cc.get(n).scale(ONE.scale2(-1))
                } else {
                    C_ZERO
                };
                assert!((got - want).abs().hi < 1e-14);
            }
        }
    }

    #[test]
    fn time_seq_apply_poly_matches_pointwise() {
        let nu = Interval::point(1.0);
        // u(t) = (1+s)/2 + s·cos x applied to g(u) = 2u - u³, compared to the
        // same polynomial applied to the evaluated sequence at sample times.
        let nodes = cheb_nodes_unit(4);
        let samples: Vec<FourierSeq> = nodes
            .iter()
            .map(|&s| FourierSeq::from_cos_coeffs(nu, &[(s + 1.0).scale2(-1), s]))
            .collect();
        let u = TimeSeq::interpolate(0.0, 2.0, &samples);
        let g = [ZERO, Interval::point(2.0), ZERO, Interval::point(-1.0)];
        let gu = u.apply_poly(&g);
        for t in [0.0, 0.7, 2.0] {
            let direct = crate::seq::apply_poly(&g, &u.eval(Interval::point(t)).unwrap());
            let via_ts = gu.eval(Interval::point(t)).unwrap();
            for n in 0..=3 {
                assert!(
                    (direct.get(n) - via_ts.get(n)).abs().hi < 1e-10,
                    "mode {n} at t={t}"
                );
            }
        }
    }
}
