//! Turning Y/Z/W interval bounds into a validated certificate: radii r and
//! weights η for the contraction theorem, plus — after an infinite final
//! step — steady-state pinpointing, uniqueness and basin radii, and a
//! spectral gap.
//!
//! Every search in this module is heuristic (floats, bisection, power
//! iteration); every *result* is gated by interval-arithmetic verification
//! of the original inequalities. Nothing unverified is ever returned.

use rayon::prelude::*;

use crate::bounds::{self, BoundsSet, DomainIngredients};
use crate::interval::{Interval, ONE, ZERO};
use crate::linop::DomainLinOp;
use crate::problem::PdeProblem;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Radii for the contraction inequalities
// ---------------------------------------------------------------------------

/// Interval check of the two single-domain conditions at the point radius
/// `rc`: the ball condition y + z·r + ½w·r² ≤ r and the strict contraction
/// condition z + w·r < 1.
fn verify_m1(y: Interval, z: Interval, w: Interval, rc: f64) -> bool {
    let r = Interval::point(rc);
    let ball = y + z * r + (w * r * r).scale2(-1);
    let jac = z + w * r;
    ball.hi <= rc && jac.hi < 1.0
}

fn radii_m1_at(
    domain: usize,
    y: Interval,
    z: Interval,
    w: Interval,
    r_star: Interval,
) -> Result<Interval> {
    assert!(
        y.lo >= 0.0 && z.lo >= 0.0 && w.lo >= 0.0,
        "Y, Z, W bounds must be nonnegative"
    );
    if !(z.hi < 1.0) {
        return Err(Error::ContractFailure {
            domain,
            reason: format!("Z = {:.6e} is not strictly below 1", z.hi),
        });
    }
    // Smallest root of ½w·r² − (1−z)r + y = 0 in the cancellation-free form
    // 2y / (1−z + √disc); the w = 0 limit is y/(1−z).
    let root = if w.hi == 0.0 {
        y / (ONE - z)
    } else {
        let disc = (ONE - z).powi(2) - (y * w).scale2(1);
        if disc.lo < 0.0 {
            return Err(Error::ContractFailure {
                domain,
                reason: format!(
                    "defect too large: discriminant (1-Z)² - 2YW down to {:.6e}",
                    disc.lo
                ),
            });
        }
        y.scale2(1) / ((ONE - z) + disc.sqrt().expect("nonnegative discriminant"))
    };
    // The upper end of the enclosure is a valid radius up to rounding in the
    // re-check; nudge upward a few ulps if needed.
    let mut rc = root.hi;
    for _ in 0..8 {
        if verify_m1(y, z, w, rc) {
            if rc <= r_star.lo {
                return Ok(Interval::point(rc));
            }
            return Err(Error::ContractFailure {
                domain,
                reason: format!("radius cap: r = {:.6e} exceeds r* = {:.6e}", rc, r_star.lo),
            });
        }
        rc = rc * (1.0 + 4e-16) + f64::MIN_POSITIVE;
    }
    Err(Error::ContractFailure {
        domain,
        reason: "could not verify the quadratic conditions at the computed radius".into(),
    })
}

/// Smallest verified radius for a single domain: the contraction inequalities
/// are re-checked in interval arithmetic at the returned point.
pub fn radii_m1(y: Interval, z: Interval, w: Interval, r_star: Interval) -> Result<Interval> {
    radii_m1_at(0, y, z, w, r_star)
}

/// The full interval-arithmetic recheck of the two inequality systems at
/// (r, η): per domain m, the ball condition with all couplings, the radius
/// cap, and the strict weighted contraction condition.
pub fn check_contraction(b: &BoundsSet, r: &[Interval], eta: &[f64]) -> Result<()> {
    let mm = b.y.len();
    assert_eq!(r.len(), mm);
    assert_eq!(eta.len(), mm);
    for m in 0..mm {
        let mut ball = b.y[m];
        let mut jac = ZERO;
        for i in 0..=m {
            ball = ball + b.z[m][i] * r[i] + (b.w[m][i] * r[i].powi(2)).scale2(-1);
            jac = jac + (b.z[m][i] + b.w[m][i] * r[i]) * Interval::point(eta[i]);
        }
        if !(ball.hi <= r[m].lo) {
            return Err(Error::ContractFailure {
                domain: m,
                reason: format!(
                    "ball condition fails: lhs up to {:.6e} vs r = {:.6e}",
                    ball.hi, r[m].lo
                ),
            });
        }
        if !(r[m].hi <= b.r_star[m].lo) {
            return Err(Error::ContractFailure {
                domain: m,
                reason: format!(
                    "radius cap: r = {:.6e} exceeds r* = {:.6e}",
                    r[m].hi, b.r_star[m].lo
                ),
            });
        }
        if !(eta[m] > 0.0 && jac.hi < eta[m]) {
            return Err(Error::ContractFailure {
                domain: m,
                reason: format!(
                    "weighted contraction fails: row sum up to {:.6e} vs η = {:.6e}",
                    jac.hi, eta[m]
                ),
            });
        }
    }
    Ok(())
}

fn check_weights(b: &BoundsSet, r: &[Interval], eta: &[f64]) -> bool {
    (0..b.y.len()).all(|m| {
        let mut jac = ZERO;
        for i in 0..=m {
            jac = jac + (b.z[m][i] + b.w[m][i] * r[i]) * Interval::point(eta[i]);
        }
        eta[m] > 0.0 && jac.hi < eta[m]
    })
}

/// Find radii and weights for the multi-domain contraction: forward
/// substitution over the lower-triangular coupling (each domain solves a
/// scalar quadratic with the upstream radii folded into its defect), then
/// η = 1 or a Perron-vector estimate, then a full interval recheck.
pub fn find_radii(b: &BoundsSet) -> Result<(Vec<Interval>, Vec<f64>)> {
    let mm = b.y.len();
    let mut r: Vec<Interval> = Vec::with_capacity(mm);
    for m in 0..mm {
        let mut y_eff = b.y[m];
        for i in 0..m {
            y_eff = y_eff + b.z[m][i] * r[i] + (b.w[m][i] * r[i].powi(2)).scale2(-1);
        }
        r.push(radii_m1_at(m, y_eff, b.z[m][m], b.w[m][m], b.r_star[m])?);
    }
    let ones = vec![1.0; mm];
    if check_weights(b, &r, &ones) {
        check_contraction(b, &r, &ones)?;
        return Ok((r, ones));
    }
    // Power iteration on the nonnegative Jacobian majorant Z + W·diag(r) to
    // estimate its Perron vector, then re-verify.
    let a: Vec<Vec<f64>> = (0..mm)
        .map(|m| (0..=m).map(|i| (b.z[m][i] + b.w[m][i] * r[i]).hi).collect())
        .collect();
    let mut eta = vec![1.0; mm];
    for _ in 0..20 {
        let mut next = vec![0.0; mm];
        for m in 0..mm {
            for i in 0..=m {
                next[m] += a[m][i] * eta[i];
            }
        }
        let mx = next.iter().fold(0.0f64, |acc, v| acc.max(*v));
        if !(mx > 0.0) {
            break;
        }
        for v in &mut next {
            *v = (*v / mx).max(1e-12);
        }
        eta = next;
    }
    check_contraction(b, &r, &eta)?;
    Ok((r, eta))
}

// ---------------------------------------------------------------------------
// Steady-state certification
// ---------------------------------------------------------------------------

/// Radii around the final constant state: the enclosure radius `r_min` at
/// the full infinite-step defect, the largest verified uniqueness radius
/// `r_max` ≤ r*, and the pinpointing radius `r_min_stat` from the
/// stationary-only defect ‖ū + L⁻¹γ(ū)‖.
pub fn steady_state_cert(
    y_inf: Interval,
    y_stat: Interval,
    z: Interval,
    w: Interval,
    r_star: Interval,
) -> Result<(Interval, Interval, Interval)> {
    let r_min = radii_m1(y_inf, z, w, r_star)?;
    let r_min_stat = radii_m1(y_stat, z, w, r_star)?;
    // Largest radius with the ball condition and strict contraction: the
    // verified set is an interval [r_min, min(r₊, (1-z)/w, r*)), so halve
    // down from the cap until a candidate verifies, then bisect upward.
    let cap = if w.hi == 0.0 {
        r_star.lo
    } else {
        r_star.lo.min(((ONE - z) / w).lo * (1.0 - 1e-12))
    };
    let mut r_max = r_min;
    if cap > r_min.hi {
        let mut lo = None;
        let mut rc = cap;
        for _ in 0..60 {
            if verify_m1(y_inf, z, w, rc) {
                lo = Some(rc);
                break;
            }
            rc = r_min.hi + (rc - r_min.hi) * 0.5;
            if rc <= r_min.hi {
                break;
            }
        }
        if let Some(mut good) = lo {
            let mut bad = cap * (1.0 + 1e-12);
            for _ in 0..20 {
                let mid = 0.5 * (good + bad);
                if verify_m1(y_inf, z, w, mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            r_max = Interval::point(good);
        }
    }
    Ok((r_min, r_max, r_min_stat))
}

/// Largest verified basin-of-attraction radius ε: initial data within ε of
/// the steady state stay in the validated ball and converge to it. Requires
/// the discriminant condition (1 − (Z+W·r_min))² > 4W·q·ε and the entry
/// radius δ(ε) ≤ r_max − r_min, with q = ‖|Q||Q⁻¹|‖.
pub fn basin_radius(
    z: Interval,
    w: Interval,
    r_min: Interval,
    r_max: Interval,
    qnorm: Interval,
) -> Result<Interval> {
    let margin = ONE - (z + w * r_min);
    if !(margin.lo > 0.0) {
        return Err(Error::Basin(format!(
            "no contraction margin at the steady state: Z + W·r_min ≥ {:.6e}",
            (z + w * r_min).lo
        )));
    }
    let room = r_max - r_min;
    if !(room.lo > 0.0) {
        return Err(Error::Basin(
            "no gap between the enclosure radius and the uniqueness radius".into(),
        ));
    }
    let ok = |e: f64| -> bool {
        let ei = Interval::point(e);
        let delta = if w.hi == 0.0 {
            qnorm * ei / margin
        } else {
            let disc = margin.powi(2) - (w * qnorm * ei).scale2(2);
            if disc.lo <= 0.0 {
                return false;
            }
            // Smaller root of w·δ² − margin·δ + q·ε = 0, cancellation-free.
            (qnorm * ei).scale2(1) / (margin + disc.sqrt().expect("positive discriminant"))
        };
        delta.hi <= room.lo
    };
    let mut e = if w.hi == 0.0 {
        (margin * room / qnorm).hi
    } else {
        (margin.powi(2) / (w * qnorm).scale2(2)).hi
    };
    let mut pass = None;
    for _ in 0..200 {
        if !(e > f64::MIN_POSITIVE) {
            break;
        }
        if ok(e) {
            pass = Some(e);
            break;
        }
        e *= 0.5;
    }
    let Some(mut good) = pass else {
        return Err(Error::Basin("no positive basin radius verifiable".into()));
    };
    let mut bad = good * 2.0;
    for _ in 0..20 {
        let mid = 0.5 * (good + bad);
        if ok(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(Interval::point(good))
}

// ---------------------------------------------------------------------------
// Spectral gap
// ---------------------------------------------------------------------------

/// The gap condition at shift a < 0: with B(a) = |Q| (Re Λ − a)⁻¹ on the
/// block and 1/(a − Re λ_n) on the tail,
/// max(‖B(a)Γ‖, Σ β^(j) χ^(j)(a)) + Σ max(‖B(a)|D|^j‖, χ^(j)(a))·|g^(j)''|(‖ū‖+r*)·r < 1
/// certifies the linearized spectrum at every function in the r-ball lies in
/// {Re z < a}. Errors when some eigenvalue is not strictly below a.
pub(crate) fn gap_condition(
    p: &PdeProblem,
    op: &DomainLinOp,
    ing: &DomainIngredients,
    r: Interval,
    r_star: Interval,
    a: f64,
) -> Result<Interval> {
    let ai = Interval::point(a);
    let mut diag = Vec::with_capacity(op.lam_fin.len());
    for l in &op.lam_fin {
        let d = ai - l.re;
        if d.lo <= 0.0 {
            return Err(Error::Gap(format!(
                "block eigenvalue real part up to {:.6e} not strictly below shift {a:.6e}",
                l.re.hi
            )));
        }
        diag.push(d.recip());
    }
    let chis = (0..p.gs.len())
        .map(|j| op.chi_shifted(j as u32, ai))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Gap(format!("tail spectrum at shift {a:.6e}: {e}")))?;
    let bblk = op.q.abs().scale_cols(&diag);
    let z_fin =
        bounds::gamma_colsum_norm(op, ing, &bblk, &|n| (ai - op.re_lambda_tail(n)).recip());
    let z_tail = Interval::sum(
        ing.beta_norms.iter().zip(&chis).map(|(b, x)| *b * *x),
    );
    let mut total = z_fin.max_iv(z_tail);
    let rho = ing.u_norm + r_star;
    for (j, g) in p.gs.iter().enumerate() {
        if g.coeffs.len() < 3 {
            continue;
        }
        let curv = g.derivative().derivative().abs_eval(rho);
        if curv.hi == 0.0 {
            continue;
        }
        let blk = bounds::d_colsum_norm(op, &bblk, j);
        total = total + blk.max_iv(chis[j]) * curv * r;
    }
    Ok(total)
}

/// Most negative verified spectral gap: scans the given shifts (all < 0),
/// then refines by bisection between the most negative verified shift and
/// the nearest failing one. Returns the shift and the verified condition
/// value there.
pub fn spectral_gap(
    p: &PdeProblem,
    op: &DomainLinOp,
    ing: &DomainIngredients,
    r: Interval,
    r_star: Interval,
    scan: &[f64],
) -> Result<(f64, Interval)> {
    let eval = |a: f64| -> Option<Interval> {
        gap_condition(p, op, ing, r, r_star, a).ok().filter(|b| b.hi < 1.0)
    };
    let mut cands: Vec<f64> = scan.iter().copied().filter(|a| *a < 0.0).collect();
    cands.sort_by(f64::total_cmp);
    let results: Vec<Option<Interval>> = cands.par_iter().map(|&a| eval(a)).collect();
    let hit = results.iter().position(Option::is_some);
    let (mut a_ok, mut bound, mut a_bad) = match hit {
        Some(i) => (cands[i], results[i].unwrap(), (i > 0).then(|| cands[i - 1])),
        None => {
            // The scan may simply be too ambitious; walk toward 0⁻.
            let start = cands.last().copied().unwrap_or(-1.0);
            let mut a = start * 0.5;
            let mut found = None;
            for _ in 0..60 {
                if let Some(b) = eval(a) {
                    found = Some((a, b));
                    break;
                }
                a *= 0.5;
                if a > -1e-300 {
                    break;
                }
            }
            match found {
                Some((a, b)) => (a, b, Some(a * 2.0)),
                None => {
                    return Err(Error::Gap(
                        "contraction bound not verifiable at any negative shift; \
                         inconsistent with a validated contraction"
                            .into(),
                    ))
                }
            }
        }
    };
    if a_bad.is_none() {
        // The most negative scan point verifies; push further down
        // geometrically until a failure brackets the transition.
        let mut trial = a_ok * 2.0;
        for _ in 0..40 {
            match eval(trial) {
                Some(b) => {
                    a_ok = trial;
                    bound = b;
                    trial *= 2.0;
                }
                None => {
                    a_bad = Some(trial);
                    break;
                }
            }
        }
    }
    if let Some(mut bad) = a_bad {
        for _ in 0..20 {
            let mid = 0.5 * (bad + a_ok);
            match eval(mid) {
                Some(b) => {
                    a_ok = mid;
                    bound = b;
                }
                None => bad = mid,
            }
        }
    }
    Ok((a_ok, bound))
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

/// Steady-state block of a certificate: the scalar infinite-step bounds and
/// everything derived from them, all re-checkable in interval arithmetic.
#[derive(Clone, Debug)]
pub struct SteadyCert {
    pub y_inf: Interval,
    pub y_stat: Interval,
    pub z_inf: Interval,
    pub w_inf: Interval,
    pub qnorm: Interval,
    /// Enclosure radius: ‖u(t) − ū‖ ≤ r_min for all t in the infinite step.
    pub r_min: Interval,
    /// Uniqueness radius: the steady state is the only one within r_max.
    pub r_max: Interval,
    /// Pinpointing radius: ‖u^stat − ū‖ ≤ r_min_stat.
    pub r_min_stat: Interval,
    /// Basin radius: data within ε of u^stat converge to it.
    pub epsilon: Interval,
    /// Verified spectral gap (negative): linearized spectrum in {Re z < α}.
    pub alpha: f64,
    /// Verified gap-condition value at α (< 1). Recorded for transparency;
    /// re-deriving it needs the full operator data, not just this block.
    pub gap_bound: Interval,
}

/// Run parameters recorded alongside the mathematical content.
#[derive(Clone, Debug, Default)]
pub struct CertMeta {
    pub problem: String,
    pub problem_hash: String,
    pub grid: Vec<f64>,
    pub n_u: usize,
    pub n_l: i64,
    pub nu: f64,
    pub to_infinity: bool,
}

/// A validated integration certificate: the bounds, the verified radii and
/// weights, and the derived global error. Self-checking via [`Certificate::self_check`].
#[derive(Clone, Debug)]
pub struct Certificate {
    pub bounds: BoundsSet,
    pub r: Vec<Interval>,
    pub eta: Vec<f64>,
    /// max_m r^m; bounds sup_{t,x} |u(t,x) − ū(t,x)| over the whole run.
    pub global_error: Interval,
    pub steady: Option<SteadyCert>,
    pub meta: CertMeta,
}

impl Certificate {
    /// Assemble and verify a certificate from computed bounds.
    pub fn build(bounds: BoundsSet, steady: Option<SteadyCert>, meta: CertMeta) -> Result<Certificate> {
        let (r, eta) = find_radii(&bounds)?;
        let mut global = ZERO;
        for rm in &r {
            global = global.max_iv(*rm);
        }
        let cert = Certificate { bounds, r, eta, global_error: global, steady, meta };
        cert.self_check()?;
        Ok(cert)
    }

    /// Re-verify every stored inequality from scratch in interval
    /// arithmetic. Called at build time and again whenever a certificate is
    /// loaded from disk, so tampered or corrupted certificates are refused.
    pub fn self_check(&self) -> Result<()> {
        let mm = self.bounds.y.len();
        if self.r.len() != mm
            || self.eta.len() != mm
            || self.bounds.z.len() != mm
            || self.bounds.w.len() != mm
            || self.bounds.r_star.len() != mm
            || (0..mm).any(|m| self.bounds.z[m].len() != m + 1 || self.bounds.w[m].len() != m + 1)
        {
            return Err(Error::CertCheck("inconsistent bound/radii dimensions".into()));
        }
        for m in 0..mm {
            for i in 0..=m {
                let vals = [
                    self.bounds.y[m],
                    self.bounds.z[m][i],
                    self.bounds.w[m][i],
                    self.r[m],
                ];
                if vals.iter().any(|v| !v.is_finite() || v.lo < 0.0) {
                    return Err(Error::CertCheck(format!(
                        "non-finite or negative bound data at domain {m}"
                    )));
                }
            }
        }
        check_contraction(&self.bounds, &self.r, &self.eta)
            .map_err(|e| Error::CertCheck(format!("contraction recheck failed: {e}")))?;
        let mut global = ZERO;
        for rm in &self.r {
            global = global.max_iv(*rm);
        }
        if !(self.global_error.hi >= global.hi) {
            return Err(Error::CertCheck(format!(
                "global_error {:.6e} understates the largest radius {:.6e}",
                self.global_error.hi, global.hi
            )));
        }
        if let Some(s) = &self.steady {
            let m1 = |y: Interval, rc: Interval, what: &str| -> Result<()> {
                if verify_m1(y, s.z_inf, s.w_inf, rc.hi) {
                    Ok(())
                } else {
                    Err(Error::CertCheck(format!("steady block: {what} fails its conditions")))
                }
            };
            m1(s.y_inf, s.r_min, "r_min")?;
            m1(s.y_inf, s.r_max, "r_max")?;
            m1(s.y_stat, s.r_min_stat, "r_min_stat")?;
            if !(s.r_min_stat.hi <= s.r_min.hi && s.r_min.hi <= s.r_max.hi) {
                return Err(Error::CertCheck(
                    "steady block: radii not ordered r_min_stat ≤ r_min ≤ r_max".into(),
                ));
            }
            if s.epsilon.hi > 0.0 {
                let margin = ONE - (s.z_inf + s.w_inf * s.r_min);
                let e = Interval::point(s.epsilon.hi);
                let delta = if s.w_inf.hi == 0.0 {
                    s.qnorm * e / margin
                } else {
                    let disc = margin.powi(2) - (s.w_inf * s.qnorm * e).scale2(2);
                    if !(disc.lo > 0.0) {
                        return Err(Error::CertCheck(
                            "steady block: basin discriminant not positive".into(),
                        ));
                    }
                    (s.qnorm * e).scale2(1)
                        / (margin + disc.sqrt().expect("positive discriminant"))
                };
                if !(delta.hi <= (s.r_max - s.r_min).lo) {
                    return Err(Error::CertCheck(
                        "steady block: basin entry radius exceeds the uniqueness gap".into(),
                    ));
                }
            }
            if !(s.alpha < 0.0) {
                return Err(Error::CertCheck("steady block: spectral gap not negative".into()));
            }
            if !(s.gap_bound.hi < 1.0) {
                return Err(Error::CertCheck("steady block: gap condition value ≥ 1".into()));
            }
        }
        Ok(())
    }
}
