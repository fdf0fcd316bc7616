//! Time-grid adaptation: choose the subdivision so the diagonal contraction
//! factors Z_m^(m) are roughly uniform, then pick per-domain polynomial
//! orders K^(m) and interpolation orders K̃^(m) that push the defect bound
//! Y^(m) under a threshold.
//!
//! Everything here runs on fast plain-binary64 surrogates: the same formulas
//! the bounds engine evaluates rigorously, minus interval arithmetic and
//! minus the analytic tail terms. Nothing computed here is trusted — the
//! rigorous pass re-measures every quantity — so the only requirements are
//! determinism and fidelity good enough to steer the subdivision.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::lapack;
use crate::problem::{InitialData, PdeProblem};
use crate::seq::Symmetry;
use crate::solver::{
    cheb_derivative, clenshaw_rows, dct_rows, integrate_numeric, lobatto_unit, ApproxSolution,
    NumProblem, Piece,
};
use crate::{Error, Result};

/// Default target for the diagonal contraction surrogate.
pub const DEFAULT_Z_TARGET: f64 = 0.2;
/// Conditioning estimate above which the target is tightened fourfold.
const COND_SHRINK_AT: f64 = 1e6;
/// Largest permitted collocation order before a domain is flagged.
const ORDER_CAP: usize = 64;
/// Largest interpolation order the surrogate search will consider.
const INTERP_CAP: usize = 192;

/// A time subdivision with per-domain polynomial orders.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPlan {
    /// Subdomain endpoints τ_0 < τ_1 < … (all finite; an infinite final
    /// step is appended by the caller, not planned here).
    pub grid: Vec<f64>,
    /// Collocation order K^(m) per subdomain.
    pub orders: Vec<usize>,
    /// Interpolation order K̃^(m) ≥ K^(m) per subdomain.
    pub interp_orders: Vec<usize>,
    /// Surrogate estimate of the diagonal contraction factor per subdomain.
    pub surrogate_diag: Vec<f64>,
    /// Defect threshold the orders were selected for (0 until selection).
    pub y_threshold: f64,
    /// Contraction target the subdivision was equidistributed at.
    pub z_target: f64,
    /// True when the budget of subdomains ran out before the final time;
    /// the grid then ends early and the caller should raise the budget.
    pub best_effort: bool,
    /// Domains where the order cap was hit; refine the grid there.
    pub flagged: Vec<usize>,
}

impl GridPlan {
    /// Structural invariants every emitted plan satisfies.
    pub fn validate(&self) -> Result<()> {
        let m = self.grid.len().saturating_sub(1);
        if m == 0 {
            return Err(Error::Usage("grid plan needs at least one subdomain".into()));
        }
        if self.grid.iter().any(|t| !t.is_finite())
            || self.grid.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(Error::Usage("grid must be finite and strictly increasing".into()));
        }
        if self.orders.len() != m
            || self.interp_orders.len() != m
            || self.surrogate_diag.len() != m
        {
            return Err(Error::Usage("per-domain arrays must match the grid".into()));
        }
        if self.orders.iter().any(|&k| k == 0) {
            return Err(Error::Usage("polynomial orders must be ≥ 1".into()));
        }
        if self.orders.iter().zip(&self.interp_orders).any(|(k, kt)| kt < k) {
            return Err(Error::Usage("interpolation orders must dominate orders".into()));
        }
        if self.surrogate_diag.iter().any(|z| !z.is_finite()) {
            return Err(Error::Usage("surrogate values must be finite".into()));
        }
        Ok(())
    }
}

fn slot_weights_f(sym: Symmetry, slots: &[i64]) -> Vec<f64> {
    slots
        .iter()
        .map(|&n| if sym != Symmetry::None && n != 0 { 2.0 } else { 1.0 })
        .collect()
}

/// ∫₀^δ e^{ρs} ds in binary64, saturating to 1/|ρ| for stiff decay.
fn btilde_f(rho: f64, delta: f64) -> f64 {
    if rho == 0.0 {
        delta
    } else {
        (rho * delta).exp_m1() / rho
    }
}

// ---------------------------------------------------------------------------
// Diagonal-Z surrogate
// ---------------------------------------------------------------------------

/// Float mirror of the diagonal Z^{(m)}_m machinery: linearize at the
/// time-averaged Jacobian of the coarse solution over a candidate window,
/// diagonalize, majorize the time variation, and take the weighted
/// column-sum norm of |Q| diag(b̃) Γ — the block part of the rigorous bound.
struct ZSurrogate<'a> {
    np: NumProblem,
    coarse: &'a ApproxSolution,
    /// np slot index → coarse slot index.
    cmap: Vec<usize>,
    wts: Vec<f64>,
    /// Sample times are clamped to the coarse solution's finite range.
    t_end: f64,
}

impl<'a> ZSurrogate<'a> {
    fn new(p: &PdeProblem, coarse: &'a ApproxSolution) -> ZSurrogate<'a> {
        let n_max_c = coarse.pieces[0].n_max;
        let n_surr = n_max_c.min(32);
        let np = NumProblem::new(p, n_surr);
        let cmap = np
            .slots
            .iter()
            .map(|&n| match p.sym {
                Symmetry::Even => n as usize,
                Symmetry::Odd => (n - 1) as usize,
                Symmetry::None => (n + n_max_c as i64) as usize,
            })
            .collect();
        let wts = slot_weights_f(p.sym, &np.slots);
        let t_end = coarse
            .pieces
            .iter()
            .rev()
            .find(|pc| pc.t_hi.is_finite())
            .map(|pc| pc.t_hi)
            .unwrap_or(f64::INFINITY);
        ZSurrogate { np, coarse, cmap, wts, t_end }
    }

    fn state(&self, t: f64) -> Result<Vec<Complex64>> {
        let tc = t.min(self.t_end);
        let pc = &self.coarse.pieces[self.coarse.piece_index_at(tc)?];
        let st = pc.state_at(tc);
        Ok(self.cmap.iter().map(|&i| st[i]).collect())
    }

    fn colsum_norm(&self, m: &[f64], ns: usize) -> f64 {
        (0..ns)
            .map(|c| {
                (0..ns).map(|r| self.wts[r] * m[r * ns + c]).sum::<f64>() / self.wts[c]
            })
            .fold(0.0, f64::max)
    }

    /// (surrogate Z, conditioning estimate) of the window [a, b].
    fn eval(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        let ns = self.np.slots.len();
        let span = self.coarse.piece_index_at(b.min(self.t_end))?
            - self.coarse.piece_index_at(a)?;
        let kt = (4 + span).min(16);
        let jacs: Vec<Vec<Complex64>> = lobatto_unit(kt)
            .iter()
            .map(|&s| {
                let t = 0.5 * (a + b) + 0.5 * (b - a) * s;
                Ok(self.np.jacobian(&self.state(t)?))
            })
            .collect::<Result<_>>()?;
        // Exact Chebyshev time average of the sampled Jacobian.
        let cofs = dct_rows(&jacs);
        let mut abar = vec![Complex64::new(0.0, 0.0); ns * ns];
        for (k, row) in cofs.iter().enumerate().step_by(2) {
            let w = 1.0 / (1.0 - (k * k) as f64);
            for (e, &v) in abar.iter_mut().zip(row) {
                *e += v * w;
            }
        }
        let (lam, q) = lapack::eigen(&abar, ns, 0)?;
        // Q⁻¹ by LU solve against the identity (both column-major).
        let mut lu = q.clone();
        let mut qinv = vec![Complex64::new(0.0, 0.0); ns * ns];
        for i in 0..ns {
            qinv[i * ns + i] = Complex64::new(1.0, 0.0);
        }
        lapack::solve_in_place(&mut lu, &mut qinv, ns, 0)?;
        let at = |m: &[Complex64], r: usize, c: usize| m[c * ns + r];

        // Γ = sup over samples of |Q⁻¹ A(t) − Λ Q⁻¹| entry-wise: zero for an
        // exactly diagonalized autonomous linearization, growing with the
        // kernel drift across the window.
        let mut gamma = vec![0.0f64; ns * ns];
        for aj in &jacs {
            for r in 0..ns {
                for c in 0..ns {
                    let mut v = -lam[r] * at(&qinv, r, c);
                    for p in 0..ns {
                        v += at(&qinv, r, p) * aj[p * ns + c];
                    }
                    let g = &mut gamma[r * ns + c];
                    *g = g.max(v.norm());
                }
            }
        }
        let delta = b - a;
        let col_q: Vec<f64> = (0..ns)
            .map(|p| (0..ns).map(|r| self.wts[r] * at(&q, r, p).norm()).sum())
            .collect();
        let z = (0..ns)
            .map(|c| {
                (0..ns)
                    .map(|p| col_q[p] * btilde_f(lam[p].re, delta) * gamma[p * ns + c])
                    .sum::<f64>()
                    / self.wts[c]
            })
            .fold(0.0, f64::max);

        let absn = |m: &[Complex64]| {
            let v: Vec<f64> = (0..ns * ns).map(|i| m[i].norm()).collect();
            // Column-major |M| read row-major transposed: the weighted
            // column-sum norm of the transpose is an equally good size
            // estimate, and conditioning only gates the target shrink.
            self.colsum_norm(&v, ns)
        };
        Ok((z, absn(&q) * absn(&qinv)))
    }
}

/// Surrogate of the diagonal contraction factor on [a, b], with the
/// eigenbasis conditioning estimate. Exposed for fidelity checks.
pub fn z_surrogate(
    p: &PdeProblem,
    coarse: &ApproxSolution,
    a: f64,
    b: f64,
) -> Result<(f64, f64)> {
    ZSurrogate::new(p, coarse).eval(a, b)
}

// ---------------------------------------------------------------------------
// Grid optimization
// ---------------------------------------------------------------------------

/// Coarse non-rigorous solve of [start, τ_final] on a uniform provisional
/// grid, doubling the step count until the collocation Newton converges.
pub fn provisional_solution(
    p: &PdeProblem,
    u0: &InitialData,
    tau_final: f64,
    n_u: usize,
) -> Result<ApproxSolution> {
    let start = 0.0;
    let mut steps = 8usize;
    loop {
        let grid: Vec<f64> = (0..=steps)
            .map(|i| start + (tau_final - start) * i as f64 / steps as f64)
            .collect();
        match integrate_numeric(p, u0, &grid, n_u, &vec![6; steps]) {
            Ok(sol) => return Ok(sol),
            Err(e @ Error::SolverFailure { .. }) => {
                if steps >= 4096 {
                    return Err(e);
                }
                steps *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Equidistribute the diagonal contraction surrogate: march from the start
/// of the coarse solution, extending each subdomain until the surrogate
/// reaches `z_target` (tightened fourfold where the eigenbasis conditioning
/// exceeds 10⁶) or until the fair share of the remaining time — so a
/// time-invariant surrogate yields a uniform grid. Candidate endpoints live
/// on a lattice of resolution (τ_final − start)/2¹⁴.
pub fn optimize_grid_with_target(
    p: &PdeProblem,
    u0: &InitialData,
    tau_final: f64,
    m_domains: usize,
    coarse: &ApproxSolution,
    z_target: f64,
) -> Result<GridPlan> {
    u0.check_compatible(p)?;
    if m_domains == 0 || !(z_target > 0.0) {
        return Err(Error::Usage("need at least one subdomain and a positive target".into()));
    }
    let start = coarse.pieces[0].t_lo;
    if !(tau_final.is_finite() && tau_final > start) {
        return Err(Error::Usage("final time must be finite and beyond the coarse start".into()));
    }
    let sur = ZSurrogate::new(p, coarse);
    if sur.t_end < tau_final * (1.0 - 1e-12) - 1e-300 {
        return Err(Error::Usage(
            "coarse solution does not cover the requested final time".into(),
        ));
    }
    let h_min = (tau_final - start) / f64::powi(2.0, 14);

    let mut grid = vec![start];
    let mut zs = Vec::new();
    let mut t = start;
    for m in 0..m_domains {
        let cap = (tau_final - t) / (m_domains - m) as f64;
        let passes = |z: f64, cond: f64| -> bool {
            z <= if cond > COND_SHRINK_AT { z_target / 4.0 } else { z_target }
        };
        let (b, z) = if cap <= h_min {
            let b = if m + 1 == m_domains { tau_final } else { t + cap };
            (b, sur.eval(t, b)?.0)
        } else {
            let k_cap = (cap / h_min).floor().max(1.0) as u64;
            let endpoint = |k: u64| -> f64 {
                if k >= k_cap {
                    if m + 1 == m_domains {
                        tau_final
                    } else {
                        t + cap
                    }
                } else {
                    t + k as f64 * h_min
                }
            };
            // Smallest candidate first (hard errors there propagate); then
            // the doubling ladder in parallel, treating failures as
            // over-target.
            let first = sur.eval(t, endpoint(1))?;
            let mut ladder = Vec::new();
            let mut k = 2u64;
            while k < k_cap {
                ladder.push(k);
                k *= 2;
            }
            if k_cap > 1 {
                ladder.push(k_cap);
            }
            let evals: Vec<Option<(f64, f64)>> = ladder
                .par_iter()
                .map(|&k| sur.eval(t, endpoint(k)).ok())
                .collect();
            let mut lo = (1u64, first);
            let mut hi: Option<u64> = None;
            if !passes(first.0, first.1) {
                hi = Some(1);
            } else {
                for (&k, e) in ladder.iter().zip(&evals) {
                    match e {
                        Some(v) if passes(v.0, v.1) => lo = (k, *v),
                        _ => {
                            hi = Some(k);
                            break;
                        }
                    }
                }
            }
            match hi {
                None => (endpoint(lo.0), lo.1 .0),
                Some(mut bad) => {
                    if bad == 1 {
                        (endpoint(1), first.0)
                    } else {
                        let mut good = lo;
                        while bad - good.0 > 1 {
                            let mid = good.0 + (bad - good.0) / 2;
                            match sur.eval(t, endpoint(mid)) {
                                Ok(v) if passes(v.0, v.1) => good = (mid, v),
                                _ => bad = mid,
                            }
                        }
                        (endpoint(good.0), good.1 .0)
                    }
                }
            }
        };
        grid.push(b);
        zs.push(z);
        t = b;
        if t >= tau_final {
            break;
        }
    }
    let n = grid.len() - 1;
    let plan = GridPlan {
        grid,
        orders: vec![6; n],
        interp_orders: vec![12; n],
        surrogate_diag: zs,
        y_threshold: 0.0,
        z_target,
        best_effort: t < tau_final,
        flagged: Vec::new(),
    };
    plan.validate()?;
    Ok(plan)
}

/// [`optimize_grid_with_target`] at the default target.
pub fn optimize_grid(
    p: &PdeProblem,
    u0: &InitialData,
    tau_final: f64,
    m_domains: usize,
    coarse: &ApproxSolution,
) -> Result<GridPlan> {
    optimize_grid_with_target(p, u0, tau_final, m_domains, coarse, DEFAULT_Z_TARGET)
}

// ---------------------------------------------------------------------------
// Order selection
// ---------------------------------------------------------------------------

/// Float mirror of the defect bound for one solved subdomain: mode-wise
/// Duhamel factors ∫e^{ρs}ds times a C⁰ estimate of the collocation defect
/// u̇ − F(u) from a degree-K̃ Chebyshev fit, plus the trailing-coefficient
/// interpolation-error proxy amplified by the stiff-mode plateau factor.
fn y_surrogate(np: &NumProblem, wts: &[f64], piece: &Piece, kt: usize) -> f64 {
    let ns = np.slots.len();
    let delta = piece.t_hi - piece.t_lo;
    let scale = 2.0 / delta;
    let dcheb = cheb_derivative(&piece.cheb);
    let rows: Vec<Vec<Complex64>> = lobatto_unit(kt.max(1))
        .iter()
        .map(|&s| {
            let u = clenshaw_rows(&piece.cheb, s);
            let du = clenshaw_rows(&dcheb, s);
            let f = np.rhs(&u);
            (0..ns).map(|i| du[i] * scale - f[i]).collect()
        })
        .collect();
    let c = dct_rows(&rows);
    let amid = np.jacobian(&clenshaw_rows(&piece.cheb, 0.0));
    let mut y = 0.0;
    for s in 0..ns {
        let rho = amid[s * ns + s].re;
        let omega = btilde_f(rho, delta);
        let supd: f64 = c.iter().map(|row| row[s].norm()).sum();
        let k_top = c.len() - 1;
        let tail = c[k_top][s].norm() + if k_top > 0 { c[k_top - 1][s].norm() } else { 0.0 };
        let stiff = 1.0 + 2.0 * rho.abs() * delta / kt.max(1) as f64;
        y += wts[s] * omega * (supd + stiff * tail);
    }
    y
}

/// Per domain, the smallest collocation order K (then the smallest
/// interpolation order K̃ ≥ K) whose non-rigorous defect surrogate falls
/// below `y_threshold`; K is capped at 64, after which the domain is
/// flagged for grid refinement. The subdomain is re-solved at each
/// candidate order from the interface state of `sol`.
pub fn select_orders(
    plan: &GridPlan,
    p: &PdeProblem,
    sol: &ApproxSolution,
    y_threshold: f64,
) -> Result<GridPlan> {
    plan.validate()?;
    if !(y_threshold > 0.0) {
        return Err(Error::Usage("defect threshold must be positive".into()));
    }
    let finite: Vec<&Piece> = sol.pieces.iter().filter(|pc| pc.t_hi.is_finite()).collect();
    if finite.len() != plan.grid.len() - 1
        || finite
            .iter()
            .zip(plan.grid.windows(2))
            .any(|(pc, w)| (pc.t_lo - w[0]).abs() > 1e-9 || (pc.t_hi - w[1]).abs() > 1e-9)
    {
        return Err(Error::Usage("solution grid does not match the plan".into()));
    }

    let picks: Vec<Result<(usize, usize, bool)>> = finite
        .par_iter()
        .map(|pc| {
            let np = NumProblem::new(p, pc.n_max);
            let wts = slot_weights_f(p.sym, &np.slots);
            let start = pc.state_at(pc.t_lo);
            let mut f = crate::seq::FourierSeq::zeros(
                pc.sym,
                pc.n_max as i64,
                crate::interval::ONE,
            );
            for (s, &n) in np.slots.iter().enumerate() {
                f.set(n, crate::interval::CInterval::point(start[s].re, start[s].im))
                    .expect("slot in range");
            }
            let init = InitialData::exact(f);
            let mut fallback = None;
            for k in 1..=ORDER_CAP {
                let solk =
                    match integrate_numeric(p, &init, &[pc.t_lo, pc.t_hi], pc.n_max, &[k]) {
                        Ok(s) => s,
                        Err(Error::SolverFailure { .. }) => continue,
                        Err(e) => return Err(e),
                    };
                let piece = &solk.pieces[0];
                let probe = (4 * k + 8).min(INTERP_CAP);
                let at_probe = y_surrogate(&np, &wts, piece, probe);
                if !at_probe.is_finite() {
                    return Err(Error::SolverFailure {
                        domain: 0,
                        reason: "defect surrogate overflowed".into(),
                    });
                }
                fallback = Some((k, probe));
                if at_probe >= y_threshold {
                    continue;
                }
                let mut kt = k.max(2);
                while y_surrogate(&np, &wts, piece, kt) >= y_threshold {
                    kt += 1;
                }
                return Ok((k, kt, false));
            }
            let (k, kt) = fallback.unwrap_or((ORDER_CAP, INTERP_CAP));
            Ok((k, kt, true))
        })
        .collect();

    let mut out = plan.clone();
    out.y_threshold = y_threshold;
    out.flagged.clear();
    for (m, pick) in picks.into_iter().enumerate() {
        let (k, kt, flag) = pick.map_err(|e| match e {
            Error::SolverFailure { reason, .. } => Error::SolverFailure { domain: m, reason },
            other => other,
        })?;
        out.orders[m] = k;
        out.interp_orders[m] = kt;
        if flag {
            out.flagged.push(m);
        }
    }
    out.validate()?;
    Ok(out)
}
