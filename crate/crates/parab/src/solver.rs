//! Non-rigorous numeric pipeline producing the approximate solution ū:
//! per-subdomain Chebyshev collocation in time, Fourier Galerkin in space, a
//! damped Newton iteration warm-started by a short exponential-Euler run,
//! and a steady-state Newton solve for the time-independent final piece.
//!
//! Everything here is plain binary64. No output of this module is trusted:
//! the bounds engine measures the quality of ū rigorously, so any solution
//! this pipeline returns is acceptable input — a bad one merely yields a
//! large (or failed) error bound.

use num_complex::Complex64;

use crate::cheb::TimeSeq;
use crate::interval::{CInterval, Interval};
use crate::lapack;
use crate::problem::{InitialData, PdeProblem};
use crate::seq::{FourierSeq, Symmetry};
use crate::{Error, Result};

const Z: Complex64 = Complex64::new(0.0, 0.0);

/// Mode indices carried as independent unknowns for a symmetry class: the
/// other modes follow by reflection (even: a_{-n} = a_n, odd: a_{-n} = -a_n).
pub fn mode_slots(sym: Symmetry, n_max: usize) -> Vec<i64> {
    let n = n_max as i64;
    match sym {
        Symmetry::Even => (0..=n).collect(),
        Symmetry::Odd => (1..=n).collect(),
        Symmetry::None => (-n..=n).collect(),
    }
}

/// One time subdomain: plain-sum Chebyshev coefficients of every retained
/// Fourier mode. The final piece of an infinite-horizon solution has
/// `t_hi = ∞` and a single (constant) coefficient row.
#[derive(Clone, Debug)]
pub struct Piece {
    pub t_lo: f64,
    pub t_hi: f64,
    pub sym: Symmetry,
    pub n_max: usize,
    /// cheb\[k\]\[s\]: k-th Chebyshev coefficient of mode slot s.
    pub cheb: Vec<Vec<Complex64>>,
}

impl Piece {
    pub fn order(&self) -> usize {
        self.cheb.len() - 1
    }

    pub fn slots(&self) -> Vec<i64> {
        mode_slots(self.sym, self.n_max)
    }

    pub fn is_constant(&self) -> bool {
        self.cheb.len() == 1
    }

    /// Mode values at a time inside the subdomain.
    pub fn state_at(&self, t: f64) -> Vec<Complex64> {
        if self.is_constant() {
            return self.cheb[0].clone();
        }
        let s = ((2.0 * t - self.t_lo - self.t_hi) / (self.t_hi - self.t_lo)).clamp(-1.0, 1.0);
        clenshaw_rows(&self.cheb, s)
    }

    pub fn end_state(&self) -> Vec<Complex64> {
        if self.t_hi.is_finite() {
            self.state_at(self.t_hi)
        } else {
            self.cheb[0].clone()
        }
    }

    /// u(t, x) at internal coordinates.
    pub fn eval_real(&self, t: f64, x: f64) -> f64 {
        let st = self.state_at(t);
        let mut acc = 0.0;
        for (s, &n) in self.slots().iter().enumerate() {
            let e = Complex64::new(0.0, n as f64 * x).exp();
            acc += (st[s] * e).re;
            if self.sym != Symmetry::None && n != 0 {
                let refl = if self.sym == Symmetry::Even { st[s] } else { -st[s] };
                acc += (refl * Complex64::new(0.0, -(n as f64) * x).exp()).re;
            }
        }
        acc
    }

    /// Promote to interval data (point intervals) for the bounds engine.
    pub fn to_time_seq(&self, nu: Interval) -> TimeSeq {
        let slots = self.slots();
        let coeffs = self
            .cheb
            .iter()
            .map(|row| {
                let mut f = FourierSeq::zeros(self.sym, self.n_max as i64, nu);
                for (s, &n) in slots.iter().enumerate() {
                    f.set(n, CInterval::point(row[s].re, row[s].im)).expect("slot in range");
                }
                f
            })
            .collect();
        TimeSeq::new(self.t_lo, self.t_hi, coeffs)
    }

    /// Rigorous enclosure of the time average (1/|I|)∫ū over the subdomain.
    pub fn time_average(&self, nu: Interval) -> FourierSeq {
        self.to_time_seq(nu).average()
    }
}

/// Piecewise solution on τ_0 < τ_1 < … < τ_M (τ_M possibly ∞).
#[derive(Clone, Debug)]
pub struct ApproxSolution {
    pub pieces: Vec<Piece>,
    /// Normalized at-node collocation residual per piece (diagnostic).
    pub defects: Vec<f64>,
}

impl ApproxSolution {
    pub fn grid(&self) -> Vec<f64> {
        let mut g = vec![self.pieces[0].t_lo];
        g.extend(self.pieces.iter().map(|p| p.t_hi));
        g
    }

    pub fn is_infinite(&self) -> bool {
        self.pieces.last().map(|p| p.t_hi.is_infinite()).unwrap_or(false)
    }

    pub fn piece_index_at(&self, t: f64) -> Result<usize> {
        let first = self.pieces.first().ok_or_else(|| Error::Usage("empty solution".into()))?;
        if t < first.t_lo || (!self.is_infinite() && t > self.pieces.last().unwrap().t_hi) {
            return Err(Error::Usage(format!("time {t} outside the solved range")));
        }
        Ok(self
            .pieces
            .iter()
            .position(|p| t <= p.t_hi)
            .unwrap_or(self.pieces.len() - 1))
    }

    pub fn eval_real(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.pieces[self.piece_index_at(t)?].eval_real(t, x))
    }

    pub fn end_state(&self) -> Vec<Complex64> {
        self.pieces.last().expect("nonempty").end_state()
    }
}

// ---------------------------------------------------------------------------
// Two-sided spectral workspace
// ---------------------------------------------------------------------------

/// Two-sided coefficient array: index n ∈ [-radius, radius] at n + radius.
struct TwoSided {
    radius: usize,
    data: Vec<Complex64>,
}

impl TwoSided {
    fn zero(radius: usize) -> Self {
        TwoSided { radius, data: vec![Z; 2 * radius + 1] }
    }

    fn delta(c: f64) -> Self {
        TwoSided { radius: 0, data: vec![Complex64::new(c, 0.0)] }
    }

    fn get(&self, n: i64) -> Complex64 {
        let r = self.radius as i64;
        if n.abs() > r {
            Z
        } else {
            self.data[(n + r) as usize]
        }
    }

    fn conv(&self, other: &TwoSided) -> TwoSided {
        let mut out = TwoSided::zero(self.radius + other.radius);
        let (ra, rb) = (self.radius as i64, other.radius as i64);
        for i in -ra..=ra {
            let a = self.get(i);
            if a == Z {
                continue;
            }
            for j in -rb..=rb {
                let idx = (i + j + ra + rb) as usize;
                out.data[idx] += a * other.get(j);
            }
        }
        out
    }
}

fn expand(state: &[Complex64], slots: &[i64], sym: Symmetry, n_max: usize) -> TwoSided {
    let mut u = TwoSided::zero(n_max);
    let r = n_max as i64;
    for (s, &n) in slots.iter().enumerate() {
        u.data[(n + r) as usize] = state[s];
        if sym != Symmetry::None && n != 0 {
            u.data[(r - n) as usize] =
                if sym == Symmetry::Even { state[s] } else { -state[s] };
        }
    }
    u
}

/// Horner evaluation of a polynomial in the convolution algebra.
fn poly_apply(coeffs: &[f64], u: &TwoSided) -> TwoSided {
    let Some((&last, rest)) = coeffs.split_last() else {
        return TwoSided::zero(0);
    };
    let mut acc = TwoSided::delta(last);
    for &c in rest.iter().rev() {
        acc = acc.conv(u);
        acc.data[acc.radius] += Complex64::new(c, 0.0);
    }
    acc
}

fn i_pow(n: i64, j: u32) -> Complex64 {
    Complex64::new(0.0, n as f64).powu(j)
}

/// Midpoint-coefficient view of the problem plus the slot bookkeeping.
/// Crate-visible so the grid adaptor can evaluate the same non-rigorous
/// right-hand side and Jacobian in its surrogates.
pub(crate) struct NumProblem {
    j: u32,
    gs: Vec<Vec<f64>>,
    dgs: Vec<Vec<f64>>,
    sym: Symmetry,
    n_u: usize,
    pub(crate) slots: Vec<i64>,
}

impl NumProblem {
    pub(crate) fn new(p: &PdeProblem, n_u: usize) -> Self {
        let gs: Vec<Vec<f64>> =
            p.gs.iter().map(|g| g.coeffs.iter().map(|c| c.midpoint()).collect()).collect();
        let dgs = p
            .gs
            .iter()
            .map(|g| g.derivative().coeffs.iter().map(|c| c.midpoint()).collect())
            .collect();
        NumProblem { j: p.j, gs, dgs, sym: p.sym, n_u, slots: mode_slots(p.sym, n_u) }
    }

    pub(crate) fn lead(&self, n: i64) -> f64 {
        -(n as f64).powi(2 * self.j as i32)
    }

    /// The constant-coefficient symbol used by the exponential warm start.
    fn lam0(&self) -> Vec<Complex64> {
        self.slots
            .iter()
            .map(|&n| {
                let mut l = Complex64::new(self.lead(n), 0.0);
                for (jj, g) in self.gs.iter().enumerate() {
                    if g.len() >= 2 {
                        l += i_pow(n, jj as u32) * g[1];
                    }
                }
                l
            })
            .collect()
    }

    pub(crate) fn rhs(&self, state: &[Complex64]) -> Vec<Complex64> {
        let u = expand(state, &self.slots, self.sym, self.n_u);
        let mut out: Vec<Complex64> =
            self.slots.iter().enumerate().map(|(s, &n)| state[s] * self.lead(n)).collect();
        for (jj, g) in self.gs.iter().enumerate() {
            if g.iter().all(|&c| c == 0.0) {
                continue;
            }
            let gu = poly_apply(g, &u);
            for (s, &n) in self.slots.iter().enumerate() {
                out[s] += i_pow(n, jj as u32) * gu.get(n);
            }
        }
        out
    }

    /// Dense space Jacobian over the slots, row-major.
    pub(crate) fn jacobian(&self, state: &[Complex64]) -> Vec<Complex64> {
        let u = expand(state, &self.slots, self.sym, self.n_u);
        let kers: Vec<Option<TwoSided>> = self
            .dgs
            .iter()
            .map(|d| {
                if d.iter().all(|&c| c == 0.0) {
                    None
                } else {
                    Some(poly_apply(d, &u))
                }
            })
            .collect();
        let m = self.slots.len();
        let mut a = vec![Z; m * m];
        for (r, &nr) in self.slots.iter().enumerate() {
            a[r * m + r] += self.lead(nr);
            for (jj, ker) in kers.iter().enumerate() {
                let Some(k) = ker else { continue };
                let w = i_pow(nr, jj as u32);
                for (c, &nc) in self.slots.iter().enumerate() {
                    let mut g = k.get(nr - nc);
                    if self.sym != Symmetry::None && nc != 0 {
                        let refl = k.get(nr + nc);
                        g += if self.sym == Symmetry::Even { refl } else { -refl };
                    }
                    a[r * m + c] += w * g;
                }
            }
        }
        a
    }
}

// ---------------------------------------------------------------------------
// Chebyshev helpers (binary64 twins of the rigorous ones in cheb)
// ---------------------------------------------------------------------------

/// Ascending second-kind nodes -cos(jπ/K) on [-1, 1].
pub(crate) fn lobatto_unit(k: usize) -> Vec<f64> {
    (0..=k).map(|jj| -(std::f64::consts::PI * jj as f64 / k as f64).cos()).collect()
}

/// Differentiation matrix on arbitrary distinct nodes (barycentric form with
/// Chebyshev–Lobatto weights), row-major.
fn diff_matrix(nodes: &[f64]) -> Vec<f64> {
    let k = nodes.len() - 1;
    let w = |j: usize| -> f64 {
        let base = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == k {
            base * 0.5
        } else {
            base
        }
    };
    let n = k + 1;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w(j) / w(i)) / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

/// Plain-sum Chebyshev coefficients of values at ascending second-kind nodes;
/// rows\[j\]\[s\] are per-slot samples, output cheb\[k\]\[s\].
pub(crate) fn dct_rows(rows: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let kt = rows.len() - 1;
    let m = rows[0].len();
    if kt == 0 {
        return vec![rows[0].clone()];
    }
    let cos_tbl: Vec<f64> =
        (0..2 * kt).map(|i| (std::f64::consts::PI * i as f64 / kt as f64).cos()).collect();
    (0..=kt)
        .map(|k| {
            let mut acc = vec![Z; m];
            for jj in 0..=kt {
                let mut w = cos_tbl[(k * jj) % (2 * kt)];
                if jj == 0 || jj == kt {
                    w *= 0.5;
                }
                for s in 0..m {
                    acc[s] += rows[kt - jj][s] * w;
                }
            }
            let norm = if k == 0 || k == kt { 1.0 } else { 2.0 } / kt as f64;
            acc.iter_mut().for_each(|v| *v *= norm);
            acc
        })
        .collect()
}

pub(crate) fn clenshaw_rows(cheb: &[Vec<Complex64>], s: f64) -> Vec<Complex64> {
    let m = cheb[0].len();
    let mut b1 = vec![Z; m];
    let mut b2 = vec![Z; m];
    for row in cheb.iter().skip(1).rev() {
        for i in 0..m {
            let b = row[i] + 2.0 * s * b1[i] - b2[i];
            b2[i] = b1[i];
            b1[i] = b;
        }
    }
    (0..m).map(|i| cheb[0][i] + s * b1[i] - b2[i]).collect()
}

/// Coefficients of d/ds of a plain-sum Chebyshev series on [-1, 1].
pub(crate) fn cheb_derivative(c: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let kt = c.len() - 1;
    let m = c[0].len();
    if kt == 0 {
        return vec![vec![Z; m]];
    }
    let mut d = vec![vec![Z; m]; kt];
    for k in (0..kt).rev() {
        for s in 0..m {
            let above = if k + 2 < kt { d[k + 2][s] } else { Z };
            d[k][s] = above + 2.0 * (k + 1) as f64 * c[k + 1][s];
        }
    }
    for s in 0..m {
        let b2 = if kt >= 3 { d[2][s] } else { Z };
        d[0][s] = c[1][s] + b2 * 0.5;
    }
    d
}

pub(crate) fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn phi1_c(z: Complex64) -> Complex64 {
    if z.norm() <= 0.5 {
        let mut acc = Z;
        for k in (0..=16u32).rev() {
            let fact: f64 = (1..=(k + 1) as u64).product::<u64>() as f64;
            acc = acc * z + 1.0 / fact;
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

// ---------------------------------------------------------------------------
// Per-subdomain collocation solve
// ---------------------------------------------------------------------------

/// Exponential-Euler warm start: states at each node, stepping 4 substeps
/// per node gap with the constant-coefficient symbol treated exactly.
fn etd_warm(np: &NumProblem, state0: &[Complex64], nodes: &[f64]) -> Vec<Vec<Complex64>> {
    let lam0 = np.lam0();
    let mut out = Vec::with_capacity(nodes.len());
    let mut u = state0.to_vec();
    out.push(u.clone());
    for gap in nodes.windows(2) {
        let h = (gap[1] - gap[0]) / 4.0;
        for _ in 0..4 {
            let f = np.rhs(&u);
            for s in 0..u.len() {
                let nl = f[s] - lam0[s] * u[s];
                let zh = lam0[s] * h;
                u[s] = zh.exp() * u[s] + h * phi1_c(zh) * nl;
            }
        }
        out.push(u.clone());
    }
    out
}

struct CollocationResult {
    values: Vec<Vec<Complex64>>,
    defect: f64,
}

/// Damped Newton on the collocation equations: row 0 pins the initial state,
/// rows 1..K enforce u' = F(u) at the interior and right nodes.
fn newton_collocation(
    np: &NumProblem,
    state0: &[Complex64],
    t_lo: f64,
    t_hi: f64,
    order: usize,
    domain: usize,
) -> Result<CollocationResult> {
    let m = np.slots.len();
    let nodes_unit = lobatto_unit(order);
    let nodes: Vec<f64> = nodes_unit
        .iter()
        .map(|s| 0.5 * (t_lo + t_hi) + 0.5 * (t_hi - t_lo) * s)
        .collect();
    let scale = 2.0 / (t_hi - t_lo);
    let dmat = diff_matrix(&nodes_unit);
    let kk = order;
    let n_tot = (kk + 1) * m;

    let residual = |vals: &[Vec<Complex64>]| -> (Vec<Complex64>, f64) {
        let mut r = vec![Z; n_tot];
        let mut fmax: f64 = 0.0;
        for s in 0..m {
            r[s] = vals[0][s] - state0[s];
        }
        let fs: Vec<Vec<Complex64>> = vals.iter().map(|v| np.rhs(v)).collect();
        for f in &fs {
            fmax = fmax.max(inf_norm(f));
        }
        for i in 1..=kk {
            for s in 0..m {
                let mut du = Z;
                for (jj, v) in vals.iter().enumerate() {
                    du += dmat[i * (kk + 1) + jj] * scale * v[s];
                }
                r[i * m + s] = du - fs[i][s];
            }
        }
        let rn = inf_norm(&r);
        (r, rn / (1.0 + fmax))
    };

    let mut vals = etd_warm(np, state0, &nodes);
    let (mut r, mut defect) = residual(&vals);
    for _ in 0..40 {
        if defect <= 1e-13 {
            break;
        }
        // Assemble the Jacobian, column-major.
        let mut jac = vec![Z; n_tot * n_tot];
        for s in 0..m {
            jac[s * n_tot + s] = Complex64::new(1.0, 0.0);
        }
        for i in 1..=kk {
            let a = np.jacobian(&vals[i]);
            for jj in 0..=kk {
                let dv = dmat[i * (kk + 1) + jj] * scale;
                for s in 0..m {
                    let row = i * m + s;
                    if jj == i {
                        for c in 0..m {
                            let col = jj * m + c;
                            let mut v = -a[s * m + c];
                            if s == c {
                                v += dv;
                            }
                            jac[col * n_tot + row] = v;
                        }
                    } else if dv != 0.0 {
                        let col = jj * m + s;
                        jac[col * n_tot + row] = Complex64::new(dv, 0.0);
                    }
                }
            }
        }
        let mut step: Vec<Complex64> = r.iter().map(|&x| -x).collect();
        lapack::solve_in_place(&mut jac, &mut step, n_tot, domain)?;

        // Backtracking line search on the raw residual norm.
        let rn_old = inf_norm(&r);
        let mut lambda = 1.0f64;
        let mut accepted = false;
        while lambda >= 1.0 / 256.0 {
            let cand: Vec<Vec<Complex64>> = vals
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    (0..m).map(|s| v[s] + lambda * step[i * m + s]).collect()
                })
                .collect();
            let (rc, dc) = residual(&cand);
            if inf_norm(&rc) <= rn_old * (1.0 - 0.25 * lambda) || dc <= 1e-13 {
                vals = cand;
                r = rc;
                defect = dc;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if defect > 1e-9 {
        return Err(Error::SolverFailure {
            domain,
            reason: format!("collocation Newton stalled (normalized residual {defect:.3e})"),
        });
    }
    Ok(CollocationResult { values: vals, defect })
}

/// Newton for the steady equation F(u) = 0 seeded from `seed`. `domain`
/// labels errors with the subdomain index the constant piece will occupy.
pub fn solve_steady(
    p: &PdeProblem,
    seed: &[Complex64],
    n_u: usize,
    domain: usize,
) -> Result<Vec<Complex64>> {
    let np = NumProblem::new(p, n_u);
    assert_eq!(seed.len(), np.slots.len(), "seed must match the slot layout");
    let m = np.slots.len();
    let lam_scale = np.slots.iter().map(|&n| np.lead(n).abs()).fold(1.0, f64::max);
    let mut u = seed.to_vec();
    let mut defect = f64::INFINITY;
    for _ in 0..60 {
        let f = np.rhs(&u);
        defect = inf_norm(&f) / (lam_scale * (1.0 + inf_norm(&u)));
        if defect <= 1e-14 {
            break;
        }
        let a_row = np.jacobian(&u);
        let mut a = vec![Z; m * m];
        for r in 0..m {
            for c in 0..m {
                a[c * m + r] = a_row[r * m + c];
            }
        }
        let mut step: Vec<Complex64> = f.iter().map(|&x| -x).collect();
        lapack::solve_in_place(&mut a, &mut step, m, domain)?;
        let fn_old = inf_norm(&f);
        let mut lambda = 1.0f64;
        let mut moved = false;
        while lambda >= 1.0 / 256.0 {
            let cand: Vec<Complex64> =
                (0..m).map(|s| u[s] + lambda * step[s]).collect();
            if inf_norm(&np.rhs(&cand)) <= fn_old * (1.0 - 0.25 * lambda) + 1e-300 {
                u = cand;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if defect > 1e-9 {
        return Err(Error::SolverFailure {
            domain,
            reason: format!("steady-state Newton stalled (normalized residual {defect:.3e})"),
        });
    }
    Ok(u)
}

// ---------------------------------------------------------------------------
// Public pipeline
// ---------------------------------------------------------------------------

/// Integrate the problem numerically over `grid` (strictly increasing; the
/// last entry may be ∞, in which case the final piece is the steady state
/// found by Newton from the preceding endpoint). `orders[m]` is the
/// Chebyshev degree K on the m-th finite subdomain.
pub fn integrate_numeric(
    p: &PdeProblem,
    u0: &InitialData,
    grid: &[f64],
    n_u: usize,
    orders: &[usize],
) -> Result<ApproxSolution> {
    if grid.len() < 2 {
        return Err(Error::Usage("time grid needs at least two points".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || !grid[0].is_finite() {
        return Err(Error::Usage("time grid must be finite and strictly increasing".into()));
    }
    if grid[..grid.len() - 1].iter().any(|t| !t.is_finite()) {
        return Err(Error::Usage("only the final grid point may be infinite".into()));
    }
    if n_u == 0 {
        return Err(Error::Usage("need at least one Fourier mode".into()));
    }
    let infinite = grid.last().unwrap().is_infinite();
    let finite_count = grid.len() - 1 - usize::from(infinite);
    if orders.len() != finite_count {
        return Err(Error::Usage(format!(
            "expected {finite_count} polynomial orders, got {}",
            orders.len()
        )));
    }
    if orders.iter().any(|&k| k == 0) {
        return Err(Error::Usage("polynomial orders must be ≥ 1".into()));
    }
    u0.check_compatible(p)?;

    let np = NumProblem::new(p, n_u);
    let mut state: Vec<Complex64> = np
        .slots
        .iter()
        .map(|&n| {
            let c = u0.data.finite.get(n);
            Complex64::new(c.re.midpoint(), c.im.midpoint())
        })
        .collect();

    let mut pieces = Vec::new();
    let mut defects = Vec::new();
    for mm in 0..finite_count {
        let (a, b) = (grid[mm], grid[mm + 1]);
        let res = newton_collocation(&np, &state, a, b, orders[mm], mm)?;
        let piece = Piece {
            t_lo: a,
            t_hi: b,
            sym: p.sym,
            n_max: n_u,
            cheb: dct_rows(&res.values),
        };
        state = piece.end_state();
        pieces.push(piece);
        defects.push(res.defect);
    }
    if infinite {
        let steady = solve_steady(p, &state, n_u, finite_count)?;
        let f = np.rhs(&steady);
        let lam_scale = np.slots.iter().map(|&n| np.lead(n).abs()).fold(1.0, f64::max);
        defects.push(inf_norm(&f) / (lam_scale * (1.0 + inf_norm(&steady))));
        pieces.push(Piece {
            t_lo: grid[finite_count],
            t_hi: f64::INFINITY,
            sym: p.sym,
            n_max: n_u,
            cheb: vec![steady],
        });
    }
    Ok(ApproxSolution { pieces, defects })
}

/// Sup over sample points between collocation nodes of the normalized ODE
/// defect |u̇ - F(u)| of a finite piece — the quantity the grid adaptor
/// drives down (the at-node residual is zero by construction).
pub fn between_node_defect(p: &PdeProblem, piece: &Piece) -> f64 {
    assert!(piece.t_hi.is_finite() && !piece.is_constant());
    let np = NumProblem::new(p, piece.n_max);
    let kk = piece.order();
    let scale = 2.0 / (piece.t_hi - piece.t_lo);
    let dcheb = cheb_derivative(&piece.cheb);
    let nodes = lobatto_unit(kk);
    let mut worst: f64 = 0.0;
    for w in nodes.windows(2) {
        let s = 0.5 * (w[0] + w[1]);
        let u = clenshaw_rows(&piece.cheb, s);
        let du: Vec<Complex64> =
            clenshaw_rows(&dcheb, s).into_iter().map(|v| v * scale).collect();
        let f = np.rhs(&u);
        let fmax = 1.0 + inf_norm(&f);
        let r: Vec<Complex64> = (0..u.len()).map(|i| du[i] - f[i]).collect();
        worst = worst.max(inf_norm(&r) / fmax);
    }
    worst
}

/// Per-subdomain, per-order time averages of the Jacobian convolution
/// kernels (g^{(j)})'(ū(t)), truncated to the retained modes. These feed the
/// linearization; any choice is admissible, so the averaging is plain
/// numerics.
pub struct KernelAverages {
    /// v\[m\]\[j\]: average kernel of g^{(j)} on subdomain m.
    pub v: Vec<Vec<FourierSeq>>,
}

fn kernel_sym(sym: Symmetry, j: usize) -> Symmetry {
    match sym {
        Symmetry::None => Symmetry::None,
        Symmetry::Even => Symmetry::Even,
        Symmetry::Odd => {
            if j % 2 == 0 {
                Symmetry::Even
            } else {
                Symmetry::Odd
            }
        }
    }
}

pub fn kernel_averages(p: &PdeProblem, sol: &ApproxSolution, nu: Interval) -> KernelAverages {
    let np = NumProblem::new(p, sol.pieces[0].n_max);
    let deg = p.max_degree();
    let v = sol
        .pieces
        .iter()
        .map(|piece| {
            // Kernel values at enough nodes to average exactly in time.
            let kt = if piece.is_constant() { 0 } else { piece.order() * (deg - 1).max(1) };
            let nodes: Vec<f64> = if kt == 0 {
                vec![piece.t_lo.min(piece.t_hi)]
            } else {
                lobatto_unit(kt)
                    .iter()
                    .map(|s| 0.5 * (piece.t_lo + piece.t_hi) + 0.5 * (piece.t_hi - piece.t_lo) * s)
                    .collect()
            };
            (0..np.dgs.len())
                .map(|jj| {
                    let ksym = kernel_sym(p.sym, jj);
                    let rows: Vec<Vec<Complex64>> = nodes
                        .iter()
                        .map(|&t| {
                            let u = expand(&piece.state_at(t), &np.slots, p.sym, np.n_u);
                            let ker = poly_apply(&np.dgs[jj], &u);
                            mode_slots(ksym, np.n_u)
                                .iter()
                                .map(|&n| ker.get(n))
                                .collect()
                        })
                        .collect();
                    let avg_cheb = dct_rows(&rows);
                    let mut avg = vec![Z; rows[0].len()];
                    for (k, row) in avg_cheb.iter().enumerate().step_by(2) {
                        let w = 1.0 / (1.0 - (k * k) as f64);
                        for (s, &c) in row.iter().enumerate() {
                            avg[s] += c * w;
                        }
                    }
                    let mut f = FourierSeq::zeros(ksym, np.n_u as i64, nu);
                    for (s, &n) in mode_slots(ksym, np.n_u).iter().enumerate() {
                        f.set(n, CInterval::point(avg[s].re, avg[s].im)).expect("in range");
                    }
                    f
                })
                .collect()
        })
        .collect();
    KernelAverages { v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::ZERO as ZERO_F;
    use crate::problem::{preset, InitialData, Poly};
    use rand::{Rng, SeedableRng};

    fn nu() -> Interval {
        Interval::point(1.0)
    }

    #[test]
    fn heat_matches_exact_solution() {
        let pre = preset("heat", nu()).unwrap();
        let sol =
            integrate_numeric(&pre.problem, &pre.init, &[0.0, 1.0], 4, &[10]).unwrap();
        assert!(sol.defects[0] <= 1e-12, "defect {}", sol.defects[0]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let t: f64 = rng.gen_range(0.0..1.0);
            let x: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let got = sol.eval_real(t, x).unwrap();
            let want = (-t).exp() * x.cos();
            assert!((got - want).abs() <= 1e-10, "t={t} x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let pre = preset("sh", nu()).unwrap();
        let zero = InitialData::exact(FourierSeq::zeros(Symmetry::Even, 0, nu()));
        let sol =
            integrate_numeric(&pre.problem, &zero, &[0.0, 1e-3, 2e-3], 8, &[4, 4]).unwrap();
        for piece in &sol.pieces {
            for row in &piece.cheb {
                assert!(inf_norm(row) <= 1e-13);
            }
        }
    }

    #[test]
    fn t2_time_average() {
        // A piece that is exactly T_2(s) in one mode: average -1/3.
        let piece = Piece {
            t_lo: 0.0,
            t_hi: 2.0,
            sym: Symmetry::Even,
            n_max: 0,
            cheb: vec![vec![Z], vec![Z], vec![Complex64::new(1.0, 0.0)]],
        };
        let avg = piece.time_average(nu());
        assert!(avg.get(0).re.contains(-1.0 / 3.0));
        assert!(avg.get(0).re.width() < 1e-15);
        // Constant piece: average is the constant.
        let c = Piece {
            t_lo: 0.0,
            t_hi: 1.0,
            sym: Symmetry::Even,
            n_max: 0,
            cheb: vec![vec![Complex64::new(2.5, 0.0)]],
        };
        assert!(c.time_average(nu()).get(0).re.contains(2.5));
        // T_1 alone: zero average.
        let p1 = Piece {
            t_lo: 0.0,
            t_hi: 1.0,
            sym: Symmetry::Even,
            n_max: 0,
            cheb: vec![vec![Z], vec![Complex64::new(1.0, 0.0)]],
        };
        let a1 = p1.time_average(nu()).get(0).re;
        assert!(a1.contains(0.0) && a1.width() < 1e-15);
    }

    #[test]
    fn cubic_kernel_average() {
        // g(x) = x³, ū = cos x constant in time: kernel 3ū² has
        // v̄_0 = 3/2, v̄_{±2} = 3/4.
        let p = crate::problem::PdeProblem::new(
            1,
            vec![Poly::from_f64(&[0.0, 0.0, 0.0, 1.0]), Poly::zero()],
            Symmetry::Even,
        )
        .unwrap();
        let piece = Piece {
            t_lo: 0.0,
            t_hi: 1.0,
            sym: Symmetry::Even,
            n_max: 4,
            cheb: vec![vec![Z, Complex64::new(0.5, 0.0), Z, Z, Z]],
        };
        let sol = ApproxSolution { pieces: vec![piece], defects: vec![0.0] };
        let ka = kernel_averages(&p, &sol, nu());
        let k0 = &ka.v[0][0];
        assert!((k0.get(0).re.midpoint() - 1.5).abs() < 1e-14);
        assert!((k0.get(2).re.midpoint() - 0.75).abs() < 1e-14);
        assert!((k0.get(-2).re.midpoint() - 0.75).abs() < 1e-14);
        assert!(k0.get(1).re.midpoint().abs() < 1e-14);
        // Linear g: kernel is the constant derivative.
        let lin = crate::problem::PdeProblem::new(
            1,
            vec![Poly::from_f64(&[0.0, -3.0]), Poly::zero()],
            Symmetry::Even,
        )
        .unwrap();
        let ka2 = kernel_averages(&lin, &sol, nu());
        assert!((ka2.v[0][0].get(0).re.midpoint() + 3.0).abs() < 1e-14);
        assert!(ka2.v[0][0].get(2).re.midpoint().abs() < 1e-14);
    }

    #[test]
    fn sh_interfaces_glue_and_defect_shrinks_with_order() {
        let pre = preset("sh", nu()).unwrap();
        let h = pre.problem.internal_time(1.5).hi / 100.0;
        let sol = integrate_numeric(&pre.problem, &pre.init, &[0.0, h, 2.0 * h], 30, &[5, 5])
            .unwrap();
        // Interface mismatch between consecutive pieces.
        let left = sol.pieces[0].state_at(h);
        let right = sol.pieces[1].state_at(h);
        let gap: f64 =
            (0..left.len()).map(|i| (left[i] - right[i]).norm()).fold(0.0, f64::max);
        assert!(gap <= 1e-10, "interface gap {gap}");
        // Between-node defect decreases when the order is raised by 2.
        let mut prev = f64::INFINITY;
        for k in [3usize, 5, 7] {
            let s = integrate_numeric(&pre.problem, &pre.init, &[0.0, h], 30, &[k]).unwrap();
            let d = between_node_defect(&pre.problem, &s.pieces[0]);
            assert!(d <= 0.6 * prev + 1e-13, "order {k}: defect {d} vs previous {prev}");
            prev = d;
        }
    }

    #[test]
    fn ks_preserves_odd_parity() {
        let pre = preset("ks", nu()).unwrap();
        let h = pre.problem.internal_time(pre.horizon.unwrap()).hi / 60.0;
        let sol =
            integrate_numeric(&pre.problem, &pre.init, &[0.0, h, 2.0 * h], 24, &[5, 5]).unwrap();
        for piece in &sol.pieces {
            assert_eq!(piece.sym, Symmetry::Odd);
            for row in &piece.cheb {
                for v in row {
                    assert!(v.re.abs() <= 1e-13, "odd modes drifted off the imaginary axis");
                }
            }
        }
        assert!(sol.defects.iter().all(|&d| d <= 1e-10));
    }

    #[test]
    fn steady_state_near_zero_for_sh() {
        let pre = preset("sh", nu()).unwrap();
        let seed: Vec<Complex64> = (0..=30)
            .map(|n| if n == 1 { Complex64::new(0.005, 0.0) } else { Z })
            .collect();
        let steady = solve_steady(&pre.problem, &seed, 30, 0).unwrap();
        assert!(inf_norm(&steady) <= 1e-11);
    }

    #[test]
    fn infinite_grid_appends_constant_piece() {
        let pre = preset("sh", nu()).unwrap();
        let tiny = InitialData::new(
            FourierSeq::from_cos_coeffs(nu(), &[ZERO_F, Interval::point(1e-3)]),
            ZERO_F,
            31,
        )
        .unwrap();
        let sol = integrate_numeric(
            &pre.problem,
            &tiny,
            &[0.0, 1e-3, f64::INFINITY],
            12,
            &[4],
        )
        .unwrap();
        assert!(sol.is_infinite());
        assert_eq!(sol.pieces.len(), 2);
        assert!(sol.pieces[1].is_constant());
        // Zero is the only nearby steady state for small data.
        assert!(inf_norm(&sol.pieces[1].cheb[0]) <= 1e-10);
        assert!(sol.eval_real(5.0, 0.3).is_ok());
        assert!(sol.eval_real(-1.0, 0.3).is_err());
    }

    #[test]
    fn grid_validation() {
        let pre = preset("heat", nu()).unwrap();
        let e = integrate_numeric(&pre.problem, &pre.init, &[0.0], 2, &[]);
        assert!(e.is_err());
        let e = integrate_numeric(&pre.problem, &pre.init, &[0.0, 0.0], 2, &[2]);
        assert!(e.is_err());
        let e = integrate_numeric(&pre.problem, &pre.init, &[f64::INFINITY, 1.0], 2, &[2]);
        assert!(e.is_err());
        let e = integrate_numeric(&pre.problem, &pre.init, &[0.0, 1.0], 2, &[2, 2]);
        assert!(e.is_err());
        let e = integrate_numeric(&pre.problem, &pre.init, &[0.0, 1.0], 0, &[2]);
        assert!(e.is_err());
    }

    #[test]
    fn cheb_derivative_matches_basis() {
        // d/ds T_3 = 12s² - 3 = 6T_2 + 3T_0.
        let c = vec![vec![Z], vec![Z], vec![Z], vec![Complex64::new(1.0, 0.0)]];
        let d = cheb_derivative(&c);
        assert!((d[0][0].re - 3.0).abs() < 1e-14);
        assert!(d[1][0].re.abs() < 1e-14);
        assert!((d[2][0].re - 6.0).abs() < 1e-14);
    }
}
