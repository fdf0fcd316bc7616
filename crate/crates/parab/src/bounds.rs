//! The certificate ingredients: per-subdomain defect bounds Y, first-order
//! contraction bounds Z, and second-order bounds W for the fixed-point
//! argument, plus their time-independent variants for the infinite final
//! step near a stable equilibrium.
//!
//! Everything here consumes a numeric approximate solution (`solver`), the
//! per-subdomain linearizations (`linop`), and produces intervals that are
//! rigorous upper bounds by construction: outward-rounded arithmetic all the
//! way down, coefficient-sum C⁰ bounds in time, Bernstein-ellipse remainders
//! for the interpolation of the smoothed defect, and analytic tail formulas
//! beyond the stored mode range.

use rayon::prelude::*;

use crate::cheb::{cheb_nodes, ChebPoly, InterpErrorModel, TimeSeq};
use crate::cheb::interp_error_bound;
use crate::expint;
use crate::interval::{CInterval, Interval, C_ZERO, ONE, ZERO};
use crate::linop::{self, i_powers, slot_weights, DomainLinOp, PropagatorChain};
use crate::mat::{CMat, RMat};
use crate::problem::{InitialData, PdeProblem};
use crate::seq::{subspace_weights, FourierSeq, SeqOperator, Symmetry};
use crate::solver::{mode_slots, ApproxSolution, Piece};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Index plumbing between mode labels and storage slots
// ---------------------------------------------------------------------------

/// Storage index of mode n in a square operator block of half-width `n_blk`.
fn seq_index(sym: Symmetry, n_blk: i64, n: i64) -> usize {
    match sym {
        Symmetry::None => (n + n_blk) as usize,
        _ => n as usize,
    }
}

/// Modes strictly beyond the block (|n| > n_l) up to |n| ≤ n_top; both signs
/// in the general class, nonnegative representatives otherwise.
fn tail_modes(sym: Symmetry, n_l: i64, n_top: i64) -> Vec<i64> {
    let mut out = Vec::new();
    for n in (n_l + 1)..=n_top {
        out.push(n);
        if sym == Symmetry::None {
            out.push(-n);
        }
    }
    out
}

/// Block coordinates of a sequence (entries at the operator's mode slots).
fn block_vec(op: &DomainLinOp, f: &FourierSeq) -> Vec<CInterval> {
    op.slots().iter().map(|&n| f.get(n)).collect()
}

/// ū as interval Chebyshev data; an infinite (constant) piece is carried on
/// a formal unit window since only its coefficients matter.
fn ubar_time_seq(piece: &Piece, nu: Interval) -> TimeSeq {
    let ts = piece.to_time_seq(nu);
    if piece.t_hi.is_finite() {
        ts
    } else {
        assert!(piece.is_constant(), "infinite subdomain must hold a constant state");
        TimeSeq::new(0.0, 1.0, ts.coeffs)
    }
}

// ---------------------------------------------------------------------------
// L and F applied rigorously
// ---------------------------------------------------------------------------

/// L u for the extended operator: diagonalized block plus symbol tail.
pub(crate) fn l_apply(op: &DomainLinOp, u: &FourierSeq) -> FourierSeq {
    assert_eq!(u.sym(), op.sym());
    let n_top = u.n_max().max(op.n_l);
    let mut out = FourierSeq::zeros(u.sym(), n_top, u.nu());
    let eig = op.qinv.mul_vec(&block_vec(op, u));
    let scaled: Vec<CInterval> =
        eig.iter().zip(&op.lam_fin).map(|(e, l)| *e * *l).collect();
    let phys = op.q.mul_vec(&scaled);
    for (s, &n) in op.slots().iter().enumerate() {
        out.set(n, phys[s]).expect("block mode in range");
    }
    for &n in &tail_modes(u.sym(), op.n_l, u.n_max()) {
        out.set(n, op.lambda_tail(n) * u.get(n)).expect("tail mode in range");
    }
    out
}

/// L⁻¹ u; requires every eigenvalue enclosure to exclude zero.
fn l_inv_apply(op: &DomainLinOp, u: &FourierSeq) -> Result<FourierSeq> {
    assert_eq!(u.sym(), op.sym());
    let n_top = u.n_max().max(op.n_l);
    let mut out = FourierSeq::zeros(u.sym(), n_top, u.nu());
    let eig = op.qinv.mul_vec(&block_vec(op, u));
    let mut scaled = Vec::with_capacity(eig.len());
    for (e, l) in eig.iter().zip(&op.lam_fin) {
        scaled.push(*e * l.recip()?);
    }
    let phys = op.q.mul_vec(&scaled);
    for (s, &n) in op.slots().iter().enumerate() {
        out.set(n, phys[s]).expect("block mode in range");
    }
    for &n in &tail_modes(u.sym(), op.n_l, u.n_max()) {
        let v = u.get(n);
        if v != C_ZERO {
            out.set(n, op.lambda_tail(n).recip()? * v).expect("tail mode in range");
        }
    }
    Ok(out)
}

/// F(ū(t)) as Chebyshev-in-time data, mirroring `PdeProblem::rhs_f`.
fn rhs_time_seq(p: &PdeProblem, u: &TimeSeq) -> TimeSeq {
    let lead = TimeSeq::new(
        u.t_lo,
        u.t_hi,
        u.coeffs.iter().map(|c| c.derivative(2 * p.j, false)).collect(),
    );
    let mut acc = if p.j % 2 == 0 { lead.scale(-ONE) } else { lead };
    for (jj, g) in p.gs.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let gu = u.apply_poly(&g.coeffs);
        let term = TimeSeq::new(
            u.t_lo,
            u.t_hi,
            gu.coeffs.iter().map(|c| c.derivative(jj as u32, false)).collect(),
        );
        acc = acc.add(&term);
    }
    acc
}

// ---------------------------------------------------------------------------
// Stability gates and the δ = ∞ smoothing diagonals
// ---------------------------------------------------------------------------

/// Every eigenvalue of L, block and tail, must have strictly negative real
/// part for an infinite-horizon step.
pub fn check_stable(op: &DomainLinOp) -> Result<()> {
    for (s, l) in op.lam_fin.iter().enumerate() {
        if l.re.hi >= 0.0 {
            return Err(Error::Stability(format!(
                "block eigenvalue {s} has real part in [{:.6e}, {:.6e}], not strictly negative",
                l.re.lo, l.re.hi
            )));
        }
    }
    let sup = op.re_tail_sup(op.n_l);
    if sup.hi >= 0.0 {
        return Err(Error::Stability(format!(
            "tail symbol real part reaches {:.6e} ≥ 0 beyond the block",
            sup.hi
        )));
    }
    Ok(())
}

/// Block smoothing weights for an infinite step: ∫₀^∞ e^{s·Reλ} ds = 1/|Reλ|.
fn inf_fin_diag(op: &DomainLinOp) -> Vec<Interval> {
    op.lam_fin.iter().map(|l| (ZERO - l.re).recip()).collect()
}

fn inf_tail_b(op: &DomainLinOp, n: i64) -> Interval {
    (ZERO - op.re_lambda_tail(n)).recip()
}

/// B^{(m,i)} block factor, valid for finite and infinite rows. `conj` is the
/// conjugated propagator (Q^{(m)})⁻¹ 𝔏^{(m,i)} Q^{(i)} for i < m.
fn b_block_any(ops: &[DomainLinOp], m: usize, i: usize, conj: Option<&CMat>) -> Result<RMat> {
    let inf = !ops[m].len.hi.is_finite();
    if inf {
        check_stable(&ops[m])?;
    }
    if i == m && inf {
        Ok(ops[m].q.abs().scale_cols(&inf_fin_diag(&ops[m])))
    } else {
        Ok(linop::b_block(&ops[m], &ops[i], conj))
    }
}

/// Tail diagonal entry b^{(m,i)}_n, valid for finite and infinite steps.
fn tail_b_any(ops: &[DomainLinOp], m: usize, i: usize, n: i64) -> Interval {
    if i == m && !ops[m].len.hi.is_finite() {
        inf_tail_b(&ops[m], n)
    } else {
        linop::tail_b(ops, m, i, n)
    }
}

/// χ^{(m,j)}: sup over tail modes of |n|^j times the smoothing weight,
/// dispatching on the subdomain length.
pub fn chi_bound(op: &DomainLinOp, j: u32) -> Result<Interval> {
    if op.len.hi.is_finite() {
        Ok(op.chi(j))
    } else {
        op.chi_inf(j)
    }
}

// ---------------------------------------------------------------------------
// Ingredients: β, χ, ‖ū‖, and the majorant Γ
// ---------------------------------------------------------------------------

/// Per-subdomain data entering the Z and W bounds.
pub struct DomainIngredients {
    /// β^{(j)}: mode-wise C⁰ bounds of the kernel defect (g^{(j)})'(ū) − v̄₀^{(j)}.
    pub beta: Vec<FourierSeq>,
    pub beta_norms: Vec<Interval>,
    /// χ^{(j)}: tail suprema of |n|^j · (smoothing weight at mode n).
    pub chi: Vec<Interval>,
    /// C⁰-in-time bound of ‖ū‖ in the weighted space.
    pub u_norm: Interval,
    /// Entry-wise majorant of Q̃⁻¹ Dγ(ū(·)) restricted to |n| ≤ N̄ + N_L.
    pub gamma: SeqOperator,
    /// Global kernel support radius N̄ sizing the Γ block.
    pub nbar: i64,
}

/// Mode-wise C⁰ bound of a kernel with the scalar average v₀ removed at the
/// zero mode: β_n = ‖k_n(·) − δ_{n,0} v₀‖_{C⁰}.
fn beta_seq(ker: &TimeSeq, v0: CInterval, problem_sym: Symmetry, nu: Interval) -> FourierSeq {
    let n_top = ker.coeffs.iter().map(|c| c.n_max()).max().unwrap_or(0);
    let out_sym = if problem_sym == Symmetry::None { Symmetry::None } else { Symmetry::Even };
    let mut out = FourierSeq::zeros(out_sym, n_top, nu);
    for &n in &mode_slots(out_sym, n_top as usize) {
        let mut c0 = ker.coeffs[0].get(n);
        if n == 0 {
            c0 = c0 - v0;
        }
        let mut b = c0.abs();
        for c in ker.coeffs.iter().skip(1) {
            b = b + c.get(n).abs();
        }
        out.set(n, CInterval::real(b)).expect("mode in range");
    }
    out
}

/// Largest |n| carrying a nonzero entry (entries are nonnegative reals).
fn support_radius(b: &FourierSeq) -> i64 {
    let mut r = 0;
    for n in 1..=b.n_max() {
        if b.get(n).re.hi > 0.0 || b.get(-n).re.hi > 0.0 {
            r = n;
        }
    }
    r
}

/// The rigorous kernels (g^{(j)})'(ū(t)) of one subdomain.
fn domain_kernels(p: &PdeProblem, uts: &TimeSeq) -> Vec<TimeSeq> {
    p.gs.iter().map(|g| uts.apply_poly(&g.derivative().coeffs)).collect()
}

/// Entry-wise majorant Γ of Q̃⁻¹ Dγ(ū(·)) on the modes |n| ≤ N̄ + N_L, rows
/// extended to |n| ≤ 2N̄ + N_L (the full image support). Rows inside the
/// block are eigencoordinates; rows beyond it are plain Fourier modes.
pub fn gamma_op(p: &PdeProblem, op: &DomainLinOp, ubar: &TimeSeq, nbar: i64) -> Result<SeqOperator> {
    gamma_from_kernels(p, op, &domain_kernels(p, ubar), nbar)
}

fn gamma_from_kernels(
    p: &PdeProblem,
    op: &DomainLinOp,
    kers: &[TimeSeq],
    nbar: i64,
) -> Result<SeqOperator> {
    let sym = op.sym();
    let n_l = op.n_l;
    let big = 2 * nbar + n_l;
    let ncol = nbar + n_l;
    let slots = op.slots();
    let ns = slots.len();
    let dim = match sym {
        Symmetry::None => 2 * big as usize + 1,
        _ => big as usize + 1,
    };
    let mut block = CMat::zeros(dim, dim);
    let deg_t = kers.iter().map(|k| k.degree()).max().unwrap_or(0);
    let sgn = if sym == Symmetry::Odd { -ONE } else { ONE };
    let kget = |j: usize, k: usize, n: i64| -> CInterval {
        kers[j].coeffs.get(k).map(|c| c.get(n)).unwrap_or(C_ZERO)
    };
    // DF column of the symmetrized basis vector φ_c = e_c + σ e_{-c}: the
    // kernel part of the entry at row r is Σ_j (ir)^j (k_{r-c} + σ k_{r+c}).
    let df_coeffs = |r: i64, c: i64, fold: bool| -> Vec<CInterval> {
        let ip = i_powers(r, kers.len());
        (0..=deg_t)
            .map(|k| {
                let mut acc = C_ZERO;
                for (j, &ipj) in ip.iter().enumerate() {
                    if ipj == C_ZERO {
                        continue;
                    }
                    let mut kv = kget(j, k, r - c);
                    if fold {
                        kv = kv + kget(j, k, r + c).scale(sgn);
                    }
                    acc = acc + ipj * kv;
                }
                acc
            })
            .collect()
    };
    let abs_sum = |coeffs: &[CInterval]| -> Interval {
        Interval::sum(coeffs.iter().map(|c| c.abs()))
    };
    for &c in &mode_slots(sym, ncol as usize) {
        let ci = seq_index(sym, big, c);
        let fold = sym != Symmetry::None && c != 0;
        // Block rows: apply Q⁻¹ to the column, fold the constant part of
        // Dγ = DF − L into the zeroth Chebyshev coefficient, then bound.
        let blk_polys: Vec<Vec<CInterval>> =
            slots.iter().map(|&r| df_coeffs(r, c, fold)).collect();
        let mut eig_polys = vec![vec![C_ZERO; deg_t + 1]; ns];
        for k in 0..=deg_t {
            let vk: Vec<CInterval> = (0..ns).map(|s| blk_polys[s][k]).collect();
            let ek = op.qinv.mul_vec(&vk);
            for (pth, e) in ek.into_iter().enumerate() {
                eig_polys[pth][k] = e;
            }
        }
        if c.abs() <= n_l {
            // Leading-term diagonal −c^{2J} and the λ_p Q⁻¹ part of L cancel
            // against the kernel averages when the linearization is exact.
            let sc = slots.iter().position(|&n| n == c).expect("block column slot");
            let lead = CInterval::real(-Interval::point(c.abs() as f64).powi(2 * p.j));
            for pth in 0..ns {
                let cst = (lead - op.lam_fin[pth]) * op.qinv[(pth, sc)];
                eig_polys[pth][0] = eig_polys[pth][0] + cst;
            }
        }
        for (pth, &rm) in slots.iter().enumerate() {
            let b = abs_sum(&eig_polys[pth]);
            if b.hi > 0.0 {
                block[(seq_index(sym, big, rm), ci)] = CInterval::real(b);
            }
        }
        // Tail rows: raw kernel folds; on the diagonal the symbol λ_c
        // cancels the zero-mode averages.
        for &r in &tail_modes(sym, n_l, big) {
            let mut coeffs = df_coeffs(r, c, fold);
            if r == c && c.abs() > n_l {
                let lead = CInterval::real(-Interval::point(c.abs() as f64).powi(2 * p.j));
                coeffs[0] = coeffs[0] + lead - op.lambda_tail(c);
            }
            let b = abs_sum(&coeffs);
            if b.hi > 0.0 {
                block[(seq_index(sym, big, r), ci)] = CInterval::real(b);
            }
        }
    }
    Ok(SeqOperator::block_only(op.nu(), sym, big, block))
}

/// Build β, χ, ‖ū‖, and Γ for every subdomain. The kernel support radius N̄
/// is global (a single block size serves all domains), so kernels are
/// computed first and Γ assembled second.
pub fn build_ingredients(
    p: &PdeProblem,
    sol: &ApproxSolution,
    ops: &[DomainLinOp],
) -> Result<Vec<DomainIngredients>> {
    assert_eq!(sol.pieces.len(), ops.len(), "one linearization per subdomain");
    struct Phase1 {
        kers: Vec<TimeSeq>,
        beta: Vec<FourierSeq>,
        beta_norms: Vec<Interval>,
        chi: Vec<Interval>,
        u_norm: Interval,
    }
    let phase1: Vec<Phase1> = sol
        .pieces
        .par_iter()
        .zip(ops.par_iter())
        .map(|(piece, op)| {
            let uts = ubar_time_seq(piece, op.nu());
            let kers = domain_kernels(p, &uts);
            let beta: Vec<FourierSeq> = kers
                .iter()
                .zip(&op.v0)
                .map(|(k, &v0)| beta_seq(k, v0, p.sym, op.nu()))
                .collect();
            let beta_norms = beta.iter().map(|b| b.norm()).collect();
            let chi = (0..p.gs.len())
                .map(|j| chi_bound(op, j as u32))
                .collect::<Result<Vec<_>>>()?;
            Ok(Phase1 { kers, beta, beta_norms, chi, u_norm: uts.c0_norm() })
        })
        .collect::<Result<Vec<_>>>()?;
    let nbar = phase1
        .iter()
        .flat_map(|ph| ph.beta.iter().map(support_radius))
        .max()
        .unwrap_or(0);
    phase1
        .into_par_iter()
        .zip(ops.par_iter())
        .map(|(ph, op)| {
            let gamma = gamma_from_kernels(p, op, &ph.kers, nbar)?;
            Ok(DomainIngredients {
                beta: ph.beta,
                beta_norms: ph.beta_norms,
                chi: ph.chi,
                u_norm: ph.u_norm,
                gamma,
                nbar,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Z and W
// ---------------------------------------------------------------------------

/// The analytic tail part of Z^{(m)}_i: μ^{(m,i)} Σ_j ‖β^{(i,j)}‖ χ^{(i,j)}.
pub fn z_tail_term(ops: &[DomainLinOp], ings: &[DomainIngredients], m: usize, i: usize) -> Interval {
    let mu = linop::mu_bound(ops, m, i, ops[i].n_l);
    let s = Interval::sum(
        ings[i]
            .beta_norms
            .iter()
            .zip(&ings[i].chi)
            .map(|(b, x)| *b * *x),
    );
    mu * s
}

/// Weighted column-sum norm of B Γ on the stored columns, for an arbitrary
/// block factor B (rows = block slots) and tail diagonal of B. Shared by the
/// Z bound and the spectral-gap condition (where B carries a shift).
pub(crate) fn gamma_colsum_norm(
    op: &DomainLinOp,
    ing: &DomainIngredients,
    bblk: &RMat,
    tail_diag: &dyn Fn(i64) -> Interval,
) -> Interval {
    let (sym, nu, n_l) = (op.sym(), op.nu(), op.n_l);
    let g = &ing.gamma;
    let big = g.n_blk;
    let ncol = ing.nbar + n_l;
    let slots = op.slots();
    let wslot = slot_weights(sym, nu, &slots);
    let wseq = subspace_weights(sym, nu, big);
    let tails = tail_modes(sym, n_l, big);
    let tail_w_b: Vec<Interval> = tails
        .iter()
        .map(|&r| wseq[seq_index(sym, big, r)] * tail_diag(r))
        .collect();
    let mut best = ZERO;
    for &c in &mode_slots(sym, ncol as usize) {
        let ci = seq_index(sym, big, c);
        let gcol: Vec<Interval> =
            slots.iter().map(|&rm| g.block[(seq_index(sym, big, rm), ci)].re).collect();
        let bv = bblk.mul_vec(&gcol);
        let mut tot = ZERO;
        for (s, v) in bv.iter().enumerate() {
            tot = tot + wslot[s] * *v;
        }
        for (t, &r) in tails.iter().enumerate() {
            let gr = g.block[(seq_index(sym, big, r), ci)].re;
            if gr.hi > 0.0 {
                tot = tot + tail_w_b[t] * gr;
            }
        }
        best = best.max_iv(tot / wseq[ci]);
    }
    best
}

/// Weighted column-sum norm of B |D|^j restricted to the block.
pub(crate) fn d_colsum_norm(op: &DomainLinOp, bblk: &RMat, j: usize) -> Interval {
    let slots = op.slots();
    let wslot = slot_weights(op.sym(), op.nu(), &slots);
    let dj: Vec<Interval> =
        slots.iter().map(|&n| Interval::point(n.abs() as f64).powi(j as u32)).collect();
    bblk.scale_cols(&dj).weighted_colsum_norm(&wslot, &wslot)
}

/// Operator norm of B^{(m,i)} Γ^{(i)} restricted to the stored columns.
fn b_gamma_norm(
    ops: &[DomainLinOp],
    ings: &[DomainIngredients],
    m: usize,
    i: usize,
    conj: Option<&CMat>,
) -> Result<Interval> {
    let bblk = b_block_any(ops, m, i, conj)?;
    Ok(gamma_colsum_norm(&ops[i], &ings[i], &bblk, &|n| tail_b_any(ops, m, i, n)))
}

/// Z^{(m)}_i = max(‖B^{(m,i)} Γ^{(i)}‖ on stored modes, tail term).
pub fn z_bound(
    ops: &[DomainLinOp],
    ings: &[DomainIngredients],
    m: usize,
    i: usize,
    conj: Option<&CMat>,
) -> Result<Interval> {
    let fin = b_gamma_norm(ops, ings, m, i, conj)?;
    Ok(fin.max_iv(z_tail_term(ops, ings, m, i)))
}

/// W^{(m)}_{i,i} = Σ_j ‖B^{(m,i)} |D|^j‖ · |g^{(j)}''|(‖ū^{(i)}‖ + r*_i).
pub fn w_bound(
    p: &PdeProblem,
    ops: &[DomainLinOp],
    ings: &[DomainIngredients],
    m: usize,
    i: usize,
    conj: Option<&CMat>,
    r_star_i: Interval,
) -> Result<Interval> {
    let op = &ops[i];
    let bblk = b_block_any(ops, m, i, conj)?;
    let mu = linop::mu_bound(ops, m, i, op.n_l);
    let rho = ings[i].u_norm + r_star_i;
    let mut total = ZERO;
    for (j, g) in p.gs.iter().enumerate() {
        if g.coeffs.len() < 3 {
            continue;
        }
        let curv = g.derivative().derivative().abs_eval(rho);
        if curv.hi == 0.0 {
            continue;
        }
        let blk = d_colsum_norm(op, &bblk, j);
        total = total + blk.max_iv(ings[i].chi[j] * mu) * curv;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Y: the defect sweep
// ---------------------------------------------------------------------------

pub struct YOutput {
    pub y: Vec<Interval>,
    /// Interpolation degree actually used on each finite subdomain.
    pub k_used: Vec<usize>,
    /// Endpoint state θ̄ after the last finite subdomain.
    pub theta_end: FourierSeq,
    /// Norm of the initial-datum part beyond the solver's mode range.
    pub eps_in: Interval,
}

/// Y^{(m)} for every subdomain, sweeping the interface states θ̄ forward.
/// `k_tilde` is the requested interpolation degree per subdomain; on an
/// unbounded Bernstein remainder the degree is doubled up to `k_cap`.
pub fn y_bounds(
    p: &PdeProblem,
    sol: &ApproxSolution,
    ops: &[DomainLinOp],
    u0: &InitialData,
    k_tilde: &[usize],
    k_cap: usize,
) -> Result<YOutput> {
    let mm = sol.pieces.len();
    assert_eq!(ops.len(), mm);
    assert_eq!(k_tilde.len(), mm);
    let n_u = sol.pieces[0].n_max as i64;
    assert!(n_u >= ops[0].n_l, "mode range must cover the diagonalized block");
    let eps_in = u0.data.project_gt(n_u).norm();
    let mut theta = u0.data.project_leq(n_u).finite;
    let mut y = Vec::with_capacity(mm);
    let mut k_used = Vec::with_capacity(mm);
    for m in 0..mm {
        let piece = &sol.pieces[m];
        let mu = linop::mu_initial(ops, m, n_u);
        if piece.t_hi.is_finite() {
            let mut kt = k_tilde[m].max(piece.order()).max(1);
            let (ym, th) = loop {
                match y_domain(p, &ops[m], piece, &theta, kt) {
                    Ok(res) => break res,
                    Err(Error::BoundFailure(_)) if kt < k_cap => kt = (2 * kt).min(k_cap),
                    Err(e) => return Err(e),
                }
            };
            y.push(ym + mu * eps_in);
            k_used.push(kt);
            theta = th;
        } else {
            check_stable(&ops[m])?;
            let ubar = ubar_time_seq(piece, ops[m].nu()).coeffs[0].clone();
            let ym = y_infinite_term(p, &ops[m], &theta, &ubar)?;
            y.push(ym + mu * eps_in);
            k_used.push(0);
        }
    }
    Ok(YOutput { y, k_used, theta_end: theta, eps_in })
}

/// One finite subdomain: bound ‖t ↦ e^{(t-τ)L} θ̄ + ∫ e^{(t-s)L} γ(ū(s)) ds − ū(t)‖
/// and return it with the endpoint state.
fn y_domain(
    p: &PdeProblem,
    op: &DomainLinOp,
    piece: &Piece,
    theta: &FourierSeq,
    kt: usize,
) -> Result<(Interval, FourierSeq)> {
    let (sym, nu, n_l) = (op.sym(), op.nu(), op.n_l);
    let ubar = piece.to_time_seq(nu);
    let (t_lo, t_hi) = (piece.t_lo, piece.t_hi);
    let half = (Interval::point(t_hi) - Interval::point(t_lo)).scale2(-1);
    // Split γ(ū(s)) = γ(Ū) + ψ(s) around the time average Ū: the constant
    // part integrates in closed form, the rest through panel quadrature.
    let f_ts = rhs_time_seq(p, &ubar);
    let u_avg = ubar.average();
    let f_avg = p.rhs_f(&u_avg);
    let n_tot = f_ts
        .coeffs
        .iter()
        .map(|c| c.n_max())
        .max()
        .unwrap_or(0)
        .max(theta.n_max())
        .max(ubar.coeffs[0].n_max())
        .max(n_l);
    let slots = op.slots();
    let ns = slots.len();
    let deg_f = f_ts.degree().max(ubar.degree());
    // Eigen-frame Chebyshev data of ψ and the constants: everything the
    // block needs lives in the coordinates where e^{tL} is diagonal.
    let u_eig: Vec<Vec<CInterval>> =
        ubar.coeffs.iter().map(|c| op.qinv.mul_vec(&block_vec(op, c))).collect();
    let f_eig: Vec<Vec<CInterval>> =
        f_ts.coeffs.iter().map(|c| op.qinv.mul_vec(&block_vec(op, c))).collect();
    let uavg_eig = op.qinv.mul_vec(&block_vec(op, &u_avg));
    let favg_eig = op.qinv.mul_vec(&block_vec(op, &f_avg));
    let theta_eig = op.qinv.mul_vec(&block_vec(op, theta));
    let coeff_at = |table: &[Vec<CInterval>], k: usize, s: usize| -> CInterval {
        table.get(k).map(|row| row[s]).unwrap_or(C_ZERO)
    };
    // Sample times: the interpolation nodes plus the exact right endpoint
    // for the interface state.
    let nodes = cheb_nodes(t_lo, t_hi, kt);
    let mut ts_all = nodes.clone();
    ts_all.push(Interval::point(t_hi));
    let n_ts = ts_all.len();
    let mut samples = vec![FourierSeq::zeros(sym, n_tot, nu); n_ts];
    let mut err = FourierSeq::zeros(sym, n_tot, nu);
    // A single mode (or eigen slot): values of e^{(t-τ)λ} v + ∫ at the
    // samples, plus the three Bernstein remainders of the interpolation.
    let mode_work = |lam: CInterval,
                     v: CInterval,
                     g_const: CInterval,
                     psi: &ChebPoly|
     -> Result<(Vec<CInterval>, Interval)> {
        let ints = expint::conv_at(lam, psi, &ts_all)?;
        let mut vals = Vec::with_capacity(n_ts);
        for (ti, t) in ts_all.iter().enumerate() {
            let trel = CInterval::real(*t - Interval::point(t_lo));
            let grown = lam * trel;
            vals.push(v * grown.exp() + g_const * trel * grown.phi1() + ints[ti]);
        }
        let w = lam.scale(half);
        let deg = kt as u32;
        let e_exp =
            interp_error_bound(&InterpErrorModel::Exponential { scale: v.abs(), w }, deg)?;
        let e_const = interp_error_bound(
            &InterpErrorModel::Integral { w, p_abs: vec![g_const.abs() * half] },
            deg,
        )?;
        let e_int = interp_error_bound(
            &InterpErrorModel::Integral {
                w,
                p_abs: psi.coeffs.iter().map(|c| c.abs() * half).collect(),
            },
            deg,
        )?;
        Ok((vals, e_exp + e_const + e_int))
    };
    // Block slots.
    let mut eig_vals = vec![vec![C_ZERO; ns]; n_ts];
    let mut eig_err = vec![ZERO; ns];
    for s in 0..ns {
        let lam = op.lam_fin[s];
        let g_const = favg_eig[s] - lam * uavg_eig[s];
        let psi = ChebPoly::new(
            t_lo,
            t_hi,
            (0..=deg_f)
                .map(|k| {
                    let mut v = coeff_at(&f_eig, k, s) - lam * coeff_at(&u_eig, k, s);
                    if k == 0 {
                        v = v - g_const;
                    }
                    v
                })
                .collect(),
        );
        let (vals, e) = mode_work(lam, theta_eig[s], g_const, &psi)?;
        for (ti, v) in vals.into_iter().enumerate() {
            eig_vals[ti][s] = v;
        }
        eig_err[s] = e;
    }
    let blk_err = op.q.abs().mul_vec(&eig_err);
    for (ti, ev) in eig_vals.iter().enumerate() {
        let phys = op.q.mul_vec(ev);
        for (s, &n) in slots.iter().enumerate() {
            samples[ti].set(n, phys[s]).expect("block mode in range");
        }
    }
    for (s, &n) in slots.iter().enumerate() {
        err.set(n, CInterval::real(blk_err[s])).expect("block mode in range");
    }
    // Tail modes evolve diagonally under the symbol.
    for &n in &tail_modes(sym, n_l, n_tot) {
        let lam = op.lambda_tail(n);
        let g_const = f_avg.get(n) - lam * u_avg.get(n);
        let psi = ChebPoly::new(
            t_lo,
            t_hi,
            (0..=deg_f)
                .map(|k| {
                    let fk = f_ts.coeffs.get(k).map(|c| c.get(n)).unwrap_or(C_ZERO);
                    let uk = ubar.coeffs.get(k).map(|c| c.get(n)).unwrap_or(C_ZERO);
                    let mut v = fk - lam * uk;
                    if k == 0 {
                        v = v - g_const;
                    }
                    v
                })
                .collect(),
        );
        let (vals, e) = mode_work(lam, theta.get(n), g_const, &psi)?;
        for (ti, v) in vals.into_iter().enumerate() {
            samples[ti].set(n, v).expect("tail mode in range");
        }
        err.set(n, CInterval::real(e)).expect("tail mode in range");
    }
    // Interface state from the exact-endpoint sample; defect samples get ū
    // subtracted before interpolation (no remainder: K̃ ≥ deg ū).
    let theta_next = samples.pop().expect("endpoint sample");
    ts_all.pop();
    for (ti, t) in ts_all.iter().enumerate() {
        samples[ti] = samples[ti].sub(&ubar.eval(*t)?);
    }
    let phi = TimeSeq::interpolate(t_lo, t_hi, &samples);
    let mut bnd = FourierSeq::zeros(sym, n_tot, nu);
    for &n in &mode_slots(sym, n_tot as usize) {
        let c0 = Interval::sum(phi.coeffs.iter().map(|c| c.get(n).abs()));
        let tot = c0 + err.get(n).re;
        if tot.hi > 0.0 {
            bnd.set(n, CInterval::real(tot)).expect("mode in range");
        }
    }
    Ok((bnd.norm(), theta_next))
}

/// Y for an unbounded final subdomain with constant ū:
/// ‖ |Q||Q⁻¹(θ + L⁻¹γ(ū))| + |ū + L⁻¹γ(ū)| ‖.
fn y_infinite_term(
    p: &PdeProblem,
    op: &DomainLinOp,
    theta: &FourierSeq,
    ubar: &FourierSeq,
) -> Result<Interval> {
    let gam = p.rhs_f(ubar).sub(&l_apply(op, ubar));
    let li = l_inv_apply(op, &gam)?;
    let a = theta.add(&li);
    let b = ubar.add(&li);
    let n_tot = a.n_max().max(b.n_max()).max(op.n_l);
    let a_eig_abs: Vec<Interval> =
        op.qinv.mul_vec(&block_vec(op, &a)).iter().map(|v| v.abs()).collect();
    let blk = op.q.abs().mul_vec(&a_eig_abs);
    let mut bnd = FourierSeq::zeros(op.sym(), n_tot, op.nu());
    for (s, &n) in op.slots().iter().enumerate() {
        bnd.set(n, CInterval::real(blk[s] + b.get(n).abs())).expect("block mode");
    }
    for &n in &tail_modes(op.sym(), op.n_l, n_tot) {
        bnd.set(n, CInterval::real(a.get(n).abs() + b.get(n).abs())).expect("tail mode");
    }
    Ok(bnd.norm())
}

// ---------------------------------------------------------------------------
// The infinite-horizon step as a standalone bound set
// ---------------------------------------------------------------------------

/// (Y∞, Z∞, W∞) for a single unbounded step from `u_in` around the constant
/// state `ubar`. Fails with a stability error unless every eigenvalue of L
/// has strictly negative real part.
pub fn infinite_bounds(
    p: &PdeProblem,
    op: &DomainLinOp,
    ubar: &FourierSeq,
    u_in: &FourierSeq,
    r_star: Interval,
) -> Result<(Interval, Interval, Interval)> {
    let ing = infinite_ingredients(p, op, ubar)?;
    let ops = std::slice::from_ref(op);
    let ings = std::slice::from_ref(&ing);
    let y = y_infinite_term(p, op, u_in, ubar)?;
    let z = z_bound(ops, ings, 0, 0, None)?;
    let w = w_bound(p, ops, ings, 0, 0, None, r_star)?;
    Ok((y, z, w))
}

/// β/χ/Γ ingredients of an unbounded step around the constant state `ubar`,
/// usable both for (Y∞, Z∞, W∞) and for the spectral-gap condition.
pub fn infinite_ingredients(
    p: &PdeProblem,
    op: &DomainLinOp,
    ubar: &FourierSeq,
) -> Result<DomainIngredients> {
    check_stable(op)?;
    let uts = TimeSeq::new(0.0, 1.0, vec![ubar.clone()]);
    let kers = domain_kernels(p, &uts);
    let beta: Vec<FourierSeq> = kers
        .iter()
        .zip(&op.v0)
        .map(|(k, &v0)| beta_seq(k, v0, p.sym, op.nu()))
        .collect();
    let beta_norms: Vec<Interval> = beta.iter().map(|b| b.norm()).collect();
    let chi = (0..p.gs.len())
        .map(|j| chi_bound(op, j as u32))
        .collect::<Result<Vec<_>>>()?;
    let nbar = beta.iter().map(support_radius).max().unwrap_or(0);
    let gamma = gamma_from_kernels(p, op, &kers, nbar)?;
    Ok(DomainIngredients { beta, beta_norms, chi, u_norm: uts.c0_norm(), gamma, nbar })
}

/// The stationary-only defect ‖ū + L⁻¹γ(ū)‖ used to pinpoint the steady
/// state: ‖u^stat − ū‖ admits a radius computed from this Y in place of the
/// full initial-value defect.
pub fn y_stationary(p: &PdeProblem, op: &DomainLinOp, ubar: &FourierSeq) -> Result<Interval> {
    let gam = p.rhs_f(ubar).sub(&l_apply(op, ubar));
    let li = l_inv_apply(op, &gam)?;
    Ok(ubar.add(&li).norm())
}

// ---------------------------------------------------------------------------
// The assembled bound set
// ---------------------------------------------------------------------------

/// Every interval the contraction argument needs: Y per subdomain, the
/// lower-triangular Z and W couplings, and the radius caps.
#[derive(Clone, Debug)]
pub struct BoundsSet {
    pub y: Vec<Interval>,
    /// z\[m\]\[i\] for i ≤ m.
    pub z: Vec<Vec<Interval>>,
    /// w\[m\]\[i\] for i ≤ m.
    pub w: Vec<Vec<Interval>>,
    pub r_star: Vec<Interval>,
    pub k_used: Vec<usize>,
    pub nbar: i64,
    pub eps_in: Interval,
}

/// Compute the full bound set for a piecewise solution. `k_tilde` is the
/// requested defect interpolation degree per subdomain and `r_star` the
/// validity radius per subdomain.
pub fn compute_bounds(
    p: &PdeProblem,
    sol: &ApproxSolution,
    ops: &[DomainLinOp],
    u0: &InitialData,
    k_tilde: &[usize],
    k_cap: usize,
    r_star: &[Interval],
) -> Result<BoundsSet> {
    let mm = ops.len();
    assert_eq!(r_star.len(), mm);
    let ings = build_ingredients(p, sol, ops)?;
    let yout = y_bounds(p, sol, ops, u0, k_tilde, k_cap)?;
    let chain = PropagatorChain::build(ops);
    let rows: Vec<(Vec<Interval>, Vec<Interval>)> = (0..mm)
        .into_par_iter()
        .map(|m| {
            let conjs = chain.conj_chain(m);
            let mut zr = Vec::with_capacity(m + 1);
            let mut wr = Vec::with_capacity(m + 1);
            for i in 0..=m {
                let conj = if i == m { None } else { Some(&conjs[i]) };
                zr.push(z_bound(ops, &ings, m, i, conj)?);
                wr.push(w_bound(p, ops, &ings, m, i, conj, r_star[i])?);
            }
            Ok((zr, wr))
        })
        .collect::<Result<Vec<_>>>()?;
    let (z, w) = rows.into_iter().unzip();
    Ok(BoundsSet {
        y: yout.y,
        z,
        w,
        r_star: r_star.to_vec(),
        k_used: yout.k_used,
        nbar: ings.first().map(|i| i.nbar).unwrap_or(0),
        eps_in: yout.eps_in,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::build_linear_op;
    use crate::problem::{self, Poly};
    use crate::seq::TailBoundedSeq;
    use crate::solver::{integrate_numeric, kernel_averages};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(x: f64) -> Interval {
        Interval::point(x)
    }

    /// Linearizations straight from the averaged kernels of a solution.
    fn ops_for(
        p: &PdeProblem,
        sol: &ApproxSolution,
        nu: Interval,
        n_l: i64,
    ) -> Vec<DomainLinOp> {
        let avg = kernel_averages(p, sol, nu);
        sol.pieces
            .iter()
            .enumerate()
            .map(|(m, piece)| {
                let len = if piece.t_hi.is_finite() {
                    Interval::point(piece.t_hi) - Interval::point(piece.t_lo)
                } else {
                    Interval::point(f64::INFINITY)
                };
                build_linear_op(&avg.v[m], p.j, p.sym, n_l, len, m).unwrap()
            })
            .collect()
    }

    fn zero_data(p: &PdeProblem, nu: Interval, n: i64) -> InitialData {
        InitialData::exact(FourierSeq::zeros(p.sym, n, nu))
    }

    #[test]
    fn ingredients_zero_solution_swift_hohenberg() {
        let nu = iv(1.0);
        let p = problem::swift_hohenberg(iv(2.0), ONE).unwrap();
        let u0 = zero_data(&p, nu, 4);
        let sol = integrate_numeric(&p, &u0, &[0.0, 0.2, 0.4], 6, &[2, 2]).unwrap();
        let ops = ops_for(&p, &sol, nu, 4);
        let ings = build_ingredients(&p, &sol, &ops).unwrap();
        assert_eq!(ings.len(), 2);
        for ing in &ings {
            assert_eq!(ing.nbar, 0);
            assert!(ing.u_norm.hi <= 1e-13);
            for b in &ing.beta_norms {
                assert!(b.hi <= 1e-12, "beta should vanish on the zero solution");
            }
            // Constant kernels matching the averages: the Γ majorant is
            // numerically zero everywhere.
            let dim = ing.gamma.block.rows;
            let mut worst = 0.0f64;
            for r in 0..dim {
                for c in 0..dim {
                    worst = worst.max(ing.gamma.block[(r, c)].abs().hi);
                }
            }
            assert!(worst <= 1e-10, "gamma block should vanish, got {worst}");
        }
    }

    #[test]
    fn z_and_w_vanish_for_exact_linear_problem() {
        // u_t = u_xx - u with the exact kernel average fed to L: the
        // linearization is exact, so both contraction bounds collapse.
        let nu = iv(1.2);
        let p = PdeProblem::new(
            1,
            vec![Poly::new(vec![ZERO, iv(-1.0)]), Poly::zero()],
            Symmetry::Even,
        )
        .unwrap();
        let u0 = zero_data(&p, nu, 3);
        let sol = integrate_numeric(&p, &u0, &[0.0, 1.0], 3, &[1]).unwrap();
        let ops = ops_for(&p, &sol, nu, 3);
        let ings = build_ingredients(&p, &sol, &ops).unwrap();
        let z = z_bound(&ops, &ings, 0, 0, None).unwrap();
        assert!(z.hi <= 1e-10, "z = {z:?}");
        let w = w_bound(&p, &ops, &ings, 0, 0, None, iv(0.5)).unwrap();
        assert_eq!(w.hi, 0.0, "no quadratic terms, W must be exactly zero");
    }

    #[test]
    fn z_tail_formula_for_delta_kernel() {
        // u_t = u_xx + c·u but with the zero kernel handed to the
        // linearization: the whole Jacobian lands in β = c·δ and Γ = c·Id.
        let nu = iv(1.0);
        let c = 0.4;
        let p = PdeProblem::new(
            1,
            vec![Poly::new(vec![ZERO, iv(c)]), Poly::zero()],
            Symmetry::Even,
        )
        .unwrap();
        let u0 = zero_data(&p, nu, 3);
        let sol = integrate_numeric(&p, &u0, &[0.0, 0.7], 3, &[1]).unwrap();
        let n_l = 3;
        let zero_kers =
            vec![FourierSeq::zeros(Symmetry::Even, 3, nu), FourierSeq::zeros(Symmetry::Even, 3, nu)];
        let op =
            build_linear_op(&zero_kers, p.j, p.sym, n_l, iv(0.7), 0).unwrap();
        let ops = vec![op];
        let ings = build_ingredients(&p, &sol, &ops).unwrap();
        assert_eq!(ings[0].nbar, 0);
        assert!((ings[0].beta_norms[0] - iv(c)).abs().hi < 1e-14);
        // Γ is the |c|·identity on every stored mode.
        let g = &ings[0].gamma;
        for n in 0..=g.n_blk {
            let d = g.block[(n as usize, n as usize)].re;
            assert!((d - iv(c)).abs().hi < 1e-13, "diag at {n}: {d:?}");
        }
        // Tail term is exactly c·χ⁰ and the bound is the stated maximum.
        let tail = z_tail_term(&ops, &ings, 0, 0);
        let chi0 = chi_bound(&ops[0], 0).unwrap();
        assert!((tail - iv(c) * chi0).abs().hi < 1e-13);
        let fin = b_gamma_norm(&ops, &ings, 0, 0, None).unwrap();
        let z = z_bound(&ops, &ings, 0, 0, None).unwrap();
        assert_eq!(z.hi, fin.max_iv(tail).hi);
        assert_eq!(z.lo, fin.max_iv(tail).lo);
        // For the heat semigroup the block term dominates: b̃ decreasing.
        assert!(z.hi > tail.hi);
    }

    #[test]
    fn gamma_majorizes_jacobian_samples() {
        // Random cubic-nonlinearity state: the Γ entries must dominate the
        // eigen-frame Jacobian columns at sampled times and directions.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let nu = iv(1.1);
        let p = problem::swift_hohenberg(iv(1.5), ONE).unwrap();
        let n_u = 4usize;
        let kk = 3usize;
        let slots = mode_slots(p.sym, n_u);
        let cheb: Vec<Vec<num_complex::Complex64>> = (0..=kk)
            .map(|_| {
                slots
                    .iter()
                    .map(|_| num_complex::Complex64::new(rng.gen_range(-0.3..0.3), 0.0))
                    .collect()
            })
            .collect();
        let piece = Piece { t_lo: 0.0, t_hi: 0.4, sym: p.sym, n_max: n_u, cheb };
        let uts = piece.to_time_seq(nu);
        let kers = kernel_averages(
            &p,
            &ApproxSolution { pieces: vec![piece.clone()], defects: vec![0.0] },
            nu,
        );
        let n_l = 3;
        let op = build_linear_op(&kers.v[0], p.j, p.sym, n_l, iv(0.4), 0).unwrap();
        let nbar = 2 * n_u as i64; // cubic: kernel support 2·N_u
        let gamma = gamma_op(&p, &op, &uts, nbar).unwrap();
        let big = gamma.n_blk;
        let ncol = nbar + n_l;
        for _ in 0..50 {
            let t = iv(rng.gen_range(0.0..0.4));
            let u_t = uts.eval(t).unwrap();
            // Random direction supported on the stored columns.
            let mut h = FourierSeq::zeros(p.sym, ncol, nu);
            for n in 0..=ncol {
                h.set(n, CInterval::point(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .unwrap();
            }
            // Dγ(ū(t)) h = DF(ū(t)) h − L h, eigen frame on the block.
            let mut dfh = h.derivative(2 * p.j, false);
            if p.j % 2 == 0 {
                dfh = dfh.neg();
            }
            for (j, g) in p.gs.iter().enumerate() {
                if g.is_zero() {
                    continue;
                }
                let ker = crate::seq::apply_poly(&g.derivative().coeffs, &u_t);
                dfh = dfh.add(&ker.conv(&h).unwrap().derivative(j as u32, false));
            }
            let dgh = dfh.sub(&l_apply(&op, &h.padded(op.n_l)));
            let eig = op.qinv.mul_vec(&block_vec(&op, &dgh));
            // Γ · |h| in storage coordinates.
            let habs: Vec<Interval> = (0..=big)
                .map(|n| h.get(n).abs())
                .collect();
            let bound_at = |row: usize| -> Interval {
                let mut acc = ZERO;
                for (ci, ha) in habs.iter().enumerate() {
                    acc = acc + gamma.block[(row, ci)].re * *ha;
                }
                acc
            };
            for (s, &rm) in op.slots().iter().enumerate() {
                let lhs = eig[s].abs();
                let rhs = bound_at(seq_index(p.sym, big, rm));
                assert!(
                    lhs.lo <= rhs.hi + 1e-12,
                    "block row {rm}: {lhs:?} vs {rhs:?}"
                );
            }
            for &r in &tail_modes(p.sym, n_l, big) {
                let lhs = dgh.get(r).abs();
                let rhs = bound_at(seq_index(p.sym, big, r));
                assert!(lhs.lo <= rhs.hi + 1e-12, "tail row {r}: {lhs:?} vs {rhs:?}");
            }
        }
    }

    #[test]
    fn y_vanishes_on_exact_zero_solution() {
        let nu = iv(1.0);
        let p = problem::swift_hohenberg(iv(2.0), ONE).unwrap();
        let u0 = zero_data(&p, nu, 4);
        let sol = integrate_numeric(&p, &u0, &[0.0, 0.2, 0.4], 6, &[2, 2]).unwrap();
        let ops = ops_for(&p, &sol, nu, 4);
        let out = y_bounds(&p, &sol, &ops, &u0, &[4, 4], 64).unwrap();
        assert_eq!(out.eps_in.hi, 0.0);
        for y in &out.y {
            assert!(y.hi <= 1e-12, "y = {y:?}");
        }
        assert!(out.theta_end.norm().hi <= 1e-12);
    }

    /// Float Chebyshev interpolation coefficients of f on [lo, hi].
    fn float_fit(f: impl Fn(f64) -> f64, lo: f64, hi: f64, k: usize) -> Vec<f64> {
        let nodes: Vec<f64> = (0..=k)
            .map(|j| {
                let s = -(std::f64::consts::PI * j as f64 / k as f64).cos();
                0.5 * (lo + hi) + 0.5 * (hi - lo) * s
            })
            .collect();
        (0..=k)
            .map(|m| {
                let mut acc = 0.0;
                for (j, t) in nodes.iter().enumerate() {
                    let s = -(std::f64::consts::PI * j as f64 / k as f64).cos();
                    let tk = (m as f64 * s.acos()).cos();
                    let w = if j == 0 || j == k { 0.5 } else { 1.0 };
                    acc += w * f(*t) * tk;
                }
                let norm = if m == 0 || m == k { 1.0 } else { 2.0 };
                norm * acc / k as f64
            })
            .collect()
    }

    /// The heat equation with a degree-8 polynomial stand-in for e^{-t}:
    /// the defect bound must enclose the true fit error sharply.
    #[test]
    fn y_heat_fit_matches_dense_oracle() {
        let nu = iv(1.0);
        let p = problem::linear_heat();
        let kk = 8usize;
        let fit = float_fit(|t| (-t).exp(), 0.0, 1.0, kk);
        let cheb: Vec<Vec<num_complex::Complex64>> = fit
            .iter()
            .map(|&c| vec![num_complex::Complex64::new(0.0, 0.0), num_complex::Complex64::new(0.5 * c, 0.0)])
            .collect();
        let piece = Piece { t_lo: 0.0, t_hi: 1.0, sym: Symmetry::Even, n_max: 1, cheb };
        let sol = ApproxSolution { pieces: vec![piece], defects: vec![0.0] };
        let ops = ops_for(&p, &sol, nu, 1);
        let u0 = InitialData::exact(FourierSeq::from_cos_coeffs(nu, &[ZERO, ONE]));
        let out = y_bounds(&p, &sol, &ops, &u0, &[12], 64).unwrap();
        let y = out.y[0];
        // Dense float oracle: sup over t of |e^{-t} - fit(t)| (the ν = 1
        // norm of the defect, both ±1 modes weighted by a_1 = 1/2 each).
        let eval_fit = |t: f64| -> f64 {
            let s = 2.0 * t - 1.0;
            let mut b1 = 0.0;
            let mut b2 = 0.0;
            for &c in fit.iter().skip(1).rev() {
                let b = c + 2.0 * s * b1 - b2;
                b2 = b1;
                b1 = b;
            }
            fit[0] + s * b1 - b2
        };
        let mut true_sup = 0.0f64;
        for i in 0..=20_000 {
            let t = i as f64 / 20_000.0;
            true_sup = true_sup.max(((-t).exp() - eval_fit(t)).abs());
        }
        assert!(y.hi >= true_sup - 1e-15, "bound must dominate the truth");
        assert!(y.hi <= 10.0 * true_sup + 1e-12, "bound within 10x of truth");
        assert!((y.hi - true_sup).abs() <= 1e-8);
        // The interface state reproduces e^{-1} on the first mode.
        let end = out.theta_end.cos_coeff(1).re;
        assert!(end.contains((-1.0f64).exp()) || (end.midpoint() - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn y_does_not_grow_with_interpolation_degree() {
        let nu = iv(1.0);
        let p = problem::linear_heat();
        let kk = 8usize;
        let fit = float_fit(|t| (-t).exp(), 0.0, 1.0, kk);
        let cheb: Vec<Vec<num_complex::Complex64>> = fit
            .iter()
            .map(|&c| vec![num_complex::Complex64::new(0.0, 0.0), num_complex::Complex64::new(0.5 * c, 0.0)])
            .collect();
        let piece = Piece { t_lo: 0.0, t_hi: 1.0, sym: Symmetry::Even, n_max: 1, cheb };
        let sol = ApproxSolution { pieces: vec![piece], defects: vec![0.0] };
        let ops = ops_for(&p, &sol, nu, 1);
        let u0 = InitialData::exact(FourierSeq::from_cos_coeffs(nu, &[ZERO, ONE]));
        let y12 = y_bounds(&p, &sol, &ops, &u0, &[12], 64).unwrap().y[0];
        let y24 = y_bounds(&p, &sol, &ops, &u0, &[24], 64).unwrap().y[0];
        assert!(y24.hi <= y12.hi * (1.0 + 1e-6) + 1e-12);
    }

    #[test]
    fn w_formula_for_cubic_and_advective_terms() {
        let nu = iv(1.0);
        // Pure cubic at j = 0 on the heat semigroup: |g''|(ρ) = 6ρ, block
        // smoothing weight is b̃₀ = δ = 1 at the zero eigenvalue.
        let p = PdeProblem::new(
            1,
            vec![Poly::new(vec![ZERO, ZERO, ZERO, iv(1.0)]), Poly::zero()],
            Symmetry::Even,
        )
        .unwrap();
        let u0 = zero_data(&p, nu, 3);
        let sol = integrate_numeric(&p, &u0, &[0.0, 1.0], 3, &[1]).unwrap();
        let ops = ops_for(&p, &sol, nu, 3);
        let ings = build_ingredients(&p, &sol, &ops).unwrap();
        let r = iv(0.25);
        let w = w_bound(&p, &ops, &ings, 0, 0, None, r).unwrap();
        assert!((w - iv(6.0) * r).abs().hi < 1e-10, "w = {w:?}");
        // Quadratic under one derivative (the KS shape): |g''| = 1, so W is
        // independent of the radius and equals ‖B|D|‖.
        let pk = PdeProblem::new(
            2,
            vec![
                Poly::zero(),
                Poly::new(vec![ZERO, ZERO, ONE.scale2(-1)]),
                Poly::zero(),
                Poly::zero(),
            ],
            Symmetry::Odd,
        )
        .unwrap();
        let u0k = zero_data(&pk, nu, 3);
        let solk = integrate_numeric(&pk, &u0k, &[0.0, 1.0], 3, &[1]).unwrap();
        let opsk = ops_for(&pk, &solk, nu, 3);
        let ingsk = build_ingredients(&pk, &solk, &opsk).unwrap();
        let w1 = w_bound(&pk, &opsk, &ingsk, 0, 0, None, iv(1.0)).unwrap();
        let w2 = w_bound(&pk, &opsk, &ingsk, 0, 0, None, iv(2.0)).unwrap();
        assert_eq!(w1.hi, w2.hi, "KS-type W must not depend on the radius");
        // ‖B|D|‖ = max_n n·b̃_n with b̃_n = (1-e^{-n⁴})/n⁴ at ν = 1: n = 1.
        let expect = (1.0 - (-1.0f64).exp()).abs();
        assert!((w1.hi - expect).abs() < 1e-10, "w = {w1:?}");
    }

    #[test]
    fn infinite_step_linear_stable_formulas() {
        let nu = iv(1.0);
        // u_t = u_xx - u/2: exact kernels, stable everywhere.
        let p = PdeProblem::new(
            1,
            vec![Poly::new(vec![ZERO, iv(-0.5)]), Poly::zero()],
            Symmetry::Even,
        )
        .unwrap();
        let n_l = 3;
        let mut ker = FourierSeq::zeros(Symmetry::Even, 2, nu);
        ker.set(0, CInterval::real(iv(-0.5))).unwrap();
        let kers = vec![ker, FourierSeq::zeros(Symmetry::Even, 2, nu)];
        let op = build_linear_op(&kers, p.j, p.sym, n_l, Interval::point(f64::INFINITY), 0)
            .unwrap();
        let ubar = FourierSeq::zeros(Symmetry::Even, 3, nu);
        let mut u_in = FourierSeq::zeros(Symmetry::Even, 3, nu);
        u_in.set(0, CInterval::real(iv(0.3))).unwrap();
        u_in.set(2, CInterval::real(iv(-0.1))).unwrap();
        let (y, z, w) = infinite_bounds(&p, &op, &ubar, &u_in, iv(0.5)).unwrap();
        // γ(0) = 0, Q = Id: Y∞ = ‖u_in‖; β = 0 and Γ = 0 give Z∞ = 0.
        assert!((y - u_in.norm()).abs().hi < 1e-12, "y = {y:?}");
        assert!(z.hi <= 1e-12, "z = {z:?}");
        assert_eq!(w.hi, 0.0);
    }

    #[test]
    fn infinite_step_exact_fixed_point() {
        let nu = iv(1.0);
        // u_t = u_xx + 1/2 - u: fixed point ū ≡ 1/2, exactly representable.
        let p = PdeProblem::new(
            1,
            vec![Poly::new(vec![iv(0.5), iv(-1.0)]), Poly::zero()],
            Symmetry::Even,
        )
        .unwrap();
        let n_l = 2;
        let mut ker = FourierSeq::zeros(Symmetry::Even, 2, nu);
        ker.set(0, CInterval::real(iv(-1.0))).unwrap();
        let kers = vec![ker, FourierSeq::zeros(Symmetry::Even, 2, nu)];
        let op = build_linear_op(&kers, p.j, p.sym, n_l, Interval::point(f64::INFINITY), 0)
            .unwrap();
        let mut ubar = FourierSeq::zeros(Symmetry::Even, 2, nu);
        ubar.set(0, CInterval::real(iv(0.5))).unwrap();
        assert!(p.rhs_f(&ubar).norm().hi < 1e-15, "exact fixed point");
        let (y, z, w) = infinite_bounds(&p, &op, &ubar, &ubar, iv(0.25)).unwrap();
        assert!(y.hi <= 1e-12, "y = {y:?}");
        assert!(z.hi <= 1e-12, "z = {z:?}");
        assert_eq!(w.hi, 0.0);
    }

    #[test]
    fn infinite_step_rejects_unstable_operator() {
        let nu = iv(1.0);
        let p = problem::linear_heat();
        let kers =
            vec![FourierSeq::zeros(Symmetry::Even, 2, nu), FourierSeq::zeros(Symmetry::Even, 2, nu)];
        // λ₀ = 0 is not strictly negative: must be refused.
        let op = build_linear_op(&kers, p.j, p.sym, 2, Interval::point(f64::INFINITY), 0)
            .unwrap();
        let ubar = FourierSeq::zeros(Symmetry::Even, 2, nu);
        let err = infinite_bounds(&p, &op, &ubar, &ubar, iv(0.1)).unwrap_err();
        assert!(matches!(err, Error::Stability(_)), "got {err:?}");
    }

    #[test]
    fn compute_bounds_smoke_on_contractive_run() {
        let nu = iv(1.05);
        let p = problem::swift_hohenberg(iv(0.5), ONE).unwrap();
        let mut f = FourierSeq::zeros(Symmetry::Even, 6, nu);
        f.set(1, CInterval::real(iv(0.05))).unwrap();
        f.set(2, CInterval::real(iv(0.02))).unwrap();
        let u0 = InitialData { data: TailBoundedSeq::new(f, iv(1e-9), 6).unwrap() };
        let sol = integrate_numeric(&p, &u0, &[0.0, 0.15, 0.3], 8, &[6, 6]).unwrap();
        let ops = ops_for(&p, &sol, nu, 6);
        let r_star = vec![iv(0.1); 2];
        let bs = compute_bounds(&p, &sol, &ops, &u0, &[8, 8], 64, &r_star).unwrap();
        assert_eq!(bs.y.len(), 2);
        assert_eq!(bs.z[1].len(), 2);
        assert!(bs.eps_in.hi > 0.0 && bs.eps_in.hi < 1e-8);
        for m in 0..2 {
            assert!(bs.y[m].hi.is_finite() && bs.y[m].lo >= 0.0);
            assert!(bs.y[m].hi < 1e-3, "y[{m}] = {:?}", bs.y[m]);
            for i in 0..=m {
                assert!(bs.z[m][i].hi.is_finite() && bs.z[m][i].lo >= 0.0);
                assert!(bs.w[m][i].hi.is_finite());
            }
            assert!(bs.z[m][m].hi < 1.0, "z[{m}][{m}] = {:?}", bs.z[m][m]);
        }
    }

    #[test]
    fn single_domain_bounds_match_slice_of_chain() {
        // The m = 1 bounds of a chain must agree with the standalone bounds
        // of its first subdomain.
        let nu = iv(1.0);
        let p = problem::swift_hohenberg(iv(1.0), ONE).unwrap();
        let mut f = FourierSeq::zeros(Symmetry::Even, 5, nu);
        f.set(1, CInterval::real(iv(0.08))).unwrap();
        let u0 = InitialData::exact(f);
        let sol = integrate_numeric(&p, &u0, &[0.0, 0.1, 0.2], 6, &[2, 2]).unwrap();
        let ops = ops_for(&p, &sol, nu, 5);
        let ings = build_ingredients(&p, &sol, &ops).unwrap();
        let sol1 = ApproxSolution {
            pieces: vec![sol.pieces[0].clone()],
            defects: vec![sol.defects[0]],
        };
        let ops1 = ops_for(&p, &sol1, nu, 5);
        let ings1 = build_ingredients(&p, &sol1, &ops1).unwrap();
        let za = z_bound(&ops, &ings, 0, 0, None).unwrap();
        let zb = z_bound(&ops1, &ings1, 0, 0, None).unwrap();
        assert_eq!(za.hi, zb.hi);
        assert_eq!(
            linop::mu_bound(&ops, 0, 0, ops[0].n_l).hi,
            1.0,
            "μ^(m,m) is one by convention"
        );
    }
}
