//! Problem definitions: the PDE family ∂_t u = (-1)^{J+1} ∂^{2J}_x u +
//! Σ_{j<2J} ∂^j_x g^{(j)}(u) on the 2π-torus, initial data with certified
//! tails, and the named example problems.
//!
//! Physical problems on other periods (or with Neumann conditions, via even
//! extension on the doubled domain) are rescaled to this normal form once,
//! exactly, at construction time: the spatial factor is folded into the
//! g^{(j)} coefficients and a time rescale restores the unit leading
//! coefficient. The stored scale factors map user times and lengths to
//! internal ones; sup-norm error bounds are invariant under both rescales.

use crate::interval::{Interval, ONE, ZERO};
use crate::seq::{abs_poly_eval, apply_poly, FourierSeq, Symmetry, TailBoundedSeq};
use crate::{Error, Result};

/// Real-coefficient polynomial Σ_k c_k x^k with interval coefficients,
/// ascending degree.
#[derive(Clone, Debug, Default)]
pub struct Poly {
    pub coeffs: Vec<Interval>,
}

impl Poly {
    pub fn new(coeffs: Vec<Interval>) -> Poly {
        let mut p = Poly { coeffs };
        while p.coeffs.last() == Some(&ZERO) {
            p.coeffs.pop();
        }
        p
    }

    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn from_f64(coeffs: &[f64]) -> Poly {
        Poly::new(coeffs.iter().map(|&c| Interval::point(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the convention that the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: Interval) -> Interval {
        let mut acc = ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i + 1) as f64)
                .collect(),
        )
    }

    /// The companion polynomial |c_k| x^k evaluated at x ≥ 0, an upper bound
    /// for |p| on the disk of radius x.
    pub fn abs_eval(&self, x: Interval) -> Interval {
        abs_poly_eval(&self.coeffs, x)
    }

    /// g(u) as a Fourier sequence, by convolution powers.
    pub fn apply(&self, u: &FourierSeq) -> FourierSeq {
        apply_poly(&self.coeffs, u)
    }
}

/// A parabolic problem in internal (2π-periodic, unit leading coefficient)
/// form.
#[derive(Clone, Debug)]
pub struct PdeProblem {
    /// Half-order J ≥ 1; the leading term is (-1)^{J+1} ∂^{2J}.
    pub j: u32,
    /// g^{(0)}, ..., g^{(2J-1)}: the nonlinearity under ∂^j is g^{(j)}(u).
    pub gs: Vec<Poly>,
    pub sym: Symmetry,
    /// κ: internal coordinate = κ · physical coordinate.
    pub space_scale: Interval,
    /// s: internal time = s · physical time.
    pub time_scale: Interval,
    pub name: String,
}

impl PdeProblem {
    pub fn new(j: u32, gs: Vec<Poly>, sym: Symmetry) -> Result<Self> {
        Self::rescaled(j, gs, sym, ONE, ONE, "custom")
    }

    pub fn rescaled(
        j: u32,
        gs: Vec<Poly>,
        sym: Symmetry,
        space_scale: Interval,
        time_scale: Interval,
        name: &str,
    ) -> Result<Self> {
        if j == 0 {
            return Err(Error::Usage("order parameter J must be ≥ 1".into()));
        }
        if gs.len() != 2 * j as usize {
            return Err(Error::Usage(format!(
                "expected {} nonlinearities for J = {j}, got {}",
                2 * j,
                gs.len()
            )));
        }
        if space_scale.lo <= 0.0 || time_scale.lo <= 0.0 {
            return Err(Error::Usage("scale factors must be positive".into()));
        }
        let p = PdeProblem { j, gs, sym, space_scale, time_scale, name: name.to_string() };
        p.check_parity()?;
        Ok(p)
    }

    /// The symmetry subspace must be invariant under every term ∂^j g^{(j)}:
    /// on even data, any g preserves evenness but odd-many derivatives break
    /// it; on odd data, g^{(j)}(u) must be odd for even j (only odd-degree
    /// monomials) and even for odd j (only even-degree monomials).
    fn check_parity(&self) -> Result<()> {
        for (jj, g) in self.gs.iter().enumerate() {
            let bad = match self.sym {
                Symmetry::None => None,
                Symmetry::Even => {
                    if jj % 2 == 1 && !g.is_zero() {
                        Some("even problems need g^{(j)} = 0 for odd j")
                    } else {
                        None
                    }
                }
                Symmetry::Odd => {
                    let need_odd_monomials = jj % 2 == 0;
                    let violates = g.coeffs.iter().enumerate().any(|(k, &c)| {
                        let k_odd = k % 2 == 1;
                        c != ZERO && (k_odd != need_odd_monomials)
                    });
                    if violates {
                        Some(
                            "odd problems need odd-degree monomials under even derivatives \
                             and even-degree monomials under odd derivatives",
                        )
                    } else {
                        None
                    }
                }
            };
            if let Some(msg) = bad {
                return Err(Error::Usage(format!(
                    "nonlinearity g^{{({jj})}} breaks {} symmetry: {msg}",
                    self.sym.as_str()
                )));
            }
        }
        Ok(())
    }

    /// Right-hand side F(u) = (-1)^{J+1} D^{2J} u + Σ_j D^j g^{(j)}(u).
    pub fn rhs_f(&self, u: &FourierSeq) -> FourierSeq {
        let lead = u.derivative(2 * self.j, false);
        let mut acc = if self.j % 2 == 0 { lead.neg() } else { lead };
        for (jj, g) in self.gs.iter().enumerate() {
            if g.is_zero() {
                continue;
            }
            acc = acc.add(&g.apply(u).derivative(jj as u32, false));
        }
        acc
    }

    /// Convolution kernels (g^{(j)})'(u) of the Fréchet derivative
    /// DF(u)h = (-1)^{J+1} D^{2J} h + Σ_j D^j [(g^{(j)})'(u) ∗ h].
    pub fn jacobian_kernels(&self, u: &FourierSeq) -> Vec<FourierSeq> {
        self.gs.iter().map(|g| g.derivative().apply(u)).collect()
    }

    /// Internal time enclosure of a physical time.
    pub fn internal_time(&self, t_phys: f64) -> Interval {
        self.time_scale * Interval::point(t_phys)
    }

    /// Physical time enclosure of an internal time.
    pub fn physical_time(&self, t_internal: Interval) -> Interval {
        t_internal / self.time_scale
    }

    /// Largest polynomial degree among the nonlinearities (1 if all linear
    /// or zero).
    pub fn max_degree(&self) -> usize {
        self.gs.iter().map(|g| g.degree()).max().unwrap_or(1).max(1)
    }
}

/// Initial data: finitely many certified modes plus an ℓ¹_ν bound on the
/// discarded tail.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub data: TailBoundedSeq,
}

impl InitialData {
    pub fn exact(seq: FourierSeq) -> Self {
        InitialData { data: TailBoundedSeq::exact(seq) }
    }

    pub fn new(finite: FourierSeq, tail_norm: Interval, tail_start: i64) -> Result<Self> {
        Ok(InitialData { data: TailBoundedSeq::new(finite, tail_norm, tail_start)? })
    }

    pub fn check_compatible(&self, p: &PdeProblem) -> Result<()> {
        let s = self.data.finite.sym();
        if p.sym != Symmetry::None && s != p.sym {
            return Err(Error::Usage(format!(
                "initial data symmetry {} does not match problem symmetry {}",
                s.as_str(),
                p.sym.as_str()
            )));
        }
        Ok(())
    }
}

/// A named example problem with its reference initial data and horizon.
#[derive(Clone, Debug)]
pub struct Preset {
    pub problem: PdeProblem,
    pub init: InitialData,
    /// Physical end time of the reference finite-time result, if any.
    pub horizon: Option<f64>,
    /// Whether the reference result continues with an infinite final step.
    pub to_infinity: bool,
}

/// Swift–Hohenberg ∂_t u = -(∂² + 1)² u + α u - u³ on a torus of period
/// L = 2π·`ell_over_two_pi`. With κ = 1/`ell_over_two_pi` and c = κ², the
/// internal form has g^{(2)} = -(2/c) x, g^{(0)} = ((α-1)/c²) x - x³/c², and
/// time scale c².
pub fn swift_hohenberg(alpha: Interval, ell_over_two_pi: Interval) -> Result<PdeProblem> {
    let c_inv = ell_over_two_pi * ell_over_two_pi;
    let c_inv2 = c_inv * c_inv;
    let g2 = Poly::new(vec![ZERO, -c_inv.scale2(1)]);
    let g0 = Poly::new(vec![ZERO, (alpha - ONE) * c_inv2, ZERO, -c_inv2]);
    PdeProblem::rescaled(
        2,
        vec![g0, Poly::zero(), g2, Poly::zero()],
        Symmetry::Even,
        (ONE / ell_over_two_pi).pos(),
        (ONE / c_inv2).pos(),
        "swift-hohenberg",
    )
}

/// Ohta–Kawasaki ∂_t u = -γ^{-2} ∂⁴ u - ∂²(u - u³) - σ(u - m) with Neumann
/// conditions on [0, L], L = 2π·`ell_over_two_pi`, encoded by even extension
/// on the doubled domain: κ = 1/(2·`ell_over_two_pi`), c = κ², internal
/// g^{(2)} = -(γ²/c)(x - x³), g^{(0)} = -(σγ²/c²)(x - m), time scale c²/γ².
pub fn ohta_kawasaki(
    gamma_sq: Interval,
    sigma: Interval,
    m: Interval,
    ell_over_two_pi: Interval,
) -> Result<PdeProblem> {
    let c_inv = (ell_over_two_pi * ell_over_two_pi).scale2(2);
    let c_inv2 = c_inv * c_inv;
    let a2 = gamma_sq * c_inv;
    let g2 = Poly::new(vec![ZERO, -a2, ZERO, a2]);
    let a0 = sigma * gamma_sq * c_inv2;
    let g0 = Poly::new(vec![a0 * m, -a0]);
    PdeProblem::rescaled(
        2,
        vec![g0, Poly::zero(), g2, Poly::zero()],
        Symmetry::Even,
        (ONE / ell_over_two_pi).pos().scale2(-1),
        (ONE / (c_inv2 * gamma_sq)).pos(),
        "ohta-kawasaki",
    )
}

/// Kuramoto–Sivashinsky ∂_t u = -∂⁴ u - ∂² u - ½ ∂(u²) on the torus of
/// period 2π/√α: κ = √α, internal g^{(2)} = -x/α, g^{(1)} = -x²/(2α^{3/2}),
/// time scale α².
pub fn kuramoto_sivashinsky(alpha: Interval) -> Result<PdeProblem> {
    if alpha.lo <= 0.0 {
        return Err(Error::Usage("Kuramoto–Sivashinsky parameter must be positive".into()));
    }
    let root = alpha.sqrt()?;
    let g2 = Poly::new(vec![ZERO, -(ONE / alpha)]);
    let g1 = Poly::new(vec![ZERO, ZERO, -(ONE / (alpha * root)).scale2(-1)]);
    PdeProblem::rescaled(
        2,
        vec![Poly::zero(), g1, g2, Poly::zero()],
        Symmetry::Odd,
        root,
        alpha * alpha,
        "kuramoto-sivashinsky",
    )
}

/// ∂_t u = ∂² u on the 2π-torus, no nonlinearity; the validation baseline.
pub fn linear_heat() -> PdeProblem {
    PdeProblem::rescaled(1, vec![Poly::zero(), Poly::zero()], Symmetry::Even, ONE, ONE, "linear-heat")
        .expect("static problem definition")
}

/// Reference problems by name, with the reference initial data at weight ν.
pub fn preset(name: &str, nu: Interval) -> Result<Preset> {
    let dec = |s: &str| Interval::from_decimal(s).expect("static decimal literal");
    match name {
        "linear-heat" | "heat" => Ok(Preset {
            problem: linear_heat(),
            init: InitialData::exact(FourierSeq::from_cos_coeffs(nu, &[ZERO, ONE])),
            horizon: Some(1.0),
            to_infinity: false,
        }),
        "swift-hohenberg" | "sh" => Ok(Preset {
            problem: swift_hohenberg(Interval::point(5.0), Interval::point(3.0))?,
            init: InitialData::exact(FourierSeq::from_cos_coeffs(
                nu,
                &[ZERO, dec("0.4"), dec("-0.3")],
            )),
            horizon: Some(1.5),
            to_infinity: false,
        }),
        "ohta-kawasaki" | "ok" => Ok(Preset {
            problem: ohta_kawasaki(
                Interval::point(8.0),
                dec("0.2"),
                dec("0.1"),
                Interval::point(1.0),
            )?,
            init: InitialData::exact(FourierSeq::from_cos_coeffs(
                nu,
                &[dec("0.1"), ZERO, dec("0.2"), ZERO, dec("0.2")],
            )),
            horizon: Some(30.0),
            to_infinity: true,
        }),
        "kuramoto-sivashinsky" | "ks" => {
            let alpha = dec("0.127");
            let problem = kuramoto_sivashinsky(alpha)?;
            let amp = -alpha.sqrt()?.scale2(1);
            Ok(Preset {
                problem,
                init: InitialData::exact(FourierSeq::from_sin_coeffs(
                    nu,
                    &[amp, amp * dec("0.25")],
                )),
                horizon: Some(2.245 / 0.127),
                to_infinity: false,
            })
        }
        other => Err(Error::Usage(format!(
            "unknown preset '{other}' (expected linear-heat, swift-hohenberg, ohta-kawasaki, \
             or kuramoto-sivashinsky)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nu() -> Interval {
        Interval::point(1.05)
    }

    #[test]
    fn poly_basics() {
        let p = Poly::from_f64(&[1.0, 0.0, -2.0]); // 1 - 2x²
        assert_eq!(p.degree(), 2);
        assert!(p.eval(Interval::point(2.0)).contains(-7.0));
        let d = p.derivative();
        assert_eq!(d.degree(), 1);
        assert!(d.eval(Interval::point(3.0)).contains(-12.0));
        assert!(p.abs_eval(Interval::point(2.0)).contains(9.0));
        assert!(Poly::new(vec![ZERO, ZERO]).is_zero());
    }

    #[test]
    fn linear_heat_rhs_is_diagonal() {
        let p = linear_heat();
        let u = FourierSeq::from_cos_coeffs(nu(), &[ZERO, ONE, ZERO, Interval::point(0.5)]);
        let f = p.rhs_f(&u);
        assert_eq!(f.sym(), Symmetry::Even);
        assert!(f.cos_coeff(1).re.contains(-1.0) && f.cos_coeff(1).re.width() == 0.0);
        assert!(f.cos_coeff(3).re.contains(-4.5) && f.cos_coeff(3).re.width() == 0.0);
        assert!(f.cos_coeff(0).re == ZERO && f.cos_coeff(2).re == ZERO);
    }

    #[test]
    fn swift_hohenberg_coefficients_exact() {
        let p = swift_hohenberg(Interval::point(5.0), Interval::point(3.0)).unwrap();
        assert_eq!(p.j, 2);
        let g2 = &p.gs[2];
        assert!(g2.coeffs[1].contains(-18.0) && g2.coeffs[1].width() == 0.0);
        let g0 = &p.gs[0];
        assert!(g0.coeffs[1].contains(324.0) && g0.coeffs[1].width() == 0.0);
        assert!(g0.coeffs[3].contains(-81.0) && g0.coeffs[3].width() == 0.0);
        assert!(p.gs[1].is_zero() && p.gs[3].is_zero());
    }

    #[test]
    fn swift_hohenberg_cubic_oracle() {
        // F(cos x̃) = -D⁴u - 18 D²u + 324u - 81u³ with
        // cos³ = (3cos + cos3)/4: coefficient of cos is
        // -1 + 18 + 324 - 81·3/4 = 280.25, of cos(3x̃) is -81/4 = -20.25.
        let p = swift_hohenberg(Interval::point(5.0), Interval::point(3.0)).unwrap();
        let u = FourierSeq::from_cos_coeffs(nu(), &[ZERO, ONE]);
        let f = p.rhs_f(&u);
        assert_eq!(f.sym(), Symmetry::Even);
        assert!(f.cos_coeff(1).re.contains(280.25));
        assert!(f.cos_coeff(1).re.width() < 1e-12);
        assert!(f.cos_coeff(3).re.contains(-20.25));
        assert!(f.cos_coeff(0).re.contains(0.0) && f.cos_coeff(2).re.contains(0.0));
    }

    #[test]
    fn swift_hohenberg_symbol_matches_physical() {
        // Internal linearization at 0: λ_n = -n⁴ + 18n² + 324 must equal
        // 81·(-(1 - (n/3)²)² + 5), the physical symbol times the time scale.
        let p = swift_hohenberg(Interval::point(5.0), Interval::point(3.0)).unwrap();
        let zero_u = FourierSeq::zeros(Symmetry::Even, 0, nu());
        let ker = p.jacobian_kernels(&zero_u);
        for n in 0..=8i64 {
            let nf = n as f64;
            let d2 = -nf * nf; // (in)²
            let internal = Interval::point(-nf.powi(4))
                + ker[2].get(0).re * Interval::point(d2)
                + ker[0].get(0).re;
            let k = Interval::point(nf) / Interval::point(3.0);
            let w = ONE - k * k;
            let physical = (-(w * w) + Interval::point(5.0)) * Interval::point(81.0);
            assert!(
                internal.intersect(physical).is_some(),
                "n={n}: {internal:?} vs {physical:?}"
            );
        }
    }

    #[test]
    fn ohta_kawasaki_zero_mass_and_scales() {
        let pre = preset("ok", nu()).unwrap();
        let p = &pre.problem;
        // g⁰(m) = 0 for the mass value m = 0.1.
        let at_m = p.gs[0].eval(Interval::from_decimal("0.1").unwrap());
        assert!(at_m.contains(0.0) && at_m.width() < 1e-12);
        // t_internal = t/128 exactly.
        assert!(p.time_scale.contains(1.0 / 128.0) && p.time_scale.width() == 0.0);
        let t = p.internal_time(20.0);
        assert!(t.contains(0.15625) && t.width() == 0.0);
        // rhs at the constant-m state has vanishing mean mode.
        let u = FourierSeq::from_cos_coeffs(nu(), &[Interval::from_decimal("0.1").unwrap()]);
        let f = p.rhs_f(&u);
        assert!(f.get(0).re.contains(0.0) && f.get(0).re.width() < 1e-12);
        // g² = -32(x - x³).
        assert!(p.gs[2].coeffs[1].contains(-32.0) && p.gs[2].coeffs[1].width() == 0.0);
        assert!(p.gs[2].coeffs[3].contains(32.0));
    }

    #[test]
    fn kuramoto_sivashinsky_shape() {
        let pre = preset("ks", nu()).unwrap();
        let p = &pre.problem;
        assert_eq!((p.j, p.sym), (2, Symmetry::Odd));
        assert!(p.gs[2].coeffs[1].contains(-1.0 / 0.127));
        // -1/(2·0.127^{1.5})
        let expect = -1.0 / (2.0 * 0.127f64.powf(1.5));
        assert!((p.gs[1].coeffs[2].midpoint() - expect).abs() < 1e-12);
        assert!(p.gs[0].is_zero() && p.gs[3].is_zero());
        // Horizon 2.245/α maps to internal α²·2.245/α = 0.285115.
        let hz = p.internal_time(pre.horizon.unwrap());
        assert!((hz.midpoint() - 0.285115).abs() < 1e-9);
        // Parity: the rhs of odd data stays odd.
        let f = p.rhs_f(&pre.init.data.finite);
        assert_eq!(f.sym(), Symmetry::Odd);
    }

    #[test]
    fn parity_validation_rejects_mismatches() {
        // Even symmetry with a nonzero g^{(1)}.
        let bad = PdeProblem::rescaled(
            1,
            vec![Poly::zero(), Poly::from_f64(&[0.0, 1.0])],
            Symmetry::Even,
            ONE,
            ONE,
            "bad",
        );
        assert!(bad.is_err());
        // Odd symmetry with an even-degree monomial under an even derivative.
        let bad = PdeProblem::rescaled(
            1,
            vec![Poly::from_f64(&[0.0, 0.0, 1.0]), Poly::zero()],
            Symmetry::Odd,
            ONE,
            ONE,
            "bad",
        );
        assert!(bad.is_err());
        // The Kuramoto–Sivashinsky shape is fine.
        let ok = PdeProblem::rescaled(
            2,
            vec![
                Poly::zero(),
                Poly::from_f64(&[0.0, 0.0, -1.0]),
                Poly::from_f64(&[0.0, -2.0]),
                Poly::zero(),
            ],
            Symmetry::Odd,
            ONE,
            ONE,
            "ks-shape",
        );
        assert!(ok.is_ok());
        // Swapping the two nonlinearities breaks both parity rules.
        let swapped = PdeProblem::rescaled(
            2,
            vec![
                Poly::zero(),
                Poly::from_f64(&[0.0, -2.0]),
                Poly::from_f64(&[0.0, 0.0, -1.0]),
                Poly::zero(),
            ],
            Symmetry::Odd,
            ONE,
            ONE,
            "swapped",
        );
        assert!(swapped.is_err());
    }

    #[test]
    fn cubic_jacobian_kernel() {
        // g(x) = x³ at u = cos x: kernel 3u² = 1.5 + 1.5cos(2x).
        let p = PdeProblem::new(
            1,
            vec![Poly::from_f64(&[0.0, 0.0, 0.0, 1.0]), Poly::zero()],
            Symmetry::Even,
        )
        .unwrap();
        let u = FourierSeq::from_cos_coeffs(nu(), &[ZERO, ONE]);
        let ker = &p.jacobian_kernels(&u)[0];
        assert!(ker.cos_coeff(0).re.contains(1.5));
        assert!(ker.cos_coeff(2).re.contains(1.5));
        assert!(ker.cos_coeff(1).re.contains(0.0) && ker.cos_coeff(1).re.width() < 1e-14);
    }

    #[test]
    fn rhs_preserves_symmetry_on_all_presets() {
        for name in ["heat", "sh", "ok", "ks"] {
            let pre = preset(name, nu()).unwrap();
            pre.init.check_compatible(&pre.problem).unwrap();
            let f = pre.problem.rhs_f(&pre.init.data.finite);
            assert_eq!(f.sym(), pre.problem.sym, "preset {name}");
        }
        assert!(preset("unknown", nu()).is_err());
    }
}
