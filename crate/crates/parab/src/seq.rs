//! The ℓ¹_ν space of Fourier coefficient sequences: weighted norms, rigorous
//! convolution, polynomial application, projections, derivative weights, and
//! weighted operator norms for block-plus-diagonal-tail operators.
//!
//! A sequence a = (a_n)_{n ∈ ℤ} represents u(x) = Σ a_n e^{inx} on the 2π
//! torus; ‖a‖ = Σ |a_n| ν^{|n|} with ν ≥ 1. Even (cosine) and odd (sine)
//! subspaces are stored one-sided, with the reflected entries materialized on
//! access.

use crate::interval::{CInterval, Interval, C_ZERO, ONE, ZERO};
use crate::mat::CMat;
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Symmetry {
    /// No symmetry: two-sided storage.
    None,
    /// a_{-n} = a_n (cosine series).
    Even,
    /// a_{-n} = -a_n, a_0 = 0 (sine series).
    Odd,
}

impl Symmetry {
    pub fn as_str(self) -> &'static str {
        match self {
            Symmetry::None => "none",
            Symmetry::Even => "even",
            Symmetry::Odd => "odd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Symmetry::None),
            "even" => Ok(Symmetry::Even),
            "odd" => Ok(Symmetry::Odd),
            _ => Err(Error::Format(format!("unknown symmetry {s:?} (expected none|even|odd)"))),
        }
    }

    /// Parity class of a product of two sequences.
    pub fn product(self, other: Self) -> Self {
        use Symmetry::*;
        match (self, other) {
            (Even, Even) | (Odd, Odd) => Even,
            (Even, Odd) | (Odd, Even) => Odd,
            _ => None,
        }
    }

    /// Parity class after one spatial derivative.
    pub fn flipped(self) -> Self {
        match self {
            Symmetry::Even => Symmetry::Odd,
            Symmetry::Odd => Symmetry::Even,
            Symmetry::None => Symmetry::None,
        }
    }
}

/// Finitely supported element of ℓ¹_ν.
#[derive(Clone, Debug)]
pub struct FourierSeq {
    nu: Interval,
    sym: Symmetry,
    n_max: i64,
    /// Even/Odd: entries n = 0..=n_max. None: entries n = -n_max..=n_max,
    /// stored at offset n + n_max.
    data: Vec<CInterval>,
}

impl FourierSeq {
    pub fn zeros(sym: Symmetry, n_max: i64, nu: Interval) -> Self {
        assert!(n_max >= 0);
        assert!(nu.lo >= 1.0, "decay weight must satisfy ν ≥ 1");
        let len = match sym {
            Symmetry::None => 2 * n_max as usize + 1,
            _ => n_max as usize + 1,
        };
        FourierSeq { nu, sym, n_max, data: vec![C_ZERO; len] }
    }

    /// The delta sequence a_0 = 1 (multiplicative unit of convolution).
    pub fn delta(nu: Interval) -> Self {
        let mut s = Self::zeros(Symmetry::Even, 0, nu);
        s.data[0] = CInterval::point(1.0, 0.0);
        s
    }

    /// Build an even sequence from cosine coefficients â_0, â_1, ... of
    /// u = â_0 + Σ â_n cos(nx): a_0 = â_0, a_n = â_n/2.
    pub fn from_cos_coeffs(nu: Interval, hats: &[Interval]) -> Self {
        let n_max = hats.len().saturating_sub(1) as i64;
        let mut s = Self::zeros(Symmetry::Even, n_max, nu);
        for (n, &h) in hats.iter().enumerate() {
            let a = if n == 0 { h } else { h.scale2(-1) };
            s.data[n] = CInterval::real(a);
        }
        s
    }

    /// Build an odd sequence from sine coefficients b̂_1, b̂_2, ... of
    /// u = Σ b̂_n sin(nx): a_n = -i b̂_n / 2.
    pub fn from_sin_coeffs(nu: Interval, hats: &[Interval]) -> Self {
        let n_max = hats.len() as i64;
        let mut s = Self::zeros(Symmetry::Odd, n_max, nu);
        for (k, &h) in hats.iter().enumerate() {
            s.data[k + 1] = CInterval::new(ZERO, -h.scale2(-1));
        }
        s
    }

    pub fn from_raw(sym: Symmetry, n_max: i64, nu: Interval, data: Vec<CInterval>) -> Result<Self> {
        let want = match sym {
            Symmetry::None => 2 * n_max as usize + 1,
            _ => n_max as usize + 1,
        };
        if data.len() != want {
            return Err(Error::Format(format!(
                "coefficient payload length {} does not match n_max={n_max} with {} symmetry",
                data.len(),
                sym.as_str()
            )));
        }
        if sym == Symmetry::Odd && data[0] != C_ZERO {
            return Err(Error::Format("odd sequence with nonzero a_0".into()));
        }
        if nu.lo < 1.0 {
            return Err(Error::Format(format!("decay weight ν = {nu:?} below 1")));
        }
        Ok(FourierSeq { nu, sym, n_max, data })
    }

    #[inline]
    pub fn nu(&self) -> Interval {
        self.nu
    }

    #[inline]
    pub fn sym(&self) -> Symmetry {
        self.sym
    }

    #[inline]
    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    /// Raw storage in the layout documented on the type.
    pub fn raw_data(&self) -> &[CInterval] {
        &self.data
    }

    /// Coefficient a_n, reflecting across 0 for symmetric storage; zero
    /// outside the support.
    pub fn get(&self, n: i64) -> CInterval {
        if n.abs() > self.n_max {
            return C_ZERO;
        }
        match self.sym {
            Symmetry::None => self.data[(n + self.n_max) as usize],
            Symmetry::Even => self.data[n.unsigned_abs() as usize],
            Symmetry::Odd => {
                let v = self.data[n.unsigned_abs() as usize];
                if n < 0 {
                    -v
                } else {
                    v
                }
            }
        }
    }

    pub fn set(&mut self, n: i64, v: CInterval) -> Result<()> {
        if n.abs() > self.n_max {
            return Err(Error::Usage(format!("index {n} outside support |n| ≤ {}", self.n_max)));
        }
        match self.sym {
            Symmetry::None => self.data[(n + self.n_max) as usize] = v,
            Symmetry::Even => {
                if n < 0 {
                    return Err(Error::Usage("set on even sequence requires n ≥ 0".into()));
                }
                self.data[n as usize] = v;
            }
            Symmetry::Odd => {
                if n < 1 {
                    if n == 0 && v == C_ZERO {
                        return Ok(());
                    }
                    return Err(Error::Usage("set on odd sequence requires n ≥ 1".into()));
                }
                self.data[n as usize] = v;
            }
        }
        Ok(())
    }

    /// Coefficient of cos(nx) in the function the sequence represents.
    pub fn cos_coeff(&self, n: i64) -> CInterval {
        assert!(n >= 0);
        if n == 0 {
            self.get(0)
        } else {
            self.get(n) + self.get(-n)
        }
    }

    /// Coefficient of sin(nx).
    pub fn sin_coeff(&self, n: i64) -> CInterval {
        assert!(n >= 1);
        (self.get(n) - self.get(-n)).mul_i()
    }

    /// Enclosure of ‖a‖ = Σ_n |a_n| ν^{|n|}.
    pub fn norm(&self) -> Interval {
        let mut total = ZERO;
        let mut w = ONE;
        for n in 0..=self.n_max {
            let here = if n == 0 {
                self.get(0).abs()
            } else {
                match self.sym {
                    Symmetry::None => self.get(n).abs() + self.get(-n).abs(),
                    // |a_n| + |a_{-n}| = 2|a_n| for both parities.
                    _ => self.get(n).abs().scale2(1),
                }
            };
            total = total + here * w;
            w = w * self.nu;
        }
        total
    }

    pub fn norm_hi(&self) -> f64 {
        self.norm().hi
    }

    /// Weighted norm of only the indices |n| > cut.
    pub fn tail_norm(&self, cut: i64) -> Interval {
        let mut total = ZERO;
        let mut w = self.nu.powi((cut + 1).max(0) as u32);
        for n in (cut + 1).max(0)..=self.n_max {
            let here = if n == 0 {
                self.get(0).abs()
            } else {
                match self.sym {
                    Symmetry::None => self.get(n).abs() + self.get(-n).abs(),
                    _ => self.get(n).abs().scale2(1),
                }
            };
            total = total + here * w;
            w = w * self.nu;
        }
        total
    }

    /// Rigorous convolution (a∗b)_n = Σ_m a_m b_{n-m}; symmetry classes
    /// multiply (even∗even = even, odd∗odd = even, even∗odd = odd).
    pub fn conv(&self, other: &FourierSeq) -> Result<FourierSeq> {
        if self.nu != other.nu {
            return Err(Error::Usage(format!(
                "convolution of sequences with different weights ν = {:?} and {:?}",
                self.nu, other.nu
            )));
        }
        let sym = self.sym.product(other.sym);
        let n_out = self.n_max + other.n_max;
        let mut out = FourierSeq::zeros(sym, n_out, self.nu);
        let p_min = match sym {
            Symmetry::None => -n_out,
            Symmetry::Even => 0,
            Symmetry::Odd => 1,
        };
        for p in p_min..=n_out {
            let mut acc = C_ZERO;
            let m_lo = (-self.n_max).max(p - other.n_max);
            let m_hi = self.n_max.min(p + other.n_max);
            for m in m_lo..=m_hi {
                acc = acc + self.get(m) * other.get(p - m);
            }
            match sym {
                Symmetry::None => out.data[(p + n_out) as usize] = acc,
                _ => out.data[p as usize] = acc,
            }
        }
        Ok(out)
    }

    fn to_general(&self) -> FourierSeq {
        if self.sym == Symmetry::None {
            return self.clone();
        }
        let mut out = FourierSeq::zeros(Symmetry::None, self.n_max, self.nu);
        for n in -self.n_max..=self.n_max {
            out.data[(n + self.n_max) as usize] = self.get(n);
        }
        out
    }

    /// Sum; mixed symmetries promote to the general two-sided class.
    /// Panics on mismatched ν (same-space programmer contract).
    pub fn add(&self, other: &FourierSeq) -> FourierSeq {
        assert_eq!(self.nu, other.nu, "sequence sum across different weights");
        if self.sym != other.sym {
            return self.to_general().add(&other.to_general());
        }
        let n_max = self.n_max.max(other.n_max);
        let mut out = FourierSeq::zeros(self.sym, n_max, self.nu);
        let lo = match self.sym {
            Symmetry::None => -n_max,
            _ => 0,
        };
        for n in lo..=n_max {
            let v = self.get(n) + other.get(n);
            let idx = match self.sym {
                Symmetry::None => (n + n_max) as usize,
                _ => n as usize,
            };
            out.data[idx] = v;
        }
        out
    }

    pub fn sub(&self, other: &FourierSeq) -> FourierSeq {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FourierSeq {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = -*v;
        }
        out
    }

    pub fn scale(&self, s: Interval) -> FourierSeq {
        self.scale_c(CInterval::real(s))
    }

    pub fn scale_c(&self, s: CInterval) -> FourierSeq {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = *v * s;
        }
        // Odd storage slot 0 must stay exactly zero.
        if out.sym == Symmetry::Odd {
            out.data[0] = C_ZERO;
        }
        out
    }

    /// Π^{≤N}: zero all entries with |n| > N (support bookkeeping unchanged).
    pub fn project_leq(&self, n_cut: i64) -> FourierSeq {
        let mut out = self.clone();
        for n in -self.n_max..=self.n_max {
            if n.abs() > n_cut {
                out.set_unchecked(n, C_ZERO);
            }
        }
        out
    }

    /// Π^{>N}: zero all entries with |n| ≤ N.
    pub fn project_gt(&self, n_cut: i64) -> FourierSeq {
        let mut out = self.clone();
        for n in -self.n_max..=self.n_max {
            if n.abs() <= n_cut {
                out.set_unchecked(n, C_ZERO);
            }
        }
        out
    }

    fn set_unchecked(&mut self, n: i64, v: CInterval) {
        match self.sym {
            Symmetry::None => self.data[(n + self.n_max) as usize] = v,
            _ => {
                if n >= 0 {
                    self.data[n as usize] = v;
                }
            }
        }
    }

    /// Shrink the stored support to min(n_max, n_new), dropping outer entries.
    pub fn truncated(&self, n_new: i64) -> FourierSeq {
        let n_max = self.n_max.min(n_new.max(0));
        let mut out = FourierSeq::zeros(self.sym, n_max, self.nu);
        let lo = match self.sym {
            Symmetry::None => -n_max,
            _ => 0,
        };
        for n in lo..=n_max {
            let idx = match self.sym {
                Symmetry::None => (n + n_max) as usize,
                _ => n as usize,
            };
            out.data[idx] = self.get(n);
        }
        out
    }

    /// Grow the stored support (entries beyond the old support are zero).
    pub fn padded(&self, n_new: i64) -> FourierSeq {
        if n_new <= self.n_max {
            return self.clone();
        }
        let mut out = FourierSeq::zeros(self.sym, n_new, self.nu);
        let lo = match self.sym {
            Symmetry::None => -self.n_max,
            _ => 0,
        };
        for n in lo..=self.n_max {
            let idx = match self.sym {
                Symmetry::None => (n + n_new) as usize,
                _ => n as usize,
            };
            out.data[idx] = self.get(n);
        }
        out
    }

    /// D^j in Fourier space: entry n multiplied by (in)^j, or by |n|^j when
    /// `absval` is set. Parity flips on each non-absolute derivative order.
    pub fn derivative(&self, j: u32, absval: bool) -> FourierSeq {
        if j == 0 {
            return self.clone();
        }
        let sym = if absval || j % 2 == 0 {
            self.sym
        } else {
            self.sym.flipped()
        };
        let mut out = FourierSeq::zeros(sym, self.n_max, self.nu);
        let lo = match sym {
            Symmetry::None => -self.n_max,
            _ => 0,
        };
        for n in lo..=self.n_max {
            let npow = Interval::point(n.abs() as f64).powi(j);
            let v = if absval {
                self.get(n).scale(npow)
            } else {
                // (in)^j = i^j · n^j; track the sign of n for odd j.
                let signed = if n < 0 && j % 2 == 1 { -npow } else { npow };
                let mut w = self.get(n).scale(signed);
                for _ in 0..(j % 4) {
                    w = w.mul_i();
                }
                w
            };
            let idx = match (sym, n) {
                (Symmetry::None, _) => (n + self.n_max) as usize,
                (_, n) => n as usize,
            };
            out.data[idx] = v;
        }
        if out.sym == Symmetry::Odd {
            out.data[0] = C_ZERO;
        }
        out
    }

    /// Enclosure of u(x) = Σ a_n e^{inx}.
    pub fn eval(&self, x: Interval) -> CInterval {
        let mut acc = self.get(0);
        for n in 1..=self.n_max {
            let nx = x * n as f64;
            let (c, s) = (nx.cos(), nx.sin());
            match self.sym {
                Symmetry::Even => {
                    // a_n (e^{inx} + e^{-inx}) = 2 a_n cos(nx)
                    acc = acc + self.get(n).scale(c.scale2(1));
                }
                Symmetry::Odd => {
                    // a_n (e^{inx} - e^{-inx}) = 2i a_n sin(nx)
                    acc = acc + self.get(n).scale(s.scale2(1)).mul_i();
                }
                Symmetry::None => {
                    let e = CInterval::new(c, s);
                    acc = acc + self.get(n) * e + self.get(-n) * e.conj();
                }
            }
        }
        acc
    }

    /// For conjugate-symmetric (real-valued) sequences, the value enclosure.
    pub fn eval_real(&self, x: Interval) -> Interval {
        self.eval(x).re
    }

    /// Max pointwise distance bound to another sequence: ‖a-b‖ at ν (the
    /// ℓ¹_ν norm dominates the sup norm since ν ≥ 1).
    pub fn sup_distance(&self, other: &FourierSeq) -> Interval {
        self.sub(other).norm()
    }
}

/// Apply a real-coefficient polynomial g (coefficients ascending in degree)
/// to a sequence via convolution powers. The symmetry of the result follows
/// the parity algebra; mixing promotes to the general class.
pub fn apply_poly(coeffs: &[Interval], a: &FourierSeq) -> FourierSeq {
    let mut acc: Option<FourierSeq> = None;
    let push = |term: FourierSeq, acc: &mut Option<FourierSeq>| {
        *acc = Some(match acc.take() {
            None => term,
            Some(prev) => prev.add(&term),
        });
    };
    let mut pow: Option<FourierSeq> = None;
    for (k, &c) in coeffs.iter().enumerate() {
        if k > 0 {
            pow = Some(match pow.take() {
                None => a.clone(),
                Some(p) => p.conv(a).expect("same ν by construction"),
            });
        }
        if c == ZERO {
            continue;
        }
        let term = match k {
            0 => FourierSeq::delta(a.nu()).scale(c),
            _ => pow.as_ref().unwrap().scale(c),
        };
        push(term, &mut acc);
    }
    acc.unwrap_or_else(|| FourierSeq::zeros(Symmetry::Even, 0, a.nu()))
}

/// Σ |c_k| x^k — the absolute-coefficient companion polynomial, evaluated on
/// an interval (used for norm bounds like ‖g(a)‖ ≤ |g|(‖a‖)).
pub fn abs_poly_eval(coeffs: &[Interval], x: Interval) -> Interval {
    let mut acc = ZERO;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c.abs();
    }
    acc
}

/// A sequence known only up to a tail: Π^{≤N} is stored, the rest is bounded
/// in norm.
#[derive(Clone, Debug)]
pub struct TailBoundedSeq {
    pub finite: FourierSeq,
    pub tail_norm: Interval,
    pub tail_start: i64,
}

impl TailBoundedSeq {
    pub fn exact(finite: FourierSeq) -> Self {
        let tail_start = finite.n_max();
        TailBoundedSeq { finite, tail_norm: ZERO, tail_start }
    }

    pub fn new(finite: FourierSeq, tail_norm: Interval, tail_start: i64) -> Result<Self> {
        if tail_norm.lo < 0.0 {
            return Err(Error::Usage("tail norm must be ≥ 0".into()));
        }
        if finite.n_max() > tail_start {
            return Err(Error::Usage(format!(
                "finite part supported to {} exceeds tail start {tail_start}",
                finite.n_max()
            )));
        }
        Ok(TailBoundedSeq { finite, tail_norm, tail_start })
    }

    /// Upper enclosure of the norm of any sequence this value represents.
    pub fn norm(&self) -> Interval {
        self.finite.norm() + self.tail_norm
    }

    pub fn project_leq(&self, n_cut: i64) -> TailBoundedSeq {
        if n_cut >= self.tail_start {
            // The tail bound remains valid (projection cannot grow norms).
            self.clone()
        } else {
            TailBoundedSeq {
                finite: self.finite.project_leq(n_cut),
                tail_norm: ZERO,
                tail_start: n_cut,
            }
        }
    }

    pub fn project_gt(&self, n_cut: i64) -> TailBoundedSeq {
        TailBoundedSeq {
            finite: self.finite.project_gt(n_cut),
            tail_norm: self.tail_norm,
            tail_start: self.tail_start,
        }
    }
}

/// One-sided/two-sided index weights for the ℓ¹_ν norm in the coordinates of
/// the given symmetry class: for even/odd, index n carries ν^n (doubled for
/// n ≥ 1 since it stands for ±n); for the general class, index i ↦ n = i - N
/// carries ν^{|n|}.
pub fn subspace_weights(sym: Symmetry, nu: Interval, n_max: i64) -> Vec<Interval> {
    match sym {
        Symmetry::None => (-n_max..=n_max)
            .map(|n| nu.powi(n.unsigned_abs() as u32))
            .collect(),
        _ => (0..=n_max)
            .map(|n| {
                let w = nu.powi(n as u32);
                if n == 0 {
                    w
                } else {
                    w.scale2(1)
                }
            })
            .collect(),
    }
}

/// Diagonal action on indices |n| > start, with a caller-supplied certificate
/// that |entry(n)| is nonincreasing in |n| once |n| ≥ monotone_from (for each
/// sign separately). The certificate is what makes the scanned supremum a
/// bound over the whole infinite tail.
pub struct DiagTail {
    pub start: i64,
    pub monotone_from: i64,
    pub entry: Box<dyn Fn(i64) -> CInterval + Send + Sync>,
}

impl DiagTail {
    /// Upper bound of sup_{|n| > start} |entry(n)|.
    pub fn sup_abs(&self, sym: Symmetry) -> Interval {
        let m0 = self.monotone_from.max(self.start + 1);
        let mut sup = ZERO;
        for n in (self.start + 1)..=m0 {
            sup = sup.max_iv((self.entry)(n).abs());
            if sym == Symmetry::None {
                sup = sup.max_iv((self.entry)(-n).abs());
            }
        }
        sup
    }
}

/// Linear operator on ℓ¹_ν split as finite block ⊕ diagonal tail.
pub struct SeqOperator {
    pub nu: Interval,
    pub sym: Symmetry,
    /// Block acts on indices |n| ≤ n_blk in the coordinates of `sym`.
    pub n_blk: i64,
    pub block: CMat,
    pub tail: Option<DiagTail>,
}

impl SeqOperator {
    pub fn block_only(nu: Interval, sym: Symmetry, n_blk: i64, block: CMat) -> Self {
        let dim = match sym {
            Symmetry::None => 2 * n_blk as usize + 1,
            _ => n_blk as usize + 1,
        };
        assert_eq!(block.rows, dim);
        assert_eq!(block.cols, dim);
        SeqOperator { nu, sym, n_blk, block, tail: None }
    }

    /// Enclosure of the ℓ¹_ν operator norm: weighted column sums over the
    /// block, supremum of |diagonal| over the tail.
    pub fn opnorm(&self) -> Interval {
        let w = subspace_weights(self.sym, self.nu, self.n_blk);
        let block_norm = self.block.weighted_colsum_norm(&w, &w);
        match &self.tail {
            None => block_norm,
            Some(t) => block_norm.max_iv(t.sup_abs(self.sym)),
        }
    }
}

/// Free-function form of the operator norm.
pub fn opnorm_l1nu(a: &SeqOperator) -> Interval {
    a.opnorm()
}
