//! Differential forms on the odd cotangent bundle `M = ΠT*X` of a superdomain
//! `X = ℂ^{n|m}`, written locally as `η ⊗ F ⊗ f`: a form `η` in the `dx_a`, a
//! polyfield `F` in the `dp_a` and a function `f(x, p)`.
//!
//! Everything lives in one [`SuperScalar`] ring over the variables
//!
//! | symbol | parity        |
//! |--------|---------------|
//! | `x_a`  | `|x_a|`       |
//! | `p_a`  | `|x_a| + 1`   |
//! | `dx_a` | `|x_a| + 1`   |
//! | `dp_a` | `|x_a|`       |
//!
//! with the odd variables ordered `dx`, `dp`, `x`, `p`. In that order every
//! canonical monomial is literally `η · F · f`, so no reordering sign enters
//! the decomposition. The coordinates `x_1..x_n` are even and
//! `x_{n+1}..x_{n+m}` odd.

mod complex;
mod sample;

pub use complex::{
    bidegree_table, bv_checks, census_hs, census_hs_with, delta3_agrees_with_laplacian, e3_homology, form_monomials,
    function_monomials, k_identity_census, s_homology_basis, s_preimage, Census, E3Homology, Truncation,
};
pub use sample::{random_closed_form, random_form, random_function};

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::superalgebra::{Gq, Monomial, Parity, SuperScalar, Var, VarTable};

/// An element of `Ω•_M` in the coordinates of a [`FormAlgebra`].
pub type MixedForm = SuperScalar;

/// The four symbol families, in table order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    Dx,
    Dp,
    X,
    P,
}

/// The variables of `Ω•_M` over `ℂ^{n|m}`.
#[derive(Clone, Debug)]
pub struct FormAlgebra {
    pub n: usize,
    pub m: usize,
    table: Arc<VarTable>,
    x: Vec<Var>,
    p: Vec<Var>,
    dx: Vec<Var>,
    dp: Vec<Var>,
}

/// Even and odd degrees of the form and polyfield factors of a monomial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    pub deg0_eta: u32,
    pub deg1_eta: u32,
    pub deg0_f: u32,
    pub deg1_f: u32,
}

impl DegreeProfile {
    /// Bidegree `(deg η, deg F)`.
    pub fn bidegree(&self) -> (u32, u32) {
        (self.deg0_eta + self.deg1_eta, self.deg0_f + self.deg1_f)
    }
}

/// A section `D · f` of `π*Ber(X)`, where
/// `D = dx_1⋯dx_n ⊗ dp_{n+1}⋯dp_{n+m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BerSection {
    pub f: SuperScalar,
}

fn exponent(m: &Monomial, v: Var) -> u32 {
    match v {
        Var::Even(i) => m.even[i] as u32,
        Var::Odd(j) => ((m.odd >> j) & 1) as u32,
    }
}

fn bump(m: &mut Monomial, v: Var, by: i32) {
    match v {
        Var::Even(i) => m.even[i] += by,
        Var::Odd(j) => {
            if by > 0 {
                m.odd |= 1 << j
            } else {
                m.odd &= !(1 << j)
            }
        }
    }
}

impl FormAlgebra {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        let dim = n + m;
        let par = |a: usize| if a < n { Parity::Even } else { Parity::Odd };
        let mut entries: Vec<(String, Parity)> = Vec::new();
        for a in 0..dim {
            entries.push((format!("dx{}", a + 1), par(a).flip()));
        }
        for a in 0..dim {
            entries.push((format!("dp{}", a + 1), par(a)));
        }
        for a in 0..dim {
            entries.push((format!("x{}", a + 1), par(a)));
        }
        for a in 0..dim {
            entries.push((format!("p{}", a + 1), par(a).flip()));
        }
        let table = VarTable::new(&entries)?;
        let look = |prefix: &str| -> Result<Vec<Var>> { (1..=dim).map(|a| table.lookup(&format!("{prefix}{a}"))).collect() };
        Ok(FormAlgebra { n, m, x: look("x")?, p: look("p")?, dx: look("dx")?, dp: look("dp")?, table })
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    /// Parity of the coordinate `x_a` (zero-based `a`).
    pub fn coordinate_parity(&self, a: usize) -> Parity {
        if a < self.n {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn vars(&self, block: Block) -> &[Var] {
        match block {
            Block::Dx => &self.dx,
            Block::Dp => &self.dp,
            Block::X => &self.x,
            Block::P => &self.p,
        }
    }

    pub fn x(&self, a: usize) -> MixedForm {
        SuperScalar::from_var(&self.table, self.x[a])
    }

    pub fn p(&self, a: usize) -> MixedForm {
        SuperScalar::from_var(&self.table, self.p[a])
    }

    pub fn dx(&self, a: usize) -> MixedForm {
        SuperScalar::from_var(&self.table, self.dx[a])
    }

    pub fn dp(&self, a: usize) -> MixedForm {
        SuperScalar::from_var(&self.table, self.dp[a])
    }

    pub fn one(&self) -> MixedForm {
        SuperScalar::one(&self.table)
    }

    pub fn parse(&self, text: &str) -> Result<MixedForm> {
        crate::superalgebra::parse_scalar(text, &self.table)
    }

    /// The part of `mono` built from one symbol family.
    pub fn block_part(&self, mono: &Monomial, block: Block) -> Monomial {
        let mut out = Monomial::one(self.table.n_even());
        for &v in self.vars(block) {
            let e = exponent(mono, v);
            if e > 0 {
                bump(&mut out, v, e as i32);
            }
        }
        out
    }

    /// `(η, F, f)` with `η · F · f = mono`.
    pub fn split(&self, mono: &Monomial) -> (Monomial, Monomial, Monomial) {
        let eta = self.block_part(mono, Block::Dx);
        let f_poly = self.block_part(mono, Block::Dp);
        let mut fun = self.block_part(mono, Block::X);
        let pp = self.block_part(mono, Block::P);
        for (a, b) in fun.even.iter_mut().zip(&pp.even) {
            *a += b;
        }
        fun.odd |= pp.odd;
        (eta, f_poly, fun)
    }

    pub fn is_function(&self, mono: &Monomial) -> bool {
        self.dx.iter().chain(&self.dp).all(|&v| exponent(mono, v) == 0)
    }

    fn degrees(&self, mono: &Monomial, vars: &[Var]) -> (u32, u32) {
        let mut d0 = 0;
        let mut d1 = 0;
        for &v in vars {
            match v {
                Var::Even(_) => d0 += exponent(mono, v),
                Var::Odd(_) => d1 += exponent(mono, v),
            }
        }
        (d0, d1)
    }

    pub fn profile(&self, mono: &Monomial) -> DegreeProfile {
        let (deg0_eta, deg1_eta) = self.degrees(mono, &self.dx);
        let (deg0_f, deg1_f) = self.degrees(mono, &self.dp);
        DegreeProfile { deg0_eta, deg1_eta, deg0_f, deg1_f }
    }

    /// `λ = (n+m) + (deg₀F − deg₁F) + (deg₀η − deg₁η)`.
    pub fn lambda(&self, mono: &Monomial) -> i64 {
        let d = self.profile(mono);
        self.dim() as i64 + d.deg0_f as i64 - d.deg1_f as i64 + d.deg0_eta as i64 - d.deg1_eta as i64
    }

    /// Total degree in the `x` and in the `p`.
    pub fn function_degrees(&self, mono: &Monomial) -> (u32, u32) {
        let (a, b) = self.degrees(mono, &self.x);
        let (c, e) = self.degrees(mono, &self.p);
        (a + b, c + e)
    }

    /// `D = dx_1⋯dx_n · dp_{n+1}⋯dp_{n+m}`.
    pub fn d_monomial(&self) -> Monomial {
        let mut out = Monomial::one(self.table.n_even());
        for a in 0..self.n {
            bump(&mut out, self.dx[a], 1);
        }
        for a in self.n..self.dim() {
            bump(&mut out, self.dp[a], 1);
        }
        out
    }

    /// Whether the form part of `mono` is exactly `D`.
    pub fn is_d_monomial(&self, mono: &Monomial) -> bool {
        let (eta, f, _) = self.split(mono);
        let mut ef = eta;
        for (a, b) in ef.even.iter_mut().zip(&f.even) {
            *a += b;
        }
        ef.odd |= f.odd;
        ef == self.d_monomial()
    }

    /// `x_{n+1}⋯x_{n+m} · p_1⋯p_n`, the representative of `E₃`.
    pub fn e3_monomial(&self) -> Monomial {
        let mut out = Monomial::one(self.table.n_even());
        for a in self.n..self.dim() {
            bump(&mut out, self.x[a], 1);
        }
        for a in 0..self.n {
            bump(&mut out, self.p[a], 1);
        }
        out
    }

    pub fn e3_representative(&self) -> SuperScalar {
        SuperScalar::from_term(&self.table, self.e3_monomial(), Gq::from_int(1))
    }

    pub fn monomial(&self, mono: Monomial) -> MixedForm {
        SuperScalar::from_term(&self.table, mono, Gq::from_int(1))
    }

    /// The de Rham differential `Σ_a (dx_a ∂_{x_a} + dp_a ∂_{p_a})`.
    pub fn d(&self, w: &MixedForm) -> MixedForm {
        let mut out = SuperScalar::zero(&self.table);
        for a in 0..self.dim() {
            out = &out + &(&self.dx(a) * &w.derivative(self.x[a]));
            out = &out + &(&self.dp(a) * &w.derivative(self.p[a]));
        }
        out
    }

    /// The odd symplectic form `ω = Σ_a dx_a dp_a`.
    pub fn omega(&self) -> MixedForm {
        let mut out = SuperScalar::zero(&self.table);
        for a in 0..self.dim() {
            out = &out + &(&self.dx(a) * &self.dp(a));
        }
        out
    }

    /// Left multiplication by `ω`.
    pub fn s(&self, w: &MixedForm) -> MixedForm {
        &self.omega() * w
    }

    /// The contraction `h = Σ_a ∂_{dx_a} ∂_{dp_a}`.
    pub fn h(&self, w: &MixedForm) -> MixedForm {
        let mut out = SuperScalar::zero(&self.table);
        for a in 0..self.dim() {
            out = &out + &w.derivative(self.dp[a]).derivative(self.dx[a]);
        }
        out
    }

    /// The contraction with the sign `(−1)^{|x_a|(|η|+|F|+1)}` on
    /// `(∂_{dx_a}η) ⊗ (∂_{dp_a}F) ⊗ f`, applied factor by factor.
    ///
    /// It differs from [`FormAlgebra::h`] on terms where `x_a` is odd and `F`
    /// is even, and `hs + sh` then stops being diagonal.
    pub fn h_factorwise(&self, w: &MixedForm) -> MixedForm {
        let mut out = SuperScalar::zero(&self.table);
        for (mono, c) in w.terms() {
            let (eta, f_poly, fun) = self.split(mono);
            let eta_s = SuperScalar::from_term(&self.table, eta.clone(), c.clone());
            let f_s = self.monomial(f_poly.clone());
            let fun_s = self.monomial(fun);
            let tot = (eta.parity() + f_poly.parity()).bit() + 1;
            for a in 0..self.dim() {
                let sign = if self.coordinate_parity(a).is_odd() && tot % 2 == 1 { -1 } else { 1 };
                let piece = &(&eta_s.derivative(self.dx[a]) * &f_s.derivative(self.dp[a])) * &fun_s;
                out = &out + &piece.scale_int(sign);
            }
        }
        out
    }

    /// The super BV Laplacian `f ↦ Σ_a ∂_{x_a} ∂_{p_a} f` on functions.
    pub fn laplacian(&self, f: &SuperScalar) -> SuperScalar {
        let mut out = SuperScalar::zero(&self.table);
        for a in 0..self.dim() {
            out = &out + &f.derivative(self.p[a]).derivative(self.x[a]);
        }
        out
    }

    pub fn bv_laplacian(&self, s: &BerSection) -> BerSection {
        BerSection { f: self.laplacian(&s.f) }
    }

    fn require_function(&self, f: &SuperScalar) -> Result<()> {
        if f.terms().keys().all(|m| self.is_function(m) && m.is_polynomial()) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("expected a polynomial in x and p only".into()))
        }
    }

    /// The homotopy `K` for the Laplacian, term by term.
    ///
    /// A monomial `g(x) p^I` goes to
    /// `Σ_a (−1)^{|g|(|x_a|+1)} x_a g p_a p^I / (ℓ + δ + 1)` with `δ` the
    /// x-degree of `g` and `ℓ = n+m + deg₀(p^I) − deg₁(p^I) − 2deg₁(g) − 1`.
    /// The `E₃` monomial is sent to zero.
    pub fn homotopy_k(&self, f: &SuperScalar) -> Result<SuperScalar> {
        self.require_function(f)?;
        let p_mono = self.e3_monomial();
        let mut out = SuperScalar::zero(&self.table);
        for (mono, c) in f.terms() {
            if *mono == p_mono {
                continue;
            }
            let g = self.block_part(mono, Block::X);
            let pi = self.block_part(mono, Block::P);
            let (deg0_p, deg1_p) = self.degrees(mono, &self.p);
            let (g0, g1) = self.degrees(mono, &self.x);
            let ell = self.dim() as i64 + deg0_p as i64 - deg1_p as i64 - 2 * g1 as i64 - 1;
            let den = ell + (g0 + g1) as i64 + 1;
            if den == 0 {
                let text = SuperScalar::format_monomial(&self.table, mono);
                return Err(Error::ConventionViolation(format!("vanishing t-integral for {text}")));
            }
            let coeff = c * &Gq::from_ratio(1, den);
            let g_s = self.monomial(g.clone());
            let pi_s = self.monomial(pi);
            for a in 0..self.dim() {
                let odd = g.parity().is_odd() && self.coordinate_parity(a).flip().is_odd();
                let term = &(&(&self.x(a) * &g_s) * &self.p(a)) * &pi_s;
                let term = term.scale(&coeff);
                out = &out + &if odd { -term } else { term };
            }
        }
        Ok(out)
    }

    pub fn bv_homotopy_k(&self, s: &BerSection) -> Result<BerSection> {
        Ok(BerSection { f: self.homotopy_k(&s.f)? })
    }

    /// Projection onto the span of the `E₃` monomial.
    pub fn project_e3(&self, f: &SuperScalar) -> SuperScalar {
        let m = self.e3_monomial();
        SuperScalar::from_term(&self.table, m.clone(), f.coefficient(&m))
    }

    pub fn ber_form(&self, s: &BerSection) -> MixedForm {
        &self.monomial(self.d_monomial()) * &s.f
    }

    /// `T = Σ_a (∂_{dp_a}∂_{x_a} + ∂_{dx_a}∂_{p_a}) S`.
    pub fn zigzag_t(&self, big_s: &MixedForm) -> MixedForm {
        let mut out = SuperScalar::zero(&self.table);
        for a in 0..self.dim() {
            out = &out + &big_s.derivative(self.x[a]).derivative(self.dp[a]);
            out = &out + &big_s.derivative(self.p[a]).derivative(self.dx[a]);
        }
        out
    }

    /// The third-page differential on `S = D·f`, computed along the zig-zag
    /// and reduced to a section of `π*Ber(X)`.
    ///
    /// The image is `(−1)^{|D|} d(T)` with `|D| = n + m`: this is the sign
    /// picked up when `d` passes `D`, and with it `δ₃` induces `Δ₂` itself
    /// rather than `±Δ₂` depending on the dimension.
    pub fn delta3_detail(&self, s: &BerSection) -> Result<Delta3> {
        self.require_function(&s.f)?;
        let big_s = self.ber_form(s);
        let t = self.zigzag_t(&big_s);
        let zigzag_holds = self.d(&big_s) == self.s(&t);
        let dt = self.d(&t);
        let image = if self.dim() % 2 == 1 { -dt } else { dt };
        let section = complex::ber_normal_form(self, &image)?;
        Ok(Delta3 { t, zigzag_holds, image, section })
    }

    pub fn delta3(&self, s: &BerSection) -> Result<BerSection> {
        Ok(self.delta3_detail(s)?.section)
    }

    /// The interior product with the Euler field, `Σ_y y ∂_{dy}` over all
    /// coordinates `y ∈ {x_a, p_a}`.
    pub fn euler_contraction(&self, w: &MixedForm) -> MixedForm {
        let mut out = SuperScalar::zero(&self.table);
        for a in 0..self.dim() {
            out = &out + &(&self.x(a) * &w.derivative(self.dx[a]));
            out = &out + &(&self.p(a) * &w.derivative(self.dp[a]));
        }
        out
    }

    /// A primitive of a closed form by radial integration towards
    /// `basepoint`, given as values of the even coordinates among
    /// `x_1..x_n, p_{n+1}..p_{n+m}` in that order.
    ///
    /// On a term of total weight `w` (polynomial degree plus form degree) the
    /// Lie derivative along the Euler field is multiplication by `w`, so
    /// `σ = Σ_w ι(ω_w)/w` satisfies `dσ = ω`.
    pub fn de_rham_homotopy(&self, w: &MixedForm, basepoint: &[Gq]) -> Result<MixedForm> {
        if !w.is_polynomial() {
            return Err(Error::Unsupported("negative exponents in a de Rham primitive".into()));
        }
        if !self.d(w).is_zero() {
            return Err(Error::NotClosed);
        }
        if w.terms().keys().any(|m| self.is_function(m)) {
            return Err(Error::Unsupported("closed forms of degree zero have no primitive".into()));
        }
        let evens: Vec<Var> = (0..self.n).map(|a| self.x[a]).chain((self.n..self.dim()).map(|a| self.p[a])).collect();
        if basepoint.len() != evens.len() {
            return Err(Error::DimensionMismatch(format!("basepoint needs {} values", evens.len())));
        }
        let shift = |sign: i64| -> Result<Vec<SuperScalar>> {
            Ok(self
                .table
                .vars()
                .into_iter()
                .map(|v| {
                    let base = SuperScalar::from_var(&self.table, v);
                    match evens.iter().position(|&e| e == v) {
                        Some(k) => &base + &SuperScalar::constant(&self.table, basepoint[k].clone()).scale_int(sign),
                        None => base,
                    }
                })
                .collect())
        };
        // Move the basepoint to the origin, integrate, move back.
        let centered = w.substitute(&shift(1)?, &self.table)?;
        let mut sigma = SuperScalar::zero(&self.table);
        for (mono, c) in centered.terms() {
            let weight: i64 = self.table.vars().into_iter().map(|v| exponent(mono, v) as i64).sum();
            let term = SuperScalar::from_term(&self.table, mono.clone(), c.clone());
            let inv = Gq::from_ratio(1, weight);
            sigma = &sigma + &self.euler_contraction(&term).scale(&inv);
        }
        sigma.substitute(&shift(-1)?, &self.table)
    }

    /// `η = Σ_a (−1)^{|x_a|+1} dx_a p_a`, a primitive of `ω`.
    pub fn primitive_eta(&self) -> MixedForm {
        let mut out = SuperScalar::zero(&self.table);
        for a in 0..self.dim() {
            let t = &self.dx(a) * &self.p(a);
            out = &out + &if self.coordinate_parity(a).is_odd() { t } else { -t };
        }
        out
    }
}

/// The pieces of a `δ₃` computation.
#[derive(Clone, Debug)]
pub struct Delta3 {
    pub t: MixedForm,
    /// `d(S) = s(T)`.
    pub zigzag_holds: bool,
    /// `(−1)^{|D|} d(T)`.
    pub image: MixedForm,
    /// The `π*Ber(X)` class of the image.
    pub section: BerSection,
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn alg(n: usize, m: usize) -> FormAlgebra {
        FormAlgebra::new(n, m).unwrap()
    }

    #[test]
    fn d_of_coordinate_and_constant() {
        let a = alg(1, 0);
        assert_eq!(a.d(&a.x(0)), a.dx(0));
        assert!(a.d(&a.one().scale_int(5)).is_zero());
    }

    #[test]
    fn primitive_form_differentiates_to_omega() {
        for (n, m) in [(1, 0), (1, 1), (2, 1), (0, 2)] {
            let a = alg(n, m);
            assert_eq!(a.d(&a.primitive_eta()), a.s(&a.one()));
        }
    }

    #[test]
    fn top_form_is_annihilated_by_s() {
        let a = alg(1, 1);
        let top = a.parse("dx1*dp2").unwrap();
        assert!(a.s(&top).is_zero());
    }

    #[test]
    fn hs_plus_sh_on_small_forms() {
        let a = alg(1, 0);
        let dz = a.dx(0);
        let hs = |w: &MixedForm| &a.h(&a.s(w)) + &a.s(&a.h(w));
        assert!(hs(&dz).is_zero());
        assert_eq!(hs(&a.one()), a.one());
        let b = alg(1, 2);
        let gen = b.parse("dx1*dp2*dp3").unwrap();
        assert_eq!(b.lambda(gen.terms().keys().next().unwrap()), 0);
    }

    #[test]
    fn laplacian_examples() {
        let a = alg(1, 0);
        assert_eq!(a.laplacian(&a.parse("x1*p1").unwrap()), a.one());
        assert!(a.laplacian(&a.one()).is_zero());
        for (n, m) in [(1, 1), (2, 1), (1, 2)] {
            let b = alg(n, m);
            assert!(b.laplacian(&b.e3_representative()).is_zero());
        }
    }

    #[test]
    fn homotopy_on_unit_and_representative() {
        for (n, m) in [(1, 0), (1, 1), (2, 1)] {
            let a = alg(n, m);
            let one = a.one();
            let lhs = &a.laplacian(&a.homotopy_k(&one).unwrap()) + &a.homotopy_k(&a.laplacian(&one)).unwrap();
            assert_eq!(lhs, one);
            let r = a.e3_representative();
            let lhs = &a.laplacian(&a.homotopy_k(&r).unwrap()) + &a.homotopy_k(&a.laplacian(&r)).unwrap();
            assert!(lhs.is_zero());
        }
    }

    #[test]
    fn delta3_on_xp_is_the_unit() {
        let a = alg(1, 0);
        let d3 = a.delta3_detail(&BerSection { f: a.parse("x1*p1").unwrap() }).unwrap();
        assert!(d3.zigzag_holds);
        assert_eq!(d3.section.f, a.one());
        assert!(a.delta3(&BerSection { f: a.one() }).unwrap().f.is_zero());
        let b = alg(2, 1);
        assert!(b.delta3(&BerSection { f: b.e3_representative() }).unwrap().f.is_zero());
    }

    #[test]
    fn de_rham_primitives() {
        let a = alg(1, 1);
        let sigma = a.de_rham_homotopy(&a.dx(0), &[Gq::zero(), Gq::zero()]).unwrap();
        assert_eq!(sigma, a.x(0));
        let offset = a.de_rham_homotopy(&a.dx(0), &[Gq::from_int(3), Gq::zero()]).unwrap();
        assert_eq!(offset, a.parse("x1 - 3").unwrap());
        let w = a.s(&a.one());
        let sigma = a.de_rham_homotopy(&w, &[Gq::zero(), Gq::zero()]).unwrap();
        assert_eq!(a.d(&sigma), w);
        let diff = &sigma - &a.primitive_eta();
        let rest = a.de_rham_homotopy(&diff, &[Gq::zero(), Gq::zero()]).unwrap();
        assert_eq!(a.d(&rest), diff);
        assert_eq!(a.de_rham_homotopy(&a.parse("x1*dp1").unwrap(), &[Gq::zero(), Gq::zero()]), Err(Error::NotClosed));
    }
}
