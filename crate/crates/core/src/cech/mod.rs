//! Čech cohomology on a cover by two charts `U`, `V`.
//!
//! A problem fixes a sheaf `S` by the way its local sections on either chart
//! are presented on the overlap. All overlap data live over the coordinate
//! table of `U`. A 1-cochain is a vector of overlap functions and the
//! coboundary of a 0-cochain `(s_U, s_V)` is
//! `δ(s) = transport_v(s_V) − transport_u(s_U)`.
//!
//! Deciding whether a cocycle is a coboundary is exact linear algebra over a
//! finite basis of polynomial local sections. The echelon basis pivots on the
//! monomials of largest absolute exponent first, so the remainder of a
//! cocycle (its window normal form) sits on the central monomials.

pub mod atiyah;
pub mod ext;
pub mod sheaf;

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::superalgebra::linalg::{Echelon, SparseVec};
use crate::superalgebra::{Gq, Monomial, Parity, SuperScalar, VarTable};

pub use atiyah::{atiyah_cocycle, dw_decompose, AtiyahProblem, DwComponents};
pub use ext::{ext_class_omega1, ext_class_omega1_bounded, ExtProblem, ExtResult};
pub use sheaf::{h_dims, line_bundle_on_p1, SectionProblem, SheafData};

/// A sheaf on a two-chart cover, described through its overlap presentations.
pub trait TwoChartProblem {
    fn components(&self) -> usize;
    /// Parity of the slot a component coefficient multiplies.
    fn component_parity(&self, i: usize) -> Parity;
    /// Table of the local sections on `U`; also the table of overlap data.
    fn u_table(&self) -> &Arc<VarTable>;
    fn v_table(&self) -> &Arc<VarTable>;
    /// Local sections on `U`, presented on the overlap.
    fn transport_u(&self, s: &[SuperScalar]) -> Result<Vec<SuperScalar>>;
    /// Local sections on `V`, presented on the overlap.
    fn transport_v(&self, s: &[SuperScalar]) -> Result<Vec<SuperScalar>>;
    /// Basis monomials allowed for local sections on `U`, per component.
    fn u_monomials(&self, bound: i32) -> Vec<(usize, Monomial)> {
        all_components(self.components(), &polynomial_monomials(self.u_table(), bound))
    }
    fn v_monomials(&self, bound: i32) -> Vec<(usize, Monomial)> {
        all_components(self.components(), &polynomial_monomials(self.v_table(), bound))
    }
    /// Projection applied to every overlap value before comparing; the
    /// identity unless the problem restricts to a quotient.
    fn project(&self, s: Vec<SuperScalar>) -> Vec<SuperScalar> {
        s
    }
}

pub(crate) fn all_components(n: usize, monos: &[Monomial]) -> Vec<(usize, Monomial)> {
    (0..n).flat_map(|i| monos.iter().map(move |m| (i, m.clone()))).collect()
}

/// Polynomial monomials with every even exponent in `0..=bound` and every
/// subset of odd variables.
pub fn polynomial_monomials(table: &VarTable, bound: i32) -> Vec<Monomial> {
    capped_monomials(table, &vec![bound; table.n_even()], u64::MAX)
}

/// Monomials with even exponents `0..=caps[i]` and odd support inside `odd_mask`.
pub fn capped_monomials(table: &VarTable, caps: &[i32], odd_mask: u64) -> Vec<Monomial> {
    let mut evens: Vec<Vec<i32>> = vec![vec![]];
    for &cap in caps {
        evens = evens.into_iter().flat_map(|e| (0..=cap).map(move |k| [e.clone(), vec![k]].concat())).collect();
    }
    let q = table.n_odd();
    let full = if q == 64 { u64::MAX } else { (1u64 << q) - 1 };
    let allowed = full & odd_mask;
    let mut out = Vec::new();
    for e in &evens {
        let mut sub = allowed;
        loop {
            out.push(Monomial { even: e.clone(), odd: sub });
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & allowed;
        }
    }
    out
}

/// Sort key of a flattened cochain coordinate: larger exponents first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CochainKey {
    weight: Reverse<i32>,
    pub component: usize,
    pub monomial: Monomial,
}

impl CochainKey {
    pub fn new(component: usize, monomial: Monomial) -> Self {
        let w = monomial.even.iter().map(|e| e.abs()).max().unwrap_or(0);
        CochainKey { weight: Reverse(w), component, monomial }
    }
}

pub fn flatten(values: &[SuperScalar]) -> SparseVec<CochainKey> {
    let mut out = SparseVec::new();
    for (i, v) in values.iter().enumerate() {
        for (m, c) in v.terms() {
            out.insert(CochainKey::new(i, m.clone()), c.clone());
        }
    }
    out
}

pub fn unflatten(table: &Arc<VarTable>, n: usize, v: &SparseVec<CochainKey>) -> Vec<SuperScalar> {
    let mut out = vec![SuperScalar::zero(table); n];
    for (k, c) in v {
        out[k.component] = &out[k.component] + &SuperScalar::from_term(table, k.monomial.clone(), c.clone());
    }
    out
}

/// A cohomology class in window normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyClass {
    pub table: Arc<VarTable>,
    pub coefficients: BTreeMap<(usize, Monomial), Gq>,
}

impl CohomologyClass {
    pub fn zero(table: &Arc<VarTable>) -> Self {
        CohomologyClass { table: table.clone(), coefficients: BTreeMap::new() }
    }

    pub fn from_remainder(table: &Arc<VarTable>, rem: &SparseVec<CochainKey>) -> Self {
        let coefficients = rem.iter().map(|(k, c)| ((k.component, k.monomial.clone()), c.clone())).collect();
        CohomologyClass { table: table.clone(), coefficients }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficient(&self, component: usize, monomial: &Monomial) -> Gq {
        self.coefficients.get(&(component, monomial.clone())).cloned().unwrap_or_else(Gq::zero)
    }

    /// Coefficient at a monomial given in text, e.g. `z^-1`.
    pub fn coefficient_of(&self, component: usize, monomial: &str) -> Result<Gq> {
        let s = crate::superalgebra::parse_scalar(monomial, &self.table)?;
        let (m, c) = s
            .terms()
            .iter()
            .next()
            .ok_or_else(|| Error::Parse { pos: 0, msg: "expected a monomial".into() })?;
        let c_inv = c.inv().expect("nonzero");
        Ok(&self.coefficient(component, m) * &c_inv)
    }

    /// `{ "component:monomial": "coefficient" }`.
    pub fn window(&self, label: impl Fn(usize) -> String) -> BTreeMap<String, String> {
        self.coefficients
            .iter()
            .map(|((i, m), c)| (format!("{}:{}", label(*i), monomial_text(&self.table, m)), c.to_string()))
            .collect()
    }

    pub fn to_json(&self, label: impl Fn(usize) -> String) -> Value {
        json!(self.window(label))
    }
}

pub(crate) fn monomial_text(table: &VarTable, m: &Monomial) -> String {
    let t = SuperScalar::format_monomial(table, m);
    if t.is_empty() {
        "1".into()
    } else {
        t
    }
}

/// A 0-cochain `(s_U, s_V)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub u: Vec<SuperScalar>,
    pub v: Vec<SuperScalar>,
}

/// Outcome of [`is_coboundary`].
#[derive(Clone, Debug)]
pub struct Solution {
    /// Window normal form of the cocycle; zero exactly when it is a coboundary.
    pub class: CohomologyClass,
    /// `(s_U, s_V)` with `δ(s) = cocycle − class`.
    pub witness: Witness,
    pub bound: i32,
}

impl Solution {
    pub fn split(&self) -> bool {
        self.class.is_zero()
    }
}

/// Degree bound for witnesses: the cocycle's exponent range plus a margin
/// covering the transition exponents.
pub fn default_bound(cocycle: &[SuperScalar], odd: usize) -> i32 {
    let m = cocycle.iter().map(SuperScalar::max_abs_exponent).max().unwrap_or(0);
    m + 2 * (odd as i32 + 1) + 4
}

/// The coboundary `δ(s) = transport_v(s_V) − transport_u(s_U)`.
pub fn coboundary<P: TwoChartProblem + ?Sized>(p: &P, w: &Witness) -> Result<Vec<SuperScalar>> {
    let tu = p.project(p.transport_u(&w.u)?);
    let tv = p.project(p.transport_v(&w.v)?);
    Ok(tv.iter().zip(&tu).map(|(a, b)| a - b).collect())
}

fn basis_element(table: &Arc<VarTable>, n: usize, comp: usize, m: &Monomial) -> Vec<SuperScalar> {
    let mut v = vec![SuperScalar::zero(table); n];
    v[comp] = SuperScalar::from_term(table, m.clone(), Gq::from_int(1));
    v
}

/// Linear system of all coboundaries of basis 0-cochains up to `bound`.
pub struct CoboundarySystem {
    pub echelon: Echelon<CochainKey>,
    pub u_basis: Vec<(usize, Monomial)>,
    pub v_basis: Vec<(usize, Monomial)>,
    pub bound: i32,
}

impl CoboundarySystem {
    pub fn build<P: TwoChartProblem + ?Sized>(p: &P, bound: i32) -> Result<Self> {
        let n = p.components();
        let u_basis = p.u_monomials(bound);
        let v_basis = p.v_monomials(bound);
        let mut echelon = Echelon::new();
        for (c, m) in &u_basis {
            let img = p.project(p.transport_u(&basis_element(p.u_table(), n, *c, m))?);
            let neg: Vec<SuperScalar> = img.into_iter().map(|x| -x).collect();
            echelon.insert(flatten(&neg));
        }
        for (c, m) in &v_basis {
            let img = p.project(p.transport_v(&basis_element(p.v_table(), n, *c, m))?);
            echelon.insert(flatten(&img));
        }
        Ok(CoboundarySystem { echelon, u_basis, v_basis, bound })
    }

    fn witness_from(&self, p: &(impl TwoChartProblem + ?Sized), combo: &SparseVec<usize>) -> Witness {
        let n = p.components();
        let mut u = vec![SuperScalar::zero(p.u_table()); n];
        let mut v = vec![SuperScalar::zero(p.v_table()); n];
        let nu = self.u_basis.len();
        for (g, c) in combo {
            if *g < nu {
                let (i, m) = &self.u_basis[*g];
                u[*i] = &u[*i] + &SuperScalar::from_term(p.u_table(), m.clone(), c.clone());
            } else {
                let (i, m) = &self.v_basis[*g - nu];
                v[*i] = &v[*i] + &SuperScalar::from_term(p.v_table(), m.clone(), c.clone());
            }
        }
        Witness { u, v }
    }

    pub fn reduce<P: TwoChartProblem + ?Sized>(&self, p: &P, cocycle: &[SuperScalar]) -> Solution {
        let red = self.echelon.reduce(&flatten(&p.project(cocycle.to_vec())));
        Solution {
            class: CohomologyClass::from_remainder(p.u_table(), &red.remainder),
            witness: self.witness_from(p, &red.combination),
            bound: self.bound,
        }
    }

    /// The global sections: 0-cochains with zero coboundary.
    pub fn kernel<P: TwoChartProblem + ?Sized>(&self, p: &P) -> Vec<Witness> {
        self.echelon.kernel().iter().map(|rel| self.witness_from(p, rel)).collect()
    }
}

/// Decides whether `cocycle` is a coboundary, returning its window class and
/// a witness for the exact part.
pub fn is_coboundary<P: TwoChartProblem + ?Sized>(p: &P, cocycle: &[SuperScalar], bound: Option<i32>) -> Result<Solution> {
    if cocycle.len() != p.components() {
        return Err(Error::DimensionMismatch("cocycle has the wrong number of components".into()));
    }
    let bound = bound.unwrap_or_else(|| default_bound(cocycle, p.u_table().n_odd()));
    let sys = CoboundarySystem::build(p, bound)?;
    let sol = sys.reduce(p, cocycle);
    let delta = coboundary(p, &sol.witness)?;
    let projected = p.project(cocycle.to_vec());
    let class_vals = unflatten(p.u_table(), p.components(), &flatten_class(&sol.class));
    for ((c, d), r) in projected.iter().zip(&delta).zip(&class_vals) {
        if !(&(c - d) - r).is_zero() {
            return Err(Error::ConventionViolation("witness does not reproduce the cocycle".into()));
        }
    }
    Ok(sol)
}

fn flatten_class(c: &CohomologyClass) -> SparseVec<CochainKey> {
    c.coefficients.iter().map(|((i, m), g)| (CochainKey::new(*i, m.clone()), g.clone())).collect()
}

/// Dimension of the span of window monomials not hit by coboundaries, over
/// the coordinates with all exponents in `lo..=hi`.
pub fn window_dimension(sys: &CoboundarySystem, components: usize, table: &VarTable, lo: i32, hi: i32) -> usize {
    let mut count = 0;
    let monos = {
        let mut evens: Vec<Vec<i32>> = vec![vec![]];
        for _ in 0..table.n_even() {
            evens = evens.into_iter().flat_map(|e| (lo..=hi).map(move |k| [e.clone(), vec![k]].concat())).collect();
        }
        let q = table.n_odd();
        let mut out = Vec::new();
        for e in evens {
            for odd in 0..(1u64 << q) {
                out.push(Monomial { even: e.clone(), odd });
            }
        }
        out
    };
    for c in 0..components {
        for m in &monos {
            if !sys.echelon.is_pivot(&CochainKey::new(c, m.clone())) {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capped_monomials_enumerates_subsets() {
        let t = VarTable::from_lists(&["z"], &["a", "b"]).unwrap();
        let ms = capped_monomials(&t, &[1], 0b10);
        assert_eq!(ms.len(), 4);
        assert_eq!(polynomial_monomials(&t, 2).len(), 12);
    }

    #[test]
    fn keys_prefer_large_exponents() {
        let small = CochainKey::new(0, Monomial { even: vec![-1], odd: 0 });
        let large = CochainKey::new(0, Monomial { even: vec![5], odd: 0 });
        assert!(large < small);
    }
}
