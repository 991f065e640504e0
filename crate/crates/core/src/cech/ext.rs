//! The extension class of `0 → π*Ω¹_X → Ω¹_M → π*T_X → 0`.
//!
//! With `G = [[A, C], [0, B]]` on an overlap, the class is represented by
//! `φ = −C B⁻¹`. A splitting is a pair `(M_U, M_V)` of matrices, fiber-linear
//! on their charts, with `C + M_V B − A M_U = 0`.

use std::sync::Arc;

use super::{is_coboundary, CohomologyClass, Solution, TwoChartProblem};
use crate::atlas::{cotangent_transitions, BvTotalSpace, CotangentTransition, TransitionMap};
use crate::error::{Error, Result};
use crate::superalgebra::{Monomial, Parity, SuperMatrix, SuperScalar, Var, VarTable};

pub struct ExtProblem {
    u_table: Arc<VarTable>,
    v_table: Arc<VarTable>,
    to_v: TransitionMap,
    a: SuperMatrix,
    b: SuperMatrix,
    b_inv: SuperMatrix,
    c: SuperMatrix,
    /// `|dx_i| + |dp_j|` for entry `(i, j)`.
    row_parity: Vec<Parity>,
    col_parity: Vec<Parity>,
    u_fiber: Vec<Var>,
    v_fiber: Vec<Var>,
}

fn fiber_vars(m: &BvTotalSpace, chart: &str) -> Result<Vec<Var>> {
    let t = &m.chart(chart)?.table;
    Ok(t.vars().into_iter().filter(|&v| m.is_fiber_variable(chart, t.name(v))).collect())
}

impl ExtProblem {
    pub fn new(m: &BvTotalSpace, ct: &CotangentTransition) -> Result<Self> {
        let to_v = m.atlas.transition(&ct.from, &ct.to).ok_or_else(|| Error::AtlasFormat("missing transition".into()))?.clone();
        let b_inv = ct.b.inverse()?;
        Ok(ExtProblem {
            u_table: to_v.from.table.clone(),
            v_table: to_v.to.table.clone(),
            to_v,
            row_parity: ct.a.col_parity.clone(),
            col_parity: ct.b.col_parity.clone(),
            a: ct.a.clone(),
            b: ct.b.clone(),
            b_inv,
            c: ct.c.clone(),
            u_fiber: fiber_vars(m, &ct.from)?,
            v_fiber: fiber_vars(m, &ct.to)?,
        })
    }

    fn n(&self) -> usize {
        self.row_parity.len()
    }

    fn as_matrix(&self, vals: &[SuperScalar], table: &Arc<VarTable>) -> SuperMatrix {
        let n = self.n();
        let mut m = SuperMatrix::zeros(table, self.row_parity.clone(), self.col_parity.clone());
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, vals[i * n + j].clone());
            }
        }
        m
    }

    fn flat(m: &SuperMatrix) -> Vec<SuperScalar> {
        m.entries().to_vec()
    }

    /// `φ = −C B⁻¹`, flattened row-major.
    pub fn cocycle(&self) -> Result<Vec<SuperScalar>> {
        Ok(Self::flat(&self.c.mul(&self.b_inv)?.map(|e| Ok(-e))?))
    }

    /// `C + M_V B − A M_U` for a witness; zero for a splitting.
    pub fn splitting_residual(&self, w: &super::Witness) -> Result<SuperMatrix> {
        let mu = self.as_matrix(&w.u, &self.u_table);
        let mv_vals: Vec<SuperScalar> = w.v.iter().map(|f| self.to_v.pull_back(f)).collect::<Result<_>>()?;
        let mv = self.as_matrix(&mv_vals, &self.u_table);
        self.c.add(&mv.mul(&self.b)?)?.sub(&self.a.mul(&mu)?)
    }

    /// Whether every entry of the cocycle is linear in the fiber coordinates.
    pub fn is_fiber_linear(&self, vals: &[SuperScalar]) -> bool {
        vals.iter().all(|f| f.terms().keys().all(|m| fiber_degree(m, &self.u_fiber) == 1))
    }

    fn monomials(&self, table: &Arc<VarTable>, fiber: &[Var], bound: i32) -> Vec<(usize, Monomial)> {
        let mut caps = vec![bound; table.n_even()];
        let mut base_odd = u64::MAX;
        for v in fiber {
            match v {
                Var::Even(i) => caps[*i] = 0,
                Var::Odd(j) => base_odd &= !(1u64 << j),
            }
        }
        let base = super::capped_monomials(table, &caps, base_odd);
        let mut out = Vec::new();
        for c in 0..self.components() {
            for m in &base {
                for v in fiber {
                    let mut mm = m.clone();
                    match v {
                        Var::Even(i) => mm.even[*i] += 1,
                        Var::Odd(j) => mm.odd |= 1u64 << j,
                    }
                    out.push((c, mm));
                }
            }
        }
        out
    }
}

fn fiber_degree(m: &Monomial, fiber: &[Var]) -> i32 {
    fiber
        .iter()
        .map(|v| match v {
            Var::Even(i) => m.even[*i],
            Var::Odd(j) => ((m.odd >> j) & 1) as i32,
        })
        .sum()
}

impl TwoChartProblem for ExtProblem {
    fn components(&self) -> usize {
        self.n() * self.n()
    }

    fn component_parity(&self, i: usize) -> Parity {
        self.row_parity[i / self.n()] + self.col_parity[i % self.n()]
    }

    fn u_table(&self) -> &Arc<VarTable> {
        &self.u_table
    }

    fn v_table(&self) -> &Arc<VarTable> {
        &self.v_table
    }

    /// `M_U ↦ A M_U B⁻¹`.
    fn transport_u(&self, s: &[SuperScalar]) -> Result<Vec<SuperScalar>> {
        let mu = self.as_matrix(s, &self.u_table);
        Ok(Self::flat(&self.a.mul(&mu)?.mul(&self.b_inv)?))
    }

    fn transport_v(&self, s: &[SuperScalar]) -> Result<Vec<SuperScalar>> {
        s.iter().map(|f| self.to_v.pull_back(f)).collect()
    }

    fn u_monomials(&self, bound: i32) -> Vec<(usize, Monomial)> {
        self.monomials(&self.u_table, &self.u_fiber, bound)
    }

    fn v_monomials(&self, bound: i32) -> Vec<(usize, Monomial)> {
        self.monomials(&self.v_table, &self.v_fiber, bound)
    }
}

/// The extension class on one overlap of the total space.
pub struct ExtResult {
    pub from: String,
    pub to: String,
    pub problem: ExtProblem,
    pub cocycle: Vec<SuperScalar>,
    pub solution: Solution,
    pub fiber_linear: bool,
    /// `C + M_V B − A M_U` for the returned witness, after removing the class.
    pub residual_zero: bool,
}

impl ExtResult {
    pub fn split(&self) -> bool {
        self.solution.split()
    }

    pub fn class(&self) -> &CohomologyClass {
        &self.solution.class
    }

    pub fn label(&self, i: usize) -> String {
        let n = self.problem.n();
        format!("({},{})", i / n, i % n)
    }
}

/// The class of the `Ω¹_M` extension on each overlap `U0 → V` of the total
/// space, one result per overlap leaving the first chart. An atlas with one
/// chart has no overlaps and the extension splits.
pub fn ext_class_omega1(m: &BvTotalSpace) -> Result<Vec<ExtResult>> {
    ext_class_omega1_bounded(m, None)
}

/// [`ext_class_omega1`] with an explicit degree bound for the witnesses.
pub fn ext_class_omega1_bounded(m: &BvTotalSpace, bound: Option<i32>) -> Result<Vec<ExtResult>> {
    let first = &m.base.charts[0].name;
    let mut out = Vec::new();
    for ct in cotangent_transitions(m)? {
        if &ct.from != first {
            continue;
        }
        let p = ExtProblem::new(m, &ct)?;
        let phi = p.cocycle()?;
        let fiber_linear = p.is_fiber_linear(&phi);
        let sol = is_coboundary(&p, &phi, bound)?;
        let residual_zero = if sol.split() {
            p.splitting_residual(&sol.witness)?.is_zero()
        } else {
            // Remove the class, then the exact part must split: C' = C + class·B.
            let class_vals = super::unflatten(p.u_table(), p.components(), &class_vector(&sol.class));
            let cm = p.as_matrix(&class_vals, &p.u_table).mul(&p.b)?;
            p.splitting_residual(&sol.witness)?.add(&cm)?.is_zero()
        };
        out.push(ExtResult { from: ct.from.clone(), to: ct.to.clone(), problem: p, cocycle: phi, solution: sol, fiber_linear, residual_zero });
    }
    Ok(out)
}

fn class_vector(c: &CohomologyClass) -> crate::superalgebra::linalg::SparseVec<super::CochainKey> {
    c.coefficients.iter().map(|((i, m), g)| (super::CochainKey::new(*i, m.clone()), g.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::bv_total_space;
    use crate::examples::{build_affine, build_projective};
    use crate::superalgebra::Gq;

    #[test]
    fn projective_line_is_not_split() {
        let m = bv_total_space(&build_projective(1, 0).unwrap()).unwrap();
        let res = ext_class_omega1(&m).unwrap();
        assert_eq!(res.len(), 1);
        let r = &res[0];
        assert!(r.fiber_linear);
        assert!(!r.split());
        assert!(r.residual_zero);
        assert_eq!(r.cocycle[0].to_string(), "2*z^3*p_z");
        assert_eq!(r.class().coefficient_of(0, "z^3*p_z").unwrap(), Gq::from_int(2));
    }

    #[test]
    fn affine_space_is_split() {
        let m = bv_total_space(&build_affine(2, 2).unwrap()).unwrap();
        assert!(ext_class_omega1(&m).unwrap().is_empty());
    }
}
