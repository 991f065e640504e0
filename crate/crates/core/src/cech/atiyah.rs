//! Atiyah classes of locally free sheaves and the block decomposition of
//! `At(T_X)` for supermanifolds of dimension `1|m` over the projective line.
//!
//! The Atiyah cocycle of a sheaf with transition `G` is
//! `Φ_k = −(∂_{x_k} G) G⁻¹`, one endomorphism per covector slot `dx_k`.
//! Its components are indexed by `(k, a, b)` and the component has parity
//! `|x_k| + |e_a| + |e_b|`.

use std::sync::Arc;

use serde_json::json;

use super::{is_coboundary, CohomologyClass, Solution, TwoChartProblem};
use crate::atlas::{jacobian, Atlas, TransitionMap};
use crate::error::{Error, Result};
use crate::report::CheckRecord;
use crate::superalgebra::{Monomial, Parity, SuperMatrix, SuperScalar, VarTable};

use super::sheaf::SheafData;

/// The sheaf `Ω¹_X ⊗ End(E)` on the cover `{u, v}`, in the `u` presentation.
pub struct AtiyahProblem {
    u_table: Arc<VarTable>,
    v_table: Arc<VarTable>,
    to_v: TransitionMap,
    g: SuperMatrix,
    g_inv: SuperMatrix,
    jac: SuperMatrix,
    frame_parity: Vec<Parity>,
    coord_parity: Vec<Parity>,
    /// Components kept, together with setting the odd coordinates to zero.
    restriction: Option<Vec<usize>>,
}

impl AtiyahProblem {
    pub fn new(sheaf: &SheafData, u: &str, v: &str) -> Result<Self> {
        let g = sheaf.transition(u, v).ok_or_else(|| Error::AtlasFormat(format!("no frame transition {u}→{v}")))?.clone();
        let to_v = sheaf.base.transition(u, v).ok_or_else(|| Error::AtlasFormat(format!("no transition {u}→{v}")))?.clone();
        let jac = jacobian(&to_v);
        Ok(AtiyahProblem {
            u_table: to_v.from.table.clone(),
            v_table: to_v.to.table.clone(),
            g_inv: g.inverse()?,
            g,
            coord_parity: to_v.from.parities(),
            to_v,
            jac,
            frame_parity: sheaf.frame_parity.clone(),
            restriction: None,
        })
    }

    /// Restricts to the given components and to the reduced space.
    pub fn restricted(mut self, components: Vec<usize>) -> Self {
        self.restriction = Some(components);
        self
    }

    pub fn rank(&self) -> usize {
        self.frame_parity.len()
    }

    pub fn index(&self, k: usize, a: usize, b: usize) -> usize {
        let r = self.rank();
        (k * r + a) * r + b
    }

    pub fn unindex(&self, i: usize) -> (usize, usize, usize) {
        let r = self.rank();
        (i / (r * r), (i / r) % r, i % r)
    }

    /// `Φ_k = −(∂_{x_k} G) G⁻¹`, flattened by [`AtiyahProblem::index`].
    pub fn cocycle(&self) -> Result<Vec<SuperScalar>> {
        let r = self.rank();
        let n = self.coord_parity.len();
        let mut out = vec![SuperScalar::zero(&self.u_table); n * r * r];
        for (k, var) in self.u_table.vars().into_iter().enumerate() {
            let dg = self.g.map(|e| Ok(-e.derivative(var)))?;
            let phi = dg.mul(&self.g_inv)?;
            for a in 0..r {
                for b in 0..r {
                    out[self.index(k, a, b)] = phi.get(a, b).clone();
                }
            }
        }
        Ok(out)
    }

    /// Label of a component: `(x_k; e_a, e_b)` with coordinate names for the
    /// slots of the tangent sheaf.
    pub fn label(&self, i: usize) -> String {
        let (k, a, b) = self.unindex(i);
        let names: Vec<String> = self.u_table.vars().into_iter().map(|v| self.u_table.name(v).to_string()).collect();
        let slot = |j: usize| if self.rank() == names.len() { names[j].clone() } else { format!("e{j}") };
        format!("({};{},{})", names[k], slot(a), slot(b))
    }

    fn kept(&self, i: usize) -> bool {
        self.restriction.as_ref().map_or(true, |s| s.contains(&i))
    }
}

impl TwoChartProblem for AtiyahProblem {
    fn components(&self) -> usize {
        self.coord_parity.len() * self.rank() * self.rank()
    }

    fn component_parity(&self, i: usize) -> Parity {
        let (k, a, b) = self.unindex(i);
        self.coord_parity[k] + self.frame_parity[a] + self.frame_parity[b]
    }

    fn u_table(&self) -> &Arc<VarTable> {
        &self.u_table
    }

    fn v_table(&self) -> &Arc<VarTable> {
        &self.v_table
    }

    fn transport_u(&self, s: &[SuperScalar]) -> Result<Vec<SuperScalar>> {
        Ok(s.to_vec())
    }

    /// `A^U_k = G^{(k)} (Σ_j ∂y_j/∂x_k · A^V_j) G⁻¹`, where `G^{(k)}` carries
    /// the sign `(−1)^{|x_k||G_ac|}` from moving `∂_{x_k}` past `G`.
    fn transport_v(&self, s: &[SuperScalar]) -> Result<Vec<SuperScalar>> {
        let r = self.rank();
        let n = self.coord_parity.len();
        let pulled: Vec<SuperScalar> = s.iter().map(|f| self.to_v.pull_back(f)).collect::<Result<_>>()?;
        let mut out = vec![SuperScalar::zero(&self.u_table); n * r * r];
        for k in 0..n {
            let mut m = SuperMatrix::zeros(&self.u_table, self.frame_parity.clone(), self.frame_parity.clone());
            let mut any = false;
            for j in 0..n {
                let jkj = self.jac.get(k, j);
                if jkj.is_zero() {
                    continue;
                }
                for a in 0..r {
                    for b in 0..r {
                        let e = &pulled[self.index(j, a, b)];
                        if e.is_zero() {
                            continue;
                        }
                        any = true;
                        let cur = m.get(a, b).clone();
                        m.set(a, b, &cur + &(jkj * e));
                    }
                }
            }
            if !any {
                continue;
            }
            let gk = {
                let mut gk = self.g.clone();
                if self.coord_parity[k].is_odd() {
                    for a in 0..r {
                        for c in 0..r {
                            if (self.frame_parity[a] + self.frame_parity[c]).is_odd() {
                                gk.set(a, c, -self.g.get(a, c));
                            }
                        }
                    }
                }
                gk
            };
            let t = gk.mul(&m)?.mul(&self.g_inv)?;
            for a in 0..r {
                for b in 0..r {
                    out[self.index(k, a, b)] = t.get(a, b).clone();
                }
            }
        }
        Ok(out)
    }

    fn u_monomials(&self, bound: i32) -> Vec<(usize, Monomial)> {
        restricted_monomials(self, self.u_table.clone(), bound)
    }

    fn v_monomials(&self, bound: i32) -> Vec<(usize, Monomial)> {
        restricted_monomials(self, self.v_table.clone(), bound)
    }

    fn project(&self, s: Vec<SuperScalar>) -> Vec<SuperScalar> {
        match &self.restriction {
            None => s,
            Some(_) => s
                .into_iter()
                .enumerate()
                .map(|(i, f)| if self.kept(i) { f.filter(|m| m.odd == 0) } else { SuperScalar::zero(f.table()) })
                .collect(),
        }
    }
}

fn restricted_monomials(p: &AtiyahProblem, table: Arc<VarTable>, bound: i32) -> Vec<(usize, Monomial)> {
    let monos = match p.restriction {
        None => super::polynomial_monomials(&table, bound),
        Some(_) => super::capped_monomials(&table, &vec![bound; table.n_even()], 0),
    };
    (0..p.components()).filter(|&i| p.kept(i)).flat_map(|i| monos.iter().map(move |m| (i, m.clone()))).collect()
}

/// The Atiyah cocycle of `sheaf` on the overlap `u → v`, with its class.
pub fn atiyah_cocycle(sheaf: &SheafData, u: &str, v: &str) -> Result<(AtiyahProblem, Vec<SuperScalar>, Solution)> {
    let p = AtiyahProblem::new(sheaf, u, v)?;
    let phi = p.cocycle()?;
    let sol = is_coboundary(&p, &phi, None)?;
    Ok((p, phi, sol))
}

/// `Φ_UW = Φ_UV + transport_UV(Φ_VW)` on every triple of charts.
pub fn atiyah_cocycle_checks(sheaf: &SheafData) -> Result<Vec<CheckRecord>> {
    let names: Vec<String> = sheaf.base.charts.iter().map(|c| c.name.clone()).collect();
    let mut out = Vec::new();
    for a in &names {
        for b in &names {
            for c in &names {
                if a == b || b == c || a == c {
                    continue;
                }
                let uv = AtiyahProblem::new(sheaf, a, b)?;
                let vw = AtiyahProblem::new(sheaf, b, c)?;
                let uw = AtiyahProblem::new(sheaf, a, c)?;
                let lhs = uw.cocycle()?;
                let moved = uv.transport_v(&vw.cocycle()?)?;
                let rhs: Vec<SuperScalar> = uv.cocycle()?.iter().zip(&moved).map(|(x, y)| x + y).collect();
                let residual: Vec<String> =
                    lhs.iter().zip(&rhs).map(|(x, y)| x - y).filter(|d| !d.is_zero()).map(|d| d.to_string()).collect();
                out.push(CheckRecord::new(
                    format!("atiyah.cocycle.{a}->{b}->{c}"),
                    residual.is_empty(),
                    "the Atiyah cochain satisfies the cocycle condition",
                    json!({ "residual": residual }),
                ));
            }
        }
    }
    Ok(out)
}

/// The three pieces of `At(T_X)` restricted to the reduced space.
#[derive(Clone, Debug)]
pub struct DwComponents {
    /// `(z; z, z)`: the Atiyah class of the reduced tangent sheaf.
    pub red: CohomologyClass,
    /// `(θ_i; θ_j, z)`: the class of the even obstruction `ω_X`.
    pub omega: CohomologyClass,
    /// `(z; θ_i, θ_j)` and `(θ_i; z, θ_j)`: the Atiyah class of the fermionic sheaf.
    pub ferm: CohomologyClass,
    /// The restricted cocycle and the three pieces; the pieces sum to it.
    pub restricted: Vec<SuperScalar>,
    pub pieces: [Vec<SuperScalar>; 3],
    pub labels: Vec<String>,
}

impl DwComponents {
    pub fn sums_back(&self) -> bool {
        self.restricted.iter().enumerate().all(|(i, f)| {
            let s = &(&self.pieces[0][i] + &self.pieces[1][i]) + &self.pieces[2][i];
            (f - &s).is_zero()
        })
    }
}

/// Decomposes `At(T_X)` for a `1|m` supermanifold over the projective line
/// with charts `U0`, `U1`.
pub fn dw_decompose(x: &Atlas) -> Result<DwComponents> {
    if x.dims.0 != 1 || x.charts.len() != 2 {
        return Err(Error::Unsupported("decomposition needs a 1|m atlas with two charts".into()));
    }
    let sheaf = SheafData::tangent(x);
    let full = AtiyahProblem::new(&sheaf, "U0", "U1")?;
    let phi = full.cocycle()?;
    let n = 1 + x.dims.1;
    let mut red = Vec::new();
    let mut omega = Vec::new();
    let mut ferm = Vec::new();
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                let i = full.index(k, a, b);
                match (k == 0, a == 0, b == 0) {
                    (true, true, true) => red.push(i),
                    (false, false, true) => omega.push(i),
                    (true, false, false) | (false, true, false) => ferm.push(i),
                    _ => {}
                }
            }
        }
    }
    let all: Vec<usize> = red.iter().chain(&omega).chain(&ferm).copied().collect();
    let restricted = AtiyahProblem::new(&sheaf, "U0", "U1")?.restricted(all.clone()).project(phi.clone());
    // Every other component is odd, so it vanishes on the reduced space.
    for (i, f) in phi.iter().enumerate() {
        if !all.contains(&i) && !f.filter(|m| m.odd == 0).is_zero() {
            return Err(Error::ConventionViolation(format!("component {} survives restriction", full.label(i))));
        }
    }
    let mut classes = Vec::new();
    let mut pieces = Vec::new();
    for group in [red, omega, ferm] {
        let p = AtiyahProblem::new(&sheaf, "U0", "U1")?.restricted(group);
        let piece = p.project(phi.clone());
        let sol = is_coboundary(&p, &piece, None)?;
        classes.push(sol.class);
        pieces.push(piece);
    }
    let labels = (0..full.components()).map(|i| full.label(i)).collect();
    let ferm_c = classes.pop().expect("three");
    let omega_c = classes.pop().expect("three");
    let red_c = classes.pop().expect("three");
    let [p0, p1, p2]: [Vec<SuperScalar>; 3] = pieces.try_into().expect("three pieces");
    Ok(DwComponents { red: red_c, omega: omega_c, ferm: ferm_c, restricted, pieces: [p0, p1, p2], labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cech::line_bundle_on_p1;
    use crate::examples::{build_projective, build_super_conic};
    use crate::superalgebra::Gq;

    #[test]
    fn tangent_of_projective_line() {
        let x = build_projective(1, 0).unwrap();
        let t = SheafData::tangent(&x);
        let (_, phi, sol) = atiyah_cocycle(&t, "U0", "U1").unwrap();
        assert_eq!(phi[0].to_string(), "2*z^-1");
        assert!(!sol.split());
        assert_eq!(sol.class.coefficient_of(0, "z^-1").unwrap(), Gq::from_int(2));
    }

    #[test]
    fn line_bundles_have_class_k() {
        for k in -3..=3i64 {
            let s = line_bundle_on_p1(k).unwrap();
            let (_, _, sol) = atiyah_cocycle(&s, "U0", "U1").unwrap();
            assert_eq!(sol.split(), k == 0);
            assert_eq!(sol.class.coefficient_of(0, "z^-1").unwrap(), Gq::from_int(k));
        }
    }

    #[test]
    fn plane_cocycle_condition() {
        for m in [0, 1] {
            let x = build_projective(2, m).unwrap();
            let checks = atiyah_cocycle_checks(&SheafData::tangent(&x)).unwrap();
            assert_eq!(checks.len(), 6);
            assert!(checks.iter().all(CheckRecord::passed), "{checks:?}");
        }
    }

    #[test]
    fn conic_decomposition() {
        let x = build_super_conic(1).unwrap();
        let dw = dw_decompose(&x).unwrap();
        assert!(dw.sums_back());
        assert!(!dw.red.is_zero());
        assert!(!dw.omega.is_zero(), "{:?}", dw.omega);
        assert!(!dw.ferm.is_zero());
    }
}
