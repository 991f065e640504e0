//! Locally free sheaves given by frame transitions, and their sections.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;

use super::{window_dimension, CoboundarySystem, TwoChartProblem, Witness};
use crate::atlas::{jacobian, Atlas};
use crate::error::{Error, Result};
use crate::report::CheckRecord;
use crate::superalgebra::{Parity, SuperMatrix, SuperScalar, VarTable};

/// A locally free sheaf with frames related by `e^U = G e^V` on each overlap.
///
/// `G` is stored over the coordinates of `U`. A section `Σ f_i e_i` has
/// coefficient rows transforming as `f^V = f^U · G`.
#[derive(Clone, Debug)]
pub struct SheafData {
    pub base: Atlas,
    pub frame_parity: Vec<Parity>,
    transitions: BTreeMap<(String, String), SuperMatrix>,
}

impl SheafData {
    pub fn new(base: Atlas, frame_parity: Vec<Parity>) -> Self {
        SheafData { base, frame_parity, transitions: BTreeMap::new() }
    }

    pub fn rank(&self) -> (usize, usize) {
        let odd = self.frame_parity.iter().filter(|p| p.is_odd()).count();
        (self.frame_parity.len() - odd, odd)
    }

    /// Stores `G` for `e^from = G e^to` and derives the reverse transition.
    pub fn insert(&mut self, from: &str, to: &str, g: SuperMatrix) -> Result<()> {
        let back = self
            .base
            .transition(to, from)
            .ok_or_else(|| Error::AtlasFormat(format!("no transition {to}→{from}")))?;
        if g.rows() != self.frame_parity.len() || !g.is_even() {
            return Err(Error::DimensionMismatch("frame transition has the wrong shape".into()));
        }
        let inv = g.inverse()?.map(|e| back.pull_back(e))?;
        self.transitions.insert((from.to_string(), to.to_string()), g);
        self.transitions.insert((to.to_string(), from.to_string()), inv);
        Ok(())
    }

    pub fn transition(&self, from: &str, to: &str) -> Option<&SuperMatrix> {
        self.transitions.get(&(from.to_string(), to.to_string()))
    }

    /// The line bundle with `e^from = g e^to`, `g` given over the `to` chart.
    pub fn line_bundle(base: &Atlas, from: &str, to: &str, g_over_to: &SuperScalar) -> Result<Self> {
        let t = base.transition(from, to).ok_or_else(|| Error::AtlasFormat(format!("no transition {from}→{to}")))?;
        let g = t.pull_back(g_over_to)?;
        let mut s = SheafData::new(base.clone(), vec![Parity::Even]);
        let m = SuperMatrix::from_rows(&t.from.table, vec![Parity::Even], vec![Parity::Even], vec![vec![g]])?;
        s.insert(from, to, m)?;
        Ok(s)
    }

    /// The tangent sheaf: frames `∂_{x_a} = Σ_b (∂y_b/∂x_a) ∂_{y_b}`, so `G` is the Jacobian.
    pub fn tangent(base: &Atlas) -> Self {
        let parity = base.charts[0].parities();
        let mut s = SheafData::new(base.clone(), parity);
        for t in base.transitions() {
            s.transitions.insert((t.from.name.clone(), t.to.name.clone()), jacobian(t));
        }
        s
    }

    /// `G_UW = G_UV · G_VW` on every triple overlap, for each stored pair.
    pub fn cocycle_checks(&self) -> Result<Vec<CheckRecord>> {
        let mut out = Vec::new();
        let names: Vec<&str> = self.base.charts.iter().map(|c| c.name.as_str()).collect();
        for &a in &names {
            for &b in &names {
                for &c in &names {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    let (Some(ab), Some(bc), Some(ac)) = (self.transition(a, b), self.transition(b, c), self.transition(a, c))
                    else {
                        continue;
                    };
                    let t = self.base.transition(a, b).expect("base transition");
                    let prod = ab.mul(&bc.map(|e| t.pull_back(e))?)?;
                    let diff = prod.sub(ac)?;
                    out.push(CheckRecord::new(
                        format!("sheaf.cocycle.{a}->{b}->{c}"),
                        diff.is_zero(),
                        "frame transitions compose on triple overlaps",
                        json!({ "residual": diff.to_string() }),
                    ));
                }
            }
        }
        Ok(out)
    }
}

/// `O(k)` on the projective line, with `e_{U0} = w^k e_{U1}`.
pub fn line_bundle_on_p1(k: i64) -> Result<SheafData> {
    let base = crate::examples::build_projective(1, 0)?;
    let w = SuperScalar::var(&base.chart("U1")?.table, "w")?;
    SheafData::line_bundle(&base, "U0", "U1", &w.pow(k)?)
}

/// Global sections of a sheaf over the cover `{u, v}`.
pub struct SectionProblem<'a> {
    sheaf: &'a SheafData,
    u_table: Arc<VarTable>,
    v_table: Arc<VarTable>,
    g_inv: SuperMatrix,
    to_v: crate::atlas::TransitionMap,
}

impl<'a> SectionProblem<'a> {
    pub fn new(sheaf: &'a SheafData, u: &str, v: &str) -> Result<Self> {
        let g = sheaf.transition(u, v).ok_or_else(|| Error::AtlasFormat(format!("no frame transition {u}→{v}")))?;
        let to_v = sheaf.base.transition(u, v).expect("base transition").clone();
        Ok(SectionProblem {
            sheaf,
            u_table: sheaf.base.chart(u)?.table.clone(),
            v_table: sheaf.base.chart(v)?.table.clone(),
            g_inv: g.inverse()?,
            to_v,
        })
    }

    /// Global sections with local degrees up to `bound`, split by parity.
    pub fn global_sections(&self, bound: i32) -> Result<(Vec<Witness>, Vec<Witness>)> {
        let sys = CoboundarySystem::build(self, bound)?;
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for mut w in sys.kernel(self) {
            // Kernel vectors may mix parities only through independent parts;
            // split them so that each returned section is homogeneous.
            let (we, wo) = split_parity(self, &mut w);
            if let Some(we) = we {
                even.push(we);
            }
            if let Some(wo) = wo {
                odd.push(wo);
            }
        }
        Ok((independent(even), independent(odd)))
    }
}

fn split_parity(p: &SectionProblem<'_>, w: &mut Witness) -> (Option<Witness>, Option<Witness>) {
    let part = |vals: &[SuperScalar], target: Parity| -> Vec<SuperScalar> {
        vals.iter()
            .enumerate()
            .map(|(i, f)| {
                let slot = p.sheaf.frame_parity[i];
                f.filter(|m| m.parity() + slot == target)
            })
            .collect()
    };
    let mk = |target| {
        let w2 = Witness { u: part(&w.u, target), v: part(&w.v, target) };
        (w2.u.iter().chain(&w2.v).any(|x| !x.is_zero())).then_some(w2)
    };
    (mk(Parity::Even), mk(Parity::Odd))
}

fn independent(ws: Vec<Witness>) -> Vec<Witness> {
    let mut e = crate::superalgebra::linalg::Echelon::new();
    let mut out = Vec::new();
    for w in ws {
        let before = e.rank();
        e.insert(super::flatten(&w.u));
        if e.rank() > before {
            out.push(w);
        }
    }
    out
}

impl TwoChartProblem for SectionProblem<'_> {
    fn components(&self) -> usize {
        self.sheaf.frame_parity.len()
    }

    fn component_parity(&self, i: usize) -> Parity {
        self.sheaf.frame_parity[i]
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

    fn transport_v(&self, s: &[SuperScalar]) -> Result<Vec<SuperScalar>> {
        let pulled: Vec<SuperScalar> = s.iter().map(|f| self.to_v.pull_back(f)).collect::<Result<_>>()?;
        let n = pulled.len();
        Ok((0..n)
            .map(|j| {
                let mut acc = SuperScalar::zero(&self.u_table);
                for (i, f) in pulled.iter().enumerate() {
                    acc = &acc + &(f * self.g_inv.get(i, j));
                }
                acc
            })
            .collect())
    }
}

/// `(dim H⁰, dim H¹)` of `O(k)` on the projective line.
///
/// `H⁰` is the space of compatible polynomial pairs; `H¹` counts the overlap
/// monomials that no coboundary reaches, inside the exponent range that all
/// basis coboundaries cover.
pub fn h_dims(k: i64) -> Result<(usize, usize)> {
    let sheaf = line_bundle_on_p1(k)?;
    let p = SectionProblem::new(&sheaf, "U0", "U1")?;
    let bound = k.unsigned_abs() as i32 + 4;
    let sys = CoboundarySystem::build(&p, bound)?;
    let h0 = sys.kernel(&p).len();
    let h1 = window_dimension(&sys, 1, p.u_table(), k as i32 - bound, bound);
    Ok((h0, h1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cech::is_coboundary;

    #[test]
    fn dims_of_small_twists() {
        assert_eq!(h_dims(-2).unwrap(), (0, 1));
        assert_eq!(h_dims(0).unwrap(), (1, 0));
        assert_eq!(h_dims(-1).unwrap(), (0, 0));
        assert_eq!(h_dims(3).unwrap(), (4, 0));
        assert_eq!(h_dims(-5).unwrap(), (0, 4));
    }

    #[test]
    fn window_class_of_inverse_z() {
        let sheaf = line_bundle_on_p1(-2).unwrap();
        let p = SectionProblem::new(&sheaf, "U0", "U1").unwrap();
        let z = SuperScalar::var(p.u_table(), "z").unwrap();
        let sol = is_coboundary(&p, &[z.pow(-1).unwrap()], None).unwrap();
        assert!(!sol.split());
        assert_eq!(sol.class.coefficient_of(0, "z^-1").unwrap(), crate::superalgebra::Gq::from_int(1));
        let sol = is_coboundary(&p, &[&z.pow(-3).unwrap() + &z], None).unwrap();
        assert!(sol.split());
    }

    #[test]
    fn trivial_bundle_constant_is_exact() {
        let sheaf = line_bundle_on_p1(0).unwrap();
        let p = SectionProblem::new(&sheaf, "U0", "U1").unwrap();
        let sol = is_coboundary(&p, &[SuperScalar::one(p.u_table())], None).unwrap();
        assert!(sol.split());
    }
}
