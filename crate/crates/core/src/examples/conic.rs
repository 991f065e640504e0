use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::build_super_conic;
use crate::atlas::Atlas;
use crate::cech::{h_dims, SectionProblem, SheafData};
use crate::error::Result;
use crate::superalgebra::{parse_scalar, Gq, Parity, SuperMatrix, SuperScalar, VarTable};

/// A line bundle on a two-chart atlas with `e_{from} = g · e_{to}`, `g`
/// written in the coordinates of `to`.
#[derive(Clone, Debug)]
pub struct LineBundle {
    pub base: Atlas,
    pub from: String,
    pub to: String,
    pub frame_transition: SuperScalar,
}

impl LineBundle {
    pub fn sheaf(&self) -> Result<SheafData> {
        SheafData::line_bundle(&self.base, &self.from, &self.to, &self.frame_transition)
    }

    /// The local representative on `to` of a section with representative
    /// `f` on `from`: `(f ∘ φ) · g`.
    pub fn carry(&self, f: &SuperScalar) -> Result<SuperScalar> {
        let t = self.base.transition(&self.to, &self.from).expect("conic transition");
        Ok(&t.pull_back(f)? * &self.frame_transition)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalSection {
    pub name: String,
    pub local_reps: BTreeMap<String, SuperScalar>,
}

impl GlobalSection {
    /// Residual of the overlap identity; zero for a genuine global section.
    pub fn overlap_residual(&self, bundle: &LineBundle) -> Result<SuperScalar> {
        let f0 = &self.local_reps[&bundle.from];
        let f1 = &self.local_reps[&bundle.to];
        Ok(&bundle.carry(f0)? - f1)
    }

    pub fn parity(&self) -> Parity {
        self.local_reps.values().find_map(|f| (!f.is_zero()).then(|| f.parity()).flatten()).unwrap_or(Parity::Even)
    }
}

/// `L` on the conic with `e_{U0} = (w² − ψ₁ψ₂) e_{U1}`.
pub fn conic_line_bundle() -> Result<LineBundle> {
    let base = build_super_conic(1)?;
    let g = parse_scalar("w^2 - psi1*psi2", &base.chart("U1")?.table)?;
    Ok(LineBundle { base, from: "U0".into(), to: "U1".into(), frame_transition: g })
}

/// `L` together with the sections `X₀, X₁, X₂, Θ₁, Θ₂`.
pub fn conic_line_bundle_sections() -> Result<(LineBundle, Vec<GlobalSection>)> {
    let l = conic_line_bundle()?;
    let t0 = l.base.chart("U0")?.table.clone();
    let t1 = l.base.chart("U1")?.table.clone();
    let defs = [
        ("X0", "1", "w^2 - psi1*psi2"),
        ("X1", "z", "w"),
        ("X2", "z^2 - theta1*theta2", "1"),
        ("Theta1", "theta1", "psi1"),
        ("Theta2", "theta2", "psi2"),
    ];
    let sections = defs
        .iter()
        .map(|(name, a, b)| {
            let mut reps = BTreeMap::new();
            reps.insert("U0".to_string(), parse_scalar(a, &t0)?);
            reps.insert("U1".to_string(), parse_scalar(b, &t1)?);
            Ok(GlobalSection { name: name.to_string(), local_reps: reps })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((l, sections))
}

/// `dim H⁰(L)` as `(even, odd)`, computed from compatible local polynomials.
pub fn conic_h0() -> Result<(usize, usize)> {
    let l = conic_line_bundle()?;
    let sheaf = l.sheaf()?;
    let p = SectionProblem::new(&sheaf, "U0", "U1")?;
    let (even, odd) = p.global_sections(4)?;
    Ok((even.len(), odd.len()))
}

/// Homogeneous coordinates `X0, X1, X2 | Theta1, Theta2` of `ℂP^{2|2}`.
fn homogeneous_table() -> Result<Arc<VarTable>> {
    VarTable::from_lists(&["X0", "X1", "X2"], &["Theta1", "Theta2"])
}

/// The element `[T]` of `PGL(3|2)` bringing the quadric to diagonal form.
pub fn conic_pgl_matrix() -> Result<SuperMatrix> {
    let t = homogeneous_table()?;
    let c = |re: i64, im: i64| SuperScalar::constant(&t, &Gq::from_int(re) + &(&Gq::i() * &Gq::from_int(im)));
    let par = vec![Parity::Even, Parity::Even, Parity::Even, Parity::Odd, Parity::Odd];
    let rows = vec![
        vec![c(1, 0), c(0, 0), c(0, 1), c(0, 0), c(0, 0)],
        vec![c(0, 0), c(0, 1), c(0, 0), c(0, 0), c(0, 0)],
        vec![c(1, 0), c(0, 0), c(0, -1), c(0, 0), c(0, 0)],
        vec![c(0, 0), c(0, 0), c(0, 0), c(1, 0), c(0, 0)],
        vec![c(0, 0), c(0, 0), c(0, 0), c(0, 0), c(1, 0)],
    ];
    SuperMatrix::from_rows(&t, par.clone(), par, rows)
}

/// Results of evaluating the embedding equation.
#[derive(Clone, Debug, Serialize)]
pub struct ConicEquation {
    /// The quadric that the sections satisfy, in homogeneous coordinates.
    pub equation: String,
    /// Its local value in each chart; both vanish.
    pub residuals: BTreeMap<String, String>,
    /// Local value in `U0` of `Θ₁Θ₂ − X₁² − X₀X₂`, the variant with the
    /// opposite sign on `X₀X₂`.
    pub opposite_sign_u0: String,
    /// The quadric after substituting `X ↦ T·X`.
    pub transformed: String,
    /// `X₀² + X₁² + X₂² + Θ₁Θ₂`.
    pub target: String,
}

impl ConicEquation {
    pub fn holds(&self) -> bool {
        self.residuals.values().all(|r| r == "0") && self.transformed == self.target
    }
}

fn eval_in_chart(quadric: &SuperScalar, sections: &[GlobalSection], chart: &str) -> Result<SuperScalar> {
    let order = ["X0", "X1", "X2", "Theta1", "Theta2"];
    let images: Vec<SuperScalar> = order
        .iter()
        .map(|n| sections.iter().find(|s| s.name == *n).expect("section").local_reps[chart].clone())
        .collect();
    quadric.substitute(&images, images[0].table())
}

/// Evaluates the quadric `Θ₁Θ₂ − X₁² + X₀X₂` on the five sections in both
/// charts, and applies `[T]`.
pub fn conic_equation_check() -> Result<ConicEquation> {
    let (l, sections) = conic_line_bundle_sections()?;
    let h = homogeneous_table()?;
    let quadric = parse_scalar("Theta1*Theta2 - X1^2 + X0*X2", &h)?;
    let opposite = parse_scalar("Theta1*Theta2 - X1^2 - X0*X2", &h)?;
    let mut residuals = BTreeMap::new();
    for c in &l.base.charts {
        residuals.insert(c.name.clone(), eval_in_chart(&quadric, &sections, &c.name)?.to_string());
    }
    let opp = eval_in_chart(&opposite, &sections, "U0")?;
    let t = conic_pgl_matrix()?;
    let coords: Vec<SuperScalar> = h.vars().into_iter().map(|v| SuperScalar::from_var(&h, v)).collect();
    let images: Vec<SuperScalar> = (0..5)
        .map(|r| {
            let mut acc = SuperScalar::zero(&h);
            for (c, x) in coords.iter().enumerate() {
                acc = &acc + &(t.get(r, c) * x);
            }
            acc
        })
        .collect();
    let transformed = quadric.substitute(&images, &h)?;
    let target = parse_scalar("X0^2 + X1^2 + X2^2 + Theta1*Theta2", &h)?;
    Ok(ConicEquation {
        equation: quadric.to_string(),
        residuals,
        opposite_sign_u0: opp.to_string(),
        transformed: transformed.to_string(),
        target: target.to_string(),
    })
}

/// Whether `ℂP¹` with fermionic sheaf `O(m) ⊕ O(n)` carries a non-projected
/// structure, read off from the obstruction space `H¹(O(2 + m + n))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub m: i64,
    pub n: i64,
    pub obstruction_twist: i64,
    pub obstruction_dim: usize,
    pub non_projected_exists: bool,
    /// `non-projected` when a nonzero class was asked for and exists,
    /// otherwise `split`.
    pub structure: String,
}

pub fn classify_1_2_over_p1(m: i64, n: i64, omega_nonzero: bool) -> Result<Classification> {
    let twist = 2 + m + n;
    let (_, h1) = h_dims(twist)?;
    let exists = h1 > 0;
    Ok(Classification {
        m,
        n,
        obstruction_twist: twist,
        obstruction_dim: h1,
        non_projected_exists: exists,
        structure: if omega_nonzero && exists { "non-projected" } else { "split" }.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_sections_are_global() {
        let (l, sections) = conic_line_bundle_sections().unwrap();
        for s in &sections {
            assert!(s.overlap_residual(&l).unwrap().is_zero(), "{}", s.name);
        }
        assert_eq!(sections.iter().filter(|s| s.parity() == Parity::Odd).count(), 2);
    }

    #[test]
    fn x2_rep_maps_to_frame() {
        let (l, sections) = conic_line_bundle_sections().unwrap();
        let x2 = &sections[2];
        assert!(l.carry(&x2.local_reps["U0"]).unwrap().is_one());
    }

    #[test]
    fn h0_is_three_two() {
        assert_eq!(conic_h0().unwrap(), (3, 2));
    }

    #[test]
    fn equation_and_normal_form() {
        let eq = conic_equation_check().unwrap();
        assert!(eq.holds(), "{eq:?}");
        let t0 = build_super_conic(1).unwrap().chart("U0").unwrap().table.clone();
        let expected = parse_scalar("2*theta1*theta2 - 2*z^2", &t0).unwrap();
        assert_eq!(eq.opposite_sign_u0, expected.to_string());
    }

    #[test]
    fn pgl_matrix_is_invertible() {
        let t = conic_pgl_matrix().unwrap();
        assert_eq!(t.berezinian().unwrap().constant_term(), Gq::from_int(2));
    }

    #[test]
    fn classification_examples() {
        let c = classify_1_2_over_p1(-2, -2, true).unwrap();
        assert_eq!((c.obstruction_dim, c.structure.as_str()), (1, "non-projected"));
        assert_eq!(classify_1_2_over_p1(0, 0, true).unwrap().obstruction_dim, 0);
        assert_eq!(classify_1_2_over_p1(-1, -2, true).unwrap().obstruction_dim, 0);
    }
}
