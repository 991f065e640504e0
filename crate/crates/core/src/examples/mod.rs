//! Builders for the worked examples: affine superspaces, projective
//! superspaces, and the non-projected conic `ℂP¹|²_ω` with its embedding
//! line bundle.

mod conic;

pub use conic::{
    classify_1_2_over_p1, conic_equation_check, conic_h0, conic_line_bundle, conic_line_bundle_sections,
    conic_pgl_matrix, Classification, ConicEquation, GlobalSection, LineBundle,
};

use std::collections::BTreeMap;

use crate::atlas::{Atlas, Chart, TransitionMap};
use crate::error::{Error, Result};
use crate::superalgebra::{SuperScalar, VarTable};

/// `ℂ^{n|m}` with coordinates `x1..xn | theta1..thetam`.
pub fn build_affine(n: usize, m: usize) -> Result<Atlas> {
    let evens: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let odds: Vec<String> = (1..=m).map(|i| format!("theta{i}")).collect();
    let chart = Chart::new("U0", VarTable::from_lists(&evens, &odds)?);
    Atlas::new(format!("affine({n}|{m})"), (n, m), vec![chart])
}

/// `ℂ^{n|m}` covered by two copies of itself, `x | theta` and `y | eta`,
/// glued by the triangular automorphism
///
/// ```text
/// y1 = x1 + x2² + θ1θ2,   eta1 = θ1 + x1 θ2,
/// ```
///
/// where the `x2²` term needs `n ≥ 2` and the odd terms need `m ≥ 2`; every
/// other coordinate is unchanged.
pub fn build_affine_cover(n: usize, m: usize) -> Result<Atlas> {
    if n == 0 {
        return Err(Error::Unsupported("the two-chart cover needs an even coordinate".into()));
    }
    let names = |e: &str, o: &str| -> (Vec<String>, Vec<String>) {
        ((1..=n).map(|i| format!("{e}{i}")).collect(), (1..=m).map(|i| format!("{o}{i}")).collect())
    };
    let (xe, xo) = names("x", "theta");
    let (ye, yo) = names("y", "eta");
    let u0 = Chart::new("U0", VarTable::from_lists(&xe, &xo)?);
    let u1 = Chart::new("U1", VarTable::from_lists(&ye, &yo)?);
    let mut atlas = Atlas::new(format!("affine-cover({n}|{m})"), (n, m), vec![u0.clone(), u1.clone()])?;
    let sq = n >= 2;
    let odd = m >= 2;
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    for i in 1..=n {
        fwd.insert(format!("y{i}"), format!("x{i}"));
        back.insert(format!("x{i}"), format!("y{i}"));
    }
    for j in 1..=m {
        fwd.insert(format!("eta{j}"), format!("theta{j}"));
        back.insert(format!("theta{j}"), format!("eta{j}"));
    }
    let y2sq = if sq { " - y2^2" } else { "" };
    fwd.insert("y1".into(), format!("x1{}{}", if sq { " + x2^2" } else { "" }, if odd { " + theta1*theta2" } else { "" }));
    back.insert("x1".into(), format!("y1{y2sq}{}", if odd { " - eta1*eta2" } else { "" }));
    if odd {
        fwd.insert("eta1".into(), "theta1 + x1*theta2".into());
        back.insert("theta1".into(), format!("eta1 - (y1{y2sq})*eta2"));
    }
    atlas.insert(TransitionMap::parse(&u0, &u1, &fwd)?);
    atlas.insert(TransitionMap::parse(&u1, &u0, &back)?);
    Ok(atlas)
}

const EVEN_LETTERS: [&str; 3] = ["z", "w", "v"];
const ODD_LETTERS: [&str; 3] = ["theta", "psi", "chi"];

fn projective_names(n: usize, m: usize, chart: usize) -> (Vec<String>, Vec<String>) {
    let evens = if n == 1 {
        vec![EVEN_LETTERS[chart].to_string()]
    } else {
        (0..=n).filter(|&j| j != chart).map(|j| format!("{}{}", EVEN_LETTERS[chart], j)).collect()
    };
    let odds = (1..=m).map(|a| format!("{}{}", ODD_LETTERS[chart], a)).collect();
    (evens, odds)
}

/// `ℂP^{n|m}` for `n ∈ {1, 2}` with the standard charts `U_i = {X_i ≠ 0}`.
///
/// On `U_i` the even coordinates are `X_j/X_i` and the odd ones `Θ_α/X_i`.
/// For `n = 1` they are named `z | theta·` on `U0` and `w | psi·` on `U1`;
/// for `n = 2` the even names carry the index `j`, e.g. `w0, w2` on `U1`.
pub fn build_projective(n: usize, m: usize) -> Result<Atlas> {
    if !(1..=2).contains(&n) {
        return Err(Error::Unsupported(format!("projective superspace of dimension {n}")));
    }
    let charts: Vec<Chart> = (0..=n)
        .map(|i| {
            let (e, o) = projective_names(n, m, i);
            Ok(Chart::new(format!("U{i}"), VarTable::from_lists(&e, &o)?))
        })
        .collect::<Result<_>>()?;
    let mut atlas = Atlas::new(format!("cp({n}|{m})"), (n, m), charts.clone())?;
    for i in 0..=n {
        for j in 0..=n {
            if i == j {
                continue;
            }
            let from = &charts[i];
            let to = &charts[j];
            // Homogeneous ratio X_k / X_i as an element over U_i.
            let ratio = |k: usize| -> Result<SuperScalar> {
                if k == i {
                    Ok(SuperScalar::one(&from.table))
                } else {
                    let name = if n == 1 { EVEN_LETTERS[i].to_string() } else { format!("{}{}", EVEN_LETTERS[i], k) };
                    SuperScalar::var(&from.table, &name)
                }
            };
            let inv_xj = ratio(j)?.invert()?;
            let mut images = BTreeMap::new();
            let (to_even, to_odd) = projective_names(n, m, j);
            let mut ks = (0..=n).filter(|&k| k != j);
            for name in &to_even {
                let k = ks.next().expect("index");
                images.insert(name.clone(), (&ratio(k)? * &inv_xj).to_string());
            }
            for (a, name) in to_odd.iter().enumerate() {
                let th = SuperScalar::var(&from.table, &format!("{}{}", ODD_LETTERS[i], a + 1))?;
                images.insert(name.clone(), (&th * &inv_xj).to_string());
            }
            atlas.insert(TransitionMap::parse(from, to, &images)?);
        }
    }
    Ok(atlas)
}

/// The conic `ℂP¹|²_ω` with `z = 1/w + λ ψ₁ψ₂/w³`, `θ_i = ψ_i/w²`.
pub fn build_super_conic(lambda: i64) -> Result<Atlas> {
    let u0 = Chart::new("U0", VarTable::from_lists(&["z"], &["theta1", "theta2"])?);
    let u1 = Chart::new("U1", VarTable::from_lists(&["w"], &["psi1", "psi2"])?);
    let mut atlas = Atlas::new(if lambda == 1 { "conic".to_string() } else { format!("conic({lambda})") }, (1, 2), vec![u0.clone(), u1.clone()])?;
    let mut images = BTreeMap::new();
    images.insert("z".to_string(), format!("1/w + {lambda}*psi1*psi2/w^3"));
    images.insert("theta1".to_string(), "psi1/w^2".to_string());
    images.insert("theta2".to_string(), "psi2/w^2".to_string());
    atlas.insert_with_inverse(TransitionMap::parse(&u1, &u0, &images)?)?;
    Ok(atlas)
}

/// Resolves an example by name: `affine`, `cp` or `conic`.
pub fn build_example(name: &str, dims: Option<(usize, usize)>) -> Result<Atlas> {
    match name {
        "affine" => {
            let (n, m) = dims.unwrap_or((1, 1));
            build_affine(n, m)
        }
        "cp" => {
            let (n, m) = dims.unwrap_or((1, 0));
            build_projective(n, m)
        }
        "conic" => build_super_conic(1),
        other => Err(Error::Unsupported(format!("unknown example `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::verify_atlas;
    use crate::superalgebra::parse_scalar;

    #[test]
    fn projective_line_transitions() {
        let a = build_projective(1, 2).unwrap();
        let t = a.transition("U1", "U0").unwrap();
        assert_eq!(*t.image("z").unwrap(), parse_scalar("1/w", &t.from.table).unwrap());
        assert_eq!(*t.image("theta1").unwrap(), parse_scalar("psi1/w", &t.from.table).unwrap());
        assert!(verify_atlas(&a).iter().all(|c| c.passed()));
    }

    #[test]
    fn projective_plane_cocycles() {
        let a = build_projective(2, 0).unwrap();
        let checks = verify_atlas(&a);
        assert_eq!(checks.iter().filter(|c| c.name.contains("cocycle")).count(), 6);
        assert!(checks.iter().all(|c| c.passed()));
        let t = a.transition("U0", "U1").unwrap();
        assert_eq!(*t.image("w2").unwrap(), parse_scalar("z2/z1", &t.from.table).unwrap());
    }

    #[test]
    fn conic_jacobian_entries() {
        let a = build_super_conic(1).unwrap();
        let t = a.transition("U1", "U0").unwrap();
        let j = crate::atlas::jacobian(t);
        assert_eq!(*j.get(0, 0), parse_scalar("-w^-2 - 3*w^-4*psi1*psi2", &t.from.table).unwrap());
        assert_eq!(*j.get(1, 1), parse_scalar("w^-2", &t.from.table).unwrap());
        assert!(verify_atlas(&a).iter().all(|c| c.passed()));
    }

    #[test]
    fn corrupted_conic_fails_inverse_check() {
        let a = build_super_conic(1).unwrap();
        let mut json = a.to_json();
        for t in &mut json.transitions {
            if t.from == "U1" {
                t.images.insert("z".into(), "1/w + 2*psi1*psi2/w^3".into());
            }
        }
        let bad = json.into_atlas().unwrap();
        let checks = verify_atlas(&bad);
        assert!(checks.iter().any(|c| c.name.contains("inverse") && !c.passed()));
    }

    #[test]
    fn affine_cover_is_consistent() {
        for (n, m) in [(1, 0), (2, 2), (3, 3), (1, 2)] {
            let a = build_affine_cover(n, m).unwrap();
            assert!(verify_atlas(&a).iter().all(|c| c.passed()), "{n}|{m}");
        }
    }

    #[test]
    fn rejects_higher_projective_spaces() {
        assert!(matches!(build_projective(3, 0), Err(Error::Unsupported(_))));
    }
}
