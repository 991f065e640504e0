//! The sign and normalisation choices recorded in `fixtures/v1/conventions.json`
//! are the ones the library computes with.

use std::path::PathBuf;

use serde_json::Value;

use superbv::atlas::bv_total_space;
use superbv::bvforms::{census_hs_with, function_monomials, BerSection, FormAlgebra, Truncation};
use superbv::cech::{atiyah_cocycle, dw_decompose, ext_class_omega1, SheafData};
use superbv::examples::{build_projective, build_super_conic, conic_equation_check};
use superbv::suites::dw_omega_entry;
use superbv::superalgebra::{parse_scalar, Gq, VarTable};

fn conventions() -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/v1/conventions.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn int(v: &Value) -> i64 {
    v.as_i64().unwrap()
}

#[test]
fn extension_class_is_the_atiyah_class() {
    let c = conventions();
    let x = build_projective(1, 0).unwrap();
    let ext = ext_class_omega1(&bv_total_space(&x).unwrap()).unwrap();
    let (_, _, at) = atiyah_cocycle(&SheafData::tangent(&x), "U0", "U1").unwrap();
    let e = ext[0].class().coefficient_of(0, "z^3*p_z").unwrap();
    let a = at.class.coefficient_of(0, "z^-1").unwrap();
    assert_eq!(e, &a * &Gq::from_int(int(&c["ext_over_atiyah"])));
}

#[test]
fn omega_entry_is_linear_in_lambda() {
    let c = conventions();
    let entry = &c["omega_entry"];
    assert_eq!(entry["label"], "(theta2;theta1,z)");
    assert_eq!(entry["monomial"], "z^-1");
    for lambda in [-2, 1, 3] {
        let dw = dw_decompose(&build_super_conic(lambda).unwrap()).unwrap();
        assert_eq!(dw_omega_entry(&dw), Some(Gq::from_int(lambda * int(&entry["per_unit_lambda"]))));
    }
}

#[test]
fn delta3_sign_depends_on_total_dimension() {
    assert_eq!(conventions()["delta3_image_sign"], "(-1)^(n+m)");
    let trunc = Truncation { p_max: 2, x_max: 2 };
    for (n, m) in [(1, 0), (0, 1), (1, 1), (2, 1)] {
        let alg = FormAlgebra::new(n, m).unwrap();
        let sign = if (n + m) % 2 == 0 { 1 } else { -1 };
        for mono in function_monomials(&alg, trunc) {
            let detail = alg.delta3_detail(&BerSection { f: alg.monomial(mono) }).unwrap();
            assert!(detail.zigzag_holds);
            assert_eq!(detail.image, alg.d(&detail.t).scale_int(sign), "{n}|{m}");
        }
    }
}

#[test]
fn contraction_carries_no_factorwise_sign() {
    assert_eq!(conventions()["h_contraction"], "unsigned");
    let trunc = Truncation { p_max: 2, x_max: 2 };
    let alg = FormAlgebra::new(1, 2).unwrap();
    assert!(census_hs_with(&alg, trunc, |w| alg.h(w)).passed());
    assert!(!census_hs_with(&alg, trunc, |w| alg.h_factorwise(w)).passed());
}

#[test]
fn conic_quadric_and_normal_form() {
    let c = conventions();
    let h = VarTable::from_lists(&["X0", "X1", "X2"], &["Theta1", "Theta2"]).unwrap();
    let render = |key: &str| parse_scalar(c[key].as_str().unwrap(), &h).unwrap().to_string();
    let eq = conic_equation_check().unwrap();
    assert!(eq.holds());
    assert_eq!(eq.equation, render("conic_quadric"));
    assert_eq!(eq.target, render("conic_normal_form"));
    assert_ne!(eq.opposite_sign_u0, "0");
}
