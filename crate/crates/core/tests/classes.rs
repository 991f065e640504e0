use superbv::atlas::{bv_total_space, verify_atlas, Atlas};
use superbv::cech::{atiyah_cocycle, dw_decompose, ext_class_omega1, h_dims, line_bundle_on_p1, SheafData};
use superbv::examples::{build_affine, build_affine_cover, build_projective, build_super_conic, classify_1_2_over_p1};
use superbv::suites::dw_omega_entry;
use superbv::superalgebra::Gq;

fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/v1").join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn fixtures_match_the_builders() {
    let pairs = [
        ("conic.json", build_super_conic(1).unwrap()),
        ("cp1_0.json", build_projective(1, 0).unwrap()),
        ("cp1_2.json", build_projective(1, 2).unwrap()),
        ("cp2_0.json", build_projective(2, 0).unwrap()),
    ];
    for (file, built) in pairs {
        let loaded = Atlas::from_json_str(&fixture(file)).unwrap();
        assert_eq!(loaded.to_json(), built.to_json(), "{file}");
        assert!(verify_atlas(&loaded).iter().all(|c| c.passed()), "{file}");
    }
}

#[test]
fn corrupted_fixture_fails_the_inverse_check() {
    let a = Atlas::from_json_str(&fixture("conic_corrupted.json")).unwrap();
    let failed: Vec<_> = verify_atlas(&a).into_iter().filter(|c| !c.passed()).collect();
    assert!(!failed.is_empty());
}

#[test]
fn line_bundle_atiyah_class_is_k_dz_over_z() {
    for k in -4..=4i64 {
        let (_, _, s) = atiyah_cocycle(&line_bundle_on_p1(k).unwrap(), "U0", "U1").unwrap();
        assert_eq!(s.split(), k == 0, "k = {k}");
        let c = s.class.coefficient_of(0, "z^-1").unwrap();
        assert_eq!(c, Gq::from_int(k), "k = {k}");
    }
}

#[test]
fn riemann_roch_on_the_line() {
    for k in -6..=6i64 {
        let (h0, h1) = h_dims(k).unwrap();
        assert_eq!(h0 as i64 - h1 as i64, k + 1);
    }
}

#[test]
fn ext_splits_exactly_when_the_tangent_atiyah_class_vanishes() {
    let examples = [
        build_affine(1, 1).unwrap(),
        build_affine_cover(1, 1).unwrap(),
        build_affine_cover(2, 0).unwrap(),
        build_projective(1, 0).unwrap(),
        build_projective(1, 1).unwrap(),
        build_super_conic(1).unwrap(),
    ];
    for x in &examples {
        let ext_split = ext_class_omega1(&bv_total_space(x).unwrap()).unwrap().iter().all(|r| r.split());
        let at_split = if x.charts.len() == 1 {
            true
        } else {
            let (from, to) = x.overlaps()[0].clone();
            atiyah_cocycle(&SheafData::tangent(x), &from, &to).unwrap().2.split()
        };
        assert_eq!(ext_split, at_split, "{}", x.name);
    }
}

#[test]
fn omega_component_tracks_the_deformation_parameter() {
    for lambda in -2..=3i64 {
        let dw = dw_decompose(&build_super_conic(lambda).unwrap()).unwrap();
        assert!(dw.sums_back());
        assert_eq!(dw_omega_entry(&dw), Some(Gq::from_int(lambda)));
        assert_eq!(dw.omega.is_zero(), lambda == 0);
        let c = classify_1_2_over_p1(-2, -2, !dw.omega.is_zero()).unwrap();
        assert_eq!(c.structure == "non-projected", lambda != 0, "lambda = {lambda}");
    }
}
