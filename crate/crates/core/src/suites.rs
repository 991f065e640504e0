//! Named groups of checks over an atlas or a model space, shared by the
//! command line driver and the acceptance tests.

use serde_json::{json, Value};

use crate::atlas::{berezinian_square_checks, bv_total_space, verify_atlas, Atlas};
use crate::bvforms::{bv_checks, Truncation};
use crate::cech::{atiyah::atiyah_cocycle_checks, atiyah_cocycle, dw_decompose, ext_class_omega1, DwComponents, SheafData};
use crate::error::Result;
use crate::examples::{
    build_super_conic, classify_1_2_over_p1, conic_equation_check, conic_h0, conic_line_bundle_sections,
};
use crate::report::CheckRecord;
use crate::superalgebra::Gq;

/// Overlaps leaving the first chart, in name order.
fn first_overlaps(atlas: &Atlas) -> Vec<String> {
    let first = &atlas.charts[0].name;
    atlas.charts.iter().filter(|c| &c.name != first).map(|c| c.name.clone()).collect()
}

fn prefixed(prefix: &str, mut checks: Vec<CheckRecord>) -> Vec<CheckRecord> {
    for c in &mut checks {
        c.name = format!("{prefix}.{}", c.name);
    }
    checks
}

/// The atlas checks, the same checks on the BV total space, and
/// `Ber(Ω¹_M) = Ber(Ω¹_X)²` on every overlap.
pub fn atlas_suite(atlas: &Atlas) -> Vec<CheckRecord> {
    let mut out = verify_atlas(atlas);
    let total = bv_total_space(atlas).and_then(|m| {
        let mut v = prefixed("bv", verify_atlas(&m.atlas));
        v.extend(berezinian_square_checks(&m)?);
        Ok(v)
    });
    match total {
        Ok(v) => out.extend(v),
        Err(e) => out.push(CheckRecord::new(
            format!("{}.bv_total_space", atlas.name),
            false,
            "the BV total space is built from the atlas",
            json!({ "error": e.to_string() }),
        )),
    }
    out
}

fn dw_record(name: &str, dw: &DwComponents) -> CheckRecord {
    let label = |i: usize| dw.labels[i].clone();
    let nonzero = [&dw.red, &dw.omega, &dw.ferm].iter().filter(|c| !c.is_zero()).count();
    CheckRecord::new(
        format!("{name}.dw_decomposition"),
        dw.sums_back(),
        "the restricted Atiyah class splits into reduced, ω and fermionic parts",
        json!({
            "nonzero_components": nonzero,
            "red": dw.red.to_json(label),
            "omega": dw.omega.to_json(label),
            "ferm": dw.ferm.to_json(label),
        }),
    )
}

/// The coefficient of `z⁻¹` in the `(θ₂; θ₁, z)` entry of the `ω` part.
pub fn dw_omega_entry(dw: &DwComponents) -> Option<Gq> {
    let i = dw.labels.iter().position(|l| l == "(theta2;theta1,z)")?;
    dw.omega.coefficient_of(i, "z^-1").ok()
}

/// The Atiyah class of the tangent sheaf on each overlap, the cocycle
/// condition on triple overlaps, and for `1|m` atlases over the projective
/// line the three-part decomposition.
pub fn atiyah_suite(atlas: &Atlas) -> Result<Vec<CheckRecord>> {
    let name = &atlas.name;
    let sheaf = SheafData::tangent(atlas);
    let mut out = Vec::new();
    if atlas.charts.len() == 1 {
        out.push(CheckRecord::new(
            format!("{name}.atiyah.trivial"),
            true,
            "one chart carries no nonzero Čech 1-cochain",
            json!({ "split": true }),
        ));
        return Ok(out);
    }
    let first = atlas.charts[0].name.clone();
    for v in first_overlaps(atlas) {
        let (p, _, sol) = atiyah_cocycle(&sheaf, &first, &v)?;
        out.push(CheckRecord::new(
            format!("{name}.atiyah.{first}->{v}"),
            true,
            "Atiyah class of the tangent sheaf in window normal form",
            json!({ "split": sol.split(), "class": sol.class.to_json(|i| p.label(i)), "bound": sol.bound }),
        ));
    }
    out.extend(prefixed(name, atiyah_cocycle_checks(&sheaf)?));
    if atlas.dims.0 == 1 && atlas.charts.len() == 2 {
        out.push(dw_record(name, &dw_decompose(atlas)?));
    }
    Ok(out)
}

fn strings(v: &[crate::superalgebra::SuperScalar]) -> Value {
    json!(v.iter().map(|f| f.to_string()).collect::<Vec<_>>())
}

/// The class of `0 → π*Ω¹_X → Ω¹_M → π*T_X → 0` on each overlap.
pub fn ext_suite(atlas: &Atlas) -> Result<Vec<CheckRecord>> {
    let name = &atlas.name;
    let m = bv_total_space(atlas)?;
    let results = ext_class_omega1(&m)?;
    if results.is_empty() {
        return Ok(vec![CheckRecord::new(
            format!("{name}.ext.split"),
            true,
            "one chart: the zero splitting solves C + M_V B − A M_U = 0",
            json!({ "split": true, "witness": { "u": "0", "v": "0" } }),
        )]);
    }
    Ok(results
        .iter()
        .map(|r| {
            let mut data = json!({
                "split": r.split(),
                "fiber_linear": r.fiber_linear,
                "residual_zero": r.residual_zero,
                "cocycle": strings(&r.cocycle),
                "bound": r.solution.bound,
            });
            if r.split() {
                data["witness"] = json!({ "u": strings(&r.solution.witness.u), "v": strings(&r.solution.witness.v) });
            } else {
                data["class"] = r.class().to_json(|i| r.label(i));
            }
            CheckRecord::new(
                format!("{name}.ext.{}->{}", r.from, r.to),
                r.fiber_linear && r.residual_zero,
                "the extension class is fiber-linear and its witness solves the splitting equation",
                data,
            )
        })
        .collect())
}

pub fn bv_suite(n: usize, m: usize, trunc: Truncation, seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    bv_checks(n, m, trunc, seed, trials)
}

/// The conic end to end: atlas, line bundle sections, `H⁰(L)`, the quadric
/// and its normal form, the classification and the decomposition.
pub fn conic_demo_suite() -> Result<Vec<CheckRecord>> {
    let atlas = build_super_conic(1)?;
    let mut out = atlas_suite(&atlas);
    let (bundle, sections) = conic_line_bundle_sections()?;
    for s in &sections {
        let r = s.overlap_residual(&bundle)?;
        out.push(CheckRecord::new(
            format!("conic.section.{}", s.name),
            r.is_zero(),
            "local representatives agree on the overlap",
            json!({ "reps": s.local_reps.iter().map(|(k, v)| (k.clone(), v.to_string())).collect::<std::collections::BTreeMap<_, _>>(), "residual": r.to_string() }),
        ));
    }
    let h0 = conic_h0()?;
    out.push(CheckRecord::new("conic.h0", h0 == (3, 2), "H⁰(L) has dimension 3|2", json!({ "even": h0.0, "odd": h0.1 })));
    let eq = conic_equation_check()?;
    out.push(CheckRecord::new(
        "conic.equation",
        eq.holds(),
        "the sections satisfy the quadric, which T takes to the diagonal form",
        serde_json::to_value(&eq).expect("serialises"),
    ));
    let dw = dw_decompose(&atlas)?;
    let omega = dw_omega_entry(&dw);
    let nonzero = [&dw.red, &dw.omega, &dw.ferm].iter().all(|c| !c.is_zero());
    out.push(dw_record("conic", &dw));
    out.push(CheckRecord::new(
        "conic.omega_calibration",
        nonzero && omega == Some(Gq::from_int(1)),
        "all three components are nonzero and ω_C = 1",
        json!({ "omega_entry": omega.map(|g| g.to_string()) }),
    ));
    let c = classify_1_2_over_p1(-2, -2, !dw.omega.is_zero())?;
    out.push(CheckRecord::new(
        "conic.classification",
        c.structure == "non-projected",
        "O(−2) ⊕ O(−2) admits a non-projected structure",
        serde_json::to_value(&c).expect("serialises"),
    ));
    Ok(out)
}
