//! Truncated complexes: the monomial census, homology of `s` by bidegree,
//! the page-three homology of `Δ₂`, and exact solves for `s`-preimages.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::{random_closed_form, random_form, random_function, BerSection, Block, FormAlgebra, MixedForm};
use crate::error::{Error, Result};
use crate::report::CheckRecord;
use crate::superalgebra::linalg::{rank, Echelon, SparseVec};
use crate::superalgebra::{Gq, Monomial, SuperScalar, Var};

/// Degree window for function monomials: total p-degree at most `p_max` and
/// degree in the even coordinates at most `x_max`. Forms are taken up to
/// total degree `n + m + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub p_max: u32,
    pub x_max: u32,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { p_max: 4, x_max: 4 }
    }
}

impl Truncation {
    pub fn form_max(&self, alg: &FormAlgebra) -> u32 {
        alg.dim() as u32 + 1
    }
}

fn union(a: &Monomial, b: &Monomial) -> Monomial {
    Monomial { even: a.even.iter().zip(&b.even).map(|(x, y)| x + y).collect(), odd: a.odd | b.odd }
}

/// Monomials in `vars` of total degree exactly `degree`.
fn block_monomials(n_even: usize, vars: &[Var], degree: u32) -> Vec<Monomial> {
    fn go(vars: &[Var], left: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        let Some((&v, rest)) = vars.split_first() else {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        };
        match v {
            Var::Even(i) => {
                for e in 0..=left {
                    cur.even[i] = e as i32;
                    go(rest, left - e, cur, out);
                }
                cur.even[i] = 0;
            }
            Var::Odd(j) => {
                go(rest, left, cur, out);
                if left > 0 {
                    cur.odd |= 1 << j;
                    go(rest, left - 1, cur, out);
                    cur.odd &= !(1 << j);
                }
            }
        }
    }
    let mut out = Vec::new();
    go(vars, degree, &mut Monomial::one(n_even), &mut out);
    out
}

fn bidegree_monomials(alg: &FormAlgebra, i: u32, j: u32) -> Vec<Monomial> {
    let ne = alg.table().n_even();
    let etas = block_monomials(ne, alg.vars(Block::Dx), i);
    let fs = block_monomials(ne, alg.vars(Block::Dp), j);
    etas.iter().flat_map(|e| fs.iter().map(move |f| union(e, f))).collect()
}

/// All `η · F` with `deg η + deg F ≤ max_degree`.
pub fn form_monomials(alg: &FormAlgebra, max_degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for i in 0..=max_degree {
        for j in 0..=max_degree - i {
            out.extend(bidegree_monomials(alg, i, j));
        }
    }
    out
}

/// All function monomials `g(x) p^I` inside the truncation window.
pub fn function_monomials(alg: &FormAlgebra, trunc: Truncation) -> Vec<Monomial> {
    let ne = alg.table().n_even();
    let xs = alg.vars(Block::X);
    let (x_even, x_odd) = xs.split_at(alg.n);
    let x_odd_parts: Vec<Monomial> = (0..=x_odd.len() as u32).flat_map(|d| block_monomials(ne, x_odd, d)).collect();
    let x_parts: Vec<Monomial> = (0..=trunc.x_max)
        .flat_map(|d| block_monomials(ne, x_even, d))
        .flat_map(|e| x_odd_parts.iter().map(move |o| union(&e, o)).collect::<Vec<_>>())
        .collect();
    let p_parts: Vec<Monomial> = (0..=trunc.p_max).flat_map(|d| block_monomials(ne, alg.vars(Block::P), d)).collect();
    x_parts.iter().flat_map(|x| p_parts.iter().map(move |p| union(x, p))).collect()
}

/// Tallies of an exhaustive identity check.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Census {
    pub checked: usize,
    pub failures: usize,
    /// Monomials with `λ = 0`.
    pub lambda_zero: usize,
    /// Monomials where `λ = 0` and the form part is not `D`, or the reverse.
    pub lambda_mismatch: usize,
    pub first_failure: Option<String>,
}

impl Census {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.lambda_mismatch == 0 && self.checked > 0
    }
}

/// `(hs + sh)(w) = λ(w)·w` on every monomial of the census, for the given
/// contraction operator.
pub fn census_hs_with(alg: &FormAlgebra, trunc: Truncation, h: impl Fn(&MixedForm) -> MixedForm) -> Census {
    let forms = form_monomials(alg, trunc.form_max(alg));
    let funs = function_monomials(alg, trunc);
    let mut c = Census::default();
    for eta_f in &forms {
        for fun in &funs {
            let mono = union(eta_f, fun);
            let w = alg.monomial(mono.clone());
            let lhs = &h(&alg.s(&w)) + &alg.s(&h(&w));
            let lam = alg.lambda(&mono);
            c.checked += 1;
            if lhs != w.scale_int(lam) {
                c.failures += 1;
                if c.first_failure.is_none() {
                    c.first_failure = Some(w.to_string());
                }
            }
            if lam == 0 {
                c.lambda_zero += 1;
            }
            if (lam == 0) != alg.is_d_monomial(&mono) {
                c.lambda_mismatch += 1;
            }
        }
    }
    c
}

pub fn census_hs(alg: &FormAlgebra, trunc: Truncation) -> Census {
    census_hs_with(alg, trunc, |w| alg.h(w))
}

fn vector(w: &MixedForm) -> SparseVec<Monomial> {
    w.terms().clone()
}

/// `{(deg η, deg F): (dim H_s, #λ-zero monomials)}` for forms with `f = 1`
/// and total degree up to `max_degree`.
pub fn bidegree_table(alg: &FormAlgebra, max_degree: u32) -> BTreeMap<(u32, u32), (usize, usize)> {
    let mut out = BTreeMap::new();
    let s_rank = |i: i64, j: i64| -> usize {
        if i < 0 || j < 0 {
            return 0;
        }
        rank(bidegree_monomials(alg, i as u32, j as u32).into_iter().map(|m| vector(&alg.s(&alg.monomial(m)))))
    };
    for i in 0..=max_degree {
        for j in 0..=max_degree - i {
            let basis = bidegree_monomials(alg, i, j);
            let dim = basis.len();
            let h = dim - s_rank(i as i64, j as i64) - s_rank(i as i64 - 1, j as i64 - 1);
            let zeros = basis.iter().filter(|m| alg.lambda(m) == 0).count();
            out.insert((i, j), (h, zeros));
        }
    }
    out
}

/// Generators of the `s`-homology inside the truncation: `D · f` for every
/// function monomial `f` of the window, after checking by exact rank
/// computation that `D` spans the homology of the form factor.
pub fn s_homology_basis(alg: &FormAlgebra, trunc: Truncation) -> Result<Vec<MixedForm>> {
    let max = trunc.form_max(alg);
    if (max as usize) < alg.dim() {
        return Err(Error::Unsupported(format!("form degree {max} is too small to contain D")));
    }
    let table = bidegree_table(alg, max);
    let total: usize = table.values().map(|v| v.0).sum();
    let at_d = table.get(&(alg.n as u32, alg.m as u32)).map(|v| v.0).unwrap_or(0);
    if total != 1 || at_d != 1 {
        return Err(Error::ConventionViolation(format!("s-homology of the form factor is {total}-dimensional")));
    }
    let d = alg.monomial(alg.d_monomial());
    Ok(function_monomials(alg, trunc).into_iter().map(|f| &d * &alg.monomial(f)).collect())
}

/// Candidate preimages under `s` for the terms of `r`: every `η'F'·f` with
/// bidegree one lower in both factors than some term `η F f` of `r`.
fn s_candidates(alg: &FormAlgebra, r: &MixedForm) -> Vec<Monomial> {
    let mut groups = BTreeSet::new();
    for m in r.terms().keys() {
        let (i, j) = alg.profile(m).bidegree();
        if i > 0 && j > 0 {
            groups.insert((i - 1, j - 1, alg.split(m).2));
        }
    }
    let mut out = Vec::new();
    for (i, j, f) in groups {
        out.extend(bidegree_monomials(alg, i, j).into_iter().map(|ef| union(&ef, &f)));
    }
    out
}

/// A form `u` with `s(u) = r`, found by exact elimination, or `None` when `r`
/// is not `s`-exact.
pub fn s_preimage(alg: &FormAlgebra, r: &MixedForm) -> Option<MixedForm> {
    if r.is_zero() {
        return Some(SuperScalar::zero(alg.table()));
    }
    let cands = s_candidates(alg, r);
    let mut ech = Echelon::new();
    for c in &cands {
        ech.insert(vector(&alg.s(&alg.monomial(c.clone()))));
    }
    let red = ech.reduce(&vector(r));
    if !red.remainder.is_empty() {
        return None;
    }
    let u = SuperScalar::from_terms(alg.table(), red.combination.into_iter().map(|(g, c)| (cands[g].clone(), c)));
    debug_assert_eq!(&alg.s(&u), r);
    Some(u)
}

/// The `π*Ber(X)` part of an `s`-closed form: reduces modulo `s`-exact terms
/// with `D`-monomials eliminated last, so the remainder is `D · f`.
pub(super) fn ber_normal_form(alg: &FormAlgebra, r: &MixedForm) -> Result<BerSection> {
    let key = |m: &Monomial| (alg.is_d_monomial(m), m.clone());
    let to_keys = |w: &MixedForm| -> SparseVec<(bool, Monomial)> { w.terms().iter().map(|(m, c)| (key(m), c.clone())).collect() };
    let mut ech = Echelon::new();
    for c in s_candidates(alg, r) {
        ech.insert(to_keys(&alg.s(&alg.monomial(c))));
    }
    let rem = ech.reduce(&to_keys(r)).remainder;
    let mut f = SuperScalar::zero(alg.table());
    for ((is_d, m), c) in rem {
        if !is_d {
            return Err(Error::ConventionViolation("form is not s-closed modulo D-terms".into()));
        }
        f = &f + &SuperScalar::from_term(alg.table(), alg.split(&m).2, c);
    }
    Ok(BerSection { f })
}

/// `δ₃(D f) − D Δ₂ f` is `s`-exact, the zig-zag identity `d(S) = s(T)` holds,
/// and the reduced class equals `Δ₂ f`.
pub fn delta3_agrees_with_laplacian(alg: &FormAlgebra, f: &SuperScalar) -> Result<bool> {
    let d3 = alg.delta3_detail(&BerSection { f: f.clone() })?;
    let lap = alg.laplacian(f);
    let r = &d3.image - &alg.ber_form(&BerSection { f: lap.clone() });
    Ok(d3.zigzag_holds && d3.section.f == lap && s_preimage(alg, &r).is_some())
}

/// `(Δ₂K + KΔ₂)(f) = f − P(f)` on every function monomial of the window.
pub fn k_identity_census(alg: &FormAlgebra, trunc: Truncation) -> Result<Census> {
    let mut c = Census::default();
    for mono in function_monomials(alg, trunc) {
        let f = alg.monomial(mono);
        let lhs = &alg.laplacian(&alg.homotopy_k(&f)?) + &alg.homotopy_k(&alg.laplacian(&f))?;
        let rhs = &f - &alg.project_e3(&f);
        c.checked += 1;
        if lhs != rhs {
            c.failures += 1;
            if c.first_failure.is_none() {
                c.first_failure = Some(f.to_string());
            }
        }
    }
    Ok(c)
}

/// Homology of `Δ₂` on functions, split by the charges
/// `c_a = deg x_a − deg p_a` that `Δ₂` preserves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct E3Homology {
    pub components: usize,
    pub total_dim: usize,
    /// Charges with nonzero homology and its dimension there.
    pub nonzero: Vec<(Vec<i64>, usize)>,
    /// The representative `x_{n+1}⋯x_{n+m} p_1⋯p_n` is closed and not exact.
    pub representative_nontrivial: bool,
}

impl E3Homology {
    pub fn spanned_by_representative(&self) -> bool {
        self.total_dim == 1 && self.representative_nontrivial
    }
}

fn charge_component(alg: &FormAlgebra, charge: &[i64]) -> Vec<Monomial> {
    let mut out = vec![Monomial::one(alg.table().n_even())];
    for (a, &c) in charge.iter().enumerate() {
        let x = alg.vars(Block::X)[a];
        let p = alg.vars(Block::P)[a];
        let mut next = Vec::new();
        for base in &out {
            for e in 0..=1i64 {
                // For even x_a the odd p_a has exponent e; for odd x_a, x_a does.
                let (ex, ep) = if a < alg.n { (c + e, e) } else { (e, e - c) };
                if ex < 0 || ep < 0 {
                    continue;
                }
                let mut m = base.clone();
                for (v, k) in [(x, ex), (p, ep)] {
                    match v {
                        Var::Even(i) => m.even[i] += k as i32,
                        Var::Odd(j) => {
                            if k == 1 {
                                m.odd |= 1 << j
                            }
                        }
                    }
                }
                next.push(m);
            }
        }
        out = next;
    }
    out
}

/// The page-three homology `ker Δ₂ / im Δ₂` over all charge components whose
/// charges fit the truncation.
pub fn e3_homology(alg: &FormAlgebra, trunc: Truncation) -> E3Homology {
    let ranges: Vec<(i64, i64)> = (0..alg.dim())
        .map(|a| if a < alg.n { (-1, trunc.x_max as i64) } else { (1 - trunc.p_max as i64, 1) })
        .collect();
    let mut charge: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    let rep = alg.e3_representative();
    let mut out = E3Homology { components: 0, total_dim: 0, nonzero: Vec::new(), representative_nontrivial: false };
    'outer: loop {
        let basis = charge_component(alg, &charge);
        let images: Vec<SparseVec<Monomial>> = basis.iter().map(|m| vector(&alg.laplacian(&alg.monomial(m.clone())))).collect();
        let r = rank(images.iter().cloned());
        let h = basis.len() - 2 * r;
        out.components += 1;
        if h > 0 {
            out.total_dim += h;
            out.nonzero.push((charge.clone(), h));
            if basis.contains(&alg.e3_monomial()) {
                let mut ech = Echelon::new();
                for v in images {
                    ech.insert(v);
                }
                out.representative_nontrivial = alg.laplacian(&rep).is_zero() && !ech.contains(&vector(&rep));
            }
        }
        for a in 0..charge.len() {
            if charge[a] < ranges[a].1 {
                charge[a] += 1;
                continue 'outer;
            }
            charge[a] = ranges[a].0;
        }
        break;
    }
    out
}

fn record(name: String, ok: bool, anchor: &str, data: serde_json::Value) -> CheckRecord {
    CheckRecord::new(name, ok, anchor, data)
}

/// Every identity of the deformed de Rham complex and the BV Laplacian over
/// `ℂ^{n|m}` at the given truncation, with `trials` seeded samples for the
/// randomised checks.
pub fn bv_checks(n: usize, m: usize, trunc: Truncation, seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    let alg = FormAlgebra::new(n, m)?;
    let tag = format!("bv.{n}|{m}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 32 | m as u64));
    let mut out = Vec::new();

    let mut fails = [0usize; 4];
    for _ in 0..trials {
        let w = random_form(&alg, &mut rng, 4);
        fails[0] += !alg.d(&alg.d(&w)).is_zero() as usize;
        fails[1] += !alg.s(&alg.s(&w)).is_zero() as usize;
        fails[2] += !(&alg.d(&alg.s(&w)) + &alg.s(&alg.d(&w))).is_zero() as usize;
        let f = random_function(&alg, &mut rng, trunc, 4);
        fails[3] += !alg.laplacian(&alg.laplacian(&f)).is_zero() as usize;
    }
    for (name, k, anchor) in [
        ("d_squared", 0, "d∘d = 0"),
        ("s_squared", 1, "s∘s = 0"),
        ("d_s_commute", 2, "[d, s] = ds + sd = 0 for the odd operators d and s"),
        ("laplacian_squared", 3, "Δ₂∘Δ₂ = 0"),
    ] {
        out.push(record(format!("{tag}.{name}"), fails[k] == 0, anchor, json!({ "trials": trials, "failures": fails[k] })));
    }

    let census = census_hs(&alg, trunc);
    out.push(record(
        format!("{tag}.hs_census"),
        census.passed(),
        "hs + sh = λ·id, λ = 0 exactly on D-monomials",
        serde_json::to_value(&census).expect("census serialises"),
    ));

    let table = bidegree_table(&alg, trunc.form_max(&alg));
    let agree = table.values().all(|(h, z)| h == z);
    let rows: Vec<_> = table.iter().map(|((i, j), (h, z))| json!({ "bidegree": [i, j], "homology": h, "lambda_zero": z })).collect();
    let generator = alg.monomial(alg.d_monomial()).to_string();
    out.push(record(
        format!("{tag}.s_homology"),
        agree,
        "dim H_s per bidegree equals the λ-zero count",
        json!({ "generator": generator, "bidegrees": rows }),
    ));

    let k = k_identity_census(&alg, trunc)?;
    out.push(record(
        format!("{tag}.k_homotopy"),
        k.passed(),
        "Δ₂K + KΔ₂ = id − P",
        serde_json::to_value(&k).expect("census serialises"),
    ));

    let e3 = e3_homology(&alg, trunc);
    out.push(record(
        format!("{tag}.e3"),
        e3.spanned_by_representative(),
        "ker Δ₂ / im Δ₂ is spanned by x_{n+1}…x_{n+m}p₁…p_n",
        json!({ "representative": alg.e3_representative().to_string(), "homology": e3 }),
    ));

    let mut d3_checked = 0;
    let mut d3_fail = Vec::new();
    for mono in function_monomials(&alg, trunc) {
        let f = alg.monomial(mono);
        d3_checked += 1;
        if !delta3_agrees_with_laplacian(&alg, &f)? {
            d3_fail.push(f.to_string());
        }
    }
    out.push(record(
        format!("{tag}.delta3"),
        d3_fail.is_empty(),
        "δ₃ ≡ Δ₂ modulo s-exact terms",
        json!({ "checked": d3_checked, "failures": d3_fail }),
    ));

    let base = vec![Gq::zero(); n + m];
    let mut dr_fail = 0;
    for _ in 0..trials {
        let w = random_closed_form(&alg, &mut rng, 3);
        let sigma = alg.de_rham_homotopy(&w, &base)?;
        dr_fail += (alg.d(&sigma) != w) as usize;
    }
    let sigma = alg.de_rham_homotopy(&alg.omega(), &base)?;
    let eta = alg.primitive_eta();
    let exact_gap = &sigma - &eta;
    let gap_ok = alg.d(&eta) == alg.omega() && alg.d(&alg.de_rham_homotopy(&exact_gap, &base)?) == exact_gap;
    out.push(record(
        format!("{tag}.de_rham"),
        dr_fail == 0 && gap_ok,
        "closed forms of positive degree are exact; dη = ω",
        json!({ "trials": trials, "failures": dr_fail, "sigma_of_omega": sigma.to_string(), "eta": eta.to_string() }),
    ));
    Ok(out)
}
