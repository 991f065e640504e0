//! Atlases of supermanifolds and of their BV total spaces.
//!
//! A chart is a [`VarTable`]. A transition from chart `F` to chart `T` stores
//! the coordinates of `T` as elements over the coordinates of `F`. Every
//! overlap is stored in both directions so that all functions can be pulled
//! back to either side.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::report::CheckRecord;
use crate::superalgebra::{parse_scalar, Gq, Monomial, Parity, SuperMatrix, SuperScalar, Var, VarTable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub name: String,
    pub table: Arc<VarTable>,
}

impl Chart {
    pub fn new(name: impl Into<String>, table: Arc<VarTable>) -> Self {
        Chart { name: name.into(), table }
    }

    /// Coordinate parities in [`VarTable::vars`] order.
    pub fn parities(&self) -> Vec<Parity> {
        self.table.vars().into_iter().map(Var::parity).collect()
    }

    pub fn coordinates(&self) -> Vec<SuperScalar> {
        self.table.vars().into_iter().map(|v| SuperScalar::from_var(&self.table, v)).collect()
    }
}

/// Coordinates of the target chart written over the source chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMap {
    pub from: Chart,
    pub to: Chart,
    /// One image per coordinate of `to`, in [`VarTable::vars`] order.
    pub images: Vec<SuperScalar>,
}

impl TransitionMap {
    pub fn new(from: Chart, to: Chart, images: Vec<SuperScalar>) -> Result<Self> {
        let t = TransitionMap { from, to, images };
        t.check_shape()?;
        Ok(t)
    }

    /// Builds a transition from textual images keyed by target coordinate.
    pub fn parse(from: &Chart, to: &Chart, images: &BTreeMap<String, String>) -> Result<Self> {
        let mut out = Vec::new();
        for v in to.table.vars() {
            let name = to.table.name(v);
            let text = images
                .get(name)
                .ok_or_else(|| Error::AtlasFormat(format!("transition {}→{} lacks image of `{name}`", from.name, to.name)))?;
            out.push(parse_scalar(text, &from.table)?);
        }
        if let Some(extra) = images.keys().find(|k| !to.table.contains(k)) {
            return Err(Error::AtlasFormat(format!("`{extra}` is not a coordinate of chart {}", to.name)));
        }
        TransitionMap::new(from.clone(), to.clone(), out)
    }

    fn check_shape(&self) -> Result<()> {
        if self.images.len() != self.to.table.vars().len() {
            return Err(Error::DimensionMismatch(format!("transition {}→{} has wrong number of images", self.from.name, self.to.name)));
        }
        for (v, img) in self.to.table.vars().into_iter().zip(&self.images) {
            if !Arc::ptr_eq(img.table(), &self.from.table) && **img.table() != *self.from.table {
                return Err(Error::IncompatibleTables("transition image over a foreign table".into()));
            }
            if !img.has_parity(v.parity()) {
                return Err(Error::ParityMismatch(format!(
                    "image of `{}` in {}→{} is not {}",
                    self.to.table.name(v),
                    self.from.name,
                    self.to.name,
                    v.parity()
                )));
            }
        }
        Ok(())
    }

    pub fn image(&self, name: &str) -> Result<&SuperScalar> {
        let pos = self.to.table.vars().iter().position(|&v| self.to.table.name(v) == name);
        pos.map(|p| &self.images[p]).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Pulls a function on the target chart back to the source chart.
    pub fn pull_back(&self, f: &SuperScalar) -> Result<SuperScalar> {
        f.substitute(&self.images, &self.from.table)
    }

    /// Images rendered as text, keyed by target coordinate.
    pub fn images_text(&self) -> BTreeMap<String, String> {
        self.to
            .table
            .vars()
            .into_iter()
            .zip(&self.images)
            .map(|(v, img)| (self.to.table.name(v).to_string(), img.to_string()))
            .collect()
    }
}

/// `t2 ∘ t1`: the coordinates of `t2.to` over `t1.from`.
pub fn compose(t1: &TransitionMap, t2: &TransitionMap) -> Result<TransitionMap> {
    if t1.to != t2.from {
        return Err(Error::AtlasFormat(format!("cannot compose {}→{} with {}→{}", t1.from.name, t1.to.name, t2.from.name, t2.to.name)));
    }
    let images = t2.images.iter().map(|f| t1.pull_back(f)).collect::<Result<Vec<_>>>()?;
    TransitionMap::new(t1.from.clone(), t2.to.clone(), images)
}

/// Matrix of left derivatives `∂z_b/∂x_a` with rows indexed by the source
/// coordinates `x_a` and columns by the target coordinates `z_b`.
pub fn jacobian(t: &TransitionMap) -> SuperMatrix {
    let rows = t.from.table.vars();
    let mut m = SuperMatrix::zeros(&t.from.table, t.from.parities(), t.to.parities());
    for (a, &xa) in rows.iter().enumerate() {
        for (b, img) in t.images.iter().enumerate() {
            m.set(a, b, img.derivative(xa));
        }
    }
    m
}

/// Inverts a monomial map `y_i = c_i Π_j x_j^{M_ij}` of bodies.
fn invert_monomial_body(t: &TransitionMap) -> Result<Vec<SuperScalar>> {
    let p = t.from.table.n_even();
    if t.to.table.n_even() != p {
        return Err(Error::DimensionMismatch("even dimensions differ".into()));
    }
    let mut mat = vec![vec![0i64; p]; p];
    let mut coeffs = Vec::new();
    for i in 0..p {
        let body = t.images[i].reduced();
        if body.len() != 1 {
            return Err(Error::Unsupported(format!(
                "inverting a transition whose body `{body}` is not a monomial"
            )));
        }
        let (m, c) = body.terms().iter().next().expect("one term");
        for j in 0..p {
            mat[i][j] = m.even[j] as i64;
        }
        coeffs.push(c.clone());
    }
    let inv = integer_inverse(&mat).ok_or_else(|| {
        Error::NotInvertible("body of the transition has a non-unimodular exponent matrix".into())
    })?;
    // x_j = Π_k (y_k / c_k)^{N_jk}
    let mut out = Vec::new();
    for row in inv.iter().take(p) {
        let mut coeff = Gq::from_int(1);
        let mut mono = Monomial::one(p);
        for (k, &e) in row.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let ck = coeffs[k].inv().expect("monomial coefficient is nonzero");
            let powered = if e > 0 { ck.pow(e as u32) } else { coeffs[k].pow((-e) as u32) };
            coeff = &coeff * &powered;
            mono.even[k] = e as i32;
        }
        out.push(SuperScalar::from_term(&t.to.table, mono, coeff));
    }
    Ok(out)
}

fn integer_inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let n = m.len();
    // Gauss-Jordan over the rationals, then check integrality.
    let mut a: Vec<Vec<num_rational::Rational64>> =
        m.iter().map(|r| r.iter().map(|&x| num_rational::Rational64::from_integer(x)).collect()).collect();
    let mut inv: Vec<Vec<num_rational::Rational64>> = (0..n)
        .map(|i| (0..n).map(|j| num_rational::Rational64::from_integer((i == j) as i64)).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] != num_rational::Rational64::from_integer(0))?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                for j in 0..n {
                    let (ac, ic) = (a[col][j], inv[col][j]);
                    a[r][j] -= f * ac;
                    inv[r][j] -= f * ic;
                }
            }
        }
    }
    inv.iter().map(|r| r.iter().map(|x| x.is_integer().then(|| x.to_integer())).collect()).collect()
}

/// Inverse of a transition map.
///
/// The body is inverted exactly (monomial bodies only), then Newton steps
/// `x ← x − r·J⁻¹` correct the nilpotent part. Each step squares the error
/// in the ideal generated by the odd target coordinates, so at most `q + 1`
/// steps are needed.
pub fn invert_transition(t: &TransitionMap) -> Result<TransitionMap> {
    let from = &t.from;
    let to = &t.to;
    if from.table.n_even() != to.table.n_even() || from.table.n_odd() != to.table.n_odd() {
        return Err(Error::DimensionMismatch("charts of different dimension".into()));
    }
    let mut x: Vec<SuperScalar> = invert_monomial_body(t)?;
    x.extend((0..from.table.n_odd()).map(|_| SuperScalar::zero(&to.table)));
    let jac = jacobian(t);
    let targets = to.coordinates();
    for _ in 0..=to.table.n_odd() + 1 {
        let residual: Vec<SuperScalar> =
            t.images.iter().zip(&targets).map(|(f, y)| Ok(&f.substitute(&x, &to.table)? - y)).collect::<Result<_>>()?;
        if residual.iter().all(SuperScalar::is_zero) {
            return TransitionMap::new(to.clone(), from.clone(), x);
        }
        let j_at = jac.map(|e| e.substitute(&x, &to.table))?;
        let j_inv = j_at.inverse()?;
        for (a, xa) in x.iter_mut().enumerate() {
            let mut delta = SuperScalar::zero(&to.table);
            for (b, rb) in residual.iter().enumerate() {
                delta = &delta + &(rb * j_inv.get(b, a));
            }
            *xa = &*xa - &delta;
        }
    }
    Err(Error::NotInvertible(format!("Newton inversion of {}→{} did not converge", from.name, to.name)))
}

/// A supermanifold presented by charts and transition maps.
#[derive(Clone, Debug)]
pub struct Atlas {
    pub name: String,
    pub dims: (usize, usize),
    pub charts: Vec<Chart>,
    transitions: BTreeMap<(String, String), TransitionMap>,
}

impl Atlas {
    pub fn new(name: impl Into<String>, dims: (usize, usize), charts: Vec<Chart>) -> Result<Self> {
        for c in &charts {
            if (c.table.n_even(), c.table.n_odd()) != dims {
                return Err(Error::DimensionMismatch(format!("chart {} is not {}|{}", c.name, dims.0, dims.1)));
            }
        }
        Ok(Atlas { name: name.into(), dims, charts, transitions: BTreeMap::new() })
    }

    pub fn chart(&self, name: &str) -> Result<&Chart> {
        self.charts.iter().find(|c| c.name == name).ok_or_else(|| Error::AtlasFormat(format!("no chart `{name}`")))
    }

    /// Stores a transition as given.
    pub fn insert(&mut self, t: TransitionMap) {
        self.transitions.insert((t.from.name.clone(), t.to.name.clone()), t);
    }

    /// Stores a transition and, unless present, its inverse.
    pub fn insert_with_inverse(&mut self, t: TransitionMap) -> Result<()> {
        let key = (t.to.name.clone(), t.from.name.clone());
        if !self.transitions.contains_key(&key) {
            let inv = invert_transition(&t)?;
            self.insert(inv);
        }
        self.insert(t);
        Ok(())
    }

    pub fn transition(&self, from: &str, to: &str) -> Option<&TransitionMap> {
        self.transitions.get(&(from.to_string(), to.to_string()))
    }

    pub fn transitions(&self) -> impl Iterator<Item = &TransitionMap> {
        self.transitions.values()
    }

    /// Unordered overlaps `(a, b)` with `a` before `b` in chart order.
    pub fn overlaps(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, a) in self.charts.iter().enumerate() {
            for b in &self.charts[i + 1..] {
                if self.transition(&a.name, &b.name).is_some() {
                    out.push((a.name.clone(), b.name.clone()));
                }
            }
        }
        out
    }

    pub fn from_json_str(text: &str) -> Result<Atlas> {
        let raw: AtlasJson = serde_json::from_str(text).map_err(|e| Error::AtlasFormat(e.to_string()))?;
        raw.into_atlas()
    }

    pub fn to_json(&self) -> AtlasJson {
        AtlasJson {
            name: Some(self.name.clone()),
            dims: [self.dims.0, self.dims.1],
            charts: self
                .charts
                .iter()
                .map(|c| ChartJson { name: c.name.clone(), even: c.table.evens().to_vec(), odd: c.table.odds().to_vec() })
                .collect(),
            transitions: self
                .transitions
                .values()
                .map(|t| TransitionJson { from: t.from.name.clone(), to: t.to.name.clone(), images: t.images_text() })
                .collect(),
        }
    }
}

/// On-disk atlas description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtlasJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dims: [usize; 2],
    pub charts: Vec<ChartJson>,
    pub transitions: Vec<TransitionJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartJson {
    pub name: String,
    pub even: Vec<String>,
    pub odd: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionJson {
    pub from: String,
    pub to: String,
    pub images: BTreeMap<String, String>,
}

impl AtlasJson {
    /// Builds the atlas; a transition given in one direction only gets its
    /// inverse computed.
    pub fn into_atlas(self) -> Result<Atlas> {
        let charts = self
            .charts
            .iter()
            .map(|c| Ok(Chart::new(c.name.clone(), VarTable::from_lists(&c.even, &c.odd)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut atlas = Atlas::new(self.name.unwrap_or_else(|| "atlas".into()), (self.dims[0], self.dims[1]), charts)?;
        let mut parsed = Vec::new();
        for t in &self.transitions {
            let from = atlas.chart(&t.from)?.clone();
            let to = atlas.chart(&t.to)?.clone();
            parsed.push(TransitionMap::parse(&from, &to, &t.images)?);
        }
        for t in &parsed {
            atlas.insert(t.clone());
        }
        for t in parsed {
            atlas.insert_with_inverse(t)?;
        }
        Ok(atlas)
    }
}

/// Residual summary: the nonzero differences, rendered as text.
fn residual_text(diffs: &[SuperScalar]) -> Vec<String> {
    diffs.iter().filter(|d| !d.is_zero()).map(|d| d.to_string()).collect()
}

/// Parity, mutual-inverse and triple-cocycle checks for every stored map.
pub fn verify_atlas(atlas: &Atlas) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let prefix = &atlas.name;
    for t in atlas.transitions() {
        let parity_ok = t.check_shape().is_ok();
        out.push(CheckRecord::new(
            format!("{prefix}.parity.{}->{}", t.from.name, t.to.name),
            parity_ok,
            "transition maps are even morphisms",
            json!({ "images": t.images_text() }),
        ));
        if let Some(back) = atlas.transition(&t.to.name, &t.from.name) {
            let (ok, residual) = match compose(t, back) {
                Ok(id) => {
                    let diffs: Vec<SuperScalar> =
                        id.images.iter().zip(t.from.coordinates()).map(|(a, b)| a - &b).collect();
                    let r = residual_text(&diffs);
                    (r.is_empty(), json!(r))
                }
                Err(e) => (false, json!(e.to_string())),
            };
            out.push(CheckRecord::new(
                format!("{prefix}.inverse.{}->{}", t.from.name, t.to.name),
                ok,
                "transition maps are mutually inverse",
                json!({ "residual": residual }),
            ));
        }
    }
    for a in &atlas.charts {
        for b in &atlas.charts {
            for c in &atlas.charts {
                if a.name == b.name || b.name == c.name || a.name == c.name {
                    continue;
                }
                let (Some(ab), Some(bc), Some(ac)) =
                    (atlas.transition(&a.name, &b.name), atlas.transition(&b.name, &c.name), atlas.transition(&a.name, &c.name))
                else {
                    continue;
                };
                let (ok, residual) = match compose(ab, bc) {
                    Ok(abc) => {
                        let diffs: Vec<SuperScalar> = abc.images.iter().zip(&ac.images).map(|(x, y)| x - y).collect();
                        let r = residual_text(&diffs);
                        (r.is_empty(), json!(r))
                    }
                    Err(e) => (false, json!(e.to_string())),
                };
                out.push(CheckRecord::new(
                    format!("{prefix}.cocycle.{}->{}->{}", a.name, b.name, c.name),
                    ok,
                    "transition maps compose on triple overlaps",
                    json!({ "residual": residual }),
                ));
            }
        }
    }
    out.sort_by(|x, y| x.name.cmp(&y.name));
    out
}

/// Name of the fiber coordinate paired with a base coordinate.
pub fn fiber_name(base: &str) -> String {
    format!("p_{base}")
}

/// The total space of the parity-shifted cotangent bundle of an atlas.
///
/// Each chart gains fiber coordinates `p_a` of parity `|x_a| + 1`. For a base
/// transition `x → z` the fiber coordinates transform as
/// `q_b = Σ_a (−1)^{|x_a|+|z_b|} (∂x_a/∂z_b) p_a`, which is the rule
/// `p_a = Σ_b (−1)^{|x_a|+|z_b|} (∂z_b/∂x_a) q_b` solved for `q`.
#[derive(Clone, Debug)]
pub struct BvTotalSpace {
    pub base: Atlas,
    pub atlas: Atlas,
}

impl BvTotalSpace {
    /// The chart of the total space over a base chart.
    pub fn chart(&self, name: &str) -> Result<&Chart> {
        self.atlas.chart(name)
    }

    /// Base coordinates of a total-space chart, as elements over it.
    pub fn base_coordinates(&self, name: &str) -> Result<Vec<SuperScalar>> {
        let base = self.base.chart(name)?;
        let tot = self.atlas.chart(name)?;
        base.table.vars().into_iter().map(|v| SuperScalar::var(&tot.table, base.table.name(v))).collect()
    }

    /// Fiber coordinates of a total-space chart, paired with the base order.
    pub fn fiber_coordinates(&self, name: &str) -> Result<Vec<SuperScalar>> {
        let base = self.base.chart(name)?;
        let tot = self.atlas.chart(name)?;
        base.table.vars().into_iter().map(|v| SuperScalar::var(&tot.table, &fiber_name(base.table.name(v)))).collect()
    }

    pub fn is_fiber_variable(&self, chart: &str, var_name: &str) -> bool {
        self.base.chart(chart).map(|c| !c.table.contains(var_name)).unwrap_or(false)
    }
}

/// Builds the BV total space `M = Tot(ΠΩ¹_X)` with its transition maps.
pub fn bv_total_space(x: &Atlas) -> Result<BvTotalSpace> {
    let mut charts = Vec::new();
    for c in &x.charts {
        let mut vars: Vec<(String, Parity)> = c.table.entries();
        for (name, p) in c.table.entries() {
            vars.push((fiber_name(&name), p.flip()));
        }
        charts.push(Chart::new(c.name.clone(), VarTable::new(&vars)?));
    }
    let n = x.dims.0 + x.dims.1;
    let mut m = Atlas::new(format!("M({})", x.name), (n, n), charts)?;
    for t in x.transitions() {
        let back = x
            .transition(&t.to.name, &t.from.name)
            .ok_or_else(|| Error::AtlasFormat(format!("{}→{} has no stored inverse", t.from.name, t.to.name)))?;
        let from_m = m.chart(&t.from.name)?.clone();
        let to_m = m.chart(&t.to.name)?.clone();
        let jac_back = jacobian(back);
        let x_vars = t.from.table.vars();
        let z_vars = t.to.table.vars();
        let mut by_name = HashMap::new();
        for (zb, img) in z_vars.iter().zip(&t.images) {
            by_name.insert(t.to.table.name(*zb).to_string(), img.embed(&from_m.table)?);
        }
        for (b, zb) in z_vars.iter().enumerate() {
            let mut q = SuperScalar::zero(&from_m.table);
            for (a, xa) in x_vars.iter().enumerate() {
                let d = t.pull_back(jac_back.get(b, a))?.embed(&from_m.table)?;
                if d.is_zero() {
                    continue;
                }
                let p_a = SuperScalar::var(&from_m.table, &fiber_name(t.from.table.name(*xa)))?;
                let sign = (xa.parity() + zb.parity()).bit();
                let term = &d * &p_a;
                q = if sign == 1 { &q - &term } else { &q + &term };
            }
            by_name.insert(fiber_name(t.to.table.name(*zb)), q);
        }
        let images = to_m.table.vars().into_iter().map(|v| by_name.remove(to_m.table.name(v)).expect("image")).collect();
        m.insert(TransitionMap::new(from_m, to_m, images)?);
    }
    Ok(BvTotalSpace { base: x.clone(), atlas: m })
}

/// Transition data of `Ω¹_M` on one overlap of the total space.
///
/// Frames are right-module bases with `(dx, dp) = (dz, dq) · G` and
/// `G = [[A, C], [0, B]]`:
/// `A_ba = ∂x_a/∂z_b`, `B_ba = (−1)^{(|x_a|+|z_b|)|z_b|} ∂z_b/∂x_a` and
/// `C_ca = Σ_b (−1)^{|x_a|+|z_b|} ∂_{z_c}(∂z_b/∂x_a) q_b`. All entries are
/// functions on the source chart of the total space.
#[derive(Clone, Debug)]
pub struct CotangentTransition {
    pub from: String,
    pub to: String,
    /// The full matrix `G` for `Ω¹_M`.
    pub omega_m: SuperMatrix,
    /// `A`, the transition of `Ω¹_X` pulled back to the total space.
    pub a: SuperMatrix,
    pub b: SuperMatrix,
    pub c: SuperMatrix,
}

fn block_matrix(
    table: &Arc<VarTable>,
    a: &SuperMatrix,
    c: &SuperMatrix,
    b: &SuperMatrix,
) -> SuperMatrix {
    let n = a.rows();
    let mut rows_p = a.row_parity.clone();
    rows_p.extend(b.row_parity.iter().copied());
    let mut cols_p = a.col_parity.clone();
    cols_p.extend(c.col_parity.iter().copied());
    let mut g = SuperMatrix::zeros(table, rows_p, cols_p);
    for i in 0..n {
        for j in 0..n {
            g.set(i, j, a.get(i, j).clone());
            g.set(i, n + j, c.get(i, j).clone());
            g.set(n + i, n + j, b.get(i, j).clone());
        }
    }
    g
}

/// The `Ω¹_M` transition on every stored overlap of the total space.
pub fn cotangent_transitions(m: &BvTotalSpace) -> Result<Vec<CotangentTransition>> {
    let mut out = Vec::new();
    for t in m.base.transitions() {
        let back = m.base.transition(&t.to.name, &t.from.name).expect("inverse stored");
        let from_m = m.atlas.chart(&t.from.name)?;
        let mt = m.atlas.transition(&t.from.name, &t.to.name).expect("total space transition");
        let table = &from_m.table;
        let x_vars = t.from.table.vars();
        let z_vars = t.to.table.vars();
        let n = x_vars.len();
        let jac = jacobian(t);
        let jac_back = jacobian(back);
        let x_par: Vec<Parity> = x_vars.iter().map(|v| v.parity()).collect();
        let z_par: Vec<Parity> = z_vars.iter().map(|v| v.parity()).collect();
        let dz_par: Vec<Parity> = z_par.iter().map(|p| p.flip()).collect();
        let dx_par: Vec<Parity> = x_par.iter().map(|p| p.flip()).collect();
        let mut a = SuperMatrix::zeros(table, dz_par.clone(), dx_par.clone());
        let mut b = SuperMatrix::zeros(table, z_par.clone(), x_par.clone());
        let mut c = SuperMatrix::zeros(table, dz_par, x_par.clone());
        let q: Vec<SuperScalar> = z_vars
            .iter()
            .map(|&v| mt.image(&fiber_name(t.to.table.name(v))).cloned())
            .collect::<Result<_>>()?;
        for bi in 0..n {
            for ai in 0..n {
                a.set(bi, ai, t.pull_back(jac_back.get(bi, ai))?.embed(table)?);
                let jab = jac.get(ai, bi).embed(table)?;
                let sign = ((x_par[ai] + z_par[bi]) * z_par[bi]).bit();
                b.set(bi, ai, if sign == 1 { -jab } else { jab });
            }
        }
        for ci in 0..n {
            for ai in 0..n {
                let mut acc = SuperScalar::zero(table);
                for (bi, qb) in q.iter().enumerate() {
                    let jab = jac.get(ai, bi);
                    let mut dz = SuperScalar::zero(&t.from.table);
                    for (e, &xe) in x_vars.iter().enumerate() {
                        let ace = t.pull_back(jac_back.get(ci, e))?;
                        dz = &dz + &(&ace * &jab.derivative(xe));
                    }
                    let term = &dz.embed(table)? * qb;
                    let sign = (x_par[ai] + z_par[bi]).bit();
                    acc = if sign == 1 { &acc - &term } else { &acc + &term };
                }
                c.set(ci, ai, acc);
            }
        }
        let omega_m = block_matrix(table, &a, &c, &b);
        out.push(CotangentTransition { from: t.from.name.clone(), to: t.to.name.clone(), omega_m, a, b, c });
    }
    Ok(out)
}

/// Checks `Ber(Ω¹_M) = Ber(Ω¹_X)²` on every overlap.
pub fn berezinian_square_checks(m: &BvTotalSpace) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for ct in cotangent_transitions(m)? {
        let ber_m = ct.omega_m.berezinian()?;
        let ber_x = ct.a.berezinian()?;
        let sq = &ber_x * &ber_x;
        let diff = &ber_m - &sq;
        out.push(CheckRecord::new(
            format!("{}.ber_square.{}->{}", m.base.name, ct.from, ct.to),
            diff.is_zero(),
            "Ber of the total space is the square of the pulled back Ber of the base",
            json!({ "ber_m": ber_m.to_string(), "ber_x_squared": sq.to_string(), "residual": diff.to_string() }),
        ));
    }
    Ok(out)
}

/// Convenience lookup of images by name for substitution.
pub fn images_by_name(t: &TransitionMap) -> HashMap<String, SuperScalar> {
    t.to.table.vars().into_iter().zip(&t.images).map(|(v, img)| (t.to.table.name(v).to_string(), img.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> Atlas {
        let u0 = Chart::new("U0", VarTable::from_lists(&["z"], &["theta"]).unwrap());
        let u1 = Chart::new("U1", VarTable::from_lists(&["w"], &["psi"]).unwrap());
        let mut a = Atlas::new("p1", (1, 1), vec![u0.clone(), u1.clone()]).unwrap();
        let mut imgs = BTreeMap::new();
        imgs.insert("z".to_string(), "1/w".to_string());
        imgs.insert("theta".to_string(), "psi/w".to_string());
        a.insert_with_inverse(TransitionMap::parse(&u1, &u0, &imgs).unwrap()).unwrap();
        a
    }

    #[test]
    fn inverse_is_computed_and_checks_pass() {
        let a = p1();
        let t = a.transition("U0", "U1").unwrap();
        assert_eq!(t.image("w").unwrap().to_string(), "z^-1");
        assert_eq!(t.image("psi").unwrap().to_string(), "z^-1*theta");
        assert!(verify_atlas(&a).iter().all(CheckRecord::passed));
    }

    #[test]
    fn jacobian_entries() {
        let a = p1();
        let j = jacobian(a.transition("U1", "U0").unwrap());
        // rows (w, psi), cols (z, theta)
        assert_eq!(j.get(0, 0).to_string(), "-w^-2");
        assert_eq!(j.get(0, 1).to_string(), "-w^-2*psi");
        assert_eq!(j.get(1, 1).to_string(), "w^-1");
        assert!(j.get(1, 0).is_zero());
    }

    #[test]
    fn fiber_transition_of_projective_line() {
        let a = p1();
        let m = bv_total_space(&a).unwrap();
        assert!(verify_atlas(&m.atlas).iter().all(CheckRecord::passed));
        let t = m.atlas.transition("U1", "U0").unwrap();
        let pz = t.image("p_z").unwrap();
        let expected = parse_scalar("-w^2*p_w + w*psi*p_psi", &t.from.table).unwrap();
        assert_eq!(*pz, expected);
    }

    #[test]
    fn rejects_parity_violations() {
        let u0 = Chart::new("U0", VarTable::from_lists(&["z"], &["theta"]).unwrap());
        let u1 = Chart::new("U1", VarTable::from_lists(&["w"], &["psi"]).unwrap());
        let mut imgs = BTreeMap::new();
        imgs.insert("z".to_string(), "psi".to_string());
        imgs.insert("theta".to_string(), "psi".to_string());
        assert!(matches!(TransitionMap::parse(&u1, &u0, &imgs), Err(Error::ParityMismatch(_))));
    }

    fn conic_like() -> Atlas {
        let u0 = Chart::new("U0", VarTable::from_lists(&["z"], &["theta1", "theta2"]).unwrap());
        let u1 = Chart::new("U1", VarTable::from_lists(&["w"], &["psi1", "psi2"]).unwrap());
        let mut a = Atlas::new("conic", (1, 2), vec![u0.clone(), u1.clone()]).unwrap();
        let mut imgs = BTreeMap::new();
        imgs.insert("w".to_string(), "1/z + theta1*theta2/z^3".to_string());
        imgs.insert("psi1".to_string(), "theta1/z^2".to_string());
        imgs.insert("psi2".to_string(), "theta2/z^2".to_string());
        a.insert_with_inverse(TransitionMap::parse(&u0, &u1, &imgs).unwrap()).unwrap();
        a
    }

    #[test]
    fn newton_inverts_nilpotent_corrections() {
        let a = conic_like();
        let back = a.transition("U1", "U0").unwrap();
        let expected = parse_scalar("1/w + psi1*psi2/w^3", &back.from.table).unwrap();
        assert_eq!(*back.image("z").unwrap(), expected);
        assert!(verify_atlas(&a).iter().all(CheckRecord::passed));
        let again = invert_transition(back).unwrap();
        assert_eq!(&again, a.transition("U0", "U1").unwrap());
    }

    #[test]
    fn jacobian_chain_rule() {
        let a = conic_like();
        let t = a.transition("U0", "U1").unwrap();
        let back = a.transition("U1", "U0").unwrap();
        let j1 = jacobian(t);
        let j2 = jacobian(back).map(|e| t.pull_back(e)).unwrap();
        let prod = j1.mul(&j2).unwrap();
        let id = SuperMatrix::identity(&t.from.table, t.from.parities());
        assert!(prod.sub(&id).unwrap().is_zero());
    }

    #[test]
    fn berezinian_doubles_on_total_space() {
        for a in [p1(), conic_like()] {
            let m = bv_total_space(&a).unwrap();
            assert!(verify_atlas(&m.atlas).iter().all(CheckRecord::passed));
            let checks = berezinian_square_checks(&m).unwrap();
            assert_eq!(checks.len(), 2);
            assert!(checks.iter().all(CheckRecord::passed), "{checks:?}");
            for ct in cotangent_transitions(&m).unwrap() {
                assert_eq!(ct.a.berezinian().unwrap(), ct.b.berezinian().unwrap());
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let a = conic_like();
        let text = serde_json::to_string(&a.to_json()).unwrap();
        let b = Atlas::from_json_str(&text).unwrap();
        assert_eq!(b.transition("U1", "U0"), a.transition("U1", "U0"));
    }
}
