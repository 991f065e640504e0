//! Elements of the super Laurent ring `K[z₁^±, …, z_p^±][θ₁, …, θ_q]`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::field::Gq;
use super::vars::{Parity, Var, VarTable};
use crate::error::{Error, Result};

/// A monomial `z^e · θ_{i₁}⋯θ_{i_k}` with `i₁ < ⋯ < i_k`.
///
/// Even exponents may be negative; the odd part is a bitmask over the odd
/// variables of the table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub even: Vec<i32>,
    pub odd: u64,
}

/// Sign produced by moving the odd factors of `b` past those of `a` into
/// canonical order, for the product `θ^a · θ^b`.
pub(crate) fn merge_sign(a: u64, b: u64) -> bool {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let beta = rest.trailing_zeros();
        swaps += a.checked_shr(beta + 1).unwrap_or(0).count_ones();
        rest &= rest - 1;
    }
    swaps % 2 == 1
}

impl Monomial {
    pub fn one(n_even: usize) -> Self {
        Monomial { even: vec![0; n_even], odd: 0 }
    }

    pub fn odd_degree(&self) -> u32 {
        self.odd.count_ones()
    }

    pub fn parity(&self) -> Parity {
        Parity::from_bit(self.odd_degree())
    }

    /// Sum of the even exponents.
    pub fn even_degree(&self) -> i64 {
        self.even.iter().map(|&e| e as i64).sum()
    }

    pub fn is_polynomial(&self) -> bool {
        self.even.iter().all(|&e| e >= 0)
    }

    pub fn has_odd(&self, i: usize) -> bool {
        self.odd >> i & 1 == 1
    }

    /// Product of monomials; `None` when an odd variable repeats, otherwise the
    /// result and whether a minus sign is produced.
    pub fn mul(&self, other: &Monomial) -> Option<(Monomial, bool)> {
        if self.odd & other.odd != 0 {
            return None;
        }
        let even = self.even.iter().zip(&other.even).map(|(a, b)| a + b).collect();
        Some((Monomial { even, odd: self.odd | other.odd }, merge_sign(self.odd, other.odd)))
    }
}

/// An element of the super Laurent ring attached to a [`VarTable`].
///
/// Mixed-parity elements are allowed; [`SuperScalar::even_part`] and
/// [`SuperScalar::odd_part`] split them. Arithmetic operators panic when the
/// operands live over different tables, the `try_` variants return an error.
#[derive(Clone, Debug)]
pub struct SuperScalar {
    table: Arc<VarTable>,
    terms: BTreeMap<Monomial, Gq>,
}

impl PartialEq for SuperScalar {
    fn eq(&self, other: &Self) -> bool {
        same_table(&self.table, &other.table) && self.terms == other.terms
    }
}

impl Eq for SuperScalar {}

pub(crate) fn same_table(a: &Arc<VarTable>, b: &Arc<VarTable>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl SuperScalar {
    pub fn zero(table: &Arc<VarTable>) -> Self {
        SuperScalar { table: table.clone(), terms: BTreeMap::new() }
    }

    pub fn one(table: &Arc<VarTable>) -> Self {
        SuperScalar::constant(table, Gq::one())
    }

    pub fn constant(table: &Arc<VarTable>, c: Gq) -> Self {
        SuperScalar::from_term(table, Monomial::one(table.n_even()), c)
    }

    pub fn from_int(table: &Arc<VarTable>, c: i64) -> Self {
        SuperScalar::constant(table, Gq::from_int(c))
    }

    pub fn from_term(table: &Arc<VarTable>, m: Monomial, c: Gq) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        SuperScalar { table: table.clone(), terms }
    }

    /// The generator with the given name.
    pub fn var(table: &Arc<VarTable>, name: &str) -> Result<Self> {
        let v = table.lookup(name)?;
        Ok(SuperScalar::from_var(table, v))
    }

    pub fn from_var(table: &Arc<VarTable>, v: Var) -> Self {
        let mut m = Monomial::one(table.n_even());
        match v {
            Var::Even(i) => m.even[i] = 1,
            Var::Odd(i) => m.odd = 1u64 << i,
        }
        SuperScalar::from_term(table, m, Gq::one())
    }

    /// Builds an element from `(monomial, coefficient)` pairs, merging repeats.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Gq)>>(table: &Arc<VarTable>, it: I) -> Self {
        let mut s = SuperScalar::zero(table);
        for (m, c) in it {
            s.add_term(m, &c);
        }
        s
    }

    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Gq> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, Gq> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().next().is_some_and(|(m, c)| m.odd == 0 && m.even.iter().all(|&e| e == 0) && c.is_one())
    }

    pub fn coefficient(&self, m: &Monomial) -> Gq {
        self.terms.get(m).cloned().unwrap_or_else(Gq::zero)
    }

    /// The constant term.
    pub fn constant_term(&self) -> Gq {
        self.coefficient(&Monomial::one(self.table.n_even()))
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: &Gq) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_table(&self, other: &SuperScalar) -> Result<()> {
        if same_table(&self.table, &other.table) {
            Ok(())
        } else {
            Err(Error::IncompatibleTables(format!("{:?} vs {:?}", self.table.entries(), other.table.entries())))
        }
    }

    pub fn try_add(&self, other: &SuperScalar) -> Result<SuperScalar> {
        self.check_table(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &SuperScalar) -> Result<SuperScalar> {
        self.check_table(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &-c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &SuperScalar) -> Result<SuperScalar> {
        self.check_table(other)?;
        let mut out = SuperScalar::zero(&self.table);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, neg)) = ma.mul(mb) {
                    let c = ca * cb;
                    out.add_term(m, &if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Gq) -> SuperScalar {
        if c.is_zero() {
            return SuperScalar::zero(&self.table);
        }
        SuperScalar {
            table: self.table.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn scale_int(&self, c: i64) -> SuperScalar {
        self.scale(&Gq::from_int(c))
    }

    /// `true` if every term has parity `p`; zero has both parities.
    pub fn has_parity(&self, p: Parity) -> bool {
        self.terms.keys().all(|m| m.parity() == p)
    }

    /// The parity of a homogeneous element (zero counts as even), `None` if mixed.
    pub fn parity(&self) -> Option<Parity> {
        if self.has_parity(Parity::Even) {
            Some(Parity::Even)
        } else if self.has_parity(Parity::Odd) {
            Some(Parity::Odd)
        } else {
            None
        }
    }

    pub fn even_part(&self) -> SuperScalar {
        self.filter(|m| m.parity() == Parity::Even)
    }

    pub fn odd_part(&self) -> SuperScalar {
        self.filter(|m| m.parity() == Parity::Odd)
    }

    pub fn filter<F: Fn(&Monomial) -> bool>(&self, keep: F) -> SuperScalar {
        SuperScalar {
            table: self.table.clone(),
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// The body: all odd variables set to zero.
    pub fn reduced(&self) -> SuperScalar {
        self.filter(|m| m.odd == 0)
    }

    /// Largest absolute value of any even exponent.
    pub fn max_abs_exponent(&self) -> i32 {
        self.terms.keys().flat_map(|m| m.even.iter().map(|e| e.abs())).max().unwrap_or(0)
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(Monomial::is_polynomial)
    }

    /// Integer power; negative exponents go through [`SuperScalar::invert`].
    pub fn pow(&self, e: i64) -> Result<SuperScalar> {
        let (base, mut n) = if e < 0 { (self.invert()?, (-e) as u64) } else { (self.clone(), e as u64) };
        let mut acc = SuperScalar::one(&self.table);
        let mut b = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &b;
            }
            n >>= 1;
            if n > 0 {
                b = &b * &b;
            }
        }
        Ok(acc)
    }

    /// Multiplicative inverse.
    ///
    /// Writes the element as a unit monomial plus a nilpotent remainder and
    /// sums the terminating geometric series. Fails unless the body is a single
    /// monomial.
    pub fn invert(&self) -> Result<SuperScalar> {
        let body: Vec<_> = self.terms.iter().filter(|(m, _)| m.odd == 0).collect();
        if body.len() != 1 {
            return Err(Error::NotInvertible(self.to_string()));
        }
        let (um, uc) = body[0];
        let inv_mono = Monomial { even: um.even.iter().map(|e| -e).collect(), odd: 0 };
        let u_inv = SuperScalar::from_term(&self.table, inv_mono, uc.inv().expect("nonzero coefficient"));
        let mut nil = self.clone();
        nil.terms.remove(um);
        let step = -(&u_inv * &nil);
        let mut sum = SuperScalar::one(&self.table);
        let mut power = SuperScalar::one(&self.table);
        for _ in 0..=self.table.n_odd() {
            power = &power * &step;
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(&u_inv * &sum)
    }

    /// Graded left derivative with respect to a variable.
    ///
    /// For an odd variable the sign is `(-1)^k` with `k` the number of odd
    /// variables standing before it in the monomial.
    pub fn derivative(&self, v: Var) -> SuperScalar {
        let mut out = SuperScalar::zero(&self.table);
        match v {
            Var::Even(i) => {
                for (m, c) in &self.terms {
                    let e = m.even[i];
                    if e == 0 {
                        continue;
                    }
                    let mut nm = m.clone();
                    nm.even[i] -= 1;
                    out.add_term(nm, &(c * &Gq::from_int(e as i64)));
                }
            }
            Var::Odd(i) => {
                let bit = 1u64 << i;
                for (m, c) in &self.terms {
                    if m.odd & bit == 0 {
                        continue;
                    }
                    let before = (m.odd & (bit - 1)).count_ones();
                    let mut nm = m.clone();
                    nm.odd &= !bit;
                    out.add_term(nm, &if before % 2 == 1 { -c } else { c.clone() });
                }
            }
        }
        out
    }

    pub fn derivative_by_name(&self, name: &str) -> Result<SuperScalar> {
        Ok(self.derivative(self.table.lookup(name)?))
    }

    /// Graded-homomorphic substitution.
    ///
    /// `images` lists one image per variable of this table in [`VarTable::vars`]
    /// order, all over `target`. Even variables must map to even elements and
    /// odd ones to odd elements; variables raised to negative powers must map
    /// to invertible elements.
    pub fn substitute(&self, images: &[SuperScalar], target: &Arc<VarTable>) -> Result<SuperScalar> {
        let vars = self.table.vars();
        if images.len() != vars.len() {
            return Err(Error::DimensionMismatch(format!(
                "substitution needs {} images, got {}",
                vars.len(),
                images.len()
            )));
        }
        for (v, img) in vars.iter().zip(images) {
            if !same_table(img.table(), target) {
                return Err(Error::IncompatibleTables("substitution image over a foreign table".into()));
            }
            if !img.has_parity(v.parity()) {
                return Err(Error::ParityMismatch(format!(
                    "image of `{}` must be {}, got {}",
                    self.table.name(*v),
                    v.parity(),
                    img
                )));
            }
        }
        let n_even = self.table.n_even();
        let mut cache: HashMap<(usize, i32), SuperScalar> = HashMap::new();
        let mut out = SuperScalar::zero(target);
        for (m, c) in &self.terms {
            let mut acc = SuperScalar::constant(target, c.clone());
            for (i, &e) in m.even.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = match cache.get(&(i, e)) {
                    Some(p) => p.clone(),
                    None => {
                        let p = images[i].pow(e as i64)?;
                        cache.insert((i, e), p.clone());
                        p
                    }
                };
                acc = &acc * &p;
                if acc.is_zero() {
                    break;
                }
            }
            let mut rest = m.odd;
            while rest != 0 && !acc.is_zero() {
                let j = rest.trailing_zeros() as usize;
                acc = &acc * &images[n_even + j];
                rest &= rest - 1;
            }
            out = &out + &acc;
        }
        Ok(out)
    }

    /// Substitution keyed by variable name; unnamed variables map to themselves.
    pub fn substitute_named(&self, images: &HashMap<String, SuperScalar>, target: &Arc<VarTable>) -> Result<SuperScalar> {
        let imgs = self
            .table
            .vars()
            .into_iter()
            .map(|v| {
                let name = self.table.name(v);
                match images.get(name) {
                    Some(s) => Ok(s.clone()),
                    None => SuperScalar::var(target, name),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        self.substitute(&imgs, target)
    }

    /// Re-expresses the element over a table containing every variable of this
    /// one with the same parity.
    pub fn embed(&self, target: &Arc<VarTable>) -> Result<SuperScalar> {
        if same_table(&self.table, target) {
            return Ok(self.clone());
        }
        let imgs = self
            .table
            .vars()
            .into_iter()
            .map(|v| {
                let name = self.table.name(v);
                let tv = target.lookup(name)?;
                if tv.parity() != v.parity() {
                    return Err(Error::ParityMismatch(format!("`{name}` changes parity")));
                }
                Ok(SuperScalar::from_var(target, tv))
            })
            .collect::<Result<Vec<_>>>()?;
        self.substitute(&imgs, target)
    }

    /// Human readable form of a single monomial, e.g. `z^-2*theta1*theta2`.
    pub fn format_monomial(table: &VarTable, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (i, &e) in m.even.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(table.evens()[i].clone()),
                _ => parts.push(format!("{}^{}", table.evens()[i], e)),
            }
        }
        for (j, name) in table.odds().iter().enumerate() {
            if m.has_odd(j) {
                parts.push(name.clone());
            }
        }
        parts.join("*")
    }
}

impl fmt::Display for SuperScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let mono = SuperScalar::format_monomial(&self.table, m);
            let minus_one = -Gq::one();
            let term = if mono.is_empty() {
                c.to_string()
            } else if c.is_one() {
                mono
            } else if *c == minus_one {
                format!("-{mono}")
            } else {
                format!("{c}*{mono}")
            };
            if k == 0 {
                write!(f, "{term}")?;
            } else if let Some(rest) = term.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {term}")?;
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a SuperScalar> for &'a SuperScalar {
    type Output = SuperScalar;
    fn add(self, o: &SuperScalar) -> SuperScalar {
        self.try_add(o).expect("operands over different tables")
    }
}

impl<'a> Sub<&'a SuperScalar> for &'a SuperScalar {
    type Output = SuperScalar;
    fn sub(self, o: &SuperScalar) -> SuperScalar {
        self.try_sub(o).expect("operands over different tables")
    }
}

impl<'a> Mul<&'a SuperScalar> for &'a SuperScalar {
    type Output = SuperScalar;
    fn mul(self, o: &SuperScalar) -> SuperScalar {
        self.try_mul(o).expect("operands over different tables")
    }
}

impl Neg for &SuperScalar {
    type Output = SuperScalar;
    fn neg(self) -> SuperScalar {
        self.scale(&-Gq::one())
    }
}

impl Neg for SuperScalar {
    type Output = SuperScalar;
    fn neg(self) -> SuperScalar {
        (&self).neg()
    }
}

impl Add for SuperScalar {
    type Output = SuperScalar;
    fn add(self, o: SuperScalar) -> SuperScalar {
        &self + &o
    }
}

impl Sub for SuperScalar {
    type Output = SuperScalar;
    fn sub(self, o: SuperScalar) -> SuperScalar {
        &self - &o
    }
}

impl Mul for SuperScalar {
    type Output = SuperScalar;
    fn mul(self, o: SuperScalar) -> SuperScalar {
        &self * &o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Arc<VarTable> {
        VarTable::from_lists(&["z"], &["t1", "t2", "t3"]).unwrap()
    }

    #[test]
    fn odd_variables_anticommute() {
        let t = table();
        let a = SuperScalar::var(&t, "t1").unwrap();
        let b = SuperScalar::var(&t, "t2").unwrap();
        assert_eq!(&a * &b, -(&b * &a));
        assert!((&a * &a).is_zero());
    }

    #[test]
    fn merge_sign_counts_transpositions() {
        // t3 * (t1 t2) = t1 t2 t3 after two swaps.
        assert!(!merge_sign(0b100, 0b011));
        // t2 * t1 = - t1 t2.
        assert!(merge_sign(0b010, 0b001));
    }

    #[test]
    fn inverse_with_nilpotent_part() {
        let t = table();
        let z = SuperScalar::var(&t, "z").unwrap();
        let t1 = SuperScalar::var(&t, "t1").unwrap();
        let t2 = SuperScalar::var(&t, "t2").unwrap();
        let a = &z + &(&t1 * &t2);
        let inv = a.invert().unwrap();
        assert!((&a * &inv).is_one());
        let expected = &z.pow(-1).unwrap() - &(&z.pow(-2).unwrap() * &(&t1 * &t2));
        assert_eq!(inv, expected);
    }

    #[test]
    fn non_monomial_body_is_not_invertible() {
        let t = table();
        let z = SuperScalar::var(&t, "z").unwrap();
        let a = &z + &SuperScalar::one(&t);
        assert!(matches!(a.invert(), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn odd_derivative_sign() {
        let t = table();
        let t1 = SuperScalar::var(&t, "t1").unwrap();
        let t2 = SuperScalar::var(&t, "t2").unwrap();
        let t12 = &t1 * &t2;
        assert_eq!(t12.derivative(Var::Odd(1)), -t1.clone());
        assert_eq!(t12.derivative(Var::Odd(0)), t2);
    }

    #[test]
    fn substitution_is_homomorphic_on_example() {
        let t = table();
        let z = SuperScalar::var(&t, "z").unwrap();
        let t1 = SuperScalar::var(&t, "t1").unwrap();
        let t2 = SuperScalar::var(&t, "t2").unwrap();
        let t3 = SuperScalar::var(&t, "t3").unwrap();
        // z -> z + t1 t2, t1 -> t3, t2 -> t1, t3 -> t2
        let imgs = vec![&z + &(&t1 * &t2), t3.clone(), t1.clone(), t2.clone()];
        let a = &z.pow(-1).unwrap() * &t1;
        let b = &t2 * &t3;
        let lhs = (&a * &b).substitute(&imgs, &t).unwrap();
        let rhs = &a.substitute(&imgs, &t).unwrap() * &b.substitute(&imgs, &t).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitution_rejects_parity_change() {
        let t = table();
        let z = SuperScalar::var(&t, "z").unwrap();
        let t1 = SuperScalar::var(&t, "t1").unwrap();
        let imgs = vec![t1.clone(), t1.clone(), t1.clone(), t1];
        assert!(matches!(z.substitute(&imgs, &t), Err(Error::ParityMismatch(_))));
    }
}
