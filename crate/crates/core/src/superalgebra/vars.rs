//! Parities and ordered tables of graded variables.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ℤ₂-grading of a variable, symbol or homogeneous element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(b: u32) -> Parity {
        if b % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// The Koszul sign `(-1)^(self·other)`.
    pub fn koszul(self, other: Parity) -> i64 {
        if self.is_odd() && other.is_odd() {
            -1
        } else {
            1
        }
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, o: Parity) -> Parity {
        Parity::from_bit(self.bit() + o.bit())
    }
}

impl Mul for Parity {
    type Output = Parity;
    fn mul(self, o: Parity) -> Parity {
        Parity::from_bit(self.bit() * o.bit())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// A variable of a table: the `i`-th even or the `i`-th odd generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Even(usize),
    Odd(usize),
}

impl Var {
    pub fn parity(self) -> Parity {
        match self {
            Var::Even(_) => Parity::Even,
            Var::Odd(_) => Parity::Odd,
        }
    }
}

/// An ordered list of named variables with parities.
///
/// Monomials are written with all even variables first and then the odd ones,
/// each group in the order the variables were declared. The relative order of
/// the odd variables fixes every sign in the algebra.
#[derive(Clone, Debug)]
pub struct VarTable {
    evens: Vec<String>,
    odds: Vec<String>,
    index: HashMap<String, Var>,
}

impl PartialEq for VarTable {
    fn eq(&self, other: &Self) -> bool {
        self.evens == other.evens && self.odds == other.odds
    }
}

impl Eq for VarTable {}

impl VarTable {
    /// Builds a table from `(name, parity)` pairs.
    pub fn new<S: AsRef<str>>(vars: &[(S, Parity)]) -> Result<Arc<VarTable>> {
        let mut evens = Vec::new();
        let mut odds = Vec::new();
        let mut index = HashMap::new();
        for (name, parity) in vars {
            let name = name.as_ref().to_string();
            if !is_identifier(&name) || name == "i" {
                return Err(Error::UnknownVariable(format!("invalid variable name `{name}`")));
            }
            let v = match parity {
                Parity::Even => {
                    evens.push(name.clone());
                    Var::Even(evens.len() - 1)
                }
                Parity::Odd => {
                    odds.push(name.clone());
                    Var::Odd(odds.len() - 1)
                }
            };
            if index.insert(name.clone(), v).is_some() {
                return Err(Error::UnknownVariable(format!("duplicate variable `{name}`")));
            }
        }
        if odds.len() > 64 {
            return Err(Error::TooManyOddVariables(odds.len()));
        }
        Ok(Arc::new(VarTable { evens, odds, index }))
    }

    /// Table with the given even names followed by the given odd names.
    pub fn from_lists<S: AsRef<str>>(evens: &[S], odds: &[S]) -> Result<Arc<VarTable>> {
        let mut all: Vec<(String, Parity)> = Vec::new();
        all.extend(evens.iter().map(|s| (s.as_ref().to_string(), Parity::Even)));
        all.extend(odds.iter().map(|s| (s.as_ref().to_string(), Parity::Odd)));
        VarTable::new(&all)
    }

    pub fn n_even(&self) -> usize {
        self.evens.len()
    }

    pub fn n_odd(&self) -> usize {
        self.odds.len()
    }

    pub fn evens(&self) -> &[String] {
        &self.evens
    }

    pub fn odds(&self) -> &[String] {
        &self.odds
    }

    pub fn lookup(&self, name: &str) -> Result<Var> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn name(&self, v: Var) -> &str {
        match v {
            Var::Even(i) => &self.evens[i],
            Var::Odd(i) => &self.odds[i],
        }
    }

    /// All variables, evens first.
    pub fn vars(&self) -> Vec<Var> {
        (0..self.evens.len())
            .map(Var::Even)
            .chain((0..self.odds.len()).map(Var::Odd))
            .collect()
    }

    /// `(name, parity)` pairs, evens first.
    pub fn entries(&self) -> Vec<(String, Parity)> {
        self.vars().into_iter().map(|v| (self.name(v).to_string(), v.parity())).collect()
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_orders_and_looks_up() {
        let t = VarTable::new(&[("theta", Parity::Odd), ("z", Parity::Even), ("psi", Parity::Odd)]).unwrap();
        assert_eq!(t.evens(), &["z".to_string()]);
        assert_eq!(t.odds(), &["theta".to_string(), "psi".to_string()]);
        assert_eq!(t.lookup("psi").unwrap(), Var::Odd(1));
        assert!(t.lookup("w").is_err());
    }

    #[test]
    fn rejects_duplicates_and_reserved_names() {
        assert!(VarTable::new(&[("z", Parity::Even), ("z", Parity::Odd)]).is_err());
        assert!(VarTable::new(&[("i", Parity::Even)]).is_err());
    }

    #[test]
    fn parity_arithmetic() {
        assert_eq!(Parity::Odd + Parity::Odd, Parity::Even);
        assert_eq!(Parity::Odd.koszul(Parity::Odd), -1);
        assert_eq!(Parity::Odd.koszul(Parity::Even), 1);
    }
}
