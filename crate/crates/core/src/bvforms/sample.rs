//! Seeded random elements for property checks.

use rand::Rng;

use super::{complex::Truncation, Block, FormAlgebra, MixedForm};
use crate::superalgebra::{Gq, Monomial, SuperScalar, Var};

fn random_exponents<R: Rng>(rng: &mut R, m: &mut Monomial, vars: &[Var], even_max: i32) {
    for &v in vars {
        match v {
            Var::Even(i) => m.even[i] = rng.gen_range(0..=even_max),
            Var::Odd(j) => {
                if rng.gen_bool(0.5) {
                    m.odd |= 1 << j
                }
            }
        }
    }
}

fn coefficient<R: Rng>(rng: &mut R) -> Gq {
    let re = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
    if rng.gen_bool(0.2) {
        &Gq::from_int(re) + &Gq::i()
    } else {
        Gq::from_int(re)
    }
}

/// A polynomial in `x, p` with `terms` random monomials inside `trunc`.
pub fn random_function<R: Rng>(alg: &FormAlgebra, rng: &mut R, trunc: Truncation, terms: usize) -> SuperScalar {
    let mut out = SuperScalar::zero(alg.table());
    while out.len() < terms {
        let mut m = Monomial::one(alg.table().n_even());
        random_exponents(rng, &mut m, alg.vars(Block::X), 2);
        random_exponents(rng, &mut m, alg.vars(Block::P), 2);
        let (_, pd) = alg.function_degrees(&m);
        let xd: i32 = alg.vars(Block::X)[..alg.n].iter().map(|v| if let Var::Even(i) = v { m.even[*i] } else { 0 }).sum();
        if pd > trunc.p_max || xd as u32 > trunc.x_max {
            continue;
        }
        out = &out + &SuperScalar::from_term(alg.table(), m, coefficient(rng));
    }
    out
}

/// A mixed form with `terms` random monomials; even symbols get exponents up
/// to two, form symbols up to one.
pub fn random_form<R: Rng>(alg: &FormAlgebra, rng: &mut R, terms: usize) -> MixedForm {
    let mut out = SuperScalar::zero(alg.table());
    let mut attempts = 0;
    while out.len() < terms && attempts < 16 * terms {
        attempts += 1;
        let mut m = Monomial::one(alg.table().n_even());
        random_exponents(rng, &mut m, alg.vars(Block::Dx), 1);
        random_exponents(rng, &mut m, alg.vars(Block::Dp), 1);
        random_exponents(rng, &mut m, alg.vars(Block::X), 2);
        random_exponents(rng, &mut m, alg.vars(Block::P), 2);
        out = &out + &SuperScalar::from_term(alg.table(), m, coefficient(rng));
    }
    out
}

/// A nonzero exact, hence closed, form of total form degree at most three.
pub fn random_closed_form<R: Rng>(alg: &FormAlgebra, rng: &mut R, terms: usize) -> MixedForm {
    loop {
        let w = random_form(alg, rng, terms).filter(|m| {
            let (i, j) = alg.profile(m).bidegree();
            i + j <= 2
        });
        let dw = alg.d(&w);
        if !dw.is_zero() {
            return dw;
        }
    }
}
