//! Truncated Laurent polynomials and the formal-series exchange identity.
//!
//! The distribution delta(x, y) = sum over all integers k of (x/y)^k obeys
//! delta(x, y) f(x) g(y) = f(y) g(x) delta(x, y) as a formal series, because
//! the coefficient of x^a y^b on either side is the finite convolution
//! sum of f_m g_p over m + p = a + b. This module freezes that statement
//! on truncated Laurent data, where both sides can be expanded exactly.

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use crate::multiop::C64;

/// Laurent polynomial with finitely many terms, exponents possibly negative.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Laurent {
    coeffs: BTreeMap<i64, C64>,
}

impl Laurent {
    pub fn new(terms: impl IntoIterator<Item = (i64, C64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (e, c) in terms {
            if c != C64::new(0.0, 0.0) {
                *coeffs.entry(e).or_insert(C64::new(0.0, 0.0)) += c;
            }
        }
        coeffs.retain(|_, c| *c != C64::new(0.0, 0.0));
        Laurent { coeffs }
    }

    pub fn one() -> Self {
        Laurent::new([(0, C64::new(1.0, 0.0))])
    }

    pub fn monomial(exp: i64, coeff: C64) -> Self {
        Laurent::new([(exp, coeff)])
    }

    pub fn coeff(&self, exp: i64) -> C64 {
        self.coeffs.get(&exp).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, rhs: &Laurent) -> Laurent {
        Laurent::new(self.terms().chain(rhs.terms()))
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, rhs: &Laurent) -> Laurent {
        let mut terms = Vec::new();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                terms.push((e1 + e2, c1 * c2));
            }
        }
        Laurent::new(terms)
    }
}

/// Coefficient of x^a y^b in delta(x, y) f(x) g(y): the finite convolution
/// of f and g along m + p = a + b, computed by iterating over f's support.
fn lhs_coefficient(f: &Laurent, g: &Laurent, a: i64, b: i64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (m, fm) in f.terms() {
        acc += fm * g.coeff(a + b - m);
    }
    acc
}

/// Coefficient of x^a y^b in f(y) g(x) delta(x, y), computed independently
/// by iterating over g's support.
fn rhs_coefficient(f: &Laurent, g: &Laurent, a: i64, b: i64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (p, gp) in g.terms() {
        acc += gp * f.coeff(a + b - p);
    }
    acc
}

/// Compare the coefficient of x^a y^b on both sides of the exchange
/// identity for all |a|, |b| <= truncation; returns the largest relative
/// coefficient deviation.
pub fn verify_delta_identity(f: &Laurent, g: &Laurent, truncation: i64) -> f64 {
    let mut scale: f64 = 0.0;
    for (_, c) in f.terms() {
        for (_, d) in g.terms() {
            scale = scale.max((c * d).norm());
        }
    }
    let scale = scale.max(crate::multiop::EPS_FLOOR);
    let mut worst: f64 = 0.0;
    for a in -truncation..=truncation {
        for b in -truncation..=truncation {
            let l = lhs_coefficient(f, g, a, b);
            let r = rhs_coefficient(f, g, a, b);
            worst = worst.max((l - r).norm() / scale);
        }
    }
    worst
}
