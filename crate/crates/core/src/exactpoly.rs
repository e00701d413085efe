//! Exact multivariate polynomials in the spatial coordinates `q1..qn` with
//! arbitrary-precision rational coefficients.
//!
//! Axes are zero-based in the API (`axis = 0` is `q1`). Terms are kept in a
//! `BTreeMap` keyed by [`Monomial`], whose ordering is graded lexicographic,
//! so iteration and text output are deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Largest supported number of spatial variables.
pub const MAX_DIM: usize = 3;

pub fn rat(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    BigRational::from_integer(BigInt::from(value))
}

/// Exponent multi-index of a monomial `q1^a1 ... qn^an`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(dim: usize) -> Self {
        Monomial(vec![0; dim])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial with exact rational coefficients; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    dim: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "polynomial dimension {dim} outside 1..={MAX_DIM}"
        );
        Poly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, value: Rational) -> Self {
        Self::monomial(dim, vec![0; dim], value)
    }

    /// The coordinate function `q_{axis+1}`.
    pub fn var(dim: usize, axis: usize) -> Self {
        let mut exps = vec![0; dim];
        exps[axis] = 1;
        Self::monomial(dim, exps, Rational::one())
    }

    pub fn monomial(dim: usize, exps: Vec<u32>, coeff: Rational) -> Self {
        assert_eq!(exps.len(), dim, "exponent vector length");
        let mut p = Poly::zero(dim);
        if !coeff.is_zero() {
            p.terms.insert(Monomial(exps), coeff);
        }
        p
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Poly::zero(dim);
        for (exps, c) in terms {
            assert_eq!(exps.len(), dim, "exponent vector length");
            p.add_term(Monomial(exps), c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial reports 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, mono: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    fn check_dim(&self, other: &Poly) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly> {
        self.check_dim(other)?;
        let mut out = Poly::zero(self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.times(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &Rational) -> Poly {
        if factor.is_zero() {
            return Poly::zero(self.dim);
        }
        Poly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * factor))
                .collect(),
        }
    }

    /// Formal partial derivative with respect to `q_{axis+1}`.
    pub fn partial(&self, axis: usize) -> Result<Poly> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        let mut out = Poly::zero(self.dim);
        for (m, c) in &self.terms {
            let e = m.0[axis];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[axis] = e - 1;
            out.add_term(Monomial(exps), c * int(e as i64));
        }
        Ok(out)
    }

    /// Exact evaluation at a rational point, Horner-style along the last axis.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    term *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut term = c.to_f64().unwrap_or(f64::NAN);
            for (x, &e) in point.iter().zip(&m.0) {
                term *= x.powi(e as i32);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Canonical text: `coeff * q1^a q2^b` terms joined by `+`, highest graded-lex term first.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", fmt_rational(c))?;
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| format!("q{}^{}", i + 1, e))
                .collect();
            if !vars.is_empty() {
                write!(f, " * {}", vars.join(" "))?;
            }
        }
        Ok(())
    }
}

pub(crate) fn fmt_rational(c: &Rational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else if c.is_negative() {
        format!("-{}/{}", c.numer().abs(), c.denom())
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

macro_rules! poly_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                self.$checked(rhs).expect("polynomial dimension mismatch")
            }
        }
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, try_add);
poly_binop!(Sub, sub, try_sub);
poly_binop!(Mul, mul, try_mul);
