//! Fiberwise-polynomial functions on `T*Q`, the canonical Poisson bracket, the
//! isomorphism `κ` from symmetric contravariant tensors, and Hamiltonian vector
//! fields.
//!
//! Sign conventions:
//!
//! ```text
//! {h, g}   = ∂h/∂q^l ∂g/∂p_l - ∂g/∂q^l ∂h/∂p_l
//! κ([X,Y]) = -{κX, κY}
//! φ(h)     = -X_h = (-∂h/∂p, ∂h/∂q),   [φh, φg] = φ({h, g})
//! gccl     = φ ∘ κ
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::exactpoly::{int, Poly, Rational};
use crate::schouten::{multiplicity, multisets, GradedTensor, IndexSet, SPair, SymTensor};

/// `Σ_I c_I(q) p^I` with `I` a sorted multiset of momentum indices.
///
/// `c_I` is the coefficient of the monomial `p^I`, so `κ` of a symmetric
/// tensor carries the number of orderings of `I`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoly {
    dim: usize,
    terms: BTreeMap<IndexSet, Poly>,
}

fn remove_one(idx: &[u8], axis: u8) -> Option<IndexSet> {
    let pos = idx.iter().position(|&i| i == axis)?;
    let mut out = idx.to_vec();
    out.remove(pos);
    Some(out)
}

fn merge(a: &[u8], b: &[u8]) -> IndexSet {
    let mut out: Vec<u8> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out
}

impl PhasePoly {
    pub fn zero(dim: usize) -> Self {
        PhasePoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// A function of `q` only.
    pub fn from_q(c: Poly) -> Self {
        let dim = c.dim();
        Self::from_terms(dim, [(vec![], c)])
    }

    /// The coordinate function `p_{axis+1}`.
    pub fn p(dim: usize, axis: usize) -> Self {
        Self::from_terms(dim, [(vec![axis as u8], Poly::constant(dim, Rational::one()))])
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u8>, Poly)>>(dim: usize, terms: I) -> Self {
        let mut out = Self::zero(dim);
        for (mut idx, c) in terms {
            assert!(idx.iter().all(|&i| (i as usize) < dim), "p-index out of range");
            assert_eq!(c.dim(), dim, "coefficient dimension");
            idx.sort_unstable();
            out.accumulate(idx, c);
        }
        out
    }

    fn accumulate(&mut self, idx: IndexSet, c: Poly) {
        if c.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&idx) {
            Some(e) => &e + &c,
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(idx, merged);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexSet, &Poly)> {
        self.terms.iter()
    }

    /// Coefficient of `p^I` for any ordering of `I`.
    pub fn coeff(&self, idx: &[u8]) -> Poly {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.terms
            .get(&key)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.dim))
    }

    /// Highest p-degree present; `None` for zero.
    pub fn p_degree(&self) -> Option<usize> {
        self.terms.keys().map(Vec::len).max()
    }

    /// Lowest p-degree present; `None` for zero.
    pub fn min_p_degree(&self) -> Option<usize> {
        self.terms.keys().map(Vec::len).min()
    }

    /// Homogeneous part of the given p-degree.
    pub fn degree_part(&self, deg: usize) -> PhasePoly {
        PhasePoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(i, _)| i.len() == deg)
                .map(|(i, c)| (i.clone(), c.clone()))
                .collect(),
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (i, c) in &other.terms {
            out.accumulate(i.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.neg())
    }

    pub fn times(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                out.accumulate(merge(i, j), a * b);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        let mut out = Self::zero(self.dim);
        for (i, c) in &self.terms {
            out.accumulate(i.clone(), c.scale(factor));
        }
        out
    }

    /// `∂/∂q^{axis+1}`.
    pub fn dq(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange {
                axis: axis + 1,
                dim: self.dim,
            });
        }
        let mut out = Self::zero(self.dim);
        for (i, c) in &self.terms {
            out.accumulate(i.clone(), c.partial(axis)?);
        }
        Ok(out)
    }

    /// `∂/∂p_{axis+1}`.
    pub fn dp(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange {
                axis: axis + 1,
                dim: self.dim,
            });
        }
        let a = axis as u8;
        let mut out = Self::zero(self.dim);
        for (i, c) in &self.terms {
            let power = i.iter().filter(|&&x| x == a).count() as i64;
            if let Some(rest) = remove_one(i, a) {
                out.accumulate(rest, c.scale(&int(power)));
            }
        }
        Ok(out)
    }

    /// Float evaluation at `(q, p)`.
    pub fn eval_f64(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        if p.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        let mut acc = 0.0;
        for (i, c) in &self.terms {
            let mono: f64 = i.iter().map(|&k| p[k as usize]).product();
            acc += c.eval_f64(q)? * mono;
        }
        Ok(acc)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PhasePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (idx, c) in self.terms.iter().rev() {
            let q = if c.terms().count() == 1 {
                c.to_string()
            } else {
                format!("({c})")
            };
            let mut powers = BTreeMap::<u8, u32>::new();
            for &i in idx {
                *powers.entry(i).or_default() += 1;
            }
            if powers.is_empty() {
                parts.push(q);
            } else {
                let p: Vec<String> = powers
                    .iter()
                    .map(|(i, e)| format!("p{}^{}", i + 1, e))
                    .collect();
                parts.push(format!("{q} * {}", p.join(" ")));
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// `κ`: `X^{i1..ik}(q) ∂_{i1}⊗..⊗∂_{ik} ↦ X^{i1..ik}(q) p_{i1}..p_{ik}` summed over all index tuples.
pub fn kappa(x: &GradedTensor) -> PhasePoly {
    let mut out = PhasePoly::zero(x.dim());
    for part in x.parts() {
        out.plus_assign_sym(part);
    }
    out
}

/// `κ` of a single homogeneous tensor.
pub fn kappa_sym(x: &SymTensor) -> PhasePoly {
    let mut out = PhasePoly::zero(x.dim());
    out.plus_assign_sym(x);
    out
}

impl PhasePoly {
    fn plus_assign_sym(&mut self, x: &SymTensor) {
        for (idx, c) in x.components() {
            self.accumulate(idx.clone(), c.scale(&int(multiplicity(idx) as i64)));
        }
    }
}

/// Exact inverse of [`kappa`].
pub fn kappa_inv(h: &PhasePoly) -> GradedTensor {
    let dim = h.dim;
    let mut by_order: BTreeMap<usize, Vec<(Vec<u8>, Poly)>> = BTreeMap::new();
    for (idx, c) in &h.terms {
        let m = Rational::new(1.into(), (multiplicity(idx) as i64).into());
        by_order
            .entry(idx.len())
            .or_default()
            .push((idx.clone(), c.scale(&m)));
    }
    GradedTensor::from_parts(
        dim,
        by_order
            .into_iter()
            .map(|(k, comps)| SymTensor::from_components(dim, k, comps)),
    )
    .expect("same dim")
}

/// `{h, g} = Σ_l (∂h/∂q^l ∂g/∂p_l - ∂g/∂q^l ∂h/∂p_l)`.
pub fn canonical_bracket(h: &PhasePoly, g: &PhasePoly) -> Result<PhasePoly> {
    h.check_dim(g)?;
    let mut out = PhasePoly::zero(h.dim);
    for l in 0..h.dim {
        out = out
            .plus(&h.dq(l)?.times(&g.dp(l)?)?)?
            .minus(&g.dq(l)?.times(&h.dp(l)?)?)?;
    }
    Ok(out)
}

/// Split by p-degree into the `ŝ` part (degree ≤ 1) and the `n̂` part (degree ≥ 2).
pub fn decompose_phase(h: &PhasePoly) -> (PhasePoly, PhasePoly) {
    let mut s = PhasePoly::zero(h.dim);
    let mut n = PhasePoly::zero(h.dim);
    for (idx, c) in &h.terms {
        let target = if idx.len() <= 1 { &mut s } else { &mut n };
        target.terms.insert(idx.clone(), c.clone());
    }
    (s, n)
}

fn check_degrees(xhat: &PhasePoly, shat: &PhasePoly) -> Result<()> {
    xhat.check_dim(shat)?;
    if let Some(d) = xhat.min_p_degree().filter(|&d| d < 2) {
        return Err(Error::DegreeViolation(format!(
            "n-hat element has a p-degree {d} term"
        )));
    }
    if let Some(d) = shat.p_degree().filter(|&d| d > 1) {
        return Err(Error::DegreeViolation(format!(
            "s-hat element has a p-degree {d} term"
        )));
    }
    Ok(())
}

/// `Σ_l σ_{,l} ∂X̂²/∂p_l = 2 σ_{,l} X^{il} p_i`; only the degree-2 part of `X̂` acts.
pub fn act_left_phase(xhat: &PhasePoly, shat: &PhasePoly) -> Result<PhasePoly> {
    check_degrees(xhat, shat)?;
    let sigma = shat.degree_part(0);
    let x2 = xhat.degree_part(2);
    let mut out = PhasePoly::zero(xhat.dim);
    for l in 0..xhat.dim {
        out = out.plus(&sigma.dq(l)?.times(&x2.dp(l)?)?)?;
    }
    Ok(out)
}

/// Right action of `ŝ` on `n̂`:
///
/// ```text
/// Σ_{k>=2} ( -Y^l ∂_l X̂^k + (∂X̂^k/∂p_l) Y^j_{,l} p_j + σ_{,l} ∂X̂^{k+1}/∂p_l )
/// ```
pub fn act_right_phase(xhat: &PhasePoly, shat: &PhasePoly) -> Result<PhasePoly> {
    check_degrees(xhat, shat)?;
    let dim = xhat.dim;
    let sigma = shat.degree_part(0);
    let y = shat.degree_part(1);
    let high = PhasePoly {
        dim,
        terms: xhat
            .terms
            .iter()
            .filter(|(i, _)| i.len() >= 3)
            .map(|(i, c)| (i.clone(), c.clone()))
            .collect(),
    };
    let mut out = PhasePoly::zero(dim);
    for l in 0..dim {
        let y_l = PhasePoly::from_q(y.coeff(&[l as u8]));
        // Y^j_{,l} p_j
        let dy_l = y.dq(l)?;
        out = out
            .minus(&y_l.times(&xhat.dq(l)?)?)?
            .plus(&xhat.dp(l)?.times(&dy_l)?)?
            .plus(&sigma.dq(l)?.times(&high.dp(l)?)?)?;
    }
    Ok(out)
}

/// Vector field on `T*Q`: `Σ_l qcomp_l ∂/∂q^l + pcomp_l ∂/∂p_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamField {
    pub qcomp: Vec<PhasePoly>,
    pub pcomp: Vec<PhasePoly>,
}

impl HamField {
    pub fn zero(dim: usize) -> Self {
        HamField {
            qcomp: vec![PhasePoly::zero(dim); dim],
            pcomp: vec![PhasePoly::zero(dim); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.qcomp.len()
    }

    pub fn is_zero(&self) -> bool {
        self.qcomp.iter().chain(&self.pcomp).all(PhasePoly::is_zero)
    }

    /// Derivative of `g` along the field.
    pub fn apply(&self, g: &PhasePoly) -> Result<PhasePoly> {
        let mut out = PhasePoly::zero(g.dim);
        for l in 0..self.dim() {
            out = out
                .plus(&self.qcomp[l].times(&g.dq(l)?)?)?
                .plus(&self.pcomp[l].times(&g.dp(l)?)?)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        HamField {
            qcomp: self.qcomp.iter().map(PhasePoly::neg).collect(),
            pcomp: self.pcomp.iter().map(PhasePoly::neg).collect(),
        }
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        let zip = |a: &[PhasePoly], b: &[PhasePoly]| -> Result<Vec<PhasePoly>> {
            a.iter().zip(b).map(|(x, y)| x.minus(y)).collect()
        };
        Ok(HamField {
            qcomp: zip(&self.qcomp, &other.qcomp)?,
            pcomp: zip(&self.pcomp, &other.pcomp)?,
        })
    }
}

/// `φ(h) = -X_h`: `qcomp_l = -∂h/∂p_l`, `pcomp_l = ∂h/∂q^l`. Kernel: the constants.
pub fn hamiltonian_field(h: &PhasePoly) -> HamField {
    let dim = h.dim;
    HamField {
        qcomp: (0..dim).map(|l| h.dp(l).expect("axis").neg()).collect(),
        pcomp: (0..dim).map(|l| h.dq(l).expect("axis")).collect(),
    }
}

/// Generalized complete cotangent lift of a homogeneous tensor of order `k`:
///
/// ```text
/// qcomp^l = -k X^{i1..i_{k-1} l} p_{i1}..p_{i_{k-1}},   pcomp_l = X^{i1..ik}_{,l} p_{i1}..p_{ik}
/// ```
pub fn gccl(x: &SymTensor) -> HamField {
    let dim = x.dim();
    let k = x.order();
    let mut out = HamField::zero(dim);
    if k >= 1 {
        for l in 0..dim {
            let mut terms = Vec::new();
            for j in multisets(dim, k - 1) {
                let full = merge(&j, &[l as u8]);
                if let Some(c) = x.get(&full) {
                    let w = int(-(k as i64) * multiplicity(&j) as i64);
                    terms.push((j, c.scale(&w)));
                }
            }
            out.qcomp[l] = PhasePoly::from_terms(dim, terms);
        }
    }
    for l in 0..dim {
        let terms = x.components().map(|(idx, c)| {
            let w = int(multiplicity(idx) as i64);
            (idx.clone(), c.partial(l).expect("axis").scale(&w))
        });
        out.pcomp[l] = PhasePoly::from_terms(dim, terms);
    }
    out
}

/// Plain Jacobi-Lie bracket `[a, b]^i = a(b^i) - b(a^i)` in coordinates `(q, p)`.
pub fn jacobi_lie_bracket(a: &HamField, b: &HamField) -> Result<HamField> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let comp = |x: &PhasePoly, y: &PhasePoly| -> Result<PhasePoly> { a.apply(x)?.minus(&b.apply(y)?) };
    Ok(HamField {
        qcomp: (0..a.dim())
            .map(|i| comp(&b.qcomp[i], &a.qcomp[i]))
            .collect::<Result<_>>()?,
        pcomp: (0..a.dim())
            .map(|i| comp(&b.pcomp[i], &a.pcomp[i]))
            .collect::<Result<_>>()?,
    })
}

/// `κ` restricted to `s`: `σ + Y^l p_l`.
pub fn kappa_s(s: &SPair) -> PhasePoly {
    kappa(&s.to_graded())
}

impl fmt::Display for HamField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (l, c) in self.qcomp.iter().enumerate() {
            writeln!(f, "d/dq{}: {c}", l + 1)?;
        }
        for (l, c) in self.pcomp.iter().enumerate() {
            writeln!(f, "d/dp{}: {c}", l + 1)?;
        }
        Ok(())
    }
}
