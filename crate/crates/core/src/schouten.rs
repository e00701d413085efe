//! Symmetric contravariant tensor fields, the symmetric Schouten concomitant,
//! and the matched pair split `TQ = s ⋈ n`.
//!
//! `s` collects orders 0 and 1 (functions and vector fields), `n` collects
//! orders `>= 2`. For `X = Σ_{k>=2} X^k` in `n` and `(σ, Y)` in `s` the mutual
//! actions are
//!
//! ```text
//! X ▷ (σ, Y) = (0, [X^2, σ])
//! X ◁ (σ, Y) = Σ_{k>=2} ([X^{k+1}, σ] - L_Y X^k),   L_Y X^k = -[X^k, Y]
//! ```
//!
//! Tensors are generic over their coefficient ring ([`Coefficient`]); the exact
//! layer uses [`Poly`], the grid layer reuses the same bracket on periodic samples.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::exactpoly::{int, Poly, Rational};

/// Default cap on tensor orders produced by graded brackets.
pub const DEFAULT_ORDER_CAP: usize = 8;

/// Coefficient functions of a tensor field: a commutative ring with partial derivatives.
pub trait Coefficient: Clone + fmt::Debug {
    fn dim(&self) -> usize;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn scaled(&self, factor: &Rational) -> Self;
    fn deriv(&self, axis: usize) -> Self;
}

impl Coefficient for Poly {
    fn dim(&self) -> usize {
        Poly::dim(self)
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn scaled(&self, factor: &Rational) -> Self {
        self.scale(factor)
    }
    fn deriv(&self, axis: usize) -> Self {
        self.partial(axis).expect("axis checked by caller")
    }
}

/// Sorted (canonical) index tuple of a symmetric tensor component, zero-based.
pub type IndexSet = Vec<u8>;

fn sorted(mut idx: Vec<u8>) -> Vec<u8> {
    idx.sort_unstable();
    idx
}

/// All non-decreasing index tuples of length `len` over `0..dim`.
pub fn multisets(dim: usize, len: usize) -> Vec<IndexSet> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(dim: usize, len: usize, start: u8, cur: &mut Vec<u8>, out: &mut Vec<IndexSet>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..dim as u8 {
            cur.push(i);
            rec(dim, len, i, cur, out);
            cur.pop();
        }
    }
    rec(dim, len, 0, &mut cur, &mut out);
    out
}

/// Distinct orderings of a multiset, lexicographic order.
pub fn arrangements(set: &[u8]) -> Vec<Vec<u8>> {
    let mut cur = sorted(set.to_vec());
    let mut out = vec![cur.clone()];
    loop {
        // next lexicographic permutation
        let n = cur.len();
        if n < 2 {
            break;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

/// Number of distinct orderings of a multiset.
pub fn multiplicity(set: &[u8]) -> u64 {
    let mut counts = BTreeMap::<u8, u64>::new();
    for &i in set {
        *counts.entry(i).or_default() += 1;
    }
    let fact = |n: u64| (1..=n).product::<u64>();
    counts
        .values()
        .fold(fact(set.len() as u64), |acc, &c| acc / fact(c))
}

/// Symmetric contravariant tensor field of a fixed order.
///
/// Only canonical (sorted) index tuples are stored and absent components are
/// zero, so symmetry is structural.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor<C = Poly> {
    dim: usize,
    order: usize,
    comps: BTreeMap<IndexSet, C>,
}

impl<C: Coefficient> SymTensor<C> {
    pub fn zero(dim: usize, order: usize) -> Self {
        SymTensor {
            dim,
            order,
            comps: BTreeMap::new(),
        }
    }

    /// Order-0 tensor (a function).
    pub fn scalar(value: C) -> Self {
        Self::from_components(value.dim(), 0, [(vec![], value)])
    }

    /// Builds a tensor from components; index tuples are canonicalized and
    /// repeated tuples are summed.
    pub fn from_components<I>(dim: usize, order: usize, comps: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u8>, C)>,
    {
        let mut t = Self::zero(dim, order);
        for (idx, c) in comps {
            assert_eq!(idx.len(), order, "index tuple length must equal the order");
            assert!(idx.iter().all(|&i| (i as usize) < dim), "index out of range");
            assert_eq!(c.dim(), dim, "coefficient dimension");
            t.accumulate(sorted(idx), c);
        }
        t
    }

    fn accumulate(&mut self, idx: IndexSet, c: C) {
        if c.is_zero() {
            return;
        }
        let merged = match self.comps.remove(&idx) {
            Some(existing) => existing.plus(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.comps.insert(idx, merged);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Component for any ordering of the given indices.
    pub fn get(&self, idx: &[u8]) -> Option<&C> {
        self.comps.get(&sorted(idx.to_vec()))
    }

    pub fn components(&self) -> impl Iterator<Item = (&IndexSet, &C)> {
        self.comps.iter()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.order != other.order {
            return Err(Error::OrderMismatch(format!(
                "order {} vs order {}",
                self.order, other.order
            )));
        }
        Ok(())
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (i, c) in &other.comps {
            out.accumulate(i.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scaled(&-Rational::one())
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        let mut out = Self::zero(self.dim, self.order);
        for (i, c) in &self.comps {
            out.accumulate(i.clone(), c.scaled(factor));
        }
        out
    }

    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> SymTensor<D> {
        let mut out = SymTensor::zero(self.dim, self.order);
        for (i, c) in &self.comps {
            out.accumulate(i.clone(), f(c));
        }
        out
    }

    fn derivatives(&self) -> Vec<BTreeMap<IndexSet, C>> {
        (0..self.dim)
            .map(|axis| {
                self.comps
                    .iter()
                    .map(|(i, c)| (i.clone(), c.deriv(axis)))
                    .filter(|(_, c)| !c.is_zero())
                    .collect()
            })
            .collect()
    }
}

/// Symmetric Schouten concomitant `[X^k, Y^m]`, a tensor of order `k + m - 1`:
///
/// ```text
/// k X^{i_{m+1}..i_{m+k-1} l} Y^{i_1..i_m}_{,l} - m Y^{i_{k+1}..i_{k+m-1} l} X^{i_1..i_k}_{,l}
/// ```
///
/// symmetrized over the free indices. Trivial on functions (`k = m = 0`).
pub fn schouten_bracket<C: Coefficient>(x: &SymTensor<C>, y: &SymTensor<C>) -> Result<SymTensor<C>> {
    if x.dim != y.dim {
        return Err(Error::DimMismatch {
            left: x.dim,
            right: y.dim,
        });
    }
    let (k, m, dim) = (x.order, y.order, x.dim);
    if k + m == 0 {
        return Ok(SymTensor::zero(dim, 0));
    }
    let r = k + m - 1;
    let mut out = SymTensor::zero(dim, r);
    if x.is_zero() || y.is_zero() {
        return Ok(out);
    }
    let dx = x.derivatives();
    let dy = y.derivatives();
    let kk = int(k as i64);
    let mm = int(m as i64);

    for target in multisets(dim, r) {
        let perms = arrangements(&target);
        let mut acc: Option<C> = None;
        let mut push = |term: C, coef: &Rational| {
            let term = term.scaled(coef);
            acc = Some(match acc.take() {
                Some(a) => a.plus(&term),
                None => term,
            });
        };
        for a in &perms {
            if k >= 1 {
                let y_idx = sorted(a[..m].to_vec());
                for l in 0..dim {
                    let mut x_idx = a[m..].to_vec();
                    x_idx.push(l as u8);
                    if let (Some(xc), Some(dyc)) = (x.get(&x_idx), dy[l].get(&y_idx)) {
                        push(xc.times(dyc), &kk);
                    }
                }
            }
            if m >= 1 {
                let x_idx = sorted(a[..k].to_vec());
                for l in 0..dim {
                    let mut y_idx = a[k..].to_vec();
                    y_idx.push(l as u8);
                    if let (Some(yc), Some(dxc)) = (y.get(&y_idx), dx[l].get(&x_idx)) {
                        push(yc.times(dxc), &-mm.clone());
                    }
                }
            }
        }
        if let Some(total) = acc {
            let avg = total.scaled(&Rational::new(1.into(), (perms.len() as i64).into()));
            out.accumulate(target, avg);
        }
    }
    Ok(out)
}

/// Lie derivative of a symmetric tensor along a vector field, `L_Y X = -[X, Y]`.
pub fn lie_derivative<C: Coefficient>(y: &SymTensor<C>, x: &SymTensor<C>) -> Result<SymTensor<C>> {
    if y.order != 1 {
        return Err(Error::OrderMismatch(format!(
            "Lie derivative needs a vector field, got order {}",
            y.order
        )));
    }
    Ok(schouten_bracket(x, y)?.neg())
}

/// Formal sum of symmetric tensors of different orders; missing orders are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedTensor<C = Poly> {
    dim: usize,
    parts: BTreeMap<usize, SymTensor<C>>,
}

impl<C: Coefficient> GradedTensor<C> {
    pub fn zero(dim: usize) -> Self {
        GradedTensor {
            dim,
            parts: BTreeMap::new(),
        }
    }

    pub fn from_parts<I: IntoIterator<Item = SymTensor<C>>>(dim: usize, parts: I) -> Result<Self> {
        let mut g = Self::zero(dim);
        for p in parts {
            g.add_part(p)?;
        }
        Ok(g)
    }

    /// Adds a homogeneous part to whatever is stored at that order.
    pub fn add_part(&mut self, part: SymTensor<C>) -> Result<()> {
        if part.dim != self.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: part.dim,
            });
        }
        let k = part.order;
        let merged = match self.parts.remove(&k) {
            Some(existing) => existing.plus(&part)?,
            None => part,
        };
        if !merged.is_zero() {
            self.parts.insert(k, merged);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn part(&self, order: usize) -> Option<&SymTensor<C>> {
        self.parts.get(&order)
    }

    /// Part of the given order, or the zero tensor.
    pub fn part_or_zero(&self, order: usize) -> SymTensor<C> {
        self.parts
            .get(&order)
            .cloned()
            .unwrap_or_else(|| SymTensor::zero(self.dim, order))
    }

    pub fn parts(&self) -> impl Iterator<Item = &SymTensor<C>> {
        self.parts.values()
    }

    pub fn max_order(&self) -> Option<usize> {
        self.parts.keys().next_back().copied()
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for p in other.parts.values() {
            out.add_part(p.clone())?;
        }
        Ok(out)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.neg())
    }

    pub fn neg(&self) -> Self {
        GradedTensor {
            dim: self.dim,
            parts: self.parts.iter().map(|(k, p)| (*k, p.neg())).collect(),
        }
    }
}

/// Bilinear extension of the Schouten concomitant to graded tensors.
///
/// Fails with [`Error::OrderCap`] if any pair of nonzero parts would produce
/// an order above `order_cap`.
pub fn schouten_graded<C: Coefficient>(
    x: &GradedTensor<C>,
    y: &GradedTensor<C>,
    order_cap: usize,
) -> Result<GradedTensor<C>> {
    if x.dim != y.dim {
        return Err(Error::DimMismatch {
            left: x.dim,
            right: y.dim,
        });
    }
    let mut out = GradedTensor::zero(x.dim);
    for xp in x.parts.values() {
        for yp in y.parts.values() {
            let order = (xp.order + yp.order).saturating_sub(1);
            if order > order_cap {
                return Err(Error::OrderCap {
                    order,
                    cap: order_cap,
                });
            }
            out.add_part(schouten_bracket(xp, yp)?)?;
        }
    }
    Ok(out)
}

/// Element `(σ, Y)` of the subalgebra `s` of functions and vector fields.
#[derive(Clone, Debug, PartialEq)]
pub struct SPair {
    pub sigma: SymTensor,
    pub y: SymTensor,
}

impl SPair {
    pub fn new(sigma: SymTensor, y: SymTensor) -> Result<Self> {
        if sigma.order != 0 || y.order != 1 {
            return Err(Error::OrderMismatch(format!(
                "s-pair needs orders (0, 1), got ({}, {})",
                sigma.order, y.order
            )));
        }
        if sigma.dim != y.dim {
            return Err(Error::DimMismatch {
                left: sigma.dim,
                right: y.dim,
            });
        }
        Ok(SPair { sigma, y })
    }

    pub fn zero(dim: usize) -> Self {
        SPair {
            sigma: SymTensor::zero(dim, 0),
            y: SymTensor::zero(dim, 1),
        }
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim
    }

    pub fn is_zero(&self) -> bool {
        self.sigma.is_zero() && self.y.is_zero()
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        Ok(SPair {
            sigma: self.sigma.plus(&other.sigma)?,
            y: self.y.plus(&other.y)?,
        })
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        Ok(SPair {
            sigma: self.sigma.minus(&other.sigma)?,
            y: self.y.minus(&other.y)?,
        })
    }

    pub fn to_graded(&self) -> GradedTensor {
        let mut g = GradedTensor::zero(self.dim());
        g.add_part(self.sigma.clone()).expect("same dim");
        g.add_part(self.y.clone()).expect("same dim");
        g
    }
}

/// Element of the subalgebra `n`: a graded tensor with parts of order `>= 2` only.
#[derive(Clone, Debug, PartialEq)]
pub struct NPart(GradedTensor);

impl NPart {
    pub fn new(parts: GradedTensor) -> Result<Self> {
        if parts.part(0).is_some() || parts.part(1).is_some() {
            return Err(Error::OrderMismatch(
                "n-part may not carry orders 0 or 1".into(),
            ));
        }
        Ok(NPart(parts))
    }

    pub fn zero(dim: usize) -> Self {
        NPart(GradedTensor::zero(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn graded(&self) -> &GradedTensor {
        &self.0
    }

    pub fn part(&self, order: usize) -> Option<&SymTensor> {
        self.0.part(order)
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        Ok(NPart(self.0.plus(&other.0)?))
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        Ok(NPart(self.0.minus(&other.0)?))
    }
}

pub fn embed(s: &SPair, n: &NPart) -> Result<GradedTensor> {
    s.to_graded().plus(n.graded())
}

/// Direct-sum projection `TQ -> s ⊕ n` by order.
pub fn split(x: &GradedTensor) -> (SPair, NPart) {
    let dim = x.dim;
    let s = SPair {
        sigma: x.part_or_zero(0),
        y: x.part_or_zero(1),
    };
    let mut n = GradedTensor::zero(dim);
    for p in x.parts.values().filter(|p| p.order >= 2) {
        n.add_part(p.clone()).expect("same dim");
    }
    (s, NPart(n))
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimMismatch { left: a, right: b });
    }
    Ok(())
}

/// Left action of `n` on `s`: `X ▷ (σ, Y) = (0, [X^2, σ])`.
pub fn act_left(xn: &NPart, s: &SPair) -> Result<SPair> {
    check_dims(xn.dim(), s.dim())?;
    let dim = s.dim();
    let y = match xn.part(2) {
        Some(x2) => schouten_bracket(x2, &s.sigma)?,
        None => SymTensor::zero(dim, 1),
    };
    Ok(SPair {
        sigma: SymTensor::zero(dim, 0),
        y,
    })
}

/// Right action of `s` on `n`: `X ◁ (σ, Y) = Σ_{k>=2} ([X^{k+1}, σ] - L_Y X^k)`.
pub fn act_right(xn: &NPart, s: &SPair, order_cap: usize) -> Result<NPart> {
    check_dims(xn.dim(), s.dim())?;
    let mut out = GradedTensor::zero(s.dim());
    for part in xn.0.parts.values() {
        let k = part.order;
        if k > order_cap {
            return Err(Error::OrderCap {
                order: k,
                cap: order_cap,
            });
        }
        // [X^k, σ] lands in order k-1: contributes to n for k >= 3
        if k >= 3 {
            out.add_part(schouten_bracket(part, &s.sigma)?)?;
        }
        out.add_part(lie_derivative(&s.y, part)?.neg())?;
    }
    Ok(NPart(out))
}

fn directional_derivative(z: &SymTensor, sigma: &SymTensor) -> SymTensor {
    let dim = z.dim;
    let mut out = SymTensor::zero(dim, 0);
    if let Some(s) = sigma.get(&[]) {
        for l in 0..dim {
            if let Some(zl) = z.get(&[l as u8]) {
                out.accumulate(vec![], zl * &s.partial(l).expect("axis in range"));
            }
        }
    }
    out
}

fn jacobi_lie(z: &SymTensor, y: &SymTensor) -> SymTensor {
    let dim = z.dim;
    let mut comps = Vec::new();
    for i in 0..dim as u8 {
        let mut acc = Poly::zero(dim);
        for l in 0..dim {
            let zl = z.get(&[l as u8]);
            let yl = y.get(&[l as u8]);
            if let (Some(zl), Some(yi)) = (zl, y.get(&[i])) {
                acc = &acc + &(zl * &yi.partial(l).expect("axis"));
            }
            if let (Some(yl), Some(zi)) = (yl, z.get(&[i])) {
                acc = &acc - &(yl * &zi.partial(l).expect("axis"));
            }
        }
        comps.push((vec![i], acc));
    }
    SymTensor::from_components(dim, 1, comps)
}

/// Bracket on `s`: `[(η, Z), (σ, Y)] = (Z(σ) - Y(η), [Z, Y])`, computed with
/// directional derivatives and the Jacobi-Lie bracket of vector fields.
pub fn bracket_s(a: &SPair, b: &SPair) -> Result<SPair> {
    check_dims(a.dim(), b.dim())?;
    let sigma = directional_derivative(&a.y, &b.sigma).minus(&directional_derivative(&b.y, &a.sigma))?;
    Ok(SPair {
        sigma,
        y: jacobi_lie(&a.y, &b.y),
    })
}

/// Schouten bracket restricted to `n` (lands in orders `>= 3`).
pub fn bracket_n(a: &NPart, b: &NPart, order_cap: usize) -> Result<NPart> {
    NPart::new(schouten_graded(&a.0, &b.0, order_cap)?)
}

/// Bracket of the double cross sum `s ⋈ n`:
///
/// ```text
/// [(ξ, η), (ξ', η')] = ([ξ, ξ'] + η ▷ ξ' - η' ▷ ξ,  [η, η'] + η ◁ ξ' - η' ◁ ξ)
/// ```
pub fn double_cross_bracket(
    a: (&SPair, &NPart),
    b: (&SPair, &NPart),
    order_cap: usize,
) -> Result<(SPair, NPart)> {
    let (xi, eta) = a;
    let (xi2, eta2) = b;
    let s = bracket_s(xi, xi2)?
        .plus(&act_left(eta, xi2)?)?
        .minus(&act_left(eta2, xi)?)?;
    let n = bracket_n(eta, eta2, order_cap)?
        .plus(&act_right(eta, xi2, order_cap)?)?
        .minus(&act_right(eta2, xi, order_cap)?)?;
    Ok((s, n))
}

/// Left-minus-right of both matched pair compatibility conditions:
///
/// ```text
/// η ▷ [ξ, ξ'] - ([η ▷ ξ, ξ'] + [ξ, η ▷ ξ'] + (η ◁ ξ) ▷ ξ' - (η ◁ ξ') ▷ ξ)
/// [η, η'] ◁ ξ - ([η, η' ◁ ξ] + [η ◁ ξ, η'] + η ◁ (η' ▷ ξ) - η' ◁ (η ▷ ξ))
/// ```
pub fn compat_residuals(
    xi: &SPair,
    xi2: &SPair,
    eta: &NPart,
    eta2: &NPart,
    order_cap: usize,
) -> Result<(SPair, NPart)> {
    let lhs1 = act_left(eta, &bracket_s(xi, xi2)?)?;
    let rhs1 = bracket_s(&act_left(eta, xi)?, xi2)?
        .plus(&bracket_s(xi, &act_left(eta, xi2)?)?)?
        .plus(&act_left(&act_right(eta, xi, order_cap)?, xi2)?)?
        .minus(&act_left(&act_right(eta, xi2, order_cap)?, xi)?)?;

    let lhs2 = act_right(&bracket_n(eta, eta2, order_cap)?, xi, order_cap)?;
    let rhs2 = bracket_n(eta, &act_right(eta2, xi, order_cap)?, order_cap)?
        .plus(&bracket_n(&act_right(eta, xi, order_cap)?, eta2, order_cap)?)?
        .plus(&act_right(eta, &act_left(eta2, xi)?, order_cap)?)?
        .minus(&act_right(eta2, &act_left(eta, xi)?, order_cap)?)?;

    Ok((lhs1.minus(&rhs1)?, lhs2.minus(&rhs2)?))
}

impl fmt::Display for SymTensor<Poly> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "order {}: {{", self.order)?;
        let entries: Vec<String> = self
            .comps
            .iter()
            .map(|(idx, c)| {
                let label: String = idx.iter().map(|i| (i + 1).to_string()).collect();
                format!("{label}: {c}")
            })
            .collect();
        write!(f, "{}}}", entries.join("; "))
    }
}

impl fmt::Display for GradedTensor<Poly> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        let lines: Vec<String> = self.parts.values().map(|p| p.to_string()).collect();
        write!(f, "{}", lines.join("\n"))
    }
}
