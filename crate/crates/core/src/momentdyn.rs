//! Moment fields `A_0 = ρ, A_1 = M, A_2, .., A_K` on the spatial grid, the
//! coadjoint action of symmetric contravariant tensors on them, its matched
//! pair decomposition and the moment Lie-Poisson equations.
//!
//! One-dimensional operators (contraction is a pointwise product):
//!
//! ```text
//! A ⋆ X      = m A X'            (A of order m+k-1, target order m)
//! X ∗ A      = k X A'            (X of order k)
//! L_X A      = A ⋆ X + X ∗ A
//! div X      = k X'              (div of a function is 0)
//! ad*_X A_m  = Σ_k L_{X^k} A_{m+k-1} + div X^k A_{m+k-1}
//! ```
//!
//! Hierarchies are closed by truncation: terms needing `A_j` with `j > K` are
//! dropped and listed in a [`TruncationReport`].

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::gridcore::{DiffScheme, SpatialFn, SpatialGrid};

/// Contravariant field `X = Σ_k X^k` sampled on the grid; absent orders are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ContraField {
    grid: SpatialGrid,
    parts: BTreeMap<usize, SpatialFn>,
}

impl ContraField {
    pub fn zero(grid: SpatialGrid) -> Self {
        ContraField {
            grid,
            parts: BTreeMap::new(),
        }
    }

    pub fn from_parts<I: IntoIterator<Item = (usize, SpatialFn)>>(grid: SpatialGrid, parts: I) -> Result<Self> {
        let mut out = Self::zero(grid);
        for (k, x) in parts {
            out.set(k, x)?;
        }
        Ok(out)
    }

    pub fn set(&mut self, order: usize, x: SpatialFn) -> Result<()> {
        if x.grid() != self.grid {
            return Err(Error::GridMismatch(format!("order {order} slot")));
        }
        self.parts.insert(order, x);
        Ok(())
    }

    pub fn grid(&self) -> SpatialGrid {
        self.grid
    }

    pub fn get(&self, order: usize) -> Option<&SpatialFn> {
        self.parts.get(&order)
    }

    pub fn parts(&self) -> impl Iterator<Item = (usize, &SpatialFn)> {
        self.parts.iter().map(|(k, x)| (*k, x))
    }

    pub fn max_order(&self) -> Option<usize> {
        self.parts.keys().next_back().copied()
    }

    /// Parts of order `>= 2` (the `n` component).
    pub fn n_part(&self) -> ContraField {
        ContraField {
            grid: self.grid,
            parts: self
                .parts
                .iter()
                .filter(|(k, _)| **k >= 2)
                .map(|(k, x)| (*k, x.clone()))
                .collect(),
        }
    }

    pub fn s_part(&self) -> SField {
        SField {
            sigma: self.get(0).cloned().unwrap_or_else(|| SpatialFn::zeros(self.grid)),
            y: self.get(1).cloned().unwrap_or_else(|| SpatialFn::zeros(self.grid)),
        }
    }

    /// `(σ, Y) ⊕ X_n`.
    pub fn embed(s: &SField, xn: &ContraField) -> Result<ContraField> {
        if xn.parts.keys().any(|&k| k < 2) {
            return Err(Error::OrderMismatch("n-part may not carry orders 0 or 1".into()));
        }
        let mut out = xn.clone();
        out.set(0, s.sigma.clone())?;
        out.set(1, s.y.clone())?;
        Ok(out)
    }
}

/// Element `(σ, Y)` of `s` on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SField {
    pub sigma: SpatialFn,
    pub y: SpatialFn,
}

/// Moments `ρ = A_0`, `M = A_1` and `A_2..A_K`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentState {
    pub rho: SpatialFn,
    pub m: SpatialFn,
    pub a: Vec<SpatialFn>,
}

impl MomentState {
    pub fn new(rho: SpatialFn, m: SpatialFn, a: Vec<SpatialFn>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::OrderMismatch("moment state needs K >= 2".into()));
        }
        let g = rho.grid();
        if m.grid() != g || a.iter().any(|x| x.grid() != g) {
            return Err(Error::GridMismatch("moment fields on different grids".into()));
        }
        Ok(MomentState { rho, m, a })
    }

    pub fn zeros(grid: SpatialGrid, k: usize) -> Self {
        assert!(k >= 2, "K >= 2");
        MomentState {
            rho: SpatialFn::zeros(grid),
            m: SpatialFn::zeros(grid),
            a: vec![SpatialFn::zeros(grid); k - 1],
        }
    }

    /// Builds the state from the list `A_0..A_K`.
    pub fn from_orders(orders: Vec<SpatialFn>) -> Result<Self> {
        let mut it = orders.into_iter();
        let rho = it.next().ok_or_else(|| Error::OrderMismatch("empty moment list".into()))?;
        let m = it.next().ok_or_else(|| Error::OrderMismatch("moment list lacks A_1".into()))?;
        Self::new(rho, m, it.collect())
    }

    pub fn grid(&self) -> SpatialGrid {
        self.rho.grid()
    }

    /// Highest stored order `K`.
    pub fn k(&self) -> usize {
        self.a.len() + 1
    }

    pub fn order(&self, j: usize) -> Option<&SpatialFn> {
        match j {
            0 => Some(&self.rho),
            1 => Some(&self.m),
            _ => self.a.get(j - 2),
        }
    }

    pub fn orders(&self) -> Vec<SpatialFn> {
        let mut v = vec![self.rho.clone(), self.m.clone()];
        v.extend(self.a.iter().cloned());
        v
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&SpatialFn, &SpatialFn) -> SpatialFn) -> Self {
        assert_eq!(self.k(), other.k(), "moment order mismatch");
        MomentState {
            rho: f(&self.rho, &other.rho),
            m: f(&self.m, &other.m),
            a: self.a.iter().zip(&other.a).map(|(x, y)| f(x, y)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&SpatialFn) -> SpatialFn) -> Self {
        MomentState {
            rho: f(&self.rho),
            m: f(&self.m),
            a: self.a.iter().map(f).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.orders().iter().map(SpatialFn::max_abs).fold(0.0, f64::max)
    }
}

/// A term `L_{X^k} A_j + div X^k A_j` that was dropped because `j > K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DroppedTerm {
    pub target: usize,
    pub field_order: usize,
    pub needed_moment: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TruncationReport {
    pub dropped: Vec<DroppedTerm>,
}

impl TruncationReport {
    pub fn is_empty(&self) -> bool {
        self.dropped.is_empty()
    }

    fn push(&mut self, target: usize, field_order: usize, needed_moment: usize) {
        self.dropped.push(DroppedTerm {
            target,
            field_order,
            needed_moment,
        });
    }

    pub fn merge(&mut self, other: TruncationReport) {
        self.dropped.extend(other.dropped);
        self.dropped.sort();
        self.dropped.dedup();
    }
}

impl fmt::Display for TruncationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dropped.is_empty() {
            return writeln!(f, "no terms dropped");
        }
        for d in &self.dropped {
            writeln!(
                f,
                "order {}: dropped term of field order {} needing A_{}",
                d.target, d.field_order, d.needed_moment
            )?;
        }
        Ok(())
    }
}

/// `A ⋆ X = m A X'`.
pub fn star(a: &SpatialFn, x: &SpatialFn, m: usize, scheme: DiffScheme) -> SpatialFn {
    if m == 0 {
        return SpatialFn::zeros(a.grid());
    }
    &(a * &x.ddq(scheme)) * m as f64
}

/// `X ∗ A = k X A'`.
pub fn ast(x: &SpatialFn, a: &SpatialFn, k: usize, scheme: DiffScheme) -> SpatialFn {
    if k == 0 {
        return SpatialFn::zeros(a.grid());
    }
    &(x * &a.ddq(scheme)) * k as f64
}

/// Generalized Lie derivative `L_{X^k} A` into order `m`.
pub fn gen_lie(x: &SpatialFn, k: usize, a: &SpatialFn, m: usize, scheme: DiffScheme) -> SpatialFn {
    &star(a, x, m, scheme) + &ast(x, a, k, scheme)
}

/// `div X^k = k X'`.
pub fn div_tensor(x: &SpatialFn, k: usize, scheme: DiffScheme) -> SpatialFn {
    if k == 0 {
        return SpatialFn::zeros(x.grid());
    }
    &x.ddq(scheme) * k as f64
}

/// `L_{X^k} A_j + div X^k A_j` into order `m`.
fn coad_term(x: &SpatialFn, k: usize, a: &SpatialFn, m: usize, scheme: DiffScheme) -> SpatialFn {
    &gen_lie(x, k, a, m, scheme) + &(&div_tensor(x, k, scheme) * a)
}

fn check_grid(a: SpatialGrid, b: SpatialGrid, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(what.into()));
    }
    Ok(())
}

/// `ad*_X A` for every target order `0..=K`, summing over all parts of `X`.
pub fn coad_full(x: &ContraField, s: &MomentState, scheme: DiffScheme) -> Result<(MomentState, TruncationReport)> {
    check_grid(x.grid, s.grid(), "field and moments")?;
    let kmax = s.k();
    let mut report = TruncationReport::default();
    let mut out = Vec::with_capacity(kmax + 1);
    for m in 0..=kmax {
        let mut acc = SpatialFn::zeros(s.grid());
        for (k, xk) in x.parts() {
            let Some(j) = (m + k).checked_sub(1) else { continue };
            match s.order(j) {
                Some(aj) => acc = &acc + &coad_term(xk, k, aj, m, scheme),
                None => report.push(m, k, j),
            }
        }
        out.push(acc);
    }
    Ok((MomentState::from_orders(out)?, report))
}

/// `s` acting on `s*`: `(Yρ' + ρY', ρσ' + L_Y M + Y'M)`.
pub fn coad_s(s: &SField, rho: &SpatialFn, m: &SpatialFn, scheme: DiffScheme) -> (SpatialFn, SpatialFn) {
    let r = coad_term(&s.y, 1, rho, 0, scheme);
    let mm = &star(rho, &s.sigma, 1, scheme) + &coad_term(&s.y, 1, m, 1, scheme);
    (r, mm)
}

/// Dual of the `n`-action on `s`: `(-X² ∗ M - div X² M, 0) = (-2X²M' - 2X²'M, 0)`.
pub fn dual_right(rho: &SpatialFn, m: &SpatialFn, xn: &ContraField, scheme: DiffScheme) -> (SpatialFn, SpatialFn) {
    let zero = SpatialFn::zeros(rho.grid());
    match xn.get(2) {
        Some(x2) => (-&coad_term(x2, 2, m, 0, scheme), zero),
        None => (zero.clone(), zero),
    }
}

/// Dual of the `s`-action on `n`, orders `2..=K`:
/// slot 2 `L_Y A_2 + Y'A_2`, slot `m >= 3` `L_Y A_m + Y'A_m + A_{m-1} ⋆ σ`.
pub fn dual_left(s: &SField, an: &[SpatialFn], scheme: DiffScheme) -> Vec<SpatialFn> {
    (0..an.len())
        .map(|i| {
            let m = i + 2;
            let mut v = coad_term(&s.y, 1, &an[i], m, scheme);
            if m >= 3 {
                v = &v + &star(&an[i - 1], &s.sigma, m, scheme);
            }
            v
        })
        .collect()
}

/// `b*`: `M ⋆ σ = 2 M σ'` in order 2, zero above; `k_max` is the top order `K`.
pub fn b_star(s: &SField, m: &SpatialFn, k_max: usize, scheme: DiffScheme) -> Vec<SpatialFn> {
    let mut out = vec![SpatialFn::zeros(m.grid()); k_max - 1];
    out[0] = star(m, &s.sigma, 2, scheme);
    out
}

/// `a*`: `ρ`-slot `-Σ_{k>=2} (X^{k+1} ∗ A_k + div X^{k+1} A_k)`,
/// `M`-slot `-Σ_{k>=2} (L_{X^k} A_k + div X^k A_k)`.
pub fn a_star(xn: &ContraField, an: &[SpatialFn], scheme: DiffScheme) -> (SpatialFn, SpatialFn) {
    let g = xn.grid;
    let mut r = SpatialFn::zeros(g);
    let mut mm = SpatialFn::zeros(g);
    for (i, ak) in an.iter().enumerate() {
        let k = i + 2;
        if let Some(x) = xn.get(k + 1) {
            r = &r + &coad_term(x, k + 1, ak, 0, scheme);
        }
        if let Some(x) = xn.get(k) {
            mm = &mm + &coad_term(x, k, ak, 1, scheme);
        }
    }
    (-&r, -&mm)
}

/// `n` acting on `n*`, orders `2..=K`: `Σ_{k>=2} L_{X^k} A_{m+k-1} + div X^k A_{m+k-1}`.
pub fn coad_n(xn: &ContraField, an: &[SpatialFn], scheme: DiffScheme) -> (Vec<SpatialFn>, TruncationReport) {
    let kmax = an.len() + 1;
    let mut report = TruncationReport::default();
    let out = (2..=kmax)
        .map(|m| {
            let mut acc = SpatialFn::zeros(xn.grid);
            for (k, x) in xn.parts().filter(|(k, _)| *k >= 2) {
                let j = m + k - 1;
                match an.get(j - 2) {
                    Some(aj) => acc = &acc + &coad_term(x, k, aj, m, scheme),
                    None => report.push(m, k, j),
                }
            }
            acc
        })
        .collect();
    (out, report)
}

/// Matched pair assembly of `ad*_{(s, X_n)} S`:
///
/// ```text
/// ρ~   = coad_s_ρ - dual_right_ρ - a*_ρ
/// M~   = coad_s_M - a*_M
/// A~_m = dual_left_m + b*_m + coad_n_m          (m >= 2)
/// ```
pub fn matched_coadjoint(
    s: &SField,
    xn: &ContraField,
    state: &MomentState,
    scheme: DiffScheme,
) -> Result<(MomentState, TruncationReport)> {
    let g = state.grid();
    check_grid(xn.grid, g, "n-field and moments")?;
    check_grid(s.sigma.grid(), g, "s-field and moments")?;
    if xn.parts.keys().any(|&k| k < 2) {
        return Err(Error::OrderMismatch("n-part may not carry orders 0 or 1".into()));
    }
    let (cr, cm) = coad_s(s, &state.rho, &state.m, scheme);
    let (dr, _) = dual_right(&state.rho, &state.m, xn, scheme);
    let (ar, am) = a_star(xn, &state.a, scheme);
    let rho = &(&cr - &dr) - &ar;
    let m = &cm - &am;
    let dl = dual_left(s, &state.a, scheme);
    let bs = b_star(s, &state.m, state.k(), scheme);
    let (cn, report) = coad_n(xn, &state.a, scheme);
    let a = dl
        .iter()
        .zip(&bs)
        .zip(&cn)
        .map(|((x, y), z)| &(x + y) + z)
        .collect();
    Ok((MomentState { rho, m, a }, report))
}

/// Moment Lie-Poisson equations `Ȧ = -ad*_{δH/δA} A` assembled through the
/// matched decomposition; `slots` holds `δH/δA_k` at order `k`.
pub fn lp_rhs(slots: &ContraField, state: &MomentState, scheme: DiffScheme) -> Result<(MomentState, TruncationReport)> {
    let (out, report) = matched_coadjoint(&slots.s_part(), &slots.n_part(), state, scheme)?;
    Ok((out.map(|x| -x), report))
}

/// `A_{2..K}` evolution under `n`-slots only: `Ȧ_m = -Σ_{k>=2} (L_{δH/δA_k} A_{m+k-1} + div(δH/δA_k) A_{m+k-1})`.
pub fn n_rhs(slots: &ContraField, an: &[SpatialFn], scheme: DiffScheme) -> (Vec<SpatialFn>, TruncationReport) {
    let (out, report) = coad_n(&slots.n_part(), an, scheme);
    (out.iter().map(|x| -x).collect(), report)
}

/// Internal energy `w(ρ)` of a barotropic fluid.
pub trait FluidHamiltonian {
    fn w(&self, rho: f64) -> f64;
    fn dw(&self, rho: f64) -> f64;

    /// Enthalpy `r = ρ w' + w`.
    fn enthalpy(&self, rho: f64) -> f64 {
        rho * self.dw(rho) + self.w(rho)
    }

    /// Pressure `p = ρ² w'`.
    fn pressure(&self, rho: f64) -> f64 {
        rho * rho * self.dw(rho)
    }
}

/// `w(ρ) = κ ρ^{γ-1} / (γ-1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Polytropic {
    pub kappa: f64,
    pub gamma: f64,
}

impl FluidHamiltonian for Polytropic {
    fn w(&self, rho: f64) -> f64 {
        self.kappa * rho.powf(self.gamma - 1.0) / (self.gamma - 1.0)
    }
    fn dw(&self, rho: f64) -> f64 {
        self.kappa * rho.powf(self.gamma - 2.0)
    }
}

/// Velocity `Y = M/ρ` and `δH/δρ = -c M²/ρ² + r(ρ)`, with `c = 1` (default) or `1/2`.
pub fn euler_variations(
    h: &dyn FluidHamiltonian,
    rho: &SpatialFn,
    m: &SpatialFn,
    half_factor: bool,
) -> Result<SField> {
    if let Some((index, &value)) = rho.values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonpositiveDensity { index, value });
    }
    let c = if half_factor { 0.5 } else { 1.0 };
    let y = m.zip_map(rho, |m, r| m / r);
    let sigma = m.zip_map(rho, |m, r| -c * m * m / (r * r) + h.enthalpy(r));
    Ok(SField { sigma, y })
}

/// Compressible Euler equations in momentum form, `ρ̇ = -(Yρ' + ρY')`,
/// `Ṁ = -(ρσ' + L_Y M + Y'M)`.
pub fn euler_rhs(
    h: &dyn FluidHamiltonian,
    rho: &SpatialFn,
    m: &SpatialFn,
    half_factor: bool,
    scheme: DiffScheme,
) -> Result<(SpatialFn, SpatialFn)> {
    let s = euler_variations(h, rho, m, half_factor)?;
    let (r, mm) = coad_s(&s, rho, m, scheme);
    Ok((-&r, -&mm))
}

/// Residual of the velocity form `Ẏ + Y Y' + p'/ρ` for the state's Euler flow.
pub fn euler_standard_residual(
    h: &dyn FluidHamiltonian,
    rho: &SpatialFn,
    m: &SpatialFn,
    half_factor: bool,
    scheme: DiffScheme,
) -> Result<SpatialFn> {
    let (rho_dot, m_dot) = euler_rhs(h, rho, m, half_factor, scheme)?;
    let y = m.zip_map(rho, |m, r| m / r);
    // Ẏ = (Ṁ - Y ρ̇) / ρ
    let y_dot = &(&m_dot - &(&y * &rho_dot)) * &rho.map(|r| 1.0 / r);
    let pressure = rho.map(|r| h.pressure(r));
    let grad_p = &pressure.ddq(scheme) * &rho.map(|r| 1.0 / r);
    Ok(&(&y_dot + &(&y * &y.ddq(scheme))) + &grad_p)
}

/// State that classical Runge-Kutta can advance.
pub trait OdeState: Clone {
    /// `self + c · other`.
    fn axpy(&self, c: f64, other: &Self) -> Self;
    fn all_finite(&self) -> bool;
}

impl OdeState for f64 {
    fn axpy(&self, c: f64, other: &Self) -> Self {
        self + c * other
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl OdeState for SpatialFn {
    fn axpy(&self, c: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + c * b)
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl<A: OdeState, B: OdeState> OdeState for (A, B) {
    fn axpy(&self, c: f64, other: &Self) -> Self {
        (self.0.axpy(c, &other.0), self.1.axpy(c, &other.1))
    }
    fn all_finite(&self) -> bool {
        self.0.all_finite() && self.1.all_finite()
    }
}

impl OdeState for MomentState {
    fn axpy(&self, c: f64, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.axpy(c, b))
    }
    fn all_finite(&self) -> bool {
        self.orders().iter().all(SpatialFn::is_finite)
    }
}

/// One classical four-stage Runge-Kutta step; aborts on non-finite stages.
pub fn rk4_step<S, F>(rhs: F, state: &S, dt: f64) -> Result<S>
where
    S: OdeState,
    F: Fn(&S) -> Result<S>,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::BadTimeStep(dt));
    }
    let check = |s: S, stage: &str| -> Result<S> {
        if s.all_finite() {
            Ok(s)
        } else {
            Err(Error::NonFinite(format!("RK4 {stage}")))
        }
    };
    let k1 = check(rhs(state)?, "stage 1")?;
    let k2 = check(rhs(&state.axpy(0.5 * dt, &k1))?, "stage 2")?;
    let k3 = check(rhs(&state.axpy(0.5 * dt, &k2))?, "stage 3")?;
    let k4 = check(rhs(&state.axpy(dt, &k3))?, "stage 4")?;
    let next = state
        .axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4);
    check(next, "update")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const F: DiffScheme = DiffScheme::Fourier;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(2.0 * PI, 64).unwrap()
    }
    fn sin() -> SpatialFn {
        SpatialFn::from_fn(grid(), f64::sin)
    }
    fn cos() -> SpatialFn {
        SpatialFn::from_fn(grid(), f64::cos)
    }
    fn close(a: &SpatialFn, b: &SpatialFn, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn operator_examples() {
        let one = SpatialFn::constant(grid(), 1.0);
        assert_eq!(star(&one, &sin(), 0, F).max_abs(), 0.0);
        assert!(close(&star(&one, &sin(), 2, F), &(&cos() * 2.0), 1e-12));
        assert!(star(&sin(), &one, 2, F).max_abs() < 1e-14);
        assert_eq!(ast(&one, &sin(), 0, F).max_abs(), 0.0);
        assert!(close(&ast(&one, &sin(), 2, F), &(&cos() * 2.0), 1e-12));
        assert!(ast(&sin(), &one, 3, F).max_abs() < 1e-14);
        assert_eq!(div_tensor(&sin(), 0, F).max_abs(), 0.0);
        assert!(close(&div_tensor(&sin(), 1, F), &cos(), 1e-12));
        assert!(div_tensor(&one, 2, F).max_abs() < 1e-14);
    }

    #[test]
    fn lie_derivative_of_one_form() {
        // L_Y M = Y M' + M Y' for a one-form density's momentum
        let y = &sin() + &SpatialFn::constant(grid(), 2.0);
        let m = cos();
        let got = gen_lie(&y, 1, &m, 1, F);
        let expect = SpatialFn::from_fn(grid(), |q| (q.sin() + 2.0) * -q.sin() + q.cos() * q.cos());
        assert!(close(&got, &expect, 1e-12));
        let zero = SpatialFn::zeros(grid());
        assert!(gen_lie(&zero, 1, &m, 1, F).max_abs() == 0.0);
        assert!(gen_lie(&y, 1, &zero, 1, F).max_abs() < 1e-15);
    }

    fn state(k: usize) -> MomentState {
        let g = grid();
        let orders = (0..=k)
            .map(|j| SpatialFn::from_fn(g, move |q| 1.0 + 0.3 * ((j + 1) as f64 * q).cos()))
            .collect();
        MomentState::from_orders(orders).unwrap()
    }

    #[test]
    fn coad_full_vector_field() {
        let s = state(3);
        let y = sin();
        let x = ContraField::from_parts(grid(), [(1, y.clone())]).unwrap();
        let (out, _) = coad_full(&x, &s, F).unwrap();
        let expect = (&y * &s.rho).ddq(F);
        assert!(close(&out.rho, &expect, 1e-12));
        let (zero, report) = coad_full(&ContraField::zero(grid()), &s, F).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        assert!(report.is_empty());
    }

    #[test]
    fn truncation_is_reported() {
        let s = state(2);
        let x = ContraField::from_parts(grid(), [(3, sin())]).unwrap();
        let (_, report) = coad_full(&x, &s, F).unwrap();
        // target 1 needs A_3, target 2 needs A_4
        assert!(report.dropped.contains(&DroppedTerm { target: 1, field_order: 3, needed_moment: 3 }));
        assert!(report.dropped.contains(&DroppedTerm { target: 2, field_order: 3, needed_moment: 4 }));
        assert!(!report.to_string().is_empty());
    }

    #[test]
    fn matched_equals_full() {
        let s = state(4);
        let sf = SField { sigma: cos(), y: &sin() * 0.5 };
        let xn = ContraField::from_parts(grid(), [(2, cos()), (3, &sin() * 0.2), (4, cos())]).unwrap();
        let (a, ra) = matched_coadjoint(&sf, &xn, &s, F).unwrap();
        let (b, rb) = coad_full(&ContraField::embed(&sf, &xn).unwrap(), &s, F).unwrap();
        for (x, y) in a.orders().iter().zip(b.orders()) {
            assert!(close(x, &y, 1e-12));
        }
        let mut ra = ra;
        ra.merge(TruncationReport::default());
        let mut rb = rb;
        rb.merge(TruncationReport::default());
        assert_eq!(ra, rb);
        let zero = MomentState::zeros(grid(), 4);
        assert_eq!(matched_coadjoint(&sf, &xn, &zero, F).unwrap().0.max_abs(), 0.0);
    }

    #[test]
    fn dual_action_examples() {
        let g = grid();
        let one = SpatialFn::constant(g, 1.0);
        let zero = SpatialFn::zeros(g);
        let xn = ContraField::from_parts(g, [(2, one.clone())]).unwrap();
        let (r, m) = dual_right(&zero, &sin(), &xn, F);
        assert!(close(&r, &(&cos() * -2.0), 1e-12));
        assert_eq!(m.max_abs(), 0.0);
        let xn3 = ContraField::from_parts(g, [(3, one.clone())]).unwrap();
        assert_eq!(dual_right(&zero, &sin(), &xn3, F).0.max_abs(), 0.0);

        let s = SField { sigma: sin(), y: zero.clone() };
        let an = vec![cos(), sin()];
        let dl = dual_left(&s, &an, F);
        assert_eq!(dl[0].max_abs(), 0.0);
        assert!(close(&dl[1], &(&(&cos() * &cos()) * 3.0), 1e-12));

        let s = SField { sigma: SpatialFn::from_fn(g, |q| q.sin()), y: zero.clone() };
        let bs = b_star(&s, &one, 3, F);
        assert!(close(&bs[0], &(&cos() * 2.0), 1e-12));
        assert_eq!(bs[1].max_abs(), 0.0);
    }

    #[test]
    fn a_star_single_term() {
        let g = grid();
        let x2 = sin();
        let a2 = cos();
        let xn = ContraField::from_parts(g, [(2, x2.clone())]).unwrap();
        let (r, m) = a_star(&xn, &[a2.clone()], F);
        assert_eq!(r.max_abs(), 0.0);
        let expect = -&(&gen_lie(&x2, 2, &a2, 1, F) + &(&(&x2.ddq(F) * 2.0) * &a2));
        assert!(close(&m, &expect, 1e-13));
    }

    #[test]
    fn lp_rhs_reduces_to_euler() {
        let g = grid();
        let fluid = Polytropic { kappa: 1.0, gamma: 2.0 };
        let rho = SpatialFn::from_fn(g, |q| 1.0 + 0.2 * q.cos());
        let m = SpatialFn::from_fn(g, |q| 0.3 * q.sin());
        let vars = euler_variations(&fluid, &rho, &m, false).unwrap();
        let slots = ContraField::from_parts(g, [(0, vars.sigma), (1, vars.y), (2, SpatialFn::zeros(g))]).unwrap();
        let s = MomentState::new(rho.clone(), m.clone(), vec![SpatialFn::zeros(g); 3]).unwrap();
        let (lp, _) = lp_rhs(&slots, &s, F).unwrap();
        let (er, em) = euler_rhs(&fluid, &rho, &m, false, F).unwrap();
        assert_eq!(lp.rho, er);
        assert_eq!(lp.m, em);
    }

    #[test]
    fn euler_equilibrium_and_density_check() {
        let g = grid();
        let fluid = Polytropic { kappa: 1.0, gamma: 1.4 };
        let (r, m) = euler_rhs(&fluid, &SpatialFn::constant(g, 1.0), &SpatialFn::zeros(g), false, F).unwrap();
        assert!(r.max_abs() < 1e-15 && m.max_abs() < 1e-13);
        let bad = SpatialFn::from_fn(g, f64::sin);
        assert!(matches!(
            euler_rhs(&fluid, &bad, &SpatialFn::zeros(g), false, F),
            Err(Error::NonpositiveDensity { .. })
        ));
    }

    #[test]
    fn half_factor_closes_standard_form() {
        let g = SpatialGrid::new(2.0 * PI, 256).unwrap();
        let fluid = Polytropic { kappa: 1.0, gamma: 1.4 };
        let rho = SpatialFn::from_fn(g, |q| 1.0 + 0.2 * q.cos());
        let m = SpatialFn::from_fn(g, |q| 0.3 * q.sin() + 0.1);
        let half = euler_standard_residual(&fluid, &rho, &m, true, F).unwrap();
        assert!(half.max_abs() < 1e-10);
        let printed = euler_standard_residual(&fluid, &rho, &m, false, F).unwrap();
        assert!(printed.max_abs() > 1e-2);
    }

    #[test]
    fn n_rhs_constant_slot_transports() {
        let g = grid();
        let c = 0.7;
        let slots = ContraField::from_parts(g, [(2, SpatialFn::constant(g, c))]).unwrap();
        let an = vec![cos(), sin(), cos()];
        let (out, report) = n_rhs(&slots, &an, F);
        // Ȧ_m = -2c A'_{m+1}
        assert!(close(&out[0], &(&an[1].ddq(F) * (-2.0 * c)), 1e-12));
        assert!(close(&out[1], &(&an[2].ddq(F) * (-2.0 * c)), 1e-12));
        assert_eq!(report.dropped.len(), 1);
        let zero = ContraField::zero(g);
        assert!(n_rhs(&zero, &an, F).0.iter().all(|x| x.max_abs() == 0.0));
    }

    #[test]
    fn rk4_basics() {
        let y = rk4_step(|_: &f64| Ok(0.0), &1.5, 0.1).unwrap();
        assert_eq!(y, 1.5);
        let lam = -0.8;
        let dt = 0.1;
        let y = rk4_step(|y: &f64| Ok(lam * y), &1.0, dt).unwrap();
        let z = lam * dt;
        let taylor = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0 + z.powi(4) / 24.0;
        assert!((y - taylor).abs() < 1e-15);
        assert!((y - z.exp()).abs() < 2.0 * z.abs().powi(5) / 120.0);
        assert!(matches!(rk4_step(|_: &f64| Ok(f64::NAN), &1.0, 0.1), Err(Error::NonFinite(_))));
        assert!(matches!(rk4_step(|y: &f64| Ok(*y), &1.0, 0.0), Err(Error::BadTimeStep(_))));
    }
}
