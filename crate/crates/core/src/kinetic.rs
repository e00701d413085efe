//! 1D-1V Vlasov-Poisson: field solve, right-hand side, a Strang-split
//! semi-Lagrangian stepper, the moment decomposition `f = f_s + f_n + residual`
//! and the matched splitting of the Vlasov right-hand side.
//!
//! Conventions: `h = p²/2m + eφ`, `ḟ = {h, f} = eφ' ∂_p f - (p/m) ∂_q f`,
//! `φ'' = -e (ρ - ρ̄)` on the periodic domain.

use crate::error::{Error, Result};
use crate::gridcore::{
    moment_quad, quad_q, quad_qp, spectral_apply, DiffScheme, PhaseFn, PhaseGrid, SpatialFn,
};
use crate::momentdyn::{lp_rhs, ContraField, MomentState, OdeState};
use rustfft::num_complex::Complex64;

/// Accuracy bound on `dt·Pmax/(m·Δq)` for the semi-Lagrangian step.
pub const CFL_LIMIT: f64 = 5.0;

/// Largest admissible mean of the Poisson source after background subtraction.
pub const NEUTRALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum FieldMode {
    SelfConsistent,
    Prescribed(SpatialFn),
}

/// Neutralizing background density `ρ̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Background {
    /// `ρ̄ = (1/L) ∫∫ f`, always neutral.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VlasovParams {
    pub mass: f64,
    pub charge: f64,
    pub field_mode: FieldMode,
    pub background: Background,
    pub scheme: DiffScheme,
}

impl VlasovParams {
    pub fn new(mass: f64, charge: f64, field_mode: FieldMode) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidGrid(format!("particle mass must be positive, got {mass}")));
        }
        Ok(VlasovParams {
            mass,
            charge,
            field_mode,
            background: Background::Auto,
            scheme: DiffScheme::Fourier,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KineticState {
    pub f: PhaseFn,
    pub phi: SpatialFn,
    pub t: f64,
}

impl KineticState {
    /// State at `t = 0` with the potential consistent with the field mode.
    pub fn new(f: PhaseFn, params: &VlasovParams) -> Result<Self> {
        let phi = field(&f, params)?;
        Ok(KineticState { f, phi, t: 0.0 })
    }
}

impl OdeState for PhaseFn {
    fn axpy(&self, c: f64, other: &Self) -> Self {
        let mut out = self.clone();
        out.values.scaled_add(c, &other.values);
        out
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// Solves `φ'' = -e (ρ - ρ̄)` spectrally with zero-mean `φ`.
pub fn poisson_solve(rho: &SpatialFn, charge: f64, background: Background) -> Result<SpatialFn> {
    let grid = rho.grid();
    let bg = match background {
        Background::Auto => rho.mean(),
        Background::Fixed(v) => v,
    };
    let source = rho.map(|r| r - bg);
    let mean = source.mean();
    if mean.abs() > NEUTRALITY_TOL {
        return Err(Error::NonNeutralSource { mean });
    }
    let values = spectral_apply(&grid, source.values.as_slice().expect("contiguous"), |k| match k {
        Some(k) if k != 0.0 => Complex64::new(charge / (k * k), 0.0),
        Some(_) => Complex64::new(0.0, 0.0),
        None => {
            let k = std::f64::consts::PI * grid.nq() as f64 / grid.length();
            Complex64::new(charge / (k * k), 0.0)
        }
    });
    SpatialFn::new(grid, values.into())
}

/// Potential for the current density according to the field mode.
pub fn field(f: &PhaseFn, params: &VlasovParams) -> Result<SpatialFn> {
    match &params.field_mode {
        FieldMode::SelfConsistent => {
            poisson_solve(&moment_quad(f, 0)?, params.charge, params.background)
        }
        FieldMode::Prescribed(phi) => {
            if phi.grid() != f.grid().spatial() {
                return Err(Error::GridMismatch("prescribed potential".into()));
            }
            Ok(phi.clone())
        }
    }
}

/// Single-particle energy `p²/2m + eφ(q)` on the phase grid.
pub fn hamiltonian(phi: &SpatialFn, grid: PhaseGrid, params: &VlasovParams) -> PhaseFn {
    let m = params.mass;
    let e = params.charge;
    let p = grid.p_nodes();
    PhaseFn::new(
        grid,
        ndarray::Array2::from_shape_fn((grid.nq(), grid.np()), |(j, i)| {
            p[i] * p[i] / (2.0 * m) + e * phi.values[j]
        }),
    )
    .expect("shape")
}

/// `ḟ = eφ' ∂_p f - (p/m) ∂_q f`.
pub fn vlasov_rhs(f: &PhaseFn, phi: &SpatialFn, params: &VlasovParams) -> Result<PhaseFn> {
    let force = &phi.ddq(params.scheme) * params.charge;
    let fp = f.ddp(DiffScheme::Fd4)?.mul_spatial(&force);
    let fq = f.ddq(params.scheme).mul_p_power(1).scale(1.0 / params.mass);
    Ok(&fp - &fq)
}

/// Discrete canonical bracket `{a, b} = ∂_q a ∂_p b - ∂_q b ∂_p a`.
pub fn phase_bracket(a: &PhaseFn, b: &PhaseFn, scheme: DiffScheme) -> Result<PhaseFn> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch("bracket operands".into()));
    }
    let ap = a.ddp(DiffScheme::Fd4)?;
    let bp = b.ddp(DiffScheme::Fd4)?;
    Ok(&(&a.ddq(scheme) * &bp) - &(&b.ddq(scheme) * &ap))
}

/// Coadjoint action `ad*_h f = {f, h}`; the Vlasov flow is `ḟ = -ad*_h f`.
pub fn coadjoint_vlasov(h: &PhaseFn, f: &PhaseFn, scheme: DiffScheme) -> Result<PhaseFn> {
    phase_bracket(f, h, scheme)
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Solves the cyclic system with stencil `(1, 4, 1)` by Sherman-Morrison.
fn solve_cyclic_141(rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let (alpha, beta) = (1.0, 1.0);
    let gamma = -4.0;
    let sub = vec![1.0; n];
    let sup = vec![1.0; n];
    let mut diag = vec![4.0; n];
    diag[0] -= gamma;
    diag[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(&sub, &diag, &sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(&sub, &diag, &sup, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn spline_eval(f: &[f64], m: &[f64], h: f64, i: usize, t: f64) -> f64 {
    let (a, b) = (1.0 - t, t);
    a * f[i] + b * f[i + 1] + h * h / 6.0 * ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1])
}

/// Periodic cubic spline through `f` (spacing `h`) evaluated at `x_j - shift`.
pub fn periodic_spline_shift(f: &[f64], h: f64, shift: f64) -> Vec<f64> {
    let n = f.len();
    let rhs: Vec<f64> = (0..n)
        .map(|j| 6.0 / (h * h) * (f[(j + 1) % n] - 2.0 * f[j] + f[(j + n - 1) % n]))
        .collect();
    let m = solve_cyclic_141(&rhs);
    let mut fe = f.to_vec();
    fe.push(f[0]);
    let mut me = m;
    me.push(me[0]);
    // uniform shift: the same cell offset for every node
    let s = -shift / h;
    let cells = s.floor();
    let t = s - cells;
    let off = (cells as i64).rem_euclid(n as i64) as usize;
    (0..n)
        .map(|j| {
            let i = (j + off) % n;
            let (fw, mw) = ([fe[i], fe[i + 1]], [me[i], me[i + 1]]);
            spline_eval(&fw, &mw, h, 0, t)
        })
        .collect()
}

/// Cubic spline with zero end slopes through `f` on `x_0 + i h`, evaluated at
/// `x_i + shift`; points outside the grid evaluate to zero.
pub fn clamped_spline_shift(f: &[f64], h: f64, shift: f64) -> Vec<f64> {
    let n = f.len();
    let mut sub = vec![1.0; n];
    let mut diag = vec![4.0; n];
    let mut sup = vec![1.0; n];
    let mut rhs: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                0.0
            } else {
                6.0 / (h * h) * (f[i + 1] - 2.0 * f[i] + f[i - 1])
            }
        })
        .collect();
    diag[0] = 2.0;
    sup[0] = 1.0;
    rhs[0] = 6.0 / (h * h) * (f[1] - f[0]);
    diag[n - 1] = 2.0;
    sub[n - 1] = 1.0;
    rhs[n - 1] = -6.0 / (h * h) * (f[n - 1] - f[n - 2]);
    let m = solve_tridiagonal(&sub, &diag, &sup, &rhs);
    let s = shift / h;
    let cells = s.floor();
    let t = s - cells;
    let off = cells as i64;
    (0..n)
        .map(|i| {
            let cell = i as i64 + off;
            if cell < 0 || cell > n as i64 - 1 {
                return 0.0;
            }
            let cell = cell as usize;
            if cell == n - 1 {
                return if t == 0.0 { f[n - 1] } else { 0.0 };
            }
            spline_eval(f, &m, h, cell, t)
        })
        .collect()
}

fn advect_q(f: &PhaseFn, dt: f64, mass: f64) -> PhaseFn {
    let grid = f.grid();
    let h = grid.spatial().dq();
    f.map_columns(|i, col| periodic_spline_shift(col, h, grid.p_node(i) / mass * dt))
}

fn advect_p(f: &PhaseFn, force: &SpatialFn, dt: f64) -> PhaseFn {
    let h = f.grid().dp();
    // dp/dt = -eφ', so f(q, p, t+dt) = f(q, p + eφ' dt, t)
    f.map_rows(|j, row| clamped_spline_shift(row, h, force.values[j] * dt))
}

/// One Strang-split semi-Lagrangian step: half `q`-advection, field solve,
/// full `p`-advection, half `q`-advection, final field solve.
pub fn step(state: &KineticState, params: &VlasovParams, dt: f64) -> Result<KineticState> {
    let grid = state.f.grid();
    let cfl = dt * grid.pmax() / (params.mass * grid.spatial().dq());
    if !(dt > 0.0 && dt.is_finite()) || cfl >= CFL_LIMIT {
        return Err(Error::BadTimeStep(dt));
    }
    let half = advect_q(&state.f, 0.5 * dt, params.mass);
    let phi = field(&half, params)?;
    let force = &phi.ddq(params.scheme) * params.charge;
    let kicked = advect_p(&half, &force, dt);
    let f = advect_q(&kicked, 0.5 * dt, params.mass);
    if !f.is_finite() {
        return Err(Error::NonFinite(format!("kinetic step at t = {}", state.t + dt)));
    }
    let phi = field(&f, params)?;
    Ok(KineticState {
        f,
        phi,
        t: state.t + dt,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub mass: f64,
    pub l2: f64,
    pub energy: f64,
}

/// Mass `∫∫f`, `L²` norm, and energy `∫∫ p²/2m f + ½ ∫ (φ')²`.
pub fn diagnostics(state: &KineticState, params: &VlasovParams) -> Diagnostics {
    let kinetic = quad_qp(&state.f.mul_p_power(2)) / (2.0 * params.mass);
    let e = state.phi.ddq(params.scheme);
    let field = 0.5 * quad_q(&(&e * &e));
    Diagnostics {
        mass: quad_qp(&state.f),
        l2: state.f.l2(),
        energy: kinetic + field,
    }
}

/// `f̃ = -∂_p(p f)`.
fn tilde(f: &PhaseFn) -> Result<PhaseFn> {
    Ok(-f.mul_p_power(1).ddp(DiffScheme::Fd4)?)
}

/// Raw recursion `f_0 = f`, `f_{k+1} = f̃_k - k f_k`, returning `f_m / m!`.
///
/// Its `j`-th moment is `C(j, m) μ_j(f)` for `j >= m` and zero below.
pub fn moment_recursion(f: &PhaseFn, m: usize) -> Result<PhaseFn> {
    let mut fk = f.clone();
    let mut fact = 1.0;
    for k in 0..m {
        fk = &tilde(&fk)? - &fk.scale(k as f64);
        fact *= (k + 1) as f64;
    }
    Ok(fk.scale(1.0 / fact))
}

/// Window width of the moment-correction basis relative to `Pmax`.
const CORRECTION_WIDTH: f64 = 1.0 / 8.0;

/// Functions `ψ_l(p)`, `l = 0..=K`, with discrete moments `∫ p^j ψ_l dp = δ_{jl}`,
/// built from Hermite polynomials under a Gaussian window that decays at `Pmax`.
fn dual_moment_basis(grid: PhaseGrid, k: usize) -> Result<Vec<Vec<f64>>> {
    let sigma = grid.pmax() * CORRECTION_WIDTH;
    let p = grid.p_nodes();
    let basis: Vec<Vec<f64>> = {
        let x: Vec<f64> = p.iter().map(|p| p / sigma).collect();
        let w: Vec<f64> = x.iter().map(|x| (-x * x / 2.0).exp()).collect();
        let mut he = vec![vec![1.0; x.len()], x.clone()];
        for n in 1..k {
            let next = x
                .iter()
                .zip(&he[n])
                .zip(&he[n - 1])
                .map(|((x, a), b)| x * a - n as f64 * b)
                .collect();
            he.push(next);
        }
        he.truncate(k + 1);
        he.into_iter()
            .map(|h| h.iter().zip(&w).map(|(h, w)| h * w).collect())
            .collect()
    };
    let moment = |v: &[f64], j: usize| -> f64 {
        let n = v.len();
        let mut acc = 0.0;
        for i in 0..n {
            let wt = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += wt * p[i].powi(j as i32) * v[i];
        }
        acc * grid.dp()
    };
    // Gram matrix G[j][i] = ∫ p^j b_i; ψ = b G^{-1}
    let n = k + 1;
    let gram: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| moment(&basis[i], j)).collect()).collect();
    let inv = invert(gram).ok_or_else(|| Error::OrderMismatch(format!("singular moment basis at K = {k}")))?;
    Ok((0..n)
        .map(|l| {
            (0..p.len())
                .map(|r| (0..n).map(|i| basis[i][r] * inv[i][l]).sum())
                .collect()
        })
        .collect())
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let factor = a[r][col];
                for j in 0..n {
                    a[r][j] -= factor * a[col][j];
                    inv[r][j] -= factor * inv[col][j];
                }
            }
        }
    }
    Some(inv)
}

/// Components `f_(0), .., f_(K)` with `∫ p^j f_(m) dp = δ_{jm} ∫ p^m f dp` for `j <= K`.
///
/// `f_(m) = Σ_{i=m..K} (-1)^{i-m} C(i,m) R_i(f)` with `R_i` the raw recursion; this equals
/// the top-down construction `R_m(f - Σ_{i>m} f_(i))` but never differentiates more than
/// `K` times. The moments lost to the cut at `|p| = Pmax` are then restored with a
/// windowed dual basis, and `f_(0)` takes the remainder so that the components sum to `f`.
pub fn decompose_components(f: &PhaseFn, k: usize) -> Result<Vec<PhaseFn>> {
    f.check_boundary_decay()?;
    let grid = f.grid();
    let mut raw = Vec::with_capacity(k + 1);
    let mut fk = f.clone();
    let mut fact = 1.0;
    for i in 0..=k {
        if i > 0 {
            fk = &tilde(&fk)? - &fk.scale((i - 1) as f64);
            fact *= i as f64;
        }
        raw.push(fk.scale(1.0 / fact));
    }
    let targets = (0..=k).map(|j| moment_quad(f, j as i64)).collect::<Result<Vec<_>>>()?;
    let dual = dual_moment_basis(grid, k)?;
    let mut comps = vec![PhaseFn::zeros(grid); k + 1];
    let mut sum_hi = PhaseFn::zeros(grid);
    for m in (1..=k).rev() {
        let mut c = PhaseFn::zeros(grid);
        for (i, r) in raw.iter().enumerate().skip(m) {
            let sign = if (i - m) % 2 == 0 { 1.0 } else { -1.0 };
            c = &c + &r.scale(sign * binomial(i, m));
        }
        let errs = (0..=k)
            .map(|j| {
                let mu = moment_quad(&c, j as i64)?;
                Ok(if j == m { &mu - &targets[j] } else { mu })
            })
            .collect::<Result<Vec<_>>>()?;
        let correction = PhaseFn::new(
            grid,
            ndarray::Array2::from_shape_fn((grid.nq(), grid.np()), |(q, p)| {
                errs.iter().zip(&dual).map(|(e, psi)| e.values[q] * psi[p]).sum()
            }),
        )?;
        c = &c - &correction;
        sum_hi = &sum_hi + &c;
        comps[m] = c;
    }
    comps[0] = f - &sum_hi;
    Ok(comps)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The `m`-th moment component of `f` relative to truncation order `K`.
pub fn f_component(f: &PhaseFn, m: usize, k: usize) -> Result<PhaseFn> {
    if m > k {
        return Err(Error::OrderMismatch(format!("component {m} above truncation order {k}")));
    }
    Ok(decompose_components(f, k)?.swap_remove(m))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentDecomposition {
    pub components: Vec<PhaseFn>,
    pub f_s: PhaseFn,
    pub f_n: PhaseFn,
    pub residual: PhaseFn,
}

/// `f = f_s + f_n + residual` with `f_s = f_(0) + f_(1)`, `f_n = Σ_{k=2..K} f_(k)`.
pub fn decompose_f(f: &PhaseFn, k: usize) -> Result<MomentDecomposition> {
    let components = decompose_components(f, k)?;
    let f_s = &components[0] + &components[1];
    let mut f_n = PhaseFn::zeros(f.grid());
    for c in &components[2..] {
        f_n = &f_n + c;
    }
    let residual = &(f - &f_s) - &f_n;
    Ok(MomentDecomposition {
        components,
        f_s,
        f_n,
        residual,
    })
}

/// Variational slot `c(q) p^k` of a fiberwise-polynomial Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySlot {
    pub degree: u32,
    pub coeff: SpatialFn,
}

/// `δH/δf_(0) = eφ`, `δH/δf_(2) = p²/2m`.
pub fn plasma_slots(phi: &SpatialFn, params: &VlasovParams) -> Vec<PolySlot> {
    vec![
        PolySlot {
            degree: 0,
            coeff: phi * params.charge,
        },
        PolySlot {
            degree: 2,
            coeff: SpatialFn::constant(phi.grid(), 0.5 / params.mass),
        },
    ]
}

/// `{c p^k, g}` with exact `p`-derivatives of the slot.
pub fn slot_bracket(slot: &PolySlot, g: &PhaseFn, scheme: DiffScheme) -> Result<PhaseFn> {
    let grid = g.grid();
    let k = slot.degree;
    let mut out = g
        .ddp(DiffScheme::Fd4)?
        .mul_spatial(&slot.coeff.ddq(scheme))
        .mul_p_power(k);
    if k > 0 {
        let hp = PhaseFn::from_spatial_power(&slot.coeff, grid, k - 1).scale(k as f64);
        out = &out - &(&g.ddq(scheme) * &hp);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchedRhs<T> {
    /// Brackets carrying moments 0 and 1.
    pub ds: T,
    /// Brackets carrying moments `>= 2`.
    pub dn: T,
    /// Brackets carrying a negative moment index; they pair to zero with every polynomial.
    pub moment_null: T,
}

/// Routes the Lie-Poisson brackets `{h_k, f_(l)}` by the moment they carry, `l - k + 1`.
pub fn matched_vlasov_rhs(components: &[PhaseFn], slots: &[PolySlot], scheme: DiffScheme) -> Result<MatchedRhs<PhaseFn>> {
    let grid = components
        .first()
        .ok_or_else(|| Error::OrderMismatch("no components".into()))?
        .grid();
    let mut out = MatchedRhs {
        ds: PhaseFn::zeros(grid),
        dn: PhaseFn::zeros(grid),
        moment_null: PhaseFn::zeros(grid),
    };
    for slot in slots {
        for (l, fl) in components.iter().enumerate() {
            let j = l as i64 - slot.degree as i64 + 1;
            let b = slot_bracket(slot, fl, scheme)?;
            let target = match j {
                0 | 1 => &mut out.ds,
                j if j >= 2 => &mut out.dn,
                _ => &mut out.moment_null,
            };
            *target = &*target + &b;
        }
    }
    Ok(out)
}

/// Relative `L²` distance, zero when both sides vanish; `floor` bounds the
/// denominator from below so that identically vanishing orders compare in absolute terms.
pub fn rel_error(got: &SpatialFn, reference: &SpatialFn, floor: f64) -> f64 {
    let diff = (got - reference).l2();
    let scale = reference.l2().max(got.l2()).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Fraction of the roundoff scale of an order below which its error counts in absolute terms.
pub const POISSON_MAP_FLOOR: f64 = 1e-8;

/// `∫ |p|^n |f| dp`, the size of the terms summed in the `n`-th moment.
fn abs_moment(f: &PhaseFn, n: i32) -> Result<SpatialFn> {
    let grid = f.grid();
    let mut w = f.map(f64::abs);
    for i in 0..grid.np() {
        let s = grid.p_node(i).abs().powi(n);
        w.values.column_mut(i).mapv_inplace(|v| v * s);
    }
    moment_quad(&w, 0)
}

/// Per-order relative errors between the moments of `ḟ` and the moment
/// Lie-Poisson equations with `δH/δA_0 = eφ`, `δH/δA_2 = 1/2m`, orders `0..=K`.
///
/// An order that vanishes identically (every even order of p-symmetric data)
/// is measured against the size of the streaming and field terms feeding it,
/// so that cancellation roundoff does not read as an O(1) error.
pub fn poisson_map_check(f: &PhaseFn, params: &VlasovParams, k: usize) -> Result<Vec<f64>> {
    let phi = field(f, params)?;
    let fdot = vlasov_rhs(f, &phi, params)?;
    let grid = f.grid().spatial();
    let moments = (0..=k + 1)
        .map(|j| moment_quad(f, j as i64))
        .collect::<Result<Vec<_>>>()?;
    let state = MomentState::from_orders(moments)?;
    let slots = ContraField::from_parts(
        grid,
        [
            (0, &phi * params.charge),
            (2, SpatialFn::constant(grid, 0.5 / params.mass)),
        ],
    )?;
    let (rhs, _) = lp_rhs(&slots, &state, params.scheme)?;
    let kmax = std::f64::consts::PI / grid.dq();
    let force = params.charge.abs() * phi.ddq(params.scheme).max_abs();
    (0..=k)
        .map(|j| {
            let lhs = moment_quad(&fdot, j as i64)?;
            let stream = abs_moment(f, j as i32 + 1)?.l2() * kmax / params.mass;
            let pull = if j == 0 { 0.0 } else { j as f64 * force * abs_moment(f, j as i32 - 1)?.l2() };
            let reference = rhs.order(j).expect("order within K+1");
            Ok(rel_error(&lhs, reference, POISSON_MAP_FLOOR * (stream + pull)))
        })
        .collect()
}
