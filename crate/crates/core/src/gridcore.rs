//! Periodic spatial grid, truncated momentum grid, discrete derivatives,
//! quadratures and sampling of exact objects.
//!
//! Phase-space arrays are stored with shape `(nq, np)`: rows are spatial nodes,
//! columns are momentum nodes. All reductions sum in a fixed sequential order.

use std::cell::RefCell;
use std::io::{self, Write};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use ndarray::{Array1, Array2, Axis, Zip};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exactpoly::{Poly, Rational};
use crate::phasealg::PhasePoly;
use crate::schouten::{Coefficient, SymTensor};

/// Relative boundary magnitude above which a field is reported as not decaying in `p`.
pub const BOUNDARY_DECAY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialGrid {
    length: f64,
    nq: usize,
}

impl SpatialGrid {
    pub fn new(length: f64, nq: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if nq < 8 {
            return Err(Error::InvalidGrid(format!("Nq must be at least 8, got {nq}")));
        }
        Ok(SpatialGrid { length, nq })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nq(&self) -> usize {
        self.nq
    }

    pub fn dq(&self) -> f64 {
        self.length / self.nq as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dq()
    }

    pub fn nodes(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.nq, |j| self.node(j))
    }

    /// Angular wavenumber of FFT bin `j`; `None` for the Nyquist bin.
    fn wavenumber(&self, j: usize) -> Option<f64> {
        let n = self.nq;
        let signed = if 2 * j < n {
            j as f64
        } else if 2 * j == n {
            return None;
        } else {
            j as f64 - n as f64
        };
        Some(2.0 * std::f64::consts::PI * signed / self.length)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseGrid {
    spatial: SpatialGrid,
    pmax: f64,
    np: usize,
}

impl PhaseGrid {
    pub fn new(spatial: SpatialGrid, pmax: f64, np: usize) -> Result<Self> {
        if !(pmax.is_finite() && pmax > 0.0) {
            return Err(Error::InvalidGrid(format!("Pmax must be positive, got {pmax}")));
        }
        if np < 16 {
            return Err(Error::InvalidGrid(format!("Np must be at least 16, got {np}")));
        }
        Ok(PhaseGrid { spatial, pmax, np })
    }

    pub fn spatial(&self) -> SpatialGrid {
        self.spatial
    }

    pub fn pmax(&self) -> f64 {
        self.pmax
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn nq(&self) -> usize {
        self.spatial.nq
    }

    pub fn dp(&self) -> f64 {
        2.0 * self.pmax / (self.np - 1) as f64
    }

    pub fn p_node(&self, i: usize) -> f64 {
        -self.pmax + i as f64 * self.dp()
    }

    pub fn p_nodes(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.np, |i| self.p_node(i))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffScheme {
    Fd4,
    Fourier,
}

impl std::str::FromStr for DiffScheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fd4" => Ok(DiffScheme::Fd4),
            "fourier" => Ok(DiffScheme::Fourier),
            other => Err(format!("unknown scheme '{other}' (FD4 or Fourier)")),
        }
    }
}

impl std::fmt::Display for DiffScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DiffScheme::Fd4 => "FD4",
            DiffScheme::Fourier => "Fourier",
        })
    }
}

/// Grid function on the spatial grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialFn {
    grid: SpatialGrid,
    pub values: Array1<f64>,
}

/// Grid function on the phase grid, `values[[j, i]] = f(q_j, p_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseFn {
    grid: PhaseGrid,
    pub values: Array2<f64>,
}

impl SpatialFn {
    pub fn new(grid: SpatialGrid, values: Array1<f64>) -> Result<Self> {
        if values.len() != grid.nq {
            return Err(Error::LengthMismatch {
                expected: grid.nq,
                got: values.len(),
            });
        }
        Ok(SpatialFn { grid, values })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        SpatialFn {
            grid,
            values: Array1::zeros(grid.nq),
        }
    }

    pub fn constant(grid: SpatialGrid, c: f64) -> Self {
        SpatialFn {
            grid,
            values: Array1::from_elem(grid.nq, c),
        }
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Self {
        SpatialFn {
            grid,
            values: grid.nodes().mapv(f),
        }
    }

    pub fn grid(&self) -> SpatialGrid {
        self.grid
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        SpatialFn {
            grid: self.grid,
            values: self.values.mapv(f),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let mut values = self.values.clone();
        Zip::from(&mut values)
            .and(&other.values)
            .for_each(|a, &b| *a = f(*a, b));
        SpatialFn {
            grid: self.grid,
            values,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L²` norm `sqrt(quad_q(f²))`.
    pub fn l2(&self) -> f64 {
        quad_q(&self.map(|v| v * v)).sqrt()
    }

    pub fn mean(&self) -> f64 {
        quad_q(self) / self.grid.length
    }

    pub fn ddq(&self, scheme: DiffScheme) -> Self {
        let values = match scheme {
            DiffScheme::Fourier => spectral_apply(&self.grid, self.values.as_slice().expect("contiguous"), |k| match k {
                Some(k) => Complex64::new(0.0, k),
                None => Complex64::new(0.0, 0.0),
            }),
            DiffScheme::Fd4 => fd4_periodic(self.values.as_slice().expect("contiguous"), self.grid.dq()),
        };
        SpatialFn {
            grid: self.grid,
            values: Array1::from(values),
        }
    }

    /// Zero-mean spectral antiderivative; the mean and Nyquist modes are dropped.
    pub fn antiderivative(&self) -> Self {
        let values = spectral_apply(&self.grid, self.values.as_slice().expect("contiguous"), |k| match k {
            Some(k) if k != 0.0 => Complex64::new(0.0, -1.0 / k),
            _ => Complex64::new(0.0, 0.0),
        });
        SpatialFn {
            grid: self.grid,
            values: Array1::from(values),
        }
    }
}

impl PhaseFn {
    pub fn new(grid: PhaseGrid, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.nq(), grid.np) {
            return Err(Error::LengthMismatch {
                expected: grid.nq() * grid.np,
                got: values.len(),
            });
        }
        Ok(PhaseFn { grid, values })
    }

    pub fn zeros(grid: PhaseGrid) -> Self {
        PhaseFn {
            grid,
            values: Array2::zeros((grid.nq(), grid.np)),
        }
    }

    pub fn from_fn(grid: PhaseGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let q = grid.spatial.nodes();
        let p = grid.p_nodes();
        PhaseFn {
            grid,
            values: Array2::from_shape_fn((grid.nq(), grid.np), |(j, i)| f(q[j], p[i])),
        }
    }

    /// `c(q) p^k`.
    pub fn from_spatial_power(c: &SpatialFn, grid: PhaseGrid, k: u32) -> Self {
        assert_eq!(c.grid, grid.spatial, "grid mismatch");
        let p = grid.p_nodes();
        PhaseFn {
            grid,
            values: Array2::from_shape_fn((grid.nq(), grid.np), |(j, i)| {
                c.values[j] * p[i].powi(k as i32)
            }),
        }
    }

    pub fn grid(&self) -> PhaseGrid {
        self.grid
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        PhaseFn {
            grid: self.grid,
            values: self.values.mapv(f),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Multiplies every row by the matching value of a spatial function.
    pub fn mul_spatial(&self, c: &SpatialFn) -> Self {
        assert_eq!(c.grid, self.grid.spatial, "grid mismatch");
        let mut out = self.clone();
        for (mut row, &cj) in out.values.axis_iter_mut(Axis(0)).zip(c.values.iter()) {
            row.mapv_inplace(|v| v * cj);
        }
        out
    }

    /// Multiplies by `p^k`.
    pub fn mul_p_power(&self, k: u32) -> Self {
        let p = self.grid.p_nodes().mapv(|x| x.powi(k as i32));
        let mut out = self.clone();
        for mut row in out.values.axis_iter_mut(Axis(0)) {
            row *= &p;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L²` norm over the phase box.
    pub fn l2(&self) -> f64 {
        quad_qp(&self.map(|v| v * v)).sqrt()
    }

    pub fn row(&self, j: usize) -> Array1<f64> {
        self.values.row(j).to_owned()
    }

    pub fn column(&self, i: usize) -> SpatialFn {
        SpatialFn {
            grid: self.grid.spatial,
            values: self.values.column(i).to_owned(),
        }
    }

    /// Applies a map to every q-column (fixed `p`), in parallel.
    pub fn map_columns(&self, f: impl Fn(usize, &[f64]) -> Vec<f64> + Sync) -> Self {
        let cols: Vec<Vec<f64>> = (0..self.grid.np)
            .into_par_iter()
            .map(|i| {
                let col: Vec<f64> = self.values.column(i).to_vec();
                f(i, &col)
            })
            .collect();
        let mut values = Array2::zeros(self.values.dim());
        for (i, col) in cols.into_iter().enumerate() {
            values.column_mut(i).assign(&Array1::from(col));
        }
        PhaseFn {
            grid: self.grid,
            values,
        }
    }

    /// Applies a map to every p-row (fixed `q`), in parallel.
    pub fn map_rows(&self, f: impl Fn(usize, &[f64]) -> Vec<f64> + Sync) -> Self {
        let rows: Vec<Vec<f64>> = (0..self.grid.nq())
            .into_par_iter()
            .map(|j| {
                let row: Vec<f64> = self.values.row(j).to_vec();
                f(j, &row)
            })
            .collect();
        let mut values = Array2::zeros(self.values.dim());
        for (j, row) in rows.into_iter().enumerate() {
            values.row_mut(j).assign(&Array1::from(row));
        }
        PhaseFn {
            grid: self.grid,
            values,
        }
    }

    pub fn ddq(&self, scheme: DiffScheme) -> Self {
        let grid = self.grid.spatial;
        match scheme {
            DiffScheme::Fourier => self.map_columns(|_, col| {
                spectral_apply(&grid, col, |k| match k {
                    Some(k) => Complex64::new(0.0, k),
                    None => Complex64::new(0.0, 0.0),
                })
            }),
            DiffScheme::Fd4 => self.map_columns(|_, col| fd4_periodic(col, grid.dq())),
        }
    }

    pub fn ddp(&self, scheme: DiffScheme) -> Result<Self> {
        if scheme == DiffScheme::Fourier {
            return Err(Error::FourierInP);
        }
        let h = self.grid.dp();
        Ok(self.map_rows(|_, row| fd4_bounded(row, h)))
    }

    /// Largest magnitude on the `|p| = Pmax` rows relative to the overall maximum.
    pub fn boundary_ratio(&self) -> (f64, f64) {
        let np = self.grid.np;
        let boundary = self
            .values
            .column(0)
            .iter()
            .chain(self.values.column(np - 1).iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        (boundary, self.max_abs())
    }

    pub fn check_boundary_decay(&self) -> Result<()> {
        let (boundary, max) = self.boundary_ratio();
        if boundary > BOUNDARY_DECAY_TOL * max {
            return Err(Error::BoundaryDecay { boundary, max });
        }
        Ok(())
    }
}

macro_rules! grid_ops {
    ($ty:ident) => {
        impl Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                assert_eq!(self.grid, rhs.grid, "grid mismatch");
                $ty {
                    grid: self.grid,
                    values: &self.values + &rhs.values,
                }
            }
        }
        impl Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                assert_eq!(self.grid, rhs.grid, "grid mismatch");
                $ty {
                    grid: self.grid,
                    values: &self.values - &rhs.values,
                }
            }
        }
        impl Mul for &$ty {
            type Output = $ty;
            fn mul(self, rhs: &$ty) -> $ty {
                assert_eq!(self.grid, rhs.grid, "grid mismatch");
                $ty {
                    grid: self.grid,
                    values: &self.values * &rhs.values,
                }
            }
        }
        impl Mul<f64> for &$ty {
            type Output = $ty;
            fn mul(self, rhs: f64) -> $ty {
                self.scale(rhs)
            }
        }
        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.map(|v| -v)
            }
        }
        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                &self + &rhs
            }
        }
        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                &self - &rhs
            }
        }
        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                &self * &rhs
            }
        }
        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                -&self
            }
        }
    };
}

grid_ops!(SpatialFn);
grid_ops!(PhaseFn);

/// Spatial grid functions as a coefficient ring; derivatives are spectral.
impl Coefficient for SpatialFn {
    fn dim(&self) -> usize {
        1
    }
    fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
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
        self.scale(factor.to_f64().expect("finite rational"))
    }
    fn deriv(&self, _axis: usize) -> Self {
        self.ddq(DiffScheme::Fourier)
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    })
}

/// Multiplies the Fourier coefficients of a periodic real sample by `mult(k)`,
/// where `k` is the angular wavenumber (`None` at the Nyquist bin).
pub fn spectral_apply(grid: &SpatialGrid, values: &[f64], mult: impl Fn(Option<f64>) -> Complex64) -> Vec<f64> {
    let n = values.len();
    let (fwd, inv) = plans(n);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (j, c) in buf.iter_mut().enumerate() {
        *c *= mult(grid.wavenumber(j));
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

fn fd4_periodic(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let w = 1.0 / (12.0 * h);
    (0..n)
        .map(|j| {
            let at = |o: isize| f[((j as isize + o).rem_euclid(n as isize)) as usize];
            w * (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2))
        })
        .collect()
}

/// Fourth-order differences with one-sided five-point closures at both ends.
fn fd4_bounded(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let w = 1.0 / (12.0 * h);
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = w * (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]);
    }
    d[0] = w * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    d[1] = w * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    d[n - 2] = w * (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]);
    d[n - 1] = w * (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]);
    d
}

/// Rectangle rule `(L/Nq) Σ f(q_j)`.
pub fn quad_q(f: &SpatialFn) -> f64 {
    f.grid.dq() * f.values.iter().sum::<f64>()
}

fn trapezoid(row: impl ExactSizeIterator<Item = f64>, h: f64) -> f64 {
    let n = row.len();
    let mut acc = 0.0;
    for (i, v) in row.enumerate() {
        acc += if i == 0 || i == n - 1 { 0.5 * v } else { v };
    }
    h * acc
}

/// Trapezoid rule over `p` at spatial node `j`.
pub fn quad_p(f: &PhaseFn, j: usize) -> f64 {
    trapezoid(f.values.row(j).iter().copied(), f.grid.dp())
}

/// `q ↦ ∫ p^m f dp`.
pub fn moment_quad(f: &PhaseFn, m: i64) -> Result<SpatialFn> {
    if m < 0 {
        return Err(Error::NegativeOrder(m));
    }
    let grid = f.grid;
    let p = grid.p_nodes().mapv(|x| x.powi(m as i32));
    let values = Array1::from_shape_fn(grid.nq(), |j| {
        trapezoid(
            f.values.row(j).iter().zip(p.iter()).map(|(v, w)| v * w),
            grid.dp(),
        )
    });
    Ok(SpatialFn {
        grid: grid.spatial,
        values,
    })
}

/// `∫∫ f dq dp`.
pub fn quad_qp(f: &PhaseFn) -> f64 {
    let rows = moment_quad(f, 0).expect("order 0");
    quad_q(&rows)
}

/// `Σ_k ∫ A_k X_k dq` (one-dimensional pairing of covariant and contravariant tensors).
pub fn pairing(a: &[SpatialFn], x: &[SpatialFn]) -> Result<f64> {
    if a.len() != x.len() {
        return Err(Error::OrderMismatch(format!(
            "{} moment orders vs {} tensor orders",
            a.len(),
            x.len()
        )));
    }
    Ok(a.iter().zip(x).map(|(ak, xk)| quad_q(&(ak * xk))).sum())
}

pub fn sample_poly(p: &Poly, grid: SpatialGrid) -> Result<SpatialFn> {
    if p.dim() != 1 {
        return Err(Error::NotOneDimensional(p.dim()));
    }
    let values = grid.nodes().mapv(|q| p.eval_f64(&[q]).expect("dim 1"));
    Ok(SpatialFn { grid, values })
}

/// Samples the single component of a one-dimensional symmetric tensor.
pub fn sample_sym(x: &SymTensor, grid: SpatialGrid) -> Result<SpatialFn> {
    if x.dim() != 1 {
        return Err(Error::NotOneDimensional(x.dim()));
    }
    match x.get(&vec![0; x.order()]) {
        Some(c) => sample_poly(c, grid),
        None => Ok(SpatialFn::zeros(grid)),
    }
}

pub fn sample_phase(h: &PhasePoly, grid: PhaseGrid) -> Result<PhaseFn> {
    if h.dim() != 1 {
        return Err(Error::NotOneDimensional(h.dim()));
    }
    Ok(PhaseFn::from_fn(grid, |q, p| {
        h.eval_f64(&[q], &[p]).expect("dim 1")
    }))
}

fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with header `q,value`.
pub fn write_spatial_csv<W: Write>(mut w: W, f: &SpatialFn) -> io::Result<()> {
    writeln!(w, "q,value")?;
    for (j, v) in f.values.iter().enumerate() {
        writeln!(w, "{},{}", fmt_num(f.grid.node(j)), fmt_num(*v))?;
    }
    Ok(())
}

/// CSV with header `q,p,value`, row-major in `q`.
pub fn write_phase_csv<W: Write>(mut w: W, f: &PhaseFn) -> io::Result<()> {
    writeln!(w, "q,p,value")?;
    for j in 0..f.grid.nq() {
        for i in 0..f.grid.np {
            writeln!(
                w,
                "{},{},{}",
                fmt_num(f.grid.spatial.node(j)),
                fmt_num(f.grid.p_node(i)),
                fmt_num(f.values[[j, i]])
            )?;
        }
    }
    Ok(())
}
