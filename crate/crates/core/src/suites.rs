//! Seeded verification suites shared by the command line and the test targets.

use crate::corpus::{
    random_graded, random_npart, random_phase_poly, random_spair, random_sym, CorpusShape, Lcg64,
};
use crate::error::Result;
use crate::gridcore::{quad_q, quad_qp, DiffScheme, PhaseFn, PhaseGrid, SpatialFn, SpatialGrid};
use crate::kinetic::phase_bracket;
use crate::momentdyn::{coad_full, matched_coadjoint, ContraField, MomentState};
use crate::momvlasov::{j_lp_apply, OneFormGrid, VectorGrid};
use crate::phasealg::{
    act_left_phase, act_right_phase, canonical_bracket, gccl, hamiltonian_field,
    jacobi_lie_bracket, kappa, kappa_inv, kappa_s, kappa_sym,
};
use crate::schouten::{
    act_left, act_right, compat_residuals, double_cross_bracket, embed, schouten_bracket,
    schouten_graded, split, GradedTensor, SymTensor,
};
use std::f64::consts::PI;

/// Largest tensor order drawn by the algebra suite.
pub const ALGEBRA_MAX_ORDER: usize = 4;
/// Largest coefficient degree drawn by the algebra suite.
pub const ALGEBRA_MAX_DEGREE: u32 = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCount {
    pub name: &'static str,
    pub checked: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraReport {
    pub seed: u64,
    pub instances: usize,
    /// Largest order drawn for Jacobi triples, limited by the order cap.
    pub jacobi_max_order: usize,
    pub identities: Vec<IdentityCount>,
}

impl AlgebraReport {
    pub fn all_hold(&self) -> bool {
        self.identities.iter().all(|c| c.failed == 0)
    }

    pub fn total_checked(&self) -> usize {
        self.identities.iter().map(|c| c.checked).sum()
    }
}

const IDENTITIES: [&str; 12] = [
    "schouten antisymmetry",
    "schouten grading",
    "schouten jacobi",
    "mutual actions reconstruct bracket",
    "compatibility (s-side)",
    "compatibility (n-side)",
    "double cross equals total bracket",
    "kappa antihomomorphism",
    "kappa inverse",
    "gccl equals phi of kappa",
    "gccl reverses bracket",
    "phase actions sum to bracket",
];

/// Runs every exact identity once per seeded instance; residuals must vanish exactly.
pub fn algebra_suite(seed: u64, instances: usize, order_cap: usize) -> Result<AlgebraReport> {
    let mut rng = Lcg64::new(seed);
    let jacobi_max_order = ((order_cap + 2) / 3).min(ALGEBRA_MAX_ORDER);
    let mut counts: Vec<IdentityCount> = IDENTITIES
        .iter()
        .map(|&name| IdentityCount {
            name,
            checked: 0,
            failed: 0,
        })
        .collect();
    for _ in 0..instances {
        let dim = 1 + rng.below(2) as usize;
        let sh = CorpusShape::new(dim, ALGEBRA_MAX_ORDER, ALGEBRA_MAX_DEGREE);
        let results = algebra_instance(&mut rng, &sh, jacobi_max_order, order_cap)?;
        for (c, ok) in counts.iter_mut().zip(results) {
            c.checked += 1;
            c.failed += usize::from(!ok);
        }
    }
    Ok(AlgebraReport {
        seed,
        instances,
        jacobi_max_order,
        identities: counts,
    })
}

fn algebra_instance(rng: &mut Lcg64, sh: &CorpusShape, jacobi_order: usize, cap: usize) -> Result<[bool; 12]> {
    let k = rng.below(sh.max_order as u64 + 1) as usize;
    let m = rng.below(sh.max_order as u64 + 1) as usize;
    let x = random_sym(rng, sh, k);
    let y = random_sym(rng, sh, m);
    let xy = schouten_bracket(&x, &y)?;
    let antisym = xy.plus(&schouten_bracket(&y, &x)?)?.is_zero();
    let grading = xy.is_zero() || xy.order() == (k + m).saturating_sub(1);

    let jsh = CorpusShape {
        max_order: jacobi_order,
        max_terms: 2,
        ..*sh
    };
    let (a, b, c) = (
        random_graded(rng, &jsh, 0),
        random_graded(rng, &jsh, 0),
        random_graded(rng, &jsh, 0),
    );
    let br = |u: &GradedTensor, v: &GradedTensor| schouten_graded(u, v, cap);
    let jacobi = br(&a, &br(&b, &c)?)?
        .plus(&br(&b, &br(&c, &a)?)?)?
        .plus(&br(&c, &br(&a, &b)?)?)?
        .is_zero();

    let xi = random_spair(rng, sh);
    let xi2 = random_spair(rng, sh);
    let eta = random_npart(rng, sh);
    let eta2 = random_npart(rng, sh);
    let (s, n) = split(&schouten_graded(eta.graded(), &xi.to_graded(), cap)?);
    let reconstruct = s == act_left(&eta, &xi)? && n == act_right(&eta, &xi, cap)?;
    let (r1, r2) = compat_residuals(&xi, &xi2, &eta, &eta2, cap)?;
    let total = schouten_graded(&embed(&xi, &eta)?, &embed(&xi2, &eta2)?, cap)?;
    let double_cross = double_cross_bracket((&xi, &eta), (&xi2, &eta2), cap)? == split(&total);

    let g1 = random_graded(rng, sh, 0);
    let g2 = random_graded(rng, sh, 0);
    let kappa_hom = kappa(&schouten_graded(&g1, &g2, cap)?) == canonical_bracket(&kappa(&g1), &kappa(&g2))?.neg();
    let kappa_inverse = kappa_inv(&kappa(&g1)) == g1;
    let gccl_phi = gccl(&x) == hamiltonian_field(&kappa_sym(&x));
    let gccl_rev = gccl(&xy) == jacobi_lie_bracket(&gccl(&x), &gccl(&y))?.neg();

    let xhat = kappa(eta.graded());
    let shat = kappa_s(&xi);
    let phase = act_left_phase(&xhat, &shat)?.plus(&act_right_phase(&xhat, &shat)?)?
        == canonical_bracket(&xhat, &shat)?.neg();
    // keep the corpus stream aligned with the phase-polynomial generator
    let _ = random_phase_poly(rng, sh, 0, 0);

    Ok([
        antisym,
        grading,
        jacobi,
        reconstruct,
        r1.is_zero(),
        r2.is_zero(),
        double_cross,
        kappa_hom,
        kappa_inverse,
        gccl_phi,
        gccl_rev,
        phase,
    ])
}

/// `c_0 + Σ_{n=1..modes} a_n cos(2πnq/L) + b_n sin(2πnq/L)`, coefficients uniform in `[-amp, amp]`.
pub fn band_limited(rng: &mut Lcg64, grid: SpatialGrid, modes: usize, amp: f64) -> SpatialFn {
    let mut draw = || amp * (2.0 * rng.next_f64() - 1.0);
    let c0 = draw();
    let coeffs: Vec<(f64, f64)> = (1..=modes).map(|_| (draw(), draw())).collect();
    let k0 = 2.0 * PI / grid.length();
    SpatialFn::from_fn(grid, |q| {
        coeffs
            .iter()
            .enumerate()
            .fold(c0, |acc, (i, (a, b))| {
                let k = k0 * (i + 1) as f64;
                acc + a * (k * q).cos() + b * (k * q).sin()
            })
    })
}

/// Contravariant field with every order `0..=max_order` present.
pub fn random_contra_field(rng: &mut Lcg64, grid: SpatialGrid, max_order: usize, modes: usize) -> ContraField {
    let parts: Vec<_> = (0..=max_order)
        .map(|k| (k, band_limited(rng, grid, modes, 1.0)))
        .collect();
    ContraField::from_parts(grid, parts).expect("same grid")
}

pub fn random_moments(rng: &mut Lcg64, grid: SpatialGrid, k: usize, modes: usize) -> MomentState {
    MomentState::from_orders((0..=k).map(|_| band_limited(rng, grid, modes, 1.0)).collect()).expect("K >= 2")
}

/// The 1D contravariant field as a graded tensor over grid coefficients.
pub fn to_graded(x: &ContraField) -> GradedTensor<SpatialFn> {
    let parts = x
        .parts()
        .map(|(k, c)| SymTensor::from_components(1, k, [(vec![0u8; k], c.clone())]));
    GradedTensor::from_parts(1, parts).expect("one-dimensional parts")
}

/// `⟨A, Y⟩ = Σ_j ∫ A_j Y_j dq` over the orders carried by `A`.
pub fn pair_moments(a: &MomentState, y: &GradedTensor<SpatialFn>) -> f64 {
    a.orders()
        .iter()
        .enumerate()
        .filter_map(|(j, aj)| {
            let yj = y.part(j)?.get(&vec![0u8; j])?;
            Some(quad_q(&(aj * yj)))
        })
        .sum()
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Relative gap in `⟨ad*_X A, Y⟩ = ⟨A, [Y, X]⟩`; the bracket side is spectral.
pub fn coad_adjointness(x: &ContraField, a: &MomentState, y: &ContraField, scheme: DiffScheme) -> Result<f64> {
    let (coad, _) = coad_full(x, a, scheme)?;
    let cap = x.max_order().unwrap_or(0) + y.max_order().unwrap_or(0);
    let yx = schouten_graded(&to_graded(y), &to_graded(x), cap)?;
    Ok(relative(pair_moments(&coad, &to_graded(y)), pair_moments(a, &yx)))
}

/// Largest pointwise gap between the matched assembly and the direct coadjoint action.
pub fn matched_vs_full(x: &ContraField, a: &MomentState, scheme: DiffScheme) -> Result<f64> {
    let (full, _) = coad_full(x, a, scheme)?;
    let (matched, _) = matched_coadjoint(&x.s_part(), &x.n_part(), a, scheme)?;
    Ok(full
        .orders()
        .iter()
        .zip(matched.orders())
        .map(|(u, v)| (u - &v).max_abs())
        .fold(0.0, f64::max))
}

/// Unit Gaussian in `p`.
pub fn gaussian(p: f64) -> f64 {
    (-p * p / 2.0).exp() / (2.0 * PI).sqrt()
}

/// `B_0(q) + B_1(q) p + B_2(q) p²` with band-limited coefficients.
pub fn random_quadratic_hamiltonian(rng: &mut Lcg64, grid: PhaseGrid, modes: usize) -> PhaseFn {
    let c: Vec<SpatialFn> = (0..3).map(|_| band_limited(rng, grid.spatial(), modes, 1.0)).collect();
    &(&PhaseFn::from_spatial_power(&c[0], grid, 0) + &PhaseFn::from_spatial_power(&c[1], grid, 1))
        + &PhaseFn::from_spatial_power(&c[2], grid, 2)
}

/// One-form with components `(B_0(q) + B_1(q) p) G(p)`.
pub fn random_one_form(rng: &mut Lcg64, grid: PhaseGrid, modes: usize) -> OneFormGrid {
    let mut comp = || {
        let b0 = band_limited(rng, grid.spatial(), modes, 1.0);
        let b1 = band_limited(rng, grid.spatial(), modes, 1.0);
        let poly = &PhaseFn::from_spatial_power(&b0, grid, 0) + &PhaseFn::from_spatial_power(&b1, grid, 1);
        let g = PhaseFn::from_fn(grid, |_, p| gaussian(p));
        &poly * &g
    };
    let pi_q = comp();
    let pi_p = comp();
    OneFormGrid::new(pi_q, pi_p).expect("same grid")
}

fn pair_field(pi: &OneFormGrid, x: &VectorGrid) -> f64 {
    quad_qp(&(&(&pi.pi_q * &x.xq) + &(&pi.pi_p * &x.xp)))
}

/// Relative gap in `⟨J(Π) X_h, X_g⟩ = ⟨Π, X_{{g,h}}⟩`.
pub fn j_adjointness(pi: &OneFormGrid, h: &PhaseFn, g: &PhaseFn, scheme: DiffScheme) -> Result<f64> {
    let xh = VectorGrid::hamiltonian(h, scheme)?;
    let xg = VectorGrid::hamiltonian(g, scheme)?;
    let lhs = pair_field(&j_lp_apply(pi, &xh, scheme)?, &xg);
    let gh = phase_bracket(g, h, scheme)?;
    let rhs = pair_field(pi, &VectorGrid::hamiltonian(&gh, scheme)?);
    Ok(relative(lhs, rhs))
}

/// Least-squares slope of `log(err)` against `log(1/n)`.
pub fn convergence_order(resolutions: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = resolutions.iter().map(|&n| -(n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Settings of the grid-level dual checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualSettings {
    pub instances: usize,
    pub nq: usize,
    pub np: usize,
    pub length: f64,
    pub pmax: f64,
    /// Truncation order of the moment states.
    pub k: usize,
    /// Largest Fourier mode of the random data.
    pub modes: usize,
    /// Spatial resolutions of the FD4 refinement study.
    pub fd4_resolutions: [usize; 3],
}

impl Default for DualSettings {
    fn default() -> Self {
        DualSettings {
            instances: 50,
            nq: 64,
            np: 128,
            length: 2.0 * PI,
            pmax: 8.0,
            k: 4,
            modes: 3,
            fd4_resolutions: [32, 64, 128],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualReport {
    pub instances: usize,
    /// Largest pointwise gap of the matched assembly (Fourier).
    pub matched_vs_full: f64,
    /// Largest relative gap of the moment adjointness (Fourier).
    pub coad_adjointness: f64,
    /// Largest relative gap of the one-form adjointness (Fourier in `q`).
    pub j_adjointness: f64,
    /// FD4 moment adjointness gaps at `fd4_resolutions`, for one fixed instance.
    pub fd4_errors: Vec<f64>,
    pub fd4_order: f64,
}

pub fn dual_suite(seed: u64, settings: &DualSettings) -> Result<DualReport> {
    let mut rng = Lcg64::new(seed);
    let grid = SpatialGrid::new(settings.length, settings.nq)?;
    let pgrid = PhaseGrid::new(grid, settings.pmax, settings.np)?;
    let mut report = DualReport {
        instances: settings.instances,
        matched_vs_full: 0.0,
        coad_adjointness: 0.0,
        j_adjointness: 0.0,
        fd4_errors: Vec::new(),
        fd4_order: f64::NAN,
    };
    for _ in 0..settings.instances {
        let x = random_contra_field(&mut rng, grid, settings.k, settings.modes);
        let y = random_contra_field(&mut rng, grid, settings.k, settings.modes);
        let a = random_moments(&mut rng, grid, settings.k, settings.modes);
        report.matched_vs_full = report.matched_vs_full.max(matched_vs_full(&x, &a, DiffScheme::Fourier)?);
        report.coad_adjointness = report
            .coad_adjointness
            .max(coad_adjointness(&x, &a, &y, DiffScheme::Fourier)?);
        let pi = random_one_form(&mut rng, pgrid, settings.modes);
        let h = random_quadratic_hamiltonian(&mut rng, pgrid, settings.modes);
        let g = random_quadratic_hamiltonian(&mut rng, pgrid, settings.modes);
        report.j_adjointness = report
            .j_adjointness
            .max(j_adjointness(&pi, &h, &g, DiffScheme::Fourier)?);
    }
    // one instance resampled at every resolution: same seed, same modes
    for &n in &settings.fd4_resolutions {
        let g = SpatialGrid::new(settings.length, n)?;
        let mut r = Lcg64::new(seed ^ 0x5eed);
        let x = random_contra_field(&mut r, g, settings.k, settings.modes);
        let y = random_contra_field(&mut r, g, settings.k, settings.modes);
        let a = random_moments(&mut r, g, settings.k, settings.modes);
        report.fd4_errors.push(coad_adjointness(&x, &a, &y, DiffScheme::Fd4)?);
    }
    report.fd4_order = convergence_order(&settings.fd4_resolutions, &report.fd4_errors);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_suite_small() {
        let r = algebra_suite(1, 6, crate::schouten::DEFAULT_ORDER_CAP).unwrap();
        assert!(r.all_hold(), "{r:?}");
        assert_eq!(r.total_checked(), 6 * IDENTITIES.len());
        assert_eq!(r.jacobi_max_order, 3);
        assert_eq!(r, algebra_suite(1, 6, crate::schouten::DEFAULT_ORDER_CAP).unwrap());
    }

    #[test]
    fn band_limited_is_reproducible_and_periodic() {
        let g = SpatialGrid::new(3.0, 32).unwrap();
        let a = band_limited(&mut Lcg64::new(4), g, 3, 1.0);
        let b = band_limited(&mut Lcg64::new(4), g, 3, 1.0);
        assert_eq!(a, b);
        // spectral derivative of a band-limited sample integrates to zero
        assert!(quad_q(&a.ddq(DiffScheme::Fourier)).abs() < 1e-12);
    }

    #[test]
    fn order_fit() {
        let e: Vec<f64> = [16usize, 32, 64].iter().map(|&n| (n as f64).powi(-4)).collect();
        assert!((convergence_order(&[16, 32, 64], &e) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn dual_suite_small() {
        let settings = DualSettings {
            instances: 3,
            ..DualSettings::default()
        };
        let r = dual_suite(9, &settings).unwrap();
        assert!(r.matched_vs_full <= 1e-12, "{r:?}");
        assert!(r.coad_adjointness <= 1e-8, "{r:?}");
        assert!(r.j_adjointness <= 1e-8, "{r:?}");
        assert!((3.7..=4.3).contains(&r.fd4_order), "{r:?}");
    }
}
