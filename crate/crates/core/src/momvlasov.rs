//! Momentum-Vlasov dynamics of one-forms `Π = Π_q dq + Π_p dp` on the phase grid.
//!
//! The map `Π ↦ div Π♯` sends the momentum-Vlasov flow `Π̇ = -(L_{X_h}Π + div X_h Π)`
//! onto the Vlasov flow `ḟ = {h, f}`; that sign is the one for which the
//! intertwining holds and is used throughout.

use crate::error::{Error, Result};
use crate::gridcore::{quad_qp, DiffScheme, PhaseFn, PhaseGrid};
use crate::kinetic::{decompose_f, field, MatchedRhs, PolySlot, VlasovParams};
use crate::momentdyn::OdeState;

/// Relative tolerance between the two sides of the Hamiltonian pairing.
pub const PAIRING_TOL: f64 = 1e-8;

/// Relative tolerance on the `q`-mean of a divergence before the gauge is refused.
pub const GAUGE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct OneFormGrid {
    /// Coefficient of `dq`.
    pub pi_q: PhaseFn,
    /// Coefficient of `dp`.
    pub pi_p: PhaseFn,
}

impl OneFormGrid {
    pub fn new(pi_q: PhaseFn, pi_p: PhaseFn) -> Result<Self> {
        if pi_q.grid() != pi_p.grid() {
            return Err(Error::GridMismatch("one-form components".into()));
        }
        Ok(OneFormGrid { pi_q, pi_p })
    }

    pub fn zeros(grid: PhaseGrid) -> Self {
        OneFormGrid {
            pi_q: PhaseFn::zeros(grid),
            pi_p: PhaseFn::zeros(grid),
        }
    }

    pub fn grid(&self) -> PhaseGrid {
        self.pi_q.grid()
    }

    pub fn plus(&self, other: &Self) -> Self {
        OneFormGrid {
            pi_q: &self.pi_q + &other.pi_q,
            pi_p: &self.pi_p + &other.pi_p,
        }
    }

    pub fn minus(&self, other: &Self) -> Self {
        OneFormGrid {
            pi_q: &self.pi_q - &other.pi_q,
            pi_p: &self.pi_p - &other.pi_p,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.pi_q.max_abs().max(self.pi_p.max_abs())
    }

    pub fn l2(&self) -> f64 {
        self.pi_q.l2().hypot(self.pi_p.l2())
    }
}

impl OdeState for OneFormGrid {
    fn axpy(&self, c: f64, other: &Self) -> Self {
        OneFormGrid {
            pi_q: &self.pi_q + &other.pi_q.scale(c),
            pi_p: &self.pi_p + &other.pi_p.scale(c),
        }
    }
    fn all_finite(&self) -> bool {
        self.pi_q.is_finite() && self.pi_p.is_finite()
    }
}

/// Vector field `X = X^q ∂_q + X^p ∂_p` on the phase grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorGrid {
    pub xq: PhaseFn,
    pub xp: PhaseFn,
}

impl VectorGrid {
    /// `X_h = ∂_p h ∂_q - ∂_q h ∂_p`.
    pub fn hamiltonian(h: &PhaseFn, scheme: DiffScheme) -> Result<Self> {
        Ok(VectorGrid {
            xq: h.ddp(DiffScheme::Fd4)?,
            xp: -h.ddq(scheme),
        })
    }

    /// `X(g) = X^q ∂_q g + X^p ∂_p g`.
    pub fn apply(&self, g: &PhaseFn, scheme: DiffScheme) -> Result<PhaseFn> {
        Ok(&(&self.xq * &g.ddq(scheme)) + &(&self.xp * &g.ddp(DiffScheme::Fd4)?))
    }

    pub fn div(&self, scheme: DiffScheme) -> Result<PhaseFn> {
        Ok(&self.xq.ddq(scheme) + &self.xp.ddp(DiffScheme::Fd4)?)
    }
}

/// `Π♯ = Π_p ∂_q - Π_q ∂_p`.
pub fn sharp(pi: &OneFormGrid) -> VectorGrid {
    VectorGrid {
        xq: pi.pi_p.clone(),
        xp: -&pi.pi_q,
    }
}

/// `div Π♯ = ∂_q Π_p - ∂_p Π_q`.
pub fn div_sharp(pi: &OneFormGrid, scheme: DiffScheme) -> Result<PhaseFn> {
    Ok(&pi.pi_p.ddq(scheme) - &pi.pi_q.ddp(DiffScheme::Fd4)?)
}

/// Both sides of `⟨X_h, Π⟩ = ∫∫ div(Π♯) h`: `(∫∫ Π_q ∂_p h - Π_p ∂_q h, ∫∫ div(Π♯) h)`.
pub fn pairing_sides(pi: &OneFormGrid, h: &PhaseFn, scheme: DiffScheme) -> Result<(f64, f64)> {
    if pi.grid() != h.grid() {
        return Err(Error::GridMismatch("one-form and Hamiltonian".into()));
    }
    let x = VectorGrid::hamiltonian(h, scheme)?;
    let direct = quad_qp(&(&(&pi.pi_q * &x.xq) + &(&pi.pi_p * &x.xp)));
    let divergence = quad_qp(&(&div_sharp(pi, scheme)? * h));
    Ok((direct, divergence))
}

/// `⟨X_h, Π⟩`, checked against the divergence form; the two agree only when
/// the integration by parts is clean (periodic `q`, decay in `p`).
pub fn pairing_ham(pi: &OneFormGrid, h: &PhaseFn, scheme: DiffScheme) -> Result<f64> {
    let (direct, divergence) = pairing_sides(pi, h, scheme)?;
    let x = VectorGrid::hamiltonian(h, scheme)?;
    let natural = (pi.l2() * x.xq.l2().hypot(x.xp.l2())).max(div_sharp(pi, scheme)?.l2() * h.l2());
    let scale = direct.abs().max(divergence.abs()).max(natural);
    if (direct - divergence).abs() > PAIRING_TOL * scale {
        return Err(Error::PairingDisagreement { direct, divergence });
    }
    Ok(direct)
}

/// `J(Π) X = -(L_X Π + div X Π)`.
pub fn j_lp_apply(pi: &OneFormGrid, x: &VectorGrid, scheme: DiffScheme) -> Result<OneFormGrid> {
    if pi.grid() != x.xq.grid() {
        return Err(Error::GridMismatch("one-form and vector field".into()));
    }
    let fd = DiffScheme::Fd4;
    let div = x.div(scheme)?;
    let lq = &(&x.apply(&pi.pi_q, scheme)? + &(&pi.pi_q * &x.xq.ddq(scheme)))
        + &(&pi.pi_p * &x.xp.ddq(scheme));
    let lp = &(&x.apply(&pi.pi_p, scheme)? + &(&pi.pi_q * &x.xq.ddp(fd)?))
        + &(&pi.pi_p * &x.xp.ddp(fd)?);
    Ok(OneFormGrid {
        pi_q: -&(&lq + &(&div * &pi.pi_q)),
        pi_p: -&(&lp + &(&div * &pi.pi_p)),
    })
}

/// `Π̇_q = -X_h(Π_q) + eφ''Π_p`, `Π̇_p = -X_h(Π_p) - Π_q/m` with
/// `X_h(g) = (p/m) ∂_q g - eφ' ∂_p g` and `φ` from the density `∫ div Π♯ dp`.
pub fn momvlasov_rhs(pi: &OneFormGrid, params: &VlasovParams) -> Result<OneFormGrid> {
    let scheme = params.scheme;
    let phi = field(&div_sharp(pi, scheme)?, params)?;
    let force = &phi.ddq(scheme) * params.charge;
    let curvature = &force.ddq(scheme);
    let xh = |g: &PhaseFn| -> Result<PhaseFn> {
        let stream = g.ddq(scheme).mul_p_power(1).scale(1.0 / params.mass);
        Ok(&stream - &g.ddp(DiffScheme::Fd4)?.mul_spatial(&force))
    };
    Ok(OneFormGrid {
        pi_q: &-&xh(&pi.pi_q)? + &pi.pi_p.mul_spatial(curvature),
        pi_p: &-&xh(&pi.pi_p)? - &pi.pi_q.scale(1.0 / params.mass),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiSplit {
    /// Gauge representatives of the divergence components `f_(0), .., f_(K)`.
    pub components: Vec<OneFormGrid>,
    pub pi_s: OneFormGrid,
    pub pi_n: OneFormGrid,
    /// `Π - Π_s - Π_n`; carries the kernel of `div ∘ ♯` and the moment residual.
    pub residual: OneFormGrid,
}

/// Representative `(0, ∫^q g dq)` with `div♯ = g`; needs zero `q`-mean at every `p`.
fn gauge_representative(g: &PhaseFn) -> Result<OneFormGrid> {
    let grid = g.grid();
    let scale = g.max_abs();
    for i in 0..grid.np() {
        let mean = g.column(i).mean();
        if mean.abs() > GAUGE_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::GaugeUnavailable { p_index: i, mean });
        }
    }
    let pi_p = g.map_columns(|i, _| {
        g.column(i)
            .antiderivative()
            .values
            .to_vec()
    });
    Ok(OneFormGrid {
        pi_q: PhaseFn::zeros(grid),
        pi_p,
    })
}

/// Splits `Π` along the moment decomposition of `div Π♯`, orders `0..=K`.
pub fn split_pi(pi: &OneFormGrid, k: usize, scheme: DiffScheme) -> Result<PiSplit> {
    let d = decompose_f(&div_sharp(pi, scheme)?, k)?;
    let components = d
        .components
        .iter()
        .map(gauge_representative)
        .collect::<Result<Vec<_>>>()?;
    let pi_s = components[0].plus(&components[1]);
    let pi_n = components[2..]
        .iter()
        .fold(OneFormGrid::zeros(pi.grid()), |acc, c| acc.plus(c));
    let residual = pi.minus(&pi_s).minus(&pi_n);
    Ok(PiSplit {
        components,
        pi_s,
        pi_n,
        residual,
    })
}

/// `X_{c p^k} = k c p^{k-1} ∂_q - c' p^k ∂_p` with exact `p`-derivatives.
pub fn slot_field(slot: &PolySlot, grid: PhaseGrid, scheme: DiffScheme) -> VectorGrid {
    let k = slot.degree;
    let xq = if k == 0 {
        PhaseFn::zeros(grid)
    } else {
        PhaseFn::from_spatial_power(&slot.coeff, grid, k - 1).scale(k as f64)
    };
    VectorGrid {
        xq,
        xp: -&PhaseFn::from_spatial_power(&slot.coeff.ddq(scheme), grid, k),
    }
}

/// Routes `J(Π_(l)) X_{h_k}` by the moment `l - k + 1` it carries.
pub fn matched_momvlasov_rhs(
    components: &[OneFormGrid],
    slots: &[PolySlot],
    scheme: DiffScheme,
) -> Result<MatchedRhs<OneFormGrid>> {
    let grid = components
        .first()
        .ok_or_else(|| Error::OrderMismatch("no components".into()))?
        .grid();
    let mut out = MatchedRhs {
        ds: OneFormGrid::zeros(grid),
        dn: OneFormGrid::zeros(grid),
        moment_null: OneFormGrid::zeros(grid),
    };
    for slot in slots {
        let x = slot_field(slot, grid, scheme);
        for (l, pl) in components.iter().enumerate() {
            let j = l as i64 - slot.degree as i64 + 1;
            let term = j_lp_apply(pl, &x, scheme)?;
            let target = match j {
                0 | 1 => &mut out.ds,
                j if j >= 2 => &mut out.dn,
                _ => &mut out.moment_null,
            };
            *target = target.plus(&term);
        }
    }
    Ok(out)
}

/// `‖div♯(Π̇) - vlasov_rhs(div♯ Π)‖ / ‖vlasov_rhs(div♯ Π)‖`, zero when both vanish.
pub fn intertwine_check(pi: &OneFormGrid, params: &VlasovParams) -> Result<f64> {
    let scheme = params.scheme;
    let f = div_sharp(pi, scheme)?;
    let phi = field(&f, params)?;
    let projected = div_sharp(&momvlasov_rhs(pi, params)?, scheme)?;
    let direct = crate::kinetic::vlasov_rhs(&f, &phi, params)?;
    let scale = direct.l2().max(projected.l2());
    Ok(if scale == 0.0 {
        0.0
    } else {
        (&projected - &direct).l2() / scale
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridcore::{moment_quad, SpatialFn, SpatialGrid};
    use crate::kinetic::{plasma_slots, FieldMode};
    use std::f64::consts::PI;

    fn gauss(p: f64) -> f64 {
        (-p * p / 2.0).exp() / (2.0 * PI).sqrt()
    }

    fn pgrid(nq: usize, np: usize) -> PhaseGrid {
        PhaseGrid::new(SpatialGrid::new(4.0 * PI, nq).unwrap(), 8.0, np).unwrap()
    }

    /// Band-limited one-form, decaying in `p`, with zero `q`-mean `Π_q`.
    fn sample_pi(grid: PhaseGrid) -> OneFormGrid {
        OneFormGrid::new(
            PhaseFn::from_fn(grid, |q, p| 0.2 * (0.5 * q).sin() * gauss(p)),
            PhaseFn::from_fn(grid, |q, p| (1.0 + 0.2 * (0.5 * q).cos()) * gauss(p)),
        )
        .unwrap()
    }

    #[test]
    fn sharp_and_divergence_examples() {
        let grid = pgrid(16, 32);
        let q_dp = OneFormGrid::new(PhaseFn::zeros(grid), PhaseFn::from_fn(grid, |q, _| q)).unwrap();
        let s = sharp(&q_dp);
        assert_eq!(s.xq, q_dp.pi_p);
        assert_eq!(s.xp.max_abs(), 0.0);
        let p_dq = OneFormGrid::new(PhaseFn::from_fn(grid, |_, p| p), PhaseFn::zeros(grid)).unwrap();
        let s = sharp(&p_dq);
        assert!((&s.xp + &p_dq.pi_q).max_abs() == 0.0);
        let d = div_sharp(&p_dq, DiffScheme::Fourier).unwrap();
        assert!((&d + &PhaseFn::from_fn(grid, |_, _| 1.0)).max_abs() < 1e-12);
        // q is not periodic; FD4 differentiates it exactly
        let d = div_sharp(&q_dp, DiffScheme::Fd4).unwrap();
        let interior = d.values.slice(ndarray::s![2..14, ..]).iter().all(|v| (v - 1.0).abs() < 1e-12);
        assert!(interior);
        assert_eq!(div_sharp(&OneFormGrid::zeros(grid), DiffScheme::Fourier).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn pairing_cases() {
        let grid = pgrid(64, 256);
        let pi = sample_pi(grid);
        let h = PhaseFn::from_fn(grid, |q, p| p * p / 2.0 + 0.1 * (0.5 * q).cos() + 0.3 * (0.5 * q).sin() * p);
        let (a, b) = pairing_sides(&pi, &h, DiffScheme::Fourier).unwrap();
        assert!(a.abs() > 1e-3);
        assert!((a - b).abs() <= 1e-8 * a.abs().max(b.abs()));
        assert_eq!(pairing_ham(&pi, &h, DiffScheme::Fourier).unwrap(), a);
        let c = PhaseFn::from_fn(grid, |_, _| 3.0);
        assert!(pairing_ham(&pi, &c, DiffScheme::Fourier).unwrap().abs() < 1e-14);
        assert_eq!(pairing_ham(&OneFormGrid::zeros(grid), &h, DiffScheme::Fourier).unwrap(), 0.0);

        // Π = q dp is not periodic: its analytic divergence 1 gives the box integral,
        // while on the periodic grid both discrete sides see the sawtooth and vanish
        let kin = PhaseFn::from_fn(grid, |_, p| p * p / 2.0);
        let box_value = grid.spatial().length() * (2.0 * 8f64.powi(3) / 6.0);
        let unit = PhaseFn::from_fn(grid, |_, _| 1.0);
        assert!((quad_qp(&(&unit * &kin)) - box_value).abs() < 1e-3 * box_value);
        let q_dp = OneFormGrid::new(PhaseFn::zeros(grid), PhaseFn::from_fn(grid, |q, _| q)).unwrap();
        let (direct, divergence) = pairing_sides(&q_dp, &kin, DiffScheme::Fd4).unwrap();
        assert!(direct.abs() < 1e-12 && divergence.abs() < 1e-9 * box_value);
        let tilted = OneFormGrid::new(PhaseFn::from_fn(grid, |_, p| p), PhaseFn::zeros(grid)).unwrap();
        assert!(matches!(
            pairing_ham(&tilted, &kin, DiffScheme::Fourier),
            Err(Error::PairingDisagreement { .. })
        ));
    }

    #[test]
    fn rhs_examples() {
        let grid = pgrid(16, 32);
        let zero = SpatialFn::zeros(grid.spatial());
        let params = VlasovParams::new(2.0, 1.0, FieldMode::Prescribed(zero)).unwrap();
        let c = OneFormGrid::new(PhaseFn::from_fn(grid, |_, _| 1.5), PhaseFn::from_fn(grid, |_, _| -0.5)).unwrap();
        let out = momvlasov_rhs(&c, &params).unwrap();
        assert!(out.pi_q.max_abs() < 1e-12);
        assert!((&out.pi_p + &PhaseFn::from_fn(grid, |_, _| 0.75)).max_abs() < 1e-12);
        assert_eq!(momvlasov_rhs(&OneFormGrid::zeros(grid), &params).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn rhs_is_j_applied_to_vlasov_field() {
        let grid = pgrid(32, 128);
        let phi = SpatialFn::from_fn(grid.spatial(), |q| 0.2 * (0.5 * q).sin());
        let params = VlasovParams::new(1.5, -1.0, FieldMode::Prescribed(phi.clone())).unwrap();
        let pi = sample_pi(grid);
        let h = crate::kinetic::hamiltonian(&phi, grid, &params);
        let x = VectorGrid::hamiltonian(&h, params.scheme).unwrap();
        let via_j = j_lp_apply(&pi, &x, params.scheme).unwrap();
        let direct = momvlasov_rhs(&pi, &params).unwrap();
        assert!(via_j.minus(&direct).max_abs() < 1e-10);
        assert_eq!(j_lp_apply(&OneFormGrid::zeros(grid), &x, params.scheme).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn j_adjointness() {
        let grid = pgrid(64, 128);
        let scheme = DiffScheme::Fourier;
        let pi = sample_pi(grid);
        // p-polynomial Hamiltonians keep the FD4 p-derivatives exact
        let h = PhaseFn::from_fn(grid, |q, p| 0.5 * p * p + 0.3 * (0.5 * q).sin() * p + 0.1 * (q).cos());
        let g = PhaseFn::from_fn(grid, |q, p| (0.5 * q).cos() * p * p - 0.2 * (1.5 * q).sin());
        let xh = VectorGrid::hamiltonian(&h, scheme).unwrap();
        let xg = VectorGrid::hamiltonian(&g, scheme).unwrap();
        let jx = j_lp_apply(&pi, &xh, scheme).unwrap();
        let lhs = quad_qp(&(&(&jx.pi_q * &xg.xq) + &(&jx.pi_p * &xg.xp)));
        let gh = crate::kinetic::phase_bracket(&g, &h, scheme).unwrap();
        let xgh = VectorGrid::hamiltonian(&gh, scheme).unwrap();
        let rhs = quad_qp(&(&(&pi.pi_q * &xgh.xq) + &(&pi.pi_p * &xgh.xp)));
        assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs().max(rhs.abs()), "{lhs} {rhs}");
    }

    #[test]
    fn split_reconstructs_divergence() {
        let grid = pgrid(32, 256);
        let scheme = DiffScheme::Fourier;
        let pi = sample_pi(grid);
        let split = split_pi(&pi, 4, scheme).unwrap();
        let total = split.pi_s.plus(&split.pi_n).plus(&split.residual);
        let d0 = div_sharp(&pi, scheme).unwrap();
        assert!((&div_sharp(&total, scheme).unwrap() - &d0).max_abs() < 1e-10);
        let divs: Vec<PhaseFn> = split.components.iter().map(|c| div_sharp(c, scheme).unwrap()).collect();
        let comps = crate::kinetic::decompose_components(&d0, 4).unwrap();
        for (m, (a, b)) in divs.iter().zip(&comps).enumerate() {
            assert!((a - b).max_abs() < 1e-10 * b.max_abs().max(1.0), "m={m}");
            for j in 0..=4 {
                let mu = moment_quad(a, j).unwrap();
                let target = if j as usize == m { moment_quad(&d0, j).unwrap() } else { SpatialFn::zeros(grid.spatial()) };
                assert!((&mu - &target).max_abs() < 1e-8);
            }
        }
        let zero = split_pi(&OneFormGrid::zeros(grid), 4, scheme).unwrap();
        assert_eq!(zero.pi_s.max_abs() + zero.pi_n.max_abs(), 0.0);

        let biased = OneFormGrid::new(PhaseFn::from_fn(grid, |_, p| p * gauss(p)), PhaseFn::zeros(grid)).unwrap();
        assert!(matches!(split_pi(&biased, 2, scheme), Err(Error::GaugeUnavailable { .. })));
    }

    #[test]
    fn matched_split_and_intertwining() {
        let grid = pgrid(64, 256);
        let phi = SpatialFn::from_fn(grid.spatial(), |q| 0.2 * (0.5 * q).sin());
        let params = VlasovParams::new(1.0, 1.0, FieldMode::Prescribed(phi.clone())).unwrap();
        let pi = sample_pi(grid);
        let split = split_pi(&pi, 4, params.scheme).unwrap();
        let slots = plasma_slots(&phi, &params);
        let out = matched_momvlasov_rhs(&split.components, &slots, params.scheme).unwrap();
        let total = out.ds.plus(&out.dn).plus(&out.moment_null);
        let recombined = split.pi_s.plus(&split.pi_n);
        let unsplit = momvlasov_rhs(&recombined, &params).unwrap();
        let dt = div_sharp(&total, params.scheme).unwrap();
        let du = div_sharp(&unsplit, params.scheme).unwrap();
        assert!((&dt - &du).max_abs() <= 1e-8 * du.max_abs());

        let none = matched_momvlasov_rhs(&split.components, &[], params.scheme).unwrap();
        assert_eq!(none.ds.max_abs() + none.dn.max_abs(), 0.0);

        let err = intertwine_check(&pi, &params).unwrap();
        assert!(err <= 1e-5, "intertwine {err}");
        assert_eq!(intertwine_check(&OneFormGrid::zeros(grid), &params).unwrap(), 0.0);
    }
}
