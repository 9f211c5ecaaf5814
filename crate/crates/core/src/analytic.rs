//! Closed-form stationary profiles of three-site dynamics.
//!
//! A single fracton ends up split between the two boundary sites. Two
//! fractons leave charge on both boundaries plus a peak between them whose
//! shape follows from the stationary distribution of the piston separating
//! the hole and particle gases of the two-tier block picture.
//!
//! The two-fracton formulas are continuum results in centred coordinates
//! `x ∈ (−L/2, L/2)`. [`TwoFractonGeometry`] fixes where `x = 0` sits on the
//! lattice; the boundary charges occupy sites `1` and `L`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::chain::ChargeProfile;
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// Absolute tolerance for every quadrature in this module.
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;

/// Infinite-time profile of one fracton started at site `p`: charge
/// `(L−p)/(L−1)` on site 1, `(p−1)/(L−1)` on site `L`, none in between.
pub fn single_fracton_final(length: usize, p: usize) -> Result<ChargeProfile> {
    if length < 2 {
        return Err(Error::invalid("a single-fracton profile needs L ≥ 2"));
    }
    if p == 0 || p > length {
        return Err(Error::invalid(format!(
            "fracton site {p} outside 1..={length}"
        )));
    }
    let l = length as f64;
    let mut m = vec![0.0; length];
    m[0] = (l - p as f64) / (l - 1.0);
    m[length - 1] += (p as f64 - 1.0) / (l - 1.0);
    Ok(ChargeProfile::new(m))
}

/// Length, separation, and lattice placement of a two-fracton problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoFractonGeometry {
    pub length: f64,
    pub delta: f64,
    /// Lattice coordinate of `x = 0`.
    pub center: f64,
}

impl TwoFractonGeometry {
    /// Fractons at `±Δ/2` about the chain midpoint `(L+1)/2`.
    pub fn new(length: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < length) {
            return Err(Error::invalid(format!(
                "need 0 < Δ < L, got Δ = {delta}, L = {length}"
            )));
        }
        Ok(TwoFractonGeometry {
            length,
            delta,
            center: (length + 1.0) / 2.0,
        })
    }

    /// Geometry of fractons at sites `i1 < i2` of a length-`L` chain.
    ///
    /// `Δ = i2 − i1`. The origin is placed so that the profile carries the
    /// chain's dipole `i1 + i2`: with boundary charge `B` on sites 1 and `L`,
    /// the remaining `2 − 2B` must be centred at
    /// `(i1 + i2 − B(L+1)) / (2 − 2B)`. For a symmetric placement this is the
    /// midpoint `(L+1)/2`.
    pub fn from_sites(length: usize, i1: usize, i2: usize) -> Result<Self> {
        if i1 == 0 || i1 >= i2 || i2 > length {
            return Err(Error::invalid(format!(
                "need 1 ≤ i1 < i2 ≤ L, got i1 = {i1}, i2 = {i2}, L = {length}"
            )));
        }
        let mut g = TwoFractonGeometry::new(length as f64, (i2 - i1) as f64)?;
        let b = boundary_charge(&g)?;
        let mid = (g.length + 1.0) / 2.0;
        g.center = mid + ((i1 + i2) as f64 - 2.0 * mid) / (2.0 - 2.0 * b);
        Ok(g)
    }

    fn half_l(&self) -> f64 {
        self.length / 2.0
    }

    fn half_delta(&self) -> f64 {
        self.delta / 2.0
    }

    /// Gaussian width `(1/2) sqrt(LΔ/(L−Δ))` of the piston distribution.
    pub fn piston_width(&self) -> f64 {
        0.5 * (self.length * self.delta / (self.length - self.delta)).sqrt()
    }

    fn check_xi(&self, xi: f64) -> Result<()> {
        if xi.abs() < self.half_delta() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "piston position ξ = {xi} outside (−Δ/2, Δ/2) = (−{h}, {h})",
                h = self.half_delta()
            )))
        }
    }
}

/// Stationary hole (red) and particle (blue) densities with the piston at `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasDensities {
    pub xi: f64,
    /// Hole density on `x < ξ`.
    pub red: f64,
    /// Particle density on `x > ξ`.
    pub blue: f64,
}

impl GasDensities {
    /// `(ρ_red(x), ρ_blue(x))`; each gas is uniform on its own side.
    pub fn at(&self, x: f64) -> (f64, f64) {
        if x < self.xi {
            (self.red, 0.0)
        } else if x > self.xi {
            (0.0, self.blue)
        } else {
            (0.0, 0.0)
        }
    }
}

/// Each gas of `L/2 − Δ/2` blocks spreads uniformly over its side of the
/// piston: `ρ_red = (L/2 − Δ/2)/(L/2 + ξ)`, `ρ_blue = (L/2 − Δ/2)/(L/2 − ξ)`.
pub fn stationary_gas_densities(geom: &TwoFractonGeometry, xi: f64) -> Result<GasDensities> {
    geom.check_xi(xi)?;
    let n = geom.half_l() - geom.half_delta();
    Ok(GasDensities {
        xi,
        red: n / (geom.half_l() + xi),
        blue: n / (geom.half_l() - xi),
    })
}

/// Gaussian piston weight
/// `W(ξ) = sqrt(2(L−Δ)/(ΔLπ)) exp(−2ξ²(L−Δ)/(LΔ))`, normalized on the real line.
pub fn piston_weight(geom: &TwoFractonGeometry, xi: f64) -> f64 {
    let (l, d) = (geom.length, geom.delta);
    (2.0 * (l - d) / (d * l * PI)).sqrt() * (-2.0 * xi * xi * (l - d) / (l * d)).exp()
}

/// `W(ξ)/W(ξ+1)` from the exact discrete balance of piston hops,
/// `(Δ/2 + ξ)(L/2 − ξ) / ((L/2 + ξ)(Δ/2 − ξ))`. Greater than one for
/// `ξ > 0`: the piston is pushed back toward the centre.
pub fn detailed_balance_ratio(geom: &TwoFractonGeometry, xi: f64) -> Result<f64> {
    geom.check_xi(xi)?;
    geom.check_xi(xi + 1.0)?;
    let (hl, hd) = (geom.half_l(), geom.half_delta());
    Ok((hd + xi) * (hl - xi) / ((hl + xi) * (hd - xi)))
}

/// Interior charge density at centred position `x`:
/// `W(x)(L/2 − Δ/2) L / (L²/4 − x²)` for `|x| < Δ/2`, zero elsewhere.
pub fn interior_density(geom: &TwoFractonGeometry, x: f64) -> f64 {
    if x.abs() >= geom.half_delta() {
        return 0.0;
    }
    peak_branch(geom, x)
}

/// The `|x| < Δ/2` branch of [`interior_density`], continued past its range so
/// quadrature over the closed interval sees a smooth integrand.
fn peak_branch(geom: &TwoFractonGeometry, x: f64) -> f64 {
    let hl = geom.half_l();
    piston_weight(geom, x) * (hl - geom.half_delta()) * geom.length / (hl * hl - x * x)
}

/// Charge left on each boundary,
/// `1 − ∫_{−Δ/2}^{Δ/2} W(ξ)(L/2 − Δ/2)/(L/2 + ξ) dξ`.
pub fn boundary_charge(geom: &TwoFractonGeometry) -> Result<f64> {
    let (hl, hd) = (geom.half_l(), geom.half_delta());
    let inside = adaptive_simpson(
        |xi| piston_weight(geom, xi) * (hl - hd) / (hl + xi),
        -hd,
        hd,
        QUADRATURE_TOLERANCE,
    )?;
    Ok(1.0 - inside)
}

/// The infinite-time two-fracton profile on sites `1..=L`.
pub fn two_fracton_final_profile(geom: &TwoFractonGeometry) -> Result<ChargeProfile> {
    let n = geom.length.round() as usize;
    if n < 3 || (geom.length - n as f64).abs() > 1e-12 {
        return Err(Error::invalid("lattice sampling needs an integer L ≥ 3"));
    }
    let b = boundary_charge(geom)?;
    let mut m: Vec<f64> = (1..=n)
        .map(|i| interior_density(geom, i as f64 - geom.center))
        .collect();
    m[0] = b;
    m[n - 1] = b;
    Ok(ChargeProfile::new(m))
}

/// Total charge and centred dipole of the continuum profile, by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuumMoments {
    pub boundary_charge: f64,
    pub charge: f64,
    pub dipole: f64,
}

pub fn continuum_moments(geom: &TwoFractonGeometry) -> Result<ContinuumMoments> {
    let hd = geom.half_delta();
    let b = boundary_charge(geom)?;
    let interior = adaptive_simpson(|x| peak_branch(geom, x), -hd, hd, QUADRATURE_TOLERANCE)?;
    let first = adaptive_simpson(|x| x * peak_branch(geom, x), -hd, hd, QUADRATURE_TOLERANCE)?;
    let hl = geom.half_l();
    Ok(ContinuumMoments {
        boundary_charge: b,
        charge: 2.0 * b + interior,
        dipole: b * (-hl) + b * hl + first,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_fracton_examples() {
        let p = single_fracton_final(51, 26).unwrap();
        assert_eq!((p.at(1), p.at(51)), (0.5, 0.5));
        assert!(p.mean_charge[1..50].iter().all(|&v| v == 0.0));
        let edge = single_fracton_final(9, 1).unwrap();
        assert_eq!(edge.at(1), 1.0);
        assert_eq!(edge.total_charge(), 1.0);
        for (l, q) in [(7usize, 3usize), (20, 11), (5, 5)] {
            let prof = single_fracton_final(l, q).unwrap();
            assert!((prof.dipole_moment() - q as f64).abs() < 1e-12);
        }
        assert!(single_fracton_final(1, 1).is_err());
    }

    #[test]
    fn gas_densities() {
        let g = TwoFractonGeometry::new(80.0, 40.0).unwrap();
        let d = stationary_gas_densities(&g, 0.0).unwrap();
        assert!((d.red - 0.5).abs() < 1e-15 && (d.blue - 0.5).abs() < 1e-15);
        let d = stationary_gas_densities(&g, 7.0).unwrap();
        assert!((d.red * (40.0 + 7.0) - 20.0).abs() < 1e-12);
        assert_eq!(d.at(3.0), (d.red, 0.0));
        assert_eq!(d.at(9.0), (0.0, d.blue));
        let near = stationary_gas_densities(&g, 20.0 - 1e-9).unwrap();
        assert!((near.blue - 1.0).abs() < 1e-9);
        assert!(stationary_gas_densities(&g, 20.0).is_err());
    }

    #[test]
    fn piston_weight_normalization_and_width() {
        let g = TwoFractonGeometry::new(80.0, 40.0).unwrap();
        let z = adaptive_simpson(|x| piston_weight(&g, x), -200.0, 200.0, 1e-10).unwrap();
        assert!((z - 1.0).abs() < 1e-8);
        assert!((g.piston_width() - 4.472_135_955).abs() < 1e-9);
    }

    #[test]
    fn discrete_ratio_matches_gaussian_for_small_xi() {
        let g = TwoFractonGeometry::new(400.0, 200.0).unwrap();
        for xi in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let exact = detailed_balance_ratio(&g, xi).unwrap();
            let gauss = piston_weight(&g, xi) / piston_weight(&g, xi + 1.0);
            assert!((exact - gauss).abs() < 0.01, "{xi}: {exact} vs {gauss}");
        }
    }

    #[test]
    fn balance_ratio_is_restoring() {
        let g = TwoFractonGeometry::new(40.0, 20.0).unwrap();
        assert!((detailed_balance_ratio(&g, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(detailed_balance_ratio(&g, 1.0).unwrap() > 1.0);
        assert!(detailed_balance_ratio(&g, -3.0).unwrap() < 1.0);
        assert!(detailed_balance_ratio(&g, 9.5).is_err());
    }

    #[test]
    fn peak_height_at_l80() {
        let g = TwoFractonGeometry::new(80.0, 40.0).unwrap();
        let peak = interior_density(&g, 0.0);
        assert!((peak - piston_weight(&g, 0.0) * 2.0 * 40.0 / 80.0).abs() < 1e-15);
        assert!((peak - 0.0892).abs() < 5e-5, "{peak}");
    }

    #[test]
    fn conservation_on_a_grid() {
        for l in [40.0, 80.0, 160.0] {
            for f in [0.25, 0.5, 0.75] {
                let g = TwoFractonGeometry::new(l, l * f).unwrap();
                let m = continuum_moments(&g).unwrap();
                assert!((m.charge - 2.0).abs() < 2e-6, "{l} {f}: {}", m.charge);
                assert!(m.dipole.abs() < 1e-6 * l, "{l} {f}: {}", m.dipole);
                assert!(m.boundary_charge > 0.0 && m.boundary_charge < 1.0);
            }
        }
    }

    #[test]
    fn boundary_charge_fixture_at_l80() {
        let g = TwoFractonGeometry::new(80.0, 40.0).unwrap();
        assert!((boundary_charge(&g).unwrap() - 0.493_504_866_5).abs() < 1e-8);
    }

    #[test]
    fn boundary_charge_tends_to_one_as_delta_nears_l() {
        let g = TwoFractonGeometry::new(80.0, 79.999).unwrap();
        assert!((boundary_charge(&g).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn symmetric_sites_centre_on_the_midpoint() {
        let g = TwoFractonGeometry::from_sites(81, 21, 61).unwrap();
        assert!((g.center - 41.0).abs() < 1e-9);
        let a = TwoFractonGeometry::from_sites(80, 20, 60).unwrap();
        let p = two_fracton_final_profile(&a).unwrap();
        assert!(
            (p.dipole_moment() - 80.0).abs() < 0.05,
            "{}",
            p.dipole_moment()
        );
    }
}
