//! Maximum-entropy site distributions.
//!
//! Treating sites as independent and maximizing the entropy subject to fixed
//! mean charge `Q` and dipole `P` gives
//!
//! ```text
//! p_i(s) = exp(s θ_i) / (1 + 2 cosh θ_i),    θ_i = λ_Q + x_i λ_P
//! ```
//!
//! with the two multipliers fixed by `Σ_i f(θ_i) = Q` and `Σ_i x_i f(θ_i) = P`,
//! where `f(θ) = 2 sinh θ / (1 + 2 cosh θ)` is the mean site charge. For small
//! `Q/L` and `P/L²` the equations linearize to closed-form multipliers and a
//! profile linear in `x_i`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::chain::{ChargeProfile, SectorLabel};
use crate::error::{Error, Result};

/// Newton stops once both constraint residuals are below this.
pub const RESIDUAL_TOLERANCE: f64 = 1e-11;
const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangeMultipliers {
    pub lambda_q: f64,
    pub lambda_p: f64,
}

impl LagrangeMultipliers {
    pub fn new(lambda_q: f64, lambda_p: f64) -> Self {
        LagrangeMultipliers { lambda_q, lambda_p }
    }

    fn theta(&self, x: f64) -> f64 {
        self.lambda_q + x * self.lambda_p
    }
}

/// Per-site probabilities of `−`, `0`, `+`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiteDistribution {
    pub probs: Vec<[f64; 3]>,
}

impl SiteDistribution {
    /// `⟨s_i⟩ = p_i(+) − p_i(−)`.
    pub fn mean_profile(&self) -> ChargeProfile {
        ChargeProfile::new(self.probs.iter().map(|p| p[2] - p[0]).collect())
    }

    /// Total entropy `−Σ_i Σ_s p_i(s) ln p_i(s)`.
    pub fn entropy(&self) -> f64 {
        self.probs
            .iter()
            .flatten()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }
}

/// `(p(−), p(0), p(+))` for one site, without overflow at large `|θ|`.
fn site_probs(theta: f64) -> [f64; 3] {
    let a = theta.abs();
    let small = (-a).exp();
    let tiny = small * small;
    let z = 1.0 + small + tiny;
    let (toward, zero, away) = (1.0 / z, small / z, tiny / z);
    if theta >= 0.0 {
        [away, zero, toward]
    } else {
        [toward, zero, away]
    }
}

/// Mean charge and its derivative (the site variance) at `θ`.
fn mean_and_slope(theta: f64) -> (f64, f64) {
    let [m, _, p] = site_probs(theta);
    let mean = p - m;
    (mean, p + m - mean * mean)
}

pub fn distribution_from_multipliers(length: usize, m: LagrangeMultipliers) -> SiteDistribution {
    SiteDistribution {
        probs: (1..=length)
            .map(|i| site_probs(m.theta(i as f64)))
            .collect(),
    }
}

/// `(Σ f(θ_i) − Q, Σ x_i f(θ_i) − P)`.
pub fn residuals(length: usize, label: SectorLabel, m: LagrangeMultipliers) -> (f64, f64) {
    let (q, p) = moments(length, m);
    (q - label.q_tot as f64, p - label.p_tot as f64)
}

fn moments(length: usize, m: LagrangeMultipliers) -> (f64, f64) {
    (1..=length).fold((0.0, 0.0), |(q, p), i| {
        let x = i as f64;
        let f = mean_and_slope(m.theta(x)).0;
        (q + f, p + x * f)
    })
}

/// Largest dipole moment of any length-`L` state with total charge `q`.
pub fn max_dipole(length: usize, q: i64) -> Option<i64> {
    let l = length as i64;
    if q.abs() > l {
        return None;
    }
    // Start from all −1 and raise sites from the right end.
    let mut remaining = q + l;
    let mut p = 0;
    for i in (1..=l).rev() {
        let inc = remaining.min(2);
        remaining -= inc;
        p += i * (inc - 1);
    }
    Some(p)
}

/// Smallest dipole moment at charge `q`, by the reflection `i → L + 1 − i`.
pub fn min_dipole(length: usize, q: i64) -> Option<i64> {
    max_dipole(length, q).map(|pmax| (length as i64 + 1) * q - pmax)
}

/// True iff `label` lies strictly inside the realizable `(Q, P)` region,
/// where finite multipliers exist.
pub fn is_interior(length: usize, label: SectorLabel) -> bool {
    let l = length as i64;
    if length < 2 || label.q_tot.abs() >= l {
        return false;
    }
    let (lo, hi) = (
        min_dipole(length, label.q_tot).expect("|Q| < L"),
        max_dipole(length, label.q_tot).expect("|Q| < L"),
    );
    lo < label.p_tot && label.p_tot < hi
}

/// Closed-form multipliers of the linearized constraints, as exact fractions.
pub fn linearized_multipliers_exact(
    length: usize,
    label: SectorLabel,
) -> Result<(Ratio<i64>, Ratio<i64>)> {
    if length < 2 {
        return Err(Error::invalid("linearized multipliers need L ≥ 2"));
    }
    let (l, q, p) = (length as i64, label.q_tot, label.p_tot);
    let lambda_q = Ratio::new(6 * l * q + 3 * q - 9 * p, l * (l - 1));
    let lambda_p = Ratio::new(-9 * (l * q + q - 2 * p), l * (l * l - 1));
    Ok((lambda_q, lambda_p))
}

/// Linearized multipliers `λ_Q = (6LQ + 3Q − 9P)/(L(L−1))`,
/// `λ_P = −9(LQ + Q − 2P)/(L(L²−1))`.
pub fn linearized_multipliers(length: usize, label: SectorLabel) -> Result<LagrangeMultipliers> {
    let (lq, lp) = linearized_multipliers_exact(length, label)?;
    let f = |r: Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
    Ok(LagrangeMultipliers::new(f(lq), f(lp)))
}

/// The first-order profile `⟨s_i⟩ = (2/3)(λ_Q + x_i λ_P)`.
pub fn linear_profile(length: usize, m: LagrangeMultipliers) -> ChargeProfile {
    ChargeProfile::new(
        (1..=length)
            .map(|i| 2.0 / 3.0 * m.theta(i as f64))
            .collect(),
    )
}

/// Solve the nonlinear constraints by damped Newton iteration from the
/// linearized seed.
pub fn solve_multipliers(length: usize, label: SectorLabel) -> Result<LagrangeMultipliers> {
    if !is_interior(length, label) {
        return Err(Error::Infeasible {
            q: label.q_tot,
            p: label.p_tot,
        });
    }
    let mut m = linearized_multipliers(length, label)?;
    let norm = |r: (f64, f64)| r.0.abs().max(r.1.abs());
    let mut r = residuals(length, label, m);
    for _ in 0..MAX_ITERATIONS {
        if norm(r) < RESIDUAL_TOLERANCE {
            return Ok(m);
        }
        let (mut j00, mut j01, mut j11) = (0.0, 0.0, 0.0);
        for i in 1..=length {
            let x = i as f64;
            let v = mean_and_slope(m.theta(x)).1;
            j00 += v;
            j01 += x * v;
            j11 += x * x * v;
        }
        let det = j00 * j11 - j01 * j01;
        let dq = (j11 * r.0 - j01 * r.1) / det;
        let dp = (j00 * r.1 - j01 * r.0) / det;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial = LagrangeMultipliers::new(m.lambda_q - step * dq, m.lambda_p - step * dp);
            let tr = residuals(length, label, trial);
            if norm(tr).is_finite() && norm(tr) < norm(r) {
                m = trial;
                r = tr;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm(r) < RESIDUAL_TOLERANCE {
        Ok(m)
    } else {
        Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual: norm(r),
        })
    }
}

/// The maximum-entropy profile of a sector: solve, then take `p_i(+) − p_i(−)`.
pub fn maxent_profile(length: usize, label: SectorLabel) -> Result<ChargeProfile> {
    let m = solve_multipliers(length, label)?;
    Ok(distribution_from_multipliers(length, m).mean_profile())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_multipliers_give_uniform_sites() {
        let d = distribution_from_multipliers(5, LagrangeMultipliers::new(0.0, 0.0));
        for p in &d.probs {
            for &v in p {
                assert!((v - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        assert!((d.entropy() - 5.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn large_charge_multiplier_saturates() {
        let d = distribution_from_multipliers(3, LagrangeMultipliers::new(800.0, 0.0));
        for p in &d.probs {
            assert!((p[2] - 1.0).abs() < 1e-15);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn center_site_charge_near_mean() {
        let d = distribution_from_multipliers(14, LagrangeMultipliers::new(0.60989, -0.052747));
        let prof = d.mean_profile();
        let center = 0.5 * (prof.at(7) + prof.at(8));
        assert!((center - 1.0 / 7.0).abs() < 0.01, "{center}");
    }

    #[test]
    fn linearized_values_are_exact() {
        let (lq, lp) = linearized_multipliers_exact(14, SectorLabel::new(2, 7)).unwrap();
        assert_eq!(lq, Ratio::new(111, 182));
        assert_eq!(lp, Ratio::new(-144, 2730));
        let (zq, zp) = linearized_multipliers_exact(14, SectorLabel::new(0, 0)).unwrap();
        assert_eq!((zq, zp), (Ratio::from_integer(0), Ratio::from_integer(0)));
    }

    #[test]
    fn neutral_centered_target_has_zero_multipliers() {
        let m = solve_multipliers(9, SectorLabel::new(0, 0)).unwrap();
        assert!(m.lambda_q.abs() < 1e-14 && m.lambda_p.abs() < 1e-14);
    }

    #[test]
    fn newton_converges_near_seed() {
        let label = SectorLabel::new(2, 7);
        let m = solve_multipliers(14, label).unwrap();
        let (rq, rp) = residuals(14, label, m);
        assert!(rq.abs() < 1e-10 && rp.abs() < 1e-10);
        let seed = linearized_multipliers(14, label).unwrap();
        assert!(((m.lambda_q - seed.lambda_q) / seed.lambda_q).abs() < 0.1);
        assert!(((m.lambda_p - seed.lambda_p) / seed.lambda_p).abs() < 0.1);
    }

    #[test]
    fn extremal_and_exterior_targets_are_infeasible() {
        let l = 6;
        let full = (l * (l + 1) / 2) as i64;
        assert!(matches!(
            solve_multipliers(l, SectorLabel::new(l as i64, full - 1)),
            Err(Error::Infeasible { .. })
        ));
        assert!(matches!(
            solve_multipliers(l, SectorLabel::new(l as i64, full)),
            Err(Error::Infeasible { .. })
        ));
        let pmax = max_dipole(l, 1).unwrap();
        assert!(matches!(
            solve_multipliers(l, SectorLabel::new(1, pmax)),
            Err(Error::Infeasible { .. })
        ));
        assert!(solve_multipliers(l, SectorLabel::new(1, pmax - 1)).is_ok());
    }

    #[test]
    fn dipole_extremes() {
        // Q = 1 on four sites: "-0++" → −1 + 3 + 4 = 6.
        assert_eq!(max_dipole(4, 1), Some(6));
        assert_eq!(min_dipole(4, 1), Some(-1));
        assert_eq!(max_dipole(4, 4), Some(10));
        assert_eq!(max_dipole(4, 5), None);
    }

    #[test]
    fn linear_profile_sums_to_charge_to_first_order() {
        let m = linearized_multipliers(14, SectorLabel::new(2, 7)).unwrap();
        let prof = linear_profile(14, m);
        assert!((prof.total_charge() - 2.0).abs() < 1e-12);
        assert!(prof.at(1) > prof.at(14));
        let zero = linear_profile(5, LagrangeMultipliers::new(0.0, 0.0));
        assert!(zero.mean_charge.iter().all(|&v| v == 0.0));
    }
}
