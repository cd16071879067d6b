//! Heat-trace machinery: partition functions from spectra, closed-form
//! asymptotic coefficients of the operator catalog, weighted least-squares
//! fits of the short-time expansion and the fit/theory comparison.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::DomainSpec;

#[derive(Debug, Error)]
pub enum HeatError {
    #[error("shear modulus must be positive, got {0}")]
    BadMu(f64),
    #[error("strong ellipticity requires lambda + 2 mu > 0, got lambda = {0}, mu = {1}")]
    NotStronglyElliptic(f64, f64),
    #[error("buckling coefficients are two-dimensional; got n = {0}")]
    BucklingNeedsN2(usize),
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("empty spectrum")]
    EmptySpectrum,
    #[error("t grid must be positive and strictly ascending")]
    BadTGrid,
    #[error("design matrix ill-conditioned (condition estimate {0:.3e}); widen the t-window")]
    IllConditioned(f64),
    #[error("auto window is empty: tail needs t >= {t_min:.3e} but the expansion needs t <= {t_max:.3e}; supply more eigenvalues")]
    EmptyWindow { t_min: f64, t_max: f64 },
}

/// Geometric inputs of the coefficient formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryData {
    pub volume: f64,
    pub boundary_volume: f64,
    /// ∫_Ω R dV; identically zero on flat domains.
    pub scalar_curvature_integral: f64,
    /// ∫_{∂Ω} H ds with outward normal convention.
    pub mean_curvature_integral: f64,
}

impl GeometryData {
    pub fn from_domain(spec: &DomainSpec) -> Self {
        GeometryData {
            volume: spec.analytic_area,
            boundary_volume: spec.analytic_perimeter,
            scalar_curvature_integral: 0.0,
            mean_curvature_integral: spec.boundary_curvature_integral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatOperator {
    Lame,
    Stokes,
    LaplaceVec,
    Buckling2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatBc {
    Dirichlet,
    TractionOrCauchy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Theoretical,
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTerm {
    pub power: f64,
    pub value: f64,
}

/// Short-time expansion Z(t) ≈ Σ value · t^power over the three powers
/// {−n/2, (1−n)/2, (2−n)/2}; term values include their geometric factors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticModel {
    pub n: usize,
    pub provenance: Provenance,
    pub terms: Vec<AsymptoticTerm>,
    pub geometry: GeometryData,
    pub fit_residual: Option<f64>,
}

impl AsymptoticModel {
    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|c| c.value * t.powf(c.power)).sum()
    }

    pub fn value_at_power(&self, power: f64) -> Option<f64> {
        self.terms
            .iter()
            .find(|c| (c.power - power).abs() < 1e-12)
            .map(|c| c.value)
    }

    pub fn leading(&self) -> f64 {
        self.terms[0].value
    }

    pub fn boundary(&self) -> f64 {
        self.terms[1].value
    }

    pub fn constant(&self) -> f64 {
        self.terms[2].value
    }
}

fn bc_sign(bc: HeatBc) -> f64 {
    match bc {
        HeatBc::Dirichlet => -1.0,
        HeatBc::TractionOrCauchy => 1.0,
    }
}

/// Closed-form expansion coefficients of the catalog operators. The n = 2
/// case has β₂ = 1 in the Stokes interior coefficient and carries the extra
/// constant −1 in the buckling t⁰ term.
pub fn theoretical_coefficients(
    operator: HeatOperator,
    bc: HeatBc,
    lambda: f64,
    mu: f64,
    n: usize,
    geom: GeometryData,
) -> Result<AsymptoticModel, HeatError> {
    if mu <= 0.0 {
        return Err(HeatError::BadMu(mu));
    }
    if n < 2 {
        return Err(HeatError::BadDimension(n));
    }
    let nf = n as f64;
    let vol = geom.volume;
    let bvol = geom.boundary_volume;
    let ri = geom.scalar_curvature_integral;
    let hi = geom.mean_curvature_integral;
    let four_pi = 4.0 * PI;
    let sign = bc_sign(bc);

    let (leading, boundary, constant) = match operator {
        HeatOperator::Lame => {
            if lambda + 2.0 * mu <= 0.0 {
                return Err(HeatError::NotStronglyElliptic(lambda, mu));
            }
            let p = lambda + 2.0 * mu; // squared longitudinal wave speed
            let a0 = (nf - 1.0) / (four_pi * mu).powf(nf / 2.0)
                + 1.0 / (four_pi * p).powf(nf / 2.0);
            let a1 = 0.25
                * ((nf - 1.0) / (four_pi * mu).powf((nf - 1.0) / 2.0)
                    + 1.0 / (four_pi * p).powf((nf - 1.0) / 2.0));
            let interior = 1.0 / p.powf((nf - 2.0) / 2.0)
                + (nf - 7.0) / mu.powf((nf - 2.0) / 2.0)
                + (12.0 * mu / nf) * (1.0 / p.powf(nf / 2.0) + (nf - 1.0) / mu.powf(nf / 2.0));
            let bdry = 2.0 * (1.0 / p.powf((nf - 2.0) / 2.0) + (nf - 7.0) / mu.powf((nf - 2.0) / 2.0));
            let a2 = (interior * ri + bdry * hi) / (6.0 * four_pi.powf(nf / 2.0));
            (a0 * vol, sign * a1 * bvol, a2)
        }
        HeatOperator::Stokes => {
            let beta_n = if n == 2 { 1.0 } else { 0.0 };
            let b0 = (nf - 1.0) / (four_pi * mu).powf(nf / 2.0);
            let b1 = (nf - 1.0) / (4.0 * (four_pi * mu).powf((nf - 1.0) / 2.0));
            let interior = beta_n
                + (nf - 7.0) / mu.powf((nf - 2.0) / 2.0)
                + 12.0 * (nf - 1.0) / (nf * mu.powf((nf - 2.0) / 2.0));
            let bdry = 2.0 * (beta_n + (nf - 7.0) / mu.powf((nf - 2.0) / 2.0));
            let b2 = (interior * ri + bdry * hi) / (6.0 * four_pi.powf(nf / 2.0));
            (b0 * vol, sign * b1 * bvol, b2)
        }
        HeatOperator::LaplaceVec => {
            let c0 = nf / (four_pi * mu).powf(nf / 2.0);
            let c1 = nf / (4.0 * (four_pi * mu).powf((nf - 1.0) / 2.0));
            let c2 = ((nf + 6.0) / mu.powf((nf - 2.0) / 2.0) * ri
                + 2.0 * (nf - 6.0) / mu.powf((nf - 2.0) / 2.0) * hi)
                / (6.0 * four_pi.powf(nf / 2.0));
            (c0 * vol, sign * c1 * bvol, c2)
        }
        HeatOperator::Buckling2d => {
            if n != 2 {
                return Err(HeatError::BucklingNeedsN2(n));
            }
            let d0 = vol / (four_pi * mu);
            let d1 = bvol / (4.0 * (four_pi * mu).sqrt());
            let d2 = -1.0 - hi / (3.0 * PI);
            (d0, sign * d1, d2)
        }
    };

    Ok(AsymptoticModel {
        n,
        provenance: Provenance::Theoretical,
        terms: vec![
            AsymptoticTerm {
                power: -nf / 2.0,
                value: leading,
            },
            AsymptoticTerm {
                power: (1.0 - nf) / 2.0,
                value: boundary,
            },
            AsymptoticTerm {
                power: (2.0 - nf) / 2.0,
                value: constant,
            },
        ],
        geometry: geom,
        fit_residual: None,
    })
}

/// Truncated partition function with the documented Weyl-calibrated tail
/// heuristic: tail(t) ≈ (C_W / t) e^{−t λ_N}, C_W the theoretical leading
/// coefficient. The heuristic is reported per point, never applied to Z.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionCurve {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub tail_bound: Vec<f64>,
}

impl PartitionCurve {
    /// Largest violation of discrete log-convexity: successive divided
    /// differences of log Z must be nondecreasing (up to roundoff), on any
    /// ascending grid.
    pub fn worst_log_convexity_violation(&self) -> f64 {
        let lz: Vec<f64> = self.values.iter().map(|z| z.ln()).collect();
        let mut worst = f64::NEG_INFINITY;
        for i in 1..lz.len().saturating_sub(1) {
            let sl = (lz[i] - lz[i - 1]) / (self.t_grid[i] - self.t_grid[i - 1]);
            let sr = (lz[i + 1] - lz[i]) / (self.t_grid[i + 1] - self.t_grid[i]);
            let scale = sl.abs().max(sr.abs()).max(1.0);
            worst = worst.max((sl - sr) / scale);
        }
        worst
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] < w[0])
    }
}

pub fn partition_function(
    spectrum: &[f64],
    t_grid: &[f64],
    weyl_leading: f64,
) -> Result<PartitionCurve, HeatError> {
    if spectrum.is_empty() {
        return Err(HeatError::EmptySpectrum);
    }
    if t_grid.is_empty() || t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HeatError::BadTGrid);
    }
    let lam_max = spectrum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut values = Vec::with_capacity(t_grid.len());
    let mut tail = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let z: f64 = spectrum.iter().map(|l| (-t * l).exp()).sum();
        values.push(z);
        tail.push((weyl_leading.abs() / t) * (-t * lam_max).exp());
    }
    Ok(PartitionCurve {
        t_grid: t_grid.to_vec(),
        values,
        tail_bound: tail,
    })
}

/// Weighted linear least squares of Z(t) against the given powers of t with
/// weights 1/Z², i.e. relative-error weighting.
pub fn fit_asymptotics(curve: &PartitionCurve, powers: &[f64]) -> Result<AsymptoticModel, HeatError> {
    let npts = curve.t_grid.len();
    let np = powers.len();
    if npts < np {
        return Err(HeatError::BadTGrid);
    }
    let mut design = nalgebra::DMatrix::<f64>::zeros(npts, np);
    let mut rhs = nalgebra::DVector::<f64>::zeros(npts);
    for (i, (&t, &z)) in curve.t_grid.iter().zip(&curve.values).enumerate() {
        let w = 1.0 / z.abs().max(1e-300);
        for (j, &p) in powers.iter().enumerate() {
            design[(i, j)] = w * t.powf(p);
        }
        rhs[i] = w * z;
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > 1e9 {
        return Err(HeatError::IllConditioned(cond));
    }
    let sol = svd
        .solve(&rhs, 0.0)
        .map_err(|_| HeatError::IllConditioned(cond))?;
    let fitted = &design * &sol - &rhs;
    let residual = (fitted.norm_squared() / npts as f64).sqrt();

    let mut terms: Vec<AsymptoticTerm> = powers
        .iter()
        .zip(sol.iter())
        .map(|(&power, &value)| AsymptoticTerm { power, value })
        .collect();
    terms.sort_by(|a, b| a.power.partial_cmp(&b.power).unwrap());
    Ok(AsymptoticModel {
        n: 2,
        provenance: Provenance::Fitted,
        terms,
        geometry: GeometryData {
            volume: 0.0,
            boundary_volume: 0.0,
            scalar_curvature_integral: 0.0,
            mean_curvature_integral: 0.0,
        },
        fit_residual: Some(residual),
    })
}

/// The n = 2 fitting powers {t⁻¹, t^{−1/2}, 1}.
pub const FIT_POWERS_2D: [f64; 3] = [-1.0, -0.5, 0.0];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerComparison {
    pub power: f64,
    pub fitted: f64,
    pub theoretical: f64,
    /// Relative error, except absolute when the theoretical value vanishes.
    pub error: f64,
    pub absolute: bool,
}

/// Per-power errors between a fitted and a theoretical model.
pub fn compare(fitted: &AsymptoticModel, theoretical: &AsymptoticModel) -> Vec<PowerComparison> {
    let mut out = Vec::new();
    for term in &theoretical.terms {
        let f = fitted.value_at_power(term.power).unwrap_or(0.0);
        let absolute = term.value.abs() < 1e-12;
        let error = if absolute {
            (f - term.value).abs()
        } else {
            (f - term.value).abs() / term.value.abs()
        };
        out.push(PowerComparison {
            power: term.power,
            fitted: f,
            theoretical: term.value,
            error,
            absolute,
        });
    }
    out
}

/// Auto-selected fit window (design rule): t_max keeps the t⁰ model term
/// below 10% of the t^{−1/2} term; t_min keeps the Weyl tail heuristic below
/// 0.1% of Z. Returns the windowed curve and the chosen interval.
pub fn auto_window(
    spectrum: &[f64],
    theoretical: &AsymptoticModel,
    points: usize,
) -> Result<(PartitionCurve, f64, f64), HeatError> {
    let c1 = theoretical.boundary().abs();
    let c2 = theoretical.constant().abs();
    let t_max = if c2 < 1e-12 {
        0.05
    } else {
        (0.1 * c1 / c2).powi(2).min(0.05)
    };
    // scan a wide geometric grid for the tail criterion
    let lo = 1e-7;
    let wide: Vec<f64> = (0..400)
        .map(|i| lo * (t_max / lo).powf(i as f64 / 399.0))
        .collect();
    let wide_curve = partition_function(spectrum, &wide, theoretical.leading())?;
    let mut t_min = None;
    for ((&t, &z), &tb) in wide
        .iter()
        .zip(&wide_curve.values)
        .zip(&wide_curve.tail_bound)
    {
        if tb < 1e-3 * z {
            t_min = Some(t);
            break;
        }
    }
    let t_min = t_min.ok_or(HeatError::EmptyWindow {
        t_min: f64::INFINITY,
        t_max,
    })?;
    if t_min >= t_max {
        return Err(HeatError::EmptyWindow { t_min, t_max });
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| t_min * (t_max / t_min).powf(i as f64 / (points.max(2) - 1) as f64))
        .collect();
    let curve = partition_function(spectrum, &grid, theoretical.leading())?;
    Ok((curve, t_min, t_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{square_laplace_spectrum, SquareBc};
    use approx::assert_relative_eq;

    fn square_geom() -> GeometryData {
        GeometryData::from_domain(&DomainSpec::unit_square())
    }

    fn disk_geom() -> GeometryData {
        GeometryData::from_domain(&DomainSpec::unit_disk())
    }

    #[test]
    fn lame_square_hand_values() {
        let m = theoretical_coefficients(
            HeatOperator::Lame,
            HeatBc::Dirichlet,
            0.0,
            1.0,
            2,
            square_geom(),
        )
        .unwrap();
        // leading = 1/(4π) + 1/(8π) = 3/(8π)
        assert_relative_eq!(m.leading(), 3.0 / (8.0 * PI), epsilon = 1e-15);
        // boundary = −(1/4)(1/√(4π) + 1/√(8π)) · 4
        let expect = -(1.0 / (4.0 * PI).sqrt() + 1.0 / (8.0 * PI).sqrt());
        assert_relative_eq!(m.boundary(), expect, epsilon = 1e-15);
        assert_relative_eq!(m.boundary(), -0.4815659, epsilon = 1e-7);
    }

    #[test]
    fn buckling_disk_hand_values() {
        let m = theoretical_coefficients(
            HeatOperator::Buckling2d,
            HeatBc::Dirichlet,
            0.0,
            1.0,
            2,
            disk_geom(),
        )
        .unwrap();
        assert_relative_eq!(m.boundary(), -PI.sqrt() / 4.0, epsilon = 1e-15);
        assert_relative_eq!(m.boundary(), -0.443113, epsilon = 1e-6);
        assert_relative_eq!(m.constant(), -5.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(m.leading(), PI / (4.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn laplace_vec_leading() {
        let m = theoretical_coefficients(
            HeatOperator::LaplaceVec,
            HeatBc::Dirichlet,
            123.0, // irrelevant
            1.0,
            2,
            square_geom(),
        )
        .unwrap();
        assert_relative_eq!(m.leading(), 1.0 / (2.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn lame_at_minus_mu_equals_laplace_exactly() {
        for n in [2usize, 3, 4] {
            let mu = 1.7;
            let a = theoretical_coefficients(
                HeatOperator::Lame,
                HeatBc::Dirichlet,
                -mu,
                mu,
                n,
                disk_geom(),
            )
            .unwrap();
            let c = theoretical_coefficients(
                HeatOperator::LaplaceVec,
                HeatBc::Dirichlet,
                0.0,
                mu,
                n,
                disk_geom(),
            )
            .unwrap();
            for (x, y) in a.terms.iter().zip(&c.terms) {
                assert_relative_eq!(x.value, y.value, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn lame_large_lambda_approaches_stokes() {
        let mu = 0.8;
        let a = theoretical_coefficients(
            HeatOperator::Lame,
            HeatBc::Dirichlet,
            1e8,
            mu,
            2,
            disk_geom(),
        )
        .unwrap();
        let b = theoretical_coefficients(
            HeatOperator::Stokes,
            HeatBc::Dirichlet,
            0.0,
            mu,
            2,
            disk_geom(),
        )
        .unwrap();
        assert_relative_eq!(a.leading(), b.leading(), max_relative = 1e-3);
        assert_relative_eq!(a.boundary(), b.boundary(), max_relative = 1e-3);
    }

    #[test]
    fn coefficient_scaling_in_mu() {
        // (λ, μ) → (cλ, cμ): leading scales c^{−n/2}, boundary c^{−(n−1)/2}
        let c = 3.5;
        for n in [2usize, 3] {
            let m1 = theoretical_coefficients(
                HeatOperator::Lame,
                HeatBc::Dirichlet,
                1.0,
                1.0,
                n,
                square_geom(),
            )
            .unwrap();
            let m2 = theoretical_coefficients(
                HeatOperator::Lame,
                HeatBc::Dirichlet,
                c,
                c,
                n,
                square_geom(),
            )
            .unwrap();
            assert_relative_eq!(
                m2.leading(),
                m1.leading() * c.powf(-(n as f64) / 2.0),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                m2.boundary(),
                m1.boundary() * c.powf(-(n as f64 - 1.0) / 2.0),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn traction_signs_flip_boundary_term() {
        let d = theoretical_coefficients(
            HeatOperator::Lame,
            HeatBc::Dirichlet,
            1.0,
            1.0,
            2,
            square_geom(),
        )
        .unwrap();
        let t = theoretical_coefficients(
            HeatOperator::Lame,
            HeatBc::TractionOrCauchy,
            1.0,
            1.0,
            2,
            square_geom(),
        )
        .unwrap();
        assert!(d.boundary() < 0.0);
        assert!(t.boundary() > 0.0);
        assert_relative_eq!(d.boundary(), -t.boundary(), epsilon = 1e-15);
    }

    #[test]
    fn partition_small_cases() {
        let c = partition_function(&[1.0, 2.0], &[1.0], 1.0).unwrap();
        assert_relative_eq!(c.values[0], (-1.0f64).exp() + (-2.0f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(c.values[0], 0.503215, epsilon = 1e-6);

        // t → large with a double zero mode: Z → multiplicity of zero
        let c = partition_function(&[0.0, 0.0, 5.0], &[100.0], 1.0).unwrap();
        assert_relative_eq!(c.values[0], 2.0, epsilon = 1e-12);

        assert!(partition_function(&[], &[1.0], 1.0).is_err());
        assert!(partition_function(&[1.0], &[1.0, 0.5], 1.0).is_err());
    }

    #[test]
    fn partition_decreasing_and_log_convex() {
        let spec = square_laplace_spectrum(SquareBc::Dirichlet, 1.0, 2000);
        let grid: Vec<f64> = (0..50).map(|i| 1e-3 * 1.15f64.powi(i)).collect();
        let c = partition_function(&spec, &grid, 1.0 / (4.0 * PI)).unwrap();
        assert!(c.strictly_decreasing());
        assert!(c.worst_log_convexity_violation() <= 1e-12);
    }

    #[test]
    fn analytic_square_partition_matches_three_term_model() {
        // 10⁴ exact modes at t = 0.01 against |Ω|/(4πt) − |∂Ω|/(4√(4πt)) + 1/4
        // (the square's corner constant)
        let spec = square_laplace_spectrum(SquareBc::Dirichlet, 1.0, 10_000);
        let c = partition_function(&spec, &[0.01], 1.0 / (4.0 * PI)).unwrap();
        let t = 0.01f64;
        let model = 1.0 / (4.0 * PI * t) - 4.0 / (4.0 * (4.0 * PI * t).sqrt()) + 0.25;
        assert_relative_eq!(c.values[0], model, max_relative = 2e-3);
    }

    #[test]
    fn fit_recovers_synthetic_model() {
        let terms = [(-1.0f64, 2.5f64), (-0.5, -0.8), (0.0, 0.3)];
        let grid: Vec<f64> = (0..40).map(|i| 1e-3 * 1.12f64.powi(i)).collect();
        let values: Vec<f64> = grid
            .iter()
            .map(|t| terms.iter().map(|(p, v)| v * t.powf(*p)).sum())
            .collect();
        let curve = PartitionCurve {
            t_grid: grid,
            values,
            tail_bound: vec![0.0; 40],
        };
        let fit = fit_asymptotics(&curve, &FIT_POWERS_2D).unwrap();
        for (p, v) in terms {
            assert_relative_eq!(fit.value_at_power(p).unwrap(), v, max_relative = 1e-10);
        }
    }

    #[test]
    fn analytic_square_fit_two_leading_terms() {
        let spec = square_laplace_spectrum(SquareBc::Dirichlet, 1.0, 10_000);
        let grid: Vec<f64> = (0..60)
            .map(|i| 0.002 * (0.02f64 / 0.002).powf(i as f64 / 59.0))
            .collect();
        let curve = partition_function(&spec, &grid, 1.0 / (4.0 * PI)).unwrap();
        let fit = fit_asymptotics(&curve, &FIT_POWERS_2D).unwrap();
        let leading = fit.value_at_power(-1.0).unwrap();
        let boundary = fit.value_at_power(-0.5).unwrap();
        assert_relative_eq!(leading, 1.0 / (4.0 * PI), max_relative = 0.01);
        assert_relative_eq!(boundary, -1.0 / (4.0 * PI).sqrt(), max_relative = 0.03);
        assert!(boundary < 0.0, "Dirichlet boundary term must be negative");
    }

    #[test]
    fn compare_identical_models_is_zero() {
        let m = theoretical_coefficients(
            HeatOperator::Stokes,
            HeatBc::Dirichlet,
            0.0,
            1.0,
            2,
            disk_geom(),
        )
        .unwrap();
        for c in compare(&m, &m) {
            assert_eq!(c.error, 0.0);
        }
    }

    #[test]
    fn narrow_window_is_ill_conditioned() {
        let spec = square_laplace_spectrum(SquareBc::Dirichlet, 1.0, 100);
        let grid = vec![0.01, 0.01000001, 0.01000002];
        let curve = partition_function(&spec, &grid, 1.0).unwrap();
        match fit_asymptotics(&curve, &FIT_POWERS_2D) {
            Err(HeatError::IllConditioned(_)) => {}
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
    }

    #[test]
    fn parameter_domain_errors() {
        let g = square_geom();
        assert!(theoretical_coefficients(HeatOperator::Lame, HeatBc::Dirichlet, 0.0, -1.0, 2, g)
            .is_err());
        assert!(
            theoretical_coefficients(HeatOperator::Lame, HeatBc::Dirichlet, -3.0, 1.0, 2, g)
                .is_err()
        );
        assert!(theoretical_coefficients(
            HeatOperator::Buckling2d,
            HeatBc::Dirichlet,
            0.0,
            1.0,
            3,
            g
        )
        .is_err());
    }
}
