//! Closed-form reference spectra: separable square eigenvalues, Bessel-zero
//! disk eigenvalues for the Laplace, Stokes/buckling and clamped-plate
//! operators, and dense brute-force cross-checks of the assembled pencils.

pub mod bessel;
pub mod brute;

pub use bessel::{
    bessel_i, bessel_i_prime, bessel_j, bessel_j_prime, bessel_zeros, BesselError,
    BesselZeroTable,
};
pub use brute::brute_force_dense_check;

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareBc {
    Dirichlet,
    Neumann,
}

/// Eigenvalues μ π² (m² + n²) of the Laplacian on the unit square, sorted
/// with multiplicities; Dirichlet has m, n >= 1, Neumann m, n >= 0.
pub fn square_laplace_spectrum(bc: SquareBc, mu: f64, count: usize) -> Vec<f64> {
    assert!(count <= 100_000, "count limited to 1e5");
    if count == 0 {
        return Vec::new();
    }
    // enough lattice points: #{m²+n² <= s} ≈ (π/4)s for the positive quadrant
    let smax = (4.0 * count as f64 / PI + 16.0 * (count as f64).sqrt() + 64.0).ceil();
    let mmax = smax.sqrt().ceil() as usize;
    let lo = match bc {
        SquareBc::Dirichlet => 1usize,
        SquareBc::Neumann => 0usize,
    };
    let mut vals = Vec::new();
    for m in lo..=mmax {
        for n in lo..=mmax {
            let s = (m * m + n * n) as f64;
            if s <= smax {
                vals.push(mu * PI * PI * s);
            }
        }
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals.truncate(count);
    assert_eq!(vals.len(), count, "lattice bound too small");
    vals
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiskSpectrumKind {
    LaplaceDirichlet,
    /// Dirichlet Stokes spectrum; identical to clamped buckling in 2D.
    StokesDirichletEqBuckling,
    ClampedPlate,
}

/// An analytic disk eigenvalue and its angular structure.
#[derive(Debug, Clone, Copy)]
pub struct DiskMode {
    pub value: f64,
    pub angular_index: usize,
    pub radial_index: usize,
    pub multiplicity: usize,
}

/// First `count` analytic unit-disk eigenvalues (repeated by multiplicity).
///
/// Laplace (Dirichlet): μ j_{ν,k}², multiplicity 2 for ν >= 1.
/// Stokes/buckling: μ j_{m,k}² for m >= 1 via the clamped stream-function
/// radial condition J_m'(k) reducing to J_{m+1}; multiplicity 1 for m = 1
/// (radial stream function), 2 for m >= 2.
/// Clamped plate: Γ = μ κ² with J_m(κ) I_m'(κ) − J_m'(κ) I_m(κ) = 0;
/// multiplicity 1 for m = 0, else 2.
pub fn disk_spectra(kind: DiskSpectrumKind, mu: f64, count: usize) -> Vec<f64> {
    disk_modes(kind, mu, count)
        .into_iter()
        .map(|m| m.value)
        .collect()
}

/// Like [`disk_spectra`] but keeps angular/multiplicity bookkeeping so finite
/// element multiplicity groups can be checked pair-for-pair.
pub fn disk_modes(kind: DiskSpectrumKind, mu: f64, count: usize) -> Vec<DiskMode> {
    assert!(count <= 200, "count limited to 200");
    if count == 0 {
        return Vec::new();
    }
    let mut modes: Vec<DiskMode> = Vec::new();
    match kind {
        DiskSpectrumKind::LaplaceDirichlet => {
            let jmax = (4.8 * count as f64 + 80.0).sqrt();
            let mut nu = 0usize;
            loop {
                let zeros = zeros_up_to(nu, jmax);
                if zeros.is_empty() {
                    break;
                }
                for (k, z) in zeros.iter().enumerate() {
                    modes.push(DiskMode {
                        value: mu * z * z,
                        angular_index: nu,
                        radial_index: k + 1,
                        multiplicity: if nu == 0 { 1 } else { 2 },
                    });
                }
                nu += 1;
            }
        }
        DiskSpectrumKind::StokesDirichletEqBuckling => {
            let jmax = (9.0 * count as f64 + 120.0).sqrt();
            let mut m = 1usize;
            loop {
                let zeros = zeros_up_to(m, jmax);
                if zeros.is_empty() {
                    break;
                }
                for (k, z) in zeros.iter().enumerate() {
                    modes.push(DiskMode {
                        value: mu * z * z,
                        angular_index: m - 1,
                        radial_index: k + 1,
                        multiplicity: if m == 1 { 1 } else { 2 },
                    });
                }
                m += 1;
            }
        }
        DiskSpectrumKind::ClampedPlate => {
            // κ stays small for the low plate eigenvalues; the ascending
            // I-series is accurate well past this cap
            let kappa_max = (2.4 * (count as f64).sqrt() + 8.0).min(30.0);
            let mut m = 0usize;
            loop {
                let f = |x: f64| {
                    bessel_j(m, x).unwrap() * bessel_i_prime(m, x)
                        - bessel_j_prime(m, x).unwrap() * bessel_i(m, x)
                };
                let fp = |x: f64| {
                    let h = 1e-6;
                    (f(x + h) - f(x - h)) / (2.0 * h)
                };
                let roots = bessel::zeros_by_scan(200, 1e-11, &f, &fp, 0.3, kappa_max);
                if roots.is_empty() {
                    break;
                }
                for (k, z) in roots.iter().enumerate() {
                    modes.push(DiskMode {
                        value: mu * z * z,
                        angular_index: m,
                        radial_index: k + 1,
                        multiplicity: if m == 0 { 1 } else { 2 },
                    });
                }
                m += 1;
            }
        }
    }
    modes.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
    let mut out = Vec::with_capacity(count);
    for mode in modes {
        for _ in 0..mode.multiplicity {
            out.push(mode);
            if out.len() == count {
                return out;
            }
        }
    }
    panic!("internal bound too small for {count} disk eigenvalues");
}

fn zeros_up_to(nu: usize, jmax: f64) -> Vec<f64> {
    if nu as f64 >= jmax {
        return Vec::new();
    }
    bessel::zeros_by_scan(
        10_000,
        1e-11,
        |x| bessel_j(nu, x).unwrap_or(f64::NAN),
        |x| bessel_j_prime(nu, x).unwrap_or(f64::NAN),
        nu as f64,
        jmax.min(200.0),
    )
}
