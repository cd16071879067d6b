//! Verification experiments: eigenvalue orderings, cross-discretization
//! identities and kernel structure, reported as tabulated check rows.

use serde::{Deserialize, Serialize};

use super::{
    compute_spectrum, compute_spectrum_levels, extrapolate_mesh, lambda_sweep, LabError,
    OperatorKind, ProblemSpec, SolveOptions,
};
use crate::geometry::{DomainKind, DomainSpec};
use crate::oracles::{disk_spectra, DiskSpectrumKind};

/// Relative slack for inequality checks on mesh-extrapolated values.
pub const EXTRAPOLATED_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRow {
    pub id: String,
    pub computed: f64,
    pub reference: f64,
    /// Signed relative margin; its sign convention depends on the check kind
    /// and is recomputable from computed/reference/tolerance.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Hard rows drive the suite verdict; informational rows are reported
    /// but excluded from it.
    pub hard: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub label: String,
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn verdict(&self) -> bool {
        self.rows.iter().filter(|r| r.hard).all(|r| r.pass)
    }

    pub fn all_pass_including_informational(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn merge(mut self, other: CheckReport) -> CheckReport {
        self.rows.extend(other.rows);
        self
    }
}

/// lo <= hi up to slack relative to the pair scale. Pairs that both sit
/// inside `zero_band` (absolute) are kernel-noise comparisons and pass with
/// zero margin.
fn ordering_row(
    id: String,
    lo: f64,
    hi: f64,
    slack: f64,
    zero_band: f64,
    hard: bool,
    detail: &str,
) -> CheckRow {
    let both_zero = lo.abs() <= zero_band && hi.abs() <= zero_band;
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    let margin = if both_zero { 0.0 } else { (hi - lo) / scale };
    CheckRow {
        id,
        computed: lo,
        reference: hi,
        margin,
        tolerance: slack,
        pass: margin >= -slack,
        hard,
        detail: if both_zero {
            format!("{detail} (both inside the kernel noise band)")
        } else {
            detail.to_string()
        },
    }
}

/// |computed − reference| <= rtol·|reference|.
fn closeness_row(
    id: String,
    computed: f64,
    reference: f64,
    rtol: f64,
    hard: bool,
    detail: &str,
) -> CheckRow {
    let margin = (computed - reference).abs() / reference.abs().max(1e-300);
    CheckRow {
        id,
        computed,
        reference,
        margin,
        tolerance: rtol,
        pass: margin <= rtol,
        hard,
        detail: detail.to_string(),
    }
}

/// Values inside the catalog zero-mode band are exact kernel zeros; snapping
/// them avoids 0/0 comparisons between solver-noise quantities.
fn snap_zero_modes(values: &mut [f64]) {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for v in values {
        if v.abs() <= super::ZERO_MODE_REL * scale {
            *v = 0.0;
        }
    }
}

/// Mesh-extrapolated spectrum of one catalog problem (three nested levels).
pub fn extrapolated_values(
    operator: OperatorKind,
    lambda: Option<f64>,
    domain: &DomainSpec,
    mu: f64,
    base_level: usize,
    count: usize,
    opts: &SolveOptions,
) -> Result<Vec<f64>, LabError> {
    let spec = ProblemSpec {
        operator,
        lambda,
        mu,
        domain: domain.clone(),
        refinement_level: base_level,
        count,
    };
    let results = compute_spectrum_levels(&spec, 3, opts)?;
    let mut values = extrapolate_mesh(&results).values;
    snap_zero_modes(&mut values);
    Ok(values)
}

/// Discrete λ-monotonicity of the elasticity eigenvalues on a fixed mesh:
/// one row per boundary condition, adjacent λ pair and index k.
pub fn verify_monotonicity(
    domain: &DomainSpec,
    mu: f64,
    lambda_grid: &[f64],
    k: usize,
    level: usize,
    opts: &SolveOptions,
) -> Result<CheckReport, LabError> {
    let table = lambda_sweep(domain, mu, lambda_grid, k, level, opts)?;
    // the spectral unit of the whole sweep; kernel zeros on the traction side
    // must not set the scale when every requested eigenvalue is a zero mode
    let scale = table
        .dirichlet
        .iter()
        .chain(table.traction.iter())
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    let mut rows = Vec::new();
    for (bc, data) in [("D", &table.dirichlet), ("T", &table.traction)] {
        for i in 0..lambda_grid.len().saturating_sub(1) {
            // values inside the catalog zero-mode band are exact kernel zeros
            let snap = |v: f64| if v.abs() <= super::ZERO_MODE_REL * scale { 0.0 } else { v };
            for j in 0..k.min(data[i].len()) {
                let (a, b) = (snap(data[i][j]), snap(data[i + 1][j]));
                let margin = (b - a) / b.abs().max(scale * 1e-3);
                rows.push(CheckRow {
                    id: format!(
                        "monotone/{bc}/lambda={}->{}/k={}",
                        lambda_grid[i],
                        lambda_grid[i + 1],
                        j + 1
                    ),
                    computed: a,
                    reference: b,
                    margin,
                    tolerance: 1e-9,
                    pass: margin >= -1e-9,
                    hard: true,
                    detail: format!("tau_{}({}) <= tau_{}({})", j + 1, lambda_grid[i], j + 1, lambda_grid[i + 1]),
                });
            }
        }
    }
    Ok(CheckReport {
        label: "monotone".into(),
        rows,
    })
}

/// Eigenvalue sandwich between the vector Laplace and Stokes spectra for the
/// elasticity family, on mesh-extrapolated values. Dirichlet rows are hard;
/// the traction side is informational (its left member has a mesh-dependent
/// numerical kernel that the catalog only observes).
pub fn verify_sandwich(
    domain: &DomainSpec,
    mu: f64,
    lambda_grid: &[f64],
    k: usize,
    base_level: usize,
    opts: &SolveOptions,
) -> Result<CheckReport, LabError> {
    let slack = EXTRAPOLATED_SLACK;
    let theta_d = extrapolated_values(
        OperatorKind::LaplaceVecDirichlet,
        None,
        domain,
        mu,
        base_level,
        k,
        opts,
    )?;
    let sigma_d = extrapolated_values(
        OperatorKind::StokesDirichlet,
        None,
        domain,
        mu,
        base_level,
        k,
        opts,
    )?;
    let theta_t = extrapolated_values(
        OperatorKind::LaplaceVecTraction,
        None,
        domain,
        mu,
        base_level,
        k,
        opts,
    )?;
    let sigma_c = extrapolated_values(
        OperatorKind::StokesCauchy,
        None,
        domain,
        mu,
        base_level,
        k,
        opts,
    )?;

    // kernel noise band relative to the comparison's spectral scale
    let spectral_scale = theta_d
        .iter()
        .chain(&sigma_d)
        .chain(&theta_t)
        .chain(&sigma_c)
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let zero_band = 1e-6 * spectral_scale;

    let mut rows = Vec::new();
    for &lambda_raw in lambda_grid {
        // the λ → −μ endpoint is evaluated just inside the admissible range
        let lambda = if lambda_raw <= -mu {
            -mu + 1e-6 * mu
        } else {
            lambda_raw
        };
        let tau_d = extrapolated_values(
            OperatorKind::LameDirichlet,
            Some(lambda),
            domain,
            mu,
            base_level,
            k,
            opts,
        )?;
        let tau_t = extrapolated_values(
            OperatorKind::LameTraction,
            Some(lambda),
            domain,
            mu,
            base_level,
            k,
            opts,
        )?;
        for i in 0..k {
            rows.push(ordering_row(
                format!("sandwich/D/left/lambda={lambda_raw}/k={}", i + 1),
                theta_d[i],
                tau_d[i],
                slack,
                zero_band,
                true,
                "theta_D <= tau_D(lambda)",
            ));
            rows.push(ordering_row(
                format!("sandwich/D/right/lambda={lambda_raw}/k={}", i + 1),
                tau_d[i],
                sigma_d[i],
                slack,
                zero_band,
                true,
                "tau_D(lambda) <= sigma_D",
            ));
            rows.push(ordering_row(
                format!("sandwich/T/left/lambda={lambda_raw}/k={}", i + 1),
                theta_t[i],
                tau_t[i],
                slack,
                zero_band,
                false,
                "theta_T <= tau_T(lambda)",
            ));
            rows.push(ordering_row(
                format!("sandwich/T/right/lambda={lambda_raw}/k={}", i + 1),
                tau_t[i],
                sigma_c[i],
                slack,
                zero_band,
                false,
                "tau_T(lambda) <= sigma_C",
            ));
        }
    }
    Ok(CheckReport {
        label: "sandwich".into(),
        rows,
    })
}

/// Equality of the clamped buckling spectrum (nonconforming plate elements)
/// and the Dirichlet Stokes spectrum (mixed velocity-pressure elements),
/// two independent discretizations of the same eigenvalues.
pub fn verify_buckling_stokes_identity(
    domain: &DomainSpec,
    mu: f64,
    k: usize,
    morley_base_level: usize,
    stokes_base_level: usize,
    opts: &SolveOptions,
) -> Result<CheckReport, LabError> {
    let buckling = extrapolated_values(
        OperatorKind::BucklingDirichlet,
        None,
        domain,
        mu,
        morley_base_level,
        k,
        opts,
    )?;
    let stokes = extrapolated_values(
        OperatorKind::StokesDirichlet,
        None,
        domain,
        mu,
        stokes_base_level,
        k,
        opts,
    )?;
    let mut rows = Vec::new();
    for i in 0..k {
        rows.push(closeness_row(
            format!("identity/buckling-vs-stokes/k={}", i + 1),
            buckling[i],
            stokes[i],
            5e-3,
            true,
            "Morley buckling vs Taylor-Hood Stokes",
        ));
    }
    if matches!(domain.kind, DomainKind::UnitDisk) {
        let oracle = disk_spectra(DiskSpectrumKind::StokesDirichletEqBuckling, mu, k);
        for i in 0..k {
            rows.push(closeness_row(
                format!("identity/stokes-vs-oracle/k={}", i + 1),
                stokes[i],
                oracle[i],
                1e-2,
                true,
                "Taylor-Hood vs Bessel-zero oracle",
            ));
            rows.push(closeness_row(
                format!("identity/buckling-vs-oracle/k={}", i + 1),
                buckling[i],
                oracle[i],
                1e-2,
                true,
                "Morley vs Bessel-zero oracle",
            ));
        }
    }
    Ok(CheckReport {
        label: "identity".into(),
        rows,
    })
}

/// Strict ordering of the Neumann Laplace, Dirichlet Laplace, clamped plate
/// and buckling eigenvalues, with disk oracle values at k = 1.
pub fn verify_chain_inequalities(
    domain: &DomainSpec,
    mu: f64,
    k: usize,
    scalar_base_level: usize,
    morley_base_level: usize,
    opts: &SolveOptions,
) -> Result<CheckReport, LabError> {
    let slack = EXTRAPOLATED_SLACK;
    let theta = extrapolated_values(
        OperatorKind::ScalarNeumann,
        None,
        domain,
        mu,
        scalar_base_level,
        k,
        opts,
    )?;
    let xi = extrapolated_values(
        OperatorKind::ScalarDirichlet,
        None,
        domain,
        mu,
        scalar_base_level,
        k,
        opts,
    )?;
    let gamma = extrapolated_values(
        OperatorKind::ClampedPlate,
        None,
        domain,
        mu,
        morley_base_level,
        k,
        opts,
    )?;
    let buckling = extrapolated_values(
        OperatorKind::BucklingDirichlet,
        None,
        domain,
        mu,
        morley_base_level,
        k,
        opts,
    )?;
    let mut rows = Vec::new();
    for i in 0..k {
        rows.push(ordering_row(
            format!("chain/theta<xi/k={}", i + 1),
            theta[i],
            xi[i],
            slack,
            0.0,
            true,
            "Neumann below Dirichlet Laplace",
        ));
        rows.push(ordering_row(
            format!("chain/xi<gamma/k={}", i + 1),
            xi[i],
            gamma[i],
            slack,
            0.0,
            true,
            "Dirichlet Laplace below clamped plate",
        ));
        rows.push(ordering_row(
            format!("chain/gamma<buckling/k={}", i + 1),
            gamma[i],
            buckling[i],
            slack,
            0.0,
            true,
            "clamped plate below buckling",
        ));
    }
    if matches!(domain.kind, DomainKind::UnitDisk) {
        let xi_oracle = disk_spectra(DiskSpectrumKind::LaplaceDirichlet, mu, 1)[0];
        let gamma_oracle = disk_spectra(DiskSpectrumKind::ClampedPlate, mu, 1)[0];
        let buckling_oracle = disk_spectra(DiskSpectrumKind::StokesDirichletEqBuckling, mu, 1)[0];
        rows.push(closeness_row(
            "chain/disk-oracle/xi_1".into(),
            xi[0],
            xi_oracle,
            1e-2,
            true,
            "first Dirichlet Laplace eigenvalue on the disk",
        ));
        rows.push(closeness_row(
            "chain/disk-oracle/gamma_1".into(),
            gamma[0],
            gamma_oracle,
            1e-2,
            true,
            "first clamped plate eigenvalue on the disk",
        ));
        rows.push(closeness_row(
            "chain/disk-oracle/buckling_1".into(),
            buckling[0],
            buckling_oracle,
            1e-2,
            true,
            "first buckling eigenvalue on the disk",
        ));
        rows.push(ordering_row(
            "chain/disk-oracle/theta_1~0".into(),
            theta[0].abs(),
            1e-8,
            0.0,
            0.0,
            true,
            "Neumann ground mode is zero",
        ));
    }
    Ok(CheckReport {
        label: "chain".into(),
        rows,
    })
}

/// Kernel dimensions of the natural-boundary-condition operators: the
/// traction elasticity and Cauchy-force Stokes kernels are the rigid motions
/// (dimension 3), the Neumann Laplacian kernel is the constants, and the
/// Dirichlet/clamped problems have none.
pub fn kernel_report(
    domain: &DomainSpec,
    mu: f64,
    level: usize,
    opts: &SolveOptions,
) -> Result<CheckReport, LabError> {
    let cases: Vec<(OperatorKind, Option<f64>, usize)> = vec![
        (OperatorKind::LameTraction, Some(mu), 3),
        (OperatorKind::StokesCauchy, None, 3),
        (OperatorKind::ScalarNeumann, None, 1),
        (OperatorKind::ScalarDirichlet, None, 0),
        (OperatorKind::LameDirichlet, Some(mu), 0),
        (OperatorKind::StokesDirichlet, None, 0),
        (OperatorKind::BucklingDirichlet, None, 0),
        (OperatorKind::ClampedPlate, None, 0),
    ];
    let reports = crate::pool::run_jobs(opts.workers, cases, |(op, lambda, expected)| {
        let spec = ProblemSpec {
            operator: op,
            lambda,
            mu,
            domain: domain.clone(),
            refinement_level: level,
            count: 6,
        };
        let mut o = opts.clone();
        o.workers = 1;
        let r = compute_spectrum(&spec, &o)?;
        Ok::<(OperatorKind, usize, usize), LabError>((op, r.zero_mode_count(), expected))
    });
    let mut rows = Vec::new();
    for rep in reports {
        let (op, got, expected) = rep?;
        rows.push(CheckRow {
            id: format!("kernel/{}", op.cli_name()),
            computed: got as f64,
            reference: expected as f64,
            margin: (got as f64 - expected as f64).abs(),
            tolerance: 0.0,
            pass: got == expected,
            hard: true,
            detail: "numerically-zero eigenvalue count".into(),
        });
    }
    Ok(CheckReport {
        label: "kernel".into(),
        rows,
    })
}
