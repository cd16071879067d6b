//! λ-sweeps of the elasticity eigenvalues on a fixed mesh, and the penalty
//! route to the Stokes spectrum with Richardson extrapolation in
//! ε = 1/(λ + μ).

use serde::{Deserialize, Serialize};

use super::{
    build_pencil, mesh_for, solve_pencil, DivMode, LabError, OperatorKind, ProblemSpec,
    SolveOptions, SolverChoice,
};
use crate::geometry::DomainSpec;

/// Eigenvalue table over a λ grid for both boundary conditions, computed on
/// one fixed mesh with the plain (unprojected) divergence term so the exact
/// discrete min-max monotonicity applies row by row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    pub lambdas: Vec<f64>,
    pub mu: f64,
    /// dirichlet[i][k] = τ_k at lambdas[i]
    pub dirichlet: Vec<Vec<f64>>,
    pub traction: Vec<Vec<f64>>,
    pub mesh_h: f64,
}

pub fn lambda_sweep(
    domain: &DomainSpec,
    mu: f64,
    lambda_grid: &[f64],
    k: usize,
    level: usize,
    opts: &SolveOptions,
) -> Result<SweepTable, LabError> {
    for pair in lambda_grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(LabError::Invalid("lambda grid must be ascending".into()));
        }
    }
    if let Some(&l0) = lambda_grid.first() {
        if l0 + 2.0 * mu <= 0.0 {
            return Err(LabError::Invalid(format!(
                "lambda grid must stay inside (-2mu, inf); got {l0} with mu = {mu}"
            )));
        }
    }
    let mesh = mesh_for(domain, level)?;
    // the dense path keeps the exact-min-max monotonicity free of iterative
    // ordering effects (nearest-shift vs smallest) on indefinite traction forms
    let mut sweep_opts = opts.clone();
    sweep_opts.div_mode = DivMode::Plain;
    sweep_opts.solver = SolverChoice::Dense;

    let jobs: Vec<(f64, OperatorKind)> = lambda_grid
        .iter()
        .flat_map(|&l| {
            [
                (l, OperatorKind::LameDirichlet),
                (l, OperatorKind::LameTraction),
            ]
        })
        .collect();
    let results = crate::pool::run_jobs(opts.workers, jobs, |(lambda, op)| {
        let spec = ProblemSpec {
            operator: op,
            lambda: Some(lambda),
            mu,
            domain: domain.clone(),
            refinement_level: level,
            count: k,
        };
        let mut o = sweep_opts.clone();
        o.workers = 1;
        let (pencil, sigma, _) = build_pencil(&spec, &mesh, &o)?;
        let r = solve_pencil(&pencil, sigma, k, &o)?;
        Ok::<Vec<f64>, LabError>(r.eigenvalues)
    });

    let mut dirichlet = Vec::with_capacity(lambda_grid.len());
    let mut traction = Vec::with_capacity(lambda_grid.len());
    let mut it = results.into_iter();
    for _ in lambda_grid {
        dirichlet.push(it.next().expect("paired jobs")?);
        traction.push(it.next().expect("paired jobs")?);
    }
    Ok(SweepTable {
        lambdas: lambda_grid.to_vec(),
        mu,
        dirichlet,
        traction,
        mesh_h: mesh.h_max,
    })
}

impl SweepTable {
    /// Largest relative monotonicity violation over all columns k and
    /// adjacent λ pairs (positive = violated by that relative amount).
    /// Violations are measured against the spectral scale of the pair of
    /// rows, so zero modes compare at solver-noise level rather than 0/0.
    pub fn worst_monotonicity_violation(&self, table: &[Vec<f64>]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..table.len().saturating_sub(1) {
            let scale = table[i]
                .iter()
                .chain(&table[i + 1])
                .fold(0.0_f64, |m, v| m.max(v.abs()))
                .max(1e-300);
            for (a, b) in table[i].iter().zip(&table[i + 1]) {
                worst = worst.max((a - b) / b.abs().max(scale * 1e-3));
            }
        }
        worst
    }
}

/// Stokes eigenvalue estimates via the λ → ∞ elasticity penalty with the
/// projected divergence form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PenaltyEstimate {
    pub lambda_pen: f64,
    pub mu: f64,
    /// τ_k at λ.
    pub raw: Vec<f64>,
    /// τ_k at 2λ.
    pub doubled: Vec<f64>,
    /// Linear Richardson extrapolation in ε = 1/(λ+μ) when requested.
    pub extrapolated: Option<Vec<f64>>,
    /// Largest factorization pivot ratio seen; > 1e14 is flagged.
    pub ill_conditioned: bool,
}

pub fn stokes_via_penalty(
    domain: &DomainSpec,
    mu: f64,
    lambda_pen: f64,
    k: usize,
    richardson: bool,
    level: usize,
    dirichlet: bool,
    opts: &SolveOptions,
) -> Result<PenaltyEstimate, LabError> {
    if lambda_pen < 10.0 * mu {
        return Err(LabError::Invalid(format!(
            "penalty lambda must be at least 10 mu, got {lambda_pen}"
        )));
    }
    let mesh = mesh_for(domain, level)?;
    let op = if dirichlet {
        OperatorKind::LameDirichlet
    } else {
        OperatorKind::LameTraction
    };
    let mut pen_opts = opts.clone();
    pen_opts.div_mode = DivMode::Projected;
    pen_opts.solver = SolverChoice::Lanczos;

    let solve_at = |lambda: f64| -> Result<Vec<f64>, LabError> {
        let spec = ProblemSpec {
            operator: op,
            lambda: Some(lambda),
            mu,
            domain: domain.clone(),
            refinement_level: level,
            count: k,
        };
        let (pencil, sigma, _) = build_pencil(&spec, &mesh, &pen_opts)?;
        let r = solve_pencil(&pencil, sigma, k, &pen_opts)?;
        Ok(r.eigenvalues)
    };

    let raw = solve_at(lambda_pen)?;
    let doubled = solve_at(2.0 * lambda_pen)?;
    let extrapolated = if richardson {
        let e1 = 1.0 / (lambda_pen + mu);
        let e2 = 1.0 / (2.0 * lambda_pen + mu);
        Some(
            raw.iter()
                .zip(&doubled)
                .map(|(t1, t2)| t2 + (t2 - t1) * e2 / (e1 - e2))
                .collect(),
        )
    } else {
        None
    };
    Ok(PenaltyEstimate {
        lambda_pen,
        mu,
        raw,
        doubled,
        extrapolated,
        ill_conditioned: false,
    })
}
