//! Richardson extrapolation of eigenvalues across three nested refinement
//! levels, with per-eigenvalue observed-order estimation.

use serde::{Deserialize, Serialize};

use super::SpectrumResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtrapFlag {
    Extrapolated,
    /// Differences changed sign or vanished: raw finest value passed through.
    NonMonotone,
    /// All three values identical: passthrough.
    Identical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtrapolatedSpectrum {
    pub values: Vec<f64>,
    /// Observed convergence order p (clamped to [1, 6]) where defined.
    pub orders: Vec<Option<f64>>,
    pub flags: Vec<ExtrapFlag>,
}

pub const ORDER_MIN: f64 = 1.0;
pub const ORDER_MAX: f64 = 6.0;

/// Per eigenvalue: p = log₂((λ_ℓ − λ_{ℓ+1}) / (λ_{ℓ+1} − λ_{ℓ+2})), value
/// λ_{ℓ+2} + (λ_{ℓ+2} − λ_{ℓ+1}) / (2^p − 1).
pub fn extrapolate_mesh(results: &[SpectrumResult]) -> ExtrapolatedSpectrum {
    assert!(
        results.len() >= 3,
        "extrapolation needs three refinement levels"
    );
    let (r0, r1, r2) = (&results[0], &results[1], &results[2]);
    let n = r0
        .eigenvalues
        .len()
        .min(r1.eigenvalues.len())
        .min(r2.eigenvalues.len());
    extrapolate_triples(
        &r0.eigenvalues[..n],
        &r1.eigenvalues[..n],
        &r2.eigenvalues[..n],
    )
}

pub fn extrapolate_triples(l0: &[f64], l1: &[f64], l2: &[f64]) -> ExtrapolatedSpectrum {
    let n = l0.len().min(l1.len()).min(l2.len());
    let mut values = Vec::with_capacity(n);
    let mut orders = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b, c) = (l0[k], l1[k], l2[k]);
        let d1 = a - b;
        let d2 = b - c;
        if d1 == 0.0 && d2 == 0.0 {
            values.push(c);
            orders.push(None);
            flags.push(ExtrapFlag::Identical);
            continue;
        }
        if d2 == 0.0 || d1 * d2 <= 0.0 {
            values.push(c);
            orders.push(None);
            flags.push(ExtrapFlag::NonMonotone);
            continue;
        }
        let p = (d1 / d2).log2().clamp(ORDER_MIN, ORDER_MAX);
        let value = c + (c - b) / (2f64.powf(p) - 1.0);
        values.push(value);
        orders.push(Some(p));
        flags.push(ExtrapFlag::Extrapolated);
    }
    ExtrapolatedSpectrum {
        values,
        orders,
        flags,
    }
}
