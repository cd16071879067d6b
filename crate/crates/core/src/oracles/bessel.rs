//! Bessel functions J_ν (and modified I_ν) of integer order, with zero
//! finding by bracketing scans and safeguarded Newton refinement.
//!
//! J uses the ascending power series for x <= 12 and Miller's backward
//! recurrence with the Neumann normalization J₀ + 2 J₂ + 2 J₄ + ⋯ = 1 above;
//! absolute accuracy is ~1e-13 on [0, 200]. I uses the ascending series only
//! (small arguments are all the plate roots need).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BesselError {
    #[error("argument {0} outside supported range [0, 200]")]
    ArgumentOutOfRange(f64),
    #[error("zero count {0} exceeds the supported limit {1}")]
    TooManyZeros(usize, usize),
}

const X_MAX: f64 = 200.0;
const SERIES_CUTOVER: f64 = 12.0;

/// J_ν(x) for integer ν >= 0, 0 <= x <= 200.
pub fn bessel_j(nu: usize, x: f64) -> Result<f64, BesselError> {
    if !(0.0..=X_MAX).contains(&x) {
        return Err(BesselError::ArgumentOutOfRange(x));
    }
    if x == 0.0 {
        return Ok(if nu == 0 { 1.0 } else { 0.0 });
    }
    if x <= SERIES_CUTOVER {
        Ok(bessel_j_series(nu, x))
    } else {
        Ok(bessel_j_miller(nu, x))
    }
}

fn bessel_j_series(nu: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    // leading term (x/2)^ν / ν!
    let mut term = 1.0;
    for k in 1..=nu {
        term *= half / k as f64;
    }
    let mut sum = term;
    let hh = half * half;
    for k in 1..200 {
        term *= -hh / (k as f64 * (k + nu) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

fn bessel_j_miller(nu: usize, x: f64) -> f64 {
    let start = {
        let base = x.max(nu as f64) as usize;
        let m = base + 40 + (x.sqrt() as usize) * 4;
        m + (m & 1) // even
    };
    let mut jp1 = 0.0_f64;
    let mut j = 1e-30_f64;
    let mut norm = 0.0_f64;
    let mut result = if nu == start { j } else { 0.0 };
    for m in (1..=start).rev() {
        let jm1 = (2.0 * m as f64 / x) * j - jp1;
        jp1 = j;
        j = jm1;
        if m - 1 == nu {
            result = j;
        }
        if (m - 1) % 2 == 0 {
            norm += if m - 1 == 0 { j } else { 2.0 * j };
        }
        // rescale to avoid overflow
        if j.abs() > 1e250 {
            jp1 /= 1e250;
            j /= 1e250;
            norm /= 1e250;
            result /= 1e250;
        }
    }
    result / norm
}

/// d/dx J_ν(x).
pub fn bessel_j_prime(nu: usize, x: f64) -> Result<f64, BesselError> {
    if nu == 0 {
        Ok(-bessel_j(1, x)?)
    } else {
        Ok(0.5 * (bessel_j(nu - 1, x)? - bessel_j(nu + 1, x)?))
    }
}

/// Modified Bessel I_ν(x) by ascending series (intended for x <= ~15).
pub fn bessel_i(nu: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=nu {
        term *= half / k as f64;
    }
    let mut sum = term;
    let hh = half * half;
    for k in 1..300 {
        term *= hh / (k as f64 * (k + nu) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

pub fn bessel_i_prime(nu: usize, x: f64) -> f64 {
    if nu == 0 {
        bessel_i(1, x)
    } else {
        0.5 * (bessel_i(nu - 1, x) + bessel_i(nu + 1, x))
    }
}

/// Ascending positive zeros of J_ν with interlacing validation.
#[derive(Debug, Clone)]
pub struct BesselZeroTable {
    pub order: usize,
    pub zeros: Vec<f64>,
}

pub const MAX_ZEROS: usize = 100;

/// First `count` positive zeros of J_ν, each to ~1e-10.
pub fn bessel_zeros(nu: usize, count: usize) -> Result<BesselZeroTable, BesselError> {
    if count > MAX_ZEROS {
        return Err(BesselError::TooManyZeros(count, MAX_ZEROS));
    }
    let zeros = zeros_by_scan(
        count,
        1e-11,
        |x| bessel_j(nu, x).unwrap_or(f64::NAN),
        |x| bessel_j_prime(nu, x).unwrap_or(f64::NAN),
        nu as f64,
        X_MAX,
    );
    if zeros.len() < count {
        return Err(BesselError::ArgumentOutOfRange(X_MAX));
    }
    Ok(BesselZeroTable { order: nu, zeros })
}

/// Sign-change scan over [lo_hint, hi] in steps of 0.1 with safeguarded
/// Newton refinement; returns the zeros found, at most `count`.
pub fn zeros_by_scan(
    count: usize,
    tol: f64,
    f: impl Fn(f64) -> f64,
    fp: impl Fn(f64) -> f64,
    lo_hint: f64,
    hi: f64,
) -> Vec<f64> {
    let mut zeros = Vec::with_capacity(count.min(64));
    let step = 0.1;
    let mut x = lo_hint.max(0.0) + 1e-9;
    let mut fx = f(x);
    while zeros.len() < count {
        let xn = x + step;
        if xn > hi {
            break;
        }
        let fn_ = f(xn);
        if fx == 0.0 {
            zeros.push(x);
        } else if fx * fn_ < 0.0 {
            zeros.push(refine_zero(x, xn, tol, &f, &fp));
        }
        x = xn;
        fx = fn_;
    }
    zeros
}

fn refine_zero(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    f: &impl Fn(f64) -> f64,
    fp: &impl Fn(f64) -> f64,
) -> f64 {
    let mut flo = f(lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if flo * fx < 0.0 {
            hi = x;
        } else {
            lo = x;
            flo = fx;
        }
        let dfx = fp(x);
        let newton = x - fx / dfx;
        x = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < tol {
            break;
        }
    }
    x
}

impl BesselZeroTable {
    /// Interlacing against the next order: j_{ν,k} < j_{ν+1,k} < j_{ν,k+1}.
    pub fn interlaces(&self, next_order: &BesselZeroTable) -> bool {
        if next_order.order != self.order + 1 {
            return false;
        }
        let n = self.zeros.len().min(next_order.zeros.len());
        for k in 0..n {
            if next_order.zeros[k] <= self.zeros[k] {
                return false;
            }
            if k + 1 < self.zeros.len() && self.zeros[k + 1] <= next_order.zeros[k] {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn j_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn j0_first_root_region() {
        assert!(bessel_j(0, 2.404826).unwrap().abs() < 1e-6);
    }

    #[test]
    fn series_and_miller_agree_at_cutover() {
        for nu in [0usize, 1, 3, 7] {
            for x in [11.0, 11.5, 12.5, 13.0] {
                let s = bessel_j_series(nu, x);
                let m = bessel_j_miller(nu, x);
                assert!(
                    (s - m).abs() < 2e-12,
                    "nu={nu} x={x}: series {s} vs miller {m}"
                );
            }
        }
    }

    #[test]
    fn known_zero_values() {
        let z0 = bessel_zeros(0, 3).unwrap();
        assert_relative_eq!(z0.zeros[0], 2.404825557695773, epsilon = 1e-9);
        assert_relative_eq!(z0.zeros[1], 5.520078110286311, epsilon = 1e-9);
        let z1 = bessel_zeros(1, 2).unwrap();
        assert_relative_eq!(z1.zeros[0], 3.831705970207512, epsilon = 1e-9);
        assert_relative_eq!(z1.zeros[1], 7.015586669815619, epsilon = 1e-9);
    }

    #[test]
    fn interlacing_holds_for_stored_tables() {
        for nu in 0..6 {
            let a = bessel_zeros(nu, 20).unwrap();
            let b = bessel_zeros(nu + 1, 20).unwrap();
            assert!(a.interlaces(&b), "interlacing failed at nu = {nu}");
        }
    }

    #[test]
    fn argument_domain_enforced() {
        assert!(bessel_j(0, 201.0).is_err());
        assert!(bessel_j(0, -1.0).is_err());
        assert!(bessel_zeros(0, 101).is_err());
    }

    #[test]
    fn modified_bessel_small_values() {
        // I₀(1) = 1.26606587775200833..., I₁(1) = 0.565159103992485
        assert_relative_eq!(bessel_i(0, 1.0), 1.2660658777520083, epsilon = 1e-12);
        assert_relative_eq!(bessel_i(1, 1.0), 0.5651591039924850, epsilon = 1e-12);
        assert_relative_eq!(bessel_i_prime(0, 1.0), bessel_i(1, 1.0), epsilon = 1e-14);
    }

    #[test]
    fn zeros_deterministic() {
        let a = bessel_zeros(2, 10).unwrap();
        let b = bessel_zeros(2, 10).unwrap();
        assert_eq!(a.zeros, b.zeros);
    }
}
