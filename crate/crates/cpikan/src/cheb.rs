//! Chebyshev polynomials of the first kind and their derivatives.
//!
//! Values follow the three-term recurrence `T_n = 2 xi T_{n-1} - T_{n-2}`;
//! first and second derivatives follow the differentiated recurrences, which
//! stay well conditioned all the way to the interval endpoints (unlike the
//! closed forms with a `1 - xi^2` denominator).

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;

/// Tolerance for inputs marginally outside `[-1, 1]`; beyond it evaluation
/// is rejected rather than clamped.
pub const RANGE_TOL: f64 = 1e-12;

/// `T_0..T_k` at a point together with first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebEval {
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

/// Evaluate `T_0..T_k` and derivatives at `xi` in `[-1, 1]`.
pub fn eval_chebyshev(xi: f64, k: usize) -> Result<ChebEval> {
    if !xi.is_finite() {
        return Err(Error::NonFinite {
            context: format!("chebyshev input xi = {xi}"),
        });
    }
    if xi.abs() > 1.0 + RANGE_TOL {
        return Err(Error::ChebOutOfRange { xi });
    }
    let xi = xi.clamp(-1.0, 1.0);

    let n = k + 1;
    let mut values = vec![0.0; n];
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    values[0] = 1.0;
    if k >= 1 {
        values[1] = xi;
        d1[1] = 1.0;
    }
    for i in 2..n {
        values[i] = 2.0 * xi * values[i - 1] - values[i - 2];
        d1[i] = 2.0 * values[i - 1] + 2.0 * xi * d1[i - 1] - d1[i - 2];
        d2[i] = 4.0 * d1[i - 1] + 2.0 * xi * d2[i - 1] - d2[i - 2];
    }
    Ok(ChebEval { values, d1, d2 })
}

/// `T_1..T_k` as jets over an arbitrary scalar type. `T_0` is identically one
/// and is omitted; callers fold its coefficient in as an additive constant.
/// `xi` must already be tanh-normalized, so no range check is performed here.
pub fn cheb_jets<T: Scalar>(xi: &Jet<T>, k: usize) -> Vec<Jet<T>> {
    assert!(k >= 1, "chebyshev degree must be at least 1");
    let mut out: Vec<Jet<T>> = Vec::with_capacity(k);
    out.push(xi.clone());
    for i in 2..=k {
        let doubled = xi.mul(&out[i - 2]).scale(2.0);
        let next = if i == 2 {
            doubled.shift(-1.0) // T_0 = 1
        } else {
            doubled.sub(&out[i - 3])
        };
        out.push(next);
    }
    out
}
