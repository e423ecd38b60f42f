//! Affine maps between the physical box `[-M_i, M_i]^d` and the reference box,
//! plus the chain-rule factors that turn physical differential operators into
//! their rescaled counterparts.
//!
//! Time is never rescaled. With scaling disabled the map is the identity and
//! every factor is one, which realizes the vanilla (unscaled) baselines through
//! the identical code path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledDomain {
    /// Half-width `M_i` of each spatial axis.
    half_widths: Vec<f64>,
    /// Final time `T` of the interval `(0, T]`, if the problem is time-dependent.
    time_span: Option<f64>,
    /// Whether spatial axes are mapped to `[-1, 1]`.
    scaled: bool,
}

impl ScaledDomain {
    /// Domain whose spatial axes are rescaled to `[-1, 1]`.
    pub fn scaling(half_widths: Vec<f64>, time_span: Option<f64>) -> Self {
        assert!(half_widths.iter().all(|m| *m > 0.0));
        assert!(time_span.is_none_or(|t| t > 0.0));
        ScaledDomain {
            half_widths,
            time_span,
            scaled: true,
        }
    }

    /// Identity map: the network operates on raw physical coordinates.
    pub fn identity(half_widths: Vec<f64>, time_span: Option<f64>) -> Self {
        ScaledDomain {
            scaled: false,
            ..Self::scaling(half_widths, time_span)
        }
    }

    pub fn spatial_dims(&self) -> usize {
        self.half_widths.len()
    }

    pub fn half_width(&self, axis: usize) -> f64 {
        self.half_widths[axis]
    }

    pub fn time_span(&self) -> Option<f64> {
        self.time_span
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    /// Half-width of the reference box on `axis` (1 when scaled, `M_i` otherwise).
    pub fn reference_half_width(&self, axis: usize) -> f64 {
        if self.scaled {
            1.0
        } else {
            self.half_widths[axis]
        }
    }

    /// Map a physical spatial point into reference coordinates.
    pub fn to_reference(&self, x: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(x.len(), self.half_widths.len());
        let mut out = Vec::with_capacity(x.len());
        for (axis, (&xi, &m)) in x.iter().zip(&self.half_widths).enumerate() {
            if xi.abs() > m * (1.0 + 1e-12) {
                return Err(Error::PointOutsideDomain {
                    axis,
                    coord: xi,
                    half_width: m,
                });
            }
            out.push(if self.scaled { xi / m } else { xi });
        }
        Ok(out)
    }

    /// Map a reference spatial point back to physical coordinates.
    pub fn to_physical(&self, x_ref: &[f64]) -> Vec<f64> {
        x_ref
            .iter()
            .zip(&self.half_widths)
            .map(|(&xi, &m)| if self.scaled { xi * m } else { xi })
            .collect()
    }

    /// Chain-rule factor `(1/M_i)^order` relating physical derivatives to
    /// reference-coordinate derivatives.
    pub fn derivative_factor(&self, axis: usize, order: u32) -> f64 {
        assert!(order == 1 || order == 2);
        if self.scaled {
            (1.0 / self.half_widths[axis]).powi(order as i32)
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_maps_to_boundary() {
        let d = ScaledDomain::scaling(vec![6.0], Some(1.0));
        assert_eq!(d.to_reference(&[6.0]).unwrap(), vec![1.0]);
        assert_eq!(d.to_reference(&[-6.0]).unwrap(), vec![-1.0]);
    }

    #[test]
    fn unit_half_width_is_identity() {
        let d = ScaledDomain::scaling(vec![1.0], None);
        assert_eq!(d.to_reference(&[0.37]).unwrap(), vec![0.37]);
        assert_eq!(d.derivative_factor(0, 2), 1.0);
    }

    #[test]
    fn linear_map() {
        let d = ScaledDomain::scaling(vec![4.0], None);
        assert_eq!(d.to_reference(&[-2.0]).unwrap(), vec![-0.5]);
        assert_eq!(d.derivative_factor(0, 2), 0.0625);
        assert_eq!(d.derivative_factor(0, 1), 0.25);
    }

    #[test]
    fn round_trip_is_identity() {
        let d = ScaledDomain::scaling(vec![3.0, 5.0], Some(2.0));
        for p in [[1.5, -4.2], [0.0, 0.0], [-3.0, 5.0]] {
            let r = d.to_reference(&p).unwrap();
            let back = d.to_physical(&r);
            for (a, b) in p.iter().zip(&back) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_points_outside_box() {
        let d = ScaledDomain::scaling(vec![2.0], None);
        assert!(matches!(
            d.to_reference(&[2.5]),
            Err(Error::PointOutsideDomain { .. })
        ));
    }

    #[test]
    fn identity_domain_keeps_physical_coordinates() {
        let d = ScaledDomain::identity(vec![4.0], Some(1.0));
        assert_eq!(d.to_reference(&[3.0]).unwrap(), vec![3.0]);
        assert_eq!(d.derivative_factor(0, 2), 1.0);
        assert_eq!(d.reference_half_width(0), 4.0);
    }

    /// Pullback consistency: for f(x) and its pullback g(z) = f(M z), finite
    /// differences satisfy f''(x) = (1/M^2) g''(x / M).
    #[test]
    fn chain_rule_factor_matches_finite_differences() {
        let m = 4.0;
        let d = ScaledDomain::scaling(vec![m], None);
        let f = |x: f64| (1.3 * x).sin() + 0.2 * x * x;
        let g = |z: f64| f(m * z);
        let h = 1e-5;
        for &x in &[-3.0, -0.7, 0.4, 2.9] {
            let z = x / m;
            let f2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let g2 = (g(z + h) - 2.0 * g(z) + g(z - h)) / (h * h);
            let scaled = d.derivative_factor(0, 2) * g2;
            assert!((f2 - scaled).abs() / f2.abs().max(1.0) < 1e-5);
        }
    }
}
