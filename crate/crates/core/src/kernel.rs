//! Jump kernels: conductance as a function of inter-point distance.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::Serialize;

/// Conductance law `phi(t)` with `0 < phi(t) <= 1`.
///
/// * `Poly` is `min(1, t^{-(d+alpha)})`;
/// * `StretchedExp` is `exp(-t^beta)`;
/// * `Custom` interpolates a user table linearly in `t` and clamps outside.
#[derive(Debug, Clone, Serialize)]
pub enum JumpKernel<F> {
    Poly { dim: u32, alpha: F },
    StretchedExp { beta: F },
    Custom { knots: Vec<(F, F)> },
}

impl<F: Scalar> JumpKernel<F> {
    pub fn poly(dim: u32, alpha: F) -> Result<Self> {
        if dim == 0 || !(alpha > F::zero()) {
            return Err(Error::parameter("poly kernel needs dim >= 1 and alpha > 0"));
        }
        Ok(JumpKernel::Poly { dim, alpha })
    }

    pub fn stretched_exp(beta: F) -> Result<Self> {
        if !(beta > F::zero()) {
            return Err(Error::parameter("stretched-exponential kernel needs beta > 0"));
        }
        Ok(JumpKernel::StretchedExp { beta })
    }

    /// Table of `(distance, conductance)` knots, strictly increasing in
    /// distance, values in `(0, 1]`.
    pub fn custom(knots: Vec<(F, F)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::parameter("custom kernel needs at least one knot"));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::parameter("custom kernel knots must increase in distance"));
            }
        }
        if knots.iter().any(|&(t, v)| !(t > F::zero()) || !(v > F::zero()) || v > F::one()) {
            return Err(Error::parameter("custom kernel values must lie in (0, 1]"));
        }
        Ok(JumpKernel::Custom { knots })
    }

    /// Kernel value at distance `t > 0`.
    pub fn value(&self, t: F) -> Result<F> {
        if !(t > F::zero()) {
            return Err(Error::Domain(format!("kernel evaluated at non-positive distance {t}")));
        }
        Ok(self.prepared().eval_sq(t * t))
    }

    /// Evaluator on squared distances. Fast paths cover exponents that are
    /// multiples of 1/2, which includes every acceptance-suite kernel.
    pub fn prepared(&self) -> SqEvaluator<F> {
        match self {
            JumpKernel::Poly { dim, alpha } => {
                // value = min(1, (t^2)^{-e/2}), e = d + alpha
                let half_e = (F::us(*dim as usize) + *alpha) / F::fl(2.0);
                let quarters = half_e * F::fl(4.0);
                let rounded = quarters.round();
                let kind = if (quarters - rounded).abs() < F::fl(1e-9) && rounded <= F::fl(64.0) {
                    let q = rounded.to_f64_lossy() as u32;
                    SqKind::PolyQuarter { whole: q / 4, rem: (q % 4) as u8 }
                } else {
                    SqKind::PolyGeneral { half_e }
                };
                SqEvaluator { kind }
            }
            JumpKernel::StretchedExp { beta } => SqEvaluator {
                kind: SqKind::Stretched { half_beta: *beta / F::fl(2.0) },
            },
            JumpKernel::Custom { knots } => SqEvaluator { kind: SqKind::Custom { knots: knots.clone() } },
        }
    }

    /// Built-in kernels are non-increasing; custom tables may not be.
    pub fn is_builtin_decreasing(&self) -> bool {
        matches!(self, JumpKernel::Poly { .. } | JumpKernel::StretchedExp { .. })
    }

    /// Advisory check of the integrability condition
    /// `int_0^inf t^{d-1} phi(t) dt < inf` that makes the kernel admissible
    /// on infinite configurations of dimension `d`. Both built-in families
    /// satisfy it for all parameters; custom tables are not classified.
    pub fn integrable_in_dim(&self, dim: u32) -> Option<bool> {
        match self {
            // int t^{d-1} min(1, t^{-d-alpha}) dt converges iff alpha > 0
            JumpKernel::Poly { alpha, .. } => Some(*alpha > F::zero() && dim >= 1),
            JumpKernel::StretchedExp { beta } => Some(*beta > F::zero()),
            JumpKernel::Custom { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SqEvaluator<F> {
    kind: SqKind<F>,
}

#[derive(Debug, Clone)]
enum SqKind<F> {
    /// `d2^{-(whole + rem/4)}` clipped at one.
    PolyQuarter { whole: u32, rem: u8 },
    PolyGeneral { half_e: F },
    Stretched { half_beta: F },
    Custom { knots: Vec<(F, F)> },
}

impl<F: Scalar> SqEvaluator<F> {
    /// Conductance for squared distance `d2 > 0`.
    #[inline]
    pub fn eval_sq(&self, d2: F) -> F {
        match &self.kind {
            SqKind::PolyQuarter { whole, rem } => {
                if d2 <= F::one() {
                    return F::one();
                }
                let mut p = F::one();
                let mut base = d2;
                let mut k = *whole;
                while k > 0 {
                    if k & 1 == 1 {
                        p = p * base;
                    }
                    base = base * base;
                    k >>= 1;
                }
                let frac = match rem {
                    0 => F::one(),
                    1 => d2.sqrt().sqrt(),
                    2 => d2.sqrt(),
                    _ => d2.sqrt() * d2.sqrt().sqrt(),
                };
                (p * frac).recip()
            }
            SqKind::PolyGeneral { half_e } => {
                if d2 <= F::one() {
                    F::one()
                } else {
                    d2.powf(-*half_e)
                }
            }
            SqKind::Stretched { half_beta } => (-d2.powf(*half_beta)).exp(),
            SqKind::Custom { knots } => {
                let t = d2.sqrt();
                if t <= knots[0].0 {
                    return knots[0].1;
                }
                if t >= knots[knots.len() - 1].0 {
                    return knots[knots.len() - 1].1;
                }
                let mut lo = 0;
                let mut hi = knots.len() - 1;
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if knots[mid].0 <= t {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let (t0, v0) = knots[lo];
                let (t1, v1) = knots[hi];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn poly_clips_at_one_below_unit_distance() {
        let k = JumpKernel::<f64>::poly(1, 1.0).unwrap();
        assert_eq!(k.value(0.5).unwrap(), 1.0);
        assert_eq!(k.value(1.0).unwrap(), 1.0);
    }

    #[test]
    fn poly_values() {
        // d=1, alpha=1: t = 2 -> 1/4
        let k = JumpKernel::<f64>::poly(1, 1.0).unwrap();
        assert_relative_eq!(k.value(2.0).unwrap(), 0.25, max_relative = 1e-15);
        // d=2, alpha=2: t = 10 -> 1e-4
        let k = JumpKernel::<f64>::poly(2, 2.0).unwrap();
        assert_relative_eq!(k.value(10.0).unwrap(), 1e-4, max_relative = 1e-13);
        // half-integer exponent path against powf
        let k = JumpKernel::<f64>::poly(1, 1.5).unwrap();
        for &t in &[1.1, 3.7, 129.4] {
            assert_relative_eq!(k.value(t).unwrap(), t.powf(-2.5), max_relative = 1e-14);
        }
        // non-half-integer exponent falls back to powf
        let k = JumpKernel::<f64>::poly(1, 0.73).unwrap();
        assert_relative_eq!(k.value(4.2).unwrap(), 4.2f64.powf(-1.73), max_relative = 1e-14);
    }

    #[test]
    fn stretched_exp_tends_to_one_at_zero() {
        let k = JumpKernel::<f64>::stretched_exp(1.0).unwrap();
        assert_relative_eq!(k.value(1e-12).unwrap(), 1.0, max_relative = 1e-9);
        assert_relative_eq!(k.value(2.0).unwrap(), (-2.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn non_positive_distance_is_a_domain_error() {
        let k = JumpKernel::<f64>::poly(1, 1.0).unwrap();
        assert!(k.value(0.0).is_err());
        assert!(k.value(-1.0).is_err());
    }

    #[test]
    fn custom_table_interpolates() {
        let k = JumpKernel::<f64>::custom(vec![(1.0, 1.0), (2.0, 0.5), (4.0, 0.25)]).unwrap();
        assert_relative_eq!(k.value(1.5).unwrap(), 0.75, max_relative = 1e-15);
        assert_eq!(k.value(0.5).unwrap(), 1.0);
        assert_eq!(k.value(10.0).unwrap(), 0.25);
        assert!(JumpKernel::<f64>::custom(vec![(1.0, 1.5)]).is_err());
    }

    #[test]
    fn integrability_advisory() {
        assert_eq!(JumpKernel::<f64>::poly(2, 0.5).unwrap().integrable_in_dim(2), Some(true));
        assert_eq!(JumpKernel::<f64>::stretched_exp(2.0).unwrap().integrable_in_dim(3), Some(true));
        assert_eq!(
            JumpKernel::<f64>::custom(vec![(1.0, 0.5)]).unwrap().integrable_in_dim(1),
            None
        );
    }
}
