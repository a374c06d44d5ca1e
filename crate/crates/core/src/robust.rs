//! Robust estimators applied to whitened reprojection residuals.

/// `ρ(x)` for a scalar residual `x`.
///
/// * `None`: `x²`
/// * `GemanMcClure { c }`: `c²x² / (x² + c²)`, bounded by `c²`
/// * `Huber { delta }`: `x²/2` for `|x| ≤ δ`, `δ(|x| − δ/2)` beyond
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum RobustEstimator {
    None,
    GemanMcClure { c: f64 },
    Huber { delta: f64 },
}

impl RobustEstimator {
    pub fn is_valid(&self) -> bool {
        match *self {
            RobustEstimator::None => true,
            RobustEstimator::GemanMcClure { c } => c > 0.0 && c.is_finite(),
            RobustEstimator::Huber { delta } => delta > 0.0 && delta.is_finite(),
        }
    }

    pub fn rho(&self, x: f64) -> f64 {
        match *self {
            RobustEstimator::None => x * x,
            RobustEstimator::GemanMcClure { c } => {
                let x2 = x * x;
                let c2 = c * c;
                if x2.is_infinite() {
                    return c2;
                }
                c2 * x2 / (x2 + c2)
            }
            RobustEstimator::Huber { delta } => {
                let a = x.abs();
                if a <= delta {
                    0.5 * x * x
                } else {
                    delta * (a - 0.5 * delta)
                }
            }
        }
    }

    /// `dρ/dx`.
    pub fn derivative(&self, x: f64) -> f64 {
        x * self.weight(x)
    }

    /// `ρ'(x) / x`, finite everywhere including `x = 0`.
    pub fn weight(&self, x: f64) -> f64 {
        match *self {
            RobustEstimator::None => 2.0,
            RobustEstimator::GemanMcClure { c } => {
                let c2 = c * c;
                let s = x * x + c2;
                2.0 * c2 * c2 / (s * s)
            }
            RobustEstimator::Huber { delta } => {
                let a = x.abs();
                if a <= delta {
                    1.0
                } else {
                    delta / a
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KINDS: [RobustEstimator; 3] = [
        RobustEstimator::None,
        RobustEstimator::GemanMcClure { c: 5.0 },
        RobustEstimator::Huber { delta: 1.0 },
    ];

    #[test]
    fn zero_and_even() {
        for k in KINDS {
            assert_eq!(k.rho(0.0), 0.0);
            for x in [0.1, 1.0, 3.7, 100.0] {
                assert_eq!(k.rho(x), k.rho(-x));
            }
        }
    }

    #[test]
    fn geman_mcclure_values() {
        let gm = RobustEstimator::GemanMcClure { c: 3.0 };
        assert_eq!(gm.rho(3.0), 4.5);
        assert!(gm.rho(1e300) <= 9.0);
        assert_eq!(gm.rho(f64::INFINITY), 9.0);
    }

    #[test]
    fn huber_branches_meet() {
        let d = 1.5;
        let h = RobustEstimator::Huber { delta: d };
        assert_eq!(h.rho(d), d * d / 2.0);
        assert_eq!(d * (d - d / 2.0), d * d / 2.0);
        assert!((h.derivative(d) - h.derivative(d + 1e-12)).abs() < 1e-10);
    }

    #[test]
    fn derivative_matches_fd() {
        for k in KINDS {
            for x in [-7.0, -0.3, 0.2, 0.999, 2.5, 40.0] {
                let h = 1e-6;
                let fd = (k.rho(x + h) - k.rho(x - h)) / (2.0 * h);
                assert!((fd - k.derivative(x)).abs() < 1e-6 * (1.0 + fd.abs()), "{k:?} {x}");
            }
        }
    }

    #[test]
    fn validity() {
        assert!(!RobustEstimator::GemanMcClure { c: 0.0 }.is_valid());
        assert!(!RobustEstimator::Huber { delta: -1.0 }.is_valid());
        assert!(RobustEstimator::None.is_valid());
    }
}
