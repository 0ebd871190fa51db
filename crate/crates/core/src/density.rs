//! One-point densities of nonreal zeros, at finite `N` and in the three
//! scaling limits, evaluated on planar grids.
//!
//! Plane coordinates per regime (`ζ = x + iy` is the grid point):
//!
//! | regime   | zero location        | complex field         | real field            |
//! |----------|----------------------|-----------------------|-----------------------|
//! | finite   | `z = ζ`              | `R_1(z)`              | `R_{0,1}(z)`          |
//! | bulk     | `z = x + iy/N`       | `R_1/(sN)`            | `R_{0,1}/N²`          |
//! | edge     | `z = 2 + ζ/N²`       | `R_1/(sN³)`           | `R_{0,1}/N⁴`          |
//! | exterior | `z = ζ`, `s = N + c` | `R_1`                 | `R_{0,1}`             |
//!
//! The real-field density uses `R_{0,1}(z) = i sgn(Im z) φ(z)² κ̃(z, z̄)`, so
//! every limit is the `κ` limit kernel at the conjugate pair of local
//! coordinates times the squared weight limit.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::complex_kernel::kernel_diagonal;
use crate::ensemble::{EnsembleParams, Field};
use crate::error::{Error, Result};
use crate::grid::{evaluate_grid, GridSpec, GridValue};
use crate::limits::{
    limit_bulk, limit_edge, limit_exterior_complex_diagonal, limit_exterior_real, omega, weight_limit, CParam,
    LimitKind, LimitParams,
};
use crate::real_kernel::RealKernel;
use crate::specfun::{joukowski_phi, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityRegime {
    Finite,
    LimitBulk,
    LimitEdge,
    LimitExterior,
}

impl FromStr for DensityRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finite" => Ok(Self::Finite),
            "limit-bulk" => Ok(Self::LimitBulk),
            "limit-edge" => Ok(Self::LimitEdge),
            "limit-exterior" => Ok(Self::LimitExterior),
            other => Err(Error::InvalidParams(format!(
                "unknown density regime '{other}' (expected finite, limit-bulk, limit-edge or limit-exterior)"
            ))),
        }
    }
}

/// Evaluator bound to an ensemble and a regime; the limit regimes use the
/// surrogate `λ = N/s` (bulk, edge) or `c = s − N` (exterior).
pub struct Density {
    regime: DensityRegime,
    field: Field,
    limit: Option<LimitParams>,
    finite: Option<Finite>,
}

enum Finite {
    Complex(EnsembleParams),
    Real(RealKernel),
}

impl Density {
    pub fn new(params: &EnsembleParams, regime: DensityRegime) -> Result<Self> {
        let limit = match regime {
            DensityRegime::Finite => None,
            DensityRegime::LimitExterior => Some(LimitParams::surrogate(params, true)?),
            _ => Some(LimitParams::surrogate(params, false)?),
        };
        let finite = match (regime, params.field()) {
            (DensityRegime::Finite, Field::Complex) => Some(Finite::Complex(*params)),
            (DensityRegime::Finite, Field::Real) => Some(Finite::Real(RealKernel::new(*params)?)),
            _ => None,
        };
        Ok(Self { regime, field: params.field(), limit, finite })
    }

    /// Replaces the surrogate limit parameters, e.g. to reach `λ = 1` or `c = ∞`.
    pub fn with_limit(mut self, lp: LimitParams) -> Result<Self> {
        match (self.regime, lp.c()) {
            (DensityRegime::Finite, _) => {
                return Err(Error::RegimeMismatch("finite-N densities take no limit parameters".into()))
            }
            (DensityRegime::LimitBulk | DensityRegime::LimitEdge, CParam::Finite(_)) => {
                return Err(Error::RegimeMismatch("bulk and edge limits are parametrized by λ alone".into()))
            }
            _ => {}
        }
        self.limit = Some(lp);
        Ok(self)
    }

    pub fn limit_params(&self) -> Option<LimitParams> {
        self.limit
    }

    /// Density at the grid point `zeta`.
    pub fn value(&self, zeta: C64) -> Result<f64> {
        if let Some(f) = &self.finite {
            return Ok(match f {
                Finite::Complex(p) => kernel_diagonal(p, zeta),
                Finite::Real(k) => k.complex_intensity(zeta),
            });
        }
        let lp = self.limit.expect("limit regimes carry parameters");
        let sgn = if zeta.im > 0.0 { 1.0 } else { -1.0 };
        match self.regime {
            DensityRegime::LimitBulk => {
                let (x, y) = (zeta.re, zeta.im);
                if !(x.abs() < 2.0) {
                    return Err(Error::InvalidParams(format!("bulk densities need |x| < 2, got x = {x}")));
                }
                let w2 = omega(x) * omega(x);
                let a = C64::new(0.0, y * omega(x));
                let wt = weight_limit(lp.lambda(), a).powi(2);
                Ok(match self.field {
                    Field::Complex => wt * w2 * limit_bulk(&lp, LimitKind::ComplexK, a, a)?.re,
                    Field::Real if y == 0.0 => 0.0,
                    Field::Real => (C64::i() * sgn * wt * w2 * limit_bulk(&lp, LimitKind::Kappa, a, a.conj())?).re,
                })
            }
            DensityRegime::LimitEdge => {
                // 2 − a²/N² = 2 + ζ/N² with Re a ≥ 0.
                let a = (-zeta).sqrt();
                if a.norm() == 0.0 {
                    return Err(Error::InvalidParams("the edge density is singular at ζ = 0".into()));
                }
                let wt = weight_limit(lp.lambda(), a).powi(2);
                Ok(match self.field {
                    Field::Complex => wt * limit_edge(&lp, LimitKind::ComplexK, a, a)?.re,
                    Field::Real if zeta.im == 0.0 => 0.0,
                    Field::Real => (C64::i() * sgn * wt * limit_edge(&lp, LimitKind::Kappa, a, a.conj())?).re,
                })
            }
            DensityRegime::LimitExterior => {
                if zeta.im == 0.0 && zeta.re.abs() <= 2.0 {
                    return Err(Error::OnCut(format!("{zeta}")));
                }
                Ok(match self.field {
                    Field::Complex => limit_exterior_complex_diagonal(&lp, zeta)?,
                    Field::Real if zeta.im == 0.0 => 0.0,
                    Field::Real => {
                        let c = match lp.c() {
                            CParam::Finite(c) => c,
                            CParam::Infinite => return Ok(0.0),
                        };
                        let damp = joukowski_phi(zeta).norm().powf(-2.0 * c);
                        (C64::i() * sgn * c * damp * limit_exterior_real(&lp, zeta, zeta.conj())?).re
                    }
                })
            }
            DensityRegime::Finite => unreachable!("handled above"),
        }
    }

    pub fn grid(&self, grid: &GridSpec) -> Result<Vec<GridValue>> {
        evaluate_grid(grid, |z| self.value(z))
    }
}
