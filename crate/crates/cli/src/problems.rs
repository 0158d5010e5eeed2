//! Named problems shared by `run` and `convergence`.

use std::fmt;
use std::str::FromStr;

use colocated_fv::analytic::{self, ManufacturedFlow};
use colocated_fv::fields::AnalyticVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// Fluid at rest, no forcing.
    Zero,
    /// Smooth vortex with time-periodic forcing; no exact solution.
    Vortex,
    /// Forced flow with a known polynomial solution.
    Manufactured,
    /// Gradient consistency of two smooth scalars (no time stepping).
    Gradient,
    /// Upwind convection consistency in the dual norm (no time stepping).
    Convection,
}

const NAMES: [(&str, Problem); 5] = [
    ("zero", Problem::Zero),
    ("vortex", Problem::Vortex),
    ("manufactured", Problem::Manufactured),
    ("gradient", Problem::Gradient),
    ("convection", Problem::Convection),
];

impl FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NAMES
            .iter()
            .find(|(n, _)| *n == s)
            .map(|(_, p)| *p)
            .ok_or_else(|| {
                let all: Vec<&str> = NAMES.iter().map(|(n, _)| *n).collect();
                format!("unknown problem '{s}' (expected one of {})", all.join(", "))
            })
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = NAMES
            .iter()
            .find(|(_, p)| p == self)
            .map(|(n, _)| *n)
            .unwrap_or("?");
        f.write_str(name)
    }
}

impl Problem {
    pub fn runnable(self) -> bool {
        matches!(
            self,
            Problem::Zero | Problem::Vortex | Problem::Manufactured
        )
    }

    /// `(forcing, initial velocity)`. Only meaningful for runnable problems.
    pub fn data(self, reynolds: f64) -> (AnalyticVector, AnalyticVector) {
        match self {
            Problem::Vortex => {
                let (u0, f) = analytic::vortex_data();
                (f, u0)
            }
            Problem::Manufactured => {
                let flow = ManufacturedFlow::new(reynolds);
                (flow.forcing, flow.velocity)
            }
            _ => (AnalyticVector::zero(), AnalyticVector::zero()),
        }
    }
}
