//! Model coefficients: coagulation kernel, fragmentation rate, daughter
//! distribution, growth, death and birth rates, plus a sampling-based
//! checker for the structural bounds the well-posedness theory relies on.

mod assumptions;
mod kernel;
mod rates;

pub use assumptions::{
    verify_assumptions, AssumptionReport, HypothesisCheck, ProbeSpec, WorstPoint, TAIL_TOLERANCE_PER_DECADE,
};
pub use kernel::{CoagulationKernel, SampledKernel};
pub use rates::{DaughterDistribution, FragmentationRate, RateFunction};

use serde::Serialize;

use crate::error::Result;

/// The six coefficients of the growth-coagulation-fragmentation model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSet {
    pub coagulation: CoagulationKernel,
    pub fragmentation: FragmentationRate,
    pub daughter: DaughterDistribution,
    pub growth: RateFunction,
    pub death: RateFunction,
    pub birth: RateFunction,
}

impl Default for CoefficientSet {
    /// Every process switched off.
    fn default() -> Self {
        Self {
            coagulation: CoagulationKernel::Constant { value: 0.0 },
            fragmentation: FragmentationRate::default(),
            daughter: DaughterDistribution::default(),
            growth: RateFunction::zero(),
            death: RateFunction::zero(),
            birth: RateFunction::zero(),
        }
    }
}

impl CoefficientSet {
    pub fn validate(&self) -> Result<()> {
        self.coagulation.validate()?;
        self.fragmentation.validate()?;
        self.daughter.validate()?;
        self.growth.validate()?;
        self.death.validate()?;
        self.birth.validate()
    }

    pub fn with_coagulation(mut self, kernel: CoagulationKernel) -> Self {
        self.coagulation = kernel;
        self
    }

    pub fn with_fragmentation(mut self, rate: FragmentationRate, daughter: DaughterDistribution) -> Self {
        self.fragmentation = rate;
        self.daughter = daughter;
        self
    }

    pub fn with_growth(mut self, growth: RateFunction) -> Self {
        self.growth = growth;
        self
    }

    pub fn with_death(mut self, death: RateFunction) -> Self {
        self.death = death;
        self
    }

    pub fn with_birth(mut self, birth: RateFunction) -> Self {
        self.birth = birth;
        self
    }
}
