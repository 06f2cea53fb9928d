//! Experiment registry: configuration parsing and dispatch.

use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;

pub mod branching;
pub mod decomposition;
pub mod egorov;
pub mod flow;
pub mod holonomy;
pub mod spectrum;
pub mod states;
pub mod variance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Flow,
    Holonomy,
    Branching,
    Spectrum,
    States,
    Egorov,
    Variance,
    Decomposition,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Self::Flow,
        Self::Holonomy,
        Self::Branching,
        Self::Spectrum,
        Self::States,
        Self::Egorov,
        Self::Variance,
        Self::Decomposition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Flow => "flow",
            Self::Holonomy => "holonomy",
            Self::Branching => "branching",
            Self::Spectrum => "spectrum",
            Self::States => "states",
            Self::Egorov => "egorov",
            Self::Variance => "variance",
            Self::Decomposition => "decomposition",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::Flow => "frame flow integration: drift, equivariance, Birkhoff versus Liouville averages",
            Self::Holonomy => "holonomy of geodesic triangles against curvature times area",
            Self::Branching => "isotypic splitting of exterior powers restricted to the stabilizer",
            Self::Spectrum => "Hodge, helicity and Dirac identities on truncated spectral models",
            Self::States => "Cesaro and heat states against the tracial state",
            Self::Egorov => "dyadic shell residuals for transported symbols and negative-order operators",
            Self::Variance => "quantum variance on invariant subspaces",
            Self::Decomposition => "decomposition of the tracial state along isotypic projections",
        }
    }

    pub fn from_name(name: &str) -> CliResult<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .ok_or_else(|| CliError::usage(format!("unknown experiment {name:?}; try `list`")))
    }
}

/// Validated settings of one experiment.
#[derive(Debug, Clone)]
pub enum Plan {
    Flow(flow::Settings),
    Holonomy(holonomy::Settings),
    Branching(branching::Settings),
    Spectrum(spectrum::Settings),
    States(states::Settings),
    Egorov(egorov::Settings),
    Variance(variance::Settings),
    Decomposition(decomposition::Settings),
}

impl Plan {
    /// Range-checks every key and rejects unknown ones without running anything.
    pub fn parse(exp: Experiment, p: &Params) -> CliResult<Self> {
        let plan = match exp {
            Experiment::Flow => Self::Flow(flow::parse(p)?),
            Experiment::Holonomy => Self::Holonomy(holonomy::parse(p)?),
            Experiment::Branching => Self::Branching(branching::parse(p)?),
            Experiment::Spectrum => Self::Spectrum(spectrum::parse(p)?),
            Experiment::States => Self::States(states::parse(p)?),
            Experiment::Egorov => Self::Egorov(egorov::parse(p)?),
            Experiment::Variance => Self::Variance(variance::parse(p)?),
            Experiment::Decomposition => Self::Decomposition(decomposition::parse(p)?),
        };
        p.finish()?;
        Ok(plan)
    }

    pub fn execute(&self, run: &mut Run) -> CliResult<()> {
        match self {
            Self::Flow(s) => flow::execute(s, run),
            Self::Holonomy(s) => holonomy::execute(s, run),
            Self::Branching(s) => branching::execute(s, run),
            Self::Spectrum(s) => spectrum::execute(s, run),
            Self::States(s) => states::execute(s, run),
            Self::Egorov(s) => egorov::execute(s, run),
            Self::Variance(s) => variance::execute(s, run),
            Self::Decomposition(s) => decomposition::execute(s, run),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_name(e.name()).unwrap(), e);
        }
        assert_eq!(Experiment::from_name("nope").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let p = Params::from_pairs(&[("n", "4"), ("colour", "red")]);
        let err = Plan::parse(Experiment::Branching, &p).unwrap_err();
        assert!(err.to_string().contains("colour"));
        let p = Params::from_pairs(&[("n", "9")]);
        assert_eq!(Plan::parse(Experiment::Branching, &p).unwrap_err().exit_code(), 2);
    }
}
