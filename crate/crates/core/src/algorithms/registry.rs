use std::sync::Arc;

use thiserror::Error;

use super::{mfm, AlmostSaturating, BaseCase, ProposalMm};
use crate::sim::Algorithm;

pub const ALGORITHM_NAMES: &[&str] = &["mfm", "base2", "almost-sat", "proposal-mm"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlgorithmParams {
    /// Maximum degree the algorithm is instantiated for.
    pub delta: usize,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("unknown algorithm {0:?}; known: {known}", known = ALGORITHM_NAMES.join(", "))]
    Unknown(String),
    #[error("algorithm {name} does not support maximum degree {delta}")]
    UnsupportedDelta { name: String, delta: usize },
}

pub fn by_name(name: &str, params: AlgorithmParams) -> Result<Arc<dyn Algorithm>, RegistryError> {
    let delta = params.delta;
    match name {
        "mfm" => Ok(mfm(delta)),
        "base2" if delta <= 2 => Ok(Arc::new(BaseCase::new(2))),
        "base2" => Err(RegistryError::UnsupportedDelta { name: name.into(), delta }),
        "almost-sat" => Ok(Arc::new(AlmostSaturating::new(delta))),
        "proposal-mm" => Ok(Arc::new(ProposalMm::new(delta))),
        _ => Err(RegistryError::Unknown(name.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_name_resolves() {
        for name in ALGORITHM_NAMES {
            assert!(by_name(name, AlgorithmParams { delta: 2 }).is_ok(), "{name}");
        }
        assert!(matches!(by_name("greedy", AlgorithmParams { delta: 2 }), Err(RegistryError::Unknown(_))));
        assert!(by_name("base2", AlgorithmParams { delta: 3 }).is_err());
    }
}
