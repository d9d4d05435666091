use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not diagonal (max off-diagonal magnitude {max_offdiag:e})")]
    NonDiagonalInput { max_offdiag: f64 },

    #[error("negative diagonal entry {value:e}")]
    NegativeDiagonal { value: f64 },

    #[error("matrix is not Hermitian (max violation {violation:e})")]
    NotHermitian { violation: f64 },

    #[error("trace differs from one by {violation:e}")]
    TraceNotOne { violation: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {violation:e})")]
    NotPsd { violation: f64 },

    #[error("state is not diagonal in the energy basis (max off-diagonal magnitude {max_offdiag:e})")]
    NonDiagonalState { max_offdiag: f64 },

    #[error("population too small to define an inverse temperature (rho_00={ground:e}, rho_11={excited:e})")]
    DegeneratePopulation { ground: f64, excited: f64 },

    #[error("invalid parameter {name}={value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("postselection probability {prob:e} below cutoff (Theta={measure_theta}, Phi={measure_phi})")]
    ZeroProbabilityPostselection {
        prob: f64,
        measure_theta: f64,
        measure_phi: f64,
    },

    #[error("degenerate closed-form denominator {denominator:e} (Theta={measure_theta}, Phi={measure_phi})")]
    DegenerateDenominator {
        denominator: f64,
        measure_theta: f64,
        measure_phi: f64,
    },

    #[error("no measurement direction has success probability above {min_prob:e}")]
    NoFeasiblePoint { min_prob: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

impl Error {
    /// True for errors that stem from the physics (an outcome that cannot
    /// occur, an undefined temperature) rather than from malformed input.
    pub fn is_physical_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::ZeroProbabilityPostselection { .. }
                | Error::DegenerateDenominator { .. }
                | Error::DegeneratePopulation { .. }
                | Error::NoFeasiblePoint { .. }
        )
    }
}
