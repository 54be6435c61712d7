//! Maximum-likelihood fitting of pattern mixtures and the generative
//! simulator used as a test oracle.

mod em;
mod simulate;

pub use em::{
    e_step, em_fit, log_likelihood, m_step, run_em, EmConfig, EmRun, FitResult, Responsibilities,
    TransitionResponsibility, UserResponsibilities,
};
pub use simulate::{simulate, simulate_population, Simulator};
