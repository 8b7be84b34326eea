//! Generalized Riemann problem for 2-D isothermal Euler flow.
//!
//! Exact 1-D Riemann solver, a first-order Godunov simulator for plane
//! two-shock fans with compactly supported perturbations, the weighted
//! functionals whose ODE system forces blow-up, Riccati comparison
//! lifespans, and the 3-D test function `F(y) = ∫_{|ω|=1} e^{y·ω} dσ`.

pub mod config;
pub mod error;
pub mod euler2d;
pub mod experiment;
pub mod functionals;
pub mod lifespan;
pub mod riemann;
pub mod testfn3d;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/riemann.md")]
    mod riemann {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/functionals.md")]
    mod functionals {}
    #[doc = include_str!("../../../book/src/lifespan.md")]
    mod lifespan {}
    #[doc = include_str!("../../../book/src/test-function.md")]
    mod test_function {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
