//! Hierarchic supersymmetric factorization of the trigonometric
//! Pöschl-Teller Hamiltonian.

// `!(x > 0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod scalar;

pub mod coherent;
pub mod jet;
pub mod operators;
pub mod quadrature;
pub mod specfun;
pub mod spectrum;
mod trig;
pub mod wavefn;

pub use error::{Error, Result};
pub use jet::Jet;
pub use scalar::{Cplx, Real};

pub type Params = spectrum::ModelParams<f64>;
pub type Params32 = spectrum::ModelParams<f32>;
pub type State = wavefn::EigenFunction<f64>;
pub type State32 = wavefn::EigenFunction<f32>;
pub type Coherent = coherent::CoherentState<f64>;
pub type Coherent32 = coherent::CoherentState<f32>;
pub type LadderOps = operators::Ladder<f64>;
pub type LadderOps32 = operators::Ladder<f32>;
