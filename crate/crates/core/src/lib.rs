//! Discrete coarse index theory on finite windows of quasi-lattices.

pub mod error;
pub mod fit;
pub mod scalar;
pub mod spaces;
pub mod ufchain;
pub mod cochain;
pub mod fill;
pub mod opalg;
pub mod cyclic;
pub mod demo;
pub mod io;
pub mod suite;

pub use error::{Error, Result};
pub use fit::PowerFit;
pub use scalar::{Coefficient, Rational};
pub use spaces::{GrowthFit, Metric, PointId, QuasiLatticeReport, SpaceKind, Window, WindowSpec};
pub use ufchain::UfChain;
pub use cochain::{CoarseCochain, CoboundaryConvention, RoughMap};
pub use fill::{FillingReport, SimplicialChain};
pub use opalg::{BandedOperator, MuProfile};
pub use cyclic::CyclicTensor;
pub use suite::{run_suite, RunReport, SuiteConfig};
