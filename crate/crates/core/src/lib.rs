//! Optimal reactive power dispatch (ORPD) on IEEE benchmark networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`netmodel`] parses MATPOWER-style case files into an immutable
//!   [`NetworkCase`] and ships the IEEE 14/57/118-bus cases.
//! - [`powerflow`] builds the bus admittance matrix and solves the AC power
//!   flow with a polar Newton-Raphson method.
//! - [`orpd`] maps a control vector (generator voltages, transformer taps,
//!   shunt compensators) to a penalised scalar fitness for one of three
//!   objectives: active loss, total voltage deviation or the L-index.
//! - [`bbbat`] is a bound-constrained bat-algorithm minimiser with the
//!   standard, Gaussian bare-bones and dynamic-exploitation variants.
//! - [`bench`] runs multi-seed campaigns and writes CSV/JSON reports.
//!
//! ```no_run
//! use orpd_core::bbbat::{OptimizerConfig, Variant};
//! use orpd_core::netmodel::{embedded_case, EmbeddedCase};
//! use orpd_core::orpd::{Evaluator, ObjectiveKind, PenaltyConfig};
//!
//! let case = embedded_case(EmbeddedCase::Ieee14);
//! let evaluator = Evaluator::new(&case, ObjectiveKind::ActiveLoss, PenaltyConfig::default());
//! let config = OptimizerConfig::new(Variant::Degbbba, 120, 100).with_seed(7);
//! let result = orpd_core::bbbat::run(|x: &[f64]| evaluator.fitness(x), evaluator.bounds(), &config).unwrap();
//! println!("best loss {:.4} MW", result.best_fitness);
//! ```

pub mod bbbat;
pub mod bench;
pub mod bounds;
pub mod netmodel;
pub mod orpd;
pub mod powerflow;

pub use bounds::Bounds;
pub use netmodel::NetworkCase;
