//! Real-time pricing (RTP) feedback loops under integrity attacks on the
//! advertised price.
//!
//! The crate is `no_std` (it needs `alloc`) and has no IO. It contains:
//!
//! - [`models`]: constant-elasticity demand, linear supply, consumer
//!   populations, calibration and least-squares supply fitting;
//! - [`controller`]: the proportional price-stabilisation law (fixed or
//!   adaptive operating point), the direct-feedback baseline and the
//!   demand-slope estimation error bound;
//! - [`attack`]: scaling, delay, scaled-delay and composite price transforms;
//! - [`stability`]: characteristic polynomials of the attacked loop, the Jury
//!   test, a companion-matrix root oracle, stability boundaries and their
//!   `h → ∞` limits (including the exact symbolic reduction for delay attacks);
//! - [`sim`]: the discrete-time closed-loop simulator and its metrics.
//!
//! ```
//! use rtp_core::models::{calibrate_demand_scale, LinearSupply};
//! use rtp_core::stability::{delay_ros_limit, scaling_eta_bar};
//!
//! let supply = LinearSupply::new(152.0, 4503.0).unwrap();
//! let demand = calibrate_demand_scale(&supply, 2000.0, 20.0, -0.8).unwrap();
//! assert!((demand.scale() - 60893.2).abs() < 0.5);
//!
//! // No scaling distortion: the whole gain range is stable.
//! assert_eq!(scaling_eta_bar(1.3, 1.0, 1.0).unwrap(), 1.0);
//! assert_eq!(delay_ros_limit(1.0, 1).unwrap(), 0.5);
//! ```
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod attack;
pub mod controller;
mod error;
pub mod models;
pub mod sim;
pub mod stability;

pub use error::{Error, Result};
