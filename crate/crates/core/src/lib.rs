//! Resonance analysis for two-degree-of-freedom separable Hamiltonians confined to
//! rectilinear polygons: oscillation periods, rescaled billiard tables, saddle
//! connections, integer relations and a reference flow integrator.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::type_complexity,
    clippy::needless_range_loop
)]

pub mod billiard;
pub mod constructor;
pub mod periods;
pub mod poly;
pub mod polygon;
pub mod potential;
pub mod quadrature;
pub mod quasiperiodic;
pub mod relation;
pub mod resonance;
pub mod simulate;
pub mod svg;
