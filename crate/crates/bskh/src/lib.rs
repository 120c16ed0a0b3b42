//! Exact-arithmetic Khovanov and Batson-Seed homology for weighted links and
//! tangles, together with the chain maps induced by link cobordism movies.
//!
//! The library is organized bottom-up:
//!
//! * [`coeff`] — exact coefficient rings (integers, rationals, prime fields);
//! * [`linalg`] — dense exact linear algebra: Smith normal form over the
//!   integers, Gaussian elimination over fields, integer linear solving;
//! * [`diagram`] — planar tangle diagrams: parsing, validation, orientation,
//!   checkerboard shading and sign assignments, resolutions;
//! * [`cobcat`] — the dotted cobordism category: normal-form morphisms
//!   between crossingless tangles, composition, planar composition, degree;
//! * [`ckom`] — curved complexes of cobordisms: cube construction, sign
//!   sprinkling, planar gluing, curvature, chain maps, filtration, Gaussian
//!   simplification;
//! * [`bs`] — the Batson-Seed curved complex of a weighted, shaded tangle;
//! * [`tqft`] — the Khovanov TQFT functor, homology, induced maps, the
//!   homotopy solver, spectral-sequence pages, Khovanov-Jacobsson numbers;
//! * [`moves`] — Reidemeister and elementary-cobordism chain maps, movies,
//!   crossing changes, and the sep/split movie transformations;
//! * [`verify`] — the runnable property suites behind `bskh verify`.
//!
//! All arithmetic is exact; there is no floating point anywhere.

pub mod bs;
pub mod ckom;
pub mod cobcat;
pub mod coeff;
pub mod diagram;
pub mod error;
pub mod linalg;
pub mod maps;
pub mod moves;
pub mod tqft;
pub mod verify;

pub use error::Error;
