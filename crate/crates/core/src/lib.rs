//! McEliece-type public-key encryption over expanded Gabidulin codes.
//!
//! The crate is organised bottom-up:
//!
//! - [`gf`]: `F_q`, `F_{q^m}`, Frobenius, trace, dual bases and the coordinate
//!   maps `φ_B` / `Φ_B`.
//! - [`matq`]: dense linear algebra over both fields and Gaussian binomials.
//! - [`gabidulin`]: Gabidulin codes and a rank-error decoder.
//! - [`expand`]: expanded codes over `F_q` and their decoder.
//! - [`pke`]: the two encryption schemes and their file format.
//! - [`analysis`]: twisted Frobenius powers, the distinguisher, the MinRank
//!   reduction and the attack-cost / key-size estimator.

pub mod analysis;
pub mod expand;
pub mod gabidulin;
pub mod gf;
pub mod matq;
pub mod pke;

pub use gf::{ExtElem, ExtField, Field, PrimeField};
pub use matq::{Matrix, MatrixQ, MatrixQm};
