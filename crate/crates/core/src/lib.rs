//! Exact computation with determinant sets `D_n(A)`: the set of all
//! determinants of `n x n` matrices whose entries come from a finite set `A`
//! of a prime field or of the integers.
//!
//! * [`ring`] and [`setalg`]: exact arithmetic and the sumset/product-set algebra.
//! * [`matrix`]: determinants (modular and fraction-free) and permanents.
//! * [`gadgets`]: matrices whose determinant is a prescribed sum of products,
//!   witness synthesis and field-coverage certificates.
//! * [`enumerate`]: exhaustive and cofactor-accelerated computation of `D_n(A)`.
//! * [`bounds`]: checkers for the growth inequalities, reported as [`bounds::BoundReport`].
//! * [`cli`]: the `detset` command line front end.
//!
//! ```
//! use detset::enumerate::{dset, EnumBudget};
//! use detset::{ElemSet, Ring};
//!
//! let ring = Ring::prime_field(5)?;
//! let a = ElemSet::from_i64s(ring, &[0, 1]);
//! let d = dset(&a, 2, &EnumBudget::default())?;
//! assert_eq!(d.to_string(), "{0,1,4}");
//! # Ok::<(), detset::Error>(())
//! ```

pub mod bounds;
pub mod cli;
pub mod enumerate;
pub mod error;
pub mod gadgets;
pub mod matrix;
pub mod ring;
pub mod setalg;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use ring::{Elem, Ring, RingKind};
pub use setalg::ElemSet;
