//! Dense tensors and the Einstein-product algebra on grouped indices.
//!
//! Storage is row-major over the full index list: within any index group the
//! first index varies slowest and the last fastest. Flattening a tensor over
//! a [`GroupSplit`] is therefore a pure reshape, and the Einstein product
//! over a group corresponds exactly to a matrix product of the flattened
//! operands. That isomorphism is the computational backbone of the crate and
//! is pinned by tests against a definition-sum oracle.
//!
//! All operations are pure functions over immutable inputs; tensors are
//! plain `Vec`-backed values, safe to share and send across threads.

mod dense;
mod square;

pub use dense::{stack_slices, DenseTensor, GroupSplit};
pub use square::SquareEvenTensor;
