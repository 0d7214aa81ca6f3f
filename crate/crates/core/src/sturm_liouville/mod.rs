//! Operators on a box, uniform grids, the finite-difference matrix and its oracles.

pub mod assemble;
pub mod coefficients;
pub mod grid;
pub mod oracle;
pub mod spec_json;

pub use assemble::{apply_fd_operator, assemble_fd_matrix, FDMatrix};
pub use coefficients::{CoefficientField, FnCoefficients, OperatorSpec, PolynomialCoefficients};
pub use grid::{flatten_index, grid_norm, sample_function, unflatten_index, DomainBox, GridVector, UniformGrid};
pub use oracle::{col_oracle, entry_oracle, row_oracle};
pub use spec_json::{load_operator_spec, parse_operator_spec};
