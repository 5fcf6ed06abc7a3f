//! Benchmark environments and validation oracles.

pub mod boolean;
pub mod grid;
pub mod oracle;

pub use boolean::{majority_value, multiplexer_value, BooleanFunction, BooleanProblem};
pub use grid::{parse_grid, Cell, Grid, Position};
pub use oracle::{maximally_general_pairs, optimal_population, OraclePair};
