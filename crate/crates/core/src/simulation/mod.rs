//! Monte Carlo harness for the null and linear-trend designs: data
//! generation, replicated estimation, and table summaries.

mod config;
mod dgp;
mod output;
mod runner;
mod summary;

pub use config::{SimConfig, TREND_SLOPE};
pub use dgp::{generate_cells, generate_dgp, generate_panel, population_beta};
pub use output::{write_csv, write_json};
pub use runner::{replicate, run_table, table_k_range, RepRecord, TableId, TnDraw};
pub use summary::{median, summarize_row, SimTableRow, Truth, MIN_ACCEPTED_REPS};
