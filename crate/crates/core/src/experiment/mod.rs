//! Reproduction harness: corpus ingestion, sweeps over the window radius and
//! the estimator variants, and CSV output.

mod corpus;
mod csv;
mod settings;
mod sweep;

pub use self::csv::{emit_csv, format_number, parse_csv, to_csv_string, CsvRecord};
pub use corpus::{ingest_corpus, Corpus, NamedImage, SkippedFile};
pub use settings::{parse_d_values, Settings};
pub use sweep::{
    run_decomposition_sweep, run_decomposition_sweep_on, run_regularity, run_regularity_on,
    run_sweep, run_sweep_on, CurveRow, HRule, SweepSpec, Variant, STANDARD_VARIANTS,
};
