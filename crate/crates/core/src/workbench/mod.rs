//! Instance generation, file formats and flat reports.

pub mod generate;
pub mod io;
pub mod report;
pub mod verify;

pub use generate::{generate, GeneratorError, GeneratorSpec, ProfilePreset};
pub use io::{load_instance, load_schedule, parse_instance, save_instance, save_schedule, FormatError};
pub use report::Report;
