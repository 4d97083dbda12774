//! Command-line workbench around the `saddlesmith` library.

pub mod commands;
pub mod exit;
pub mod payload;
pub mod verify;
