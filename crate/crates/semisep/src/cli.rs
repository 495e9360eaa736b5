//! Command-line front end.

/// Placeholder entry point.
pub fn run() -> i32 {
    0
}
