//! Monte-Carlo experiment harnesses.
