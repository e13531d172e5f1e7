//! Placeholder for the guide doc-tests.
