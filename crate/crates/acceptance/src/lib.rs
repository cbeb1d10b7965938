//! Test-only package: the acceptance suite lives in `tests/acceptance.rs`
//! and is run by `cargo test -p wplqng-acceptance`.
