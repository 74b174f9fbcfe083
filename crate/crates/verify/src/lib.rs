//! Holds the `acceptance` test target (`cargo test -p cliffordian-verify`).
//! It lives in its own package so it runs after the unit and integration
//! tests of the library and the command-line crate.
