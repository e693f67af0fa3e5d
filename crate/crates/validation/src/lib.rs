//! Holds the `acceptance` test target: full-scale sweeps checked against the
//! behaviour the model is expected to show. Run with
//! `cargo test -p spiral-validation`.
