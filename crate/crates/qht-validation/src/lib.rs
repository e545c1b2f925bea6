//! Acceptance suite for `qht-core` and `qht`.
//!
//! The library is empty; run the suite with
//! `cargo test -p qht-validation --test acceptance`.

#![no_std]
