//! Acceptance suite for `hls-stab`; the checks live in `tests/acceptance.rs`.
