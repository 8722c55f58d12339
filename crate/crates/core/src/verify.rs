//! Independent verification oracles.
