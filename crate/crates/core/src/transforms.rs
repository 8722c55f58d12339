//! Convexified constraint builders.
