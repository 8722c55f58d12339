//! Block-coordinate descent driver.
