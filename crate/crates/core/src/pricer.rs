//! Pricers (in progress).
