//! Path samplers (in progress).
