//! C interface (work in progress).
