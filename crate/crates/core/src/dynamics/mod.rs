//! Placeholder; spectral evolution lands here.
