//! Placeholder; resonant integral operator lands here.
