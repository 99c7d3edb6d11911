//! Seeded randomized property suites over the named pages.
//!
//! Placeholder; suites land once all families build.
