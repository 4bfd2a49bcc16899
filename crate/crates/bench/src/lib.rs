//! Empty by design: this crate exists to host the criterion bench targets.
