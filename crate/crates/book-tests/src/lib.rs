//! Keeps the guide honest: every chapter in `book/src` is included here as
//! documentation, so its code blocks compile and run with the workspace's
//! doc-tests. If an API drifts from the prose, `cargo test` breaks.

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}

    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}

    #[doc = include_str!("../../../book/src/one-time-codes.md")]
    mod one_time_codes {}

    #[doc = include_str!("../../../book/src/trust-and-rate-limits.md")]
    mod trust_and_rate_limits {}

    #[doc = include_str!("../../../book/src/vouchers-and-wire.md")]
    mod vouchers_and_wire {}

    #[doc = include_str!("../../../book/src/relying-party.md")]
    mod relying_party {}

    #[doc = include_str!("../../../book/src/attack-surface.md")]
    mod attack_surface {}

    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
}
