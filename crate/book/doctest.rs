// The book's code samples must not rot. mdbook cannot run them as tests by
// itself, so this file turns the whole book into a Rust crate: each chapter is
// attached, verbatim, as the documentation of an empty module, and
// `cargo test --doc -p risvc-guide` then runs every fenced Rust block exactly
// the way rustdoc runs library examples — same compiler, same `?`-in-examples
// rules, same failure output. One module per chapter keeps a failing test
// attributable to the Markdown file it came from.
//
// Fences that are not Rust (shell transcripts, CSV excerpts, JSON reports)
// use other fence languages (`console`, `text`, `json`) and rustdoc skips
// them automatically, so the book stays free to show program output without
// pretending it compiles.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/system_model.md")]
pub mod system_model {}
#[doc = include_str!("src/special_functions.md")]
pub mod special_functions {}
#[doc = include_str!("src/snr_distributions.md")]
pub mod snr_distributions {}
#[doc = include_str!("src/average_ber.md")]
pub mod average_ber {}
#[doc = include_str!("src/monte_carlo.md")]
pub mod monte_carlo {}
#[doc = include_str!("src/cli.md")]
pub mod cli {}
