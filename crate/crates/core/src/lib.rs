//! Learn string transformations from input/output examples, where a
//! transformation may combine substrings of its inputs, constant text and
//! lookups in relational tables.
//!
//! The usual entry point is [`synth::synthesize`], which takes an
//! [`synth::ExampleSet`] and a [`table::TableCatalog`] and returns the learned
//! version space with its best programs; [`synth::apply`] runs them on new
//! rows. The lower layers are exposed too: [`generate`] builds the version
//! space of one example, [`intersect`] combines two, [`denote`] counts,
//! enumerates and samples their programs, and [`rank`] extracts the best.
//!
//! ```
//! use std::sync::Arc;
//! use semfill::synth::{apply, synthesize, ExampleSet, SynthOptions};
//! use semfill::table::{InputState, TableCatalog};
//!
//! let examples = ExampleSet::from_pairs([(InputState::new(["Alan Turing"]), "Turing A")])?;
//! let result = synthesize(&examples, &Arc::new(TableCatalog::new()), &SynthOptions::default())?;
//! let rows = [InputState::new(["Grace Hopper"])];
//! assert_eq!(apply(&result, &rows)[0].prediction(), Some("Hopper G"));
//! # Ok::<(), semfill::error::SynthesisError>(())
//! ```

pub mod bench;
pub mod denote;
pub mod error;
pub mod expr;
pub mod generate;
pub mod intersect;
pub mod json;
pub mod oracle;
pub mod position;
pub mod program;
pub mod rank;
pub mod space;
pub mod stdlib;
pub mod syntax;
pub mod synth;
pub mod table;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tables.md")]
    mod tables {}
    #[doc = include_str!("../../../book/src/substrings.md")]
    mod substrings {}
    #[doc = include_str!("../../../book/src/lookups.md")]
    mod lookups {}
    #[doc = include_str!("../../../book/src/combined.md")]
    mod combined {}
    #[doc = include_str!("../../../book/src/ranking.md")]
    mod ranking {}
    #[doc = include_str!("../../../book/src/learning.md")]
    mod learning {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
    #[doc = include_str!("../../../book/src/http-api.md")]
    mod http_api {}
}
