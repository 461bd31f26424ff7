//! Cursor-driven API documentation and example lookup for PHP code.
//!
//! Given a source buffer and a cursor position, the engine works out which
//! API the programmer is looking at or typing, then returns that API's
//! structured documentation and a ranked list of code examples that call
//! it. A keyword search over the same example corpus covers task-oriented
//! lookups ("read file").
//!
//! ```
//! use apiglance_core::docs::ingest_docs;
//! use apiglance_core::examples::{ExampleIndex, ExampleSource};
//! use apiglance_core::intent::Mode;
//! use apiglance_core::service::{Engine, ResolveRequest};
//! use apiglance_core::Config;
//!
//! let docs = r#"{"name":"count","signature":"int count($value)"}"#;
//! let (catalog, _) = ingest_docs(docs.as_bytes()).unwrap();
//! let index = ExampleIndex::build(
//!     [ExampleSource {
//!         id: "ex-1".into(),
//!         title: "Count friends".into(),
//!         source: "<?php echo count($friends);".into(),
//!         source_url: String::new(),
//!     }],
//!     Default::default(),
//! )
//! .unwrap();
//! let engine = Engine::new(catalog, index, Config::default());
//!
//! let result = engine
//!     .handle_resolve(&ResolveRequest {
//!         source: "<?php\n$n = count($friends);\n".into(),
//!         line: 2,
//!         col: 8,
//!         mode: Mode::Reading,
//!     })
//!     .unwrap();
//! assert_eq!(result.intent.exact_api(), Some("count"));
//! assert_eq!(result.doc.unwrap().signature, "int count($value)");
//! assert_eq!(result.examples[0].example.id, "ex-1");
//! ```
//!
//! The guide in `book/` walks through each stage; its code blocks run as
//! doctests of this crate.

pub mod config;
pub mod docs;
pub mod examples;
pub mod harness;
pub mod intent;
pub mod lexer;
pub mod service;
pub mod store;
pub mod synthetic;

pub use config::{Config, RankingConfig};
pub use docs::{ApiDocEntry, DocCatalog};
pub use examples::{CodeExample, ExampleIndex, RankedExample, Score};
pub use intent::{CursorContext, IntentKind, Mode, ResolvedIntent};
pub use service::{Engine, EngineHandle, QueryResult};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lexing.md")]
    mod lexing {}
    #[doc = include_str!("../../../book/src/intent.md")]
    mod intent {}
    #[doc = include_str!("../../../book/src/documentation.md")]
    mod documentation {}
    #[doc = include_str!("../../../book/src/ranking.md")]
    mod ranking {}
    #[doc = include_str!("../../../book/src/service.md")]
    mod service {}
    #[doc = include_str!("../../../book/src/replay.md")]
    mod replay {}
}
