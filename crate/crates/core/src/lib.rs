//! Decide whether two finite relational structures agree on all first-order sentences of
//! bounded quantifier rank.
//!
//! Two independent formulations are provided: the static back-and-forth refinement
//! ([`backforth`]) and the Ehrenfeucht game ([`game`]). When the structures are separated,
//! [`fo::distinguishing_sentence`] produces a witnessing sentence. The [`server`] and [`cli`]
//! modules expose all of this over HTTP and the command line.
//!
//! ```
//! use efgame::{backforth, fo, Structure};
//!
//! let l3 = Structure::linear_order(3).unwrap();
//! let l7 = Structure::linear_order(7).unwrap();
//! assert!(backforth::n_equivalent(&l3, &l7, 2).unwrap());
//! assert_eq!(backforth::separation_level(&l3, &l7, 5).unwrap(), Some(3));
//!
//! let phi = fo::distinguishing_sentence(&l7, &l3, 3).unwrap().unwrap();
//! assert!(phi.holds_in(&l7).unwrap() && !phi.holds_in(&l3).unwrap());
//! ```

pub mod backforth;
pub mod cli;
pub mod error;
pub mod fo;
pub mod game;
pub mod server;
pub mod structures;

pub use error::{Error, ParseError, ParseErrorKind};
pub use fo::{Formula, Sentence, Var};
pub use game::{GameOutcome, GamePosition, GameSolver, Move, Player, Side};
pub use structures::{parse_structure, PartialMap, Signature, Structure};
