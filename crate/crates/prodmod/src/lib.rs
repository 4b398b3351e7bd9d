//! Decision engine for the local consequence relations of crisp and valued
//! modal product logic over the standard algebra [0,1].
//!
//! The pipeline reduces a modal entailment question to finitely many
//! propositional consequence checks in product logic with Delta, one per
//! coherent (crisp) or simple (valued) set of witness sequences. Counter
//! valuations are exact, independently re-verified, and turned back into
//! symbolic Kripke countermodels whose truth lemma is checked mechanically.

pub mod countermodel;
pub mod decision;
pub mod pisolver;
pub mod reduction;
pub mod report;
pub mod semantics;
pub mod sequences;
pub mod syntax;
