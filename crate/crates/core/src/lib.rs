//! Invariants of spatial surfaces and handlebody-knots presented by diagrams
//! of spatial trivalent graphs.
//!
//! * [`algebra`]: finite racks, quandles, multiple group racks (MGRs) and
//!   multiple conjugation quandles (MCQs), with exhaustive axiom checking.
//! * [`diagram`]: Y-oriented diagrams in a slot model, the `.sgd` format,
//!   edge reversal, Y-orientation enumeration and ribbon-surface statistics.
//! * [`coloring`]: counting and enumerating colorings by a rack or MGR.
//! * [`moves`]: Reidemeister moves R1–R6 as local rewrites.
//! * [`seifert`]: minor-gcd profiles and unimodular congruence of integer matrices.
//! * [`family`]: generators for the distinguishing pairs `D_n`, `D_n'` and a test corpus.

pub mod algebra;
pub mod coloring;
pub mod diagram;
pub mod family;
pub mod moves;
pub mod seifert;

pub use algebra::{AlgebraError, AxiomReport, Elem, FiniteMgr, FiniteRack, GroupTable};
pub use coloring::{Coloring, ColoringError};
pub use diagram::{Crossing, Diagram, DiagramError, Dir, Sign, SurfaceStats, Vertex};
pub use seifert::{GcdProfile, IntMatrix, SeifertError};
