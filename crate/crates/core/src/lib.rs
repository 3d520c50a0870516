//! Constraint Handling Rules embedded as a free algebra of rules.
//!
//! A [`Program`] is built from [`FreeRule`]s whose heads, guard and body are
//! plain host functions, composed with [`compose`]. Programs run under the
//! refined operational semantics ([`refined`]); the very abstract multiset
//! semantics ([`very_abstract`]) and an executor for classical CHR
//! ([`classic`]) serve as independent references. Textual programs are
//! parsed and compiled by [`frontend`].
//!
//! ```
//! use freechr::{frontend, refined, very_abstract::abstract_r, Value};
//!
//! let (_, gcd) = frontend::load("zero @ 0 <=> ; subtract @ N \\ M <=> 0<N, 0<M, N=<M | M-N;").unwrap();
//! let run = refined::run(&gcd, vec![Value::Int(6), Value::Int(9)], 10_000).unwrap();
//! assert_eq!(abstract_r(&run.state).to_string(), "{3}");
//! ```

pub mod classic;
pub mod examples;
pub mod frontend;
pub mod gen;
pub mod program;
pub mod refined;
pub mod terms;
pub mod very_abstract;

pub use program::{
    compose, enumerate, make_rule, unenumerate, EnumProgram, FreeRule, HeadPredicate, Program,
    RuleBody, RuleGuard,
};
pub use terms::{Term, Value};
