//! The interface every decomposable theory implements.

use std::fmt::Debug;
use std::hash::Hash;

use crate::formula::{Conj, Formula, Signature, TheoryTag, Var, Vars};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TheoryError {
    #[error("symbol `{0}` does not belong to the theory")]
    ForeignSymbol(String),
    #[error("bound variables must outrank the free variables")]
    RankOrder,
}

/// The three nested blocks `ex x'. a' & (ex x''. a'' & (ex x'''. a'''))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition<C> {
    pub x_prime: Vec<Var>,
    pub a_prime: C,
    pub x_dprime: Vec<Var>,
    pub a_dprime: C,
    pub x_tprime: Vec<Var>,
    pub a_tprime: C,
}

/// A decomposable theory together with its set `A` of cores.
///
/// Cores are conjunctions of atomic formulas with distinguished `true` and
/// `false` values. All membership tests are syntactic.
pub trait Theory {
    type Core: Clone + Debug + Eq + Ord + Hash + Send + Sync;

    fn tag(&self) -> TheoryTag;
    fn signature(&self) -> &Signature;
    /// Prose description of the set of formulas with infinitely many
    /// solutions used to justify eliminating unconstrained variables.
    fn psi_description(&self) -> &'static str;

    fn flat_to_core(&self, atoms: &Conj) -> Result<Self::Core, TheoryError>;
    fn true_core(&self) -> Self::Core;
    fn false_core(&self) -> Self::Core;
    fn is_true(&self, c: &Self::Core) -> bool;
    fn is_false(&self, c: &Self::Core) -> bool;
    fn conjoin(&self, a: &Self::Core, b: &Self::Core) -> Self::Core;
    /// The solved equivalent of `c` under the variable order, or `false`.
    fn solve(&self, c: &Self::Core) -> Self::Core;
    fn decompose(&self, x: &[Var], c: &Self::Core) -> Result<Decomposition<Self::Core>, TheoryError>;
    fn in_a_prime(&self, x: &[Var], c: &Self::Core) -> bool;
    fn in_a_dprime(&self, x: &[Var], c: &Self::Core) -> bool;
    fn in_a_tprime(&self, x: &[Var], c: &Self::Core) -> bool;

    /// Every variable occurring in `c`, sorted, without duplicates.
    fn core_vars(&self, c: &Self::Core) -> Vec<Var>;
    fn rename(&self, c: &Self::Core, f: &dyn Fn(Var) -> Var) -> Self::Core;
    fn core_formula(&self, c: &Self::Core) -> Formula;
    fn print_core(&self, c: &Self::Core, vars: &Vars) -> String;

    /// Whether the solved core `ctx` entails `ex y. b`. May answer `false`
    /// when unsure. The default succeeds when the decomposition of
    /// `ex y. ctx & b` keeps nothing quantified in its first block, has a
    /// trivial second block, and `ctx` already contains its first block.
    fn entails(&self, ctx: &Self::Core, y: &[Var], b: &Self::Core) -> bool {
        let g = self.solve(&self.conjoin(ctx, b));
        if self.is_false(&g) {
            return false;
        }
        let Ok(d) = self.decompose(y, &g) else { return false };
        d.x_prime.is_empty() && self.is_true(&d.a_dprime) && self.solve(&self.conjoin(ctx, &d.a_prime)) == *ctx
    }
}

impl<C> Decomposition<C> {
    /// The standard decomposition of a `false` core.
    pub fn of_false<T: Theory<Core = C> + ?Sized>(th: &T) -> Self {
        Decomposition {
            x_prime: vec![],
            a_prime: th.false_core(),
            x_dprime: vec![],
            a_dprime: th.true_core(),
            x_tprime: vec![],
            a_tprime: th.true_core(),
        }
    }
}

impl<C: Clone> Decomposition<C> {
    /// Whether the third block is `ex . true`.
    pub fn third_is_trivial<T: Theory<Core = C> + ?Sized>(&self, th: &T) -> bool {
        self.x_tprime.is_empty() && th.is_true(&self.a_tprime)
    }
}

/// Checks that every binder outranks every free variable of `ex x. c`.
pub fn check_rank(x: &[Var], occurring: &[Var]) -> Result<(), TheoryError> {
    let Some(&min_bound) = x.iter().min() else { return Ok(()) };
    match occurring.iter().filter(|v| !x.contains(v)).max() {
        Some(&f) if f > min_bound => Err(TheoryError::RankOrder),
        _ => Ok(()),
    }
}

/// Free variables of `ex x. c`, given the variables occurring in `c`.
pub fn free_of(x: &[Var], occurring: &[Var]) -> Vec<Var> {
    occurring.iter().copied().filter(|v| !x.contains(v)).collect()
}

pub(crate) fn sorted(mut v: Vec<Var>) -> Vec<Var> {
    v.sort();
    v.dedup();
    v
}
