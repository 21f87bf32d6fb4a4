//! Seeded random formulas for cross-checking the solver against the oracles
//! and for the structural invariant runs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::formula::{Formula, Signature, Sym, Term, TheoryTag, Var, Vars};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenConfig {
    /// Upper bound on [`Formula::size`].
    pub max_size: usize,
    pub max_qdepth: usize,
    /// Upper bound on the number of quantified variables, which keeps the
    /// finite-domain oracle cheap.
    pub max_bound: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_size: 40, max_qdepth: 4, max_bound: 6 }
    }
}

/// The small trees signature used by random tests: `a/0, g/1, f/2`.
pub fn trees_test_signature() -> Signature {
    Signature::trees(&[("a", 0), ("g", 1), ("f", 2)])
}

struct Gen<'a> {
    sig: &'a Signature,
    rng: &'a mut ChaCha8Rng,
    vars: &'a mut Vars,
    cfg: GenConfig,
    bound: usize,
}

impl Gen<'_> {
    fn sym(&self, name: &str) -> Sym {
        self.sig.function(name).expect("symbol of the theory")
    }

    fn var_term(&mut self, scope: &[Var]) -> Option<Term> {
        scope.choose(self.rng).map(|&v| Term::Var(v))
    }

    fn ra_summand(&mut self, scope: &[Var]) -> Term {
        let one = Term::app(self.sym("1"), vec![]);
        match self.rng.gen_range(0..6) {
            0 => Term::app(self.sym("0"), vec![]),
            1 => one,
            2 => match self.var_term(scope) {
                Some(t) => Term::app(self.sym("-"), vec![t]),
                None => Term::app(self.sym("-"), vec![one]),
            },
            _ => self.var_term(scope).unwrap_or(one),
        }
    }

    fn ra_side(&mut self, scope: &[Var]) -> Term {
        let mut t = self.ra_summand(scope);
        for _ in 0..self.rng.gen_range(0..2) {
            let s = self.ra_summand(scope);
            t = Term::app(self.sym("+"), vec![t, s]);
        }
        t
    }

    fn tree_term(&mut self, scope: &[Var], depth: usize) -> Term {
        let leaf = |g: &mut Self| match g.var_term(scope) {
            Some(t) if g.rng.gen_bool(0.8) => t,
            _ => {
                let consts: Vec<Sym> = (0..g.sig.functions.len() as u32).map(Sym).filter(|&s| g.sig.fun(s).arity == 0).collect();
                Term::app(*consts.choose(g.rng).expect("a constant"), vec![])
            }
        };
        if depth == 0 || self.rng.gen_bool(0.5) {
            return leaf(self);
        }
        let funs: Vec<Sym> = (0..self.sig.functions.len() as u32).map(Sym).filter(|&s| self.sig.fun(s).arity > 0).collect();
        let f = *funs.choose(self.rng).expect("a function symbol");
        let args = (0..self.sig.fun(f).arity).map(|_| self.tree_term(scope, depth - 1)).collect();
        Term::app(f, args)
    }

    fn atom(&mut self, scope: &[Var]) -> Formula {
        match self.sig.tag {
            TheoryTag::Eq => match (self.var_term(scope), self.var_term(scope)) {
                (Some(a), Some(b)) => Formula::Eq(a, b),
                _ => {
                    if self.rng.gen() {
                        Formula::True
                    } else {
                        Formula::False
                    }
                }
            },
            TheoryTag::Ra => Formula::Eq(self.ra_side(scope), self.ra_side(scope)),
            TheoryTag::Trees => match self.var_term(scope) {
                Some(x) => Formula::Eq(x, self.tree_term(scope, 2)),
                None => Formula::Eq(self.tree_term(scope, 1), self.tree_term(scope, 1)),
            },
        }
    }

    fn formula(&mut self, scope: &mut Vec<Var>, budget: usize, qdepth: usize) -> Formula {
        let can_quantify = qdepth < self.cfg.max_qdepth && self.bound < self.cfg.max_bound && budget >= 4;
        if budget < 4 || self.rng.gen_bool(0.15) {
            return self.atom(scope);
        }
        let quantify = can_quantify && (scope.is_empty() || self.rng.gen_bool(0.3));
        if quantify {
            let n = if self.bound + 2 <= self.cfg.max_bound && self.rng.gen_bool(0.3) { 2 } else { 1 };
            let vs: Vec<Var> = (0..n).map(|_| self.vars.fresh("v")).collect();
            self.bound += n;
            scope.extend(&vs);
            let body = self.formula(scope, budget - 1, qdepth + 1);
            scope.truncate(scope.len() - n);
            return if self.rng.gen() { Formula::exists(vs, body) } else { Formula::forall(vs, body) };
        }
        match self.rng.gen_range(0..10) {
            0..=1 => Formula::not(self.formula(scope, budget - 1, qdepth)),
            k => {
                let left = self.rng.gen_range(1..budget - 1);
                let a = self.formula(scope, left, qdepth);
                let b = self.formula(scope, budget - 1 - left, qdepth);
                match k {
                    2..=4 => Formula::and(a, b),
                    5..=7 => Formula::or(a, b),
                    8 => Formula::implies(a, b),
                    _ => Formula::iff(a, b),
                }
            }
        }
    }
}

/// A random formula whose free variables are among `free`, within the size
/// and quantifier limits of `cfg`.
pub fn random_formula(sig: &Signature, vars: &mut Vars, rng: &mut ChaCha8Rng, cfg: GenConfig, free: &[Var]) -> Formula {
    loop {
        let budget = rng.gen_range(cfg.max_size / 4..=cfg.max_size);
        let mut g = Gen { sig, rng: &mut *rng, vars: &mut *vars, cfg, bound: 0 };
        let f = g.formula(&mut free.to_vec(), budget, 0);
        if f.size() <= cfg.max_size && f.quantifier_depth() <= cfg.max_qdepth {
            return f;
        }
    }
}

/// A random sentence within the limits of `cfg`.
pub fn random_sentence(sig: &Signature, vars: &mut Vars, rng: &mut ChaCha8Rng, cfg: GenConfig) -> Formula {
    random_formula(sig, vars, rng, cfg, &[])
}
