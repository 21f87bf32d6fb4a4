//! Finite or infinite trees: unification without occurs check, reachability
//! and the decomposition that splits off unreachable equations.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use crate::formula::{Conj, FlatAtom, Formula, Signature, Sym, Term, TheoryTag, Var, Vars};
use crate::theory::{check_rank, sorted, Decomposition, Theory, TheoryError};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rhs {
    Var(Var),
    App(Sym, Vec<Var>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeEq {
    pub lhs: Var,
    pub rhs: Rhs,
}

impl TreeEq {
    pub fn var(lhs: Var, rhs: Var) -> TreeEq {
        TreeEq { lhs, rhs: Rhs::Var(rhs) }
    }

    pub fn app(lhs: Var, f: Sym, args: Vec<Var>) -> TreeEq {
        TreeEq { lhs, rhs: Rhs::App(f, args) }
    }

    fn rhs_vars(&self) -> &[Var] {
        match &self.rhs {
            Rhs::Var(v) => std::slice::from_ref(v),
            Rhs::App(_, a) => a,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TreeCore {
    False,
    /// Sorted, without duplicates. Empty means `true`.
    Eqs(Vec<TreeEq>),
}

impl TreeCore {
    pub fn new(mut eqs: Vec<TreeEq>) -> TreeCore {
        eqs.sort();
        eqs.dedup();
        TreeCore::Eqs(eqs)
    }
}

/// Variables and equations reachable from the free variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reachability {
    pub vars: Vec<Var>,
    /// Indices into the equation list.
    pub eqs: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct TreesTheory {
    sig: Signature,
}

impl TreesTheory {
    pub fn new(sig: Signature) -> Self {
        TreesTheory { sig }
    }
}

/// Unifies a conjunction of flat equations.
///
/// Equations are kept in a map from left-hand side to right-hand side. When
/// two applications of the same symbol meet, the one with the greater
/// argument vector stays and the arguments are equated pairwise; a variable
/// bound to two variables keeps the smaller one.
pub fn unify(eqs: &[TreeEq]) -> TreeCore {
    let mut binding: BTreeMap<Var, Rhs> = BTreeMap::new();
    let mut work: VecDeque<TreeEq> = eqs.iter().cloned().collect();
    while let Some(TreeEq { lhs, rhs }) = work.pop_front() {
        let (x, rhs) = match rhs {
            Rhs::Var(y) if y == lhs => continue,
            Rhs::Var(y) if y > lhs => (y, Rhs::Var(lhs)),
            r => (lhs, r),
        };
        let Some(old) = binding.get(&x).cloned() else {
            binding.insert(x, rhs);
            continue;
        };
        match (old, rhs) {
            (Rhs::Var(y), Rhs::Var(z)) => {
                let (lo, hi) = if y < z { (y, z) } else { (z, y) };
                binding.insert(x, Rhs::Var(lo));
                work.push_back(TreeEq::var(hi, lo));
            }
            (Rhs::Var(y), app @ Rhs::App(..)) | (app @ Rhs::App(..), Rhs::Var(y)) => {
                binding.insert(x, Rhs::Var(y));
                work.push_back(TreeEq { lhs: y, rhs: app });
            }
            (Rhs::App(f, a), Rhs::App(g, b)) => {
                if f != g || a.len() != b.len() {
                    return TreeCore::False;
                }
                let keep = if a >= b { a.clone() } else { b.clone() };
                for (p, q) in a.iter().zip(&b) {
                    if p != q {
                        work.push_back(TreeEq::var(*p, *q));
                    }
                }
                binding.insert(x, Rhs::App(f, keep));
            }
        }
    }
    TreeCore::new(binding.into_iter().map(|(lhs, rhs)| TreeEq { lhs, rhs }).collect())
}

/// Solved: distinct left-hand sides, no `x = x`, no `y = x` with `x > y`.
pub fn is_solved(eqs: &[TreeEq]) -> bool {
    let mut lhs: Vec<Var> = eqs.iter().map(|e| e.lhs).collect();
    lhs.sort();
    lhs.windows(2).all(|w| w[0] != w[1])
        && eqs.iter().all(|e| match e.rhs {
            Rhs::Var(y) => e.lhs > y,
            Rhs::App(..) => true,
        })
}

/// Least set of equations and variables reachable from the variables not
/// in `x`: an equation is reachable when its left-hand side is free or
/// reachable, and the variables of its right-hand side are then reachable.
pub fn reachable(x: &[Var], eqs: &[TreeEq]) -> Reachability {
    let mut vars: HashSet<Var> = HashSet::new();
    let mut taken = vec![false; eqs.len()];
    let mut queue: VecDeque<usize> = (0..eqs.len()).filter(|&i| !x.contains(&eqs[i].lhs)).collect();
    queue.iter().for_each(|&i| taken[i] = true);
    while let Some(i) = queue.pop_front() {
        for &v in eqs[i].rhs_vars() {
            if vars.insert(v) {
                for (j, e) in eqs.iter().enumerate() {
                    if !taken[j] && e.lhs == v {
                        taken[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    Reachability { vars: sorted(vars.into_iter().collect()), eqs: (0..eqs.len()).filter(|&i| taken[i]).collect() }
}

/// Solves `c` and computes reachability; `None` for a false core.
pub fn tree_reachable(x: &[Var], c: &TreeCore) -> Option<Reachability> {
    match c {
        TreeCore::False => None,
        TreeCore::Eqs(e) => Some(reachable(x, e)),
    }
}

/// Union-find over variables and application nodes used by the entailment
/// check. A class is anchored when it holds a variable of the context; two
/// anchored classes never merge and an anchored class without a head never
/// gains one, since either would add information to the context.
struct Classes {
    parent: Vec<usize>,
    head: Vec<Option<(Sym, Vec<usize>)>>,
    anchored: Vec<bool>,
    ids: HashMap<Var, usize>,
    strict: bool,
}

impl Classes {
    fn node(&mut self, head: Option<(Sym, Vec<usize>)>, anchored: bool) -> usize {
        self.parent.push(self.parent.len());
        self.head.push(head);
        self.anchored.push(anchored);
        self.parent.len() - 1
    }

    fn var(&mut self, v: Var, anchored: bool) -> usize {
        if let Some(&i) = self.ids.get(&v) {
            return i;
        }
        let i = self.node(None, anchored);
        self.ids.insert(v, i);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Merges two classes with their subterms; `false` on a clash or, in
    /// strict mode, on new information about anchored classes.
    fn merge(&mut self, a: usize, b: usize) -> bool {
        let mut work = vec![(a, b)];
        while let Some((a, b)) = work.pop() {
            let (a, b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            if self.strict {
                let (ha, hb) = (self.head[a].is_some(), self.head[b].is_some());
                if self.anchored[a] && self.anchored[b] || self.anchored[a] && !ha && hb || self.anchored[b] && !hb && ha {
                    return false;
                }
            }
            match (self.head[a].clone(), self.head[b].clone()) {
                (Some((f, x)), Some((g, y))) => {
                    if f != g || x.len() != y.len() {
                        return false;
                    }
                    work.extend(x.into_iter().zip(y));
                }
                (None, Some(h)) => self.head[a] = Some(h),
                _ => {}
            }
            self.parent[b] = a;
            self.anchored[a] |= self.anchored[b];
        }
        true
    }

    fn add(&mut self, e: &TreeEq, anchored: &dyn Fn(Var) -> bool) -> bool {
        let l = self.var(e.lhs, anchored(e.lhs));
        let r = match &e.rhs {
            Rhs::Var(v) => self.var(*v, anchored(*v)),
            Rhs::App(f, args) => {
                let args = args.iter().map(|&v| self.var(v, anchored(v))).collect();
                self.node(Some((*f, args)), false)
            }
        };
        self.merge(l, r)
    }
}

impl Theory for TreesTheory {
    type Core = TreeCore;

    fn tag(&self) -> TheoryTag {
        TheoryTag::Trees
    }

    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn psi_description(&self) -> &'static str {
        "formulas ex y. u = f(y) with f a non-constant function symbol, read over an infinite set of symbols"
    }

    fn flat_to_core(&self, atoms: &Conj) -> Result<TreeCore, TheoryError> {
        let mut eqs = Vec::new();
        for a in &atoms.0 {
            match a {
                FlatAtom::True => {}
                FlatAtom::False => return Ok(TreeCore::False),
                FlatAtom::EqVar(x, y) => eqs.push(TreeEq::var(*x, *y)),
                FlatAtom::EqApp(x, f, ys) => {
                    if f.0 as usize >= self.sig.functions.len() || self.sig.fun(*f).arity != ys.len() {
                        return Err(TheoryError::ForeignSymbol(format!("function #{}", f.0)));
                    }
                    eqs.push(TreeEq::app(*x, *f, ys.clone()))
                }
                FlatAtom::Rel(r, _) => return Err(TheoryError::ForeignSymbol(format!("relation #{}", r.0))),
            }
        }
        Ok(TreeCore::new(eqs))
    }

    fn true_core(&self) -> TreeCore {
        TreeCore::Eqs(vec![])
    }

    fn false_core(&self) -> TreeCore {
        TreeCore::False
    }

    fn is_true(&self, c: &TreeCore) -> bool {
        matches!(c, TreeCore::Eqs(e) if e.is_empty())
    }

    fn is_false(&self, c: &TreeCore) -> bool {
        *c == TreeCore::False
    }

    fn conjoin(&self, a: &TreeCore, b: &TreeCore) -> TreeCore {
        match (a, b) {
            (TreeCore::Eqs(x), TreeCore::Eqs(y)) => TreeCore::new(x.iter().chain(y).cloned().collect()),
            _ => TreeCore::False,
        }
    }

    fn solve(&self, c: &TreeCore) -> TreeCore {
        match c {
            TreeCore::False => TreeCore::False,
            TreeCore::Eqs(e) if is_solved(e) => c.clone(),
            TreeCore::Eqs(e) => unify(e),
        }
    }

    fn decompose(&self, x: &[Var], c: &TreeCore) -> Result<Decomposition<TreeCore>, TheoryError> {
        check_rank(x, &self.core_vars(c))?;
        let TreeCore::Eqs(eqs) = self.solve(c) else { return Ok(Decomposition::of_false(self)) };
        let r = reachable(x, &eqs);
        let lhs: Vec<Var> = eqs.iter().map(|e| e.lhs).collect();
        let (mut first, mut third) = (Vec::new(), Vec::new());
        for (i, e) in eqs.into_iter().enumerate() {
            if r.eqs.binary_search(&i).is_ok() {
                first.push(e);
            } else {
                third.push(e);
            }
        }
        let unreachable = x.iter().copied().filter(|v| r.vars.binary_search(v).is_err());
        let (tprime, dprime): (Vec<Var>, Vec<Var>) = unreachable.partition(|v| lhs.contains(v));
        Ok(Decomposition {
            x_prime: sorted(x.iter().copied().filter(|v| r.vars.binary_search(v).is_ok()).collect()),
            a_prime: TreeCore::new(first),
            x_dprime: sorted(dprime),
            a_dprime: self.true_core(),
            x_tprime: sorted(tprime),
            a_tprime: TreeCore::new(third),
        })
    }

    fn in_a_prime(&self, x: &[Var], c: &TreeCore) -> bool {
        let TreeCore::Eqs(eqs) = c else { return x.is_empty() };
        if !is_solved(eqs) {
            return false;
        }
        let vars = self.core_vars(c);
        if check_rank(x, &vars).is_err() {
            return false;
        }
        let r = reachable(x, eqs);
        r.eqs.len() == eqs.len() && x.iter().all(|v| r.vars.binary_search(v).is_ok())
    }

    fn in_a_dprime(&self, _x: &[Var], c: &TreeCore) -> bool {
        self.is_true(c)
    }

    fn in_a_tprime(&self, x: &[Var], c: &TreeCore) -> bool {
        match c {
            TreeCore::False => false,
            TreeCore::Eqs(e) => is_solved(e) && sorted(e.iter().map(|q| q.lhs).collect()) == sorted(x.to_vec()),
        }
    }

    fn core_vars(&self, c: &TreeCore) -> Vec<Var> {
        match c {
            TreeCore::False => vec![],
            TreeCore::Eqs(e) => {
                sorted(e.iter().flat_map(|q| std::iter::once(q.lhs).chain(q.rhs_vars().iter().copied())).collect())
            }
        }
    }

    fn rename(&self, c: &TreeCore, f: &dyn Fn(Var) -> Var) -> TreeCore {
        match c {
            TreeCore::False => TreeCore::False,
            TreeCore::Eqs(e) => TreeCore::new(
                e.iter()
                    .map(|q| TreeEq {
                        lhs: f(q.lhs),
                        rhs: match &q.rhs {
                            Rhs::Var(v) => Rhs::Var(f(*v)),
                            Rhs::App(s, a) => Rhs::App(*s, a.iter().map(|v| f(*v)).collect()),
                        },
                    })
                    .collect(),
            ),
        }
    }

    fn core_formula(&self, c: &TreeCore) -> Formula {
        match c {
            TreeCore::False => Formula::False,
            TreeCore::Eqs(e) => Formula::and_all(e.iter().map(|q| {
                let rhs = match &q.rhs {
                    Rhs::Var(v) => Term::Var(*v),
                    Rhs::App(s, a) => Term::App(*s, a.iter().map(|v| Term::Var(*v)).collect()),
                };
                Formula::Eq(Term::Var(q.lhs), rhs)
            })),
        }
    }

    fn entails(&self, ctx: &TreeCore, y: &[Var], b: &TreeCore) -> bool {
        let (TreeCore::Eqs(ctx), TreeCore::Eqs(b)) = (ctx, b) else { return false };
        let mut cl = Classes { parent: vec![], head: vec![], anchored: vec![], ids: HashMap::new(), strict: false };
        if !ctx.iter().all(|e| cl.add(e, &|_| true)) {
            return false;
        }
        cl.strict = true;
        b.iter().all(|e| cl.add(e, &|v| !y.contains(&v)))
    }

    fn print_core(&self, c: &TreeCore, vars: &Vars) -> String {
        match c {
            TreeCore::False => "false".into(),
            TreeCore::Eqs(e) if e.is_empty() => "true".into(),
            TreeCore::Eqs(e) => e
                .iter()
                .map(|q| {
                    let rhs = match &q.rhs {
                        Rhs::Var(v) => vars.name(*v),
                        Rhs::App(s, a) if a.is_empty() => self.sig.fun(*s).name.clone(),
                        Rhs::App(s, a) => format!(
                            "{}({})",
                            self.sig.fun(*s).name,
                            a.iter().map(|v| vars.name(*v)).collect::<Vec<_>>().join(", ")
                        ),
                    };
                    format!("{} = {}", vars.name(q.lhs), rhs)
                })
                .collect::<Vec<_>>()
                .join(" & "),
        }
    }
}
