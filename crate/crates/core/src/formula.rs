//! Abstract syntax: variables, signatures, terms, formulas, flat atoms and
//! the negation-rooted tree shape shared by normalized and working formulas.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

/// A variable. The id is also its rank: larger ids are greater in the
/// variable order, and fresh variables always get the largest id so far.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn rank(self) -> u32 {
        self.0
    }
}

/// Session table of variables and their display names.
///
/// Display names are a base name plus an optional numeric suffix. Fresh
/// variables always carry a suffix that is unique for their base, so they
/// never print like another variable of the same session.
#[derive(Clone, Debug, Default)]
pub struct Vars {
    entries: Vec<(u32, u32)>,
    bases: Vec<String>,
    base_index: HashMap<String, u32>,
    next_suffix: Vec<u32>,
    user_names: HashSet<String>,
}

impl Vars {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn base_id(&mut self, base: &str) -> u32 {
        if let Some(&id) = self.base_index.get(base) {
            return id;
        }
        let id = self.bases.len() as u32;
        self.bases.push(base.to_string());
        self.next_suffix.push(1);
        self.base_index.insert(base.to_string(), id);
        id
    }

    /// A new variable displayed exactly as `name`.
    pub fn named(&mut self, name: &str) -> Var {
        self.user_names.insert(name.to_string());
        let b = self.base_id(name);
        self.push(b, 0)
    }

    fn push(&mut self, base: u32, suffix: u32) -> Var {
        let v = Var(self.entries.len() as u32);
        self.entries.push((base, suffix));
        v
    }

    /// A new variable whose name is `base` followed by a fresh suffix.
    pub fn fresh(&mut self, base: &str) -> Var {
        let b = self.base_id(base);
        self.fresh_with_base(b)
    }

    fn fresh_with_base(&mut self, b: u32) -> Var {
        loop {
            let s = self.next_suffix[b as usize];
            self.next_suffix[b as usize] += 1;
            let candidate = format!("{}_{}", self.bases[b as usize], s);
            if !self.user_names.contains(&candidate) {
                return self.push(b, s);
            }
        }
    }

    /// A new variable sharing the base name of `v`, with a fresh suffix.
    pub fn fresh_like(&mut self, v: Var) -> Var {
        let b = self.entries[v.0 as usize].0;
        self.fresh_with_base(b)
    }

    /// A new variable displayed exactly like `v`.
    pub fn same_name_as(&mut self, v: Var) -> Var {
        let (b, s) = self.entries[v.0 as usize];
        self.push(b, s)
    }

    pub fn name(&self, v: Var) -> String {
        let (b, s) = self.entries[v.0 as usize];
        if s == 0 {
            self.bases[b as usize].clone()
        } else {
            format!("{}_{}", self.bases[b as usize], s)
        }
    }
}

/// A function or relation symbol: an index into the signature's list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryTag {
    Eq,
    Ra,
    Trees,
}

impl TheoryTag {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoryTag::Eq => "eq",
            TheoryTag::Ra => "ra",
            TheoryTag::Trees => "trees",
        }
    }
}

impl std::str::FromStr for TheoryTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "eq" => Ok(TheoryTag::Eq),
            "ra" => Ok(TheoryTag::Ra),
            "trees" => Ok(TheoryTag::Trees),
            _ => Err(format!("unknown theory `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("duplicate symbol `{0}`")]
    Duplicate(String),
    #[error("symbol `{name}` is not allowed in theory {theory}")]
    NotAllowed { name: String, theory: &'static str },
}

/// Function and relation symbols of a theory.
///
/// An open signature accepts undeclared function applications and declares
/// them on first use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub tag: TheoryTag,
    pub functions: Vec<Symbol>,
    pub relations: Vec<Symbol>,
    pub open: bool,
}

pub const RA_PLUS: &str = "+";
pub const RA_NEG: &str = "-";
pub const RA_ZERO: &str = "0";
pub const RA_ONE: &str = "1";

impl Signature {
    pub fn eq() -> Self {
        Signature { tag: TheoryTag::Eq, functions: vec![], relations: vec![], open: false }
    }

    /// The additive rationals: `+/2, -/1, 0/0, 1/0` in this order.
    pub fn ra() -> Self {
        let f = |n: &str, a| Symbol { name: n.to_string(), arity: a };
        Signature {
            tag: TheoryTag::Ra,
            functions: vec![f(RA_PLUS, 2), f(RA_NEG, 1), f(RA_ZERO, 0), f(RA_ONE, 0)],
            relations: vec![],
            open: false,
        }
    }

    pub fn trees(functions: &[(&str, usize)]) -> Self {
        let mut s = Signature { tag: TheoryTag::Trees, functions: vec![], relations: vec![], open: false };
        for (n, a) in functions {
            s.add_function(n, *a).expect("duplicate symbol");
        }
        s
    }

    /// A trees signature that declares function symbols as they are met.
    pub fn open_trees() -> Self {
        let mut s = Signature::trees(&[("0", 0)]);
        s.open = true;
        s
    }

    pub fn for_tag(tag: TheoryTag) -> Self {
        match tag {
            TheoryTag::Eq => Signature::eq(),
            TheoryTag::Ra => Signature::ra(),
            TheoryTag::Trees => Signature::open_trees(),
        }
    }

    pub fn function(&self, name: &str) -> Option<Sym> {
        self.functions.iter().position(|s| s.name == name).map(|i| Sym(i as u32))
    }

    pub fn relation(&self, name: &str) -> Option<Sym> {
        self.relations.iter().position(|s| s.name == name).map(|i| Sym(i as u32))
    }

    pub fn fun(&self, s: Sym) -> &Symbol {
        &self.functions[s.0 as usize]
    }

    pub fn rel(&self, s: Sym) -> &Symbol {
        &self.relations[s.0 as usize]
    }

    pub fn add_function(&mut self, name: &str, arity: usize) -> Result<Sym, SignatureError> {
        if self.function(name).is_some() {
            return Err(SignatureError::Duplicate(name.to_string()));
        }
        self.functions.push(Symbol { name: name.to_string(), arity });
        Ok(Sym(self.functions.len() as u32 - 1))
    }

    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<Sym, SignatureError> {
        if self.relation(name).is_some() {
            return Err(SignatureError::Duplicate(name.to_string()));
        }
        self.relations.push(Symbol { name: name.to_string(), arity });
        Ok(Sym(self.relations.len() as u32 - 1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    App(Sym, Vec<Term>),
}

impl Term {
    pub fn app(s: Sym, args: Vec<Term>) -> Term {
        Term::App(s, args)
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, a) => 1 + a.iter().map(Term::size).sum::<usize>(),
        }
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => out.push(*v),
            Term::App(_, a) => a.iter().for_each(|t| t.collect_vars(out)),
        }
    }

    pub fn rename(&self, f: &impl Fn(Var) -> Var) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(*v)),
            Term::App(s, a) => Term::App(*s, a.iter().map(|t| t.rename(f)).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Rel(Sym, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Vec<Var>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }
    pub fn exists(vs: Vec<Var>, f: Formula) -> Formula {
        Formula::Exists(vs, Box::new(f))
    }
    pub fn forall(vs: Vec<Var>, f: Formula) -> Formula {
        Formula::Forall(vs, Box::new(f))
    }
    pub fn eq_vars(x: Var, y: Var) -> Formula {
        Formula::Eq(Term::Var(x), Term::Var(y))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn and_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn or_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    /// Number of AST nodes, counting term nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False => 1,
            Formula::Eq(a, b) => 1 + a.size() + b.size(),
            Formula::Rel(_, ts) => 1 + ts.iter().map(Term::size).sum::<usize>(),
            Formula::Not(f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.size(),
        }
    }

    /// Maximum nesting of quantifier blocks.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.quantifier_depth(),
        }
    }

    /// Number of bound variable occurrences in binder lists.
    pub fn quantified_count(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => 0,
            Formula::Not(f) => f.quantified_count(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.quantified_count() + b.quantified_count()
            }
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => vs.len() + f.quantified_count(),
        }
    }
}

/// Variables with a free occurrence in `f`.
pub fn free_vars(f: &Formula) -> BTreeSet<Var> {
    fn go(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut tv = Vec::new();
        match f {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                a.collect_vars(&mut tv);
                b.collect_vars(&mut tv);
            }
            Formula::Rel(_, ts) => ts.iter().for_each(|t| t.collect_vars(&mut tv)),
            Formula::Not(g) => go(g, bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
                let n = bound.len();
                bound.extend(vs.iter().copied());
                go(g, bound, out);
                bound.truncate(n);
            }
        }
        for v in tv {
            if !bound.contains(&v) {
                out.insert(v);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

/// Renames every bound variable to a fresh one, in pre-order.
///
/// A renamed binder keeps its display name unless that name is already used
/// by a free variable or by an earlier binder of the result. Binders met
/// later in pre-order always receive higher ranks.
pub fn fresh_rename(f: &Formula, vars: &mut Vars) -> Formula {
    let mut taken: HashSet<String> = free_vars(f).into_iter().map(|v| vars.name(v)).collect();
    let mut env: Vec<(Var, Var)> = Vec::new();
    rename_binders(f, vars, &mut env, &mut taken)
}

fn rename_binders(f: &Formula, vars: &mut Vars, env: &mut Vec<(Var, Var)>, taken: &mut HashSet<String>) -> Formula {
    let subst = |env: &Vec<(Var, Var)>, t: &Term| {
        t.rename(&|v| env.iter().rev().find(|(o, _)| *o == v).map(|p| p.1).unwrap_or(v))
    };
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Eq(a, b) => Formula::Eq(subst(env, a), subst(env, b)),
        Formula::Rel(r, ts) => Formula::Rel(*r, ts.iter().map(|t| subst(env, t)).collect()),
        Formula::Not(g) => Formula::not(rename_binders(g, vars, env, taken)),
        Formula::And(a, b) => Formula::and(rename_binders(a, vars, env, taken), rename_binders(b, vars, env, taken)),
        Formula::Or(a, b) => Formula::or(rename_binders(a, vars, env, taken), rename_binders(b, vars, env, taken)),
        Formula::Implies(a, b) => {
            Formula::implies(rename_binders(a, vars, env, taken), rename_binders(b, vars, env, taken))
        }
        Formula::Iff(a, b) => Formula::iff(rename_binders(a, vars, env, taken), rename_binders(b, vars, env, taken)),
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            let n = env.len();
            let mut nvs = Vec::with_capacity(vs.len());
            for &v in vs {
                let name = vars.name(v);
                let nv = if taken.contains(&name) { vars.fresh_like(v) } else { vars.same_name_as(v) };
                taken.insert(vars.name(nv));
                env.push((v, nv));
                nvs.push(nv);
            }
            let body = rename_binders(g, vars, env, taken);
            env.truncate(n);
            match f {
                Formula::Exists(..) => Formula::exists(nvs, body),
                _ => Formula::forall(nvs, body),
            }
        }
    }
}

/// Flat atomic formulas.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlatAtom {
    True,
    False,
    EqVar(Var, Var),
    EqApp(Var, Sym, Vec<Var>),
    Rel(Sym, Vec<Var>),
}

impl FlatAtom {
    pub fn vars(&self) -> Vec<Var> {
        match self {
            FlatAtom::True | FlatAtom::False => vec![],
            FlatAtom::EqVar(x, y) => vec![*x, *y],
            FlatAtom::EqApp(x, _, ys) => std::iter::once(*x).chain(ys.iter().copied()).collect(),
            FlatAtom::Rel(_, ys) => ys.clone(),
        }
    }

    pub fn rename(&self, f: &impl Fn(Var) -> Var) -> FlatAtom {
        match self {
            FlatAtom::True => FlatAtom::True,
            FlatAtom::False => FlatAtom::False,
            FlatAtom::EqVar(x, y) => FlatAtom::EqVar(f(*x), f(*y)),
            FlatAtom::EqApp(x, s, ys) => FlatAtom::EqApp(f(*x), *s, ys.iter().map(|v| f(*v)).collect()),
            FlatAtom::Rel(r, ys) => FlatAtom::Rel(*r, ys.iter().map(|v| f(*v)).collect()),
        }
    }

    pub fn to_formula(&self) -> Formula {
        let tv = |v: &Var| Term::Var(*v);
        match self {
            FlatAtom::True => Formula::True,
            FlatAtom::False => Formula::False,
            FlatAtom::EqVar(x, y) => Formula::eq_vars(*x, *y),
            FlatAtom::EqApp(x, s, ys) => Formula::Eq(Term::Var(*x), Term::App(*s, ys.iter().map(tv).collect())),
            FlatAtom::Rel(r, ys) => Formula::Rel(*r, ys.iter().map(tv).collect()),
        }
    }

    /// Reads a flat atomic formula back; `None` for anything else.
    pub fn from_formula(f: &Formula) -> Option<FlatAtom> {
        let var_args = |ts: &[Term]| -> Option<Vec<Var>> {
            ts.iter().map(|t| if let Term::Var(v) = t { Some(*v) } else { None }).collect()
        };
        match f {
            Formula::True => Some(FlatAtom::True),
            Formula::False => Some(FlatAtom::False),
            Formula::Eq(Term::Var(x), Term::Var(y)) => Some(FlatAtom::EqVar(*x, *y)),
            Formula::Eq(Term::Var(x), Term::App(s, ts)) => Some(FlatAtom::EqApp(*x, *s, var_args(ts)?)),
            Formula::Rel(r, ts) => Some(FlatAtom::Rel(*r, var_args(ts)?)),
            _ => None,
        }
    }
}

/// Canonical conjunction: sorted, without duplicates, without `true`.
/// `false` absorbs everything else.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Conj(pub Vec<FlatAtom>);

impl Conj {
    pub fn new(atoms: impl IntoIterator<Item = FlatAtom>) -> Conj {
        let mut v: Vec<FlatAtom> = atoms.into_iter().filter(|a| *a != FlatAtom::True).collect();
        if v.contains(&FlatAtom::False) {
            return Conj(vec![FlatAtom::False]);
        }
        v.sort();
        v.dedup();
        Conj(v)
    }

    pub fn truth() -> Conj {
        Conj(vec![])
    }

    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_false(&self) -> bool {
        self.0 == [FlatAtom::False]
    }

    pub fn and(&self, other: &Conj) -> Conj {
        Conj::new(self.0.iter().chain(other.0.iter()).cloned())
    }
}

/// Sorts and removes duplicates, the canonical form of a conjunction.
pub fn canonical<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v.dedup();
    v
}

/// The tree `~(ex bound. core & children...)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node<C> {
    pub bound: Vec<Var>,
    pub core: C,
    pub children: Vec<Node<C>>,
}

impl<C> Node<C> {
    pub fn leaf(bound: Vec<Var>, core: C) -> Self {
        Node { bound, core, children: vec![] }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// 1 + the maximal depth of the children.
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(Node::depth).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Node::node_count).sum::<usize>()
    }

    /// Binders of the whole tree in pre-order.
    pub fn all_binders(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.visit(&mut |n| out.extend(n.bound.iter().copied()));
        out
    }

    pub fn visit(&self, f: &mut impl FnMut(&Node<C>)) {
        f(self);
        for c in &self.children {
            c.visit(f);
        }
    }

    pub fn map_cores<D>(&self, f: &mut impl FnMut(&[Var], &C) -> D) -> Node<D> {
        Node {
            bound: self.bound.clone(),
            core: f(&self.bound, &self.core),
            children: self.children.iter().map(|c| c.map_cores(f)).collect(),
        }
    }

    pub fn try_map_cores<D, E>(&self, f: &mut impl FnMut(&C) -> Result<D, E>) -> Result<Node<D>, E> {
        Ok(Node {
            bound: self.bound.clone(),
            core: f(&self.core)?,
            children: self.children.iter().map(|c| c.try_map_cores(f)).collect::<Result<_, _>>()?,
        })
    }
}

impl<C: Ord> Node<C> {
    /// Sorts binders and children recursively and removes duplicate children.
    pub fn canonicalize(&mut self) {
        self.bound.sort();
        for c in &mut self.children {
            c.canonicalize();
        }
        self.children.sort();
        self.children.dedup();
    }
}

/// A normalized formula: the tree shape with flat cores.
pub type NormalizedFormula = Node<Conj>;

impl NormalizedFormula {
    /// The formula `~(ex bound. core & children)` as a plain AST.
    pub fn to_formula(&self) -> Formula {
        let atoms: Vec<Formula> = if self.core.is_true() {
            vec![Formula::True]
        } else {
            self.core.0.iter().map(FlatAtom::to_formula).collect()
        };
        let parts = atoms.into_iter().chain(self.children.iter().map(|c| c.to_formula()));
        let body = Formula::and_all(parts);
        Formula::not(Formula::exists(self.bound.clone(), body))
    }

    /// Reads the shape `~(ex x. a & ... & ~(...) & ...)` back from an AST.
    pub fn from_formula(f: &Formula) -> Option<NormalizedFormula> {
        let Formula::Not(inner) = f else { return None };
        let Formula::Exists(bound, body) = inner.as_ref() else { return None };
        let mut atoms = Vec::new();
        let mut children = Vec::new();
        let mut stack = vec![body.as_ref()];
        while let Some(g) = stack.pop() {
            match g {
                Formula::And(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                Formula::Not(_) => children.push(NormalizedFormula::from_formula(g)?),
                _ => atoms.push(FlatAtom::from_formula(g)?),
            }
        }
        Some(Node { bound: bound.clone(), core: Conj::new(atoms), children })
    }
}

/// Whether two normalized formulas are equal up to a renaming of their
/// binders and the order of binders, atoms and children. Free variables
/// must coincide. Backtracking search; meant for small formulas.
pub fn alpha_equivalent(a: &NormalizedFormula, b: &NormalizedFormula) -> bool {
    node_match(a, b, &HashMap::new())
}

fn node_match(a: &NormalizedFormula, b: &NormalizedFormula, map: &HashMap<Var, Var>) -> bool {
    if a.bound.len() != b.bound.len() || a.children.len() != b.children.len() || a.core.0.len() != b.core.0.len() {
        return false;
    }
    let mut targets = b.bound.clone();
    targets.sort();
    permutations(&mut targets, 0, &mut |perm| {
        let mut m = map.clone();
        m.extend(a.bound.iter().copied().zip(perm.iter().copied()));
        let f = |v: Var| *m.get(&v).unwrap_or(&v);
        Conj::new(a.core.0.iter().map(|x| x.rename(&f))) == b.core
            && children_match(&a.children, &b.children, &mut vec![false; b.children.len()], &m)
    })
}

fn children_match(a: &[NormalizedFormula], b: &[NormalizedFormula], used: &mut Vec<bool>, m: &HashMap<Var, Var>) -> bool {
    let Some((first, rest)) = a.split_first() else { return true };
    for j in 0..b.len() {
        if !used[j] && node_match(first, &b[j], m) {
            used[j] = true;
            if children_match(rest, b, used, m) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

/// Calls `f` on every ordering of `v[k..]` (after `v[..k]`) until it
/// returns `true`.
fn permutations(v: &mut Vec<Var>, k: usize, f: &mut impl FnMut(&[Var]) -> bool) -> bool {
    if k == v.len() {
        return f(v);
    }
    for i in k..v.len() {
        v.swap(k, i);
        if permutations(v, k + 1, f) {
            return true;
        }
        v.swap(k, i);
    }
    false
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_of_bound_and_closed() {
        let mut vs = Vars::new();
        let (x, y) = (vs.named("x"), vs.named("y"));
        let f = Formula::exists(vec![x], Formula::eq_vars(y, x));
        assert_eq!(free_vars(&f), [y].into_iter().collect());
        assert!(free_vars(&Formula::True).is_empty());
    }

    #[test]
    fn fresh_rename_separates_shadowed_binders() {
        let mut vs = Vars::new();
        let (x, y) = (vs.named("x"), vs.named("y"));
        let f = Formula::exists(vec![x], Formula::exists(vec![x], Formula::eq_vars(x, y)));
        let g = fresh_rename(&f, &mut vs);
        let Formula::Exists(a, inner) = &g else { panic!() };
        let Formula::Exists(b, body) = inner.as_ref() else { panic!() };
        assert_ne!(a, b);
        assert!(a[0] > y && b[0] > a[0]);
        assert_eq!(**body, Formula::eq_vars(b[0], y));
        assert_eq!(free_vars(&g), free_vars(&f));
        assert_ne!(vs.name(a[0]), vs.name(b[0]));
    }

    #[test]
    fn fresh_names_avoid_user_names() {
        let mut vs = Vars::new();
        let x = vs.named("x");
        vs.named("x_1");
        let y = vs.fresh_like(x);
        assert_eq!(vs.name(y), "x_2");
    }

    #[test]
    fn depth_examples() {
        let leaf: Node<Conj> = Node::leaf(vec![], Conj::truth());
        assert_eq!(leaf.depth(), 1);
        let two = Node { bound: vec![], core: Conj::truth(), children: vec![leaf.clone()] };
        assert_eq!(two.depth(), 2);
        let three = Node { bound: vec![], core: Conj::truth(), children: vec![leaf, two] };
        assert_eq!(three.depth(), 3);
    }

    #[test]
    fn conj_is_canonical() {
        let a = FlatAtom::EqVar(Var(1), Var(0));
        let b = FlatAtom::EqVar(Var(2), Var(0));
        assert_eq!(Conj::new([a.clone(), b.clone()]), Conj::new([b.clone(), a.clone(), a.clone()]));
        assert_eq!(Conj::new([a.clone(), FlatAtom::True]), Conj::new([a.clone()]));
        assert!(Conj::new([a, FlatAtom::False]).is_false());
        assert!(Conj::new([FlatAtom::True]).is_true());
    }

    #[test]
    fn read_back_normalized() {
        let mut vs = Vars::new();
        let x = vs.named("x");
        let n = Node {
            bound: vec![x],
            core: Conj::new([FlatAtom::EqVar(x, x)]),
            children: vec![Node::leaf(vec![], Conj::truth())],
        };
        assert_eq!(NormalizedFormula::from_formula(&n.to_formula()), Some(n));
    }

    #[test]
    fn alpha_equivalence_ignores_binder_names_and_order() {
        use crate::syntax::{parse_formula_in, Scope};
        let mut sig = Signature::trees(&[("f", 2)]);
        let mut vs = Vars::new();
        let mut scope = Scope::new();
        let mut n = |t: &str| {
            let f = parse_formula_in(t, &mut sig, &mut vs, &mut scope).unwrap();
            NormalizedFormula::from_formula(&f).unwrap()
        };
        let a = n("~(ex u x. u = f(z, x) & x = z & ~(ex w. w = u) & ~(ex . x = z))");
        let b = n("~(ex y p. y = z & p = f(z, y) & ~(ex . y = z) & ~(ex q. q = p))");
        let c = n("~(ex y p. y = z & p = f(y, z) & ~(ex . y = z) & ~(ex q. q = p))");
        let d = n("~(ex y p. y = z & p = f(z, y) & ~(ex . y = r) & ~(ex q. q = p))");
        assert!(alpha_equivalent(&a, &b));
        assert!(!alpha_equivalent(&a, &c));
        assert!(!alpha_equivalent(&a, &d));
    }
}
