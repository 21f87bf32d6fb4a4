//! The five rewriting rules and the solving loop over working formulas.
//!
//! A working formula is a [`Node`] whose cores are theory cores. The solver
//! keeps a conjunction of working formulas (the forest) and rewrites it in
//! place. Paths address nodes: the first index selects a member of the
//! forest, the following ones select children.

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::formula::{free_vars, Formula, Node, Var, Vars};
use crate::normalize::{normalize, to_working, working_to_formula};
use crate::syntax::print_formula;
use crate::theory::{Theory, TheoryError};

pub type WorkingFormula<C> = Node<C>;

#[derive(Clone, Debug, PartialEq)]
pub struct Limits {
    pub max_steps: u64,
    pub max_depth: usize,
    pub max_nodes: u64,
    pub max_seconds: Option<f64>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_steps: 10_000_000, max_depth: 64, max_nodes: 100_000_000, max_seconds: None }
    }
}

/// Deliberate rule defects, used to check that the test harness notices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Rule (4) drops every child instead of only those mentioning `x''`.
    Rule4DropsAllChildren,
    /// Rule (3) keeps `x'''` unrenamed in every child.
    Rule3SharesNames,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub limits: Limits,
    pub trace: bool,
    /// Check after every step that the termination measure decreased.
    pub check_measure: bool,
    /// Depth above which the measure is not computed.
    pub measure_cap: usize,
    /// Check after every step that all binders are distinct and none is
    /// free in the input.
    pub check_binders: bool,
    pub fault: Option<Fault>,
    /// Interleave identification steps: rule id 0 drops duplicate and
    /// contradicted children, rule id 6 flattens binder-free `true` children.
    pub prune: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            limits: Limits::default(),
            trace: false,
            check_measure: std::env::var_os("DECOMP_DEBUG_MEASURE").is_some(),
            measure_cap: 12,
            check_binders: false,
            fault: None,
            prune: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Stats {
    /// Applications of rules (1) to (5).
    pub rules: [u64; 5],
    /// Identification steps dropping duplicate or contradicted children.
    pub pruned: u64,
    /// Identification steps flattening a binder-free `true` child.
    pub lifted: u64,
    pub steps: u64,
    pub peak_nodes: u64,
    #[serde(serialize_with = "secs")]
    pub elapsed: Duration,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub step: u64,
    pub rule: u8,
    pub path: Vec<usize>,
    pub before: String,
    pub after: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    Steps,
    Depth,
    Nodes,
    Time,
}

impl LimitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LimitKind::Steps => "step",
            LimitKind::Depth => "depth",
            LimitKind::Nodes => "node-count",
            LimitKind::Time => "time",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("{} limit exceeded after {} steps", .kind.as_str(), .stats.steps)]
    Limit { kind: LimitKind, stats: Stats, trace: Vec<TraceStep> },
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("termination measure did not decrease at step {step} (rule {rule})")]
    MeasureIncrease { step: u64, rule: u8 },
    #[error("solver invariant violated: {0}")]
    Invariant(String),
    #[error("the input has free variables")]
    NotClosed,
}

#[derive(Clone, Debug)]
pub struct SolveResult<C> {
    pub solved: Vec<WorkingFormula<C>>,
    pub trace: Option<Vec<TraceStep>>,
    pub stats: Stats,
}

fn rename_node<T: Theory>(th: &T, n: &Node<T::Core>, map: &HashMap<Var, Var>) -> Node<T::Core> {
    let f = |v: Var| *map.get(&v).unwrap_or(&v);
    Node {
        bound: n.bound.iter().map(|&v| f(v)).collect(),
        core: th.rename(&n.core, &f),
        children: n.children.iter().map(|c| rename_node(th, c, map)).collect(),
    }
}

/// `n` with its binders renamed to placeholders in pre-order, so that two
/// nodes differing only by a rank-preserving renaming of their binders get
/// the same key.
fn alpha_key<T: Theory>(th: &T, n: &Node<T::Core>) -> Node<T::Core> {
    fn go<T: Theory>(th: &T, n: &Node<T::Core>, map: &mut HashMap<Var, Var>) -> Node<T::Core> {
        for &v in &n.bound {
            let p = Var(u32::MAX - map.len() as u32);
            map.insert(v, p);
        }
        let f = |v: Var| *map.get(&v).unwrap_or(&v);
        let bound = n.bound.iter().map(|&v| f(v)).collect();
        let core = th.rename(&n.core, &f);
        let children = n.children.iter().map(|c| go(th, c, map)).collect();
        Node { bound, core, children }
    }
    go(th, n, &mut HashMap::new())
}

/// Sorts a conjunction and drops members equal up to renaming of binders.
fn dedup_alpha<T: Theory>(th: &T, v: Vec<Node<T::Core>>) -> Vec<Node<T::Core>> {
    type Keyed<C> = (Node<C>, Node<C>);
    let mut keyed: Vec<Keyed<T::Core>> = v.into_iter().map(|n| (alpha_key(th, &n), n)).collect();
    keyed.sort();
    keyed.dedup_by(|a, b| a.0 == b.0);
    keyed.into_iter().map(|p| p.1).collect()
}

fn in_a_prime<T: Theory>(th: &T, n: &Node<T::Core>) -> bool {
    th.in_a_prime(&n.bound, &n.core)
}

/// Variables free in the leaf `~(ex bound. core)`.
fn leaf_free<T: Theory>(th: &T, n: &Node<T::Core>) -> Vec<Var> {
    th.core_vars(&n.core).into_iter().filter(|v| !n.bound.contains(v)).collect()
}

/// Identification step. A node whose core entails one of its leaf children
/// is `true` and disappears. Otherwise children contradicting the core (true
/// wherever it holds) and children repeating a sibling up to renaming of
/// binders are dropped.
fn prune<T: Theory>(th: &T, n: &Node<T::Core>) -> Option<Vec<Node<T::Core>>> {
    if n.children.iter().any(|c| c.is_leaf() && th.entails(&n.core, &c.bound, &c.core)) {
        return Some(vec![]);
    }
    let kept: Vec<Node<T::Core>> = n
        .children
        .iter()
        .filter(|c| !th.is_false(&th.solve(&th.conjoin(&n.core, &c.core))))
        .cloned()
        .collect();
    let kept = dedup_alpha(th, kept);
    (kept.len() < n.children.len()).then(|| vec![Node { bound: n.bound.clone(), core: n.core.clone(), children: kept }])
}

/// `n` with every binder, its own first, renamed to fresh variables in
/// pre-order, so nested binders still outrank those above them.
fn fresh_copy<T: Theory>(th: &T, vars: &mut Vars, n: &Node<T::Core>) -> Node<T::Core> {
    let mut map = HashMap::new();
    n.visit(&mut |m| {
        for &v in &m.bound {
            map.insert(v, vars.fresh_like(v));
        }
    });
    rename_node(th, n, &map)
}

fn liftable<T: Theory>(th: &T, c: &Node<T::Core>) -> bool {
    c.bound.is_empty() && !c.is_leaf() && th.is_true(&c.core)
}

/// Identification step. A child `~(ex . true & g1 & ... & gk)` is the
/// disjunction of the bodies of the `gj`, so `n` becomes one node per `gj`
/// carrying its binders, core and children next to the other children of `n`.
fn lift<T: Theory>(th: &T, vars: &mut Vars, n: &Node<T::Core>) -> Option<Vec<Node<T::Core>>> {
    let k = n.children.iter().position(|c| liftable(th, c))?;
    let rest: Vec<&Node<T::Core>> = n.children.iter().enumerate().filter(|(i, _)| *i != k).map(|p| p.1).collect();
    let mut out = Vec::with_capacity(n.children[k].children.len());
    for (j, g) in n.children[k].children.iter().enumerate() {
        let mut bound: Vec<Var> = n.bound.iter().chain(&g.bound).copied().collect();
        bound.sort();
        let core = th.solve(&th.conjoin(&n.core, &g.core));
        let children = g.children.iter().chain(rest.iter().copied()).cloned().collect();
        let m = Node { bound, core, children };
        out.push(if j == 0 { m } else { fresh_copy(th, vars, &m) });
    }
    Some(out)
}

fn rule1<T: Theory>(th: &T, n: &Node<T::Core>) -> Option<Vec<Node<T::Core>>> {
    n.children.iter().any(|c| c.is_leaf() && th.is_true(&c.core)).then(Vec::new)
}

fn rule2<T: Theory>(th: &T, n: &Node<T::Core>) -> Option<Vec<Node<T::Core>>> {
    th.is_false(&n.core).then(Vec::new)
}

fn rule3<T: Theory>(
    th: &T,
    vars: &mut Vars,
    n: &Node<T::Core>,
    fault: Option<Fault>,
) -> Result<Option<Vec<Node<T::Core>>>, TheoryError> {
    if !n.children.iter().all(Node::is_leaf) {
        return Ok(None);
    }
    let d = th.decompose(&n.bound, &n.core)?;
    if d.third_is_trivial(th) {
        return Ok(None);
    }
    let mut bound: Vec<Var> = d.x_prime.iter().chain(&d.x_dprime).copied().collect();
    bound.sort();
    let core = th.solve(&th.conjoin(&d.a_prime, &d.a_dprime));
    let mut children = Vec::with_capacity(n.children.len());
    for c in &n.children {
        let map: HashMap<Var, Var> = if fault == Some(Fault::Rule3SharesNames) {
            HashMap::new()
        } else {
            d.x_tprime.iter().map(|&v| (v, vars.fresh_like(v))).collect()
        };
        let f = |v: Var| *map.get(&v).unwrap_or(&v);
        let mut cb: Vec<Var> = d.x_tprime.iter().map(|&v| f(v)).chain(c.bound.iter().copied()).collect();
        cb.sort();
        let cc = th.solve(&th.conjoin(&th.rename(&d.a_tprime, &f), &th.rename(&c.core, &f)));
        children.push(Node::leaf(cb, cc));
    }
    Ok(Some(vec![Node { bound, core, children: dedup_alpha(th, children) }]))
}

fn rule4<T: Theory>(
    th: &T,
    n: &Node<T::Core>,
    fault: Option<Fault>,
) -> Result<Option<Vec<Node<T::Core>>>, TheoryError> {
    if !n.children.iter().all(|c| c.is_leaf() && in_a_prime(th, c)) || in_a_prime(th, n) {
        return Ok(None);
    }
    let d = th.decompose(&n.bound, &n.core)?;
    if !d.third_is_trivial(th) {
        return Ok(None);
    }
    let children: Vec<_> = match fault {
        Some(Fault::Rule4DropsAllChildren) => vec![],
        _ => n
            .children
            .iter()
            .filter(|c| !leaf_free(th, c).iter().any(|v| d.x_dprime.contains(v)))
            .cloned()
            .collect(),
    };
    let mut bound = d.x_prime;
    bound.sort();
    Ok(Some(vec![Node { bound, core: d.a_prime, children: dedup_alpha(th, children) }]))
}

fn rule5<T: Theory>(th: &T, vars: &mut Vars, n: &Node<T::Core>) -> Option<Vec<Node<T::Core>>> {
    let k = n.children.iter().position(|c| {
        !c.is_leaf() && in_a_prime(th, c) && c.children.iter().all(|g| g.is_leaf() && in_a_prime(th, g))
    })?;
    let c = &n.children[k];
    let phi: Vec<&Node<T::Core>> = n.children.iter().enumerate().filter(|(i, _)| *i != k).map(|p| p.1).collect();

    let mut first = n.clone();
    first.children[k] = Node::leaf(c.bound.clone(), c.core.clone());
    first.children = dedup_alpha(th, first.children);
    let mut out = vec![first];

    // The binders of the copy are allocated before those nested in phi, so
    // nested binders keep outranking everything free at their node.
    let mut renamed: Vec<Var> = n.bound.iter().chain(&c.bound).copied().collect();
    renamed.sort();
    let mut inner: Vec<Var> = phi.iter().flat_map(|p| p.all_binders()).collect();
    inner.sort();
    renamed.extend(inner);
    for g in &c.children {
        let map: HashMap<Var, Var> = renamed.iter().map(|&v| (v, vars.fresh_like(v))).collect();
        let f = |v: Var| *map.get(&v).unwrap_or(&v);
        let mut bound: Vec<Var> = n.bound.iter().chain(&c.bound).map(|&v| f(v)).chain(g.bound.iter().copied()).collect();
        bound.sort();
        let core = th.conjoin(&th.conjoin(&th.rename(&n.core, &f), &th.rename(&c.core, &f)), &th.rename(&g.core, &f));
        let children = phi.iter().map(|p| rename_node(th, p, &map)).collect();
        out.push(Node { bound, core: th.solve(&core), children: dedup_alpha(th, children) });
    }
    Some(out)
}

fn list_mut<'a, C>(forest: &'a mut Vec<Node<C>>, prefix: &[usize]) -> &'a mut Vec<Node<C>> {
    let mut list = forest;
    for &i in prefix {
        list = &mut list[i].children;
    }
    list
}

fn node_at<'a, C>(forest: &'a [Node<C>], path: &[usize]) -> &'a Node<C> {
    let mut n = &forest[path[0]];
    for &i in &path[1..] {
        n = &n.children[i];
    }
    n
}

/// The replacement for the node at `path` given by `rule`, if it applies.
fn rewrite<T: Theory>(
    th: &T,
    vars: &mut Vars,
    n: &Node<T::Core>,
    rule: u8,
    fault: Option<Fault>,
) -> Result<Option<Vec<Node<T::Core>>>, TheoryError> {
    Ok(match rule {
        0 => prune(th, n),
        1 => rule1(th, n),
        2 => rule2(th, n),
        3 => rule3(th, vars, n, fault)?,
        4 => rule4(th, n, fault)?,
        5 => rule5(th, vars, n),
        6 => lift(th, vars, n),
        _ => None,
    })
}

/// Applies `rule` to the node at `path`, splicing the resulting conjunction
/// into its parent's list. Returns the number of formulas spliced in, or
/// `None` when the rule does not apply.
pub fn apply_rule<T: Theory>(
    th: &T,
    vars: &mut Vars,
    forest: &mut Vec<WorkingFormula<T::Core>>,
    path: &[usize],
    rule: u8,
    fault: Option<Fault>,
) -> Result<Option<usize>, TheoryError> {
    let Some(out) = rewrite(th, vars, node_at(forest, path), rule, fault)? else { return Ok(None) };
    let (last, prefix) = path.split_last().expect("empty path");
    let n = out.len();
    list_mut(forest, prefix).splice(*last..*last + 1, out);
    Ok(Some(n))
}

/// Def. of solved formulas: depth at most 2, the top in `A'` and not false,
/// every child a leaf in `A'` whose core is neither true nor false.
pub fn is_solved<T: Theory>(th: &T, w: &WorkingFormula<T::Core>) -> bool {
    w.depth() <= 2
        && in_a_prime(th, w)
        && !th.is_false(&w.core)
        && w.children.iter().all(|c| in_a_prime(th, c) && !th.is_true(&c.core) && !th.is_false(&c.core))
}

/// The termination measure `(n1, n2, n3)` of a conjunction, or `None` when
/// it is too large to compute.
pub fn debug_measure<T: Theory>(
    th: &T,
    forest: &[WorkingFormula<T::Core>],
    cap: usize,
) -> Option<(BigUint, BigUint, BigUint)> {
    if forest.iter().any(|w| w.depth() > cap) {
        return None;
    }
    let mut n1 = BigUint::zero();
    let mut n2 = BigUint::zero();
    let mut n3 = 0u64;
    for w in forest {
        n1 += alpha(w)?;
        n2 += beta(th, w)?;
        w.visit(&mut |n| n3 += u64::from(!in_a_prime(th, n)));
    }
    Some((n1, n2, BigUint::from(n3)))
}

const MAX_EXPONENT: u64 = 1 << 16;

fn pow_small(base: u32, e: &BigUint) -> Option<BigUint> {
    let e: u64 = e.try_into().ok().filter(|e| *e <= MAX_EXPONENT)?;
    Some(BigUint::from(base).pow(e as u32))
}

fn alpha<C>(n: &Node<C>) -> Option<BigUint> {
    let mut s = BigUint::zero();
    for c in &n.children {
        s += alpha(c)?;
    }
    pow_small(2, &s)
}

fn beta<T: Theory>(th: &T, n: &Node<T::Core>) -> Option<BigUint> {
    let mut s = BigUint::one();
    for c in &n.children {
        s += beta(th, c)?;
    }
    let d = th.decompose(&n.bound, &n.core).ok()?;
    if d.third_is_trivial(th) {
        Some(s)
    } else {
        pow_small(4, &s)
    }
}

struct Solver<'a, T: Theory> {
    th: &'a T,
    vars: &'a mut Vars,
    opts: &'a Options,
    forest: Vec<WorkingFormula<T::Core>>,
    stats: Stats,
    trace: Vec<TraceStep>,
    nodes: u64,
    start: Instant,
    /// Free variables of the input, kept when binders are checked.
    free_in: BTreeSet<Var>,
}

impl<T: Theory> Solver<'_, T> {
    fn print(&self, ws: &[Node<T::Core>]) -> String {
        let f = Formula::and_all(ws.iter().map(|w| working_to_formula(w, self.th)));
        print_formula(&f, self.th.signature(), self.vars)
    }

    fn limit(&self, kind: LimitKind) -> SolveError {
        let mut stats = self.stats.clone();
        stats.elapsed = self.start.elapsed();
        SolveError::Limit { kind, stats, trace: self.trace.clone() }
    }

    /// Tries `rule` at `path`; on success records the step and returns the
    /// number of formulas that replaced the node.
    fn step(&mut self, path: &[usize], rule: u8) -> Result<Option<usize>, SolveError> {
        let before_node = node_at(&self.forest, path);
        let Some(out) = rewrite(self.th, self.vars, before_node, rule, self.opts.fault)? else { return Ok(None) };
        let removed = before_node.node_count() as u64;
        let added: u64 = out.iter().map(|w| w.node_count() as u64).sum();
        let before = self.opts.trace.then(|| self.print(std::slice::from_ref(before_node)));
        let after = self.opts.trace.then(|| self.print(&out));
        let old_measure = self.measure();

        let (last, prefix) = path.split_last().expect("empty path");
        let n = out.len();
        list_mut(&mut self.forest, prefix).splice(*last..*last + 1, out);

        self.stats.steps += 1;
        match rule {
            0 => self.stats.pruned += 1,
            6 => self.stats.lifted += 1,
            r => self.stats.rules[r as usize - 1] += 1,
        }
        self.nodes = self.nodes + added - removed;
        self.stats.peak_nodes = self.stats.peak_nodes.max(self.nodes);
        if let (Some(before), Some(after)) = (before, after) {
            self.trace.push(TraceStep { step: self.stats.steps, rule, path: path.to_vec(), before, after });
        }
        if self.opts.check_binders {
            let mut seen = BTreeSet::new();
            let ok = self.forest.iter().flat_map(|w| w.all_binders()).all(|v| !self.free_in.contains(&v) && seen.insert(v));
            if !ok {
                return Err(SolveError::Invariant(format!("binders not distinct after step {} (rule {rule})", self.stats.steps)));
            }
        }
        if let Some(old) = old_measure {
            if let Some(new) = self.measure() {
                if new >= old {
                    return Err(SolveError::MeasureIncrease { step: self.stats.steps, rule });
                }
            }
        }
        let l = &self.opts.limits;
        if self.stats.steps > l.max_steps {
            return Err(self.limit(LimitKind::Steps));
        }
        if self.nodes > l.max_nodes {
            return Err(self.limit(LimitKind::Nodes));
        }
        if let Some(s) = l.max_seconds {
            if self.stats.steps.is_multiple_of(256) && self.start.elapsed().as_secs_f64() > s {
                return Err(self.limit(LimitKind::Time));
            }
        }
        Ok(Some(n))
    }

    fn measure(&self) -> Option<(BigUint, BigUint, BigUint)> {
        if !self.opts.check_measure {
            return None;
        }
        debug_measure(self.th, &self.forest, self.opts.measure_cap)
    }

    /// Rewrites the node at `path` until no rule applies anywhere inside
    /// it. Returns how many formulas now stand in its place.
    ///
    /// With identification steps on, a nested liftable node only has its
    /// children reduced: distributing it would multiply its siblings, while
    /// the parent lifts it once they are reduced.
    fn reduce(&mut self, path: &mut Vec<usize>) -> Result<usize, SolveError> {
        loop {
            for r in [1, 2] {
                if self.step(path, r)?.is_some() {
                    return Ok(0);
                }
            }
            if self.opts.prune {
                if self.step(path, 0)? == Some(0) {
                    return Ok(0);
                }
                let n = node_at(&self.forest, path);
                let cheap = n.children.iter().any(|c| liftable(self.th, c))
                    && n.children.iter().filter(|c| !c.is_leaf()).count() == 1;
                if cheap {
                    let n = self.step(path, 6)?.expect("lift applies");
                    return self.reduce_pieces(path, n);
                }
            }
            let mut i = 0;
            while i < node_at(&self.forest, path).children.len() {
                path.push(i);
                let n = self.reduce(path)?;
                path.pop();
                i += n;
            }
            if self.opts.prune && self.step(path, 0)? == Some(0) {
                return Ok(0);
            }
            for r in [1, 2] {
                if self.step(path, r)?.is_some() {
                    return Ok(0);
                }
            }
            if self.opts.prune {
                if path.len() > 1 && liftable(self.th, node_at(&self.forest, path)) {
                    return Ok(1);
                }
                if let Some(n) = self.step(path, 6)? {
                    return self.reduce_pieces(path, n);
                }
            }
            if self.step(path, 3)?.is_some() || self.step(path, 4)?.is_some() {
                continue;
            }
            if let Some(n) = self.step(path, 5)? {
                return self.reduce_pieces(path, n);
            }
            return Ok(1);
        }
    }

    /// Reduces the `n` consecutive formulas starting at `path`.
    fn reduce_pieces(&mut self, path: &mut Vec<usize>, n: usize) -> Result<usize, SolveError> {
        let base = *path.last().unwrap();
        let mut total = 0;
        for _ in 0..n {
            *path.last_mut().unwrap() = base + total;
            total += self.reduce(path)?;
        }
        *path.last_mut().unwrap() = base;
        Ok(total)
    }
}

fn presolve<T: Theory>(th: &T, w: &WorkingFormula<T::Core>) -> WorkingFormula<T::Core> {
    w.map_cores(&mut |_, c| th.solve(c))
}

fn finish<T: Theory>(th: &T, mut forest: Vec<Node<T::Core>>) -> Vec<Node<T::Core>> {
    for w in &mut forest {
        w.canonicalize();
        w.children = dedup_alpha(th, std::mem::take(&mut w.children));
    }
    dedup_alpha(th, forest)
}

fn check_output<T: Theory>(th: &T, input: &WorkingFormula<T::Core>, out: &[WorkingFormula<T::Core>]) -> Result<(), SolveError> {
    if let Some(w) = out.iter().find(|w| !is_solved(th, w)) {
        return Err(SolveError::Invariant(format!("unsolved formula at fixpoint: {w:?}")));
    }
    let free_in = free_vars(&working_to_formula(input, th));
    let mut seen = BTreeSet::new();
    for w in out {
        if !free_vars(&working_to_formula(w, th)).is_subset(&free_in) {
            return Err(SolveError::Invariant("new free variable".into()));
        }
        for v in w.all_binders() {
            if free_in.contains(&v) || !seen.insert(v) {
                return Err(SolveError::Invariant("binders are not distinct".into()));
            }
        }
    }
    Ok(())
}

/// Rewrites a working formula to a conjunction of solved formulas.
pub fn solve<T: Theory>(
    th: &T,
    vars: &mut Vars,
    w: &WorkingFormula<T::Core>,
    opts: &Options,
) -> Result<SolveResult<T::Core>, SolveError> {
    let start = Instant::now();
    let forest = vec![presolve(th, w)];
    let nodes = w.node_count() as u64;
    let mut s = Solver {
        th,
        vars,
        opts,
        forest,
        stats: Stats { peak_nodes: nodes, ..Stats::default() },
        trace: Vec::new(),
        nodes,
        start,
        free_in: if opts.check_binders { free_vars(&working_to_formula(w, th)) } else { BTreeSet::new() },
    };
    if w.depth() > opts.limits.max_depth {
        return Err(s.limit(LimitKind::Depth));
    }
    s.reduce(&mut vec![0])?;
    let solved = finish(th, s.forest);
    check_output(th, w, &solved)?;
    let mut stats = s.stats;
    stats.elapsed = start.elapsed();
    Ok(SolveResult { solved, trace: opts.trace.then_some(s.trace), stats })
}

/// Applies the recorded steps to `w` from the same variable session state
/// the solver started with, and returns the resulting conjunction.
pub fn replay<T: Theory>(
    th: &T,
    vars: &mut Vars,
    w: &WorkingFormula<T::Core>,
    trace: &[TraceStep],
    fault: Option<Fault>,
) -> Result<Vec<WorkingFormula<T::Core>>, SolveError> {
    let mut forest = vec![presolve(th, w)];
    for s in trace {
        if apply_rule(th, vars, &mut forest, &s.path, s.rule, fault)?.is_none() {
            return Err(SolveError::Invariant(format!("step {} (rule {}) does not apply", s.step, s.rule)));
        }
    }
    Ok(finish(th, forest))
}

/// The truth value of a closed formula from its solved conjunction.
pub fn finalize_closed<T: Theory>(th: &T, solved: &[WorkingFormula<T::Core>]) -> Result<bool, SolveError> {
    for w in solved {
        if !free_vars(&working_to_formula(w, th)).is_empty() {
            return Err(SolveError::NotClosed);
        }
    }
    Ok(solved.is_empty())
}

/// Normalizes, converts and solves an arbitrary formula.
pub fn solve_formula<T: Theory>(
    th: &T,
    vars: &mut Vars,
    f: &Formula,
    opts: &Options,
) -> Result<SolveResult<T::Core>, SolveError> {
    let n = normalize(f, vars);
    let w = to_working(&n, th)?;
    solve(th, vars, &w, opts)
}

/// Decides a sentence.
pub fn decide<T: Theory>(th: &T, vars: &mut Vars, f: &Formula, opts: &Options) -> Result<bool, SolveError> {
    if !free_vars(f).is_empty() {
        return Err(SolveError::NotClosed);
    }
    let r = solve_formula(th, vars, f, opts)?;
    finalize_closed(th, &r.solved)
}

/// A disjunction of solved conjunctions `ex x'. a' & ~(ex y. b) & ...`,
/// each member stored as the body of a solved formula.
#[derive(Clone, Debug, PartialEq)]
pub struct Disjunction<C> {
    pub members: Vec<WorkingFormula<C>>,
    pub stats: Stats,
}

impl<C> Disjunction<C> {
    pub fn to_formula<T: Theory<Core = C>>(&self, th: &T) -> Formula {
        Formula::or_all(self.members.iter().map(|m| {
            let parts = std::iter::once(th.core_formula(&m.core)).chain(m.children.iter().map(|c| working_to_formula(c, th)));
            Formula::exists(m.bound.clone(), Formula::and_all(parts))
        }))
    }

    pub fn print<T: Theory<Core = C>>(&self, th: &T, vars: &Vars) -> String {
        if self.members.is_empty() {
            return "false".into();
        }
        self.members
            .iter()
            .map(|m| {
                let mut s = String::new();
                if !m.bound.is_empty() {
                    s.push_str("ex ");
                    s.push_str(&m.bound.iter().map(|&v| vars.name(v)).collect::<Vec<_>>().join(" "));
                    s.push_str(". ");
                }
                let mut parts = vec![th.print_core(&m.core, vars)];
                for c in &m.children {
                    parts.push(format!("~{}", paren(&print_formula(&working_to_formula(c, th), th.signature(), vars))));
                }
                if parts.len() > 1 && parts[0] == "true" {
                    parts.remove(0);
                }
                s.push_str(&parts.join(" & "));
                s
            })
            .collect::<Vec<_>>()
            .join("\n| ")
    }
}

fn paren(s: &str) -> String {
    let inner = s.strip_prefix('~').unwrap_or(s);
    if inner.starts_with('(') {
        inner.to_string()
    } else {
        format!("({inner})")
    }
}

/// Solves `~psi` and reads the result as a disjunction of solved
/// conjunctions equivalent to `psi`.
pub fn present_solutions<T: Theory>(
    th: &T,
    vars: &mut Vars,
    psi: &Formula,
    opts: &Options,
) -> Result<Disjunction<T::Core>, SolveError> {
    let r = solve_formula(th, vars, &Formula::not(psi.clone()), opts)?;
    Ok(Disjunction { members: r.solved, stats: r.stats })
}
