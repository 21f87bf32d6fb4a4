//! Brute-force decision procedures used to cross-check the solver.
//!
//! Nothing here calls the engine or the theory solvers: the oracles work
//! directly on formulas.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::formula::{free_vars, Formula, Signature, Term, TheoryTag, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("the formula has free variables")]
    FreeVariables,
    #[error("symbol `{0}` is not supported by this oracle")]
    Symbol(String),
    #[error("unbound variable {0}")]
    Unbound(Var),
}

fn closed(f: &Formula) -> Result<(), OracleError> {
    if free_vars(f).is_empty() {
        Ok(())
    } else {
        Err(OracleError::FreeVariables)
    }
}

/// Truth of an equality sentence, evaluated over `{0, ..., size - 1}`.
pub fn eq_eval_in_domain(f: &Formula, size: usize) -> Result<bool, OracleError> {
    closed(f)?;
    let mut env = HashMap::new();
    eq_eval(f, size, &mut env)
}

/// Truth of an equality sentence over an infinite domain: a domain with one
/// more element than the number of quantified variables is enough.
pub fn eq_oracle(f: &Formula) -> Result<bool, OracleError> {
    eq_eval_in_domain(f, f.quantified_count() + 1)
}

fn eq_eval(f: &Formula, size: usize, env: &mut HashMap<Var, usize>) -> Result<bool, OracleError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Eq(Term::Var(a), Term::Var(b)) => env[a] == env[b],
        Formula::Eq(..) | Formula::Rel(..) => return Err(OracleError::Symbol("non-variable term".into())),
        Formula::Not(g) => !eq_eval(g, size, env)?,
        Formula::And(a, b) => eq_eval(a, size, env)? && eq_eval(b, size, env)?,
        Formula::Or(a, b) => eq_eval(a, size, env)? || eq_eval(b, size, env)?,
        Formula::Implies(a, b) => !eq_eval(a, size, env)? || eq_eval(b, size, env)?,
        Formula::Iff(a, b) => eq_eval(a, size, env)? == eq_eval(b, size, env)?,
        Formula::Exists(vs, g) => eq_quant(vs, g, size, env, true)?,
        Formula::Forall(vs, g) => eq_quant(vs, g, size, env, false)?,
    })
}

fn eq_quant(vs: &[Var], g: &Formula, size: usize, env: &mut HashMap<Var, usize>, exists: bool) -> Result<bool, OracleError> {
    let Some((&v, rest)) = vs.split_first() else { return eq_eval(g, size, env) };
    let saved = env.get(&v).copied();
    let mut result = !exists;
    for d in 0..size {
        env.insert(v, d);
        if eq_quant(rest, g, size, env, exists)? == exists {
            result = exists;
            break;
        }
    }
    match saved {
        Some(s) => env.insert(v, s),
        None => env.remove(&v),
    };
    Ok(result)
}

/// A linear expression `sum c_i * v_i + k` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Lin {
    coeffs: BTreeMap<Var, BigRational>,
    k: BigRational,
}

impl Lin {
    fn constant(k: BigRational) -> Lin {
        Lin { coeffs: BTreeMap::new(), k }
    }

    fn add(&self, o: &Lin, sign: &BigRational) -> Lin {
        let mut r = self.clone();
        for (v, c) in &o.coeffs {
            let e = r.coeffs.entry(*v).or_insert_with(BigRational::zero);
            *e += c * sign;
            if e.is_zero() {
                r.coeffs.remove(v);
            }
        }
        r.k += &o.k * sign;
        r
    }

    fn scale(&self, s: &BigRational) -> Lin {
        if s.is_zero() {
            return Lin::constant(BigRational::zero());
        }
        Lin { coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * s)).collect(), k: &self.k * s }
    }

    /// Replaces `x` by `e`.
    fn subst(&self, x: Var, e: &Lin) -> Lin {
        match self.coeffs.get(&x) {
            None => self.clone(),
            Some(c) => {
                let mut r = self.clone();
                let c = c.clone();
                r.coeffs.remove(&x);
                r.add(e, &c)
            }
        }
    }

    /// Scaled so that the first coefficient (or the constant) is 1.
    fn normalized(self) -> Lin {
        let lead = self.coeffs.values().next().cloned().unwrap_or_else(|| self.k.clone());
        if lead.is_zero() {
            return self;
        }
        self.scale(&lead.recip())
    }
}

/// `expr = 0` when `eq`, `expr != 0` otherwise.
type Lit = (Lin, bool);
type Dnf = Vec<Vec<Lit>>;

struct RaSyms {
    plus: Option<crate::formula::Sym>,
    neg: Option<crate::formula::Sym>,
    zero: Option<crate::formula::Sym>,
    one: Option<crate::formula::Sym>,
}

impl RaSyms {
    fn of(sig: &Signature) -> RaSyms {
        RaSyms { plus: sig.function("+"), neg: sig.function("-"), zero: sig.function("0"), one: sig.function("1") }
    }

    fn lin(&self, t: &Term, sig: &Signature) -> Result<Lin, OracleError> {
        match t {
            Term::Var(v) => {
                Ok(Lin { coeffs: [(*v, BigRational::one())].into_iter().collect(), k: BigRational::zero() })
            }
            Term::App(sym, args) => {
                let s = Some(*sym);
                if s == self.plus {
                    Ok(self.lin(&args[0], sig)?.add(&self.lin(&args[1], sig)?, &BigRational::one()))
                } else if s == self.neg {
                    Ok(self.lin(&args[0], sig)?.scale(&-BigRational::one()))
                } else if s == self.zero {
                    Ok(Lin::constant(BigRational::zero()))
                } else if s == self.one {
                    Ok(Lin::constant(BigRational::one()))
                } else {
                    Err(OracleError::Symbol(sig.fun(*sym).name.clone()))
                }
            }
        }
    }
}

fn lit(e: Lin, eq: bool) -> Option<Vec<Lit>> {
    // Some(vec![]) is true, None is false.
    if e.coeffs.is_empty() {
        return (e.k.is_zero() == eq).then(Vec::new);
    }
    Some(vec![(e.normalized(), eq)])
}

fn conj(mut a: Vec<Lit>, b: &[Lit]) -> Option<Vec<Lit>> {
    for l in b {
        if a.iter().any(|m| m.0 == l.0 && m.1 != l.1) {
            return None;
        }
        if !a.contains(l) {
            a.push(l.clone());
        }
    }
    a.sort();
    Some(a)
}

fn dnf_and(a: &Dnf, b: &Dnf) -> Dnf {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            if let Some(c) = conj(x.clone(), y) {
                out.push(c);
            }
        }
    }
    tidy(out)
}

fn tidy(mut d: Dnf) -> Dnf {
    if d.iter().any(Vec::is_empty) {
        return vec![vec![]];
    }
    d.sort();
    d.dedup();
    d
}

fn dnf_not(d: &Dnf) -> Dnf {
    let mut acc: Dnf = vec![vec![]];
    for c in d {
        let neg: Dnf = c.iter().map(|(e, eq)| vec![(e.clone(), !eq)]).collect();
        acc = dnf_and(&acc, &neg);
        if acc.is_empty() {
            break;
        }
    }
    acc
}

/// Eliminates `x` from `ex x. c` for a conjunction of literals over the
/// rationals.
fn eliminate(x: Var, c: &[Lit]) -> Option<Vec<Lit>> {
    if let Some(i) = c.iter().position(|(e, eq)| *eq && e.coeffs.contains_key(&x)) {
        let e = &c[i].0;
        let a = e.coeffs[&x].clone();
        let mut rest = e.clone();
        rest.coeffs.remove(&x);
        let sol = rest.scale(&(-a.recip()));
        let mut out = Vec::new();
        for (j, (f, eq)) in c.iter().enumerate() {
            if j != i {
                out = conj(out, &lit(f.subst(x, &sol), *eq)?)?;
            }
        }
        Some(out)
    } else {
        // Finitely many excluded values: always satisfiable in an infinite field.
        Some(c.iter().filter(|(e, _)| !e.coeffs.contains_key(&x)).cloned().collect())
    }
}

fn ra_qe(f: &Formula, sig: &Signature, syms: &RaSyms) -> Result<Dnf, OracleError> {
    Ok(match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Eq(s, t) => {
            let e = syms.lin(s, sig)?.add(&syms.lin(t, sig)?, &-BigRational::one());
            lit(e, true).into_iter().collect()
        }
        Formula::Rel(r, _) => return Err(OracleError::Symbol(sig.rel(*r).name.clone())),
        Formula::Not(g) => dnf_not(&ra_qe(g, sig, syms)?),
        Formula::And(a, b) => dnf_and(&ra_qe(a, sig, syms)?, &ra_qe(b, sig, syms)?),
        Formula::Or(a, b) => tidy([ra_qe(a, sig, syms)?, ra_qe(b, sig, syms)?].concat()),
        Formula::Implies(a, b) => tidy([dnf_not(&ra_qe(a, sig, syms)?), ra_qe(b, sig, syms)?].concat()),
        Formula::Iff(a, b) => {
            let (a, b) = (ra_qe(a, sig, syms)?, ra_qe(b, sig, syms)?);
            tidy([dnf_and(&a, &b), dnf_and(&dnf_not(&a), &dnf_not(&b))].concat())
        }
        Formula::Exists(vs, g) => ra_exists(vs, ra_qe(g, sig, syms)?),
        Formula::Forall(vs, g) => dnf_not(&ra_exists(vs, dnf_not(&ra_qe(g, sig, syms)?))),
    })
}

fn ra_exists(vs: &[Var], mut d: Dnf) -> Dnf {
    for &v in vs.iter().rev() {
        d = tidy(d.iter().filter_map(|c| eliminate(v, c)).collect());
    }
    d
}

/// Truth of a sentence of additive rationals, by quantifier elimination
/// over disjunctive normal forms with exact arithmetic.
pub fn ra_oracle(f: &Formula, sig: &Signature) -> Result<bool, OracleError> {
    closed(f)?;
    if sig.tag != TheoryTag::Ra {
        return Err(OracleError::Symbol("non-Ra signature".into()));
    }
    let d = ra_qe(f, sig, &RaSyms::of(sig))?;
    Ok(!d.is_empty())
}

/// Evaluates a quantifier-free formula of additive rationals.
fn ra_eval_qf(f: &Formula, sig: &Signature, syms: &RaSyms, env: &HashMap<Var, BigRational>) -> Result<bool, OracleError> {
    let ev = |e: &Lin| -> Result<BigRational, OracleError> {
        let mut s = e.k.clone();
        for (v, c) in &e.coeffs {
            s += c * env.get(v).ok_or(OracleError::Unbound(*v))?;
        }
        Ok(s)
    };
    let r = |g| ra_eval_qf(g, sig, syms, env);
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Eq(s, t) => ev(&syms.lin(s, sig)?)? == ev(&syms.lin(t, sig)?)?,
        Formula::Not(g) => !r(g)?,
        Formula::And(a, b) => r(a)? && r(b)?,
        Formula::Or(a, b) => r(a)? || r(b)?,
        Formula::Implies(a, b) => !r(a)? || r(b)?,
        Formula::Iff(a, b) => r(a)? == r(b)?,
        Formula::Rel(..) | Formula::Exists(..) | Formula::Forall(..) => {
            return Err(OracleError::Symbol("quantifier inside the matrix".into()))
        }
    })
}

/// Random-sampling check for sentences `ex x. m` or `all x. m` with a
/// quantifier-free matrix: a witness (or counterexample) settles the
/// sentence; otherwise the result is inconclusive.
pub fn ra_sample(f: &Formula, sig: &Signature, rng: &mut impl Rng, tries: usize) -> Result<Option<bool>, OracleError> {
    closed(f)?;
    let (exists, mut body) = match f {
        Formula::Exists(..) => (true, f),
        Formula::Forall(..) => (false, f),
        _ => return Ok(Some(ra_eval_qf(f, sig, &RaSyms::of(sig), &HashMap::new())?)),
    };
    let mut vs = Vec::new();
    while let (Formula::Exists(v, g), true) | (Formula::Forall(v, g), false) = (body, exists) {
        vs.extend(v.iter().copied());
        body = g;
    }
    let syms = RaSyms::of(sig);
    for _ in 0..tries {
        let env: HashMap<Var, BigRational> = vs
            .iter()
            .map(|&v| (v, BigRational::new(rng.gen_range(-3i64..=3).into(), rng.gen_range(1i64..=2).into())))
            .collect();
        match ra_eval_qf(body, sig, &syms, &env) {
            Ok(b) if b == exists => return Ok(Some(exists)),
            Ok(_) => {}
            Err(_) => return Ok(None),
        }
    }
    Ok(None)
}

/// A finite ground term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundTree {
    pub f: String,
    pub args: Vec<GroundTree>,
}

impl GroundTree {
    pub fn leaf(f: &str) -> GroundTree {
        GroundTree { f: f.to_string(), args: vec![] }
    }

    pub fn app(f: &str, args: Vec<GroundTree>) -> GroundTree {
        GroundTree { f: f.to_string(), args }
    }
}

impl fmt::Display for GroundTree {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{}", self.f)?;
        if !self.args.is_empty() {
            write!(out, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(out, ", ")?;
                }
                write!(out, "{a}")?;
            }
            write!(out, ")")?;
        }
        Ok(())
    }
}

/// Union-find over term nodes, unifying without occurs check.
#[derive(Clone, Default)]
struct TermGraph {
    parent: Vec<usize>,
    fun: Vec<Option<(String, Vec<usize>)>>,
    var_node: HashMap<Var, usize>,
}

impl TermGraph {
    fn new_node(&mut self, f: Option<(String, Vec<usize>)>) -> usize {
        self.parent.push(self.parent.len());
        self.fun.push(f);
        self.parent.len() - 1
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn var(&mut self, v: Var) -> usize {
        if let Some(&n) = self.var_node.get(&v) {
            return n;
        }
        let n = self.new_node(None);
        self.var_node.insert(v, n);
        n
    }

    fn ground(&mut self, t: &GroundTree) -> usize {
        let args = t.args.iter().map(|a| self.ground(a)).collect();
        self.new_node(Some((t.f.clone(), args)))
    }

    fn term(&mut self, t: &Term, sig: &Signature) -> usize {
        match t {
            Term::Var(v) => self.var(*v),
            Term::App(s, args) => {
                let args = args.iter().map(|a| self.term(a, sig)).collect();
                self.new_node(Some((sig.fun(*s).name.clone(), args)))
            }
        }
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let mut work = vec![(a, b)];
        while let Some((a, b)) = work.pop() {
            let (a, b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            match (self.fun[a].clone(), self.fun[b].clone()) {
                (Some((f, xs)), Some((g, ys))) => {
                    if f != g || xs.len() != ys.len() {
                        return false;
                    }
                    self.parent[b] = a;
                    work.extend(xs.into_iter().zip(ys));
                }
                (None, _) => self.parent[a] = b,
                (Some(_), None) => self.parent[b] = a,
            }
        }
        true
    }
}

/// Evaluates a disjunction of solved conjunctions over finite or infinite
/// trees with its free variables bound to ground trees.
///
/// An existential block `ex v. eqs & ~b1 & ...` holds when its equations are
/// compatible with the context and no negated block is; this relies on the
/// equations fixing the values of the quantified variables.
pub fn eval_solved_on_ground(
    f: &Formula,
    sig: &Signature,
    binding: &HashMap<Var, GroundTree>,
) -> Result<bool, OracleError> {
    let mut g = TermGraph::default();
    for v in free_vars(f) {
        let t = binding.get(&v).ok_or(OracleError::Unbound(v))?;
        let n = g.var(v);
        let m = g.ground(t);
        g.union(n, m);
    }
    Ok(eval_tree(f, sig, &g))
}

fn eval_tree(f: &Formula, sig: &Signature, g: &TermGraph) -> bool {
    match f {
        Formula::Or(a, b) => eval_tree(a, sig, g) || eval_tree(b, sig, g),
        Formula::Not(h) => !eval_tree(h, sig, g),
        _ => {
            let mut conjuncts = Vec::new();
            block(f, &mut conjuncts);
            let mut g = g.clone();
            let mut negs = Vec::new();
            let mut others = Vec::new();
            for c in conjuncts {
                match c {
                    Formula::True => {}
                    Formula::False => return false,
                    Formula::Eq(s, t) => {
                        let (a, b) = (g.term(s, sig), g.term(t, sig));
                        if !g.union(a, b) {
                            return false;
                        }
                    }
                    Formula::Not(h) => negs.push(h.as_ref()),
                    other => others.push(other),
                }
            }
            others.into_iter().all(|h| eval_tree(h, sig, &g)) && negs.into_iter().all(|h| !eval_tree(h, sig, &g))
        }
    }
}

fn block<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::Exists(_, g) => block(g, out),
        Formula::And(a, b) => {
            block(a, out);
            block(b, out);
        }
        _ => out.push(f),
    }
}

/// Positions of the two games.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Position {
    One(u64),
    Two(u64, u64),
}

pub fn game_moves(p: Position) -> Vec<Position> {
    match p {
        Position::One(i) => (1..=2).filter(|d| i >= *d).map(|d| Position::One(i - d)).collect(),
        Position::Two(i, j) => {
            let mut out = Vec::new();
            if i % 2 == 1 {
                out.push(Position::Two(i, j + 1));
            } else if j > 0 {
                out.push(Position::Two(i, j - 1));
            }
            if j % 2 == 1 {
                out.push(Position::Two(i + 1, j));
            } else if i > 0 {
                out.push(Position::Two(i - 1, j));
            }
            out
        }
    }
}

/// Whether the player to move at `p` can force a win within `k` moves.
pub fn k_winning(p: Position, k: u32, memo: &mut HashMap<(Position, u32), bool>) -> bool {
    if k == 0 {
        return false;
    }
    if let Some(&w) = memo.get(&(p, k)) {
        return w;
    }
    let w = game_moves(p).into_iter().any(|q| game_moves(q).into_iter().all(|r| k_winning(r, k - 1, memo)));
    memo.insert((p, k), w);
    w
}

/// The `k`-winning positions of a game, with components up to `bound`.
pub fn game_brute_force(game: u8, k: u32, bound: u64) -> Vec<Position> {
    let mut memo = HashMap::new();
    let all: Vec<Position> = match game {
        1 => (0..=bound).map(Position::One).collect(),
        _ => (0..=bound).flat_map(|i| (0..=bound).map(move |j| Position::Two(i, j))).collect(),
    };
    all.into_iter().filter(|&p| k_winning(p, k, &mut memo)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Vars;
    use crate::syntax::parse_formula;

    fn eq_sentence(text: &str) -> Formula {
        parse_formula(text, &Signature::eq(), &mut Vars::new()).unwrap()
    }

    fn ra_true(text: &str) -> bool {
        let sig = Signature::ra();
        ra_oracle(&parse_formula(text, &sig, &mut Vars::new()).unwrap(), &sig).unwrap()
    }

    /// `all x1..xn. ex y. ~(y = x1) & ... & ~(y = xn)`
    fn infinite_domain_axiom(n: usize) -> Formula {
        let xs: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let body: Vec<String> = xs.iter().map(|x| format!("~(y = {x})")).collect();
        eq_sentence(&format!("all {}. ex y. {}", xs.join(" "), body.join(" & ")))
    }

    #[test]
    fn eq_domain_size_is_adequate_for_axioms() {
        for n in 1..=5 {
            assert!(eq_oracle(&infinite_domain_axiom(n)).unwrap(), "n = {n}");
            // One element fewer would refute it.
            assert!(!eq_eval_in_domain(&infinite_domain_axiom(n), n).unwrap());
        }
    }

    #[test]
    fn eq_examples() {
        assert!(eq_oracle(&eq_sentence("all x. ex y. ~(x = y)")).unwrap());
        assert!(!eq_oracle(&eq_sentence("ex x. all y. x = y")).unwrap());
        assert!(eq_oracle(&Formula::True).unwrap());
        assert_eq!(eq_oracle(&eq_sentence("x = x")), Err(OracleError::FreeVariables));
    }

    #[test]
    fn ra_examples() {
        assert!(ra_true("~(0 = 1)"));
        assert!(ra_true("all x. ex y. y + y = x"));
        assert!(!ra_true("ex x. x = 1 & x = 0"));
        assert!(ra_true("all x y. x + y = y + x"));
        assert!(!ra_true("all x. ex y. ~(y = x) & y + y = x + x"));
        assert!(ra_true("ex x. ~(x = 0) & ~(x = 1) & ~(x + x = 1)"));
        assert!(!ra_true("all x. x + x = x"));
    }

    #[test]
    fn ra_sampling_agrees_when_conclusive() {
        use rand::SeedableRng;
        let sig = Signature::ra();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let f = parse_formula("ex x y. x + y = 1 & ~(x = y)", &sig, &mut Vars::new()).unwrap();
        assert_eq!(ra_sample(&f, &sig, &mut rng, 200).unwrap(), Some(true));
        let g = parse_formula("all x. x + x = x", &sig, &mut Vars::new()).unwrap();
        assert_eq!(ra_sample(&g, &sig, &mut rng, 200).unwrap(), Some(false));
    }

    #[test]
    fn eq_domain_one_larger_changes_nothing() {
        use crate::gen::{random_sentence, GenConfig};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut vs = Vars::new();
        for _ in 0..200 {
            let f = random_sentence(&Signature::eq(), &mut vs, &mut rng, GenConfig::default());
            let q = f.quantified_count();
            assert_eq!(eq_eval_in_domain(&f, q + 1), eq_eval_in_domain(&f, q + 2));
        }
    }

    #[test]
    fn ra_sampling_never_contradicts_elimination() {
        use crate::gen::{random_formula, GenConfig};
        use rand::SeedableRng;
        let sig = Signature::ra();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let cfg = GenConfig { max_size: 25, max_qdepth: 0, max_bound: 0 };
        let mut conclusive = 0;
        for i in 0..300 {
            let mut vs = Vars::new();
            let xs = vec![vs.named("x"), vs.named("y")];
            let m = random_formula(&sig, &mut vs, &mut rng, cfg, &xs);
            let f = if i % 2 == 0 { Formula::exists(xs, m) } else { Formula::forall(xs, m) };
            if let Some(b) = ra_sample(&f, &sig, &mut rng, 50).unwrap() {
                conclusive += 1;
                assert_eq!(ra_oracle(&f, &sig).unwrap(), b);
            }
        }
        assert!(conclusive > 100, "{conclusive}");
    }

    #[test]
    fn ground_unifier_handles_cycles() {
        let sig = Signature::trees(&[("0", 0), ("s", 1)]);
        let mut vs = Vars::new();
        let f = parse_formula("ex u. x = s(u) & u = 0", &sig, &mut vs).unwrap();
        let x = f.clone();
        let xv = *free_vars(&x).iter().next().unwrap();
        let one = GroundTree::app("s", vec![GroundTree::leaf("0")]);
        assert!(eval_solved_on_ground(&f, &sig, &[(xv, one)].into_iter().collect()).unwrap());
        assert!(!eval_solved_on_ground(&f, &sig, &[(xv, GroundTree::leaf("0"))].into_iter().collect()).unwrap());
        let g = parse_formula("ex u. u = s(u) & x = u", &sig, &mut vs).unwrap();
        let xv = *free_vars(&g).iter().next().unwrap();
        assert!(!eval_solved_on_ground(&g, &sig, &[(xv, GroundTree::leaf("0"))].into_iter().collect()).unwrap());
        assert!(eval_solved_on_ground(&g, &sig, &HashMap::new()).is_err());
    }

    #[test]
    fn game_one_sets() {
        let ones = |v: &[u64]| v.iter().map(|&i| Position::One(i)).collect::<Vec<_>>();
        assert_eq!(game_brute_force(1, 0, 30), vec![]);
        assert_eq!(game_brute_force(1, 1, 30), ones(&[1, 2]));
        assert_eq!(game_brute_force(1, 2, 30), ones(&[1, 2, 4, 5]));
    }

    #[test]
    fn game_two_one_winning() {
        assert_eq!(game_brute_force(2, 1, 8), vec![Position::Two(0, 1), Position::Two(1, 0)]);
    }

    #[test]
    fn winning_sets_grow_with_k() {
        for g in [1, 2] {
            for k in 0..5 {
                let a = game_brute_force(g, k, 8);
                let b = game_brute_force(g, k + 1, 8);
                assert!(a.iter().all(|p| b.contains(p)));
            }
        }
    }
}
