//! From arbitrary formulas to normalized and working formulas.

use crate::formula::{fresh_rename, Conj, FlatAtom, Formula, NormalizedFormula, Node, Term, Var, Vars};
use crate::theory::{Theory, TheoryError};

/// Makes every atomic formula flat by naming nested terms with new
/// existentially quantified variables, introduced left to right.
pub fn flatten(f: &Formula, vars: &mut Vars) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Eq(s, t) => {
            let mut fresh = Vec::new();
            let mut atoms = Vec::new();
            match (s, t) {
                (Term::Var(_), Term::Var(_)) => return f.clone(),
                (Term::Var(x), Term::App(g, args)) | (Term::App(g, args), Term::Var(x)) => {
                    let a = name_args(args, vars, &mut fresh, &mut atoms);
                    atoms.insert(0, FlatAtom::EqApp(*x, *g, a));
                }
                (Term::App(..), Term::App(..)) => {
                    let z = vars.fresh("t");
                    fresh.push(z);
                    for side in [s, t] {
                        let Term::App(g, args) = side else { unreachable!() };
                        let a = name_args(args, vars, &mut fresh, &mut atoms);
                        atoms.push(FlatAtom::EqApp(z, *g, a));
                    }
                    let (tops, rest): (Vec<_>, Vec<_>) =
                        atoms.into_iter().partition(|x| matches!(x, FlatAtom::EqApp(v, ..) if *v == z));
                    atoms = tops.into_iter().chain(rest).collect();
                }
            }
            wrap(fresh, atoms)
        }
        Formula::Rel(r, ts) => {
            let mut fresh = Vec::new();
            let mut atoms = Vec::new();
            let a = name_args(ts, vars, &mut fresh, &mut atoms);
            atoms.insert(0, FlatAtom::Rel(*r, a));
            wrap(fresh, atoms)
        }
        Formula::Not(g) => Formula::not(flatten(g, vars)),
        Formula::And(a, b) => Formula::and(flatten(a, vars), flatten(b, vars)),
        Formula::Or(a, b) => Formula::or(flatten(a, vars), flatten(b, vars)),
        Formula::Implies(a, b) => Formula::implies(flatten(a, vars), flatten(b, vars)),
        Formula::Iff(a, b) => Formula::iff(flatten(a, vars), flatten(b, vars)),
        Formula::Exists(vs, g) => Formula::exists(vs.clone(), flatten(g, vars)),
        Formula::Forall(vs, g) => Formula::forall(vs.clone(), flatten(g, vars)),
    }
}

fn wrap(fresh: Vec<Var>, atoms: Vec<FlatAtom>) -> Formula {
    let body = Formula::and_all(atoms.iter().map(FlatAtom::to_formula));
    if fresh.is_empty() {
        body
    } else {
        Formula::exists(fresh, body)
    }
}

fn name_args(args: &[Term], vars: &mut Vars, fresh: &mut Vec<Var>, atoms: &mut Vec<FlatAtom>) -> Vec<Var> {
    let mut out = Vec::with_capacity(args.len());
    for t in args {
        out.push(match t {
            Term::Var(v) => *v,
            Term::App(g, inner) => {
                let z = vars.fresh("t");
                fresh.push(z);
                let slot = atoms.len();
                atoms.push(FlatAtom::True);
                let a = name_args(inner, vars, fresh, atoms);
                atoms[slot] = FlatAtom::EqApp(z, *g, a);
                z
            }
        });
    }
    out
}

/// Rewrites `|`, `->`, `<->` and `all` in terms of `~`, `&` and `ex`. A chain
/// of disjunctions becomes a single negated conjunction.
pub fn to_core(f: &Formula) -> Formula {
    use Formula as F;
    match f {
        F::True | F::False | F::Eq(..) | F::Rel(..) => f.clone(),
        F::Not(g) => F::not(to_core(g)),
        F::And(a, b) => F::and(to_core(a), to_core(b)),
        F::Or(..) => {
            let mut ds = Vec::new();
            disjuncts(f, &mut ds);
            F::not(F::and_all(ds.into_iter().map(|d| F::not(to_core(d)))))
        }
        F::Implies(a, b) => F::not(F::and(to_core(a), F::not(to_core(b)))),
        F::Iff(a, b) => {
            let (a, b) = (to_core(a), to_core(b));
            F::and(F::not(F::and(a.clone(), F::not(b.clone()))), F::not(F::and(b, F::not(a))))
        }
        F::Exists(vs, g) => F::exists(vs.clone(), to_core(g)),
        F::Forall(vs, g) => F::not(F::exists(vs.clone(), F::not(to_core(g)))),
    }
}

fn disjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::Or(a, b) => {
            disjuncts(a, out);
            disjuncts(b, out);
        }
        _ => out.push(f),
    }
}

/// Equivalent normalized formula: flat atoms, core connectives, a leading
/// negation, distinct binders, quantifiers lifted over conjunctions and
/// grouped, and the missing `ex .` and `true` parts inserted.
pub fn normalize(f: &Formula, vars: &mut Vars) -> NormalizedFormula {
    let mut g = to_core(&flatten(f, vars));
    if !matches!(g, Formula::Not(_)) {
        g = Formula::not(Formula::exists(vec![], Formula::and(Formula::True, Formula::not(g))));
    }
    let g = fresh_rename(&g, vars);
    let Formula::Not(body) = &g else { unreachable!() };
    node_of(body)
}

/// The node for `~body`, where `body` uses only `~`, `&`, `ex` and flat atoms.
fn node_of(body: &Formula) -> NormalizedFormula {
    let mut node = Node { bound: Vec::new(), core: Conj::truth(), children: Vec::new() };
    let mut atoms = Vec::new();
    collect(body, &mut node, &mut atoms);
    node.core = Conj::new(atoms);
    node
}

fn collect(f: &Formula, node: &mut NormalizedFormula, atoms: &mut Vec<FlatAtom>) {
    match f {
        Formula::And(a, b) => {
            collect(a, node, atoms);
            collect(b, node, atoms);
        }
        Formula::Exists(vs, g) => {
            node.bound.extend(vs.iter().copied());
            collect(g, node, atoms);
        }
        Formula::Not(g) => match g.as_ref() {
            Formula::Not(h) => collect(h, node, atoms),
            _ => node.children.push(node_of(g)),
        },
        _ => atoms.push(FlatAtom::from_formula(f).expect("flat atom after flattening")),
    }
}

/// Replaces every flat core by the theory's element of `A`.
pub fn to_working<T: Theory>(n: &NormalizedFormula, th: &T) -> Result<Node<T::Core>, TheoryError> {
    n.try_map_cores(&mut |c| th.flat_to_core(c))
}

/// The plain formula read of a working formula.
pub fn working_to_formula<T: Theory>(w: &Node<T::Core>, th: &T) -> Formula {
    let parts = std::iter::once(th.core_formula(&w.core)).chain(w.children.iter().map(|c| working_to_formula(c, th)));
    let body = Formula::and_all(parts);
    Formula::not(Formula::exists(w.bound.clone(), body))
}
