//! The theory of equality over an infinite domain.
//!
//! A solved core is a set of equations `x = y` with `x` greater than `y`,
//! where every left-hand side (the leader) occurs exactly once. Each class of
//! equal variables becomes a star centred on its least variable.

use std::collections::HashMap;

use crate::formula::{Conj, FlatAtom, Formula, Signature, TheoryTag, Var, Vars};
use crate::theory::{check_rank, sorted, Decomposition, Theory, TheoryError};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EqCore {
    False,
    /// Sorted, without duplicates. Empty means `true`.
    Eqs(Vec<(Var, Var)>),
}

impl EqCore {
    pub fn new(mut eqs: Vec<(Var, Var)>) -> EqCore {
        eqs.sort();
        eqs.dedup();
        EqCore::Eqs(eqs)
    }
}

#[derive(Clone, Debug)]
pub struct EqTheory {
    sig: Signature,
}

impl Default for EqTheory {
    fn default() -> Self {
        EqTheory { sig: Signature::eq() }
    }
}

impl EqTheory {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Union-find keyed by variable, with the least variable as representative.
pub(crate) fn classes(eqs: &[(Var, Var)]) -> HashMap<Var, Var> {
    let mut parent: HashMap<Var, Var> = HashMap::new();
    fn find(p: &mut HashMap<Var, Var>, v: Var) -> Var {
        let mut r = v;
        while let Some(&q) = p.get(&r) {
            if q == r {
                break;
            }
            r = q;
        }
        let mut c = v;
        while c != r {
            let next = p[&c];
            p.insert(c, r);
            c = next;
        }
        r
    }
    for &(x, y) in eqs {
        parent.entry(x).or_insert(x);
        parent.entry(y).or_insert(y);
        let (a, b) = (find(&mut parent, x), find(&mut parent, y));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            parent.insert(hi, lo);
        }
    }
    let keys: Vec<Var> = parent.keys().copied().collect();
    keys.into_iter().map(|k| (k, find(&mut parent, k))).collect()
}

/// Solves a conjunction of variable equations.
pub fn eq_solve(c: &Conj) -> Result<EqCore, TheoryError> {
    let th = EqTheory::new();
    Ok(th.solve(&th.flat_to_core(c)?))
}

fn is_solved(eqs: &[(Var, Var)]) -> bool {
    let mut leaders: Vec<Var> = eqs.iter().map(|e| e.0).collect();
    leaders.sort();
    let distinct = leaders.windows(2).all(|w| w[0] != w[1]);
    distinct && eqs.iter().all(|&(x, y)| x > y && leaders.binary_search(&y).is_err())
}

impl Theory for EqTheory {
    type Core = EqCore;

    fn tag(&self) -> TheoryTag {
        TheoryTag::Eq
    }

    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn psi_description(&self) -> &'static str {
        "the formula x = x with x a variable: every variable has infinitely many values"
    }

    fn flat_to_core(&self, atoms: &Conj) -> Result<EqCore, TheoryError> {
        let mut eqs = Vec::new();
        for a in &atoms.0 {
            match a {
                FlatAtom::True => {}
                FlatAtom::False => return Ok(EqCore::False),
                FlatAtom::EqVar(x, y) => eqs.push((*x, *y)),
                FlatAtom::EqApp(_, s, _) => return Err(TheoryError::ForeignSymbol(format!("function #{}", s.0))),
                FlatAtom::Rel(r, _) => return Err(TheoryError::ForeignSymbol(format!("relation #{}", r.0))),
            }
        }
        Ok(EqCore::new(eqs))
    }

    fn true_core(&self) -> EqCore {
        EqCore::Eqs(vec![])
    }

    fn false_core(&self) -> EqCore {
        EqCore::False
    }

    fn is_true(&self, c: &EqCore) -> bool {
        matches!(c, EqCore::Eqs(e) if e.is_empty())
    }

    fn is_false(&self, c: &EqCore) -> bool {
        *c == EqCore::False
    }

    fn conjoin(&self, a: &EqCore, b: &EqCore) -> EqCore {
        match (a, b) {
            (EqCore::Eqs(x), EqCore::Eqs(y)) => EqCore::new(x.iter().chain(y).copied().collect()),
            _ => EqCore::False,
        }
    }

    fn solve(&self, c: &EqCore) -> EqCore {
        let EqCore::Eqs(eqs) = c else { return EqCore::False };
        if is_solved(eqs) {
            return c.clone();
        }
        let reps = classes(eqs);
        EqCore::new(reps.into_iter().filter(|(v, r)| v != r).collect())
    }

    fn decompose(&self, x: &[Var], c: &EqCore) -> Result<Decomposition<EqCore>, TheoryError> {
        check_rank(x, &self.core_vars(c))?;
        let EqCore::Eqs(eqs) = self.solve(c) else { return Ok(Decomposition::of_false(self)) };
        let (third, first): (Vec<_>, Vec<_>) = eqs.into_iter().partition(|e| x.contains(&e.0));
        let leaders: Vec<Var> = third.iter().map(|e| e.0).collect();
        Ok(Decomposition {
            x_prime: vec![],
            a_prime: EqCore::new(first),
            x_dprime: sorted(x.iter().copied().filter(|v| !leaders.contains(v)).collect()),
            a_dprime: self.true_core(),
            x_tprime: sorted(leaders),
            a_tprime: EqCore::new(third),
        })
    }

    fn in_a_prime(&self, x: &[Var], c: &EqCore) -> bool {
        x.is_empty()
            && match c {
                EqCore::False => true,
                EqCore::Eqs(e) => is_solved(e),
            }
    }

    fn in_a_dprime(&self, _x: &[Var], c: &EqCore) -> bool {
        self.is_true(c)
    }

    fn in_a_tprime(&self, x: &[Var], c: &EqCore) -> bool {
        match c {
            EqCore::False => false,
            EqCore::Eqs(e) => is_solved(e) && sorted(e.iter().map(|p| p.0).collect()) == sorted(x.to_vec()),
        }
    }

    fn core_vars(&self, c: &EqCore) -> Vec<Var> {
        match c {
            EqCore::False => vec![],
            EqCore::Eqs(e) => sorted(e.iter().flat_map(|&(a, b)| [a, b]).collect()),
        }
    }

    fn rename(&self, c: &EqCore, f: &dyn Fn(Var) -> Var) -> EqCore {
        match c {
            EqCore::False => EqCore::False,
            EqCore::Eqs(e) => EqCore::new(e.iter().map(|&(a, b)| (f(a), f(b))).collect()),
        }
    }

    fn core_formula(&self, c: &EqCore) -> Formula {
        match c {
            EqCore::False => Formula::False,
            EqCore::Eqs(e) => Formula::and_all(e.iter().map(|&(a, b)| Formula::eq_vars(a, b))),
        }
    }

    fn print_core(&self, c: &EqCore, vars: &Vars) -> String {
        match c {
            EqCore::False => "false".into(),
            EqCore::Eqs(e) if e.is_empty() => "true".into(),
            EqCore::Eqs(e) => {
                e.iter().map(|&(a, b)| format!("{} = {}", vars.name(a), vars.name(b))).collect::<Vec<_>>().join(" & ")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Variables created so that x > y > z > v > w.
    fn xyzvw() -> (Vars, [Var; 5]) {
        let mut vs = Vars::new();
        let w = vs.named("w");
        let v = vs.named("v");
        let z = vs.named("z");
        let y = vs.named("y");
        let x = vs.named("x");
        (vs, [x, y, z, v, w])
    }

    #[test]
    fn solves_worked_example() {
        let (_, [x, y, z, v, w]) = xyzvw();
        let c = Conj::new([FlatAtom::EqVar(v, w), FlatAtom::EqVar(z, z), FlatAtom::EqVar(z, x), FlatAtom::EqVar(v, y)]);
        assert_eq!(eq_solve(&c).unwrap(), EqCore::new(vec![(v, w), (x, z), (y, w)]));
    }

    #[test]
    fn reflexive_equation_is_true() {
        let x = Var(0);
        assert_eq!(eq_solve(&Conj::new([FlatAtom::EqVar(x, x)])).unwrap(), EqCore::Eqs(vec![]));
    }

    #[test]
    fn shared_leader_is_redirected() {
        let (_, [x, y, z, _, _]) = xyzvw();
        let c = Conj::new([FlatAtom::EqVar(x, y), FlatAtom::EqVar(x, z)]);
        assert_eq!(eq_solve(&c).unwrap(), EqCore::new(vec![(x, z), (y, z)]));
    }

    #[test]
    fn decomposes_worked_example() {
        let (_, [x, y, z, v, w]) = xyzvw();
        let th = EqTheory::new();
        let c = EqCore::new(vec![(v, w), (z, z), (z, x), (v, y)]);
        let d = th.decompose(&[x, y, z], &c).unwrap();
        assert_eq!(
            d,
            Decomposition {
                x_prime: vec![],
                a_prime: EqCore::new(vec![(v, w)]),
                x_dprime: vec![z],
                a_dprime: EqCore::Eqs(vec![]),
                x_tprime: vec![y, x],
                a_tprime: EqCore::new(vec![(x, z), (y, w)]),
            }
        );
    }

    #[test]
    fn false_and_membership() {
        let th = EqTheory::new();
        let d = th.decompose(&[Var(3)], &EqCore::False).unwrap();
        assert_eq!(d, Decomposition::of_false(&th));
        assert!(th.in_a_prime(&[], &EqCore::False));
        assert!(!th.in_a_prime(&[Var(1)], &EqCore::Eqs(vec![])));
        assert!(th.decompose(&[Var(0)], &EqCore::new(vec![(Var(1), Var(0))])).is_err());
    }
}
