//! The additive rationals: blocks of linear equations `a1*x1 + ... = a0*1`
//! with integer coefficients, solved by Gaussian elimination.
//!
//! The leader of an equation is its greatest variable. A solved block has
//! pairwise distinct leaders, no leader occurs in another equation, and no
//! equation is variable-free. Equations are scaled so that the gcd of all
//! coefficients is 1 and the leader coefficient is positive, which makes
//! solved blocks unique.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::formula::{Conj, FlatAtom, Formula, Signature, Sym, Term, TheoryTag, Var, Vars, RA_NEG, RA_ONE, RA_PLUS, RA_ZERO};
use crate::theory::{check_rank, sorted, Decomposition, Theory, TheoryError};

/// `sum(terms) = constant * 1`, terms sorted by decreasing variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearEq {
    pub terms: Vec<(Var, BigInt)>,
    pub constant: BigInt,
}

impl LinearEq {
    /// Builds a canonical equation, merging repeated variables.
    pub fn new(terms: impl IntoIterator<Item = (Var, BigInt)>, constant: BigInt) -> LinearEq {
        let mut t: Vec<(Var, BigInt)> = terms.into_iter().collect();
        t.sort_by_key(|p| std::cmp::Reverse(p.0));
        let mut merged: Vec<(Var, BigInt)> = Vec::with_capacity(t.len());
        for (v, c) in t {
            match merged.last_mut() {
                Some((w, d)) if *w == v => *d += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        let mut e = LinearEq { terms: merged, constant };
        e.scale();
        e
    }

    pub fn from_i64(terms: &[(Var, i64)], constant: i64) -> LinearEq {
        LinearEq::new(terms.iter().map(|&(v, c)| (v, BigInt::from(c))), BigInt::from(constant))
    }

    fn scale(&mut self) {
        let mut g = self.constant.abs();
        for (_, c) in &self.terms {
            g = g.gcd(c);
        }
        let lead_negative = match self.terms.first() {
            Some((_, c)) => c.is_negative(),
            None => self.constant.is_negative(),
        };
        if g.is_zero() {
            return;
        }
        if lead_negative {
            g = -g;
        }
        if !g.is_one() {
            for (_, c) in &mut self.terms {
                *c /= &g;
            }
            self.constant /= &g;
        }
    }

    pub fn leader(&self) -> Option<Var> {
        self.terms.first().map(|t| t.0)
    }

    pub fn coefficient(&self, v: Var) -> Option<&BigInt> {
        self.terms.iter().find(|t| t.0 == v).map(|t| &t.1)
    }

    /// Eliminates the leader `k` of `a` from `self`:
    /// `b_k * a - a_k * b`, which no longer contains `k`.
    fn eliminate(&self, a: &LinearEq, k: Var) -> LinearEq {
        let Some(bk) = self.coefficient(k) else { return self.clone() };
        let ak = a.coefficient(k).expect("leader present");
        let terms = a
            .terms
            .iter()
            .map(|(v, c)| (*v, bk * c))
            .chain(self.terms.iter().map(|(v, c)| (*v, -(ak * c))));
        LinearEq::new(terms, bk * &a.constant - ak * &self.constant)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RaCore {
    False,
    /// Sorted, without duplicates. Empty means `true`.
    Block(Vec<LinearEq>),
}

impl RaCore {
    pub fn new(mut eqs: Vec<LinearEq>) -> RaCore {
        eqs.sort();
        eqs.dedup();
        RaCore::Block(eqs)
    }
}

#[derive(Clone, Debug)]
pub struct RaTheory {
    sig: Signature,
    plus: Sym,
    neg: Sym,
    zero: Sym,
    one: Sym,
}

impl Default for RaTheory {
    fn default() -> Self {
        let sig = Signature::ra();
        let s = |n| sig.function(n).unwrap();
        RaTheory { plus: s(RA_PLUS), neg: s(RA_NEG), zero: s(RA_ZERO), one: s(RA_ONE), sig }
    }
}

impl RaTheory {
    pub fn new() -> Self {
        Self::default()
    }

    fn atom(&self, a: &FlatAtom) -> Result<Option<LinearEq>, TheoryError> {
        let one = || BigInt::one();
        let m1 = || -BigInt::one();
        let z = BigInt::zero;
        Ok(Some(match a {
            FlatAtom::True => return Ok(None),
            FlatAtom::False => LinearEq::new([], one()),
            FlatAtom::EqVar(x, y) => LinearEq::new([(*x, one()), (*y, m1())], z()),
            FlatAtom::EqApp(x, s, ys) if *s == self.plus => {
                LinearEq::new([(*x, one()), (ys[0], m1()), (ys[1], m1())], z())
            }
            FlatAtom::EqApp(x, s, ys) if *s == self.neg => LinearEq::new([(*x, one()), (ys[0], one())], z()),
            FlatAtom::EqApp(x, s, _) if *s == self.zero => LinearEq::new([(*x, one())], z()),
            FlatAtom::EqApp(x, s, _) if *s == self.one => LinearEq::new([(*x, one())], one()),
            FlatAtom::EqApp(_, s, _) => return Err(TheoryError::ForeignSymbol(format!("function #{}", s.0))),
            FlatAtom::Rel(r, _) => return Err(TheoryError::ForeignSymbol(format!("relation #{}", r.0))),
        }))
    }

    fn sum(&self, parts: Vec<Term>) -> Term {
        let plus = self.plus;
        parts.into_iter().rev().reduce(|acc, t| Term::App(plus, vec![t, acc])).unwrap_or(Term::App(self.zero, vec![]))
    }

    fn multiple(&self, k: &BigInt, t: Term) -> Vec<Term> {
        let n = k.magnitude().to_string().parse::<usize>().unwrap_or(usize::MAX);
        let unit = if k.is_negative() { Term::App(self.neg, vec![t]) } else { t };
        vec![unit; n]
    }
}

/// Solves a block: each equation is reduced by the leaders found so far,
/// then its own leader is eliminated from the earlier equations.
pub fn ra_solve(b: &RaCore) -> RaCore {
    let RaCore::Block(eqs) = b else { return RaCore::False };
    let mut solved: Vec<LinearEq> = Vec::new();
    for e in eqs {
        let mut e = e.clone();
        for s in &solved {
            let k = s.leader().unwrap();
            if e.coefficient(k).is_some() {
                e = e.eliminate(s, k);
            }
        }
        let Some(k) = e.leader() else {
            if e.constant.is_zero() {
                continue;
            }
            return RaCore::False;
        };
        for s in &mut solved {
            if s.coefficient(k).is_some() {
                *s = s.eliminate(&e, k);
            }
        }
        solved.push(e);
    }
    RaCore::new(solved)
}

fn is_solved(eqs: &[LinearEq]) -> bool {
    let mut leaders = Vec::with_capacity(eqs.len());
    for e in eqs {
        match e.leader() {
            Some(l) => leaders.push(l),
            None => return false,
        }
    }
    let all = sorted(leaders.clone());
    if all.len() != leaders.len() {
        return false;
    }
    eqs.iter().all(|e| e.terms[1..].iter().all(|(v, _)| all.binary_search(v).is_err()))
}

impl Theory for RaTheory {
    type Core = RaCore;

    fn tag(&self) -> TheoryTag {
        TheoryTag::Ra
    }

    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn psi_description(&self) -> &'static str {
        "the formula x = x with x a variable: the rationals are infinite"
    }

    fn flat_to_core(&self, atoms: &Conj) -> Result<RaCore, TheoryError> {
        let mut eqs = Vec::new();
        for a in &atoms.0 {
            if *a == FlatAtom::False {
                return Ok(RaCore::False);
            }
            eqs.extend(self.atom(a)?);
        }
        Ok(RaCore::new(eqs))
    }

    fn true_core(&self) -> RaCore {
        RaCore::Block(vec![])
    }

    fn false_core(&self) -> RaCore {
        RaCore::False
    }

    fn is_true(&self, c: &RaCore) -> bool {
        matches!(c, RaCore::Block(e) if e.is_empty())
    }

    fn is_false(&self, c: &RaCore) -> bool {
        *c == RaCore::False
    }

    fn conjoin(&self, a: &RaCore, b: &RaCore) -> RaCore {
        match (a, b) {
            (RaCore::Block(x), RaCore::Block(y)) => RaCore::new(x.iter().chain(y).cloned().collect()),
            _ => RaCore::False,
        }
    }

    fn solve(&self, c: &RaCore) -> RaCore {
        match c {
            RaCore::Block(e) if is_solved(e) => c.clone(),
            _ => ra_solve(c),
        }
    }

    fn decompose(&self, x: &[Var], c: &RaCore) -> Result<Decomposition<RaCore>, TheoryError> {
        check_rank(x, &self.core_vars(c))?;
        let RaCore::Block(eqs) = self.solve(c) else { return Ok(Decomposition::of_false(self)) };
        let (third, first): (Vec<_>, Vec<_>) = eqs.into_iter().partition(|e| x.contains(&e.leader().unwrap()));
        let leaders: Vec<Var> = third.iter().map(|e| e.leader().unwrap()).collect();
        Ok(Decomposition {
            x_prime: vec![],
            a_prime: RaCore::new(first),
            x_dprime: sorted(x.iter().copied().filter(|v| !leaders.contains(v)).collect()),
            a_dprime: self.true_core(),
            x_tprime: sorted(leaders),
            a_tprime: RaCore::new(third),
        })
    }

    fn in_a_prime(&self, x: &[Var], c: &RaCore) -> bool {
        x.is_empty()
            && match c {
                RaCore::False => true,
                RaCore::Block(e) => is_solved(e),
            }
    }

    fn in_a_dprime(&self, _x: &[Var], c: &RaCore) -> bool {
        self.is_true(c)
    }

    fn in_a_tprime(&self, x: &[Var], c: &RaCore) -> bool {
        match c {
            RaCore::False => false,
            RaCore::Block(e) => {
                is_solved(e) && sorted(e.iter().map(|q| q.leader().unwrap()).collect()) == sorted(x.to_vec())
            }
        }
    }

    fn core_vars(&self, c: &RaCore) -> Vec<Var> {
        match c {
            RaCore::False => vec![],
            RaCore::Block(e) => sorted(e.iter().flat_map(|q| q.terms.iter().map(|t| t.0)).collect()),
        }
    }

    fn rename(&self, c: &RaCore, f: &dyn Fn(Var) -> Var) -> RaCore {
        match c {
            RaCore::False => RaCore::False,
            RaCore::Block(e) => RaCore::new(
                e.iter().map(|q| LinearEq::new(q.terms.iter().map(|(v, k)| (f(*v), k.clone())), q.constant.clone())).collect(),
            ),
        }
    }

    fn core_formula(&self, c: &RaCore) -> Formula {
        match c {
            RaCore::False => Formula::False,
            RaCore::Block(e) => Formula::and_all(e.iter().map(|q| {
                let lhs: Vec<Term> = q.terms.iter().flat_map(|(v, k)| self.multiple(k, Term::Var(*v))).collect();
                let rhs = self.multiple(&q.constant, Term::App(self.one, vec![]));
                Formula::Eq(self.sum(lhs), self.sum(rhs))
            })),
        }
    }

    fn print_core(&self, c: &RaCore, vars: &Vars) -> String {
        match c {
            RaCore::False => "false".into(),
            RaCore::Block(e) if e.is_empty() => "true".into(),
            RaCore::Block(e) => e.iter().map(|q| print_eq(q, vars)).collect::<Vec<_>>().join(" & "),
        }
    }
}

/// `2*v + 1*w = 3*1`; a variable-free equation prints as `0 = a*1`.
pub fn print_eq(q: &LinearEq, vars: &Vars) -> String {
    let lhs = if q.terms.is_empty() {
        "0".to_string()
    } else {
        q.terms.iter().map(|(v, k)| format!("{}*{}", k, vars.name(*v))).collect::<Vec<_>>().join(" + ")
    };
    format!("{} = {}*1", lhs, q.constant)
}
