//! Concrete syntax for signatures and formulas, and the printer.
//!
//! Formulas use `~ & | -> <->` (tightest first, `->` associating to the
//! right), `ex x y. φ` and `all x y. φ` scoping as far right as possible,
//! `true`, `false`, `t = t` and relation applications. Over the additive
//! rationals, terms may also use `t + t`, `-t`, integer literals and `k*t`;
//! these are expanded into sums of `1`, `+` and `-` while parsing.

use std::collections::HashMap;

use crate::formula::{Formula, Signature, Sym, Symbol, Term, TheoryTag, Var, Vars, RA_NEG, RA_ONE, RA_PLUS, RA_ZERO};

/// Byte offsets into the parsed text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{message} at {}..{}", span.start, span.end)]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

fn err<T>(message: impl Into<String>, span: Span) -> Result<T, ParseError> {
    Err(ParseError { message: message.into(), span })
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Equals,
    Tilde,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Plus,
    Minus,
    Star,
    Eof,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = text[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let start = i;
        let rest = &text[i..];
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::DArrow, 3)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if is_name_char(c) {
            let len = rest.find(|ch: char| !is_name_char(ch)).unwrap_or(rest.len());
            (Tok::Name(rest[..len].to_string()), len)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '=' => Tok::Equals,
                '~' => Tok::Tilde,
                '&' => Tok::Amp,
                '|' => Tok::Bar,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                _ => return err(format!("unexpected character `{c}`"), Span { start, end: start + c.len_utf8() }),
            };
            (t, 1)
        };
        i += len;
        out.push((tok, Span { start, end: i }));
    }
    out.push((Tok::Eof, Span { start: text.len(), end: text.len() }));
    Ok(out)
}

const KEYWORDS: [&str; 4] = ["true", "false", "ex", "all"];

fn is_numeral(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Parses a signature file: `theory eq|ra|trees`, then `fun name/arity` and
/// `rel name/arity` lines. `#` starts a comment.
pub fn parse_signature(text: &str) -> Result<Signature, ParseError> {
    let mut sig: Option<Signature> = None;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let content = line.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        let lead = content.len() - content.trim_start().len();
        let span = Span { start: offset + lead, end: offset + lead + trimmed.len() };
        offset += line.len();
        if trimmed.is_empty() {
            continue;
        }
        let mut words = trimmed.split_whitespace();
        let kw = words.next().unwrap();
        let arg = words.next();
        if words.next().is_some() {
            return err("trailing input in declaration", span);
        }
        match (kw, arg, sig.as_mut()) {
            ("theory", Some(t), None) => {
                let tag: TheoryTag = t.parse().map_err(|m: String| ParseError { message: m, span })?;
                let mut s = Signature::for_tag(tag);
                s.open = false;
                if tag == TheoryTag::Trees {
                    s.functions.clear();
                }
                sig = Some(s);
            }
            ("theory", _, Some(_)) => return err("theory declared twice", span),
            (_, _, None) => return err("signature must start with `theory`", span),
            ("fun" | "rel", Some(decl), Some(s)) => {
                let (name, arity) = decl
                    .rsplit_once('/')
                    .and_then(|(n, a)| Some((n, a.parse::<usize>().ok()?)))
                    .filter(|(n, _)| !n.is_empty() && (n.chars().all(is_name_char) || [RA_PLUS, RA_NEG].contains(n)))
                    .ok_or_else(|| ParseError { message: format!("malformed declaration `{decl}`"), span })?;
                if KEYWORDS.contains(&name) {
                    return err(format!("`{name}` is a keyword"), span);
                }
                declare(s, kw == "fun", name, arity).map_err(|m| ParseError { message: m, span })?;
            }
            _ => return err(format!("unknown declaration `{trimmed}`"), span),
        }
    }
    sig.ok_or(ParseError { message: "missing `theory` line".into(), span: Span { start: 0, end: 0 } })
}

fn declare(s: &mut Signature, is_fun: bool, name: &str, arity: usize) -> Result<(), String> {
    match s.tag {
        TheoryTag::Eq => Err(format!("theory eq has no symbols, found `{name}`")),
        TheoryTag::Ra => {
            let std = Signature::ra();
            let ok = is_fun && std.functions.contains(&Symbol { name: name.to_string(), arity });
            if ok {
                Ok(())
            } else {
                Err(format!("theory ra only has +/2, -/1, 0/0 and 1/0, found `{name}/{arity}`"))
            }
        }
        TheoryTag::Trees => {
            let r = if is_fun { s.add_function(name, arity) } else { s.add_relation(name, arity) };
            r.map(|_| ()).map_err(|e| e.to_string())
        }
    }
}

/// Name resolution state shared by consecutive parses, so that several
/// formulas can talk about the same free variables.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub free: HashMap<String, Var>,
}

impl Scope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.free.get(name).copied()
    }
}

/// Parses a formula over a fixed signature.
pub fn parse_formula(text: &str, sig: &Signature, vars: &mut Vars) -> Result<Formula, ParseError> {
    let mut sig = sig.clone();
    sig.open = false;
    parse_formula_in(text, &mut sig, vars, &mut Scope::new())
}

/// Parses a formula, resolving free names through `scope`. An open
/// signature is extended with the function symbols it meets.
pub fn parse_formula_in(
    text: &str,
    sig: &mut Signature,
    vars: &mut Vars,
    scope: &mut Scope,
) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, sig, vars, scope, bound: Vec::new() };
    let f = p.formula()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(f)
}

struct Parser<'a> {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    sig: &'a mut Signature,
    vars: &'a mut Vars,
    scope: &'a mut Scope,
    bound: Vec<(String, Var)>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<Span, ParseError> {
        if *self.peek() == t {
            Ok(self.bump().1)
        } else {
            err(format!("expected {what}"), self.span())
        }
    }

    fn is_ra(&self) -> bool {
        self.sig.tag == TheoryTag::Ra
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut l = self.implication()?;
        while self.eat(&Tok::DArrow) {
            let r = self.implication()?;
            l = Formula::iff(l, r);
        }
        Ok(l)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let l = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let r = self.implication()?;
            return Ok(Formula::implies(l, r));
        }
        Ok(l)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut l = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            let r = self.conjunction()?;
            l = Formula::or(l, r);
        }
        Ok(l)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut l = self.unary()?;
        while self.eat(&Tok::Amp) {
            let r = self.unary()?;
            l = Formula::and(l, r);
        }
        Ok(l)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Tilde) {
            return Ok(Formula::not(self.unary()?));
        }
        if let Tok::Name(n) = self.peek() {
            if n == "ex" || n == "all" {
                let existential = n == "ex";
                self.bump();
                return self.quantifier(existential);
            }
        }
        self.primary()
    }

    fn quantifier(&mut self, existential: bool) -> Result<Formula, ParseError> {
        let mut names = Vec::new();
        loop {
            let (t, span) = self.bump();
            match t {
                Tok::Dot => break,
                Tok::Name(n) if !KEYWORDS.contains(&n.as_str()) && !(self.is_ra() && is_numeral(&n)) => {
                    names.push(n)
                }
                _ => return err("expected a variable or `.`", span),
            }
        }
        let depth = self.bound.len();
        let mut vs = Vec::with_capacity(names.len());
        for n in names {
            let v = self.vars.named(&n);
            self.bound.push((n, v));
            vs.push(v);
        }
        let body = self.formula();
        self.bound.truncate(depth);
        let body = body?;
        Ok(if existential { Formula::exists(vs, body) } else { Formula::forall(vs, body) })
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Name(n) if n == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Name(n) if n == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::LParen => {
                let save = self.pos;
                let as_formula = self.bump_then(|p| {
                    let f = p.formula()?;
                    p.expect(Tok::RParen, "`)`")?;
                    if *p.peek() == Tok::Equals || *p.peek() == Tok::Plus {
                        return err("parenthesized formula used as a term", p.span());
                    }
                    Ok(f)
                });
                match as_formula {
                    Ok(f) => Ok(f),
                    Err(e1) => {
                        let far = self.pos;
                        self.pos = save;
                        match self.equation() {
                            Ok(f) => Ok(f),
                            Err(e2) => {
                                if e2.span.start >= e1.span.start.max(self.toks[far].1.start) {
                                    Err(e2)
                                } else {
                                    Err(e1)
                                }
                            }
                        }
                    }
                }
            }
            Tok::Name(n) if self.sig.relation(&n).is_some() => {
                let (_, span) = self.bump();
                let r = self.sig.relation(&n).unwrap();
                let args = if *self.peek() == Tok::LParen { self.args()? } else { vec![] };
                if args.len() != self.sig.rel(r).arity {
                    return err(format!("relation `{n}` expects {} arguments", self.sig.rel(r).arity), span);
                }
                Ok(Formula::Rel(r, args))
            }
            _ => self.equation(),
        }
    }

    fn bump_then<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, ParseError>) -> Result<T, ParseError> {
        self.bump();
        f(self)
    }

    fn equation(&mut self) -> Result<Formula, ParseError> {
        let l = self.term()?;
        self.expect(Tok::Equals, "`=`")?;
        let r = self.term()?;
        Ok(Formula::Eq(l, r))
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(Tok::Comma, "`,` or `)`")?;
        }
    }

    fn ra_sym(&self, name: &str) -> Sym {
        self.sig.function(name).expect("ra signature")
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if !self.is_ra() {
            return self.simple_term();
        }
        let l = self.product()?;
        if self.eat(&Tok::Plus) {
            let r = self.term()?;
            return Ok(Term::App(self.ra_sym(RA_PLUS), vec![l, r]));
        }
        Ok(l)
    }

    /// `k * t` with `k` copies of `t` summed to the right; `0 * t` is `0`.
    fn repeat(&self, k: usize, t: Term) -> Term {
        if k == 0 {
            return Term::App(self.ra_sym(RA_ZERO), vec![]);
        }
        let plus = self.ra_sym(RA_PLUS);
        let mut acc = t.clone();
        for _ in 1..k {
            acc = Term::App(plus, vec![t.clone(), acc]);
        }
        acc
    }

    fn coefficient(&mut self) -> Result<Option<usize>, ParseError> {
        let next = self.toks.get(self.pos + 1).map(|t| &t.0);
        if let (Tok::Name(n), Some(Tok::Star)) = (self.peek().clone(), next) {
            if is_numeral(&n) {
                let (_, span) = self.bump();
                self.bump();
                let k = n.parse::<usize>().ok().filter(|k| *k <= 1 << 16);
                return k.map(Some).ok_or(ParseError { message: "coefficient too large".into(), span });
            }
        }
        Ok(None)
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        let neg = self.ra_sym(RA_NEG);
        if self.eat(&Tok::Minus) {
            if let Some(k) = self.coefficient()? {
                let t = self.product()?;
                return Ok(self.repeat(k, Term::App(neg, vec![t])));
            }
            let t = self.product()?;
            return Ok(Term::App(neg, vec![t]));
        }
        if let Some(k) = self.coefficient()? {
            let t = self.product()?;
            return Ok(self.repeat(k, t));
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let t = self.term()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(t);
        }
        if let Tok::Name(n) = self.peek().clone() {
            if is_numeral(&n) && n != RA_ZERO && n != RA_ONE {
                let (_, span) = self.bump();
                let k = n.parse::<usize>().ok().filter(|k| *k <= 1 << 16);
                let k = k.ok_or(ParseError { message: "numeral too large".into(), span })?;
                let one = Term::App(self.ra_sym(RA_ONE), vec![]);
                return Ok(self.repeat(k, one));
            }
        }
        self.simple_term()
    }

    fn simple_term(&mut self) -> Result<Term, ParseError> {
        let (tok, span) = self.bump();
        let Tok::Name(name) = tok else {
            return err("expected a term", span);
        };
        if KEYWORDS.contains(&name.as_str()) {
            return err(format!("unexpected keyword `{name}`"), span);
        }
        if *self.peek() == Tok::LParen {
            let args = self.args()?;
            let s = match self.sig.function(&name) {
                Some(s) => s,
                None if self.sig.open => self.sig.add_function(&name, args.len()).unwrap(),
                None => return err(format!("unknown function symbol `{name}`"), span),
            };
            if self.sig.fun(s).arity != args.len() {
                return err(format!("`{name}` expects {} arguments", self.sig.fun(s).arity), span);
            }
            return Ok(Term::App(s, args));
        }
        if let Some((_, v)) = self.bound.iter().rev().find(|(n, _)| *n == name) {
            return Ok(Term::Var(*v));
        }
        if let Some(s) = self.sig.function(&name) {
            if self.sig.fun(s).arity != 0 {
                return err(format!("`{name}` expects {} arguments", self.sig.fun(s).arity), span);
            }
            return Ok(Term::App(s, vec![]));
        }
        if is_numeral(&name) {
            if self.sig.open {
                let s = self.sig.add_function(&name, 0).unwrap();
                return Ok(Term::App(s, vec![]));
            }
            if self.is_ra() {
                return err(format!("unexpected numeral `{name}`"), span);
            }
        }
        if let Some(v) = self.scope.var(&name) {
            return Ok(Term::Var(v));
        }
        let v = self.vars.named(&name);
        self.scope.free.insert(name, v);
        Ok(Term::Var(v))
    }
}

/// Prints a formula so that parsing the text gives back the same AST.
pub fn print_formula(f: &Formula, sig: &Signature, vars: &Vars) -> String {
    let mut out = String::new();
    Printer { sig, vars }.formula(f, 0, true, &mut out);
    out
}

pub fn print_term(t: &Term, sig: &Signature, vars: &Vars) -> String {
    let mut out = String::new();
    Printer { sig, vars }.term(t, false, &mut out);
    out
}

struct Printer<'a> {
    sig: &'a Signature,
    vars: &'a Vars,
}

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        _ => 5,
    }
}

impl Printer<'_> {
    fn formula(&self, f: &Formula, min: u8, tail: bool, out: &mut String) {
        match f {
            Formula::True => out.push_str("true"),
            Formula::False => out.push_str("false"),
            Formula::Eq(a, b) => {
                self.term(a, false, out);
                out.push_str(" = ");
                self.term(b, false, out);
            }
            Formula::Rel(r, ts) => {
                out.push_str(&self.sig.rel(*r).name);
                if !ts.is_empty() {
                    self.args(ts, out);
                }
            }
            Formula::Not(g) => {
                out.push('~');
                match g.as_ref() {
                    Formula::Not(_) | Formula::True | Formula::False | Formula::Rel(..) => {
                        self.formula(g, 5, tail, out)
                    }
                    _ => {
                        out.push('(');
                        self.formula(g, 0, true, out);
                        out.push(')');
                    }
                }
            }
            Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
                if !tail {
                    out.push('(');
                }
                out.push_str(if matches!(f, Formula::Exists(..)) { "ex" } else { "all" });
                for v in vs {
                    out.push(' ');
                    out.push_str(&self.vars.name(*v));
                }
                out.push_str(if vs.is_empty() { " . " } else { ". " });
                self.formula(g, 0, true, out);
                if !tail {
                    out.push(')');
                }
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                let p = precedence(f);
                if p < min {
                    out.push('(');
                    self.formula(f, 0, true, out);
                    out.push(')');
                    return;
                }
                let (lp, rp) = if matches!(f, Formula::Implies(..)) { (p + 1, p) } else { (p, p + 1) };
                let op = match f {
                    Formula::And(..) => " & ",
                    Formula::Or(..) => " | ",
                    Formula::Implies(..) => " -> ",
                    _ => " <-> ",
                };
                self.formula(a, lp, false, out);
                out.push_str(op);
                self.formula(b, rp, tail, out);
            }
        }
    }

    fn args(&self, ts: &[Term], out: &mut String) {
        out.push('(');
        for (i, t) in ts.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            self.term(t, false, out);
        }
        out.push(')');
    }

    fn term(&self, t: &Term, operand: bool, out: &mut String) {
        match t {
            Term::Var(v) => out.push_str(&self.vars.name(*v)),
            Term::App(s, args) => {
                let name = &self.sig.fun(*s).name;
                if self.sig.tag == TheoryTag::Ra && name == RA_PLUS {
                    if operand {
                        out.push('(');
                    }
                    self.term(&args[0], true, out);
                    out.push_str(" + ");
                    self.term(&args[1], false, out);
                    if operand {
                        out.push(')');
                    }
                } else if self.sig.tag == TheoryTag::Ra && name == RA_NEG {
                    out.push('-');
                    self.term(&args[0], true, out);
                } else {
                    out.push_str(name);
                    if !args.is_empty() {
                        self.args(args, out);
                    }
                }
            }
        }
    }
}
