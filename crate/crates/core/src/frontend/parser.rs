use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::lexer::{lex, ParseError, Pos, Tok};
use crate::dmt::{Dmt, Transition};
use crate::logic::{Annot, CmpOp, Const, Constraint, Formula, LinExpr, Literal, Signature, Sort, Term, Var, Q};
use crate::ltlf::{Leaf, Ltl, Property};
use crate::smt::TheoryContext;

/// Which annotations state variables must carry inside an expression.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Guard,
    Plain,
    Ground,
}

enum Ex {
    Term(Term),
    Lin(LinExpr),
}

impl Ex {
    fn into_lin(self) -> LinExpr {
        match self {
            Ex::Term(t) => LinExpr::term(t),
            Ex::Lin(e) => e,
        }
    }
}

pub(crate) struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    bound: Vec<Var>,
}

const KEYWORDS: &[&str] = &[
    "theory", "sort", "const", "distinct", "fun", "rel", "var", "control", "fact", "trans", "exists", "true", "false",
    "let",
];

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser { toks: lex(src)?, i: 0, bound: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::at(self.pos(), msg))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{}`, found {}", s, self.peek()))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {}", t)),
        }
    }

    fn fresh_name(&mut self) -> Result<(String, Pos), ParseError> {
        let pos = self.pos();
        let s = self.ident()?;
        if KEYWORDS.contains(&s.as_str()) {
            return Err(ParseError::at(pos, format!("`{}` is a keyword", s)));
        }
        Ok((s, pos))
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn sort(&mut self, sig: &mut Signature) -> Result<Sort, ParseError> {
        let pos = self.pos();
        let name = self.ident()?;
        let s = Sort::named(&name);
        if name == "int" {
            return Err(ParseError::at(pos, "sort `int` is not supported: only EUF and LRA (rationals) are"));
        }
        if s.is_rat() && !sig.has_sort(&s) {
            sig.add_sort(Sort::Rat).expect("fresh");
        }
        if !sig.has_sort(&s) {
            return Err(ParseError::at(pos, format!("undeclared sort `{}`", name)));
        }
        Ok(s)
    }

    fn names(&mut self) -> Result<Vec<(String, Pos)>, ParseError> {
        let mut out = vec![self.fresh_name()?];
        while self.eat_sym(",") {
            out.push(self.fresh_name()?);
        }
        Ok(out)
    }

    fn sort_list(&mut self, sig: &mut Signature) -> Result<Vec<Sort>, ParseError> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        if !self.is_sym(")") {
            out.push(self.sort(sig)?);
            while self.eat_sym(",") {
                out.push(self.sort(sig)?);
            }
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    fn number(&mut self) -> Result<Q, ParseError> {
        let neg = self.eat_sym("-");
        let v = match self.bump() {
            Tok::Num(q) => q,
            t => return self.err(format!("expected number, found {}", t)),
        };
        let v = if self.is_sym("/") && matches!(self.peek_at(1), Tok::Num(_)) {
            self.bump();
            let pos = self.pos();
            let Tok::Num(d) = self.bump() else { unreachable!() };
            if d.is_zero() {
                return Err(ParseError::at(pos, "division by zero"));
            }
            v / d
        } else {
            v
        };
        Ok(if neg { -v } else { v })
    }

    // ---- expressions ----

    fn sum(&mut self, sig: &Signature, mode: Mode) -> Result<Ex, ParseError> {
        let mut acc = self.product(sig, mode)?;
        loop {
            let sign = if self.eat_sym("+") {
                Q::one()
            } else if self.eat_sym("-") {
                -Q::one()
            } else {
                return Ok(acc);
            };
            let pos = self.pos();
            let rhs = self.product(sig, mode)?;
            let l = self.arith(acc, pos)?;
            let r = self.arith(rhs, pos)?;
            let mut e = l;
            e.add_scaled(&r, &sign);
            acc = Ex::Lin(e);
        }
    }

    fn arith(&self, e: Ex, pos: Pos) -> Result<LinExpr, ParseError> {
        match e {
            Ex::Term(t) if !t.sort().is_rat() => {
                Err(ParseError::at(pos, format!("arithmetic on `{}` of sort {}", t, t.sort())))
            }
            e => Ok(e.into_lin()),
        }
    }

    fn product(&mut self, sig: &Signature, mode: Mode) -> Result<Ex, ParseError> {
        let mut acc = self.unary(sig, mode)?;
        while self.is_sym("*") {
            let pos = self.pos();
            self.bump();
            let rhs = self.unary(sig, mode)?;
            let l = self.arith(acc, pos)?;
            let r = self.arith(rhs, pos)?;
            let e = if l.is_constant() {
                r.scaled(&l.constant)
            } else if r.is_constant() {
                l.scaled(&r.constant)
            } else {
                return Err(ParseError::at(pos, "nonlinear product"));
            };
            acc = Ex::Lin(e);
        }
        Ok(acc)
    }

    fn unary(&mut self, sig: &Signature, mode: Mode) -> Result<Ex, ParseError> {
        if self.is_sym("-") {
            let pos = self.pos();
            self.bump();
            let e = self.unary(sig, mode)?;
            return Ok(Ex::Lin(self.arith(e, pos)?.scaled(&-Q::one())));
        }
        match self.peek().clone() {
            Tok::Num(_) => Ok(Ex::Term(Term::num(self.number()?))),
            Tok::Sym("(") => {
                self.bump();
                let e = self.sum(sig, mode)?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(Ex::Term(self.name_term(sig, mode)?)),
            t => self.err(format!("expected term, found {}", t)),
        }
    }

    fn leaf_term(&self, e: Ex, pos: Pos) -> Result<Term, ParseError> {
        match e {
            Ex::Term(t) => Ok(t),
            Ex::Lin(l) if l.is_constant() => Ok(Term::num(l.constant)),
            Ex::Lin(l) => {
                if l.constant.is_zero() && l.coeffs.len() == 1 {
                    let (t, c) = l.coeffs.iter().next().unwrap();
                    if c.is_one() {
                        return Ok(t.clone());
                    }
                }
                Err(ParseError::at(pos, "arguments must be variables, constants, numbers or applications"))
            }
        }
    }

    fn args(&mut self, sig: &Signature, mode: Mode, sorts: &[Sort], what: &str) -> Result<Vec<Term>, ParseError> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        if !self.is_sym(")") {
            loop {
                let pos = self.pos();
                let e = self.sum(sig, mode)?;
                out.push((self.leaf_term(e, pos)?, pos));
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        if out.len() != sorts.len() {
            return self.err(format!("`{}` takes {} arguments, got {}", what, sorts.len(), out.len()));
        }
        for ((t, pos), s) in out.iter().zip(sorts) {
            if t.sort() != *s {
                return Err(ParseError::at(*pos, format!("argument `{}` of `{}` has sort {}, expected {}", t, what, t.sort(), s)));
            }
        }
        Ok(out.into_iter().map(|(t, _)| t).collect())
    }

    fn name_term(&mut self, sig: &Signature, mode: Mode) -> Result<Term, ParseError> {
        let pos = self.pos();
        let name = self.ident()?;
        if self.is_sym("(") {
            let Some(f) = sig.function(&name).cloned() else {
                return Err(ParseError::at(pos, format!("undeclared function `{}`", name)));
            };
            let args = self.args(sig, mode, &f.args, &name)?;
            return Ok(Term::app(&f, args));
        }
        if let Some(v) = self.bound.iter().rev().find(|v| &*v.name == name) {
            return Ok(v.term());
        }
        if let Some(v) = sig.variable(&name).cloned() {
            let annot = if self.eat_sym("^r") {
                Annot::Read
            } else if self.eat_sym("^w") {
                Annot::Write
            } else {
                Annot::Plain
            };
            return match (mode, annot) {
                (Mode::Guard, Annot::Plain) => Err(ParseError::at(pos, format!("`{}` needs `^r` or `^w` in a guard", name))),
                (Mode::Plain, Annot::Read | Annot::Write) => {
                    Err(ParseError::at(pos, format!("`{}` must not carry `^r`/`^w` here", name)))
                }
                (Mode::Ground, _) => Err(ParseError::at(pos, format!("variable `{}` in a ground fact", name))),
                _ => Ok(v.with_annot(annot).term()),
            };
        }
        if let Some(c) = sig.constant(&name) {
            return Ok(c.term());
        }
        Err(ParseError::at(pos, format!("undeclared symbol `{}`", name)))
    }

    /// `!atom` or `atom`, folded to a literal.
    fn literal(&mut self, sig: &Signature, mode: Mode) -> Result<Literal, ParseError> {
        let pos = self.pos();
        let neg = self.eat_sym("!");
        let f = self.atom(sig, mode)?;
        let f = if neg { Formula::not(f) } else { f };
        match f {
            Formula::Lit(l) => Ok(l),
            Formula::True => Err(ParseError::at(pos, "literal is trivially true")),
            Formula::False => Err(ParseError::at(pos, "literal is trivially false")),
            _ => unreachable!("atoms fold to literals"),
        }
    }

    fn atom(&mut self, sig: &Signature, mode: Mode) -> Result<Formula, ParseError> {
        if let Tok::Ident(name) = self.peek().clone() {
            if let Some(r) = sig.relation(&name).cloned() {
                self.bump();
                let args = self.args(sig, mode, &r.args, &name)?;
                return Ok(Formula::rel(&r, args));
            }
        }
        if self.is_sym("(") && self.paren_is_atom() {
            self.bump();
            let f = self.atom(sig, mode)?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        let pos = self.pos();
        let lhs = self.sum(sig, mode)?;
        let op = match self.bump() {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            t => return Err(ParseError::at(self.toks[self.i - 1].1, format!("expected comparison, found {}", t))),
        };
        let rhs = self.sum(sig, mode)?;
        let is_uf = |e: &Ex| matches!(e, Ex::Term(t) if !t.sort().is_rat());
        if is_uf(&lhs) || is_uf(&rhs) {
            let (Ex::Term(a), Ex::Term(b)) = (lhs, rhs) else {
                return Err(ParseError::at(pos, "arithmetic mixed with uninterpreted sorts"));
            };
            if a.sort() != b.sort() {
                return Err(ParseError::at(pos, format!("cannot compare `{}` : {} with `{}` : {}", a, a.sort(), b, b.sort())));
            }
            return match op {
                CmpOp::Eq => Ok(Formula::eq(a, b)),
                CmpOp::Ne => Ok(Formula::neq(a, b)),
                _ => Err(ParseError::at(pos, format!("order comparison on sort {}", a.sort()))),
            };
        }
        Ok(Formula::compare(lhs.into_lin(), op, rhs.into_lin()))
    }

    /// Distinguishes `(atom)` from `(expr) + 1 < x` by scanning to the matching paren.
    fn paren_is_atom(&self) -> bool {
        let mut depth = 0usize;
        let mut k = self.i;
        while k < self.toks.len() {
            match &self.toks[k].0 {
                Tok::Sym("(") => depth += 1,
                Tok::Sym(")") => {
                    depth -= 1;
                    if depth == 0 {
                        return false;
                    }
                }
                Tok::Sym("=" | "!=" | "<" | "<=" | ">" | ">=") if depth == 1 => return true,
                Tok::Eof => return false,
                _ => {}
            }
            k += 1;
        }
        false
    }

    /// `[exists (u: S, ..).] lit & lit ...` or `true`.
    fn constraint(&mut self, sig: &Signature, mode: Mode) -> Result<Constraint, ParseError> {
        let mut bound = Vec::new();
        if self.eat_kw("exists") {
            self.expect_sym("(")?;
            loop {
                let (name, pos) = self.fresh_name()?;
                if sig.variable(&name).is_some() || sig.constant(&name).is_some() || sig.function(&name).is_some() {
                    return Err(ParseError::at(pos, format!("bound variable `{}` shadows a declared symbol", name)));
                }
                if bound.iter().any(|v: &Var| &*v.name == name) {
                    return Err(ParseError::at(pos, format!("`{}` bound twice", name)));
                }
                self.expect_sym(":")?;
                let s = {
                    let mut tmp = sig.clone();
                    let s = self.sort(&mut tmp)?;
                    if !sig.has_sort(&s) {
                        return Err(ParseError::at(pos, format!("undeclared sort `{}`", s)));
                    }
                    s
                };
                bound.push(Var::new(&name, s));
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(")")?;
            self.expect_sym(".")?;
        }
        let saved = self.bound.len();
        self.bound.extend(bound.iter().cloned());
        let body = self.constraint_body(sig, mode);
        self.bound.truncate(saved);
        Ok(Constraint::new(bound, body?))
    }

    fn constraint_body(&mut self, sig: &Signature, mode: Mode) -> Result<Vec<Literal>, ParseError> {
        if self.eat_kw("true") {
            return Ok(Vec::new());
        }
        let mut body = vec![self.literal(sig, mode)?];
        while self.is_sym("&") {
            self.bump();
            body.push(self.literal(sig, mode)?);
        }
        Ok(body)
    }
}

fn unsupported_theory(name: &str, pos: Pos) -> ParseError {
    ParseError::at(pos, format!("unsupported theory `{}`: only EUF, LRA and their combination are supported", name))
}

/// Declared theory, checked against the sorts actually in use.
fn check_theory(sig: &Signature, theory: Option<(String, Pos)>) -> Result<(), ParseError> {
    let Some((t, pos)) = theory else { return Ok(()) };
    let (euf, lra) = match t.as_str() {
        "euf" => (true, false),
        "lra" => (false, true),
        "euf+lra" | "lra+euf" => (true, true),
        other => return Err(unsupported_theory(other, pos)),
    };
    if sig.uses_rat() && !lra {
        return Err(ParseError::at(pos, "sort `rat` needs theory `lra` or `euf+lra`"));
    }
    let named = sig.sorts.iter().any(|s| !s.is_rat()) || !sig.functions.is_empty() || !sig.relations.is_empty();
    if named && !euf {
        return Err(ParseError::at(pos, "uninterpreted symbols need theory `euf` or `euf+lra`"));
    }
    Ok(())
}

pub fn parse_spec(src: &str) -> Result<Dmt, ParseError> {
    let mut p = Parser::new(src)?;
    let mut sig = Signature::new();
    let mut theory = None;
    let mut fact_lits: Vec<Literal> = Vec::new();
    let mut distinct: Vec<Vec<Const>> = Vec::new();
    let mut initial: BTreeMap<Var, Term> = BTreeMap::new();
    let mut trans: Vec<Transition> = Vec::new();
    while !p.at_eof() {
        let pos = p.pos();
        let kw = p.ident()?;
        let lift = |e: crate::logic::LogicError| ParseError::at(pos, e.to_string());
        match kw.as_str() {
            "theory" => {
                let tpos = p.pos();
                let mut name = p.ident()?;
                if p.eat_sym("+") {
                    name = format!("{}+{}", name, p.ident()?);
                }
                if theory.is_some() {
                    return Err(ParseError::at(tpos, "theory declared twice"));
                }
                if !["euf", "lra", "euf+lra", "lra+euf"].contains(&name.as_str()) {
                    return Err(unsupported_theory(&name, tpos));
                }
                theory = Some((name, tpos));
            }
            "sort" => {
                for (n, npos) in p.names()? {
                    if n == "int" {
                        return Err(ParseError::at(npos, "sort `int` is not supported: only EUF and LRA (rationals) are"));
                    }
                    sig.add_sort(Sort::named(&n)).map_err(|e| ParseError::at(npos, e.to_string()))?;
                }
            }
            "const" => {
                let names = p.names()?;
                p.expect_sym(":")?;
                let s = p.sort(&mut sig)?;
                let mut group = Vec::new();
                for (n, npos) in names {
                    group.push(sig.add_constant(&n, s.clone()).map_err(|e| ParseError::at(npos, e.to_string()))?);
                }
                if p.eat_kw("distinct") {
                    distinct.push(group);
                }
            }
            "distinct" => {
                let mut group = Vec::new();
                for (n, npos) in p.names()? {
                    match sig.constant(&n) {
                        Some(c) => group.push(c.clone()),
                        None => return Err(ParseError::at(npos, format!("undeclared constant `{}`", n))),
                    }
                }
                if let Some(c) = group.iter().find(|c| c.sort != group[0].sort) {
                    return Err(ParseError::at(pos, format!("distinct group mixes sorts ({})", c.name)));
                }
                distinct.push(group);
            }
            "fun" => {
                let (n, _) = p.fresh_name()?;
                let args = p.sort_list(&mut sig)?;
                p.expect_sym(":")?;
                let r = p.sort(&mut sig)?;
                sig.add_function(&n, args, r).map_err(lift)?;
            }
            "rel" => {
                let (n, _) = p.fresh_name()?;
                let args = p.sort_list(&mut sig)?;
                sig.add_relation(&n, args).map_err(lift)?;
            }
            "var" => {
                let (n, _) = p.fresh_name()?;
                p.expect_sym(":")?;
                let s = p.sort(&mut sig)?;
                p.expect_sym("=")?;
                let init = p.initial_value(&sig, &s)?;
                let v = sig.add_variable(&n, s).map_err(lift)?;
                initial.insert(v, init);
            }
            "control" => {
                let (n, _) = p.fresh_name()?;
                p.expect_sym(":")?;
                let spos = p.pos();
                let sname = p.ident()?;
                let s = Sort::named(&sname);
                if s.is_rat() {
                    return Err(ParseError::at(spos, "control states need an uninterpreted sort"));
                }
                if !sig.has_sort(&s) {
                    sig.add_sort(s.clone()).expect("fresh");
                }
                p.expect_sym("{")?;
                let names = p.names()?;
                p.expect_sym("}")?;
                let mut group = Vec::new();
                for (c, cpos) in names {
                    group.push(sig.add_constant(&c, s.clone()).map_err(|e| ParseError::at(cpos, e.to_string()))?);
                }
                distinct.push(group);
                p.expect_sym("=")?;
                let init = p.initial_value(&sig, &s)?;
                let v = sig.add_variable(&n, s).map_err(lift)?;
                initial.insert(v, init);
            }
            "fact" => {
                let l = p.literal(&sig, Mode::Ground)?;
                fact_lits.push(l);
            }
            "trans" => {
                let (n, npos) = p.fresh_name()?;
                p.expect_sym(":")?;
                let guard = p.constraint(&sig, Mode::Guard)?;
                if trans.iter().any(|t| t.name == n) {
                    return Err(ParseError::at(npos, format!("duplicate transition `{}`", n)));
                }
                trans.push(Transition { name: n, guard });
            }
            other => return Err(ParseError::at(pos, format!("unknown declaration `{}`", other))),
        }
        p.expect_sym(";")?;
    }
    if sig.variables.is_empty() {
        return Err(ParseError::at(p.pos(), "V nonempty: a process needs at least one data variable"));
    }
    check_theory(&sig, theory)?;
    let mut ctx = TheoryContext::new(sig);
    ctx.facts = fact_lits;
    ctx.distinct = distinct;
    Dmt::new(ctx, initial, trans).map_err(|e| ParseError::at(p.pos(), e.to_string()))
}

impl Parser {
    fn initial_value(&mut self, sig: &Signature, s: &Sort) -> Result<Term, ParseError> {
        let pos = self.pos();
        let t = if matches!(self.peek(), Tok::Num(_)) || self.is_sym("-") {
            Term::num(self.number()?)
        } else {
            let n = self.ident()?;
            match sig.constant(&n) {
                Some(c) => c.term(),
                None => return Err(ParseError::at(pos, format!("undeclared constant `{}`", n))),
            }
        };
        if t.sort() != *s {
            return Err(ParseError::at(pos, format!("initial value `{}` has sort {}, expected {}", t, t.sort(), s)));
        }
        Ok(t)
    }
}

/// Temporal operators and reserved words of the property language.
const TEMPORAL: &[&str] = &["X", "G", "F", "U", "true", "false", "let"];

struct PropBuilder<'a> {
    sig: &'a Signature,
    leaves: Vec<Leaf>,
    names: BTreeMap<String, usize>,
}

impl<'a> PropBuilder<'a> {
    fn intern(&mut self, name: Option<String>, c: Constraint) -> usize {
        if let Some(i) = self.leaves.iter().position(|l| l.constraint == c) {
            return i;
        }
        let i = self.leaves.len();
        let name = name.unwrap_or_else(|| {
            let mut k = i;
            loop {
                let n = format!("c{}", k);
                if !self.names.contains_key(&n) && !self.leaves.iter().any(|l| l.name == n) {
                    break n;
                }
                k += 1;
            }
        });
        self.leaves.push(Leaf { name, constraint: c });
        i
    }

    fn or(&mut self, p: &mut Parser) -> Result<Ltl, ParseError> {
        let mut parts = vec![self.and(p)?];
        while p.eat_sym("|") {
            parts.push(self.and(p)?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Ltl::or(parts) })
    }

    fn and(&mut self, p: &mut Parser) -> Result<Ltl, ParseError> {
        let mut parts = vec![self.until(p)?];
        while p.eat_sym("&") {
            parts.push(self.until(p)?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Ltl::and(parts) })
    }

    fn until(&mut self, p: &mut Parser) -> Result<Ltl, ParseError> {
        let a = self.unary(p)?;
        if p.eat_kw("U") {
            let b = self.until(p)?;
            return Ok(Ltl::until(a, b));
        }
        Ok(a)
    }

    fn unary(&mut self, p: &mut Parser) -> Result<Ltl, ParseError> {
        let pos = p.pos();
        match p.peek().clone() {
            Tok::Ident(s) => {
                p.bump();
                match s.as_str() {
                    "X" => Ok(Ltl::next(self.unary(p)?)),
                    "G" => Ok(Ltl::globally(self.unary(p)?)),
                    "F" => Ok(Ltl::eventually(self.unary(p)?)),
                    "true" => Ok(Ltl::True),
                    "false" => Ok(Ltl::False),
                    name => match self.names.get(name) {
                        Some(&i) => Ok(Ltl::Atom(i)),
                        None => Err(ParseError::at(pos, format!("unknown constraint name `{}`", name))),
                    },
                }
            }
            Tok::Sym("(") => {
                p.bump();
                let f = self.or(p)?;
                p.expect_sym(")")?;
                Ok(f)
            }
            Tok::Sym("[") => {
                p.bump();
                let c = p.constraint(self.sig, Mode::Plain)?;
                p.expect_sym("]")?;
                if c.is_true() {
                    return Ok(Ltl::True);
                }
                Ok(Ltl::Atom(self.intern(None, c)))
            }
            t => Err(ParseError::at(pos, format!("expected property, found {}", t))),
        }
    }
}

/// `let name = constraint;` definitions followed by one temporal formula.
pub fn parse_property(src: &str, sig: &Signature) -> Result<Property, ParseError> {
    let mut p = Parser::new(src)?;
    let mut b = PropBuilder { sig, leaves: Vec::new(), names: BTreeMap::new() };
    while p.eat_kw("let") {
        let pos = p.pos();
        let name = p.ident()?;
        if TEMPORAL.contains(&name.as_str()) || KEYWORDS.contains(&name.as_str()) {
            return Err(ParseError::at(pos, format!("`{}` is reserved", name)));
        }
        if b.names.contains_key(&name) {
            return Err(ParseError::at(pos, format!("`{}` defined twice", name)));
        }
        p.expect_sym("=")?;
        let c = p.constraint(sig, Mode::Plain)?;
        p.expect_sym(";")?;
        if c.is_true() {
            return Err(ParseError::at(pos, format!("`{}` is trivially true; write `true` instead", name)));
        }
        let i = b.intern(Some(name.clone()), c);
        b.names.insert(name, i);
    }
    let root = b.or(&mut p)?;
    p.eat_sym(";");
    if !p.at_eof() {
        return p.err(format!("unexpected {} after property", p.peek()));
    }
    Ok(Property::new(b.leaves, root))
}
