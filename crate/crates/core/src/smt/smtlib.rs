//! SMT-LIB2 text protocol over a solver subprocess.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use num_traits::{Signed, Zero};

use crate::logic::{Atom, Cmp, Formula, Literal, Q, Sort, Term, Var};

use super::model::{ModelFragment, Value};
use super::{Backend, SatResult, SmtError, TheoryContext};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn parse(text: &str) -> Result<SExpr, SmtError> {
        let toks = tokenize(text);
        let mut pos = 0;
        let e = parse_at(&toks, &mut pos)?;
        Ok(e)
    }

    pub fn render(&self) -> String {
        match self {
            SExpr::Atom(a) => a.clone(),
            SExpr::List(xs) => format!("({})", xs.iter().map(SExpr::render).collect::<Vec<_>>().join(" ")),
        }
    }
}

fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' | ')' => {
                out.push(c.to_string());
                chars.next();
            }
            '|' => {
                let mut t = String::from("|");
                chars.next();
                for d in chars.by_ref() {
                    t.push(d);
                    if d == '|' {
                        break;
                    }
                }
                out.push(t);
            }
            '"' => {
                let mut t = String::from("\"");
                chars.next();
                while let Some(d) = chars.next() {
                    t.push(d);
                    if d == '"' {
                        if chars.peek() == Some(&'"') {
                            t.push('"');
                            chars.next();
                        } else {
                            break;
                        }
                    }
                }
                out.push(t);
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut t = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || d == '(' || d == ')' {
                        break;
                    }
                    t.push(d);
                    chars.next();
                }
                out.push(t);
            }
        }
    }
    out
}

fn parse_at(toks: &[String], pos: &mut usize) -> Result<SExpr, SmtError> {
    let t = toks.get(*pos).ok_or_else(|| SmtError::Parse("unexpected end of solver output".into()))?;
    *pos += 1;
    match t.as_str() {
        "(" => {
            let mut xs = Vec::new();
            loop {
                match toks.get(*pos).map(String::as_str) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(SExpr::List(xs));
                    }
                    Some(_) => xs.push(parse_at(toks, pos)?),
                    None => return Err(SmtError::Parse("unbalanced solver output".into())),
                }
            }
        }
        ")" => Err(SmtError::Parse("unexpected ')'".into())),
        _ => Ok(SExpr::Atom(t.clone())),
    }
}

fn sym(name: &str) -> String {
    format!("|{}|", name)
}

fn sort_name(s: &Sort) -> String {
    match s {
        Sort::Rat => "Real".into(),
        Sort::Named(n) => sym(&format!("S_{}", n)),
    }
}

fn var_name(v: &Var) -> String {
    sym(&v.to_string())
}

pub fn real(q: &Q) -> String {
    let body = |q: &Q| {
        if q.is_integer() {
            format!("{}.0", q.numer())
        } else {
            format!("(/ {}.0 {}.0)", q.numer(), q.denom())
        }
    };
    if q.is_negative() {
        format!("(- {})", body(&-q))
    } else {
        body(q)
    }
}

pub fn term(t: &Term) -> String {
    match t {
        Term::Var(v) => var_name(v),
        Term::Const(c) => sym(&c.name),
        Term::Num(q) => real(q),
        Term::App(f, args) => format!("({} {})", sym(&f.name), args.iter().map(term).collect::<Vec<_>>().join(" ")),
    }
}

fn atom(a: &Atom) -> String {
    match a {
        Atom::Eq(x, y) => format!("(= {} {})", term(x), term(y)),
        Atom::Rel(r, args) if args.is_empty() => sym(&r.name),
        Atom::Rel(r, args) => format!("({} {})", sym(&r.name), args.iter().map(term).collect::<Vec<_>>().join(" ")),
        Atom::Lin(l) => {
            let mut parts: Vec<String> =
                l.expr.coeffs.iter().map(|(t, c)| format!("(* {} {})", real(c), term(t))).collect();
            if parts.is_empty() {
                parts.push("0.0".into());
            }
            let sum = if parts.len() == 1 { parts.pop().unwrap() } else { format!("(+ {})", parts.join(" ")) };
            let op = match l.cmp {
                Cmp::Eq => "=",
                Cmp::Le => "<=",
                Cmp::Lt => "<",
            };
            format!("({} {} {})", op, sum, real(&-l.expr.constant.clone()))
        }
    }
}

pub fn literal(l: &Literal) -> String {
    if l.positive {
        atom(&l.atom)
    } else {
        format!("(not {})", atom(&l.atom))
    }
}

pub fn formula(f: &Formula) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Lit(l) => literal(l),
        Formula::Not(g) => format!("(not {})", formula(g)),
        Formula::And(gs) => format!("(and {})", gs.iter().map(formula).collect::<Vec<_>>().join(" ")),
        Formula::Or(gs) => format!("(or {})", gs.iter().map(formula).collect::<Vec<_>>().join(" ")),
        Formula::Exists(vs, g) => format!(
            "(exists ({}) {})",
            vs.iter().map(|v| format!("({} {})", var_name(v), sort_name(&v.sort))).collect::<Vec<_>>().join(" "),
            formula(g)
        ),
    }
}

/// The declaration preamble for a theory context.
pub fn preamble(ctx: &TheoryContext) -> Vec<String> {
    let sig = &ctx.signature;
    let mut out = Vec::new();
    for s in &sig.sorts {
        if !s.is_rat() {
            out.push(format!("(declare-sort {} 0)", sort_name(s)));
        }
    }
    for f in sig.functions.values() {
        let args: Vec<String> = f.args.iter().map(sort_name).collect();
        out.push(format!("(declare-fun {} ({}) {})", sym(&f.name), args.join(" "), sort_name(&f.result)));
    }
    for r in sig.relations.values() {
        let args: Vec<String> = r.args.iter().map(sort_name).collect();
        out.push(format!("(declare-fun {} ({}) Bool)", sym(&r.name), args.join(" ")));
    }
    for c in sig.constants.values() {
        out.push(format!("(declare-fun {} () {})", sym(&c.name), sort_name(&c.sort)));
    }
    for b in ctx.background() {
        out.push(format!("(assert {})", formula(&b)));
    }
    out
}

/// Full standalone script for a query; used for logging and debugging.
pub fn script(ctx: &TheoryContext, f: &Formula) -> String {
    let mut lines = vec!["(set-logic ALL)".to_string()];
    lines.extend(preamble(ctx));
    for v in f.free_vars() {
        lines.push(format!("(declare-fun {} () {})", var_name(&v), sort_name(&v.sort)));
    }
    lines.push(format!("(assert {})", formula(f)));
    lines.push("(check-sat)".into());
    lines.join("\n")
}

struct Proc {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Drop for Proc {
    fn drop(&mut self) {
        let _ = writeln!(self.stdin, "(exit)");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub struct SmtLibSolver {
    bin: PathBuf,
    args: Vec<String>,
    timeout: Duration,
    proc: Option<Proc>,
    declared: Option<TheoryContext>,
}

impl SmtLibSolver {
    pub fn new(bin: PathBuf, args: Vec<String>, timeout: Duration) -> SmtLibSolver {
        SmtLibSolver { bin, args, timeout, proc: None, declared: None }
    }

    /// Default command-line flags for known solvers reading SMT-LIB2 on stdin.
    pub fn default_args(bin: &std::path::Path) -> Vec<String> {
        let name = bin.file_name().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
        if name.contains("z3") {
            vec!["-in".into(), "-smt2".into()]
        } else if name.contains("cvc5") || name.contains("cvc4") {
            vec!["--lang=smt2".into(), "--incremental".into(), "--produce-models".into()]
        } else {
            Vec::new()
        }
    }

    fn is_z3(&self) -> bool {
        self.bin.file_name().is_some_and(|s| s.to_string_lossy().contains("z3"))
    }

    fn spawn(&mut self) -> Result<(), SmtError> {
        let mut child = Command::new(&self.bin)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SmtError::Process(format!("cannot start {}: {}", self.bin.display(), e)))?;
        let stdin = child.stdin.take().unwrap();
        let stdout = child.stdout.take().unwrap();
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        self.proc = Some(Proc { child, stdin, lines: rx });
        self.declared = None;
        self.send("(set-option :print-success false)")?;
        self.send("(set-option :produce-models true)")?;
        if self.is_z3() {
            self.send(&format!("(set-option :timeout {})", self.timeout.as_millis()))?;
        }
        self.send("(set-logic ALL)")?;
        Ok(())
    }

    fn send(&mut self, cmd: &str) -> Result<(), SmtError> {
        let p = self.proc.as_mut().ok_or_else(|| SmtError::Process("solver not running".into()))?;
        writeln!(p.stdin, "{}", cmd).map_err(|e| SmtError::Process(format!("write failed: {}", e)))?;
        p.stdin.flush().map_err(|e| SmtError::Process(format!("flush failed: {}", e)))
    }

    /// Reads one complete s-expression or token.
    fn read(&mut self) -> Result<String, SmtError> {
        let wait = self.timeout + Duration::from_secs(2);
        let p = self.proc.as_mut().ok_or_else(|| SmtError::Process("solver not running".into()))?;
        let mut buf = String::new();
        let mut depth: i64 = 0;
        loop {
            match p.lines.recv_timeout(wait) {
                Ok(line) => {
                    let line = line.trim();
                    if line.is_empty() {
                        continue;
                    }
                    depth += line.matches('(').count() as i64 - line.matches(')').count() as i64;
                    buf.push_str(line);
                    buf.push(' ');
                    if depth <= 0 {
                        break;
                    }
                }
                Err(RecvTimeoutError::Timeout) => {
                    self.proc = None;
                    return Err(SmtError::Timeout);
                }
                Err(RecvTimeoutError::Disconnected) => {
                    self.proc = None;
                    return Err(SmtError::Process("solver exited".into()));
                }
            }
        }
        let out = buf.trim().to_string();
        if out.starts_with("(error") {
            return Err(SmtError::Process(out));
        }
        Ok(out)
    }

    fn ensure(&mut self, ctx: &TheoryContext) -> Result<(), SmtError> {
        if self.proc.is_none() {
            self.spawn()?;
        }
        if self.declared.as_ref() != Some(ctx) {
            if self.declared.is_some() {
                self.send("(reset)")?;
                self.send("(set-option :produce-models true)")?;
                if self.is_z3() {
                    self.send(&format!("(set-option :timeout {})", self.timeout.as_millis()))?;
                }
                self.send("(set-logic ALL)")?;
            }
            for line in preamble(ctx) {
                self.send(&line)?;
            }
            self.declared = Some(ctx.clone());
        }
        Ok(())
    }

    fn run(&mut self, ctx: &TheoryContext, f: &Formula, model: Option<&[Formula]>) -> Result<SatResult, SmtError> {
        self.ensure(ctx)?;
        self.send("(push 1)")?;
        let mut fv = f.free_vars();
        if let Some(extra) = model {
            for g in extra {
                fv.extend(g.free_vars());
            }
        }
        for v in &fv {
            self.send(&format!("(declare-fun {} () {})", var_name(v), sort_name(&v.sort)))?;
        }
        self.send(&format!("(assert {})", formula(f)))?;
        self.send("(check-sat)")?;
        let reply = self.read()?;
        let result = match reply.as_str() {
            "sat" => match model {
                Some(extra) => {
                    let m = self.fetch_model(ctx, f, extra)?;
                    SatResult::sat(Some(m))
                }
                None => SatResult::sat(None),
            },
            "unsat" => SatResult::unsat(),
            "unknown" => SatResult::unknown("solver returned unknown"),
            other => return Err(SmtError::Parse(format!("unexpected check-sat reply: {}", other))),
        };
        self.send("(pop 1)")?;
        Ok(result)
    }

    fn fetch_model(&mut self, ctx: &TheoryContext, f: &Formula, extra: &[Formula]) -> Result<ModelFragment, SmtError> {
        let mut terms: BTreeSet<Term> = BTreeSet::new();
        let mut rels: BTreeSet<Atom> = BTreeSet::new();
        let mut atoms = f.atoms();
        for g in extra {
            atoms.extend(g.atoms());
        }
        for c in ctx.signature.constants.values() {
            terms.insert(c.term());
        }
        for a in &atoms {
            for t in a.terms() {
                let mut subs = Vec::new();
                t.subterms(&mut subs);
                terms.extend(subs.into_iter().filter(|s| !matches!(s, Term::Num(_))));
            }
            if let Atom::Rel(..) = a {
                rels.insert(a.clone());
            }
        }
        let terms: Vec<Term> = terms.into_iter().collect();
        let rels: Vec<Atom> = rels.into_iter().collect();
        let mut values: BTreeMap<Term, Value> = BTreeMap::new();
        let mut truth: Vec<bool> = Vec::new();
        if !terms.is_empty() {
            let q = terms.iter().map(term).collect::<Vec<_>>().join(" ");
            self.send(&format!("(get-value ({}))", q))?;
            let reply = SExpr::parse(&self.read()?)?;
            let SExpr::List(pairs) = reply else { return Err(SmtError::Parse("get-value reply".into())) };
            if pairs.len() != terms.len() {
                return Err(SmtError::Parse("get-value arity mismatch".into()));
            }
            for (t, p) in terms.iter().zip(pairs) {
                let SExpr::List(kv) = p else { return Err(SmtError::Parse("get-value pair".into())) };
                let v = kv.get(1).ok_or_else(|| SmtError::Parse("get-value pair".into()))?;
                values.insert(t.clone(), decode_value(v, &t.sort())?);
            }
        }
        if !rels.is_empty() {
            let q = rels.iter().map(atom).collect::<Vec<_>>().join(" ");
            self.send(&format!("(get-value ({}))", q))?;
            let reply = SExpr::parse(&self.read()?)?;
            let SExpr::List(pairs) = reply else { return Err(SmtError::Parse("get-value reply".into())) };
            for p in pairs {
                let SExpr::List(kv) = p else { return Err(SmtError::Parse("get-value pair".into())) };
                truth.push(matches!(kv.get(1), Some(SExpr::Atom(a)) if a == "true"));
            }
        }
        // prefer constant names as element labels
        let mut rename: BTreeMap<Value, Value> = BTreeMap::new();
        for c in ctx.signature.constants.values() {
            if let Some(v @ Value::Elem(_)) = values.get(&c.term()) {
                let e = rename.entry(v.clone()).or_insert_with(|| Value::Elem(c.name.clone()));
                if let Value::Elem(cur) = e {
                    if c.name < *cur {
                        *e = Value::Elem(c.name.clone());
                    }
                }
            }
        }
        let norm = |v: &Value| rename.get(v).cloned().unwrap_or_else(|| v.clone());
        let mut m = ModelFragment::default();
        for (t, v) in &values {
            let v = norm(v);
            m.note(&t.sort(), &v);
            match t {
                Term::Var(x) => {
                    m.variables.insert(x.clone(), v);
                }
                Term::Const(c) => {
                    m.constants.insert(c.name.clone(), v);
                }
                Term::App(g, args) => {
                    let key: Option<Vec<Value>> = args.iter().map(|a| value_of(&values, a).map(|x| norm(&x))).collect();
                    if let Some(key) = key {
                        m.functions.entry(g.name.clone()).or_default().insert(key, v);
                    }
                }
                Term::Num(_) => {}
            }
        }
        for (a, holds) in rels.iter().zip(truth) {
            let Atom::Rel(r, args) = a else { continue };
            if !holds {
                continue;
            }
            let key: Option<Vec<Value>> = args.iter().map(|t| value_of(&values, t).map(|x| norm(&x))).collect();
            if let Some(key) = key {
                for (t, v) in args.iter().zip(&key) {
                    m.note(&t.sort(), v);
                }
                m.relations.entry(r.name.clone()).or_default().insert(key);
            }
        }
        Ok(m)
    }
}

fn value_of(values: &BTreeMap<Term, Value>, t: &Term) -> Option<Value> {
    match t {
        Term::Num(q) => Some(Value::Rat(q.clone())),
        _ => values.get(t).cloned(),
    }
}

fn decode_value(e: &SExpr, sort: &Sort) -> Result<Value, SmtError> {
    if sort.is_rat() {
        return decode_real(e).map(Value::Rat);
    }
    let label = match e {
        SExpr::List(xs) if xs.len() == 3 && xs[0] == SExpr::Atom("as".into()) => xs[1].render(),
        other => other.render(),
    };
    Ok(Value::Elem(label.trim_matches('|').into()))
}

fn decode_real(e: &SExpr) -> Result<Q, SmtError> {
    match e {
        SExpr::Atom(a) => parse_decimal(a),
        SExpr::List(xs) => match xs.as_slice() {
            [SExpr::Atom(op), x] if op == "-" => Ok(-decode_real(x)?),
            [SExpr::Atom(op), x, y] if op == "/" => {
                let d = decode_real(y)?;
                if d.is_zero() {
                    return Err(SmtError::Parse("division by zero in model".into()));
                }
                Ok(decode_real(x)? / d)
            }
            _ => Err(SmtError::Parse(format!("unsupported real value {}", e.render()))),
        },
    }
}

fn parse_decimal(a: &str) -> Result<Q, SmtError> {
    let bad = || SmtError::Parse(format!("bad numeral {}", a));
    let (int, frac) = a.split_once('.').unwrap_or((a, ""));
    let digits = format!("{}{}", int, frac);
    let n: num_bigint::BigInt = digits.parse().map_err(|_| bad())?;
    let d = num_traits::pow(num_bigint::BigInt::from(10), frac.len());
    Ok(Q::new(n, d))
}

impl Backend for SmtLibSolver {
    fn name(&self) -> String {
        self.bin.display().to_string()
    }

    fn check(&mut self, ctx: &TheoryContext, f: &Formula, model: Option<&[Formula]>) -> Result<SatResult, SmtError> {
        match self.run(ctx, f, model) {
            Ok(r) => Ok(r),
            Err(SmtError::Timeout) => Ok(SatResult::unknown("timeout")),
            Err(e) => {
                self.proc = None;
                Err(e)
            }
        }
    }
}
