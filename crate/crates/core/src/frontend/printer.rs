use std::collections::BTreeSet;
use std::fmt::Write;

use crate::dmt::Dmt;
use crate::logic::Sort;
use crate::ltlf::{Ltl, Property};

fn theory_name(d: &Dmt) -> &'static str {
    let sig = &d.signature;
    let uf = sig.sorts.iter().any(|s| !s.is_rat()) || !sig.functions.is_empty() || !sig.relations.is_empty();
    match (uf, sig.uses_rat()) {
        (true, true) => "euf+lra",
        (false, true) => "lra",
        _ => "euf",
    }
}

fn sorts(xs: &[Sort]) -> String {
    xs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
}

/// Concrete syntax that `parse_spec` reads back to an identical process.
pub fn print_spec(d: &Dmt) -> String {
    let sig = &d.signature;
    let mut out = String::new();
    writeln!(out, "theory {};", theory_name(d)).unwrap();
    if !sig.sorts.is_empty() {
        writeln!(out, "sort {};", sorts(&sig.sorts)).unwrap();
    }
    for c in sig.constants.values() {
        writeln!(out, "const {} : {};", c.name, c.sort).unwrap();
    }
    for g in &d.ctx.distinct {
        let names: Vec<&str> = g.iter().map(|c| &*c.name).collect();
        writeln!(out, "distinct {};", names.join(", ")).unwrap();
    }
    for f in sig.functions.values() {
        writeln!(out, "fun {}({}) : {};", f.name, sorts(&f.args), f.result).unwrap();
    }
    for r in sig.relations.values() {
        writeln!(out, "rel {}({});", r.name, sorts(&r.args)).unwrap();
    }
    for v in &d.variables {
        writeln!(out, "var {} : {} = {};", v.name, v.sort, d.initial[v]).unwrap();
    }
    for l in &d.ctx.facts {
        writeln!(out, "fact {};", l).unwrap();
    }
    for t in &d.transitions {
        writeln!(out, "trans {} : {};", t.name, t.guard).unwrap();
    }
    out
}

fn valid_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !["X", "G", "F", "U", "true", "false", "let", "exists"].contains(&s)
}

fn show(p: &Ltl, names: &[String], out: &mut String) {
    match p {
        Ltl::True => out.push_str("true"),
        Ltl::False => out.push_str("false"),
        Ltl::Atom(i) => out.push_str(&names[*i]),
        Ltl::And(xs) | Ltl::Or(xs) => {
            let op = if matches!(p, Ltl::And(_)) { " & " } else { " | " };
            out.push('(');
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(op);
                }
                show(x, names, out);
            }
            out.push(')');
        }
        Ltl::Next(x) => {
            out.push_str("X ");
            show(x, names, out);
        }
        Ltl::Globally(x) => {
            out.push_str("G ");
            show(x, names, out);
        }
        Ltl::Until(a, b) if **a == Ltl::True => {
            out.push_str("F ");
            show(b, names, out);
        }
        Ltl::Until(a, b) => {
            out.push('(');
            show(a, names, out);
            out.push_str(" U ");
            show(b, names, out);
            out.push(')');
        }
    }
}

/// Every leaf becomes a `let`; names that cannot be read back are replaced.
pub fn print_property(p: &Property) -> String {
    let mut seen = BTreeSet::new();
    let mut names = Vec::new();
    for (i, l) in p.leaves.iter().enumerate() {
        let mut n = if valid_name(&l.name) && !seen.contains(&l.name) { l.name.clone() } else { format!("c{}", i) };
        while seen.contains(&n) {
            n.push('_');
        }
        seen.insert(n.clone());
        names.push(n);
    }
    let mut out = String::new();
    for (n, l) in names.iter().zip(&p.leaves) {
        writeln!(out, "let {} = {};", n, l.constraint).unwrap();
    }
    show(&p.root, &names, &mut out);
    out.push('\n');
    out
}
