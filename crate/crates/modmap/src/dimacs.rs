//! DIMACS CNF export and the literal map that names placement variables.

use std::fmt::Write;

use modmap_core::cnf::CnfProblem;
use modmap_core::encode::VarTable;

/// `p cnf V C` followed by one zero-terminated clause per line, in the
/// problem's clause order.
pub fn write_dimacs(p: &CnfProblem) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", p.num_vars, p.num_clauses()).unwrap();
    for c in &p.clauses {
        for l in &c.lits {
            write!(out, "{} ", l.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

/// One line `var node pe cycle iter` per placement variable. Auxiliary
/// variables are not listed.
pub fn write_litmap(vt: &VarTable) -> String {
    let mut out = String::from("c var node pe cycle iter\n");
    for (v, p) in vt.placements() {
        writeln!(out, "{} {} {} {} {}", v.get(), p.node, p.pe, p.cycle, p.iter).unwrap();
    }
    out
}

/// Header counts `(vars, clauses)` of a DIMACS file.
pub fn header_counts(text: &str) -> Option<(u32, usize)> {
    let line = text.lines().find(|l| l.starts_with("p "))?;
    let mut it = line.split_whitespace().skip(2);
    Some((it.next()?.parse().ok()?, it.next()?.parse().ok()?))
}
