//! DIMACS CNF parsing and a small DPLL solver.
//!
//! The checker can export collision queries as CNF goals for external
//! solvers; this module provides an independent way to decide those
//! goals in-process. It shares no code with the specialized collision
//! algorithm, so agreement between the two routes is a meaningful check.

use thiserror::Error;

/// A formula in conjunctive normal form. Literals are non-zero integers;
/// negative literals negate the variable with the absolute value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed literal `{0}`")]
    MalformedLiteral(String),
    #[error("literal {0} exceeds the declared variable count")]
    LiteralOutOfRange(i64),
    #[error("last clause is not terminated by 0")]
    UnterminatedClause,
    #[error("declared {declared} clauses but found {found}")]
    ClauseCountMismatch { declared: usize, found: usize },
}

/// Parses DIMACS CNF text: `c` comment lines, one `p cnf <vars> <clauses>`
/// header, then whitespace-separated literals with `0` ending each clause.
pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let mut num_vars: Option<usize> = None;
    let mut declared_clauses = 0usize;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if num_vars.is_some() {
                return Err(DimacsError::MalformedHeader("duplicate header".to_string()));
            }
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 3 || fields[0] != "cnf" {
                return Err(DimacsError::MalformedHeader(line.to_string()));
            }
            num_vars = Some(
                fields[1]
                    .parse()
                    .map_err(|_| DimacsError::MalformedHeader(line.to_string()))?,
            );
            declared_clauses = fields[2]
                .parse()
                .map_err(|_| DimacsError::MalformedHeader(line.to_string()))?;
            continue;
        }
        let vars = num_vars.ok_or(DimacsError::MissingHeader)?;
        for token in line.split_whitespace() {
            let lit: i64 = token
                .parse()
                .map_err(|_| DimacsError::MalformedLiteral(token.to_string()))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() as usize > vars {
                    return Err(DimacsError::LiteralOutOfRange(lit));
                }
                current.push(lit);
            }
        }
    }

    let num_vars = num_vars.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    if clauses.len() != declared_clauses {
        return Err(DimacsError::ClauseCountMismatch {
            declared: declared_clauses,
            found: clauses.len(),
        });
    }
    Ok(Cnf { num_vars, clauses })
}

/// Renders a formula in DIMACS text form.
pub fn to_dimacs(cnf: &Cnf) -> String {
    let mut out = format!("p cnf {} {}\n", cnf.num_vars, cnf.clauses.len());
    for clause in &cnf.clauses {
        for lit in clause {
            out.push_str(&lit.to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

/// Decides satisfiability by DPLL with unit propagation and pure literal
/// elimination. Returns a satisfying assignment indexed by variable
/// (entry 0 is unused) or `None` when unsatisfiable. Variables that end
/// up unconstrained are reported as false.
pub fn solve(cnf: &Cnf) -> Option<Vec<bool>> {
    let mut assignment: Vec<Option<bool>> = vec![None; cnf.num_vars + 1];
    if dpll(cnf.clauses.clone(), &mut assignment) {
        Some(assignment.into_iter().map(|v| v.unwrap_or(false)).collect())
    } else {
        None
    }
}

pub fn is_satisfiable(cnf: &Cnf) -> bool {
    solve(cnf).is_some()
}

fn dpll(mut clauses: Vec<Vec<i64>>, assignment: &mut Vec<Option<bool>>) -> bool {
    loop {
        if clauses.is_empty() {
            return true;
        }
        if clauses.iter().any(|c| c.is_empty()) {
            return false;
        }
        if let Some(&lit) = clauses.iter().find(|c| c.len() == 1).map(|c| &c[0]) {
            assign(assignment, lit);
            clauses = propagate(clauses, lit);
            continue;
        }
        if let Some(lit) = find_pure_literal(&clauses) {
            assign(assignment, lit);
            clauses = propagate(clauses, lit);
            continue;
        }
        break;
    }

    let lit = clauses[0][0];
    let checkpoint = assignment.clone();

    assign(assignment, lit);
    if dpll(propagate(clauses.clone(), lit), assignment) {
        return true;
    }
    assignment.clone_from(&checkpoint);

    assign(assignment, -lit);
    if dpll(propagate(clauses, -lit), assignment) {
        return true;
    }
    assignment.clone_from(&checkpoint);
    false
}

fn assign(assignment: &mut [Option<bool>], lit: i64) {
    assignment[lit.unsigned_abs() as usize] = Some(lit > 0);
}

/// Applies a decision: satisfied clauses disappear, the opposite literal
/// is removed everywhere else.
fn propagate(clauses: Vec<Vec<i64>>, lit: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::with_capacity(clauses.len());
    for mut clause in clauses {
        if clause.contains(&lit) {
            continue;
        }
        clause.retain(|&l| l != -lit);
        out.push(clause);
    }
    out
}

fn find_pure_literal(clauses: &[Vec<i64>]) -> Option<i64> {
    let mut seen_pos = std::collections::BTreeSet::new();
    let mut seen_neg = std::collections::BTreeSet::new();
    for clause in clauses {
        for &lit in clause {
            if lit > 0 {
                seen_pos.insert(lit);
            } else {
                seen_neg.insert(-lit);
            }
        }
    }
    for &v in &seen_pos {
        if !seen_neg.contains(&v) {
            return Some(v);
        }
    }
    seen_neg.iter().find(|v| !seen_pos.contains(*v)).map(|&v| -v)
}
