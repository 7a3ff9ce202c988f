//! Name syntax tree and rendering.
//!
//! ```text
//! name      := comp ("+" comp)*
//! comp      := branches? core numeral suffix
//! core      := "" | "cyclo" | "bicyclo[" int "." int "." int "]"
//!            | "spiro[" int "." int "]" | "polycyclo[" edgelist "]"
//! edgelist  := int "-" int ("," int "-" int)*
//! branches  := branch ("-" branch)* "-"?
//! branch    := locants "-" mult? desc
//! locants   := int ("," int)*
//! mult      := numeral, present when two or more locants share the branch
//! desc      := "mono" | "(" branches? core numeral ")"
//! suffix    := "ito" | "idal" | "oid"
//! ```

use std::cmp::Ordering;

use crate::graph::ObjectType;

use super::numeral::{elided, numeral};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Core {
    /// Acyclic main chain of `n` vertices.
    Chain(usize),
    /// Single ring of `n` vertices.
    Cyclo(usize),
    /// Two rings sharing at least two vertices. `a >= b >= c` count the
    /// vertices on each bridge between the two bridgeheads.
    Bicyclo { a: usize, b: usize, c: usize, n: usize },
    /// Two rings sharing one vertex; `a >= b` count the non-shared vertices.
    Spiro { a: usize, b: usize, n: usize },
    /// Any other ring system, as an explicit 1-based edge list.
    Polycyclo { edges: Vec<(usize, usize)>, n: usize },
}

impl Core {
    /// Number of numbered positions.
    pub fn size(&self) -> usize {
        match *self {
            Core::Chain(n) | Core::Cyclo(n) => n,
            Core::Bicyclo { n, .. } | Core::Spiro { n, .. } | Core::Polycyclo { n, .. } => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suffix {
    Ito,
    Idal,
    Oid,
}

impl Suffix {
    pub fn for_type(t: ObjectType) -> Self {
        match t {
            ObjectType::Mitochondrion => Suffix::Ito,
            ObjectType::PyramidalNeuron => Suffix::Idal,
            ObjectType::Other => Suffix::Oid,
        }
    }

    pub fn object_type(self) -> ObjectType {
        match self {
            Suffix::Ito => ObjectType::Mitochondrion,
            Suffix::Idal => ObjectType::PyramidalNeuron,
            Suffix::Oid => ObjectType::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Suffix::Ito => "ito",
            Suffix::Idal => "idal",
            Suffix::Oid => "oid",
        }
    }
}

/// Identical sub-branches attached at one or more positions of the parent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Branch {
    pub locants: Vec<usize>,
    pub sub: NameAst,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NameAst {
    pub core: Core,
    pub branches: Vec<Branch>,
    /// `None` for branch descriptors.
    pub suffix: Option<Suffix>,
}

impl NameAst {
    fn is_single_node(&self) -> bool {
        self.core == Core::Chain(1) && self.branches.is_empty()
    }

    /// Total vertex count of the described graph.
    pub fn vertex_count(&self) -> usize {
        self.core.size()
            + self
                .branches
                .iter()
                .map(|b| b.locants.len() * b.sub.vertex_count())
                .sum::<usize>()
    }

    /// Groups identical sub-branches and orders groups by descriptor text.
    pub fn from_attachments(core: Core, attachments: Vec<(usize, NameAst)>, suffix: Option<Suffix>) -> Self {
        let mut keyed: Vec<(String, usize, NameAst)> = attachments
            .into_iter()
            .map(|(loc, sub)| (render_descriptor(&sub), loc, sub))
            .collect();
        keyed.sort_by(|a, b| natural_cmp(&a.0, &b.0).then(a.1.cmp(&b.1)));
        let mut branches: Vec<(String, Branch)> = Vec::new();
        for (text, loc, sub) in keyed {
            match branches.last_mut() {
                Some((t, b)) if *t == text => b.locants.push(loc),
                _ => branches.push((
                    text,
                    Branch {
                        locants: vec![loc],
                        sub,
                    },
                )),
            }
        }
        NameAst {
            core,
            branches: branches.into_iter().map(|(_, b)| b).collect(),
            suffix,
        }
    }
}

fn join_usize(items: &[usize], sep: &str) -> String {
    items.iter().map(usize::to_string).collect::<Vec<_>>().join(sep)
}

fn render_core(core: &Core) -> String {
    match core {
        Core::Chain(_) => String::new(),
        Core::Cyclo(_) => "cyclo".to_string(),
        Core::Bicyclo { a, b, c, .. } => format!("bicyclo[{a}.{b}.{c}]"),
        Core::Spiro { a, b, .. } => format!("spiro[{a}.{b}]"),
        Core::Polycyclo { edges, .. } => {
            let list: Vec<String> = edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
            format!("polycyclo[{}]", list.join(","))
        }
    }
}

fn render_branches(ast: &NameAst, out: &mut String) {
    for (i, b) in ast.branches.iter().enumerate() {
        if i > 0 {
            out.push('-');
        }
        out.push_str(&join_usize(&b.locants, ","));
        out.push('-');
        if b.locants.len() > 1 {
            out.push_str(&numeral(b.locants.len()).expect("non-empty locant list"));
        }
        out.push_str(&render_descriptor(&b.sub));
    }
}

/// `mono` for a single node, else the parenthesized suffix-free name.
pub fn render_descriptor(sub: &NameAst) -> String {
    if sub.is_single_node() {
        return "mono".to_string();
    }
    let mut out = String::from("(");
    render_into(sub, &mut out);
    out.push(')');
    out
}

fn render_into(ast: &NameAst, out: &mut String) {
    render_branches(ast, out);
    out.push_str(&render_core(&ast.core));
    match ast.suffix {
        Some(s) => {
            out.push_str(&elided(ast.core.size()));
            out.push_str(s.as_str());
        }
        None => out.push_str(&numeral(ast.core.size()).expect("core size >= 1")),
    }
}

/// Deterministic surface form of one component.
pub fn render(ast: &NameAst) -> String {
    let mut out = String::new();
    render_into(ast, &mut out);
    out
}

/// String order in which digit runs compare by value, so locant 2 sorts
/// before locant 10. Everything else compares byte-wise.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (a, b) = (a.as_bytes(), b.as_bytes());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].is_ascii_digit() && b[j].is_ascii_digit() {
            let si = i;
            while i < a.len() && a[i].is_ascii_digit() {
                i += 1;
            }
            let sj = j;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            let (da, db) = (&a[si..i], &b[sj..j]);
            let ord = da.len().cmp(&db.len()).then_with(|| da.cmp(db));
            if ord != Ordering::Equal {
                return ord;
            }
        } else {
            let ord = a[i].cmp(&b[j]);
            if ord != Ordering::Equal {
                return ord;
            }
            i += 1;
            j += 1;
        }
    }
    (a.len() - i).cmp(&(b.len() - j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono() -> NameAst {
        NameAst {
            core: Core::Chain(1),
            branches: vec![],
            suffix: None,
        }
    }

    fn chain(n: usize) -> NameAst {
        NameAst {
            core: Core::Chain(n),
            branches: vec![],
            suffix: None,
        }
    }

    #[test]
    fn chain_names() {
        let ast = NameAst {
            suffix: Some(Suffix::Ito),
            ..chain(5)
        };
        assert_eq!(render(&ast), "pentito");
        let ast = NameAst {
            suffix: Some(Suffix::Ito),
            ..chain(1)
        };
        assert_eq!(render(&ast), "monoito");
        let ast = NameAst {
            core: Core::Cyclo(6),
            branches: vec![],
            suffix: Some(Suffix::Idal),
        };
        assert_eq!(render(&ast), "cyclohexidal");
    }

    #[test]
    fn branch_rendering() {
        let ast = NameAst::from_attachments(Core::Chain(5), vec![(3, mono())], Some(Suffix::Ito));
        assert_eq!(render(&ast), "3-monopentito");
        let ast = NameAst::from_attachments(Core::Chain(7), vec![(4, mono()), (2, mono())], Some(Suffix::Ito));
        assert_eq!(render(&ast), "2,4-dimonoheptito");
        let ast = NameAst::from_attachments(Core::Cyclo(6), vec![(1, chain(3))], Some(Suffix::Ito));
        assert_eq!(render(&ast), "1-(tri)cyclohexito");
        let ast = NameAst::from_attachments(
            Core::Chain(9),
            vec![(5, chain(2)), (3, mono()), (5, chain(2))],
            Some(Suffix::Oid),
        );
        assert_eq!(render(&ast), "5,5-di(di)-3-monoenneoid");
    }

    #[test]
    fn bracket_cores() {
        let ast = NameAst {
            core: Core::Bicyclo { a: 3, b: 1, c: 0, n: 6 },
            branches: vec![],
            suffix: Some(Suffix::Ito),
        };
        assert_eq!(render(&ast), "bicyclo[3.1.0]hexito");
        let ast = NameAst {
            core: Core::Spiro { a: 4, b: 3, n: 8 },
            branches: vec![],
            suffix: Some(Suffix::Idal),
        };
        assert_eq!(render(&ast), "spiro[4.3]octoidal");
    }

    #[test]
    fn natural_order() {
        assert_eq!(natural_cmp("2-mono", "10-mono"), Ordering::Less);
        assert_eq!(natural_cmp("1,3", "1,3"), Ordering::Equal);
        assert_eq!(natural_cmp("(di)", "mono"), Ordering::Less);
        assert_eq!(natural_cmp("ab", "abc"), Ordering::Less);
    }
}
