//! Recursive-descent parser from names back to graphs.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{NodeId, NodeRole, ObjectType, ReducedEdge, ReducedGraph, ReducedNode, Topology};

use super::ast::{Core, NameAst, Suffix};
use super::numeral::candidates;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("locant {locant} at byte {pos} is outside 1..={size}")]
    LocantOutOfRange { pos: usize, locant: usize, size: usize },
    #[error("bracket values at byte {pos} do not add up: {msg}")]
    BracketArithmeticMismatch { pos: usize, msg: String },
    #[error("multiplier at byte {pos} is {found} but {expected} locants are listed")]
    MultiplierMismatch { pos: usize, expected: usize, found: usize },
    #[error("invalid ring core at byte {pos}: {msg}")]
    InvalidCore { pos: usize, msg: String },
}

impl ParseError {
    /// Byte offset of the offending token.
    pub fn position(&self) -> usize {
        match *self {
            ParseError::Syntax { pos, .. }
            | ParseError::LocantOutOfRange { pos, .. }
            | ParseError::BracketArithmeticMismatch { pos, .. }
            | ParseError::MultiplierMismatch { pos, .. }
            | ParseError::InvalidCore { pos, .. } => pos,
        }
    }
}

const SUFFIXES: [(&str, Suffix); 3] = [("idal", Suffix::Idal), ("ito", Suffix::Ito), ("oid", Suffix::Oid)];

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<(), ParseError> {
        if self.eat(lit) {
            Ok(())
        } else {
            self.syntax(format!("expected '{lit}'"))
        }
    }

    fn int(&mut self) -> Result<usize, ParseError> {
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return self.syntax("expected a number");
        }
        let text = &self.rest()[..digits];
        let value = text.parse().or_else(|_| self.syntax("number too large"))?;
        self.pos += digits;
        Ok(value)
    }

    fn bracket_ints(&mut self, count: usize) -> Result<Vec<usize>, ParseError> {
        let mut out = vec![self.int()?];
        while out.len() < count {
            if !(self.eat(".") || self.eat(",")) {
                return self.syntax("expected '.' between bracket values");
            }
            out.push(self.int()?);
        }
        self.expect("]")?;
        Ok(out)
    }

    fn name(&mut self) -> Result<Vec<NameAst>, ParseError> {
        let mut comps = vec![self.component()?];
        while self.eat("+") {
            let at = self.pos;
            comps.push(self.component()?);
            if comps.last().map(|c| c.suffix) != comps.first().map(|c| c.suffix) {
                return Err(ParseError::Syntax {
                    pos: at,
                    msg: "components disagree on the object suffix".into(),
                });
            }
        }
        if self.pos != self.src.len() {
            return self.syntax("unexpected trailing input");
        }
        Ok(comps)
    }

    fn component(&mut self) -> Result<NameAst, ParseError> {
        let branches = self.branches()?;
        let core_at = self.pos;
        let kind = self.core_prefix()?;
        let (n, suffix) = self.numeral_then(true)?;
        self.finish(kind, n, branches, Some(suffix), core_at)
    }

    fn descriptor(&mut self) -> Result<NameAst, ParseError> {
        if self.eat("mono") {
            return Ok(NameAst {
                core: Core::Chain(1),
                branches: vec![],
                suffix: None,
            });
        }
        if !self.eat("(") {
            return self.syntax("expected 'mono' or '('");
        }
        let branches = self.branches()?;
        let core_at = self.pos;
        let kind = self.core_prefix()?;
        let (n, _) = self.numeral_then(false)?;
        self.expect(")")?;
        self.finish(kind, n, branches, None, core_at)
    }

    /// Zero or more `locants-[mult]desc` groups separated by `-`.
    fn branches(&mut self) -> Result<Vec<(usize, Vec<usize>, NameAst)>, ParseError> {
        let mut out = Vec::new();
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let at = self.pos;
            let mut locants = vec![self.int()?];
            while self.eat(",") {
                locants.push(self.int()?);
            }
            self.expect("-")?;
            if locants.len() > 1 {
                self.multiplier(locants.len())?;
            }
            let sub = self.descriptor()?;
            out.push((at, locants, sub));
            if self.rest().starts_with('-') {
                self.pos += 1;
                if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn multiplier(&mut self, expected: usize) -> Result<(), ParseError> {
        let at = self.pos;
        let mut seen = None;
        for (value, len, _) in candidates(self.rest()) {
            let after = &self.rest()[len..];
            if after.starts_with("mono") || after.starts_with('(') {
                if value == expected {
                    self.pos += len;
                    return Ok(());
                }
                seen.get_or_insert(value);
            }
        }
        match seen {
            Some(found) => Err(ParseError::MultiplierMismatch { pos: at, expected, found }),
            None => self.syntax(format!("expected multiplier for {expected} locants")),
        }
    }

    fn core_prefix(&mut self) -> Result<CoreKind, ParseError> {
        if self.eat("polycyclo[") {
            let mut edges = Vec::new();
            loop {
                let a = self.int()?;
                self.expect("-")?;
                let b = self.int()?;
                edges.push((a, b));
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("]")?;
            return Ok(CoreKind::Poly(edges));
        }
        if self.eat("bicyclo[") {
            let v = self.bracket_ints(3)?;
            return Ok(CoreKind::Bi(v[0], v[1], v[2]));
        }
        if self.eat("spiro[") {
            let v = self.bracket_ints(2)?;
            return Ok(CoreKind::Spiro(v[0], v[1]));
        }
        if self.eat("cyclo") {
            return Ok(CoreKind::Cyclo);
        }
        Ok(CoreKind::Chain)
    }

    /// Numeral followed by a suffix and end of component (`top`) or by `)`.
    fn numeral_then(&mut self, top: bool) -> Result<(usize, Suffix), ParseError> {
        let cands = candidates(self.rest());
        // prefer a split that ends the component; otherwise let the caller
        // report the trailing input
        for strict in [true, false] {
            for &(value, len, _) in &cands {
                let after = &self.rest()[len..];
                if top {
                    for (text, suffix) in SUFFIXES {
                        if let Some(tail) = after.strip_prefix(text) {
                            if !strict || tail.is_empty() || tail.starts_with('+') {
                                self.pos += len + text.len();
                                return Ok((value, suffix));
                            }
                        }
                    }
                } else if after.starts_with(')') {
                    self.pos += len;
                    return Ok((value, Suffix::Oid));
                }
            }
        }
        if top {
            self.syntax("expected numeral followed by 'ito', 'idal' or 'oid'")
        } else {
            self.syntax("expected numeral followed by ')'")
        }
    }

    fn finish(
        &self,
        kind: CoreKind,
        n: usize,
        raw: Vec<(usize, Vec<usize>, NameAst)>,
        suffix: Option<Suffix>,
        at: usize,
    ) -> Result<NameAst, ParseError> {
        let core = kind.validate(n, at)?;
        let mut attachments = Vec::new();
        for (pos, locants, sub) in raw {
            for loc in locants {
                if loc == 0 || loc > n {
                    return Err(ParseError::LocantOutOfRange {
                        pos,
                        locant: loc,
                        size: n,
                    });
                }
                attachments.push((loc, sub.clone()));
            }
        }
        Ok(NameAst::from_attachments(core, attachments, suffix))
    }
}

enum CoreKind {
    Chain,
    Cyclo,
    Bi(usize, usize, usize),
    Spiro(usize, usize),
    Poly(Vec<(usize, usize)>),
}

impl CoreKind {
    fn validate(self, n: usize, pos: usize) -> Result<Core, ParseError> {
        let invalid = |msg: String| Err(ParseError::InvalidCore { pos, msg });
        match self {
            CoreKind::Chain => Ok(Core::Chain(n)),
            CoreKind::Cyclo if n < 3 => invalid(format!("a ring needs at least 3 vertices, got {n}")),
            CoreKind::Cyclo => Ok(Core::Cyclo(n)),
            CoreKind::Bi(a, b, c) => {
                if a + b + c + 2 != n {
                    return Err(ParseError::BracketArithmeticMismatch {
                        pos,
                        msg: format!("{a}+{b}+{c}+2 != {n}"),
                    });
                }
                let mut s = [a, b, c];
                s.sort_unstable_by(|x, y| y.cmp(x));
                if s[1] == 0 {
                    return invalid("two empty bridges would duplicate an edge".into());
                }
                Ok(Core::Bicyclo {
                    a: s[0],
                    b: s[1],
                    c: s[2],
                    n,
                })
            }
            CoreKind::Spiro(a, b) => {
                if a + b + 1 != n {
                    return Err(ParseError::BracketArithmeticMismatch {
                        pos,
                        msg: format!("{a}+{b}+1 != {n}"),
                    });
                }
                if a.min(b) < 2 {
                    return invalid("each spiro ring needs at least 2 non-shared vertices".into());
                }
                Ok(Core::Spiro {
                    a: a.max(b),
                    b: a.min(b),
                    n,
                })
            }
            CoreKind::Poly(edges) => {
                let mut seen = BTreeSet::new();
                for &(u, v) in &edges {
                    if u == 0 || v == 0 || u > n || v > n {
                        return invalid(format!("edge {u}-{v} outside 1..={n}"));
                    }
                    if u == v {
                        return invalid(format!("self-loop at {u}"));
                    }
                    if !seen.insert((u.min(v), u.max(v))) {
                        return invalid(format!("duplicate edge {u}-{v}"));
                    }
                }
                let topo = Topology::from_edges((0..n as NodeId).collect(), seen.iter().map(|&(u, v)| (u - 1, v - 1)));
                if topo.component_labels().1 != 1 {
                    return invalid("ring core is disconnected".into());
                }
                Ok(Core::Polycyclo {
                    edges: seen.into_iter().collect(),
                    n,
                })
            }
        }
    }
}

/// Parses a name into per-component syntax trees.
pub fn parse_name_ast(s: &str) -> Result<Vec<NameAst>, ParseError> {
    Parser { src: s, pos: 0 }.name()
}

struct Builder {
    edges: Vec<(NodeId, NodeId)>,
    next: NodeId,
}

impl Builder {
    fn fresh(&mut self) -> NodeId {
        self.next += 1;
        self.next - 1
    }

    fn link(&mut self, ids: &[NodeId]) {
        for w in ids.windows(2) {
            self.edges.push((w[0], w[1]));
        }
    }

    /// Emits one component; returns the ids of its numbered positions.
    fn emit(&mut self, ast: &NameAst) -> Vec<NodeId> {
        let n = ast.core.size();
        let pos: Vec<NodeId> = (0..n).map(|_| self.fresh()).collect();
        match &ast.core {
            Core::Chain(_) => self.link(&pos),
            Core::Cyclo(_) => {
                self.link(&pos);
                self.edges.push((pos[n - 1], pos[0]));
            }
            &Core::Bicyclo { a, b, .. } => {
                let (h1, h2) = (pos[0], pos[a + 1]);
                self.link(&pos[..a + 2]);
                let mut second = vec![h2];
                second.extend(&pos[a + 2..a + 2 + b]);
                second.push(h1);
                self.link(&second);
                let mut third = vec![h1];
                third.extend(&pos[a + 2 + b..]);
                third.push(h2);
                self.link(&third);
            }
            &Core::Spiro { b, .. } => {
                let s = pos[b];
                let mut small = vec![s];
                small.extend(&pos[..b]);
                small.push(s);
                self.link(&small);
                let mut large = vec![s];
                large.extend(&pos[b + 1..]);
                large.push(s);
                self.link(&large);
            }
            Core::Polycyclo { edges, .. } => {
                for &(u, v) in edges {
                    self.edges.push((pos[u - 1], pos[v - 1]));
                }
            }
        }
        for br in &ast.branches {
            for &loc in &br.locants {
                let sub = self.emit(&br.sub);
                self.edges.push((pos[loc - 1], sub[0]));
            }
        }
        pos
    }
}

/// Builds the graph a name describes. Node ids run from 0 in numbering
/// order; every edge has unit length and thickness.
pub fn parse_name(s: &str) -> Result<ReducedGraph, ParseError> {
    let comps = parse_name_ast(s)?;
    let object_type = comps[0].suffix.map_or(ObjectType::Other, Suffix::object_type);
    let mut b = Builder {
        edges: Vec::new(),
        next: 0,
    };
    let mut roots = Vec::new();
    for c in &comps {
        let first = b.next;
        b.emit(c);
        roots.push((first, b.next));
    }
    let count = b.next as usize;
    let mut degree = vec![0usize; count];
    for &(u, v) in &b.edges {
        degree[u as usize] += 1;
        degree[v as usize] += 1;
    }
    let mut roles: Vec<NodeRole> = degree
        .iter()
        .map(|&d| match d {
            0 | 1 => NodeRole::Endpoint,
            2 => NodeRole::Mid,
            _ => NodeRole::Junction,
        })
        .collect();
    for &(lo, hi) in &roots {
        let range = lo as usize..hi as usize;
        if roles[range.clone()].iter().all(|r| *r == NodeRole::Mid) {
            roles[range.start] = NodeRole::Anchor;
        }
    }
    let nodes = (0..count)
        .map(|i| ReducedNode {
            id: i as NodeId,
            role: roles[i],
            position: [i as f64, 0.0, 0.0],
            source_ids: vec![i as NodeId],
        })
        .collect();
    let edges = b
        .edges
        .iter()
        .map(|&(u, v)| ReducedEdge {
            u,
            v,
            length: 1.0,
            thickness: 1.0,
            skeleton_path: vec![u, v],
        })
        .collect();
    Ok(ReducedGraph::new(s, object_type, nodes, edges).expect("parser emits simple graphs"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::components_and_cycle_rank;
    use crate::nomenclature::name_reduced;

    fn roundtrip(s: &str) {
        let g = parse_name(s).unwrap_or_else(|e| panic!("{s}: {e}"));
        assert_eq!(name_reduced(&g).unwrap().text, s);
    }

    #[test]
    fn canonical_names_round_trip() {
        for s in [
            "monoito",
            "pentito",
            "3-monopentito",
            "2,4-dimonoheptito",
            "cyclohexidal",
            "1-(tri)cyclohexito",
            "bicyclo[3.1.0]hexito",
            "spiro[3.2]hexoid",
            "cyclotriito+triito",
        ] {
            roundtrip(s);
        }
    }

    #[test]
    fn structure_of_parsed_graphs() {
        let g = parse_name("bicyclo[2.2.1]heptito").unwrap();
        assert_eq!(g.nodes().len(), 7);
        assert_eq!(components_and_cycle_rank(&g), (1, 2));
        let g = parse_name("1-(tri)cyclohexidal").unwrap();
        assert_eq!(g.object_type(), ObjectType::PyramidalNeuron);
        assert_eq!(g.nodes().len(), 9);
        assert_eq!(g.nodes()[0].role, NodeRole::Junction);
        let ring = parse_name("cyclopentoid").unwrap();
        assert_eq!(ring.nodes()[0].role, NodeRole::Anchor);
    }

    #[test]
    fn lenient_forms() {
        assert!(parse_name("bicyclo[3,1,0]hexito").is_ok());
        assert!(parse_name("pentaito").is_ok());
        assert!(parse_name("3-mono-pentito").is_ok());
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_name("pentx"), Err(ParseError::Syntax { pos: 0, .. })));
        assert!(matches!(
            parse_name("7-monopentito"),
            Err(ParseError::LocantOutOfRange { locant: 7, size: 5, .. })
        ));
        assert!(matches!(
            parse_name("bicyclo[3.1.1]hexito"),
            Err(ParseError::BracketArithmeticMismatch { pos: 0, .. })
        ));
        assert!(matches!(
            parse_name("2,4-trimonoheptito"),
            Err(ParseError::MultiplierMismatch { expected: 2, found: 3, .. })
        ));
        assert!(matches!(parse_name("cyclodiito"), Err(ParseError::InvalidCore { .. })));
        assert!(matches!(parse_name("pentito+pentidal"), Err(ParseError::Syntax { pos: 8, .. })));
        let err = parse_name("pentito-").unwrap_err();
        assert_eq!(err.position(), 7);
    }
}
