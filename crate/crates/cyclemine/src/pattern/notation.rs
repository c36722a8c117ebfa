//! Text form of trees and patterns.
//!
//! ```text
//! tree    := "[r=" INT " p=" INT "]" "(" child ( "[d=" INT "]" child )* ")"
//! child   := LABEL | tree
//! pattern := tree "@" "tau=" INT "E=[" ( INT ( "," INT )* )? "]"
//! ```
//!
//! Whitespace between tokens is free. Labels are runs of characters other
//! than whitespace, brackets, parentheses, `@` and `,`.
use std::fmt::Write as _;

use super::{Block, Node, Pattern, PatternTree};
use crate::error::{Error, Result};
use crate::sequence::Alphabet;

fn write_block(b: &Block, alphabet: &Alphabet, out: &mut String) {
    let _ = write!(out, "[r={} p={}](", b.length, b.period);
    for (i, c) in b.children.iter().enumerate() {
        if i > 0 {
            let _ = write!(out, " [d={}] ", b.distances[i - 1]);
        }
        match c {
            Node::Leaf(e) => out.push_str(alphabet.label(*e)),
            Node::Block(inner) => write_block(inner, alphabet, out),
        }
    }
    out.push(')');
}

pub fn format_tree(tree: &PatternTree, alphabet: &Alphabet) -> String {
    let mut s = String::new();
    write_block(&tree.root, alphabet, &mut s);
    s
}

pub fn format_pattern(p: &Pattern, alphabet: &Alphabet) -> String {
    let e: Vec<String> = p.corrections.iter().map(i64::to_string).collect();
    format!("{} @ tau={} E=[{}]", format_tree(&p.tree, alphabet), p.start, e.join(","))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: 0, msg: format!("column {}: {}", self.pos + 1, msg.into()) }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn eat(&mut self, tok: &str) -> Result<()> {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            Ok(())
        } else {
            Err(self.err(format!("expected {tok:?}")))
        }
    }

    fn peek(&mut self, tok: &str) -> bool {
        self.skip_ws();
        self.rest().starts_with(tok)
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let r = self.rest();
        let len =
            r.char_indices().find(|&(i, c)| !(c.is_ascii_digit() || (i == 0 && c == '-'))).map_or(r.len(), |(i, _)| i);
        let v = r[..len].parse().map_err(|_| self.err("expected an integer"))?;
        self.pos += len;
        Ok(v)
    }

    fn label(&mut self) -> Result<Node> {
        self.skip_ws();
        let r = self.rest();
        let len = r.find(|c: char| c.is_whitespace() || "[]()@,".contains(c)).unwrap_or(r.len());
        if len == 0 {
            return Err(self.err("expected an event label"));
        }
        let label = &r[..len];
        let id = self.alphabet.get(label).ok_or_else(|| self.err(format!("unknown event {label:?}")))?;
        self.pos += len;
        Ok(Node::Leaf(id))
    }

    fn block(&mut self) -> Result<Block> {
        self.eat("[")?;
        self.eat("r=")?;
        let r = self.int()?;
        self.eat("p=")?;
        let p = self.int()?;
        self.eat("]")?;
        self.eat("(")?;
        let mut children = vec![self.child()?];
        let mut distances = Vec::new();
        while !self.peek(")") {
            self.eat("[")?;
            self.eat("d=")?;
            distances.push(self.int()?);
            self.eat("]")?;
            children.push(self.child()?);
        }
        self.eat(")")?;
        Ok(Block::new(r, p, children, distances))
    }

    fn child(&mut self) -> Result<Node> {
        if self.peek("[") {
            Ok(Node::Block(self.block()?))
        } else {
            self.label()
        }
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos == self.src.len() {
            Ok(())
        } else {
            Err(self.err("trailing input"))
        }
    }
}

pub fn parse_tree(src: &str, alphabet: &Alphabet) -> Result<PatternTree> {
    let mut ps = Parser { src, pos: 0, alphabet };
    let root = ps.block()?;
    ps.finish()?;
    PatternTree::new(root)
}

pub fn parse_pattern(src: &str, alphabet: &Alphabet) -> Result<Pattern> {
    let mut ps = Parser { src, pos: 0, alphabet };
    let root = ps.block()?;
    ps.eat("@")?;
    ps.eat("tau=")?;
    let start = ps.int()?;
    ps.eat("E=")?;
    ps.eat("[")?;
    let mut corrections = Vec::new();
    if !ps.peek("]") {
        corrections.push(ps.int()?);
        while ps.peek(",") {
            ps.eat(",")?;
            corrections.push(ps.int()?);
        }
    }
    ps.eat("]")?;
    ps.finish()?;
    Pattern::new(PatternTree::new(root)?, start, corrections)
}

/// One pattern per line; blank lines and `#` comments are skipped. Parse
/// errors carry the line number.
pub fn parse_patterns(text: &str, alphabet: &Alphabet) -> Result<Vec<Pattern>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_pattern(line, alphabet).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::Parse { line: no + 1, msg },
            other => other,
        })?);
    }
    Ok(out)
}
