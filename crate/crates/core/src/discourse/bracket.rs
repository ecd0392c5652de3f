//! Bracketed tree text format.
//!
//! Grammar: node := "(" relation child+ ")"; child := "(" N|S " " (span |
//! node) ")"; span := sentence ":" start "-" end. Relation names are
//! case-sensitive, contain no whitespace or parentheses, and must not be
//! "N" or "S". A bare "(N span)" is accepted at the root for single-EDU
//! trees.

use super::{DiscourseError, EduSpan, Nuclearity, RstChild, RstNode, RstTree};

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Cursor<'a> {
        Cursor { text, pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> DiscourseError {
        DiscourseError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn expect(&mut self, ch: char) -> Result<(), DiscourseError> {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += ch.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected {ch:?}")))
        }
    }

    /// Reads a run of characters that are not whitespace or parentheses.
    fn atom(&mut self) -> Result<&'a str, DiscourseError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| !c.is_whitespace() && c != '(' && c != ')')
        {
            self.pos += self.peek().unwrap().len_utf8();
        }
        if self.pos == start {
            return Err(self.err("expected a name or span"));
        }
        Ok(&self.text[start..self.pos])
    }
}

fn parse_span(atom: &str, pos: usize) -> Result<EduSpan, DiscourseError> {
    let bad = || DiscourseError::Parse {
        pos,
        msg: format!("bad span {atom:?}, expected sentence:start-end"),
    };
    let (sentence, rest) = atom.split_once(':').ok_or_else(bad)?;
    let (start, end) = rest.split_once('-').ok_or_else(bad)?;
    Ok(EduSpan {
        sentence: sentence.parse().map_err(|_| bad())?,
        start: start.parse().map_err(|_| bad())?,
        end: end.parse().map_err(|_| bad())?,
    })
}

/// Parses after '(' and a N/S mark: either a span leaf or a nested node.
fn parse_child_body(cur: &mut Cursor, nuclearity: Nuclearity) -> Result<RstChild, DiscourseError> {
    cur.skip_ws();
    let node = if cur.peek() == Some('(') {
        parse_node(cur)?
    } else {
        let pos = cur.pos;
        RstNode::Leaf(parse_span(cur.atom()?, pos)?)
    };
    cur.expect(')')?;
    Ok(RstChild { nuclearity, node })
}

fn parse_node(cur: &mut Cursor) -> Result<RstNode, DiscourseError> {
    cur.expect('(')?;
    let head_pos = cur.pos;
    let head = cur.atom()?.to_string();
    if head == "N" || head == "S" {
        return Err(DiscourseError::Parse {
            pos: head_pos,
            msg: "nuclearity mark where a relation was expected".into(),
        });
    }
    let mut children = Vec::new();
    loop {
        cur.skip_ws();
        match cur.peek() {
            Some('(') => {
                cur.expect('(')?;
                let mark_pos = cur.pos;
                let mark = cur.atom()?;
                let nuclearity = match mark {
                    "N" => Nuclearity::Nucleus,
                    "S" => Nuclearity::Satellite,
                    other => {
                        return Err(DiscourseError::Parse {
                            pos: mark_pos,
                            msg: format!("expected N or S, found {other:?}"),
                        })
                    }
                };
                children.push(parse_child_body(cur, nuclearity)?);
            }
            Some(')') => {
                cur.pos += 1;
                break;
            }
            _ => return Err(cur.err("expected a child or ')'")),
        }
    }
    if children.is_empty() {
        return Err(DiscourseError::Parse {
            pos: head_pos,
            msg: format!("relation {head:?} has no children"),
        });
    }
    Ok(RstNode::Internal {
        relation: head,
        children,
    })
}

/// Parses one bracketed tree and checks its structural invariants.
pub fn parse_tree_file(text: &str) -> Result<RstTree, DiscourseError> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    cur.expect('(')?;
    let head_pos = cur.pos;
    let head = cur.atom()?.to_string();
    let root = if head == "N" || head == "S" {
        let pos = cur.pos;
        let span = parse_span(cur.atom()?, pos)?;
        cur.expect(')')?;
        RstNode::Leaf(span)
    } else {
        cur.pos = head_pos - 1;
        parse_node(&mut cur)?
    };
    cur.skip_ws();
    if cur.pos != text.len() {
        return Err(cur.err("trailing input after tree"));
    }
    let tree = RstTree { root };
    tree.validate()?;
    Ok(tree)
}

fn render_node(node: &RstNode, out: &mut String) {
    match node {
        RstNode::Leaf(span) => {
            out.push_str(&format!("{}:{}-{}", span.sentence, span.start, span.end));
        }
        RstNode::Internal { relation, children } => {
            out.push('(');
            out.push_str(relation);
            for c in children {
                out.push_str(&format!(" ({} ", c.nuclearity.letter()));
                render_node(&c.node, out);
                out.push(')');
            }
            out.push(')');
        }
    }
}

/// Renders a tree back to the bracketed format accepted by
/// [`parse_tree_file`].
pub fn render_tree(tree: &RstTree) -> String {
    match &tree.root {
        RstNode::Leaf(span) => format!("(N {}:{}-{})", span.sentence, span.start, span.end),
        node => {
            let mut out = String::new();
            render_node(node, &mut out);
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_leaf_tree() {
        let t = parse_tree_file("(Elaboration (N 0:0-5) (S 0:6-11))").unwrap();
        assert_eq!(t.edu_count(), 2);
        match &t.root {
            RstNode::Internal { relation, children } => {
                assert_eq!(relation, "Elaboration");
                assert_eq!(children[0].nuclearity, Nuclearity::Nucleus);
                assert_eq!(
                    children[1].node,
                    RstNode::Leaf(EduSpan {
                        sentence: 0,
                        start: 6,
                        end: 11
                    })
                );
            }
            _ => panic!("expected internal root"),
        }
    }

    #[test]
    fn parses_nested_children() {
        let text = "(Attribution (N (Elaboration (N 0:0-2) (S 0:3-5))) (S 1:0-4))";
        let t = parse_tree_file(text).unwrap();
        assert_eq!(t.edu_count(), 3);
    }

    #[test]
    fn parses_three_child_node() {
        let text = "(List (N 0:0-1) (N 0:2-3) (N 0:4-5))";
        assert_eq!(parse_tree_file(text).unwrap().edu_count(), 3);
    }

    #[test]
    fn unbalanced_parenthesis_is_parse_error() {
        assert!(matches!(
            parse_tree_file("(Elaboration (N 0:0-5) (S 0:6-11)"),
            Err(DiscourseError::Parse { .. })
        ));
    }

    #[test]
    fn trailing_garbage_is_parse_error() {
        assert!(parse_tree_file("(Elaboration (N 0:0-5) (S 0:6-11)) x").is_err());
    }

    #[test]
    fn bad_span_is_parse_error() {
        assert!(matches!(
            parse_tree_file("(Elaboration (N 0:0:5) (S 0:6-11))"),
            Err(DiscourseError::Parse { .. })
        ));
    }

    #[test]
    fn single_child_fails_validation() {
        assert!(matches!(
            parse_tree_file("(Elaboration (N 0:0-5))"),
            Err(DiscourseError::Invalid(_))
        ));
    }

    #[test]
    fn root_leaf_is_accepted() {
        let t = parse_tree_file("(N 0:0-5)").unwrap();
        assert_eq!(t.edu_count(), 1);
    }

    #[test]
    fn round_trips_through_render() {
        let texts = [
            "(Elaboration (N 0:0-5) (S 0:6-11))",
            "(Attribution (N (Elaboration (N 0:0-2) (S 0:3-5))) (S 1:0-4))",
            "(List (N 0:0-1) (N 0:2-3) (N 1:0-5))",
        ];
        for text in texts {
            let t = parse_tree_file(text).unwrap();
            let rendered = render_tree(&t);
            assert_eq!(parse_tree_file(&rendered).unwrap(), t);
        }
    }
}
