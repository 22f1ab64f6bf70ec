//! Recursive-descent parser for MiniC.
//!
//! The parser first builds an owned tree and then flattens it into the
//! arena, which is what gives node ids their pre-order numbering.

use super::ast::{Ast, AstNode, NodeKind};
use super::lexer::{Token, TokenKind};
use super::FrontendError;

struct PNode {
    kind: NodeKind,
    label: String,
    line: usize,
    children: Vec<PNode>,
}

impl PNode {
    fn new(kind: NodeKind, label: impl Into<String>, line: usize, children: Vec<PNode>) -> Self {
        PNode {
            kind,
            label: label.into(),
            line,
            children,
        }
    }

    fn leaf(kind: NodeKind, label: impl Into<String>, line: usize) -> Self {
        Self::new(kind, label, line, Vec::new())
    }
}

const BINARY_LEVELS: &[&[&str]] = &[
    &["||"],
    &["&&"],
    &["==", "!="],
    &["<", ">", "<=", ">="],
    &["+", "-"],
    &["*", "/", "%"],
];

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_is(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text))
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> FrontendError {
        match self.peek() {
            Some(t) => FrontendError::Parse {
                expected: expected.to_string(),
                found: t.text.clone(),
                line: t.line,
                col: t.col,
            },
            None => {
                let (line, col) = self
                    .toks
                    .last()
                    .map_or((1, 1), |t| (t.line, t.col + t.text.chars().count()));
                FrontendError::Parse {
                    expected: expected.to_string(),
                    found: "end of input".to_string(),
                    line,
                    col,
                }
            }
        }
    }

    fn expect(&mut self, text: &str) -> Result<&'a Token, FrontendError> {
        if self.peek_is(text) {
            Ok(self.next().unwrap())
        } else {
            Err(self.error(&format!("'{text}'")))
        }
    }

    fn ident(&mut self) -> Result<&'a Token, FrontendError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => Ok(self.next().unwrap()),
            _ => Err(self.error("identifier")),
        }
    }

    fn at_type(&self) -> bool {
        matches!(self.peek(), Some(t) if t.kind == TokenKind::Keyword
            && matches!(t.text.as_str(), "int" | "char" | "void"))
    }

    fn ty(&mut self) -> Result<(String, usize), FrontendError> {
        if !self.at_type() {
            return Err(self.error("type"));
        }
        let base = self.next().unwrap();
        let mut text = base.text.clone();
        while self.peek_is("*") {
            self.next();
            text.push('*');
        }
        Ok((text, base.line))
    }

    fn unit(&mut self) -> Result<PNode, FrontendError> {
        let line = self.peek().map_or(1, |t| t.line);
        let mut items = Vec::new();
        while self.peek().is_some() {
            let (ty, ty_line) = self.ty()?;
            let name = self.ident()?;
            if self.peek_is("(") {
                items.push(self.funcdef(ty, ty_line, name)?);
            } else {
                items.push(self.decl_rest(ty, ty_line, name)?);
            }
        }
        Ok(PNode::new(NodeKind::TranslationUnit, "", line, items))
    }

    fn funcdef(&mut self, ty: String, line: usize, name: &Token) -> Result<PNode, FrontendError> {
        self.expect("(")?;
        let mut children = Vec::new();
        if !self.peek_is(")") {
            loop {
                let (pty, pline) = self.ty()?;
                let pname = self.ident()?;
                children.push(PNode::new(
                    NodeKind::Param,
                    pty,
                    pline,
                    vec![PNode::leaf(NodeKind::Identifier, &pname.text, pname.line)],
                ));
                if self.peek_is(",") {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(")")?;
        children.push(self.block()?);
        Ok(PNode::new(
            NodeKind::FunctionDef,
            format!("{ty} {}", name.text),
            line,
            children,
        ))
    }

    fn block(&mut self) -> Result<PNode, FrontendError> {
        let open = self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.peek_is("}") {
            if self.peek().is_none() {
                return Err(self.error("'}'"));
            }
            stmts.push(self.stmt()?);
        }
        self.next();
        Ok(PNode::new(NodeKind::Block, "", open.line, stmts))
    }

    fn decl_rest(&mut self, ty: String, line: usize, name: &Token) -> Result<PNode, FrontendError> {
        let ident = PNode::leaf(NodeKind::Identifier, &name.text, name.line);
        let declarator = if self.peek_is("[") {
            self.next();
            let size = self.expr()?;
            self.expect("]")?;
            PNode::new(NodeKind::Index, "[]", name.line, vec![ident, size])
        } else {
            ident
        };
        let mut children = vec![declarator];
        if self.peek_is("=") {
            self.next();
            children.push(self.expr()?);
        }
        self.expect(";")?;
        Ok(PNode::new(NodeKind::DeclStmt, ty, line, children))
    }

    fn stmt(&mut self) -> Result<PNode, FrontendError> {
        if self.peek_is("{") {
            return self.block();
        }
        if self.at_type() {
            let (ty, line) = self.ty()?;
            let name = self.ident()?;
            return self.decl_rest(ty, line, name);
        }
        let tok = self.peek().ok_or_else(|| self.error("statement"))?;
        match tok.text.as_str() {
            "if" | "while" if tok.kind == TokenKind::Keyword => {
                self.next();
                self.expect("(")?;
                let cond = self.expr()?;
                self.expect(")")?;
                let body = self.stmt()?;
                let mut children = vec![cond, body];
                let kind = if tok.text == "if" {
                    if self.peek_is("else") {
                        self.next();
                        children.push(self.stmt()?);
                    }
                    NodeKind::IfStmt
                } else {
                    NodeKind::WhileStmt
                };
                Ok(PNode::new(kind, &tok.text, tok.line, children))
            }
            "return" if tok.kind == TokenKind::Keyword => {
                self.next();
                let mut children = Vec::new();
                if !self.peek_is(";") {
                    children.push(self.expr()?);
                }
                self.expect(";")?;
                Ok(PNode::new(NodeKind::ReturnStmt, "return", tok.line, children))
            }
            "else" if tok.kind == TokenKind::Keyword => Err(self.error("statement")),
            _ => {
                let lhs = self.expr()?;
                if self.peek_is("=") {
                    if !matches!(
                        lhs.kind,
                        NodeKind::Identifier | NodeKind::Index | NodeKind::MemberAccess
                    ) {
                        return Err(self.error("';'"));
                    }
                    self.next();
                    let rhs = self.expr()?;
                    self.expect(";")?;
                    Ok(PNode::new(NodeKind::AssignStmt, "=", lhs.line, vec![lhs, rhs]))
                } else {
                    self.expect(";")?;
                    Ok(PNode::new(NodeKind::ExprStmt, "", lhs.line, vec![lhs]))
                }
            }
        }
    }

    fn expr(&mut self) -> Result<PNode, FrontendError> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> Result<PNode, FrontendError> {
        if level == BINARY_LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        while let Some(t) = self.peek() {
            if t.kind != TokenKind::Operator || !BINARY_LEVELS[level].contains(&t.text.as_str()) {
                break;
            }
            self.next();
            let rhs = self.binary(level + 1)?;
            let line = lhs.line;
            lhs = PNode::new(NodeKind::BinaryOp, &t.text, line, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<PNode, FrontendError> {
        match self.peek() {
            Some(t)
                if t.kind == TokenKind::Operator
                    && matches!(t.text.as_str(), "-" | "!" | "&" | "*") =>
            {
                self.next();
                let operand = self.unary()?;
                Ok(PNode::new(NodeKind::UnaryOp, &t.text, t.line, vec![operand]))
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<PNode, FrontendError> {
        let mut base = self.primary()?;
        loop {
            if self.peek_is("[") {
                self.next();
                let idx = self.expr()?;
                self.expect("]")?;
                let line = base.line;
                base = PNode::new(NodeKind::Index, "[]", line, vec![base, idx]);
            } else if self.peek_is("(") && base.kind == NodeKind::Identifier {
                self.next();
                let mut args = Vec::new();
                if !self.peek_is(")") {
                    loop {
                        args.push(self.expr()?);
                        if self.peek_is(",") {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(")")?;
                base = PNode::new(NodeKind::Call, base.label, base.line, args);
            } else {
                return Ok(base);
            }
        }
    }

    fn primary(&mut self) -> Result<PNode, FrontendError> {
        let tok = self.peek().ok_or_else(|| self.error("expression"))?;
        match tok.kind {
            TokenKind::Identifier => {
                self.next();
                let mut text = tok.text.clone();
                let mut chained = false;
                while self.peek_is("->") || self.peek_is(".") {
                    text.push_str(&self.next().unwrap().text);
                    text.push_str(&self.ident()?.text);
                    chained = true;
                }
                let kind = if chained {
                    NodeKind::MemberAccess
                } else {
                    NodeKind::Identifier
                };
                Ok(PNode::leaf(kind, text, tok.line))
            }
            TokenKind::IntLiteral | TokenKind::StringLiteral | TokenKind::CharLiteral => {
                self.next();
                Ok(PNode::leaf(NodeKind::Literal, &tok.text, tok.line))
            }
            TokenKind::Punctuation if tok.is("(") => {
                self.next();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            _ => Err(self.error("expression")),
        }
    }
}

fn flatten(root: PNode, source_id: &str) -> Ast {
    fn go(node: PNode, parent: Option<usize>, predicate: bool, out: &mut Vec<AstNode>) -> usize {
        let id = out.len();
        out.push(AstNode {
            id,
            kind: node.kind,
            is_statement: node.kind.is_statement(),
            is_predicate: predicate,
            label: node.label,
            line: node.line,
            parent,
            children: Vec::new(),
        });
        let has_predicate = matches!(node.kind, NodeKind::IfStmt | NodeKind::WhileStmt);
        let mut children = Vec::with_capacity(node.children.len());
        for (i, child) in node.children.into_iter().enumerate() {
            children.push(go(child, Some(id), has_predicate && i == 0, out));
        }
        out[id].children = children;
        id
    }
    let mut nodes = Vec::new();
    go(root, None, false, &mut nodes);
    Ast {
        source_id: source_id.to_string(),
        nodes,
    }
}

/// Parses a token stream into an [`Ast`] with dense pre-order ids.
pub fn parse(tokens: &[Token]) -> Result<Ast, FrontendError> {
    parse_named(tokens, "")
}

pub fn parse_named(tokens: &[Token], source_id: &str) -> Result<Ast, FrontendError> {
    let mut p = Parser { toks: tokens, pos: 0 };
    let unit = p.unit()?;
    Ok(flatten(unit, source_id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_source, tokenize};

    fn kinds(src: &str) -> Vec<NodeKind> {
        parse_source(src, "t.c")
            .unwrap()
            .nodes
            .iter()
            .map(|n| n.kind)
            .collect()
    }

    #[test]
    fn empty_function() {
        assert_eq!(
            kinds("void f(){}"),
            [NodeKind::TranslationUnit, NodeKind::FunctionDef, NodeKind::Block]
        );
        let ast = parse_source("void f(){}", "t.c").unwrap();
        assert_eq!(ast.nodes[1].label, "void f");
    }

    #[test]
    fn missing_expression_is_error() {
        let err = parse(&tokenize("int x = ;").unwrap()).unwrap_err();
        match err {
            FrontendError::Parse { found, line, col, .. } => {
                assert_eq!(found, ";");
                assert_eq!((line, col), (1, 9));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn overflow_example_predicate() {
        let src = "void f(char* str) {\n  char buf[BUF_SIZE];\n  int len = strlen(str);\n  if (len < BUF_SIZE)\n    memcpy(buf, str, len);\n}\n";
        let ast = parse_source(src, "t.c").unwrap();
        let iff = ast.nodes.iter().find(|n| n.kind == NodeKind::IfStmt).unwrap();
        let cond = ast.node(iff.children[0]);
        assert!(cond.is_predicate);
        assert_eq!(cond.kind, NodeKind::BinaryOp);
        assert_eq!(cond.label, "<");
        assert_eq!(cond.line, 4);
        assert_eq!(ast.nodes.iter().filter(|n| n.is_predicate).count(), 1);
        let call = ast.nodes.iter().find(|n| n.kind == NodeKind::Call && n.label == "memcpy");
        assert_eq!(call.unwrap().line, 5);
    }

    #[test]
    fn precedence_and_assoc() {
        let ast = parse_source("void f(){ x = a - b - c * d; }", "t.c").unwrap();
        let assign = ast.nodes.iter().find(|n| n.kind == NodeKind::AssignStmt).unwrap();
        let rhs = ast.node(assign.children[1]);
        assert_eq!(rhs.label, "-");
        let left = ast.node(rhs.children[0]);
        assert_eq!(left.label, "-");
        let right = ast.node(rhs.children[1]);
        assert_eq!(right.label, "*");
    }

    #[test]
    fn member_chain_is_one_node() {
        let ast = parse_source(
            "void f(){ avio_read(pb, st->codec->extradata, n); }",
            "t.c",
        )
        .unwrap();
        let m = ast
            .nodes
            .iter()
            .find(|n| n.kind == NodeKind::MemberAccess)
            .unwrap();
        assert_eq!(m.label, "st->codec->extradata");
        assert!(m.children.is_empty());
    }

    #[test]
    fn invalid_lvalue_rejected() {
        assert!(parse_source("void f(){ a + b = c; }", "t.c").is_err());
        assert!(parse_source("void f(){ f() = c; }", "t.c").is_err());
        assert!(parse_source("void f(){ else x = 1; }", "t.c").is_err());
        assert!(parse_source("void f(){", "t.c").is_err());
    }

    #[test]
    fn statement_flags_follow_kind() {
        let ast = parse_source(
            "int g;\nint f(int a){ int b = a; b = 2; g = b; if (b) { return b; } while (a) a = a - 1; f(1); return 0; }",
            "t.c",
        )
        .unwrap();
        for n in &ast.nodes {
            assert_eq!(n.is_statement, n.kind.is_statement());
        }
        for (i, n) in ast.nodes.iter().enumerate() {
            assert_eq!(n.id, i);
            if let Some(p) = n.parent {
                assert!(p < i);
                assert!(ast.node(p).children.contains(&i));
            }
        }
    }
}
