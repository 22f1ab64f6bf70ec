//! Deterministic pretty-printer. Works over any [`SyntaxTree`], so graph
//! nodes can be printed back to source text as well.

use super::ast::{NodeId, NodeKind, SyntaxTree};

const INDENT: &str = "    ";

/// Pretty-prints a whole tree starting at its root.
pub fn canonical_print<T: SyntaxTree + ?Sized>(tree: &T) -> String {
    match tree.root() {
        Some(root) => print_node(tree, root),
        None => String::new(),
    }
}

/// Pretty-prints the subtree at `id`. Statements end with a newline,
/// expressions do not.
pub fn print_node<T: SyntaxTree + ?Sized>(tree: &T, id: NodeId) -> String {
    let mut out = String::new();
    match tree.kind(id) {
        NodeKind::TranslationUnit => {
            for (i, &item) in tree.children(id).iter().enumerate() {
                if i > 0 && tree.kind(item) == NodeKind::FunctionDef {
                    out.push('\n');
                }
                item_into(tree, item, &mut out);
            }
        }
        NodeKind::FunctionDef => item_into(tree, id, &mut out),
        NodeKind::Param => out.push_str(&param(tree, id)),
        k if k.is_statement() || k == NodeKind::Block => stmt(tree, id, 0, &mut out),
        _ => out.push_str(&expr(tree, id)),
    }
    out
}

fn item_into<T: SyntaxTree + ?Sized>(tree: &T, id: NodeId, out: &mut String) {
    if tree.kind(id) != NodeKind::FunctionDef {
        stmt(tree, id, 0, out);
        return;
    }
    let children = tree.children(id);
    let (body, params) = children.split_last().expect("function has a body");
    let params: Vec<String> = params.iter().map(|&p| param(tree, p)).collect();
    out.push_str(&format!("{}({}) {{\n", tree.label(id), params.join(", ")));
    for &s in tree.children(*body) {
        stmt(tree, s, 1, out);
    }
    out.push_str("}\n");
}

fn param<T: SyntaxTree + ?Sized>(tree: &T, id: NodeId) -> String {
    let name = tree.children(id).first().map_or("", |&c| tree.label(c));
    format!("{} {}", tree.label(id), name)
}

fn stmt<T: SyntaxTree + ?Sized>(tree: &T, id: NodeId, depth: usize, out: &mut String) {
    let ind = INDENT.repeat(depth);
    let ch = tree.children(id);
    match tree.kind(id) {
        NodeKind::Block => {
            out.push_str(&ind);
            out.push_str("{\n");
            for &s in ch {
                stmt(tree, s, depth + 1, out);
            }
            out.push_str(&ind);
            out.push_str("}\n");
        }
        NodeKind::DeclStmt => {
            out.push_str(&format!("{ind}{} {}", tree.label(id), expr(tree, ch[0])));
            if let Some(&init) = ch.get(1) {
                out.push_str(&format!(" = {}", expr(tree, init)));
            }
            out.push_str(";\n");
        }
        NodeKind::ExprStmt => out.push_str(&format!("{ind}{};\n", expr(tree, ch[0]))),
        NodeKind::AssignStmt => out.push_str(&format!(
            "{ind}{} = {};\n",
            expr(tree, ch[0]),
            expr(tree, ch[1])
        )),
        NodeKind::ReturnStmt => match ch.first() {
            Some(&e) => out.push_str(&format!("{ind}return {};\n", expr(tree, e))),
            None => out.push_str(&format!("{ind}return;\n")),
        },
        NodeKind::IfStmt | NodeKind::WhileStmt => {
            out.push_str(&format!("{ind}{} ({})", tree.label(id), expr(tree, ch[0])));
            let mut open_block = body(tree, ch[1], depth, out);
            if let Some(&els) = ch.get(2) {
                if open_block {
                    out.push_str(" else");
                } else {
                    out.push_str(&format!("{ind}else"));
                }
                open_block = body(tree, els, depth, out);
            }
            if open_block {
                out.push('\n');
            }
        }
        NodeKind::Param => out.push_str(&format!("{ind}{}\n", param(tree, id))),
        _ => out.push_str(&format!("{ind}{};\n", expr(tree, id))),
    }
}

/// Writes a branch/loop body. Returns true when it ended with a closing
/// brace that still needs its newline.
fn body<T: SyntaxTree + ?Sized>(tree: &T, id: NodeId, depth: usize, out: &mut String) -> bool {
    if tree.kind(id) == NodeKind::Block {
        out.push_str(" {\n");
        for &s in tree.children(id) {
            stmt(tree, s, depth + 1, out);
        }
        out.push_str(&INDENT.repeat(depth));
        out.push('}');
        true
    } else {
        out.push('\n');
        stmt(tree, id, depth + 1, out);
        false
    }
}

fn binary_precedence(op: &str) -> u8 {
    match op {
        "||" => 1,
        "&&" => 2,
        "==" | "!=" => 3,
        "<" | ">" | "<=" | ">=" => 4,
        "+" | "-" => 5,
        _ => 6,
    }
}

fn precedence<T: SyntaxTree + ?Sized>(tree: &T, id: NodeId) -> u8 {
    match tree.kind(id) {
        NodeKind::BinaryOp => binary_precedence(tree.label(id)),
        NodeKind::UnaryOp => 7,
        _ => 8,
    }
}

/// Single-line rendering of an expression subtree.
pub fn expr<T: SyntaxTree + ?Sized>(tree: &T, id: NodeId) -> String {
    let ch = tree.children(id);
    match tree.kind(id) {
        NodeKind::BinaryOp => {
            let p = binary_precedence(tree.label(id));
            let mut l = expr(tree, ch[0]);
            if precedence(tree, ch[0]) < p {
                l = format!("({l})");
            }
            let mut r = expr(tree, ch[1]);
            if precedence(tree, ch[1]) <= p {
                r = format!("({r})");
            }
            format!("{l} {} {r}", tree.label(id))
        }
        NodeKind::UnaryOp => {
            let inner = expr(tree, ch[0]);
            if precedence(tree, ch[0]) < 8 {
                format!("{}({inner})", tree.label(id))
            } else {
                format!("{}{inner}", tree.label(id))
            }
        }
        NodeKind::Index => {
            let mut base = expr(tree, ch[0]);
            if precedence(tree, ch[0]) < 8 {
                base = format!("({base})");
            }
            format!("{base}[{}]", expr(tree, ch[1]))
        }
        NodeKind::Call => {
            let args: Vec<String> = ch.iter().map(|&a| expr(tree, a)).collect();
            format!("{}({})", tree.label(id), args.join(", "))
        }
        _ => tree.label(id).to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ast::structurally_equal;
    use crate::frontend::parse_source;

    fn roundtrip(src: &str) -> String {
        let a = parse_source(src, "a.c").unwrap();
        let printed = canonical_print(&a);
        let b = parse_source(&printed, "b.c").unwrap();
        assert!(structurally_equal(&a, 0, &b, 0), "round trip changed:\n{printed}");
        assert_eq!(canonical_print(&b), printed);
        printed
    }

    #[test]
    fn empty_function_golden() {
        assert_eq!(roundtrip("void f(){}"), "void f() {\n}\n");
    }

    #[test]
    fn assignment_text() {
        let out = roundtrip("void f(){x=a+b;}");
        assert!(out.contains("x = a + b;"), "{out}");
        assert_eq!(out, "void f() {\n    x = a + b;\n}\n");
    }

    #[test]
    fn control_flow_golden() {
        let out = roundtrip(
            "int g(char* s, int n){ char buf[16]; if(n<16) memcpy(buf,s,n); else { n = 0; } while(n>0){n=n-1;} return n; }",
        );
        assert_eq!(
            out,
            "int g(char* s, int n) {\n    char buf[16];\n    if (n < 16)\n        memcpy(buf, s, n);\n    else {\n        n = 0;\n    }\n    while (n > 0) {\n        n = n - 1;\n    }\n    return n;\n}\n"
        );
    }

    #[test]
    fn parenthesization_survives() {
        roundtrip("void f(){ x = (a - (b - c)) * -(d + e); y = !(&z)[0]; p->q = &(&w); if (a || b && (c || d)) return; }");
        roundtrip("int n = 3;\nvoid f(){}\nvoid g(){ { {} } if (a) if (b) x = 1; else x = 2; }");
    }
}
