use super::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedArg {
    pub name: String,
    pub value: ExprNode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Call {
        function: String,
        positional: Vec<ExprNode>,
        named: Vec<NamedArg>,
    },
    Int(i64),
    Str(String),
    Bool(bool),
}

/// One node of a parsed expression tree.
///
/// Derived equality includes spans; use [`ExprNode::same_shape`] to compare
/// trees that came from differently formatted sources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprNode {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

impl ExprNode {
    pub fn call(function: impl Into<String>, positional: Vec<ExprNode>, named: Vec<NamedArg>) -> Self {
        ExprNode {
            kind: ExprKind::Call {
                function: function.into(),
                positional,
                named,
            },
            span: SourceSpan::point(0),
        }
    }

    pub fn int(value: i64) -> Self {
        ExprNode {
            kind: ExprKind::Int(value),
            span: SourceSpan::point(0),
        }
    }

    pub fn string(value: impl Into<String>) -> Self {
        ExprNode {
            kind: ExprKind::Str(value.into()),
            span: SourceSpan::point(0),
        }
    }

    pub fn boolean(value: bool) -> Self {
        ExprNode {
            kind: ExprKind::Bool(value),
            span: SourceSpan::point(0),
        }
    }

    pub fn function_name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Call { function, .. } => Some(function),
            _ => None,
        }
    }

    pub fn is_call(&self) -> bool {
        matches!(self.kind, ExprKind::Call { .. })
    }

    /// Structural equality ignoring spans.
    pub fn same_shape(&self, other: &ExprNode) -> bool {
        match (&self.kind, &other.kind) {
            (
                ExprKind::Call {
                    function: f1,
                    positional: p1,
                    named: n1,
                },
                ExprKind::Call {
                    function: f2,
                    positional: p2,
                    named: n2,
                },
            ) => {
                f1 == f2
                    && p1.len() == p2.len()
                    && n1.len() == n2.len()
                    && p1.iter().zip(p2).all(|(a, b)| a.same_shape(b))
                    && n1
                        .iter()
                        .zip(n2)
                        .all(|(a, b)| a.name == b.name && a.value.same_shape(&b.value))
            }
            (a, b) => a == b,
        }
    }

    /// Copy of the tree with every call's named arguments sorted by name.
    pub fn with_sorted_named_args(&self) -> ExprNode {
        let kind = match &self.kind {
            ExprKind::Call {
                function,
                positional,
                named,
            } => {
                let mut named: Vec<NamedArg> = named
                    .iter()
                    .map(|arg| NamedArg {
                        name: arg.name.clone(),
                        value: arg.value.with_sorted_named_args(),
                    })
                    .collect();
                named.sort_by(|a, b| a.name.cmp(&b.name));
                ExprKind::Call {
                    function: function.clone(),
                    positional: positional.iter().map(ExprNode::with_sorted_named_args).collect(),
                    named,
                }
            }
            other => other.clone(),
        };
        ExprNode {
            kind,
            span: self.span,
        }
    }

    /// Number of nodes in the tree, this one included.
    pub fn node_count(&self) -> usize {
        match &self.kind {
            ExprKind::Call {
                positional, named, ..
            } => {
                1 + positional.iter().map(ExprNode::node_count).sum::<usize>()
                    + named.iter().map(|a| a.value.node_count()).sum::<usize>()
            }
            _ => 1,
        }
    }
}

/// A parsed turn: one or more top-level calls separated by `;`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub expressions: Vec<ExprNode>,
    pub source: String,
}

impl Program {
    pub fn same_shape(&self, other: &Program) -> bool {
        self.expressions.len() == other.expressions.len()
            && self
                .expressions
                .iter()
                .zip(&other.expressions)
                .all(|(a, b)| a.same_shape(b))
    }

    pub fn with_sorted_named_args(&self) -> Program {
        Program {
            expressions: self
                .expressions
                .iter()
                .map(ExprNode::with_sorted_named_args)
                .collect(),
            source: self.source.clone(),
        }
    }
}
