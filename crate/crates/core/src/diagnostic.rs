//! Diagnostics shared by every front end (DSL parser, JSON codec, model builder).

use std::fmt;

use serde::Serialize;

/// A region of DSL source text. Lines and columns are 1-based, byte offsets
/// are 0-based and half-open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
    pub start_byte: usize,
    pub end_byte: usize,
}

impl SourceSpan {
    pub fn point(line: u32, col: u32, byte: usize) -> Self {
        SourceSpan {
            start_line: line,
            start_col: col,
            end_line: line,
            end_col: col,
            start_byte: byte,
            end_byte: byte,
        }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn join(self, other: SourceSpan) -> SourceSpan {
        let (first, _) = if self.start_byte <= other.start_byte {
            (self, other)
        } else {
            (other, self)
        };
        let last = if self.end_byte >= other.end_byte {
            self
        } else {
            other
        };
        SourceSpan {
            start_line: first.start_line,
            start_col: first.start_col,
            end_line: last.end_line,
            end_col: last.end_col,
            start_byte: first.start_byte,
            end_byte: last.end_byte,
        }
    }

    pub fn covers_line(&self, line: u32) -> bool {
        self.start_line <= line && line <= self.end_line
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

macro_rules! codes {
    ($($variant:ident => $text:literal),* $(,)?) => {
        /// Stable machine-readable diagnostic codes.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Code {
            $($variant),*
        }

        impl Code {
            pub const ALL: &'static [Code] = &[$(Code::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Code::$variant => $text),*
                }
            }
        }
    };
}

codes! {
    // lexical / syntactic
    LexicalError => "lexical-error",
    SyntaxError => "syntax-error",
    UnclosedBrace => "unclosed-brace",
    DuplicateClause => "duplicate-clause",
    MissingClause => "missing-clause",
    // JSON
    JsonSyntax => "json-syntax",
    SchemaType => "schema-type",
    SchemaMissingKey => "schema-missing-key",
    SchemaUnknownKey => "schema-unknown-key",
    SchemaEnum => "schema-enum",
    UnsupportedVersion => "unsupported-version",
    // document structure
    EmptyField => "empty-field",
    MissingSlo => "missing-slo",
    DateOrder => "date-order",
    InvalidDate => "invalid-date",
    EmptyRoles => "empty-roles",
    UnknownRole => "unknown-role",
    DuplicateParty => "duplicate-party",
    DuplicateActivity => "duplicate-activity",
    DanglingDependency => "dangling-dependency",
    DuplicateDependency => "duplicate-dependency",
    DependencyCycle => "dependency-cycle",
    // constraints
    UnknownMetric => "unknown-metric",
    ScopeMismatch => "scope-mismatch",
    KindMismatch => "kind-mismatch",
    MisplacedConstraint => "misplaced-constraint",
    MissingPriority => "missing-priority",
    UnexpectedPriority => "unexpected-priority",
    InvalidComparator => "invalid-comparator",
    ValueType => "value-type",
    ValueRange => "value-range",
    PercentageRange => "percentage-range",
    DisallowedValue => "disallowed-value",
    UnknownUnit => "unknown-unit",
    UnitDimension => "unit-dimension",
    UnexpectedUnit => "unexpected-unit",
    MissingUnit => "missing-unit",
    // warnings
    FreeFormActivity => "free-form-activity",
    NoParties => "no-parties",
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    /// Path to the offending element, e.g. `activities[2].service.slos[0].unit`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
    /// Tokens the parser would have accepted at the error position.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub fn error(code: Code, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            path: None,
            span: None,
            expected: Vec::new(),
        }
    }

    pub fn warning(code: Code, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, message)
        }
    }

    pub fn at(mut self, path: impl Into<String>) -> Self {
        self.path = Some(path.into());
        self
    }

    pub fn with_span(mut self, span: SourceSpan) -> Self {
        self.span = Some(span);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.severity, self.message)?;
        match &self.path {
            Some(path) => write!(f, " [{} at {}]", self.code, path),
            None => write!(f, " [{}]", self.code),
        }
    }
}

/// A non-empty set of diagnostics containing at least one error.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.is_error())
    }

    pub fn into_vec(self) -> Vec<Diagnostic> {
        self.0
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}
