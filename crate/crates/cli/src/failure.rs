use cxreval::ingest::RowDiagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Unreadable, malformed or inconsistent input.
    Input,
    /// The labeling service could not be reached.
    Service,
    /// Anything else, such as an unwritable output directory.
    Internal,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure { kind: Kind::Input, error: error.into() }
    }

    pub fn service(error: impl Into<anyhow::Error>) -> Self {
        Failure { kind: Kind::Service, error: error.into() }
    }

    pub fn internal(error: impl Into<anyhow::Error>) -> Self {
        Failure { kind: Kind::Internal, error: error.into() }
    }

    pub fn code(&self) -> u8 {
        match self.kind {
            Kind::Input => 2,
            Kind::Service => 3,
            Kind::Internal => 1,
        }
    }
}

/// An input error listing every row diagnostic.
pub fn rows(what: &str, diags: &[RowDiagnostic]) -> Failure {
    let mut msg = format!("{what}: {} invalid row(s)", diags.len());
    for d in diags {
        msg.push_str("\n  ");
        msg.push_str(&d.to_string());
    }
    Failure::input(anyhow::anyhow!(msg))
}

pub type CmdResult = Result<(), Failure>;
