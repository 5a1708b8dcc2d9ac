//! The API oracle: api-versions XML in, flattened class → members index out.

mod descriptor;
mod names;
mod persist;
mod spec;
mod table;

use thiserror::Error;

pub use descriptor::{decode_descriptor, BaseType, ElementType, MethodSig, ReturnType, TypeName};
pub use names::{canonicalize, Import, QualifiedName};
pub use persist::{decode_table, encode_table, is_table_file, load_table, save_table, FORMAT_VERSION, MAGIC};
pub use spec::{fingerprint, parse_spec, RawApiSpec, RawClass, RawMember};
pub use table::{build_table, ClassEntry, QueryStats, SymbolTable, TableSummary, JAVA_LANG_OBJECT};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("malformed API spec XML: {0}")]
    MalformedXml(String),

    #[error("duplicate class `{0}` in API spec")]
    DuplicateClass(String),

    #[error("bad descriptor `{descriptor}`: {reason}")]
    BadDescriptor { descriptor: String, reason: String },

    #[error("class `{0}` is not in the API oracle")]
    ClassUnknown(QualifiedName),

    #[error("I/O failure: {0}")]
    IoFailure(String),

    #[error("symbol table format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
}

/// Loads an oracle from either a persisted table or api-versions XML,
/// deciding by the file's leading bytes.
pub fn load_oracle(path: &std::path::Path) -> Result<SymbolTable, OracleError> {
    let bytes = std::fs::read(path).map_err(|e| OracleError::IoFailure(format!("{}: {e}", path.display())))?;
    if is_table_file(&bytes) {
        decode_table(&bytes)
    } else {
        Ok(build_table(&parse_spec(&bytes)?))
    }
}
