//! On-disk symbol tables.
//!
//! Layout: 4-byte magic `PHSY`, little-endian `u32` format version,
//! little-endian `u64` payload length, JSON payload, SHA-256 of the payload.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::descriptor::MethodSig;
use super::table::{ClassEntry, SymbolTable, TableSummary};
use super::{OracleError, QualifiedName};

pub const MAGIC: &[u8; 4] = b"PHSY";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8;
const DIGEST_LEN: usize = 32;

#[derive(Serialize, Deserialize)]
struct Payload {
    fingerprint: String,
    warnings: Vec<String>,
    summary: (usize, usize, usize),
    build_hops: u64,
    /// Every distinct signature once; classes refer to them by index.
    signatures: Vec<MethodSig>,
    classes: Vec<PersistedClass>,
}

#[derive(Serialize, Deserialize)]
struct PersistedClass {
    name: QualifiedName,
    binary_name: String,
    constants: BTreeSet<String>,
    methods: Vec<u32>,
    nested: BTreeSet<String>,
    external_supertypes: BTreeSet<QualifiedName>,
}

pub fn encode_table(table: &SymbolTable) -> Vec<u8> {
    let mut sig_ids: BTreeMap<&MethodSig, u32> = BTreeMap::new();
    let mut classes = Vec::with_capacity(table.len());
    for name in table.class_names() {
        let entry = &table.by_class[name];
        let mut methods: Vec<&MethodSig> = entry.methods().collect();
        methods.sort();
        for sig in &methods {
            let next = sig_ids.len() as u32;
            sig_ids.entry(sig).or_insert(next);
        }
        classes.push((entry, methods));
    }
    let mut signatures = vec![None; sig_ids.len()];
    for (sig, id) in &sig_ids {
        signatures[*id as usize] = Some((*sig).clone());
    }

    let payload = Payload {
        fingerprint: table.fingerprint.clone(),
        warnings: table.warnings.clone(),
        summary: (table.summary.classes, table.summary.declared_methods, table.summary.declared_fields),
        build_hops: table.build_hops,
        signatures: signatures.into_iter().flatten().collect(),
        classes: classes
            .into_iter()
            .map(|(entry, methods)| PersistedClass {
                name: entry.name.clone(),
                binary_name: entry.binary_name.clone(),
                constants: entry.constants.iter().cloned().collect(),
                methods: methods.iter().map(|s| sig_ids[s]).collect(),
                nested: entry.nested.iter().cloned().collect(),
                external_supertypes: entry.external_supertypes.clone(),
            })
            .collect(),
    };
    let body = serde_json::to_vec(&payload).expect("payload serializes");

    let mut out = Vec::with_capacity(HEADER_LEN + body.len() + DIGEST_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(body.len() as u64).to_le_bytes());
    out.extend_from_slice(&body);
    out.extend_from_slice(&Sha256::digest(&body));
    out
}

pub fn decode_table(bytes: &[u8]) -> Result<SymbolTable, OracleError> {
    let corrupt = |why: &str| OracleError::IoFailure(format!("corrupt symbol table: {why}"));
    if bytes.len() < HEADER_LEN {
        return Err(corrupt("file shorter than header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(OracleError::VersionMismatch { found: version, expected: FORMAT_VERSION });
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let body_end = usize::try_from(len)
        .ok()
        .and_then(|l| HEADER_LEN.checked_add(l))
        .ok_or_else(|| corrupt("payload length overflow"))?;
    if bytes.len() != body_end + DIGEST_LEN {
        return Err(corrupt("truncated or trailing data"));
    }
    let body = &bytes[HEADER_LEN..body_end];
    if Sha256::digest(body).as_slice() != &bytes[body_end..] {
        return Err(corrupt("checksum mismatch"));
    }
    let payload: Payload = serde_json::from_slice(body).map_err(|e| corrupt(&e.to_string()))?;

    let signatures: Vec<Arc<MethodSig>> = payload.signatures.into_iter().map(Arc::new).collect();
    let mut entries = Vec::with_capacity(payload.classes.len());
    for class in payload.classes {
        let mut methods_by_name: HashMap<String, Vec<Arc<MethodSig>>> = HashMap::new();
        for id in class.methods {
            let sig = signatures.get(id as usize).ok_or_else(|| corrupt("signature index out of range"))?;
            methods_by_name.entry(sig.name.clone()).or_default().push(Arc::clone(sig));
        }
        entries.push(ClassEntry {
            name: class.name,
            binary_name: class.binary_name,
            constants: class.constants.into_iter().collect(),
            methods_by_name,
            nested: class.nested.into_iter().collect(),
            external_supertypes: class.external_supertypes,
        });
    }
    let (classes, declared_methods, declared_fields) = payload.summary;
    Ok(SymbolTable::from_entries(
        entries,
        payload.fingerprint,
        payload.warnings,
        TableSummary { classes, declared_methods, declared_fields },
        payload.build_hops,
    ))
}

pub fn save_table(table: &SymbolTable, path: &Path) -> Result<(), OracleError> {
    fs::write(path, encode_table(table)).map_err(|e| OracleError::IoFailure(format!("{}: {e}", path.display())))
}

pub fn load_table(path: &Path) -> Result<SymbolTable, OracleError> {
    let bytes = fs::read(path).map_err(|e| OracleError::IoFailure(format!("{}: {e}", path.display())))?;
    decode_table(&bytes)
}

/// True when `bytes` start with the persisted-table magic.
pub fn is_table_file(bytes: &[u8]) -> bool {
    bytes.starts_with(MAGIC)
}
