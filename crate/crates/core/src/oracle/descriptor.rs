//! JVM method descriptors.
//!
//! The api-versions format names every method as `name(params)ret`, where the
//! parameter list and return type use the JVM descriptor grammar:
//!
//! ```text
//! MethodDescriptor := Name "(" FieldType* ")" ReturnType
//! ReturnType       := FieldType | "V"
//! FieldType        := "B" | "C" | "D" | "F" | "I" | "J" | "S" | "Z"
//!                   | "L" BinaryName ";"
//!                   | "[" FieldType
//! ```
//!
//! Object types keep the binary name they were written with so that
//! [`MethodSig::encode`] reproduces the input byte for byte.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{OracleError, QualifiedName};

/// One of the eight JVM primitive types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaseType {
    Byte,
    Char,
    Double,
    Float,
    Int,
    Long,
    Short,
    Boolean,
}

impl BaseType {
    fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            b'B' => BaseType::Byte,
            b'C' => BaseType::Char,
            b'D' => BaseType::Double,
            b'F' => BaseType::Float,
            b'I' => BaseType::Int,
            b'J' => BaseType::Long,
            b'S' => BaseType::Short,
            b'Z' => BaseType::Boolean,
            _ => return None,
        })
    }

    pub fn code(self) -> char {
        match self {
            BaseType::Byte => 'B',
            BaseType::Char => 'C',
            BaseType::Double => 'D',
            BaseType::Float => 'F',
            BaseType::Int => 'I',
            BaseType::Long => 'J',
            BaseType::Short => 'S',
            BaseType::Boolean => 'Z',
        }
    }

    pub fn java_name(self) -> &'static str {
        match self {
            BaseType::Byte => "byte",
            BaseType::Char => "char",
            BaseType::Double => "double",
            BaseType::Float => "float",
            BaseType::Int => "int",
            BaseType::Long => "long",
            BaseType::Short => "short",
            BaseType::Boolean => "boolean",
        }
    }

    pub const ALL: [BaseType; 8] = [
        BaseType::Byte,
        BaseType::Char,
        BaseType::Double,
        BaseType::Float,
        BaseType::Int,
        BaseType::Long,
        BaseType::Short,
        BaseType::Boolean,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementType {
    Base(BaseType),
    /// Binary name as written in the descriptor, e.g. `android/media/AudioAttributes$Builder`.
    Object(String),
}

/// A decoded field type: an element type plus an array dimension count.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeName {
    pub element: ElementType,
    pub dims: u8,
}

impl TypeName {
    pub fn base(base: BaseType) -> Self {
        TypeName { element: ElementType::Base(base), dims: 0 }
    }

    pub fn object(binary_name: impl Into<String>) -> Self {
        TypeName { element: ElementType::Object(binary_name.into()), dims: 0 }
    }

    pub fn array_of(mut self, dims: u8) -> Self {
        self.dims += dims;
        self
    }

    /// The class a value of this type is an instance of, when it is a
    /// non-array object type.
    pub fn as_class(&self) -> Option<QualifiedName> {
        match (&self.element, self.dims) {
            (ElementType::Object(binary), 0) => Some(QualifiedName::from_binary(binary)),
            _ => None,
        }
    }

    pub fn encode_into(&self, out: &mut String) {
        for _ in 0..self.dims {
            out.push('[');
        }
        match &self.element {
            ElementType::Base(b) => out.push(b.code()),
            ElementType::Object(name) => {
                out.push('L');
                out.push_str(name);
                out.push(';');
            }
        }
    }
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.element {
            ElementType::Base(b) => f.write_str(b.java_name())?,
            ElementType::Object(name) => write!(f, "{}", QualifiedName::from_binary(name))?,
        }
        for _ in 0..self.dims {
            f.write_str("[]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReturnType {
    Void,
    Value(TypeName),
}

impl ReturnType {
    pub fn is_void(&self) -> bool {
        matches!(self, ReturnType::Void)
    }
}

impl fmt::Display for ReturnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReturnType::Void => f.write_str("void"),
            ReturnType::Value(t) => t.fmt(f),
        }
    }
}

/// A decoded method signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MethodSig {
    pub name: String,
    pub params: Vec<TypeName>,
    pub ret: ReturnType,
    pub declaring_class: QualifiedName,
}

impl MethodSig {
    /// Re-encodes the signature in descriptor form, `name(params)ret`.
    pub fn encode(&self) -> String {
        let mut out = String::with_capacity(self.name.len() + 16);
        out.push_str(&self.name);
        out.push('(');
        for p in &self.params {
            p.encode_into(&mut out);
        }
        out.push(')');
        match &self.ret {
            ReturnType::Void => out.push('V'),
            ReturnType::Value(t) => t.encode_into(&mut out),
        }
        out
    }

    /// Number of arguments a call must pass. The last parameter of an array
    /// type may be varargs; the descriptor cannot tell, so both are accepted.
    pub fn accepts_arity(&self, arity: usize) -> bool {
        let n = self.params.len();
        if arity == n {
            return true;
        }
        match self.params.last() {
            Some(last) if last.dims > 0 => arity + 1 >= n,
            _ => false,
        }
    }

    /// Java-style rendering, e.g. `setUsage(int)`.
    pub fn java_signature(&self) -> String {
        let params: Vec<String> = self.params.iter().map(ToString::to_string).collect();
        format!("{}({})", self.name, params.join(", "))
    }
}

impl fmt::Display for MethodSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.ret, self.java_signature())
    }
}

/// Decodes `name(params)ret` as found in api-versions `<method name=...>`.
pub fn decode_descriptor(raw: &str, declaring_class: &QualifiedName) -> Result<MethodSig, OracleError> {
    let bad = |reason: &str| OracleError::BadDescriptor {
        descriptor: raw.to_string(),
        reason: reason.to_string(),
    };
    let open = raw.find('(').ok_or_else(|| bad("missing `(`"))?;
    let name = &raw[..open];
    if name.is_empty() {
        return Err(bad("empty method name"));
    }
    if name.contains([')', ';', '[', '/']) {
        return Err(bad("illegal character in method name"));
    }

    let bytes = raw.as_bytes();
    let mut pos = open + 1;
    let mut params = Vec::new();
    loop {
        match bytes.get(pos) {
            None => return Err(bad("unterminated parameter list")),
            Some(b')') => {
                pos += 1;
                break;
            }
            Some(_) => {
                let (ty, next) = decode_field_type(raw, pos).map_err(&bad)?;
                params.push(ty);
                pos = next;
            }
        }
    }

    let ret = match bytes.get(pos) {
        None => return Err(bad("missing return type")),
        Some(b'V') => {
            pos += 1;
            ReturnType::Void
        }
        Some(_) => {
            let (ty, next) = decode_field_type(raw, pos).map_err(&bad)?;
            pos = next;
            ReturnType::Value(ty)
        }
    };
    if pos != bytes.len() {
        return Err(bad("trailing characters after return type"));
    }

    Ok(MethodSig {
        name: name.to_string(),
        params,
        ret,
        declaring_class: declaring_class.clone(),
    })
}

fn decode_field_type(raw: &str, start: usize) -> Result<(TypeName, usize), &'static str> {
    let bytes = raw.as_bytes();
    let mut pos = start;
    let mut dims: u8 = 0;
    while bytes.get(pos) == Some(&b'[') {
        dims = dims.checked_add(1).ok_or("array dimension overflow")?;
        pos += 1;
    }
    match bytes.get(pos) {
        None => Err("unexpected end of descriptor"),
        Some(b'L') => {
            let body = pos + 1;
            let end = raw[body..].find(';').map(|i| body + i).ok_or("unterminated object type")?;
            let name = &raw[body..end];
            if name.is_empty() {
                return Err("empty class name in object type");
            }
            if name.contains(['(', ')', '[', '<', '>']) {
                return Err("illegal character in class name");
            }
            Ok((TypeName { element: ElementType::Object(name.to_string()), dims }, end + 1))
        }
        Some(b'V') => Err("`V` is only valid as a return type"),
        Some(&c) => match BaseType::from_code(c) {
            Some(b) => Ok((TypeName { element: ElementType::Base(b), dims }, pos + 1)),
            None => Err("unknown type code"),
        },
    }
}
