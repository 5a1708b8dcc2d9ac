//! Reader for the SDK `api-versions.xml` shape:
//!
//! ```xml
//! <api version="3">
//!   <class name="android/media/AudioAttributes$Builder" since="21">
//!     <extends name="java/lang/Object"/>
//!     <method name="setUsage(I)Landroid/media/AudioAttributes$Builder;"/>
//!   </class>
//! </api>
//! ```

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{OracleError, QualifiedName};

/// A `<method>` or `<field>` element: its `name` plus any other attributes
/// (`since`, `deprecated`, `removed`, ...) kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMember {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, String>,
}

impl RawMember {
    pub fn new(name: impl Into<String>) -> Self {
        RawMember { name: name.into(), attrs: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct RawClass {
    pub binary_name: String,
    /// Usually one entry. api-versions lists several when the superclass
    /// changed across API levels; all of them are kept.
    pub extends: Vec<String>,
    pub interfaces: Vec<String>,
    /// Raw method descriptors, `name(params)ret`.
    pub methods: Vec<RawMember>,
    pub fields: Vec<RawMember>,
    pub attrs: BTreeMap<String, String>,
}

impl RawClass {
    pub fn new(binary_name: impl Into<String>) -> Self {
        RawClass { binary_name: binary_name.into(), ..Default::default() }
    }

    pub fn qualified_name(&self) -> QualifiedName {
        QualifiedName::from_binary(&self.binary_name)
    }

    pub fn superclass(&self) -> Option<&str> {
        self.extends.first().map(String::as_str)
    }

    pub fn supertypes(&self) -> impl Iterator<Item = &str> {
        self.extends.iter().chain(&self.interfaces).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawApiSpec {
    pub classes: Vec<RawClass>,
    /// Hex SHA-256 of the bytes the spec was parsed from.
    pub fingerprint: String,
}

impl RawApiSpec {
    /// Assembles a spec from classes built in code. The fingerprint is a
    /// hash of the class list.
    pub fn from_classes(classes: Vec<RawClass>) -> Self {
        let mut hasher = Sha256::new();
        for class in &classes {
            hasher.update(serde_json::to_vec(class).unwrap_or_default());
        }
        RawApiSpec { classes, fingerprint: hex::encode(hasher.finalize()) }
    }
}

pub fn fingerprint(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses api-versions XML. Unknown elements and attributes are ignored.
pub fn parse_spec(xml: &[u8]) -> Result<RawApiSpec, OracleError> {
    let text = std::str::from_utf8(xml).map_err(|e| OracleError::MalformedXml(e.to_string()))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| OracleError::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "api" {
        return Err(OracleError::MalformedXml(format!(
            "expected <api> root element, found <{}>",
            root.tag_name().name()
        )));
    }

    let mut classes = Vec::new();
    let mut seen_binary = HashSet::new();
    let mut seen_qualified = HashSet::new();
    for node in root.children().filter(|n| n.has_tag_name("class")) {
        let Some(name) = node.attribute("name") else {
            return Err(OracleError::MalformedXml(format!(
                "<class> without a name attribute at byte {}",
                node.range().start
            )));
        };
        if !seen_binary.insert(name.to_string())
            || !seen_qualified.insert(QualifiedName::from_binary(name))
        {
            return Err(OracleError::DuplicateClass(name.to_string()));
        }
        let mut class = RawClass::new(name);
        class.attrs = other_attrs(&node);
        for child in node.children().filter(roxmltree::Node::is_element) {
            let Some(child_name) = child.attribute("name") else { continue };
            match child.tag_name().name() {
                "extends" => class.extends.push(child_name.to_string()),
                "implements" => class.interfaces.push(child_name.to_string()),
                "method" => class.methods.push(RawMember {
                    name: child_name.to_string(),
                    attrs: other_attrs(&child),
                }),
                "field" => class.fields.push(RawMember {
                    name: child_name.to_string(),
                    attrs: other_attrs(&child),
                }),
                _ => {}
            }
        }
        classes.push(class);
    }

    Ok(RawApiSpec { classes, fingerprint: fingerprint(xml) })
}

fn other_attrs(node: &roxmltree::Node<'_, '_>) -> BTreeMap<String, String> {
    node.attributes()
        .filter(|a| a.name() != "name")
        .map(|a| (a.name().to_string(), a.value().to_string()))
        .collect()
}
