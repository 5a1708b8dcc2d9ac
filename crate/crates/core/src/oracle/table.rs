use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::descriptor::{decode_descriptor, MethodSig};
use super::spec::RawApiSpec;
use super::{Import, OracleError, QualifiedName};

pub const JAVA_LANG_OBJECT: &str = "java.lang.Object";

/// Flattened view of one class: declared members plus everything reachable
/// through superclasses and interfaces.
#[derive(Debug, Clone)]
pub struct ClassEntry {
    pub(crate) name: QualifiedName,
    pub(crate) binary_name: String,
    pub(crate) constants: HashSet<String>,
    pub(crate) methods_by_name: HashMap<String, Vec<Arc<MethodSig>>>,
    /// Simple names of member classes, own and inherited.
    pub(crate) nested: HashSet<String>,
    /// Supertypes reachable from this class that the spec does not define.
    pub(crate) external_supertypes: BTreeSet<QualifiedName>,
}

impl ClassEntry {
    pub fn name(&self) -> &QualifiedName {
        &self.name
    }

    pub fn binary_name(&self) -> &str {
        &self.binary_name
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.constants.iter().map(String::as_str)
    }

    pub fn method_names(&self) -> impl Iterator<Item = &str> {
        self.methods_by_name.keys().map(String::as_str)
    }

    pub fn methods(&self) -> impl Iterator<Item = &MethodSig> {
        self.methods_by_name.values().flatten().map(Arc::as_ref)
    }

    pub fn has_nested(&self, simple: &str) -> bool {
        self.nested.contains(simple)
    }

    pub fn external_supertypes(&self) -> &BTreeSet<QualifiedName> {
        &self.external_supertypes
    }
}

/// Counts accesses to the index. Queries are single hash lookups, so
/// `hierarchy_hops` stays at zero after construction.
#[derive(Debug, Default)]
pub struct QueryStats {
    lookups: AtomicU64,
    hierarchy_hops: AtomicU64,
}

impl QueryStats {
    pub fn lookups(&self) -> u64 {
        self.lookups.load(Ordering::Relaxed)
    }

    pub fn hierarchy_hops(&self) -> u64 {
        self.hierarchy_hops.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TableSummary {
    pub classes: usize,
    pub declared_methods: usize,
    pub declared_fields: usize,
}

/// The API oracle: an immutable class → members index.
#[derive(Debug)]
pub struct SymbolTable {
    pub(crate) by_class: HashMap<QualifiedName, ClassEntry>,
    pub(crate) simple_name_index: HashMap<String, BTreeSet<QualifiedName>>,
    pub(crate) fingerprint: String,
    pub(crate) warnings: Vec<String>,
    pub(crate) summary: TableSummary,
    pub(crate) build_hops: u64,
    pub(crate) stats: QueryStats,
}

impl SymbolTable {
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Construction notes: external supertypes, cycles, undecodable methods.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn summary(&self) -> TableSummary {
        self.summary
    }

    pub fn stats(&self) -> &QueryStats {
        &self.stats
    }

    /// Supertype edges followed while flattening.
    pub fn build_hops(&self) -> u64 {
        self.build_hops
    }

    pub fn len(&self) -> usize {
        self.by_class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_class.is_empty()
    }

    pub fn contains_class(&self, class: &QualifiedName) -> bool {
        self.by_class.contains_key(class)
    }

    /// Class names in sorted order.
    pub fn class_names(&self) -> Vec<&QualifiedName> {
        let mut names: Vec<_> = self.by_class.keys().collect();
        names.sort();
        names
    }

    pub fn entry(&self, class: &QualifiedName) -> Result<&ClassEntry, OracleError> {
        self.stats.lookups.fetch_add(1, Ordering::Relaxed);
        self.by_class.get(class).ok_or_else(|| OracleError::ClassUnknown(class.clone()))
    }

    pub fn has_constant(&self, class: &QualifiedName, field: &str) -> Result<bool, OracleError> {
        Ok(self.entry(class)?.constants.contains(field))
    }

    /// Every flattened signature named `method`, optionally restricted to
    /// those accepting `arity` arguments. Empty means absent.
    pub fn lookup_member(
        &self,
        class: &QualifiedName,
        method: &str,
        arity: Option<usize>,
    ) -> Result<Vec<&MethodSig>, OracleError> {
        let entry = self.entry(class)?;
        let Some(sigs) = entry.methods_by_name.get(method) else {
            return Ok(Vec::new());
        };
        Ok(sigs
            .iter()
            .map(Arc::as_ref)
            .filter(|s| arity.is_none_or(|n| s.accepts_arity(n)))
            .collect())
    }

    /// Resolves a simple class name as it appears in source.
    ///
    /// An explicit single-type import wins, then a unique match under the
    /// wildcard imports (with `java.lang.*` implied), then a unique match
    /// anywhere in the index. Anything ambiguous is `None`.
    pub fn resolve_simple_name(&self, simple: &str, imports: &[Import]) -> Option<QualifiedName> {
        if let Some(import) = imports
            .iter()
            .find(|i| !i.wildcard && !i.is_static && i.path.simple_name() == simple)
        {
            return Some(import.path.clone());
        }

        let candidates = self.simple_name_index.get(simple)?;
        let mut prefixes: Vec<&str> = imports
            .iter()
            .filter(|i| i.wildcard && !i.is_static)
            .map(|i| i.path.as_str())
            .collect();
        prefixes.push("java.lang");
        let under_wildcard: Vec<&QualifiedName> =
            candidates.iter().filter(|c| c.parent().is_some_and(|p| prefixes.contains(&p))).collect();
        match under_wildcard.as_slice() {
            [one] => return Some((*one).clone()),
            [] => {}
            _ => return None,
        }

        if candidates.len() == 1 {
            candidates.iter().next().cloned()
        } else {
            None
        }
    }

    /// All classes sharing a simple name.
    pub fn classes_named(&self, simple: &str) -> impl Iterator<Item = &QualifiedName> {
        self.simple_name_index.get(simple).into_iter().flatten()
    }

    /// Rebuilds a table from already-flattened entries.
    pub(crate) fn from_entries(
        entries: Vec<ClassEntry>,
        fingerprint: String,
        warnings: Vec<String>,
        summary: TableSummary,
        build_hops: u64,
    ) -> Self {
        let mut simple_name_index: HashMap<String, BTreeSet<QualifiedName>> = HashMap::new();
        for e in &entries {
            simple_name_index
                .entry(e.name.simple_name().to_string())
                .or_default()
                .insert(e.name.clone());
        }
        SymbolTable {
            by_class: entries.into_iter().map(|e| (e.name.clone(), e)).collect(),
            simple_name_index,
            fingerprint,
            warnings,
            summary,
            build_hops,
            stats: QueryStats::default(),
        }
    }
}

#[derive(Default)]
struct Flattened {
    constants: BTreeSet<String>,
    methods: BTreeMap<SigKey, Arc<MethodSig>>,
    nested: BTreeSet<String>,
    externals: BTreeSet<QualifiedName>,
}

type SigKey = (String, Vec<super::TypeName>, super::ReturnType);

fn sig_key(sig: &MethodSig) -> SigKey {
    (sig.name.clone(), sig.params.clone(), sig.ret.clone())
}

impl Flattened {
    fn add_method(&mut self, sig: Arc<MethodSig>) {
        self.methods
            .entry(sig_key(&sig))
            .and_modify(|existing| {
                if sig.declaring_class < existing.declaring_class {
                    *existing = Arc::clone(&sig);
                }
            })
            .or_insert(sig);
    }

    fn absorb(&mut self, other: &Flattened) {
        self.constants.extend(other.constants.iter().cloned());
        for sig in other.methods.values() {
            self.add_method(Arc::clone(sig));
        }
        self.nested.extend(other.nested.iter().cloned());
        self.externals.extend(other.externals.iter().cloned());
    }
}

/// Flattens the inheritance hierarchy into a per-class member index.
///
/// Signatures are deduplicated on name, parameter types and return type, so
/// a diamond contributes one copy of a shared method while an override with
/// a different return type stays visible as a second signature. Supertypes
/// missing from the spec contribute nothing and are noted. Classes on an
/// inheritance cycle share the union of the whole cycle.
pub fn build_table(spec: &RawApiSpec) -> SymbolTable {
    let mut warnings = Vec::new();
    let mut summary = TableSummary { classes: spec.classes.len(), ..Default::default() };

    let names: Vec<QualifiedName> = spec.classes.iter().map(|c| c.qualified_name()).collect();
    let index: HashMap<&QualifiedName, usize> = names.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let object = QualifiedName::new(JAVA_LANG_OBJECT);
    let object_idx = index.get(&object).copied();

    let mut declared: Vec<Flattened> = Vec::with_capacity(spec.classes.len());
    for (class, name) in spec.classes.iter().zip(&names) {
        let mut own = Flattened::default();
        for field in &class.fields {
            own.constants.insert(field.name.clone());
        }
        summary.declared_fields += class.fields.len();
        for method in &class.methods {
            match decode_descriptor(&method.name, name) {
                Ok(sig) => {
                    summary.declared_methods += 1;
                    own.add_method(Arc::new(sig));
                }
                Err(e) => warnings.push(format!("{name}: skipped method: {e}")),
            }
        }
        declared.push(own);
    }
    for name in &names {
        if let Some(outer) = name.parent().map(QualifiedName::new) {
            if let Some(&i) = index.get(&outer) {
                declared[i].nested.insert(name.simple_name().to_string());
            }
        }
    }

    let mut graph: DiGraph<usize, ()> = DiGraph::with_capacity(names.len(), names.len() * 2);
    let nodes: Vec<NodeIndex> = (0..names.len()).map(|i| graph.add_node(i)).collect();
    for (i, class) in spec.classes.iter().enumerate() {
        let mut targets = BTreeSet::new();
        for sup in class.supertypes() {
            let sup_name = QualifiedName::from_binary(sup);
            match index.get(&sup_name) {
                Some(&j) => {
                    targets.insert(j);
                }
                None => {
                    warnings.push(format!("{}: external supertype {sup_name}", names[i]));
                    declared[i].externals.insert(sup_name);
                }
            }
        }
        // Every class and interface has Object's members.
        if let Some(o) = object_idx {
            if o != i {
                targets.insert(o);
            }
        }
        for j in targets {
            graph.add_edge(nodes[i], nodes[j], ());
        }
    }

    // tarjan_scc yields components in reverse topological order, so every
    // supertype component is complete before its subtypes are visited.
    let mut flattened: Vec<Option<Arc<Flattened>>> = vec![None; names.len()];
    let mut build_hops = 0u64;
    for component in tarjan_scc(&graph) {
        let members: BTreeSet<usize> = component.iter().map(|n| graph[*n]).collect();
        let cyclic = members.len() > 1 || graph.contains_edge(component[0], component[0]);
        if cyclic {
            let cycle: Vec<String> = members.iter().map(|&i| names[i].to_string()).collect();
            warnings.push(format!("inheritance cycle: {}", cycle.join(", ")));
        }

        let mut union = Flattened::default();
        for &i in &members {
            union.absorb(&declared[i]);
            for edge in graph.neighbors(nodes[i]) {
                build_hops += 1;
                let j = graph[edge];
                if !members.contains(&j) {
                    let sup = flattened[j].as_ref().expect("supertype component flattened first");
                    union.absorb(sup);
                }
            }
        }
        let union = Arc::new(union);
        for &i in &members {
            flattened[i] = Some(Arc::clone(&union));
        }
    }

    let entries = spec
        .classes
        .iter()
        .zip(names)
        .zip(flattened)
        .map(|((class, name), flat)| {
            let flat = flat.expect("every class belongs to a component");
            let mut methods_by_name: HashMap<String, Vec<Arc<MethodSig>>> = HashMap::new();
            for sig in flat.methods.values() {
                methods_by_name.entry(sig.name.clone()).or_default().push(Arc::clone(sig));
            }
            ClassEntry {
                name,
                binary_name: class.binary_name.clone(),
                constants: flat.constants.iter().cloned().collect(),
                methods_by_name,
                nested: flat.nested.iter().cloned().collect(),
                external_supertypes: flat.externals.clone(),
            }
        })
        .collect();

    SymbolTable::from_entries(entries, spec.fingerprint.clone(), warnings, summary, build_hops)
}
