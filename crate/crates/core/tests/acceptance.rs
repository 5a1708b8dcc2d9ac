//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; any failure makes the process exit 1.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use phantom_check::eval::{
    distributions, load_dataset, parse_scores, run_checker, score_detector, EvalRecord, Granularity, Labels, Metrics,
    TruthEntry, TruthKind,
};
use phantom_check::extract::Snippet;
use phantom_check::oracle::{
    build_table, decode_descriptor, load_oracle, BaseType, QualifiedName, RawApiSpec, RawClass, RawMember, ReturnType,
    SymbolTable, TypeName,
};
use phantom_check::verify::{check_snippet, CheckOptions, FindingKind, OBJECT_METHODS};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn android() -> SymbolTable {
    load_oracle(&fixtures().join("android-media.xml")).expect("fixture oracle loads")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phantom-check"))
}

// 1 -------------------------------------------------------------------------

fn builder_reproduction() -> Outcome {
    let oracle = fixtures().join("android-media.xml");
    let started = Instant::now();
    let out = bin()
        .args(["check", "--format", "json", "--oracle"])
        .arg(&oracle)
        .arg(fixtures().join("builder-patch.java"))
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    ensure!(out.status.code() == Some(1), "patch: exit {:?}", out.status.code());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let found: Vec<(String, String, String)> = doc["findings"]
        .as_array()
        .ok_or("no findings array")?
        .iter()
        .map(|f| {
            let s = |k: &str| f[k].as_str().unwrap_or_default().to_string();
            match s("kind").as_str() {
                "PhantomSymbol" => (s("kind"), s("member"), s("class")),
                _ => (s("kind"), s("method"), s("onType")),
            }
        })
        .collect();
    let want = [
        ("PhantomMember", "setStreamType", "android.media.AudioAttributes.Builder"),
        ("PhantomSymbol", "CONTENT_TYPE_STREAM", "android.media.AudioAttributes"),
    ];
    ensure!(found.len() == 2, "expected 2 findings, got {found:?}");
    for (got, want) in found.iter().zip(want) {
        ensure!((got.0.as_str(), got.1.as_str(), got.2.as_str()) == want, "got {got:?}, want {want:?}");
    }

    let out = bin()
        .args(["check", "--format", "json", "--oracle"])
        .arg(&oracle)
        .arg(fixtures().join("builder-corrected.java"))
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.code() == Some(0), "corrected: exit {:?}", out.status.code());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    ensure!(doc["findings"].as_array().is_some_and(Vec::is_empty), "corrected patch has findings");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("2 findings on the patch, 0 on the correction, {} ms", elapsed.as_millis()))
}

// Random specs shared by 2 and 3 ----------------------------------------------

const OBJECT: &str = "java/lang/Object";

#[derive(Clone, Debug)]
struct GenClass {
    name: String,
    supers: Vec<String>,
    methods: Vec<String>,
    fields: Vec<String>,
}

#[derive(Clone, Debug)]
struct GenSpec {
    classes: Vec<GenClass>,
}

impl GenSpec {
    fn raw(&self) -> RawApiSpec {
        RawApiSpec::from_classes(
            self.classes
                .iter()
                .map(|c| {
                    let mut raw = RawClass::new(c.name.clone());
                    if let Some((first, rest)) = c.supers.split_first() {
                        raw.extends.push(first.clone());
                        raw.interfaces.extend(rest.iter().cloned());
                    }
                    raw.methods = c.methods.iter().map(RawMember::new).collect();
                    raw.fields = c.fields.iter().map(RawMember::new).collect();
                    raw
                })
                .collect(),
        )
    }

    fn get(&self, name: &str) -> Option<&GenClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Every class reachable from `start` (itself included) by an explicit
    /// walk, plus supertypes named but not defined.
    fn closure(&self, start: &str) -> (Vec<&GenClass>, BTreeSet<String>) {
        let has_object = self.get(OBJECT).is_some();
        let mut seen = BTreeSet::new();
        let mut stack = vec![start.to_string()];
        let mut reached = Vec::new();
        let mut external = BTreeSet::new();
        while let Some(name) = stack.pop() {
            if !seen.insert(name.clone()) {
                continue;
            }
            let class = self.get(&name).expect("only defined classes are pushed");
            reached.push(class);
            for sup in &class.supers {
                if self.get(sup).is_some() {
                    stack.push(sup.clone());
                } else {
                    external.insert(sup.clone());
                }
            }
            if has_object && name != OBJECT {
                stack.push(OBJECT.to_string());
            }
        }
        (reached, external)
    }
}

fn object_class() -> GenClass {
    GenClass {
        name: OBJECT.into(),
        supers: vec![],
        methods: vec!["toString()Ljava/lang/String;".into(), "hashCode()I".into(), "equals(Ljava/lang/Object;)Z".into()],
        fields: vec![],
    }
}

// 2 -------------------------------------------------------------------------

const METHOD_NAMES: [&str; 6] = ["m0", "m1", "m2", "m3", "toString", "hashCode"];
const CALL_NAMES: [&str; 8] = ["m0", "m1", "m2", "m3", "m4", "toString", "hashCode", "equals"];
const PARAMS: [&str; 4] = ["I", "J", "Lp/C0;", "[I"];

fn random_chain_spec(rng: &mut ChaCha8Rng) -> GenSpec {
    let n = rng.gen_range(1..=10);
    let mut classes = Vec::new();
    let with_object = rng.gen_bool(0.7);
    let user = if with_object { n - 1 } else { n };
    for i in 0..user.max(1) {
        let mut supers = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            let sup = match rng.gen_range(0..10) {
                0 => "ext/Base".to_string(),
                1 => OBJECT.to_string(),
                // May name a class that does not exist: an external supertype.
                _ => format!("p/C{}", rng.gen_range(0..12)),
            };
            if sup != format!("p/C{i}") {
                supers.push(sup);
            }
        }
        let mut methods = Vec::new();
        for _ in 0..rng.gen_range(0..=5) {
            let name = METHOD_NAMES[rng.gen_range(0..METHOD_NAMES.len())];
            let params: String = (0..rng.gen_range(0..=2)).map(|_| PARAMS[rng.gen_range(0..PARAMS.len())]).collect();
            let ret = match rng.gen_range(0..9) {
                0 | 1 => "V".to_string(),
                2 => "I".to_string(),
                3 => "Ljava/lang/Object;".to_string(),
                4 => "[Lp/C1;".to_string(),
                _ => format!("Lp/C{};", rng.gen_range(0..12)),
            };
            methods.push(format!("{name}({params}){ret}"));
        }
        classes.push(GenClass { name: format!("p/C{i}"), supers, methods, fields: vec![] });
    }
    if with_object {
        classes.push(object_class());
    }
    GenSpec { classes }
}

#[derive(Debug, PartialEq, Eq)]
enum Expected {
    Clean,
    Phantom { at: usize, on: String },
    Broken { at: usize, on: String },
}

fn split_descriptor(raw: &str) -> (&str, Vec<String>, &str) {
    let open = raw.find('(').unwrap();
    let close = raw.find(')').unwrap();
    let mut params = Vec::new();
    let body = &raw.as_bytes()[open + 1..close];
    let mut i = 0;
    while i < body.len() {
        let start = i;
        while body[i] == b'[' {
            i += 1;
        }
        if body[i] == b'L' {
            while body[i] != b';' {
                i += 1;
            }
        }
        i += 1;
        params.push(String::from_utf8(body[start..i].to_vec()).unwrap());
    }
    (&raw[..open], params, &raw[close + 1..])
}

/// Reference interpreter: walks the hierarchy at every step instead of using
/// a flattened index.
fn interpret(spec: &GenSpec, start: &str, calls: &[(&str, usize)], arity: bool) -> Expected {
    let mut current = start.to_string();
    for (i, (method, argc)) in calls.iter().enumerate() {
        if spec.get(&current).is_none() {
            return Expected::Clean;
        }
        let (reached, external) = spec.closure(&current);
        let mut returns = BTreeSet::new();
        for class in reached {
            for raw in &class.methods {
                let (name, params, ret) = split_descriptor(raw);
                let fits = !arity
                    || params.len() == *argc
                    || params.last().is_some_and(|p| p.starts_with('[')) && argc + 1 >= params.len();
                if name == *method && fits {
                    returns.insert(ret.to_string());
                }
            }
        }
        if returns.is_empty() {
            let only_object = external.iter().all(|e| e == OBJECT);
            let object_may_supply = !external.is_empty() && OBJECT_METHODS.contains(method);
            if only_object && !object_may_supply {
                return Expected::Phantom { at: i, on: current.replace('/', ".") };
            }
            return Expected::Clean;
        }
        if returns.len() > 1 {
            return Expected::Clean;
        }
        let ret = returns.into_iter().next().unwrap();
        let last = i + 1 == calls.len();
        if ret == "V" {
            return if last { Expected::Clean } else { Expected::Broken { at: i, on: current.replace('/', ".") } };
        }
        match ret.strip_prefix('L').and_then(|r| r.strip_suffix(';')) {
            Some(class) if class != OBJECT => current = class.to_string(),
            _ => return Expected::Clean,
        }
    }
    Expected::Clean
}

fn chain_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let started = Instant::now();
    let trials = 3000;
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    for trial in 0..trials {
        let spec = random_chain_spec(&mut rng);
        let table = build_table(&spec.raw());
        let defined = spec.classes.iter().filter(|c| c.name != OBJECT).count();
        let start = format!("p/C{}", if rng.gen_bool(0.9) { rng.gen_range(0..defined) } else { rng.gen_range(0..11) });
        let len = rng.gen_range(1..=4);
        let calls: Vec<(&str, usize)> =
            (0..len).map(|_| (CALL_NAMES[rng.gen_range(0..CALL_NAMES.len())], rng.gen_range(0..=3))).collect();
        let arity = rng.gen_bool(0.5);

        let mut source = format!("new {}()", start.replace('/', "."));
        let mut columns = Vec::new();
        for (name, argc) in &calls {
            source.push('.');
            columns.push(source.len() as u32 + 1);
            let args = vec!["1"; *argc].join(", ");
            source.push_str(&format!("{name}({args})"));
        }
        source.push(';');

        let report = check_snippet(&Snippet::new(source.clone()), &table, CheckOptions { arity, phantom_types: false });
        let actual = match report.findings.as_slice() {
            [] => Expected::Clean,
            [f] => {
                let at = columns.iter().position(|&c| c == f.location.column).ok_or("finding off the chain")?;
                match &f.kind {
                    FindingKind::PhantomMember { on_type, .. } => Expected::Phantom { at, on: on_type.to_string() },
                    FindingKind::BrokenChain { on_type, .. } => Expected::Broken { at, on: on_type.to_string() },
                    other => return Err(format!("trial {trial}: unexpected {other:?} for {source}")),
                }
            }
            many => return Err(format!("trial {trial}: {} findings for {source}", many.len())),
        };
        let expected = interpret(&spec, &start, &calls, arity);
        ensure!(actual == expected, "trial {trial}: {source} (arity {arity}) gave {actual:?}, reference {expected:?}\n{spec:#?}");
        *tally
            .entry(match expected {
                Expected::Clean => "clean",
                Expected::Phantom { .. } => "phantom",
                Expected::Broken { .. } => "broken",
            })
            .or_default() += 1;
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    ensure!(tally.len() == 3, "generator never produced some outcome: {tally:?}");
    Ok(format!("{trials} chains, 0 mismatches {tally:?}, {} ms", elapsed.as_millis()))
}

// 3 -------------------------------------------------------------------------

fn random_hierarchy(rng: &mut ChaCha8Rng) -> GenSpec {
    let n = rng.gen_range(1..=10);
    let mut classes: Vec<GenClass> = (0..n)
        .map(|i| {
            let methods = (0..rng.gen_range(0..=3))
                .map(|_| {
                    let name = ["a", "b", "c", "toString"][rng.gen_range(0..4)];
                    let ret = ["V", "I", "Ljava/lang/String;"][rng.gen_range(0..3)];
                    let params = ["", "I", "[[J"][rng.gen_range(0..3)];
                    format!("{name}({params}){ret}")
                })
                .collect();
            let fields = (0..rng.gen_range(0..=2)).map(|_| format!("F{}", rng.gen_range(0..4))).collect();
            GenClass { name: format!("q/K{i}"), supers: vec![], methods, fields }
        })
        .collect();
    for class in classes.iter_mut() {
        for _ in 0..rng.gen_range(0..=3) {
            let sup = match rng.gen_range(0..12) {
                0 => "ext/Iface".to_string(),
                1 => OBJECT.to_string(),
                _ => format!("q/K{}", rng.gen_range(0..n + 2)),
            };
            class.supers.push(sup);
        }
    }
    // A guaranteed diamond: K0 <- K1, K2 <- K3 when there is room.
    if n >= 4 && rng.gen_bool(0.5) {
        classes[1].supers.push("q/K0".into());
        classes[2].supers.push("q/K0".into());
        classes[3].supers.extend(["q/K1".to_string(), "q/K2".to_string()]);
    }
    if rng.gen_bool(0.6) {
        classes.push(object_class());
    }
    GenSpec { classes }
}

fn flattening_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let trials = 1500;
    let mut queries = 0u64;
    let mut with_external = 0;
    for trial in 0..trials {
        let spec = random_hierarchy(&mut rng);
        let table = build_table(&spec.raw());
        for class in &spec.classes {
            let q = QualifiedName::from_binary(&class.name);
            let entry = table.entry(&q).map_err(|e| e.to_string())?;
            let (reached, external) = spec.closure(&class.name);
            let want_methods: BTreeSet<String> = reached.iter().flat_map(|c| c.methods.iter().cloned()).collect();
            let want_fields: BTreeSet<String> = reached.iter().flat_map(|c| c.fields.iter().cloned()).collect();
            let want_external: BTreeSet<String> = external.iter().map(|e| e.replace('/', ".")).collect();
            let got_methods: BTreeSet<String> = entry.methods().map(|m| m.encode()).collect();
            let got_fields: BTreeSet<String> = entry.constants().map(String::from).collect();
            let got_external: BTreeSet<String> = entry.external_supertypes().iter().map(|e| e.to_string()).collect();
            ensure!(got_methods == want_methods, "trial {trial} {}: methods {got_methods:?} vs {want_methods:?}", class.name);
            ensure!(got_fields == want_fields, "trial {trial} {}: fields differ", class.name);
            ensure!(got_external == want_external, "trial {trial} {}: externals differ", class.name);
            with_external += usize::from(!want_external.is_empty());
            for name in ["a", "b", "c", "toString", "zzz"] {
                let _ = table.lookup_member(&q, name, None);
                let _ = table.has_constant(&q, "F0");
                queries += 2;
            }
        }
        ensure!(table.stats().hierarchy_hops() == 0, "trial {trial}: queries walked the hierarchy");
    }
    ensure!(with_external > 0, "no external supertypes generated");
    Ok(format!("{trials} hierarchies, 0 mismatches, {queries} queries with 0 hierarchy hops"))
}

// 4 -------------------------------------------------------------------------

fn all_types() -> Vec<(String, TypeName)> {
    let mut elements: Vec<(String, TypeName)> =
        BaseType::ALL.iter().map(|b| (b.code().to_string(), TypeName::base(*b))).collect();
    for obj in ["java/lang/String", "android/media/AudioAttributes$Builder", "a/B$C$D"] {
        elements.push((format!("L{obj};"), TypeName::object(obj)));
    }
    let mut out = Vec::new();
    for (code, ty) in elements {
        for dims in 0..=3u8 {
            out.push((format!("{}{code}", "[".repeat(dims as usize)), ty.clone().array_of(dims)));
        }
    }
    out
}

fn descriptor_round_trip() -> Outcome {
    let types = all_types();
    let owner = QualifiedName::new("x.Owner");
    let mut returns: Vec<(String, ReturnType)> = vec![("V".into(), ReturnType::Void)];
    returns.extend(types.iter().map(|(c, t)| (c.clone(), ReturnType::Value(t.clone()))));

    let mut corpus: Vec<(String, Vec<TypeName>, ReturnType)> = Vec::new();
    for (rc, rt) in &returns {
        corpus.push((format!("f(){rc}"), vec![], rt.clone()));
        for (pc, pt) in &types {
            corpus.push((format!("f({pc}){rc}"), vec![pt.clone()], rt.clone()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    for _ in 0..2000 {
        let picks: Vec<&(String, TypeName)> = (0..rng.gen_range(2..=6)).map(|_| types.choose(&mut rng).unwrap()).collect();
        let (rc, rt) = returns.choose(&mut rng).unwrap();
        let codes: String = picks.iter().map(|(c, _)| c.as_str()).collect();
        corpus.push((format!("g({codes}){rc}"), picks.iter().map(|(_, t)| t.clone()).collect(), rt.clone()));
    }
    for (raw, params, ret) in &corpus {
        let sig = decode_descriptor(raw, &owner).map_err(|e| format!("{raw}: {e}"))?;
        ensure!(&sig.params == params && &sig.ret == ret, "{raw} decoded to {sig:?}");
        ensure!(&sig.encode() == raw, "{raw} re-encoded as {}", sig.encode());
    }
    Ok(format!("{} descriptors over {} types, 0 failures", corpus.len(), types.len()))
}

// 5 -------------------------------------------------------------------------

fn rounded(m: &Metrics) -> (String, String, String) {
    let s = |v: &Option<String>| v.clone().unwrap_or_else(|| "null".into());
    (s(&m.display.precision), s(&m.display.recall), s(&m.display.f1))
}

fn metrics_arithmetic() -> Outcome {
    // Perfect precision; recall 19/26 rounds to 0.73 and 19/21 to 0.90.
    let q = Metrics::from_counts(19, 0, 7, Granularity::SampleLevel);
    ensure!(rounded(&q) == ("1.00".into(), "0.73".into(), "0.84".into()), "first row {:?}", rounded(&q));
    let c = Metrics::from_counts(19, 0, 2, Granularity::SampleLevel);
    ensure!(rounded(&c) == ("1.00".into(), "0.90".into(), "0.95".into()), "second row {:?}", rounded(&c));
    for (p, r, f) in [(1.0, 0.73, "0.84"), (1.0, 0.90, "0.95")] {
        let got = format!("{:.2}", 2.0 * p * r / (p + r));
        ensure!(got == f, "F1({p}, {r}) = {got}");
    }
    let empty = Metrics::from_counts(0, 0, 0, Granularity::InstanceLevel);
    ensure!(empty.precision.is_none() && empty.recall.is_none() && empty.f1.is_none(), "empty case not null");

    // Bundled corpus, counted by hand: 7 hallucinated records with 9
    // instances; only the removed AudioManager member goes unseen.
    let table = android();
    let records = load_dataset(&fixtures().join("corpus/dataset.jsonl")).map_err(|e| e.to_string())?;
    let preds = run_checker(&records, &table, CheckOptions::default());
    let sample = score_detector(&preds, &records, Granularity::SampleLevel).map_err(|e| e.to_string())?;
    let instance = score_detector(&preds, &records, Granularity::InstanceLevel).map_err(|e| e.to_string())?;
    ensure!((sample.tp, sample.fp, sample.fn_) == (6, 0, 1), "sample counts {sample:?}");
    ensure!((instance.tp, instance.fp, instance.fn_) == (8, 0, 1), "instance counts {instance:?}");
    for m in [&q, &c, &sample, &instance] {
        let p = m.tp as f64 / (m.tp + m.fp) as f64;
        let r = m.tp as f64 / (m.tp + m.fn_) as f64;
        ensure!(m.precision == Some(p) && m.recall == Some(r), "ratios not recomputable for {m:?}");
        ensure!(m.f1 == Some(2.0 * p * r / (p + r)), "F1 not recomputable for {m:?}");
    }
    ensure!((sample.f1.unwrap() - 12.0 / 13.0).abs() < 1e-12, "sample F1 {:?}", sample.f1);
    ensure!((instance.f1.unwrap() - 16.0 / 17.0).abs() < 1e-12, "instance F1 {:?}", instance.f1);

    // Soundness: no false positives on corpora whose truth agrees with the oracle.
    let mut total = 0;
    for corpus in ["corpus/dataset.jsonl", "corpus/labeled-51.jsonl"] {
        let records = load_dataset(&fixtures().join(corpus)).map_err(|e| e.to_string())?;
        let preds = run_checker(&records, &table, CheckOptions::default());
        for g in [Granularity::SampleLevel, Granularity::InstanceLevel] {
            let m = score_detector(&preds, &records, g).map_err(|e| e.to_string())?;
            ensure!(m.fp == 0, "{corpus} {g:?}: fp = {}", m.fp);
        }
        total += records.len();
    }
    Ok(format!("F1 0.84 and 0.95 reproduced; hand counts match; fp = 0 over {total} records"))
}

// 6 -------------------------------------------------------------------------

fn label(id: &str, hallucinated: bool) -> EvalRecord {
    EvalRecord {
        id: id.into(),
        legacy_snippet: String::new(),
        generated_patch: String::new(),
        ground_truth: if hallucinated {
            vec![TruthEntry { kind: TruthKind::PhantomMember, symbol: "x".into(), on_type: None }]
        } else {
            vec![]
        },
        labels: Labels { valid_migration: !hallucinated, hallucinated },
        generator_model: "fixture".into(),
    }
}

fn score_distribution_shape() -> Outcome {
    // Groups with means 0.791 and 0.807; medians and ranges chosen to match too.
    let hallucinated = [0.353, 0.844, 0.844, 0.956, 0.958];
    let clean = [0.553, 0.827, 0.827, 0.837, 0.991];
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (i, s) in hallucinated.iter().enumerate() {
        records.push(label(&format!("h{i}"), true));
        rows.push(format!("h{i},{s}"));
    }
    for (i, s) in clean.iter().enumerate() {
        records.push(label(&format!("n{i}"), false));
        rows.push(format!("n{i},{s}"));
    }
    let stats_of = |rows: &[String]| -> Result<Vec<u8>, String> {
        let text = format!("id,score\n{}\n", rows.join("\n"));
        let stats = distributions(&parse_scores(&text).map_err(|e| e.to_string())?, &records).map_err(|e| e.to_string())?;
        Ok(serde_json::to_vec(&stats).unwrap())
    };
    let base = stats_of(&rows)?;
    let stats: phantom_check::eval::ScoreStats = serde_json::from_slice(&base).unwrap();
    let h = stats.hallucinated.as_ref().ok_or("no hallucinated group")?;
    let n = stats.no_hallucination.as_ref().ok_or("no clean group")?;
    let three = |x: f64| format!("{x:.3}");
    ensure!(
        [three(h.mean), three(h.median), three(h.min), three(h.max)] == ["0.791", "0.844", "0.353", "0.958"],
        "hallucinated group {h:?}"
    );
    ensure!(
        [three(n.mean), three(n.median), three(n.min), three(n.max)] == ["0.807", "0.827", "0.553", "0.991"],
        "clean group {n:?}"
    );
    ensure!(stats.histogram.bins == 20, "bins {}", stats.histogram.bins);
    ensure!(stats.histogram.hallucinated.len() == 20 && stats.histogram.no_hallucination.len() == 20, "bin vectors");
    ensure!(three(stats.mean_gap.unwrap()) == "0.016", "gap {:?}", stats.mean_gap);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut shuffled = rows.clone();
    for _ in 0..200 {
        shuffled.shuffle(&mut rng);
        ensure!(stats_of(&shuffled)? == base, "order changed the output: {shuffled:?}");
    }
    Ok("means 0.791 / 0.807, 20 bins, 200 permutations byte-identical".into())
}

// 7 -------------------------------------------------------------------------

fn eval_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = fixtures().join("corpus");
    let mut outputs = Vec::new();
    for run in 0..2 {
        let report = dir.path().join(format!("metrics-{run}.json"));
        let status = bin()
            .arg("eval")
            .arg("--oracle")
            .arg(fixtures().join("android-media.xml"))
            .arg("--dataset")
            .arg(corpus.join("dataset.jsonl"))
            .arg("--verdicts")
            .arg(corpus.join("verdicts.jsonl"))
            .arg("--scores")
            .arg(corpus.join("scores.csv"))
            .arg("--report")
            .arg(&report)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(status.status.success(), "eval failed: {}", String::from_utf8_lossy(&status.stderr));
        outputs.push(std::fs::read(&report).map_err(|e| e.to_string())?);
    }
    ensure!(outputs[0] == outputs[1], "metrics differ between runs");
    let doc: serde_json::Value = serde_json::from_slice(&outputs[0]).map_err(|e| e.to_string())?;
    for key in ["detector", "judge", "scores", "census"] {
        ensure!(!doc[key].is_null(), "metrics lack `{key}`");
    }
    Ok(format!("two runs, {} identical bytes", outputs[0].len()))
}

// 8 -------------------------------------------------------------------------

fn fixture_snippets() -> Result<Vec<String>, String> {
    let mut snippets = BTreeSet::new();
    for name in [
        "builder-patch.java",
        "builder-corrected.java",
        "builder-legacy.java",
        "media-session.java",
        "sound-board.java",
    ] {
        snippets.insert(std::fs::read_to_string(fixtures().join(name)).map_err(|e| e.to_string())?);
    }
    for corpus in ["corpus/dataset.jsonl", "corpus/labeled-51.jsonl"] {
        for r in load_dataset(&fixtures().join(corpus)).map_err(|e| e.to_string())? {
            snippets.insert(r.legacy_snippet);
            snippets.insert(r.generated_patch);
        }
    }
    Ok(snippets.into_iter().collect())
}

fn deletion_robustness() -> Outcome {
    let table = android();
    let mut mutants = BTreeSet::new();
    for snippet in fixture_snippets()? {
        let lines: Vec<&str> = snippet.lines().collect();
        for skip in 0..lines.len() {
            let mutated: Vec<&str> =
                lines.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, l)| *l).collect();
            mutants.insert(mutated.join("\n"));
        }
    }
    let mut findings = 0;
    for source in &mutants {
        let report = catch_unwind(AssertUnwindSafe(|| {
            check_snippet(&Snippet::new(source.as_str()), &table, CheckOptions::default())
        }))
        .map_err(|_| format!("panic on:\n{source}"))?;
        for f in &report.findings {
            let ty = match &f.kind {
                FindingKind::PhantomSymbol { class, .. } => class.as_ref(),
                other => other.on_type(),
            };
            ensure!(ty.is_some_and(|t| table.contains_class(t)), "finding on an unresolved type {f:?} in:\n{source}");
        }
        findings += report.findings.len();
    }
    ensure!(mutants.len() >= 500, "only {} distinct mutations", mutants.len());
    Ok(format!("{} single-line deletions, no panics, {findings} findings all on known types", mutants.len()))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 8] = [
        ("builder patch reproduction", builder_reproduction),
        ("chain walk matches reference interpreter", chain_equivalence),
        ("flattening matches transitive walk", flattening_equivalence),
        ("descriptor round trip", descriptor_round_trip),
        ("metrics arithmetic", metrics_arithmetic),
        ("score distribution shape", score_distribution_shape),
        ("eval determinism", eval_determinism),
        ("partial-input robustness", deletion_robustness),
    ];
    let quiet_panics = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(run).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let line = match result {
            Ok(detail) => format!("PASS {} {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                format!("FAIL {} {name}: {why}", n + 1)
            }
        };
        println!("{line}");
    }
    std::panic::set_hook(quiet_panics);
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
