//! Seeded synthetic corpus with known classifications.
//!
//! Every reference parameter `p{i}` gets one fragment whose effect on `p{i}`
//! is known by construction and independent of the other fragments, since no
//! fragment returns or fails and only `p{i}` itself may be null:
//!
//! | fragment | shape | class |
//! |---|---|---|
//! | deref | `deref p` | definite |
//! | alias deref | `a = p; deref a` | definite |
//! | conditional deref | `if opaque { deref p }` | possible |
//! | unused / guarded / overwritten alias | — | not required |
//! | forward | `call g(.., p, ..)` | class of `g` at that position |
//! | conditional forward | `if opaque { call g(..) }` | weakened class of `g` |
//! | recursion | `if opaque { call self(..) }` then a base shape | class of the base |
//!
//! Weakening maps definite to possible and keeps the other classes. Any
//! non-recursive fragment may be wrapped in `while opaque { .. }`, which also
//! weakens. Forwarding targets are earlier methods at most four forwarding
//! levels deep.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{Env, NullabilityClass};
use crate::diag::Diagnostic;
use crate::ir::{parse_program, print_program, Pos, Program};
use crate::key::AbstractionKey;
use crate::report::{emit_report, CrossTab, ReportFormat, ReportSection};

use NullabilityClass::*;

/// Relative frequency of fragment categories; must sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMix {
    pub definite: f64,
    pub possible: f64,
    pub not_required: f64,
    pub forwarding: f64,
    pub recursive: f64,
}

impl Default for ClassMix {
    fn default() -> Self {
        ClassMix {
            definite: 0.35,
            possible: 0.15,
            not_required: 0.25,
            forwarding: 0.2,
            recursive: 0.05,
        }
    }
}

impl ClassMix {
    fn weights(&self) -> [f64; 5] {
        [
            self.definite,
            self.possible,
            self.not_required,
            self.forwarding,
            self.recursive,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    /// Abstractions to generate, excluding drivers.
    pub method_count: usize,
    /// Widest reference-parameter list, 1..=7.
    pub max_ref_params: usize,
    pub class_mix: ClassMix,
    /// Chance that a fragment is wrapped in a loop.
    pub loop_density: f64,
    pub seed: u64,
    /// Chance that an abstraction is implemented by two classes instead of
    /// one free-standing method.
    pub polymorphic_share: f64,
    /// Chance that an abstraction also takes one value parameter.
    pub value_param_share: f64,
    /// Randomised drivers `main_1..` besides the covering driver `main_cover`.
    pub drivers: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            method_count: 2000,
            max_ref_params: 7,
            class_mix: ClassMix::default(),
            loop_density: 0.1,
            seed: 42,
            polymorphic_share: 0.05,
            value_param_share: 0.1,
            drivers: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub expected_class: Env,
    pub expected_definite: CrossTab,
    pub expected_possible: CrossTab,
    pub abstraction_count: usize,
    /// Abstractions whose body contains no loop.
    pub loop_free: BTreeSet<AbstractionKey>,
    /// Driver names, `main_cover` first.
    pub entries: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub spec: CorpusSpec,
    pub program: Program,
    /// Canonical printed form of `program`; positions in `program` refer to it.
    pub text: String,
    pub truth: GroundTruth,
}

/// Published reference-parameter counts of the static sample, 1..=7.
const ARITY_WEIGHTS: [u32; 7] = [1969, 920, 397, 168, 44, 16, 4];
const PROJECT_WEIGHTS: [f64; 7] = [0.3, 0.2, 0.15, 0.12, 0.1, 0.08, 0.05];
const TYPES: usize = 4;
const MAX_LEVEL: usize = 4;

fn weaken(c: NullabilityClass) -> NullabilityClass {
    c.meet(PossiblyRequired)
}

#[derive(Debug, Clone, Copy)]
enum ParamKind {
    Ref { ty: usize, required: bool },
    Val,
}

struct GenMethod {
    name: String,
    params: Vec<ParamKind>,
    classes: BTreeMap<usize, NullabilityClass>,
    level: usize,
    poly: bool,
    has_loop: bool,
    body: Vec<String>,
}

impl GenMethod {
    fn key(&self) -> AbstractionKey {
        AbstractionKey::new(
            self.name.clone(),
            self.params
                .iter()
                .map(|p| match p {
                    ParamKind::Ref { ty, .. } => format!("T{ty}"),
                    ParamKind::Val => AbstractionKey::VALUE_TYPE.to_string(),
                })
                .collect(),
        )
    }

    fn ref_positions(&self) -> Vec<usize> {
        self.classes.keys().copied().collect()
    }

    fn signature(&self) -> String {
        let params: Vec<String> = self
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| match p {
                ParamKind::Ref { ty, required } => {
                    format!("{} p{i}: T{ty}", if *required { "req" } else { "opt" })
                }
                ParamKind::Val => "val v".to_string(),
            })
            .collect();
        format!("{}({})", self.name, params.join(", "))
    }
}

/// One parameter's fragment.
struct Fragment {
    /// Statements that must precede the fragment proper (fresh locals).
    setup: Vec<String>,
    body: Vec<String>,
    class: NullabilityClass,
    uses_scalar: bool,
    loopable: bool,
}

struct Generator {
    rng: ChaCha8Rng,
    spec: CorpusSpec,
    methods: Vec<GenMethod>,
    /// Indices of methods that may still be forwarded to.
    targets: Vec<usize>,
}

fn infeasible(msg: String) -> Diagnostic {
    Diagnostic::error("infeasible-spec", "corpus", Pos::default(), msg)
}

fn validate_spec(spec: &CorpusSpec) -> Result<(), Diagnostic> {
    let w = spec.class_mix.weights();
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(infeasible("infeasible mix: negative or non-finite weight".into()));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(infeasible(format!("infeasible mix: weights sum to {sum}, not 1")));
    }
    if spec.method_count == 0 {
        return Err(infeasible("method_count must be positive".into()));
    }
    if !(1..=ARITY_WEIGHTS.len()).contains(&spec.max_ref_params) {
        return Err(infeasible(format!(
            "max_ref_params must be in 1..={}",
            ARITY_WEIGHTS.len()
        )));
    }
    for (name, v) in [
        ("loop_density", spec.loop_density),
        ("polymorphic_share", spec.polymorphic_share),
        ("value_param_share", spec.value_param_share),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(infeasible(format!("{name} must be in [0, 1]")));
        }
    }
    Ok(())
}

impl Generator {
    fn method(&mut self, i: usize) -> GenMethod {
        let project = WeightedIndex::new(PROJECT_WEIGHTS)
            .expect("constant weights")
            .sample(&mut self.rng);
        let arity = WeightedIndex::new(&ARITY_WEIGHTS[..self.spec.max_ref_params])
            .expect("constant weights")
            .sample(&mut self.rng)
            + 1;
        let poly = self.rng.gen_bool(self.spec.polymorphic_share);
        let mut params: Vec<ParamKind> = (0..arity)
            .map(|k| ParamKind::Ref {
                ty: if poly && k == 0 {
                    0
                } else {
                    self.rng.gen_range(0..TYPES)
                },
                required: self.rng.gen_bool(0.85),
            })
            .collect();
        if self.rng.gen_bool(self.spec.value_param_share) {
            let lo = usize::from(poly);
            let at = self.rng.gen_range(lo..=params.len());
            params.insert(at, ParamKind::Val);
        }
        let mut m = GenMethod {
            name: format!("pr{project}__m{i:04}"),
            classes: params
                .iter()
                .enumerate()
                .filter(|(_, p)| matches!(p, ParamKind::Ref { .. }))
                .map(|(k, _)| (k, NotLocallyRequired))
                .collect(),
            params,
            level: 0,
            poly,
            has_loop: false,
            body: Vec::new(),
        };
        let mut recursed = false;
        let mut uses_scalar = false;
        let mut setup = Vec::new();
        let mut body = Vec::new();
        for k in m.ref_positions() {
            let mut f = self.fragment(&mut m, k, &mut recursed);
            if f.loopable && self.rng.gen_bool(self.spec.loop_density) {
                let mut wrapped = vec!["while opaque {".to_string()];
                wrapped.extend(f.body.into_iter().map(|l| format!("  {l}")));
                wrapped.push("}".into());
                f.body = wrapped;
                f.class = weaken(f.class);
                m.has_loop = true;
            }
            uses_scalar |= f.uses_scalar;
            m.classes.insert(k, f.class);
            setup.extend(f.setup);
            body.extend(f.body);
        }
        if uses_scalar {
            m.body.push("s = opaque;".into());
        }
        m.body.extend(setup);
        m.body.extend(body);
        m
    }

    fn fragment(&mut self, m: &mut GenMethod, k: usize, recursed: &mut bool) -> Fragment {
        let mix = WeightedIndex::new(self.spec.class_mix.weights()).expect("validated mix");
        let mut category = mix.sample(&mut self.rng);
        if (category == 3 && self.targets.is_empty()) || (category == 4 && *recursed) {
            let w = &self.spec.class_mix.weights()[..3];
            category = match WeightedIndex::new(w) {
                Ok(d) => d.sample(&mut self.rng),
                Err(_) => 2,
            };
        }
        let p = format!("p{k}");
        let local = |body: Vec<String>, class| Fragment {
            setup: Vec::new(),
            body,
            class,
            uses_scalar: false,
            loopable: true,
        };
        match category {
            0 if self.rng.gen_ratio(1, 3) => {
                local(vec![format!("a{k} = {p};"), format!("deref a{k};")], DefinitelyRequired)
            }
            0 => local(vec![format!("deref {p};")], DefinitelyRequired),
            1 => local(vec![format!("if opaque {{ deref {p}; }}")], PossiblyRequired),
            2 => {
                let body = match self.rng.gen_range(0..3) {
                    0 => Vec::new(),
                    1 => vec![format!("if {p} != null {{ deref {p}; }}")],
                    _ => vec![
                        format!("a{k} = {p};"),
                        format!("a{k} = new T{};", param_type(m, k)),
                        format!("deref a{k};"),
                    ],
                };
                local(body, NotLocallyRequired)
            }
            3 => {
                let g = self.targets[self.rng.gen_range(0..self.targets.len())];
                let positions = self.methods[g].ref_positions();
                let j = positions[self.rng.gen_range(0..positions.len())];
                let target = &self.methods[g];
                let (setup, call, uses_scalar) = call_with(&target.name, &target.params, k, j, &p);
                let mut class = target.classes[&j];
                m.level = m.level.max(target.level + 1);
                let body = if self.rng.gen_ratio(3, 10) {
                    class = weaken(class);
                    vec![format!("if opaque {{ {call} }}")]
                } else {
                    vec![call]
                };
                Fragment {
                    setup,
                    body,
                    class,
                    uses_scalar,
                    loopable: true,
                }
            }
            _ => {
                *recursed = true;
                let (setup, call, uses_scalar) = call_with(&m.name, &m.params, k, k, &p);
                let (base, class) = match self.rng.gen_range(0..3) {
                    0 => (vec![format!("deref {p};")], DefinitelyRequired),
                    1 => (vec![format!("if opaque {{ deref {p}; }}")], PossiblyRequired),
                    _ => (Vec::new(), NotLocallyRequired),
                };
                let mut body = vec![format!("if opaque {{ {call} }}")];
                body.extend(base);
                Fragment {
                    setup,
                    body,
                    class,
                    uses_scalar,
                    loopable: false,
                }
            }
        }
    }

    fn driver_call(&mut self, m: usize, first: Option<usize>, null_chance: f64) -> String {
        let args: Vec<String> = self.methods[m]
            .params
            .clone()
            .iter()
            .enumerate()
            .map(|(i, p)| match p {
                ParamKind::Val => "s".to_string(),
                _ if null_chance > 0.0 && self.rng.gen_bool(null_chance) => "null".to_string(),
                ParamKind::Ref { ty, .. } => format!("o{}", if i == 0 { first.unwrap_or(*ty) } else { *ty }),
            })
            .collect();
        format!("call {}({});", self.methods[m].name, args.join(", "))
    }
}

fn param_type(m: &GenMethod, k: usize) -> usize {
    match m.params[k] {
        ParamKind::Ref { ty, .. } => ty,
        ParamKind::Val => unreachable!("fragments are built for reference parameters"),
    }
}

/// A call to `name` with `arg` at position `at`, fresh objects at the other
/// reference positions and the scalar `s` at value positions.
fn call_with(name: &str, params: &[ParamKind], owner: usize, at: usize, arg: &str) -> (Vec<String>, String, bool) {
    let mut setup = Vec::new();
    let mut uses_scalar = false;
    let args: Vec<String> = params
        .iter()
        .enumerate()
        .map(|(i, p)| match p {
            _ if i == at => arg.to_string(),
            ParamKind::Val => {
                uses_scalar = true;
                "s".to_string()
            }
            ParamKind::Ref { ty, .. } => {
                let local = format!("f{owner}_{i}");
                setup.push(format!("{local} = new T{ty};"));
                local
            }
        })
        .collect();
    (setup, format!("call {name}({});", args.join(", ")), uses_scalar)
}

fn method_text(out: &mut String, indent: &str, m: &GenMethod) {
    let _ = writeln!(out, "{indent}method {} {{", m.signature());
    for l in &m.body {
        let _ = writeln!(out, "{indent}  {l}");
    }
    let _ = writeln!(out, "{indent}}}");
}

/// Generates a corpus. Equal specs give identical corpora.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Corpus, Diagnostic> {
    validate_spec(spec)?;
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        spec: spec.clone(),
        methods: Vec::with_capacity(spec.method_count),
        targets: Vec::new(),
    };
    for i in 0..spec.method_count {
        let m = g.method(i);
        if m.level < MAX_LEVEL {
            g.targets.push(g.methods.len());
        }
        g.methods.push(m);
    }

    let mut drivers = Vec::new();
    let prologue: Vec<String> = (0..TYPES)
        .map(|t| format!("o{t} = new T{t};"))
        .chain(std::iter::once("s = opaque;".to_string()))
        .collect();
    let mut cover = prologue.clone();
    for m in 0..g.methods.len() {
        if g.methods[m].poly {
            cover.push(g.driver_call(m, Some(0), 0.0));
            cover.push(g.driver_call(m, Some(1), 0.0));
        } else {
            cover.push(g.driver_call(m, None, 0.0));
        }
    }
    drivers.push(("main_cover".to_string(), cover));
    for d in 1..=spec.drivers {
        let mut body = prologue.clone();
        let null_chance = g.rng.gen_range(0.1..=0.2);
        for _ in 0..15 {
            let m = g.rng.gen_range(0..g.methods.len());
            body.push(g.driver_call(m, None, null_chance));
        }
        drivers.push((format!("main_{d}"), body));
    }

    let mut src = String::new();
    src.push_str("classifier T0;\nclassifier T1 extends T0;\nclassifier T2;\nclassifier T3;\n\n");
    for t in 0..TYPES {
        let _ = writeln!(src, "face T{t} {{");
        for m in &g.methods {
            if matches!(m.params.first(), Some(ParamKind::Ref { ty, .. }) if *ty == t) {
                let _ = writeln!(src, "  {};", m.signature());
            }
        }
        src.push_str("}\n\n");
    }
    for (class, classifier) in [("K0", "T0"), ("K1", "T1")] {
        let _ = writeln!(src, "class {class} is {classifier} {{");
        for m in g.methods.iter().filter(|m| m.poly) {
            method_text(&mut src, "  ", m);
        }
        src.push_str("}\n\n");
    }
    src.push_str("class K2 is T2 { }\nclass K3 is T3 { }\n\n");
    for m in g.methods.iter().filter(|m| !m.poly) {
        method_text(&mut src, "", m);
    }
    for (name, body) in &drivers {
        let _ = writeln!(src, "method {name}() {{");
        for l in body {
            let _ = writeln!(src, "  {l}");
        }
        src.push_str("}\n");
    }

    let reparse = |text: &str| {
        parse_program(text).map_err(|d| {
            let first = d.first().map(ToString::to_string).unwrap_or_default();
            infeasible(format!("generated corpus does not parse: {first}"))
        })
    };
    let text = print_program(&reparse(&src)?);
    let program = reparse(&text)?;

    let mut truth = GroundTruth {
        expected_class: Env::new(),
        expected_definite: CrossTab::new(),
        expected_possible: CrossTab::new(),
        abstraction_count: g.methods.len(),
        loop_free: BTreeSet::new(),
        entries: drivers.into_iter().map(|(n, _)| n).collect(),
    };
    for m in &g.methods {
        let key = m.key();
        let count = |pred: fn(NullabilityClass) -> bool| m.classes.values().filter(|&&c| pred(c)).count();
        truth
            .expected_definite
            .add(m.classes.len(), count(|c| c == DefinitelyRequired), 1);
        truth
            .expected_possible
            .add(m.classes.len(), count(|c| c >= PossiblyRequired), 1);
        if !m.has_loop {
            truth.loop_free.insert(key.clone());
        }
        for (&k, &c) in &m.classes {
            truth.expected_class.insert((key.clone(), k), c);
        }
    }
    Ok(Corpus {
        spec: spec.clone(),
        program,
        text,
        truth,
    })
}

/// Ground truth as `method,param_index,class` CSV.
pub fn ground_truth_csv(truth: &GroundTruth) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "param_index", "class"])
        .expect("in-memory write");
    for ((key, i), c) in &truth.expected_class {
        w.write_record([key.to_string(), i.to_string(), c.as_str().to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn manifest(c: &Corpus) -> String {
    let s = &c.spec;
    let m = &s.class_mix;
    format!(
        "method_count={}\nmax_ref_params={}\nclass_mix=definite:{},possible:{},not_required:{},forwarding:{},recursive:{}\n\
         loop_density={}\nseed={}\npolymorphic_share={}\nvalue_param_share={}\ndrivers={}\nentries={}\n",
        s.method_count,
        s.max_ref_params,
        m.definite,
        m.possible,
        m.not_required,
        m.forwarding,
        m.recursive,
        s.loop_density,
        s.seed,
        s.polymorphic_share,
        s.value_param_share,
        s.drivers,
        c.truth.entries.join(","),
    )
}

/// Writes `corpus.mol`, `ground_truth.csv`, `expected_definite.csv`,
/// `expected_possible.csv` and `manifest.txt` into `dir`, creating it.
pub fn write_corpus(c: &Corpus, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("corpus.mol"), &c.text)?;
    fs::write(dir.join("ground_truth.csv"), ground_truth_csv(&c.truth))?;
    for (file, tab) in [
        ("expected_definite.csv", &c.truth.expected_definite),
        ("expected_possible.csv", &c.truth.expected_possible),
    ] {
        let section = ReportSection::CrossTab {
            title: file.into(),
            tab: tab.clone(),
        };
        fs::write(dir.join(file), emit_report(&[section], ReportFormat::Csv))?;
    }
    fs::write(dir.join("manifest.txt"), manifest(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{fixpoint_analyze, AnalysisOptions};
    use crate::ir::ProgramIndex;

    fn small(seed: u64) -> CorpusSpec {
        CorpusSpec {
            method_count: 150,
            seed,
            drivers: 3,
            ..CorpusSpec::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate_corpus(&small(7)).unwrap();
        let b = generate_corpus(&small(7)).unwrap();
        assert_eq!(a.text, b.text);
        assert_eq!(a.truth, b.truth);
        assert_ne!(a.text, generate_corpus(&small(8)).unwrap().text);
    }

    #[test]
    fn truth_covers_every_abstraction() {
        let c = generate_corpus(&small(3)).unwrap();
        let idx = ProgramIndex::new(&c.program);
        let keys: BTreeSet<_> = idx.abstraction_keys().filter(|k| k.arity() > 0).cloned().collect();
        let truth_keys: BTreeSet<_> = c.truth.expected_class.keys().map(|(k, _)| k.clone()).collect();
        assert_eq!(keys, truth_keys);
        assert_eq!(c.truth.abstraction_count, 150);
        assert_eq!(c.truth.expected_definite.grand_total(), 150);
        assert_eq!(c.program.entry_points().len(), 4);
    }

    #[test]
    fn static_analysis_matches_truth() {
        for seed in [1, 2, 3] {
            let c = generate_corpus(&small(seed)).unwrap();
            let r = fixpoint_analyze(&c.program, AnalysisOptions::default()).unwrap();
            assert!(r.path_budget_exceeded.is_empty());
            assert_eq!(r.classes, c.truth.expected_class, "seed {seed}");
        }
    }

    #[test]
    fn infeasible_specs() {
        let mut s = small(1);
        s.class_mix.definite = 0.9;
        assert!(generate_corpus(&s).unwrap_err().message.contains("infeasible mix"));
        let s = CorpusSpec {
            max_ref_params: 0,
            ..small(1)
        };
        assert!(generate_corpus(&s).is_err());
    }

    #[test]
    fn narrow_spec() {
        let s = CorpusSpec {
            max_ref_params: 1,
            value_param_share: 1.0,
            loop_density: 1.0,
            ..small(5)
        };
        let c = generate_corpus(&s).unwrap();
        assert_eq!(c.truth.expected_definite.max_arity(), 1);
        let r = fixpoint_analyze(&c.program, AnalysisOptions::default()).unwrap();
        assert_eq!(r.classes, c.truth.expected_class);
    }
}
