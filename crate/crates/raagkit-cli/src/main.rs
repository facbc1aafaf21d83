//! Command-line front end.
//!
//! Every subcommand builds exactly one JSON object; `--json` prints it and
//! the human rendering in [`human`] reads only from that object, so the
//! terminal output never carries information absent from the JSON. Output
//! is deterministic byte for byte for fixed inputs: maps are serialized
//! with sorted keys and no command consults wall-clock time or ambient
//! randomness (random corpora are driven by `--seed`).
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error, 3 certificate
//! falsified by `verify`.

mod claims;
mod human;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use raagkit::axes::{cyclically_reduce, standard_form, translation_length};
use raagkit::distortion::{check_nonembeddable, finite_index_sequence};
use raagkit::geometry::{crossing_sequence, crossings_with, separates};
use raagkit::oracle::{build_ball, search_relation, validate};
use raagkit::qi::{
    build_certificate, classify_subgroup, random_reduced_words, verify_certificate,
    Classification,
};
use raagkit::{
    DefiningGraph, Error, FreeAutomorphism, FreeWord, GroupElement, Hyperplane, QICertificate,
    Word,
};

#[derive(Parser)]
#[command(
    name = "raagkit",
    version,
    about = "Word calculus, wall combinatorics, and subgroup certificates \
             for right-angled Artin groups",
    after_help = "The environment variable RAAGKIT_MAX_BALL raises the ball \
                  radius ceiling used by oracle-backed commands."
)]
struct Cli {
    /// Defining graph JSON: {"vertices": ["a", ...], "edges": [["a","b"], ...]}
    #[arg(long, global = true, value_name = "PATH")]
    graph: Option<PathBuf>,

    /// Print the result as one JSON object instead of text
    #[arg(long, global = true)]
    json: bool,

    /// Write the command's primary artifact (certificate, ball dump, or the
    /// result object itself) to this path as JSON
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Seed for random corpora
    #[arg(long, global = true, default_value_t = 0, value_name = "INT")]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

/// Words are written either one token per generator ("a b^-1") or as a
/// compact string of single-letter names with uppercase meaning inverse
/// ("aB"); "1" is the identity.
#[derive(Subcommand)]
enum Command {
    /// Canonical (ShortLex) normal form of a word
    Normalize { word: Vec<String> },
    /// Geodesic length of the element a word spells
    Length { word: Vec<String> },
    /// Whether two words spell the same element
    Equal { first: String, second: String },
    /// Generators appearing in the normal form
    Support { word: Vec<String> },
    /// Whether two elements commute
    Commutes { first: String, second: String },
    /// Wall crossings along a geodesic from the identity
    Walls { word: Vec<String> },
    /// How often one wall is crossed by a geodesic path
    Crossings(CrossingsArgs),
    /// Whether a wall separates two elements
    Separates(SeparatesArgs),
    /// Cyclic reduction: conjugator and cyclically reduced core
    Cyclic { word: Vec<String> },
    /// Geodesic decomposition of a word through an axis of minimal displacement
    StandardForm { word: Vec<String> },
    /// Isomorphism type of the subgroup two elements generate
    Classify { first: String, second: String },
    /// Build a quasi-isometry certificate for a two-generator subgroup
    Certify { first: String, second: String },
    /// Re-check a certificate against sample words; exits 3 when falsified
    Verify(VerifyArgs),
    /// Build an exhaustive Cayley ball and report its size
    Ball(BallArgs),
    /// Search for a relation among the images of free generators
    RelationSearch(RelationSearchArgs),
    /// Check a claim file against an exhaustive ball
    Validate(ValidateArgs),
    /// Fiber lengths of iterated free-group automorphism conjugates
    Distortion(DistortionArgs),
    /// Check the logarithmic bound witnessing fiber distortion
    NoembedCheck(DistortionArgs),
}

#[derive(Args)]
struct CrossingsArgs {
    /// Base point of the wall (a word)
    #[arg(long, value_name = "WORD")]
    wall_base: String,
    /// Generator type of the wall
    #[arg(long, value_name = "GEN")]
    wall_type: String,
    /// Start of the path; the identity when omitted
    #[arg(long, value_name = "WORD")]
    from: Option<String>,
    /// Word spelling the geodesic path to follow
    word: Vec<String>,
}

#[derive(Args)]
struct SeparatesArgs {
    /// Base point of the wall (a word)
    #[arg(long, value_name = "WORD")]
    wall_base: String,
    /// Generator type of the wall
    #[arg(long, value_name = "GEN")]
    wall_type: String,
    /// First element
    first: String,
    /// Second element
    second: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// Certificate file written by `certify`
    #[arg(long, value_name = "PATH")]
    cert: PathBuf,
    /// Number of random reduced words to test (driven by --seed)
    #[arg(long, default_value_t = 0, value_name = "COUNT")]
    random: usize,
    /// Maximum length of random words
    #[arg(long, default_value_t = 30, value_name = "LEN")]
    max_len: usize,
    /// Explicit words in the working generators u, v (e.g. "u v^-1 u")
    words: Vec<String>,
}

#[derive(Args)]
struct BallArgs {
    /// Ball radius to build
    #[arg(long, default_value_t = 3, value_name = "R")]
    max_radius: usize,
    /// Also write the ball as Graphviz DOT to this path
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct RelationSearchArgs {
    /// Images of the free generators, one word each
    #[arg(required = true)]
    images: Vec<String>,
    /// Bound on the relation length searched
    #[arg(long, default_value_t = 8, value_name = "LEN")]
    max_len: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// Claim JSON file; see `claims` for the accepted kinds
    #[arg(long, value_name = "PATH")]
    claim: PathBuf,
    /// Radius of the ball the claim is checked against
    #[arg(long, default_value_t = 5, value_name = "R")]
    max_radius: usize,
}

#[derive(Args)]
struct DistortionArgs {
    /// Built-in automorphism preset (available: figure8)
    #[arg(long, conflicts_with = "aut", value_name = "NAME")]
    preset: Option<String>,
    /// Automorphism JSON file: {"rank": r, "images": [...], "inverse"?: [...]}
    #[arg(long, value_name = "PATH")]
    aut: Option<PathBuf>,
    /// Largest sample index; samples run over k = 0..=n
    #[arg(long, default_value_t = 10, value_name = "N")]
    n: u64,
    /// Sample only exponents divisible by this index
    #[arg(long, default_value_t = 1, value_name = "K")]
    index: u64,
    /// Seed word in the free-group generators; the first generator when omitted
    #[arg(long, value_name = "WORD")]
    word: Option<String>,
}

/// What a command produced: the object printed to stdout, an optional
/// artifact that `--out` receives instead of that object, and the exit code.
struct Output {
    value: Value,
    artifact: Option<Value>,
    exit: u8,
}

impl Output {
    fn ok(value: Value) -> Output {
        Output { value, artifact: None, exit: 0 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_mode = cli.json;
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            emit_error(json_mode, &err);
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let out_path = cli.out.clone();
    let json_mode = cli.json;
    let output = dispatch(cli)?;
    if let Some(path) = &out_path {
        let artifact = output.artifact.as_ref().unwrap_or(&output.value);
        let mut text = serde_json::to_string_pretty(artifact)?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        if !json_mode {
            eprintln!("wrote {}", path.display());
        }
    }
    if json_mode {
        println!("{}", serde_json::to_string_pretty(&output.value)?);
    } else {
        human::render(&output.value);
    }
    Ok(output.exit)
}

fn dispatch(cli: Cli) -> anyhow::Result<Output> {
    let graph_path = cli.graph;
    let seed = cli.seed;
    match cli.command {
        Command::Normalize { word } => cmd_normalize(&require_graph(&graph_path)?, &word),
        Command::Length { word } => cmd_length(&require_graph(&graph_path)?, &word),
        Command::Equal { first, second } => {
            cmd_equal(&require_graph(&graph_path)?, &first, &second)
        }
        Command::Support { word } => cmd_support(&require_graph(&graph_path)?, &word),
        Command::Commutes { first, second } => {
            cmd_commutes(&require_graph(&graph_path)?, &first, &second)
        }
        Command::Walls { word } => cmd_walls(&require_graph(&graph_path)?, &word),
        Command::Crossings(args) => cmd_crossings(&require_graph(&graph_path)?, &args),
        Command::Separates(args) => cmd_separates(&require_graph(&graph_path)?, &args),
        Command::Cyclic { word } => cmd_cyclic(&require_graph(&graph_path)?, &word),
        Command::StandardForm { word } => cmd_standard_form(&require_graph(&graph_path)?, &word),
        Command::Classify { first, second } => {
            cmd_classify(&require_graph(&graph_path)?, &first, &second)
        }
        Command::Certify { first, second } => {
            cmd_certify(&require_graph(&graph_path)?, &first, &second)
        }
        Command::Verify(args) => cmd_verify(&args, seed),
        Command::Ball(args) => cmd_ball(&require_graph(&graph_path)?, &args),
        Command::RelationSearch(args) => {
            cmd_relation_search(&require_graph(&graph_path)?, &args)
        }
        Command::Validate(args) => cmd_validate(&require_graph(&graph_path)?, &args),
        Command::Distortion(args) => cmd_distortion(&args),
        Command::NoembedCheck(args) => cmd_noembed_check(&args),
    }
}

/// Loads `--graph`; a missing flag is a usage error, so this exits 2
/// directly rather than returning through the domain-error path.
fn require_graph(path: &Option<PathBuf>) -> anyhow::Result<Arc<DefiningGraph>> {
    let Some(path) = path else {
        eprintln!("error: this command needs --graph <PATH>");
        std::process::exit(2);
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading graph file {}", path.display()))?;
    Ok(DefiningGraph::from_json(&text)?)
}

/// A word argument is either one shell word per generator token or a single
/// quoted string; joining restores the token grammar either way.
fn element(graph: &Arc<DefiningGraph>, words: &[String]) -> anyhow::Result<GroupElement> {
    Ok(GroupElement::parse(graph, &words.join(" "))?)
}

fn element_one(graph: &Arc<DefiningGraph>, text: &str) -> anyhow::Result<GroupElement> {
    Ok(GroupElement::parse(graph, text)?)
}

fn cmd_normalize(graph: &Arc<DefiningGraph>, word: &[String]) -> anyhow::Result<Output> {
    let input = word.join(" ");
    let g = GroupElement::parse(graph, &input)?;
    Ok(Output::ok(json!({
        "command": "normalize",
        "input": input,
        "canonical": g.to_text(),
        "length": g.len(),
    })))
}

fn cmd_length(graph: &Arc<DefiningGraph>, word: &[String]) -> anyhow::Result<Output> {
    let g = element(graph, word)?;
    Ok(Output::ok(json!({
        "command": "length",
        "canonical": g.to_text(),
        "length": g.len(),
    })))
}

fn cmd_equal(
    graph: &Arc<DefiningGraph>,
    first: &str,
    second: &str,
) -> anyhow::Result<Output> {
    let g1 = element_one(graph, first)?;
    let g2 = element_one(graph, second)?;
    Ok(Output::ok(json!({
        "command": "equal",
        "first": g1.to_text(),
        "second": g2.to_text(),
        "equal": g1 == g2,
    })))
}

fn cmd_support(graph: &Arc<DefiningGraph>, word: &[String]) -> anyhow::Result<Output> {
    let g = element(graph, word)?;
    Ok(Output::ok(json!({
        "command": "support",
        "canonical": g.to_text(),
        "support": g.support_names(),
    })))
}

fn cmd_commutes(
    graph: &Arc<DefiningGraph>,
    first: &str,
    second: &str,
) -> anyhow::Result<Output> {
    let g1 = element_one(graph, first)?;
    let g2 = element_one(graph, second)?;
    Ok(Output::ok(json!({
        "command": "commutes",
        "first": g1.to_text(),
        "second": g2.to_text(),
        "commutes": g1.commutes_with(&g2)?,
    })))
}

fn cmd_walls(graph: &Arc<DefiningGraph>, word: &[String]) -> anyhow::Result<Output> {
    let g = element(graph, word)?;
    let origin = GroupElement::identity(graph);
    let records = crossing_sequence(&origin, g.word())?;
    let crossings: Vec<Value> = records
        .iter()
        .map(|r| json!({ "position": r.position, "wall": r.hyperplane.to_json() }))
        .collect();
    Ok(Output::ok(json!({
        "command": "walls",
        "word": g.to_text(),
        "count": crossings.len(),
        "crossings": crossings,
    })))
}

fn cmd_crossings(graph: &Arc<DefiningGraph>, args: &CrossingsArgs) -> anyhow::Result<Output> {
    let h = Hyperplane::parse(graph, &args.wall_base, &args.wall_type)?;
    let start = match &args.from {
        Some(text) => element_one(graph, text)?,
        None => GroupElement::identity(graph),
    };
    let g = element(graph, &args.word)?;
    let count = crossings_with(&h, &start, g.word())?;
    Ok(Output::ok(json!({
        "command": "crossings",
        "wall": h.to_json(),
        "from": start.to_text(),
        "word": g.to_text(),
        "count": count,
    })))
}

fn cmd_separates(graph: &Arc<DefiningGraph>, args: &SeparatesArgs) -> anyhow::Result<Output> {
    let h = Hyperplane::parse(graph, &args.wall_base, &args.wall_type)?;
    let p = element_one(graph, &args.first)?;
    let q = element_one(graph, &args.second)?;
    Ok(Output::ok(json!({
        "command": "separates",
        "wall": h.to_json(),
        "first": p.to_text(),
        "second": q.to_text(),
        "separates": separates(&h, &p, &q)?,
    })))
}

fn cmd_cyclic(graph: &Arc<DefiningGraph>, word: &[String]) -> anyhow::Result<Output> {
    let g = element(graph, word)?;
    let dec = cyclically_reduce(&g);
    Ok(Output::ok(json!({
        "command": "cyclic",
        "element": g.to_text(),
        "conjugator": dec.conjugator().to_text(),
        "core": dec.core().to_text(),
        "translation_length": translation_length(&g),
    })))
}

fn cmd_standard_form(graph: &Arc<DefiningGraph>, word: &[String]) -> anyhow::Result<Output> {
    let g = element(graph, word)?;
    let sf = standard_form(&g)?;
    Ok(Output::ok(json!({
        "command": "standard-form",
        "element": g.to_text(),
        "a": sf.basepoint_path().to_text(graph),
        "w_core": sf.axis_segment().to_text(graph),
        "axis_vertex": sf.axis_vertex().to_text(),
        "translation_length": sf.translation_length(),
    })))
}

fn cmd_classify(
    graph: &Arc<DefiningGraph>,
    first: &str,
    second: &str,
) -> anyhow::Result<Output> {
    let g1 = element_one(graph, first)?;
    let g2 = element_one(graph, second)?;
    let classification = classify_subgroup(&g1, &g2)?;
    let witness = match &classification {
        Classification::Trivial => Value::Null,
        Classification::Z { root } => json!({ "root": root.to_text() }),
        Classification::Z2 { first_root, second_root } => json!({
            "first_root": first_root.to_text(),
            "second_root": second_root.to_text(),
        }),
        Classification::F2 { certificate } => certificate.to_json(),
    };
    Ok(Output::ok(json!({
        "command": "classify",
        "first": g1.to_text(),
        "second": g2.to_text(),
        "verdict": classification.name(),
        "witness": witness,
    })))
}

fn cmd_certify(
    graph: &Arc<DefiningGraph>,
    first: &str,
    second: &str,
) -> anyhow::Result<Output> {
    let g1 = element_one(graph, first)?;
    let g2 = element_one(graph, second)?;
    let cert = build_certificate(&g1, &g2)?;
    let artifact = cert.to_json();
    let mut value = artifact.clone();
    value["command"] = Value::String("certify".into());
    Ok(Output { value, artifact: Some(artifact), exit: 0 })
}

fn cmd_verify(args: &VerifyArgs, seed: u64) -> anyhow::Result<Output> {
    let text = fs::read_to_string(&args.cert)
        .with_context(|| format!("reading certificate {}", args.cert.display()))?;
    let value: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing certificate {}", args.cert.display()))?;
    let cert = QICertificate::from_json(&value)?;
    let names = ["u", "v"];
    let mut words = args
        .words
        .iter()
        .map(|t| FreeWord::parse(t, &names))
        .collect::<Result<Vec<_>, _>>()?;
    if args.random > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        words.extend(random_reduced_words(&mut rng, args.random, args.max_len));
    }
    if words.is_empty() {
        return Err(Error::Precondition {
            op: "verify",
            detail: "no words to check; pass words or --random <COUNT>".into(),
        }
        .into());
    }
    let report = verify_certificate(&cert, &words)?;
    let passed = report.passed();
    Ok(Output {
        value: json!({
            "command": "verify",
            "certificate": args.cert.display().to_string(),
            "lambda": cert.lambda(),
            "epsilon": cert.epsilon(),
            "words_checked": report.words_checked,
            "passed": passed,
            "violations": report.violations,
        }),
        artifact: None,
        exit: if passed { 0 } else { 3 },
    })
}

fn cmd_ball(graph: &Arc<DefiningGraph>, args: &BallArgs) -> anyhow::Result<Output> {
    let ball = build_ball(graph, args.max_radius)?;
    if let Some(path) = &args.dot {
        fs::write(path, ball.to_dot())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Output {
        value: json!({
            "command": "ball",
            "radius": args.max_radius,
            "vertex_count": ball.vertex_count(),
            "edge_count": ball.edge_count(),
            "wall_count": ball.wall_count(),
        }),
        artifact: Some(ball.to_json()),
        exit: 0,
    })
}

fn cmd_relation_search(
    graph: &Arc<DefiningGraph>,
    args: &RelationSearchArgs,
) -> anyhow::Result<Output> {
    let images = args
        .images
        .iter()
        .map(|t| element_one(graph, t))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let relation = search_relation(graph, &images, args.max_len)?;
    let image_texts: Vec<String> = images.iter().map(GroupElement::to_text).collect();
    Ok(Output::ok(json!({
        "command": "relation-search",
        "images": image_texts,
        "max_len": args.max_len,
        "relation": relation,
    })))
}

fn cmd_validate(graph: &Arc<DefiningGraph>, args: &ValidateArgs) -> anyhow::Result<Output> {
    let text = fs::read_to_string(&args.claim)
        .with_context(|| format!("reading claim file {}", args.claim.display()))?;
    let value: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing claim file {}", args.claim.display()))?;
    let claim = claims::parse(graph, &value)?;
    let ball = build_ball(graph, args.max_radius)?;
    let verified = validate(&ball, &claim)?;
    Ok(Output::ok(json!({
        "command": "validate",
        "claim": value,
        "radius": args.max_radius,
        "verified": verified,
    })))
}

fn load_automorphism(args: &DistortionArgs) -> anyhow::Result<FreeAutomorphism> {
    match (&args.preset, &args.aut) {
        (Some(name), None) => match name.as_str() {
            "figure8" => Ok(FreeAutomorphism::figure_eight()),
            other => Err(Error::Precondition {
                op: "distortion",
                detail: format!("unknown preset `{other}`; available: figure8"),
            }
            .into()),
        },
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading automorphism {}", path.display()))?;
            Ok(FreeAutomorphism::from_json(&text)?)
        }
        _ => Err(Error::Precondition {
            op: "distortion",
            detail: "pass --preset <NAME> or --aut <PATH>".into(),
        }
        .into()),
    }
}

fn parse_seed_word(aut: &FreeAutomorphism, args: &DistortionArgs) -> anyhow::Result<Word> {
    let seed_text = match &args.word {
        Some(text) => text.clone(),
        None => aut.graph().vertex_name(0).to_string(),
    };
    Ok(Word::parse(aut.graph(), &seed_text)?)
}

fn cmd_distortion(args: &DistortionArgs) -> anyhow::Result<Output> {
    let aut = load_automorphism(args)?;
    let seed = parse_seed_word(&aut, args)?;
    let samples = finite_index_sequence(&aut, &seed, args.index, args.n)?;
    let rows: Vec<Value> = samples
        .iter()
        .map(|s| {
            let mut row = s.to_json();
            let doubling = s.n < 128 && (1u128 << s.n) <= s.fiber_length;
            row["doubling_bound_met"] = Value::Bool(doubling);
            row
        })
        .collect();
    Ok(Output::ok(json!({
        "command": "distortion",
        "automorphism": aut.to_json(),
        "seed": seed.to_text(aut.graph()),
        "index": args.index,
        "samples": rows,
    })))
}

fn cmd_noembed_check(args: &DistortionArgs) -> anyhow::Result<Output> {
    let aut = load_automorphism(args)?;
    let seed = parse_seed_word(&aut, args)?;
    let samples = finite_index_sequence(&aut, &seed, args.index, args.n)?;
    let report = check_nonembeddable(&samples)?;
    Ok(Output::ok(json!({
        "command": "noembed-check",
        "automorphism": aut.to_json(),
        "seed": seed.to_text(aut.graph()),
        "index": args.index,
        "report": report.to_json(),
    })))
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::UnknownGenerator { .. } => "unknown-generator",
        Error::LetterOutOfRange { .. } => "letter-out-of-range",
        Error::GraphMismatch => "graph-mismatch",
        Error::IdentityInput { .. } => "identity-input",
        Error::Precondition { .. } => "precondition",
        Error::ResourceLimit { .. } => "resource-limit",
        Error::Internal { .. } => "internal",
        Error::InvalidGraph { .. } => "invalid-graph",
        Error::Parse { .. } => "parse",
    }
}

fn emit_error(json_mode: bool, err: &anyhow::Error) {
    let kind = if let Some(e) = err.downcast_ref::<Error>() {
        error_kind(e)
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        "io"
    } else if err.downcast_ref::<serde_json::Error>().is_some() {
        "json"
    } else {
        "error"
    };
    let detail = format!("{err:#}");
    if json_mode {
        let value = json!({ "error": { "kind": kind, "detail": detail } });
        println!("{}", serde_json::to_string_pretty(&value).expect("literal object"));
    } else {
        eprintln!("error ({kind}): {detail}");
    }
}
