//! Text rendering of result objects.
//!
//! Every renderer reads exclusively from the JSON value the command built,
//! which keeps the text output a strict projection of `--json` output.

use serde_json::Value;

pub fn render(value: &Value) {
    let command = value.get("command").and_then(Value::as_str).unwrap_or("");
    match command {
        "normalize" => kv(value, &[("canonical", "canonical"), ("length", "length")]),
        "length" => println!("{}", num(value, "length")),
        "equal" => println!("{}", boolean(value, "equal")),
        "support" => println!("{}", str_list(value, "support").join(" ")),
        "commutes" => println!("{}", boolean(value, "commutes")),
        "walls" => render_walls(value),
        "crossings" => println!("{}", num(value, "count")),
        "separates" => println!("{}", boolean(value, "separates")),
        "cyclic" => kv(
            value,
            &[
                ("conjugator", "conjugator"),
                ("core", "core"),
                ("translation_length", "translation length"),
            ],
        ),
        "standard-form" => kv(
            value,
            &[
                ("a", "a"),
                ("w_core", "w_core"),
                ("axis_vertex", "axis vertex"),
                ("translation_length", "translation length"),
            ],
        ),
        "classify" => render_classify(value),
        "certify" => render_certify(value),
        "verify" => render_verify(value),
        "ball" => kv(
            value,
            &[
                ("radius", "radius"),
                ("vertex_count", "vertices"),
                ("edge_count", "edges"),
                ("wall_count", "walls"),
            ],
        ),
        "relation-search" => match value.get("relation").and_then(Value::as_str) {
            Some(relation) => println!("{relation}"),
            None => println!("none (searched length <= {})", num(value, "max_len")),
        },
        "validate" => println!("{}", boolean(value, "verified")),
        "distortion" => render_distortion(value),
        "noembed-check" => render_noembed(value),
        _ => println!("{value}"),
    }
}

fn field<'a>(value: &'a Value, key: &str) -> &'a Value {
    value.get(key).unwrap_or(&Value::Null)
}

fn text(value: &Value, key: &str) -> String {
    match field(value, key) {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn num(value: &Value, key: &str) -> u64 {
    field(value, key).as_u64().unwrap_or(0)
}

fn boolean(value: &Value, key: &str) -> bool {
    field(value, key).as_bool().unwrap_or(false)
}

fn str_list(value: &Value, key: &str) -> Vec<String> {
    field(value, key)
        .as_array()
        .map(|items| items.iter().map(|i| text_of(i)).collect())
        .unwrap_or_default()
}

fn text_of(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn kv(value: &Value, pairs: &[(&str, &str)]) {
    for (key, label) in pairs {
        println!("{label}: {}", text(value, key));
    }
}

fn wall_text(wall: &Value) -> String {
    format!("H({}, {})", text_of(field(wall, "base")), text_of(field(wall, "type")))
}

fn render_walls(value: &Value) {
    if let Some(crossings) = field(value, "crossings").as_array() {
        for record in crossings {
            println!(
                "{:>4}  {}",
                num(record, "position"),
                wall_text(field(record, "wall"))
            );
        }
    }
    println!("count: {}", num(value, "count"));
}

fn render_classify(value: &Value) {
    println!("verdict: {}", text(value, "verdict"));
    let witness = field(value, "witness");
    if witness.is_null() {
        return;
    }
    if witness.get("root").is_some() {
        println!("root: {}", text(witness, "root"));
    } else if witness.get("first_root").is_some() {
        println!("first root: {}", text(witness, "first_root"));
        println!("second root: {}", text(witness, "second_root"));
    } else {
        render_certificate_summary(witness);
    }
}

fn render_certificate_summary(cert: &Value) {
    let working = field(cert, "working");
    println!("working u: {}", text(working, "u"));
    println!("working v: {}", text(working, "v"));
    println!("essential wall for u: {}", wall_text(field(cert, "h_u")));
    println!("essential wall for v: {}", wall_text(field(cert, "h_v")));
    println!("lambda: {}", num(cert, "lambda"));
    println!("epsilon: {}", num(cert, "epsilon"));
    println!("lambda (original generators): {}", num(cert, "lambda_original"));
}

fn render_certify(value: &Value) {
    render_certificate_summary(value);
}

fn render_verify(value: &Value) {
    println!("words checked: {}", num(value, "words_checked"));
    println!("passed: {}", boolean(value, "passed"));
    if let Some(violations) = field(value, "violations").as_array() {
        for violation in violations {
            println!("violation: {}", text_of(violation));
        }
    }
}

fn render_distortion(value: &Value) {
    println!("{:>6}  {:>10}  {:<26}  {}", "n", "outer", "fiber", "2^n<=fiber");
    if let Some(samples) = field(value, "samples").as_array() {
        for sample in samples {
            println!(
                "{:>6}  {:>10}  {:<26}  {}",
                num(sample, "n"),
                num(sample, "outer_length"),
                text(sample, "fiber_length"),
                if boolean(sample, "doubling_bound_met") { "yes" } else { "no" },
            );
        }
    }
}

fn render_noembed(value: &Value) {
    let report = field(value, "report");
    println!("verdict: {}", text(report, "verdict"));
    if !field(report, "failing_n").is_null() {
        println!("bound first fails at n = {}", num(report, "failing_n"));
    }
    println!("samples checked: {}", num(report, "samples_checked"));
    println!("max n: {}", num(report, "max_n"));
    println!("growth exponent: {}", text(report, "growth_exponent"));
}
