mod common;

use jsonschema::JSONSchema;
use serde_json::{json, Value};

fn schema_for(def: &str) -> JSONSchema {
    let path = common::crate_dir().join("../../docs/schemas/xfeyn.schema.json");
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!(doc["$defs"][def].is_object(), "no definition {def}");
    doc["$ref"] = json!(format!("#/$defs/{def}"));
    JSONSchema::compile(&doc).unwrap_or_else(|e| panic!("{def}: {e}"))
}

fn assert_valid(def: &str, value: &Value, what: &str) {
    let schema = schema_for(def);
    let msgs: Vec<String> = match schema.validate(value) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{what} does not match {def}: {msgs:?}");
}

fn read(rel: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(common::crate_dir().join(rel)).unwrap()).unwrap()
}

#[test]
fn goldens_match_their_schemas() {
    for (name, args) in common::EXAMPLES {
        let def = match args[0] {
            "prop-eval" => "prop_eval_output",
            "prop-expand" => "prop_expand_output",
            "gegen" => "gegen_output",
            "graph-coproduct" => "graph_coproduct_output",
            "graph-antipode" => "graph_antipode_output",
            "renorm" => "renorm_output",
            "beta" => "beta_output",
            "divisors" => "divisors_output",
            other => panic!("unmapped subcommand {other}"),
        };
        let value: Value = serde_json::from_slice(&std::fs::read(common::golden_path(name)).unwrap()).unwrap();
        assert_valid(def, &value, name);
    }
}

#[test]
fn fixtures_match_their_schemas() {
    for g in ["banana", "nested", "chain", "family"] {
        assert_valid("graph_input", &read(&format!("tests/fixtures/{g}.json")), g);
    }
    for p in ["phi_banana", "phi_nested"] {
        assert_valid("phi_input", &read(&format!("tests/fixtures/{p}.json")), p);
    }
    for c in ["config", "strict"] {
        assert_valid("config", &read(&format!("tests/fixtures/{c}.json")), c);
    }
}

#[test]
fn schemas_reject_malformed_payloads() {
    assert!(!schema_for("graph").is_valid(&json!({"vertices": [], "edges": [{"src": 0, "tgt": 1}]})));
    assert!(!schema_for("config").is_valid(&json!({"nonsense": 1})));
    assert!(!schema_for("renorm_output").is_valid(&json!({"target": "other", "max_degree": 4, "graphs": []})));
    assert!(!schema_for("exact_scalar").is_valid(&json!([{"coeff": 0.5, "pi_half_exp": 0}])));
}
