use std::path::Path;

use super::*;
use crate::frontend::parse_source;
use crate::rules::{load_rule_pack, parse_pattern};

fn ast(src: &str) -> AstNode {
    parse_source(src, Path::new("t.c")).unwrap()
}

fn matches(pattern: &str, src: &str) -> Vec<Match> {
    match_pattern(&parse_pattern(pattern).unwrap(), &ast(src))
}

const REFERENCE: &str = include_str!("../../../../assignments/io-scheduler/reference/prodcons.c");
const STRICT: &str = include_str!("../../../../assignments/io-scheduler/rules-strict.yaml");

fn strict_pack() -> RulePack {
    load_rule_pack(STRICT, Path::new("rules-strict.yaml")).unwrap()
}

#[test]
fn semget_binds_count() {
    let ms = matches(
        "$ID = semget($KEY, $NUM_SEM, $FLAGS);",
        "void f(void) { int k; sem_id = semget(IPC_PRIVATE, 4, IPC_CREAT | 0664); }",
    );
    assert_eq!(ms.len(), 1);
    assert_eq!(ms[0].binding.get("$NUM_SEM").unwrap().text, "4");
    assert_eq!(ms[0].binding.get("$ID").unwrap().text, "sem_id");
}

#[test]
fn declaration_matches_assignment_pattern() {
    let ms = matches(
        "$ID = semget($KEY, $N, $F);",
        "void f(void) { int id = semget(1, 2, 3); }",
    );
    assert_eq!(ms.len(), 1);
}

#[test]
fn repeated_metavariable_unifies() {
    assert_eq!(matches("$X = $X;", "void f(void) { a = a; }").len(), 1);
    assert!(matches("$X = $X;", "void f(void) { a = b; }").is_empty());
}

#[test]
fn ellipsis_in_arguments_and_blocks() {
    assert_eq!(
        matches("f(...);", "void g(void) { f(); f(1, 2); }").len(),
        2
    );
    assert_eq!(
        matches("f(..., 2);", "void g(void) { f(1, 2); f(2, 1); }").len(),
        1
    );
    let ms = matches(
        "a();\n...\nb();",
        "void g(void) { a(); x(); y(); b(); z(); }",
    );
    assert_eq!(ms.len(), 1);
    assert_eq!(ms[0].span.start_line, 1);
}

#[test]
fn ellipsis_stays_in_its_block() {
    let src = "void g(void) { a(); if (c) { b(); } }";
    assert!(matches("a();\n...\nb();", src).is_empty());
}

#[test]
fn integer_literals_compare_by_value() {
    assert_eq!(matches("f(16);", "void g(void) { f(0x10); }").len(), 1);
    assert!(matches("f(16);", "void g(void) { f(17); }").is_empty());
}

#[test]
fn function_pattern_skips_storage_class() {
    let src = "static void insert_request(int v) { a(); b(); }";
    assert_eq!(
        matches("void insert_request(...) { ... b(); }", src).len(),
        1
    );
    assert!(matches("int insert_request(...) { ... }", src).is_empty());
}

#[test]
fn producer_pattern_against_reference() {
    let pattern = "void insert_request(...) {\n  ...\n  Wait_Sem($SEMID, $S1);\n  ...\n  Wait_Sem($SEMID, $S2);\n  ...\n}";
    let ms = matches(pattern, REFERENCE);
    assert_eq!(ms.len(), 1, "{ms:?}");
    assert_eq!(ms[0].binding.get("$S1").unwrap().text, "SPACE_AVAILABLE");
    assert_eq!(ms[0].binding.get("$S2").unwrap().text, "MUTEX_P");
}

// free() must appear, and only with a named pointer.
const REQUIRED_FREE: &str = "rules:\n  - id: r\n    message: m\n    require_match: true\n    patterns:\n      - pattern: free($P);\n      - metavariable-pattern:\n          metavariable: $P\n          patterns:\n            - pattern: \"NULL\"\n";

fn rule(doc: &str) -> Rule {
    load_rule_pack(doc, Path::new("r.yaml"))
        .unwrap()
        .rules
        .remove(0)
}

const SEMGET_RULE: &str = r#"
rules:
  - id: semaphore-allocation
    message: wrong number of semaphores
    patterns:
      - pattern: $ID = semget($KEY, $NUM_SEM, $FLAGS);
      - metavariable-pattern:
          metavariable: $NUM_SEM
          patterns:
            - pattern-not: "4"
"#;

const SETVAL_RULE: &str = r#"
rules:
  - id: init
    message: bad initial value
    patterns:
      - pattern: semctl($SEMID, $NUM, SETVAL, $VAL);
      - metavariable-pattern:
          metavariable: $VAL
          patterns:
            - pattern-not: "10"
            - pattern-not: "0"
            - pattern-not: "1"
"#;

#[test]
fn metavariable_pattern_lists_allowed_values() {
    let r = rule(SEMGET_RULE);
    let bad = ast("void f(void) {\n  id = semget(K, 2, F);\n}");
    let fs = evaluate_rule(&r, &bad);
    assert_eq!(fs.len(), 1);
    assert_eq!(fs[0].span.start_line, 2);
    assert_eq!(fs[0].bindings.get("$NUM_SEM").unwrap().text, "2");
    assert!(evaluate_rule(&r, &ast("void f(void) { id = semget(K, 4, F); }")).is_empty());

    let r = rule(SETVAL_RULE);
    assert_eq!(
        evaluate_rule(&r, &ast("void f(void) { semctl(s, 0, SETVAL, 5); }")).len(),
        1
    );
    let ok = "void f(void) { semctl(s, 0, SETVAL, 10); semctl(s, 1, SETVAL, 0); semctl(s, 2, SETVAL, 1); }";
    assert!(evaluate_rule(&r, &ast(ok)).is_empty());
}

#[test]
fn pattern_not_suppresses_covered_matches() {
    let r = rule(
        "rules:\n  - id: r\n    message: m\n    patterns:\n      - pattern: f($X);\n      - pattern-not: f(0);\n",
    );
    let fs = evaluate_rule(&r, &ast("void g(void) { f(0); f(1); }"));
    assert_eq!(fs.len(), 1);
    assert_eq!(fs[0].bindings.get("$X").unwrap().text, "1");
}

#[test]
fn require_match_reports_omission() {
    let r = rule(REQUIRED_FREE);
    let fs = evaluate_rule(&r, &ast("void g(void) { malloc(1); }"));
    assert_eq!(fs.len(), 1);
    assert_eq!(fs[0].span.start_line, 1);
    assert!(evaluate_rule(&r, &ast("void g(void) { free(p); }")).is_empty());
    assert_eq!(
        evaluate_rule(&r, &ast("void g(void) { free(NULL); }")).len(),
        1
    );
}

fn files(src: &str) -> Vec<SourceFile> {
    vec![SourceFile {
        path: "prodcons.c".into(),
        ast: parse_source(src, Path::new("prodcons.c")).unwrap(),
    }]
}

#[test]
fn strict_pack_accepts_reference() {
    let fs = run_rules(&strict_pack(), &files(REFERENCE));
    assert!(fs.is_empty(), "{fs:#?}");
}

#[test]
fn strict_pack_flags_mutants_in_line_order() {
    let mutant = REFERENCE
        .replace("semget(IPC_PRIVATE, 4,", "semget(IPC_PRIVATE, 3,")
        .replace(
            "SPACE_AVAILABLE, SETVAL, 10)",
            "SPACE_AVAILABLE, SETVAL, 5)",
        );
    assert_ne!(mutant, REFERENCE);
    let fs = run_rules(&strict_pack(), &files(&mutant));
    let ids: Vec<&str> = fs.iter().map(|f| f.rule_id.as_str()).collect();
    assert_eq!(
        ids,
        ["semaphore-allocation", "space-available-initialization"]
    );
    assert!(fs[0].span.start_line < fs[1].span.start_line);
    assert!(fs[1].bindings.get("$INIT").is_some_and(|n| n.text == "5"));
}

#[test]
fn empty_pack_yields_nothing() {
    let pack = load_rule_pack("rules: []\n", Path::new("r.yaml")).unwrap();
    assert!(run_rules(&pack, &files(REFERENCE)).is_empty());
}

#[test]
fn require_match_is_judged_across_files() {
    let pack = load_rule_pack(REQUIRED_FREE, Path::new("r.yaml")).unwrap();
    let mk = |name: &str, src: &str| SourceFile {
        path: name.into(),
        ast: parse_source(src, Path::new(name)).unwrap(),
    };
    let with = vec![
        mk("b.c", "void g(void) { free(p); }"),
        mk("a.c", "void h(void) {}"),
    ];
    assert!(run_rules(&pack, &with).is_empty());
    let without = vec![
        mk("b.c", "void g(void) {}"),
        mk("a.h", "int x;"),
        mk("a.c", "void h(void) {}"),
    ];
    let fs = run_rules(&pack, &without);
    assert_eq!(fs.len(), 1);
    assert_eq!(fs[0].file(), Path::new("a.c"));
}

mod props {
    use proptest::prelude::*;

    use super::*;

    const BENIGN: &[&str] = &["x = 1;", "y++;", "log(2);", "z = y + 3;", "if (q) { w(); }"];

    proptest! {
        #[test]
        fn ellipsis_absorbs_benign_statements(picks in proptest::collection::vec(0..BENIGN.len(), 0..5)) {
            let filler: String = picks.iter().map(|&i| BENIGN[i]).collect::<Vec<_>>().join(" ");
            let src = format!("void g(void) {{ a(); {filler} b(); }}");
            prop_assert_eq!(matches("a();\n...\nb();", &src).len(), 1);
        }

        #[test]
        fn matches_lie_inside_scope(n in 1usize..6, target in 0usize..6) {
            let body: String = (0..n).map(|i| format!("f({i});")).collect();
            let src = format!("void g(void) {{ {body} }}");
            let tree = ast(&src);
            let ms = match_pattern(&parse_pattern(&format!("f({target});")).unwrap(), &tree);
            prop_assert_eq!(ms.len(), usize::from(target < n));
            for m in &ms {
                prop_assert!(tree.span.contains(&m.span));
            }
        }

        #[test]
        fn rule_order_does_not_change_findings(a in 0u32..12, b in 0u32..12, swap: bool) {
            let src = format!("void f(void) {{ id = semget(K, {a}, F); semctl(s, 0, SETVAL, {b}); }}");
            let mut pack = load_rule_pack(&format!("{SEMGET_RULE}{}", &SETVAL_RULE["\nrules:\n".len()..]), Path::new("r.yaml")).unwrap();
            let before = run_rules(&pack, &files(&src));
            if swap {
                pack.rules.reverse();
            }
            prop_assert_eq!(before, run_rules(&pack, &files(&src)));
        }

        #[test]
        fn require_match_is_monotone(extra in 0usize..4) {
            let pack = load_rule_pack(
                REQUIRED_FREE,
                Path::new("r.yaml"),
            ).unwrap();
            // Adding code that contains a match can only remove the omission.
            let calls: String = (0..extra).map(|i| format!("free(p{i});")).collect();
            let src = format!("void g(void) {{ {calls} }}");
            prop_assert_eq!(run_rules(&pack, &files(&src)).len(), usize::from(extra == 0));
        }
    }
}
