use super::*;

const SPEC: &str = include_str!("../../../../assignments/io-scheduler/trace.yaml");

fn spec(size: u64, total: u64) -> TraceSpec {
    let mut s = TraceSpec::from_yaml(SPEC).unwrap();
    s.size = size;
    s.total = total;
    s
}

fn ev(kind: EventKind, value: i64, position: i64, line_no: usize) -> TraceEvent {
    TraceEvent {
        kind,
        pid: 1,
        value,
        position,
        line_no,
        raw: String::new(),
    }
}

fn p(v: i64, pos: i64, line: usize) -> TraceEvent {
    ev(EventKind::Production, v, pos, line)
}

fn c(v: i64, pos: i64, line: usize) -> TraceEvent {
    ev(EventKind::Consumption, v, pos, line)
}

fn messages(v: &TraceVerdict) -> Vec<&str> {
    v.errors.iter().map(|e| e.message.as_str()).collect()
}

#[test]
fn parses_template_lines_and_skips_others() {
    let out = "starting\n[PROD] pid=42 value=7 pos=0\ndebug: x=1\n[CONS] pid=43 value=7 pos=0\r\n";
    let events = parse_trace(out, &spec(10, 1)).unwrap();
    assert_eq!(events.len(), 2);
    assert_eq!(
        events[0],
        TraceEvent {
            kind: EventKind::Production,
            pid: 42,
            value: 7,
            position: 0,
            line_no: 2,
            raw: "[PROD] pid=42 value=7 pos=0".into(),
        }
    );
    assert_eq!(events[1].kind, EventKind::Consumption);
    assert_eq!(events[1].line_no, 4);
    assert!(parse_trace("", &spec(10, 1)).unwrap().is_empty());
}

#[test]
fn tampered_event_line_is_malformed() {
    let err = parse_trace("ok\n[PROD] pid=42 value=seven pos=0\n", &spec(10, 1)).unwrap_err();
    assert!(
        matches!(err, TraceError::MalformedEvent { line_no: 2, ref label, .. } if label == "production")
    );
    assert!(parse_trace("[PROD] pid=1 pos=0\n", &spec(10, 1)).is_err());
}

#[test]
fn listing_one_accepts_interleaved_run() {
    let events = [
        p(5, 0, 1),
        p(9, 1, 2),
        c(5, 0, 3),
        p(2, 2, 4),
        c(9, 1, 5),
        c(2, 2, 6),
    ];
    let v = evaluate_prod_cons(&events, &spec(10, 3));
    assert!(v.passed(), "{v:?}");
    assert!(check_trace(&events, &spec(10, 3)).passed());
    assert!(evaluate_prod_cons(&[], &spec(10, 0)).passed());
}

#[test]
fn listing_one_flags_wrong_location() {
    let v = evaluate_prod_cons(&[p(5, 3, 1), c(5, 0, 2)], &spec(10, 1));
    assert_eq!(v.status, Status::Fail);
    assert_eq!(v.errors.len(), 1);
    assert!(v.errors[0].message.starts_with(MSG_PRODUCTION_LOCATION));
    assert_eq!(v.errors[0].line_no, Some(1));

    let v = evaluate_prod_cons(&[p(5, 0, 1), c(5, 1, 2)], &spec(10, 1));
    assert!(v.errors[0].message.starts_with(MSG_CONSUMPTION_LOCATION));
}

#[test]
fn ring_wraps_at_size() {
    let events = [
        p(1, 0, 1),
        c(1, 0, 2),
        p(2, 1, 3),
        c(2, 1, 4),
        p(3, 0, 5),
        c(3, 0, 6),
    ];
    assert!(evaluate_prod_cons(&events, &spec(2, 3)).passed());
}

#[test]
fn missing_and_mismatched_values() {
    let v = evaluate_prod_cons(&[p(3, 0, 1)], &spec(10, 1));
    assert!(messages(&v).iter().any(|m| m.starts_with(MSG_MISSING)));
    assert!(messages(&v).contains(&MSG_VALUES));

    let v = evaluate_prod_cons(&[p(3, 0, 1), c(4, 0, 2)], &spec(10, 1));
    assert_eq!(messages(&v), [MSG_VALUES]);
}

#[test]
fn progress_counts() {
    let s = spec(10, 5);
    let full: Vec<_> = (0..5).flat_map(|i| [p(i, i, 0), c(i, i, 0)]).collect();
    assert!(check_progress(&full, &s).passed());
    let v = check_progress(&full[..9], &s);
    assert!(v.errors[0].message.starts_with(MSG_MISSING));
    assert!(check_progress(&[], &spec(10, 0)).passed());
}

#[test]
fn values_are_multisets() {
    let s = spec(10, 3);
    let a = [
        p(3, 0, 0),
        p(3, 1, 0),
        p(8, 2, 0),
        c(8, 0, 0),
        c(3, 1, 0),
        c(3, 2, 0),
    ];
    assert!(check_values(&a, &s).passed());
    let b = [p(3, 0, 0), p(3, 1, 0), c(3, 0, 0), c(4, 1, 0)];
    assert_eq!(messages(&check_values(&b, &s)), [MSG_VALUES]);
    let dup = [p(3, 0, 0), p(3, 1, 0), c(3, 0, 0), c(8, 1, 0)];
    assert!(!check_values(&dup, &s).passed());
    assert!(check_values(&[], &s).passed());
}

#[test]
fn order_matches_one_to_one() {
    let s = spec(10, 2);
    assert!(!check_order(&[c(5, 0, 1), p(5, 0, 2)], &s).passed());
    assert!(check_order(&[p(5, 0, 1), c(5, 0, 2), p(5, 1, 3), c(5, 1, 4)], &s).passed());
    let v = check_order(&[p(5, 0, 1), c(5, 0, 2), c(5, 1, 3)], &s);
    assert_eq!(v.errors.len(), 1);
    assert_eq!(v.errors[0].line_no, Some(3));
}

#[test]
fn merged_verdict_reports_each_problem_once() {
    let v = check_trace(&[p(3, 0, 1)], &spec(10, 1));
    let missing = messages(&v)
        .iter()
        .filter(|m| m.starts_with(MSG_MISSING))
        .count();
    assert_eq!(missing, 1);
    assert_eq!(messages(&v).iter().filter(|m| **m == MSG_VALUES).count(), 1);
}

#[test]
fn spec_validation() {
    assert!(TraceSpec::from_yaml("size: 0\ntotal: 1\nevents: {}\n").is_err());
    let no_pos = "size: 1\ntotal: 1\nevents:\n  production: \"P {pid} {value}\"\n";
    assert!(TraceSpec::from_yaml(no_pos).is_err());
    let bad_slot = "size: 1\ntotal: 1\nevents:\n  tick: \"T {when}\"\n";
    assert!(TraceSpec::from_yaml(bad_slot).is_err());
    let generic = "size: 1\ntotal: 0\nevents:\n  tick: \"T {pid}\"\ncounts:\n  tick: 2\n";
    let s = TraceSpec::from_yaml(generic).unwrap();
    assert!(!s.is_prod_cons());
    let events = parse_trace("T 1\nT 2\n", &s).unwrap();
    assert_eq!(events[1].kind, EventKind::Generic("tick".into()));
    assert!(check_trace(&events, &s).passed());
    assert!(!check_trace(&events[..1], &s).passed());
}
