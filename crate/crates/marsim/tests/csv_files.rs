use marsim::{read_csv, write_csv, Algorithm, ResultRow};
use marsim_core::Rate;

fn row(seed: u64, algorithm: Algorithm, k: Option<f64>) -> ResultRow {
    ResultRow {
        scenario_id: "s-T020".into(),
        seed,
        algorithm,
        k,
        t: 20,
        m: 2,
        users_total: 20,
        users_served: 13,
        rbs_used: 1234,
        bits_served: "98765.4321".parse().unwrap(),
        runtime_ms: 0.0,
    }
}

fn text(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn empty_rows_give_header_only() {
    assert_eq!(
        text(&[]),
        "scenario_id,seed,algorithm,K,T,M,users_total,users_served,rbs_used,bits_served,runtime_ms\n"
    );
}

#[test]
fn two_rows_three_lines() {
    let t = text(&[row(0, Algorithm::Mars, Some(4.0)), row(0, Algorithm::UpperBound, None)]);
    let lines: Vec<&str> = t.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1], "s-T020,0,mars,4,20,2,20,13,1234,98765.4321,0.000");
    assert_eq!(lines[2], "s-T020,0,upper_bound,,20,2,20,13,1234,98765.4321,0.000");
}

#[test]
fn round_trip() {
    let rows = vec![
        row(3, Algorithm::Mars, Some(0.0)),
        row(3, Algorithm::LowMcs, Some(8.0)),
        ResultRow {
            bits_served: Rate::from_bits(0),
            runtime_ms: 12.5,
            ..row(7, Algorithm::Exact, None)
        },
    ];
    let t = text(&rows);
    assert_eq!(read_csv(t.as_bytes()).unwrap(), rows);
}

#[test]
fn wrong_header_rejected() {
    assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
}
