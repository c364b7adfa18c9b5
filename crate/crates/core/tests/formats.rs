use proptest::prelude::*;
use rankscope::io::{read_labels, read_logits_csv, read_matrix_csv, write_logits_csv, write_matrix_csv, LogitTable};
use rankscope::linalg::Matrix;
use rankscope::Error;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1e3f64..1e3,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

fn matrix() -> impl Strategy<Value = Matrix> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        prop::collection::vec(finite(), r * c).prop_map(move |data| Matrix::new(r, c, data).unwrap())
    })
}

fn logit_table() -> impl Strategy<Value = LogitTable> {
    (1usize..5, 1usize..6, any::<bool>()).prop_flat_map(|(c, n, with_labels)| {
        (
            prop::collection::hash_set("[a-z][a-z0-9_]{0,6}".prop_filter("reserved", |s| s != "label"), c),
            prop::collection::vec(finite(), n * c),
            prop::collection::vec(0..c, n),
        )
            .prop_map(move |(ids, data, labels)| LogitTable {
                categories: ids.into_iter().collect(),
                logits: Matrix::new(n, c, data).unwrap(),
                labels: with_labels.then_some(labels),
            })
    })
}

proptest! {
    #[test]
    fn matrix_csv_round_trips_bitwise(m in matrix()) {
        let back = read_matrix_csv(&write_matrix_csv(&m)).unwrap();
        prop_assert_eq!(back.shape(), m.shape());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                prop_assert_eq!(back[(i, j)].to_bits(), m[(i, j)].to_bits());
            }
        }
    }

    #[test]
    fn logit_table_round_trips(table in logit_table()) {
        prop_assert_eq!(read_logits_csv(&write_logits_csv(&table)).unwrap(), table);
    }

    #[test]
    fn parsers_never_panic(text in ".{0,200}") {
        let _ = read_matrix_csv(&text);
        let _ = read_logits_csv(&text);
        let _ = read_labels(&text);
    }
}

fn parse_line(e: Error) -> usize {
    match e {
        Error::Parse { line, .. } => line,
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn matrix_errors_carry_line_numbers() {
    assert_eq!(parse_line(read_matrix_csv("1,2\n\n3,x\n").unwrap_err()), 3);
    assert_eq!(parse_line(read_matrix_csv("1,2\n3\n").unwrap_err()), 2);
    assert_eq!(parse_line(read_matrix_csv("1,inf\n").unwrap_err()), 1);
    assert_eq!(parse_line(read_matrix_csv("1,NaN\n").unwrap_err()), 1);
    assert!(read_matrix_csv("\n  \n").is_err());
    let m = read_matrix_csv("1, 2\r\n -3 ,4e-1\n").unwrap();
    assert_eq!(m, Matrix::from_rows(&[vec![1.0, 2.0], vec![-3.0, 0.4]]).unwrap());
}

#[test]
fn logit_table_parsing() {
    let table = read_logits_csv("cat,dog,label,bird\n1,2,dog,3\n-1,0.5,bird,0\n").unwrap();
    assert_eq!(table.categories, vec!["cat", "dog", "bird"]);
    assert_eq!(table.labels, Some(vec![1, 2]));
    assert_eq!(table.logits.row(1), &[-1.0, 0.5, 0.0]);
    assert_eq!(table.category_index("bird"), Some(2));

    assert_eq!(parse_line(read_logits_csv("a,b,label\n1,2,c\n").unwrap_err()), 2);
    assert_eq!(parse_line(read_logits_csv("a,a\n1,2\n").unwrap_err()), 1);
    assert_eq!(parse_line(read_logits_csv("a,,b\n1,2,3\n").unwrap_err()), 1);
    assert_eq!(parse_line(read_logits_csv("a,label,label\n1,a,a\n").unwrap_err()), 1);
    assert_eq!(parse_line(read_logits_csv("label\na\n").unwrap_err()), 1);
    assert!(read_logits_csv("a,b\n").is_err());
    assert!(read_logits_csv("a,b\n1\n").is_err());
}

#[test]
fn label_parsing() {
    assert_eq!(read_labels("3\n\n0\n 12 \n").unwrap(), vec![3, 0, 12]);
    assert_eq!(parse_line(read_labels("1\n-1\n").unwrap_err()), 2);
    assert_eq!(parse_line(read_labels("1\n2.5\n").unwrap_err()), 2);
}
