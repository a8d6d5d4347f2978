//! Per-class sensitivity and specificity from a confusion matrix.

use ecg_beatnet::metrics::{ConfusionMatrix, EvalReport};
use ecg_beatnet::BeatClass;

fn main() {
    // Rows are true classes, columns predictions, in N, L, R, A, V order.
    let cm = ConfusionMatrix::from_counts([
        [9012, 12, 8, 41, 27],
        [15, 806, 0, 1, 4],
        [9, 0, 720, 2, 1],
        [58, 1, 3, 180, 2],
        [31, 6, 1, 3, 673],
    ]);
    let v = BeatClass::ALL[4];
    let (tp, fn_, fp, tn) = cm.one_vs_rest(v);
    println!("{v} one-vs-rest: tp {tp}, fn {fn_}, fp {fp}, tn {tn}");

    let report = EvalReport::from_matrix(&cm).unwrap();
    print!("{}", report.to_text());
    println!("{}", report.to_json());
    assert_eq!(EvalReport::from_json(&report.to_json()).unwrap(), report);
}
