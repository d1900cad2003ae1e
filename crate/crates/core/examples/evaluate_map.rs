//! Average precision, MAP and the radius precision/recall curve.
//!
//! ```bash
//! cargo run --example evaluate_map
//! ```

use mfdh::eval::{average_precision, mean_average_precision, pr_curve, RelevanceJudge};
use mfdh::{BinaryCode, HammingIndex, LabelMatrix};

fn main() -> mfdh::Result<()> {
    println!("AP [rel, irr, rel] = {:.4}", average_precision(&[true, false, true], 3)?);

    let code = |bits: [u8; 4]| BinaryCode::from_bits(&bits.map(|b| b == 1));
    let db = HammingIndex::from_codes(
        4,
        [
            ("a", code([0, 0, 0, 0])),
            ("b", code([0, 0, 0, 1])),
            ("c", code([1, 1, 1, 0])),
            ("d", code([1, 1, 1, 1])),
            ("e", code([0, 1, 0, 0])),
        ]
        .map(|(id, c)| (id.to_string(), c)),
    )?;
    let db_labels = LabelMatrix::from_classes(2, &[0, 0, 1, 1, 1])?;

    let queries = [code([0, 0, 0, 0]), code([1, 1, 1, 1])];
    let query_labels = LabelMatrix::from_classes(2, &[0, 1])?;
    let judge = RelevanceJudge::infer(&query_labels, &db_labels)?;

    for r in [1, 3, 5] {
        println!("MAP@{r} = {:.4}", mean_average_precision(&queries, &db, &judge, r)?);
    }
    print!("{}", pr_curve(&queries, &db, &judge)?.to_tsv());

    // multi-label relevance: any shared label counts
    let multi = LabelMatrix::from_label_sets(3, &[vec![0, 2], vec![1]])?;
    let judge = RelevanceJudge::infer(&multi, &LabelMatrix::from_label_sets(3, &[vec![2], vec![0, 1]])?)?;
    println!("multi-label: q0~d0 {}, q1~d0 {}", judge.is_relevant(0, 0), judge.is_relevant(1, 0));
    Ok(())
}
