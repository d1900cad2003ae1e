//! Packed binary codes and Hamming-space search.
//!
//! ```bash
//! cargo run --example hamming_search
//! ```

use mfdh::index::hamming_distance;
use mfdh::{BinaryCode, HammingIndex};

fn main() -> mfdh::Result<()> {
    let rows = [
        ("cat", [1.0, 1.0, -1.0, -1.0, 1.0, -1.0]),
        ("lion", [1.0, 1.0, -1.0, 1.0, 1.0, -1.0]),
        ("car", [-1.0, -1.0, 1.0, 1.0, -1.0, 1.0]),
        ("truck", [-1.0, -1.0, 1.0, 1.0, 1.0, 1.0]),
        ("tiger", [1.0, 1.0, 1.0, -1.0, 1.0, -1.0]),
    ];
    let mut index = HammingIndex::new(6);
    for (id, signs) in rows {
        index.push(id, BinaryCode::from_signs(signs))?;
    }

    let query = BinaryCode::from_signs([1.0, 1.0, -1.0, -1.0, 1.0, 1.0]);
    println!("query {}", query.to_hex());
    for (id, code) in index.iter() {
        println!("  {id:6} {}  d={}", code.to_hex(), hamming_distance(&query, code)?);
    }
    println!("top 3: {:?}", index.search_ranked(&query, 3)?);
    println!("within radius 1: {:?}", index.search_radius(&query, 1)?);

    // codes longer than one word pack little-endian into u64s
    let long = BinaryCode::from_bits(&(0..100).map(|i| i % 3 == 0).collect::<Vec<_>>());
    println!("100-bit code: {} words, hex {}", long.words().len(), long.to_hex());
    Ok(())
}
