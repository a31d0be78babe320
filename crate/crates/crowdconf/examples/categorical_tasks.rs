//! Non-binary tasks reduce to binary ones: encode each category as a bit
//! string and ask one Yes/No question per bit. Four colors need two
//! questions; estimates then run per bit.

use crowdconf::extensions::{categorical_reduce, CategoricalMatrix, CategoricalScheme};
use crowdconf::{estimate_three, Diff3Options};

fn main() -> crowdconf::Result<()> {
    let colors = ["red", "blue", "green", "yellow"];
    // three workers label 12 photos; worker 3 is sloppy
    let cells: Vec<String> = [
        ["red", "red", "red"],
        ["blue", "blue", "green"],
        ["green", "green", "green"],
        ["yellow", "yellow", "blue"],
        ["red", "red", "yellow"],
        ["blue", "blue", "blue"],
        ["green", "green", "red"],
        ["yellow", "yellow", "yellow"],
        ["red", "red", "red"],
        ["blue", "blue", "blue"],
        ["green", "green", "green"],
        ["yellow", "yellow", "red"],
    ]
    .iter()
    .flatten()
    .map(|s| s.to_string())
    .collect();
    let matrix = CategoricalMatrix::new(
        (1..=12).map(|i| format!("photo{i}")).collect(),
        vec!["w1".into(), "w2".into(), "w3".into()],
        cells,
    )?;

    let scheme = CategoricalScheme::new(colors.iter().map(|s| s.to_string()).collect())?;
    println!(
        "{} categories -> {} binary questions (code space padded to {})",
        scheme.categories().len(),
        scheme.bit_count(),
        scheme.padded_k()
    );
    for (code, cat) in scheme.categories().iter().enumerate() {
        println!("  {cat} = {code:02b}");
    }

    let bits = categorical_reduce(&matrix, &scheme)?;
    for (b, binary) in bits.iter().enumerate() {
        let triple = estimate_three(binary, &Diff3Options::default())?;
        let rates: Vec<String> =
            triple.estimates.iter().map(|e| format!("{:.2}", e.p_hat_clamped)).collect();
        println!("bit {b} (\"is bit {b} of the code 1?\"): per-worker p_hat {rates:?}");
    }
    Ok(())
}
