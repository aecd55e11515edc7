//! Serialize a family spec to its TOML document and read it back.

use fermat_pdde::gen::random_sine_spec;
use fermat_pdde::ConfigDoc;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let spec = random_sine_spec(&mut ChaCha8Rng::seed_from_u64(7));
    let text = ConfigDoc::from_sine(&spec).to_toml();
    println!("{text}");
    let back = ConfigDoc::from_toml(&text).unwrap().sine_spec().unwrap();
    println!("round trip equal: {}", back == spec);
}
