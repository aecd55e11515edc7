//! Run the built-in corpus and a copy with one constraint broken.

use fermat_pdde::corpus::{builtin, run_entry};

fn main() {
    for entry in builtin() {
        let out = run_entry(&entry).expect("corpus entries parse");
        println!("{:14} {:?} {}", out.name, out.report.verdict, if out.passed() { "pass" } else { "FAIL" });
    }
    let mut broken = builtin().remove(0);
    broken.spec = broken.spec.replace("\"2*pi\", \"0\"", "\"1/2*pi\", \"0\"");
    let out = run_entry(&broken).expect("still parses");
    println!("broken shift   {:?} {}", out.report.verdict, if out.passed() { "pass" } else { "FAIL" });
}
