use std::time::Instant;
use krick::model::{build_model, ModelParams};
use krick::simulate::{stream_rng, Domain};
use rand::RngCore;
fn main() {
    let model = build_model(ModelParams::new(1.5)).unwrap();
    let mut rng = stream_rng(1, Domain::Misc, 0);
    let n = 100_000_000u64;
    let t = Instant::now();
    let mut acc = 0u64;
    for _ in 0..n { acc = acc.wrapping_add(rng.next_u64()); }
    println!("rng {:.2} ns {}", t.elapsed().as_secs_f64()*1e9/n as f64, acc & 1);
    let t = Instant::now();
    let mut acc = 0u64;
    for _ in 0..n { acc = acc.wrapping_add(model.law.sample(&mut rng).n); }
    println!("sample {:.2} ns {}", t.elapsed().as_secs_f64()*1e9/n as f64, acc & 1);
}
