//! Writes the composite synthetic fixture and its config.
//!
//! cargo run -p taskrisk-core --example make_fixture -- fixtures/synthetic [seed]

use std::path::PathBuf;

use taskrisk::synthetic::CompositeFixture;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "fixtures/synthetic".into()));
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20240);
    let config = CompositeFixture::generate(seed).write(&dir, seed)?;
    println!("{}", config.display());
    Ok(())
}
