//! Regenerates the bundled fixture: `cargo run -p volsent-cli --example make_fixture [DIR]`.

use std::path::PathBuf;

use volsent_cli::fixture::{generate, FixtureSpec};

fn main() -> std::io::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir)?;
    let f = generate(&FixtureSpec::default());
    std::fs::write(dir.join("prices.csv"), f.prices_csv)?;
    std::fs::write(dir.join("headlines.csv"), f.headlines_csv)?;
    println!("wrote {}", dir.display());
    Ok(())
}
