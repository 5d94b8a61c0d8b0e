//! Build a small labelled dataset (WAVs, manifest, resolved config) and
//! summarise its splits.
//!
//! ```text
//! cargo run --release --example build_dataset -- [out_dir]
//! ```

use std::collections::BTreeMap;

use snrge::synth::{build_dataset, DatasetConfig, DatasetManifest};

fn main() -> snrge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("snrge_dataset"));
    let cfg = DatasetConfig {
        grid: vec![-10.0, 0.0, 10.0],
        clips_per_level: 40,
        seed: 21,
        ..Default::default()
    };
    let manifest = build_dataset(&cfg, &out)?;
    println!("{} clips in {}", manifest.entries.len(), out.display());
    println!("digest {}", manifest.digest()?);

    let mut counts: BTreeMap<String, [usize; 3]> = BTreeMap::new();
    for e in &manifest.entries {
        let slot = counts.entry(e.label.tag()).or_default();
        slot[e.split as usize] += 1;
    }
    println!("{:>12} {:>6} {:>6} {:>6}", "class", "train", "val", "test");
    for (tag, [tr, va, te]) in counts {
        println!("{tag:>12} {tr:>6} {va:>6} {te:>6}");
    }

    // reloading gives back the same manifest
    let again = DatasetManifest::load(&out)?;
    assert_eq!(again.digest()?, manifest.digest()?);
    Ok(())
}
