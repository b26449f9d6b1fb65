//! Writes a benchmark dataset and truth file, reads them back and checks the
//! round trip, as the `generate-ad` command does.

use fracpinn::app::synthesize_ad;
use fracpinn::io::{read_ad_dataset, write_ad_dataset, write_json, RunConfig};

fn main() -> fracpinn::Result<()> {
    // keys may also come from FRACPINN_* environment variables
    let cfg = RunConfig::from_toml_with_env("seed = 3\n[generate_ad]\nn = 11\nsteps = 4\nnoise = 0.1\n", std::env::vars())?;
    let (ds, truth) = synthesize_ad(&cfg)?;
    let dir = std::env::temp_dir().join("fracpinn-dataset-example");
    let path = dir.join("dataset.csv");
    write_ad_dataset(&path, &ds)?;
    write_json(&dir.join("truth.json"), &truth)?;
    let back = read_ad_dataset(&path)?;
    println!("wrote {} rows to {}", ds.len(), path.display());
    println!("round trip exact: {}", back == ds);
    println!("sigma_c = {:.6}, dt = {:.4e}", back.sigma_c(), back.dt());
    println!("{}", cfg.to_toml()?);
    Ok(())
}
