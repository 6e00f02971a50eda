//! Drives an experiment from a JSON configuration, as the binary does.

use sp_ground::cli::{parse_config, run};

const CONFIG: &str = r#"{
    "experiment": "check",
    "grid": {"R": 20, "N": 2000},
    "problem": {
        "family": "subcritical",
        "p": 3.5,
        "potential": {"kind": "gaussian_well", "v_infinity": 1, "depth": 0.5, "width": 1}
    }
}"#;

fn main() -> sp_ground::Result<()> {
    let config = parse_config(CONFIG)?;
    let out = std::env::temp_dir().join("sp-ground-example");
    let outcome = run(&config, &out)?;
    println!("{}", serde_json::to_string_pretty(&outcome.result["result"])?);
    println!("exit code {}, files in {}", outcome.exit_code, out.display());

    if let Err(e) = parse_config(&CONFIG.replace("\"depth\": 0.5", "\"depth\": 1.5")) {
        println!("rejected: {e}");
    }
    Ok(())
}
