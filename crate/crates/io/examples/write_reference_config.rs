//! Regenerates `configs/reference.json`.

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/reference.json".into());
    mqh_io::write_run_config(&mqh_io::reference_config(), std::path::Path::new(&path))?;
    Ok(())
}
