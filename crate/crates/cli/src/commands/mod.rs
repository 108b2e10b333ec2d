pub mod aggregate;
pub mod agree;
pub mod analyze;
pub mod annotate;
pub mod eval;
pub mod ingest;
pub mod report;
pub mod segment;

use whow_core::schema::Dimension;

use crate::config::ConfigError;

/// Dimension list in table order unless given.
pub fn parse_dims(list: Option<&str>) -> Result<Vec<Dimension>, ConfigError> {
    let Some(list) = list else {
        return Ok(Dimension::ALL.to_vec());
    };
    let mut dims = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let d = Dimension::parse(part)
            .ok_or_else(|| ConfigError(format!("unknown dimension `{part}`")))?;
        if !dims.contains(&d) {
            dims.push(d);
        }
    }
    if dims.is_empty() {
        return Err(ConfigError("empty dimension list".into()));
    }
    Ok(dims)
}

pub fn dim_names(dims: &[Dimension]) -> Vec<String> {
    dims.iter().map(|d| d.code().to_string()).collect()
}
