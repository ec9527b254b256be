//! Built-in scenarios.

use crate::error::CliError;
use crate::scenario::Scenario;

const PRESETS: [(&str, &str); 9] = [
    ("fig1", include_str!("../../../scenarios/fig1.toml")),
    ("fig2", include_str!("../../../scenarios/fig2.toml")),
    ("fig3", include_str!("../../../scenarios/fig3.toml")),
    ("fig4", include_str!("../../../scenarios/fig4.toml")),
    ("fig5", include_str!("../../../scenarios/fig5.toml")),
    ("fig6", include_str!("../../../scenarios/fig6.toml")),
    ("fig7", include_str!("../../../scenarios/fig7.toml")),
    ("fig8", include_str!("../../../scenarios/fig8.toml")),
    ("custom", include_str!("../../../scenarios/custom.toml")),
];

pub fn list_presets() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

pub fn preset_source(name: &str) -> Result<&'static str, CliError> {
    PRESETS
        .iter()
        .find(|p| p.0 == name)
        .map(|p| p.1)
        .ok_or_else(|| CliError::UnknownPreset(name.to_string()))
}

pub fn preset(name: &str) -> Result<Scenario, CliError> {
    Scenario::from_toml(preset_source(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        assert_eq!(list_presets().len(), 9);
        for name in list_presets() {
            let s = preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name, name);
        }
        assert!(matches!(preset("fig9"), Err(CliError::UnknownPreset(_))));
    }
}
