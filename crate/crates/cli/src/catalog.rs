//! Bundled configurations, one per plot panel plus two utility runs.

pub const CONFIGS: &[(&str, &str)] = &[
    ("bound", include_str!("../configs/bound.toml")),
    ("fig1a", include_str!("../configs/fig1a.toml")),
    ("fig1b", include_str!("../configs/fig1b.toml")),
    ("fig1c", include_str!("../configs/fig1c.toml")),
    ("fig1d", include_str!("../configs/fig1d.toml")),
    ("fig2a", include_str!("../configs/fig2a.toml")),
    ("fig2b", include_str!("../configs/fig2b.toml")),
    ("fig2c", include_str!("../configs/fig2c.toml")),
    ("fig3a", include_str!("../configs/fig3a.toml")),
    ("fig3b", include_str!("../configs/fig3b.toml")),
    ("fig3c", include_str!("../configs/fig3c.toml")),
    ("fig3d", include_str!("../configs/fig3d.toml")),
    ("fig4", include_str!("../configs/fig4.toml")),
    ("fig5", include_str!("../configs/fig5.toml")),
    ("spacing", include_str!("../configs/spacing.toml")),
];

pub fn get(name: &str) -> Option<&'static str> {
    CONFIGS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
