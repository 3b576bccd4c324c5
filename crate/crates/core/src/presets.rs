//! Built-in presentations.

/// `(name, presentation text, description)`.
pub const PRESETS: &[(&str, &str, &str)] = &[
    ("z", "gens: a\n", "infinite cyclic group; boundary is two points"),
    ("f2", "gens: a b\n", "free group of rank 2; Cantor set boundary"),
    ("f3", "gens: a b c\n", "free group of rank 3; Cantor set boundary"),
    ("surface2", "gens: a b c d\nrel: [a,b][c,d]\noracle: dehn\n", "genus 2 surface group; circle boundary"),
    (
        "surface3",
        "gens: a b c d e f\nrel: [a,b][c,d][e,f]\noracle: dehn\n",
        "genus 3 surface group; circle boundary",
    ),
    (
        "smallcancel",
        "gens: a b c\nrel: a b c a b^-1 c a^-1 b c^-1\noracle: dehn\n",
        "one-relator C'(1/6) group with a relator of length 9",
    ),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| p.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GroupPresentation;

    #[test]
    fn every_preset_parses() {
        for (name, text, _) in PRESETS {
            GroupPresentation::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(preset("nope").is_none());
    }
}
