//! Reference dimensionality table bundled with the binary.

use iforge_core::Species;

const REFERENCE_CSV: &str = include_str!("../data/table2_reference.csv");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReferenceCell {
    pub species: Species,
    pub d: usize,
    pub particles: usize,
    pub rank: usize,
    /// Limited by the path-counting bound rather than the dimension bound.
    pub red: bool,
}

pub fn reference_table() -> Vec<ReferenceCell> {
    parse(REFERENCE_CSV).expect("bundled reference table is well formed")
}

pub fn lookup(species: Species, d: usize, particles: usize) -> Option<ReferenceCell> {
    reference_table().into_iter().find(|c| c.species == species && c.d == d && c.particles == particles)
}

fn parse(text: &str) -> Result<Vec<ReferenceCell>, String> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or("empty reference table")?;
    if header != "species,d,N,rank,red" {
        return Err(format!("unexpected header `{header}`"));
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(format!("malformed row `{line}`"));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|e| format!("`{line}`: {e}"));
            Ok(ReferenceCell {
                species: f[0].parse().map_err(|e| format!("`{line}`: {e}"))?,
                d: num(f[1])?,
                particles: num(f[2])?,
                rank: num(f[3])?,
                red: num(f[4])? == 1,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_loads() {
        let t = reference_table();
        assert_eq!(t.len(), 40);
        assert_eq!(lookup(Species::Boson, 2, 8).unwrap().rank, 114);
        assert!(lookup(Species::Boson, 3, 2).unwrap().red);
        assert_eq!(lookup(Species::Fermion, 5, 5).unwrap().rank, 97);
        assert!(lookup(Species::Fermion, 2, 8).is_none());
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(parse("species,d,N,rank,red\nboson,2,2\n").is_err());
        assert!(parse("d,N\n").is_err());
    }
}
