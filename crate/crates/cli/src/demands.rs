//! Demand vectors: parsed from the command line or drawn at random.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::exit::{CliError, CliResult, DEMAND};

/// Parses a comma-separated list of 1-based file indices.
pub fn parse(text: &str, users: usize, n_files: usize) -> CliResult<Vec<usize>> {
    let mut out = Vec::with_capacity(users);
    for part in text.split(',').map(str::trim) {
        let v: usize =
            part.parse().map_err(|_| CliError::new(DEMAND, format!("--demands: not a file index: {part:?}")))?;
        if v == 0 || v > n_files {
            return Err(CliError::new(DEMAND, format!("--demands: file {v} outside [1, {n_files}]")));
        }
        out.push(v - 1);
    }
    if out.len() != users {
        return Err(CliError::new(DEMAND, format!("--demands: expected {users} entries, got {}", out.len())));
    }
    Ok(out)
}

/// Uniform draw over demand vectors, restricted to surjective ones when
/// `surjective` is set (rejection sampling).
pub fn random(rng: &mut ChaCha8Rng, users: usize, n_files: usize, surjective: bool) -> CliResult<Vec<usize>> {
    if surjective && n_files > users {
        return Err(CliError::new(DEMAND, format!("{users} users cannot demand all {n_files} files")));
    }
    loop {
        let d: Vec<usize> = (0..users).map(|_| rng.gen_range(0..n_files)).collect();
        if !surjective || (0..n_files).all(|f| d.contains(&f)) {
            return Ok(d);
        }
    }
}

pub fn render(d: &[usize]) -> String {
    d.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn parse_and_render() {
        assert_eq!(parse("1,2,1, 3,2,2", 6, 3).unwrap(), vec![0, 1, 0, 2, 1, 1]);
        assert_eq!(parse("1,2", 3, 3).unwrap_err().code, DEMAND);
        assert_eq!(parse("1,4,2", 3, 3).unwrap_err().code, DEMAND);
        assert_eq!(parse("1,x,2", 3, 3).unwrap_err().code, DEMAND);
        assert_eq!(render(&[0, 2]), "1,3");
    }

    #[test]
    fn random_is_seeded_and_surjective() {
        let draw = |seed| random(&mut ChaCha8Rng::seed_from_u64(seed), 6, 3, true).unwrap();
        assert_eq!(draw(7), draw(7));
        for seed in 0..20 {
            let d = draw(seed);
            assert!((0..3).all(|f| d.contains(&f)));
        }
        assert!(random(&mut ChaCha8Rng::seed_from_u64(0), 2, 3, true).is_err());
    }
}
