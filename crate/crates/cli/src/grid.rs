//! Grid and range argument syntax shared by the subcommands: inclusive
//! `start:stop:step` arithmetic grids, comma lists, and `lo:hi` pairs.

use crate::CliError;

fn parse_num(tok: &str, what: &str) -> Result<f64, CliError> {
    let t = tok.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| CliError::Usage(format!("--{what}: cannot parse `{t}` as a number")))?;
    if !v.is_finite() {
        return Err(CliError::Usage(format!("--{what}: `{t}` is not finite")));
    }
    Ok(v)
}

/// Parse `start:stop:step` (inclusive endpoints, step > 0) or a comma
/// list (a single value counts as a one-element list).
pub fn parse_grid(arg: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = arg.split(':').collect();
    let vals = match parts.len() {
        1 => arg
            .split(',')
            .map(|t| parse_num(t, what))
            .collect::<Result<Vec<_>, _>>()?,
        3 => {
            let start = parse_num(parts[0], what)?;
            let stop = parse_num(parts[1], what)?;
            let step = parse_num(parts[2], what)?;
            if !(step > 0.0) {
                return Err(CliError::Usage(format!(
                    "--{what}: step must be positive, got {step}"
                )));
            }
            if stop < start {
                return Err(CliError::Usage(format!(
                    "--{what}: stop {stop} is below start {start}"
                )));
            }
            // A small forgiveness term keeps `0.1:0.9:0.1` at nine points
            // despite binary rounding of the quotient.
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + step * i as f64).collect()
        }
        _ => {
            return Err(CliError::Usage(format!(
                "--{what}: expected `start:stop:step` or a comma list, got `{arg}`"
            )))
        }
    };
    if vals.is_empty() {
        return Err(CliError::Usage(format!("--{what}: empty grid")));
    }
    Ok(vals)
}

/// Parse a `lo:hi` pair with `0 < lo < hi`.
pub fn parse_pair(arg: &str, what: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = arg.split(':').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "--{what}: expected `lo:hi`, got `{arg}`"
        )));
    }
    let lo = parse_num(parts[0], what)?;
    let hi = parse_num(parts[1], what)?;
    if !(lo > 0.0 && hi > lo) {
        return Err(CliError::Usage(format!(
            "--{what}: need 0 < lo < hi, got {lo}:{hi}"
        )));
    }
    Ok((lo, hi))
}

/// Ascending sort plus exact-duplicate removal; the output row order
/// contract sorts rows by `(q, alpha)`.
pub fn sorted_dedup(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite grid values"));
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colon_grid_is_inclusive() {
        let g = parse_grid("0.1:0.9:0.1", "alpha").unwrap();
        assert_eq!(g.len(), 9);
        assert!((g[0] - 0.1).abs() < 1e-15);
        assert!((g[8] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn comma_list_and_single_value() {
        assert_eq!(parse_grid("0.5,1", "q").unwrap(), vec![0.5, 1.0]);
        assert_eq!(parse_grid("1", "q").unwrap(), vec![1.0]);
    }

    #[test]
    fn bad_grids_are_usage_errors() {
        assert!(matches!(
            parse_grid("0.9:0.1:0.1", "alpha"),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            parse_grid("0.1:0.9:0", "alpha"),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(parse_grid("abc", "q"), Err(CliError::Usage(_))));
        assert!(matches!(parse_grid("1:2", "q"), Err(CliError::Usage(_))));
    }

    #[test]
    fn pair_requires_order() {
        assert_eq!(parse_pair("1e-3:1e3", "c3-range").unwrap(), (1e-3, 1e3));
        assert!(matches!(
            parse_pair("5:1", "c3-range"),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            parse_pair("0:1", "c3-range"),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn sort_and_dedup() {
        assert_eq!(
            sorted_dedup(vec![1.0, 0.5, 1.0, 0.3]),
            vec![0.3, 0.5, 1.0]
        );
    }
}
