//! `t`-grid specifications: `log:lo:hi:count`, `lin:lo:hi:count`, or a comma list.

use nodal_core::limit_model::log_grid;

pub fn parse_t_grid(spec: &str) -> Result<Vec<f64>, String> {
    let bad = || format!("invalid t-grid `{spec}`; expected log:lo:hi:count, lin:lo:hi:count or a comma list");
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [kind @ ("log" | "lin"), lo, hi, count] => {
            let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
            let count: usize = count.trim().parse().map_err(|_| bad())?;
            if count == 0 || !(lo <= hi) {
                return Err(bad());
            }
            if *kind == "log" {
                if !(lo > 0.0) {
                    return Err(format!("log grid needs lo > 0 in `{spec}`"));
                }
                log_grid(lo, hi, count)
            } else if count == 1 {
                vec![lo]
            } else {
                (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
            }
        }
        [list] => list.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?,
        _ => return Err(bad()),
    };
    if let Some(t) = grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(format!("t-grid values must be positive and finite, got {t}"));
    }
    Ok(grid)
}
