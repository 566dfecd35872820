use nalgebra::{DMatrix, SymmetricEigen};

use crate::attention::EmbeddingTable;
use crate::error::{Error, Result};

/// Total variance below this counts as all embeddings coinciding.
pub const DEGENERATE_VARIANCE: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRow {
    pub token: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub rows: Vec<ProjectionRow>,
    /// Variance captured by the first two components.
    pub explained: [f64; 2],
    /// Trace of the covariance.
    pub total_variance: f64,
    /// Set when the embeddings have no variance and every row is `(0, 0)`.
    pub degenerate: bool,
}

/// Principal components of row vectors, largest first, with the largest-magnitude
/// loading of each component made positive. Returns `(eigenvalues, components)`.
pub fn principal_components(data: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let Some(first) = data.first() else {
        return Err(Error::arg("PCA needs at least one row"));
    };
    let (n, d) = (data.len(), first.len());
    if data.iter().any(|r| r.len() != d) {
        return Err(Error::arg("PCA rows must have equal length"));
    }
    let mean: Vec<f64> = (0..d).map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let centred = DMatrix::from_fn(n, d, |i, j| data[i][j] - mean[j]);
    let cov = centred.transpose() * &centred / n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let components = order
        .iter()
        .map(|&k| {
            let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let lead = v.iter().enumerate().fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
            if v[lead] < 0.0 {
                v.iter().map(|x| -x).collect()
            } else {
                v
            }
        })
        .collect();
    Ok((values, components))
}

/// Projects every vocabulary spinor's even coefficients onto the top two components.
pub fn project_embeddings(table: &EmbeddingTable) -> Result<Projection> {
    if table.len() < 2 {
        return Err(Error::arg("projection needs at least two vocabulary entries"));
    }
    let data: Vec<Vec<f64>> = table.spinors()?.iter().map(|s| s.even_coeffs()).collect();
    let d = data[0].len();
    let mean: Vec<f64> = (0..d).map(|j| data.iter().map(|r| r[j]).sum::<f64>() / data.len() as f64).collect();
    let total: f64 = data.iter().map(|r| r.iter().zip(&mean).map(|(x, m)| (x - m).powi(2)).sum::<f64>()).sum::<f64>()
        / data.len() as f64;
    if total <= DEGENERATE_VARIANCE {
        let rows = table.vocab().iter().map(|t| ProjectionRow { token: t.clone(), x: 0.0, y: 0.0 }).collect();
        return Ok(Projection { rows, explained: [0.0, 0.0], total_variance: total, degenerate: true });
    }
    let (values, comps) = principal_components(&data)?;
    let coord = |row: &[f64], k: usize| -> f64 {
        comps.get(k).map_or(0.0, |c| row.iter().zip(&mean).zip(c).map(|((x, m), v)| (x - m) * v).sum())
    };
    let rows = table
        .vocab()
        .iter()
        .zip(&data)
        .map(|(t, r)| ProjectionRow { token: t.clone(), x: coord(r, 0), y: coord(r, 1) })
        .collect();
    let explained = [values[0], values.get(1).copied().unwrap_or(0.0)];
    Ok(Projection { rows, explained, total_variance: total, degenerate: false })
}

fn fixed(x: f64) -> String {
    let s = format!("{x:.9}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// `token,x,y` CSV with nine decimals.
pub fn projection_csv(rows: &[ProjectionRow]) -> String {
    let mut out = String::from("token,x,y\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.token, fixed(r.x), fixed(r.y)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Signature;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(gens: Vec<Vec<f64>>) -> EmbeddingTable {
        let vocab = (0..gens.len()).map(|i| format!("w{i}")).collect();
        EmbeddingTable::new(Signature::new(3, 0).unwrap(), vocab, gens).unwrap()
    }

    #[test]
    fn identical_embeddings_project_to_origin() {
        let p = project_embeddings(&table(vec![vec![0.2, 0.1, 0.0]; 3])).unwrap();
        assert!(p.degenerate);
        assert!(p.rows.iter().all(|r| r.x == 0.0 && r.y == 0.0));
    }

    #[test]
    fn two_points_are_symmetric_on_the_x_axis() {
        let p = project_embeddings(&table(vec![vec![0.0, 0.0, 0.0], vec![0.9, -0.4, 0.3]])).unwrap();
        let (a, b) = (&p.rows[0], &p.rows[1]);
        assert!((a.x + b.x).abs() < 1e-12 && a.x.abs() > 0.1);
        assert!(a.y.abs() < 1e-12 && b.y.abs() < 1e-12);
    }

    /// Power iteration with deflation as an independent eigen-solver.
    fn power_iteration(cov: &[Vec<f64>], k: usize) -> Vec<f64> {
        let d = cov.len();
        let mut m = cov.to_vec();
        let mut out = Vec::new();
        for _ in 0..k {
            let mut v = vec![1.0; d];
            let mut lambda = 0.0;
            for _ in 0..5000 {
                let w: Vec<f64> = (0..d).map(|i| (0..d).map(|j| m[i][j] * v[j]).sum()).collect();
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    break;
                }
                lambda = norm;
                v = w.iter().map(|x| x / norm).collect();
            }
            out.push(lambda);
            for i in 0..d {
                for j in 0..d {
                    m[i][j] -= lambda * v[i] * v[j];
                }
            }
        }
        out
    }

    #[test]
    fn matches_power_iteration_and_bounds_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let gens: Vec<Vec<f64>> = (0..9).map(|_| (0..3).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
        let t = table(gens);
        let p = project_embeddings(&t).unwrap();
        let data: Vec<Vec<f64>> = t.spinors().unwrap().iter().map(|s| s.even_coeffs()).collect();
        let n = data.len() as f64;
        let mean: Vec<f64> = (0..4).map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let cov: Vec<Vec<f64>> = (0..4)
            .map(|a| {
                (0..4).map(|b| data.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / n).collect()
            })
            .collect();
        let oracle = power_iteration(&cov, 2);
        assert!((p.explained[0] - oracle[0]).abs() < 1e-8);
        assert!((p.explained[1] - oracle[1]).abs() < 1e-8);
        assert!(p.explained[0] + p.explained[1] <= p.total_variance + 1e-12);
        let var_x = p.rows.iter().map(|r| r.x * r.x).sum::<f64>() / n;
        assert!((var_x - p.explained[0]).abs() < 1e-10);
    }

    #[test]
    fn csv_has_header_and_no_negative_zero() {
        let rows = vec![ProjectionRow { token: "a".into(), x: -1e-17, y: 0.5 }];
        assert_eq!(projection_csv(&rows), "token,x,y\na,0.000000000,0.500000000\n");
    }

    #[test]
    fn needs_two_tokens() {
        assert!(project_embeddings(&table(vec![vec![0.0; 3]])).is_err());
    }
}
