use nalgebra::DMatrix;

/// Singular values sorted in decreasing order, plus the full set of right
/// singular vectors as columns in the same order. Wide matrices are padded
/// with zero rows so that every right singular vector is available.
pub(crate) fn svd_full(rows: &[Vec<f64>], ncols: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let nrows = rows.len().max(ncols);
    let mut m = DMatrix::<f64>::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| v_t.row(i).iter().copied().collect())
        .collect();
    (values, vectors)
}

/// Singular values in decreasing order.
pub(crate) fn singular_values(rows: &[Vec<f64>], ncols: usize) -> Vec<f64> {
    if rows.is_empty() || ncols == 0 {
        return Vec::new();
    }
    let m = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol * largest`.
pub(crate) fn numerical_rank(values: &[f64], rel_tol: f64) -> usize {
    let Some(&largest) = values.first() else {
        return 0;
    };
    if largest == 0.0 {
        return 0;
    }
    values.iter().filter(|&&s| s > rel_tol * largest).count()
}
