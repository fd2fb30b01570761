use super::model::GmmModel;

/// Re-indexes clusters by descending mean member Z-score.
///
/// Features are standardised over all of `data`; a cluster's score is the
/// mean standardised value over its members and the retained features. An
/// empty cluster is scored at its mean vector. Returns the permuted model
/// and `order`, where `order[new] = old`.
pub fn order_clusters(model: &GmmModel, data: &[[f64; 3]], labels: &[usize]) -> (GmmModel, Vec<usize>) {
    let n = data.len() as f64;
    let mut centre = [0.0; 3];
    let mut scale = [0.0; 3];
    let mut kept = [false; 3];
    for f in 0..3 {
        centre[f] = data.iter().map(|x| x[f]).sum::<f64>() / n;
        let var = data.iter().map(|x| (x[f] - centre[f]).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        scale[f] = var.sqrt();
        kept[f] = scale[f] > 0.0 && scale[f].is_finite();
        if !kept[f] {
            log::warn!("feature {} has zero variance and is left out of cluster ordering", super::FEATURES[f]);
        }
    }
    let nf = kept.iter().filter(|&&k| k).count();
    let z = |x: &[f64; 3]| -> f64 {
        if nf == 0 {
            return 0.0;
        }
        (0..3).filter(|&f| kept[f]).map(|f| (x[f] - centre[f]) / scale[f]).sum::<f64>() / nf as f64
    };

    let g = model.g();
    let mut sum = vec![0.0; g];
    let mut count = vec![0usize; g];
    for (x, &l) in data.iter().zip(labels) {
        sum[l] += z(x);
        count[l] += 1;
    }
    let score: Vec<f64> = (0..g)
        .map(|k| {
            if count[k] > 0 {
                sum[k] / count[k] as f64
            } else {
                let m = &model.components[k].mean;
                z(&[m[0], m[1], m[2]])
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..g).collect();
    order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    (model.permuted(&order), order)
}
