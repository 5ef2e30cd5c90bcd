/// Average-linkage agglomerative clustering on a similarity matrix. Clusters
/// keep merging while the best average pairwise similarity is at least
/// `threshold`. Returns every cluster (singletons included), each sorted,
/// ordered by smallest member.
pub fn average_linkage(similarity: &[Vec<f64>], threshold: f64) -> Vec<Vec<usize>> {
    let n = similarity.len();
    let mut clusters: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    // linkage[a][b]: average similarity between live clusters a and b
    let mut linkage: Vec<Vec<f64>> = similarity.to_vec();

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n {
            if clusters[a].is_none() {
                continue;
            }
            for b in (a + 1)..n {
                if clusters[b].is_none() {
                    continue;
                }
                let s = linkage[a][b];
                // strict comparison keeps the earliest pair on ties
                if best.is_none_or(|(t, _, _)| s > t) {
                    best = Some((s, a, b));
                }
            }
        }
        let Some((s, a, b)) = best else { break };
        if s < threshold {
            break;
        }
        let merged_b = clusters[b].take().expect("live cluster");
        let (na, nb) = (clusters[a].as_ref().expect("live cluster").len() as f64, merged_b.len() as f64);
        for k in 0..n {
            if k == a || k == b || clusters[k].is_none() {
                continue;
            }
            let v = (na * linkage[a][k] + nb * linkage[b][k]) / (na + nb);
            linkage[a][k] = v;
            linkage[k][a] = v;
        }
        let target = clusters[a].as_mut().expect("live cluster");
        target.extend(merged_b);
        target.sort_unstable();
    }
    let mut out: Vec<Vec<usize>> = clusters.into_iter().flatten().collect();
    out.sort_by_key(|c| c[0]);
    out
}
