use crate::error::{Error, Result};
use crate::inference::euclidean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triplet {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
}

/// One triplet per ordered (anchor, positive) pair of same-label points.
///
/// The negative is the closest one with `d_ap < d_an < d_ap + margin`; when
/// that band is empty it is the closest negative overall. Equal distances
/// resolve to the lowest index.
pub fn semi_hard_triplets<L: PartialEq>(
    embeddings: &[Vec<f64>],
    labels: &[L],
    margin: f64,
) -> Result<Vec<Triplet>> {
    if embeddings.len() != labels.len() {
        return Err(Error::Mismatch(format!(
            "{} embeddings vs {} labels",
            embeddings.len(),
            labels.len()
        )));
    }
    let n = embeddings.len();
    if n == 0 || labels.iter().all(|l| *l == labels[0]) {
        return Err(Error::SingleClass);
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = euclidean(&embeddings[i], &embeddings[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let mut triplets = Vec::new();
    for a in 0..n {
        let row = &dist[a * n..(a + 1) * n];
        for p in 0..n {
            if p == a || labels[p] != labels[a] {
                continue;
            }
            let d_ap = row[p];
            let mut band: Option<usize> = None;
            let mut hardest: Option<usize> = None;
            for (neg, &d_an) in row.iter().enumerate() {
                if labels[neg] == labels[a] {
                    continue;
                }
                if hardest.is_none_or(|h| d_an < row[h]) {
                    hardest = Some(neg);
                }
                if d_an > d_ap && d_an < d_ap + margin && band.is_none_or(|b| d_an < row[b]) {
                    band = Some(neg);
                }
            }
            if let Some(negative) = band.or(hardest) {
                triplets.push(Triplet {
                    anchor: a,
                    positive: p,
                    negative,
                });
            }
        }
    }
    Ok(triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Enumerates every triplet and applies the selection rule directly.
    fn brute_force(e: &[Vec<f64>], labels: &[usize], margin: f64) -> Vec<Triplet> {
        let d = |i: usize, j: usize| euclidean(&e[i], &e[j]);
        let mut out = Vec::new();
        for a in 0..e.len() {
            for p in 0..e.len() {
                if a == p || labels[a] != labels[p] {
                    continue;
                }
                let negs: Vec<usize> = (0..e.len()).filter(|&q| labels[q] != labels[a]).collect();
                let pick = |cands: Vec<usize>| {
                    cands
                        .into_iter()
                        .min_by(|&x, &y| d(a, x).total_cmp(&d(a, y)).then(x.cmp(&y)))
                };
                let semi: Vec<usize> = negs
                    .iter()
                    .copied()
                    .filter(|&q| d(a, q) > d(a, p) && d(a, q) < d(a, p) + margin)
                    .collect();
                if let Some(neg) = pick(semi).or_else(|| pick(negs.clone())) {
                    out.push(Triplet {
                        anchor: a,
                        positive: p,
                        negative: neg,
                    });
                }
            }
        }
        out
    }

    #[test]
    fn toy_batch_matches_enumeration() {
        let e = vec![
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![0.0, 0.3],
            vec![0.25, 0.0],
            vec![0.0, 0.5],
            vec![1.0, 1.0],
        ];
        let labels = vec![0, 0, 0, 1, 1, 1];
        assert_eq!(
            semi_hard_triplets(&e, &labels, 0.2).unwrap(),
            brute_force(&e, &labels, 0.2)
        );
    }

    #[test]
    fn fallback_to_hardest() {
        let e = vec![vec![0.0], vec![0.1], vec![5.0], vec![3.0]];
        let labels = vec![0, 0, 1, 1];
        let t = semi_hard_triplets(&e, &labels, 0.2).unwrap();
        let first = t.iter().find(|t| t.anchor == 0 && t.positive == 1).unwrap();
        assert_eq!(first.negative, 3);
    }

    #[test]
    fn ties_pick_lowest_index() {
        let e = vec![vec![0.0], vec![0.1], vec![0.2], vec![0.2]];
        let labels = vec![0, 0, 1, 1];
        let t = semi_hard_triplets(&e, &labels, 0.5).unwrap();
        let first = t.iter().find(|t| t.anchor == 0 && t.positive == 1).unwrap();
        assert_eq!(first.negative, 2);
        let far = vec![vec![0.0], vec![0.1], vec![3.0], vec![3.0]];
        let t = semi_hard_triplets(&far, &labels, 0.5).unwrap();
        assert_eq!(t[0].negative, 2);
    }

    #[test]
    fn single_class_rejected() {
        let e = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            semi_hard_triplets(&e, &[1, 1], 0.2),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn random_batches_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 4..=32 {
            for _ in 0..3 {
                let classes = rng.gen_range(2..=4);
                let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
                let e: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .collect();
                assert_eq!(
                    semi_hard_triplets(&e, &labels, 0.2).unwrap(),
                    brute_force(&e, &labels, 0.2)
                );
            }
        }
    }
}
