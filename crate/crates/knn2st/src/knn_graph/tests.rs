use super::*;
use crate::rng::substream;
use proptest::prelude::*;
use rand::Rng;

fn cloud_1d(points: &[f64]) -> PointCloud {
    PointCloud::new(1, points.to_vec()).unwrap()
}

fn random_cloud(dim: usize, len: usize, seed: u64) -> PointCloud {
    let mut rng = substream(seed, &[0xC10D, dim as u64, len as u64]);
    let coords = (0..dim * len).map(|_| rng.random_range(-1.0..1.0)).collect();
    PointCloud::new(dim, coords).unwrap()
}

fn edge_set(g: &DirectedKnnGraph) -> Vec<(u32, u32)> {
    g.edges().collect()
}

#[test]
fn line_cloud_k1_edges() {
    // {0, 1, 3}: nearest of 0 is 1, of 1 is 0 (dist 1 < 2), of 3 is 1.
    let g = build_knn_graph_brute(&cloud_1d(&[0.0, 1.0, 3.0]), 1).unwrap();
    assert_eq!(edge_set(&g), vec![(0, 1), (1, 0), (2, 1)]);
    assert_eq!(max_in_degree(&g), 2);
    assert_eq!(g.in_neighbors(1), &[0, 2]);
}

#[test]
fn k_at_least_len_gives_complete_digraph() {
    let cloud = random_cloud(3, 7, 1);
    for k in [6, 7, 20] {
        let g = build_knn_graph_brute(&cloud, k).unwrap();
        assert_eq!(g.out_degree(), 6);
        assert_eq!(g.edge_count(), 42);
        for v in 0..7 {
            let mut seen: Vec<u32> = g.out_neighbors(v).to_vec();
            seen.sort_unstable();
            let expect: Vec<u32> = (0..7).filter(|&u| u != v as u32).collect();
            assert_eq!(seen, expect);
        }
        assert_eq!(max_in_degree(&g), 6);
    }
}

#[test]
fn planar_example_with_distance_tie() {
    // From (5,5): d² to (0,0)=50, to (1,0)=41, to (0,1)=41. The tie at 41 is
    // broken toward the smaller index, so the neighbor order is 1 then 2.
    let cloud =
        PointCloud::from_rows(2, &[vec![0., 0.], vec![1., 0.], vec![0., 1.], vec![5., 5.]])
            .unwrap();
    for builder in [build_knn_graph_brute, build_knn_graph_indexed] {
        let g = builder(&cloud, 2).unwrap();
        assert_eq!(g.out_neighbors(3), &[1, 2]);
    }
}

#[test]
fn indexed_matches_brute_on_line_example() {
    let g = build_knn_graph_indexed(&cloud_1d(&[0.0, 1.0, 3.0]), 1).unwrap();
    assert_eq!(edge_set(&g), vec![(0, 1), (1, 0), (2, 1)]);
}

#[test]
fn rejects_degenerate_inputs() {
    assert!(matches!(
        build_knn_graph_brute(&cloud_1d(&[0.0]), 1),
        Err(Error::DegenerateInput(_))
    ));
    assert!(matches!(
        build_knn_graph_brute(&cloud_1d(&[0.0, 1.0]), 0),
        Err(Error::Validation(_))
    ));
    assert!(PointCloud::new(2, vec![0.0, f64::NAN]).is_err());
    assert!(PointCloud::new(2, vec![0.0, f64::INFINITY]).is_err());
    assert!(PointCloud::new(2, vec![0.0, 1.0, 2.0]).is_err());
    assert!(PointCloud::new(0, vec![]).is_err());
}

#[test]
fn indexed_equals_brute_across_dims_and_k() {
    for (case, &(dim, len)) in [(1usize, 40usize), (2, 80), (3, 120), (6, 150), (25, 60)]
        .iter()
        .enumerate()
    {
        let cloud = random_cloud(dim, len, 100 + case as u64);
        for k in [1, 2, 5, len / 2, len - 1] {
            let brute = build_knn_graph_brute(&cloud, k).unwrap();
            let indexed = build_knn_graph_indexed(&cloud, k).unwrap();
            assert_eq!(
                brute.out, indexed.out,
                "adjacency mismatch at dim={dim} len={len} k={k}"
            );
        }
    }
}

#[test]
fn indexed_handles_duplicate_points() {
    // Coincident points exercise the tie rule everywhere.
    let mut coords = Vec::new();
    for i in 0..30 {
        let v = (i % 5) as f64;
        coords.extend_from_slice(&[v, -v]);
    }
    let cloud = PointCloud::new(2, coords).unwrap();
    for k in [1, 3, 7, 29] {
        let brute = build_knn_graph_brute(&cloud, k).unwrap();
        let indexed = build_knn_graph_indexed(&cloud, k).unwrap();
        assert_eq!(brute.out, indexed.out, "k={k}");
    }
}

#[test]
fn in_degree_bound_on_random_clouds() {
    for (dim, len, k) in [(1, 300, 4), (2, 400, 3), (3, 300, 5), (6, 200, 8)] {
        let cloud = random_cloud(dim, len, 7 + dim as u64);
        let g = build_knn_graph_indexed(&cloud, k).unwrap();
        let bound = cone_cover_bound(dim) * k as u64;
        assert!(
            (max_in_degree(&g) as u64) <= bound,
            "dim={dim}: in-degree {} over bound {bound}",
            max_in_degree(&g)
        );
    }
}

#[test]
fn cone_cover_bound_values() {
    assert_eq!(cone_cover_bound(1), 2);
    assert_eq!(cone_cover_bound(2), 6);
    // Volumetric bound for d ≥ 3: (1 + 1/sin(π/12))^d rounded up.
    assert_eq!(cone_cover_bound(3), 116);
    assert!(cone_cover_bound(25) > cone_cover_bound(6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prop_indexed_equals_brute(seed in 0u64..1000, dim in 1usize..5, len in 2usize..90, k_raw in 1usize..12) {
        let cloud = random_cloud(dim, len, seed);
        let k = k_raw.min(len - 1).max(1);
        let brute = build_knn_graph_brute(&cloud, k).unwrap();
        let indexed = build_knn_graph_indexed(&cloud, k).unwrap();
        prop_assert_eq!(&brute.out, &indexed.out);
    }

    #[test]
    fn prop_out_degree_and_transpose(seed in 0u64..1000, dim in 1usize..4, len in 2usize..60, k in 1usize..70) {
        let cloud = random_cloud(dim, len, seed);
        let g = build_knn_graph_brute(&cloud, k).unwrap();
        prop_assert_eq!(g.out_degree(), k.min(len - 1));
        for v in 0..len {
            prop_assert_eq!(g.out_neighbors(v).len(), g.out_degree());
            // No self-loops, no duplicates.
            let mut sorted = g.out_neighbors(v).to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), g.out_degree());
            prop_assert!(!g.out_neighbors(v).contains(&(v as u32)));
            for &u in g.out_neighbors(v) {
                prop_assert!(g.in_neighbors(u as usize).contains(&(v as u32)));
            }
            for &u in g.in_neighbors(v) {
                prop_assert!(g.out_neighbors(u as usize).contains(&(v as u32)));
            }
        }
        let total_in: usize = (0..len).map(|v| g.in_degree(v)).sum();
        prop_assert_eq!(total_in, g.edge_count());
    }

    #[test]
    fn prop_nearest_listed_first(seed in 0u64..1000, dim in 1usize..4, len in 3usize..50) {
        // For every vertex and listed neighbor, no unlisted vertex is closer
        // under the (distance, index) order.
        let cloud = random_cloud(dim, len, seed);
        let k = 3.min(len - 1);
        let g = build_knn_graph_brute(&cloud, k).unwrap();
        for v in 0..len {
            let vp = cloud.point(v);
            let worst = *g.out_neighbors(v).last().unwrap();
            let worst_key = (sq_dist(vp, cloud.point(worst as usize)), worst);
            for u in 0..len as u32 {
                if u as usize == v || g.out_neighbors(v).contains(&u) {
                    continue;
                }
                let key = (sq_dist(vp, cloud.point(u as usize)), u);
                prop_assert!(cmp_candidate(&key, &worst_key) == std::cmp::Ordering::Greater);
            }
        }
    }

    #[test]
    fn prop_permutation_equivariance(seed in 0u64..1000, len in 2usize..40, k in 1usize..6) {
        use rand::seq::SliceRandom;
        let dim = 2;
        let cloud = random_cloud(dim, len, seed);
        let k = k.min(len - 1);

        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut substream(seed, &[0xBEEF]));
        // permuted cloud: new index i holds old point perm[i]
        let rows: Vec<Vec<f64>> = perm.iter().map(|&old| cloud.point(old).to_vec()).collect();
        let permuted = PointCloud::from_rows(dim, &rows).unwrap();

        let g = build_knn_graph_brute(&cloud, k).unwrap();
        let gp = build_knn_graph_brute(&permuted, k).unwrap();

        let mut inv = vec![0u32; len];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new as u32;
        }
        let mut mapped: Vec<(u32, u32)> = g.edges().map(|(a, b)| (inv[a as usize], inv[b as usize])).collect();
        mapped.sort_unstable();
        let mut direct: Vec<(u32, u32)> = gp.edges().collect();
        direct.sort_unstable();
        prop_assert_eq!(mapped, direct);
    }
}
