use proptest::prelude::*;
use qaoa_rl::graphs::{
    brute_force_maxcut, complete_graph, gen_barbell, gen_caveman, gen_erdos_renyi, gen_ladder, parse_graph,
    serialize_graph, Graph,
};
use qaoa_rl::Error;

/// Lexicographically first optimal assignment by plain enumeration.
fn naive_maxcut(g: &Graph) -> (usize, Vec<u8>) {
    let n = g.n();
    let mut best = (0, vec![0u8; n]);
    for k in 0..1usize << (n - 1) {
        // s_0 = 0, then s_1..s_{n-1} read as a binary number, s_1 most significant
        let s: Vec<u8> = (0..n).map(|v| if v == 0 { 0 } else { (k >> (n - 1 - v) & 1) as u8 }).collect();
        let cut = g.edges().iter().filter(|&&(a, b)| s[a] != s[b]).count();
        if cut > best.0 {
            best = (cut, s);
        }
    }
    best
}

#[test]
fn erdos_renyi_matches_golden_fixture() {
    let golden = include_str!("fixtures/erdos_renyi_8_0.5_1.txt");
    let g = gen_erdos_renyi(8, 0.5, 1).unwrap();
    assert_eq!(g.num_edges(), 13);
    assert_eq!(serialize_graph(&g), golden);
    assert_eq!(g.label(), "erdos_renyi(n=8,p=0.5,seed=1)");
}

#[test]
fn erdos_renyi_extremes_and_errors() {
    assert_eq!(gen_erdos_renyi(4, 0.0, 7).unwrap().num_edges(), 0);
    assert_eq!(gen_erdos_renyi(4, 1.0, 7).unwrap().num_edges(), 6);
    assert!(matches!(gen_erdos_renyi(4, 1.5, 7), Err(Error::InvalidArgument(_))));
    assert!(matches!(gen_erdos_renyi(4, -0.1, 7), Err(Error::InvalidArgument(_))));
    assert!(gen_erdos_renyi(1, 0.5, 7).is_err());
}

#[test]
fn structured_families_have_expected_sizes() {
    for len in 2..=11 {
        let g = gen_ladder(len).unwrap();
        assert_eq!((g.n(), g.num_edges()), (2 * len, 3 * len - 2));
        assert_eq!(brute_force_maxcut(&g).unwrap().value, g.num_edges());
    }
    for k in 3..=11 {
        let g = gen_barbell(k).unwrap();
        assert_eq!((g.n(), g.num_edges()), (2 * k, k * (k - 1) + 1));
        assert!(g.is_connected());
    }
    assert_eq!(brute_force_maxcut(&gen_barbell(3).unwrap()).unwrap().value, 5);
    for (c, k) in [(3, 4), (4, 4), (5, 4), (3, 3), (5, 3), (7, 3), (2, 3), (2, 10)] {
        let g = gen_caveman(c, k).unwrap();
        assert_eq!(g.n(), c * k);
        assert!(g.is_connected(), "caveman({c},{k})");
    }
    let cave = gen_caveman(5, 4).unwrap();
    let links: Vec<_> = cave.edges().iter().filter(|&&(a, b)| a / 4 != b / 4).collect();
    assert_eq!((cave.num_edges(), links.len()), (30, 5));
    assert_eq!(links, [&(0, 19), &(3, 4), &(7, 8), &(11, 12), &(15, 16)]);
    assert!(gen_ladder(1).is_err());
    assert!(gen_caveman(1, 4).is_err() && gen_caveman(3, 2).is_err());
    assert!(gen_barbell(2).is_err());
}

#[test]
fn complete_graphs_cut_a_quarter_square() {
    for m in 3..=8 {
        assert_eq!(brute_force_maxcut(&complete_graph(m).unwrap()).unwrap().value, m * m / 4);
    }
}

#[test]
fn brute_force_agrees_with_naive_enumeration() {
    for seed in 0..30 {
        let g = gen_erdos_renyi(3 + (seed as usize % 8), 0.5, seed).unwrap();
        let fast = brute_force_maxcut(&g).unwrap();
        let (value, assignment) = naive_maxcut(&g);
        assert_eq!(fast.value, value, "seed {seed}");
        assert_eq!(fast.assignment, assignment, "seed {seed}");
        assert_eq!(g.cut_value(&fast.assignment), value);
    }
}

#[test]
fn capacity_is_checked() {
    let g = Graph::new(25, [(0, 1)], "wide").unwrap();
    assert!(matches!(brute_force_maxcut(&g), Err(Error::Capacity { n: 25, .. })));
}

#[test]
fn parse_reports_the_offending_line() {
    let line_of = |text: &str| match parse_graph(text) {
        Err(Error::Parse { line, .. }) => line,
        other => panic!("expected a parse error, got {other:?}"),
    };
    assert_eq!(line_of(""), 1);
    assert_eq!(line_of("3 x\n"), 1);
    assert_eq!(line_of("1 0\n"), 1);
    assert_eq!(line_of("3 2\n0 1\n"), 3);
    assert_eq!(line_of("3 1\n0 3\n"), 2);
    assert_eq!(line_of("3 1\n1 1\n"), 2);
    assert_eq!(line_of("3 2\n0 1\n1 0\n"), 3);
    assert_eq!(line_of("3 1\n0 1 2\n"), 2);
    assert_eq!(line_of("3 1\n0 1\n1 2\n"), 3);
    assert_eq!(parse_graph("3 1\n0 1\n\n").unwrap().num_edges(), 1);
}

proptest! {
    #[test]
    fn text_round_trip(n in 2usize..12, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let g = gen_erdos_renyi(n, p, seed).unwrap();
        let text = serialize_graph(&g);
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
        prop_assert_eq!(serialize_graph(&back), text);
    }

    #[test]
    fn maxcut_is_relabel_invariant(n in 3usize..10, seed in any::<u64>(), shift in 1usize..9) {
        let g = gen_erdos_renyi(n, 0.5, seed).unwrap();
        let perm: Vec<usize> = (0..n).map(|v| (v + shift) % n).collect();
        let h = g.relabel(&perm).unwrap();
        prop_assert_eq!(brute_force_maxcut(&g).unwrap().value, brute_force_maxcut(&h).unwrap().value);
    }
}
