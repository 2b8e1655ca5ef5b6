use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use addnet::decompose::{
    additive_synergy, contexts, prescribe_partition, product_synergy, PositiveStates,
};
use addnet::dissect::{abnm_query, build_full_split, build_plan, Combination};
use addnet::fit::{
    cross_entropy_total, family_marginal, node_cross_entropies, node_cross_entropy,
    WeightPosterior, WeightUpdater,
};
use addnet::graphops::{max_clique, moralize, triangulate, JunctionTree, UndirectedGraph};
use addnet::infer::{calibrate, enumerate_joint, ls_calibrate, query_by_enumeration};
use addnet::model::{
    parse_network, serialize_network, AdditiveCpt, AdditiveTerm, Cpt, Evidence, FullCpt, Network,
};
use addnet::synth::{
    random_evidence, random_graph, random_network, random_table, random_weights, NetworkShape,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_network(seed: u64) -> Network {
    random_network(&mut rng(seed), &NetworkShape::default())
}

fn config() -> ProptestConfig {
    ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::with_cases(64)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Evidence that has positive probability, if one turns up quickly.
fn possible_evidence(net: &Network, r: &mut ChaCha8Rng, rate: f64) -> Option<Evidence> {
    (0..20).find_map(|_| {
        let ev = random_evidence(r, net, rate);
        query_by_enumeration(net, net.name(0), &ev).ok().map(|_| ev)
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn serialize_then_parse_is_identity(seed in any::<u64>()) {
        let net = small_network(seed);
        let again = parse_network(&serialize_network(&net)).unwrap();
        prop_assert_eq!(&again, &net);
        prop_assert_eq!(serialize_network(&again), serialize_network(&net));
    }

    #[test]
    fn full_tables_are_their_own_effective_table(seed in any::<u64>()) {
        let net = small_network(seed);
        for v in 0..net.len() {
            if let Cpt::Full(t) = net.cpt(v) {
                prop_assert_eq!(&net.effective_cpt_at(v).unwrap(), t);
            }
        }
    }

    #[test]
    fn effective_table_is_linear_in_weights(seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let net = small_network(seed);
        for v in net.additive_nodes() {
            let k = net.cpt(v).as_additive().unwrap().terms().len();
            let a = random_weights(&mut r, k);
            let b = random_weights(&mut r, k);
            let mixed: Vec<f64> = a.iter().zip(&b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
            let at = |w: &[f64]| net.with_weights(v, w).unwrap().effective_cpt_at(v).unwrap();
            let (ta, tb, tm) = (at(&a), at(&b), at(&mixed));
            for ((x, y), m) in ta.probs().iter().zip(tb.probs()).zip(tm.probs()) {
                prop_assert!((lambda * x + (1.0 - lambda) * y - m).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn expectation_decomposes_over_terms(seed in any::<u64>()) {
        // binary child with states {0, 1}: E[Y | c] is the weighted sum of term expectations
        let mut r = rng(seed);
        let n_parents = r.random_range(2..=4);
        let cards: Vec<usize> = (0..n_parents).map(|_| r.random_range(2..=3)).collect();
        let parents: Vec<usize> = (0..n_parents).collect();
        let k = r.random_range(1..=n_parents.min(3));
        let terms: Vec<AdditiveTerm> = (0..k)
            .map(|j| {
                let mut subset: Vec<usize> = parents.iter().copied()
                    .filter(|p| p % k == j || r.random::<f64>() < 0.2).collect();
                if subset.is_empty() { subset.push(j); }
                let sub_cards = subset.iter().map(|&p| cards[p]).collect();
                AdditiveTerm { weight: 0.0, table: random_table(&mut r, n_parents, 2, subset, sub_cards, 0.1) }
            })
            .collect();
        let w = random_weights(&mut r, k);
        let cpt = AdditiveCpt::new(n_parents, parents, terms).with_weights(&w).unwrap();
        let full = cpt.expand(2, &cards).unwrap();
        for row in 0..full.num_rows() {
            let config = full.row_config(row);
            let expected: f64 = cpt.terms().iter().map(|t| {
                let sub: Vec<usize> = t.subset().iter().map(|&p| config[p]).collect();
                t.weight * t.table.prob(t.table.row_index(&sub), 1)
            }).sum();
            prop_assert!((full.prob(row, 1) - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn triangulation_is_chordal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..=12);
        let rate = r.random::<f64>();
        let g = random_graph(&mut r, n, rate);
        let (chordal, order) = triangulate(&g);
        prop_assert_eq!(order.len(), n);
        for (a, b) in g.edges() {
            prop_assert!(chordal.has_edge(&a, &b));
        }
        // eliminating again along the same order adds nothing
        let (again, _) = triangulate(&chordal);
        prop_assert_eq!(again.edge_count(), chordal.edge_count());
    }

    #[test]
    fn junction_tree_invariants(seed in any::<u64>()) {
        let shape = NetworkShape { max_nodes: 12, ..NetworkShape::default() };
        let net = random_network(&mut rng(seed), &shape);
        let tree = JunctionTree::compile(&net).unwrap();
        prop_assert!(tree.satisfies_running_intersection());
        for v in 0..net.len() {
            prop_assert!(tree.clique_containing(&net.family(v)).is_some());
        }
        // every clique is complete in the moral graph's triangulation and maximal
        let cliques = tree.cliques();
        for (i, a) in cliques.iter().enumerate() {
            for (j, b) in cliques.iter().enumerate() {
                prop_assert!(i == j || !a.iter().all(|x| b.contains(x)));
            }
        }
        let moral = moralize(&net);
        prop_assert_eq!(moral.vertex_count(), net.len());
    }

    #[test]
    fn potentials_multiply_to_the_joint(seed in any::<u64>()) {
        let net = small_network(seed);
        let tree = JunctionTree::compile(&net).unwrap();
        let joint = enumerate_joint(&net).unwrap();
        for (states, p) in joint.iter() {
            let product: f64 = tree.potentials().iter().map(|f| {
                let local: Vec<usize> = f.vars().iter().map(|&v| states[v]).collect();
                f.get(&local)
            }).product();
            prop_assert!((product - p).abs() <= 1e-12);
        }
    }

    #[test]
    fn calibrated_cliques_agree(seed in any::<u64>()) {
        let net = small_network(seed);
        let mut r = rng(seed ^ 1);
        let Some(ev) = possible_evidence(&net, &mut r, 0.3) else { return Ok(()) };
        let ct = ls_calibrate(&net, &ev).unwrap();
        for f in ct.clique_marginals() {
            prop_assert!((f.sum() - 1.0).abs() <= 1e-9);
        }
        for e in ct.tree().edges() {
            let a = ct.clique_marginals()[e.a].marginalize_onto(&e.separator);
            let b = ct.clique_marginals()[e.b].marginalize_onto(&e.separator);
            prop_assert!(max_abs_diff(a.values(), b.values()) <= 1e-9);
        }
        let oracle = query_by_enumeration(&net, net.name(0), &ev).unwrap();
        prop_assert!((ct.evidence_likelihood() - oracle.evidence_probability).abs() <= 1e-9);
    }

    #[test]
    fn likelihood_chain_rule(seed in any::<u64>()) {
        let net = small_network(seed);
        let mut r = rng(seed ^ 2);
        let Some(both) = possible_evidence(&net, &mut r, 0.5) else { return Ok(()) };
        let pairs: Vec<(usize, usize)> = both.iter().collect();
        let (mut e1, mut e2) = (Evidence::new(), Evidence::new());
        for (i, (v, s)) in pairs.into_iter().enumerate() {
            if i % 2 == 0 { e1.observe(v, s).unwrap() } else { e2.observe(v, s).unwrap() }
        }
        let tree = JunctionTree::compile(&net).unwrap();
        let p_both = calibrate(&tree, &both).unwrap().evidence_likelihood();
        let p1 = calibrate(&tree, &e1).unwrap().evidence_likelihood();
        // Pr[e2 | e1] by enumeration on the conditioned joint
        let joint = enumerate_joint(&net).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (states, p) in joint.iter() {
            if e1.consistent_with(&states) {
                den += p;
                if e2.consistent_with(&states) { num += p; }
            }
        }
        prop_assert!((p_both - p1 * num / den).abs() <= 1e-9);
    }

    #[test]
    fn rules_agree_without_evidence(seed in any::<u64>()) {
        let net = small_network(seed);
        let plan = build_full_split(&net).unwrap();
        let empty = Evidence::new();
        for v in 0..net.len() {
            let a = abnm_query(&plan, net.name(v), &empty, Combination::Exact).unwrap();
            prop_assert!(a.rule_gap() <= 1e-9);
            for leaf in &a.leaves {
                prop_assert!((leaf.likelihood - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn planner_only_accepts_shrinking_steps(seed in any::<u64>()) {
        let net = small_network(seed);
        let plan = build_plan(&net).unwrap();
        for step in plan.steps() {
            prop_assert!(step.after < step.before);
        }
        if !plan.steps().is_empty() {
            prop_assert!(plan.max_leaf_table_size() < plan.root_max_table_size());
        }
        let total: f64 = plan.leaves().iter().map(|l| l.weight).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn leaf_count_is_product_of_term_counts(seed in any::<u64>()) {
        let net = small_network(seed);
        let plan = build_full_split(&net).unwrap();
        let expected: usize = net.additive_nodes().iter()
            .map(|&v| net.cpt(v).as_additive().unwrap().terms().len())
            .product();
        prop_assert_eq!(plan.leaves().len(), expected);
    }

    #[test]
    fn node_cross_entropy_is_convex(seed in any::<u64>(), lambda in prop::sample::select(vec![0.25, 0.5, 0.75])) {
        let mut r = rng(seed);
        let shape = NetworkShape { additive_rate: 1.0, zero_rate: 0.0, ..NetworkShape::default() };
        let net = random_network(&mut r, &shape);
        let reference = net.expanded().unwrap();
        for v in net.additive_nodes() {
            let cpt = net.cpt(v).as_additive().unwrap();
            let k = cpt.terms().len();
            let family = family_marginal(&reference, net.name(v)).unwrap();
            let table = reference.effective_cpt_at(v).unwrap();
            let a = random_weights(&mut r, k);
            let b = random_weights(&mut r, k);
            let m: Vec<f64> = a.iter().zip(&b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
            let value = |w: &[f64]| node_cross_entropy(&family, &table, cpt, w).unwrap().value;
            prop_assert!(value(&m) <= lambda * value(&a) + (1.0 - lambda) * value(&b) + 1e-9);
        }
    }

    #[test]
    fn cross_entropy_splits_by_node(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = small_network(seed);
        let mut reference = net.clone();
        for v in net.additive_nodes() {
            let k = net.cpt(v).as_additive().unwrap().terms().len();
            reference = reference.with_weights(v, &random_weights(&mut r, k)).unwrap();
        }
        let reference = reference.expanded().unwrap();
        let total = cross_entropy_total(&reference, &net).unwrap();
        let parts = node_cross_entropies(&reference, &net).unwrap();
        if !total.divergent {
            let sum: f64 = parts.iter().map(|t| t.value).sum();
            prop_assert!(total.total >= -1e-12);
            prop_assert!((total.total - sum).abs() <= 1e-9);
        } else {
            prop_assert!(parts.iter().any(|t| t.divergent));
        }
    }

    #[test]
    fn partition_covers_every_vertex(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..=12);
        let rate = r.random::<f64>();
        let g = random_graph(&mut r, n, rate);
        let p = prescribe_partition(&g).unwrap();
        let mut covered: Vec<&str> = p.subsets.iter().flatten().map(String::as_str).collect();
        covered.sort_unstable();
        covered.dedup();
        let all: Vec<&str> = g.vertices().collect();
        prop_assert_eq!(covered, all);
        prop_assert_eq!(p.subsets.len(), p.clique.len());
    }

    #[test]
    fn max_clique_matches_brute_force(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..=10);
        let rate = r.random::<f64>();
        let g = random_graph(&mut r, n, rate);
        let clique = max_clique(&g).unwrap();
        prop_assert_eq!(clique.len(), brute_force_clique_size(&g));
        for (i, a) in clique.iter().enumerate() {
            for b in &clique[i + 1..] {
                prop_assert!(g.has_edge(a, b));
            }
        }
    }

    #[test]
    fn product_synergy_closed_form(seed in any::<u64>()) {
        // y depends on a through one term and on b through the other
        let mut r = rng(seed);
        let (a, b, y) = (0usize, 1usize, 2usize);
        let ta = random_table(&mut r, y, 2, vec![a], vec![2], 0.0);
        let tb = random_table(&mut r, y, 2, vec![b], vec![2], 0.0);
        let alpha = r.random::<f64>();
        let cpt = AdditiveCpt::new(y, vec![a, b], vec![
            AdditiveTerm { weight: alpha, table: ta.clone() },
            AdditiveTerm { weight: 1.0 - alpha, table: tb.clone() },
        ]).expand(2, &[2, 2]).unwrap();
        let positive = PositiveStates::new();
        let ctx = &contexts(&cpt, &[a, b])[0];
        let f = (ta.prob(1, 1) - ta.prob(0, 1)) * alpha;
        let g = (tb.prob(1, 1) - tb.prob(0, 1)) * (1.0 - alpha);
        let prod = product_synergy(&cpt, (a, b), ctx, &positive).unwrap();
        prop_assert!((prod + f * g).abs() <= 1e-12);
        prop_assert!(additive_synergy(&cpt, (a, b), ctx, &positive).unwrap().abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sequential_update_equals_batch(seed in any::<u64>()) {
        let net = parse_network(include_str!("../examples/riot.abn")).unwrap();
        let alarm = net.index_of("Alarm").unwrap();
        let mut r = rng(seed);
        let truth = net.with_weights(alarm, &random_weights(&mut r, 2)).unwrap();
        let cases = addnet::sample::sample_cases(&truth, 40, seed).unwrap();
        let evidence: Vec<Evidence> = (0..cases.len()).map(|i| cases.evidence(i)).collect();
        let nodes = vec!["Alarm".to_string()];
        let prior = WeightPosterior::uniform(&net, &["Alarm"], 0.05).unwrap();
        let updater = WeightUpdater::new(&net, &nodes).unwrap();
        let batch = updater.update_batch(&prior, &evidence).unwrap();
        let mut seq = prior;
        for e in &evidence {
            seq = updater.update(&seq, e).unwrap();
        }
        for (x, y) in batch.points().iter().zip(seq.points()) {
            prop_assert!((x.mass - y.mass).abs() <= 1e-9);
        }
    }
}

fn brute_force_clique_size(g: &UndirectedGraph) -> usize {
    let names: Vec<&str> = g.vertices().collect();
    let n = names.len();
    (1u32..(1 << n))
        .filter(|mask| {
            let members: Vec<&str> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| names[i])
                .collect();
            members
                .iter()
                .enumerate()
                .all(|(i, x)| members[i + 1..].iter().all(|y| g.has_edge(x, y)))
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

#[test]
fn three_binary_splits_give_eight_leaves() {
    let mut r = rng(11);
    let names = ["a", "b", "c", "d", "y1", "y2", "y3"];
    let variables = names
        .iter()
        .map(|n| addnet::model::Variable::new(*n, &["f", "t"]))
        .collect();
    let mut cpts: Vec<Cpt> = (0..4)
        .map(|i| Cpt::Full(random_table(&mut r, i, 2, vec![], vec![], 0.0)))
        .collect();
    for (child, (p, q)) in [(4, (0, 1)), (5, (1, 2)), (6, (2, 3))] {
        let term = |r: &mut ChaCha8Rng, s: usize| AdditiveTerm {
            weight: 0.5,
            table: random_table(r, child, 2, vec![s], vec![2], 0.0),
        };
        let terms = vec![term(&mut r, p), term(&mut r, q)];
        cpts.push(Cpt::Additive(AdditiveCpt::new(child, vec![p, q], terms)));
    }
    let net = Network::new(variables, cpts).unwrap();
    assert_eq!(build_full_split(&net).unwrap().leaves().len(), 8);
    let _: FullCpt = net.effective_cpt("y1").unwrap();
}
