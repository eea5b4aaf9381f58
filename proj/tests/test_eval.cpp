#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "grash/eval.hpp"
#include "helpers.hpp"

using namespace grash;
using namespace grash::testing;

TEST_CASE("filtered_rank basics") {
    std::vector<double> scores{0.1, 0.9, 0.5, 0.3};
    std::vector<char> filter(4, 0);
    CHECK(filtered_rank(scores, 1, filter) == 1);  // strictly best
    CHECK(filtered_rank(scores, 0, filter) == 4);  // strictly worst
    CHECK(filtered_rank(scores, 2, filter) == 2);

    // Filtering a better-scored entity improves the rank.
    filter[1] = 1;
    CHECK(filtered_rank(scores, 2, filter) == 1);
    CHECK_THROWS_AS(filtered_rank(scores, 1, filter), std::invalid_argument);
}

TEST_CASE("nine-way tie gives the mean rank") {
    // True entity tied with 8 others at the top: rank = 1 + 0 + floor(8/2) = 5.
    std::vector<double> scores(12, -1.0);
    for (int i = 0; i < 9; ++i) scores[i] = 2.0;
    std::vector<char> filter(12, 0);
    CHECK(filtered_rank(scores, 4, filter) == 5);
}

TEST_CASE("filtered_rank matches the sort-based oracle on random instances") {
    Rng rng(99);
    std::uniform_real_distribution<double> unif(-1, 1);
    std::uniform_int_distribution<int> coarse(-2, 2);  // forces ties
    for (int it = 0; it < 200; ++it) {
        uint32_t n = 5 + uint32_t(rng() % 40);
        std::vector<double> scores(n);
        bool tied = it % 2 == 0;
        for (auto& s : scores) s = tied ? double(coarse(rng)) : unif(rng);
        std::vector<char> filter(n, 0);
        std::set<uint32_t> filtered;
        for (uint32_t j = 0; j < n; ++j) {
            if (rng() % 4 == 0) {
                filter[j] = 1;
                filtered.insert(j);
            }
        }
        uint32_t truth = uint32_t(rng() % n);
        filter[truth] = 0;
        filtered.erase(truth);
        CHECK(filtered_rank(scores, truth, filter) == rank_oracle(scores, truth, filtered));
    }
}

TEST_CASE("a perfectly separating model reaches MRR 1") {
    // One relation, entity i linked to i+1; craft TransE embeddings on a line
    // so that s + p == o exactly for every triple.
    KnowledgeGraph g;
    for (int i = 0; i < 6; ++i) g.entities.push_back("e" + std::to_string(i));
    g.relations = {"next"};
    for (uint32_t i = 0; i + 1 < 6; ++i) g.triples.push_back({i, 0, i + 1});

    EmbeddingModel m;
    m.scorer = Scorer::TransE;
    m.dim = 2;
    m.n_entities = 6;
    m.n_relations = 1;
    m.entity.resize(12, 0.0);
    for (uint32_t i = 0; i < 6; ++i) m.entity[i * 2] = double(i);
    m.relation = {1.0, 0.0};

    auto rep = evaluate(m, g.triples, g.triples, true);
    CHECK(rep.mrr == doctest::Approx(1.0));
    CHECK(rep.hits_at.at(1) == doctest::Approx(1.0));
    CHECK(rep.hits_at.at(10) == doctest::Approx(1.0));
    CHECK(rep.n_queries == 2 * g.triples.size());
    for (auto r : rep.ranks) CHECK(r == 1);
}

TEST_CASE("score computation accounting is 2 * |eval| * |entities|") {
    auto g = random_graph(30, 3, 60, 44);
    auto m = init_model(Scorer::ComplEx, 8, 30, 3, 0.2, 45);
    auto rep = evaluate(m, g.triples, g.triples);
    CHECK(rep.score_computations == 2ULL * g.triples.size() * g.num_entities());
    CHECK(rep.n_queries == 2 * g.triples.size());
}

TEST_CASE("a constant model lands near the all-tied mean rank") {
    // All scores equal: every query has rank 1 + floor((C-1)/2) over the C
    // unfiltered candidates.
    auto g = random_graph(40, 2, 80, 46);
    EmbeddingModel m;
    m.scorer = Scorer::TransE;
    m.dim = 2;
    m.n_entities = 40;
    m.n_relations = 2;
    m.entity.assign(80, 0.0);
    m.relation.assign(4, 0.0);
    auto rep = evaluate(m, g.triples, g.triples, true);
    for (size_t q = 0; q < rep.ranks.size(); ++q) {
        CHECK(rep.ranks[q] >= 1);
        CHECK(rep.ranks[q] <= 1 + (40 - 1) / 2);  // ties split to the mean
    }
}

TEST_CASE("adding filter triples never worsens any rank") {
    auto g = random_graph(25, 3, 100, 47);
    auto split = split_train_valid(g, 20, 48);
    auto m = init_model(Scorer::ComplEx, 8, 25, 3, 0.3, 49);

    auto sparse = evaluate(m, split.valid, split.valid, true);
    std::vector<Triple> both = split.train;
    both.insert(both.end(), split.valid.begin(), split.valid.end());
    auto dense = evaluate(m, split.valid, both, true);
    REQUIRE(sparse.ranks.size() == dense.ranks.size());
    for (size_t q = 0; q < sparse.ranks.size(); ++q) CHECK(dense.ranks[q] <= sparse.ranks[q]);
    CHECK(dense.mrr >= sparse.mrr);
}

TEST_CASE("ranking is invariant under monotone score transforms") {
    auto g = random_graph(20, 2, 60, 50);
    auto m = init_model(Scorer::ComplEx, 8, 20, 2, 0.3, 51);
    auto base = evaluate(m, g.triples, g.triples, true);
    // Scale every embedding: ComplEx scores scale by a positive cubic factor,
    // a strictly monotone transform per query.
    for (auto& v : m.entity) v *= 2.0;
    for (auto& v : m.relation) v *= 2.0;
    auto scaled = evaluate(m, g.triples, g.triples, true);
    CHECK(base.ranks == scaled.ranks);
    CHECK(base.mrr == doctest::Approx(scaled.mrr));
}

TEST_CASE("random-model MRR is near the analytic tied expectation") {
    // With i.i.d. continuous scores the true entity's filtered rank is
    // uniform on {1..C}, so E[1/rank] = H_C / C with C unfiltered candidates.
    const uint32_t n_entities = 50;
    auto g = random_graph(n_entities, 2, 150, 52);
    double mean = 0.0;
    const int reps = 40;
    for (int r = 0; r < reps; ++r) {
        auto m = init_model(Scorer::ComplEx, 16, n_entities, 2, 0.3, 1000 + r);
        mean += evaluate(m, g.triples, g.triples).mrr;
    }
    mean /= reps;
    // C varies per query with filtering; bound loosely around H_50/50 ~ 0.09.
    double h = 0.0;
    for (uint32_t k = 1; k <= n_entities; ++k) h += 1.0 / k;
    double expect = h / n_entities;
    CHECK(mean > 0.5 * expect);
    CHECK(mean < 2.0 * expect);
}
