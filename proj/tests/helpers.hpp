#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "grash/kg.hpp"
#include "grash/reduce.hpp"
#include "grash/rng.hpp"

namespace grash::testing {

inline std::string ent(size_t i) { return "e" + std::to_string(i); }
inline std::string rel(size_t i) { return "r" + std::to_string(i); }

// Uniform random multirelational graph with dense vocabularies.
inline KnowledgeGraph random_graph(size_t n_entities, size_t n_relations, size_t n_triples,
                                   uint64_t seed) {
    Rng rng(seed);
    std::set<Triple> seen;
    std::uniform_int_distribution<uint32_t> pe(0, static_cast<uint32_t>(n_entities - 1));
    std::uniform_int_distribution<uint32_t> pr(0, static_cast<uint32_t>(n_relations - 1));
    while (seen.size() < n_triples) seen.insert({pe(rng), pr(rng), pe(rng)});

    // Re-index densely so every vocabulary entry occurs in a triple.
    std::vector<uint32_t> ent_id(n_entities, UINT32_MAX), rel_id(n_relations, UINT32_MAX);
    KnowledgeGraph g;
    for (const Triple& t : seen) {
        for (uint32_t e : {t.s, t.o}) {
            if (ent_id[e] == UINT32_MAX) {
                ent_id[e] = static_cast<uint32_t>(g.entities.size());
                g.entities.push_back(ent(e));
            }
        }
        if (rel_id[t.p] == UINT32_MAX) {
            rel_id[t.p] = static_cast<uint32_t>(g.relations.size());
            g.relations.push_back(rel(t.p));
        }
        g.triples.push_back({ent_id[t.s], rel_id[t.p], ent_id[t.o]});
    }
    return g;
}

// Clustered graph with a long-tail degree distribution: entities grouped in
// clusters, endpoints drawn by preferential attachment within the cluster,
// plus a small fraction of cross-cluster triples. Mirrors the structure
// where a dense core coexists with many low-degree fringe entities.
inline KnowledgeGraph clustered_graph(size_t n_entities, size_t n_relations, size_t n_triples,
                                      size_t n_clusters, uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<uint32_t> pr(0, static_cast<uint32_t>(n_relations - 1));
    size_t per_cluster = n_entities / n_clusters;

    // Preferential attachment: each endpoint slot is either a copy of a
    // previously used endpoint (within the cluster) or a fresh uniform one.
    std::vector<std::vector<uint32_t>> used(n_clusters);
    auto draw_in_cluster = [&](size_t c) -> uint32_t {
        uint32_t lo = static_cast<uint32_t>(c * per_cluster);
        uint32_t hi = static_cast<uint32_t>(c + 1 == n_clusters ? n_entities : (c + 1) * per_cluster);
        if (!used[c].empty() && uni(rng) < 0.55) {
            std::uniform_int_distribution<size_t> pick(0, used[c].size() - 1);
            return used[c][pick(rng)];
        }
        std::uniform_int_distribution<uint32_t> pick(lo, hi - 1);
        uint32_t e = pick(rng);
        used[c].push_back(e);
        return e;
    };

    std::set<Triple> seen;
    std::uniform_int_distribution<size_t> pc(0, n_clusters - 1);
    while (seen.size() < n_triples) {
        size_t c1 = pc(rng);
        size_t c2 = uni(rng) < 0.05 ? pc(rng) : c1;  // mostly intra-cluster
        uint32_t s = draw_in_cluster(c1);
        uint32_t o = draw_in_cluster(c2);
        if (s == o) continue;
        seen.insert({s, pr(rng), o});
    }

    std::vector<uint32_t> ent_id(n_entities, UINT32_MAX);
    KnowledgeGraph g;
    for (size_t r = 0; r < n_relations; ++r) g.relations.push_back(rel(r));
    for (const Triple& t : seen) {
        for (uint32_t e : {t.s, t.o}) {
            if (ent_id[e] == UINT32_MAX) {
                ent_id[e] = static_cast<uint32_t>(g.entities.size());
                g.entities.push_back(ent(e));
            }
        }
        g.triples.push_back({ent_id[t.s], t.p, ent_id[t.o]});
    }
    return g;
}

// Clustered graph with Zipf-weighted endpoints: within each cluster the j-th
// entity is drawn with probability proportional to 1/(j+1)^exponent, giving
// the long-tail degree distribution of real KGs (a dense hub core plus many
// entities that occur in only a handful of triples).
inline KnowledgeGraph scale_free_graph(size_t n_entities, size_t n_relations, size_t n_triples,
                                       size_t n_clusters, double exponent, uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    size_t per_cluster = n_entities / n_clusters;

    std::vector<double> weights(per_cluster + n_entities % n_clusters);
    for (size_t j = 0; j < weights.size(); ++j) weights[j] = 1.0 / std::pow(double(j + 1), exponent);
    std::discrete_distribution<uint32_t> zipf(weights.begin(), weights.end());

    auto draw_in_cluster = [&](size_t c) -> uint32_t {
        uint32_t lo = static_cast<uint32_t>(c * per_cluster);
        uint32_t hi = static_cast<uint32_t>(c + 1 == n_clusters ? n_entities : (c + 1) * per_cluster);
        uint32_t e;
        do {
            e = lo + zipf(rng);
        } while (e >= hi);
        return e;
    };

    std::vector<double> rel_weights(n_relations);
    for (size_t r = 0; r < n_relations; ++r) rel_weights[r] = 1.0 / std::sqrt(double(r + 1));
    std::discrete_distribution<uint32_t> pr(rel_weights.begin(), rel_weights.end());

    std::set<Triple> seen;
    std::uniform_int_distribution<size_t> pc(0, n_clusters - 1);
    while (seen.size() < n_triples) {
        size_t c1 = pc(rng);
        size_t c2 = uni(rng) < 0.05 ? pc(rng) : c1;  // mostly intra-cluster
        uint32_t s = draw_in_cluster(c1);
        uint32_t o = draw_in_cluster(c2);
        if (s == o) continue;
        seen.insert({s, pr(rng), o});
    }

    std::vector<uint32_t> ent_id(n_entities, UINT32_MAX);
    KnowledgeGraph g;
    for (size_t r = 0; r < n_relations; ++r) g.relations.push_back(rel(r));
    for (const Triple& t : seen) {
        for (uint32_t e : {t.s, t.o}) {
            if (ent_id[e] == UINT32_MAX) {
                ent_id[e] = static_cast<uint32_t>(g.entities.size());
                g.entities.push_back(ent(e));
            }
        }
        g.triples.push_back({ent_id[t.s], t.p, ent_id[t.o]});
    }
    return g;
}

// Brute-force coreness oracle: for each k, repeatedly delete any entity with
// fewer than k incident retained triples until fixpoint; coreness(e) is the
// largest k whose fixpoint still contains e.
inline std::vector<uint32_t> coreness_oracle(const KnowledgeGraph& g) {
    std::vector<uint32_t> coreness(g.num_entities(), 0);
    for (uint32_t k = 1;; ++k) {
        std::vector<char> alive(g.num_entities(), 1);
        bool changed = true;
        while (changed) {
            changed = false;
            std::vector<uint32_t> deg(g.num_entities(), 0);
            for (const Triple& t : g.triples) {
                if (!alive[t.s] || !alive[t.o]) continue;
                ++deg[t.s];
                if (t.o != t.s) ++deg[t.o];
            }
            for (size_t e = 0; e < g.num_entities(); ++e) {
                if (alive[e] && deg[e] < k) {
                    alive[e] = 0;
                    changed = true;
                }
            }
        }
        bool any = false;
        for (size_t e = 0; e < g.num_entities(); ++e) {
            if (alive[e]) {
                coreness[e] = k;
                any = true;
            }
        }
        if (!any) break;
    }
    return coreness;
}

// Triple set of the brute-force k-core.
inline std::set<Triple> k_core_oracle(const KnowledgeGraph& g,
                                      const std::vector<uint32_t>& coreness, uint32_t k) {
    std::set<Triple> core;
    for (const Triple& t : g.triples) {
        if (coreness[t.s] >= k && coreness[t.o] >= k) core.insert(t);
    }
    return core;
}

// Sort-based filtered-rank oracle with mean-rank tie handling.
inline uint32_t rank_oracle(const std::vector<double>& scores, uint32_t true_entity,
                            const std::set<uint32_t>& filtered) {
    std::vector<double> kept;
    for (uint32_t j = 0; j < scores.size(); ++j) {
        if (j != true_entity && !filtered.count(j)) kept.push_back(scores[j]);
    }
    std::sort(kept.begin(), kept.end(), std::greater<>());
    uint32_t better = 0, tied = 0;
    for (double v : kept) {
        if (v > scores[true_entity]) ++better;
        if (v == scores[true_entity]) ++tied;
    }
    return 1 + better + tied / 2;
}

}  // namespace grash::testing
