#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grash/kg.hpp"

namespace grash {

enum class ReductionMethod { Identity, TripleSample, RandomWalk, KCore };

std::string to_string(ReductionMethod m);

struct Provenance {
    ReductionMethod method = ReductionMethod::Identity;
    double fraction = 1.0;     // triple sampling
    uint32_t num_starts = 0;   // random walk
    uint32_t walk_length = 0;  // random walk
    uint32_t k = 0;            // k-core
};

// A reduced KG with dense re-indexed vocabularies and a mapping back to the
// parent. Every entity/relation in the subgraph vocabulary occurs in at
// least one retained triple.
struct Subgraph {
    KnowledgeGraph graph;
    std::vector<uint32_t> entity_map;    // subgraph entity index -> parent index
    std::vector<uint32_t> relation_map;  // subgraph relation index -> parent index
    Provenance provenance;
    size_t parent_entity_count = 0;
    size_t parent_triple_count = 0;
};

// Result of peeling the whole graph once. coreness[e] is the largest k whose
// k-core contains entity e; levels enumerate every k with a nonempty core.
struct CoreLadder {
    struct Level {
        uint32_t k = 0;
        size_t triples = 0;
        size_t entities = 0;
    };
    std::vector<uint32_t> coreness;
    std::vector<Level> levels;

    uint32_t max_k() const { return levels.empty() ? 0 : levels.back().k; }
    const Level* level(uint32_t k) const;
};

struct CoreSelection {
    uint32_t k = 0;
    bool overshoot = false;  // even the deepest core exceeds the target
};

// Induces the subgraph over the given parent triple indices (kept in parent
// order; vocabularies re-indexed in first-occurrence order).
Subgraph induce_subgraph(const KnowledgeGraph& parent, const std::vector<uint32_t>& triple_ids,
                         Provenance provenance);

// The whole graph as a trivial subgraph of itself.
Subgraph identity_subgraph(const KnowledgeGraph& parent);

// Retains round(fraction * |triples|) uniformly sampled triples without
// replacement, then induces vocabularies.
Subgraph triple_sample(const KnowledgeGraph& graph, double fraction, uint64_t seed);

// Multi-start random walk: num_starts entities sampled without replacement;
// from each, walk_length undirected steps choosing a uniformly random
// incident triple at each step. Retained triples are the union of traversed
// triples.
Subgraph random_walk_sample(const KnowledgeGraph& graph, uint32_t num_starts,
                            uint32_t walk_length, uint64_t seed);

// Coreness by iterative peeling on triple-incidence degree (an entity's
// degree is the number of triples it occurs in).
CoreLadder core_decomposition(const KnowledgeGraph& graph);

// Retains exactly the triples whose subject and object both have
// coreness >= k. Errors on an empty core, naming the deepest nonempty k.
Subgraph k_core(const KnowledgeGraph& graph, uint32_t k, const CoreLadder& ladder);

// Smallest k whose core triple count does not exceed
// target_triple_fraction * parent triples, i.e. the largest core within the
// budget. Flags overshoot if even the deepest core exceeds the target.
CoreSelection select_core_for_fidelity(const CoreLadder& ladder, double target_triple_fraction,
                                       size_t parent_triple_count);

// Ladder cache: levels plus per-entity coreness, one value per line.
void save_ladder(const CoreLadder& ladder, const std::string& path);
CoreLadder load_ladder(const std::string& path);

// Loads the ladder from cache_path if present, else computes and caches it.
CoreLadder cached_core_decomposition(const KnowledgeGraph& graph, const std::string& cache_path);

}  // namespace grash
