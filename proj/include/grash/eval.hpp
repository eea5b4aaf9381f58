#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "grash/kg.hpp"
#include "grash/model.hpp"

namespace grash {

struct RankingReport {
    double mrr = 0.0;
    std::map<uint32_t, double> hits_at;  // k in {1, 3, 10}
    size_t n_queries = 0;                // 2 * |eval triples|
    uint64_t score_computations = 0;     // 2 * |eval| * |entities|
    std::vector<uint32_t> ranks;         // per query, in eval order (o-query, then s-query)
};

// Filtered rank of the true entity with mean-rank tie handling:
// 1 + #{better} + floor(#{tied} / 2), counted over non-filtered candidates.
// filter[j] != 0 marks entity j as filtered out; the true entity must not
// be filtered.
uint32_t filtered_rank(std::span<const double> scores, uint32_t true_entity,
                       std::span<const char> filter);

// Entity-ranking protocol: for each eval triple, one (s, p, ?) and one
// (?, p, o) query, each scored against all entities and filtered against
// every filter triple sharing the query's fixed pair.
RankingReport evaluate(const EmbeddingModel& model, std::span<const Triple> eval_triples,
                       std::span<const Triple> filter_triples, bool keep_ranks = false);

}  // namespace grash
