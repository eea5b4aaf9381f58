#include "grash/eval.hpp"

#include <stdexcept>
#include <unordered_map>

namespace grash {

uint32_t filtered_rank(std::span<const double> scores, uint32_t true_entity,
                       std::span<const char> filter) {
    if (filter[true_entity]) {
        throw std::invalid_argument("filtered_rank: true entity is in the filter set");
    }
    double true_score = scores[true_entity];
    uint32_t better = 0, tied = 0;
    for (size_t j = 0; j < scores.size(); ++j) {
        if (filter[j] || j == true_entity) continue;
        if (scores[j] > true_score) {
            ++better;
        } else if (scores[j] == true_score) {
            ++tied;
        }
    }
    return 1 + better + tied / 2;
}

RankingReport evaluate(const EmbeddingModel& model, std::span<const Triple> eval_triples,
                       std::span<const Triple> filter_triples, bool keep_ranks) {
    // Known-true candidates per fixed pair.
    std::unordered_map<uint64_t, std::vector<uint32_t>> sp_to_o, po_to_s;
    auto pair_key = [&](uint32_t e, uint32_t p) {
        return static_cast<uint64_t>(e) * model.n_relations + p;
    };
    for (const Triple& t : filter_triples) {
        sp_to_o[pair_key(t.s, t.p)].push_back(t.o);
        po_to_s[pair_key(t.o, t.p)].push_back(t.s);
    }

    RankingReport report;
    report.hits_at = {{1, 0.0}, {3, 0.0}, {10, 0.0}};
    std::vector<double> scores(model.n_entities);
    std::vector<char> filter(model.n_entities, 0);
    std::vector<uint32_t> marked;

    double rr_sum = 0.0;
    auto run_query = [&](Direction dir, uint32_t fixed_e, uint32_t p, uint32_t true_entity) {
        score_candidates_into(model, dir, fixed_e, p, scores);
        report.score_computations += model.n_entities;

        marked.clear();
        auto& index = dir == Direction::SPx ? sp_to_o : po_to_s;
        if (auto it = index.find(pair_key(fixed_e, p)); it != index.end()) {
            for (uint32_t e : it->second) {
                if (e != true_entity && !filter[e]) {
                    filter[e] = 1;
                    marked.push_back(e);
                }
            }
        }
        uint32_t rank = filtered_rank(scores, true_entity, filter);
        for (uint32_t e : marked) filter[e] = 0;

        rr_sum += 1.0 / rank;
        for (auto& [k, hits] : report.hits_at) {
            if (rank <= k) hits += 1.0;
        }
        if (keep_ranks) report.ranks.push_back(rank);
    };

    for (const Triple& t : eval_triples) {
        run_query(Direction::SPx, t.s, t.p, t.o);
        run_query(Direction::xPO, t.o, t.p, t.s);
    }

    report.n_queries = 2 * eval_triples.size();
    if (report.n_queries > 0) {
        report.mrr = rr_sum / static_cast<double>(report.n_queries);
        for (auto& [k, hits] : report.hits_at) hits /= static_cast<double>(report.n_queries);
    }
    return report;
}

}  // namespace grash
