#include "grash/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "grash/rng.hpp"

namespace grash {

std::vector<double> mean_ranks(std::span<const double> v) {
    std::vector<size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        double mean = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = mean;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("spearman: need equal lengths >= 2");
    }
    std::vector<double> ra = mean_ranks(a), rb = mean_ranks(b);
    double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
    double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (size_t i = 0; i < ra.size(); ++i) {
        double da = ra[i] - ma, db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) {
        throw std::invalid_argument("spearman: zero rank variance, correlation undefined");
    }
    return cov / std::sqrt(va * vb);
}

namespace {

// MRRs for all configs trained on one graph at one epoch count; nullopt for
// diverged trials.
std::vector<std::optional<double>> run_pass(const KnowledgeGraph& graph,
                                            std::span<const HyperparamConfig> configs,
                                            double epochs, size_t full_entities,
                                            const SweepParams& params) {
    size_t valid_size = std::max<size_t>(1, std::min(params.valid_size, graph.num_triples() / 5));
    DatasetSplit split = split_train_valid(graph, valid_size, derive_seed(params.seed, 0x5711));
    std::vector<Triple> filter = split.train;
    filter.insert(filter.end(), split.valid.begin(), split.valid.end());
    std::vector<double> freq(graph.num_entities(), 0.0);
    for (const Triple& t : split.train) {
        freq[t.s] += 1.0;
        freq[t.o] += 1.0;
    }

    std::vector<std::optional<double>> mrrs(configs.size());
    for (size_t i = 0; i < configs.size(); ++i) {
        try {
            uint64_t trial_seed =
                derive_seed(params.seed, 0xAB, static_cast<uint64_t>(configs[i].id));
            TrainConfig tc = to_train_config(configs[i], epochs, trial_seed);
            uint32_t n_sub = static_cast<uint32_t>(graph.num_entities());
            tc.num_negatives = scale_negatives(tc.num_negatives, n_sub, full_entities);
            if (tc.num_negatives >= n_sub) tc.num_negatives = n_sub - 1;
            EmbeddingModel model =
                init_model(params.scorer, params.dim, n_sub,
                           static_cast<uint32_t>(graph.num_relations()), tc.init_scale,
                           derive_seed(trial_seed, 1));
            LossTrace trace = train(model, split.train, tc, freq);
            if (trace.diverged) continue;
            mrrs[i] = evaluate(model, split.valid, filter).mrr;
        } catch (const std::exception&) {
            // trial failed; excluded from the correlation
        }
    }
    return mrrs;
}

// Smallest start count whose walk covers at least the target triple count,
// found by doubling then bisection (fixed walk length).
Subgraph walk_at_budget(const KnowledgeGraph& graph, double budget, uint64_t seed) {
    constexpr uint32_t kWalkLength = 10;
    auto target = static_cast<size_t>(budget * static_cast<double>(graph.num_triples()));
    target = std::max<size_t>(1, target);
    uint32_t max_starts = static_cast<uint32_t>(graph.num_entities());

    auto coverage = [&](uint32_t s) { return random_walk_sample(graph, s, kWalkLength, seed); };
    uint32_t hi = 1;
    Subgraph sub = coverage(hi);
    while (sub.graph.num_triples() < target && hi < max_starts) {
        hi = std::min(max_starts, hi * 2);
        sub = coverage(hi);
    }
    uint32_t lo = hi / 2 + 1;
    while (lo < hi) {
        uint32_t mid = lo + (hi - lo) / 2;
        Subgraph probe = coverage(mid);
        if (probe.graph.num_triples() >= target) {
            hi = mid;
            sub = std::move(probe);
        } else {
            lo = mid + 1;
        }
    }
    return sub;
}

}  // namespace

std::vector<CorrelationReport> transferability_sweep(const DatasetSplit& dataset,
                                                     const SearchSpace& space,
                                                     const SweepParams& params) {
    if (params.n_configs < 3) {
        throw std::invalid_argument("transferability_sweep: need at least 3 configs");
    }
    for (double b : params.budgets) {
        if (!(b > 0.0) || b > 1.0) {
            throw std::invalid_argument("transferability_sweep: budgets must be in (0, 1]");
        }
    }

    KnowledgeGraph full_graph = dataset.train_graph();
    const size_t full_entities = full_graph.num_entities();
    std::vector<HyperparamConfig> configs =
        sample_configs(space, params.n_configs, derive_seed(params.seed, 0x5eed), params.scorer);

    CoreLadder ladder;
    bool needs_ladder = false;
    for (const auto& t : params.techniques) needs_ladder |= (t == "kcore" || t == "combined");
    if (needs_ladder) ladder = core_decomposition(full_graph);

    auto reference = run_pass(full_graph, configs, params.full_epochs, full_entities, params);
    size_t excluded = 0;
    for (const auto& r : reference) excluded += !r.has_value();

    std::vector<CorrelationReport> reports;
    for (const std::string& technique : params.techniques) {
        for (double budget : params.budgets) {
            CorrelationReport cell;
            cell.technique = technique;
            cell.budget = budget;
            if (excluded > 0) {
                cell.note = std::to_string(excluded) + " reference trial(s) excluded";
            }

            KnowledgeGraph pass_graph = full_graph;
            double pass_epochs = params.full_epochs;
            uint64_t reduce_seed = derive_seed(params.seed, 0x6000, reports.size());
            try {
                if (technique == "kcore") {
                    CoreSelection sel =
                        select_core_for_fidelity(ladder, budget, full_graph.num_triples());
                    pass_graph = k_core(full_graph, sel.k, ladder).graph;
                } else if (technique == "triple") {
                    pass_graph = triple_sample(full_graph, budget, reduce_seed).graph;
                } else if (technique == "walk") {
                    pass_graph = walk_at_budget(full_graph, budget, reduce_seed).graph;
                } else if (technique == "epoch") {
                    pass_epochs = budget * params.full_epochs;
                } else if (technique == "combined") {
                    double f = std::sqrt(budget);
                    CoreSelection sel =
                        select_core_for_fidelity(ladder, f, full_graph.num_triples());
                    pass_graph = k_core(full_graph, sel.k, ladder).graph;
                    pass_epochs = f * params.full_epochs;
                } else {
                    throw std::invalid_argument("unknown technique: " + technique);
                }

                auto low = run_pass(pass_graph, configs, pass_epochs, full_entities, params);
                std::vector<double> a, b;
                for (size_t i = 0; i < configs.size(); ++i) {
                    if (reference[i] && low[i]) {
                        a.push_back(*low[i]);
                        b.push_back(*reference[i]);
                        cell.pairs.emplace_back(*low[i], *reference[i]);
                    }
                }
                cell.n_configs = a.size();
                cell.spearman_rho = spearman(a, b);
            } catch (const std::exception& e) {
                cell.note += std::string(cell.note.empty() ? "" : "; ") + e.what();
            }
            reports.push_back(std::move(cell));
        }
    }
    return reports;
}

}  // namespace grash
