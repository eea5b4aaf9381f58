#include "grash/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "grash/rng.hpp"

namespace grash {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Epoch: return "epoch";
        case Variant::Graph: return "graph";
        case Variant::Combined: return "combined";
    }
    return "?";
}

Variant variant_from_string(const std::string& name) {
    if (name == "epoch") return Variant::Epoch;
    if (name == "graph") return Variant::Graph;
    if (name == "combined") return Variant::Combined;
    throw std::invalid_argument("unknown variant: " + name);
}

double trial_cost(double epochs_i, double epochs_full, size_t triples_i, size_t triples_full) {
    if (epochs_full <= 0.0 || triples_full == 0) {
        throw std::invalid_argument("trial_cost: positive denominators required");
    }
    return (epochs_i / epochs_full) *
           (static_cast<double>(triples_i) / static_cast<double>(triples_full));
}

SearchSchedule plan_schedule(const SearchParams& params, const CoreLadder* ladder,
                             size_t full_triples) {
    if (params.eta < 2) throw std::invalid_argument("plan_schedule: eta must be >= 2");
    if (params.num_configs < 2) {
        throw std::invalid_argument("plan_schedule: need at least 2 configs");
    }
    if (!(params.budget > 0.0)) throw std::invalid_argument("plan_schedule: budget must be > 0");
    if (!(params.max_epochs > 0.0)) {
        throw std::invalid_argument("plan_schedule: max_epochs must be > 0");
    }
    if (params.variant != Variant::Epoch && ladder == nullptr) {
        throw std::invalid_argument("plan_schedule: graph reduction requires a core ladder");
    }

    SearchSchedule schedule;
    // s = ceil(log_eta(n)), computed in integers.
    size_t s = 0;
    for (size_t m = 1; m < params.num_configs; m *= params.eta) ++s;
    schedule.rounds = s;
    schedule.per_round_budget = params.budget / static_cast<double>(s);

    size_t n_i = params.num_configs;
    for (size_t i = 1; i <= s; ++i) {
        RoundPlan round;
        round.round = i;
        round.n_configs = n_i;
        double r = schedule.per_round_budget;
        // The combined variant splits the fidelity evenly (in log scale)
        // between epochs and triples, so each dimension gets sqrt of the
        // per-trial budget share.
        double f = params.variant == Variant::Combined
                       ? std::sqrt(r / static_cast<double>(n_i))
                       : r / static_cast<double>(n_i);
        if (f > 1.0) {
            f = 1.0;
            round.fidelity_clamped = true;
        }
        round.fidelity = f;
        round.epochs = params.variant == Variant::Graph ? params.max_epochs : f * params.max_epochs;
        round.partial_epochs = params.variant != Variant::Graph && round.epochs < 1.0;
        round.reduce_graph = params.variant != Variant::Epoch;
        round.target_cost = params.variant == Variant::Combined ? f * f : f;
        if (round.reduce_graph) {
            CoreSelection sel = select_core_for_fidelity(*ladder, f, full_triples);
            round.core_k = sel.k;
            round.core_overshoot = sel.overshoot;
            round.core_triples = ladder->level(sel.k)->triples;
            round.planned_cost = trial_cost(round.epochs, params.max_epochs, round.core_triples,
                                            full_triples);
        } else {
            round.core_triples = full_triples;
            round.planned_cost = round.epochs / params.max_epochs;
        }
        schedule.planned_total += static_cast<double>(n_i) * round.planned_cost;
        schedule.plan.push_back(round);
        n_i = (n_i + params.eta - 1) / params.eta;  // ceil(n_i / eta)
    }
    if (n_i != 1) throw std::logic_error("plan_schedule: survivor recurrence did not reach 1");
    return schedule;
}

namespace {

void parallel_for(size_t count, size_t workers, const std::function<void(size_t)>& body) {
    if (workers <= 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    size_t n_threads = std::min(workers, count);
    for (size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

std::vector<double> entity_frequencies(const KnowledgeGraph& graph) {
    std::vector<double> freq(graph.num_entities(), 0.0);
    for (const Triple& t : graph.triples) {
        freq[t.s] += 1.0;
        freq[t.o] += 1.0;
    }
    return freq;
}

// Trains and validates one config at one round's fidelity.
TrialResult run_trial(const HyperparamConfig& config, const RoundPlan& round,
                      const KnowledgeGraph& round_graph, const DatasetSplit& round_split,
                      std::span<const Triple> filter, std::span<const double> freq,
                      const SearchParams& params, size_t full_entities, size_t full_triples) {
    TrialResult result;
    result.config_id = config.id;
    result.round = round.round;
    result.planned_cost = round.planned_cost;
    try {
        uint64_t trial_seed = derive_seed(params.seed, round.round, static_cast<uint64_t>(config.id));
        TrainConfig tc = to_train_config(config, round.epochs, trial_seed);
        uint32_t n_sub = static_cast<uint32_t>(round_graph.num_entities());
        tc.num_negatives = scale_negatives(tc.num_negatives, n_sub, full_entities);
        if (tc.num_negatives >= n_sub) tc.num_negatives = n_sub - 1;
        result.scaled_negatives = tc.num_negatives;

        EmbeddingModel model =
            init_model(params.scorer, params.dim, n_sub,
                       static_cast<uint32_t>(round_graph.num_relations()), tc.init_scale,
                       derive_seed(trial_seed, 1));
        LossTrace trace = train(model, round_split.train, tc, freq);
        result.score_computations = trace.score_computations;
        result.realized_cost =
            trial_cost(round.epochs, params.max_epochs, round_graph.num_triples(), full_triples);
        if (!trace.epoch_loss.empty()) result.final_loss = trace.epoch_loss.back();
        if (trace.diverged) {
            result.ok = false;
            result.diagnostic = trace.diagnostic;
            result.mrr = 0.0;  // worst possible for selection
            return result;
        }
        RankingReport report = evaluate(model, round_split.valid, filter);
        result.mrr = report.mrr;
        result.hits_at = report.hits_at;
    } catch (const std::exception& e) {
        result.ok = false;
        result.diagnostic = e.what();
        result.mrr = 0.0;
    }
    return result;
}

}  // namespace

SearchResult run_search(const DatasetSplit& dataset, const SearchSpace& space,
                        const SearchParams& params, const TrialLogger& logger) {
    KnowledgeGraph search_graph = dataset.train_graph();
    const size_t full_entities = search_graph.num_entities();
    const size_t full_triples = search_graph.num_triples();

    CoreLadder ladder;
    if (params.variant != Variant::Epoch) ladder = core_decomposition(search_graph);

    SearchResult result;
    result.schedule = plan_schedule(
        params, params.variant != Variant::Epoch ? &ladder : nullptr, full_triples);

    std::vector<HyperparamConfig> configs =
        sample_configs(space, params.num_configs, derive_seed(params.seed, 0x5eed), params.scorer);
    std::vector<size_t> alive(configs.size());
    for (size_t i = 0; i < alive.size(); ++i) alive[i] = i;

    for (const RoundPlan& round : result.schedule.plan) {
        Subgraph sub = round.reduce_graph ? k_core(search_graph, round.core_k, ladder)
                                          : identity_subgraph(search_graph);
        // Tiny cores cannot afford a full-size validation split.
        size_t valid_size =
            std::max<size_t>(1, std::min(params.valid_size, sub.graph.num_triples() / 5));
        DatasetSplit round_split = split_train_valid(sub.graph, valid_size,
                                                     derive_seed(params.seed, round.round, 0x51));
        std::vector<Triple> filter = round_split.train;
        filter.insert(filter.end(), round_split.valid.begin(), round_split.valid.end());
        std::vector<double> freq = entity_frequencies({sub.graph.entities, sub.graph.relations,
                                                       round_split.train});

        std::vector<TrialResult> round_results(alive.size());
        parallel_for(alive.size(), params.workers, [&](size_t i) {
            round_results[i] = run_trial(configs[alive[i]], round, sub.graph, round_split, filter,
                                         freq, params, full_entities, full_triples);
        });

        // Selection: validation MRR descending, config id ascending on ties.
        std::vector<size_t> order(alive.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (round_results[a].mrr != round_results[b].mrr) {
                return round_results[a].mrr > round_results[b].mrr;
            }
            return round_results[a].config_id < round_results[b].config_id;
        });
        size_t survivors = (alive.size() + params.eta - 1) / params.eta;
        for (size_t i = 0; i < survivors; ++i) round_results[order[i]].selected = true;

        bool any_ok = false;
        for (TrialResult& tr : round_results) {
            any_ok = any_ok || tr.ok;
            result.ledger.planned_total += tr.planned_cost;
            result.ledger.realized_total += tr.realized_cost;
            if (logger) logger(tr);
            result.trials.push_back(std::move(tr));
        }
        if (!any_ok) {
            throw std::runtime_error("run_search: every trial failed in round " +
                                     std::to_string(round.round));
        }

        std::vector<size_t> next;
        for (size_t i = 0; i < survivors; ++i) next.push_back(alive[order[i]]);
        std::sort(next.begin(), next.end());  // keep config-id order between rounds
        alive = std::move(next);
    }

    if (alive.size() != 1) throw std::logic_error("run_search: expected a single survivor");
    result.best = configs[alive[0]];
    return result;
}

FinalTrainResult final_train(const DatasetSplit& dataset, const HyperparamConfig& config,
                             const SearchParams& params) {
    FinalTrainResult out;
    uint64_t seed = derive_seed(params.seed, 0xF17AULL, static_cast<uint64_t>(config.id));
    TrainConfig tc = to_train_config(config, params.max_epochs, seed);
    uint32_t n_entities = static_cast<uint32_t>(dataset.entities.size());
    if (tc.num_negatives >= n_entities) tc.num_negatives = n_entities - 1;

    out.model = init_model(params.scorer, params.dim, n_entities,
                           static_cast<uint32_t>(dataset.relations.size()), tc.init_scale,
                           derive_seed(seed, 1));
    std::vector<double> freq = entity_frequencies(dataset.train_graph());
    out.trace = train(out.model, dataset.train, tc, freq);
    if (out.trace.diverged) {
        throw std::runtime_error("final_train: training diverged: " + out.trace.diagnostic);
    }
    std::vector<Triple> filter = dataset.train;
    filter.insert(filter.end(), dataset.valid.begin(), dataset.valid.end());
    filter.insert(filter.end(), dataset.test.begin(), dataset.test.end());
    if (!dataset.valid.empty()) out.valid_report = evaluate(out.model, dataset.valid, filter);
    if (!dataset.test.empty()) out.test_report = evaluate(out.model, dataset.test, filter);
    out.cost = 1.0;
    return out;
}

}  // namespace grash
