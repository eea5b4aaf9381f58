#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "grash/eval.hpp"
#include "grash/kg.hpp"
#include "grash/model.hpp"
#include "grash/reduce.hpp"
#include "grash/space.hpp"
#include "grash/train.hpp"

namespace grash {

enum class Variant { Epoch, Graph, Combined };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct SearchParams {
    double budget = 3.0;      // B, in full-training-run units
    size_t num_configs = 64;  // n
    size_t eta = 4;           // reduction factor
    double max_epochs = 64;   // E, full-fidelity training length
    Variant variant = Variant::Combined;
    size_t valid_size = 5000;
    Scorer scorer = Scorer::ComplEx;
    uint32_t dim = 128;
    uint64_t seed = 0;
    size_t workers = 1;
};

struct RoundPlan {
    size_t round = 0;  // 1-based
    size_t n_configs = 0;
    double fidelity = 0.0;  // f_i (per reduction dimension for combined)
    double epochs = 0.0;    // E_i, fractional allowed
    bool reduce_graph = false;
    uint32_t core_k = 0;          // selected core (when reduce_graph)
    size_t core_triples = 0;      // |K_i| from the ladder
    double target_cost = 0.0;     // per trial, from the target fidelity alone
    double planned_cost = 0.0;    // per trial, with the realized core size
    bool fidelity_clamped = false;
    bool core_overshoot = false;
    bool partial_epochs = false;  // E_i < 1, a form of triple sampling
};

struct SearchSchedule {
    size_t rounds = 0;             // s = ceil(log_eta(n))
    double per_round_budget = 0.0; // R = B / s
    std::vector<RoundPlan> plan;
    double planned_total = 0.0;    // sum of n_i * planned per-trial cost
};

struct TrialResult {
    int config_id = -1;
    size_t round = 0;  // 0 = final full-fidelity training
    double mrr = 0.0;
    std::map<uint32_t, double> hits_at;
    double planned_cost = 0.0;
    double realized_cost = 0.0;
    uint32_t scaled_negatives = 0;
    double final_loss = 0.0;
    uint64_t score_computations = 0;
    bool ok = true;
    std::string diagnostic;
    bool selected = false;
};

struct BudgetLedger {
    double planned_total = 0.0;
    double realized_total = 0.0;
    double final_train_cost = 0.0;  // not part of B
};

struct SearchResult {
    HyperparamConfig best;
    SearchSchedule schedule;
    std::vector<TrialResult> trials;
    BudgetLedger ledger;
};

// Relative training cost of one trial under the linear cost model.
double trial_cost(double epochs_i, double epochs_full, size_t triples_i, size_t triples_full);

// Plans rounds, fidelities and realized graphs. The ladder may be null for
// the epoch variant.
SearchSchedule plan_schedule(const SearchParams& params, const CoreLadder* ladder,
                             size_t full_triples);

using TrialLogger = std::function<void(const TrialResult&)>;

// The full successive-halving loop over a dataset's train split. Per round:
// realize the reduced graph, re-split train/valid, scale negatives, train
// every surviving config from fresh initialization, validate by filtered
// MRR, and keep the best ceil(|Λ|/eta). Deterministic per seed.
SearchResult run_search(const DatasetSplit& dataset, const SearchSpace& space,
                        const SearchParams& params, const TrialLogger& logger = nullptr);

struct FinalTrainResult {
    EmbeddingModel model;
    RankingReport valid_report;
    RankingReport test_report;
    LossTrace trace;
    double cost = 0.0;  // one full run; excluded from B
};

// Full-fidelity training of one config on the original train split,
// evaluated on valid and test with standard filtering (train u valid u test).
FinalTrainResult final_train(const DatasetSplit& dataset, const HyperparamConfig& config,
                             const SearchParams& params);

}  // namespace grash
