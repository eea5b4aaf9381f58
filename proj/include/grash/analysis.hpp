#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grash/kg.hpp"
#include "grash/search.hpp"
#include "grash/space.hpp"

namespace grash {

struct CorrelationReport {
    std::string technique;
    double budget = 0.0;
    double spearman_rho = 0.0;
    size_t n_configs = 0;
    std::vector<std::pair<double, double>> pairs;  // (low-fidelity MRR, full-fidelity MRR)
    std::string note;
};

// Mean ranks of the values in v (ties get the average of their positions).
std::vector<double> mean_ranks(std::span<const double> v);

// Spearman's rho: Pearson correlation of mean-tied ranks. Errors when
// either rank vector has zero variance.
double spearman(std::span<const double> a, std::span<const double> b);

struct SweepParams {
    size_t n_configs = 30;
    std::vector<std::string> techniques = {"kcore", "walk", "triple", "epoch", "combined"};
    std::vector<double> budgets = {0.01, 0.05, 0.1, 0.25, 0.5};
    double full_epochs = 8;
    Scorer scorer = Scorer::ComplEx;
    uint32_t dim = 32;
    size_t valid_size = 5000;
    uint64_t seed = 0;
    size_t workers = 1;
};

// Transferability study: one full-fidelity reference pass over all configs,
// then one low-fidelity pass per (technique, budget) cell using the same
// configs and seeds; each cell reports the rank correlation of its MRRs
// against the reference. Failed reference configs are excluded everywhere.
std::vector<CorrelationReport> transferability_sweep(const DatasetSplit& dataset,
                                                     const SearchSpace& space,
                                                     const SweepParams& params);

}  // namespace grash
