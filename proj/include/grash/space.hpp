#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grash/model.hpp"
#include "grash/train.hpp"

namespace grash {

enum class ParamKind { ContinuousLog, ContinuousLinear, IntegerLog, Categorical };

std::string to_string(ParamKind k);
ParamKind param_kind_from_string(const std::string& name);

struct ParamDesc {
    std::string name;
    ParamKind kind = ParamKind::ContinuousLinear;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::string> categories;
    double off_below = 0.0;  // log-sampled values below this map to 0 ("off")
};

// Per-model upper-bound override (e.g. the negative-sample cap).
struct BoundOverride {
    std::string param;
    Scorer scorer = Scorer::ComplEx;
    double hi = 0.0;
};

struct SearchSpace {
    std::vector<ParamDesc> params;
    std::vector<BoundOverride> overrides;

    const ParamDesc* find(const std::string& name) const;
};

// One sampled point of the space.
struct HyperparamConfig {
    int id = -1;
    std::map<std::string, double> numeric;
    std::map<std::string, std::string> categorical;

    double num(const std::string& name, double fallback) const;
    const std::string& cat(const std::string& name, const std::string& fallback) const;
};

// The default space: nine continuous-ish fields (log learning rate, linear
// lr decay, log weight decay with an off floor, linear dropout, log init
// scale, two log regularization strengths, integer-log negatives and batch
// size) plus optimizer and negative-pool categoricals. Negative caps:
// 10000 for ComplEx, 1000 for TransE/RotatE.
SearchSpace default_space();

// n independent draws: log-uniform for log kinds, uniform otherwise, then
// model-specific bound clamping. Same seed -> same configs for every
// scorer except clamped fields.
std::vector<HyperparamConfig> sample_configs(const SearchSpace& space, size_t n, uint64_t seed,
                                             Scorer scorer);

// True iff every config value lies inside its descriptor's domain
// (clamped bounds included).
bool in_domain(const SearchSpace& space, const HyperparamConfig& config, Scorer scorer);

// Materializes the trainer settings for one trial.
TrainConfig to_train_config(const HyperparamConfig& config, double epochs, uint64_t seed);

std::string space_to_json(const SearchSpace& space);
SearchSpace space_from_json(const std::string& json_text);
SearchSpace load_space(const std::string& path);

std::string config_to_json(const HyperparamConfig& config);
HyperparamConfig config_from_json(const std::string& json_text);

}  // namespace grash
