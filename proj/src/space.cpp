#include "grash/space.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "grash/rng.hpp"

namespace grash {

using nlohmann::json;

std::string to_string(ParamKind k) {
    switch (k) {
        case ParamKind::ContinuousLog: return "continuous-log";
        case ParamKind::ContinuousLinear: return "continuous-linear";
        case ParamKind::IntegerLog: return "integer-log";
        case ParamKind::Categorical: return "categorical";
    }
    return "?";
}

ParamKind param_kind_from_string(const std::string& name) {
    if (name == "continuous-log") return ParamKind::ContinuousLog;
    if (name == "continuous-linear") return ParamKind::ContinuousLinear;
    if (name == "integer-log") return ParamKind::IntegerLog;
    if (name == "categorical") return ParamKind::Categorical;
    throw std::invalid_argument("unknown parameter kind: " + name);
}

const ParamDesc* SearchSpace::find(const std::string& name) const {
    for (const auto& p : params) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

double HyperparamConfig::num(const std::string& name, double fallback) const {
    auto it = numeric.find(name);
    return it == numeric.end() ? fallback : it->second;
}

const std::string& HyperparamConfig::cat(const std::string& name,
                                         const std::string& fallback) const {
    auto it = categorical.find(name);
    return it == categorical.end() ? fallback : it->second;
}

SearchSpace default_space() {
    SearchSpace space;
    space.params = {
        {"learning_rate", ParamKind::ContinuousLog, 1e-4, 1.0, {}, 0.0},
        {"lr_decay", ParamKind::ContinuousLinear, 0.9, 1.0, {}, 0.0},
        {"weight_decay", ParamKind::ContinuousLog, 1e-12, 1e-2, {}, 1e-11},
        {"dropout", ParamKind::ContinuousLinear, 0.0, 0.5, {}, 0.0},
        {"init_scale", ParamKind::ContinuousLog, 1e-4, 1.0, {}, 0.0},
        {"entity_reg", ParamKind::ContinuousLog, 1e-12, 1e-2, {}, 1e-11},
        {"relation_reg", ParamKind::ContinuousLog, 1e-12, 1e-2, {}, 1e-11},
        {"num_negatives", ParamKind::IntegerLog, 16, 10000, {}, 0.0},
        {"batch_size", ParamKind::IntegerLog, 128, 4096, {}, 0.0},
        {"optimizer", ParamKind::Categorical, 0, 0, {"adagrad", "adam"}, 0.0},
        {"neg_pool", ParamKind::Categorical, 0, 0, {"uniform", "frequency"}, 0.0},
    };
    space.overrides = {
        {"num_negatives", Scorer::TransE, 1000},
        {"num_negatives", Scorer::RotatE, 1000},
    };
    return space;
}

std::vector<HyperparamConfig> sample_configs(const SearchSpace& space, size_t n, uint64_t seed,
                                             Scorer scorer) {
    if (n < 1) throw std::invalid_argument("sample_configs: n must be >= 1");
    for (const auto& p : space.params) {
        if (p.kind == ParamKind::Categorical) {
            if (p.categories.empty()) {
                throw std::invalid_argument("sample_configs: empty category list for " + p.name);
            }
        } else if (!(p.lo < p.hi) || !std::isfinite(p.lo) || !std::isfinite(p.hi)) {
            throw std::invalid_argument("sample_configs: bad bounds for " + p.name);
        }
    }

    Rng rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<HyperparamConfig> configs(n);
    for (size_t i = 0; i < n; ++i) {
        HyperparamConfig& cfg = configs[i];
        cfg.id = static_cast<int>(i);
        // Exactly one uniform draw per descriptor, so clamping never shifts
        // the stream between scorers.
        for (const auto& p : space.params) {
            double u = uni(rng);
            switch (p.kind) {
                case ParamKind::ContinuousLog: {
                    double v = std::exp(std::log(p.lo) + u * (std::log(p.hi) - std::log(p.lo)));
                    cfg.numeric[p.name] = v < p.off_below ? 0.0 : v;
                    break;
                }
                case ParamKind::ContinuousLinear:
                    cfg.numeric[p.name] = p.lo + u * (p.hi - p.lo);
                    break;
                case ParamKind::IntegerLog: {
                    double v = std::exp(std::log(p.lo) + u * (std::log(p.hi) - std::log(p.lo)));
                    cfg.numeric[p.name] = std::round(v);
                    break;
                }
                case ParamKind::Categorical: {
                    size_t idx = std::min(p.categories.size() - 1,
                                          static_cast<size_t>(u * p.categories.size()));
                    cfg.categorical[p.name] = p.categories[idx];
                    break;
                }
            }
        }
        for (const auto& ov : space.overrides) {
            if (ov.scorer != scorer) continue;
            auto it = cfg.numeric.find(ov.param);
            if (it != cfg.numeric.end() && it->second > ov.hi) it->second = ov.hi;
        }
    }
    return configs;
}

bool in_domain(const SearchSpace& space, const HyperparamConfig& config, Scorer scorer) {
    for (const auto& p : space.params) {
        if (p.kind == ParamKind::Categorical) {
            auto it = config.categorical.find(p.name);
            if (it == config.categorical.end()) return false;
            bool found = false;
            for (const auto& c : p.categories) found = found || c == it->second;
            if (!found) return false;
        } else {
            auto it = config.numeric.find(p.name);
            if (it == config.numeric.end()) return false;
            double v = it->second;
            if (v == 0.0 && p.off_below > 0.0) continue;  // "off"
            double hi = p.hi;
            for (const auto& ov : space.overrides) {
                if (ov.scorer == scorer && ov.param == p.name) hi = std::min(hi, ov.hi);
            }
            if (v < p.lo || v > hi) return false;
        }
    }
    return true;
}

TrainConfig to_train_config(const HyperparamConfig& config, double epochs, uint64_t seed) {
    TrainConfig tc;
    tc.learning_rate = config.num("learning_rate", tc.learning_rate);
    tc.lr_decay = config.num("lr_decay", tc.lr_decay);
    tc.weight_decay = config.num("weight_decay", tc.weight_decay);
    tc.dropout = config.num("dropout", tc.dropout);
    tc.init_scale = config.num("init_scale", tc.init_scale);
    tc.entity_reg = config.num("entity_reg", tc.entity_reg);
    tc.relation_reg = config.num("relation_reg", tc.relation_reg);
    tc.num_negatives = static_cast<uint32_t>(config.num("num_negatives", tc.num_negatives));
    tc.batch_size = static_cast<uint32_t>(config.num("batch_size", tc.batch_size));
    tc.optimizer = optimizer_from_string(config.cat("optimizer", "adagrad"));
    tc.neg_pool = neg_pool_from_string(config.cat("neg_pool", "uniform"));
    tc.epochs = epochs;
    tc.seed = seed;
    return tc;
}

std::string space_to_json(const SearchSpace& space) {
    json j;
    j["params"] = json::array();
    for (const auto& p : space.params) {
        json jp;
        jp["name"] = p.name;
        jp["kind"] = to_string(p.kind);
        if (p.kind == ParamKind::Categorical) {
            jp["categories"] = p.categories;
        } else {
            jp["lo"] = p.lo;
            jp["hi"] = p.hi;
            if (p.off_below > 0.0) jp["off_below"] = p.off_below;
        }
        j["params"].push_back(jp);
    }
    j["overrides"] = json::array();
    for (const auto& ov : space.overrides) {
        j["overrides"].push_back(
            {{"param", ov.param}, {"scorer", to_string(ov.scorer)}, {"hi", ov.hi}});
    }
    return j.dump(2);
}

SearchSpace space_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    SearchSpace space;
    for (const auto& jp : j.at("params")) {
        ParamDesc p;
        p.name = jp.at("name").get<std::string>();
        p.kind = param_kind_from_string(jp.at("kind").get<std::string>());
        if (p.kind == ParamKind::Categorical) {
            p.categories = jp.at("categories").get<std::vector<std::string>>();
        } else {
            p.lo = jp.at("lo").get<double>();
            p.hi = jp.at("hi").get<double>();
            p.off_below = jp.value("off_below", 0.0);
        }
        space.params.push_back(std::move(p));
    }
    for (const auto& jo : j.value("overrides", json::array())) {
        space.overrides.push_back({jo.at("param").get<std::string>(),
                                   scorer_from_string(jo.at("scorer").get<std::string>()),
                                   jo.at("hi").get<double>()});
    }
    return space;
}

SearchSpace load_space(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open search space file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return space_from_json(buf.str());
}

std::string config_to_json(const HyperparamConfig& config) {
    json j;
    j["id"] = config.id;
    j["numeric"] = config.numeric;
    j["categorical"] = config.categorical;
    return j.dump(2);
}

HyperparamConfig config_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    HyperparamConfig cfg;
    cfg.id = j.value("id", -1);
    cfg.numeric = j.at("numeric").get<std::map<std::string, double>>();
    cfg.categorical = j.at("categorical").get<std::map<std::string, std::string>>();
    return cfg;
}

}  // namespace grash
