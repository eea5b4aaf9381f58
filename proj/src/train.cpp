#include "grash/train.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace grash {

std::string to_string(Optimizer o) { return o == Optimizer::Adagrad ? "adagrad" : "adam"; }

Optimizer optimizer_from_string(const std::string& name) {
    if (name == "adagrad") return Optimizer::Adagrad;
    if (name == "adam") return Optimizer::Adam;
    throw std::invalid_argument("unknown optimizer: " + name);
}

std::string to_string(NegPool p) { return p == NegPool::Uniform ? "uniform" : "frequency"; }

NegPool neg_pool_from_string(const std::string& name) {
    if (name == "uniform") return NegPool::Uniform;
    if (name == "frequency") return NegPool::Frequency;
    throw std::invalid_argument("unknown negative pool: " + name);
}

uint32_t scale_negatives(uint32_t n_neg, size_t sub_entities, size_t full_entities) {
    if (n_neg < 1) throw std::invalid_argument("scale_negatives: n_neg must be >= 1");
    if (sub_entities == 0 || sub_entities > full_entities) {
        throw std::invalid_argument("scale_negatives: need 0 < sub_entities <= full_entities");
    }
    double scaled = static_cast<double>(n_neg) * static_cast<double>(sub_entities) /
                    static_cast<double>(full_entities);
    return std::max<uint32_t>(1, static_cast<uint32_t>(std::llround(scaled)));
}

std::vector<uint32_t> sample_negatives(Rng& rng, uint32_t n_entities, uint32_t n) {
    if (n >= n_entities) {
        throw std::invalid_argument("sample_negatives: n must be < number of entities");
    }
    // Floyd's sampling: n distinct values, uniform over all n-subsets.
    std::vector<uint32_t> out;
    out.reserve(n);
    std::unordered_set<uint32_t> seen;
    for (uint32_t j = n_entities - n; j < n_entities; ++j) {
        std::uniform_int_distribution<uint32_t> pick(0, j);
        uint32_t t = pick(rng);
        if (!seen.insert(t).second) {
            seen.insert(j);
            out.push_back(j);
        } else {
            out.push_back(t);
        }
    }
    return out;
}

namespace {

// Walker alias table for O(1) weighted draws.
struct AliasTable {
    std::vector<double> prob;
    std::vector<uint32_t> alias;

    explicit AliasTable(std::span<const double> weights) {
        size_t n = weights.size();
        prob.resize(n);
        alias.resize(n);
        double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (!(total > 0.0)) throw std::invalid_argument("alias table: weights must sum > 0");
        std::vector<double> scaled(n);
        std::vector<uint32_t> small, large;
        for (size_t i = 0; i < n; ++i) {
            scaled[i] = weights[i] * n / total;
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            uint32_t s = small.back(), l = large.back();
            small.pop_back();
            large.pop_back();
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        for (uint32_t i : large) prob[i] = 1.0;
        for (uint32_t i : small) prob[i] = 1.0;
    }

    uint32_t draw(Rng& rng) const {
        std::uniform_int_distribution<size_t> pick(0, prob.size() - 1);
        size_t i = pick(rng);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        return uni(rng) < prob[i] ? static_cast<uint32_t>(i) : alias[i];
    }
};

}  // namespace

std::vector<uint32_t> sample_negatives_weighted(Rng& rng, std::span<const double> weights,
                                                uint32_t n) {
    uint32_t positive_weights = 0;
    for (double w : weights) positive_weights += w > 0.0;
    if (n >= positive_weights) {
        throw std::invalid_argument("sample_negatives_weighted: n must be < sampleable entities");
    }
    AliasTable table(weights);
    std::vector<uint32_t> out;
    out.reserve(n);
    std::unordered_set<uint32_t> seen;
    while (out.size() < n) {
        uint32_t e = table.draw(rng);
        if (seen.insert(e).second) out.push_back(e);
    }
    return out;
}

namespace {

// Dense gradient arrays with stamp-tracked touched rows; cleared lazily.
struct GradBuffers {
    std::vector<double> ent, rel;
    std::vector<uint32_t> ent_touched, rel_touched;
    std::vector<char> ent_mark, rel_mark;
    uint32_t dim = 0, rel_width = 0;

    void init(const EmbeddingModel& m) {
        dim = m.dim;
        rel_width = m.relation_width();
        ent.assign(m.entity.size(), 0.0);
        rel.assign(m.relation.size(), 0.0);
        ent_mark.assign(m.n_entities, 0);
        rel_mark.assign(m.n_relations, 0);
    }

    std::span<double> entity_row(uint32_t e) {
        if (!ent_mark[e]) {
            ent_mark[e] = 1;
            ent_touched.push_back(e);
        }
        return {ent.data() + static_cast<size_t>(e) * dim, dim};
    }
    std::span<double> relation_row(uint32_t p) {
        if (!rel_mark[p]) {
            rel_mark[p] = 1;
            rel_touched.push_back(p);
        }
        return {rel.data() + static_cast<size_t>(p) * rel_width, rel_width};
    }
    void clear() {
        for (uint32_t e : ent_touched) {
            ent_mark[e] = 0;
            std::fill_n(ent.begin() + static_cast<size_t>(e) * dim, dim, 0.0);
        }
        for (uint32_t p : rel_touched) {
            rel_mark[p] = 0;
            std::fill_n(rel.begin() + static_cast<size_t>(p) * rel_width, rel_width, 0.0);
        }
        ent_touched.clear();
        rel_touched.clear();
    }
};

struct Workspace {
    std::vector<double> masked_s, masked_p, masked_o;  // dropout-scaled copies
    std::vector<double> mask_s, mask_p, mask_o;        // 0 or 1/(1-p) per entry
    std::vector<double> scores, probs;
    std::vector<double> gs, gp, go;  // masked-space fixed-side gradients
    std::vector<uint32_t> negs_s, negs_o;
};

// Cross-entropy over {positive, negatives} for one direction. Fixed-side
// gradients accumulate in masked space (ws.gs/gp/go); negative-candidate
// gradients go straight into the dense buffers.
double direction_loss(const EmbeddingModel& model, Direction dir, const Triple& pos,
                      std::span<const uint32_t> negs, Workspace& ws, GradBuffers* grads) {
    size_t n_cand = negs.size() + 1;
    ws.scores.resize(n_cand);
    std::span<const double> s_used = ws.masked_s, p_used = ws.masked_p, o_used = ws.masked_o;

    auto cand_row = [&](size_t j) -> std::span<const double> {
        if (j == 0) return dir == Direction::SPx ? o_used : s_used;
        return model.entity_row(negs[j - 1]);
    };
    for (size_t j = 0; j < n_cand; ++j) {
        ws.scores[j] = dir == Direction::SPx
                           ? score_vectors(model.scorer, model.transe_norm, s_used, p_used, cand_row(j))
                           : score_vectors(model.scorer, model.transe_norm, cand_row(j), p_used, o_used);
    }
    double mx = *std::max_element(ws.scores.begin(), ws.scores.end());
    double z = 0.0;
    for (double v : ws.scores) z += std::exp(v - mx);
    double loss = -(ws.scores[0] - mx - std::log(z));

    if (grads != nullptr) {
        ws.probs.resize(n_cand);
        for (size_t j = 0; j < n_cand; ++j) ws.probs[j] = std::exp(ws.scores[j] - mx) / z;
        for (size_t j = 0; j < n_cand; ++j) {
            double w = ws.probs[j] - (j == 0 ? 1.0 : 0.0);
            std::span<double> gcand =
                j == 0 ? std::span<double>(dir == Direction::SPx ? ws.go : ws.gs)
                       : grads->entity_row(negs[j - 1]);
            if (dir == Direction::SPx) {
                score_backward(model.scorer, model.transe_norm, s_used, p_used, cand_row(j), w,
                               ws.gs, ws.gp, gcand);
            } else {
                score_backward(model.scorer, model.transe_norm, cand_row(j), p_used, o_used, w,
                               gcand, ws.gp, ws.go);
            }
        }
    }
    return loss;
}

// Full per-positive loss: both directions plus the triple's L2 penalties.
// Masks must already be populated in ws.
double positive_forward_backward(const EmbeddingModel& model, const Triple& pos,
                                 std::span<const uint32_t> neg_subjects,
                                 std::span<const uint32_t> neg_objects, const TrainConfig& cfg,
                                 Workspace& ws, GradBuffers* grads) {
    if (grads != nullptr) {
        std::fill(ws.gs.begin(), ws.gs.end(), 0.0);
        std::fill(ws.gp.begin(), ws.gp.end(), 0.0);
        std::fill(ws.go.begin(), ws.go.end(), 0.0);
    }
    double loss = direction_loss(model, Direction::SPx, pos, neg_objects, ws, grads);
    loss += direction_loss(model, Direction::xPO, pos, neg_subjects, ws, grads);

    auto s_raw = model.entity_row(pos.s);
    auto p_raw = model.relation_row(pos.p);
    auto o_raw = model.entity_row(pos.o);
    if (cfg.entity_reg > 0.0) {
        double sq = 0.0;
        for (double v : s_raw) sq += v * v;
        for (double v : o_raw) sq += v * v;
        loss += 0.5 * cfg.entity_reg * sq;
    }
    if (cfg.relation_reg > 0.0) {
        double sq = 0.0;
        for (double v : p_raw) sq += v * v;
        loss += 0.5 * cfg.relation_reg * sq;
    }

    if (grads != nullptr) {
        // Fold masked-space gradients through the dropout masks, then add
        // the penalty gradients on the raw rows.
        auto gs_row = grads->entity_row(pos.s);
        auto gp_row = grads->relation_row(pos.p);
        auto go_row = grads->entity_row(pos.o);
        for (uint32_t j = 0; j < model.dim; ++j) {
            gs_row[j] += ws.gs[j] * ws.mask_s[j] + cfg.entity_reg * s_raw[j];
            go_row[j] += ws.go[j] * ws.mask_o[j] + cfg.entity_reg * o_raw[j];
        }
        for (uint32_t j = 0; j < model.relation_width(); ++j) {
            gp_row[j] += ws.gp[j] * ws.mask_p[j] + cfg.relation_reg * p_raw[j];
        }
    }
    return loss;
}

void prepare_masks(const EmbeddingModel& model, const Triple& pos, double dropout, Rng* rng,
                   Workspace& ws) {
    uint32_t dim = model.dim, w = model.relation_width();
    ws.mask_s.assign(dim, 1.0);
    ws.mask_p.assign(w, 1.0);
    ws.mask_o.assign(dim, 1.0);
    if (dropout > 0.0 && rng != nullptr) {
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        double keep_scale = 1.0 / (1.0 - dropout);
        for (double& m : ws.mask_s) m = uni(*rng) < dropout ? 0.0 : keep_scale;
        for (double& m : ws.mask_p) m = uni(*rng) < dropout ? 0.0 : keep_scale;
        for (double& m : ws.mask_o) m = uni(*rng) < dropout ? 0.0 : keep_scale;
    }
    auto s_raw = model.entity_row(pos.s);
    auto p_raw = model.relation_row(pos.p);
    auto o_raw = model.entity_row(pos.o);
    ws.masked_s.resize(dim);
    ws.masked_p.resize(w);
    ws.masked_o.resize(dim);
    for (uint32_t j = 0; j < dim; ++j) ws.masked_s[j] = s_raw[j] * ws.mask_s[j];
    for (uint32_t j = 0; j < w; ++j) ws.masked_p[j] = p_raw[j] * ws.mask_p[j];
    for (uint32_t j = 0; j < dim; ++j) ws.masked_o[j] = o_raw[j] * ws.mask_o[j];
    ws.gs.resize(dim);
    ws.gp.resize(w);
    ws.go.resize(dim);
}

// Per-row optimizer state, allocated once per train() call.
struct OptimizerState {
    Optimizer kind = Optimizer::Adagrad;
    std::vector<double> ent_acc, rel_acc;  // adagrad: sum of squares; adam: first moment
    std::vector<double> ent_v, rel_v;      // adam second moment
    uint64_t step = 0;

    void init(const EmbeddingModel& m, Optimizer k) {
        kind = k;
        ent_acc.assign(m.entity.size(), 0.0);
        rel_acc.assign(m.relation.size(), 0.0);
        if (kind == Optimizer::Adam) {
            ent_v.assign(m.entity.size(), 0.0);
            rel_v.assign(m.relation.size(), 0.0);
        }
    }

    void apply(std::span<double> param, std::span<const double> grad, size_t base_index,
               std::vector<double>& acc, std::vector<double>& v, double lr) {
        constexpr double kEps = 1e-10;
        constexpr double kBeta1 = 0.9, kBeta2 = 0.999;
        if (kind == Optimizer::Adagrad) {
            for (size_t j = 0; j < param.size(); ++j) {
                double g = grad[j];
                acc[base_index + j] += g * g;
                param[j] -= lr * g / (std::sqrt(acc[base_index + j]) + kEps);
            }
        } else {
            double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
            double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
            for (size_t j = 0; j < param.size(); ++j) {
                double g = grad[j];
                double& m1 = acc[base_index + j];
                double& m2 = v[base_index + j];
                m1 = kBeta1 * m1 + (1.0 - kBeta1) * g;
                m2 = kBeta2 * m2 + (1.0 - kBeta2) * g * g;
                param[j] -= lr * (m1 / c1) / (std::sqrt(m2 / c2) + kEps);
            }
        }
    }
};

}  // namespace

double positive_loss(const EmbeddingModel& model, const Triple& pos,
                     std::span<const uint32_t> neg_subjects, std::span<const uint32_t> neg_objects,
                     const TrainConfig& config) {
    Workspace ws;
    prepare_masks(model, pos, 0.0, nullptr, ws);
    return positive_forward_backward(model, pos, neg_subjects, neg_objects, config, ws, nullptr);
}

double positive_loss_grad(const EmbeddingModel& model, const Triple& pos,
                          std::span<const uint32_t> neg_subjects,
                          std::span<const uint32_t> neg_objects, const TrainConfig& config,
                          std::vector<double>& grad_entity, std::vector<double>& grad_relation) {
    Workspace ws;
    prepare_masks(model, pos, 0.0, nullptr, ws);
    GradBuffers grads;
    grads.init(model);
    double loss =
        positive_forward_backward(model, pos, neg_subjects, neg_objects, config, ws, &grads);
    grad_entity = grads.ent;
    grad_relation = grads.rel;
    return loss;
}

LossTrace train(EmbeddingModel& model, std::span<const Triple> train_triples,
                const TrainConfig& cfg, std::span<const double> entity_weights) {
    if (cfg.epochs < 0.0) throw std::invalid_argument("train: epochs must be >= 0");
    if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    LossTrace trace;
    if (cfg.epochs == 0.0) return trace;
    if (train_triples.empty()) throw std::invalid_argument("train: empty training set");
    if (cfg.num_negatives >= model.n_entities) {
        throw std::invalid_argument("train: num_negatives must be < entity count (scale first)");
    }
    if (cfg.neg_pool == NegPool::Frequency && entity_weights.size() != model.n_entities) {
        throw std::invalid_argument("train: frequency pool requires per-entity weights");
    }

    Rng rng(cfg.seed);
    GradBuffers grads;
    grads.init(model);
    OptimizerState opt;
    opt.init(model, cfg.optimizer);
    Workspace ws;

    std::unique_ptr<AliasTable> alias;
    if (cfg.neg_pool == NegPool::Frequency) alias = std::make_unique<AliasTable>(entity_weights);

    // In-loop without-replacement sampler using a stamp array (no hashing).
    std::vector<uint32_t> stamp(model.n_entities, UINT32_MAX);
    uint32_t stamp_epoch = 0;
    auto draw_negatives = [&](std::vector<uint32_t>& out) {
        uint32_t n = cfg.num_negatives;
        out.clear();
        ++stamp_epoch;
        if (alias) {
            while (out.size() < n) {
                uint32_t e = alias->draw(rng);
                if (stamp[e] != stamp_epoch) {
                    stamp[e] = stamp_epoch;
                    out.push_back(e);
                }
            }
        } else {
            for (uint32_t j = model.n_entities - n; j < model.n_entities; ++j) {
                std::uniform_int_distribution<uint32_t> pick(0, j);
                uint32_t t = pick(rng);
                if (stamp[t] == stamp_epoch) t = j;
                stamp[t] = stamp_epoch;
                out.push_back(t);
            }
        }
    };

    const size_t n_train = train_triples.size();
    std::vector<uint32_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);

    size_t full_epochs = static_cast<size_t>(cfg.epochs);
    double frac = cfg.epochs - static_cast<double>(full_epochs);
    size_t partial_count = static_cast<size_t>(std::llround(frac * static_cast<double>(n_train)));
    size_t total_epochs = full_epochs + (partial_count > 0 ? 1 : 0);

    for (size_t epoch = 0; epoch < total_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        size_t count = (epoch < full_epochs) ? n_train : partial_count;
        double lr_epoch = cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>(epoch));
        double epoch_loss = 0.0;

        for (size_t start = 0; start < count; start += cfg.batch_size) {
            size_t end = std::min(count, start + cfg.batch_size);
            for (size_t i = start; i < end; ++i) {
                const Triple& pos = train_triples[order[i]];
                prepare_masks(model, pos, cfg.dropout, &rng, ws);
                draw_negatives(ws.negs_o);
                draw_negatives(ws.negs_s);
                epoch_loss += positive_forward_backward(model, pos, ws.negs_s, ws.negs_o, cfg,
                                                        ws, &grads);
                trace.score_computations += 2ULL * cfg.num_negatives + 1;
            }

            ++opt.step;
            for (uint32_t e : grads.ent_touched) {
                size_t base = static_cast<size_t>(e) * model.dim;
                std::span<double> g(grads.ent.data() + base, model.dim);
                if (cfg.weight_decay > 0.0) {
                    auto row = model.entity_row(e);
                    for (uint32_t j = 0; j < model.dim; ++j) g[j] += cfg.weight_decay * row[j];
                }
                opt.apply(model.entity_row(e), g, base, opt.ent_acc, opt.ent_v, lr_epoch);
            }
            for (uint32_t p : grads.rel_touched) {
                size_t base = static_cast<size_t>(p) * model.relation_width();
                std::span<double> g(grads.rel.data() + base, model.relation_width());
                if (cfg.weight_decay > 0.0) {
                    auto row = model.relation_row(p);
                    for (uint32_t j = 0; j < model.relation_width(); ++j) {
                        g[j] += cfg.weight_decay * row[j];
                    }
                }
                opt.apply(model.relation_row(p), g, base, opt.rel_acc, opt.rel_v, lr_epoch);
            }
            grads.clear();
        }

        double avg = count > 0 ? epoch_loss / static_cast<double>(count) : 0.0;
        trace.epoch_loss.push_back(avg);
        // A healthy cross-entropy loss stays within a few nats of
        // 2 * log(candidates); orders of magnitude beyond that means the
        // parameters blew up even if the numbers are still finite.
        constexpr double kDivergenceLoss = 1e4;
        if (!std::isfinite(avg) || std::abs(avg) > kDivergenceLoss) {
            trace.diverged = true;
            trace.diagnostic = "training loss diverged in epoch " + std::to_string(epoch + 1);
            return trace;
        }
    }
    return trace;
}

}  // namespace grash
