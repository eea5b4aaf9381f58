#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grash/kg.hpp"
#include "grash/model.hpp"
#include "grash/rng.hpp"

namespace grash {

enum class Optimizer { Adagrad, Adam };
enum class NegPool { Uniform, Frequency };

std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& name);
std::string to_string(NegPool p);
NegPool neg_pool_from_string(const std::string& name);

struct TrainConfig {
    uint32_t num_negatives = 16;  // per positive, per direction; pre-scaled by the caller
    Optimizer optimizer = Optimizer::Adagrad;
    NegPool neg_pool = NegPool::Uniform;
    double learning_rate = 0.1;
    double lr_decay = 1.0;       // multiplicative, per epoch
    double weight_decay = 0.0;   // L2 on rows touched in a batch
    double entity_reg = 0.0;     // L2 on the positive triple's entity rows
    double relation_reg = 0.0;   // L2 on the positive triple's relation row
    double dropout = 0.0;        // on the positive triple's embedding vectors
    uint32_t batch_size = 256;
    double init_scale = 0.1;
    double epochs = 1.0;  // fractional allowed
    uint64_t seed = 0;
};

struct LossTrace {
    std::vector<double> epoch_loss;  // average loss per (partial) epoch
    uint64_t score_computations = 0;
    bool diverged = false;
    std::string diagnostic;
};

// N_i = max(1, round(n_neg * sub_entities / full_entities)); preserves each
// entity's probability of being drawn as a negative on the subgraph.
uint32_t scale_negatives(uint32_t n_neg, size_t sub_entities, size_t full_entities);

// n distinct entity indices drawn uniformly without replacement from
// [0, n_entities). Errors if n >= n_entities.
std::vector<uint32_t> sample_negatives(Rng& rng, uint32_t n_entities, uint32_t n);

// Frequency-weighted variant: distinct entities drawn proportionally to the
// given nonnegative weights (rejection over an alias table).
std::vector<uint32_t> sample_negatives_weighted(Rng& rng, std::span<const double> weights,
                                                uint32_t n);

// Cross-entropy training over {positive + sampled negatives} per direction.
// Runs floor(epochs) full epochs plus one partial epoch over the first
// frac(epochs)*|train| triples of a fresh shuffle. Mutates the model in
// place; on divergence the trace is flagged and training stops.
// entity_weights (optional) feed the frequency-weighted negative pool.
LossTrace train(EmbeddingModel& model, std::span<const Triple> train_triples,
                const TrainConfig& config, std::span<const double> entity_weights = {});

// Loss (and gradient accumulation) for a single positive with fixed
// candidate lists; exposed for finite-difference checks.
double positive_loss(const EmbeddingModel& model, const Triple& pos,
                     std::span<const uint32_t> neg_subjects, std::span<const uint32_t> neg_objects,
                     const TrainConfig& config);

// Same loss with the analytic gradient accumulated into dense arrays shaped
// like model.entity / model.relation (zeroed by the callee).
double positive_loss_grad(const EmbeddingModel& model, const Triple& pos,
                          std::span<const uint32_t> neg_subjects,
                          std::span<const uint32_t> neg_objects, const TrainConfig& config,
                          std::vector<double>& grad_entity, std::vector<double>& grad_relation);

}  // namespace grash
