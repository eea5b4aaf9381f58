#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace grash {

enum class Scorer { ComplEx, TransE, RotatE };

std::string to_string(Scorer s);
Scorer scorer_from_string(const std::string& name);

enum class TransENorm { L2, L1 };

// Embedding storage for one trained model. Real vectors for TransE;
// interleaved (re, im) complex pairs for ComplEx and RotatE entities.
// RotatE relations are stored as dim/2 phase angles.
struct EmbeddingModel {
    Scorer scorer = Scorer::ComplEx;
    uint32_t dim = 0;
    uint32_t n_entities = 0;
    uint32_t n_relations = 0;
    TransENorm transe_norm = TransENorm::L2;
    uint64_t init_seed = 0;
    std::vector<double> entity;    // n_entities x dim, row-major
    std::vector<double> relation;  // n_relations x relation_width, row-major

    uint32_t relation_width() const { return scorer == Scorer::RotatE ? dim / 2 : dim; }

    std::span<const double> entity_row(uint32_t e) const {
        return {entity.data() + static_cast<size_t>(e) * dim, dim};
    }
    std::span<double> entity_row(uint32_t e) {
        return {entity.data() + static_cast<size_t>(e) * dim, dim};
    }
    std::span<const double> relation_row(uint32_t p) const {
        return {relation.data() + static_cast<size_t>(p) * relation_width(), relation_width()};
    }
    std::span<double> relation_row(uint32_t p) {
        return {relation.data() + static_cast<size_t>(p) * relation_width(), relation_width()};
    }
};

// Embeddings i.i.d. uniform in [-init_scale, init_scale]; RotatE phases
// uniform in [0, 2pi). Deterministic per seed.
EmbeddingModel init_model(Scorer scorer, uint32_t dim, uint32_t n_entities, uint32_t n_relations,
                          double init_scale, uint64_t seed);

// Raw scoring on embedding vectors (spans sized dim / relation width).
double score_vectors(Scorer scorer, TransENorm norm, std::span<const double> s,
                     std::span<const double> p, std::span<const double> o);

double score(const EmbeddingModel& model, uint32_t s, uint32_t p, uint32_t o);

enum class Direction { SPx, xPO };  // (s, p, ?) vs (?, p, o)

// Scores of all candidate entities substituted into the open slot.
std::vector<double> score_candidates(const EmbeddingModel& model, Direction dir, uint32_t fixed_e,
                                     uint32_t p);
void score_candidates_into(const EmbeddingModel& model, Direction dir, uint32_t fixed_e,
                           uint32_t p, std::span<double> out);

// Accumulates weight * d(score)/d(embedding entry) into the gradient spans
// (same layout as the corresponding embedding rows).
void score_backward(Scorer scorer, TransENorm norm, std::span<const double> s,
                    std::span<const double> p, std::span<const double> o, double weight,
                    std::span<double> gs, std::span<double> gp, std::span<double> go);

// Versioned little-endian binary checkpoint.
void save_checkpoint(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_checkpoint(const std::string& path);

}  // namespace grash
