#include "grash/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "grash/rng.hpp"

namespace grash {

namespace {

constexpr double kNormEps = 1e-12;  // guards the gradient at an exact geometric match

}  // namespace

std::string to_string(Scorer s) {
    switch (s) {
        case Scorer::ComplEx: return "complex";
        case Scorer::TransE: return "transe";
        case Scorer::RotatE: return "rotate";
    }
    return "?";
}

Scorer scorer_from_string(const std::string& name) {
    if (name == "complex") return Scorer::ComplEx;
    if (name == "transe") return Scorer::TransE;
    if (name == "rotate") return Scorer::RotatE;
    throw std::invalid_argument("unknown scorer: " + name);
}

EmbeddingModel init_model(Scorer scorer, uint32_t dim, uint32_t n_entities, uint32_t n_relations,
                          double init_scale, uint64_t seed) {
    if (dim < 2) throw std::invalid_argument("init_model: dim must be >= 2");
    if ((scorer == Scorer::ComplEx || scorer == Scorer::RotatE) && dim % 2 != 0) {
        throw std::invalid_argument("init_model: dim must be even for complex-valued scorers");
    }
    EmbeddingModel m;
    m.scorer = scorer;
    m.dim = dim;
    m.n_entities = n_entities;
    m.n_relations = n_relations;
    m.init_seed = seed;
    m.entity.resize(static_cast<size_t>(n_entities) * dim);
    m.relation.resize(static_cast<size_t>(n_relations) * m.relation_width());

    Rng rng(seed);
    std::uniform_real_distribution<double> uni(-init_scale, init_scale);
    for (double& v : m.entity) v = uni(rng);
    if (scorer == Scorer::RotatE) {
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        for (double& v : m.relation) v = phase(rng);
    } else {
        for (double& v : m.relation) v = uni(rng);
    }
    return m;
}

double score_vectors(Scorer scorer, TransENorm norm, std::span<const double> s,
                     std::span<const double> p, std::span<const double> o) {
    switch (scorer) {
        case Scorer::ComplEx: {
            // Re(<e_s, e_p, conj(e_o)>) over interleaved (re, im) pairs.
            double acc = 0.0;
            for (size_t j = 0; j + 1 < s.size(); j += 2) {
                double sr = s[j], si = s[j + 1];
                double pr = p[j], pi = p[j + 1];
                double orr = o[j], oi = o[j + 1];
                acc += sr * pr * orr + si * pi * orr + sr * pi * oi - si * pr * oi;
            }
            return acc;
        }
        case Scorer::TransE: {
            if (norm == TransENorm::L1) {
                double acc = 0.0;
                for (size_t j = 0; j < s.size(); ++j) acc += std::abs(s[j] + p[j] - o[j]);
                return -acc;
            }
            double acc = 0.0;
            for (size_t j = 0; j < s.size(); ++j) {
                double d = s[j] + p[j] - o[j];
                acc += d * d;
            }
            return -std::sqrt(acc);
        }
        case Scorer::RotatE: {
            // -|| e_s o e_p - e_o ||_2 with e_p the unit rotation exp(i*theta).
            double acc = 0.0;
            for (size_t j = 0; j < p.size(); ++j) {
                double sr = s[2 * j], si = s[2 * j + 1];
                double c = std::cos(p[j]), sn = std::sin(p[j]);
                double dr = sr * c - si * sn - o[2 * j];
                double di = sr * sn + si * c - o[2 * j + 1];
                acc += dr * dr + di * di;
            }
            return -std::sqrt(acc);
        }
    }
    return 0.0;
}

double score(const EmbeddingModel& model, uint32_t s, uint32_t p, uint32_t o) {
    return score_vectors(model.scorer, model.transe_norm, model.entity_row(s),
                         model.relation_row(p), model.entity_row(o));
}

void score_candidates_into(const EmbeddingModel& model, Direction dir, uint32_t fixed_e,
                           uint32_t p, std::span<double> out) {
    for (uint32_t c = 0; c < model.n_entities; ++c) {
        out[c] = dir == Direction::SPx ? score(model, fixed_e, p, c) : score(model, c, p, fixed_e);
    }
}

std::vector<double> score_candidates(const EmbeddingModel& model, Direction dir, uint32_t fixed_e,
                                     uint32_t p) {
    std::vector<double> out(model.n_entities);
    score_candidates_into(model, dir, fixed_e, p, out);
    return out;
}

void score_backward(Scorer scorer, TransENorm norm, std::span<const double> s,
                    std::span<const double> p, std::span<const double> o, double weight,
                    std::span<double> gs, std::span<double> gp, std::span<double> go) {
    switch (scorer) {
        case Scorer::ComplEx: {
            for (size_t j = 0; j + 1 < s.size(); j += 2) {
                double sr = s[j], si = s[j + 1];
                double pr = p[j], pi = p[j + 1];
                double orr = o[j], oi = o[j + 1];
                gs[j] += weight * (pr * orr + pi * oi);
                gs[j + 1] += weight * (pi * orr - pr * oi);
                gp[j] += weight * (sr * orr - si * oi);
                gp[j + 1] += weight * (si * orr + sr * oi);
                go[j] += weight * (sr * pr + si * pi);
                go[j + 1] += weight * (sr * pi - si * pr);
            }
            return;
        }
        case Scorer::TransE: {
            if (norm == TransENorm::L1) {
                for (size_t j = 0; j < s.size(); ++j) {
                    double d = s[j] + p[j] - o[j];
                    double g = -weight * (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0));
                    gs[j] += g;
                    gp[j] += g;
                    go[j] -= g;
                }
                return;
            }
            double nrm = 0.0;
            for (size_t j = 0; j < s.size(); ++j) {
                double d = s[j] + p[j] - o[j];
                nrm += d * d;
            }
            nrm = std::sqrt(nrm);
            double inv = -weight / std::max(nrm, kNormEps);
            for (size_t j = 0; j < s.size(); ++j) {
                double d = s[j] + p[j] - o[j];
                gs[j] += inv * d;
                gp[j] += inv * d;
                go[j] -= inv * d;
            }
            return;
        }
        case Scorer::RotatE: {
            double nrm = 0.0;
            for (size_t j = 0; j < p.size(); ++j) {
                double sr = s[2 * j], si = s[2 * j + 1];
                double c = std::cos(p[j]), sn = std::sin(p[j]);
                double dr = sr * c - si * sn - o[2 * j];
                double di = sr * sn + si * c - o[2 * j + 1];
                nrm += dr * dr + di * di;
            }
            nrm = std::sqrt(nrm);
            double inv = -weight / std::max(nrm, kNormEps);
            for (size_t j = 0; j < p.size(); ++j) {
                double sr = s[2 * j], si = s[2 * j + 1];
                double c = std::cos(p[j]), sn = std::sin(p[j]);
                double a = sr * c - si * sn;       // rotated real part
                double b = sr * sn + si * c;       // rotated imaginary part
                double dr = a - o[2 * j];
                double di = b - o[2 * j + 1];
                gs[2 * j] += inv * (dr * c + di * sn);
                gs[2 * j + 1] += inv * (-dr * sn + di * c);
                gp[j] += inv * (dr * -b + di * a);
                go[2 * j] -= inv * dr;
                go[2 * j + 1] -= inv * di;
            }
            return;
        }
    }
}

namespace {

constexpr char kMagic[8] = {'G', 'R', 'S', 'H', 'C', 'K', 'P', '1'};

template <typename T>
void write_le(std::ofstream& out, T value) {
    // Byte order is fixed little-endian regardless of host.
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

}  // namespace

void save_checkpoint(const EmbeddingModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_le<uint32_t>(out, static_cast<uint32_t>(model.scorer));
    write_le<uint32_t>(out, model.dim);
    write_le<uint32_t>(out, model.n_entities);
    write_le<uint32_t>(out, model.n_relations);
    write_le<uint32_t>(out, static_cast<uint32_t>(model.transe_norm));
    write_le<uint64_t>(out, model.init_seed);
    for (double v : model.entity) write_le<double>(out, v);
    for (double v : model.relation) write_le<double>(out, v);
    if (!out) throw std::runtime_error("short write to checkpoint: " + path);
}

EmbeddingModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("not a grash checkpoint: " + path);
    }
    EmbeddingModel m;
    m.scorer = static_cast<Scorer>(read_le<uint32_t>(in));
    m.dim = read_le<uint32_t>(in);
    m.n_entities = read_le<uint32_t>(in);
    m.n_relations = read_le<uint32_t>(in);
    m.transe_norm = static_cast<TransENorm>(read_le<uint32_t>(in));
    m.init_seed = read_le<uint64_t>(in);
    m.entity.resize(static_cast<size_t>(m.n_entities) * m.dim);
    m.relation.resize(static_cast<size_t>(m.n_relations) * m.relation_width());
    for (double& v : m.entity) v = read_le<double>(in);
    for (double& v : m.relation) v = read_le<double>(in);
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return m;
}

}  // namespace grash
